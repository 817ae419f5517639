//! Instance generators: Erdős–Rényi arrivals with Bernoulli refills, and the three
//! adaptive adversaries (a single Kalyanasundaram–Pruhs block, the duplicated-block
//! composite with a refill tail, and the phased elimination graph).

mod erdos_renyi;
mod kp;
mod theorem1;
mod theorem2;

pub use erdos_renyi::{gen_erdos_renyi, ErParams};
pub use kp::{kp_adversary, KpAdversary, KpParams};
pub use theorem1::{gen_theorem1, Theorem1Adversary};
pub use theorem2::{
    default_t0, gen_theorem2, phase_times, theorem2_server_count, PhaseSchedule,
    Theorem2Adversary, Theorem2Params,
};
