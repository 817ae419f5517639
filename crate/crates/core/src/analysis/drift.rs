use super::lambert::lambert_w_of_exp;

/// Probability that an arrival finds at least one available neighbor when `Y0` of `n`
/// nodes are empty: `1 - (1 - a/n)^{n - Y0}`.
pub fn greedy_drift(y0: u64, n: u64, a: f64) -> f64 {
    let c = n.saturating_sub(y0) as f64;
    -(c * (-a / n as f64).ln_1p()).exp_m1()
}

/// `(1 - (1-p)^C) / (pC)`: chance that a given available node is the one Greedy picks,
/// divided by its edge probability `p`, when `C` nodes are available.
pub fn sigma(c: u64, p: f64) -> f64 {
    let c = c as f64;
    if p * c < 1e-12 {
        return 1.0 - 0.5 * (c - 1.0) * p;
    }
    -(c * (-p).ln_1p()).exp_m1() / (p * c)
}

/// Deviation bound `3 e^{L' T/n} a n^{3/4}` with `L' = a e^{a eps}`.
pub fn wormald_bound(n: f64, horizon: f64, a: f64, eps: f64) -> f64 {
    let l = a * (a * eps).exp();
    3.0 * (l * horizon / n).exp() * a * n.powf(0.75)
}

/// Stated exponential rate for `K = 1`: `beta (1 + W(e^{-a(1 - 1/beta)}))`.
pub fn omega(a: f64, beta: f64) -> f64 {
    beta * (1.0 + lambert_w_of_exp(-a * (1.0 - 1.0 / beta)).expect("W on the positive axis"))
}

/// Rate of the linearised `K = 1` equation at its fixed point,
/// `beta + a e^{-a(1 - z0*)} = beta (1 + W((a/beta) e^{-a(1 - 1/beta)}))`.
pub fn omega_linearized(a: f64, beta: f64) -> f64 {
    let y = (a / beta).ln() - a * (1.0 - 1.0 / beta);
    beta * (1.0 + lambert_w_of_exp(y).expect("W on the positive axis"))
}
