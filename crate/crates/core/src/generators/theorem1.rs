use std::sync::Arc;

use crate::budget::{BudgetState, Cap};
use crate::error::{Error, Result};
use crate::instance::{AdaptiveInstance, InstanceHeader, NodeSet, RefillSchedule};

use super::kp::{KpBlock, KpParams};

/// `j = floor(m / (k b0))` disjoint KP blocks played back to back, then every remaining
/// arrival is adjacent only to `ũ`, a server of the first block that was emptied there.
/// All servers are refilled every `m` steps.
#[derive(Debug)]
pub struct Theorem1Adversary {
    header: InstanceHeader,
    params: KpParams,
    blocks: u64,
    current: Option<KpBlock>,
    next_block: u64,
    tail: Option<NodeSet>,
    tail_node: Option<u32>,
}

pub fn gen_theorem1(b0: u64, m: u64, horizon: u64) -> Result<Theorem1Adversary> {
    let params = KpParams::new(b0)?;
    if m < params.v_count {
        return Err(Error::Parameter(format!(
            "m = {m} is smaller than one KP block (k*b0 = {})",
            params.v_count
        )));
    }
    if horizon < m {
        return Err(Error::Parameter(format!("need m <= T, got m = {m}, T = {horizon}")));
    }
    let blocks = m / params.v_count;
    let n = u32::try_from(blocks * params.k)
        .map_err(|_| Error::SizeLimit(format!("{} servers", blocks * params.k)))?;
    let header = InstanceHeader {
        n,
        horizon,
        b0,
        cap: Cap::Unbounded,
        refills: RefillSchedule::Periodic { m },
    };
    Ok(Theorem1Adversary {
        header,
        current: Some(KpBlock::new(&params, 0, 1)),
        next_block: 1,
        params,
        blocks,
        tail: None,
        tail_node: None,
    })
}

impl Theorem1Adversary {
    pub fn block_count(&self) -> u64 {
        self.blocks
    }

    pub fn kp_params(&self) -> &KpParams {
        &self.params
    }

    /// First arrival of the tail.
    pub fn tail_start(&self) -> u64 {
        self.blocks * self.params.v_count + 1
    }

    /// The tail server, once the first block is over.
    pub fn tail_node(&self) -> Option<u32> {
        self.tail_node
    }

    fn close_block(&mut self) {
        let block = self.current.take().expect("an active block");
        if self.next_block == 1 {
            // Fallback to the block's lowest index if the policy never emptied a server.
            self.tail_node = Some(block.first_depleted().unwrap_or(0));
        }
        if self.next_block < self.blocks {
            let offset = (self.next_block * self.params.k) as u32;
            let start = self.next_block * self.params.v_count + 1;
            self.current = Some(KpBlock::new(&self.params, offset, start));
            self.next_block += 1;
        }
    }
}

impl AdaptiveInstance for Theorem1Adversary {
    fn header(&self) -> &InstanceHeader {
        &self.header
    }

    fn reveal(&mut self, t: u64, _state: &BudgetState) -> NodeSet {
        if let Some(block) = self.current.as_ref() {
            if t > block.end() {
                self.close_block();
            }
        }
        match self.current.as_mut() {
            Some(block) => block.reveal(t),
            None => self
                .tail
                .get_or_insert_with(|| Arc::from([self.tail_node.unwrap_or(0)]))
                .clone(),
        }
    }

    fn observe(&mut self, _t: u64, choice: Option<u32>) {
        if let Some(block) = self.current.as_mut() {
            block.observe(choice);
        }
    }
}
