use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::OnlineInstance;

/// Exhaustive optimum by memoized search over `(t, budgets)`. Test oracle only.
pub fn brute_force_opt(inst: &OnlineInstance) -> Result<u64> {
    let h = inst.header();
    if h.horizon > 20 || h.n > 8 {
        return Err(Error::SizeLimit(format!(
            "brute force needs T <= 20 and n <= 8, got T = {}, n = {}",
            h.horizon, h.n
        )));
    }
    let arrivals: Vec<&[u32]> = inst.neighbors().collect();
    let mut refills = Vec::with_capacity(arrivals.len());
    let mut buf = Vec::new();
    for t in 1..=h.horizon {
        buf.clear();
        h.refills.refills_at(t, h.n, &mut buf);
        let mut row = vec![0u64; h.n as usize];
        for &(u, e) in &buf {
            row[u as usize] += e;
        }
        refills.push(row);
    }
    let mut memo = HashMap::new();
    Ok(search(
        0,
        vec![h.b0; h.n as usize],
        &arrivals,
        &refills,
        h.cap,
        &mut memo,
    ))
}

fn search(
    t: usize,
    budgets: Vec<u64>,
    arrivals: &[&[u32]],
    refills: &[Vec<u64>],
    cap: crate::budget::Cap,
    memo: &mut HashMap<(usize, Vec<u64>), u64>,
) -> u64 {
    if t == arrivals.len() {
        return 0;
    }
    if let Some(&v) = memo.get(&(t, budgets.clone())) {
        return v;
    }
    let advance = |b: &[u64], matched: Option<u32>| -> Vec<u64> {
        b.iter()
            .enumerate()
            .map(|(u, &x)| cap.apply(x - (matched == Some(u as u32)) as u64 + refills[t][u]))
            .collect()
    };
    let mut best = search(t + 1, advance(&budgets, None), arrivals, refills, cap, memo);
    for &u in arrivals[t] {
        if budgets[u as usize] > 0 {
            let v = 1 + search(t + 1, advance(&budgets, Some(u)), arrivals, refills, cap, memo);
            best = best.max(v);
        }
    }
    memo.insert((t, budgets), best);
    best
}
