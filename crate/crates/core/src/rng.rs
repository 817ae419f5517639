//! Keyed random streams.
//!
//! Every random decision draws from a ChaCha stream addressed by
//! `(seed, purpose, index)`, so refills, edges, tie-breaks and adversary choices never
//! share state. Changing the policy cannot move a single refill.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream purposes. The numeric values are part of the reproducibility contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Edges = 1,
    Refills = 2,
    Policy = 3,
    Adversary = 4,
    Replicate = 5,
}

/// SplitMix64 finaliser; used to mix seeds and stream ids.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a child seed from `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: Stream, index: u64) -> u64 {
    mix64(mix64(seed ^ mix64(purpose as u64)) ^ index)
}

pub fn stream_rng(seed: u64, purpose: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(purpose as u64)));
    rng.set_stream(index);
    rng
}

/// Push every index in `0..n` that succeeds an independent Bernoulli(`p`) trial,
/// using geometric skips so the cost is proportional to the number of successes.
pub fn bernoulli_indices<R: Rng + ?Sized>(n: u32, p: f64, rng: &mut R, out: &mut Vec<u32>) {
    if n == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..n);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut i: u64 = 0;
    loop {
        // U in (0,1]; skip = floor(ln U / ln(1-p)) failures before the next success.
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n as u64 - i) as f64 {
            return;
        }
        i += skip as u64;
        out.push(i as u32);
        i += 1;
        if i >= n as u64 {
            return;
        }
    }
}

/// Like [`bernoulli_indices`], but the successes for `p` are a subset of those for any
/// `p' > p` drawn from the same stream: node `u` succeeds iff its uniform `U_u < p`.
/// The `U_u` are produced in increasing order (exponential spacings) and assigned to a
/// random permutation of the nodes, so the cost stays proportional to the successes.
pub fn nested_bernoulli_indices<R: Rng + ?Sized>(n: u32, p: f64, rng: &mut R, out: &mut Vec<u32>) {
    if n == 0 || p <= 0.0 {
        return;
    }
    let start = out.len();
    let mut swapped: HashMap<u32, u32> = HashMap::new();
    let mut x = 0.0f64;
    for j in 0..n {
        let v: f64 = 1.0 - rng.random::<f64>();
        x = 1.0 - (1.0 - x) * v.powf(1.0 / (n - j) as f64);
        if x >= p {
            break;
        }
        // Partial Fisher-Yates over 0..n with a sparse swap table.
        let r = rng.random_range(j..n);
        let picked = *swapped.get(&r).unwrap_or(&r);
        let head = *swapped.get(&j).unwrap_or(&j);
        swapped.insert(r, head);
        out.push(picked);
    }
    out[start..].sort_unstable();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_each_other() {
        let a: u64 = stream_rng(7, Stream::Refills, 3).random();
        let b: u64 = stream_rng(7, Stream::Policy, 3).random();
        let c: u64 = stream_rng(7, Stream::Refills, 4).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        let again: u64 = stream_rng(7, Stream::Refills, 3).random();
        assert_eq!(a, again);
    }

    #[test]
    fn geometric_skip_matches_bernoulli_rate() {
        let mut rng = stream_rng(1, Stream::Edges, 0);
        let n = 1000;
        let p = 0.02;
        let trials = 2000;
        let mut total = 0usize;
        let mut out = Vec::new();
        for _ in 0..trials {
            out.clear();
            bernoulli_indices(n, p, &mut rng, &mut out);
            assert!(out.windows(2).all(|w| w[0] < w[1]));
            assert!(out.iter().all(|&u| u < n));
            total += out.len();
        }
        let mean = total as f64 / trials as f64;
        let expected = n as f64 * p;
        let se = (n as f64 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = stream_rng(1, Stream::Edges, 0);
        let mut out = Vec::new();
        bernoulli_indices(5, 0.0, &mut rng, &mut out);
        assert!(out.is_empty());
        bernoulli_indices(5, 1.0, &mut rng, &mut out);
        assert_eq!(out, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn nested_sampler_rate_and_nesting() {
        let n = 500;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut total = 0usize;
        let trials = 2000;
        for i in 0..trials {
            lo.clear();
            hi.clear();
            nested_bernoulli_indices(n, 0.01, &mut stream_rng(3, Stream::Refills, i), &mut lo);
            nested_bernoulli_indices(n, 0.05, &mut stream_rng(3, Stream::Refills, i), &mut hi);
            assert!(lo.windows(2).all(|w| w[0] < w[1]));
            assert!(hi.windows(2).all(|w| w[0] < w[1]));
            assert!(lo.iter().all(|u| hi.binary_search(u).is_ok()));
            total += hi.len();
        }
        let mean = total as f64 / trials as f64;
        let se = (n as f64 * 0.05 * 0.95 / trials as f64).sqrt();
        assert!((mean - 25.0).abs() < 4.0 * se, "mean {mean}");
        hi.clear();
        nested_bernoulli_indices(7, 1.0, &mut stream_rng(3, Stream::Refills, 0), &mut hi);
        assert_eq!(hi, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn nested_sampler_is_uniform_over_nodes() {
        let n = 10u32;
        let mut counts = [0u32; 10];
        let mut out = Vec::new();
        for i in 0..20_000 {
            out.clear();
            nested_bernoulli_indices(n, 0.2, &mut stream_rng(9, Stream::Refills, i), &mut out);
            for &u in &out {
                counts[u as usize] += 1;
            }
        }
        // Each node: Binomial(20000, 0.2), sd ~ 57.
        assert!(counts.iter().all(|&c| (c as f64 - 4000.0).abs() < 300.0), "{counts:?}");
    }
}
