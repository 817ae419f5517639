/// `Z_t` for `Z_t = Z_{t-1} - [Z_{t-1} >= 1] + k [t mod m = j]`, `0 <= j < m`: total
/// budget of a fully connected group of `k` servers refilled at phase offset `j`.
///
/// With `s = t - j` and `Z = Z_j`, it is `Z + k floor(s/m) - s` until the first zero
/// `t*`, zero until the next refill `t̃ = m ceil(t*/m)`, then periodic:
/// `(k - s mod m)_+` when `k < m`, or `k(1 + floor((s - t̃)/m)) - (s - t̃)` otherwise.
pub fn z_total_closed_form(z0: u64, k: u64, m: u64, j: u64, t: u64) -> u64 {
    assert!(m >= 1 && j < m, "need 0 <= j < m");
    if t <= j {
        return z0.saturating_sub(t) + if t == j && j > 0 { k } else { 0 };
    }
    let zj = if j == 0 { z0 } else { z0.saturating_sub(j) + k };
    let s = t - j;
    let t_star = if zj == 0 {
        Some(0)
    } else if m > k {
        // first period p in which Z + p(k - m) <= m - 1; the clamp covers Z + 1 <= k.
        let need = (zj + 1).saturating_sub(m);
        Some(zj + k * need.div_ceil(m - k))
    } else if zj < m {
        Some(zj)
    } else {
        None
    };
    let Some(t_star) = t_star else {
        return zj + k * (s / m) - s;
    };
    if s <= t_star {
        return zj + k * (s / m) - s;
    }
    let t_tilde = m * t_star.div_ceil(m).max(1);
    if s < t_tilde {
        return 0;
    }
    if k < m {
        k.saturating_sub(s % m)
    } else {
        let d = s - t_tilde;
        k * (1 + d / m) - d
    }
}

/// Step-by-step simulation of the same recurrence (oracle).
pub fn z_total_recurrence(z0: u64, k: u64, m: u64, j: u64, t: u64) -> u64 {
    let mut z = z0;
    for s in 1..=t {
        z = z - (z >= 1) as u64 + if s % m == j { k } else { 0 };
    }
    z
}
