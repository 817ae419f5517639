use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Mean, sample standard deviation and a normal-approximation 95% interval.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self::default();
        }
        let n = count as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if count > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z95 * sd / n.sqrt();
        Self {
            count,
            mean,
            sd,
            ci_low: mean - half,
            ci_high: mean + half,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.ci_high - s.mean - Z95 * s.sd / 2.0).abs() < 1e-15);
        let one = Summary::of(&[7.0]);
        assert_eq!((one.mean, one.sd, one.ci_width()), (7.0, 0.0, 0.0));
        assert_eq!(Summary::of(&[]), Summary::default());
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn ci_width_scales_with_inverse_root_count() {
        // Alternating +-1: sample variance is R/(R-1) exactly, so width ~ 2 z / sqrt(R).
        let width = |r: usize| {
            let xs: Vec<f64> = (0..r).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            Summary::of(&xs).ci_width()
        };
        for r in [100usize, 400, 1600] {
            let expect = 2.0 * Z95 * (r as f64 / (r as f64 - 1.0)).sqrt() / (r as f64).sqrt();
            assert!((width(r) - expect).abs() < 1e-12);
        }
        let ratio = width(400) / width(1600);
        assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
    }
}
