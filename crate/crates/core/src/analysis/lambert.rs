use std::f64::consts::E;

use crate::error::{Error, Result};

/// Principal branch of Lambert W, `W(x) e^{W(x)} = x`, for `x >= -1/e`.
pub fn lambert_w(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 1e-15 {
        return Err(Error::Parameter(format!("W(x) needs x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 1e-14 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        // series around the branch point
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * 0.85
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let d = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= d;
        if d.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// `W(e^y)`, usable when `e^y` overflows: solves `w + ln w = y` for large `y`.
pub fn lambert_w_of_exp(y: f64) -> Result<f64> {
    if y < 700.0 {
        return lambert_w(y.exp());
    }
    let mut w = y - y.ln();
    for _ in 0..50 {
        let d = (w + w.ln() - y) / (1.0 + 1.0 / w);
        w -= d;
        if d.abs() <= 1e-15 * w {
            break;
        }
    }
    Ok(w)
}
