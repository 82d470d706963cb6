use std::f64::consts::PI;

use super::{report, FixedPointReport};
use crate::error::{Error, Result};
use crate::limits::{evenpoly_f, evenpoly_g, si_sgdu_system_even};

/// Lower bound `4 / sqrt(10 pi)` on the step-size curve at `r = 1`.
pub const EVENPOLY_C_AT_ONE_BOUND: f64 = 0.713_649_646_399_421_8;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root in `[1/2, 1]` of `m -> F(m, r)`, the correlation at which the
/// normalized-SGD drift along the spike vanishes.
pub fn evenpoly_m_of_r(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let (a, b) = (evenpoly_f(0.5, r), evenpoly_f(1.0, r));
    if !(a < 0.0 && b > 0.0) {
        return Err(Error::NoSolution(format!("F(., {r}) does not change sign on [1/2, 1]")));
    }
    Ok(bisect(0.5, 1.0, |m| evenpoly_f(m, r)))
}

/// Step-size constant for which `(m(r), r^2)` is a fixed point.
pub fn evenpoly_c_of_r(r: f64) -> Result<f64> {
    let m = evenpoly_m_of_r(r)?;
    Ok(4.0 * r * r / (2.0 * PI).sqrt() * evenpoly_g(m, r))
}

const GRID: usize = 2000;

/// Maximum of the step-size curve over `(0, r_max]`.
pub fn evenpoly_c_max(r_max: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for i in 1..=GRID {
        best = best.max(evenpoly_c_of_r(r_max * i as f64 / GRID as f64)?);
    }
    Ok(best)
}

/// Fixed points `(+-m(r*), r*^2)` of noise-free normalized SGD for an even
/// link, with `r*` the smallest radius in `(0, r_max]` solving `c(r) = c_delta`.
pub fn evenpoly_fixed_point(c_delta: f64, r_max: f64) -> Result<Vec<FixedPointReport>> {
    if !(c_delta > 0.0) || !(r_max > 0.0) || r_max > 1.0 {
        return Err(Error::Domain("need c_delta > 0 and r_max in (0, 1]".into()));
    }
    let g = |r: f64| evenpoly_c_of_r(r).map(|c| c - c_delta);
    let mut lo = 0.0;
    let mut found = None;
    for i in 1..=GRID {
        let r = r_max * i as f64 / GRID as f64;
        if g(r)? >= 0.0 {
            found = Some((lo, r));
            break;
        }
        lo = r;
    }
    let Some((a, b)) = found else {
        return Err(Error::NoSolution(format!(
            "c_delta = {c_delta} exceeds the maximum {} of the step-size curve on (0, {r_max}]",
            evenpoly_c_max(r_max)?
        )));
    };
    let a = if a == 0.0 { b * 1e-9 } else { a };
    let r = bisect(a, b, |r| g(r).unwrap_or(f64::NAN));
    let m = evenpoly_m_of_r(r)?;
    let sys = si_sgdu_system_even(c_delta)?;
    Ok(vec![report(&sys, "recovery", [m, r * r])?, report(&sys, "recovery", [-m, r * r])?])
}

/// Small-step expansion `(m, r)` of the fixed point: with
/// `q = c sqrt(2 pi) / 4`, `r = q + q^2/2 + q^3/2` and `m = 1 - 3 r^3 / 8`.
pub fn evenpoly_series(c_delta: f64) -> (f64, f64) {
    let q = c_delta * (2.0 * PI).sqrt() / 4.0;
    let r = q + q * q / 2.0 + q * q * q / 2.0;
    (1.0 - 0.375 * r.powi(3), r)
}
