//! Robust stability against a repeated real scalar `Delta = delta * I`
//! closing `w = Delta z`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, spectral_radius, to_complex};
use crate::linss::{is_stable, lft_upper, FrequencyGrid, StateSpace};

/// Points per sign in the coarse stability scan before bisection.
const SCAN_POINTS: usize = 256;
const UPPER_GRID: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuResult {
    /// `1 / |delta_crit|`, zero when nothing in `[-delta_max, delta_max]`
    /// destabilizes.
    pub mu_lower: f64,
    /// Peak spectral radius of `C_wz(jw)`.
    pub mu_upper: f64,
    pub delta_crit: Option<f64>,
    /// Imaginary part of the crossing closed-loop pole at `delta_crit`.
    pub omega_crit: Option<f64>,
    pub omega_peak: f64,
}

fn closed_stable(sub: &StateSpace, delta: f64, w: &str, z: &str) -> bool {
    match lft_upper(sub, delta, w, z) {
        Ok(cl) => cl.n_states() == 0 || is_stable(&cl).0,
        // I - delta D singular: the loop is ill posed, counted as destabilized
        Err(_) => false,
    }
}

/// Smallest destabilizing `t * sign` with `t` in `(0, delta_max]`.
fn first_unstable(sub: &StateSpace, sign: f64, delta_max: f64, w: &str, z: &str) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=SCAN_POINTS {
        let t = delta_max * k as f64 / SCAN_POINTS as f64;
        if !closed_stable(sub, sign * t, w, z) {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi?;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if closed_stable(sub, sign * mid, w, z) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(sign * hi)
}

fn rho_at(sub: &StateSpace, omega: f64) -> Result<f64> {
    spectral_radius(&sub.transfer_at(Complex64::new(0.0, omega))?)
}

/// Destabilization margin of `sys` for `w = delta z`, `|delta| <= delta_max`,
/// on the channels `w` (input) and `z` (output).
pub fn mu_real_repeated_on(sys: &StateSpace, delta_max: f64, w: &str, z: &str) -> Result<MuResult> {
    if !(delta_max > 0.0) || !delta_max.is_finite() {
        return Err(Error::InvalidBound(delta_max));
    }
    let sub = sys.select(&[w], &[z])?;
    let (stable, abscissa) = if sub.n_states() == 0 { (true, f64::NEG_INFINITY) } else { is_stable(&sub) };
    if !stable {
        return Err(Error::NominalUnstable { abscissa });
    }

    let cands = [
        first_unstable(&sub, 1.0, delta_max, w, z),
        first_unstable(&sub, -1.0, delta_max, w, z),
    ];
    let delta_crit = cands
        .iter()
        .flatten()
        .copied()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(core::cmp::Ordering::Equal));

    let mut omega_crit = None;
    if let Some(d) = delta_crit {
        if let Ok(cl) = lft_upper(&sub, d, w, z) {
            if cl.n_states() > 0 {
                let ev = eigenvalues(cl.a())?;
                if let Some(p) = ev.iter().max_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(core::cmp::Ordering::Equal)) {
                    omega_crit = Some(p.im.abs());
                }
            }
        }
    }

    // upper bound: complex repeated-scalar mu on a frequency grid
    let mut freqs: Vec<f64> = Vec::new();
    if sub.n_states() > 0 {
        let ev = eigenvalues(sub.a())?;
        let mags: Vec<f64> = ev.iter().map(|p| p.norm()).filter(|m| *m > 0.0).collect();
        if !mags.is_empty() {
            let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = mags.iter().copied().fold(0.0, f64::max);
            freqs.extend_from_slice(FrequencyGrid::log_space(lo / 10.0, hi * 10.0, UPPER_GRID)?.points());
        }
        freqs.extend(ev.iter().filter(|p| p.im > 0.0).map(|p| p.im));
        freqs.push(0.0);
    }
    freqs.extend(omega_crit);
    let mut mu_upper = spectral_radius(&to_complex(sub.d()))?;
    let mut omega_peak = f64::INFINITY;
    for &om in &freqs {
        if let Ok(r) = rho_at(&sub, om) {
            if r > mu_upper {
                mu_upper = r;
                omega_peak = om;
            }
        }
    }

    let mu_lower = delta_crit.map_or(0.0, |d| 1.0 / d.abs());
    Ok(MuResult {
        mu_lower,
        mu_upper: mu_upper.max(mu_lower),
        delta_crit,
        omega_crit,
        omega_peak,
    })
}

/// [`mu_real_repeated_on`] for the `w_omega` / `z_omega` channels.
pub fn mu_real_repeated(sys: &StateSpace, delta_max: f64) -> Result<MuResult> {
    mu_real_repeated_on(sys, delta_max, "w_omega", "z_omega")
}
