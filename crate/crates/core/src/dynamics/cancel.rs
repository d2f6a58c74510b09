//! Kerr-cancellation drive optimization.

use crate::dressing::{diagonalize_labeled, extract_expansion};
use crate::dynamics::cat::{
    coherent_fidelity, make_cat,
};
use crate::model::{SystemParams, ALPHA};
use crate::{CoreError, Cx, Result};

#[derive(Debug, Clone)]
pub struct CancellationResult {
    /// Drive amplitude |Omega_d| at the cancellation condition.
    pub omega_opt: f64,
    /// `|Omega_opt/delta_d|^2`.
    pub power_opt: f64,
    pub k_at_opt: f64,
    pub beta_at_opt: f64,
    /// Closed-form seed amplitude from `8 alpha |Omega|^2 / delta_{d,0}^3 = 1`
    /// with the dressed-frequency shift `delta_{d,0} = delta_d + |g_a|^2/delta_a`.
    pub seed_amp: f64,
}

fn curvature_target(p: &SystemParams, amp: f64, n_bar: f64, ramp_steps: usize) -> Result<(f64, f64, f64)> {
    let q = SystemParams { omega_d_amp: Cx::new(amp, 0.0), ..p.clone() };
    let spec = diagonalize_labeled(&q, ramp_steps)?;
    let exp = extract_expansion(&spec, 0, 4)?;
    Ok((exp.kerr + exp.beta * (n_bar - 1.0), exp.kerr, exp.beta))
}

/// Locates the drive amplitude cancelling the dressed-cavity curvature at the
/// cat's mean photon number: root of `K_{A,0} + beta_{A,0} (n_bar - 1) = 0`
/// over the grid of drive amplitudes, refined by bisection. The closed-form
/// condition seeds the reported diagnostics.
pub fn optimize_cancellation(
    p: &SystemParams,
    delta_d: f64,
    n_bar: f64,
    drive_grid: &[f64],
    ramp_steps: usize,
) -> Result<CancellationResult> {
    if drive_grid.len() < 2 {
        return Err(CoreError::InvalidParams("drive grid needs at least two points".into()));
    }
    let p = SystemParams { delta_d, ..p.clone() };
    let delta_d0 = delta_d + p.g_a.norm_sqr() / p.delta_a;
    let seed_amp = (delta_d0.powi(3) / (8.0 * ALPHA)).abs().sqrt();
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &amp in drive_grid {
        let (target, _, _) = curvature_target(&p, amp, n_bar, ramp_steps)?;
        if let Some((amp0, t0)) = prev {
            if t0 * target <= 0.0 {
                bracket = Some((amp0, t0, amp, target));
                break;
            }
        }
        prev = Some((amp, target));
    }
    let (mut lo, mut flo, mut hi, _fhi) = bracket.ok_or_else(|| {
        let ends: Vec<String> = [drive_grid.first(), drive_grid.last()]
            .iter()
            .flatten()
            .map(|&&a| {
                curvature_target(&p, a, n_bar, ramp_steps)
                    .map(|(_, k, _)| format!("K({a:.4}) = {k:.3e}"))
                    .unwrap_or_else(|e| format!("K({a:.4}): {e}"))
            })
            .collect();
        CoreError::NoBracket(format!(
            "curvature target has no sign change over the drive grid; {}",
            ends.join(", ")
        ))
    })?;
    for _ in 0..40 {
        if (hi - lo) < 1e-5 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (t, _, _) = curvature_target(&p, mid, n_bar, ramp_steps)?;
        if t * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = t;
        }
    }
    let amp = 0.5 * (lo + hi);
    let (_, k, b) = curvature_target(&p, amp, n_bar, ramp_steps)?;
    Ok(CancellationResult {
        omega_opt: amp,
        power_opt: (amp / delta_d).powi(2),
        k_at_opt: k,
        beta_at_opt: b,
        seed_amp,
    })
}

/// Drive amplitude maximizing the coherent fidelity `F(t)` of the even cat
/// (the `Omega_d^opt` of the cancellation protocol, slightly above the
/// curvature zero because of the residual cubic nonlinearity). Golden-section
/// search inside `bracket`, followed by one parabolic refinement.
pub fn fidelity_optimal_drive(
    p: &SystemParams,
    delta_d: f64,
    beta: Cx,
    t: f64,
    bracket: (f64, f64),
    ramp_steps: usize,
) -> Result<(f64, f64)> {
    let p = SystemParams { delta_d, ..p.clone() };
    let eval = |amp: f64| -> Result<f64> {
        let q = SystemParams { omega_d_amp: Cx::new(amp, 0.0), ..p.clone() };
        let spec = diagonalize_labeled(&q, ramp_steps)?;
        let cat = make_cat(&spec, beta)?;
        Ok(coherent_fidelity(&spec, &cat, t))
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = bracket;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..36 {
        if (b - a) < 1e-5 * b {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1)?;
        }
    }
    let amp = 0.5 * (a + b);
    Ok((amp, eval(amp)?))
}

/// `n_bar -> 1` sanity used by tests: the curvature target reduces to `K`.
pub fn curvature_target_at(
    p: &SystemParams,
    amp: f64,
    n_bar: f64,
    ramp_steps: usize,
) -> Result<f64> {
    curvature_target(p, amp, n_bar, ramp_steps).map(|(t, _, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::cat::mean_photon_even_cat;

    #[test]
    fn nbar_one_reduces_to_kerr_zero() {
        let p = SystemParams {
            n_transmon: 8,
            n_a: 6,
            ..Default::default()
        };
        let t = curvature_target_at(&p, 1.2, 1.0, 16).unwrap();
        let q = SystemParams { omega_d_amp: Cx::new(1.2, 0.0), ..p.clone() };
        let spec = diagonalize_labeled(&q, 16).unwrap();
        let exp = extract_expansion(&spec, 0, 4).unwrap();
        assert!((t - exp.kerr).abs() < 1e-15 + 1e-10 * exp.kerr.abs());
    }

    #[test]
    fn missing_bracket_is_reported() {
        let p = SystemParams { n_transmon: 6, n_a: 5, ..Default::default() };
        let r = optimize_cancellation(&p, 2.0, mean_photon_even_cat(3.0), &[0.1, 0.2], 8);
        assert!(matches!(r, Err(CoreError::NoBracket(_))));
    }
}
