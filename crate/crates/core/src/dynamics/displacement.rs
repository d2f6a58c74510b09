//! Classical displacement of the driven transmon-like mode.

use crate::model::{SystemParams, ALPHA};
use crate::regimes::solve_scaled_duffing;
use crate::{CoreError, Cx, Result};

/// Effective Planck constant of the semiclassical analysis,
/// `lambda = alpha / (2 |delta_dc|)`.
pub fn scaled_planck_constant(p: &SystemParams) -> Result<f64> {
    let ddc = p.delta_dc();
    if ddc.abs() < 1e-9 {
        return Err(CoreError::Domain("delta_dc vanishes".into()));
    }
    Ok(ALPHA / (2.0 * ddc.abs()))
}

/// Classical displacement `d_C = Q_0 / sqrt(2 lambda)` of mode C under the
/// drive, on the branch continuous in the drive amplitude from zero. The
/// drive phase carries over to `arg(d_C)`.
pub fn classical_displacement(p: &SystemParams) -> Result<Cx> {
    let ddc = p.delta_dc();
    if ddc.abs() < 1e-9 {
        return Err(CoreError::Domain("delta_dc vanishes".into()));
    }
    let amp = p.omega_d_amp.norm();
    if amp == 0.0 {
        return Ok(Cx::new(0.0, 0.0));
    }
    let rhs = ALPHA.sqrt() * amp / ddc.abs().powf(1.5);
    let q0 = solve_scaled_duffing(ddc.signum(), rhs)?;
    let mag = q0 * (ddc.abs() / ALPHA).sqrt(); // Q0 / sqrt(2 lambda)
    let phase = p.omega_d_amp / amp;
    Ok(phase * mag)
}
