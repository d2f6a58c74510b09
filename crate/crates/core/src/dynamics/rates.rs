//! Golden-rule decoherence rates and the early-time infidelity budget.

use super::bessel::{i0, j0};
use crate::dressing::DressedSpectrum;
use crate::dynamics::cat::mean_photon_even_cat;
use crate::floquet::FloquetSolution;
use crate::model::{transmon_lowering_full, SystemParams, ALPHA};
use crate::regimes::{chi_matrix, participation};
use crate::{Cx, Result};
use serde::Serialize;

/// Rates entering `1 - F_gamma(t) = (kappa_gamma <N_A> + C sum_m W_m) t`.
#[derive(Debug, Clone, Serialize)]
pub struct RateBudget {
    /// Inverse-Purcell decay of the dressed cavity (units alpha).
    pub kappa_gamma: f64,
    /// Incoherent transmon transition rates `W_{psi_0 -> psi_m}`, `m >= 1`.
    pub escape: Vec<(usize, f64)>,
    /// Bessel-combination constant `C` of the cat overlap average.
    pub c_coeff: f64,
    /// `<N_A>` of the even cat.
    pub n_bar: f64,
    /// Order-of-magnitude long-time pure-dephasing scale
    /// `W_{0->1} (chi_AC/gamma)^2` (no prefactor is known).
    pub dephasing_scale: f64,
}

impl RateBudget {
    /// Early-time slope of `1 - F_gamma`.
    pub fn slope(&self) -> f64 {
        let w_sum: f64 = self.escape.iter().map(|(_, w)| w).sum();
        self.kappa_gamma * self.n_bar + self.c_coeff * w_sum
    }

    /// Fraction of the slope carried by the inverse-Purcell channel.
    pub fn purcell_share(&self) -> f64 {
        self.kappa_gamma * self.n_bar / self.slope()
    }
}

/// `C = 1 - [J_0(2|beta|^2) + I_0(2|beta|^2)] / (2 cosh^2 |beta|^2)`.
pub fn c_coefficient(beta2: f64) -> f64 {
    1.0 - (j0(2.0 * beta2) + i0(2.0 * beta2)) / (2.0 * beta2.cosh().powi(2))
}

/// Assembles the golden-rule budget:
/// `kappa_gamma = |<psi_0,0|c|psi_0,1>|^2 gamma` from the dressed states and
/// `W_{psi_0->psi_m} = |<psi_m|c|psi_0>|^2 gamma` from the bare driven
/// transmon.
pub fn rate_budget(
    p: &SystemParams,
    sol: &FloquetSolution,
    spec: &DressedSpectrum,
    beta: Cx,
) -> Result<RateBudget> {
    let c_full = transmon_lowering_full(p)?;
    let v00 = spec.states.column(spec.index(0, 0, 0));
    let v01 = spec.states.column(spec.index(0, 1, 0));
    let elem = (v00.adjoint() * &c_full * v01)[(0, 0)];
    let kappa_gamma = elem.norm_sqr() * p.gamma;
    let escape: Vec<(usize, f64)> = (1..sol.dim())
        .map(|m| (m, sol.c_minus[(m, 0)].norm_sqr() * p.gamma))
        .collect();
    let beta2 = beta.norm_sqr();
    let chi = chi_matrix(&participation(p), ALPHA);
    let w1 = escape.first().map(|v| v.1).unwrap_or(0.0);
    let dephasing_scale = if p.gamma > 0.0 {
        w1 * (chi.chi_ac / p.gamma).powi(2)
    } else {
        0.0
    };
    Ok(RateBudget {
        kappa_gamma,
        escape,
        c_coeff: c_coefficient(beta2),
        n_bar: mean_photon_even_cat(beta2),
        dephasing_scale,
    })
}

/// Leading-order perturbative inverse-Purcell rate:
/// `kappa ~ |g_a/delta_a|^2 (1 - (4 alpha |Omega|^2/delta_d^3)(delta_d/delta_a)) gamma`.
pub fn kappa_gamma_perturbative(p: &SystemParams) -> f64 {
    let base = (p.g_a.norm() / p.delta_a).powi(2);
    let drive = 4.0 * ALPHA * p.omega_d_amp.norm_sqr() / p.delta_d.powi(3) * (p.delta_d / p.delta_a);
    base * (1.0 - drive) * p.gamma
}

/// Leading-order escape rate `W_{psi_0 -> psi_1} ~ |alpha Omega^2 /
/// (delta_d^2 (2 delta_d + alpha))|^2 gamma` (quartic in the drive).
pub fn escape_rate_perturbative(p: &SystemParams) -> f64 {
    let om2 = p.omega_d_amp.norm_sqr();
    (ALPHA * om2 / (p.delta_d.powi(2) * (2.0 * p.delta_d + ALPHA))).powi(2) * p.gamma
}

pub fn rate_budget_json(b: &RateBudget) -> String {
    serde_json::to_string_pretty(b).expect("serializable")
}
