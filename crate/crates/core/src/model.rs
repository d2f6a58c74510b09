//! Physical parameters and the RWA Hamiltonian builders for the driven
//! transmon and the coupled transmon-cavity system.
//!
//! Internally every frequency is angular and in units of the transmon
//! anharmonicity `alpha` (so `alpha = 1`); detunings are measured from the
//! transmon 0-1 transition `omega_10`. Since `omega_c = omega_10 + alpha`,
//! the drive detuning from `omega_c` used by the rotating-frame Hamiltonian
//! is `delta_dc = delta_d - alpha`.

use crate::algebra::{embed, ladder, number_op};
use crate::{CMat, CoreError, Cx, Result};
use serde::{Deserialize, Serialize};

/// Anharmonicity in internal units.
pub const ALPHA: f64 = 1.0;

/// Product-dimension cap for the coupled Hamiltonian.
pub const DIM_CAP: usize = 4096;

/// All physical constants of one run. Frequencies in units of `alpha`,
/// except `alpha_hz` which carries the laboratory scale `alpha/2pi` in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub alpha_hz: f64,
    /// Cavity-a detuning `omega_a - omega_10`.
    pub delta_a: f64,
    /// Cavity-b detuning `omega_b - omega_10`.
    pub delta_b: f64,
    /// Drive detuning `omega_d - omega_10`.
    pub delta_d: f64,
    pub g_a: Cx,
    pub g_b: Cx,
    /// Drive amplitude; the drive phase is `arg(omega_d_amp)`.
    pub omega_d_amp: Cx,
    pub n_transmon: usize,
    pub n_a: usize,
    pub n_b: usize,
    /// Transmon decay rate (units of alpha).
    pub gamma: f64,
    /// Transmon plasma frequency `omega_c/2pi` in Hz, if `E_C`/`E_J` were
    /// given at the config boundary. Only used for RWA-validity warnings.
    pub omega_c_hz: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            alpha_hz: 0.168e9,
            delta_a: 9.64,
            delta_b: 0.0,
            delta_d: 2.0,
            g_a: Cx::new(0.064 * 9.64, 0.0),
            g_b: Cx::new(0.0, 0.0),
            omega_d_amp: Cx::new(0.0, 0.0),
            n_transmon: 12,
            n_a: 15,
            n_b: 1,
            gamma: 0.0,
            omega_c_hz: None,
        }
    }
}

impl SystemParams {
    /// Drive detuning from `omega_c`: `delta_dc = delta_d - alpha`.
    pub fn delta_dc(&self) -> f64 {
        self.delta_d - ALPHA
    }

    /// Drive detuning from the `m+1 <-> m` transmon transition:
    /// `delta_dm = delta_dc + (m+1) alpha = delta_d + m alpha`.
    pub fn delta_dm(&self, m: usize) -> f64 {
        self.delta_dc() + (m as f64 + 1.0) * ALPHA
    }

    /// Level-ladder drive amplitude `omega_dm = sqrt(m+1) * omega_d`.
    pub fn omega_dm(&self, m: usize) -> Cx {
        self.omega_d_amp * (m as f64 + 1.0).sqrt()
    }

    /// Drive detuning from cavity a: `delta_da = delta_d - delta_a`.
    pub fn delta_da(&self) -> f64 {
        self.delta_d - self.delta_a
    }

    /// Drive detuning from cavity b: `delta_db = delta_d - delta_b`.
    pub fn delta_db(&self) -> f64 {
        self.delta_d - self.delta_b
    }

    /// Angular anharmonicity in rad/s.
    pub fn alpha_rad(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.alpha_hz
    }

    /// Converts a laboratory time in microseconds to internal (alpha) units.
    pub fn us_to_internal(&self, t_us: f64) -> f64 {
        t_us * 1e-6 * self.alpha_rad()
    }

    /// Converts an internal frequency (units alpha) to `value/2pi` in Hz.
    pub fn internal_to_hz(&self, v: f64) -> f64 {
        v * self.alpha_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_transmon < 3 {
            return Err(CoreError::InvalidParams(
                "n_transmon must be >= 3 (two-photon resonance physics)".into(),
            ));
        }
        if self.n_a < 2 {
            return Err(CoreError::InvalidParams("n_a must be >= 2".into()));
        }
        if self.n_b < 1 {
            return Err(CoreError::InvalidParams("n_b must be >= 1".into()));
        }
        if self.g_a.norm() > 0.0 && self.g_a.norm() >= self.delta_a.abs() {
            return Err(CoreError::InvalidParams(format!(
                "|g_a/delta_a| = {:.3} must be < 1 (dispersive regime)",
                self.g_a.norm() / self.delta_a.abs()
            )));
        }
        if self.g_b.norm() > 0.0 && self.g_b.norm() >= self.delta_b.abs() {
            return Err(CoreError::InvalidParams(format!(
                "|g_b/delta_b| = {:.3} must be < 1 (dispersive regime)",
                self.g_b.norm() / self.delta_b.abs()
            )));
        }
        if self.gamma < 0.0 {
            return Err(CoreError::InvalidParams("gamma must be >= 0".into()));
        }
        Ok(())
    }

    /// Product dimension of the coupled Hilbert space.
    pub fn product_dim(&self) -> usize {
        self.n_transmon * self.n_a * self.n_b
    }

    /// RWA validity diagnostics. Ratios against `omega_c` can only be formed
    /// when `E_C`/`E_J` were provided; otherwise this returns nothing.
    pub fn rwa_validity_warnings(&self, n_transmon_estimate: f64) -> Vec<String> {
        let mut warnings = Vec::new();
        if let Some(fc) = self.omega_c_hz {
            let omega_c = fc / self.alpha_hz; // units of alpha
            let drive = self.omega_d_amp.norm() * (n_transmon_estimate + 1.0).sqrt();
            if ALPHA * (2.0 * n_transmon_estimate + 1.0) / omega_c > 0.1 {
                warnings.push(format!(
                    "anharmonic scale alpha<(c^dag+c)^2> / omega_c = {:.3} exceeds 0.1",
                    ALPHA * (2.0 * n_transmon_estimate + 1.0) / omega_c
                ));
            }
            if drive / omega_c > 0.1 {
                warnings.push(format!(
                    "drive scale |Omega_d| sqrt(<c c^dag>) / omega_c = {:.3} exceeds 0.1",
                    drive / omega_c
                ));
            }
            for (name, det) in [("a", self.delta_a), ("b", self.delta_b), ("d", self.delta_d)] {
                if (det.abs() + ALPHA) / omega_c > 0.1 {
                    warnings.push(format!(
                        "|omega_{name} - omega_c| / omega_c = {:.3} exceeds 0.1",
                        (det.abs() + ALPHA) / omega_c
                    ));
                }
            }
        }
        warnings
    }
}

/// Flat key-value config mirror of [`SystemParams`]. The serialized keys are
/// the external interface; `e_c_hz`/`e_j_hz` are accepted on input only and
/// converted via `hbar omega_c = sqrt(8 E_C E_J)`, `hbar alpha = E_C`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub alpha_hz: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_d: f64,
    pub g_a_re: f64,
    pub g_a_im: f64,
    pub g_b_re: f64,
    pub g_b_im: f64,
    pub omega_d_re: f64,
    pub omega_d_im: f64,
    pub n_transmon: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_c_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j_hz: Option<f64>,
}

impl From<&SystemParams> for ParamsFile {
    fn from(p: &SystemParams) -> Self {
        ParamsFile {
            alpha_hz: p.alpha_hz,
            delta_a: p.delta_a,
            delta_b: p.delta_b,
            delta_d: p.delta_d,
            g_a_re: p.g_a.re,
            g_a_im: p.g_a.im,
            g_b_re: p.g_b.re,
            g_b_im: p.g_b.im,
            omega_d_re: p.omega_d_amp.re,
            omega_d_im: p.omega_d_amp.im,
            n_transmon: p.n_transmon,
            n_a: p.n_a,
            n_b: p.n_b,
            gamma: p.gamma,
            e_c_hz: None,
            e_j_hz: None,
        }
    }
}

impl ParamsFile {
    pub fn into_params(self) -> Result<SystemParams> {
        let omega_c_hz = match (self.e_c_hz, self.e_j_hz) {
            (Some(ec), Some(ej)) => {
                if ec <= 0.0 || ej <= 0.0 {
                    return Err(CoreError::InvalidParams("E_C and E_J must be positive".into()));
                }
                Some((8.0 * ec * ej).sqrt())
            }
            (None, None) => None,
            _ => {
                return Err(CoreError::InvalidParams(
                    "e_c_hz and e_j_hz must be given together".into(),
                ))
            }
        };
        // E_C fixes alpha when both are present.
        let alpha_hz = self.e_c_hz.unwrap_or(self.alpha_hz);
        let p = SystemParams {
            alpha_hz,
            delta_a: self.delta_a,
            delta_b: self.delta_b,
            delta_d: self.delta_d,
            g_a: Cx::new(self.g_a_re, self.g_a_im),
            g_b: Cx::new(self.g_b_re, self.g_b_im),
            omega_d_amp: Cx::new(self.omega_d_re, self.omega_d_im),
            n_transmon: self.n_transmon,
            n_a: self.n_a,
            n_b: self.n_b,
            gamma: self.gamma,
            omega_c_hz,
        };
        p.validate()?;
        Ok(p)
    }
}

/// `H/hbar = -delta_dc n - (alpha/2)(n+1)n + Omega_d c^dag + Omega_d^* c`
/// on the truncated transmon space.
pub fn driven_transmon_hamiltonian(p: &SystemParams) -> CMat {
    driven_transmon_hamiltonian_at(p, p.omega_d_amp)
}

/// Same as [`driven_transmon_hamiltonian`] at an explicit drive amplitude
/// (used by the adiabatic ramp).
pub fn driven_transmon_hamiltonian_at(p: &SystemParams, omega: Cx) -> CMat {
    let n = p.n_transmon;
    let (low, raise) = ladder(n).expect("n_transmon >= 3");
    let num = &raise * &low;
    let mut h = &num * (&num + CMat::identity(n, n)).scale(-0.5 * ALPHA);
    h -= num.scale(p.delta_dc());
    h += raise * omega + low * omega.conj();
    h
}

/// Bare quasienergy of level `m` at zero drive:
/// `eps_m = -delta_dc m - (alpha/2) m (m+1)`.
pub fn bare_quasienergy(p: &SystemParams, m: usize) -> f64 {
    let mf = m as f64;
    -p.delta_dc() * mf - 0.5 * ALPHA * mf * (mf + 1.0)
}

/// Full RWA Hamiltonian of the coupled system on the product space with
/// canonical ordering `[transmon, cavity-a, cavity-b]`.
///
/// `H/hbar = -delta_da N_a - delta_db N_b + H_anc + (g_a a + g_b b) c^dag + h.c.`
pub fn coupled_hamiltonian(p: &SystemParams) -> Result<CMat> {
    coupled_hamiltonian_at(p, p.omega_d_amp, p.g_a, p.g_b)
}

/// [`coupled_hamiltonian`] at explicit drive and coupling values.
pub fn coupled_hamiltonian_at(p: &SystemParams, omega: Cx, g_a: Cx, g_b: Cx) -> Result<CMat> {
    let dim = p.product_dim();
    if dim > DIM_CAP {
        return Err(CoreError::DimensionCap { dim, cap: DIM_CAP });
    }
    let dims = [p.n_transmon, p.n_a, p.n_b];
    let hanc = embed(&driven_transmon_hamiltonian_at(p, omega), 0, &dims)?;
    let (low_c, _) = ladder(p.n_transmon)?;
    let c_full = embed(&low_c, 0, &dims)?;
    let (low_a, _) = ladder(p.n_a)?;
    let a_full = embed(&low_a, 1, &dims)?;
    let na_full = embed(&number_op(p.n_a)?, 1, &dims)?;
    let mut h = hanc - na_full.scale(p.delta_da());
    let mut coupling = &a_full * c_full.adjoint() * g_a;
    if p.n_b > 1 {
        let (low_b, _) = ladder(p.n_b)?;
        let b_full = embed(&low_b, 2, &dims)?;
        let nb_full = embed(&number_op(p.n_b)?, 2, &dims)?;
        h -= nb_full.scale(p.delta_db());
        coupling += &b_full * c_full.adjoint() * g_b;
    }
    h += &coupling + coupling.adjoint();
    Ok(h)
}

/// Transmon lowering operator on the product space.
pub fn transmon_lowering_full(p: &SystemParams) -> Result<CMat> {
    let (low_c, _) = ladder(p.n_transmon)?;
    embed(&low_c, 0, &[p.n_transmon, p.n_a, p.n_b])
}

/// Cavity-a lowering operator on the product space.
pub fn cavity_a_lowering_full(p: &SystemParams) -> Result<CMat> {
    let (low_a, _) = ladder(p.n_a)?;
    embed(&low_a, 1, &[p.n_transmon, p.n_a, p.n_b])
}
