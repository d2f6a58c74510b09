//! Closed-form results in the limiting regimes: eigenmode participation and
//! quartic chi matrix, sixth-order Schrieffer-Wolff corrections, the
//! two-level dispersive Hamiltonian, the weak-drive / two-level / semiclassical
//! drive factors `Delta_m`, the drive-induced nonlinearity ladder, and the
//! near-resonance ladder of the displaced frame.

use crate::model::{SystemParams, ALPHA};
use crate::{CoreError, Cx, Result};

/// Linear participation ratios of the eigenmodes on the bare transmon.
#[derive(Debug, Clone, Copy)]
pub struct Participation {
    pub xi_a: Cx,
    pub xi_b: Cx,
    pub xi_c: Cx,
}

/// Leading-order participation: `xi_{A(B)} = g_{a(b)}/delta_{a(b)}`, `xi_C = 1`.
pub fn participation(p: &SystemParams) -> Participation {
    let xi = |g: Cx, d: f64| if g.norm() == 0.0 { Cx::new(0.0, 0.0) } else { g / d };
    Participation {
        xi_a: xi(p.g_a, p.delta_a),
        xi_b: xi(p.g_b, p.delta_b),
        xi_c: Cx::new(1.0, 0.0),
    }
}

/// Quartic (Kerr) couplings among the eigenmodes:
/// `chi_XX = alpha |xi_X|^4`, `chi_XX' = 2 alpha |xi_X xi_X'|^2`.
#[derive(Debug, Clone, Copy)]
pub struct ChiMatrix {
    pub chi_aa: f64,
    pub chi_bb: f64,
    pub chi_cc: f64,
    pub chi_ab: f64,
    pub chi_ac: f64,
    pub chi_bc: f64,
}

pub fn chi_matrix(part: &Participation, alpha: f64) -> ChiMatrix {
    let s = |x: Cx| x.norm_sqr();
    ChiMatrix {
        chi_aa: alpha * s(part.xi_a).powi(2),
        chi_bb: alpha * s(part.xi_b).powi(2),
        chi_cc: alpha * s(part.xi_c).powi(2),
        chi_ab: 2.0 * alpha * s(part.xi_a) * s(part.xi_b),
        chi_ac: 2.0 * alpha * s(part.xi_a) * s(part.xi_c),
        chi_bc: 2.0 * alpha * s(part.xi_b) * s(part.xi_c),
    }
}

/// Sixth-order corrections from eliminating the non-dispersive quartic terms
/// (first order in `alpha/delta`).
#[derive(Debug, Clone, Copy)]
pub struct SixthOrderCorrections {
    pub tilde_delta_ac: f64,
    pub tilde_delta_bc: f64,
    pub eps_aa: f64,
    pub eps_bb: f64,
    pub eps_cc: f64,
    pub eps_ac: f64,
    pub eps_bc: f64,
    pub eps_ab: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub beta_ab: f64,
    pub beta_ba: f64,
}

/// Evaluates the sixth-order coefficient list with `delta_{A(B)C}` taken at
/// leading order as `delta_{a(b)}`.
pub fn sixth_order_corrections(part: &Participation, p: &SystemParams) -> SixthOrderCorrections {
    let chi = chi_matrix(part, ALPHA);
    let dac = p.delta_a;
    let dbc = p.delta_b;
    let has_b = part.xi_b.norm() > 0.0;
    let inv = |x: f64| if x == 0.0 { 0.0 } else { 1.0 / x };
    SixthOrderCorrections {
        tilde_delta_ac: dac + ALPHA * (part.xi_c.norm_sqr() - part.xi_a.norm_sqr()) / 2.0,
        tilde_delta_bc: dbc + ALPHA * (part.xi_c.norm_sqr() - part.xi_b.norm_sqr()) / 2.0,
        eps_aa: 9.0 * chi.chi_cc / dac,
        eps_bb: if has_b { 9.0 * chi.chi_cc / dbc } else { 0.0 },
        eps_cc: -chi.chi_ac / dac - if has_b { chi.chi_bc / dbc } else { 0.0 },
        eps_ac: 1.5 * chi.chi_cc / dac,
        eps_bc: if has_b { 1.5 * chi.chi_cc / dbc } else { 0.0 },
        eps_ab: if has_b {
            2.0 * chi.chi_cc * (inv(dac + dbc) + 2.0 * inv(dac) + 2.0 * inv(dbc))
        } else {
            0.0
        },
        beta_a: 1.5 * chi.chi_aa * chi.chi_ac / dac,
        beta_b: if has_b { 1.5 * chi.chi_bb * chi.chi_bc / dbc } else { 0.0 },
        beta_ab: if has_b {
            chi.chi_aa * chi.chi_bc * (inv(dac) + 4.0 * inv(dbc) + inv(2.0 * dac - dbc))
        } else {
            0.0
        },
        beta_ba: if has_b {
            chi.chi_bb * chi.chi_ac * (inv(dbc) + 4.0 * inv(dac) + inv(2.0 * dbc - dac))
        } else {
            0.0
        },
    }
}

/// Coefficients of the fourth-order two-level dispersive Hamiltonian. They
/// multiply `sigma_z` (+1 with the transmon in its first excited state, -1 in
/// the ground state), each with an overall minus sign in the Hamiltonian, so
/// the cavity Kerr flips sign between the two transmon states.
#[derive(Debug, Clone, Copy)]
pub struct TlsDispersiveCoeffs {
    /// `|g_a|^2/delta_a`
    pub shift_a: f64,
    /// `|g_b|^2/delta_b`
    pub shift_b: f64,
    /// `|g_a|^4/delta_a^3`
    pub kerr_a: f64,
    /// `|g_b|^4/delta_b^3`
    pub kerr_b: f64,
    /// `2|g_a g_b|^2 (delta_a+delta_b)/(delta_a^2 delta_b^2)`
    pub cross: f64,
}

pub fn tls_dispersive_coeffs(p: &SystemParams) -> TlsDispersiveCoeffs {
    let ga2 = p.g_a.norm_sqr();
    let gb2 = p.g_b.norm_sqr();
    TlsDispersiveCoeffs {
        shift_a: ga2 / p.delta_a,
        shift_b: if gb2 == 0.0 { 0.0 } else { gb2 / p.delta_b },
        kerr_a: ga2 * ga2 / p.delta_a.powi(3),
        kerr_b: if gb2 == 0.0 { 0.0 } else { gb2 * gb2 / p.delta_b.powi(3) },
        cross: if gb2 == 0.0 {
            0.0
        } else {
            2.0 * ga2 * gb2 * (p.delta_a + p.delta_b) / (p.delta_a.powi(2) * p.delta_b.powi(2))
        },
    }
}

/// Dimensionless drive factor `Delta_m`; the asymptotic Kerr coefficients are
/// `s_m = -1 + Delta_m` and `c_m = -1 + Delta_m/2`.
#[derive(Debug, Clone)]
pub struct DriveDelta {
    pub value: f64,
    /// Violated regime preconditions, if any.
    pub warnings: Vec<String>,
}

/// Weak-drive (second-order ac Stark) factor:
/// `Delta_m = 8 alpha |Omega|^2 [(m+1)/(delta_d+m alpha)^3 - m/(delta_d+(m-1) alpha)^3]`.
pub fn delta_weak_drive(p: &SystemParams, m: usize) -> DriveDelta {
    let mf = m as f64;
    let om2 = p.omega_d_amp.norm_sqr();
    let t1 = (mf + 1.0) / (p.delta_d + mf * ALPHA).powi(3);
    let t2 = if m == 0 { 0.0 } else { mf / (p.delta_d + (mf - 1.0) * ALPHA).powi(3) };
    let mut warnings = Vec::new();
    if om2.sqrt() > 0.3 * p.delta_d.abs() {
        warnings.push("weak-drive factor assumes |Omega_d| << |delta_d|".into());
    }
    DriveDelta { value: 8.0 * ALPHA * om2 * (t1 - t2), warnings }
}

/// Two-level (drive near the `m0+1 <-> m0` transition) factor, exact in the
/// drive strength. Returns `(Delta_{m0}, Delta_{m0+1} = -Delta_{m0})`.
pub fn delta_tls(p: &SystemParams, m0: usize) -> (DriveDelta, DriveDelta) {
    let mf = m0 as f64;
    let det = p.delta_d + mf * ALPHA;
    let om2 = (mf + 1.0) * p.omega_d_amp.norm_sqr();
    let value =
        8.0 * (mf + 1.0) * det.signum() * ALPHA * p.omega_d_amp.norm_sqr()
            / (det * det + 4.0 * om2).powf(1.5);
    let mut warnings = Vec::new();
    if det.abs() > 0.5 * ALPHA {
        warnings.push("two-level factor assumes |delta_d + m0 alpha| << alpha".into());
    }
    (
        DriveDelta { value, warnings: warnings.clone() },
        DriveDelta { value: -value, warnings },
    )
}

/// Closed-form maximum of `|Delta_{m0}|` over the drive amplitude together
/// with the numerically located maximizer.
///
/// The maximum value is `(4/sqrt(27)) alpha / |delta_d + m0 alpha|`; direct
/// maximization of the formula puts it at `|Omega_d| = |delta_d + m0 alpha| /
/// (sqrt(2) sqrt(m0+1))`, not at `|delta|/2` as sometimes quoted -- both are
/// reported so callers can compare.
pub struct TlsMaximum {
    pub max_value: f64,
    pub maximizer_amp: f64,
    pub closed_form_max: f64,
    pub quoted_half_detuning_amp: f64,
}

pub fn delta_tls_maximum(p: &SystemParams, m0: usize) -> TlsMaximum {
    let det = (p.delta_d + m0 as f64 * ALPHA).abs();
    let closed = 4.0 / 27f64.sqrt() * ALPHA / det;
    // golden-section search on |Omega| in (0, 4 det]
    let f = |amp: f64| {
        let q = SystemParams { omega_d_amp: Cx::new(amp, 0.0), ..p.clone() };
        delta_tls(&q, m0).0.value.abs()
    };
    let (mut a, mut b) = (1e-9 * det.max(1e-12), 4.0 * det.max(1e-9));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    let amp = 0.5 * (a + b);
    TlsMaximum {
        max_value: f(amp),
        maximizer_amp: amp,
        closed_form_max: closed,
        quoted_half_detuning_amp: det / 2.0,
    }
}

/// Real solution of `Q (Q^2 + sign) = rhs` (`rhs >= 0`) continuous in the
/// drive from `Q = 0`. For `sign = +1` the root is unique (Cardano); for
/// `sign = -1` the small branch exists up to the fold at `rhs = 2/(3 sqrt 3)`.
pub fn solve_scaled_duffing(sign: f64, rhs: f64) -> Result<f64> {
    if rhs < 0.0 {
        return Err(CoreError::Domain("cubic right-hand side must be >= 0".into()));
    }
    if sign >= 0.0 {
        // Q^3 + Q = rhs; discriminant is always positive
        let disc = (rhs * rhs / 4.0 + 1.0 / 27.0).sqrt();
        let q = (rhs / 2.0 + disc).cbrt() + (rhs / 2.0 - disc).cbrt();
        // one Newton polish
        let f = q * q * q + q - rhs;
        let fp = 3.0 * q * q + 1.0;
        Ok(q - f / fp)
    } else {
        let fold = 2.0 / (3.0 * 3f64.sqrt());
        if rhs > fold {
            return Err(CoreError::Domain(format!(
                "no continuous branch: rhs {rhs:.6} beyond fold {fold:.6} for red detuning"
            )));
        }
        // branch through 0 lives in [-1/sqrt(3), 0]; bisection
        let f = |q: f64| q * q * q - q - rhs;
        let (mut lo, mut hi) = (-1.0 / 3f64.sqrt(), 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Semiclassical (large drive detuning) factor, first order in
/// `alpha/delta_dc`.
pub fn delta_semiclassical(p: &SystemParams, m: usize) -> Result<DriveDelta> {
    let ddc = p.delta_dc();
    if ddc.abs() < 1e-9 {
        return Err(CoreError::Domain("delta_dc vanishes".into()));
    }
    let rhs = ALPHA.sqrt() * p.omega_d_amp.norm() / ddc.abs().powf(1.5);
    let q0 = solve_scaled_duffing(ddc.signum(), rhs)?;
    let q2 = q0 * q0;
    let t1 = 8.0 * q2 / (3.0 * q2 + 1.0);
    let t2 = 12.0 * (m as f64 + 0.5) * (ALPHA / ddc) * q2 * (4.0 + 3.0 * q2)
        * ((3.0 * q2 + 1.0) * (q2 + 1.0)).sqrt()
        / (1.0 + 3.0 * q2).powi(4);
    let mut warnings = Vec::new();
    if ddc < 5.0 * ALPHA {
        warnings.push(format!(
            "semiclassical factor assumes delta_dc >> alpha (delta_dc = {ddc:.3})"
        ));
    }
    Ok(DriveDelta { value: t1 - t2, warnings })
}

/// Diagnostic only: coefficient of the cubic term in the semiclassical
/// expansion of the well bottom, per unit `eta^3`.
pub fn semiclassical_eta3_coefficient(p: &SystemParams) -> Result<f64> {
    let ddc = p.delta_dc();
    if ddc.abs() < 1e-9 {
        return Err(CoreError::Domain("delta_dc vanishes".into()));
    }
    let rhs = ALPHA.sqrt() * p.omega_d_amp.norm() / ddc.abs().powf(1.5);
    let q0 = solve_scaled_duffing(ddc.signum(), rhs)?;
    let s = ddc.signum();
    let q2 = q0 * q0;
    Ok(-q2 * (s + q2) / (2.0 * (3.0 * q2 + s).powi(3)))
}

/// Coefficients of `(chi_AC N_A + chi_BC N_B)^n` in the drive-induced ac
/// Stark shift of transmon level `m`, for `n = 0..=order`. Returns the
/// coefficient list and any convergence warnings.
pub fn stark_expansion(
    p: &SystemParams,
    m: usize,
    chi: &ChiMatrix,
    order: usize,
) -> (Vec<f64>, Vec<String>) {
    let mut coeffs = Vec::with_capacity(order + 1);
    let d_m = p.delta_dm(m);
    let om_m2 = p.omega_dm(m).norm_sqr();
    let (d_prev, om_prev2) = if m == 0 {
        (1.0, 0.0)
    } else {
        (p.delta_dm(m - 1), p.omega_dm(m - 1).norm_sqr())
    };
    for n in 0..=order {
        let e = (n + 1) as i32;
        let t_prev = if m == 0 { 0.0 } else { om_prev2 / (-d_prev).powi(e) };
        coeffs.push(t_prev - om_m2 / (-d_m).powi(e));
    }
    let mut warnings = Vec::new();
    for (chi_xc, name) in [(chi.chi_ac, "chi_AC"), (chi.chi_bc, "chi_BC")] {
        if chi_xc >= d_m.abs() || (m > 0 && chi_xc >= d_prev.abs()) {
            warnings.push(format!(
                "{name} = {chi_xc:.3e} is not small against |delta_d,m|; expansion diverges"
            ));
        }
    }
    (coeffs, warnings)
}

/// Drive-induced nonlinearity ladder in the two-level (small drive detuning)
/// regime; absolute changes, alongside the static values in `chi`.
#[derive(Debug, Clone, Copy)]
pub struct TlsLadder {
    pub d_chi_aa: f64,
    pub d_chi_bb: f64,
    pub d_chi_ab: f64,
    pub d_beta_a: f64,
    pub d_beta_b: f64,
    pub d_beta_ab: f64,
    pub d_beta_ba: f64,
    pub d_sigma_a: f64,
    pub d_sigma_b: f64,
}

/// `delta~_{d,m0} = sgn(delta_{d,m0}) sqrt(delta_{d,m0}^2 + 4 |Omega_{d,m0}|^2)`.
pub fn tls_dressed_detuning(p: &SystemParams, m0: usize) -> f64 {
    let det = p.delta_dm(m0);
    det.signum() * (det * det + 4.0 * p.omega_dm(m0).norm_sqr()).sqrt()
}

pub fn tls_nonlinearity_ladder(p: &SystemParams, m0: usize, chi: &ChiMatrix) -> TlsLadder {
    let det = p.delta_dm(m0);
    let dt = tls_dressed_detuning(p, m0);
    let om2 = p.omega_dm(m0).norm_sqr();
    let base = 8.0 * ALPHA * om2 / dt.powi(3);
    let r_beta_a = 24.0 * ALPHA * om2 / dt.powi(3) * (chi.chi_ac / dt) * (det / dt);
    let r_beta_b = 24.0 * ALPHA * om2 / dt.powi(3) * (chi.chi_bc / dt) * (det / dt);
    let r_sigma = |chi_xc: f64| {
        -24.0 * ALPHA * om2 / dt.powi(3) * (chi_xc * chi_xc / (dt * dt))
            * (5.0 * det * det - dt * dt)
            / (dt * dt)
    };
    TlsLadder {
        d_chi_aa: chi.chi_aa * base,
        d_chi_bb: chi.chi_bb * base,
        d_chi_ab: chi.chi_ab * base / 2.0,
        d_beta_a: chi.chi_aa * r_beta_a,
        d_beta_b: chi.chi_bb * r_beta_b,
        d_beta_ab: chi.chi_ab * r_beta_a / 2.0,
        d_beta_ba: chi.chi_ab * r_beta_b / 2.0,
        d_sigma_a: chi.chi_aa * r_sigma(chi.chi_ac),
        d_sigma_b: chi.chi_bb * r_sigma(chi.chi_bc),
    }
}

/// Near-resonance (`omega_a + omega_d ~ omega~_20`) effective two-level
/// parameters and nonlinearity changes, conditioned on `sigma_z = +/-1`.
#[derive(Debug, Clone)]
pub struct NearResonanceLadder {
    pub delta_eff: f64,
    pub omega_eff: Cx,
    pub eps_eff: f64,
    pub d_chi_ac: f64,
    pub d_chi_bc: f64,
    pub d_chi_aa: f64,
    pub d_chi_ab: f64,
    pub d_chi_bb: f64,
    pub d_beta_a: f64,
    pub d_beta_b: f64,
    pub d_beta_ab: f64,
    pub d_beta_ba: f64,
    /// Convergence metric `|Dbeta_A/Dchi_AA| ~ (chi_AC/delta_eff) max(1, eps_eff)`.
    pub convergence_metric: f64,
    pub warnings: Vec<String>,
}

/// Pure ratio evaluation at given effective parameters (used directly by
/// tests with pinned `eps_eff`, `delta_eff`).
#[allow(clippy::too_many_arguments)]
pub fn near_resonance_ratios(
    eps_eff: f64,
    delta_eff: f64,
    chi: &ChiMatrix,
    sigma_z: i32,
) -> [f64; 9] {
    let sz1 = (sigma_z as f64) + 1.0;
    let a_over_d = ALPHA / delta_eff;
    let xac_d = chi.chi_ac / delta_eff;
    let xbc_d = chi.chi_bc / delta_eff;
    [
        -eps_eff,                                             // d_chi_ac / chi_ac
        -eps_eff * xac_d * sz1,                               // d_chi_bc / chi_bc
        16.0 * eps_eff * a_over_d * (1.0 - eps_eff / 2.0),    // d_chi_aa / chi_aa
        4.0 * eps_eff * a_over_d,                             // d_chi_ab / chi_ab
        16.0 * eps_eff * a_over_d * xac_d * sz1,              // d_chi_bb / chi_bb
        48.0 * eps_eff * xac_d * a_over_d * (eps_eff * eps_eff - 3.0 * eps_eff + 2.0), // d_beta_a / chi_aa
        96.0 * eps_eff * xbc_d * a_over_d * xac_d * sz1,      // d_beta_b / chi_bb
        24.0 * eps_eff * xac_d * a_over_d * (2.0 - eps_eff),  // d_beta_ab / chi_ab
        24.0 * eps_eff * xbc_d * a_over_d,                    // d_beta_ba / chi_ab
    ]
}

pub fn near_resonance_ladder(
    p: &SystemParams,
    chi: &ChiMatrix,
    d_c: Cx,
    sigma_z: i32,
) -> NearResonanceLadder {
    let dc2 = d_c.norm_sqr();
    let delta_eff =
        -(p.delta_a + p.delta_d + ALPHA) - 4.0 * ALPHA * dc2 + chi.chi_ac * (0.5 + dc2);
    let omega_eff = -d_c * (chi.chi_ac * chi.chi_cc).sqrt();
    let eps_eff = if dc2 == 0.0 { 0.0 } else { ALPHA * dc2 / delta_eff };
    let r = near_resonance_ratios(eps_eff, delta_eff, chi, sigma_z);
    let mut warnings = Vec::new();
    if delta_eff.abs() > 0.3 * ALPHA {
        warnings.push(format!(
            "|delta_eff| = {:.3} is not << alpha; two-level restriction suspect",
            delta_eff.abs()
        ));
    }
    if omega_eff.norm() > 0.3 * ALPHA {
        warnings.push(format!(
            "|Omega_eff| = {:.3} is not << alpha; two-level restriction suspect",
            omega_eff.norm()
        ));
    }
    let convergence_metric = (chi.chi_ac / delta_eff).abs() * eps_eff.abs().max(1.0);
    NearResonanceLadder {
        delta_eff,
        omega_eff,
        eps_eff,
        d_chi_ac: chi.chi_ac * r[0],
        d_chi_bc: chi.chi_bc * r[1],
        d_chi_aa: chi.chi_aa * r[2],
        d_chi_ab: chi.chi_ab * r[3],
        d_chi_bb: chi.chi_bb * r[4],
        d_beta_a: chi.chi_aa * r[5],
        d_beta_b: chi.chi_bb * r[6],
        d_beta_ab: chi.chi_ab * r[7],
        d_beta_ba: chi.chi_ab * r[8],
        convergence_metric,
        warnings,
    }
}

/// Which analytic route supplies the drive factor `Delta_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMethod {
    WeakDrive,
    Tls,
    Semiclassical,
}

/// Asymptotic (large cavity-transmon detuning) Kerr from the chosen drive
/// factor:
/// `K_{A,m} = s_m (delta_a/alpha)^-4 |g_a|^4/alpha^3`,
/// `K_{AB,m} = 2 c_m (delta_a delta_b/alpha^2)^-2 |g_a g_b|^2/alpha^3`,
/// with `s_m = -1 + Delta_m`, `c_m = -1 + Delta_m/2`.
pub fn asymptotic_kerr(p: &SystemParams, m: usize, method: DeltaMethod) -> Result<(f64, f64)> {
    let delta = match method {
        DeltaMethod::WeakDrive => delta_weak_drive(p, m).value,
        DeltaMethod::Tls => {
            if m == 0 {
                delta_tls(p, 0).0.value
            } else {
                // conditioned on the upper state of the (m-1, m) pair
                delta_tls(p, m - 1).1.value
            }
        }
        DeltaMethod::Semiclassical => delta_semiclassical(p, m)?.value,
    };
    let s_m = -1.0 + delta;
    let c_m = -1.0 + delta / 2.0;
    let k_a = s_m * (ALPHA / p.delta_a).powi(4) * p.g_a.norm().powi(4) / ALPHA.powi(3);
    let k_ab = if p.g_b.norm() == 0.0 {
        0.0
    } else {
        2.0 * c_m * (ALPHA * ALPHA / (p.delta_a * p.delta_b)).powi(2)
            * (p.g_a.norm() * p.g_b.norm()).powi(2)
            / ALPHA.powi(3)
    };
    Ok((k_a, k_ab))
}
