//! Exact diagonalization of the coupled system with adiabatic labeling of the
//! `|psi_m, N_a, N_b>`-bar states, and extraction of the normal-ordered
//! cavity nonlinearity coefficients from the labeled energy table.

use crate::floquet::{solve_adiabatic, track_adiabatic, FloquetSolution};
use crate::model::{coupled_hamiltonian_at, SystemParams};
use crate::perturbation::resonance_scan;
use crate::{CMat, CoreError, Result};
use serde::Serialize;
use std::fmt::Write as _;

/// Ramp schedule for the coupled diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampSchedule {
    /// Drive ramped first on the bare transmon, then the couplings (default).
    TwoStage,
    /// Drive and couplings ramped together from zero (cross-check path).
    Joint,
}

/// Labeled spectrum of the coupled system.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    pub n_transmon: usize,
    pub n_a: usize,
    pub n_b: usize,
    /// Energy table indexed by `(m * n_a + n_a_idx) * n_b + n_b_idx`.
    pub energies: Vec<f64>,
    /// Labeled eigenvectors (columns, same index) in the product basis.
    pub states: CMat,
    /// Permutation eigen-index (ascending) -> label index.
    pub labels: Vec<usize>,
    /// The stage-1 driven-transmon solution the labels are anchored to.
    pub floquet: FloquetSolution,
    pub params: SystemParams,
}

impl DressedSpectrum {
    pub fn index(&self, m: usize, na: usize, nb: usize) -> usize {
        (m * self.n_a + na) * self.n_b + nb
    }

    pub fn energy(&self, m: usize, na: usize, nb: usize) -> f64 {
        self.energies[self.index(m, na, nb)]
    }

    /// Uncoupled reference energy `-delta_da N_a - delta_db N_b + eps_m`.
    pub fn uncoupled_energy(&self, m: usize, na: usize, nb: usize) -> f64 {
        -self.params.delta_da() * na as f64 - self.params.delta_db() * nb as f64
            + self.floquet.quasienergies[m]
    }

    /// Transmon labels whose energies sit at the top of the truncated
    /// spectrum and should not be trusted (cosine-truncation artifacts).
    pub fn untrusted_labels(&self) -> [usize; 2] {
        [self.n_transmon - 1, self.n_transmon - 2]
    }

    /// CSV dump `m,N_a,N_b,E`.
    pub fn dump_csv(&self) -> String {
        let mut s = String::from("m,N_a,N_b,E\n");
        for m in 0..self.n_transmon {
            for na in 0..self.n_a {
                for nb in 0..self.n_b {
                    let _ = writeln!(s, "{},{},{},{:.16e}", m, na, nb, self.energy(m, na, nb));
                }
            }
        }
        s
    }
}

/// Two-stage (or joint) adiabatic diagonalization of the coupled system.
pub fn diagonalize_labeled(p: &SystemParams, ramp_steps: usize) -> Result<DressedSpectrum> {
    diagonalize_labeled_with(p, ramp_steps, RampSchedule::TwoStage)
}

pub fn diagonalize_labeled_with(
    p: &SystemParams,
    ramp_steps: usize,
    schedule: RampSchedule,
) -> Result<DressedSpectrum> {
    p.validate()?;
    let fl = solve_adiabatic(p, ramp_steps)?;
    let cav_dim = p.n_a * p.n_b;
    let omega = p.omega_d_amp;
    let (g_a, g_b) = (p.g_a, p.g_b);
    let frame = match schedule {
        RampSchedule::TwoStage => {
            let start = fl.states.kronecker(&CMat::identity(cav_dim, cav_dim));
            track_adiabatic(
                |f| {
                    coupled_hamiltonian_at(p, omega, g_a * f, g_b * f)
                        .expect("dimension checked by validate")
                },
                start,
                ramp_steps,
            )
        }
        RampSchedule::Joint => {
            let dim = p.product_dim();
            track_adiabatic(
                |f| {
                    coupled_hamiltonian_at(p, omega * f, g_a * f, g_b * f)
                        .expect("dimension checked by validate")
                },
                CMat::identity(dim, dim),
                ramp_steps,
            )
        }
    };
    let frame = frame.map_err(|e| annotate_ambiguity(e, &fl, p))?;
    Ok(DressedSpectrum {
        n_transmon: p.n_transmon,
        n_a: p.n_a,
        n_b: p.n_b,
        energies: frame.energies,
        states: frame.states,
        labels: frame.labels,
        floquet: fl,
        params: p.clone(),
    })
}

/// On a labeling tie, name the nearest scanned multiphoton resonance.
fn annotate_ambiguity(e: CoreError, fl: &FloquetSolution, p: &SystemParams) -> CoreError {
    if let CoreError::AmbiguousLabeling { step, a, b, gap } = e {
        let window = (p.delta_a - 2.0, p.delta_a + 2.0);
        let hint = resonance_scan(fl, p, &[window], (p.n_transmon - 1).min(4))
            .ok()
            .and_then(|roots| {
                roots.into_iter().min_by(|x, y| {
                    (x.location - p.delta_a)
                        .abs()
                        .partial_cmp(&(y.location - p.delta_a).abs())
                        .unwrap()
                })
            });
        let msg = match hint {
            Some(r) => format!(
                "ambiguous labeling at coupled ramp step {step} (states {a}, {b}, gap {gap:.2e}); \
                 nearest resonance: condition {:?} (n={}, m={}, j={}) at delta_a = {:.4}",
                r.condition, r.n, r.m, r.j, r.location
            ),
            None => format!(
                "ambiguous labeling at coupled ramp step {step} (states {a}, {b}, gap {gap:.2e})"
            ),
        };
        CoreError::Numerical(msg)
    } else {
        e
    }
}

/// Normal-ordered nonlinearity coefficients of the ancilla-state-`m` cavity
/// Hamiltonian: `delta E_m(N) = sum_n cbar_n/n! * N!/(N-n)!`.
#[derive(Debug, Clone, Serialize)]
pub struct NonlinearExpansion {
    pub m: usize,
    pub max_order: usize,
    /// `cbar_1`: coupling-induced dressed-cavity frequency shift.
    pub delta_omega: f64,
    /// `cbar_2 = K_{A,m}`.
    pub kerr: f64,
    /// `cbar_3 = beta_{A,m}`.
    pub beta: f64,
    /// `cbar_4 = sigma_{A,m}`.
    pub sigma: f64,
    /// All coefficients `cbar_0..=cbar_max_order`.
    pub cbar: Vec<f64>,
}

/// Solves the triangular system `dE(N) = sum_{k<=N} cbar_k/k! * N!/(N-k)!`
/// for `cbar_0..=cbar_max` given `dE` at `N = 0..=max`.
pub(crate) fn solve_normal_ordered(d_e: &[f64]) -> Vec<f64> {
    let kmax = d_e.len();
    let mut cbar = vec![0.0; kmax];
    for n in 0..kmax {
        let mut s = d_e[n];
        let mut binom = 1.0; // N!/(N-k)!/k! = binomial(n, k)
        for (k, c) in cbar.iter().enumerate().take(n) {
            if k > 0 {
                binom *= (n - k + 1) as f64 / k as f64;
            }
            s -= c * binom;
        }
        // the k = n term carries weight binomial(n, n) = 1
        cbar[n] = s;
    }
    cbar
}

/// Re-sums a normal-ordered coefficient list at integer `N`.
pub(crate) fn resum_normal_ordered(cbar: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    for (k, c) in cbar.iter().enumerate() {
        if k > n {
            break;
        }
        let mut w = 1.0; // N!/(N-k)!/k!
        for i in 0..k {
            w *= (n - i) as f64 / (i + 1) as f64;
        }
        total += c * w;
    }
    total
}

/// Extracts the single-cavity normal-ordered expansion for transmon label `m`
/// from the coupled energy table (`N_b = 0` column), `max_order <= 4`.
pub fn extract_expansion(
    spec: &DressedSpectrum,
    m: usize,
    max_order: usize,
) -> Result<NonlinearExpansion> {
    if max_order > 4 {
        return Err(CoreError::InvalidParams("max_order must be <= 4".into()));
    }
    if max_order + 1 > spec.n_a {
        return Err(CoreError::InvalidParams(format!(
            "need N_a = 0..={max_order} but n_a = {}",
            spec.n_a
        )));
    }
    let d_e: Vec<f64> = (0..=max_order)
        .map(|na| spec.energy(m, na, 0) - spec.uncoupled_energy(m, na, 0))
        .collect();
    let cbar = solve_normal_ordered(&d_e);
    // exact-inversion sanity: residual against the fitted points
    let span = d_e
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for (n, &target) in d_e.iter().enumerate() {
        let back = resum_normal_ordered(&cbar, n);
        if (back - target).abs() > 1e-10 * span {
            return Err(CoreError::Numerical(format!(
                "normal-order inversion residual {:.2e} at N = {n}",
                (back - target).abs()
            )));
        }
    }
    let get = |k: usize| cbar.get(k).copied().unwrap_or(0.0);
    Ok(NonlinearExpansion {
        m,
        max_order,
        delta_omega: get(1),
        kerr: get(2),
        beta: get(3),
        sigma: get(4),
        cbar,
    })
}

/// Two-cavity cross-Kerr coefficient `cbar_{11,m}` from the energy table.
pub fn extract_cross_kerr(spec: &DressedSpectrum, m: usize) -> Result<f64> {
    if spec.n_a < 2 || spec.n_b < 2 {
        return Err(CoreError::InvalidParams(
            "cross-Kerr extraction needs n_a >= 2 and n_b >= 2".into(),
        ));
    }
    let de = |na: usize, nb: usize| spec.energy(m, na, nb) - spec.uncoupled_energy(m, na, nb);
    Ok(de(1, 1) - de(1, 0) - de(0, 1) + de(0, 0))
}

/// Re-runs the labeled diagonalization at scaled couplings and reports the
/// extracted expansion per scale factor (the `|g|^{2n}` scaling probe).
pub fn kerr_scaling_probe(
    p: &SystemParams,
    m: usize,
    scale_factors: &[f64],
    ramp_steps: usize,
) -> Result<Vec<(f64, NonlinearExpansion)>> {
    let mut out = Vec::with_capacity(scale_factors.len());
    for &s in scale_factors {
        let q = SystemParams { g_a: p.g_a * s, g_b: p.g_b * s, ..p.clone() };
        let spec = diagonalize_labeled(&q, ramp_steps)?;
        out.push((s, extract_expansion(&spec, m, 4)?));
    }
    Ok(out)
}

pub fn expansion_json(e: &NonlinearExpansion) -> String {
    serde_json::to_string_pretty(e).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cx;
    use approx::assert_abs_diff_eq;

    fn base() -> SystemParams {
        SystemParams {
            n_transmon: 6,
            n_a: 6,
            n_b: 1,
            delta_d: 3.0,
            ..Default::default()
        }
    }

    #[test]
    fn normal_order_solver_is_exact_inverse() {
        let cbar = vec![0.3, -1.2, 0.7, 0.05, -0.003];
        let d_e: Vec<f64> = (0..cbar.len()).map(|n| resum_normal_ordered(&cbar, n)).collect();
        let back = solve_normal_ordered(&d_e);
        for (a, b) in cbar.iter().zip(back.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthetic_pure_kerr_recovery() {
        let k = -1e-3;
        let d_e: Vec<f64> = (0..5).map(|n| 0.5 * k * (n * (n.max(1) - 1)) as f64).collect();
        let cbar = solve_normal_ordered(&d_e);
        assert_abs_diff_eq!(cbar[2], k, epsilon = 1e-18);
        assert_abs_diff_eq!(cbar[3], 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(cbar[4], 0.0, epsilon = 1e-18);
    }

    #[test]
    fn synthetic_three_term_recovery() {
        let (dw, k, b) = (2.5e-2, -1e-3, 4e-5);
        let d_e: Vec<f64> = (0..5)
            .map(|n| {
                let nf = n as f64;
                dw * nf + 0.5 * k * nf * (nf - 1.0) + b / 6.0 * nf * (nf - 1.0) * (nf - 2.0)
            })
            .collect();
        let cbar = solve_normal_ordered(&d_e);
        assert_abs_diff_eq!(cbar[1], dw, epsilon = 1e-15);
        assert_abs_diff_eq!(cbar[2], k, epsilon = 1e-15);
        assert_abs_diff_eq!(cbar[3], b, epsilon = 1e-15);
        assert_abs_diff_eq!(cbar[4], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn uncoupled_energies_exact() {
        let p = SystemParams {
            g_a: Cx::new(0.0, 0.0),
            omega_d_amp: Cx::new(0.7, 0.0),
            ..base()
        };
        let spec = diagonalize_labeled(&p, 16).unwrap();
        for m in 0..p.n_transmon {
            for na in 0..p.n_a {
                assert_abs_diff_eq!(
                    spec.energy(m, na, 0),
                    spec.uncoupled_energy(m, na, 0),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn dispersive_shift_second_order_oracle() {
        let p = SystemParams {
            g_a: Cx::new(0.2, 0.0),
            omega_d_amp: Cx::new(0.0, 0.0),
            delta_a: 9.64,
            ..base()
        };
        let spec = diagonalize_labeled(&p, 8).unwrap();
        let shift = spec.energy(0, 1, 0) - spec.energy(0, 0, 0) + p.delta_da();
        let oracle = p.g_a.norm_sqr() / p.delta_a;
        assert!((shift - oracle).abs() < 0.02 * oracle, "shift {shift} vs {oracle}");
    }

    #[test]
    fn jaynes_cummings_exact_energies() {
        // two transmon levels, one cavity, no drive: exact JC spectrum
        let p = SystemParams {
            n_transmon: 2,
            n_a: 6,
            n_b: 1,
            g_a: Cx::new(0.35, 0.0),
            delta_a: 2.0,
            delta_d: 0.5,
            omega_d_amp: Cx::new(0.0, 0.0),
            ..Default::default()
        };
        let spec = diagonalize_labeled(&p, 8).unwrap();
        for n in 1..p.n_a {
            let nf = n as f64;
            let mean = -p.delta_da() * nf - p.delta_a / 2.0;
            let rabi = (p.delta_a * p.delta_a / 4.0 + p.g_a.norm_sqr() * nf).sqrt();
            assert_abs_diff_eq!(spec.energy(0, n, 0), mean + rabi, epsilon = 1e-10);
            assert_abs_diff_eq!(spec.energy(1, n - 1, 0), mean - rabi, epsilon = 1e-10);
        }
    }

    #[test]
    fn extraction_matches_weak_coupling_kerr() {
        let p = SystemParams {
            g_a: Cx::new(0.01 * 9.64, 0.0),
            omega_d_amp: Cx::new(0.0, 0.0),
            delta_a: 9.64,
            n_transmon: 8,
            n_a: 6,
            ..base()
        };
        let spec = diagonalize_labeled(&p, 8).unwrap();
        let exp = extract_expansion(&spec, 0, 4).unwrap();
        let (k0, _) = crate::perturbation::zero_drive_kerr(&p).unwrap();
        assert!((exp.kerr - k0).abs() < 0.01 * k0.abs(), "{} vs {k0}", exp.kerr);
    }

    #[test]
    fn insufficient_range_is_an_error() {
        let p = SystemParams { n_a: 3, ..base() };
        let spec = diagonalize_labeled(&p, 4).unwrap();
        assert!(extract_expansion(&spec, 0, 4).is_err());
    }

    #[test]
    fn joint_and_two_stage_agree_away_from_resonance() {
        let p = SystemParams {
            g_a: Cx::new(0.3, 0.0),
            omega_d_amp: Cx::new(0.6, 0.0),
            n_transmon: 6,
            n_a: 5,
            ..base()
        };
        let a = diagonalize_labeled_with(&p, 48, RampSchedule::TwoStage).unwrap();
        let b = diagonalize_labeled_with(&p, 48, RampSchedule::Joint).unwrap();
        for m in 0..3 {
            for na in 0..3 {
                assert_abs_diff_eq!(a.energy(m, na, 0), b.energy(m, na, 0), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn csv_dump_shape() {
        let p = SystemParams { n_transmon: 3, n_a: 3, ..base() };
        let spec = diagonalize_labeled(&p, 4).unwrap();
        let csv = spec.dump_csv();
        assert!(csv.starts_with("m,N_a,N_b,E\n"));
        assert_eq!(csv.lines().count(), 1 + 9);
    }
}
