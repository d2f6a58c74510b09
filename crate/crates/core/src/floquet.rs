//! Driven-transmon eigenproblem in the rotating frame with adiabatic state
//! labeling: quasienergies `eps_m`, states `psi_m` connected continuously to
//! the Fock states as the drive ramps, and ladder matrix elements.

use crate::algebra::eigh;
use crate::model::{driven_transmon_hamiltonian_at, SystemParams};
use crate::{CMat, CoreError, Cx, Result};
use std::fmt::Write as _;

/// Overlap-gap below which two candidate assignments count as a tie.
pub const AMBIGUITY_GAP: f64 = 1e-6;
/// Maximum local bisection depth before an ambiguity becomes an error.
const MAX_REFINE_DEPTH: usize = 16;

/// Solution of the driven transmon with adiabatic labels.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    /// Quasienergy `eps_m`, indexed by adiabatic label `m`.
    pub quasienergies: Vec<f64>,
    /// Column `m` is `psi_m` in the Fock basis, gauge-fixed so that the
    /// largest-magnitude component is real positive.
    pub states: CMat,
    /// `c_minus[m][n] = <psi_m| c |psi_n>`.
    pub c_minus: CMat,
    /// `c_plus[m][n] = <psi_m| c^dag |psi_n>`.
    pub c_plus: CMat,
    /// Permutation mapping eigen-index (ascending eigenvalue) to label `m`.
    pub labels: Vec<usize>,
}

impl FloquetSolution {
    pub fn dim(&self) -> usize {
        self.quasienergies.len()
    }

    /// `eps_m - eps_n`.
    pub fn eps_mn(&self, m: usize, n: usize) -> f64 {
        self.quasienergies[m] - self.quasienergies[n]
    }

    /// Quasienergy and ladder-element tables as CSV
    /// (columns `m,n,eps_m,re,im` of `c_minus[m][n]`).
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("m,n,eps_m,re,im\n");
        for m in 0..self.dim() {
            for n in 0..self.dim() {
                let c = self.c_minus[(m, n)];
                let _ = writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{:.16e}",
                    m, n, self.quasienergies[m], c.re, c.im
                );
            }
        }
        out
    }
}

/// One labeled frame of an adiabatic ramp: states as columns in label order
/// and their energies.
pub(crate) struct LabeledFrame {
    pub states: CMat,
    pub energies: Vec<f64>,
    /// eigen-index (ascending) -> label
    pub labels: Vec<usize>,
}

/// Matches the eigenvectors of `es` against the labeled columns of `prev` by
/// maximum |overlap|^2 and gauge-fixes each matched state.
fn match_labels(prev: &CMat, step: usize, h: &CMat) -> Result<LabeledFrame> {
    let es = eigh(h)?;
    let n = prev.ncols();
    let overlap = prev.adjoint() * &es.vectors; // [prev label, eigen index]
    let mut states = CMat::zeros(prev.nrows(), n);
    let mut energies = vec![0.0; n];
    let mut labels = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for j in 0..n {
        let mut best = (0usize, -1.0f64);
        let mut second = -1.0f64;
        for m in 0..n {
            let w = overlap[(m, j)].norm_sqr();
            if w > best.1 {
                second = best.1;
                best = (m, w);
            } else if w > second {
                second = w;
            }
        }
        if best.1 - second < AMBIGUITY_GAP {
            return Err(CoreError::AmbiguousLabeling {
                step,
                a: best.0,
                b: j,
                gap: best.1 - second,
            });
        }
        let m = best.0;
        if taken[m] {
            // Two eigenvectors claim the same previous state: treat as a tie.
            return Err(CoreError::AmbiguousLabeling { step, a: m, b: j, gap: 0.0 });
        }
        taken[m] = true;
        labels[j] = m;
        energies[m] = es.values[j];
        // gauge: largest-magnitude component real positive
        let col = es.vectors.column(j);
        let mut imax = 0;
        let mut vmax = 0.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > vmax {
                vmax = z.norm();
                imax = i;
            }
        }
        let phase = col[imax] / col[imax].norm();
        states.set_column(m, &(col / phase));
    }
    Ok(LabeledFrame { states, energies, labels })
}

/// Tracks labeled states of `h_at(fraction)` from `start` (fraction 0, whose
/// columns define the labels) to fraction 1 over `ramp_steps` linear steps.
/// A labeling tie triggers local bisection of the offending interval before
/// giving up.
pub(crate) fn track_adiabatic<F>(
    h_at: F,
    start: CMat,
    ramp_steps: usize,
) -> Result<LabeledFrame>
where
    F: Fn(f64) -> CMat,
{
    if ramp_steps == 0 {
        return Err(CoreError::InvalidParams("ramp_steps must be >= 1".into()));
    }
    let n = start.ncols();
    let mut frame = LabeledFrame {
        states: start,
        energies: vec![0.0; n],
        labels: (0..n).collect(),
    };
    for k in 1..=ramp_steps {
        let f0 = (k - 1) as f64 / ramp_steps as f64;
        let f1 = k as f64 / ramp_steps as f64;
        frame = advance(&h_at, frame, f0, f1, k, 0)?;
    }
    Ok(frame)
}

fn advance<F>(
    h_at: &F,
    frame: LabeledFrame,
    f0: f64,
    f1: f64,
    step: usize,
    depth: usize,
) -> Result<LabeledFrame>
where
    F: Fn(f64) -> CMat,
{
    match match_labels(&frame.states, step, &h_at(f1)) {
        // Columns of every frame are stored in global label order, so the
        // eigen-index -> label map from `match_labels` is already global.
        Ok(next) => Ok(next),
        Err(e @ CoreError::AmbiguousLabeling { .. }) => {
            if depth >= MAX_REFINE_DEPTH {
                return Err(e);
            }
            let mid = 0.5 * (f0 + f1);
            let half = advance(h_at, frame, f0, mid, step, depth + 1)?;
            advance(h_at, half, mid, f1, step, depth + 1)
        }
        Err(e) => Err(e),
    }
}

/// Solves the driven transmon by ramping the drive amplitude linearly over
/// `ramp_steps` diagonalizations and tracking states by maximum overlap,
/// starting from the Fock basis at zero drive.
pub fn solve_adiabatic(p: &SystemParams, ramp_steps: usize) -> Result<FloquetSolution> {
    p.validate()?;
    let n = p.n_transmon;
    let omega = p.omega_d_amp;
    let frame = track_adiabatic(
        |f| driven_transmon_hamiltonian_at(p, omega * Cx::new(f, 0.0)),
        CMat::identity(n, n),
        ramp_steps,
    )?;
    let (low, raise) = crate::algebra::ladder(n)?;
    let c_minus = frame.states.adjoint() * &low * &frame.states;
    let c_plus = frame.states.adjoint() * &raise * &frame.states;
    Ok(FloquetSolution {
        quasienergies: frame.energies,
        states: frame.states,
        c_minus,
        c_plus,
        labels: frame.labels,
    })
}

/// Default ramp resolution.
pub const DEFAULT_RAMP_STEPS: usize = 64;

/// Stark-shifted `n <- m` transition frequency relative to `(n-m) omega_10`:
/// `(n-m) delta_d + eps_n - eps_m` (units of alpha).
pub fn stark_shifted_transition(
    sol: &FloquetSolution,
    p: &SystemParams,
    n: usize,
    m: usize,
) -> f64 {
    (n as f64 - m as f64) * p.delta_d + sol.quasienergies[n] - sol.quasienergies[m]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bare_quasienergy, SystemParams};
    use approx::assert_abs_diff_eq;

    fn params(delta_d: f64, omega: f64) -> SystemParams {
        SystemParams {
            delta_d,
            omega_d_amp: Cx::new(omega, 0.0),
            ..Default::default()
        }
    }

    #[test]
    fn zero_drive_labels_identity_and_closed_form() {
        let p = params(3.0, 0.0);
        let sol = solve_adiabatic(&p, 4).unwrap();
        assert_eq!(sol.labels.len(), p.n_transmon);
        for m in 0..p.n_transmon {
            assert_abs_diff_eq!(sol.quasienergies[m], bare_quasienergy(&p, m), epsilon = 1e-12);
        }
        // c at zero drive equals the bare ladder: <psi_m|c|psi_n> = sqrt(n) d_{m,n-1}
        for m in 0..p.n_transmon {
            for n in 0..p.n_transmon {
                let expect = if n >= 1 && m == n - 1 { (n as f64).sqrt() } else { 0.0 };
                assert_abs_diff_eq!(sol.c_minus[(m, n)].re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(sol.c_minus[(m, n)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn weak_drive_ground_shift_second_order() {
        // eps_0 ~ |Omega|^2 / delta_{d,0} to second order
        let p = params(3.0, 0.2);
        let sol = solve_adiabatic(&p, DEFAULT_RAMP_STEPS).unwrap();
        let oracle = 0.2f64.powi(2) / p.delta_dm(0);
        assert!((sol.quasienergies[0] - oracle).abs() < 1e-3, "eps0 = {}", sol.quasienergies[0]);
    }

    #[test]
    fn drive_phase_is_a_gauge() {
        let p1 = params(3.0, 0.6);
        let p2 = SystemParams {
            omega_d_amp: Cx::from_polar(0.6, 1.234),
            ..p1.clone()
        };
        let s1 = solve_adiabatic(&p1, DEFAULT_RAMP_STEPS).unwrap();
        let s2 = solve_adiabatic(&p2, DEFAULT_RAMP_STEPS).unwrap();
        for m in 0..p1.n_transmon {
            assert_abs_diff_eq!(s1.quasienergies[m], s2.quasienergies[m], epsilon = 1e-12);
        }
        for m in 0..p1.n_transmon {
            for n in 0..p1.n_transmon {
                assert_abs_diff_eq!(
                    s1.c_minus[(m, n)].norm(),
                    s2.c_minus[(m, n)].norm(),
                    epsilon = 1e-11
                );
            }
        }
    }

    #[test]
    fn c_plus_is_adjoint_of_c_minus() {
        let p = params(3.0, 1.0);
        let sol = solve_adiabatic(&p, DEFAULT_RAMP_STEPS).unwrap();
        let diff = &sol.c_plus - sol.c_minus.adjoint();
        let max = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max < 1e-12);
    }

    #[test]
    fn ramp_doubling_keeps_labels() {
        let p = params(3.0, 1.2);
        let s1 = solve_adiabatic(&p, DEFAULT_RAMP_STEPS).unwrap();
        let s2 = solve_adiabatic(&p, 2 * DEFAULT_RAMP_STEPS).unwrap();
        assert_eq!(s1.labels, s2.labels);
        for m in 0..p.n_transmon {
            assert_abs_diff_eq!(s1.quasienergies[m], s2.quasienergies[m], epsilon = 1e-10);
        }
    }

    #[test]
    fn stark_transitions_at_zero_drive() {
        let p = params(3.0, 0.0);
        let sol = solve_adiabatic(&p, 2).unwrap();
        // omega~_10 - omega_10 = 0 exactly at zero drive
        assert_abs_diff_eq!(stark_shifted_transition(&sol, &p, 1, 0), 0.0, epsilon = 1e-12);
        // omega~_20 - 2 omega_10 = -alpha
        assert_abs_diff_eq!(stark_shifted_transition(&sol, &p, 2, 0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn weak_drive_stark_shift_of_omega10() {
        // finite-drive shift of omega~_10 vs second-order formula
        // -2 alpha |Omega|^2 / (delta_d (delta_d + alpha))
        let p = params(3.0, 0.1);
        let sol = solve_adiabatic(&p, DEFAULT_RAMP_STEPS).unwrap();
        let shift = stark_shifted_transition(&sol, &p, 1, 0);
        let oracle = -2.0 * 0.1f64.powi(2) / (3.0 * 4.0);
        assert!((shift - oracle).abs() < 0.1 * oracle.abs(), "shift {shift} vs {oracle}");
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let p = params(3.0, 0.3);
        let sol = solve_adiabatic(&p, 8).unwrap();
        let csv = sol.dump_csv();
        assert!(csv.starts_with("m,n,eps_m,re,im\n"));
        assert_eq!(csv.lines().count(), 1 + p.n_transmon * p.n_transmon);
    }
}
