//! Least-squares extraction of cavity nonlinearity parameters from a measured
//! Wigner function, mirroring the tomography pipeline: simulate a coherent
//! state evolving under the parametrized diagonal Hamiltonian with single
//! photon loss, compute its Wigner function, and minimize the squared
//! residual over the chosen parameter subset.

use crate::algebra::ladder;
use crate::dynamics::lindblad::{DiagonalLindblad, LindbladOptions};
use crate::dynamics::wigner::wigner_of_rho;
use crate::model::SystemParams;
use crate::{CMat, CVec, CoreError, Cx, Result};

/// Which parameters to vary; each holds the starting value. The
/// eighth-order `sigma` term is deliberately not part of the fit surface.
#[derive(Debug, Clone)]
pub struct FitSpec {
    pub delta_omega: Option<f64>,
    pub kerr: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub delta_omega: f64,
    pub kerr: f64,
    pub beta: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Diagonal cavity energies `E(N) = :dw N + K/2 N^2 + beta/6 N^3:` in
/// normal-ordered (falling factorial) form.
fn cavity_energies(n: usize, dw: f64, kerr: f64, beta: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let kf = k as f64;
            dw * kf + 0.5 * kerr * kf * (kf - 1.0) + beta / 6.0 * kf * (kf - 1.0) * (kf - 2.0)
        })
        .collect()
}

/// Simulates the Wigner field of a coherent state `beta0` after `t_evolve`
/// under the parametrized Hamiltonian and loss `loss_rate`.
pub fn simulate_wigner(
    n_a: usize,
    params: (f64, f64, f64),
    beta0: Cx,
    t_evolve: f64,
    loss_rate: f64,
    grid: &[Cx],
) -> Result<Vec<f64>> {
    let (dw, kerr, beta) = params;
    let energies = cavity_energies(n_a, dw, kerr, beta);
    let (low, _) = ladder(n_a)?;
    let opts = LindbladOptions {
        check_positivity: false,
        ..LindbladOptions::default()
    };
    let engine = DiagonalLindblad::new(energies, &low, loss_rate, opts)?;
    let mut psi = CVec::zeros(n_a);
    let b2 = beta0.norm_sqr();
    let mut amp = Cx::new((-b2 / 2.0).exp(), 0.0);
    for n in 0..n_a {
        if n > 0 {
            amp *= beta0 / (n as f64).sqrt();
        }
        psi[n] = amp;
    }
    let nrm = psi.norm();
    psi /= Cx::new(nrm, 0.0);
    let rho0: CMat = &psi * psi.adjoint();
    let snaps = engine.evolve(&rho0, &[t_evolve])?;
    Ok(wigner_of_rho(&snaps[0], grid)?.into_iter().map(|p| p.w).collect())
}

/// Coordinate descent with golden-section line search over the varying
/// subset of `(delta_omega, K, beta)`.
#[allow(clippy::too_many_arguments)]
pub fn fit_from_wigner(
    measured: &[(Cx, f64)],
    p: &SystemParams,
    fit: &FitSpec,
    t_evolve: f64,
    beta0: Cx,
    loss_rate: f64,
    max_sweeps: usize,
) -> Result<FitResult> {
    let grid: Vec<Cx> = measured.iter().map(|(z, _)| *z).collect();
    let target: Vec<f64> = measured.iter().map(|(_, w)| *w).collect();
    let n_a = p.n_a;
    let mut x = [
        fit.delta_omega.unwrap_or(0.0),
        fit.kerr.unwrap_or(0.0),
        fit.beta.unwrap_or(0.0),
    ];
    let vary = [fit.delta_omega.is_some(), fit.kerr.is_some(), fit.beta.is_some()];
    if !vary.iter().any(|&v| v) {
        return Err(CoreError::InvalidParams("no parameters to fit".into()));
    }
    let residual = |x: &[f64; 3]| -> Result<f64> {
        let w = simulate_wigner(n_a, (x[0], x[1], x[2]), beta0, t_evolve, loss_rate, &grid)?;
        Ok(w.iter().zip(target.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
    };
    let mut best = residual(&x)?;
    // characteristic phase scale over the evolution sets the search width
    let scale = (1.0 / t_evolve).max(1e-12);
    let mut iterations = 0;
    for sweep in 0..max_sweeps {
        let mut moved = 0.0f64;
        for (i, &v) in vary.iter().enumerate() {
            if !v {
                continue;
            }
            let width = scale * 2.0f64.powi(-(sweep as i32) / 2);
            let (mut a, mut b) = (x[i] - width, x[i] + width);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut x1 = b - phi * (b - a);
            let mut x2 = a + phi * (b - a);
            let evalx = |xi: f64, x: &[f64; 3]| -> Result<f64> {
                let mut y = *x;
                y[i] = xi;
                residual(&y)
            };
            let mut f1 = evalx(x1, &x)?;
            let mut f2 = evalx(x2, &x)?;
            for _ in 0..24 {
                iterations += 1;
                if f1 > f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b - a);
                    f2 = evalx(x2, &x)?;
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - phi * (b - a);
                    f1 = evalx(x1, &x)?;
                }
            }
            let xi = 0.5 * (a + b);
            let fx = evalx(xi, &x)?;
            if fx < best {
                moved = moved.max((xi - x[i]).abs() / scale);
                x[i] = xi;
                best = fx;
            }
        }
        if moved < 1e-6 && sweep > 2 {
            return Ok(FitResult {
                delta_omega: x[0],
                kerr: x[1],
                beta: x[2],
                residual_norm: best.sqrt(),
                iterations,
            });
        }
    }
    if best.sqrt() < 1e-3 * target.iter().map(|w| w * w).sum::<f64>().sqrt().max(1e-12) {
        return Ok(FitResult {
            delta_omega: x[0],
            kerr: x[1],
            beta: x[2],
            residual_norm: best.sqrt(),
            iterations,
        });
    }
    Err(CoreError::FitDidNotConverge(format!(
        "after {max_sweeps} sweeps: best (dw, K, beta) = ({:.4e}, {:.4e}, {:.4e}), residual {:.3e}",
        x[0],
        x[1],
        x[2],
        best.sqrt()
    )))
}
