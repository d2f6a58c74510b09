//! Wigner function of the dressed cavity mode via displaced parity.

use crate::algebra::{eigh, ladder};
use crate::{CMat, CVec, Cx, Result};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Displacement operator `D(z) = exp(z a^dag - z* a)` on an `dim`-level
/// number basis, built as the matrix exponential of the anti-Hermitian
/// generator through its Hermitian eigendecomposition (exactly unitary up to
/// solver accuracy).
pub fn displacement_op(dim: usize, z: Cx) -> Result<CMat> {
    let (low, raise) = ladder(dim)?;
    let x = raise * z - low * z.conj();
    // H = -i X is Hermitian; D = exp(X) = V exp(i diag) V^dag
    let h = x.map(|v| v * Cx::new(0.0, -1.0));
    let es = eigh(&h)?;
    let mut d = CMat::zeros(dim, dim);
    for k in 0..dim {
        let col = es.vectors.column(k);
        let phase = Cx::from_polar(1.0, es.values[k]);
        for i in 0..dim {
            for j in 0..dim {
                d[(i, j)] += col[i] * phase * col[j].conj();
            }
        }
    }
    Ok(d)
}

/// Photon-number parity `(-1)^N` as a diagonal.
pub fn parity_diag(dim: usize) -> CVec {
    CVec::from_fn(dim, |n, _| Cx::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
}

#[derive(Debug, Clone)]
pub struct WignerPoint {
    pub z: Cx,
    pub w: f64,
    /// Set when `|z|^2 > n_a/4` (displaced state pushed into the truncation).
    pub truncation_warning: bool,
}

/// `W(z) = (2/pi) <psi| D(z) P D^dag(z) |psi>` for a pure state given by its
/// number-basis amplitudes.
pub fn wigner_of_state(amplitudes: &[Cx], grid: &[Cx]) -> Result<Vec<WignerPoint>> {
    let dim = amplitudes.len();
    let psi = CVec::from_iterator(dim, amplitudes.iter().cloned());
    let parity = parity_diag(dim);
    let mut out = Vec::with_capacity(grid.len());
    for &z in grid {
        let d = displacement_op(dim, z)?;
        let v = d.adjoint() * &psi;
        let w: f64 = v
            .iter()
            .zip(parity.iter())
            .map(|(a, p)| p.re * a.norm_sqr())
            .sum();
        out.push(WignerPoint {
            z,
            w: 2.0 / PI * w,
            truncation_warning: z.norm_sqr() > dim as f64 / 4.0,
        });
    }
    Ok(out)
}

/// `W(z) = (2/pi) Tr(D^dag(z) rho D(z) P)` for a density matrix on the
/// number basis.
pub fn wigner_of_rho(rho: &CMat, grid: &[Cx]) -> Result<Vec<WignerPoint>> {
    let dim = rho.nrows();
    let parity = parity_diag(dim);
    let mut out = Vec::with_capacity(grid.len());
    for &z in grid {
        let d = displacement_op(dim, z)?;
        let m = d.adjoint() * rho * &d;
        let mut w = 0.0;
        for n in 0..dim {
            w += parity[n].re * m[(n, n)].re;
        }
        out.push(WignerPoint {
            z,
            w: 2.0 / PI * w,
            truncation_warning: z.norm_sqr() > dim as f64 / 4.0,
        });
    }
    Ok(out)
}

/// Square grid of phase-space points `|Re z|, |Im z| <= half_width`.
pub fn square_grid(half_width: f64, step: f64) -> Vec<Cx> {
    let n = (2.0 * half_width / step).round() as usize + 1;
    let mut g = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            g.push(Cx::new(
                -half_width + ix as f64 * step,
                -half_width + iy as f64 * step,
            ));
        }
    }
    g
}

/// Flat CSV `re_z,im_z,W`.
pub fn wigner_csv(points: &[WignerPoint]) -> String {
    let mut s = String::from("re_z,im_z,W\n");
    for p in points {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", p.z.re, p.z.im, p.w);
    }
    s
}
