//! Dense complex linear algebra on truncated bosonic spaces: ladder
//! operators, tensor-product embedding and Hermitian eigendecomposition.

use crate::{CMat, CoreError, Cx, Result};
use nalgebra::DVector;

/// Relative tolerance on `max |H - H^dag|` for Hamiltonian-role operators.
pub const HERMITICITY_REL_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    /// Unitary matrix whose columns are the eigenvectors, ordered as `values`.
    pub vectors: CMat,
}

/// Truncated annihilation/creation pair on an `dim`-level space.
///
/// `lowering[m-1][m] = sqrt(m)`; the raising operator is its adjoint.
pub fn ladder(dim: usize) -> Result<(CMat, CMat)> {
    if dim < 2 {
        return Err(CoreError::InvalidDimension(format!(
            "ladder needs dim >= 2, got {dim}"
        )));
    }
    let mut low = CMat::zeros(dim, dim);
    for m in 1..dim {
        low[(m - 1, m)] = Cx::new((m as f64).sqrt(), 0.0);
    }
    let raise = low.adjoint();
    Ok((low, raise))
}

/// Number operator `n = raising * lowering` on a `dim`-level space.
pub fn number_op(dim: usize) -> Result<CMat> {
    let (low, raise) = ladder(dim)?;
    Ok(raise * low)
}

/// Embeds `op` acting on slot `slot` of a tensor product with mode dimensions
/// `dims`, identity on every other slot. Kronecker ordering is fixed as
/// `[transmon, cavity-a, cavity-b]`: slot 0 varies slowest.
pub fn embed(op: &CMat, slot: usize, dims: &[usize]) -> Result<CMat> {
    if slot >= dims.len() {
        return Err(CoreError::InvalidDimension(format!(
            "slot {slot} out of range for {} modes",
            dims.len()
        )));
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(CoreError::InvalidDimension(format!(
            "operator dim {} does not match dims[{slot}] = {}",
            op.nrows(),
            dims[slot]
        )));
    }
    let mut out = CMat::identity(1, 1);
    for (s, &d) in dims.iter().enumerate() {
        if s == slot {
            out = out.kronecker(op);
        } else {
            out = out.kronecker(&CMat::identity(d, d));
        }
    }
    Ok(out)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Rejects inputs whose asymmetry `max |H - H^dag|` exceeds
/// [`HERMITICITY_REL_TOL`] relative to `max |H|`; otherwise symmetrizes
/// `(H + H^dag)/2` before solving to absorb assembly rounding.
pub fn eigh(h: &CMat) -> Result<EigenSystem> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(CoreError::InvalidDimension("eigh needs a square matrix".into()));
    }
    let scale = max_abs(h).max(1.0);
    let asym = max_abs(&(h - h.adjoint()));
    if asym > HERMITICITY_REL_TOL * scale {
        return Err(CoreError::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITICITY_REL_TOL * scale,
        });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let se = sym.symmetric_eigen();
    // nalgebra returns eigenvalues unsorted; sort ascending with the vectors.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let values = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    Ok(EigenSystem { values, vectors })
}
