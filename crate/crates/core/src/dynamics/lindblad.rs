//! Lindblad evolution with transmon decay.
//!
//! The master equation `rho' = -i[H,rho] + gamma D[c] rho` is integrated in
//! the labeled eigenbasis of `H`: there the coherent part is exactly a phase
//! (handled analytically in the interaction picture) and the dissipator is a
//! sum over jump channels `c_jk` between eigenstates. Channels are grouped
//! into Bohr-frequency clusters; every channel pair inside one cluster is
//! kept, with its slow residual phase evolved exactly, while cross terms
//! between clusters (oscillating at at least the cluster gap, far above any
//! dissipative rate) are dropped. Each instantaneous generator is of Lindblad
//! form, so trace is preserved exactly and positivity up to integrator error.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with relative
//! tolerance 1e-8 and the step bounded by `0.1/max(gamma |c^dag c|, chi)`
//! where `chi` is the largest in-cluster frequency spread.

use crate::dressing::{diagonalize_labeled, DressedSpectrum};
use crate::model::{transmon_lowering_full, SystemParams};
use crate::{CMat, CoreError, Cx, Result};
use std::collections::BTreeMap;

/// Density matrix over the truncated product basis with its time stamp.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub matrix: CMat,
    pub time: f64,
}

impl DensityOperator {
    pub fn pure(state: &crate::CVec, time: f64) -> DensityOperator {
        DensityOperator { matrix: state * state.adjoint(), time }
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let es = crate::algebra::eigh(&self.matrix)?;
        Ok(es.values[0])
    }

    /// Hermiticity, unit trace (1e-9) and positivity (>= -1e-8) checks.
    pub fn validate(&self) -> Result<()> {
        let asym = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > 1e-9 {
            return Err(CoreError::InvalidParams(format!(
                "density matrix not Hermitian (asymmetry {asym:.2e})"
            )));
        }
        if (self.trace() - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidParams(format!(
                "density matrix trace {} != 1",
                self.trace()
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -1e-8 {
            return Err(CoreError::InvalidParams(format!(
                "density matrix has negative eigenvalue {min:.2e}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LindbladOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Jump-matrix elements below this (relative to the largest) are dropped.
    pub channel_tol_rel: f64,
    /// Linkage gap separating Bohr-frequency clusters (units alpha).
    pub cluster_gap: f64,
    /// Clusters wider than this are split at their weakest channel links.
    pub cluster_width_cap: f64,
    /// Ramp resolution for the labeled diagonalization.
    pub ramp_steps: usize,
    /// Abort when an eigenvalue of rho dips below this.
    pub positivity_abort: f64,
    pub check_positivity: bool,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            channel_tol_rel: 1e-5,
            cluster_gap: 0.02,
            cluster_width_cap: 0.2,
            ramp_steps: 48,
            positivity_abort: -1e-6,
            check_positivity: true,
        }
    }
}

struct Pair {
    out: u32,
    inp: u32,
    p: u32,
    q: u32,
    v: Cx,
}

struct AEntry {
    l: u32,
    m: u32,
    v: Cx,
    phase: u32,
}

/// Lindblad generator for a Hamiltonian diagonal in the working basis.
pub struct DiagonalLindblad {
    dim: usize,
    energies: Vec<f64>,
    gamma: f64,
    pairs: Vec<Pair>,
    a_entries: Vec<AEntry>,
    /// Residual frequencies for channels (first `n_channels`) and A entries.
    omega: Vec<f64>,
    n_channels: usize,
    /// Bound `0.1/max(gamma |c^dag c|, chi-scale)`.
    pub max_step: f64,
    opts: LindbladOptions,
}

const STAGE_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl DiagonalLindblad {
    /// Builds the clustered generator for jump operator `jump` (in the same
    /// basis that diagonalizes `H` with eigenvalues `energies`) at rate
    /// `gamma`.
    pub fn new(
        energies: Vec<f64>,
        jump: &CMat,
        gamma: f64,
        opts: LindbladOptions,
    ) -> Result<DiagonalLindblad> {
        let dim = energies.len();
        if jump.nrows() != dim || jump.ncols() != dim {
            return Err(CoreError::InvalidDimension(
                "jump operator does not match the energy table".into(),
            ));
        }
        if gamma < 0.0 {
            return Err(CoreError::InvalidParams("gamma must be >= 0".into()));
        }
        let vmax = jump.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // channel list sorted by Bohr frequency
        let mut ch: Vec<(f64, u32, u32, Cx)> = Vec::new();
        if gamma > 0.0 && vmax > 0.0 {
            for j in 0..dim {
                for k in 0..dim {
                    let v = jump[(j, k)];
                    if v.norm() > opts.channel_tol_rel * vmax {
                        ch.push((energies[j] - energies[k], j as u32, k as u32, v));
                    }
                }
            }
        }
        ch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // linkage clusters, then width-cap splits at the weakest links
        let mut clusters: Vec<(usize, usize)> = Vec::new(); // half-open ranges
        let mut start = 0;
        for i in 1..=ch.len() {
            if i == ch.len() || ch[i].0 - ch[i - 1].0 > opts.cluster_gap {
                split_cluster(&ch, start, i, opts.cluster_width_cap, &mut clusters);
                start = i;
            }
        }
        let mut chi_scale: f64 = 0.0;
        let mut omega = Vec::with_capacity(ch.len());
        let mut pairs = Vec::new();
        let mut a_map: BTreeMap<(u32, u32), Cx> = BTreeMap::new();
        for &(lo, hi) in &clusters {
            let center = 0.5 * (ch[lo].0 + ch[hi - 1].0);
            chi_scale = chi_scale.max((ch[hi - 1].0 - ch[lo].0) / 2.0);
            for item in ch.iter().take(hi).skip(lo) {
                omega.push(item.0 - center);
            }
            for p in lo..hi {
                for q in lo..hi {
                    let (_, jp, kp, vp) = ch[p];
                    let (_, jq, kq, vq) = ch[q];
                    // column-major flat indices: (row, col) -> row + col*dim
                    pairs.push(Pair {
                        out: jp + jq * dim as u32,
                        inp: kp + kq * dim as u32,
                        p: p as u32,
                        q: q as u32,
                        v: vp * vq.conj(),
                    });
                    if jp == jq {
                        *a_map.entry((kp, kq)).or_insert(Cx::new(0.0, 0.0)) += vp.conj() * vq;
                    }
                }
            }
        }
        let n_channels = ch.len();
        let mut a_entries = Vec::with_capacity(a_map.len());
        for ((l, m), v) in a_map {
            let phase = omega.len() as u32;
            omega.push(energies[l as usize] - energies[m as usize]);
            a_entries.push(AEntry { l, m, v, phase });
        }
        // ||c^dag c|| from the kept channels
        let mut col_norm = vec![0.0f64; dim];
        for &(_, _, k, v) in &ch {
            col_norm[k as usize] += v.norm_sqr();
        }
        let cdag_c = col_norm.iter().cloned().fold(0.0, f64::max);
        let denom = (gamma * cdag_c).max(chi_scale).max(1e-12);
        let max_step = 0.1 / denom;
        Ok(DiagonalLindblad {
            dim,
            energies,
            gamma,
            pairs,
            a_entries,
            omega,
            n_channels,
            max_step,
            opts,
        })
    }

    fn rhs(&self, stage_phase: &[Cx], rho: &CMat, out: &mut CMat) {
        out.fill(Cx::new(0.0, 0.0));
        if self.gamma == 0.0 {
            return;
        }
        {
            let rs = rho.as_slice();
            let os = out.as_mut_slice();
            for pr in &self.pairs {
                let ph = stage_phase[pr.p as usize] * stage_phase[pr.q as usize].conj();
                os[pr.out as usize] += pr.v * ph * rs[pr.inp as usize];
            }
        }
        for ae in &self.a_entries {
            let a = ae.v * stage_phase[ae.phase as usize] * 0.5;
            let (l, m) = (ae.l as usize, ae.m as usize);
            // out.row(l) -= a * rho.row(m); out.col(m) -= a * rho.col(l)
            for j in 0..self.dim {
                let x = a * rho[(m, j)];
                out[(l, j)] -= x;
            }
            for i in 0..self.dim {
                let x = rho[(i, l)] * a;
                out[(i, m)] -= x;
            }
        }
        *out *= Cx::new(self.gamma, 0.0);
    }

    /// Evolves the interaction-picture state from `t = 0` and returns the
    /// Schrodinger-picture density matrices (still in the diagonal basis) at
    /// the requested times.
    pub fn evolve(&self, rho0: &CMat, times: &[f64]) -> Result<Vec<CMat>> {
        if rho0.nrows() != self.dim {
            return Err(CoreError::InvalidDimension("rho dimension mismatch".into()));
        }
        let nph = self.omega.len();
        let mut u: Vec<Cx> = vec![Cx::new(1.0, 0.0); nph];
        let mut rot: Vec<Vec<Cx>> = vec![Vec::new(); 7];
        let mut rot_full: Vec<Cx> = Vec::new();
        let mut cur_h = -1.0;
        let trace0: f64 = (0..self.dim).map(|i| rho0[(i, i)].re).sum();

        let mut rho = rho0.clone();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        let mut scratch: Vec<CMat> = (0..8).map(|_| CMat::zeros(self.dim, self.dim)).collect();
        let mut stage_phase = vec![Cx::new(1.0, 0.0); nph];
        let mut y = CMat::zeros(self.dim, self.dim);
        let mut diff = vec![Cx::new(0.0, 0.0); self.dim * self.dim];
        let mut h = self.max_step / 16.0;
        let mut k1_valid = false;
        let mut steps_since_renorm = 0usize;

        for &t_target in times {
            if t_target < t - 1e-9 {
                return Err(CoreError::InvalidParams(
                    "snapshot times must be ascending".into(),
                ));
            }
            while t < t_target - 1e-12 {
                let h_step = h.min(t_target - t).min(self.max_step);
                if (h_step - cur_h).abs() > 1e-12 * h_step {
                    for s in 0..7 {
                        rot[s] = self
                            .omega
                            .iter()
                            .map(|&w| Cx::from_polar(1.0, w * STAGE_C[s] * h_step))
                            .collect();
                    }
                    rot_full = self.omega.iter().map(|&w| Cx::from_polar(1.0, w * h_step)).collect();
                    cur_h = h_step;
                }
                // stage 1 (c = 0)
                if !k1_valid {
                    stage_phase.copy_from_slice(&u);
                    let (k1, _) = scratch.split_at_mut(1);
                    self.rhs(&stage_phase, &rho, &mut k1[0]);
                    k1_valid = true;
                }

                macro_rules! stage {
                    ($s:expr, $coeffs:expr, $ks:expr) => {{
                        y.copy_from(&rho);
                        for (c, kidx) in $coeffs.iter().zip($ks.iter()) {
                            y.zip_apply(&scratch[*kidx], |yy, kk| {
                                *yy += Cx::new(c * h_step, 0.0) * kk
                            });
                        }
                        for i in 0..nph {
                            stage_phase[i] = u[i] * rot[$s][i];
                        }
                        let (done, rest) = scratch.split_at_mut($s);
                        let _ = done;
                        // rhs writes into scratch[$s]
                        let tmp = &mut rest[0];
                        self.rhs(&stage_phase, &y, tmp);
                    }};
                }
                stage!(1, [A21], [0usize]);
                stage!(2, A3, [0usize, 1]);
                stage!(3, A4, [0usize, 1, 2]);
                stage!(4, A5, [0usize, 1, 2, 3]);
                stage!(5, A6, [0usize, 1, 2, 3, 4]);
                // 5th-order solution
                y.copy_from(&rho);
                for (c, kidx) in B5.iter().zip([0usize, 1, 2, 3, 4, 5].iter()) {
                    if *c != 0.0 {
                        y.zip_apply(&scratch[*kidx], |yy, kk| {
                            *yy += Cx::new(c * h_step, 0.0) * kk
                        });
                    }
                }
                // k7 at (t + h, y5)
                for i in 0..nph {
                    stage_phase[i] = u[i] * rot[6][i];
                }
                {
                    let (done, rest) = scratch.split_at_mut(6);
                    let _ = done;
                    let tmp = &mut rest[0];
                    self.rhs(&stage_phase, &y, tmp);
                }
                // error estimate: sum_i (b5_i - b4_i) k_i  (b5 has no k7 term)
                let mut err_norm_sq = 0.0;
                {
                    let ys = y.as_slice();
                    let rs = rho.as_slice();
                    let n = ys.len();
                    diff.iter_mut().for_each(|d| *d = Cx::new(0.0, 0.0));
                    for (i, b4i) in B4.iter().enumerate() {
                        let d = if i < 6 { B5[i] - b4i } else { -b4i };
                        if d == 0.0 {
                            continue;
                        }
                        let ks = scratch[i].as_slice();
                        for (dst, kv) in diff.iter_mut().zip(ks.iter()) {
                            *dst += Cx::new(d * h_step, 0.0) * kv;
                        }
                    }
                    for idx in 0..n {
                        let scale = self.opts.abs_tol
                            + self.opts.rel_tol * ys[idx].norm().max(rs[idx].norm());
                        let e = diff[idx].norm() / scale;
                        err_norm_sq += e * e;
                    }
                    err_norm_sq /= n as f64;
                }
                let en = err_norm_sq.sqrt();
                if en <= 1.0 || self.gamma == 0.0 {
                    // accept
                    t += h_step;
                    rho.copy_from(&y);
                    scratch.swap(0, 6); // FSAL
                    for i in 0..nph {
                        u[i] *= rot_full[i];
                    }
                    steps_since_renorm += 1;
                    if steps_since_renorm >= 512 {
                        for ui in u.iter_mut() {
                            *ui /= ui.norm();
                        }
                        steps_since_renorm = 0;
                        k1_valid = false;
                    }
                    let grow = if en > 0.0 { 0.9 * en.powf(-0.2) } else { 5.0 };
                    let h_new = (h_step * grow.clamp(0.2, 5.0)).min(self.max_step);
                    // keep the cached rotators unless the controller really
                    // wants a different step
                    if (h_new - h).abs() > 0.1 * h {
                        h = h_new;
                    }
                } else {
                    let shrink = (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                    h = (h_step * shrink).max(1e-12);
                    k1_valid = true; // state unchanged, k1 still valid
                    continue;
                }
            }
            // Schrodinger picture at the snapshot
            let mut snap = rho.clone();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let ph = Cx::from_polar(1.0, -(self.energies[i] - self.energies[j]) * t);
                    snap[(i, j)] *= ph;
                }
            }
            let tr: f64 = (0..self.dim).map(|i| snap[(i, i)].re).sum();
            if (tr - trace0).abs() > 1e-9 * t.max(1.0) {
                return Err(CoreError::Numerical(format!(
                    "trace drifted by {:.2e} at t = {t:.3}",
                    tr - trace0
                )));
            }
            out.push(snap);
        }
        Ok(out)
    }
}

fn split_cluster(
    ch: &[(f64, u32, u32, Cx)],
    lo: usize,
    hi: usize,
    width_cap: f64,
    out: &mut Vec<(usize, usize)>,
) {
    if hi - lo <= 1 || ch[hi - 1].0 - ch[lo].0 <= width_cap {
        out.push((lo, hi));
        return;
    }
    // cut at the weakest adjacent link
    let mut cut = lo + 1;
    let mut best = f64::INFINITY;
    for i in lo..hi - 1 {
        let w = ch[i].3.norm() * ch[i + 1].3.norm();
        if w < best {
            best = w;
            cut = i + 1;
        }
    }
    split_cluster(ch, lo, cut, width_cap, out);
    split_cluster(ch, cut, hi, width_cap, out);
}

#[derive(Debug, Clone)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    /// Product-basis density matrices at `times`.
    pub states: Vec<DensityOperator>,
    /// Minimum eigenvalue seen across checked snapshots.
    pub min_eigenvalue: f64,
}

/// Integrates the master equation for the coupled system from `rho0` (in the
/// product basis) to `t_final`, sampling every `dt_snapshot` (internal time
/// units). Returns the sampled trajectory in the product basis.
pub fn lindblad_evolve(
    p: &SystemParams,
    rho0: &DensityOperator,
    t_final: f64,
    dt_snapshot: f64,
    opts: &LindbladOptions,
) -> Result<LindbladTrajectory> {
    let spec = diagonalize_labeled(p, opts.ramp_steps)?;
    lindblad_evolve_with_spec(p, &spec, rho0, t_final, dt_snapshot, opts)
}

/// [`lindblad_evolve`] with a precomputed labeled diagonalization.
pub fn lindblad_evolve_with_spec(
    p: &SystemParams,
    spec: &DressedSpectrum,
    rho0: &DensityOperator,
    t_final: f64,
    dt_snapshot: f64,
    opts: &LindbladOptions,
) -> Result<LindbladTrajectory> {
    if dt_snapshot <= 0.0 || t_final < 0.0 {
        return Err(CoreError::InvalidParams(
            "t_final must be >= 0 and dt_snapshot > 0".into(),
        ));
    }
    rho0.validate()?;
    let v = &spec.states;
    let jump = v.adjoint() * transmon_lowering_full(p)? * v;
    let engine = DiagonalLindblad::new(spec.energies.clone(), &jump, p.gamma, opts.clone())?;
    let rho_eig = v.adjoint() * &rho0.matrix * v;
    let mut times = Vec::new();
    let mut t = 0.0;
    while t < t_final - 1e-12 {
        t += dt_snapshot;
        times.push(t.min(t_final));
    }
    if times.is_empty() {
        times.push(0.0);
    }
    let snaps = engine.evolve(&rho_eig, &times)?;
    let mut min_eig = f64::INFINITY;
    let mut states = Vec::with_capacity(snaps.len());
    for (snap, &ts) in snaps.iter().zip(times.iter()) {
        let d = DensityOperator { matrix: v * snap * v.adjoint(), time: ts };
        if opts.check_positivity {
            let me = d.min_eigenvalue()?;
            min_eig = min_eig.min(me);
            if me < opts.positivity_abort {
                return Err(CoreError::Numerical(format!(
                    "positivity violated: min eigenvalue {me:.2e} at t = {ts:.3}"
                )));
            }
        }
        states.push(d);
    }
    Ok(LindbladTrajectory { times, states, min_eigenvalue: min_eig })
}

/// `F_gamma(t) = <Psi_approx(t)| rho |Psi_approx(t)>` against the Kerr-free
/// rotating reference built from `state0` (the `t = 0` pure state).
pub fn kerr_free_fidelity(
    spec: &DressedSpectrum,
    state0: &crate::dynamics::cat::QuantumState,
    rho_product: &DensityOperator,
    t: f64,
) -> f64 {
    let wbar = crate::dynamics::cat::omega_bar(spec, state0.mean_photon());
    let dim = state0.amplitudes.len();
    let mut psi = crate::CVec::zeros(dim);
    for m in 0..state0.n_transmon {
        for na in 0..state0.n_a {
            for nb in 0..state0.n_b {
                let idx = spec.index(m, na, nb);
                psi[idx] = state0.amplitudes[idx] * Cx::from_polar(1.0, -wbar * na as f64 * t);
            }
        }
    }
    // to the product basis
    let psi_prod = &spec.states * psi;
    (psi_prod.adjoint() * &rho_product.matrix * psi_prod)[(0, 0)].re
}
