//! Even Schrodinger cat states over the labeled dressed basis and their
//! coherent (Kerr-free-reference) fidelity.

use crate::dressing::DressedSpectrum;
use crate::{CVec, CoreError, Cx, Result};

/// Pure state over the labeled dressed product basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub amplitudes: CVec,
    pub n_transmon: usize,
    pub n_a: usize,
    pub n_b: usize,
}

impl QuantumState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<N_A>` over the dressed-cavity label.
    pub fn mean_photon(&self) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.n_transmon {
            for na in 0..self.n_a {
                for nb in 0..self.n_b {
                    let idx = (m * self.n_a + na) * self.n_b + nb;
                    acc += na as f64 * self.amplitudes[idx].norm_sqr();
                }
            }
        }
        acc
    }
}

/// Normalized even-cat coefficients over the photon number, `N = 0..n_a`.
pub fn even_cat_coefficients(n_a: usize, beta: Cx) -> Vec<Cx> {
    let b2 = beta.norm_sqr();
    let norm = (2.0 + 2.0 * (-2.0 * b2).exp()).sqrt();
    let mut c = Vec::with_capacity(n_a);
    let mut pow = Cx::new(1.0, 0.0); // beta^N / sqrt(N!)
    for n in 0..n_a {
        if n > 0 {
            pow *= beta / (n as f64).sqrt();
        }
        let even = if n % 2 == 0 { 2.0 } else { 0.0 };
        c.push(pow * ((-b2 / 2.0).exp() * even / norm));
    }
    c
}

/// `<N_A> = |beta|^2 tanh(|beta|^2)` for the even cat.
pub fn mean_photon_even_cat(beta2: f64) -> f64 {
    beta2 * beta2.tanh()
}

/// Even cat `|beta_+> = N^{-1/2}(|beta> + |-beta>)` over `|psi_0, N_a>`-bar.
pub fn make_cat(spec: &DressedSpectrum, beta: Cx) -> Result<QuantumState> {
    if beta.norm_sqr() > spec.n_a as f64 / 3.0 {
        return Err(CoreError::InvalidParams(format!(
            "|beta|^2 = {:.2} exceeds n_a/3 = {:.2} (truncation guard)",
            beta.norm_sqr(),
            spec.n_a as f64 / 3.0
        )));
    }
    let coeffs = even_cat_coefficients(spec.n_a, beta);
    let dim = spec.n_transmon * spec.n_a * spec.n_b;
    let mut amp = CVec::zeros(dim);
    for (n, c) in coeffs.iter().enumerate() {
        amp[spec.index(0, n, 0)] = *c;
    }
    Ok(QuantumState {
        amplitudes: amp,
        n_transmon: spec.n_transmon,
        n_a: spec.n_a,
        n_b: spec.n_b,
    })
}

/// Reference rotation frequency: the discrete derivative of `E_0(N_A)` at the
/// ceiling of the state's mean photon number,
/// `omega_bar = E_0(ceil<N_A>) - E_0(ceil<N_A> - 1)`.
pub fn omega_bar(spec: &DressedSpectrum, mean_photon: f64) -> f64 {
    let n = (mean_photon.ceil() as usize).clamp(1, spec.n_a - 1);
    spec.energy(0, n, 0) - spec.energy(0, n - 1, 0)
}

/// Overlap `|<Psi_approx(t)|Psi(t)>|^2` of the coherently evolved state with
/// the Kerr-free reference rotating at `omega_bar` (time in units of
/// `1/alpha`). The evolution is exact: diagonal phases in the labeled basis.
pub fn coherent_fidelity(spec: &DressedSpectrum, state: &QuantumState, t: f64) -> f64 {
    let wbar = omega_bar(spec, state.mean_photon());
    coherent_fidelity_with_omega(spec, state, t, wbar)
}

/// Same as [`coherent_fidelity`] at an explicit reference frequency (the
/// maximizing-`omega_bar` variant lives behind this).
pub fn coherent_fidelity_with_omega(
    spec: &DressedSpectrum,
    state: &QuantumState,
    t: f64,
    wbar: f64,
) -> f64 {
    let mut overlap = Cx::new(0.0, 0.0);
    for m in 0..state.n_transmon {
        for na in 0..state.n_a {
            for nb in 0..state.n_b {
                let idx = spec.index(m, na, nb);
                let w = state.amplitudes[idx].norm_sqr();
                if w == 0.0 {
                    continue;
                }
                let phase = -(spec.energies[idx] - wbar * na as f64) * t;
                overlap += Cx::from_polar(w, phase);
            }
        }
    }
    overlap.norm_sqr()
}

/// Characteristic phase-collapse time `tau_ph = pi / (2 sqrt(n_bar) |K|)`
/// (units of `1/alpha`).
pub fn tau_ph(kerr: f64, n_bar: f64) -> f64 {
    std::f64::consts::PI / (2.0 * n_bar.sqrt() * kerr.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressing::diagonalize_labeled;
    use crate::floquet::FloquetSolution;
    use crate::model::SystemParams;
    use crate::CMat;
    use approx::assert_abs_diff_eq;

    fn small_spec() -> DressedSpectrum {
        let p = SystemParams {
            n_transmon: 4,
            n_a: 12,
            n_b: 1,
            delta_d: 2.0,
            ..Default::default()
        };
        diagonalize_labeled(&p, 8).unwrap()
    }

    /// Synthetic single-manifold spectrum with a pure Kerr ladder.
    fn synthetic_kerr_spec(n_a: usize, kerr: f64) -> DressedSpectrum {
        let p = SystemParams {
            n_transmon: 3,
            n_a,
            n_b: 1,
            g_a: Cx::new(0.0, 0.0),
            omega_d_amp: Cx::new(0.0, 0.0),
            ..Default::default()
        };
        let mut spec = diagonalize_labeled(&p, 2).unwrap();
        for na in 0..n_a {
            let nf = na as f64;
            let idx = spec.index(0, na, 0);
            spec.energies[idx] = 0.5 * kerr * nf * (nf - 1.0);
        }
        let _: &FloquetSolution = &spec.floquet;
        let _: &CMat = &spec.states;
        spec
    }

    #[test]
    fn trivial_cat_is_vacuum() {
        let spec = small_spec();
        let cat = make_cat(&spec, Cx::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(cat.amplitudes[spec.index(0, 0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cat.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cat_mean_photon_and_parity() {
        let spec = small_spec();
        let beta = Cx::new(3f64.sqrt(), 0.0);
        let cat = make_cat(&spec, beta).unwrap();
        assert_abs_diff_eq!(cat.norm(), 1.0, epsilon = 1e-9);
        assert!((cat.mean_photon() - mean_photon_even_cat(3.0)).abs() < 1e-3);
        assert_abs_diff_eq!(mean_photon_even_cat(3.0), 3.0 * 3f64.tanh(), epsilon = 1e-15);
        // only even N populated
        for na in (1..spec.n_a).step_by(2) {
            assert_abs_diff_eq!(cat.amplitudes[spec.index(0, na, 0)].norm(), 0.0);
        }
    }

    #[test]
    fn truncation_guard() {
        let spec = small_spec();
        assert!(make_cat(&spec, Cx::new(2.5, 0.0)).is_err()); // beta^2 = 6.25 > 12/3
    }

    #[test]
    fn fidelity_starts_at_one_and_stays_bounded() {
        let spec = small_spec();
        let cat = make_cat(&spec, Cx::new(1.2, 0.0)).unwrap();
        assert_abs_diff_eq!(coherent_fidelity(&spec, &cat, 0.0), 1.0, epsilon = 1e-12);
        for k in 1..30 {
            let f = coherent_fidelity(&spec, &cat, 1e3 * k as f64);
            assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }

    #[test]
    fn pure_kerr_revival() {
        // with E(N) = K/2 N(N-1), an even cat revives exactly at t = 2 pi/|K|
        let kerr = -1e-3;
        let spec = synthetic_kerr_spec(14, kerr);
        let cat = make_cat(&spec, Cx::new(3f64.sqrt(), 0.0)).unwrap();
        let trev = 2.0 * std::f64::consts::PI / kerr.abs();
        let f = coherent_fidelity(&spec, &cat, trev);
        assert!(f > 1.0 - 1e-9, "revival fidelity {f}");
        // and it is well below 1 at the half-way anti-revival
        let f_half = coherent_fidelity(&spec, &cat, trev / 2.0);
        assert!(f_half < 0.1, "anti-revival fidelity {f_half}");
    }

    #[test]
    fn tau_ph_formula() {
        // |K|/2pi = 2.63 kHz, n = 3 tanh 3 gives about 55 us
        let p = SystemParams::default();
        let k_int = -2.63e3 / p.alpha_hz;
        let t = tau_ph(k_int, mean_photon_even_cat(3.0));
        let t_us = t / p.alpha_rad() * 1e6;
        assert!((t_us - 55.0).abs() < 1.0, "tau_ph = {t_us} us");
    }
}
