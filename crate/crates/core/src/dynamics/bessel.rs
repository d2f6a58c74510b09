//! Minimal Bessel evaluations for the infidelity constant: `J_0` and `I_0`.

/// Bessel function of the first kind, order zero. Power series below
/// `|x| = 12`, Hankel asymptotic expansion beyond.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 12.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        let z = 8.0 / ax;
        let z2 = z * z;
        let p0 = 1.0 + z2 * (-0.1098628627e-2 + z2 * (0.2734510407e-4 + z2 * (-0.2073370639e-5 + z2 * 0.2093887211e-6)));
        let q0 = z / 8.0
            * (-0.1562499995e-1
                + z2 * (0.1430488765e-3 + z2 * (-0.6911147651e-5 + z2 * (0.7621095161e-6 - z2 * 0.934935152e-7))));
        let chi = ax - 0.785398164;
        (2.0 / (std::f64::consts::PI * ax)).sqrt() * (chi.cos() * p0 - chi.sin() * q0)
    }
}

/// Modified Bessel function of the first kind, order zero. Power series below
/// `x = 18`, leading asymptotic terms beyond.
pub fn i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 18.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        let z = 1.0 / ax;
        ax.exp() / (2.0 * std::f64::consts::PI * ax).sqrt()
            * (1.0 + z * (0.125 + z * (0.0703125 + z * 0.0732421875)))
    }
}
