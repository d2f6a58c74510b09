//! Cat-state construction and coherent fidelity, Kerr-cancellation drive
//! optimization, Wigner tomography, Lindblad evolution with transmon decay,
//! golden-rule rate budgets, and Wigner-based parameter fitting.

mod bessel;
pub mod cancel;
pub mod cat;
pub mod displacement;
pub mod fit;
pub mod lindblad;
pub mod rates;
pub mod wigner;

pub use cancel::{fidelity_optimal_drive, optimize_cancellation, CancellationResult};
pub use cat::{coherent_fidelity, make_cat, mean_photon_even_cat, omega_bar, tau_ph, QuantumState};
pub use displacement::{classical_displacement, scaled_planck_constant};
pub use fit::{fit_from_wigner, FitResult, FitSpec};
pub use lindblad::{lindblad_evolve, DensityOperator, DiagonalLindblad, LindbladOptions, LindbladTrajectory};
pub use rates::{c_coefficient, rate_budget, RateBudget};
pub use wigner::{displacement_op, wigner_of_rho, wigner_of_state, WignerPoint};
