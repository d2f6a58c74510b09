//! Drive-induced nonlinearities of cavity modes coupled to a driven transmon.
//!
//! The crate models one or two linear cavity modes dispersively coupled to a
//! charge-driven transmon in the frame rotating at the drive frequency. It
//! computes the cavity self-Kerr and cross-Kerr (and the sixth/eighth-order
//! corrections) three independent ways — exact diagonalization with adiabatic
//! state labeling, fourth-order perturbation theory in the coupling, and
//! closed-form regime expressions — and simulates Kerr-cancelled Schrodinger
//! cat dynamics, including transmon decay through a Lindblad master equation.
//!
//! All internal frequencies are angular and measured in units of the transmon
//! anharmonicity `alpha`; conversion from laboratory Hz happens at the config
//! boundary (`model::SystemParams`).

pub mod algebra;
pub mod dressing;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod model;
pub mod perturbation;
pub mod regimes;

pub use error::CoreError;

/// Complex scalar used throughout.
pub type Cx = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Cx>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<Cx>;

pub type Result<T> = std::result::Result<T, CoreError>;
