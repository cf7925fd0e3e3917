//! Gabor frame operators on discretized Wiener amalgam spaces `W(L^p, ℓ^q)`.
//!
//! Functions live on uniform grids over `[-T, T)^d`. The frame operator
//! `S_{a,b;g,γ}` is available in three equivalent forms: the lattice sum
//! ([`gabor::apply_frame_direct`]), the Walnut representation
//! ([`walnut::walnut_apply`]) and the Janssen representation
//! ([`janssen::janssen_apply`]). The [`experiments`] module drives the
//! density limits `(a, b) → (0, 0)`.

pub mod amalgam;
pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod gabor;
pub mod grid;
pub mod janssen;
pub mod signal;
pub mod sum;
pub mod walnut;
pub mod window;

pub use amalgam::{amalgam_norm, conjugate_exponent, wiener_norm, Exponent, ExponentPair};
pub use error::{GaborError, Result};
pub use config::{parse_versioned, SystemSpec};
pub use experiments::{SweepReport, SweepSchedule};
pub use gabor::{apply_frame_direct, CoefficientLattice, GaborSystem};
pub use janssen::{janssen_apply, janssen_coefficients, wexler_raz_check, JanssenLattice};
pub use grid::{Grid, GridFunction, GridSpec};
pub use num_complex::Complex64;
pub use signal::{sample_signal, SignalSpec};
pub use walnut::{walnut_apply, CorrelationFamily};
pub use window::{sample_window, WindowSpec};
