//! Pure dephasing of a double-donor charge qubit coupled to longitudinal
//! acoustic phonons.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`params`]: physical constants, material and geometry inputs, and the
//!   derived scale system (`tau_d`, `omega_d`, `T0`, `Gamma_T`).
//! - [`rates`]: closed-form decoherence rates, the decay function and its
//!   temperature scaling, mean rate and coherence time.
//! - [`oracle`]: k-space kernels and the quadrature routes that serve as
//!   independent ground truth for everything in [`rates`], plus the
//!   phonon-induced level shift.
//! - [`quad`]: the adaptive Gauss-Kronrod engine both of the above rely on.
//! - [`curve`]: sampled series, the unit of output for sweeps and figures.

pub mod curve;
pub mod error;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod rates;

pub use curve::Curve;
pub use error::{Error, Result};
pub use oracle::{QubitSetup, SpectralKernel};
pub use params::{
    derive_scales, material_preset, DerivedScales, ElectronicLevels, Geometry, InitialState,
    Material,
};
pub use quad::{Estimate, QuadError, QuadratureConfig};
pub use rates::RateParams;
