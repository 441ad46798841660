//! Tomographic checks of the Heisenberg and Schrödinger-Robertson
//! uncertainty relations from homodyne data.
//!
//! The crate works with optical tomograms W(X, θ): the probability density
//! of the rotated quadrature X = q cos θ + p sin θ measured by a homodyne
//! detector at local-oscillator phase θ.
//!
//! - [`state`]: analytic states (Gaussian, Fock) with exact tomograms,
//!   covariances and Wigner functions.
//! - [`tomogram`]: gridded tomograms, raw records, moments, histogramming.
//! - [`uncertainty`]: variances, the covariance from the θ = π/4 row, the
//!   Heisenberg product, the Schrödinger-Robertson determinant and the
//!   tomographic uncertainty function F(θ).
//! - [`radon`]: forward projection of Wigner functions and filtered
//!   back-projection.
//! - [`sampler`]: simulated homodyne acquisition.
//! - [`io`]: JSON and CSV file formats.

pub mod error;
pub mod io;
pub mod quadrature;
pub mod radon;
pub mod sampler;
mod spline;
pub mod state;
pub mod tomogram;
pub mod uncertainty;

pub use error::{Result, TomoError};
pub use quadrature::Quadrature;
pub use radon::{forward_radon, inverse_radon, ForwardProjection, ReconstructionOptions, WignerGrid};
pub use sampler::{acquire, AcquisitionPlan};
pub use state::{Covariance, FockState, GaussianState, StateModel};
pub use tomogram::{
    histogram_tomogram, OpticalTomogramGrid, QuadratureRecord, QuadratureSampleSet, SampleMetadata,
    SymplecticPoint,
};
pub use uncertainty::{CheckConfig, TomographicData, UncertaintyReport, VarianceEstimate};
