//! Low-frequency non-uniqueness of Boolean functions on the discrete cube.
//!
//! The crate decides whether a sign function `f : {-1,1}^p -> {-1,1}` admits a
//! function `f'` with values strictly inside `(-1, 1)` sharing every Walsh
//! coefficient of degree at most `d`, builds and checks certificates for it,
//! counts the hyperplane-arrangement quantities that bound how many such `f`
//! exist, and measures the spectral sampling behaviour of low-degree Walsh
//! vectors.
//!
//! Numeric code is generic over [`Scalar`]; [`Rational`] gives exact answers and
//! `f64` is used for Monte Carlo work.

pub mod arrangements;
pub mod cube;
pub mod error;
pub mod experiments;
pub mod format;
pub mod linalg;
pub mod lp;
pub mod sampling;
pub mod scalar;
pub mod witness;

pub use cube::{
    frequencies_equal, inner_product, inverse_wht, marginal, marginal_from_spectrum, project_h, walsh_eval,
    wht_full, CubePoint, FrequencySpectrum, FunctionTable, SubsetMask, MAX_DIM,
};
pub use error::{Error, Result};
pub use scalar::{Mode, Rational, Scalar};
pub use witness::{DistributionTable, VerificationReport, WitnessCertificate};

pub type ExactTable = FunctionTable<Rational>;
pub type FloatTable = FunctionTable<f64>;
pub type ExactSpectrum = FrequencySpectrum<Rational>;
pub type FloatSpectrum = FrequencySpectrum<f64>;
pub type ExactCertificate = WitnessCertificate<Rational>;
pub type FloatCertificate = WitnessCertificate<f64>;
pub type ExactDistribution = DistributionTable<Rational>;
