//! T-product tensor algebra, closed-form tail bounds for sums of random
//! T-product tensors, random ensembles that meet each bound's hypotheses,
//! and numerical checks of the supporting inequalities.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod literal;
pub mod spectral;
pub mod tensor;
pub mod verification;

pub use bounds::{BoundQuery, BoundValue, TheoremId, Threshold};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{Eigentuple, HermitianSpectrum, SpectralFn, TSvd};
pub use tensor::{DenseTensor3, Matrix, TensorShape, TransformedTensor};
pub use verification::{DominationReport, LemmaCheckResult, TailEstimate};
