//! Orthotube spectra of maximal representations of the pair-of-pants group
//! into `Sp(2n, R)`: Siegel-space geometry, R-tubes, peripheral data, the
//! truncated orthospectrum and the length identities and inequalities it
//! satisfies.

pub mod error;
pub mod linalg;
pub mod orthospectrum;
pub mod report;
pub mod siegel;
pub mod special;
pub mod surface;
pub mod tubes;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix, ToleranceProfile};
pub use orthospectrum::{OrthotubeRecord, PartialSums, SpectrumReport};
pub use siegel::{LagrangianFrame, SiegelPoint, SymplecticElement, WeylVector};
pub use surface::{FreeWord, Representation, ShilovData, SurfaceSpec, TranslationLengths};
pub use tubes::RTube;
