//! q-special functions, the doubly infinite Jacobi operator they diagonalize,
//! and numerical checks of their orthogonality relations.

pub mod bilateral;
pub mod error;
pub mod families;
pub mod limits;
pub mod logreal;
pub mod orthogonality;
pub mod qseries;
pub mod spectral;
pub mod suites;
pub mod sum;

pub use error::{QError, Result};
pub use logreal::LogReal;
pub use qseries::{PhiSpec, QContext, Scaled, SeriesValue};
