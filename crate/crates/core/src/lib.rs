//! Population statistics of functions on finite abelian groups, computed from
//! their Fourier coefficients.

pub mod cli;
pub mod convolution;
pub mod error;
pub mod group;
pub mod io;
pub mod limits;
pub mod models;
pub mod moments;
pub mod spectrum;
pub mod symbolic;
pub mod timeseries;
pub mod verify;

pub use error::{Error, Result};
pub use group::{GroupIndex, GroupSpec, IndexOrdering, SubtractionTable};
pub use limits::Limits;
pub use num_complex::Complex64;
pub use spectrum::{DenseFunction, MomentCenter, Side, SparseSpectrum};
