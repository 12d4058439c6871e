//! Weak Orlicz quasi-norms on finite tracial matrix algebras, together with
//! empirical checks of weak-type interpolation and noncommutative
//! martingale, Khintchine and Fourier inequalities.

pub mod corpus;
pub mod error;
pub mod exec;
pub mod interpolation;
pub mod io;
pub mod linalg;
pub mod martingale;
pub mod norms;
pub mod numeric;
pub mod orlicz;
pub mod rademacher;
pub mod report;
pub mod spectral;
pub mod suites;
pub mod torus;

pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::CMatrix;
pub use orlicz::OrliczFunction;
pub use spectral::{SingularSpectrum, TracialMatrix};
