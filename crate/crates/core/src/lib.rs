//! Matrix-valued orthogonal polynomials: symmetric right-hand-side
//! differential operators, Dirac-mass modifications of weight matrices and
//! the cone of weights sharing an operator.
//!
//! All numerics are real `f64` on `nalgebra` dense matrices. Residuals are
//! relative to the largest term entering the identity being checked.

pub mod cone;
pub mod diffop;
pub mod error;
pub mod matpoly;
pub mod numkernel;
pub mod orthopoly;
pub mod symmetry;
pub mod weights;

pub use diffop::DiffOperator;
pub use error::{Error, Result};
pub use matpoly::{Kernel, MatrixPolynomial, QuasiDensity};
pub use numkernel::{Matrix, Vector};
pub use orthopoly::OrthoSequence;
pub use symmetry::{Branch, SymmetryReport};
pub use weights::{Family, MomentSequence, WeightMatrix};
