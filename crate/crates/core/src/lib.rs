//! Exact differential-operator calculus on the supercircle S^{1|2} and the
//! osp(2|2)-equivariant quantization map between symbols and operators.
//!
//! Everything is computed over ℚ with polynomial coefficients, so every
//! identity in the test suites is checked by exact equality.

pub mod contact;
pub mod diffop;
pub mod divergence;
pub mod error;
pub mod format;
pub mod grassmann;
pub mod linsolve;
pub mod quantization;
pub mod rational;
pub mod symbol;

pub use contact::{aff_basis, osp_basis, BasisName, ContactHamiltonian, GeneratorBasis};
pub use diffop::{ContactOrder, Mono, SuperDiffOp};
pub use error::{Error, Result};
pub use grassmann::{Parity, Poly, Sector, SuperFunction};
pub use rational::Rational;
pub use symbol::Symbol;
