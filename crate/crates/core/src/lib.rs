//! Fourth-order finite differences obtained from the `C^0`-`Q^2` finite element
//! method with 3×3 Gauss-Lobatto quadrature.
//!
//! The crate is organised along the pipeline of a solve:
//!
//! * [`quadrature`]: Gauss-Lobatto rules, Legendre and M-type polynomials;
//! * [`grid`]: tensor grids, grid functions, discrete norms;
//! * [`assembly`]: the `D`, `E`, `W̄` stencils and the matrix-free operator;
//! * [`solvers`]: direct, fast eigen and preconditioned CG solvers;
//! * [`problems`]: an expression language and the built-in test problems;
//! * [`harness`]: single solves, convergence tables and stencil dumps;
//! * [`oracle`]: brute-force element-by-element assembly for testing.

pub mod assembly;
pub mod error;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod problems;
pub mod quadrature;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
