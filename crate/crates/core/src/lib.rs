//! Magnetic Weyl asymptotics of the two-dimensional magnetic Schrödinger
//! operator `½(Σ P_j g^{jk} P_k − V)`, `P_j = hD_j − μA_j`, with logarithmic
//! saddle-point corrections, and a brute-force discretized eigensolver to
//! check them against.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptote;
pub mod critpoints;
pub mod error;
pub mod fields;
pub mod harness;
pub mod model1d;
pub mod oracle;
pub mod quadrature;
pub mod regress;

pub use error::{Error, Result};
