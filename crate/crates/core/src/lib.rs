//! Decomposable and completely bounded norms of linear maps between
//! finite-dimensional real matrix operator systems.
//!
//! Systems are subspaces of `M_n(ℝ)` closed under transpose and containing
//! the identity; complex systems are stored realified. Norms are computed by
//! semidefinite programs over Choi matrices of ambient extensions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpmap;
pub mod decnorm;
pub mod error;
pub mod mat;
pub mod opsys;
pub mod par;
pub mod sdp;
pub mod suite;

pub use cpmap::{is_cp, ChoiMatrix, CpStatus, CpVerdict};
pub use decnorm::{cb_norm, dec_norm, DecResult, DecValue};
pub use error::{Error, Result};
pub use mat::RealMatrix;
pub use opsys::{LinearMap, MatrixSystem, SystemKind};
pub use par::Execution;
pub use suite::{run_suite, SuiteReport};
