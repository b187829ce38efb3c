//! Moment maps of reductive group actions, the negative gradient flow of
//! `|m|^2`, and numerical detection of distinguished orbits.
//!
//! Two actions are covered concretely: `GL(n)` acting on brackets of `R^n` by
//! change of basis, where distinguished orbits of nilpotent brackets are the
//! Einstein nilradicals, and the adjoint action of `SL(n)` on `sl(n)`, where
//! every nilpotent orbit carries an explicit distinguished representative.

pub mod adjoint;
pub mod cli;
pub mod detection;
pub mod error;
pub mod flow;
pub mod io;
pub mod lie_core;
pub mod linalg;
pub mod moment;

pub use error::{Error, Result};
pub use lie_core::BracketTensor;
pub use linalg::LinearMap;
pub use moment::SymmetricMatrix;
