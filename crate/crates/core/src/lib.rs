//! Multi-machine transient simulation and line-potential-energy based
//! out-of-step detection.
//!
//! Pipeline: [`case::NetworkCase`] -> [`simcore::simulate`] ->
//! [`energetics`] decompositions -> [`twomach`] cosine models ->
//! [`detect`] events.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case;
pub mod cli;
pub mod detect;
pub mod energetics;
pub mod error;
pub mod netmodel;
pub mod partition;
pub mod simcore;
pub mod twomach;

pub use case::NetworkCase;
pub use error::{Error, Result};
