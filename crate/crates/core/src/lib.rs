//! Space-frame chassis analysis: beam finite elements, static stiffness
//! tests, modal analysis, reduced-order crash chains and a modular
//! design loop.

// `!(x > 0.0)` is used deliberately so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod crash;
pub mod design;
pub mod element;
mod error;
pub mod exec;
pub mod material;
pub mod modal;
pub mod model;
pub mod report;
pub mod section;
pub mod sparse;
pub mod statics;

pub use error::{Error, Result};
