#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! D-bar reconstruction of complex admittivities in 2-D electrical impedance
//! tomography, with optional spatial-prior regularization.

pub mod config;
pub mod dbar;
pub mod dnmap;
pub mod error;
pub mod exec;
pub mod fft;
pub mod field;
pub mod forward;
pub mod geometry;
pub mod gmres;
pub mod pipeline;
pub mod prior;
pub mod recovery;
pub mod render;
pub mod scattering;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
