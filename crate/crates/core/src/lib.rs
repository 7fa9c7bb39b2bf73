//! Computational laboratory for integer zeros of rational cubic forms
//! subject to real linear-form inequalities `|L(x) - tau| < eta`.

pub mod arith;
pub mod cli;
pub mod construct;
pub mod equidist;
pub mod error;
pub mod experiment;
pub mod expsums;
pub mod forms;
pub mod kernels;
pub mod lattice;
pub mod qmc;
pub mod quadrature;
pub mod sintegral;
pub mod sseries;

pub use error::{Error, Result};
