//! Exact cubic and linear forms, h-decompositions and h-invariant bounds.

mod cubic;
mod decomp;
mod hinv;
pub mod io;
mod linear;
mod poly;

pub use cubic::{CompiledCubic, CubicForm};
pub use decomp::{verify_h_decomposition, HDecomposition, HPair};
pub use hinv::{
    diagonal_singular_dimension, find_irreducibility_certificate, find_rational_linear_space,
    find_rational_linear_space_with, h_bounds, vanishes_on_span, verify_lower_certificate, HBounds,
    LowerCertificate, SpaceSearch, UpperCertificate,
};
pub use linear::{numeric_rank, LinearForm, LinearSystem};
pub use poly::Poly;
