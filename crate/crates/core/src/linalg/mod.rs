//! Dense complex linear algebra used throughout the crate.

pub mod eig;
pub mod expm;
pub mod matrix;
pub mod svd;

pub use eig::{eigen, Eigen};
pub use expm::{expm, solve};
pub use matrix::{inner, normalize, vec_norm, ComplexMatrix};
pub use svd::{condition, norm2, rank_with_gap, singular_values};
