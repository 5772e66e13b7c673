//! Computational tools for coset packing, subgroup height and width, median
//! graphs and relative metrics in concrete finitely generated groups.

pub mod cayley;
pub mod clique;
pub mod cube;
pub mod error;
pub mod group;
pub mod lattice;
pub mod packing;
pub mod relhyp;
pub mod stallings;
pub mod word;

pub use error::{Error, Result};
