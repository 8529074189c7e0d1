//! Lie 2-algebras, Lie 2-bialgebras from graded r-matrices, 2-graded
//! Poisson structures, 2-Lax pairs, 2-representations and lattice models.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod bialgebra;
#[cfg(doctest)]
mod book;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod lax;
pub mod poisson;
pub mod representations;
pub mod tensor;

pub use error::{Error, Result};
