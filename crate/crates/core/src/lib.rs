//! Growth estimates for orbits of self-adjoint matrix groups.
//!
//! The crate works at the level of a Lie algebra `g` of n x n real matrices
//! that is closed under brackets and transposes. From it we derive the
//! Cartan split `g = k + p`, stabilizer subspaces of a vector, the growth
//! exponents, the moment map and a descent flow to minimal vectors, and
//! right-invariant distances that are computable exactly (to `K`, to
//! `K * G_v`, along symmetric rays).

pub mod catalog;
pub mod config;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod liealg;
pub mod numcore;
pub mod orbitflow;
pub mod verify;

pub use error::{Error, Result};
pub use numcore::{Matrix, Tolerances};
