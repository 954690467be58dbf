#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical toolkit for Steklov eigenvalues on embedded simplicial manifolds:
//! mesh families, finite-element spectra, closed-form oracles, index estimates,
//! packing certificates and explicit upper bounds.

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod index;
pub mod oracles;
pub mod packing;
pub mod sparse;
pub mod spectral;
pub mod spheres;

pub use error::{Error, ErrorKind, Result};
