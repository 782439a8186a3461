//! Complex band structures of one-dimensional periodic non-Hermitian
//! Schrödinger operators
//!
//! ```text
//! H = (p - A)^2 + V(x),    V(x + 1) = V(x)
//! ```
//!
//! in units where the lattice constant and `1/(2M)` are one. The crate
//! diagonalizes the truncated plane-wave Bloch matrix, tracks bands through
//! exceptional points, builds bi-orthogonal Wannier functions and extracts
//! tight-binding hoppings from them.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(feature = "parallel")]
extern crate std;

mod error;
mod linalg;

pub mod ep;
pub mod perturbation;
pub mod spectra;
pub mod tightbinding;
pub mod wannier;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use num_complex::Complex64;
