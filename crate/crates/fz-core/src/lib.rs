//! Fourier-Zernike expansions of disk-supported functions and convolution
//! in coefficient space.
//!
//! A function supported on the disk of radius `a` is expanded in the
//! orthonormal basis `V_nm(r, theta) = a^-1 sqrt((n+1)/pi) Z_nm(r/a) e^(im theta)`
//! built from radial Zernike polynomials and circular harmonics. The
//! expansion coefficients are computed from lattice Fourier coefficients of
//! the zero-padded function through a fixed Bessel-weighted kernel, which
//! turns convolution of two half-radius-supported functions into a weighted
//! sum of products of their Fourier tables — no inverse transform needed.
//!
//! Modules follow the pipeline:
//!
//! * [`special`] — Bessel J and radial Zernike evaluation
//! * [`basis`] — index bookkeeping and basis-element evaluation
//! * [`lattice`] — polar shell decomposition of the integer lattice
//! * [`grid`] — sampled functions on the square, rectangular and polar
//!   Fourier tables
//! * [`transform`] — Fourier table -> coefficient table and series
//!   reconstruction
//! * [`conv`] — spectral convolution and the brute-force oracle
//! * [`kernels`] — closed-form basis transforms and pre-computed
//!   convolution kernels
//! * [`io`] — binary grid files, coefficient JSON, PGM rendering
//! * [`checks`] — runnable invariant suites behind the `verify` command
//!
//! Hot loops run on rayon when the default `parallel` feature is enabled;
//! every such operation also has a `_seq` variant that is always sequential,
//! and the two are bitwise-equal by construction.

pub mod basis;
pub mod checks;
pub mod conv;
pub mod descriptor;
pub mod error;
mod exec;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod lattice;
pub mod quad;
pub mod special;
pub mod transform;

pub use error::{FzError, Result};
pub use num_complex::Complex64;
