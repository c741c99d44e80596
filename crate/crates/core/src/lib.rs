//! Tests of complete spatial randomness (CSR) built on the Minkowski
//! functionals of a thresholded counts image.
//!
//! A planar point pattern in the unit square is binned into an `m × m`
//! grid, every bin holding at least `c` points is colored black, and the
//! resulting bordered binary image is summarized by its scaled area,
//! perimeter and Euler characteristic. Under a homogeneous Poisson process
//! the exact means and covariances of these three numbers are known in
//! closed form, which gives single-functional statistics `T_A`, `T_P`,
//! `T_χ` (χ²₁ in the limit) and combined quadratic forms `T_c`, `T̃_c`
//! (χ²₃ in the limit).
//!
//! The crate is `no_std` (with `alloc`). It contains
//!
//! - [`grid`]: binning and thresholding,
//! - [`minkowski`]: the 2×2 look-up-table scan and its alternative forms,
//! - [`moments`]: exact null moments and a brute-force enumeration oracle,
//! - [`hypothesis`]: the statistics, p-values and Monte Carlo calibration,
//! - [`pointprocess`]: seedable simulators for the null and alternatives,
//! - [`competitors`]: quadrat-count and Hopkins–Skellam baselines,
//! - [`limits`]: almost-sure limits under inhomogeneous Poisson alternatives,
//!
//! plus the numerical building blocks ([`special`], [`quadrature`],
//! [`linalg`], [`rng`]) they share.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod competitors;
pub mod error;
pub mod grid;
pub mod hypothesis;
pub mod limits;
pub mod linalg;
pub mod minkowski;
pub mod moments;
pub mod pointprocess;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use crate::error::{Error, Result};
pub use crate::grid::{BinaryImage, CountsGrid, Point, PointPattern};
pub use crate::minkowski::{MinkowskiCounts, MinkowskiTriple, WindowConfig};
pub use crate::moments::NullMoments;
pub use crate::rng::StreamRng;
