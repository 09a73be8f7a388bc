// SPDX-License-Identifier: Apache-2.0

//! Numerical toolkit for sign-changing "necklace" solutions of the critical
//! semilinear equation `Δu + u⁵ = 0` in the unit ball of ℝ³.
//!
//! The crate builds the crown-bubble profile, evaluates the image-sum
//! interaction kernels of a K-fold sector together with their closed-form
//! resummations and asymptotics, and minimises the reduced energy over the
//! finite-dimensional parameter box. It is `no_std` with `alloc`; IO and the
//! command line live in the companion `necklace` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod crown;
pub mod energy;
mod error;
pub mod geometry;
mod hp;
pub mod kernels;
mod math;
pub mod nodal;
pub mod special;
pub mod sums;

pub use error::{Error, Result};
pub use geometry::{Point3, SectorConfig};
