//! Computational kernels for studying determinism against the Born rule.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers:
//!
//! * [`sequence`]: finite symbol strings, reference generators and
//!   prefix-consistent sequence sources.
//! * [`born`]: spectral decomposition of finite Hermitian observables, Born
//!   measures, joint and product measures and seeded sampling.
//! * [`randomness`]: a toy prefix-free machine, Kolmogorov complexity bounds,
//!   halting-probability lower bounds and frequency test batteries.
//! * [`hv`]: hidden-variable models realised as `x = g(h(n))` and the two
//!   sampling scenarios.
//! * [`bell`]: the bipartite experiment, local bounds and independence checks.
//! * [`ks`]: rays in R³ and 101-colouring search.
//!
//! The companion `indlab` crate adds file formats, OS entropy and the CLI.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bell;
pub mod born;
pub mod error;
pub mod hv;
pub mod ks;
pub mod randomness;
pub mod rng;
pub mod sequence;

pub use error::{Error, Result};
pub use sequence::SymbolString;
