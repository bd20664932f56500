//! Analytic discs attached to generic CR manifolds.
//!
//! The crate solves Bishop's equation for discs attached to graphed generic
//! manifolds `M = {y = h(w, x)}` in C^n, computes their defect through a
//! matrix Riemann–Hilbert factorization, builds the normal deformation
//! families used to sweep out wedges, and runs holomorphic extension
//! experiments on top of them.
//!
//! Each capability has a runnable example under `examples/`:
//!
//! | example | module |
//! |---|---|
//! | `hilbert` | [`circle`] |
//! | `manifolds` | [`manifold`] |
//! | `bishop_disc` | [`bishop`] |
//! | `good_disc` | [`bishop::find_good_disc`] |
//! | `defect` | [`defect`] |
//! | `deform_rank` | [`deform`] |
//! | `wedge` | [`deform::sample_wedge`] |
//! | `continuity` | [`extend::continuity`] |
//! | `isotopy` | [`extend::isotopy`] |
//! | `gauss_approx` | [`extend::approx`] |
//! | `removability` | [`extend::removability`] |
//!
//! The `crdisc` binary wraps the same pipelines behind config files.

pub mod bishop;
pub mod circle;
pub mod cli;
pub mod defect;
pub mod deform;
pub mod error;
pub mod extend;
pub mod holo;
pub mod linalg;
pub mod manifold;
pub mod poly;
pub mod scenario;

pub use circle::{CircleFunction, CircleGrid, CircleMatrix, FourierCoefficients};
pub use error::{Error, Result};
pub use manifold::{GenericManifold, Submanifold};
pub use num_complex::Complex64;
