//! Candidate Λ(p) frequency sets on curved manifolds, and the numerics to
//! probe them: exact even-exponent norms, quadrature and Monte-Carlo L^p
//! estimates, K_p lower-bound probes, random selector experiments and
//! scaling diagnostics.
//!
//! The central object is a [`FrequencySet`]: lattice samples
//! `s = (n, R * pi(n/R))` of a graph manifold at scale `R`. All norms are
//! averages of `|sum a_s e((s/R) . x)|^p` over the cube `[0, R]^d`, which by
//! rescaling equals the unit-cube average of the system with frequencies
//! `s`; that normalization makes the l^2 norm of the coefficients the exact
//! reference point for square-root cancellation.

pub mod construct;
pub mod diagnose;
pub mod error;
pub mod expsum;
pub mod io;
pub mod kp;
pub mod manifolds;
pub mod report;
pub mod rng;
pub mod select;

pub use error::{Error, Result};
pub use expsum::{Coefficients, NormConfig, NormMethod, NormReport};
pub use kp::{KpProbeReport, Normalization, Probe};
pub use manifolds::{
    cap_partition, dyadic_cover, enclosing_box, BoundingBox, Cap, CapPartition, DyadicCover,
    FreqPoint, FrequencySet, ManifoldKind, ManifoldSpec, Provenance,
};
pub use select::SelectionPlan;
