//! Numerical toolkit for double sine series
//! `Σ c_jk sin(jx) sin(ky)` with general monotone coefficients.
//!
//! The crate evaluates class memberships of coefficient sequences, the
//! summation-by-parts machinery behind the convergence proofs, and
//! finite-horizon probes of uniform and regular convergence.

pub mod convergence;
pub mod differences;
pub mod error;
pub mod identities;
pub mod kernels;
pub mod majorants;
pub mod membership;
pub mod report;
pub mod sequences;
pub mod summation;

pub use num_complex::Complex64;

pub use differences::DiffOrder;
pub use error::{Error, Result};
pub use kernels::{KernelPoint, Rect};
pub use majorants::{Axis, Family, IndexMap, MajorantFamily, MajorantValue, Truncation};
pub use membership::{MembershipReport, SingleClass, Verdict};
pub use sequences::{CoefficientSequence, DecayHint, Preset, SingleSequence};
