//! Discrete system-clock history states and their entanglement.
//!
//! A history state is a joint pure state `(1/sqrt(N)) Σ_t |S_t⟩|t⟩` of a
//! system `S` and a finite `N`-dimensional clock register `T`, encoding an
//! entire discrete unitary evolution in a single static vector. This crate
//! builds such states from evolution specifications, analyzes their
//! system-time entanglement (von Neumann, conjugate and quadratic entropies,
//! with closed forms and strict bounds for constant Hamiltonians), mirrors
//! the analysis for the generating control unitaries (operator history
//! states, entangling power), and simulates the clock-measurement protocols
//! that recover state overlaps and operator traces.
//!
//! Modules:
//! - [`linalg`] — self-contained dense complex kernel (tensor products, DFT,
//!   Schmidt/SVD via Jacobi, partial trace, Hermitian matrix exponential,
//!   Haar sampling).
//! - [`history`] — history-state construction, the global step unitary and
//!   its eigenvalue condition, the special clock basis and the conjugate
//!   representation.
//! - [`entanglement`] — entropies, the analytic quadratic entropy for
//!   constant Hamiltonians, upper/lower bounds, geodesic evolutions and the
//!   curvature gap.
//! - [`opstates`] — operator pure states, Weyl bases, operator Schmidt
//!   decomposition, operator history states and entangling power.
//! - [`measurement`] — clock pair observables, shot-noise sampling, the
//!   maximally-mixed overlap protocol and the DQC1 special case.

pub mod entanglement;
pub mod error;
pub mod history;
pub mod linalg;
pub mod measurement;
pub mod opstates;

pub use error::{Error, Result};
pub use linalg::{Complex64, ComplexMatrix, SchmidtDecomposition, StateVector};
