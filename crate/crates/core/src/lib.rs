//! Composite parameterization of the unitary group U(d).
//!
//! Unitaries are built from a d×d matrix of angles as a product of two-level
//! rotation/phase factors and diagonal phases. The same construction yields
//! redundancy-free parameterizations of rank-k density matrices
//! (`2dk − k² − 1` real parameters) and of k-dimensional subspaces
//! (`2k(d − k)` parameters), which in turn shrink the search spaces of
//! m-concurrence lower-bound optimization and distillability tests.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, subsystem ops.
//! - [`composite`]: parameter matrices, unitary construction and decomposition.
//! - [`states`]: simplex weights, rank-k density matrices, subspace bases.
//! - [`entanglement`]: m-concurrence bounds, objectives, PPT, bipartitions.
//! - [`optimize`]: Nelder-Mead with seeded random restarts.
//! - [`scan`]: the qutrit mixture scan and distillability verdicts.

pub mod composite;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod scan;
pub mod states;

pub use composite::{
    apply_factor, build_ucd, build_ucs, build_unitary, decompose, projector, sigma, FactorSide, ParamMatrix, Unitary,
};
pub use entanglement::{
    bopt_objective, bound_b, bound_b_plain, bound_x, distill_objective, enumerate_bipartitions, multipartite_bound_b,
    n_copy_state, ppt_min_eigenvalue, Bipartition, BoundReport, BoundTerm,
};
pub use error::{Error, Result};
pub use linalg::{herm_eig, kron, partial_trace, partial_transpose, psd_sqrt, ComplexMatrix, HermitianEig, C64};
pub use optimize::{minimize, OptimizerConfig, OptimizerResult};
pub use scan::{distill_verdict, fig1_scan, optimize_bound, DistillVerdict, ScanRow};
pub use states::{DensityMatrix, StateVector};
