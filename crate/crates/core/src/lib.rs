//! Simulation toolkit for driven two-level quantum systems.
//!
//! - [`algebra`]: exact 2×2 complex algebra, states, closed-form eigensystems.
//! - [`hamiltonians`]: static double well and the drive families, crossings.
//! - [`propagation`]: fixed-step RK4 for Schrödinger and master equations.
//! - [`landau_zener`]: closed forms, the branch-point loop integral, sweep experiment.
//! - [`nonsecular`]: vibron experiments, the GKSL dissipator, flux amplification.
//! - [`io`] and [`cli`]: experiment configuration, CSV/JSON output, command line.
//!
//! Units are natural (ħ = 1) throughout.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod error;
pub mod hamiltonians;
pub mod io;
pub mod landau_zener;
pub mod nonsecular;
pub mod propagation;

pub use algebra::{
    eigen_hermitian, matrix_exponential_propagator, static_transition_probability, Complex2Matrix,
    DensityMatrix, EigenPair2, PureState,
};
pub use error::{Error, Result};
pub use hamiltonians::{CrossingEvent, DriveModel, Hamiltonian, TwoLevelStatic};
pub use landau_zener::{
    contour_integral, lz_pass_probability, lz_probability, run_lz_experiment, LZResult,
};
pub use nonsecular::{
    dissipator_apply, extract_effective_s, first_pass_transition, resonance_scan,
    run_master_experiment, run_vibron_experiment, DissipatorParams, EffectiveModel, ScanResult,
};
pub use propagation::{
    propagate_master, propagate_schrodinger, Method, PropagatorConfig, TrajectoryRecord,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
