//! Information capacity of multimode lossy bosonic channels.
//!
//! A sender drives a set of bosonic modes through a channel that transmits a
//! fraction `eta_k` of the photons in mode `k`, subject to a total energy (or
//! average power) budget. This crate computes the optimal photon-number
//! allocation over the modes and the resulting communication rate for three
//! detection strategies: joint quantum measurement (Holevo limit), heterodyne,
//! and homodyne.
//!
//! Organization:
//!
//! - [`numerics`]: root bracketing/solving and adaptive quadrature
//! - [`kernels`]: per-mode rate functions (thermal entropy `g`, Shannon terms)
//! - [`channel`]: channel descriptions — mode grids, loss profiles, budgets
//! - [`allocator`]: constrained allocation over discrete mode sets
//! - [`closedform`]: narrowband, flat-broadband and far-field limits
//!
//! The numerical-allocation path and the closed-form path are independent
//! routes to the same quantities; the test suite leans on that redundancy.

// Validation sites negate comparisons (`!(x > 0.0)`) on purpose: that is what
// makes NaN fail closed. Reference constants keep every digit their
// high-precision derivations produced, beyond what f64 stores.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod allocator;
pub mod channel;
pub mod closedform;
pub mod kernels;
pub mod numerics;

pub use allocator::{oracle_grid_search, solve_beta, solve_flat_broadband, AllocError, Allocation};
pub use channel::{
    ChannelError, ChannelModel, FarFieldGeometry, ModeGrid, ModeSpec, Profile, ResourceBudget,
    HBAR, SPEED_OF_LIGHT,
};
pub use closedform::{
    farfield_capacity, flat_broadband_capacity, flat_broadband_rate_si, narrowband_capacity,
    power_ratio_of_y0, spectrum, FarFieldSolution,
};
pub use kernels::{g, g_inverse, thermal_occupation, DetectionKind};
pub use numerics::{NumericsError, Tolerance};
