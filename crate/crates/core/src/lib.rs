//! Rotationally symmetric List flow (Ricci flow coupled to a scalar field)
//! on asymptotically flat `R^n`, evolved in the area-radius gauge where the
//! metric is `f^2(t,r) dr^2 + r^2 dOmega^2` and the scalar field enters only
//! through `z = (1/f) du/dr`.
//!
//! The crate is organised around the pipeline of a single flow experiment:
//!
//! * [`grid`] — radial discretisation and second-order difference operators
//!   with parity closure at the origin,
//! * [`state`] — flow parameters, the dynamical state `(f, z)`, initial-data
//!   families and asymptotic-decay validation,
//! * [`dynamics`] — right-hand sides, CFL-limited explicit stepping and
//!   trajectory evolution with observer callbacks,
//! * [`geometry`] — sectional curvatures, scalar curvature, quasi-local
//!   masses and an ADM tail estimate,
//! * [`monitors`] — a-priori bound constants computed from initial data and
//!   signed runtime margins certifying each bound,
//! * [`singularity`] — essential blow-up sequence extraction and parabolic
//!   rescaling of snapshots.
//!
//! Everything here is pure computation on `f64` arrays; file formats and the
//! command-line driver live in the companion `listflow-cli` crate. The crate
//! is `no_std`-compatible (with `alloc`) when built with the `libm` feature
//! instead of the default `std`.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("listflow-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod dynamics;
pub mod geometry;
pub mod grid;
pub mod monitors;
pub mod singularity;
pub mod state;

mod fit;
mod interp;
mod math;

pub use dynamics::{
    evolve, cfl_dt, rhs, step, step_with_dt, DynamicsError, EvolveOptions, FieldId,
    HistorySample, ObserverSignal, RhsPair, SampleInfo, StepOutcome, Termination,
    TrajectorySummary,
};
pub use geometry::{
    bianchi_residual, curvature, deturck_gradient, masses, riem_sup, CurvatureProfile,
    GeometryError, MassProfile,
};
pub use grid::{GridError, GridSpacing, Parity, RadialGrid};
pub use monitors::{
    audit, compute_constants, hessian_profile, y_profile, zeta_profile, BoundConstants,
    DiagnosticsRecord, MonitorError,
};
pub use singularity::{
    rescale, track_blowup, BlowUpPoint, BlowUpRecord, RescaledProfile, SingularityError,
};
pub use state::{
    make_initial_data, reconstruct_u, validate_asymptotics, DecayFit, DecayReport,
    FlowParameters, FlowState, InitialDataSpec, StateError,
};
