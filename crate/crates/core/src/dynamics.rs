//! Right-hand sides of the rotationally symmetric flow equations, stability-
//! limited explicit stepping, and trajectory evolution with observers.
//!
//! The evolved system is
//!
//! ```text
//! f_t = f_rr / f^2 - 2 f_r^2 / f^3 + ((n-2)/r - 1/(r f^2)) f_r
//!       - (n-2)(f^2 - 1)/(r^2 f) + k^2 f z^2
//! z_t = z_rr / f^2 + (1/(r f^2) + (n-2)/r) z_r
//!       - ((n-1)/(r^2 f^2) + k^2 z^2) z
//! ```
//!
//! with exact Dirichlet data `f(t,0) = 1`, `z(t,0) = 0` at the origin (the
//! analytic right-hand sides vanish there for regular even/odd data) and
//! `f = f_infinity`, `z = 0` at `r_max`. Coefficients like `(n-1) z /
//! (r^2 f^2)` are evaluated directly off the origin node; oddness of `z`
//! keeps them finite. Time stepping is classical four-stage Runge-Kutta with
//! a diffusion- and drift-limited step; an IMEX stepper is the natural
//! extension point if the `dt ~ h^2` cost ever bites.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry;
use crate::state::{FlowParameters, FlowState, StateError};

/// Evolution stencils are upgraded to fourth order inside this fraction of
/// `r_max`. The second-order truncation does not vanish at the origin, and
/// with `f(t,0)` pinned the solution error picks up an `r^2 log r` component
/// whose `(2/r)`-weighted diagnostics (the Bianchi residual) would then be
/// first order near the axis; refining a fixed physical neighbourhood of the
/// axis removes that while the bulk keeps the plain second-order scheme.
const AXIS_REFINE_FRACTION: f64 = 0.125;

/// Which evolved field a failure was detected in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldId {
    F,
    Z,
}

impl fmt::Display for FieldId {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldId::F => write!(fmt, "f"),
            FieldId::Z => write!(fmt, "z"),
        }
    }
}

/// Nodal time derivatives of `(f, z)`. Dirichlet nodes carry zeros.
#[derive(Debug, Clone)]
pub struct RhsPair {
    pub df_dt: Vec<f64>,
    pub dz_dt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    /// NaN or infinity in a stencil input or output.
    NonFinite { node: usize, field: FieldId },
    State(StateError),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::NonFinite { node, field } => {
                write!(f, "non-finite {field} value at node {node}")
            }
            DynamicsError::State(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<StateError> for DynamicsError {
    fn from(e: StateError) -> Self {
        DynamicsError::State(e)
    }
}

/// Second-order spatial discretisation of the flow equations.
///
/// Returns the earliest non-finite input or output as an error.
pub fn rhs(state: &FlowState, params: &FlowParameters) -> Result<RhsPair, DynamicsError> {
    let grid = state.grid();
    let nodes = grid.nodes();
    let n_last = nodes.len() - 1;

    for i in 0..=n_last {
        if !state.f[i].is_finite() {
            return Err(DynamicsError::NonFinite { node: i, field: FieldId::F });
        }
        if !state.z[i].is_finite() {
            return Err(DynamicsError::NonFinite { node: i, field: FieldId::Z });
        }
    }

    use crate::grid::Parity;

    let mut d1f = grid.d1(&state.f, Parity::Even).expect("state matches grid");
    let mut d2f = grid.d2(&state.f, Parity::Even).expect("state matches grid");
    let mut d2z = grid.d2(&state.z, Parity::Odd).expect("state matches grid");

    // The z equation is discretised through zeta = z/r (even and smooth):
    //   z_t = z_rr / f^2 + (1/f^2 + n - 2) zeta_r
    //         + (n-2) r lambda_2 zeta - k^2 z^3,
    // identical to the raw form but without the 1/r-weighted differences,
    // which cost an order of accuracy next to the origin.
    let mut zeta = Vec::with_capacity(n_last + 1);
    zeta.push(grid.odd_d1_origin_value(&state.z));
    for i in 1..=n_last {
        zeta.push(state.z[i] / nodes[i]);
    }
    let mut d1zeta = grid.d1(&zeta, Parity::Even).expect("state matches grid");

    // Fourth-order stencils on the fixed axis neighbourhood.
    let r_cut = AXIS_REFINE_FRACTION * grid.r_max();
    let cut = nodes.partition_point(|&r| r < r_cut).min(n_last);
    for i in 1..cut {
        d1f[i] = grid.d1_refined_at(&state.f, Parity::Even, i);
        d2f[i] = grid.d2_refined_at(&state.f, Parity::Even, i);
        d2z[i] = grid.d2_refined_at(&state.z, Parity::Odd, i);
        d1zeta[i] = grid.d1_refined_at(&zeta, Parity::Even, i);
    }

    let nm2 = params.nf() - 2.0;
    let k2 = params.coupling * params.coupling;

    let mut df = vec![0.0; n_last + 1];
    let mut dz = vec![0.0; n_last + 1];
    for i in 1..n_last {
        let r = nodes[i];
        let f = state.f[i];
        let z = state.z[i];
        let f2 = f * f;
        let fr = d1f[i];
        df[i] = d2f[i] / f2 - 2.0 * fr * fr / (f2 * f)
            + (nm2 / r - 1.0 / (r * f2)) * fr
            - nm2 * (f2 - 1.0) / (r * r * f)
            + k2 * f * z * z;
        // (n-2) r lambda_2 zeta with lambda_2 = (1 - 1/f^2)/r^2
        let drift_tail = nm2 * (f2 - 1.0) / (f2 * r) * zeta[i];
        dz[i] = d2z[i] / f2 + (1.0 / f2 + nm2) * d1zeta[i] + drift_tail - k2 * z * z * z;
    }

    for i in 0..=n_last {
        if !df[i].is_finite() {
            return Err(DynamicsError::NonFinite { node: i, field: FieldId::F });
        }
        if !dz[i].is_finite() {
            return Err(DynamicsError::NonFinite { node: i, field: FieldId::Z });
        }
    }
    Ok(RhsPair { df_dt: df, dz_dt: dz })
}

/// Stability-limited step: the diffusion bound `f^2 dr^2 / 2` and the drift
/// bound `dr / |coefficient|`, both scaled by `cfl_safety` and minimised
/// over the interior.
pub fn cfl_dt(state: &FlowState, params: &FlowParameters) -> f64 {
    let grid = state.grid();
    let nodes = grid.nodes();
    let nm2 = params.nf() - 2.0;
    let mut dt = f64::INFINITY;
    for i in 1..nodes.len() - 1 {
        let r = nodes[i];
        let f = state.f[i];
        let f2 = f * f;
        let spacing = grid.local_spacing(i);
        let diffusive = f2 * spacing * spacing / 2.0;
        let drift_f = crate::math::abs(nm2 / r - 1.0 / (r * f2));
        let drift_z = crate::math::abs(1.0 / (r * f2) + nm2 / r);
        let drift = drift_f.max(drift_z);
        let advective = if drift > 0.0 { spacing / drift } else { f64::INFINITY };
        dt = dt.min(diffusive).min(advective);
    }
    params.cfl_safety * dt
}

/// Result of one attempted time step.
#[derive(Debug, Clone)]
pub enum StepOutcome {
    /// Step accepted; the new state satisfies the flow-state invariants.
    Advanced { state: FlowState, dt: f64 },
    /// The stability limit fell below the configured floor.
    CflCollapse { dt: f64 },
    /// NaN, infinity, or a nonpositive metric factor appeared.
    NonFinite { node: usize, field: FieldId },
    /// `f` exceeded `f_cap`: mean curvature of that sphere is collapsing to
    /// zero, the signature of a forming minimal hypersphere.
    MinimalSphereSignal { node: usize },
}

/// One classical Runge-Kutta step of the CFL-limited size.
pub fn step(state: &FlowState, params: &FlowParameters) -> StepOutcome {
    let dt = cfl_dt(state, params);
    if !dt.is_finite() || dt < params.dt_floor {
        return StepOutcome::CflCollapse { dt };
    }
    step_with_dt(state, params, dt)
}

/// One classical Runge-Kutta step of a caller-chosen size (used by
/// [`evolve`] to land exactly on output times and on `t_end`).
pub fn step_with_dt(state: &FlowState, params: &FlowParameters, dt: f64) -> StepOutcome {
    let stage = |k: &RhsPair, a: f64| -> FlowState {
        let n = state.f.len();
        let mut f = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            f.push(state.f[i] + a * k.df_dt[i]);
            z.push(state.z[i] + a * k.dz_dt[i]);
        }
        FlowState::from_parts_unchecked(state.t, f, z, state.grid_handle())
    };

    macro_rules! try_rhs {
        ($s:expr) => {
            match rhs($s, params) {
                Ok(k) => k,
                Err(DynamicsError::NonFinite { node, field }) => {
                    return StepOutcome::NonFinite { node, field }
                }
                Err(DynamicsError::State(_)) => unreachable!("rhs only fails on non-finite data"),
            }
        };
    }

    let k1 = try_rhs!(state);
    let s2 = stage(&k1, 0.5 * dt);
    let k2 = try_rhs!(&s2);
    let s3 = stage(&k2, 0.5 * dt);
    let k3 = try_rhs!(&s3);
    let s4 = stage(&k3, dt);
    let k4 = try_rhs!(&s4);

    let n = state.f.len();
    let mut f = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let w = dt / 6.0;
    for i in 0..n {
        f.push(state.f[i] + w * (k1.df_dt[i] + 2.0 * k2.df_dt[i] + 2.0 * k3.df_dt[i] + k4.df_dt[i]));
        z.push(state.z[i] + w * (k1.dz_dt[i] + 2.0 * k2.dz_dt[i] + 2.0 * k3.dz_dt[i] + k4.dz_dt[i]));
    }

    // Re-pin the Dirichlet data exactly.
    f[0] = 1.0;
    z[0] = 0.0;
    let last = n - 1;
    if params.robin_outer {
        // Robin closure matching the order-one tails: (w - w_inf)' = -(w - w_inf)/r
        // and z' = -2 z / r, discretised one-sided.
        let nodes = state.grid().nodes();
        let h = nodes[last] - nodes[last - 1];
        let r = nodes[last];
        let w_inf = params.f_infinity * params.f_infinity - 1.0;
        let dw = (f[last - 1] * f[last - 1] - 1.0 - w_inf) * r / (r + h);
        let w_val = w_inf + dw;
        f[last] = if w_val > -1.0 { crate::math::sqrt(1.0 + w_val) } else { f[last] };
        z[last] = z[last - 1] * r / (r + 2.0 * h);
    } else {
        f[last] = params.f_infinity;
        z[last] = 0.0;
    }

    for i in 0..n {
        if !f[i].is_finite() {
            return StepOutcome::NonFinite { node: i, field: FieldId::F };
        }
        if !z[i].is_finite() {
            return StepOutcome::NonFinite { node: i, field: FieldId::Z };
        }
        if f[i] <= 0.0 {
            return StepOutcome::NonFinite { node: i, field: FieldId::F };
        }
        if f[i] >= params.f_cap {
            return StepOutcome::MinimalSphereSignal { node: i };
        }
    }

    StepOutcome::Advanced {
        state: FlowState::from_parts_unchecked(state.t + dt, f, z, state.grid_handle()),
        dt,
    }
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Reached `t_end`.
    Completed,
    MinimalSphere { node: usize },
    NonFinite { node: usize, field: FieldId },
    CflCollapse { dt: f64 },
    /// An observer callback requested the stop.
    HaltedByObserver,
    /// The step budget of [`EvolveOptions::max_steps`] ran out.
    MaxSteps,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::MinimalSphere { node } => {
                write!(f, "minimal-sphere signal at node {node}")
            }
            Termination::NonFinite { node, field } => {
                write!(f, "non-finite {field} at node {node}")
            }
            Termination::CflCollapse { dt } => write!(f, "CFL collapse (dt = {dt:e})"),
            Termination::HaltedByObserver => write!(f, "halted by observer"),
            Termination::MaxSteps => write!(f, "step budget exhausted"),
        }
    }
}

/// Per-step record used by the blow-up scan: time, `sup_r |Riem|`, and the
/// attaining node. O(steps) memory, not O(steps x nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistorySample {
    pub t: f64,
    pub sup_riem: f64,
    pub node: usize,
}

/// Observer cadence and bookkeeping knobs for [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Observer cadence in flow time; the stepper lands on multiples of this
    /// exactly, so output rows are comparable across resolutions.
    /// Non-positive means observers fire only at the start and the end.
    pub sample_dt: f64,
    /// Record the per-step `(t, sup |Riem|, argmax)` history.
    pub record_history: bool,
    /// Optional hard cap on accepted steps.
    pub max_steps: Option<u64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            sample_dt: 0.0,
            record_history: true,
            max_steps: None,
        }
    }
}

/// What an observer callback tells the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserverSignal {
    Continue,
    Halt,
}

/// Step statistics handed to observers together with the state.
#[derive(Debug, Clone, Copy)]
pub struct SampleInfo {
    /// Accepted steps so far.
    pub step: u64,
    /// Size of the step that produced this state (zero for the initial call).
    pub dt: f64,
}

/// Trajectory result: final state, why it stopped, and step statistics.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub final_state: FlowState,
    pub termination: Termination,
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub history: Vec<HistorySample>,
}

/// Evolves a state to `params.t_end`, invoking the observer at the configured
/// cadence (and always at the first and last state). Gauge values are
/// re-pinned after every step; the per-step curvature history feeds the
/// blow-up scan.
pub fn evolve<F>(
    initial: FlowState,
    params: &FlowParameters,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<TrajectorySummary, StateError>
where
    F: FnMut(&FlowState, &SampleInfo) -> ObserverSignal,
{
    params.validate()?;
    initial.validate(params.f_cap)?;

    let t0 = initial.t;
    let t_end = params.t_end;
    let eps = 1e-12 * t_end.abs().max(1.0);
    let sampling = opts.sample_dt > 0.0;
    let mark_tol = if sampling { 1e-9 * opts.sample_dt } else { 0.0 };

    let mut state = initial;
    let mut steps: u64 = 0;
    let mut dt_min = f64::INFINITY;
    let mut dt_max: f64 = 0.0;
    let mut history = Vec::new();
    let mut termination;

    if opts.record_history {
        let (sup, node) = geometry::riem_sup(&state, params);
        history.push(HistorySample { t: state.t, sup_riem: sup, node });
    }

    let mut last_observed_t = state.t;
    if observer(&state, &SampleInfo { step: 0, dt: 0.0 }) == ObserverSignal::Halt {
        return Ok(TrajectorySummary {
            final_state: state,
            termination: Termination::HaltedByObserver,
            steps,
            dt_min,
            dt_max,
            history,
        });
    }

    let mut mark_index: u64 = 1;
    loop {
        if state.t >= t_end - eps {
            termination = Termination::Completed;
            break;
        }
        if let Some(max) = opts.max_steps {
            if steps >= max {
                termination = Termination::MaxSteps;
                break;
            }
        }

        let dt_cfl = cfl_dt(&state, params);
        if !dt_cfl.is_finite() || dt_cfl < params.dt_floor {
            termination = Termination::CflCollapse { dt: dt_cfl };
            break;
        }

        let mut dt = dt_cfl;
        let mut emit = false;
        if state.t + dt >= t_end {
            dt = t_end - state.t;
            emit = true;
        }
        if sampling {
            while t0 + mark_index as f64 * opts.sample_dt <= state.t + mark_tol {
                mark_index += 1;
            }
            let mark = t0 + mark_index as f64 * opts.sample_dt;
            if mark <= state.t + dt + mark_tol && mark < t_end - eps {
                dt = mark - state.t;
                emit = true;
                mark_index += 1;
            }
        }

        let step_dt;
        match step_with_dt(&state, params, dt) {
            StepOutcome::Advanced { state: next, dt } => {
                state = next;
                steps += 1;
                step_dt = dt;
                dt_min = dt_min.min(dt);
                dt_max = dt_max.max(dt);
                if opts.record_history {
                    let (sup, node) = geometry::riem_sup(&state, params);
                    history.push(HistorySample { t: state.t, sup_riem: sup, node });
                }
            }
            StepOutcome::CflCollapse { dt } => {
                termination = Termination::CflCollapse { dt };
                break;
            }
            StepOutcome::NonFinite { node, field } => {
                termination = Termination::NonFinite { node, field };
                break;
            }
            StepOutcome::MinimalSphereSignal { node } => {
                termination = Termination::MinimalSphere { node };
                break;
            }
        }

        if emit {
            last_observed_t = state.t;
            if observer(&state, &SampleInfo { step: steps, dt: step_dt }) == ObserverSignal::Halt {
                termination = Termination::HaltedByObserver;
                break;
            }
        }
    }

    if state.t != last_observed_t
        && observer(&state, &SampleInfo { step: steps, dt: 0.0 }) == ObserverSignal::Halt
        && termination == Termination::Completed
    {
        termination = Termination::HaltedByObserver;
    }

    Ok(TrajectorySummary {
        final_state: state,
        termination,
        steps,
        dt_min,
        dt_max,
        history,
    })
}
