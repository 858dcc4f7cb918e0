//! Flow parameters, the dynamical state `(t, f, z)`, built-in initial-data
//! families, asymptotic-decay validation and reconstruction of the scalar
//! field `u` from `z`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{GridError, RadialGrid};
use crate::interp::{monotone_cubic_resample, InterpError};
use crate::{fit, math};

/// Tolerance for the origin values of tabulated data before they are pinned
/// to the exact gauge conditions `f(0) = 1`, `z(0) = 0`.
const ORIGIN_TOL: f64 = 1e-6;

/// Tail values below this are treated as identically zero by the decay fits.
const DECAY_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum StateError {
    InvalidParameters(&'static str),
    InvalidInitialData(&'static str),
    /// `f <= 0` somewhere: the coordinate system is invalid.
    NonPositiveMetric { node: usize },
    /// `f` exceeds the configured cap, the signature of a minimal
    /// hypersphere in this gauge.
    MetricCapExceeded { node: usize },
    NonFinite { node: usize },
    /// `f(0) != 1` or `z(0) != 0` beyond tolerance.
    OriginMismatch,
    /// Fewer tail nodes than the fit needs.
    TailTooShort { have: usize, need: usize },
    Tabulated(&'static str),
    Grid(GridError),
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::InvalidParameters(msg) => write!(f, "invalid parameters: {msg}"),
            StateError::InvalidInitialData(msg) => write!(f, "invalid initial data: {msg}"),
            StateError::NonPositiveMetric { node } => {
                write!(f, "metric factor f <= 0 at node {node}")
            }
            StateError::MetricCapExceeded { node } => write!(
                f,
                "metric factor exceeds the minimal-sphere cap at node {node}"
            ),
            StateError::NonFinite { node } => write!(f, "non-finite value at node {node}"),
            StateError::OriginMismatch => {
                write!(f, "state does not satisfy f(0) = 1, z(0) = 0")
            }
            StateError::TailTooShort { have, need } => {
                write!(f, "tail has {have} nodes but the fit needs {need}")
            }
            StateError::Tabulated(msg) => write!(f, "tabulated data: {msg}"),
            StateError::Grid(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StateError {}

impl From<GridError> for StateError {
    fn from(e: GridError) -> Self {
        StateError::Grid(e)
    }
}

impl From<InterpError> for StateError {
    fn from(e: InterpError) -> Self {
        match e {
            InterpError::TooFewSamples => StateError::Tabulated("fewer than two samples"),
            InterpError::NonMonotonicAbscissae => {
                StateError::Tabulated("radii must increase strictly")
            }
            InterpError::OutOfRange => StateError::Tabulated("samples do not cover the grid"),
        }
    }
}

/// Physical and stepping parameters of a flow run.
#[derive(Debug, Clone)]
pub struct FlowParameters {
    /// Spatial dimension `n >= 2`.
    pub dimension: u32,
    /// Coupling constant of the scalar field (`k_n > 0`).
    pub coupling: f64,
    /// Asymptotic metric factor. Meaningful only for `n = 2`, where the end
    /// is a flat cone with `f_infinity = sqrt(1 + a)`; must be 1 for `n >= 3`.
    pub f_infinity: f64,
    /// Safety factor applied to the stability-limited time step, in `(0, 1]`.
    pub cfl_safety: f64,
    /// Flow time at which evolution stops.
    pub t_end: f64,
    /// Steps smaller than this abort the run as a CFL collapse.
    pub dt_floor: f64,
    /// Cap on `f`; exceeding it signals a forming minimal hypersphere.
    pub f_cap: f64,
    /// Replace the outer Dirichlet condition by a Robin closure matching the
    /// order-one decay of asymptotically flat data.
    pub robin_outer: bool,
    /// Fractional slack accepted by the decay validator.
    pub decay_slack: f64,
    /// Constant hypothesis bound on `z / r` for `n >= 3` runs; reported by
    /// the monitors, never enforced. Infinite means "no hypothesis".
    pub zeta_hypothesis: f64,
}

impl FlowParameters {
    pub fn new(dimension: u32, coupling: f64) -> Self {
        FlowParameters {
            dimension,
            coupling,
            f_infinity: 1.0,
            cfl_safety: 0.4,
            t_end: 1.0,
            dt_floor: 1e-13,
            f_cap: 1e6,
            robin_outer: false,
            decay_slack: 0.3,
            zeta_hypothesis: f64::INFINITY,
        }
    }

    /// The coupling for which fixed points are exactly the static vacuum
    /// metrics: `sqrt((n - 1) / (n - 2))`. Undefined for `n = 2`.
    pub fn static_vacuum_coupling(dimension: u32) -> Option<f64> {
        if dimension >= 3 {
            Some(math::sqrt((dimension as f64 - 1.0) / (dimension as f64 - 2.0)))
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if self.dimension < 2 {
            return Err(StateError::InvalidParameters("dimension must be >= 2"));
        }
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return Err(StateError::InvalidParameters("coupling must be positive"));
        }
        if self.dimension == 2 {
            if !(self.f_infinity > 0.0) || !self.f_infinity.is_finite() {
                return Err(StateError::InvalidParameters(
                    "f_infinity must be positive for n = 2",
                ));
            }
        } else if self.f_infinity != 1.0 {
            return Err(StateError::InvalidParameters(
                "f_infinity must be 1 for n >= 3",
            ));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(StateError::InvalidParameters("cfl_safety must be in (0, 1]"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(StateError::InvalidParameters("t_end must be nonnegative"));
        }
        if !(self.dt_floor > 0.0) {
            return Err(StateError::InvalidParameters("dt_floor must be positive"));
        }
        if !(self.f_cap > 1.0) {
            return Err(StateError::InvalidParameters("f_cap must exceed 1"));
        }
        if !(0.0..1.0).contains(&self.decay_slack) {
            return Err(StateError::InvalidParameters("decay_slack must be in [0, 1)"));
        }
        if !(self.zeta_hypothesis > 0.0) {
            return Err(StateError::InvalidParameters(
                "zeta_hypothesis must be positive",
            ));
        }
        Ok(())
    }

    pub(crate) fn nf(&self) -> f64 {
        self.dimension as f64
    }
}

/// The dynamical state: flow time plus the nodal profiles of the metric
/// factor `f = sqrt(g_rr)` (even) and `z = (1/f) du/dr` (odd).
///
/// A value type: cloning is cheap relative to a time step and states can be
/// sent freely between threads.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub f: Vec<f64>,
    pub z: Vec<f64>,
    grid: Arc<RadialGrid>,
}

impl FlowState {
    /// Builds a state and checks every invariant (lengths, finiteness,
    /// `f > 0`, exact origin pins).
    pub fn new(t: f64, f: Vec<f64>, z: Vec<f64>, grid: Arc<RadialGrid>) -> Result<Self, StateError> {
        let state = FlowState { t, f, z, grid };
        state.validate(f64::INFINITY)?;
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(
        t: f64,
        f: Vec<f64>,
        z: Vec<f64>,
        grid: Arc<RadialGrid>,
    ) -> Self {
        FlowState { t, f, z, grid }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_handle(&self) -> Arc<RadialGrid> {
        Arc::clone(&self.grid)
    }

    /// Checks the state invariants; `f_cap` bounds the metric factor
    /// (pass `f64::INFINITY` to skip the cap).
    pub fn validate(&self, f_cap: f64) -> Result<(), StateError> {
        let n = self.grid.node_count();
        if self.f.len() != n || self.z.len() != n {
            return Err(StateError::Grid(GridError::LengthMismatch {
                expected: n,
                got: if self.f.len() != n { self.f.len() } else { self.z.len() },
            }));
        }
        if !self.t.is_finite() {
            return Err(StateError::NonFinite { node: 0 });
        }
        for i in 0..n {
            if !self.f[i].is_finite() || !self.z[i].is_finite() {
                return Err(StateError::NonFinite { node: i });
            }
            if self.f[i] <= 0.0 {
                return Err(StateError::NonPositiveMetric { node: i });
            }
            if self.f[i] >= f_cap {
                return Err(StateError::MetricCapExceeded { node: i });
            }
        }
        if self.f[0] != 1.0 || self.z[0] != 0.0 {
            return Err(StateError::OriginMismatch);
        }
        Ok(())
    }
}

/// Built-in initial-data families.
///
/// For `n = 2` every family sits on top of the smooth cone cap
/// `f^2 = 1 + (f_infinity^2 - 1) r^2 / (1 + r^2)`; for `n >= 3` the base
/// profile is `f = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDataSpec {
    /// The base profile alone, `z = 0`.
    Flat,
    /// `f = base + A r^2 / (1 + r^2)^{3/2}`: order `r^2` at the origin and
    /// order `1/r` at infinity.
    MetricBump { amplitude: f64 },
    /// `z = B r exp(-r^2 / width^2)`: odd at the origin with rapid decay.
    FieldBump { amplitude: f64, width: f64 },
    /// Metric and field bumps together.
    Combined {
        metric_amplitude: f64,
        field_amplitude: f64,
        field_width: f64,
    },
    /// Profiles sampled at arbitrary radii, resampled onto the grid by
    /// monotone cubic interpolation. A missing `z` column means `z = 0`.
    Tabulated {
        r: Vec<f64>,
        f: Vec<f64>,
        z: Option<Vec<f64>>,
    },
}

impl InitialDataSpec {
    fn validate(&self) -> Result<(), StateError> {
        match self {
            InitialDataSpec::Flat => Ok(()),
            InitialDataSpec::MetricBump { amplitude } => validate_metric_amplitude(*amplitude),
            InitialDataSpec::FieldBump { amplitude, width } => {
                validate_field_bump(*amplitude, *width)
            }
            InitialDataSpec::Combined {
                metric_amplitude,
                field_amplitude,
                field_width,
            } => {
                validate_metric_amplitude(*metric_amplitude)?;
                validate_field_bump(*field_amplitude, *field_width)
            }
            InitialDataSpec::Tabulated { r, f, z } => {
                if r.len() != f.len() || z.as_ref().is_some_and(|z| z.len() != r.len()) {
                    return Err(StateError::Tabulated("column lengths differ"));
                }
                Ok(())
            }
        }
    }
}

fn validate_metric_amplitude(a: f64) -> Result<(), StateError> {
    if !a.is_finite() {
        return Err(StateError::InvalidInitialData("amplitude must be finite"));
    }
    if a <= -1.0 {
        return Err(StateError::InvalidInitialData(
            "metric bump amplitude must exceed -1 to keep f positive",
        ));
    }
    Ok(())
}

fn validate_field_bump(b: f64, width: f64) -> Result<(), StateError> {
    if !b.is_finite() || !width.is_finite() {
        return Err(StateError::InvalidInitialData("amplitude and width must be finite"));
    }
    if width <= 0.0 {
        return Err(StateError::InvalidInitialData("field bump width must be positive"));
    }
    Ok(())
}

/// Base metric profile: 1 for `n >= 3`, the smooth cone cap for `n = 2`.
fn base_f(params: &FlowParameters, r: f64) -> f64 {
    if params.dimension == 2 {
        let w_inf = params.f_infinity * params.f_infinity - 1.0;
        math::sqrt(1.0 + w_inf * r * r / (1.0 + r * r))
    } else {
        1.0
    }
}

fn metric_bump_profile(r: f64) -> f64 {
    let q = 1.0 + r * r;
    r * r / (q * math::sqrt(q))
}

/// Builds a [`FlowState`] at `t = 0` from an initial-data specification.
///
/// Rejects data with `f <= 0` anywhere and data already past the
/// minimal-sphere cap `params.f_cap`.
pub fn make_initial_data(
    spec: &InitialDataSpec,
    params: &FlowParameters,
    grid: Arc<RadialGrid>,
) -> Result<FlowState, StateError> {
    params.validate()?;
    spec.validate()?;
    let nodes = grid.nodes();
    let mut f: Vec<f64> = nodes.iter().map(|&r| base_f(params, r)).collect();
    let mut z = alloc::vec![0.0; nodes.len()];

    match spec {
        InitialDataSpec::Flat => {}
        InitialDataSpec::MetricBump { amplitude } => {
            for (fi, &r) in f.iter_mut().zip(nodes) {
                *fi += amplitude * metric_bump_profile(r);
            }
        }
        InitialDataSpec::FieldBump { amplitude, width } => {
            fill_field_bump(&mut z, nodes, *amplitude, *width);
        }
        InitialDataSpec::Combined {
            metric_amplitude,
            field_amplitude,
            field_width,
        } => {
            for (fi, &r) in f.iter_mut().zip(nodes) {
                *fi += metric_amplitude * metric_bump_profile(r);
            }
            fill_field_bump(&mut z, nodes, *field_amplitude, *field_width);
        }
        InitialDataSpec::Tabulated { r, f: tf, z: tz } => {
            f = monotone_cubic_resample(r, tf, nodes)?;
            if let Some(tz) = tz {
                z = monotone_cubic_resample(r, tz, nodes)?;
            }
            if math::abs(f[0] - 1.0) > ORIGIN_TOL || math::abs(z[0]) > ORIGIN_TOL {
                return Err(StateError::OriginMismatch);
            }
        }
    }

    // Gauge conditions hold exactly at the origin.
    f[0] = 1.0;
    z[0] = 0.0;

    let state = FlowState::from_parts_unchecked(0.0, f, z, grid);
    state.validate(params.f_cap)?;
    Ok(state)
}

fn fill_field_bump(z: &mut [f64], nodes: &[f64], b: f64, width: f64) {
    for (zi, &r) in z.iter_mut().zip(nodes) {
        *zi = b * r * math::exp(-r * r / (width * width));
    }
}

/// One fitted decay law.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted exponent `e` in `|v| ~ C r^e`; `NaN` when the tail is
    /// identically zero.
    pub exponent: f64,
    /// Fitted prefactor `C`.
    pub amplitude: f64,
    /// Exponent the decay law requires (1 for the metric, 2 for `z`).
    pub required: f64,
    /// Whether the fit meets the required decay within the slack.
    pub satisfied: bool,
    /// Tail identically zero: the decay holds exactly.
    pub exact: bool,
}

/// Decay-law fits over the outer tail of the grid.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    /// Fit of `|f^2 - f_infinity^2| ~ C / r`.
    pub metric: DecayFit,
    /// Fit of `|z| ~ D / r^2`.
    pub field: DecayFit,
    pub tail_nodes: usize,
}

impl DecayReport {
    pub fn satisfied(&self) -> bool {
        self.metric.satisfied && self.field.satisfied
    }
}

/// Fits the asymptotic-flatness decay laws on the tail `r > r_max / 2` by
/// log-log regression. Needs at least eight tail nodes.
pub fn validate_asymptotics(
    state: &FlowState,
    params: &FlowParameters,
) -> Result<DecayReport, StateError> {
    let grid = state.grid();
    let tail = grid.tail_range();
    if tail.len() < 8 {
        return Err(StateError::TailTooShort {
            have: tail.len(),
            need: 8,
        });
    }
    let w_inf = params.f_infinity * params.f_infinity - 1.0;
    let rs = &grid.nodes()[tail.clone()];
    let metric_vals: Vec<f64> = state.f[tail.clone()]
        .iter()
        .map(|&fv| math::abs(fv * fv - 1.0 - w_inf))
        .collect();
    let field_vals: Vec<f64> = state.z[tail.clone()].iter().map(|&zv| math::abs(zv)).collect();
    Ok(DecayReport {
        metric: fit_decay(rs, &metric_vals, 1.0, params.decay_slack),
        field: fit_decay(rs, &field_vals, 2.0, params.decay_slack),
        tail_nodes: tail.len(),
    })
}

fn fit_decay(rs: &[f64], vals: &[f64], required: f64, slack: f64) -> DecayFit {
    let mut ln_r = Vec::new();
    let mut ln_v = Vec::new();
    for (&r, &v) in rs.iter().zip(vals) {
        if v > DECAY_FLOOR {
            ln_r.push(math::ln(r));
            ln_v.push(math::ln(v));
        }
    }
    // A tail at round-off level satisfies any decay law.
    if ln_r.len() < 4 {
        return DecayFit {
            exponent: f64::NAN,
            amplitude: 0.0,
            required,
            satisfied: true,
            exact: true,
        };
    }
    let fit = fit::line_fit(&ln_r, &ln_v);
    let exponent = fit.slope;
    DecayFit {
        exponent,
        amplitude: math::exp(fit.intercept),
        required,
        satisfied: exponent <= -required * (1.0 - slack),
        exact: false,
    }
}

/// Reconstructs the scalar field from `z` by trapezoidal quadrature of
/// `du/dr = f z` inward from `u(r_max) = 0`.
pub fn reconstruct_u(state: &FlowState) -> Vec<f64> {
    let nodes = state.grid().nodes();
    let n = nodes.len();
    let mut u = alloc::vec![0.0; n];
    for i in (0..n - 1).rev() {
        let gi = state.f[i] * state.z[i];
        let gj = state.f[i + 1] * state.z[i + 1];
        u[i] = u[i + 1] - 0.5 * (gi + gj) * (nodes[i + 1] - nodes[i]);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Parity, RadialGrid};
    use alloc::sync::Arc;
    use alloc::vec::Vec;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(r_max, n).unwrap())
    }

    fn params_n(n: u32) -> FlowParameters {
        FlowParameters::new(n, core::f64::consts::SQRT_2)
    }

    #[test]
    fn parameter_validation() {
        assert!(params_n(3).validate().is_ok());
        assert!(params_n(1).validate().is_err());
        let mut p = params_n(3);
        p.coupling = -1.0;
        assert!(p.validate().is_err());
        let mut p = params_n(3);
        p.f_infinity = 1.2;
        assert!(p.validate().is_err());
        let mut p = params_n(2);
        p.f_infinity = 1.2;
        assert!(p.validate().is_ok());
        p.f_infinity = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn static_vacuum_coupling_values() {
        assert!(FlowParameters::static_vacuum_coupling(2).is_none());
        let k3 = FlowParameters::static_vacuum_coupling(3).unwrap();
        assert!((k3 - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn flat_data_n3() {
        let g = grid(10.0, 64);
        let s = make_initial_data(&InitialDataSpec::Flat, &params_n(3), g).unwrap();
        assert!(s.f.iter().all(|&v| v == 1.0));
        assert!(s.z.iter().all(|&v| v == 0.0));
        assert_eq!(s.t, 0.0);
    }

    #[test]
    fn flat_data_n2_cone() {
        let mut p = params_n(2);
        p.f_infinity = 1.2;
        let g = grid(50.0, 200);
        let s = make_initial_data(&InitialDataSpec::Flat, &p, g).unwrap();
        assert_eq!(s.f[0], 1.0);
        // tail approaches the cone value from below at order 1/r^2
        let last = *s.f.last().unwrap();
        assert!(last < 1.2 && last > 1.19);
    }

    #[test]
    fn metric_bump_value_at_unit_radius() {
        // f(1) = 1 + A / 2^(3/2) for the bump profile.
        let g = grid(4.0, 64); // node 16 sits exactly at r = 1
        let s = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: 0.5 },
            &params_n(3),
            g.clone(),
        )
        .unwrap();
        let i = 16;
        assert_eq!(g.nodes()[i], 1.0);
        assert!((s.f[i] - 1.176_776_695_296_636_9).abs() < 1e-12);
        assert_eq!(s.f[0], 1.0);
    }

    #[test]
    fn field_bump_peak() {
        // max of B r exp(-r^2/s^2) is B (s/sqrt(2)) e^(-1/2) at r = s/sqrt(2).
        let g = grid(8.0, 4000);
        let s = make_initial_data(
            &InitialDataSpec::FieldBump { amplitude: 1.0, width: 1.0 },
            &params_n(3),
            g.clone(),
        )
        .unwrap();
        let (imax, zmax) = s
            .z
            .iter()
            .enumerate()
            .fold((0, 0.0), |(im, m), (i, &v)| if v > m { (i, v) } else { (im, m) });
        let expected = 0.428_881_942_480_353_1;
        assert!(zmax <= expected + 1e-12);
        assert!((zmax - expected).abs() < 1e-5);
        assert!((g.nodes()[imax] - core::f64::consts::FRAC_1_SQRT_2).abs() < 2.0 * 8.0 / 4000.0);
    }

    #[test]
    fn initial_data_rejections() {
        let g = grid(4.0, 32);
        assert!(matches!(
            make_initial_data(
                &InitialDataSpec::MetricBump { amplitude: -1.5 },
                &params_n(3),
                g.clone()
            ),
            Err(StateError::InvalidInitialData(_))
        ));
        assert!(matches!(
            make_initial_data(
                &InitialDataSpec::FieldBump { amplitude: 1.0, width: 0.0 },
                &params_n(3),
                g.clone()
            ),
            Err(StateError::InvalidInitialData(_))
        ));
        // Cap acts as a minimal-sphere surrogate.
        let mut p = params_n(3);
        p.f_cap = 1.1;
        assert!(matches!(
            make_initial_data(&InitialDataSpec::MetricBump { amplitude: 0.5 }, &p, g),
            Err(StateError::MetricCapExceeded { .. })
        ));
    }

    #[test]
    fn tabulated_roundtrip_and_guards() {
        let g = grid(10.0, 64);
        // Dense irregular table of the metric-bump profile.
        let mut r = Vec::new();
        let mut fv = Vec::new();
        let mut x = 0.0;
        let mut k = 0usize;
        while x <= 10.5 {
            r.push(x);
            fv.push(1.0 + 0.5 * metric_bump_profile(x));
            x += 0.01 + 0.005 * ((k % 7) as f64);
            k += 1;
        }
        let s = make_initial_data(
            &InitialDataSpec::Tabulated { r: r.clone(), f: fv.clone(), z: None },
            &params_n(3),
            g.clone(),
        )
        .unwrap();
        for (i, &rr) in g.nodes().iter().enumerate() {
            let exact = 1.0 + 0.5 * metric_bump_profile(rr);
            assert!((s.f[i] - exact).abs() < 2e-4, "node {i}: {} vs {exact}", s.f[i]);
        }
        // f <= 0 is rejected even through the tabulated path.
        let bad_f: Vec<f64> = r.iter().map(|&x| 1.0 - 0.3 * x).collect();
        assert!(matches!(
            make_initial_data(
                &InitialDataSpec::Tabulated { r: r.clone(), f: bad_f, z: None },
                &params_n(3),
                g.clone()
            ),
            Err(StateError::NonPositiveMetric { .. })
        ));
        // Origin away from f(0) = 1 is rejected.
        let shifted: Vec<f64> = fv.iter().map(|v| v + 0.01).collect();
        assert!(matches!(
            make_initial_data(
                &InitialDataSpec::Tabulated { r, f: shifted, z: None },
                &params_n(3),
                g
            ),
            Err(StateError::OriginMismatch)
        ));
    }

    #[test]
    fn decay_report_flat_is_exact() {
        let g = grid(30.0, 128);
        let p = params_n(3);
        let s = make_initial_data(&InitialDataSpec::Flat, &p, g).unwrap();
        let rep = validate_asymptotics(&s, &p).unwrap();
        assert!(rep.metric.exact && rep.field.exact);
        assert!(rep.satisfied());
    }

    #[test]
    fn decay_report_metric_bump() {
        let g = grid(40.0, 400);
        let p = params_n(3);
        let s = make_initial_data(&InitialDataSpec::MetricBump { amplitude: 0.5 }, &p, g).unwrap();
        let rep = validate_asymptotics(&s, &p).unwrap();
        assert!(
            (-1.3..=-0.7).contains(&rep.metric.exponent),
            "exponent {}",
            rep.metric.exponent
        );
        assert!(rep.metric.satisfied);
        assert!(rep.field.exact);
    }

    #[test]
    fn decay_report_flags_slow_tails() {
        // f - 1 ~ r^(-1/2) decays too slowly for order-one flatness.
        let g = grid(40.0, 400);
        let p = params_n(3);
        let f: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| {
                let q = 1.0 + r * r;
                1.0 + r * r / q.powf(1.25)
            })
            .collect();
        let z = alloc::vec![0.0; g.node_count()];
        let s = FlowState::new(0.0, f, z, g).unwrap();
        let rep = validate_asymptotics(&s, &p).unwrap();
        assert!((-0.7..=-0.3).contains(&rep.metric.exponent), "{}", rep.metric.exponent);
        assert!(!rep.metric.satisfied);
    }

    #[test]
    fn decay_needs_enough_tail() {
        // A power-stretched grid starves the outer half of nodes.
        let g = Arc::new(
            RadialGrid::build(10.0, 16, crate::grid::GridSpacing::Power { gamma: 4.0 }).unwrap(),
        );
        let p = params_n(3);
        let s = make_initial_data(&InitialDataSpec::Flat, &p, g).unwrap();
        assert!(matches!(
            validate_asymptotics(&s, &p),
            Err(StateError::TailTooShort { .. })
        ));
    }

    #[test]
    fn reconstruct_u_zero_field() {
        let g = grid(10.0, 64);
        let s = make_initial_data(&InitialDataSpec::Flat, &params_n(3), g).unwrap();
        assert!(reconstruct_u(&s).iter().all(|&v| v == 0.0));
    }

    fn gaussian_state(n: usize) -> FlowState {
        let g = grid(6.0, n);
        let f = alloc::vec![1.0; g.node_count()];
        let z: Vec<f64> = g.nodes().iter().map(|&r| -r * (-r * r / 2.0).exp()).collect();
        FlowState::new(0.0, f, z, g).unwrap()
    }

    #[test]
    fn reconstruct_u_matches_antiderivative() {
        // z = -r e^(-r^2/2) with f = 1 integrates to u = e^(-r^2/2) - e^(-R^2/2).
        let err_at = |n: usize| -> f64 {
            let s = gaussian_state(n);
            let u = reconstruct_u(&s);
            let edge = (-s.grid().r_max() * s.grid().r_max() / 2.0).exp();
            let mut err = 0.0_f64;
            for (i, &r) in s.grid().nodes().iter().enumerate() {
                let exact = (-r * r / 2.0).exp() - edge;
                err = err.max((u[i] - exact).abs());
            }
            err
        };
        let e1 = err_at(200);
        let e2 = err_at(400);
        assert!(e1 < 2e-3);
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reconstruct_u_roundtrip_second_order() {
        // (1/f) d1(reconstruct_u) recovers z at second order.
        let err_at = |n: usize| -> f64 {
            let s = gaussian_state(n);
            let u = reconstruct_u(&s);
            let du = s.grid().d1(&u, Parity::Even).unwrap();
            let mut err = 0.0_f64;
            for i in 0..s.grid().node_count() - 1 {
                err = err.max((du[i] / s.f[i] - s.z[i]).abs());
            }
            err
        };
        let ratio = err_at(200) / err_at(400);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn origin_regularity_of_families() {
        let g = grid(10.0, 64);
        let p = params_n(3);
        for spec in [
            InitialDataSpec::Flat,
            InitialDataSpec::MetricBump { amplitude: 0.5 },
            InitialDataSpec::FieldBump { amplitude: 0.3, width: 2.0 },
            InitialDataSpec::Combined {
                metric_amplitude: 0.3,
                field_amplitude: 0.3,
                field_width: 2.0,
            },
        ] {
            let s = make_initial_data(&spec, &p, g.clone()).unwrap();
            assert_eq!(s.f[0], 1.0);
            assert_eq!(s.z[0], 0.0);
            let d1f = s.grid().d1(&s.f, Parity::Even).unwrap();
            assert_eq!(d1f[0], 0.0);
        }
    }

    #[test]
    fn metric_bump_keeps_f_at_least_one() {
        // A > 0 keeps f >= 1 everywhere, so lambda_2 >= 0 nodally.
        let g = grid(20.0, 256);
        let s = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: 0.7 },
            &params_n(3),
            g,
        )
        .unwrap();
        for (i, (&fv, &r)) in s.f.iter().zip(s.grid().nodes()).enumerate() {
            assert!(fv >= 1.0, "node {i}");
            if r > 0.0 {
                let lambda2 = (1.0 - 1.0 / (fv * fv)) / (r * r);
                assert!(lambda2 >= 0.0);
            }
        }
    }
}
