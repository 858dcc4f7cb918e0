//! A-priori bound constants computed from initial data, and runtime
//! certification of every bound as a signed margin.
//!
//! Each monitored inequality is a theorem about the exact flow; the margins
//! only observe, they never feed back into the evolution (clamping with them
//! would mask solver defects). A margin `>= 0` means the bound holds; small
//! negative excursions up to the discretisation tolerance (`10 h^2` by
//! default) are expected, and anything worse that does not shrink under grid
//! refinement is a solver bug.
//!
//! The monitored bounds, with their constants:
//!
//! * `|z| <= C_z^+ / sqrt(1 + t)`, `C_z^+ = max(1/sqrt(2 k^2), sup |z(0)|)`;
//! * `S >= C_S^- / (1 + t)`, `C_S^- = min(-n/2, inf S(0))`, and `S` stays
//!   nonnegative if it starts nonnegative;
//! * `C_f^- <= f <= C_f^+ (1 + t)^p` with `p = 1 + (k C_z^+)^2`,
//!   `C_f^- = inf f(0)` (also capped by 1 and `f_infinity` when `n = 2`),
//!   `C_f^+ = max(sqrt(1 + (k C_z^+)^2), sup f(0))` (and `f_infinity` when
//!   `n = 2`);
//! * `lambda_2 >= -C_lambda2^- / (1 + t)`,
//!   `C_lambda2^- = max(1/(n-1), -2 inf lambda_2(0))`;
//! * `z / r <= C_zeta^+ = sup 2 |z(0)| / r` (a theorem for `n = 2`; for
//!   `n >= 3` the profile is reported against a user-supplied constant
//!   hypothesis instead);
//! * `min H > 0` away from the origin: no minimal hypersphere forms;
//! * nodal positivity of the Brown-York mass when it holds initially.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry;
use crate::grid::Parity;
use crate::math;
use crate::state::{FlowParameters, FlowState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorError {
    /// Constants must be computed from the run's own initial data (`t = 0`).
    NotInitialData,
}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorError::NotInitialData => {
                write!(f, "bound constants must be computed from the t = 0 state")
            }
        }
    }
}

impl core::error::Error for MonitorError {}

/// The explicit constants of the a-priori bounds, fixed by the initial data.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub c_z_plus: f64,
    pub c_s_minus: f64,
    pub c_f_minus: f64,
    pub c_f_plus: f64,
    /// Growth exponent `p = 1 + (k C_z^+)^2` of the upper `f` bound.
    pub p: f64,
    pub c_lambda2_minus: f64,
    /// `sup 2 |z(0)| / r`; the proved bound on `z / r` when `n = 2`.
    pub c_zeta_plus: f64,
    /// `S(0) >= 0` everywhere, so nonnegativity of `S` is monitored.
    pub s_initially_nonneg: bool,
    /// `mu_BY(0) >= 0` everywhere, so mass positivity is monitored.
    pub mass_initially_nonneg: bool,
}

/// Computes the bound constants from a `t = 0` state.
pub fn compute_constants(
    initial: &FlowState,
    params: &FlowParameters,
) -> Result<BoundConstants, MonitorError> {
    if initial.t != 0.0 {
        return Err(MonitorError::NotInitialData);
    }
    let k = params.coupling;
    let nf = params.nf();

    let sup_z0 = initial.z.iter().fold(0.0_f64, |m, &v| m.max(math::abs(v)));
    let c_z_plus = (1.0 / math::sqrt(2.0 * k * k)).max(sup_z0);

    let curv = geometry::curvature(initial, params);
    let min_s0 = curv.s.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_s_minus = (-nf / 2.0).min(min_s0);

    let min_f0 = initial.f.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_f0 = initial.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let growth_cap = math::sqrt(1.0 + (k * c_z_plus) * (k * c_z_plus));
    let (c_f_minus, c_f_plus) = if params.dimension == 2 {
        (
            1.0_f64.min(params.f_infinity).min(min_f0),
            params.f_infinity.max(growth_cap).max(max_f0),
        )
    } else {
        (min_f0, growth_cap.max(max_f0))
    };
    let p = 1.0 + (k * c_z_plus) * (k * c_z_plus);

    let min_lambda2_0 = curv.lambda2.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_lambda2_minus = (1.0 / (nf - 1.0)).max(-2.0 * min_lambda2_0);

    let zeta0 = zeta_profile(initial);
    let c_zeta_plus = 2.0 * zeta0.iter().fold(0.0_f64, |m, &v| m.max(math::abs(v)));

    let mass_initially_nonneg = initial.f[1..].iter().all(|&f| f >= 1.0);

    Ok(BoundConstants {
        c_z_plus,
        c_s_minus,
        c_f_minus,
        c_f_plus,
        p,
        c_lambda2_minus,
        c_zeta_plus,
        s_initially_nonneg: min_s0 >= 0.0,
        mass_initially_nonneg,
    })
}

/// Sup-norms, profile extrema and signed bound margins of one state.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_z: f64,
    pub sup_riem: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub min_s: f64,
    pub min_lambda2: f64,
    /// `min H` over `r > 0`; the origin value is a coordinate artifact.
    pub min_h_off_origin: f64,
    pub max_zeta: f64,
    pub max_zprime: f64,
    pub min_y: f64,
    /// `C_z^+ / sqrt(1+t) - sup |z|`.
    pub m1: f64,
    /// `min S - C_S^- / (1+t)`.
    pub m2: f64,
    /// `min f - C_f^-`.
    pub m3a: f64,
    /// `C_f^+ (1+t)^p - max f`.
    pub m3b: f64,
    /// `min lambda_2 + C_lambda2^- / (1+t)`.
    pub m4: f64,
    /// `n = 2`: `C_zeta^+ - max(z/r)`; `n >= 3`: hypothesis margin
    /// `zeta_hypothesis - max(z/r)`, reported but never enforced.
    pub m5: f64,
    /// `min H` over `r > 0`: positive while no minimal sphere forms.
    pub m6: f64,
    /// `min (1 - 1/f)` over `r > 0`: the Brown-York sign, in units of
    /// `8 pi / r`.
    pub mass_margin: f64,
    /// Whether `S >= -tol` held, when `S(0) >= 0` made it monitorable.
    pub s_positive: Option<bool>,
    /// Whether `mu_BY >= -tol * 8 pi / r` held nodally, when applicable.
    pub mass_positive: Option<bool>,
    /// Theorem-backed margins below `-tol`, by name.
    pub violations: Vec<&'static str>,
}

/// Audits one state against the bound constants with slack `tol`
/// (the discretisation scale; `10 h^2` is the standard choice).
pub fn audit(
    state: &FlowState,
    consts: &BoundConstants,
    params: &FlowParameters,
    tol: f64,
) -> DiagnosticsRecord {
    let t = state.t;
    let curv = geometry::curvature(state, params);
    let nodes = state.grid().nodes();
    let nf = params.nf();

    let sup_z = state.z.iter().fold(0.0_f64, |m, &v| m.max(math::abs(v)));
    let sup_riem = math::sqrt(
        curv.riem_norm_sq.iter().cloned().fold(0.0_f64, f64::max).max(0.0),
    );
    let min_f = state.f.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_f = state.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_s = curv.s.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_lambda2 = curv.lambda2.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut min_h = f64::INFINITY;
    let mut mass_margin = f64::INFINITY;
    for i in 1..nodes.len() {
        let h = (nf - 1.0) / (nodes[i] * state.f[i]);
        min_h = min_h.min(h);
        mass_margin = mass_margin.min(1.0 - 1.0 / state.f[i]);
    }

    let zeta = zeta_profile(state);
    let max_zeta = zeta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let zprime = hessian_profile(state);
    let max_zprime = zprime.iter().fold(0.0_f64, |m, &v| m.max(math::abs(v)));
    let y = y_profile(state);
    let min_y = y.iter().cloned().fold(f64::INFINITY, f64::min);

    let grow = 1.0 + t;
    let m1 = consts.c_z_plus / math::sqrt(grow) - sup_z;
    let m2 = min_s - consts.c_s_minus / grow;
    let m3a = min_f - consts.c_f_minus;
    let m3b = consts.c_f_plus * math::powf(grow, consts.p) - max_f;
    let m4 = min_lambda2 + consts.c_lambda2_minus / grow;
    let m5 = if params.dimension == 2 {
        consts.c_zeta_plus - max_zeta
    } else {
        params.zeta_hypothesis - max_zeta
    };
    let m6 = min_h;

    let s_positive = consts.s_initially_nonneg.then(|| min_s >= -tol);
    let mass_positive = consts.mass_initially_nonneg.then(|| mass_margin >= -tol);

    let mut violations = Vec::new();
    if m1 < -tol {
        violations.push("z_decay");
    }
    if m2 < -tol {
        violations.push("s_lower");
    }
    if m3a < -tol {
        violations.push("f_lower");
    }
    if m3b < -tol {
        violations.push("f_upper");
    }
    if m4 < -tol {
        violations.push("lambda2_lower");
    }
    if params.dimension == 2 && m5 < -tol {
        violations.push("zeta_bound");
    }
    if m6 <= 0.0 {
        violations.push("minimal_sphere");
    }
    if s_positive == Some(false) {
        violations.push("s_positivity");
    }
    if mass_positive == Some(false) {
        violations.push("mass_positivity");
    }

    DiagnosticsRecord {
        t,
        sup_z,
        sup_riem,
        min_f,
        max_f,
        min_s,
        min_lambda2,
        min_h_off_origin: min_h,
        max_zeta,
        max_zprime,
        min_y,
        m1,
        m2,
        m3a,
        m3b,
        m4,
        m5,
        m6,
        mass_margin,
        s_positive,
        mass_positive,
        violations,
    }
}

/// `zeta = z / r`, with the odd-parity limit `d1(z)(0)` at the origin.
pub fn zeta_profile(state: &FlowState) -> Vec<f64> {
    let nodes = state.grid().nodes();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(state.grid().odd_d1_origin_value(&state.z));
    for i in 1..nodes.len() {
        out.push(state.z[i] / nodes[i]);
    }
    out
}

/// `z' = dz/dr`, the radial Hessian scale of the scalar field.
pub fn hessian_profile(state: &FlowState) -> Vec<f64> {
    state
        .grid()
        .d1(&state.z, Parity::Odd)
        .expect("state matches grid")
}

/// `y = f lambda_2 / (1 + f) - f lambda_1 / 2` for `r > 0` and `y(0) = 0`;
/// the quantity whose lower bound controls `lambda_1` from above.
pub fn y_profile(state: &FlowState) -> Vec<f64> {
    let (lambda1, lambda2) = geometry::sectional(state);
    let n = lambda1.len();
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    for i in 1..n {
        let f = state.f[i];
        out.push(f * lambda2[i] / (1.0 + f) - 0.5 * f * lambda1[i]);
    }
    out
}
