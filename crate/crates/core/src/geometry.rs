//! Curvature and quasi-local mass diagnostics of a flow state.
//!
//! In the area-radius gauge the two sectional curvatures are
//! `lambda_1 = f' / (r f^3)` (planes containing the radial direction) and
//! `lambda_2 = (1 - 1/f^2) / r^2` (planes tangent to the symmetry spheres);
//! everything else here is algebra on top of them. `lambda_2` is evaluated
//! by its algebraic formula — exact given `f` — while `lambda_1` needs one
//! difference stencil; at the origin both share the regular limit `f''(0)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fit;
use crate::grid::{GridError, Parity};
use crate::state::{FlowParameters, FlowState};

const EIGHT_PI: f64 = 8.0 * core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// The ADM tail fit needs at least eight nodes beyond `r_max / 2`.
    TailTooShort { have: usize, need: usize },
    Grid(GridError),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::TailTooShort { have, need } => {
                write!(f, "ADM tail fit needs {need} nodes, grid provides {have}")
            }
            GeometryError::Grid(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GeometryError {}

impl From<GridError> for GeometryError {
    fn from(e: GridError) -> Self {
        GeometryError::Grid(e)
    }
}

/// Nodal curvature diagnostics.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// Scalar curvature `R = 2(n-1) lambda_1 + (n-1)(n-2) lambda_2`,
    /// exact by construction.
    pub scalar: Vec<f64>,
    /// `S = R - k_n^2 z^2`, the quantity whose lower bound the flow
    /// preserves.
    pub s: Vec<f64>,
    /// `|Riem|^2 = 2(n-1) lambda_1^2 + (n-1)(n-2) lambda_2^2`.
    pub riem_norm_sq: Vec<f64>,
}

/// Sectional curvatures of a state; origin values by the regular limit
/// `lambda_1(0) = lambda_2(0) = f''(0)`.
///
/// `lambda_1` uses the fourth-order `df/dr`: its absolute error must vanish
/// with `r` for `(lambda_1 - lambda_2)/r` quantities (the Bianchi residual)
/// to stay second order near the axis.
pub(crate) fn sectional(state: &FlowState) -> (Vec<f64>, Vec<f64>) {
    let grid = state.grid();
    let nodes = grid.nodes();
    let n = nodes.len();
    let d1f = grid.d1_refined(&state.f, Parity::Even).expect("state matches grid");
    let origin = grid.even_d2_origin(&state.f);
    let mut lambda1 = vec![0.0; n];
    let mut lambda2 = vec![0.0; n];
    lambda1[0] = origin;
    lambda2[0] = origin;
    for i in 1..n {
        let r = nodes[i];
        let f = state.f[i];
        lambda1[i] = d1f[i] / (r * f * f * f);
        lambda2[i] = (1.0 - 1.0 / (f * f)) / (r * r);
    }
    (lambda1, lambda2)
}

/// Computes the full curvature profile of a state.
pub fn curvature(state: &FlowState, params: &FlowParameters) -> CurvatureProfile {
    let (lambda1, lambda2) = sectional(state);
    let nf = params.nf();
    let c1 = 2.0 * (nf - 1.0);
    let c2 = (nf - 1.0) * (nf - 2.0);
    let k2 = params.coupling * params.coupling;
    let n = lambda1.len();
    let mut scalar = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut riem = vec![0.0; n];
    for i in 0..n {
        let l1 = lambda1[i];
        let l2 = lambda2[i];
        scalar[i] = c1 * l1 + c2 * l2;
        s[i] = scalar[i] - k2 * state.z[i] * state.z[i];
        riem[i] = c1 * l1 * l1 + c2 * l2 * l2;
    }
    CurvatureProfile {
        lambda1,
        lambda2,
        scalar,
        s,
        riem_norm_sq: riem,
    }
}

/// `sup_r |Riem|` and the attaining node; the quantity tracked per step for
/// blow-up detection.
pub fn riem_sup(state: &FlowState, params: &FlowParameters) -> (f64, usize) {
    let (lambda1, lambda2) = sectional(state);
    let nf = params.nf();
    let c1 = 2.0 * (nf - 1.0);
    let c2 = (nf - 1.0) * (nf - 2.0);
    let mut best = -1.0;
    let mut arg = 0;
    for i in 0..lambda1.len() {
        let v = c1 * lambda1[i] * lambda1[i] + c2 * lambda2[i] * lambda2[i];
        if v > best {
            best = v;
            arg = i;
        }
    }
    (crate::math::sqrt(best.max(0.0)), arg)
}

/// Discrete residual of the Bianchi identity
/// `d lambda_2 / dr = (2/r)(lambda_1 - lambda_2)`; identically zero in the
/// continuum, so this is a pure discretisation-error diagnostic. The two end
/// nodes are reported as zero.
pub fn bianchi_residual(state: &FlowState) -> Vec<f64> {
    let (lambda1, lambda2) = sectional(state);
    let grid = state.grid();
    let nodes = grid.nodes();
    let n = nodes.len();
    let d1l2 = grid.d1(&lambda2, Parity::Even).expect("state matches grid");
    let mut res = vec![0.0; n];
    for i in 1..n - 1 {
        res[i] = d1l2[i] - 2.0 / nodes[i] * (lambda1[i] - lambda2[i]);
    }
    res
}

/// Mean curvature and quasi-local masses.
///
/// All masses use the three-dimensional coefficient `8 pi` in every
/// dimension; outputs are in that fixed normalization.
#[derive(Debug, Clone)]
pub struct MassProfile {
    /// `H = (n-1)/(r f)`; the origin node carries `+inf` (coordinate
    /// artifact) and is excluded from minimum scans.
    pub mean_curvature: Vec<f64>,
    /// Brown-York mass `(8 pi / r)(1 - 1/f)`, zero at the origin.
    pub brown_york: Vec<f64>,
    /// Misner-Sharpe mass `(8 pi / r)(1 - 1/f^2) = (1 + 1/f) mu_BY`.
    pub misner_sharpe: Vec<f64>,
    /// Intercept of the linear fit of `mu_BY` against `1/r` on the outer
    /// tail: the ADM estimate.
    pub adm_estimate: f64,
    /// Magnitude of the fitted slope, an uncertainty proxy.
    pub adm_uncertainty: f64,
    /// Root-mean-square residual of the tail fit.
    pub adm_residual: f64,
}

/// Computes mean curvature, quasi-local masses and the ADM tail estimate.
pub fn masses(state: &FlowState, params: &FlowParameters) -> Result<MassProfile, GeometryError> {
    let grid = state.grid();
    let nodes = grid.nodes();
    let n = nodes.len();
    let nf = params.nf();
    let mut h = vec![0.0; n];
    let mut by = vec![0.0; n];
    let mut ms = vec![0.0; n];
    h[0] = f64::INFINITY;
    for i in 1..n {
        let r = nodes[i];
        let f = state.f[i];
        h[i] = (nf - 1.0) / (r * f);
        by[i] = EIGHT_PI / r * (1.0 - 1.0 / f);
        ms[i] = EIGHT_PI / r * (1.0 - 1.0 / (f * f));
    }
    let tail = grid.tail_range();
    if tail.len() < 8 {
        return Err(GeometryError::TailTooShort {
            have: tail.len(),
            need: 8,
        });
    }
    let xs: Vec<f64> = tail.clone().map(|i| 1.0 / nodes[i]).collect();
    let ys: Vec<f64> = tail.clone().map(|i| by[i]).collect();
    let fit = fit::line_fit(&xs, &ys);
    Ok(MassProfile {
        mean_curvature: h,
        brown_york: by,
        misner_sharpe: ms,
        adm_estimate: fit.intercept,
        adm_uncertainty: crate::math::abs(fit.slope),
        adm_residual: fit.rms,
    })
}

/// Radial gradient of the DeTurck potential,
/// `dphi/dr = (1/f) df/dr + ((n-2)/r)(f^2 - 1)`; diagnostic only, the term
/// is already absorbed into the evolution equations.
pub fn deturck_gradient(state: &FlowState, params: &FlowParameters) -> Vec<f64> {
    let grid = state.grid();
    let nodes = grid.nodes();
    let d1f = grid.d1(&state.f, Parity::Even).expect("state matches grid");
    let nm2 = params.nf() - 2.0;
    let mut out = vec![0.0; nodes.len()];
    for i in 1..nodes.len() {
        let f = state.f[i];
        out[i] = d1f[i] / f + nm2 / nodes[i] * (f * f - 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::state::{make_initial_data, FlowParameters, FlowState, InitialDataSpec};
    use alloc::sync::Arc;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(r_max, n).unwrap())
    }

    fn params_n(n: u32) -> FlowParameters {
        FlowParameters::new(n, core::f64::consts::SQRT_2)
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    #[test]
    fn flat_state_has_zero_curvature_and_mass() {
        let p = params_n(3);
        let s = make_initial_data(&InitialDataSpec::Flat, &p, grid(10.0, 64)).unwrap();
        let c = curvature(&s, &p);
        assert_eq!(max_abs(&c.lambda1), 0.0);
        assert_eq!(max_abs(&c.lambda2), 0.0);
        assert_eq!(max_abs(&c.scalar), 0.0);
        assert_eq!(max_abs(&c.riem_norm_sq), 0.0);
        assert_eq!(max_abs(&bianchi_residual(&s)), 0.0);
        let m = masses(&s, &p).unwrap();
        for (i, &r) in s.grid().nodes().iter().enumerate().skip(1) {
            assert!((m.mean_curvature[i] - 2.0 / r).abs() < 1e-14);
            assert_eq!(m.brown_york[i], 0.0);
            assert_eq!(m.misner_sharpe[i], 0.0);
        }
        assert!(m.mean_curvature[0].is_infinite());
        assert_eq!(m.adm_estimate, 0.0);
        assert_eq!(max_abs(&deturck_gradient(&s, &p)), 0.0);
    }

    /// Constant-curvature cap: f = (1 - r^2/rho^2)^(-1/2) has
    /// lambda_1 = lambda_2 = 1/rho^2.
    fn sphere_cap(n: usize) -> (FlowState, f64) {
        let rho = 2.0;
        let g = grid(1.0, n);
        let f: alloc::vec::Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| 1.0 / (1.0 - r * r / (rho * rho)).sqrt())
            .collect();
        let z = alloc::vec![0.0; g.node_count()];
        (FlowState::new(0.0, f, z, g).unwrap(), 1.0 / (rho * rho))
    }

    #[test]
    fn sphere_cap_sectional_curvatures() {
        let (s, k) = sphere_cap(256);
        let (l1, l2) = sectional(&s);
        // lambda2 is algebraic off the origin: exact given f.
        for i in 1..s.grid().node_count() {
            assert!((l2[i] - k).abs() < 1e-12, "lambda2 node {i}: {}", l2[i]);
            assert!((l1[i] - k).abs() < 2e-5, "lambda1 node {i}: {}", l1[i]);
        }
        // origin limit comes from the even d2 stencil
        assert!((l2[0] - k).abs() < 1e-8, "lambda2 origin: {}", l2[0]);
        // lambda1 converges at least at second order under refinement
        let (s2, _) = sphere_cap(512);
        let (l1b, _) = sectional(&s2);
        let e1 = l1.iter().map(|v| (v - k).abs()).fold(0.0_f64, f64::max);
        let e2 = l1b.iter().map(|v| (v - k).abs()).fold(0.0_f64, f64::max);
        let order = (e1 / e2).log2();
        assert!(order >= 1.8, "order {order}");
    }

    #[test]
    fn bianchi_residual_vanishes_on_cap() {
        let (s, _) = sphere_cap(256);
        // Both terms vanish analytically; the residual is pure stencil noise.
        let res = bianchi_residual(&s);
        assert!(max_abs(&res) < 1e-6, "{}", max_abs(&res));
    }

    #[test]
    fn bianchi_residual_second_order_on_bump() {
        let p = params_n(3);
        let err_at = |n: usize| -> f64 {
            let s = make_initial_data(
                &InitialDataSpec::MetricBump { amplitude: 0.4 },
                &p,
                grid(10.0, n),
            )
            .unwrap();
            max_abs(&bianchi_residual(&s))
        };
        let order = (err_at(400) / err_at(800)).log2();
        assert!((1.7..=2.4).contains(&order), "order {order}");
    }

    /// f equal to 1 near the origin, Schwarzschild (m = 0.1) beyond r = 1,
    /// bridged by a C^2 ramp on [1/2, 1].
    fn schwarzschild_blend(n: usize, m: f64) -> FlowState {
        let g = grid(10.0, n);
        let f: alloc::vec::Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| {
                let fs = if r > 0.5 { 1.0 / (1.0 - 2.0 * m / r).sqrt() } else { 1.0 };
                let w = if r <= 0.5 {
                    0.0
                } else if r >= 1.0 {
                    1.0
                } else {
                    let x = (r - 0.5) / 0.5;
                    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
                };
                1.0 + w * (fs - 1.0)
            })
            .collect();
        let z = alloc::vec![0.0; g.node_count()];
        FlowState::new(0.0, f, z, g).unwrap()
    }

    #[test]
    fn schwarzschild_tail_is_scalar_flat() {
        let m = 0.1;
        let p = params_n(3);
        let check = |n: usize| -> f64 {
            let s = schwarzschild_blend(n, m);
            let c = curvature(&s, &p);
            let nodes = s.grid().nodes();
            let mut worst = 0.0_f64;
            for i in 0..nodes.len() - 1 {
                let r = nodes[i];
                if r < 1.2 {
                    continue;
                }
                // lambda2 = 2m/r^3 exactly (pure algebra on the closed form)
                assert!(
                    (c.lambda2[i] - 2.0 * m / (r * r * r)).abs() < 1e-12 * (2.0 * m / (r * r * r)),
                    "node {i}"
                );
                worst = worst.max(c.scalar[i].abs());
            }
            worst
        };
        let e1 = check(500);
        let e2 = check(1000);
        assert!(e1 < 1e-4, "R on tail: {e1}");
        let order = (e1 / e2).log2();
        assert!(order >= 1.7, "order {order}");
    }

    #[test]
    fn schwarzschild_masses_match_closed_form() {
        let m = 0.1;
        let p = params_n(3);
        let s = schwarzschild_blend(800, m);
        let prof = masses(&s, &p).unwrap();
        let nodes = s.grid().nodes();
        for i in 0..nodes.len() {
            let r = nodes[i];
            if r < 1.2 {
                continue;
            }
            // mu_MS = (8 pi / r)(2m/r) on the Schwarzschild region, exactly.
            let exact = EIGHT_PI / r * (2.0 * m / r);
            assert!((prof.misner_sharpe[i] - exact).abs() < 1e-12 * exact);
            // identity mu_MS = (1 + 1/f) mu_BY, at round-off of the 8 pi / r scale
            let f = s.f[i];
            let ident = (1.0 + 1.0 / f) * prof.brown_york[i];
            assert!((prof.misner_sharpe[i] - ident).abs() < 2e-14 * (EIGHT_PI / r));
        }
    }

    #[test]
    fn scalar_identity_is_exact_by_construction() {
        let p = params_n(4);
        let s = make_initial_data(
            &InitialDataSpec::Combined {
                metric_amplitude: 0.3,
                field_amplitude: 0.3,
                field_width: 2.0,
            },
            &p,
            grid(15.0, 300),
        )
        .unwrap();
        let c = curvature(&s, &p);
        let nf = p.nf();
        for i in 0..c.scalar.len() {
            let recomputed = 2.0 * (nf - 1.0) * c.lambda1[i] + (nf - 1.0) * (nf - 2.0) * c.lambda2[i];
            let scale = recomputed.abs().max(1e-30);
            assert!((c.scalar[i] - recomputed).abs() <= 1e-14 * scale);
            let s_re = c.scalar[i] - p.coupling * p.coupling * s.z[i] * s.z[i];
            assert!((c.s[i] - s_re).abs() <= 1e-14 * s_re.abs().max(1e-30));
            assert!(c.riem_norm_sq[i] >= 0.0);
        }
    }

    #[test]
    fn origin_continuity_of_sectionals() {
        // |lambda1(r_1) - lambda2(r_1)| shrinks at second order on regular data.
        let p = params_n(3);
        let gap_at = |n: usize| -> f64 {
            let s = make_initial_data(
                &InitialDataSpec::MetricBump { amplitude: 0.5 },
                &p,
                grid(10.0, n),
            )
            .unwrap();
            let (l1, l2) = sectional(&s);
            (l1[1] - l2[1]).abs()
        };
        let order = (gap_at(250) / gap_at(500)).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn sign_covariance_f_ge_one_iff_lambda2_nonneg() {
        let p = params_n(3);
        let s = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: 0.6 },
            &p,
            grid(12.0, 200),
        )
        .unwrap();
        let (_, l2) = sectional(&s);
        for i in 1..s.f.len() {
            assert_eq!(s.f[i] >= 1.0, l2[i] >= 0.0, "node {i}");
        }
    }

    #[test]
    fn deturck_gradient_closed_form_and_n2_reduction() {
        let a = 0.4;
        let p3 = params_n(3);
        let s = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: a },
            &p3,
            grid(8.0, 400),
        )
        .unwrap();
        let grad = deturck_gradient(&s, &p3);
        let nodes = s.grid().nodes();
        let exact_at = |r: f64| -> f64 {
            let q = 1.0 + r * r;
            let phi = r * r / (q * q.sqrt());
            let dphi = 2.0 * r / (q * q.sqrt()) - 3.0 * r * r * r / (q * q * q.sqrt());
            let f = 1.0 + a * phi;
            a * dphi / f + (f * f - 1.0) / r
        };
        let mut e1 = 0.0_f64;
        for i in 1..nodes.len() - 1 {
            e1 = e1.max((grad[i] - exact_at(nodes[i])).abs());
        }
        assert!(e1 < 1e-3, "max error {e1}");
        // second order under refinement
        let s_fine = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: a },
            &p3,
            grid(8.0, 800),
        )
        .unwrap();
        let grad_fine = deturck_gradient(&s_fine, &p3);
        let mut e2 = 0.0_f64;
        for i in 1..s_fine.f.len() - 1 {
            e2 = e2.max((grad_fine[i] - exact_at(s_fine.grid().nodes()[i])).abs());
        }
        let order = (e1 / e2).log2();
        assert!((1.7..=2.4).contains(&order), "order {order}");

        // n = 2: the (n-2) term drops and the gradient is (1/f) d1 f.
        let mut p2 = params_n(2);
        p2.f_infinity = 1.0;
        let s2 = make_initial_data(
            &InitialDataSpec::MetricBump { amplitude: a },
            &p2,
            grid(8.0, 100),
        )
        .unwrap();
        let grad2 = deturck_gradient(&s2, &p2);
        let d1f = s2.grid().d1(&s2.f, Parity::Even).unwrap();
        for i in 1..s2.f.len() {
            assert!((grad2[i] - d1f[i] / s2.f[i]).abs() < 1e-15 * d1f[i].abs().max(1.0));
        }
    }

    #[test]
    fn riem_sup_agrees_with_profile_max() {
        let p = params_n(3);
        let s = make_initial_data(
            &InitialDataSpec::Combined {
                metric_amplitude: 0.3,
                field_amplitude: 0.3,
                field_width: 2.0,
            },
            &p,
            grid(15.0, 300),
        )
        .unwrap();
        let c = curvature(&s, &p);
        let (sup, node) = riem_sup(&s, &p);
        let max_sq = c.riem_norm_sq.iter().cloned().fold(0.0_f64, f64::max);
        assert!((sup - max_sq.sqrt()).abs() < 1e-14 * sup.max(1e-30));
        assert!((c.riem_norm_sq[node] - max_sq).abs() <= 1e-14 * max_sq);
    }
}
