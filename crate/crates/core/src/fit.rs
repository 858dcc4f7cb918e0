//! Least-squares line fit shared by the tail diagnostics.

use crate::math;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Ordinary least squares for `y = intercept + slope * x`.
///
/// Requires at least two distinct abscissae; callers guarantee this.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (intercept + slope * x);
        ss += e * e;
    }
    LineFit {
        intercept,
        slope,
        rms: math::sqrt(ss / n),
    }
}
