//! Monotone cubic (Fritsch-Carlson) interpolation, used to resample
//! tabulated initial data onto a grid.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum InterpError {
    /// Fewer than two samples, or mismatched lengths.
    TooFewSamples,
    /// Abscissae not strictly increasing.
    NonMonotonicAbscissae,
    /// A target point lies outside the sampled range.
    OutOfRange,
}

/// Evaluates the Fritsch-Carlson monotone cubic through `(xs, ys)` at
/// `targets`. Preserves monotonicity of the data and never overshoots.
pub(crate) fn monotone_cubic_resample(
    xs: &[f64],
    ys: &[f64],
    targets: &[f64],
) -> Result<Vec<f64>, InterpError> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(InterpError::TooFewSamples);
    }
    for i in 1..xs.len() {
        if !(xs[i] > xs[i - 1]) {
            return Err(InterpError::NonMonotonicAbscissae);
        }
    }
    let n = xs.len();
    let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

    // Node slopes: three-point endpoint formulas with monotonicity clamps,
    // weighted harmonic mean in the interior where the secants agree in sign.
    let mut m = alloc::vec![0.0; n];
    m[0] = endpoint_slope(h[0], h[1.min(n - 2)], d[0], d[1.min(n - 2)]);
    m[n - 1] = endpoint_slope(
        h[n - 2],
        h[n.saturating_sub(3).min(n - 2)],
        d[n - 2],
        d[n.saturating_sub(3).min(n - 2)],
    );
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }

    let mut out = Vec::with_capacity(targets.len());
    for &x in targets {
        if x < xs[0] || x > xs[n - 1] {
            return Err(InterpError::OutOfRange);
        }
        // Interval containing x.
        let k = match xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let t = (x - xs[k]) / h[k];
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        out.push(h00 * ys[k] + h10 * h[k] * m[k] + h01 * ys[k + 1] + h11 * h[k] * m[k + 1]);
    }
    Ok(out)
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn exact_on_linear_data() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let out = monotone_cubic_resample(&xs, &ys, &t).unwrap();
        for (v, x) in out.iter().zip(&t) {
            assert!((v - (2.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            monotone_cubic_resample(&[0.0], &[1.0], &[0.0]),
            Err(InterpError::TooFewSamples)
        );
        assert_eq!(
            monotone_cubic_resample(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0], &[0.5]),
            Err(InterpError::NonMonotonicAbscissae)
        );
        assert_eq!(
            monotone_cubic_resample(&[0.0, 1.0], &[1.0, 2.0], &[1.5]),
            Err(InterpError::OutOfRange)
        );
    }

    proptest! {
        // Monotone data stays monotone after resampling.
        #[test]
        fn preserves_monotonicity(mut incr in proptest::collection::vec(0.01..1.0f64, 5..30)) {
            let mut xs = alloc::vec![0.0];
            let mut ys = alloc::vec![0.0];
            let mut x = 0.0;
            let mut y = 0.0;
            for (i, dy) in incr.drain(..).enumerate() {
                x += 0.3 + 0.1 * (i % 3) as f64;
                y += dy;
                xs.push(x);
                ys.push(y);
            }
            let targets: Vec<f64> = (0..200).map(|i| x * (i as f64 / 199.0)).collect();
            let out = monotone_cubic_resample(&xs, &ys, &targets).unwrap();
            for w in out.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }
}
