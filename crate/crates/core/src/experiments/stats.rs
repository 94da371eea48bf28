//! Summary statistics for Monte Carlo outputs.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z_95_TWO_SIDED: f64 = 1.959_963_984_540_054;
/// One-sided 95% normal quantile.
pub const Z_95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std_dev: f64,
    pub std_error: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub half_width: f64,
}

/// Mean and spread of `values`, summed in slice order.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            std_dev: f64::NAN,
            std_error: f64::NAN,
            half_width: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    let std_error = std_dev / (n as f64).sqrt();
    Summary {
        n,
        mean,
        std_dev,
        std_error,
        half_width: Z_95_TWO_SIDED * std_error,
    }
}

/// One-sided paired test of `mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedTest {
    pub mean_difference: f64,
    pub std_error: f64,
    /// `mean / std_error`; infinite when every difference is equal and positive.
    pub z: f64,
    /// `z` exceeds the one-sided 95% quantile.
    pub significant: bool,
}

pub fn paired_greater(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s = summarize(&diff);
    let z = if s.std_error > 0.0 {
        s.mean / s.std_error
    } else if s.mean > 0.0 {
        f64::INFINITY
    } else if s.mean < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    PairedTest {
        mean_difference: s.mean,
        std_error: s.std_error,
        z,
        significant: z > Z_95_ONE_SIDED,
    }
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len(), "regression needs paired samples");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    LineFit {
        slope,
        intercept: my - slope * mx,
    }
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols(&lx, &ly).slope
}

/// Empirical CDF as `(value, fraction of samples <= value)` at each distinct value.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    out
}

/// Linear-interpolation quantile of the sorted sample (`q ∈ [0, 1]`).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.half_width - Z_95_TWO_SIDED * s.std_dev / 2.0).abs() < 1e-15);
        assert_eq!(summarize(&[3.0]).std_error, 0.0);
    }

    #[test]
    fn paired_test_cases() {
        let t = paired_greater(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]);
        assert!(t.significant && t.z.is_infinite());
        let t = paired_greater(&[1.0, 2.0], &[1.0, 2.0]);
        assert!(!t.significant);
        let t = paired_greater(&[1.1, 0.9, 1.2, 0.8], &[1.0, 1.0, 1.0, 1.0]);
        assert!(!t.significant);
    }

    #[test]
    fn regression_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 2.0).collect();
        let f = ols(&x, &y);
        assert!((f.slope - 0.5).abs() < 1e-14 && (f.intercept + 2.0).abs() < 1e-14);
        let m = [256.0, 1024.0, 4096.0];
        let load: Vec<f64> = m.iter().map(|v: &f64| 3.0 * v.powf(0.4)).collect();
        assert!((log_log_slope(&m, &load) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ecdf_and_quantiles() {
        assert_eq!(ecdf(&[3.0, 1.0, 1.0, 2.0]), vec![(1.0, 0.5), (2.0, 0.75), (3.0, 1.0)]);
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.5), 2.5);
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 1.0), 4.0);
    }
}
