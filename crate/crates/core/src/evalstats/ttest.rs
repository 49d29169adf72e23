//! Paired two-sided t-test with confidence intervals and paired Cohen's d.
//!
//! The t-distribution CDF is computed from the regularized incomplete beta
//! function (continued fraction, modified Lentz), accurate to well below
//! 1e-8; no statistics package is involved.

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    /// Mean of the paired differences `a - b`.
    pub delta: f64,
    pub ci99: (f64, f64),
    pub p_value: f64,
    pub t_stat: f64,
    /// Paired Cohen's d: `mean(diff) / std(diff)`.
    pub d_z: f64,
    pub significant: bool,
    /// Zero-variance differences: p and d_z are limits, not estimates.
    pub degenerate: bool,
    pub n: usize,
}

/// Two-sided paired t-test of `a` against `b` at significance `alpha`
/// (pair i is `a[i] - b[i]`).
pub fn paired_ttest(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            scores: a.len(),
            labels: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let df = (n - 1) as f64;

    if sd == 0.0 {
        // All differences identical: p collapses to a limit.
        let (p, d_z) = if mean == 0.0 {
            (1.0, 0.0)
        } else {
            (0.0, mean.signum() * f64::INFINITY)
        };
        return Ok(StatTestResult {
            delta: mean,
            ci99: (mean, mean),
            p_value: p,
            t_stat: if mean == 0.0 {
                0.0
            } else {
                mean.signum() * f64::INFINITY
            },
            d_z,
            significant: p < alpha,
            degenerate: true,
            n,
        });
    }

    let se = sd / (n as f64).sqrt();
    let t = mean / se;
    // Two-sided p = P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
    let p = incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    let tq = t_quantile(1.0 - alpha / 2.0, df);
    Ok(StatTestResult {
        delta: mean,
        ci99: (mean - tq * se, mean + tq * se),
        p_value: p,
        t_stat: t,
        d_z: mean / sd,
        significant: p < alpha,
        degenerate: false,
        n,
    })
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail2 = incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    if t >= 0.0 {
        1.0 - tail2 / 2.0
    } else {
        tail2 / 2.0
    }
}

/// Quantile of Student's t via bisection on the CDF.
pub fn t_quantile(q: f64, df: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0);
    if (q - 0.5).abs() < 1e-15 {
        return 0.0;
    }
    if q < 0.5 {
        return -t_quantile(1.0 - q, df);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while t_cdf(hi, df) < q {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_1,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_312e-7,
    ];
    if z < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}
