//! Small statistics helpers shared by the Monte Carlo modules.

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(samples: &[f64]) -> Estimate {
    let n = samples.len();
    assert!(n >= 1, "mean_stderr needs at least one sample");
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Estimate { value: mean, stderr: 0.0 };
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    Estimate { value: mean, stderr: (var / n as f64).sqrt() }
}

/// Binomial proportion estimate from a success count.
pub fn binomial_estimate(successes: u64, reps: u64) -> Estimate {
    assert!(reps >= 1);
    let p = successes as f64 / reps as f64;
    Estimate { value: p, stderr: (p * (1.0 - p) / reps as f64).sqrt() }
}

/// max/min over a slice of positive values; `None` when fewer than two.
pub fn band_ratio(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        return None;
    }
    Some(hi / lo)
}
