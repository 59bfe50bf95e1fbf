//! Small statistics helpers shared by the estimators.

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(mean: f64, se: f64) -> Self {
        Self { mean, se }
    }

    /// `|mean - target| <= k se` (with a tiny floor so exact zeros compare).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + 1e-12 * (1.0 + target.abs())
    }

    pub fn z_score(&self, target: f64) -> f64 {
        if self.se > 0.0 {
            (self.mean - target) / self.se
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6} ± {:.6}", self.mean, self.se)
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Estimate::new(m, f64::INFINITY);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    Estimate::new(m, (v / n as f64).sqrt())
}

/// Mean with a batch-means standard error over `batches` contiguous batches.
pub fn batch_means(xs: &[f64], batches: usize) -> Estimate {
    let b = batches.clamp(2, xs.len().max(2));
    if xs.len() < 2 * b {
        return mean_se(xs);
    }
    let size = xs.len() / b;
    let means: Vec<f64> = (0..b).map(|i| xs[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let all = mean_se(xs).mean;
    Estimate::new(all, mean_se(&means).se)
}

/// Sample covariance of paired samples with a delta-method standard error.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    let n = xs.len().min(ys.len());
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let prods: Vec<f64> = (0..n).map(|i| (xs[i] - mx) * (ys[i] - my)).collect();
    let e = mean_se(&prods);
    Estimate::new(e.mean * n as f64 / (n as f64 - 1.0).max(1.0), e.se)
}

/// Cumulative trapezoid integral of `ys` over the grid `ts`, starting at 0.
pub fn cumulative_trapezoid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ys.len());
    let mut acc = 0.0;
    for i in 0..ys.len() {
        if i > 0 {
            acc += 0.5 * (ts[i] - ts[i - 1]) * (ys[i] + ys[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Weighted least squares line `y = a + b x`.  Returns `(a, b, se_b, r2)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (c - icept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().zip(w).map(|(c, b)| b * (c - my).powi(2)).sum();
    let se = (1.0 / sxx).sqrt();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (icept, slope, se, r2)
}
