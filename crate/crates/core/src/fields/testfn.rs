use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Test functions on the unit torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `k > 0`: `sqrt2 cos(2 pi k u)`; `k < 0`: `sqrt2 sin(2 pi |k| u)`; `k = 0`: 1.
    Fourier { k: i64 },
    /// Values on the grid `x/n`, `x = 0..n`, linearly interpolated and periodic.
    Tabulated { values: Vec<f64> },
    /// `i_eps(x)(u) = eps^-1 1{x <= u <= x + eps}` (on the torus).
    Indicator { start: f64, eps: f64 },
}

fn frac(u: f64) -> f64 {
    u - u.floor()
}

impl TestFunction {
    pub fn fourier(k: i64) -> Self {
        Self::Fourier { k }
    }

    pub fn indicator(start: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return invalid(format!("indicator width {eps} outside (0,1]"));
        }
        Ok(Self::Indicator { start, eps })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Fourier { k } => {
                let w = 2.0 * PI * k.unsigned_abs() as f64;
                match k.signum() {
                    0 => 1.0,
                    1 => SQRT_2 * (w * u).cos(),
                    _ => SQRT_2 * (w * u).sin(),
                }
            }
            Self::Tabulated { values } => {
                let m = values.len();
                let s = frac(u) * m as f64;
                if (s - s.round()).abs() < 1e-9 {
                    return values[(s.round() as usize) % m];
                }
                let i = (s.floor() as usize) % m;
                let r = s - s.floor();
                (1.0 - r) * values[i] + r * values[(i + 1) % m]
            }
            Self::Indicator { start, eps } => {
                if frac(u - start) <= *eps {
                    1.0 / eps
                } else {
                    0.0
                }
            }
        }
    }

    /// Continuous derivative in `u` (one-sided slope for tabulated data, zero for indicators).
    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Self::Fourier { k } => {
                let w = 2.0 * PI * k.unsigned_abs() as f64;
                match k.signum() {
                    0 => 0.0,
                    1 => -SQRT_2 * w * (w * u).sin(),
                    _ => SQRT_2 * w * (w * u).cos(),
                }
            }
            Self::Tabulated { values } => {
                let m = values.len();
                let i = ((frac(u) * m as f64).floor() as usize) % m;
                (values[(i + 1) % m] - values[i]) * m as f64
            }
            Self::Indicator { .. } => 0.0,
        }
    }

    /// Site weights `f((x - shift)/n)` for `x = 0..n`.
    pub fn sample(&self, n: usize, shift: f64) -> Vec<f64> {
        (0..n).map(|x| self.eval((x as f64 - shift) / n as f64)).collect()
    }

    /// `||f||_2^2` on the torus (exact for Fourier modes and indicators).
    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            Self::Fourier { .. } => 1.0,
            Self::Tabulated { values } => values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64,
            Self::Indicator { eps, .. } => 1.0 / eps,
        }
    }

    /// `||f'||_2^2` (exact for Fourier modes, discrete for tabulated data).
    pub fn grad_l2_norm_sq(&self) -> f64 {
        match self {
            Self::Fourier { k } => (2.0 * PI * *k as f64).powi(2),
            Self::Tabulated { values } => {
                let m = values.len();
                (0..m).map(|i| ((values[(i + 1) % m] - values[i]) * m as f64).powi(2)).sum::<f64>() / m as f64
            }
            Self::Indicator { .. } => f64::INFINITY,
        }
    }

    /// Exact second derivative for Fourier modes.
    pub fn laplacian_factor(&self) -> Option<f64> {
        match self {
            Self::Fourier { k } => Some(-(2.0 * PI * *k as f64).powi(2)),
            _ => None,
        }
    }
}

/// `(grad_n^+ f, Delta_n f)` on the grid `x/n`:
/// `n (f((x+1)/n) - f(x/n))` and `n^2 (f((x+1)/n) - 2 f(x/n) + f((x-1)/n))`.
pub fn discrete_operators(f: &TestFunction, n: usize) -> (TestFunction, TestFunction) {
    let v = f.sample(n, 0.0);
    let (g, l) = discrete_derivatives(&v);
    (TestFunction::Tabulated { values: g }, TestFunction::Tabulated { values: l })
}

/// Periodic discrete derivative and Laplacian of site values on a grid of `n = v.len()` points.
pub fn discrete_derivatives(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let nf = n as f64;
    let grad = (0..n).map(|x| nf * (v[(x + 1) % n] - v[x])).collect();
    let lap = (0..n)
        .map(|x| nf * nf * (v[(x + 1) % n] - 2.0 * v[x] + v[(x + n - 1) % n]))
        .collect();
    (grad, lap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fourier_values() {
        assert_eq!(TestFunction::fourier(0).eval(0.3), 1.0);
        assert_relative_eq!(TestFunction::fourier(1).eval(0.0), SQRT_2);
        assert_relative_eq!(TestFunction::fourier(-1).eval(0.25), SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn fourier_modes_are_orthonormal_on_a_fine_grid() {
        let n = 4096;
        for (a, b) in [(1, 1), (1, 2), (2, -2), (-3, -3), (0, 1)] {
            let fa = TestFunction::fourier(a).sample(n, 0.0);
            let fb = TestFunction::fourier(b).sample(n, 0.0);
            let ip: f64 = fa.iter().zip(&fb).map(|(x, y)| x * y).sum::<f64>() / n as f64;
            assert_relative_eq!(ip, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn indicator_integrates_to_one() {
        let f = TestFunction::indicator(0.9, 0.25).unwrap();
        let m = 100_000;
        let s: f64 = (0..m).map(|i| f.eval((i as f64 + 0.5) / m as f64)).sum::<f64>() / m as f64;
        assert_relative_eq!(s, 1.0, epsilon = 1e-4);
        assert!(TestFunction::indicator(0.0, 0.0).is_err());
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let (g, l) = discrete_operators(&TestFunction::fourier(0), 32);
        for u in [0.0, 0.3, 0.77] {
            assert_eq!(g.eval(u), 0.0);
            assert_eq!(l.eval(u), 0.0);
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let f = TestFunction::Tabulated { values: vec![0.0, 1.0, 2.0, 3.0] };
        assert_relative_eq!(f.eval(0.125), 0.5);
        assert_relative_eq!(f.eval(1.125), 0.5);
        assert_relative_eq!(f.derivative(0.3), 4.0);
    }
}
