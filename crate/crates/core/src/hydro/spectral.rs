//! Fourier-multiplier solvers on the torus and closed-form mode covariances.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

use super::grid::GridFunction;
use crate::dynamics::RateModel;
use crate::error::{invalid, Error, Result};

/// Signed frequency of FFT bin `j` on `m` points.
fn frequency(j: usize, m: usize) -> f64 {
    if 2 * j > m {
        j as f64 - m as f64
    } else {
        j as f64
    }
}

fn apply_multiplier(values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::new();
    let mut v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut v);
    for (j, c) in v.iter_mut().enumerate() {
        *c *= symbol(frequency(j, m));
    }
    planner.plan_fft_inverse(m).process(&mut v);
    v.iter().map(|c| c.re / m as f64).collect()
}

fn solve_multiplier(init: &GridFunction, t: f64, rate: impl Fn(f64) -> f64) -> Result<GridFunction> {
    if t < 0.0 {
        return invalid(format!("negative time {t}"));
    }
    let sym = |k: f64| (-rate(k) * t).exp();
    Ok(GridFunction {
        values: apply_multiplier(&init.values, sym),
        second: init.second.as_ref().map(|s| apply_multiplier(s, sym)),
        time: init.time + t,
    })
}

/// `d_t rho = D d_uu rho`, exact per Fourier mode.
pub fn solve_heat(init: &GridFunction, t: f64, diffusivity: f64) -> Result<GridFunction> {
    solve_multiplier(init, t, |k| diffusivity * (2.0 * PI * k).powi(2))
}

/// `d_t rho = -c (-Delta)^{alpha/2} rho` with multiplier `|2 pi k|^alpha`.
pub fn solve_fractional_heat(init: &GridFunction, t: f64, alpha: f64, c: f64) -> Result<GridFunction> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return invalid(format!("fractional exponent {alpha} outside (0,2]"));
    }
    solve_multiplier(init, t, |k| c * (2.0 * PI * k.abs()).powf(alpha))
}

/// `int_0^inf (1 - cos r) r^{-1-alpha} dr = pi / (2 Gamma(1+alpha) sin(pi alpha / 2))`.
pub fn stable_constant(alpha: f64) -> f64 {
    PI / (2.0 * gamma(1.0 + alpha) * (PI * alpha / 2.0).sin())
}

/// Macroscopic coefficient `c` of the fractional heat equation for the
/// symmetric long-jump model with kernel `c_+ z^{-1-alpha}`, `c_- z^{-1-alpha}`.
pub fn long_jump_coefficient(model: &RateModel) -> Result<f64> {
    match *model {
        RateModel::LongJump { alpha, c_plus, c_minus, .. } => {
            if !(alpha > 0.0 && alpha < 2.0) {
                return invalid(format!("alpha = {alpha} outside (0,2)"));
            }
            Ok((c_plus + c_minus) * stable_constant(alpha))
        }
        _ => Err(Error::Incompatible("fractional coefficient needs the long-jump model".into())),
    }
}

/// Stationary time covariance of Fourier mode `k` for `dY = A Delta Y dt + sqrt(C) grad dW`:
/// `C/(2A) exp(-A (2 pi k)^2 t)`.
pub fn ou_mode_covariance(k: i64, t: f64, a_coef: f64, c_coef: f64) -> Result<f64> {
    if a_coef <= 0.0 {
        return invalid(format!("A = {a_coef} must be positive"));
    }
    let w = 2.0 * PI * k as f64;
    Ok(c_coef / (2.0 * a_coef) * (-a_coef * w * w * t.abs()).exp())
}
