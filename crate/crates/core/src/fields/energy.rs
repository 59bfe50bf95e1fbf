//! Energy-estimate statistics and the mollified nonlinear term.
//!
//! With `l = round(eps n)` and `eps` replaced by `l/n`,
//! `Y(i_eps(x/n)) = n^{-1/2} eps^{-1} sum_{y=x}^{x+l-1} c_y` and
//! `A^eps_{s,t}(f) = int_s^t n^-1 sum_x grad_n f(x/n) Y_r(i_eps(x/n))^2 dr`.

use super::density::{pair, Channel, FieldSeries};
use super::martingale::check_grid;
use super::testfn::{discrete_derivatives, TestFunction};
use crate::engine::TrajectoryRecord;
use crate::error::{invalid, Result};
use crate::lattice::{Configuration, ProductMeasure};
use crate::stats::{cumulative_trapezoid, mean_se, Estimate};

/// Box length used for a mollifier of width `eps` at size `n`.
pub fn box_length(eps: f64, n: usize) -> Result<usize> {
    let l = (eps * n as f64).round() as usize;
    if l == 0 || l > n {
        return invalid(format!("mollifier width {eps} gives an empty box at n = {n}"));
    }
    Ok(l)
}

/// `n^-1 sum_x grad_n f(x/n) Y(i_eps(x/n))^2` at one configuration.
pub fn nonlinear_integrand(
    config: &Configuration,
    grad: &[f64],
    l: usize,
    measure: &ProductMeasure,
    channel: Channel,
) -> f64 {
    let n = config.len();
    let nf = n as f64;
    let c = channel.centred(config, measure);
    let eps = l as f64 / nf;
    let mut window: f64 = (0..l).map(|y| c[y % n]).sum();
    let mut acc = 0.0;
    for x in 0..n {
        let y = window / (eps * nf.sqrt());
        acc += grad[x] * y * y;
        window += c[(x + l) % n] - c[x];
    }
    acc / nf
}

fn window(record: &TrajectoryRecord, s: f64, t: f64) -> Result<(usize, usize)> {
    if s > t {
        return invalid(format!("time window [{s}, {t}] is reversed"));
    }
    let tol = 1e-9 * (1.0 + t.abs());
    let a = record.times.iter().position(|&r| r >= s - tol);
    let b = record.times.iter().rposition(|&r| r <= t + tol);
    match (a, b) {
        (Some(a), Some(b)) if a <= b => Ok((a, b)),
        _ => invalid(format!("no samples in [{s}, {t}]")),
    }
}

fn integrate(times: &[f64], ys: &[f64]) -> f64 {
    *cumulative_trapezoid(times, ys).last().unwrap_or(&0.0)
}

/// The series `t -> A^eps_{0,t}(f)` along a record.
pub fn nonlinear_series(
    record: &TrajectoryRecord,
    f: &TestFunction,
    eps: f64,
    measure: &ProductMeasure,
    channel: Channel,
) -> Result<FieldSeries> {
    check_grid(&record.times)?;
    let (grad, _) = discrete_derivatives(&f.sample(record.n, 0.0));
    let l = box_length(eps, record.n)?;
    let ys: Vec<f64> =
        record.samples.iter().map(|c| nonlinear_integrand(c, &grad, l, measure, channel)).collect();
    Ok(FieldSeries {
        label: format!("A^{eps}"),
        times: record.times.clone(),
        values: cumulative_trapezoid(&record.times, &ys),
    })
}

/// Per-trajectory values `(int_s^t Y_r(Delta f) dr, A^eps_{s,t}(f) - A^delta_{s,t}(f))`.
#[allow(clippy::too_many_arguments)]
pub fn energy_integrals(
    record: &TrajectoryRecord,
    f: &TestFunction,
    eps: f64,
    delta: f64,
    s: f64,
    t: f64,
    measure: &ProductMeasure,
    channel: Channel,
) -> Result<(f64, f64)> {
    if !(eps > delta && delta > 0.0) {
        return invalid(format!("need eps > delta > 0, got eps = {eps}, delta = {delta}"));
    }
    check_grid(&record.times)?;
    let (a, b) = window(record, s, t)?;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let n = record.n;
    let (grad, lap) = discrete_derivatives(&f.sample(n, 0.0));
    let (le, ld) = (box_length(eps, n)?, box_length(delta, n)?);
    let times = &record.times[a..=b];
    let mut y1 = Vec::with_capacity(times.len());
    let mut y2 = Vec::with_capacity(times.len());
    for c in &record.samples[a..=b] {
        y1.push(pair(&lap, &channel.centred(c, measure)));
        y2.push(nonlinear_integrand(c, &grad, le, measure, channel) - nonlinear_integrand(c, &grad, ld, measure, channel));
    }
    Ok((integrate(times, &y1), integrate(times, &y2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStats {
    /// `E[(int_s^t Y_r(Delta f) dr)^2]`.
    pub linear: Estimate,
    /// `E[(A^eps_{s,t}(f) - A^delta_{s,t}(f))^2]`.
    pub nonlinear: Estimate,
}

/// Second moments of per-trajectory pairs from [`energy_integrals`].
pub fn energy_stats(pairs: &[(f64, f64)]) -> EnergyStats {
    let a: Vec<f64> = pairs.iter().map(|p| p.0 * p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1 * p.1).collect();
    EnergyStats { linear: mean_se(&a), nonlinear: mean_se(&b) }
}

#[allow(clippy::too_many_arguments)]
pub fn energy_estimate_stats(
    records: &[TrajectoryRecord],
    f: &TestFunction,
    eps: f64,
    delta: f64,
    s: f64,
    t: f64,
    measure: &ProductMeasure,
    channel: Channel,
) -> Result<EnergyStats> {
    let pairs: Vec<(f64, f64)> =
        records.iter().map(|r| energy_integrals(r, f, eps, delta, s, t, measure, channel)).collect::<Result<_>>()?;
    Ok(energy_stats(&pairs))
}

/// Sum of squared increments of a series sampled every `stride` points.
pub fn quadratic_variation(series: &FieldSeries, stride: usize) -> f64 {
    let stride = stride.max(1);
    let v: Vec<f64> = series.values.iter().step_by(stride).copied().collect();
    v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_configuration, Lattice};
    use approx::assert_relative_eq;

    #[test]
    fn integrand_matches_direct_definition() {
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let n = 50;
        let c = sample_configuration(&mu, &Lattice::ring(n).unwrap(), 2).unwrap();
        let grad: Vec<f64> = (0..n).map(|x| (x as f64).cos()).collect();
        let l = 7;
        let eps = l as f64 / n as f64;
        let cen = Channel::occupation().centred(&c, &mu);
        let direct: f64 = (0..n)
            .map(|x| {
                let y: f64 = (0..l).map(|k| cen[(x + k) % n]).sum::<f64>() / eps / (n as f64).sqrt();
                grad[x] * y * y
            })
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(nonlinear_integrand(&c, &grad, l, &mu, Channel::occupation()), direct, epsilon = 1e-10);
    }

    #[test]
    fn constant_function_gives_zero() {
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let c = sample_configuration(&mu, &Lattice::ring(32).unwrap(), 5).unwrap();
        let (g, _) = discrete_derivatives(&TestFunction::fourier(0).sample(32, 0.0));
        assert_eq!(nonlinear_integrand(&c, &g, 4, &mu, Channel::occupation()), 0.0);
    }

    #[test]
    fn qv_of_smooth_series_vanishes_with_mesh() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let s = FieldSeries { label: "x".into(), values: times.iter().map(|t| t * t).collect(), times };
        assert!(quadratic_variation(&s, 1) < quadratic_variation(&s, 10));
        assert!(quadratic_variation(&s, 1) < 2e-3);
    }
}
