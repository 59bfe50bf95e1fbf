//! Space-time correlations `S(x,t) = n^-1 sum_y g_{y+x}(t) g'_y(0)` of centred
//! channels, averaged over translations, time origins and trajectories.

use std::io::Write;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::density::Channel;
use crate::engine::TrajectoryRecord;
use crate::error::{invalid, Result};
use crate::lattice::ProductMeasure;
use crate::stats::{mean_se, Estimate};

/// Signed displacement in `(-n/2, n/2]` for a ring offset `x`.
pub fn signed_offset(x: usize, n: usize) -> i64 {
    if 2 * x > n {
        x as i64 - n as i64
    } else {
        x as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    pub n: usize,
    /// Lag times, in the record's time units.
    pub times: Vec<f64>,
    /// `values[lag][x]` for ring offsets `x = 0..n`.
    pub values: Vec<Vec<f64>>,
    /// Standard errors across trajectories.
    pub se: Vec<Vec<f64>>,
    pub trajectories: usize,
    /// Means over contiguous batches of trajectories, `batches[b][lag][x]`.
    pub batches: Vec<Vec<Vec<f64>>>,
}

/// Number of trajectory batches kept for derived standard errors.
pub const BATCHES: usize = 20;

impl StructureFunction {
    /// A derived statistic of one lag row, with its batch-means standard error.
    pub fn batch_estimate(&self, lag: usize, f: impl Fn(&[f64]) -> f64) -> Estimate {
        let whole = f(&self.values[lag]);
        if self.batches.len() < 2 {
            return Estimate::new(whole, f64::INFINITY);
        }
        let per: Vec<f64> = self.batches.iter().map(|b| f(&b[lag])).collect();
        Estimate::new(whole, mean_se(&per).se)
    }

    /// `sum_x S(x,t)`.
    pub fn mass(&self, lag: usize) -> Estimate {
        self.batch_estimate(lag, |row| row.iter().sum())
    }

    /// Rows `t,x,S` with `x` signed and increasing.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,S")?;
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| signed_offset(x, n));
        for (t, row) in self.times.iter().zip(&self.values) {
            for &x in &order {
                writeln!(w, "{t},{},{}", signed_offset(x, n), row[x])?;
            }
        }
        Ok(())
    }
}

/// Cross-correlation `S[x] = n^-1 sum_y a[y+x] b[y]` on a ring.
pub fn cross_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut p: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    inv.process(&mut p);
    let norm = (n * n) as f64;
    p.iter().map(|c| c.re / norm).collect()
}

fn check_uniform(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Ok(());
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) + 1e-12 {
            return invalid("time-origin averaging needs a uniform sample grid");
        }
    }
    Ok(())
}

/// Time-origin averaged `S` for one record at the given lags (in samples).
/// Origins are every `origin_stride` samples with `origin + max lag` in range.
pub fn trajectory_structure(
    record: &TrajectoryRecord,
    measure: &ProductMeasure,
    a: Channel,
    b: Channel,
    lags: &[usize],
    origin_stride: usize,
) -> Result<Vec<Vec<f64>>> {
    check_uniform(&record.times)?;
    let n = record.n;
    let len = record.samples.len();
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if max_lag >= len {
        return invalid(format!("lag {max_lag} exceeds the {len} recorded samples"));
    }
    let origins: Vec<usize> = (0..len - max_lag).step_by(origin_stride.max(1)).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let spectrum = |i: usize, ch: Channel| {
        let mut v: Vec<Complex64> =
            ch.centred(&record.samples[i], measure).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        fwd.process(&mut v);
        v
    };
    let mut needed = vec![false; len];
    for &o in &origins {
        for &l in lags {
            needed[o + l] = true;
        }
    }
    let fa: Vec<Option<Vec<Complex64>>> =
        (0..len).map(|i| if needed[i] { Some(spectrum(i, a)) } else { None }).collect();
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); n]; lags.len()];
    for &o in &origins {
        let fb = spectrum(o, b);
        for (j, &l) in lags.iter().enumerate() {
            let x = fa[o + l].as_ref().expect("spectrum computed for every needed sample");
            for k in 0..n {
                acc[j][k] += x[k] * fb[k].conj();
            }
        }
    }
    let norm = (n * n * origins.len()) as f64;
    Ok(acc
        .into_iter()
        .map(|mut p| {
            inv.process(&mut p);
            p.iter().map(|c| c.re / norm).collect()
        })
        .collect())
}

/// Combine per-trajectory correlations into means with standard errors.
pub fn combine_structure(n: usize, times: Vec<f64>, per: &[Vec<Vec<f64>>]) -> StructureFunction {
    let lags = times.len();
    let mut values = vec![vec![0.0; n]; lags];
    let mut se = vec![vec![0.0; n]; lags];
    let mut column = vec![0.0; per.len()];
    for j in 0..lags {
        for x in 0..n {
            for (r, p) in per.iter().enumerate() {
                column[r] = p[j][x];
            }
            let e = mean_se(&column);
            values[j][x] = e.mean;
            se[j][x] = e.se;
        }
    }
    let nb = BATCHES.min(per.len());
    let batches = (0..nb)
        .map(|b| {
            let members: Vec<&Vec<Vec<f64>>> =
                per.iter().enumerate().filter(|(i, _)| i * nb / per.len() == b).map(|(_, p)| p).collect();
            let k = members.len() as f64;
            (0..lags)
                .map(|j| (0..n).map(|x| members.iter().map(|p| p[j][x]).sum::<f64>() / k).collect())
                .collect()
        })
        .collect();
    StructureFunction { n, times, values, se, trajectories: per.len(), batches }
}

/// Ensemble structure function over records sharing a sample grid.
pub fn structure_function(
    records: &[TrajectoryRecord],
    measure: &ProductMeasure,
    a: Channel,
    b: Channel,
    lags: &[usize],
    origin_stride: usize,
) -> Result<StructureFunction> {
    let first = records.first().ok_or_else(|| crate::error::Error::InvalidParameter("empty ensemble".into()))?;
    let per: Vec<Vec<Vec<f64>>> = records
        .iter()
        .map(|r| trajectory_structure(r, measure, a, b, lags, origin_stride))
        .collect::<Result<_>>()?;
    let times = lags.iter().map(|&l| first.times[l] - first.times[0]).collect();
    Ok(combine_structure(first.n, times, &per))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fft_correlation_matches_direct() {
        let n = 12;
        let a: Vec<f64> = (0..n).map(|i| ((i * 5) % 7) as f64 - 3.0).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 3) % 5) as f64 - 2.0).collect();
        let s = cross_correlation(&a, &b);
        for x in 0..n {
            let d: f64 = (0..n).map(|y| a[(y + x) % n] * b[y]).sum::<f64>() / n as f64;
            assert_relative_eq!(s[x], d, epsilon = 1e-12);
        }
    }

    #[test]
    fn offsets_are_signed() {
        assert_eq!(signed_offset(0, 8), 0);
        assert_eq!(signed_offset(4, 8), 4);
        assert_eq!(signed_offset(5, 8), -3);
    }
}
