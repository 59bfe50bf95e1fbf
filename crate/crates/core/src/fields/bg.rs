//! Second-order Boltzmann-Gibbs residuals.
//!
//! For a weight vector `v` on the ring and a box size `L` the residual of one
//! trajectory is `int_0^t sum_x v(x) { c_x c_{x+1} - (R^L_x)^2 + chi/L } ds`,
//! with `c` the centred occupations and `R^L_x` the right box mean over
//! `x+1..=x+L`. The estimator is the ensemble second moment of that integral.

use super::density::Channel;
use super::martingale::check_grid;
use crate::engine::TrajectoryRecord;
use crate::error::{invalid, Result};
use crate::lattice::{Configuration, ProductMeasure};
use crate::stats::{cumulative_trapezoid, mean_se, Estimate};

/// `||v||^2_{2,n} = n^-1 sum_x v(x)^2`.
pub fn weight_norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64
}

/// The bound shape `t (L/n + t n / L^2)`.
pub fn bound_shape(t: f64, l: usize, n: usize) -> f64 {
    let (l, n) = (l as f64, n as f64);
    t * (l / n + t * n / (l * l))
}

/// Box sums over a periodic array via a doubled prefix sum.
struct Boxes {
    prefix: Vec<f64>,
    n: usize,
}

impl Boxes {
    fn new(c: &[f64]) -> Self {
        let n = c.len();
        let mut prefix = Vec::with_capacity(2 * n + 1);
        prefix.push(0.0);
        for i in 0..2 * n {
            let p = prefix[i] + c[i % n];
            prefix.push(p);
        }
        Self { prefix, n }
    }

    /// Mean over `x+1..=x+l`.
    fn right(&self, x: usize, l: usize) -> f64 {
        (self.prefix[x + 1 + l] - self.prefix[x + 1]) / l as f64
    }

    /// Mean over `x-l..=x-1`.
    fn left(&self, x: usize, l: usize) -> f64 {
        let x = x + self.n;
        (self.prefix[x] - self.prefix[x - l]) / l as f64
    }
}

fn check_boxes(ls: &[usize], n: usize) -> Result<()> {
    for &l in ls {
        if l == 0 || 2 * l > n {
            return invalid(format!("box size {l} outside 1..=n/2"));
        }
    }
    Ok(())
}

fn exclusion_centred(config: &Configuration, measure: &ProductMeasure) -> Vec<f64> {
    Channel::occupation().centred(config, measure)
}

/// Integrand of the residual at one configuration, one value per box size.
pub fn bg_integrand(config: &Configuration, v: &[f64], ls: &[usize], measure: &ProductMeasure) -> Result<Vec<f64>> {
    let n = config.len();
    if v.len() != n {
        return invalid(format!("weight vector has {} entries for n = {n}", v.len()));
    }
    check_boxes(ls, n)?;
    let c = exclusion_centred(config, measure);
    let b = Boxes::new(&c);
    let chi = measure.chi()?;
    Ok(ls
        .iter()
        .map(|&l| {
            (0..n)
                .filter(|&x| v[x] != 0.0)
                .map(|x| v[x] * (c[x] * c[(x + 1) % n] - b.right(x, l).powi(2) + chi / l as f64))
                .sum()
        })
        .collect())
}

/// Time integrals of the residual over the whole record, one per box size.
pub fn bg_time_integrals(
    record: &TrajectoryRecord,
    v: &[f64],
    ls: &[usize],
    measure: &ProductMeasure,
) -> Result<Vec<f64>> {
    check_grid(&record.times)?;
    let rows: Vec<Vec<f64>> =
        record.samples.iter().map(|c| bg_integrand(c, v, ls, measure)).collect::<Result<_>>()?;
    Ok((0..ls.len())
        .map(|j| {
            let ys: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            *cumulative_trapezoid(&record.times, &ys).last().unwrap_or(&0.0)
        })
        .collect())
}

/// Ensemble second moment of per-trajectory integrals.
pub fn second_moment(integrals: &[f64]) -> Estimate {
    let sq: Vec<f64> = integrals.iter().map(|a| a * a).collect();
    mean_se(&sq)
}

/// The residual for every box size over an ensemble of records.
pub fn bg_residual(
    records: &[TrajectoryRecord],
    v: &[f64],
    ls: &[usize],
    measure: &ProductMeasure,
) -> Result<Vec<Estimate>> {
    let per: Vec<Vec<f64>> = records.iter().map(|r| bg_time_integrals(r, v, ls, measure)).collect::<Result<_>>()?;
    Ok((0..ls.len()).map(|j| second_moment(&per.iter().map(|p| p[j]).collect::<Vec<_>>())).collect())
}

/// The six terms of the telescoped residual for an inner box `l0 <= l`:
/// one-block terms (1), (2), (4), the multiscale term (3) and the
/// two variance corrections (5), (6). They add up to the residual integrand.
pub fn bg_terms(config: &Configuration, v: &[f64], l0: usize, l: usize, measure: &ProductMeasure) -> Result<[f64; 6]> {
    let n = config.len();
    if v.len() != n {
        return invalid(format!("weight vector has {} entries for n = {n}", v.len()));
    }
    check_boxes(&[l0, l], n)?;
    if l0 > l {
        return invalid(format!("inner box {l0} larger than outer box {l}"));
    }
    let c = exclusion_centred(config, measure);
    let b = Boxes::new(&c);
    let chi = measure.chi()?;
    let lf = l as f64;
    let mut out = [0.0; 6];
    for x in 0..n {
        if v[x] == 0.0 {
            continue;
        }
        let (c0, c1) = (c[x], c[(x + 1) % n]);
        let r0 = b.right(x, l0);
        let lf0 = b.left(x, l0);
        let rl = b.right(x, l);
        let d = (c0 - c1).powi(2) / (2.0 * lf);
        let t = [
            c0 * (c1 - r0),
            r0 * (c0 - lf0),
            lf0 * (r0 - rl),
            rl * (lf0 - c0),
            c0 * rl - rl * rl + d,
            -d + chi / lf,
        ];
        for k in 0..6 {
            out[k] += v[x] * t[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_configuration, Lattice};
    use approx::assert_relative_eq;

    #[test]
    fn zero_weights_give_zero() {
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let c = sample_configuration(&mu, &Lattice::ring(64).unwrap(), 1).unwrap();
        let r = bg_integrand(&c, &[0.0; 64], &[1, 4, 32], &mu).unwrap();
        assert_eq!(r, vec![0.0; 3]);
    }

    #[test]
    fn box_helpers_match_direct_sums() {
        let c: Vec<f64> = (0..10).map(|i| (i * i % 7) as f64).collect();
        let b = Boxes::new(&c);
        let direct_r: f64 = (1..=3).map(|k| c[(8 + k) % 10]).sum::<f64>() / 3.0;
        let direct_l: f64 = (1..=4).map(|k| c[(10 + 2 - k) % 10]).sum::<f64>() / 4.0;
        assert_relative_eq!(b.right(8, 3), direct_r);
        assert_relative_eq!(b.left(2, 4), direct_l);
    }

    #[test]
    fn terms_add_up() {
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let c = sample_configuration(&mu, &Lattice::ring(128).unwrap(), 9).unwrap();
        let v: Vec<f64> = (0..128).map(|x| (x as f64 * 0.1).sin()).collect();
        let total = bg_integrand(&c, &v, &[16], &mu).unwrap()[0];
        let parts = bg_terms(&c, &v, 3, 16, &mu).unwrap();
        assert_relative_eq!(parts.iter().sum::<f64>(), total, epsilon = 1e-10);
    }

    #[test]
    fn oversized_box_is_refused() {
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let c = sample_configuration(&mu, &Lattice::ring(16).unwrap(), 1).unwrap();
        assert!(bg_integrand(&c, &[1.0; 16], &[9], &mu).is_err());
    }

    #[test]
    fn envelope_minimum() {
        // d/dL of L/n + t n / L^2 vanishes at L = (2 t)^{1/3} n^{2/3}
        let (t, n) = (0.1, 1024);
        let best = (1..=512).min_by(|&a, &b| bound_shape(t, a, n).total_cmp(&bound_shape(t, b, n))).unwrap();
        let pred = (2.0 * t).powf(1.0 / 3.0) * (n as f64).powf(2.0 / 3.0);
        assert!((best as f64 - pred).abs() < 1.0);
    }
}
