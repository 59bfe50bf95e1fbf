//! Dynkin decomposition `Y_t - Y_0 = I_t + K_t + M_t` along a sampled trajectory.
//!
//! With `j_x` the channel current across `[x, x+1]` and `D_x` the symmetric
//! part of the bond rates,
//!   `L Y(f) = n^{theta-3/2} sum_x grad f(x) j_x`,
//!   `I` integrates `n^{theta-3/2} sum_x grad f(x) D_x (v_x - v_{x+1})`,
//!   `K` integrates the remainder of the current plus the frame transport
//!   `d/ds Y(f_s) = -n^{-1/2} (v/n) sum_x f'((x - v s)/n) v-bar_x`.
//! For constant `D` and `theta = 2` the `I` integrand equals `D Y(Delta_n f)`.

use super::density::{pair, Channel, FieldSeries, MovingFrame};
use super::testfn::TestFunction;
use crate::dynamics::RateModel;
use crate::engine::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice, ProductMeasure};
use crate::stats::cumulative_trapezoid;

/// Minimum number of samples on which time integrals are computed.
pub const MIN_GRID_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub i: Vec<f64>,
    pub k: Vec<f64>,
    pub m: Vec<f64>,
    /// Cumulative sum of squared increments of `M` on the sample grid.
    pub realized_qv: Vec<f64>,
    /// Trapezoid integral of the carre du champ `Gamma(Y)`.
    pub predictable_qv: Vec<f64>,
}

impl Decomposition {
    pub fn series(&self) -> [FieldSeries; 3] {
        let mk = |label: &str, v: &Vec<f64>| FieldSeries { label: label.into(), times: self.times.clone(), values: v.clone() };
        [mk("M", &self.m), mk("I", &self.i), mk("K", &self.k)]
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < MIN_GRID_POINTS {
        return Err(Error::CoarseGrid(format!(
            "{} samples, at least {MIN_GRID_POINTS} are needed for time integrals",
            times.len()
        )));
    }
    Ok(())
}

/// Per-bond exchange rate `r_x`, as the rate of the exchange the bond content allows.
fn bond_exchange_rates(model: &RateModel, config: &Configuration, lattice: &Lattice) -> Result<Vec<f64>> {
    lattice
        .bonds()
        .map(|x| match config {
            Configuration::Exclusion(_) => model.bond_rate(config, x, lattice),
            Configuration::Species(s) => {
                if s[x] == s[(x + 1) % lattice.n()] {
                    Ok(0.0)
                } else {
                    model.abc_bond_rate(config, x, lattice)
                }
            }
        })
        .collect()
}

/// Drift and carre du champ of `Y(f_s)` at one time: `(I-rate, K-rate, Gamma)`.
#[allow(clippy::too_many_arguments)]
pub fn drift_terms(
    model: &RateModel,
    config: &Configuration,
    lattice: &Lattice,
    theta: f64,
    f: &TestFunction,
    measure: &ProductMeasure,
    channel: Channel,
    frame: MovingFrame,
    s: f64,
) -> Result<(f64, f64, f64)> {
    let n = lattice.n();
    let nf = n as f64;
    let shift = frame.shift(s);
    let w = f.sample(n, shift);
    let vals: Vec<f64> = match config {
        Configuration::Exclusion(o) => o.iter().map(|&b| channel.0[0] * b as f64).collect(),
        Configuration::Species(l) => l.iter().map(|&a| channel.0[a as usize]).collect(),
    };
    let rates = bond_exchange_rates(model, config, lattice)?;
    let pref = nf.powf(theta - 1.5);
    let (mut i_rate, mut k_rate, mut gamma) = (0.0, 0.0, 0.0);
    for (x, r) in lattice.bonds().zip(rates) {
        let y = (x + 1) % n;
        let grad = nf * (w[y] - w[x]);
        let dv = vals[x] - vals[y];
        let j = r * dv;
        let d = model.gradient_coefficient(x, n)?;
        i_rate += grad * d * dv;
        k_rate += grad * (j - d * dv);
        gamma += r * (w[y] - w[x]).powi(2) * dv * dv;
    }
    i_rate *= pref;
    k_rate *= pref;
    gamma *= nf.powf(theta - 1.0);
    if frame.velocity != 0.0 {
        let c = channel.centred(config, measure);
        let dw: Vec<f64> = (0..n).map(|x| -frame.velocity / nf * f.derivative((x as f64 - shift) / nf)).collect();
        k_rate += pair(&dw, &c);
    }
    Ok((i_rate, k_rate, gamma))
}

/// Decompose the density field of a ring trajectory sampled on a dense grid.
pub fn martingale_decomposition(
    record: &TrajectoryRecord,
    f: &TestFunction,
    model: &RateModel,
    measure: &ProductMeasure,
    channel: Channel,
    frame: MovingFrame,
) -> Result<Decomposition> {
    if !model.is_nearest_neighbour() {
        return Err(Error::Incompatible("decomposition needs a nearest-neighbour model".into()));
    }
    check_grid(&record.times)?;
    let lattice = Lattice::ring(record.n)?;
    let mut y = Vec::with_capacity(record.times.len());
    let mut ir = Vec::with_capacity(record.times.len());
    let mut kr = Vec::with_capacity(record.times.len());
    let mut gr = Vec::with_capacity(record.times.len());
    for (&t, c) in record.times.iter().zip(&record.samples) {
        y.push(super::density::density_field(c, f, measure, channel, frame, t));
        let (a, b, g) = drift_terms(model, c, &lattice, record.theta, f, measure, channel, frame, t)?;
        ir.push(a);
        kr.push(b);
        gr.push(g);
    }
    let i = cumulative_trapezoid(&record.times, &ir);
    let k = cumulative_trapezoid(&record.times, &kr);
    let predictable_qv = cumulative_trapezoid(&record.times, &gr);
    let m: Vec<f64> = (0..y.len()).map(|s| y[s] - y[0] - i[s] - k[s]).collect();
    let mut realized_qv = vec![0.0; m.len()];
    for s in 1..m.len() {
        realized_qv[s] = realized_qv[s - 1] + (m[s] - m[s - 1]).powi(2);
    }
    Ok(Decomposition { times: record.times.clone(), y, i, k, m, realized_qv, predictable_qv })
}
