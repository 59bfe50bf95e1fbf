use std::io::Write;

use serde::{Deserialize, Serialize};

use super::testfn::TestFunction;
use crate::engine::TrajectoryRecord;
use crate::error::{invalid, Error, Result};
use crate::lattice::{Configuration, ProductMeasure, Species};

/// Translation of test-function arguments at `velocity` sites per unit of
/// macroscopic time: at time `t` the field pairs site `x` with `f((x - v t)/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MovingFrame {
    pub velocity: f64,
}

impl MovingFrame {
    pub fn rest() -> Self {
        Self { velocity: 0.0 }
    }

    pub fn new(velocity: f64) -> Self {
        Self { velocity }
    }

    /// Shift in sites at time `t`.
    pub fn shift(&self, t: f64) -> f64 {
        self.velocity * t
    }

    /// Whether the frame moves farther than half the ring before `horizon`.
    pub fn wraps(&self, horizon: f64, n: usize) -> bool {
        self.shift(horizon).abs() > n as f64 / 2.0
    }
}

/// Linear combination of centred species occupations, `sum_s c_s xi-bar^s_x`.
/// For exclusion models only the first coefficient is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel(pub [f64; 3]);

impl Channel {
    pub fn occupation() -> Self {
        Self([1.0, 0.0, 0.0])
    }

    pub fn species(s: Species) -> Self {
        let mut c = [0.0; 3];
        c[s.index()] = 1.0;
        Self(c)
    }

    /// `coeff_alpha Y^alpha + coeff_next Y^(alpha+1)`.
    pub fn mode(alpha: Species, coeffs: [f64; 2]) -> Self {
        let mut c = [0.0; 3];
        c[alpha.index()] = coeffs[0];
        c[alpha.next().index()] = coeffs[1];
        Self(c)
    }

    /// Centred site values `sum_s c_s (xi^s_x - rho_s)`.
    pub fn centred(&self, config: &Configuration, measure: &ProductMeasure) -> Vec<f64> {
        match config {
            Configuration::Exclusion(v) => {
                let rho = measure.mean(Species::A);
                v.iter().map(|&b| self.0[0] * (b as f64 - rho)).collect()
            }
            Configuration::Species(v) => {
                let r = measure.densities();
                let offset: f64 = (0..3).map(|s| self.0[s] * r[s]).sum();
                v.iter().map(|&s| self.0[s as usize] - offset).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldSeries {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    /// Series of the time-reversed process `Y_{T-t}`.
    pub fn reversed(&self) -> Self {
        let tmax = self.times.last().copied().unwrap_or(0.0);
        Self {
            label: format!("{} reversed", self.label),
            times: self.times.iter().rev().map(|t| tmax - t).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// Increment process `Y_T - Y_{T-t}`.
    pub fn reversed_increments(&self) -> Self {
        let r = self.reversed();
        let last = self.values.last().copied().unwrap_or(0.0);
        Self {
            label: format!("{} reversed increments", self.label),
            times: r.times,
            values: r.values.iter().map(|v| last - v).collect(),
        }
    }
}

/// `n^{-1/2} sum_x w_x c_x` for precomputed site weights.
pub fn pair(weights: &[f64], centred: &[f64]) -> f64 {
    let n = centred.len() as f64;
    weights.iter().zip(centred).map(|(a, b)| a * b).sum::<f64>() / n.sqrt()
}

/// `Y_t(f) = n^{-1/2} sum_x f((x - v t)/n) (xi_x - rho)` for a channel.
pub fn density_field(
    config: &Configuration,
    f: &TestFunction,
    measure: &ProductMeasure,
    channel: Channel,
    frame: MovingFrame,
    t: f64,
) -> f64 {
    let n = config.len();
    pair(&f.sample(n, frame.shift(t)), &channel.centred(config, measure))
}

/// The density field along a trajectory, one value per sample time.
pub fn density_series(
    record: &TrajectoryRecord,
    f: &TestFunction,
    measure: &ProductMeasure,
    channel: Channel,
    frame: MovingFrame,
) -> FieldSeries {
    let values = record
        .times
        .iter()
        .zip(&record.samples)
        .map(|(&t, c)| density_field(c, f, measure, channel, frame, t))
        .collect();
    FieldSeries { label: "density".into(), times: record.times.clone(), values }
}

/// Net crossings of bond `[x, x+1]` up to sample `sample` (species index `s` for ABC).
pub fn current_field(record: &TrajectoryRecord, bond: usize, sample: usize, species: Species) -> Result<i64> {
    let c = record.counters.as_ref().ok_or(Error::MissingCounters)?;
    let s = if c.species == 1 { 0 } else { species.index() };
    c.net
        .get(sample)
        .and_then(|v| v.get(bond * c.species + s))
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("no counter for bond {bond} at sample {sample}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Centred box mean: right box `x+1..=x+l`, left box `x-l..=x-1` (periodic).
pub fn box_average(
    config: &Configuration,
    x: usize,
    l: usize,
    direction: Direction,
    measure: &ProductMeasure,
    channel: Channel,
) -> Result<f64> {
    let n = config.len();
    if l == 0 || 2 * l > n {
        return invalid(format!("box size {l} outside 1..=n/2"));
    }
    let c = channel.centred(config, measure);
    let sum: f64 = (1..=l)
        .map(|k| match direction {
            Direction::Right => c[(x + k) % n],
            Direction::Left => c[(x + n - k) % n],
        })
        .sum();
    Ok(sum / l as f64)
}
