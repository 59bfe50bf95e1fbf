//! Exact computations on small state spaces.

use std::collections::HashMap;

use crate::dynamics::{apply_event, RateModel};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Configuration, Lattice, ProductMeasure};

pub const STATE_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Particles(usize),
    Species([usize; 3]),
}

#[derive(Debug, Clone)]
pub struct StateSpace {
    lattice: Lattice,
    states: Vec<Configuration>,
    index: HashMap<Vec<u8>, usize>,
}

impl StateSpace {
    pub fn enumerate(lattice: &Lattice, species: bool, sector: Option<Sector>) -> Result<Self> {
        let sites: Vec<usize> = lattice.sites().collect();
        let base: usize = if species { 3 } else { 2 };
        let total = (base as f64).powi(sites.len() as i32);
        if total > 64.0 * STATE_GUARD as f64 {
            return Err(Error::StateSpaceTooLarge(total as usize, STATE_GUARD));
        }
        let mut states = Vec::new();
        let mut buf = vec![0u8; lattice.n()];
        for code in 0..total as usize {
            let mut c = code;
            for &x in &sites {
                buf[x] = (c % base) as u8;
                c /= base;
            }
            let config = if species {
                Configuration::Species(buf.clone())
            } else {
                Configuration::Exclusion(buf.clone())
            };
            let keep = match sector {
                None => true,
                Some(Sector::Particles(k)) => !species && config.particle_count() == k,
                Some(Sector::Species(k)) => species && config.species_counts() == k,
            };
            if keep {
                states.push(config);
                if states.len() > STATE_GUARD {
                    return Err(Error::StateSpaceTooLarge(states.len(), STATE_GUARD));
                }
            }
        }
        if states.is_empty() {
            return invalid("empty state space (sector incompatible with the lattice)");
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.sites().to_vec(), i)).collect();
        Ok(Self { lattice: *lattice, states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config.sites()).copied()
    }

    /// Tabulate a state function.
    pub fn observable(&self, g: impl Fn(&Configuration) -> f64) -> Vec<f64> {
        self.states.iter().map(g).collect()
    }
}

/// Sparse generator: off-diagonal entries in CSR form plus the diagonal.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries of row `i` as `(column, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// `Q g`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.diag[i] * g[i] + self.row(i).map(|(j, q)| q * g[j]).sum::<f64>())
            .collect()
    }

    /// `v^T Q`.
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                for (j, q) in self.row(i) {
                    out[j] += vi * q;
                }
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.diag[i] + self.row(i).map(|(_, q)| q).sum::<f64>()).collect()
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(-d))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = self.diag[i];
            for (j, q) in self.row(i) {
                m[i * d + j] += q;
            }
        }
        m
    }
}

/// Enumerate the states and assemble `Q`, including the factor `n^theta`.
pub fn build_generator(
    model: &RateModel,
    lattice: &Lattice,
    theta: f64,
    sector: Option<Sector>,
) -> Result<(StateSpace, GeneratorMatrix)> {
    model.validate(lattice)?;
    let space = StateSpace::enumerate(lattice, model.is_species(), sector)?;
    let speed = (lattice.n() as f64).powf(theta);
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut diag = Vec::with_capacity(space.len());
    for (i, s) in space.states.iter().enumerate() {
        let mut acc: Vec<(usize, f64)> = Vec::new();
        for ev in model.event_catalog(s, lattice)? {
            let mut t = s.clone();
            apply_event(&mut t, ev.kind, lattice)?;
            let j = space
                .index_of(&t)
                .ok_or_else(|| Error::Incompatible("transition leaves the sector".into()))?;
            if j == i {
                continue;
            }
            match acc.iter_mut().find(|(c, _)| *c == j) {
                Some(e) => e.1 += speed * ev.rate,
                None => acc.push((j, speed * ev.rate)),
            }
        }
        acc.sort_by_key(|e| e.0);
        let out: f64 = acc.iter().map(|e| e.1).sum();
        diag.push(-out);
        for (j, q) in acc {
            cols.push(j);
            vals.push(q);
        }
        row_ptr.push(cols.len());
    }
    Ok((space, GeneratorMatrix { row_ptr, cols, vals, diag }))
}

/// `||nu^T Q||_inf / ||nu||_inf` for the product measure restricted to the space.
pub fn check_stationarity(q: &GeneratorMatrix, space: &StateSpace, measure: &ProductMeasure) -> f64 {
    let nu: Vec<f64> = space.states.iter().map(|s| measure.weight(s)).collect();
    let scale = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let r = q.apply_left(&nu);
    r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

#[derive(Debug, Clone)]
pub enum InitialDistribution {
    /// Product measure conditioned on the state space.
    Product(ProductMeasure),
    Point(Configuration),
}

impl InitialDistribution {
    pub fn vector(&self, space: &StateSpace) -> Result<Vec<f64>> {
        match self {
            Self::Product(m) => {
                let mut v: Vec<f64> = space.states.iter().map(|s| m.weight(s)).collect();
                let z: f64 = v.iter().sum();
                if z <= 0.0 {
                    return invalid("measure puts no mass on the state space");
                }
                v.iter_mut().for_each(|x| *x /= z);
                Ok(v)
            }
            Self::Point(c) => {
                let i = space
                    .index_of(c)
                    .ok_or_else(|| Error::Incompatible("initial configuration not in the state space".into()))?;
                let mut v = vec![0.0; space.len()];
                v[i] = 1.0;
                Ok(v)
            }
        }
    }
}

const UNIF_TOL: f64 = 1e-13;

struct Uniformized {
    lambda: f64,
    /// Poisson(lambda t) weights and upper tails `P(N > k)`.
    weights: Vec<f64>,
    tails: Vec<f64>,
}

fn poisson_terms(mean: f64) -> (Vec<f64>, Vec<f64>) {
    let kmax = (mean + 12.0 * mean.sqrt() + 60.0).ceil() as usize;
    let mut weights = Vec::with_capacity(kmax);
    let mut lw = -mean;
    let lm = if mean > 0.0 { mean.ln() } else { f64::NEG_INFINITY };
    let mut cdf = 0.0;
    let mut tails = Vec::with_capacity(kmax);
    for k in 0..=kmax {
        if k > 0 {
            lw += lm - (k as f64).ln();
        }
        let w = lw.exp();
        weights.push(w);
        cdf += w;
        tails.push((1.0 - cdf).max(0.0));
        if k as f64 > mean && 1.0 - cdf < UNIF_TOL {
            break;
        }
    }
    (weights, tails)
}

fn uniformize(q: &GeneratorMatrix, t: f64) -> Uniformized {
    let lambda = q.max_exit_rate().max(1e-300);
    let (weights, tails) = poisson_terms(lambda * t);
    Uniformized { lambda, weights, tails }
}

fn step(q: &GeneratorMatrix, v: &[f64], lambda: f64) -> Vec<f64> {
    let qv = q.apply_left(v);
    v.iter().zip(qv).map(|(a, b)| a + b / lambda).collect()
}

/// Law at time `t`, `nu^T e^{Qt}`, by uniformization.
pub fn transient_distribution(
    q: &GeneratorMatrix,
    space: &StateSpace,
    init: &InitialDistribution,
    t: f64,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return invalid("time must be nonnegative");
    }
    let mut v = init.vector(space)?;
    if t == 0.0 || q.max_exit_rate() == 0.0 {
        return Ok(v);
    }
    let u = uniformize(q, t);
    let mut out = vec![0.0; v.len()];
    for (k, w) in u.weights.iter().enumerate() {
        if k > 0 {
            v = step(q, &v, u.lambda);
        }
        out.iter_mut().zip(&v).for_each(|(o, x)| *o += w * x);
    }
    Ok(out)
}

/// `E[g(eta_t)]`.
pub fn transient_expectation(
    q: &GeneratorMatrix,
    space: &StateSpace,
    g: &[f64],
    init: &InitialDistribution,
    t: f64,
) -> Result<f64> {
    let p = transient_distribution(q, space, init, t)?;
    Ok(dot(&p, g))
}

/// `int_0^t E[g(eta_s)] ds`, using `int_0^t Pois(k; L s) ds = P(Pois(L t) > k) / L`.
pub fn transient_integral(
    q: &GeneratorMatrix,
    space: &StateSpace,
    g: &[f64],
    init: &InitialDistribution,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid("time must be nonnegative");
    }
    let mut v = init.vector(space)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if q.max_exit_rate() == 0.0 {
        return Ok(t * dot(&v, g));
    }
    let u = uniformize(q, t);
    let mut acc = 0.0;
    for (k, tail) in u.tails.iter().enumerate() {
        if k > 0 {
            v = step(q, &v, u.lambda);
        }
        acc += tail / u.lambda * dot(&v, g);
    }
    Ok(acc)
}

/// Carre du champ `Gamma(g) = L(g^2) - 2 g L g` per state.
pub fn exact_qv_rate(q: &GeneratorMatrix, g: &[f64]) -> Vec<f64> {
    (0..q.dim())
        .map(|i| q.row(i).map(|(j, r)| r * (g[j] - g[i]).powi(2)).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
