//! Lattice geometry, configurations and product measures.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Ring,
    /// Sites `1..n` are the bulk; site 0 is an unused placeholder and the
    /// reservoirs act on sites 1 and n-1.
    Segment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    n: usize,
    topology: Topology,
}

impl Lattice {
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return invalid(format!("ring needs n >= 3, got {n}"));
        }
        Ok(Self { n, topology: Topology::Ring })
    }

    pub fn segment(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("segment needs n >= 2, got {n}"));
        }
        Ok(Self { n, topology: Topology::Segment })
    }

    pub fn new(n: usize, topology: Topology) -> Result<Self> {
        match topology {
            Topology::Ring => Self::ring(n),
            Topology::Segment => Self::segment(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_ring(&self) -> bool {
        self.topology == Topology::Ring
    }

    /// Right neighbour of `x`, if the bond `[x, x+1]` exists.
    pub fn right(&self, x: usize) -> Option<usize> {
        match self.topology {
            Topology::Ring => (x < self.n).then(|| (x + 1) % self.n),
            Topology::Segment => (x >= 1 && x + 1 < self.n).then_some(x + 1),
        }
    }

    /// Bonds `[x, x+1]` on which exchanges happen.
    pub fn bonds(&self) -> std::ops::Range<usize> {
        match self.topology {
            Topology::Ring => 0..self.n,
            Topology::Segment => 1..self.n.saturating_sub(1),
        }
    }

    /// Sites that carry particles.
    pub fn sites(&self) -> std::ops::Range<usize> {
        match self.topology {
            Topology::Ring => 0..self.n,
            Topology::Segment => 1..self.n,
        }
    }

    pub fn wrap(&self, x: i64) -> usize {
        x.rem_euclid(self.n as i64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    A = 0,
    B = 1,
    C = 2,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::A, Species::B, Species::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 3]
    }

    /// Cyclic successor, `alpha + 1`.
    pub fn next(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C'][self.index()]
    }
}

/// Occupation state.  Species labels are stored as 0, 1, 2 for A, B, C.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Configuration {
    Exclusion(Vec<u8>),
    Species(Vec<u8>),
}

impl Configuration {
    pub fn exclusion(occ: Vec<u8>) -> Result<Self> {
        if occ.iter().any(|&v| v > 1) {
            return invalid("occupancies must be 0 or 1");
        }
        Ok(Self::Exclusion(occ))
    }

    pub fn species(labels: Vec<u8>) -> Result<Self> {
        if labels.iter().any(|&v| v > 2) {
            return invalid("species labels must be 0, 1 or 2");
        }
        Ok(Self::Species(labels))
    }

    pub fn sites(&self) -> &[u8] {
        match self {
            Self::Exclusion(v) | Self::Species(v) => v,
        }
    }

    pub fn sites_mut(&mut self) -> &mut Vec<u8> {
        match self {
            Self::Exclusion(v) | Self::Species(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.sites().len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites().is_empty()
    }

    pub fn is_species(&self) -> bool {
        matches!(self, Self::Species(_))
    }

    pub fn particle_count(&self) -> usize {
        match self {
            Self::Exclusion(v) => v.iter().map(|&b| b as usize).sum(),
            Self::Species(v) => v.len(),
        }
    }

    pub fn species_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        if let Self::Species(v) = self {
            for &s in v {
                c[s as usize] += 1;
            }
        }
        c
    }

    /// `xi^alpha_x`: indicator that site `x` holds `species`.
    pub fn indicator(&self, x: usize, species: Species) -> f64 {
        match self {
            Self::Exclusion(v) => v[x] as f64,
            Self::Species(v) => (v[x] == species as u8) as u8 as f64,
        }
    }

    /// Exchange the contents of sites `x` and its right neighbour.
    pub fn swap(&self, x: usize, lattice: &Lattice) -> Result<Self> {
        let mut out = self.clone();
        out.swap_in_place(x, lattice)?;
        Ok(out)
    }

    pub fn swap_in_place(&mut self, x: usize, lattice: &Lattice) -> Result<()> {
        if self.len() != lattice.n() {
            return Err(Error::Incompatible(format!(
                "configuration has {} sites, lattice {}",
                self.len(),
                lattice.n()
            )));
        }
        let y = lattice
            .right(x)
            .ok_or_else(|| Error::InvalidParameter(format!("no exchange bond at {x}")))?;
        self.sites_mut().swap(x, y);
        Ok(())
    }

    pub fn to_line(&self) -> String {
        match self {
            Self::Exclusion(v) => v.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect(),
            Self::Species(v) => v.iter().map(|&s| Species::from_index(s as usize).letter()).collect(),
        }
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let line = line.trim();
        if line.chars().all(|c| c == '0' || c == '1') {
            return Ok(Self::Exclusion(line.bytes().map(|b| b - b'0').collect()));
        }
        let labels = line
            .chars()
            .map(|c| match c {
                'A' => Ok(0),
                'B' => Ok(1),
                'C' => Ok(2),
                other => Err(Error::InvalidParameter(format!("bad site character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self::Species(labels))
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_line())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductMeasure {
    Bernoulli { rho: f64 },
    AbcProduct { rho_a: f64, rho_b: f64 },
}

impl ProductMeasure {
    pub fn bernoulli(rho: f64) -> Result<Self> {
        let m = Self::Bernoulli { rho };
        m.validate()?;
        Ok(m)
    }

    pub fn abc(rho_a: f64, rho_b: f64) -> Result<Self> {
        let m = Self::AbcProduct { rho_a, rho_b };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |r: f64| r > 0.0 && r < 1.0;
        match *self {
            Self::Bernoulli { rho } if !open(rho) => invalid(format!("rho = {rho} outside (0,1)")),
            Self::AbcProduct { rho_a, rho_b } if !open(rho_a) || !open(rho_b) || rho_a + rho_b >= 1.0 => {
                invalid(format!("ABC densities ({rho_a}, {rho_b}) outside the open simplex"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_species(&self) -> bool {
        matches!(self, Self::AbcProduct { .. })
    }

    /// Species densities (rho_A, rho_B, rho_C).
    pub fn densities(&self) -> [f64; 3] {
        match *self {
            Self::Bernoulli { rho } => [rho, 0.0, 0.0],
            Self::AbcProduct { rho_a, rho_b } => [rho_a, rho_b, 1.0 - rho_a - rho_b],
        }
    }

    /// Single-site mean of the channel observed by `species`.
    pub fn mean(&self, species: Species) -> f64 {
        match *self {
            Self::Bernoulli { rho } => rho,
            Self::AbcProduct { .. } => self.densities()[species.index()],
        }
    }

    pub fn chi(&self) -> Result<f64> {
        match *self {
            Self::Bernoulli { rho } => Ok(rho * (1.0 - rho)),
            Self::AbcProduct { .. } => Err(Error::Incompatible(
                "chi is defined for Bernoulli measures; use gamma_cov".into(),
            )),
        }
    }

    pub fn gamma_cov(&self, alpha: Species, beta: Species) -> Result<f64> {
        match *self {
            Self::AbcProduct { .. } => {
                let r = self.densities();
                let (ra, rb) = (r[alpha.index()], r[beta.index()]);
                Ok(if alpha == beta { ra * (1.0 - ra) } else { -ra * rb })
            }
            Self::Bernoulli { .. } => Err(Error::Incompatible("gamma_cov needs an ABC product measure".into())),
        }
    }

    /// Probability weight of a configuration (product over sites).
    pub fn weight(&self, config: &Configuration) -> f64 {
        match (self, config) {
            (Self::Bernoulli { rho }, Configuration::Exclusion(v)) => {
                v.iter().map(|&b| if b == 1 { *rho } else { 1.0 - rho }).product()
            }
            (Self::AbcProduct { .. }, Configuration::Species(v)) => {
                let r = self.densities();
                v.iter().map(|&s| r[s as usize]).product()
            }
            _ => 0.0,
        }
    }

    fn draw_site<R: Rng>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        match *self {
            Self::Bernoulli { rho } => (u < rho) as u8,
            Self::AbcProduct { rho_a, rho_b } => {
                if u < rho_a {
                    0
                } else if u < rho_a + rho_b {
                    1
                } else {
                    2
                }
            }
        }
    }
}

/// Draw i.i.d. sites from `measure`.  On a segment the placeholder site 0 stays empty.
pub fn sample_configuration(measure: &ProductMeasure, lattice: &Lattice, seed: u64) -> Result<Configuration> {
    measure.validate()?;
    let mut rng = seed::rng(seed);
    let mut sites = vec![0u8; lattice.n()];
    for x in lattice.sites() {
        sites[x] = measure.draw_site(&mut rng);
    }
    Ok(match measure {
        ProductMeasure::Bernoulli { .. } => Configuration::Exclusion(sites),
        ProductMeasure::AbcProduct { .. } => Configuration::Species(sites),
    })
}

/// Draw independent sites with a site-dependent occupation probability.
pub fn sample_profile(profile: impl Fn(f64) -> f64, lattice: &Lattice, seed: u64) -> Result<Configuration> {
    let n = lattice.n();
    let mut rng = seed::rng(seed);
    let mut sites = vec![0u8; n];
    for x in lattice.sites() {
        let p = profile(x as f64 / n as f64);
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("profile value {p} at site {x} outside [0,1]"));
        }
        sites[x] = (rng.random::<f64>() < p) as u8;
    }
    Ok(Configuration::Exclusion(sites))
}

/// Draw independent species labels with site-dependent densities `(rho_A, rho_B)`.
pub fn sample_species_profile(
    profile: impl Fn(f64) -> (f64, f64),
    lattice: &Lattice,
    seed: u64,
) -> Result<Configuration> {
    let n = lattice.n();
    let mut rng = seed::rng(seed);
    let mut sites = vec![2u8; n];
    for x in lattice.sites() {
        let (ra, rb) = profile(x as f64 / n as f64);
        if ra < 0.0 || rb < 0.0 || ra + rb > 1.0 {
            return invalid(format!("species profile ({ra}, {rb}) at site {x} outside the simplex"));
        }
        let u: f64 = rng.random();
        sites[x] = if u < ra { 0 } else if u < ra + rb { 1 } else { 2 };
    }
    Ok(Configuration::Species(sites))
}
