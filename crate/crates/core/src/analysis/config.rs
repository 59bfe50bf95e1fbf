//! Experiment configuration.
//!
//! The file is TOML restricted to flat sections of `key = value` pairs:
//!
//! ```toml
//! [model]
//! kind = "nearest_exclusion"   # or long_jump, slow_bond, reservoir, abc
//! b_plus = 0.5
//! b_minus = 0.5
//! a = 0.0
//! gamma = 0.0
//!
//! [lattice]
//! n = 64
//! topology = "ring"            # or "segment"
//!
//! [measure]
//! kind = "bernoulli"           # or abc_product with rho_a, rho_b
//! rho = 0.5
//!
//! [scaling]
//! theta = 2.0
//! horizon = 0.1
//! samples = 100                # intervals; samples + 1 times including 0
//!
//! [ensemble]
//! trajectories = 10
//! seed = 1
//!
//! [fields]
//! fourier = [1, 2]
//! channel = "occupation"       # a, b, c, mode0, mode1
//! frame_velocity = 0.0         # sites per unit time; "mode_frame = true" uses the mode speed
//!
//! [estimators]
//! density = true
//! martingale = false
//! structure = false
//! structure_lags = 20
//! origin_stride = 1
//! bg_boxes = []
//! energy_eps = 0.0             # 0 disables; requires energy_delta < energy_eps
//! energy_delta = 0.0
//! fit = false
//! band_ew = 1.8
//! band_kpz = 1.65
//!
//! [output]
//! dir = "run"
//! ```
//!
//! Every key has a default except `[model]`, `[lattice] n`, `[scaling] horizon`
//! and `[output] dir`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fit::Bands;
use crate::dynamics::RateModel;
use crate::engine::ScalingSpec;
use crate::error::{Error, Result};
use crate::fields::{Channel, MovingFrame, TestFunction};
use crate::lattice::{Lattice, ProductMeasure, Species, Topology};
use crate::modes::{frame_velocity, model_modes};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub n: usize,
    #[serde(default = "ring")]
    pub topology: Topology,
}

fn ring() -> Topology {
    Topology::Ring
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(default = "two")]
    pub theta: f64,
    pub horizon: f64,
    #[serde(default = "hundred")]
    pub samples: usize,
}

fn two() -> f64 {
    2.0
}
fn hundred() -> usize {
    100
}
fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "one")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub counters: bool,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { trajectories: 1, seed: 0, counters: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsSection {
    #[serde(default = "first_mode")]
    pub fourier: Vec<i64>,
    #[serde(default = "occupation")]
    pub channel: String,
    #[serde(default)]
    pub frame_velocity: f64,
    #[serde(default)]
    pub mode_frame: bool,
}

fn first_mode() -> Vec<i64> {
    vec![1]
}
fn occupation() -> String {
    "occupation".into()
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self { fourier: first_mode(), channel: occupation(), frame_velocity: 0.0, mode_frame: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default = "yes")]
    pub density: bool,
    #[serde(default)]
    pub martingale: bool,
    #[serde(default)]
    pub structure: bool,
    #[serde(default = "twenty")]
    pub structure_lags: usize,
    #[serde(default = "one")]
    pub origin_stride: usize,
    #[serde(default)]
    pub bg_boxes: Vec<usize>,
    #[serde(default)]
    pub energy_eps: f64,
    #[serde(default)]
    pub energy_delta: f64,
    #[serde(default)]
    pub fit: bool,
    #[serde(default = "band_ew")]
    pub band_ew: f64,
    #[serde(default = "band_kpz")]
    pub band_kpz: f64,
}

fn twenty() -> usize {
    20
}
fn band_ew() -> f64 {
    Bands::default().ew
}
fn band_kpz() -> f64 {
    Bands::default().kpz
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            density: true,
            martingale: false,
            structure: false,
            structure_lags: twenty(),
            origin_stride: 1,
            bg_boxes: Vec::new(),
            energy_eps: 0.0,
            energy_delta: 0.0,
            fit: false,
            band_ew: band_ew(),
            band_kpz: band_kpz(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: RateModel,
    pub lattice: LatticeSection,
    #[serde(default = "half_filled")]
    pub measure: ProductMeasure,
    pub scaling: ScalingSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub fields: FieldsSection,
    #[serde(default)]
    pub estimators: EstimatorSection,
    pub output: OutputSection,
}

fn half_filled() -> ProductMeasure {
    ProductMeasure::Bernoulli { rho: 0.5 }
}

fn at(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {e}"))
}

impl ExperimentConfig {
    /// Parse and validate. Syntax errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| at(&path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Canonical serialization; parsing it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all representable in TOML")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.n, self.lattice.topology).map_err(|e| at("lattice", e))
    }

    pub fn scaling(&self) -> Result<ScalingSpec> {
        let s = &self.scaling;
        ScalingSpec::uniform(s.theta, s.horizon, s.samples).map_err(|e| at("scaling", e))
    }

    pub fn bands(&self) -> Bands {
        Bands { ew: self.estimators.band_ew, kpz: self.estimators.band_kpz }
    }

    pub fn test_functions(&self) -> Vec<TestFunction> {
        self.fields.fourier.iter().map(|&k| TestFunction::fourier(k)).collect()
    }

    pub fn channel(&self) -> Result<Channel> {
        let name = self.fields.channel.as_str();
        let species = self.measure.is_species();
        match (name, species) {
            ("occupation", false) => Ok(Channel::occupation()),
            ("a", true) => Ok(Channel::species(Species::A)),
            ("b", true) => Ok(Channel::species(Species::B)),
            ("c", true) => Ok(Channel::species(Species::C)),
            ("mode0" | "mode1", true) => {
                let spec = model_modes(&self.model, Species::A, self.measure.densities())
                    .map_err(|e| at("fields.channel", e))?;
                Ok(spec.channel(if name == "mode0" { 0 } else { 1 }))
            }
            _ => Err(at(
                "fields.channel",
                format!("'{name}' is not available for a {} measure", if species { "three-species" } else { "Bernoulli" }),
            )),
        }
    }

    pub fn frame(&self) -> Result<MovingFrame> {
        if !self.fields.mode_frame {
            return Ok(MovingFrame::new(self.fields.frame_velocity));
        }
        let mode = match self.fields.channel.as_str() {
            "mode0" => 0,
            "mode1" => 1,
            other => return Err(at("fields.mode_frame", format!("needs a mode channel, got '{other}'"))),
        };
        let gamma = match self.model {
            RateModel::Abc { gamma, .. } => gamma,
            _ => return Err(at("fields.mode_frame", "needs the abc model")),
        };
        let spec = model_modes(&self.model, Species::A, self.measure.densities()).map_err(|e| at("fields", e))?;
        Ok(MovingFrame::new(frame_velocity(&spec, mode, self.lattice.n, gamma)))
    }

    /// Check every parameter before anything runs.
    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice()?;
        self.model.validate(&lattice).map_err(|e| at("model", e))?;
        self.measure.validate().map_err(|e| at("measure", e))?;
        if self.model.is_species() != self.measure.is_species() {
            return Err(at("measure", "kind does not match the model (exclusion vs three species)"));
        }
        let s = self.scaling()?;
        if !(s.horizon > 0.0) {
            return Err(at("scaling.horizon", "must be positive"));
        }
        if self.ensemble.trajectories == 0 {
            return Err(at("ensemble.trajectories", "must be at least 1"));
        }
        if self.fields.fourier.is_empty() {
            return Err(at("fields.fourier", "list at least one mode"));
        }
        self.channel()?;
        self.frame()?;
        let e = &self.estimators;
        let ring_only = e.martingale || e.structure || !e.bg_boxes.is_empty() || e.energy_eps > 0.0;
        if ring_only && !lattice.is_ring() {
            return Err(at("estimators", "field estimators need a ring lattice"));
        }
        let integrals = e.martingale || !e.bg_boxes.is_empty() || e.energy_eps > 0.0;
        if integrals && s.sample_times.len() < crate::fields::MIN_GRID_POINTS {
            return Err(at(
                "scaling.samples",
                format!("time integrals need at least {} samples", crate::fields::MIN_GRID_POINTS - 1),
            ));
        }
        if e.martingale && !self.model.is_nearest_neighbour() {
            return Err(at("estimators.martingale", "needs a nearest-neighbour model"));
        }
        if e.structure {
            if e.structure_lags == 0 || e.structure_lags > self.scaling.samples {
                return Err(at("estimators.structure_lags", format!("must lie in 1..={}", self.scaling.samples)));
            }
            if e.origin_stride == 0 {
                return Err(at("estimators.origin_stride", "must be positive"));
            }
        }
        if e.fit && !e.structure {
            return Err(at("estimators.fit", "needs structure = true"));
        }
        if e.fit && e.structure_lags < super::fit::MIN_FIT_POINTS {
            return Err(at("estimators.structure_lags", format!("a fit needs at least {}", super::fit::MIN_FIT_POINTS)));
        }
        if !e.bg_boxes.is_empty() {
            if self.measure.is_species() {
                return Err(at("estimators.bg_boxes", "needs an exclusion model"));
            }
            if let Some(&l) = e.bg_boxes.iter().find(|&&l| l == 0 || 2 * l > self.lattice.n) {
                return Err(at("estimators.bg_boxes", format!("box {l} outside 1..=n/2")));
            }
        }
        if e.energy_eps != 0.0 || e.energy_delta != 0.0 {
            if !(e.energy_eps > e.energy_delta && e.energy_delta > 0.0 && e.energy_eps <= 1.0) {
                return Err(at("estimators.energy_eps", "need 1 >= energy_eps > energy_delta > 0"));
            }
            crate::fields::energy::box_length(e.energy_delta, self.lattice.n).map_err(|x| at("estimators.energy_delta", x))?;
        }
        if !(e.band_kpz <= e.band_ew) {
            return Err(at("estimators.band_kpz", "must not exceed band_ew"));
        }
        if self.output.dir.trim().is_empty() {
            return Err(at("output.dir", "must not be empty"));
        }
        Ok(())
    }
}
