//! Exact continuous-time simulation in the accelerated time scale.

mod classes;
mod long_jump;

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{check_variant, RateModel};
use crate::error::{invalid, Error, Result};
use crate::lattice::{sample_configuration, Configuration, Lattice, ProductMeasure};
use crate::seed;

use classes::ClassKernel;
use long_jump::LongJumpKernel;

/// Time acceleration `n^theta`, horizon and sampling grid (macroscopic time).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub theta: f64,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
}

impl ScalingSpec {
    pub fn new(theta: f64, horizon: f64, sample_times: Vec<f64>) -> Result<Self> {
        if !theta.is_finite() || !(horizon >= 0.0) || !horizon.is_finite() {
            return invalid("theta and horizon must be finite, horizon >= 0");
        }
        if sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sample times must be strictly increasing");
        }
        if sample_times.iter().any(|&t| t < 0.0 || t > horizon * (1.0 + 1e-12)) {
            return invalid("sample times must lie in [0, horizon]");
        }
        Ok(Self { theta, horizon, sample_times })
    }

    /// `points + 1` equally spaced samples on `[0, horizon]`.
    pub fn uniform(theta: f64, horizon: f64, points: usize) -> Result<Self> {
        let pts = points.max(1);
        let times = (0..=pts).map(|i| horizon * i as f64 / pts as f64).collect();
        Self::new(theta, horizon, times)
    }

    pub fn speed(&self, n: usize) -> f64 {
        (n as f64).powf(self.theta)
    }
}

/// Jump counters.  Index `bond * species + s`; for exclusion models `species == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counters {
    pub species: usize,
    pub forward: Vec<u64>,
    pub backward: Vec<u64>,
    pub boundary_events: u64,
    /// Net crossings `J` per bond and species at each sample time.
    pub net: Vec<Vec<i64>>,
}

impl Counters {
    fn new(n: usize, species: usize) -> Self {
        Self {
            species,
            forward: vec![0; n * species],
            backward: vec![0; n * species],
            boundary_events: 0,
            net: Vec::new(),
        }
    }

    fn snapshot(&self) -> Vec<i64> {
        self.forward.iter().zip(&self.backward).map(|(&f, &b)| f as i64 - b as i64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub theta: f64,
    pub times: Vec<f64>,
    pub samples: Vec<Configuration>,
    pub counters: Option<Counters>,
    pub events: u64,
    pub seed: u64,
}

impl TrajectoryRecord {
    /// Columnar dump: `t,site_0,...,site_{n-1}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for x in 0..self.n {
            write!(w, ",site_{x}")?;
        }
        writeln!(w)?;
        for (t, c) in self.times.iter().zip(&self.samples) {
            write!(w, "{t}")?;
            for v in c.sites() {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Counter dump `t,bond,J`; for the ABC model `J` counts species A.
    pub fn write_counters_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let c = self.counters.as_ref().ok_or(Error::MissingCounters)?;
        writeln!(w, "t,bond,J")?;
        for (t, net) in self.times.iter().zip(&c.net) {
            for b in 0..self.n {
                writeln!(w, "{t},{b},{}", net[b * c.species])?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub counters: bool,
}

#[derive(Debug, Clone)]
enum Kernel {
    Nearest(ClassKernel),
    Long(LongJumpKernel),
}

/// A single running trajectory.  Holding times are memoryless, so the time
/// of the pending event is kept across `advance_to` calls.
#[derive(Debug, Clone)]
pub struct Simulator {
    lattice: Lattice,
    config: Configuration,
    kernel: Kernel,
    speed: f64,
    rng: ChaCha8Rng,
    time: f64,
    next_event: f64,
    events: u64,
    counters: Option<Counters>,
}

impl Simulator {
    pub fn new(
        model: &RateModel,
        init: Configuration,
        lattice: &Lattice,
        theta: f64,
        seed: u64,
        options: SimOptions,
    ) -> Result<Self> {
        model.validate(lattice)?;
        check_variant(model, &init, lattice)?;
        let kernel = if model.is_nearest_neighbour() {
            Kernel::Nearest(ClassKernel::new(model, &init, lattice)?)
        } else {
            if options.counters {
                return Err(Error::Incompatible("bond counters are not available for long jumps".into()));
            }
            Kernel::Long(LongJumpKernel::new(model, &init, lattice)?)
        };
        let counters = options
            .counters
            .then(|| Counters::new(lattice.n(), if model.is_species() { 3 } else { 1 }));
        let mut sim = Self {
            lattice: *lattice,
            config: init,
            kernel,
            speed: (lattice.n() as f64).powf(theta),
            rng: seed::rng(seed),
            time: 0.0,
            next_event: 0.0,
            events: 0,
            counters,
        };
        sim.next_event = sim.draw_holding();
        Ok(sim)
    }

    fn total_rate(&self) -> f64 {
        match &self.kernel {
            Kernel::Nearest(k) => k.total_rate(),
            Kernel::Long(k) => k.total_rate(),
        }
    }

    fn draw_holding(&mut self) -> f64 {
        let r = self.total_rate() * self.speed;
        if r <= 0.0 {
            return f64::INFINITY;
        }
        let u: f64 = self.rng.random();
        self.time - (1.0 - u).ln() / r
    }

    /// Run until macroscopic time `t`.
    pub fn advance_to(&mut self, t: f64) {
        while self.next_event <= t {
            self.time = self.next_event;
            self.step();
            self.next_event = self.draw_holding();
        }
        self.time = self.time.max(t);
    }

    fn step(&mut self) {
        let s = self.config.sites_mut();
        match &mut self.kernel {
            Kernel::Nearest(k) => {
                let total = k.total_rate();
                let moved = k.fire(s, total, &mut self.rng);
                self.events += 1;
                if let Some(c) = self.counters.as_mut() {
                    if moved.boundary {
                        c.boundary_events += 1;
                    } else {
                        let base = moved.bond * c.species;
                        if let Some(sp) = moved.right {
                            c.forward[base + sp as usize] += 1;
                        }
                        if let Some(sp) = moved.left {
                            c.backward[base + sp as usize] += 1;
                        }
                    }
                }
            }
            Kernel::Long(k) => {
                if k.fire(s, &mut self.rng) {
                    self.events += 1;
                }
            }
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Net crossings per bond (and species) so far.
    pub fn net_current(&self) -> Option<Vec<i64>> {
        self.counters.as_ref().map(Counters::snapshot)
    }
}

pub fn simulate(
    model: &RateModel,
    init: Configuration,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    seed: u64,
) -> Result<TrajectoryRecord> {
    simulate_with(model, init, lattice, scaling, seed, SimOptions::default())
}

pub fn simulate_with(
    model: &RateModel,
    init: Configuration,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    seed: u64,
    options: SimOptions,
) -> Result<TrajectoryRecord> {
    let mut sim = Simulator::new(model, init, lattice, scaling.theta, seed, options)?;
    let mut samples = Vec::with_capacity(scaling.sample_times.len());
    let mut net = Vec::new();
    for &t in &scaling.sample_times {
        sim.advance_to(t);
        samples.push(sim.config.clone());
        if let Some(c) = &sim.counters {
            net.push(c.snapshot());
        }
    }
    sim.advance_to(scaling.horizon);
    let mut counters = sim.counters.take();
    if let Some(c) = counters.as_mut() {
        c.net = net;
    }
    Ok(TrajectoryRecord {
        n: lattice.n(),
        theta: scaling.theta,
        times: scaling.sample_times.clone(),
        samples,
        counters,
        events: sim.events,
        seed,
    })
}

/// Run trajectory `i` of an ensemble: initial state from `init_seed(master, i)`,
/// dynamics from `dynamics_seed(master, i)`.
pub fn run_member(
    model: &RateModel,
    measure: &ProductMeasure,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    master_seed: u64,
    i: u64,
    options: SimOptions,
) -> Result<TrajectoryRecord> {
    let init = sample_configuration(measure, lattice, seed::init_seed(master_seed, i))?;
    simulate_with(model, init, lattice, scaling, seed::dynamics_seed(master_seed, i), options)
}

/// All trajectories of an ensemble, in trajectory order.
pub fn ensemble_run(
    model: &RateModel,
    measure: &ProductMeasure,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    trajectories: usize,
    master_seed: u64,
    options: SimOptions,
) -> Result<Vec<TrajectoryRecord>> {
    ensemble_map(model, measure, lattice, scaling, trajectories, master_seed, options, Ok)
}

/// Run an ensemble and reduce each trajectory with `f` as soon as it is done.
/// Results come back in trajectory order whatever the thread count.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_map<T, F>(
    model: &RateModel,
    measure: &ProductMeasure,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    trajectories: usize,
    master_seed: u64,
    options: SimOptions,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(TrajectoryRecord) -> Result<T> + Sync,
{
    if trajectories == 0 {
        return invalid("an ensemble needs at least one trajectory");
    }
    measure.validate()?;
    model.validate(lattice)?;
    (0..trajectories as u64)
        .into_par_iter()
        .map(|i| run_member(model, measure, lattice, scaling, master_seed, i, options).and_then(&f))
        .collect()
}

/// Like [`ensemble_map`] with caller-chosen initial states.
pub fn ensemble_map_from<T, F, I>(
    model: &RateModel,
    lattice: &Lattice,
    scaling: &ScalingSpec,
    trajectories: usize,
    master_seed: u64,
    options: SimOptions,
    init: I,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    I: Fn(u64) -> Result<Configuration> + Sync,
    F: Fn(TrajectoryRecord) -> Result<T> + Sync,
{
    if trajectories == 0 {
        return invalid("an ensemble needs at least one trajectory");
    }
    (0..trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let c = init(seed::init_seed(master_seed, i))?;
            simulate_with(model, c, lattice, scaling, seed::dynamics_seed(master_seed, i), options).and_then(&f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Configuration;

    fn ring(n: usize) -> Lattice {
        Lattice::ring(n).unwrap()
    }

    #[test]
    fn full_lattice_is_frozen() {
        let c = Configuration::from_line("1111").unwrap();
        let s = ScalingSpec::uniform(2.0, 1.0, 4).unwrap();
        let r = simulate(&RateModel::ssep(), c.clone(), &ring(4), &s, 1).unwrap();
        assert_eq!(r.events, 0);
        assert!(r.samples.iter().all(|x| *x == c));
    }

    #[test]
    fn reruns_are_bit_identical() {
        let m = RateModel::wasep(1.0, 0.5);
        let l = ring(32);
        let s = ScalingSpec::uniform(2.0, 0.01, 10).unwrap();
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let opts = SimOptions { counters: true };
        let a = run_member(&m, &mu, &l, &s, 5, 0, opts).unwrap();
        let b = run_member(&m, &mu, &l, &s, 5, 0, opts).unwrap();
        assert_eq!(a, b);
        assert!(a.events > 0);
    }

    #[test]
    fn single_trajectory_ensemble_matches_simulate() {
        let m = RateModel::ssep();
        let l = ring(16);
        let s = ScalingSpec::uniform(2.0, 0.05, 5).unwrap();
        let mu = ProductMeasure::bernoulli(0.5).unwrap();
        let e = ensemble_run(&m, &mu, &l, &s, 1, 77, SimOptions::default()).unwrap();
        let init = sample_configuration(&mu, &l, seed::init_seed(77, 0)).unwrap();
        let direct = simulate(&m, init, &l, &s, seed::dynamics_seed(77, 0)).unwrap();
        assert_eq!(e[0], direct);
    }

    #[test]
    fn counters_and_conservation() {
        let m = RateModel::abc([1.0, 0.0, -0.5], 0.5);
        let l = ring(24);
        let s = ScalingSpec::uniform(2.0, 0.02, 8).unwrap();
        let mu = ProductMeasure::abc(0.3, 0.3).unwrap();
        let r = run_member(&m, &mu, &l, &s, 3, 0, SimOptions { counters: true }).unwrap();
        let counts = r.samples[0].species_counts();
        assert!(r.samples.iter().all(|c| c.species_counts() == counts));
        let c = r.counters.as_ref().unwrap();
        let total: u64 = c.forward.iter().sum::<u64>();
        // every exchange moves one label right and one left
        assert_eq!(total, r.events);
        assert_eq!(c.backward.iter().sum::<u64>(), r.events);
    }

    #[test]
    fn reservoir_counts_boundary_events() {
        let m = RateModel::Reservoir { alpha_res: 0.3, beta_res: 0.7, theta: 0.0 };
        let l = Lattice::segment(6).unwrap();
        let init = Configuration::from_line("000000").unwrap();
        let s = ScalingSpec::uniform(1.0, 2.0, 4).unwrap();
        let r = simulate_with(&m, init, &l, &s, 9, SimOptions { counters: true }).unwrap();
        let c = r.counters.unwrap();
        let swaps: u64 = c.forward.iter().chain(&c.backward).sum();
        assert_eq!(swaps + c.boundary_events, r.events);
        assert!(r.samples.iter().all(|c| c.sites()[0] == 0));
    }

    #[test]
    fn long_jump_conserves_and_rejects_counters() {
        let m = RateModel::LongJump { alpha: 1.5, c_plus: 1.0, c_minus: 0.5, range: None };
        let l = ring(64);
        let s = ScalingSpec::uniform(1.5, 0.01, 3).unwrap();
        let mu = ProductMeasure::bernoulli(0.4).unwrap();
        let r = run_member(&m, &mu, &l, &s, 1, 0, SimOptions::default()).unwrap();
        let k = r.samples[0].particle_count();
        assert!(r.samples.iter().all(|c| c.particle_count() == k));
        assert!(r.events > 0);
        assert!(run_member(&m, &mu, &l, &s, 1, 0, SimOptions { counters: true }).is_err());
    }

    #[test]
    fn scaling_validation() {
        assert!(ScalingSpec::new(2.0, 1.0, vec![0.5, 0.2]).is_err());
        assert!(ScalingSpec::new(2.0, 1.0, vec![0.5, 2.0]).is_err());
        assert!(ScalingSpec::new(2.0, 1.0, vec![0.0, 1.0]).is_ok());
    }
}
