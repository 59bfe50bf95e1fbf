use std::time::Instant;

use ipskit::dynamics::RateModel;
use ipskit::engine::{run_member, ScalingSpec, SimOptions};
use ipskit::lattice::{Lattice, ProductMeasure};

fn main() {
    for (name, model, measure, n) in [
        ("ssep", RateModel::ssep(), ProductMeasure::bernoulli(0.5).unwrap(), 1024),
        ("abc", RateModel::abc([-32.0, 0.0, 0.0], 0.5), ProductMeasure::abc(1.0 / 3.0, 1.0 / 3.0).unwrap(), 1024),
    ] {
        let scaling = ScalingSpec::uniform(2.0, 0.002, 100).unwrap();
        let start = Instant::now();
        let r = run_member(&model, &measure, &Lattice::ring(n).unwrap(), &scaling, 1, 0, SimOptions::default()).unwrap();
        let s = start.elapsed().as_secs_f64();
        println!("{name}: {} events in {s:.3}s = {:.2e}/s", r.events, r.events as f64 / s);
    }
}
