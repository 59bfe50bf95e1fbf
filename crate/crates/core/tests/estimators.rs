//! Estimators against closed forms and independent numerics.

use std::f64::consts::PI;

use ipskit::analysis::{fit_dynamic_exponent, spreading};
use ipskit::dynamics::RateModel;
use ipskit::engine::{ensemble_map, ensemble_run, ScalingSpec, SimOptions};
use ipskit::fields::{density_field, Channel, MovingFrame, TestFunction};
use ipskit::hydro::ou_mode_covariance;
use ipskit::lattice::{sample_configuration, Lattice, ProductMeasure};
use ipskit::modes::{current_jacobian, macroscopic_current};
use ipskit::seed;
use ipskit::stats::{covariance, mean_se, Estimate};
use rand_distr::{Distribution, StandardNormal};

#[test]
fn jacobian_matches_finite_differences() {
    let g = [0.7, -1.3];
    for rho in [[0.2, 0.3], [1.0 / 3.0, 1.0 / 3.0], [0.6, 0.1]] {
        let j = current_jacobian(rho, g).unwrap();
        let h = 1e-6;
        for col in 0..2 {
            let mut up = rho;
            let mut dn = rho;
            up[col] += h;
            dn[col] -= h;
            let (a, b) = (macroscopic_current(up, g), macroscopic_current(dn, g));
            for row in 0..2 {
                let fd = (a[row] - b[row]) / (2.0 * h);
                assert!((fd - j[row][col]).abs() < 1e-8, "J[{row}][{col}] = {} vs {fd}", j[row][col]);
            }
        }
    }
}

#[test]
fn ou_covariance_matches_euler_maruyama() {
    // dY = -A w^2 Y dt + sqrt(C) w dW for the Fourier coefficient at frequency w = 2 pi k
    let (a, c, k): (f64, f64, i64) = (0.5, 0.25, 1);
    let w = 2.0 * PI * k as f64;
    let (dt, t): (f64, f64) = (1e-4, 0.05);
    let steps = (t / dt).round() as usize;
    let paths = 20_000;
    let stat = (c / (2.0 * a)).sqrt();
    let mut y0 = Vec::with_capacity(paths);
    let mut yt = Vec::with_capacity(paths);
    let mut rng = seed::rng(17);
    for _ in 0..paths {
        let z: f64 = StandardNormal.sample(&mut rng);
        let start = stat * z;
        let mut y = start;
        for _ in 0..steps {
            let dw: f64 = StandardNormal.sample(&mut rng);
            y += -a * w * w * y * dt + c.sqrt() * w * dt.sqrt() * dw;
        }
        y0.push(start);
        yt.push(y);
    }
    let cov = covariance(&y0, &yt);
    let exact = ou_mode_covariance(k, t, a, c).unwrap();
    assert!(cov.within(exact, 4.0), "{cov} vs {exact}");
}

#[test]
fn static_variance_is_chi() {
    let n = 256;
    let lattice = Lattice::ring(n).unwrap();
    let m = ProductMeasure::bernoulli(0.3).unwrap();
    let chi = 0.21;
    let ys: Vec<[f64; 2]> = (0..4000)
        .map(|i| {
            let c = sample_configuration(&m, &lattice, seed::split(5, i)).unwrap();
            [1, 2].map(|k| density_field(&c, &TestFunction::fourier(k), &m, Channel::occupation(), MovingFrame::rest(), 0.0))
        })
        .collect();
    for j in 0..2 {
        let sq: Vec<f64> = ys.iter().map(|y| y[j] * y[j]).collect();
        assert!(mean_se(&sq).within(chi, 4.0), "k index {j}: {}", mean_se(&sq));
    }
    let cross = covariance(&ys.iter().map(|y| y[0]).collect::<Vec<_>>(), &ys.iter().map(|y| y[1]).collect::<Vec<_>>());
    assert!(cross.within(0.0, 4.0), "{cross}");
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                ensemble_run(
                    &RateModel::wasep(1.0, 1.0),
                    &ProductMeasure::bernoulli(0.5).unwrap(),
                    &Lattice::ring(24).unwrap(),
                    &ScalingSpec::uniform(2.0, 0.02, 4).unwrap(),
                    12,
                    99,
                    SimOptions { counters: true },
                )
                .unwrap()
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn mean_density_is_stationary_at_every_time() {
    let m = ProductMeasure::bernoulli(0.5).unwrap();
    let scaling = ScalingSpec::uniform(2.0, 0.05, 5).unwrap();
    let per = ensemble_map(&RateModel::ssep(), &m, &Lattice::ring(20).unwrap(), &scaling, 1000, 2, SimOptions::default(), |r| {
        Ok(r.samples.iter().map(|c| c.particle_count() as f64 / 20.0).collect::<Vec<_>>())
    })
    .unwrap();
    for i in 0..scaling.sample_times.len() {
        let e = mean_se(&per.iter().map(|p| p[i]).collect::<Vec<_>>());
        assert!(e.within(0.5, 4.0), "t index {i}: {e}");
    }
}

/// Gaussian profiles with width `3 t^{1/z}`, multiplicative noise of 2%.
fn noisy_widths(z: f64, seed_value: u64) -> Vec<(f64, Estimate)> {
    let mut rng = seed::rng(seed_value);
    (0..10)
        .map(|k| {
            let t = 1.6f64.powi(k);
            let sigma = 3.0 * t.powf(1.0 / z);
            let row: Vec<f64> = (0..2048)
                .map(|x| {
                    let d = if x > 1024 { x as f64 - 2048.0 } else { x as f64 };
                    (-(d * d) / (2.0 * sigma * sigma)).exp()
                })
                .collect();
            let noise: f64 = StandardNormal.sample(&mut rng);
            let s = spreading(&row) * (1.0 + 0.02 * noise);
            (t, Estimate::new(s, 0.02 * s))
        })
        .collect()
}

#[test]
fn exponent_fits_cover_the_truth() {
    for z in [2.0, 1.5] {
        let hits = (0..100u64)
            .filter(|&s| {
                let f = fit_dynamic_exponent(&noisy_widths(z, s)).unwrap();
                (f.z - z).abs() <= 2.0 * f.se
            })
            .count();
        // nominal two-sigma coverage is 95%
        assert!(hits >= 88, "z = {z}: {hits}/100 within two standard errors");
    }
}
