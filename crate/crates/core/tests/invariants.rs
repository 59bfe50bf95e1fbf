//! Property tests over random inputs.

use ipskit::fields::structure::cross_correlation;
use ipskit::fields::{density_field, Channel, MovingFrame, TestFunction};
use ipskit::hydro::{solve_abc_hydro, solve_fractional_heat, solve_heat, solve_viscous_burgers, GridFunction};
use ipskit::lattice::{sample_configuration, Configuration, Lattice, ProductMeasure, Species};
use ipskit::modes::{current_jacobian, normal_modes};
use proptest::prelude::*;

fn config(n: usize, seed: u64, rho: f64) -> Configuration {
    sample_configuration(&ProductMeasure::bernoulli(rho).unwrap(), &Lattice::ring(n).unwrap(), seed).unwrap()
}

fn profile(m: usize, amps: &[f64], base: f64) -> GridFunction {
    GridFunction::from_fn(m, |u| {
        base + amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * (2.0 * std::f64::consts::PI * (k + 1) as f64 * u).sin())
            .sum::<f64>()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_field_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64,
                               f in prop::collection::vec(-1.0..1.0f64, 16), g in prop::collection::vec(-1.0..1.0f64, 16)) {
        let m = ProductMeasure::bernoulli(0.4).unwrap();
        let c = config(16, seed, 0.4);
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let y = |v: &Vec<f64>| density_field(&c, &TestFunction::Tabulated { values: v.clone() }, &m, Channel::occupation(), MovingFrame::rest(), 0.0);
        prop_assert!((y(&mix) - a * y(&f) - b * y(&g)).abs() < 1e-10);
    }

    #[test]
    fn frame_shift_equals_rotation(seed in any::<u64>(), shift in 0usize..32, k in -4i64..5) {
        let m = ProductMeasure::bernoulli(0.5).unwrap();
        let c = config(32, seed, 0.5);
        let mut rotated = c.sites().to_vec();
        rotated.rotate_right(shift);
        let r = Configuration::exclusion(rotated).unwrap();
        let f = TestFunction::fourier(k);
        let t = 0.5;
        let frame = MovingFrame::new(shift as f64 / t);
        let moved = density_field(&r, &f, &m, Channel::occupation(), frame, t);
        let still = density_field(&c, &f, &m, Channel::occupation(), MovingFrame::rest(), 0.0);
        prop_assert!((moved - still).abs() < 1e-10);
    }

    #[test]
    fn equal_time_correlation_is_even(v in prop::collection::vec(-1.0..1.0f64, 24)) {
        let s = cross_correlation(&v, &v);
        for x in 1..24 {
            prop_assert!((s[x] - s[24 - x]).abs() < 1e-12);
        }
    }

    #[test]
    fn solvers_conserve_mass(amps in prop::collection::vec(-0.1..0.1f64, 3), t in 0.0..0.02f64) {
        let g = profile(64, &amps, 0.5);
        let m0 = g.mass().0;
        for out in [
            solve_heat(&g, t, 0.5).unwrap(),
            solve_fractional_heat(&g, t, 1.5, 1.0).unwrap(),
            solve_viscous_burgers(&g, t, 0.8).unwrap(),
        ] {
            prop_assert!((out.mass().0 - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn abc_hydro_conserves_both_species(amps in prop::collection::vec(-0.05..0.05f64, 2), e in prop::array::uniform3(-1.0..1.0f64)) {
        let a = profile(32, &amps, 0.3);
        let b = profile(32, &[amps[1], -amps[0]], 0.3);
        let g = GridFunction::pair(a.values, b.values, 0.0).unwrap();
        let out = solve_abc_hydro(&g, 0.01, e).unwrap();
        let (m0, n0) = g.mass();
        let (m1, n1) = out.mass();
        prop_assert!((m0 - m1).abs() < 1e-10);
        prop_assert!((n0.unwrap() - n1.unwrap()).abs() < 1e-10);
        prop_assert!(out.constraint_violation() <= 1e-9);
    }

    #[test]
    fn modes_diagonalize_the_jacobian(ra in 0.05..0.6f64, rb in 0.05..0.35f64, e in prop::array::uniform3(-2.0..2.0f64)) {
        let rho = [ra, rb, 1.0 - ra - rb];
        if let Ok(spec) = normal_modes(Species::A, rho, e) {
            let j = current_jacobian(spec.density, spec.g).unwrap();
            for i in 0..2 {
                let w = spec.coefficients[i];
                let l = spec.eigenvalues[i];
                for col in 0..2 {
                    let lhs = w[0] * j[0][col] + w[1] * j[1][col];
                    prop_assert!((lhs - l * w[col]).abs() < 1e-10 * (1.0 + l.abs()));
                }
            }
        }
    }

    #[test]
    fn mode_vectors_are_scale_invariant(c in 0.1..10.0f64, e in prop::array::uniform3(-2.0..2.0f64), shift in -3.0..3.0f64) {
        let rho = [0.3, 0.25, 0.45];
        let scaled = [c * e[0] + shift, c * e[1] + shift, c * e[2] + shift];
        if let (Ok(a), Ok(b)) = (normal_modes(Species::A, rho, e), normal_modes(Species::A, rho, scaled)) {
            for i in 0..2 {
                prop_assert!((b.eigenvalues[i] - c * a.eigenvalues[i]).abs() < 1e-9 * (1.0 + a.eigenvalues[i].abs()) * c);
                for k in 0..2 {
                    prop_assert!((a.coefficients[i][k] - b.coefficients[i][k]).abs() < 1e-8);
                }
            }
        }
    }
}
