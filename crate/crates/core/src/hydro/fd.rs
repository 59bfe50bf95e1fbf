//! Finite-difference and finite-volume solvers in conservative form on the torus.

use super::grid::GridFunction;
use crate::error::{invalid, Error, Result};

/// Courant number used by every explicit scheme here.
pub const CFL: f64 = 0.4;

/// Flux-plus-diffusion right-hand side: `D Delta rho_c - d_u F_c(rho)` per
/// component, with centred face fluxes `(F_i + F_{i+1})/2`.
fn rhs(state: &[Vec<f64>], diffusivity: f64, flux: &dyn Fn(&[f64]) -> Vec<f64>, out: &mut [Vec<f64>]) {
    let m = state[0].len();
    let h = 1.0 / m as f64;
    let comps = state.len();
    let mut point = vec![0.0; comps];
    let fluxes: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            for c in 0..comps {
                point[c] = state[c][i];
            }
            flux(&point)
        })
        .collect();
    for c in 0..comps {
        let s = &state[c];
        for i in 0..m {
            let (l, r) = ((i + m - 1) % m, (i + 1) % m);
            let lap = (s[r] - 2.0 * s[i] + s[l]) / (h * h);
            let face_r = 0.5 * (fluxes[i][c] + fluxes[r][c]);
            let face_l = 0.5 * (fluxes[l][c] + fluxes[i][c]);
            out[c][i] = diffusivity * lap - (face_r - face_l) / h;
        }
    }
}

/// Heun (RK2) integration with `dt <= CFL min(h^2/(2D), h/speed)`.
fn heun(
    mut state: Vec<Vec<f64>>,
    t: f64,
    diffusivity: f64,
    speed: f64,
    flux: &dyn Fn(&[f64]) -> Vec<f64>,
    check: &dyn Fn(&[Vec<f64>], f64) -> Result<()>,
) -> Result<Vec<Vec<f64>>> {
    if t < 0.0 {
        return invalid(format!("negative time {t}"));
    }
    let m = state[0].len();
    let h = 1.0 / m as f64;
    let mut dt_max = f64::INFINITY;
    if diffusivity > 0.0 {
        dt_max = dt_max.min(h * h / (2.0 * diffusivity));
    }
    if speed > 0.0 {
        dt_max = dt_max.min(h / speed);
    }
    let dt_max = CFL * dt_max;
    let steps = if t == 0.0 { 0 } else { (t / dt_max).ceil() as usize };
    let dt = if steps > 0 { t / steps as f64 } else { 0.0 };
    let mut k1 = vec![vec![0.0; m]; state.len()];
    let mut k2 = k1.clone();
    let mut mid = state.clone();
    for step in 0..steps {
        rhs(&state, diffusivity, flux, &mut k1);
        for c in 0..state.len() {
            for i in 0..m {
                mid[c][i] = state[c][i] + dt * k1[c][i];
            }
        }
        rhs(&mid, diffusivity, flux, &mut k2);
        for c in 0..state.len() {
            for i in 0..m {
                state[c][i] += 0.5 * dt * (k1[c][i] + k2[c][i]);
            }
        }
        check(&state, (step + 1) as f64 * dt)?;
    }
    Ok(state)
}

fn no_check(_: &[Vec<f64>], _: f64) -> Result<()> {
    Ok(())
}

/// `d_t rho = 1/2 Delta rho + (1 - 2 b_+) d_u (rho (1 - rho))`.
pub fn solve_viscous_burgers(init: &GridFunction, t: f64, b_plus: f64) -> Result<GridFunction> {
    let k = 2.0 * b_plus - 1.0;
    let flux = move |r: &[f64]| vec![k * r[0] * (1.0 - r[0])];
    let speed = k.abs() * init.values.iter().map(|r| (1.0 - 2.0 * r).abs()).fold(1.0, f64::max);
    let out = heun(vec![init.values.clone()], t, 0.5, speed, &flux, &no_check)?;
    GridFunction::new(out.into_iter().next().expect("one component"), init.time + t)
}

/// Godunov flux for `F(r) = k r (1 - r)`.
fn godunov(k: f64, a: f64, b: f64) -> f64 {
    let f = |r: f64| k * r * (1.0 - r);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut cands = vec![f(a), f(b)];
    if lo < 0.5 && 0.5 < hi {
        cands.push(f(0.5));
    }
    if a <= b {
        cands.into_iter().fold(f64::INFINITY, f64::min)
    } else {
        cands.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Entropy solution of `d_t rho = (1 - 2 b_+) d_u (rho (1 - rho))` by a first-order
/// Godunov scheme.
pub fn solve_inviscid_burgers(init: &GridFunction, t: f64, b_plus: f64) -> Result<GridFunction> {
    if t < 0.0 {
        return invalid(format!("negative time {t}"));
    }
    let k = 2.0 * b_plus - 1.0;
    let m = init.m();
    let h = 1.0 / m as f64;
    let mut rho = init.values.clone();
    let speed = k.abs() * rho.iter().map(|r| (1.0 - 2.0 * r).abs()).fold(1.0, f64::max);
    let steps = if t == 0.0 || k == 0.0 { 0 } else { (t * speed / (CFL * h)).ceil() as usize };
    let dt = if steps > 0 { t / steps as f64 } else { 0.0 };
    let mut faces = vec![0.0; m];
    for _ in 0..steps {
        for i in 0..m {
            faces[i] = godunov(k, rho[i], rho[(i + 1) % m]);
        }
        for i in 0..m {
            rho[i] -= dt / h * (faces[i] - faces[(i + m - 1) % m]);
        }
    }
    GridFunction::new(rho, init.time + t)
}

/// Tolerance on simplex violations before the ABC solver aborts.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// `d_t rho = Delta rho - d_u (X(rho) g_E)` for `rho = (rho_A, rho_B)` with
/// `g_E = (E_A - E_C, E_B - E_C)`.
pub fn solve_abc_hydro(init: &GridFunction, t: f64, fields: [f64; 3]) -> Result<GridFunction> {
    let second = init.second.clone().ok_or_else(|| Error::Incompatible("ABC hydrodynamics needs a pair profile".into()))?;
    if init.constraint_violation() > SIMPLEX_TOLERANCE {
        return Err(Error::Simplex(format!("initial profile violates the simplex by {:.3e}", init.constraint_violation())));
    }
    let g = [fields[0] - fields[2], fields[1] - fields[2]];
    let flux = move |r: &[f64]| {
        let (a, b) = (r[0], r[1]);
        vec![a * (1.0 - a) * g[0] - a * b * g[1], -a * b * g[0] + b * (1.0 - b) * g[1]]
    };
    let speed = 2.0 * (g[0].abs() + g[1].abs());
    let check = |s: &[Vec<f64>], time: f64| {
        let gf = GridFunction { values: s[0].clone(), second: Some(s[1].clone()), time };
        let v = gf.constraint_violation();
        if v > SIMPLEX_TOLERANCE {
            let worst = (0..s[0].len())
                .max_by(|&i, &j| {
                    let f = |k: usize| (-s[0][k]).max(-s[1][k]).max(s[0][k] + s[1][k] - 1.0);
                    f(i).total_cmp(&f(j))
                })
                .unwrap_or(0);
            return Err(Error::Simplex(format!(
                "violation {v:.3e} at node {worst} (rho_A = {}, rho_B = {}) at time {time}",
                s[0][worst], s[1][worst]
            )));
        }
        Ok(())
    };
    let mut out = heun(vec![init.values.clone(), second], t, 1.0, speed, &flux, &check)?.into_iter();
    let a = out.next().expect("two components");
    let b = out.next().expect("two components");
    GridFunction::pair(a, b, init.time + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::spectral::solve_heat;
    use std::f64::consts::PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn symmetric_burgers_is_heat() {
        let g = GridFunction::from_fn(64, |u| 0.5 + 0.2 * (2.0 * PI * u).sin()).unwrap();
        let a = solve_viscous_burgers(&g, 0.05, 0.5).unwrap();
        let b = solve_heat(&g, 0.05, 0.5).unwrap();
        assert!(max_diff(&a.values, &b.values) < 5e-4);
    }

    #[test]
    fn constants_are_stationary() {
        let g = GridFunction::from_fn(32, |_| 0.3).unwrap();
        assert!(max_diff(&solve_viscous_burgers(&g, 0.1, 1.0).unwrap().values, &g.values) < 1e-14);
        assert!(max_diff(&solve_inviscid_burgers(&g, 0.1, 1.0).unwrap().values, &g.values) < 1e-14);
        let p = GridFunction::pair(vec![1.0 / 3.0; 16], vec![1.0 / 3.0; 16], 0.0).unwrap();
        let s = solve_abc_hydro(&p, 0.05, [2.0, -1.0, 0.5]).unwrap();
        assert!(max_diff(&s.values, &p.values) < 1e-14);
    }

    #[test]
    fn burgers_self_convergence_is_second_order() {
        let sol = |m: usize| {
            let g = GridFunction::from_fn(m, |u| 0.5 + 0.1 * (2.0 * PI * u).sin()).unwrap();
            solve_viscous_burgers(&g, 0.1, 1.0).unwrap().values
        };
        let (a, b, c) = (sol(32), sol(64), sol(128));
        let e1 = (0..32).map(|i| (a[i] - b[2 * i]).abs()).fold(0.0, f64::max);
        let e2 = (0..64).map(|i| (b[i] - c[2 * i]).abs()).fold(0.0, f64::max);
        assert!((e1 / e2).log2() >= 1.8, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn riemann_problems() {
        let m = 200;
        let step = |l: f64, r: f64| {
            GridFunction::new((0..m).map(|i| if (m / 4..3 * m / 4).contains(&i) { l } else { r }).collect(), 0.0)
                .unwrap()
        };
        // rarefaction fan from (1, 0), mass conserved
        let g = step(1.0, 0.0);
        let s = solve_inviscid_burgers(&g, 0.1, 1.0).unwrap();
        assert!((s.mass().0 - g.mass().0).abs() < 1e-12);
        assert!(s.values.iter().any(|&v| v > 0.1 && v < 0.9));
        // (0, 1) at x = m/4 is a standing shock: the left jump stays within one cell
        let g = step(0.0, 1.0);
        let s = solve_inviscid_burgers(&g, 0.1, 1.0).unwrap();
        let cross = (1..m / 2).find(|&i| s.values[i - 1] > 0.5 && s.values[i] <= 0.5).unwrap();
        assert!((cross as i64 - (m / 4) as i64).abs() <= 1, "shock at {cross}");
    }

    #[test]
    fn equal_fields_decouple() {
        let a: Vec<f64> = (0..64).map(|i| 0.3 + 0.1 * (2.0 * PI * i as f64 / 64.0).cos()).collect();
        let b: Vec<f64> = (0..64).map(|i| 0.3 - 0.1 * (4.0 * PI * i as f64 / 64.0).sin()).collect();
        let p = GridFunction::pair(a.clone(), b.clone(), 0.0).unwrap();
        let s = solve_abc_hydro(&p, 0.02, [1.0, 1.0, 1.0]).unwrap();
        let ha = solve_heat(&GridFunction::new(a, 0.0).unwrap(), 0.02, 1.0).unwrap();
        let hb = solve_heat(&GridFunction::new(b, 0.0).unwrap(), 0.02, 1.0).unwrap();
        assert!(max_diff(&s.values, &ha.values) < 1e-3);
        assert!(max_diff(s.second.as_ref().unwrap(), &hb.values) < 1e-3);
        let (m0, m1) = p.mass();
        let (s0, s1) = s.mass();
        assert!((m0 - s0).abs() < 1e-10 && (m1.unwrap() - s1.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn abc_reduces_to_burgers_without_b() {
        // rho_B = 0, E_B = E_C: rho_A solves d_t rho = Delta rho - E d_u (rho (1 - rho))
        let a: Vec<f64> = (0..64).map(|i| 0.5 + 0.2 * (2.0 * PI * i as f64 / 64.0).sin()).collect();
        let p = GridFunction::pair(a.clone(), vec![0.0; 64], 0.0).unwrap();
        let s = solve_abc_hydro(&p, 0.01, [1.5, 0.0, 0.0]).unwrap();
        assert!(s.second.as_ref().unwrap().iter().all(|&v| v.abs() < 1e-14));
        assert!(s.values.iter().zip(&a).any(|(x, y)| (x - y).abs() > 1e-3));
    }

    #[test]
    fn simplex_violation_aborts() {
        let p = GridFunction::pair(vec![0.7; 8], vec![0.5; 8], 0.0).unwrap();
        assert!(matches!(solve_abc_hydro(&p, 0.01, [1.0, 0.0, 0.0]), Err(Error::Simplex(_))));
    }
}
