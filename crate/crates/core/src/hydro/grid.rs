use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::lattice::Configuration;

/// Values at the nodes `u = i/m` of a uniform periodic grid, with an optional
/// second component for two-species profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub second: Option<Vec<f64>>,
    pub time: f64,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        if values.is_empty() {
            return invalid("empty grid");
        }
        Ok(Self { values, second: None, time })
    }

    pub fn pair(a: Vec<f64>, b: Vec<f64>, time: f64) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return invalid(format!("component lengths {} and {} differ or are empty", a.len(), b.len()));
        }
        Ok(Self { values: a, second: Some(b), time })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|i| f(i as f64 / m as f64)).collect(), 0.0)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// `int rho du` for each component (rectangle rule, exact for trigonometric data).
    pub fn mass(&self) -> (f64, Option<f64>) {
        let m = self.m() as f64;
        (self.values.iter().sum::<f64>() / m, self.second.as_ref().map(|s| s.iter().sum::<f64>() / m))
    }

    /// Largest violation of `0 <= rho <= 1` (first component) or of the
    /// simplex `rho_a, rho_b >= 0, rho_a + rho_b <= 1` for pairs.
    pub fn constraint_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &a) in self.values.iter().enumerate() {
            worst = worst.max(-a).max(a - 1.0);
            if let Some(s) = &self.second {
                let b = s[i];
                worst = worst.max(-b).max(a + b - 1.0);
            }
        }
        worst
    }

    /// CSV `u,value[,value2]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.m() as f64;
        match &self.second {
            None => {
                writeln!(w, "u,value")?;
                for (i, v) in self.values.iter().enumerate() {
                    writeln!(w, "{},{v}", i as f64 / m)?;
                }
            }
            Some(s) => {
                writeln!(w, "u,value,value2")?;
                for (i, (v, b)) in self.values.iter().zip(s).enumerate() {
                    writeln!(w, "{},{v},{b}", i as f64 / m)?;
                }
            }
        }
        Ok(())
    }
}

fn block(values: &[f64], m: usize) -> Vec<f64> {
    let n = values.len();
    if n.is_multiple_of(m) {
        let k = n / m;
        values.chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect()
    } else {
        // piecewise-constant remap: cell j takes the node nearest its left edge
        (0..m).map(|j| values[(j * n) / m]).collect()
    }
}

/// Average onto `m` cells; blocks of `n/m` nodes when `m` divides `n`,
/// otherwise the piecewise-constant remap described above.
pub fn block_average(g: &GridFunction, m: usize) -> Result<GridFunction> {
    if m == 0 || m > g.m() {
        return invalid(format!("cannot coarsen {} nodes to {m} cells", g.m()));
    }
    Ok(GridFunction {
        values: block(&g.values, m),
        second: g.second.as_ref().map(|s| block(s, m)),
        time: g.time,
    })
}

/// Ensemble site means of occupation (exclusion) or of species A and B (ABC).
pub fn empirical_profile(configs: &[&Configuration], time: f64) -> Result<GridFunction> {
    let first = configs.first().ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
    let n = first.len();
    let k = configs.len() as f64;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for c in configs {
        if c.len() != n {
            return invalid("configurations of different sizes");
        }
        for (x, &s) in c.sites().iter().enumerate() {
            match c {
                Configuration::Exclusion(_) => a[x] += s as f64,
                Configuration::Species(_) => match s {
                    0 => a[x] += 1.0,
                    1 => b[x] += 1.0,
                    _ => {}
                },
            }
        }
    }
    a.iter_mut().chain(b.iter_mut()).for_each(|v| *v /= k);
    match first {
        Configuration::Exclusion(_) => GridFunction::new(a, time),
        Configuration::Species(_) => GridFunction::pair(a, b, time),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    LInf,
}

/// Distance between two profiles after coarsening both to the smaller grid.
/// For pairs the two component distances are added.
pub fn hydro_compare(empirical: &GridFunction, pde: &GridFunction, norm: Norm) -> Result<f64> {
    let m = empirical.m().min(pde.m());
    let a = block_average(empirical, m)?;
    let b = block_average(pde, m)?;
    let dist = |x: &[f64], y: &[f64]| match norm {
        Norm::L1 => x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>() / m as f64,
        Norm::LInf => x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max),
    };
    let mut d = dist(&a.values, &b.values);
    match (&a.second, &b.second) {
        (Some(x), Some(y)) => d += dist(x, y),
        (None, None) => {}
        _ => return Err(Error::Incompatible("cannot compare a pair profile with a scalar one".into())),
    }
    Ok(d)
}
