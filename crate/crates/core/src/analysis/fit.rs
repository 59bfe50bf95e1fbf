//! Dynamic exponent from the spreading of structure functions.
//!
//! The width is the centred second moment of `S(., t)` inside a circular window
//! of `WINDOW_WIDTHS` widths around the centroid. The window starts at the
//! peak, sized from the peak height, and is refined a few times so that
//! a moving peak and the far-field noise floor do not bias it. The fit is
//! `log sigma = c + (1/z) log t`, weighted by the inverse variance of
//! `log sigma`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::structure::{signed_offset, StructureFunction};
use crate::stats::{weighted_line_fit, Estimate};

/// Half-width of the moment window in widths. The window scales with the
/// width, so for a self-similar profile the truncated moment is a fixed
/// fraction of the full one (0.985 for a Gaussian) and `z` is unaffected.
pub const WINDOW_WIDTHS: f64 = 3.0;
pub const WINDOW_PASSES: usize = 6;
/// A drop of `sigma` by more than this many combined standard errors rejects the fit.
pub const MONOTONE_SIGMAS: f64 = 3.0;
pub const MIN_FIT_POINTS: usize = 5;

/// Fewest sites outside the window for a far-field baseline.
pub const MIN_BASELINE_FRACTION: f64 = 0.125;

/// Width of a correlation profile over ring offsets.
///
/// A flat background is subtracted first. On a ring sampled from a product
/// measure it is the fluctuation of the total mass spread over all sites: zero
/// on average, but large in any finite ensemble.
pub fn spreading(row: &[f64]) -> f64 {
    let n = row.len();
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let offsets: Vec<f64> = (0..n).map(|x| signed_offset(x, n) as f64).collect();
    // start at the peak: travelling modes can sit anywhere on the ring
    let peak = (0..n).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap_or(0);
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut base = sorted[n / 2];
    let height = (row[(peak + n - 1) % n] + row[peak] + row[(peak + 1) % n]) / 3.0 - base;
    let mass: f64 = row.iter().map(|s| s - base).sum();
    if !(mass > 0.0 && height > 0.0) {
        return f64::NAN;
    }
    // a ring-wide first pass is dominated by the noise floor, so the first
    // window comes from the Gaussian width with the same mass and peak height
    let seed = mass / ((2.0 * std::f64::consts::PI).sqrt() * height);
    let mut centre = offsets[peak];
    let mut half = (WINDOW_WIDTHS * seed).clamp(1.0, nf / 2.0);
    let mut sigma = f64::NAN;
    for _ in 0..=WINDOW_PASSES {
        let inside = |d: f64, centre: f64, half: f64| {
            let r = (d - centre).rem_euclid(nf);
            let r = if r > nf / 2.0 { r - nf } else { r };
            (r.abs() <= half).then_some(r)
        };
        let (mut far, mut count) = (0.0, 0usize);
        for (x, &s) in row.iter().enumerate() {
            if inside(offsets[x], centre, half).is_none() {
                far += s;
                count += 1;
            }
        }
        if count as f64 >= MIN_BASELINE_FRACTION * nf {
            base = far / count as f64;
        }
        let (mut m0, mut m1) = (0.0, 0.0);
        for (x, &s) in row.iter().enumerate() {
            if let Some(r) = inside(offsets[x], centre, half) {
                m0 += s - base;
                m1 += (s - base) * r;
            }
        }
        if m0 <= 0.0 {
            break;
        }
        let shift = m1 / m0;
        let mut m2 = 0.0;
        for (x, &s) in row.iter().enumerate() {
            if let Some(r) = inside(offsets[x], centre, half) {
                m2 += (s - base) * (r - shift).powi(2);
            }
        }
        if m2 <= 0.0 {
            break;
        }
        centre += shift;
        sigma = (m2 / m0).sqrt();
        half = (WINDOW_WIDTHS * sigma).clamp(1.0, nf / 2.0);
    }
    sigma
}

/// `(t, sigma(t))` for every positive lag, with batch standard errors.
pub fn spreading_series(s: &StructureFunction) -> Vec<(f64, Estimate)> {
    (0..s.times.len())
        .filter(|&k| s.times[k] > 0.0)
        .map(|k| (s.times[k], s.batch_estimate(k, spreading)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub z: f64,
    pub se: f64,
    /// First and last fitted time.
    pub window: (f64, f64),
    pub r2: f64,
    pub points: usize,
}

impl ExponentFit {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z,se,t_min,t_max,r2,points")?;
        writeln!(w, "{},{},{},{},{},{}", self.z, self.se, self.window.0, self.window.1, self.r2, self.points)
    }
}

/// Fit `sigma ~ t^{1/z}` to a width series.
pub fn fit_dynamic_exponent(points: &[(f64, Estimate)]) -> Result<ExponentFit> {
    let pts: Vec<&(f64, Estimate)> = points.iter().filter(|p| p.0 > 0.0).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::FitRejected(format!("{} usable times, need {MIN_FIT_POINTS}", pts.len())));
    }
    for p in &pts {
        if !(p.1.mean > 0.0) {
            return Err(Error::FitRejected(format!("non-positive width {} at t = {}", p.1.mean, p.0)));
        }
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        let noise = (a.se.powi(2) + b.se.powi(2)).sqrt();
        let noise = if noise.is_finite() { noise } else { 0.0 };
        if b.mean < a.mean - MONOTONE_SIGMAS * noise - 1e-12 * a.mean {
            return Err(Error::FitRejected(format!(
                "width drops from {:.4} to {:.4} between t = {} and t = {} (noise {:.4})",
                a.mean, b.mean, w[0].0, w[1].0, noise
            )));
        }
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.mean.ln()).collect();
    let weighted = pts.iter().all(|p| p.1.se.is_finite() && p.1.se > 0.0);
    let w: Vec<f64> =
        if weighted { pts.iter().map(|p| (p.1.mean / p.1.se).powi(2)).collect() } else { vec![1.0; pts.len()] };
    let (icept, slope, se_w, r2) = weighted_line_fit(&x, &y, &w);
    let dof = (pts.len() - 2) as f64;
    let chi2: f64 = x.iter().zip(&y).zip(&w).map(|((a, b), c)| c * (b - icept - slope * a).powi(2)).sum::<f64>();
    // inflate by the reduced chi^2 when it exceeds one; residual-based when unweighted
    let se_slope = if weighted { se_w * (chi2 / dof).max(1.0).sqrt() } else { se_w * (chi2 / dof).sqrt() };
    if !(slope > 0.0) {
        return Err(Error::FitRejected(format!("non-positive growth exponent {slope}")));
    }
    Ok(ExponentFit {
        z: 1.0 / slope,
        se: se_slope / (slope * slope),
        window: (pts[0].0, pts[pts.len() - 1].0),
        r2,
        points: pts.len(),
    })
}

/// Width series from CSV text: either a structure function (`t,x,S`) or a
/// width series (`t,sigma[,se]`). Structure rows carry no errors, so the fit
/// falls back to unweighted least squares.
pub fn widths_from_csv(text: &str) -> Result<Vec<(f64, Estimate)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::InvalidParameter(format!("row {}: {e}", i + 2)))
        })
        .collect::<Result<_>>()?;
    if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(Error::InvalidParameter(format!("row {r:?} does not match header {header:?}")));
    }
    match header.as_slice() {
        ["t", "x", "S"] => {
            let n = {
                let mut xs: Vec<i64> = rows.iter().map(|r| r[1] as i64).collect();
                xs.sort_unstable();
                xs.dedup();
                xs.len()
            };
            let mut out: Vec<(f64, Estimate)> = Vec::new();
            let mut i = 0;
            while i < rows.len() {
                let t = rows[i][0];
                let mut row = vec![0.0; n];
                while i < rows.len() && rows[i][0] == t {
                    row[(rows[i][1] as i64).rem_euclid(n as i64) as usize] = rows[i][2];
                    i += 1;
                }
                if t > 0.0 {
                    out.push((t, Estimate::new(spreading(&row), f64::INFINITY)));
                }
            }
            Ok(out)
        }
        ["t", "sigma"] => Ok(rows.iter().map(|r| (r[0], Estimate::new(r[1], f64::INFINITY))).collect()),
        ["t", "sigma", "se"] => Ok(rows.iter().map(|r| (r[0], Estimate::new(r[1], r[2]))).collect()),
        _ => Err(Error::InvalidParameter(format!("unrecognised header {header:?}; expected t,x,S or t,sigma[,se]"))),
    }
}

/// Width series and exponent for one structure function.
pub fn fit_structure(s: &StructureFunction) -> Result<(Vec<(f64, Estimate)>, ExponentFit)> {
    let series = spreading_series(s);
    let fit = fit_dynamic_exponent(&series)?;
    Ok((series, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "EW")]
    Ew,
    #[serde(rename = "KPZ")]
    Kpz,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Class::Ew => "EW",
            Class::Kpz => "KPZ",
            Class::Inconclusive => "inconclusive",
        })
    }
}

/// Decision bands: `z > ew` is EW, `z < kpz` is KPZ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    pub ew: f64,
    pub kpz: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self { ew: 1.8, kpz: 1.65 }
    }
}

impl Bands {
    pub fn classify(&self, z: f64) -> Class {
        if z > self.ew {
            Class::Ew
        } else if z < self.kpz {
            Class::Kpz
        } else {
            Class::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub gamma: f64,
    pub z: f64,
    pub se: f64,
    pub class: Class,
}

pub fn classify_crossover(fits: &[(f64, ExponentFit)], bands: Bands) -> Result<Vec<CrossoverRow>> {
    if fits.is_empty() {
        return Err(Error::InvalidParameter("empty gamma grid".into()));
    }
    Ok(fits
        .iter()
        .map(|(g, f)| CrossoverRow { gamma: *g, z: f.z, se: f.se, class: bands.classify(f.z) })
        .collect())
}

pub fn write_crossover_csv<W: Write>(rows: &[CrossoverRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "gamma,z,se,class")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.gamma, r.z, r.se, r.class)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_row(n: usize, centre: f64, sigma: f64) -> Vec<f64> {
        (0..n)
            .map(|x| {
                let mut d = x as f64 - centre;
                d -= (d / n as f64).round() * n as f64;
                (-(d * d) / (2.0 * sigma * sigma)).exp()
            })
            .collect()
    }

    #[test]
    fn width_of_a_moving_gaussian() {
        // truncated at three widths a Gaussian keeps 0.985 of its width
        let s = spreading(&gaussian_row(1024, 700.0, 12.0));
        assert!((s / 12.0 - 0.985).abs() < 0.003, "{s}");
        let s = spreading(&gaussian_row(1024, 512.0, 30.0));
        assert!((s / 30.0 - 0.985).abs() < 0.003, "{s}");
    }

    #[test]
    fn flat_background_is_removed() {
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::seed::rng(3);
        let noise = Normal::new(0.0, 2e-4).unwrap();
        // unit-mass peak of width 40 on 1024 sites, offset worth 30% of its mass
        let row: Vec<f64> = gaussian_row(1024, 300.0, 40.0)
            .iter()
            .map(|g| g / (40.0 * (2.0 * std::f64::consts::PI).sqrt()) + 0.3 / 1024.0 + noise.sample(&mut rng))
            .collect();
        let s = spreading(&row);
        assert!((s / 40.0 - 0.985).abs() < 0.05, "{s}");
    }

    fn synthetic(power: f64) -> Vec<(f64, Estimate)> {
        (0..12)
            .map(|k| {
                let t = 1.5f64.powi(k);
                let sigma = spreading(&gaussian_row(4096, 100.0 + 3.0 * t, 3.0 * t.powf(power)));
                (t, Estimate::new(sigma, 0.01 * sigma))
            })
            .collect()
    }

    #[test]
    fn diffusive_and_kpz_synthetic_exponents() {
        let f = fit_dynamic_exponent(&synthetic(0.5)).unwrap();
        assert!((f.z - 2.0).abs() < 0.02, "{f:?}");
        let f = fit_dynamic_exponent(&synthetic(2.0 / 3.0)).unwrap();
        assert!((f.z - 1.5).abs() < 0.02, "{f:?}");
    }

    #[test]
    fn shrinking_width_is_rejected() {
        let mut p = synthetic(0.5);
        p[6].1.mean *= 0.5;
        assert!(matches!(fit_dynamic_exponent(&p), Err(Error::FitRejected(_))));
        assert!(fit_dynamic_exponent(&p[..3]).is_err());
    }

    #[test]
    fn widths_from_both_schemas() {
        let mut text = String::from("t,x,S\n");
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let row = gaussian_row(512, 0.0, 6.0 * f64::sqrt(t));
            for x in 0..512 {
                text.push_str(&format!("{t},{},{}\n", signed_offset(x, 512), row[x]));
            }
        }
        let w = widths_from_csv(&text).unwrap();
        assert_eq!(w.len(), 6);
        let f = fit_dynamic_exponent(&w).unwrap();
        assert!((f.z - 2.0).abs() < 5e-3, "{f:?}");
        let w = widths_from_csv("t,sigma,se\n1,1,0.1\n").unwrap();
        assert_eq!(w[0].1.se, 0.1);
        assert!(widths_from_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn bands() {
        let b = Bands::default();
        assert_eq!(b.classify(2.0), Class::Ew);
        assert_eq!(b.classify(1.5), Class::Kpz);
        assert_eq!(b.classify(1.7), Class::Inconclusive);
        assert!(classify_crossover(&[], b).is_err());
    }
}
