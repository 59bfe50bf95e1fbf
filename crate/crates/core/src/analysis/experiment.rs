//! Config-driven ensemble runs with CSV, manifest and plot-script output.
//!
//! Outputs are written into `<dir>.partial` and renamed to `<dir>` once
//! everything succeeded. A failed run leaves the partial directory with a
//! `FAILED` file holding the error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::fit::{fit_dynamic_exponent, spreading_series, Class, ExponentFit};
use crate::engine::{ensemble_map, SimOptions, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fields::bg::{bg_time_integrals, bound_shape, second_moment};
use crate::fields::energy::{energy_integrals, energy_stats};
use crate::fields::structure::{combine_structure, trajectory_structure};
use crate::fields::{density_series, martingale_decomposition, Decomposition};
use crate::seed;
use crate::stats::mean_se;

/// Environment variable naming the directory that relative output dirs live in.
pub const OUTPUT_ROOT_VAR: &str = "IPSKIT_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub fit: Option<ExponentFit>,
    /// Why the exponent fit was rejected, if it was.
    pub fit_rejected: Option<String>,
    pub class: Option<Class>,
}

/// What is kept of one trajectory.
struct Reduced {
    density: Vec<Vec<f64>>,
    martingale: Vec<Decomposition>,
    structure: Option<Vec<Vec<f64>>>,
    bg: Vec<f64>,
    energy: Option<(f64, f64)>,
    events: u64,
}

fn reduce(c: &ExperimentConfig, r: TrajectoryRecord) -> Result<Reduced> {
    let channel = c.channel()?;
    let frame = c.frame()?;
    let fs = c.test_functions();
    let e = &c.estimators;
    let density = if e.density {
        fs.iter().map(|f| density_series(&r, f, &c.measure, channel, frame).values).collect()
    } else {
        Vec::new()
    };
    let martingale = if e.martingale {
        fs.iter()
            .map(|f| martingale_decomposition(&r, f, &c.model, &c.measure, channel, frame))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let structure = if e.structure {
        let lags: Vec<usize> = (0..=e.structure_lags).collect();
        Some(trajectory_structure(&r, &c.measure, channel, channel, &lags, e.origin_stride)?)
    } else {
        None
    };
    let bg = if e.bg_boxes.is_empty() {
        Vec::new()
    } else {
        bg_time_integrals(&r, &fs[0].sample(r.n, 0.0), &e.bg_boxes, &c.measure)?
    };
    let energy = if e.energy_eps > 0.0 {
        let t = c.scaling.horizon;
        Some(energy_integrals(&r, &fs[0], e.energy_eps, e.energy_delta, 0.0, t, &c.measure, channel)?)
    } else {
        None
    };
    Ok(Reduced { density, martingale, structure, bg, energy, events: r.events })
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn create(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn column<T>(per: &[T], f: impl Fn(&T) -> f64) -> crate::stats::Estimate {
    mean_se(&per.iter().map(f).collect::<Vec<_>>())
}

fn write_outputs(c: &ExperimentConfig, w: &mut Writer) -> Result<RunSummary> {
    let lattice = c.lattice()?;
    let scaling = c.scaling()?;
    let opts = SimOptions { counters: c.ensemble.counters };
    let seed = c.ensemble.seed;
    let per = ensemble_map(&c.model, &c.measure, &lattice, &scaling, c.ensemble.trajectories, seed, opts, |r| {
        reduce(c, r)
    })?;
    let times = &scaling.sample_times;
    let ks = &c.fields.fourier;
    let e = &c.estimators;
    let mut plots: Vec<(&str, String)> = Vec::new();

    if e.density {
        w.create("density.csv", |o| {
            writeln!(o, "k,t,mean,se,second_moment,second_moment_se")?;
            for (j, k) in ks.iter().enumerate() {
                for (i, t) in times.iter().enumerate() {
                    let m = column(&per, |p| p.density[j][i]);
                    let v = column(&per, |p| p.density[j][i].powi(2));
                    writeln!(o, "{k},{t},{},{},{},{}", m.mean, m.se, v.mean, v.se)?;
                }
            }
            Ok(())
        })?;
        plots.push(("density.gp", plot_by_k("density.csv", "second moment of Y_t(f_k)", 5, ks)));
    }

    if e.martingale {
        w.create("martingale.csv", |o| {
            writeln!(o, "k,t,M,M_se,I,K,realized_qv,realized_qv_se,predictable_qv")?;
            for (j, k) in ks.iter().enumerate() {
                for (i, t) in times.iter().enumerate() {
                    let m = column(&per, |p| p.martingale[j].m[i]);
                    let q = column(&per, |p| p.martingale[j].realized_qv[i]);
                    let a = column(&per, |p| p.martingale[j].i[i]).mean;
                    let b = column(&per, |p| p.martingale[j].k[i]).mean;
                    let g = column(&per, |p| p.martingale[j].predictable_qv[i]).mean;
                    writeln!(o, "{k},{t},{},{},{a},{b},{},{},{g}", m.mean, m.se, q.mean, q.se)?;
                }
            }
            Ok(())
        })?;
        plots.push(("martingale.gp", plot_by_k("martingale.csv", "realized quadratic variation", 7, ks)));
    }

    let mut fit = None;
    let mut class = None;
    let mut rejected: Option<String> = None;
    if e.structure {
        let rows: Vec<Vec<Vec<f64>>> = per.iter().map(|p| p.structure.clone().unwrap_or_default()).collect();
        let lag_times = (0..=e.structure_lags).map(|l| times[l] - times[0]).collect();
        let s = combine_structure(lattice.n(), lag_times, &rows);
        w.create("structure.csv", |o| s.write_csv(o))?;
        plots.push(("structure.gp", structure_plot()));
        if e.fit {
            let series = spreading_series(&s);
            w.create("spreading.csv", |o| {
                writeln!(o, "t,sigma,se")?;
                for (t, est) in &series {
                    writeln!(o, "{t},{},{}", est.mean, est.se)?;
                }
                Ok(())
            })?;
            match fit_dynamic_exponent(&series) {
                Ok(f) => {
                    w.create("fit.csv", |o| {
                        f.write_csv(&mut *o)?;
                        Ok(())
                    })?;
                    plots.push(("spreading.gp", spreading_plot(&f)));
                    class = Some(c.bands().classify(f.z));
                    fit = Some(f);
                }
                // a rejected fit is a result, not a failed run
                Err(Error::FitRejected(why)) => {
                    class = Some(Class::Inconclusive);
                    rejected = Some(why);
                }
                Err(other) => return Err(other),
            }
        }
    }

    if !e.bg_boxes.is_empty() {
        w.create("bg.csv", |o| {
            writeln!(o, "L,residual,se,bound_shape")?;
            for (j, &l) in e.bg_boxes.iter().enumerate() {
                let r = second_moment(&per.iter().map(|p| p.bg[j]).collect::<Vec<_>>());
                writeln!(o, "{l},{},{},{}", r.mean, r.se, bound_shape(c.scaling.horizon, l, lattice.n()))?;
            }
            Ok(())
        })?;
        plots.push(("bg.gp", bg_plot()));
    }

    if e.energy_eps > 0.0 {
        let pairs: Vec<(f64, f64)> = per.iter().filter_map(|p| p.energy).collect();
        let st = energy_stats(&pairs);
        w.create("energy.csv", |o| {
            writeln!(o, "eps,delta,linear,linear_se,nonlinear,nonlinear_se")?;
            writeln!(
                o,
                "{},{},{},{},{},{}",
                e.energy_eps, e.energy_delta, st.linear.mean, st.linear.se, st.nonlinear.mean, st.nonlinear.se
            )
        })?;
    }

    for (name, body) in &plots {
        w.create(name, |o| o.write_all(body.as_bytes()))?;
    }
    w.create("config.toml", |o| o.write_all(c.to_toml().as_bytes()))?;

    let events: u64 = per.iter().map(|p| p.events).sum();
    let mut files = w.files.clone();
    files.push("manifest.toml".into());
    w.create("manifest.toml", |o| {
        writeln!(o, "config_hash = \"{}\"", c.hash())?;
        writeln!(o, "version = \"{}\"", env!("CARGO_PKG_VERSION"))?;
        writeln!(o, "master_seed = {seed}")?;
        writeln!(o, "trajectories = {}", per.len())?;
        writeln!(o, "events = {events}")?;
        if let (Some(f), Some(k)) = (&fit, class) {
            writeln!(o, "z = {}\nz_se = {}\nclass = \"{k}\"", f.z, f.se)?;
        }
        if let Some(why) = &rejected {
            writeln!(o, "fit_rejected = {why:?}\nclass = \"{}\"", Class::Inconclusive)?;
        }
        let list: Vec<String> = files.iter().map(|f| format!("\"{f}\"")).collect();
        writeln!(o, "files = [{}]", list.join(", "))?;
        writeln!(o, "\n# per trajectory: [initial-state seed, dynamics seed]")?;
        writeln!(o, "seeds = [")?;
        for i in 0..per.len() as u64 {
            writeln!(o, "  [{}, {}],", seed::init_seed(seed, i), seed::dynamics_seed(seed, i))?;
        }
        writeln!(o, "]")
    })?;
    Ok(RunSummary { dir: PathBuf::new(), files: w.files.clone(), fit, fit_rejected: rejected, class })
}

fn plot_by_k(file: &str, title: &str, col: usize, ks: &[i64]) -> String {
    let mut s = format!("set datafile separator ','\nset key autotitle columnhead\nset title '{title}'\nset xlabel 't'\n");
    let parts: Vec<String> = ks
        .iter()
        .map(|k| format!("'{file}' using ($1=={k} ? $2 : 1/0):{col} with lines title 'k={k}'"))
        .collect();
    s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    s
}

fn structure_plot() -> String {
    "set datafile separator ','\nset xlabel 'x'\nset ylabel 'S(x,t)'\nset cblabel 't'\n\
     plot 'structure.csv' using 2:3:1 skip 1 with points pointtype 7 pointsize 0.3 palette notitle\n"
        .to_string()
}

fn spreading_plot(f: &ExponentFit) -> String {
    format!(
        "set datafile separator ','\nset logscale xy\nset xlabel 't'\nset ylabel 'sigma(t)'\n\
         set title 'z = {:.3} +- {:.3}'\n\
         plot 'spreading.csv' using 1:2:3 skip 1 with yerrorbars title 'width'\n",
        f.z, f.se
    )
}

fn bg_plot() -> String {
    "set datafile separator ','\nset logscale xy\nset xlabel 'L'\n\
     plot 'bg.csv' using 1:2:3 skip 1 with yerrorbars title 'residual', \
     '' using 1:4 skip 1 with lines title 't(L/n + tn/L^2)'\n"
        .to_string()
}

/// Run a validated config, writing under `root`.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<RunSummary> {
    config.validate()?;
    let dir = root.join(&config.output.dir);
    let partial = PathBuf::from(format!("{}.partial", dir.display()));
    if partial.exists() {
        fs::remove_dir_all(&partial)?;
    }
    fs::create_dir_all(&partial)?;
    let mut w = Writer { dir: partial.clone(), files: Vec::new() };
    let finish = |w: &mut Writer| -> Result<RunSummary> {
        let mut s = write_outputs(config, w)?;
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::rename(&partial, &dir)?;
        s.dir = dir.clone();
        Ok(s)
    };
    finish(&mut w).inspect_err(|e| {
        let _ = fs::write(partial.join("FAILED"), format!("{e}\n"));
    })
}

/// Load, validate and run a config file.
pub fn run_experiment_file(path: &Path, root: &Path) -> Result<RunSummary> {
    let c = ExperimentConfig::load(path)?;
    run_experiment(&c, root)
}

/// Whether an error comes from the configuration rather than the run.
pub fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"
[model]
kind = "nearest_exclusion"
b_plus = 0.5
b_minus = 0.5
a = 0.0
gamma = 0.0

[lattice]
n = 32

[scaling]
horizon = 0.02
samples = 20

[ensemble]
trajectories = 4
seed = 5

[output]
dir = "unit"
"#;

    #[test]
    fn smoke_run_renames_partial() {
        let tmp = tempfile::tempdir().unwrap();
        let c = ExperimentConfig::parse(SMOKE).unwrap();
        let s = run_experiment(&c, tmp.path()).unwrap();
        assert!(s.dir.join("density.csv").exists());
        assert!(s.dir.join("manifest.toml").exists());
        assert!(!tmp.path().join("unit.partial").exists());
    }

    #[test]
    fn failed_runs_are_marked() {
        let tmp = tempfile::tempdir().unwrap();
        // a plain file where the output directory should go blocks the final rename
        fs::write(tmp.path().join("unit"), "occupied").unwrap();
        let c = ExperimentConfig::parse(SMOKE).unwrap();
        assert!(run_experiment(&c, tmp.path()).is_err());
        assert!(tmp.path().join("unit.partial/FAILED").exists());
        assert!(tmp.path().join("unit.partial/density.csv").exists());
    }
}
