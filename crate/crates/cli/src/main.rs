//! `ipskit` command line: run and validate experiment configs, fit dynamic
//! exponents from CSV, and print ABC normal modes.
//!
//! Exit codes: 0 ok, 1 configuration or input error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ipskit::analysis::{fit_dynamic_exponent, output_root, run_experiment, widths_from_csv, Bands, ExperimentConfig};
use ipskit::lattice::Species;
use ipskit::modes::normal_modes;
use ipskit::Error;

#[derive(Parser)]
#[command(name = "ipskit", version, about = "Interacting particle system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; outputs go under $IPSKIT_OUTPUT_ROOT (default: current dir).
    Run { config: PathBuf },
    /// Check a config without running it and print its hash.
    Validate { config: PathBuf },
    /// Fit sigma(t) ~ t^(1/z) from a structure CSV (t,x,S) or width CSV (t,sigma[,se]).
    Fit {
        csv: PathBuf,
        #[arg(long, default_value_t = Bands::default().ew)]
        ew: f64,
        #[arg(long, default_value_t = Bands::default().kpz)]
        kpz: f64,
    },
    /// Normal modes for ABC fields given as "E_A,E_B,E_C".
    Modes {
        fields: String,
        /// Densities "rho_A,rho_B".
        #[arg(long, default_value = "0.3333333333333333,0.3333333333333333")]
        rho: String,
        /// Reference species: a, b or c.
        #[arg(long, default_value = "a")]
        species: char,
    },
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) => Failure::Input(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn numbers(s: &str, want: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Input(format!("'{s}': {e}")))?;
    if v.len() != want {
        return Err(Failure::Input(format!("'{s}': expected {want} comma-separated numbers")));
    }
    Ok(v)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config } => {
            let c = ExperimentConfig::load(&config)?;
            let s = run_experiment(&c, &output_root()).map_err(|e| Failure::Runtime(e.to_string()))?;
            println!("wrote {} files to {}", s.files.len(), s.dir.display());
            if let (Some(f), Some(k)) = (s.fit, s.class) {
                println!("z = {:.4} +- {:.4} ({k})", f.z, f.se);
            }
            if let Some(why) = &s.fit_rejected {
                println!("fit rejected: {why}");
            }
        }
        Command::Validate { config } => {
            let c = ExperimentConfig::load(&config)?;
            println!("ok {}", c.hash());
        }
        Command::Fit { csv, ew, kpz } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| Failure::Input(format!("{}: {e}", csv.display())))?;
            let widths = widths_from_csv(&text)?;
            let f = fit_dynamic_exponent(&widths).map_err(|e| Failure::Runtime(e.to_string()))?;
            let class = Bands { ew, kpz }.classify(f.z);
            println!("z = {:.4} +- {:.4}", f.z, f.se);
            println!("window = [{}, {}] over {} points, R^2 = {:.5}", f.window.0, f.window.1, f.points, f.r2);
            println!("class = {class}");
        }
        Command::Modes { fields, rho, species } => {
            let e = numbers(&fields, 3)?;
            let r = numbers(&rho, 2)?;
            let alpha = match species.to_ascii_lowercase() {
                'a' => Species::A,
                'b' => Species::B,
                'c' => Species::C,
                other => return Err(Failure::Input(format!("unknown species '{other}'"))),
            };
            let spec = normal_modes(alpha, [r[0], r[1], 1.0 - r[0] - r[1]], [e[0], e[1], e[2]])?;
            println!("case = {:?}", spec.case);
            for (i, name) in ["Z", "Z~"].iter().enumerate() {
                let [c0, c1] = spec.coefficients[i];
                println!(
                    "{name}: ({c0:.6}, {c1:.6})  eigenvalue {:.6}  self-coupling {:.6}  {:?}",
                    spec.eigenvalues[i], spec.self_coupling[i], spec.classes[i]
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
