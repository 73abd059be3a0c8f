use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lindblad_ground::config::{execute, load_config, resolve};
use lindblad_ground::filter::FilterParams;
use lindblad_ground::report::{filter_tables, jump_report, plot_svg, read_csv, PlotKind};
use lindblad_ground::verify::{run_verify, Level};
use lindblad_ground::{Error, Result};

/// Worker threads for trajectory and Monte Carlo runs (default: all cores).
const WORKERS_ENV: &str = "LINDBLAD_GROUND_WORKERS";

#[derive(Parser)]
#[command(name = "lindblad-ground", version, about = "Single-ancilla Lindblad ground-state preparation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a config; writes <prefix>.csv, <prefix>.manifest.json and optional plots.
    Run { config: PathBuf },
    /// Run the self-check suite; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value = "fast")]
        level: String,
        /// Flip the sign of the quadrature weights at negative nodes.
        #[arg(long)]
        mutation: bool,
        /// Write the JSON report here instead of printing it on failure.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Plot one or more time-series CSVs on one canvas.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// energy-time, overlap-time, energy-htime or overlap-htime
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
        /// Legend entries, one per CSV (default: file stems).
        #[arg(long)]
        label: Vec<String>,
    },
    /// Write (omega, f_hat) and (s, Re f, Im f) tables.
    FilterTable {
        /// Take the instance and filter overrides from a run config.
        #[arg(long, conflicts_with_all = ["norm_h", "gap"])]
        config: Option<PathBuf>,
        #[arg(long, requires = "gap")]
        norm_h: Option<f64>,
        #[arg(long, requires = "norm_h")]
        gap: Option<f64>,
        #[arg(long)]
        clamp: bool,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// |K|, ground residual, |K - K_s| and the energy-basis entries of K as CSV.
    JumpReport {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let run = resolve(load_config(&config)?)?;
            let (record, artifacts) = execute(&run)?;
            let last = record.last();
            println!(
                "final overlap {:.4} +- {:.4}, energy {:.6} (lambda_0 = {:.6}), h_time {:.1}",
                last.overlap_mean, last.overlap_se, last.energy_mean, record.ground_energy, last.h_time
            );
            println!("wrote {}", artifacts.csv.display());
            println!("wrote {}", artifacts.manifest.display());
            for p in &artifacts.plots {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Verify { level, mutation, report } => {
            let level: Level = level.parse()?;
            let r = run_verify(level, mutation);
            for c in &r.checks {
                println!("{}", c.line());
            }
            let json = serde_json::to_string_pretty(&r)? + "\n";
            if let Some(path) = report {
                fs::write(path, &json)?;
            } else if !r.passed {
                print!("{json}");
            }
            Ok(r.passed)
        }
        Command::Plot { csv, kind, out, label } => {
            let kind: PlotKind = kind.parse()?;
            if !label.is_empty() && label.len() != csv.len() {
                return Err(Error::Config(format!("{} labels for {} CSV files", label.len(), csv.len())));
            }
            let series = csv
                .iter()
                .enumerate()
                .map(|(i, path)| {
                    let name = label.get(i).cloned().unwrap_or_else(|| {
                        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
                    });
                    Ok((name, read_csv(path)?))
                })
                .collect::<Result<Vec<_>>>()?;
            fs::write(&out, plot_svg(&series, kind))?;
            Ok(true)
        }
        Command::FilterTable { config, norm_h, gap, clamp, points, out_dir } => {
            let p = match (config, norm_h, gap) {
                (Some(path), _, _) => {
                    let run = resolve(load_config(&path)?)?;
                    run.params
                }
                (None, Some(n), Some(g)) => {
                    FilterParams::default_params(n, g).map_err(|e| Error::Config(e.to_string()))?.with_clamp(clamp)
                }
                _ => return Err(Error::Config("give --config or both --norm-h and --gap".into())),
            };
            let (freq, time) = filter_tables(&p, points)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("filter_frequency.csv"), freq)?;
            fs::write(out_dir.join("filter_time.csv"), time)?;
            Ok(true)
        }
        Command::JumpReport { config, threshold, out } => {
            let run = resolve(load_config(&config)?)?;
            write_out(out.as_ref(), &jump_report(&run.problem, &run.params, threshold)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| dispatch(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
