//! Run configuration: parsing, default resolution and the provenance manifest.
//!
//! A config is a JSON object with `model`, `channel`, and optional `filter`
//! and `output` blocks. Unknown keys anywhere are rejected. Filter fields
//! that are left out are resolved from `|H|` and the gap of the instance,
//! and every resolved value is echoed into the manifest.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{run_simulation, ChannelConfig, CostLedger, SimulationRecord};
use crate::filter::FilterParams;
use crate::models::{ModelSpec, Problem};
use crate::report;
use crate::{Error, Result};

/// Explicit filter fields; anything left out comes from the default rule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterOverrides {
    pub a: Option<f64>,
    pub delta_a: Option<f64>,
    pub b: Option<f64>,
    pub delta_b: Option<f64>,
    pub s_s: Option<f64>,
    pub tau_s: Option<f64>,
    pub clamp_nonnegative: Option<bool>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem for every artifact; defaults to the model label.
    #[serde(default)]
    pub prefix: Option<String>,
    #[serde(default)]
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), prefix: None, plots: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub filter: FilterOverrides,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Parses and validates a config; errors carry the line and column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    cfg.model.validate().map_err(|e| Error::Config(e.to_string()))?;
    cfg.channel.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// A config with the instance built and every default filled in.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub problem: Problem,
    pub params: FilterParams,
    pub steps: usize,
}

impl ResolvedRun {
    pub fn prefix(&self) -> String {
        self.config.output.prefix.clone().unwrap_or_else(|| self.config.model.label())
    }

    /// Every resolved value of the run, for provenance.
    pub fn manifest(&self) -> Value {
        let spec = &self.problem.spectrum;
        let ch = &self.config.channel;
        let per_step = CostLedger::per_step(&self.params, ch);
        let total = per_step.times(self.steps);
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "model": self.config.model,
            "spectrum": {
                "dim": spec.dim(),
                "ground_energy": spec.ground_energy(),
                "first_excited_energy": spec.eigenvalues()[1.min(spec.dim() - 1)],
                "highest_energy": spec.eigenvalues()[spec.dim() - 1],
                "gap": spec.gap(),
                "spectral_norm": spec.spectral_norm(),
                "ground_degeneracy": spec.ground_degeneracy(),
            },
            "filter": {
                "a": self.params.a(),
                "delta_a": self.params.delta_a(),
                "b": self.params.b(),
                "delta_b": self.params.delta_b(),
                "s_s": self.params.s_s(),
                "tau_s": self.params.tau_s(),
                "m_s": self.params.m_s(),
                "grid_radius": self.params.grid_radius(),
                "grid_points": 2 * self.params.m_s() + 1,
                "clamp_nonnegative": self.params.clamp_nonnegative(),
                "overrides": self.config.filter,
            },
            "channel": ch,
            "derived": {
                "steps": self.steps,
                "segment_tau": ch.segment_tau(),
                "per_step_cost": per_step,
                "total_cost": total,
            },
            "output": {
                "dir": self.config.output.dir,
                "prefix": self.prefix(),
                "plots": self.config.output.plots,
            },
        })
    }
}

/// Unset fields follow `a = 2.5|H|`, `delta_a = 0.5|H|`, `b = delta_b = gap`,
/// `S_s = 5/delta_b`, `tau_s = pi/(2a)`.
pub fn resolve_filter(problem: &Problem, o: &FilterOverrides) -> Result<FilterParams> {
    let spec = &problem.spectrum;
    let norm = spec.spectral_norm();
    let gap = spec.gap();
    if (o.b.is_none() || o.delta_b.is_none()) && !(gap > spec.degeneracy_tol()) {
        return Err(Error::Config("the instance has no resolvable gap; set filter.b and filter.delta_b".into()));
    }
    let a = o.a.unwrap_or(2.5 * norm);
    let delta_a = o.delta_a.unwrap_or(0.5 * norm);
    let b = o.b.unwrap_or(gap);
    let delta_b = o.delta_b.unwrap_or(gap);
    let s_s = o.s_s.unwrap_or(5.0 / delta_b);
    let tau_s = o.tau_s.unwrap_or(PI / (2.0 * a));
    FilterParams::new(a, delta_a, b, delta_b, s_s, tau_s)
        .map(|p| p.with_clamp(o.clamp_nonnegative.unwrap_or(false)))
        .map_err(|e| Error::Config(e.to_string()))
}

/// Builds the instance and fills in defaults; performs no output.
pub fn resolve(config: RunConfig) -> Result<ResolvedRun> {
    let steps = config.channel.validate()?;
    let problem = Problem::from_model(&config.model).map_err(|e| Error::Config(e.to_string()))?;
    let params = resolve_filter(&problem, &config.filter)?;
    Ok(ResolvedRun { config, problem, params, steps })
}

/// Paths written by [`execute`].
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Runs the simulation and writes CSV, manifest and optional plots. Nothing
/// is written unless the simulation completes.
pub fn execute(run: &ResolvedRun) -> Result<(SimulationRecord, Artifacts)> {
    log::info!(
        "{}: {} steps, M_s = {}, {} reps",
        run.config.model.label(),
        run.steps,
        run.params.m_s(),
        run.config.channel.reps
    );
    let record = run_simulation(&run.problem, &run.config.channel, &run.params)?;
    let dir = &run.config.output.dir;
    fs::create_dir_all(dir)?;
    let prefix = run.prefix();
    let csv = dir.join(format!("{prefix}.csv"));
    let manifest = dir.join(format!("{prefix}.manifest.json"));
    fs::write(&csv, report::rows_to_csv(&record.rows)?)?;
    fs::write(&manifest, serde_json::to_string_pretty(&run.manifest())? + "\n")?;
    let mut plots = Vec::new();
    if run.config.output.plots {
        for kind in report::PlotKind::ALL {
            let path = dir.join(format!("{prefix}_{}.svg", kind.name()));
            fs::write(&path, report::plot_svg(&[(prefix.clone(), record.rows.clone())], kind))?;
            plots.push(path);
        }
    }
    Ok((record, Artifacts { csv, manifest, plots }))
}
