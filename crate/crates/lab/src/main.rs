//! `mosaic-lab`: simulate tessellations, solve for Blaschke bodies, compare
//! shapes and run the validation experiments.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mosaic_core::arrangement::sample_face_complex;
use mosaic_core::minkowski::{solve_minkowski, BLASCHKE_TOL};
use mosaic_core::process::{section_params, zero_cell, zero_cell_of_section, FaceSampler};
use mosaic_core::rng::substream;
use mosaic_core::shape::deviation_cross_space;
use mosaic_core::{Polytope, ProcessSpec, SphericalMeasure, Subspace};
use mosaic_lab::experiments::{run, tau};
use mosaic_lab::plot::plots_for;
use mosaic_lab::table::Format;
use mosaic_lab::{Experiment, ExperimentConfig, LabError, Result};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "mosaic-lab", version, about = "Poisson hyperplane tessellation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (standard output when absent, for the non-table commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Also write SVG plots next to the tables.
    #[arg(long, global = true)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample zero cells, section cells, weighted typical faces or a window
    /// complex, one JSON object per line.
    Simulate,
    /// Solve for the Blaschke body of the section process in a subspace.
    Blaschke,
    /// Homothety deviation between two bodies given as JSON files.
    Deviation { k: PathBuf, m: PathBuf },
    /// Run a validation experiment; exits non-zero if any assertion fails.
    Experiment {
        #[arg(value_enum)]
        name: Experiment,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Object {
    ZeroCell,
    SectionCell,
    Face,
    Complex,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    spec: ProcessSpec,
    object: Object,
    /// Section subspace for `section_cell`.
    subspace: Option<Subspace>,
    /// Face dimension for `face`.
    k: usize,
    count: usize,
    /// Window half-width for `complex`.
    window: f64,
    seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        Self { spec: base.spec, object: Object::Face, subspace: None, k: 2, count: 10, window: 3.0, seed: base.seed }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlaschkeConfig {
    spec: ProcessSpec,
    subspace: Subspace,
}

impl Default for BlaschkeConfig {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        Self { spec: base.spec, subspace: base.l_star }
    }
}

#[derive(Serialize)]
struct BlaschkeOutput {
    gamma_section: f64,
    phi_section: SphericalMeasure,
    volume: f64,
    tau: f64,
    residual: f64,
    iterations: usize,
    body: Polytope,
}

#[derive(Serialize)]
struct FaceLine<'a> {
    index: usize,
    flat: &'a Subspace,
    volume: f64,
    polytope: &'a Polytope,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

fn config_or_default<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    path.as_deref().map_or_else(|| Ok(T::default()), read_json)
}

/// Writes `text` to `dir/name`, or to standard output without a directory.
fn emit(out: &Option<PathBuf>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| LabError::Io(dir.display().to_string(), e))?;
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| LabError::Io(path.display().to_string(), e))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn simulate(cli: &Cli) -> Result<()> {
    let mut cfg: SimulateConfig = config_or_default(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let mut lines = String::new();
    let mut push = |v: serde_json::Value| {
        lines.push_str(&v.to_string());
        lines.push('\n');
    };
    let name = match cfg.object {
        Object::ZeroCell => {
            for i in 0..cfg.count {
                let c = zero_cell(&cfg.spec, &mut substream(cfg.seed, i as u64))?;
                push(serde_json::to_value(FaceLine { index: i, flat: c.direction_space(), volume: c.volume(), polytope: &c })?);
            }
            "zero_cells.jsonl"
        }
        Object::SectionCell => {
            let l = cfg.subspace.clone().ok_or_else(|| LabError::Config("section_cell needs a subspace".into()))?;
            let s = section_params(&cfg.spec, &l)?;
            for i in 0..cfg.count {
                let c = zero_cell_of_section(&s, &mut substream(cfg.seed, i as u64))?;
                push(serde_json::to_value(FaceLine { index: i, flat: &l, volume: c.volume(), polytope: &c })?);
            }
            "section_cells.jsonl"
        }
        Object::Face => {
            let sampler = FaceSampler::new(&cfg.spec, cfg.k)?;
            for i in 0..cfg.count {
                let (j, c) = sampler.sample(&mut substream(cfg.seed, i as u64))?;
                let flat = &sampler.flats.entries[j].0;
                push(serde_json::to_value(FaceLine { index: i, flat, volume: c.volume(), polytope: &c })?);
            }
            "faces.jsonl"
        }
        Object::Complex => {
            let complex = sample_face_complex(&cfg.spec, cfg.window, &mut substream(cfg.seed, 0))?;
            for r in complex.records() {
                push(serde_json::to_value(r)?);
            }
            "complex.jsonl"
        }
    };
    emit(&cli.out, name, &lines)
}

fn blaschke(cli: &Cli) -> Result<()> {
    let cfg: BlaschkeConfig = config_or_default(&cli.config)?;
    let s = section_params(&cfg.spec, &cfg.subspace)?;
    let sol = solve_minkowski(&s.phi_section, &cfg.subspace, BLASCHKE_TOL)?;
    let out = BlaschkeOutput {
        gamma_section: s.gamma_section,
        phi_section: s.phi_section,
        volume: sol.body.volume(),
        tau: tau(&sol.body),
        residual: sol.residual,
        iterations: sol.iterations,
        body: sol.body,
    };
    emit(&cli.out, "blaschke.json", &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn deviation(cli: &Cli, k: &Path, m: &Path) -> Result<()> {
    let read_body = |p: &Path| -> Result<Polytope> {
        let v: serde_json::Value = read_json(p)?;
        // accept a bare body or the output of `blaschke`
        let body = v.get("body").cloned().unwrap_or(v);
        Ok(serde_json::from_value(body)?)
    };
    let r = deviation_cross_space(&read_body(k)?, &read_body(m)?)?;
    emit(&cli.out, "deviation.json", &(serde_json::to_string_pretty(&r)? + "\n"))
}

fn experiment(cli: &Cli, name: Experiment) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load_for(p, name)?,
        None => ExperimentConfig::for_experiment(name),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dir = cli.out.clone().or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| "results".into());
    let table = run(name, &cfg)?;
    for p in table.write(&dir, cli.format)? {
        eprintln!("wrote {}", p.display());
    }
    if cli.plots {
        for (stem, svg) in plots_for(&table, cfg.k) {
            let path = dir.join(format!("{stem}.svg"));
            std::fs::write(&path, svg).map_err(|e| LabError::Io(path.display().to_string(), e))?;
            eprintln!("wrote {}", path.display());
        }
    }
    eprint!("{}", table.summary());
    Ok(table.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate => simulate(&cli).map(|_| true),
        Command::Blaschke => blaschke(&cli).map(|_| true),
        Command::Deviation { k, m } => deviation(&cli, k, m).map(|_| true),
        Command::Experiment { name } => experiment(&cli, *name),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
