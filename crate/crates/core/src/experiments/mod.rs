//! Experiment runners behind the gain-matrix, beam-pattern and trade-off
//! data sets, plus CSV emission.
//!
//! Every CSV starts with `#`-prefixed metadata lines (experiment, config
//! hash, seed) followed by a header row. Row order is fixed and numbers use
//! the shortest round-trip formatting, so reruns are byte-identical.

mod analysis;
mod config;

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::json;

pub use analysis::{dominance_ratio, frontier_violations, ordering_fraction, OrderingCheck};
pub use config::{load_config, ExperimentConfig, Overrides};

use crate::ao::{ao_solve, ao_solve_from, initialize, SolveReport};
use crate::config::{derive_seed, rng_for, ArchKind, SystemConfig};
use crate::error::{Error, Result};
use crate::system::beampattern;

/// A CSV document with leading `#` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(experiment: &str, cfg: &ExperimentConfig, header: &[&str]) -> Self {
        Self {
            comments: vec![
                format!("experiment={experiment}"),
                format!("config_hash={}", cfg.hash()),
                format!("seed={}", cfg.system.seed),
            ],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("ascii csv"));
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One solved weight of the gain-matrix experiment.
#[derive(Debug, Clone)]
pub struct GainMatrixRun {
    pub eta: f64,
    pub gain_matrix: DMatrix<f64>,
    pub dominance_ratio: f64,
    pub report: SolveReport,
}

fn solve_at_eta(cfg: &ExperimentConfig, eta: f64) -> Result<SolveReport> {
    let system = SystemConfig {
        eta,
        ..cfg.system.clone()
    };
    let channels = system.channels(cfg.system.seed)?;
    ao_solve(&system, &channels)
}

/// Solves once per weight in `eta_list` on the default-seed channel.
pub fn gain_matrix_runs(cfg: &ExperimentConfig) -> Result<Vec<GainMatrixRun>> {
    cfg.validate()?;
    cfg.eta_list
        .par_iter()
        .map(|&eta| {
            let report = solve_at_eta(cfg, eta)?;
            Ok(GainMatrixRun {
                eta,
                gain_matrix: report.gain_matrix.clone(),
                dominance_ratio: dominance_ratio(&report.gain_matrix),
                report,
            })
        })
        .collect()
}

pub fn gain_matrix_table(cfg: &ExperimentConfig, runs: &[GainMatrixRun]) -> CsvTable {
    let mut t = CsvTable::new(
        "gain-matrix",
        cfg,
        &["kind", "eta", "i", "k", "F_ik", "dominance_ratio"],
    );
    for run in runs {
        let f = &run.gain_matrix;
        for i in 0..f.nrows() {
            for k in 0..f.ncols() {
                t.rows.push(vec![
                    "data".into(),
                    num(run.eta),
                    (i + 1).to_string(),
                    (k + 1).to_string(),
                    num(f[(i, k)]),
                    String::new(),
                ]);
            }
        }
    }
    for run in runs {
        t.rows.push(vec![
            "summary".into(),
            num(run.eta),
            String::new(),
            String::new(),
            String::new(),
            num(run.dominance_ratio),
        ]);
    }
    t
}

pub fn run_gain_matrix_experiment(cfg: &ExperimentConfig) -> Result<CsvTable> {
    Ok(gain_matrix_table(cfg, &gain_matrix_runs(cfg)?))
}

#[derive(Debug, Clone)]
pub struct BeampatternRun {
    pub eta: f64,
    /// `(azimuth in degrees, linear gain)` in grid order.
    pub pattern: Vec<(f64, f64)>,
    pub report: SolveReport,
}

impl BeampatternRun {
    /// Azimuth of the largest gain, in degrees.
    pub fn peak_azimuth_deg(&self) -> f64 {
        self.pattern
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
            .0
    }
}

pub fn beampattern_runs(cfg: &ExperimentConfig) -> Result<Vec<BeampatternRun>> {
    cfg.validate()?;
    let grid_deg = cfg.azimuth_grid_deg();
    let grid: Vec<f64> = grid_deg.iter().map(|d| d.to_radians()).collect();
    let sys = &cfg.system;
    cfg.eta_list
        .par_iter()
        .map(|&eta| {
            let report = solve_at_eta(cfg, eta)?;
            let channels = sys.channels(sys.seed)?;
            let pattern = beampattern(
                &report.phase.theta,
                &channels.g,
                &report.precoder.w,
                sys.target_elevation_deg.to_radians(),
                &grid,
                sys.n1,
                sys.n2,
            )
            .into_iter()
            .zip(&grid_deg)
            .map(|((_, gain), &deg)| (deg, gain))
            .collect();
            Ok(BeampatternRun { eta, pattern, report })
        })
        .collect()
}

pub fn beampattern_table(cfg: &ExperimentConfig, runs: &[BeampatternRun]) -> CsvTable {
    let mut t = CsvTable::new(
        "beampattern",
        cfg,
        &["eta", "azimuth_deg", "gain_linear", "gain_db"],
    );
    for run in runs {
        for &(az, gain) in &run.pattern {
            t.rows.push(vec![num(run.eta), num(az), num(gain), num(to_db(gain))]);
        }
    }
    t
}

pub fn run_beampattern_experiment(cfg: &ExperimentConfig) -> Result<CsvTable> {
    Ok(beampattern_table(cfg, &beampattern_runs(cfg)?))
}

/// Monte-Carlo averages at one (architecture, weight) point.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub architecture: ArchKind,
    pub eta: f64,
    pub mean_rate: f64,
    pub mean_sensing_gain: f64,
    pub std_rate: f64,
    pub std_gain: f64,
    pub trials: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn arch_label(a: ArchKind) -> &'static str {
    match a {
        ArchKind::Fbd => "fbd",
        ArchKind::Gbd => "gbd",
        ArchKind::Dris => "dris",
    }
}

/// Trial `t` uses the same channel for every architecture and weight; the
/// initialization stream is keyed by (architecture, weight index, trial).
pub fn tradeoff_points(cfg: &ExperimentConfig) -> Result<Vec<TradeoffPoint>> {
    cfg.validate()?;
    let etas = cfg.tradeoff_etas();
    let seed = cfg.system.seed;
    let channels: Vec<_> = (0..cfg.num_trials)
        .into_par_iter()
        .map(|trial| cfg.system.channels(derive_seed(seed, &["trial", &trial.to_string()])))
        .collect::<Result<_>>()?;

    let tasks: Vec<(ArchKind, usize, usize)> = cfg
        .architectures
        .iter()
        .flat_map(|&a| (0..etas.len()).flat_map(move |e| (0..cfg.num_trials).map(move |t| (a, e, t))))
        .collect();
    let outcomes: Vec<(f64, f64)> = tasks
        .par_iter()
        .map(|&(arch, eta_idx, trial)| {
            let system = SystemConfig {
                eta: etas[eta_idx],
                architecture: arch,
                ..cfg.system.clone()
            };
            let mut rng = rng_for(
                seed,
                &[arch_label(arch), &eta_idx.to_string(), &trial.to_string()],
            );
            let init = initialize(&system, &channels[trial], &mut rng)?;
            let report = ao_solve_from(&system, &channels[trial], init)?;
            Ok((report.sum_rate, report.sensing_gain))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for (chunk, &(arch, eta_idx, _)) in outcomes
        .chunks(cfg.num_trials)
        .zip(tasks.iter().step_by(cfg.num_trials))
    {
        let rates: Vec<f64> = chunk.iter().map(|o| o.0).collect();
        let gains: Vec<f64> = chunk.iter().map(|o| o.1).collect();
        let (mean_rate, std_rate) = mean_std(&rates);
        let (mean_gain, std_gain) = mean_std(&gains);
        points.push(TradeoffPoint {
            architecture: arch,
            eta: etas[eta_idx],
            mean_rate,
            mean_sensing_gain: mean_gain,
            std_rate,
            std_gain,
            trials: chunk.len(),
        });
    }
    Ok(points)
}

pub fn tradeoff_table(cfg: &ExperimentConfig, points: &[TradeoffPoint]) -> CsvTable {
    let mut t = CsvTable::new(
        "tradeoff",
        cfg,
        &[
            "architecture",
            "eta",
            "mean_rate",
            "mean_sensing_gain",
            "std_rate",
            "std_gain",
            "trials",
            "mean_sensing_gain_db",
        ],
    );
    for p in points {
        t.rows.push(vec![
            arch_label(p.architecture).into(),
            num(p.eta),
            num(p.mean_rate),
            num(p.mean_sensing_gain),
            num(p.std_rate),
            num(p.std_gain),
            p.trials.to_string(),
            num(to_db(p.mean_sensing_gain)),
        ]);
    }
    t
}

pub fn run_tradeoff_experiment(cfg: &ExperimentConfig) -> Result<CsvTable> {
    Ok(tradeoff_table(cfg, &tradeoff_points(cfg)?))
}

/// Single solve at the configured weight and architecture.
pub fn run_single_solve(cfg: &ExperimentConfig) -> Result<SolveReport> {
    cfg.system.validate()?;
    let channels = cfg.system.channels(cfg.system.seed)?;
    ao_solve(&cfg.system, &channels)
}

/// Files written for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenOutputs {
    pub data: PathBuf,
    pub manifest: PathBuf,
}

fn manifest_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.manifest.json"))
}

/// Writes `<experiment>_<hash>.csv` and a JSON manifest next to it.
pub fn write_table(cfg: &ExperimentConfig, experiment: &str, table: &CsvTable) -> Result<WrittenOutputs> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{experiment}_{}", cfg.hash());
    let data = dir.join(format!("{stem}.csv"));
    std::fs::write(&data, table.to_csv_string())?;
    let manifest = manifest_path(dir, &stem);
    let body = json!({
        "experiment": experiment,
        "config_hash": cfg.hash(),
        "seed": cfg.system.seed,
        "data_file": data.file_name().and_then(|s| s.to_str()),
        "columns": table.header,
        "rows": table.rows.len(),
        "config": cfg.to_flat_json(),
    });
    std::fs::write(&manifest, serde_json::to_string_pretty(&body).map_err(|e| Error::Parse(e.to_string()))?)?;
    Ok(WrittenOutputs { data, manifest })
}

/// Writes the full solve report as `solve_<hash>.json` plus a manifest.
pub fn write_report(cfg: &ExperimentConfig, report: &SolveReport) -> Result<WrittenOutputs> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let stem = format!("solve_{}", cfg.hash());
    let data = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&report.to_json()).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(&data, text)?;
    let manifest = manifest_path(dir, &stem);
    let body = json!({
        "experiment": "solve",
        "config_hash": cfg.hash(),
        "seed": cfg.system.seed,
        "data_file": data.file_name().and_then(|s| s.to_str()),
        "config": cfg.to_flat_json(),
    });
    std::fs::write(&manifest, serde_json::to_string_pretty(&body).map_err(|e| Error::Parse(e.to_string()))?)?;
    Ok(WrittenOutputs { data, manifest })
}
