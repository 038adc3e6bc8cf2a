// Full alternating optimization on the default scenario. Pass `fbd`, `gbd`
// or `dris` and a weight to change the defaults.

use bdris_isac::{ao_solve, ArchKind, SolveReport, SystemConfig};

pub fn solve(arch: ArchKind, eta: f64) -> bdris_isac::Result<SolveReport> {
    let cfg = SystemConfig {
        architecture: arch,
        eta,
        ..SystemConfig::default()
    };
    let channels = cfg.channels(cfg.seed)?;
    let report = ao_solve(&cfg, &channels)?;
    println!(
        "{} eta={eta}: objective {:.4e} -> {:.4e} in {} iterations (converged {})",
        arch.with_group_size(cfg.group_size).label(),
        report.initial_objective,
        report.final_objective(),
        report.iterations,
        report.converged
    );
    println!(
        "sum rate {:.3} bit/s/Hz, sensing gain {:.4e}, power slack {:.2e}, {:.2} s",
        report.sum_rate, report.sensing_gain, report.residuals.power_slack, report.wall_time
    );
    Ok(report)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arch = match args.first() {
        Some(s) => ArchKind::parse(s)?,
        None => ArchKind::Fbd,
    };
    let eta = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.6);
    solve(arch, eta).map(|_| ())
}
