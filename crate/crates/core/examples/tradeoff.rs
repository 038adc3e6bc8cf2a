// Rate against sensing gain for every architecture. The first argument sets
// the trial count (default 2; the experiment default is 20).

use bdris_isac::experiments::{frontier_violations, ordering_fraction, tradeoff_points, ExperimentConfig, TradeoffPoint};
use bdris_isac::ArchKind;

pub fn run_example(cfg: &ExperimentConfig) -> bdris_isac::Result<Vec<TradeoffPoint>> {
    let points = tradeoff_points(cfg)?;
    for p in &points {
        println!(
            "{:>4} eta={:.1}: rate {:7.3} +- {:6.3}, gain {:8.2} dB",
            p.architecture.with_group_size(cfg.system.group_size).label(),
            p.eta,
            p.mean_rate,
            p.std_rate,
            10.0 * p.mean_sensing_gain.log10()
        );
    }
    for arch in &cfg.architectures {
        println!("{arch:?}: {} frontier violations", frontier_violations(&points, *arch));
    }
    for (better, worse) in [(ArchKind::Fbd, ArchKind::Gbd), (ArchKind::Gbd, ArchKind::Dris)] {
        let c = ordering_fraction(&points, better, worse);
        println!("{better:?} >= {worse:?} at matched gain: {}/{}", c.satisfied, c.comparable);
    }
    Ok(points)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = ExperimentConfig {
        num_trials: trials,
        ..ExperimentConfig::default()
    };
    run_example(&cfg).map(|_| ())
}
