// Azimuth beam patterns at the target elevation for each weight.

use bdris_isac::experiments::{beampattern_runs, BeampatternRun, ExperimentConfig};

pub fn run_example(cfg: &ExperimentConfig) -> bdris_isac::Result<Vec<BeampatternRun>> {
    let runs = beampattern_runs(cfg)?;
    for run in &runs {
        let at_target = run
            .pattern
            .iter()
            .find(|(az, _)| (az - cfg.system.target_azimuth_deg).abs() < 1e-9)
            .map(|&(_, g)| 10.0 * g.log10());
        println!(
            "eta = {}: peak at {:.1} deg, gain toward target {:.2} dB",
            run.eta,
            run.peak_azimuth_deg(),
            at_target.unwrap_or(f64::NAN)
        );
    }
    Ok(runs)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    run_example(&ExperimentConfig::default()).map(|_| ())
}
