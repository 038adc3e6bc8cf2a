// One precoder step from the default initialization: the shared multiplier
// found by bisection and the resulting power.

use bdris_isac::config::rng_for;
use bdris_isac::precoder::{assemble_precoder_quadratic, solve_precoders, PrecoderSolution};
use bdris_isac::system::objective;
use bdris_isac::{initialize, SystemConfig};

pub fn run_example() -> bdris_isac::Result<PrecoderSolution> {
    let mut cfg = SystemConfig::default();
    cfg.eta = 0.6;
    let channels = cfg.channels(cfg.seed)?;
    let init = initialize(&cfg, &channels, &mut rng_for(cfg.seed, &["init"]))?;
    let quad = assemble_precoder_quadratic(&channels, &init.phase.theta, &init.aux, &init.targets)?;
    let sol = solve_precoders(&quad, cfg.p_max())?;
    let before = objective(&init.w, &init.phase.theta, &init.aux, &init.targets, &channels)?;
    let after = objective(&sol.precoder.w, &init.phase.theta, &init.aux, &init.targets, &channels)?;
    println!("lambda = {:.6e} after {} bisection steps", sol.lambda, sol.bisection_iterations);
    println!("power = {:.12} W (cap {} W)", sol.precoder.total_power(), cfg.p_max());
    println!("objective {before:.6e} -> {after:.6e}");
    Ok(sol)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    run_example().map(|_| ())
}
