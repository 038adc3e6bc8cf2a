// Projects one random matrix onto the three surface architectures.

use bdris_isac::channel::cscg;
use bdris_isac::config::rng_for;
use bdris_isac::linalg::CMatrix;
use bdris_isac::phase::project;
use bdris_isac::{Architecture, PhaseShift};

pub fn run_example() -> bdris_isac::Result<Vec<PhaseShift>> {
    let mut rng = rng_for(7, &["example", "projection"]);
    let x = CMatrix::from_fn(8, 8, |_, _| cscg(&mut rng));
    let mut out = Vec::new();
    for arch in [Architecture::FullyConnected, Architecture::GroupConnected(4), Architecture::Diagonal] {
        let p = project(arch, &x)?;
        let f = p.feasibility();
        println!(
            "{:>4}: distance {:.4}, unitarity {:.1e}, symmetry {:.1e}, off-pattern {:.1e}, feasible {}",
            arch.label(),
            (&p.theta - &x).norm(),
            f.unitarity,
            f.symmetry,
            f.off_pattern,
            p.is_feasible()
        );
        let again = project(arch, &p.theta)?;
        println!("      reprojection moves it by {:.1e}", (&again.theta - &p.theta).norm());
        out.push(p);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    run_example().map(|_| ())
}
