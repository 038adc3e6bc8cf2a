// User gain matrices across the weight list and their diagonal dominance.

use bdris_isac::experiments::{gain_matrix_runs, ExperimentConfig, GainMatrixRun};

pub fn run_example(cfg: &ExperimentConfig) -> bdris_isac::Result<Vec<GainMatrixRun>> {
    let runs = gain_matrix_runs(cfg)?;
    for run in &runs {
        println!("eta = {}: dominance ratio {:.4}", run.eta, run.dominance_ratio);
        for row in run.gain_matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:9.2e}")).collect();
            println!("  {}", cells.join(" "));
        }
    }
    Ok(runs)
}

#[allow(dead_code)]
fn main() -> bdris_isac::Result<()> {
    run_example(&ExperimentConfig::default()).map(|_| ())
}
