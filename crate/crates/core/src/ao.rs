//! Outer alternating optimization: precoders, then Θ, then auxiliary phases.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::aux_phase::optimal_aux_phases;
use crate::channel::{cscg, ChannelSet};
use crate::config::{rng_for, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector};
use crate::phase::{assemble_psi_quadratic, project, splitting_solve};
use crate::precoder::{assemble_precoder_quadratic, solve_precoders};
use crate::system::{
    beam_gain_matrix, effective_channels, objective, sensing_gain, sinr_and_rate, AuxPhases,
    Feasibility, GainTargets, PhaseShift, Precoder,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub w: CMatrix,
    pub phase: PhaseShift,
    pub aux: AuxPhases,
    pub targets: GainTargets,
}

/// Random feasible Θ, matched-filter precoders at full power, and the
/// matching auxiliary phases. Gain targets default to what this point achieves.
pub fn initialize<R: Rng + ?Sized>(
    config: &SystemConfig,
    channels: &ChannelSet,
    rng: &mut R,
) -> Result<Initialization> {
    channels.check_dims()?;
    let n = channels.num_elements();
    let (m, k) = (channels.num_antennas(), channels.num_users());
    let arch = config.architecture();
    arch.check_size(n)?;

    let raw = CMatrix::from_fn(n, n, |_, _| cscg(rng));
    let phase = project(arch, &raw)?;

    let reflect = (&phase.theta * &channels.g).adjoint();
    let mut w = CMatrix::zeros(m, k);
    for (kk, f) in channels.f_users.iter().enumerate() {
        w.set_column(kk, &(&reflect * f));
    }
    let power: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if power == 0.0 {
        w = CMatrix::identity(m, k);
    }
    let power: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    w *= C64::new((config.p_max() / power).sqrt(), 0.0);

    let aux = optimal_aux_phases(channels, &phase.theta, &w)?;

    let t = &phase.theta * &channels.g * &w;
    let mean_abs = |f: &CVector, kk: usize| f.dotc(&t.column(kk)).norm();
    let c_default = (0..k).map(|kk| mean_abs(&channels.f_users[kk], kk)).sum::<f64>() / k as f64;
    let pt_default = (n as f64).sqrt()
        * (0..k).map(|kk| mean_abs(&channels.f_target, kk)).sum::<f64>()
        / k as f64;
    let targets = GainTargets {
        c: config.gain_c.unwrap_or(c_default),
        p_t: config.gain_pt.unwrap_or(pt_default),
        eta: config.eta,
    };
    targets.validate()?;
    Ok(Initialization {
        w,
        phase,
        aux,
        targets,
    })
}

/// Objective values around one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepTrace {
    pub before: f64,
    pub after_precoder: f64,
    pub after_phase: f64,
    pub after_aux: f64,
    pub lambda: f64,
    pub phase_converged: bool,
    pub phase_iterations: usize,
    /// False when the Θ-step was rejected by the descent guard.
    pub phase_accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    /// `P_max − Σ_k ‖w_k‖²`; negative means infeasible.
    pub power_slack: f64,
    pub phase: Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub initial_objective: f64,
    /// Energy of the desired gains, `η K C² + (1 − η) K P_t²`. Objective
    /// values below roughly `1e-15` of this are round-off.
    pub objective_scale: f64,
    /// One entry per outer iteration, taken after the auxiliary-phase step.
    pub objective_trajectory: Vec<f64>,
    pub steps: Vec<StepTrace>,
    pub precoder: Precoder,
    pub phase: PhaseShift,
    pub aux: AuxPhases,
    pub targets: GainTargets,
    pub gain_matrix: DMatrix<f64>,
    pub sinr: Vec<f64>,
    pub sum_rate: f64,
    pub sensing_gain: f64,
    pub residuals: ConstraintResiduals,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time: f64,
}

fn cmatrix_json(m: &CMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|z| json!([z.re, z.im])).collect()))
            .collect(),
    )
}

fn rmatrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_trajectory
            .last()
            .expect("trajectory is never empty")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "initial_objective": self.initial_objective,
            "objective_scale": self.objective_scale,
            "objective_trajectory": self.objective_trajectory,
            "steps": self.steps,
            "converged": self.converged,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time,
            "sum_rate_bps_hz": self.sum_rate,
            "sensing_gain": self.sensing_gain,
            "sinr": self.sinr,
            "targets": self.targets,
            "residuals": self.residuals,
            "architecture": self.phase.architecture.label(),
            "gain_matrix": rmatrix_json(&self.gain_matrix),
            "w": cmatrix_json(&self.precoder.w),
            "theta": cmatrix_json(&self.phase.theta),
            "aux_theta": rmatrix_json(&self.aux.theta),
            "aux_phi": self.aux.phi.iter().copied().collect::<Vec<_>>(),
        })
    }
}

/// Solves from the initialization drawn with the seed in `config`.
pub fn ao_solve(config: &SystemConfig, channels: &ChannelSet) -> Result<SolveReport> {
    let mut rng = rng_for(config.seed, &["init"]);
    let init = initialize(config, channels, &mut rng)?;
    ao_solve_from(config, channels, init)
}

pub fn ao_solve_from(
    config: &SystemConfig,
    channels: &ChannelSet,
    init: Initialization,
) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let arch = config.architecture();
    let p_max = config.p_max();
    let n = channels.num_elements();
    if init.phase.theta.shape() != (n, n) {
        return Err(Error::dims("initial Θ does not match the channels"));
    }
    let Initialization {
        mut w,
        mut phase,
        mut aux,
        targets,
    } = init;
    let split_opts = config.splitting_options();

    let initial_objective = objective(&w, &phase.theta, &aux, &targets, channels)?;
    let objective_scale = targets.objective_constant(channels.num_users());
    let change_floor = (1e-12 * objective_scale).max(f64::MIN_POSITIVE);
    let mut previous = initial_objective;
    let mut trajectory = Vec::new();
    let mut steps = Vec::new();
    let mut converged = false;
    let mut nu: Option<CVector> = None;

    for _ in 0..config.max_outer {
        let before = previous;

        let quad = assemble_precoder_quadratic(channels, &phase.theta, &aux, &targets)?;
        let sol = solve_precoders(&quad, p_max)?;
        w = sol.precoder.w;
        let after_precoder = objective(&w, &phase.theta, &aux, &targets, channels)?;

        let psi_quad = assemble_psi_quadratic(channels, &w, &aux, &targets, config.max_elements)?;
        let outcome = splitting_solve(
            &psi_quad,
            arch,
            &phase.theta,
            if config.keep_dual { nu.as_ref() } else { None },
            &split_opts,
        )?;
        let candidate = objective(&w, &outcome.phase.theta, &aux, &targets, channels)?;
        let phase_accepted = !config.phase_step_guard || candidate <= after_precoder;
        let after_phase = if phase_accepted {
            phase = outcome.phase;
            nu = Some(outcome.nu);
            candidate
        } else {
            after_precoder
        };

        aux = optimal_aux_phases(channels, &phase.theta, &w)?;
        let after_aux = objective(&w, &phase.theta, &aux, &targets, channels)?;

        steps.push(StepTrace {
            before,
            after_precoder,
            after_phase,
            after_aux,
            lambda: sol.lambda,
            phase_converged: outcome.converged,
            phase_iterations: outcome.iterations,
            phase_accepted,
        });
        trajectory.push(after_aux);
        let change = (previous - after_aux).abs() / previous.abs().max(change_floor);
        previous = after_aux;
        if after_aux == 0.0 || change < config.outer_tol {
            converged = true;
            break;
        }
    }

    let h = effective_channels(channels, &phase.theta)?;
    let gain_matrix = beam_gain_matrix(&h, &w)?;
    let noise = vec![config.noise_power(); channels.num_users()];
    let (sinr, sum_rate) = sinr_and_rate(&gain_matrix, &noise);
    let sensing = sensing_gain(&channels.f_target, &phase.theta, &channels.g, &w)?;
    let precoder = Precoder { w };
    let residuals = ConstraintResiduals {
        power_slack: p_max - precoder.total_power(),
        phase: phase.feasibility(),
    };
    Ok(SolveReport {
        initial_objective,
        objective_scale,
        iterations: trajectory.len(),
        objective_trajectory: trajectory,
        steps,
        precoder,
        phase,
        aux,
        targets,
        gain_matrix,
        sinr,
        sum_rate,
        sensing_gain: sensing,
        residuals,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
