//! Signal-model quantities: effective channels, the beam-gain matrix, the
//! sensing gain, the weighted least-squares objective, SINR and sum rate,
//! and angle-swept beam patterns.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{target_steering, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{frob, symmetry_residual, unitarity_residual, C64, CMatrix, CVector};

/// Per-user beamformers, one column per user (`M x K`).
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub w: CMatrix,
}

impl Precoder {
    pub fn total_power(&self) -> f64 {
        self.w.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn num_users(&self) -> usize {
        self.w.ncols()
    }
}

/// Circuit topology of the reconfigurable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    FullyConnected,
    GroupConnected(usize),
    Diagonal,
}

impl Architecture {
    /// Short label used in CSV files and on the command line.
    pub fn label(&self) -> &'static str {
        match self {
            Architecture::FullyConnected => "fbd",
            Architecture::GroupConnected(_) => "gbd",
            Architecture::Diagonal => "dris",
        }
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        if let Architecture::GroupConnected(l) = *self {
            if l == 0 || n % l != 0 {
                return Err(Error::IndivisibleGroups { n, group_size: l });
            }
        }
        Ok(())
    }
}

/// How far a phase-shift matrix is from its feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    /// `‖Θ^HΘ − I‖_F`, or the worst block's value for grouped surfaces.
    pub unitarity: f64,
    /// `‖Θ − Θ^T‖_F`, or the worst block's value for grouped surfaces.
    pub symmetry: f64,
    /// Largest magnitude outside the allowed sparsity pattern.
    pub off_pattern: f64,
    /// Largest `| |Θ_nn| − 1 |` (diagonal surfaces only, zero otherwise).
    pub modulus: f64,
}

impl Feasibility {
    pub fn holds(&self, arch: Architecture) -> bool {
        match arch {
            Architecture::Diagonal => self.off_pattern == 0.0 && self.modulus <= 1e-10,
            _ => self.unitarity <= 1e-8 && self.symmetry <= 1e-10 && self.off_pattern == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShift {
    pub theta: CMatrix,
    pub architecture: Architecture,
}

impl PhaseShift {
    pub fn feasibility(&self) -> Feasibility {
        feasibility_of(&self.theta, self.architecture)
    }

    pub fn is_feasible(&self) -> bool {
        self.feasibility().holds(self.architecture)
    }
}

pub fn feasibility_of(theta: &CMatrix, arch: Architecture) -> Feasibility {
    let n = theta.nrows();
    match arch {
        Architecture::FullyConnected => Feasibility {
            unitarity: unitarity_residual(theta),
            symmetry: symmetry_residual(theta),
            off_pattern: 0.0,
            modulus: 0.0,
        },
        Architecture::GroupConnected(l) => {
            let mut f = Feasibility {
                unitarity: 0.0,
                symmetry: 0.0,
                off_pattern: 0.0,
                modulus: 0.0,
            };
            if l == 0 || n % l != 0 {
                f.off_pattern = f64::INFINITY;
                return f;
            }
            for (r, c) in (0..n).flat_map(|r| (0..n).map(move |c| (r, c))) {
                if r / l != c / l {
                    f.off_pattern = f.off_pattern.max(theta[(r, c)].norm());
                }
            }
            for b in 0..n / l {
                let block = theta.view((b * l, b * l), (l, l)).clone_owned();
                f.unitarity = f.unitarity.max(unitarity_residual(&block));
                f.symmetry = f.symmetry.max(symmetry_residual(&block));
            }
            f
        }
        Architecture::Diagonal => {
            let mut f = Feasibility {
                unitarity: unitarity_residual(theta),
                symmetry: 0.0,
                off_pattern: 0.0,
                modulus: 0.0,
            };
            for r in 0..n {
                for c in 0..n {
                    if r == c {
                        f.modulus = f.modulus.max((theta[(r, c)].norm() - 1.0).abs());
                    } else {
                        f.off_pattern = f.off_pattern.max(theta[(r, c)].norm());
                    }
                }
            }
            f
        }
    }
}

/// Auxiliary phases of the desired gains: `theta[(i, k)]` for user pair
/// `(i, k)` and `phi[k]` for the sensing term of beam `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxPhases {
    pub theta: DMatrix<f64>,
    pub phi: DVector<f64>,
}

impl AuxPhases {
    pub fn zeros(k: usize) -> Self {
        Self {
            theta: DMatrix::zeros(k, k),
            phi: DVector::zeros(k),
        }
    }

    pub fn in_range(&self) -> bool {
        let ok = |x: &f64| (0.0..std::f64::consts::TAU).contains(x);
        self.theta.iter().all(ok) && self.phi.iter().all(ok)
    }
}

/// Desired gain amplitudes and the communication weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainTargets {
    /// Desired amplitude on the diagonal of the gain matrix.
    pub c: f64,
    /// Desired sensing amplitude per beam.
    pub p_t: f64,
    pub eta: f64,
}

impl GainTargets {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::validation("eta", format!("{} is outside [0, 1]", self.eta)));
        }
        if !(self.c >= 0.0) {
            return Err(Error::validation("gain_c", "must be nonnegative"));
        }
        if !(self.p_t >= 0.0) {
            return Err(Error::validation("gain_pt", "must be nonnegative"));
        }
        Ok(())
    }

    /// Desired amplitude `P_{i,k}`: `C` on the diagonal, zero elsewhere.
    pub fn amplitude(&self, i: usize, k: usize) -> f64 {
        if i == k {
            self.c
        } else {
            0.0
        }
    }

    /// The constant that separates the objective from its quadratic form in Θ or W.
    pub fn objective_constant(&self, k: usize) -> f64 {
        self.eta * k as f64 * self.c * self.c + (1.0 - self.eta) * k as f64 * self.p_t * self.p_t
    }
}

fn check_theta(channels: &ChannelSet, theta: &CMatrix) -> Result<()> {
    channels.check_dims()?;
    let n = channels.num_elements();
    if theta.nrows() != n || theta.ncols() != n {
        return Err(Error::dims(format!(
            "phase-shift matrix is {}x{}, expected {n}x{n}",
            theta.nrows(),
            theta.ncols()
        )));
    }
    Ok(())
}

fn check_w(channels: &ChannelSet, w: &CMatrix) -> Result<()> {
    if w.nrows() != channels.num_antennas() || w.ncols() != channels.num_users() {
        return Err(Error::dims(format!(
            "precoder is {}x{}, expected {}x{}",
            w.nrows(),
            w.ncols(),
            channels.num_antennas(),
            channels.num_users()
        )));
    }
    Ok(())
}

/// `H` with row `k` equal to `f_k^H Θ G`.
pub fn effective_channels(channels: &ChannelSet, theta: &CMatrix) -> Result<CMatrix> {
    check_theta(channels, theta)?;
    let tg = theta * &channels.g;
    let k = channels.num_users();
    let mut h = CMatrix::zeros(k, channels.num_antennas());
    for (row, f) in channels.f_users.iter().enumerate() {
        h.set_row(row, &(f.adjoint() * &tg));
    }
    Ok(h)
}

/// `F = (HW) ⊙ (HW)^*`.
pub fn beam_gain_matrix(h: &CMatrix, w: &CMatrix) -> Result<DMatrix<f64>> {
    if h.ncols() != w.nrows() {
        return Err(Error::dims(format!(
            "H has {} columns but W has {} rows",
            h.ncols(),
            w.nrows()
        )));
    }
    Ok((h * w).map(|z| z.norm_sqr()))
}

/// `|f_t^H Θ G Σ_k w_k|²`.
pub fn sensing_gain(f_t: &CVector, theta: &CMatrix, g: &CMatrix, w: &CMatrix) -> Result<f64> {
    let n = theta.nrows();
    if f_t.len() != n || theta.ncols() != g.nrows() || g.ncols() != w.nrows() {
        return Err(Error::dims("sensing_gain operands do not chain"));
    }
    let w_sum: CVector = w.column_sum();
    Ok((f_t.adjoint() * theta * g * w_sum)[(0, 0)].norm_sqr())
}

/// The weighted matching objective over gains, auxiliary phases and targets.
pub fn objective(
    w: &CMatrix,
    theta: &CMatrix,
    aux: &AuxPhases,
    targets: &GainTargets,
    channels: &ChannelSet,
) -> Result<f64> {
    check_theta(channels, theta)?;
    check_w(channels, w)?;
    let k = channels.num_users();
    if aux.theta.shape() != (k, k) || aux.phi.len() != k {
        return Err(Error::dims("auxiliary phases do not match K"));
    }
    let t = theta * &channels.g * w;
    let mut comm = 0.0;
    for (i, f) in channels.f_users.iter().enumerate() {
        let row = f.adjoint() * &t;
        for kk in 0..k {
            let desired = C64::from_polar(targets.amplitude(i, kk), aux.theta[(i, kk)]);
            comm += (row[(0, kk)] - desired).norm_sqr();
        }
    }
    let row = channels.f_target.adjoint() * &t;
    let sens: f64 = (0..k)
        .map(|kk| (row[(0, kk)] - C64::from_polar(targets.p_t, aux.phi[kk])).norm_sqr())
        .sum();
    Ok(targets.eta * comm + (1.0 - targets.eta) * sens)
}

/// Per-user SINR from the gain matrix and the Shannon sum rate in bit/s/Hz.
pub fn sinr_and_rate(f: &DMatrix<f64>, noise_powers: &[f64]) -> (Vec<f64>, f64) {
    let k = f.nrows();
    let sinr: Vec<f64> = (0..k)
        .map(|kk| {
            let interference: f64 = (0..f.ncols()).filter(|&i| i != kk).map(|i| f[(kk, i)]).sum();
            f[(kk, kk)] / (interference + noise_powers[kk])
        })
        .collect();
    let rate = sinr.iter().map(|s| (1.0 + s).log2()).sum();
    (sinr, rate)
}

/// Gain `|f(θ, φ)^H Θ G Σ_k w_k|²` swept over azimuth at a fixed elevation.
/// Angles in radians; the grid order is preserved.
pub fn beampattern(
    theta: &CMatrix,
    g: &CMatrix,
    w: &CMatrix,
    elevation: f64,
    azimuth_grid: &[f64],
    n1: usize,
    n2: usize,
) -> Vec<(f64, f64)> {
    let beam: CVector = theta * g * w.column_sum();
    azimuth_grid
        .iter()
        .map(|&az| {
            let f = target_steering(elevation, az, n1, n2);
            (az, f.dotc(&beam).norm_sqr())
        })
        .collect()
}

/// Relative Frobenius distance helper for reports.
pub fn relative_gap(a: &CMatrix, b: &CMatrix) -> f64 {
    frob(&(a - b)) / frob(b).max(f64::MIN_POSITIVE)
}
