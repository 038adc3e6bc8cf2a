//! Precoder subproblem: with Θ and the auxiliary phases fixed, minimize
//! `Σ_k (w_k^H A w_k − 2 Re{b_k^H w_k})` under a sum power cap.
//!
//! The KKT system gives `w_k = (A + λI)^{-1} b_k` with one multiplier shared
//! by all users; λ is found by bisection on the total power.

use nalgebra::{Cholesky, DVector};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix};
use crate::system::{AuxPhases, GainTargets, Precoder};

/// Iteration cap of the multiplier search.
pub const MAX_BISECTION_ITERS: usize = 200;
/// Relative width at which the multiplier bracket is accepted.
pub const LAMBDA_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderQuadratic {
    /// Hermitian PSD, `M x M`.
    pub a: CMatrix,
    /// Column `k` is `b_k`, `M x K`.
    pub b: CMatrix,
}

impl PrecoderQuadratic {
    /// `Σ_k w_k^H A w_k − 2 Re{b_k^H w_k}`.
    pub fn value(&self, w: &CMatrix) -> f64 {
        (0..w.ncols())
            .map(|k| {
                let wk = w.column(k);
                let quad = wk.dotc(&(&self.a * wk)).re;
                quad - 2.0 * self.b.column(k).dotc(&wk).re
            })
            .sum()
    }
}

pub fn assemble_precoder_quadratic(
    channels: &ChannelSet,
    theta: &CMatrix,
    aux: &AuxPhases,
    targets: &GainTargets,
) -> Result<PrecoderQuadratic> {
    channels.check_dims()?;
    let n = channels.num_elements();
    if theta.shape() != (n, n) {
        return Err(Error::dims("phase-shift matrix does not match N"));
    }
    let k = channels.num_users();
    if aux.theta.shape() != (k, k) || aux.phi.len() != k {
        return Err(Error::dims("auxiliary phases do not match K"));
    }
    let m = channels.num_antennas();
    // g = G^H Θ^H f, so that f^H Θ G w = g^H w
    let reflect = (theta * &channels.g).adjoint();
    let g_users: Vec<_> = channels.f_users.iter().map(|f| &reflect * f).collect();
    let g_target = &reflect * &channels.f_target;

    let eta = targets.eta;
    let mut a = CMatrix::zeros(m, m);
    for g in &g_users {
        a += g * g.adjoint() * C64::new(eta, 0.0);
    }
    a += &g_target * g_target.adjoint() * C64::new(1.0 - eta, 0.0);
    // clean round-off so downstream Hermitian solvers see an exact Hermitian matrix
    let a = (&a + a.adjoint()) * C64::new(0.5, 0.0);

    let mut b = CMatrix::zeros(m, k);
    for kk in 0..k {
        let mut col = DVector::zeros(m);
        for (i, g) in g_users.iter().enumerate() {
            let amp = targets.amplitude(i, kk);
            if amp != 0.0 {
                col += g * C64::from_polar(eta * amp, aux.theta[(i, kk)]);
            }
        }
        col += &g_target * C64::from_polar((1.0 - eta) * targets.p_t, aux.phi[kk]);
        b.set_column(kk, &col);
    }
    Ok(PrecoderQuadratic { a, b })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    pub precoder: Precoder,
    pub lambda: f64,
    /// Ridge added to `A` on the unconstrained branch; zero otherwise.
    pub ridge: f64,
    pub bisection_iterations: usize,
}

fn solve_shifted(a: &CMatrix, shift: f64, b: &CMatrix) -> Result<CMatrix> {
    let m = a.nrows();
    let shifted = a + CMatrix::identity(m, m) * C64::new(shift, 0.0);
    let chol = Cholesky::new(shifted)
        .ok_or_else(|| Error::SingularSystem(format!("A + {shift:e} I is not positive definite")))?;
    Ok(chol.solve(b))
}

/// Semi-closed-form precoders under `Σ_k ‖w_k‖² ≤ P_max`.
pub fn solve_precoders(quad: &PrecoderQuadratic, p_max: f64) -> Result<PrecoderSolution> {
    let m = quad.a.nrows();
    let k = quad.b.ncols();
    if quad.a.ncols() != m || quad.b.nrows() != m {
        return Err(Error::dims("A must be M x M and b must be M x K"));
    }
    if !(p_max > 0.0) {
        return Err(Error::validation("p_max", "must be positive"));
    }
    let b_energy: f64 = quad.b.iter().map(|z| z.norm_sqr()).sum();
    if b_energy == 0.0 {
        return Ok(PrecoderSolution {
            precoder: Precoder { w: CMatrix::zeros(m, k) },
            lambda: 0.0,
            ridge: 0.0,
            bisection_iterations: 0,
        });
    }

    let eig = quad.a.clone().symmetric_eigen();
    let d: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let d_max = d.iter().copied().fold(0.0, f64::max);
    let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);

    // unconstrained branch
    let ridge = if d_min <= 1e-12 * d_max {
        1e-12 * quad.a.trace().re / m as f64
    } else {
        0.0
    };
    if ridge > 0.0 || d_min > 0.0 {
        if let Ok(w) = solve_shifted(&quad.a, ridge, &quad.b) {
            let power: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            if power <= p_max {
                return Ok(PrecoderSolution {
                    precoder: Precoder { w },
                    lambda: 0.0,
                    ridge,
                    bisection_iterations: 0,
                });
            }
        }
    }

    // power(λ) = Σ_k Σ_j |(V^H b_k)_j|² / (d_j + λ)²
    let coeffs = eig.eigenvectors.adjoint() * &quad.b;
    let weights: Vec<f64> = (0..m)
        .map(|j| coeffs.row(j).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let power = |lambda: f64| -> f64 {
        weights
            .iter()
            .zip(&d)
            .map(|(wj, dj)| wj / ((dj + lambda) * (dj + lambda)))
            .sum()
    };

    // ‖b‖/(d_max + λ) ≤ ‖w(λ)‖ ≤ ‖b‖/λ brackets the root
    let scale = (b_energy / p_max).sqrt();
    let mut hi = scale;
    let mut lo = (scale - d_max).max(0.0);
    let mut iterations = 0;
    while power(hi) > p_max {
        // only reachable through round-off in the bracket
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > MAX_BISECTION_ITERS {
            return Err(Error::NonConvergence(MAX_BISECTION_ITERS));
        }
    }
    while hi - lo > LAMBDA_REL_TOL * hi {
        iterations += 1;
        if iterations > MAX_BISECTION_ITERS {
            return Err(Error::NonConvergence(MAX_BISECTION_ITERS));
        }
        let mid = 0.5 * (lo + hi);
        if power(mid) > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = hi;
    let mut w = solve_shifted(&quad.a, lambda, &quad.b)?;
    let total: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if total > p_max {
        // the eigen-based power and the Cholesky solve can disagree in the last bits
        w *= C64::new((p_max / total).sqrt(), 0.0);
    }
    Ok(PrecoderSolution {
        precoder: Precoder { w },
        lambda,
        ridge: 0.0,
        bisection_iterations: iterations,
    })
}
