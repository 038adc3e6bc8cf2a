//! Closed-form update of the desired-gain phases.
//!
//! For a fixed `ζ`, `min_ξ |e^{jξ} − ζ|²` is solved by `ξ = angle(ζ) mod 2π`:
//! expanding the modulus leaves `max_ξ Re{ζ} cos ξ + Im{ζ} sin ξ = |ζ| cos(angle ζ − ξ)`.
//! Scaling the unit phasor by a nonnegative amplitude does not move the minimizer.

use nalgebra::{DMatrix, DVector};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{wrapped_angle, C64, CMatrix};
use crate::system::AuxPhases;

/// Minimizer of `|e^{jξ} − ζ|²` over `ξ ∈ [0, 2π)`.
pub fn closed_form_phase(zeta: C64) -> f64 {
    wrapped_angle(zeta)
}

/// `θ_{i,k} = angle(f_i^H Θ G w_k)`, `φ_k = angle(f_t^H Θ G w_k)`, all in `[0, 2π)`.
pub fn optimal_aux_phases(channels: &ChannelSet, theta: &CMatrix, w: &CMatrix) -> Result<AuxPhases> {
    channels.check_dims()?;
    let n = channels.num_elements();
    let k = channels.num_users();
    if theta.shape() != (n, n) || w.nrows() != channels.num_antennas() || w.ncols() != k {
        return Err(Error::dims("Θ or W does not match the channels"));
    }
    let t = theta * &channels.g * w;
    let mut phases = DMatrix::zeros(k, k);
    for (i, f) in channels.f_users.iter().enumerate() {
        let row = f.adjoint() * &t;
        for kk in 0..k {
            phases[(i, kk)] = closed_form_phase(row[(0, kk)]);
        }
    }
    let row = channels.f_target.adjoint() * &t;
    let phi = DVector::from_fn(k, |kk, _| closed_form_phase(row[(0, kk)]));
    Ok(AuxPhases { theta: phases, phi })
}
