//! Phase-shift subproblem.
//!
//! With `W` and the auxiliary phases fixed the objective is a quadratic in
//! `ψ = vec(Θ)`. The splitting iteration alternates a regularized
//! least-squares step in ψ, a projection of `mat(ψ + ν)` onto the feasible
//! set of the surface architecture, and a scaled dual update.
//!
//! `P + Q` has rank at most `K² + K`, so it is kept as its low-rank factor and
//! the ψ-step is solved through the Woodbury identity.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{mat_of, norm, vec_of, C64, CMatrix, CVector};
use crate::channel::ChannelSet;
use crate::system::{Architecture, AuxPhases, GainTargets, PhaseShift};

/// Default cap on `N` for the `N²`-dimensional quadratic.
pub const DEFAULT_MAX_ELEMENTS: usize = 64;

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiQuadratic {
    pub n: usize,
    pub eta: f64,
    /// Columns `(G w_k)^* ⊗ f_i`, ordered `k`-major then `i`; `P = η Σ c c^H`.
    pub comm_generators: CMatrix,
    /// Columns `(G w_k)^* ⊗ f_t`; `Q = (1 − η) Σ c c^H`.
    pub sens_generators: CMatrix,
    pub p: CVector,
    pub q: CVector,
    /// Objective minus the quadratic form: `η Σ P_ik² + (1 − η) K P_t²`.
    pub constant: f64,
}

impl PsiQuadratic {
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn dense_p(&self) -> CMatrix {
        &self.comm_generators * self.comm_generators.adjoint() * C64::new(self.eta, 0.0)
    }

    pub fn dense_q(&self) -> CMatrix {
        &self.sens_generators * self.sens_generators.adjoint() * C64::new(1.0 - self.eta, 0.0)
    }

    /// `L` with `P + Q = L L^H`. Generators with zero weight are left out.
    pub fn factor(&self) -> CMatrix {
        let mut cols = Vec::new();
        if self.eta > 0.0 {
            let s = C64::new(self.eta.sqrt(), 0.0);
            cols.extend(self.comm_generators.column_iter().map(|c| c * s));
        }
        if self.eta < 1.0 {
            let s = C64::new((1.0 - self.eta).sqrt(), 0.0);
            cols.extend(self.sens_generators.column_iter().map(|c| c * s));
        }
        if cols.is_empty() {
            CMatrix::zeros(self.dim(), 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }

    /// `(P + Q) x`.
    pub fn apply(&self, x: &CVector) -> CVector {
        let mut out = CVector::zeros(x.len());
        if self.eta > 0.0 {
            out += &self.comm_generators * (self.comm_generators.adjoint() * x) * C64::new(self.eta, 0.0);
        }
        if self.eta < 1.0 {
            out += &self.sens_generators
                * (self.sens_generators.adjoint() * x)
                * C64::new(1.0 - self.eta, 0.0);
        }
        out
    }

    /// `trace(P + Q)`.
    pub fn trace(&self) -> f64 {
        let sq = |m: &CMatrix| m.iter().map(|z| z.norm_sqr()).sum::<f64>();
        self.eta * sq(&self.comm_generators) + (1.0 - self.eta) * sq(&self.sens_generators)
    }

    /// `ψ^H (P + Q) ψ − 2 Re{(p + q)^H ψ}`.
    pub fn value(&self, psi: &CVector) -> f64 {
        psi.dotc(&self.apply(psi)).re - 2.0 * (&self.p + &self.q).dotc(psi).re
    }
}

pub fn assemble_psi_quadratic(
    channels: &ChannelSet,
    w: &CMatrix,
    aux: &AuxPhases,
    targets: &GainTargets,
    max_elements: usize,
) -> Result<PsiQuadratic> {
    channels.check_dims()?;
    let n = channels.num_elements();
    if n > max_elements {
        return Err(Error::MemoryGuard { n, cap: max_elements });
    }
    let k = channels.num_users();
    if w.nrows() != channels.num_antennas() || w.ncols() != k {
        return Err(Error::dims("precoder does not match M x K"));
    }
    if aux.theta.shape() != (k, k) || aux.phi.len() != k {
        return Err(Error::dims("auxiliary phases do not match K"));
    }
    let gw = &channels.g * w;
    // vec index j·N + r holds conj(Gw_k)[j] · f[r]
    let kron = |kk: usize, f: &CVector| -> CVector {
        CVector::from_fn(n * n, |idx, _| gw[(idx / n, kk)].conj() * f[idx % n])
    };

    let eta = targets.eta;
    let mut comm = Vec::with_capacity(k * k);
    let mut p = CVector::zeros(n * n);
    for kk in 0..k {
        for (i, f) in channels.f_users.iter().enumerate() {
            let c = kron(kk, f);
            let amp = targets.amplitude(i, kk);
            if amp != 0.0 && eta != 0.0 {
                p += &c * C64::from_polar(eta * amp, aux.theta[(i, kk)]);
            }
            comm.push(c);
        }
    }
    let mut sens = Vec::with_capacity(k);
    let mut q = CVector::zeros(n * n);
    for kk in 0..k {
        let c = kron(kk, &channels.f_target);
        if eta != 1.0 {
            q += &c * C64::from_polar((1.0 - eta) * targets.p_t, aux.phi[kk]);
        }
        sens.push(c);
    }
    let stack = |cols: Vec<CVector>| {
        if cols.is_empty() {
            CMatrix::zeros(n * n, 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    };
    Ok(PsiQuadratic {
        n,
        eta,
        comm_generators: stack(comm),
        sens_generators: stack(sens),
        p,
        q,
        constant: targets.objective_constant(k),
    })
}

/// `(P + Q + μI)^{-1}` through the low-rank factor of `P + Q`.
#[derive(Debug, Clone)]
pub struct PsiSolver {
    factor: CMatrix,
    core: Option<Cholesky<C64, nalgebra::Dyn>>,
    mu: f64,
}

impl PsiSolver {
    pub fn new(quad: &PsiQuadratic, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::validation("mu", "penalty must be positive"));
        }
        let factor = quad.factor();
        let r = factor.ncols();
        let core = if r == 0 {
            None
        } else {
            let gram = factor.adjoint() * &factor + CMatrix::identity(r, r) * C64::new(mu, 0.0);
            let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
            Some(Cholesky::new(gram).ok_or_else(|| {
                Error::SingularSystem("μI + L^H L is not positive definite".into())
            })?)
        };
        Ok(Self { factor, core, mu })
    }

    pub fn solve(&self, rhs: &CVector) -> CVector {
        match &self.core {
            None => rhs / C64::new(self.mu, 0.0),
            Some(chol) => {
                let inner = chol.solve(&(self.factor.adjoint() * rhs));
                (rhs - &self.factor * inner) / C64::new(self.mu, 0.0)
            }
        }
    }
}

fn psi_rhs(quad: &PsiQuadratic, mu: f64, theta: &CMatrix, nu: &CVector) -> CVector {
    &quad.p + &quad.q + (vec_of(theta) - nu) * C64::new(mu, 0.0)
}

/// Closed-form ψ-step `(P + Q + μI)^{-1}(p + q + μ(vec(Θ) − ν))`.
pub fn psi_update(quad: &PsiQuadratic, mu: f64, theta: &CMatrix, nu: &CVector) -> Result<CVector> {
    if theta.shape() != (quad.n, quad.n) || nu.len() != quad.dim() {
        return Err(Error::dims("Θ or ν does not match the quadratic"));
    }
    let solver = PsiSolver::new(quad, mu)?;
    Ok(solver.solve(&psi_rhs(quad, mu, theta, nu)))
}

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Nearest symmetric unitary matrix in Frobenius norm.
///
/// With `sym(X) = (X + X^T)/2 = U Σ V^H`, returns `[U_{:,1:R}, V^*_{:,R+1:N}] V^H`
/// where `R` is the numerical rank of `sym(X)`.
pub fn symuni_projection(theta_hat: &CMatrix) -> Result<CMatrix> {
    let n = require_square(theta_hat)?;
    if n == 0 {
        return Ok(theta_hat.clone());
    }
    let sym = (theta_hat + theta_hat.transpose()) * C64::new(0.5, 0.0);
    let svd = sym.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let sigma_max = sv[order[0]];

    let mut out = CMatrix::zeros(n, n);
    for &j in &order {
        let vj = v.column(j);
        let left = if sigma_max > 0.0 && sv[j] > RANK_TOL * sigma_max {
            u.column(j).into_owned()
        } else {
            vj.map(|z| z.conj())
        };
        out += left * vj.adjoint();
    }
    // the exact result is symmetric; remove round-off asymmetry
    Ok((&out + out.transpose()) * C64::new(0.5, 0.0))
}

/// Blockwise symmetric unitary projection; everything off the `L x L`
/// diagonal blocks is dropped.
pub fn group_projection(theta_hat: &CMatrix, group_size: usize) -> Result<CMatrix> {
    let n = require_square(theta_hat)?;
    if group_size == 0 || n % group_size != 0 {
        return Err(Error::IndivisibleGroups { n, group_size });
    }
    let mut out = CMatrix::zeros(n, n);
    for b in 0..n / group_size {
        let at = b * group_size;
        let block = theta_hat.view((at, at), (group_size, group_size)).clone_owned();
        out.view_mut((at, at), (group_size, group_size))
            .copy_from(&symuni_projection(&block)?);
    }
    Ok(out)
}

/// Keeps the phase of each diagonal entry; a zero entry maps to 1.
pub fn diagonal_projection(theta_hat: &CMatrix) -> Result<CMatrix> {
    let n = require_square(theta_hat)?;
    Ok(CMatrix::from_fn(n, n, |r, c| {
        if r != c {
            C64::new(0.0, 0.0)
        } else {
            let d = theta_hat[(r, r)];
            if d.norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        }
    }))
}

/// Projection onto the feasible set of `arch`.
pub fn project(arch: Architecture, theta_hat: &CMatrix) -> Result<PhaseShift> {
    let theta = match arch {
        Architecture::FullyConnected => symuni_projection(theta_hat)?,
        Architecture::GroupConnected(l) => group_projection(theta_hat, l)?,
        Architecture::Diagonal => diagonal_projection(theta_hat)?,
    };
    Ok(PhaseShift {
        theta,
        architecture: arch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOptions {
    /// Penalty; `None` picks `trace(P + Q)/N²`.
    pub mu: Option<f64>,
    /// Primal residual tolerance; `None` picks `1e-6·√N`.
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        Self {
            mu: None,
            tol: None,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingOutcome {
    pub phase: PhaseShift,
    pub nu: CVector,
    pub mu: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `‖ψ − vec(Θ)‖₂` after each iteration.
    pub primal_residuals: Vec<f64>,
    /// `‖ψ^{l+1} − ψ^l‖₂` after each iteration.
    pub dual_residuals: Vec<f64>,
}

pub fn default_mu(quad: &PsiQuadratic) -> f64 {
    let mu = quad.trace() / quad.dim() as f64;
    if mu > 0.0 && mu.is_finite() {
        mu
    } else {
        1.0
    }
}

/// Splitting iteration for the Θ-subproblem. The returned Θ is always
/// feasible for `arch`, whether or not the residual tolerance was met.
pub fn splitting_solve(
    quad: &PsiQuadratic,
    arch: Architecture,
    theta_init: &CMatrix,
    nu_init: Option<&CVector>,
    opts: &SplittingOptions,
) -> Result<SplittingOutcome> {
    let n = quad.n;
    if theta_init.shape() != (n, n) {
        return Err(Error::dims("initial Θ does not match the quadratic"));
    }
    arch.check_size(n)?;
    let mu = opts.mu.unwrap_or_else(|| default_mu(quad));
    let tol = opts.tol.unwrap_or(1e-6 * (n as f64).sqrt());
    let solver = PsiSolver::new(quad, mu)?;

    let mut theta = theta_init.clone();
    let mut nu = match nu_init {
        Some(v) if v.len() == n * n => v.clone(),
        Some(_) => return Err(Error::dims("initial ν does not match N²")),
        None => CVector::zeros(n * n),
    };
    let mut psi = vec_of(&theta);
    let mut primal_residuals = Vec::new();
    let mut dual_residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut phase = PhaseShift {
        theta: theta.clone(),
        architecture: arch,
    };
    while iterations < opts.max_iter {
        iterations += 1;
        let next_psi = solver.solve(&psi_rhs(quad, mu, &theta, &nu));
        dual_residuals.push(norm(&(&next_psi - &psi)));
        psi = next_psi;
        phase = project(arch, &mat_of(&(&psi + &nu), n))?;
        theta = phase.theta.clone();
        let gap = &psi - vec_of(&theta);
        nu += &gap;
        let residual = norm(&gap);
        primal_residuals.push(residual);
        if residual <= tol {
            converged = true;
            break;
        }
    }
    Ok(SplittingOutcome {
        phase,
        nu,
        mu,
        converged,
        iterations,
        primal_residuals,
        dual_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::cscg;
    use crate::linalg::{symmetry_residual, unitarity_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| cscg(rng))
    }

    fn assert_symuni(m: &CMatrix) {
        assert!(unitarity_residual(m) <= 1e-8, "unitarity {}", unitarity_residual(m));
        assert!(symmetry_residual(m) <= 1e-10, "symmetry {}", symmetry_residual(m));
    }

    #[test]
    fn symuni_fixed_points() {
        let id = CMatrix::identity(4, 4);
        assert!((symuni_projection(&id).unwrap() - &id).norm() < 1e-10);
        let rot = &id * C64::from_polar(1.0, 0.7);
        assert!((symuni_projection(&rot).unwrap() - &rot).norm() < 1e-10);
        let two = &id * C64::new(2.0, 0.0);
        assert!((symuni_projection(&two).unwrap() - &id).norm() < 1e-10);
    }

    #[test]
    fn symuni_rank_deficient_hand_case() {
        let mut x = CMatrix::zeros(2, 2);
        x[(1, 1)] = C64::new(1.0, 0.0);
        let out = symuni_projection(&x).unwrap();
        assert_symuni(&out);
        assert!((out - CMatrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn symuni_random_inputs_are_feasible_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [1, 2, 3, 5, 8] {
            let x = rand_mat(n, n, &mut rng);
            let p = symuni_projection(&x).unwrap();
            assert_symuni(&p);
            let pp = symuni_projection(&p).unwrap();
            assert!((&pp - &p).norm() <= 1e-10);
        }
    }

    #[test]
    fn symuni_rejects_non_square() {
        assert!(matches!(
            symuni_projection(&CMatrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn group_projection_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = rand_mat(6, 6, &mut rng);
        let full = symuni_projection(&x).unwrap();
        let one = group_projection(&x, 6).unwrap();
        assert!((full - &one).norm() <= 1e-12);

        let ones = group_projection(&x, 1).unwrap();
        for r in 0..6 {
            let d = x[(r, r)];
            let single = symuni_projection(&CMatrix::from_element(1, 1, d)).unwrap();
            assert!((ones[(r, r)] - d / d.norm()).norm() < 1e-12);
            assert!((ones[(r, r)] - single[(0, 0)]).norm() < 1e-12);
        }

        let grouped = group_projection(&x, 2).unwrap();
        let arch = Architecture::GroupConnected(2);
        assert!(crate::system::feasibility_of(&grouped, arch).holds(arch));
        let again = group_projection(&grouped, 2).unwrap();
        assert!((again - &grouped).norm() <= 1e-10);

        assert!(matches!(
            group_projection(&x, 4),
            Err(Error::IndivisibleGroups { n: 6, group_size: 4 })
        ));
    }

    #[test]
    fn diagonal_projection_cases() {
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 0)] = C64::new(2.0, 0.0);
        x[(1, 1)] = C64::new(0.0, -3.0);
        x[(0, 1)] = C64::new(5.0, 5.0);
        let d = diagonal_projection(&x).unwrap();
        assert!((d[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((d[(1, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(d[(0, 1)], C64::new(0.0, 0.0));
        assert_eq!(diagonal_projection(&d).unwrap(), d);
        let z = diagonal_projection(&CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z, CMatrix::identity(2, 2));
    }

    #[test]
    fn pure_proximal_step() {
        let n = 3;
        let quad = PsiQuadratic {
            n,
            eta: 0.5,
            comm_generators: CMatrix::zeros(n * n, 0),
            sens_generators: CMatrix::zeros(n * n, 0),
            p: CVector::zeros(n * n),
            q: CVector::zeros(n * n),
            constant: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let theta = rand_mat(n, n, &mut rng);
        let nu = rand_mat(n * n, 1, &mut rng).column(0).into_owned();
        let psi = psi_update(&quad, 0.7, &theta, &nu).unwrap();
        assert!((psi - (vec_of(&theta) - &nu)).norm() < 1e-14);
        assert!(psi_update(&quad, 0.0, &theta, &nu).is_err());
    }
}
