//! Independent oracles shared by the integration tests. Nothing here calls
//! the solver code paths it is used to check.
#![allow(dead_code)]

use bdris_isac::channel::cscg;
use bdris_isac::linalg::{C64, CMatrix, CVector};
use bdris_isac::{AuxPhases, ChannelSet, GainTargets};
use rand::Rng;

pub fn rand_cmat<R: Rng>(r: usize, c: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| cscg(rng))
}

pub fn rand_cvec<R: Rng>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| cscg(rng))
}

/// Haar unitary from the QR of a Gaussian matrix with the phases of `R` removed.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let qr = rand_cmat(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// `U U^T` is symmetric and unitary for any unitary `U`.
pub fn rand_symuni<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(n, rng);
    &u * u.transpose()
}

pub fn fro2(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ_k w_k^H A w_k − 2 Re{b_k^H w_k}` with explicit loops.
pub fn precoder_value(a: &CMatrix, b: &CMatrix, w: &CMatrix) -> f64 {
    let (m, k) = (w.nrows(), w.ncols());
    let mut total = 0.0;
    for kk in 0..k {
        for r in 0..m {
            for c in 0..m {
                total += (w[(r, kk)].conj() * a[(r, c)] * w[(c, kk)]).re;
            }
            total -= 2.0 * (b[(r, kk)].conj() * w[(r, kk)]).re;
        }
    }
    total
}

fn largest_eigenvalue(a: &CMatrix) -> f64 {
    let m = a.nrows();
    let mut v = CVector::from_element(m, C64::new(1.0, 0.3));
    let mut lam = 0.0;
    for _ in 0..500 {
        let next = a * &v;
        let n = next.norm();
        if n == 0.0 {
            return 0.0;
        }
        lam = n / v.norm();
        v = next / C64::new(n, 0.0);
    }
    lam
}

/// Projected gradient descent over the Frobenius ball `‖W‖_F² ≤ p_max`,
/// best of `restarts` random starts.
pub fn pgd_precoder<R: Rng>(
    a: &CMatrix,
    b: &CMatrix,
    p_max: f64,
    iters: usize,
    restarts: usize,
    rng: &mut R,
) -> f64 {
    let step = 1.0 / (1.05 * largest_eigenvalue(a)).max(1e-300);
    let radius = p_max.sqrt();
    let project = |w: &mut CMatrix| {
        let n = fro2(w).sqrt();
        if n > radius {
            *w *= C64::new(radius / n, 0.0);
        }
    };
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let mut w = rand_cmat(a.nrows(), b.ncols(), rng);
        project(&mut w);
        for _ in 0..iters {
            let grad = a * &w - b;
            w -= grad * C64::new(step, 0.0);
            project(&mut w);
        }
        best = best.min(precoder_value(a, b, &w));
    }
    best
}

/// The weighted matching objective accumulated one scalar at a time.
pub fn objective_oracle(
    w: &CMatrix,
    theta: &CMatrix,
    aux: &AuxPhases,
    targets: &GainTargets,
    ch: &ChannelSet,
) -> f64 {
    let n = theta.nrows();
    let (m, k) = (w.nrows(), w.ncols());
    let gain = |f: &CVector, kk: usize| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                for a in 0..m {
                    s += f[r].conj() * theta[(r, c)] * ch.g[(c, a)] * w[(a, kk)];
                }
            }
        }
        s
    };
    let mut comm = 0.0;
    for i in 0..k {
        for kk in 0..k {
            let amp = if i == kk { targets.c } else { 0.0 };
            let d = gain(&ch.f_users[i], kk) - C64::from_polar(amp, aux.theta[(i, kk)]);
            comm += d.norm_sqr();
        }
    }
    let mut sens = 0.0;
    for kk in 0..k {
        let d = gain(&ch.f_target, kk) - C64::from_polar(targets.p_t, aux.phi[kk]);
        sens += d.norm_sqr();
    }
    targets.eta * comm + (1.0 - targets.eta) * sens
}

/// Synthetic channels with unit-scale Gaussian entries and a unit-norm target vector.
pub fn synthetic_channels<R: Rng>(n: usize, m: usize, k: usize, rng: &mut R) -> ChannelSet {
    let mut f_target = rand_cvec(n, rng);
    let nrm = f_target.norm();
    f_target /= C64::new(nrm, 0.0);
    ChannelSet {
        g: rand_cmat(n, m, rng),
        f_users: (0..k).map(|_| rand_cvec(n, rng)).collect(),
        f_target,
        betas: vec![1.0; k],
    }
}

pub fn random_aux<R: Rng>(k: usize, rng: &mut R) -> AuxPhases {
    let tau = std::f64::consts::TAU;
    AuxPhases {
        theta: nalgebra::DMatrix::from_fn(k, k, |_, _| rng.random_range(0.0..tau)),
        phi: nalgebra::DVector::from_fn(k, |_, _| rng.random_range(0.0..tau)),
    }
}
