mod common;

use bdris_isac::config::rng_for;
use bdris_isac::linalg::{mat_of, symmetry_residual, unitarity_residual, vec_of, C64, CMatrix};
use bdris_isac::phase::{
    assemble_psi_quadratic, diagonal_projection, group_projection, psi_update, splitting_solve,
    symuni_projection, SplittingOptions,
};
use bdris_isac::system::objective;
use bdris_isac::{Architecture, GainTargets};
use common::{objective_oracle, rand_cmat, rand_symuni, random_aux, synthetic_channels};
use rand::Rng;

#[test]
fn sampler_is_symmetric_unitary() {
    let mut rng = rng_for(30, &["sampler"]);
    for _ in 0..20 {
        let s = rand_symuni(4, &mut rng);
        assert!(unitarity_residual(&s) <= 1e-12);
        assert!(symmetry_residual(&s) <= 1e-12);
    }
}

#[test]
fn projection_beats_random_samples() {
    let mut rng = rng_for(31, &["proj"]);
    for _ in 0..5 {
        let x = rand_cmat(3, 3, &mut rng);
        let p = symuni_projection(&x).unwrap();
        let ours = (&p - &x).norm();
        for _ in 0..20_000 {
            let s = rand_symuni(3, &mut rng);
            assert!(ours <= (&s - &x).norm() + 1e-12);
        }
        let again = symuni_projection(&p).unwrap();
        assert!((&again - &p).norm() <= 1e-10);
    }
}

#[test]
fn diagonal_projection_is_entrywise_nearest() {
    let mut rng = rng_for(32, &["diag"]);
    let x = CMatrix::from_diagonal(&common::rand_cvec(5, &mut rng));
    let p = diagonal_projection(&x).unwrap();
    for n in 0..5 {
        let ours = (p[(n, n)] - x[(n, n)]).norm();
        for _ in 0..10_000 {
            let s = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            assert!(ours <= (s - x[(n, n)]).norm() + 1e-14);
        }
    }
}

#[test]
fn group_projection_with_one_block_is_symuni() {
    let mut rng = rng_for(33, &["group"]);
    let x = rand_cmat(6, 6, &mut rng);
    let a = group_projection(&x, 6).unwrap();
    let b = symuni_projection(&x).unwrap();
    assert!(a.iter().zip(b.iter()).all(|(p, q)| (p - q).norm() <= 1e-12));
}

#[test]
fn quadratic_matches_scalar_objective() {
    let mut rng = rng_for(34, &["quad"]);
    for _ in 0..10 {
        let ch = synthetic_channels(3, 2, 2, &mut rng);
        let w = rand_cmat(2, 2, &mut rng);
        let aux = random_aux(2, &mut rng);
        let targets = GainTargets { c: 1.3, p_t: 0.7, eta: rng.random_range(0.0..1.0) };
        let quad = assemble_psi_quadratic(&ch, &w, &aux, &targets, 64).unwrap();
        let theta = rand_symuni(3, &mut rng);
        let lhs = quad.value(&vec_of(&theta)) + quad.constant;
        let rhs = objective_oracle(&w, &theta, &aux, &targets, &ch);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300), "{lhs} vs {rhs}");
    }
}

#[test]
fn psi_update_solves_normal_equations() {
    let mut rng = rng_for(35, &["psi"]);
    let ch = synthetic_channels(2, 2, 2, &mut rng);
    let w = rand_cmat(2, 2, &mut rng);
    let aux = random_aux(2, &mut rng);
    let targets = GainTargets { c: 1.0, p_t: 2.0, eta: 0.4 };
    let quad = assemble_psi_quadratic(&ch, &w, &aux, &targets, 64).unwrap();
    let theta = rand_symuni(2, &mut rng);
    let nu = common::rand_cvec(4, &mut rng);
    let mu = 0.7;
    let psi = psi_update(&quad, mu, &theta, &nu).unwrap();
    let dense = quad.dense_p() + quad.dense_q() + CMatrix::identity(4, 4) * C64::new(mu, 0.0);
    let rhs = &quad.p + &quad.q + (vec_of(&theta) - &nu) * C64::new(mu, 0.0);
    let residual = (&dense * &psi - &rhs).norm() / rhs.norm();
    assert!(residual <= 1e-8, "residual {residual}");

    let big = psi_update(&quad, 1e12, &theta, &nu).unwrap();
    assert!((&big - (vec_of(&theta) - &nu)).norm() <= 1e-6);
}

#[test]
fn splitting_beats_random_search_at_n2() {
    let mut rng = rng_for(36, &["split"]);
    for _ in 0..3 {
        let ch = synthetic_channels(2, 2, 1, &mut rng);
        let w = rand_cmat(2, 1, &mut rng);
        let aux = random_aux(1, &mut rng);
        let targets = GainTargets { c: 1.0, p_t: 1.0, eta: 0.5 };
        let quad = assemble_psi_quadratic(&ch, &w, &aux, &targets, 64).unwrap();
        let init = rand_symuni(2, &mut rng);
        let out = splitting_solve(
            &quad,
            Architecture::FullyConnected,
            &init,
            None,
            &SplittingOptions { max_iter: 2_000, ..Default::default() },
        )
        .unwrap();
        assert!(out.phase.is_feasible());
        let ours = objective(&w, &out.phase.theta, &aux, &targets, &ch).unwrap();
        let best = (0..100_000)
            .map(|_| objective(&w, &rand_symuni(2, &mut rng), &aux, &targets, &ch).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(ours <= best + 1e-9 * best.max(1.0), "splitting {ours} vs search {best}");
    }
}

#[test]
fn splitting_returns_feasible_point_on_budget_exhaustion() {
    let mut rng = rng_for(37, &["budget"]);
    let ch = synthetic_channels(4, 2, 2, &mut rng);
    let w = rand_cmat(2, 2, &mut rng);
    let aux = random_aux(2, &mut rng);
    let targets = GainTargets { c: 1.0, p_t: 1.0, eta: 0.5 };
    let quad = assemble_psi_quadratic(&ch, &w, &aux, &targets, 64).unwrap();
    for arch in [Architecture::FullyConnected, Architecture::GroupConnected(2), Architecture::Diagonal] {
        let init = bdris_isac::phase::project(arch, &rand_cmat(4, 4, &mut rng)).unwrap();
        let out = splitting_solve(
            &quad,
            arch,
            &init.theta,
            None,
            &SplittingOptions { max_iter: 2, tol: Some(0.0), ..Default::default() },
        )
        .unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.dual_residuals.len(), 2);
        assert!(out.phase.is_feasible());
        assert_eq!(mat_of(&vec_of(&out.phase.theta), 4), out.phase.theta);
    }
}
