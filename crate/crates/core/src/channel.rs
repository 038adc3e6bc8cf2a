//! Seedable channel synthesis for the BS → RIS → {users, target} links.
//!
//! The RIS is a uniform planar array of `n1 x n2` half-wavelength spaced
//! elements lying in the y-z plane at the RIS position. User links are
//! spatially correlated Rayleigh, the BS → RIS link is Rician with a
//! configurable K-factor, and the target link is a pure line-of-sight
//! steering vector.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, C64, CMatrix, CVector};

pub type Point3 = [f64; 3];

fn distance(a: &Point3, b: &Point3) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub user_positions: Vec<Point3>,
    /// Target elevation in radians.
    pub target_elevation: f64,
    /// Target azimuth in radians.
    pub target_azimuth: f64,
    pub wavelength: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Geometry {
    pub fn num_elements(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(Error::validation("n1", "must be at least 1"));
        }
        if self.n2 == 0 {
            return Err(Error::validation("n2", "must be at least 1"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be positive"));
        }
        for (k, u) in self.user_positions.iter().enumerate() {
            if !(distance(u, &self.ris_position) > 0.0) {
                return Err(Error::validation(
                    "user_positions",
                    format!("user {k} coincides with the RIS"),
                ));
            }
        }
        if !(distance(&self.bs_position, &self.ris_position) > 0.0) {
            return Err(Error::validation("bs_position", "coincides with the RIS"));
        }
        Ok(())
    }

    pub fn bs_ris_distance(&self) -> f64 {
        distance(&self.bs_position, &self.ris_position)
    }

    pub fn user_distances(&self) -> Vec<f64> {
        self.user_positions
            .iter()
            .map(|u| distance(u, &self.ris_position))
            .collect()
    }
}

/// One realization of every channel in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS → RIS, `N x M`.
    pub g: CMatrix,
    /// RIS → user-k, each of length `N`.
    pub f_users: Vec<CVector>,
    /// RIS → target, unit norm.
    pub f_target: CVector,
    pub betas: Vec<f64>,
}

impl ChannelSet {
    pub fn num_elements(&self) -> usize {
        self.g.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.g.ncols()
    }

    pub fn num_users(&self) -> usize {
        self.f_users.len()
    }

    /// Checks that every channel agrees on `N`, `M` and `K`.
    pub fn check_dims(&self) -> Result<()> {
        let n = self.num_elements();
        if self.f_target.len() != n {
            return Err(Error::dims(format!(
                "f_target has length {}, expected {n}",
                self.f_target.len()
            )));
        }
        for (k, f) in self.f_users.iter().enumerate() {
            if f.len() != n {
                return Err(Error::dims(format!(
                    "f_users[{k}] has length {}, expected {n}",
                    f.len()
                )));
            }
        }
        if self.betas.len() != self.f_users.len() {
            return Err(Error::dims("betas and f_users differ in length"));
        }
        Ok(())
    }

    /// Draws `G` first, then the users in order.
    pub fn generate<R: Rng + ?Sized>(
        geometry: &Geometry,
        num_antennas: usize,
        rician_kappa: f64,
        rng: &mut R,
    ) -> Result<Self> {
        geometry.validate()?;
        let (n1, n2, lambda) = (geometry.n1, geometry.n2, geometry.wavelength);
        let steering = SteeringPair::from_geometry(geometry, num_antennas);
        let g = bs_ris_channel(geometry.bs_ris_distance(), rician_kappa, &steering, rng)?;

        let s = sqrt_psd(&spatial_correlation(n1, n2, lambda))?;
        let mut betas = Vec::with_capacity(geometry.user_positions.len());
        let mut f_users = Vec::with_capacity(geometry.user_positions.len());
        for d in geometry.user_distances() {
            let beta = pathloss_user(d)?;
            f_users.push(rayleigh_user_channel(beta, &s, rng));
            betas.push(beta);
        }
        let f_target = target_steering(geometry.target_elevation, geometry.target_azimuth, n1, n2);
        Ok(Self {
            g,
            f_users,
            f_target,
            betas,
        })
    }
}

/// Element positions `u_i = [0, mod(i-1, n1)·λ/2, floor((i-1)/n1)·λ/2]`.
pub fn element_positions(n1: usize, n2: usize, wavelength: f64) -> Vec<Point3> {
    let half = wavelength / 2.0;
    (0..n1 * n2)
        .map(|i| [0.0, (i % n1) as f64 * half, (i / n1) as f64 * half])
        .collect()
}

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

pub fn spatial_correlation(n1: usize, n2: usize, wavelength: f64) -> DMatrix<f64> {
    let pos = element_positions(n1, n2, wavelength);
    let n = pos.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            sinc(2.0 * distance(&pos[i], &pos[j]) / wavelength)
        }
    })
}

/// Symmetric PSD square root through the eigendecomposition. Tiny negative
/// eigenvalues are clamped to zero.
pub fn sqrt_psd(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r.nrows() != r.ncols() {
        return Err(Error::NonSquare {
            rows: r.nrows(),
            cols: r.ncols(),
        });
    }
    if r.nrows() == 0 {
        return Ok(r.clone());
    }
    let eig = r.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.max();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -1e-8 * max_eig.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd { min_eig, max_eig });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// One circularly-symmetric `CN(0, 1)` sample.
pub fn cscg<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `f_k = √β · S · z` with `z ~ CN(0, I)`.
pub fn rayleigh_user_channel<R: Rng + ?Sized>(beta: f64, s: &DMatrix<f64>, rng: &mut R) -> CVector {
    let n = s.ncols();
    let z = CVector::from_fn(n, |_, _| cscg(rng));
    to_complex(s) * z * C64::new(beta.sqrt(), 0.0)
}

/// UPA steering vector: `n1` ramp in `sinθ·sinφ` Kronecker `n2` ramp in `cosθ`, over `√N`.
pub fn target_steering(elevation: f64, azimuth: f64, n1: usize, n2: usize) -> CVector {
    let n = n1 * n2;
    let u = elevation.sin() * azimuth.sin();
    let v = elevation.cos();
    let scale = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |idx, _| {
        // Kronecker ordering: the n2 index runs fastest
        let m1 = (idx / n2) as f64;
        let m2 = (idx % n2) as f64;
        C64::from_polar(scale, -PI * (m1 * u + m2 * v))
    })
}

/// Half-wavelength ULA response for direction cosine `u`, unit norm.
pub fn ula_steering(direction_cosine: f64, m: usize) -> CVector {
    let scale = 1.0 / (m as f64).sqrt();
    CVector::from_fn(m, |i, _| C64::from_polar(scale, -PI * i as f64 * direction_cosine))
}

/// `β = 10^-3 · d^-2`.
pub fn pathloss_user(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::ZeroDistance(distance_m));
    }
    Ok(1e-3 / (distance_m * distance_m))
}

/// BS → RIS large-scale loss in dB, `37.3 + 22 log10(d)`.
pub fn bs_ris_pathloss_db(distance_m: f64) -> f64 {
    37.3 + 22.0 * distance_m.log10()
}

/// Unit-norm array responses of the LOS component of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPair {
    /// RIS response toward the BS, length `N`.
    pub ris: CVector,
    /// BS response toward the RIS, length `M`.
    pub bs: CVector,
}

impl SteeringPair {
    /// The BS is a ULA along the y axis; the RIS is the planar array of
    /// [`element_positions`]. Both angles come from the two positions.
    pub fn from_geometry(geometry: &Geometry, num_antennas: usize) -> Self {
        let d = geometry.bs_ris_distance();
        let to_bs: Vec<f64> = (0..3)
            .map(|i| (geometry.bs_position[i] - geometry.ris_position[i]) / d)
            .collect();
        let elevation = to_bs[2].clamp(-1.0, 1.0).acos();
        let azimuth = to_bs[1].atan2(to_bs[0]);
        let ris = target_steering(elevation, azimuth, geometry.n1, geometry.n2);
        // direction cosine of RIS as seen from the BS, along the BS array axis
        let bs = ula_steering(-to_bs[1], num_antennas);
        Self { ris, bs }
    }
}

/// Rician BS → RIS channel with the large-scale loss applied.
pub fn bs_ris_channel<R: Rng + ?Sized>(
    distance_m: f64,
    rician_kappa: f64,
    steering: &SteeringPair,
    rng: &mut R,
) -> Result<CMatrix> {
    if !(distance_m > 0.0) {
        return Err(Error::ZeroDistance(distance_m));
    }
    let n = steering.ris.len();
    let m = steering.bs.len();
    let amplitude = 10f64.powf(-bs_ris_pathloss_db(distance_m) / 10.0).sqrt();
    let (los_w, nlos_w) = if rician_kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        (
            (rician_kappa / (1.0 + rician_kappa)).sqrt(),
            (1.0 / (1.0 + rician_kappa)).sqrt(),
        )
    };
    let los = &steering.ris * steering.bs.adjoint() * C64::new(((n * m) as f64).sqrt(), 0.0);
    let nlos = CMatrix::from_fn(n, m, |_, _| cscg(rng));
    Ok((los * C64::new(los_w, 0.0) + nlos * C64::new(nlos_w, 0.0)) * C64::new(amplitude, 0.0))
}

/// Uniform-by-area drop of `k` users in an annulus around `center`, at height 0.
pub fn drop_users<R: Rng + ?Sized>(
    k: usize,
    radius_min: f64,
    radius_max: f64,
    center: &Point3,
    rng: &mut R,
) -> Vec<Point3> {
    (0..k)
        .map(|_| {
            let r2 = rng.random_range(radius_min * radius_min..=radius_max * radius_max);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let r = r2.sqrt();
            [center[0] + r * angle.cos(), center[1] + r * angle.sin(), 0.0]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn positions_follow_index_formula() {
        let p = element_positions(4, 3, 0.03);
        assert_eq!(p[0], [0.0, 0.0, 0.0]);
        assert!((p[1][1] - 0.015).abs() < 1e-15 && p[1][2] == 0.0);
        assert!(p[4][1].abs() < 1e-15 && (p[4][2] - 0.015).abs() < 1e-15);
        assert_eq!(p.len(), 12);
    }

    #[test]
    fn correlation_unit_diagonal_and_adjacent_zero() {
        let r = spatial_correlation(4, 2, 0.03);
        for i in 0..8 {
            assert_eq!(r[(i, i)], 1.0);
        }
        // elements 0 and 1 are λ/2 apart horizontally
        assert!(r[(0, 1)].abs() < 1e-15);
        assert!((r.clone() - r.transpose()).norm() == 0.0);
    }

    #[test]
    fn correlation_psd_2x2() {
        let r = spatial_correlation(2, 2, 0.03);
        let ev = r.symmetric_eigenvalues();
        assert!(ev.iter().all(|&l| l >= -1e-12), "{ev}");
    }

    #[test]
    fn sqrt_psd_trivial_cases() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((sqrt_psd(&id).unwrap() - &id).norm() < 1e-14);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0]));
        let s = sqrt_psd(&d).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0]));
        assert!((s - expect).norm() < 1e-14);
    }

    #[test]
    fn sqrt_psd_rejects_indefinite() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(sqrt_psd(&d), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_psd_reconstructs_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::<f64>::from_fn(8, 5, |_, _| rng.sample(StandardNormal));
        let r = &x * x.transpose();
        let s = sqrt_psd(&r).unwrap();
        assert!((&s * &s - &r).norm() <= 1e-10 * r.norm());
    }

    #[test]
    fn rayleigh_zero_beta_and_determinism() {
        let s = sqrt_psd(&spatial_correlation(2, 2, 0.03)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(norm(&rayleigh_user_channel(0.0, &s, &mut rng)) == 0.0);
        let a = rayleigh_user_channel(1e-3, &s, &mut ChaCha8Rng::seed_from_u64(9));
        let b = rayleigh_user_channel(1e-3, &s, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn steering_broadside_and_norm() {
        let f = target_steering(PI / 2.0, 0.0, 4, 3);
        for z in f.iter() {
            assert!((z - C64::new(1.0 / 12f64.sqrt(), 0.0)).norm() < 1e-15);
        }
        let f = target_steering(0.3, 1.1, 8, 4);
        assert!((norm(&f) - 1.0).abs() < 1e-14);
        for z in f.iter() {
            assert!((z.norm() - 1.0 / 32f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn steering_45_degrees_ula() {
        let f = target_steering(PI / 2.0, PI / 4.0, 4, 1);
        for m in 0..4 {
            let expect = C64::from_polar(0.5, -PI * m as f64 * 2f64.sqrt() / 2.0);
            assert!((f[m] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn user_pathloss() {
        assert!((pathloss_user(1.0).unwrap() - 1e-3).abs() < 1e-18);
        assert!((pathloss_user(10.0).unwrap() - 1e-5).abs() < 1e-20);
        let r = pathloss_user(3.0).unwrap() / pathloss_user(6.0).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!(matches!(pathloss_user(0.0), Err(Error::ZeroDistance(_))));
    }

    fn toy_steering(n1: usize, n2: usize, m: usize) -> SteeringPair {
        SteeringPair {
            ris: target_steering(0.7, 0.4, n1, n2),
            bs: ula_steering(0.3, m),
        }
    }

    #[test]
    fn pure_los_is_rank_one() {
        let sp = toy_steering(4, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = bs_ris_channel(20.0, 1e12, &sp, &mut rng).unwrap();
        let sv = g.singular_values();
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        assert!(sv[1] / sv[0] <= 1e-5, "{sv:?}");
    }

    #[test]
    fn bs_ris_rejects_zero_distance_and_is_deterministic() {
        let sp = toy_steering(2, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            bs_ris_channel(0.0, 10.0, &sp, &mut rng),
            Err(Error::ZeroDistance(_))
        ));
        let a = bs_ris_channel(20.0, 10.0, &sp, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = bs_ris_channel(20.0, 10.0, &sp, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
        assert!(frob(&a) > 0.0);
    }

    #[test]
    fn geometry_validation() {
        let mut geo = Geometry {
            bs_position: [-20.0, 0.0, 25.0],
            ris_position: [0.0; 3],
            user_positions: vec![[5.0, 0.0, 0.0]],
            target_elevation: PI / 2.0,
            target_azimuth: PI / 4.0,
            wavelength: 0.03,
            n1: 2,
            n2: 2,
        };
        assert!(geo.validate().is_ok());
        geo.user_positions.push([0.0; 3]);
        assert!(geo.validate().is_err());
        geo.user_positions.pop();
        geo.n2 = 0;
        assert!(geo.validate().is_err());
    }

    #[test]
    fn annulus_drop_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let users = drop_users(200, 5.0, 30.0, &[0.0; 3], &mut rng);
        for u in users {
            let r = (u[0] * u[0] + u[1] * u[1]).sqrt();
            assert!((5.0 - 1e-9..=30.0 + 1e-9).contains(&r));
            assert_eq!(u[2], 0.0);
        }
    }
}
