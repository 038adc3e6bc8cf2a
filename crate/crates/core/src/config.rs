//! Scenario and solver parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{drop_users, ChannelSet, Geometry, Point3};
use crate::error::{Error, Result};
use crate::phase::{SplittingOptions, DEFAULT_MAX_ELEMENTS};
use crate::system::Architecture;

/// Architecture selector as it appears in config files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    Fbd,
    Gbd,
    Dris,
}

impl ArchKind {
    pub fn with_group_size(self, group_size: usize) -> Architecture {
        match self {
            ArchKind::Fbd => Architecture::FullyConnected,
            ArchKind::Gbd => Architecture::GroupConnected(group_size),
            ArchKind::Dris => Architecture::Diagonal,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fbd" => Ok(ArchKind::Fbd),
            "gbd" => Ok(ArchKind::Gbd),
            "dris" => Ok(ArchKind::Dris),
            other => Err(Error::validation(
                "architecture",
                format!("unknown architecture `{other}` (expected fbd, gbd or dris)"),
            )),
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Deterministic 64-bit seed derived from a base seed and a label path.
pub fn derive_seed(seed: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for l in labels {
        h.update((l.len() as u64).to_le_bytes());
        h.update(l.as_bytes());
    }
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_for(seed: u64, labels: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// BS antennas.
    pub m: usize,
    /// Users.
    pub k: usize,
    pub n1: usize,
    pub n2: usize,
    pub wavelength: f64,
    pub p_max_dbm: f64,
    pub noise_dbm: f64,
    pub target_elevation_deg: f64,
    pub target_azimuth_deg: f64,
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub user_radius_min: f64,
    pub user_radius_max: f64,
    /// Linear Rician K-factor of the BS → RIS link.
    pub rician_kappa: f64,
    pub eta: f64,
    pub architecture: ArchKind,
    pub group_size: usize,
    /// Overrides the initialization-based diagonal target amplitude.
    pub gain_c: Option<f64>,
    /// Overrides the initialization-based sensing target amplitude.
    pub gain_pt: Option<f64>,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub inner_tol: Option<f64>,
    pub max_inner: usize,
    pub mu: Option<f64>,
    /// Carry the splitting dual variable across outer iterations.
    pub keep_dual: bool,
    /// Reject a Θ-step that raises the objective.
    pub phase_step_guard: bool,
    pub max_elements: usize,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 8,
            k: 5,
            n1: 8,
            n2: 4,
            wavelength: 0.03,
            p_max_dbm: 30.0,
            noise_dbm: -100.0,
            target_elevation_deg: 90.0,
            target_azimuth_deg: 45.0,
            bs_position: [-20.0, 0.0, 25.0],
            ris_position: [0.0, 0.0, 0.0],
            user_radius_min: 5.0,
            user_radius_max: 30.0,
            rician_kappa: 10.0,
            eta: 0.6,
            architecture: ArchKind::Fbd,
            group_size: 4,
            gain_c: None,
            gain_pt: None,
            outer_tol: 1e-4,
            max_outer: 50,
            inner_tol: None,
            max_inner: 100,
            mu: None,
            keep_dual: false,
            phase_step_guard: true,
            max_elements: DEFAULT_MAX_ELEMENTS,
            seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn num_elements(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn p_max(&self) -> f64 {
        dbm_to_watts(self.p_max_dbm)
    }

    pub fn noise_power(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture.with_group_size(self.group_size)
    }

    pub fn splitting_options(&self) -> SplittingOptions {
        SplittingOptions {
            mu: self.mu,
            tol: self.inner_tol,
            max_iter: self.max_inner,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: usize| {
            if v == 0 {
                Err(Error::validation(field, "must be at least 1"))
            } else {
                Ok(())
            }
        };
        positive("m", self.m)?;
        positive("k", self.k)?;
        positive("n1", self.n1)?;
        positive("n2", self.n2)?;
        positive("max_outer", self.max_outer)?;
        positive("max_inner", self.max_inner)?;
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("wavelength", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::validation("eta", format!("{} is outside [0, 1]", self.eta)));
        }
        if self.architecture == ArchKind::Gbd {
            let n = self.num_elements();
            if self.group_size == 0 || n % self.group_size != 0 {
                return Err(Error::validation(
                    "group_size",
                    format!("{} does not divide N = {n}", self.group_size),
                ));
            }
        }
        if !(self.user_radius_min > 0.0 && self.user_radius_max >= self.user_radius_min) {
            return Err(Error::validation(
                "user_radius_min",
                "need 0 < user_radius_min <= user_radius_max",
            ));
        }
        if !(self.rician_kappa >= 0.0) {
            return Err(Error::validation("rician_kappa", "must be nonnegative"));
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::validation("outer_tol", "must be positive"));
        }
        for (field, v) in [("gain_c", self.gain_c), ("gain_pt", self.gain_pt)] {
            if let Some(x) = v {
                if !(x >= 0.0) {
                    return Err(Error::validation(field, "must be nonnegative"));
                }
            }
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0) {
                return Err(Error::validation("mu", "must be positive"));
            }
        }
        if self.num_elements() > self.max_elements {
            return Err(Error::validation(
                "max_elements",
                format!("N = {} exceeds the cap {}", self.num_elements(), self.max_elements),
            ));
        }
        Ok(())
    }

    /// Geometry with users dropped from `rng`.
    pub fn geometry<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Geometry {
        Geometry {
            bs_position: self.bs_position,
            ris_position: self.ris_position,
            user_positions: drop_users(
                self.k,
                self.user_radius_min,
                self.user_radius_max,
                &self.ris_position,
                rng,
            ),
            target_elevation: self.target_elevation_deg.to_radians(),
            target_azimuth: self.target_azimuth_deg.to_radians(),
            wavelength: self.wavelength,
            n1: self.n1,
            n2: self.n2,
        }
    }

    /// The channel realization tied to `channel_seed`.
    pub fn channels(&self, channel_seed: u64) -> Result<ChannelSet> {
        let mut rng = rng_for(channel_seed, &["channels"]);
        let geometry = self.geometry(&mut rng);
        ChannelSet::generate(&geometry, self.m, self.rician_kappa, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn defaults_validate() {
        let c = SystemConfig::default();
        c.validate().unwrap();
        assert_eq!(c.num_elements(), 32);
        assert_eq!(c.architecture(), Architecture::FullyConnected);
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        assert_ne!(derive_seed(1, &["a"]), derive_seed(1, &["b"]));
        assert_ne!(derive_seed(1, &["ab"]), derive_seed(1, &["a", "b"]));
        assert_eq!(derive_seed(7, &["x", "3"]), derive_seed(7, &["x", "3"]));
    }

    #[test]
    fn channels_are_reproducible() {
        let c = SystemConfig {
            n1: 2,
            n2: 2,
            ..Default::default()
        };
        assert_eq!(c.channels(5).unwrap(), c.channels(5).unwrap());
        assert_ne!(c.channels(5).unwrap(), c.channels(6).unwrap());
    }
}
