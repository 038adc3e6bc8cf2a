use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{ArchKind, SystemConfig};
use crate::error::{Error, Result};

/// Scenario parameters plus the sweep settings of the experiment runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    /// Weights swept by the gain-matrix and beam-pattern experiments.
    pub eta_list: Vec<f64>,
    /// Number of evenly spaced weights in `[0, 1]` for the trade-off sweep.
    pub tradeoff_points: usize,
    pub architectures: Vec<ArchKind>,
    pub num_trials: usize,
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub azimuth_step_deg: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            eta_list: vec![0.0, 0.6, 1.0],
            tradeoff_points: 11,
            architectures: vec![ArchKind::Fbd, ArchKind::Gbd, ArchKind::Dris],
            num_trials: 20,
            azimuth_min_deg: 0.0,
            azimuth_max_deg: 90.0,
            azimuth_step_deg: 0.5,
            output_dir: PathBuf::from("out"),
        }
    }
}

const EXPERIMENT_KEYS: [&str; 8] = [
    "eta_list",
    "tradeoff_points",
    "architectures",
    "num_trials",
    "azimuth_min_deg",
    "azimuth_max_deg",
    "azimuth_step_deg",
    "output_dir",
];

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eta: Option<Vec<f64>>,
    pub arch: Option<ArchKind>,
    pub group_size: Option<usize>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

fn system_keys() -> BTreeSet<String> {
    match serde_json::to_value(SystemConfig::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => unreachable!("SystemConfig serializes to an object"),
    }
}

fn field_error(key: &str, e: serde_json::Error) -> Error {
    Error::validation(key, e.to_string())
}

impl ExperimentConfig {
    /// Parses a flat JSON object. Every key must be known.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(Error::Parse("config must be a JSON object".into()));
        };
        Self::from_map(map)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self> {
        let sys_keys = system_keys();
        let mut sys = Map::new();
        let mut cfg = ExperimentConfig::default();
        for (key, value) in map {
            if sys_keys.contains(&key) {
                sys.insert(key, value);
                continue;
            }
            match key.as_str() {
                "eta_list" => cfg.eta_list = serde_json::from_value(value).map_err(|e| field_error(&key, e))?,
                "tradeoff_points" => {
                    cfg.tradeoff_points = serde_json::from_value(value).map_err(|e| field_error(&key, e))?
                }
                "architectures" => {
                    cfg.architectures = serde_json::from_value(value).map_err(|e| field_error(&key, e))?
                }
                "num_trials" => cfg.num_trials = serde_json::from_value(value).map_err(|e| field_error(&key, e))?,
                "azimuth_min_deg" => {
                    cfg.azimuth_min_deg = serde_json::from_value(value).map_err(|e| field_error(&key, e))?
                }
                "azimuth_max_deg" => {
                    cfg.azimuth_max_deg = serde_json::from_value(value).map_err(|e| field_error(&key, e))?
                }
                "azimuth_step_deg" => {
                    cfg.azimuth_step_deg = serde_json::from_value(value).map_err(|e| field_error(&key, e))?
                }
                "output_dir" => cfg.output_dir = serde_json::from_value(value).map_err(|e| field_error(&key, e))?,
                _ => {
                    debug_assert!(!EXPERIMENT_KEYS.contains(&key.as_str()));
                    return Err(Error::validation(&key, "unknown configuration key"));
                }
            }
        }
        // per-key decoding so that type errors name the offending field
        let mut system = serde_json::to_value(SystemConfig::default()).expect("serializable");
        if let Value::Object(base) = &mut system {
            for (key, value) in sys {
                let mut probe = serde_json::to_value(SystemConfig::default()).expect("serializable");
                probe[&key] = value.clone();
                serde_json::from_value::<SystemConfig>(probe).map_err(|e| field_error(&key, e))?;
                base.insert(key, value);
            }
        }
        cfg.system = serde_json::from_value(system).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.system.seed = seed;
        }
        if let Some(etas) = &o.eta {
            if let Some(&first) = etas.first() {
                self.system.eta = first;
            }
            self.eta_list = etas.clone();
        }
        if let Some(arch) = o.arch {
            self.system.architecture = arch;
            self.architectures = vec![arch];
        }
        if let Some(l) = o.group_size {
            self.system.group_size = l;
        }
        if let Some(t) = o.trials {
            self.num_trials = t;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.eta_list.is_empty() {
            return Err(Error::validation("eta_list", "must not be empty"));
        }
        for &eta in &self.eta_list {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::validation("eta", format!("{eta} is outside [0, 1]")));
            }
        }
        if self.tradeoff_points < 2 {
            return Err(Error::validation("tradeoff_points", "need at least 2 points"));
        }
        if self.num_trials == 0 {
            return Err(Error::validation("num_trials", "must be at least 1"));
        }
        if self.architectures.is_empty() {
            return Err(Error::validation("architectures", "must not be empty"));
        }
        let n = self.system.num_elements();
        let l = self.system.group_size;
        if self.architectures.contains(&ArchKind::Gbd) && (l == 0 || n % l != 0) {
            return Err(Error::validation("group_size", format!("{l} does not divide N = {n}")));
        }
        if !(self.azimuth_step_deg > 0.0) || self.azimuth_max_deg < self.azimuth_min_deg {
            return Err(Error::validation("azimuth_step_deg", "grid must be nonempty with a positive step"));
        }
        Ok(())
    }

    /// Short content hash of every setting except the output directory.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Value::Object(map) = &mut v {
            map.remove("output_dir");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        hex::encode(&digest[..6])
    }

    /// The flat key-value form accepted by [`ExperimentConfig::from_json_str`].
    pub fn to_flat_json(&self) -> Value {
        let mut flat = match serde_json::to_value(&self.system) {
            Ok(Value::Object(map)) => map,
            _ => unreachable!("SystemConfig serializes to an object"),
        };
        if let Ok(Value::Object(rest)) = serde_json::to_value(self) {
            for (k, v) in rest {
                if k != "system" {
                    flat.insert(k, v);
                }
            }
        }
        Value::Object(flat)
    }

    pub fn azimuth_grid_deg(&self) -> Vec<f64> {
        let count = ((self.azimuth_max_deg - self.azimuth_min_deg) / self.azimuth_step_deg + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.azimuth_min_deg + i as f64 * self.azimuth_step_deg)
            .collect()
    }

    pub fn tradeoff_etas(&self) -> Vec<f64> {
        let n = self.tradeoff_points;
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }
}

/// Defaults, then the optional file, then the overrides; validated.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_json_str(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = ExperimentConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let s = &cfg.system;
        assert_eq!((s.m, s.k, s.n1, s.n2), (8, 5, 8, 4));
        assert_eq!(s.wavelength, 0.03);
        assert_eq!(s.p_max_dbm, 30.0);
        assert_eq!(s.noise_dbm, -100.0);
        assert_eq!((s.target_elevation_deg, s.target_azimuth_deg), (90.0, 45.0));
        assert_eq!(s.bs_position, [-20.0, 0.0, 25.0]);
        assert_eq!(s.ris_position, [0.0, 0.0, 0.0]);
        assert!((s.p_max() - 1.0).abs() < 1e-15);
        assert!((s.noise_power() - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn eta_out_of_range_names_eta() {
        let mut cfg = ExperimentConfig::from_json_str(r#"{"eta": 1.5}"#).unwrap();
        match cfg.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "eta"),
            other => panic!("{other:?}"),
        }
        cfg.system.eta = 0.5;
        cfg.eta_list = vec![0.2, 1.5];
        assert!(matches!(cfg.validate(), Err(Error::Validation { field, .. }) if field == "eta"));
    }

    #[test]
    fn indivisible_group_size_is_rejected() {
        let cfg = ExperimentConfig::from_json_str(r#"{"group_size": 3}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Validation { field, .. }) if field == "group_size"));
    }

    #[test]
    fn unknown_and_mistyped_keys() {
        assert!(matches!(
            ExperimentConfig::from_json_str(r#"{"bogus": 1}"#),
            Err(Error::Validation { field, .. }) if field == "bogus"
        ));
        assert!(matches!(
            ExperimentConfig::from_json_str(r#"{"k": "five"}"#),
            Err(Error::Validation { field, .. }) if field == "k"
        ));
        assert!(matches!(
            ExperimentConfig::from_json_str("[1, 2]"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(ExperimentConfig::from_json_str("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn overrides_and_hash() {
        let mut cfg = ExperimentConfig::default();
        let h0 = cfg.hash();
        cfg.apply(&Overrides {
            out: Some("elsewhere".into()),
            ..Default::default()
        });
        assert_eq!(cfg.hash(), h0);
        cfg.apply(&Overrides {
            seed: Some(99),
            arch: Some(ArchKind::Dris),
            eta: Some(vec![0.3]),
            ..Default::default()
        });
        assert_ne!(cfg.hash(), h0);
        assert_eq!(cfg.system.seed, 99);
        assert_eq!(cfg.architectures, vec![ArchKind::Dris]);
        assert_eq!(cfg.system.eta, 0.3);
        assert_eq!(cfg.hash().len(), 12);
        let back = ExperimentConfig::from_json_str(&cfg.to_flat_json().to_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn grids() {
        let cfg = ExperimentConfig::default();
        let g = cfg.azimuth_grid_deg();
        assert_eq!(g.len(), 181);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 90.0);
        let e = cfg.tradeoff_etas();
        assert_eq!(e.len(), 11);
        assert_eq!((e[0], e[10]), (0.0, 1.0));
    }
}
