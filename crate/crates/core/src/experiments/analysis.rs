//! Summary statistics used to judge the experiment outputs.

use nalgebra::DMatrix;

use super::TradeoffPoint;
use crate::config::ArchKind;

/// `Σ_k F_kk / Σ_{i≠k} F_ik`; infinite when there is no interference.
pub fn dominance_ratio(f: &DMatrix<f64>) -> f64 {
    let diag: f64 = (0..f.nrows().min(f.ncols())).map(|k| f[(k, k)]).sum();
    let total: f64 = f.iter().sum();
    let off = total - diag;
    if off <= 0.0 {
        f64::INFINITY
    } else {
        diag / off
    }
}

fn frontier(points: &[TradeoffPoint], arch: ArchKind) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.architecture == arch)
        .map(|p| (p.mean_sensing_gain, p.mean_rate))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Number of steps along the gain-sorted frontier of `arch` where the rate goes up.
pub fn frontier_violations(points: &[TradeoffPoint], arch: ArchKind) -> usize {
    frontier(points, arch)
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .count()
}

/// Linear interpolation of rate at `gain_db` on a gain-sorted frontier (gains in dB).
fn interpolate(front_db: &[(f64, f64)], gain_db: f64) -> Option<f64> {
    let first = front_db.first()?;
    let last = front_db.last()?;
    if gain_db < first.0 || gain_db > last.0 {
        return None;
    }
    for w in front_db.windows(2) {
        let (a, b) = (w[0], w[1]);
        if gain_db >= a.0 && gain_db <= b.0 {
            if b.0 == a.0 {
                return Some(a.1.max(b.1));
            }
            let t = (gain_db - a.0) / (b.0 - a.0);
            return Some(a.1 + t * (b.1 - a.1));
        }
    }
    (front_db.len() == 1 && gain_db == first.0).then_some(first.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingCheck {
    pub comparable: usize,
    pub satisfied: usize,
}

impl OrderingCheck {
    pub fn fraction(&self) -> f64 {
        if self.comparable == 0 {
            0.0
        } else {
            self.satisfied as f64 / self.comparable as f64
        }
    }
}

/// Compares `better` against `worse` at matched sensing gain: every point of
/// `worse` whose gain lies inside the gain span of `better` is a comparable
/// point, satisfied when the interpolated rate of `better` is at least its rate.
pub fn ordering_fraction(points: &[TradeoffPoint], better: ArchKind, worse: ArchKind) -> OrderingCheck {
    let to_db = |v: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        v.into_iter().map(|(g, r)| (10.0 * g.log10(), r)).collect()
    };
    let top = to_db(frontier(points, better));
    let bottom = to_db(frontier(points, worse));
    let mut check = OrderingCheck {
        comparable: 0,
        satisfied: 0,
    };
    for (gain_db, rate) in bottom {
        if let Some(r) = interpolate(&top, gain_db) {
            check.comparable += 1;
            if r >= rate {
                check.satisfied += 1;
            }
        }
    }
    check
}
