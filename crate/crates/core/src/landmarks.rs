//! Per-class position accumulation, iterative trimmed clustering and verdicts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::WorldPoint;
use crate::textsim::ClassId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("no positions to cluster")]
    EmptyInput,
    #[error("invalid cluster config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub iterations: u32,
    pub trim_fraction: f64,
    pub min_points: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            iterations: 3,
            trim_fraction: 0.2,
            min_points: 1,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.iterations == 0 {
            return Err(ClusterError::InvalidConfig("iterations must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(ClusterError::InvalidConfig("trim_fraction must lie in [0, 1)"));
        }
        if self.min_points == 0 {
            return Err(ClusterError::InvalidConfig("min_points must be at least 1"));
        }
        Ok(())
    }

    /// Points removed from a set of `k`: `⌈trim·k⌉`, never going below `min_points`.
    pub fn trim_count(&self, k: usize) -> usize {
        // 0.2 * 15 evaluates to 3.0000000000000004; the slack keeps ceil honest.
        let raw = (self.trim_fraction * k as f64 - 1e-9).ceil().max(0.0) as usize;
        raw.min(k.saturating_sub(self.min_points))
    }
}

/// Component-wise mean. Panics on an empty slice.
pub fn mean(points: &[WorldPoint]) -> WorldPoint {
    let n = points.len() as f64;
    let (sx, sy, sz) = points
        .iter()
        .fold((0.0, 0.0, 0.0), |(sx, sy, sz), p| (sx + p.x, sy + p.y, sz + p.z));
    WorldPoint::new(sx / n, sy / n, sz / n)
}

/// One trimming round: returns the mean of `points` and the indices that survive.
pub fn trim_once(points: &[WorldPoint], keep: &[usize], cfg: &ClusterConfig) -> (WorldPoint, Vec<usize>) {
    let current: Vec<WorldPoint> = keep.iter().map(|&i| points[i]).collect();
    let centre = mean(&current);
    let drop = cfg.trim_count(keep.len());
    if drop == 0 {
        return (centre, keep.to_vec());
    }
    let mut order: Vec<(f64, usize)> = keep.iter().map(|&i| (points[i].distance(&centre), i)).collect();
    // Farthest first; among equal distances the later observation goes first.
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    let mut removed: Vec<usize> = order[..drop].iter().map(|&(_, i)| i).collect();
    removed.sort_unstable();
    let survivors = keep
        .iter()
        .copied()
        .filter(|i| removed.binary_search(i).is_err())
        .collect();
    (centre, survivors)
}

/// Iterative trimmed mean: `iterations` rounds of dropping the farthest
/// `trim_fraction` of points from the running mean, then the survivors' mean.
pub fn cluster_positions(points: &[WorldPoint], cfg: &ClusterConfig) -> Result<WorldPoint, ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    cfg.validate()?;
    let mut keep: Vec<usize> = (0..points.len()).collect();
    for _ in 0..cfg.iterations {
        if keep.len() <= cfg.min_points {
            break;
        }
        keep = trim_once(points, &keep, cfg).1;
    }
    let survivors: Vec<WorldPoint> = keep.iter().map(|&i| points[i]).collect();
    Ok(mean(&survivors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Unknown,
    Landmark,
    NotLandmark,
}

impl Verdict {
    pub fn from_is_landmark(flag: bool) -> Self {
        if flag {
            Verdict::Landmark
        } else {
            Verdict::NotLandmark
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkRecord {
    pub class_id: ClassId,
    pub canonical_name: Option<String>,
    pub verdict: Verdict,
    pub positions: Vec<WorldPoint>,
    pub final_position: Option<WorldPoint>,
}

impl LandmarkRecord {
    pub fn new(class_id: ClassId) -> Self {
        Self {
            class_id,
            canonical_name: None,
            verdict: Verdict::Unknown,
            positions: Vec::new(),
            final_position: None,
        }
    }

    /// Appends a position in observation order. Non-finite points are ignored.
    pub fn record_position(&mut self, p: WorldPoint) {
        if p.is_finite() {
            self.positions.push(p);
        }
    }

    /// Recomputes `final_position` from the buffered observations.
    pub fn cluster(&mut self, cfg: &ClusterConfig) -> Result<WorldPoint, ClusterError> {
        let p = cluster_positions(&self.positions, cfg)?;
        self.final_position = Some(p);
        Ok(p)
    }
}
