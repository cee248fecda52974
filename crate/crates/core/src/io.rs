//! File formats: trajectories, detection logs, and persisted maps.
//!
//! * Trajectory: text lines `timestamp tx ty tz qx qy qz qw`, `#` comments.
//! * Detection log: one JSON object per line,
//!   `{"ts":…,"text":…,"quad":[[u,v],…×4],"depth_m":…|null,"conf":…}`.
//! * Map: a single versioned JSON document holding the long-term classes.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::geometry::{Intrinsics, Pose, QuadBox, WorldPoint};
use crate::landmarks::{LandmarkRecord, Verdict};
use crate::pipeline::{FrameInput, MapState, TextObservation};
use crate::textsim::{ClassId, TextClass};
use crate::Error;

pub const MAP_VERSION: u32 = 1;

// Quaternions further than this from unit norm are treated as corrupt rather
// than silently normalized.
const QUATERNION_NORM_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub timestamp: f64,
    pub pose: Pose,
}

pub fn parse_trajectory(text: &str, path: &Path) -> Result<Vec<TimedPose>, Error> {
    let mut out: Vec<TimedPose> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, lineno, format!("bad number: {e}")))?;
        let [ts, tx, ty, tz, qx, qy, qz, qw] = vals[..] else {
            return Err(Error::parse(path, lineno, format!("expected 8 fields, found {}", vals.len())));
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, lineno, "non-finite value"));
        }
        let norm = (qx * qx + qy * qy + qz * qz + qw * qw).sqrt();
        if (norm - 1.0).abs() > QUATERNION_NORM_SLACK {
            return Err(Error::parse(path, lineno, format!("quaternion norm {norm} is not close to 1")));
        }
        if let Some(prev) = out.last() {
            if ts <= prev.timestamp {
                return Err(Error::parse(path, lineno, format!("timestamp {ts} does not increase")));
            }
        }
        let pose = Pose::from_translation_quaternion([tx, ty, tz], [qx, qy, qz, qw])
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        out.push(TimedPose { timestamp: ts, pose });
    }
    Ok(out)
}

pub fn load_trajectory(path: &Path) -> Result<Vec<TimedPose>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text, path)
}

pub fn format_trajectory(poses: &[TimedPose]) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for tp in poses {
        let t = tp.pose.translation;
        let [qx, qy, qz, qw] = tp.pose.quaternion();
        let _ = writeln!(out, "{} {} {} {} {} {} {} {}", tp.timestamp, t.x, t.y, t.z, qx, qy, qz, qw);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub ts: f64,
    pub text: String,
    pub quad: [[f64; 2]; 4],
    pub depth_m: Option<f64>,
    pub conf: f64,
}

pub fn parse_detection_log(text: &str, path: &Path) -> Result<Vec<DetectionRecord>, Error> {
    let mut out: Vec<DetectionRecord> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DetectionRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if !rec.ts.is_finite() || rec.quad.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, lineno, "non-finite value"));
        }
        if !(0.0..=1.0).contains(&rec.conf) {
            return Err(Error::parse(path, lineno, format!("confidence {} outside [0, 1]", rec.conf)));
        }
        if let Some(prev) = out.last() {
            if rec.ts < prev.ts {
                return Err(Error::parse(path, lineno, format!("timestamp {} goes backwards", rec.ts)));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_detection_log(path: &Path) -> Result<Vec<DetectionRecord>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detection_log(&text, path)
}

pub fn format_detection_log(records: &[DetectionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("detection records serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssociationStats {
    pub matched: usize,
    pub unmatched: usize,
}

/// Joins detections to poses by nearest timestamp within `window_s`.
///
/// Every pose becomes a frame (frame id = pose index) so the memory decays on
/// frames without detections too. Fails with [`Error::EmptyAssociation`] when no
/// detection lands on any pose.
pub fn associate(
    poses: &[TimedPose],
    records: &[DetectionRecord],
    window_s: f64,
) -> Result<(Vec<FrameInput>, AssociationStats), Error> {
    let mut frames: Vec<FrameInput> = poses
        .iter()
        .enumerate()
        .map(|(i, tp)| FrameInput {
            frame_id: i as u64,
            timestamp: tp.timestamp,
            pose: tp.pose,
            detections: Vec::new(),
        })
        .collect();
    let mut stats = AssociationStats::default();
    for rec in records {
        let Some(idx) = nearest_pose(poses, rec.ts).filter(|&i| (poses[i].timestamp - rec.ts).abs() <= window_s) else {
            stats.unmatched += 1;
            continue;
        };
        stats.matched += 1;
        frames[idx].detections.push(TextObservation {
            raw: rec.text.clone(),
            frame_id: idx as u64,
            quad: QuadBox::from(rec.quad),
            depth: rec.depth_m,
            confidence: rec.conf,
        });
    }
    if stats.matched == 0 {
        return Err(Error::EmptyAssociation);
    }
    Ok((frames, stats))
}

fn nearest_pose(poses: &[TimedPose], ts: f64) -> Option<usize> {
    if poses.is_empty() {
        return None;
    }
    let i = poses.partition_point(|p| p.timestamp < ts);
    let candidates = [i.checked_sub(1), (i < poses.len()).then_some(i)];
    candidates
        .into_iter()
        .flatten()
        .min_by(|&a, &b| (poses[a].timestamp - ts).abs().total_cmp(&(poses[b].timestamp - ts).abs()))
}

/// One long-term class in a persisted map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapLandmark {
    pub class_id: ClassId,
    pub canonical_name: Option<String>,
    pub verdict: Verdict,
    pub member_counts: IndexMap<String, u64>,
    pub position: Option<WorldPoint>,
    pub n_observations: usize,
    pub memory_score: f64,
    /// Every buffered world position, in observation order. May be omitted in
    /// hand-written maps, in which case `position` is kept as given.
    #[serde(default)]
    pub observations: Vec<WorldPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub version: u32,
    pub intrinsics: Intrinsics,
    pub config: EngineConfig,
    pub distilled: bool,
    pub last_frame_id: Option<u64>,
    pub landmarks: Vec<MapLandmark>,
}

impl MapFile {
    /// Snapshot of the long-term part of `state`, ordered by class id.
    pub fn from_state(state: &MapState) -> Result<Self, Error> {
        let mut landmarks = Vec::new();
        for id in state.long_term_ids() {
            let class = state.classes.get(id).ok_or(Error::MissingClass(id))?;
            let empty = LandmarkRecord::new(id);
            let record = state.records.get(&id).unwrap_or(&empty);
            landmarks.push(MapLandmark {
                class_id: id,
                canonical_name: record.canonical_name.clone(),
                verdict: record.verdict,
                member_counts: class.members().clone(),
                position: record.final_position,
                n_observations: record.positions.len(),
                memory_score: state.memory.get(id).map_or(0.0, |e| e.score),
                observations: record.positions.clone(),
            });
        }
        Ok(Self {
            version: MAP_VERSION,
            intrinsics: state.intrinsics,
            config: state.config,
            distilled: state.distilled,
            last_frame_id: state.last_frame_id,
            landmarks,
        })
    }

    pub fn into_state(self) -> Result<MapState, Error> {
        if self.version != MAP_VERSION {
            return Err(Error::MapVersion(self.version));
        }
        self.intrinsics.validate()?;
        self.config.validate()?;
        let mut state = MapState::new(self.intrinsics, self.config);
        state.distilled = self.distilled;
        state.last_frame_id = self.last_frame_id;
        for lm in self.landmarks {
            if state.classes.get(lm.class_id).is_some() {
                return Err(Error::InvalidMap(format!("duplicate class id {}", lm.class_id)));
            }
            if !lm.observations.is_empty() && lm.n_observations != lm.observations.len() {
                return Err(Error::InvalidMap(format!("class {}: observation count mismatch", lm.class_id)));
            }
            let mut class = TextClass::from_counts(lm.class_id, lm.member_counts)
                .ok_or_else(|| Error::InvalidMap(format!("class {} has no members", lm.class_id)))?;
            class.canonical_name = lm.canonical_name.clone();
            state.classes.restore(class);
            state.memory.restore_long_term(lm.class_id, lm.memory_score);
            state.records.insert(
                lm.class_id,
                LandmarkRecord {
                    class_id: lm.class_id,
                    canonical_name: lm.canonical_name,
                    verdict: lm.verdict,
                    positions: lm.observations,
                    final_position: lm.position,
                },
            );
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct Probe {
            version: Option<u64>,
        }
        let probe: Probe = serde_json::from_str(text).map_err(|e| Error::InvalidMap(e.to_string()))?;
        let version = probe.version.ok_or_else(|| Error::InvalidMap("missing version".into()))?;
        if version != u64::from(MAP_VERSION) {
            return Err(Error::MapVersion(u32::try_from(version).unwrap_or(u32::MAX)));
        }
        serde_json::from_str(text).map_err(|e| Error::InvalidMap(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
