//! Runtime text mapping, distilling and navigation over one map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::geometry::{box_center, border_filter, pixel_to_world, Intrinsics, Pose, QuadBox, WorldPoint};
use crate::landmarks::{LandmarkRecord, Verdict};
use crate::llm::{LlmBackend, LlmError};
use crate::memory::{MemoryState, MemoryStatus};
use crate::textsim::{ClassId, ClassSet};
use crate::Error;

/// One detected string in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextObservation {
    pub raw: String,
    pub frame_id: u64,
    pub quad: QuadBox,
    /// Depth sampled at the box center, meters. `None` when unavailable.
    pub depth: Option<f64>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub frame_id: u64,
    pub timestamp: f64,
    pub pose: Pose,
    pub detections: Vec<TextObservation>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameReport {
    pub accepted: usize,
    pub rejected_border: usize,
    pub rejected_empty: usize,
    pub positions_recorded: usize,
    pub created: Vec<ClassId>,
    pub promoted: Vec<ClassId>,
    pub forgotten: Vec<ClassId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistilledEntry {
    pub class_id: ClassId,
    pub canonical_name: Option<String>,
    pub verdict: Verdict,
    pub final_position: Option<WorldPoint>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistillReport {
    pub entries: Vec<DistilledEntry>,
    pub failures: Vec<(ClassId, LlmError)>,
}

impl DistillReport {
    pub fn succeeded(&self) -> usize {
        self.entries.len() - self.failures.len()
    }
}

/// The whole mutable map: text classes, memory, and per-class records.
#[derive(Debug, Clone, PartialEq)]
pub struct MapState {
    pub intrinsics: Intrinsics,
    pub config: EngineConfig,
    pub classes: ClassSet,
    pub memory: MemoryState,
    pub records: BTreeMap<ClassId, LandmarkRecord>,
    pub distilled: bool,
    pub last_frame_id: Option<u64>,
}

impl MapState {
    pub fn new(intrinsics: Intrinsics, config: EngineConfig) -> Self {
        Self {
            intrinsics,
            config,
            classes: ClassSet::new(),
            memory: MemoryState::new(),
            records: BTreeMap::new(),
            distilled: false,
            last_frame_id: None,
        }
    }

    pub fn long_term_ids(&self) -> Vec<ClassId> {
        self.memory.ids_with(MemoryStatus::LongTerm).collect()
    }

    /// Runtime mapping for one frame: filter, group, score and localize every
    /// detection, then decay the memory once.
    pub fn process_frame(&mut self, frame: &FrameInput) -> Result<FrameReport, Error> {
        if let Some(last) = self.last_frame_id {
            if frame.frame_id <= last {
                return Err(Error::StalePose {
                    last,
                    got: frame.frame_id,
                });
            }
        }
        self.last_frame_id = Some(frame.frame_id);
        self.distilled = false;

        let cfg = self.config;
        let mut report = FrameReport::default();
        for det in &frame.detections {
            if !border_filter(&det.quad, &self.intrinsics, cfg.border_margin) {
                report.rejected_border += 1;
                continue;
            }
            let Ok((id, created)) = self.classes.assign(&det.raw, &cfg.similarity) else {
                report.rejected_empty += 1;
                continue;
            };
            report.accepted += 1;
            if created {
                report.created.push(id);
            }
            let before = self.memory.status(id);
            if self.memory.observe(id, &cfg.memory) == MemoryStatus::LongTerm && before != Some(MemoryStatus::LongTerm) {
                report.promoted.push(id);
            }
            let record = self.records.entry(id).or_insert_with(|| LandmarkRecord::new(id));
            if let Some(depth) = det.depth.filter(|d| *d > 0.0) {
                if let Ok(p) = pixel_to_world(&frame.pose, &self.intrinsics, &box_center(&det.quad), depth) {
                    record.record_position(p);
                    report.positions_recorded += 1;
                }
            }
        }

        report.forgotten = self.memory.tick_frame(&cfg.memory);
        for id in &report.forgotten {
            self.classes.remove(*id);
            self.records.remove(id);
        }
        Ok(report)
    }

    /// Names, judges and localizes every long-term class, in class-id order.
    ///
    /// A backend failure on one class leaves that record's verdict `Unknown` and
    /// is reported; the remaining classes are still processed. A record without
    /// buffered positions keeps whatever final position it already had.
    pub fn distill(&mut self, backend: &LlmBackend) -> Result<DistillReport, Error> {
        let ids = self.long_term_ids();
        if ids.is_empty() {
            return Err(Error::NoPromotedClasses);
        }
        let mut report = DistillReport::default();
        for id in ids {
            let class = self.classes.get(id).ok_or(Error::MissingClass(id))?;
            let members = class.members().clone();
            let record = self.records.entry(id).or_insert_with(|| LandmarkRecord::new(id));
            record.verdict = Verdict::Unknown;
            record.canonical_name = None;
            if !record.positions.is_empty() {
                record.cluster(&self.config.cluster)?;
            }

            let outcome = backend.cluster_name(&members).and_then(|name| {
                record.canonical_name = Some(name.clone());
                backend.judge_landmark(&name)
            });
            match outcome {
                Ok(is_landmark) => record.verdict = Verdict::from_is_landmark(is_landmark),
                Err(e) => report.failures.push((id, e)),
            }
            if let Some(class) = self.classes.get_mut(id) {
                class.canonical_name = record.canonical_name.clone();
            }
            report.entries.push(DistilledEntry {
                class_id: id,
                canonical_name: record.canonical_name.clone(),
                verdict: record.verdict,
                final_position: record.final_position,
            });
        }
        self.distilled = true;
        Ok(report)
    }

    /// Candidate names for navigation, in class-id order, without duplicates.
    pub fn navigation_candidates(&self) -> Vec<(&str, WorldPoint)> {
        let mut out: Vec<(&str, WorldPoint)> = Vec::new();
        for record in self.records.values() {
            if !(self.config.navigate_all_records || record.verdict == Verdict::Landmark) {
                continue;
            }
            if self.memory.status(record.class_id) != Some(MemoryStatus::LongTerm) {
                continue;
            }
            if let (Some(name), Some(pos)) = (record.canonical_name.as_deref(), record.final_position) {
                if !out.iter().any(|(n, _)| *n == name) {
                    out.push((name, pos));
                }
            }
        }
        out
    }

    /// Answers a free-form query with a stored landmark name and position.
    pub fn navigate(&self, query: &str, backend: &LlmBackend) -> Result<(String, WorldPoint), Error> {
        if !self.distilled {
            return Err(Error::MapNotDistilled);
        }
        let candidates = self.navigation_candidates();
        if candidates.is_empty() {
            return Err(Error::NoLandmarks);
        }
        let names: Vec<String> = candidates.iter().map(|(n, _)| (*n).to_owned()).collect();
        let chosen = backend.select_landmark(query, &names)?;
        candidates
            .into_iter()
            .find(|(n, _)| *n == chosen)
            .map(|(n, p)| (n.to_owned(), p))
            .ok_or(Error::Llm(LlmError::NoSelection(chosen)))
    }
}
