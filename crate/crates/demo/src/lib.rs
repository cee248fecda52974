//! Interactive operations for the browser page. Each takes plain inputs and
//! returns a JSON document; the wasm exports are thin wrappers.

use serde::Serialize;
use textland::landmarks::{mean, trim_once};
use textland::memory::MemoryEntry;
use textland::{ClassSet, ClusterConfig, MemoryConfig, MemoryState, MemoryStatus, SimilarityConfig, WorldPoint};

#[derive(Debug, Serialize, PartialEq)]
pub struct GroupedClass {
    pub class_id: u32,
    pub representative: String,
    /// `(member, count, similarity to the representative)`
    pub members: Vec<(String, u64, f64)>,
}

/// Assigns each non-blank line of `texts` to a class in order.
pub fn group_texts(texts: &str, threshold: f64, case_fold: bool) -> Result<Vec<GroupedClass>, String> {
    let cfg = SimilarityConfig { threshold, case_fold };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut set = ClassSet::new();
    for line in texts.lines().filter(|l| !l.trim().is_empty()) {
        set.assign(line, &cfg).map_err(|e| e.to_string())?;
    }
    Ok(set
        .iter()
        .map(|c| {
            let rep = c.representative().to_owned();
            GroupedClass {
                class_id: c.class_id,
                members: c
                    .members()
                    .iter()
                    .map(|(m, n)| (m.clone(), *n, textland::similarity(m, &rep)))
                    .collect(),
                representative: rep,
            }
        })
        .collect())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct ClusterRound {
    pub mean: WorldPoint,
    /// Indices into the input that survive this round.
    pub survivors: Vec<usize>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct ClusterTrace {
    pub rounds: Vec<ClusterRound>,
    pub result: WorldPoint,
}

/// Runs the trimmed clustering on a JSON array of `[x, y, z]` triples and
/// reports every round.
pub fn cluster_trace(points_json: &str, iterations: u32, trim_fraction: f64) -> Result<ClusterTrace, String> {
    let points: Vec<WorldPoint> = serde_json::from_str(points_json).map_err(|e| e.to_string())?;
    if points.is_empty() {
        return Err("no points".into());
    }
    let cfg = ClusterConfig { iterations, trim_fraction, min_points: 1 };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut keep: Vec<usize> = (0..points.len()).collect();
    let mut rounds = Vec::new();
    for _ in 0..iterations {
        if keep.len() <= cfg.min_points {
            break;
        }
        let (centre, next) = trim_once(&points, &keep, &cfg);
        rounds.push(ClusterRound { mean: centre, survivors: next.clone() });
        keep = next;
    }
    let survivors: Vec<WorldPoint> = keep.iter().map(|&i| points[i]).collect();
    Ok(ClusterTrace { rounds, result: mean(&survivors) })
}

#[derive(Debug, Serialize, PartialEq)]
pub struct MemoryStep {
    pub frame: usize,
    pub seen: bool,
    pub score: f64,
    pub status: MemoryStatus,
}

/// Score and status of one class after each frame. `pattern` holds one
/// character per frame: `1`, `x` or `#` for a sighting, anything else for none.
pub fn memory_trace(pattern: &str, increment: f64, decay: f64, promote_threshold: f64) -> Result<Vec<MemoryStep>, String> {
    let cfg = MemoryConfig { increment, decay, promote_threshold };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut mem = MemoryState::new();
    let mut out = Vec::new();
    for (frame, c) in pattern.chars().filter(|c| !c.is_whitespace()).enumerate() {
        let seen = matches!(c, '1' | 'x' | 'X' | '#');
        if seen {
            mem.observe(0, &cfg);
        }
        mem.tick_frame(&cfg);
        let (score, status) = match mem.get(0) {
            Some(MemoryEntry { score, status }) => (*score, *status),
            None => (0.0, MemoryStatus::Forgotten),
        };
        out.push(MemoryStep { frame: frame + 1, seen, score, status });
    }
    Ok(out)
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
        r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
            .map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(js_name = groupTexts)]
    pub fn group_texts(texts: &str, threshold: f64, case_fold: bool) -> Result<String, JsValue> {
        to_js(super::group_texts(texts, threshold, case_fold))
    }

    #[wasm_bindgen(js_name = clusterTrace)]
    pub fn cluster_trace(points_json: &str, iterations: u32, trim_fraction: f64) -> Result<String, JsValue> {
        to_js(super::cluster_trace(points_json, iterations, trim_fraction))
    }

    #[wasm_bindgen(js_name = memoryTrace)]
    pub fn memory_trace(pattern: &str, increment: f64, decay: f64, promote_threshold: f64) -> Result<String, JsValue> {
        to_js(super::memory_trace(pattern, increment, decay, promote_threshold))
    }
}
