//! Edit-distance similarity and online grouping of homologous OCR strings.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ClassId = u32;

pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextError {
    #[error("text is empty after trimming")]
    EmptyText,
    #[error("similarity threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    edit_distance_chars(&a, &b)
}

fn edit_distance_chars(a: &[char], b: &[char]) -> usize {
    // Keep the shorter string on the row axis.
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let k = usize::from(ca != cb);
            let next = (row[j + 1] + 1).min(row[j] + 1).min(diag + k);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// `1 − D(a, b) / max(|a|, |b|)`, with two empty strings fully similar.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance_chars(&a, &b) as f64 / longest as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub threshold: f64,
    pub case_fold: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
            case_fold: false,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), TextError> {
        if (0.0..=1.0).contains(&self.threshold) {
            Ok(())
        } else {
            Err(TextError::InvalidThreshold(self.threshold))
        }
    }

    /// Trims and optionally case-folds a raw string.
    pub fn normalize(&self, raw: &str) -> Result<String, TextError> {
        let t = raw.trim();
        if t.is_empty() {
            return Err(TextError::EmptyText);
        }
        Ok(if self.case_fold {
            t.to_lowercase()
        } else {
            t.to_owned()
        })
    }
}

/// A group of homologous strings with occurrence counts, in first-seen order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClass {
    pub class_id: ClassId,
    members: IndexMap<String, u64>,
    representative: String,
    pub canonical_name: Option<String>,
}

impl TextClass {
    pub fn new(class_id: ClassId, text: String) -> Self {
        let mut members = IndexMap::new();
        members.insert(text.clone(), 1);
        Self {
            class_id,
            members,
            representative: text,
            canonical_name: None,
        }
    }

    /// Rebuilds a class from persisted counts. Returns `None` if `members` is
    /// empty or holds a zero count.
    pub fn from_counts(class_id: ClassId, members: IndexMap<String, u64>) -> Option<Self> {
        if members.is_empty() || members.values().any(|&c| c == 0) {
            return None;
        }
        let representative = Self::pick_representative(&members).to_owned();
        Some(Self {
            class_id,
            members,
            representative,
            canonical_name: None,
        })
    }

    pub fn members(&self) -> &IndexMap<String, u64> {
        &self.members
    }

    pub fn representative(&self) -> &str {
        &self.representative
    }

    pub fn total_count(&self) -> u64 {
        self.members.values().sum()
    }

    fn insert(&mut self, text: String) {
        *self.members.entry(text).or_insert(0) += 1;
        self.representative = Self::pick_representative(&self.members).to_owned();
    }

    // Highest count; the earliest-inserted member wins ties.
    fn pick_representative(members: &IndexMap<String, u64>) -> &str {
        let mut best: Option<(&String, u64)> = None;
        for (m, &c) in members {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((m, c));
            }
        }
        best.map(|(m, _)| m.as_str()).unwrap_or_default()
    }
}

/// The live collection of text classes. Class ids are never reused.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassSet {
    classes: BTreeMap<ClassId, TextClass>,
    next_id: ClassId,
}

impl ClassSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns `raw` to the most similar class, or opens a new one.
    ///
    /// Returns the class id and whether a class was created.
    pub fn assign(&mut self, raw: &str, cfg: &SimilarityConfig) -> Result<(ClassId, bool), TextError> {
        let text = cfg.normalize(raw)?;
        let chars: Vec<char> = text.chars().collect();
        let mut best: Option<(ClassId, f64)> = None;
        for (&id, class) in &self.classes {
            let rep: Vec<char> = class.representative.chars().collect();
            let longest = chars.len().max(rep.len());
            let sim = 1.0 - edit_distance_chars(&chars, &rep) as f64 / longest as f64;
            // Strict comparison keeps the lowest id on ties (BTreeMap iterates ascending).
            if best.is_none_or(|(_, s)| sim > s) {
                best = Some((id, sim));
            }
        }
        match best {
            Some((id, sim)) if sim >= cfg.threshold => {
                self.classes
                    .get_mut(&id)
                    .expect("id came from the map")
                    .insert(text);
                Ok((id, false))
            }
            _ => {
                let id = self.next_id;
                self.next_id += 1;
                self.classes.insert(id, TextClass::new(id, text));
                Ok((id, true))
            }
        }
    }

    pub fn get(&self, id: ClassId) -> Option<&TextClass> {
        self.classes.get(&id)
    }

    pub fn get_mut(&mut self, id: ClassId) -> Option<&mut TextClass> {
        self.classes.get_mut(&id)
    }

    pub fn remove(&mut self, id: ClassId) -> Option<TextClass> {
        self.classes.remove(&id)
    }

    /// Inserts a restored class, keeping `next_id` past every known id.
    pub fn restore(&mut self, class: TextClass) {
        self.next_id = self.next_id.max(class.class_id + 1);
        self.classes.insert(class.class_id, class);
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TextClass> {
        self.classes.values()
    }
}
