//! Scored long/short-term memory over text classes.
//!
//! Every sighting adds `increment` to a class score and every frame subtracts
//! `decay` from all short-term scores. A class whose score reaches
//! `promote_threshold` moves to long-term memory, where its score freezes and it
//! can no longer be forgotten. A short-term class whose score decays to zero is
//! forgotten.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textsim::ClassId;

// Absorbs accumulated rounding from repeated decimal decrements (e.g. ten
// subtractions of 0.1 from 1.0).
const SCORE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MemoryError {
    #[error("memory increment must be positive, got {0}")]
    NonPositiveIncrement(f64),
    #[error("memory decay must be non-negative, got {0}")]
    NegativeDecay(f64),
    #[error("promotion threshold {threshold} must exceed the increment {increment}")]
    ThresholdTooLow { threshold: f64, increment: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemoryConfig {
    pub increment: f64,
    pub decay: f64,
    pub promote_threshold: f64,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self {
            increment: 1.0,
            decay: 0.1,
            promote_threshold: 5.0,
        }
    }
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if !(self.increment > 0.0) {
            return Err(MemoryError::NonPositiveIncrement(self.increment));
        }
        if !(self.decay >= 0.0) {
            return Err(MemoryError::NegativeDecay(self.decay));
        }
        if !(self.promote_threshold > self.increment) {
            return Err(MemoryError::ThresholdTooLow {
                threshold: self.promote_threshold,
                increment: self.increment,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MemoryStatus {
    ShortTerm,
    LongTerm,
    Forgotten,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub score: f64,
    pub status: MemoryStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryState {
    entries: BTreeMap<ClassId, MemoryEntry>,
}

impl MemoryState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers one sighting of `id`. Returns the status after the update.
    pub fn observe(&mut self, id: ClassId, cfg: &MemoryConfig) -> MemoryStatus {
        let entry = self.entries.entry(id).or_insert(MemoryEntry {
            score: 0.0,
            status: MemoryStatus::ShortTerm,
        });
        match entry.status {
            MemoryStatus::LongTerm => {}
            MemoryStatus::Forgotten => {
                entry.status = MemoryStatus::ShortTerm;
                entry.score = cfg.increment;
            }
            MemoryStatus::ShortTerm => entry.score += cfg.increment,
        }
        if entry.status == MemoryStatus::ShortTerm && entry.score >= cfg.promote_threshold - SCORE_EPS {
            entry.status = MemoryStatus::LongTerm;
        }
        entry.status
    }

    /// Applies one frame of decay. Returns the ids forgotten by this tick.
    pub fn tick_frame(&mut self, cfg: &MemoryConfig) -> Vec<ClassId> {
        let mut forgotten = Vec::new();
        if cfg.decay == 0.0 {
            return forgotten;
        }
        for (&id, entry) in self.entries.iter_mut() {
            if entry.status != MemoryStatus::ShortTerm {
                continue;
            }
            entry.score -= cfg.decay;
            if entry.score <= SCORE_EPS {
                entry.score = 0.0;
                entry.status = MemoryStatus::Forgotten;
                forgotten.push(id);
            }
        }
        forgotten
    }

    /// Marks `id` as long-term directly, used when restoring a persisted map.
    pub fn restore_long_term(&mut self, id: ClassId, score: f64) {
        self.entries.insert(
            id,
            MemoryEntry {
                score,
                status: MemoryStatus::LongTerm,
            },
        );
    }

    pub fn get(&self, id: ClassId) -> Option<&MemoryEntry> {
        self.entries.get(&id)
    }

    pub fn status(&self, id: ClassId) -> Option<MemoryStatus> {
        self.entries.get(&id).map(|e| e.status)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &MemoryEntry)> {
        self.entries.iter().map(|(&id, e)| (id, e))
    }

    pub fn ids_with(&self, status: MemoryStatus) -> impl Iterator<Item = ClassId> + '_ {
        self.entries
            .iter()
            .filter(move |(_, e)| e.status == status)
            .map(|(&id, _)| id)
    }

    pub fn count(&self, status: MemoryStatus) -> usize {
        self.ids_with(status).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CFG: MemoryConfig = MemoryConfig {
        increment: 1.0,
        decay: 0.1,
        promote_threshold: 5.0,
    };

    #[test]
    fn first_observation() {
        let mut m = MemoryState::new();
        assert_eq!(m.observe(3, &CFG), MemoryStatus::ShortTerm);
        assert_eq!(m.get(3).unwrap().score, 1.0);
    }

    #[test]
    fn crossing_threshold_promotes() {
        let mut m = MemoryState::new();
        m.entries.insert(0, MemoryEntry { score: 4.6, status: MemoryStatus::ShortTerm });
        assert_eq!(m.observe(0, &CFG), MemoryStatus::LongTerm);
        assert!((m.get(0).unwrap().score - 5.6).abs() < 1e-12);
        assert_eq!(m.observe(0, &CFG), MemoryStatus::LongTerm);
        assert!((m.get(0).unwrap().score - 5.6).abs() < 1e-12);
    }

    #[test]
    fn single_sighting_forgotten_after_ten_ticks() {
        let mut m = MemoryState::new();
        m.observe(0, &CFG);
        for _ in 0..9 {
            assert!(m.tick_frame(&CFG).is_empty());
        }
        assert_eq!(m.tick_frame(&CFG), vec![0]);
        assert_eq!(*m.get(0).unwrap(), MemoryEntry { score: 0.0, status: MemoryStatus::Forgotten });
    }

    #[test]
    fn every_frame_promotes_on_sixth() {
        let mut m = MemoryState::new();
        let mut after_observe = Vec::new();
        for frame in 1..=6 {
            let status = m.observe(0, &CFG);
            after_observe.push(m.get(0).unwrap().score);
            assert_eq!(status == MemoryStatus::LongTerm, frame == 6);
            m.tick_frame(&CFG);
        }
        let expected = [1.0, 1.9, 2.8, 3.7, 4.6, 5.5];
        for (got, want) in after_observe.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn forgotten_class_reenters() {
        let mut m = MemoryState::new();
        m.observe(0, &CFG);
        for _ in 0..10 {
            m.tick_frame(&CFG);
        }
        assert_eq!(m.observe(0, &CFG), MemoryStatus::ShortTerm);
        assert_eq!(m.get(0).unwrap().score, 1.0);
    }

    #[test]
    fn zero_decay_is_identity() {
        let cfg = MemoryConfig { decay: 0.0, ..CFG };
        let mut m = MemoryState::new();
        m.observe(0, &cfg);
        m.observe(1, &cfg);
        let before = m.clone();
        for _ in 0..100 {
            m.tick_frame(&cfg);
        }
        assert_eq!(m, before);
    }

    #[test]
    fn config_validation() {
        assert!(CFG.validate().is_ok());
        assert!(MemoryConfig { increment: 0.0, ..CFG }.validate().is_err());
        assert!(MemoryConfig { decay: -0.1, ..CFG }.validate().is_err());
        assert!(MemoryConfig { promote_threshold: 1.0, ..CFG }.validate().is_err());
    }

    fn promotion_frame(pattern: &[bool], cfg: &MemoryConfig) -> Option<usize> {
        let mut m = MemoryState::new();
        for (i, &seen) in pattern.iter().enumerate() {
            if seen && m.observe(0, cfg) == MemoryStatus::LongTerm {
                return Some(i);
            }
            m.tick_frame(cfg);
        }
        None
    }

    proptest! {
        #[test]
        fn long_term_is_absorbing(pattern in prop::collection::vec(any::<bool>(), 0..200)) {
            let mut m = MemoryState::new();
            for _ in 0..5 {
                m.observe(0, &CFG);
            }
            prop_assert_eq!(m.status(0), Some(MemoryStatus::LongTerm));
            for seen in pattern {
                if seen { m.observe(0, &CFG); }
                m.tick_frame(&CFG);
                prop_assert_eq!(m.status(0), Some(MemoryStatus::LongTerm));
            }
        }

        #[test]
        fn short_term_scores_stay_in_range(pattern in prop::collection::vec(0u32..4, 0..200)) {
            let mut m = MemoryState::new();
            for ids in pattern {
                for id in 0..ids { m.observe(id, &CFG); }
                m.tick_frame(&CFG);
                for (_, e) in m.iter() {
                    prop_assert!(e.score >= 0.0);
                    if e.status == MemoryStatus::ShortTerm {
                        prop_assert!(e.score < CFG.promote_threshold);
                    }
                }
            }
        }

        #[test]
        fn extra_sightings_never_delay_promotion(
            base in prop::collection::vec(any::<bool>(), 1..120),
            extra in prop::collection::vec(any::<bool>(), 1..120),
        ) {
            let more: Vec<bool> = base.iter().zip(extra.iter().chain(std::iter::repeat(&false)))
                .map(|(a, b)| *a || *b).collect();
            if let Some(f) = promotion_frame(&base, &CFG) {
                let g = promotion_frame(&more, &CFG);
                prop_assert!(g.is_some_and(|g| g <= f));
            }
        }
    }
}
