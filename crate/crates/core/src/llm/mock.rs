use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalRule {
    /// Highest-count member; lexicographically smallest on ties.
    #[default]
    MaxCount,
}

/// Deterministic stand-in for the language model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MockRules {
    #[serde(default)]
    pub canonical_rule: CanonicalRule,
    /// Names judged to be landmarks (compared case-insensitively).
    #[serde(default)]
    pub shop_lexicon: Vec<String>,
    /// Query keyword → landmark name, checked in file order.
    #[serde(default)]
    pub keyword_map: IndexMap<String, String>,
}

impl MockRules {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))
    }

    pub fn cluster_name(&self, members: &IndexMap<String, u64>) -> String {
        match self.canonical_rule {
            CanonicalRule::MaxCount => members
                .iter()
                .max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a)))
                .map(|(m, _)| m.clone())
                .unwrap_or_default(),
        }
    }

    pub fn judge_landmark(&self, name: &str) -> bool {
        let name = name.trim().to_lowercase();
        self.shop_lexicon.iter().any(|s| s.trim().to_lowercase() == name)
    }

    pub fn select_landmark(&self, query: &str, names: &[String]) -> Result<String, LlmError> {
        let q = query.to_lowercase();
        self.keyword_map
            .iter()
            .filter(|(kw, _)| q.contains(&kw.to_lowercase()))
            .find_map(|(_, target)| names.iter().find(|n| *n == target))
            .cloned()
            .ok_or_else(|| LlmError::NoSelection(query.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_count_breaks_ties_lexicographically() {
        let rules = MockRules::default();
        let m: IndexMap<String, u64> = [("b", 3), ("a", 3), ("c", 1)].map(|(k, v)| (k.to_owned(), v)).into_iter().collect();
        assert_eq!(rules.cluster_name(&m), "a");
    }

    #[test]
    fn lexicon_is_case_insensitive() {
        let rules = MockRules { shop_lexicon: vec!["Gucci".into()], ..Default::default() };
        assert!(rules.judge_landmark("GUCCI"));
        assert!(!rules.judge_landmark("WASHROOM"));
    }

    #[test]
    fn keyword_targets_must_be_candidates() {
        let rules = MockRules {
            keyword_map: [("toilet".to_owned(), "WASHROOM".to_owned()), ("eat".to_owned(), "KFC".to_owned())]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let names = vec!["KFC".to_owned(), "GUCCI".to_owned()];
        assert!(rules.select_landmark("where is the toilet", &names).is_err());
        assert_eq!(rules.select_landmark("toilet, then somewhere to eat", &names).unwrap(), "KFC");
    }

    #[test]
    fn rules_file_schema() {
        let r: MockRules = serde_json::from_str(
            r#"{"canonical_rule":"max_count","shop_lexicon":["KFC"],"keyword_map":{"pizza":"必胜客欢乐餐厅","burger":"KFC"}}"#,
        )
        .unwrap();
        assert_eq!(r.keyword_map.keys().collect::<Vec<_>>(), ["pizza", "burger"]);
    }
}
