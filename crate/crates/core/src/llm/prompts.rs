//! Prompt template files.
//!
//! A template is plain text split into sections by `### <kind>` header lines,
//! where kind is `system`, `user`, `assistant` or `request`. The first section
//! must be `system` (the mission description); the worked examples follow as
//! user/assistant turns; the single `request` section is the per-call message,
//! with `{placeholder}` slots filled at call time.

use std::path::Path;

use super::{ChatMessage, LlmError, Role};

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub priming: Vec<ChatMessage>,
    pub request: String,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, LlmError> {
        let mut sections: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            if let Some(kind) = line.strip_prefix("### ") {
                sections.push((kind.trim().to_lowercase(), String::new()));
            } else if let Some((_, body)) = sections.last_mut() {
                body.push_str(line);
                body.push('\n');
            } else if !line.trim().is_empty() {
                return Err(LlmError::Template("text before the first section header".into()));
            }
        }
        let mut priming = Vec::new();
        let mut request = None;
        for (i, (kind, body)) in sections.into_iter().enumerate() {
            let body = body.trim().to_owned();
            if body.is_empty() {
                return Err(LlmError::Template(format!("section {kind:?} is empty")));
            }
            let role = match kind.as_str() {
                "system" => Role::System,
                "user" => Role::User,
                "assistant" => Role::Assistant,
                "request" => {
                    if request.replace(body).is_some() {
                        return Err(LlmError::Template("more than one request section".into()));
                    }
                    continue;
                }
                other => return Err(LlmError::Template(format!("unknown section {other:?}"))),
            };
            if i == 0 && role != Role::System {
                return Err(LlmError::Template("template must open with a system section".into()));
            }
            priming.push(ChatMessage::new(role, body));
        }
        if priming.is_empty() {
            return Err(LlmError::Template("template must open with a system section".into()));
        }
        let request = request.ok_or_else(|| LlmError::Template("missing request section".into()))?;
        Ok(Self { priming, request })
    }

    /// Fills `{key}` slots in the request text.
    pub fn render(&self, values: &[(&str, &str)]) -> String {
        values
            .iter()
            .fold(self.request.clone(), |acc, (k, v)| acc.replace(&format!("{{{k}}}"), v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub cluster: PromptTemplate,
    pub judge: PromptTemplate,
    pub navigate: PromptTemplate,
}

const CLUSTER: &str = include_str!("../../prompts/cluster.txt");
const JUDGE: &str = include_str!("../../prompts/judge.txt");
const NAVIGATE: &str = include_str!("../../prompts/navigate.txt");

impl PromptSet {
    /// The templates shipped in `prompts/`.
    pub fn builtin() -> Self {
        Self {
            cluster: PromptTemplate::parse(CLUSTER).expect("bundled cluster prompt"),
            judge: PromptTemplate::parse(JUDGE).expect("bundled judge prompt"),
            navigate: PromptTemplate::parse(NAVIGATE).expect("bundled navigate prompt"),
        }
    }

    /// Loads `cluster.txt`, `judge.txt` and `navigate.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, LlmError> {
        let load = |name: &str| -> Result<PromptTemplate, LlmError> {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LlmError::Template(format!("{}: {e}", path.display())))?;
            PromptTemplate::parse(&text)
        };
        Ok(Self {
            cluster: load("cluster.txt")?,
            judge: load("judge.txt")?,
            navigate: load("navigate.txt")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_parse() {
        let set = PromptSet::builtin();
        for t in [&set.cluster, &set.judge, &set.navigate] {
            assert_eq!(t.priming[0].role, Role::System);
            assert!(t.priming.len() >= 3);
        }
        assert!(set.navigate.request.contains("{names}"));
        assert!(set.navigate.request.contains("{query}"));
        assert!(set.judge.request.contains("{name}"));
        assert!(set.cluster.request.contains("{members}"));
    }

    #[test]
    fn render_fills_slots() {
        let t = PromptTemplate::parse("### system\nmission\n### request\nlist [[{names}]] q: {query}\n").unwrap();
        assert_eq!(t.render(&[("names", "KFC GUCCI"), ("query", "food?")]), "list [[KFC GUCCI]] q: food?");
    }

    #[test]
    fn rejects_malformed_templates() {
        assert!(PromptTemplate::parse("### user\nhi\n### request\nx").is_err());
        assert!(PromptTemplate::parse("### system\nmission\n").is_err());
        assert!(PromptTemplate::parse("stray\n### system\nm\n### request\nx").is_err());
        assert!(PromptTemplate::parse("### system\nm\n### tool\nx\n### request\nx").is_err());
        assert!(PromptTemplate::parse("### system\n\n### request\nx").is_err());
    }
}
