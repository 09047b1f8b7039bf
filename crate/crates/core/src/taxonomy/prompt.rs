use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ABSTRACT_PLACEHOLDER: &str = "{ABSTRACT}";
/// Optional marker expanded to the constraint lines, one `- ` bullet each.
pub const CONSTRAINTS_PLACEHOLDER: &str = "{CONSTRAINTS}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputGrammar {
    /// A bare `Yes` or `No`.
    YesNo,
    /// `{Key: yes, Key: no, ...}` with one key per non-default category.
    KeyedYesNoDict,
    /// `[index; index]` over category (or subclass) ids.
    BracketedIndexList,
}

/// Whether a prompt asks for class ids or for subclass ids that are mapped
/// upward afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelLevel {
    #[default]
    Class,
    Subclass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub prompt_id: String,
    pub dim_id: u32,
    #[serde(default)]
    pub level: LabelLevel,
    pub template_text: String,
    #[serde(default)]
    pub constraints: Vec<String>,
    pub output_grammar: OutputGrammar,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt template is empty")]
    EmptyTemplate,
    #[error("abstract is empty")]
    EmptyAbstract,
    #[error("template must contain exactly one {{ABSTRACT}} placeholder, found {0}")]
    PlaceholderCount(usize),
    #[error("template has constraints but {0}")]
    ConstraintMarker(&'static str),
    #[error("placeholder `{0}` left unsubstituted")]
    Unsubstituted(String),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

impl PromptSpec {
    /// Reads a template from `<dir>/<prompt_id>.txt`.
    pub fn load(
        dir: &Path,
        prompt_id: &str,
        dim_id: u32,
        level: LabelLevel,
        output_grammar: OutputGrammar,
    ) -> Result<Self, PromptError> {
        let path = dir.join(format!("{prompt_id}.txt"));
        let template_text = fs::read_to_string(&path).map_err(|e| PromptError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(PromptSpec {
            prompt_id: prompt_id.to_owned(),
            dim_id,
            level,
            template_text,
            constraints: Vec::new(),
            output_grammar,
        })
    }

    /// The template with constraints expanded but the abstract still
    /// unsubstituted.
    pub fn expanded_template(&self) -> Result<String, PromptError> {
        if self.template_text.trim().is_empty() {
            return Err(PromptError::EmptyTemplate);
        }
        let n = self.template_text.matches(ABSTRACT_PLACEHOLDER).count();
        if n != 1 {
            return Err(PromptError::PlaceholderCount(n));
        }
        let markers = self.template_text.matches(CONSTRAINTS_PLACEHOLDER).count();
        match (markers, self.constraints.is_empty()) {
            (0, true) => Ok(self.template_text.clone()),
            (0, false) => Err(PromptError::ConstraintMarker("no {CONSTRAINTS} marker")),
            (1, _) => {
                let block = self
                    .constraints
                    .iter()
                    .map(|c| format!("- {c}"))
                    .collect::<Vec<_>>()
                    .join("\n");
                Ok(self.template_text.replacen(CONSTRAINTS_PLACEHOLDER, &block, 1))
            }
            _ => Err(PromptError::ConstraintMarker("several {CONSTRAINTS} markers")),
        }
    }
}

pub fn render_prompt(spec: &PromptSpec, abstract_text: &str) -> Result<String, PromptError> {
    if abstract_text.trim().is_empty() {
        return Err(PromptError::EmptyAbstract);
    }
    let template = spec.expanded_template()?;
    let (head, tail) = template
        .split_once(ABSTRACT_PLACEHOLDER)
        .ok_or_else(|| PromptError::Unsubstituted(ABSTRACT_PLACEHOLDER.into()))?;
    if head.contains(CONSTRAINTS_PLACEHOLDER) || tail.contains(CONSTRAINTS_PLACEHOLDER) {
        return Err(PromptError::Unsubstituted(CONSTRAINTS_PLACEHOLDER.into()));
    }
    let mut out = String::with_capacity(template.len() + abstract_text.len());
    out.push_str(head);
    out.push_str(abstract_text);
    out.push_str(tail);
    Ok(out)
}
