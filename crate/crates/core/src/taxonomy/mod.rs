//! Expert-defined classification dimensions, their prompt templates and
//! response grammars.

mod builtin;
mod parse;
mod prompt;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::LabelSet;

pub use builtin::{builtin_prompt, builtin_prompts, builtin_taxonomy};
pub use parse::{format_response, parse_response, ParseFailure};
pub use prompt::{render_prompt, LabelLevel, OutputGrammar, PromptError, PromptSpec};

pub const YES: &str = "Yes";
pub const NO: &str = "No";

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid taxonomy JSON: {0}")]
    Json(String),
    #[error("duplicate dimension id {0}")]
    DuplicateDimension(u32),
    #[error("more than one dimension is marked as the gate")]
    MultipleGates,
    #[error("dimension {dim}: duplicate category id `{cat}`")]
    DuplicateCategory { dim: u32, cat: String },
    #[error("dimension {0}: binary dimensions must have exactly the categories Yes and No")]
    BinaryOutcomes(u32),
    #[error("dimension {0}: multi-label dimensions need at least two categories")]
    TooFewCategories(u32),
    #[error("dimension {dim}: default category `{cat}` is not declared")]
    UnknownDefault { dim: u32, cat: String },
    #[error("dimension {dim}: subclass `{sub}` is not declared")]
    UnknownSubclass { dim: u32, sub: String },
    #[error("dimension {dim}: subclass `{sub}` maps to undeclared class `{class}`")]
    UnknownClass { dim: u32, sub: String, class: String },
    #[error("dimension {dim}: declared subclass `{sub}` has no class mapping")]
    UnmappedSubclass { dim: u32, sub: String },
    #[error("dimension {0} has no subclass map")]
    NoSubclassMap(u32),
    #[error("unknown dimension {0}")]
    UnknownDimension(u32),
    #[error("dimension {dim}: unknown category `{cat}`")]
    UnknownCategory { dim: u32, cat: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionKind {
    Binary,
    MultiLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub cat_id: String,
    pub display_name: String,
}

impl Category {
    pub fn new(cat_id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Category {
            cat_id: cat_id.into(),
            display_name: display_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub dim_id: u32,
    pub name: String,
    pub kind: DimensionKind,
    /// The screening dimension whose positive records the others apply to.
    #[serde(default)]
    pub gate: bool,
    pub categories: Vec<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_category: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subclasses: Vec<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subclass_map: Option<BTreeMap<String, String>>,
}

impl Dimension {
    pub fn binary(dim_id: u32, name: impl Into<String>) -> Self {
        Dimension {
            dim_id,
            name: name.into(),
            kind: DimensionKind::Binary,
            gate: false,
            categories: vec![Category::new(YES, YES), Category::new(NO, NO)],
            default_category: None,
            subclasses: Vec::new(),
            subclass_map: None,
        }
    }

    pub fn multi_label<I, S>(dim_id: u32, name: impl Into<String>, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Dimension {
            dim_id,
            name: name.into(),
            kind: DimensionKind::MultiLabel,
            gate: false,
            categories: categories
                .into_iter()
                .map(|c| {
                    let c = c.into();
                    Category::new(c.clone(), c)
                })
                .collect(),
            default_category: None,
            subclasses: Vec::new(),
            subclass_map: None,
        }
    }

    pub fn with_default(mut self, cat: impl Into<String>) -> Self {
        self.default_category = Some(cat.into());
        self
    }

    pub fn is_binary(&self) -> bool {
        self.kind == DimensionKind::Binary
    }

    pub fn has_category(&self, cat_id: &str) -> bool {
        self.categories.iter().any(|c| c.cat_id == cat_id)
    }

    pub fn category(&self, cat_id: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.cat_id == cat_id)
    }

    pub fn category_ids(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.cat_id.as_str())
    }

    /// Declared subclasses; when only a map is given its keys are the
    /// declaration.
    pub fn declared_subclasses(&self) -> Vec<Category> {
        if !self.subclasses.is_empty() {
            return self.subclasses.clone();
        }
        self.subclass_map
            .as_ref()
            .map(|m| m.keys().map(|k| Category::new(k.clone(), k.clone())).collect())
            .unwrap_or_default()
    }

    /// A multi-label view whose categories are this dimension's subclasses,
    /// used to parse subclass-level responses.
    pub fn subclass_dimension(&self) -> Result<Dimension, TaxonomyError> {
        if self.subclass_map.is_none() {
            return Err(TaxonomyError::NoSubclassMap(self.dim_id));
        }
        Ok(Dimension {
            dim_id: self.dim_id,
            name: format!("{} (subclasses)", self.name),
            kind: DimensionKind::MultiLabel,
            gate: false,
            categories: self.declared_subclasses(),
            default_category: None,
            subclasses: Vec::new(),
            subclass_map: None,
        })
    }

    /// Checks that every label is a declared category, and that binary
    /// dimensions get exactly one of Yes/No.
    pub fn validate_labels(&self, labels: &LabelSet) -> Result<(), TaxonomyError> {
        if let Some(bad) = labels.iter().find(|l| !self.has_category(l)) {
            return Err(TaxonomyError::UnknownCategory {
                dim: self.dim_id,
                cat: bad.to_owned(),
            });
        }
        if self.is_binary() && labels.len() != 1 {
            return Err(TaxonomyError::BinaryOutcomes(self.dim_id));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), TaxonomyError> {
        let dim = self.dim_id;
        let mut seen = HashSet::new();
        for c in &self.categories {
            if !seen.insert(c.cat_id.as_str()) {
                return Err(TaxonomyError::DuplicateCategory {
                    dim,
                    cat: c.cat_id.clone(),
                });
            }
        }
        match self.kind {
            DimensionKind::Binary => {
                let ids: BTreeSet<&str> = self.category_ids().collect();
                if self.categories.len() != 2 || ids != BTreeSet::from([YES, NO]) {
                    return Err(TaxonomyError::BinaryOutcomes(dim));
                }
            }
            DimensionKind::MultiLabel => {
                if self.categories.len() < 2 {
                    return Err(TaxonomyError::TooFewCategories(dim));
                }
            }
        }
        if let Some(d) = &self.default_category {
            if !self.has_category(d) {
                return Err(TaxonomyError::UnknownDefault {
                    dim,
                    cat: d.clone(),
                });
            }
        }
        let mut sub_seen = HashSet::new();
        for s in &self.subclasses {
            if !sub_seen.insert(s.cat_id.as_str()) {
                return Err(TaxonomyError::DuplicateCategory {
                    dim,
                    cat: s.cat_id.clone(),
                });
            }
        }
        if let Some(map) = &self.subclass_map {
            let declared: BTreeSet<String> = self
                .declared_subclasses()
                .into_iter()
                .map(|c| c.cat_id)
                .collect();
            for (sub, class) in map {
                if !declared.contains(sub) {
                    return Err(TaxonomyError::UnknownSubclass {
                        dim,
                        sub: sub.clone(),
                    });
                }
                if !self.has_category(class) {
                    return Err(TaxonomyError::UnknownClass {
                        dim,
                        sub: sub.clone(),
                        class: class.clone(),
                    });
                }
            }
            if let Some(missing) = declared.iter().find(|s| !map.contains_key(*s)) {
                return Err(TaxonomyError::UnmappedSubclass {
                    dim,
                    sub: missing.clone(),
                });
            }
        } else if !self.subclasses.is_empty() {
            return Err(TaxonomyError::UnmappedSubclass {
                dim,
                sub: self.subclasses[0].cat_id.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub dimensions: Vec<Dimension>,
}

impl Taxonomy {
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self, TaxonomyError> {
        let t = Taxonomy { dimensions };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TaxonomyError> {
        let mut ids = HashSet::new();
        for d in &self.dimensions {
            if !ids.insert(d.dim_id) {
                return Err(TaxonomyError::DuplicateDimension(d.dim_id));
            }
            d.validate()?;
        }
        if self.dimensions.iter().filter(|d| d.gate).count() > 1 {
            return Err(TaxonomyError::MultipleGates);
        }
        Ok(())
    }

    pub fn dimension(&self, dim_id: u32) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.dim_id == dim_id)
    }

    pub fn require(&self, dim_id: u32) -> Result<&Dimension, TaxonomyError> {
        self.dimension(dim_id)
            .ok_or(TaxonomyError::UnknownDimension(dim_id))
    }

    /// The label space a response to `spec` is parsed against: the
    /// dimension itself, or its subclass view for subclass-level prompts.
    pub fn response_dimension(&self, spec: &PromptSpec) -> Result<Dimension, TaxonomyError> {
        let dim = self.require(spec.dim_id)?;
        match spec.level {
            LabelLevel::Class => Ok(dim.clone()),
            LabelLevel::Subclass => dim.subclass_dimension(),
        }
    }

    pub fn gate(&self) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.gate)
    }

    pub fn from_json_str(text: &str) -> Result<Self, TaxonomyError> {
        let t: Taxonomy =
            serde_json::from_str(text).map_err(|e| TaxonomyError::Json(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }
}

pub fn load_taxonomy(config_file: &Path) -> Result<Taxonomy, TaxonomyError> {
    let text = fs::read_to_string(config_file).map_err(|e| TaxonomyError::Io {
        path: config_file.display().to_string(),
        message: e.to_string(),
    })?;
    Taxonomy::from_json_str(&text)
}

/// Maps subclass labels upward; duplicates collapse.
pub fn subclass_to_class(dim: &Dimension, subclasses: &LabelSet) -> Result<LabelSet, TaxonomyError> {
    let map = dim
        .subclass_map
        .as_ref()
        .ok_or(TaxonomyError::NoSubclassMap(dim.dim_id))?;
    subclasses
        .iter()
        .map(|s| {
            map.get(s).cloned().ok_or_else(|| TaxonomyError::UnknownSubclass {
                dim: dim.dim_id,
                sub: s.to_owned(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels;

    #[test]
    fn builtin_has_four_dimensions() {
        let t = builtin_taxonomy();
        t.validate().unwrap();
        assert_eq!(t.dimensions.len(), 4);
        let dim2 = t.dimension(2).unwrap();
        assert_eq!(dim2.categories.len(), 7);
        assert!(dim2.has_category("Not Specified"));
        assert_eq!(t.gate().unwrap().dim_id, 1);
        let dim4 = t.dimension(4).unwrap();
        assert_eq!(dim4.categories.len(), 8);
        assert_eq!(dim4.declared_subclasses().len(), 34);
    }

    #[test]
    fn builtin_round_trips_through_json() {
        let t = builtin_taxonomy();
        let text = serde_json::to_string_pretty(&t).unwrap();
        assert_eq!(Taxonomy::from_json_str(&text).unwrap(), t);
    }

    #[test]
    fn subclass_to_undeclared_class_rejected() {
        let mut d = Dimension::multi_label(4, "Models", ["1", "2"]);
        d.subclasses = vec![Category::new("1.1", "a"), Category::new("9.1", "b")];
        d.subclass_map = Some(BTreeMap::from([
            ("1.1".into(), "1".into()),
            ("9.1".into(), "9".into()),
        ]));
        let err = Taxonomy::new(vec![d]).unwrap_err();
        assert!(matches!(err, TaxonomyError::UnknownClass { ref class, .. } if class == "9"));
    }

    #[test]
    fn map_key_outside_declared_subclasses_rejected() {
        let mut d = Dimension::multi_label(4, "Models", ["1", "2"]);
        d.subclasses = vec![Category::new("1.1", "a")];
        d.subclass_map = Some(BTreeMap::from([
            ("1.1".into(), "1".into()),
            ("2.7".into(), "2".into()),
        ]));
        assert!(matches!(
            d.validate().unwrap_err(),
            TaxonomyError::UnknownSubclass { .. }
        ));
    }

    #[test]
    fn duplicate_category_rejected() {
        let d = Dimension::multi_label(2, "Assets", ["Stocks", "Stocks"]);
        assert!(matches!(
            d.validate().unwrap_err(),
            TaxonomyError::DuplicateCategory { .. }
        ));
    }

    #[test]
    fn single_binary_dimension_is_valid() {
        let json = r#"{"dimensions":[{"dim_id":1,"name":"Relevant","kind":"binary","gate":true,
            "categories":[{"cat_id":"Yes","display_name":"Yes"},{"cat_id":"No","display_name":"No"}]}]}"#;
        let t = Taxonomy::from_json_str(json).unwrap();
        assert_eq!(t.dimensions.len(), 1);
    }

    #[test]
    fn binary_with_extra_outcome_rejected() {
        let mut d = Dimension::binary(1, "x");
        d.categories.push(Category::new("Maybe", "Maybe"));
        assert!(matches!(d.validate(), Err(TaxonomyError::BinaryOutcomes(1))));
    }

    #[test]
    fn subclass_mapping_examples() {
        let t = builtin_taxonomy();
        let dim4 = t.dimension(4).unwrap();
        assert_eq!(
            subclass_to_class(dim4, &labels!["6.1", "6.3", "2.2"]).unwrap(),
            labels!["6", "2"]
        );
        assert_eq!(subclass_to_class(dim4, &labels![]).unwrap(), labels![]);
        assert_eq!(subclass_to_class(dim4, &labels!["8.3"]).unwrap(), labels!["8"]);
        assert!(subclass_to_class(dim4, &labels!["1.10"]).is_err());
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tax.json");
        fs::write(&p, serde_json::to_string(&builtin_taxonomy()).unwrap()).unwrap();
        assert_eq!(load_taxonomy(&p).unwrap(), builtin_taxonomy());
    }
}
