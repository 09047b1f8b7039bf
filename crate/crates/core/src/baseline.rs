//! Keyword text-mapping classifier used as a non-LLM comparator.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::Dimension;
use crate::LabelSet;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cannot read keyword table {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid keyword table JSON: {0}")]
    Json(String),
    #[error("keyword table is for dimension {table} but dimension {dim} was given")]
    WrongDimension { table: u32, dim: u32 },
    #[error("dimension {dim} has no category `{cat}`")]
    UnknownCategory { dim: u32, cat: String },
    #[error("category `{0}` has no usable keyword phrases")]
    EmptyPhrases(String),
}

/// Phrases per category. Phrases match case-insensitively on word
/// boundaries, without stemming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordTable {
    pub dim_id: u32,
    pub entries: BTreeMap<String, Vec<String>>,
}

impl KeywordTable {
    pub fn from_json_str(text: &str) -> Result<Self, BaselineError> {
        serde_json::from_str(text).map_err(|e| BaselineError::Json(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BaselineError> {
        let text = fs::read_to_string(path).map_err(|e| BaselineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self, dim: &Dimension) -> Result<(), BaselineError> {
        if dim.dim_id != self.dim_id {
            return Err(BaselineError::WrongDimension {
                table: self.dim_id,
                dim: dim.dim_id,
            });
        }
        for (cat, phrases) in &self.entries {
            if !dim.has_category(cat) {
                return Err(BaselineError::UnknownCategory {
                    dim: dim.dim_id,
                    cat: cat.clone(),
                });
            }
            if phrases.iter().all(|p| tokens(p).is_empty()) {
                return Err(BaselineError::EmptyPhrases(cat.clone()));
            }
        }
        Ok(())
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Labels whose phrases occur in the abstract, before the default rule.
pub fn keyword_hits(table: &KeywordTable, abstract_text: &str) -> LabelSet {
    let words = tokens(abstract_text);
    table
        .entries
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| contains_run(&words, &tokens(p))))
        .map(|(cat, _)| cat.clone())
        .collect()
}

/// Keyword hits, or the dimension's default category when nothing matched.
pub fn text_map_classify(dim: &Dimension, table: &KeywordTable, abstract_text: &str) -> LabelSet {
    let hits = keyword_hits(table, abstract_text);
    match (&dim.default_category, hits.is_empty()) {
        (Some(default), true) => LabelSet::single(default.clone()),
        _ => hits,
    }
}

fn table(dim_id: u32, entries: &[(&str, &[&str])]) -> KeywordTable {
    KeywordTable {
        dim_id,
        entries: entries
            .iter()
            .map(|(cat, phrases)| {
                (
                    (*cat).to_owned(),
                    phrases.iter().map(|p| (*p).to_owned()).collect(),
                )
            })
            .collect(),
    }
}

/// Asset names for the underlying-asset dimension.
pub fn default_dim2_table() -> KeywordTable {
    table(
        2,
        &[
            ("Stocks", &["stock", "stocks", "equity", "equities", "share price", "share prices"]),
            (
                "Indexes",
                &["index option", "index options", "stock index", "indices", "indexes", "s&p", "nikkei", "ftse", "vix"],
            ),
            (
                "Commodities",
                &["commodity", "commodities", "crude oil", "natural gas", "gold", "electricity", "agricultural"],
            ),
            (
                "Currencies",
                &["currency", "currencies", "foreign exchange", "exchange rate", "exchange rates", "fx"],
            ),
            (
                "Interest Rates",
                &["interest rate", "interest rates", "bond", "bonds", "swaption", "swaptions", "libor", "term structure", "yield curve"],
            ),
            (
                "Cryptocurrencies",
                &["cryptocurrency", "cryptocurrencies", "crypto", "bitcoin", "ethereum"],
            ),
        ],
    )
}

/// Option-type names for the option-type dimension. Asian, barrier and
/// basket contracts count as exotic.
pub fn default_dim3_table() -> KeywordTable {
    table(
        3,
        &[
            (
                "European",
                &["european option", "european options", "european style", "european call", "european calls", "european put", "european puts"],
            ),
            (
                "American",
                &["american option", "american options", "american style", "american call", "american calls", "american put", "american puts", "early exercise"],
            ),
            (
                "Exotic",
                &[
                    "exotic",
                    "asian option",
                    "asian options",
                    "barrier option",
                    "barrier options",
                    "basket option",
                    "basket options",
                    "lookback",
                    "binary option",
                    "binary options",
                    "digital option",
                    "digital options",
                    "bermudan",
                    "compound option",
                    "compound options",
                    "rainbow option",
                    "rainbow options",
                    "cliquet",
                    "quanto",
                ],
            ),
        ],
    )
}
