use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Dimension, OutputGrammar, NO, YES};
use crate::LabelSet;

/// A response that matched none of the grammar's rules.
#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("cannot parse response ({reason}): {raw:?}")]
pub struct ParseFailure {
    pub raw: String,
    pub reason: String,
}

impl ParseFailure {
    fn new(raw: &str, reason: impl Into<String>) -> Self {
        ParseFailure {
            raw: raw.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Extracts a label set from a model response.
///
/// Matching is case-insensitive and tolerant of surrounding prose; the first
/// substring that satisfies the grammar wins. Anything ambiguous, incomplete
/// or naming an unknown category is a [`ParseFailure`], never a guess.
pub fn parse_response(
    dim: &Dimension,
    grammar: OutputGrammar,
    raw: &str,
) -> Result<LabelSet, ParseFailure> {
    match grammar {
        OutputGrammar::YesNo => parse_yes_no(raw),
        OutputGrammar::KeyedYesNoDict => parse_keyed_dict(dim, raw),
        OutputGrammar::BracketedIndexList => parse_index_list(dim, raw),
    }
}

fn words(raw: &str) -> impl Iterator<Item = String> + '_ {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

fn parse_yes_no(raw: &str) -> Result<LabelSet, ParseFailure> {
    let found: BTreeSet<&'static str> = words(raw)
        .filter_map(|w| match w.as_str() {
            "yes" => Some(YES),
            "no" => Some(NO),
            _ => None,
        })
        .collect();
    match found.len() {
        1 => Ok(LabelSet::single(*found.iter().next().expect("one element"))),
        0 => Err(ParseFailure::new(raw, "no Yes/No answer")),
        _ => Err(ParseFailure::new(raw, "both Yes and No present")),
    }
}

/// Non-nested `open ... close` spans in order of appearance.
fn delimited(raw: &str, open: char, close: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = raw;
    while let Some(start) = rest.find(open) {
        let after = &rest[start + open.len_utf8()..];
        match after.find(close) {
            Some(end) => {
                let inner = &after[..end];
                // an inner opener means the real span starts later
                match inner.rfind(open) {
                    Some(i) => out.push(&inner[i + open.len_utf8()..]),
                    None => out.push(inner),
                }
                rest = &after[end + close.len_utf8()..];
            }
            None => break,
        }
    }
    out
}

fn clean(token: &str) -> String {
    token
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '`' || c == '*')
        .trim()
        .trim_end_matches('.')
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn parse_keyed_dict(dim: &Dimension, raw: &str) -> Result<LabelSet, ParseFailure> {
    let questions: Vec<_> = dim
        .categories
        .iter()
        .filter(|c| Some(&c.cat_id) != dim.default_category.as_ref())
        .collect();
    let mut first_err = None;
    for body in delimited(raw, '{', '}') {
        match parse_dict_body(dim, &questions, body) {
            Ok(labels) => return Ok(labels),
            Err(reason) => {
                first_err.get_or_insert(reason);
            }
        }
    }
    Err(ParseFailure::new(
        raw,
        first_err.unwrap_or_else(|| "no {key: yes/no} block".into()),
    ))
}

fn parse_dict_body(
    dim: &Dimension,
    questions: &[&super::Category],
    body: &str,
) -> Result<LabelSet, String> {
    let mut answered: Vec<Option<bool>> = vec![None; questions.len()];
    for entry in body.split([',', ';', '\n']) {
        if entry.trim().is_empty() {
            continue;
        }
        let (key, value) = entry
            .split_once(':')
            .or_else(|| entry.split_once('='))
            .ok_or_else(|| format!("entry `{}` has no key", entry.trim()))?;
        let key = clean(key);
        let idx = questions
            .iter()
            .position(|c| clean(&c.cat_id) == key || clean(&c.display_name) == key)
            .ok_or_else(|| format!("unknown key `{key}`"))?;
        let v = match clean(value).as_str() {
            "yes" => true,
            "no" => false,
            other => return Err(format!("value `{other}` for `{key}` is not yes/no")),
        };
        if answered[idx].replace(v).is_some() {
            return Err(format!("key `{key}` answered twice"));
        }
    }
    if let Some(i) = answered.iter().position(Option::is_none) {
        return Err(format!("no answer for `{}`", questions[i].cat_id));
    }
    let labels: LabelSet = questions
        .iter()
        .zip(&answered)
        .filter(|(_, a)| **a == Some(true))
        .map(|(c, _)| c.cat_id.clone())
        .collect();
    if labels.is_empty() {
        if let Some(d) = &dim.default_category {
            return Ok(LabelSet::single(d.clone()));
        }
    }
    Ok(labels)
}

fn looks_like_index(token: &str) -> bool {
    token
        .split('.')
        .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
}

fn parse_index_list(dim: &Dimension, raw: &str) -> Result<LabelSet, ParseFailure> {
    for body in delimited(raw, '[', ']') {
        let tokens: Vec<String> = body
            .split([';', ','])
            .map(|t| {
                t.trim()
                    .trim_matches(|c: char| c == '"' || c == '\'')
                    .trim()
                    .to_owned()
            })
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() || !tokens.iter().all(|t| looks_like_index(t)) {
            continue;
        }
        if let Some(bad) = tokens.iter().find(|t| !dim.has_category(t)) {
            return Err(ParseFailure::new(raw, format!("unknown index `{bad}`")));
        }
        return Ok(tokens.into_iter().collect());
    }
    Err(ParseFailure::new(raw, "no [index; index] list"))
}

/// The canonical well-formed response carrying `labels`, as a model
/// following the prompt would write it. The inverse of [`parse_response`].
pub fn format_response(dim: &Dimension, grammar: OutputGrammar, labels: &LabelSet) -> String {
    match grammar {
        OutputGrammar::YesNo => labels.iter().next().unwrap_or(NO).to_owned(),
        OutputGrammar::KeyedYesNoDict => {
            let body: Vec<String> = dim
                .categories
                .iter()
                .filter(|c| Some(&c.cat_id) != dim.default_category.as_ref())
                .map(|c| {
                    let answer = if labels.contains(&c.cat_id) { "yes" } else { "no" };
                    format!("{}: {answer}", c.cat_id)
                })
                .collect();
            format!("{{{}}}", body.join(", "))
        }
        OutputGrammar::BracketedIndexList => {
            format!("[{}]", labels.iter().collect::<Vec<_>>().join("; "))
        }
    }
}
