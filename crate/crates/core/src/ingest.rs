//! Bibliographic record ingestion, validity filtering and citation resolution.
//!
//! Records arrive either as a comma-separated export with the header
//! `record_id,title,authors,year,source_title,doc_type,abstract,doi,references`
//! (authors and references `|`-separated inside their cells) or as JSON lines
//! carrying the same field names. Empty CSV cells for optional fields become
//! absent values, never empty strings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{SystemTime, UNIX_EPOCH};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CSV_COLUMNS: [&str; 9] = [
    "record_id",
    "title",
    "authors",
    "year",
    "source_title",
    "doc_type",
    "abstract",
    "doi",
    "references",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing required column `{0}` in header")]
    MissingColumn(String),
    #[error("line {line}, column `{column}`: {message}")]
    Malformed {
        line: u64,
        column: String,
        message: String,
    },
    #[error("duplicate record_id `{id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: u64,
        second_line: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Csv,
    JsonLines,
}

impl InputFormat {
    /// Guess from a file extension; anything but `.jsonl`/`.ndjson` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => InputFormat::JsonLines,
            _ => InputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    ConferencePaper,
    Review,
    #[default]
    Other,
}

impl DocType {
    /// Lenient parse accepting both `conference_paper` and export spellings
    /// such as `Conference Paper`.
    pub fn parse(s: &str) -> Self {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        match norm.as_str() {
            "article" | "ar" => DocType::Article,
            "conference_paper" | "cp" => DocType::ConferencePaper,
            "review" | "re" => DocType::Review,
            _ => DocType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::ConferencePaper => "conference_paper",
            DocType::Review => "review",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One bibliographic entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub record_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_title: Option<String>,
    #[serde(default)]
    pub doc_type: DocType,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default)]
    pub references: Vec<String>,
}

impl BibRecord {
    pub fn new(record_id: impl Into<String>, title: impl Into<String>) -> Self {
        BibRecord {
            record_id: record_id.into(),
            title: title.into(),
            authors: Vec::new(),
            year: None,
            source_title: None,
            doc_type: DocType::Article,
            abstract_text: None,
            doi: None,
            references: Vec::new(),
        }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn with_abstract(mut self, text: impl Into<String>) -> Self {
        self.abstract_text = Some(text.into());
        self
    }

    pub fn with_references<I, S>(mut self, refs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.references = refs.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_doi(mut self, doi: impl Into<String>) -> Self {
        self.doi = Some(doi.into());
        self
    }

    /// The abstract if present and not blank.
    pub fn abstract_str(&self) -> Option<&str> {
        self.abstract_text
            .as_deref()
            .filter(|a| !a.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub format: InputFormat,
    pub ingested_at_unix: u64,
}

impl Provenance {
    pub fn now(source: impl Into<String>, format: InputFormat) -> Self {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Provenance {
            source: source.into(),
            format,
            ingested_at_unix: secs,
        }
    }
}

/// An ordered, duplicate-free collection of records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<BibRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids. Line numbers in the error
    /// are 1-based record positions.
    pub fn from_records(
        records: Vec<BibRecord>,
        provenance: Provenance,
    ) -> Result<Self, IngestError> {
        let mut seen: HashMap<&str, u64> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            let line = i as u64 + 1;
            if let Some(first) = seen.insert(&r.record_id, line) {
                return Err(IngestError::DuplicateId {
                    id: r.record_id.clone(),
                    first_line: first,
                    second_line: line,
                });
            }
        }
        Ok(Corpus {
            records,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&BibRecord> {
        self.records.iter().find(|r| r.record_id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.record_id.as_str())
    }

    /// One JSON object per line, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn parse_records(path: &Path, format: InputFormat) -> Result<Corpus, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let source = path.display().to_string();
    match format {
        InputFormat::Csv => parse_csv_str(&text, &source),
        InputFormat::JsonLines => parse_json_lines_str(&text, &source),
    }
}

fn split_list(cell: &str) -> Vec<String> {
    cell.split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn optional(cell: &str) -> Option<String> {
    if cell.trim().is_empty() {
        None
    } else {
        Some(cell.to_owned())
    }
}

pub fn parse_csv_str(text: &str, source: &str) -> Result<Corpus, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let malformed = |line: u64, column: &str, message: String| IngestError::Malformed {
        line,
        column: column.to_owned(),
        message,
    };

    let headers = reader
        .headers()
        .map_err(|e| malformed(1, "header", e.to_string()))?
        .clone();
    let mut index = HashMap::new();
    for col in CSV_COLUMNS {
        let pos = headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| IngestError::MissingColumn(col.to_owned()))?;
        index.insert(col, pos);
    }

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            malformed(line, "row", e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |col: &str| row.get(index[col]).unwrap_or("");

        let record_id = cell("record_id").trim().to_owned();
        if record_id.is_empty() {
            return Err(malformed(line, "record_id", "empty record_id".into()));
        }
        let year = match cell("year").trim() {
            "" => None,
            y => Some(y.parse::<i32>().map_err(|_| {
                malformed(line, "year", format!("`{y}` is not an integer year"))
            })?),
        };
        records.push(BibRecord {
            record_id,
            title: cell("title").to_owned(),
            authors: split_list(cell("authors")),
            year,
            source_title: optional(cell("source_title")),
            doc_type: DocType::parse(cell("doc_type")),
            abstract_text: optional(cell("abstract")),
            doi: optional(cell("doi")),
            references: split_list(cell("references")),
        });
        lines.push(line);
    }
    check_unique(&records, &lines)?;
    Ok(Corpus {
        records,
        provenance: Provenance::now(source, InputFormat::Csv),
    })
}

pub fn parse_json_lines_str(text: &str, source: &str) -> Result<Corpus, IngestError> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: BibRecord = serde_json::from_str(raw).map_err(|e| {
            let msg = e.to_string();
            // serde_json names the offending field in most messages
            let column = field_from_serde_message(&msg).unwrap_or_else(|| "object".into());
            IngestError::Malformed {
                line,
                column,
                message: msg,
            }
        })?;
        if rec.record_id.trim().is_empty() {
            return Err(IngestError::Malformed {
                line,
                column: "record_id".into(),
                message: "empty record_id".into(),
            });
        }
        records.push(rec);
        lines.push(line);
    }
    check_unique(&records, &lines)?;
    Ok(Corpus {
        records,
        provenance: Provenance::now(source, InputFormat::JsonLines),
    })
}

fn field_from_serde_message(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    let field = &msg[start..end];
    CSV_COLUMNS.contains(&field).then(|| field.to_owned())
}

fn check_unique(records: &[BibRecord], lines: &[u64]) -> Result<(), IngestError> {
    let mut seen: HashMap<&str, u64> = HashMap::new();
    for (r, &line) in records.iter().zip(lines) {
        if let Some(first) = seen.insert(&r.record_id, line) {
            return Err(IngestError::DuplicateId {
                id: r.record_id.clone(),
                first_line: first,
                second_line: line,
            });
        }
    }
    Ok(())
}

/// Removal counts by reason. A record failing several checks is counted
/// once, under the first failing check in the order abstract, title, year.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub retained: usize,
    pub missing_abstract: usize,
    pub missing_title: usize,
    pub missing_year: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.input - self.retained
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    MissingAbstract,
    MissingTitle,
    MissingYear,
}

pub fn validity(record: &BibRecord) -> Result<(), RejectReason> {
    if record.abstract_str().is_none() {
        Err(RejectReason::MissingAbstract)
    } else if record.title.trim().is_empty() {
        Err(RejectReason::MissingTitle)
    } else if record.year.is_none() {
        Err(RejectReason::MissingYear)
    } else {
        Ok(())
    }
}

pub fn filter_valid(corpus: Corpus) -> (Corpus, FilterReport) {
    let mut report = FilterReport {
        input: corpus.records.len(),
        ..Default::default()
    };
    let records: Vec<BibRecord> = corpus
        .records
        .into_iter()
        .filter(|r| match validity(r) {
            Ok(()) => true,
            Err(reason) => {
                match reason {
                    RejectReason::MissingAbstract => report.missing_abstract += 1,
                    RejectReason::MissingTitle => report.missing_title += 1,
                    RejectReason::MissingYear => report.missing_year += 1,
                }
                false
            }
        })
        .collect();
    report.retained = records.len();
    (
        Corpus {
            records,
            provenance: corpus.provenance,
        },
        report,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationEdge {
    pub citing: String,
    pub cited: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatcherConfig {
    /// Match on DOI before falling back to titles.
    pub match_doi: bool,
    /// Titles shorter than this many tokens never match; single-word titles
    /// such as "Editorial" would otherwise hit almost every reference.
    pub min_title_tokens: usize,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            match_doi: true,
            min_title_tokens: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub references_total: usize,
    pub matched_doi: usize,
    pub matched_title: usize,
    pub unmatched: usize,
    pub ambiguous: usize,
    pub self_citations: usize,
    pub duplicate_edges: usize,
    pub records_with_references: usize,
    pub edges: usize,
}

/// Lowercase, ASCII-fold, turn punctuation into spaces and collapse
/// whitespace runs.
pub fn normalize_title(s: &str) -> String {
    title_tokens(s).join(" ")
}

fn title_tokens(s: &str) -> Vec<String> {
    let folded = deunicode::deunicode(s).to_lowercase();
    folded
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn normalize_doi(s: &str) -> String {
    let lower = s.trim().to_lowercase();
    let stripped = ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "doi:"]
        .iter()
        .find_map(|p| lower.strip_prefix(p))
        .unwrap_or(&lower);
    stripped
        .trim()
        .trim_end_matches(['.', ')', ']', ',', ';'])
        .to_owned()
}

fn doi_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)10\.\d{4,9}/[^\s,;]+").expect("valid regex"))
}

fn reference_segments(reference: &str) -> Vec<Vec<String>> {
    reference
        .split([',', '.', ';', ':', '(', ')', '"', '[', ']'])
        .map(title_tokens)
        .filter(|t| !t.is_empty())
        .collect()
}

enum Match<'a> {
    Unique(&'a str),
    Ambiguous,
    None,
}

struct TitleIndex<'a> {
    by_title: HashMap<String, Vec<&'a str>>,
    max_tokens: usize,
}

impl<'a> TitleIndex<'a> {
    fn build(corpus: &'a Corpus, min_tokens: usize) -> Self {
        let mut by_title: HashMap<String, Vec<&'a str>> = HashMap::new();
        let mut max_tokens = 0;
        for r in &corpus.records {
            let toks = title_tokens(&r.title);
            if toks.len() < min_tokens.max(1) {
                continue;
            }
            max_tokens = max_tokens.max(toks.len());
            by_title.entry(toks.join(" ")).or_default().push(&r.record_id);
        }
        TitleIndex {
            by_title,
            max_tokens,
        }
    }

    /// Longest title equal to a run of whole comma/period-delimited segments.
    fn lookup(&self, reference: &str) -> Match<'a> {
        let segments = reference_segments(reference);
        let mut best: Option<(usize, &Vec<&'a str>)> = None;
        for start in 0..segments.len() {
            let mut joined: Vec<&str> = Vec::new();
            for seg in &segments[start..] {
                joined.extend(seg.iter().map(String::as_str));
                if joined.len() > self.max_tokens {
                    break;
                }
                if let Some(ids) = self.by_title.get(&joined.join(" ")) {
                    if best.is_none_or(|(len, _)| joined.len() > len) {
                        best = Some((joined.len(), ids));
                    }
                }
            }
        }
        match best {
            Some((_, ids)) if ids.len() == 1 => Match::Unique(ids[0]),
            Some(_) => Match::Ambiguous,
            None => Match::None,
        }
    }
}

/// Links raw reference strings to in-corpus records.
///
/// DOI equality is tried first when both sides carry one; otherwise the
/// normalized title of a record must equal a run of whole delimited segments
/// of the reference string. Each reference yields at most one edge.
pub fn resolve_references(
    corpus: &Corpus,
    config: &MatcherConfig,
) -> (Vec<CitationEdge>, ResolutionReport) {
    let titles = TitleIndex::build(corpus, config.min_title_tokens);
    let mut by_doi: HashMap<String, &str> = HashMap::new();
    let mut doi_of: HashMap<&str, String> = HashMap::new();
    if config.match_doi {
        for r in &corpus.records {
            if let Some(d) = r.doi.as_deref().map(normalize_doi).filter(|d| !d.is_empty()) {
                by_doi.insert(d.clone(), &r.record_id);
                doi_of.insert(&r.record_id, d);
            }
        }
    }

    let mut report = ResolutionReport::default();
    let mut edges: BTreeSet<CitationEdge> = BTreeSet::new();
    for record in &corpus.records {
        if !record.references.is_empty() {
            report.records_with_references += 1;
        }
        for reference in &record.references {
            report.references_total += 1;
            let ref_doi = if config.match_doi {
                doi_regex()
                    .find(reference)
                    .map(|m| normalize_doi(m.as_str()))
            } else {
                None
            };

            let mut target: Option<&str> = None;
            if let Some(d) = &ref_doi {
                if let Some(&id) = by_doi.get(d) {
                    target = Some(id);
                    if id != record.record_id {
                        report.matched_doi += 1;
                    }
                }
            }
            if target.is_none() {
                match titles.lookup(reference) {
                    Match::Unique(id) => {
                        // a DOI on both sides that disagrees vetoes the title match
                        let conflict = matches!(
                            (&ref_doi, doi_of.get(id)),
                            (Some(a), Some(b)) if a != b
                        );
                        if conflict {
                            report.unmatched += 1;
                            continue;
                        }
                        target = Some(id);
                        if id != record.record_id {
                            report.matched_title += 1;
                        }
                    }
                    Match::Ambiguous => {
                        report.ambiguous += 1;
                        continue;
                    }
                    Match::None => {
                        report.unmatched += 1;
                        continue;
                    }
                }
            }
            let cited = target.expect("set above");
            if cited == record.record_id {
                report.self_citations += 1;
                continue;
            }
            let edge = CitationEdge {
                citing: record.record_id.clone(),
                cited: cited.to_owned(),
            };
            if !edges.insert(edge) {
                report.duplicate_edges += 1;
            }
        }
    }
    report.edges = edges.len();
    (edges.into_iter().collect(), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "record_id,title,authors,year,source_title,doc_type,abstract,doi,references\n";

    fn csv(rows: &[&str]) -> String {
        let mut s = HEADER.to_owned();
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn three_row_csv() {
        let text = csv(&[
            "S1,Pricing options,Black F.|Scholes M.,1973,JPE,Article,An abstract,10.1086/260062,",
            "S2,Second,A,1990,J,Conference Paper,Another,,Black F. Pricing options (1973)",
            "S3,Third,B,2001,J,review,Third abstract,,x|y",
        ]);
        let c = parse_csv_str(&text, "mem").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.records[0].authors, vec!["Black F.", "Scholes M."]);
        assert_eq!(c.records[1].doc_type, DocType::ConferencePaper);
        assert_eq!(c.records[1].doi, None);
        assert_eq!(c.records[2].references, vec!["x", "y"]);
    }

    #[test]
    fn missing_abstract_is_absent_not_empty() {
        let c = parse_csv_str(&csv(&["S1,T,A,2000,J,article,,,"]), "mem").unwrap();
        assert_eq!(c.records[0].abstract_text, None);
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let err = parse_csv_str(
            &csv(&["S1,T,A,2000,J,article,x,,", "S1,U,A,2001,J,article,y,,"]),
            "mem",
        )
        .unwrap_err();
        match err {
            IngestError::DuplicateId {
                id,
                first_line,
                second_line,
            } => {
                assert_eq!(id, "S1");
                assert_eq!((first_line, second_line), (2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_year_names_line_and_column() {
        let err = parse_csv_str(&csv(&["S1,T,A,19x3,J,article,x,,"]), "mem").unwrap_err();
        match err {
            IngestError::Malformed { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "year");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_rejected() {
        let err = parse_csv_str("record_id,title\nS1,T\n", "mem").unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn(c) if c == "authors"));
    }

    #[test]
    fn json_lines_absent_fields() {
        let text = r#"{"record_id":"A","title":"T","year":2001,"abstract":"x"}
{"record_id":"B","title":"U","abstract":null}
"#;
        let c = parse_json_lines_str(text, "mem").unwrap();
        assert_eq!(c.records[1].abstract_text, None);
        assert_eq!(c.records[1].year, None);
        assert_eq!(c.records[0].year, Some(2001));
    }

    #[test]
    fn json_lines_bad_year_names_line() {
        let text = "{\"record_id\":\"A\",\"title\":\"T\"}\n{\"record_id\":\"B\",\"year\":\"soon\"}\n";
        match parse_json_lines_str(text, "mem").unwrap_err() {
            IngestError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn valid(id: &str) -> BibRecord {
        BibRecord::new(id, format!("Title {id}"))
            .with_year(2000)
            .with_abstract("text")
    }

    #[test]
    fn filter_counts_missing_abstracts() {
        let mut records: Vec<BibRecord> = (0..5).map(|i| valid(&format!("R{i}"))).collect();
        records[1].abstract_text = None;
        records[3].abstract_text = Some("   ".into());
        let corpus = Corpus::from_records(records, Provenance::now("t", InputFormat::Csv)).unwrap();
        let (kept, report) = filter_valid(corpus);
        assert_eq!(kept.len(), 3);
        assert_eq!(report.missing_abstract, 2);
        assert_eq!(report.removed(), 2);
    }

    #[test]
    fn filter_identity_on_valid_corpus() {
        let records: Vec<BibRecord> = (0..4).map(|i| valid(&format!("R{i}"))).collect();
        let corpus = Corpus::from_records(records, Provenance::now("t", InputFormat::Csv)).unwrap();
        let (kept, report) = filter_valid(corpus.clone());
        assert_eq!(kept, corpus);
        assert_eq!(report.removed(), 0);
    }

    fn corpus(records: Vec<BibRecord>) -> Corpus {
        Corpus::from_records(records, Provenance::now("t", InputFormat::Csv)).unwrap()
    }

    #[test]
    fn title_match_creates_edge() {
        let a = valid("A").with_references([
            "Black F., Scholes M., The Pricing of Options and Corporate Liabilities, (1973), Journal of Political Economy, 81, pp. 637-654",
        ]);
        let b = BibRecord::new("B", "The pricing of options and corporate liabilities")
            .with_year(1973)
            .with_abstract("x");
        let (edges, report) = resolve_references(&corpus(vec![a, b]), &MatcherConfig::default());
        assert_eq!(
            edges,
            vec![CitationEdge {
                citing: "A".into(),
                cited: "B".into()
            }]
        );
        assert_eq!(report.matched_title, 1);
    }

    #[test]
    fn longer_out_of_corpus_title_does_not_match_prefix() {
        let a = valid("A").with_references([
            "Smith J., Pricing American options with stochastic jumps, (2001), Risk",
        ]);
        let b = BibRecord::new("B", "Pricing American options")
            .with_year(1990)
            .with_abstract("x");
        let (edges, report) = resolve_references(&corpus(vec![a, b]), &MatcherConfig::default());
        assert!(edges.is_empty());
        assert_eq!(report.unmatched, 1);
    }

    #[test]
    fn out_of_corpus_reference_counts_unmatched() {
        let a = valid("A").with_references(["Nobody, A paper we do not hold, (1999)"]);
        let (edges, report) = resolve_references(&corpus(vec![a]), &MatcherConfig::default());
        assert!(edges.is_empty());
        assert_eq!(report.unmatched, 1);
    }

    #[test]
    fn self_reference_suppressed() {
        let mut a = valid("A");
        a.title = "A study of volatility smiles".into();
        a.references = vec!["A study of volatility smiles".into()];
        let (edges, report) = resolve_references(&corpus(vec![a]), &MatcherConfig::default());
        assert!(edges.is_empty());
        assert_eq!(report.self_citations, 1);
    }

    #[test]
    fn doi_match_and_dedup() {
        let a = valid("A").with_references([
            "Heston S., closed form, doi:10.1093/rfs/6.2.327.",
            "Heston S.L., A closed-form solution for options with stochastic volatility, (1993)",
        ]);
        let b = BibRecord::new(
            "B",
            "A closed-form solution for options with stochastic volatility",
        )
        .with_year(1993)
        .with_abstract("x")
        .with_doi("https://doi.org/10.1093/RFS/6.2.327");
        let (edges, report) = resolve_references(&corpus(vec![a, b]), &MatcherConfig::default());
        assert_eq!(edges.len(), 1);
        assert_eq!(report.matched_doi, 1);
        assert_eq!(report.duplicate_edges, 1);
    }

    #[test]
    fn ambiguous_titles_do_not_link() {
        let a = valid("A").with_references(["X, On option pricing models, (2000)"]);
        let b = BibRecord::new("B", "On option pricing models").with_year(1).with_abstract("x");
        let c = BibRecord::new("C", "On Option-Pricing Models").with_year(1).with_abstract("x");
        let (edges, report) = resolve_references(&corpus(vec![a, b, c]), &MatcherConfig::default());
        assert!(edges.is_empty());
        assert_eq!(report.ambiguous, 1);
    }

    #[test]
    fn normalization_folds_accents_and_punctuation() {
        assert_eq!(
            normalize_title("  Lévy   processes: A Survey!  "),
            "levy processes a survey"
        );
    }
}
