use std::collections::BTreeSet;
use std::io::Write;

use litreview_core::ingest::{
    filter_valid, parse_csv_str, parse_json_lines_str, parse_records, resolve_references,
    InputFormat, MatcherConfig, Provenance, CSV_COLUMNS,
};
use litreview_core::{BibRecord, Corpus};
use proptest::prelude::*;

const TOTAL: usize = 16_174;
const WITHOUT_ABSTRACT: usize = 3_508;

/// Scopus-shaped export where every 4th-to-5th row lacks an abstract,
/// alternating between an empty cell and a whitespace-only one.
fn synthetic_export() -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).unwrap();
    let mut missing = 0;
    for i in 0..TOTAL {
        let drop = missing < WITHOUT_ABSTRACT && i * WITHOUT_ABSTRACT / TOTAL >= missing;
        let abs = if drop {
            missing += 1;
            if i % 2 == 0 { String::new() } else { "   ".into() }
        } else {
            format!("We price option {i} under stochastic volatility, with \"quotes\", commas.")
        };
        let year = (1973 + i % 53).to_string();
        w.write_record([
            format!("S{i:05}").as_str(),
            &format!("Paper number {i}"),
            "Doe J.|Roe R.",
            &year,
            "Journal of Derivatives",
            "article",
            &abs,
            "",
            "Black F., Scholes M., The pricing of options and corporate liabilities, (1973)",
        ])
        .unwrap();
    }
    assert_eq!(missing, WITHOUT_ABSTRACT);
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[test]
fn full_corpus_filter_retains_12666() {
    let corpus = parse_csv_str(&synthetic_export(), "export.csv").unwrap();
    assert_eq!(corpus.len(), TOTAL);
    let (kept, report) = filter_valid(corpus);
    assert_eq!(kept.len(), 12_666);
    assert_eq!(report.retained, 12_666);
    assert_eq!(report.missing_abstract, WITHOUT_ABSTRACT);
    assert_eq!(report.removed(), WITHOUT_ABSTRACT);
    assert!(kept.records.iter().all(|r| r.abstract_str().is_some() && r.year.is_some()));

    let (again, report2) = filter_valid(kept.clone());
    assert_eq!(again.records, kept.records);
    assert_eq!(report2.removed(), 0);
}

#[test]
fn csv_and_json_lines_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("export.csv");
    let mut f = std::fs::File::create(&csv_path).unwrap();
    f.write_all(
        b"record_id,title,authors,year,source_title,doc_type,abstract,doi,references\n\
          A,Alpha,X,2001,J,article,text,,\n\
          B,Beta,,2002,,review,,10.1/x,r1|r2\n",
    )
    .unwrap();
    let c = parse_records(&csv_path, InputFormat::Csv).unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c.records[1].references, vec!["r1", "r2"]);
    assert_eq!(c.records[1].abstract_text, None);
    assert_eq!(c.records[1].source_title, None);

    let jsonl = dir.path().join("export.jsonl");
    std::fs::write(&jsonl, c.to_json_lines()).unwrap();
    assert_eq!(InputFormat::from_path(&jsonl), InputFormat::JsonLines);
    let back = parse_records(&jsonl, InputFormat::JsonLines).unwrap();
    assert_eq!(back.records, c.records);
    assert!(parse_records(&dir.path().join("nope.csv"), InputFormat::Csv).is_err());
}

fn corpus(records: Vec<BibRecord>) -> Corpus {
    Corpus::from_records(records, Provenance::now("test", InputFormat::JsonLines)).unwrap()
}

fn arb_record(i: usize) -> impl Strategy<Value = BibRecord> {
    (
        "[A-Za-z ,.'\u{e9}\u{fc}]{0,40}",
        prop::option::of(1950i32..2030),
        prop::option::of("[a-z \"\\\\\n]{0,30}"),
        prop::collection::vec("[A-Za-z ,|]{0,20}", 0..4),
        prop::option::of("10\\.[0-9]{4}/[a-z]{1,5}"),
    )
        .prop_map(move |(title, year, abs, refs, doi)| {
            let mut r = BibRecord::new(format!("R{i}"), title);
            r.year = year;
            r.abstract_text = abs;
            r.references = refs;
            r.doi = doi;
            r
        })
}

fn arb_corpus() -> impl Strategy<Value = Vec<BibRecord>> {
    (1usize..12).prop_flat_map(|n| (0..n).map(arb_record).collect::<Vec<_>>())
}

proptest! {
    #[test]
    fn json_lines_round_trip_is_exact(records in arb_corpus()) {
        let c = corpus(records);
        let text = c.to_json_lines();
        let back = parse_json_lines_str(&text, "x").unwrap();
        prop_assert_eq!(&back.records, &c.records);
        prop_assert_eq!(back.to_json_lines(), text);
    }

    #[test]
    fn filter_is_idempotent(records in arb_corpus()) {
        let (once, r1) = filter_valid(corpus(records));
        let (twice, r2) = filter_valid(once.clone());
        prop_assert_eq!(&twice.records, &once.records);
        prop_assert_eq!(r2.removed(), 0);
        prop_assert_eq!(r1.retained, once.len());
    }
}

/// Records whose titles appear verbatim inside other records' references.
fn linked_corpus(n: usize, refs: &[(usize, usize)]) -> Corpus {
    let title = |i: usize| format!("Option pricing study number {i} with jumps");
    let records = (0..n)
        .map(|i| {
            let cited: Vec<String> = refs
                .iter()
                .filter(|(a, _)| *a == i)
                .map(|(_, b)| format!("Smith A., {}, J. Fin. (1999)", title(*b)))
                .collect();
            BibRecord::new(format!("P{i}"), title(i))
                .with_year(2000)
                .with_abstract("a")
                .with_references(cited)
        })
        .collect();
    corpus(records)
}

proptest! {
    #[test]
    fn resolved_edges_satisfy_invariants(
        (n, refs) in (2usize..10).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..25)))
    ) {
        let c = linked_corpus(n, &refs);
        let (edges, report) = resolve_references(&c, &MatcherConfig::default());
        let ids: BTreeSet<&str> = c.ids().collect();
        let total: usize = c.records.iter().map(|r| r.references.len()).sum();
        prop_assert!(edges.len() <= total);
        prop_assert_eq!(report.references_total, total);
        prop_assert_eq!(report.edges, edges.len());
        let unique: BTreeSet<_> = edges.iter().collect();
        prop_assert_eq!(unique.len(), edges.len());
        for e in &edges {
            prop_assert!(ids.contains(e.citing.as_str()) && ids.contains(e.cited.as_str()));
            prop_assert_ne!(&e.citing, &e.cited);
        }
        let want: BTreeSet<(String, String)> = refs
            .iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (format!("P{a}"), format!("P{b}")))
            .collect();
        let got: BTreeSet<(String, String)> = edges.iter().map(|e| (e.citing.clone(), e.cited.clone())).collect();
        prop_assert_eq!(got, want);
    }
}
