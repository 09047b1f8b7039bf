mod common;

use std::sync::Arc;

use chrono::Utc;
use common::*;
use litreview_core::labels;
use litreview_core::taxonomy::builtin_taxonomy;
use litreview_core::BibRecord;
use litreview_kb::ledger::read_entries;
use litreview_kb::{GoldLabel, KbError, KnowledgeBase, Payload, Query};

#[test]
fn appended_record_survives_replay() {
    let dir = tempfile::tempdir().unwrap();
    let rec = record("R1", 2020, "Deep hedging", "Neural networks price options.")
        .with_doi("10.1/x")
        .with_references(["a ref"]);
    {
        let kb = open(dir.path());
        let e = kb.append(Payload::Record(rec.clone())).unwrap();
        assert_eq!(e.seq, 1);
    }
    let kb = open(dir.path());
    assert_eq!(kb.state().records["R1"], rec);
    assert_eq!(kb.state().entries, 1);
    let next = kb.append(Payload::Record(record("R2", 2021, "t", "a"))).unwrap();
    assert_eq!(next.seq, 2);
}

#[test]
fn entries_are_tagged_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let kb = open(dir.path());
    kb.append(Payload::Record(record("R1", 2020, "t", "a"))).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ledger.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(v["seq"], 1);
    assert_eq!(v["kind"], "record");
    assert_eq!(v["payload"]["record_id"], "R1");
    assert!(v["timestamp"].is_string());
}

#[test]
fn concurrent_appends_get_distinct_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let kb = Arc::new(open(dir.path()));
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let kb = kb.clone();
            std::thread::spawn(move || {
                (0..25)
                    .map(|i| {
                        kb.append(Payload::Record(record(&format!("T{t}-{i}"), 2000, "t", "a")))
                            .unwrap()
                            .seq
                    })
                    .collect::<Vec<u64>>()
            })
        })
        .collect();
    let mut seqs: Vec<u64> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
    seqs.sort_unstable();
    assert_eq!(seqs, (1..=200).collect::<Vec<u64>>());
    drop(kb);
    let entries = read_entries(&dir.path().join("ledger.jsonl")).unwrap();
    assert_eq!(entries.len(), 200);
    assert!(entries.windows(2).all(|w| w[0].seq < w[1].seq));
    assert_eq!(open(dir.path()).state().records.len(), 200);
}

#[test]
fn rejected_payloads_leave_the_ledger_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.jsonl");
    let kb = open(dir.path());
    kb.append(Payload::Record(record("R1", 2020, "t", "a"))).unwrap();
    let before = std::fs::read(&path).unwrap();

    let bad = [
        Payload::Record(BibRecord::new("R2", "no abstract").with_year(2020)),
        Payload::Record(record("R1", 2020, "duplicate", "a")),
        Payload::GoldLabel(GoldLabel {
            record_id: "R1".into(),
            dim_id: 3,
            labels: labels!["Stocks"],
            annotator: "expert".into(),
            entered_at: Utc::now(),
        }),
        Payload::GoldLabel(GoldLabel {
            record_id: "missing".into(),
            dim_id: 1,
            labels: labels!["Yes"],
            annotator: "expert".into(),
            entered_at: Utc::now(),
        }),
        Payload::ExperimentMeta(meta("e", &[], &["dim1"], 3, false)),
        Payload::ExperimentMeta(meta("e", &["a"], &["dim1"], 0, false)),
    ];
    for p in bad {
        assert!(kb.append(p).is_err());
    }
    // one bad item sinks the whole batch
    let err = kb
        .append_all(vec![
            Payload::Record(record("R3", 2020, "t", "a")),
            Payload::Record(record("R3", 2021, "t", "a")),
        ])
        .unwrap_err();
    assert!(matches!(err, KbError::Conflict(_)));
    assert_eq!(std::fs::read(&path).unwrap(), before);
    assert_eq!(kb.state().entries, 1);
    assert!(!kb.state().records.contains_key("R3"));
}

#[test]
fn replay_rebuilds_identical_query_responses() {
    let dir = tempfile::tempdir().unwrap();
    let kb = open(dir.path());
    add_records(
        &kb,
        &(0..30)
            .map(|i| record(&format!("R{i:02}"), 2000 + i % 7, &format!("Title {i}"), "Heston model"))
            .collect::<Vec<_>>(),
    );
    kb.put_experiment(meta("e", &["a", "b"], &["dim1", "dim3"], 2, true)).unwrap();
    let q = Query::default().years(Some(2003), None).with_text("heston");
    let live = serde_json::to_string(&kb.query_records(&q).unwrap()).unwrap();
    let state_live = format!("{:?}", kb.state().records);
    drop(kb);
    let replayed = open(dir.path());
    assert_eq!(serde_json::to_string(&replayed.query_records(&q).unwrap()).unwrap(), live);
    assert_eq!(format!("{:?}", replayed.state().records), state_live);
    assert_eq!(replayed.state().active.as_deref(), Some("e"));
}

#[test]
fn corrupt_ledgers_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.jsonl");
    {
        let kb = open(dir.path());
        kb.append(Payload::Record(record("R1", 2020, "t", "a"))).unwrap();
        kb.append(Payload::Record(record("R2", 2020, "t", "a"))).unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    std::fs::write(&path, format!("{}\n{}\n", lines[1], lines[0])).unwrap();
    assert!(matches!(
        KnowledgeBase::open(&path, builtin_taxonomy()),
        Err(KbError::Corrupt { line: 2, .. })
    ));

    std::fs::write(&path, format!("{}\n{{\"seq\": 9\n", lines[0])).unwrap();
    assert!(matches!(
        KnowledgeBase::open(&path, builtin_taxonomy()),
        Err(KbError::Corrupt { line: 2, .. })
    ));

    // a hand-edited entry that breaks the schema is caught on replay
    std::fs::write(&path, format!("{}\n{}\n", lines[0], lines[1].replace("\"R2\"", "\"R1\""))).unwrap();
    assert!(matches!(
        KnowledgeBase::open(&path, builtin_taxonomy()),
        Err(KbError::Corrupt { .. })
    ));
}
