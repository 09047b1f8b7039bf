use std::collections::{BTreeMap, BTreeSet};

use litreview_core::ingest::{InputFormat, Provenance};
use litreview_core::taxonomy::builtin_taxonomy;
use litreview_core::topic_metrics::{
    npmi, npmi_coherence, topic_diversity, topic_quality, CorpusStats, Topic, TopicSet,
};
use litreview_core::trends::{cooccurrence_pairs, temporal_rates, YearBucket};
use litreview_core::{labels, BibRecord, Corpus, LabelSet};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Q = Ratio<i64>;

fn corpus_with_years(years: &[(&str, i32)]) -> Corpus {
    Corpus::from_records(
        years
            .iter()
            .map(|(id, y)| BibRecord::new(*id, "t").with_year(*y).with_abstract("a"))
            .collect(),
        Provenance::now("test", InputFormat::Csv),
    )
    .unwrap()
}

#[test]
fn ten_paper_temporal_rates_match_hand_count() {
    let papers: [(&str, i32, LabelSet); 10] = [
        ("p01", 1985, labels!["European"]),
        ("p02", 1990, labels!["European", "Exotic"]),
        ("p03", 1995, labels!["American"]),
        ("p04", 1995, labels!["European"]),
        ("p05", 1995, labels!["European", "American"]),
        ("p06", 2000, labels!["Exotic"]),
        ("p07", 2000, labels!["Not Specified"]),
        ("p08", 2000, labels!["European"]),
        ("p09", 2000, labels!["European", "Exotic"]),
        ("p10", 2010, labels!["American"]),
    ];
    let corpus = corpus_with_years(&papers.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>());
    let lab: BTreeMap<String, LabelSet> =
        papers.iter().map(|p| (p.0.to_owned(), p.2.clone())).collect();
    let scope: BTreeSet<String> = lab.keys().cloned().collect();
    let tax = builtin_taxonomy();
    let s = temporal_rates::<Q>(&corpus, &lab, tax.dimension(3).unwrap(), &scope);

    assert_eq!(s.buckets.len(), 4);
    assert_eq!(s.buckets[0].bucket, YearBucket::Early);
    assert_eq!(s.rate(YearBucket::Early, "European"), Some(Q::from_integer(1)));
    assert_eq!(s.rate(YearBucket::Early, "Exotic"), Some(Q::new(1, 2)));
    assert_eq!(s.rate(YearBucket::Year(1995), "American"), Some(Q::new(2, 3)));
    assert_eq!(s.rate(YearBucket::Year(1995), "European"), Some(Q::new(2, 3)));
    assert_eq!(s.rate(YearBucket::Year(2000), "Exotic"), Some(Q::new(1, 2)));
    assert_eq!(s.rate(YearBucket::Year(2000), "Not Specified"), Some(Q::new(1, 4)));
    assert_eq!(s.rate(YearBucket::Year(2010), "American"), Some(Q::from_integer(1)));
    assert_eq!(s.rate(YearBucket::Year(2005), "American"), None);
    assert_eq!(s.overall_rate("European"), Some(Q::new(6, 10)));
    assert_eq!(s.included, 10);
    assert_eq!(s.excluded, 0);
    assert!(s.to_csv().contains("<=1990,European,1\n"));
}

#[test]
fn modeling_share_over_full_corpus() {
    let n = 12_666;
    let ids: Vec<String> = (0..n).map(|i| format!("r{i:05}")).collect();
    let corpus = Corpus::from_records(
        ids.iter()
            .enumerate()
            .map(|(i, id)| BibRecord::new(id.as_str(), "t").with_year(1975 + (i % 50) as i32).with_abstract("a"))
            .collect(),
        Provenance::now("test", InputFormat::Csv),
    )
    .unwrap();
    let lab: BTreeMap<String, LabelSet> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), labels![if i < 6_766 { "Yes" } else { "No" }]))
        .collect();
    let scope: BTreeSet<String> = ids.iter().cloned().collect();
    let tax = builtin_taxonomy();
    let s = temporal_rates::<f64>(&corpus, &lab, tax.dimension(1).unwrap(), &scope);
    let share = s.overall_rate("Yes").unwrap();
    assert_eq!(share, 6_766.0 / 12_666.0);
    assert_eq!((share * 10_000.0).round() / 10_000.0, 0.5342);
    // single-label dimension: per-bucket rates sum to exactly one
    for b in &s.buckets {
        let total: f64 = b.rates.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn twelve_paper_cooccurrence_matches_cross_product() {
    let mut rng = StdRng::seed_from_u64(12);
    let assets = ["Stocks", "Indexes", "Commodities"];
    let methods = ["1", "2", "3", "4"];
    let mut la = BTreeMap::new();
    let mut lb = BTreeMap::new();
    let mut years = BTreeMap::new();
    for i in 0..12 {
        let id = format!("p{i:02}");
        let pick = |rng: &mut StdRng, cats: &[&str]| -> LabelSet {
            let mut s: LabelSet = cats.iter().filter(|_| rng.gen_bool(0.4)).map(|c| c.to_string()).collect();
            s.insert(*cats.choose(rng).unwrap());
            s
        };
        la.insert(id.clone(), pick(&mut rng, &assets));
        lb.insert(id.clone(), pick(&mut rng, &methods));
        years.insert(id, [2009, 2014, 2015, 2020][i % 4]);
    }
    let t = cooccurrence_pairs::<Q>(&la, &lb, &years, 2015, 100).unwrap();
    assert_eq!((t.papers_before, t.papers_after), (6, 6));
    let mut cells = 0;
    for a in assets {
        for b in methods {
            let (mut before, mut after) = (0, 0);
            for (id, y) in &years {
                if la[id].contains(a) && lb[id].contains(b) {
                    if *y < 2015 {
                        before += 1
                    } else {
                        after += 1
                    }
                }
            }
            match t.cell(a, b) {
                Some(c) => {
                    cells += 1;
                    assert_eq!((c.count_before, c.count_after), (before, after));
                    assert_eq!(c.share_before, Some(Q::new(before as i64, 6)));
                    assert_eq!(c.share_after, Some(Q::new(after as i64, 6)));
                }
                None => assert_eq!(before + after, 0),
            }
        }
    }
    assert_eq!(cells, t.cells.len());
    for w in t.cells.windows(2) {
        assert!(w[0].total() >= w[1].total());
    }
    let top3 = cooccurrence_pairs::<Q>(&la, &lb, &years, 2015, 3).unwrap();
    assert_eq!(top3.cells[..], t.cells[..3]);
}

#[test]
fn boundary_and_fan_out() {
    let la: BTreeMap<String, LabelSet> = [
        ("a".into(), labels!["Stocks"]),
        ("b".into(), labels!["Stocks", "Indexes"]),
    ]
    .into();
    let lb: BTreeMap<String, LabelSet> = [("a".into(), labels!["1"]), ("b".into(), labels!["1"])].into();
    let years: BTreeMap<String, i32> = [("a".into(), 2014), ("b".into(), 2015)].into();
    let t = cooccurrence_pairs::<Q>(&la, &lb, &years, 2015, 20).unwrap();
    let s1 = t.cell("Stocks", "1").unwrap();
    assert_eq!((s1.count_before, s1.count_after), (1, 1));
    let i1 = t.cell("Indexes", "1").unwrap();
    assert_eq!((i1.count_before, i1.count_after), (0, 1));
    assert!(cooccurrence_pairs::<Q>(&la, &lb, &years, 2015, 0).is_err());
    assert!(cooccurrence_pairs::<Q>(&la, &lb, &BTreeMap::new(), 2015, 5).is_err());
}

const TUNING_TRIALS: [(f64, f64, f64); 24] = [
    (0.0571, 0.6505, 0.0371),
    (0.0054, 0.6669, 0.0036),
    (0.1230, 0.6978, 0.0859),
    (0.1320, 0.7068, 0.0933),
    (0.0742, 0.6658, 0.0494),
    (0.1198, 0.7125, 0.0853),
    (0.1258, 0.6620, 0.0833),
    (0.0256, 0.6555, 0.0168),
    (0.1384, 0.7200, 0.0997),
    (0.0765, 0.6676, 0.0510),
    (0.1274, 0.7232, 0.0921),
    (0.1254, 0.7068, 0.0886),
    (0.1190, 0.7328, 0.0872),
    (0.0768, 0.7714, 0.0592),
    (0.0548, 0.8200, 0.0449),
    (0.0172, 0.6669, 0.0115),
    (0.1350, 0.6725, 0.0908),
    (0.0992, 0.6412, 0.0636),
    (0.0769, 0.7833, 0.0602),
    (0.0887, 0.6606, 0.0586),
    (0.0777, 0.6552, 0.0509),
    (0.0673, 0.6575, 0.0442),
    (0.0540, 0.6705, 0.0362),
    (0.1231, 0.7179, 0.0884),
];

#[test]
fn quality_reproduces_trial_table() {
    for (i, (tc, td, tq)) in TUNING_TRIALS.iter().enumerate() {
        let got = topic_quality(*tc, *td);
        assert!((got - tq).abs() <= 2e-4, "trial {i}: {got} vs {tq}");
    }
    let t8 = topic_quality(0.1384f64, 0.72);
    assert!((0.0996..=0.0997).contains(&t8));
    let t2 = topic_quality(0.1230f64, 0.6978);
    assert!((0.0858..=0.0859).contains(&t2));
}

fn topics(words: &[&[&str]]) -> TopicSet {
    TopicSet::new(
        words
            .iter()
            .enumerate()
            .map(|(i, ws)| Topic {
                topic: i as i64,
                words: ws.iter().map(|w| w.to_string()).collect(),
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn three_document_coherence_by_hand() {
    let docs = ["option volatility smile", "option volatility", "option jump"];
    let stats = CorpusStats::from_documents(docs);
    let t = topics(&[&["option", "volatility", "jump"]]);
    let c = npmi_coherence::<f64>(&t, &stats).unwrap();
    // P(option)=1, P(volatility)=2/3, P(jump)=1/3
    // (option, volatility): joint 2/3 = P(o)P(v) → 0
    // (option, jump): joint 1/3 = P(o)P(j) → 0
    // (volatility, jump): never together → smoothed, close to -1
    let eps = 1e-12f64;
    let vj = ((eps) / ((2.0 / 3.0 + eps) * (1.0 / 3.0 + eps))).ln() / -(eps.ln());
    let ov = ((2.0 / 3.0 + eps) / ((1.0 + eps) * (2.0 / 3.0 + eps))).ln() / -((2.0 / 3.0 + eps).ln());
    let oj = ((1.0 / 3.0 + eps) / ((1.0 + eps) * (1.0 / 3.0 + eps))).ln() / -((1.0 / 3.0 + eps).ln());
    let want = (ov + oj + vj) / 3.0;
    assert!((c.coherence - want).abs() < 1e-12);
    assert!(c.coherence < 0.0);
    assert!(c.missing_words.is_empty());
}

#[test]
fn perfect_pair_scores_one() {
    assert!((npmi(0.5f64, 0.5, 0.5) - 1.0).abs() < 1e-9);
    assert!(npmi(0.5f64, 0.4, 0.2).abs() < 1e-9);
    let stats = CorpusStats::from_documents(["heston model", "heston model", "jump", "levy"]);
    let c = npmi_coherence::<f64>(&topics(&[&["heston", "model"]]), &stats).unwrap();
    assert!((c.coherence - 1.0).abs() < 1e-9);
}

#[test]
fn diversity_hand_union() {
    let t = topics(&[&["a", "b", "c"], &["b", "c", "d"], &["a", "e", "f"]]);
    // union {a,b,c,d,e,f} over 9 slots
    assert_eq!(topic_diversity::<Q>(&t).unwrap(), Q::new(6, 9));
    let dup = topics(&[&["a", "b", "c"], &["b", "c", "d"], &["a", "e", "f"], &["a", "e", "f"]]);
    assert!(topic_diversity::<Q>(&dup).unwrap() < Q::new(6, 9));
    let json = r#"[{"topic": 0, "words": ["Alpha", "beta"]}, {"topic": 1, "words": ["gamma", "alpha"]}]"#;
    let parsed = TopicSet::from_json_str(json).unwrap();
    assert_eq!(parsed.topics[0].words[0], "alpha");
    assert_eq!(topic_diversity::<Q>(&parsed).unwrap(), Q::new(3, 4));
}

proptest! {
    #[test]
    fn npmi_bounded_and_symmetric(a in 1usize..50, b in 1usize..50, both in 0usize..50, docs in 50usize..100) {
        let both = both.min(a).min(b);
        let p = |c: usize| c as f64 / docs as f64;
        let x = npmi(p(a), p(b), p(both));
        prop_assert!((-1.0..=1.0).contains(&x));
        prop_assert_eq!(x, npmi(p(b), p(a), p(both)));
    }

    #[test]
    fn temporal_rates_ignore_record_order(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut rows: Vec<(String, i32, LabelSet)> = (0..20)
            .map(|i| {
                let l: LabelSet = ["European", "American", "Exotic"].iter().filter(|_| rng.gen_bool(0.5)).map(|c| c.to_string()).collect();
                (format!("p{i}"), rng.gen_range(1980..2025), l)
            })
            .collect();
        let tax = builtin_taxonomy();
        let dim = tax.dimension(3).unwrap();
        let run = |rows: &[(String, i32, LabelSet)]| {
            let corpus = corpus_with_years(&rows.iter().map(|r| (r.0.as_str(), r.1)).collect::<Vec<_>>());
            let lab: BTreeMap<String, LabelSet> = rows.iter().map(|r| (r.0.clone(), r.2.clone())).collect();
            let scope = lab.keys().cloned().collect();
            temporal_rates::<Q>(&corpus, &lab, dim, &scope)
        };
        let a = run(&rows);
        rows.shuffle(&mut rng);
        prop_assert_eq!(a, run(&rows));
    }
}
