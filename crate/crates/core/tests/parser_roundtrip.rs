use litreview_core::taxonomy::{
    builtin_taxonomy, format_response, parse_response, subclass_to_class, Dimension,
    OutputGrammar,
};
use litreview_core::{labels, LabelSet};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const CASES: usize = 1000;

fn dim(id: u32) -> Dimension {
    builtin_taxonomy().dimension(id).unwrap().clone()
}

fn scramble_case(rng: &mut StdRng, s: &str) -> String {
    s.chars()
        .map(|c| {
            if rng.gen_bool(0.5) {
                c.to_ascii_uppercase()
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

fn pad(rng: &mut StdRng) -> &'static str {
    ["", " ", "  ", "\t", "\n"][rng.gen_range(0..5)]
}

fn inline_pad(rng: &mut StdRng) -> &'static str {
    ["", " ", "  ", "\t"][rng.gen_range(0..4)]
}

fn random_subset(rng: &mut StdRng, ids: &[String], allow_empty: bool) -> Vec<String> {
    loop {
        let picked: Vec<String> = ids.iter().filter(|_| rng.gen_bool(0.35)).cloned().collect();
        if allow_empty || !picked.is_empty() {
            return picked;
        }
    }
}

/// A noisy but well-formed keyed answer for `labels`.
fn keyed_answer(rng: &mut StdRng, d: &Dimension, picked: &[String]) -> String {
    let mut entries: Vec<String> = d
        .categories
        .iter()
        .filter(|c| Some(&c.cat_id) != d.default_category.as_ref())
        .map(|c| {
            let v = if picked.contains(&c.cat_id) { "yes" } else { "no" };
            let key = if rng.gen_bool(0.2) {
                format!("\"{}\"", c.cat_id)
            } else {
                c.cat_id.clone()
            };
            format!(
                "{}{}{}:{}{}",
                pad(rng),
                scramble_case(rng, &key),
                inline_pad(rng),
                inline_pad(rng),
                scramble_case(rng, v)
            )
        })
        .collect();
    entries.shuffle(rng);
    let prefix = ["", "Here is my answer: ", "Sure.\n", "Final output -> "][rng.gen_range(0..4)];
    let suffix = ["", " Hope this helps.", "\n(end)"][rng.gen_range(0..3)];
    format!("{prefix}{{{}}}{suffix}", entries.join(","))
}

#[test]
fn yes_no_round_trip() {
    let d = dim(1);
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..CASES {
        let want = if rng.gen_bool(0.5) { "Yes" } else { "No" };
        let body = scramble_case(&mut rng, want);
        let raw = match rng.gen_range(0..4) {
            0 => body,
            1 => format!("{}{body}.{}", pad(&mut rng), pad(&mut rng)),
            2 => format!("Answer: {body}"),
            _ => format!("[{body}]"),
        };
        assert_eq!(
            parse_response(&d, OutputGrammar::YesNo, &raw).unwrap(),
            labels![want],
            "{raw:?}"
        );
    }
}

#[test]
fn keyed_dict_round_trip() {
    let mut rng = StdRng::seed_from_u64(2);
    for i in 0..CASES {
        let d = dim(if i % 2 == 0 { 2 } else { 3 });
        let ids: Vec<String> = d
            .category_ids()
            .filter(|c| Some(*c) != d.default_category.as_deref())
            .map(str::to_owned)
            .collect();
        let picked = random_subset(&mut rng, &ids, true);
        let want: LabelSet = if picked.is_empty() {
            labels![d.default_category.clone().unwrap()]
        } else {
            picked.iter().cloned().collect()
        };
        let raw = keyed_answer(&mut rng, &d, &picked);
        assert_eq!(
            parse_response(&d, OutputGrammar::KeyedYesNoDict, &raw).unwrap(),
            want,
            "{raw:?}"
        );
    }
}

#[test]
fn index_list_round_trip() {
    let mut rng = StdRng::seed_from_u64(3);
    let d4 = dim(4);
    let sub = d4.subclass_dimension().unwrap();
    for i in 0..CASES {
        let d = if i % 2 == 0 { &d4 } else { &sub };
        let ids: Vec<String> = d.category_ids().map(str::to_owned).collect();
        let mut picked = random_subset(&mut rng, &ids, false);
        picked.shuffle(&mut rng);
        let items: Vec<String> = picked
            .iter()
            .map(|p| format!("{}{p}{}", pad(&mut rng), pad(&mut rng)))
            .collect();
        let list = format!("[{}]", items.join(";"));
        let raw = match rng.gen_range(0..3) {
            0 => list,
            1 => format!("The applicable subclasses are {list}."),
            _ => format!("Format [subclass_index; subclass_index]\nAnswer: {list}"),
        };
        let want: LabelSet = picked.into_iter().collect();
        assert_eq!(
            parse_response(d, OutputGrammar::BracketedIndexList, &raw).unwrap(),
            want,
            "{raw:?}"
        );
    }
}

#[test]
fn adversarial_responses_never_yield_labels() {
    let d1 = dim(1);
    let d2 = dim(2);
    let d3 = dim(3);
    let d4 = dim(4);
    let sub = d4.subclass_dimension().unwrap();
    let all_dim2 = "Stocks: no, Indexes: no, Commodities: no, Currencies: no, Interest Rates: no";
    let cases: Vec<(&Dimension, OutputGrammar, String)> = vec![
        (&d1, OutputGrammar::YesNo, "Maybe".into()),
        (&d1, OutputGrammar::YesNo, "".into()),
        (&d1, OutputGrammar::YesNo, "Yes and No".into()),
        (&d1, OutputGrammar::YesNo, "yes/no".into()),
        (&d1, OutputGrammar::YesNo, "Y".into()),
        (&d1, OutputGrammar::YesNo, "Nope, Yesterday".into()),
        (&d1, OutputGrammar::YesNo, "I cannot determine this.".into()),
        (&d1, OutputGrammar::YesNo, "[Yes, No]".into()),
        (&d2, OutputGrammar::KeyedYesNoDict, "{Stocks: yes}".into()),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{{{all_dim2}}}")),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{all_dim2}, Cryptocurrencies: no")),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{{{all_dim2}, Cryptocurrencies: maybe}}")),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{{{all_dim2}, Cryptocurrencies: no, Bonds: yes}}")),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{{{all_dim2}, Cryptocurrencies: no, Stocks: yes}}")),
        (&d2, OutputGrammar::KeyedYesNoDict, "{}".into()),
        (&d2, OutputGrammar::KeyedYesNoDict, "{Stocks yes, Indexes no}".into()),
        (&d2, OutputGrammar::KeyedYesNoDict, format!("{{{all_dim2}, Cryptocurrencies: no")),
        (&d3, OutputGrammar::KeyedYesNoDict, "{European: yes, American: no}".into()),
        (&d3, OutputGrammar::KeyedYesNoDict, "{European: yes, American: no, Exotic: no, Not Specified: yes}".into()),
        (&d3, OutputGrammar::KeyedYesNoDict, "European, Exotic".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[9.9]".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[1.10]".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[1.2; 9.1]".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[]".into()),
        (&sub, OutputGrammar::BracketedIndexList, "1.2; 2.3".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[1.2; 2.3".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[1.2; Monte Carlo]".into()),
        (&sub, OutputGrammar::BracketedIndexList, "[-1.2]".into()),
        (&d4, OutputGrammar::BracketedIndexList, "[0]".into()),
        (&d4, OutputGrammar::BracketedIndexList, "[1.1]".into()),
        (&d4, OutputGrammar::BracketedIndexList, "[class_index; class_index]".into()),
    ];
    assert!(cases.len() >= 20);
    for (d, g, raw) in &cases {
        let got = parse_response(d, *g, raw);
        assert!(got.is_err(), "{raw:?} parsed to {:?}", got.unwrap());
        assert_eq!(&got.unwrap_err().raw, raw);
    }
}

fn subclass_ids() -> Vec<String> {
    dim(4)
        .declared_subclasses()
        .into_iter()
        .map(|c| c.cat_id)
        .collect()
}

proptest! {
    #[test]
    fn subclass_mapping_is_monotone(mask_s in any::<u64>(), extra in any::<u64>()) {
        let ids = subclass_ids();
        let s: LabelSet = ids.iter().enumerate().filter(|(i, _)| mask_s >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        let t: LabelSet = ids.iter().enumerate().filter(|(i, _)| (mask_s | extra) >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        let d = dim(4);
        let ms = subclass_to_class(&d, &s).unwrap();
        let mt = subclass_to_class(&d, &t).unwrap();
        prop_assert!(ms.is_subset(&mt));
        prop_assert!(ms.len() <= s.len());
    }

    #[test]
    fn canonical_format_round_trips(mask in any::<u64>(), which in 0usize..4) {
        let d4 = dim(4);
        let (d, g) = match which {
            0 => (dim(2), OutputGrammar::KeyedYesNoDict),
            1 => (dim(3), OutputGrammar::KeyedYesNoDict),
            2 => (d4.clone(), OutputGrammar::BracketedIndexList),
            _ => (d4.subclass_dimension().unwrap(), OutputGrammar::BracketedIndexList),
        };
        let ids: Vec<&str> = d.category_ids().filter(|c| Some(*c) != d.default_category.as_deref()).collect();
        let mut want: LabelSet = ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| *x).collect();
        if want.is_empty() {
            match &d.default_category {
                Some(def) => want = labels![def.clone()],
                None => want = labels![ids[0]],
            }
        }
        let text = format_response(&d, g, &want);
        prop_assert_eq!(parse_response(&d, g, &text).unwrap(), want);
    }

    #[test]
    fn parser_labels_are_always_declared(raw in ".{0,80}") {
        for (d, g) in [
            (dim(1), OutputGrammar::YesNo),
            (dim(2), OutputGrammar::KeyedYesNoDict),
            (dim(4), OutputGrammar::BracketedIndexList),
        ] {
            if let Ok(l) = parse_response(&d, g, &raw) {
                prop_assert!(d.validate_labels(&l).is_ok() || l.is_empty());
            }
        }
    }
}
