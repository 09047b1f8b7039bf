//! Label occurrence rates over time and cross-dimensional co-occurrence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ingest::Corpus;
use crate::scalar::Fraction;
use crate::taxonomy::Dimension;
use crate::LabelSet;

/// Years up to and including this one share a bucket.
pub const EARLY_CUTOFF: i32 = 1990;
pub const DEFAULT_SPLIT_YEAR: i32 = 2015;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrendsError {
    #[error("no papers carry labels in both dimensions")]
    NoPapers,
    #[error("top_k must be positive")]
    ZeroTopK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum YearBucket {
    Early,
    Year(i32),
}

impl YearBucket {
    pub fn of(year: i32) -> Self {
        if year <= EARLY_CUTOFF {
            YearBucket::Early
        } else {
            YearBucket::Year(year)
        }
    }
}

impl fmt::Display for YearBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YearBucket::Early => write!(f, "<={EARLY_CUTOFF}"),
            YearBucket::Year(y) => write!(f, "{y}"),
        }
    }
}

impl Serialize for YearBucket {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketRates<T> {
    pub bucket: YearBucket,
    pub papers: usize,
    /// One rate per category of the dimension, in declaration order.
    pub rates: Vec<T>,
}

/// Occurrence rate of each category per year bucket. Buckets without
/// papers are absent rather than zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalSeries<T> {
    pub dim_id: u32,
    pub categories: Vec<String>,
    pub buckets: Vec<BucketRates<T>>,
    /// Rate of each category over all included papers.
    pub overall: Vec<T>,
    pub included: usize,
    /// Scope members without labels or without a year.
    pub excluded: usize,
}

impl<T: Fraction> TemporalSeries<T> {
    pub fn rate(&self, bucket: YearBucket, category: &str) -> Option<T> {
        let c = self.categories.iter().position(|x| x == category)?;
        let b = self.buckets.iter().find(|b| b.bucket == bucket)?;
        Some(b.rates[c])
    }

    pub fn overall_rate(&self, category: &str) -> Option<T> {
        let c = self.categories.iter().position(|x| x == category)?;
        Some(self.overall[c])
    }

    /// `bucket,category,rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,category,rate\n");
        for b in &self.buckets {
            for (cat, r) in self.categories.iter().zip(&b.rates) {
                let _ = writeln!(out, "{},{},{}", b.bucket, csv_field(cat), r.to_f64());
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// rate(bucket, cat) = papers in scope and bucket carrying cat / papers in
/// scope and bucket.
pub fn temporal_rates<T: Fraction>(
    corpus: &Corpus,
    labels: &BTreeMap<String, LabelSet>,
    dim: &Dimension,
    scope: &BTreeSet<String>,
) -> TemporalSeries<T> {
    let categories: Vec<String> = dim.category_ids().map(str::to_owned).collect();
    let mut per_bucket: BTreeMap<YearBucket, (usize, Vec<usize>)> = BTreeMap::new();
    let mut totals = vec![0; categories.len()];
    let years: BTreeMap<&str, i32> = corpus
        .records
        .iter()
        .filter_map(|r| Some((r.record_id.as_str(), r.year?)))
        .collect();
    let mut included = 0;
    for id in scope {
        let found = years.get(id.as_str()).copied().zip(labels.get(id));
        let Some((year, l)) = found else {
            continue;
        };
        included += 1;
        let slot = per_bucket
            .entry(YearBucket::of(year))
            .or_insert_with(|| (0, vec![0; categories.len()]));
        slot.0 += 1;
        for (i, c) in categories.iter().enumerate() {
            if l.contains(c) {
                slot.1[i] += 1;
                totals[i] += 1;
            }
        }
    }
    let rates = |counts: &[usize], n: usize| -> Vec<T> {
        counts.iter().map(|&c| T::ratio(c, n)).collect()
    };
    TemporalSeries {
        dim_id: dim.dim_id,
        buckets: per_bucket
            .into_iter()
            .map(|(bucket, (n, counts))| BucketRates {
                bucket,
                papers: n,
                rates: rates(&counts, n),
            })
            .collect(),
        overall: if included == 0 {
            vec![T::zero(); categories.len()]
        } else {
            rates(&totals, included)
        },
        categories,
        included,
        excluded: scope.len() - included,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrenceCell<T> {
    pub cat_a: String,
    pub cat_b: String,
    pub count_before: usize,
    pub count_after: usize,
    /// `None` when the period has no papers.
    pub share_before: Option<T>,
    pub share_after: Option<T>,
}

impl<T> CooccurrenceCell<T> {
    pub fn total(&self) -> usize {
        self.count_before + self.count_after
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrenceTable<T> {
    pub split_year: i32,
    pub papers_before: usize,
    pub papers_after: usize,
    /// The top-k pairs by combined count, then by (cat_a, cat_b).
    pub cells: Vec<CooccurrenceCell<T>>,
}

impl<T: Fraction> CooccurrenceTable<T> {
    pub fn cell(&self, cat_a: &str, cat_b: &str) -> Option<&CooccurrenceCell<T>> {
        self.cells.iter().find(|c| c.cat_a == cat_a && c.cat_b == cat_b)
    }

    pub fn period_names(&self) -> (String, String) {
        (format!("pre_{}", self.split_year), format!("from_{}", self.split_year))
    }

    /// `period,cat_a,cat_b,count,share`; a period without papers has a
    /// blank share.
    pub fn to_csv(&self) -> String {
        let (before, after) = self.period_names();
        let mut out = String::from("period,cat_a,cat_b,count,share\n");
        for (name, pick) in [(before, false), (after, true)] {
            for c in &self.cells {
                let (count, share) = if pick {
                    (c.count_after, c.share_after)
                } else {
                    (c.count_before, c.share_before)
                };
                let _ = write!(
                    out,
                    "{name},{},{},{count},",
                    csv_field(&c.cat_a),
                    csv_field(&c.cat_b)
                );
                if let Some(s) = share {
                    let _ = write!(out, "{}", s.to_f64());
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Counts papers carrying `a` in one dimension and `b` in the other, split
/// into `year < split_year` and `year >= split_year`.
///
/// The scope is the set of papers with labels in both maps and a year.
pub fn cooccurrence_pairs<T: Fraction>(
    labels_a: &BTreeMap<String, LabelSet>,
    labels_b: &BTreeMap<String, LabelSet>,
    years: &BTreeMap<String, i32>,
    split_year: i32,
    top_k: usize,
) -> Result<CooccurrenceTable<T>, TrendsError> {
    if top_k == 0 {
        return Err(TrendsError::ZeroTopK);
    }
    let mut counts: BTreeMap<(&str, &str), (usize, usize)> = BTreeMap::new();
    let (mut before, mut after) = (0, 0);
    for (id, la) in labels_a {
        let (Some(lb), Some(&year)) = (labels_b.get(id), years.get(id)) else {
            continue;
        };
        let late = year >= split_year;
        if late {
            after += 1;
        } else {
            before += 1;
        }
        for a in la.iter() {
            for b in lb.iter() {
                let slot = counts.entry((a, b)).or_default();
                if late {
                    slot.1 += 1;
                } else {
                    slot.0 += 1;
                }
            }
        }
    }
    if before + after == 0 {
        return Err(TrendsError::NoPapers);
    }
    let mut ranked: Vec<_> = counts.into_iter().collect();
    // stable sort keeps (cat_a, cat_b) order among equal totals
    ranked.sort_by(|x, y| (y.1 .0 + y.1 .1).cmp(&(x.1 .0 + x.1 .1)));
    ranked.truncate(top_k);
    let share = |c: usize, n: usize| (n > 0).then(|| T::ratio(c, n));
    Ok(CooccurrenceTable {
        split_year,
        papers_before: before,
        papers_after: after,
        cells: ranked
            .into_iter()
            .map(|((a, b), (cb, ca))| CooccurrenceCell {
                cat_a: a.to_owned(),
                cat_b: b.to_owned(),
                count_before: cb,
                count_after: ca,
                share_before: share(cb, before),
                share_after: share(ca, after),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{BibRecord, InputFormat, Provenance};
    use crate::labels;
    use crate::taxonomy::builtin_taxonomy;
    use num_rational::Ratio;

    fn corpus(rows: &[(&str, i32)]) -> Corpus {
        let records = rows
            .iter()
            .map(|(id, y)| BibRecord::new(*id, "t").with_year(*y).with_abstract("a"))
            .collect();
        Corpus::from_records(records, Provenance::now("test", InputFormat::Csv)).unwrap()
    }

    #[test]
    fn early_years_merge() {
        let c = corpus(&[("p", 1989)]);
        let labels = BTreeMap::from([("p".to_owned(), labels!["European", "Exotic"])]);
        let dim = builtin_taxonomy().dimension(3).unwrap().clone();
        let scope = BTreeSet::from(["p".to_owned()]);
        let s: TemporalSeries<f64> = temporal_rates(&c, &labels, &dim, &scope);
        assert_eq!(s.buckets.len(), 1);
        assert_eq!(s.buckets[0].bucket.to_string(), "<=1990");
        assert_eq!(s.rate(YearBucket::Early, "European"), Some(1.0));
        assert_eq!(s.rate(YearBucket::Early, "Exotic"), Some(1.0));
        assert_eq!(s.rate(YearBucket::Early, "American"), Some(0.0));
        assert_eq!(s.rate(YearBucket::Year(1991), "European"), None);
    }

    #[test]
    fn unlabeled_scope_members_excluded() {
        let c = corpus(&[("p", 2000), ("q", 2000)]);
        let labels = BTreeMap::from([("p".to_owned(), labels!["Yes"])]);
        let dim = builtin_taxonomy().dimension(1).unwrap().clone();
        let scope = BTreeSet::from(["p".to_owned(), "q".to_owned()]);
        let s: TemporalSeries<Ratio<i64>> = temporal_rates(&c, &labels, &dim, &scope);
        assert_eq!((s.included, s.excluded), (1, 1));
        assert_eq!(s.overall_rate("Yes"), Some(Ratio::from_integer(1)));
    }

    #[test]
    fn split_boundary_and_fan_out() {
        let a = BTreeMap::from([
            ("p".to_owned(), labels!["Stocks"]),
            ("q".to_owned(), labels!["Stocks", "Indexes"]),
        ]);
        let b = BTreeMap::from([("p".to_owned(), labels!["1"]), ("q".to_owned(), labels!["1"])]);
        let years = BTreeMap::from([("p".to_owned(), 2014), ("q".to_owned(), 2015)]);
        let t: CooccurrenceTable<f64> = cooccurrence_pairs(&a, &b, &years, 2015, 20).unwrap();
        let s1 = t.cell("Stocks", "1").unwrap();
        assert_eq!((s1.count_before, s1.count_after), (1, 1));
        let i1 = t.cell("Indexes", "1").unwrap();
        assert_eq!((i1.count_before, i1.count_after), (0, 1));
        assert_eq!(t.cells[0].cat_a, "Stocks");
        assert_eq!(i1.share_after, Some(1.0));
    }

    #[test]
    fn empty_period_has_no_share() {
        let a = BTreeMap::from([("p".to_owned(), labels!["Stocks"])]);
        let b = BTreeMap::from([("p".to_owned(), labels!["1"])]);
        let years = BTreeMap::from([("p".to_owned(), 2020)]);
        let t: CooccurrenceTable<f64> = cooccurrence_pairs(&a, &b, &years, 2015, 5).unwrap();
        assert_eq!(t.cells[0].share_before, None);
        assert_eq!(
            t.to_csv(),
            "period,cat_a,cat_b,count,share\npre_2015,Stocks,1,0,\nfrom_2015,Stocks,1,1,1\n"
        );
        let none: BTreeMap<String, i32> = BTreeMap::new();
        assert_eq!(
            cooccurrence_pairs::<f64>(&a, &b, &none, 2015, 5),
            Err(TrendsError::NoPapers)
        );
    }
}
