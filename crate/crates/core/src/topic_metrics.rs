//! Topic-model scores: NPMI coherence, topic diversity and their product.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Fraction, Real};

pub const DEFAULT_TOP_WORDS: usize = 10;
/// Added to every probability before taking logarithms.
pub const NPMI_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopicError {
    #[error("invalid topics JSON: {0}")]
    Json(String),
    #[error("no topics")]
    NoTopics,
    #[error("topic {topic} has {got} words, expected {expected}")]
    RaggedTopics {
        topic: i64,
        got: usize,
        expected: usize,
    },
    #[error("coherence needs at least two words per topic")]
    TooFewWords,
    #[error("reference corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub topic: i64,
    pub words: Vec<String>,
}

/// Topics with the same number of top words each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicSet {
    pub topics: Vec<Topic>,
}

impl TopicSet {
    pub fn new(topics: Vec<Topic>) -> Result<Self, TopicError> {
        let set = TopicSet {
            topics: topics
                .into_iter()
                .map(|t| Topic {
                    topic: t.topic,
                    words: t.words.iter().map(|w| w.trim().to_lowercase()).collect(),
                })
                .collect(),
        };
        set.validate()?;
        Ok(set)
    }

    /// `[{"topic": 0, "words": [...]}, ...]`
    pub fn from_json_str(text: &str) -> Result<Self, TopicError> {
        let topics: Vec<Topic> =
            serde_json::from_str(text).map_err(|e| TopicError::Json(e.to_string()))?;
        Self::new(topics)
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        let first = self.topics.first().ok_or(TopicError::NoTopics)?;
        let n = first.words.len();
        if let Some(t) = self.topics.iter().find(|t| t.words.len() != n) {
            return Err(TopicError::RaggedTopics {
                topic: t.topic,
                got: t.words.len(),
                expected: n,
            });
        }
        Ok(())
    }

    /// Words per topic.
    pub fn n(&self) -> usize {
        self.topics.first().map_or(0, |t| t.words.len())
    }

    /// Keeps the first `n` words of every topic.
    pub fn top(&self, n: usize) -> Result<TopicSet, TopicError> {
        TopicSet::new(
            self.topics
                .iter()
                .map(|t| Topic {
                    topic: t.topic,
                    words: t.words.iter().take(n).cloned().collect(),
                })
                .collect(),
        )
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Document-level word statistics over a reference corpus. A word counts at
/// most once per document; a multi-token word such as "implied volatility"
/// occurs where its tokens appear contiguously.
#[derive(Debug, Clone)]
pub struct CorpusStats {
    docs: Vec<Vec<String>>,
    postings: HashMap<String, Vec<usize>>,
}

impl CorpusStats {
    pub fn from_documents<I, S>(documents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let docs: Vec<Vec<String>> = documents.into_iter().map(|d| tokenize(d.as_ref())).collect();
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, d) in docs.iter().enumerate() {
            for tok in d.iter().collect::<BTreeSet<_>>() {
                postings.entry(tok.clone()).or_default().push(i);
            }
        }
        CorpusStats { docs, postings }
    }

    pub fn document_count(&self) -> usize {
        self.docs.len()
    }

    /// Sorted ids of the documents containing `word`.
    pub fn documents_with(&self, word: &str) -> Vec<usize> {
        let toks = tokenize(word);
        let Some((first, rest)) = toks.split_first() else {
            return Vec::new();
        };
        let Some(base) = self.postings.get(first) else {
            return Vec::new();
        };
        if rest.is_empty() {
            return base.clone();
        }
        base.iter()
            .copied()
            .filter(|&d| self.docs[d].windows(toks.len()).any(|w| w == toks.as_slice()))
            .collect()
    }

    pub fn doc_freq(&self, word: &str) -> usize {
        self.documents_with(word).len()
    }

    pub fn co_freq(&self, a: &str, b: &str) -> usize {
        let da = self.documents_with(a);
        let db = self.documents_with(b);
        sorted_intersection_len(&da, &db)
    }
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// NPMI of one word pair from its probabilities, smoothed by
/// [`NPMI_EPSILON`] and clamped to [-1, 1]. A pair present in every
/// document scores 1.
pub fn npmi<T: Real>(p_i: T, p_j: T, p_ij: T) -> T {
    let eps = T::from_f64(NPMI_EPSILON);
    let joint = p_ij + eps;
    let denom = -joint.ln();
    if denom <= T::zero() {
        return T::one();
    }
    let pmi = (joint / ((p_i + eps) * (p_j + eps))).ln();
    (pmi / denom).max(-T::one()).min(T::one())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coherence<T> {
    pub coherence: T,
    pub per_topic: Vec<T>,
    /// Topic words that never occur in the reference corpus.
    pub missing_words: Vec<String>,
}

pub fn npmi_coherence<T: Real>(
    topics: &TopicSet,
    stats: &CorpusStats,
) -> Result<Coherence<T>, TopicError> {
    topics.validate()?;
    let n = topics.n();
    if n < 2 {
        return Err(TopicError::TooFewWords);
    }
    let docs = stats.document_count();
    if docs == 0 {
        return Err(TopicError::EmptyCorpus);
    }
    let mut missing = BTreeSet::new();
    let mut postings: HashMap<&str, Vec<usize>> = HashMap::new();
    for w in topics.topics.iter().flat_map(|t| &t.words) {
        postings.entry(w).or_insert_with(|| {
            let p = stats.documents_with(w);
            if p.is_empty() {
                missing.insert(w.clone());
            }
            p
        });
    }
    let prob = |count: usize| T::ratio(count, docs);
    let pairs = T::from_count(n * (n - 1) / 2);
    let per_topic: Vec<T> = topics
        .topics
        .iter()
        .map(|t| {
            let mut sum = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (&postings[t.words[i].as_str()], &postings[t.words[j].as_str()]);
                    sum = sum + npmi(prob(a.len()), prob(b.len()), prob(sorted_intersection_len(a, b)));
                }
            }
            sum / pairs
        })
        .collect();
    let coherence =
        per_topic.iter().fold(T::zero(), |a, &x| a + x) / T::from_count(per_topic.len());
    Ok(Coherence {
        coherence,
        per_topic,
        missing_words: missing.into_iter().collect(),
    })
}

/// Distinct words across topics over the number of word slots.
pub fn topic_diversity<T: Fraction>(topics: &TopicSet) -> Result<T, TopicError> {
    topics.validate()?;
    let distinct: BTreeSet<&str> = topics
        .topics
        .iter()
        .flat_map(|t| t.words.iter().map(String::as_str))
        .collect();
    Ok(T::ratio(distinct.len(), topics.topics.len() * topics.n()))
}

pub fn topic_quality<T: Fraction>(coherence: T, diversity: T) -> T {
    coherence * diversity
}
