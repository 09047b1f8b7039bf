//! Citation-graph analytics: PageRank, Top-N comparisons, label-filtered
//! sub-networks and rank-shift statistics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CitationEdge, Corpus};
use crate::scalar::{Fraction, Real};
use crate::taxonomy::Dimension;
use crate::LabelSet;

/// Per record, the label set on each dimension.
pub type NodeLabels = BTreeMap<String, BTreeMap<u32, LabelSet>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("edge {citing} -> {cited} references unknown node `{node}`")]
    UnknownNode {
        citing: String,
        cited: String,
        node: String,
    },
    #[error("self-citation edge on `{0}`")]
    SelfEdge(String),
    #[error("labels given for unknown node `{0}`")]
    UnlabeledNode(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid PageRank config: {0}")]
    Config(&'static str),
    #[error("requested top {n} of a table with {len} entries")]
    TopTooLarge { n: usize, len: usize },
    #[error("reference list is empty")]
    EmptyReference,
    #[error("dimension {dim} has no category `{cat}`")]
    UnknownCategory { dim: u32, cat: String },
    #[error("member `{0}` is not ranked in the global table")]
    UnknownMember(String),
    #[error("pools differ in size: {global} vs {local}")]
    PoolSize { global: usize, local: usize },
}

/// Directed citation graph over a fixed node set. Nodes are kept in
/// lexicographic id order; edges are deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
    node_labels: NodeLabels,
}

impl CitationGraph {
    pub fn new<I, S>(
        nodes: I,
        edges: &[CitationEdge],
        node_labels: NodeLabels,
    ) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = nodes
            .into_iter()
            .map(Into::into)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ids.len()];
        for e in edges {
            let lookup = |node: &str| {
                index.get(node).copied().ok_or_else(|| NetworkError::UnknownNode {
                    citing: e.citing.clone(),
                    cited: e.cited.clone(),
                    node: node.to_owned(),
                })
            };
            let (u, v) = (lookup(&e.citing)?, lookup(&e.cited)?);
            if u == v {
                return Err(NetworkError::SelfEdge(e.citing.clone()));
            }
            adj[u].insert(v);
        }
        if let Some(id) = node_labels.keys().find(|id| !index.contains_key(*id)) {
            return Err(NetworkError::UnlabeledNode(id.clone()));
        }
        let mut in_degree = vec![0; ids.len()];
        for targets in &adj {
            for &v in targets {
                in_degree[v] += 1;
            }
        }
        Ok(CitationGraph {
            ids,
            index,
            out: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            in_degree,
            node_labels,
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Edges in (citing, cited) lexicographic order.
    pub fn edges(&self) -> Vec<CitationEdge> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| {
                vs.iter().map(move |&v| CitationEdge {
                    citing: self.ids[u].clone(),
                    cited: self.ids[v].clone(),
                })
            })
            .collect()
    }

    pub fn in_degree(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| self.in_degree[i])
    }

    pub fn out_degree(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| self.out[i].len())
    }

    pub fn node_labels(&self) -> &NodeLabels {
        &self.node_labels
    }

    pub fn labels(&self, id: &str, dim_id: u32) -> Option<&LabelSet> {
        self.node_labels.get(id)?.get(&dim_id)
    }

    pub fn has_label(&self, id: &str, dim_id: u32, cat_id: &str) -> bool {
        self.labels(id, dim_id).is_some_and(|l| l.contains(cat_id))
    }

    /// `citing,cited` with a header row.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("citing,cited\n");
        for e in self.edges() {
            let _ = writeln!(out, "{},{}", csv_field(&e.citing), csv_field(&e.cited));
        }
        out
    }

    fn with_edges(&self, nodes: Vec<String>, keep: impl Fn(&str, &str) -> bool) -> CitationGraph {
        let edges: Vec<CitationEdge> = self
            .edges()
            .into_iter()
            .filter(|e| keep(&e.citing, &e.cited))
            .collect();
        let labels = self
            .node_labels
            .iter()
            .filter(|(id, _)| nodes.binary_search(id).is_ok())
            .map(|(id, l)| (id.clone(), l.clone()))
            .collect();
        CitationGraph::new(nodes, &edges, labels).expect("subset of a valid graph")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Graph over every corpus record; records without edges stay as isolated
/// nodes.
pub fn build_graph(
    corpus: &Corpus,
    edges: &[CitationEdge],
    labels: &NodeLabels,
) -> Result<CitationGraph, NetworkError> {
    CitationGraph::new(corpus.ids(), edges, labels.clone())
}

/// Keeps the edges whose citing node carries `cat_id`; every node stays a
/// potential target.
pub fn build_subnetwork(
    graph: &CitationGraph,
    dim: &Dimension,
    cat_id: &str,
) -> Result<CitationGraph, NetworkError> {
    if !dim.has_category(cat_id) {
        return Err(NetworkError::UnknownCategory {
            dim: dim.dim_id,
            cat: cat_id.to_owned(),
        });
    }
    Ok(graph.with_edges(graph.ids.clone(), |citing, _| {
        graph.has_label(citing, dim.dim_id, cat_id)
    }))
}

/// The network closed over `members`: only those nodes, and only edges
/// between two of them.
pub fn closed_subgraph(graph: &CitationGraph, members: &BTreeSet<String>) -> CitationGraph {
    let nodes: Vec<String> = graph
        .ids
        .iter()
        .filter(|id| members.contains(*id))
        .cloned()
        .collect();
    graph.with_edges(nodes, |u, v| members.contains(u) && members.contains(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig<T> {
    pub damping: T,
    /// Iteration stops once the L1 distance to the fixed point is provably
    /// below this bound.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for PageRankConfig<T> {
    fn default() -> Self {
        PageRankConfig {
            damping: T::from_f64(0.85),
            tolerance: T::from_f64(1e-10),
            max_iterations: 200,
        }
    }
}

impl<T: Real> PageRankConfig<T> {
    pub fn with_damping(damping: T) -> Self {
        PageRankConfig {
            damping,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(self.damping > T::zero() && self.damping < T::one()) {
            return Err(NetworkError::Config("damping must lie in (0, 1)"));
        }
        if !(self.tolerance > T::zero()) {
            return Err(NetworkError::Config("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(NetworkError::Config("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry<T> {
    pub record_id: String,
    pub score: T,
    pub rank: usize,
    /// Citations received, when the table came from a graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_degree: Option<usize>,
}

impl<T: Fraction> RankEntry<T> {
    /// Uncited: no incoming edges, or a zero score when the degree is
    /// unknown.
    pub fn is_uncited(&self) -> bool {
        match self.in_degree {
            Some(d) => d == 0,
            None => self.score == T::zero(),
        }
    }
}

/// Entries ordered by score descending, ties by record id ascending, with
/// ranks 1..n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable<T> {
    pub entries: Vec<RankEntry<T>>,
}

fn by_score_then_id<T: PartialOrd>(a: (&str, &T), b: (&str, &T)) -> Ordering {
    b.1.partial_cmp(a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(b.0))
}

impl<T: Fraction> RankTable<T> {
    pub fn from_scores<I, S>(scores: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
    {
        Self::from_entries(
            scores
                .into_iter()
                .map(|(id, score)| (id.into(), score, None))
                .collect(),
        )
    }

    fn from_entries(mut rows: Vec<(String, T, Option<usize>)>) -> Self {
        rows.sort_by(|a, b| by_score_then_id((&a.0, &a.1), (&b.0, &b.1)));
        RankTable {
            entries: rows
                .into_iter()
                .enumerate()
                .map(|(i, (record_id, score, in_degree))| RankEntry {
                    record_id,
                    score,
                    rank: i + 1,
                    in_degree,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.record_id.clone()).collect()
    }

    pub fn entry(&self, id: &str) -> Option<&RankEntry<T>> {
        self.entries.iter().find(|e| e.record_id == id)
    }

    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.entry(id).map(|e| e.rank)
    }

    pub fn score_of(&self, id: &str) -> Option<T> {
        self.entry(id).map(|e| e.score)
    }

    pub fn total_score(&self) -> T {
        self.entries.iter().fold(T::zero(), |a, e| a + e.score)
    }

    /// The first `n` entries.
    pub fn top_n(&self, n: usize) -> Result<RankTable<T>, NetworkError> {
        if n > self.len() {
            return Err(NetworkError::TopTooLarge { n, len: self.len() });
        }
        Ok(RankTable {
            entries: self.entries[..n].to_vec(),
        })
    }

    /// Entries whose id is in `members`, re-ranked from 1.
    pub fn restricted_to(&self, members: &BTreeSet<String>) -> RankTable<T> {
        RankTable {
            entries: self
                .entries
                .iter()
                .filter(|e| members.contains(&e.record_id))
                .enumerate()
                .map(|(i, e)| RankEntry {
                    rank: i + 1,
                    ..e.clone()
                })
                .collect(),
        }
    }

    /// `rank,record_id,score,in_degree`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,record_id,score,in_degree\n");
        for e in &self.entries {
            let _ = write!(out, "{},{},{},", e.rank, csv_field(&e.record_id), e.score);
            if let Some(d) = e.in_degree {
                let _ = write!(out, "{d}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRank<T> {
    pub table: RankTable<T>,
    pub converged: bool,
    pub iterations: usize,
}

/// Power iteration with uniform teleportation and dangling-mass
/// redistribution.
pub fn pagerank<T: Real>(
    graph: &CitationGraph,
    config: &PageRankConfig<T>,
) -> Result<PageRank<T>, NetworkError> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(NetworkError::EmptyGraph);
    }
    let nf = T::from_count(n);
    let d = config.damping;
    let teleport = (T::one() - d) / nf;
    let out_deg: Vec<T> = graph.out.iter().map(|v| T::from_count(v.len())).collect();
    // ||x_k - x*|| <= d/(1-d) ||x_k - x_{k-1}|| in L1
    let bound = d / (T::one() - d);

    let mut pr = vec![T::one() / nf; n];
    let mut next = vec![T::zero(); n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let dangling = graph
            .out
            .iter()
            .zip(&pr)
            .filter(|(o, _)| o.is_empty())
            .fold(T::zero(), |a, (_, &p)| a + p);
        let base = teleport + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for (u, targets) in graph.out.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let share = d * pr[u] / out_deg[u];
            for &v in targets {
                next[v] = next[v] + share;
            }
        }
        let change = pr
            .iter()
            .zip(&next)
            .fold(T::zero(), |a, (&x, &y)| a + (x - y).abs());
        std::mem::swap(&mut pr, &mut next);
        if bound * change < config.tolerance {
            converged = true;
            break;
        }
    }
    let total = pr.iter().fold(T::zero(), |a, &x| a + x);
    let rows = graph
        .ids
        .iter()
        .zip(pr)
        .enumerate()
        .map(|(i, (id, p))| (id.clone(), p / total, Some(graph.in_degree[i])))
        .collect();
    Ok(PageRank {
        table: RankTable::from_entries(rows),
        converged,
        iterations,
    })
}

/// `|A ∩ B| / |A|`, with `reference` as A. Lists are compared as sets.
pub fn overlap_rate<T: Fraction, S: AsRef<str>>(
    reference: &[S],
    other: &[S],
) -> Result<T, NetworkError> {
    let a: BTreeSet<&str> = reference.iter().map(AsRef::as_ref).collect();
    if a.is_empty() {
        return Err(NetworkError::EmptyReference);
    }
    let b: BTreeSet<&str> = other.iter().map(AsRef::as_ref).collect();
    Ok(T::ratio(a.intersection(&b).count(), a.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapPoint<T> {
    pub n: usize,
    /// Global ranking filtered to the member set, then cut at `n`.
    pub restricted: T,
    /// Raw global Top-`n`.
    pub unrestricted: T,
}

pub fn restricted_overlap_curve<T: Fraction>(
    global: &RankTable<T>,
    sub: &RankTable<T>,
    members: &BTreeSet<String>,
    n_values: &[usize],
) -> Result<Vec<OverlapPoint<T>>, NetworkError> {
    if let Some(m) = members.iter().find(|m| global.entry(m).is_none()) {
        return Err(NetworkError::UnknownMember(m.clone()));
    }
    let filtered = global.restricted_to(members);
    n_values
        .iter()
        .map(|&n| {
            let sub_top = sub.top_n(n)?.ids();
            Ok(OverlapPoint {
                n,
                restricted: overlap_rate(&filtered.top_n(n)?.ids(), &sub_top)?,
                unrestricted: overlap_rate(&global.top_n(n)?.ids(), &sub_top)?,
            })
        })
        .collect()
}

/// Positions of the `global_top` papers when re-ordered by `perspective`.
///
/// Papers cited from the perspective are ranked 1.. by its scores; papers it
/// never cites (or does not score) all share the lowest rank N.
pub fn rerank_within<T: Fraction>(
    global_top: &RankTable<T>,
    perspective: &RankTable<T>,
) -> BTreeMap<String, usize> {
    let n = global_top.len();
    let mut cited: Vec<(&str, T)> = Vec::new();
    let mut ranks = BTreeMap::new();
    for e in &global_top.entries {
        match perspective.entry(&e.record_id) {
            Some(p) if !p.is_uncited() => cited.push((&e.record_id, p.score)),
            _ => {
                ranks.insert(e.record_id.clone(), n);
            }
        }
    }
    cited.sort_by(|a, b| by_score_then_id((a.0, &a.1), (b.0, &b.1)));
    for (i, (id, _)) in cited.into_iter().enumerate() {
        ranks.insert(id.to_owned(), i + 1);
    }
    ranks
}

fn mean_rank<T: Fraction>(ranks: impl Iterator<Item = usize>) -> Option<T> {
    let (sum, count) = ranks.fold((0, 0), |(s, c), r| (s + r, c + 1));
    (count > 0).then(|| T::ratio(sum, count))
}

fn carries(labels: &BTreeMap<String, LabelSet>, id: &str, cat: &str) -> bool {
    labels.get(id).is_some_and(|l| l.contains(cat))
}

/// ΔR(A, B) for every perspective A (rows) and paper category B (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankShiftMatrix<T> {
    pub top_n: usize,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `None` when no Top-N paper carries the column's category.
    pub cells: Vec<Vec<Option<T>>>,
    /// Mean global rank μ per column.
    pub column_mean_rank: Vec<Option<T>>,
    /// Papers per column within the Top-N.
    pub column_count: Vec<usize>,
}

impl<T: Fraction> RankShiftMatrix<T> {
    pub fn cell(&self, row: &str, column: &str) -> Option<T> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.cells[r][c]
    }

    /// Long format: `perspective,category,delta_r,mean_global_rank,count`;
    /// undefined cells are left blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("perspective,category,delta_r,mean_global_rank,count\n");
        for (r, row) in self.rows.iter().enumerate() {
            for (c, col) in self.columns.iter().enumerate() {
                let _ = write!(out, "{},{},", csv_field(row), csv_field(col));
                if let Some(v) = self.cells[r][c] {
                    let _ = write!(out, "{}", v.to_f64());
                }
                out.push(',');
                if let Some(mu) = self.column_mean_rank[c] {
                    let _ = write!(out, "{}", mu.to_f64());
                }
                let _ = writeln!(out, ",{}", self.column_count[c]);
            }
        }
        out
    }
}

/// ΔR(A,B) = r̄_global(B) − r̄_A(B) over the B-labelled papers of the fixed
/// global Top-N. A paper carrying several categories counts in each column.
pub fn rank_shift_matrix<T: Fraction>(
    global_top: &RankTable<T>,
    perspectives: &[(String, RankTable<T>)],
    categories_b: &[String],
    labels_b: &BTreeMap<String, LabelSet>,
) -> RankShiftMatrix<T> {
    let members: Vec<Vec<&RankEntry<T>>> = categories_b
        .iter()
        .map(|b| {
            global_top
                .entries
                .iter()
                .filter(|e| carries(labels_b, &e.record_id, b))
                .collect()
        })
        .collect();
    let column_mean_rank: Vec<Option<T>> = members
        .iter()
        .map(|m| mean_rank(m.iter().map(|e| e.rank)))
        .collect();
    let cells = perspectives
        .iter()
        .map(|(_, table)| {
            let reranked = rerank_within(global_top, table);
            members
                .iter()
                .zip(&column_mean_rank)
                .map(|(m, mu)| {
                    let local: Option<T> = mean_rank(m.iter().map(|e| reranked[&e.record_id]));
                    Some(*mu.as_ref()? - local?)
                })
                .collect()
        })
        .collect();
    RankShiftMatrix {
        top_n: global_top.len(),
        rows: perspectives.iter().map(|(a, _)| a.clone()).collect(),
        columns: categories_b.to_vec(),
        cells,
        column_mean_rank,
        column_count: members.iter().map(Vec::len).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRankStats<T> {
    pub category: String,
    pub n_global: usize,
    pub n_local: usize,
    pub mean_rank_global: Option<T>,
    pub mean_rank_local: Option<T>,
    pub delta_r: Option<T>,
    pub overlap_rate: T,
}

/// Member counts and mean ranks of each category in two equally sized
/// Top-N pools. `overlap_rate` is the share of the global pool present in
/// the local one.
pub fn category_rank_stats<T: Fraction>(
    global_top: &RankTable<T>,
    local_top: &RankTable<T>,
    categories: &[String],
    labels: &BTreeMap<String, LabelSet>,
) -> Result<Vec<CategoryRankStats<T>>, NetworkError> {
    if global_top.len() != local_top.len() {
        return Err(NetworkError::PoolSize {
            global: global_top.len(),
            local: local_top.len(),
        });
    }
    let overlap: T = overlap_rate(&global_top.ids(), &local_top.ids())?;
    Ok(categories
        .iter()
        .map(|cat| {
            let pick = |t: &RankTable<T>| -> Vec<usize> {
                t.entries
                    .iter()
                    .filter(|e| carries(labels, &e.record_id, cat))
                    .map(|e| e.rank)
                    .collect()
            };
            let (g, l) = (pick(global_top), pick(local_top));
            let mg: Option<T> = mean_rank(g.iter().copied());
            let ml: Option<T> = mean_rank(l.iter().copied());
            CategoryRankStats {
                category: cat.clone(),
                n_global: g.len(),
                n_local: l.len(),
                mean_rank_global: mg,
                mean_rank_local: ml,
                delta_r: mg.zip(ml).map(|(a, b)| a - b),
                overlap_rate: overlap,
            }
        })
        .collect())
}

/// One row per category, each compared against that category's own
/// sub-network pool.
pub fn subnetwork_stats<T: Fraction>(
    global_top: &RankTable<T>,
    local_tops: &[(String, RankTable<T>)],
    labels: &BTreeMap<String, LabelSet>,
) -> Result<Vec<CategoryRankStats<T>>, NetworkError> {
    local_tops
        .iter()
        .map(|(cat, local)| {
            let mut rows =
                category_rank_stats(global_top, local, std::slice::from_ref(cat), labels)?;
            Ok(rows.remove(0))
        })
        .collect()
}
