//! Coherence graphs: symmetric weighted adjacency over proposition labels,
//! the cut coherence objective, L1 distance, and serialization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("label {0:?} is empty or contains whitespace/quote characters")]
    BadLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge ({0:?}, {1:?})")]
    DuplicateEdge(String, String),
    #[error("weight {w} on ({u:?}, {v:?}) outside [-1, 1]")]
    WeightOutOfRange { u: String, v: String, w: f64 },
    #[error("label sets differ: {0:?} present on one side only")]
    LabelSetMismatch(String),
    #[error("malformed graph document: {0}")]
    Malformed(String),
}

/// An undirected edge with both endpoints resolved to labels, `u < v`
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub w: f64,
}

/// Immutable weighted coherence graph. Vertices are proposition labels,
/// weights lie in [-1, 1], an absent edge reads as weight 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    // Keyed by (min, max) vertex index; kept sorted so every scoring pass
    // sums edges in the same order.
    weights: BTreeMap<(usize, usize), f64>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || c == '"' || c == '\'' || c == ',')
}

impl CoherenceGraph {
    /// Builds a graph from an ordered label list and an edge list.
    pub fn build<I>(labels: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if !valid_label(label) {
                return Err(GraphError::BadLabel(label.clone()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        let mut weights = BTreeMap::new();
        for (u, v, w) in edges {
            let &ui = index
                .get(&u)
                .ok_or_else(|| GraphError::UnknownLabel(u.clone()))?;
            let &vi = index
                .get(&v)
                .ok_or_else(|| GraphError::UnknownLabel(v.clone()))?;
            if ui == vi {
                return Err(GraphError::SelfLoop(u));
            }
            if !w.is_finite() || !(-1.0..=1.0).contains(&w) {
                return Err(GraphError::WeightOutOfRange { u, v, w });
            }
            let key = (ui.min(vi), ui.max(vi));
            if weights.insert(key, w).is_some() {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(Self {
            labels,
            index,
            weights,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    /// Weight of the pair, 0.0 when the edge is absent or a label unknown.
    pub fn weight(&self, u: &str, v: &str) -> f64 {
        match (self.index.get(u), self.index.get(v)) {
            (Some(&ui), Some(&vi)) if ui != vi => self
                .weights
                .get(&(ui.min(vi), ui.max(vi)))
                .copied()
                .unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Edges sorted by label pair, each normalized to `u < v` lexicographically.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .weights
            .iter()
            .map(|(&(i, j), &w)| {
                let (a, b) = (&self.labels[i], &self.labels[j]);
                let (u, v) = if a < b { (a, b) } else { (b, a) };
                Edge {
                    u: u.clone(),
                    v: v.clone(),
                    w,
                }
            })
            .collect();
        out.sort_by(|a, b| (&a.u, &a.v).cmp(&(&b.u, &b.v)));
        out
    }

    /// Edges as index pairs in the fixed scoring order.
    pub(crate) fn indexed_edges(&self) -> Vec<(u32, u32, f64)> {
        self.weights
            .iter()
            .map(|(&(i, j), &w)| (i as u32, j as u32, w))
            .collect()
    }

    pub(crate) fn label_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Coherence of the bipartition separating `part` from its complement:
    /// the negative sum of weights on crossing edges. Symmetric in `part`
    /// versus complement.
    pub fn coherence(&self, part: &BTreeSet<String>) -> Result<f64, GraphError> {
        let mut side = vec![false; self.labels.len()];
        for label in part {
            let &i = self
                .index
                .get(label)
                .ok_or_else(|| GraphError::UnknownLabel(label.clone()))?;
            side[i] = true;
        }
        let edges = self.indexed_edges();
        Ok(cut_score(&edges, &side))
    }

    /// L1 distance between adjacency matrices: the sum of |w1 - w2| over all
    /// unordered label pairs, absent edges reading as 0.
    pub fn l1_distance(&self, other: &CoherenceGraph) -> Result<f64, GraphError> {
        let mine: BTreeSet<&String> = self.labels.iter().collect();
        let theirs: BTreeSet<&String> = other.labels.iter().collect();
        if let Some(missing) = mine.symmetric_difference(&theirs).next() {
            return Err(GraphError::LabelSetMismatch((*missing).clone()));
        }
        let sorted: Vec<&String> = mine.into_iter().collect();
        let mut total = 0.0;
        for (a, u) in sorted.iter().enumerate() {
            for v in &sorted[a + 1..] {
                total += (self.weight(u, v) - other.weight(u, v)).abs();
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            labels: self.labels.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeDoc {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("graph document serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        Self::build(doc.labels, doc.edges.into_iter().map(|e| (e.u, e.v, e.w)))
    }

    /// Renders the graph as a DOT document. Positive weights are solid,
    /// negative dashed, explicit zeros dotted. When a cut is given, vertices
    /// in its rejected part are filled.
    pub fn to_dot(&self, cut: Option<&Cut>) -> String {
        let mut out = String::from("graph coherence {\n");
        for label in &self.labels {
            let rejected = cut.map(|c| c.rejected.contains(label)).unwrap_or(false);
            if rejected {
                let _ = writeln!(out, "  \"{label}\" [style=filled, fillcolor=lightgray];");
            } else {
                let _ = writeln!(out, "  \"{label}\";");
            }
        }
        for e in self.edges() {
            let (style, color) = if e.w > 0.0 {
                ("solid", "blue")
            } else if e.w < 0.0 {
                ("dashed", "red")
            } else {
                ("dotted", "gray")
            };
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [label=\"{}\", style={}, color={}];",
                e.u, e.v, e.w, style, color
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Cut coherence for a side assignment, summed in fixed edge order so exact
/// and heuristic solvers score identically.
pub(crate) fn cut_score(edges: &[(u32, u32, f64)], side: &[bool]) -> f64 {
    let mut score = 0.0;
    for &(i, j, w) in edges {
        if side[i as usize] != side[j as usize] {
            score -= w;
        }
    }
    score
}

/// Same objective over a bitmask side assignment. Must subtract in the same
/// edge order as [`cut_score`] so both paths agree bit for bit.
pub(crate) fn cut_score_mask(edges: &[(u32, u32, f64)], mask: u32) -> f64 {
    let mut score = 0.0;
    for &(i, j, w) in edges {
        if (mask >> i ^ mask >> j) & 1 == 1 {
            score -= w;
        }
    }
    score
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    labels: Vec<String>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDoc {
    u: String,
    v: String,
    w: f64,
}

/// A bipartition represented by its rejected part together with its
/// coherence value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub rejected: BTreeSet<String>,
    pub coherence: f64,
}

impl Cut {
    pub fn new(rejected: BTreeSet<String>, coherence: f64) -> Self {
        Self {
            rejected,
            coherence,
        }
    }

    pub fn accepted(&self, labels: &[String]) -> BTreeSet<String> {
        labels
            .iter()
            .filter(|l| !self.rejected.contains(*l))
            .cloned()
            .collect()
    }
}

/// Canonical orientation for an unpinned cut: of the two complementary
/// parts the smaller one is rejected, ties going to the lexicographically
/// smaller part. The empty part is always the rejected one of a trivial cut.
pub fn canonical_rejected(labels: &[String], part: &BTreeSet<String>) -> BTreeSet<String> {
    let complement: BTreeSet<String> = labels
        .iter()
        .filter(|l| !part.contains(*l))
        .cloned()
        .collect();
    match part.len().cmp(&complement.len()) {
        std::cmp::Ordering::Less => part.clone(),
        std::cmp::Ordering::Greater => complement,
        std::cmp::Ordering::Equal => {
            if *part <= complement {
                part.clone()
            } else {
                complement
            }
        }
    }
}
