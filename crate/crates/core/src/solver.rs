//! Exact and approximate constrained maximum-coherence cuts.
//!
//! Exact mode enumerates all complement-deduplicated bipartitions (up to
//! [`EXACT_CAP`] vertices), filters them against the constraint set, and
//! ranks by coherence. Approximate mode runs seeded simulated annealing over
//! constraint-respecting moves.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{canonical_rejected, cut_score, cut_score_mask, CoherenceGraph, Cut};

/// Largest vertex count handled by exact enumeration.
pub const EXACT_CAP: usize = 24;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("graph has {n} vertices, above the exact-mode cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("constraint names unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label {0:?} is pinned both accepted and rejected")]
    PinnedBothWays(String),
    #[error("exclusive pair ({0:?}, {0:?}) names the same label twice")]
    ExclusiveSelfPair(String),
    #[error("unsatisfiable: exclusive chain forces {a:?} and {b:?} onto the same side while requiring exactly one accepted")]
    ExclusiveConflict { a: String, b: String },
    #[error("unsatisfiable: pins on {a:?} and {b:?} contradict the exclusive chain joining them")]
    PinParityConflict { a: String, b: String },
    #[error("cut violates pins: {0:?} is pinned to the other side")]
    CutViolatesPins(String),
    #[error("cut names unknown label {0:?}")]
    CutUnknownLabel(String),
}

/// Pinned labels and exactly-one-accepted hypothesis pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub pinned_accepted: BTreeSet<String>,
    #[serde(default)]
    pub pinned_rejected: BTreeSet<String>,
    #[serde(default)]
    pub exclusive_pairs: Vec<(String, String)>,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pinned_accepted.is_empty()
            && self.pinned_rejected.is_empty()
            && self.exclusive_pairs.is_empty()
    }
}

/// Ranked list of distinct bipartitions, coherence descending, ties broken
/// by the lexicographic order of the rejected part.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCuts {
    pub cuts: Vec<Cut>,
    pub exhaustive: bool,
}

/// An exclusive-pair connected component with its relative 2-coloring.
#[derive(Debug, Clone)]
struct PairComponent {
    members: Vec<usize>,
    /// Parity of each member relative to `members[0]` (true = opposite side).
    parity: Vec<bool>,
    /// Absolute rejected-side of `members[0]` when some member is pinned.
    forced: Option<bool>,
}

/// Constraint data resolved to vertex indices.
#[derive(Debug, Clone)]
struct Prepared {
    n: usize,
    accepted_idx: Vec<usize>,
    rejected_idx: Vec<usize>,
    pair_idx: Vec<(usize, usize)>,
    components: Vec<PairComponent>,
    /// Absolute side per vertex implied by pins (true = rejected).
    pin_side: Vec<Option<bool>>,
}

impl Prepared {
    fn build(graph: &CoherenceGraph, constraints: &ConstraintSet) -> Result<Self, SolverError> {
        let n = graph.len();
        let resolve = |label: &String| {
            graph
                .label_index(label)
                .ok_or_else(|| SolverError::UnknownLabel(label.clone()))
        };

        let mut pin_side: Vec<Option<bool>> = vec![None; n];
        let mut accepted_idx = Vec::new();
        for label in &constraints.pinned_accepted {
            let i = resolve(label)?;
            pin_side[i] = Some(false);
            accepted_idx.push(i);
        }
        let mut rejected_idx = Vec::new();
        for label in &constraints.pinned_rejected {
            if constraints.pinned_accepted.contains(label) {
                return Err(SolverError::PinnedBothWays(label.clone()));
            }
            let i = resolve(label)?;
            pin_side[i] = Some(true);
            rejected_idx.push(i);
        }

        let mut pair_idx = Vec::new();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in &constraints.exclusive_pairs {
            if a == b {
                return Err(SolverError::ExclusiveSelfPair(a.clone()));
            }
            let ai = resolve(a)?;
            let bi = resolve(b)?;
            pair_idx.push((ai, bi));
            adjacency[ai].push(bi);
            adjacency[bi].push(ai);
        }

        // 2-color each exclusive component; pair members must sit on
        // opposite sides, so an odd cycle or a same-side pin pair is
        // unsatisfiable.
        let labels = graph.labels();
        let mut color: Vec<Option<bool>> = vec![None; n];
        let mut components = Vec::new();
        for start in 0..n {
            if adjacency[start].is_empty() || color[start].is_some() {
                continue;
            }
            let mut members = vec![start];
            let mut parity = vec![false];
            color[start] = Some(false);
            let mut queue = vec![start];
            while let Some(v) = queue.pop() {
                let v_color = color[v].unwrap();
                for &w in &adjacency[v] {
                    match color[w] {
                        None => {
                            color[w] = Some(!v_color);
                            members.push(w);
                            parity.push(!v_color);
                            queue.push(w);
                        }
                        Some(c) if c == v_color => {
                            return Err(SolverError::ExclusiveConflict {
                                a: labels[v].clone(),
                                b: labels[w].clone(),
                            });
                        }
                        Some(_) => {}
                    }
                }
            }
            // Pins fix the component orientation; two pins must agree.
            let mut forced: Option<bool> = None;
            let mut forcing_member: Option<usize> = None;
            for (k, &m) in members.iter().enumerate() {
                if let Some(side) = pin_side[m] {
                    let implied_root = side ^ parity[k];
                    match forced {
                        None => {
                            forced = Some(implied_root);
                            forcing_member = Some(m);
                        }
                        Some(existing) if existing != implied_root => {
                            return Err(SolverError::PinParityConflict {
                                a: labels[forcing_member.unwrap()].clone(),
                                b: labels[m].clone(),
                            });
                        }
                        Some(_) => {}
                    }
                }
            }
            components.push(PairComponent {
                members,
                parity,
                forced,
            });
        }

        Ok(Self {
            n,
            accepted_idx,
            rejected_idx,
            pair_idx,
            components,
            pin_side,
        })
    }

    fn has_pins(&self) -> bool {
        !self.accepted_idx.is_empty() || !self.rejected_idx.is_empty()
    }

    /// Does this bipartition (as a side bitmask) admit an orientation that
    /// satisfies every pin and splits every exclusive pair?
    fn mask_ok(&self, mask: u32) -> bool {
        let bit = |v: usize| mask >> v & 1;
        if let Some((&first, rest)) = self.accepted_idx.split_first() {
            let b = bit(first);
            if rest.iter().any(|&v| bit(v) != b) {
                return false;
            }
        }
        if let Some((&first, rest)) = self.rejected_idx.split_first() {
            let b = bit(first);
            if rest.iter().any(|&v| bit(v) != b) {
                return false;
            }
        }
        if let (Some(&a), Some(&r)) = (self.accepted_idx.first(), self.rejected_idx.first()) {
            if bit(a) == bit(r) {
                return false;
            }
        }
        self.pair_idx.iter().all(|&(a, b)| bit(a) != bit(b))
    }

    /// The rejected part of a feasible bipartition as a bitmask. Pins decide
    /// the orientation; otherwise the canonical smaller part is rejected.
    fn rejected_mask(&self, mask: u32, lex: &LexOrder) -> u32 {
        let full = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        let complement = !mask & full;
        if let Some(&a) = self.accepted_idx.first() {
            return if mask >> a & 1 == 1 { complement } else { mask };
        }
        if let Some(&r) = self.rejected_idx.first() {
            return if mask >> r & 1 == 1 { mask } else { complement };
        }
        let ones = mask.count_ones() as usize;
        match (2 * ones).cmp(&self.n) {
            Ordering::Less => mask,
            Ordering::Greater => complement,
            Ordering::Equal => {
                if lex.key(mask) <= lex.key(complement) {
                    mask
                } else {
                    complement
                }
            }
        }
    }
}

/// Label lexicographic ranks for tie-breaking on rejected parts.
struct LexOrder {
    /// lexicographic rank -> vertex index
    vertex_at: Vec<usize>,
}

impl LexOrder {
    fn new(graph: &CoherenceGraph) -> Self {
        let mut order: Vec<usize> = (0..graph.len()).collect();
        order.sort_by(|&a, &b| graph.labels()[a].cmp(&graph.labels()[b]));
        Self { vertex_at: order }
    }

    /// Sorted lex ranks of the vertices in `mask`; comparing two keys
    /// compares the label sequences lexicographically.
    fn key(&self, mask: u32) -> Vec<u16> {
        let mut key = Vec::with_capacity(mask.count_ones() as usize);
        for (rank, &v) in self.vertex_at.iter().enumerate() {
            if mask >> v & 1 == 1 {
                key.push(rank as u16);
            }
        }
        key
    }
}

#[derive(Debug, Clone)]
struct RankEntry {
    score: f64,
    key: Vec<u16>,
    rejected: u32,
}

/// Ranking order: coherence descending, then rejected part ascending.
fn rank_cmp(a: &RankEntry, b: &RankEntry) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key))
}

/// Heap wrapper keeping the worst-ranked entry on top: the max-heap order
/// is rank order itself, so the maximum is the entry ranked last.
#[derive(Debug, Clone)]
struct WorstFirst(RankEntry);

impl PartialEq for WorstFirst {
    fn eq(&self, other: &Self) -> bool {
        rank_cmp(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for WorstFirst {}
impl PartialOrd for WorstFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for WorstFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_cmp(&self.0, &other.0)
    }
}

fn materialize(graph: &CoherenceGraph, entry: &RankEntry) -> Cut {
    let rejected: BTreeSet<String> = (0..graph.len())
        .filter(|&v| entry.rejected >> v & 1 == 1)
        .map(|v| graph.labels()[v].clone())
        .collect();
    Cut::new(rejected, entry.score)
}

/// Enumerates all complement-deduplicated bipartitions, filters by the
/// constraints, and returns the `limit` best in rank order. The trivial
/// bipartition with an empty part is included (and survives whenever the
/// constraints allow it).
pub fn enumerate_cuts(
    graph: &CoherenceGraph,
    constraints: &ConstraintSet,
    limit: usize,
) -> Result<RankedCuts, SolverError> {
    let n = graph.len();
    if n > EXACT_CAP {
        return Err(SolverError::TooLarge { n, cap: EXACT_CAP });
    }
    let prepared = Prepared::build(graph, constraints)?;
    if n == 0 || limit == 0 {
        return Ok(RankedCuts {
            cuts: Vec::new(),
            exhaustive: true,
        });
    }
    let edges = graph.indexed_edges();
    let lex = LexOrder::new(graph);

    let mut heap: BinaryHeap<WorstFirst> = BinaryHeap::with_capacity(limit + 1);
    for half in 0u64..(1u64 << (n - 1)) {
        let mask = (half << 1) as u32;
        if !prepared.mask_ok(mask) {
            continue;
        }
        let score = cut_score_mask(&edges, mask);
        if heap.len() == limit {
            let worst = &heap.peek().unwrap().0;
            if score < worst.score {
                continue;
            }
        }
        let rejected = prepared.rejected_mask(mask, &lex);
        let entry = RankEntry {
            score,
            key: lex.key(rejected),
            rejected,
        };
        if heap.len() < limit {
            heap.push(WorstFirst(entry));
        } else if rank_cmp(&entry, &heap.peek().unwrap().0) == Ordering::Less {
            heap.pop();
            heap.push(WorstFirst(entry));
        }
    }

    let mut entries: Vec<RankEntry> = heap.into_iter().map(|w| w.0).collect();
    entries.sort_by(rank_cmp);
    let cuts = entries.iter().map(|e| materialize(graph, e)).collect();
    Ok(RankedCuts {
        cuts,
        exhaustive: true,
    })
}

/// All cuts achieving the maximum coherence under the constraints, in
/// canonical order.
pub fn optimal_cuts(
    graph: &CoherenceGraph,
    constraints: &ConstraintSet,
) -> Result<Vec<Cut>, SolverError> {
    let n = graph.len();
    if n > EXACT_CAP {
        return Err(SolverError::TooLarge { n, cap: EXACT_CAP });
    }
    let prepared = Prepared::build(graph, constraints)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let edges = graph.indexed_edges();
    let lex = LexOrder::new(graph);

    let mut best: Option<f64> = None;
    let mut masks: Vec<u32> = Vec::new();
    for half in 0u64..(1u64 << (n - 1)) {
        let mask = (half << 1) as u32;
        if !prepared.mask_ok(mask) {
            continue;
        }
        let score = cut_score_mask(&edges, mask);
        match best {
            None => {
                best = Some(score);
                masks.push(mask);
            }
            Some(b) => match score.total_cmp(&b) {
                Ordering::Greater => {
                    best = Some(score);
                    masks.clear();
                    masks.push(mask);
                }
                Ordering::Equal => masks.push(mask),
                Ordering::Less => {}
            },
        }
    }

    let score = best.expect("satisfiable constraints leave at least one bipartition");
    let mut entries: Vec<RankEntry> = masks
        .into_iter()
        .map(|mask| {
            let rejected = prepared.rejected_mask(mask, &lex);
            RankEntry {
                score,
                key: lex.key(rejected),
                rejected,
            }
        })
        .collect();
    entries.sort_by(rank_cmp);
    Ok(entries.iter().map(|e| materialize(graph, e)).collect())
}

/// Simulated-annealing schedule and restart parameters.
#[derive(Debug, Clone)]
pub struct AnnealParams {
    pub initial_temp: f64,
    pub final_temp: f64,
    pub cooling: f64,
    /// Proposed moves per temperature step, multiplied by the vertex count.
    pub moves_per_vertex: usize,
    pub restarts: usize,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            initial_temp: 2.5,
            final_temp: 1e-3,
            cooling: 0.92,
            moves_per_vertex: 40,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    FlipVertex(usize),
    FlipComponent(usize),
}

/// Seeded simulated annealing over constraint-respecting moves: single
/// flips of unconstrained vertices and whole-component flips of exclusive
/// chains. Returns the best cut seen, never worse than the feasible
/// initial assignment.
pub fn anneal_max_cut(
    graph: &CoherenceGraph,
    constraints: &ConstraintSet,
    params: &AnnealParams,
    seed: u64,
) -> Result<Cut, SolverError> {
    let n = graph.len();
    let prepared = Prepared::build(graph, constraints)?;
    let edges = graph.indexed_edges();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, w) in &edges {
        adj[i as usize].push((j as usize, w));
        adj[j as usize].push((i as usize, w));
    }

    let in_component: BTreeSet<usize> = prepared
        .components
        .iter()
        .flat_map(|c| c.members.iter().copied())
        .collect();
    let mut moves: Vec<Move> = Vec::new();
    for v in 0..n {
        if prepared.pin_side[v].is_none() && !in_component.contains(&v) {
            moves.push(Move::FlipVertex(v));
        }
    }
    for (ci, component) in prepared.components.iter().enumerate() {
        if component.forced.is_none() {
            moves.push(Move::FlipComponent(ci));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = |rng: &mut ChaCha8Rng| -> Vec<bool> {
        let mut side = vec![false; n];
        for (v, slot) in side.iter_mut().enumerate() {
            *slot = match prepared.pin_side[v] {
                Some(s) => s,
                None if in_component.contains(&v) => false, // set below
                None => rng.random(),
            };
        }
        for component in &prepared.components {
            let root = component.forced.unwrap_or_else(|| rng.random());
            for (k, &m) in component.members.iter().enumerate() {
                side[m] = root ^ component.parity[k];
            }
        }
        side
    };

    let mut best_state = initial(&mut rng);
    let mut best_score = cut_score(&edges, &best_state);

    if !moves.is_empty() {
        let mut in_set = vec![false; n];
        for _ in 0..params.restarts {
            let mut side = initial(&mut rng);
            let mut current = cut_score(&edges, &side);
            if current > best_score {
                best_score = current;
                best_state = side.clone();
            }
            let mut temp = params.initial_temp;
            while temp > params.final_temp {
                for _ in 0..params.moves_per_vertex * n.max(1) {
                    let chosen = moves[rng.random_range(0..moves.len())];
                    let members: &[usize] = match chosen {
                        Move::FlipVertex(ref v) => std::slice::from_ref(v),
                        Move::FlipComponent(ci) => &prepared.components[ci].members,
                    };
                    for &m in members {
                        in_set[m] = true;
                    }
                    let mut delta = 0.0;
                    for &m in members {
                        for &(y, w) in &adj[m] {
                            if in_set[y] {
                                continue;
                            }
                            delta += if side[m] != side[y] { w } else { -w };
                        }
                    }
                    let accept = delta >= 0.0 || rng.random::<f64>() < (delta / temp).exp();
                    if accept {
                        for &m in members {
                            side[m] = !side[m];
                        }
                        current += delta;
                        if current > best_score {
                            // Re-score exactly before adopting, to keep the
                            // reported value free of incremental drift.
                            let exact = cut_score(&edges, &side);
                            if exact > best_score {
                                best_score = exact;
                                best_state = side.clone();
                            }
                            current = exact;
                        }
                    }
                    for &m in members {
                        in_set[m] = false;
                    }
                }
                current = cut_score(&edges, &side);
                temp *= params.cooling;
            }
        }
    }

    let part: BTreeSet<String> = (0..n)
        .filter(|&v| best_state[v])
        .map(|v| graph.labels()[v].clone())
        .collect();
    let rejected = if prepared.has_pins() {
        part
    } else {
        canonical_rejected(graph.labels(), &part)
    };
    Ok(Cut::new(rejected, best_score))
}

/// Splits a cut into accepted and rejected label sets. The part holding the
/// pinned-accepted labels is accepted; with no pins the canonical smaller
/// part is rejected.
pub fn accepted_rejected(
    cut: &Cut,
    constraints: &ConstraintSet,
    graph: &CoherenceGraph,
) -> Result<(BTreeSet<String>, BTreeSet<String>), SolverError> {
    for label in &cut.rejected {
        if !graph.contains(label) {
            return Err(SolverError::CutUnknownLabel(label.clone()));
        }
    }
    let part_r = cut.rejected.clone();
    let part_a: BTreeSet<String> = graph
        .labels()
        .iter()
        .filter(|l| !part_r.contains(*l))
        .cloned()
        .collect();

    if constraints.pinned_accepted.is_empty() && constraints.pinned_rejected.is_empty() {
        let rejected = canonical_rejected(graph.labels(), &part_r);
        let accepted = graph
            .labels()
            .iter()
            .filter(|l| !rejected.contains(*l))
            .cloned()
            .collect();
        return Ok((accepted, rejected));
    }

    let fits = |accepted: &BTreeSet<String>, rejected: &BTreeSet<String>| -> Result<(), String> {
        for label in &constraints.pinned_accepted {
            if !accepted.contains(label) {
                return Err(label.clone());
            }
        }
        for label in &constraints.pinned_rejected {
            if !rejected.contains(label) {
                return Err(label.clone());
            }
        }
        Ok(())
    };
    match fits(&part_a, &part_r) {
        Ok(()) => Ok((part_a, part_r)),
        Err(first_offender) => match fits(&part_r, &part_a) {
            Ok(()) => Ok((part_r, part_a)),
            Err(_) => Err(SolverError::CutViolatesPins(first_offender)),
        },
    }
}
