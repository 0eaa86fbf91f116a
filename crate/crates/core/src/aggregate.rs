//! Elementwise-median aggregation of repeated graph samples and L1
//! convergence profiling over random subsamples.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{CoherenceGraph, GraphError};

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("need at least one sample")]
    Empty,
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("exhaustive profiling over {subsets} subsets exceeds the cap of {cap}")]
    TooManySubsets { subsets: u128, cap: u128 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Median of a value list; even counts take the midpoint of the two central
/// values.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty list");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn check_same_labels(samples: &[CoherenceGraph]) -> Result<(), AggregateError> {
    let first: BTreeSet<&String> = samples[0].labels().iter().collect();
    for g in &samples[1..] {
        let other: BTreeSet<&String> = g.labels().iter().collect();
        if let Some(diff) = first.symmetric_difference(&other).next() {
            return Err(GraphError::LabelSetMismatch((*diff).clone()).into());
        }
    }
    Ok(())
}

/// Elementwise median of the sample adjacency matrices, absent edges reading
/// as 0. Pairs whose median is 0 are omitted from the edge set.
pub fn median_graph(samples: &[CoherenceGraph]) -> Result<CoherenceGraph, AggregateError> {
    if samples.is_empty() {
        return Err(AggregateError::Empty);
    }
    check_same_labels(samples)?;
    let labels = samples[0].labels().to_vec();
    let mut edges = Vec::new();
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            let values: Vec<f64> = samples
                .iter()
                .map(|g| g.weight(&labels[i], &labels[j]))
                .collect();
            let m = median(&values);
            if m != 0.0 {
                edges.push((labels[i].clone(), labels[j].clone(), m));
            }
        }
    }
    Ok(CoherenceGraph::build(labels, edges)?)
}

/// Distances of subsample medians from the full median, grouped by
/// subsample size n = 1..N.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceProfile {
    pub per_n: Vec<SubsampleDistances>,
    /// Subsamples drawn per n; 0 when the profile was built exhaustively.
    pub trials: usize,
    pub seed: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleDistances {
    pub n: usize,
    pub distances: Vec<f64>,
}

impl ConvergenceProfile {
    /// (n, min, median, max) rows in ascending n.
    pub fn summary(&self) -> Vec<(usize, f64, f64, f64)> {
        self.per_n
            .iter()
            .map(|row| {
                let min = row.distances.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = row
                    .distances
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                (row.n, min, median(&row.distances), max)
            })
            .collect()
    }

    pub fn median_at(&self, n: usize) -> Option<f64> {
        self.per_n
            .iter()
            .find(|row| row.n == n)
            .map(|row| median(&row.distances))
    }

    pub fn max_n(&self) -> usize {
        self.per_n.last().map(|row| row.n).unwrap_or(0)
    }
}

fn mix_seed(seed: u64, n: usize, trial: usize) -> u64 {
    // splitmix64 over the (seed, n, trial) triple so each trial owns an
    // independent stream regardless of evaluation schedule.
    let mut z = seed
        .wrapping_add((n as u64) << 32)
        .wrapping_add(trial as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// For each n in 1..N, draws `trials` uniform n-subsets of the samples
/// (without replacement within a subset) and records the L1 distance from
/// the subset median to the full median. Deterministic given the seed.
pub fn convergence_profile(
    samples: &[CoherenceGraph],
    trials: usize,
    seed: u64,
) -> Result<ConvergenceProfile, AggregateError> {
    if samples.len() < 2 {
        return Err(AggregateError::TooFewSamples(samples.len()));
    }
    if trials == 0 {
        return Err(AggregateError::NoTrials);
    }
    let full = median_graph(samples)?;
    let total = samples.len();
    let mut per_n = Vec::with_capacity(total);
    for n in 1..=total {
        let mut distances = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, n, trial));
            let chosen = rand::seq::index::sample(&mut rng, total, n);
            let subset: Vec<CoherenceGraph> = chosen.iter().map(|i| samples[i].clone()).collect();
            let sub_median = median_graph(&subset)?;
            distances.push(sub_median.l1_distance(&full)?);
        }
        per_n.push(SubsampleDistances { n, distances });
    }
    Ok(ConvergenceProfile {
        per_n,
        trials,
        seed,
        exhaustive: false,
    })
}

const EXHAUSTIVE_SUBSET_CAP: u128 = 1_000_000;

/// Like [`convergence_profile`] but enumerating every n-subset instead of
/// sampling. Errors when the total subset count exceeds a safety cap.
pub fn convergence_profile_exhaustive(
    samples: &[CoherenceGraph],
) -> Result<ConvergenceProfile, AggregateError> {
    if samples.len() < 2 {
        return Err(AggregateError::TooFewSamples(samples.len()));
    }
    let total = samples.len();
    let subsets: u128 = (1u128 << total) - 1;
    if subsets > EXHAUSTIVE_SUBSET_CAP {
        return Err(AggregateError::TooManySubsets {
            subsets,
            cap: EXHAUSTIVE_SUBSET_CAP,
        });
    }
    let full = median_graph(samples)?;
    let mut per_n: Vec<SubsampleDistances> = (1..=total)
        .map(|n| SubsampleDistances {
            n,
            distances: Vec::new(),
        })
        .collect();
    for mask in 1u64..(1 << total) {
        let subset: Vec<CoherenceGraph> = (0..total)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| samples[i].clone())
            .collect();
        let n = subset.len();
        let sub_median = median_graph(&subset)?;
        per_n[n - 1].distances.push(sub_median.l1_distance(&full)?);
    }
    Ok(ConvergenceProfile {
        per_n,
        trials: 0,
        seed: 0,
        exhaustive: true,
    })
}

/// Outcome of the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSizeChoice {
    pub n: usize,
    pub converged: bool,
}

/// Smallest n whose median distance drops below `fraction` times the median
/// distance at n = 1. Falls back to N, flagged non-converged, when the
/// threshold is never reached.
pub fn pick_sample_size(
    profile: &ConvergenceProfile,
    fraction: f64,
) -> Result<SampleSizeChoice, AggregateError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(AggregateError::BadFraction(fraction));
    }
    if profile.per_n.is_empty() {
        return Err(AggregateError::Empty);
    }
    let baseline = median(&profile.per_n[0].distances);
    if baseline == 0.0 {
        return Ok(SampleSizeChoice {
            n: 1,
            converged: true,
        });
    }
    let threshold = fraction * baseline;
    for row in &profile.per_n {
        if median(&row.distances) < threshold {
            return Ok(SampleSizeChoice {
                n: row.n,
                converged: true,
            });
        }
    }
    Ok(SampleSizeChoice {
        n: profile.max_n(),
        converged: false,
    })
}

/// Raw profile rows as `n,trial,distance` CSV.
pub fn profile_csv(profile: &ConvergenceProfile) -> String {
    let mut out = String::from("n,trial,distance\n");
    for row in &profile.per_n {
        for (trial, d) in row.distances.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", row.n, trial, d);
        }
    }
    out
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Per-n quartile summary as `n,min,q1,median,q3,max` CSV.
pub fn summary_csv(profile: &ConvergenceProfile) -> String {
    let mut out = String::from("n,min,q1,median,q3,max\n");
    for row in &profile.per_n {
        let mut sorted = row.distances.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.n,
            sorted[0],
            quantile(&sorted, 0.25),
            quantile(&sorted, 0.5),
            quantile(&sorted, 0.75),
            sorted[sorted.len() - 1],
        );
    }
    out
}
