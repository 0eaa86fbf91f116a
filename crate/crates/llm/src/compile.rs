//! One-shot graph compilation and repeated sampling.

use std::collections::BTreeSet;

use cdi_core::{CoherenceGraph, PropositionFile};

use crate::backend::{complete_with_retry, ChatBackend, RetryPolicy};
use crate::error::LlmError;
use crate::parse::{parse_rated_edges, rating_to_weight};
use crate::prompt::build_prompt;

/// One prompt round-trip: build the prompt, query the backend, parse the
/// rated edge list, and map ratings onto weights over exactly the input
/// labels.
pub fn compile_graph(
    file: &PropositionFile,
    backend: &dyn ChatBackend,
    retry: &RetryPolicy,
) -> Result<CoherenceGraph, LlmError> {
    let prompt = build_prompt(file)?;
    let labels = file.ids();
    let known: BTreeSet<String> = labels.iter().cloned().collect();

    let parse_attempts = retry.parse_attempts.max(1);
    let mut last_failure = None;
    for _ in 0..parse_attempts {
        let response = complete_with_retry(backend, &prompt, retry)?;
        match parse_rated_edges(&response, &known) {
            Ok(rated) => {
                let mut edges = Vec::with_capacity(rated.len());
                for edge in rated {
                    edges.push((edge.u, edge.v, rating_to_weight(edge.rating)?));
                }
                return Ok(CoherenceGraph::build(labels, edges)?);
            }
            Err(detail) => {
                last_failure = Some(LlmError::ParseFailure {
                    detail: Box::new(detail),
                    response,
                });
            }
        }
    }
    Err(last_failure.expect("at least one parse attempt"))
}

/// Successful samples in request order plus per-index failures.
#[derive(Debug)]
pub struct SampleRun {
    pub graphs: Vec<(usize, CoherenceGraph)>,
    pub failures: Vec<(usize, LlmError)>,
}

impl SampleRun {
    pub fn graphs_only(&self) -> Vec<CoherenceGraph> {
        self.graphs.iter().map(|(_, g)| g.clone()).collect()
    }
}

/// Draws `n` independent compilations. Individual failures are recorded and
/// the run continues; only a fully failed run is an error.
pub fn sample_graphs(
    file: &PropositionFile,
    backend: &dyn ChatBackend,
    n: usize,
    retry: &RetryPolicy,
) -> Result<SampleRun, LlmError> {
    assert!(n >= 1, "sample count must be at least 1");
    let mut graphs = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for index in 0..n {
        match compile_graph(file, backend, retry) {
            Ok(graph) => graphs.push((index, graph)),
            Err(e) => failures.push((index, e)),
        }
    }
    if graphs.is_empty() {
        let (_, first) = failures.remove(0);
        return Err(LlmError::AllSamplesFailed {
            n,
            first: Box::new(first),
        });
    }
    Ok(SampleRun { graphs, failures })
}
