//! Acceptance suite. Each test covers one numbered criterion and prints a
//! `criterion N: pass` line on success; the harness line itself is the
//! pass/fail record.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cdi_core::aggregate::{
    convergence_profile, convergence_profile_exhaustive, median, median_graph, pick_sample_size,
    ConvergenceProfile, SampleSizeChoice, SubsampleDistances,
};
use cdi_core::gibbs::{defining_residual, gibbs_weights, solve_beta, EnergySpectrum};
use cdi_core::outcome::{format_table, mixture, table_from_rejection, OutcomeSpace};
use cdi_core::solver::{anneal_max_cut, enumerate_cuts, optimal_cuts, AnnealParams};
use cdi_core::{CoherenceGraph, ConstraintSet, Cut};
use cdi_llm::{build_prompt, parse_rated_edges, rating_to_weight};

use common::{cdi, fixtures, stderr};

fn set(labels: &[&str]) -> BTreeSet<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

fn triangle() -> CoherenceGraph {
    CoherenceGraph::build(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            ("a".into(), "b".into(), 1.0),
            ("a".into(), "c".into(), -1.0),
            ("b".into(), "c".into(), -1.0),
        ],
    )
    .unwrap()
}

#[test]
fn acceptance_01_figure_one_oracle() {
    let graph = triangle();
    let start = Instant::now();
    let ac = graph.coherence(&set(&["a", "c"])).unwrap();
    let c = graph.coherence(&set(&["c"])).unwrap();
    let optima = optimal_cuts(&graph, &ConstraintSet::empty()).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(ac, 0.0);
    assert_eq!(c, 2.0);
    assert_eq!(optima.len(), 1, "optimum must be unique");
    assert_eq!(optima[0].rejected, set(&["c"]));
    assert_eq!(optima[0].coherence, 2.0);
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    println!("criterion 1: pass (coherence oracle exact, solved in {elapsed:?})");
}

/// Test-local brute force: every bipartition by mask, scored through the
/// public coherence operation, oriented and ranked by the documented rules.
struct OracleCut {
    rejected: Vec<String>,
    coherence: f64,
}

fn oracle_rank(mut cuts: Vec<OracleCut>) -> Vec<OracleCut> {
    cuts.sort_by(|a, b| {
        b.coherence
            .total_cmp(&a.coherence)
            .then_with(|| a.rejected.cmp(&b.rejected))
    });
    cuts
}

fn oracle_orient(
    graph: &CoherenceGraph,
    part: &BTreeSet<String>,
    constraints: &ConstraintSet,
) -> Option<Vec<String>> {
    let complement: BTreeSet<String> = graph
        .labels()
        .iter()
        .filter(|l| !part.contains(*l))
        .cloned()
        .collect();
    for (a, b) in &constraints.exclusive_pairs {
        if part.contains(a) == part.contains(b) {
            return None;
        }
    }
    let fits = |accepted: &BTreeSet<String>, rejected: &BTreeSet<String>| {
        constraints
            .pinned_accepted
            .iter()
            .all(|l| accepted.contains(l))
            && constraints
                .pinned_rejected
                .iter()
                .all(|l| rejected.contains(l))
    };
    let no_pins = constraints.pinned_accepted.is_empty() && constraints.pinned_rejected.is_empty();
    if no_pins {
        // Canonical orientation: smaller part rejected, lexicographic ties.
        let rejected = match part.len().cmp(&complement.len()) {
            std::cmp::Ordering::Less => part,
            std::cmp::Ordering::Greater => &complement,
            std::cmp::Ordering::Equal => {
                if *part <= complement {
                    part
                } else {
                    &complement
                }
            }
        };
        return Some(rejected.iter().cloned().collect());
    }
    if fits(&complement, part) {
        return Some(part.iter().cloned().collect());
    }
    if fits(part, &complement) {
        return Some(complement.iter().cloned().collect());
    }
    None
}

fn oracle_cuts(graph: &CoherenceGraph, constraints: &ConstraintSet) -> Vec<OracleCut> {
    let labels = graph.labels();
    let n = labels.len();
    let mut cuts = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask & 1 != 0 {
            continue; // complement-deduplicate: vertex 0 stays on side 0
        }
        let part: BTreeSet<String> = labels
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        let Some(rejected) = oracle_orient(graph, &part, constraints) else {
            continue;
        };
        let coherence = graph.coherence(&part).unwrap();
        cuts.push(OracleCut {
            rejected,
            coherence,
        });
    }
    oracle_rank(cuts)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> CoherenceGraph {
    let labels: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = levels[rng.random_range(0..levels.len())];
            if w != 0.0 {
                edges.push((labels[i].clone(), labels[j].clone(), w));
            }
        }
    }
    CoherenceGraph::build(labels, edges).unwrap()
}

fn assert_lists_match(ranked: &[Cut], oracle: &[OracleCut], context: &str) {
    assert_eq!(ranked.len(), oracle.len(), "{context}: list lengths differ");
    for (i, (got, want)) in ranked.iter().zip(oracle).enumerate() {
        let got_labels: Vec<String> = got.rejected.iter().cloned().collect();
        assert_eq!(
            got_labels, want.rejected,
            "{context}: rejected part at rank {i}"
        );
        assert_eq!(
            got.coherence, want.coherence,
            "{context}: coherence at rank {i}"
        );
    }
}

#[test]
fn acceptance_02_exact_solver_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_202);
    for instance in 0..200 {
        let n = rng.random_range(4..=12);
        let graph = random_graph(&mut rng, n);
        let all = 1usize << (n - 1);

        let unconstrained = enumerate_cuts(&graph, &ConstraintSet::empty(), all).unwrap();
        assert!(unconstrained.exhaustive);
        let oracle_plain = oracle_cuts(&graph, &ConstraintSet::empty());
        assert_lists_match(
            &unconstrained.cuts,
            &oracle_plain,
            &format!("instance {instance} unconstrained"),
        );

        // A bounded keep-list must be the prefix of the full ranking.
        let limit = rng.random_range(1..=all);
        let truncated = enumerate_cuts(&graph, &ConstraintSet::empty(), limit).unwrap();
        assert_lists_match(
            &truncated.cuts,
            &oracle_plain[..limit],
            &format!("instance {instance} truncated to {limit}"),
        );

        // Random pins plus one exclusive pair, satisfiable by construction.
        let labels = graph.labels().to_vec();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut constraints = ConstraintSet::empty();
        constraints.pinned_accepted.insert(labels[order[0]].clone());
        if rng.random::<bool>() {
            constraints.pinned_rejected.insert(labels[order[1]].clone());
        }
        constraints
            .exclusive_pairs
            .push((labels[order[2]].clone(), labels[order[3]].clone()));

        let constrained = enumerate_cuts(&graph, &constraints, all).unwrap();
        let oracle_filtered = oracle_cuts(&graph, &constraints);
        assert_lists_match(
            &constrained.cuts,
            &oracle_filtered,
            &format!("instance {instance} constrained"),
        );

        // Post-hoc filtering of the solver's own unconstrained list must
        // agree with constrained enumeration.
        let post_hoc = oracle_rank(
            unconstrained
                .cuts
                .iter()
                .filter_map(|cut| {
                    oracle_orient(&graph, &cut.rejected, &constraints).map(|rejected| OracleCut {
                        rejected,
                        coherence: cut.coherence,
                    })
                })
                .collect(),
        );
        assert_lists_match(
            &constrained.cuts,
            &post_hoc,
            &format!("instance {instance} post-hoc"),
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 2: pass (200 instances, exact ranking == brute force, {elapsed:?})");
}

#[test]
fn acceptance_03_annealer_matches_exact_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut hits = 0;
    for instance in 0..100u64 {
        let n = rng.random_range(4..=12);
        let graph = random_graph(&mut rng, n);
        let best = optimal_cuts(&graph, &ConstraintSet::empty()).unwrap()[0].coherence;
        let annealed = anneal_max_cut(
            &graph,
            &ConstraintSet::empty(),
            &AnnealParams::default(),
            instance,
        )
        .unwrap();
        if annealed.coherence == best {
            hits += 1;
        }
    }
    assert!(
        hits >= 99,
        "annealer matched the optimum on only {hits}/100 instances"
    );
    println!("criterion 3: pass (annealer optimal on {hits}/100 instances)");
}

#[test]
fn acceptance_04_median_minimizes_l1_against_grid_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(4_004);
    for trial in 0..50 {
        let count = rng.random_range(1..=15);
        let values: Vec<f64> = (0..count)
            .map(|_| rng.random_range(-10i32..=10) as f64 / 10.0)
            .collect();
        let m = median(&values);
        let cost = |x: f64| values.iter().map(|w| (x - w).abs()).sum::<f64>();
        let at_median = cost(m);
        let grid_min = (0..=200)
            .map(|step| cost(-1.0 + step as f64 * 0.01))
            .fold(f64::INFINITY, f64::min);
        assert!(
            at_median <= grid_min + 1e-12,
            "trial {trial}: median cost {at_median} vs grid minimum {grid_min}"
        );
    }
    println!("criterion 4: pass (median beat the 0.01 grid on 50/50 sample sets)");
}

#[test]
fn acceptance_05_gibbs_beta_closed_form() {
    let spectrum = EnergySpectrum::new(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
    let beta = solve_beta(&spectrum, 1).unwrap();
    let exact = 9.0f64.ln();
    assert!((beta - exact).abs() < 1e-9, "beta {beta} vs ln 9 {exact}");

    let residual = defining_residual(&spectrum, 1, beta);
    assert!(residual < 1e-10, "residual {residual}");

    for w in gibbs_weights(&spectrum, 0.0) {
        assert!((w - 0.25).abs() < 1e-12);
    }
    println!(
        "criterion 5: pass (beta = ln 9 to {:.1e}, residual {residual:.1e})",
        (beta - exact).abs()
    );
}

#[test]
fn acceptance_06_outcome_tables_reproduce_the_worked_example() {
    let space = OutcomeSpace::from_json(
        &std::fs::read_to_string(fixtures().join("outcomes/wifi.json")).unwrap(),
    )
    .unwrap();
    let rational = |n: i64, d: i64| num_rational::BigRational::new(n.into(), d.into());

    let empty = table_from_rejection(&set(&[]), &space).unwrap();
    assert!(empty.probabilities().iter().all(|p| *p == rational(1, 4)));

    let one = table_from_rejection(&set(&["p16"]), &space).unwrap();
    assert_eq!(*one.probability(&[0, 0]), rational(0, 1));
    assert_eq!(*one.probability(&[0, 1]), rational(0, 1));
    assert_eq!(*one.probability(&[1, 0]), rational(1, 2));
    assert_eq!(*one.probability(&[1, 1]), rational(1, 2));

    let two = table_from_rejection(&set(&["p16", "p17"]), &space).unwrap();
    assert_eq!(*two.probability(&[1, 0]), rational(1, 1));
    assert_eq!(*two.probability(&[1, 1]), rational(0, 1));

    let third = 1.0 / 3.0;
    let mixed = mixture(&[empty, one, two], &[third, third, third]).unwrap();
    assert_eq!(*mixed.probability(&[0, 0]), rational(1, 12));
    assert_eq!(*mixed.probability(&[0, 1]), rational(1, 12));
    assert_eq!(*mixed.probability(&[1, 0]), rational(7, 12));
    assert_eq!(*mixed.probability(&[1, 1]), rational(1, 4));

    let printed = format_table(&mixed, &space);
    for cell in ["0.083", "0.583", "0.250"] {
        assert!(printed.contains(cell), "missing {cell} in:\n{printed}");
    }
    println!(
        "criterion 6: pass (tables exact: 1/12, 1/12, 7/12, 1/4; printed 0.083/0.083/0.583/0.250)"
    );
}

#[test]
fn acceptance_07_prompt_fidelity() {
    let props = cdi_core::PropositionFile::parse(
        &std::fs::read_to_string(fixtures().join("props/toy.props")).unwrap(),
    )
    .unwrap();
    let prompt = build_prompt(&props).unwrap();

    // Anchors frozen here independently of the constant in the library.
    for anchor in [
        "Imagine that you are a perfectly objective arbitrator with impeccable judgment and integrity.",
        "Your rating of relative consistency should be on a scale from 0 to 10",
        "If you determine that propositions are unrelated despite previously determining otherwise, omit that pair.",
        "Only return the edge list with proposition labels for vertices.",
        "[('p2', 'p3', 0), ('p2', 'p5', 10), ('p3', 'p4', 9), ('p3', 'p5', 2)]",
        "Order vertices (in edges) and edges (in the graph) lexicographically.",
        "buildCoherence: ",
    ] {
        assert!(prompt.contains(anchor), "prompt is missing: {anchor}");
    }

    // The prompt's own example list parses into the documented edges.
    let known = set(&["p2", "p3", "p4", "p5"]);
    let edges = parse_rated_edges(&prompt, &known).unwrap();
    let ratings: Vec<u8> = edges.iter().map(|e| e.rating).collect();
    assert_eq!(ratings, vec![0, 10, 9, 2]);
    let weights: Vec<f64> = edges
        .iter()
        .map(|e| rating_to_weight(e.rating).unwrap())
        .collect();
    assert_eq!(weights, vec![-1.0, 1.0, 0.8, -0.6]);
    println!("criterion 7: pass (instructions verbatim; example list -> ratings (0, 10, 9, 2) -> weights (-1, 1, 0.8, -0.6))");
}

#[test]
fn acceptance_08_convergence_profile() {
    let graph = |edges: &[(&str, &str, f64)]| {
        CoherenceGraph::build(
            vec!["a".into(), "b".into(), "c".into()],
            edges
                .iter()
                .map(|(u, v, w)| (u.to_string(), v.to_string(), *w)),
        )
        .unwrap()
    };

    // Identical samples: every distance is zero at every n.
    let same = graph(&[("a", "b", 0.6), ("b", "c", -0.4)]);
    let profile = convergence_profile(&[same.clone(), same.clone(), same.clone()], 20, 1).unwrap();
    assert!(profile
        .per_n
        .iter()
        .all(|row| row.distances.iter().all(|&d| d == 0.0)));

    // Four hand-built samples at n = 2: exhaustive distances match the six
    // pairs enumerated directly.
    let samples = vec![
        graph(&[("a", "b", 0.2)]),
        graph(&[("a", "b", 0.6)]),
        graph(&[("a", "b", 1.0), ("a", "c", -0.4)]),
        graph(&[("b", "c", 0.8)]),
    ];
    let exhaustive = convergence_profile_exhaustive(&samples).unwrap();
    let full = median_graph(&samples).unwrap();
    let mut expected = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let pair_median = median_graph(&[samples[i].clone(), samples[j].clone()]).unwrap();
            expected.push(pair_median.l1_distance(&full).unwrap());
        }
    }
    expected.sort_by(|a, b| a.total_cmp(b));
    let mut got = exhaustive.per_n[1].distances.clone();
    got.sort_by(|a, b| a.total_cmp(b));
    assert_eq!(got, expected);

    // Stopping rule on the synthetic profile.
    let synthetic = ConvergenceProfile {
        per_n: [10.0, 4.0, 0.9, 0.2, 0.0]
            .iter()
            .enumerate()
            .map(|(i, &d)| SubsampleDistances {
                n: i + 1,
                distances: vec![d],
            })
            .collect(),
        trials: 1,
        seed: 0,
        exhaustive: false,
    };
    assert_eq!(
        pick_sample_size(&synthetic, 0.10).unwrap(),
        SampleSizeChoice {
            n: 3,
            converged: true
        }
    );
    println!("criterion 8: pass (zero profile, exhaustive pairs, stopping rule -> 3)");
}

/// The published runs behind the paper-scale figures depend on unpublished
/// model outputs, so byte-identical cassette replay stands in for them.
#[test]
fn acceptance_09_cassette_replay_is_byte_deterministic() {
    let fixtures = fixtures();
    let props = fixtures.join("props/toy.props");
    let cassette = fixtures.join("cassettes/toy.json");

    let run = |dir: &std::path::Path| {
        let output = cdi(&[
            "compile",
            "--props",
            props.to_str().unwrap(),
            "--cassette",
            cassette.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--n",
            "15",
            "--trials",
            "60",
            "--seed",
            "11",
        ]);
        assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    };

    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run(first.path());
    run(second.path());

    let mut compared = 0;
    for name in [
        "median.json",
        "convergence.csv",
        "convergence_summary.csv",
        "samples/sample_001.json",
        "samples/sample_008.json",
        "samples/sample_015.json",
    ] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        compared += 1;
    }
    assert!(compared > 0);
    println!("criterion 9: pass (replayed runs byte-identical across {compared} artifacts)");
}
