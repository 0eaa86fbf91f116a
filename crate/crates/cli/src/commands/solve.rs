use std::path::PathBuf;

use clap::Args;

use cdi_core::solver::{
    anneal_max_cut, enumerate_cuts, optimal_cuts, AnnealParams, SolverError, EXACT_CAP,
};
use cdi_core::{CoherenceGraph, PropositionFile, RankedCuts};

use crate::artifacts::{format_label_set, ConstraintsDoc, CutsDoc, CONSTRAINTS_FILE, CUTS_FILE};
use crate::error::{domain, read_file, usage, CliError};

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Coherence-graph document
    #[arg(long)]
    pub graph: PathBuf,
    /// Run directory for the ranked cuts
    #[arg(long)]
    pub out: PathBuf,
    /// Constraint file (pins, exclusive pairs, category pins)
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Proposition file, needed when constraints pin whole categories
    #[arg(long)]
    pub props: Option<PathBuf>,
    /// How many ranked cuts to keep
    #[arg(long, default_value_t = 16)]
    pub top_k: usize,
    /// Use simulated annealing instead of exact enumeration
    #[arg(long, default_value_t = false)]
    pub anneal: bool,
    /// Seed for annealing
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let graph = CoherenceGraph::from_json(&read_file(&args.graph)?)
        .map_err(|e| usage(format!("{}: {e}", args.graph.display())))?;

    let props = match &args.props {
        Some(path) => Some(
            PropositionFile::parse(&read_file(path)?)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let constraints = match &args.constraints {
        Some(path) => ConstraintsDoc::load(path)?.resolve(props.as_ref())?,
        None => Default::default(),
    };

    let n = graph.len();
    if n == 0 {
        return Err(usage(format!("{} has no vertices", args.graph.display())));
    }
    if n > EXACT_CAP && !args.anneal {
        return Err(domain(format!(
            "graph has {n} vertices, above the exact-mode cap of {EXACT_CAP}; pass --anneal to \
             search heuristically"
        )));
    }

    let solve_err = |e: SolverError| match e {
        SolverError::UnknownLabel(_) | SolverError::CutUnknownLabel(_) => usage(e),
        other => domain(other),
    };

    let ranked = if args.anneal {
        if n > EXACT_CAP {
            eprintln!("warning: {n} vertices exceed the exact cap; annealing is not exhaustive");
        }
        let cut = anneal_max_cut(&graph, &constraints, &AnnealParams::default(), args.seed)
            .map_err(solve_err)?;
        println!(
            "best cut found: rejected part {}, coherence {} (annealed, not exhaustive)",
            format_label_set(&cut.rejected),
            cut.coherence
        );
        RankedCuts {
            cuts: vec![cut],
            exhaustive: false,
        }
    } else {
        let optima = optimal_cuts(&graph, &constraints).map_err(solve_err)?;
        if optima.len() == 1 {
            println!(
                "optimal cut: rejected part {}, coherence {}",
                format_label_set(&optima[0].rejected),
                optima[0].coherence
            );
        } else {
            let parts: Vec<String> = optima
                .iter()
                .map(|c| format_label_set(&c.rejected))
                .collect();
            println!(
                "{} optimal cuts: rejected parts {}, coherence {}",
                optima.len(),
                parts.join(", "),
                optima[0].coherence
            );
        }
        enumerate_cuts(&graph, &constraints, args.top_k).map_err(solve_err)?
    };

    let cuts_path = args.out.join(CUTS_FILE);
    CutsDoc::from_ranked(&ranked, graph.labels()).save(&cuts_path)?;
    ConstraintsDoc::from_set(&constraints).save(&args.out.join(CONSTRAINTS_FILE))?;
    println!(
        "{} ranked cuts at {}",
        ranked.cuts.len(),
        cuts_path.display()
    );
    Ok(())
}
