use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use cdi_core::aggregate::{pick_sample_size, ConvergenceProfile, SubsampleDistances};
use cdi_core::solver::accepted_rejected;
use cdi_core::{CoherenceGraph, ConstraintSet};

use crate::artifacts::{
    format_label_set, AnalysisDoc, ConstraintsDoc, CutsDoc, ANALYSIS_FILE, CONSTRAINTS_FILE,
    CONVERGENCE_SUMMARY_CSV, CUTS_FILE, GRAPH_CUT_DOT, GRAPH_DOT, MEDIAN_GRAPH, REPORT_FILE,
    TABLES_CSV,
};
use crate::error::{read_file, usage, write_file, CliError};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directory holding pipeline artifacts
    pub run: PathBuf,
    /// Convergence stopping-rule fraction
    #[arg(long, default_value_t = 0.10)]
    pub fraction: f64,
    /// Ranked cuts to list
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

pub fn run(args: &ReportArgs) -> Result<(), CliError> {
    let median_path = args.run.join(MEDIAN_GRAPH);
    if !median_path.exists() {
        return Err(usage(format!(
            "{} is missing required artifacts: {MEDIAN_GRAPH} (write one with `cdi compile` or \
             place a graph document there); optional artifacts: {CUTS_FILE}, {CONSTRAINTS_FILE}, \
             {CONVERGENCE_SUMMARY_CSV}, {ANALYSIS_FILE}, {TABLES_CSV}",
            args.run.display()
        )));
    }
    let graph = CoherenceGraph::from_json(&read_file(&median_path)?)
        .map_err(|e| usage(format!("{}: {e}", median_path.display())))?;

    let mut report = String::from("# Coherence run report\n\n## Graph\n\n");
    let _ = writeln!(report, "- vertices: {}", graph.len());
    let _ = writeln!(report, "- edges: {}", graph.edge_count());
    write_file(&args.run.join(GRAPH_DOT), &graph.to_dot(None))?;
    let _ = writeln!(report, "- rendering: {GRAPH_DOT}");

    // Solve writes fully resolved constraints; a hand-placed file that
    // still needs a proposition file just loses the accepted/rejected lines.
    let constraints: Option<ConstraintSet> = {
        let path = args.run.join(CONSTRAINTS_FILE);
        if path.exists() {
            ConstraintsDoc::load(&path)?.resolve(None).ok()
        } else {
            None
        }
    };

    report.push_str("\n## Cuts\n\n");
    let cuts_path = args.run.join(CUTS_FILE);
    if cuts_path.exists() {
        let doc = CutsDoc::load(&cuts_path)?;
        if !doc.exhaustive {
            report.push_str("_heuristic search; ranking is not exhaustive_\n\n");
        }
        report.push_str("| rank | rejected part | coherence |\n|---|---|---|\n");
        for record in doc.cuts.iter().take(args.top) {
            let _ = writeln!(
                report,
                "| {} | {} | {} |",
                record.rank,
                format_label_set(&record.rejected),
                record.coherence
            );
        }
        if let Some(best) = doc.to_cuts().first() {
            write_file(&args.run.join(GRAPH_CUT_DOT), &graph.to_dot(Some(best)))?;
            let _ = writeln!(report, "\n- best-cut rendering: {GRAPH_CUT_DOT}");
            if let Some(constraints) = &constraints {
                match accepted_rejected(best, constraints, &graph) {
                    Ok((accepted, rejected)) => {
                        let _ = writeln!(report, "- accepted: {}", format_label_set(&accepted));
                        let _ = writeln!(report, "- rejected: {}", format_label_set(&rejected));
                    }
                    Err(e) => {
                        let _ = writeln!(report, "- accepted/rejected: unavailable ({e})");
                    }
                }
            }
        }
    } else {
        report.push_str("_not available - run `cdi solve`_\n");
    }

    report.push_str("\n## Convergence\n\n");
    let summary_path = args.run.join(CONVERGENCE_SUMMARY_CSV);
    if summary_path.exists() {
        let medians = parse_summary_medians(&read_file(&summary_path)?)
            .map_err(|e| usage(format!("{}: {e}", summary_path.display())))?;
        let profile = ConvergenceProfile {
            per_n: medians
                .iter()
                .map(|&(n, d)| SubsampleDistances {
                    n,
                    distances: vec![d],
                })
                .collect(),
            trials: 1,
            seed: 0,
            exhaustive: false,
        };
        match pick_sample_size(&profile, args.fraction) {
            Ok(choice) if choice.converged => {
                let _ = writeln!(
                    report,
                    "- median graph stabilizes at n = {} of {} samples (below {} of the n = 1 \
                     scatter)",
                    choice.n,
                    profile.max_n(),
                    args.fraction
                );
            }
            Ok(choice) => {
                let _ = writeln!(
                    report,
                    "- not converged within {} samples; consider more realizations",
                    choice.n
                );
            }
            Err(e) => {
                let _ = writeln!(report, "- verdict unavailable ({e})");
            }
        }
    } else {
        report.push_str("_not available - run `cdi compile` with two or more samples_\n");
    }

    report.push_str("\n## Analysis\n\n");
    let analysis_path = args.run.join(ANALYSIS_FILE);
    if analysis_path.exists() {
        let analysis = AnalysisDoc::load(&analysis_path)?;
        let _ = writeln!(report, "- cuts weighted: {}", analysis.n);
        let _ = writeln!(
            report,
            "- K = {}",
            analysis
                .k
                .map(|k| k.to_string())
                .unwrap_or_else(|| "forced beta".into())
        );
        let _ = writeln!(report, "- beta = {}", analysis.beta);
        if let Some(residual) = analysis.residual {
            let _ = writeln!(report, "- defining-equation residual = {residual:e}");
        }
        let tables_path = args.run.join(TABLES_CSV);
        if tables_path.exists() {
            let csv = read_file(&tables_path)?;
            report.push_str("\n### Mixture probabilities\n\n");
            let mut header = csv.lines().next().unwrap_or("").split(',');
            header.next();
            let columns: Vec<&str> = header.collect();
            let _ = writeln!(report, "| {} |", columns.join(" | "));
            let _ = writeln!(
                report,
                "|{}|",
                columns.iter().map(|_| "---").collect::<Vec<_>>().join("|")
            );
            for line in csv.lines().filter(|l| l.starts_with("mixture,")) {
                let cells: Vec<&str> = line.split(',').skip(1).collect();
                let _ = writeln!(report, "| {} |", cells.join(" | "));
            }
        }
    } else {
        report.push_str("_not available - run `cdi analyze`_\n");
    }

    let report_path = args.run.join(REPORT_FILE);
    write_file(&report_path, &report)?;
    println!("report written to {}", report_path.display());
    Ok(())
}

fn parse_summary_medians(csv: &str) -> Result<Vec<(usize, f64)>, String> {
    let mut rows = Vec::new();
    for (i, line) in csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(format!("line {}: expected 6 columns", i + 1));
        }
        let n: usize = cells[0]
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        let median: f64 = cells[3]
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        rows.push((n, median));
    }
    if rows.is_empty() {
        return Err("no data rows".to_string());
    }
    Ok(rows)
}
