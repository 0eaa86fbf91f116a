use std::path::PathBuf;

use clap::Args;

use cdi_core::gibbs::{
    defining_residual, gibbs_weights, kde_csv, kde_curve, solve_beta, spectrum_csv, suggest_k,
    EnergySpectrum, GibbsError,
};
use cdi_core::outcome::{mixture, table_from_rejection, tables_csv, JointTable, OutcomeSpace};

use crate::artifacts::{AnalysisDoc, CutsDoc, ANALYSIS_FILE, GIBBS_CSV, KDE_CSV, TABLES_CSV};
use crate::error::{domain, read_file, usage, write_file, CliError};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Ranked-cuts file from `solve`
    #[arg(long)]
    pub cuts: PathBuf,
    /// Run directory for the analysis artifacts
    #[arg(long)]
    pub out: PathBuf,
    /// Number of sufficiently coherent cuts (skips the KDE suggestion)
    #[arg(long)]
    pub k: Option<usize>,
    /// Force the inverse temperature instead of solving for it
    #[arg(long)]
    pub beta: Option<f64>,
    /// KDE bandwidth override
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Outcome-space file; emits per-cut tables and their mixture
    #[arg(long)]
    pub outcomes: Option<PathBuf>,
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let doc = CutsDoc::load(&args.cuts)?;
    if doc.cuts.len() < 2 {
        return Err(domain(format!(
            "need at least 2 cuts to analyze, {} has {}",
            args.cuts.display(),
            doc.cuts.len()
        )));
    }
    // Spectrum order = coherence descending; a rank-ordered file is already
    // sorted, but honor the coherences in case it was edited by hand.
    let mut records = doc.cuts.clone();
    records.sort_by(|a, b| b.coherence.total_cmp(&a.coherence));
    let spectrum =
        EnergySpectrum::new(records.iter().map(|r| -r.coherence).collect()).map_err(domain)?;
    let n = spectrum.len();

    if let Ok(curve) = kde_curve(&spectrum, args.bandwidth) {
        write_file(&args.out.join(KDE_CSV), &kde_csv(&curve))?;
    }

    let k = match (args.k, args.beta) {
        (Some(k), _) => Some(k),
        (None, Some(_)) => None,
        (None, None) => {
            let suggestion = suggest_k(&spectrum, args.bandwidth).map_err(|e| match e {
                GibbsError::NoGap
                | GibbsError::NoDensityMinimum
                | GibbsError::SpectrumTooSmall { .. } => {
                    domain(format!("{e}; pass --k to choose the cut count yourself"))
                }
                other => domain(other),
            })?;
            println!(
                "suggested K = {} (threshold {:.4}, bandwidth {:.4})",
                suggestion.k, suggestion.threshold, suggestion.bandwidth
            );
            Some(suggestion.k)
        }
    };

    let beta = match args.beta {
        Some(beta) if beta.is_finite() && beta >= 0.0 => beta,
        Some(beta) => return Err(usage(format!("--beta must be finite and >= 0, got {beta}"))),
        None => {
            let k = k.expect("k is set when beta is not forced");
            solve_beta(&spectrum, k).map_err(domain)?
        }
    };
    let weights = gibbs_weights(&spectrum, beta);
    let residual =
        k.and_then(|k| (k >= 1 && 2 * k < n).then(|| defining_residual(&spectrum, k, beta)));

    write_file(
        &args.out.join(GIBBS_CSV),
        &spectrum_csv(&spectrum, &weights),
    )?;
    AnalysisDoc {
        n,
        k,
        beta,
        residual,
    }
    .save(&args.out.join(ANALYSIS_FILE))?;
    println!(
        "beta = {beta}; K = {}; top cut weight = {:.4}",
        k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        weights[0]
    );

    if let Some(outcomes_path) = &args.outcomes {
        let space = OutcomeSpace::from_json(&read_file(outcomes_path)?)
            .map_err(|e| usage(format!("{}: {e}", outcomes_path.display())))?;
        let mut tables: Vec<JointTable> = Vec::with_capacity(records.len());
        let mut tagged: Vec<(String, JointTable)> = Vec::new();
        for record in &records {
            let rejected: std::collections::BTreeSet<String> =
                record.rejected.iter().cloned().collect();
            let asserting = space.asserting_subset(&rejected);
            let table = table_from_rejection(&asserting, &space)
                .map_err(|e| domain(format!("cut at rank {}: {e}", record.rank)))?;
            tables.push(table.clone());
            tagged.push((format!("cut{}", record.rank), table));
        }
        let mixed = mixture(&tables, &weights).map_err(domain)?;
        tagged.push(("mixture".to_string(), mixed));
        let borrowed: Vec<(String, &JointTable)> =
            tagged.iter().map(|(tag, t)| (tag.clone(), t)).collect();
        write_file(&args.out.join(TABLES_CSV), &tables_csv(&space, &borrowed))?;
        println!("outcome tables at {}", args.out.join(TABLES_CSV).display());
    }
    Ok(())
}
