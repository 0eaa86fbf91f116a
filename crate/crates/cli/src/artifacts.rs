//! Run-directory artifact names and the typed documents exchanged between
//! pipeline stages.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cdi_core::prop::Category;
use cdi_core::{ConstraintSet, Cut, PropositionFile, RankedCuts};

use crate::error::{read_file, usage, write_file, CliError};

pub const MEDIAN_GRAPH: &str = "median.json";
pub const SAMPLES_DIR: &str = "samples";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const CONVERGENCE_SUMMARY_CSV: &str = "convergence_summary.csv";
pub const CUTS_FILE: &str = "cuts.json";
pub const CONSTRAINTS_FILE: &str = "constraints.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const GIBBS_CSV: &str = "gibbs.csv";
pub const KDE_CSV: &str = "kde.csv";
pub const TABLES_CSV: &str = "tables.csv";
pub const REPORT_FILE: &str = "report.md";
pub const GRAPH_DOT: &str = "graph.dot";
pub const GRAPH_CUT_DOT: &str = "graph_cut.dot";

pub fn sample_path(out: &Path, index: usize) -> PathBuf {
    out.join(SAMPLES_DIR)
        .join(format!("sample_{:03}.json", index + 1))
}

/// One ranked cut as stored in the cuts file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutRecord {
    pub rank: usize,
    pub rejected: Vec<String>,
    pub accepted: Vec<String>,
    pub coherence: f64,
}

/// Ranked-cuts artifact written by `solve` and consumed by `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutsDoc {
    pub exhaustive: bool,
    pub cuts: Vec<CutRecord>,
}

impl CutsDoc {
    pub fn from_ranked(ranked: &RankedCuts, labels: &[String]) -> Self {
        let cuts = ranked
            .cuts
            .iter()
            .enumerate()
            .map(|(i, cut)| CutRecord {
                rank: i + 1,
                rejected: cut.rejected.iter().cloned().collect(),
                accepted: labels
                    .iter()
                    .filter(|l| !cut.rejected.contains(*l))
                    .cloned()
                    .collect(),
                coherence: cut.coherence,
            })
            .collect();
        Self {
            exhaustive: ranked.exhaustive,
            cuts,
        }
    }

    pub fn to_cuts(&self) -> Vec<Cut> {
        self.cuts
            .iter()
            .map(|r| Cut::new(r.rejected.iter().cloned().collect(), r.coherence))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("cuts serialize");
        text.push('\n');
        write_file(path, &text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_file(path)?)
            .map_err(|e| usage(format!("malformed cuts file {}: {e}", path.display())))
    }
}

/// Constraint document: explicit pins and pairs, plus categories whose
/// propositions are pinned accepted when a proposition file is supplied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstraintsDoc {
    #[serde(default)]
    pub pinned_accepted: BTreeSet<String>,
    #[serde(default)]
    pub pinned_rejected: BTreeSet<String>,
    #[serde(default)]
    pub exclusive_pairs: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pin_categories: Vec<Category>,
}

impl ConstraintsDoc {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_file(path)?).map_err(|e| {
            usage(format!(
                "malformed constraints file {}: {e}",
                path.display()
            ))
        })
    }

    /// Resolves category pins against a proposition file into a plain
    /// constraint set.
    pub fn resolve(&self, props: Option<&PropositionFile>) -> Result<ConstraintSet, CliError> {
        let mut set = ConstraintSet {
            pinned_accepted: self.pinned_accepted.clone(),
            pinned_rejected: self.pinned_rejected.clone(),
            exclusive_pairs: self.exclusive_pairs.clone(),
        };
        if !self.pin_categories.is_empty() {
            let props = props.ok_or_else(|| {
                usage("constraints use pin_categories; pass --props so categories can be resolved")
            })?;
            for category in &self.pin_categories {
                set.pinned_accepted
                    .extend(props.ids_with_category(*category));
            }
        }
        Ok(set)
    }

    pub fn from_set(set: &ConstraintSet) -> Self {
        Self {
            pinned_accepted: set.pinned_accepted.clone(),
            pinned_rejected: set.pinned_rejected.clone(),
            exclusive_pairs: set.exclusive_pairs.clone(),
            pin_categories: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("constraints serialize");
        text.push('\n');
        write_file(path, &text)
    }
}

/// Summary of the Gibbs analysis written by `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisDoc {
    pub n: usize,
    pub k: Option<usize>,
    pub beta: f64,
    pub residual: Option<f64>,
}

impl AnalysisDoc {
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("analysis serialize");
        text.push('\n');
        write_file(path, &text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(&read_file(path)?)
            .map_err(|e| usage(format!("malformed analysis file {}: {e}", path.display())))
    }
}

/// `{a, b}` with the empty set rendered as the empty-set sign.
pub fn format_label_set<'a, I: IntoIterator<Item = &'a String>>(labels: I) -> String {
    let items: Vec<&str> = labels.into_iter().map(String::as_str).collect();
    if items.is_empty() {
        "\u{2205}".to_string()
    } else {
        format!("{{{}}}", items.join(", "))
    }
}
