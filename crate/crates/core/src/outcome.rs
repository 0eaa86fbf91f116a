//! Joint-probability tables over named binary outcome axes, driven by which
//! asserting hypotheses a cut rejects, plus weighted mixtures of tables.
//!
//! Probabilities are exact rationals internally; display rounds to three
//! decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutcomeError {
    #[error("outcome space has no axes")]
    NoAxes,
    #[error("duplicate axis name {0:?}")]
    DuplicateAxis(String),
    #[error("axis {0:?} must have two distinct values")]
    BadAxisValues(String),
    #[error("assertion for {label:?} names unknown axis {axis:?}")]
    UnknownAxis { label: String, axis: String },
    #[error("assertion for {label:?} names unknown value {value:?} on axis {axis:?}")]
    UnknownValue {
        label: String,
        axis: String,
        value: String,
    },
    #[error("axis value ({axis:?}, {value:?}) is asserted by both {first:?} and {second:?}")]
    DuplicateAssertion {
        axis: String,
        value: String,
        first: String,
        second: String,
    },
    #[error("rejected label {0:?} is not an asserting hypothesis")]
    NotAnAssertion(String),
    #[error("rejection set {0:?} excludes every cell")]
    ContradictoryRejection(String),
    #[error("tables have different axis structures")]
    StructureMismatch,
    #[error("need as many weights as tables ({tables} tables, {weights} weights)")]
    LengthMismatch { tables: usize, weights: usize },
    #[error("no tables to mix")]
    NoTables,
    #[error("weights must be nonnegative and sum to 1 within 1e-9 (sum = {0})")]
    BadWeights(f64),
    #[error("malformed outcome-space document: {0}")]
    Malformed(String),
}

/// A named binary axis, e.g. Fix? in {no, yes}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: [String; 2],
}

/// Binary outcome axes plus hypothesis-label assertions onto (axis, value).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    axes: Vec<Axis>,
    assertions: BTreeMap<String, (usize, usize)>,
    assertion_docs: BTreeMap<String, (String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OutcomeSpaceDoc {
    axes: Vec<Axis>,
    assertions: BTreeMap<String, (String, String)>,
}

impl OutcomeSpace {
    pub fn new(
        axes: Vec<Axis>,
        assertions: BTreeMap<String, (String, String)>,
    ) -> Result<Self, OutcomeError> {
        if axes.is_empty() {
            return Err(OutcomeError::NoAxes);
        }
        let mut seen = BTreeSet::new();
        for axis in &axes {
            if !seen.insert(axis.name.clone()) {
                return Err(OutcomeError::DuplicateAxis(axis.name.clone()));
            }
            if axis.values[0] == axis.values[1] {
                return Err(OutcomeError::BadAxisValues(axis.name.clone()));
            }
        }
        let mut resolved = BTreeMap::new();
        let mut claimed: BTreeMap<(usize, usize), String> = BTreeMap::new();
        for (label, (axis_name, value)) in &assertions {
            let axis_idx = axes
                .iter()
                .position(|a| &a.name == axis_name)
                .ok_or_else(|| OutcomeError::UnknownAxis {
                    label: label.clone(),
                    axis: axis_name.clone(),
                })?;
            let value_idx = axes[axis_idx]
                .values
                .iter()
                .position(|v| v == value)
                .ok_or_else(|| OutcomeError::UnknownValue {
                    label: label.clone(),
                    axis: axis_name.clone(),
                    value: value.clone(),
                })?;
            if let Some(first) = claimed.insert((axis_idx, value_idx), label.clone()) {
                return Err(OutcomeError::DuplicateAssertion {
                    axis: axis_name.clone(),
                    value: value.clone(),
                    first,
                    second: label.clone(),
                });
            }
            resolved.insert(label.clone(), (axis_idx, value_idx));
        }
        Ok(Self {
            axes,
            assertions: resolved,
            assertion_docs: assertions,
        })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cell_count(&self) -> usize {
        1 << self.axes.len()
    }

    pub fn is_assertion(&self, label: &str) -> bool {
        self.assertions.contains_key(label)
    }

    /// Restricts a rejected set to the labels that assert outcomes.
    pub fn asserting_subset(&self, rejected: &BTreeSet<String>) -> BTreeSet<String> {
        rejected
            .iter()
            .filter(|l| self.is_assertion(l))
            .cloned()
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = OutcomeSpaceDoc {
            axes: self.axes.clone(),
            assertions: self.assertion_docs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("outcome space serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, OutcomeError> {
        let doc: OutcomeSpaceDoc =
            serde_json::from_str(text).map_err(|e| OutcomeError::Malformed(e.to_string()))?;
        Self::new(doc.axes, doc.assertions)
    }

    /// Values of a cell index, one per axis.
    fn cell_values(&self, cell: usize) -> Vec<&str> {
        self.axes
            .iter()
            .enumerate()
            .map(|(i, axis)| axis.values[cell >> i & 1].as_str())
            .collect()
    }
}

/// Exact joint distribution over the cells of an outcome space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    axes: Vec<Axis>,
    cells: Vec<BigRational>,
}

impl JointTable {
    pub fn probabilities(&self) -> &[BigRational] {
        &self.cells
    }

    pub fn probabilities_f64(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|p| p.to_f64().expect("probability fits in f64"))
            .collect()
    }

    /// Probability of the cell addressed by one value index per axis.
    pub fn probability(&self, value_indices: &[usize]) -> &BigRational {
        let mut cell = 0usize;
        for (i, &v) in value_indices.iter().enumerate() {
            cell |= (v & 1) << i;
        }
        &self.cells[cell]
    }
}

/// Uniform distribution over the cells surviving the rejected hypotheses: a
/// cell is excluded iff it matches the asserted (axis, value) of any
/// rejected label.
pub fn table_from_rejection(
    rejected: &BTreeSet<String>,
    space: &OutcomeSpace,
) -> Result<JointTable, OutcomeError> {
    let mut excluded: Vec<(usize, usize)> = Vec::with_capacity(rejected.len());
    for label in rejected {
        let &target = space
            .assertions
            .get(label)
            .ok_or_else(|| OutcomeError::NotAnAssertion(label.clone()))?;
        excluded.push(target);
    }
    let cell_count = space.cell_count();
    let survives = |cell: usize| {
        excluded
            .iter()
            .all(|&(axis, value)| cell >> axis & 1 != value)
    };
    let survivors = (0..cell_count).filter(|&c| survives(c)).count();
    if survivors == 0 {
        let labels: Vec<&str> = rejected.iter().map(String::as_str).collect();
        return Err(OutcomeError::ContradictoryRejection(labels.join(", ")));
    }
    let share = BigRational::new(BigInt::one(), BigInt::from(survivors));
    let cells = (0..cell_count)
        .map(|c| {
            if survives(c) {
                share.clone()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    Ok(JointTable {
        axes: space.axes.clone(),
        cells,
    })
}

/// Cellwise weighted average. Weights must be nonnegative and sum to 1
/// within 1e-9; they are renormalized exactly, so a uniform weight vector
/// yields the exact counting-measure mixture.
pub fn mixture(tables: &[JointTable], weights: &[f64]) -> Result<JointTable, OutcomeError> {
    if tables.is_empty() {
        return Err(OutcomeError::NoTables);
    }
    if tables.len() != weights.len() {
        return Err(OutcomeError::LengthMismatch {
            tables: tables.len(),
            weights: weights.len(),
        });
    }
    let axes = &tables[0].axes;
    if tables.iter().any(|t| &t.axes != axes) {
        return Err(OutcomeError::StructureMismatch);
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(OutcomeError::BadWeights(f64::NAN));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(OutcomeError::BadWeights(sum));
    }

    let exact_weights: Vec<BigRational> = weights
        .iter()
        .map(|&w| BigRational::from_float(w).expect("finite weight"))
        .collect();
    let total: BigRational = exact_weights.iter().sum();

    let cell_count = tables[0].cells.len();
    let mut cells = vec![BigRational::zero(); cell_count];
    for (table, weight) in tables.iter().zip(&exact_weights) {
        for (acc, p) in cells.iter_mut().zip(&table.cells) {
            *acc += weight * p;
        }
    }
    for cell in &mut cells {
        *cell /= &total;
    }
    Ok(JointTable {
        axes: axes.clone(),
        cells,
    })
}

/// Renders a table as aligned text rows with three-decimal probabilities.
pub fn format_table(table: &JointTable, space: &OutcomeSpace) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}  probability",
        space
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .collect::<Vec<_>>()
            .join("  ")
    );
    for (cell, p) in table.cells.iter().enumerate() {
        let values = space.cell_values(cell);
        let _ = writeln!(
            out,
            "{}  {:.3}",
            values.join("  "),
            p.to_f64().unwrap_or(f64::NAN)
        );
    }
    out
}

/// CSV rows for a set of tagged tables: tag, one column per axis,
/// three-decimal probability, exact rational.
pub fn tables_csv(space: &OutcomeSpace, tagged: &[(String, &JointTable)]) -> String {
    let mut out = String::from("table");
    for axis in space.axes() {
        let _ = write!(out, ",{}", axis.name);
    }
    out.push_str(",probability,exact\n");
    for (tag, table) in tagged {
        for (cell, p) in table.cells.iter().enumerate() {
            let _ = write!(out, "{tag}");
            for value in space.cell_values(cell) {
                let _ = write!(out, ",{value}");
            }
            let _ = writeln!(out, ",{:.3},{}", p.to_f64().unwrap_or(f64::NAN), p);
        }
    }
    out
}
