//! Labeled propositions and the sectioned text format they are exchanged in.
//!
//! A proposition file is a sequence of `# Header` sections, each holding
//! `- pN: text` lines. Headers map onto the four epistemic categories via
//! the alias table in [`category_for_header`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PropError {
    #[error("proposition id {0:?} does not match letter+digits (e.g. \"p1\")")]
    BadId(String),
    #[error("proposition {0:?} has empty text")]
    EmptyText(String),
    #[error("duplicate proposition id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: unrecognized section header {header:?} (known aliases map onto fact/belief/hypothesis/detail)")]
    UnknownHeader { line: usize, header: String },
    #[error("line {line}: expected `# Header` or `- id: text`, got {content:?}")]
    BadLine { line: usize, content: String },
    #[error("no propositions found")]
    Empty,
}

/// Epistemic category of a proposition, used for constraint construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Fact,
    Belief,
    Hypothesis,
    Detail,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Fact => "fact",
            Category::Belief => "belief",
            Category::Hypothesis => "hypothesis",
            Category::Detail => "detail",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = PropError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fact" => Ok(Category::Fact),
            "belief" => Ok(Category::Belief),
            "hypothesis" => Ok(Category::Hypothesis),
            "detail" => Ok(Category::Detail),
            other => Err(PropError::UnknownHeader {
                line: 0,
                header: other.to_string(),
            }),
        }
    }
}

/// Alias table from section headers to categories. Matching is
/// case-insensitive on the header prefix; scenario-style headers that name
/// observation groups ("Linux: ...", "Windows: ...", "Row 7") count as facts.
pub fn category_for_header(header: &str) -> Option<Category> {
    const ALIASES: &[(&str, Category)] = &[
        ("facts/beliefs", Category::Fact),
        ("background facts", Category::Fact),
        ("facts", Category::Fact),
        ("fact", Category::Fact),
        ("observations", Category::Fact),
        ("linux", Category::Fact),
        ("windows", Category::Fact),
        ("row ", Category::Fact),
        ("beliefs", Category::Belief),
        ("belief", Category::Belief),
        ("alternate beliefs", Category::Belief),
        ("hypotheses", Category::Hypothesis),
        ("hypothesis", Category::Hypothesis),
        ("details", Category::Detail),
        ("detail", Category::Detail),
    ];
    let normalized = header.trim().to_ascii_lowercase();
    ALIASES
        .iter()
        .find(|(prefix, _)| normalized.starts_with(prefix))
        .map(|&(_, cat)| cat)
}

/// A labeled natural-language claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub id: String,
    pub text: String,
    pub category: Category,
}

fn valid_id(id: &str) -> bool {
    let letters: String = id.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let rest = &id[letters.len()..];
    !letters.is_empty() && !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
}

impl Proposition {
    pub fn new(id: &str, text: &str, category: Category) -> Result<Self, PropError> {
        if !valid_id(id) {
            return Err(PropError::BadId(id.to_string()));
        }
        let text = text.trim();
        if text.is_empty() {
            return Err(PropError::EmptyText(id.to_string()));
        }
        Ok(Self {
            id: id.to_string(),
            text: text.to_string(),
            category,
        })
    }
}

/// One `# Header` block of a proposition file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub header: String,
    pub category: Category,
    pub propositions: Vec<Proposition>,
}

/// A parsed proposition file: ordered sections with globally unique labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropositionFile {
    pub sections: Vec<Section>,
}

impl PropositionFile {
    pub fn parse(text: &str) -> Result<Self, PropError> {
        let mut sections: Vec<Section> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            let trimmed = line.trim_start();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('#') {
                let header = header.trim().to_string();
                let category = category_for_header(&header).ok_or(PropError::UnknownHeader {
                    line: line_no,
                    header: header.clone(),
                })?;
                sections.push(Section {
                    header,
                    category,
                    propositions: Vec::new(),
                });
            } else if let Some(body) = trimmed.strip_prefix('-') {
                let section = sections.last_mut().ok_or_else(|| PropError::BadLine {
                    line: line_no,
                    content: line.to_string(),
                })?;
                let (id, text) = body.split_once(':').ok_or_else(|| PropError::BadLine {
                    line: line_no,
                    content: line.to_string(),
                })?;
                let prop = Proposition::new(id.trim(), text, section.category)?;
                if !seen.insert(prop.id.clone()) {
                    return Err(PropError::DuplicateId(prop.id));
                }
                section.propositions.push(prop);
            } else {
                // Continuation of the previous proposition's text.
                let continued = sections
                    .last_mut()
                    .and_then(|s| s.propositions.last_mut())
                    .ok_or_else(|| PropError::BadLine {
                        line: line_no,
                        content: line.to_string(),
                    })?;
                continued.text.push(' ');
                continued.text.push_str(trimmed);
            }
        }

        let file = Self { sections };
        if file.propositions().next().is_none() {
            return Err(PropError::Empty);
        }
        Ok(file)
    }

    /// All propositions in input order.
    pub fn propositions(&self) -> impl Iterator<Item = &Proposition> {
        self.sections.iter().flat_map(|s| s.propositions.iter())
    }

    pub fn ids(&self) -> Vec<String> {
        self.propositions().map(|p| p.id.clone()).collect()
    }

    pub fn ids_with_category(&self, category: Category) -> Vec<String> {
        self.propositions()
            .filter(|p| p.category == category)
            .map(|p| p.id.clone())
            .collect()
    }

    /// Formats the file back into its sectioned text layout.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str("# ");
            out.push_str(&section.header);
            out.push('\n');
            for p in &section.propositions {
                out.push_str("- ");
                out.push_str(&p.id);
                out.push_str(": ");
                out.push_str(&p.text);
                out.push('\n');
            }
        }
        out
    }
}
