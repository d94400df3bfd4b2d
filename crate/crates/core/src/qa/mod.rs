//! Question-answer records and their rule-based generation from NGT tables.
//!
//! Fact-validation (FV) records come in original/contrapositive pairs linked
//! through `cp_link`; the contrapositive's `qa_id` is the original's id with a
//! `.cp` suffix. Chain-of-thought variants carry a `.cot` suffix.

mod balance;
mod cot;
mod format;
mod generate;
mod template;

pub(crate) use balance::short_answer;
pub use balance::{audit_balance, balance_report, balanced_letters, BalanceReport, StratumBalance, LETTERS};
pub use cot::{gen_cot_variant, COT_SUFFIX};
pub use format::{display_count, display_value};
pub use generate::{assemble_dataset, gen_fv_numeric, gen_ni, generate_rule_records, Dataset, GenConfig, Targets};
pub use template::{builtin_bank, instantiate, load_bank, Comparator, Template, TemplateBank, BUILTIN_BANK_VERSION};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    FV,
    PM,
    NI,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::PM, Task::FV, Task::NI];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::FV => "FV",
            Task::PM => "PM",
            Task::NI => "NI",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    NonNumeric,
    Quantity,
    Distance,
    Volume,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::NonNumeric,
        Category::Quantity,
        Category::Distance,
        Category::Volume,
    ];
    pub const NUMERIC: [Category; 3] = [Category::Quantity, Category::Distance, Category::Volume];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::NonNumeric => "non-numeric",
            Category::Quantity => "quantity",
            Category::Distance => "distance",
            Category::Volume => "volume",
        }
    }

    /// Unit of the numeric ground truth for this category.
    pub fn unit(self) -> Option<&'static str> {
        match self {
            Category::NonNumeric => None,
            Category::Quantity => Some("count"),
            Category::Distance => Some("meters"),
            Category::Volume => Some("cubic meters"),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Cot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Rule,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub qa_id: String,
    pub scene_id: String,
    pub task: Task,
    pub category: Category,
    pub question: String,
    pub answer: String,
    pub gt_value: Option<f64>,
    pub unit: Option<String>,
    pub cp_link: Option<String>,
    pub variant: Variant,
    pub provenance: Provenance,
    pub template_id: String,
    pub referents: Vec<String>,
}

impl QaRecord {
    /// True for the contrapositive half of an FV pair.
    pub fn is_contrapositive(&self) -> bool {
        self.qa_id.ends_with(".cp")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shortfall {
    pub stratum: String,
    pub requested: usize,
    pub produced: usize,
}

impl fmt::Display for Shortfall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} of {}", self.stratum, self.produced, self.requested)
    }
}

fn join_shortfalls(s: &[Shortfall]) -> String {
    s.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error)]
pub enum QaError {
    #[error("template {template_id}: expected {expected} bindings, got {got}")]
    ArityMismatch {
        template_id: String,
        expected: usize,
        got: usize,
    },
    #[error("not enough valid candidates ({})", join_shortfalls(.0))]
    InsufficientCandidates(Vec<Shortfall>),
    #[error("chain-of-thought variants are not defined for {0}")]
    UnsupportedTask(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("template bank: {0}")]
    InvalidBank(String),
    #[error("record {qa_id}: {detail}")]
    InconsistentRecord { qa_id: String, detail: String },
}
