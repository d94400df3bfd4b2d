use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::format::display_value;
use super::{Category, QaError, Task};
use crate::seed::stable_hash;

const BUILTIN_BANK: &str = include_str!("../../assets/templates.json");

/// Version tag of the bank compiled into the library.
pub const BUILTIN_BANK_VERSION: &str = "builtin-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Less,
    LessOrEqual,
    Greater,
    GreaterOrEqual,
    ApproxEqual,
    NotApproxEqual,
}

impl Comparator {
    /// Predicate used by the contrapositive question.
    pub fn invert(self) -> Comparator {
        match self {
            Comparator::Less => Comparator::GreaterOrEqual,
            Comparator::GreaterOrEqual => Comparator::Less,
            Comparator::Greater => Comparator::LessOrEqual,
            Comparator::LessOrEqual => Comparator::Greater,
            Comparator::ApproxEqual => Comparator::NotApproxEqual,
            Comparator::NotApproxEqual => Comparator::ApproxEqual,
        }
    }

    pub fn is_approx(self) -> bool {
        matches!(self, Comparator::ApproxEqual | Comparator::NotApproxEqual)
    }

    /// Truth of `a <cmp> b` for two values known to be distinct (ordering
    /// comparators) or already classified as close/far (approximate ones).
    pub fn holds(self, a: f64, b: f64, close: bool) -> bool {
        match self {
            Comparator::Less => a < b,
            Comparator::LessOrEqual => a <= b,
            Comparator::Greater => a > b,
            Comparator::GreaterOrEqual => a >= b,
            Comparator::ApproxEqual => close,
            Comparator::NotApproxEqual => !close,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub template_id: String,
    pub task: Task,
    pub category: Category,
    pub text: String,
    pub arity: usize,
    pub answer_suffix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<Comparator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_text: Option<String>,
}

/// Substitutes `<OBJk>` with `bindings[k-1]` and `<VALk>` with the two-decimal
/// rendering of `values[k-1]` in a single left-to-right pass, so placeholder
/// look-alikes inside bindings are copied verbatim.
pub fn instantiate(t: &Template, bindings: &[&str], values: &[f64]) -> Result<String, QaError> {
    substitute(&t.template_id, &t.text, t.arity, bindings, values)
}

pub(crate) fn substitute(
    template_id: &str,
    text: &str,
    arity: usize,
    bindings: &[&str],
    values: &[f64],
) -> Result<String, QaError> {
    let value_arity = placeholders(text, "VAL").len();
    if bindings.len() != arity || values.len() != value_arity {
        return Err(QaError::ArityMismatch {
            template_id: template_id.to_string(),
            expected: arity + value_arity,
            got: bindings.len() + values.len(),
        });
    }
    let mut out = String::with_capacity(text.len() + 32);
    let mut rest = text;
    while let Some(pos) = rest.find('<') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match parse_placeholder(rest) {
            Some((kind, k, len)) => {
                match kind {
                    "OBJ" => out.push_str(bindings[k - 1]),
                    _ => out.push_str(&display_value(values[k - 1])),
                }
                rest = &rest[len..];
            }
            None => {
                out.push('<');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Parses `<OBJk>` / `<VALk>` at the start of `s`: (kind, k, byte length).
fn parse_placeholder(s: &str) -> Option<(&'static str, usize, usize)> {
    let kind = if s.starts_with("<OBJ") {
        "OBJ"
    } else if s.starts_with("<VAL") {
        "VAL"
    } else {
        return None;
    };
    let digits: String = s[4..].chars().take_while(|c| c.is_ascii_digit()).collect();
    let close = 4 + digits.len();
    if digits.is_empty() || s.as_bytes().get(close) != Some(&b'>') {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (k >= 1).then_some((kind, k, close + 1))
}

fn placeholders(text: &str, kind: &str) -> BTreeSet<usize> {
    let mut found = BTreeSet::new();
    for (pos, _) in text.match_indices('<') {
        if let Some((k, idx, _)) = parse_placeholder(&text[pos..]) {
            if k == kind {
                found.insert(idx);
            }
        }
    }
    found
}

/// Validated, id-sorted collection of templates.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    version: String,
    templates: Vec<Template>,
}

impl TemplateBank {
    pub fn new(version: impl Into<String>, mut templates: Vec<Template>) -> Result<Self, QaError> {
        templates.sort_by(|a, b| a.template_id.cmp(&b.template_id));
        let mut ids = BTreeSet::new();
        for t in &templates {
            if !ids.insert(t.template_id.as_str()) {
                return Err(QaError::InvalidBank(format!("duplicate template_id {}", t.template_id)));
            }
            validate(t).map_err(|e| QaError::InvalidBank(format!("{}: {e}", t.template_id)))?;
        }
        Ok(Self {
            version: version.into(),
            templates,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, template_id: &str) -> Option<&Template> {
        self.templates
            .binary_search_by(|t| t.template_id.as_str().cmp(template_id))
            .ok()
            .map(|i| &self.templates[i])
    }

    /// Templates of one (task, category) stratum in id order.
    pub fn stratum(&self, task: Task, category: Category) -> Vec<&Template> {
        self.templates
            .iter()
            .filter(|t| t.task == task && t.category == category)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.templates).expect("templates serialize")
    }
}

fn validate(t: &Template) -> Result<(), String> {
    let expected: BTreeSet<usize> = (1..=t.arity).collect();
    if placeholders(&t.text, "OBJ") != expected {
        return Err(format!("placeholders do not match arity {}", t.arity));
    }
    let suffix = t.answer_suffix.to_lowercase();
    match t.task {
        Task::FV => {
            if t.comparator.is_none() {
                return Err("FV template without comparator".into());
            }
            let cp = t.cp_text.as_deref().ok_or("FV template without cp_text")?;
            if placeholders(cp, "OBJ") != expected {
                return Err(format!("cp_text placeholders do not match arity {}", t.arity));
            }
            if !(suffix.contains("yes") && suffix.contains("no")) {
                return Err("FV suffix must ask for yes or no".into());
            }
        }
        Task::NI => {
            if !(suffix.contains("number") || suffix.contains("numerical")) {
                return Err("NI suffix must ask for a number".into());
            }
            let text = t.text.to_lowercase();
            let unit_ok = match t.category {
                Category::Quantity => true,
                Category::Distance => text.contains("meters"),
                Category::Volume => text.contains("cubic meters"),
                Category::NonNumeric => return Err("NI templates must be numeric".into()),
            };
            if !unit_ok {
                return Err("NI template text must name its unit".into());
            }
        }
        Task::PM => {}
    }
    Ok(())
}

pub fn builtin_bank() -> TemplateBank {
    let templates: Vec<Template> = serde_json::from_str(BUILTIN_BANK).expect("built-in bank parses");
    TemplateBank::new(BUILTIN_BANK_VERSION, templates).expect("built-in bank is valid")
}

/// Loads a bank file (JSON list of templates). Its version is derived from
/// the file content so manifests pin the exact bank used.
pub fn load_bank(path: &Path) -> Result<TemplateBank, QaError> {
    let text = fs::read_to_string(path).map_err(|e| QaError::InvalidBank(format!("{}: {e}", path.display())))?;
    let templates: Vec<Template> =
        serde_json::from_str(&text).map_err(|e| QaError::InvalidBank(format!("{}: {e}", path.display())))?;
    TemplateBank::new(format!("file-{:016x}", stable_hash(&text)), templates)
}
