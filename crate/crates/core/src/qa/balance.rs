use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::cot::final_token;
use super::template::TemplateBank;
use super::{Category, QaRecord, Task, Variant};

pub const LETTERS: [char; 5] = ['A', 'B', 'C', 'D', 'E'];

/// Expected-correct option labels for `n` multiple-choice items: round-robin
/// over one seeded permutation of A..E, so every letter count is within one
/// of n/5.
pub fn balanced_letters(n: usize, rng: &mut impl Rng) -> Vec<char> {
    let mut order = LETTERS;
    order.shuffle(rng);
    (0..n).map(|i| order[i % LETTERS.len()]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumBalance {
    pub task: Task,
    pub category: Category,
    pub variant: Variant,
    pub records: usize,
    /// Yes/no counts over originals only.
    pub original_yes: usize,
    pub original_no: usize,
    /// Yes/no counts over originals and contrapositives.
    pub yes: usize,
    pub no: usize,
    pub letters: BTreeMap<String, usize>,
    /// Template usage over originals.
    pub templates: BTreeMap<String, usize>,
}

/// Per-stratum balance counts keyed by `TASK/category` (plus `/cot` for
/// chain-of-thought variants).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BalanceReport {
    pub strata: BTreeMap<String, StratumBalance>,
}

impl BalanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("balance report serializes")
    }
}

pub(crate) fn stratum_key(task: Task, category: Category, variant: Variant) -> String {
    match variant {
        Variant::Plain => format!("{task}/{category}"),
        Variant::Cot => format!("{task}/{category}/cot"),
    }
}

/// The short answer a record carries: the record answer itself, or the final
/// token of a reasoning chain.
pub(crate) fn short_answer(r: &QaRecord) -> &str {
    match r.variant {
        Variant::Plain => r.answer.trim(),
        Variant::Cot => final_token(&r.answer),
    }
}

pub fn balance_report(records: &[QaRecord]) -> BalanceReport {
    let mut strata: BTreeMap<String, StratumBalance> = BTreeMap::new();
    for r in records {
        let s = strata
            .entry(stratum_key(r.task, r.category, r.variant))
            .or_insert_with(|| StratumBalance {
                task: r.task,
                category: r.category,
                variant: r.variant,
                records: 0,
                original_yes: 0,
                original_no: 0,
                yes: 0,
                no: 0,
                letters: BTreeMap::new(),
                templates: BTreeMap::new(),
            });
        s.records += 1;
        let original = !r.is_contrapositive();
        if original {
            *s.templates.entry(r.template_id.clone()).or_insert(0) += 1;
        }
        match r.task {
            Task::FV => {
                let yes = short_answer(r).eq_ignore_ascii_case("yes");
                if yes {
                    s.yes += 1;
                } else {
                    s.no += 1;
                }
                match (original, yes) {
                    (true, true) => s.original_yes += 1,
                    (true, false) => s.original_no += 1,
                    _ => {}
                }
            }
            Task::PM => {
                *s.letters.entry(short_answer(r).to_uppercase()).or_insert(0) += 1;
            }
            Task::NI => {}
        }
    }
    BalanceReport { strata }
}

/// Checks the balance contract and returns one message per violation:
/// FV yes/no within one (originals and combined), PM letters within one of
/// N/5, and rule-template usage within one of N/k for the k bank templates
/// of the stratum.
pub fn audit_balance(report: &BalanceReport, bank: &TemplateBank) -> Vec<String> {
    let mut problems = Vec::new();
    for (key, s) in &report.strata {
        if s.task == Task::FV {
            if s.original_yes.abs_diff(s.original_no) > 1 {
                problems.push(format!(
                    "{key}: original yes/no {}/{} differ by more than one",
                    s.original_yes, s.original_no
                ));
            }
            if s.yes.abs_diff(s.no) > 1 {
                problems.push(format!(
                    "{key}: combined yes/no {}/{} differ by more than one",
                    s.yes, s.no
                ));
            }
        }
        if s.task == Task::PM {
            let expect = s.records as f64 / LETTERS.len() as f64;
            for l in LETTERS {
                let c = s.letters.get(&l.to_string()).copied().unwrap_or(0);
                if (c as f64 - expect).abs() > 1.0 {
                    problems.push(format!("{key}: letter {l} appears {c} times, expected {expect:.1}"));
                }
            }
            for l in s.letters.keys() {
                if !LETTERS.iter().any(|x| x.to_string() == *l) {
                    problems.push(format!("{key}: answer {l:?} is not an option letter"));
                }
            }
        }
        let rule_stratum = s.category != Category::NonNumeric && s.task != Task::PM;
        if rule_stratum {
            let bank_ids: Vec<&str> = bank
                .stratum(s.task, s.category)
                .iter()
                .map(|t| t.template_id.as_str())
                .collect();
            let originals: usize = s.templates.values().sum();
            if bank_ids.is_empty() {
                problems.push(format!("{key}: no bank templates for this stratum"));
                continue;
            }
            let expect = originals as f64 / bank_ids.len() as f64;
            for id in &bank_ids {
                let c = s.templates.get(*id).copied().unwrap_or(0);
                if (c as f64 - expect).abs() > 1.0 {
                    problems.push(format!("{key}: template {id} used {c} times, expected {expect:.1}"));
                }
            }
            for id in s.templates.keys() {
                if !bank_ids.contains(&id.as_str()) {
                    problems.push(format!("{key}: template {id} is not in the bank"));
                }
            }
        }
    }
    problems
}
