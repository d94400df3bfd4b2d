use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::extract::ParsedAnswer;
use super::score::{reference, score_dataset, ScoreReport};
use super::PredictionRecord;
use crate::qa::{
    audit_balance, balance_report, display_count, display_value, short_answer, Category, QaRecord, Task, TemplateBank,
    Variant, LETTERS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub passed: bool,
    pub records: usize,
    pub problems: Vec<String>,
    /// The dataset scored against its own answers; `None` when the dataset is
    /// structurally unscorable.
    pub self_score: Option<ScoreReport>,
}

/// Verifies a generated dataset: self-scoring is perfect, numeric answers are
/// the displayed ground truth, balance holds, contrapositive links are an
/// involution with opposite answers, and answers lie in their task's domain.
pub fn selfcheck(records: &[QaRecord], bank: &TemplateBank) -> SelfCheckReport {
    let mut problems = Vec::new();
    let by_id: HashMap<&str, &QaRecord> = records.iter().map(|r| (r.qa_id.as_str(), r)).collect();
    if by_id.len() != records.len() {
        problems.push("dataset contains duplicate qa_ids".to_string());
    }

    for r in records {
        check_domain(r, &mut problems);
        check_links(r, &by_id, &mut problems);
    }

    let preds: Vec<PredictionRecord> = records
        .iter()
        .map(|r| PredictionRecord {
            qa_id: r.qa_id.clone(),
            raw_output: r.answer.clone(),
        })
        .collect();
    let self_score = match score_dataset(records, &preds) {
        Ok(rep) => {
            for s in &rep.strata {
                let perfect = match (&s.accuracy, &s.ta) {
                    (Some(a), _) => *a == 1.0,
                    (None, Some(ta)) => ta.values().all(|v| *v == 1.0),
                    _ => false,
                };
                if !perfect {
                    problems.push(format!(
                        "self-score below 1.0 for {}/{}/{:?}",
                        s.task, s.category, s.variant
                    ));
                }
            }
            for id in rep.unparseable_predictions.iter().chain(&rep.orphan_links) {
                problems.push(format!("{id}: fails self-scoring or linking"));
            }
            Some(rep)
        }
        Err(e) => {
            problems.push(format!("dataset is not scorable: {e}"));
            None
        }
    };

    problems.extend(audit_balance(&balance_report(records), bank));
    SelfCheckReport {
        passed: problems.is_empty(),
        records: records.len(),
        problems,
        self_score,
    }
}

fn check_domain(r: &QaRecord, problems: &mut Vec<String>) {
    let id = &r.qa_id;
    let short = short_answer(r);
    match r.task {
        Task::FV => {
            if short != "yes" && short != "no" {
                problems.push(format!("{id}: FV answer {short:?} is not yes/no"));
            }
        }
        Task::PM => {
            if !(short.len() == 1 && LETTERS.iter().any(|l| short.starts_with(*l))) {
                problems.push(format!("{id}: PM answer {short:?} is not an option letter"));
            }
            if r.category != Category::NonNumeric {
                problems.push(format!("{id}: PM record with numeric category"));
            }
        }
        Task::NI => {
            let Some(gt) = r.gt_value.filter(|v| v.is_finite() && *v >= 0.0) else {
                problems.push(format!("{id}: NI record without a finite non-negative gt_value"));
                return;
            };
            if r.unit.as_deref() != r.category.unit() {
                problems.push(format!("{id}: unit {:?} does not match {}", r.unit, r.category));
            }
            let shown = match r.category {
                Category::Quantity if gt.fract() == 0.0 => display_count(gt as usize),
                Category::Quantity => {
                    problems.push(format!("{id}: fractional count {gt}"));
                    return;
                }
                _ => display_value(gt),
            };
            if short != shown {
                problems.push(format!(
                    "{id}: answer {short:?} is not the displayed ground truth {shown:?}"
                ));
            }
        }
    }
    if reference(r).is_err() {
        problems.push(format!("{id}: answer cannot be parsed"));
    }
}

fn check_links(r: &QaRecord, by_id: &HashMap<&str, &QaRecord>, problems: &mut Vec<String>) {
    let id = &r.qa_id;
    let fv_plain = r.task == Task::FV && r.variant == Variant::Plain;
    let Some(link) = &r.cp_link else {
        if fv_plain {
            problems.push(format!("{id}: FV record without a contrapositive link"));
        }
        return;
    };
    if !fv_plain {
        problems.push(format!("{id}: only plain FV records carry contrapositive links"));
        return;
    }
    let Some(partner) = by_id.get(link.as_str()) else {
        problems.push(format!("{id}: contrapositive {link} is missing"));
        return;
    };
    if partner.cp_link.as_deref() != Some(id.as_str()) {
        problems.push(format!("{id}: {link} does not link back"));
    }
    if r.is_contrapositive() == partner.is_contrapositive() {
        problems.push(format!("{id}: exactly one side of a pair must be the contrapositive"));
    }
    if let (Ok(ParsedAnswer::YesNo(a)), Ok(ParsedAnswer::YesNo(b))) = (reference(r), reference(partner)) {
        if a == b {
            problems.push(format!("{id}: contrapositive {link} has the same answer"));
        }
    }
}
