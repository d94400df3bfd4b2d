use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::extract::{extract_answer, extract_final_answer, ParsedAnswer};
use super::{EvalError, PredictionRecord};
use crate::qa::{Category, QaRecord, Task, Variant};

pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.05, 0.10, 0.20];

/// Relative hit test with a strict inequality. A zero ground truth leaves an
/// empty band, so only an exact zero counts.
pub fn within_threshold(pred: f64, gt: f64, t: f64) -> bool {
    if gt == 0.0 {
        pred == 0.0
    } else {
        (pred - gt).abs() < t * gt.abs()
    }
}

fn parse_output(r: &QaRecord, raw: &str) -> ParsedAnswer {
    match r.variant {
        Variant::Plain => extract_answer(r.task, raw),
        Variant::Cot => extract_final_answer(r.task, raw),
    }
}

/// The answer a record expects, in parsed form.
pub(crate) fn reference(r: &QaRecord) -> Result<ParsedAnswer, EvalError> {
    let parsed = match r.task {
        Task::NI => r.gt_value.map_or(ParsedAnswer::Unparseable, ParsedAnswer::Numeric),
        _ => parse_output(r, &r.answer),
    };
    match parsed {
        ParsedAnswer::Unparseable => Err(EvalError::InvalidReference(r.qa_id.clone())),
        p => Ok(p),
    }
}

fn exact_hit(expected: ParsedAnswer, got: ParsedAnswer) -> bool {
    match (expected, got) {
        (ParsedAnswer::YesNo(a), ParsedAnswer::YesNo(b)) => a == b,
        (ParsedAnswer::Letter(a), ParsedAnswer::Letter(b)) => a == b,
        _ => false,
    }
}

/// Exact-match accuracy over FV/PM records. Records without a prediction and
/// unparseable outputs count as misses.
pub fn score_exact(records: &[QaRecord], preds: &HashMap<String, String>) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let hits = records
        .iter()
        .filter(|r| {
            let (Ok(expected), Some(raw)) = (reference(r), preds.get(&r.qa_id)) else {
                return false;
            };
            exact_hit(expected, parse_output(r, raw))
        })
        .count();
    hits as f64 / records.len() as f64
}

/// Threshold accuracy over NI records, one value per threshold.
pub fn score_ni(records: &[QaRecord], preds: &HashMap<String, String>, thresholds: &[f64]) -> Vec<f64> {
    let mut hits = vec![0usize; thresholds.len()];
    for r in records {
        let (Some(gt), Some(raw)) = (r.gt_value, preds.get(&r.qa_id)) else {
            continue;
        };
        if let ParsedAnswer::Numeric(p) = parse_output(r, raw) {
            for (h, &t) in hits.iter_mut().zip(thresholds) {
                if within_threshold(p, gt, t) {
                    *h += 1;
                }
            }
        }
    }
    hits.into_iter()
        .map(|h| {
            if records.is_empty() {
                0.0
            } else {
                h as f64 / records.len() as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumScore {
    pub task: Task,
    pub category: Category,
    pub variant: Variant,
    pub n: usize,
    /// Exact-match accuracy (FV, PM).
    pub accuracy: Option<f64>,
    /// Threshold accuracy keyed `TA@5`, `TA@10`, `TA@20` (NI).
    pub ta: Option<BTreeMap<String, f64>>,
    pub unparseable: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub category: Category,
    pub pairs: usize,
    pub ori_accuracy: f64,
    pub cp_accuracy: f64,
    /// `ori_accuracy - cp_accuracy`.
    pub delta: f64,
    /// Pairs whose two predictions are opposite yes/no answers.
    pub consistent_pairs: usize,
    pub pairwise_consistency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub total_records: usize,
    pub strata: Vec<StratumScore>,
    pub consistency: Vec<ConsistencyRow>,
    pub orphan_links: Vec<String>,
    pub missing_predictions: Vec<String>,
    pub unparseable_predictions: Vec<String>,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("score report serializes")
    }

    pub fn stratum(&self, task: Task, category: Category, variant: Variant) -> Option<&StratumScore> {
        self.strata
            .iter()
            .find(|s| s.task == task && s.category == category && s.variant == variant)
    }
}

fn ta_key(t: f64) -> String {
    format!("TA@{}", (t * 100.0).round() as i64)
}

/// Original-vs-contrapositive accuracy per category plus links whose partner
/// is absent or does not point back.
pub fn consistency_report(records: &[QaRecord], preds: &HashMap<String, String>) -> (Vec<ConsistencyRow>, Vec<String>) {
    let by_id: HashMap<&str, &QaRecord> = records.iter().map(|r| (r.qa_id.as_str(), r)).collect();
    let mut orphans = BTreeSet::new();
    // (pairs, ori hits, cp hits, consistent)
    let mut acc: BTreeMap<Category, (usize, usize, usize, usize)> = BTreeMap::new();
    let verdict = |r: &QaRecord| -> (bool, ParsedAnswer) {
        let got = preds
            .get(&r.qa_id)
            .map_or(ParsedAnswer::Unparseable, |raw| parse_output(r, raw));
        let hit = reference(r).map(|e| exact_hit(e, got)).unwrap_or(false);
        (hit, got)
    };
    for r in records
        .iter()
        .filter(|r| r.task == Task::FV && r.variant == Variant::Plain)
    {
        let Some(link) = &r.cp_link else { continue };
        let partner = by_id.get(link.as_str()).copied();
        let linked_back = partner.is_some_and(|p| p.cp_link.as_deref() == Some(r.qa_id.as_str()));
        if !linked_back {
            orphans.insert(r.qa_id.clone());
            continue;
        }
        if r.is_contrapositive() {
            continue;
        }
        let partner = partner.expect("checked above");
        let (ori_hit, ori_got) = verdict(r);
        let (cp_hit, cp_got) = verdict(partner);
        let e = acc.entry(r.category).or_default();
        e.0 += 1;
        e.1 += ori_hit as usize;
        e.2 += cp_hit as usize;
        if let (ParsedAnswer::YesNo(a), ParsedAnswer::YesNo(b)) = (ori_got, cp_got) {
            e.3 += (a != b) as usize;
        }
    }
    let rows = acc
        .into_iter()
        .map(|(category, (pairs, ori, cp, consistent))| {
            let frac = |x: usize| x as f64 / pairs as f64;
            ConsistencyRow {
                category,
                pairs,
                ori_accuracy: frac(ori),
                cp_accuracy: frac(cp),
                delta: frac(ori) - frac(cp),
                consistent_pairs: consistent,
                pairwise_consistency: frac(consistent),
            }
        })
        .collect();
    (rows, orphans.into_iter().collect())
}

/// Scores a prediction file against a dataset. Missing and unparseable
/// predictions are misses and are listed; duplicate or unknown prediction ids
/// are structural errors.
pub fn score_dataset(records: &[QaRecord], predictions: &[PredictionRecord]) -> Result<ScoreReport, EvalError> {
    let mut known = HashMap::new();
    for r in records {
        if known.insert(r.qa_id.as_str(), r).is_some() {
            return Err(EvalError::DuplicateRecord(r.qa_id.clone()));
        }
        reference(r)?;
    }
    let mut preds: HashMap<String, String> = HashMap::new();
    for p in predictions {
        if !known.contains_key(p.qa_id.as_str()) {
            return Err(EvalError::UnknownPrediction(p.qa_id.clone()));
        }
        if preds.insert(p.qa_id.clone(), p.raw_output.clone()).is_some() {
            return Err(EvalError::DuplicatePrediction(p.qa_id.clone()));
        }
    }

    let mut groups: BTreeMap<(Task, Category, Variant), Vec<QaRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.task, r.category, r.variant))
            .or_default()
            .push(r.clone());
    }
    let mut missing_ids = Vec::new();
    let mut unparseable_ids = Vec::new();
    let mut strata = Vec::new();
    for ((task, category, variant), group) in &groups {
        let mut missing = 0;
        let mut unparseable = 0;
        for r in group {
            match preds.get(&r.qa_id) {
                None => {
                    missing += 1;
                    missing_ids.push(r.qa_id.clone());
                }
                Some(raw) if parse_output(r, raw) == ParsedAnswer::Unparseable => {
                    unparseable += 1;
                    unparseable_ids.push(r.qa_id.clone());
                }
                Some(_) => {}
            }
        }
        let (accuracy, ta) = match task {
            Task::NI => {
                let values = score_ni(group, &preds, &DEFAULT_THRESHOLDS);
                let ta = DEFAULT_THRESHOLDS.iter().map(|&t| ta_key(t)).zip(values).collect();
                (None, Some(ta))
            }
            _ => (Some(score_exact(group, &preds)), None),
        };
        strata.push(StratumScore {
            task: *task,
            category: *category,
            variant: *variant,
            n: group.len(),
            accuracy,
            ta,
            unparseable,
            missing,
        });
    }
    let (consistency, orphan_links) = consistency_report(records, &preds);
    missing_ids.sort();
    unparseable_ids.sort();
    Ok(ScoreReport {
        total_records: records.len(),
        strata,
        consistency,
        orphan_links,
        missing_predictions: missing_ids,
        unparseable_predictions: unparseable_ids,
    })
}

/// Aligned text rendering: the task-by-category grid for plain records,
/// chain-of-thought rows, then the consistency table.
pub fn render_table(report: &ScoreReport) -> String {
    const COLS: [(Category, &str); 4] = [
        (Category::NonNumeric, "Non-Num"),
        (Category::Quantity, "Quantity"),
        (Category::Distance, "Distance"),
        (Category::Volume, "Volume"),
    ];
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.4}", x));
    let mut out = String::new();
    let _ = write!(out, "{:<4} {:<6}", "Task", "Metric");
    for (_, name) in COLS {
        let _ = write!(out, " {:>9}", name);
    }
    out.push('\n');

    let grid = |out: &mut String, variant: Variant, label: &str| {
        for task in [Task::PM, Task::FV, Task::NI] {
            let metrics: Vec<String> = match task {
                Task::NI => DEFAULT_THRESHOLDS.iter().map(|&t| ta_key(t)).collect(),
                _ => vec!["Acc".to_string()],
            };
            let any = COLS.iter().any(|(c, _)| report.stratum(task, *c, variant).is_some());
            if !any {
                continue;
            }
            for (i, metric) in metrics.iter().enumerate() {
                let name = if i == 0 {
                    format!("{task}{label}")
                } else {
                    String::new()
                };
                let _ = write!(out, "{:<4} {:<6}", name, metric);
                for (c, _) in COLS {
                    let v = report.stratum(task, c, variant).and_then(|s| match task {
                        Task::NI => s.ta.as_ref().and_then(|m| m.get(metric).copied()),
                        _ => s.accuracy,
                    });
                    let _ = write!(out, " {:>9}", cell(v));
                }
                out.push('\n');
            }
        }
    };
    grid(&mut out, Variant::Plain, "");
    grid(&mut out, Variant::Cot, "*");
    if report.strata.iter().any(|s| s.variant == Variant::Cot) {
        out.push_str("(* chain-of-thought variants)\n");
    }

    if !report.consistency.is_empty() {
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>8} {:>8} {:>8} {:>11}",
            "Consistency", "pairs", "Ori", "CP", "delta", "pairwise"
        );
        for row in &report.consistency {
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>8.4} {:>8.4} {:>+8.4} {:>11.4}",
                row.category.as_str(),
                row.pairs,
                row.ori_accuracy,
                row.cp_accuracy,
                row.delta,
                row.pairwise_consistency
            );
        }
    }
    let _ = writeln!(
        out,
        "\nrecords {}  missing {}  unparseable {}  orphan links {}",
        report.total_records,
        report.missing_predictions.len(),
        report.unparseable_predictions.len(),
        report.orphan_links.len()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::Provenance;

    fn ni(id: &str, gt: f64) -> QaRecord {
        QaRecord {
            qa_id: id.into(),
            scene_id: "s".into(),
            task: Task::NI,
            category: Category::Distance,
            question: "q".into(),
            answer: format!("{gt}"),
            gt_value: Some(gt),
            unit: Some("meters".into()),
            cp_link: None,
            variant: Variant::Plain,
            provenance: Provenance::Rule,
            template_id: "t".into(),
            referents: vec![],
        }
    }

    fn fv(id: &str, answer: &str, link: Option<&str>) -> QaRecord {
        QaRecord {
            task: Task::FV,
            category: Category::Quantity,
            answer: answer.into(),
            gt_value: None,
            unit: None,
            cp_link: link.map(str::to_string),
            ..ni(id, 1.0)
        }
    }

    fn preds(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn hand_checked_threshold_accuracy() {
        let recs: Vec<_> = (0..4).map(|i| ni(&format!("r{i}"), 10.0)).collect();
        let p = preds(&[("r0", "10.4"), ("r1", "10.6"), ("r2", "11.0"), ("r3", "12.5")]);
        assert_eq!(score_ni(&recs, &p, &DEFAULT_THRESHOLDS), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn perfect_and_unparseable() {
        let recs: Vec<_> = (0..3).map(|i| ni(&format!("r{i}"), 1.0 + i as f64)).collect();
        let good = preds(&[("r0", "1"), ("r1", "2"), ("r2", "3")]);
        assert_eq!(score_ni(&recs, &good, &DEFAULT_THRESHOLDS), vec![1.0; 3]);
        let bad = preds(&[("r0", "one"), ("r1", "two"), ("r2", "?")]);
        assert_eq!(score_ni(&recs, &bad, &DEFAULT_THRESHOLDS), vec![0.0; 3]);
    }

    #[test]
    fn zero_truth_needs_exact_zero() {
        assert!(within_threshold(0.0, 0.0, 0.05));
        assert!(!within_threshold(1e-12, 0.0, 0.2));
    }

    #[test]
    fn exact_accuracy() {
        let recs = vec![
            fv("a", "yes", None),
            fv("b", "no", None),
            fv("c", "yes", None),
            fv("d", "no", None),
        ];
        let p = preds(&[("a", "Yes."), ("b", "no"), ("c", "yes"), ("d", "yes")]);
        assert_eq!(score_exact(&recs, &p), 0.75);
        let mut pm = fv("e", "B", None);
        pm.task = Task::PM;
        assert_eq!(score_exact(&[pm], &preds(&[("e", "b.")])), 1.0);
    }

    #[test]
    fn constant_yes_consistency() {
        let recs = vec![
            fv("a", "yes", Some("a.cp")),
            fv("a.cp", "no", Some("a")),
            fv("b", "no", Some("b.cp")),
            fv("b.cp", "yes", Some("b")),
        ];
        let p = preds(&[("a", "yes"), ("a.cp", "yes"), ("b", "yes"), ("b.cp", "yes")]);
        let (rows, orphans) = consistency_report(&recs, &p);
        assert!(orphans.is_empty());
        assert_eq!(rows[0].ori_accuracy, 0.5);
        assert_eq!(rows[0].cp_accuracy, 0.5);
        assert_eq!(rows[0].pairwise_consistency, 0.0);
    }

    #[test]
    fn dangling_link_is_orphan() {
        let recs = vec![
            fv("a", "yes", Some("a.cp")),
            fv("b", "no", Some("b.cp")),
            fv("b.cp", "yes", Some("b")),
        ];
        let (_, orphans) = consistency_report(&recs, &HashMap::new());
        assert_eq!(orphans, vec!["a".to_string()]);
    }

    #[test]
    fn structural_errors() {
        let recs = vec![fv("a", "yes", None)];
        let dup = vec![
            PredictionRecord {
                qa_id: "a".into(),
                raw_output: "yes".into(),
            },
            PredictionRecord {
                qa_id: "a".into(),
                raw_output: "no".into(),
            },
        ];
        assert_eq!(
            score_dataset(&recs, &dup),
            Err(EvalError::DuplicatePrediction("a".into()))
        );
        let unknown = vec![PredictionRecord {
            qa_id: "z".into(),
            raw_output: "yes".into(),
        }];
        assert_eq!(
            score_dataset(&recs, &unknown),
            Err(EvalError::UnknownPrediction("z".into()))
        );
    }

    #[test]
    fn missing_is_flagged_and_counted() {
        let recs = vec![fv("a", "yes", None), fv("b", "no", None)];
        let p = vec![PredictionRecord {
            qa_id: "a".into(),
            raw_output: "yes".into(),
        }];
        let rep = score_dataset(&recs, &p).unwrap();
        assert_eq!(rep.missing_predictions, vec!["b".to_string()]);
        let s = rep.stratum(Task::FV, Category::Quantity, Variant::Plain).unwrap();
        assert_eq!((s.n, s.missing, s.accuracy), (2, 1, Some(0.5)));
        assert!(render_table(&rep).contains("FV"));
    }
}
