use super::format::{display_count, display_value};
use super::template::{substitute, Comparator, TemplateBank};
use super::{Category, Provenance, QaError, QaRecord, Task, Variant};
use crate::ngt::{InstanceNgt, NgtTable};

/// Replaces the answer-format instruction in chain-of-thought questions.
pub const COT_SUFFIX: &str = "Please solve the problem step by step. Show each intermediate thought process clearly and provide the final answer after completing the reasoning process.";

/// Last whitespace-separated token with trailing punctuation removed: the
/// final answer of a reasoning chain.
pub(crate) fn final_token(text: &str) -> &str {
    text.split_whitespace()
        .last()
        .unwrap_or("")
        .trim_end_matches(['.', ',', ';', ':', '!', '?'])
}

/// Builds the chain-of-thought variant of a rule-generated FV record or NI
/// volume record. The chain restates the relevant NGT values and ends with
/// "Therefore, the answer is X." where X is the plain answer.
pub fn gen_cot_variant(q: &QaRecord, ngt: &NgtTable, bank: &TemplateBank) -> Result<QaRecord, QaError> {
    let unsupported = || QaError::UnsupportedTask(format!("{}/{} ({:?})", q.task, q.category, q.provenance));
    let supported = matches!(
        (q.task, q.category),
        (Task::NI, Category::Volume) | (Task::FV, Category::Quantity | Category::Distance | Category::Volume)
    );
    if !supported || q.provenance != Provenance::Rule || q.variant != Variant::Plain {
        return Err(unsupported());
    }
    let template = bank.get(&q.template_id).ok_or_else(|| QaError::InconsistentRecord {
        qa_id: q.qa_id.clone(),
        detail: format!("unknown template {}", q.template_id),
    })?;
    let inconsistent = |detail: &str| QaError::InconsistentRecord {
        qa_id: q.qa_id.clone(),
        detail: detail.to_string(),
    };
    let referent = |label: &str| -> Result<&InstanceNgt, QaError> {
        let mut hits = ngt.instances().iter().filter(|i| i.label == label);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            _ => Err(inconsistent(&format!("{label} is not a unique referent"))),
        }
    };
    let r = &q.referents;
    let text = match (q.task, q.category) {
        (Task::NI, Category::Volume) => {
            let inst = referent(&r[0])?;
            let [dx, dy, dz] = inst.dims;
            let v = display_value(inst.volume);
            format!(
                "Given the bounding box dimensions of the {} along the X, Y, and Z axes as {} m, {} m, and {} m respectively, the volume of the bounding box is calculated as (length x width x height), yielding approximately {v} cubic meters. Therefore, the answer is {v}.",
                r[0],
                display_value(dx),
                display_value(dy),
                display_value(dz),
            )
        }
        (Task::FV, Category::Quantity | Category::Distance | Category::Volume) => {
            let cmp = template
                .comparator
                .ok_or_else(|| inconsistent("FV template without comparator"))?;
            let cmp = if q.is_contrapositive() { cmp.invert() } else { cmp };
            let count = |label: &str| ngt.label_counts().get(label).copied();
            let (a, b) = match q.category {
                Category::Quantity => (
                    count(&r[0]).ok_or_else(|| inconsistent("unknown label"))? as f64,
                    count(&r[1]).ok_or_else(|| inconsistent("unknown label"))? as f64,
                ),
                Category::Volume => (referent(&r[0])?.volume, referent(&r[1])?.volume),
                _ => {
                    let d = |x: &str, y: &str| -> Result<f64, QaError> {
                        ngt.distance(&referent(x)?.instance_id, &referent(y)?.instance_id)
                            .ok_or_else(|| inconsistent("pair distance unavailable"))
                    };
                    (d(&r[0], &r[1])?, d(&r[2], &r[3])?)
                }
            };
            let relation = match cmp {
                Comparator::ApproxEqual | Comparator::NotApproxEqual => {
                    let close = (q.answer == "yes") == (cmp == Comparator::ApproxEqual);
                    if close {
                        "approximately equal to"
                    } else {
                        "not approximately equal to"
                    }
                }
                _ if a < b => "less than",
                _ if a > b => "greater than",
                _ => "equal to",
            };
            let ans = &q.answer;
            match q.category {
                Category::Quantity => format!(
                    "Given the count of {} as {} and the count of {} as {}, the count of {} is {relation} the count of {}. Therefore, the answer is {ans}.",
                    r[0],
                    display_count(a as usize),
                    r[1],
                    display_count(b as usize),
                    r[0],
                    r[1],
                ),
                Category::Volume => format!(
                    "Given the volume of the bounding box of {} as {} cubic meters and the volume of the bounding box of {} as {} cubic meters, the volume of the bounding box of {} is {relation} the volume of the bounding box of {}. Therefore, the answer is {ans}.",
                    r[0],
                    display_value(a),
                    r[1],
                    display_value(b),
                    r[0],
                    r[1],
                ),
                _ => format!(
                    "The distance between {} and {} is approximately {} meters. The distance between {} and {} is approximately {} meters. Since the distance between {} and {} is {relation} the distance between {} and {}, the answer is {ans}.",
                    r[0],
                    r[1],
                    display_value(a),
                    r[2],
                    r[3],
                    display_value(b),
                    r[0],
                    r[1],
                    r[2],
                    r[3],
                ),
            }
        }
        _ => return Err(unsupported()),
    };

    let body_template = if q.is_contrapositive() {
        template.cp_text.as_deref().unwrap_or(&template.text)
    } else {
        &template.text
    };
    let bindings: Vec<&str> = r.iter().map(String::as_str).collect();
    let body = substitute(&template.template_id, body_template, template.arity, &bindings, &[])?;
    Ok(QaRecord {
        qa_id: format!("{}.cot", q.qa_id),
        question: format!("{body} {COT_SUFFIX}"),
        answer: text,
        cp_link: None,
        variant: Variant::Cot,
        ..q.clone()
    })
}
