use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::sync::OnceLock;

use super::{JobKind, RewriteJob};
use crate::qa::LETTERS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureReason {
    NotJson,
    MissingKey,
    WrongOptionCount,
    AnswerNotAtExpectedLabel,
    DuplicateOptions,
    AnswerLeak,
    BadAnswerWord,
    CpNotInverted,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub reasons: Vec<FailureReason>,
}

impl ValidationVerdict {
    pub fn ok(&self) -> bool {
        self.reasons.is_empty()
    }

    fn single(r: FailureReason) -> Self {
        Self { reasons: vec![r] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmOutput {
    pub question: String,
    pub answer: char,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FvOutput {
    pub question: String,
    /// True when the original statement is affirmed.
    pub answer: bool,
    pub cp_question: String,
}

/// First balanced `{...}` in `raw`, parsed as a JSON object. Braces inside
/// string literals are skipped.
pub fn extract_json_object(raw: &str) -> Option<Map<String, Value>> {
    let start = raw.find('{')?;
    let bytes = raw.as_bytes();
    let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return match serde_json::from_str(&raw[start..=i]) {
                        Ok(Value::Object(m)) => Some(m),
                        _ => None,
                    };
                }
            }
            _ => {}
        }
    }
    None
}

fn string_keys<'a>(obj: &'a Map<String, Value>, keys: &[&str]) -> Option<Vec<&'a str>> {
    keys.iter().map(|k| obj.get(*k).and_then(Value::as_str)).collect()
}

fn option_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|\s)([A-Z])\)").expect("valid regex"))
}

/// Splits "stem A) x  B) y ..." into labelled options. `None` when the labels
/// are not A, B, C, ... in order.
fn split_options(question: &str) -> Option<Vec<String>> {
    let marks: Vec<(usize, usize, char)> = option_marker()
        .captures_iter(question)
        .map(|c| {
            let g = c.get(1).expect("group");
            (
                g.start(),
                c.get(0).expect("match").end(),
                g.as_str().chars().next().expect("letter"),
            )
        })
        .collect();
    if marks.iter().enumerate().any(|(i, m)| LETTERS.get(i) != Some(&m.2)) {
        return None;
    }
    Some(
        marks
            .iter()
            .enumerate()
            .map(|(i, &(_, body, _))| {
                let end = marks.get(i + 1).map_or(question.len(), |m| m.0);
                question[body..end].trim().to_string()
            })
            .collect(),
    )
}

pub fn validate_pm(raw: &str, job: &RewriteJob) -> Result<PmOutput, ValidationVerdict> {
    let JobKind::PM { label, n_options } = job.kind else {
        panic!("validate_pm called with an FV job");
    };
    let obj = extract_json_object(raw).ok_or_else(|| ValidationVerdict::single(FailureReason::NotJson))?;
    let Some([question, answer]) = string_keys(&obj, &["question", "Answer"]).map(|v| [v[0], v[1]]) else {
        return Err(ValidationVerdict::single(FailureReason::MissingKey));
    };
    let mut reasons = Vec::new();
    let options = match split_options(question) {
        Some(o) if o.len() == n_options => o,
        _ => return Err(ValidationVerdict::single(FailureReason::WrongOptionCount)),
    };
    let at = LETTERS.iter().position(|&l| l == label).expect("checked job");
    let key = answer.trim().trim_end_matches([')', '.']).to_ascii_uppercase();
    if options[at] != job.answer || key != label.to_string() {
        reasons.push(FailureReason::AnswerNotAtExpectedLabel);
    }
    let lower: Vec<String> = options.iter().map(|o| o.to_lowercase()).collect();
    if (0..lower.len()).any(|i| (i + 1..lower.len()).any(|j| lower[i] == lower[j])) {
        reasons.push(FailureReason::DuplicateOptions);
    }
    let needle = job.answer.to_lowercase();
    if lower.iter().enumerate().any(|(i, o)| i != at && o.contains(&needle)) {
        reasons.push(FailureReason::AnswerLeak);
    }
    if !reasons.is_empty() {
        return Err(ValidationVerdict { reasons });
    }
    Ok(PmOutput {
        question: question.trim().to_string(),
        answer: label,
        options,
    })
}

pub fn validate_fv(raw: &str, job: &RewriteJob) -> Result<FvOutput, ValidationVerdict> {
    let JobKind::FV {
        indicator,
        affirmative: ref aff,
        negative: ref neg,
    } = job.kind
    else {
        panic!("validate_fv called with a PM job");
    };
    let obj = extract_json_object(raw).ok_or_else(|| ValidationVerdict::single(FailureReason::NotJson))?;
    let Some(v) = string_keys(&obj, &["question", "Answer", "cp_question", "cp_answer"]) else {
        return Err(ValidationVerdict::single(FailureReason::MissingKey));
    };
    let (question, answer, cp_question, cp_answer) = (v[0].trim(), v[1].trim(), v[2].trim(), v[3].trim());
    let mut reasons = Vec::new();
    let word = |b: bool| if b { aff.as_str() } else { neg.as_str() };
    let suffix = format!("Is this correct? Answer with {aff} or {neg}.");
    let words_ok = [answer, cp_answer].iter().all(|a| *a == aff || *a == neg);
    if !words_ok || answer != word(indicator) || !question.ends_with(&suffix) || !cp_question.ends_with(&suffix) {
        reasons.push(FailureReason::BadAnswerWord);
    }
    if cp_answer == answer || cp_question.eq_ignore_ascii_case(question) {
        reasons.push(FailureReason::CpNotInverted);
    }
    if !reasons.is_empty() {
        return Err(ValidationVerdict { reasons });
    }
    Ok(FvOutput {
        question: question.to_string(),
        answer: indicator,
        cp_question: cp_question.to_string(),
    })
}
