use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::qa::Task;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ParsedAnswer {
    YesNo(bool),
    Letter(char),
    Numeric(f64),
    Unparseable,
}

fn yes_no_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap())
}

fn letter_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b([A-E])\b|\b([a-e])[).]").unwrap())
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[-+]?(?:\d+(?:\.\d+)?|\.\d+)").unwrap())
}

fn parse_match(task: Task, m: regex::Captures<'_>) -> ParsedAnswer {
    match task {
        Task::FV => ParsedAnswer::YesNo(m[1].eq_ignore_ascii_case("yes")),
        Task::PM => {
            let c = m.get(1).or_else(|| m.get(2)).expect("one group matches");
            ParsedAnswer::Letter(c.as_str().chars().next().unwrap().to_ascii_uppercase())
        }
        Task::NI => m[0]
            .parse()
            .map(ParsedAnswer::Numeric)
            .unwrap_or(ParsedAnswer::Unparseable),
    }
}

fn pattern(task: Task) -> &'static Regex {
    match task {
        Task::FV => yes_no_re(),
        Task::PM => letter_re(),
        Task::NI => number_re(),
    }
}

/// First answer token of the kind the task expects: a standalone yes/no
/// (any case) for FV, a standalone capital A-E or a lowercase a-e followed by
/// `)` or `.` for PM, the first decimal numeral for NI.
pub fn extract_answer(task: Task, raw: &str) -> ParsedAnswer {
    pattern(task)
        .captures(raw)
        .map_or(ParsedAnswer::Unparseable, |m| parse_match(task, m))
}

/// Like [`extract_answer`] but takes the last match, for step-by-step outputs
/// whose final answer follows the reasoning.
pub fn extract_final_answer(task: Task, raw: &str) -> ParsedAnswer {
    pattern(task)
        .captures_iter(raw)
        .last()
        .map_or(ParsedAnswer::Unparseable, |m| parse_match(task, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fv_first_token() {
        assert_eq!(
            extract_answer(Task::FV, "Yes, the sofa is larger."),
            ParsedAnswer::YesNo(true)
        );
        assert_eq!(extract_answer(Task::FV, "NO."), ParsedAnswer::YesNo(false));
        assert_eq!(extract_answer(Task::FV, "nobody knows"), ParsedAnswer::Unparseable);
        assert_eq!(extract_answer(Task::FV, "not sure, yes"), ParsedAnswer::YesNo(true));
    }

    #[test]
    fn pm_letters() {
        assert_eq!(
            extract_answer(Task::PM, "The answer is B) Parris"),
            ParsedAnswer::Letter('B')
        );
        assert_eq!(extract_answer(Task::PM, "b."), ParsedAnswer::Letter('B'));
        assert_eq!(extract_answer(Task::PM, "c) lamp"), ParsedAnswer::Letter('C'));
        assert_eq!(extract_answer(Task::PM, "F"), ParsedAnswer::Unparseable);
        assert_eq!(extract_answer(Task::PM, "the bed"), ParsedAnswer::Unparseable);
    }

    #[test]
    fn ni_numbers() {
        assert_eq!(
            extract_answer(Task::NI, "approximately 3.83 cubic meters"),
            ParsedAnswer::Numeric(3.83)
        );
        assert_eq!(extract_answer(Task::NI, "-2"), ParsedAnswer::Numeric(-2.0));
        assert_eq!(extract_answer(Task::NI, "about .5 m"), ParsedAnswer::Numeric(0.5));
        assert_eq!(extract_answer(Task::NI, "two"), ParsedAnswer::Unparseable);
    }

    #[test]
    fn final_answer_takes_last() {
        let chain = "Given 1.98 m, 2.32 m and 0.83 m, yielding 3.81 cubic meters. Therefore, the answer is 3.81.";
        assert_eq!(extract_final_answer(Task::NI, chain), ParsedAnswer::Numeric(3.81));
        assert_eq!(extract_answer(Task::NI, chain), ParsedAnswer::Numeric(1.98));
        assert_eq!(
            extract_final_answer(Task::FV, "No doubt the count is less. Therefore, the answer is yes."),
            ParsedAnswer::YesNo(true)
        );
    }
}
