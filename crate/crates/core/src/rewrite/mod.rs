//! Rewriting short-answer questions into multiple-choice (PM) and
//! fact-validation (FV) form through an external text-generation service.
//!
//! Every response passes through the validators in [`validate`]; a job gets
//! at most [`MAX_ATTEMPTS`] calls with the identical prompt before it is
//! dropped. The stub clients make the track usable offline.

mod batch;
mod client;
mod prompt;
mod validate;

pub use batch::{run_rewrite, RewriteConfig, RewriteRun, RunLogEntry, SaqRecord};
pub use client::{ClientError, HttpChatClient, HttpSettings, ServiceClient, StubClient};
pub use prompt::{render_fv_prompt, render_pm_prompt, PROMPT_VERSION, REWRITE_SYSTEM, SYSTEM_PROMPT};
pub use validate::{
    extract_json_object, validate_fv, validate_pm, FailureReason, FvOutput, PmOutput, ValidationVerdict,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qa::{Category, Provenance, QaRecord, Task, Variant, LETTERS};

pub const MAX_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum JobKind {
    PM {
        label: char,
        n_options: usize,
    },
    FV {
        indicator: bool,
        affirmative: String,
        negative: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteJob {
    pub job_id: String,
    pub scene_id: String,
    pub saq: String,
    pub answer: String,
    #[serde(flatten)]
    pub kind: JobKind,
}

impl RewriteJob {
    pub fn pm(job_id: &str, scene_id: &str, saq: &str, answer: &str, label: char, n_options: usize) -> Self {
        Self {
            job_id: job_id.into(),
            scene_id: scene_id.into(),
            saq: one_line(saq),
            answer: one_line(answer),
            kind: JobKind::PM { label, n_options },
        }
    }

    pub fn fv(job_id: &str, scene_id: &str, saq: &str, answer: &str, indicator: bool, words: (&str, &str)) -> Self {
        Self {
            job_id: job_id.into(),
            scene_id: scene_id.into(),
            saq: one_line(saq),
            answer: one_line(answer),
            kind: JobKind::FV {
                indicator,
                affirmative: words.0.into(),
                negative: words.1.into(),
            },
        }
    }

    pub fn check(&self) -> Result<(), RewriteError> {
        let bad = |d: &str| {
            Err(RewriteError::InvalidJob {
                job_id: self.job_id.clone(),
                detail: d.into(),
            })
        };
        if self.saq.is_empty() || self.answer.is_empty() {
            return bad("empty question or answer");
        }
        match &self.kind {
            JobKind::PM { label, n_options } => {
                if !(2..=LETTERS.len()).contains(n_options) {
                    return bad("option count must be between 2 and 5");
                }
                if !LETTERS[..*n_options].contains(label) {
                    return bad("expected label outside the option range");
                }
            }
            JobKind::FV {
                affirmative, negative, ..
            } => {
                if affirmative.trim().is_empty() || negative.trim().is_empty() {
                    return bad("both answer words are required");
                }
                if affirmative.eq_ignore_ascii_case(negative) {
                    return bad("answer words must differ");
                }
            }
        }
        Ok(())
    }

    pub fn qa_id(&self) -> String {
        format!("{}:{}", self.scene_id, self.job_id)
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A validated rewrite and the verdicts of the attempts that failed first.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite<T> {
    pub output: T,
    pub attempts: usize,
    pub failed: Vec<ValidationVerdict>,
}

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("job {job_id}: no valid response after {} attempts", .verdicts.len())]
    ExhaustedAttempts {
        job_id: String,
        verdicts: Vec<ValidationVerdict>,
    },
    #[error("job {job_id}: service unavailable: {detail}")]
    ServiceUnavailable { job_id: String, detail: String },
    #[error("job {job_id}: stub response queue is empty")]
    QueueEmpty { job_id: String },
    #[error("job {job_id}: {detail}")]
    InvalidJob { job_id: String, detail: String },
    #[error("job {0} has the wrong kind for this operation")]
    WrongKind(String),
}

fn attempt_loop<T>(
    job: &RewriteJob,
    client: &dyn ServiceClient,
    prompt: &str,
    validate: impl Fn(&str) -> Result<T, ValidationVerdict>,
) -> Result<Rewrite<T>, RewriteError> {
    job.check()?;
    let mut failed = Vec::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let raw = client.complete(REWRITE_SYSTEM, prompt).map_err(|e| match e {
            ClientError::QueueEmpty => RewriteError::QueueEmpty {
                job_id: job.job_id.clone(),
            },
            ClientError::Unavailable(detail) => RewriteError::ServiceUnavailable {
                job_id: job.job_id.clone(),
                detail,
            },
        })?;
        match validate(&raw) {
            Ok(output) => {
                return Ok(Rewrite {
                    output,
                    attempts: attempt,
                    failed,
                })
            }
            Err(v) => {
                tracing::debug!(job = %job.job_id, attempt, reasons = ?v.reasons, "rewrite rejected");
                failed.push(v);
            }
        }
    }
    Err(RewriteError::ExhaustedAttempts {
        job_id: job.job_id.clone(),
        verdicts: failed,
    })
}

fn llm_record(job: &RewriteJob, qa_id: String, task: Task, question: String, answer: String) -> QaRecord {
    QaRecord {
        qa_id,
        scene_id: job.scene_id.clone(),
        task,
        category: Category::NonNumeric,
        question,
        answer,
        gt_value: None,
        unit: None,
        cp_link: None,
        variant: Variant::Plain,
        provenance: Provenance::Llm,
        template_id: format!("rewrite-{}", task.as_str().to_lowercase()),
        referents: Vec::new(),
    }
}

/// Rewrites one SAQ into a multiple-choice record whose answer is the job's
/// expected option label.
pub fn rewrite_pm(job: &RewriteJob, client: &dyn ServiceClient) -> Result<Rewrite<QaRecord>, RewriteError> {
    if !matches!(job.kind, JobKind::PM { .. }) {
        return Err(RewriteError::WrongKind(job.job_id.clone()));
    }
    let prompt = render_pm_prompt(job);
    let r = attempt_loop(job, client, &prompt, |raw| validate_pm(raw, job))?;
    let out = r.output;
    Ok(Rewrite {
        output: llm_record(job, job.qa_id(), Task::PM, out.question, out.answer.to_string()),
        attempts: r.attempts,
        failed: r.failed,
    })
}

/// Rewrites one SAQ into an FV original and its contrapositive, linked to
/// each other. Record answers are normalized to `yes`/`no`.
pub fn rewrite_fv(job: &RewriteJob, client: &dyn ServiceClient) -> Result<Rewrite<(QaRecord, QaRecord)>, RewriteError> {
    if !matches!(job.kind, JobKind::FV { .. }) {
        return Err(RewriteError::WrongKind(job.job_id.clone()));
    }
    let prompt = render_fv_prompt(job);
    let r = attempt_loop(job, client, &prompt, |raw| validate_fv(raw, job))?;
    let out = r.output;
    let yn = |b: bool| if b { "yes" } else { "no" }.to_string();
    let id = job.qa_id();
    let cp_id = format!("{id}.cp");
    let mut ori = llm_record(job, id.clone(), Task::FV, out.question, yn(out.answer));
    let mut cp = llm_record(job, cp_id.clone(), Task::FV, out.cp_question, yn(!out.answer));
    ori.cp_link = Some(cp_id);
    cp.cp_link = Some(id);
    Ok(Rewrite {
        output: (ori, cp),
        attempts: r.attempts,
        failed: r.failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const PARIS_OUTPUT: &str = r#"{
  "question": "What is the capital of France? Answer using the correct option letter. A) Berlin  B) Parris  C) London  D) Rome",
  "Answer": "B"
}"#;

    pub(crate) const BOB_OUTPUT: &str = r#"{
  "question": "Bob does not sit next to Alice. Is this correct? Answer with yes or no.",
  "Answer": "no",
  "cp_question": "Bob sits next to Alice. Is this correct? Answer with yes or no.",
  "cp_answer": "yes"
}"#;

    fn paris_job() -> RewriteJob {
        RewriteJob::pm("rw-00000", "s", "What is the capital of France?", "Parris", 'B', 4)
    }

    fn bob_job() -> RewriteJob {
        RewriteJob::fv("rw-00001", "s", "Who sits next to Alice?", "Bob", false, ("yes", "no"))
    }

    #[test]
    fn paris_example() {
        let client = StubClient::scripted(vec![PARIS_OUTPUT.into()]);
        let r = rewrite_pm(&paris_job(), &client).unwrap();
        assert_eq!(r.output.answer, "B");
        assert!(r.output.question.contains("B) Parris"));
        assert_eq!(r.attempts, 1);
        assert_eq!(r.output.provenance, Provenance::Llm);
    }

    #[test]
    fn four_options_then_valid() {
        let bad = PARIS_OUTPUT.replace("  D) Rome", "");
        let client = StubClient::scripted(vec![bad, PARIS_OUTPUT.into()]);
        let r = rewrite_pm(&paris_job(), &client).unwrap();
        assert_eq!(r.attempts, 2);
        assert_eq!(r.failed[0].reasons, vec![FailureReason::WrongOptionCount]);
    }

    #[test]
    fn prose_exhausts_after_five_calls() {
        let client = StubClient::scripted(vec!["Sure! Here you go.".into(); 7]);
        match rewrite_pm(&paris_job(), &client) {
            Err(RewriteError::ExhaustedAttempts { verdicts, .. }) => {
                assert_eq!(verdicts.len(), 5);
                assert!(verdicts.iter().all(|v| v.reasons == vec![FailureReason::NotJson]));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(client.calls(), 5);
    }

    #[test]
    fn bob_example() {
        let client = StubClient::scripted(vec![BOB_OUTPUT.into()]);
        let (ori, cp) = rewrite_fv(&bob_job(), &client).unwrap().output;
        assert_eq!((ori.answer.as_str(), cp.answer.as_str()), ("no", "yes"));
        assert_eq!(ori.cp_link.as_deref(), Some(cp.qa_id.as_str()));
        assert_eq!(cp.cp_link.as_deref(), Some(ori.qa_id.as_str()));
        assert!(cp.is_contrapositive());
    }

    #[test]
    fn same_cp_answer_regenerates() {
        let bad = BOB_OUTPUT.replace(r#""cp_answer": "yes""#, r#""cp_answer": "no""#);
        let client = StubClient::scripted(vec![bad, BOB_OUTPUT.into()]);
        let r = rewrite_fv(&bob_job(), &client).unwrap();
        assert_eq!(r.attempts, 2);
        assert!(r.failed[0].reasons.contains(&FailureReason::CpNotInverted));
    }

    #[test]
    fn missing_cp_question_regenerates() {
        let v: serde_json::Value = serde_json::from_str(BOB_OUTPUT).unwrap();
        let mut m = v.as_object().unwrap().clone();
        m.remove("cp_question");
        let client = StubClient::scripted(vec![serde_json::Value::Object(m).to_string(), BOB_OUTPUT.into()]);
        let r = rewrite_fv(&bob_job(), &client).unwrap();
        assert_eq!(r.failed[0].reasons, vec![FailureReason::MissingKey]);
    }

    #[test]
    fn empty_script_is_queue_empty() {
        let client = StubClient::scripted(vec![]);
        assert!(matches!(
            rewrite_fv(&bob_job(), &client),
            Err(RewriteError::QueueEmpty { .. })
        ));
    }

    #[test]
    fn bad_bad_good() {
        let client = StubClient::scripted(vec!["{".into(), "[]".into(), PARIS_OUTPUT.into()]);
        assert_eq!(rewrite_pm(&paris_job(), &client).unwrap().attempts, 3);
    }

    #[test]
    fn invalid_jobs_are_rejected_before_calling() {
        let client = StubClient::scripted(vec![]);
        let job = RewriteJob::pm("j", "s", "q?", "a", 'E', 4);
        assert!(matches!(
            rewrite_pm(&job, &client),
            Err(RewriteError::InvalidJob { .. })
        ));
        assert!(matches!(
            rewrite_fv(&paris_job(), &client),
            Err(RewriteError::WrongKind(_))
        ));
        assert_eq!(client.calls(), 0);
    }
}
