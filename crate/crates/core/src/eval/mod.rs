//! Prediction scoring: exact-match accuracy for FV/PM, threshold accuracy for
//! NI, original/contrapositive consistency, and the dataset self-check.

mod extract;
mod score;
mod selfcheck;

pub use extract::{extract_answer, extract_final_answer, ParsedAnswer};
pub use score::{
    consistency_report, render_table, score_dataset, score_exact, score_ni, within_threshold, ConsistencyRow,
    ScoreReport, StratumScore, DEFAULT_THRESHOLDS,
};
pub use selfcheck::{selfcheck, SelfCheckReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One line of a prediction file: `{"qa_id": ..., "output": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub qa_id: String,
    #[serde(rename = "output")]
    pub raw_output: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("prediction for {0} appears more than once")]
    DuplicatePrediction(String),
    #[error("prediction for {0} does not match any dataset record")]
    UnknownPrediction(String),
    #[error("dataset lists {0} more than once")]
    DuplicateRecord(String),
    #[error("record {0} has no usable reference answer")]
    InvalidReference(String),
}
