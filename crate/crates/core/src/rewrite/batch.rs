use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rewrite_fv, rewrite_pm, FailureReason, RewriteError, RewriteJob, ServiceClient};
use crate::qa::{balanced_letters, QaRecord, Shortfall, Task, LETTERS};
use crate::seed::rng_for;

/// One short-answer question awaiting rewrite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaqRecord {
    pub saq_id: String,
    pub scene_id: String,
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteConfig {
    pub pm_target: usize,
    pub fv_target: usize,
    pub n_options: usize,
    pub affirmative: String,
    pub negative: String,
    /// Jobs in flight at once.
    pub in_flight: usize,
    pub seed: u64,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        Self {
            pm_target: 0,
            fv_target: 0,
            n_options: LETTERS.len(),
            affirmative: "yes".into(),
            negative: "no".into(),
            in_flight: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogEntry {
    pub job_id: String,
    pub saq_id: String,
    pub task: Task,
    pub attempts: usize,
    /// Failure reasons of each rejected attempt, in order.
    pub verdicts: Vec<Vec<FailureReason>>,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRun {
    /// Records in slot order: PM slots first, then FV pairs.
    pub records: Vec<QaRecord>,
    pub log: Vec<RunLogEntry>,
    pub shortfalls: Vec<Shortfall>,
}

#[derive(Clone, Copy)]
enum Slot {
    Pm(char),
    Fv(bool),
}

struct Pending {
    slot: usize,
    saq_id: String,
    job: RewriteJob,
}

/// Rewrites a pool of SAQs into `pm_target` PM records and `fv_target` FV
/// pairs. Option labels and boolean indicators are fixed per slot up front
/// (balanced), SAQs are drawn in a seeded order, and a dropped job hands its
/// slot to the next unused SAQ. Service failures abort the run; running out of
/// SAQs is reported as a shortfall.
pub fn run_rewrite(
    saqs: &[SaqRecord],
    cfg: &RewriteConfig,
    client: &dyn ServiceClient,
) -> Result<RewriteRun, RewriteError> {
    let mut rng = rng_for(cfg.seed, "rewrite/plan");
    let mut order: Vec<&SaqRecord> = saqs.iter().collect();
    order.sort_by(|a, b| a.saq_id.cmp(&b.saq_id));
    order.shuffle(&mut rng);
    let letters = balanced_letters(cfg.pm_target, &mut rng);
    let mut indicators: Vec<bool> = (0..cfg.fv_target).map(|i| i % 2 == 0).collect();
    indicators.shuffle(&mut rng);
    let slots: Vec<Slot> = letters
        .into_iter()
        .map(Slot::Pm)
        .chain(indicators.into_iter().map(Slot::Fv))
        .collect();

    let mut spare = order.into_iter();
    let mut next_id = 0usize;
    let mut make_job = |slot: usize, saq: &SaqRecord| {
        let job_id = format!("rw-{next_id:05}");
        next_id += 1;
        let job = match slots[slot] {
            Slot::Pm(label) => RewriteJob::pm(&job_id, &saq.scene_id, &saq.question, &saq.answer, label, cfg.n_options),
            Slot::Fv(ind) => RewriteJob::fv(
                &job_id,
                &saq.scene_id,
                &saq.question,
                &saq.answer,
                ind,
                (&cfg.affirmative, &cfg.negative),
            ),
        };
        Pending {
            slot,
            saq_id: saq.saq_id.clone(),
            job,
        }
    };
    let mut pending: Vec<Pending> = Vec::new();
    for slot in 0..slots.len() {
        match spare.next() {
            Some(saq) => pending.push(make_job(slot, saq)),
            None => break,
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.in_flight.max(1))
        .build()
        .expect("rewrite worker pool");
    let mut filled: Vec<Vec<QaRecord>> = vec![Vec::new(); slots.len()];
    let mut log = Vec::new();
    while !pending.is_empty() {
        let results: Vec<_> = pool.install(|| {
            pending
                .par_iter()
                .map(|p| match slots[p.slot] {
                    Slot::Pm(_) => rewrite_pm(&p.job, client).map(|r| (vec![r.output], r.attempts, r.failed)),
                    Slot::Fv(_) => {
                        rewrite_fv(&p.job, client).map(|r| (vec![r.output.0, r.output.1], r.attempts, r.failed))
                    }
                })
                .collect()
        });
        let mut retry = Vec::new();
        for (p, res) in pending.iter().zip(results) {
            let task = match slots[p.slot] {
                Slot::Pm(_) => Task::PM,
                Slot::Fv(_) => Task::FV,
            };
            let entry = |attempts, verdicts: Vec<Vec<FailureReason>>, outcome: &str| RunLogEntry {
                job_id: p.job.job_id.clone(),
                saq_id: p.saq_id.clone(),
                task,
                attempts,
                verdicts,
                outcome: outcome.into(),
            };
            match res {
                Ok((records, attempts, failed)) => {
                    log.push(entry(attempts, failed.into_iter().map(|v| v.reasons).collect(), "ok"));
                    filled[p.slot] = records;
                }
                Err(RewriteError::ExhaustedAttempts { verdicts, .. }) => {
                    tracing::warn!(job = %p.job.job_id, saq = %p.saq_id, "rewrite dropped after exhausting attempts");
                    log.push(entry(
                        verdicts.len(),
                        verdicts.into_iter().map(|v| v.reasons).collect(),
                        "dropped",
                    ));
                    if let Some(saq) = spare.next() {
                        retry.push(make_job(p.slot, saq));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        pending = retry;
    }

    let produced = |want: fn(&Slot) -> bool| {
        slots
            .iter()
            .zip(&filled)
            .filter(|(s, r)| want(s) && !r.is_empty())
            .count()
    };
    let mut shortfalls = Vec::new();
    for (stratum, requested, got) in [
        ("PM/non-numeric", cfg.pm_target, produced(|s| matches!(s, Slot::Pm(_)))),
        ("FV/non-numeric", cfg.fv_target, produced(|s| matches!(s, Slot::Fv(_)))),
    ] {
        if got < requested {
            shortfalls.push(Shortfall {
                stratum: stratum.into(),
                requested,
                produced: got,
            });
        }
    }
    Ok(RewriteRun {
        records: filled.into_iter().flatten().collect(),
        log,
        shortfalls,
    })
}
