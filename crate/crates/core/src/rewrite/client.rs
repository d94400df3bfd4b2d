use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

use super::prompt::prompt_field;
use crate::qa::LETTERS;
use crate::seed::{rng_for, stable_hash};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("service unavailable: {0}")]
    Unavailable(String),
    #[error("no scripted responses left")]
    QueueEmpty,
}

/// One chat-completion round trip: system text and user text in, raw
/// completion text out.
pub trait ServiceClient: Send + Sync {
    fn complete(&self, system: &str, user: &str) -> Result<String, ClientError>;
}

enum StubMode {
    Scripted(Mutex<VecDeque<String>>),
    Synthesizing(u64),
}

/// Offline client. `scripted` replays a fixed queue of responses in call
/// order; `synthesizing` reads the job fields back out of the prompt and
/// answers with a valid rewrite that depends only on the seed and prompt.
pub struct StubClient {
    mode: StubMode,
    calls: AtomicUsize,
}

const DISTRACTORS: [&str; 32] = [
    "chair",
    "table",
    "lamp",
    "window",
    "door",
    "sofa",
    "bed",
    "shelf",
    "desk",
    "cabinet",
    "sink",
    "mirror",
    "curtain",
    "pillow",
    "monitor",
    "keyboard",
    "trash can",
    "picture",
    "plant",
    "towel",
    "radiator",
    "whiteboard",
    "refrigerator",
    "microwave",
    "toilet",
    "bathtub",
    "backpack",
    "box",
    "brown",
    "white",
    "black",
    "two",
];

impl StubClient {
    pub fn scripted(responses: Vec<String>) -> Self {
        Self {
            mode: StubMode::Scripted(Mutex::new(responses.into())),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn synthesizing(seed: u64) -> Self {
        Self {
            mode: StubMode::Synthesizing(seed),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn synthesize(seed: u64, prompt: &str) -> Result<String, ClientError> {
        let field = |k: &str| {
            prompt_field(prompt, k).ok_or_else(|| ClientError::Unavailable(format!("stub cannot read field {k:?}")))
        };
        let saq = field("Original SAQ")?;
        let answer = field("Original Answer")?;
        if let Some(indicator) = prompt_field(prompt, "Boolean Indicator") {
            let words: Vec<&str> = field("Answer Options")?.split('"').collect();
            let (aff, neg) = match words.as_slice() {
                [_, a, _, n, ..] => (*a, *n),
                _ => return Err(ClientError::Unavailable("stub cannot read answer words".into())),
            };
            let truth = indicator == "True";
            let statement = |affirm: bool| {
                let not = if affirm { "" } else { "not " };
                format!("The answer to \"{saq}\" is {not}{answer}. Is this correct? Answer with {aff} or {neg}.")
            };
            let word = |b: bool| if b { aff } else { neg };
            return Ok(json!({
                "question": statement(truth),
                "Answer": word(truth),
                "cp_question": statement(!truth),
                "cp_answer": word(!truth),
            })
            .to_string());
        }
        let n: usize = field("Number of Options")?
            .parse()
            .map_err(|_| ClientError::Unavailable("bad option count".into()))?;
        let label = field("Expected Correct Option")?.trim_matches('"');
        let at = LETTERS
            .iter()
            .position(|l| l.to_string() == label)
            .filter(|&i| i < n && n <= LETTERS.len())
            .ok_or_else(|| ClientError::Unavailable("bad option label".into()))?;
        let mut rng = rng_for(seed, &format!("stub/{:016x}", stable_hash(prompt)));
        let needle = answer.to_lowercase();
        let mut pool: Vec<&str> = DISTRACTORS
            .iter()
            .copied()
            .filter(|d| !d.contains(needle.as_str()) && !d.eq_ignore_ascii_case(answer))
            .collect();
        pool.shuffle(&mut rng);
        let mut pool = pool.into_iter();
        let options: Vec<String> = (0..n)
            .map(|i| {
                let text = if i == at {
                    answer
                } else {
                    pool.next().unwrap_or("none of these")
                };
                format!("{}) {text}", LETTERS[i])
            })
            .collect();
        Ok(json!({
            "question": format!("{saq} Answer using the correct option letter. {}", options.join("  ")),
            "Answer": label,
        })
        .to_string())
    }
}

impl ServiceClient for StubClient {
    fn complete(&self, _system: &str, user: &str) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        match &self.mode {
            StubMode::Scripted(queue) => queue
                .lock()
                .expect("stub queue")
                .pop_front()
                .ok_or(ClientError::QueueEmpty),
            StubMode::Synthesizing(seed) => Self::synthesize(*seed, user),
        }
    }
}

/// Connection settings for an OpenAI-style chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    /// Extra tries after a transport failure.
    pub retries: u32,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    /// Environment variable holding a bearer token, if any.
    pub api_key_env: Option<String>,
}

pub struct HttpChatClient {
    settings: HttpSettings,
    agent: ureq::Agent,
}

impl HttpChatClient {
    pub fn new(settings: HttpSettings) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(settings.timeout_secs.max(1)))
            .build();
        Self { settings, agent }
    }
}

impl ServiceClient for HttpChatClient {
    fn complete(&self, system: &str, user: &str) -> Result<String, ClientError> {
        let s = &self.settings;
        let mut body = json!({
            "model": s.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        if let Some(t) = s.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(m) = s.max_tokens {
            body["max_tokens"] = json!(m);
        }
        let token = s.api_key_env.as_deref().and_then(|k| std::env::var(k).ok());
        let mut last = String::new();
        for _ in 0..=s.retries {
            let mut req = self.agent.post(&s.endpoint);
            if let Some(t) = &token {
                req = req.set("Authorization", &format!("Bearer {t}"));
            }
            match req.send_json(body.clone()) {
                Ok(resp) => {
                    let v: Value = resp.into_json().map_err(|e| ClientError::Unavailable(e.to_string()))?;
                    return v["choices"][0]["message"]["content"]
                        .as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ClientError::Unavailable("response has no message content".into()));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(ClientError::Unavailable(last))
    }
}
