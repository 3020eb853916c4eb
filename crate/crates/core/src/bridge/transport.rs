//! Request types and the ways of answering them.
//!
//! Replay fixtures live in one directory, one file per request:
//! `<dir>/<key>.json` holding `{"request": <request>, "response": "<text>"}`,
//! where `key` is the hex SHA-256 of the request's compact JSON encoding.
//! Live transcripts are written in the same layout, so a recorded Live run
//! can be replayed as is.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::templates::Template;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub previous: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentRequest {
    pub chunk: String,
    pub env_in: BTreeMap<String, u32>,
    /// Last assertions of the script built so far.
    pub prior_tail: Vec<String>,
    pub examples: Vec<Template>,
    pub attempt: u32,
    pub feedback: Option<Feedback>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub function: String,
    pub source: String,
    pub path: String,
    /// `name: type` per parameter.
    pub params: Vec<String>,
    pub attempt: u32,
    pub feedback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum BridgeRequest {
    Fragment(FragmentRequest),
    Solve(SolveRequest),
}

impl BridgeRequest {
    pub fn key(&self) -> String {
        let json = serde_json::to_string(self).expect("requests serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("no replay fixture for request {key} (expected {path})")]
    MissingFixture { key: String, path: PathBuf },
    #[error("malformed fixture {path}: {message}")]
    MalformedFixture { path: PathBuf, message: String },
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("live mode needs {0}")]
    NotConfigured(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Transport: Send + Sync {
    fn complete(&self, request: &BridgeRequest) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exchange {
    pub request: BridgeRequest,
    pub response: String,
}

#[derive(Debug, Clone)]
pub struct ReplayTransport {
    pub dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn fixture_path(&self, request: &BridgeRequest) -> PathBuf {
        self.dir.join(format!("{}.json", request.key()))
    }

    /// Writes a fixture answering `request` with `response`.
    pub fn record(dir: &Path, request: &BridgeRequest, response: &str) -> Result<PathBuf, TransportError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", request.key()));
        let ex = Exchange {
            request: request.clone(),
            response: response.to_string(),
        };
        fs::write(&path, serde_json::to_string_pretty(&ex).expect("exchange serializes") + "\n")?;
        Ok(path)
    }
}

impl Transport for ReplayTransport {
    fn complete(&self, request: &BridgeRequest) -> Result<String, TransportError> {
        let path = self.fixture_path(request);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(TransportError::MissingFixture {
                    key: request.key(),
                    path,
                })
            }
            Err(e) => return Err(e.into()),
        };
        let ex: Exchange = serde_json::from_str(&text).map_err(|e| TransportError::MalformedFixture {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if &ex.request != request {
            return Err(TransportError::MalformedFixture {
                path,
                message: "stored request does not match its key".into(),
            });
        }
        Ok(ex.response)
    }
}

const SYSTEM_PROMPT: &str = "You translate steps of a Python execution path into SMT-LIB 2 constraints \
under static single assignment. Variable x at version k is the symbol _x_k; a list is an (Array Int T) \
named _x_k together with an Int _x_k_len. Reply with JSON only.";

/// Chat message text for a request.
pub fn render_prompt(request: &BridgeRequest) -> String {
    let mut out = String::new();
    match request {
        BridgeRequest::Fragment(r) => {
            for (i, t) in r.examples.iter().enumerate() {
                out.push_str(&format!(
                    "Example {}:\nPath chunk:\n{}\nInput SSA environment: {}\nConstraints:\n{}\nUpdated SSA environment: {}\n\n",
                    i + 1,
                    t.key_chunk,
                    serde_json::to_string(&t.ssa_env_in).unwrap_or_default(),
                    t.target_constraints,
                    serde_json::to_string(&t.ssa_env_out).unwrap_or_default(),
                ));
            }
            if !r.prior_tail.is_empty() {
                out.push_str("Constraints generated so far end with:\n");
                for a in &r.prior_tail {
                    out.push_str(a);
                    out.push('\n');
                }
                out.push('\n');
            }
            out.push_str(&format!(
                "Path chunk:\n{}\nInput SSA environment: {}\n",
                r.chunk,
                serde_json::to_string(&r.env_in).unwrap_or_default()
            ));
            if let Some(fb) = &r.feedback {
                out.push_str(&format!(
                    "\nYour previous answer was rejected.\nPrevious constraints:\n{}\nError:\n{}\n",
                    fb.previous, fb.error
                ));
            }
            out.push_str(
                "\nAnswer with {\"fragment\": \"<declare-const and assert commands>\", \"env_out\": {<var>: <index>}}.",
            );
        }
        BridgeRequest::Solve(r) => {
            out.push_str(&format!(
                "Function:\n{}\nTarget path of {}:\n{}\nParameters: {}\n",
                r.source,
                r.function,
                r.path,
                r.params.join(", ")
            ));
            if let Some(fb) = &r.feedback {
                out.push_str(&format!("\nYour previous answer could not be used: {fb}\n"));
            }
            out.push_str(
                "\nIf some input follows the path exactly, answer {\"sat\": true, \"args\": {<param>: \"<python literal>\"}}; \
                 otherwise answer {\"sat\": false}.",
            );
        }
    }
    out
}

pub fn system_prompt() -> &'static str {
    SYSTEM_PROMPT
}

#[cfg(feature = "live")]
pub use live::LiveTransport;

#[cfg(feature = "live")]
mod live {
    use std::path::PathBuf;
    use std::sync::{Condvar, Mutex};

    use super::*;

    /// Chat-completion client with a bound on concurrent requests.
    pub struct LiveTransport {
        endpoint: String,
        model: String,
        key: String,
        client: reqwest::blocking::Client,
        log_dir: Option<PathBuf>,
        slots: Mutex<usize>,
        freed: Condvar,
    }

    impl LiveTransport {
        pub fn new(endpoint: String, model: String, key: String, max_in_flight: usize, log_dir: Option<PathBuf>) -> Self {
            Self {
                endpoint,
                model,
                key,
                client: reqwest::blocking::Client::new(),
                log_dir,
                slots: Mutex::new(max_in_flight.max(1)),
                freed: Condvar::new(),
            }
        }

        fn post(&self, request: &BridgeRequest) -> Result<String, TransportError> {
            let body = serde_json::json!({
                "model": self.model,
                "temperature": 0,
                "messages": [
                    {"role": "system", "content": system_prompt()},
                    {"role": "user", "content": render_prompt(request)},
                ],
            });
            let resp = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.key)
                .json(&body)
                .send()
                .map_err(|e| TransportError::Endpoint(e.to_string()))?;
            let status = resp.status();
            let value: serde_json::Value = resp.json().map_err(|e| TransportError::Endpoint(e.to_string()))?;
            if !status.is_success() {
                return Err(TransportError::Endpoint(format!("HTTP {status}: {value}")));
            }
            value["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| TransportError::Endpoint(format!("no message content in {value}")))
        }
    }

    impl Transport for LiveTransport {
        fn complete(&self, request: &BridgeRequest) -> Result<String, TransportError> {
            {
                let mut free = self.slots.lock().expect("slot lock");
                while *free == 0 {
                    free = self.freed.wait(free).expect("slot lock");
                }
                *free -= 1;
            }
            let result = self.post(request);
            *self.slots.lock().expect("slot lock") += 1;
            self.freed.notify_one();
            let text = result?;
            if let Some(dir) = &self.log_dir {
                ReplayTransport::record(dir, request, &text)?;
            }
            Ok(text)
        }
    }
}
