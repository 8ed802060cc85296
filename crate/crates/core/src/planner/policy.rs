//! Pluggable text policies: replayed transcripts, a remote chat-completion
//! endpoint, scripted closures, and a recording wrapper.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    SelectObjects,
    MacroPlan,
    MacroConditions,
    ExpandMacro,
    ExpandTask,
    CorrectConditions,
    CorrectBlock,
    RefineConditions,
}

impl RequestKind {
    pub const ALL: [RequestKind; 8] = [
        RequestKind::SelectObjects,
        RequestKind::MacroPlan,
        RequestKind::MacroConditions,
        RequestKind::ExpandMacro,
        RequestKind::ExpandTask,
        RequestKind::CorrectConditions,
        RequestKind::CorrectBlock,
        RequestKind::RefineConditions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RequestKind::SelectObjects => "select_objects",
            RequestKind::MacroPlan => "macro_plan",
            RequestKind::MacroConditions => "macro_conditions",
            RequestKind::ExpandMacro => "expand_macro",
            RequestKind::ExpandTask => "expand_task",
            RequestKind::CorrectConditions => "correct_conditions",
            RequestKind::CorrectBlock => "correct_block",
            RequestKind::RefineConditions => "refine_conditions",
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One policy call. `prompt` is the rendered template; the structured
/// fields let rule-based policies answer without parsing the prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyRequest {
    pub kind: RequestKind,
    pub task_id: String,
    /// 0-based macro-action index for per-macro requests.
    pub macro_index: Option<usize>,
    pub prompt: String,
}

impl PolicyRequest {
    /// Hex SHA-256 of the prompt text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.prompt.as_bytes()))
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy transport: {0}")]
    Transport(String),
    #[error("transcript exhausted at call {call_index} ({kind})")]
    Exhausted { call_index: usize, kind: RequestKind },
    #[error("transcript mismatch at call {call_index}: recorded {recorded}, requested {requested}")]
    Mismatch {
        call_index: usize,
        recorded: RequestKind,
        requested: RequestKind,
    },
    #[error("transcript: {0}")]
    Transcript(String),
    #[error("scripted policy: {0}")]
    Scripted(String),
}

/// A frozen text model or a stand-in for one.
pub trait Policy {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError>;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        (**self).complete(req)
    }
}

impl<P: Policy + ?Sized> Policy for &mut P {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        (**self).complete(req)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub call_index: usize,
    pub kind: RequestKind,
    pub prompt_digest: String,
    pub response: String,
}

pub fn transcript_to_jsonl(records: &[TranscriptRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn transcript_from_jsonl(text: &str) -> Result<Vec<TranscriptRecord>, PolicyError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| PolicyError::Transcript(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Replays recorded responses by call order, checking the request kind.
/// The prompt digest is compared for diagnostics only.
#[derive(Debug, Clone)]
pub struct ReplayPolicy {
    records: Vec<TranscriptRecord>,
    next: usize,
}

impl ReplayPolicy {
    pub fn new(records: Vec<TranscriptRecord>) -> Self {
        ReplayPolicy { records, next: 0 }
    }

    pub fn from_file(path: &Path) -> Result<Self, PolicyError> {
        let text = fs::read_to_string(path).map_err(|e| PolicyError::Transcript(format!("{}: {e}", path.display())))?;
        Ok(Self::new(transcript_from_jsonl(&text)?))
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.next
    }
}

impl Policy for ReplayPolicy {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        let call_index = self.next;
        let rec = self.records.get(call_index).ok_or(PolicyError::Exhausted { call_index, kind: req.kind })?;
        if rec.kind != req.kind {
            return Err(PolicyError::Mismatch {
                call_index,
                recorded: rec.kind,
                requested: req.kind,
            });
        }
        if rec.prompt_digest != req.digest() {
            log::debug!("replay call {call_index}: prompt digest differs from the recording");
        }
        self.next += 1;
        Ok(rec.response.clone())
    }
}

/// Wraps a policy and records every exchange as a transcript.
pub struct RecordingPolicy<P> {
    inner: P,
    records: Vec<TranscriptRecord>,
}

impl<P: Policy> RecordingPolicy<P> {
    pub fn new(inner: P) -> Self {
        RecordingPolicy { inner, records: Vec::new() }
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TranscriptRecord> {
        self.records
    }
}

impl<P: Policy> Policy for RecordingPolicy<P> {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        let response = self.inner.complete(req)?;
        self.records.push(TranscriptRecord {
            call_index: self.records.len(),
            kind: req.kind,
            prompt_digest: req.digest(),
            response: response.clone(),
        });
        Ok(response)
    }
}

/// A policy backed by a closure; used for rule-based and adversarial
/// test policies.
pub struct FnPolicy<F>(pub F);

impl<F: FnMut(&PolicyRequest) -> Result<String, PolicyError>> Policy for FnPolicy<F> {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        (self.0)(req)
    }
}

/// Chat-completion style endpoint: POST `{model, messages, temperature}`,
/// answer in `choices[0].message.content`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    #[serde(default)]
    pub temperature: f64,
}

pub struct RemotePolicy {
    config: RemoteConfig,
    token: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatContent,
}

#[derive(Deserialize)]
struct ChatContent {
    content: String,
}

impl RemotePolicy {
    pub fn new(config: RemoteConfig) -> Self {
        let token = config.token_env.as_ref().and_then(|v| std::env::var(v).ok());
        RemotePolicy {
            config,
            token,
            agent: ureq::Agent::new_with_defaults(),
        }
    }
}

impl Policy for RemotePolicy {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: vec![ChatMessage {
                role: "user",
                content: &req.prompt,
            }],
            temperature: self.config.temperature,
        };
        let mut call = self.agent.post(&self.config.url);
        if let Some(tok) = &self.token {
            call = call.header("Authorization", &format!("Bearer {tok}"));
        }
        let resp: ChatResponse = call
            .send_json(&body)
            .map_err(|e| PolicyError::Transport(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| PolicyError::Transport(e.to_string()))?;
        resp.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| PolicyError::Transport("response without choices".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(kind: RequestKind) -> PolicyRequest {
        PolicyRequest {
            kind,
            task_id: "T1".into(),
            macro_index: None,
            prompt: "p".into(),
        }
    }

    #[test]
    fn record_then_replay() {
        let mut rec = RecordingPolicy::new(FnPolicy(|r: &PolicyRequest| Ok(format!("{}!", r.kind))));
        rec.complete(&req(RequestKind::MacroPlan)).unwrap();
        rec.complete(&req(RequestKind::ExpandMacro)).unwrap();
        let text = transcript_to_jsonl(rec.records());
        let mut replay = ReplayPolicy::new(transcript_from_jsonl(&text).unwrap());
        assert_eq!(replay.complete(&req(RequestKind::MacroPlan)).unwrap(), "macro_plan!");
        assert!(matches!(
            replay.complete(&req(RequestKind::CorrectBlock)),
            Err(PolicyError::Mismatch { call_index: 1, .. })
        ));
        assert_eq!(replay.complete(&req(RequestKind::ExpandMacro)).unwrap(), "expand_macro!");
        assert!(matches!(replay.complete(&req(RequestKind::ExpandMacro)), Err(PolicyError::Exhausted { .. })));
    }

    #[test]
    fn digest_is_sha256_hex() {
        let d = req(RequestKind::MacroPlan).digest();
        assert_eq!(d.len(), 64);
        assert_eq!(d, "148de9c5a7a44d19e56cd9ae1a554bf67847afb0c58f6e12fa29ac7ddfca9940");
    }
}
