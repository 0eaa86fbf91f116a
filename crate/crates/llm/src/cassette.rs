//! Record/replay cassettes for deterministic backend interaction.
//!
//! Each request is digested over its prompt text plus the occurrence index
//! of that prompt within the session, so repeated identical prompts (the
//! normal case when sampling) stay distinct and replay in recording order.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::ChatBackend;
use crate::error::LlmError;

const CASSETTE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CassetteEntry {
    pub digest: String,
    pub response: String,
}

/// Ordered request/response log with unique digests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cassette {
    entries: Vec<CassetteEntry>,
}

#[derive(Serialize, Deserialize)]
struct CassetteDoc {
    version: u32,
    entries: Vec<CassetteEntry>,
}

pub fn request_digest(prompt: &str, occurrence: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(occurrence.to_le_bytes());
    hasher.update(b"\n");
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())
}

impl Cassette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CassetteEntry] {
        &self.entries
    }

    pub fn push(&mut self, digest: String, response: String) -> Result<(), LlmError> {
        if self.entries.iter().any(|e| e.digest == digest) {
            return Err(LlmError::DuplicateDigest(digest));
        }
        self.entries.push(CassetteEntry { digest, response });
        Ok(())
    }

    pub fn lookup(&self, digest: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.digest == digest)
            .map(|e| e.response.as_str())
    }

    pub fn to_json(&self) -> String {
        let doc = CassetteDoc {
            version: CASSETTE_VERSION,
            entries: self.entries.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("cassette serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let doc: CassetteDoc =
            serde_json::from_str(text).map_err(|e| LlmError::MalformedCassette(e.to_string()))?;
        let mut cassette = Cassette::new();
        for entry in doc.entries {
            cassette.push(entry.digest, entry.response)?;
        }
        Ok(cassette)
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), LlmError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CassetteMode {
    Record,
    Replay,
}

/// Wraps a backend with a cassette. Recording appends one entry per request
/// and forwards to the inner backend; replay answers from the cassette and
/// never touches the network.
pub struct CassetteBackend {
    inner: Option<Box<dyn ChatBackend>>,
    mode: CassetteMode,
    cassette: Mutex<Cassette>,
    occurrences: Mutex<HashMap<String, u64>>,
}

impl CassetteBackend {
    pub fn record(inner: Box<dyn ChatBackend>) -> Self {
        Self {
            inner: Some(inner),
            mode: CassetteMode::Record,
            cassette: Mutex::new(Cassette::new()),
            occurrences: Mutex::new(HashMap::new()),
        }
    }

    pub fn replay(cassette: Cassette) -> Self {
        Self {
            inner: None,
            mode: CassetteMode::Replay,
            cassette: Mutex::new(cassette),
            occurrences: Mutex::new(HashMap::new()),
        }
    }

    pub fn cassette(&self) -> Cassette {
        self.cassette.lock().expect("cassette lock").clone()
    }

    pub fn save(&self, path: &Path) -> Result<(), LlmError> {
        self.cassette().save(path)
    }

    fn next_occurrence(&self, prompt: &str) -> u64 {
        let mut counts = self.occurrences.lock().expect("occurrence lock");
        let counter = counts.entry(prompt.to_string()).or_insert(0);
        let occurrence = *counter;
        *counter += 1;
        occurrence
    }
}

impl ChatBackend for CassetteBackend {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let occurrence = self.next_occurrence(prompt);
        let digest = request_digest(prompt, occurrence);
        match self.mode {
            CassetteMode::Replay => {
                let cassette = self.cassette.lock().expect("cassette lock");
                cassette
                    .lookup(&digest)
                    .map(str::to_string)
                    .ok_or(LlmError::CassetteMiss { digest, occurrence })
            }
            CassetteMode::Record => {
                let inner = self.inner.as_ref().ok_or(LlmError::ReplayOnly)?;
                let response = inner.complete(prompt)?;
                self.cassette
                    .lock()
                    .expect("cassette lock")
                    .push(digest, response.clone())?;
                Ok(response)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ScriptedBackend;

    #[test]
    fn digests_separate_repeated_prompts() {
        let a = request_digest("same prompt", 0);
        let b = request_digest("same prompt", 1);
        assert_ne!(a, b);
        assert_eq!(a, request_digest("same prompt", 0));
    }

    #[test]
    fn record_then_replay_round_trips() {
        let recorder = CassetteBackend::record(Box::new(ScriptedBackend::replying(&[
            "first", "second", "third",
        ])));
        assert_eq!(recorder.complete("p").unwrap(), "first");
        assert_eq!(recorder.complete("p").unwrap(), "second");
        assert_eq!(recorder.complete("q").unwrap(), "third");

        let cassette = recorder.cassette();
        assert_eq!(cassette.len(), 3);

        let replayer = CassetteBackend::replay(cassette);
        assert_eq!(replayer.complete("p").unwrap(), "first");
        assert_eq!(replayer.complete("p").unwrap(), "second");
        assert_eq!(replayer.complete("q").unwrap(), "third");
        assert!(matches!(
            replayer.complete("p"),
            Err(LlmError::CassetteMiss { occurrence: 2, .. })
        ));
    }

    #[test]
    fn cassette_json_round_trips() {
        let mut cassette = Cassette::new();
        cassette
            .push(request_digest("x", 0), "resp".into())
            .unwrap();
        let reloaded = Cassette::from_json(&cassette.to_json()).unwrap();
        assert_eq!(reloaded, cassette);
    }

    #[test]
    fn duplicate_digests_are_rejected() {
        let mut cassette = Cassette::new();
        let digest = request_digest("x", 0);
        cassette.push(digest.clone(), "a".into()).unwrap();
        assert!(matches!(
            cassette.push(digest, "b".into()),
            Err(LlmError::DuplicateDigest(_))
        ));
    }
}
