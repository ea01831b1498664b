use std::fs::OpenOptions;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

/// One request and the reply it received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub request: String,
    pub response: String,
}

/// Verbatim record of a conversation with a chat endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmTranscript {
    pub dataset: String,
    pub endpoint: String,
    pub model: String,
    /// Seconds since the Unix epoch when the conversation started.
    pub timestamp: u64,
    pub turns: Vec<Turn>,
    /// Set when the conversation stopped early.
    pub error: Option<String>,
}

impl LlmTranscript {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "dataset: {}\nendpoint: {}\nmodel: {}\ntimestamp: {}\n",
            self.dataset, self.endpoint, self.model, self.timestamp
        );
        for (i, t) in self.turns.iter().enumerate() {
            s.push_str(&format!("\n=== request {} ===\n{}\n\n=== response {} ===\n{}\n", i + 1, t.request, i + 1, t.response));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("\n=== stopped ===\n{e}\n"));
        }
        s
    }
}

/// Directory of transcripts, one file per conversation. Existing files are never overwritten.
#[derive(Debug, Clone)]
pub struct TranscriptStore {
    dir: PathBuf,
}

impl TranscriptStore {
    pub fn new(dir: impl Into<PathBuf>) -> TranscriptStore {
        TranscriptStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `<dataset>-<timestamp>[-k].txt`, picking the first free suffix.
    pub fn save(&self, t: &LlmTranscript) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let stem: String = t
            .dataset
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        for k in 0.. {
            let name = if k == 0 { format!("{stem}-{}.txt", t.timestamp) } else { format!("{stem}-{}-{k}.txt", t.timestamp) };
            let path = self.dir.join(name);
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    f.write_all(t.to_text().as_bytes())?;
                    return Ok(path);
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!("unbounded suffix search")
    }
}
