use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("need at least two propositions, got {0}")]
    TooFewPropositions(usize),
    #[error("duplicate proposition id {0:?}")]
    DuplicateId(String),
    #[error("no bracketed edge list found in response:\n{response}")]
    NoTupleList { response: String },
    #[error("edge names unknown label {label:?}")]
    UnknownLabel { label: String },
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge ({0:?}, {1:?})")]
    DuplicatePair(String, String),
    #[error("rating {0} outside 0..=10")]
    RatingOutOfRange(i64),
    #[error("transport failure talking to {url}: {message}")]
    Transport { url: String, message: String },
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("backend response carried no message content: {body}")]
    MalformedCompletion { body: String },
    #[error("environment variable {0} is not set (the API key is read from it)")]
    MissingApiKey(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: Box<LlmError> },
    #[error("response did not parse as an edge list ({detail}); raw response:\n{response}")]
    ParseFailure {
        detail: Box<LlmError>,
        response: String,
    },
    #[error(
        "cassette has no recording for digest {digest} (occurrence {occurrence} of this prompt)"
    )]
    CassetteMiss { digest: String, occurrence: u64 },
    #[error("duplicate cassette digest {0}")]
    DuplicateDigest(String),
    #[error("cassette replay backend cannot record (no inner backend)")]
    ReplayOnly,
    #[error("malformed cassette file: {0}")]
    MalformedCassette(String),
    #[error("all {n} samples failed; first failure: {first}")]
    AllSamplesFailed { n: usize, first: Box<LlmError> },
    #[error("scripted backend ran out of responses")]
    ScriptExhausted,
    #[error(transparent)]
    Graph(#[from] cdi_core::graph::GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LlmError {
    /// Transport-level failures are worth retrying; everything else is
    /// evidence about the model or the request.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Transport { .. } => true,
            LlmError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}
