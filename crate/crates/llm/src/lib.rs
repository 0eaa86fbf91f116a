//! Compiles natural-language proposition sets into weighted coherence
//! graphs through a chat-completion backend.
//!
//! The flow is: build the rating prompt, send it (live, recorded, or
//! replayed from a cassette), extract the rated edge list from the reply,
//! and map the 0..=10 ratings onto weights in [-1, 1]. Repeated sampling
//! feeds the median aggregation in `cdi-core`.

pub mod backend;
pub mod cassette;
mod error;
pub mod parse;
pub mod prompt;

mod compile;

pub use backend::{BackendConfig, ChatBackend, OpenAiBackend, RetryPolicy, ScriptedBackend};
pub use cassette::{Cassette, CassetteBackend, CassetteMode};
pub use compile::{compile_graph, sample_graphs, SampleRun};
pub use error::LlmError;
pub use parse::{parse_rated_edges, rating_to_weight, serialize_rated_edges, RatedEdge};
pub use prompt::{build_prompt, COHERENCE_INSTRUCTIONS};
