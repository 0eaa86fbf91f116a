//! Regenerates the bundled toy cassette. Run by hand after changing the
//! prompt layout or the scripted responses:
//!
//! ```bash
//! cargo test -p cdi-cli --test fixtures_regen -- --ignored
//! ```

mod common;

use cdi_core::PropositionFile;
use cdi_llm::{sample_graphs, CassetteBackend, RetryPolicy, ScriptedBackend};

#[test]
#[ignore = "writes into fixtures/; run explicitly to regenerate"]
fn regen_toy_cassette() {
    let fixtures = common::fixtures();
    let props_text = std::fs::read_to_string(fixtures.join("props/toy.props")).unwrap();
    let props = PropositionFile::parse(&props_text).unwrap();

    let responses = common::toy_cassette_responses();
    let refs: Vec<&str> = responses.iter().map(String::as_str).collect();
    let recorder = CassetteBackend::record(Box::new(ScriptedBackend::replying(&refs)));
    let run = sample_graphs(&props, &recorder, 15, &RetryPolicy::immediate(1, 1)).unwrap();
    assert_eq!(run.graphs.len(), 15);

    let path = fixtures.join("cassettes/toy.json");
    recorder.save(&path).unwrap();
    println!("wrote {}", path.display());
}
