//! Prompt construction for coherence-graph compilation.

use cdi_core::PropositionFile;

use crate::error::LlmError;

/// Instructions prepended to every compilation request. The backend is asked
/// to rate pairwise consistency on a 0..=10 scale and answer with a bare
/// edge list.
pub const COHERENCE_INSTRUCTIONS: &str = "Imagine that you are a perfectly objective arbitrator with impeccable judgment and integrity. In response to a prompt of the form 'buildCoherence: ' below followed by a list of labeled propositions, please do the following: First, determine which pairs of propositions are substantively related. Second, for each related pair of propositions, determine their logical relationship, assuming that at least one is true, whether or not either actually is. I want you to ignore the truth, falsity or basis in fact of either claim. Third, based on your determination just above, numerically rate the relative consistency of the two propositions. Do not pay attention to or comment on the truth or basis in fact of either proposition independent of the other. Your rating of relative consistency should be on a scale from 0 to 10, with a value of 0 for a pair of propositions that are not at all consistent and a value of 10 for a pair of propositions that are totally consistent. I cannot emphasize enough that for your rating, I want you to ignore the truth or basis in fact of either proposition, since anything that is not consistent with reality cannot be true. If you determine that propositions are unrelated despite previously determining otherwise, omit that pair. To be clear, a pair of false but consistent claims should also be rated a 10. Meanwhile, a pair of propositions of which one is true and the other is false, should be rated a 0. Finally, construct a NetworkX graph where propositions are vertices and edges correspond to substantively related pairs of propositions, with weights given by the consistency ratings just above. Only return the edge list with proposition labels for vertices. i.e., return responses in this format (here 'p2', 'p3', 'p4', and 'p5' are labels): [('p2', 'p3', 0), ('p2', 'p5', 10), ('p3', 'p4', 9), ('p3', 'p5', 2)]. Order vertices (in edges) and edges (in the graph) lexicographically.";

/// Builds the full prompt: instructions, the `buildCoherence:` marker, then
/// the propositions in their sectioned `# Header` / `- pN: text` layout.
pub fn build_prompt(file: &PropositionFile) -> Result<String, LlmError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut count = 0usize;
    for prop in file.propositions() {
        count += 1;
        if !seen.insert(prop.id.as_str()) {
            return Err(LlmError::DuplicateId(prop.id.clone()));
        }
    }
    if count < 2 {
        return Err(LlmError::TooFewPropositions(count));
    }
    Ok(format!(
        "{COHERENCE_INSTRUCTIONS}\n\nbuildCoherence: \n{}",
        file.format()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_file() -> PropositionFile {
        PropositionFile::parse(
            "# Facts/beliefs\n\
             - p1: When Alice asks Bob to clean something, he does it, but complains.\n\
             - p2: When Alice asks Bob to fix something, he does not do it, and complains.\n\
             - p3: When Alice asks Bob to shop for something, he does it, without complaint.\n\
             - p4: Dave cleans, fixes, and shops very much like Bob does.\n\
             \n\
             # Hypotheses\n\
             - p5: If Charlie asks Dave to fix the WiFi, Dave can be expected to do it.\n\
             - p6: If Charlie asks Dave to fix the WiFi, Dave can be expected to not do it.\n\
             - p7: If Charlie asks Dave to fix the WiFi, Dave can be expected to complain.\n\
             - p8: If Charlie asks Dave to fix the WiFi, Dave can be expected to not complain.\n",
        )
        .unwrap()
    }

    #[test]
    fn prompt_carries_instructions_and_sections() {
        let prompt = build_prompt(&toy_file()).unwrap();
        assert!(prompt.starts_with(COHERENCE_INSTRUCTIONS));
        assert!(prompt.contains("buildCoherence: "));
        assert!(prompt.contains("# Facts/beliefs"));
        assert!(prompt.contains("# Hypotheses"));
        assert_eq!(prompt.matches("\n- p").count(), 8);
    }

    #[test]
    fn prompt_ends_with_the_propositions() {
        let file = PropositionFile::parse("# Facts\n- p1: one.\n- p2: two.\n").unwrap();
        let prompt = build_prompt(&file).unwrap();
        let tail = &prompt[prompt.find("buildCoherence:").unwrap()..];
        assert!(tail.ends_with("- p1: one.\n- p2: two.\n"));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let single = PropositionFile::parse("# Facts\n- p1: alone.\n").unwrap();
        assert!(matches!(
            build_prompt(&single),
            Err(LlmError::TooFewPropositions(1))
        ));

        // The text parser already refuses duplicates, so force one in.
        let mut doubled = toy_file();
        let clone = doubled.sections[0].clone();
        doubled.sections.push(clone);
        assert!(matches!(
            build_prompt(&doubled),
            Err(LlmError::DuplicateId(_))
        ));
    }
}
