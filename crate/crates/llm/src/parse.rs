//! Extraction of rated edge lists from chat-model responses.
//!
//! Responses are expected to contain a bracketed tuple list like
//! `[('p2', 'p3', 0), ('p2', 'p5', 10)]`, possibly wrapped in prose or
//! markdown fences; the first well-formed list wins.

use std::collections::BTreeSet;

use crate::error::LlmError;

/// A pair of labels with a consistency rating on the 0..=10 scale,
/// normalized so `u < v` lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatedEdge {
    pub u: String,
    pub v: String,
    pub rating: u8,
}

/// Maps a 0..=10 consistency rating onto a weight in [-1, 1] by linear
/// interpolation between the scale endpoints.
pub fn rating_to_weight(rating: u8) -> Result<f64, LlmError> {
    if rating > 10 {
        return Err(LlmError::RatingOutOfRange(rating as i64));
    }
    Ok((rating as f64 - 5.0) / 5.0)
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, byte: u8) -> bool {
        self.skip_ws();
        if self.pos < self.bytes.len() && self.bytes[self.pos] == byte {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn quoted(&mut self) -> Option<String> {
        self.skip_ws();
        let quote = *self.bytes.get(self.pos)?;
        if quote != b'\'' && quote != b'"' {
            return None;
        }
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let label = std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .to_string();
        self.pos += 1;
        Some(label)
    }

    fn integer(&mut self) -> Option<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

/// Attempts to read one `[('u', 'v', r), ...]` list starting at `offset`.
fn try_tuple_list(text: &str, offset: usize) -> Option<Vec<(String, String, i64)>> {
    let mut scanner = Scanner::new(&text[offset..]);
    if !scanner.eat(b'[') {
        return None;
    }
    let mut tuples = Vec::new();
    if scanner.eat(b']') {
        return Some(tuples);
    }
    loop {
        if !scanner.eat(b'(') {
            return None;
        }
        let u = scanner.quoted()?;
        if !scanner.eat(b',') {
            return None;
        }
        let v = scanner.quoted()?;
        if !scanner.eat(b',') {
            return None;
        }
        let rating = scanner.integer()?;
        if !scanner.eat(b')') {
            return None;
        }
        tuples.push((u, v, rating));
        if scanner.eat(b',') {
            if scanner.peek() == Some(b']') {
                return Some(tuples);
            }
            continue;
        }
        return if scanner.eat(b']') {
            Some(tuples)
        } else {
            None
        };
    }
}

/// Extracts the first well-formed tuple list from a response, validating
/// labels and ratings and normalizing each edge to `u < v`.
pub fn parse_rated_edges(
    response: &str,
    known_labels: &BTreeSet<String>,
) -> Result<Vec<RatedEdge>, LlmError> {
    let tuples = (0..response.len())
        .filter(|&i| response.as_bytes()[i] == b'[')
        .find_map(|i| try_tuple_list(response, i))
        .ok_or_else(|| LlmError::NoTupleList {
            response: response.to_string(),
        })?;

    let mut edges = Vec::with_capacity(tuples.len());
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for (u, v, rating) in tuples {
        for label in [&u, &v] {
            if !known_labels.contains(label) {
                return Err(LlmError::UnknownLabel {
                    label: label.clone(),
                });
            }
        }
        if u == v {
            return Err(LlmError::SelfLoop(u));
        }
        if !(0..=10).contains(&rating) {
            return Err(LlmError::RatingOutOfRange(rating));
        }
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        if !seen.insert((u.clone(), v.clone())) {
            return Err(LlmError::DuplicatePair(u, v));
        }
        edges.push(RatedEdge {
            u,
            v,
            rating: rating as u8,
        });
    }
    Ok(edges)
}

/// Formats edges back into the tuple-list response format.
pub fn serialize_rated_edges(edges: &[RatedEdge]) -> String {
    let body: Vec<String> = edges
        .iter()
        .map(|e| format!("('{}', '{}', {})", e.u, e.v, e.rating))
        .collect();
    format!("[{}]", body.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_the_documented_example() {
        let known = labels(&["p2", "p3", "p4", "p5"]);
        let edges = parse_rated_edges(
            "[('p2', 'p3', 0), ('p2', 'p5', 10), ('p3', 'p4', 9), ('p3', 'p5', 2)]",
            &known,
        )
        .unwrap();
        assert_eq!(edges.len(), 4);
        let ratings: Vec<u8> = edges.iter().map(|e| e.rating).collect();
        assert_eq!(ratings, vec![0, 10, 9, 2]);
    }

    #[test]
    fn empty_list_parses() {
        assert_eq!(parse_rated_edges("[]", &labels(&["p1"])).unwrap(), vec![]);
    }

    #[test]
    fn tolerates_prose_and_fences() {
        let known = labels(&["p1", "p2"]);
        let response = "Here is the graph you asked for [as requested]:\n\
                        ```python\n[('p2', 'p1', 7)]\n```\nLet me know!";
        let edges = parse_rated_edges(response, &known).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!((edges[0].u.as_str(), edges[0].v.as_str()), ("p1", "p2"));
        assert_eq!(edges[0].rating, 7);
    }

    #[test]
    fn rejects_bad_lists() {
        let known = labels(&["p1", "p2"]);
        assert!(matches!(
            parse_rated_edges("no list here", &known),
            Err(LlmError::NoTupleList { .. })
        ));
        assert!(matches!(
            parse_rated_edges("[('p1', 'p1', 5)]", &known),
            Err(LlmError::SelfLoop(_))
        ));
        assert!(matches!(
            parse_rated_edges("[('p1', 'p9', 5)]", &known),
            Err(LlmError::UnknownLabel { .. })
        ));
        assert!(matches!(
            parse_rated_edges("[('p1', 'p2', 11)]", &known),
            Err(LlmError::RatingOutOfRange(11))
        ));
        assert!(matches!(
            parse_rated_edges("[('p1', 'p2', -1)]", &known),
            Err(LlmError::RatingOutOfRange(-1))
        ));
        assert!(matches!(
            parse_rated_edges("[('p1', 'p2', 5), ('p2', 'p1', 5)]", &known),
            Err(LlmError::DuplicatePair(..))
        ));
    }

    #[test]
    fn rating_scale_endpoints_and_midpoint() {
        assert_eq!(rating_to_weight(0).unwrap(), -1.0);
        assert_eq!(rating_to_weight(10).unwrap(), 1.0);
        assert_eq!(rating_to_weight(5).unwrap(), 0.0);
        assert!(matches!(
            rating_to_weight(11),
            Err(LlmError::RatingOutOfRange(11))
        ));
    }

    #[test]
    fn rating_map_hits_each_tenth_exactly() {
        let expected = [-1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        for (r, want) in expected.iter().enumerate() {
            assert_eq!(rating_to_weight(r as u8).unwrap(), *want, "rating {r}");
        }
    }

    proptest! {
        #[test]
        fn rating_map_is_affine_and_increasing(a in 0u8..10) {
            let lo = rating_to_weight(a).unwrap();
            let hi = rating_to_weight(a + 1).unwrap();
            prop_assert!(hi > lo);
            prop_assert!((hi - lo - 0.2).abs() < 1e-15);
        }

        #[test]
        fn parse_is_idempotent_on_serialized_edges(
            pairs in proptest::collection::btree_set((0usize..6, 0usize..6), 0..8),
            ratings in proptest::collection::vec(0u8..=10, 8),
        ) {
            let names: Vec<String> = (0..6).map(|i| format!("p{i}")).collect();
            let known: BTreeSet<String> = names.iter().cloned().collect();
            let mut edges: Vec<RatedEdge> = pairs
                .iter()
                .filter(|(a, b)| a != b)
                .zip(ratings)
                .map(|(&(a, b), rating)| {
                    let (u, v) = if names[a] < names[b] {
                        (names[a].clone(), names[b].clone())
                    } else {
                        (names[b].clone(), names[a].clone())
                    };
                    RatedEdge { u, v, rating }
                })
                .collect();
            edges.sort_by(|a, b| (&a.u, &a.v).cmp(&(&b.u, &b.v)));
            edges.dedup_by(|a, b| (&a.u, &a.v) == (&b.u, &b.v));

            let reparsed =
                parse_rated_edges(&serialize_rated_edges(&edges), &known).unwrap();
            prop_assert_eq!(reparsed, edges);
        }
    }
}
