// Shared by several test targets; not every target uses every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .expect("fixtures directory exists")
}

pub fn cdi(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_cdi"))
        .args(args)
        .output()
        .expect("cdi binary runs")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// The 15 scripted rating responses behind the bundled toy cassette: stable
/// base ratings with deterministic jitter, medians landing on the base.
pub fn toy_cassette_responses() -> Vec<String> {
    let base: Vec<(&str, &str, i32)> = vec![
        ("p1", "p2", 7),
        ("p1", "p3", 6),
        ("p1", "p4", 7),
        ("p1", "p7", 8),
        ("p2", "p3", 6),
        ("p2", "p4", 7),
        ("p2", "p5", 1),
        ("p2", "p6", 9),
        ("p2", "p7", 8),
        ("p2", "p8", 2),
        ("p3", "p4", 7),
        ("p4", "p5", 2),
        ("p4", "p6", 8),
        ("p4", "p7", 8),
        ("p4", "p8", 2),
        ("p5", "p6", 0),
        ("p5", "p7", 6),
        ("p5", "p8", 6),
        ("p6", "p7", 8),
        ("p6", "p8", 6),
        ("p7", "p8", 0),
    ];
    // Any column of this cycle, sampled 15 times, has median 0.
    let jitter = [0, 1, -1, 0, 0, 1, -1, 0, 0, 0, 1, -1, 0, 1, -1];
    (0..15)
        .map(|sample| {
            let tuples: Vec<String> = base
                .iter()
                .enumerate()
                .filter(|(edge_idx, _)| !(sample == 7 && *edge_idx == 1))
                .map(|(edge_idx, (u, v, rating))| {
                    let wobble = jitter[(sample + edge_idx) % jitter.len()];
                    let rated = (rating + wobble).clamp(0, 10);
                    format!("('{u}', '{v}', {rated})")
                })
                .collect();
            format!("[{}]", tuples.join(", "))
        })
        .collect()
}
