//! Malformed input to the config and snapshot parsers yields errors, never panics.

use std::fs;
use std::path::PathBuf;

use hemo1d::config::parse_config;
use hemo1d::network::Snapshot;
use hemo1d::output::{parse_snapshot_csv, write_snapshot};
use proptest::prelude::*;

fn seeds(dir: &str) -> Vec<String> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(dir);
    let mut out: Vec<String> = fs::read_dir(&root)
        .unwrap()
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", root.display());
    out
}

/// Replaces, deletes or duplicates a byte range of `text`.
fn mutate(text: &str, at: usize, len: usize, kind: u8, insert: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let at = at % (chars.len() + 1);
    let end = (at + len).min(chars.len());
    let head: String = chars[..at].iter().collect();
    let mid: String = chars[at..end].iter().collect();
    let tail: String = chars[end..].iter().collect();
    match kind % 3 {
        0 => format!("{head}{insert}{tail}"),
        1 => format!("{head}{tail}"),
        _ => format!("{head}{mid}{mid}{tail}"),
    }
}

#[test]
fn config_seeds_parse() {
    let all = seeds("parse_config");
    let ok = all.iter().filter(|s| parse_config(s).is_ok()).count();
    assert_eq!(ok, all.len() - 1);
}

#[test]
fn snapshot_seed_round_trips() {
    for s in seeds("read_snapshot_csv") {
        if let Ok(edges) = parse_snapshot_csv(&s) {
            let mut buf = Vec::new();
            write_snapshot(
                &Snapshot {
                    t: 0.0,
                    edges: edges.clone(),
                },
                &mut buf,
            )
            .unwrap();
            let back = parse_snapshot_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
            assert_eq!(back.len(), edges.len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn mutated_configs_do_not_panic(
        seed in 0usize..16,
        at in 0usize..4096,
        len in 0usize..64,
        kind in any::<u8>(),
        insert in "[a-z0-9_=\\[\\]{}\",.\\- \n]{0,24}",
    ) {
        let all = seeds("parse_config");
        let text = mutate(&all[seed % all.len()], at, len, kind, &insert);
        if let Ok(net) = parse_config(&text) {
            prop_assert!(net.validate().is_ok());
        }
    }

    #[test]
    fn mutated_snapshots_do_not_panic(
        seed in 0usize..16,
        at in 0usize..4096,
        len in 0usize..64,
        kind in any::<u8>(),
        insert in "[a-z0-9,.e+\\-\"\n]{0,24}",
    ) {
        let all = seeds("read_snapshot_csv");
        let text = mutate(&all[seed % all.len()], at, len, kind, &insert);
        if let Ok(edges) = parse_snapshot_csv(&text) {
            let mut buf = Vec::new();
            write_snapshot(&Snapshot { t: 0.0, edges: edges.clone() }, &mut buf).unwrap();
            let back = parse_snapshot_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
            prop_assert_eq!(back.len(), edges.len());
        }
    }

    #[test]
    fn arbitrary_text_does_not_panic(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
        let _ = parse_snapshot_csv(&text);
    }
}
