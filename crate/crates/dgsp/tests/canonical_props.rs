use std::path::Path;

use dgsp::adapters::{adapt, count_mismatches, DatasetKind};
use dgsp::canonical::{load_canonical, parse_canonical, to_canonical_json, write_canonical, Strictness};
use dgsp::synth;
use dgsp_core::TemporalGraphSignal;
use proptest::collection::vec;
use proptest::prelude::*;

fn signal_strategy() -> impl Strategy<Value = TemporalGraphSignal> {
    (1usize..6, 1usize..3, 1usize..5).prop_flat_map(|(n, f, s)| {
        (
            vec((0..n, 0..n), 0..8),
            vec(-1e6f64..1e6, n * f * s),
            any::<bool>(),
            "[a-z]{1,8}",
        )
            .prop_map(move |(edges, flat, weighted, name)| {
                let weights = weighted.then(|| (0..edges.len()).map(|i| 0.25 + i as f64).collect());
                TemporalGraphSignal::from_flat(&name, n, f, edges, weights, "weekly", flat).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_load_is_identity(signal in signal_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_canonical(&signal, &path).unwrap();
        let loaded = load_canonical(&path, Strictness::Strict).unwrap();
        prop_assert!(loaded.warnings.is_empty());
        prop_assert_eq!(&loaded.signal, &signal);
        prop_assert_eq!(to_canonical_json(&loaded.signal), to_canonical_json(&signal));
    }
}

#[test]
fn unknown_fields_warn_or_fail() {
    let text = r#"{"name": "t", "num_nodes": 1, "edges": [], "frequency": "", "features": [[[1.0]]], "extra": 1}"#;
    let p = Path::new("t.json");
    let lenient = parse_canonical(p, text, Strictness::Lenient).unwrap();
    assert_eq!(lenient.warnings.len(), 1);
    assert!(parse_canonical(p, text, Strictness::Strict).is_err());
}

#[test]
fn surrogates_match_published_counts() {
    for kind in [DatasetKind::Chickenpox, DatasetKind::PedalMe] {
        let doc = synth::surrogate(kind, 0).unwrap();
        let s = adapt(Path::new("raw.json"), &doc, kind).unwrap();
        let want = kind.expected();
        assert_eq!((s.num_nodes(), s.edges().len(), s.num_snapshots()), (want.nodes, want.edges, want.snapshots));
        assert!(count_mismatches(kind, &s).is_empty());
        assert_eq!(synth::surrogate(kind, 0).unwrap(), doc);
        assert_ne!(synth::surrogate(kind, 1).unwrap(), doc);
    }
}
