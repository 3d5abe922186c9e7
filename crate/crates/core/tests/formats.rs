use std::path::Path;

use ifpca::acm::{experiment_preset, generate, AcmConfig, EXPERIMENTS};
use ifpca::ks::{build_null_table, NullTable};
use ifpca::pipeline::{if_hct_pca, PipelineOptions, RunReport};

#[test]
fn null_table_text_and_binary_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let table = build_null_table(40, 1000, 2).unwrap();
    for name in ["t.txt", "t.bin"] {
        let path = dir.path().join(name);
        table.save(&path).unwrap();
        assert_eq!(NullTable::load(&path).unwrap(), table);
    }
}

#[test]
fn corrupt_null_tables_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        ("a.txt", "ifpca-null v1, n=5, N=2, seed=0\n0.3\n0.2\n"),
        ("b.txt", "ifpca-null v1, n=5, N=3, seed=0\n0.1\n0.2\n"),
        ("c.txt", "not a header\n0.1\n"),
    ];
    for (name, body) in bad {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        assert!(NullTable::load(&path).is_err(), "{name}");
    }
    let path = dir.path().join("d.bin");
    std::fs::write(&path, b"ifpca-null v1, n=5, N=2, seed=0\n\0\0\0").unwrap();
    assert!(NullTable::load(&path).is_err());
}

#[test]
fn report_json_round_trips_byte_for_byte() {
    let mut cfg = experiment_preset("1b").unwrap().remove(0);
    cfg.p = 1500;
    let (x, truth) = generate(&cfg, 8).unwrap();
    let opts = PipelineOptions { null_draws: Some(10_000), ..PipelineOptions::simulation(2) };
    let a = if_hct_pca(&x, &opts, None).unwrap().with_truth(&truth.y).unwrap().without_timings().to_json().unwrap();
    let b = if_hct_pca(&x, &opts, None).unwrap().with_truth(&truth.y).unwrap().without_timings().to_json().unwrap();
    assert_eq!(a, b);
    let parsed: RunReport = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed.to_json().unwrap(), a);
}

#[test]
fn shipped_presets_match_builtins() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    for id in EXPERIMENTS {
        let text = std::fs::read_to_string(dir.join(format!("exp{id}.json"))).unwrap();
        let shipped: Vec<AcmConfig> = serde_json::from_str(&text).unwrap();
        assert_eq!(shipped, experiment_preset(id).unwrap(), "experiment {id}");
    }
}
