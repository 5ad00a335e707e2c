mod common;

use gpcn::data::{
    generate_sbm, import_external, load_dataset, read_binary, read_split_file, read_text, save_dataset, write_binary,
    write_text, Format, SyntheticSpec,
};
use gpcn::graph::edge_homophily;
use gpcn::train::SplitProtocol;
use gpcn::{Error, ParseError};
use proptest::prelude::*;
use std::fs;

fn spec(n: usize, classes: usize, p_in: f64, p_out: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec { n, classes, p_in, p_out, feature_dim: classes + 2, feature_separation: 1.5, seed }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn formats_round_trip_exactly(n in 4usize..60, classes in 2usize..4, p in 0.0f64..0.4, seed in any::<u64>()) {
        let ds = generate_sbm(&spec(n.max(classes), classes, p, p / 2.0, seed)).unwrap();
        let mut text = Vec::new();
        write_text(&mut text, &ds).unwrap();
        prop_assert_eq!(&read_text(text.as_slice(), &ds.name).unwrap(), &ds);
        let mut bin = Vec::new();
        write_binary(&mut bin, &ds).unwrap();
        prop_assert_eq!(&read_binary(bin.as_slice(), &ds.name).unwrap(), &ds);
    }
}

#[test]
fn files_round_trip_through_both_formats() {
    let ds = generate_sbm(&spec(40, 3, 0.2, 0.05, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (format, file) in [(Format::Text, "g.txt"), (Format::Binary, "g.pgcn")] {
        let path = dir.path().join(file);
        save_dataset(&ds, &path, format).unwrap();
        let back = load_dataset(&path, format).unwrap();
        assert_eq!(back.adjacency, ds.adjacency);
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
    }
}

fn parse_line(text: &str) -> Option<usize> {
    match read_text(text.as_bytes(), "bad") {
        Err(Error::Parse(e)) => e.line(),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn text_errors_name_their_line() {
    assert_eq!(parse_line("3 1\n"), Some(1));
    assert_eq!(parse_line("3 x 2\n"), Some(1));
    assert_eq!(parse_line("2 1 2\n0 5\n0\n1\n1\n2\n"), Some(2));
    assert_eq!(parse_line("2 1 2\n0 1\n0\n7\n1\n2\n"), Some(4));
    assert_eq!(parse_line("2 1 2\n0 1\n0\n1\n1 2\n3\n"), Some(6));
    assert_eq!(parse_line("2 1 2\n0 1\n0\n1\n1\nnan\n"), Some(6));
    // Blank lines still count toward line numbers.
    assert_eq!(parse_line("2 1 2\n\n0 q\n"), Some(3));
    assert_eq!(parse_line("2 1 2\n0 1\n0\n"), Some(4));
    assert!(matches!(
        read_text("2 1 2\n0 1\n0\n1\n1\n2 3\n".as_bytes(), "bad"),
        Err(Error::Parse(ParseError::FeatureCount { line: 6, expected: 1, found: 2 }))
    ));
}

#[test]
fn directed_text_edges_are_kept() {
    let ds = read_text("3 2 2\n0 1\n1 2\n0\n1\n0\n1\n1\n1\n".as_bytes(), "d").unwrap();
    assert!(!ds.adjacency.symmetric_hint());
    assert_eq!(ds.adjacency.get(0, 1), 1.0);
    assert_eq!(ds.adjacency.get(1, 0), 0.0);
}

#[test]
fn binary_errors_are_reported() {
    let ds = generate_sbm(&spec(10, 2, 0.3, 0.1, 2)).unwrap();
    let mut bin = Vec::new();
    write_binary(&mut bin, &ds).unwrap();
    let mut wrong = bin.clone();
    wrong[0] = b'X';
    assert!(matches!(read_binary(wrong.as_slice(), "x"), Err(Error::Parse(ParseError::BadMagic { .. }))));
    assert!(read_binary(&bin[..bin.len() - 3], "x").is_err());
    let mut version = bin.clone();
    version[4] = 9;
    assert!(matches!(
        read_binary(version.as_slice(), "x"),
        Err(Error::Parse(ParseError::UnsupportedVersion(9)))
    ));
}

#[test]
fn sbm_homophily_tracks_block_probabilities() {
    // With p_in = p_out every pair is equally likely, so the expected share of
    // same-class pairs is Σ n_k(n_k−1) / n(n−1).
    let (n, c) = (150, 3);
    let same_pairs = 3.0 * 50.0 * 49.0;
    let expected = same_pairs / (n * (n - 1)) as f64;
    let mean = (0..50)
        .map(|seed| {
            let ds = generate_sbm(&spec(n, c, 0.05, 0.05, seed)).unwrap();
            edge_homophily(&ds.adjacency, &ds.labels).unwrap()
        })
        .sum::<f64>()
        / 50.0;
    assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");
    assert!((mean - 1.0 / c as f64).abs() < 0.02);

    let ds = generate_sbm(&spec(n, c, 0.1, 0.0, 7)).unwrap();
    assert_eq!(edge_homophily(&ds.adjacency, &ds.labels).unwrap(), 1.0);
}

#[test]
fn sbm_rejects_invalid_specs() {
    assert!(generate_sbm(&spec(10, 2, 1.5, 0.1, 0)).is_err());
    assert!(generate_sbm(&spec(1, 2, 0.5, 0.1, 0)).is_err());
    let narrow = SyntheticSpec { feature_dim: 1, ..spec(10, 3, 0.5, 0.1, 0) };
    assert!(generate_sbm(&narrow).is_err());
}

#[test]
fn external_files_import() {
    let dir = tempfile::tempdir().unwrap().keep().join("toy");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("edges.tsv"), "node_id\tnode_id\n0\t1\n1\t2\n2\t0\n").unwrap();
    fs::write(dir.join("features.txt"), "1,0\n0,1\n0.5,0.5\n").unwrap();
    fs::write(dir.join("labels.txt"), "0\n1\n1\n").unwrap();
    let ds = import_external(&dir.join("edges.tsv"), &dir.join("features.txt"), &dir.join("labels.txt")).unwrap();
    assert_eq!(ds.name, "toy");
    assert_eq!((ds.num_nodes(), ds.num_features(), ds.num_classes()), (3, 2, 2));
    assert_eq!(ds.adjacency.nnz(), 3);
    assert!(!ds.adjacency.symmetric_hint());

    fs::write(dir.join("split0.txt"), "train\nval\ntest\n").unwrap();
    let s = read_split_file(&dir.join("split0.txt"), 3, 0).unwrap();
    assert_eq!((s.train, s.val, s.test), (vec![0], vec![1], vec![2]));
    assert_eq!(s.protocol, SplitProtocol::FixedFile);
    fs::write(dir.join("split1.txt"), "0\n-\n").unwrap();
    assert!(read_split_file(&dir.join("split1.txt"), 3, 1).is_err());
    fs::write(dir.join("split2.txt"), "0\nfoo\n2\n").unwrap();
    assert!(matches!(
        read_split_file(&dir.join("split2.txt"), 3, 2),
        Err(Error::Parse(ParseError::BadToken { line: 2, .. }))
    ));

    fs::write(dir.join("labels.txt"), "0\n1\n").unwrap();
    assert!(import_external(&dir.join("edges.tsv"), &dir.join("features.txt"), &dir.join("labels.txt")).is_err());
    fs::remove_dir_all(&dir).unwrap();
}
