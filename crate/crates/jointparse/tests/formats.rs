use jointparse::checkpoint::{self, CheckpointError};
use jointparse::convert::convert_document;
use jointparse::formats::dis::{read_rst, write_rst};
use jointparse::formats::joint::{read_joint, read_joint_one, write_joint, write_treebank};
use jointparse_core::eval::Report;
use jointparse_core::model::{Model, ModelConfig, Vocabulary};
use jointparse_core::rst::{convert_rst, skeleton_to_rst};
use jointparse_core::synth::{generate_aligned, generate_synthetic, SynthParams};
use jointparse_core::transition::DecodeMode;
use jointparse_core::tree::Token;
use jointparse_core::JointTree;
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn costa_rica_example() {
    let tree = convert_document(&fixture("costa_rica.dis"), &fixture("costa_rica.mrg")).unwrap();
    assert_eq!(write_joint(&tree), fixture("costa_rica.joint").trim());
}

#[test]
fn metals_example() {
    let tree = convert_document(&fixture("metals.dis"), &fixture("metals.mrg")).unwrap();
    assert_eq!(write_joint(&tree), fixture("metals.joint").trim());
}

#[test]
fn lowest_common_ancestor_lift() {
    let dis = "( Root (span 1 2)
  ( Satellite (leaf 1) (rel2par Purpose) (text _!b_!) )
  ( Nucleus (leaf 2) (rel2par span) (text _!c d_!) ) )";
    let tree = convert_document(dis, "((A (B b) (C c) (D d)))").unwrap();
    assert_eq!(write_joint(&tree), "(Purpose-> (B b) (A (C c) (D d)))");
}

#[test]
fn example_discourse_trees_survive_rewriting() {
    for name in ["costa_rica.dis", "metals.dis"] {
        let rst = read_rst(&fixture(name)).unwrap();
        assert_eq!(read_rst(&write_rst(&rst)).unwrap(), rst);
        let skeleton = convert_rst(&rst);
        assert_eq!(skeleton_to_rst(&skeleton, &rst.edu_texts()).unwrap(), rst);
    }
}

/// Replaces some words by bracket tokens so escaping is exercised.
fn with_brackets(tree: JointTree, seed: u64) -> JointTree {
    let (tokens, root) = tree.into_parts();
    let specials = ["(", ")", "{", "}", "a(b", "x)"];
    let tokens = tokens
        .into_iter()
        .map(|t| {
            let k = (t.index as u64).wrapping_mul(31).wrapping_add(seed) % 13;
            match specials.get(k as usize) {
                Some(s) => Token::new(t.index, *s),
                None => t,
            }
        })
        .collect();
    JointTree::new(tokens, root).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn synthetic_trees_round_trip(seed in any::<u64>()) {
        let tree = generate_synthetic(seed, &SynthParams::default()).unwrap();
        let text = write_joint(&tree);
        prop_assert!(!text.contains('\n'));
        prop_assert_eq!(read_joint_one(&text).unwrap(), tree);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_tokens_round_trip(seed in any::<u64>()) {
        let tree = with_brackets(generate_synthetic(seed, &SynthParams::default()).unwrap(), seed);
        prop_assert_eq!(read_joint_one(&write_joint(&tree)).unwrap(), tree);
    }

    #[test]
    fn scores_ignore_reserialization(a in any::<u64>(), b in any::<u64>()) {
        let gold = generate_synthetic(a, &SynthParams::default()).unwrap();
        let pred = random_parse(&gold, b);
        let direct = Report::new(&gold, &pred).unwrap();
        let back = read_joint(&write_treebank(&[gold, pred])).unwrap();
        prop_assert_eq!(Report::new(&back[0], &back[1]).unwrap(), direct);
    }

    #[test]
    fn aligned_instances_round_trip_through_dis(seed in any::<u64>()) {
        let inst = generate_aligned(seed, &SynthParams::default()).unwrap();
        let rst = skeleton_to_rst(&inst.skeleton, &inst.edu_texts).unwrap();
        prop_assert_eq!(read_rst(&write_rst(&rst)).unwrap(), rst);
    }
}

/// What an untrained model makes of `gold`'s words.
fn random_parse(gold: &JointTree, seed: u64) -> JointTree {
    let cfg = ModelConfig {
        word_dim: 3,
        lstm_dim: 3,
        hidden_dim: 4,
    };
    let model = Model::new(Vocabulary::build(std::slice::from_ref(gold)), cfg, seed);
    model.parse(gold.tokens(), DecodeMode::EndToEnd).unwrap().tree
}

fn small_model() -> (Model, Vec<JointTree>) {
    let trees: Vec<JointTree> = (0..3).map(|s| generate_synthetic(s, &SynthParams::default()).unwrap()).collect();
    let cfg = ModelConfig {
        word_dim: 4,
        lstm_dim: 5,
        hidden_dim: 6,
    };
    (Model::new(Vocabulary::build(&trees), cfg, 7), trees)
}

#[test]
fn checkpoint_round_trip() {
    let (model, trees) = small_model();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    checkpoint::save(&model, &path).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back.params, model.params);
    assert_eq!(back.vocab, model.vocab);
    for t in &trees {
        let a = model.parse(t.tokens(), DecodeMode::EndToEnd).unwrap();
        let b = back.parse(t.tokens(), DecodeMode::EndToEnd).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn checkpoint_rejects_mismatches() {
    let (model, _) = small_model();
    let json = checkpoint::to_json(&model);
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["params"]["shift"]["b2"].as_array_mut().unwrap().push(0.0.into());
    assert!(matches!(checkpoint::from_json(&v.to_string()), Err(CheckpointError::Model(_))));

    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["words"].as_array_mut().unwrap().pop();
    assert!(checkpoint::from_json(&v.to_string()).is_err());

    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["version"] = 2.into();
    assert!(matches!(checkpoint::from_json(&v.to_string()), Err(CheckpointError::Version(2))));

    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["format"] = "other".into();
    assert!(matches!(checkpoint::from_json(&v.to_string()), Err(CheckpointError::Format(_))));

    assert!(matches!(checkpoint::from_json("{"), Err(CheckpointError::Json(_))));
}
