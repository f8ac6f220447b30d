use jointparse_core::rst::{convert_rst, skeleton_to_rst, SkeletonNode};
use jointparse_core::splice::splice_edus;
use jointparse_core::synth::{generate_aligned, generate_synthetic, SynthParams};
use jointparse_core::tree::{extract_edus, labeled_spans, edus_tile, Label, Node, Nuclearity};
use proptest::prelude::*;

fn small(max_tokens: usize, max_edus: usize) -> SynthParams {
    SynthParams {
        max_tokens,
        max_edus,
        ..SynthParams::default()
    }
}

/// Every internal node of `node` as `(start, end, label)`, collected without
/// any unary handling.
fn all_nodes(node: &Node, out: &mut Vec<(usize, usize, String)>) {
    if let Node::Internal { label, children } = node {
        let (s, e) = node.span();
        out.push((s, e, label.to_string()));
        children.iter().for_each(|c| all_nodes(c, out));
    }
}

fn multinuclear_count(node: &Node) -> usize {
    let here = matches!(node.label(), Some(Label::Discourse(d)) if d.form == Nuclearity::MultiNuclear) as usize;
    here + node.children().iter().map(multinuclear_count).sum::<usize>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spans_are_laminar(seed in any::<u64>()) {
        let tree = generate_synthetic(seed, &SynthParams::default()).unwrap();
        let spans = labeled_spans(&tree);
        for (k, a) in spans.iter().enumerate() {
            prop_assert!(a.start < a.end && a.end <= tree.len());
            for b in &spans[k + 1..] {
                prop_assert!(a.extent() != b.extent());
                let disjoint = a.end <= b.start || b.end <= a.start;
                let nested = (a.start <= b.start && b.end <= a.end) || (b.start <= a.start && a.end <= b.end);
                prop_assert!(disjoint || nested, "{} crosses {}", a, b);
            }
        }
        prop_assert!(spans.iter().any(|s| s.extent() == (0, tree.len())));
    }

    #[test]
    fn unary_chains_merge_by_extent(seed in any::<u64>()) {
        let tree = generate_synthetic(seed, &SynthParams::default()).unwrap();
        let mut nodes = Vec::new();
        all_nodes(tree.root(), &mut nodes);
        // pre-order keeps the members of a chain top-down
        let mut merged: Vec<(usize, usize, String)> = Vec::new();
        for (s, e, l) in nodes {
            match merged.iter_mut().find(|m| (m.0, m.1) == (s, e)) {
                Some(m) => {
                    m.2.push('+');
                    m.2.push_str(&l);
                }
                None => merged.push((s, e, l)),
            }
        }
        merged.sort();
        let mut got: Vec<(usize, usize, String)> =
            labeled_spans(&tree).into_iter().map(|s| (s.start, s.end, s.label.to_string())).collect();
        got.sort();
        prop_assert_eq!(got, merged);
    }

    #[test]
    fn generator_is_deterministic_and_bounded(seed in any::<u64>(), n in 1usize..60, m in 1usize..8) {
        let p = small(n, m);
        let a = generate_synthetic(seed, &p).unwrap();
        prop_assert_eq!(&a, &generate_synthetic(seed, &p).unwrap());
        prop_assert!(a.validate().is_ok());
        prop_assert!(!a.is_empty() && a.len() <= n);
        let edus = extract_edus(&a);
        prop_assert!(edus.len() <= m);
        prop_assert!(edus_tile(&edus, a.len()));
    }

    #[test]
    fn splicing_keeps_the_segmentation(seed in any::<u64>()) {
        let inst = generate_aligned(seed, &SynthParams::default()).unwrap();
        let tree = splice_edus(&inst.skeleton, &inst.edus, &inst.forest).unwrap();
        prop_assert!(tree.validate().is_ok());
        prop_assert_eq!(tree.tokens(), inst.forest.tokens());
        prop_assert_eq!(extract_edus(&tree), inst.edus.clone());
        prop_assert_eq!(tree.discourse_node_count(), inst.skeleton.edu_count() - 1 - merged_nodes(inst.skeleton.root()));
    }

    #[test]
    fn discourse_conversion_round_trips(seed in any::<u64>()) {
        let inst = generate_aligned(seed, &SynthParams::default()).unwrap();
        let rst = skeleton_to_rst(&inst.skeleton, &inst.edu_texts).unwrap();
        prop_assert_eq!(rst.edu_count(), inst.edus.len());
        let skeleton = convert_rst(&rst);
        prop_assert_eq!(skeleton.edu_count(), rst.edu_count());
        prop_assert_eq!(&skeleton, &inst.skeleton);
    }
}

/// Nodes beyond the binary count that multinuclear nodes save: a node with
/// `k` children stands for `k - 1` binary ones.
fn merged_nodes(node: &SkeletonNode) -> usize {
    let children = node.children();
    children.len().saturating_sub(2) + children.iter().map(merged_nodes).sum::<usize>()
}

#[test]
fn multinuclear_nodes_occur() {
    let with = (0..100)
        .filter(|&s| multinuclear_count(generate_synthetic(s, &SynthParams::default()).unwrap().root()) > 0)
        .count();
    assert!(with >= 1, "{with}");
}

#[test]
fn different_seeds_differ() {
    let p = SynthParams::default();
    let distinct: std::collections::BTreeSet<String> =
        (0..50).map(|s| format!("{:?}", generate_synthetic(s, &p).unwrap())).collect();
    assert!(distinct.len() > 45);
}
