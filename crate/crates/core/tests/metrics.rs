use jointparse_core::eval::{MatchCounts, Prf, Report};
use jointparse_core::model::{Model, ModelConfig, Vocabulary};
use jointparse_core::synth::{generate_synthetic, SynthParams};
use jointparse_core::transition::DecodeMode;
use jointparse_core::tree::{extract_edus, labeled_spans, DiscourseLabel, Label, Node, Nuclearity};
use jointparse_core::JointTree;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relabels gold nodes at random, keeping the tree well formed.
fn relabel(node: &Node, rng: &mut ChaCha8Rng) -> Node {
    match node {
        Node::Leaf(i) => Node::Leaf(*i),
        Node::Internal { label, children } => {
            let children: Vec<Node> = children.iter().map(|c| relabel(c, rng)).collect();
            let label = match label {
                Label::Discourse(d) if rng.random_bool(0.4) => {
                    let form = match (d.form, children.len()) {
                        (_, 2) => [Nuclearity::NucleusThenSatellite, Nuclearity::SatelliteThenNucleus, Nuclearity::MultiNuclear]
                            [rng.random_range(0..3)],
                        (f, _) => f,
                    };
                    let relation = if rng.random_bool(0.5) { "Other" } else { d.relation.as_str() };
                    Label::Discourse(DiscourseLabel::new(relation, form).unwrap())
                }
                Label::Syntactic(_) if rng.random_bool(0.2) => Label::nt("X"),
                l => l.clone(),
            };
            Node::internal(label, children)
        }
    }
}

fn untrained(gold: &JointTree, seed: u64, edus: bool) -> JointTree {
    let cfg = ModelConfig {
        word_dim: 3,
        lstm_dim: 3,
        hidden_dim: 4,
    };
    let model = Model::new(Vocabulary::build(std::slice::from_ref(gold)), cfg, seed);
    let spans = extract_edus(gold);
    let mode = if edus { DecodeMode::GoldEdus(&spans) } else { DecodeMode::EndToEnd };
    model.parse(gold.tokens(), mode).unwrap().tree
}

fn pair(a: u64, b: u64, kind: u8) -> (JointTree, JointTree) {
    let gold = generate_synthetic(a, &SynthParams::default()).unwrap();
    let pred = match kind % 3 {
        0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(b);
            JointTree::new(gold.tokens().to_vec(), relabel(gold.root(), &mut rng)).unwrap()
        }
        1 => untrained(&gold, b, false),
        _ => untrained(&gold, b, true),
    };
    (gold, pred)
}

/// Multiset intersection by repeated removal.
fn naive(gold: &[String], pred: &[String]) -> MatchCounts {
    let mut left = pred.to_vec();
    let mut matched = 0;
    for g in gold {
        if let Some(k) = left.iter().position(|p| p == g) {
            left.swap_remove(k);
            matched += 1;
        }
    }
    MatchCounts { matched, gold: gold.len(), pred: pred.len() }
}

fn keys(t: &JointTree, keep: impl Fn(&Label) -> bool) -> Vec<String> {
    labeled_spans(t)
        .into_iter()
        .filter(|s| keep(&s.label))
        .map(|s| format!("{} {} {}", s.start, s.end, s.label))
        .collect()
}

fn discourse_keys(t: &JointTree, depth: u8) -> Vec<String> {
    labeled_spans(t)
        .into_iter()
        .filter_map(|s| {
            let d = s.label.as_discourse()?.clone();
            Some(match depth {
                0 => format!("{} {}", s.start, s.end),
                1 => format!("{} {} {:?}", s.start, s.end, d.form),
                _ => format!("{} {} {:?} {}", s.start, s.end, d.form, d.relation),
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_match_naive_matching(a in any::<u64>(), b in any::<u64>(), kind in any::<u8>()) {
        let (gold, pred) = pair(a, b, kind);
        let r = Report::new(&gold, &pred).unwrap();
        prop_assert_eq!(r.overall, naive(&keys(&gold, |_| true), &keys(&pred, |_| true)));
        prop_assert_eq!(r.constituency, naive(&keys(&gold, |l| !l.is_discourse()), &keys(&pred, |l| !l.is_discourse())));
        prop_assert_eq!(r.disc, naive(&keys(&gold, Label::is_discourse), &keys(&pred, Label::is_discourse)));
        prop_assert_eq!(r.discourse.structure, naive(&discourse_keys(&gold, 0), &discourse_keys(&pred, 0)));
        prop_assert_eq!(r.discourse.nuclearity, naive(&discourse_keys(&gold, 1), &discourse_keys(&pred, 1)));
        prop_assert_eq!(r.discourse.relation, naive(&discourse_keys(&gold, 2), &discourse_keys(&pred, 2)));
        let cut = |t: &JointTree| extract_edus(t).iter().skip(1).map(|e| e.start.to_string()).collect::<Vec<_>>();
        prop_assert_eq!(r.seg, naive(&cut(&gold), &cut(&pred)));
    }

    #[test]
    fn discourse_scores_nest(a in any::<u64>(), b in any::<u64>(), kind in any::<u8>()) {
        let (gold, pred) = pair(a, b, kind);
        let d = Report::new(&gold, &pred).unwrap().discourse;
        prop_assert!(d.structure.matched >= d.nuclearity.matched);
        prop_assert!(d.nuclearity.matched >= d.relation.matched);
        let f = d.prf();
        prop_assert!(f.structure.f1 >= f.nuclearity.f1 && f.nuclearity.f1 >= f.relation.f1);
    }

    #[test]
    fn swapping_gold_and_prediction(a in any::<u64>(), b in any::<u64>(), kind in any::<u8>()) {
        let (gold, pred) = pair(a, b, kind);
        let fwd = Report::new(&gold, &pred).unwrap();
        let back = Report::new(&pred, &gold).unwrap();
        for ((_, x), (_, y)) in fwd.scores().iter().zip(back.scores().iter()) {
            prop_assert!((x.precision - y.recall).abs() < 1e-12);
            prop_assert!((x.recall - y.precision).abs() < 1e-12);
            prop_assert!((x.f1 - y.f1).abs() < 1e-12);
        }
    }

    #[test]
    fn a_tree_against_itself(a in any::<u64>()) {
        let gold = generate_synthetic(a, &SynthParams::default()).unwrap();
        let r = Report::new(&gold, &gold).unwrap();
        for (name, p) in r.scores() {
            prop_assert_eq!(p, Prf { precision: 1.0, recall: 1.0, f1: 1.0 }, "{}", name);
        }
    }
}

#[test]
fn micro_average_sums_counts() {
    let reports: Vec<Report> = (0..5).map(|s| {
        let (g, p) = pair(s, s + 100, s as u8);
        Report::new(&g, &p).unwrap()
    }).collect();
    let micro = Report::micro(&reports);
    let gold: usize = reports.iter().map(|r| r.overall.gold).sum();
    let matched: usize = reports.iter().map(|r| r.overall.matched).sum();
    assert_eq!((micro.overall.gold, micro.overall.matched), (gold, matched));
}
