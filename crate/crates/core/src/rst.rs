//! RST discourse trees and their conversion to labeled discourse skeletons.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::tree::{DiscourseLabel, LabelError, Nuclearity};

/// A node of an RST tree.
///
/// Mononuclear relations hold exactly one nucleus and one satellite, with the
/// relation name attached to the satellite. Multinuclear relations hold two or
/// more nuclei sharing one relation name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RstNode {
    /// An elementary discourse unit with its raw text.
    Edu(String),
    Mononuclear {
        relation: String,
        nucleus_first: bool,
        nucleus: Box<RstNode>,
        satellite: Box<RstNode>,
    },
    Multinuclear {
        relation: String,
        nuclei: Vec<RstNode>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RstError {
    #[error("multinuclear relation {0} needs at least two nuclei")]
    TooFewNuclei(String),
    #[error("invalid relation name: {0}")]
    Relation(#[from] LabelError),
}

impl RstNode {
    pub fn edu(text: impl Into<String>) -> RstNode {
        RstNode::Edu(text.into())
    }

    pub fn mononuclear(
        relation: impl Into<String>,
        nucleus_first: bool,
        nucleus: RstNode,
        satellite: RstNode,
    ) -> RstNode {
        RstNode::Mononuclear {
            relation: relation.into(),
            nucleus_first,
            nucleus: Box::new(nucleus),
            satellite: Box::new(satellite),
        }
    }

    pub fn multinuclear(relation: impl Into<String>, nuclei: Vec<RstNode>) -> RstNode {
        RstNode::Multinuclear {
            relation: relation.into(),
            nuclei,
        }
    }

    fn collect_edus<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            RstNode::Edu(text) => out.push(text),
            RstNode::Mononuclear {
                nucleus_first,
                nucleus,
                satellite,
                ..
            } => {
                let (l, r) = if *nucleus_first {
                    (nucleus, satellite)
                } else {
                    (satellite, nucleus)
                };
                l.collect_edus(out);
                r.collect_edus(out);
            }
            RstNode::Multinuclear { nuclei, .. } => {
                for n in nuclei {
                    n.collect_edus(out);
                }
            }
        }
    }

    fn internal_count(&self) -> usize {
        match self {
            RstNode::Edu(_) => 0,
            RstNode::Mononuclear {
                nucleus, satellite, ..
            } => 1 + nucleus.internal_count() + satellite.internal_count(),
            RstNode::Multinuclear { nuclei, .. } => {
                1 + nuclei.iter().map(RstNode::internal_count).sum::<usize>()
            }
        }
    }
}

/// A validated RST discourse tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RstTree {
    root: RstNode,
}

impl RstTree {
    pub fn new(root: RstNode) -> Result<Self, RstError> {
        fn check(node: &RstNode) -> Result<(), RstError> {
            match node {
                RstNode::Edu(_) => Ok(()),
                RstNode::Mononuclear {
                    relation,
                    nucleus,
                    satellite,
                    ..
                } => {
                    DiscourseLabel::new(relation.as_str(), Nuclearity::NucleusThenSatellite)?;
                    check(nucleus)?;
                    check(satellite)
                }
                RstNode::Multinuclear { relation, nuclei } => {
                    DiscourseLabel::new(relation.as_str(), Nuclearity::MultiNuclear)?;
                    if nuclei.len() < 2 {
                        return Err(RstError::TooFewNuclei(relation.clone()));
                    }
                    nuclei.iter().try_for_each(check)
                }
            }
        }
        check(&root)?;
        Ok(RstTree { root })
    }

    pub fn root(&self) -> &RstNode {
        &self.root
    }

    /// EDU texts in document order.
    pub fn edu_texts(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_edus(&mut out);
        out
    }

    pub fn edu_count(&self) -> usize {
        self.edu_texts().len()
    }

    pub fn internal_count(&self) -> usize {
        self.root.internal_count()
    }
}

/// Node of a discourse skeleton: discourse-labeled internal nodes over EDU
/// placeholders numbered in document order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkeletonNode {
    Edu(usize),
    Relation {
        label: DiscourseLabel,
        children: Vec<SkeletonNode>,
    },
}

impl SkeletonNode {
    pub fn label(&self) -> Option<&DiscourseLabel> {
        match self {
            SkeletonNode::Edu(_) => None,
            SkeletonNode::Relation { label, .. } => Some(label),
        }
    }

    pub fn children(&self) -> &[SkeletonNode] {
        match self {
            SkeletonNode::Edu(_) => &[],
            SkeletonNode::Relation { children, .. } => children,
        }
    }
}

/// A discourse tree in joint-tree labeling whose leaves are still EDUs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    root: SkeletonNode,
    edu_count: usize,
}

impl Skeleton {
    pub fn root(&self) -> &SkeletonNode {
        &self.root
    }

    pub fn edu_count(&self) -> usize {
        self.edu_count
    }

    /// Builds a skeleton directly. EDU placeholders must be numbered
    /// `0..k` left to right.
    pub fn from_root(root: SkeletonNode) -> Option<Skeleton> {
        fn walk(n: &SkeletonNode, next: &mut usize) -> bool {
            match n {
                SkeletonNode::Edu(i) => {
                    let ok = *i == *next;
                    *next += 1;
                    ok
                }
                SkeletonNode::Relation { label, children } => {
                    let arity_ok = match label.form {
                        Nuclearity::MultiNuclear => children.len() >= 2,
                        _ => children.len() == 2,
                    };
                    arity_ok && children.iter().all(|c| walk(c, next))
                }
            }
        }
        let mut edu_count = 0;
        walk(&root, &mut edu_count).then_some(Skeleton { root, edu_count })
    }
}

/// Relabels an RST tree in joint-tree form: a mononuclear node becomes a
/// node labeled with its relation and the satellite-to-nucleus direction, a
/// multinuclear node keeps all its children under the bare relation.
pub fn convert_rst(rst: &RstTree) -> Skeleton {
    fn walk(node: &RstNode, next: &mut usize) -> SkeletonNode {
        match node {
            RstNode::Edu(_) => {
                let i = *next;
                *next += 1;
                SkeletonNode::Edu(i)
            }
            RstNode::Mononuclear {
                relation,
                nucleus_first,
                nucleus,
                satellite,
            } => {
                let (form, left, right) = if *nucleus_first {
                    (Nuclearity::NucleusThenSatellite, nucleus, satellite)
                } else {
                    (Nuclearity::SatelliteThenNucleus, satellite, nucleus)
                };
                let left = walk(left, next);
                let right = walk(right, next);
                SkeletonNode::Relation {
                    label: DiscourseLabel {
                        relation: relation.clone(),
                        form,
                    },
                    children: alloc::vec![left, right],
                }
            }
            RstNode::Multinuclear { relation, nuclei } => SkeletonNode::Relation {
                label: DiscourseLabel {
                    relation: relation.clone(),
                    form: Nuclearity::MultiNuclear,
                },
                children: nuclei.iter().map(|n| walk(n, next)).collect(),
            },
        }
    }
    let mut edu_count = 0;
    let root = walk(rst.root(), &mut edu_count);
    Skeleton { root, edu_count }
}

/// The RST tree a skeleton was converted from, with `edu_texts[i]` as the
/// text of EDU `i`. Returns `None` when the counts differ.
pub fn skeleton_to_rst<S: AsRef<str>>(skeleton: &Skeleton, edu_texts: &[S]) -> Option<RstTree> {
    fn walk<S: AsRef<str>>(node: &SkeletonNode, texts: &[S]) -> RstNode {
        match node {
            SkeletonNode::Edu(i) => RstNode::edu(texts[*i].as_ref()),
            SkeletonNode::Relation { label, children } => {
                let mut kids = children.iter().map(|c| walk(c, texts));
                match label.form {
                    Nuclearity::MultiNuclear => RstNode::multinuclear(label.relation.clone(), kids.collect()),
                    form => {
                        let left = kids.next().expect("binary relation");
                        let right = kids.next().expect("binary relation");
                        if form == Nuclearity::NucleusThenSatellite {
                            RstNode::mononuclear(label.relation.clone(), true, left, right)
                        } else {
                            RstNode::mononuclear(label.relation.clone(), false, right, left)
                        }
                    }
                }
            }
        }
    }
    if skeleton.edu_count() != edu_texts.len() {
        return None;
    }
    RstTree::new(walk(skeleton.root(), edu_texts)).ok()
}
