//! RST discourse treebank trees (`.dis` files).
//!
//! ```text
//! ( Root (span 1 2)
//!   ( Nucleus (leaf 1) (rel2par span) (text _!The first unit._!) )
//!   ( Satellite (leaf 2) (rel2par Elaboration) (text _!The second._!) )
//! )
//! ```
//!
//! A mononuclear relation is named on its satellite, a multinuclear one on
//! each of its nuclei.

use jointparse_core::rst::{RstNode, RstTree};

use super::sexp::{parse_all, Pos, Sexp};
use super::FormatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Root,
    Nucleus,
    Satellite,
}

struct Parsed {
    role: Role,
    relation: Option<String>,
    node: RstNode,
    pos: Pos,
}

fn structure(pos: Pos, msg: impl Into<String>) -> FormatError {
    FormatError::Structure { pos, msg: msg.into() }
}

/// Reads the one tree of a `.dis` file.
pub fn read_rst(text: &str) -> Result<RstTree, FormatError> {
    let forms = parse_all(text, true)?;
    let root = match forms.as_slice() {
        [] => return Err(FormatError::Empty),
        [one] => one,
        [_, second, ..] => return Err(structure(second.pos(), "more than one tree")),
    };
    let parsed = node(root)?;
    RstTree::new(parsed.node).map_err(|source| FormatError::Rst {
        pos: root.pos(),
        source,
    })
}

fn field<'a>(item: &'a Sexp, name: &str) -> Option<&'a [Sexp]> {
    match item.as_list()? {
        [head, rest @ ..] if head.as_atom() == Some(name) => Some(rest),
        _ => None,
    }
}

fn node(s: &Sexp) -> Result<Parsed, FormatError> {
    let pos = s.pos();
    let items = s.as_list().ok_or_else(|| structure(pos, "expected a node"))?;
    let role = match items.first().and_then(Sexp::as_atom) {
        Some("Root") => Role::Root,
        Some("Nucleus") => Role::Nucleus,
        Some("Satellite") => Role::Satellite,
        _ => return Err(structure(pos, "node must start with Root, Nucleus or Satellite")),
    };
    let mut relation = None;
    let mut text = None;
    let mut leaf = false;
    let mut children = Vec::new();
    for item in &items[1..] {
        if field(item, "leaf").is_some() {
            leaf = true;
        } else if field(item, "span").is_some() {
        } else if let Some(rest) = field(item, "rel2par") {
            let name = rest.first().and_then(Sexp::as_atom);
            relation = Some(name.ok_or_else(|| structure(item.pos(), "empty rel2par"))?.to_string());
        } else if let Some(rest) = field(item, "text") {
            let words: Vec<&str> = rest.iter().filter_map(Sexp::as_atom).collect();
            text = Some(words.join(" "));
        } else {
            children.push(node(item)?);
        }
    }
    if role != Role::Root && relation.is_none() {
        return Err(structure(pos, "missing relation"));
    }
    let node = if leaf {
        if !children.is_empty() {
            return Err(structure(pos, "leaf with children"));
        }
        RstNode::edu(text.ok_or_else(|| structure(pos, "leaf without text"))?)
    } else {
        internal(pos, children)?
    };
    Ok(Parsed {
        role,
        relation,
        node,
        pos,
    })
}

fn internal(pos: Pos, children: Vec<Parsed>) -> Result<RstNode, FormatError> {
    if children.len() < 2 {
        return Err(structure(pos, "span node needs at least two children"));
    }
    let nuclei = children.iter().filter(|c| c.role == Role::Nucleus).count();
    if let Some(c) = children.iter().find(|c| c.role == Role::Root) {
        return Err(structure(c.pos, "Root below the top"));
    }
    if nuclei == children.len() {
        let relation = children[0].relation.clone().expect("checked above");
        return Ok(RstNode::multinuclear(relation, children.into_iter().map(|c| c.node).collect()));
    }
    match (children.len(), nuclei) {
        (2, 1) => {
            let nucleus_first = children[0].role == Role::Nucleus;
            let mut it = children.into_iter();
            let (a, b) = (it.next().expect("two"), it.next().expect("two"));
            let (nucleus, satellite) = if nucleus_first { (a, b) } else { (b, a) };
            let relation = satellite.relation.expect("checked above");
            Ok(RstNode::mononuclear(relation, nucleus_first, nucleus.node, satellite.node))
        }
        (_, 0) => Err(structure(pos, "node with satellites only")),
        _ => Err(structure(
            pos,
            format!("{} children with {} nuclei is neither mononuclear nor multinuclear", children.len(), nuclei),
        )),
    }
}

/// Writes a tree in the format [`read_rst`] accepts.
pub fn write_rst(tree: &RstTree) -> String {
    fn edus(node: &RstNode) -> usize {
        match node {
            RstNode::Edu(_) => 1,
            RstNode::Mononuclear { nucleus, satellite, .. } => edus(nucleus) + edus(satellite),
            RstNode::Multinuclear { nuclei, .. } => nuclei.iter().map(edus).sum(),
        }
    }
    fn write(node: &RstNode, role: &str, rel: Option<&str>, first: usize, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let rel = rel.map(|r| format!(" (rel2par {r})")).unwrap_or_default();
        match node {
            RstNode::Edu(text) => {
                out.push_str(&format!("{pad}( {role} (leaf {first}){rel} (text _!{text}_!) )\n"));
            }
            RstNode::Mononuclear {
                relation,
                nucleus_first,
                nucleus,
                satellite,
            } => {
                let last = first + edus(node) - 1;
                out.push_str(&format!("{pad}( {role} (span {first} {last}){rel}\n"));
                let n: (&RstNode, &str, &str) = (nucleus, "Nucleus", "span");
                let s: (&RstNode, &str, &str) = (satellite, "Satellite", relation);
                let (a, b) = if *nucleus_first { (n, s) } else { (s, n) };
                write(a.0, a.1, Some(a.2), first, depth + 1, out);
                write(b.0, b.1, Some(b.2), first + edus(a.0), depth + 1, out);
                out.push_str(&format!("{pad})\n"));
            }
            RstNode::Multinuclear { relation, nuclei } => {
                let last = first + edus(node) - 1;
                out.push_str(&format!("{pad}( {role} (span {first} {last}){rel}\n"));
                let mut at = first;
                for c in nuclei {
                    write(c, "Nucleus", Some(relation), at, depth + 1, out);
                    at += edus(c);
                }
                out.push_str(&format!("{pad})\n"));
            }
        }
    }
    let mut out = String::new();
    write(tree.root(), "Root", None, 1, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "( Root (span 1 2)
  ( Nucleus (leaf 1) (rel2par span) (text _!The first (unit)._!) )
  ( Satellite (leaf 2) (rel2par Elaboration) (text _!The second._!) )
)";

    #[test]
    fn mononuclear() {
        let t = read_rst(TWO).unwrap();
        assert_eq!(t.edu_texts(), ["The first (unit).", "The second."]);
        match t.root() {
            RstNode::Mononuclear { relation, nucleus_first, .. } => {
                assert_eq!(relation, "Elaboration");
                assert!(nucleus_first);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn write_then_read() {
        let t = RstTree::new(RstNode::mononuclear(
            "Elaboration",
            true,
            RstNode::edu("The metals sector outgained other industry groups."),
            RstNode::multinuclear("List", vec![RstNode::edu("a"), RstNode::edu("b (c)"), RstNode::edu("d")]),
        ))
        .unwrap();
        let text = write_rst(&t);
        assert!(text.starts_with("( Root (span 1 4)\n  ( Nucleus (leaf 1) (rel2par span) (text _!The metals"));
        assert_eq!(read_rst(&text).unwrap(), t);
        let single = RstTree::new(RstNode::edu("x")).unwrap();
        assert_eq!(read_rst(&write_rst(&single)).unwrap(), single);
    }

    #[test]
    fn single_edu() {
        let t = read_rst("( Root (leaf 1) (text _!Only one._!) )").unwrap();
        assert_eq!(t.internal_count(), 0);
        assert_eq!(t.edu_count(), 1);
    }

    #[test]
    fn structural_errors() {
        let two_sats = TWO.replace("Nucleus (leaf 1) (rel2par span)", "Satellite (leaf 1) (rel2par Background)");
        assert!(matches!(read_rst(&two_sats), Err(FormatError::Structure { .. })));
        let no_rel = TWO.replace(" (rel2par Elaboration)", "");
        assert!(matches!(read_rst(&no_rel), Err(FormatError::Structure { ref msg, .. }) if msg == "missing relation"));
        assert!(matches!(read_rst(""), Err(FormatError::Empty)));
        assert!(matches!(read_rst("( Root (span 1 2)"), Err(FormatError::Syntax(_))));
    }
}
