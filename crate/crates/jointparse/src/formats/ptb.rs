//! Penn Treebank bracketed trees.
//!
//! Empty elements (`-NONE-`) are removed together with constituents left
//! empty, and function tags and indices are stripped from labels
//! (`NP-SBJ-1` becomes `NP`). Bracket escapes in leaves are resolved.

use jointparse_core::tree::{Label, LabelError, SyntacticLabel};
use jointparse_core::JointTree;

use super::joint::TreeBuilder;
use super::sexp::{parse_all, Sexp, SyntaxError};
use super::FormatError;

/// The bare category of a treebank label.
pub fn strip_function_tags(raw: &str) -> &str {
    if raw.starts_with('-') {
        return raw;
    }
    let end = raw.find(['-', '=']).unwrap_or(raw.len());
    &raw[..end]
}

fn ptb_label(raw: &str) -> Result<Option<Label>, LabelError> {
    if raw == "-NONE-" {
        return Ok(None);
    }
    SyntacticLabel::new(strip_function_tags(raw)).map(|l| Some(Label::Syntactic(l)))
}

/// Reads all sentences of a file. Each tree numbers its tokens from zero.
/// Sentences consisting only of empty elements are skipped.
pub fn read_ptb(text: &str) -> Result<Vec<JointTree>, FormatError> {
    let mut trees = Vec::new();
    for (index, form) in parse_all(text, false)?.iter().enumerate() {
        let form = unwrap_root(form)?;
        let mut b = TreeBuilder::new(ptb_label);
        if let Some(root) = b.node(form)? {
            trees.push(b.finish(root, index)?);
        }
    }
    Ok(trees)
}

// `( (S ...) )`: the unlabeled outer bracket of treebank files.
fn unwrap_root(form: &Sexp) -> Result<&Sexp, FormatError> {
    match form.as_list() {
        Some([]) => Err(FormatError::EmptyConstituent { pos: form.pos() }),
        Some([inner @ Sexp::List { .. }]) => Ok(inner),
        Some([Sexp::List { .. }, ..]) => Err(FormatError::Syntax(SyntaxError::other(
            form.pos(),
            "unlabeled bracket with several trees",
        ))),
        _ => Ok(form),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use jointparse_core::tree::{node, pre};

    #[test]
    fn function_tags() {
        assert_eq!(strip_function_tags("NP-SBJ-1"), "NP");
        assert_eq!(strip_function_tags("NP=2"), "NP");
        assert_eq!(strip_function_tags("-LRB-"), "-LRB-");
        assert_eq!(strip_function_tags("PRP$"), "PRP$");
    }

    #[test]
    fn wrapper_traces_and_escapes() {
        let text = "( (S (NP-SBJ (-NONE- *-1)) (VP (VBD said) (-LRB- -LRB-) (NP (-NONE- *T*))) (. .)) )";
        let trees = read_ptb(text).unwrap();
        assert_eq!(trees.len(), 1);
        let t = &trees[0];
        assert_eq!(t.words().collect::<Vec<_>>(), ["said", "(", "."]);
        let expected = node("S", vec![node("VP", vec![pre("VBD", 0), pre("-LRB-", 1)]), pre(".", 2)]);
        assert_eq!(t.root(), &expected);
    }

    #[test]
    fn minimal_and_malformed() {
        let t = read_ptb("(X a)").unwrap();
        assert_eq!(t[0].root(), &pre("X", 0));
        let e = read_ptb("(S (NP a (b)").unwrap_err();
        assert!(matches!(e, FormatError::Syntax(ref s) if s.kind == super::super::SyntaxErrorKind::Unclosed));
        assert!(matches!(read_ptb("(S (NP))"), Err(FormatError::EmptyConstituent { .. })));
        assert!(read_ptb("( (-NONE- *) )").unwrap().is_empty());
    }
}
