//! Text formats: PTB constituency trees, RST discourse trees, joint trees,
//! EDU segmentations and tokenized documents.

use jointparse_core::rst::RstError;
use jointparse_core::tree::{LabelError, TreeError};

pub mod dis;
pub mod joint;
pub mod plain;
pub mod ptb;
pub mod sexp;

pub use sexp::{Pos, SyntaxError, SyntaxErrorKind};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {source}")]
    Label { pos: Pos, source: LabelError },
    #[error("{pos}: empty constituent")]
    EmptyConstituent { pos: Pos },
    #[error("tree {index}: {source}")]
    Tree { index: usize, source: TreeError },
    #[error("{pos}: {source}")]
    Rst { pos: Pos, source: RstError },
    #[error("{pos}: {msg}")]
    Structure { pos: Pos, msg: String },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("no trees in input")]
    Empty,
}

const ESCAPES: [(&str, &str); 4] = [("(", "-LRB-"), (")", "-RRB-"), ("{", "-LCB-"), ("}", "-RCB-")];

/// Bracket escapes as found in treebank leaves, resolved to the brackets.
pub fn unescape_token(text: &str) -> String {
    let mut out = text.to_string();
    for (raw, esc) in ESCAPES {
        out = out.replace(esc, raw);
    }
    out
}

pub fn escape_token(text: &str) -> String {
    let mut out = text.to_string();
    for (raw, esc) in ESCAPES {
        out = out.replace(raw, esc);
    }
    out
}
