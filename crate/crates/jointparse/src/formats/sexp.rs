//! Bracketed s-expressions with source positions.
//!
//! Atoms are maximal runs of characters other than whitespace and brackets.
//! When `quoted` is on, `_!text_!` is read as one atom whose text may contain
//! anything, which is how RST discourse files carry EDU text.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Atom { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {kind}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub kind: SyntaxErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxErrorKind {
    #[error("unbalanced brackets: missing ')'")]
    Unclosed,
    #[error("unbalanced brackets: unexpected ')'")]
    UnexpectedClose,
    #[error("unterminated quoted text")]
    UnterminatedQuote,
    #[error("atom outside brackets")]
    StrayAtom,
    #[error("{0}")]
    Other(String),
}

impl SyntaxError {
    pub fn new(pos: Pos, kind: SyntaxErrorKind) -> Self {
        SyntaxError { pos, kind }
    }

    pub fn other(pos: Pos, msg: impl Into<String>) -> Self {
        SyntaxError::new(pos, SyntaxErrorKind::Other(msg.into()))
    }
}

struct Cursor<'a> {
    rest: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.rest.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.rest.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_space(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }
}

/// Reads every top-level list in `text`.
pub fn parse_all(text: &str, quoted: bool) -> Result<Vec<Sexp>, SyntaxError> {
    let mut cur = Cursor {
        rest: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    // open lists: start position and items so far
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    let mut out = Vec::new();
    loop {
        cur.skip_space();
        let pos = cur.pos;
        let Some(c) = cur.peek() else { break };
        let item = match c {
            '(' => {
                cur.bump();
                stack.push((pos, Vec::new()));
                continue;
            }
            ')' => {
                cur.bump();
                let (start, items) = stack
                    .pop()
                    .ok_or(SyntaxError::new(pos, SyntaxErrorKind::UnexpectedClose))?;
                Sexp::List { items, pos: start }
            }
            '_' if quoted && text_at(&mut cur) => {
                let mut buf = String::new();
                loop {
                    match cur.bump() {
                        None => return Err(SyntaxError::new(pos, SyntaxErrorKind::UnterminatedQuote)),
                        Some('_') if cur.peek() == Some('!') => {
                            cur.bump();
                            break;
                        }
                        Some(ch) => buf.push(ch),
                    }
                }
                Sexp::Atom { text: buf, pos }
            }
            _ => {
                let mut buf = String::new();
                while let Some(ch) = cur.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' {
                        break;
                    }
                    buf.push(ch);
                    cur.bump();
                }
                Sexp::Atom { text: buf, pos }
            }
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(item),
            None if matches!(item, Sexp::List { .. }) => out.push(item),
            None => return Err(SyntaxError::new(pos, SyntaxErrorKind::StrayAtom)),
        }
    }
    if let Some((start, _)) = stack.pop() {
        return Err(SyntaxError::new(start, SyntaxErrorKind::Unclosed));
    }
    Ok(out)
}

// Consumes the opening `_!` if present. Only called when the next char is `_`.
fn text_at(cur: &mut Cursor<'_>) -> bool {
    let mut ahead = cur.rest.clone();
    ahead.next();
    if ahead.next() == Some('!') {
        cur.bump();
        cur.bump();
        true
    } else {
        false
    }
}
