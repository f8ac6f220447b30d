//! Line-oriented files: tokenized documents and EDU segmentations.

use jointparse_core::tree::{tokens_from_words, EduSpan, Token};

use super::FormatError;

/// Documents separated by blank lines; tokens separated by whitespace.
pub fn read_tokens(text: &str) -> Vec<Vec<Token>> {
    let mut docs = Vec::new();
    let mut words: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !words.is_empty() {
                docs.push(tokens_from_words(&words));
                words.clear();
            }
        } else {
            words.extend(line.split_whitespace());
        }
    }
    if !words.is_empty() {
        docs.push(tokens_from_words(&words));
    }
    docs
}

pub fn write_tokens<'a>(docs: impl IntoIterator<Item = &'a [Token]>) -> String {
    let mut out = String::new();
    for d in docs {
        let words: Vec<&str> = d.iter().map(|t| t.text.as_str()).collect();
        out.push_str(&words.join(" "));
        out.push_str("\n\n");
    }
    out
}

/// One document per non-blank line, as `start:end` ranges.
pub fn read_edus(text: &str) -> Result<Vec<Vec<EduSpan>>, FormatError> {
    let mut docs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| FormatError::Line { line: k + 1, msg };
        let mut spans = Vec::new();
        for field in line.split_whitespace() {
            let (a, b) = field
                .split_once(':')
                .ok_or_else(|| err(format!("expected start:end, found {field:?}")))?;
            let parse = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad index in {field:?}")));
            let (start, end) = (parse(a)?, parse(b)?);
            if start >= end {
                return Err(err(format!("empty range {field:?}")));
            }
            spans.push(EduSpan::new(start, end));
        }
        docs.push(spans);
    }
    Ok(docs)
}

pub fn write_edus<'a>(docs: impl IntoIterator<Item = &'a [EduSpan]>) -> String {
    let mut out = String::new();
    for d in docs {
        let fields: Vec<String> = d.iter().map(|e| format!("{}:{}", e.start, e.end)).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}
