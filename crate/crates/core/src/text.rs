//! Shared tokenizer for the line-based file formats.
//!
//! Blank lines and everything after `//` are ignored. Tokens are separated
//! by whitespace and carry 1-based line and column numbers.

use crate::error::Error;

#[derive(Clone, Copy, Debug)]
pub struct Tok<'a> {
    pub text: &'a str,
    pub line: usize,
    pub column: usize,
}

impl<'a> Tok<'a> {
    pub fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.column, message)
    }
}

/// Non-empty lines, each as its list of tokens.
pub fn lines(src: &str) -> Vec<Vec<Tok<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let body = match raw.find("//") {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut toks = Vec::new();
        let mut start = None;
        for (j, c) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    toks.push(Tok { text: &body[s..j], line: i + 1, column: body[..s].chars().count() + 1 });
                }
            } else if start.is_none() {
                start = Some(j);
            }
        }
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    out
}

/// Error positioned just after the last token of a line.
pub fn eol(line: &[Tok<'_>], message: impl Into<String>) -> Error {
    let last = line.last().expect("non-empty line");
    Error::parse(last.line, last.column + last.text.chars().count(), message)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_and_comments() {
        let ls = lines("fsm\n\n  q0  w(a) q1 // trailing\n// whole line\n");
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[1][1].text, "w(a)");
        assert_eq!((ls[1][1].line, ls[1][1].column), (3, 7));
    }
}
