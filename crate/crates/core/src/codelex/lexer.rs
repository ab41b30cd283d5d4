use std::fmt;

use super::{Token, TokenKind, TokenSeq, SPECIAL_TOKENS};
use super::normalize::is_keyword;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedString,
    IllegalChar(char),
}

/// Lexing failure at a byte offset into the snippet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub struct LexError {
    pub offset: usize,
    pub kind: LexErrorKind,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LexErrorKind::UnterminatedString => {
                write!(f, "unterminated string literal at byte {}", self.offset)
            }
            LexErrorKind::IllegalChar(c) => {
                write!(f, "illegal character {c:?} at byte {}", self.offset)
            }
        }
    }
}

const OPERATORS: [&str; 38] = [
    "**=", "//=", ">>=", "<<=", "...", "==", "!=", "<=", ">=", "//", "**", "->", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "@=", "<<", ">>", ":=", "+", "-", "*", "/", "%", "=", "<", ">",
    "&", "|", "^", "~", "@", "!",
];
const PUNCTUATION: [char; 10] = ['(', ')', '[', ']', '{', '}', ',', ':', ';', '.'];
const STRING_PREFIXES: [&str; 8] = ["r", "u", "b", "f", "br", "rb", "fr", "rf"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn push(&mut self, start: usize, kind: TokenKind) {
        self.out.push(Token::new(&self.src[start..self.pos], kind));
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '\\' && self.line_continuation() {
                // consumed
            } else if c == '<' && self.special() {
                self.push(start, TokenKind::Special);
            } else if c == '\'' || c == '"' {
                self.string(start)?;
            } else if c.is_ascii_digit()
                || (c == '.' && self.rest()[1..].starts_with(|d: char| d.is_ascii_digit()))
            {
                self.number();
                self.push(start, TokenKind::Number);
            } else if c == '_' || c.is_alphabetic() {
                self.identifier(start)?;
            } else if let Some(op) = OPERATORS.iter().find(|op| self.rest().starts_with(**op)) {
                if *op == "!" {
                    return Err(LexError {
                        offset: start,
                        kind: LexErrorKind::IllegalChar('!'),
                    });
                }
                self.pos += op.len();
                self.push(start, TokenKind::Operator);
            } else if PUNCTUATION.contains(&c) {
                self.pos += 1;
                self.push(start, TokenKind::Punctuation);
            } else {
                return Err(LexError {
                    offset: start,
                    kind: LexErrorKind::IllegalChar(c),
                });
            }
        }
        Ok(self.out)
    }

    fn line_continuation(&mut self) -> bool {
        let rest = &self.rest()[1..];
        for nl in ["\r\n", "\n"] {
            if rest.starts_with(nl) {
                self.pos += 1 + nl.len();
                return true;
            }
        }
        false
    }

    fn special(&mut self) -> bool {
        match SPECIAL_TOKENS.iter().find(|s| self.rest().starts_with(**s)) {
            Some(s) => {
                self.pos += s.len();
                true
            }
            None => false,
        }
    }

    fn identifier(&mut self, start: usize) -> Result<(), LexError> {
        let len = self
            .rest()
            .char_indices()
            .find(|&(_, c)| !(c == '_' || c.is_alphanumeric()))
            .map_or(self.rest().len(), |(i, _)| i);
        self.pos += len;
        let word = &self.src[start..self.pos];
        if matches!(self.peek(), Some('\'' | '"'))
            && STRING_PREFIXES.contains(&word.to_ascii_lowercase().as_str())
        {
            return self.string(start);
        }
        let kind = if is_keyword(word) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.push(start, kind);
        Ok(())
    }

    /// Lexes a string literal whose opening quote is at `self.pos`; `start`
    /// may point earlier when a prefix such as `r` or `f` was consumed.
    fn string(&mut self, start: usize) -> Result<(), LexError> {
        let q = self.peek().expect("caller saw a quote");
        let triple: String = std::iter::repeat(q).take(3).collect();
        let unterminated = LexError {
            offset: start,
            kind: LexErrorKind::UnterminatedString,
        };
        if self.rest().starts_with(&triple) {
            self.pos += 3;
            loop {
                let rest = self.rest();
                if rest.is_empty() {
                    return Err(unterminated);
                }
                if rest.starts_with(&triple) {
                    self.pos += 3;
                    break;
                }
                let c = rest.chars().next().expect("non-empty");
                self.pos += c.len_utf8();
                if c == '\\' {
                    match self.peek() {
                        Some(n) => self.pos += n.len_utf8(),
                        None => return Err(unterminated),
                    }
                }
            }
        } else {
            self.pos += 1;
            loop {
                let c = self.peek().ok_or(unterminated)?;
                self.pos += c.len_utf8();
                match c {
                    '\n' => return Err(unterminated),
                    '\\' => match self.peek() {
                        Some(n) => self.pos += n.len_utf8(),
                        None => return Err(unterminated),
                    },
                    c if c == q => break,
                    _ => {}
                }
            }
        }
        self.push(start, TokenKind::StringLiteral);
        Ok(())
    }

    fn number(&mut self) {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        let digits = |i: &mut usize, hex: bool| {
            while *i < bytes.len()
                && (bytes[*i].is_ascii_digit()
                    || bytes[*i] == b'_'
                    || (hex && bytes[*i].is_ascii_hexdigit()))
            {
                *i += 1;
            }
        };
        if bytes[i] == b'0'
            && i + 1 < bytes.len()
            && matches!(bytes[i + 1], b'x' | b'X' | b'o' | b'O' | b'b' | b'B')
        {
            i += 2;
            digits(&mut i, true);
            self.pos = i;
            return;
        }
        digits(&mut i, false);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            digits(&mut i, false);
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                digits(&mut i, false);
            }
        }
        if i < bytes.len() && matches!(bytes[i], b'j' | b'J') {
            i += 1;
        }
        self.pos = i;
    }
}

/// Splits a snippet into tokens by longest match. Whitespace and line
/// breaks separate tokens and are not emitted; indentation is not tracked.
pub fn tokenize(snippet: &str) -> Result<TokenSeq, LexError> {
    let tokens = Lexer {
        src: snippet,
        pos: 0,
        out: Vec::new(),
    }
    .run()?;
    Ok(TokenSeq {
        tokens,
        normalized: false,
        var_map: Default::default(),
    })
}

fn no_space_before(t: &str) -> bool {
    matches!(t, ")" | "]" | "}" | "," | "." | ":")
}

fn no_space_after(t: &str) -> bool {
    matches!(t, "(" | "[" | "{" | ".")
}

/// Whether appending `right` without a space to the unspaced `run` still
/// lexes as `run` followed by `right`. Longest-match operators can reach
/// back across several tokens (`. . .` vs `...`), so the whole run is checked.
fn glues_safely(run: &[&str], right: &str) -> bool {
    let joined = format!("{}{right}", run.concat());
    match tokenize(&joined) {
        Ok(seq) => {
            seq.tokens.len() == run.len() + 1
                && seq.tokens.iter().zip(run.iter().chain([&right])).all(|(a, b)| a.text == *b)
        }
        Err(_) => false,
    }
}

/// Joins tokens with single spaces, except no space before `) ] } , . :`
/// and none after `( [ { .`. A space is kept anyway when dropping it would
/// change how the output re-lexes (`.` then `5`, or three `.` in a row).
pub fn detokenize(seq: &TokenSeq) -> String {
    let mut out = String::new();
    let mut run: Vec<&str> = Vec::new();
    for tok in &seq.tokens {
        let t = tok.text.as_str();
        if let Some(&p) = run.last() {
            let tight = no_space_before(t) || no_space_after(p);
            if !(tight && glues_safely(&run, t)) {
                out.push(' ');
                run.clear();
            }
        }
        out.push_str(t);
        run.push(t);
    }
    out
}
