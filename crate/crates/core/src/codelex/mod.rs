//! Lexing of short Python snippets and `<VAR_NAME>` normalisation.

mod lexer;
mod normalize;
mod whitelist;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use lexer::{detokenize, tokenize, LexError, LexErrorKind};
pub use normalize::{normalize, normalize_with, NormalizeOptions, BUILTINS, KEYWORDS};
pub use whitelist::ApiWhitelist;

pub const VAR_NAME: &str = "<VAR_NAME>";
pub const PAD: &str = "<PAD>";
pub const UNK: &str = "<UNK>";
pub const START: &str = "<START>";
pub const END: &str = "<END>";

/// Spellings lexed as [`TokenKind::Special`].
pub const SPECIAL_TOKENS: [&str; 5] = [VAR_NAME, PAD, UNK, START, END];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    StringLiteral,
    Operator,
    Punctuation,
    Special,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind) -> Self {
        Token {
            text: text.into(),
            kind,
        }
    }
}

/// Ordered tokens of one snippet, optionally normalised.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub tokens: Vec<Token>,
    pub normalized: bool,
    /// Original identifier → replacement, for every identifier replaced.
    pub var_map: BTreeMap<String, String>,
}

impl TokenSeq {
    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn into_texts(self) -> Vec<String> {
        self.tokens.into_iter().map(|t| t.text).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token dump as a JSON array of `{text, kind}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.tokens).expect("tokens serialise")
    }
}

/// Lex and normalise in one go; the batch form runs in parallel.
pub fn lex_and_normalize(snippet: &str, whitelist: &ApiWhitelist) -> Result<TokenSeq, LexError> {
    Ok(normalize(&tokenize(snippet)?, whitelist))
}

pub fn lex_batch(snippets: &[String], whitelist: &ApiWhitelist) -> Vec<Result<TokenSeq, LexError>> {
    crate::par::map(snippets, |s| lex_and_normalize(s, whitelist))
}
