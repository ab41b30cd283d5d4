use super::{ApiWhitelist, Token, TokenKind, TokenSeq, VAR_NAME};

pub const KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

/// Builtins that are never normalised regardless of the whitelist.
pub const BUILTINS: [&str; 22] = [
    "len", "print", "range", "str", "int", "list", "dict", "set", "tuple", "open", "enumerate",
    "zip", "map", "filter", "sorted", "type", "isinstance", "sum", "min", "max", "abs", "input",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Also replace string and number literals by `<VAR_NAME>`.
    pub normalize_literals: bool,
}

/// Replaces every identifier that is not a keyword, builtin or whitelisted
/// name with `<VAR_NAME>`. Non-identifier tokens are left untouched.
pub fn normalize(seq: &TokenSeq, whitelist: &ApiWhitelist) -> TokenSeq {
    normalize_with(seq, whitelist, NormalizeOptions::default())
}

pub fn normalize_with(seq: &TokenSeq, whitelist: &ApiWhitelist, opts: NormalizeOptions) -> TokenSeq {
    if seq.normalized {
        return seq.clone();
    }
    let mut var_map = seq.var_map.clone();
    let tokens = seq
        .tokens
        .iter()
        .map(|tok| match tok.kind {
            TokenKind::Identifier
                if !(BUILTINS.contains(&tok.text.as_str()) || whitelist.contains(&tok.text)) =>
            {
                var_map.insert(tok.text.clone(), VAR_NAME.to_string());
                Token::new(VAR_NAME, TokenKind::Special)
            }
            TokenKind::StringLiteral | TokenKind::Number if opts.normalize_literals => {
                Token::new(VAR_NAME, TokenKind::Special)
            }
            _ => tok.clone(),
        })
        .collect();
    TokenSeq {
        tokens,
        normalized: true,
        var_map,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codelex::tokenize;

    fn numpy_whitelist() -> ApiWhitelist {
        ApiWhitelist::parse("numpy: fromfunction array shape\nnp\n").unwrap()
    }

    #[test]
    fn fromfunction_call_normalisation() {
        let seq = tokenize("np.fromfunction(f, shape=(d1, d2))").unwrap();
        let n = normalize(&seq, &numpy_whitelist());
        assert!(n.normalized);
        assert_eq!(
            n.texts(),
            ["np", ".", "fromfunction", "(", "<VAR_NAME>", ",", "shape", "=", "(", "<VAR_NAME>",
             ",", "<VAR_NAME>", ")", ")"]
        );
        let keys: Vec<_> = n.var_map.keys().map(String::as_str).collect();
        assert_eq!(keys, ["d1", "d2", "f"]);
    }

    #[test]
    fn keywords_and_builtins_survive() {
        let empty = ApiWhitelist::default();
        let n = normalize(&tokenize("if x in y").unwrap(), &empty);
        assert_eq!(n.texts(), ["if", "<VAR_NAME>", "in", "<VAR_NAME>"]);
        let n = normalize(&tokenize("len(v)").unwrap(), &empty);
        assert_eq!(n.texts(), ["len", "(", "<VAR_NAME>", ")"]);
    }

    #[test]
    fn idempotent_and_length_preserving() {
        let seq = tokenize("a = sorted(b, key=lambda t: t[1])").unwrap();
        let once = normalize(&seq, &numpy_whitelist());
        let twice = normalize(&once, &numpy_whitelist());
        assert_eq!(once, twice);
        assert_eq!(once.len(), seq.len());
    }

    #[test]
    fn literal_flag() {
        let seq = tokenize("x = 'a' + 1").unwrap();
        let off = normalize(&seq, &ApiWhitelist::default());
        assert_eq!(off.texts(), ["<VAR_NAME>", "=", "'a'", "+", "1"]);
        let on = normalize_with(
            &seq,
            &ApiWhitelist::default(),
            NormalizeOptions { normalize_literals: true },
        );
        assert_eq!(on.texts(), ["<VAR_NAME>", "=", "<VAR_NAME>", "+", "<VAR_NAME>"]);
        assert_eq!(on.var_map.len(), 1);
    }
}
