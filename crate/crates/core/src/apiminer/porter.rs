//! The original Porter (1980) suffix-stripping algorithm, steps 1a to 5b.

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `w` (the measure m of `[C](VC)^m[V]`).
fn measure(w: &[u8]) -> usize {
    let n = w.len();
    let mut i = 0;
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    let mut m = 0;
    loop {
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i >= n {
            return m;
        }
        while i < n && is_consonant(w, i) {
            i += 1;
        }
        m += 1;
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: ends consonant-vowel-consonant, the last not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

struct Word(Vec<u8>);

impl Word {
    fn ends(&self, s: &str) -> bool {
        self.0.ends_with(s.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.0.len() - suffix.len()
    }

    fn stem(&self, suffix: &str) -> &[u8] {
        &self.0[..self.stem_len(suffix)]
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let k = self.stem_len(suffix);
        self.0.truncate(k);
        self.0.extend_from_slice(with.as_bytes());
    }

    /// Applies the first rule whose suffix matches, if the stem measure
    /// exceeds `min_m`. Returns whether a suffix matched at all.
    fn rules(&mut self, rules: &[(&str, &str)], min_m: usize) -> bool {
        for (suf, rep) in rules {
            if self.ends(suf) {
                if measure(self.stem(suf)) > min_m {
                    self.replace(suf, rep);
                }
                return true;
            }
        }
        false
    }
}

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

const STEP4: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou", "ism", "ate",
    "iti", "ous", "ive", "ize",
];

/// Stems a lower-case ASCII word. Words of one or two letters and words
/// with non-ASCII-letter characters are returned unchanged.
pub fn porter_stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = Word(word.as_bytes().to_vec());
    step1a(&mut w);
    step1b(&mut w);
    if w.ends("y") && has_vowel(w.stem("y")) {
        w.replace("y", "i");
    }
    // Step 2 and 3 rules are tried longest-first within a shared ending, but
    // the classic table has no overlapping suffixes except those ordered above.
    w.rules(STEP2, 0);
    w.rules(STEP3, 0);
    step4(&mut w);
    step5(&mut w);
    String::from_utf8(w.0).expect("ascii")
}

fn step1a(w: &mut Word) {
    if w.ends("sses") {
        w.replace("sses", "ss");
    } else if w.ends("ies") {
        w.replace("ies", "i");
    } else if w.ends("ss") {
    } else if w.ends("s") {
        w.replace("s", "");
    }
}

fn step1b(w: &mut Word) {
    if w.ends("eed") {
        if measure(w.stem("eed")) > 0 {
            w.replace("eed", "ee");
        }
        return;
    }
    let suffix = ["ed", "ing"].into_iter().find(|s| w.ends(s) && has_vowel(w.stem(s)));
    let Some(s) = suffix else { return };
    w.replace(s, "");
    if w.ends("at") || w.ends("bl") || w.ends("iz") {
        w.0.push(b'e');
    } else if ends_double_consonant(&w.0) && !matches!(w.0.last(), Some(b'l' | b's' | b'z')) {
        w.0.pop();
    } else if measure(&w.0) == 1 && ends_cvc(&w.0) {
        w.0.push(b'e');
    }
}

fn step4(w: &mut Word) {
    for suf in STEP4 {
        if w.ends(suf) {
            let stem = w.stem(suf);
            let ok = measure(stem) > 1
                && (*suf != "ion" || matches!(stem.last(), Some(b's' | b't')));
            if ok {
                w.replace(suf, "");
            }
            return;
        }
    }
}

fn step5(w: &mut Word) {
    if w.ends("e") {
        let m = measure(w.stem("e"));
        if m > 1 || (m == 1 && !ends_cvc(w.stem("e"))) {
            w.replace("e", "");
        }
    }
    if measure(&w.0) > 1 && ends_double_consonant(&w.0) && w.ends("l") {
        w.0.pop();
    }
}
