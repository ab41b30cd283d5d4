/// Removes `? ! , : " -`, lowercases, collapses whitespace and trims.
/// Dots and apostrophes are kept.
pub fn clean_intent(raw: &str) -> String {
    let stripped: String = raw
        .chars()
        .filter(|c| !matches!(c, '?' | '!' | ',' | ':' | '"' | '-'))
        .collect();
    stripped
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Index just past the closing quote of the literal opening at `i`, or
/// `None` if it never closes.
fn string_end(chars: &[char], i: usize, triple: bool) -> Option<usize> {
    let q = chars[i];
    let mut j = i + if triple { 3 } else { 1 };
    while j < chars.len() {
        let c = chars[j];
        if c == '\\' {
            j += 2;
            continue;
        }
        if triple {
            if c == q && j + 2 < chars.len() && chars[j + 1] == q && chars[j + 2] == q {
                return Some(j + 3);
            }
        } else if c == q {
            return Some(j + 1);
        } else if c == '\n' {
            return None;
        }
        j += 1;
    }
    None
}

fn rest_of_line_is_blank(chars: &[char], from: usize) -> bool {
    for &c in &chars[from..] {
        match c {
            '\n' => return true,
            '#' => return true,
            c if c.is_whitespace() => continue,
            _ => return false,
        }
    }
    true
}

/// Drops standalone triple-quoted blocks and `#` comments, leaving string
/// literals intact. An unterminated literal stops the scan and the rest is
/// copied verbatim.
fn strip_comments(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut line_start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\'' | '"' => {
                let triple = i + 2 < chars.len() && chars[i + 1] == c && chars[i + 2] == c;
                match string_end(&chars, i, triple) {
                    None => {
                        out.extend(&chars[i..]);
                        break;
                    }
                    Some(end) => {
                        let standalone = triple
                            && out[line_start..].trim().is_empty()
                            && rest_of_line_is_blank(&chars, end);
                        if !standalone {
                            out.extend(&chars[i..end]);
                        }
                        i = end;
                    }
                }
            }
            '\n' => {
                out.push(c);
                line_start = out.len();
                i += 1;
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Strips leading prompt markers; `None` when the line carries none.
fn strip_markers(line: &str, continuation_allowed: bool) -> Option<&str> {
    let mut rest = line.trim_start();
    let mut marked = false;
    loop {
        let marker = if rest.starts_with(">>>") {
            ">>>"
        } else if continuation_allowed && rest.starts_with("...") {
            "..."
        } else {
            break;
        };
        let after = &rest[marker.len()..];
        if !(after.is_empty() || after.starts_with(' ') || after.starts_with('\t')) {
            break;
        }
        marked = true;
        rest = after.strip_prefix(' ').unwrap_or(after);
    }
    marked.then_some(rest)
}

fn strip_prompts(s: &str) -> String {
    let has_prompt = s.lines().any(|l| strip_markers(l, false).is_some());
    if !has_prompt {
        return s.to_string();
    }
    s.lines()
        .filter_map(|l| strip_markers(l, true))
        .filter(|l| !l.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn tidy_lines(s: &str) -> String {
    s.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn clean_once(raw: &str) -> String {
    tidy_lines(&strip_prompts(&strip_comments(raw)))
}

/// Removes triple-quoted block comments, `#` comments, interpreter prompts
/// (with their echoed output lines), trailing whitespace and blank lines.
///
/// `...` counts as a continuation marker only when the snippet also has a
/// `>>>` line, so an Ellipsis statement in ordinary code is left alone.
/// The passes repeat until nothing changes, which makes the function
/// idempotent.
pub fn clean_snippet(raw: &str) -> String {
    let mut cur = clean_once(raw);
    for _ in 0..16 {
        let next = clean_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}
