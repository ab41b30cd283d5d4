//! Mining API and data-type names for the identifier whitelist.
//!
//! Two frequency routes feed [`build_whitelist`]: stemmed words from cleaned
//! intents, and root module names from `import` lines in a development
//! corpus.

mod porter;
mod stopwords;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

pub use porter::porter_stem;
pub use stopwords::{default_stopwords, STOPWORDS};

use crate::codelex::ApiWhitelist;
use crate::embed::csv_field;

/// Default number of names kept from each route and in the whitelist.
pub const DEFAULT_TOP_K: usize = 40;

const COUNT_SHARD: usize = 512;

/// Token counts with a canonical order: count descending, then token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: Vec<(String, u64)>,
    total: u64,
}

impl FrequencyTable {
    pub fn from_counts<I: IntoIterator<Item = (String, u64)>>(counts: I) -> Self {
        let mut merged: BTreeMap<String, u64> = BTreeMap::new();
        for (t, c) in counts {
            *merged.entry(t).or_insert(0) += c;
        }
        let mut entries: Vec<(String, u64)> = merged.into_iter().filter(|(_, c)| *c > 0).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total = entries.iter().map(|e| e.1).sum();
        FrequencyTable { entries, total }
    }

    /// The `k` highest entries; `total` is recomputed over what is kept.
    pub fn top(&self, k: usize) -> FrequencyTable {
        let entries: Vec<_> = self.entries.iter().take(k).cloned().collect();
        let total = entries.iter().map(|e| e.1).sum();
        FrequencyTable { entries, total }
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> u64 {
        self.entries.iter().find(|e| e.0 == token).map_or(0, |e| e.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("token,count\n");
        for (t, c) in &self.entries {
            out.push_str(&format!("{},{c}\n", csv_field(t)));
        }
        out
    }
}

fn sharded_count<T, F>(items: &[T], each: F) -> HashMap<String, u64>
where
    T: Sync,
    F: Fn(&T, &mut dyn FnMut(String)) + Sync + Send,
{
    crate::par::map_reduce_chunks(
        items,
        COUNT_SHARD,
        HashMap::new,
        |acc: &mut HashMap<String, u64>, item| each(item, &mut |t| *acc.entry(t).or_insert(0) += 1),
        |acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0) += v;
            }
        },
    )
    .unwrap_or_default()
}

/// Whitespace-splits cleaned intents, drops stopwords, Porter-stems plain
/// words and counts dotted names (`np.fromfunction`) verbatim. Trailing
/// sentence dots are trimmed first.
pub fn mine_intent_apis<S: AsRef<str> + Sync>(intents: &[S], stopwords: &BTreeSet<String>, k: usize) -> FrequencyTable {
    let counts = sharded_count(intents, |intent, emit| {
        for raw in intent.as_ref().split_whitespace() {
            let word = raw.trim_matches(|c: char| c == '.' || c == '\'' || c == '(' || c == ')');
            if word.is_empty() || stopwords.contains(word) {
                continue;
            }
            if word.contains('.') {
                emit(word.to_string());
            } else {
                emit(porter_stem(word));
            }
        }
    });
    FrequencyTable::from_counts(counts).top(k)
}

/// Root module names of the modules in one import line, if it is one.
pub fn import_roots(line: &str) -> Vec<String> {
    let line = line.trim();
    let root = |name: &str| name.split('.').next().unwrap_or_default().trim().to_string();
    let valid = |s: &String| !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
    if let Some(rest) = line.strip_prefix("import ") {
        let rest = rest.split('#').next().unwrap_or_default();
        rest.split(',')
            .map(|part| root(part.split_whitespace().next().unwrap_or_default()))
            .filter(valid)
            .collect()
    } else if let Some(rest) = line.strip_prefix("from ") {
        let mut words = rest.split_whitespace();
        let module = words.next().unwrap_or_default();
        if words.next() != Some("import") || module.starts_with('.') {
            return Vec::new();
        }
        Some(root(module)).into_iter().filter(valid).collect()
    } else {
        Vec::new()
    }
}

/// Counts root modules of `import X[, Y]` and `from X import ..` lines.
pub fn extract_imports<S: AsRef<str> + Sync>(sources: &[S], k: usize) -> FrequencyTable {
    let counts = sharded_count(sources, |src, emit| {
        for line in src.as_ref().lines() {
            for r in import_roots(line) {
                emit(r);
            }
        }
    });
    FrequencyTable::from_counts(counts).top(k)
}

#[derive(Clone, Debug, Default)]
pub struct ImportScan {
    pub table: FrequencyTable,
    pub files_read: usize,
    pub skipped: Vec<PathBuf>,
}

/// Reads `.py` files (recursively for directories) and counts their
/// imports. Unreadable files are skipped and reported.
pub fn extract_imports_from_paths(paths: &[PathBuf], k: usize) -> ImportScan {
    let mut files = Vec::new();
    for p in paths {
        collect_files(p, &mut files);
    }
    files.sort();
    let mut sources = Vec::new();
    let mut skipped = Vec::new();
    for f in files {
        match std::fs::read_to_string(&f) {
            Ok(s) => sources.push(s),
            Err(e) => {
                log::warn!("skipping {}: {e}", f.display());
                skipped.push(f);
            }
        }
    }
    ImportScan {
        table: extract_imports(&sources, k),
        files_read: sources.len(),
        skipped,
    }
}

fn collect_files(p: &Path, out: &mut Vec<PathBuf>) {
    match std::fs::read_dir(p) {
        Ok(entries) => {
            for e in entries.flatten() {
                let path = e.path();
                if path.is_dir() || path.extension().is_some_and(|x| x == "py") {
                    collect_files(&path, out);
                }
            }
        }
        Err(_) => out.push(p.to_path_buf()),
    }
}

/// Ranks names found in both tables first (an import name matches an
/// intent entry by itself or by its stem), then the rest by combined count,
/// ties by name; keeps `k` libraries and attaches members from `member_db`.
pub fn build_whitelist(
    intent_table: &FrequencyTable,
    import_table: &FrequencyTable,
    member_db: &BTreeMap<String, BTreeSet<String>>,
    k: usize,
) -> ApiWhitelist {
    let intent_top = intent_table.top(k);
    let import_top = import_table.top(k);
    // name -> (in both, combined count)
    let mut cand: BTreeMap<String, (bool, u64)> = BTreeMap::new();
    let mut matched_intent: BTreeSet<&str> = BTreeSet::new();
    for (name, c) in import_top.entries() {
        let stem = porter_stem(name);
        let hit = [name.as_str(), stem.as_str()]
            .into_iter()
            .find_map(|key| intent_top.entries().iter().find(|e| e.0 == key));
        match hit {
            Some((key, ic)) => {
                matched_intent.insert(key);
                cand.insert(name.clone(), (true, c + ic));
            }
            None => {
                cand.insert(name.clone(), (false, *c));
            }
        }
    }
    for (name, c) in intent_top.entries() {
        if !matched_intent.contains(name.as_str()) {
            let e = cand.entry(name.clone()).or_insert((false, 0));
            e.1 += c;
        }
    }
    let mut ranked: Vec<(String, bool, u64)> = cand.into_iter().map(|(n, (b, c))| (n, b, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);

    let libs: Vec<String> = ranked.into_iter().map(|r| r.0).collect();
    let mut members = BTreeMap::new();
    for lib in &libs {
        match member_db.get(lib) {
            Some(m) => {
                members.insert(lib.clone(), m.clone());
            }
            None => log::warn!("no member list for library {lib}"),
        }
    }
    ApiWhitelist::new(libs, members)
}
