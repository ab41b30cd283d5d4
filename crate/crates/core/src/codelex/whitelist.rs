use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::{Error, Result};

/// Library names with their public members. The file format is one record
/// per line, `library: member1 member2 ...`, or a bare `library`. Blank
/// lines and lines starting with `#` are ignored. Lookups are case-sensitive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApiWhitelist {
    libraries: Vec<String>,
    members: BTreeMap<String, BTreeSet<String>>,
    flat: BTreeSet<String>,
}

impl ApiWhitelist {
    /// Builds a whitelist keeping `libraries` in the given order.
    pub fn new<I, S>(libraries: I, members: BTreeMap<String, BTreeSet<String>>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut wl = ApiWhitelist::default();
        for lib in libraries {
            wl.add_library(lib.into());
        }
        for (lib, names) in members {
            wl.add_library(lib.clone());
            for m in names {
                wl.add_member(&lib, m);
            }
        }
        wl
    }

    fn add_library(&mut self, lib: String) {
        if !self.members.contains_key(&lib) {
            self.libraries.push(lib.clone());
            self.members.insert(lib.clone(), BTreeSet::new());
            self.flat.insert(lib);
        }
    }

    fn add_member(&mut self, lib: &str, member: String) {
        self.flat.insert(member.clone());
        self.members.get_mut(lib).expect("library added").insert(member);
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut wl = ApiWhitelist::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lib, rest) = match line.split_once(':') {
                Some((l, r)) => (l.trim(), r),
                None => (line, ""),
            };
            if lib.is_empty() || lib.contains(char::is_whitespace) {
                return Err(Error::Format(format!(
                    "whitelist line {}: bad library name {lib:?}",
                    no + 1
                )));
            }
            wl.add_library(lib.to_string());
            for m in rest.split_whitespace() {
                wl.add_member(lib, m.to_string());
            }
        }
        Ok(wl)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for lib in &self.libraries {
            let members = &self.members[lib];
            if members.is_empty() {
                out.push_str(lib);
            } else {
                out.push_str(lib);
                out.push(':');
                for m in members {
                    out.push(' ');
                    out.push_str(m);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        self.flat.contains(name)
    }

    pub fn libraries(&self) -> &[String] {
        &self.libraries
    }

    pub fn members(&self, lib: &str) -> Option<&BTreeSet<String>> {
        self.members.get(lib)
    }

    pub fn member_db(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.members
    }

    pub fn flat(&self) -> &BTreeSet<String> {
        &self.flat
    }

    pub fn is_empty(&self) -> bool {
        self.libraries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let wl = ApiWhitelist::parse("# comment\nnumpy: array fromfunction\n\nos\nnumpy: zeros\n").unwrap();
        assert_eq!(wl.libraries(), ["numpy", "os"]);
        assert!(wl.contains("zeros") && wl.contains("os") && !wl.contains("Numpy"));
        assert_eq!(wl.render(), "numpy: array fromfunction zeros\nos\n");
        assert_eq!(ApiWhitelist::parse(&wl.render()).unwrap(), wl);
        assert!(ApiWhitelist::parse("bad name: x").is_err());
    }

    #[test]
    fn flat_is_union() {
        let wl = ApiWhitelist::parse("a: x y\nb: y z\nc").unwrap();
        let flat: Vec<_> = wl.flat().iter().map(String::as_str).collect();
        assert_eq!(flat, ["a", "b", "c", "x", "y", "z"]);
    }
}
