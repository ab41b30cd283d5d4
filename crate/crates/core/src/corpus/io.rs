use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Sample, Source};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Tsv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(InputFormat::Jsonl),
            "tsv" => Ok(InputFormat::Tsv),
            other => Err(Error::InvalidArgument(format!("unknown input format {other:?}"))),
        }
    }
}

/// A record that did not make it through some stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    pub stage: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet: Option<String>,
}

impl Reject {
    pub fn for_sample(stage: &str, reason: impl Into<String>, s: &Sample) -> Self {
        Reject {
            stage: stage.into(),
            reason: reason.into(),
            line: None,
            question_id: Some(s.question_id),
            intent: Some(s.intent.clone()),
            snippet: Some(s.snippet.clone()),
        }
    }

    fn for_line(line: usize, reason: impl Into<String>) -> Self {
        Reject {
            stage: "load".into(),
            reason: reason.into(),
            line: Some(line),
            question_id: None,
            intent: None,
            snippet: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadOutcome {
    pub samples: Vec<Sample>,
    pub rejects: Vec<Reject>,
}

fn sample_from_fields(
    qid: Option<&Value>,
    intent: Option<&Value>,
    snippet: Option<&Value>,
    prob: Option<&Value>,
    source: Option<&Value>,
    default_source: Source,
) -> std::result::Result<Sample, String> {
    let qid = qid
        .ok_or("missing question_id")?
        .as_u64()
        .ok_or("question_id is not a non-negative integer")?;
    let intent = intent
        .ok_or("missing intent")?
        .as_str()
        .ok_or("intent is not a string")?;
    let snippet = snippet
        .ok_or("missing snippet")?
        .as_str()
        .ok_or("snippet is not a string")?;
    let source = match source {
        None | Some(Value::Null) => default_source,
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| format!("bad source {v}"))?,
    };
    let prob = match prob {
        None | Some(Value::Null) => None,
        Some(v) => {
            let p = v.as_f64().ok_or("prob is not a number")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("prob {p} outside [0,1]"));
            }
            Some(p)
        }
    };
    let prob = match (source, prob) {
        (Source::Mined, None) => return Err("mined record without prob".into()),
        (Source::Mined, p) => p,
        (_, _) => None,
    };
    Ok(Sample {
        question_id: qid,
        intent: intent.to_string(),
        snippet: snippet.to_string(),
        prob,
        source,
        label: None,
        snippet_question_id: None,
    })
}

fn unescape_tsv(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some('\\') => out.push('\\'),
                Some(o) => {
                    out.push('\\');
                    out.push(o);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Reads samples in file order. Malformed records are collected as rejects
/// instead of failing the load. A record's own `source` field wins over
/// `default_source`; `prob` is kept only for mined records, which must have one.
///
/// TSV files need a header naming at least `question_id`, `intent` and
/// `snippet`; fields use `\n`, `\t`, `\r` and `\\` escapes.
pub fn load_samples(path: &Path, format: InputFormat, default_source: Source) -> Result<LoadOutcome> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = LoadOutcome::default();
    let mut header: Option<Vec<String>> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = match format {
            InputFormat::Jsonl => match serde_json::from_str::<Value>(&line) {
                Ok(Value::Object(map)) => sample_from_fields(
                    map.get("question_id"),
                    map.get("intent"),
                    map.get("snippet"),
                    map.get("prob"),
                    map.get("source"),
                    default_source,
                ),
                Ok(_) => Err("record is not a JSON object".into()),
                Err(e) => Err(format!("invalid JSON: {e}")),
            },
            InputFormat::Tsv => {
                let fields: Vec<&str> = line.split('\t').collect();
                let Some(cols) = &header else {
                    header = Some(fields.iter().map(|s| s.trim().to_string()).collect());
                    continue;
                };
                if fields.len() != cols.len() {
                    Err(format!("expected {} columns, got {}", cols.len(), fields.len()))
                } else {
                    let get = |name: &str| -> Option<Value> {
                        let i = cols.iter().position(|c| c == name)?;
                        let raw = unescape_tsv(fields[i]);
                        match name {
                            "question_id" => Some(
                                raw.trim()
                                    .parse::<u64>()
                                    .map(Value::from)
                                    .unwrap_or(Value::String(raw)),
                            ),
                            "prob" if raw.trim().is_empty() => None,
                            "prob" => Some(
                                raw.trim()
                                    .parse::<f64>()
                                    .map(Value::from)
                                    .unwrap_or(Value::String(raw)),
                            ),
                            "source" if raw.trim().is_empty() => None,
                            _ => Some(Value::String(raw)),
                        }
                    };
                    sample_from_fields(
                        get("question_id").as_ref(),
                        get("intent").as_ref(),
                        get("snippet").as_ref(),
                        get("prob").as_ref(),
                        get("source").as_ref(),
                        default_source,
                    )
                }
            }
        };
        match parsed {
            Ok(s) => out.samples.push(s),
            Err(reason) => out.rejects.push(Reject::for_line(line_no, reason)),
        }
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Writes any serialisable value as pretty JSON.
pub fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
