//! Fact-file ingestion.
//!
//! The native format is UTF-8 TSV, one fact per line:
//!
//! ```text
//! subject<TAB>property<TAB>object<TAB>start<TAB>end
//! ```
//!
//! Plain facts carry `-` in both time columns; an object beginning with `"`
//! is a literal (the quote is a marker, not part of the value). Time fields
//! are `YYYY`, `YYYY-MM`, `YYYY-MM-DD`, or `-` for absent, with an optional
//! `-` year prefix for years before year 1. A JSONL alternative with keys
//! `s`, `p`, `o`, `ts`, `te` is accepted (`null`, `"-"`, or a missing key
//! means an absent endpoint; the leading-quote literal convention applies to
//! `o`).
//!
//! Malformed lines are counted and reported rather than fatal; under
//! `strict` the whole ingest fails once their fraction exceeds the
//! configured bound. Facts whose interval cannot satisfy start <= end are
//! always rejected with a line-level diagnostic.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{AddOutcome, KgStore, ObjectRef, StoreBuilder};
use crate::time::TimeInterval;

const MAX_DIAGNOSTICS: usize = 100;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{malformed} of {lines} lines malformed exceeds the strict-mode bound")]
    TooManyMalformed { malformed: u64, lines: u64 },
}

/// Input format of a fact file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Tsv,
    Jsonl,
}

impl InputFormat {
    /// `.jsonl` / `.json` files parse as JSONL, everything else as TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => InputFormat::Jsonl,
            _ => InputFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Property whose plain facts define entity classes, e.g. `instance_of`.
    pub class_property: Option<String>,
    /// Fail the ingest when malformed lines exceed `max_malformed_fraction`.
    pub strict: bool,
    /// Tolerated fraction of malformed lines in strict mode.
    pub max_malformed_fraction: f64,
    /// When set, only facts whose property is listed (or is the class
    /// property) are kept; everything else counts as filtered.
    pub property_allowlist: Option<BTreeSet<String>>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            class_property: None,
            strict: false,
            max_malformed_fraction: 0.0,
            property_allowlist: None,
        }
    }
}

/// Counters and capped diagnostics from one ingest run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestReport {
    pub lines: u64,
    pub temporal_facts: u64,
    pub plain_facts: u64,
    pub duplicates: u64,
    pub malformed: u64,
    pub rejected_intervals: u64,
    pub filtered: u64,
    pub diagnostics: Vec<String>,
}

impl IngestReport {
    fn diagnose(&mut self, line_no: u64, msg: &str) {
        if self.diagnostics.len() < MAX_DIAGNOSTICS {
            self.diagnostics.push(format!("line {line_no}: {msg}"));
        } else if self.diagnostics.len() == MAX_DIAGNOSTICS {
            self.diagnostics.push("further diagnostics suppressed".to_string());
        }
    }
}

#[derive(Debug, Deserialize)]
struct JsonFact {
    s: String,
    p: String,
    o: String,
    #[serde(default)]
    ts: Option<String>,
    #[serde(default)]
    te: Option<String>,
}

struct RawFact<'a> {
    subject: &'a str,
    property: &'a str,
    object: ObjectRef<'a>,
    /// `None` for plain facts.
    interval: Option<TimeInterval>,
}

fn split_object(token: &str) -> ObjectRef<'_> {
    match token.strip_prefix('"') {
        Some(lit) => ObjectRef::Literal(lit),
        None => ObjectRef::Resource(token),
    }
}

fn parse_tsv_line(line: &str) -> Result<RawFact<'_>, String> {
    let mut cols = line.split('\t');
    let subject = cols.next().unwrap_or("");
    let property = cols.next().ok_or("expected 5 tab-separated columns")?;
    let object = cols.next().ok_or("expected 5 tab-separated columns")?;
    let ts = cols.next().ok_or("expected 5 tab-separated columns")?;
    let te = cols.next().ok_or("expected 5 tab-separated columns")?;
    if cols.next().is_some() {
        return Err("expected 5 tab-separated columns".to_string());
    }
    if subject.is_empty() || property.is_empty() || object.is_empty() {
        return Err("empty subject, property, or object".to_string());
    }
    let interval = if ts == "-" && te == "-" {
        None
    } else {
        Some(TimeInterval::parse_fields(ts, te).map_err(|e| e.to_string())?)
    };
    Ok(RawFact { subject, property, object: split_object(object), interval })
}

fn parse_jsonl_line(line: &str) -> Result<JsonFact, String> {
    serde_json::from_str::<JsonFact>(line).map_err(|e| e.to_string())
}

fn json_time(field: &Option<String>) -> &str {
    match field {
        Some(v) => v.as_str(),
        None => "-",
    }
}

/// Ingest a fact file into a fully indexed store.
pub fn ingest_path(path: &Path, cfg: &IngestConfig) -> Result<(KgStore, IngestReport), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(BufReader::new(file), InputFormat::from_path(path), cfg)
}

/// Ingest from any buffered reader.
pub fn ingest_reader<R: BufRead>(
    reader: R,
    format: InputFormat,
    cfg: &IngestConfig,
) -> Result<(KgStore, IngestReport), IngestError> {
    let mut builder = StoreBuilder::new();
    if let Some(cp) = &cfg.class_property {
        builder = builder.with_class_property(cp);
    }
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|source| IngestError::Io {
            path: format!("<line {line_no}>"),
            source,
        })?;
        if line.is_empty() {
            continue;
        }
        report.lines += 1;

        let owned_json;
        let raw = match format {
            InputFormat::Tsv => parse_tsv_line(&line),
            InputFormat::Jsonl => match parse_jsonl_line(&line) {
                Ok(j) => {
                    owned_json = j;
                    let ts = json_time(&owned_json.ts);
                    let te = json_time(&owned_json.te);
                    if owned_json.s.is_empty() || owned_json.p.is_empty() || owned_json.o.is_empty()
                    {
                        Err("empty subject, property, or object".to_string())
                    } else if ts == "-" && te == "-" {
                        Ok(RawFact {
                            subject: &owned_json.s,
                            property: &owned_json.p,
                            object: split_object(&owned_json.o),
                            interval: None,
                        })
                    } else {
                        match TimeInterval::parse_fields(ts, te) {
                            Ok(iv) => Ok(RawFact {
                                subject: &owned_json.s,
                                property: &owned_json.p,
                                object: split_object(&owned_json.o),
                                interval: Some(iv),
                            }),
                            Err(e) => Err(e.to_string()),
                        }
                    }
                }
                Err(e) => Err(e),
            },
        };

        let raw = match raw {
            Ok(r) => r,
            Err(msg) => {
                report.malformed += 1;
                report.diagnose(line_no, &msg);
                continue;
            }
        };

        if let Some(allow) = &cfg.property_allowlist {
            let is_class_prop = cfg.class_property.as_deref() == Some(raw.property);
            if !is_class_prop && !allow.contains(raw.property) {
                report.filtered += 1;
                continue;
            }
        }

        match raw.interval {
            Some(interval) => match builder.add_temporal(raw.subject, raw.property, raw.object, interval) {
                Ok(AddOutcome::Added) => report.temporal_facts += 1,
                Ok(AddOutcome::Duplicate) => report.duplicates += 1,
                Err(e) => {
                    report.rejected_intervals += 1;
                    report.diagnose(line_no, &e.to_string());
                }
            },
            None => match builder.add_plain(raw.subject, raw.property, raw.object) {
                AddOutcome::Added => report.plain_facts += 1,
                AddOutcome::Duplicate => report.duplicates += 1,
            },
        }
    }

    if cfg.strict
        && report.lines > 0
        && (report.malformed as f64) > cfg.max_malformed_fraction * report.lines as f64
    {
        return Err(IngestError::TooManyMalformed {
            malformed: report.malformed,
            lines: report.lines,
        });
    }

    Ok((builder.build(), report))
}
