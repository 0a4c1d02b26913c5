//! Access-log ingest: Common Log Format parsing, cleaning, normalization,
//! the unsafe-character filter and deduplication.
//!
//! Query text is handled as Latin-1: every decoded octet maps to the char
//! with the same code point, so octets 128-255 survive decoding and are
//! caught by [`char_filter`].

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    /// SVM target: malicious is the positive class.
    pub fn sign(self) -> f64 {
        match self {
            Label::Benign => -1.0,
            Label::Malicious => 1.0,
        }
    }

    pub fn from_decision(f: f64) -> Label {
        // ties go to the negative class
        if f > 0.0 {
            Label::Malicious
        } else {
            Label::Benign
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackClass {
    #[serde(rename = "SQLI")]
    Sqli,
    #[serde(rename = "XSS")]
    Xss,
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "RFI")]
    Rfi,
}

impl AttackClass {
    pub const ALL: [AttackClass; 4] = [AttackClass::Sqli, AttackClass::Xss, AttackClass::Dt, AttackClass::Rfi];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub source_ip: String,
    pub timestamp: String,
    pub method: String,
    pub request_path: String,
    pub query_raw: Option<String>,
    pub protocol: String,
    pub status: u16,
    pub body_size: u64,
    pub referer: Option<String>,
    pub user_agent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawQuery {
    pub text: String,
    pub source_line: usize,
    pub day: u32,
}

/// One record of the shared line-delimited corpus format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedQuery {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_class: Option<AttackClass>,
    pub day: u32,
}

impl NormalizedQuery {
    pub fn unlabeled(text: impl Into<String>, day: u32) -> Self {
        NormalizedQuery { text: text.into(), label: None, attack_class: None, day }
    }

    pub fn labeled(text: impl Into<String>, label: Label, attack_class: Option<AttackClass>, day: u32) -> Self {
        let attack_class = if label == Label::Malicious { attack_class } else { None };
        NormalizedQuery { text: text.into(), label: Some(label), attack_class, day }
    }
}

fn clf_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"^(\S+) (\S+) (\S+) \[([^\]]*)\] "([^"]*)" (\S+) (\S+)(?: "([^"]*)" "([^"]*)")?\s*$"#,
        )
        .expect("static regex")
    })
}

fn dash_to_none(s: Option<regex::Match<'_>>) -> Option<String> {
    s.map(|m| m.as_str()).filter(|s| *s != "-" && !s.is_empty()).map(str::to_owned)
}

/// Parses one Common (or Combined) Log Format record.
pub fn parse_clf_line(line: &str) -> Result<LogEntry> {
    parse_clf_line_at(line, 0)
}

fn parse_clf_line_at(line: &str, lineno: usize) -> Result<LogEntry> {
    let err = |reason: &str| Error::Parse { line: lineno, reason: reason.to_owned() };
    let caps = clf_regex().captures(line).ok_or_else(|| err("not a CLF record"))?;

    let status_text = &caps[6];
    let status: u16 = status_text.parse().map_err(|_| err("non-numeric status"))?;
    if !(100..=599).contains(&status) {
        return Err(err("status out of range"));
    }
    let body_size = match &caps[7] {
        "-" => 0,
        s => s.parse().map_err(|_| err("non-numeric body size"))?,
    };

    let request = &caps[5];
    let mut parts = request.split(' ');
    let method = parts.next().filter(|m| !m.is_empty()).ok_or_else(|| err("empty request"))?;
    let target = parts.next().ok_or_else(|| err("request has no target"))?;
    let protocol = parts.next().unwrap_or("").to_owned();
    let (request_path, query_raw) = match target.split_once('?') {
        Some((path, query)) => (path.to_owned(), Some(query.to_owned()).filter(|q| !q.is_empty())),
        None => (target.to_owned(), None),
    };

    Ok(LogEntry {
        source_ip: caps[1].to_owned(),
        timestamp: caps[4].to_owned(),
        method: method.to_owned(),
        request_path,
        query_raw,
        protocol,
        status,
        body_size,
        referer: dash_to_none(caps.get(8)),
        user_agent: dash_to_none(caps.get(9)),
    })
}

/// Cleaning rules for [`clean`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    pub static_extensions: BTreeSet<String>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        let exts = ["html", "htm", "css", "js", "jpg", "jpeg", "png", "gif", "ico", "txt", "wav", "pdf", "zip"];
        CleanConfig { static_extensions: exts.iter().map(|s| s.to_string()).collect() }
    }
}

impl CleanConfig {
    fn is_static(&self, path: &str) -> bool {
        let last = path.rsplit('/').next().unwrap_or(path);
        match last.rsplit_once('.') {
            Some((_, ext)) => self.static_extensions.contains(&ext.to_ascii_lowercase()),
            None => false,
        }
    }
}

/// Keeps successful, non-static GET requests that carry a query.
pub fn clean(entries: &[(usize, LogEntry)], day: u32, config: &CleanConfig) -> Vec<RawQuery> {
    entries
        .iter()
        .filter(|(_, e)| e.method == "GET" && (200..300).contains(&e.status) && !config.is_static(&e.request_path))
        .filter_map(|(line, e)| {
            e.query_raw.as_ref().map(|q| RawQuery { text: q.clone(), source_line: *line, day })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Query(NormalizedQuery),
    Dropped,
}

const MIN_QUERY_LEN: usize = 4;
const MAX_DECODE_DEPTH: usize = 3;

fn hex_val(c: char) -> Option<u8> {
    c.to_digit(16).map(|d| d as u8)
}

/// One percent-decoding pass. `Err` carries the text when a `%` is not
/// followed by two hex digits.
fn percent_decode_once(text: &str) -> std::result::Result<String, ()> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '%' {
            match (chars.get(i + 1).copied().and_then(hex_val), chars.get(i + 2).copied().and_then(hex_val)) {
                (Some(hi), Some(lo)) => {
                    out.push(char::from(hi * 16 + lo));
                    i += 3;
                }
                _ => return Err(()),
            }
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    Ok(out)
}

fn unescape_once(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(&next) = chars.peek() {
                if ('!'..='~').contains(&next) {
                    out.push(next);
                    chars.next();
                    continue;
                }
            }
        }
        out.push(c);
    }
    out
}

fn latin1(text: &str) -> String {
    // Log lines arrive as UTF-8; re-express multi-byte characters octet by octet.
    if text.is_ascii() {
        return text.to_owned();
    }
    text.bytes().map(char::from).collect()
}

/// Decodes, un-escapes and lowercases a raw query.
///
/// Percent-decoding repeats until the text stops changing or three passes
/// have run. Backslash escapes of printable ASCII are removed until none
/// remain, which makes the transform idempotent on its own output.
pub fn normalize(q: &RawQuery) -> Result<Normalized> {
    let mut text = latin1(&q.text);
    for _ in 0..MAX_DECODE_DEPTH {
        if !text.contains('%') {
            break;
        }
        match percent_decode_once(&text) {
            Ok(decoded) => {
                if decoded == text {
                    break;
                }
                text = decoded;
            }
            Err(()) => return Err(Error::MalformedEncoding { text: text.to_ascii_lowercase() }),
        }
    }
    loop {
        let next = unescape_once(&text);
        if next == text {
            break;
        }
        text = next;
    }
    let text = text.to_ascii_lowercase();
    if text.chars().count() < MIN_QUERY_LEN {
        return Ok(Normalized::Dropped);
    }
    Ok(Normalized::Query(NormalizedQuery::unlabeled(text, q.day)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterVerdict {
    Keep,
    FlagMalicious,
}

/// Characters that may never appear in a well-formed query: control
/// octets, DEL, octets above 127, space and `" # % < >`.
pub fn is_unsafe_char(c: char) -> bool {
    let code = c as u32;
    code <= 32 || code >= 127 || matches!(c, '"' | '#' | '%' | '<' | '>')
}

pub fn char_filter(text: &str) -> FilterVerdict {
    if text.chars().any(is_unsafe_char) {
        FilterVerdict::FlagMalicious
    } else {
        FilterVerdict::Keep
    }
}

/// Collapses exact-text duplicates, keeping first occurrences in order.
pub fn dedupe(qs: Vec<NormalizedQuery>) -> Vec<NormalizedQuery> {
    let mut seen = HashSet::new();
    qs.into_iter().filter(|q| seen.insert(q.text.clone())).collect()
}

/// Counters for one ingest run, mirroring the preprocessing stages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: usize,
    pub parse_errors: usize,
    pub cleaned: usize,
    pub normalized: usize,
    pub flagged: usize,
    pub kept: usize,
}

#[derive(Clone, Debug, Default)]
pub struct IngestOutput {
    /// Deduplicated queries that passed the character filter.
    pub queries: Vec<NormalizedQuery>,
    /// Queries flagged by the character filter, labeled malicious, deduplicated.
    pub flagged: Vec<NormalizedQuery>,
    pub stats: IngestStats,
}

/// Runs parse, clean, normalize, filter and dedupe over a log.
pub fn ingest_log<R: BufRead>(reader: R, day: u32, config: &CleanConfig) -> Result<IngestOutput> {
    let mut stats = IngestStats::default();
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        match parse_clf_line_at(&line, idx + 1) {
            Ok(e) => entries.push((idx + 1, e)),
            Err(_) => stats.parse_errors += 1,
        }
    }
    let raw = clean(&entries, day, config);
    stats.cleaned = raw.len();

    let mut kept = Vec::new();
    let mut flagged = Vec::new();
    for q in &raw {
        let candidate = match normalize(q) {
            Ok(Normalized::Query(nq)) => nq,
            Ok(Normalized::Dropped) => continue,
            Err(Error::MalformedEncoding { text }) => NormalizedQuery::unlabeled(text, q.day),
            Err(e) => return Err(e),
        };
        stats.normalized += 1;
        match char_filter(&candidate.text) {
            FilterVerdict::Keep => kept.push(candidate),
            FilterVerdict::FlagMalicious => {
                flagged.push(NormalizedQuery::labeled(candidate.text, Label::Malicious, None, candidate.day))
            }
        }
    }
    let queries = dedupe(kept);
    let flagged = dedupe(flagged);
    stats.flagged = flagged.len();
    stats.kept = queries.len();
    Ok(IngestOutput { queries, flagged, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawQuery {
        RawQuery { text: text.to_owned(), source_line: 1, day: 0 }
    }

    fn norm_text(text: &str) -> Option<String> {
        match normalize(&raw(text)).unwrap() {
            Normalized::Query(q) => Some(q.text),
            Normalized::Dropped => None,
        }
    }

    #[test]
    fn parses_clf_record() {
        let e = parse_clf_line(r#"1.2.3.4 - - [01/Jul/2016:00:00:00 +0800] "GET /index.php?postID=123 HTTP/1.1" 200 512"#)
            .unwrap();
        assert_eq!(e.method, "GET");
        assert_eq!(e.request_path, "/index.php");
        assert_eq!(e.query_raw.as_deref(), Some("postID=123"));
        assert_eq!(e.status, 200);
        assert_eq!(e.body_size, 512);
        assert_eq!(e.protocol, "HTTP/1.1");
        assert_eq!(e.referer, None);
    }

    #[test]
    fn parses_combined_record_and_dash_size() {
        let e = parse_clf_line(
            r#"10.0.0.1 - bob [01/Jul/2016:00:00:01 +0800] "GET /a.jpg HTTP/1.1" 304 - "http://x/" "curl/7""#,
        )
        .unwrap();
        assert_eq!(e.query_raw, None);
        assert_eq!(e.body_size, 0);
        assert_eq!(e.referer.as_deref(), Some("http://x/"));
        assert_eq!(e.user_agent.as_deref(), Some("curl/7"));
    }

    #[test]
    fn query_is_after_first_question_mark() {
        let e = parse_clf_line(r#"1.2.3.4 - - [x] "GET /i.php?a=http://h/x.txt?ls HTTP/1.1" 200 1"#).unwrap();
        assert_eq!(e.query_raw.as_deref(), Some("a=http://h/x.txt?ls"));
    }

    #[test]
    fn rejects_garbage_and_bad_status() {
        assert!(parse_clf_line("garbage line").is_err());
        assert!(parse_clf_line(r#"1.2.3.4 - - [x] GET /a HTTP/1.1 200 1"#).is_err());
        assert!(parse_clf_line(r#"1.2.3.4 - - [x] "GET /a HTTP/1.1" abc 1"#).is_err());
        assert!(parse_clf_line(r#"1.2.3.4 - - [x] "GET /a HTTP/1.1" 700 1"#).is_err());
    }

    fn entry(method: &str, target: &str, status: u16) -> (usize, LogEntry) {
        let line = format!(r#"1.2.3.4 - - [x] "{method} {target} HTTP/1.1" {status} 1"#);
        (1, parse_clf_line(&line).unwrap())
    }

    #[test]
    fn clean_filters_method_status_and_static() {
        let cfg = CleanConfig::default();
        let entries = vec![
            entry("GET", "/index.php?postID=123", 200),
            entry("GET", "/index.php?postID=124", 404),
            entry("POST", "/index.php?postID=125", 200),
            entry("GET", "/x.html?a=1234", 200),
            entry("GET", "/index.php", 200),
            entry("GET", "/index.php?page=22", 299),
            entry("GET", "/index.php?page=23", 300),
        ];
        let out = clean(&entries, 3, &cfg);
        let texts: Vec<_> = out.iter().map(|q| q.text.as_str()).collect();
        assert_eq!(texts, ["postID=123", "page=22"]);
        assert!(out.iter().all(|q| q.day == 3));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(norm_text("PostID=%31%32%33").as_deref(), Some("postid=123"));
        assert_eq!(norm_text("a=1"), None);
        // two decode passes: %2531 -> %31 -> 1
        assert_eq!(norm_text("A=%2531"), None);
        assert_eq!(norm_text("Ab=%2531").as_deref(), Some("ab=1"));
        assert_eq!(norm_text(r"q=\'x\'").as_deref(), Some("q='x'"));
    }

    #[test]
    fn decode_depth_is_capped() {
        // four layers of encoding; only three are removed
        assert_eq!(norm_text("abcd=%25252541").as_deref(), Some("abcd=%41"));
    }

    #[test]
    fn malformed_percent_is_an_error() {
        let err = normalize(&raw("abcd=%zz")).unwrap_err();
        match err {
            Error::MalformedEncoding { text } => assert_eq!(char_filter(&text), FilterVerdict::FlagMalicious),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn char_filter_examples() {
        assert_eq!(char_filter("postid=123"), FilterVerdict::Keep);
        assert_eq!(char_filter("postid=<script>"), FilterVerdict::FlagMalicious);
        assert_eq!(char_filter("post\u{0}id"), FilterVerdict::FlagMalicious);
        assert_eq!(char_filter("a b=c"), FilterVerdict::FlagMalicious);
        assert_eq!(char_filter("ab=\u{ff}"), FilterVerdict::FlagMalicious);
        assert_eq!(char_filter("ab=\u{7f}"), FilterVerdict::FlagMalicious);
    }

    #[test]
    fn dedupe_keeps_first_occurrences() {
        let qs = |ts: &[&str]| ts.iter().map(|t| NormalizedQuery::unlabeled(*t, 0)).collect::<Vec<_>>();
        let out = dedupe(qs(&["a=bc", "a=bc", "x=yz"]));
        assert_eq!(out.iter().map(|q| q.text.as_str()).collect::<Vec<_>>(), ["a=bc", "x=yz"]);
        assert!(dedupe(vec![]).is_empty());
        let out = dedupe(qs(&["z=zz", "a=aa", "m=mm"]));
        assert_eq!(out.iter().map(|q| q.text.as_str()).collect::<Vec<_>>(), ["z=zz", "a=aa", "m=mm"]);
    }

    #[test]
    fn labeled_drops_class_for_benign() {
        let q = NormalizedQuery::labeled("abcd", Label::Benign, Some(AttackClass::Xss), 0);
        assert_eq!(q.attack_class, None);
    }

    #[test]
    fn ingest_routes_flagged_to_side_channel() {
        let log = concat!(
            "1.2.3.4 - - [x] \"GET /index.php?postID=123 HTTP/1.1\" 200 5\n",
            "1.2.3.4 - - [x] \"GET /index.php?postID=123 HTTP/1.1\" 200 5\n",
            "1.2.3.4 - - [x] \"GET /index.php?postID=%3Cscript%3E HTTP/1.1\" 200 5\n",
            "1.2.3.4 - - [x] \"GET /index.php?q=100%zz HTTP/1.1\" 200 5\n",
            "not a log line\n",
        );
        let out = ingest_log(log.as_bytes(), 0, &CleanConfig::default()).unwrap();
        assert_eq!(out.queries.len(), 1);
        assert_eq!(out.flagged.len(), 2);
        assert!(out.flagged.iter().all(|q| q.label == Some(Label::Malicious)));
        assert_eq!(out.stats.parse_errors, 1);
    }
}
