//! Tweet archive ingestion: JSON Lines parsing, hashtag filtering, dedup and
//! language partitioning.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::labels::{is_cjk, Language};
use crate::text::scrub_for_language;

const TWITTER_TIME_FORMAT: &str = "%a %b %d %H:%M:%S %z %Y";
const TWITTER_TIME_FORMAT_UTC: &str = "%a %b %d %H:%M:%S +0000 %Y";

const DEFAULT_HASHTAGS: &str = include_str!("../data/hashtags.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value for field `{0}`")]
    InvalidField(&'static str),
    #[error("bad timestamp `{0}`")]
    BadTimestamp(String),
}

#[derive(Debug, Error)]
pub enum HashtagSetError {
    #[error("hashtag on line {line} does not start with `#`: {tag}")]
    MissingHash { line: usize, tag: String },
    #[error("unknown hashtag section `{0}`")]
    UnknownSection(String),
    #[error("hashtag set is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a Twitter `created_at` string (`Tue Oct 01 16:58:48 +0000 2019`).
pub fn parse_twitter_time(s: &str) -> Result<DateTime<Utc>, ParseError> {
    DateTime::parse_from_str(s, TWITTER_TIME_FORMAT)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| ParseError::BadTimestamp(s.to_string()))
}

pub fn format_twitter_time(t: &DateTime<Utc>) -> String {
    t.format(TWITTER_TIME_FORMAT_UTC).to_string()
}

mod twitter_time {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_twitter_time(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_twitter_time(&raw).map_err(serde::de::Error::custom)
    }
}

/// Which column of the hashtag table a tag came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HashtagGroup {
    English,
    Simplified,
    Traditional,
}

/// The ordered study hashtag list. A tag may be listed under more than one
/// group (`#北京` and `#中共` are written identically in both scripts).
#[derive(Debug, Clone)]
pub struct HashtagSet {
    tags: Vec<(String, HashtagGroup)>,
    by_body: HashMap<String, String>,
}

impl HashtagSet {
    /// The 59 tags shipped with the crate.
    pub fn study_default() -> Self {
        Self::parse(DEFAULT_HASHTAGS).expect("shipped hashtag file is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HashtagSetError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// One tag per line, `#` included. Optional `[english]`, `[simplified]`
    /// and `[traditional]` headers assign the following tags to a group;
    /// tags before any header are English.
    pub fn parse(text: &str) -> Result<Self, HashtagSetError> {
        let mut group = HashtagGroup::English;
        let mut tags = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                group = match section.to_ascii_lowercase().as_str() {
                    "english" | "en" => HashtagGroup::English,
                    "simplified" => HashtagGroup::Simplified,
                    "traditional" => HashtagGroup::Traditional,
                    other => return Err(HashtagSetError::UnknownSection(other.to_string())),
                };
                continue;
            }
            if !line.starts_with('#') || line.len() == 1 {
                return Err(HashtagSetError::MissingHash {
                    line: i + 1,
                    tag: line.to_string(),
                });
            }
            tags.push((line.to_string(), group));
        }
        Self::from_tags(tags)
    }

    pub fn from_tags(tags: Vec<(String, HashtagGroup)>) -> Result<Self, HashtagSetError> {
        if tags.is_empty() {
            return Err(HashtagSetError::Empty);
        }
        let by_body = tags
            .iter()
            .map(|(t, _)| (t[1..].to_string(), t.clone()))
            .collect();
        Ok(Self { tags, by_body })
    }

    /// Number of listed entries (duplicates across groups included).
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn count_in(&self, group: HashtagGroup) -> usize {
        self.tags.iter().filter(|(_, g)| *g == group).count()
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(|(t, _)| t.as_str())
    }

    pub fn entries(&self) -> &[(String, HashtagGroup)] {
        &self.tags
    }

    pub fn contains(&self, tag: &str) -> bool {
        tag.strip_prefix('#')
            .is_some_and(|body| self.by_body.contains_key(body))
    }

    fn lookup_body(&self, body: &str) -> Option<&str> {
        self.by_body.get(body).map(String::as_str)
    }
}

/// Characters that continue a hashtag body.
pub fn is_hashtag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || is_cjk(c)
}

/// Returns the study tags occurring in `text` as complete hashtag tokens, in
/// order of first occurrence. Matching is case-sensitive.
pub fn match_hashtags(text: &str, tags: &HashtagSet) -> Vec<String> {
    let mut found: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find('#') {
        let after = &rest[pos + 1..];
        let end = after
            .char_indices()
            .find(|&(_, c)| !is_hashtag_char(c))
            .map_or(after.len(), |(i, _)| i);
        let body = &after[..end];
        if let Some(tag) = tags.lookup_body(body) {
            if !found.iter().any(|f| f == tag) {
                found.push(tag.to_string());
            }
        }
        rest = &after[end..];
    }
    found
}

/// A parsed archive record, before hashtag filtering and partitioning.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub user_location: Option<String>,
    /// Upstream `lang` field, when the archive carries one.
    pub lang_hint: Option<String>,
}

fn parse_id(v: &Value) -> Result<u64, ParseError> {
    match v {
        Value::Number(n) => n.as_u64().ok_or(ParseError::InvalidField("id")),
        Value::String(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
            s.parse().map_err(|_| ParseError::InvalidField("id"))
        }
        _ => Err(ParseError::InvalidField("id")),
    }
}

/// Parses one archive line. The extended text is preferred over the
/// (possibly truncated) `text` field.
pub fn parse_tweet_record(line: &str) -> Result<ParsedRecord, ParseError> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ParseError::MalformedJson("record is not an object".into()))?;

    let id = parse_id(obj.get("id").ok_or(ParseError::MissingField("id"))?)?;
    let created_raw = obj
        .get("created_at")
        .ok_or(ParseError::MissingField("created_at"))?
        .as_str()
        .ok_or(ParseError::InvalidField("created_at"))?;
    let created_at = parse_twitter_time(created_raw)?;

    let extended = obj
        .get("extended_tweet")
        .and_then(|e| e.get("full_text"))
        .and_then(Value::as_str);
    let text = match (extended, obj.get("text")) {
        (Some(full), _) => full.to_string(),
        (None, Some(Value::String(t))) => t.clone(),
        (None, Some(_)) => return Err(ParseError::InvalidField("text")),
        (None, None) => return Err(ParseError::MissingField("text")),
    };

    let user_location = obj
        .get("user")
        .and_then(|u| u.get("location"))
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string);
    let lang_hint = obj.get("lang").and_then(Value::as_str).map(str::to_string);

    Ok(ParsedRecord {
        id,
        created_at,
        text,
        user_location,
        lang_hint,
    })
}

/// Character-ratio thresholds for the language partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanguageThresholds {
    pub cjk_min_ratio: f64,
    pub latin_min_ratio: f64,
    /// Fall back on the upstream `lang` field when the ratios say Other.
    pub use_lang_field: bool,
}

impl Default for LanguageThresholds {
    fn default() -> Self {
        Self {
            cjk_min_ratio: 0.30,
            latin_min_ratio: 0.80,
            use_lang_field: false,
        }
    }
}

/// Classifies text by the share of CJK ideographs and Basic-Latin letters
/// among its letter-class characters, after URLs, mentions and hashtags are
/// removed.
pub fn partition_text(text: &str, th: &LanguageThresholds) -> Language {
    let scrubbed = scrub_for_language(text);
    let (mut letters, mut cjk, mut latin) = (0usize, 0usize, 0usize);
    for c in scrubbed.chars() {
        if is_cjk(c) {
            letters += 1;
            cjk += 1;
        } else if c.is_alphabetic() {
            letters += 1;
            if c.is_ascii_alphabetic() {
                latin += 1;
            }
        }
    }
    if letters == 0 {
        return Language::Other;
    }
    let cjk_ratio = cjk as f64 / letters as f64;
    let latin_ratio = latin as f64 / letters as f64;
    if cjk_ratio >= th.cjk_min_ratio {
        Language::Chinese
    } else if latin_ratio >= th.latin_min_ratio {
        Language::English
    } else {
        Language::Other
    }
}

pub fn partition_language(record: &ParsedRecord, th: &LanguageThresholds) -> Language {
    let by_ratio = partition_text(&record.text, th);
    if by_ratio != Language::Other || !th.use_lang_field {
        return by_ratio;
    }
    match record.lang_hint.as_deref() {
        Some("en") => Language::English,
        Some(l) if l == "zh" || l.starts_with("zh-") => Language::Chinese,
        _ => Language::Other,
    }
}

/// One admitted tweet. Field order is the canonical JSONL key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: u64,
    #[serde(with = "twitter_time")]
    pub created_at: DateTime<Utc>,
    pub language: Language,
    pub matched_hashtags: Vec<String>,
    pub user_location: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub tweets: Vec<RawTweet>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RawTweet> {
        self.tweets.iter()
    }

    pub fn by_language(&self, lang: Language) -> impl Iterator<Item = &RawTweet> {
        self.tweets.iter().filter(move |t| t.language == lang)
    }
}

/// Corpus accounting. Blank lines are skipped and not counted; every other
/// line ends up in exactly one of admitted, duplicates, rejected_no_hashtag
/// or parse_errors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub total_lines: u64,
    pub parsed: u64,
    pub admitted: u64,
    pub duplicates: u64,
    pub rejected_no_hashtag: u64,
    pub parse_errors: u64,
    pub per_language: BTreeMap<Language, u64>,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.total_lines += other.total_lines;
        self.parsed += other.parsed;
        self.admitted += other.admitted;
        self.duplicates += other.duplicates;
        self.rejected_no_hashtag += other.rejected_no_hashtag;
        self.parse_errors += other.parse_errors;
        for (lang, n) in &other.per_language {
            *self.per_language.entry(*lang).or_default() += n;
        }
    }

    /// Checks both accounting identities.
    pub fn is_consistent(&self) -> bool {
        self.admitted == self.per_language.values().sum::<u64>()
            && self.admitted + self.duplicates + self.rejected_no_hashtag + self.parse_errors
                == self.total_lines
            && self.parsed == self.total_lines - self.parse_errors
    }
}

impl fmt::Display for IngestStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lines={} parsed={} admitted={} duplicates={} no_hashtag={} parse_errors={}",
            self.total_lines,
            self.parsed,
            self.admitted,
            self.duplicates,
            self.rejected_no_hashtag,
            self.parse_errors
        )?;
        for lang in Language::ALL {
            write!(
                f,
                " {}={}",
                lang,
                self.per_language.get(&lang).copied().unwrap_or(0)
            )?;
        }
        Ok(())
    }
}

/// Result of the per-line (order-independent) part of ingestion.
#[derive(Debug, Clone)]
enum LineOutcome {
    Blank,
    ParseError,
    NoHashtag,
    Candidate(RawTweet),
}

fn process_line(line: &str, tags: &HashtagSet, th: &LanguageThresholds) -> LineOutcome {
    if line.trim().is_empty() {
        return LineOutcome::Blank;
    }
    let record = match parse_tweet_record(line) {
        Ok(r) => r,
        Err(_) => return LineOutcome::ParseError,
    };
    let matched = match_hashtags(&record.text, tags);
    if matched.is_empty() {
        return LineOutcome::NoHashtag;
    }
    let language = partition_language(&record, th);
    LineOutcome::Candidate(RawTweet {
        id: record.id,
        created_at: record.created_at,
        language,
        matched_hashtags: matched,
        user_location: record.user_location,
        text: record.text,
    })
}

/// Order-dependent fold: dedup (first occurrence wins) and accounting.
#[derive(Default)]
struct Accumulator {
    corpus: Corpus,
    stats: IngestStats,
    seen: HashSet<u64>,
}

impl Accumulator {
    fn push(&mut self, outcome: LineOutcome) {
        match outcome {
            LineOutcome::Blank => return,
            LineOutcome::ParseError => {
                self.stats.total_lines += 1;
                self.stats.parse_errors += 1;
                return;
            }
            _ => {}
        }
        self.stats.total_lines += 1;
        self.stats.parsed += 1;
        match outcome {
            LineOutcome::NoHashtag => self.stats.rejected_no_hashtag += 1,
            LineOutcome::Candidate(tweet) => {
                if self.seen.insert(tweet.id) {
                    self.stats.admitted += 1;
                    *self.stats.per_language.entry(tweet.language).or_default() += 1;
                    self.corpus.tweets.push(tweet);
                } else {
                    self.stats.duplicates += 1;
                }
            }
            LineOutcome::Blank | LineOutcome::ParseError => unreachable!(),
        }
    }

    fn finish(mut self) -> (Corpus, IngestStats) {
        for lang in Language::ALL {
            self.stats.per_language.entry(lang).or_default();
        }
        (self.corpus, self.stats)
    }
}

/// Streams JSON Lines from `reader` through parse, hashtag match, dedup and
/// partition. Per-record errors are counted; only I/O errors are returned.
pub fn ingest_stream<R: BufRead>(
    reader: R,
    tags: &HashtagSet,
    th: &LanguageThresholds,
) -> io::Result<(Corpus, IngestStats)> {
    let mut acc = Accumulator::default();
    for line in reader.lines() {
        acc.push(process_line(&line?, tags, th));
    }
    Ok(acc.finish())
}

/// Same result as [`ingest_stream`] over `lines`, with the per-line work
/// split across `shards` threads. Dedup is resolved afterwards in shard
/// order, so the output is identical to the sequential run.
pub fn ingest_lines_sharded<S: AsRef<str> + Sync>(
    lines: &[S],
    tags: &HashtagSet,
    th: &LanguageThresholds,
    shards: usize,
) -> (Corpus, IngestStats) {
    let shards = shards.max(1);
    let chunk = lines.len().div_ceil(shards).max(1);
    let outcomes: Vec<Vec<LineOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = lines
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|l| process_line(l.as_ref(), tags, th))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ingest shard panicked"))
            .collect()
    });
    let mut acc = Accumulator::default();
    for outcome in outcomes.into_iter().flatten() {
        acc.push(outcome);
    }
    acc.finish()
}

/// Writes the canonical JSONL form (fixed key order, one record per line).
pub fn write_corpus<W: Write>(mut w: W, corpus: &Corpus) -> io::Result<()> {
    for tweet in &corpus.tweets {
        serde_json::to_writer(&mut w, tweet)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CorpusReadError {
    #[error("corpus line {line}: {source}")]
    Record {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusReadError> {
    let mut tweets = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet = serde_json::from_str(&line).map_err(|source| CorpusReadError::Record {
            line: i + 1,
            source,
        })?;
        tweets.push(tweet);
    }
    Ok(Corpus { tweets })
}
