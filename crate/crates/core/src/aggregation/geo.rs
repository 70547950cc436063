use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use aho_corasick::{AhoCorasick, MatchKind};

use super::AggregateError;
use crate::labels::{is_cjk, FinalLabel};

/// Ordered alias → country table. Aliases are stored lowercased.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<(String, String)>,
    matcher: AhoCorasick,
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() && !is_cjk(c)
}

impl Gazetteer {
    /// Repeated aliases keep their first country.
    pub fn new<I, A, C>(pairs: I) -> Result<Self, AggregateError>
    where
        I: IntoIterator<Item = (A, C)>,
        A: AsRef<str>,
        C: AsRef<str>,
    {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, (alias, country)) in pairs.into_iter().enumerate() {
            let alias = fold(alias.as_ref());
            let country = country.as_ref().trim().to_string();
            if alias.is_empty() || country.is_empty() {
                return Err(AggregateError::BadGazetteer {
                    line: i as u64 + 2,
                    message: "empty alias or country".into(),
                });
            }
            if !entries.iter().any(|e| e.0 == alias) {
                entries.push((alias, country));
            }
        }
        let matcher = AhoCorasick::builder()
            .match_kind(MatchKind::Standard)
            .build(entries.iter().map(|e| &e.0))
            .map_err(|e| AggregateError::BadGazetteer {
                line: 0,
                message: e.to_string(),
            })?;
        Ok(Self { entries, matcher })
    }

    /// CSV with header `alias,country`.
    pub fn parse(text: &str) -> Result<Self, AggregateError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["alias", "country"] {
            return Err(AggregateError::BadGazetteer {
                line: 1,
                message: "header must be `alias,country`".into(),
            });
        }
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            pairs.push((rec[0].to_string(), rec[1].to_string()));
        }
        Self::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AggregateError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn shipped() -> Self {
        Self::parse(include_str!("../../data/gazetteer.csv")).expect("shipped gazetteer parses")
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Longest alias found in the case-folded location, ties going to the
/// earlier gazetteer entry. Aliases with a letter or digit at an edge only
/// match at a word boundary there.
pub fn resolve_country<'g>(location: &str, gz: &'g Gazetteer) -> Option<&'g str> {
    let text = location.to_lowercase();
    let mut best: Option<(usize, usize)> = None;
    for m in gz.matcher.find_overlapping_iter(&text) {
        let alias = &gz.entries[m.pattern().as_usize()].0;
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        let first = alias.chars().next().unwrap_or(' ');
        let last = alias.chars().next_back().unwrap_or(' ');
        if word_char(first) && before.is_some_and(word_char) {
            continue;
        }
        if word_char(last) && after.is_some_and(word_char) {
            continue;
        }
        let key = (alias.chars().count(), m.pattern().as_usize());
        best = match best {
            Some(b) if b.0 > key.0 || (b.0 == key.0 && b.1 < key.1) => Some(b),
            _ => Some(key),
        };
    }
    best.map(|(_, i)| gz.entries[i].1.as_str())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountrySentiment {
    pub country: String,
    pub positive: u64,
    pub negative: u64,
}

impl CountrySentiment {
    /// `positive / negative`, absent when there are no negative tweets.
    pub fn score(&self) -> Option<f64> {
        (self.negative > 0).then(|| self.positive as f64 / self.negative as f64)
    }

    pub fn undefined_ratio(&self) -> bool {
        self.negative == 0
    }
}

/// Per-country Positive/Negative counts plus the tallies needed to check
/// conservation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountryReport {
    /// Sorted by country name.
    pub countries: Vec<CountrySentiment>,
    pub unknown_positive: u64,
    pub unknown_negative: u64,
    /// Neutral and Irrelevant tweets, which never enter the counts.
    pub excluded: u64,
}

pub fn country_scores<'a, I>(tweets: I) -> CountryReport
where
    I: IntoIterator<Item = (Option<&'a str>, FinalLabel)>,
{
    let mut map: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    let mut report = CountryReport::default();
    for (country, label) in tweets {
        let (pos, neg) = match label {
            FinalLabel::Positive => (1, 0),
            FinalLabel::Negative => (0, 1),
            FinalLabel::Neutral | FinalLabel::Irrelevant => {
                report.excluded += 1;
                continue;
            }
        };
        match country {
            Some(c) => {
                let e = map.entry(c).or_default();
                e.0 += pos;
                e.1 += neg;
            }
            None => {
                report.unknown_positive += pos;
                report.unknown_negative += neg;
            }
        }
    }
    report.countries = map
        .into_iter()
        .map(|(c, (positive, negative))| CountrySentiment {
            country: c.to_string(),
            positive,
            negative,
        })
        .collect();
    report
}

pub fn write_countries<W: Write>(writer: W, report: &CountryReport) -> Result<(), AggregateError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "country",
        "positive",
        "negative",
        "score",
        "undefined_ratio",
    ])?;
    for c in &report.countries {
        w.write_record([
            c.country.clone(),
            c.positive.to_string(),
            c.negative.to_string(),
            c.score().map(|s| format!("{s:.6}")).unwrap_or_default(),
            c.undefined_ratio().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
