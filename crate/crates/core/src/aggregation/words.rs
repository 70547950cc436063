use std::collections::{HashMap, HashSet};
use std::io::Write;

use super::AggregateError;
use crate::labels::FinalLabel;
use crate::text::StopList;

/// Full ranked vocabularies of the Positive and Negative classes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordFreqReport {
    pub positive: Vec<(String, u64)>,
    pub negative: Vec<(String, u64)>,
}

fn check_class(class: FinalLabel) -> Result<(), AggregateError> {
    match class {
        FinalLabel::Positive | FinalLabel::Negative => Ok(()),
        other => Err(AggregateError::UnknownClass(other)),
    }
}

fn rank(counts: HashMap<&str, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Token counts over tweets of `class`, stop words removed, ordered by
/// count descending then token.
pub fn word_counts<'a, I>(
    tweets: I,
    class: FinalLabel,
    stop: &StopList,
) -> Result<Vec<(String, u64)>, AggregateError>
where
    I: IntoIterator<Item = (&'a [String], FinalLabel)>,
{
    check_class(class)?;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for (tokens, label) in tweets {
        if label != class {
            continue;
        }
        for t in tokens {
            if !stop.contains(t) {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    Ok(rank(counts))
}

pub fn top_k_words<'a, I>(
    tweets: I,
    class: FinalLabel,
    stop: &StopList,
    k: usize,
) -> Result<Vec<(String, u64)>, AggregateError>
where
    I: IntoIterator<Item = (&'a [String], FinalLabel)>,
{
    let mut v = word_counts(tweets, class, stop)?;
    v.truncate(k);
    Ok(v)
}

impl WordFreqReport {
    pub fn build<'a, I>(tweets: I, stop: &StopList) -> Self
    where
        I: IntoIterator<Item = (&'a [String], FinalLabel)> + Clone,
    {
        Self {
            positive: word_counts(tweets.clone(), FinalLabel::Positive, stop)
                .expect("Positive is a word-report class"),
            negative: word_counts(tweets, FinalLabel::Negative, stop)
                .expect("Negative is a word-report class"),
        }
    }

    pub fn distinctive(&self) -> (Vec<(String, u64)>, Vec<(String, u64)>) {
        distinctive_words(&self.positive, &self.negative)
    }
}

/// Drops every token present in both lists; each side keeps its order.
pub fn distinctive_words(
    pos: &[(String, u64)],
    neg: &[(String, u64)],
) -> (Vec<(String, u64)>, Vec<(String, u64)>) {
    let p: HashSet<&str> = pos.iter().map(|e| e.0.as_str()).collect();
    let n: HashSet<&str> = neg.iter().map(|e| e.0.as_str()).collect();
    (
        pos.iter()
            .filter(|e| !n.contains(e.0.as_str()))
            .cloned()
            .collect(),
        neg.iter()
            .filter(|e| !p.contains(e.0.as_str()))
            .cloned()
            .collect(),
    )
}

fn write_ranked<W: Write>(
    w: &mut csv::Writer<W>,
    language: &str,
    class: FinalLabel,
    list: &[(String, u64)],
    k: usize,
) -> Result<(), AggregateError> {
    for (i, (tok, n)) in list.iter().take(k).enumerate() {
        w.write_record([
            language,
            class.name(),
            &(i + 1).to_string(),
            tok,
            &n.to_string(),
        ])?;
    }
    Ok(())
}

/// `language,class,rank,token,count` rows, top `k` per class.
pub fn write_words<W: Write>(
    writer: W,
    reports: &[(&str, &WordFreqReport)],
    k: usize,
) -> Result<(), AggregateError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["language", "class", "rank", "token", "count"])?;
    for (lang, r) in reports {
        write_ranked(&mut w, lang, FinalLabel::Positive, &r.positive, k)?;
        write_ranked(&mut w, lang, FinalLabel::Negative, &r.negative, k)?;
    }
    w.flush()?;
    Ok(())
}

/// Same layout as [`write_words`] over the distinctive lists.
pub fn write_distinctive<W: Write>(
    writer: W,
    reports: &[(&str, &WordFreqReport)],
    k: usize,
) -> Result<(), AggregateError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["language", "class", "rank", "token", "count"])?;
    for (lang, r) in reports {
        let (p, n) = r.distinctive();
        write_ranked(&mut w, lang, FinalLabel::Positive, &p, k)?;
        write_ranked(&mut w, lang, FinalLabel::Negative, &n, k)?;
    }
    w.flush()?;
    Ok(())
}
