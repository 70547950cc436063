//! Hourly sentiment series, per-country scores and word-frequency reports
//! over classified tweets.

mod geo;
mod series;
mod words;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::labels::{FinalLabel, Language};

pub use geo::{
    country_scores, resolve_country, write_countries, CountryReport, CountrySentiment, Gazetteer,
};
pub use series::{
    bucket_hourly, bucket_hourly_sharded, write_series, SentimentSeries, SeriesAccumulator,
    TimeBucket, DEFAULT_UTC_OFFSET_MINUTES,
};
pub use words::{
    distinctive_words, top_k_words, word_counts, write_distinctive, write_words, WordFreqReport,
};

/// What the aggregations need to know about one classified tweet.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedTweet {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub language: Language,
    pub label: FinalLabel,
    pub user_location: Option<String>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("no tweets to aggregate")]
    EmptyCorpus,
    #[error("word reports cover Positive and Negative only, not {0}")]
    UnknownClass(FinalLabel),
    #[error("gazetteer line {line}: {message}")]
    BadGazetteer { line: u64, message: String },
    #[error("utc offset {0} minutes is out of range")]
    BadOffset(i32),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
