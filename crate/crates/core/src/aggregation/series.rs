use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};

use super::{AggregateError, ClassifiedTweet};
use crate::labels::FinalLabel;

/// Beijing time.
pub const DEFAULT_UTC_OFFSET_MINUTES: i32 = 8 * 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Counts {
    positive: u64,
    negative: u64,
    neutral: u64,
}

/// One local-time hour `[start, start + 1h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeBucket {
    /// Local wall-clock time at the configured offset.
    pub start: NaiveDateTime,
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
}

impl TimeBucket {
    pub fn total_classified(&self) -> u64 {
        self.positive + self.negative + self.neutral
    }

    pub fn absolute(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }

    /// Share of all relevant classified tweets, Neutral included.
    pub fn pos_pct(&self) -> f64 {
        share(self.positive, self.total_classified())
    }

    pub fn neg_pct(&self) -> f64 {
        share(self.negative, self.total_classified())
    }

    pub fn diff_pct(&self) -> f64 {
        self.pos_pct() - self.neg_pct()
    }
}

fn share(n: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        n as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentSeries {
    pub utc_offset_minutes: i32,
    pub buckets: Vec<TimeBucket>,
}

/// Mergeable partial state of [`bucket_hourly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesAccumulator {
    offset_minutes: i32,
    /// Keyed by local hour number since the epoch.
    hours: BTreeMap<i64, Counts>,
    span: Option<(i64, i64)>,
}

impl SeriesAccumulator {
    pub fn new(offset_minutes: i32) -> Result<Self, AggregateError> {
        if offset_minutes.abs() > 18 * 60 {
            return Err(AggregateError::BadOffset(offset_minutes));
        }
        Ok(Self {
            offset_minutes,
            hours: BTreeMap::new(),
            span: None,
        })
    }

    fn local_hour(&self, at: DateTime<Utc>) -> i64 {
        (at.timestamp() + i64::from(self.offset_minutes) * 60).div_euclid(3600)
    }

    /// Every tweet widens the span; Irrelevant ones are not counted.
    pub fn add(&mut self, at: DateTime<Utc>, label: FinalLabel) {
        let h = self.local_hour(at);
        self.span = Some(match self.span {
            None => (h, h),
            Some((lo, hi)) => (lo.min(h), hi.max(h)),
        });
        let c = self.hours.entry(h).or_default();
        match label {
            FinalLabel::Positive => c.positive += 1,
            FinalLabel::Negative => c.negative += 1,
            FinalLabel::Neutral => c.neutral += 1,
            FinalLabel::Irrelevant => {}
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        assert_eq!(self.offset_minutes, other.offset_minutes);
        for (h, c) in other.hours {
            let e = self.hours.entry(h).or_default();
            e.positive += c.positive;
            e.negative += c.negative;
            e.neutral += c.neutral;
        }
        self.span = match (self.span, other.span) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b),
        };
        self
    }

    pub fn finish(self) -> Result<SentimentSeries, AggregateError> {
        let (lo, hi) = self.span.ok_or(AggregateError::EmptyCorpus)?;
        let epoch = DateTime::<Utc>::UNIX_EPOCH.naive_utc();
        let buckets = (lo..=hi)
            .map(|h| {
                let c = self.hours.get(&h).copied().unwrap_or_default();
                TimeBucket {
                    start: epoch + Duration::hours(h),
                    positive: c.positive,
                    negative: c.negative,
                    neutral: c.neutral,
                }
            })
            .collect();
        Ok(SentimentSeries {
            utc_offset_minutes: self.offset_minutes,
            buckets,
        })
    }
}

/// Hourly counts at local time `UTC + offset`, with empty hours between the
/// first and last tweet emitted as zero buckets.
pub fn bucket_hourly(
    tweets: &[ClassifiedTweet],
    offset_minutes: i32,
) -> Result<SentimentSeries, AggregateError> {
    let mut acc = SeriesAccumulator::new(offset_minutes)?;
    for t in tweets {
        acc.add(t.created_at, t.label);
    }
    acc.finish()
}

pub fn bucket_hourly_sharded(
    tweets: &[ClassifiedTweet],
    offset_minutes: i32,
    shards: usize,
) -> Result<SentimentSeries, AggregateError> {
    let empty = SeriesAccumulator::new(offset_minutes)?;
    let size = tweets.len().div_ceil(shards.max(1)).max(1);
    let parts: Vec<SeriesAccumulator> = std::thread::scope(|s| {
        let handles: Vec<_> = tweets
            .chunks(size)
            .map(|chunk| {
                let mut acc = empty.clone();
                s.spawn(move || {
                    for t in chunk {
                        acc.add(t.created_at, t.label);
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .collect()
    });
    parts
        .into_iter()
        .fold(empty, SeriesAccumulator::merge)
        .finish()
}

pub fn write_series<W: Write>(writer: W, series: &SentimentSeries) -> Result<(), AggregateError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "bucket_start_beijing",
        "positive",
        "negative",
        "neutral",
        "absolute",
        "pos_pct",
        "neg_pct",
        "diff_pct",
    ])?;
    for b in &series.buckets {
        w.write_record([
            b.start.format("%Y-%m-%d %H:%M").to_string(),
            b.positive.to_string(),
            b.negative.to_string(),
            b.neutral.to_string(),
            b.absolute().to_string(),
            format!("{:.6}", b.pos_pct()),
            format!("{:.6}", b.neg_pct()),
            format!("{:.6}", b.diff_pct()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
