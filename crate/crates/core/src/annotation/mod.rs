//! Annotator ballots, majority-vote amalgamation and agreement reporting.
//!
//! Every decision (relevance, polarity, typeface) is a plurality vote over the
//! ballots that take part in it. Ties among the leaders are broken by a
//! uniform draw from a ChaCha stream keyed on `(seed, tweet_id, decision)`,
//! after sorting the tied candidates canonically, so the outcome never depends
//! on ballot order or on the order tweets are processed in.

mod io;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{Polarity, Typeface};

pub use io::{read_ballots, read_gold, write_ballots, write_gold};
pub use report::{
    build_agreement_report, build_dissident_report, AgreementReport, AgreementRow, DissidentEntry,
    DissidentReport, RowKind,
};

pub const MAX_PANEL: usize = 4;

#[derive(Debug, Error)]
pub enum VoteError {
    #[error("no ballots for tweet")]
    EmptyBallotSet,
    #[error("tweet {0} is relevant but no ballot carries a score")]
    NoParticipants(u64),
    #[error("score {0} is outside -2..=2")]
    OutOfRange(i64),
    #[error("labeler {labeler} voted twice on tweet {tweet_id}")]
    DuplicateLabeler { tweet_id: u64, labeler: u8 },
    #[error("ballot set mixes tweets {0} and {1}")]
    MixedTweets(u64, u64),
    #[error("{0} ballots for one tweet; at most 4 are supported")]
    PanelTooLarge(usize),
    #[error("labeler {labeler} scored tweet {tweet_id} without marking it relevant")]
    ScoreWithoutRelevance { tweet_id: u64, labeler: u8 },
    #[error("labeler {0} took part in no contested vote")]
    NoContestedVotes(u8),
    #[error("ballot file line {line}: {message}")]
    BadRecord { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One labeler's judgment of one tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub tweet_id: u64,
    pub labeler_id: u8,
    pub relevant: bool,
    pub score: Option<i8>,
    pub typeface: Option<Typeface>,
}

impl Ballot {
    pub fn new(
        tweet_id: u64,
        labeler_id: u8,
        relevant: bool,
        score: Option<i8>,
        typeface: Option<Typeface>,
    ) -> Result<Self, VoteError> {
        if let Some(s) = score {
            if !(-2..=2).contains(&s) {
                return Err(VoteError::OutOfRange(s.into()));
            }
            if !relevant {
                return Err(VoteError::ScoreWithoutRelevance {
                    tweet_id,
                    labeler: labeler_id,
                });
            }
        }
        Ok(Self {
            tweet_id,
            labeler_id,
            relevant,
            score,
            typeface,
        })
    }
}

/// Maps the -2..=2 scale onto three classes.
pub fn collapse_score(score: i64) -> Result<Polarity, VoteError> {
    match score {
        1 | 2 => Ok(Polarity::Positive),
        0 => Ok(Polarity::Neutral),
        -2 | -1 => Ok(Polarity::Negative),
        other => Err(VoteError::OutOfRange(other)),
    }
}

/// Sizes of the vote groups, largest first: `3:1`, `2:1:1`, `1:1:1:1`.
/// A unanimous vote keeps a trailing zero (`4:0`, `3:0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoteRatio(Vec<u32>);

impl VoteRatio {
    pub fn from_counts(mut counts: Vec<u32>) -> Self {
        counts.retain(|&c| c > 0);
        counts.sort_unstable_by(|a, b| b.cmp(a));
        Self(counts)
    }

    pub fn groups(&self) -> &[u32] {
        &self.0
    }

    pub fn participants(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn class(&self) -> RatioClass {
        match self.0.as_slice() {
            [_] => RatioClass::Unanimous,
            [2, 2] => RatioClass::EvenSplit,
            [2, 1, 1] => RatioClass::TwoOneOne,
            g if g.iter().all(|&c| c == 1) => RatioClass::AllDistinct,
            [_, 1] => RatioClass::OneDissent,
            _ => RatioClass::Other,
        }
    }
}

impl fmt::Display for VoteRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => Ok(()),
            [n] => write!(f, "{n}:0"),
            groups => {
                let parts: Vec<String> = groups.iter().map(u32::to_string).collect();
                f.write_str(&parts.join(":"))
            }
        }
    }
}

impl FromStr for VoteRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let counts = s
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| format!("bad ratio `{s}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_counts(counts))
    }
}

/// Column of the agreement table a vote falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RatioClass {
    /// 4:0 (3:0 with three participants)
    Unanimous,
    /// 3:1 (2:1)
    OneDissent,
    /// 2:2
    EvenSplit,
    /// 2:1:1
    TwoOneOne,
    /// 1:1:1:1 (1:1:1)
    AllDistinct,
    /// Anything a panel larger than four could produce.
    Other,
}

impl RatioClass {
    pub const COLUMNS: [RatioClass; 5] = [
        RatioClass::Unanimous,
        RatioClass::OneDissent,
        RatioClass::EvenSplit,
        RatioClass::TwoOneOne,
        RatioClass::AllDistinct,
    ];

    pub fn header(self) -> &'static str {
        match self {
            RatioClass::Unanimous => "4:0 (3:0)",
            RatioClass::OneDissent => "3:1 (2:1)",
            RatioClass::EvenSplit => "2:2",
            RatioClass::TwoOneOne => "2:1:1",
            RatioClass::AllDistinct => "1:1:1:1 (1:1:1)",
            RatioClass::Other => "other",
        }
    }
}

/// Outcome of one plurality vote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vote<T> {
    pub winner: T,
    pub ratio: VoteRatio,
    pub tie_broken: bool,
    /// Every candidate sharing the top count, canonically ordered.
    pub leaders: Vec<T>,
}

/// Which decision a tie-break draw belongs to; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Relevance,
    Polarity,
    Typeface,
    Score,
}

impl DecisionKind {
    fn tag(self) -> u64 {
        match self {
            DecisionKind::Relevance => 1,
            DecisionKind::Polarity => 2,
            DecisionKind::Typeface => 3,
            DecisionKind::Score => 4,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform index in `0..n` from the stream keyed on the decision.
fn tie_break_index(seed: u64, tweet_id: u64, kind: DecisionKind, n: usize) -> usize {
    let key = splitmix64(splitmix64(seed ^ splitmix64(tweet_id)) ^ kind.tag());
    ChaCha8Rng::seed_from_u64(key).gen_range(0..n)
}

/// Plurality over `votes`; `None` when there are no votes.
pub fn plurality<T: Ord + Copy>(
    votes: &[T],
    seed: u64,
    tweet_id: u64,
    kind: DecisionKind,
) -> Option<Vote<T>> {
    if votes.is_empty() {
        return None;
    }
    let mut tally: BTreeMap<T, u32> = BTreeMap::new();
    for v in votes {
        *tally.entry(*v).or_default() += 1;
    }
    let top = *tally.values().max().expect("non-empty tally");
    let leaders: Vec<T> = tally
        .iter()
        .filter(|(_, &c)| c == top)
        .map(|(k, _)| *k)
        .collect();
    let ratio = VoteRatio::from_counts(tally.values().copied().collect());
    let (winner, tie_broken) = if leaders.len() == 1 {
        (leaders[0], false)
    } else {
        let i = tie_break_index(seed, tweet_id, kind, leaders.len());
        (leaders[i], true)
    };
    Some(Vote {
        winner,
        ratio,
        tie_broken,
        leaders,
    })
}

/// Checks panel shape and returns the shared tweet id.
fn check_panel(ballots: &[Ballot]) -> Result<u64, VoteError> {
    let first = ballots.first().ok_or(VoteError::EmptyBallotSet)?;
    if ballots.len() > MAX_PANEL {
        return Err(VoteError::PanelTooLarge(ballots.len()));
    }
    for (i, b) in ballots.iter().enumerate() {
        if b.tweet_id != first.tweet_id {
            return Err(VoteError::MixedTweets(first.tweet_id, b.tweet_id));
        }
        if ballots[..i].iter().any(|o| o.labeler_id == b.labeler_id) {
            return Err(VoteError::DuplicateLabeler {
                tweet_id: b.tweet_id,
                labeler: b.labeler_id,
            });
        }
    }
    Ok(first.tweet_id)
}

pub fn amalgamate_relevance(ballots: &[Ballot], seed: u64) -> Result<Vote<bool>, VoteError> {
    let tweet_id = check_panel(ballots)?;
    let votes: Vec<bool> = ballots.iter().map(|b| b.relevant).collect();
    Ok(plurality(&votes, seed, tweet_id, DecisionKind::Relevance).expect("non-empty panel"))
}

/// Ballots that take part in the polarity vote: relevant and scored.
fn scored(ballots: &[Ballot]) -> impl Iterator<Item = &Ballot> {
    ballots.iter().filter(|b| b.relevant && b.score.is_some())
}

/// Polarity vote over the collapsed scores of participating ballots.
/// Returns `None` when the tweet was judged irrelevant.
pub fn amalgamate_polarity(
    ballots: &[Ballot],
    relevant: bool,
    seed: u64,
) -> Result<Option<Vote<Polarity>>, VoteError> {
    let tweet_id = check_panel(ballots)?;
    if !relevant {
        return Ok(None);
    }
    let votes = scored(ballots)
        .map(|b| collapse_score(b.score.expect("filtered").into()))
        .collect::<Result<Vec<_>, _>>()?;
    plurality(&votes, seed, tweet_id, DecisionKind::Polarity)
        .map(Some)
        .ok_or(VoteError::NoParticipants(tweet_id))
}

/// Vote over the raw -2..=2 scores; only feeds the agreement report.
pub fn score_vote(ballots: &[Ballot], seed: u64) -> Result<Option<Vote<i8>>, VoteError> {
    let tweet_id = check_panel(ballots)?;
    let votes: Vec<i8> = scored(ballots).filter_map(|b| b.score).collect();
    Ok(plurality(&votes, seed, tweet_id, DecisionKind::Score))
}

/// Typeface vote over ballots that carry one; `None` when none do.
pub fn amalgamate_typeface(
    ballots: &[Ballot],
    seed: u64,
) -> Result<Option<Vote<Typeface>>, VoteError> {
    let tweet_id = check_panel(ballots)?;
    let votes: Vec<Typeface> = ballots.iter().filter_map(|b| b.typeface).collect();
    Ok(plurality(&votes, seed, tweet_id, DecisionKind::Typeface))
}

/// Amalgamated label for one tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabel {
    pub tweet_id: u64,
    pub relevant: bool,
    pub polarity: Option<Polarity>,
    pub typeface: Option<Typeface>,
    pub relevance_ratio: VoteRatio,
    pub polarity_ratio: Option<VoteRatio>,
    pub typeface_ratio: Option<VoteRatio>,
    /// Any of the three decisions needed a random draw.
    pub tie_broken: bool,
}

pub fn amalgamate(ballots: &[Ballot], seed: u64) -> Result<GoldLabel, VoteError> {
    let relevance = amalgamate_relevance(ballots, seed)?;
    let polarity = amalgamate_polarity(ballots, relevance.winner, seed)?;
    let typeface = amalgamate_typeface(ballots, seed)?;
    let tie_broken = relevance.tie_broken
        || polarity.as_ref().is_some_and(|v| v.tie_broken)
        || typeface.as_ref().is_some_and(|v| v.tie_broken);
    Ok(GoldLabel {
        tweet_id: ballots[0].tweet_id,
        relevant: relevance.winner,
        polarity: polarity.as_ref().map(|v| v.winner),
        typeface: typeface.as_ref().map(|v| v.winner),
        relevance_ratio: relevance.ratio,
        polarity_ratio: polarity.map(|v| v.ratio),
        typeface_ratio: typeface.map(|v| v.ratio),
        tie_broken,
    })
}

/// Groups ballots by tweet id (ascending).
pub fn group_by_tweet(ballots: &[Ballot]) -> BTreeMap<u64, Vec<Ballot>> {
    let mut groups: BTreeMap<u64, Vec<Ballot>> = BTreeMap::new();
    for b in ballots {
        groups.entry(b.tweet_id).or_default().push(*b);
    }
    groups
}

/// Gold labels for every tweet, ordered by tweet id.
pub fn amalgamate_all(ballots: &[Ballot], seed: u64) -> Result<Vec<GoldLabel>, VoteError> {
    group_by_tweet(ballots)
        .values()
        .map(|group| amalgamate(group, seed))
        .collect()
}
