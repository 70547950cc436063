use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    amalgamate_polarity, amalgamate_relevance, amalgamate_typeface, collapse_score, score_vote,
    Ballot, RatioClass, VoteError,
};

/// Row of the agreement and dissident tables. Sentiment rows are split by
/// the class of the relevance vote that admitted the tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowKind {
    Relevance,
    /// -2..=2 scale
    Sentiment5 {
        relevance: RatioClass,
    },
    /// positive / neutral / negative
    Sentiment3 {
        relevance: RatioClass,
    },
    Typeface,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = |c: &RatioClass| match c {
            RatioClass::Unanimous => "4:0",
            RatioClass::OneDissent => "3:1",
            RatioClass::EvenSplit => "2:2",
            other => other.header(),
        };
        match self {
            RowKind::Relevance => f.write_str("Relevance"),
            RowKind::Sentiment5 { relevance } => {
                write!(f, "Sentiment -2..+2 | relevance {}", rel(relevance))
            }
            RowKind::Sentiment3 { relevance } => {
                write!(f, "Sentiment pos/neu/neg | relevance {}", rel(relevance))
            }
            RowKind::Typeface => f.write_str("Simplified or traditional"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub kind: RowKind,
    pub counts: BTreeMap<RatioClass, u64>,
}

impl AgreementRow {
    fn new(kind: RowKind) -> Self {
        Self {
            kind,
            counts: RatioClass::COLUMNS.iter().map(|c| (*c, 0)).collect(),
        }
    }

    pub fn count(&self, class: RatioClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    /// Counts in table column order.
    pub fn columns(&self) -> [u64; 5] {
        RatioClass::COLUMNS.map(|c| self.count(c))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Cross-tabulation of vote ratio classes per decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub tweets: u64,
    pub rows: Vec<AgreementRow>,
}

impl AgreementReport {
    pub fn row(&self, kind: RowKind) -> Option<&AgreementRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

fn bump(rows: &mut BTreeMap<RowKind, AgreementRow>, kind: RowKind, class: RatioClass) {
    *rows
        .entry(kind)
        .or_insert_with(|| AgreementRow::new(kind))
        .counts
        .entry(class)
        .or_default() += 1;
}

/// Classifies each tweet's votes into ratio classes. Sentiment rows only
/// count tweets whose amalgamated relevance is true; the typeface row only
/// appears when some ballot carries a typeface.
pub fn build_agreement_report(
    groups: &BTreeMap<u64, Vec<Ballot>>,
    seed: u64,
) -> Result<AgreementReport, VoteError> {
    let mut rows: BTreeMap<RowKind, AgreementRow> = BTreeMap::new();
    rows.insert(RowKind::Relevance, AgreementRow::new(RowKind::Relevance));
    for relevance in [RatioClass::Unanimous, RatioClass::OneDissent] {
        for kind in [
            RowKind::Sentiment5 { relevance },
            RowKind::Sentiment3 { relevance },
        ] {
            rows.insert(kind, AgreementRow::new(kind));
        }
    }

    for ballots in groups.values() {
        let relevance = amalgamate_relevance(ballots, seed)?;
        let rel_class = relevance.ratio.class();
        bump(&mut rows, RowKind::Relevance, rel_class);
        if relevance.winner {
            if let Some(v) = score_vote(ballots, seed)? {
                bump(
                    &mut rows,
                    RowKind::Sentiment5 {
                        relevance: rel_class,
                    },
                    v.ratio.class(),
                );
            }
            if let Some(v) = amalgamate_polarity(ballots, true, seed)? {
                bump(
                    &mut rows,
                    RowKind::Sentiment3 {
                        relevance: rel_class,
                    },
                    v.ratio.class(),
                );
            }
        }
        if let Some(v) = amalgamate_typeface(ballots, seed)? {
            bump(&mut rows, RowKind::Typeface, v.ratio.class());
        }
    }

    Ok(AgreementReport {
        tweets: groups.len() as u64,
        rows: rows.into_values().collect(),
    })
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label_width = self
            .rows
            .iter()
            .map(|r| r.kind.to_string().chars().count())
            .max()
            .unwrap_or(8)
            .max(8);
        write!(f, "{:<label_width$}", "Decision")?;
        for c in RatioClass::COLUMNS {
            write!(f, " {:>15}", c.header())?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:<label_width$}", row.kind.to_string())?;
            for n in row.columns() {
                write!(f, " {n:>15}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissidentEntry {
    pub kind: RowKind,
    /// 3:1 / 2:1 votes the labeler took part in.
    pub contested: u64,
    /// Of those, how often the labeler was the lone dissenter.
    pub minority: u64,
    /// `minority / contested`; absent when `contested` is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissidentReport {
    pub labeler_id: u8,
    pub entries: Vec<DissidentEntry>,
    pub total_contested: u64,
    pub total_minority: u64,
    pub overall_ratio: f64,
}

impl DissidentReport {
    pub fn entry(&self, kind: RowKind) -> Option<&DissidentEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

/// How often `labeler` was the lone dissenter in the contested (3:1 or 2:1)
/// votes it took part in. Sentiment uses the three-way scheme; a labeler who
/// judged the tweet irrelevant has no sentiment vote.
pub fn build_dissident_report(
    labeler: u8,
    groups: &BTreeMap<u64, Vec<Ballot>>,
    seed: u64,
) -> Result<DissidentReport, VoteError> {
    let mut tally: BTreeMap<RowKind, (u64, u64)> = BTreeMap::new();
    tally.insert(RowKind::Relevance, (0, 0));
    for relevance in [RatioClass::Unanimous, RatioClass::OneDissent] {
        tally.insert(RowKind::Sentiment3 { relevance }, (0, 0));
    }
    let mut record = |kind: RowKind, dissent: bool| {
        let e = tally.entry(kind).or_default();
        e.0 += 1;
        e.1 += u64::from(dissent);
    };

    let mut any_typeface = false;
    for ballots in groups.values() {
        let Some(mine) = ballots.iter().find(|b| b.labeler_id == labeler) else {
            continue;
        };
        let relevance = amalgamate_relevance(ballots, seed)?;
        let rel_class = relevance.ratio.class();
        if rel_class == RatioClass::OneDissent {
            record(RowKind::Relevance, mine.relevant != relevance.winner);
        }
        if let (true, true, Some(score)) = (relevance.winner, mine.relevant, mine.score) {
            let vote = amalgamate_polarity(ballots, true, seed)?.expect("relevant tweet");
            if vote.ratio.class() == RatioClass::OneDissent {
                let own = collapse_score(score.into())?;
                record(
                    RowKind::Sentiment3 {
                        relevance: rel_class,
                    },
                    own != vote.winner,
                );
            }
        }
        if let Some(vote) = amalgamate_typeface(ballots, seed)? {
            any_typeface = true;
            if let (Some(own), RatioClass::OneDissent) = (mine.typeface, vote.ratio.class()) {
                record(RowKind::Typeface, own != vote.winner);
            }
        }
    }
    if any_typeface {
        tally.entry(RowKind::Typeface).or_default();
    }

    let total_contested: u64 = tally.values().map(|t| t.0).sum();
    let total_minority: u64 = tally.values().map(|t| t.1).sum();
    if total_contested == 0 {
        return Err(VoteError::NoContestedVotes(labeler));
    }
    let entries = tally
        .into_iter()
        .map(|(kind, (contested, minority))| DissidentEntry {
            kind,
            contested,
            minority,
            ratio: (contested > 0).then(|| minority as f64 / contested as f64),
        })
        .collect();
    Ok(DissidentReport {
        labeler_id: labeler,
        entries,
        total_contested,
        total_minority,
        overall_ratio: total_minority as f64 / total_contested as f64,
    })
}

impl fmt::Display for DissidentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Labeler {} as dissident", self.labeler_id)?;
        writeln!(
            f,
            "{:<40} {:>10} {:>10} {:>8}",
            "Decision", "contested", "dissents", "ratio"
        )?;
        for e in &self.entries {
            let ratio = e
                .ratio
                .map_or_else(|| "-".to_string(), |r| format!("{:.1}%", r * 100.0));
            writeln!(
                f,
                "{:<40} {:>10} {:>10} {:>8}",
                e.kind.to_string(),
                e.contested,
                e.minority,
                ratio
            )?;
        }
        writeln!(
            f,
            "{:<40} {:>10} {:>10} {:>7.1}%",
            "Overall",
            self.total_contested,
            self.total_minority,
            self.overall_ratio * 100.0
        )
    }
}

#[cfg(test)]
mod tests {
    use super::super::group_by_tweet;
    use super::*;
    use crate::labels::Typeface;

    /// `(relevant, score)` per labeler 1..=4.
    fn tweet(id: u64, votes: &[(bool, Option<i8>)]) -> Vec<Ballot> {
        votes
            .iter()
            .enumerate()
            .map(|(i, &(r, s))| Ballot::new(id, i as u8 + 1, r, s, None).unwrap())
            .collect()
    }

    const Y: bool = true;
    const N: bool = false;

    /// Twelve tweets whose table was counted by hand:
    ///
    /// relevance: 4:0 ×8 (t1–t7 relevant, t8 irrelevant), 3:1 ×3 (t9, t10
    /// relevant; t11 irrelevant), 2:2 ×1 (t12).
    /// 5-way | 4:0: t1 4:0, t2 3:1, t3 2:2, t4 2:1:1, t5 1:1:1:1, t6 3:1, t7 2:2
    /// 3-way | 4:0: t1 4:0, t2 4:0, t3 4:0, t4 3:1, t5 2:1:1, t6 3:1, t7 2:2
    /// 5-way | 3:1: t9 3:0, t10 1:1:1;  3-way | 3:1: t9 3:0, t10 2:1
    fn micro_fixture() -> Vec<Ballot> {
        let s = |v: i8| (Y, Some(v));
        let mut all = Vec::new();
        all.extend(tweet(1, &[s(2), s(2), s(2), s(2)]));
        all.extend(tweet(2, &[s(2), s(2), s(2), s(1)]));
        all.extend(tweet(3, &[s(2), s(2), s(1), s(1)]));
        all.extend(tweet(4, &[s(2), s(2), s(1), s(0)]));
        all.extend(tweet(5, &[s(2), s(1), s(0), s(-1)]));
        all.extend(tweet(6, &[s(-1), s(-1), s(-1), s(0)]));
        all.extend(tweet(7, &[s(1), s(1), s(-2), s(-2)]));
        all.extend(tweet(8, &[(N, None); 4]));
        all.extend(tweet(9, &[s(0), s(0), (N, None), s(0)]));
        all.extend(tweet(10, &[s(2), (N, None), s(1), s(-1)]));
        all.extend(tweet(11, &[(N, None), (N, None), s(1), (N, None)]));
        all.extend(tweet(12, &[s(1), s(1), (N, None), (N, None)]));
        all
    }

    #[test]
    fn micro_fixture_matches_hand_count() {
        let groups = group_by_tweet(&micro_fixture());
        let report = build_agreement_report(&groups, 3).unwrap();
        let row = |k| report.row(k).unwrap().columns();
        let u = RatioClass::Unanimous;
        let od = RatioClass::OneDissent;
        assert_eq!(row(RowKind::Relevance), [8, 3, 1, 0, 0]);
        assert_eq!(row(RowKind::Sentiment5 { relevance: u }), [1, 2, 2, 1, 1]);
        assert_eq!(row(RowKind::Sentiment3 { relevance: u }), [3, 2, 1, 1, 0]);
        assert_eq!(row(RowKind::Sentiment5 { relevance: od }), [1, 0, 0, 0, 1]);
        assert_eq!(row(RowKind::Sentiment3 { relevance: od }), [1, 1, 0, 0, 0]);
        assert!(report.row(RowKind::Typeface).is_none());
        for r in &report.rows {
            if r.kind == RowKind::Relevance {
                assert_eq!(r.total(), 12);
            }
        }
    }

    #[test]
    fn unanimous_panel_fills_first_column() {
        let mut all = Vec::new();
        for id in 0..20 {
            all.extend(tweet(id, &[(Y, Some(1)); 4]));
        }
        let report = build_agreement_report(&group_by_tweet(&all), 0).unwrap();
        for row in &report.rows {
            assert_eq!(row.columns()[1..], [0, 0, 0, 0]);
        }
        assert_eq!(report.row(RowKind::Relevance).unwrap().columns()[0], 20);
    }

    #[test]
    fn dissident_on_micro_fixture() {
        let groups = group_by_tweet(&micro_fixture());
        let r = build_dissident_report(2, &groups, 3).unwrap();
        // Relevance 3:1 votes: t9, t10 (labeler 2 dissents), t11 (with majority).
        let rel = r.entry(RowKind::Relevance).unwrap();
        assert_eq!((rel.contested, rel.minority), (3, 1));
        // 3-way 3:1 votes in 4:0 tweets: t4 (with majority), t6 (with majority).
        let s = r
            .entry(RowKind::Sentiment3 {
                relevance: RatioClass::Unanimous,
            })
            .unwrap();
        assert_eq!((s.contested, s.minority), (2, 0));
        // t10 is 2:1 but labeler 2 judged it irrelevant, so it does not count.
        let s = r
            .entry(RowKind::Sentiment3 {
                relevance: RatioClass::OneDissent,
            })
            .unwrap();
        assert_eq!((s.contested, s.minority), (0, 0));
        assert_eq!(s.ratio, None);
        assert_eq!((r.total_contested, r.total_minority), (5, 1));
        assert!((r.overall_ratio - 0.2).abs() < 1e-12);
    }

    #[test]
    fn dissident_always_in_majority() {
        let mut all = Vec::new();
        for id in 0..5 {
            all.extend(tweet(
                id,
                &[(Y, Some(1)), (Y, Some(1)), (Y, Some(1)), (N, None)],
            ));
        }
        let r = build_dissident_report(1, &group_by_tweet(&all), 0).unwrap();
        assert_eq!(r.overall_ratio, 0.0);
        assert!(r.entries.iter().all(|e| e.ratio.is_none_or(|x| x == 0.0)));
    }

    #[test]
    fn dissident_half() {
        let mut all = Vec::new();
        all.extend(tweet(
            1,
            &[(Y, Some(1)), (Y, Some(1)), (Y, Some(1)), (N, None)],
        ));
        all.extend(tweet(
            2,
            &[(N, None), (Y, Some(1)), (Y, Some(1)), (Y, Some(1))],
        ));
        let r = build_dissident_report(1, &group_by_tweet(&all), 0).unwrap();
        let rel = r.entry(RowKind::Relevance).unwrap();
        assert_eq!(rel.ratio, Some(0.5));
        assert_eq!(r.overall_ratio, 0.5);
    }

    #[test]
    fn dissident_needs_contested_votes() {
        let all = tweet(1, &[(Y, Some(1)); 4]);
        assert!(matches!(
            build_dissident_report(1, &group_by_tweet(&all), 0),
            Err(VoteError::NoContestedVotes(1))
        ));
    }

    #[test]
    fn typeface_row_and_dissent() {
        use Typeface::{Simplified as S, Traditional as T};
        let mut all = Vec::new();
        for (id, faces) in [(1u64, [S, S, S, T]), (2, [S, T, T, T]), (3, [T, T, T, T])] {
            for (i, f) in faces.iter().enumerate() {
                all.push(Ballot::new(id, i as u8 + 1, true, Some(0), Some(*f)).unwrap());
            }
        }
        let groups = group_by_tweet(&all);
        let report = build_agreement_report(&groups, 0).unwrap();
        assert_eq!(
            report.row(RowKind::Typeface).unwrap().columns(),
            [1, 2, 0, 0, 0]
        );
        let r = build_dissident_report(1, &groups, 0).unwrap();
        let e = r.entry(RowKind::Typeface).unwrap();
        assert_eq!((e.contested, e.minority), (2, 1));
    }
}
