use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Ballot, GoldLabel, VoteError, VoteRatio};
use crate::labels::{Polarity, Typeface};

#[derive(Debug, Deserialize, Serialize)]
struct BallotRow {
    tweet_id: u64,
    labeler_id: u8,
    relevant: String,
    score: String,
    typeface: String,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" => Some(false),
        _ => None,
    }
}

fn bad(line: u64, message: impl Into<String>) -> VoteError {
    VoteError::BadRecord {
        line,
        message: message.into(),
    }
}

/// Reads `tweet_id,labeler_id,relevant,score,typeface`; empty cells are
/// absent values.
pub fn read_ballots<R: Read>(reader: R) -> Result<Vec<Ballot>, VoteError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<BallotRow>() {
        let row = row?;
        // Header is line 1; serde rows start at line 2.
        let line = out.len() as u64 + 2;
        let relevant = parse_bool(&row.relevant)
            .ok_or_else(|| bad(line, format!("relevant `{}`", row.relevant)))?;
        let score = match row.score.trim() {
            "" => None,
            s => Some(
                s.trim_start_matches('+')
                    .parse::<i8>()
                    .map_err(|_| bad(line, format!("score `{s}`")))?,
            ),
        };
        let typeface = match row.typeface.trim() {
            "" => None,
            t => Some(t.parse::<Typeface>().map_err(|e| bad(line, e))?),
        };
        out.push(Ballot::new(
            row.tweet_id,
            row.labeler_id,
            relevant,
            score,
            typeface,
        )?);
    }
    Ok(out)
}

pub fn write_ballots<W: Write>(writer: W, ballots: &[Ballot]) -> Result<(), VoteError> {
    let mut w = csv::Writer::from_writer(writer);
    for b in ballots {
        w.serialize(BallotRow {
            tweet_id: b.tweet_id,
            labeler_id: b.labeler_id,
            relevant: b.relevant.to_string(),
            score: b.score.map(|s| s.to_string()).unwrap_or_default(),
            typeface: b.typeface.map(|t| t.code().to_string()).unwrap_or_default(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize, Serialize)]
struct GoldRow {
    tweet_id: u64,
    relevant: bool,
    polarity: String,
    typeface: String,
    relevance_ratio: String,
    polarity_ratio: String,
    typeface_ratio: String,
    tie_broken: bool,
}

fn opt_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_gold<W: Write>(writer: W, labels: &[GoldLabel]) -> Result<(), VoteError> {
    let mut w = csv::Writer::from_writer(writer);
    for g in labels {
        w.serialize(GoldRow {
            tweet_id: g.tweet_id,
            relevant: g.relevant,
            polarity: opt_string(&g.polarity),
            typeface: g.typeface.map(|t| t.name().to_string()).unwrap_or_default(),
            relevance_ratio: g.relevance_ratio.to_string(),
            polarity_ratio: opt_string(&g.polarity_ratio),
            typeface_ratio: opt_string(&g.typeface_ratio),
            tie_broken: g.tie_broken,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gold<R: Read>(reader: R) -> Result<Vec<GoldLabel>, VoteError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<GoldRow>() {
        let row = row?;
        let line = out.len() as u64 + 2;
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        let polarity = opt(&row.polarity)
            .map(|p| p.parse::<Polarity>())
            .transpose()
            .map_err(|e| bad(line, e))?;
        let typeface = opt(&row.typeface)
            .map(|t| t.parse::<Typeface>())
            .transpose()
            .map_err(|e| bad(line, e))?;
        let ratio = |s: &str| s.parse::<VoteRatio>().map_err(|e| bad(line, e));
        out.push(GoldLabel {
            tweet_id: row.tweet_id,
            relevant: row.relevant,
            polarity,
            typeface,
            relevance_ratio: ratio(&row.relevance_ratio)?,
            polarity_ratio: opt(&row.polarity_ratio).map(|s| ratio(&s)).transpose()?,
            typeface_ratio: opt(&row.typeface_ratio).map(|s| ratio(&s)).transpose()?,
            tie_broken: row.tie_broken,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::amalgamate_all;
    use super::*;

    const SAMPLE: &str = "tweet_id,labeler_id,relevant,score,typeface
1,1,true,2,S
1,2,true,+1,S
1,3,false,,T
1,4,true,0,S
2,1,false,,
2,2,false,,
";

    #[test]
    fn reads_optional_cells() {
        let ballots = read_ballots(SAMPLE.as_bytes()).unwrap();
        assert_eq!(ballots.len(), 6);
        assert_eq!(ballots[1].score, Some(1));
        assert_eq!(ballots[2].score, None);
        assert_eq!(ballots[2].typeface, Some(Typeface::Traditional));
        assert_eq!(ballots[4].typeface, None);
    }

    #[test]
    fn rejects_bad_cells() {
        let text = "tweet_id,labeler_id,relevant,score,typeface\n1,1,maybe,,\n";
        assert!(matches!(
            read_ballots(text.as_bytes()),
            Err(VoteError::BadRecord { line: 2, .. })
        ));
        let text = "tweet_id,labeler_id,relevant,score,typeface\n1,1,true,5,\n";
        assert!(matches!(
            read_ballots(text.as_bytes()),
            Err(VoteError::OutOfRange(5))
        ));
        let text = "tweet_id,labeler_id,relevant,score,typeface\n1,1,false,1,\n";
        assert!(matches!(
            read_ballots(text.as_bytes()),
            Err(VoteError::ScoreWithoutRelevance { .. })
        ));
    }

    #[test]
    fn gold_round_trip() {
        let ballots = read_ballots(SAMPLE.as_bytes()).unwrap();
        let gold = amalgamate_all(&ballots, 42).unwrap();
        let mut buf = Vec::new();
        write_gold(&mut buf, &gold).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "tweet_id,relevant,polarity,typeface,relevance_ratio,polarity_ratio,typeface_ratio,tie_broken\n"
        ));
        assert!(text.contains("1,true,Positive,Simplified,3:1,2:1,3:1,false\n"));
        assert_eq!(read_gold(buf.as_slice()).unwrap(), gold);

        let mut again = Vec::new();
        write_ballots(&mut again, &ballots).unwrap();
        assert_eq!(read_ballots(again.as_slice()).unwrap(), ballots);
    }
}
