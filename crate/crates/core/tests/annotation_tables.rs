//! Ballot sets built to hit every cell of the published agreement and
//! labeler-2 dissent tables, run through the report builders.

use tweetmood::annotation::{
    build_agreement_report, build_dissident_report, group_by_tweet, Ballot, RatioClass, RowKind,
};
use tweetmood::labels::Typeface;

const L2: usize = 1;

/// Sentiment patterns over four scored ballots. Where the three-way vote
/// is 3:1, the odd one out sits last.
const U5U3: [i8; 4] = [1, 1, 1, 1];
const D5U3: [i8; 4] = [1, 1, 1, 2];
const D5D3: [i8; 4] = [1, 1, 1, 0];
const E5U3: [i8; 4] = [1, 1, 2, 2];
const E5E3: [i8; 4] = [1, 1, 0, 0];
const T5D3: [i8; 4] = [1, 2, 1, 0];
const T5T3: [i8; 4] = [1, 1, 0, -1];
const A5T3: [i8; 4] = [2, 1, 0, -1];

/// Same over three ballots; a 2:1 dissenter sits last.
const U3: [i8; 3] = [1, 1, 1];
const D3U: [i8; 3] = [1, 1, 2];
const D3D: [i8; 3] = [1, 1, 0];
const A3D: [i8; 3] = [2, 1, 0];
const A3A: [i8; 3] = [1, 0, -1];

#[derive(Default)]
struct Builder {
    ballots: Vec<Ballot>,
    next: u64,
    chinese: bool,
    /// Typeface votes handed out in order, one set per tweet.
    typefaces: Vec<[Typeface; 4]>,
}

impl Builder {
    fn tweet(&mut self, relevant: [bool; 4], scores: [Option<i8>; 4]) {
        let id = self.next;
        self.next += 1;
        let tf = self.chinese.then(|| self.typefaces[id as usize]);
        for i in 0..4 {
            self.ballots.push(
                Ballot::new(id, i as u8 + 1, relevant[i], scores[i], tf.map(|t| t[i])).unwrap(),
            );
        }
    }

    /// Four relevant ballots; when `l2_dissents`, labeler 2 takes the odd
    /// score.
    fn relevant4(&mut self, pattern: [i8; 4], n: usize, l2_dissents: usize) {
        for k in 0..n {
            let mut p = pattern;
            if k < l2_dissents {
                p.swap(L2, 3);
            }
            self.tweet([true; 4], p.map(Some));
        }
    }

    /// Three relevant ballots and one irrelevant. `absent` is the labeler
    /// (0-based) voting irrelevant; `l2_dissents` of the tweets give labeler
    /// 2 the odd score.
    fn relevant3(&mut self, pattern: [i8; 3], n: usize, l2_dissents: usize, absent: usize) {
        for k in 0..n {
            let mut order: Vec<usize> = (0..4).filter(|&i| i != absent).collect();
            if k < l2_dissents {
                let pos = order
                    .iter()
                    .position(|&i| i == L2)
                    .expect("labeler 2 takes part");
                order.swap(pos, 2);
            }
            let mut relevant = [true; 4];
            relevant[absent] = false;
            let mut scores = [None; 4];
            for (slot, &who) in order.iter().enumerate() {
                scores[who] = Some(pattern[slot]);
            }
            self.tweet(relevant, scores);
        }
    }

    fn irrelevant(&mut self, n: usize) {
        for _ in 0..n {
            self.tweet([false; 4], [None; 4]);
        }
    }

    /// Three irrelevant ballots and one relevant from `dissenter`.
    fn irrelevant3(&mut self, n: usize, dissenter: usize) {
        for _ in 0..n {
            let mut relevant = [false; 4];
            relevant[dissenter] = true;
            let mut scores = [None; 4];
            scores[dissenter] = Some(1);
            self.tweet(relevant, scores);
        }
    }

    fn split(&mut self, n: usize) {
        for _ in 0..n {
            self.tweet([true, true, false, false], [Some(1), Some(1), None, None]);
        }
    }
}

fn english() -> Vec<Ballot> {
    let mut b = Builder::default();
    // Relevance 4:0, relevant: 313 tweets.
    b.relevant4(U5U3, 53, 0);
    b.relevant4(D5U3, 108, 0);
    b.relevant4(D5D3, 56, 20);
    b.relevant4(E5U3, 41, 0);
    b.relevant4(E5E3, 23, 0);
    b.relevant4(T5D3, 25, 0);
    b.relevant4(T5T3, 6, 0);
    b.relevant4(A5T3, 1, 0);
    b.irrelevant(567);
    // Relevance 3:1, relevant: 71 tweets, labeler 4 dissenting.
    b.relevant3(U3, 12, 0, 3);
    b.relevant3(D3U, 29, 0, 3);
    b.relevant3(D3D, 24, 11, 3);
    b.relevant3(A3D, 5, 0, 3);
    b.relevant3(A3A, 1, 0, 3);
    // Relevance 3:1, irrelevant: 21 tweets.
    b.irrelevant3(6, L2);
    b.irrelevant3(15, 0);
    b.split(28);
    assert_eq!(b.next, 1000);
    b.ballots
}

fn chinese() -> Vec<Ballot> {
    use Typeface::{Simplified as S, Traditional as T};
    let mut typefaces = Vec::new();
    typefaces.extend(std::iter::repeat_n([S, S, S, S], 942));
    typefaces.extend(std::iter::repeat_n([S, T, S, S], 4));
    typefaces.extend(std::iter::repeat_n([S, S, T, S], 39));
    typefaces.extend(std::iter::repeat_n([S, S, T, T], 14));
    let mut b = Builder {
        chinese: true,
        typefaces,
        ..Builder::default()
    };
    // Relevance 4:0, relevant: 379 tweets.
    b.relevant4(U5U3, 98, 0);
    b.relevant4(D5U3, 146, 0);
    b.relevant4(D5D3, 13, 13);
    b.relevant4(E5U3, 65, 0);
    b.relevant4(E5E3, 17, 0);
    b.relevant4(T5D3, 35, 10);
    b.relevant4(T5T3, 2, 0);
    b.relevant4(A5T3, 3, 0);
    b.irrelevant(441);
    // Relevance 3:1, relevant: 79 tweets. In five of the 2:1 sentiment
    // votes labeler 2 was the one who judged the tweet irrelevant.
    b.relevant3(U3, 17, 0, 3);
    b.relevant3(D3U, 34, 0, 3);
    b.relevant3(D3D, 12, 11, 3);
    b.relevant3(D3D, 5, 0, L2);
    b.relevant3(A3D, 7, 0, 3);
    b.relevant3(A3A, 4, 0, 3);
    // Relevance 3:1, irrelevant: 41 tweets.
    b.irrelevant3(13, L2);
    b.irrelevant3(28, 0);
    b.split(59);
    assert_eq!(b.next, 999);
    b.ballots
}

fn rel(class: RatioClass) -> RowKind {
    RowKind::Sentiment5 { relevance: class }
}

fn rel3(class: RatioClass) -> RowKind {
    RowKind::Sentiment3 { relevance: class }
}

#[test]
fn english_agreement_table() {
    let groups = group_by_tweet(&english());
    let report = build_agreement_report(&groups, 42).unwrap();
    let row = |k| report.row(k).unwrap().columns();
    assert_eq!(report.tweets, 1000);
    assert_eq!(row(RowKind::Relevance), [880, 92, 28, 0, 0]);
    assert_eq!(row(rel(RatioClass::Unanimous)), [53, 164, 64, 31, 1]);
    assert_eq!(row(rel(RatioClass::OneDissent)), [12, 53, 0, 0, 6]);
    assert_eq!(row(rel3(RatioClass::Unanimous)), [202, 81, 23, 7, 0]);
    assert_eq!(row(rel3(RatioClass::OneDissent)), [41, 29, 0, 0, 1]);
    assert!(report.row(RowKind::Typeface).is_none());
}

#[test]
fn chinese_agreement_table() {
    let groups = group_by_tweet(&chinese());
    let report = build_agreement_report(&groups, 42).unwrap();
    let row = |k| report.row(k).unwrap().columns();
    assert_eq!(row(RowKind::Relevance), [820, 120, 59, 0, 0]);
    assert_eq!(row(rel(RatioClass::Unanimous)), [98, 159, 82, 37, 3]);
    assert_eq!(row(rel(RatioClass::OneDissent)), [17, 51, 0, 0, 11]);
    assert_eq!(row(rel3(RatioClass::Unanimous)), [309, 48, 17, 5, 0]);
    assert_eq!(row(rel3(RatioClass::OneDissent)), [51, 24, 0, 0, 4]);
    assert_eq!(row(RowKind::Typeface), [942, 43, 14, 0, 0]);
}

fn pct(r: Option<f64>) -> String {
    format!("{:.1}", r.unwrap() * 100.0)
}

#[test]
fn labeler_two_dissent() {
    let en = build_dissident_report(2, &group_by_tweet(&english()), 42).unwrap();
    let zh = build_dissident_report(2, &group_by_tweet(&chinese()), 42).unwrap();
    let cell = |r: &tweetmood::annotation::DissidentReport, k| {
        let e = r.entry(k).unwrap();
        (e.contested, e.minority, pct(e.ratio))
    };
    let s = |c: u64, m: u64, p: &str| (c, m, p.to_string());
    assert_eq!(cell(&en, RowKind::Relevance), s(92, 6, "6.5"));
    assert_eq!(cell(&en, rel3(RatioClass::Unanimous)), s(81, 20, "24.7"));
    assert_eq!(cell(&en, rel3(RatioClass::OneDissent)), s(29, 11, "37.9"));
    assert_eq!(cell(&zh, RowKind::Relevance), s(120, 18, "15.0"));
    assert_eq!(cell(&zh, rel3(RatioClass::Unanimous)), s(48, 23, "47.9"));
    assert_eq!(cell(&zh, rel3(RatioClass::OneDissent)), s(19, 11, "57.9"));
    assert_eq!(cell(&zh, RowKind::Typeface), s(43, 4, "9.3"));

    let minority = en.total_minority + zh.total_minority;
    let contested = en.total_contested + zh.total_contested;
    assert_eq!((minority, contested), (93, 432));
    assert_eq!(pct(Some(minority as f64 / contested as f64)), "21.5");
}

#[test]
fn tables_do_not_depend_on_seed_outside_ties() {
    let groups = group_by_tweet(&english());
    let a = build_agreement_report(&groups, 1).unwrap();
    let b = build_agreement_report(&groups, 2).unwrap();
    for kind in [
        RowKind::Relevance,
        rel(RatioClass::Unanimous),
        rel3(RatioClass::OneDissent),
    ] {
        assert_eq!(a.row(kind), b.row(kind));
    }
}
