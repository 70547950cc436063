//! Synthetic tweet archives and labeler panels with known ground truth.
//! Used for the sample corpus, tests and throughput runs.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::annotation::{Ballot, GoldLabel, VoteRatio};
use crate::ingest::format_twitter_time;
use crate::labels::{Language, Polarity, Typeface};
use crate::text::TypefaceTable;

const EN_TAGS: &[&str] = &[
    "#China70years",
    "#NationalDay",
    "#PRC70",
    "#China",
    "#Beijing",
];
const ZH_TAGS: &[&str] = &["#国庆", "#中国", "#阅兵", "#北京"];

const EN_ON: &[&str] = &[
    "china",
    "beijing",
    "prc",
    "parade",
    "tiananmen",
    "anniversary",
    "70th",
    "motherland",
    "cpc",
    "pla",
    "national day",
    "military parade",
    "xinhua",
    "cctv",
    "chang'an avenue",
];
const EN_OFF: &[&str] = &[
    "france",
    "french",
    "bastille",
    "nigeria",
    "bitcoin",
    "giveaway",
    "football",
    "crypto",
    "followers",
    "promo",
    "recipe",
    "stadium",
    "lagos",
    "casino",
    "horoscope",
];
const EN_POS: &[&str] = &[
    "happy",
    "proud",
    "congratulations",
    "glory",
    "celebrate",
    "wonderful",
    "prosperity",
    "best wishes",
    "blessed",
    "amazing",
    "kudos",
    "hurrah",
    "splendour",
    "woohoo",
    "beautiful",
];
const EN_NEG: &[&str] = &[
    "shame",
    "oppression",
    "crackdown",
    "tyranny",
    "sad",
    "brutal",
    "censorship",
    "tear gas",
    "dystopia",
    "appalling",
    "gulag",
    "horrible",
    "cruel",
    "persecution",
    "boo",
];
const EN_FACT: &[&str] = &[
    "starts at 10:00",
    "live broadcast",
    "schedule",
    "route",
    "update",
    "announced",
    "ceremony",
    "tv coverage",
    "stream",
    "this morning",
    "roads closed",
    "metro",
    "program",
    "timetable",
    "press briefing",
];
const EN_FILLER: &[&str] = &[
    "the", "a", "of", "in", "on", "for", "and", "today", "people", "city", "time", "everyone",
    "year", "news", "see",
];

const ZH_ON: &[&str] = &[
    "中国",
    "国庆",
    "祖国",
    "阅兵",
    "天安门",
    "七十周年",
    "共和国",
    "建国",
    "国旗",
    "北京",
    "华诞",
    "五星红旗",
    "解放军",
    "方阵",
    "新中国",
];
const ZH_OFF: &[&str] = &[
    "法国",
    "独立日",
    "代购",
    "优惠",
    "促销",
    "比特币",
    "博彩",
    "足球",
    "减肥",
    "美食",
    "星座",
    "偶像",
    "电影",
    "兼职",
    "招聘",
];
const ZH_POS: &[&str] = &[
    "快乐",
    "自豪",
    "骄傲",
    "祝福",
    "繁荣昌盛",
    "伟大",
    "万岁",
    "幸福",
    "辉煌",
    "激动",
    "感动",
    "美好",
    "壮观",
    "精彩",
    "热烈",
];
const ZH_NEG: &[&str] = &[
    "悲哀",
    "暴力",
    "镇压",
    "独裁",
    "耻辱",
    "黑暗",
    "恐怖",
    "痛苦",
    "谎言",
    "专制",
    "愤怒",
    "压迫",
    "可耻",
    "绝望",
    "催泪弹",
];
const ZH_FACT: &[&str] = &[
    "直播",
    "时间表",
    "上午十点",
    "开始",
    "路线",
    "交通管制",
    "地铁",
    "通知",
    "公告",
    "安排",
    "报道",
    "消息",
    "现场",
    "电视",
    "转播",
];
const ZH_FILLER: &[&str] = &[
    "今天", "大家", "我们", "这个", "一起", "看到", "现在", "的", "了", "在", "和", "都", "也",
    "人们", "时候",
];

const LOCATIONS: &[(&str, u32)] = &[
    ("Lahore, Pakistan", 6),
    ("Karachi", 3),
    ("Islamabad, Pakistan", 2),
    ("Beijing, China", 6),
    ("Hong Kong", 6),
    ("台北", 3),
    ("上海", 3),
    ("New York, USA", 5),
    ("London, UK", 4),
    ("Toronto, Canada", 2),
    ("Sydney", 2),
    ("Kathmandu, Nepal", 2),
    ("Mumbai, India", 2),
    ("Paris, France", 2),
    ("Tokyo", 2),
    ("Lagos, Nigeria", 1),
    ("Earth", 3),
    ("somewhere over the rainbow", 2),
    ("", 20),
];

const OTHER_TEXTS: &[&str] = &[
    "С днём рождения, Китай!",
    "Поздравляю всех с праздником",
    "おめでとうございます",
    "كل عام والصين بخير",
    "축하합니다 여러분",
];

/// Ground truth for one synthetic tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truth {
    pub relevant: bool,
    /// Present exactly when relevant.
    pub polarity: Option<Polarity>,
    /// Present exactly for Chinese tweets.
    pub typeface: Option<Typeface>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTweet {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub language: Language,
    pub text: String,
    pub user_location: String,
    pub truth: Truth,
}

impl SynthTweet {
    /// Archive-format JSON line.
    pub fn json_line(&self) -> String {
        json!({
            "id": self.id,
            "created_at": format_twitter_time(&self.created_at),
            "text": self.text,
            "lang": match self.language {
                Language::English => "en",
                Language::Chinese => "zh",
                Language::Other => "und",
            },
            "user": {"location": self.user_location},
        })
        .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub english: usize,
    pub chinese: usize,
    pub other: usize,
    pub relevant_share: f64,
    /// Shares of Positive and Negative among relevant tweets; the rest
    /// are Neutral.
    pub positive_share: f64,
    pub negative_share: f64,
    pub traditional_share: f64,
    pub start: DateTime<Utc>,
    pub hours: u32,
    pub first_id: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 2019,
            english: 1000,
            chinese: 1000,
            other: 0,
            relevant_share: 0.7,
            positive_share: 0.4,
            negative_share: 0.25,
            traditional_share: 0.35,
            start: Utc.with_ymd_and_hms(2019, 9, 30, 0, 0, 0).unwrap(),
            hours: 96,
            first_id: 1_178_000_000_000_000_000,
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str], lo: usize, hi: usize) -> Vec<&'a str> {
    let n = rng.gen_range(lo..=hi);
    (0..n)
        .map(|_| *pool.choose(rng).expect("pool is non-empty"))
        .collect()
}

struct Pools {
    tags: &'static [&'static str],
    on: &'static [&'static str],
    off: &'static [&'static str],
    pos: &'static [&'static str],
    neg: &'static [&'static str],
    fact: &'static [&'static str],
    filler: &'static [&'static str],
}

const EN_POOLS: Pools = Pools {
    tags: EN_TAGS,
    on: EN_ON,
    off: EN_OFF,
    pos: EN_POS,
    neg: EN_NEG,
    fact: EN_FACT,
    filler: EN_FILLER,
};

const ZH_POOLS: Pools = Pools {
    tags: ZH_TAGS,
    on: ZH_ON,
    off: ZH_OFF,
    pos: ZH_POS,
    neg: ZH_NEG,
    fact: ZH_FACT,
    filler: ZH_FILLER,
};

fn draw_truth(rng: &mut ChaCha8Rng, cfg: &SynthConfig, lang: Language) -> Truth {
    let relevant = rng.gen_bool(cfg.relevant_share);
    let polarity = relevant.then(|| {
        let x: f64 = rng.gen();
        if x < cfg.positive_share {
            Polarity::Positive
        } else if x < cfg.positive_share + cfg.negative_share {
            Polarity::Negative
        } else {
            Polarity::Neutral
        }
    });
    let typeface = (lang == Language::Chinese).then(|| {
        if rng.gen_bool(cfg.traditional_share) {
            Typeface::Traditional
        } else {
            Typeface::Simplified
        }
    });
    Truth {
        relevant,
        polarity,
        typeface,
    }
}

fn compose(rng: &mut ChaCha8Rng, pools: &Pools, truth: &Truth) -> Vec<&'static str> {
    let mut words = Vec::new();
    if truth.relevant {
        words.extend(pick(rng, pools.on, 1, 2));
    } else {
        words.extend(pick(rng, pools.off, 1, 2));
    }
    let affect = match truth.polarity {
        Some(Polarity::Positive) => Some(pools.pos),
        Some(Polarity::Negative) => Some(pools.neg),
        Some(Polarity::Neutral) => None,
        // Off-topic chatter is sometimes emotional too.
        None => rng.gen_bool(0.4).then(|| {
            if rng.gen_bool(0.5) {
                pools.pos
            } else {
                pools.neg
            }
        }),
    };
    match affect {
        Some(pool) => words.extend(pick(rng, pool, 1, 3)),
        None => words.extend(pick(rng, pools.fact, 1, 3)),
    }
    words.extend(pick(rng, pools.filler, 2, 5));
    words.shuffle(rng);
    words.insert(
        rng.gen_range(0..=words.len()),
        pools.tags.choose(rng).unwrap(),
    );
    words
}

fn location(rng: &mut ChaCha8Rng) -> String {
    LOCATIONS
        .choose_weighted(rng, |l| l.1)
        .expect("weights are positive")
        .0
        .to_string()
}

/// Tweets in id order: English, then Chinese, then Other.
pub fn generate(cfg: &SynthConfig, table: &TypefaceTable) -> Vec<SynthTweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.english + cfg.chinese + cfg.other);
    let span = i64::from(cfg.hours.max(1)) * 3600;
    let plan = [
        (Language::English, cfg.english),
        (Language::Chinese, cfg.chinese),
        (Language::Other, cfg.other),
    ];
    for (lang, n) in plan {
        for _ in 0..n {
            let id = cfg.first_id + out.len() as u64;
            let created_at = cfg.start + Duration::seconds(rng.gen_range(0..span));
            let (text, truth) = match lang {
                Language::English => {
                    let truth = draw_truth(&mut rng, cfg, lang);
                    let mut text = compose(&mut rng, &EN_POOLS, &truth).join(" ");
                    if rng.gen_bool(0.3) {
                        text.push('!');
                    }
                    (text, truth)
                }
                Language::Chinese => {
                    let truth = draw_truth(&mut rng, cfg, lang);
                    let words = compose(&mut rng, &ZH_POOLS, &truth);
                    let mut text = String::new();
                    for (i, w) in words.iter().enumerate() {
                        if w.starts_with('#') {
                            text.push_str(&format!(" {w} "));
                        } else {
                            text.push_str(w);
                            if i % 3 == 2 {
                                text.push('，');
                            }
                        }
                    }
                    text.push('！');
                    if truth.typeface == Some(Typeface::Traditional) {
                        text = table.to_traditional(&text);
                    }
                    (text.trim().to_string(), truth)
                }
                Language::Other => {
                    let truth = Truth {
                        relevant: false,
                        polarity: None,
                        typeface: None,
                    };
                    let text = format!(
                        "{} {}",
                        OTHER_TEXTS.choose(&mut rng).unwrap(),
                        EN_TAGS.choose(&mut rng).unwrap()
                    );
                    (text, truth)
                }
            };
            out.push(SynthTweet {
                id,
                created_at,
                language: lang,
                text,
                user_location: location(&mut rng),
                truth,
            });
        }
    }
    out
}

/// Archive lines for `tweets`, plus some lines the ingester must reject:
/// tweets without a study hashtag, repeated ids and malformed records.
pub fn archive_lines(tweets: &[SynthTweet], seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let mut lines = Vec::with_capacity(tweets.len() + tweets.len() / 10);
    for (i, t) in tweets.iter().enumerate() {
        lines.push(t.json_line());
        if i % 50 == 7 {
            lines.push(t.json_line());
        }
        if i % 40 == 3 {
            let stray = SynthTweet {
                id: t.id + 500_000_000,
                text: "just had lunch with friends, nice weather".into(),
                ..t.clone()
            };
            lines.push(stray.json_line());
        }
        if i % 97 == 11 {
            lines.push(if rng.gen_bool(0.5) {
                "{\"id\": 1, \"text\": ".to_string()
            } else {
                json!({"id": t.id + 900_000_000, "text": "#China"}).to_string()
            });
        }
    }
    lines
}

/// Score a labeler would give for `polarity`.
fn score_for(rng: &mut ChaCha8Rng, polarity: Polarity) -> i8 {
    let strong = rng.gen_bool(0.4);
    match polarity {
        Polarity::Positive => {
            if strong {
                2
            } else {
                1
            }
        }
        Polarity::Neutral => 0,
        Polarity::Negative => {
            if strong {
                -2
            } else {
                -1
            }
        }
    }
}

/// Independent labelers `1..=panel`, each wrong with probability
/// `error_rate` on every decision.
pub fn simulate_ballots(
    tweets: &[SynthTweet],
    panel: u8,
    error_rate: f64,
    seed: u64,
) -> Vec<Ballot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(tweets.len() * usize::from(panel));
    for t in tweets {
        for labeler in 1..=panel {
            let relevant = t.truth.relevant ^ rng.gen_bool(error_rate);
            let score = relevant.then(|| {
                let truth = t.truth.polarity.unwrap_or(Polarity::Neutral);
                let seen = if rng.gen_bool(error_rate) {
                    *Polarity::ALL
                        .iter()
                        .filter(|p| **p != truth)
                        .collect::<Vec<_>>()
                        .choose(&mut rng)
                        .unwrap()
                } else {
                    &truth
                };
                score_for(&mut rng, *seen)
            });
            let typeface = t.truth.typeface.map(|tf| {
                if rng.gen_bool(error_rate) {
                    match tf {
                        Typeface::Simplified => Typeface::Traditional,
                        Typeface::Traditional => Typeface::Simplified,
                    }
                } else {
                    tf
                }
            });
            out.push(
                Ballot::new(t.id, labeler, relevant, score, typeface)
                    .expect("generated ballot is valid"),
            );
        }
    }
    out
}

fn truth_gold(t: &SynthTweet) -> GoldLabel {
    let unanimous = VoteRatio::from_counts(vec![1]);
    GoldLabel {
        tweet_id: t.id,
        relevant: t.truth.relevant,
        polarity: t.truth.polarity,
        typeface: t.truth.typeface,
        relevance_ratio: unanimous.clone(),
        polarity_ratio: t.truth.polarity.map(|_| unanimous.clone()),
        typeface_ratio: t.truth.typeface.map(|_| unanimous.clone()),
        tie_broken: false,
    }
}

/// Gold labels equal to the ground truth.
pub fn true_gold(tweets: &[SynthTweet]) -> Vec<GoldLabel> {
    tweets.iter().map(truth_gold).collect()
}

/// Ground truth with each decision independently replaced by a different
/// value with probability `rate`. A relevance flip to relevant draws a
/// random polarity.
pub fn noisy_gold(tweets: &[SynthTweet], rate: f64, seed: u64) -> Vec<GoldLabel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tweets
        .iter()
        .map(|t| {
            let mut g = truth_gold(t);
            if rng.gen_bool(rate) {
                g.relevant = !g.relevant;
                g.polarity = g.relevant.then(|| *Polarity::ALL.choose(&mut rng).unwrap());
                g.polarity_ratio = g.polarity.map(|_| g.relevance_ratio.clone());
            } else if let Some(p) = g.polarity {
                if rng.gen_bool(rate) {
                    let others: Vec<Polarity> =
                        Polarity::ALL.into_iter().filter(|q| *q != p).collect();
                    g.polarity = Some(*others.choose(&mut rng).unwrap());
                }
            }
            if let Some(tf) = g.typeface {
                if rng.gen_bool(rate) {
                    g.typeface = Some(match tf {
                        Typeface::Simplified => Typeface::Traditional,
                        Typeface::Traditional => Typeface::Simplified,
                    });
                }
            }
            g
        })
        .collect()
}
