//! Stage-level glue shared by the command line and the tests: training
//! sets, held-out evaluation, corpus classification and the aggregate
//! outputs.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aggregation::{
    bucket_hourly, country_scores, resolve_country, AggregateError, ClassifiedTweet, CountryReport,
    SentimentSeries, WordFreqReport,
};
use crate::annotation::GoldLabel;
use crate::classify::{
    classify_cascade, hybrid_decide, task_lexicon, train_hybrid, training_label, CascadeOutcome,
    ClassifyError, HybridClassifier, ModelBundle, Task,
};
use crate::config::{Config, Resources};
use crate::evaluation::{
    confusion, stratified_split, EvalError, EvalReport, Split, SplitDescriptor,
};
use crate::ingest::{Corpus, RawTweet};
use crate::labels::{FinalLabel, Language, Polarity, Typeface};
use crate::text::{detect_typeface, strip_noise, TextError, TokenizedDoc, TypefaceTable};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("no labeled {language} examples for the {task} stage")]
    NoStageData { language: Language, task: Task },
    #[error("no {0} model language")]
    UnsupportedLanguage(Language),
    #[error("classification line {line}: {message}")]
    BadClassification { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const MODEL_LANGUAGES: [Language; 2] = [Language::English, Language::Chinese];

fn language_name(lang: Language) -> &'static str {
    match lang {
        Language::English => "English",
        Language::Chinese => "Chinese",
        Language::Other => "other",
    }
}

/// Table title and the two class names, positive class first.
pub fn stage_labels(task: Task) -> (&'static str, [&'static str; 2]) {
    match task {
        Task::Relevance => ("Relevance classifier", ["Relevant", "Irrelevant"]),
        Task::Subjectivity => (
            "Classifier to determine whether the text has emotions",
            ["True", "False"],
        ),
        Task::Polarity => (
            "Positive or negative sentiment classifier",
            ["Positive", "Negative"],
        ),
    }
}

/// Labeled documents for one stage, in gold order.
#[derive(Debug, Clone)]
pub struct StageData {
    pub language: Language,
    pub task: Task,
    pub docs: Vec<(TokenizedDoc, bool)>,
}

impl StageData {
    pub fn labels(&self) -> Vec<bool> {
        self.docs.iter().map(|d| d.1).collect()
    }

    /// SHA-256 over `(tweet_id, label)` pairs and tokens.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (d, y) in &self.docs {
            h.update(d.tweet_id.to_le_bytes());
            h.update([u8::from(*y)]);
            for t in &d.tokens {
                h.update(t.as_bytes());
                h.update([0]);
            }
            h.update([0xff]);
        }
        hex::encode(h.finalize())
    }

    pub fn subset(&self, idx: &[usize]) -> Vec<(TokenizedDoc, bool)> {
        idx.iter().map(|&i| self.docs[i].clone()).collect()
    }
}

pub fn stage_data(
    corpus: &Corpus,
    gold: &[GoldLabel],
    language: Language,
    task: Task,
) -> StageData {
    let by_id: HashMap<u64, &RawTweet> = corpus.tweets.iter().map(|t| (t.id, t)).collect();
    let docs = gold
        .iter()
        .filter_map(|g| {
            let tweet = by_id.get(&g.tweet_id).filter(|t| t.language == language)?;
            let y = training_label(task, g)?;
            Some((TokenizedDoc::from_raw(tweet.id, &tweet.text, language), y))
        })
        .collect();
    StageData {
        language,
        task,
        docs,
    }
}

pub fn split_stage(data: &StageData, config: &Config) -> Result<Split, PipelineError> {
    if data.docs.is_empty() {
        return Err(PipelineError::NoStageData {
            language: data.language,
            task: data.task,
        });
    }
    Ok(stratified_split(
        &data.labels(),
        config.test_fraction,
        config.seed,
    )?)
}

fn descriptor(config: &Config, split: &Split) -> SplitDescriptor {
    SplitDescriptor {
        protocol: "stratified".into(),
        test_fraction: config.test_fraction,
        seed: config.seed,
        train_size: split.train.len(),
        test_size: split.test.len(),
    }
}

/// Trains one hybrid for `(language, task)` on `docs`.
pub fn train_docs(
    language: Language,
    task: Task,
    docs: &[(TokenizedDoc, bool)],
    resources: &Resources,
    config: &Config,
) -> Result<HybridClassifier, PipelineError> {
    let polarity = resources
        .polarity_lexicon(language)
        .ok_or(PipelineError::UnsupportedLanguage(language))?;
    let relevance = resources
        .relevance_lexicon(language)
        .ok_or(PipelineError::UnsupportedLanguage(language))?;
    let lexicon = task_lexicon(task, polarity, relevance)?;
    Ok(train_hybrid(
        docs,
        lexicon,
        config.tau_for(language, task),
        &config.hyperparameters(),
        config.hash_salt,
    )?)
}

/// Trains one hybrid on the training side of the stage's split.
pub fn train_stage(
    data: &StageData,
    resources: &Resources,
    config: &Config,
) -> Result<HybridClassifier, PipelineError> {
    let split = split_stage(data, config)?;
    train_docs(
        data.language,
        data.task,
        &data.subset(&split.train),
        resources,
        config,
    )
}

/// Confusion-matrix report of `clf` over labeled `docs`.
pub fn score_docs(
    language: Language,
    task: Task,
    docs: &[(TokenizedDoc, bool)],
    clf: &HybridClassifier,
    fingerprint: String,
    split: SplitDescriptor,
) -> Result<EvalReport, PipelineError> {
    let (title, names) = stage_labels(task);
    let name = |b: bool| if b { names[0] } else { names[1] };
    let mut gold = Vec::with_capacity(docs.len());
    let mut pred = Vec::with_capacity(docs.len());
    for (doc, y) in docs {
        gold.push(name(*y));
        pred.push(name(hybrid_decide(clf, doc)?));
    }
    let cm = confusion(&names, &gold, &pred)?;
    Ok(EvalReport::new(
        format!("{title} ({})", language_name(language)),
        cm,
        fingerprint,
        split,
    )?)
}

/// Scores a trained hybrid on the test side of the stage's split.
pub fn evaluate_stage(
    data: &StageData,
    clf: &HybridClassifier,
    config: &Config,
) -> Result<EvalReport, PipelineError> {
    let split = split_stage(data, config)?;
    score_docs(
        data.language,
        data.task,
        &data.subset(&split.test),
        clf,
        data.fingerprint(),
        descriptor(config, &split),
    )
}

/// The typeface detector has nothing to train, so it is scored on every
/// Chinese tweet with a gold typeface.
pub fn evaluate_typeface(
    corpus: &Corpus,
    gold: &[GoldLabel],
    table: &TypefaceTable,
    config: &Config,
) -> Result<EvalReport, PipelineError> {
    let by_id: HashMap<u64, &RawTweet> = corpus.tweets.iter().map(|t| (t.id, t)).collect();
    let mut g = Vec::new();
    let mut p = Vec::new();
    let mut h = Sha256::new();
    for label in gold {
        let (Some(tf), Some(tweet)) = (label.typeface, by_id.get(&label.tweet_id)) else {
            continue;
        };
        if tweet.language != Language::Chinese {
            continue;
        }
        let detected =
            detect_typeface(&strip_noise(&tweet.text), table).unwrap_or(Typeface::Simplified);
        h.update(tweet.id.to_le_bytes());
        h.update(tf.code().as_bytes());
        g.push(tf.name());
        p.push(detected.name());
    }
    if g.is_empty() {
        return Err(PipelineError::NoStageData {
            language: Language::Chinese,
            task: Task::Relevance,
        });
    }
    let n = g.len();
    let cm = confusion(&["Simplified", "Traditional"], &g, &p)?;
    Ok(EvalReport::new(
        "Typeface classifier (Chinese)",
        cm,
        hex::encode(h.finalize()),
        SplitDescriptor {
            protocol: "all labeled".into(),
            test_fraction: 1.0,
            seed: config.seed,
            train_size: 0,
            test_size: n,
        },
    )?)
}

/// One row of the classification output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub tweet_id: u64,
    pub language: Language,
    pub relevance: bool,
    pub typeface: Option<Typeface>,
    pub subjective: Option<bool>,
    pub polarity: Option<Polarity>,
    #[serde(rename = "final")]
    pub final_label: FinalLabel,
}

impl ClassificationRow {
    pub fn new(tweet: &RawTweet, out: &CascadeOutcome) -> Self {
        Self {
            tweet_id: tweet.id,
            language: tweet.language,
            relevance: out.relevance,
            typeface: out.typeface,
            subjective: out.subjective,
            polarity: out.polarity,
            final_label: out.final_label,
        }
    }
}

/// Runs the cascade over every English and Chinese tweet. Other-language
/// tweets are skipped and counted.
pub fn classify_corpus(
    corpus: &Corpus,
    bundle: &ModelBundle,
    table: &TypefaceTable,
) -> Result<(Vec<ClassificationRow>, u64), PipelineError> {
    let mut rows = Vec::with_capacity(corpus.len());
    let mut skipped = 0;
    for tweet in &corpus.tweets {
        if !MODEL_LANGUAGES.contains(&tweet.language) {
            skipped += 1;
            continue;
        }
        let out = classify_cascade(tweet, bundle, table)?;
        rows.push(ClassificationRow::new(tweet, &out));
    }
    Ok((rows, skipped))
}

pub fn write_classifications<W: Write>(
    writer: W,
    rows: &[ClassificationRow],
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "tweet_id",
        "language",
        "relevance",
        "typeface",
        "subjective",
        "polarity",
        "final",
    ])?;
    let opt = |b: Option<bool>| b.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.tweet_id.to_string(),
            r.language.code().to_string(),
            r.relevance.to_string(),
            r.typeface.map(|t| t.name().to_string()).unwrap_or_default(),
            opt(r.subjective),
            r.polarity.map(|p| p.name().to_string()).unwrap_or_default(),
            r.final_label.name().to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_classifications<R: Read>(reader: R) -> Result<Vec<ClassificationRow>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        let bad = |m: String| PipelineError::BadClassification { line, message: m };
        if rec.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", rec.len())));
        }
        let parse_bool = |s: &str| -> Result<Option<bool>, PipelineError> {
            match s {
                "" => Ok(None),
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                o => Err(bad(format!("bad boolean `{o}`"))),
            }
        };
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        out.push(ClassificationRow {
            tweet_id: rec[0]
                .parse()
                .map_err(|_| bad(format!("bad id `{}`", &rec[0])))?,
            language: rec[1].parse().map_err(bad)?,
            relevance: parse_bool(&rec[2])?.ok_or_else(|| bad("empty relevance".into()))?,
            typeface: opt(&rec[3]).map(|s| s.parse()).transpose().map_err(bad)?,
            subjective: parse_bool(&rec[4])?,
            polarity: opt(&rec[5]).map(|s| s.parse()).transpose().map_err(bad)?,
            final_label: rec[6].parse().map_err(bad)?,
        });
    }
    Ok(out)
}

/// Joins classification rows with their tweets. Rows without a tweet in the
/// corpus are dropped.
pub fn join_classified(corpus: &Corpus, rows: &[ClassificationRow]) -> Vec<ClassifiedTweet> {
    let by_id: HashMap<u64, &RawTweet> = corpus.tweets.iter().map(|t| (t.id, t)).collect();
    rows.iter()
        .filter_map(|r| {
            let t = by_id.get(&r.tweet_id)?;
            Some(ClassifiedTweet {
                id: t.id,
                created_at: t.created_at,
                language: t.language,
                label: r.final_label,
                user_location: t.user_location.clone(),
                tokens: TokenizedDoc::from_raw(t.id, &t.text, t.language).tokens,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOutputs {
    /// Per model language, then both together.
    pub series: Vec<(String, SentimentSeries)>,
    pub countries: CountryReport,
    pub words: Vec<(Language, WordFreqReport)>,
}

pub fn aggregate(
    tweets: &[ClassifiedTweet],
    resources: &Resources,
    config: &Config,
) -> Result<AggregateOutputs, PipelineError> {
    let mut series = Vec::new();
    for lang in MODEL_LANGUAGES {
        let part: Vec<ClassifiedTweet> = tweets
            .iter()
            .filter(|t| t.language == lang)
            .cloned()
            .collect();
        if !part.is_empty() {
            series.push((
                lang.code().to_string(),
                bucket_hourly(&part, config.utc_offset_minutes)?,
            ));
        }
    }
    series.push((
        "all".to_string(),
        bucket_hourly(tweets, config.utc_offset_minutes)?,
    ));

    let resolved: Vec<Option<&str>> = tweets
        .iter()
        .map(|t| {
            t.user_location
                .as_deref()
                .and_then(|l| resolve_country(l, &resources.gazetteer))
        })
        .collect();
    let countries = country_scores(resolved.iter().zip(tweets).map(|(c, t)| (*c, t.label)));

    let mut words = Vec::new();
    for lang in MODEL_LANGUAGES {
        let Some(stop) = resources.stoplist(lang) else {
            continue;
        };
        let rows: Vec<(&[String], FinalLabel)> = tweets
            .iter()
            .filter(|t| t.language == lang)
            .map(|t| (t.tokens.as_slice(), t.label))
            .collect();
        words.push((lang, WordFreqReport::build(rows.iter().copied(), stop)));
    }
    Ok(AggregateOutputs {
        series,
        countries,
        words,
    })
}
