//! Flat key/value JSON configuration and the data files it points at.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aggregation::{Gazetteer, DEFAULT_UTC_OFFSET_MINUTES};
use crate::classify::{Hyperparameters, Task, DEFAULT_HASH_SALT, DEFAULT_TAU};
use crate::ingest::{HashtagSet, LanguageThresholds};
use crate::labels::Language;
use crate::text::{Lexicon, StopList, TypefaceTable};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {0} not found")]
    Missing(PathBuf),
    #[error("config is not a JSON object: {0}")]
    Malformed(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidKey {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

const PATH_KEYS: [&str; 9] = [
    "hashtags",
    "typeface_table",
    "gazetteer",
    "lexicon.en",
    "lexicon.zh",
    "relevance_lexicon.en",
    "relevance_lexicon.zh",
    "stoplist.en",
    "stoplist.zh",
];

/// Every setting the pipeline reads. Absent data-file paths mean the copy
/// built into the binary.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub language: LanguageThresholds,
    /// Override threshold per `(language, task)`.
    pub tau: BTreeMap<(Language, Task), u32>,
    pub lambda: f64,
    pub epochs: u32,
    pub hash_salt: u64,
    pub test_fraction: f64,
    pub utc_offset_minutes: i32,
    pub top_k: usize,
    /// Keyed by the names in `PATH_KEYS`.
    pub paths: BTreeMap<String, PathBuf>,
}

fn model_languages() -> [Language; 2] {
    [Language::English, Language::Chinese]
}

fn tau_key(lang: Language, task: Task) -> String {
    format!("tau.{}.{}", task.name(), lang.code())
}

impl Default for Config {
    fn default() -> Self {
        let mut tau = BTreeMap::new();
        for lang in model_languages() {
            for task in Task::ALL {
                tau.insert((lang, task), DEFAULT_TAU);
            }
        }
        let hp = Hyperparameters::default();
        Self {
            seed: 42,
            language: LanguageThresholds::default(),
            tau,
            lambda: hp.lambda,
            epochs: hp.epochs,
            hash_salt: DEFAULT_HASH_SALT,
            test_fraction: 0.2,
            utc_offset_minutes: DEFAULT_UTC_OFFSET_MINUTES,
            top_k: 10,
            paths: BTreeMap::new(),
        }
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    v.as_u64()
        .ok_or_else(|| ConfigError::invalid(key, "expected a non-negative integer"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::invalid(key, "expected a number"))
}

fn as_ratio(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = as_f64(key, v)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(ConfigError::invalid(key, "expected a value in [0, 1]"))
    }
}

impl Config {
    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            lambda: self.lambda,
            epochs: self.epochs,
            seed: self.seed,
        }
    }

    pub fn tau_for(&self, lang: Language, task: Task) -> u32 {
        self.tau.get(&(lang, task)).copied().unwrap_or(DEFAULT_TAU)
    }

    pub fn path(&self, key: &str) -> Option<&Path> {
        self.paths.get(key).map(PathBuf::as_path)
    }

    /// Parses a config document. Relative paths resolve against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(ConfigError::Malformed("top level must be an object".into()));
        };
        let mut c = Config::default();
        for (key, v) in &map {
            let k = key.as_str();
            match k {
                "seed" => c.seed = as_u64(k, v)?,
                "language.cjk_min_ratio" => c.language.cjk_min_ratio = as_ratio(k, v)?,
                "language.latin_min_ratio" => c.language.latin_min_ratio = as_ratio(k, v)?,
                "language.use_lang_field" => {
                    c.language.use_lang_field = v
                        .as_bool()
                        .ok_or_else(|| ConfigError::invalid(k, "expected a boolean"))?
                }
                "svm.lambda" => {
                    c.lambda = as_f64(k, v)?;
                    if c.lambda <= 0.0 {
                        return Err(ConfigError::invalid(k, "must be positive"));
                    }
                }
                "svm.epochs" => {
                    c.epochs = u32::try_from(as_u64(k, v)?)
                        .ok()
                        .filter(|e| *e > 0)
                        .ok_or_else(|| ConfigError::invalid(k, "expected a positive integer"))?
                }
                "features.hash_salt" => c.hash_salt = as_u64(k, v)?,
                "eval.test_fraction" => {
                    c.test_fraction = as_f64(k, v)?;
                    if !(c.test_fraction > 0.0 && c.test_fraction < 1.0) {
                        return Err(ConfigError::invalid(k, "expected a value in (0, 1)"));
                    }
                }
                "aggregate.utc_offset_minutes" => {
                    c.utc_offset_minutes = v
                        .as_i64()
                        .and_then(|x| i32::try_from(x).ok())
                        .filter(|x| x.abs() <= 18 * 60)
                        .ok_or_else(|| {
                            ConfigError::invalid(k, "expected minutes in -1080..=1080")
                        })?
                }
                "aggregate.top_k" => {
                    c.top_k = usize::try_from(as_u64(k, v)?)
                        .map_err(|_| ConfigError::invalid(k, "too large"))?
                }
                _ if k.starts_with("tau.") => {
                    let found = model_languages()
                        .into_iter()
                        .flat_map(|l| Task::ALL.map(|t| (l, t)))
                        .find(|(l, t)| tau_key(*l, *t) == k);
                    let Some(slot) = found else {
                        return Err(ConfigError::UnknownKey(k.to_string()));
                    };
                    let tau = u32::try_from(as_u64(k, v)?)
                        .map_err(|_| ConfigError::invalid(k, "too large"))?;
                    c.tau.insert(slot, tau);
                }
                _ if PATH_KEYS.contains(&k) => {
                    if v.is_null() {
                        continue;
                    }
                    let raw = v
                        .as_str()
                        .ok_or_else(|| ConfigError::invalid(k, "expected a path string"))?;
                    let path = base.join(raw);
                    if !path.is_file() {
                        return Err(ConfigError::invalid(
                            k,
                            format!("{} does not exist", path.display()),
                        ));
                    }
                    c.paths.insert(k.to_string(), path);
                }
                _ => return Err(ConfigError::UnknownKey(k.to_string())),
            }
        }
        if c.language.cjk_min_ratio == 0.0 {
            return Err(ConfigError::invalid(
                "language.cjk_min_ratio",
                "must be positive",
            ));
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|_| ConfigError::Missing(path.to_path_buf()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base)
    }

    /// Every key with its value, in a fixed order.
    pub fn dump(&self) -> String {
        let mut m = Map::new();
        m.insert("seed".into(), self.seed.into());
        m.insert(
            "language.cjk_min_ratio".into(),
            self.language.cjk_min_ratio.into(),
        );
        m.insert(
            "language.latin_min_ratio".into(),
            self.language.latin_min_ratio.into(),
        );
        m.insert(
            "language.use_lang_field".into(),
            self.language.use_lang_field.into(),
        );
        m.insert("svm.lambda".into(), self.lambda.into());
        m.insert("svm.epochs".into(), self.epochs.into());
        m.insert("features.hash_salt".into(), self.hash_salt.into());
        m.insert("eval.test_fraction".into(), self.test_fraction.into());
        m.insert(
            "aggregate.utc_offset_minutes".into(),
            self.utc_offset_minutes.into(),
        );
        m.insert("aggregate.top_k".into(), self.top_k.into());
        for ((lang, task), tau) in &self.tau {
            m.insert(tau_key(*lang, *task), (*tau).into());
        }
        for key in PATH_KEYS {
            let v = self
                .paths
                .get(key)
                .map_or(Value::Null, |p| Value::String(p.display().to_string()));
            m.insert(key.into(), v);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("config serializes");
        text.push('\n');
        text
    }

    /// SHA-256 of [`Self::dump`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.dump().as_bytes()))
    }
}

#[derive(Debug, Error)]
#[error("cannot load `{key}`: {message}")]
pub struct ResourceError {
    pub key: String,
    pub message: String,
}

/// Data files resolved from a [`Config`].
#[derive(Debug, Clone)]
pub struct Resources {
    pub hashtags: HashtagSet,
    pub typeface: TypefaceTable,
    pub gazetteer: Gazetteer,
    polarity: BTreeMap<Language, Lexicon>,
    relevance: BTreeMap<Language, Lexicon>,
    stoplists: BTreeMap<Language, StopList>,
}

const SHIPPED_LEXICON_EN: &str = include_str!("../data/lexicon_en.txt");
const SHIPPED_LEXICON_ZH: &str = include_str!("../data/lexicon_zh.txt");
const SHIPPED_RELEVANCE_EN: &str = include_str!("../data/relevance_en.txt");
const SHIPPED_RELEVANCE_ZH: &str = include_str!("../data/relevance_zh.txt");
const SHIPPED_STOP_EN: &str = include_str!("../data/stopwords_en.txt");
const SHIPPED_STOP_ZH: &str = include_str!("../data/stopwords_zh.txt");

fn read_or(config: &Config, key: &str, shipped: &str) -> Result<String, ResourceError> {
    match config.path(key) {
        None => Ok(shipped.to_string()),
        Some(p) => fs::read_to_string(p).map_err(|e| ResourceError {
            key: key.into(),
            message: e.to_string(),
        }),
    }
}

fn res_err(key: &str) -> impl Fn(String) -> ResourceError + '_ {
    move |message| ResourceError {
        key: key.into(),
        message,
    }
}

impl Resources {
    pub fn load(config: &Config) -> Result<Self, ResourceError> {
        let hashtags = match config.path("hashtags") {
            None => HashtagSet::study_default(),
            Some(p) => HashtagSet::load(p).map_err(|e| res_err("hashtags")(e.to_string()))?,
        };
        let typeface = match config.path("typeface_table") {
            None => TypefaceTable::shipped(),
            Some(p) => {
                TypefaceTable::load(p).map_err(|e| res_err("typeface_table")(e.to_string()))?
            }
        };
        let gazetteer = match config.path("gazetteer") {
            None => Gazetteer::shipped(),
            Some(p) => Gazetteer::load(p).map_err(|e| res_err("gazetteer")(e.to_string()))?,
        };
        let mut polarity = BTreeMap::new();
        let mut relevance = BTreeMap::new();
        let mut stoplists = BTreeMap::new();
        for (lang, lex, rel, stop) in [
            (
                Language::English,
                SHIPPED_LEXICON_EN,
                SHIPPED_RELEVANCE_EN,
                SHIPPED_STOP_EN,
            ),
            (
                Language::Chinese,
                SHIPPED_LEXICON_ZH,
                SHIPPED_RELEVANCE_ZH,
                SHIPPED_STOP_ZH,
            ),
        ] {
            let code = lang.code();
            let key = format!("lexicon.{code}");
            let text = read_or(config, &key, lex)?;
            polarity.insert(
                lang,
                Lexicon::parse(lang, &text).map_err(|e| res_err(&key)(e.to_string()))?,
            );
            let key = format!("relevance_lexicon.{code}");
            let text = read_or(config, &key, rel)?;
            relevance.insert(
                lang,
                Lexicon::parse(lang, &text).map_err(|e| res_err(&key)(e.to_string()))?,
            );
            let key = format!("stoplist.{code}");
            let text = read_or(config, &key, stop)?;
            stoplists.insert(
                lang,
                StopList::parse(lang, &text).map_err(|e| res_err(&key)(e.to_string()))?,
            );
        }
        Ok(Self {
            hashtags,
            typeface,
            gazetteer,
            polarity,
            relevance,
            stoplists,
        })
    }

    pub fn shipped() -> Self {
        Self::load(&Config::default()).expect("shipped data files parse")
    }

    /// English or Chinese only.
    pub fn polarity_lexicon(&self, lang: Language) -> Option<&Lexicon> {
        self.polarity.get(&lang)
    }

    pub fn relevance_lexicon(&self, lang: Language) -> Option<&Lexicon> {
        self.relevance.get(&lang)
    }

    pub fn stoplist(&self, lang: Language) -> Option<&StopList> {
        self.stoplists.get(&lang)
    }
}
