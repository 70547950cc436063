use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::labels::Language;
use crate::text::Lexicon;

use super::hybrid::HybridClassifier;
use super::svm::{Hyperparameters, LinearModel};
use super::{ClassifyError, Task};

pub const BUNDLE_FORMAT: &str = "tweetmood-bundle";
pub const BUNDLE_VERSION: u32 = 1;

/// Trained hybrids keyed by language and stage.
#[derive(Debug, Clone, Default)]
pub struct ModelBundle {
    stages: BTreeMap<(Language, Task), HybridClassifier>,
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    positive: Vec<String>,
    negative: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StageFile {
    language: Language,
    task: Task,
    tau: u32,
    hash_salt: u64,
    trained_on: String,
    hyperparameters: Hyperparameters,
    bias: f64,
    weights: Vec<(u32, f64)>,
    lexicon: LexiconFile,
}

#[derive(Serialize, Deserialize)]
struct BundleFile {
    format: String,
    version: u32,
    stages: Vec<StageFile>,
}

impl ModelBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, language: Language, task: Task, clf: HybridClassifier) {
        self.stages.insert((language, task), clf);
    }

    pub fn get(&self, language: Language, task: Task) -> Option<&HybridClassifier> {
        self.stages.get(&(language, task))
    }

    pub fn stages(&self) -> impl Iterator<Item = (Language, Task, &HybridClassifier)> {
        self.stages.iter().map(|(k, v)| (k.0, k.1, v))
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn to_json(&self) -> Result<String, ClassifyError> {
        let file = BundleFile {
            format: BUNDLE_FORMAT.to_string(),
            version: BUNDLE_VERSION,
            stages: self
                .stages
                .iter()
                .map(|(&(language, task), c)| StageFile {
                    language,
                    task,
                    tau: c.tau,
                    hash_salt: c.salt,
                    trained_on: c.model.trained_on.clone(),
                    hyperparameters: c.model.hyperparameters,
                    bias: c.model.bias,
                    weights: c.model.weights.clone(),
                    lexicon: LexiconFile {
                        positive: c.lexicon.positive().iter().cloned().collect(),
                        negative: c.lexicon.negative().iter().cloned().collect(),
                    },
                })
                .collect(),
        };
        let mut text = serde_json::to_string(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let file: BundleFile = serde_json::from_str(text)?;
        if file.format != BUNDLE_FORMAT {
            return Err(ClassifyError::BundleFormat(format!(
                "format `{}`",
                file.format
            )));
        }
        if file.version != BUNDLE_VERSION {
            return Err(ClassifyError::BundleFormat(format!(
                "version {}",
                file.version
            )));
        }
        let mut bundle = Self::new();
        for s in file.stages {
            if !s.weights.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(ClassifyError::BundleFormat(format!(
                    "{} {} weights not sorted",
                    s.language, s.task
                )));
            }
            if s.weights.iter().any(|w| !w.1.is_finite()) || !s.bias.is_finite() {
                return Err(ClassifyError::NonFiniteFeature);
            }
            let lexicon =
                Lexicon::from_normal_forms(s.language, &s.lexicon.positive, &s.lexicon.negative)?;
            bundle.insert(
                s.language,
                s.task,
                HybridClassifier {
                    model: LinearModel {
                        weights: s.weights,
                        bias: s.bias,
                        trained_on: s.trained_on,
                        hyperparameters: s.hyperparameters,
                    },
                    lexicon,
                    tau: s.tau,
                    salt: s.hash_salt,
                },
            );
        }
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{train_hybrid, DEFAULT_HASH_SALT};
    use crate::text::TokenizedDoc;

    #[test]
    fn round_trip_is_bit_exact() {
        let docs: Vec<(TokenizedDoc, bool)> = ["国庆 快乐", "祖国 万岁", "暴力 抗议", "悲伤 镇压"]
            .iter()
            .enumerate()
            .map(|(i, t)| {
                (
                    TokenizedDoc::from_raw(i as u64, t, Language::Chinese),
                    i < 2,
                )
            })
            .collect();
        let lex = Lexicon::new(Language::Chinese, ["快乐", "万岁"], ["暴力"]).unwrap();
        let hp = Hyperparameters {
            lambda: 0.013,
            epochs: 7,
            seed: 5,
        };
        let clf = train_hybrid(&docs, lex, 3, &hp, DEFAULT_HASH_SALT ^ 1).unwrap();
        let mut b = ModelBundle::new();
        b.insert(Language::Chinese, Task::Polarity, clf.clone());
        let text = b.to_json().unwrap();
        let back = ModelBundle::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        let got = back.get(Language::Chinese, Task::Polarity).unwrap();
        assert_eq!(got.model.bias.to_bits(), clf.model.bias.to_bits());
        assert_eq!(got.model.weights.len(), clf.model.weights.len());
        for (a, b) in got.model.weights.iter().zip(&clf.model.weights) {
            assert_eq!((a.0, a.1.to_bits()), (b.0, b.1.to_bits()));
        }
        assert_eq!(got.lexicon.positive(), clf.lexicon.positive());
        assert_eq!(got.salt, clf.salt);
        assert_eq!(got.tau, 3);
        for (d, _) in &docs {
            assert_eq!(
                got.margin(d).unwrap().to_bits(),
                clf.margin(d).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(
            ModelBundle::from_json(r#"{"format":"x","version":1,"stages":[]}"#),
            Err(ClassifyError::BundleFormat(_))
        ));
        assert!(matches!(
            ModelBundle::from_json(r#"{"format":"tweetmood-bundle","version":9,"stages":[]}"#),
            Err(ClassifyError::BundleFormat(_))
        ));
        assert!(ModelBundle::from_json("not json").is_err());
    }
}
