//! Hashed features, linear SVM training, lexicon/SVM hybrids and the
//! four-stage cascade.

mod bundle;
mod cascade;
mod features;
mod hybrid;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::Language;
use crate::text::TextError;

pub use bundle::{ModelBundle, BUNDLE_FORMAT, BUNDLE_VERSION};
pub use cascade::{classify_cascade, CascadeOutcome};
pub use features::{
    bucket, featurize, featurize_with_salt, hashed_block, stable_hash, FeatureVector,
    DEFAULT_HASH_SALT, FEATURE_DIM, HASH_BUCKETS, LEXICON_NEGATIVE, LEXICON_POSITIVE,
};
pub use hybrid::{
    hybrid_decide, task_lexicon, train_hybrid, training_label, HybridClassifier, DEFAULT_TAU,
};
pub use svm::{
    dataset_fingerprint, objective, predict_margin, train_linear_svm, train_linear_svm_traced,
    Hyperparameters, LinearModel,
};

/// The three trainable binary stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Relevance,
    Subjectivity,
    Polarity,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Relevance, Task::Subjectivity, Task::Polarity];

    pub fn name(self) -> &'static str {
        match self {
            Task::Relevance => "relevance",
            Task::Subjectivity => "subjectivity",
            Task::Polarity => "polarity",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("no training data")]
    NoData,
    #[error("training data has a single class")]
    SingleClassData,
    #[error("bad hyperparameters: {0}")]
    BadHyperparameters(String),
    #[error("feature vector has a non-finite value")]
    NonFiniteFeature,
    #[error("no cascade for language {0}")]
    UnsupportedLanguage(Language),
    #[error("missing {task} model for {language}")]
    MissingModel { language: Language, task: Task },
    #[error("bundle: {0}")]
    BundleFormat(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
