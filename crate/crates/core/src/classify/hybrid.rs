use crate::annotation::GoldLabel;
use crate::labels::Polarity;
use crate::text::{Lexicon, TextError, TokenizedDoc};

use super::features::{featurize_with_salt, FeatureVector};
use super::svm::{predict_margin, train_linear_svm, Hyperparameters, LinearModel};
use super::{ClassifyError, Task};

pub const DEFAULT_TAU: u32 = 2;

/// Lexicon vote first, SVM margin otherwise.
#[derive(Debug, Clone)]
pub struct HybridClassifier {
    pub model: LinearModel,
    pub lexicon: Lexicon,
    pub tau: u32,
    pub salt: u64,
}

impl HybridClassifier {
    pub fn featurize(&self, doc: &TokenizedDoc) -> Result<FeatureVector, TextError> {
        featurize_with_salt(doc, &self.lexicon, self.salt)
    }

    /// Decision from a vector built with this classifier's lexicon and salt.
    pub fn decide_features(&self, x: &FeatureVector) -> bool {
        let [pos, neg] = x.lexicon_counts();
        let net = pos - neg;
        if net != 0.0 && net.abs() >= f64::from(self.tau) {
            return net > 0.0;
        }
        predict_margin(&self.model, x) >= 0.0
    }

    pub fn margin(&self, doc: &TokenizedDoc) -> Result<f64, TextError> {
        Ok(predict_margin(&self.model, &self.featurize(doc)?))
    }
}

/// `true` is the positive class of the stage (relevant, subjective,
/// Positive).
pub fn hybrid_decide(clf: &HybridClassifier, doc: &TokenizedDoc) -> Result<bool, TextError> {
    Ok(clf.decide_features(&clf.featurize(doc)?))
}

/// Binary training target for `task`, or `None` when the gold label does
/// not take part in that stage.
pub fn training_label(task: Task, gold: &GoldLabel) -> Option<bool> {
    match task {
        Task::Relevance => Some(gold.relevant),
        Task::Subjectivity => gold
            .relevant
            .then_some(gold.polarity)
            .flatten()
            .map(|p| p != Polarity::Neutral),
        Task::Polarity => match gold.polarity {
            Some(Polarity::Positive) if gold.relevant => Some(true),
            Some(Polarity::Negative) if gold.relevant => Some(false),
            _ => None,
        },
    }
}

/// Lexicon used by a stage: the relevance lexicon, the union of the
/// polarity lexicon's terms, or the polarity lexicon itself.
pub fn task_lexicon(
    task: Task,
    polarity: &Lexicon,
    relevance: &Lexicon,
) -> Result<Lexicon, TextError> {
    match task {
        Task::Relevance => Ok(relevance.clone()),
        Task::Subjectivity => Lexicon::union_as_positive(polarity.language(), &[polarity]),
        Task::Polarity => Ok(polarity.clone()),
    }
}

pub fn train_hybrid(
    docs: &[(TokenizedDoc, bool)],
    lexicon: Lexicon,
    tau: u32,
    hp: &Hyperparameters,
    salt: u64,
) -> Result<HybridClassifier, ClassifyError> {
    let data = docs
        .iter()
        .map(|(d, y)| Ok((featurize_with_salt(d, &lexicon, salt)?, *y)))
        .collect::<Result<Vec<_>, TextError>>()?;
    let model = train_linear_svm(&data, hp)?;
    Ok(HybridClassifier {
        model,
        lexicon,
        tau,
        salt,
    })
}
