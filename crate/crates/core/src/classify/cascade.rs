use serde::{Deserialize, Serialize};

use crate::ingest::RawTweet;
use crate::labels::{FinalLabel, Language, Polarity, Typeface};
use crate::text::{detect_typeface, strip_noise, TokenizedDoc, TypefaceTable};

use super::hybrid::HybridClassifier;
use super::{ClassifyError, ModelBundle, Task};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeOutcome {
    pub relevance: bool,
    pub typeface: Option<Typeface>,
    pub subjective: Option<bool>,
    /// Only ever Positive or Negative.
    pub polarity: Option<Polarity>,
    #[serde(rename = "final")]
    pub final_label: FinalLabel,
}

impl CascadeOutcome {
    pub fn is_consistent(&self) -> bool {
        (self.final_label == FinalLabel::Irrelevant) == !self.relevance
            && (self.final_label == FinalLabel::Neutral)
                == (self.relevance && self.subjective == Some(false))
            && self.polarity.is_some() == (self.subjective == Some(true))
            && self.polarity != Some(Polarity::Neutral)
    }
}

fn stage(
    bundle: &ModelBundle,
    language: Language,
    task: Task,
) -> Result<&HybridClassifier, ClassifyError> {
    bundle
        .get(language, task)
        .ok_or(ClassifyError::MissingModel { language, task })
}

/// Relevance, then typeface (Chinese only), subjectivity and polarity. A
/// negative decision at relevance or subjectivity ends the cascade.
pub fn classify_cascade(
    tweet: &RawTweet,
    bundle: &ModelBundle,
    table: &TypefaceTable,
) -> Result<CascadeOutcome, ClassifyError> {
    let language = tweet.language;
    if language == Language::Other {
        return Err(ClassifyError::UnsupportedLanguage(language));
    }
    let relevance = stage(bundle, language, Task::Relevance)?;
    let subjectivity = stage(bundle, language, Task::Subjectivity)?;
    let polarity = stage(bundle, language, Task::Polarity)?;
    let doc = TokenizedDoc::from_raw(tweet.id, &tweet.text, language);

    let mut out = CascadeOutcome {
        relevance: relevance.decide_features(&relevance.featurize(&doc)?),
        typeface: None,
        subjective: None,
        polarity: None,
        final_label: FinalLabel::Irrelevant,
    };
    if !out.relevance {
        return Ok(out);
    }
    if language == Language::Chinese {
        out.typeface = detect_typeface(&strip_noise(&tweet.text), table).ok();
    }
    let subjective = subjectivity.decide_features(&subjectivity.featurize(&doc)?);
    out.subjective = Some(subjective);
    if !subjective {
        out.final_label = FinalLabel::Neutral;
        return Ok(out);
    }
    let positive = polarity.decide_features(&polarity.featurize(&doc)?);
    let (p, f) = if positive {
        (Polarity::Positive, FinalLabel::Positive)
    } else {
        (Polarity::Negative, FinalLabel::Negative)
    };
    out.polarity = Some(p);
    out.final_label = f;
    Ok(out)
}
