//! Text normalization, tokenization, typeface detection and lexicon scoring.

mod lexicon;
mod normalize;
mod tokenize;
mod typeface;

use thiserror::Error;

use crate::labels::Language;

pub use lexicon::{lexicon_net_score, term_tokens, Lexicon, StopList};
pub use normalize::{scrub_for_language, strip_noise};
pub use tokenize::{tokenize_chinese, tokenize_english, TokenizedDoc};
pub use typeface::{detect_typeface, TypefaceTable};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("lexicon is for {expected} but document is {found}")]
    LanguageMismatch { expected: Language, found: Language },
    #[error("text has no CJK characters")]
    NoCjkContent,
    #[error("term `{0}` is listed as both positive and negative")]
    OverlappingTerm(String),
    #[error("lexicon line {0} is outside a [positive]/[negative] section")]
    TermOutsideSection(usize),
    #[error("stop list for {0} is empty")]
    EmptyStopList(Language),
    #[error("typeface mapping line {0} is malformed")]
    BadMappingLine(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
