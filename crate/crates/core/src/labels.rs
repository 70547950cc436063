//! Label enums shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Language partition of an ingested tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[serde(rename = "en")]
    English,
    #[serde(rename = "zh")]
    Chinese,
    #[serde(rename = "other")]
    Other,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::English, Language::Chinese, Language::Other];

    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Chinese => "zh",
            Language::Other => "other",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" | "english" => Ok(Language::English),
            "zh" | "chinese" => Ok(Language::Chinese),
            "other" => Ok(Language::Other),
            _ => Err(format!("unknown language `{s}`")),
        }
    }
}

/// Simplified or traditional Chinese script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Typeface {
    Simplified,
    Traditional,
}

impl Typeface {
    pub fn code(self) -> &'static str {
        match self {
            Typeface::Simplified => "S",
            Typeface::Traditional => "T",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Typeface::Simplified => "Simplified",
            Typeface::Traditional => "Traditional",
        }
    }
}

impl fmt::Display for Typeface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Typeface {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" | "s" | "Simplified" | "simplified" => Ok(Typeface::Simplified),
            "T" | "t" | "Traditional" | "traditional" => Ok(Typeface::Traditional),
            _ => Err(format!("unknown typeface `{s}`")),
        }
    }
}

/// Three-way polarity. The derived ordering (Positive < Neutral < Negative) is
/// the canonical order used before any seeded tie-break draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Neutral,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Neutral, Polarity::Negative];

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Positive => "Positive",
            Polarity::Neutral => "Neutral",
            Polarity::Negative => "Negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Positive" | "positive" | "pos" => Ok(Polarity::Positive),
            "Neutral" | "neutral" | "neu" => Ok(Polarity::Neutral),
            "Negative" | "negative" | "neg" => Ok(Polarity::Negative),
            _ => Err(format!("unknown polarity `{s}`")),
        }
    }
}

/// Terminal label assigned by the classifier cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FinalLabel {
    Irrelevant,
    Neutral,
    Positive,
    Negative,
}

impl FinalLabel {
    pub fn name(self) -> &'static str {
        match self {
            FinalLabel::Irrelevant => "Irrelevant",
            FinalLabel::Neutral => "Neutral",
            FinalLabel::Positive => "Positive",
            FinalLabel::Negative => "Negative",
        }
    }
}

impl fmt::Display for FinalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FinalLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Irrelevant" | "irrelevant" => Ok(FinalLabel::Irrelevant),
            "Neutral" | "neutral" => Ok(FinalLabel::Neutral),
            "Positive" | "positive" => Ok(FinalLabel::Positive),
            "Negative" | "negative" => Ok(FinalLabel::Negative),
            _ => Err(format!("unknown label `{s}`")),
        }
    }
}

/// True for CJK unified ideographs (base block, extension A, compatibility
/// ideographs and the supplementary-plane extensions).
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x4E00..=0x9FFF
        | 0x3400..=0x4DBF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}
