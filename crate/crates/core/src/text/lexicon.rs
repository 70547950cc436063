use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::tokenize::tokenize_english;
use super::{TextError, TokenizedDoc};
use crate::labels::{is_cjk, Language};

/// Converts a lexicon term into the token sequence the tokenizer would emit
/// for it. Chinese terms become a unigram (one character) or the chain of
/// their bigrams.
pub fn term_tokens(language: Language, term: &str) -> Vec<String> {
    let term = term.trim();
    if language == Language::Chinese && !term.is_empty() && term.chars().all(is_cjk) {
        let chars: Vec<char> = term.chars().collect();
        if chars.len() == 1 {
            return vec![term.to_string()];
        }
        return chars.windows(2).map(|w| w.iter().collect()).collect();
    }
    tokenize_english(term)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Positive,
    Negative,
}

/// Positive and negative term lists for one language.
#[derive(Debug, Clone)]
pub struct Lexicon {
    language: Language,
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
    /// First token → (full token pattern, side).
    patterns: HashMap<String, Vec<(Vec<String>, Side)>>,
}

impl Lexicon {
    pub fn new<I, J, S, T>(language: Language, positive: I, negative: J) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let entries = positive
            .into_iter()
            .map(|t| (term_tokens(language, t.as_ref()), Side::Positive))
            .chain(
                negative
                    .into_iter()
                    .map(|t| (term_tokens(language, t.as_ref()), Side::Negative)),
            );
        Self::build(language, entries)
    }

    /// Rebuilds a lexicon from the normal forms returned by [`Self::positive`]
    /// and [`Self::negative`].
    pub fn from_normal_forms<I, J, S, T>(
        language: Language,
        positive: I,
        negative: J,
    ) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let split = |t: &str| -> Vec<String> { t.split_whitespace().map(str::to_string).collect() };
        let entries = positive
            .into_iter()
            .map(|t| (split(t.as_ref()), Side::Positive))
            .chain(
                negative
                    .into_iter()
                    .map(|t| (split(t.as_ref()), Side::Negative)),
            );
        Self::build(language, entries)
    }

    fn build(
        language: Language,
        entries: impl Iterator<Item = (Vec<String>, Side)>,
    ) -> Result<Self, TextError> {
        let mut seen: HashMap<Vec<String>, Side> = HashMap::new();
        let mut patterns: HashMap<String, Vec<(Vec<String>, Side)>> = HashMap::new();
        let mut pos_set = BTreeSet::new();
        let mut neg_set = BTreeSet::new();
        for (tokens, side) in entries {
            if tokens.is_empty() {
                continue;
            }
            let normal = tokens.join(" ");
            match seen.get(&tokens) {
                Some(prev) if *prev != side => return Err(TextError::OverlappingTerm(normal)),
                Some(_) => continue,
                None => {}
            }
            seen.insert(tokens.clone(), side);
            match side {
                Side::Positive => pos_set.insert(normal),
                Side::Negative => neg_set.insert(normal),
            };
            patterns
                .entry(tokens[0].clone())
                .or_default()
                .push((tokens, side));
        }
        Ok(Self {
            language,
            positive: pos_set,
            negative: neg_set,
            patterns,
        })
    }

    pub fn load(language: Language, path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::parse(language, &fs::read_to_string(path)?)
    }

    /// `[positive]` / `[negative]` sections, one term per line. Lines starting
    /// with `#` are comments.
    pub fn parse(language: Language, text: &str) -> Result<Self, TextError> {
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut section: Option<Side> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[positive]" => section = Some(Side::Positive),
                "[negative]" => section = Some(Side::Negative),
                _ => match section {
                    Some(Side::Positive) => positive.push(line.to_string()),
                    Some(Side::Negative) => negative.push(line.to_string()),
                    None => return Err(TextError::TermOutsideSection(i + 1)),
                },
            }
        }
        Self::new(language, positive, negative)
    }

    /// Lexicon whose positive side is every term of `parts` (both sides) and
    /// whose negative side is empty. Used for affect detection.
    pub fn union_as_positive(language: Language, parts: &[&Lexicon]) -> Result<Self, TextError> {
        let mut terms = BTreeSet::new();
        for lex in parts {
            if lex.language != language {
                return Err(TextError::LanguageMismatch {
                    expected: language,
                    found: lex.language,
                });
            }
            terms.extend(lex.positive.iter().cloned());
            terms.extend(lex.negative.iter().cloned());
        }
        Self::from_normal_forms(language, terms, Vec::<String>::new())
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Positive terms in normal form (tokens joined by a space).
    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (positive occurrences, negative occurrences). Multi-token entries
    /// match contiguous token runs; each start position counts once.
    pub fn count_tokens(&self, tokens: &[String]) -> (u32, u32) {
        let (mut pos, mut neg) = (0, 0);
        for (i, tok) in tokens.iter().enumerate() {
            let Some(candidates) = self.patterns.get(tok) else {
                continue;
            };
            for (pattern, side) in candidates {
                if tokens[i..].starts_with(pattern) {
                    match side {
                        Side::Positive => pos += 1,
                        Side::Negative => neg += 1,
                    }
                }
            }
        }
        (pos, neg)
    }

    pub fn counts(&self, doc: &TokenizedDoc) -> Result<(u32, u32), TextError> {
        self.check_language(doc.language)?;
        Ok(self.count_tokens(&doc.tokens))
    }

    fn check_language(&self, found: Language) -> Result<(), TextError> {
        if found != self.language {
            return Err(TextError::LanguageMismatch {
                expected: self.language,
                found,
            });
        }
        Ok(())
    }
}

/// Positive minus negative lexicon hits.
pub fn lexicon_net_score(doc: &TokenizedDoc, lex: &Lexicon) -> Result<i64, TextError> {
    let (pos, neg) = lex.counts(doc)?;
    Ok(i64::from(pos) - i64::from(neg))
}

#[derive(Debug, Clone)]
pub struct StopList {
    language: Language,
    terms: HashSet<String>,
}

impl StopList {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(
        language: Language,
        terms: I,
    ) -> Result<Self, TextError> {
        let terms: HashSet<String> = terms
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty() && !t.starts_with('#'))
            .collect();
        if terms.is_empty() {
            return Err(TextError::EmptyStopList(language));
        }
        Ok(Self { language, terms })
    }

    pub fn parse(language: Language, text: &str) -> Result<Self, TextError> {
        Self::new(language, text.lines())
    }

    pub fn load(language: Language, path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::parse(language, &fs::read_to_string(path)?)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn contains(&self, token: &str) -> bool {
        self.terms.contains(token)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
