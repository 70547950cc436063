use serde::{Deserialize, Serialize};

use super::normalize::strip_noise;
use crate::labels::{is_cjk, Language};

/// Token sequence for one tweet. Produced from noise-stripped text, so it
/// never contains URLs, `RT` markers or mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub tweet_id: u64,
    pub tokens: Vec<String>,
    pub language: Language,
}

impl TokenizedDoc {
    pub fn new(tweet_id: u64, tokens: Vec<String>, language: Language) -> Self {
        Self {
            tweet_id,
            tokens,
            language,
        }
    }

    /// Strips noise from raw tweet text and runs the tokenizer for `language`.
    /// `Other` falls back on the English rules.
    pub fn from_raw(tweet_id: u64, raw: &str, language: Language) -> Self {
        let clean = strip_noise(raw);
        let tokens = match language {
            Language::Chinese => tokenize_chinese(&clean),
            Language::English | Language::Other => tokenize_english(&clean),
        };
        Self::new(tweet_id, tokens, language)
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_english_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Lowercases and splits on anything that is not a letter, digit or
/// apostrophe.
pub fn tokenize_english(text: &str) -> Vec<String> {
    // Lowercase first: case mapping can emit non-token characters (İ → i̇).
    text.to_lowercase()
        .split(|c: char| !is_english_token_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Emits every CJK unigram, then every adjacent CJK bigram (never across a
/// non-CJK character), then each maximal non-CJK alphanumeric run as one
/// lowercase token.
pub fn tokenize_chinese(text: &str) -> Vec<String> {
    let mut unigrams = Vec::new();
    let mut bigrams = Vec::new();
    let mut others = Vec::new();
    let mut prev_cjk: Option<char> = None;
    let mut run = String::new();
    for c in text.chars() {
        if is_cjk(c) {
            if !run.is_empty() {
                others.push(std::mem::take(&mut run).to_lowercase());
            }
            unigrams.push(c.to_string());
            if let Some(p) = prev_cjk {
                bigrams.push(format!("{p}{c}"));
            }
            prev_cjk = Some(c);
        } else {
            prev_cjk = None;
            if is_english_token_char(c) {
                run.push(c);
            } else if !run.is_empty() {
                others.push(std::mem::take(&mut run).to_lowercase());
            }
        }
    }
    if !run.is_empty() {
        others.push(run.to_lowercase());
    }
    unigrams.extend(bigrams);
    unigrams.extend(others);
    unigrams
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn english_examples() {
        assert_eq!(
            tokenize_english("Happy 70th Anniversary to China."),
            toks(&["happy", "70th", "anniversary", "to", "china"])
        );
        assert_eq!(
            tokenize_english("Best wishes from Pakistan"),
            toks(&["best", "wishes", "from", "pakistan"])
        );
        assert_eq!(tokenize_english("don't"), toks(&["don't"]));
        assert!(tokenize_english("").is_empty());
        assert!(tokenize_english("!!! ...").is_empty());
    }

    #[test]
    fn chinese_examples() {
        assert_eq!(
            tokenize_chinese("祖国万岁"),
            toks(&["祖", "国", "万", "岁", "祖国", "国万", "万岁"])
        );
        assert_eq!(
            tokenize_chinese("国庆70年"),
            toks(&["国", "庆", "年", "国庆", "70"])
        );
        assert!(tokenize_chinese("").is_empty());
        assert_eq!(
            tokenize_chinese("我爱China!"),
            toks(&["我", "爱", "我爱", "china"])
        );
    }

    /// Brute-force window oracle: every adjacent pair of characters in the
    /// original text where both are CJK.
    fn window_bigrams(text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        chars
            .windows(2)
            .filter(|w| is_cjk(w[0]) && is_cjk(w[1]))
            .map(|w| w.iter().collect())
            .collect()
    }

    #[test]
    fn bigrams_never_cross_breaks() {
        for text in [
            "国庆70年",
            "中国 国庆",
            "a中b国c",
            "中华人民共和国成立70周年",
            "北京，上海",
        ] {
            let tokens = tokenize_chinese(text);
            let got: Vec<String> = tokens
                .into_iter()
                .filter(|t| t.chars().count() == 2 && t.chars().all(is_cjk))
                .collect();
            assert_eq!(got, window_bigrams(text), "{text}");
        }
    }

    #[test]
    fn from_raw_strips_noise() {
        let doc = TokenizedDoc::from_raw(
            5,
            "RT @bob: Happy #China70years https://t.co/abc",
            Language::English,
        );
        assert_eq!(doc.tokens, toks(&["happy", "china70years"]));
    }

    proptest! {
        #[test]
        fn english_tokenizer_is_idempotent(s in "\\PC{0,60}") {
            let once = tokenize_english(&s);
            let twice = tokenize_english(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn chinese_bigrams_match_window_oracle(s in "[国庆中华年a-c0-9 ,]{0,20}") {
            let got: Vec<String> = tokenize_chinese(&s)
                .into_iter()
                .filter(|t| t.chars().count() == 2 && t.chars().all(is_cjk))
                .collect();
            prop_assert_eq!(got, window_bigrams(&s));
        }
    }
}
