use std::sync::LazyLock;

use regex::Regex;

static RETWEET_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:RT(?:\s+|$))+").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"https?://\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[A-Za-z0-9_]+:?").unwrap());
static HASH_PREFIX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\w)").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\w+").unwrap());

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_common(text: &str) -> String {
    let text = RETWEET_MARKER.replace(text, "");
    let text = URL.replace_all(&text, " ");
    MENTION.replace_all(&text, " ").into_owned()
}

/// Drops URLs, a leading `RT` marker and `@mentions`, keeps hashtag bodies as
/// plain words, and collapses whitespace. Never lengthens the input.
pub fn strip_noise(text: &str) -> String {
    let text = strip_common(text);
    let text = HASH_PREFIX.replace_all(&text, "$1");
    collapse_whitespace(&text)
}

/// Like [`strip_noise`] but removes hashtags entirely; used for the
/// character-ratio language partition.
pub fn scrub_for_language(text: &str) -> String {
    let text = strip_common(text);
    let text = HASHTAG.replace_all(&text, " ");
    collapse_whitespace(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn retweet_example() {
        assert_eq!(
            strip_noise("RT @HappsNews: NOW: Pro-democracy protests … https://t.co/x"),
            "NOW: Pro-democracy protests …"
        );
    }

    #[test]
    fn hash_is_dropped() {
        assert_eq!(strip_noise("#China70years is here"), "China70years is here");
        assert_eq!(strip_noise("#中国 #国庆节快乐"), "中国 国庆节快乐");
    }

    #[test]
    fn empty_and_edge_inputs() {
        assert_eq!(strip_noise(""), "");
        assert_eq!(strip_noise("RT"), "");
        // Only a leading marker counts.
        assert_eq!(strip_noise("ART RT me"), "ART RT me");
        assert_eq!(strip_noise("#"), "#");
    }

    #[test]
    fn language_scrub_drops_tags() {
        assert_eq!(scrub_for_language("#中国 hello @bob http://x.y/z"), "hello");
    }

    proptest! {
        #[test]
        fn never_lengthens(s in "\\PC{0,80}") {
            prop_assert!(strip_noise(&s).len() <= s.len());
            prop_assert!(scrub_for_language(&s).len() <= s.len());
        }

        #[test]
        fn output_has_no_urls_or_mentions(s in "(RT |@[a-z]{1,5} |https?://[a-z./]{1,9} |word |#tag )*") {
            let out = strip_noise(&s);
            prop_assert!(!out.contains("http://") && !out.contains("https://"));
            prop_assert!(!out.contains('@'));
        }
    }
}
