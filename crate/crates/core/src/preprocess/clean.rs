use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::DatasetBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub drop_mentions: bool,
    pub drop_hashtags: bool,
    pub drop_urls: bool,
    pub drop_emojis: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            drop_mentions: true,
            drop_hashtags: true,
            drop_urls: true,
            drop_emojis: true,
        }
    }
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\w+").unwrap());
static SPACES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

/// Emoji code point ranges removed by [`clean_tweet`].
pub const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x1F1E6, 0x1F1FF), // regional indicators (flags)
    (0x1F300, 0x1F5FF), // misc symbols and pictographs
    (0x1F600, 0x1F64F), // emoticons
    (0x1F680, 0x1F6FF), // transport and map symbols
    (0x1F900, 0x1F9FF), // supplemental symbols and pictographs
    (0x1FA70, 0x1FAFF), // symbols and pictographs extended-a
    (0x2600, 0x26FF),   // misc symbols
    (0x2700, 0x27BF),   // dingbats
    (0xFE0F, 0xFE0F),   // emoji presentation selector
    (0x200D, 0x200D),   // zero width joiner
];

pub fn is_emoji(c: char) -> bool {
    let c = c as u32;
    EMOJI_RANGES.iter().any(|&(lo, hi)| (lo..=hi).contains(&c))
}

/// Removes emojis, URLs, mentions and hashtags (in that order, so no removal
/// can assemble a new token for a later pass), then collapses whitespace.
pub fn clean_tweet(text: &str, config: &CleanConfig) -> String {
    let mut out: String = if config.drop_emojis {
        text.chars().filter(|c| !is_emoji(*c)).collect()
    } else {
        text.to_string()
    };
    if config.drop_urls {
        out = URL.replace_all(&out, " ").into_owned();
    }
    if config.drop_mentions {
        out = MENTION.replace_all(&out, " ").into_owned();
    }
    if config.drop_hashtags {
        out = HASHTAG.replace_all(&out, " ").into_owned();
    }
    SPACES.replace_all(&out, " ").trim().to_string()
}

/// Applies [`clean_tweet`] to every record's text.
pub fn clean_bundle(bundle: &DatasetBundle, config: &CleanConfig) -> DatasetBundle {
    let records = bundle
        .records()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.text = clean_tweet(&r.text, config);
            r
        })
        .collect();
    DatasetBundle::from_parts(
        bundle.name.clone(),
        records,
        format!("clean({})", bundle.name),
    )
}
