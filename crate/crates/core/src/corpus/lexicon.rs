//! Keyword lexicon and lexical keyword matching.
//!
//! Matching is lexical: a hit says nothing about the label. Text is split on
//! Unicode word boundaries, compared case-insensitively, and a word written
//! with look-alike digits ("ch1nk") also matches the plain surface it expands
//! to through the substitution map.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::record::TweetRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KeywordCategory {
    Covid,
    HateChina,
    HateAsiaOther,
    Obfuscated,
    Extended,
}

impl KeywordCategory {
    pub fn name(self) -> &'static str {
        match self {
            KeywordCategory::Covid => "COVID",
            KeywordCategory::HateChina => "HATE_CHINA",
            KeywordCategory::HateAsiaOther => "HATE_ASIA_OTHER",
            KeywordCategory::Obfuscated => "OBFUSCATED",
            KeywordCategory::Extended => "EXTENDED",
        }
    }
}

impl fmt::Display for KeywordCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KeywordCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "COVID" => Ok(KeywordCategory::Covid),
            "HATE_CHINA" => Ok(KeywordCategory::HateChina),
            "HATE_ASIA_OTHER" => Ok(KeywordCategory::HateAsiaOther),
            "OBFUSCATED" => Ok(KeywordCategory::Obfuscated),
            "EXTENDED" => Ok(KeywordCategory::Extended),
            other => Err(format!("unknown keyword category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub category: KeywordCategory,
    pub is_hashtag_only: bool,
    #[serde(skip)]
    words: Vec<String>,
}

impl LexiconEntry {
    fn new(surface: &str, category: KeywordCategory, is_hashtag_only: bool) -> Self {
        let surface = surface.trim().trim_start_matches('#').to_lowercase();
        let words = words_of(&surface).into_iter().map(|w| w.text).collect();
        LexiconEntry {
            surface,
            category,
            is_hashtag_only,
            words,
        }
    }

    /// The surface as it is searched for inside an author handle.
    fn handle_form(&self) -> String {
        self.words.concat()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Text,
    Hashtag,
    Username,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordMatch {
    pub record_id: String,
    /// Matched form; hashtag occurrences carry the leading `#`.
    pub surface: String,
    pub category: KeywordCategory,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordLexicon {
    entries: Vec<LexiconEntry>,
    substitution_map: BTreeMap<char, Vec<char>>,
}

const COVID_TERMS: &[&str] = &["coronavirus", "covid-19", "covid19", "corona virus"];

const CHINA_HASHTAGS: &[&str] = &[
    "#CCPVirus",
    "#ChinaDidThis",
    "#ChinaLiedPeopleDied",
    "#ChinaVirus",
    "#ChineseVirus",
    "#ChineseBioterrorism",
    "#FuckChina",
    "#KungFlu",
    "#MakeChinaPay",
    "#wuhanflu",
    "#wuhanvirus",
];

const CHINA_TERMS: &[&str] = &[
    "Chinese virus",
    "wuhan virus",
    "chink",
    "chinky",
    "chocky",
    "cina",
    "communistvirus",
    "cokin",
];

const ASIA_OTHER_TERMS: &[&str] = &[
    "churka",
    "ting tong",
    "coolie",
    "dink",
    "slant",
    "slant eye",
    "slopehead",
    "yokel",
];

const OBFUSCATED_TERMS: &[&str] = &[
    "ch1nk", "ch1nky", "ch0nky", "c1na", "c0kin", "s1ant", "y0kel",
];

const EXTENDED_TERMS: &[&str] = &[
    "ching chong",
    "chingchong",
    "ch1ng chong",
    "ch1ng ch0ng",
    "chicom",
    "ch1com",
];

pub fn default_substitution_map() -> BTreeMap<char, Vec<char>> {
    BTreeMap::from([
        ('0', vec!['o']),
        ('1', vec!['l', 'i']),
        ('3', vec!['e']),
        ('4', vec!['a']),
        ('5', vec!['s']),
        ('7', vec!['t']),
    ])
}

/// The fetch lexicon: COVID terms, China-directed hate terms and hashtags,
/// other-Asian hate terms, their digit-obfuscated variants and the extended terms.
pub fn build_lexicon() -> KeywordLexicon {
    let mut lexicon = KeywordLexicon::empty(default_substitution_map());
    let lists: [(&[&str], KeywordCategory); 6] = [
        (COVID_TERMS, KeywordCategory::Covid),
        (CHINA_HASHTAGS, KeywordCategory::HateChina),
        (CHINA_TERMS, KeywordCategory::HateChina),
        (ASIA_OTHER_TERMS, KeywordCategory::HateAsiaOther),
        (OBFUSCATED_TERMS, KeywordCategory::Obfuscated),
        (EXTENDED_TERMS, KeywordCategory::Extended),
    ];
    for (terms, category) in lists {
        for term in terms {
            lexicon.insert(term, category, term.starts_with('#'));
        }
    }
    lexicon
}

impl KeywordLexicon {
    pub fn empty(substitution_map: BTreeMap<char, Vec<char>>) -> Self {
        KeywordLexicon {
            entries: Vec::new(),
            substitution_map,
        }
    }

    /// Adds an entry unless the (surface, category) pair is already present.
    pub fn insert(&mut self, surface: &str, category: KeywordCategory, hashtag_only: bool) -> bool {
        let entry = LexiconEntry::new(surface, category, hashtag_only);
        if entry.words.is_empty()
            || self
                .entries
                .iter()
                .any(|e| e.surface == entry.surface && e.category == entry.category)
        {
            return false;
        }
        self.entries.push(entry);
        true
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn substitution_map(&self) -> &BTreeMap<char, Vec<char>> {
        &self.substitution_map
    }

    pub fn get(&self, surface: &str) -> Option<&LexiconEntry> {
        self.entries.iter().find(|e| e.surface == surface)
    }

    /// `surface<TAB>category<TAB>hashtag_only`, one entry per line.
    pub fn to_export(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.surface, e.category, e.is_hashtag_only))
            .collect()
    }

    pub fn from_export(text: &str) -> Result<Self> {
        let mut lexicon = KeywordLexicon::empty(default_substitution_map());
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| Error::MalformedRow { row: i + 1, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, category, hashtag_only] = fields[..] else {
                return Err(bad(format!(
                    "expected 3 tab-separated fields, got {}",
                    fields.len()
                )));
            };
            let category = category.parse().map_err(bad)?;
            let hashtag_only = hashtag_only
                .trim()
                .parse::<bool>()
                .map_err(|e| bad(e.to_string()))?;
            lexicon.insert(surface, category, hashtag_only);
        }
        Ok(lexicon)
    }

    /// True when `word` equals `surface` after replacing each digit in `word`
    /// by one of its substitution candidates.
    fn word_matches(&self, word: &str, surface: &str) -> bool {
        if word == surface {
            return true;
        }
        let mut w = word.chars();
        let mut s = surface.chars();
        loop {
            match (w.next(), s.next()) {
                (None, None) => return true,
                (Some(a), Some(b)) if a == b => {}
                (Some(a), Some(b)) => match self.substitution_map.get(&a) {
                    Some(cands) if cands.contains(&b) => {}
                    _ => return false,
                },
                _ => return false,
            }
        }
    }

    /// Digit-bearing obfuscated surfaces none of whose expansions is a plain
    /// (digit-free) surface of the lexicon.
    pub fn unsound_obfuscations(&self) -> Vec<&str> {
        let plain: Vec<&LexiconEntry> = self
            .entries
            .iter()
            .filter(|e| !e.surface.chars().any(|c| c.is_ascii_digit()))
            .collect();
        self.entries
            .iter()
            .filter(|e| e.category == KeywordCategory::Obfuscated)
            .filter(|e| {
                !plain.iter().any(|p| {
                    p.words.len() == e.words.len()
                        && e.words
                            .iter()
                            .zip(&p.words)
                            .all(|(w, s)| self.word_matches(w, s))
                })
            })
            .map(|e| e.surface.as_str())
            .collect()
    }

    pub fn match_keywords(&self, record: &TweetRecord) -> Vec<KeywordMatch> {
        let words = words_of(&record.text);
        let handle = record.author_handle.to_lowercase();
        let mut out = Vec::new();
        for entry in &self.entries {
            let n = entry.words.len();
            let hit = (0..words.len().saturating_sub(n - 1)).find(|&start| {
                let window = &words[start..start + n];
                if entry.is_hashtag_only && !(n == 1 && window[0].hashtag) {
                    return false;
                }
                window
                    .iter()
                    .zip(&entry.words)
                    .all(|(w, s)| self.word_matches(&w.text, s))
            });
            let (surface, provenance) = match hit {
                Some(start) if words[start].hashtag => {
                    (format!("#{}", entry.surface), Provenance::Hashtag)
                }
                Some(_) => (entry.surface.clone(), Provenance::Text),
                None if !handle.is_empty() && handle.contains(&entry.handle_form()) => {
                    (entry.surface.clone(), Provenance::Username)
                }
                None => continue,
            };
            out.push(KeywordMatch {
                record_id: record.id.clone(),
                surface,
                category: entry.category,
                provenance,
            });
        }
        out
    }
}

/// Convenience wrapper over [`KeywordLexicon::match_keywords`].
pub fn match_keywords(record: &TweetRecord, lexicon: &KeywordLexicon) -> Vec<KeywordMatch> {
    lexicon.match_keywords(record)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Word {
    text: String,
    hashtag: bool,
}

fn words_of(text: &str) -> Vec<Word> {
    text.split_word_bound_indices()
        .filter(|(_, w)| w.chars().any(char::is_alphanumeric))
        .map(|(at, w)| {
            let mut lower = w.to_lowercase();
            for suffix in ["'s", "\u{2019}s"] {
                if lower.len() > suffix.len() + 1 && lower.ends_with(suffix) {
                    lower.truncate(lower.len() - suffix.len());
                    break;
                }
            }
            Word {
                text: lower,
                hashtag: text[..at].ends_with('#'),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use std::collections::HashSet;

    fn rec(text: &str) -> TweetRecord {
        TweetRecord::labeled("r", text, Label::NonHate)
    }

    #[test]
    fn lexicon_has_expected_shape() {
        let lex = build_lexicon();
        assert_eq!(lex.entries().len(), 4 + 11 + 8 + 8 + 7 + 6);
        let kungflu = lex.get("kungflu").unwrap();
        assert_eq!(kungflu.category, KeywordCategory::HateChina);
        assert!(kungflu.is_hashtag_only);
        assert_eq!(
            lex.get("ch1com").unwrap().category,
            KeywordCategory::Extended
        );
        assert!(!lex.get("chink").unwrap().is_hashtag_only);
        let mut seen = HashSet::new();
        for e in lex.entries() {
            assert_eq!(e.surface, e.surface.to_lowercase());
            assert!(seen.insert((e.surface.clone(), e.category)));
        }
        let map = lex.substitution_map();
        assert_eq!(map[&'3'], vec!['e']);
        assert!(map[&'1'].contains(&'l') && map[&'1'].contains(&'i'));
        assert_eq!(map[&'0'], vec!['o']);
    }

    #[test]
    fn insert_rejects_duplicate_pairs() {
        let mut lex = build_lexicon();
        assert!(!lex.insert("CHINK", KeywordCategory::HateChina, false));
        assert!(lex.insert("chink", KeywordCategory::Extended, false));
    }

    #[test]
    fn hashtag_match() {
        let lex = build_lexicon();
        let m = lex.match_keywords(&rec("Get well soon from #ChineseVirus!"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "#chinesevirus");
        assert_eq!(m[0].provenance, Provenance::Hashtag);
    }

    #[test]
    fn hashtag_only_needs_marker() {
        let lex = build_lexicon();
        assert!(lex.match_keywords(&rec("the kungflu again")).is_empty());
        let m = lex.match_keywords(&rec("#chink"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].provenance, Provenance::Hashtag);
    }

    #[test]
    fn lexical_match_ignores_meaning() {
        let lex = build_lexicon();
        let m = lex.match_keywords(&rec("a chink in the armor of your contract"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "chink");
        assert_eq!(m[0].provenance, Provenance::Text);
    }

    #[test]
    fn word_boundaries_are_respected() {
        let lex = build_lexicon();
        let m = lex.match_keywords(&rec("chinky"));
        assert_eq!(
            m.iter().map(|m| m.surface.as_str()).collect::<Vec<_>>(),
            vec!["chinky"]
        );
        assert!(lex
            .match_keywords(&rec("vaccination and rinkydink"))
            .is_empty());
        assert!(lex.match_keywords(&rec("nothing relevant here")).is_empty());
    }

    #[test]
    fn multi_word_and_hyphenated_surfaces() {
        let lex = build_lexicon();
        let surfaces = |t: &str| {
            lex.match_keywords(&rec(t))
                .into_iter()
                .map(|m| m.surface)
                .collect::<Vec<_>>()
        };
        assert_eq!(surfaces("the Wuhan  Virus spread"), vec!["wuhan virus"]);
        assert_eq!(surfaces("COVID-19 cases"), vec!["covid-19"]);
        assert_eq!(surfaces("ching, chong"), vec!["ching chong"]);
        assert!(surfaces("wuhan and the virus").is_empty());
    }

    #[test]
    fn obfuscated_words_expand() {
        let lex = build_lexicon();
        let m = lex.match_keywords(&rec(
            "Koreans are literally living rent free of all ch1nk\u{2019}s head.",
        ));
        let mut got: Vec<_> = m.iter().map(|m| (m.surface.as_str(), m.category)).collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                ("ch1nk", KeywordCategory::Obfuscated),
                ("chink", KeywordCategory::HateChina)
            ]
        );
        let m = lex.match_keywords(&rec("sl4nt"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "slant");
    }

    #[test]
    fn username_only_provenance() {
        let lex = build_lexicon();
        let r = rec("this is very chilling").with_handle("TheYokelKing");
        let m = lex.match_keywords(&r);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].surface, "yokel");
        assert_eq!(m[0].provenance, Provenance::Username);

        let r = rec("yokel talk").with_handle("yokel");
        let m = lex.match_keywords(&r);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].provenance, Provenance::Text);
    }

    #[test]
    fn export_round_trip() {
        let lex = build_lexicon();
        let text = lex.to_export();
        assert!(text.starts_with("coronavirus\tCOVID\tfalse\n"));
        assert!(text.contains("kungflu\tHATE_CHINA\ttrue\n"));
        assert_eq!(KeywordLexicon::from_export(&text).unwrap(), lex);
        assert!(KeywordLexicon::from_export("x\tNOPE\tfalse").is_err());
    }

    #[test]
    fn soundness_exception_is_only_ch0nky() {
        // The plain list has "chocky" but no "chonky".
        assert_eq!(build_lexicon().unsound_obfuscations(), vec!["ch0nky"]);
    }
}
