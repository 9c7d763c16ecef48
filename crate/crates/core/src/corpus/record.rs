use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum tweet length in characters.
pub const MAX_TWEET_CHARS: usize = 280;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NonHate,
    Hate,
}

impl Label {
    /// Logit index used by classifiers: 0 = NON_HATE, 1 = HATE.
    pub fn index(self) -> usize {
        match self {
            Label::NonHate => 0,
            Label::Hate => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::NonHate),
            1 => Some(Label::Hate),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hate => "hate",
            Label::NonHate => "non_hate",
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Hate => Label::NonHate,
            Label::NonHate => Label::Hate,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hate" => Ok(Label::Hate),
            "non_hate" | "non-hate" | "nonhate" => Ok(Label::NonHate),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Annotation scenario taxonomy. Each tag belongs to exactly one label class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioTag {
    GoBack,
    ExplicitSlur,
    BlameChina,
    ExplicitOriginClaim,
    ImplicitOriginTerm,
    OtherHate,
    Counterspeech,
    ConspiracyOrRumor,
    Reference,
    Discussion,
    PoliticalRumor,
    UnrelatedHashtagUse,
    AlternateMeaning,
    OffTopic,
}

impl ScenarioTag {
    pub const ALL: [ScenarioTag; 14] = [
        ScenarioTag::GoBack,
        ScenarioTag::ExplicitSlur,
        ScenarioTag::BlameChina,
        ScenarioTag::ExplicitOriginClaim,
        ScenarioTag::ImplicitOriginTerm,
        ScenarioTag::OtherHate,
        ScenarioTag::Counterspeech,
        ScenarioTag::ConspiracyOrRumor,
        ScenarioTag::Reference,
        ScenarioTag::Discussion,
        ScenarioTag::PoliticalRumor,
        ScenarioTag::UnrelatedHashtagUse,
        ScenarioTag::AlternateMeaning,
        ScenarioTag::OffTopic,
    ];

    pub fn class(self) -> Label {
        use ScenarioTag::*;
        match self {
            GoBack | ExplicitSlur | BlameChina | ExplicitOriginClaim | ImplicitOriginTerm
            | OtherHate => Label::Hate,
            Counterspeech | ConspiracyOrRumor | Reference | Discussion | PoliticalRumor
            | UnrelatedHashtagUse | AlternateMeaning | OffTopic => Label::NonHate,
        }
    }

    pub fn name(self) -> &'static str {
        use ScenarioTag::*;
        match self {
            GoBack => "GO_BACK",
            ExplicitSlur => "EXPLICIT_SLUR",
            BlameChina => "BLAME_CHINA",
            ExplicitOriginClaim => "EXPLICIT_ORIGIN_CLAIM",
            ImplicitOriginTerm => "IMPLICIT_ORIGIN_TERM",
            OtherHate => "OTHER_HATE",
            Counterspeech => "COUNTERSPEECH",
            ConspiracyOrRumor => "CONSPIRACY_OR_RUMOR",
            Reference => "REFERENCE",
            Discussion => "DISCUSSION",
            PoliticalRumor => "POLITICAL_RUMOR",
            UnrelatedHashtagUse => "UNRELATED_HASHTAG_USE",
            AlternateMeaning => "ALTERNATE_MEANING",
            OffTopic => "OFF_TOPIC",
        }
    }
}

impl fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_uppercase();
        ScenarioTag::ALL
            .into_iter()
            .find(|t| t.name() == wanted)
            .ok_or_else(|| format!("unknown scenario tag `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub author_handle: String,
    pub created_at: DateTime<Utc>,
    pub label: Option<Label>,
    pub scenario: Option<ScenarioTag>,
    /// Fixture-provided trim driver; `Some(false)` marks an irrelevant record.
    pub relevance_flag: Option<bool>,
    /// Set on augmentation copies: the id of the record this one duplicates.
    pub duplicate_of: Option<String>,
}

impl TweetRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        TweetRecord {
            id: id.into(),
            text: text.into(),
            author_handle: String::new(),
            created_at: DateTime::<Utc>::UNIX_EPOCH,
            label: None,
            scenario: None,
            relevance_flag: None,
            duplicate_of: None,
        }
    }

    pub fn labeled(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        TweetRecord {
            label: Some(label),
            ..TweetRecord::new(id, text)
        }
    }

    pub fn with_handle(mut self, handle: impl Into<String>) -> Self {
        self.author_handle = handle.into();
        self
    }

    pub fn with_scenario(mut self, scenario: ScenarioTag) -> Self {
        self.scenario = Some(scenario);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.text.chars().count();
        if len > MAX_TWEET_CHARS {
            return Err(Error::TextTooLong {
                id: self.id.clone(),
                len,
            });
        }
        if let Some(scenario) = self.scenario {
            match self.label {
                Some(label) if label == scenario.class() => {}
                other => {
                    return Err(Error::ScenarioMismatch {
                        id: self.id.clone(),
                        scenario: scenario.to_string(),
                        label: other.map_or_else(|| "<none>".to_string(), |l| l.to_string()),
                    })
                }
            }
        }
        Ok(())
    }
}

/// An ordered, labeled collection of records. Ids are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub name: String,
    records: Vec<TweetRecord>,
    pub source: String,
}

impl DatasetBundle {
    pub fn new(
        name: impl Into<String>,
        records: Vec<TweetRecord>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            record.validate()?;
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateId(record.id.clone()));
            }
        }
        Ok(DatasetBundle {
            name: name.into(),
            records,
            source: source.into(),
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        DatasetBundle {
            name: name.into(),
            records: Vec::new(),
            source: String::new(),
        }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TweetRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    /// Labels in record order; errors listing every unlabeled id.
    pub fn labels(&self) -> Result<Vec<Label>> {
        let missing: Vec<String> = self
            .records
            .iter()
            .filter(|r| r.label.is_none())
            .map(|r| r.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Unlabeled(missing));
        }
        Ok(self.records.iter().filter_map(|r| r.label).collect())
    }

    /// Builds a bundle from records already known to satisfy the invariants.
    pub(crate) fn from_parts(name: String, records: Vec<TweetRecord>, source: String) -> Self {
        debug_assert!({
            let ids: HashSet<_> = records.iter().map(|r| &r.id).collect();
            ids.len() == records.len()
        });
        DatasetBundle {
            name,
            records,
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_hate: usize,
    pub n_non_hate: usize,
    pub n_total: usize,
    pub portion_hate: f64,
    pub portion_non_hate: f64,
}

impl DatasetStats {
    pub fn from_counts(n_hate: usize, n_non_hate: usize) -> Self {
        let n_total = n_hate + n_non_hate;
        let (portion_hate, portion_non_hate) = if n_total == 0 {
            (0.0, 0.0)
        } else {
            (
                n_hate as f64 / n_total as f64,
                n_non_hate as f64 / n_total as f64,
            )
        };
        DatasetStats {
            n_hate,
            n_non_hate,
            n_total,
            portion_hate,
            portion_non_hate,
        }
    }

    /// Portions as printed in the overview tables, e.g. "0.24/0.76".
    pub fn portion_label(&self) -> String {
        format!("{:.2}/{:.2}", self.portion_hate, self.portion_non_hate)
    }
}

pub fn compute_stats(bundle: &DatasetBundle) -> Result<DatasetStats> {
    let labels = bundle.labels()?;
    let n_hate = labels.iter().filter(|l| **l == Label::Hate).count();
    Ok(DatasetStats::from_counts(n_hate, labels.len() - n_hate))
}

/// Concatenates `a` then `b`. When the id spaces collide, every id is
/// prefixed with its source bundle name (`name/id`).
pub fn concat_datasets(a: &DatasetBundle, b: &DatasetBundle) -> DatasetBundle {
    let a_ids: HashSet<&str> = a.ids().collect();
    let collides = b.ids().any(|id| a_ids.contains(id));
    // Same-name bundles cannot be told apart by name; use their position instead.
    let prefixes = if a.name == b.name {
        ["0".to_string(), "1".to_string()]
    } else {
        [a.name.clone(), b.name.clone()]
    };
    let records = [a, b]
        .into_iter()
        .zip(prefixes.iter())
        .flat_map(|(bundle, prefix)| {
            bundle.records().iter().map(move |record| {
                let mut record = record.clone();
                if collides {
                    record.id = format!("{prefix}/{}", record.id);
                    if let Some(orig) = record.duplicate_of.as_mut() {
                        *orig = format!("{prefix}/{orig}");
                    }
                }
                record
            })
        })
        .collect();
    let name = match (a.name.is_empty(), b.name.is_empty()) {
        (_, true) => a.name.clone(),
        (true, false) => b.name.clone(),
        _ => format!("{}+{}", a.name, b.name),
    };
    let source = format!("concat({}, {})", a.name, b.name);
    DatasetBundle::from_parts(name, records, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(name: &str, labels: &[Label]) -> DatasetBundle {
        let records = labels
            .iter()
            .enumerate()
            .map(|(i, l)| TweetRecord::labeled(format!("{name}-{i}"), "text", *l))
            .collect();
        DatasetBundle::new(name, records, "test").unwrap()
    }

    #[test]
    fn every_scenario_has_one_class() {
        let hate = ScenarioTag::ALL
            .iter()
            .filter(|t| t.class() == Label::Hate)
            .count();
        assert_eq!(hate, 6);
        assert_eq!(ScenarioTag::ALL.len() - hate, 8);
        for tag in ScenarioTag::ALL {
            assert_eq!(tag.name().parse::<ScenarioTag>().unwrap(), tag);
        }
    }

    #[test]
    fn scenario_must_match_label() {
        let r = TweetRecord::labeled("x", "t", Label::NonHate).with_scenario(ScenarioTag::GoBack);
        assert!(matches!(r.validate(), Err(Error::ScenarioMismatch { .. })));
        let r = TweetRecord::new("x", "t").with_scenario(ScenarioTag::OffTopic);
        assert!(r.validate().is_err());
    }

    #[test]
    fn text_limit_is_in_chars() {
        let ok = TweetRecord::new("a", "é".repeat(280));
        assert!(ok.validate().is_ok());
        let long = TweetRecord::new("b", "x".repeat(281));
        assert!(matches!(
            long.validate(),
            Err(Error::TextTooLong { len: 281, .. })
        ));
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let records = vec![TweetRecord::new("a", "x"), TweetRecord::new("a", "y")];
        let err = DatasetBundle::new("d", records, "").unwrap_err();
        assert!(err.to_string().contains("`a`"));
    }

    #[test]
    fn stats_single_hate() {
        let s = compute_stats(&bundle("s", &[Label::Hate])).unwrap();
        assert_eq!((s.n_hate, s.n_non_hate, s.n_total), (1, 0, 1));
        assert_eq!((s.portion_hate, s.portion_non_hate), (1.0, 0.0));
    }

    #[test]
    fn stats_require_labels() {
        let records = vec![
            TweetRecord::labeled("a", "x", Label::Hate),
            TweetRecord::new("b", "y"),
            TweetRecord::new("c", "z"),
        ];
        let b = DatasetBundle::new("d", records, "").unwrap();
        match compute_stats(&b) {
            Err(Error::Unlabeled(ids)) => assert_eq!(ids, vec!["b", "c"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn concat_keeps_order_and_identity() {
        let a = bundle("a", &[Label::Hate, Label::NonHate]);
        let b = bundle("b", &[Label::NonHate]);
        let c = concat_datasets(&a, &b);
        assert_eq!(c.ids().collect::<Vec<_>>(), vec!["a-0", "a-1", "b-0"]);

        let e = DatasetBundle::empty("");
        let same = concat_datasets(&a, &e);
        assert_eq!(same.records(), a.records());
        assert_eq!(same.name, "a");
    }

    #[test]
    fn concat_namespaces_colliding_ids() {
        let a = bundle("x", &[Label::Hate]);
        let b = bundle("x", &[Label::NonHate]).renamed("y");
        let mut b_records = b.clone().into_records();
        b_records[0].id = "x-0".into();
        let b = DatasetBundle::new("y", b_records, "").unwrap();
        let c = concat_datasets(&a, &b);
        assert_eq!(c.ids().collect::<Vec<_>>(), vec!["x/x-0", "y/x-0"]);

        let d = concat_datasets(&a, &a);
        assert_eq!(d.len(), 2);
        assert_eq!(d.ids().collect::<Vec<_>>(), vec!["0/x-0", "1/x-0"]);
    }
}
