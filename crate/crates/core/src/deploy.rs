//! Dataset deployment: error analysis, trimming and hate-record duplication.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetBundle, KeywordLexicon, Label, Provenance, TweetRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    /// False positives: non-hate predicted as hate.
    pub type_i: usize,
    /// False negatives: hate predicted as non-hate.
    pub type_ii: usize,
}

impl ErrorBreakdown {
    pub fn total(&self) -> usize {
        self.type_i + self.type_ii
    }
}

pub fn error_breakdown(y_true: &[Label], y_pred: &[Label]) -> Result<ErrorBreakdown> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut out = ErrorBreakdown::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (Label::NonHate, Label::Hate) => out.type_i += 1,
            (Label::Hate, Label::NonHate) => out.type_ii += 1,
            _ => {}
        }
    }
    Ok(out)
}

type Predicate = Arc<dyn Fn(&TweetRecord) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum TrimRule {
    /// Every keyword match of the record comes from the author handle only.
    UsernameOnlyMatch,
    /// The record carries `relevance_flag = false`.
    RelevanceFlagFalse,
    Custom {
        name: String,
        predicate: Predicate,
    },
}

impl TrimRule {
    pub fn custom(
        name: impl Into<String>,
        predicate: impl Fn(&TweetRecord) -> bool + Send + Sync + 'static,
    ) -> Self {
        TrimRule::Custom {
            name: name.into(),
            predicate: Arc::new(predicate),
        }
    }

    /// Removes exactly the listed record ids.
    pub fn ids<I: IntoIterator<Item = String>>(ids: I) -> Self {
        let ids: HashSet<String> = ids.into_iter().collect();
        TrimRule::custom("ID_LIST", move |r| ids.contains(&r.id))
    }

    pub fn name(&self) -> &str {
        match self {
            TrimRule::UsernameOnlyMatch => "USERNAME_ONLY_MATCH",
            TrimRule::RelevanceFlagFalse => "RELEVANCE_FLAG_FALSE",
            TrimRule::Custom { name, .. } => name,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "USERNAME_ONLY_MATCH" | "USERNAME_ONLY" => Some(TrimRule::UsernameOnlyMatch),
            "RELEVANCE_FLAG_FALSE" | "RELEVANCE_FLAG" => Some(TrimRule::RelevanceFlagFalse),
            _ => None,
        }
    }

    pub fn applies(&self, record: &TweetRecord, lexicon: &KeywordLexicon) -> bool {
        match self {
            TrimRule::UsernameOnlyMatch => {
                let matches = lexicon.match_keywords(record);
                !matches.is_empty() && matches.iter().all(|m| m.provenance == Provenance::Username)
            }
            TrimRule::RelevanceFlagFalse => record.relevance_flag == Some(false),
            TrimRule::Custom { predicate, .. } => predicate(record),
        }
    }
}

impl fmt::Debug for TrimRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub id: String,
    pub rule: String,
}

#[derive(Debug, Clone)]
pub struct TrimOutcome {
    pub bundle: DatasetBundle,
    pub removed: Vec<Removal>,
}

/// Drops every record satisfying any rule. Each removal is attributed to the
/// first rule (in list order) that fires.
pub fn trim(bundle: &DatasetBundle, rules: &[TrimRule], lexicon: &KeywordLexicon) -> TrimOutcome {
    let mut kept = Vec::with_capacity(bundle.len());
    let mut removed = Vec::new();
    for record in bundle.records() {
        match rules.iter().find(|rule| rule.applies(record, lexicon)) {
            Some(rule) => removed.push(Removal {
                id: record.id.clone(),
                rule: rule.name().to_string(),
            }),
            None => kept.push(record.clone()),
        }
    }
    TrimOutcome {
        bundle: DatasetBundle::from_parts(
            format!("{}-trim", bundle.name),
            kept,
            format!("trim({})", bundle.name),
        ),
        removed,
    }
}

/// Writes the removal report as CSV with columns `id,rule`.
pub fn write_removal_report<W: Write>(out: W, removed: &[Removal]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["id", "rule"])?;
    for r in removed {
        writer.write_record([&r.id, &r.rule])?;
    }
    writer.flush()?;
    Ok(())
}

/// Each hate record is followed by `factor - 1` textually identical copies
/// with fresh ids; non-hate records are untouched.
pub fn augment_duplicate_hate(bundle: &DatasetBundle, factor: usize) -> Result<DatasetBundle> {
    if factor < 2 {
        return Err(Error::InvalidFactor(factor));
    }
    bundle.labels()?;
    let mut taken: HashSet<String> = bundle.ids().map(str::to_string).collect();
    let mut records = Vec::with_capacity(bundle.len());
    for record in bundle.records() {
        records.push(record.clone());
        if record.label != Some(Label::Hate) {
            continue;
        }
        for k in 1..factor {
            let mut id = format!("{}~dup{k}", record.id);
            while taken.contains(&id) {
                id.push('\'');
            }
            taken.insert(id.clone());
            let mut copy = record.clone();
            copy.id = id;
            copy.duplicate_of = Some(record.duplicate_of.clone().unwrap_or(record.id.clone()));
            records.push(copy);
        }
    }
    Ok(DatasetBundle::from_parts(
        format!("{}-agu", bundle.name),
        records,
        format!("augment({}, factor={factor})", bundle.name),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_lexicon, compute_stats};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(bits: &[bool]) -> Vec<Label> {
        bits.iter()
            .map(|&b| if b { Label::Hate } else { Label::NonHate })
            .collect()
    }

    fn bundle(n_hate: usize, n_non: usize) -> DatasetBundle {
        let records = (0..n_hate + n_non)
            .map(|i| {
                let l = if i < n_hate {
                    Label::Hate
                } else {
                    Label::NonHate
                };
                TweetRecord::labeled(format!("r{i}"), format!("text {i}"), l)
            })
            .collect();
        DatasetBundle::new("b", records, "").unwrap()
    }

    #[test]
    fn breakdown_definitions() {
        let t = vec![Label::Hate; 5];
        let p = vec![Label::NonHate; 5];
        assert_eq!(
            error_breakdown(&t, &p).unwrap(),
            ErrorBreakdown {
                type_i: 0,
                type_ii: 5
            }
        );
        assert_eq!(error_breakdown(&t, &t).unwrap(), ErrorBreakdown::default());
        assert!(matches!(
            error_breakdown(&t, &p[..4]),
            Err(Error::LengthMismatch { left: 5, right: 4 })
        ));
    }

    #[test]
    fn breakdown_matches_pairwise_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let t: Vec<bool> = (0..200).map(|_| rng.gen()).collect();
        let p: Vec<bool> = (0..200).map(|_| rng.gen()).collect();
        let mut fp = 0;
        let mut fn_ = 0;
        for i in 0..200 {
            if !t[i] && p[i] {
                fp += 1;
            }
            if t[i] && !p[i] {
                fn_ += 1;
            }
        }
        let b = error_breakdown(&labels(&t), &labels(&p)).unwrap();
        assert_eq!((b.type_i, b.type_ii), (fp, fn_));
        let wrong = t.iter().zip(&p).filter(|(a, b)| a != b).count();
        assert_eq!(b.total(), wrong);
    }

    #[test]
    fn username_only_records_are_trimmed() {
        let lex = build_lexicon();
        let records = vec![
            TweetRecord::labeled("keep", "the #KungFlu again", Label::Hate).with_handle("yokel1"),
            TweetRecord::labeled("drop", "this is very chilling", Label::NonHate)
                .with_handle("ch1nk_daily"),
            TweetRecord::labeled("plain", "nothing here", Label::NonHate).with_handle("someone"),
        ];
        let b = DatasetBundle::new("b", records, "").unwrap();
        let out = trim(&b, &[TrimRule::UsernameOnlyMatch], &lex);
        assert_eq!(out.bundle.ids().collect::<Vec<_>>(), vec!["keep", "plain"]);
        assert_eq!(
            out.removed,
            vec![Removal {
                id: "drop".into(),
                rule: "USERNAME_ONLY_MATCH".into()
            }]
        );
    }

    #[test]
    fn trim_identity_when_nothing_matches() {
        let lex = build_lexicon();
        let b = bundle(3, 3);
        let out = trim(
            &b,
            &[
                TrimRule::RelevanceFlagFalse,
                TrimRule::ids(vec!["zz".into()]),
            ],
            &lex,
        );
        assert_eq!(out.bundle.records(), b.records());
        assert!(out.removed.is_empty());
    }

    #[test]
    fn first_rule_gets_the_credit() {
        let lex = build_lexicon();
        let mut records = bundle(1, 1).into_records();
        records[0].relevance_flag = Some(false);
        let b = DatasetBundle::new("b", records, "").unwrap();
        let rules = [
            TrimRule::ids(vec!["r0".into()]),
            TrimRule::RelevanceFlagFalse,
        ];
        let out = trim(&b, &rules, &lex);
        assert_eq!(out.removed[0].rule, "ID_LIST");
        let mut buf = Vec::new();
        write_removal_report(&mut buf, &out.removed).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,rule\nr0,ID_LIST\n");
    }

    #[test]
    fn augment_counts() {
        let b = bundle(10, 5);
        let a = augment_duplicate_hate(&b, 3).unwrap();
        let s = compute_stats(&a).unwrap();
        assert_eq!((s.n_hate, s.n_non_hate), (30, 5));
        assert_eq!(a.records()[1].duplicate_of.as_deref(), Some("r0"));
        assert_eq!(a.records()[1].text, a.records()[0].text);

        let none = bundle(0, 4);
        assert_eq!(
            augment_duplicate_hate(&none, 2).unwrap().records(),
            none.records()
        );
        assert!(matches!(
            augment_duplicate_hate(&b, 1),
            Err(Error::InvalidFactor(1))
        ));
    }

    #[test]
    fn augment_ids_stay_unique() {
        let records = vec![
            TweetRecord::labeled("a", "x", Label::Hate),
            TweetRecord::labeled("a~dup1", "y", Label::NonHate),
        ];
        let b = DatasetBundle::new("b", records, "").unwrap();
        let a = augment_duplicate_hate(&b, 2).unwrap();
        let ids: HashSet<&str> = a.ids().collect();
        assert_eq!(ids.len(), 3);
    }

    proptest! {
        #[test]
        fn augment_scales_hate_only(n_hate in 0usize..40, n_non in 0usize..40, k in 2usize..6) {
            let b = bundle(n_hate, n_non);
            let a = augment_duplicate_hate(&b, k).unwrap();
            let before = compute_stats(&b).unwrap();
            let after = compute_stats(&a).unwrap();
            prop_assert_eq!(after.n_hate, k * before.n_hate);
            prop_assert_eq!(after.n_non_hate, before.n_non_hate);
            for r in a.records().iter().filter(|r| r.duplicate_of.is_some()) {
                let orig = b.records().iter().find(|o| Some(&o.id) == r.duplicate_of.as_ref()).unwrap();
                prop_assert_eq!(&orig.text, &r.text);
            }
        }

        #[test]
        fn trim_only_removes_rule_hits(flags in prop::collection::vec(prop::option::of(any::<bool>()), 0..60)) {
            let lex = build_lexicon();
            let records: Vec<TweetRecord> = flags.iter().enumerate().map(|(i, f)| {
                let mut r = TweetRecord::labeled(format!("r{i}"), "plain words", Label::NonHate);
                r.relevance_flag = *f;
                r
            }).collect();
            let b = DatasetBundle::new("b", records, "").unwrap();
            let out = trim(&b, &[TrimRule::RelevanceFlagFalse], &lex);
            for r in out.bundle.records() {
                prop_assert_ne!(r.relevance_flag, Some(false));
            }
            let expected_removed = flags.iter().filter(|f| **f == Some(false)).count();
            prop_assert_eq!(out.removed.len(), expected_removed);
        }
    }
}
