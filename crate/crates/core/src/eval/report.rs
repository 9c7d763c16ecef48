//! Validity filtering, bolding and table rendering for result tables.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, confusion, mcc, ConfusionMatrix};
use crate::corpus::{DatasetStats, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub training_set: String,
    pub technique: String,
    /// Name of the evaluated (test) dataset.
    pub test_set: String,
    pub accuracy: f64,
    pub mcc: f64,
    pub valid: bool,
    #[serde(default)]
    pub bold_accuracy: bool,
    #[serde(default)]
    pub bold_mcc: bool,
    #[serde(default)]
    pub confusion: Option<ConfusionMatrix>,
}

impl MetricsReport {
    pub fn new(
        training_set: impl Into<String>,
        technique: impl Into<String>,
        test_set: impl Into<String>,
        accuracy: f64,
        mcc: f64,
    ) -> Self {
        MetricsReport {
            training_set: training_set.into(),
            technique: technique.into(),
            test_set: test_set.into(),
            accuracy,
            mcc,
            valid: mcc > 0.0,
            bold_accuracy: false,
            bold_mcc: false,
            confusion: None,
        }
    }

    pub fn from_predictions(
        training_set: impl Into<String>,
        technique: impl Into<String>,
        test_set: impl Into<String>,
        y_true: &[Label],
        y_pred: &[Label],
    ) -> Result<Self> {
        let cm = confusion(y_true, y_pred)?;
        let mut report =
            MetricsReport::new(training_set, technique, test_set, accuracy(&cm)?, mcc(&cm)?);
        report.confusion = Some(cm);
        Ok(report)
    }
}

/// Marks validity (MCC > 0), bolds accuracies above the test set's non-hate
/// portion, and bolds the MCC that is the strict maximum of its section.
///
/// `stats` is keyed by test-set name; `section` maps a report to its section key.
pub fn apply_report_rules<F>(
    reports: &[MetricsReport],
    stats: &HashMap<String, DatasetStats>,
    section: F,
) -> Result<Vec<MetricsReport>>
where
    F: Fn(&MetricsReport) -> String,
{
    let mut out = Vec::with_capacity(reports.len());
    for r in reports {
        let s = stats
            .get(&r.test_set)
            .ok_or_else(|| Error::MissingStats(r.test_set.clone()))?;
        let mut r = r.clone();
        r.valid = r.mcc > 0.0;
        r.bold_accuracy = r.valid && r.accuracy > s.portion_non_hate;
        r.bold_mcc = false;
        out.push(r);
    }
    let mut best: HashMap<String, (f64, usize)> = HashMap::new();
    for r in out.iter().filter(|r| r.valid) {
        let e = best.entry(section(r)).or_insert((f64::NEG_INFINITY, 0));
        if r.mcc > e.0 {
            *e = (r.mcc, 1);
        } else if r.mcc == e.0 {
            e.1 += 1;
        }
    }
    for r in out.iter_mut().filter(|r| r.valid) {
        let (top, count) = best[&section(r)];
        r.bold_mcc = r.mcc == top && count == 1;
    }
    Ok(out)
}

/// Sections keyed by training set.
pub fn by_training_set(r: &MetricsReport) -> String {
    r.training_set.clone()
}

pub fn valid_rows(reports: &[MetricsReport]) -> Vec<MetricsReport> {
    reports.iter().filter(|r| r.valid).cloned().collect()
}

/// One rendered row. `None` cells render as the "/" placeholder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub training_set: String,
    pub technique: String,
    pub test_set: Option<String>,
    pub accuracy: Option<f64>,
    pub mcc: Option<f64>,
    pub bold_accuracy: bool,
    pub bold_mcc: bool,
}

impl TableRow {
    pub fn placeholder(training_set: impl Into<String>, technique: impl Into<String>) -> Self {
        TableRow {
            training_set: training_set.into(),
            technique: technique.into(),
            test_set: None,
            accuracy: None,
            mcc: None,
            bold_accuracy: false,
            bold_mcc: false,
        }
    }

    pub fn is_placeholder(&self) -> bool {
        self.test_set.is_none()
    }
}

impl From<&MetricsReport> for TableRow {
    fn from(r: &MetricsReport) -> Self {
        TableRow {
            training_set: r.training_set.clone(),
            technique: r.technique.clone(),
            test_set: Some(r.test_set.clone()),
            accuracy: Some(r.accuracy),
            mcc: Some(r.mcc),
            bold_accuracy: r.bold_accuracy,
            bold_mcc: r.bold_mcc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

const HEADERS: [&str; 5] = ["Training set", "Technique", "Test set", "Accuracy", "MCC"];
const CSV_HEADERS: [&str; 7] = [
    "training_set",
    "technique",
    "test_set",
    "accuracy",
    "mcc",
    "bold_accuracy",
    "bold_mcc",
];

fn cell(v: Option<f64>, places: usize, bold: bool) -> String {
    match v {
        None => "/".to_string(),
        Some(v) if bold => format!("**{v:.places$}**"),
        Some(v) => format!("{v:.places$}"),
    }
}

impl Table {
    /// Valid reports only, in input order.
    pub fn from_reports(reports: &[MetricsReport]) -> Self {
        Table {
            rows: reports
                .iter()
                .filter(|r| r.valid)
                .map(TableRow::from)
                .collect(),
        }
    }

    /// Markdown with accuracies at 6 and MCCs at 3 decimal places; bold cells
    /// are wrapped in `**`.
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "| {} |\n|{}\n",
            HEADERS.join(" | "),
            "---|".repeat(HEADERS.len())
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.training_set,
                r.technique,
                r.test_set.as_deref().unwrap_or("/"),
                cell(r.accuracy, 6, r.bold_accuracy),
                cell(r.mcc, 3, r.bold_mcc),
            );
        }
        out
    }

    /// CSV with both metrics at 6 decimal places and explicit bold columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADERS)?;
        for r in &self.rows {
            w.write_record([
                r.training_set.clone(),
                r.technique.clone(),
                r.test_set.clone().unwrap_or_else(|| "/".into()),
                cell(r.accuracy, 6, false),
                cell(r.mcc, 6, false),
                r.bold_accuracy.to_string(),
                r.bold_mcc.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let bad = |reason: String| Error::MalformedRow { row: i + 1, reason };
            if rec.len() != CSV_HEADERS.len() {
                return Err(bad(format!("expected {} fields", CSV_HEADERS.len())));
            }
            let opt_num = |s: &str| -> Result<Option<f64>> {
                if s == "/" {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|e| bad(format!("`{s}`: {e}")))
                }
            };
            let flag = |s: &str| s.parse::<bool>().map_err(|e| bad(e.to_string()));
            rows.push(TableRow {
                training_set: rec[0].to_string(),
                technique: rec[1].to_string(),
                test_set: (&rec[2] != "/").then(|| rec[2].to_string()),
                accuracy: opt_num(&rec[3])?,
                mcc: opt_num(&rec[4])?,
                bold_accuracy: flag(&rec[5])?,
                bold_mcc: flag(&rec[6])?,
            });
        }
        Ok(Table { rows })
    }
}

/// Renders valid reports as (markdown, csv).
pub fn emit_table(reports: &[MetricsReport]) -> Result<(String, String)> {
    let table = Table::from_reports(reports);
    Ok((table.to_markdown(), table.to_csv()?))
}
