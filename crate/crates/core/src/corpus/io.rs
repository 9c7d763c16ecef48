//! Dataset files: CSV with a header row, or JSONL with one object per line.
//!
//! Columns / keys: `id, text, author_handle, created_at, label, scenario,
//! relevance_flag` and the optional `duplicate_of`. `label` is `hate`,
//! `non_hate` or empty; `created_at` is ISO-8601.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::record::{DatasetBundle, Label, ScenarioTag, TweetRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Jsonl,
}

impl DatasetFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(DatasetFormat::Csv),
            "jsonl" | "ndjson" => Some(DatasetFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Row {
    id: String,
    text: String,
    #[serde(default)]
    author_handle: String,
    created_at: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    scenario: Option<String>,
    #[serde(default)]
    relevance_flag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duplicate_of: Option<String>,
}

fn nonempty(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.trim().is_empty())
}

impl Row {
    fn into_record(self, row: usize) -> Result<TweetRecord> {
        let bad = |reason: String| Error::MalformedRow { row, reason };
        if self.id.trim().is_empty() {
            return Err(bad("empty id".into()));
        }
        let created_at = DateTime::parse_from_rfc3339(self.created_at.trim())
            .map_err(|e| bad(format!("created_at `{}`: {e}", self.created_at)))?
            .with_timezone(&Utc);
        let label = nonempty(self.label)
            .map(|l| l.parse::<Label>())
            .transpose()
            .map_err(bad)?;
        let scenario = nonempty(self.scenario)
            .map(|s| s.parse::<ScenarioTag>())
            .transpose()
            .map_err(bad)?;
        let relevance_flag = nonempty(self.relevance_flag)
            .map(|f| f.trim().to_ascii_lowercase().parse::<bool>())
            .transpose()
            .map_err(|e| bad(format!("relevance_flag: {e}")))?;
        Ok(TweetRecord {
            id: self.id,
            text: self.text,
            author_handle: self.author_handle,
            created_at,
            label,
            scenario,
            relevance_flag,
            duplicate_of: nonempty(self.duplicate_of),
        })
    }

    fn from_record(r: &TweetRecord, with_duplicates: bool) -> Row {
        Row {
            id: r.id.clone(),
            text: r.text.clone(),
            author_handle: r.author_handle.clone(),
            created_at: r
                .created_at
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            label: Some(r.label.map(|l| l.to_string()).unwrap_or_default()),
            scenario: Some(r.scenario.map(|s| s.to_string()).unwrap_or_default()),
            relevance_flag: Some(r.relevance_flag.map(|f| f.to_string()).unwrap_or_default()),
            duplicate_of: if with_duplicates {
                Some(r.duplicate_of.clone().unwrap_or_default())
            } else {
                None
            },
        }
    }
}

/// Loads a dataset, preserving file order. The bundle is named after the file stem.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<DatasetBundle> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let records = match format {
        DatasetFormat::Csv => read_csv(path)?,
        DatasetFormat::Jsonl => read_jsonl(path)?,
    };
    for (i, r) in records.iter().enumerate() {
        r.validate().map_err(|e| match e {
            Error::ScenarioMismatch { .. } => Error::MalformedRow {
                row: i + 1,
                reason: e.to_string(),
            },
            other => other,
        })?;
    }
    DatasetBundle::new(name, records, path.display().to_string())
}

/// Loads a dataset, picking the format from the file extension.
pub fn load_dataset_auto(path: &Path) -> Result<DatasetBundle> {
    let format = DatasetFormat::from_path(path).ok_or_else(|| {
        Error::Config(format!("cannot infer dataset format of {}", path.display()))
    })?;
    load_dataset(path, format)
}

fn read_csv(path: &Path) -> Result<Vec<TweetRecord>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::MalformedRow {
            row: i + 1,
            reason: e.to_string(),
        })?;
        records.push(row.into_record(i + 1)?);
    }
    Ok(records)
}

fn read_jsonl(path: &Path) -> Result<Vec<TweetRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
            row: i + 1,
            reason: e.to_string(),
        })?;
        records.push(row.into_record(i + 1)?);
    }
    Ok(records)
}

pub fn write_dataset(bundle: &DatasetBundle, path: &Path, format: DatasetFormat) -> Result<()> {
    let with_duplicates = bundle.records().iter().any(|r| r.duplicate_of.is_some());
    match format {
        DatasetFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            if bundle.is_empty() {
                let mut header = vec![
                    "id",
                    "text",
                    "author_handle",
                    "created_at",
                    "label",
                    "scenario",
                    "relevance_flag",
                ];
                if with_duplicates {
                    header.push("duplicate_of");
                }
                writer.write_record(header)?;
            }
            for r in bundle.records() {
                writer.serialize(Row::from_record(r, with_duplicates))?;
            }
            writer.flush()?;
        }
        DatasetFormat::Jsonl => {
            let mut out = BufWriter::new(File::create(path)?);
            for r in bundle.records() {
                serde_json::to_writer(&mut out, &Row::from_record(r, with_duplicates))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn write_dataset_auto(bundle: &DatasetBundle, path: &Path) -> Result<()> {
    let format = DatasetFormat::from_path(path).ok_or_else(|| {
        Error::Config(format!("cannot infer dataset format of {}", path.display()))
    })?;
    write_dataset(bundle, path, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const HEADER: &str = "id,text,author_handle,created_at,label,scenario,relevance_flag\n";

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn header_only_is_empty_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "empty.csv", HEADER);
        let b = load_dataset(&p, DatasetFormat::Csv).unwrap();
        assert!(b.is_empty());
        assert_eq!(b.name, "empty");
    }

    #[test]
    fn parses_optional_columns() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{HEADER}a,hello,u1,2022-02-01T10:00:00Z,hate,GO_BACK,true\n\
             b,\"x, y\",u2,2022-02-02T00:00:00+00:00,,,\n"
        );
        let p = write(&dir, "d.csv", &body);
        let b = load_dataset(&p, DatasetFormat::Csv).unwrap();
        let r = &b.records()[0];
        assert_eq!(r.label, Some(Label::Hate));
        assert_eq!(r.scenario, Some(ScenarioTag::GoBack));
        assert_eq!(r.relevance_flag, Some(true));
        let r = &b.records()[1];
        assert_eq!(r.text, "x, y");
        assert_eq!((r.label, r.scenario, r.relevance_flag), (None, None, None));
    }

    #[test]
    fn rejects_bad_rows_with_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{HEADER}a,ok,u,2022-02-01T00:00:00Z,hate,,\nb,ok,u,yesterday,hate,,\n");
        let p = write(&dir, "d.csv", &body);
        match load_dataset(&p, DatasetFormat::Csv) {
            Err(Error::MalformedRow { row: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }

        let body = format!("{HEADER}a,ok,u,2022-02-01T00:00:00Z,spam,,\n");
        let p = write(&dir, "e.csv", &body);
        assert!(matches!(
            load_dataset(&p, DatasetFormat::Csv),
            Err(Error::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_long_text() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{HEADER}a,x,u,2022-02-01T00:00:00Z,hate,,\na,y,u,2022-02-01T00:00:00Z,hate,,\n"
        );
        let p = write(&dir, "d.csv", &body);
        let err = load_dataset(&p, DatasetFormat::Csv).unwrap_err();
        assert!(matches!(&err, Error::DuplicateId(id) if id == "a"));

        let body = format!(
            "{HEADER}a,{},u,2022-02-01T00:00:00Z,hate,,\n",
            "z".repeat(281)
        );
        let p = write(&dir, "l.csv", &body);
        assert!(matches!(
            load_dataset(&p, DatasetFormat::Csv),
            Err(Error::TextTooLong { .. })
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_dataset(Path::new("/nonexistent/x.csv"), DatasetFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn jsonl_and_csv_agree() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            TweetRecord::labeled("a", "one \"quoted\", text", Label::Hate)
                .with_handle("h")
                .with_scenario(ScenarioTag::OtherHate),
            TweetRecord::labeled("b", "two\nlines", Label::NonHate),
        ];
        let bundle = DatasetBundle::new("x", records, "").unwrap();
        let csv_path = dir.path().join("x.csv");
        let jsonl_path = dir.path().join("x.jsonl");
        write_dataset_auto(&bundle, &csv_path).unwrap();
        write_dataset_auto(&bundle, &jsonl_path).unwrap();
        let a = load_dataset_auto(&csv_path).unwrap();
        let b = load_dataset_auto(&jsonl_path).unwrap();
        assert_eq!(a.records(), bundle.records());
        assert_eq!(b.records(), bundle.records());
    }
}
