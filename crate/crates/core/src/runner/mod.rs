//! Experiment orchestration: single runs, grids, persistence and result tables.

mod catalog;
mod config;

pub use catalog::{DatasetCatalog, DATA_DIR_ENV};
pub use config::{
    ConfigFile, DeployConfig, ExperimentConfig, GridAxes, StrategyChoice, StrategyParams,
};

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_lexicon, compute_stats, DatasetBundle, DatasetStats, Label};
use crate::deploy::{augment_duplicate_hate, trim, write_removal_report};
use crate::encoder::{BackendConfig, BackendRegistry};
use crate::error::{Error, Result};
use crate::eval::{apply_report_rules, by_training_set, MetricsReport, Table, TableRow};
use crate::finetune::{predict, train, Strategy, TrainHistory};
use crate::preprocess::{clean_bundle, split_dataset, CleanConfig, HashTokenizer, SplitConfig};

pub const RUNS_FILE: &str = "runs.jsonl";
/// Tokenizer vocabulary for external backends (BERT-base size).
pub const EXTERNAL_VOCAB: usize = 30522;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub training_set: String,
    pub technique: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub status: RunStatus,
    pub reports: Vec<MetricsReport>,
    /// Whole-dataset statistics of every test set, keyed like `reports[].test_set`.
    pub test_stats: BTreeMap<String, DatasetStats>,
    pub history: TrainHistory,
    pub artifacts: Vec<PathBuf>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

struct Predictions {
    test_set: String,
    ids: Vec<String>,
    truth: Vec<Label>,
    predicted: Vec<Label>,
}

struct Outcome {
    record: RunRecord,
    predictions: Vec<Predictions>,
    removals: Option<Vec<crate::deploy::Removal>>,
}

/// Runs experiments against a dataset catalog and backend registry.
/// Appends to `runs.jsonl` are serialized through an internal lock.
pub struct Runner {
    catalog: DatasetCatalog,
    registry: BackendRegistry,
    append_lock: Mutex<()>,
    counter: AtomicU64,
}

impl Runner {
    pub fn new(catalog: DatasetCatalog, registry: BackendRegistry) -> Self {
        Runner {
            catalog,
            registry,
            append_lock: Mutex::new(()),
            counter: AtomicU64::new(0),
        }
    }

    pub fn from_env() -> Self {
        Self::new(DatasetCatalog::from_env(), BackendRegistry::new())
    }

    pub fn catalog(&self) -> &DatasetCatalog {
        &self.catalog
    }

    /// Checks everything that can fail before training starts.
    pub fn validate(&self, config: &ExperimentConfig) -> Result<()> {
        for name in std::iter::once(&config.dataset).chain(&config.test_datasets) {
            self.catalog.path_of(name)?;
        }
        if !self.registry.resolves(&config.backend) {
            return Err(Error::Config(format!(
                "backend `{}` is not registered (available: {})",
                config.backend.name(),
                self.registry.names().join(", ")
            )));
        }
        config.train_config()?;
        config.deploy.trim_rules()?;
        if let Some(f) = config.deploy.augment {
            if f < 2 {
                return Err(Error::InvalidFactor(f));
            }
        }
        Ok(())
    }

    /// split → (clean) → train → predict → eval, then persists the record.
    pub fn run_experiment(&self, config: &ExperimentConfig) -> Result<RunRecord> {
        self.validate(config)?;
        let outcome = self.execute(config)?;
        self.persist(outcome)
    }

    fn next_run_id(&self, hash: &str, seed: u64, at: DateTime<Utc>) -> String {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        format!(
            "{}-s{seed}-{}-{n}",
            &hash[..12],
            at.format("%Y%m%dT%H%M%S%6f")
        )
    }

    fn deployed(
        &self,
        config: &ExperimentConfig,
    ) -> Result<(DatasetBundle, Option<Vec<crate::deploy::Removal>>)> {
        let mut bundle = (*self
            .catalog
            .load(&config.dataset)
            .map_err(|e| e.at_stage("load"))?)
        .clone();
        let mut removals = None;
        let rules = config.deploy.trim_rules()?;
        if !rules.is_empty() {
            let outcome = trim(&bundle, &rules, &build_lexicon());
            bundle = outcome.bundle;
            removals = Some(outcome.removed);
        }
        if let (Some(f), false) = (config.deploy.augment, config.deploy.augment_train_only) {
            bundle = augment_duplicate_hate(&bundle, f).map_err(|e| e.at_stage("deploy"))?;
        }
        Ok((bundle, removals))
    }

    fn execute(&self, config: &ExperimentConfig) -> Result<Outcome> {
        let started_at = Utc::now();
        let train_config = config.train_config()?;
        let split_config = SplitConfig::with_seed(config.seed);
        let clean = CleanConfig::default();
        let prepare = |b: DatasetBundle| {
            if config.clean {
                clean_bundle(&b, &clean)
            } else {
                b
            }
        };

        let (dataset, removals) = self.deployed(config)?;
        let mut split = split_dataset(&dataset, &split_config).map_err(|e| e.at_stage("split"))?;
        if let (Some(f), true) = (config.deploy.augment, config.deploy.augment_train_only) {
            split.train =
                augment_duplicate_hate(&split.train, f).map_err(|e| e.at_stage("deploy"))?;
        }
        let train_set = prepare(split.train);
        let validate_set = prepare(split.validate);

        let (vocab, seed) = match &config.backend {
            BackendConfig::Mock(m) => (m.vocab_size, config.seed),
            BackendConfig::External { .. } => (EXTERNAL_VOCAB, config.seed),
        };
        let tokenizer = HashTokenizer::new(vocab)?;
        let mut model = self
            .registry
            .build(&config.backend, seed)
            .map_err(|e| e.at_stage("backend"))?;
        let history = train(
            model.as_mut(),
            &train_set,
            &validate_set,
            &tokenizer,
            &train_config,
        )
        .map_err(|e| e.at_stage("train"))?;

        let training_set = config.training_set_label();
        let technique = config.technique_label();
        let mut reports = Vec::new();
        let mut predictions = Vec::new();
        let mut test_stats = BTreeMap::new();
        for name in config.test_dataset_names() {
            let (whole, test) = if name == config.dataset {
                (dataset.clone(), split.test.clone())
            } else {
                let whole = (*self.catalog.load(&name).map_err(|e| e.at_stage("load"))?).clone();
                let test = split_dataset(&whole, &split_config)
                    .map_err(|e| e.at_stage("split"))?
                    .test;
                (whole, test)
            };
            let stats = compute_stats(&whole).map_err(|e| e.at_stage("eval"))?;
            let test = prepare(test);
            let predicted =
                predict(model.as_ref(), &test, &tokenizer).map_err(|e| e.at_stage("predict"))?;
            let truth = test.labels().map_err(|e| e.at_stage("eval"))?;
            let report = MetricsReport::from_predictions(
                &training_set,
                &technique,
                &whole.name,
                &truth,
                &predicted,
            )
            .map_err(|e| e.at_stage("eval"))?;
            reports.push(report);
            test_stats.insert(whole.name.clone(), stats);
            predictions.push(Predictions {
                test_set: whole.name.clone(),
                ids: test.ids().map(str::to_string).collect(),
                truth,
                predicted,
            });
        }

        let config_hash = config.config_hash()?;
        let record = RunRecord {
            run_id: self.next_run_id(&config_hash, config.seed, started_at),
            config_hash,
            config: config.clone(),
            training_set,
            technique,
            started_at,
            finished_at: Utc::now(),
            status: RunStatus::Ok,
            reports,
            test_stats,
            history,
            artifacts: Vec::new(),
        };
        Ok(Outcome {
            record,
            predictions,
            removals,
        })
    }

    fn failed_record(
        &self,
        config: &ExperimentConfig,
        error: &Error,
        started_at: DateTime<Utc>,
    ) -> RunRecord {
        let config_hash = config.config_hash().unwrap_or_else(|_| "0".repeat(64));
        RunRecord {
            run_id: self.next_run_id(&config_hash, config.seed, started_at),
            config_hash,
            config: config.clone(),
            training_set: config.training_set_label(),
            technique: config.technique_label(),
            started_at,
            finished_at: Utc::now(),
            status: RunStatus::Failed {
                error: error.to_string(),
            },
            reports: Vec::new(),
            test_stats: BTreeMap::new(),
            history: TrainHistory::default(),
            artifacts: Vec::new(),
        }
    }

    fn persist(&self, outcome: Outcome) -> Result<RunRecord> {
        let Outcome {
            mut record,
            predictions,
            removals,
        } = outcome;
        let out = &record.config.output_dir;
        let dir = out.join("runs").join(&record.run_id);
        fs::create_dir_all(&dir).map_err(|e| Error::from(e).at_stage("persist"))?;
        let mut artifacts = vec![dir.clone()];
        for p in &predictions {
            let path = dir.join(format!("predictions-{}.csv", p.test_set));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["id", "label", "predicted"])?;
            for ((id, t), y) in p.ids.iter().zip(&p.truth).zip(&p.predicted) {
                w.write_record([id.as_str(), t.as_str(), y.as_str()])?;
            }
            w.flush()?;
            artifacts.push(path);
        }
        if let Some(removed) = removals {
            let path = dir.join("removed.csv");
            write_removal_report(fs::File::create(&path)?, &removed)?;
            artifacts.push(path);
        }
        let history_path = dir.join("history.json");
        fs::write(
            &history_path,
            serde_json::to_string_pretty(&record.history)?,
        )?;
        artifacts.push(history_path);
        record.artifacts = artifacts;
        fs::write(
            dir.join("record.json"),
            serde_json::to_string_pretty(&record)?,
        )?;
        self.append(&record)?;
        Ok(record)
    }

    fn append(&self, record: &RunRecord) -> Result<()> {
        let out = &record.config.output_dir;
        let line = serde_json::to_string(record)?;
        let _guard = self.append_lock.lock().expect("result store lock poisoned");
        fs::create_dir_all(out)?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join(RUNS_FILE))?;
        writeln!(f, "{line}")?;
        Ok(())
    }

    /// Runs every cell on up to `axes.workers` threads. A failing cell is
    /// recorded with `RunStatus::Failed` and the grid continues. Records are
    /// returned in cell order.
    pub fn run_grid(&self, base: &ExperimentConfig, axes: &GridAxes) -> Result<Vec<RunRecord>> {
        let cells = axes.cells(base)?;
        let workers = axes
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(pool.install(|| cells.par_iter().map(|cell| self.run_cell(cell)).collect()))
    }

    fn run_cell(&self, cell: &ExperimentConfig) -> RunRecord {
        let started_at = Utc::now();
        match self.run_experiment(cell) {
            Ok(record) => record,
            Err(e) => {
                let record = self.failed_record(cell, &e, started_at);
                // The failure is already reported in the returned record.
                let _ = self.append(&record);
                record
            }
        }
    }
}

/// Reads every record from `<output_dir>/runs.jsonl`.
pub fn load_runs(output_dir: &Path) -> Result<Vec<RunRecord>> {
    let path = output_dir.join(RUNS_FILE);
    let file = fs::File::open(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.clone()),
        _ => Error::Io(e),
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                row: i + 1,
                reason: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

/// Result tables built from run records: validity and bolding are applied
/// per training-set section, and every (training set, technique) group
/// without a valid row is kept as a "/" placeholder. Training sets keep
/// first-appearance order; techniques within a set follow the grid order.
pub fn report(records: &[RunRecord]) -> Result<Table> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let stats: HashMap<String, DatasetStats> = records
        .iter()
        .flat_map(|r| r.test_stats.iter().map(|(k, v)| (k.clone(), *v)))
        .collect();
    let all: Vec<MetricsReport> = records
        .iter()
        .flat_map(|r| r.reports.iter().cloned())
        .collect();
    let annotated = apply_report_rules(&all, &stats, by_training_set)?;

    let mut groups: Vec<((String, String), Vec<TableRow>)> = Vec::new();
    for r in records {
        let key = (r.training_set.clone(), r.technique.clone());
        if !groups.iter().any(|(k, _)| *k == key) {
            groups.push((key, Vec::new()));
        }
    }
    let order: Vec<String> = Strategy::grid().iter().map(ToString::to_string).collect();
    let set_rank: Vec<String> = groups.iter().map(|((s, _), _)| s.clone()).collect();
    groups.sort_by_key(|((set, technique), _)| {
        (
            set_rank.iter().position(|s| s == set),
            order
                .iter()
                .position(|t| t == technique)
                .unwrap_or(usize::MAX),
        )
    });
    for r in annotated.iter().filter(|r| r.valid) {
        let key = (r.training_set.clone(), r.technique.clone());
        if let Some((_, rows)) = groups.iter_mut().find(|(k, _)| *k == key) {
            rows.push(TableRow::from(r));
        }
    }
    let rows = groups
        .into_iter()
        .flat_map(|((set, technique), rows)| {
            if rows.is_empty() {
                vec![TableRow::placeholder(set, technique)]
            } else {
                rows
            }
        })
        .collect();
    Ok(Table { rows })
}
