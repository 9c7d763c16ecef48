//! Python bindings. Structured results cross the boundary as plain dicts and lists.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use hatebench::corpus::{self, build_lexicon, DatasetBundle, Label, TweetRecord};
use hatebench::deploy::{augment_duplicate_hate, trim, TrimRule};
use hatebench::encoder::{BackendRegistry, EncoderSpec};
use hatebench::eval::{self, ConfusionMatrix};
use hatebench::finetune::{self, LlrdDirection, LLRD_DECAY, LLRD_HEAD_LR, LLRD_TOP_LR};
use hatebench::preprocess::{self, CleanConfig, SplitConfig};
use hatebench::runner::{self, ConfigFile, DatasetCatalog, Runner};

create_exception!(pyhatebench, HatebenchError, PyException);

fn err(e: hatebench::Error) -> PyErr {
    HatebenchError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn label(index: usize) -> PyResult<Label> {
    Label::from_index(index)
        .ok_or_else(|| PyValueError::new_err(format!("label index {index} is not 0 or 1")))
}

/// A named labeled tweet dataset.
#[pyclass(name = "Dataset", module = "pyhatebench", frozen)]
struct PyDataset(DatasetBundle);

#[pymethods]
impl PyDataset {
    /// Loads a `.csv` or `.jsonl` dataset file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        corpus::load_dataset_auto(&path).map(PyDataset).map_err(err)
    }

    /// Builds a dataset from `(id, text, label)` triples; `label` is 0, 1 or None.
    #[staticmethod]
    fn from_rows(name: &str, rows: Vec<(String, String, Option<usize>)>) -> PyResult<Self> {
        let records = rows
            .into_iter()
            .map(|(id, text, l)| {
                Ok(match l {
                    Some(i) => TweetRecord::labeled(id, text, label(i)?),
                    None => TweetRecord::new(id, text),
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        DatasetBundle::new(name, records, "")
            .map(PyDataset)
            .map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset({:?}, {} records)", self.0.name, self.0.len())
    }

    fn ids(&self) -> Vec<String> {
        self.0.ids().map(str::to_string).collect()
    }

    /// Label indices, 0 = NON_HATE and 1 = HATE.
    fn labels(&self) -> PyResult<Vec<usize>> {
        Ok(self
            .0
            .labels()
            .map_err(err)?
            .into_iter()
            .map(Label::index)
            .collect())
    }

    fn records(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.records())
    }

    fn stats(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &corpus::compute_stats(&self.0).map_err(err)?)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        corpus::write_dataset_auto(&self.0, &path).map_err(err)
    }

    #[pyo3(signature = (mentions=true, hashtags=true, urls=true, emojis=true))]
    fn clean(&self, mentions: bool, hashtags: bool, urls: bool, emojis: bool) -> Self {
        let config = CleanConfig {
            drop_mentions: mentions,
            drop_hashtags: hashtags,
            drop_urls: urls,
            drop_emojis: emojis,
        };
        PyDataset(preprocess::clean_bundle(&self.0, &config))
    }

    /// Returns `(train, validate, test)`.
    #[pyo3(signature = (seed=42))]
    fn split(&self, seed: u64) -> PyResult<(Self, Self, Self)> {
        let s = preprocess::split_dataset(&self.0, &SplitConfig::with_seed(seed)).map_err(err)?;
        Ok((PyDataset(s.train), PyDataset(s.validate), PyDataset(s.test)))
    }

    /// Returns the kept dataset and the `(id, rule)` removal list.
    #[pyo3(signature = (rules=None))]
    fn trim(&self, rules: Option<Vec<String>>) -> PyResult<(Self, Vec<(String, String)>)> {
        let rules = match rules {
            None => vec![TrimRule::UsernameOnlyMatch, TrimRule::RelevanceFlagFalse],
            Some(names) => names
                .iter()
                .map(|n| {
                    TrimRule::parse(n)
                        .ok_or_else(|| PyValueError::new_err(format!("unknown trim rule `{n}`")))
                })
                .collect::<PyResult<_>>()?,
        };
        let out = trim(&self.0, &rules, &build_lexicon());
        let removed = out.removed.into_iter().map(|r| (r.id, r.rule)).collect();
        Ok((PyDataset(out.bundle), removed))
    }

    #[pyo3(signature = (factor=2))]
    fn augment(&self, factor: usize) -> PyResult<Self> {
        augment_duplicate_hate(&self.0, factor)
            .map(PyDataset)
            .map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (text, mentions=true, hashtags=true, urls=true, emojis=true))]
fn clean_tweet(text: &str, mentions: bool, hashtags: bool, urls: bool, emojis: bool) -> String {
    let config = CleanConfig {
        drop_mentions: mentions,
        drop_hashtags: hashtags,
        drop_urls: urls,
        drop_emojis: emojis,
    };
    preprocess::clean_tweet(text, &config)
}

/// Counts `(tp, fp, fn, tn)` with HATE (1) as the positive class.
#[pyfunction]
fn confusion(y_true: Vec<usize>, y_pred: Vec<usize>) -> PyResult<(u64, u64, u64, u64)> {
    let t = y_true
        .into_iter()
        .map(label)
        .collect::<PyResult<Vec<_>>>()?;
    let p = y_pred
        .into_iter()
        .map(label)
        .collect::<PyResult<Vec<_>>>()?;
    let cm = eval::confusion(&t, &p).map_err(err)?;
    Ok((cm.tp, cm.fp, cm.fn_, cm.tn))
}

#[pyfunction]
#[pyo3(name = "mcc")]
fn py_mcc(tp: u64, fp: u64, fn_: u64, tn: u64) -> PyResult<f64> {
    eval::mcc(&ConfusionMatrix::new(tp, fp, fn_, tn)).map_err(err)
}

#[pyfunction]
#[pyo3(name = "accuracy")]
fn py_accuracy(tp: u64, fp: u64, fn_: u64, tn: u64) -> PyResult<f64> {
    eval::accuracy(&ConfusionMatrix::new(tp, fp, fn_, tn)).map_err(err)
}

#[pyfunction]
fn padded_length(longest: usize) -> usize {
    preprocess::padded_length(longest)
}

#[pyfunction]
#[pyo3(signature = (top_lr=LLRD_TOP_LR, decay=LLRD_DECAY, head_lr=LLRD_HEAD_LR, n_layers=12, bottom_up=false))]
fn discriminative_lrs(
    top_lr: f64,
    decay: f64,
    head_lr: f64,
    n_layers: usize,
    bottom_up: bool,
) -> PyResult<Vec<(String, f64)>> {
    let direction = if bottom_up {
        LlrdDirection::BottomUp
    } else {
        LlrdDirection::TopDown
    };
    let rates = finetune::discriminative_lrs(
        &EncoderSpec::new(n_layers),
        top_lr,
        decay,
        head_lr,
        direction,
    )
    .map_err(err)?;
    Ok(rates.into_iter().map(|(g, r)| (g.to_string(), r)).collect())
}

/// Trainable group names for each epoch of gradual unfreezing.
#[pyfunction]
#[pyo3(signature = (k, n_layers=12))]
fn freeze_plan(k: usize, n_layers: usize) -> PyResult<Vec<Vec<String>>> {
    let plan = finetune::freeze_plan(&EncoderSpec::new(n_layers), k).map_err(err)?;
    Ok(plan
        .trainable
        .iter()
        .map(|set| set.iter().map(ToString::to_string).collect())
        .collect())
}

#[pyfunction]
fn warmup_multiplier(step: usize, warmup_steps: usize, total_steps: usize) -> PyResult<f64> {
    finetune::warmup_multiplier(step, warmup_steps, total_steps).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (text, handle=""))]
fn match_keywords(py: Python<'_>, text: &str, handle: &str) -> PyResult<Py<PyAny>> {
    let record = TweetRecord::new("", text).with_handle(handle);
    to_py(py, &build_lexicon().match_keywords(&record))
}

/// The lexicon as `surface<TAB>category<TAB>hashtag_only` lines.
#[pyfunction]
fn lexicon_export() -> String {
    build_lexicon().to_export()
}

#[pyfunction]
fn write_fixtures(out_dir: PathBuf) -> PyResult<()> {
    hatebench::fixtures::write_fixtures(&out_dir).map_err(err)
}

fn make_runner(data_dir: Option<PathBuf>) -> Runner {
    match data_dir {
        Some(dir) => Runner::new(DatasetCatalog::new(dir), BackendRegistry::new()),
        None => Runner::from_env(),
    }
}

/// Runs one experiment from TOML config text and returns its run record.
#[pyfunction]
#[pyo3(signature = (config, data_dir=None))]
fn run_experiment(py: Python<'_>, config: &str, data_dir: Option<PathBuf>) -> PyResult<Py<PyAny>> {
    let file = ConfigFile::parse_toml(config).map_err(err)?;
    let runner = make_runner(data_dir);
    let record = py
        .detach(|| runner.run_experiment(&file.experiment))
        .map_err(err)?;
    to_py(py, &record)
}

/// Runs the `[grid]` table of a TOML config and returns every run record.
#[pyfunction]
#[pyo3(signature = (config, data_dir=None))]
fn run_grid(py: Python<'_>, config: &str, data_dir: Option<PathBuf>) -> PyResult<Py<PyAny>> {
    let file = ConfigFile::parse_toml(config).map_err(err)?;
    let axes = file.grid.unwrap_or_default();
    let runner = make_runner(data_dir);
    let records = py
        .detach(|| runner.run_grid(&file.experiment, &axes))
        .map_err(err)?;
    to_py(py, &records)
}

/// Markdown results table for the runs stored under `output_dir`.
#[pyfunction]
fn report(output_dir: PathBuf) -> PyResult<String> {
    let records = runner::load_runs(&output_dir).map_err(err)?;
    Ok(runner::report(&records).map_err(err)?.to_markdown())
}

#[pymodule]
fn pyhatebench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HatebenchError", m.py().get_type::<HatebenchError>())?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(clean_tweet, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(py_mcc, m)?)?;
    m.add_function(wrap_pyfunction!(py_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(padded_length, m)?)?;
    m.add_function(wrap_pyfunction!(discriminative_lrs, m)?)?;
    m.add_function(wrap_pyfunction!(freeze_plan, m)?)?;
    m.add_function(wrap_pyfunction!(warmup_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(match_keywords, m)?)?;
    m.add_function(wrap_pyfunction!(lexicon_export, m)?)?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add("DATA_DIR_ENV", runner::DATA_DIR_ENV)?;
    Ok(())
}
