use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hatebench::corpus::{
    build_lexicon, compute_stats, load_dataset_auto, write_dataset_auto, DatasetBundle, Label,
};
use hatebench::deploy::{augment_duplicate_hate, trim, write_removal_report, TrimRule};
use hatebench::eval::{apply_report_rules, by_training_set, MetricsReport, Table};
use hatebench::fixtures::write_fixtures;
use hatebench::preprocess::{clean_bundle, split_dataset, CleanConfig, SplitConfig};
use hatebench::runner::{load_runs, report, ConfigFile, DatasetCatalog, Runner, DATA_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "hatebench",
    version,
    about = "Hate-speech fine-tuning and evaluation workbench"
)]
struct Cli {
    /// Dataset root; names given to subcommands resolve to <dir>/<name>.csv|jsonl.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = "data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label counts and portions.
    Stats {
        datasets: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Remove emoji, URLs, mentions and hashtags.
    Clean {
        dataset: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        keep_mentions: bool,
        #[arg(long)]
        keep_hashtags: bool,
        #[arg(long)]
        keep_urls: bool,
        #[arg(long)]
        keep_emojis: bool,
    },
    /// Seeded train/validate/test split.
    Split {
        dataset: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.81, 0.09, 0.10])]
        ratios: Vec<f64>,
    },
    /// Drop records matching trim rules.
    Trim {
        dataset: String,
        #[arg(short, long)]
        output: PathBuf,
        /// USERNAME_ONLY_MATCH or RELEVANCE_FLAG_FALSE; repeatable.
        #[arg(long = "rule", default_values_t = ["USERNAME_ONLY_MATCH".to_string(), "RELEVANCE_FLAG_FALSE".to_string()])]
        rules: Vec<String>,
        /// Removal report CSV (id,rule).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Duplicate hate records.
    Augment {
        dataset: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2)]
        factor: usize,
    },
    /// Run one experiment per seed from a config file.
    Train {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides the config seed; one run per seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Score a predictions file (id,predicted) against a labeled dataset.
    Eval {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "-")]
        training_set: String,
        #[arg(long, default_value = "-")]
        technique: String,
        /// Write the markdown table here.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Write the CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the grid described by the config's [grid] table.
    Grid {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render result tables from <output-dir>/runs.jsonl.
    Report {
        #[arg(long, default_value = "runs")]
        output_dir: PathBuf,
        #[arg(long)]
        markdown: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Export the keyword lexicon (surface<TAB>category<TAB>hashtag_only).
    Lexicon {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Regenerate the synthetic fixture datasets.
    Fixtures {
        #[arg(long, default_value = "data")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

/// A catalog name, or a path to a CSV/JSONL file.
fn load(catalog: &DatasetCatalog, spec: &str) -> Result<DatasetBundle> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_dataset_auto(path).with_context(|| format!("loading {spec}"));
    }
    Ok((*catalog.load(spec)?).clone())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_summary(bundle: &DatasetBundle, path: &Path) -> Result<()> {
    let s = compute_stats(bundle)?;
    println!(
        "{}: {} hate / {} non-hate / {} total -> {}",
        bundle.name,
        s.n_hate,
        s.n_non_hate,
        s.n_total,
        path.display()
    );
    Ok(())
}

fn eval_predictions(
    dataset: &DatasetBundle,
    predictions: &Path,
    training_set: &str,
    technique: &str,
) -> Result<MetricsReport> {
    let mut reader = csv::Reader::from_path(predictions)
        .with_context(|| format!("reading {}", predictions.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id").context("predictions file needs an `id` column")?;
    let pred_col = col("predicted")
        .or_else(|| col("label"))
        .context("predictions file needs a `predicted` (or `label`) column")?;
    let mut predicted: HashMap<String, Label> = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let cell = row[pred_col].trim();
        let label = match cell.parse::<usize>() {
            Ok(index) => Label::from_index(index),
            Err(_) => cell.parse().ok(),
        }
        .with_context(|| format!("row {}: unknown label `{cell}`", i + 1))?;
        predicted.insert(row[id_col].to_string(), label);
    }
    let mut y_true = Vec::new();
    let mut y_pred = Vec::new();
    for r in dataset.records() {
        let Some(p) = predicted.get(&r.id) else {
            continue;
        };
        let t = r
            .label
            .with_context(|| format!("record {} is unlabeled", r.id))?;
        y_true.push(t);
        y_pred.push(*p);
    }
    if y_true.len() != predicted.len() {
        bail!(
            "{} predicted ids are not in {}",
            predicted.len() - y_true.len(),
            dataset.name
        );
    }
    Ok(MetricsReport::from_predictions(
        training_set,
        technique,
        &dataset.name,
        &y_true,
        &y_pred,
    )?)
}

fn run(cli: Cli) -> Result<()> {
    let catalog = DatasetCatalog::new(&cli.data_dir);
    match cli.command {
        Command::Stats { datasets, json } => {
            let names = if datasets.is_empty() {
                catalog.names()
            } else {
                datasets
            };
            for name in names {
                let bundle = load(&catalog, &name)?;
                let s = compute_stats(&bundle)?;
                if json {
                    let mut v = serde_json::to_value(s)?;
                    v["dataset"] = bundle.name.clone().into();
                    println!("{v}");
                } else {
                    println!(
                        "{}\thate={}\tnon_hate={}\ttotal={}\tportion={}",
                        bundle.name,
                        s.n_hate,
                        s.n_non_hate,
                        s.n_total,
                        s.portion_label()
                    );
                }
            }
        }
        Command::Clean {
            dataset,
            output,
            keep_mentions,
            keep_hashtags,
            keep_urls,
            keep_emojis,
        } => {
            let config = CleanConfig {
                drop_mentions: !keep_mentions,
                drop_hashtags: !keep_hashtags,
                drop_urls: !keep_urls,
                drop_emojis: !keep_emojis,
            };
            let cleaned = clean_bundle(&load(&catalog, &dataset)?, &config);
            write_dataset_auto(&cleaned, &output)?;
            print_summary(&cleaned, &output)?;
        }
        Command::Split {
            dataset,
            out_dir,
            seed,
            ratios,
        } => {
            let config = SplitConfig {
                ratios: (ratios[0], ratios[1], ratios[2]),
                seed,
            };
            let split = split_dataset(&load(&catalog, &dataset)?, &config)?;
            std::fs::create_dir_all(&out_dir)?;
            for part in [&split.train, &split.validate, &split.test] {
                let path = out_dir.join(format!("{}.csv", part.name));
                write_dataset_auto(part, &path)?;
                println!(
                    "{}: {} records -> {}",
                    part.name,
                    part.len(),
                    path.display()
                );
            }
        }
        Command::Trim {
            dataset,
            output,
            rules,
            report,
        } => {
            let rules = rules
                .iter()
                .map(|r| TrimRule::parse(r).with_context(|| format!("unknown trim rule `{r}`")))
                .collect::<Result<Vec<_>>>()?;
            let outcome = trim(&load(&catalog, &dataset)?, &rules, &build_lexicon());
            write_dataset_auto(&outcome.bundle, &output)?;
            if let Some(path) = report {
                write_removal_report(File::create(&path)?, &outcome.removed)?;
            }
            println!("removed {} records", outcome.removed.len());
            print_summary(&outcome.bundle, &output)?;
        }
        Command::Augment {
            dataset,
            output,
            factor,
        } => {
            let augmented = augment_duplicate_hate(&load(&catalog, &dataset)?, factor)?;
            write_dataset_auto(&augmented, &output)?;
            print_summary(&augmented, &output)?;
        }
        Command::Train { config, seeds } => {
            let file = ConfigFile::load(&config.config)?;
            let runner = Runner::new(catalog, Default::default());
            let seeds = if seeds.is_empty() {
                vec![file.experiment.seed]
            } else {
                seeds
            };
            for seed in seeds {
                let mut cfg = file.experiment.clone();
                cfg.seed = seed;
                let record = runner.run_experiment(&cfg)?;
                println!("run {} ({} epochs)", record.run_id, record.history.len());
                for r in &record.reports {
                    println!(
                        "  {} -> {}: accuracy {:.6}, mcc {:.6}{}",
                        r.training_set,
                        r.test_set,
                        r.accuracy,
                        r.mcc,
                        if r.valid { "" } else { " (invalid)" }
                    );
                }
            }
        }
        Command::Eval {
            dataset,
            predictions,
            training_set,
            technique,
            markdown,
            csv,
        } => {
            let bundle = load(&catalog, &dataset)?;
            let report = eval_predictions(&bundle, &predictions, &training_set, &technique)?;
            let stats = HashMap::from([(bundle.name.clone(), compute_stats(&bundle)?)]);
            let annotated = apply_report_rules(&[report], &stats, by_training_set)?;
            println!("{}", serde_json::to_string_pretty(&annotated[0])?);
            let table = Table::from_reports(&annotated);
            if let Some(p) = markdown {
                std::fs::write(p, table.to_markdown())?;
            }
            if let Some(p) = csv {
                std::fs::write(p, table.to_csv()?)?;
            }
        }
        Command::Grid { config, workers } => {
            let file = ConfigFile::load(&config.config)?;
            let mut axes = file.grid.unwrap_or_default();
            if workers.is_some() {
                axes.workers = workers;
            }
            let runner = Runner::new(catalog, Default::default());
            let records = runner.run_grid(&file.experiment, &axes)?;
            let failed = records.iter().filter(|r| !r.is_ok()).count();
            println!(
                "{} cells, {} failed; results in {}",
                records.len(),
                failed,
                file.experiment.output_dir.join("runs.jsonl").display()
            );
            print!("{}", report(&records)?.to_markdown());
        }
        Command::Report {
            output_dir,
            markdown,
            csv,
        } => {
            let table = report(&load_runs(&output_dir)?)?;
            if csv.is_some() || markdown.is_some() {
                if let Some(p) = &csv {
                    std::fs::write(p, table.to_csv()?)?;
                }
                if let Some(p) = &markdown {
                    std::fs::write(p, table.to_markdown())?;
                }
            } else {
                print!("{}", table.to_markdown());
            }
        }
        Command::Lexicon { output } => {
            write_output(output.as_deref(), &build_lexicon().to_export())?;
        }
        Command::Fixtures { out_dir } => {
            write_fixtures(&out_dir)?;
            for name in DatasetCatalog::new(&out_dir).names() {
                println!("{}", out_dir.join(format!("{name}.csv")).display());
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
