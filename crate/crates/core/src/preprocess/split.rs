use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetBundle, TweetRecord};
use crate::error::{Error, Result};

const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// (train, validate, test)
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratios: (0.81, 0.09, 0.10),
            seed: 42,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(seed: u64) -> Self {
        SplitConfig {
            seed,
            ..SplitConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.ratios;
        if [a, b, c].iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidRatios(format!("{a}, {b}, {c}")));
        }
        if ((a + b + c) - 1.0).abs() > RATIO_TOLERANCE {
            return Err(Error::InvalidRatios(format!(
                "{a} + {b} + {c} does not sum to 1"
            )));
        }
        Ok(())
    }

    /// (floor(train·N), floor(validate·N), remainder)
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let part = |r: f64| (r * n as f64 + RATIO_TOLERANCE).floor() as usize;
        let train = part(self.ratios.0).min(n);
        let validate = part(self.ratios.1).min(n - train);
        (train, validate, n - train - validate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: DatasetBundle,
    pub validate: DatasetBundle,
    pub test: DatasetBundle,
}

/// Seeded uniform shuffle, then consecutive train / validate / test slices.
pub fn split_dataset(bundle: &DatasetBundle, config: &SplitConfig) -> Result<Split> {
    config.validate()?;
    if bundle.len() < 3 {
        return Err(Error::TooSmall(bundle.len()));
    }
    let mut order: Vec<usize> = (0..bundle.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);

    let (n_train, n_validate, _) = config.sizes(bundle.len());
    let take = |idx: &[usize], part: &str| {
        let records: Vec<TweetRecord> = idx.iter().map(|&i| bundle.records()[i].clone()).collect();
        DatasetBundle::from_parts(
            format!("{}-{part}", bundle.name),
            records,
            format!("split({}, seed={}, {part})", bundle.name, config.seed),
        )
    };
    Ok(Split {
        train: take(&order[..n_train], "train"),
        validate: take(&order[n_train..n_train + n_validate], "validate"),
        test: take(&order[n_train + n_validate..], "test"),
    })
}
