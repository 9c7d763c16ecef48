//! Tweet records, dataset bundles, file I/O and the keyword lexicon.

mod io;
mod lexicon;
mod record;

pub use io::{load_dataset, load_dataset_auto, write_dataset, write_dataset_auto, DatasetFormat};
pub use lexicon::{
    build_lexicon, default_substitution_map, match_keywords, KeywordCategory, KeywordLexicon,
    KeywordMatch, LexiconEntry, Provenance,
};
pub use record::{
    compute_stats, concat_datasets, DatasetBundle, DatasetStats, Label, ScenarioTag, TweetRecord,
    MAX_TWEET_CHARS,
};
