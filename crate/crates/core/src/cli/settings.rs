//! Layered run settings: command-line flag > `key=value` config file > default.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::{load_stopwords, PreprocessOptions, StopwordSource};
use crate::trainer::{Init, Mode, TrainConfig};
use crate::{Error, Result};

/// What a run trains: one of the model modes or the TF-IDF k-means baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Model(Mode),
    KmeansTfidf,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Model(m) => m.as_str(),
            RunMode::KmeansTfidf => "kmeans-tfidf",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "kmeans-tfidf" {
            Ok(RunMode::KmeansTfidf)
        } else {
            s.parse().map(RunMode::Model)
        }
    }
}

/// Comma-separated seeds; `a..b` expands to the inclusive range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::Config(format!("bad seed `{part}`"));
        let mut seeds = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((a, b)) = part.split_once("..") {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                seeds.extend(a..=b);
            } else {
                seeds.push(part.parse().map_err(|_| bad(part))?);
            }
        }
        if seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(SeedList(seeds))
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value `{value}` for `{key}`: {e}")))
}

macro_rules! settings {
    ($($(#[doc = $doc:literal])* $field:ident : $ty:ty),* $(,)?) => {
        /// Every optional run setting. Each field is also a `--kebab-case`
        /// flag and a `kebab-case = value` config file key.
        #[derive(Debug, Clone, Default, PartialEq, clap::Args)]
        pub struct Settings {
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                pub $field: Option<$ty>,
            )*
        }

        impl Settings {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Field-wise overlay; values present in `over` win.
            pub fn overlay(self, over: Settings) -> Settings {
                Settings {
                    $($field: over.$field.or(self.$field),)*
                }
            }

            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                let field = key.trim().replace('-', "_");
                match field.as_str() {
                    $(stringify!($field) => {
                        self.$field = Some(parse_value::<$ty>(key, value.trim())?);
                    })*
                    _ => return Err(Error::Config(format!("unknown setting `{key}`"))),
                }
                Ok(())
            }
        }
    };
}

settings! {
    /// arl, arl-adv, arl-random, arl-adv-word or kmeans-tfidf
    mode: RunMode,
    /// Seeds, e.g. "1,2,3" or "1..10"
    seeds: SeedList,
    /// Pretrained word2vec text file used to initialize word embeddings
    embeddings: PathBuf,
    min_freq: usize,
    lowercase: bool,
    /// "builtin", "none" or a path to a one-token-per-line file
    stopwords: String,
    remove_irregular: bool,
    stem: bool,
    dim: usize,
    batch_size: usize,
    alpha: f64,
    epsilon: f64,
    gamma: f64,
    neg_count: usize,
    epochs: usize,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    adam_eps: f64,
    train_words: bool,
    train_clusters: bool,
    use_pairwise: bool,
    use_pointwise: bool,
    kmeans_init: bool,
    kmeans_restarts: usize,
    early_stop: bool,
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse_file_contents(text: &str, origin: &Path) -> Result<Settings> {
        let mut settings = Settings::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            settings.set(key, value).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_file_contents(&text, path)
    }
}

/// Settings resolved against the built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub mode: RunMode,
    pub seeds: Vec<u64>,
    pub preprocess: PreprocessOptions,
    /// Description of the stopword source for run records.
    pub stopwords: String,
    /// Training configuration with `seed` set to the first seed.
    pub train: TrainConfig,
}

pub fn resolve(settings: &Settings, clusters: usize, has_labels: bool) -> Result<Resolved> {
    let defaults = PreprocessOptions::default();
    let stopwords = settings
        .stopwords
        .clone()
        .unwrap_or_else(|| "builtin".into());
    let source = match stopwords.as_str() {
        "builtin" => StopwordSource::Builtin,
        "none" => StopwordSource::None,
        path => StopwordSource::Custom(load_stopwords(Path::new(path))?),
    };
    let preprocess = PreprocessOptions {
        lowercase: settings.lowercase.unwrap_or(defaults.lowercase),
        stopwords: source,
        remove_irregular: settings
            .remove_irregular
            .unwrap_or(defaults.remove_irregular),
        stem: settings.stem.unwrap_or(defaults.stem),
        min_freq: settings.min_freq.unwrap_or(defaults.min_freq),
    };

    let seeds = match &settings.seeds {
        Some(list) => list.0.clone(),
        None if has_labels => (1..=10).collect(),
        None => vec![1],
    };

    let d = TrainConfig::default();
    let mode = settings.mode.unwrap_or(RunMode::Model(d.mode));
    let train = TrainConfig {
        clusters,
        dim: settings.dim.unwrap_or(d.dim),
        batch_size: settings.batch_size.unwrap_or(d.batch_size),
        alpha: settings.alpha.unwrap_or(d.alpha),
        epsilon: settings.epsilon.unwrap_or(d.epsilon),
        gamma: settings.gamma.unwrap_or(d.gamma),
        neg_count: settings.neg_count.unwrap_or(d.neg_count),
        epochs: settings.epochs.unwrap_or(d.epochs),
        learning_rate: settings.learning_rate.unwrap_or(d.learning_rate),
        beta1: settings.beta1.unwrap_or(d.beta1),
        beta2: settings.beta2.unwrap_or(d.beta2),
        adam_eps: settings.adam_eps.unwrap_or(d.adam_eps),
        seed: seeds[0],
        mode: match mode {
            RunMode::Model(m) => m,
            RunMode::KmeansTfidf => d.mode,
        },
        train_words: settings.train_words.unwrap_or(d.train_words),
        train_clusters: settings.train_clusters.unwrap_or(d.train_clusters),
        use_pairwise: settings.use_pairwise.unwrap_or(d.use_pairwise),
        use_pointwise: settings.use_pointwise.unwrap_or(d.use_pointwise),
        init: match &settings.embeddings {
            Some(path) => Init::Pretrained(path.clone()),
            None => Init::Random,
        },
        kmeans_init: settings.kmeans_init.unwrap_or(d.kmeans_init),
        kmeans_restarts: settings.kmeans_restarts.unwrap_or(d.kmeans_restarts),
        early_stop: settings.early_stop.unwrap_or(d.early_stop),
    };
    train.validate()?;
    Ok(Resolved {
        mode,
        seeds,
        preprocess,
        stopwords,
        train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two distinct non-default values per key: (config file, flag).
    const SAMPLES: &[(&str, &str, &str)] = &[
        ("mode", "arl", "arl-random"),
        ("seeds", "3,4", "7..9"),
        ("embeddings", "a.txt", "b.txt"),
        ("min_freq", "2", "3"),
        ("lowercase", "false", "true"),
        ("stopwords", "none", "builtin"),
        ("remove_irregular", "false", "true"),
        ("stem", "false", "true"),
        ("dim", "16", "24"),
        ("batch_size", "8", "16"),
        ("alpha", "0.5", "2"),
        ("epsilon", "1.5", "2.5"),
        ("gamma", "0.5", "0.7"),
        ("neg_count", "2", "3"),
        ("epochs", "4", "6"),
        ("learning_rate", "0.01", "0.02"),
        ("beta1", "0.8", "0.85"),
        ("beta2", "0.99", "0.995"),
        ("adam_eps", "1e-6", "1e-7"),
        ("train_words", "false", "true"),
        ("train_clusters", "false", "true"),
        ("use_pairwise", "false", "true"),
        ("use_pointwise", "false", "true"),
        ("kmeans_init", "false", "true"),
        ("kmeans_restarts", "2", "3"),
        ("early_stop", "true", "false"),
    ];

    #[test]
    fn samples_cover_every_key() {
        let keys: Vec<&str> = SAMPLES.iter().map(|s| s.0).collect();
        assert_eq!(keys, Settings::KEYS);
    }

    #[test]
    fn flag_beats_file_beats_default_per_field() {
        for &(key, file_value, flag_value) in SAMPLES {
            let kebab = key.replace('_', "-");
            let file = Settings::parse_file_contents(
                &format!("{kebab} = {file_value}\n"),
                Path::new("cfg"),
            )
            .unwrap();
            let mut flag = Settings::default();
            flag.set(&kebab, flag_value).unwrap();
            let mut expected_file = Settings::default();
            expected_file.set(key, file_value).unwrap();
            let mut expected_flag = Settings::default();
            expected_flag.set(key, flag_value).unwrap();

            // default only
            assert_eq!(
                Settings::default().overlay(Settings::default()),
                Settings::default()
            );
            // file over default
            assert_eq!(
                file.clone().overlay(Settings::default()),
                expected_file,
                "{key}"
            );
            // flag over file
            assert_eq!(file.overlay(flag), expected_flag, "{key}");
        }
    }

    #[test]
    fn resolution_applies_layers() {
        let file = Settings::parse_file_contents(
            "epochs = 7\ndim=12\n# note\nalpha=0.25",
            Path::new("cfg"),
        )
        .unwrap();
        let flags = Settings {
            dim: Some(20),
            ..Default::default()
        };
        let r = resolve(&file.overlay(flags), 3, false).unwrap();
        assert_eq!(r.train.epochs, 7);
        assert_eq!(r.train.dim, 20);
        assert_eq!(r.train.alpha, 0.25);
        assert_eq!(r.train.batch_size, 64);
        assert_eq!(r.train.clusters, 3);
        assert_eq!(r.seeds, vec![1]);
        assert_eq!(r.mode, RunMode::Model(Mode::ArlAdv));
    }

    #[test]
    fn default_seeds_depend_on_labels() {
        let r = resolve(&Settings::default(), 2, true).unwrap();
        assert_eq!(r.seeds, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn bad_files_and_values() {
        assert!(Settings::parse_file_contents("nonsense = 1", Path::new("c")).is_err());
        assert!(Settings::parse_file_contents("dim", Path::new("c")).is_err());
        assert!(Settings::parse_file_contents("dim = -3", Path::new("c")).is_err());
        assert!("".parse::<SeedList>().is_err());
        assert!("5..2".parse::<SeedList>().is_err());
        assert_eq!("1, 3..5".parse::<SeedList>().unwrap().0, vec![1, 3, 4, 5]);
        assert_eq!(
            "kmeans-tfidf".parse::<RunMode>().unwrap(),
            RunMode::KmeansTfidf
        );
    }
}
