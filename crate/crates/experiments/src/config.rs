//! Plain-text `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected so that typos do not silently fall back to defaults. Relative
//! paths resolve against the directory holding the config file.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use willshaw::{KMeansOptions, NxhConfig, PatchEncoderConfig};

pub const DESCRIPTION: &str = "description";
pub const VISUAL: &str = "visual";

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },

    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { key: String, line: usize },

    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: invalid value for {key}: {msg}")]
    Value { key: String, line: usize, msg: String },

    #[error("missing required key {0:?}")]
    Missing(&'static str),

    #[error("{0}")]
    Invalid(String),

    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Keep only the first `n` items; `None` keeps everything.
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSettings {
    /// Generation attempts per class.
    pub per_class: usize,
    /// Memory snapshot to generate from; `None` means the last checkpoint.
    pub checkpoint: Option<usize>,
    /// Stored patterns sampled to estimate the acceptance interval.
    pub interval_samples: usize,
    pub interval_p_del: f64,
    pub band: (f64, f64),
    /// Fixed interval, bypassing the estimate.
    pub interval: Option<(usize, usize)>,
    pub s0: usize,
    pub s_inc: usize,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MontageSettings {
    /// Examples shown per montage row.
    pub count: usize,
    /// Pixel upscaling of dictionary prototype tiles.
    pub prototype_scale: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub encoder: PatchEncoderConfig,
    pub kmeans: KMeansOptions,
    pub nxh: NxhConfig,
    /// Modality names and lengths in concatenation order.
    pub modalities: Vec<(String, usize)>,
    /// Explicit checkpoints; `None` uses the default cadence.
    pub checkpoints: Option<Vec<usize>>,
    pub p_del: Vec<f64>,
    /// Cap on cues evaluated per checkpoint; `None` evaluates all.
    pub max_cues: Option<usize>,
    pub generate: GenerateSettings,
    pub montage: MontageSettings,
}

/// 1000..=10000 by 1000, then 15000..=60000 by 5000.
pub fn default_checkpoints() -> Vec<usize> {
    (1..=10)
        .map(|k| k * 1000)
        .chain((3..=12).map(|k| k * 5000))
        .collect()
}

struct Entries {
    map: HashMap<String, (String, usize)>,
    order: Vec<String>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = HashMap::new();
        let mut order = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1 });
            };
            let key = k.trim().to_owned();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if map.contains_key(&key) {
                return Err(ConfigError::Duplicate { key, line: i + 1 });
            }
            order.push(key.clone());
            map.insert(key, (v.trim().to_owned(), i + 1));
        }
        Ok(Self { map, order })
    }

    fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn take<T>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.take_raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Value {
                key: key.to_owned(),
                line,
                msg: e.to_string(),
            }),
        }
    }

    fn take_or<T>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn take_list<T>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((v, line)) = self.take_raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| s.trim().parse::<T>())
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|e| ConfigError::Value {
                key: key.to_owned(),
                line,
                msg: e.to_string(),
            })
    }

    fn take_pair<T>(&mut self, key: &str) -> Result<Option<(T, T)>, ConfigError>
    where
        T: FromStr + Copy,
        T::Err: Display,
    {
        let line = self.map.get(key).map(|(_, l)| *l).unwrap_or(0);
        match self.take_list::<T>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(_) => Err(ConfigError::Value {
                key: key.to_owned(),
                line,
                msg: "expected two comma-separated values".into(),
            }),
        }
    }

    /// `0` means "no limit".
    fn take_limit(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        Ok(self.take::<usize>(key)?.filter(|&n| n > 0))
    }

    fn take_path(&mut self, key: &'static str, base: &Path) -> Result<PathBuf, ConfigError> {
        let (v, _) = self.take_raw(key).ok_or(ConfigError::Missing(key))?;
        Ok(base.join(v))
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut e = Entries::parse(text)?;

        let data = DataConfig {
            train_images: e.take_path("data.train_images", base)?,
            train_labels: e.take_path("data.train_labels", base)?,
            test_images: e.take_path("data.test_images", base)?,
            test_labels: e.take_path("data.test_labels", base)?,
            train_limit: e.take_limit("data.train_limit")?,
            test_limit: e.take_limit("data.test_limit")?,
        };

        let d = PatchEncoderConfig::default();
        let encoder = PatchEncoderConfig {
            grid_rows: e.take_or("encoder.grid_rows", d.grid_rows)?,
            grid_cols: e.take_or("encoder.grid_cols", d.grid_cols)?,
            patch_size: e.take_or("encoder.patch_size", d.patch_size)?,
            dictionary_size: e.take_or("encoder.dictionary_size", d.dictionary_size)?,
            winners: e.take_or("encoder.winners", d.winners)?,
            binarize_threshold: e.take_or("encoder.binarize_threshold", d.binarize_threshold)?,
        };
        let dk = KMeansOptions::default();
        let kmeans = KMeansOptions {
            sample_patches: e.take_or("encoder.sample_patches", dk.sample_patches)?,
            max_iters: e.take_or("encoder.kmeans_iters", dk.max_iters)?,
        };
        let dn = NxhConfig::default();
        let nxh = NxhConfig {
            classes: e.take_or("nxh.classes", dn.classes)?,
            bits_per_class: e.take_or("nxh.bits_per_class", dn.bits_per_class)?,
            p_class: e.take_or("nxh.p_class", dn.p_class)?,
            p_rest: e.take_or("nxh.p_rest", dn.p_rest)?,
        };

        let modality_keys: Vec<String> = e
            .order
            .iter()
            .filter(|k| k.starts_with("modality.") && k.ends_with(".length"))
            .cloned()
            .collect();
        let mut modalities = Vec::new();
        for key in modality_keys {
            let name = key["modality.".len()..key.len() - ".length".len()].to_owned();
            let len: usize = e.take(&key)?.expect("key listed");
            modalities.push((name, len));
        }
        if modalities.is_empty() {
            modalities = vec![
                (DESCRIPTION.to_owned(), nxh.code_len()),
                (VISUAL.to_owned(), encoder.code_len()),
            ];
        }

        let generate = GenerateSettings {
            per_class: e.take_or("generate.per_class", 5)?,
            checkpoint: e.take_limit("generate.checkpoint")?,
            interval_samples: e.take_or("generate.interval_samples", 500)?,
            interval_p_del: e.take_or("generate.interval_p_del", 0.5)?,
            band: e.take_pair("generate.band")?.unwrap_or((25.0, 75.0)),
            interval: e.take_pair("generate.interval")?,
            s0: e.take_or("generate.s0", 3)?,
            s_inc: e.take_or("generate.s_inc", 1)?,
            max_iters: e.take_or("generate.max_iters", 100)?,
        };
        let montage = MontageSettings {
            count: e.take_or("montage.count", 10)?,
            prototype_scale: e.take_or("montage.prototype_scale", 4)?,
        };

        let cfg = ExperimentConfig {
            seed: e.take_or("seed", 0)?,
            checkpoints: e.take_list("checkpoints")?,
            p_del: e.take_list("noise.p_del")?.unwrap_or_else(|| vec![0.25, 0.5, 0.75]),
            max_cues: e.take_limit("eval.max_cues")?,
            data,
            encoder,
            kmeans,
            nxh,
            modalities,
            generate,
            montage,
        };

        if let Some(key) = e.order.iter().find(|k| e.map.contains_key(*k)) {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                line: e.map[key].1,
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.encoder.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.nxh.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.nxh.classes > usize::from(willshaw::data::NUM_CLASSES) {
            return invalid(format!("nxh.classes = {} exceeds the 10 digit classes", self.nxh.classes));
        }

        let mut names: Vec<&str> = self.modalities.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if names != [DESCRIPTION, VISUAL] {
            return invalid(format!(
                "modalities must be exactly `{DESCRIPTION}` and `{VISUAL}`, got {names:?}"
            ));
        }
        for (name, len) in &self.modalities {
            let expected = if name == DESCRIPTION {
                self.nxh.code_len()
            } else {
                self.encoder.code_len()
            };
            if *len != expected {
                return invalid(format!(
                    "modality.{name}.length = {len} but the encoder produces {expected} bits"
                ));
            }
        }

        if let Some(c) = &self.checkpoints {
            if c.is_empty() || c[0] == 0 || c.windows(2).any(|w| w[0] >= w[1]) {
                return invalid("checkpoints must be positive and strictly increasing".into());
            }
        }
        if self.p_del.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return invalid("noise.p_del values must lie in [0, 1]".into());
        }
        let g = &self.generate;
        if !(0.0..=1.0).contains(&g.interval_p_del) {
            return invalid("generate.interval_p_del must lie in [0, 1]".into());
        }
        let (lo, hi) = g.band;
        if !(0.0 <= lo && lo <= hi && hi <= 100.0) {
            return invalid("generate.band must satisfy 0 <= low <= high <= 100".into());
        }
        if let Some((lo, hi)) = g.interval {
            if lo >= hi {
                return invalid("generate.interval must satisfy low < high".into());
            }
        }
        if g.max_iters == 0 || g.interval_samples == 0 {
            return invalid("generate.max_iters and generate.interval_samples must be positive".into());
        }
        if self.montage.prototype_scale == 0 {
            return invalid("montage.prototype_scale must be positive".into());
        }
        Ok(())
    }

    /// Checkpoints that fit in a training set of `n` patterns.
    pub fn effective_checkpoints(&self, n: usize) -> Vec<usize> {
        let all = self.checkpoints.clone().unwrap_or_else(default_checkpoints);
        let mut kept: Vec<usize> = all.into_iter().filter(|&c| c <= n).collect();
        if kept.is_empty() && n > 0 {
            kept.push(n);
        }
        kept
    }

    /// Every effective setting as `key = value` pairs, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        fn opt(v: Option<usize>) -> String {
            v.map_or("0".into(), |v| v.to_string())
        }
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        let d = &self.data;
        let g = &self.generate;
        let mut out: Vec<(String, String)> = vec![
            ("seed".into(), self.seed.to_string()),
            ("data.train_images".into(), d.train_images.display().to_string()),
            ("data.train_labels".into(), d.train_labels.display().to_string()),
            ("data.test_images".into(), d.test_images.display().to_string()),
            ("data.test_labels".into(), d.test_labels.display().to_string()),
            ("data.train_limit".into(), opt(d.train_limit)),
            ("data.test_limit".into(), opt(d.test_limit)),
            ("encoder.grid_rows".into(), self.encoder.grid_rows.to_string()),
            ("encoder.grid_cols".into(), self.encoder.grid_cols.to_string()),
            ("encoder.patch_size".into(), self.encoder.patch_size.to_string()),
            ("encoder.dictionary_size".into(), self.encoder.dictionary_size.to_string()),
            ("encoder.winners".into(), self.encoder.winners.to_string()),
            ("encoder.binarize_threshold".into(), self.encoder.binarize_threshold.to_string()),
            ("encoder.sample_patches".into(), self.kmeans.sample_patches.to_string()),
            ("encoder.kmeans_iters".into(), self.kmeans.max_iters.to_string()),
            ("nxh.classes".into(), self.nxh.classes.to_string()),
            ("nxh.bits_per_class".into(), self.nxh.bits_per_class.to_string()),
            ("nxh.p_class".into(), self.nxh.p_class.to_string()),
            ("nxh.p_rest".into(), self.nxh.p_rest.to_string()),
        ];
        for (name, len) in &self.modalities {
            out.push((format!("modality.{name}.length"), len.to_string()));
        }
        out.extend([
            (
                "checkpoints".into(),
                list(&self.checkpoints.clone().unwrap_or_else(default_checkpoints)),
            ),
            ("noise.p_del".into(), list(&self.p_del)),
            ("eval.max_cues".into(), opt(self.max_cues)),
            ("generate.per_class".into(), g.per_class.to_string()),
            ("generate.checkpoint".into(), opt(g.checkpoint)),
            ("generate.interval_samples".into(), g.interval_samples.to_string()),
            ("generate.interval_p_del".into(), g.interval_p_del.to_string()),
            ("generate.band".into(), format!("{},{}", g.band.0, g.band.1)),
            ("generate.s0".into(), g.s0.to_string()),
            ("generate.s_inc".into(), g.s_inc.to_string()),
            ("generate.max_iters".into(), g.max_iters.to_string()),
            ("montage.count".into(), self.montage.count.to_string()),
            ("montage.prototype_scale".into(), self.montage.prototype_scale.to_string()),
        ]);
        if let Some((lo, hi)) = g.interval {
            out.push(("generate.interval".into(), format!("{lo},{hi}")));
        }
        out
    }
}
