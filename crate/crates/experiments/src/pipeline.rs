//! Shared steps: data loading, encoding into desCodes, artifact paths.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use willshaw::data::load_idx;
use willshaw::{
    BitVector, Dataset, DesCode, Dictionary, Image, ModalitySchema, MultiModal, PatchCodec,
    WillshawMemory,
};

use crate::config::{ExperimentConfig, DESCRIPTION, VISUAL};
use crate::error::{ExperimentError, Result};
use crate::streams::{rng, Stream};

pub const DICTIONARY_FILE: &str = "dictionary.wdc";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn memory_file(checkpoint: usize) -> String {
    format!("memory-{checkpoint:06}.wam")
}

/// Loaded configuration, datasets and output directory.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub train: Dataset,
    pub test: Dataset,
    pub checkpoints: Vec<usize>,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(ExperimentError::io(out))?;
        let d = &cfg.data;
        let mut train: Dataset = load_idx(&d.train_images, &d.train_labels)?;
        let mut test: Dataset = load_idx(&d.test_images, &d.test_labels)?;
        if let Some(n) = d.train_limit {
            train = train.truncate(n);
        }
        if let Some(n) = d.test_limit {
            test = test.truncate(n);
        }
        let classes = cfg.nxh.classes;
        if let Some(&l) = train.labels.iter().chain(&test.labels).find(|&&l| usize::from(l) >= classes) {
            return Err(crate::config::ConfigError::Invalid(format!(
                "dataset contains label {l} but nxh.classes = {classes}"
            ))
            .into());
        }
        let checkpoints = cfg.effective_checkpoints(train.len());
        Ok(Self {
            cfg,
            out: out.to_owned(),
            train,
            test,
            checkpoints,
        })
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn artifact(&self, file: &str) -> Result<PathBuf> {
        let p = self.path(file);
        if p.is_file() {
            Ok(p)
        } else {
            Err(ExperimentError::MissingArtifact(p))
        }
    }

    pub fn load_dictionary(&self) -> Result<Dictionary> {
        let p = self.artifact(DICTIONARY_FILE)?;
        Dictionary::load(&p).map_err(ExperimentError::format(p))
    }

    pub fn load_memory(&self, checkpoint: usize) -> Result<WillshawMemory> {
        let p = self.artifact(&memory_file(checkpoint))?;
        WillshawMemory::load(&p).map_err(ExperimentError::format(p))
    }

    pub fn schema(&self) -> Arc<ModalitySchema> {
        Arc::new(ModalitySchema::new(self.cfg.modalities.iter().cloned()).expect("validated config"))
    }

    /// Up to `eval.max_cues` indices out of `0..n`, sorted.
    pub fn eval_indices(&self, n: usize, salt: u64) -> Vec<usize> {
        match self.cfg.max_cues {
            Some(cap) if cap < n => {
                let mut r = rng(self.seed(), Stream::Sampling, salt);
                sample_sorted(&mut r, n, cap)
            }
            _ => (0..n).collect(),
        }
    }
}

pub fn sample_sorted<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, n, k.min(n)).into_vec();
    v.sort_unstable();
    v
}

/// Every pattern as a desCode, plus the binarized images the codes stand for.
pub struct Encoded {
    pub codec: PatchCodec,
    pub schema: Arc<ModalitySchema>,
    pub train: Vec<DesCode>,
    pub test: Vec<DesCode>,
    pub train_targets: Vec<Image>,
    pub test_targets: Vec<Image>,
}

impl Encoded {
    pub fn new(ctx: &Context, dictionary: Dictionary) -> Result<Self> {
        let codec = PatchCodec::new(ctx.cfg.encoder, dictionary)?;
        let schema = ctx.schema();
        let encode_set = |set: &Dataset, stream: Stream| -> Result<Vec<DesCode>> {
            set.images
                .par_iter()
                .zip(&set.labels)
                .enumerate()
                .map(|(i, (img, &label))| {
                    let mut r = rng(ctx.seed(), stream, i as u64);
                    let description = ctx.cfg.nxh.encode(usize::from(label), &mut r)?;
                    let visual = codec.encode(img)?;
                    Ok(DesCode::assemble(&schema, [(DESCRIPTION, &description), (VISUAL, &visual)])?)
                })
                .collect()
        };
        let threshold = ctx.cfg.encoder.binarize_threshold as f32;
        let targets = |set: &Dataset| -> Vec<Image> { set.images.par_iter().map(|i| i.binarize(threshold)).collect() };
        Ok(Self {
            train: encode_set(&ctx.train, Stream::TrainDescription)?,
            test: encode_set(&ctx.test, Stream::TestDescription)?,
            train_targets: targets(&ctx.train),
            test_targets: targets(&ctx.test),
            codec,
            schema,
        })
    }

    pub fn multimodal<'m>(&self, ctx: &Context, memory: &'m WillshawMemory) -> Result<MultiModal<'m>> {
        Ok(MultiModal::new(memory, self.schema.clone(), DESCRIPTION, VISUAL, ctx.cfg.nxh)?)
    }

    pub fn visual(&self, code: &DesCode) -> BitVector {
        code.extract(VISUAL).expect("schema has a visual segment")
    }

    pub fn decode(&self, visual: &BitVector) -> Result<Image> {
        Ok(self.codec.decode(visual)?)
    }
}
