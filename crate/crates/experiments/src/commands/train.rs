use std::path::PathBuf;

use serde_json::json;
use willshaw::codecs::learn_dictionary;
use willshaw::image::GrayImage;
use willshaw::{BitVector, Dictionary, WillshawMemory};

use crate::error::{ExperimentError, Result};
use crate::montage::Montage;
use crate::pipeline::{memory_file, Context, Encoded, DICTIONARY_FILE, MANIFEST_FILE};
use crate::streams::{rng, Stream};

pub const FINAL_MEMORY_FILE: &str = "memory.wam";

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub stored: usize,
    pub checkpoints: Vec<usize>,
    pub artifacts: Vec<PathBuf>,
}

fn dictionary_montage(dict: &Dictionary, scale: usize) -> Montage {
    let p = dict.patch_size();
    let mut m = Montage::new(p, p, dict.len().min(8), scale);
    for k in 0..dict.len() {
        let tile = GrayImage::new(p, p, dict.prototype(k).to_vec()).expect("p*p values");
        m.push(format!("prototype-{k}"), Some(&tile));
    }
    m
}

/// Learns the dictionary, stores every training desCode in one pass and
/// snapshots the memory at each checkpoint.
pub fn train(ctx: &Context) -> Result<TrainReport> {
    let cfg = &ctx.cfg;
    let dict = learn_dictionary(
        &ctx.train.images,
        &cfg.encoder,
        &cfg.kmeans,
        &mut rng(ctx.seed(), Stream::Dictionary, 0),
    )?;
    let mut artifacts = Vec::new();
    let dict_path = ctx.path(DICTIONARY_FILE);
    dict.save(&dict_path).map_err(ExperimentError::format(&dict_path))?;
    artifacts.push(dict_path);
    dictionary_montage(&dict, cfg.montage.prototype_scale)
        .save(&ctx.out, "dictionary")
        .map_err(ExperimentError::io(&ctx.out))?;

    let enc = Encoded::new(ctx, dict)?;
    let patterns: Vec<BitVector> = enc.train.iter().map(|c| c.bits().clone()).collect();
    let mut memory = WillshawMemory::auto(enc.schema.total_len());
    let mut start = 0;
    for &c in &ctx.checkpoints {
        memory.store_batch(&patterns[start..c])?;
        start = c;
        let p = ctx.path(&memory_file(c));
        memory.save(&p).map_err(ExperimentError::format(&p))?;
        artifacts.push(p);
    }
    memory.store_batch(&patterns[start..])?;
    let p = ctx.path(FINAL_MEMORY_FILE);
    memory.save(&p).map_err(ExperimentError::format(&p))?;
    artifacts.push(p);

    let files: Vec<_> = artifacts
        .iter()
        .map(|p| {
            let bytes = std::fs::metadata(p).map(|m| m.len()).unwrap_or(0);
            json!({ "file": p.file_name().map(|f| f.to_string_lossy()), "bytes": bytes })
        })
        .collect();
    let streams: Vec<_> = Stream::ALL
        .iter()
        .map(|&s| json!({ "name": s.name(), "id": s as u64 }))
        .collect();
    let manifest = json!({
        "seed": ctx.seed(),
        "config": cfg.entries(),
        "streams": streams,
        "train_patterns": patterns.len(),
        "test_patterns": ctx.test.len(),
        "checkpoints": ctx.checkpoints,
        "code_length": enc.schema.total_len(),
        "stored_count": memory.stored_count(),
        "artifacts": files,
    });
    let p = ctx.path(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("json values serialize") + "\n";
    std::fs::write(&p, text).map_err(ExperimentError::io(&p))?;

    Ok(TrainReport {
        stored: patterns.len(),
        checkpoints: ctx.checkpoints.clone(),
        artifacts,
    })
}
