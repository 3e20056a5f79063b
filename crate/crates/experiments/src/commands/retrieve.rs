use rayon::prelude::*;
use willshaw::metrics::{count_stats, mse};

use crate::error::{ExperimentError, Result};
use crate::montage::Montage;
use crate::output::{write_rows, Row};
use crate::pipeline::{Context, Encoded};

use super::montage_checkpoints;

struct Sample {
    cue_bits: usize,
    retrieved_bits: usize,
    superset: bool,
    cue_mse: f64,
    retrieved_mse: f64,
}

/// Noiseless retrieval: every stored visual code is used as its own cue.
pub fn retrieve(ctx: &Context, enc: &Encoded) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &c in &ctx.checkpoints {
        let memory = ctx.load_memory(c)?;
        let mm = enc.multimodal(ctx, &memory)?;
        let idx = ctx.eval_indices(c, c as u64);
        let samples: Vec<Sample> = idx
            .par_iter()
            .map(|&i| {
                let code = &enc.train[i];
                let (out, _) = mm.retrieve(&mm.without_description(code))?;
                let cue = enc.visual(code);
                let got = mm.visual_of(&out);
                let target = std::slice::from_ref(&enc.train_targets[i]);
                Ok(Sample {
                    cue_bits: cue.count_ones(),
                    retrieved_bits: got.count_ones(),
                    superset: cue.is_subset_of(&got),
                    cue_mse: mse(target, &[enc.decode(&cue)?])? as f64,
                    retrieved_mse: mse(target, &[enc.decode(&got)?])? as f64,
                })
            })
            .collect::<Result<_>>()?;

        let n = samples.len() as f64;
        let cue = count_stats(&samples.iter().map(|s| s.cue_bits).collect::<Vec<_>>())?;
        let got = count_stats(&samples.iter().map(|s| s.retrieved_bits).collect::<Vec<_>>())?;
        rows.extend([
            Row::new(c, "cues", n),
            Row::new(c, "cue_bits_mean", cue.mean),
            Row::new(c, "cue_bits_std", cue.std),
            Row::new(c, "retrieved_bits_mean", got.mean),
            Row::new(c, "retrieved_bits_std", got.std),
            Row::new(c, "retrieved_bits_min", got.min as f64),
            Row::new(c, "retrieved_bits_max", got.max as f64),
            Row::new(c, "bits_ratio", got.mean / cue.mean),
            Row::new(c, "superset_fraction", samples.iter().filter(|s| s.superset).count() as f64 / n),
            Row::new(c, "cue_mse", samples.iter().map(|s| s.cue_mse).sum::<f64>() / n),
            Row::new(c, "retrieved_mse", samples.iter().map(|s| s.retrieved_mse).sum::<f64>() / n),
        ]);

        if montage_checkpoints(ctx).contains(&c) {
            let shown = &idx[..idx.len().min(ctx.cfg.montage.count)];
            let mut m = Montage::new(28, 28, shown.len().max(1), 1);
            for &i in shown {
                m.push(format!("original-{i}"), Some(&enc.train_targets[i]));
            }
            for &i in shown {
                m.push(format!("cue-{i}"), Some(&enc.decode(&enc.visual(&enc.train[i]))?));
            }
            for &i in shown {
                let (out, _) = mm.retrieve(&mm.without_description(&enc.train[i]))?;
                m.push(format!("retrieved-{i}"), Some(&enc.decode(&mm.visual_of(&out))?));
            }
            m.save(&ctx.out, &format!("retrieve-{c:06}"))
                .map_err(ExperimentError::io(&ctx.out))?;
        }
    }
    write_rows(&ctx.path("retrieve.csv"), &rows)?;
    Ok(rows)
}
