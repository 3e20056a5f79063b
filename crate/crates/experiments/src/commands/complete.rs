use rayon::prelude::*;
use willshaw::codecs::delete_bits;
use willshaw::metrics::mse_split;

use crate::config::VISUAL;
use crate::error::{ExperimentError, Result};
use crate::montage::Montage;
use crate::output::{write_rows, Row};
use crate::pipeline::{Context, Encoded};
use crate::streams::{rng, Stream};

use super::{mean_and_se, montage_checkpoints};

struct Sample {
    cue_bits: usize,
    retrieved_bits: usize,
    cue: (f64, f64),
    memory: (f64, f64),
}

/// Metric name tagged with the deletion probability.
pub fn tagged(metric: &str, p_del: f64) -> String {
    format!("{metric}[p_del={p_del}]")
}

/// Completion of visual codes with bits deleted at each configured rate.
///
/// A pattern's deletion mask depends only on the pattern and the rate, so
/// every checkpoint sees the same noisy cue for the same pattern.
pub fn complete(ctx: &Context, enc: &Encoded) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let seed = ctx.seed();
    for &c in &ctx.checkpoints {
        let memory = ctx.load_memory(c)?;
        let mm = enc.multimodal(ctx, &memory)?;
        let idx = ctx.eval_indices(c, c as u64);
        for (pi, &p) in ctx.cfg.p_del.iter().enumerate() {
            let noisy_cue = |i: usize| {
                let mut r = rng(seed, Stream::Noise, ((pi as u64) << 32) | i as u64);
                delete_bits(&enc.visual(&enc.train[i]), p, &mut r)
            };
            let samples: Vec<Sample> = idx
                .par_iter()
                .map(|&i| {
                    let noisy = noisy_cue(i);
                    let cue = mm.without_description(&enc.train[i]).replace(VISUAL, &noisy)?;
                    let (out, _) = mm.retrieve(&cue)?;
                    let got = mm.visual_of(&out);
                    let target = std::slice::from_ref(&enc.train_targets[i]);
                    let (cl, ce) = mse_split(target, &[enc.decode(&noisy)?])?;
                    let (ml, me) = mse_split(target, &[enc.decode(&got)?])?;
                    Ok(Sample {
                        cue_bits: noisy.count_ones(),
                        retrieved_bits: got.count_ones(),
                        cue: (cl as f64, ce as f64),
                        memory: (ml as f64, me as f64),
                    })
                })
                .collect::<Result<_>>()?;

            let n = samples.len() as f64;
            rows.push(Row::new(c, tagged("cues", p), n));
            rows.push(Row::new(
                c,
                tagged("cue_bits_mean", p),
                samples.iter().map(|s| s.cue_bits as f64).sum::<f64>() / n,
            ));
            rows.push(Row::new(
                c,
                tagged("retrieved_bits_mean", p),
                samples.iter().map(|s| s.retrieved_bits as f64).sum::<f64>() / n,
            ));
            let series: [(&str, Vec<f64>); 4] = [
                ("cue_mse_lost", samples.iter().map(|s| s.cue.0).collect()),
                ("cue_mse_extra", samples.iter().map(|s| s.cue.1).collect()),
                ("mse_lost", samples.iter().map(|s| s.memory.0).collect()),
                ("mse_extra", samples.iter().map(|s| s.memory.1).collect()),
            ];
            for (name, values) in &series {
                let (mean, se) = mean_and_se(values);
                rows.push(Row::new(c, tagged(name, p), mean));
                rows.push(Row::new(c, tagged(&format!("{name}_se"), p), se));
            }

            if montage_checkpoints(ctx).contains(&c) {
                let shown = &idx[..idx.len().min(ctx.cfg.montage.count)];
                let mut m = Montage::new(28, 28, shown.len().max(1), 1);
                for &i in shown {
                    m.push(format!("original-{i}"), Some(&enc.train_targets[i]));
                }
                for &i in shown {
                    m.push(format!("noisy-cue-{i}"), Some(&enc.decode(&noisy_cue(i))?));
                }
                for &i in shown {
                    let cue = mm.without_description(&enc.train[i]).replace(VISUAL, &noisy_cue(i))?;
                    let (out, _) = mm.retrieve(&cue)?;
                    m.push(format!("completed-{i}"), Some(&enc.decode(&mm.visual_of(&out))?));
                }
                m.save(&ctx.out, &format!("complete-p{p}-{c:06}"))
                    .map_err(ExperimentError::io(&ctx.out))?;
            }
        }
    }
    write_rows(&ctx.path("complete.csv"), &rows)?;
    Ok(rows)
}
