use rayon::prelude::*;
use serde::Serialize;
use willshaw::metrics::count_stats;
use willshaw::multimodal::percentile;
use willshaw::{DesCode, GenerationConfig, MultimodalError, TraceStep};

use crate::error::{ExperimentError, Result};
use crate::montage::Montage;
use crate::output::{write_records, write_rows, Row};
use crate::pipeline::{sample_sorted, Context, Encoded};
use crate::streams::{rng, Stream};

const INTERVAL_SALT: u64 = 1 << 44;

#[derive(Debug, Clone)]
pub struct Attempt {
    pub label: usize,
    pub attempt: usize,
    pub iterations: usize,
    /// Visual popcount of the accepted code.
    pub visual_bits: Option<usize>,
    /// Label decoded after masking the description of the accepted code.
    pub reclassified: Option<usize>,
    pub trace: Vec<TraceStep>,
    pub code: Option<DesCode>,
}

impl Attempt {
    pub fn converged(&self) -> bool {
        self.visual_bits.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct GenerateReport {
    pub checkpoint: usize,
    pub interval: (usize, usize),
    /// Visual popcounts the interval was estimated from (empty when fixed in the config).
    pub interval_counts: Vec<usize>,
    pub blob_bits: Vec<usize>,
    pub stored_visual_mean: f64,
    pub attempts: Vec<Attempt>,
    pub rows: Vec<Row>,
}

#[derive(Serialize)]
struct TraceRecord {
    label: usize,
    attempt: usize,
    iteration: usize,
    after_retrieve: usize,
    after_sparsify: Option<usize>,
    sparsity: usize,
}

#[derive(Serialize)]
struct AttemptRecord {
    label: usize,
    attempt: usize,
    converged: bool,
    iterations: usize,
    visual_bits: Option<usize>,
    reclassified: Option<usize>,
}

/// Blobs, acceptance interval and iterative generation for every class.
///
/// Writes all artifacts first, then fails with [`ExperimentError::NoConvergence`]
/// if not a single attempt converged.
pub fn generate(ctx: &Context, enc: &Encoded) -> Result<GenerateReport> {
    let cfg = &ctx.cfg;
    let g = &cfg.generate;
    let seed = ctx.seed();
    let c = match g.checkpoint {
        Some(c) if ctx.checkpoints.contains(&c) => c,
        Some(c) => {
            return Err(crate::config::ConfigError::Invalid(format!(
                "generate.checkpoint = {c} is not one of the checkpoints {:?}",
                ctx.checkpoints
            ))
            .into())
        }
        None => *ctx.checkpoints.last().expect("at least one checkpoint"),
    };
    let memory = ctx.load_memory(c)?;
    let mm = enc.multimodal(ctx, &memory)?;
    let classes = cfg.nxh.classes;

    let blobs: Vec<DesCode> = (0..classes).map(|l| mm.make_blob(l)).collect::<Result<_, _>>()?;
    let blob_bits: Vec<usize> = blobs.iter().map(|b| mm.visual_of(b).count_ones()).collect();
    let stored_visual: Vec<usize> = enc.train[..c].iter().map(|d| mm.visual_of(d).count_ones()).collect();
    let stored_visual_mean = count_stats(&stored_visual)?.mean;

    let (interval, interval_counts) = match g.interval {
        Some(i) => (i, Vec::new()),
        None => {
            let mut r = rng(seed, Stream::Sampling, INTERVAL_SALT);
            let picks = sample_sorted(&mut r, c, g.interval_samples);
            let samples: Vec<DesCode> = picks.iter().map(|&i| enc.train[i].clone()).collect();
            let est = mm.estimate_acceptance_interval(
                &samples,
                g.interval_p_del,
                g.band,
                &mut rng(seed, Stream::Interval, 0),
            )?;
            ((est.low, est.high), est.counts)
        }
    };
    let gen_cfg = GenerationConfig {
        interval_low: interval.0,
        interval_high: interval.1,
        initial_sparsity: g.s0,
        sparsity_increment: g.s_inc,
        max_iters: g.max_iters,
    };
    gen_cfg.validate()?;

    let jobs: Vec<(usize, usize)> = (0..classes)
        .flat_map(|l| (0..g.per_class).map(move |k| (l, k)))
        .collect();
    let attempts: Vec<Attempt> = jobs
        .par_iter()
        .map(|&(label, attempt)| {
            let mut r = rng(seed, Stream::Generation, (label * g.per_class + attempt) as u64);
            let blank = Attempt {
                label,
                attempt,
                iterations: 0,
                visual_bits: None,
                reclassified: None,
                trace: Vec::new(),
                code: None,
            };
            match mm.generate(label, &gen_cfg, &mut r) {
                Ok(gen) => {
                    let reclassified = mm.classify(&mm.without_description(&gen.code))?.label();
                    Ok(Attempt {
                        iterations: gen.iterations,
                        visual_bits: Some(mm.visual_of(&gen.code).count_ones()),
                        reclassified,
                        trace: gen.trace,
                        code: Some(gen.code),
                        ..blank
                    })
                }
                Err(MultimodalError::NoConvergence { iterations, trace }) => Ok(Attempt {
                    iterations,
                    trace,
                    ..blank
                }),
                Err(MultimodalError::NoEvidence) => Ok(blank),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_>>()?;

    let converged: Vec<&Attempt> = attempts.iter().filter(|a| a.converged()).collect();
    let reclassified = converged.iter().filter(|a| a.reclassified == Some(a.label)).count();
    let inside = converged
        .iter()
        .filter(|a| a.visual_bits.is_some_and(|b| gen_cfg.accepts(b)))
        .count();
    let n = attempts.len() as f64;
    let mut rows = vec![
        Row::new(c, "interval_low", interval.0 as f64),
        Row::new(c, "interval_high", interval.1 as f64),
        Row::new(c, "stored_visual_bits_mean", stored_visual_mean),
        Row::new(c, "blob_visual_bits_mean", count_stats(&blob_bits)?.mean),
        Row::new(c, "blob_visual_bits_min", *blob_bits.iter().min().unwrap_or(&0) as f64),
        Row::new(c, "attempts", n),
        Row::new(c, "converged", converged.len() as f64),
        Row::new(c, "convergence_rate", converged.len() as f64 / n.max(1.0)),
        Row::new(c, "inside_interval", inside as f64),
        Row::new(c, "reclassified", reclassified as f64),
        Row::new(c, "reclassify_rate", reclassified as f64 / (converged.len().max(1)) as f64),
        Row::new(
            c,
            "iterations_mean",
            converged.iter().map(|a| a.iterations as f64).sum::<f64>() / (converged.len().max(1)) as f64,
        ),
    ];
    if !interval_counts.is_empty() {
        let mut sorted = interval_counts.clone();
        sorted.sort_unstable();
        rows.push(Row::new(c, "interval_sample_median", percentile(&sorted, 50.0) as f64));
    }
    for (l, b) in blob_bits.iter().enumerate() {
        rows.push(Row::new(c, format!("blob_visual_bits[{l}]"), *b as f64));
    }

    write_rows(&ctx.path("generate.csv"), &rows)?;
    let trace: Vec<TraceRecord> = attempts
        .iter()
        .flat_map(|a| {
            a.trace.iter().map(move |t| TraceRecord {
                label: a.label,
                attempt: a.attempt,
                iteration: t.iteration,
                after_retrieve: t.after_retrieve,
                after_sparsify: t.after_sparsify,
                sparsity: t.sparsity,
            })
        })
        .collect();
    write_records(
        &ctx.path("generation_trace.csv"),
        &["label", "attempt", "iteration", "after_retrieve", "after_sparsify", "sparsity"],
        &trace,
    )?;
    let summary: Vec<AttemptRecord> = attempts
        .iter()
        .map(|a| AttemptRecord {
            label: a.label,
            attempt: a.attempt,
            converged: a.converged(),
            iterations: a.iterations,
            visual_bits: a.visual_bits,
            reclassified: a.reclassified,
        })
        .collect();
    write_records(
        &ctx.path("generation_attempts.csv"),
        &["label", "attempt", "converged", "iterations", "visual_bits", "reclassified"],
        &summary,
    )?;
    let counts: Vec<(usize, usize)> = interval_counts.iter().copied().enumerate().collect();
    write_records(&ctx.path("acceptance_counts.csv"), &["sample", "visual_bits"], &counts)?;

    let mut blob_montage = Montage::new(28, 28, classes, 1);
    for (l, b) in blobs.iter().enumerate() {
        blob_montage.push(format!("blob-{l}"), Some(&enc.decode(&mm.visual_of(b))?));
    }
    blob_montage
        .save(&ctx.out, "blobs")
        .map_err(ExperimentError::io(&ctx.out))?;
    let mut gen_montage = Montage::new(28, 28, g.per_class.max(1), 1);
    for a in &attempts {
        let name = format!("label-{}-attempt-{}", a.label, a.attempt);
        match &a.code {
            Some(code) => gen_montage.push(name, Some(&enc.decode(&mm.visual_of(code))?)),
            None => gen_montage.push(format!("{name}-none"), None),
        }
    }
    gen_montage
        .save(&ctx.out, "generations")
        .map_err(ExperimentError::io(&ctx.out))?;

    if converged.is_empty() && !attempts.is_empty() {
        return Err(ExperimentError::NoConvergence {
            attempts: attempts.len(),
        });
    }
    Ok(GenerateReport {
        checkpoint: c,
        interval,
        interval_counts,
        blob_bits,
        stored_visual_mean,
        attempts,
        rows,
    })
}
