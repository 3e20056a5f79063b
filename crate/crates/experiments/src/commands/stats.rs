use willshaw::metrics::{bit_stats, count_stats, optimal_sparsity, BitStats};

use crate::config::{DESCRIPTION, VISUAL};
use crate::error::Result;
use crate::output::{write_rows, Row};
use crate::pipeline::{memory_file, Context, Encoded};

fn push_stats(rows: &mut Vec<Row>, prefix: &str, s: &BitStats) {
    rows.extend([
        Row::new(0, format!("{prefix}_mean"), s.mean),
        Row::new(0, format!("{prefix}_std"), s.std),
        Row::new(0, format!("{prefix}_min"), s.min as f64),
        Row::new(0, format!("{prefix}_max"), s.max as f64),
    ]);
}

/// Code statistics (checkpoint 0) and memory fill per checkpoint snapshot.
pub fn stats(ctx: &Context, enc: &Encoded) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let train_visual: Vec<_> = enc.train.iter().map(|d| enc.visual(d)).collect();
    let test_visual: Vec<_> = enc.test.iter().map(|d| enc.visual(d)).collect();
    let descriptions: Vec<_> = enc.train.iter().map(|d| d.extract(DESCRIPTION).expect("schema")).collect();
    push_stats(&mut rows, "train_visual_bits", &bit_stats(&train_visual)?);
    push_stats(&mut rows, "test_visual_bits", &bit_stats(&test_visual)?);
    push_stats(&mut rows, "train_description_bits", &bit_stats(&descriptions)?);
    let on: Vec<usize> = enc.train_targets.iter().map(|t| t.count_on()).collect();
    push_stats(&mut rows, "train_image_on_pixels", &count_stats(&on)?);

    let visual_len = enc.schema.segment(VISUAL).expect("schema").len;
    rows.extend([
        Row::new(0, "train_patterns", ctx.train.len() as f64),
        Row::new(0, "test_patterns", ctx.test.len() as f64),
        Row::new(0, "code_length", enc.schema.total_len() as f64),
        Row::new(0, "visual_length", visual_len as f64),
        Row::new(0, "optimal_sparsity_visual", optimal_sparsity(visual_len)?),
        Row::new(0, "optimal_sparsity_pixels", optimal_sparsity(28 * 28)?),
    ]);

    for &c in &ctx.checkpoints {
        if !ctx.path(&memory_file(c)).is_file() {
            continue;
        }
        let m = ctx.load_memory(c)?;
        rows.extend([
            Row::new(c, "stored_count", m.stored_count() as f64),
            Row::new(c, "memory_ones", m.count_ones() as f64),
            Row::new(c, "memory_fill", m.fill()),
        ]);
    }
    write_rows(&ctx.path("stats.csv"), &rows)?;
    Ok(rows)
}
