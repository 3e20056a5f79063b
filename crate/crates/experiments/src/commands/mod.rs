mod classify;
mod complete;
mod generate;
mod retrieve;
mod stats;
mod train;

pub use classify::classify;
pub use complete::{complete, tagged};
pub use generate::{generate, Attempt, GenerateReport};
pub use retrieve::retrieve;
pub use stats::stats;
pub use train::{train, TrainReport, FINAL_MEMORY_FILE};

use crate::pipeline::Context;

/// Montages are drawn at the first and last checkpoints only.
fn montage_checkpoints(ctx: &Context) -> Vec<usize> {
    let mut v: Vec<usize> = ctx.checkpoints.first().into_iter().chain(ctx.checkpoints.last()).copied().collect();
    v.dedup();
    v
}

/// Mean and standard error of the mean.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
