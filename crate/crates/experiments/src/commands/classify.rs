use rayon::prelude::*;
use willshaw::{Classification, DesCode, MultiModal};

use crate::error::Result;
use crate::output::{write_rows, Row};
use crate::pipeline::{Context, Encoded};

/// Offset separating test-set sampling from training-set sampling.
const TEST_SALT: u64 = 1 << 40;

struct Score {
    cues: usize,
    correct: usize,
    no_evidence: usize,
}

fn score<F>(mm: &MultiModal<'_>, items: &[(usize, &DesCode)], cue: F) -> Result<Score>
where
    F: Fn(&DesCode) -> DesCode + Sync,
{
    let outcomes: Vec<Classification> = items
        .par_iter()
        .map(|(_, code)| Ok(mm.classify(&cue(code))?))
        .collect::<Result<_>>()?;
    let correct = items
        .iter()
        .zip(&outcomes)
        .filter(|((label, _), o)| o.label() == Some(*label))
        .count();
    Ok(Score {
        cues: items.len(),
        correct,
        no_evidence: outcomes.iter().filter(|o| o.label().is_none()).count(),
    })
}

/// The three classification tasks at every checkpoint:
/// `t1` full stored desCodes, `t2` stored desCodes without description,
/// `t3` unseen test desCodes without description.
pub fn classify(ctx: &Context, enc: &Encoded) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &c in &ctx.checkpoints {
        let memory = ctx.load_memory(c)?;
        let mm = enc.multimodal(ctx, &memory)?;
        let stored: Vec<(usize, &DesCode)> = ctx
            .eval_indices(c, c as u64)
            .into_iter()
            .map(|i| (usize::from(ctx.train.labels[i]), &enc.train[i]))
            .collect();
        let unseen: Vec<(usize, &DesCode)> = ctx
            .eval_indices(ctx.test.len(), TEST_SALT | c as u64)
            .into_iter()
            .map(|i| (usize::from(ctx.test.labels[i]), &enc.test[i]))
            .collect();

        let tasks = [
            ("t1", score(&mm, &stored, |d| d.clone())?),
            ("t2", score(&mm, &stored, |d| mm.without_description(d))?),
            ("t3", score(&mm, &unseen, |d| mm.without_description(d))?),
        ];
        for (task, s) in tasks {
            rows.push(Row::new(c, format!("{task}_accuracy"), s.correct as f64 / s.cues.max(1) as f64));
            rows.push(Row::new(c, format!("{task}_no_evidence"), s.no_evidence as f64));
            rows.push(Row::new(c, format!("{task}_cues"), s.cues as f64));
        }
    }
    write_rows(&ctx.path("classify.csv"), &rows)?;
    Ok(rows)
}
