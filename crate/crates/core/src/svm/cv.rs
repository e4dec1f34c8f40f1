use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{evaluate, fit_standardizer, train_svm, unscale_hyperplane, ConfusionMatrix, SvmConfig, SvmError};
use crate::dcopf::Label;

pub const DEFAULT_CNEG_GRID: [f64; 5] = [1.0, 5.0, 10.0, 50.0, 100.0];

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub c_negative: f64,
    /// Held-out counts summed over folds.
    pub confusion: ConfusionMatrix,
}

/// k-fold cross-validation on raw features; each fold fits its own
/// standardizer on its training part.
pub fn cross_validate<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[Label],
    names: &[String],
    cfg: &SvmConfig,
    folds: usize,
) -> Result<ConfusionMatrix, SvmError> {
    if folds < 2 || rows.len() < folds {
        return Err(SvmError::TooFewSamples(rows.len()));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_f01d));
    let mut fold_of = vec![0; rows.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    let parts: Result<Vec<ConfusionMatrix>, SvmError> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let train: Vec<usize> = (0..rows.len()).filter(|&i| fold_of[i] != k).collect();
            let test: Vec<usize> = (0..rows.len()).filter(|&i| fold_of[i] == k).collect();
            let raw: Vec<&[f64]> = train.iter().map(|&i| rows[i].as_ref()).collect();
            let std = fit_standardizer(&raw)?;
            let scaled: Vec<Vec<f64>> = raw.iter().map(|r| std.transform(r)).collect();
            let y: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            let (h, _) = train_svm(&scaled, &y, names, cfg)?;
            let h = unscale_hyperplane(&h, &std)?;
            Ok(evaluate(&h, test.iter().map(|&i| (rows[i].as_ref(), labels[i]))))
        })
        .collect();
    let mut total = ConfusionMatrix::default();
    for p in parts? {
        total.add(&p);
    }
    Ok(total)
}

/// Cross-validates each `c_negative` in `grid` and returns all results with
/// the index of the winner: lowest false-positive rate, then highest
/// accuracy, then the smaller penalty.
pub fn grid_search<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[Label],
    names: &[String],
    base: &SvmConfig,
    grid: &[f64],
    folds: usize,
) -> Result<(Vec<CvResult>, usize), SvmError> {
    let mut results = Vec::with_capacity(grid.len());
    for &c in grid {
        let cfg = SvmConfig { c_negative: c, ..base.clone() };
        results.push(CvResult {
            c_negative: c,
            confusion: cross_validate(rows, labels, names, &cfg, folds)?,
        });
    }
    let best = (0..results.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&results[a].confusion, &results[b].confusion);
            ra.false_positive_rate()
                .total_cmp(&rb.false_positive_rate())
                .then(rb.accuracy().total_cmp(&ra.accuracy()))
                .then(results[a].c_negative.total_cmp(&results[b].c_negative))
        })
        .ok_or(SvmError::InvalidConfig("empty grid".into()))?;
    Ok((results, best))
}
