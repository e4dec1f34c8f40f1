//! Standardization, class-weighted linear SVM, hyperplane extraction and
//! classification metrics.
//!
//! Feasible points are the positive class. A false positive is an
//! infeasible point predicted feasible, which is the error the heavier
//! `c_negative` penalty suppresses.

mod cv;
mod dcd;
mod model;

pub use cv::{cross_validate, grid_search, CvResult, DEFAULT_CNEG_GRID};
pub use dcd::{train_svm, TrainReport};
pub use model::{read_model, write_model, ModelFile};

use crate::dcopf::Label;
use crate::scenario::Dataset;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("training data holds a single class")]
    SingleClassData,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("too few samples: {0}")]
    TooFewSamples(usize),
    #[error("model file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Per-feature mean and population standard deviation. Features whose
/// spread is numerically zero are dropped: their `std` is stored as 0 and
/// they map to 0 in scaled space.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Indices of dropped constant features.
    pub dropped: Vec<usize>,
}

pub fn fit_standardizer<R: AsRef<[f64]>>(rows: &[R]) -> Result<Standardizer, SvmError> {
    if rows.len() < 2 {
        return Err(SvmError::TooFewSamples(rows.len()));
    }
    let d = rows[0].as_ref().len();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        let r = r.as_ref();
        if r.len() != d {
            return Err(SvmError::DimensionMismatch(format!("row of length {} vs {d}", r.len())));
        }
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; d];
    for r in rows {
        for ((s, v), m) in std.iter_mut().zip(r.as_ref()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut dropped = Vec::new();
    for (j, s) in std.iter_mut().enumerate() {
        *s = (*s / n).sqrt();
        if *s <= 1e-12 * mean[j].abs().max(1.0) {
            *s = 0.0;
            dropped.push(j);
        }
    }
    Ok(Standardizer { mean, std, dropped })
}

impl Standardizer {
    pub fn identity(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            std: vec![1.0; d],
            dropped: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmConfig {
    pub c_positive: f64,
    pub c_negative: f64,
    /// Stop when the projected-gradient spread falls below this.
    pub tolerance: f64,
    pub max_passes: usize,
    /// Allowed decision-value violation when measuring the margin.
    pub margin_tolerance: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c_positive: 1.0,
            c_negative: 10.0,
            tolerance: 1e-3,
            max_passes: 2000,
            margin_tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c_positive > 0.0) || !(self.c_negative >= self.c_positive) {
            return Err(SvmError::InvalidConfig(format!(
                "need c_negative >= c_positive > 0, got {} and {}",
                self.c_negative, self.c_positive
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(SvmError::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn penalty(&self, label: Label) -> f64 {
        match label {
            Label::Feasible => self.c_positive,
            Label::Infeasible => self.c_negative,
        }
    }
}

/// `w . phi + b >= 0` means feasible. Scaled weights act on standardized
/// features, physical weights on raw MW features.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub feature_names: Vec<String>,
    pub weights_scaled: Vec<f64>,
    pub bias_scaled: f64,
    pub weights_physical: Vec<f64>,
    pub bias_physical: f64,
}

impl Hyperplane {
    /// A hyperplane already in physical units.
    pub fn physical(feature_names: Vec<String>, weights: Vec<f64>, bias: f64) -> Self {
        Self {
            feature_names,
            weights_scaled: weights.clone(),
            bias_scaled: bias,
            weights_physical: weights,
            bias_physical: bias,
        }
    }

    pub fn decision(&self, phi: &[f64]) -> f64 {
        dot(&self.weights_physical, phi) + self.bias_physical
    }

    pub fn decision_scaled(&self, phi_scaled: &[f64]) -> f64 {
        dot(&self.weights_scaled, phi_scaled) + self.bias_scaled
    }

    pub fn predict(&self, phi: &[f64]) -> Label {
        sign(self.decision(phi))
    }

    /// Physical weights with entries below `1e-3 max|w|` set to zero.
    pub fn pruned_physical(&self) -> Vec<f64> {
        let max = self.weights_physical.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        self.weights_physical
            .iter()
            .map(|&w| if w.abs() < 1e-3 * max { 0.0 } else { w })
            .collect()
    }

    /// Human-readable form, e.g. `24.34 - 16.97*pg_5 + 0.12*mu_1 >= 0`.
    pub fn describe(&self) -> String {
        let mut s = format!("{:.4}", self.bias_physical);
        for (w, name) in self.pruned_physical().iter().zip(&self.feature_names) {
            if *w == 0.0 {
                continue;
            }
            let op = if *w < 0.0 { '-' } else { '+' };
            s.push_str(&format!(" {op} {:.4}*{name}", w.abs()));
        }
        s.push_str(" >= 0");
        s
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sign(0)` is feasible.
pub fn sign(v: f64) -> Label {
    if v >= 0.0 {
        Label::Feasible
    } else {
        Label::Infeasible
    }
}

pub fn unscale_hyperplane(h: &Hyperplane, s: &Standardizer) -> Result<Hyperplane, SvmError> {
    if h.weights_scaled.len() != s.dim() {
        return Err(SvmError::DimensionMismatch(format!(
            "{} weights vs {} standardized features",
            h.weights_scaled.len(),
            s.dim()
        )));
    }
    let mut w = vec![0.0; s.dim()];
    let mut b = h.bias_scaled;
    for j in 0..s.dim() {
        if s.std[j] > 0.0 {
            w[j] = h.weights_scaled[j] / s.std[j];
            b -= h.weights_scaled[j] * s.mean[j] / s.std[j];
        }
    }
    Ok(Hyperplane {
        feature_names: h.feature_names.clone(),
        weights_scaled: h.weights_scaled.clone(),
        bias_scaled: h.bias_scaled,
        weights_physical: w,
        bias_physical: b,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_pos: usize,
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut m = Self::default();
        for (actual, predicted) in pairs {
            match (actual, predicted) {
                (Label::Infeasible, Label::Infeasible) => m.true_neg += 1,
                (Label::Infeasible, Label::Feasible) => m.false_pos += 1,
                (Label::Feasible, Label::Infeasible) => m.false_neg += 1,
                (Label::Feasible, Label::Feasible) => m.true_pos += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.true_neg + self.false_pos + self.false_neg + self.true_pos
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.true_neg + self.true_pos, self.total())
    }

    /// Share of actual infeasible points predicted feasible.
    pub fn false_positive_rate(&self) -> f64 {
        ratio(self.false_pos, self.true_neg + self.false_pos)
    }

    pub fn false_negative_rate(&self) -> f64 {
        ratio(self.false_neg, self.true_pos + self.false_neg)
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.true_neg += other.true_neg;
        self.false_pos += other.false_pos;
        self.false_neg += other.false_neg;
        self.true_pos += other.true_pos;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Physical-unit confusion counts of `h` over `(features, label)` pairs.
pub fn evaluate<'a, I>(h: &Hyperplane, data: I) -> ConfusionMatrix
where
    I: IntoIterator<Item = (&'a [f64], Label)>,
{
    ConfusionMatrix::from_pairs(data.into_iter().map(|(x, y)| (y, h.predict(x))))
}

/// Smallest `y (w . phi + b) / ||w||` over correctly classified samples;
/// samples violating by more than `tol` are ignored. Zero when nothing
/// qualifies or `w = 0`.
pub fn compute_margin<'a, I>(h: &Hyperplane, data: I, tol: f64) -> f64
where
    I: IntoIterator<Item = (&'a [f64], Label)>,
{
    let norm = dot(&h.weights_physical, &h.weights_physical).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (x, y) in data {
        let v = y.sign() * h.decision(x);
        if v >= -tol {
            best = best.min(v.max(0.0));
        }
    }
    if best.is_finite() {
        best / norm
    } else {
        0.0
    }
}

/// Everything produced by fitting a dataset's training split.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub model: ModelFile,
    pub report: TrainReport,
    pub train_confusion: ConfusionMatrix,
    pub test_confusion: ConfusionMatrix,
}

/// Standardize on the training split, train, unscale, and score both splits.
/// The stored margin is the geometric margin in standardized space.
pub fn train_on_dataset(d: &Dataset, cfg: &SvmConfig) -> Result<TrainedModel, SvmError> {
    let train = d.train();
    let raw: Vec<&[f64]> = train.iter().map(|s| s.features.as_slice()).collect();
    let labels: Vec<Label> = train.iter().map(|s| s.label).collect();
    let std = fit_standardizer(&raw)?;
    let scaled: Vec<Vec<f64>> = raw.iter().map(|r| std.transform(r)).collect();
    let (h, report) = train_svm(&scaled, &labels, &d.feature_names, cfg)?;
    let h = unscale_hyperplane(&h, &std)?;
    let train_confusion = evaluate(&h, train.iter().map(|s| (s.features.as_slice(), s.label)));
    let test_confusion = evaluate(&h, d.test().into_iter().map(|s| (s.features.as_slice(), s.label)));
    Ok(TrainedModel {
        model: ModelFile {
            hyperplane: h,
            standardizer: std,
            train_seed: cfg.seed,
            margin: report.margin,
        },
        report,
        train_confusion,
        test_confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_standardizer() {
        let s = fit_standardizer(&[[0.0], [2.0]]).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert_eq!(s.std, vec![1.0]);
        assert_eq!(s.transform(&[0.0]), vec![-1.0]);
        assert_eq!(s.transform(&[2.0]), vec![1.0]);
    }

    #[test]
    fn constant_feature_is_dropped() {
        let s = fit_standardizer(&[[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]).unwrap();
        assert_eq!(s.dropped, vec![0]);
        assert_eq!(s.transform(&[5.0, 2.0])[0], 0.0);
        assert!(fit_standardizer(&[[1.0]]).is_err());
    }

    #[test]
    fn one_feature_unscale() {
        let s = Standardizer { mean: vec![1.0], std: vec![2.0], dropped: vec![] };
        let h = Hyperplane::physical(vec!["x".into()], vec![1.0], 0.0);
        let p = unscale_hyperplane(&h, &s).unwrap();
        assert_eq!(p.weights_physical, vec![0.5]);
        assert_eq!(p.bias_physical, -0.5);
        let id = unscale_hyperplane(&h, &Standardizer::identity(1)).unwrap();
        assert_eq!(id.weights_physical, h.weights_scaled);
        assert_eq!(id.bias_physical, h.bias_scaled);
        assert!(unscale_hyperplane(&h, &Standardizer::identity(2)).is_err());
    }

    #[test]
    fn large_sample_confusion_counts() {
        let a = ConfusionMatrix { true_neg: 710, false_pos: 3, false_neg: 1, true_pos: 706 };
        assert_eq!(format!("{:.2}", 100.0 * a.accuracy()), "99.72");
        let b = ConfusionMatrix { true_neg: 788, false_pos: 2, false_neg: 0, true_pos: 810 };
        assert_eq!(format!("{:.2}", 100.0 * b.accuracy()), "99.88");
    }

    #[test]
    fn perfect_predictor_and_zero_decision() {
        let h = Hyperplane::physical(vec!["x".into()], vec![1.0], 0.0);
        let xs = [[-2.0], [-1.0], [0.0], [3.0]];
        let ys = [Label::Infeasible, Label::Infeasible, Label::Feasible, Label::Feasible];
        let m = evaluate(&h, xs.iter().map(|x| x.as_slice()).zip(ys));
        assert_eq!((m.false_pos, m.false_neg), (0, 0));
        assert_eq!(h.predict(&[0.0]), Label::Feasible);
    }

    #[test]
    fn margin_of_two_points() {
        let h = Hyperplane::physical(vec!["x".into()], vec![1.0], 0.0);
        let xs = [[1.0], [-1.0]];
        let data = || xs.iter().map(|x| x.as_slice()).zip([Label::Feasible, Label::Infeasible]);
        assert_eq!(compute_margin(&h, data(), 1e-9), 1.0);
        let h2 = Hyperplane::physical(vec!["x".into()], vec![2.0], 0.0);
        let xs2 = [[2.0], [-2.0]];
        let data2 = xs2.iter().map(|x| x.as_slice()).zip([Label::Feasible, Label::Infeasible]);
        assert_eq!(compute_margin(&h2, data2, 1e-9), 2.0);
    }

    #[test]
    fn pruning_and_description() {
        let h = Hyperplane::physical(
            vec!["mu_1".into(), "pg_1".into(), "pg_2".into()],
            vec![1e-5, -16.97, 0.5],
            24.34,
        );
        assert_eq!(h.pruned_physical(), vec![0.0, -16.97, 0.5]);
        assert_eq!(h.describe(), "24.3400 - 16.9700*pg_1 + 0.5000*pg_2 >= 0");
    }

    proptest! {
        #[test]
        fn transformed_columns_are_centered(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)) {
            let s = fit_standardizer(&rows).unwrap();
            for j in 0..3 {
                let mean: f64 = rows.iter().map(|r| s.transform(r)[j]).sum::<f64>() / rows.len() as f64;
                prop_assert!(mean.abs() <= 1e-12 * rows.len() as f64);
            }
        }
    }
}
