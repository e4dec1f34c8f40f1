use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{compute_margin, dot, Hyperplane, SvmConfig, SvmError};
use crate::dcopf::Label;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub alpha: Vec<f64>,
    pub support_vectors: Vec<usize>,
    pub dual_objective: f64,
    /// Dual objective after each pass.
    pub dual_trace: Vec<f64>,
    pub passes: usize,
    pub converged: bool,
    /// Geometric margin on the training rows.
    pub margin: f64,
}

/// Soft-margin linear SVM with per-class penalties, solved by dual
/// coordinate descent. The bias is learned as the weight of a constant
/// feature equal to 1, so it is regularized along with `w`.
///
/// Returns a hyperplane whose physical fields equal the scaled ones; use
/// [`super::unscale_hyperplane`] to map it back to raw features.
pub fn train_svm<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[Label],
    feature_names: &[String],
    cfg: &SvmConfig,
) -> Result<(Hyperplane, TrainReport), SvmError> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(SvmError::DimensionMismatch(format!(
            "{} rows vs {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if !(labels.contains(&Label::Feasible) && labels.contains(&Label::Infeasible)) {
        return Err(SvmError::SingleClassData);
    }
    let d = feature_names.len();
    if let Some(r) = rows.iter().find(|r| r.as_ref().len() != d) {
        return Err(SvmError::DimensionMismatch(format!(
            "row of length {} vs {d} feature names",
            r.as_ref().len()
        )));
    }
    let n = rows.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let upper: Vec<f64> = labels.iter().map(|&l| cfg.penalty(l)).collect();
    // diagonal of Q for the augmented rows [x, 1]
    let qii: Vec<f64> = rows.iter().map(|r| dot(r.as_ref(), r.as_ref()) + 1.0).collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut passes = 0;
    while passes < cfg.max_passes {
        passes += 1;
        order.shuffle(&mut rng);
        // the range always includes 0, so a small range bounds every |PG|
        let mut pg_max: f64 = 0.0;
        let mut pg_min: f64 = 0.0;
        for &i in &order {
            let x = rows[i].as_ref();
            let g = y[i] * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == upper[i] {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, upper[i]);
                let step = (alpha[i] - old) * y[i];
                if step != 0.0 {
                    for (wj, xj) in w.iter_mut().zip(x) {
                        *wj += step * xj;
                    }
                    b += step;
                }
            }
        }
        trace.push(dual_value(&alpha, &w, b));
        if pg_max - pg_min <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("dual coordinate descent stopped after {passes} passes without converging");
    }
    let h = Hyperplane::physical(feature_names.to_vec(), w, b);
    let margin = compute_margin(
        &h,
        rows.iter().map(|r| r.as_ref()).zip(labels.iter().copied()),
        cfg.margin_tolerance,
    );
    let support_vectors = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    Ok((
        h,
        TrainReport {
            dual_objective: *trace.last().expect("at least one pass"),
            alpha,
            support_vectors,
            dual_trace: trace,
            passes,
            converged,
            margin,
        },
    ))
}

/// `sum(alpha) - |[w, b]|^2 / 2`, the maximization form of the dual.
fn dual_value(alpha: &[f64], w: &[f64], b: f64) -> f64 {
    alpha.iter().sum::<f64>() - 0.5 * (dot(w, w) + b * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn symmetric_two_points() {
        let cfg = SvmConfig {
            c_positive: 1e6,
            c_negative: 1e6,
            tolerance: 1e-10,
            ..Default::default()
        };
        let (h, r) = train_svm(&[[1.0], [-1.0]], &[Label::Feasible, Label::Infeasible], &names(1), &cfg).unwrap();
        assert!((h.weights_scaled[0] - 1.0).abs() <= 1e-6);
        assert!(h.bias_scaled.abs() <= 1e-6);
        assert!((r.margin - 1.0).abs() <= 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn single_class_is_rejected() {
        let e = train_svm(&[[1.0], [2.0]], &[Label::Feasible; 2], &names(1), &SvmConfig::default());
        assert_eq!(e.unwrap_err(), SvmError::SingleClassData);
    }

    #[test]
    fn separable_toy_sets_have_no_training_errors() {
        // points on either side of x0 + 2 x1 = 0.5 with a gap
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..15 {
            for j in 0..15 {
                let p = [i as f64 / 7.0 - 1.0, j as f64 / 7.0 - 1.0];
                let v = p[0] + 2.0 * p[1] - 0.5;
                if v.abs() < 0.3 {
                    continue;
                }
                rows.push(p);
                labels.push(if v > 0.0 { Label::Feasible } else { Label::Infeasible });
            }
        }
        let cfg = SvmConfig { c_positive: 100.0, c_negative: 100.0, tolerance: 1e-6, ..Default::default() };
        let (h, _) = train_svm(&rows, &labels, &names(2), &cfg).unwrap();
        for (r, l) in rows.iter().zip(&labels) {
            assert_eq!(h.predict(r), *l);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn dual_is_monotone_and_box_feasible(
            pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, any::<bool>()), 6..60),
            cneg in 1.0f64..20.0,
            seed in 0u64..1000,
        ) {
            let rows: Vec<[f64; 2]> = pts.iter().map(|p| [p.0, p.1]).collect();
            let mut labels: Vec<Label> = pts.iter().map(|p| if p.2 { Label::Feasible } else { Label::Infeasible }).collect();
            labels[0] = Label::Feasible;
            labels[1] = Label::Infeasible;
            let cfg = SvmConfig { c_positive: 1.0, c_negative: cneg, tolerance: 1e-4, seed, ..Default::default() };
            let (h, r) = train_svm(&rows, &labels, &names(2), &cfg).unwrap();
            for w in r.dual_trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()));
            }
            for (a, l) in r.alpha.iter().zip(&labels) {
                prop_assert!(*a >= 0.0 && *a <= cfg.penalty(*l));
            }
            prop_assert!(r.margin >= 0.0);
            if r.converged {
                for (i, (a, l)) in r.alpha.iter().zip(&labels).enumerate() {
                    if *a > 0.0 && *a < cfg.penalty(*l) {
                        let f = l.sign() * h.decision(&rows[i]);
                        prop_assert!((f - 1.0).abs() <= 10.0 * cfg.tolerance, "free sample {i}: {f}");
                    }
                }
            }
        }
    }
}
