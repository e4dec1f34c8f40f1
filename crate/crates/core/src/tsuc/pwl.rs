use crate::grid::Generator;

/// Secant piecewise-linear over-approximation of a generator's quadratic cost
/// on `[p_min, p_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlCost {
    /// `segments + 1` equally spaced points from `p_min` to `p_max`.
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Cost at `p_min`, including `c0`.
    pub base_cost: f64,
}

impl PwlCost {
    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    /// Interpolated cost at `p`, clamped to the breakpoint range.
    pub fn eval(&self, p: f64) -> f64 {
        let mut cost = self.base_cost;
        for k in 0..self.segments() {
            let lo = self.breakpoints[k];
            let step = (p - lo).clamp(0.0, self.width(k));
            cost += self.slopes[k] * step;
        }
        cost
    }
}

pub fn pwl_cost(gen: &Generator, segments: usize) -> PwlCost {
    assert!(segments >= 1, "at least one segment");
    let width = (gen.p_max - gen.p_min) / segments as f64;
    let breakpoints: Vec<f64> = (0..=segments)
        .map(|k| {
            if k == segments {
                gen.p_max
            } else {
                gen.p_min + width * k as f64
            }
        })
        .collect();
    let slopes = breakpoints
        .windows(2)
        .map(|w| {
            if w[1] > w[0] {
                (gen.cost(w[1]) - gen.cost(w[0])) / (w[1] - w[0])
            } else {
                // degenerate range: marginal cost at the single point
                gen.c1 + 2.0 * gen.c2 * w[0]
            }
        })
        .collect();
    PwlCost {
        breakpoints,
        slopes,
        base_cost: gen.cost(gen.p_min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(c0: f64, c1: f64, c2: f64, lo: f64, hi: f64) -> Generator {
        Generator {
            bus: 0,
            p_min: lo,
            p_max: hi,
            ramp_up: 1.0,
            ramp_down: 1.0,
            min_up: 1,
            min_down: 1,
            startup_cost: 0.0,
            shutdown_cost: 0.0,
            c0,
            c1,
            c2,
        }
    }

    #[test]
    fn square_on_zero_two() {
        let pwl = pwl_cost(&quad(0.0, 0.0, 1.0, 0.0, 2.0), 2);
        assert_eq!(pwl.breakpoints, vec![0.0, 1.0, 2.0]);
        assert_eq!(pwl.slopes, vec![1.0, 3.0]);
        assert_eq!(pwl.eval(1.0), 1.0);
        assert_eq!(pwl.eval(2.0), 4.0);
    }

    #[test]
    fn fixed_output_unit() {
        let pwl = pwl_cost(&quad(5.0, 2.0, 0.1, 10.0, 10.0), 4);
        assert_eq!(pwl.eval(10.0), 5.0 + 20.0 + 10.0);
        assert!(pwl.slopes.iter().all(|s| (s - 4.0).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn over_approximates_and_is_exact_at_breakpoints(
            c0 in 0.0f64..500.0, c1 in 0.0f64..50.0, c2 in 0.0f64..0.1,
            lo in 0.0f64..100.0, span in 1.0f64..300.0, k in 1usize..16, t in 0.0f64..1.0,
        ) {
            let g = quad(c0, c1, c2, lo, lo + span);
            let pwl = pwl_cost(&g, k);
            let p = lo + t * span;
            prop_assert!(pwl.eval(p) >= g.cost(p) - 1e-9 * (1.0 + g.cost(p)));
            for &b in &pwl.breakpoints {
                prop_assert!((pwl.eval(b) - g.cost(b)).abs() <= 1e-9 * (1.0 + g.cost(b)));
            }
            // convex: slopes nondecreasing
            for w in pwl.slopes.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }
}
