//! Small statistical helpers for Monte Carlo reporting and acceptance tests.

use statrs::distribution::{Binomial, DiscreteCDF};

/// Two-sided normal quantile for 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo mean with a 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> McEstimate {
        McEstimate {
            mean: value,
            half_width: 0.0,
            samples: 0,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Streaming mean/variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct Running {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn estimate(&self) -> McEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            half_width: if self.count > 0 {
                Z95 * (var / self.count as f64).sqrt()
            } else {
                f64::INFINITY
            },
            samples: self.count,
        }
    }
}

pub fn mean_ci(values: impl IntoIterator<Item = f64>) -> McEstimate {
    let mut r = Running::default();
    values.into_iter().for_each(|v| r.push(v));
    r.estimate()
}

/// 95% Wilson score interval for `hits / trials`.
pub fn wilson(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let spread = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - spread).max(0.0), (centre + spread).min(1.0))
}

/// `Pr[X >= k]` for `X ~ Bin(trials, p)`.
pub fn binomial_upper_tail(k: u64, trials: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > trials {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(p, trials).expect("valid binomial");
    dist.sf(k - 1)
}

/// Two-sided Hoeffding bound on `Pr[|mean - p| > delta]` after `trials`
/// Bernoulli draws.
pub fn hoeffding(delta: f64, trials: u64) -> f64 {
    (2.0 * (-2.0 * trials as f64 * delta * delta).exp()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_matches_direct() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let e = mean_ci(xs);
        assert!((e.mean - 3.5).abs() < 1e-12);
        let var: f64 = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert!((e.half_width - Z95 * (var / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tails() {
        assert_eq!(binomial_upper_tail(0, 10, 0.3), 1.0);
        assert!((binomial_upper_tail(10, 10, 0.5) - 0.5f64.powi(10)).abs() < 1e-15);
        assert!((binomial_upper_tail(1, 10, 0.5) - (1.0 - 0.5f64.powi(10))).abs() < 1e-12);
        let (lo, hi) = wilson(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(hoeffding(0.05, 13288) < 1e-20);
    }
}
