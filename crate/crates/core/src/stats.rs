//! Sample statistics with compensated summation.

use serde::Serialize;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Accumulates first and second moments plus extremes.
#[derive(Debug, Clone, Copy)]
pub struct Accumulator {
    n: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    min: f64,
    max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator {
            n: 0,
            sum: CompensatedSum::default(),
            sum_sq: CompensatedSum::default(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum.add(other.sum.value());
        self.sum_sq.add(other.sum_sq.value());
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn summary(&self) -> Summary {
        let n = self.n as f64;
        if self.n == 0 {
            return Summary {
                n: 0,
                mean: 0.0,
                se: 0.0,
                min: 0.0,
                max: 0.0,
            };
        }
        let mean = self.sum.value() / n;
        let var = if self.n > 1 {
            ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Summary {
            n: self.n,
            mean,
            se: (var / n).sqrt(),
            min: self.min,
            max: self.max,
        }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut a = Accumulator::default();
        for x in iter {
            a.push(x);
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: u64,
    pub mean: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub min: f64,
    pub max: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let s = std::iter::repeat_n(3.0, 1000).collect::<Accumulator>().summary();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.se, 0.0);
        assert_eq!((s.min, s.max), (3.0, 3.0));
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64).sin()).collect();
        let whole: Accumulator = xs.iter().copied().collect();
        let mut left: Accumulator = xs[..37].iter().copied().collect();
        left.merge(&xs[37..].iter().copied().collect());
        let (a, b) = (whole.summary(), left.summary());
        assert_eq!(a.n, b.n);
        assert!((a.mean - b.mean).abs() < 1e-15);
        assert!((a.se - b.se).abs() < 1e-12);
    }
}
