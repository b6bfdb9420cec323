//! Histograms, L1 goodness-of-fit distances, and binomial intervals.

/// Fixed-range histogram; samples outside `[lo, hi)` land in `outside`.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins >= 1 && hi > lo);
        Histogram { lo, hi, counts: vec![0; bins], outside: 0 }
    }

    pub fn add(&mut self, x: f64) {
        let u = (x - self.lo) / (self.hi - self.lo) * self.counts.len() as f64;
        if u >= 0.0 && u < self.counts.len() as f64 {
            self.counts[u as usize] += 1;
        } else {
            self.outside += 1;
        }
    }

    /// Record a sample known to fall outside the window without knowing
    /// where.
    pub fn add_outside(&mut self) {
        self.outside += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + b as f64 * w, self.lo + (b + 1) as f64 * w)
    }

    /// L1 distance between the empirical bin fractions and exact bin masses.
    /// `exact` must hold one mass per bin; mass outside the window is
    /// compared against the empirical outside fraction, so the result lies
    /// in [0, 2].
    pub fn l1_distance(&self, exact: &[f64]) -> f64 {
        assert_eq!(exact.len(), self.counts.len());
        let n = self.total() as f64;
        let mut d = 0.0;
        for (c, q) in self.counts.iter().zip(exact) {
            d += (*c as f64 / n - q).abs();
        }
        let exact_outside = (1.0 - exact.iter().sum::<f64>()).max(0.0);
        d + (self.outside as f64 / n - exact_outside).abs()
    }
}

/// Monte Carlo noise floor for an L1 histogram distance: `c * sqrt(bins/m)`
/// with `c = 2`.
pub fn noise_floor(bins: usize, m: usize) -> f64 {
    2.0 * (bins as f64 / m as f64).sqrt()
}

/// Wilson 95% confidence interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One axis's histogram data, kept for CSV artifacts.
#[derive(Clone, Debug)]
pub struct AxisHistogram {
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
    pub empirical: Vec<u64>,
    pub outside: u64,
    pub exact: Vec<f64>,
}

impl AxisHistogram {
    pub fn from_parts(axis: usize, hist: &Histogram, exact: Vec<f64>) -> Self {
        AxisHistogram {
            axis,
            lo: hist.lo,
            hi: hist.hi,
            empirical: hist.counts.clone(),
            outside: hist.outside,
            exact,
        }
    }
}

/// Per-particle L1 distances of an ensemble against exact marginals,
/// together with the noise floor and a pass verdict per particle.
#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub distances: Vec<f64>,
    pub bins: usize,
    pub samples: usize,
    pub noise_floor: f64,
    pub failures: usize,
    /// distance <= 3 * noise_floor, per particle
    pub verdicts: Vec<bool>,
    /// histogram data per axis (may be empty for derived reports)
    pub details: Vec<AxisHistogram>,
}

impl DistanceReport {
    pub fn from_distances(distances: Vec<f64>, bins: usize, samples: usize, failures: usize) -> Self {
        let floor = noise_floor(bins, samples);
        let verdicts = distances.iter().map(|d| *d <= 3.0 * floor).collect();
        DistanceReport {
            distances,
            bins,
            samples,
            noise_floor: floor,
            failures,
            verdicts,
            details: Vec::new(),
        }
    }

    pub fn with_details(mut self, details: Vec<AxisHistogram>) -> Self {
        self.details = details;
        self
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().cloned().fold(0.0, f64::max)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| *v)
    }
}

/// Composite Simpson quadrature of `f` over `[lo, hi]` with `n` intervals
/// (`n` is rounded up to the next even number).
pub fn simpson<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> f64 {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson weights (including the step factor) for an odd-length uniform grid.
pub fn simpson_weights(len: usize, step: f64) -> Vec<f64> {
    assert!(len >= 3 && len % 2 == 1, "Simpson grid needs an odd number of points");
    let mut w = vec![0.0; len];
    for (k, item) in w.iter_mut().enumerate() {
        *item = if k == 0 || k == len - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        } * step
            / 3.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn histogram_counts_and_outside() {
        let mut h = Histogram::new(0.0, 1.0, 4);
        for x in [0.1, 0.3, 0.7, 1.5, -0.2] {
            h.add(x);
        }
        assert_eq!(h.counts, vec![1, 1, 1, 0]);
        assert_eq!(h.outside, 2);
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn l1_distance_of_exact_match_is_zero() {
        let mut h = Histogram::new(0.0, 1.0, 2);
        h.add(0.25);
        h.add(0.75);
        assert_abs_diff_eq!(h.l1_distance(&[0.5, 0.5]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn l1_distance_is_at_most_two() {
        let mut h = Histogram::new(0.0, 1.0, 2);
        for _ in 0..10 {
            h.add(5.0); // everything outside
        }
        let d = h.l1_distance(&[0.5, 0.5]);
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn wilson_interval_brackets_the_point_estimate() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(lo > 0.39 && hi < 0.61);
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!(hi < 0.05);
    }

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        // Simpson is exact through cubics.
        let v = simpson(0.0, 2.0, 8, |x| x * x * x - x);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        let w = simpson_weights(9, 0.25);
        let grid: f64 = (0..9).map(|k| {
            let x = k as f64 * 0.25;
            w[k] * (x * x * x - x)
        }).sum();
        assert_abs_diff_eq!(grid, v, epsilon = 1e-12);
    }
}
