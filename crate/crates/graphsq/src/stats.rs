//! Replication statistics: running moments and covariance estimates.
//!
//! Aggregation is by plain sums and sums of squares pushed in replication
//! order, so a streaming pass and a batch pass over the same values produce
//! bit-identical results.

/// Streaming mean/variance accumulator over sums and sums of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance; 0 until two samples are seen.
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.sample_variance() / self.count as f64).sqrt()
    }
}

/// Batch counterpart of pushing each value in slice order.
pub fn batch_moments(xs: &[f64]) -> RunningMoments {
    let mut m = RunningMoments::new();
    for &x in xs {
        m.push(x);
    }
    m
}

/// Sample covariance of paired observations with a standard error for the
/// estimate (standard deviation of the centered products over sqrt(n)).
pub fn covariance_with_stderr(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut prods = RunningMoments::new();
    for (&x, &y) in xs.iter().zip(ys) {
        prods.push((x - mx) * (y - my));
    }
    let cov = prods.mean() * n / (n - 1.0);
    (cov, prods.stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streaming_equals_batch_bit_for_bit() {
        let xs: Vec<f64> = (0..1000).map(|k| ((k * 37 % 101) as f64).sin()).collect();
        let mut stream = RunningMoments::new();
        for &x in &xs {
            stream.push(x);
        }
        let batch = batch_moments(&xs);
        assert_eq!(stream, batch);
        assert_eq!(stream.mean().to_bits(), batch.mean().to_bits());
        assert_eq!(stream.stderr().to_bits(), batch.stderr().to_bits());
    }

    #[test]
    fn moments_of_known_values() {
        let m = batch_moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean(), 2.5);
        assert!((m.sample_variance() - 5.0 / 3.0).abs() < 1e-12);
        assert!((m.stderr() - (5.0 / 12.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stderr_scales_inverse_sqrt() {
        // stderr over R iid values shrinks like 1/sqrt(R)
        let noise = |k: u64| (((k.wrapping_mul(2654435761)) % 1000) as f64) / 1000.0;
        let small: Vec<f64> = (0..100).map(noise).collect();
        let large: Vec<f64> = (0..10_000).map(noise).collect();
        let ratio = batch_moments(&small).stderr() / batch_moments(&large).stderr();
        assert!((ratio - 10.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn covariance_of_identical_series_is_variance() {
        let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let (cov, se) = covariance_with_stderr(&xs, &xs);
        assert!((cov - 2.5).abs() < 1e-12);
        assert!(se > 0.0);
    }

    #[test]
    fn covariance_sign() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let ys = vec![4.0, 3.0, 2.0, 1.0];
        let (cov, _) = covariance_with_stderr(&xs, &ys);
        assert!(cov < 0.0);
    }
}
