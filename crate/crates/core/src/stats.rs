//! Small statistics helpers shared by the Monte Carlo oracles and the metrics code.

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n − 1 denominator); zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_err: if self.n == 0 { f64::INFINITY } else { (self.variance() / self.n as f64).sqrt() },
            samples: self.n as usize,
        }
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::default();
        for x in iter {
            r.push(x);
        }
        r
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `(value − mean) / std_err`.
    ///
    /// The standard error is floored at the rounding error of summing `samples` terms, so
    /// a zero-variance estimate (every sample identical) is compared up to round-off of
    /// quantities of order one.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = value - self.mean;
        let floor = f64::EPSILON * (self.samples.max(1) as f64).sqrt() * self.mean.abs().max(value.abs()).max(1.0);
        let se = self.std_err.max(floor);
        if d == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY * d.signum()
        } else {
            d / se
        }
    }

    /// True when `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        self.z_score(value).abs() <= k
    }
}
