//! Small numeric helpers.

/// Kahan compensated summation, so aggregate metrics are stable under
/// permutation of their inputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated mean over an iterator; `None` when empty.
pub fn kahan_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    for v in values {
        sum.add(v);
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some(sum.value() / count as f64)
    }
}
