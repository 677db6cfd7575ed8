//! Small numerical helpers shared across modules.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// `ln Σ exp(v_i)` without overflow. Returns `-inf` for an empty or all
/// `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Shannon entropy in bits; zero-probability entries contribute nothing.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -sum(probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()))
}

/// Normalized Dirichlet kernel power `|Σ_n e^{j2πnx/len}|² / len²`.
///
/// Equals 1 at integer multiples of `len` and 0 at other integers; the exact
/// counterpart of `sinc²(x)` on a DFT grid of size `len`.
pub fn dirichlet_power(x: f64, len: usize) -> f64 {
    let n = len as f64;
    let den = (std::f64::consts::PI * x / n).sin();
    if den.abs() < 1e-12 {
        return 1.0;
    }
    let num = (std::f64::consts::PI * x).sin();
    (num * num) / (den * den * n * n)
}

/// `sinc²(x) = (sin πx / πx)²`, the continuous approximation of
/// [`dirichlet_power`].
pub fn sinc_power(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        return 1.0;
    }
    let t = std::f64::consts::PI * x;
    let s = t.sin() / t;
    s * s
}

/// Total-variation distance between two distributions.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
