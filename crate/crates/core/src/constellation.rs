//! Discrete alphabets with an input probability distribution.
//!
//! A [`ShapedConstellation`] always satisfies unit average power under its
//! own probabilities: constructors renormalize the distribution onto the
//! simplex and rescale the points accordingly.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::filtering::Filter;
use crate::numeric::{self, KahanSum};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Psk,
    Qam,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Psk => f.write_str("PSK"),
            Family::Qam => f.write_str("QAM"),
        }
    }
}

/// Probability-weighted statistics of the filtered spectrum `χ = x·g` and of
/// the filter gain `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiStats {
    pub mean_chi: f64,
    pub mean_chi_sq: f64,
    pub var_chi: f64,
    pub mean_gain_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapedConstellation {
    family: Family,
    order: usize,
    points: Vec<Complex64>,
    probs: Vec<f64>,
}

const MODULUS_FLOOR: f64 = 1e-12;

impl ShapedConstellation {
    /// Builds a constellation from raw points and (possibly unnormalized)
    /// nonnegative weights. Weights are projected onto the simplex and the
    /// points rescaled to unit average power under them.
    pub fn new(family: Family, points: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConstellation("empty alphabet".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidConstellation(format!(
                "{} points but {} probabilities",
                points.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidConstellation(format!(
                "probability {w} is negative or non-finite"
            )));
        }
        let total = numeric::sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidConstellation(
                "probabilities sum to zero".into(),
            ));
        }
        for (i, x) in points.iter().enumerate() {
            if !x.re.is_finite() || !x.im.is_finite() || x.norm() < MODULUS_FLOOR {
                return Err(Error::InvalidConstellation(format!(
                    "point {i} has zero or non-finite modulus"
                )));
            }
            if points[..i].iter().any(|y| (x - y).norm() < 1e-12) {
                return Err(Error::InvalidConstellation(format!(
                    "point {i} is duplicated"
                )));
            }
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let power = numeric::sum(probs.iter().zip(&points).map(|(p, x)| p * x.norm_sqr()));
        let scale = power.sqrt().recip();
        let points = points.into_iter().map(|x| x * scale).collect();
        let order = probs.len();
        Ok(Self {
            family,
            order,
            points,
            probs,
        })
    }

    /// Uniformly distributed square QAM or PSK alphabet with unit power.
    pub fn uniform(family: Family, order: usize) -> Result<Self> {
        let points = match family {
            Family::Psk => psk_points(order)?,
            Family::Qam => qam_points(order)?,
        };
        let probs = vec![1.0; order];
        Self::new(family, points, probs)
    }

    /// Same alphabet geometry with a new input distribution (renormalized).
    pub fn with_probs(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.family, self.points.clone(), weights)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E{|x|^exponent}` under the input distribution.
    pub fn moment_abs_pow(&self, exponent: f64) -> f64 {
        self.expect(|x| x.norm().powf(exponent))
    }

    /// `Σ_i p_i φ(x_i)` with compensated accumulation.
    pub fn expect(&self, phi: impl Fn(Complex64) -> f64) -> f64 {
        numeric::sum(
            self.probs
                .iter()
                .zip(&self.points)
                .map(|(p, &x)| p * phi(x)),
        )
    }

    /// Shannon entropy of the input distribution in bits.
    pub fn entropy_bits(&self) -> f64 {
        numeric::entropy_bits(&self.probs)
    }

    /// `true` when every point has the same modulus.
    pub fn is_constant_modulus(&self) -> bool {
        let a0 = self.points[0].norm_sqr();
        self.points
            .iter()
            .all(|x| (x.norm_sqr() - a0).abs() < 1e-12)
    }

    /// Statistics of `χ` and `|g|²` for a filter applied to i.i.d. symbols.
    pub fn chi_stats(&self, filter: &Filter) -> Result<ChiStats> {
        filter.validate()?;
        let mut mean = KahanSum::new();
        let mut mean_sq = KahanSum::new();
        let mut gain_sq = KahanSum::new();
        for (&p, x) in self.probs.iter().zip(&self.points) {
            let a = x.norm_sqr();
            let chi = filter.chi(a);
            mean.add(p * chi);
            mean_sq.add(p * chi * chi);
            gain_sq.add(p * filter.gain_sq(a));
        }
        let mean_chi = mean.value();
        let var_chi = numeric::sum(
            self.probs
                .iter()
                .zip(&self.points)
                .map(|(&p, x)| p * (filter.chi(x.norm_sqr()) - mean_chi).powi(2)),
        );
        Ok(ChiStats {
            mean_chi,
            mean_chi_sq: mean_sq.value(),
            var_chi,
            mean_gain_sq: gain_sq.value(),
        })
    }

    /// `count` i.i.d. symbols by inverse-CDF sampling over the fixed point
    /// order.
    pub fn sample_symbols(&self, count: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rng_from_seed(seed);
        self.sample_with(&mut rng, count)
    }

    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Complex64> {
        let sampler = self.sampler();
        (0..count).map(|_| self.points[sampler.draw(rng)]).collect()
    }

    pub(crate) fn sampler(&self) -> InverseCdf {
        InverseCdf::new(&self.probs)
    }
}

/// Inverse-CDF index sampler.
#[derive(Debug, Clone)]
pub(crate) struct InverseCdf {
    cdf: Vec<f64>,
    last: usize,
}

impl InverseCdf {
    fn new(probs: &[f64]) -> Self {
        let mut acc = KahanSum::new();
        let cdf = probs
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect();
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.last)
    }
}

fn psk_points(order: usize) -> Result<Vec<Complex64>> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::UnsupportedOrder {
            family: "PSK",
            order,
        });
    }
    let m = order as f64;
    Ok((0..order)
        .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / m))
        .collect())
}

fn qam_points(order: usize) -> Result<Vec<Complex64>> {
    let side = (order as f64).sqrt().round() as usize;
    if order < 4 || !order.is_power_of_two() || side * side != order {
        return Err(Error::UnsupportedOrder {
            family: "QAM",
            order,
        });
    }
    let levels: Vec<f64> = (0..side)
        .map(|i| (2 * i) as f64 - (side - 1) as f64)
        .collect();
    Ok(levels
        .iter()
        .flat_map(|&re| levels.iter().map(move |&im| Complex64::new(re, im)))
        .collect())
}

/// On-disk description of a shaped alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub family: Family,
    pub order: usize,
    pub probs: Vec<f64>,
    pub snr_in: Option<f64>,
    pub filter: Option<String>,
    pub c0: Option<f64>,
    pub provenance: String,
}

#[derive(Serialize)]
struct CodebookOut<'a> {
    family: Family,
    order: usize,
    probs: Vec<Box<RawValue>>,
    snr_in: Option<f64>,
    filter: &'a Option<String>,
    c0: Option<f64>,
    provenance: &'a str,
}

impl Codebook {
    pub fn from_constellation(c: &ShapedConstellation, provenance: impl Into<String>) -> Self {
        Self {
            family: c.family(),
            order: c.order(),
            probs: c.probs().to_vec(),
            snr_in: None,
            filter: None,
            c0: None,
            provenance: provenance.into(),
        }
    }

    /// Pretty JSON with every probability written to 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        let probs = self
            .probs
            .iter()
            .map(|p| RawValue::from_string(format!("{p:.16e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let out = CodebookOut {
            family: self.family,
            order: self.order,
            probs,
            snr_in: self.snr_in,
            filter: &self.filter,
            c0: self.c0,
            provenance: &self.provenance,
        };
        Ok(serde_json::to_string_pretty(&out)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the constellation this codebook describes.
    pub fn constellation(&self) -> Result<ShapedConstellation> {
        let base = ShapedConstellation::uniform(self.family, self.order)?;
        if self.probs.len() != self.order {
            return Err(Error::InvalidConstellation(format!(
                "codebook lists {} probabilities for order {}",
                self.probs.len(),
                self.order
            )));
        }
        base.with_probs(self.probs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtering::FilterKind;
    use proptest::prelude::*;

    // Moments of the unnormalized odd-integer grid, scaled to unit power.
    fn grid_moment(order: usize, exponent: i32) -> f64 {
        let side = (order as f64).sqrt() as i32;
        let levels: Vec<f64> = (0..side).map(|i| (2 * i - side + 1) as f64).collect();
        let mut vals = vec![];
        for &a in &levels {
            for &b in &levels {
                vals.push(a * a + b * b);
            }
        }
        let power = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v / power).powi(exponent)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn qpsk_points_and_probs() {
        let c = ShapedConstellation::uniform(Family::Psk, 4).unwrap();
        let expected = [1.0, 3.0, 5.0, 7.0].map(|k| Complex64::from_polar(1.0, k * PI / 4.0));
        for (x, e) in c.points().iter().zip(expected) {
            assert!((x - e).norm() < 1e-15);
        }
        assert!(c.probs().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn qam_moments_match_grid_enumeration() {
        let q64 = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        assert!((q64.moment_abs_pow(4.0) - grid_moment(64, 2)).abs() < 1e-12);
        assert!((q64.moment_abs_pow(-2.0) - grid_moment(64, -1)).abs() < 1e-12);
        assert!((q64.moment_abs_pow(4.0) - 1.380952).abs() < 1e-6);
        assert!((q64.moment_abs_pow(-2.0) - 2.685417).abs() < 1e-6);
        let q16 = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
        assert!((q16.moment_abs_pow(-2.0) - 1.888889).abs() < 1e-6);
        assert!((q16.moment_abs_pow(4.0) - 1.32).abs() < 1e-12);
    }

    #[test]
    fn psk_fourth_moment_is_one() {
        for order in [2, 4, 8, 16] {
            let c = ShapedConstellation::uniform(Family::Psk, order).unwrap();
            assert!((c.moment_abs_pow(4.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_qam_keeps_unit_power() {
        let c = ShapedConstellation::uniform(Family::Qam, 1024).unwrap();
        assert!((c.moment_abs_pow(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_orders() {
        for order in [8, 32, 128, 12] {
            assert!(matches!(
                ShapedConstellation::uniform(Family::Qam, order),
                Err(Error::UnsupportedOrder { .. })
            ));
        }
        assert!(ShapedConstellation::uniform(Family::Psk, 1).is_err());
        assert!(ShapedConstellation::uniform(Family::Psk, 6).is_err());
    }

    #[test]
    fn rejects_zero_and_duplicate_points() {
        let zero = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(ShapedConstellation::new(Family::Qam, zero, vec![1.0, 1.0]).is_err());
        let dup = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(ShapedConstellation::new(Family::Qam, dup, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn chi_stats_examples() {
        let psk = ShapedConstellation::uniform(Family::Psk, 8).unwrap();
        let s = psk.chi_stats(&Filter::matched(1.0)).unwrap();
        assert!((s.mean_chi - 1.0).abs() < 1e-15);
        assert!((s.mean_chi_sq - 1.0).abs() < 1e-15);
        assert!(s.var_chi.abs() < 1e-15);
        assert!((s.mean_gain_sq - 1.0).abs() < 1e-15);

        let q = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        let s = q.chi_stats(&Filter::reciprocal()).unwrap();
        assert_eq!(s.mean_chi, 1.0);
        assert_eq!(s.var_chi, 0.0);
        assert!((s.mean_gain_sq - q.moment_abs_pow(-2.0)).abs() < 1e-12);

        let single =
            ShapedConstellation::new(Family::Psk, vec![Complex64::new(1.0, 0.0)], vec![1.0])
                .unwrap();
        let s = single.chi_stats(&Filter::wiener(1.0)).unwrap();
        assert!((s.mean_chi - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wiener_with_nonpositive_snr_is_rejected() {
        let q = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
        let bad = Filter {
            kind: FilterKind::Wf,
            snr_in: 0.0,
        };
        assert!(matches!(
            q.chi_stats(&bad),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn wiener_limits() {
        let q = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        let rf = q.chi_stats(&Filter::reciprocal()).unwrap();
        let wf = q.chi_stats(&Filter::wiener(1e6)).unwrap();
        assert!((wf.mean_chi - rf.mean_chi).abs() / rf.mean_chi < 1e-3);
        assert!((wf.mean_gain_sq - rf.mean_gain_sq).abs() / rf.mean_gain_sq < 1e-3);
        let snr = 1e-6;
        let wf = q.chi_stats(&Filter::wiener(snr)).unwrap();
        assert!((wf.mean_gain_sq / (snr * snr) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn degenerate_distribution_samples_first_point() {
        let q = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
        let mut w = vec![0.0; 16];
        w[0] = 1.0;
        let c = q.with_probs(w).unwrap();
        let s = c.sample_symbols(1000, 3);
        assert!(s.iter().all(|&x| x == c.points()[0]));
    }

    #[test]
    fn qpsk_sampling_frequencies() {
        let c = ShapedConstellation::uniform(Family::Psk, 4).unwrap();
        let n = 1_000_000;
        let s = c.sample_symbols(n, 11);
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        for x in c.points() {
            let f = s.iter().filter(|&&y| y == *x).count() as f64 / n as f64;
            assert!((f - 0.25).abs() < 3.0 * sigma, "frequency {f}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        assert_eq!(c.sample_symbols(500, 9), c.sample_symbols(500, 9));
        assert_ne!(c.sample_symbols(500, 9), c.sample_symbols(500, 10));
    }

    #[test]
    fn empirical_moment_converges() {
        let c = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        let n = 1_000_000;
        let s = c.sample_symbols(n, 5);
        let m4 = s.iter().map(|x| x.norm_sqr().powi(2)).sum::<f64>() / n as f64;
        let var4 = c.moment_abs_pow(8.0) - c.moment_abs_pow(4.0).powi(2);
        assert!((m4 - c.moment_abs_pow(4.0)).abs() < 3.0 * (var4 / n as f64).sqrt());
    }

    #[test]
    fn codebook_round_trip_and_digits() {
        let q = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
        let w: Vec<f64> = (1..=16).map(|i| i as f64).collect();
        let c = q.with_probs(w).unwrap();
        let mut cb = Codebook::from_constellation(&c, "test");
        cb.c0 = Some(1.5);
        cb.filter = Some("WF".into());
        let text = cb.to_json().unwrap();
        assert!(text.contains("\"family\": \"QAM\""));
        let first = text.split("\"probs\": [").nth(1).unwrap().trim_start();
        let digits: String = first
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|ch| ch.is_ascii_digit())
            .collect();
        assert_eq!(digits.len(), 17);
        let back = Codebook::from_json(&text).unwrap();
        assert_eq!(back, cb);
        let rebuilt = back.constellation().unwrap();
        for (a, b) in rebuilt.probs().iter().zip(c.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn constructor_invariants(weights in proptest::collection::vec(0.0f64..10.0, 16)
            .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)) {
            let q = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
            let c = q.with_probs(weights).unwrap();
            prop_assert!((c.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((c.moment_abs_pow(2.0) - 1.0).abs() < 1e-12);
            for f in [Filter::matched(2.0), Filter::reciprocal(), Filter::wiener(2.0)] {
                let s = c.chi_stats(&f).unwrap();
                prop_assert!(s.var_chi >= 0.0);
                prop_assert!(s.mean_chi <= 1.0 + 1e-12);
                prop_assert!((s.var_chi - (s.mean_chi_sq - s.mean_chi.powi(2))).abs() < 1e-12);
            }
        }
    }
}
