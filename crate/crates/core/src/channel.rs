//! Discrete OFDM sensing model: `Y_s = H ⊙ X + Z`.
//!
//! Delay and Doppler are parameterized in bin units (`k̃ = NΔf·τ`,
//! `p̃ = M·T_sym·f_c·ν`). Fractional bins are allowed; the steering phases
//! then produce the Dirichlet-shaped leakage of an off-grid target.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::ShapedConstellation;
use crate::rng::{complex_gaussian, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameDims {
    /// Subcarriers `N` (fast time).
    pub n: usize,
    /// OFDM symbols `M` (slow time).
    pub m: usize,
}

impl FrameDims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let dims = Self { n, m };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 1 {
            return Err(Error::param(
                "dims",
                format!("need N >= 2 and M >= 1, got {}x{}", self.n, self.m),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `NM` as a float, the coherent integration gain.
    pub fn nm(&self) -> f64 {
        (self.n * self.m) as f64
    }
}

/// Complex gain of a point target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetGain {
    /// Rayleigh target: `α ~ CN(0, var)`.
    Random { var: f64 },
    /// Fixed complex amplitude.
    Fixed(Complex64),
}

impl TargetGain {
    /// `σ²_α` for random targets, `|α|²` for fixed ones.
    pub fn power(&self) -> f64 {
        match *self {
            TargetGain::Random { var } => var,
            TargetGain::Fixed(a) => a.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetSpec", into = "TargetSpec")]
pub struct Target {
    pub gain: TargetGain,
    pub delay_bin: f64,
    pub doppler_bin: f64,
}

impl Target {
    pub fn random(gain_var: f64, delay_bin: f64, doppler_bin: f64) -> Self {
        Self {
            gain: TargetGain::Random { var: gain_var },
            delay_bin,
            doppler_bin,
        }
    }

    pub fn fixed(gain: Complex64, delay_bin: f64, doppler_bin: f64) -> Self {
        Self {
            gain: TargetGain::Fixed(gain),
            delay_bin,
            doppler_bin,
        }
    }

    pub fn validate(&self, dims: FrameDims) -> Result<()> {
        let power = self.gain.power();
        if !power.is_finite() || power < 0.0 {
            return Err(Error::InvalidScene(format!(
                "target power {power} is invalid"
            )));
        }
        if !(0.0..dims.n as f64).contains(&self.delay_bin) {
            return Err(Error::InvalidScene(format!(
                "delay bin {} outside [0, {})",
                self.delay_bin, dims.n
            )));
        }
        if !(0.0..dims.m as f64).contains(&self.doppler_bin) {
            return Err(Error::InvalidScene(format!(
                "doppler bin {} outside [0, {})",
                self.doppler_bin, dims.m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_var: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_im: Option<f64>,
    delay_bin: f64,
    doppler_bin: f64,
}

impl TryFrom<TargetSpec> for Target {
    type Error = String;

    fn try_from(s: TargetSpec) -> std::result::Result<Self, String> {
        let gain = match (s.gain_var, s.gain_re, s.gain_im) {
            (Some(var), None, None) => TargetGain::Random { var },
            (None, re, im) if re.is_some() || im.is_some() => {
                TargetGain::Fixed(Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)))
            }
            _ => return Err("target needs either gain_var or gain_re/gain_im".into()),
        };
        Ok(Target {
            gain,
            delay_bin: s.delay_bin,
            doppler_bin: s.doppler_bin,
        })
    }
}

impl From<Target> for TargetSpec {
    fn from(t: Target) -> Self {
        let (gain_var, gain_re, gain_im) = match t.gain {
            TargetGain::Random { var } => (Some(var), None, None),
            TargetGain::Fixed(a) => (None, Some(a.re), Some(a.im)),
        };
        TargetSpec {
            gain_var,
            gain_re,
            gain_im,
            delay_bin: t.delay_bin,
            doppler_bin: t.doppler_bin,
        }
    }
}

/// Targets plus receiver noise, sharing one frame geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub targets: Vec<Target>,
    pub noise_var: f64,
}

impl Scene {
    pub fn new(dims: FrameDims, targets: Vec<Target>, noise_var: f64) -> Result<Self> {
        let scene = Self {
            n: dims.n,
            m: dims.m,
            targets,
            noise_var,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// One Rayleigh target at `(k̃, p̃)` with the given input SNR and unit
    /// noise power.
    pub fn single_target(
        dims: FrameDims,
        snr_in: f64,
        delay_bin: f64,
        doppler_bin: f64,
    ) -> Result<Self> {
        Self::new(
            dims,
            vec![Target::random(snr_in, delay_bin, doppler_bin)],
            1.0,
        )
    }

    pub fn dims(&self) -> FrameDims {
        FrameDims {
            n: self.n,
            m: self.m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dims().validate()?;
        if self.targets.is_empty() {
            return Err(Error::InvalidScene("scene has no targets".into()));
        }
        if !self.noise_var.is_finite() || self.noise_var < 0.0 {
            return Err(Error::InvalidScene(format!(
                "noise variance {} is invalid",
                self.noise_var
            )));
        }
        for t in &self.targets {
            t.validate(self.dims())?;
        }
        Ok(())
    }

    /// `Σ_q σ²_{α_q}`.
    pub fn total_gain_power(&self) -> f64 {
        self.targets.iter().map(|t| t.gain.power()).sum()
    }

    /// Input SNR before filtering, `Σ_q σ²_{α_q} / σ²`; infinite when
    /// noiseless.
    pub fn snr_in(&self) -> f64 {
        self.total_gain_power() / self.noise_var
    }
}

/// What a [`ComplexFrame`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameRole {
    Symbols,
    Csi,
    CsiEstimate,
    Echo,
    Filter,
    Chi,
    DdMap,
    Response,
}

/// `N×M` complex matrix stored row-major by subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrame {
    dims: FrameDims,
    role: FrameRole,
    data: Vec<Complex64>,
}

impl ComplexFrame {
    pub fn zeros(dims: FrameDims, role: FrameRole) -> Self {
        Self {
            dims,
            role,
            data: vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn from_vec(dims: FrameDims, role: FrameRole, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {}x{} frame",
                data.len(),
                dims.n,
                dims.m
            )));
        }
        Ok(Self { dims, role, data })
    }

    pub fn from_fn(
        dims: FrameDims,
        role: FrameRole,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for n in 0..dims.n {
            for m in 0..dims.m {
                data.push(f(n, m));
            }
        }
        Self { dims, role, data }
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    pub fn role(&self) -> FrameRole {
        self.role
    }

    pub fn with_role(mut self, role: FrameRole) -> Self {
        self.role = role;
        self
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.data[n * self.dims.m + m]
    }

    pub fn set(&mut self, n: usize, m: usize, v: Complex64) {
        self.data[n * self.dims.m + m] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        crate::numeric::sum(self.data.iter().map(|z| z.norm_sqr()))
    }

    pub(crate) fn check_same_dims(&self, other: &ComplexFrame) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape {
                expected: (self.dims.n, self.dims.m),
                actual: (other.dims.n, other.dims.m),
            });
        }
        Ok(())
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &ComplexFrame, role: FrameRole) -> Result<ComplexFrame> {
        self.check_same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ComplexFrame {
            dims: self.dims,
            role,
            data,
        })
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &ComplexFrame, role: FrameRole) -> Result<ComplexFrame> {
        self.check_same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ComplexFrame {
            dims: self.dims,
            role,
            data,
        })
    }
}

/// Frequency-domain delay steering `b_n = e^{-j2πnk̃/N}` and slow-time
/// Doppler steering `c_m = e^{-j2πmp̃/M}`. The channel uses `c^H`.
pub fn steering_vectors(dims: FrameDims, target: &Target) -> (Vec<Complex64>, Vec<Complex64>) {
    let delay = (0..dims.n)
        .map(|n| {
            Complex64::from_polar(1.0, -2.0 * PI * n as f64 * target.delay_bin / dims.n as f64)
        })
        .collect();
    let doppler = (0..dims.m)
        .map(|m| {
            Complex64::from_polar(
                1.0,
                -2.0 * PI * m as f64 * target.doppler_bin / dims.m as f64,
            )
        })
        .collect();
    (delay, doppler)
}

/// How target amplitudes are realized in [`build_csi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    /// Every target draws `α ~ CN(0, power)`.
    Random { seed: u64 },
    /// Fixed targets use their amplitude; variance targets use `√var`.
    Deterministic,
}

/// Sensing CSI `H = Σ_q α_q b(τ_q) c^H(ν_q)`.
pub fn build_csi(scene: &Scene, mode: GainMode) -> Result<ComplexFrame> {
    scene.validate()?;
    let gains = match mode {
        GainMode::Random { seed } => {
            let mut rng = rng_from_seed(seed);
            draw_gains(scene, &mut rng)
        }
        GainMode::Deterministic => deterministic_gains(scene),
    };
    Ok(csi_from_gains(scene, &gains))
}

pub(crate) fn draw_gains<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Vec<Complex64> {
    scene
        .targets
        .iter()
        .map(|t| complex_gaussian(rng, t.gain.power()))
        .collect()
}

pub(crate) fn deterministic_gains(scene: &Scene) -> Vec<Complex64> {
    scene
        .targets
        .iter()
        .map(|t| match t.gain {
            TargetGain::Random { var } => Complex64::new(var.sqrt(), 0.0),
            TargetGain::Fixed(a) => a,
        })
        .collect()
}

pub(crate) fn csi_from_gains(scene: &Scene, gains: &[Complex64]) -> ComplexFrame {
    let dims = scene.dims();
    let mut h = ComplexFrame::zeros(dims, FrameRole::Csi);
    for (t, &alpha) in scene.targets.iter().zip(gains) {
        let (b, c) = steering_vectors(dims, t);
        for (row, &bn) in h.as_mut_slice().chunks_mut(dims.m).zip(&b) {
            let scale = alpha * bn;
            for (v, cm) in row.iter_mut().zip(&c) {
                *v += scale * cm.conj();
            }
        }
    }
    h
}

/// Frame of i.i.d. symbols drawn from the constellation.
pub fn symbol_frame(c: &ShapedConstellation, dims: FrameDims, seed: u64) -> ComplexFrame {
    let mut rng = rng_from_seed(seed);
    symbol_frame_with(c, dims, &mut rng)
}

pub(crate) fn symbol_frame_with<R: Rng + ?Sized>(
    c: &ShapedConstellation,
    dims: FrameDims,
    rng: &mut R,
) -> ComplexFrame {
    ComplexFrame {
        dims,
        role: FrameRole::Symbols,
        data: c.sample_with(rng, dims.len()),
    }
}

/// Noisy echo `Y_s = H ⊙ X + Z`, `Z` i.i.d. CN(0, noise_var).
pub fn synthesize_echo(
    csi: &ComplexFrame,
    symbols: &ComplexFrame,
    noise_var: f64,
    seed: u64,
) -> Result<ComplexFrame> {
    let mut rng = rng_from_seed(seed);
    synthesize_echo_with(csi, symbols, noise_var, &mut rng)
}

pub(crate) fn synthesize_echo_with<R: Rng + ?Sized>(
    csi: &ComplexFrame,
    symbols: &ComplexFrame,
    noise_var: f64,
    rng: &mut R,
) -> Result<ComplexFrame> {
    if !noise_var.is_finite() || noise_var < 0.0 {
        return Err(Error::param("noise_var", format!("{noise_var} is invalid")));
    }
    let mut y = csi.hadamard(symbols, FrameRole::Echo)?;
    if noise_var > 0.0 {
        for v in y.as_mut_slice() {
            *v += complex_gaussian(rng, noise_var);
        }
    }
    Ok(y)
}

/// Physical frame parameters used only to convert delays and Dopplers into
/// bin units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalFrame {
    /// Subcarrier spacing `Δf` in Hz.
    pub subcarrier_spacing: f64,
    /// Total OFDM symbol duration `T_sym` in seconds (including CP).
    pub symbol_duration: f64,
    /// Carrier frequency `f_c` in Hz.
    pub carrier_freq: f64,
}

impl PhysicalFrame {
    /// Delay bin `k̃ = NΔf·τ`, wrapped into `[0, N)`.
    pub fn delay_bin(&self, dims: FrameDims, delay_s: f64) -> f64 {
        (dims.n as f64 * self.subcarrier_spacing * delay_s).rem_euclid(dims.n as f64)
    }

    /// Doppler bin `p̃ = M·T_sym·f_c·ν` for a normalized Doppler `ν = 2v/c`,
    /// wrapped into `[0, M)`.
    pub fn doppler_bin(&self, dims: FrameDims, nu: f64) -> f64 {
        (dims.m as f64 * self.symbol_duration * self.carrier_freq * nu).rem_euclid(dims.m as f64)
    }
}
