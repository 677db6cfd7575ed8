//! Temporal-frequency filtering and delay-Doppler processing.
//!
//! For a symbol `x` with `a = |x|²` the three filters are
//!
//! | kind | `g`                  | `χ = x·g`      |
//! |------|----------------------|----------------|
//! | MF   | `x*`                 | `a`            |
//! | RF   | `1/x`                | `1`            |
//! | WF   | `x*/(a + 1/SNR_in)`  | `a/(a + 1/SNR_in)` |
//!
//! The delay-Doppler map is `Λ = F_N^H Ĥ F_M` with unitary DFT matrices, so
//! entry `(k, p)` carries phases `e^{+j2πnk/N}` along subcarriers and
//! `e^{-j2πmp/M}` along symbols.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::channel::{ComplexFrame, FrameDims, FrameRole};
use crate::{Error, Result};

/// Smallest symbol modulus accepted by the reciprocal filter.
pub const RF_MODULUS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FilterKind {
    Mf,
    Rf,
    Wf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Mf, FilterKind::Rf, FilterKind::Wf];
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Mf => "MF",
            FilterKind::Rf => "RF",
            FilterKind::Wf => "WF",
        })
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MF" => Ok(FilterKind::Mf),
            "RF" => Ok(FilterKind::Rf),
            "WF" => Ok(FilterKind::Wf),
            other => Err(Error::param("filter", format!("unknown filter `{other}`"))),
        }
    }
}

/// Filter kind plus the input SNR the Wiener filter is designed for. MF and
/// RF ignore `snr_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub kind: FilterKind,
    pub snr_in: f64,
}

impl Filter {
    pub fn new(kind: FilterKind, snr_in: f64) -> Self {
        Self { kind, snr_in }
    }

    pub fn matched(snr_in: f64) -> Self {
        Self::new(FilterKind::Mf, snr_in)
    }

    pub fn reciprocal() -> Self {
        Self::new(FilterKind::Rf, f64::INFINITY)
    }

    pub fn wiener(snr_in: f64) -> Self {
        Self::new(FilterKind::Wf, snr_in)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == FilterKind::Wf && (self.snr_in.is_nan() || self.snr_in <= 0.0) {
            return Err(Error::param(
                "snr_in",
                format!(
                    "Wiener filter needs a positive input SNR, got {}",
                    self.snr_in
                ),
            ));
        }
        Ok(())
    }

    fn inv_snr(&self) -> f64 {
        self.snr_in.recip()
    }

    /// `χ` for a symbol of power `a = |x|²`.
    pub fn chi(&self, a: f64) -> f64 {
        match self.kind {
            FilterKind::Mf => a,
            FilterKind::Rf => 1.0,
            FilterKind::Wf => a / (a + self.inv_snr()),
        }
    }

    /// `|g|²` for a symbol of power `a = |x|²`.
    pub fn gain_sq(&self, a: f64) -> f64 {
        match self.kind {
            FilterKind::Mf => a,
            FilterKind::Rf => a.recip(),
            FilterKind::Wf => a / (a + self.inv_snr()).powi(2),
        }
    }

    /// Filter coefficient `g` for one symbol.
    pub fn gain(&self, x: Complex64) -> Complex64 {
        match self.kind {
            FilterKind::Mf => x.conj(),
            FilterKind::Rf => x.inv(),
            FilterKind::Wf => x.conj() / (x.norm_sqr() + self.inv_snr()),
        }
    }
}

/// Entrywise filter matrix `G`.
pub fn filter_matrix(symbols: &ComplexFrame, filter: &Filter) -> Result<ComplexFrame> {
    filter.validate()?;
    check_rf_hazard(symbols, filter)?;
    let data = symbols.as_slice().iter().map(|&x| filter.gain(x)).collect();
    ComplexFrame::from_vec(symbols.dims(), FrameRole::Filter, data)
}

/// Filtered spectrum `χ = X ⊙ G`, real-valued for all three filters.
pub fn chi_matrix(symbols: &ComplexFrame, filter: &Filter) -> Result<ComplexFrame> {
    filter.validate()?;
    check_rf_hazard(symbols, filter)?;
    let data = symbols
        .as_slice()
        .iter()
        .map(|x| Complex64::new(filter.chi(x.norm_sqr()), 0.0))
        .collect();
    ComplexFrame::from_vec(symbols.dims(), FrameRole::Chi, data)
}

fn check_rf_hazard(symbols: &ComplexFrame, filter: &Filter) -> Result<()> {
    if filter.kind == FilterKind::Rf {
        if let Some((index, x)) = symbols
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, x)| x.norm() < RF_MODULUS_FLOOR)
        {
            return Err(Error::DivisionHazard {
                index,
                modulus: x.norm(),
            });
        }
    }
    Ok(())
}

/// Sensing CSI estimate `Ĥ = Y_s ⊙ G`.
pub fn estimate_csi(echo: &ComplexFrame, filter: &ComplexFrame) -> Result<ComplexFrame> {
    echo.hadamard(filter, FrameRole::CsiEstimate)
}

/// Planned unitary 2D transform `A ↦ F_N^H A F_M` for one frame size.
/// Reusable across Monte Carlo trials.
#[derive(Clone)]
pub struct DdTransform {
    dims: FrameDims,
    along_subcarriers: Arc<dyn Fft<f64>>,
    along_symbols: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DdTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdTransform")
            .field("dims", &self.dims)
            .finish()
    }
}

impl DdTransform {
    pub fn new(dims: FrameDims) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims,
            along_subcarriers: planner.plan_fft_inverse(dims.n),
            along_symbols: planner.plan_fft_forward(dims.m),
        }
    }

    pub fn dims(&self) -> FrameDims {
        self.dims
    }

    /// Applies the transform; the output carries `role`.
    pub fn apply(&self, frame: &ComplexFrame, role: FrameRole) -> Result<ComplexFrame> {
        let FrameDims { n, m } = self.dims;
        if frame.dims() != self.dims {
            return Err(Error::Shape {
                expected: (n, m),
                actual: (frame.dims().n, frame.dims().m),
            });
        }
        // rows: forward DFT over symbols
        let mut rows = frame.as_slice().to_vec();
        self.along_symbols.process(&mut rows);
        // columns: inverse DFT over subcarriers, via a transpose
        let mut cols = vec![Complex64::new(0.0, 0.0); n * m];
        for i in 0..n {
            for j in 0..m {
                cols[j * n + i] = rows[i * m + j];
            }
        }
        self.along_subcarriers.process(&mut cols);
        let scale = (n as f64 * m as f64).sqrt().recip();
        for i in 0..n {
            for j in 0..m {
                rows[i * m + j] = cols[j * n + i] * scale;
            }
        }
        ComplexFrame::from_vec(self.dims, role, rows)
    }
}

/// Delay-Doppler map `Λ = F_N^H Ĥ F_M` and its entrywise power `|Λ|²`
/// (row-major, delay index `k` by Doppler index `p`).
pub fn dd_map(csi_estimate: &ComplexFrame) -> Result<(ComplexFrame, Vec<f64>)> {
    let t = DdTransform::new(csi_estimate.dims());
    let lambda = t.apply(csi_estimate, FrameRole::DdMap)?;
    let power = lambda.as_slice().iter().map(|z| z.norm_sqr()).collect();
    Ok((lambda, power))
}

/// Response function `r(k,p) = (1/√NM) Σ χ e^{+j2πnk/N} e^{-j2πmp/M}`.
pub fn response_function(chi: &ComplexFrame) -> Result<ComplexFrame> {
    DdTransform::new(chi.dims()).apply(chi, FrameRole::Response)
}

/// Writes a `k,p,power` CSV of a delay-Doppler power map.
pub fn write_dd_map_csv<W: Write>(mut out: W, dims: FrameDims, power: &[f64]) -> Result<()> {
    writeln!(out, "k,p,power_linear")?;
    for k in 0..dims.n {
        for p in 0..dims.m {
            writeln!(out, "{k},{p},{:.17e}", power[k * dims.m + p])?;
        }
    }
    Ok(())
}
