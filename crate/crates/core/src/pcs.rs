//! Probabilistic constellation shaping: maximize the AIR of a fixed alphabet
//! subject to a sensing-MSE budget `c0`, unit average power and the simplex,
//! by a modified Blahut–Arimoto iteration.
//!
//! The continuous channel output is represented by a per-solve sample bank.
//! Each alphabet point gets `L_y` draws `y = h·x + n` and the bank is turned
//! into a discrete channel `W[x][s] ∝ p(y_s|x) / q(y_s)` with `q` the
//! uniform-input mixture that generated the samples (self-normalized
//! importance weights). Blahut–Arimoto then runs exactly on `W`, so the
//! objective is monotone and the solve is deterministic given the bank seed.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::air::AirConfig;
use crate::channel::FrameDims;
use crate::constellation::{Codebook, Family, ShapedConstellation};
use crate::filtering::{Filter, FilterKind};
use crate::metrics::metrics_closed_form;
use crate::numeric::{self, log_sum_exp};
use crate::rng::{complex_gaussian, map_indices, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_BANK_SAMPLES: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_OUTER_ITERS: usize = 500;

/// λ₁ beyond this means no feasible point exists for the budget.
const LAMBDA1_LIMIT: f64 = 1e12;
const FLOOR_MARGIN: f64 = 1e-3;

/// Normalized per-point MSE penalty; multiply by `NMσ²` for the MSE
/// contribution of the point.
pub fn penalty_f(point: Complex64, kind: FilterKind, snr_in: f64) -> Result<f64> {
    let a = point.norm_sqr();
    match kind {
        FilterKind::Mf => Ok(snr_in * (a * a - 1.0) + 1.0),
        FilterKind::Rf => {
            if point.norm() < 1e-12 {
                return Err(Error::DivisionHazard {
                    index: 0,
                    modulus: point.norm(),
                });
            }
            Ok(1.0 / a)
        }
        FilterKind::Wf => Ok(1.0 / (a + 1.0 / snr_in)),
    }
}

fn check_sensing(gain_var: f64, noise_var: f64) -> Result<()> {
    if !(gain_var.is_finite() && gain_var > 0.0) {
        return Err(Error::param(
            "gain_var",
            format!("{gain_var} must be positive"),
        ));
    }
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::param(
            "noise_var",
            format!("{noise_var} must be positive"),
        ));
    }
    Ok(())
}

/// `(c_lo, c_hi)`: closed-form MSE of uniform PSK and uniform QAM of `order`.
pub fn c0_bounds(
    order: usize,
    kind: FilterKind,
    dims: FrameDims,
    gain_var: f64,
    noise_var: f64,
) -> Result<(f64, f64)> {
    check_sensing(gain_var, noise_var)?;
    let filter = Filter::new(kind, gain_var / noise_var);
    let mse = |family| -> Result<f64> {
        let c = ShapedConstellation::uniform(family, order)?;
        Ok(metrics_closed_form(&c, &filter, dims, gain_var, noise_var)?.mse)
    };
    Ok((mse(Family::Psk)?, mse(Family::Qam)?))
}

/// Smallest MSE any unit-power distribution on `alphabet` can reach.
///
/// The problem is a linear program with two equality constraints, so the
/// optimum sits on at most two points: one ring below and one above unit
/// power.
pub fn mse_floor(
    alphabet: &ShapedConstellation,
    kind: FilterKind,
    dims: FrameDims,
    gain_var: f64,
    noise_var: f64,
) -> Result<f64> {
    check_sensing(gain_var, noise_var)?;
    let snr = gain_var / noise_var;
    let rings: Vec<(f64, f64)> = alphabet
        .points()
        .iter()
        .map(|&x| Ok((x.norm_sqr(), penalty_f(x, kind, snr)?)))
        .collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for &(ai, fi) in &rings {
        if (ai - 1.0).abs() < 1e-12 {
            best = best.min(fi);
        }
        if ai >= 1.0 {
            continue;
        }
        for &(aj, fj) in rings.iter().filter(|r| r.0 > 1.0) {
            let wi = (aj - 1.0) / (aj - ai);
            best = best.min(wi * fi + (1.0 - wi) * fj);
        }
    }
    if !best.is_finite() {
        return Err(Error::InvalidConstellation(
            "no unit-power distribution exists on this alphabet".into(),
        ));
    }
    Ok(best * dims.nm() * noise_var)
}

/// Discrete channel realized from a fixed Monte Carlo sample bank.
#[derive(Debug, Clone)]
pub struct SampleBank {
    order: usize,
    samples: usize,
    /// Row-major `order × samples` transition weights, rows summing to one.
    w: Vec<f64>,
    /// `Σ_s W log W` per row.
    self_info: Vec<f64>,
}

impl SampleBank {
    /// `per_point` noise draws are shared by all points, each rotated by its
    /// point's phase. The rotation keeps the bank exactly as symmetric as the
    /// alphabet, so a PSK alphabet sees identical rows.
    pub fn build(
        alphabet: &ShapedConstellation,
        comm: &AirConfig,
        per_point: usize,
    ) -> Result<Self> {
        comm.validate()?;
        if per_point == 0 {
            return Err(Error::param(
                "bank_samples",
                "need at least one sample per point",
            ));
        }
        let k = alphabet.order();
        let mut rng = rng_from_seed(comm.seed);
        let noise: Vec<Complex64> = (0..per_point)
            .map(|_| complex_gaussian(&mut rng, comm.comm_noise_var))
            .collect();
        let hx: Vec<Complex64> = alphabet
            .points()
            .iter()
            .map(|&x| comm.channel_gain * x)
            .collect();
        let phase: Vec<Complex64> = alphabet
            .points()
            .iter()
            .map(|&x| {
                if x.norm() > 0.0 {
                    x / x.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        let total = k * per_point;
        let inv_var = 1.0 / comm.comm_noise_var;
        // column s = (j, l): posterior of every x under a uniform prior
        let columns: Vec<Vec<f64>> = map_indices(total, |s| {
            let (j, l) = (s / per_point, s % per_point);
            let y = hx[j] + noise[l] * phase[j];
            let ll: Vec<f64> = hx.iter().map(|&c| -(y - c).norm_sqr() * inv_var).collect();
            let norm = log_sum_exp(&ll);
            ll.iter().map(|v| (v - norm).exp()).collect()
        });
        let mut w = vec![0.0; k * total];
        for (s, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                w[i * total + s] = v;
            }
        }
        for row in w.chunks_mut(total) {
            let z = numeric::sum(row.iter().copied());
            row.iter_mut().for_each(|v| *v /= z);
        }
        let self_info = w
            .chunks(total)
            .map(|row| numeric::sum(row.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln())))
            .collect();
        Ok(Self {
            order: k,
            samples: total,
            w,
            self_info,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.samples..(i + 1) * self.samples]
    }

    fn output_dist(&self, p: &[f64]) -> Vec<f64> {
        let mut mix = vec![0.0; self.samples];
        for (i, &pi) in p.iter().enumerate() {
            if pi > 0.0 {
                for (m, &v) in mix.iter_mut().zip(self.row(i)) {
                    *m += pi * v;
                }
            }
        }
        mix
    }

    /// `Σ_s W[x][s] log mix_s` for every input.
    fn cross_info(&self, mix: &[f64]) -> Vec<f64> {
        let log_mix: Vec<f64> = mix
            .iter()
            .map(|&m| if m > 0.0 { m.ln() } else { 0.0 })
            .collect();
        (0..self.order)
            .map(|i| {
                numeric::sum(
                    self.row(i)
                        .iter()
                        .zip(&log_mix)
                        .filter(|(&v, _)| v > 0.0)
                        .map(|(&v, &l)| v * l),
                )
            })
            .collect()
    }

    /// Mutual information of the bank channel in nats.
    pub fn mutual_information(&self, p: &[f64]) -> f64 {
        let cross = self.cross_info(&self.output_dist(p));
        numeric::sum(
            p.iter()
                .enumerate()
                .filter(|(_, &pi)| pi > 0.0)
                .map(|(i, &pi)| pi * (self.self_info[i] - cross[i])),
        )
        .max(0.0)
    }

    /// Plain Blahut–Arimoto step `p(x) ∝ p(x)·exp(D(x))` exposed for
    /// reference solvers; returns the exponent `log p + D`.
    pub fn ba_exponent(&self, p: &[f64]) -> Vec<f64> {
        let cross = self.cross_info(&self.output_dist(p));
        p.iter()
            .enumerate()
            .map(|(i, &pi)| {
                if pi > 0.0 {
                    pi.ln() + self.self_info[i] - cross[i]
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }
}

/// What to do with a budget outside the achievable range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum C0Policy {
    /// Clamp into range and record a warning.
    #[default]
    Clamp,
    /// Refuse budgets below the floor and above `c_hi`.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcsConfig {
    pub family: Family,
    pub order: usize,
    pub filter: FilterKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub gain_var: f64,
    pub noise_var: f64,
    pub comm: AirConfig,
    pub c0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_iters")]
    pub max_outer_iters: usize,
    #[serde(default = "default_bank")]
    pub bank_samples: usize,
    #[serde(default)]
    pub c0_policy: C0Policy,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_iters() -> usize {
    DEFAULT_MAX_OUTER_ITERS
}

fn default_bank() -> usize {
    DEFAULT_BANK_SAMPLES
}

impl PcsConfig {
    pub fn new(
        order: usize,
        filter: FilterKind,
        dims: FrameDims,
        snr_in_db: f64,
        comm: AirConfig,
    ) -> Self {
        Self {
            family: Family::Qam,
            order,
            filter,
            n: dims.n,
            m: dims.m,
            gain_var: crate::from_db(snr_in_db),
            noise_var: 1.0,
            comm,
            c0: f64::INFINITY,
            tol: DEFAULT_TOL,
            max_outer_iters: DEFAULT_MAX_OUTER_ITERS,
            bank_samples: DEFAULT_BANK_SAMPLES,
            c0_policy: C0Policy::Clamp,
        }
    }

    pub fn dims(&self) -> Result<FrameDims> {
        FrameDims::new(self.n, self.m)
    }

    pub fn snr_in(&self) -> f64 {
        self.gain_var / self.noise_var
    }

    pub fn alphabet(&self) -> Result<ShapedConstellation> {
        ShapedConstellation::uniform(self.family, self.order)
    }

    /// `c0_bounds` for this order; a PSK order without a QAM counterpart has
    /// a single achievable MSE, so both bounds coincide.
    pub fn bounds(&self) -> Result<(f64, f64)> {
        let dims = self.dims()?;
        match c0_bounds(self.order, self.filter, dims, self.gain_var, self.noise_var) {
            Err(Error::UnsupportedOrder { family: "QAM", .. }) if self.family == Family::Psk => {
                let filter = Filter::new(self.filter, self.snr_in());
                let c = self.alphabet()?;
                let mse =
                    metrics_closed_form(&c, &filter, dims, self.gain_var, self.noise_var)?.mse;
                Ok((mse, mse))
            }
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dims()?;
        check_sensing(self.gain_var, self.noise_var)?;
        self.comm.validate()?;
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::param("max_outer_iters", "must be at least 1"));
        }
        if self.c0.is_nan() {
            return Err(Error::param("c0", "is NaN"));
        }
        Ok(())
    }
}

/// One outer iteration of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// Bank mutual information in nats.
    pub objective: f64,
    pub mse: f64,
    pub power: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcsSolution {
    pub probs: Vec<f64>,
    pub air_bits: f64,
    pub sensing_mse: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Objective (nats) after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub trace: Vec<IterRecord>,
    pub c0_requested: f64,
    pub c0_effective: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub mse_floor: f64,
    pub warnings: Vec<String>,
}

impl PcsSolution {
    pub fn constellation(&self, cfg: &PcsConfig) -> Result<ShapedConstellation> {
        cfg.alphabet()?.with_probs(self.probs.clone())
    }

    pub fn codebook(&self, cfg: &PcsConfig, provenance: impl Into<String>) -> Result<Codebook> {
        let mut cb = Codebook::from_constellation(&self.constellation(cfg)?, provenance);
        cb.snr_in = Some(cfg.snr_in());
        cb.filter = Some(cfg.filter.to_string());
        cb.c0 = Some(self.c0_effective);
        Ok(cb)
    }
}

struct Problem<'a> {
    bank: &'a SampleBank,
    f: Vec<f64>,
    a: Vec<f64>,
    /// Budget in normalized penalty units.
    budget: f64,
    constant_power: bool,
}

fn gibbs(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|&l| (l - top).exp()).collect();
    let z = numeric::sum(p.iter().copied());
    p.iter_mut().for_each(|v| *v /= z);
    p
}

fn dot(p: &[f64], v: &[f64]) -> f64 {
    numeric::sum(p.iter().zip(v).map(|(a, b)| a * b))
}

impl Problem<'_> {
    /// Gibbs distribution for fixed λ₁ with λ₂ chosen for unit power.
    fn power_projected(&self, base: &[f64]) -> Result<(Vec<f64>, f64)> {
        if self.constant_power {
            return Ok((gibbs(base), 0.0));
        }
        let at = |l2: f64| {
            let logits: Vec<f64> = base.iter().zip(&self.a).map(|(b, a)| b - l2 * a).collect();
            let p = gibbs(&logits);
            let mean = dot(&p, &self.a);
            (p, mean - 1.0)
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut steps = 0;
        while at(lo).1 < 0.0 {
            lo *= 2.0;
            steps += 1;
            if steps > 80 {
                return Err(Error::MultiplierSearch {
                    iterations: steps,
                    detail: "power multiplier unbounded below".into(),
                });
            }
        }
        while at(hi).1 > 0.0 {
            hi *= 2.0;
            steps += 1;
            if steps > 160 {
                return Err(Error::MultiplierSearch {
                    iterations: steps,
                    detail: "power multiplier unbounded above".into(),
                });
            }
        }
        let mut l2 = 0.0f64.clamp(lo, hi);
        for it in 0..200 {
            let (p, h) = at(l2);
            if h.abs() <= 1e-13 {
                return Ok((p, l2));
            }
            if h > 0.0 {
                lo = l2;
            } else {
                hi = l2;
            }
            let var =
                dot(&p, &self.a.iter().map(|a| a * a).collect::<Vec<_>>()) - (h + 1.0).powi(2);
            let newton = if var > 0.0 { l2 + h / var } else { f64::NAN };
            l2 = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                let (p, h) = at(l2);
                if h.abs() <= 1e-9 {
                    return Ok((p, l2));
                }
                return Err(Error::MultiplierSearch {
                    iterations: it,
                    detail: format!("power residual {h:e} at bracket collapse"),
                });
            }
        }
        let (p, h) = at(l2);
        if h.abs() <= 1e-9 {
            return Ok((p, l2));
        }
        Err(Error::MultiplierSearch {
            iterations: 200,
            detail: format!("power residual {h:e}"),
        })
    }

    fn at_lambda1(&self, exponent: &[f64], l1: f64) -> Result<(Vec<f64>, f64, f64)> {
        let base: Vec<f64> = exponent
            .iter()
            .zip(&self.f)
            .map(|(e, f)| e - l1 * f)
            .collect();
        let (p, l2) = self.power_projected(&base)?;
        let mse = dot(&p, &self.f);
        Ok((p, l2, mse))
    }

    /// Constrained p-step: returns `(p, λ₁, λ₂)`.
    fn step(&self, exponent: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
        let (p, l2, mse) = self.at_lambda1(exponent, 0.0)?;
        if mse <= self.budget {
            return Ok((p, 0.0, l2));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut best = loop {
            let r = self.at_lambda1(exponent, hi)?;
            if r.2 <= self.budget {
                break r;
            }
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA1_LIMIT {
                return Err(Error::Infeasible {
                    c0: self.budget,
                    floor: r.2,
                });
            }
        };
        for _ in 0..200 {
            if self.budget - best.2 <= 1e-10 * self.budget || hi - lo <= 1e-14 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r = self.at_lambda1(exponent, mid)?;
            if r.2 <= self.budget {
                hi = mid;
                best = r;
            } else {
                lo = mid;
            }
        }
        Ok((best.0, hi, best.1))
    }
}

/// Effective budget after applying the policy; warnings describe clamping.
fn resolve_c0(cfg: &PcsConfig, c_lo: f64, c_hi: f64, floor: f64) -> Result<(f64, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut c0 = cfg.c0;
    let strict = cfg.c0_policy == C0Policy::Strict;
    // A PSK alphabet pins every distribution to one MSE value.
    let upper = c_hi.max(floor);
    if c0 > upper {
        if strict && c0.is_finite() {
            return Err(Error::param(
                "c0",
                format!("{c0:e} exceeds c_hi = {upper:e}"),
            ));
        }
        if c0.is_finite() {
            warnings.push(format!("c0 = {c0:e} above c_hi; clamped to {upper:e}"));
        }
        c0 = upper;
    }
    if c0 < c_lo {
        if strict {
            return Err(Error::Infeasible { c0, floor });
        }
        warnings.push(format!("c0 = {c0:e} below c_lo; clamped to {c_lo:e}"));
        c0 = c_lo;
    }
    if c0 < floor {
        if strict {
            return Err(Error::Infeasible { c0, floor });
        }
        let lifted = if upper > floor {
            floor + FLOOR_MARGIN * (upper - floor)
        } else {
            floor
        };
        warnings.push(format!(
            "c0 = {c0:e} below the alphabet's MSE floor {floor:e}; raised to {lifted:e}"
        ));
        c0 = lifted;
    }
    Ok((c0, warnings))
}

pub fn build_bank(cfg: &PcsConfig) -> Result<SampleBank> {
    SampleBank::build(&cfg.alphabet()?, &cfg.comm, cfg.bank_samples)
}

/// Runs the modified Blahut–Arimoto iteration on a fresh sample bank.
pub fn mba_solve(cfg: &PcsConfig) -> Result<PcsSolution> {
    cfg.validate()?;
    let bank = build_bank(cfg)?;
    mba_solve_with_bank(cfg, &bank)
}

pub fn mba_solve_with_bank(cfg: &PcsConfig, bank: &SampleBank) -> Result<PcsSolution> {
    let mut trace = Vec::new();
    solve_into(cfg, bank, &mut trace)
}

/// Like [`mba_solve_with_bank`] but also hands back the iterations completed
/// before a failure.
pub fn mba_solve_traced(
    cfg: &PcsConfig,
    bank: &SampleBank,
) -> (Result<PcsSolution>, Vec<IterRecord>) {
    let mut trace = Vec::new();
    let result = solve_into(cfg, bank, &mut trace);
    (result, trace)
}

fn solve_into(
    cfg: &PcsConfig,
    bank: &SampleBank,
    trace: &mut Vec<IterRecord>,
) -> Result<PcsSolution> {
    cfg.validate()?;
    let dims = cfg.dims()?;
    let alphabet = cfg.alphabet()?;
    if bank.order() != alphabet.order() {
        return Err(Error::InvalidInput(format!(
            "bank built for {} points, alphabet has {}",
            bank.order(),
            alphabet.order()
        )));
    }
    let (c_lo, c_hi) = cfg.bounds()?;
    let floor = mse_floor(&alphabet, cfg.filter, dims, cfg.gain_var, cfg.noise_var)?;
    let (c0, warnings) = resolve_c0(cfg, c_lo, c_hi, floor)?;
    let scale = dims.nm() * cfg.noise_var;
    let a: Vec<f64> = alphabet.points().iter().map(|x| x.norm_sqr()).collect();
    let f: Vec<f64> = alphabet
        .points()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            penalty_f(x, cfg.filter, cfg.snr_in()).map_err(|e| match e {
                Error::DivisionHazard { modulus, .. } => {
                    Error::DivisionHazard { index: i, modulus }
                }
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let constant_power = a.iter().all(|v| (v - 1.0).abs() < 1e-12);
    let problem = Problem {
        bank,
        f,
        a,
        budget: c0 / scale,
        constant_power,
    };

    let k = alphabet.order();
    let mut p = vec![1.0 / k as f64; k];
    trace.clear();
    let mut converged = false;
    let (mut l1, mut l2) = (0.0, 0.0);
    for iter in 1..=cfg.max_outer_iters {
        let exponent = problem.bank.ba_exponent(&p);
        let (next, m1, m2) = problem.step(&exponent)?;
        let diff = numeric::sum(next.iter().zip(&p).map(|(a, b)| (a - b).powi(2)));
        p = next;
        l1 = m1;
        l2 = m2;
        trace.push(IterRecord {
            iter,
            objective: problem.bank.mutual_information(&p),
            mse: dot(&p, &problem.f) * scale,
            power: dot(&p, &problem.a),
            lambda1: l1,
            lambda2: l2,
        });
        if diff <= cfg.tol {
            converged = true;
            break;
        }
    }
    let last = *trace.last().expect("at least one iteration");
    Ok(PcsSolution {
        probs: p,
        air_bits: last.objective / std::f64::consts::LN_2,
        sensing_mse: last.mse,
        lambda1: l1,
        lambda2: l2,
        outer_iters: trace.len(),
        converged,
        objective_trace: trace.iter().map(|r| r.objective).collect(),
        trace: trace.clone(),
        c0_requested: cfg.c0,
        c0_effective: c0,
        c_lo,
        c_hi,
        mse_floor: floor,
        warnings,
    })
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[IterRecord]) -> Result<()> {
    writeln!(
        out,
        "iter,objective_nats,mse_linear,power_linear,lambda1,lambda2"
    )?;
    for r in trace {
        writeln!(
            out,
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            r.iter, r.objective, r.mse, r.power, r.lambda1, r.lambda2
        )?;
    }
    Ok(())
}

/// One grid point of a trade-off sweep.
#[derive(Debug)]
pub struct TradeoffPoint {
    pub c0: f64,
    pub result: Result<PcsSolution>,
}

/// Solves every budget on the grid with one shared sample bank; results are
/// sorted by `c0` and failures are kept per point.
pub fn tradeoff_sweep(template: &PcsConfig, c0_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    template.validate()?;
    let bank = build_bank(template)?;
    let mut grid = c0_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(map_indices(grid.len(), |i| {
        let cfg = PcsConfig {
            c0: grid[i],
            ..template.clone()
        };
        TradeoffPoint {
            c0: grid[i],
            result: mba_solve_with_bank(&cfg, &bank),
        }
    }))
}

/// Evenly spaced budgets from the alphabet's floor (or `c_lo`, whichever is
/// larger) to `c_hi`.
pub fn c0_grid(cfg: &PcsConfig, points: usize) -> Result<Vec<f64>> {
    let (c_lo, c_hi) = cfg.bounds()?;
    let floor = mse_floor(
        &cfg.alphabet()?,
        cfg.filter,
        cfg.dims()?,
        cfg.gain_var,
        cfg.noise_var,
    )?;
    let lo = c_lo.max(floor + FLOOR_MARGIN * (c_hi - floor).max(0.0));
    if points < 2 {
        return Ok(vec![c_hi]);
    }
    Ok((0..points)
        .map(|i| lo + (c_hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::total_variation;

    fn dims() -> FrameDims {
        FrameDims::new(64, 32).unwrap()
    }

    fn comm(seed: u64) -> AirConfig {
        AirConfig::new(0.1, seed)
    }

    fn config(kind: FilterKind, c0: f64) -> PcsConfig {
        let mut cfg = PcsConfig::new(16, kind, dims(), 4.0, comm(3));
        cfg.c0 = c0;
        cfg.bank_samples = 60;
        cfg
    }

    /// Blahut–Arimoto with only the power constraint, written against the
    /// public bank interface with its own bisection on λ₂.
    fn power_only_ba(bank: &SampleBank, a: &[f64], iters: usize) -> Vec<f64> {
        let k = a.len();
        let mut p = vec![1.0 / k as f64; k];
        for _ in 0..iters {
            let e = bank.ba_exponent(&p);
            let at = |l: f64| {
                let w: Vec<f64> = e.iter().zip(a).map(|(e, a)| e - l * a).collect();
                let top = w.iter().cloned().fold(f64::MIN, f64::max);
                let u: Vec<f64> = w.iter().map(|v| (v - top).exp()).collect();
                let z: f64 = u.iter().sum();
                u.into_iter().map(|v| v / z).collect::<Vec<_>>()
            };
            let power = |p: &[f64]| p.iter().zip(a).map(|(p, a)| p * a).sum::<f64>();
            let (mut lo, mut hi) = (-50.0, 50.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if power(&at(mid)) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            p = at(0.5 * (lo + hi));
        }
        p
    }

    #[test]
    fn penalty_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(penalty_f(one, FilterKind::Mf, 7.0).unwrap(), 1.0);
        assert_eq!(
            penalty_f(Complex64::new(1.0, 1.0), FilterKind::Rf, 1.0).unwrap(),
            0.5
        );
        assert_eq!(penalty_f(one, FilterKind::Wf, 1.0).unwrap(), 0.5);
        assert!(matches!(
            penalty_f(Complex64::new(0.0, 0.0), FilterKind::Rf, 1.0),
            Err(Error::DivisionHazard { .. })
        ));
    }

    #[test]
    fn penalty_reproduces_closed_form_mse() {
        let d = dims();
        let (sa, s2) = (2.5, 1.0);
        let w: Vec<f64> = (0..64).map(|i| 1.0 + (i % 7) as f64).collect();
        let raw = ShapedConstellation::uniform(Family::Qam, 64)
            .unwrap()
            .with_probs(w)
            .unwrap();
        // rebuild on the unit-power alphabet, keeping the same shaping
        for kind in FilterKind::ALL {
            let mse = metrics_closed_form(&raw, &Filter::new(kind, sa / s2), d, sa, s2)
                .unwrap()
                .mse;
            let via_f = raw.expect(|x| penalty_f(x, kind, sa / s2).unwrap()) * d.nm() * s2;
            // MF's penalty assumes unit power; the renormalized alphabet has it
            assert!((mse - via_f).abs() < 1e-9 * mse, "{kind}");
        }
    }

    #[test]
    fn bounds_examples() {
        let d = dims();
        let nm = d.nm();
        let (sa, s2) = (crate::from_db(4.0), 1.0);
        let (lo, hi) = c0_bounds(64, FilterKind::Mf, d, sa, s2).unwrap();
        assert!((lo - nm * s2).abs() < 1e-9 * lo);
        assert!((hi - nm * (sa * 0.380952 + s2)).abs() < 1e-5 * hi);
        let (lo, hi) = c0_bounds(64, FilterKind::Rf, d, sa, s2).unwrap();
        assert!((lo - nm * s2).abs() < 1e-9 * lo);
        assert!((hi - nm * s2 * 2.685417).abs() < 1e-6 * hi);
    }

    #[test]
    fn floor_is_two_ring_mix() {
        let d = dims();
        let q = ShapedConstellation::uniform(Family::Qam, 64).unwrap();
        let snr = crate::from_db(4.0);
        let expected = [
            (FilterKind::Mf, 1.0911),
            (FilterKind::Rf, 1.0376),
            (FilterKind::Wf, 0.7288),
        ];
        for (kind, f) in expected {
            let floor = mse_floor(&q, kind, d, snr, 1.0).unwrap() / d.nm();
            assert!((floor - f).abs() < 1e-4, "{kind}: {floor}");
        }
        let psk = ShapedConstellation::uniform(Family::Psk, 8).unwrap();
        assert!((mse_floor(&psk, FilterKind::Rf, d, snr, 1.0).unwrap() - d.nm()).abs() < 1e-9);
    }

    #[test]
    fn bank_rows_are_distributions() {
        let q = ShapedConstellation::uniform(Family::Qam, 16).unwrap();
        let bank = SampleBank::build(&q, &comm(1), 40).unwrap();
        for i in 0..16 {
            let s: f64 = bank.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let uniform = vec![1.0 / 16.0; 16];
        let mi = bank.mutual_information(&uniform) / std::f64::consts::LN_2;
        assert!(mi > 0.0 && mi <= 4.0 + 1e-12);
        let mut point = vec![0.0; 16];
        point[3] = 1.0;
        assert!(bank.mutual_information(&point).abs() < 1e-12);
    }

    #[test]
    fn loose_budget_matches_power_only_ba() {
        let cfg = config(FilterKind::Wf, f64::INFINITY);
        let bank = build_bank(&cfg).unwrap();
        let sol = mba_solve_with_bank(&cfg, &bank).unwrap();
        assert!(sol.c0_effective == sol.c_hi);
        let a: Vec<f64> = cfg
            .alphabet()
            .unwrap()
            .points()
            .iter()
            .map(|x| x.norm_sqr())
            .collect();
        let oracle = power_only_ba(&bank, &a, sol.outer_iters.max(200));
        let tv = total_variation(&sol.probs, &oracle);
        assert!(tv < 0.05, "tv = {tv}");
    }

    #[test]
    fn solution_invariants_and_monotone_trace() {
        for kind in FilterKind::ALL {
            let (lo, hi) = config(kind, 0.0).bounds().unwrap();
            let cfg = config(kind, lo + 0.3 * (hi - lo));
            let sol = mba_solve(&cfg).unwrap();
            let total: f64 = sol.probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(sol.probs.iter().all(|&p| p >= 0.0));
            let power: f64 = cfg
                .alphabet()
                .unwrap()
                .points()
                .iter()
                .zip(&sol.probs)
                .map(|(x, p)| p * x.norm_sqr())
                .sum();
            assert!((power - 1.0).abs() < 1e-6, "{kind}: {power}");
            assert!(sol.sensing_mse <= sol.c0_effective * (1.0 + 1e-4), "{kind}");
            for w in sol.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{kind}: {w:?}");
            }
            if sol.c0_effective - sol.sensing_mse > 1e-6 * sol.c0_effective {
                assert_eq!(sol.lambda1, 0.0);
            }
        }
    }

    #[test]
    fn tight_rf_budget_flattens_modulus() {
        let mut cfg = config(FilterKind::Rf, 0.0);
        cfg.order = 64;
        let (lo, hi) = cfg.bounds().unwrap();
        cfg.c0 = lo + 0.01 * (hi - lo);
        let sol = mba_solve(&cfg).unwrap();
        assert!(!sol.warnings.is_empty());
        let c = sol.constellation(&cfg).unwrap();
        assert!(c.moment_abs_pow(-2.0) <= 1.05);
    }

    #[test]
    fn psk_alphabet_stays_uniform() {
        for kind in FilterKind::ALL {
            let mut cfg = config(kind, f64::INFINITY);
            cfg.family = Family::Psk;
            cfg.order = 8;
            let sol = mba_solve(&cfg).unwrap();
            for p in &sol.probs {
                assert!((p - 0.125).abs() < 1e-9, "{kind}: {:?}", sol.probs);
            }
        }
    }

    #[test]
    fn strict_policy_rejects_out_of_range() {
        let mut cfg = config(FilterKind::Rf, 0.0);
        cfg.c0_policy = C0Policy::Strict;
        assert!(matches!(mba_solve(&cfg), Err(Error::Infeasible { .. })));
        cfg.c0_policy = C0Policy::Clamp;
        let sol = mba_solve(&cfg).unwrap();
        assert!(sol.c0_effective >= sol.mse_floor);
    }

    #[test]
    fn sweep_is_monotone_and_sorted() {
        let cfg = config(FilterKind::Mf, 0.0);
        let mut grid = c0_grid(&cfg, 5).unwrap();
        grid.reverse();
        let pts = tradeoff_sweep(&cfg, &grid).unwrap();
        let sols: Vec<&PcsSolution> = pts.iter().map(|p| p.result.as_ref().unwrap()).collect();
        for w in pts.windows(2) {
            assert!(w[0].c0 < w[1].c0);
        }
        for w in sols.windows(2) {
            assert!(w[1].air_bits >= w[0].air_bits - 1e-3);
            assert!(w[1].sensing_mse >= w[0].sensing_mse * (1.0 - 1e-6));
        }
    }

    #[test]
    fn trace_csv_and_codebook() {
        let cfg = config(FilterKind::Wf, f64::INFINITY);
        let sol = mba_solve(&cfg).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &sol.trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective_nats,mse_linear,power_linear,lambda1,lambda2\n"));
        assert_eq!(text.lines().count(), sol.trace.len() + 1);
        let cb = sol.codebook(&cfg, "test").unwrap();
        assert_eq!(cb.filter.as_deref(), Some("WF"));
        let back = Codebook::from_json(&cb.to_json().unwrap()).unwrap();
        assert_eq!(back.probs, cb.probs);
    }
}
