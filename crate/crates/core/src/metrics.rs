//! Sensing metrics: closed forms over constellation moments and their Monte
//! Carlo counterparts.
//!
//! Per entry of the frame the CSI error is `σ²_α (χ−1)² + σ²|g|²`, giving
//!
//! - `MSE = NM (σ²_α E{(χ−1)²} + σ² E{|g|²})`
//! - `SNR_out = SNR_in (E{χ²} + (NM−1) E²{χ}) / E{|g|²}`
//! - `ISLR = (NM−1) Var(χ) / (E{χ²} + (NM−1) E²{χ})`
//! - `DR ≈ NM σ²_α E²{χ} / (σ²_α Var(χ) + σ² E{|g|²})`
//!
//! which reduce to the familiar per-filter expressions for MF, RF and WF.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    csi_from_gains, symbol_frame_with, synthesize_echo_with, FrameDims, FrameRole, Scene,
    TargetGain,
};
use crate::constellation::{ChiStats, ShapedConstellation};
use crate::filtering::{chi_matrix, estimate_csi, filter_matrix, DdTransform, Filter};
use crate::numeric::{self, dirichlet_power, sinc_power};
use crate::rng::{complex_gaussian, map_trials, rng_from_seed};
use crate::{to_db, Error, Result};

/// Chebyshev distance (circular, in bins) from every target peak beyond which
/// a cell counts as pedestal.
pub const FAR_REGION_MIN_DISTANCE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Empirical { trials: usize, seed: u64 },
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::ClosedForm => f.write_str("closed-form"),
            Provenance::Empirical { trials, seed } => {
                write!(f, "empirical(trials={trials};seed={seed})")
            }
        }
    }
}

/// Sensing metrics for one (constellation, filter, SNR) operating point.
///
/// `dr` is infinite when the pedestal vanishes (RF or WF without noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub snr_out: f64,
    pub islr: f64,
    pub dr: f64,
    pub nmse: f64,
    pub provenance: Provenance,
}

fn check_powers(gain_var: f64, noise_var: f64) -> Result<()> {
    if !gain_var.is_finite() || gain_var < 0.0 {
        return Err(Error::param("gain_var", format!("{gain_var} is invalid")));
    }
    if !noise_var.is_finite() || noise_var < 0.0 {
        return Err(Error::param("noise_var", format!("{noise_var} is invalid")));
    }
    Ok(())
}

/// Pedestal `σ²_α Var(χ) + σ² E{|g|²}` of the expected DD profile.
pub fn pedestal(stats: &ChiStats, gain_var: f64, noise_var: f64) -> f64 {
    gain_var * stats.var_chi + noise_var * stats.mean_gain_sq
}

/// Expected peak `NM σ²_α E²{χ}` of an on-grid target, excluding pedestal.
pub fn peak_power(stats: &ChiStats, dims: FrameDims, gain_var: f64) -> f64 {
    dims.nm() * gain_var * stats.mean_chi.powi(2)
}

/// Dynamic range with the `+1` dropped (valid when DR ≫ 1).
pub fn dynamic_range(stats: &ChiStats, dims: FrameDims, gain_var: f64, noise_var: f64) -> f64 {
    let peak = peak_power(stats, dims, gain_var);
    let ped = pedestal(stats, gain_var, noise_var);
    if ped == 0.0 {
        return if peak > 0.0 { f64::INFINITY } else { 0.0 };
    }
    peak / ped
}

/// Peak-plus-pedestal over pedestal, without the large-DR approximation.
pub fn dynamic_range_exact(
    stats: &ChiStats,
    dims: FrameDims,
    gain_var: f64,
    noise_var: f64,
) -> f64 {
    1.0 + dynamic_range(stats, dims, gain_var, noise_var)
}

/// Closed-form metrics. `filter.snr_in` parameterizes the Wiener filter; the
/// scene SNR is `gain_var / noise_var`.
pub fn metrics_closed_form(
    c: &ShapedConstellation,
    filter: &Filter,
    dims: FrameDims,
    gain_var: f64,
    noise_var: f64,
) -> Result<MetricsReport> {
    dims.validate()?;
    check_powers(gain_var, noise_var)?;
    let s = c.chi_stats(filter)?;
    let nm = dims.nm();
    let bias_sq = c.expect(|x| (filter.chi(x.norm_sqr()) - 1.0).powi(2));
    let mse = nm * (gain_var * bias_sq + noise_var * s.mean_gain_sq);
    let r00_sq = s.mean_chi_sq + (nm - 1.0) * s.mean_chi.powi(2);
    let snr_out = gain_var * r00_sq / (noise_var * s.mean_gain_sq);
    let islr = (nm - 1.0) * s.var_chi / r00_sq;
    let dr = dynamic_range(&s, dims, gain_var, noise_var);
    let nmse = nmse_from(dims, dr, s.mean_chi);
    Ok(MetricsReport {
        mse,
        snr_out,
        islr,
        dr,
        nmse,
        provenance: Provenance::ClosedForm,
    })
}

/// `N²M²/DR + (E{χ}−1)²/E²{χ}`: the DR penalized by the mainlobe loss.
pub fn nmse_from(dims: FrameDims, dr: f64, mean_chi: f64) -> f64 {
    let nm = dims.nm();
    nm * nm / dr + (mean_chi - 1.0).powi(2) / mean_chi.powi(2)
}

/// Mainlobe kernel used by [`expected_dd_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Exact normalized Dirichlet kernel of the DFT grid.
    #[default]
    Dirichlet,
    /// Continuous `sinc²` approximation.
    Sinc,
}

/// Expected DD power `E{|Λ_{k,p}|²}` for a single target at `target_bins`:
/// `σ²_α Var(χ) + NM σ²_α E²{χ} K(k−k̃) K(p−p̃) + σ² E{|g|²}`.
#[allow(clippy::too_many_arguments)]
pub fn expected_dd_power(
    k: f64,
    p: f64,
    target_bins: (f64, f64),
    c: &ShapedConstellation,
    filter: &Filter,
    dims: FrameDims,
    gain_var: f64,
    noise_var: f64,
    kernel: Kernel,
) -> Result<f64> {
    check_powers(gain_var, noise_var)?;
    let s = c.chi_stats(filter)?;
    let shape = match kernel {
        Kernel::Dirichlet => {
            dirichlet_power(k - target_bins.0, dims.n) * dirichlet_power(p - target_bins.1, dims.m)
        }
        Kernel::Sinc => sinc_power(k - target_bins.0) * sinc_power(p - target_bins.1),
    };
    Ok(pedestal(&s, gain_var, noise_var) + peak_power(&s, dims, gain_var) * shape)
}

/// Input SNR at which MF and RF reach the same DR:
/// `(E{|x|⁻²} − 1) / (E{|x|⁴} − 1)`.
pub fn crossover_snr_in(c: &ShapedConstellation) -> Result<f64> {
    let m4 = c.moment_abs_pow(4.0) - 1.0;
    if m4.abs() < 1e-12 || c.is_constant_modulus() {
        return Err(Error::DegenerateCrossover);
    }
    Ok((c.moment_abs_pow(-2.0) - 1.0) / m4)
}

/// Draws every target gain: Rayleigh targets get a fresh `CN(0, σ²)`, fixed
/// targets keep their amplitude.
pub(crate) fn realize_gains<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Vec<Complex64> {
    scene
        .targets
        .iter()
        .map(|t| match t.gain {
            TargetGain::Random { var } => complex_gaussian(rng, var),
            TargetGain::Fixed(a) => a,
        })
        .collect()
}

fn nearest_bin(x: f64, len: usize) -> usize {
    (x.round() as usize) % len
}

fn circular_distance(a: usize, b: usize, len: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(len - d)
}

/// Row-major mask of DD cells at Chebyshev distance `≥ min_distance` from
/// every target's nearest bin.
pub fn far_region_mask(scene: &Scene, min_distance: usize) -> Vec<bool> {
    let dims = scene.dims();
    let peaks: Vec<(usize, usize)> = scene
        .targets
        .iter()
        .map(|t| {
            (
                nearest_bin(t.delay_bin, dims.n),
                nearest_bin(t.doppler_bin, dims.m),
            )
        })
        .collect();
    let mut mask = Vec::with_capacity(dims.len());
    for k in 0..dims.n {
        for p in 0..dims.m {
            let far = peaks.iter().all(|&(pk, pp)| {
                circular_distance(k, pk, dims.n).max(circular_distance(p, pp, dims.m))
                    >= min_distance
            });
            mask.push(far);
        }
    }
    mask
}

/// Everything one Monte Carlo frame contributes.
#[derive(Debug, Clone, Copy, Default)]
struct FrameSample {
    sq_err: f64,
    sq_err_dd: f64,
    peak: f64,
    far_mean: f64,
    sum_r_sq: f64,
    r00: f64,
    sum_chi: f64,
    sum_chi_sq: f64,
    centered_chi_sq: f64,
    sum_g_sq: f64,
}

struct FrameSimulator<'a> {
    c: &'a ShapedConstellation,
    filter: &'a Filter,
    scene: &'a Scene,
    transform: DdTransform,
    far: Vec<bool>,
    far_count: usize,
    peak_index: usize,
}

impl<'a> FrameSimulator<'a> {
    fn new(c: &'a ShapedConstellation, filter: &'a Filter, scene: &'a Scene) -> Result<Self> {
        scene.validate()?;
        filter.validate()?;
        let dims = scene.dims();
        let far = far_region_mask(scene, FAR_REGION_MIN_DISTANCE);
        let far_count = far.iter().filter(|&&f| f).count();
        if far_count == 0 {
            return Err(Error::InvalidScene(
                "frame too small for a far region around the targets".into(),
            ));
        }
        let t0 = &scene.targets[0];
        let peak_index =
            nearest_bin(t0.delay_bin, dims.n) * dims.m + nearest_bin(t0.doppler_bin, dims.m);
        Ok(Self {
            c,
            filter,
            scene,
            transform: DdTransform::new(dims),
            far,
            far_count,
            peak_index,
        })
    }

    fn run(&self, seed: u64) -> Result<FrameSample> {
        let dims = self.scene.dims();
        let mut rng = rng_from_seed(seed);
        let x = symbol_frame_with(self.c, dims, &mut rng);
        let gains = realize_gains(self.scene, &mut rng);
        let h = csi_from_gains(self.scene, &gains);
        let y = synthesize_echo_with(&h, &x, self.scene.noise_var, &mut rng)?;
        let g = filter_matrix(&x, self.filter)?;
        let h_est = estimate_csi(&y, &g)?;
        let err = h_est.sub(&h, FrameRole::CsiEstimate)?;
        let err_dd = self.transform.apply(&err, FrameRole::DdMap)?;
        let lambda = self.transform.apply(&h_est, FrameRole::DdMap)?;
        let chi = chi_matrix(&x, self.filter)?;
        let r = self.transform.apply(&chi, FrameRole::Response)?;

        let power: Vec<f64> = lambda.as_slice().iter().map(|z| z.norm_sqr()).collect();
        let far_sum = numeric::sum(
            power
                .iter()
                .zip(&self.far)
                .filter(|(_, &f)| f)
                .map(|(p, _)| *p),
        );
        let chi_re: Vec<f64> = chi.as_slice().iter().map(|z| z.re).collect();
        let nm = dims.nm();
        let r00 = r.get(0, 0).re;
        let centre = r00 / nm.sqrt();
        Ok(FrameSample {
            sq_err: err.frobenius_norm_sq(),
            sq_err_dd: err_dd.frobenius_norm_sq(),
            peak: power[self.peak_index],
            far_mean: far_sum / self.far_count as f64,
            sum_r_sq: r.frobenius_norm_sq(),
            r00,
            sum_chi: numeric::sum(chi_re.iter().copied()),
            sum_chi_sq: numeric::sum(chi_re.iter().map(|v| v * v)),
            centered_chi_sq: numeric::sum(chi_re.iter().map(|v| (v - centre).powi(2))),
            sum_g_sq: numeric::sum(g.as_slice().iter().map(|z| z.norm_sqr())),
        })
    }

    fn run_all(&self, trials: usize, seed: u64) -> Result<Vec<FrameSample>> {
        if trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        map_trials(trials, seed, |s| self.run(s))
            .into_iter()
            .collect()
    }
}

fn mean_of(samples: &[FrameSample], f: impl Fn(&FrameSample) -> f64) -> f64 {
    numeric::sum(samples.iter().map(f)) / samples.len() as f64
}

/// Monte Carlo metrics over symbols, target gains and noise.
///
/// `SNR_out` and `ISLR` are measured on the response function of each `χ`
/// draw with the peak taken at `(0, 0)`, i.e. at the true target bin; DR is
/// the mean power at the first target's bin over the mean far-region power.
pub fn empirical_metrics(
    c: &ShapedConstellation,
    filter: &Filter,
    scene: &Scene,
    trials: usize,
    seed: u64,
) -> Result<MetricsReport> {
    let sim = FrameSimulator::new(c, filter, scene)?;
    let samples = sim.run_all(trials, seed)?;
    let dims = scene.dims();
    let nm = dims.nm();
    let gain_var = scene.total_gain_power();
    let mse = mean_of(&samples, |s| s.sq_err);
    let r00_sq = mean_of(&samples, |s| s.r00 * s.r00);
    let g_sq = mean_of(&samples, |s| s.sum_g_sq);
    let snr_out = gain_var * r00_sq / (scene.noise_var * g_sq / nm);
    let islr = (mean_of(&samples, |s| s.sum_r_sq) - r00_sq) / r00_sq;
    let far = mean_of(&samples, |s| s.far_mean);
    let peak = mean_of(&samples, |s| s.peak);
    let dr = if far == 0.0 {
        f64::INFINITY
    } else {
        peak / far
    };
    let mean_chi = mean_of(&samples, |s| s.sum_chi) / nm;
    Ok(MetricsReport {
        mse,
        snr_out,
        islr,
        dr,
        nmse: nmse_from(dims, dr, mean_chi),
        provenance: Provenance::Empirical { trials, seed },
    })
}

/// Empirical peak and far-region pedestal of the DD profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileLevels {
    pub peak: f64,
    pub pedestal: f64,
}

impl ProfileLevels {
    /// Pedestal relative to peak in dB (negative for a visible target).
    pub fn pedestal_db_below_peak(&self) -> f64 {
        to_db(self.pedestal / self.peak)
    }
}

pub fn empirical_profile_levels(
    c: &ShapedConstellation,
    filter: &Filter,
    scene: &Scene,
    trials: usize,
    seed: u64,
) -> Result<ProfileLevels> {
    let sim = FrameSimulator::new(c, filter, scene)?;
    let samples = sim.run_all(trials, seed)?;
    Ok(ProfileLevels {
        peak: mean_of(&samples, |s| s.peak),
        pedestal: mean_of(&samples, |s| s.far_mean),
    })
}

/// Mean DD power `|Λ_{k,p}|²` per cell (row-major) over Monte Carlo frames.
pub fn empirical_dd_power(
    c: &ShapedConstellation,
    filter: &Filter,
    scene: &Scene,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    scene.validate()?;
    filter.validate()?;
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let dims = scene.dims();
    let transform = DdTransform::new(dims);
    let maps = map_trials(trials, seed, |s| -> Result<Vec<f64>> {
        let mut rng = rng_from_seed(s);
        let x = symbol_frame_with(c, dims, &mut rng);
        let gains = realize_gains(scene, &mut rng);
        let h = csi_from_gains(scene, &gains);
        let y = synthesize_echo_with(&h, &x, scene.noise_var, &mut rng)?;
        let est = estimate_csi(&y, &filter_matrix(&x, filter)?)?;
        let dd = transform.apply(&est, FrameRole::DdMap)?;
        Ok(dd.as_slice().iter().map(|z| z.norm_sqr()).collect())
    });
    let mut acc = vec![numeric::KahanSum::new(); dims.len()];
    for map in maps {
        for (a, v) in acc.iter_mut().zip(map?) {
            a.add(v);
        }
    }
    Ok(acc.iter().map(|a| a.value() / trials as f64).collect())
}

/// Residuals of the ISLR, MSE and DD-domain identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Worst per-draw relative gap between the sidelobe energy computed from
    /// `r` and from the centered `χ`.
    pub corollary1_max_rel: f64,
    /// Relative gap between the two ISLR estimators over all draws.
    pub corollary1_islr_rel: f64,
    /// Worst per-draw relative Parseval gap `Σχ²` vs `Σ|r|²`.
    pub parseval_max_rel: f64,
    /// `|σ²_α(ISLR + mainlobe loss + 1/SNR_out)·E{r²(0,0)} − MSE| / MSE`.
    pub theorem1_rel: f64,
    /// Worst per-draw relative gap between TF- and DD-domain squared error.
    pub theorem2_max_rel: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn identity_checks(
    c: &ShapedConstellation,
    filter: &Filter,
    scene: &Scene,
    trials: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let sim = FrameSimulator::new(c, filter, scene)?;
    let samples = sim.run_all(trials, seed)?;
    let nm = scene.dims().nm();
    let rel = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    };
    let mut corollary1_max_rel: f64 = 0.0;
    let mut parseval_max_rel: f64 = 0.0;
    let mut theorem2_max_rel: f64 = 0.0;
    for s in &samples {
        let sidelobes = s.sum_r_sq - s.r00 * s.r00;
        // Both sides vanish for a flat χ; compare against the frame energy.
        let scale = s.sum_chi_sq.max(f64::MIN_POSITIVE);
        corollary1_max_rel = corollary1_max_rel.max((sidelobes - s.centered_chi_sq).abs() / scale);
        parseval_max_rel = parseval_max_rel.max(rel(s.sum_chi_sq, s.sum_r_sq));
        theorem2_max_rel = theorem2_max_rel.max(rel(s.sq_err, s.sq_err_dd));
    }
    let r00_sq = mean_of(&samples, |s| s.r00 * s.r00);
    let islr_r = (mean_of(&samples, |s| s.sum_r_sq) - r00_sq) / r00_sq;
    let islr_chi = mean_of(&samples, |s| s.centered_chi_sq) / r00_sq;
    let corollary1_islr_rel = (islr_r - islr_chi).abs() / islr_r.abs().max(1.0);

    let gain_var = scene.total_gain_power();
    let shape_terms = mean_of(&samples, |s| {
        s.sum_r_sq - s.r00 * s.r00 + nm * (1.0 - s.r00 / nm.sqrt()).powi(2)
    });
    let lhs = gain_var * shape_terms + scene.noise_var * mean_of(&samples, |s| s.sum_g_sq);
    let mse = mean_of(&samples, |s| s.sq_err);
    Ok(IdentityReport {
        corollary1_max_rel,
        corollary1_islr_rel,
        parseval_max_rel,
        theorem1_rel: rel(lhs, mse),
        theorem2_max_rel,
        trials,
        seed,
    })
}

/// One row of a DR-versus-SNR sweep (linear DR values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrSweepRow {
    pub snr_in_db: f64,
    pub dr_mf: f64,
    pub dr_rf: f64,
    pub dr_wf: f64,
}

/// Closed-form DR for MF, RF and WF over an input-SNR grid (unit noise). The
/// Wiener filter is matched to each grid SNR.
pub fn dr_sweep(
    c: &ShapedConstellation,
    dims: FrameDims,
    snr_db: &[f64],
) -> Result<Vec<DrSweepRow>> {
    snr_db
        .iter()
        .map(|&db| {
            let snr = crate::from_db(db);
            let dr =
                |f: Filter| -> Result<f64> { Ok(metrics_closed_form(c, &f, dims, snr, 1.0)?.dr) };
            Ok(DrSweepRow {
                snr_in_db: db,
                dr_mf: dr(Filter::matched(snr))?,
                dr_rf: dr(Filter::reciprocal())?,
                dr_wf: dr(Filter::wiener(snr))?,
            })
        })
        .collect()
}

pub fn write_dr_sweep_csv<W: Write>(mut out: W, rows: &[DrSweepRow]) -> Result<()> {
    writeln!(
        out,
        "snr_in_db,dr_mf_db,dr_rf_db,dr_wf_db,dr_mf_linear,dr_rf_linear,dr_wf_linear,provenance"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{:.12},{:.12},{:.12},{:.12e},{:.12e},{:.12e},closed-form",
            r.snr_in_db,
            to_db(r.dr_mf),
            to_db(r.dr_rf),
            to_db(r.dr_wf),
            r.dr_mf,
            r.dr_rf,
            r.dr_wf
        )?;
    }
    Ok(())
}

/// Input SNR (dB) where `a(snr) − b(snr)` changes sign, by linear
/// interpolation of the dB difference between adjacent grid points.
pub fn find_crossing_db(snr_db: &[f64], a_db: &[f64], b_db: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = a_db.iter().zip(b_db).map(|(a, b)| a - b).collect();
    for i in 1..diff.len() {
        let (d0, d1) = (diff[i - 1], diff[i]);
        if d0 == 0.0 {
            return Some(snr_db[i - 1]);
        }
        if d0.signum() != d1.signum() {
            let t = d0 / (d0 - d1);
            return Some(snr_db[i - 1] + t * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Target;
    use crate::constellation::Family;
    use crate::filtering::FilterKind;

    fn dims(n: usize, m: usize) -> FrameDims {
        FrameDims::new(n, m).unwrap()
    }

    fn qam(order: usize) -> ShapedConstellation {
        ShapedConstellation::uniform(Family::Qam, order).unwrap()
    }

    fn psk(order: usize) -> ShapedConstellation {
        ShapedConstellation::uniform(Family::Psk, order).unwrap()
    }

    // Table cells written out per filter, independent of the generic χ
    // formulas used by `metrics_closed_form`.
    fn table_cells(
        c: &ShapedConstellation,
        kind: FilterKind,
        nm: f64,
        sa: f64,
        s2: f64,
    ) -> (f64, f64, f64) {
        let snr = sa / s2;
        let m4 = c.moment_abs_pow(4.0);
        let mm2 = c.moment_abs_pow(-2.0);
        match kind {
            FilterKind::Mf => (
                nm * (sa * (m4 - 1.0) + s2),
                snr * (m4 + nm - 1.0),
                (nm - 1.0) * (m4 - 1.0) / (nm + m4 - 1.0),
            ),
            FilterKind::Rf => (nm * s2 * mm2, snr * nm / mm2, 0.0),
            FilterKind::Wf => {
                let inv = 1.0 / snr;
                let e1 = c.expect(|x| 1.0 / (x.norm_sqr() + inv));
                let e4 = c.expect(|x| x.norm_sqr().powi(2) / (x.norm_sqr() + inv).powi(2));
                let e2 = c.expect(|x| x.norm_sqr() / (x.norm_sqr() + inv));
                let eg = c.expect(|x| x.norm_sqr() / (x.norm_sqr() + inv).powi(2));
                (
                    nm * s2 * e1,
                    snr * (e4 + (nm - 1.0) * e2 * e2) / eg,
                    (nm - 1.0) * (e4 - e2 * e2) / (e4 + (nm - 1.0) * e2 * e2),
                )
            }
        }
    }

    #[test]
    fn closed_form_matches_table_cells() {
        let d = dims(64, 32);
        let (sa, s2) = (2.5, 0.8);
        for c in [psk(4), qam(16), qam(64), qam(256)] {
            for kind in FilterKind::ALL {
                let f = Filter::new(kind, sa / s2);
                let r = metrics_closed_form(&c, &f, d, sa, s2).unwrap();
                let (mse, snr_out, islr) = table_cells(&c, kind, d.nm(), sa, s2);
                assert!((r.mse - mse).abs() < 1e-10 * mse, "{kind} mse");
                assert!(
                    (r.snr_out - snr_out).abs() < 1e-10 * snr_out,
                    "{kind} snr_out"
                );
                assert!((r.islr - islr).abs() < 1e-12, "{kind} islr");
            }
        }
    }

    #[test]
    fn psk_is_filter_invariant() {
        let d = dims(16, 16);
        for snr in [0.01, 1.0, 100.0] {
            let c = psk(8);
            let drs: Vec<f64> = FilterKind::ALL
                .iter()
                .map(|&k| metrics_closed_form(&c, &Filter::new(k, snr), d, snr, 1.0).unwrap())
                .map(|r| {
                    assert!(r.islr.abs() < 1e-15);
                    r.dr
                })
                .collect();
            let expected = d.nm() * snr;
            for dr in drs {
                assert!((dr - expected).abs() < 1e-9 * expected);
            }
        }
    }

    #[test]
    fn rf_islr_is_zero_and_mf_noiseless_mse() {
        let d = dims(64, 32);
        let q = qam(64);
        let r = metrics_closed_form(&q, &Filter::reciprocal(), d, 3.0, 1.0).unwrap();
        assert_eq!(r.islr, 0.0);
        let r = metrics_closed_form(&q, &Filter::matched(f64::INFINITY), d, 1.0, 0.0).unwrap();
        assert!((r.mse - d.nm() * 0.380952).abs() < 1e-6 * d.nm());
    }

    #[test]
    fn noiseless_rf_has_infinite_dr() {
        let r = metrics_closed_form(&qam(16), &Filter::reciprocal(), dims(8, 8), 1.0, 0.0).unwrap();
        assert!(r.dr.is_infinite());
        assert_eq!(r.nmse, 0.0);
    }

    #[test]
    fn nmse_decomposition_holds() {
        let d = dims(32, 16);
        for c in [psk(4), qam(16), qam(64)] {
            for kind in FilterKind::ALL {
                for snr_db in [-20.0, 0.0, 4.0, 25.0] {
                    let snr = crate::from_db(snr_db);
                    let f = Filter::new(kind, snr);
                    let r = metrics_closed_form(&c, &f, d, snr, 1.0).unwrap();
                    let s = c.chi_stats(&f).unwrap();
                    let residual = r.nmse
                        - d.nm() * d.nm() / r.dr
                        - (s.mean_chi - 1.0).powi(2) / s.mean_chi.powi(2);
                    assert!(residual.abs() <= 1e-12 * r.nmse.max(1.0));
                }
            }
        }
    }

    #[test]
    fn crossover_values() {
        let x64 = crossover_snr_in(&qam(64)).unwrap();
        assert!((x64 - 4.4242).abs() < 1e-4);
        assert!((to_db(x64) - 6.458).abs() < 1e-3);
        // 16-QAM: (1.888889 − 1)/(1.32 − 1) from grid enumeration
        let x16 = crossover_snr_in(&qam(16)).unwrap();
        assert!((x16 - (17.0 / 9.0 - 1.0) / 0.32).abs() < 1e-12);
        assert!((to_db(x16) - 4.437).abs() < 1e-3);
        assert!(matches!(
            crossover_snr_in(&psk(4)),
            Err(Error::DegenerateCrossover)
        ));
    }

    #[test]
    fn expected_dd_power_examples() {
        let d = dims(16, 8);
        let (sa, s2) = (2.0, 0.5);
        let p = expected_dd_power(
            3.0,
            2.0,
            (3.0, 2.0),
            &psk(4),
            &Filter::matched(4.0),
            d,
            sa,
            s2,
            Kernel::Dirichlet,
        )
        .unwrap();
        assert!((p - (d.nm() * sa + s2)).abs() < 1e-12);

        let q = qam(64);
        let f = Filter::matched(4.0);
        let s = q.chi_stats(&f).unwrap();
        let far =
            expected_dd_power(10.0, 6.0, (3.0, 2.0), &q, &f, d, sa, s2, Kernel::Dirichlet).unwrap();
        assert!((far - (sa * s.var_chi + s2 * s.mean_gain_sq)).abs() < 1e-12);

        let rf = expected_dd_power(
            5.0,
            1.0,
            (3.0, 2.0),
            &q,
            &Filter::reciprocal(),
            d,
            sa,
            0.0,
            Kernel::Dirichlet,
        )
        .unwrap();
        assert!(rf.abs() < 1e-25);
    }

    #[test]
    fn off_grid_mass_is_conserved() {
        let d = dims(16, 8);
        let q = qam(16);
        let f = Filter::wiener(2.0);
        let s = q.chi_stats(&f).unwrap();
        let ped = pedestal(&s, 2.0, 1.0);
        let mut excess = 0.0;
        for k in 0..d.n {
            for p in 0..d.m {
                excess += expected_dd_power(
                    k as f64,
                    p as f64,
                    (3.4, 5.7),
                    &q,
                    &f,
                    d,
                    2.0,
                    1.0,
                    Kernel::Dirichlet,
                )
                .unwrap()
                    - ped;
            }
        }
        let peak = peak_power(&s, d, 2.0);
        assert!((excess - peak).abs() < 1e-9 * peak);
        let sinc =
            expected_dd_power(3.0, 6.0, (3.4, 5.7), &q, &f, d, 2.0, 1.0, Kernel::Sinc).unwrap();
        let dir = expected_dd_power(3.0, 6.0, (3.4, 5.7), &q, &f, d, 2.0, 1.0, Kernel::Dirichlet)
            .unwrap();
        assert!((sinc - dir).abs() / dir < 0.05);
    }

    #[test]
    fn dr_ordering_across_regimes() {
        let d = dims(64, 32);
        let q = qam(64);
        let at = |db: f64| dr_sweep(&q, d, &[db]).unwrap()[0];
        let low = at(-10.0);
        assert!((to_db(low.dr_mf) - to_db(low.dr_wf)).abs() < 0.1);
        assert!(low.dr_mf > low.dr_rf && low.dr_wf > low.dr_rf);
        let high = at(20.0);
        assert!((to_db(high.dr_rf) - to_db(high.dr_wf)).abs() < 0.5);
        assert!(high.dr_rf > high.dr_mf && high.dr_wf > high.dr_mf);
        for db in [-20.0, -25.0, -30.0] {
            let r = at(db);
            let ratio = r.dr_wf / (d.nm() * crate::from_db(db));
            assert!((0.99..=1.01).contains(&ratio), "{db} dB: {ratio}");
        }
    }

    #[test]
    fn pedestal_scaling_between_frame_sizes() {
        let q = qam(64);
        let snr = crate::from_db(4.0);
        let f = Filter::matched(snr);
        let level = |d: FrameDims| {
            let peak =
                expected_dd_power(0.0, 0.0, (0.0, 0.0), &q, &f, d, snr, 1.0, Kernel::Dirichlet)
                    .unwrap();
            let far =
                expected_dd_power(8.0, 8.0, (0.0, 0.0), &q, &f, d, snr, 1.0, Kernel::Dirichlet)
                    .unwrap();
            (peak, far)
        };
        let (p1, f1) = level(dims(16, 16));
        let (p2, f2) = level(dims(64, 32));
        assert_eq!(f1, f2);
        let gain = to_db(p2 / f2) - to_db(p1 / f1);
        assert!((gain - 9.03).abs() < 0.05, "{gain}");
    }

    #[test]
    fn far_mask_respects_wraparound() {
        let scene = Scene::new(dims(16, 8), vec![Target::random(1.0, 0.0, 0.0)], 1.0).unwrap();
        let mask = far_region_mask(&scene, 4);
        let at = |k: usize, p: usize| mask[k * 8 + p];
        assert!(!at(0, 0));
        assert!(!at(13, 3)); // delay distance 3 through the wrap
        assert!(at(12, 3));
        assert!(!at(2, 5)); // Doppler distance 3 through the wrap
        assert!(at(2, 4));
    }

    #[test]
    fn empirical_psk_rf_mse_is_exact() {
        let scene = Scene::single_target(dims(16, 8), 2.0, 3.0, 2.0).unwrap();
        let c = psk(4);
        // per realization ‖Ĥ−H‖² = Σ|z|²; its mean over trials is close to NMσ²
        let r = empirical_metrics(&c, &Filter::reciprocal(), &scene, 200, 1).unwrap();
        let nm = scene.dims().nm();
        assert!((r.mse - nm).abs() < 4.0 * nm / (nm * 200.0).sqrt());
        assert!(r.islr.abs() < 1e-9);
        let closed =
            metrics_closed_form(&c, &Filter::reciprocal(), scene.dims(), 2.0, 1.0).unwrap();
        assert!((r.snr_out - closed.snr_out).abs() < 1e-9 * closed.snr_out);
    }

    #[test]
    fn empirical_mse_tracks_closed_form() {
        let d = dims(32, 16);
        let snr = 2.0;
        let scene = Scene::single_target(d, snr, 5.0, 3.0).unwrap();
        let q = qam(64);
        let f = Filter::matched(snr);
        let e = empirical_metrics(&q, &f, &scene, 1000, 3).unwrap();
        let c = metrics_closed_form(&q, &f, d, snr, 1.0).unwrap();
        assert!((e.mse - c.mse).abs() / c.mse < 0.03);
        assert!((e.snr_out - c.snr_out).abs() / c.snr_out < 0.03);
        assert!((e.islr - c.islr).abs() < 0.02);
        assert_eq!(
            e.provenance,
            Provenance::Empirical {
                trials: 1000,
                seed: 3
            }
        );
    }

    #[test]
    fn empirical_metrics_are_seed_deterministic() {
        let scene = Scene::single_target(dims(16, 8), 1.0, 3.0, 2.0).unwrap();
        let q = qam(16);
        let a = empirical_metrics(&q, &Filter::wiener(1.0), &scene, 50, 9).unwrap();
        let b = empirical_metrics(&q, &Filter::wiener(1.0), &scene, 50, 9).unwrap();
        assert_eq!(a, b);
        assert!(empirical_metrics(&q, &Filter::wiener(1.0), &scene, 0, 9).is_err());
    }

    #[test]
    fn identities_hold_per_realization() {
        let scene = Scene::single_target(dims(16, 16), 2.5, 4.0, 7.0).unwrap();
        let q = qam(64);
        for kind in FilterKind::ALL {
            let rep = identity_checks(&q, &Filter::new(kind, 2.5), &scene, 100, 4).unwrap();
            assert!(rep.theorem2_max_rel < 1e-9, "{kind}: {rep:?}");
            assert!(rep.corollary1_max_rel < 1e-10, "{kind}: {rep:?}");
            assert!(rep.parseval_max_rel < 1e-10, "{kind}: {rep:?}");
            assert!(rep.corollary1_islr_rel < 1e-10, "{kind}: {rep:?}");
        }
    }

    #[test]
    fn empirical_map_matches_expected_profile() {
        let d = dims(16, 8);
        let scene = Scene::single_target(d, 2.0, 3.0, 2.0).unwrap();
        let q = qam(16);
        let f = Filter::wiener(2.0);
        let map = empirical_dd_power(&q, &f, &scene, 2000, 5).unwrap();
        for (idx, &v) in map.iter().enumerate() {
            let (k, p) = ((idx / d.m) as f64, (idx % d.m) as f64);
            let e = expected_dd_power(k, p, (3.0, 2.0), &q, &f, d, 2.0, 1.0, Kernel::Dirichlet)
                .unwrap();
            assert!((v - e).abs() / e < 0.15, "({k},{p}): {v} vs {e}");
        }
    }

    #[test]
    fn crossing_interpolation() {
        let x = [0.0, 1.0, 2.0];
        let a = [0.0, 1.0, 2.0];
        let b = [0.5, 0.5, 0.5];
        assert!((find_crossing_db(&x, &a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!(find_crossing_db(&x, &a, &[5.0; 3]).is_none());
    }

    #[test]
    fn dr_sweep_csv_header() {
        let rows = dr_sweep(&qam(16), dims(8, 8), &[0.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_dr_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("snr_in_db,dr_mf_db,dr_rf_db,dr_wf_db,"));
        assert_eq!(text.lines().count(), 3);
    }
}
