//! Cell-averaging CFAR on delay profiles and Monte Carlo detection
//! probability for a strong/weak two-target scene.

use serde::{Deserialize, Serialize};

use crate::channel::{
    csi_from_gains, symbol_frame_with, synthesize_echo_with, FrameDims, Scene, Target,
};
use crate::constellation::ShapedConstellation;
use crate::filtering::{estimate_csi, filter_matrix, DdTransform, Filter};
use crate::metrics::realize_gains;
use crate::numeric;
use crate::rng::{map_trials, rng_from_seed};
use crate::{from_db, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarConfig {
    #[serde(default = "default_guard")]
    pub guard_cells: usize,
    #[serde(default = "default_train")]
    pub train_cells: usize,
    #[serde(default = "default_pfa")]
    pub pfa: f64,
}

fn default_guard() -> usize {
    2
}

fn default_train() -> usize {
    16
}

fn default_pfa() -> f64 {
    1e-4
}

impl Default for CfarConfig {
    fn default() -> Self {
        Self {
            guard_cells: default_guard(),
            train_cells: default_train(),
            pfa: default_pfa(),
        }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_cells == 0 {
            return Err(Error::param(
                "train_cells",
                "need at least one training cell per side",
            ));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::param("pfa", format!("{} outside (0, 1)", self.pfa)));
        }
        Ok(())
    }

    /// Threshold multiplier `T(pfa^(−1/T) − 1)`, `T = 2·train`, exact for
    /// exponentially distributed cell powers.
    pub fn alpha(&self) -> f64 {
        let t = (2 * self.train_cells) as f64;
        t * (self.pfa.powf(-1.0 / t) - 1.0)
    }

    /// Cells the window spans on each side of the cell under test.
    pub fn half_width(&self) -> usize {
        self.guard_cells + self.train_cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfarOutput {
    pub detections: Vec<usize>,
    pub thresholds: Vec<f64>,
}

/// CA-CFAR with a circular window; O(n) via prefix sums.
pub fn ca_cfar_1d(profile: &[f64], cfg: &CfarConfig) -> Result<CfarOutput> {
    cfg.validate()?;
    let n = profile.len();
    let half = cfg.half_width();
    if n <= 2 * half {
        return Err(Error::InvalidInput(format!(
            "profile of {n} cells is too short for a window of {} cells",
            2 * half + 1
        )));
    }
    // prefix sums over three copies so every window is a contiguous range
    let mut prefix = Vec::with_capacity(3 * n + 1);
    prefix.push(0.0);
    let mut acc = numeric::KahanSum::new();
    for i in 0..3 * n {
        acc.add(profile[i % n]);
        prefix.push(acc.value());
    }
    let range = |lo: usize, hi: usize| prefix[hi] - prefix[lo];
    let alpha = cfg.alpha();
    let t = (2 * cfg.train_cells) as f64;
    let g = cfg.guard_cells;
    let thresholds: Vec<f64> = (0..n)
        .map(|i| {
            let c = i + n;
            let lead = range(c - half, c - g);
            let lag = range(c + g + 1, c + half + 1);
            alpha * (lead + lag).max(0.0) / t
        })
        .collect();
    let detections = profile
        .iter()
        .zip(&thresholds)
        .enumerate()
        .filter(|(_, (&p, &th))| p > th)
        .map(|(i, _)| i)
        .collect();
    Ok(CfarOutput {
        detections,
        thresholds,
    })
}

/// Strong target at delay 0 with `σ²_α = snr_in`, weak Rayleigh target at
/// `weak_bin` and `weak_rel_db` below it, both at zero Doppler, unit noise.
pub fn two_target_scene(
    dims: FrameDims,
    snr_in_db: f64,
    weak_rel_db: f64,
    weak_bin: f64,
) -> Result<Scene> {
    let strong = from_db(snr_in_db);
    Scene::new(
        dims,
        vec![
            Target::random(strong, 0.0, 0.0),
            Target::random(strong * from_db(weak_rel_db), weak_bin, 0.0),
        ],
        1.0,
    )
}

fn delay_index(t: &Target, n: usize) -> usize {
    (t.delay_bin.round() as usize) % n
}

/// Fraction of trials in which the weaker target's delay bin is detected on
/// the zero-Doppler delay profile.
pub fn detection_probability(
    scene: &Scene,
    c: &ShapedConstellation,
    filter: &Filter,
    cfg: &CfarConfig,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    scene.validate()?;
    filter.validate()?;
    cfg.validate()?;
    if scene.targets.len() != 2 {
        return Err(Error::InvalidScene(format!(
            "detection needs exactly two targets, got {}",
            scene.targets.len()
        )));
    }
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let dims = scene.dims();
    let (strong, weak) = if scene.targets[0].gain.power() >= scene.targets[1].gain.power() {
        (&scene.targets[0], &scene.targets[1])
    } else {
        (&scene.targets[1], &scene.targets[0])
    };
    let weak_bin = delay_index(weak, dims.n);
    if weak_bin == delay_index(strong, dims.n) {
        return Err(Error::InvalidScene("targets share a delay bin".into()));
    }
    if dims.n <= 2 * cfg.half_width() {
        return Err(Error::InvalidInput(format!(
            "{} delay bins are too few for the CFAR window",
            dims.n
        )));
    }
    let transform = DdTransform::new(dims);
    let hits = map_trials(trials, seed, |s| -> Result<bool> {
        let mut rng = rng_from_seed(s);
        let x = symbol_frame_with(c, dims, &mut rng);
        let gains = realize_gains(scene, &mut rng);
        let h = csi_from_gains(scene, &gains);
        let y = synthesize_echo_with(&h, &x, scene.noise_var, &mut rng)?;
        let est = estimate_csi(&y, &filter_matrix(&x, filter)?)?;
        let dd = transform.apply(&est, crate::channel::FrameRole::DdMap)?;
        let profile: Vec<f64> = (0..dims.n).map(|k| dd.get(k, 0).norm_sqr()).collect();
        let out = ca_cfar_1d(&profile, cfg)?;
        Ok(out.detections.binary_search(&weak_bin).is_ok())
    });
    let mut count = 0usize;
    for h in hits {
        count += usize::from(h?);
    }
    Ok(count as f64 / trials as f64)
}
