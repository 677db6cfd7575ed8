//! JSON experiment configs. Every field has a default, so `{}` (or no
//! `--config` at all) runs the reference experiment; unknown fields are
//! rejected with their path.

use std::path::Path;

use isac_core::air::AirConfig;
use isac_core::channel::FrameDims;
use isac_core::constellation::{Family, ShapedConstellation};
use isac_core::detection::CfarConfig;
use isac_core::filtering::FilterKind;
use isac_core::metrics::Kernel;
use isac_core::pcs::{C0Policy, PcsConfig};
use isac_core::{from_db, pcs};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Reads `path` into `T`, reporting the offending field path on failure.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Usage(format!("invalid config: {inner}"))
        } else {
            CliError::Usage(format!("invalid config at `{path}`: {inner}"))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    pub family: Family,
    pub order: usize,
}

impl ConstellationSpec {
    pub const QAM64: Self = Self {
        family: Family::Qam,
        order: 64,
    };

    pub fn uniform(&self) -> Result<ShapedConstellation> {
        Ok(ShapedConstellation::uniform(self.family, self.order)?)
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.order, self.family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl FrameSpec {
    pub fn dims(&self) -> Result<FrameDims> {
        Ok(FrameDims::new(self.n, self.m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub constellations: Vec<ConstellationSpec>,
    pub frame: FrameSpec,
    pub snr_in_db: f64,
    pub identity_trials: usize,
    pub table_trials: usize,
    pub theorem1_tol: f64,
    pub table_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            output_format: None,
            constellations: vec![
                ConstellationSpec {
                    family: Family::Psk,
                    order: 4,
                },
                ConstellationSpec {
                    family: Family::Qam,
                    order: 16,
                },
                ConstellationSpec::QAM64,
            ],
            frame: FrameSpec { n: 16, m: 16 },
            snr_in_db: 4.0,
            identity_trials: 2000,
            table_trials: 1000,
            theorem1_tol: 0.05,
            table_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrSweepConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub constellation: ConstellationSpec,
    pub frame: FrameSpec,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
}

impl Default for DrSweepConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_format: None,
            constellation: ConstellationSpec::QAM64,
            frame: FrameSpec { n: 64, m: 32 },
            snr_db_start: -20.0,
            snr_db_stop: 30.0,
            snr_db_step: 0.5,
        }
    }
}

impl DrSweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.snr_db_step.is_nan()
            || self.snr_db_step <= 0.0
            || self.snr_db_stop < self.snr_db_start
        {
            return Err(CliError::Usage(
                "snr grid needs snr_db_step > 0 and snr_db_stop >= snr_db_start".into(),
            ));
        }
        let count =
            ((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.snr_db_start + i as f64 * self.snr_db_step)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub constellation: ConstellationSpec,
    pub filter: FilterKind,
    pub snr_in_db: f64,
    pub frames: Vec<FrameSpec>,
    pub trials: usize,
    pub kernel: Kernel,
}

impl Default for ProfilesConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_format: None,
            constellation: ConstellationSpec::QAM64,
            filter: FilterKind::Mf,
            snr_in_db: 4.0,
            frames: vec![FrameSpec { n: 16, m: 16 }, FrameSpec { n: 64, m: 32 }],
            trials: 200,
            kernel: Kernel::Dirichlet,
        }
    }
}

/// Solver settings shared by `pcs` and `tradeoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcsSpec {
    pub constellation: ConstellationSpec,
    pub filter: FilterKind,
    pub frame: FrameSpec,
    pub snr_in_db: f64,
    pub noise_var: f64,
    pub comm_snr_db: f64,
    pub bank_samples: usize,
    /// Absolute MSE budget; takes precedence over `c0_fraction`.
    pub c0: Option<f64>,
    /// Budget as `c_lo + fraction·(c_hi − c_lo)`.
    pub c0_fraction: f64,
    pub c0_policy: C0Policy,
    pub tol: f64,
    pub max_outer_iters: usize,
    pub air_mc_samples: usize,
}

impl Default for PcsSpec {
    fn default() -> Self {
        Self {
            constellation: ConstellationSpec::QAM64,
            filter: FilterKind::Wf,
            frame: FrameSpec { n: 64, m: 32 },
            snr_in_db: 4.0,
            noise_var: 1.0,
            comm_snr_db: 20.0,
            bank_samples: pcs::DEFAULT_BANK_SAMPLES,
            c0: None,
            c0_fraction: 0.5,
            c0_policy: C0Policy::Clamp,
            tol: pcs::DEFAULT_TOL,
            max_outer_iters: pcs::DEFAULT_MAX_OUTER_ITERS,
            air_mc_samples: isac_core::air::DEFAULT_MC_SAMPLES,
        }
    }
}

impl PcsSpec {
    pub fn comm(&self, seed: u64) -> AirConfig {
        AirConfig {
            mc_samples: self.air_mc_samples,
            ..AirConfig::new(1.0 / from_db(self.comm_snr_db), seed)
        }
    }

    /// Core solver config with the bank seeded from `seed`.
    pub fn to_core(&self, seed: u64) -> Result<PcsConfig> {
        let mut cfg = PcsConfig::new(
            self.constellation.order,
            self.filter,
            self.frame.dims()?,
            self.snr_in_db,
            self.comm(seed),
        );
        cfg.family = self.constellation.family;
        cfg.gain_var = from_db(self.snr_in_db) * self.noise_var;
        cfg.noise_var = self.noise_var;
        cfg.bank_samples = self.bank_samples;
        cfg.c0_policy = self.c0_policy;
        cfg.tol = self.tol;
        cfg.max_outer_iters = self.max_outer_iters;
        cfg.c0 = match self.c0 {
            Some(c0) => c0,
            None => {
                let (lo, hi) = cfg.bounds()?;
                lo + self.c0_fraction * (hi - lo)
            }
        };
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcsCommandConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub solver: PcsSpec,
}

/// Strong target at delay 0, weak target `weak_rel_db` below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSpec {
    pub weak_rel_db: f64,
    pub weak_bin: f64,
    pub cfar: CfarConfig,
    pub trials: usize,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self {
            weak_rel_db: -25.0,
            weak_bin: 24.0,
            cfar: CfarConfig::default(),
            trials: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub solver: PcsSpec,
    pub grid_points: usize,
    /// Explicit budgets; overrides `grid_points`.
    pub c0_grid: Option<Vec<f64>>,
    pub detection: DetectionSpec,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_format: None,
            solver: PcsSpec::default(),
            grid_points: 8,
            c0_grid: None,
            detection: DetectionSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookConfig {
    pub master_seed: u64,
    pub output_format: Option<OutputFormat>,
    pub constellation: ConstellationSpec,
    /// Unnormalized weights; uniform when absent.
    pub weights: Option<Vec<f64>>,
    /// Existing codebook to validate and re-export; overrides the above.
    pub input: Option<String>,
    pub frame: FrameSpec,
    pub snr_in_db: f64,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_format: None,
            constellation: ConstellationSpec::QAM64,
            weights: None,
            input: None,
            frame: FrameSpec { n: 64, m: 32 },
            snr_in_db: 4.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg: TradeoffConfig = parse("{}").unwrap();
        assert_eq!(cfg, TradeoffConfig::default());
    }

    #[test]
    fn errors_name_the_field_path() {
        let err = parse::<TradeoffConfig>(r#"{"solver": {"frame": {"N": "x"}}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("solver.frame.N"), "{msg}");
        let err = parse::<PcsCommandConfig>(r#"{"solver": {"filtr": "MF"}}"#).unwrap_err();
        assert!(err.to_string().contains("solver"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sweep_grid_is_inclusive() {
        let g = DrSweepConfig::default().grid().unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(*g.last().unwrap(), 30.0);
        let bad = DrSweepConfig {
            snr_db_step: 0.0,
            ..DrSweepConfig::default()
        };
        assert!(bad.grid().is_err());
    }

    #[test]
    fn budget_fraction_resolves_between_bounds() {
        let spec = PcsSpec {
            c0_fraction: 0.25,
            ..PcsSpec::default()
        };
        let cfg = spec.to_core(3).unwrap();
        let (lo, hi) = cfg.bounds().unwrap();
        assert!((cfg.c0 - (lo + 0.25 * (hi - lo))).abs() < 1e-9 * hi);
        assert_eq!(cfg.comm.seed, 3);
    }
}
