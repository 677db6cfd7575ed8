use std::path::{Path, PathBuf};

use isac_core::channel::Scene;
use isac_core::constellation::{Codebook, Family, ShapedConstellation};
use isac_core::detection::{detection_probability, two_target_scene};
use isac_core::filtering::{Filter, FilterKind};
use isac_core::metrics::{
    crossover_snr_in, dr_sweep as closed_form_dr_sweep, empirical_dd_power, empirical_metrics,
    expected_dd_power, far_region_mask, find_crossing_db, identity_checks, metrics_closed_form,
    FAR_REGION_MIN_DISTANCE,
};
use isac_core::pcs::{self, mba_solve_traced, PcsSolution};
use isac_core::rng::derive_seed;
use isac_core::{air, from_db, to_db};
use serde::Serialize;

use crate::config::{
    self, CodebookConfig, ConstellationSpec, DrSweepConfig, OutputFormat, PcsCommandConfig,
    ProfilesConfig, TradeoffConfig, VerifyConfig,
};
use crate::table::{write_text, Table};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Identity and invariant checks; nonzero exit on any breach.
    Verify,
    /// Closed-form DR versus input SNR for MF, RF and WF.
    DrSweep,
    /// Expected and empirical zero-Doppler / zero-delay slices.
    Profiles,
    /// One shaping solve: codebook plus solver trace.
    Pcs,
    /// Budget sweep with AIR and detection probability per point.
    Tradeoff,
    /// Validate and export a codebook with its sensing metrics.
    Codebook,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    /// False when `verify` found a breach.
    pub success: bool,
}

impl Outcome {
    fn ok() -> Self {
        Self {
            success: true,
            ..Self::default()
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn resolve_format(flag: Option<OutputFormat>, cfg: Option<OutputFormat>) -> OutputFormat {
    flag.or(cfg).unwrap_or_default()
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    ensure_dir(&args.out)?;
    let path = args.config.as_deref();
    macro_rules! prepare {
        ($ty:ty) => {{
            let mut cfg: $ty = config::load(path)?;
            if let Some(seed) = args.seed {
                cfg.master_seed = seed;
            }
            let format = resolve_format(args.format, cfg.output_format);
            (cfg, format)
        }};
    }
    match args.command {
        Command::Verify => {
            let (cfg, format) = prepare!(VerifyConfig);
            verify(&cfg, &args.out, format)
        }
        Command::DrSweep => {
            let (cfg, format) = prepare!(DrSweepConfig);
            dr_sweep(&cfg, &args.out, format)
        }
        Command::Profiles => {
            let (cfg, format) = prepare!(ProfilesConfig);
            profiles(&cfg, &args.out, format)
        }
        Command::Pcs => {
            let (cfg, format) = prepare!(PcsCommandConfig);
            pcs_solve(&cfg, &args.out, format)
        }
        Command::Tradeoff => {
            let (cfg, format) = prepare!(TradeoffConfig);
            tradeoff(&cfg, &args.out, format)
        }
        Command::Codebook => {
            let (cfg, format) = prepare!(CodebookConfig);
            codebook(&cfg, &args.out, format)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub master_seed: u64,
    pub all_pass: bool,
    pub checks: Vec<Check>,
}

fn check(checks: &mut Vec<Check>, name: String, value: f64, tolerance: f64) {
    checks.push(Check {
        pass: value.abs() <= tolerance,
        name,
        value,
        tolerance,
    });
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn verify_report(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let dims = cfg.frame.dims()?;
    let snr = from_db(cfg.snr_in_db);
    let scene = Scene::single_target(dims, snr, 3.0 % dims.n as f64, 5.0 % dims.m as f64)?;
    let mut checks = Vec::new();
    let mut stream = 0u64;
    for spec in &cfg.constellations {
        let c = spec.uniform()?;
        for kind in FilterKind::ALL {
            let f = Filter::new(kind, snr);
            let tag = format!("{}/{kind}", spec.label());
            stream += 1;
            let seed = derive_seed(cfg.master_seed, stream);
            let id = identity_checks(&c, &f, &scene, cfg.identity_trials, seed)?;
            check(
                &mut checks,
                format!("{tag} theorem2_max_rel"),
                id.theorem2_max_rel,
                1e-9,
            );
            check(
                &mut checks,
                format!("{tag} corollary1_max_rel"),
                id.corollary1_max_rel,
                1e-10,
            );
            check(
                &mut checks,
                format!("{tag} corollary1_islr_rel"),
                id.corollary1_islr_rel,
                1e-10,
            );
            check(
                &mut checks,
                format!("{tag} parseval_max_rel"),
                id.parseval_max_rel,
                1e-10,
            );
            check(
                &mut checks,
                format!("{tag} theorem1_rel"),
                id.theorem1_rel,
                cfg.theorem1_tol,
            );

            let closed = metrics_closed_form(&c, &f, dims, snr, 1.0)?;
            stream += 1;
            let seed = derive_seed(cfg.master_seed, stream);
            let emp = empirical_metrics(&c, &f, &scene, cfg.table_trials, seed)?;
            check(
                &mut checks,
                format!("{tag} mse_rel"),
                rel(emp.mse, closed.mse),
                cfg.table_tol,
            );
            check(
                &mut checks,
                format!("{tag} snr_out_rel"),
                rel(emp.snr_out, closed.snr_out),
                cfg.table_tol,
            );
            check(
                &mut checks,
                format!("{tag} islr_abs"),
                emp.islr - closed.islr,
                0.02,
            );
        }
    }
    let psk = ShapedConstellation::uniform(Family::Psk, 4)?;
    let mut worst: f64 = 0.0;
    for db in (-20..=30).map(f64::from) {
        let s = from_db(db);
        let drs: Vec<f64> = FilterKind::ALL
            .iter()
            .map(|&k| Ok(metrics_closed_form(&psk, &Filter::new(k, s), dims, s, 1.0)?.dr))
            .collect::<Result<_>>()?;
        for d in &drs[1..] {
            worst = worst.max(rel(*d, drs[0]));
        }
    }
    check(&mut checks, "PSK dr_filter_spread_rel".into(), worst, 1e-12);
    let x = crossover_snr_in(&ShapedConstellation::uniform(Family::Qam, 64)?)?;
    check(
        &mut checks,
        "64-QAM crossover_db_minus_6.458".into(),
        to_db(x) - 6.458,
        1e-3,
    );
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        master_seed: cfg.master_seed,
        all_pass,
        checks,
    })
}

pub fn verify(cfg: &VerifyConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let report = verify_report(cfg)?;
    let path = out.join("verify_report.json");
    write_text(&path, &serde_json::to_string_pretty(&report)?)?;
    let mut table = Table::new(&["check", "value", "tolerance", "pass", "provenance"]);
    let provenance = format!("empirical(seed={})", cfg.master_seed);
    for c in &report.checks {
        table.push(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.tolerance.into(),
            if c.pass { "pass" } else { "FAIL" }.into(),
            provenance.as_str().into(),
        ]);
    }
    let mut outcome = Outcome::ok();
    outcome.files.push(path);
    outcome
        .files
        .push(table.write(out, "verify_checks", format)?);
    let failed: Vec<&Check> = report.checks.iter().filter(|c| !c.pass).collect();
    outcome.summary.push(format!(
        "{} checks, {} failed",
        report.checks.len(),
        failed.len()
    ));
    for c in failed {
        outcome.summary.push(format!(
            "FAIL {}: {:e} > {:e}",
            c.name, c.value, c.tolerance
        ));
    }
    outcome.success = report.all_pass;
    Ok(outcome)
}

pub fn dr_sweep_table(cfg: &DrSweepConfig) -> Result<Table> {
    let c = cfg.constellation.uniform()?;
    let rows = closed_form_dr_sweep(&c, cfg.frame.dims()?, &cfg.grid()?)?;
    let mut table = Table::new(&[
        "snr_in_db",
        "dr_mf_db",
        "dr_rf_db",
        "dr_wf_db",
        "dr_mf_linear",
        "dr_rf_linear",
        "dr_wf_linear",
        "provenance",
    ]);
    for r in rows {
        table.push(vec![
            r.snr_in_db.into(),
            to_db(r.dr_mf).into(),
            to_db(r.dr_rf).into(),
            to_db(r.dr_wf).into(),
            r.dr_mf.into(),
            r.dr_rf.into(),
            r.dr_wf.into(),
            "closed-form".into(),
        ]);
    }
    Ok(table)
}

pub fn dr_sweep(cfg: &DrSweepConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let table = dr_sweep_table(cfg)?;
    let mut outcome = Outcome::ok();
    outcome.files.push(table.write(out, "dr_sweep", format)?);
    let col = |name| table.column(name).expect("numeric column");
    let crossing = find_crossing_db(&col("snr_in_db"), &col("dr_mf_db"), &col("dr_rf_db"));
    match crossing {
        Some(x) => outcome
            .summary
            .push(format!("MF/RF columns cross at {x:.3} dB")),
        None => outcome.summary.push("MF/RF columns do not cross".into()),
    }
    if let Ok(x) = crossover_snr_in(&cfg.constellation.uniform()?) {
        outcome
            .summary
            .push(format!("analytic crossover {:.3} dB", to_db(x)));
    }
    Ok(outcome)
}

/// Per-frame pedestal levels reported by `profiles`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PedestalSummary {
    pub n: usize,
    pub m: usize,
    pub expected_peak: f64,
    pub expected_pedestal: f64,
    pub empirical_peak: f64,
    pub empirical_pedestal: f64,
}

impl PedestalSummary {
    pub fn expected_db_below_peak(&self) -> f64 {
        to_db(self.expected_pedestal / self.expected_peak)
    }

    pub fn empirical_db_below_peak(&self) -> f64 {
        to_db(self.empirical_pedestal / self.empirical_peak)
    }
}

pub fn profiles_data(cfg: &ProfilesConfig) -> Result<Vec<(PedestalSummary, Table)>> {
    let c = cfg.constellation.uniform()?;
    let snr = from_db(cfg.snr_in_db);
    let filter = Filter::new(cfg.filter, snr);
    let mut out = Vec::new();
    for (i, frame) in cfg.frames.iter().enumerate() {
        let dims = frame.dims()?;
        let scene = Scene::single_target(dims, snr, 0.0, 0.0)?;
        let expected: Vec<f64> = (0..dims.len())
            .map(|idx| {
                let (k, p) = ((idx / dims.m) as f64, (idx % dims.m) as f64);
                Ok(expected_dd_power(
                    k,
                    p,
                    (0.0, 0.0),
                    &c,
                    &filter,
                    dims,
                    snr,
                    1.0,
                    cfg.kernel,
                )?)
            })
            .collect::<Result<_>>()?;
        let seed = derive_seed(cfg.master_seed, i as u64);
        let empirical = empirical_dd_power(&c, &filter, &scene, cfg.trials, seed)?;
        let far = far_region_mask(&scene, FAR_REGION_MIN_DISTANCE);
        let far_mean = |map: &[f64]| {
            let (sum, count) = map
                .iter()
                .zip(&far)
                .filter(|(_, &f)| f)
                .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
            sum / count as f64
        };
        let summary = PedestalSummary {
            n: dims.n,
            m: dims.m,
            expected_peak: expected[0],
            expected_pedestal: far_mean(&expected),
            empirical_peak: empirical[0],
            empirical_pedestal: far_mean(&empirical),
        };
        let mut table = Table::new(&[
            "slice",
            "bin",
            "expected_db_norm",
            "empirical_db_norm",
            "expected_linear",
            "empirical_linear",
            "provenance",
        ]);
        let provenance = format!(
            "expected=closed-form;empirical(trials={};seed={seed})",
            cfg.trials
        );
        let mut push = |slice: &str, bin: usize, idx: usize| {
            table.push(vec![
                slice.into(),
                bin.into(),
                to_db(expected[idx] / summary.expected_peak).into(),
                to_db(empirical[idx] / summary.empirical_peak).into(),
                expected[idx].into(),
                empirical[idx].into(),
                provenance.as_str().into(),
            ]);
        };
        for k in 0..dims.n {
            push("zero-doppler", k, k * dims.m);
        }
        for p in 0..dims.m {
            push("zero-delay", p, p);
        }
        out.push((summary, table));
    }
    Ok(out)
}

pub fn profiles(cfg: &ProfilesConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let data = profiles_data(cfg)?;
    let mut outcome = Outcome::ok();
    let mut summary = Table::new(&[
        "N",
        "M",
        "expected_pedestal_db_below_peak",
        "empirical_pedestal_db_below_peak",
        "expected_peak_linear",
        "expected_pedestal_linear",
        "empirical_peak_linear",
        "empirical_pedestal_linear",
        "provenance",
    ]);
    for (s, table) in &data {
        outcome
            .files
            .push(table.write(out, &format!("profile_{}x{}", s.n, s.m), format)?);
        summary.push(vec![
            s.n.into(),
            s.m.into(),
            s.expected_db_below_peak().into(),
            s.empirical_db_below_peak().into(),
            s.expected_peak.into(),
            s.expected_pedestal.into(),
            s.empirical_peak.into(),
            s.empirical_pedestal.into(),
            format!(
                "expected=closed-form;empirical(trials={};master_seed={})",
                cfg.trials, cfg.master_seed
            )
            .into(),
        ]);
        outcome.summary.push(format!(
            "{}x{}: pedestal {:.2} dB (expected) / {:.2} dB (empirical) relative to peak",
            s.n,
            s.m,
            s.expected_db_below_peak(),
            s.empirical_db_below_peak()
        ));
    }
    outcome
        .files
        .push(summary.write(out, "profiles_summary", format)?);
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
struct SolutionReport<'a> {
    master_seed: u64,
    filter: FilterKind,
    snr_in_db: f64,
    comm_snr_db: f64,
    c0_requested: f64,
    c0_effective: f64,
    c_lo: f64,
    c_hi: f64,
    mse_floor: f64,
    sensing_mse: f64,
    air_bits_bank: f64,
    air_bits_mc: f64,
    air_mc_std_err: f64,
    lambda1: f64,
    lambda2: f64,
    outer_iters: usize,
    converged: bool,
    warnings: &'a [String],
    probs: &'a [f64],
}

fn trace_table(sol_trace: &[pcs::IterRecord]) -> Table {
    let mut t = Table::new(&[
        "iter",
        "objective_nats",
        "mse_linear",
        "power_linear",
        "lambda1",
        "lambda2",
    ]);
    for r in sol_trace {
        t.push(vec![
            r.iter.into(),
            r.objective.into(),
            r.mse.into(),
            r.power.into(),
            r.lambda1.into(),
            r.lambda2.into(),
        ]);
    }
    t
}

pub fn pcs_solve(cfg: &PcsCommandConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let core = cfg.solver.to_core(derive_seed(cfg.master_seed, 0))?;
    let bank = pcs::build_bank(&core)?;
    let (result, trace) = mba_solve_traced(&core, &bank);
    let mut outcome = Outcome::ok();
    outcome
        .files
        .push(trace_table(&trace).write(out, "pcs_trace", format)?);
    let sol = result?;
    let shaped = sol.constellation(&core)?;
    let air_cfg = isac_core::air::AirConfig {
        seed: derive_seed(cfg.master_seed, 1),
        ..core.comm
    };
    let mc = air::air_estimate_detailed(&shaped, &air_cfg)?;
    let provenance = format!(
        "pcs(master_seed={};bank={})",
        cfg.master_seed, core.bank_samples
    );
    let cb = sol.codebook(&core, provenance)?;
    let cb_path = out.join("codebook.json");
    write_text(&cb_path, &cb.to_json()?)?;
    outcome.files.push(cb_path);
    let report = SolutionReport {
        master_seed: cfg.master_seed,
        filter: core.filter,
        snr_in_db: cfg.solver.snr_in_db,
        comm_snr_db: cfg.solver.comm_snr_db,
        c0_requested: sol.c0_requested,
        c0_effective: sol.c0_effective,
        c_lo: sol.c_lo,
        c_hi: sol.c_hi,
        mse_floor: sol.mse_floor,
        sensing_mse: sol.sensing_mse,
        air_bits_bank: sol.air_bits,
        air_bits_mc: mc.bits,
        air_mc_std_err: mc.std_err,
        lambda1: sol.lambda1,
        lambda2: sol.lambda2,
        outer_iters: sol.outer_iters,
        converged: sol.converged,
        warnings: &sol.warnings,
        probs: &sol.probs,
    };
    let path = out.join("pcs_solution.json");
    write_text(&path, &serde_json::to_string_pretty(&report)?)?;
    outcome.files.push(path);
    for w in &sol.warnings {
        outcome.summary.push(format!("warning: {w}"));
    }
    outcome.summary.push(format!(
        "AIR {:.4} bits (bank) / {:.4} ± {:.4} bits (Monte Carlo), MSE {:.4e} of budget {:.4e}, {} iterations",
        sol.air_bits, mc.bits, mc.std_err, sol.sensing_mse, sol.c0_effective, sol.outer_iters
    ));
    Ok(outcome)
}

/// Trade-off rows: the shaped grid points plus a uniform-QAM reference.
#[derive(Debug, Clone)]
pub struct TradeoffRow {
    pub label: String,
    pub c0: f64,
    pub solution: Option<PcsSolution>,
    pub air_bits: f64,
    pub sensing_mse: f64,
    pub pd: f64,
    pub error: Option<String>,
}

pub fn tradeoff_rows(cfg: &TradeoffConfig) -> Result<Vec<TradeoffRow>> {
    let core = cfg.solver.to_core(derive_seed(cfg.master_seed, 0))?;
    let dims = core.dims()?;
    let grid = match &cfg.c0_grid {
        Some(g) => g.clone(),
        None => pcs::c0_grid(&core, cfg.grid_points)?,
    };
    let points = pcs::tradeoff_sweep(&core, &grid)?;
    let scene = two_target_scene(
        dims,
        cfg.solver.snr_in_db,
        cfg.detection.weak_rel_db,
        cfg.detection.weak_bin,
    )?;
    let scene = Scene {
        noise_var: core.noise_var,
        targets: scene
            .targets
            .iter()
            .map(|t| isac_core::channel::Target {
                gain: isac_core::channel::TargetGain::Random {
                    var: t.gain.power() * core.noise_var,
                },
                ..*t
            })
            .collect(),
        ..scene
    };
    let filter = Filter::new(core.filter, core.snr_in());
    // one detection seed for every row: common random numbers across budgets
    let pd_seed = derive_seed(cfg.master_seed, 2);
    let pd = |c: &ShapedConstellation| {
        detection_probability(
            &scene,
            c,
            &filter,
            &cfg.detection.cfar,
            cfg.detection.trials,
            pd_seed,
        )
    };
    let mut rows = Vec::new();
    for p in points {
        match p.result {
            Ok(sol) => {
                let shaped = sol.constellation(&core)?;
                rows.push(TradeoffRow {
                    label: "pcs".into(),
                    c0: p.c0,
                    air_bits: sol.air_bits,
                    sensing_mse: sol.sensing_mse,
                    pd: pd(&shaped)?,
                    solution: Some(sol),
                    error: None,
                });
            }
            Err(e) => rows.push(TradeoffRow {
                label: "pcs".into(),
                c0: p.c0,
                solution: None,
                air_bits: f64::NAN,
                sensing_mse: f64::NAN,
                pd: f64::NAN,
                error: Some(e.to_string()),
            }),
        }
    }
    let uniform = core.alphabet()?;
    let bank = pcs::build_bank(&core)?;
    let closed = metrics_closed_form(&uniform, &filter, dims, core.gain_var, core.noise_var)?;
    rows.push(TradeoffRow {
        label: "uniform".into(),
        c0: f64::NAN,
        solution: None,
        air_bits: bank.mutual_information(uniform.probs()) / std::f64::consts::LN_2,
        sensing_mse: closed.mse,
        pd: pd(&uniform)?,
        error: None,
    });
    Ok(rows)
}

pub fn tradeoff(cfg: &TradeoffConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let rows = tradeoff_rows(cfg)?;
    let mut table = Table::new(&[
        "label",
        "c0_linear",
        "air_bits",
        "sensing_mse_linear",
        "pd",
        "status",
        "provenance",
    ]);
    let provenance = format!(
        "air=sample-bank;pd=empirical(trials={};master_seed={})",
        cfg.detection.trials, cfg.master_seed
    );
    let mut outcome = Outcome::ok();
    for r in &rows {
        table.push(vec![
            r.label.as_str().into(),
            r.c0.into(),
            r.air_bits.into(),
            r.sensing_mse.into(),
            r.pd.into(),
            r.error.clone().unwrap_or_else(|| "ok".into()).into(),
            provenance.as_str().into(),
        ]);
        if let Some(e) = &r.error {
            outcome.summary.push(format!("c0 = {:.4e}: {e}", r.c0));
        }
    }
    outcome.files.push(table.write(out, "tradeoff", format)?);
    outcome.summary.push(format!(
        "{} budgets solved",
        rows.iter().filter(|r| r.solution.is_some()).count()
    ));
    Ok(outcome)
}

pub fn codebook(cfg: &CodebookConfig, out: &Path, format: OutputFormat) -> Result<Outcome> {
    let c = match &cfg.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Codebook::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{path}: {e}")))?
                .constellation()?
        }
        None => {
            let base = cfg.constellation.uniform()?;
            match &cfg.weights {
                Some(w) => base.with_probs(w.clone())?,
                None => base,
            }
        }
    };
    let dims = cfg.frame.dims()?;
    let snr = from_db(cfg.snr_in_db);
    let mut cb =
        Codebook::from_constellation(&c, format!("codebook(master_seed={})", cfg.master_seed));
    cb.snr_in = Some(snr);
    let path = out.join("codebook.json");
    write_text(&path, &cb.to_json()?)?;
    let mut table = Table::new(&[
        "filter",
        "mse_linear",
        "snr_out_db",
        "islr_db",
        "dr_db",
        "nmse_linear",
        "snr_out_linear",
        "islr_linear",
        "dr_linear",
        "provenance",
    ]);
    for kind in FilterKind::ALL {
        let m = metrics_closed_form(&c, &Filter::new(kind, snr), dims, snr, 1.0)?;
        table.push(vec![
            kind.to_string().into(),
            m.mse.into(),
            to_db(m.snr_out).into(),
            to_db(m.islr).into(),
            to_db(m.dr).into(),
            m.nmse.into(),
            m.snr_out.into(),
            m.islr.into(),
            m.dr.into(),
            "closed-form".into(),
        ]);
    }
    let mut outcome = Outcome::ok();
    outcome.files.push(path);
    outcome
        .files
        .push(table.write(out, "codebook_metrics", format)?);
    outcome.summary.push(format!(
        "{}: entropy {:.4} bits, E|x|^4 = {:.6}, E|x|^-2 = {:.6}",
        ConstellationSpec {
            family: c.family(),
            order: c.order()
        }
        .label(),
        c.entropy_bits(),
        c.moment_abs_pow(4.0),
        c.moment_abs_pow(-2.0)
    ));
    Ok(outcome)
}
