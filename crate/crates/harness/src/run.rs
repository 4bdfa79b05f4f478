//! Dispatch of one experiment to the core routines, and artifact writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dlab_core::audit::{
    convergence_slope, energy_bootstrap, increment_decomposition, mass_check, perturbation_experiment,
    IncrementReport, PerturbationSetup,
};
use dlab_core::dynamics::{duhamel_residual, solve_forced, ForcingTerm, RegularizedNonlinearity, Trajectory};
use dlab_core::norms::{
    energy_n, grid_besov_value, spacetime_norm, summarize, NormName, NormSpec, RadialRandomization, RadialSpace,
    StrichartzSetup, StrichartzStats,
};
use dlab_core::randomization::{
    build_atlas, sample_randomization, DecompositionAtlas, Distribution, RandomCoefficientFamily,
};
use dlab_core::{Field, Layout};
use serde::Serialize;
use serde_json::json;

use crate::config::{Backend, DatumConfig, ExperimentConfig, Kind, NormConfig, Shape};
use crate::error::HarnessError;
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::report::{format_float, Artifacts, Cell, Diagnostics, Table};
use crate::schedule::{run_tasks, with_pool, Summary};

/// Mass drift accepted under `--check`.
pub const MASS_TOLERANCE: f64 = 1e-8;
/// Relative `E_n` drift accepted under `--check` for unforced runs.
pub const ENERGY_TOLERANCE: f64 = 1e-6;
/// Deterministic reconstruction must reproduce the truncated datum to roundoff.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Relative paths in the config resolve against this directory.
    pub base_dir: PathBuf,
    pub out: PathBuf,
    pub workers: usize,
    /// Turn failed invariants into a failing exit status.
    pub check: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// Text printed on stdout (the `norms` record).
    pub stdout: String,
}

impl RunOutcome {
    /// 0 on success; 1 when a task failed, or a check failed under `--check`.
    pub fn exit_code(&self, check: bool) -> i32 {
        if !self.manifest.failed_tasks.is_empty() || (check && !self.manifest.passed) {
            1
        } else {
            0
        }
    }
}

#[derive(Default)]
struct Collected {
    diagnostics: Diagnostics,
    checks: BTreeMap<String, bool>,
    nan_flags: Vec<String>,
    failed: Vec<usize>,
    stdout: String,
}

impl Collected {
    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    fn table(&mut self, arts: &mut Artifacts, name: &str, t: &Table) -> Result<(), HarnessError> {
        if t.nan_count() > 0 {
            self.nan_flags.push(name.to_string());
        }
        arts.csv(name, t)
    }
}

/// Runs `config`, writes its artifacts and `manifest.json` into `opts.out`.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    validate(config)?;
    let start = Instant::now();
    let mut arts = Artifacts::new(&opts.out)?;
    let mut c = Collected::default();
    with_pool(opts.workers, || dispatch(config, opts, &mut arts, &mut c))??;
    let manifest = RunManifest::assemble(
        config.kind.command(),
        config.seed,
        config.to_toml(),
        &arts,
        start.elapsed().as_secs_f64(),
        c.diagnostics,
        c.nan_flags,
        c.checks,
        c.failed,
    );
    let path = opts.out.join(MANIFEST_FILE);
    std::fs::write(&path, crate::report::to_json(&manifest)?)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(RunOutcome { manifest, stdout: c.stdout })
}

fn validate(config: &ExperimentConfig) -> Result<(), HarnessError> {
    if let Some(mc) = &config.montecarlo {
        if mc.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
    }
    if config.samples == Some(0) {
        return Err(HarnessError::Config("samples must be >= 1".into()));
    }
    if let Some(a) = &config.audit {
        if a.dts.len() < 2 {
            return Err(HarnessError::Config("audit needs at least two step sizes".into()));
        }
    }
    Ok(())
}

fn dispatch(
    config: &ExperimentConfig,
    opts: &RunOptions,
    arts: &mut Artifacts,
    c: &mut Collected,
) -> Result<(), HarnessError> {
    match config.kind {
        Kind::Decompose => decompose(config, opts, arts, c),
        Kind::Randomize => randomize(config, opts, arts, c),
        Kind::Evolve => evolve(config, opts, arts, c),
        Kind::Norms => norms(config, opts, arts, c),
        Kind::Montecarlo => montecarlo(config, opts, arts, c),
        Kind::EnergyAudit => energy_audit(config, opts, arts, c),
        Kind::Perturb => perturb(config, opts, arts, c),
    }
}

fn field_bytes(f: &Field) -> Result<Vec<u8>, HarnessError> {
    let mut buf = Vec::new();
    f.write_binary(&mut buf, Layout::Complex128)?;
    Ok(buf)
}

fn datum(config: &ExperimentConfig, opts: &RunOptions, which: &Option<DatumConfig>, name: &str) -> Result<Field, HarnessError> {
    let grid = config.require(&config.grid, "grid")?.build()?;
    config.require(which, name)?.build(grid, &opts.base_dir)
}

fn atlas(config: &ExperimentConfig, opts: &RunOptions) -> Result<DecompositionAtlas, HarnessError> {
    let f = datum(config, opts, &config.datum, "datum")?;
    let trunc = *config.require(&config.truncation, "truncation")?;
    Ok(build_atlas(&f, trunc)?)
}

fn family(config: &ExperimentConfig) -> Result<RandomCoefficientFamily, HarnessError> {
    let dist = *config.require(&config.distribution, "distribution")?;
    Ok(RandomCoefficientFamily::new(dist, config.seed))
}

fn decompose(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let atlas = atlas(config, opts)?;
    let shells = atlas.shells();
    let centres = atlas.centres();
    let total = atlas.truncated().spectral_mass();
    let piece_sum = atlas.piece_norm_sq_sum();

    // Angular bookkeeping on the lowest shell, at the centre nearest the origin.
    let parseval = match (shells.first(), centres.iter().min_by_key(|c| c.iter().map(|a| a * a).sum::<i64>())) {
        (Some(&m), Some(&centre)) => Some(atlas.parseval_check(m, centre, 16 * m.ceil() as usize + 16)?),
        _ => None,
    };

    arts.write("truncated.bin", field_bytes(atlas.truncated())?)?;
    arts.json(
        "atlas.json",
        &json!({
            "truncation": atlas.truncation(),
            "shells": shells,
            "centres": centres,
            "basis": atlas.basis(),
            "piece_count": atlas.piece_count(),
            "residual": atlas.residual(),
            "truncated_norm_sq": total,
            "piece_norm_sq_sum": piece_sum,
            "parseval": parseval,
        }),
    )?;
    let mut t = Table::new("Littlewood-Paley shell", &["m"]);
    for m in &shells {
        t.push(vec![(*m).into()]);
    }
    c.table(arts, "shells.csv", &t)?;

    c.diagnostics.set("residual", atlas.residual());
    c.diagnostics.set("piece_count", atlas.piece_count() as f64);
    c.check("residual_within_tolerance", atlas.residual() <= atlas.truncation().tolerance);
    if let Some(p) = parseval {
        c.diagnostics.set("parseval_relative_error", p.relative_error);
        c.check("parseval", p.relative_error < 1e-8);
    }
    Ok(())
}

fn randomize(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let atlas = atlas(config, opts)?;
    let fam = family(config)?;
    let samples = config.samples.unwrap_or(1);
    let base = atlas.truncated();
    let base_norm = base.l2_norm();

    let ones = sample_randomization(&atlas, &RandomCoefficientFamily::new(Distribution::Ones, config.seed), 0);
    let reconstruction = ones.field.relative_l2_error(base);
    c.diagnostics.set("ones_reconstruction_error", reconstruction);
    c.check("deterministic_reconstruction", reconstruction < RECONSTRUCTION_TOLERANCE);

    let draws = run_tasks(samples, rayon::current_num_threads(), |i| {
        let s = sample_randomization(&atlas, &fam, i as u64);
        let bytes = field_bytes(&s.field).map_err(|e| e.to_string())?;
        Ok((s.field.l2_norm(), s.field.h_norm(0.5), bytes))
    })?;
    let mut t = Table::new("randomized sample norms", &["trial", "l2_norm", "h_half_norm", "l2_ratio", "status"]);
    for (i, d) in draws.into_iter().enumerate() {
        match d {
            Ok((l2, h, bytes)) => {
                arts.write(&format!("sample_{i:04}.bin"), bytes)?;
                let ratio = if base_norm > 0.0 { l2 / base_norm } else { f64::NAN };
                t.push(vec![i.into(), l2.into(), h.into(), ratio.into(), "ok".into()]);
            }
            Err(e) => {
                c.failed.push(i);
                t.push(vec![i.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), format!("failed: {e}").into()]);
            }
        }
    }
    c.table(arts, "samples.csv", &t)
}

fn regularization(config: &ExperimentConfig) -> Result<RegularizedNonlinearity, HarnessError> {
    let s = config.require(&config.solver, "solver")?;
    Ok(RegularizedNonlinearity::for_dimension(s.level, config.d_param)?.with_strength(s.strength))
}

fn forcing(config: &ExperimentConfig, opts: &RunOptions) -> Result<ForcingTerm, HarnessError> {
    let grid = config.require(&config.grid, "grid")?.build()?;
    let s = config.require(&config.solver, "solver")?;
    Ok(match &config.datum {
        None => ForcingTerm::zero(grid),
        Some(d) => {
            let f = d.build(grid, &opts.base_dir)?;
            match s.forcing_level {
                Some(k) => ForcingTerm::new(&f, k, format!("P<=2^{k} F")),
                None => ForcingTerm::untruncated(&f, "F"),
            }
        }
    })
}

fn evolve(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let s = *config.require(&config.solver, "solver")?;
    let v0 = datum(config, opts, &config.initial, "initial")?;
    let reg = regularization(config)?;
    let forcing = forcing(config, opts)?;
    let traj = solve_forced(&v0, &forcing, &reg, (s.t0, s.t1), s.dt, s.stride)?;

    let mut buf = Vec::new();
    traj.write_binary(&mut buf)?;
    arts.write("trajectory.bin", buf)?;

    let mass = mass_check(&traj, &forcing)?;
    let energies: Vec<f64> = traj.states().iter().map(|v| energy_n(v, &reg)).collect();
    let e0 = energies[0];
    let energy_drift = energies
        .iter()
        .map(|e| if e0 == 0.0 { (e - e0).abs() } else { (e - e0).abs() / e0.abs() })
        .fold(0.0, f64::max);
    let duhamel = duhamel_residual(&traj, &forcing, &reg)?;

    let mut t = Table::new("conservation along trajectory", &["t", "mass_drift", "energy_n"]);
    for ((time, d), e) in traj.times().iter().zip(&mass.drift).zip(&energies) {
        t.push(vec![(*time).into(), (*d).into(), (*e).into()]);
    }
    c.table(arts, "conservation.csv", &t)?;

    c.diagnostics.set("mass_drift", mass.max_drift);
    c.diagnostics.set("duhamel_residual", duhamel);
    c.diagnostics.set("snapshots", traj.len() as f64);
    c.diagnostics.set("dt", traj.dt());
    c.check("mass_conserved", mass.max_drift < MASS_TOLERANCE);
    if forcing.is_zero() {
        c.diagnostics.set("energy_drift", energy_drift);
        c.check("energy_conserved", energy_drift < ENERGY_TOLERANCE);
    }
    Ok(())
}

fn norm_spec(n: &NormConfig, d: f64) -> Result<NormSpec, HarnessError> {
    let need = |x: Option<f64>, what: &str| {
        x.ok_or_else(|| HarnessError::Config(format!("norm '{}' needs '{what}'", n.name)))
    };
    let spec = match NormName::parse(&n.name)? {
        NormName::LebesgueQr => NormSpec::lebesgue(need(n.q, "q")?, need(n.r, "r")?, n.deriv)?,
        NormName::Besov => NormSpec::besov(need(n.q, "q")?, need(n.r, "r")?, need(n.weight, "weight")?)?,
        name => NormSpec::named(name, d, n.sigma)?,
    };
    Ok(spec)
}

fn norms(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let path = opts.base_dir.join(config.require(&config.trajectory, "trajectory")?);
    if config.norms.is_empty() {
        return Err(HarnessError::Config("kind 'norms' needs at least one [[norms]] entry".into()));
    }
    let specs = config.norms.iter().map(|n| norm_spec(n, config.d_param)).collect::<Result<Vec<_>, _>>()?;
    let mut file = std::io::BufReader::new(
        std::fs::File::open(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?,
    );
    let traj = Trajectory::read_binary(&mut file)?;

    let mut t = Table::new("space-time norm", &["name", "q", "r", "value"]);
    let mut record = Vec::new();
    for (n, spec) in config.norms.iter().zip(&specs) {
        let v = spacetime_norm(&traj, spec);
        t.push(vec![n.name.clone().into(), spec.q().into(), spec.r().into(), v.into()]);
        c.diagnostics.set(&format!("norm_{}", n.name), v);
        record.push(format_float(v));
    }
    c.stdout = record.join(",") + "\n";
    c.table(arts, "norms.csv", &t)
}

#[derive(Serialize)]
struct MonteCarloSummary<'a> {
    backend: Backend,
    setup: StrichartzSetup,
    stats: &'a StrichartzStats,
    summary: Summary,
    max_normalized: f64,
    bound: f64,
}

fn radial_profile(d: &DatumConfig) -> impl Fn(f64) -> f64 + '_ {
    move |r| {
        let x = r / d.width;
        d.amplitude
            * match d.shape {
                Shape::Gaussian => (-x * x).exp(),
                Shape::Sech => 1.0 / x.cosh(),
                Shape::Zero => 0.0,
            }
    }
}

fn montecarlo(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let mc = config.require(&config.montecarlo, "montecarlo")?.clone();
    let fam = family(config)?;
    let setup = StrichartzSetup {
        s: mc.s,
        q: mc.q,
        p: mc.p,
        p0: mc.p0,
        d_param: config.d_param,
        window: mc.window,
        snapshots: mc.snapshots,
        sigma_t: mc.sigma_t,
    };
    let gain = setup.gain()?;
    let reg = mc.s + gain;
    let workers = rayon::current_num_threads();

    let (hs, results) = match mc.backend {
        Backend::Grid => {
            let atlas = atlas(config, opts)?;
            let hs = atlas.truncated().h_norm(mc.s);
            let r = run_tasks(mc.trials, workers, |i| {
                let g = sample_randomization(&atlas, &fam, i as u64).field;
                grid_besov_value(&g, &setup, reg).map_err(|e| e.to_string())
            })?;
            (hs, r)
        }
        Backend::Radial => {
            let d = config.require(&config.datum, "datum")?;
            let space = RadialSpace::new(mc.radial_dim, mc.r_max, mc.rho_max)?;
            let rand = RadialRandomization::new(&space, &space.sample(radial_profile(d)))?;
            let hs = space.h_norm(rand.datum_spectrum(), mc.s);
            let r = run_tasks(mc.trials, workers, |i| {
                let v = space.besov_value(&rand.sample_spectrum(&fam, i as u64), &setup, reg);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("non-finite value {v}"))
                }
            })?;
            (hs, r)
        }
    };
    if hs == 0.0 {
        return Err(HarnessError::Config("datum has zero H^s norm".into()));
    }

    let values: Vec<Option<f64>> = results.iter().map(|r| r.as_ref().ok().copied()).collect();
    let mut t = Table::new("randomized Strichartz value", &["trial", "value", "status"]);
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(v) => t.push(vec![i.into(), (*v).into(), "ok".into()]),
            Err(e) => {
                c.failed.push(i);
                t.push(vec![i.into(), f64::NAN.into(), format!("failed: {e}").into()]);
            }
        }
    }
    c.table(arts, "draws.csv", &t)?;

    let stats = summarize(&values, hs, gain, mc.s);
    let max_normalized = stats.max_normalized();
    let mut m = Table::new("moment ratio over sqrt(beta)", &["beta", "moment", "ratio", "normalized", "stderr"]);
    for s in &stats.moments {
        m.push(vec![s.beta.into(), s.moment.into(), s.ratio.into(), s.normalized.into(), s.stderr.into()]);
    }
    c.table(arts, "moments.csv", &m)?;
    arts.json(
        "summary.json",
        &MonteCarloSummary {
            backend: mc.backend,
            setup,
            stats: &stats,
            summary: Summary::reduce(&values),
            max_normalized,
            bound: mc.bound,
        },
    )?;

    c.diagnostics.set("gain", gain);
    c.diagnostics.set("hs_norm", hs);
    c.diagnostics.set("max_normalized", max_normalized);
    c.check("normalized_ratio_bounded", max_normalized < mc.bound);
    Ok(())
}

#[derive(Serialize)]
struct AuditReport {
    interval: (f64, f64),
    dts: Vec<f64>,
    increments: Vec<IncrementReport>,
    slope: f64,
    slope_tolerance: f64,
    mass_drift: f64,
    bootstrap: Option<dlab_core::audit::BootstrapReport>,
}

fn energy_audit(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let s = *config.require(&config.solver, "solver")?;
    let audit = config.require(&config.audit, "audit")?.clone();
    let v0 = datum(config, opts, &config.initial, "initial")?;
    let reg = regularization(config)?;
    let forcing = forcing(config, opts)?;
    let interval = (s.t0, s.t1);

    let runs = run_tasks(audit.dts.len(), rayon::current_num_threads(), |i| {
        let traj = solve_forced(&v0, &forcing, &reg, interval, audit.dts[i], 1).map_err(|e| e.to_string())?;
        let inc = increment_decomposition(&traj, &forcing, &reg, s.t0, s.t1).map_err(|e| e.to_string())?;
        Ok((traj, inc))
    })?;
    let mut trajs = Vec::new();
    let mut incs = Vec::new();
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok((t, inc)) => {
                trajs.push(t);
                incs.push(inc);
            }
            Err(e) => return Err(HarnessError::Worker(format!("audit run at dt = {}: {e}", audit.dts[i]))),
        }
    }
    let residuals: Vec<f64> = incs.iter().map(|r| r.residual.abs()).collect();
    let slope = convergence_slope(&audit.dts, &residuals)?;

    // Mass and bootstrap on the finest run.
    let finest = audit
        .dts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mass = mass_check(&trajs[finest], &forcing)?;
    let bootstrap = if config.d_param > 6.0 {
        Some(energy_bootstrap(&trajs[finest], &forcing, &reg, config.d_param, audit.eta, audit.sigma)?)
    } else {
        None
    };

    let mut t = Table::new(
        "energy increment decomposition",
        &["dt", "lhs", "term_boundary", "term_forcing", "term_en", "residual"],
    );
    for (dt, r) in audit.dts.iter().zip(&incs) {
        t.push(vec![
            Cell::Float(*dt),
            r.lhs.into(),
            r.term_boundary.into(),
            r.term_forcing.into(),
            r.term_en.into(),
            r.residual.into(),
        ]);
    }
    c.table(arts, "increments.csv", &t)?;
    if let Some(b) = &bootstrap {
        let mut bt = Table::new(
            "energy bootstrap constant",
            &["t_start", "t_end", "z_norm", "energy_sup", "energy_prev", "forcing", "constant"],
        );
        for iv in &b.intervals {
            bt.push(vec![
                iv.interval.0.into(),
                iv.interval.1.into(),
                iv.z_norm.into(),
                iv.energy_sup.into(),
                iv.energy_prev.into(),
                iv.forcing.into(),
                iv.constant.into(),
            ]);
        }
        c.table(arts, "bootstrap.csv", &bt)?;
        c.diagnostics.set("bootstrap_constant_max", b.constant_max);
    }
    arts.json(
        "audit.json",
        &AuditReport {
            interval,
            dts: audit.dts.clone(),
            increments: incs,
            slope,
            slope_tolerance: audit.slope_tolerance,
            mass_drift: mass.max_drift,
            bootstrap,
        },
    )?;

    c.diagnostics.set("slope", slope);
    c.diagnostics.set("mass_drift", mass.max_drift);
    c.diagnostics.set("finest_residual", residuals[finest]);
    c.check("second_order", (slope - 2.0).abs() <= audit.slope_tolerance);
    c.check("mass_conserved", mass.max_drift < MASS_TOLERANCE);
    Ok(())
}

fn perturb(config: &ExperimentConfig, opts: &RunOptions, arts: &mut Artifacts, c: &mut Collected) -> Result<(), HarnessError> {
    let s = *config.require(&config.solver, "solver")?;
    let p = config.require(&config.perturb, "perturb")?.clone();
    let v0 = datum(config, opts, &config.initial, "initial")?;
    let f = datum(config, opts, &config.datum, "datum")?;
    let setup = PerturbationSetup {
        interval: (s.t0, s.t1),
        dt: s.dt,
        stride: s.stride,
        d_param: config.d_param,
        reg: regularization(config)?,
        smallness: p.smallness,
    };
    let report = perturbation_experiment(&v0, &f, &p.eps, &setup)?;

    let mut t = Table::new(
        "perturbation distance and X interpolation",
        &["eps", "dist_wdot", "dist_x", "interp_lhs", "interp_rhs", "interp_holds"],
    );
    for r in &report.runs {
        t.push(vec![
            r.eps.into(),
            r.dist_wdot.into(),
            r.dist_x.into(),
            r.interpolation.lhs.into(),
            r.interpolation.rhs.into(),
            (r.interpolation.holds as i64).into(),
        ]);
    }
    c.table(arts, "perturbation.csv", &t)?;
    arts.json("perturbation.json", &report)?;

    c.diagnostics.set("base_wdot", report.base_wdot);
    c.check("monotone", report.monotone());
    c.check("interpolation", report.interpolation_holds());
    Ok(())
}

/// Resolves relative config paths against the config file's directory.
pub fn base_dir_of(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}
