//! Batch runner behind the `orbitlab` binary.
//!
//! Each subcommand resolves its parameters from the optional TOML config plus
//! global flags, computes everything in memory, and only then writes
//! `<experiment>.csv` and `<experiment>.json` into the output directory.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::boundary::{Arc, BoundaryPoint};
use crate::error::{Error, Result};
use crate::experiments::{self, report, CountMode, CountReport, ProductOrbit};
use crate::homspace::{self, bins::DomainBins, sampling};
use crate::lattice::{enumerate, load_cache, save_cache, LatticeSpec, OrbitSet};
use crate::lie::GroupSpec;
use crate::patterson;
use crate::selftest;
use crate::volume;
use crate::wavefront;
use config::{full_arc, parse_arc, parse_group, parse_lattice, parse_mat2, Config, LatticeConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "ORBITLAB_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "orbitlab-cache";

pub const EXIT_OK: i32 = 0;
/// A numeric failure, or a self-test suite with violations.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN_EXPERIMENT: i32 = 3;
pub const EXIT_INVALID_INPUT: i32 = 4;
pub const EXIT_DOMAIN: i32 = 5;
pub const EXIT_RESOURCE: i32 = 6;
pub const EXIT_MISSING_CACHE: i32 = 7;
pub const EXIT_CACHE_IO: i32 = 8;

#[derive(Debug, Parser)]
#[command(name = "orbitlab", version, about = "Lattice orbit counting and equidistribution experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the CSV and JSON results.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Orbit cache directory; overrides the config and the environment.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Run the experiment named by `experiment` in the config.
    Run,
    /// Enumerate a lattice orbit up to radius t and write the cache.
    Enumerate,
    /// Compare the orbit count in a ball with the volume prediction.
    CountBall,
    /// Count orbit points in K/M sectors.
    CountSector,
    /// Count with a boundary-point constraint.
    CountBoundary,
    /// Joint sector and boundary counts.
    CountJoint,
    /// Count in bisector regions of a product lattice.
    CountBisector,
    /// Log volume of Cartan balls on a grid of radii.
    Volume,
    /// Asymptotic fit of normalized ball volumes.
    Fit,
    /// Patterson-Sullivan partial sums and measure.
    Ps,
    /// Reduce a matrix into the truncated fundamental domain.
    Reduce,
    /// Equidistribution of translated orbits.
    Translate,
    /// Equidistribution under the solvable subgroup.
    Solvable,
    /// Wavefront check for a Cartan radius.
    Wavefront,
    /// Probe wavefront behaviour near chamber walls.
    WallProbe,
    /// Angular rigidity estimate.
    Rigidity,
    /// Run the seeded invariant suites.
    Selftest,
}

pub const EXPERIMENTS: [&str; 16] = [
    "enumerate",
    "count-ball",
    "count-sector",
    "count-boundary",
    "count-joint",
    "count-bisector",
    "volume",
    "fit",
    "ps",
    "reduce",
    "translate",
    "solvable",
    "wavefront",
    "wall-probe",
    "rigidity",
    "selftest",
];

impl Command {
    fn name(self) -> Option<&'static str> {
        use Command::*;
        let i = match self {
            Run => return None,
            Enumerate => 0,
            CountBall => 1,
            CountSector => 2,
            CountBoundary => 3,
            CountJoint => 4,
            CountBisector => 5,
            Volume => 6,
            Fit => 7,
            Ps => 8,
            Reduce => 9,
            Translate => 10,
            Solvable => 11,
            Wavefront => 12,
            WallProbe => 13,
            Rigidity => 14,
            Selftest => 15,
        };
        Some(EXPERIMENTS[i])
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    UnknownExperiment(String),
    Run(Error),
    /// The experiment ran and its artifacts were written, but a check failed.
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::UnknownExperiment(m) => {
                write!(f, "unknown experiment `{m}`; expected one of: {}", EXPERIMENTS.join(", "))
            }
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::UnknownExperiment(_) => EXIT_UNKNOWN_EXPERIMENT,
            CliError::Failed(_) => EXIT_FAILED,
            CliError::Run(e) => match e {
                Error::InvalidInput(_) => EXIT_INVALID_INPUT,
                Error::Domain(_) => EXIT_DOMAIN,
                Error::Resource(_) => EXIT_RESOURCE,
                Error::MissingCache(_) => EXIT_MISSING_CACHE,
                Error::Cache { .. } | Error::Io { .. } => EXIT_CACHE_IO,
                Error::Numeric(_) => EXIT_FAILED,
            },
        }
    }
}

/// Files written by a successful run.
#[derive(Debug)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub json: PathBuf,
}

struct Ctx {
    cfg: Config,
    config_sha: String,
    cache_dir: PathBuf,
    out_dir: PathBuf,
    seed: u64,
    caches: Vec<PathBuf>,
}

struct Artifacts {
    csv: String,
    params: Value,
    results: Value,
    /// Non-empty when an internal check of the experiment failed.
    failure: Option<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Cache directory precedence: flag, then environment, then config, then the default.
pub fn resolve_cache_dir(flag: Option<&Path>, cfg: &Config) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.cache_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

/// Cache file for a rank-one lattice: kind code, level, and a digest of the conjugator.
pub fn cache_path(dir: &Path, lat: &LatticeSpec) -> PathBuf {
    let (code, level) = lat.kind.code();
    let mut bytes = Vec::new();
    for b in lat.conjugator.blocks() {
        for v in b.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let tag = &sha256_hex(&bytes)[..12];
    dir.join(format!("orbit-k{code}-l{level}-{tag}.wlc"))
}

pub fn run(cli: &Cli) -> std::result::Result<RunOutput, CliError> {
    let (cfg, raw) = match &cli.config {
        Some(p) => {
            let raw = fs::read(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            let text = std::str::from_utf8(&raw).map_err(|_| CliError::Usage("config is not UTF-8".into()))?;
            let cfg: Config = toml::from_str(text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?;
            (cfg, raw)
        }
        None => (Config::default(), Vec::new()),
    };
    let name = match (cli.command.name(), cfg.experiment.as_deref()) {
        (None, None) => return Err(CliError::Usage("`run` needs `experiment` in the config".into())),
        (None, Some(e)) => e.to_string(),
        (Some(c), Some(e)) if e != c => {
            return Err(CliError::Usage(format!("config names experiment `{e}` but subcommand is `{c}`")))
        }
        (Some(c), _) => c.to_string(),
    };
    if !EXPERIMENTS.contains(&name.as_str()) {
        return Err(CliError::UnknownExperiment(name));
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut ctx = Ctx {
        cache_dir: resolve_cache_dir(cli.cache_dir.as_deref(), &cfg),
        out_dir: cli.out_dir.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        config_sha: sha256_hex(&raw),
        cfg,
        caches: Vec::new(),
    };
    let art = dispatch(&name, &mut ctx)?;
    let out = write_artifacts(&name, &ctx, &art)?;
    match art.failure {
        Some(m) => Err(CliError::Failed(m)),
        None => Ok(out),
    }
}

fn write_artifacts(name: &str, ctx: &Ctx, art: &Artifacts) -> Result<RunOutput> {
    let mut caches = Vec::new();
    for p in &ctx.caches {
        let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
        caches.push(json!({ "path": p.display().to_string(), "sha256": sha256_hex(&bytes) }));
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": name,
        "parameters": art.params,
        "results": art.results,
        "passed": art.failure.is_none(),
        "provenance": {
            "config_sha256": ctx.config_sha,
            "caches": caches,
            "seed": ctx.seed,
            "version": env!("CARGO_PKG_VERSION"),
        },
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Numeric(format!("json: {e}")))?;
    text.push('\n');
    fs::create_dir_all(&ctx.out_dir).map_err(|e| Error::io(&ctx.out_dir, e))?;
    let stem = name.replace('-', "_");
    let csv = ctx.out_dir.join(format!("{stem}.csv"));
    let json_path = ctx.out_dir.join(format!("{stem}.json"));
    fs::write(&csv, &art.csv).map_err(|e| Error::io(&csv, e))?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    Ok(RunOutput { csv, json: json_path })
}

fn dispatch(name: &str, ctx: &mut Ctx) -> std::result::Result<Artifacts, CliError> {
    Ok(match name {
        "enumerate" => cmd_enumerate(ctx)?,
        "count-ball" => cmd_count_ball(ctx)?,
        "count-sector" => cmd_count_sector(ctx)?,
        "count-boundary" => cmd_count_boundary(ctx, false)?,
        "count-joint" => cmd_count_boundary(ctx, true)?,
        "count-bisector" => cmd_count_bisector(ctx)?,
        "volume" => cmd_volume(ctx)?,
        "fit" => cmd_fit(ctx)?,
        "ps" => cmd_ps(ctx)?,
        "reduce" => cmd_reduce(ctx)?,
        "translate" => cmd_translate(ctx)?,
        "solvable" => cmd_solvable(ctx)?,
        "wavefront" => cmd_wavefront(ctx)?,
        "wall-probe" => cmd_wall_probe(ctx)?,
        "rigidity" => cmd_rigidity(ctx)?,
        "selftest" => cmd_selftest(ctx)?,
        other => return Err(CliError::UnknownExperiment(other.into())),
    })
}

fn lattice_config(ctx: &Ctx) -> LatticeConfig {
    ctx.cfg.lattice.clone().unwrap_or(LatticeConfig { kind: "psl2z".into(), level: None, conjugator: None })
}

fn lattice_params(lc: &LatticeConfig, lat: &LatticeSpec) -> Value {
    let conj: Vec<f64> = lat.conjugator.blocks().iter().flat_map(|b| b.transpose().iter().copied().collect::<Vec<_>>()).collect();
    json!({ "kind": lc.kind, "name": lat.kind.to_string(), "level": lat.kind.code().1, "conjugator": conj })
}

fn radius(ctx: &Ctx, lat: &LatticeSpec) -> Result<f64> {
    let t = ctx.cfg.t.unwrap_or(12.0);
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {t}")));
    }
    if t > lat.cap() {
        return Err(Error::Resource(format!("T = {t} exceeds the enumeration cap {} for {}", lat.cap(), lat.kind)));
    }
    Ok(t)
}

fn load_rank_one(ctx: &mut Ctx, lat: &LatticeSpec, t: f64) -> Result<OrbitSet> {
    let path = cache_path(&ctx.cache_dir, lat);
    let orbit = load_cache(&path).map_err(|e| match e {
        Error::MissingCache(_) => Error::MissingCache(format!(
            "no orbit cache for {} at {}; run `orbitlab enumerate` with t >= {t}",
            lat.kind,
            path.display()
        )),
        e => e,
    })?;
    if orbit.lattice != *lat {
        return Err(Error::Cache {
            path: path.clone(),
            kind: crate::error::CacheErrorKind::KindMismatch(format!("cache holds {}, expected {}", orbit.lattice.kind, lat.kind)),
        });
    }
    if orbit.t < t {
        return Err(Error::MissingCache(format!(
            "cache {} covers T = {}, need {t}; rerun `orbitlab enumerate` with a larger t",
            path.display(),
            orbit.t
        )));
    }
    ctx.caches.push(path);
    Ok(orbit)
}

fn load_product(ctx: &mut Ctx, lat: &LatticeSpec, t: f64) -> Result<ProductOrbit> {
    let f0 = load_rank_one(ctx, &lat.factor(0), t)?;
    let f1 = load_rank_one(ctx, &lat.factor(1), t)?;
    Ok(ProductOrbit { lattice: lat.clone(), t: f0.t.min(f1.t), factors: [f0, f1] })
}

fn count_artifacts(params: Value, rep: &CountReport) -> Result<Artifacts> {
    Ok(Artifacts {
        csv: report::to_csv(rep),
        params,
        results: serde_json::to_value(rep).map_err(|e| Error::Numeric(e.to_string()))?,
        failure: None,
    })
}

fn cmd_enumerate(ctx: &mut Ctx) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    let t = radius(ctx, &lat)?;
    let orbits = if lat.kind.is_product() {
        vec![enumerate(&lat.factor(0), t)?, enumerate(&lat.factor(1), t)?]
    } else {
        vec![enumerate(&lat, t)?]
    };
    let mut csv = String::from("factor,t,points,cache\n");
    let mut points = Vec::new();
    for (i, o) in orbits.iter().enumerate() {
        let path = cache_path(&ctx.cache_dir, &o.lattice);
        save_cache(o, &path)?;
        let _ = writeln!(csv, "{i},{},{},{}", o.t, o.len(), path.display());
        points.push(o.len());
        ctx.caches.push(path);
    }
    Ok(Artifacts {
        csv,
        params: json!({ "lattice": lattice_params(&lc, &lat), "t": t, "cap": lat.cap() }),
        results: json!({ "points": points }),
        failure: None,
    })
}

fn cmd_count_ball(ctx: &mut Ctx) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    let t = radius(ctx, &lat)?;
    let rep = if lat.kind.is_product() {
        experiments::count_ball_product(&load_product(ctx, &lat, t)?, t)?
    } else {
        experiments::count_ball(&load_rank_one(ctx, &lat, t)?, t)?
    };
    count_artifacts(json!({ "lattice": lattice_params(&lc, &lat), "t": t }), &rep)
}

fn rank_one(lat: &LatticeSpec, what: &str) -> Result<()> {
    if lat.kind.is_product() {
        return Err(Error::domain(format!("{what} needs a rank-one lattice")));
    }
    Ok(())
}

fn partition(n: usize, offset: f64) -> Result<Vec<Arc>> {
    if n == 0 {
        return Err(Error::invalid("need at least one arc"));
    }
    Ok(Arc::partition(n, offset))
}

fn cmd_count_sector(ctx: &mut Ctx) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    rank_one(&lat, "count-sector")?;
    let t = radius(ctx, &lat)?;
    let n = ctx.cfg.arcs.unwrap_or(8);
    let offset = ctx.cfg.offset.unwrap_or(0.0);
    let mode = match ctx.cfg.mode.as_deref().unwrap_or("gamma") {
        "gamma" => CountMode::Gamma,
        "point" => CountMode::Point,
        m => return Err(Error::invalid(format!("mode must be `gamma` or `point`, got `{m}`"))),
    };
    let arcs = partition(n, offset)?;
    let orbit = load_rank_one(ctx, &lat, t)?;
    let rep = experiments::count_sector(&orbit, &arcs, t, mode)?;
    let params = json!({ "lattice": lattice_params(&lc, &lat), "t": t, "arcs": n, "offset": offset, "mode": mode });
    count_artifacts(params, &rep)
}

fn boundary_point(ctx: &Ctx) -> BoundaryPoint {
    ctx.cfg.boundary_angle.map(BoundaryPoint::new).unwrap_or_else(BoundaryPoint::infinity)
}

fn cmd_count_boundary(ctx: &mut Ctx, joint: bool) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    rank_one(&lat, "boundary counting")?;
    let t = radius(ctx, &lat)?;
    let offset = ctx.cfg.offset.unwrap_or(0.0);
    let b = boundary_point(ctx);
    let orbit = load_rank_one(ctx, &lat, t)?;
    let deco = experiments::decorate_boundary(&orbit, b)?;
    let angle = ctx.cfg.boundary_angle.map_or(Value::from("infinity"), Value::from);
    if joint {
        let ns = ctx.cfg.arcs.unwrap_or(4);
        let nb = ctx.cfg.boundary_arcs.unwrap_or(4);
        let rep = experiments::count_joint(&orbit, &deco, &partition(ns, offset)?, &partition(nb, offset)?, t)?;
        let params = json!({ "lattice": lattice_params(&lc, &lat), "t": t, "arcs": ns, "boundary_arcs": nb, "offset": offset, "boundary_angle": angle });
        let mut art = count_artifacts(params, &rep.report)?;
        art.results = serde_json::to_value(&rep).map_err(|e| Error::Numeric(e.to_string()))?;
        Ok(art)
    } else {
        let n = ctx.cfg.arcs.unwrap_or(8);
        let rep = experiments::count_boundary(&orbit, &deco, &partition(n, offset)?, t)?;
        let params = json!({ "lattice": lattice_params(&lc, &lat), "t": t, "arcs": n, "offset": offset, "boundary_angle": angle });
        count_artifacts(params, &rep)
    }
}

fn arcs_of(v: &Option<Vec<[f64; 2]>>, name: &str) -> Result<Vec<Arc>> {
    let v = v.as_ref().ok_or_else(|| Error::invalid(format!("`{name}` is required")))?;
    v.iter().map(|a| parse_arc(*a)).collect()
}

fn cmd_count_bisector(ctx: &mut Ctx) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    let t = radius(ctx, &lat)?;
    let o1 = arcs_of(&ctx.cfg.omega1, "omega1")?;
    let o2 = arcs_of(&ctx.cfg.omega2, "omega2")?;
    let params = json!({ "lattice": lattice_params(&lc, &lat), "t": t, "omega1": ctx.cfg.omega1, "omega2": ctx.cfg.omega2 });
    let rep = if lat.kind.is_product() {
        let pair = |v: Vec<Arc>, n: &str| -> Result<[Arc; 2]> {
            v.try_into().map_err(|_| Error::invalid(format!("`{n}` needs one arc per factor")))
        };
        let (o1, o2) = (pair(o1, "omega1")?, pair(o2, "omega2")?);
        experiments::count_bisector_product(&load_product(ctx, &lat, t)?, o1, o2, t)?
    } else {
        experiments::count_bisector(&load_rank_one(ctx, &lat, t)?, &o1, &o2, t)?
    };
    count_artifacts(params, &rep)
}

fn group(ctx: &Ctx, default: &str) -> Result<(String, GroupSpec)> {
    let g = ctx.cfg.group.clone().unwrap_or_else(|| default.into());
    let spec = parse_group(&g)?;
    Ok((g, spec))
}

fn cmd_volume(ctx: &mut Ctx) -> Result<Artifacts> {
    let (g, spec) = group(ctx, "sl2")?;
    let rs = volume::root_system(&spec);
    let grid = ctx.cfg.t_grid.clone().unwrap_or_else(|| vec![5.0, 10.0, 20.0, 30.0]);
    let eps = ctx.cfg.epsilon;
    let mut csv = String::from("t,log_ball_volume,volume_ratio\n");
    for &t in &grid {
        let lv = volume::log_ball_volume(&rs, t)?;
        let ratio = eps.map(|e| volume::volume_ratio(&rs, t, e)).transpose()?;
        let _ = writeln!(csv, "{t},{lv},{}", ratio.map_or(String::new(), |r| r.to_string()));
    }
    Ok(Artifacts {
        csv,
        params: json!({ "group": g, "t_grid": grid, "epsilon": eps }),
        results: json!({ "rank": rs.rank_r, "delta": rs.delta }),
        failure: None,
    })
}

fn cmd_fit(ctx: &mut Ctx) -> Result<Artifacts> {
    let (g, spec) = group(ctx, "sl3")?;
    let rs = volume::root_system(&spec);
    let grid = ctx.cfg.t_grid.clone().unwrap_or_else(|| (15..=30).map(f64::from).collect());
    let fit = volume::asymptotic_fit(&rs, &grid)?;
    let free = volume::free_exponent_fit(&rs, &grid)?;
    let mut csv = String::from("t,residual,free_residual\n");
    for (i, t) in grid.iter().enumerate() {
        let _ = writeln!(csv, "{t},{},{}", fit.residuals[i], free.residuals[i]);
    }
    Ok(Artifacts {
        csv,
        params: json!({ "group": g, "t_grid": grid }),
        results: json!({ "pinned": fit, "free": free, "delta": rs.delta }),
        failure: None,
    })
}

fn cmd_ps(ctx: &mut Ctx) -> Result<Artifacts> {
    let lc = lattice_config(ctx);
    let lat = parse_lattice(&lc)?;
    rank_one(&lat, "ps")?;
    let t = radius(ctx, &lat)?;
    let s_grid = ctx.cfg.s.clone().unwrap_or_else(|| vec![1.5, 1.35, 1.25, 1.2]);
    let n = ctx.cfg.arcs.unwrap_or(8);
    let offset = ctx.cfg.offset.unwrap_or(0.0);
    let cutoff = ctx.cfg.cutoff.unwrap_or(patterson::INTERIOR_CUTOFF);
    let arcs = partition(n, offset)?;
    let orbit = load_rank_one(ctx, &lat, t)?.restrict(t)?;
    let delta = patterson::critical_exponent(&orbit)?;
    let poles = patterson::pole_order_check(&orbit, &s_grid, t)?;
    let mut csv = format!("{},tail_bound\n", report::CSV_HEADER);
    let mut measures = Vec::new();
    for &s in &s_grid {
        let m = patterson::ps_measure(&orbit, s, &arcs, t, cutoff)?;
        let bw = m.boundary_weights();
        let bmass = 1.0 - m.interior_mass;
        for (i, b) in m.measure.bins.iter().enumerate() {
            let w = m.measure.weights[i] / m.measure.total;
            let (pred, ratio) = match bw.get(i) {
                Some(&bwi) => {
                    let nu = (b.hi[0] - b.lo[0]) / std::f64::consts::TAU;
                    (bmass * nu, (bwi / nu).to_string())
                }
                None => (m.interior_mass, String::new()),
            };
            let lo = b.lo.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let hi = b.hi.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let _ = writeln!(csv, "s={s}:{},{lo},{hi},{w},{pred},{ratio},{}", b.id, m.tail_bound);
        }
        measures.push(json!({ "s": s, "max_deviation": m.max_deviation(), "interior_mass": m.interior_mass, "tail_bound": m.tail_bound }));
    }
    Ok(Artifacts {
        csv,
        params: json!({ "lattice": lattice_params(&lc, &lat), "t_max": t, "s": s_grid, "arcs": n, "offset": offset, "cutoff": cutoff }),
        results: json!({ "critical_exponent": delta, "pole_series": poles, "pole_spread": patterson::pole_spread(&poles), "measures": measures }),
        failure: None,
    })
}

fn matrix_or_identity(v: &Option<Vec<f64>>) -> Result<[f64; 4]> {
    v.as_deref().map_or(Ok([1.0, 0.0, 0.0, 1.0]), parse_mat2)
}

fn cmd_reduce(ctx: &mut Ctx) -> Result<Artifacts> {
    let m = parse_mat2(ctx.cfg.matrix.as_deref().ok_or_else(|| Error::invalid("`matrix` is required"))?)?;
    let r = homspace::reduce_mat(&m)?;
    let w = r.word;
    let csv = format!("word_a,word_b,word_c,word_d,x,y,frame_angle\n{},{},{},{},{},{},{}\n", w[0], w[1], w[2], w[3], r.z[0], r.z[1], r.frame_angle);
    Ok(Artifacts {
        csv,
        params: json!({ "matrix": m }),
        results: serde_json::to_value(&r).map_err(|e| Error::Numeric(e.to_string()))?,
        failure: None,
    })
}

fn domain_bins(ctx: &Ctx) -> Result<(DomainBins, Value)> {
    let (bands, strips, height) = (ctx.cfg.bands.unwrap_or(5), ctx.cfg.strips.unwrap_or(4), ctx.cfg.height.unwrap_or(4.0));
    let bins = DomainBins::equal_area(bands, strips, height)?;
    Ok((bins, json!({ "bands": bands, "strips": strips, "height": height })))
}

fn measure_csv(prefix: &str, m: &crate::experiments::EmpiricalMeasure, expected: &[f64], out: &mut String) {
    for (i, b) in m.bins.iter().enumerate() {
        let pred = expected[i] * m.total;
        let lo = b.lo.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let hi = b.hi.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        let _ = writeln!(out, "{prefix}{},{lo},{hi},{},{pred},{}", b.id, m.weights[i], m.weights[i] / pred);
    }
}

fn cmd_translate(ctx: &mut Ctx) -> Result<Artifacts> {
    let y = homspace::reduce_mat(&matrix_or_identity(&ctx.cfg.observer)?)?;
    let margins = ctx.cfg.margins.clone().unwrap_or_else(|| vec![0.0, 2.0, 4.0, 8.0]);
    let arc = ctx.cfg.arc.unwrap_or_else(full_arc);
    let samples = ctx.cfg.samples.unwrap_or(1_000_000);
    let (bins, bin_params) = domain_bins(ctx)?;
    let steps = sampling::translate_equidistribution(&y, &margins, parse_arc(arc)?, &bins, samples, ctx.seed)?;
    let mut csv = format!("{}\n", report::CSV_HEADER);
    for st in &steps {
        measure_csv(&format!("m={}:", st.margin), &st.measure, &bins.expected, &mut csv);
    }
    let devs: Vec<_> = steps.iter().map(|s| json!({ "margin": s.margin, "max_deviation": s.max_deviation })).collect();
    Ok(Artifacts {
        csv,
        params: json!({ "observer": y.rep, "margins": margins, "arc": arc, "samples": samples, "seed": ctx.seed, "bins": bin_params }),
        results: json!({ "steps": devs }),
        failure: None,
    })
}

fn cmd_solvable(ctx: &mut Ctx) -> Result<Artifacts> {
    let g = matrix_or_identity(&ctx.cfg.matrix)?;
    let y = matrix_or_identity(&ctx.cfg.observer)?;
    let t = ctx.cfg.t.unwrap_or(14.0);
    let arc = ctx.cfg.arc.unwrap_or_else(full_arc);
    let samples = ctx.cfg.samples.unwrap_or(1_000_000);
    let (bins, bin_params) = domain_bins(ctx)?;
    let sw = sampling::solvable_sweep(&g, &y, t, parse_arc(arc)?, &bins, samples, ctx.seed)?;
    let mut csv = format!("{}\n", report::CSV_HEADER);
    measure_csv("", &sw.measure, &bins.expected, &mut csv);
    Ok(Artifacts {
        csv,
        params: json!({ "g": g, "observer": y, "t": t, "arc": arc, "samples": samples, "seed": ctx.seed, "bins": bin_params }),
        results: json!({
            "max_deviation": sw.max_deviation,
            "rho_omega": sw.rho_omega,
            "rho_total": sw.rho_total,
            "arc_ratio": sw.arc_ratio,
            "arc_ratio_se": sw.arc_ratio_se,
        }),
        failure: None,
    })
}

fn cmd_wavefront(ctx: &mut Ctx) -> Result<Artifacts> {
    let (g, spec) = group(ctx, "sl2")?;
    let c = ctx.cfg.c.unwrap_or(1.0);
    let u = ctx.cfg.u_radius.unwrap_or(0.1);
    let v = ctx.cfg.v_radius.unwrap_or(u);
    let samples = ctx.cfg.samples.unwrap_or(10_000);
    let base = wavefront::WavefrontConfig::new(c, u, v, ctx.cfg.o_radius.unwrap_or(0.0), samples, ctx.seed);
    let (rep, searched) = match ctx.cfg.o_radius {
        Some(_) => (wavefront::wavefront_check(&spec, &base)?, false),
        None => match wavefront::search_radius(&spec, &base)?.report {
            Some(r) => (r, true),
            None => (wavefront::wavefront_check(&spec, &wavefront::WavefrontConfig { o_radius: 1e-6, ..base.clone() })?, true),
        },
    };
    let mut csv = String::from("side,samples,passes,worst_k1,worst_a,worst_k2\n");
    for (side, r) in [("right", rep.right), ("left", rep.left)] {
        let _ = writeln!(csv, "{side},{samples},{},{},{},{}", r.passes, r.worst_k1, r.worst_a, r.worst_k2);
    }
    let failure = (!rep.passed()).then(|| format!("wavefront property failed at O radius {}", rep.config.o_radius));
    Ok(Artifacts {
        csv,
        params: json!({ "group": g, "c": c, "u_radius": u, "v_radius": v, "o_radius": rep.config.o_radius, "o_radius_searched": searched, "samples": samples, "seed": ctx.seed, "max_a_norm": rep.config.max_a_norm }),
        results: serde_json::to_value(&rep).map_err(|e| Error::Numeric(e.to_string()))?,
        failure,
    })
}

fn cmd_wall_probe(ctx: &mut Ctx) -> Result<Artifacts> {
    let (g, spec) = group(ctx, "sl2")?;
    let u = ctx.cfg.u_radius.unwrap_or(0.1);
    let samples = ctx.cfg.samples.unwrap_or(200);
    let probe = wavefront::wall_failure_probe(&spec, u, samples, ctx.seed)?;
    let mut csv = String::from("o_radius,witnessed,k2_distance\n");
    for (o, w) in probe.o_radii.iter().zip(&probe.witnesses) {
        let _ = writeln!(csv, "{o},{},{}", w.is_some(), w.as_ref().map_or(String::new(), |w| w.k2_distance.to_string()));
    }
    Ok(Artifacts {
        csv,
        params: json!({ "group": g, "u_radius": u, "samples": samples, "seed": ctx.seed, "o_radii": probe.o_radii }),
        results: serde_json::to_value(&probe).map_err(|e| Error::Numeric(e.to_string()))?,
        failure: None,
    })
}

fn cmd_rigidity(ctx: &mut Ctx) -> Result<Artifacts> {
    let (g, spec) = group(ctx, "sl3")?;
    let c = ctx.cfg.c.unwrap_or(1.0);
    let u = ctx.cfg.u_radius.unwrap_or(0.1);
    let samples = ctx.cfg.samples.unwrap_or(10_000);
    let r = wavefront::angular_rigidity(&spec, c, u, samples, ctx.seed)?;
    let csv = format!("c,u0_radius,samples,epsilon,violations\n{},{},{},{},{}\n", r.c, r.u0_radius, r.samples, r.epsilon, r.violations);
    Ok(Artifacts {
        csv,
        params: json!({ "group": g, "c": c, "u0_radius": u, "samples": samples, "seed": ctx.seed }),
        results: serde_json::to_value(&r).map_err(|e| Error::Numeric(e.to_string()))?,
        failure: None,
    })
}

type Suite = fn(&GroupSpec, usize, u64) -> selftest::SuiteReport;

fn cmd_selftest(ctx: &mut Ctx) -> Result<Artifacts> {
    let groups: Vec<String> = match &ctx.cfg.group {
        Some(g) => vec![g.clone()],
        None => vec!["sl2".into(), "sl3".into(), "sl2xsl2".into()],
    };
    let samples = ctx.cfg.samples.unwrap_or(10_000);
    let suites: [Suite; 5] = [
        selftest::cartan_round_trip,
        selftest::distance_symmetry,
        selftest::helgason_inequality,
        selftest::adjoint_inner_product,
        selftest::weyl_invariance,
    ];
    let mut csv = String::from("suite,group,samples,violations,worst,tolerance,passed\n");
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for g in &groups {
        let spec = parse_group(g)?;
        for suite in suites {
            let r = suite(&spec, samples, ctx.seed);
            let _ = writeln!(csv, "{},{g},{},{},{},{},{}", r.name, r.samples, r.violations, r.worst, r.tolerance, r.passed());
            if !r.passed() {
                failed.push(format!("{}/{g}", r.name));
            }
            reports.push(json!({ "group": g, "report": r }));
        }
    }
    Ok(Artifacts {
        csv,
        params: json!({ "groups": groups, "samples": samples, "seed": ctx.seed }),
        results: json!({ "suites": reports }),
        failure: (!failed.is_empty()).then(|| format!("suites with violations: {}", failed.join(", "))),
    })
}
