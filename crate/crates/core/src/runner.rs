//! Batch runs: configuration, presets, mode dispatch and run artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bounds::{check_certificate, prove, BoundError, Certificate, ProofInputs};
use crate::coeff::{evaluate_u, CoeffGrid, DumpError, IndexPair};
use crate::dft::pow2_above;
use crate::power_series::{parity_csv, parity_experiment, SeriesError, SeriesOrder};
use crate::problem::{ProblemError, ProblemParams, TruncationSet};
use crate::scalar::Scalar;
use crate::solver::{
    branch_csv, continuation, solve, ContinuationConfig, Guess, LoadCoeffs, Nonlinearity, SolveConfig, SolveError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("constraint {constraint} violated: {detail}")]
    Constraint { constraint: &'static str, detail: String },
    #[error("invalid parameter {name}: {detail}")]
    Parameter { name: String, detail: String },
    #[error("unknown preset {0:?}; available: {1}")]
    UnknownPreset(String, String),
    #[error("mode {0} needs {1}")]
    Missing(&'static str, &'static str),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Dump(#[from] DumpError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl From<ProblemError> for RunError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Constraint { constraint, detail } => RunError::Constraint { constraint, detail },
            ProblemError::Parameter { name, detail } => RunError::Parameter { name: name.to_string(), detail },
            other => RunError::Parameter { name: "problem".into(), detail: other.to_string() },
        }
    }
}

impl RunError {
    /// `2` for configuration problems, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_)
            | RunError::Constraint { .. }
            | RunError::Parameter { .. }
            | RunError::UnknownPreset(..)
            | RunError::Missing(..) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Prove,
    Continue,
    Parity,
    CheckCert,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Prove => "prove",
            Mode::Continue => "continue",
            Mode::Parity => "parity",
            Mode::CheckCert => "check-cert",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    #[default]
    F64,
    F32,
}

fn default_nu() -> [f64; 2] {
    [1.0 + 1e-7, 1.0 + 1e-7]
}

fn default_rho_bar() -> [f64; 2] {
    [0.09531, 0.09531]
}

fn default_density() -> usize {
    4
}

fn default_orders() -> Vec<usize> {
    vec![14, 15]
}

/// A run description. Unset truncations are derived from `n_gal`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub c: f64,
    pub q: [f64; 2],
    pub n_gal: IndexPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_jac: Option<IndexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_alias: Option<IndexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fft: Option<IndexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_col: Option<IndexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_row: Option<IndexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tail: Option<IndexPair>,
    #[serde(default = "default_nu")]
    pub nu: [f64; 2],
    #[serde(default = "default_rho_bar")]
    pub rho_bar: [f64; 2],
    #[serde(default)]
    pub scalar: ScalarKind,
    #[serde(default = "Nonlinearity::default_full")]
    pub nonlinearity: Nonlinearity,
    /// Start from stored coefficients instead of solving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuation: Option<ContinuationConfig>,
    #[serde(default = "default_orders")]
    pub parity_orders: Vec<usize>,
    /// Profile mesh points per Fourier mode and direction.
    #[serde(default = "default_density")]
    pub profile_density: usize,
    #[serde(default)]
    pub solver: SolveConfig,
}

impl RunConfig {
    /// A configuration with every optional field at its default.
    pub fn new(mode: Mode, c: f64, q: [f64; 2], n_gal: IndexPair) -> Self {
        RunConfig {
            mode,
            c,
            q,
            n_gal,
            n_jac: None,
            n_alias: None,
            n_fft: None,
            n_col: None,
            n_row: None,
            n_tail: None,
            nu: default_nu(),
            rho_bar: default_rho_bar(),
            scalar: ScalarKind::F64,
            nonlinearity: Nonlinearity::Full,
            coefficients: None,
            certificate: None,
            continuation: None,
            parity_orders: default_orders(),
            profile_density: default_density(),
            solver: SolveConfig::default(),
        }
    }

    /// Parses and validates.
    pub fn from_toml(s: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| RunError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Truncations with defaults: `N^Jac = N^Gal`, `N^Alias = 2N^Gal`,
    /// `N^FFT` the power of two above `2N^Alias`, `N^Col = N^Tail = N^Jac`
    /// and `N^Row = N^Alias`.
    pub fn trunc(&self) -> TruncationSet {
        let nj = self.n_jac.unwrap_or(self.n_gal);
        let na = self.n_alias.unwrap_or(IndexPair(2 * self.n_gal.0, 2 * self.n_gal.1).max(nj));
        let nfft = self.n_fft.unwrap_or(IndexPair(pow2_above(2 * na.0 + 1), pow2_above(2 * na.1 + 1)));
        let mut t = TruncationSet::with_defaults(self.n_gal, nj, na, nfft);
        if let Some(v) = self.n_col {
            t.n_col = v;
        }
        if let Some(v) = self.n_row {
            t.n_row = v;
        }
        if let Some(v) = self.n_tail {
            t.n_tail = v;
        }
        t
    }

    pub fn proof_inputs(&self) -> ProofInputs {
        ProofInputs { c: self.c, q: self.q, trunc: self.trunc(), nu: self.nu, rho_bar: self.rho_bar }
    }

    /// Checks every constraint; returns warnings.
    pub fn validate(&self) -> Result<Vec<String>, RunError> {
        if self.mode == Mode::CheckCert {
            if self.certificate.is_none() {
                return Err(RunError::Missing("check-cert", "a certificate path"));
            }
            return Ok(Vec::new());
        }
        let p = ProblemParams::<f64>::new(self.c, self.q)?;
        for (name, v) in [("nu", self.nu), ("rho_bar", self.rho_bar)] {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(RunError::Parameter { name: name.into(), detail: "must be finite".into() });
            }
        }
        if self.nu.iter().any(|&x| x < 1.0) {
            return Err(RunError::Parameter { name: "nu".into(), detail: format!("must be >= 1, got {:?}", self.nu) });
        }
        if self.rho_bar.iter().any(|&x| x <= 0.0) {
            return Err(RunError::Parameter { name: "rho_bar".into(), detail: format!("must be positive, got {:?}", self.rho_bar) });
        }
        if self.nu.iter().zip(&self.rho_bar).any(|(&n, &r)| n >= r.exp()) {
            return Err(RunError::Constraint {
                constraint: "nu < exp(rho_bar)",
                detail: format!("nu = {:?}, rho_bar = {:?}", self.nu, self.rho_bar),
            });
        }
        if self.profile_density == 0 {
            return Err(RunError::Parameter { name: "profile_density".into(), detail: "must be positive".into() });
        }
        let param = |name: &str, e: &dyn std::fmt::Display| RunError::Parameter { name: name.into(), detail: e.to_string() };
        for &m in &self.parity_orders {
            SeriesOrder::new(m).map_err(|e| param("parity_orders", &e))?;
        }
        if let Nonlinearity::PowerSeries(m) = self.nonlinearity {
            SeriesOrder::new(m).map_err(|e| param("nonlinearity", &e))?;
        }
        self.solver.validate().map_err(|e| param("solver", &e))?;
        if self.mode == Mode::Continue && self.continuation.is_none() {
            return Err(RunError::Missing("continue", "a [continuation] table"));
        }
        Ok(self.trunc().validate(&p)?)
    }
}

impl Nonlinearity {
    fn default_full() -> Self {
        Nonlinearity::Full
    }
}

pub const PRESETS: [&str; 10] =
    ["trivial", "fig4b", "thm1.1", "thm1.1-desk", "fig4a", "fig4c", "fig4d", "fig4e", "fig4f", "parity"];

fn ip(a: usize, b: usize) -> IndexPair {
    IndexPair(a, b)
}

/// Shipped configurations.
pub fn preset(name: &str) -> Result<RunConfig, RunError> {
    let l = |a: f64, b: f64| [std::f64::consts::PI / a, std::f64::consts::PI / b];
    let peak = |amplitude, width| Guess::OnePeak { amplitude, width };
    let mut c = match name {
        "trivial" => {
            let mut c = RunConfig::new(Mode::Prove, 1.3, [0.05, 0.1], ip(10, 10));
            c.n_alias = Some(ip(20, 20));
            c.n_fft = Some(ip(64, 64));
            c.solver.guess = Guess::Zero;
            c
        }
        "fig4b" => {
            let mut c = RunConfig::new(Mode::Prove, 1.3, [0.05, 0.1], ip(60, 20));
            c.n_alias = Some(ip(200, 100));
            c.n_fft = Some(ip(1024, 256));
            c.n_col = Some(ip(230, 110));
            c.n_row = Some(ip(420, 210));
            c.n_tail = Some(ip(70, 30));
            c.rho_bar = [0.05, 0.1];
            c.solver.guess = peak(4.0, 3.0);
            c
        }
        "thm1.1" | "fig4a" => {
            let ng = if name == "fig4a" { ip(65, 65) } else { ip(130, 130) };
            let mut c = RunConfig::new(Mode::Prove, 1.1, l(50.0, 40.0), ng);
            c.n_jac = Some(ip(65, 65));
            c.n_alias = Some(ip(400, 400));
            c.n_fft = Some(ip(1024, 1024));
            c.n_col = Some(ip(300, 300));
            c.n_row = Some(ip(800, 800));
            c.n_tail = Some(ip(140, 140));
            c.solver.guess = peak(8.0, 3.0);
            c
        }
        "thm1.1-desk" => {
            let mut c = RunConfig::new(Mode::Prove, 1.1, l(50.0, 40.0), ip(65, 65));
            c.n_alias = Some(ip(200, 200));
            c.n_fft = Some(ip(512, 512));
            c.n_col = Some(ip(150, 150));
            c.n_row = Some(ip(300, 300));
            c.n_tail = Some(ip(80, 80));
            c.solver.guess = peak(8.0, 3.0);
            c
        }
        "fig4c" => {
            let mut c = RunConfig::new(Mode::Prove, 1.3, [0.05, 0.1], ip(100, 60));
            c.solver.guess = Guess::TwoPeak { amplitude: 4.0, width: 3.0, separation: 12.0 };
            c
        }
        "fig4d" => {
            let mut c = RunConfig::new(Mode::Prove, 1.3, [0.025, 0.1], ip(200, 49));
            c.solver.guess = Guess::Combination { amplitude: 4.0, width: 3.0, separation: 12.0 };
            c
        }
        "fig4e" => {
            let mut c = RunConfig::new(Mode::Prove, 0.9, [0.1, 0.1], ip(60, 60));
            c.solver.guess = peak(10.0, 2.0);
            c
        }
        "fig4f" => {
            let mut c = RunConfig::new(Mode::Prove, 1.4, [0.05, 0.1], ip(80, 40));
            c.solver.guess = peak(3.0, 4.0);
            c
        }
        "parity" => {
            let mut c = RunConfig::new(Mode::Parity, 1.4, [0.05, 0.1], ip(40, 14));
            c.solver.guess = peak(3.0, 4.0);
            c.continuation = Some(ContinuationConfig { c_start: 1.4, c_end: 1.1, step: 0.025, min_step: 0.003 });
            c
        }
        other => return Err(RunError::UnknownPreset(other.into(), PRESETS.join(", "))),
    };
    if name != "trivial" {
        c.solver.max_iters = 60;
    }
    Ok(c)
}

/// `ū` on a uniform mesh of one full period `[−L₁,L₁]×[−L₂,L₂]`, `L = π/q`,
/// as `x1,x2,u` rows.
///
/// The mesh is symmetric under both reflections, so the even extension is
/// exact.
pub fn export_profile<T: Scalar>(abar: &CoeffGrid<T>, q: [f64; 2], density: usize) -> String {
    use rayon::prelude::*;
    use std::fmt::Write;
    let d = abar.dims();
    let m = [2 * density * d.0.max(1) + 1, 2 * density * d.1.max(1) + 1];
    let coord = |i: usize, j: usize| {
        let l = std::f64::consts::PI / q[j];
        let k = 2 * i as i64 - (m[j] as i64 - 1);
        l * k as f64 / (m[j] - 1) as f64
    };
    let qt = [T::lit(q[0]), T::lit(q[1])];
    let rows: Vec<String> = (0..m[0])
        .into_par_iter()
        .map(|i| {
            let x1 = coord(i, 0);
            let mut s = String::new();
            for j in 0..m[1] {
                let x2 = coord(j, 1);
                let u = evaluate_u(abar, qt, [T::lit(x1), T::lit(x2)]).to_f64_exact();
                let _ = writeln!(s, "{x1:e},{x2:e},{u:e}");
            }
            s
        })
        .collect();
    let mut out = String::from("x1,x2,u\n");
    out.extend(rows);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum RunStatus {
    Converged,
    Proven,
    Verified,
    Failed(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub mode: String,
    pub status: RunStatus,
    pub elapsed_s: f64,
    pub threads: usize,
    pub config: RunConfig,
    pub files: Vec<ManifestEntry>,
}

/// Outcome of [`run`]; `exit_code` is `0` iff the run succeeded.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub certificate: Option<Certificate>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Failed(_) => 1,
            _ => 0,
        }
    }
}

struct RunDir {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl RunDir {
    fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.into(), source })?;
        Ok(RunDir { dir: dir.into(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf, RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io { path: parent.into(), source })?;
        }
        fs::write(&path, bytes).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(path.clone());
        Ok(path)
    }

    fn coefficients<T: Scalar>(&mut self, stem: &str, a: &CoeffGrid<T>) -> Result<(), RunError> {
        let a = a.map(|x| x.to_f64_exact());
        self.write(&format!("{stem}.csv"), a.to_csv())?;
        self.write(&format!("{stem}.bin"), a.to_bytes())?;
        Ok(())
    }

    fn manifest(&mut self, cfg: &RunConfig, status: &RunStatus, elapsed: f64) -> Result<(), RunError> {
        let files = self
            .files
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|source| RunError::Io { path: p.clone(), source })?;
                Ok(ManifestEntry {
                    file: p.strip_prefix(&self.dir).unwrap_or(p).display().to_string(),
                    sha256: hex::encode(Sha256::digest(&bytes)),
                    bytes: bytes.len() as u64,
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let m = Manifest {
            program: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            mode: cfg.mode.name().into(),
            status: status.clone(),
            elapsed_s: elapsed,
            threads: rayon::current_num_threads(),
            config: cfg.clone(),
            files,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&m).expect("manifest serializes"))
            .map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }
}

/// Validates `cfg`, executes its mode and writes artifacts under `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    for w in cfg.validate()? {
        warn!("{w}");
    }
    match cfg.scalar {
        ScalarKind::F64 => run_with::<f64>(cfg, out_dir),
        ScalarKind::F32 => run_with::<f32>(cfg, out_dir),
    }
}

fn starting_point<T: Scalar>(cfg: &RunConfig, rd: &mut RunDir) -> Result<CoeffGrid<T>, RunError>
where
    CoeffGrid<T>: LoadCoeffs,
{
    if let Some(path) = &cfg.coefficients {
        info!("loading coefficients from {}", path.display());
        return Ok(CoeffGrid::<T>::load(path)?.resized(cfg.n_gal));
    }
    let p = ProblemParams::<T>::new(cfg.c, cfg.q)?;
    let t = Instant::now();
    let s = solve(&p, cfg.n_gal, cfg.nonlinearity, &cfg.solver)?;
    info!("Newton converged in {} iterations ({:.1} s), residual {:e}", s.iterations, t.elapsed().as_secs_f64(), s.residual);
    let hist: String = s.history.iter().enumerate().map(|(i, r)| format!("{i},{r:e}\n")).collect();
    rd.write("newton_history.csv", format!("iteration,residual\n{hist}"))?;
    Ok(s.abar)
}

fn run_with<T: Scalar>(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError>
where
    CoeffGrid<T>: LoadCoeffs,
{
    let t0 = Instant::now();
    let mut rd = RunDir::create(out_dir)?;
    rd.write("config.toml", cfg.to_toml())?;
    let mut cert = None;
    let status = match cfg.mode {
        Mode::Solve => {
            let a = starting_point::<T>(cfg, &mut rd)?;
            rd.coefficients("abar", &a)?;
            rd.write("profile.csv", export_profile(&a, cfg.q, cfg.profile_density))?;
            RunStatus::Converged
        }
        Mode::Prove => {
            let a = starting_point::<T>(cfg, &mut rd)?;
            rd.coefficients("abar", &a)?;
            rd.write("profile.csv", export_profile(&a, cfg.q, cfg.profile_density))?;
            let c = prove(&cfg.proof_inputs(), &a)?;
            rd.write("certificate.json", c.to_json())?;
            let st = match &c.status {
                crate::bounds::Status::Proven => {
                    info!("proven: r_min = {}", c.r_min.as_deref().unwrap_or("?"));
                    RunStatus::Proven
                }
                crate::bounds::Status::Failed(r) => RunStatus::Failed(r.clone()),
            };
            cert = Some(c);
            st
        }
        Mode::Continue => {
            let range = cfg.continuation.ok_or(RunError::Missing("continue", "a [continuation] table"))?;
            let mut base_cfg = cfg.clone();
            base_cfg.c = range.c_start;
            let base = starting_point::<T>(&base_cfg, &mut rd)?;
            let branch = continuation(cfg.q, &range, &base, cfg.nonlinearity, &cfg.solver)?;
            let mut names = Vec::new();
            for (i, b) in branch.iter().enumerate() {
                let stem = format!("branch/point_{i:04}");
                rd.coefficients(&stem, &b.abar)?;
                names.push(format!("{stem}.csv"));
            }
            rd.write("branch.csv", branch_csv(&branch, &names))?;
            let reached = branch.last().map_or(range.c_start, |b| b.c);
            if (reached - range.c_end).abs() <= 1e-9 {
                RunStatus::Converged
            } else {
                RunStatus::Failed(format!("branch stopped at c = {reached}"))
            }
        }
        Mode::Parity => {
            let range = cfg.continuation.unwrap_or(ContinuationConfig { c_start: cfg.c, c_end: 1.1, step: 0.025, min_step: 0.003 });
            let mut base_cfg = cfg.clone();
            base_cfg.c = range.c_start;
            base_cfg.nonlinearity = Nonlinearity::Full;
            let base = starting_point::<T>(&base_cfg, &mut rd)?;
            let orders = cfg.parity_orders.iter().map(|&m| SeriesOrder::new(m)).collect::<Result<Vec<_>, _>>()?;
            let branches = parity_experiment(cfg.q, &range, &orders, &base, &cfg.solver);
            rd.write("parity.csv", parity_csv(&branches))?;
            for b in &branches {
                if let Some(e) = &b.error {
                    warn!("M = {}: {e}", b.m);
                }
            }
            RunStatus::Converged
        }
        Mode::CheckCert => {
            let path = cfg.certificate.as_ref().ok_or(RunError::Missing("check-cert", "a certificate path"))?;
            let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
            let c = Certificate::from_json(&text).map_err(|e| RunError::Parse(e.to_string()))?;
            let st = match check_certificate(&c) {
                Ok(r) => {
                    info!("certificate verified: r_min = {:e}", r.r_min);
                    RunStatus::Verified
                }
                Err(BoundError::Condition(name, detail)) => {
                    warn!("certificate rejected: {name}: {detail}");
                    RunStatus::Failed(name.to_string())
                }
                Err(e) => return Err(e.into()),
            };
            cert = Some(c);
            st
        }
    };
    rd.manifest(cfg, &status, t0.elapsed().as_secs_f64())?;
    Ok(RunOutcome { status, dir: rd.dir, files: rd.files, certificate: cert })
}
