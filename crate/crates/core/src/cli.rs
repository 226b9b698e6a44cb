//! Batch front end: `central`, `saari-check`, `minimize-action`, `kronecker`
//! and `rel-equilibrium`.
//!
//! Every option can come from a flag or from a JSON manifest passed with
//! `--manifest`; flags win. Each run writes its files plus the resolved
//! `manifest.json` into the `--output` directory.
//!
//! Exit codes: 0 success, 1 invalid input, 2 no convergence, 3 non-rigid
//! loop, 4 collision or coincident bodies, 5 no hit within `k_max`.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::central_config::{self, CentralConfigResult, MinimizeOptions};
use crate::error::{invalid, Error, Result};
use crate::harmonics::{self, TrigLoop, RIGIDITY_TOL};
use crate::io::{self, CentralFile, ConfigFile, FourierLoopFile, TrigLoopFile};
use crate::kronecker::{self, KroneckerQuery, Window};
use crate::mechanics::{self, MassVector, DEGENERATE_DISTANCE};
use crate::variational::{self, ActionOptions, Frequency};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_NON_RIGID: u8 = 3;
pub const EXIT_COLLISION: u8 = 4;
pub const EXIT_NO_HIT: u8 = 5;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) => EXIT_INVALID,
        Error::NoConvergence { .. } | Error::SlowConvergence { .. } => EXIT_NO_CONVERGENCE,
        Error::HypothesisViolated { .. } => EXIT_NON_RIGID,
        Error::Collision { .. } | Error::DegeneratePair { .. } | Error::CollisionAbort { .. } => {
            EXIT_COLLISION
        }
        Error::SearchExhausted { .. } => EXIT_NO_HIT,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nbody-loops",
    version,
    about = "Central configurations, loop rigidity and action minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize I·U² over configurations of the given masses.
    Central(Flags),
    /// Rigidity report, potential spectrum and U/I time series of a trigonometric loop.
    SaariCheck(Flags),
    /// Minimize the action over planar mean-zero Fourier loops.
    MinimizeAction(Flags),
    /// Integers k with every k·θ_i within ε of an integer.
    Kronecker(Flags),
    /// Rotating relative equilibrium built from a central configuration.
    RelEquilibrium(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Central(_) => "central",
            Command::SaariCheck(_) => "saari-check",
            Command::MinimizeAction(_) => "minimize-action",
            Command::Kronecker(_) => "kronecker",
            Command::RelEquilibrium(_) => "rel-equilibrium",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Central(f)
            | Command::SaariCheck(f)
            | Command::MinimizeAction(f)
            | Command::Kronecker(f)
            | Command::RelEquilibrium(f) => f,
        }
    }
}

/// Options shared by every subcommand; each ignores the ones it has no use for.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON manifest supplying any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Main tolerance of the command.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Fourier order (minimize-action) or highest harmonic reported (saari-check).
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl Flags {
    /// Fills every unset option from `base`.
    pub fn or(self, base: Flags) -> Flags {
        Flags {
            manifest: self.manifest.or(base.manifest),
            input: self.input.or(base.input),
            output: self.output.or(base.output),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            k_max: self.k_max.or(base.k_max),
            order: self.order.or(base.order),
            period: self.period.or(base.period),
            samples: self.samples.or(base.samples),
            masses: self.masses.or(base.masses),
            dim: self.dim.or(base.dim),
            starts: self.starts.or(base.starts),
            theta: self.theta.or(base.theta),
            epsilon: self.epsilon.or(base.epsilon),
        }
    }
}

/// Resolved options of one run; written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(flatten)]
    pub flags: Flags,
}

impl RunManifest {
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self> {
        let mut flags = flags.clone();
        if let Some(path) = &flags.manifest {
            let base: Flags = io::read_json(path)?;
            flags = flags.or(base);
        }
        flags.manifest = None;
        flags.seed = Some(flags.seed.unwrap_or(0));
        flags.output = Some(flags.output.unwrap_or_else(|| PathBuf::from(".")));
        Ok(Self {
            command: command.to_string(),
            flags,
        })
    }

    fn seed(&self) -> u64 {
        self.flags.seed.unwrap_or(0)
    }

    fn output(&self, name: &str) -> PathBuf {
        self.flags
            .output
            .as_deref()
            .unwrap_or(Path::new("."))
            .join(name)
    }

    fn masses(&self) -> Result<(MassVector, Option<usize>)> {
        if let Some(m) = &self.flags.masses {
            return Ok((MassVector::new(m.clone())?, self.flags.dim));
        }
        let path = self
            .flags
            .input
            .as_ref()
            .ok_or_else(|| invalid("give --masses or --input"))?;
        let file: ConfigFile = io::read_json(path)?;
        Ok((file.mass_vector()?, self.flags.dim.or(file.dim)))
    }

    fn input(&self) -> Result<&Path> {
        self.flags
            .input
            .as_deref()
            .ok_or_else(|| invalid("--input is required"))
    }
}

/// Parses the command line, honours `NBODY_THREADS`, runs and reports.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    ExitCode::from(run(&cli.command))
}

/// Caps the global worker pool at `NBODY_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("NBODY_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        // fails only if the pool already exists, in which case it stays as is
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

pub fn run(command: &Command) -> u8 {
    let result = RunManifest::resolve(command.name(), command.flags()).and_then(|manifest| {
        let dir = manifest.output("");
        std::fs::create_dir_all(&dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
        io::write_json(&manifest.output("manifest.json"), &manifest)?;
        match command {
            Command::Central(_) => central(&manifest),
            Command::SaariCheck(_) => saari_check(&manifest),
            Command::MinimizeAction(_) => minimize_action(&manifest),
            Command::Kronecker(_) => kronecker_search(&manifest),
            Command::RelEquilibrium(_) => rel_equilibrium(&manifest),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn central(manifest: &RunManifest) -> Result<u8> {
    let (m, dim) = manifest.masses()?;
    let defaults = MinimizeOptions::default();
    let opts = MinimizeOptions {
        starts: manifest.flags.starts.unwrap_or(defaults.starts),
        tol_central: manifest.flags.tol.unwrap_or(defaults.tol_central),
        seed: manifest.seed(),
        ..defaults
    };
    let result = central_config::minimize_iu2(&m, dim.unwrap_or(2), &opts)?;
    io::write_json(
        &manifest.output("central.json"),
        &CentralFile::from(&result),
    )?;
    println!(
        "I·U² = {:?}  λ = {:?}  residual = {:e}",
        result.value, result.lambda, result.residual
    );
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct RigidityFile {
    rigid: bool,
    tol: f64,
    max_c: f64,
    distances: Vec<f64>,
    pairs: Vec<harmonics::PairHarmonics>,
    /// `sqrt(A − B)` per pair, the smallest distance reached.
    closest_approach: Vec<f64>,
    collision: Option<[usize; 2]>,
    u_relative_spread: Option<f64>,
    i_relative_spread: Option<f64>,
    spectrum_written: bool,
    seed: u64,
}

fn saari_check(manifest: &RunManifest) -> Result<u8> {
    let file: TrigLoopFile = io::read_json(manifest.input()?)?;
    let lp = TrigLoop::try_from(file)?;
    let tol = manifest.flags.tol.unwrap_or(RIGIDITY_TOL);
    let report = harmonics::rigidity_check(&lp, tol)?;
    let closest: Vec<f64> = report
        .pairs
        .iter()
        .map(|p| (p.a - p.b).max(0.0).sqrt())
        .collect();
    let collision = report
        .pairs
        .iter()
        .zip(&closest)
        .find(|(p, r)| **r <= DEGENERATE_DISTANCE * p.a.sqrt())
        .map(|(p, _)| [p.j, p.k]);

    let (mut u_spread, mut i_spread, mut spectrum_written) = (None, None, false);
    if collision.is_none() {
        let samples = manifest.flags.samples.unwrap_or(harmonics::DEFAULT_SAMPLES);
        let n_max = manifest.flags.order.unwrap_or(8);
        let rows = harmonics::spectrum_table(&lp, n_max, samples)?;
        io::write_spectrum_csv(io::create(&manifest.output("spectrum.csv"))?, &rows)?;
        spectrum_written = true;
        let series = harmonics::sample_mechanics(&lp, samples)?;
        io::write_time_series_csv(io::create(&manifest.output("timeseries.csv"))?, &series)?;
        let u: Vec<f64> = series.iter().map(|s| s.potential).collect();
        let i: Vec<f64> = series.iter().map(|s| s.inertia).collect();
        u_spread = Some(harmonics::relative_spread(&u));
        i_spread = Some(harmonics::relative_spread(&i));
    }
    let rigid = report.rigid;
    io::write_json(
        &manifest.output("rigidity.json"),
        &RigidityFile {
            rigid,
            tol,
            max_c: report.max_c,
            distances: report.distances,
            pairs: report.pairs,
            closest_approach: closest,
            collision,
            u_relative_spread: u_spread,
            i_relative_spread: i_spread,
            spectrum_written,
            seed: manifest.seed(),
        },
    )?;
    println!("rigid = {rigid}  max C = {:e}", report.max_c);
    if let Some([j, k]) = collision {
        println!("bodies {j} and {k} collide along the loop; spectrum and time series skipped");
    }
    Ok(if rigid { EXIT_OK } else { EXIT_NON_RIGID })
}

fn minimize_action(manifest: &RunManifest) -> Result<u8> {
    let (m, dim) = manifest.masses()?;
    if dim.is_some_and(|d| d != 2) {
        return Err(invalid("action minimization is planar"));
    }
    let period = manifest.flags.period.unwrap_or(2.0 * PI);
    let order = manifest.flags.order.unwrap_or(variational::DEFAULT_ORDER);
    let defaults = ActionOptions::default();
    let opts = ActionOptions {
        starts: manifest.flags.starts.unwrap_or(defaults.starts),
        tol_grad: manifest.flags.tol.unwrap_or(defaults.tol_grad),
        samples: manifest.flags.samples.unwrap_or(defaults.samples),
        seed: manifest.seed(),
        ..defaults
    };
    let (lp, report) = variational::minimize_action(&m, period, order, &opts)?;
    io::write_json(&manifest.output("loop.json"), &FourierLoopFile::from(&lp))?;
    io::write_json(&manifest.output("report.json"), &report)?;
    let trajectory = variational::sample_trajectory(&lp, opts.samples)?;
    io::write_trajectory_csv(io::create(&manifest.output("trajectory.csv"))?, &trajectory)?;
    println!(
        "action = {:?}  bound = {:?}  relative equilibrium = {}",
        report.action, report.lower_bound, report.relative_equilibrium
    );
    Ok(EXIT_OK)
}

fn kronecker_search(manifest: &RunManifest) -> Result<u8> {
    let theta = manifest
        .flags
        .theta
        .clone()
        .ok_or_else(|| invalid("--theta is required"))?;
    let epsilon = manifest
        .flags
        .epsilon
        .or(manifest.flags.tol)
        .ok_or_else(|| invalid("--epsilon is required"))?;
    let k_max = manifest.flags.k_max.unwrap_or(kronecker::DEFAULT_K_MAX);
    let query = KroneckerQuery::new(theta, epsilon, k_max, Window::NearZeroOrOne)?;
    let hits = kronecker::simultaneous_approx(&query);
    io::write_hits_csv(
        io::create(&manifest.output("hits.csv"))?,
        query.theta().len(),
        &hits,
    )?;
    match hits.first() {
        Some(h) => {
            println!("{} hits, first k = {}", hits.len(), h.k);
            Ok(EXIT_OK)
        }
        None => {
            eprintln!("no k ≤ {k_max} satisfies the query");
            Ok(EXIT_NO_HIT)
        }
    }
}

fn rel_equilibrium(manifest: &RunManifest) -> Result<u8> {
    let tol = manifest.flags.tol.unwrap_or(central_config::TOL_CENTRAL);
    let central = match (&manifest.flags.input, &manifest.flags.masses) {
        (Some(path), _) => {
            let file: ConfigFile = io::read_json(path)?;
            let (m, q) = file.configuration()?;
            // a stored configuration is judged by its residual alone
            CentralConfigResult::from_configuration(&m, &q, f64::INFINITY, tol)?
        }
        (None, Some(_)) => {
            let (m, _) = manifest.masses()?;
            let opts = MinimizeOptions {
                seed: manifest.seed(),
                tol_central: tol,
                ..MinimizeOptions::default()
            };
            central_config::minimize_iu2(&m, 2, &opts)?
        }
        (None, None) => return Err(invalid("give --input or --masses")),
    };
    if !central.converged {
        return Err(Error::NoConvergence {
            grad_norm: central.grad_norm,
            residual: central.residual,
            iterations: 0,
        });
    }
    let frequency = manifest
        .flags
        .period
        .map_or(Frequency::FromLambda, Frequency::Period);
    let lp = variational::build_relative_equilibrium(&central, frequency)?;
    io::write_json(&manifest.output("loop.json"), &TrigLoopFile::from(&lp))?;
    let residual = (0..64)
        .map(|s| {
            let t = lp.period() * s as f64 / 64.0;
            mechanics::newton_residual(lp.masses(), &lp.position(t), &lp.acceleration(t))
        })
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))?;
    println!("T = {:?}  Newton residual = {residual:e}", lp.period());
    Ok(EXIT_OK)
}
