//! Command-line definitions and dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipdyn_core::{SamplingBudget, DEFAULT_MARGIN};

use crate::commands;
use crate::report::{Report, RunManifest, SCHEMA_VERSION, THREADS_ENV, TOOL_VERSION};

#[derive(Debug, Parser)]
#[command(name = "lipdyn", version, about = "Numerics for Lipschitz dynamical systems")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed of the low-discrepancy sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of base sample pairs for Lipschitz estimates.
    #[arg(long, global = true, default_value_t = 2048)]
    pub pairs: usize,
    /// Convergence tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Grid nodes per axis; each subcommand has its own default.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Oversampling factor applied to sampled constants before comparisons.
    #[arg(long, global = true, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
}

impl Common {
    pub fn budget(&self) -> SamplingBudget {
        SamplingBudget::new(self.pairs, self.seed)
    }

    pub fn grid_or(&self, n: usize) -> usize {
        self.grid.unwrap_or(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Differentiable,
    Lipschitz,
}

/// `CENTER:RADIUS`, e.g. `0,0:1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallArg {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// `LO:HI` corners, e.g. `0,0:1,3`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectArg {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// `ANCHOR:SLOPE`, e.g. `0.9,0:0.35`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskArg {
    pub anchor: Vec<f64>,
    pub slope: f64,
}

/// Comma-separated coordinates, e.g. `0.5,-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

pub fn parse_coords(s: &str) -> Result<Coords, String> {
    parse_vec(s).map(Coords)
}

pub fn parse_vec(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn split_pair(s: &str) -> Result<(&str, &str), String> {
    s.split_once(':').ok_or_else(|| format!("`{s}`: expected two parts separated by `:`"))
}

fn parse_scalar(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

pub fn parse_ball(s: &str) -> Result<BallArg, String> {
    let (c, r) = split_pair(s)?;
    Ok(BallArg {
        center: parse_vec(c)?,
        radius: parse_scalar(r)?,
    })
}

pub fn parse_rect(s: &str) -> Result<RectArg, String> {
    let (lo, hi) = split_pair(s)?;
    Ok(RectArg {
        lo: parse_vec(lo)?,
        hi: parse_vec(hi)?,
    })
}

pub fn parse_disk(s: &str) -> Result<DiskArg, String> {
    let (a, k) = split_pair(s)?;
    Ok(DiskArg {
        anchor: parse_vec(a)?,
        slope: parse_scalar(k)?,
    })
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sampled Lipschitz constant, sup norm and Lipschitz norm of a map.
    Lip(LipArgs),
    /// Certify `A + φ` as Lipschitz hyperbolic.
    Certify(SystemArgs),
    /// Hyperbolic fixed point by contraction.
    Fixpoint(SystemArgs),
    /// Solve `A x + φ(x) = z`.
    Invert(InvertArgs),
    /// Local stable or unstable manifold by the graph transform.
    Manifold(ManifoldArgs),
    /// Linearising conjugacy `h ∘ f = A ∘ h`.
    Conjugacy(ConjugacyArgs),
    /// Intersection and transversality of two graphs.
    Transversal(TransversalArgs),
    /// Sink/source classification of a 1D fixed point.
    Classify1d(Classify1dArgs),
    /// Persistence of a 1D fixed or periodic point under perturbation.
    Permanence(PermanenceArgs),
    /// δ-Lyapunov exponent along an orbit.
    Lyapunov(LyapunovArgs),
    /// Distance of iterated disks to the unstable manifold.
    Lambda(LambdaArgs),
    /// Symbolic dynamics of a two-strip horseshoe.
    Horseshoe(HorseshoeArgs),
    /// Transversal connection through a saddle from two disks.
    Chain(ChainArgs),
}

#[derive(Debug, Args)]
pub struct LipArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Ball `CENTER:RADIUS`; defaults to the map domain.
    #[arg(long, value_parser = parse_ball, allow_hyphen_values = true)]
    pub region: Option<BallArg>,
    /// Second map; adds the Lipschitz-norm distance between the two.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Pass only if the margin-inflated constant lies below this bound.
    #[arg(long)]
    pub below: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// `linear_plus_lip` config.
    #[arg(long)]
    pub map: PathBuf,
    /// Ball `CENTER:RADIUS`; defaults to the domain of φ.
    #[arg(long, value_parser = parse_ball, allow_hyphen_values = true)]
    pub region: Option<BallArg>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Right-hand side `z`.
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub point: Coords,
}

/// A saddle of a `linear_plus_lip` system and the ball around it.
#[derive(Debug, Args)]
pub struct SaddleArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Radius of the local ball around the fixed point.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Fixed point; defaults to the config's, else it is located.
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub fixed_point: Option<Coords>,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    #[command(flatten)]
    pub saddle: SaddleArgs,
    #[arg(long, value_enum, default_value_t = SideArg::Unstable)]
    pub side: SideArg,
    /// Graph CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConjugacyArgs {
    #[command(flatten)]
    pub saddle: SaddleArgs,
    /// Extra grid rings around the core.
    #[arg(long)]
    pub pad: Option<usize>,
    /// Random starts of the orbit check.
    #[arg(long, default_value_t = 50)]
    pub starts: usize,
    /// Steps per orbit in the orbit check.
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    /// Field CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransversalArgs {
    /// Graph CSV of `θ̃: E₁ → E₂`.
    #[arg(long)]
    pub w1: PathBuf,
    /// Graph CSV of `σ̃: E₂ → E₁`.
    #[arg(long)]
    pub w2: PathBuf,
    /// Dimensions `d1,d2` of `E₁` and `E₂`, checked against the files.
    #[arg(long, value_parser = parse_coords)]
    pub split: Option<Coords>,
    /// Radius `r` of the ball the graphs are compared on.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Closeness constant `c` of the hypotheses.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Known intersection point; skips the search.
    #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
    pub point: Option<Coords>,
    /// Search even if the hypotheses fail.
    #[arg(long = "override")]
    pub override_hypotheses: bool,
}

#[derive(Debug, Args)]
pub struct OneDimArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub point: f64,
    /// Radius of the neighbourhood.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct Classify1dArgs {
    #[command(flatten)]
    pub one: OneDimArgs,
}

#[derive(Debug, Args)]
pub struct PermanenceArgs {
    #[command(flatten)]
    pub one: OneDimArgs,
    /// The perturbed map.
    #[arg(long)]
    pub perturbed: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    #[arg(long, value_enum, default_value_t = PathArg::Lipschitz)]
    pub path: PathArg,
    /// Replace the point by the nearest period-k point of the map within delta.
    #[arg(long)]
    pub locate: bool,
    /// Orbit CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Orbit length.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Periodic point to compare against.
    #[arg(long, allow_hyphen_values = true)]
    pub compare: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    /// Slack of the comparison.
    #[arg(long, default_value_t = 1e-3)]
    pub slack: f64,
    /// Orbit CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[command(flatten)]
    pub saddle: SaddleArgs,
    /// Unstable disk `ANCHOR:SLOPE` in local frame coordinates.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub disk: DiskArg,
    /// Half-width of the disk's parameter box.
    #[arg(long, default_value_t = 1.0)]
    pub disk_radius: f64,
    #[arg(long, default_value_t = 14)]
    pub n_max: usize,
    /// Half-width of the comparison window.
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
    #[arg(long, default_value_t = 65)]
    pub window_nodes: usize,
    /// Steps used to refine the reference manifold.
    #[arg(long, default_value_t = 20)]
    pub reference: usize,
    /// Decay ratio to test; defaults to `τ + 2·Lip φ`.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Distance CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HorseshoeArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    pub rect0: RectArg,
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    pub rect1: RectArg,
    /// Longest word length.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub saddle: SaddleArgs,
    /// Disk `ANCHOR:SLOPE` on the unstable side; defaults to the unstable manifold.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub dx: Option<DiskArg>,
    /// Disk `ANCHOR:SLOPE` on the stable side; defaults to the stable manifold.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub dy: Option<DiskArg>,
    #[arg(long, default_value_t = 1.0)]
    pub disk_radius: f64,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lip(_) => "lip",
            Command::Certify(_) => "certify",
            Command::Fixpoint(_) => "fixpoint",
            Command::Invert(_) => "invert",
            Command::Manifold(_) => "manifold",
            Command::Conjugacy(_) => "conjugacy",
            Command::Transversal(_) => "transversal",
            Command::Classify1d(_) => "classify1d",
            Command::Permanence(_) => "permanence",
            Command::Lyapunov(_) => "lyapunov",
            Command::Lambda(_) => "lambda",
            Command::Horseshoe(_) => "horseshoe",
            Command::Chain(_) => "chain",
        }
    }
}

/// Runs one parsed invocation and returns its report. Wall time goes to the
/// second tuple element.
pub fn run(cli: &Cli) -> (Report, f64) {
    let start = Instant::now();
    let mut manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        configs: Vec::new(),
        seed: cli.common.seed,
        pairs: cli.common.pairs,
        tol: cli.common.tol,
        grid: cli.common.grid,
        margin: cli.common.margin,
        threads: std::env::var(THREADS_ENV).ok(),
        tool_version: TOOL_VERSION,
    };
    let outcome = commands::dispatch(&cli.command, &cli.common, &mut manifest.configs);
    let report = match outcome {
        Ok(o) => Report {
            schema: SCHEMA_VERSION,
            manifest,
            status: o.status,
            result: o.result,
            error: None,
        },
        Err(e) => Report::error(manifest, &e),
    };
    (report, start.elapsed().as_secs_f64())
}
