mod commands;
mod config;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emscatter::many_body::TauMode;
use emscatter::WeightRule;

use config::{Anchor, GammaChoice, RunConfig, ShapeConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    NotConverged(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::NotConverged(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<emscatter::Error> for CliError {
    fn from(e: emscatter::Error) -> Self {
        match e {
            emscatter::Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "emscatter", version, about = "Scattering by small perfectly conducting bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the surface current of one body and compare with the asymptotics.
    OneBody(Common),
    /// Solve the effective-field system for many small bodies.
    ManyBody(Common),
    /// Rerun a published table and write computed values beside it.
    Reproduce {
        /// One of q-sphere, e-sphere, e-ellipsoid, e-cube, sweep-1386, many-27, many-1000.
        table: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the numeric Γ tensor of a mesh.
    Gamma(Common),
    /// Write the collocation mesh as CSV.
    MeshExport(Common),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ShapeKind {
    Sphere,
    Ellipsoid,
    Cube,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    shape: Option<ShapeKind>,
    /// Sphere radius or cube half side (cm).
    #[arg(long)]
    radius: Option<f64>,
    /// Ellipsoid semi-axes a,b,c (cm).
    #[arg(long, value_delimiter = ',', num_args = 3)]
    axes: Option<Vec<f64>>,
    #[arg(long)]
    n_per_face: Option<usize>,
    #[arg(long)]
    m_phi: Option<usize>,
    /// Target number of collocation points.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    weight_rule: Option<WeightRuleArg>,
    #[arg(long, value_enum)]
    gamma: Option<GammaArg>,

    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,

    /// Number of particles.
    #[arg(long = "particles")]
    m: Option<usize>,
    /// Particle spacing (cm).
    #[arg(long)]
    spacing: Option<f64>,
    /// Particle radius (cm).
    #[arg(long)]
    particle_radius: Option<f64>,
    #[arg(long)]
    centers: Option<PathBuf>,
    #[arg(long, value_enum)]
    tau_mode: Option<TauArg>,

    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,

    /// Evaluation distances (cm).
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<f64>>,
    /// Evaluation direction x,y,z.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    direction: Option<Vec<f64>>,
    /// Measure distances from the origin instead of the body center.
    #[arg(long)]
    from_origin: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum WeightRuleArg {
    EqualArea,
    SurfaceElement,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum GammaArg {
    Auto,
    Sphere,
    Local,
    Global,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TauArg {
    Diagonal,
    Full,
}

fn triple(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(kind) = self.shape {
            cfg.shape = match kind {
                ShapeKind::Sphere => ShapeConfig::Sphere { radius: 1e-9 },
                ShapeKind::Ellipsoid => ShapeConfig::Ellipsoid { a: 1e-8, b: 1e-9, c: 1e-9 },
                ShapeKind::Cube => ShapeConfig::Cube { half_side: 1e-7, n_per_face: 10, center: None },
            };
        }
        match &mut cfg.shape {
            ShapeConfig::Sphere { radius } => {
                if let Some(r) = self.radius {
                    *radius = r;
                }
            }
            ShapeConfig::Ellipsoid { a, b, c } => {
                if let Some(v) = &self.axes {
                    [*a, *b, *c] = triple(v);
                }
            }
            ShapeConfig::Cube { half_side, n_per_face, .. } => {
                if let Some(r) = self.radius {
                    *half_side = r;
                }
                if let Some(n) = self.n_per_face {
                    *n_per_face = n;
                }
            }
        }
        if self.radius.is_some() && matches!(cfg.shape, ShapeConfig::Ellipsoid { .. }) {
            return Err(CliError::Config("--radius does not apply to ellipsoids; use --axes".into()));
        }
        if self.axes.is_some() && !matches!(cfg.shape, ShapeConfig::Ellipsoid { .. }) {
            return Err(CliError::Config("--axes applies only to ellipsoids".into()));
        }
        if self.m_phi.is_some() || self.points.is_some() {
            cfg.mesh.m_phi = self.m_phi;
            cfg.mesh.points = self.points;
        }
        if let Some(w) = self.weight_rule {
            cfg.mesh.weight_rule = match w {
                WeightRuleArg::EqualArea => WeightRule::EqualArea,
                WeightRuleArg::SurfaceElement => WeightRule::SurfaceElement,
            };
        }
        if let Some(g) = self.gamma {
            cfg.mesh.gamma = match g {
                GammaArg::Auto => GammaChoice::Auto,
                GammaArg::Sphere => GammaChoice::Sphere,
                GammaArg::Local => GammaChoice::Local,
                GammaArg::Global => GammaChoice::Global,
            };
        }
        if self.k.is_some() {
            cfg.wave.k = self.k;
        }
        if let Some(l) = self.lambda {
            cfg.wave.lambda = l;
        }
        if let Some(o) = self.omega {
            cfg.wave.omega = o;
        }
        let mb = &mut cfg.many_body;
        if let Some(m) = self.m {
            mb.m = m;
        }
        if let Some(d) = self.spacing {
            mb.d = d;
        }
        if let Some(a) = self.particle_radius {
            mb.a = a;
        }
        if self.centers.is_some() {
            mb.centers_file = self.centers.clone();
        }
        if let Some(t) = self.tau_mode {
            mb.tau_mode = match t {
                TauArg::Diagonal => TauMode::Diagonal,
                TauArg::Full => TauMode::Full,
            };
        }
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
        }
        if let Some(r) = self.restart {
            cfg.solver.restart = r;
        }
        if let Some(m) = self.max_iter {
            cfg.solver.max_iter = m;
        }
        if let Some(d) = &self.distances {
            cfg.evaluation.distances = d.clone();
        }
        if let Some(d) = &self.direction {
            cfg.evaluation.direction = triple(d);
        }
        if self.from_origin {
            cfg.evaluation.from = Anchor::Origin;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::OneBody(c) => commands::one_body(&c.resolve()?),
        Command::ManyBody(c) => commands::many_body(&c.resolve()?),
        Command::Reproduce { table, common } => {
            if !reproduce::TABLES.contains(&table.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown table '{table}'; expected one of {}",
                    reproduce::TABLES.join(", ")
                )));
            }
            reproduce::run(&table, &common.resolve()?)
        }
        Command::Gamma(c) => commands::gamma(&c.resolve()?),
        Command::MeshExport(c) => commands::mesh_export(&c.resolve()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
