mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use discflow::harness::Family;
use discflow::spectrum::SearchConfig;
use discflow::tolerances::DEFAULT_STEPS_PER_UNIT;
use discflow::Hamiltonian;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "discflow",
    version,
    about = "Hamiltonian dynamics and action spectra on the closed disc"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file holding a serialized Hamiltonian and run parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "discflow-out")]
    pub out: PathBuf,
    /// Format of the main result table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Period cutoff K for orbit searches.
    #[arg(long = "period-max", global = true)]
    pub period_max: Option<usize>,
    /// Seed lattice size N (N × N seeds).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Integrator steps per unit time.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Seed for the randomized loop suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override of the check's default tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    Hutchings,
    Closure,
    Brouwer,
    Wind,
    Membership,
    All,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hutchings => "hutchings",
            Self::Closure => "closure",
            Self::Brouwer => "brouwer",
            Self::Wind => "wind",
            Self::Membership => "membership",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one orbit and report its action.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        /// Integration time.
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Periodic orbits up to the cutoff, mean-action sample and boundary data.
    Spectrum,
    /// Tangent-line spectrum of a radial profile checked against circle orbits.
    RadialSpec,
    /// Calabi invariant by both integration routes.
    Calabi,
    /// Support, decay and slope diagnostics of the collar mollification.
    MollifyDiag {
        /// Mollifier indices; defaults to 4, 8, …, 256.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
    },
    /// Run a verification check and write one verdict file per check.
    Verify {
        #[arg(value_enum)]
        check: CheckName,
    },
}

/// Contents of `--config`; every field is optional and command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub name: Option<String>,
    pub hamiltonian: Option<Hamiltonian>,
    pub period_max: Option<usize>,
    pub grid: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub t_end: Option<f64>,
    pub n_list: Option<Vec<u32>>,
    pub rotation_iterates: Option<usize>,
}

/// Resolved settings for one invocation.
pub struct Settings {
    pub family: Family,
    /// True when the Hamiltonian came from the config file.
    pub explicit_family: bool,
    pub search: SearchConfig,
    pub seed: u64,
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    pub file: RunConfig,
}

impl Settings {
    fn resolve(common: &Common) -> Result<Self> {
        let file: RunConfig = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        let explicit_family = file.hamiltonian.is_some();
        let family = match &file.hamiltonian {
            Some(h) => Family::new(
                file.name
                    .clone()
                    .unwrap_or_else(|| h.kind_name().to_string()),
                h.clone(),
            ),
            None => Family::new("radial_bump", Hamiltonian::bump4()),
        };
        let mut search = SearchConfig::default();
        if let Some(k) = common.period_max.or(file.period_max) {
            search.period_max = k;
        }
        if let Some(n) = common.grid.or(file.grid) {
            search.grid = n;
        }
        search.steps_per_unit = common
            .steps
            .or(file.steps)
            .unwrap_or(DEFAULT_STEPS_PER_UNIT);
        if let Some(n) = file.rotation_iterates {
            search.rotation_iterates = n;
        }
        Ok(Self {
            family,
            explicit_family,
            search,
            seed: common.seed.or(file.seed).unwrap_or(0),
            tol: common.tol.or(file.tol),
            out: common.out.clone(),
            format: common.format,
            file,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn run(cli: Cli) -> Result<u8> {
    let settings = Settings::resolve(&cli.common)?;
    ensure_dir(&settings.out)?;
    match cli.command {
        Command::Orbit { x, y, t_end } => commands::orbit(&settings, x, y, t_end),
        Command::Spectrum => commands::spectrum(&settings),
        Command::RadialSpec => commands::radial_spec(&settings),
        Command::Calabi => commands::calabi(&settings),
        Command::MollifyDiag { n } => commands::mollify_diag(&settings, n),
        Command::Verify { check } => commands::verify(&settings, check),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
