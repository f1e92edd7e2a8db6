//! Argument parsing and dispatch.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, CompareGrid, CurveSet, FigureId, FIGURE_SAMPLES, T_MAX};
use crate::config::{self, Overrides, RunConfig, CONFIG_ENV};
use crate::error::{exit, CliError};
use crate::output;

#[derive(Debug, Parser)]
#[command(
    name = "phonon-dephasing",
    version,
    about = "Phonon-induced dephasing of a double-donor charge qubit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file (default: $PHONON_DEPHASING_CONFIG if set).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(flatten)]
    pub params: ParamFlags,
}

/// One flag per config key; unset flags leave lower layers in place.
#[derive(Debug, Args, Default)]
pub struct ParamFlags {
    /// Built-in material (see `material list`).
    #[arg(long = "material.preset", global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Mass density, kg/m^3.
    #[arg(long = "material.rho_m", global = true, value_name = "X")]
    pub rho_m: Option<String>,
    /// Sound speed, m/s.
    #[arg(long = "material.s", global = true, value_name = "X")]
    pub s: Option<String>,
    /// Deformation constant, eV.
    #[arg(long = "material.D_eV", global = true, value_name = "X")]
    pub d_ev: Option<String>,
    /// Donor separation, nm.
    #[arg(long = "geometry.d_nm", global = true, value_name = "X")]
    pub d_nm: Option<String>,
    /// Bohr radius at the + site, nm.
    #[arg(long = "geometry.R_plus_nm", global = true, value_name = "X")]
    pub r_plus_nm: Option<String>,
    /// Bohr radius at the - site, nm.
    #[arg(long = "geometry.R_minus_nm", global = true, value_name = "X")]
    pub r_minus_nm: Option<String>,
    /// Temperature, K.
    #[arg(long = "temperature.K", global = true, value_name = "X")]
    pub temperature_k: Option<String>,
    /// Relative quadrature tolerance.
    #[arg(long = "quadrature.rel_tol", global = true, value_name = "X")]
    pub rel_tol: Option<String>,
    /// Absolute quadrature tolerance.
    #[arg(long = "quadrature.abs_tol", global = true, value_name = "X")]
    pub abs_tol: Option<String>,
    /// Interval budget per integral.
    #[arg(long = "quadrature.max_subdivisions", global = true, value_name = "N")]
    pub max_subdivisions: Option<String>,
    /// Envelope level at which half-line integrals are truncated.
    #[arg(long = "quadrature.cutoff_ratio", global = true, value_name = "X")]
    pub cutoff_ratio: Option<String>,
}

impl ParamFlags {
    pub fn overrides(&self) -> Result<Overrides, CliError> {
        let mut o = Overrides::default();
        let pairs = [
            (config::PRESET_KEY, &self.preset),
            ("material.rho_m", &self.rho_m),
            ("material.s", &self.s),
            ("material.D_eV", &self.d_ev),
            ("geometry.d_nm", &self.d_nm),
            ("geometry.R_plus_nm", &self.r_plus_nm),
            ("geometry.R_minus_nm", &self.r_minus_nm),
            ("temperature.K", &self.temperature_k),
            ("quadrature.rel_tol", &self.rel_tol),
            ("quadrature.abs_tol", &self.abs_tol),
            ("quadrature.max_subdivisions", &self.max_subdivisions),
            ("quadrature.cutoff_ratio", &self.cutoff_ratio),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                o.set(key, v.clone())?;
            }
        }
        Ok(o)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// γ/Γ_T against t/τ_d for the configured system.
    Rate(GridArgs),
    /// Decay function g(t) at the configured temperature.
    Decay(GridArgs),
    /// Curves of one of the reference figures: fig1, fig2 or fig3.
    Figure {
        id: String,
        #[arg(long, default_value_t = FIGURE_SAMPLES)]
        samples: usize,
    },
    /// Closed-form rate against the radial quadrature oracle.
    Compare {
        /// Mean relative radii, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.08, 0.1])]
        eta: Vec<f64>,
        /// Relative radius differences, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.5, 1.0])]
        sigma: Vec<f64>,
        /// Time samples per (eta, sigma) pair on [0, t-max].
        #[arg(long, default_value_t = 300)]
        points: usize,
        #[arg(long, default_value_t = T_MAX)]
        t_max: f64,
        /// Maximum allowed deviation relative to the curve's peak.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Phonon-induced shift of the transition frequency.
    Shift,
    /// Material presets.
    Material {
        #[command(subcommand)]
        action: MaterialAction,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = FIGURE_SAMPLES)]
    pub samples: usize,
    /// End of the time grid in units of τ_d.
    #[arg(long, default_value_t = T_MAX)]
    pub t_max: f64,
}

#[derive(Debug, Subcommand)]
pub enum MaterialAction {
    List,
    Show { name: String },
}

/// Resolves the config: `--config`, else the environment variable, then flags.
pub fn resolve_config(common: &Common) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let file = match &path {
        Some(p) => Some((p.as_path(), config::read_file(p)?)),
        None => None,
    };
    RunConfig::resolve(file, &common.params.overrides()?)
}

/// What a command produced: the text to emit and the exit status.
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

fn render(set: &CurveSet, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => output::curves_to_csv(&set.curves, &set.meta),
        Format::Svg => output::curves_to_svg(&set.curves, &set.title, &set.y_label),
    }
}

fn text_only(format: Format, what: &str) -> Result<(), CliError> {
    match format {
        Format::Csv => Ok(()),
        Format::Svg => Err(CliError::Usage(format!("`{what}` has no SVG output"))),
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    let ok = |text| Outcome {
        text,
        status: exit::SUCCESS,
    };
    match &cli.command {
        Command::Rate(g) => {
            let cfg = resolve_config(common)?;
            Ok(ok(render(
                &commands::rate(&cfg, g.samples, g.t_max)?,
                common.format,
            )?))
        }
        Command::Decay(g) => {
            let cfg = resolve_config(common)?;
            Ok(ok(render(
                &commands::decay_curve(&cfg, g.samples, g.t_max)?,
                common.format,
            )?))
        }
        Command::Figure { id, samples } => {
            let id: FigureId = id.parse()?;
            let cfg = resolve_config(common)?;
            let mut set = commands::figure(id, &cfg, *samples)?;
            if id == FigureId::Fig3 {
                let mut meta = cfg.header();
                meta.append(&mut set.meta);
                set.meta = meta;
            }
            Ok(ok(render(&set, common.format)?))
        }
        Command::Compare {
            eta,
            sigma,
            points,
            t_max,
            tolerance,
        } => {
            text_only(common.format, "compare")?;
            let cfg = resolve_config(common)?;
            let grid = CompareGrid {
                etas: eta.clone(),
                sigmas: sigma.clone(),
                points: *points,
                t_max: *t_max,
            };
            let report = commands::compare(grid, *tolerance, &cfg.quad)?;
            let status = if report.flagged() > 0 {
                exit::NON_CONVERGENCE
            } else if report.passed() {
                exit::SUCCESS
            } else {
                exit::VALIDATION
            };
            Ok(Outcome {
                text: report.to_csv(),
                status,
            })
        }
        Command::Shift => {
            text_only(common.format, "shift")?;
            let cfg = resolve_config(common)?;
            Ok(ok(commands::shift(&cfg)?))
        }
        Command::Material { action } => {
            text_only(common.format, "material")?;
            match action {
                MaterialAction::List => Ok(ok(commands::material_list())),
                MaterialAction::Show { name } => Ok(ok(commands::material_show(name)?)),
            }
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
        }
    };
    match execute(&cli)
        .and_then(|o| write_out(cli.common.out.as_deref(), &o.text).map(|_| o.status))
    {
        Ok(status) => {
            if status == exit::VALIDATION {
                eprintln!("error: comparison exceeded the tolerance");
            } else if status == exit::NON_CONVERGENCE {
                eprintln!(
                    "error: oracle did not converge on some grid points (flagged in the report)"
                );
            }
            status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
