//! Command-line runs: argument parsing, validated run configurations, output
//! files and the run manifest.
//!
//! Exit codes: 0 on success, 2 when the configuration or an input file is
//! invalid, 3 when the numerics fail (unresolved clusters, failed
//! verification, tracing or inversion failures). Failures are written to
//! `failure.json` next to the regular outputs.

mod commands;
mod selector;

pub use commands::{EvalOutput, RatioRow, StripSummary, StripsOutput};
pub use selector::{AnchorSpec, FunctionSpec, SeriesSpec, Template};

use crate::error::{Error, Result};
use crate::trace::Constraint;
use crate::zeros::SearchRectangle;
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "ZEROMULT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "zeromult-out";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILURE_FILE: &str = "failure.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "zeromult",
    version,
    about = "Zero location, multiplicity certification and conformal checks for Dirichlet series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Offset of the deterministic jitter sequence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Override an entry of the defaults table, as `key=value`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Evaluate a function at one point.
    Eval {
        /// zeta, dh, hurwitz:A, l5, series:PATH, double:S0 or power:M:S0.
        #[arg(long)]
        function: String,
        /// `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Locate and certify the zeros in a rectangle.
    Zeros {
        #[arg(long)]
        function: String,
        /// `sigma_min,sigma_max,t_min,t_max`.
        #[arg(long, allow_hyphen_values = true)]
        rect: String,
    },
    /// Trace the pre-image of the real axis, a ray or a circle.
    Trace {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// real, ray:THETA or circle:RADIUS.
        #[arg(long, default_value = "real", allow_hyphen_values = true)]
        constraint: String,
    },
    /// Partition a window into strips bounded by real-axis pre-images.
    Strips {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// Patch, involution and integral identities around a zero or a pair.
    Verify {
        #[arg(long)]
        function: String,
        /// Rectangle whose located zeros form the anchor.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "zero")]
        rect: Option<String>,
        /// Declared anchor zero `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        zero: Option<String>,
        /// double or simple, for a declared zero.
        #[arg(long, default_value = "double")]
        template: String,
        /// Image-disc radii for the integral identities.
        #[arg(long, default_value = "1e-3,1e-2,1e-1")]
        radii: String,
    },
    /// Partial-product ratio along the primes.
    Ratio {
        /// classical or the path of a series file.
        #[arg(long, default_value = "classical")]
        series: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        s_image: String,
        #[arg(long)]
        n_max: u64,
    },
}

/// The defaults table. Every entry can be overridden with `--set key=value`
/// and must stay positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Evaluation precision target.
    pub precision: f64,
    pub max_depth: u32,
    /// Phase samples per contour edge before adaptive refinement.
    pub nodes_per_edge: usize,
    /// Upper bound for certification circle radii.
    pub certify_radius: f64,
    pub newton_max_iter: usize,
    /// Seed grid points per window side for tracing.
    pub grid_density: usize,
    /// Corrector tolerance.
    pub trace_tolerance: f64,
    /// Initial tracing step as a fraction of the window diagonal.
    pub trace_step_fraction: f64,
    pub trace_max_steps: usize,
    /// Terms of a series read from a file.
    pub series_cutoff: usize,
    /// Radius of the disc around the anchor.
    pub patch_extent: f64,
    /// Grid points per side for the involution.
    pub involution_grid: usize,
    pub chain_rule_tolerance: f64,
    /// Relative tolerance of the area and length identities.
    pub integral_tolerance: f64,
    /// Relative tolerance between the two component integrals.
    pub integral_agreement: f64,
    pub area_order: usize,
    pub length_order: usize,
    /// Loop tracing step as a fraction of the loop radius.
    pub loop_step_fraction: f64,
    pub rays: usize,
    pub transport_tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let integral = crate::conformal::IntegralOptions::default();
        let trace = crate::trace::TraceOptions::default();
        let locate = crate::zeros::LocateOptions::default();
        Settings {
            precision: crate::series::DEFAULT_PRECISION,
            max_depth: locate.max_depth,
            nodes_per_edge: locate.nodes_per_edge,
            certify_radius: locate.certify_radius,
            newton_max_iter: locate.newton_max_iter,
            grid_density: crate::trace::StripOptions::default().grid_density,
            trace_tolerance: trace.tolerance,
            trace_step_fraction: 1e-3,
            trace_max_steps: trace.max_steps,
            series_cutoff: 10_000,
            patch_extent: 0.4,
            involution_grid: 13,
            chain_rule_tolerance: 1e-4,
            integral_tolerance: integral.tolerance,
            integral_agreement: integral.agreement,
            area_order: integral.area_order,
            length_order: integral.length_order,
            loop_step_fraction: integral.step_fraction,
            rays: integral.rays,
            transport_tolerance: 0.01,
        }
    }
}

impl Settings {
    /// Applies `key=value` overrides; unknown keys, malformed values and
    /// non-positive values are configuration errors.
    pub fn with_overrides(self, overrides: &[String]) -> Result<Settings> {
        let mut table = match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => unreachable!("settings serialize to an object"),
        };
        for item in overrides {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::ConfigInvalid(format!("override '{item}' is not key=value"))
            })?;
            let key = key.trim().replace('-', "_");
            let entry = table
                .get_mut(&key)
                .ok_or_else(|| Error::ConfigInvalid(format!("unknown setting '{key}'")))?;
            let parsed: serde_json::Value = serde_json::from_str(value.trim()).map_err(|_| {
                Error::ConfigInvalid(format!(
                    "setting '{key}': '{}' is not a number",
                    value.trim()
                ))
            })?;
            match parsed.as_f64() {
                Some(x) if x > 0.0 && x.is_finite() => *entry = parsed,
                _ => {
                    return Err(Error::ConfigInvalid(format!(
                        "setting '{key}' must be positive"
                    )))
                }
            }
        }
        serde_json::from_value(serde_json::Value::Object(table))
            .map_err(|e| Error::ConfigInvalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Eval {
        function: FunctionSpec,
        point: Complex64,
    },
    Zeros {
        function: FunctionSpec,
        rect: SearchRectangle,
    },
    Trace {
        function: FunctionSpec,
        window: SearchRectangle,
        constraint: Constraint,
    },
    Strips {
        function: FunctionSpec,
        window: SearchRectangle,
    },
    Verify {
        function: FunctionSpec,
        anchor: AnchorSpec,
        radii: Vec<f64>,
    },
    Ratio {
        series: SeriesSpec,
        s: Complex64,
        s_image: Complex64,
        n_max: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Zeros { .. } => "zeros",
            Command::Trace { .. } => "trace",
            Command::Strips { .. } => "strips",
            Command::Verify { .. } => "verify",
            Command::Ratio { .. } => "ratio",
        }
    }
}

/// A validated run. Identical configurations produce byte-identical outputs
/// apart from the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub settings: Settings,
}

/// `a,b` as a complex number.
pub fn parse_point(text: &str) -> Result<Complex64> {
    let v = parse_reals(text, "point")?;
    match v[..] {
        [re, im] => Ok(Complex64::new(re, im)),
        _ => Err(Error::ConfigInvalid(format!(
            "point '{text}' needs two numbers"
        ))),
    }
}

/// `sigma_min,sigma_max,t_min,t_max`.
pub fn parse_rect(text: &str) -> Result<SearchRectangle> {
    let v = parse_reals(text, "rectangle")?;
    match v[..] {
        [a, b, c, d] => SearchRectangle::new(a, b, c, d),
        _ => Err(Error::ConfigInvalid(format!(
            "rectangle '{text}' needs four numbers"
        ))),
    }
}

fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::ConfigInvalid(format!("{what} '{text}': cannot parse '{}'", x.trim()))
                })
        })
        .collect()
}

pub fn parse_constraint(text: &str) -> Result<Constraint> {
    let bad = || {
        Error::ConfigInvalid(format!(
            "constraint '{text}' is not real, ray:THETA or circle:RADIUS"
        ))
    };
    match text.split_once(':') {
        None if text == "real" => Ok(Constraint::RealAxisPreimage),
        Some(("ray", x)) => {
            let theta: f64 = x.trim().parse().map_err(|_| bad())?;
            if !theta.is_finite() {
                return Err(bad());
            }
            Ok(Constraint::RayPreimage { theta })
        }
        Some(("circle", x)) => {
            let radius: f64 = x.trim().parse().map_err(|_| bad())?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(bad());
            }
            Ok(Constraint::CirclePreimage { radius })
        }
        _ => Err(bad()),
    }
}

impl RunConfig {
    /// Builds and validates the run described by parsed arguments. The
    /// output directory falls back to [`DEFAULT_OUT_DIR`].
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        let settings = Settings::default().with_overrides(&cli.set)?;
        let command = match cli.command {
            CommandArgs::Eval { function, point } => Command::Eval {
                function: FunctionSpec::parse(&function)?,
                point: parse_point(&point)?,
            },
            CommandArgs::Zeros { function, rect } => Command::Zeros {
                function: FunctionSpec::parse(&function)?,
                rect: parse_rect(&rect)?,
            },
            CommandArgs::Trace {
                function,
                window,
                constraint,
            } => Command::Trace {
                function: FunctionSpec::parse(&function)?,
                window: parse_rect(&window)?,
                constraint: parse_constraint(&constraint)?,
            },
            CommandArgs::Strips { function, window } => Command::Strips {
                function: FunctionSpec::parse(&function)?,
                window: parse_rect(&window)?,
            },
            CommandArgs::Verify {
                function,
                rect,
                zero,
                template,
                radii,
            } => {
                let anchor = match (rect, zero) {
                    (Some(r), None) => AnchorSpec::Located {
                        rect: parse_rect(&r)?,
                    },
                    (None, Some(z)) => AnchorSpec::Declared {
                        zero: parse_point(&z)?,
                        template: Template::parse(&template)?,
                    },
                    _ => {
                        return Err(Error::ConfigInvalid(
                            "verify needs exactly one of --rect and --zero".into(),
                        ))
                    }
                };
                let radii = parse_reals(&radii, "radii")?;
                if radii.is_empty() || radii.iter().any(|&r| r <= 0.0) {
                    return Err(Error::ConfigInvalid("radii must be positive".into()));
                }
                Command::Verify {
                    function: FunctionSpec::parse(&function)?,
                    anchor,
                    radii,
                }
            }
            CommandArgs::Ratio {
                series,
                s,
                s_image,
                n_max,
            } => {
                let (s, s_image) = (parse_point(&s)?, parse_point(&s_image)?);
                if n_max < 2 {
                    return Err(Error::ConfigInvalid("n_max must be at least 2".into()));
                }
                if (s - s_image).re < 0.0 {
                    return Err(Error::ConfigInvalid(
                        "Re(s - s_image) must not be negative".into(),
                    ));
                }
                Command::Ratio {
                    series: SeriesSpec::parse(&series),
                    s,
                    s_image,
                    n_max,
                }
            }
        };
        Ok(RunConfig {
            command,
            out_dir: cli.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            seed: cli.seed,
            settings,
        })
    }
}

/// Serialized form of a failed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn from_error(e: &Error) -> Failure {
        Failure {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// Built-in defaults table; `config.settings` holds the effective values.
    pub defaults: Settings,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub failure: Option<Failure>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub outputs: Vec<String>,
    pub failure: Option<Failure>,
}

/// Ordered writer for the files of one run.
pub(crate) struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn write_with(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        self.write_with(name, |w| {
            w.write_all(text.as_bytes())?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Executes a validated run and writes its outputs and manifest.
pub fn run(config: &RunConfig) -> RunOutcome {
    let start = Instant::now();
    let mut out = match Outputs::new(&config.out_dir) {
        Ok(o) => o,
        Err(e) => {
            let failure = Failure::from_error(&e);
            eprintln!("error: {}", failure.message);
            return RunOutcome {
                exit_code: EXIT_VALIDATION,
                outputs: Vec::new(),
                failure: Some(failure),
            };
        }
    };
    let (exit_code, failure) = match commands::dispatch(config, &mut out) {
        Ok(None) => (EXIT_OK, None),
        Ok(Some(f)) => (EXIT_NUMERICAL, Some(f)),
        Err(e) => (exit_code_for(&e), Some(Failure::from_error(&e))),
    };
    if let Some(f) = &failure {
        eprintln!("error [{}]: {}", f.code, f.message);
        if let Err(e) = out.write_json(FAILURE_FILE, f) {
            eprintln!("error: cannot write {FAILURE_FILE}: {e}");
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        defaults: Settings::default(),
        outputs: out.files.clone(),
        exit_code,
        failure: failure.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = out.write_json(MANIFEST_FILE, &manifest) {
        eprintln!("error: cannot write {MANIFEST_FILE}: {e}");
    }
    RunOutcome {
        exit_code,
        outputs: out.files,
        failure,
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run(&config).exit_code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            exit_code_for(&e)
        }
    }
}
