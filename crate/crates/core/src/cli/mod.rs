//! Command-line front end: `matrix`, `sweep`, `rank` and `validate`.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{NormalizeMode, OutputFormat, RunConfig, Settings, DEFAULT_PRECISION};
pub use output::{
    parse_matrix_csv, to_json, ChannelParams, LinkParams, MatrixDocument, NormalizationInfo,
    RankEntry, RankReport, SweepResult,
};

use crate::channel::{DerivedConstants, TurbulenceSpec, WaistConvention};
use crate::engine::{selection_rule_allowed, Engine, ModeIndex, ModePair};
use crate::error::{Error, Result};
use crate::validate::{self, ValidationOptions, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NUMERICAL_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hg-crosstalk",
    version,
    about = "Joint detection probabilities of SPDC photon pairs in Hermite-Gaussian modes after a turbulent link"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint probability matrix over a mode list.
    Matrix(MatrixArgs),
    /// Probabilities of selected pairs over a grid of Rytov variances.
    Sweep(SweepArgs),
    /// Rank pairs by retention (allowed) and leakage (forbidden) under turbulence.
    Rank(RankArgs),
    /// Run the validation suites and report pass/fail per criterion.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct LinkArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wavelength [m].
    #[arg(long, allow_hyphen_values = true)]
    pub wavelength: Option<f64>,
    /// Propagation distance [m].
    #[arg(long, allow_hyphen_values = true)]
    pub distance: Option<f64>,
    /// Pump spot size at the crystal W0p [m].
    #[arg(long, conflicts_with = "combined_waist", allow_hyphen_values = true)]
    pub pump_waist: Option<f64>,
    /// Combined waist W0 = √2·W0p [m].
    #[arg(long, allow_hyphen_values = true)]
    pub combined_waist: Option<f64>,
    /// Beam-radius convention in the mode kernel: propagated | crystal_waist.
    #[arg(long)]
    pub w_variant: Option<WaistConvention>,
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeMode>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Decimal places in CSV output.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
#[group(multiple = false)]
pub struct TurbulenceArgs {
    /// Refractive-index structure constant Cn² [m^-2/3].
    #[arg(long, allow_hyphen_values = true)]
    pub cn2: Option<f64>,
    /// Rytov variance σ_R².
    #[arg(long, allow_hyphen_values = true)]
    pub rytov: Option<f64>,
    /// Turbulence strength γ entering the kernels directly.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
#[group(multiple = false)]
pub struct ModeArgs {
    /// Mode labels such as "00,01,10" ("m_n" for orders ≥ 10).
    #[arg(long)]
    pub modes: Option<String>,
    /// All modes with m+n ≤ S.
    #[arg(long)]
    pub max_sum: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub turbulence: TurbulenceArgs,
    #[command(flatten)]
    pub modes: ModeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    /// Pairs as signal:idler, e.g. "00:00,00:01".
    #[arg(long, default_value = "00:00,00:01")]
    pub pairs: String,
    /// Ascending Rytov variances, e.g. "0,0.05,0.1" (default 0, 0.01, …, 0.1).
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub turbulence: TurbulenceArgs,
    #[command(flatten)]
    pub modes: ModeArgs,
    /// Only rank pairs with this signal mode.
    #[arg(long)]
    pub signal: Option<ModeIndex>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    /// Skip the criteria that need a turbulent channel.
    #[arg(long)]
    pub vacuum_only: bool,
    /// Relative perturbation of γ in turbulent checks (0.1 = +10%).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub perturb_gamma: f64,
    /// Quadrature nodes per dimension for the oracle check.
    #[arg(long, default_value_t = 512)]
    pub oracle_nodes: usize,
}

impl LinkArgs {
    fn settings(&self, turbulence: &TurbulenceArgs, modes: &ModeArgs) -> Result<Settings> {
        let flags = Settings {
            wavelength: self.wavelength,
            distance: self.distance,
            pump_waist: self.pump_waist,
            combined_waist: self.combined_waist,
            cn2: turbulence.cn2,
            rytov: turbulence.rytov,
            gamma: turbulence.gamma,
            modes: modes.modes.clone(),
            max_sum: modes.max_sum,
            normalize: self.normalize,
            format: self.format,
            output: self.output.clone(),
            precision: self.precision,
            w_variant: self.w_variant,
        };
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(flags.over(file))
    }

    fn run_config(&self, turbulence: &TurbulenceArgs, modes: &ModeArgs) -> Result<RunConfig> {
        self.settings(turbulence, modes)?.resolve()
    }
}

/// Text to emit plus whether the command considers the run successful.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub output: Option<PathBuf>,
    pub passed: bool,
}

fn render<T: serde::Serialize>(
    value: &T,
    format: OutputFormat,
    csv: impl FnOnce() -> String,
) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(csv()),
        OutputFormat::Json => to_json(value),
    }
}

fn constants(rc: &RunConfig, turbulence: TurbulenceSpec) -> Result<DerivedConstants> {
    DerivedConstants::with_convention(
        rc.optical,
        turbulence.resolve(&rc.optical)?,
        rc.waist_convention,
    )
}

pub fn matrix_document(rc: &RunConfig) -> Result<MatrixDocument> {
    let engine = Engine::new(constants(rc, rc.turbulence)?);
    let matrix = engine.probability_matrix(&rc.modes, rc.normalize.normalization())?;
    Ok(MatrixDocument::from(&matrix))
}

pub fn cmd_matrix(rc: &RunConfig) -> Result<Outcome> {
    let doc = matrix_document(rc)?;
    Ok(Outcome {
        text: render(&doc, rc.format, || doc.to_csv(rc.precision))?,
        output: rc.output.clone(),
        passed: true,
    })
}

pub fn parse_pairs(s: &str) -> Result<Vec<ModePair>> {
    let pairs = s
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.replace(':', ",").parse())
        .collect::<Result<Vec<ModePair>>>()?;
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("pair list is empty".into()));
    }
    Ok(pairs)
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let grid = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad grid value '{t}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid is empty".into()));
    }
    if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "grid values must be ≥ 0, got {v}"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("grid must be ascending".into()));
    }
    Ok(())
}

pub fn sweep(rc: &RunConfig, grid: &[f64], pairs: &[ModePair]) -> Result<SweepResult> {
    check_grid(grid)?;
    let vacuum = Engine::new(constants(rc, TurbulenceSpec::Vacuum)?);
    let applied = vacuum.normalization_scale(rc.normalize.normalization())?;
    let mut series = vec![Vec::with_capacity(grid.len()); pairs.len()];
    let mut gammas = Vec::with_capacity(grid.len());
    for &r in grid {
        let engine = Engine::new(constants(rc, TurbulenceSpec::Rytov(r))?);
        gammas.push(engine.constants().gamma);
        for (s, &pair) in series.iter_mut().zip(pairs) {
            s.push(engine.joint_probability(pair)? * applied.scale);
        }
    }
    Ok(SweepResult {
        params: LinkParams::new(&rc.optical, rc.waist_convention),
        normalization: (&applied).into(),
        grid: grid.to_vec(),
        gamma: gammas,
        pairs: pairs.iter().map(ToString::to_string).collect(),
        series,
    })
}

pub fn cmd_sweep(rc: &RunConfig, grid: &[f64], pairs: &[ModePair]) -> Result<Outcome> {
    let result = sweep(rc, grid, pairs)?;
    Ok(Outcome {
        text: render(&result, rc.format, || result.to_csv(rc.precision))?,
        output: rc.output.clone(),
        passed: true,
    })
}

/// Tag for the pairs singled out as examples of non-uniform crosstalk.
pub fn highlight(pair: ModePair) -> Option<&'static str> {
    let g = ModeIndex::GAUSSIAN;
    let other = if pair.signal == g {
        pair.idler
    } else if pair.idler == g {
        pair.signal
    } else {
        return None;
    };
    match (other.m, other.n) {
        (0, 2) | (2, 0) => Some("photons_stay"),
        (0, 1) | (1, 0) => Some("preferred_crosstalk"),
        (1, 2) | (2, 1) => Some("disfavoured_crosstalk"),
        _ => None,
    }
}

pub fn rank(rc: &RunConfig, signal: Option<ModeIndex>) -> Result<RankReport> {
    let turbulent = Engine::new(constants(rc, rc.turbulence)?);
    let vacuum = Engine::new(constants(rc, TurbulenceSpec::Vacuum)?);
    let applied = vacuum.normalization_scale(rc.normalize.normalization())?;
    let pairs: Vec<ModePair> = match signal {
        Some(s) => rc.modes.iter().map(|&i| ModePair::new(s, i)).collect(),
        None => rc
            .modes
            .iter()
            .enumerate()
            .flat_map(|(a, &s)| rc.modes[a..].iter().map(move |&i| ModePair::new(s, i)))
            .collect(),
    };
    let mut allowed = Vec::new();
    let mut forbidden = Vec::new();
    for pair in pairs {
        let p_vacuum = vacuum.joint_probability(pair)? * applied.scale;
        let p_turbulent = turbulent.joint_probability(pair)? * applied.scale;
        let is_allowed = selection_rule_allowed(pair, ModeIndex::GAUSSIAN);
        let score = match (is_allowed, p_vacuum > 0.0) {
            (true, true) => p_turbulent / p_vacuum,
            (true, false) => 0.0,
            (false, _) => p_turbulent,
        };
        let entry = RankEntry {
            pair: pair.to_string(),
            p_vacuum,
            p_turbulent,
            score,
            highlight: highlight(pair).map(str::to_string),
        };
        if is_allowed {
            allowed.push(entry);
        } else {
            forbidden.push(entry);
        }
    }
    allowed.sort_by(|a, b| b.score.total_cmp(&a.score));
    forbidden.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(RankReport {
        params: ChannelParams::new(turbulent.constants()),
        normalization: (&applied).into(),
        allowed,
        forbidden,
    })
}

pub fn cmd_rank(rc: &RunConfig, signal: Option<ModeIndex>) -> Result<Outcome> {
    let report = rank(rc, signal)?;
    Ok(Outcome {
        text: render(&report, rc.format, || report.to_csv(rc.precision))?,
        output: rc.output.clone(),
        passed: true,
    })
}

pub fn validation_csv(report: &ValidationReport) -> String {
    let mut out = String::from("criterion,name,passed,max_deviation,tolerance\n");
    for c in &report.criteria {
        out.push_str(&format!(
            "{},{},{},{:e},{:e}\n",
            c.id,
            c.name.replace(',', ";"),
            c.passed,
            c.max_deviation,
            c.tolerance
        ));
    }
    out
}

pub fn cmd_validate(rc: &RunConfig, args: &ValidateArgs, format: OutputFormat) -> Result<Outcome> {
    if !args.perturb_gamma.is_finite() || args.perturb_gamma <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma perturbation must exceed -1, got {}",
            args.perturb_gamma
        )));
    }
    let opts = ValidationOptions {
        config: rc.optical,
        vacuum_only: args.vacuum_only,
        gamma_perturbation: args.perturb_gamma,
        oracle_nodes: args.oracle_nodes,
    };
    crate::oracle::QuadratureSpec {
        nodes: opts.oracle_nodes,
        ..crate::oracle::QuadratureSpec::for_config(&opts.config)
    }
    .validate(&opts.config)?;
    let report = validate::run(&opts);
    for c in &report.criteria {
        eprintln!(
            "[{}] {}. {} (max deviation {:.3e}, tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.max_deviation,
            c.tolerance
        );
    }
    Ok(Outcome {
        text: render(&report, format, || validation_csv(&report))?,
        output: rc.output.clone(),
        passed: report.passed,
    })
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() || matches!(err, Error::Calibration(_)) {
        EXIT_INVALID_INPUT
    } else {
        EXIT_NUMERICAL_FAILURE
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Matrix(a) => cmd_matrix(&a.link.run_config(&a.turbulence, &a.modes)?),
        Command::Sweep(a) => {
            let rc = a
                .link
                .run_config(&TurbulenceArgs::default(), &ModeArgs::default())?;
            let grid = match &a.grid {
                Some(g) => parse_grid(g)?,
                None => validate::default_rytov_grid(),
            };
            cmd_sweep(&rc, &grid, &parse_pairs(&a.pairs)?)
        }
        Command::Rank(a) => cmd_rank(&a.link.run_config(&a.turbulence, &a.modes)?, a.signal),
        Command::Validate(a) => {
            let settings = a
                .link
                .settings(&TurbulenceArgs::default(), &ModeArgs::default())?;
            let format = settings.format.unwrap_or(OutputFormat::Json);
            cmd_validate(&settings.resolve()?, a, format)
        }
    }
}

fn emit(outcome: &Outcome) -> std::io::Result<()> {
    match &outcome.output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome) {
                eprintln!("error: cannot write output: {e}");
                return EXIT_INVALID_INPUT;
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
