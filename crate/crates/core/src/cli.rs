//! Command-line front end.
//!
//! Exit codes: 0 success, 1 normality rejected by `decide`, 2 usage error,
//! 3 runtime error. `GJB_THREADS` caps the worker pool; results do not
//! depend on it.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::distributions::{sample_sn, SkewNormalShape};
use crate::gjb::{Calibration, MonteCarloPlan};
use crate::io::{
    self, CampaignReport, DecideReport, Format, RejectSizeReport, Report, TestReport,
    SCHEMA_VERSION,
};
use crate::tables::{self, Budget};
use crate::testing::{
    duplication_decision, rejection_size_search, simulate_alternative, subsample_screen,
    CampaignConfig, DataLaw, DecisionOptions, Hypothesis, SigmaRoute, SizeSearchOptions, Verdict,
};
use crate::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gjb",
    version,
    about = "Generalized Jarque-Bera test for skew-normal data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a skew-normal sample and write it as a one-column CSV.
    Sample(SampleArgs),
    /// Test a sample against SN(alpha).
    Test(TestArgs),
    /// Mean p-value of the test under the true model.
    Simulate(SimulateArgs),
    /// Mean p-value of the test against data from another law.
    Power(PowerArgs),
    /// Smallest sample size at which normal data is rejected against SN(alpha).
    RejectSize(RejectSizeArgs),
    /// Reproduce one of the reference tables.
    Tables(TablesArgs),
    /// Sample-duplication decision: symmetric or not.
    Decide(DecideArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CalibrationArg {
    Exact,
    Legacy,
}

impl From<CalibrationArg> for Calibration {
    fn from(c: CalibrationArg) -> Self {
        match c {
            CalibrationArg::Exact => Calibration::Exact,
            CalibrationArg::Legacy => Calibration::Legacy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SigmaArg {
    Analytic,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BudgetArg {
    Desk,
    Full,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    /// How the covariance of the hypothesis is computed.
    #[arg(long, value_enum, default_value_t = SigmaArg::Analytic)]
    pub sigma: SigmaArg,
    /// Monte-Carlo replicates (with --sigma mc).
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub mc_reps: u64,
    /// Sample size per Monte-Carlo replicate (with --sigma mc).
    #[arg(long, default_value_t = 1_000, value_parser = clap::value_parser!(u64).range(2..))]
    pub mc_n: u64,
}

impl SigmaArgs {
    fn route(&self, seed: u64) -> SigmaRoute {
        match self.sigma {
            SigmaArg::Analytic => SigmaRoute::Analytic,
            SigmaArg::Mc => SigmaRoute::MonteCarlo(MonteCarloPlan {
                reps: self.mc_reps as usize,
                per_rep_n: self.mc_n as usize,
                seed,
            }),
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// One-column CSV sample.
    #[arg(long)]
    pub data: PathBuf,
    /// Hypothesized shape.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub sigma: SigmaArgs,
    /// Duplicate the sample this many times before testing.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub duplicate: u64,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = CalibrationArg::Exact)]
    pub calibration: CalibrationArg,
    /// Seed of the Monte-Carlo covariance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// Sample size of each replicate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub size: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Level used for the reported rejection rate.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = CalibrationArg::Exact)]
    pub calibration: CalibrationArg,
    #[command(flatten)]
    pub sigma: SigmaArgs,
    /// Include per-replicate p-values.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub campaign: CampaignArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Hypothesized shape.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Shape of the data law; standard normal when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub data_alpha: Option<f64>,
    #[command(flatten)]
    pub campaign: CampaignArgs,
}

#[derive(Debug, Args)]
pub struct RejectSizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, default_value_t = 2_000_000)]
    pub cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// First grid size; the grid doubles from here.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    pub start: u64,
    #[arg(long, value_enum, default_value_t = CalibrationArg::Exact)]
    pub calibration: CalibrationArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,
    #[arg(long, value_enum, default_value_t = BudgetArg::Desk)]
    pub budget: BudgetArg,
    /// Replications per cell (defaults: table 1 desk 1000 / full 10000,
    /// table 2 desk 1000 / full 500).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Conventions used for the simulated tables.
    #[arg(long, value_enum, default_value_t = CalibrationArg::Legacy)]
    pub calibration: CalibrationArg,
    /// Emit a JSON/CSV report instead of the text table.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Largest duplication factor.
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_cap: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap resamples for the shape interval.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub resamples: u64,
    /// Also run the random-subsample screen (experimental).
    #[arg(long)]
    pub experimental_subsample: bool,
    #[arg(long, default_value_t = 5)]
    pub subsample_size: usize,
    #[arg(long, default_value_t = 200)]
    pub subsamples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub subsample_threshold: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("GJB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            // Fails only if the pool was already initialized.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

fn emit(mut report: Report, start: Instant, output: &OutputArgs) -> Result<()> {
    report.set_wall_time(elapsed_ms(start));
    io::write_report(&report, output.out.as_deref(), output.format.into())
}

pub fn execute(command: Command) -> Result<i32> {
    let start = Instant::now();
    match command {
        Command::Sample(args) => {
            let shape = SkewNormalShape::new(args.alpha)?;
            let values = sample_sn(shape, args.n as usize, args.seed)?;
            io::write_sample_csv(&values, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Test(args) => {
            let sample = io::read_sample_csv(&args.data)?;
            let route = args.sigma.route(args.seed);
            let calibration = args.calibration.into();
            let hypothesis = Hypothesis::new(args.alpha, route, calibration)?;
            let outcome = hypothesis.test(&sample.values, args.duplicate as usize)?;
            let mut report =
                TestReport::new(args.alpha, &outcome, args.level, calibration, route.name());
            report.data = Some(display_path(&args.data));
            emit(Report::Test(report), start, &args.output)?;
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let report = campaign(
                args.alpha,
                DataLaw::SkewNormal { alpha: args.alpha },
                &args.campaign,
            )?;
            emit(Report::Simulate(report), start, &args.campaign.output)?;
            Ok(EXIT_OK)
        }
        Command::Power(args) => {
            let law = match args.data_alpha {
                Some(alpha) => DataLaw::SkewNormal { alpha },
                None => DataLaw::StandardNormal,
            };
            let report = campaign(args.alpha, law, &args.campaign)?;
            emit(Report::Power(report), start, &args.campaign.output)?;
            Ok(EXIT_OK)
        }
        Command::RejectSize(args) => {
            let options = SizeSearchOptions {
                start: args.start as usize,
                cap: args.cap,
                replications: args.reps as usize,
                calibration: args.calibration.into(),
                ..Default::default()
            };
            let search = rejection_size_search(args.alpha, args.level, args.seed, &options)?;
            let report = RejectSizeReport {
                schema_version: SCHEMA_VERSION.into(),
                alpha: args.alpha,
                level: args.level,
                cap: args.cap,
                seed: args.seed,
                replications: options.replications,
                calibration: options.calibration,
                needed_n: search.needed_n,
                cap_exceeded: search.cap_exceeded,
                grid: search.grid,
                wall_time_ms: 0,
            };
            emit(Report::RejectSize(report), start, &args.output)?;
            Ok(EXIT_OK)
        }
        Command::Tables(args) => {
            let budget = match args.budget {
                BudgetArg::Desk => Budget::Desk,
                BudgetArg::Full => Budget::Full,
            };
            let calibration = args.calibration.into();
            let reps = args.reps.map(|r| r as usize);
            let table = match args.which {
                1 => {
                    let default = if budget == Budget::Desk { 1000 } else { 10_000 };
                    tables::true_model_table(
                        reps.unwrap_or(default),
                        args.seed,
                        calibration,
                        budget,
                    )?
                }
                2 => {
                    let default = if budget == Budget::Desk { 1000 } else { 500 };
                    tables::rejection_size_table(
                        budget,
                        reps.unwrap_or(default),
                        args.seed,
                        calibration,
                    )?
                }
                _ => tables::shape_table()?,
            };
            match args.format {
                Some(format) => {
                    let output = OutputArgs {
                        out: args.out,
                        format,
                    };
                    emit(Report::Tables(table), start, &output)?;
                }
                None => io::write_text(&tables::render(&table), args.out.as_deref())?,
            }
            Ok(EXIT_OK)
        }
        Command::Decide(args) => {
            let sample = io::read_sample_csv(&args.data)?;
            let options = DecisionOptions {
                level: args.level,
                k_cap: args.k_cap as usize,
                resamples: args.resamples as usize,
                seed: args.seed,
                ..Default::default()
            };
            let decision = duplication_decision(&sample.values, &options)?;
            let screen = if args.experimental_subsample {
                Some(subsample_screen(
                    &sample.values,
                    args.subsample_size,
                    args.subsamples,
                    args.subsample_threshold,
                    args.seed,
                )?)
            } else {
                None
            };
            let report = DecideReport {
                schema_version: SCHEMA_VERSION.into(),
                data: Some(display_path(&args.data)),
                n: sample.values.len(),
                level: args.level,
                k_cap: options.k_cap,
                seed: args.seed,
                alpha_hat: decision.alpha_hat,
                interval: [decision.interval.0, decision.interval.1],
                target_size: decision.target_size,
                capped: decision.capped,
                duplication_factor: decision.outcome.duplication_factor,
                j_n: decision.outcome.j_n,
                p_value: decision.outcome.p_value,
                verdict: decision.verdict.as_str().into(),
                experimental_subsample: screen,
                wall_time_ms: 0,
            };
            emit(Report::Decide(report), start, &args.output)?;
            Ok(if decision.verdict == Verdict::RejectNormality {
                EXIT_REJECT
            } else {
                EXIT_OK
            })
        }
    }
}

fn campaign(alpha: f64, law: DataLaw, args: &CampaignArgs) -> Result<CampaignReport> {
    let config = CampaignConfig::new(alpha, args.size as usize, args.reps as usize, args.seed)
        .with_calibration(args.calibration.into())
        .with_sigma_route(args.sigma.route(args.seed));
    let result = simulate_alternative(&config, law)?;
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION.into(),
        alpha,
        data_law: match law {
            DataLaw::StandardNormal => "normal".into(),
            DataLaw::SkewNormal { alpha } => format!("sn({alpha})"),
        },
        sample_size: config.sample_size,
        replications: config.replications,
        seed: config.seed,
        sigma_route: config.sigma_route.name().into(),
        calibration: config.calibration,
        level: args.level,
        mean_p_value: result.mean_p_value,
        rejection_rate: result.rejection_rate(args.level),
        p_values: args.full.then(|| result.p_values.clone()),
        wall_time_ms: 0,
    })
}

fn display_path(path: &Path) -> String {
    path.display().to_string()
}
