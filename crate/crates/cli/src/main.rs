//! `riskdiff`: homogeneity tests and confidence intervals for stratified
//! risk differences in combined bilateral/unilateral data, plus seeded
//! simulation studies.

mod report;

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riskdiff::inference::TestMethod;
use riskdiff::intervals::CiMethod;
use riskdiff::model::{smooth_zero_cells, StudyData, DEFAULT_SMOOTHING};
use riskdiff::montecarlo::SimPlan;
use riskdiff::table::parse_table;
use riskdiff::Error;

#[derive(Parser)]
#[command(
    name = "riskdiff",
    version,
    about = "Risk-difference homogeneity for paired-organ data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test H0: the risk difference is common across strata.
    Test {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated subset of SC, LR, W.
        #[arg(long, value_delimiter = ',', default_values_t = TestMethod::ALL.to_vec())]
        methods: Vec<TestMethod>,
    },
    /// Confidence intervals for the common risk difference.
    Ci {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated subset of W1, W2, W3, PRO, SC.
        #[arg(long, value_delimiter = ',', default_values_t = CiMethod::ALL.to_vec())]
        methods: Vec<CiMethod>,
    },
    /// Run a simulation plan or single simulation config (JSON).
    Simulate {
        config: PathBuf,
        /// Override the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the replicate count of every scenario.
        #[arg(long)]
        replicates: Option<usize>,
        /// Worker threads; 0 uses all cores. Results do not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write results.csv and report.json into this directory instead
        /// of printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Study table (CSV/TSV or JSON); `-` reads stdin.
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Added to every cell when any cell is zero; 0 disables smoothing.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    smooth: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    JsonLines,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Config { .. } | Error::Io(_) | Error::Domain(_) => 2,
            Error::Infeasible(_) | Error::Singular(_) => 3,
            Error::NonConvergence(_) | Error::Internal(_) => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

/// Parsed input after optional smoothing.
pub struct Loaded {
    pub labels: Vec<String>,
    pub data: StudyData,
    /// Smoothing constant applied, if any.
    pub smoothed: Option<f64>,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        })
    }
}

fn load(args: &InputArgs) -> Result<Loaded, Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", args.alpha)).into());
    }
    if !(args.smooth >= 0.0 && args.smooth.is_finite()) {
        return Err(Error::Domain(format!(
            "smoothing must be finite and nonnegative, got {}",
            args.smooth
        ))
        .into());
    }
    let text = read_text(&args.input)?;
    let table = parse_table(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", args.input.display(), f.message);
        f
    })?;
    let data = table.to_study()?;
    let (data, smoothed) = if args.smooth > 0.0 && data.has_zero_cell() {
        (smooth_zero_cells(&data, args.smooth), Some(args.smooth))
    } else {
        (data, None)
    };
    Ok(Loaded {
        labels: table.labels(),
        data,
        smoothed,
    })
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Test { input, methods } => {
            let loaded = load(&input)?;
            report::tests(out, &loaded, &methods, input.alpha, input.format)
        }
        Command::Ci { input, methods } => {
            let loaded = load(&input)?;
            report::intervals(out, &loaded, &methods, input.alpha, input.format)
        }
        Command::Simulate {
            config,
            seed,
            replicates,
            workers,
            out: dir,
            format,
        } => {
            let text = read_text(&config)?;
            let mut plan = SimPlan::from_json(&text)?;
            plan.override_all(seed, replicates);
            let report = plan.run(workers)?;
            match dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("results.csv"), report.to_csv()?)?;
                    std::fs::write(dir.join("report.json"), report.to_json() + "\n")?;
                    Ok(())
                }
                None => report::simulation(out, &report, format),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
