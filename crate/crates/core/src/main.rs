use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use target_ledger::io::{
    self, load_aggregate_csv, parse_constraints, parse_date, parse_entry_spec, parse_journal,
    parse_matrix_csv, series_from_reports, write_aggregate_csv, write_matrix_csv,
    write_solution_metadata,
};
use target_ledger::reconstruction::{
    constrained_reconstruct, enumerate_integer_solutions, Enumeration, Objective,
    ReconstructionConstraints,
};
use target_ledger::scenario::{
    self, parse_summary, render_summary, write_run, ReportFormat, RunManifest,
};
use target_ledger::{Error, Ledger, Money, NettingMode, ParticipantSet, Result};

const OUT_DIR_ENV: &str = "TARGET_LEDGER_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

/// TARGET balance ledger, reconstruction and scenario runner.
#[derive(Parser)]
#[command(name = "target-ledger", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Net a payment journal day by day into a bilateral matrix and aggregates.
    Net(NetArgs),
    /// Reduce a bilateral matrix to its aggregate balances.
    Aggregate(AggregateArgs),
    /// Rebuild a bilateral matrix from aggregate balances.
    Reconstruct(ReconstructArgs),
    /// Run a scenario config through one of the strategem models.
    Strategem(StrategemArgs),
    /// Verify a run manifest and print the run's summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct Output {
    /// Output directory (default: $TARGET_LEDGER_OUT_DIR, then ./out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Output {
    fn dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[derive(Args)]
struct NetArgs {
    /// CSV with header `day,payer,payee,amount_cents`.
    #[arg(long)]
    journal: PathBuf,
    /// Comma-separated participant labels, or `eurosystem`.
    #[arg(long)]
    participants: String,
    /// `cumulative` or `per-day`.
    #[arg(long, default_value = "cumulative")]
    mode: String,
    /// Calendar date of day 0.
    #[arg(long, default_value = "1999-01-04")]
    base_date: String,
    #[arg(long, default_value = "net")]
    name: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AggregateArgs {
    /// Matrix CSV with header `participant,<labels>`.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "1999-01-04")]
    date: String,
    #[arg(long, default_value = "aggregate")]
    name: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Aggregate CSV with header `date,participant,balance_cents`.
    #[arg(long)]
    aggregates: PathBuf,
    /// Date to reconstruct; required when the file holds several.
    #[arg(long)]
    date: Option<String>,
    /// `min-frobenius-norm`, `min-l1` or `feasibility-only`.
    #[arg(long, default_value = "min-frobenius-norm")]
    objective: String,
    /// Pin entry `i,j` (1-based or labels) to `value_cents`.
    #[arg(long, value_name = "I,J,CENTS")]
    fix: Vec<String>,
    /// Lower bound on entry `i,j`
    #[arg(long, value_name = "I,J,CENTS")]
    lower: Vec<String>,
    /// Upper bound on entry `i,j`
    #[arg(long, value_name = "I,J,CENTS")]
    upper: Vec<String>,
    /// CSV with header `i,j,kind,value_cents`.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// List every solution on a grid instead of optimising (n <= 4).
    #[arg(long)]
    enumerate: bool,
    /// Largest entry magnitude for --enumerate, in cents.
    #[arg(long)]
    bound: Option<i128>,
    /// Grid spacing for --enumerate, in cents.
    #[arg(long)]
    quantum: Option<i128>,
    /// Refuse --enumerate when the grid has more candidate points than this
    #[arg(long)]
    budget: Option<u128>,
    #[arg(long, default_value = "reconstruct")]
    name: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StrategemArgs {
    /// rollover, love_letters, ela, anfa, haircut or target.
    name: String,
    /// Scenario file
    #[arg(long)]
    config: PathBuf,
    /// `csv` or `text`.
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReportArgs {
    /// `<name>.manifest.txt` written by an earlier run
    #[arg(long)]
    manifest: PathBuf,
    /// `text` or `csv`
    #[arg(long, default_value = "text")]
    format: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("E_USAGE: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let message = e.to_string().replace('\n', " ");
            eprintln!("{}: {message}", kind.code());
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Net(args) => net(args),
        Command::Aggregate(args) => aggregate(args),
        Command::Reconstruct(args) => reconstruct(args),
        Command::Strategem(args) => {
            let format: ReportFormat = args.format.parse()?;
            let dir = args.output.dir();
            let manifest = scenario::run_scenario(&args.config, Some(&args.name), &dir, format)?;
            announce(&dir, &manifest);
            Ok(())
        }
        Command::Report(args) => report(args),
    }
}

fn announce(dir: &Path, manifest: &RunManifest) {
    for o in &manifest.outputs {
        println!("{} sha256={}", dir.join(&o.path).display(), o.sha256);
    }
}

fn participants(spec: &str) -> Result<ParticipantSet> {
    match spec {
        "eurosystem" => Ok(ParticipantSet::eurosystem(false, false)),
        "eurosystem+ecb" => Ok(ParticipantSet::eurosystem(true, false)),
        list => ParticipantSet::new(list.split(',').map(str::trim)),
    }
}

fn usage(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn net(args: NetArgs) -> Result<()> {
    let set = participants(&args.participants)?;
    let mode = match args.mode.as_str() {
        "cumulative" => NettingMode::Cumulative,
        "per-day" | "per_day" => NettingMode::PerDay,
        other => {
            return Err(usage(
                "mode",
                format!("`{other}` is not cumulative or per-day"),
            ))
        }
    };
    let base = parse_date(&args.base_date)?;
    let text = io::read_to_string(&args.journal)?;
    let payments = parse_journal(&text, &args.journal.display().to_string(), &set)?;
    let mut ledger = Ledger::new(set.len(), mode);
    let mut reports = Vec::new();
    for chunk in payments.chunk_by(|a, b| a.day == b.day) {
        reports.push(ledger.close_day(chunk[0].day, chunk)?.1);
    }
    let series = series_from_reports(&set, &reports, base)?;
    series.check_zero_sum()?;
    let files = vec![
        (
            format!("{}.matrix.csv", args.name),
            write_matrix_csv(&set, ledger.matrix()).into_bytes(),
        ),
        (
            format!("{}.aggregates.csv", args.name),
            write_aggregate_csv(&series).into_bytes(),
        ),
    ];
    let dir = args.output.dir();
    let manifest = write_run(
        &dir,
        &args.name,
        "net",
        &args.journal.display().to_string(),
        text.as_bytes(),
        0,
        files,
    )?;
    announce(&dir, &manifest);
    Ok(())
}

fn aggregate(args: AggregateArgs) -> Result<()> {
    let text = io::read_to_string(&args.matrix)?;
    let (set, matrix) = parse_matrix_csv(&text, &args.matrix.display().to_string())?;
    let report = matrix.aggregate(0)?;
    let series = series_from_reports(&set, &[report], parse_date(&args.date)?)?;
    let files = vec![(
        format!("{}.aggregates.csv", args.name),
        write_aggregate_csv(&series).into_bytes(),
    )];
    let dir = args.output.dir();
    let manifest = write_run(
        &dir,
        &args.name,
        "aggregate",
        &args.matrix.display().to_string(),
        text.as_bytes(),
        0,
        files,
    )?;
    announce(&dir, &manifest);
    Ok(())
}

fn reconstruct(args: ReconstructArgs) -> Result<()> {
    let text = io::read_to_string(&args.aggregates)?;
    let series = load_aggregate_csv(&args.aggregates)?;
    let dates = series.dates();
    let date = match (&args.date, dates.as_slice()) {
        (Some(d), _) => parse_date(d)?,
        (None, [only]) => *only,
        (None, []) => return Err(usage("aggregates", "file holds no rows")),
        (None, _) => {
            return Err(usage(
                "date",
                "file holds several dates; choose one with --date",
            ))
        }
    };
    let (set, report) = series.report(date, 0)?;
    let n = set.len();

    let mut files = Vec::new();
    if args.enumerate {
        if !(args.fix.is_empty()
            && args.lower.is_empty()
            && args.upper.is_empty()
            && args.constraints.is_none())
        {
            return Err(usage("enumerate", "does not combine with constraints"));
        }
        let bound = args
            .bound
            .ok_or_else(|| usage("bound", "required with --enumerate"))?;
        let mut grid = Enumeration::new(Money::from_cents(bound));
        if let Some(q) = args.quantum {
            grid = grid.with_quantum(Money::from_cents(q));
        }
        if let Some(b) = args.budget {
            grid = grid.with_budget(b);
        }
        let solutions = enumerate_integer_solutions(&report, &grid)?;
        let mut out = String::from("solution,i,j,value_cents\n");
        for (k, m) in solutions.iter().enumerate() {
            for a in 0..n {
                for b in a + 1..n {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        k + 1,
                        set.labels()[a],
                        set.labels()[b],
                        m.get(a, b)
                    ));
                }
            }
        }
        files.push((format!("{}.solutions.csv", args.name), out.into_bytes()));
    } else {
        let objective: Objective = args.objective.parse()?;
        let mut constraints = ReconstructionConstraints::new(objective);
        for (specs, kind) in [
            (&args.fix, "fix"),
            (&args.lower, "lower"),
            (&args.upper, "upper"),
        ] {
            for spec in specs {
                let (i, j, v) =
                    parse_entry_spec(spec, &set).map_err(|e| usage(kind, e.to_string()))?;
                constraints = match kind {
                    "fix" => constraints.fix(i, j, v),
                    "lower" => constraints.lower(i, j, v),
                    _ => constraints.upper(i, j, v),
                };
            }
        }
        if let Some(path) = &args.constraints {
            let text = io::read_to_string(path)?;
            constraints.constraints.extend(parse_constraints(
                &text,
                &path.display().to_string(),
                &set,
            )?);
        }
        let rec = constrained_reconstruct(&report, &constraints)?;
        files.push((
            format!("{}.matrix.csv", args.name),
            write_matrix_csv(&set, &rec.matrix).into_bytes(),
        ));
        files.push((
            format!("{}.solution.txt", args.name),
            write_solution_metadata(&rec).into_bytes(),
        ));
    }
    let dir = args.output.dir();
    let manifest = write_run(
        &dir,
        &args.name,
        "reconstruct",
        &args.aggregates.display().to_string(),
        text.as_bytes(),
        0,
        files,
    )?;
    announce(&dir, &manifest);
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let text = io::read_to_string(&args.manifest)?;
    let manifest = RunManifest::parse(&text, &args.manifest.display().to_string())?;
    let dir = args.manifest.parent().unwrap_or(Path::new("."));
    manifest.verify(dir)?;
    print!(
        "{}",
        render_summary(
            &[
                ("command".to_string(), manifest.command.clone()),
                ("config".to_string(), manifest.config.clone()),
                ("seed".to_string(), manifest.seed.to_string()),
                (
                    "engine_version".to_string(),
                    manifest.engine_version.clone()
                ),
                ("outputs".to_string(), manifest.outputs.len().to_string()),
                ("digests".to_string(), "verified".to_string()),
            ],
            format
        )
    );
    for o in &manifest.outputs {
        if o.path.ends_with(".summary.txt") || o.path.ends_with(".solution.txt") {
            let body = io::read_to_string(&dir.join(&o.path))?;
            print!("{}", render_summary(&parse_summary(&body), format));
        }
    }
    Ok(())
}
