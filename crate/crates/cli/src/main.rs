//! `spectra`: enumerate, count and verify merger patterns, classify the
//! pattern realized by a matrix family, and generate witness families.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spectra_core::spectral::{events_json, write_paths_csv, DEFAULT_GRID_STEPS};
use spectra_core::{
    build_witness, classify, count_p_closed, count_p_recurrence, count_t_closed,
    count_t_recurrence, enumerate_noncrossing_capped, enumerate_symmetric_capped, parse_symbol,
    series_f, series_g, track_paths, witness_lambda_max, BigCount, CountTable, MatrixFamily,
    PatternError, SpectralError, Tolerances, DEFAULT_ENUM_CAP,
};

const CAP_ENV: &str = "SPECTRA_ENUM_CAP";

mod exit {
    pub const USAGE: u8 = 1;
    pub const CAP: u8 = 2;
    pub const MISMATCH: u8 = 3;
    pub const INCOMPLETE: u8 = 4;
    pub const DEGENERATE: u8 = 5;
    pub const CROSSING: u8 = 6;
    pub const WRITE: u8 = 7;
}

#[derive(Parser, Debug)]
#[command(name = "spectra", version, about = "Merger patterns of pairwise level confluences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List non-crossing (or centrally symmetric) merger patterns of 2J levels
    Enumerate {
        #[arg(short = 'J', value_name = "J")]
        j: usize,
        /// Only patterns fixed by the reflection n -> 2J + 1 - n
        #[arg(long)]
        symmetric: bool,
        #[arg(long, value_enum, default_value_t = ListFormat::Symbols)]
        format: ListFormat,
        /// Largest J to enumerate (default: $SPECTRA_ENUM_CAP or 14)
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Print T (all patterns) and/or P (symmetric patterns) for J = 0..=J_max
    Count {
        #[arg(long = "J-max", value_name = "J_MAX")]
        j_max: usize,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        #[arg(long, value_enum, default_value_t = Route::Closed)]
        route: Route,
    },
    /// Cross-check enumeration, recurrences, closed forms and series
    Verify {
        /// Largest J checked against full enumeration
        #[arg(long = "enum", value_name = "J")]
        enum_max: usize,
        /// Largest J checked between recurrences, closed forms and series
        #[arg(long = "series", value_name = "J")]
        series_max: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Detect the merger pattern realized by a family config
    Classify {
        config: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Write a family config realizing a symmetric non-crossing pattern
    Witness {
        symbol: String,
        /// Output path (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the tracked eigenvalue paths of a family as CSV
    Paths {
        config: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[arg(long = "lambda-max")]
    lambda_max: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    steps: usize,
    /// Relative reality tolerance on |Im E|
    #[arg(long = "eps-im", default_value_t = 1e-8)]
    eps_im: f64,
    /// Relative minimum gap between starting levels
    #[arg(long = "eps-gap", default_value_t = 1e-8)]
    eps_gap: f64,
    /// Merger localization width in lambda
    #[arg(long = "eps-lambda", default_value_t = 1e-6)]
    eps_lambda: f64,
}

impl SweepArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            im_rel: self.eps_im,
            gap_rel: self.eps_gap,
            lambda: self.eps_lambda,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ListFormat {
    Symbols,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "T")]
    T,
    #[value(name = "P")]
    P,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Recurrence,
    Closed,
    Series,
    All,
}

/// A failed command: message for standard error and its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<PatternError> for Failure {
    fn from(e: PatternError) -> Self {
        let code = match e {
            PatternError::CapExceeded { .. } => exit::CAP,
            _ => exit::USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        let (code, events) = match &e {
            SpectralError::IncompleteSweep { .. } => (exit::INCOMPLETE, None),
            SpectralError::DegenerateMerger { events, .. } => (exit::DEGENERATE, Some(events)),
            SpectralError::CrossingPattern { events, .. }
            | SpectralError::AsymmetricPattern { events, .. } => (exit::CROSSING, Some(events)),
            _ => (exit::USAGE, None),
        };
        let mut message = e.to_string();
        if let Some(events) = events {
            message.push_str("\nevents: ");
            message.push_str(&events_json(events));
        }
        Failure::new(code, message)
    }
}

fn write_failure(e: io::Error) -> Failure {
    Failure::new(exit::WRITE, format!("write failed: {e}"))
}

fn enum_cap(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::new(exit::USAGE, format!("{CAP_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn load_family(path: &PathBuf) -> Result<MatrixFamily, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(exit::USAGE, format!("cannot read {}: {e}", path.display())))?;
    Ok(MatrixFamily::from_json(&text)?)
}

fn cmd_enumerate(
    out: &mut impl Write,
    j: usize,
    symmetric: bool,
    format: ListFormat,
    cap: Option<usize>,
) -> Result<(), Failure> {
    if j == 0 {
        return Err(Failure::new(exit::USAGE, "J must be at least 1"));
    }
    let cap = enum_cap(cap)?;
    let patterns = if symmetric {
        enumerate_symmetric_capped(j, cap)?
    } else {
        enumerate_noncrossing_capped(j, cap)?
    };
    match format {
        ListFormat::Symbols => {
            for p in &patterns {
                writeln!(out, "{p}").map_err(write_failure)?;
            }
        }
        ListFormat::Json => {
            let pairs: Vec<Vec<[usize; 2]>> = patterns
                .iter()
                .map(|p| p.pairs().map(|(a, b)| [a, b]).collect())
                .collect();
            let text = serde_json::to_string(&pairs).map_err(|e| Failure::new(exit::WRITE, e.to_string()))?;
            writeln!(out, "{text}").map_err(write_failure)?;
        }
    }
    eprintln!("count: {}", patterns.len());
    Ok(())
}

fn count_column(j_max: usize, which: Which, route: Route) -> Result<Vec<BigCount>, Failure> {
    let is_t = which == Which::T;
    let by_route = |route: Route| -> Vec<BigCount> {
        match route {
            Route::Recurrence => {
                let mut table = CountTable::new();
                (0..=j_max).map(|j| if is_t { table.t(j) } else { table.p(j) }).collect()
            }
            Route::Closed => (0..=j_max)
                .map(|j| if is_t { count_t_closed(j) } else { count_p_closed(j) })
                .collect(),
            Route::Series => {
                let s = if is_t { series_f(j_max + 1) } else { series_g(j_max + 1) };
                s.coefficients
            }
            Route::All => unreachable!(),
        }
    };
    if route != Route::All {
        return Ok(by_route(route));
    }
    let reference = by_route(Route::Recurrence);
    for other in [Route::Closed, Route::Series] {
        let values = by_route(other);
        if let Some(j) = (0..=j_max).find(|&j| values[j] != reference[j]) {
            return Err(Failure::new(
                exit::MISMATCH,
                format!(
                    "{} disagrees at J={j}: recurrence {} vs {other:?} {}",
                    if is_t { "T" } else { "P" },
                    reference[j],
                    values[j]
                ),
            ));
        }
    }
    Ok(reference)
}

fn cmd_count(out: &mut impl Write, j_max: usize, which: Which, route: Route) -> Result<(), Failure> {
    let mut columns: Vec<(&str, Vec<BigCount>)> = Vec::new();
    if matches!(which, Which::T | Which::Both) {
        columns.push(("T", count_column(j_max, Which::T, route)?));
    }
    if matches!(which, Which::P | Which::Both) {
        columns.push(("P", count_column(j_max, Which::P, route)?));
    }
    let header: Vec<&str> = std::iter::once("J").chain(columns.iter().map(|c| c.0)).collect();
    writeln!(out, "{}", header.join("\t")).map_err(write_failure)?;
    for j in 0..=j_max {
        let mut row = j.to_string();
        for (_, values) in &columns {
            row.push('\t');
            row.push_str(&values[j].to_string());
        }
        writeln!(out, "{row}").map_err(write_failure)?;
    }
    Ok(())
}

fn cmd_verify(
    out: &mut impl Write,
    enum_max: usize,
    series_max: usize,
    cap: Option<usize>,
) -> Result<(), Failure> {
    let cap = enum_cap(cap)?;
    if enum_max > cap {
        return Err(PatternError::CapExceeded { j: enum_max, cap }.into());
    }
    let mut report: Vec<(String, Result<(), String>)> = Vec::new();
    let check = |cond: bool, what: String| if cond { Ok(()) } else { Err(what) };

    let top = enum_max.max(series_max);
    let f = series_f(top + 1);
    let g = series_g(top + 1);

    // enumeration against every counting route
    let mut enum_result = Ok(());
    for j in 0..=enum_max {
        let (t, p) = (count_t_closed(j), count_p_closed(j));
        let (nt, np) = if j == 0 {
            (1, 1)
        } else {
            let nc = enumerate_noncrossing_capped(j, cap)?;
            let sym = enumerate_symmetric_capped(j, cap)?;
            let filtered: Vec<_> = nc.iter().filter(|q| q.is_centrally_symmetric()).cloned().collect();
            if !nc.iter().all(|q| q.is_noncrossing()) || filtered != sym {
                enum_result = Err(format!("symmetric enumeration differs from filter at J={j}"));
                break;
            }
            (nc.len() as u64, sym.len() as u64)
        };
        let agree = t == nt
            && p == np
            && count_t_recurrence(j) == t
            && count_p_recurrence(j) == p
            && f.coefficients[j] == t
            && g.coefficients[j] == p;
        if let Err(e) = check(agree, format!("four-way disagreement at J={j}")) {
            enum_result = Err(e);
            break;
        }
    }
    report.push((format!("enumeration vs counts, J <= {enum_max}"), enum_result));

    let mut table = CountTable::new();
    let mut series_result = Ok(());
    for j in 0..=series_max {
        let (t, p) = (table.t(j), table.p(j));
        let ok = t == count_t_closed(j)
            && p == count_p_closed(j)
            && f.coefficients[j] == t
            && g.coefficients[j] == p
            && p <= t;
        if !ok {
            series_result = Err(format!("disagreement at J={j}"));
            break;
        }
    }
    report.push((
        format!("recurrences vs closed forms vs series, J <= {series_max}"),
        series_result,
    ));

    let known = [1u64, 1, 2, 3, 6, 10, 20, 35, 70];
    let table_ok = known.iter().enumerate().all(|(j, &v)| count_p_closed(j) == v);
    report.push(("P(0..=8) = 1,1,2,3,6,10,20,35,70".into(), check(table_ok, "table mismatch".into())));

    let mut failed = false;
    for (name, result) in &report {
        match result {
            Ok(()) => writeln!(out, "PASS  {name}"),
            Err(e) => {
                failed = true;
                writeln!(out, "FAIL  {name}: {e}")
            }
        }
        .map_err(write_failure)?;
    }
    if failed {
        return Err(Failure::new(exit::MISMATCH, "verification failed"));
    }
    Ok(())
}

fn cmd_classify(out: &mut impl Write, config: &PathBuf, sweep: &SweepArgs) -> Result<(), Failure> {
    let fam = load_family(config)?;
    let observed = classify(&fam, sweep.lambda_max, sweep.steps, &sweep.tolerances())?;
    writeln!(out, "{}", observed.pattern).map_err(write_failure)?;
    writeln!(out, "{}", events_json(&observed.events)).map_err(write_failure)?;
    Ok(())
}

fn cmd_witness(out: &mut impl Write, symbol: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    let pattern = parse_symbol(symbol)?;
    let fam = build_witness(&pattern)?;
    let lambda_max = witness_lambda_max(&pattern)?;
    let json = fam.to_json();
    match path {
        Some(path) => {
            fs::write(path, format!("{json}\n")).map_err(write_failure)?;
            writeln!(out, "suggested lambda_max: {lambda_max}").map_err(write_failure)?;
        }
        None => {
            writeln!(out, "{json}").map_err(write_failure)?;
            eprintln!("suggested lambda_max: {lambda_max}");
        }
    }
    Ok(())
}

fn cmd_paths(config: &PathBuf, sweep: &SweepArgs, path: &PathBuf) -> Result<(), Failure> {
    let fam = load_family(config)?;
    let paths = track_paths(&fam, sweep.lambda_max, sweep.steps, &sweep.tolerances())?;
    let file = fs::File::create(path).map_err(write_failure)?;
    let mut writer = BufWriter::new(file);
    write_paths_csv(&paths, &mut writer).map_err(write_failure)?;
    writer.flush().map_err(write_failure)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Enumerate {
            j,
            symmetric,
            format,
            cap,
        } => cmd_enumerate(&mut out, *j, *symmetric, *format, *cap),
        Command::Count { j_max, which, route } => cmd_count(&mut out, *j_max, *which, *route),
        Command::Verify {
            enum_max,
            series_max,
            cap,
        } => cmd_verify(&mut out, *enum_max, *series_max, *cap),
        Command::Classify { config, sweep } => cmd_classify(&mut out, config, sweep),
        Command::Witness { symbol, out: path } => cmd_witness(&mut out, symbol, path.as_ref()),
        Command::Paths { config, sweep, out: path } => cmd_paths(config, sweep, path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
