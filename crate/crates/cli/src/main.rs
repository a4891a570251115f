use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iwce::entropy::Form;
use iwce_cli::commands::{self, Problem};
use iwce_cli::scan::scan_monotonicity;
use iwce_cli::spec::{parse_bound, Axis, Command, ConventionChoice, DistSpec, Format, MeasureChoice, RunSpec, Tolerances};
use iwce_cli::suite::{run_suite, SuiteConfig};
use iwce_cli::CliError;

const DEFAULT_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(name = "iwce", version, about = "Interval weighted cumulative entropies and their bounds")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate one measure on one window.
    Compute(Common),
    /// Evaluate one measure over a (t1, t2) grid.
    Sweep(Common),
    /// Run the full verification suite.
    Verify(Common),
    /// Scan the exponential closed forms for monotonicity in t1.
    ScanMonotonicity(Common),
    /// Summarize a file of nonnegative observations, one per line.
    Ingest {
        path: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every subcommand. Each one overrides the matching
/// field of a `--spec` file.
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run spec; explicit flags take precedence over its fields.
    #[arg(long)]
    spec: Option<String>,
    /// Distribution: exp:rate=R, uniform:lower=A,upper=B, gev:mu=M,sigma=S,xi=X or emp:PATH.
    #[arg(long)]
    dist: Option<String>,
    /// Weight: const, poly:c0,c1,..., exp:ALPHA or gevpoly:c0,c1,...
    #[arg(long)]
    weight: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Upper window end; `inf` is accepted.
    #[arg(long, allow_hyphen_values = true)]
    t2: Option<String>,
    /// ratio, proper or both.
    #[arg(long)]
    convention: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    /// `lo:hi:n` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    t1_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t2_grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
    /// Evaluate the closed forms with their literal published constants.
    #[arg(long)]
    as_printed: bool,
    #[arg(long)]
    output: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    /// Merges the flags over the spec file (if any) and normalizes.
    fn resolve(self, command: Command) -> Result<RunSpec, CliError> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
                let s = RunSpec::from_json(&text)?;
                if s.command != command {
                    return Err(CliError::usage(format!(
                        "{path}: spec is for command {:?}, not {:?}",
                        s.command, command
                    )));
                }
                s
            }
            None => RunSpec::new(command),
        };
        macro_rules! over {
            ($($field:ident),*) => {$( if self.$field.is_some() { spec.$field = self.$field; } )*};
        }
        over!(dist, weight, t1, t2, t1_grid, t2_grid, seed, output);
        if let Some(c) = &self.convention {
            spec.convention = Some(c.parse()?);
        }
        if let Some(m) = &self.measure {
            spec.measure = Some(m.parse()?);
        }
        if let Some(f) = &self.format {
            spec.format = Some(f.parse()?);
        }
        let t = &mut spec.tolerances;
        t.abs_tol = self.abs_tol.or(t.abs_tol);
        t.rel_tol = self.rel_tol.or(t.rel_tol);
        t.max_subdivisions = self.max_subdivisions.or(t.max_subdivisions);
        spec.as_printed |= self.as_printed;
        spec.normalized()
    }
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

fn problem(spec: &RunSpec, default_measure: Option<MeasureChoice>) -> Result<Problem, CliError> {
    let dist: DistSpec = required(&spec.dist, "dist")?.parse()?;
    let weight = spec.weight.as_deref().unwrap_or("const").parse()?;
    let measure = spec
        .measure
        .or(default_measure)
        .ok_or_else(|| CliError::usage("missing --measure"))?;
    Problem::new(dist, weight, measure, quadrature(&spec.tolerances)?, spec.as_printed)
}

fn quadrature(t: &Tolerances) -> Result<iwce::QuadratureConfig64, CliError> {
    t.config()
}

/// Writes `text` to `--output` or stdout.
fn emit(spec: &RunSpec, text: &str) -> Result<(), CliError> {
    match &spec.output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::usage(format!("{path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_compute(spec: RunSpec) -> Result<(), CliError> {
    let p = problem(&spec, None)?;
    let (t1, t2) = if p.measure.uses_window() {
        (
            parse_bound(required(&spec.t1, "t1")?, "t1")?,
            parse_bound(required(&spec.t2, "t2")?, "t2")?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let out = commands::compute(&p, t1, t2, spec.convention.unwrap_or(ConventionChoice::Ratio))?;
    let record_on_stdout = spec.output.is_none() && spec.format.is_some();
    for r in &out.records {
        if record_on_stdout {
            eprintln!("{}", r.human());
        } else {
            println!("{}", r.human());
        }
    }
    if spec.output.is_some() || spec.format.is_some() {
        let text = commands::render(spec.format.unwrap_or_default(), || commands::to_json(&out), || out.to_csv())?;
        emit(&spec, &text)?;
    }
    Ok(())
}

fn axis(grid: &Option<String>, single: &Option<String>, name: &str) -> Result<Axis, CliError> {
    match (grid, single) {
        (Some(g), _) => g.parse(),
        (None, Some(t)) => Ok(Axis::List(vec![parse_bound(t, name)?])),
        (None, None) => Err(CliError::usage(format!("missing --{name}-grid (or --{name})"))),
    }
}

fn run_sweep(spec: RunSpec) -> Result<(), CliError> {
    let p = problem(&spec, None)?;
    let t1 = axis(&spec.t1_grid, &spec.t1, "t1")?;
    let t2 = axis(&spec.t2_grid, &spec.t2, "t2")?;
    let out = commands::sweep(&p, &t1, &t2, spec.convention.unwrap_or(ConventionChoice::Ratio))?;
    let text = commands::render(spec.format.unwrap_or_default(), || commands::to_json(&out), || out.to_csv())?;
    emit(&spec, &text)?;
    eprintln!(
        "{} cells, {} skipped, {} nonconverged",
        out.cells.len(),
        out.skipped,
        out.nonconverged
    );
    Ok(())
}

fn run_verify(spec: RunSpec) -> Result<(), CliError> {
    let mut cfg = SuiteConfig::new(spec.seed.unwrap_or(DEFAULT_SEED));
    cfg.as_printed = spec.as_printed;
    cfg.quadrature = quadrature(&spec.tolerances)?;
    if let Some(c) = spec.convention {
        cfg.conventions = c.expand();
    }
    let report = run_suite(&cfg).map_err(|e| match e {
        CliError::Checker(m) => CliError::Checker(format!("{m}\nreplay with: {}", spec.canonical())),
        other => other,
    })?;
    let json = report.to_json();
    match &spec.output {
        Some(path) => {
            fs::write(path, &json).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
            let csv_path = format!("{path}.csv");
            fs::write(&csv_path, report.summary_csv()?).map_err(|e| CliError::usage(format!("{csv_path}: {e}")))?;
            print!("{}", report.table());
        }
        None => {
            print!("{json}");
            eprint!("{}", report.table());
        }
    }
    if report.passed {
        Ok(())
    } else {
        let names: Vec<String> = report.failures().map(|m| format!("C{} {}", m.criterion, m.name)).collect();
        Err(CliError::Checker(format!("asserted checks failed: {}", names.join("; "))))
    }
}

fn run_scan(spec: RunSpec) -> Result<(), CliError> {
    let form = if spec.as_printed { Form::AsPrinted } else { Form::Corrected };
    let scan = scan_monotonicity(form)?;
    emit(&spec, &commands::to_json(&scan))?;
    match &scan.witness {
        Some(w) => eprintln!(
            "witness: rate {} alpha {} t2 {} t1* {} first difference {:.6e}",
            w.rate, w.alpha, w.t2, w.t1_star, w.first_difference
        ),
        None => eprintln!("no witness of non-monotonicity found"),
    }
    Ok(())
}

fn run_ingest(path: &str, spec: RunSpec) -> Result<(), CliError> {
    let summary = commands::ingest(path)?;
    if spec.output.is_none() && spec.format.is_some() {
        eprint!("{}", summary.table());
    } else {
        print!("{}", summary.table());
    }
    if spec.output.is_some() || spec.format.is_some() {
        let text = commands::render(
            spec.format.unwrap_or(Format::Json),
            || commands::to_json(&summary),
            || summary.to_csv(),
        )?;
        emit(&spec, &text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Compute(c) => run_compute(c.resolve(Command::Compute)?),
        Cmd::Sweep(c) => run_sweep(c.resolve(Command::Sweep)?),
        Cmd::Verify(c) => run_verify(c.resolve(Command::Verify)?),
        Cmd::ScanMonotonicity(c) => run_scan(c.resolve(Command::ScanMonotonicity)?),
        Cmd::Ingest { path, common } => {
            if !Path::new(&path).exists() {
                return Err(CliError::usage(format!("{path}: no such file")));
            }
            run_ingest(&path, common.resolve(Command::Ingest)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
