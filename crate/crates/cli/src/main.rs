//! `cosserat`: validate model files, run analyses, and run convergence
//! studies against closed-form references.
//!
//! Exit codes: 0 success, 2 usage or model error, 3 unreadable input,
//! 4 solver failure, 5 no reference solution for the requested study.

mod report;
mod study;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cosserat_core::{parse_model, validate_model, AnalysisKind, AnalysisSpec, Model};

use study::Quantity;

const EXIT_USAGE: u8 = 2;
const EXIT_UNREADABLE: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_NO_ORACLE: u8 = 5;

#[derive(Parser)]
#[command(name = "cosserat", version, about = "Planar rod element solver for slender structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report every problem found.
    Validate { file: PathBuf },
    /// Run the file's analysis (or an override) and write results.csv.
    Run {
        file: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum)]
        analysis: Option<AnalysisArg>,
        /// Subdivisions for every beam.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        elements: Option<u64>,
        /// Series truncation order (modal analysis).
        #[arg(long)]
        order: Option<usize>,
        /// Load steps (nonlinear analysis).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: Option<u64>,
        /// Newton tolerance (nonlinear analysis).
        #[arg(long, value_parser = positive_float)]
        tol: Option<f64>,
    },
    /// Compare a quantity against its closed form over several subdivision
    /// counts and write study.csv.
    Study {
        file: PathBuf,
        /// Comma-separated subdivision counts, e.g. `1,4,10`.
        #[arg(long, value_parser = element_counts)]
        elements: Counts,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisArg {
    Static,
    Buckling,
    Modal,
    Nonlinear,
}

impl From<AnalysisArg> for AnalysisKind {
    fn from(a: AnalysisArg) -> Self {
        match a {
            AnalysisArg::Static => AnalysisKind::LinearStatic,
            AnalysisArg::Buckling => AnalysisKind::Buckling,
            AnalysisArg::Modal => AnalysisKind::Modal,
            AnalysisArg::Nonlinear => AnalysisKind::NonlinearStatic,
        }
    }
}

#[derive(Clone, Debug)]
struct Counts(Vec<usize>);

fn element_counts(s: &str) -> Result<Counts, String> {
    let counts = s
        .split(',')
        .map(|c| match c.trim().parse::<usize>() {
            Ok(0) => Err("element counts must be at least 1".to_string()),
            Ok(n) => Ok(n),
            Err(_) => Err(format!("`{c}` is not an element count")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Counts(counts))
}

fn positive_float(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Reads and parses `path`, printing diagnostics on failure.
fn load(path: &Path) -> Result<Model, u8> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_UNREADABLE);
        }
    };
    parse_model(&text).map_err(|diags| {
        for d in diags {
            eprintln!("{}:{}:{}: {}", path.display(), d.span.line, d.span.col_start, d.message);
        }
        EXIT_USAGE
    })
}

fn validate(file: &Path) -> u8 {
    match load(file) {
        Ok(_) => {
            println!("OK");
            0
        }
        Err(code) => code,
    }
}

struct Overrides {
    analysis: Option<AnalysisKind>,
    elements: Option<usize>,
    order: Option<usize>,
    steps: Option<usize>,
    tol: Option<f64>,
}

fn apply_overrides(mut model: Model, o: &Overrides) -> Result<Model, String> {
    if let Some(kind) = o.analysis {
        if model.analysis.kind() != kind {
            model.analysis = kind.default_spec();
        }
    }
    if let Some(n) = o.elements {
        model = model.with_subdivisions(n);
    }
    match (&mut model.analysis, o.order) {
        (AnalysisSpec::Modal { order, .. }, Some(m)) => *order = m,
        (_, Some(_)) => return Err("--order applies to modal analysis only".into()),
        _ => {}
    }
    if o.steps.is_some() || o.tol.is_some() {
        let AnalysisSpec::NonlinearStatic(s) = &mut model.analysis else {
            return Err("--steps and --tol apply to nonlinear analysis only".into());
        };
        if let Some(k) = o.steps {
            s.steps = k;
        }
        if let Some(t) = o.tol {
            s.tol = t;
        }
    }
    let diags = validate_model(&model);
    if let Some(d) = diags.first() {
        return Err(d.to_string());
    }
    Ok(model)
}

fn run(file: &Path, out: &Path, overrides: Overrides) -> u8 {
    let model = match load(file) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let model = match apply_overrides(model, &overrides) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let (csv, failure) = report::run_csv(&model);
    if let Err(code) = write_output(out, "results.csv", &csv) {
        return code;
    }
    match failure {
        Some(msg) => {
            eprintln!("error: {msg}");
            EXIT_SOLVER
        }
        None => 0,
    }
}

fn run_study(file: &Path, counts: &[usize], quantity: Quantity, out: &Path) -> u8 {
    let model = match load(file) {
        Ok(m) => m,
        Err(code) => return code,
    };
    match study::convergence_study(&model, counts, quantity) {
        Ok(rows) => match write_output(out, "study.csv", &study::to_csv(&rows)) {
            Ok(()) => 0,
            Err(code) => code,
        },
        Err(study::StudyError::NoReference(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NO_ORACLE
        }
        Err(study::StudyError::Solve(e)) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), u8> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|()| fs::write(&path, contents))
        .map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_UNREADABLE
        })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Run {
            file,
            out,
            analysis,
            elements,
            order,
            steps,
            tol,
        } => run(
            &file,
            &out,
            Overrides {
                analysis: analysis.map(Into::into),
                elements: elements.map(|n| n as usize),
                order,
                steps: steps.map(|n| n as usize),
                tol,
            },
        ),
        Command::Study {
            file,
            elements,
            quantity,
            out,
        } => run_study(&file, &elements.0, quantity, &out),
    };
    ExitCode::from(code)
}
