//! Command-line front end.
//!
//! Data goes to the output stream (or `--output`), diagnostics to the error
//! stream. Exit codes: 0 success, 1 validation failure, 2 parse error,
//! 3 algebraic loop or singularity, 4 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::Error;
use crate::matkit::{unitarity_residual, ComplexMatrix, STRUCTURAL_TOL};
use crate::netfile::{self, format_complex, format_matrix, NetDocument, ParseError};
use crate::network::{feedback_reduce, redheffer_star, series_product, StarWiring};
use crate::slh::{validate_with_tol, LinearComponent};
use crate::stratcal::{ito_table_residuals, ito_to_strat, strat_to_ito, StratonovichModel};
use crate::transfer::{eval_transfer, freq_response_with_sigma, SIGMA_MIN};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    Reduce,
    Tf,
    Freqresp,
    Series,
    Star,
    Strat2ito,
    Ito2strat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Qnet,
}

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + step * k as f64 })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("grid `{text}` is not start:stop:count"));
        };
        let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(start), Some(stop)) = (num(a), num(b)) else {
            return Err(format!("grid `{text}` has a bad endpoint"));
        };
        let count: usize = n.trim().parse().map_err(|_| format!("grid `{text}` has a bad count"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        Ok(Grid { start, stop, count })
    }
}

fn parse_s(text: &str) -> Result<Complex64, String> {
    let (re, im) = text.split_once(',').ok_or_else(|| format!("`{text}` is not RE,IM"))?;
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match (num(re), num(im)) {
        (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
        _ => Err(format!("`{text}` is not RE,IM")),
    }
}

fn positive(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{text}` is not a positive number")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// `None` writes to the output stream.
    pub output: Option<PathBuf>,
    pub grid: Option<Grid>,
    pub s: Option<Complex64>,
    pub sigma: f64,
    /// Tolerance for unitarity and hermiticity checks.
    pub tol: f64,
    pub format: Option<OutputFormat>,
    /// Picks a component definition instead of the file's network.
    pub component: Option<String>,
    pub split_a: Option<usize>,
    pub split_b: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command, inputs: Vec<PathBuf>) -> Self {
        Self {
            command,
            inputs,
            output: None,
            grid: None,
            s: None,
            sigma: SIGMA_MIN,
            tol: STRUCTURAL_TOL,
            format: None,
            component: None,
            split_a: None,
            split_b: None,
        }
    }
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Write data here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Tolerance for unitarity and hermiticity checks.
    #[arg(long, global = true, value_parser = positive, default_value_t = STRUCTURAL_TOL)]
    tol: f64,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Use this component definition instead of the file's network.
    #[arg(long, global = true)]
    component: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Validate every component (and the reduced network, if any).
    Check { file: PathBuf },
    /// Eliminate internal channels and print the reduced component.
    Reduce { file: PathBuf },
    /// Evaluate the transfer function at one point.
    Tf {
        file: PathBuf,
        /// Point in the complex plane as RE,IM.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_s)]
        s: Complex64,
    },
    /// Frequency response along s = sigma + i*omega as CSV.
    Freqresp {
        file: PathBuf,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long, value_parser = positive, default_value_t = SIGMA_MIN)]
        sigma: f64,
    },
    /// Cascade: every output of FIRST feeds the matching input of SECOND.
    Series { first: PathBuf, second: PathBuf },
    /// Star product of A and B.
    Star {
        a: PathBuf,
        b: PathBuf,
        /// Number of outer ports of A; the rest face B.
        #[arg(long)]
        split_a: usize,
        /// Number of ports of B that face A.
        #[arg(long)]
        split_b: usize,
    },
    /// E, F, K matrix file to S, C, Omega.
    Strat2ito { file: PathBuf },
    /// S, C, Omega matrix file to E, F, K.
    Ito2strat { file: PathBuf },
}

#[derive(Debug, Parser)]
#[command(name = "linqnet", version, about = "Linear quantum feedback network tool")]
struct Root {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    sub: Sub,
}

impl RunConfig {
    /// Parses command-line arguments (including the program name).
    pub fn from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let root = <Root as Parser>::try_parse_from(args)?;
        let Common { output, tol, format, component } = root.common;
        let mut cfg = match root.sub {
            Sub::Check { file } => RunConfig::new(Command::Check, vec![file]),
            Sub::Reduce { file } => RunConfig::new(Command::Reduce, vec![file]),
            Sub::Tf { file, s } => RunConfig { s: Some(s), ..RunConfig::new(Command::Tf, vec![file]) },
            Sub::Freqresp { file, grid, sigma } => {
                RunConfig { grid: Some(grid), sigma, ..RunConfig::new(Command::Freqresp, vec![file]) }
            }
            Sub::Series { first, second } => RunConfig::new(Command::Series, vec![first, second]),
            Sub::Star { a, b, split_a, split_b } => RunConfig {
                split_a: Some(split_a),
                split_b: Some(split_b),
                ..RunConfig::new(Command::Star, vec![a, b])
            },
            Sub::Strat2ito { file } => RunConfig::new(Command::Strat2ito, vec![file]),
            Sub::Ito2strat { file } => RunConfig::new(Command::Ito2strat, vec![file]),
        };
        cfg.output = output;
        cfg.tol = tol;
        cfg.format = format;
        cfg.component = component;
        Ok(cfg)
    }
}

/// Entry point for the binary: parses `args`, runs, returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::from_args(args) {
        Ok(cfg) => run(&cfg, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            Error::AlgebraicLoop
            | Error::SingularMatrix { .. }
            | Error::SingularAtS { .. }
            | Error::CayleySingular
            | Error::OutsideDomain => EXIT_SINGULAR,
            Error::NotHermitian { .. } | Error::NonFinite(_) => EXIT_INVALID,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one command. Data is written to `out` (or the configured file),
/// diagnostics to `err`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut data = String::new();
    let result = dispatch(cfg, &mut data, err);
    let code = match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            return f.code;
        }
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, data.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(data.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(err, "error: cannot write output: {msg}");
        return EXIT_USAGE;
    }
    code
}

fn dispatch(cfg: &RunConfig, data: &mut String, err: &mut dyn Write) -> Outcome {
    if !(cfg.tol > 0.0) || !(cfg.sigma > 0.0) {
        return Err(Failure::usage("tolerances must be positive"));
    }
    let expected_inputs = match cfg.command {
        Command::Series | Command::Star => 2,
        _ => 1,
    };
    if cfg.inputs.len() != expected_inputs {
        return Err(Failure::usage(format!("expected {expected_inputs} input file(s)")));
    }
    let allowed: &[OutputFormat] = match cfg.command {
        Command::Check => &[OutputFormat::Table],
        Command::Freqresp => &[OutputFormat::Csv],
        Command::Tf => &[OutputFormat::Table, OutputFormat::Qnet, OutputFormat::Csv],
        _ => &[OutputFormat::Qnet, OutputFormat::Table],
    };
    let format = cfg.format.unwrap_or(allowed[0]);
    if !allowed.contains(&format) {
        return Err(Failure::usage(format!("--format {format:?} is not available for this command").to_lowercase()));
    }

    match cfg.command {
        Command::Check => check(cfg, data),
        Command::Reduce => {
            let comp = load_target(&cfg.inputs[0], cfg.component.as_deref(), err)?;
            emit_component(data, &comp, format);
            Ok(EXIT_OK)
        }
        Command::Tf => {
            let s = cfg.s.ok_or_else(|| Failure::usage("tf needs --s RE,IM"))?;
            let comp = load_target(&cfg.inputs[0], cfg.component.as_deref(), err)?;
            let ev = eval_transfer(&comp, s)?;
            emit_tf(data, &comp, s, &ev.transfer, &ev.mode_response, format);
            Ok(EXIT_OK)
        }
        Command::Freqresp => {
            let grid = cfg.grid.ok_or_else(|| Failure::usage("freqresp needs --grid start:stop:count"))?;
            let comp = load_target(&cfg.inputs[0], cfg.component.as_deref(), err)?;
            freqresp(data, &comp, &grid, cfg.sigma);
            Ok(EXIT_OK)
        }
        Command::Series => {
            let first = load_target(&cfg.inputs[0], cfg.component.as_deref(), err)?;
            let second = load_target(&cfg.inputs[1], cfg.component.as_deref(), err)?;
            let joined = series_product(&second, &first)?.with_name(format!("{}_{}", first.name(), second.name()));
            emit_component(data, &joined, format);
            Ok(EXIT_OK)
        }
        Command::Star => {
            let (Some(a_outer), Some(b_inner)) = (cfg.split_a, cfg.split_b) else {
                return Err(Failure::usage("star needs --split-a and --split-b"));
            };
            let a = load_target(&cfg.inputs[0], cfg.component.as_deref(), err)?;
            let b = load_target(&cfg.inputs[1], cfg.component.as_deref(), err)?;
            let joined = redheffer_star(&a, &b, StarWiring { a_outer, b_inner })?
                .with_name(format!("{}_star_{}", a.name(), b.name()));
            emit_component(data, &joined, format);
            Ok(EXIT_OK)
        }
        Command::Strat2ito => {
            let [e, f, k] = load_matrices(&cfg.inputs[0], ["E", "F", "K"])?;
            let sm = StratonovichModel::new(e, f, k)?;
            let comp = strat_to_ito(&sm)?;
            let _ = write!(
                data,
                "{}",
                netfile::serialize_matrix_assignments(&[("S", comp.s()), ("C", comp.c()), ("Omega", comp.omega())])
            );
            emit_residuals(data, &sm, &comp)?;
            Ok(EXIT_OK)
        }
        Command::Ito2strat => {
            let [s, c, omega] = load_matrices(&cfg.inputs[0], ["S", "C", "Omega"])?;
            let comp = LinearComponent::new(s, c, omega)?;
            let report = validate_with_tol(&comp, cfg.tol);
            if !report.is_empty() {
                let _ = write!(err, "error: {report}");
                return Ok(EXIT_INVALID);
            }
            let sm = ito_to_strat(&comp)?;
            let _ = write!(
                data,
                "{}",
                netfile::serialize_matrix_assignments(&[("E", &sm.e), ("F", &sm.f), ("K", &sm.k)])
            );
            emit_residuals(data, &sm, &comp)?;
            Ok(EXIT_OK)
        }
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_failure(path: &Path, e: ParseError) -> Failure {
    Failure { code: EXIT_PARSE, message: format!("{}:{e}", path.display()) }
}

fn load_doc(path: &Path) -> Result<NetDocument, Failure> {
    let src = read_source(path)?;
    netfile::parse(&src).map_err(|e| parse_failure(path, e))
}

/// The component a file stands for: the named definition, else the reduced
/// network, else its only component.
fn load_target(path: &Path, component: Option<&str>, err: &mut dyn Write) -> Result<LinearComponent, Failure> {
    let doc = load_doc(path)?;
    if let Some(name) = component {
        return doc
            .component(name)
            .cloned()
            .ok_or_else(|| Failure::usage(format!("{}: no component named `{name}`", path.display())));
    }
    if doc.has_network() {
        let pc = netfile::build_partitioned(&doc)?;
        let reduced = feedback_reduce(&pc)?;
        let name = path.file_stem().map_or("reduced".into(), |s| netfile::sanitize_name(&s.to_string_lossy()));
        return Ok(reduced.with_name(name));
    }
    match doc.components.as_slice() {
        [only] => Ok(only.clone()),
        [] => Err(Failure::usage(format!("{}: no components", path.display()))),
        many => {
            let names: Vec<&str> = many.iter().map(LinearComponent::name).collect();
            let _ = writeln!(err, "components in {}: {}", path.display(), names.join(", "));
            Err(Failure::usage(format!(
                "{}: {} components and no network; pick one with --component",
                path.display(),
                many.len()
            )))
        }
    }
}

fn load_matrices(path: &Path, names: [&str; 3]) -> Result<[ComplexMatrix; 3], Failure> {
    let src = read_source(path)?;
    let mut entries = netfile::parse_matrix_assignments(&src).map_err(|e| parse_failure(path, e))?;
    if let Some((extra, _)) = entries.iter().find(|(n, _)| !names.contains(&n.as_str())) {
        return Err(Failure {
            code: EXIT_PARSE,
            message: format!("{}: unexpected matrix `{extra}`; expected {}", path.display(), names.join(", ")),
        });
    }
    let mut take = |name: &str| {
        let idx = entries.iter().position(|(n, _)| n == name).ok_or_else(|| Failure {
            code: EXIT_PARSE,
            message: format!("{}: missing matrix `{name}`", path.display()),
        })?;
        Ok::<_, Failure>(entries.swap_remove(idx).1)
    };
    Ok([take(names[0])?, take(names[1])?, take(names[2])?])
}

fn check(cfg: &RunConfig, data: &mut String) -> Outcome {
    let doc = load_doc(&cfg.inputs[0])?;
    let mut failed = false;
    for comp in &doc.components {
        let report = validate_with_tol(comp, cfg.tol);
        failed |= !report.is_empty();
        let _ = write!(data, "component {}: {report}", comp.name());
    }
    if doc.has_network() && !failed {
        let reduced = feedback_reduce(&netfile::build_partitioned(&doc)?)?;
        let report = validate_with_tol(&reduced, cfg.tol);
        failed |= !report.is_empty();
        let _ = write!(data, "network: {report}");
    }
    Ok(if failed { EXIT_INVALID } else { EXIT_OK })
}

fn emit_component(data: &mut String, comp: &LinearComponent, format: OutputFormat) {
    match format {
        OutputFormat::Table => {
            let _ = writeln!(data, "{}: {} ports, {} modes", comp.name(), comp.n_ports(), comp.n_modes());
            let _ = writeln!(data, "ports: {}", comp.port_labels().join(" "));
            table(data, "S", comp.s());
            table(data, "C", comp.c());
            table(data, "|C|", &comp.c().map(|z| Complex64::new(z.norm(), 0.0)));
            table(data, "Omega", comp.omega());
        }
        _ => {
            let doc = NetDocument::from_component(comp);
            data.push_str(&netfile::serialize(&doc));
            let abs = comp.c().map(|z| Complex64::new(z.norm(), 0.0));
            let _ = writeln!(data, "# ports: {}", comp.port_labels().join(" "));
            let _ = writeln!(data, "# |C| = {}", format_matrix(&abs));
        }
    }
}

fn table(data: &mut String, label: &str, m: &ComplexMatrix) {
    let _ = writeln!(data, "{label} ({}x{}):", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&z| format!("{:>24}", format_short(z))).collect();
        let _ = writeln!(data, "  {}", cells.join(" "));
    }
}

fn format_short(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6e}", z.re)
    } else {
        format!("{:.6e}{:+.6e}i", z.re, z.im)
    }
}

fn emit_tf(
    data: &mut String,
    comp: &LinearComponent,
    s: Complex64,
    transfer: &ComplexMatrix,
    modes: &ComplexMatrix,
    format: OutputFormat,
) {
    match format {
        OutputFormat::Table => {
            let _ = writeln!(data, "s = {}", format_short(s));
            let _ = writeln!(data, "ports: {}", comp.port_labels().join(" "));
            table(data, "Xi(s)", transfer);
            table(data, "xi(s)", modes);
        }
        OutputFormat::Qnet => {
            let _ = writeln!(data, "# s = {}", format_complex(s));
            data.push_str(&netfile::serialize_matrix_assignments(&[("Xi", transfer), ("xi", modes)]));
        }
        OutputFormat::Csv => {
            data.push_str("matrix,row,col,re,im\n");
            for (label, m) in [("Xi", transfer), ("xi", modes)] {
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let z = m[(r, c)];
                        let _ = writeln!(data, "{label},{r},{c},{:e},{:e}", z.re, z.im);
                    }
                }
            }
        }
    }
}

/// Header fields contain commas, so the writer quotes them.
fn freqresp(data: &mut String, comp: &LinearComponent, grid: &Grid, sigma: f64) {
    let n = comp.n_ports();
    let mut header = vec!["omega".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("re(Xi[{i},{j}])"));
            header.push(format!("im(Xi[{i},{j}])"));
        }
    }
    header.push("unitarity_residual".into());

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let omegas = grid.points();
    let results = freq_response_with_sigma(comp, &omegas, sigma);
    let rows = omegas.iter().zip(results).map(|(w, res)| {
        let mut row = vec![format!("{w:e}")];
        match res {
            Ok(ev) => {
                for r in ev.transfer.row_iter() {
                    for z in r.iter() {
                        row.push(format!("{:e}", z.re));
                        row.push(format!("{:e}", z.im));
                    }
                }
                row.push(format!("{:e}", unitarity_residual(&ev.transfer).unwrap_or(f64::NAN)));
            }
            Err(_) => row.extend(std::iter::repeat_n("NA".to_string(), 2 * n * n + 1)),
        }
        row
    });
    let written = std::iter::once(header).chain(rows).try_for_each(|r| w.write_record(&r));
    let bytes = written.and_then(|()| w.into_inner().map_err(|e| e.into_error().into())).expect("writing to memory");
    data.push_str(&String::from_utf8(bytes).expect("ascii fields"));
}

fn emit_residuals(data: &mut String, sm: &StratonovichModel, comp: &LinearComponent) -> Result<(), Failure> {
    let r = ito_table_residuals(sm, comp)?;
    let _ = writeln!(data, "# residual scattering = {:e}", r.scattering);
    let _ = writeln!(data, "# residual coupling = {:e}", r.coupling);
    let _ = writeln!(data, "# residual damping = {:e}", r.damping);
    Ok(())
}
