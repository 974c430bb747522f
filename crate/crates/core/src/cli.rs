//! The `fmoments` command line.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::convolution::{self, AutoconvStrategy};
use crate::error::Error;
use crate::group::{GroupSpec, IndexOrdering};
use crate::io::{format_complex, function_to_csv, parse_complex, parse_function_csv, parse_spectrum_json, spectrum_to_json};
use crate::limits::Limits;
use crate::models;
use crate::moments::{self, Center, MomentReport};
use crate::spectrum::{self, DenseFunction, MomentCenter, Side, SparseSpectrum};
use crate::symbolic::{self, ExpansionMode, Notation, SymbolicMoment, Term};
use crate::timeseries::{self, LagVector};
use crate::verify::{self, VerifyConfig};

const DECIMALS: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "fmoments", version, about = "Moments of functions on finite abelian groups from their Fourier coefficients")]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward transform of a function file into a spectrum file.
    Dft(DftArgs),
    /// Inverse transform of a spectrum file into a function file.
    Idft(IdftArgs),
    /// Mean, variance, raw/central/general moments and standardized moments.
    Moments(MomentsArgs),
    /// Symbolic expansion of a moment into annihilating coefficient products.
    Expand(ExpandArgs),
    /// Build a binary-factor design from a graph and report its payoffs and moments.
    Design(DesignArgs),
    /// Lagged m-th-order moment.
    Lagged(LaggedArgs),
    /// Subtraction table of a group.
    Table(TableArgs),
    /// Circular convolution of two function files.
    Convolve(ConvolveArgs),
    /// m-fold circular self-convolution.
    Autoconv(AutoconvArgs),
    /// Compare the moments of a candidate spectrum with target values.
    Feasibility(FeasibilityArgs),
    /// Run the randomized oracle-equivalence suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Group shorthand such as `64`, `3x2`, `2^13`.
    #[arg(long)]
    pub group: Option<String>,
    /// Index ordering for `--group`: msf or lsf.
    #[arg(long)]
    pub ordering: Option<String>,
}

impl GroupArgs {
    fn resolve(&self) -> Result<Option<GroupSpec>, CliError> {
        let Some(text) = &self.group else {
            if self.ordering.is_some() {
                return Err(CliError::Usage("--ordering needs --group".into()));
            }
            return Ok(None);
        };
        let g: GroupSpec = text.parse()?;
        Ok(Some(match &self.ordering {
            Some(o) => GroupSpec::with_ordering(g.moduli().to_vec(), o.parse::<IndexOrdering>()?)?,
            None => g,
        }))
    }

    fn require(&self) -> Result<GroupSpec, CliError> {
        self.resolve()?.ok_or_else(|| CliError::Usage("--group is required".into()))
    }
}

#[derive(Debug, Args)]
pub struct DftArgs {
    /// Function CSV (`ordinal,re,im`).
    pub input: PathBuf,
    #[command(flatten)]
    pub group: GroupArgs,
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdftArgs {
    /// Spectrum JSON.
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Spectrum JSON.
    #[arg(long, conflicts_with = "function")]
    pub spectrum: Option<PathBuf>,
    /// Function CSV.
    #[arg(long)]
    pub function: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupArgs,
}

enum Input {
    Spectrum(SparseSpectrum),
    Function(DenseFunction),
}

impl InputArgs {
    fn load(&self) -> Result<Input, CliError> {
        match (&self.spectrum, &self.function) {
            (Some(path), None) => {
                if self.group.group.is_some() {
                    return Err(CliError::Usage("--group applies to function files only".into()));
                }
                Ok(Input::Spectrum(load_spectrum(path)?))
            }
            (None, Some(path)) => Ok(Input::Function(load_function(path, self.group.resolve()?, Side::Primal)?)),
            _ => Err(CliError::Usage("give exactly one of --spectrum or --function".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 4)]
    pub max_order: u32,
    /// raw, central, or a=<complex>.
    #[arg(long, default_value = "central")]
    pub center: String,
    /// Break the central moment of this order into per-term contributions.
    #[arg(long)]
    pub contributions: Option<u32>,
    /// Moment value the relative contributions are measured against.
    #[arg(long, requires = "contributions")]
    pub reference: Option<f64>,
    /// Show only the largest contributions.
    #[arg(long, requires = "contributions")]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub order: u32,
    #[arg(long, default_value = "raw")]
    pub mode: String,
    /// Restrict the expansion to the coefficients of this spectrum file.
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long, default_value = "decimal")]
    pub notation: String,
    /// Also list every term with its annihilation identity.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Complete graph on N vertices.
    #[arg(long, value_name = "N", conflicts_with_all = ["petersen", "graph"])]
    pub complete: Option<usize>,
    /// The Petersen graph.
    #[arg(long, conflicts_with = "graph")]
    pub petersen: bool,
    /// Graph JSON with vertex effects, edges and hyperedges.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Direct effect of each vertex.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub d: f64,
    /// Edges carry weight -a.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 4)]
    pub max_order: u32,
    /// Write spectrum.json, payoff.csv, histogram.csv and report.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LaggedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Lags separated by `;`, each an ordinal or a digit tuple like `[1,0]`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub lags: String,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Same as `--format csv`.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    /// First function CSV.
    #[arg(long)]
    pub function: PathBuf,
    /// Second function CSV.
    #[arg(long)]
    pub with: PathBuf,
    #[command(flatten)]
    pub group: GroupArgs,
    /// direct or transform.
    #[arg(long, default_value = "direct")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct AutoconvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub power: i64,
    /// recursive or round-trip.
    #[arg(long, default_value = "round-trip")]
    pub strategy: String,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    /// Candidate spectrum JSON; magnitudes and phases come from its coefficients.
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Target moment `m=value`, repeatable.
    #[arg(long = "target", allow_hyphen_values = true)]
    pub targets: Vec<String>,
    /// Use normal-distribution targets mu_3 = 0 and mu_4 = 3 sigma^4.
    #[arg(long)]
    pub gaussian: bool,
    /// Variance for `--gaussian`; defaults to the candidate's own.
    #[arg(long, requires = "gaussian")]
    pub variance: Option<f64>,
    #[arg(long, default_value = "central")]
    pub mode: String,
    /// List every term's contribution.
    #[arg(long)]
    pub contributions: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = VerifyConfig::default().cases)]
    pub cases: usize,
    #[arg(long, default_value_t = VerifyConfig::default().max_group_order)]
    pub max_group: usize,
    #[arg(long, default_value_t = VerifyConfig::default().max_order)]
    pub max_order: u32,
    #[arg(long, default_value_t = VerifyConfig::default().tolerance)]
    pub tolerance: f64,
    /// Perturb one coefficient per case by this amount.
    #[arg(long, allow_hyphen_values = true)]
    pub inject_fault: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io { path: PathBuf, source: io::Error },
    Usage(String),
    VerifyFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::VerifyFailed => write!(f, "verification failed"),
        }
    }
}

impl CliError {
    /// 2 for bad input, 3 for group or side mismatches, 4 for resource guards,
    /// 1 when verification finds a deviation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::GroupMismatch(_) | Error::SideMismatch { .. }) => 3,
            CliError::Lib(Error::Resource { .. }) => 4,
            CliError::VerifyFailed => 1,
            _ => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Runs one parsed command, writing its output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    let limits = Limits::from_env()?;
    let format = cli.format;
    let text = match cli.command {
        Command::Dft(args) => cmd_dft(args, format)?,
        Command::Idft(args) => cmd_idft(args, format)?,
        Command::Moments(args) => cmd_moments(args, format, &limits)?,
        Command::Expand(args) => cmd_expand(args, format, &limits)?,
        Command::Design(args) => cmd_design(args, format, &limits)?,
        Command::Lagged(args) => cmd_lagged(args, format, &limits)?,
        Command::Table(args) => cmd_table(args, format, &limits)?,
        Command::Convolve(args) => cmd_convolve(args, format)?,
        Command::Autoconv(args) => cmd_autoconv(args, format)?,
        Command::Feasibility(args) => cmd_feasibility(args, format, &limits)?,
        Command::Verify(args) => {
            let (text, passed) = cmd_verify(args, format)?;
            write_out(out, &text)?;
            return if passed { Ok(()) } else { Err(CliError::VerifyFailed) };
        }
    };
    write_out(out, &text)
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_spectrum(path: &Path) -> CliResult<SparseSpectrum> {
    parse_spectrum_json(&read_file(path)?).map_err(|e| match e {
        Error::Parse(msg) => CliError::Lib(Error::Parse(format!("{}: {msg}", path.display()))),
        other => other.into(),
    })
}

fn load_function(path: &Path, group: Option<GroupSpec>, side: Side) -> CliResult<DenseFunction> {
    Ok(parse_function_csv(&read_file(path)?, group, side)?)
}

fn reject(format: Format, command: &str) -> CliError {
    CliError::Usage(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn emit_or_write(out: Option<&Path>, text: String) -> CliResult<String> {
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn values_json(f: &DenseFunction) -> Value {
    Value::Array(
        f.values()
            .iter()
            .enumerate()
            .map(|(k, v)| json!({ "ordinal": k, "re": v.re, "im": v.im }))
            .collect(),
    )
}

fn cmd_dft(args: DftArgs, format: Option<Format>) -> CliResult<String> {
    let f = load_function(&args.input, args.group.resolve()?, Side::Primal)?;
    let fhat = spectrum::dft(&f)?;
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => spectrum_to_json(&spectrum::to_sparse(&fhat, 0.0)?),
        Format::Csv | Format::Text => function_to_csv(&fhat),
    };
    emit_or_write(args.out.as_deref(), text)
}

fn cmd_idft(args: IdftArgs, format: Option<Format>) -> CliResult<String> {
    let s = load_spectrum(&args.input)?;
    let f = spectrum::idft(&s.to_dense())?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => function_to_csv(&f),
        Format::Json => pretty(&json!({ "moduli": f.group().moduli(), "values": values_json(&f) })),
    };
    emit_or_write(args.out.as_deref(), text)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Dense chains win once the support is a sizeable fraction of the group.
fn report_for(input: &Input, max_order: u32, center: Center, limits: &Limits) -> CliResult<MomentReport> {
    Ok(match input {
        Input::Function(f) => moments::moment_report(&spectrum::dft(f)?, max_order, center)?,
        Input::Spectrum(s) if s.nnz() * 20 > s.group().order() => {
            moments::moment_report(&s.to_dense(), max_order, center)?
        }
        Input::Spectrum(s) => moments::moment_report_sparse(s, max_order, center, limits)?,
    })
}

fn input_spectrum(input: &Input) -> CliResult<SparseSpectrum> {
    Ok(match input {
        Input::Spectrum(s) => s.clone(),
        Input::Function(f) => spectrum::to_sparse(&spectrum::dft(f)?, 0.0)?,
    })
}

fn cmd_moments(args: MomentsArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let input = args.input.load()?;
    let center: Center = args.center.parse()?;
    let report = report_for(&input, args.max_order, center, limits)?;
    let contributions = match args.contributions {
        Some(m) => Some(contribution_rows(&input_spectrum(&input)?, m, args.reference, args.top, &report, limits)?),
        None => None,
    };
    let nnz = match &input {
        Input::Spectrum(s) => s.nnz(),
        Input::Function(f) => f.len(),
    };
    match format.unwrap_or(Format::Text) {
        Format::Text => {
            let group = match &input {
                Input::Spectrum(s) => s.group().clone(),
                Input::Function(f) => f.group().clone(),
            };
            let mut text = report_text(&report, &format!("{nnz} Fourier coefficients on group {group}"));
            if let Some(c) = &contributions {
                text.push('\n');
                text.push_str(&c.text);
            }
            Ok(text)
        }
        Format::Json => {
            let mut v = report_json(&report);
            if let Some(c) = contributions {
                v["contributions"] = c.json;
            }
            Ok(pretty(&v))
        }
        Format::Csv => {
            if let Some(c) = contributions {
                return Ok(c.csv);
            }
            Ok(report_csv(&report))
        }
    }
}

fn fmt_real(x: f64) -> String {
    let x = if x.abs() < 0.5e-4 { 0.0 } else { x };
    format!("{x:.DECIMALS$}")
}

fn standardized_text(report: &MomentReport, value: Option<f64>) -> String {
    match value {
        Some(v) => fmt_real(v),
        None if !report.real => "undefined (complex f)".to_string(),
        None => "undefined (sigma = 0)".to_string(),
    }
}

/// The "statistics of f" block followed by a table of moments by order.
pub fn report_text(report: &MomentReport, source: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Statistics of f ({source})");
    let rows: Vec<(&str, String)> = vec![
        ("mean", format_complex(report.mean, DECIMALS)),
        ("variance", fmt_real(report.variance)),
        ("std deviation", fmt_real(report.variance.sqrt())),
    ];
    let mut rows = rows;
    for m in 3..=report.max_order.min(6) {
        let label: &'static str = ["mu_3", "mu_4", "mu_5", "mu_6"][(m - 3) as usize];
        rows.push((label, format_complex(report.central[m as usize], DECIMALS)));
    }
    let names = ["skewness", "kurtosis", "hyperskewness", "hyperkurtosis"];
    let std = report.standardized.unwrap_or_default();
    let values = [std.skewness, std.kurtosis, std.hyperskewness, std.hyperkurtosis];
    for (k, name) in names.iter().enumerate() {
        if 3 + k as u32 <= report.max_order {
            rows.push((name, standardized_text(report, values[k])));
        }
    }
    for (name, value) in rows {
        let _ = writeln!(s, "  {name:<15}{value:>14}");
    }
    let general = report.center != report.mean && report.center != Complex64::new(0.0, 0.0);
    let _ = writeln!(s);
    let mut header = format!("  {:>3}  {:>14}  {:>14}", "m", "raw", "central");
    if general {
        let _ = write!(header, "  {:>14}", format!("about {}", format_complex(report.center, 2)));
    }
    let _ = writeln!(s, "{header}");
    for m in 0..=report.max_order as usize {
        let _ = write!(
            s,
            "  {:>3}  {:>14}  {:>14}",
            m,
            format_complex(report.raw[m], DECIMALS),
            format_complex(report.central[m], DECIMALS)
        );
        if general {
            let _ = write!(s, "  {:>14}", format_complex(report.general[m], DECIMALS));
        }
        let _ = writeln!(s);
    }
    s
}

pub fn report_json(report: &MomentReport) -> Value {
    let list = |v: &[Complex64]| Value::Array(v.iter().map(|&z| complex_json(z)).collect());
    let std = report.standardized.unwrap_or_default();
    json!({
        "max_order": report.max_order,
        "mean": complex_json(report.mean),
        "variance": report.variance,
        "real": report.real,
        "raw": list(&report.raw),
        "central": list(&report.central),
        "center": complex_json(report.center),
        "general": list(&report.general),
        "standardized": report.standardized.map(|_| json!({
            "skewness": std.skewness,
            "kurtosis": std.kurtosis,
            "hyperskewness": std.hyperskewness,
            "hyperkurtosis": std.hyperkurtosis,
        })),
    })
}

fn report_csv(report: &MomentReport) -> String {
    let mut s = String::from("order,raw_re,raw_im,central_re,central_im,general_re,general_im\n");
    for m in 0..=report.max_order as usize {
        let _ = writeln!(
            s,
            "{m},{},{},{},{},{},{}",
            report.raw[m].re,
            report.raw[m].im,
            report.central[m].re,
            report.central[m].im,
            report.general[m].re,
            report.general[m].im
        );
    }
    s
}

struct Rendered {
    text: String,
    json: Value,
    csv: String,
}

fn default_notation(group: &GroupSpec) -> Notation {
    if group.is_binary() {
        Notation::Set
    } else {
        Notation::Decimal
    }
}

fn contribution_rows(
    s: &SparseSpectrum,
    m: u32,
    reference: Option<f64>,
    top: Option<usize>,
    report: &MomentReport,
    limits: &Limits,
) -> CliResult<Rendered> {
    let group = s.group();
    let sym = symbolic::annihilating_terms_with(group, m, ExpansionMode::Central, Some(&s.support()), limits)?;
    let mut rows = symbolic::term_contributions(&sym, s, MomentCenter(s.mean()))?;
    rows.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then_with(|| a.0.cmp(&b.0)));
    let total_all: Complex64 = rows.iter().map(|(_, v)| v).sum();
    if let Some(k) = top {
        rows.truncate(k);
    }
    let reference = match reference {
        Some(r) => Complex64::new(r, 0.0),
        None => report.central.get(m as usize).copied().unwrap_or(total_all),
    };
    let notation = default_notation(group);
    let label = |j: usize| symbolic::index_label(group, j, notation).expect("ordinal from the group");
    let relative = |v: Complex64| if reference.norm() > 0.0 { v / reference } else { Complex64::new(f64::NAN, 0.0) };

    let mut text = String::new();
    let _ = writeln!(
        text,
        "Contributions to mu_{m} ({} terms, reference {})",
        sym.len(),
        format_complex(reference, DECIMALS)
    );
    let label_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(t, _)| t.indices().iter().map(|&j| label(j)).collect())
        .collect();
    let width = label_rows.iter().flatten().map(|l| l.chars().count()).max().unwrap_or(1).max(4);
    for (k, (t, v)) in rows.iter().enumerate() {
        let loci: String = label_rows[k].iter().map(|l| format!("{l:<width$}  ")).collect();
        let _ = writeln!(
            text,
            "  {loci}{:>5} x  {:>10}  {:>8}",
            t.multiplicity(),
            format_complex(*v, DECIMALS),
            format_complex(relative(*v), DECIMALS)
        );
    }
    let shown: Complex64 = rows.iter().map(|(_, v)| v).sum();
    let _ = writeln!(
        text,
        "  total shown {}  ({})",
        format_complex(shown, DECIMALS),
        format_complex(relative(shown), DECIMALS)
    );

    let json_rows: Vec<Value> = rows
        .iter()
        .map(|(t, v)| {
            json!({
                "indices": t.indices(),
                "labels": t.indices().iter().map(|&j| label(j)).collect::<Vec<_>>(),
                "multiplicity": multiplicity_json(t),
                "contribution": complex_json(*v),
                "relative": complex_json(relative(*v)),
            })
        })
        .collect();
    let json = json!({ "order": m, "reference": complex_json(reference), "terms": json_rows });

    let mut csv = String::from("indices,multiplicity,contribution_re,contribution_im,relative_re,relative_im\n");
    for (t, v) in &rows {
        let idx: Vec<String> = t.indices().iter().map(|j| j.to_string()).collect();
        let r = relative(*v);
        let _ = writeln!(csv, "{},{},{},{},{},{}", idx.join(" "), t.multiplicity(), v.re, v.im, r.re, r.im);
    }
    Ok(Rendered { text, json, csv })
}

fn multiplicity_json(t: &Term) -> Value {
    match u64::try_from(t.multiplicity()) {
        Ok(v) => json!(v),
        Err(_) => json!(t.multiplicity().to_string()),
    }
}

fn cmd_expand(args: ExpandArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let mode: ExpansionMode = args.mode.parse()?;
    let notation: Notation = args.notation.parse()?;
    let (group, support) = match &args.support {
        Some(path) => {
            let s = load_spectrum(path)?;
            if let Some(g) = args.group.resolve()? {
                if &g != s.group() {
                    return Err(Error::GroupMismatch(format!("--group {g} vs support file group {}", s.group())).into());
                }
            }
            (s.group().clone(), Some(s.support()))
        }
        None => (args.group.require()?, None),
    };
    let sym = symbolic::annihilating_terms_with(&group, args.order, mode, support.as_deref(), limits)?;
    match format.unwrap_or(Format::Text) {
        Format::Text => expand_text(&sym, notation, args.list),
        Format::Json => Ok(pretty(&expand_json(&sym, notation)?)),
        Format::Csv => {
            let mut s = String::from("indices,multiplicity\n");
            for t in sym.terms() {
                let idx: Vec<String> = t.indices().iter().map(|j| j.to_string()).collect();
                let _ = writeln!(s, "{},{}", idx.join(" "), t.multiplicity());
            }
            Ok(s)
        }
    }
}

fn expand_text(sym: &SymbolicMoment, notation: Notation, list: bool) -> CliResult<String> {
    let name = match sym.mode() {
        ExpansionMode::Raw => format!("mu'_{}", sym.order()),
        ExpansionMode::Central => format!("mu_{}", sym.order()),
    };
    let classes: Vec<String> = sym
        .multiplicity_classes()
        .iter()
        .map(|(m, n)| format!("{m}:{n}"))
        .collect();
    let mut s = format!(
        "{name} on {} ({} terms; multiplicity classes {{{}}})\n{name} = {}\n",
        sym.group(),
        sym.len(),
        classes.join(", "),
        symbolic::render(sym, notation)?
    );
    if list {
        s.push('\n');
        s.push_str(&symbolic::render_listing(sym, notation)?);
    }
    Ok(s)
}

fn expand_json(sym: &SymbolicMoment, notation: Notation) -> CliResult<Value> {
    let terms = sym
        .terms()
        .iter()
        .map(|t| {
            let labels = t
                .indices()
                .iter()
                .map(|&j| symbolic::index_label(sym.group(), j, notation))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(json!({
                "indices": t.indices(),
                "labels": labels,
                "multiplicity": multiplicity_json(t),
            }))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(json!({
        "group": sym.group().to_string(),
        "moduli": sym.group().moduli(),
        "ordering": sym.group().ordering(),
        "order": sym.order(),
        "mode": match sym.mode() { ExpansionMode::Raw => "raw", ExpansionMode::Central => "central" },
        "count": sym.len(),
        "terms": terms,
    }))
}

/// Rounds away binary noise so printed payoffs read like the inputs.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e10).round() / 1e10;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn cmd_design(args: DesignArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let spec = match (&args.complete, args.petersen, &args.graph) {
        (Some(n), false, None) => models::complete_graph(*n, args.d, args.a)?,
        (None, true, None) => models::petersen_graph(args.d, args.a)?,
        (None, false, Some(path)) => models::parse_graph_json(&read_file(path)?)?,
        _ => return Err(CliError::Usage("give one of --complete N, --petersen or --graph FILE".into())),
    };
    let s = models::graph_spectrum(&spec)?;
    crate::limits::check("dense payoff vector length", s.group().order() as u128, limits.max_support as u128)?;
    let payoff = spectrum::idft(&s.to_dense())?;
    let values: Vec<f64> = payoff.values().iter().map(|v| tidy(v.re)).collect();
    let histogram = models::value_histogram(&values, 1e-9);
    let report = moments::moment_report_sparse(&s, args.max_order, Center::Central, limits)?;

    let payoff_csv = {
        let mut c = String::from("ordinal,payoff\n");
        for (k, v) in values.iter().enumerate() {
            let _ = writeln!(c, "{k},{v}");
        }
        c
    };
    let histogram_csv = {
        let mut c = String::from("payoff,count\n");
        for (v, n) in &histogram {
            let _ = writeln!(c, "{v},{n}");
        }
        c
    };
    let json = json!({
        "n": spec.n(),
        "spectrum": serde_json::from_str::<Value>(&spectrum_to_json(&s)).expect("valid JSON"),
        "payoff": values,
        "histogram": histogram.iter().map(|(v, n)| json!({ "payoff": v, "count": n })).collect::<Vec<_>>(),
        "report": report_json(&report),
    });
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        write_file(&dir.join("spectrum.json"), &spectrum_to_json(&s))?;
        write_file(&dir.join("payoff.csv"), &payoff_csv)?;
        write_file(&dir.join("histogram.csv"), &histogram_csv)?;
        write_file(&dir.join("report.json"), &pretty(&report_json(&report)))?;
    }
    Ok(match format.unwrap_or(Format::Text) {
        Format::Csv => payoff_csv,
        Format::Json => pretty(&json),
        Format::Text => {
            let mut t = report_text(&report, &format!("{} factors, {} Fourier coefficients", spec.n(), s.nnz()));
            let shown: Vec<String> = values.iter().take(32).map(|v| v.to_string()).collect();
            let more = if values.len() > 32 { ", ..." } else { "" };
            let _ = writeln!(t, "\nPayoffs ({} outcomes): ({}{more})", values.len(), shown.join(", "));
            let _ = writeln!(t, "\nHistogram");
            for (v, n) in &histogram {
                let _ = writeln!(t, "  {:>10}  {n}", fmt_real(*v));
            }
            t
        }
    })
}

fn cmd_lagged(args: LaggedArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let input = args.input.load()?;
    let (value, group, path) = match &input {
        Input::Function(f) => {
            let lags = LagVector::parse(f.group().clone(), &args.lags)?;
            (timeseries::lagged_moment(f, &lags)?, lags, "direct")
        }
        Input::Spectrum(s) => {
            let lags = LagVector::parse(s.group().clone(), &args.lags)?;
            (timeseries::lagged_moment_sparse(s, &lags, limits)?, lags, "fourier")
        }
    };
    Ok(match format.unwrap_or(Format::Text) {
        Format::Text => format!(
            "r_{}({}) = {}\n",
            group.order(),
            group.lags().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "),
            format_complex(value, DECIMALS)
        ),
        Format::Json => pretty(&json!({
            "order": group.order(),
            "lags": group.lags(),
            "method": path,
            "value": complex_json(value),
        })),
        Format::Csv => format!("order,re,im\n{},{},{}\n", group.order(), value.re, value.im),
    })
}

fn cmd_table(args: TableArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let group = args.group.require()?;
    let table = group.subtraction_table_with(limits)?;
    let format = if args.csv { Format::Csv } else { format.unwrap_or(Format::Text) };
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let rows: Vec<Vec<usize>> = (0..table.size()).map(|i| table.row(i).collect()).collect();
            pretty(&json!({ "group": group.to_string(), "moduli": group.moduli(), "rows": rows }))
        }
        Format::Text => {
            let width = (table.size() - 1).to_string().len();
            let mut s = String::new();
            for i in 0..table.size() {
                let row: Vec<String> = table.row(i).map(|v| format!("{v:>width$}")).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
            s
        }
    })
}

fn dense_output(f: &DenseFunction, format: Option<Format>) -> String {
    match format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => function_to_csv(f),
        Format::Json => pretty(&json!({ "moduli": f.group().moduli(), "side": f.side().name(), "values": values_json(f) })),
    }
}

fn cmd_convolve(args: ConvolveArgs, format: Option<Format>) -> CliResult<String> {
    let group = args.group.resolve()?;
    let f = load_function(&args.function, group.clone(), Side::Primal)?;
    let g = load_function(&args.with, group, Side::Primal)?;
    let h = match args.method.as_str() {
        "direct" => convolution::convolve(&f, &g)?,
        "transform" => convolution::convolve_via_transform(&f, &g)?,
        other => return Err(CliError::Usage(format!("unknown method {other:?} (direct or transform)"))),
    };
    Ok(dense_output(&h, format))
}

fn cmd_autoconv(args: AutoconvArgs, format: Option<Format>) -> CliResult<String> {
    let strategy: AutoconvStrategy = args.strategy.parse()?;
    let v = match args.input.load()? {
        Input::Spectrum(s) => s.to_dense(),
        Input::Function(f) => f,
    };
    let result = convolution::autoconvolve_with(&v, args.power, strategy)?;
    Ok(dense_output(&result.value, format))
}

fn cmd_feasibility(args: FeasibilityArgs, format: Option<Format>, limits: &Limits) -> CliResult<String> {
    let s = load_spectrum(&args.spectrum)?;
    let mode: ExpansionMode = args.mode.parse()?;
    let mut targets = std::collections::BTreeMap::new();
    if args.gaussian {
        if mode != ExpansionMode::Central {
            return Err(CliError::Usage("--gaussian targets are central moments".into()));
        }
        let sigma2 = args.variance.unwrap_or_else(|| moments::fourier_variance_sparse(&s));
        targets.extend(symbolic::gaussian_targets(sigma2));
    }
    for t in &args.targets {
        let (m, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("target {t:?} is not of the form m=value")))?;
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad target order in {t:?}")))?;
        targets.insert(m, parse_complex(v)?);
    }
    let magnitudes = s.iter().map(|(j, v)| (j, v.norm())).collect();
    let phases = s.iter().map(|(j, v)| (j, v.arg())).collect();
    let residuals = symbolic::feasibility_residual(s.group(), &magnitudes, &phases, &targets, mode, limits)?;
    let notation = default_notation(s.group());
    Ok(match format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut t = String::new();
            let _ = writeln!(t, "  {:>3}  {:>14}  {:>14}  {:>12}", "m", "target", "value", "residual");
            for r in &residuals {
                let _ = writeln!(
                    t,
                    "  {:>3}  {:>14}  {:>14}  {:>12.3e}",
                    r.order,
                    format_complex(r.target, DECIMALS),
                    format_complex(r.value, DECIMALS),
                    r.residual
                );
            }
            if args.contributions {
                for r in &residuals {
                    let _ = writeln!(t, "\norder {} terms", r.order);
                    for (term, v) in &r.contributions {
                        let _ = writeln!(
                            t,
                            "  {:>5} {}  {}",
                            term.multiplicity(),
                            symbolic::render_product(s.group(), term, notation)?,
                            format_complex(*v, DECIMALS)
                        );
                    }
                }
            }
            t
        }
        Format::Json => pretty(&Value::Array(
            residuals
                .iter()
                .map(|r| {
                    json!({
                        "order": r.order,
                        "target": complex_json(r.target),
                        "value": complex_json(r.value),
                        "residual": r.residual,
                        "contributions": r.contributions.iter().map(|(t, v)| json!({
                            "indices": t.indices(),
                            "multiplicity": multiplicity_json(t),
                            "value": complex_json(*v),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            let mut c = String::from("order,target_re,target_im,value_re,value_im,residual\n");
            for r in &residuals {
                let _ = writeln!(
                    c,
                    "{},{},{},{},{},{}",
                    r.order, r.target.re, r.target.im, r.value.re, r.value.im, r.residual
                );
            }
            c
        }
    })
}

fn cmd_verify(args: VerifyArgs, format: Option<Format>) -> CliResult<(String, bool)> {
    if args.cases == 0 || args.max_group < 2 || args.max_order == 0 {
        return Err(CliError::Usage("--cases, --max-group and --max-order must be positive (--max-group >= 2)".into()));
    }
    let config = VerifyConfig {
        seed: args.seed,
        cases: args.cases,
        max_group_order: args.max_group,
        max_order: args.max_order,
        tolerance: args.tolerance,
        fault: args.inject_fault,
    };
    let report = verify::run(&config)?;
    let text = match format.unwrap_or(Format::Text) {
        Format::Text => report.to_string(),
        Format::Json => pretty(&json!({
            "seed": config.seed,
            "cases": config.cases,
            "passed": report.passed(),
            "suites": report.suites.iter().map(|s| json!({
                "name": s.name,
                "cases": s.cases,
                "failures": s.failures,
                "max_deviation": s.max_deviation,
                "worst": s.worst,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => return Err(reject(Format::Csv, "verify")),
    };
    Ok((text, report.passed()))
}
