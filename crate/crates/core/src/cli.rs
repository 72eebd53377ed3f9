//! Batch front-end: map files, subcommand dispatch and artifact output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::diagram::{build_diagram, irreducible_core, DiagramError, DEFAULT_DEPTH};
use crate::entropy::{
    components_csv, decompose, entropy_spectral_sequence, entropy_word_count, estimates_csv, irregular_entropy_formula,
    EntropyError,
};
use crate::interval_map::{make_map, MapError, MapSpec, PiecewiseMonotonicMap};
use crate::irregular::{
    certificate_json, construct_irregular_sequence, oscillation_check, proposition31_search, verify_certificate,
    BlockSchedule, IrregularError, IrregularSpec, Prop31Options, DEFAULT_GROWTH, DEFAULT_HORIZON,
};
use crate::measures::{average_spread, integral, periodic_catalog, MeasureError, Observable};
use crate::scalar::{render, Number, NumberError, Rational, Scalar};
use crate::symbolic::{SymbolicError, Word, DEFAULT_BUDGET};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SPREAD_ZERO: i32 = 2;
pub const EXIT_ENTROPY_SHORTFALL: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("map file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Irregular(#[from] IrregularError),
}

fn symbolic_code(e: &SymbolicError) -> i32 {
    match e {
        SymbolicError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

fn diagram_code(e: &DiagramError) -> i32 {
    match e {
        DiagramError::VertexBudget(_) => EXIT_BUDGET,
        _ => EXIT_FAILURE,
    }
}

fn measure_code(e: &MeasureError) -> i32 {
    match e {
        MeasureError::Symbolic(s) => symbolic_code(s),
        MeasureError::Diagram(d) => diagram_code(d),
        _ => EXIT_FAILURE,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Symbolic(e) => symbolic_code(e),
            CliError::Diagram(e) => diagram_code(e),
            CliError::Measure(e) => measure_code(e),
            CliError::Entropy(e) => match e {
                EntropyError::Symbolic(s) => symbolic_code(s),
                EntropyError::Diagram(d) => diagram_code(d),
                EntropyError::Measure(m) => measure_code(m),
                _ => EXIT_FAILURE,
            },
            CliError::Irregular(e) => match e {
                IrregularError::SpreadZero => EXIT_SPREAD_ZERO,
                IrregularError::EntropyShortfall { .. } => EXIT_ENTROPY_SHORTFALL,
                IrregularError::Symbolic(s) => symbolic_code(s),
                IrregularError::Diagram(d) => diagram_code(d),
                IrregularError::Measure(m) => measure_code(m),
                _ => EXIT_FAILURE,
            },
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact when every map parameter is rational, float otherwise.
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "hofbauer", version, about = "Markov diagrams, entropy and irregular points of piecewise monotonic maps")]
pub struct Cli {
    /// Map description file (TOML key-value pairs).
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Auto, global = true)]
    pub mode: Mode,
    /// Directory for artifacts; created if missing.
    #[arg(long, default_value = "out", global = true)]
    pub out: PathBuf,
    /// Cap on search nodes visited when enumerating words.
    #[arg(long, default_value_t = DEFAULT_BUDGET, global = true)]
    pub budget: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Truncated Markov diagram as DOT plus vertex and edge CSV.
    Diagram {
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Word-count and spectral entropy estimates as CSV.
    Entropy {
        /// Word lengths for counting.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Truncation depths for the spectral bound.
        #[arg(long, value_delimiter = ',')]
        depths: Vec<usize>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Catalog of periodic orbits with their integrals.
    Periodic {
        #[arg(long, default_value_t = 4)]
        max_period: usize,
        #[arg(long, default_value = "x")]
        phi: String,
    },
    /// Smallest and largest periodic integrals of an observable.
    Spread {
        #[arg(long, default_value_t = 6)]
        max_period: usize,
        #[arg(long, default_value = "x")]
        phi: String,
    },
    /// Irregular point by alternating periodic blocks, with a checkpoint report.
    Irregular(IrregularArgs),
    /// Finite-subdiagram certificate of specification, spread and entropy.
    Prop31 {
        #[arg(long, default_value = "x")]
        phi: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        max_period: usize,
        /// Word length of the exhaustive specification check.
        #[arg(long, default_value_t = 6)]
        test_len: usize,
    },
    /// Per-component entropy and spread for invariant intervals `a:b,c:d,...`.
    Decompose {
        #[arg(long)]
        components: String,
        #[arg(long, default_value = "x")]
        phi: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        max_period: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct IrregularArgs {
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub v: String,
    #[arg(long, default_value = "x")]
    pub phi: String,
    #[arg(long, default_value_t = DEFAULT_GROWTH)]
    pub growth: f64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: usize,
    /// Explicit block lengths instead of geometric growth.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
}

/// Everything one run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub map: PathBuf,
    pub command: Command,
    pub out: PathBuf,
    pub mode: Mode,
    pub budget: u64,
}

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<Self, CliError> {
        let map = cli.map.ok_or_else(|| CliError::Usage("--map is required".into()))?;
        Ok(RunConfig { map, command: cli.command, out: cli.out, mode: cli.mode, budget: cli.budget })
    }
}

/// Result of a successful run: the artifacts written and a stdout summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn key_line(source: &str, key: &str) -> usize {
    source
        .lines()
        .position(|l| l.trim_start().strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('=')))
        .map_or(1, |i| i + 1)
}

fn value_strings(v: &toml::Value) -> Option<Vec<String>> {
    match v {
        toml::Value::String(s) => Some(s.split(',').map(|t| t.trim().to_string()).collect()),
        toml::Value::Integer(i) => Some(vec![i.to_string()]),
        toml::Value::Float(f) => Some(vec![f.to_string()]),
        toml::Value::Array(items) => items.iter().map(|i| value_strings(i).filter(|v| v.len() == 1).map(|mut v| v.remove(0))).collect(),
        _ => None,
    }
}

/// Parses map-file text into a constructor description.
pub fn parse_map_text(source: &str) -> Result<MapSpec, CliError> {
    let table: toml::Table = toml::from_str(source).map_err(|e| CliError::Parse {
        line: e.span().map_or(1, |s| line_of(source, s.start)),
        message: e.message().to_string(),
    })?;
    let err = |key: &str, message: String| CliError::Parse { line: key_line(source, key), message };
    let numbers = |key: &str| -> Result<Option<Vec<Number>>, CliError> {
        let Some(v) = table.get(key) else { return Ok(None) };
        let items = value_strings(v).ok_or_else(|| err(key, format!("`{key}` must be a number or a list of numbers")))?;
        items
            .iter()
            .map(|s| s.parse::<Number>().map_err(|e: NumberError| err(key, e.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    };
    let scalar = |key: &str| -> Result<Number, CliError> {
        match numbers(key)? {
            Some(mut v) if v.len() == 1 => Ok(v.remove(0)),
            Some(_) => Err(err(key, format!("`{key}` takes a single number"))),
            None => Err(CliError::Parse { line: source.lines().count().max(1), message: format!("missing key `{key}`") }),
        }
    };
    let list = |key: &str| -> Result<Vec<Number>, CliError> {
        numbers(key)?.ok_or_else(|| CliError::Parse { line: source.lines().count().max(1), message: format!("missing key `{key}`") })
    };
    let family = match table.get("family") {
        Some(toml::Value::String(s)) => s.as_str(),
        Some(_) => return Err(err("family", "`family` must be a string".into())),
        None => return Err(CliError::Parse { line: 1, message: "missing key `family`".into() }),
    };
    let allowed: &[&str] = match family {
        "beta" => &["family", "beta"],
        "linear_mod_one" => &["family", "beta", "alpha"],
        "tent" => &["family", "slope"],
        "affine_pieces" => &["family", "endpoints", "slopes", "intercepts", "boundary_images"],
        other => return Err(err("family", format!("unknown family `{other}`"))),
    };
    if let Some(k) = table.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err(k, format!("key `{k}` does not apply to family `{family}`")));
    }
    Ok(match family {
        "beta" => MapSpec::Beta { beta: scalar("beta")? },
        "linear_mod_one" => MapSpec::LinearModOne { beta: scalar("beta")?, alpha: scalar("alpha")? },
        "tent" => MapSpec::Tent { slope: scalar("slope")? },
        _ => MapSpec::AffinePieces {
            endpoints: list("endpoints")?,
            slopes: list("slopes")?,
            intercepts: list("intercepts")?,
            boundary_images: numbers("boundary_images")?,
        },
    })
}

/// Normalized one-line form of a map description.
pub fn describe_spec(spec: &MapSpec) -> String {
    let join = |v: &[Number]| v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    match spec {
        MapSpec::Beta { beta } => format!("family=beta beta={beta}"),
        MapSpec::LinearModOne { beta, alpha } => format!("family=linear_mod_one beta={beta} alpha={alpha}"),
        MapSpec::Tent { slope } => format!("family=tent slope={slope}"),
        MapSpec::AffinePieces { endpoints, slopes, intercepts, boundary_images } => {
            let mut s = format!(
                "family=affine_pieces endpoints={} slopes={} intercepts={}",
                join(endpoints),
                join(slopes),
                join(intercepts)
            );
            if let Some(b) = boundary_images {
                let _ = write!(s, " boundary_images={}", join(b));
            }
            s
        }
    }
}

/// Reads a map file and echoes its normalized form on stderr.
pub fn parse_map_spec(path: &Path) -> Result<MapSpec, CliError> {
    let source = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let spec = parse_map_text(&source)?;
    eprintln!("map: {}", describe_spec(&spec));
    Ok(spec)
}

fn write_artifact(out: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: out.to_path_buf(), source };
    fs::create_dir_all(out).map_err(io)?;
    let path = out.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
    written.push(path);
    Ok(())
}

fn parse_word(s: &str) -> Result<Word, CliError> {
    Ok(s.parse::<Word>()?)
}

fn parse_components<S: Scalar>(s: &str) -> Result<Vec<(S, S)>, CliError> {
    s.split(',')
        .map(|c| {
            let (a, b) = c
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("component `{c}` is not of the form a:b")))?;
            let num = |t: &str| -> Result<S, CliError> { Ok(t.parse::<Number>().map_err(MapError::from)?.to_scalar().map_err(MapError::from)?) };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

fn show_connector(z: &Word) -> String {
    if z.is_empty() {
        "(empty)".into()
    } else {
        z.to_string()
    }
}

/// Checkpoints: powers of two below the horizon plus every complete block end.
fn default_checkpoints(stream: &crate::symbolic::SymbolStream, usable: usize) -> Vec<usize> {
    let mut cps: Vec<usize> = std::iter::successors(Some(1usize), |&c| c.checked_mul(2)).take_while(|&c| c <= usable).collect();
    cps.extend(stream.blocks().iter().filter(|b| b.complete && b.end <= usable).map(|b| b.end));
    cps.sort_unstable();
    cps.dedup();
    cps
}

fn run_typed<S: Scalar>(map: &PiecewiseMonotonicMap<S>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = &cfg.out;
    let mut written = Vec::new();
    let mut summary = String::new();
    match &cfg.command {
        Command::Diagram { depth } => {
            let d = build_diagram(map, *depth)?;
            write_artifact(out, "diagram.dot", &d.to_dot(), &mut written)?;
            write_artifact(out, "vertices.csv", &d.vertices_csv(), &mut written)?;
            write_artifact(out, "edges.csv", &d.edges_csv(), &mut written)?;
            let _ = writeln!(summary, "vertices {}\narrows {}\ndepth {}\nsaturated {}", d.len(), d.edge_count(), d.depth, d.saturated);
        }
        Command::Entropy { n, depths, depth } => {
            let mut estimates = Vec::new();
            for &len in n {
                estimates.push(entropy_word_count(map, len, cfg.budget)?);
            }
            let depths = match (depths.is_empty(), depth) {
                (false, _) => depths.clone(),
                (true, Some(d)) => vec![*d],
                (true, None) if n.is_empty() => vec![DEFAULT_DEPTH],
                (true, None) => vec![],
            };
            if !depths.is_empty() {
                estimates.extend(entropy_spectral_sequence(map, &depths)?);
            }
            let csv = estimates_csv(&estimates);
            write_artifact(out, "entropy.csv", &csv, &mut written)?;
            summary = csv;
        }
        Command::Periodic { max_period, phi } => {
            let phi = Observable::<S>::parse(phi)?;
            let mut csv = String::from("word,period,point,orbit,boundary,integral\n");
            for o in periodic_catalog(map, *max_period, cfg.budget)? {
                let value = if !phi.is_symbolic() && o.boundary {
                    String::new()
                } else {
                    render(&integral(&o, &phi)?)
                };
                let orbit = o.orbit.iter().map(render).collect::<Vec<_>>().join(" ");
                let _ = writeln!(csv, "{},{},{},{},{},{}", o.word, o.period(), render(&o.point), orbit, o.boundary, value);
            }
            write_artifact(out, "periodic.csv", &csv, &mut written)?;
            summary = csv;
        }
        Command::Spread { max_period, phi } => {
            let phi = Observable::<S>::parse(phi)?;
            let s = average_spread(map, &phi, *max_period, cfg.budget)?;
            let csv = format!(
                "min,max,argmin,argmax,measures\n{},{},{},{},{}\n",
                render(&s.min),
                render(&s.max),
                s.argmin,
                s.argmax,
                s.measures
            );
            write_artifact(out, "spread.csv", &csv, &mut written)?;
            let _ = writeln!(summary, "{} {}\nargmin {}\nargmax {}", render(&s.min), render(&s.max), s.argmin, s.argmax);
        }
        Command::Irregular(a) => {
            let phi = Observable::<S>::parse(&a.phi)?;
            let core = irreducible_core(&build_diagram(map, a.depth)?)?;
            let schedule = if a.blocks.is_empty() {
                BlockSchedule::Growth { factor: a.growth, first: None }
            } else {
                BlockSchedule::Explicit(a.blocks.clone())
            };
            let spec = IrregularSpec::new(&core, parse_word(&a.u)?, parse_word(&a.v)?, schedule, a.horizon)?;
            let stream = construct_irregular_sequence(map, &spec)?;
            let horizon = stream.horizon().unwrap_or(a.horizon);
            let usable = horizon + 1 - phi.depth().max(1);
            let report = oscillation_check(map, &phi, &stream, &default_checkpoints(&stream, usable))?;
            write_artifact(out, "checkpoints.csv", &report.to_csv(), &mut written)?;
            write_artifact(out, "blocks.csv", &report.blocks_csv(), &mut written)?;
            let prefix = stream.prefix(horizon)?.render(map.k());
            write_artifact(out, "stream.txt", &format!("{prefix}\n"), &mut written)?;
            let _ = writeln!(
                summary,
                "connectors {} {}\nlength {}\ngap {:.15}\ntail_gap {}\ncertified {}",
                show_connector(&spec.z_uv),
                show_connector(&spec.z_vu),
                horizon,
                report.gap,
                report.tail_gap.map_or("none".to_string(), |g| format!("{g:.15}")),
                report.certified
            );
        }
        Command::Prop31 { phi, epsilon, depth, max_period, test_len } => {
            let phi = Observable::<S>::parse(phi)?;
            let opts = Prop31Options {
                epsilon: *epsilon,
                depth_cap: *depth,
                period_cap: *max_period,
                test_len: *test_len,
                ..Prop31Options::default()
            };
            let cert = proposition31_search(map, &phi, &opts)?;
            let verification = verify_certificate(map, &phi, &cert)?;
            let doc = certificate_json(&cert, &verification);
            let text = serde_json::to_string_pretty(&doc).expect("certificate serializes") + "\n";
            write_artifact(out, "certificate.json", &text, &mut written)?;
            summary = text;
        }
        Command::Decompose { components, phi, depth, max_period, tol } => {
            let phi = Observable::<S>::parse(phi)?;
            let comps = parse_components::<S>(components)?;
            let reports = decompose(map, &comps, &phi, *depth, *max_period, cfg.budget)?;
            let formula = irregular_entropy_formula(&reports, *tol);
            let csv = components_csv(&reports, &formula);
            write_artifact(out, "components.csv", &csv, &mut written)?;
            let _ = write!(summary, "{csv}irregular_entropy {:.15}\nempty {}\n", formula.value, formula.empty);
        }
    }
    Ok(Outcome { artifacts: written, summary })
}

/// Builds the map in the requested arithmetic and dispatches the subcommand.
pub fn run_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = parse_map_spec(&cfg.map)?;
    let exact = match cfg.mode {
        Mode::Exact => true,
        Mode::Float => false,
        Mode::Auto => spec.is_rational(),
    };
    if exact {
        run_typed(&make_map::<Rational>(&spec)?, cfg)
    } else {
        run_typed(&make_map::<f64>(&spec)?, cfg)
    }
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { 0 };
        }
    };
    let result = RunConfig::try_from(cli).and_then(|cfg| run_command(&cfg));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        assert_eq!(parse_map_text("family=\"beta\"\nbeta=\"2\"").unwrap(), MapSpec::Beta { beta: Number::int(2) });
        assert_eq!(
            parse_map_text("family=\"linear_mod_one\"\nbeta=\"9/5\"\nalpha=\"3/10\"").unwrap(),
            MapSpec::LinearModOne { beta: Number::ratio(9, 5), alpha: Number::ratio(3, 10) }
        );
        assert_eq!(parse_map_text("family = \"beta\"\nbeta = 1.8").unwrap(), MapSpec::Beta { beta: Number::ratio(9, 5) });
        let spec = parse_map_text(
            "family=\"affine_pieces\"\nendpoints=\"0,1/2,1\"\nslopes=[2,-2]\nintercepts=\"0,2\"",
        )
        .unwrap();
        assert!(spec.is_rational());
        assert_eq!(describe_spec(&spec), "family=affine_pieces endpoints=0,1/2,1 slopes=2,-2 intercepts=0,2");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = parse_map_text("family=\"beta\"\nbeta = = 2\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
        let e = parse_map_text("family=\"beta\"\n\nbeta=\"two\"").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 3, .. }), "{e}");
        let e = parse_map_text("family=\"beta\"\nbeta=\"2\"\nalpha=\"0\"").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 3, .. }), "{e}");
        assert!(parse_map_text("family=\"spiral\"").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Irregular(IrregularError::SpreadZero).exit_code(), 2);
        assert_eq!(CliError::Irregular(IrregularError::EntropyShortfall { best: 0.0, target: 1.0 }).exit_code(), 3);
        let budget = SymbolicError::BudgetExceeded { budget: 1 };
        assert_eq!(CliError::Entropy(EntropyError::Symbolic(budget.clone())).exit_code(), 4);
        assert_eq!(CliError::Measure(MeasureError::Symbolic(budget)).exit_code(), 4);
        assert_eq!(CliError::Diagram(DiagramError::VertexBudget(10)).exit_code(), 4);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }

    #[test]
    fn components_parse() {
        let c = parse_components::<Rational>("0:1/2,1/2:1").unwrap();
        assert_eq!(c[1].0, Rational::from_ratio(1, 2));
        assert!(parse_components::<Rational>("0-1").is_err());
    }
}
