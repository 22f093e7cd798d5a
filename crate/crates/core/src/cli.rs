//! `blochx` command line: argument parsing, state files and JSON reports.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::bloch::{bloch_to_operator, is_state, projector_to_ket, state_to_bloch, BlochVector, DensityState, PureState};
use crate::composite::{coupled_basis, product_basis, CompositeSpinSystem};
use crate::error::BlochError;
use crate::generators::GeneratorSet;
use crate::linalg::ComplexMatrix;
use crate::measurement::{run_measurement, simplex_from_observable, MeasurementSimplex, RunOptions};
use crate::space::{space_vector_composite, space_vector_single, verify_proposition, CompositeBasisKind, Proposition, VerifyTarget};
use crate::spin::{cone_parameters, cone_projection_range, spin_along, Direction3, Spin, SpinSystem};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "BLOCHX_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "blochx", version, about = "Extended Bloch representation toolkit")]
struct Cli {
    /// Seed for random sampling (falls back to BLOCHX_SEED, then 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file for the JSON report (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the pass/fail tolerance used by `verify`
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Ordered SU(N) generator list
    Generators {
        #[arg(long)]
        n: usize,
        /// Write the JSON report here
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Convert between density matrices, kets and Bloch vectors
    Bloch {
        #[arg(long, value_name = "PATH")]
        state: PathBuf,
        #[arg(long, conflicts_with = "to_matrix")]
        to_vector: bool,
        #[arg(long)]
        to_matrix: bool,
    },
    /// Spin observable along a direction
    Spin {
        #[arg(long, value_parser = parse_spin)]
        s: Spin,
        #[arg(long, value_parser = parse_direction, default_value = "0,0,1")]
        direction: ParsedDirection,
        /// Write the JSON report here
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
    },
    /// Hidden-measurement simulation
    Measure(MeasureArgs),
    /// Coupled or product eigenbasis of a two-spin composite
    Compose {
        #[arg(long, value_parser = parse_spin)]
        s1: Spin,
        #[arg(long, value_parser = parse_spin)]
        s2: Spin,
        #[arg(long, value_parser = parse_direction, default_value = "0,0,1")]
        direction: ParsedDirection,
        #[arg(long, value_enum, default_value = "coupled")]
        basis: BasisArg,
    },
    /// Check the direction-to-Bloch-vector correspondence
    Verify {
        #[arg(long, value_parser = parse_prop)]
        prop: Proposition,
        #[arg(long, value_parser = parse_spin)]
        s: Option<Spin>,
        #[arg(long, value_parser = parse_spin)]
        s1: Option<Spin>,
        #[arg(long, value_parser = parse_spin)]
        s2: Option<Spin>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long, value_parser = parse_spin, conflicts_with_all = ["s1", "s2"])]
    s: Option<Spin>,
    #[arg(long, value_parser = parse_spin, requires = "s2")]
    s1: Option<Spin>,
    #[arg(long, value_parser = parse_spin, requires = "s1")]
    s2: Option<Spin>,
    #[arg(long, value_enum, default_value = "coupled")]
    basis: BasisArg,
    #[arg(long, value_parser = parse_direction, default_value = "0,0,1")]
    direction: ParsedDirection,
    /// State file (matrix, ket or Bloch vector); maximally mixed when absent
    #[arg(long, value_name = "PATH")]
    state: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    trajectory_steps: Option<usize>,
    /// Trajectory CSV path (defaults next to --out)
    #[arg(long, value_name = "PATH")]
    trajectory_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Coupled,
    Product,
}

impl From<BasisArg> for CompositeBasisKind {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Coupled => CompositeBasisKind::Coupled,
            BasisArg::Product => CompositeBasisKind::Product,
        }
    }
}

/// A direction together with the norm it was given with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsedDirection {
    pub direction: Direction3,
    pub given_norm: f64,
}

fn parse_spin(s: &str) -> Result<Spin, String> {
    let value: f64 = s.trim().parse().map_err(|_| format!("invalid spin {s:?}: not a number"))?;
    Spin::new(value).map_err(|e| e.to_string())
}

fn parse_prop(s: &str) -> Result<Proposition, String> {
    s.parse().map_err(|e: BlochError| e.to_string())
}

fn parse_direction(s: &str) -> Result<ParsedDirection, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("malformed direction {s:?}: expected three comma-separated reals"))?;
    let v: [f64; 3] = parts
        .try_into()
        .map_err(|_| format!("malformed direction {s:?}: expected three components"))?;
    let (direction, given_norm) = Direction3::normalize(v).map_err(|e| e.to_string())?;
    Ok(ParsedDirection { direction, given_norm })
}

/// Input state, in whichever form the file used.
#[derive(Clone, Debug, PartialEq)]
pub enum StateInput {
    Matrix(ComplexMatrix),
    Ket(Vec<Complex64>),
    Vector(BlochVector),
}

impl StateInput {
    pub fn dim(&self) -> usize {
        match self {
            Self::Matrix(m) => m.dim(),
            Self::Ket(k) => k.len(),
            Self::Vector(v) => v.dim_n(),
        }
    }

    /// The state as a validated density matrix.
    pub fn density(&self, g: &GeneratorSet) -> crate::Result<DensityState> {
        match self {
            Self::Matrix(m) => DensityState::new(m.clone()),
            Self::Ket(k) => Ok(PureState::new(k.clone())?.projector()),
            Self::Vector(v) => crate::bloch::bloch_to_state(v, g),
        }
    }
}

fn parse_complex_list(v: &Value) -> Result<Vec<Complex64>, String> {
    let items = v.as_array().ok_or("expected an array of [re, im] pairs")?;
    items
        .iter()
        .map(|pair| match pair.as_array().map(|p| p.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err("complex entries must be numeric".to_string()),
            },
            _ => Err("complex entries must be [re, im] pairs".to_string()),
        })
        .collect()
}

fn parse_matrix(v: &Value) -> Result<ComplexMatrix, String> {
    let rows = v.as_array().ok_or("matrix must be an array of rows")?;
    let rows = rows.iter().map(parse_complex_list).collect::<Result<Vec<_>, _>>()?;
    ComplexMatrix::from_rows(rows).map_err(|e| e.to_string())
}

/// Parses a state document: `{"matrix": ..}`, `{"ket": ..}`, `{"n": .., "coords": ..}`
/// or a bare matrix.
pub fn parse_state_json(text: &str) -> Result<StateInput, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    if value.is_array() {
        return parse_matrix(&value).map(StateInput::Matrix);
    }
    let obj = value.as_object().ok_or("expected an object or a matrix")?;
    if let Some(m) = obj.get("matrix") {
        return parse_matrix(m).map(StateInput::Matrix);
    }
    if let Some(k) = obj.get("ket") {
        return parse_complex_list(k).map(StateInput::Ket);
    }
    if let (Some(n), Some(coords)) = (obj.get("n"), obj.get("coords")) {
        let n = n.as_u64().ok_or("\"n\" must be a positive integer")? as usize;
        let coords: Vec<f64> = serde_json::from_value(coords.clone()).map_err(|e| format!("bad coords: {e}"))?;
        return BlochVector::new(n, coords).map(StateInput::Vector).map_err(|e| e.to_string());
    }
    Err("expected one of the keys \"matrix\", \"ket\" or \"n\"/\"coords\"".into())
}

fn load_state(flag: &str, path: &Path) -> Result<StateInput, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{flag} {}: {e}", path.display())))?;
    parse_state_json(&text).map_err(|e| CliError::usage(format!("{flag} {}: {e}", path.display())))
}

/// Which system a measurement runs on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureTarget {
    Single(Spin),
    Composite(Spin, Spin, CompositeBasisKind),
}

impl MeasureTarget {
    pub fn dim(&self) -> usize {
        match self {
            Self::Single(s) => s.dim(),
            Self::Composite(a, b, _) => a.dim() * b.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Generators { n: usize },
    Bloch { state: StateInput, to_matrix: bool },
    Spin { s: Spin, direction: Direction3 },
    Measure {
        target: MeasureTarget,
        direction: Direction3,
        state: Option<StateInput>,
        samples: u64,
        trajectory_steps: Option<usize>,
        trajectory_csv: Option<PathBuf>,
    },
    Compose { s1: Spin, s2: Spin, direction: Direction3, basis: CompositeBasisKind },
    Verify { prop: Proposition, target: VerifyTarget, trials: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Generators { .. } => "generators",
            Self::Bloch { .. } => "bloch",
            Self::Spin { .. } => "spin",
            Self::Measure { .. } => "measure",
            Self::Compose { .. } => "compose",
            Self::Verify { .. } => "verify",
        }
    }
}

/// Fully validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub tolerance: Option<f64>,
    /// Non-fatal diagnostics gathered while parsing.
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: EXIT_USAGE }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn direction_warning(flag: &str, d: &ParsedDirection, warnings: &mut Vec<String>) -> Direction3 {
    if (d.given_norm - 1.0).abs() > 1e-6 {
        warnings.push(format!("warning: {flag} had norm {}; normalized", d.given_norm));
    }
    d.direction
}

/// Parses `argv` (without the program name). Help and version requests come
/// back as an error with exit code 0 and the text to print.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<RunConfig, CliError> {
    let args = std::iter::once("blochx").chain(argv.iter().map(|s| s.as_ref()));
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        let rendered = e.render().to_string();
        let message = if code == EXIT_OK {
            rendered
        } else {
            rendered.lines().next().unwrap_or("error").to_string()
        };
        CliError { message, code }
    })?;

    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("error: {SEED_ENV}: invalid seed {v:?}")))?,
            Err(_) => 0,
        },
    };
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::usage(format!("error: --tolerance: must be positive, got {t}")));
        }
    }

    let mut warnings = Vec::new();
    let mut output_path = cli.out;
    let command = match cli.command {
        CliCommand::Generators { n, json } => {
            if n < 2 {
                return Err(CliError::usage(format!("error: --n: dimension must be at least 2, got {n}")));
            }
            output_path = json.or(output_path);
            Command::Generators { n }
        }
        CliCommand::Bloch { state, to_vector: _, to_matrix } => Command::Bloch {
            state: load_state("--state", &state)?,
            to_matrix,
        },
        CliCommand::Spin { s, direction, emit } => {
            output_path = emit.or(output_path);
            Command::Spin {
                s,
                direction: direction_warning("--direction", &direction, &mut warnings),
            }
        }
        CliCommand::Measure(m) => {
            let target = match (m.s, m.s1, m.s2) {
                (Some(s), None, None) => MeasureTarget::Single(s),
                (None, Some(a), Some(b)) => MeasureTarget::Composite(a, b, m.basis.into()),
                _ => return Err(CliError::usage("error: --s: give either --s or both --s1 and --s2")),
            };
            if m.samples == 0 {
                return Err(CliError::usage("error: --samples: must be at least 1"));
            }
            if let Some(steps) = m.trajectory_steps {
                if steps < 2 {
                    return Err(CliError::usage(format!("error: --trajectory-steps: must be at least 2, got {steps}")));
                }
            }
            let state = m.state.as_deref().map(|p| load_state("--state", p)).transpose()?;
            if let Some(st) = &state {
                if st.dim() != target.dim() {
                    return Err(CliError::usage(format!(
                        "error: --state: dimension {} does not match the observable dimension {}",
                        st.dim(),
                        target.dim()
                    )));
                }
            }
            let trajectory_csv = match (m.trajectory_steps, m.trajectory_csv) {
                (Some(_), Some(p)) => Some(p),
                (Some(_), None) => output_path.as_ref().map(|p| p.with_extension("trajectory.csv")),
                (None, _) => None,
            };
            Command::Measure {
                target,
                direction: direction_warning("--direction", &m.direction, &mut warnings),
                state,
                samples: m.samples,
                trajectory_steps: m.trajectory_steps,
                trajectory_csv,
            }
        }
        CliCommand::Compose { s1, s2, direction, basis } => Command::Compose {
            s1,
            s2,
            direction: direction_warning("--direction", &direction, &mut warnings),
            basis: basis.into(),
        },
        CliCommand::Verify { prop, s, s1, s2, trials } => {
            let target = match (prop, s, s1, s2) {
                (Proposition::Single, Some(s), _, _) => VerifyTarget::Single(s),
                (Proposition::Single, None, _, _) => return Err(CliError::usage("error: --s: required for --prop 1")),
                (_, _, Some(a), Some(b)) => VerifyTarget::Composite(a, b),
                _ => return Err(CliError::usage("error: --s1/--s2: required for --prop 2 and 2bis")),
            };
            if trials == 0 {
                return Err(CliError::usage("error: --trials: must be at least 1"));
            }
            Command::Verify { prop, target, trials }
        }
    };

    Ok(RunConfig {
        command,
        seed,
        output_path,
        tolerance: cli.tolerance,
        warnings,
    })
}

/// Pretty printing with every float written to 17 significant digits.
struct SigFigFormatter {
    inner: PrettyFormatter<'static>,
}

impl SigFigFormatter {
    fn new() -> Self {
        Self { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with 17 significant digits per float.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter::new());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(DeriveSerialize)]
struct Envelope<'a, T: Serialize> {
    blochx_schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Wraps a report in the schema envelope and writes it to the configured
/// path, or stdout. Returns the JSON text.
pub fn emit_report<T: Serialize>(result: &T, cfg: &RunConfig) -> Result<String, CliError> {
    let envelope = Envelope {
        blochx_schema: SCHEMA_VERSION,
        command: cfg.command.name(),
        body: result,
    };
    let text = to_json_string(&envelope).map_err(|e| CliError::usage(format!("error: serializing report: {e}")))?;
    match &cfg.output_path {
        Some(path) => write_file("--out", path, &text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage(format!("error: stdout: {e}")))?;
        }
    }
    Ok(text)
}

fn write_file(flag: &str, path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::usage(format!("error: {flag} {}: {e}", path.display())))
}

#[derive(DeriveSerialize)]
struct LabeledMatrix {
    label: String,
    matrix: ComplexMatrix,
}

#[derive(DeriveSerialize)]
struct GeneratorsReport {
    n: usize,
    c_n: f64,
    generators: Vec<LabeledMatrix>,
}

#[derive(DeriveSerialize)]
struct BlochReport {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ket: Option<PureState>,
    norm: f64,
    purity: f64,
    is_state: bool,
    min_eigenvalue: f64,
}

#[derive(DeriveSerialize)]
struct ConeReport {
    mu: f64,
    height: f64,
    slant: f64,
    radius: f64,
    projection_range: [f64; 2],
}

#[derive(DeriveSerialize)]
struct SpinReport {
    s: Spin,
    n: usize,
    direction: Direction3,
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenstates: Vec<PureState>,
    vertices: Vec<BlochVector>,
    cones: Vec<ConeReport>,
}

#[derive(DeriveSerialize)]
struct ComposeEntry {
    label: [f64; 2],
    total_mu: f64,
    state: PureState,
    vertex: BlochVector,
}

#[derive(DeriveSerialize)]
struct ComposeReport {
    s1: Spin,
    s2: Spin,
    n: usize,
    direction: Direction3,
    basis: CompositeBasisKind,
    /// `(s, μ_s)` for the coupled basis, `(μ1, μ2)` for the product basis.
    label_kind: &'static str,
    entries: Vec<ComposeEntry>,
    unitarity_residual: f64,
    space_vector: Vec<f64>,
    scale_constant: f64,
}

fn num_err(e: BlochError) -> CliError {
    CliError::usage(format!("error: {e}"))
}

fn composite_simplex(c: &CompositeSpinSystem, n: &Direction3, basis: CompositeBasisKind, g: &GeneratorSet) -> crate::Result<MeasurementSimplex> {
    match basis {
        CompositeBasisKind::Coupled => coupled_basis(c, n)?.simplex(g),
        CompositeBasisKind::Product => product_basis(c, n)?.simplex(g),
    }
}

fn generators_report(n: usize) -> crate::Result<GeneratorsReport> {
    let g = GeneratorSet::new(n)?;
    Ok(GeneratorsReport {
        n,
        c_n: g.c_n(),
        generators: g
            .generators()
            .iter()
            .enumerate()
            .map(|(i, m)| LabeledMatrix { label: g.label(i), matrix: m.clone() })
            .collect(),
    })
}

fn bloch_report(state: &StateInput, to_matrix: bool) -> crate::Result<BlochReport> {
    let g = GeneratorSet::new(state.dim())?;
    let (vector, operator) = match state {
        StateInput::Vector(v) => (v.clone(), bloch_to_operator(v, &g)?),
        other => {
            let d = other.density(&g)?;
            (state_to_bloch(&d, &g)?, d.into_matrix())
        }
    };
    let check = is_state(&vector, &g)?;
    let ket = if to_matrix && check.is_state {
        projector_to_ket(&DensityState::new(operator.clone())?).ok()
    } else {
        None
    };
    Ok(BlochReport {
        n: state.dim(),
        norm: vector.norm(),
        purity: crate::bloch::purity(&vector),
        coords: (!to_matrix).then(|| vector.coords().to_vec()),
        matrix: to_matrix.then_some(operator),
        ket,
        is_state: check.is_state,
        min_eigenvalue: check.min_eigenvalue,
    })
}

fn spin_report(s: Spin, direction: &Direction3) -> crate::Result<SpinReport> {
    let obs = spin_along(&SpinSystem::new(s), direction)?;
    let g = GeneratorSet::new(s.dim())?;
    let simplex = simplex_from_observable(&obs, &g)?;
    let cones = s
        .projections()
        .into_iter()
        .map(|mu| {
            let cone = cone_parameters(s, mu)?;
            let (lo, hi) = cone_projection_range(s, mu)?;
            Ok(ConeReport {
                mu,
                height: cone.height,
                slant: cone.slant,
                radius: cone.radius,
                projection_range: [lo, hi],
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(SpinReport {
        s,
        n: s.dim(),
        direction: *direction,
        matrix: obs.matrix.clone(),
        eigenvalues: obs.eigenvalues.clone(),
        eigenstates: obs.eigenstates.clone(),
        vertices: simplex.vertices().to_vec(),
        cones,
    })
}

fn compose_report(s1: Spin, s2: Spin, direction: &Direction3, basis: CompositeBasisKind) -> crate::Result<ComposeReport> {
    let c = CompositeSpinSystem::new(s1, s2);
    let g = GeneratorSet::new(c.dim())?;
    let (labels, states, unitarity_residual, label_kind) = match basis {
        CompositeBasisKind::Coupled => {
            let b = coupled_basis(&c, direction)?;
            let labels: Vec<[f64; 2]> = b.entries.iter().map(|e| [e.s, e.mu_s]).collect();
            let states: Vec<PureState> = b.entries.iter().map(|e| e.state.clone()).collect();
            (labels, states, b.matrix().unitarity_residual(), "s,mu_s")
        }
        CompositeBasisKind::Product => {
            let b = product_basis(&c, direction)?;
            let labels: Vec<[f64; 2]> = b.entries.iter().map(|e| [e.mu1, e.mu2]).collect();
            let states: Vec<PureState> = b.entries.iter().map(|e| e.state.clone()).collect();
            (labels, states, b.matrix().unitarity_residual(), "mu1,mu2")
        }
    };
    let entries = labels
        .into_iter()
        .zip(states)
        .map(|(label, state)| {
            let total_mu = match basis {
                CompositeBasisKind::Coupled => label[1],
                CompositeBasisKind::Product => label[0] + label[1],
            };
            Ok(ComposeEntry {
                vertex: state_to_bloch(&state.projector(), &g)?,
                label,
                total_mu,
                state,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let v = space_vector_composite(&c, direction, basis, &g)?;
    Ok(ComposeReport {
        s1,
        s2,
        n: c.dim(),
        direction: *direction,
        basis,
        label_kind,
        entries,
        unitarity_residual,
        space_vector: v.coords().to_vec(),
        scale_constant: v.scale_constant,
    })
}

/// Executes a parsed configuration and returns the process exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    for w in &cfg.warnings {
        eprintln!("{w}");
    }
    match &cfg.command {
        Command::Generators { n } => {
            emit_report(&generators_report(*n).map_err(num_err)?, cfg)?;
        }
        Command::Bloch { state, to_matrix } => {
            emit_report(&bloch_report(state, *to_matrix).map_err(num_err)?, cfg)?;
        }
        Command::Spin { s, direction } => {
            emit_report(&spin_report(*s, direction).map_err(num_err)?, cfg)?;
        }
        Command::Measure {
            target,
            direction,
            state,
            samples,
            trajectory_steps,
            trajectory_csv,
        } => {
            let g = GeneratorSet::new(target.dim()).map_err(num_err)?;
            let simplex = match target {
                MeasureTarget::Single(s) => {
                    simplex_from_observable(&spin_along(&SpinSystem::new(*s), direction).map_err(num_err)?, &g)
                }
                MeasureTarget::Composite(a, b, basis) => {
                    composite_simplex(&CompositeSpinSystem::new(*a, *b), direction, *basis, &g)
                }
            }
            .map_err(num_err)?;
            let psi = match state {
                Some(s) => s.density(&g).map_err(|e| CliError::usage(format!("error: --state: {e}")))?,
                None => DensityState::maximally_mixed(target.dim()),
            };
            let options = RunOptions {
                trajectory_steps: *trajectory_steps,
                ..RunOptions::default()
            };
            let report = run_measurement(&psi, &simplex, &g, *samples, cfg.seed, options).map_err(num_err)?;
            emit_report(&report, cfg)?;
            if let (Some(path), Some(csv)) = (trajectory_csv, report.trajectory_csv()) {
                write_file("--trajectory-csv", path, &csv)?;
            }
        }
        Command::Compose { s1, s2, direction, basis } => {
            emit_report(&compose_report(*s1, *s2, direction, *basis).map_err(num_err)?, cfg)?;
        }
        Command::Verify { prop, target, trials } => {
            let mut report = verify_proposition(*prop, *target, *trials, cfg.seed).map_err(num_err)?;
            if let Some(tol) = cfg.tolerance {
                report.tolerance = tol;
                for check in report.checks.iter_mut().filter(|c| c.name == "isomorphism") {
                    check.tolerance = tol;
                    check.pass = check.deviation <= tol;
                }
                report.pass = report.checks.iter().all(|c| c.pass);
            }
            emit_report(&report, cfg)?;
            if !report.pass {
                eprintln!("verification failed");
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Entry point shared by the binary: parse, execute, report errors.
pub fn run<S: AsRef<str>>(argv: &[S]) -> i32 {
    let outcome = parse_args(argv).and_then(|cfg| execute(&cfg));
    match outcome {
        Ok(code) => code,
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.message);
            e.code
        }
    }
}

/// Space vector of a single spin along a direction, for quick inspection.
pub fn single_space_vector(s: Spin, direction: &Direction3) -> crate::Result<Vec<f64>> {
    let g = GeneratorSet::new(s.dim())?;
    Ok(space_vector_single(&SpinSystem::new(s), direction, &g)?.coords().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        parse_args(args)
    }

    #[test]
    fn measure_config() {
        let cfg = parse(&["measure", "--s", "0.5", "--direction", "0,0,1", "--samples", "1000"]).unwrap();
        match cfg.command {
            Command::Measure { target, samples, state, .. } => {
                assert_eq!(target, MeasureTarget::Single(Spin::HALF));
                assert_eq!(samples, 1000);
                assert!(state.is_none());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_spin_is_one_line() {
        let err = parse(&["measure", "--s", "0.4"]).unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
        assert!(err.message.contains("invalid spin"), "{}", err.message);
        assert!(err.message.contains("--s"), "{}", err.message);
        assert!(!err.message.contains('\n'));
    }

    #[test]
    fn verify_config() {
        let cfg = parse(&["verify", "--prop", "2bis", "--s1", "0.5", "--s2", "0.5"]).unwrap();
        assert_eq!(
            cfg.command,
            Command::Verify {
                prop: Proposition::Product,
                target: VerifyTarget::Composite(Spin::HALF, Spin::HALF),
                trials: 100
            }
        );
        assert!(parse(&["verify", "--prop", "1"]).is_err());
        assert!(parse(&["verify", "--prop", "3", "--s", "1"]).is_err());
    }

    #[test]
    fn flag_errors_name_the_flag() {
        let e = parse(&["spin", "--s", "1", "--direction", "1,2"]).unwrap_err();
        assert!(e.message.contains("--direction"), "{}", e.message);
        let e = parse(&["spin", "--s", "1", "--bogus"]).unwrap_err();
        assert!(e.message.contains("--bogus"), "{}", e.message);
        let e = parse(&["bloch", "--state", "/nonexistent/psi.json"]).unwrap_err();
        assert!(e.message.contains("--state"), "{}", e.message);
    }

    #[test]
    fn direction_normalization_warns() {
        let cfg = parse(&["spin", "--s", "1", "--direction", "0,0,2"]).unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        let cfg = parse(&["spin", "--s", "1", "--direction", "0,0,1"]).unwrap();
        assert!(cfg.warnings.is_empty());
        assert!(parse(&["spin", "--s", "1", "--direction", "0,0,0"]).is_err());
    }

    #[test]
    fn help_exits_zero() {
        let e = parse(&["--help"]).unwrap_err();
        assert_eq!(e.code, EXIT_OK);
        assert!(e.message.contains("measure"));
    }

    #[test]
    fn output_aliases() {
        let cfg = parse(&["generators", "--n", "2", "--json", "g.json"]).unwrap();
        assert_eq!(cfg.output_path, Some(PathBuf::from("g.json")));
        let cfg = parse(&["spin", "--s", "1", "--emit", "o.json"]).unwrap();
        assert_eq!(cfg.output_path, Some(PathBuf::from("o.json")));
    }

    #[test]
    fn state_documents() {
        let m = parse_state_json("[[[1,0],[0,0]],[[0,0],[0,0]]]").unwrap();
        assert_eq!(m.dim(), 2);
        let k = parse_state_json(r#"{"ket": [[0.6, 0], [0, 0.8]]}"#).unwrap();
        assert!(matches!(k, StateInput::Ket(_)));
        let v = parse_state_json(r#"{"n": 2, "coords": [0, 0, 1], "extra": true}"#).unwrap();
        assert!(matches!(v, StateInput::Vector(_)));
        assert!(parse_state_json(r#"{"n": 2, "coords": [0, 0, 2]}"#).is_err());
        assert!(parse_state_json(r#"{"other": 1}"#).is_err());
    }

    #[test]
    fn seventeen_digit_floats() {
        let text = to_json_string(&vec![0.1_f64, 1.0, -0.0]).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("1.0000000000000000e0"), "{text}");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0], 0.1);
    }
}
