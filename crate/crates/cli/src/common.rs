//! Shared subcommand plumbing: flag/config/default merging, model
//! construction from `key=value` overrides, reference states and
//! averaging windows per model family, thread-pool setup, and output
//! helpers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use spinchaos::dynamics::{AveragingWindow, SpectralDecomposition, DEFAULT_KICK_WINDOW};
use spinchaos::models::ModelSpec;
use spinchaos::spin::{
    build_collective_ops, coherent_spin_state, symmetry_sector, Axis, Operator, Representation,
    SectorParity, StateVector, SymmetryKind,
};
use spinchaos::{linalg::CVec, Error};

/// Flags every subcommand accepts.
#[derive(Debug, clap::Args)]
pub struct Common {
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for every stochastic choice this run makes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker thread count; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON config file; flags beat the file, the file beats defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 7;

/// Maps module failures onto the documented exit codes: bad inputs 2,
/// capacity 3, anything numerical or environmental 4.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_)) | Some(Error::BasisMismatch(_)) => 2,
        Some(Error::Capacity(_)) => 3,
        _ => 4,
    }
}

/// CLI flag beats config file beats built-in default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Builds the global thread pool when a count was requested, and
/// reports the effective width either way.
pub fn init_threads(threads: Option<usize>) -> Result<usize> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::invalid("thread count must be positive").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("building the worker pool")?;
    }
    Ok(rayon::current_num_threads())
}

/// The config file's keys, consumed one by one so leftovers can be
/// rejected as typos instead of being silently ignored.
#[derive(Default)]
pub struct Overlay {
    map: serde_json::Map<String, Value>,
}

impl Overlay {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?;
        match value {
            Value::Object(map) => Ok(Self { map }),
            _ => Err(Error::invalid("config file must hold a JSON object").into()),
        }
    }

    fn take_number(&mut self, key: &str) -> Result<Option<serde_json::Number>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(x)),
            Some(other) => {
                Err(Error::invalid(format!("config key `{key}` must be a number, got {other}"))
                    .into())
            }
        }
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        Ok(self.take_number(key)?.and_then(|x| x.as_f64()))
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take_number(key)? {
            None => Ok(None),
            Some(x) => x
                .as_u64()
                .map(Some)
                .ok_or_else(|| Error::invalid(format!("config key `{key}` must be a nonnegative integer")).into()),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        Ok(self.take_u64(key)?.map(|x| x as usize))
    }

    pub fn take_string(&mut self, key: &str) -> Result<Option<String>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => {
                Err(Error::invalid(format!("config key `{key}` must be a string, got {other}"))
                    .into())
            }
        }
    }

    /// Rejects any key no setting consumed.
    pub fn finish(self) -> Result<()> {
        if self.map.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.map.keys().map(String::as_str).collect();
        Err(Error::invalid(format!("unknown config key(s): {}", keys.join(", "))).into())
    }
}

/// Every effective choice a run makes, keyed for the manifest. A
/// BTreeMap keeps the serialized order stable across runs.
#[derive(Default)]
pub struct Settings(pub BTreeMap<String, Value>);

impl Settings {
    pub fn put(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("settings hold plain data");
        self.0.insert(key.to_string(), value);
    }
}

/// Parses repeated `key=value` coupling overrides.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(Error::invalid(format!("malformed --param `{pair}`, expected key=value")).into());
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::invalid(format!("--param `{pair}`: value is not a number")))?;
        map.insert(key.trim().to_string(), value);
    }
    Ok(map)
}

fn take_param(map: &mut BTreeMap<String, f64>, key: &str, slot: &mut f64) {
    if let Some(v) = map.remove(key) {
        *slot = v;
    }
}

/// Builds a fully parameterized model from its family name, size, and
/// coupling overrides; unknown override keys are rejected.
pub fn model_spec(name: &str, n: usize, overrides: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let mut left = overrides.clone();
    let spec = match name {
        "coe" => {
            let mut s = ModelSpec::coe(n);
            if let ModelSpec::KickedTopCoe { a, c, .. } = &mut s {
                take_param(&mut left, "a", a);
                take_param(&mut left, "c", c);
            }
            s
        }
        "cue" => {
            let mut s = ModelSpec::cue(n);
            if let ModelSpec::KickedTopCue { p, lambda, lambda_prime, .. } = &mut s {
                take_param(&mut left, "p", p);
                take_param(&mut left, "lambda", lambda);
                take_param(&mut left, "lambda-prime", lambda_prime);
            }
            s
        }
        "cse" => {
            let mut s = ModelSpec::cse(n);
            if let ModelSpec::KickedTopCse { lambda0, lambda1, lambda2, lambda3, .. } = &mut s {
                take_param(&mut left, "lambda0", lambda0);
                take_param(&mut left, "lambda1", lambda1);
                take_param(&mut left, "lambda2", lambda2);
                take_param(&mut left, "lambda3", lambda3);
            }
            s
        }
        "ising" => {
            let mut s = ModelSpec::ising(n);
            if let ModelSpec::ChaoticIsing { j, h, lambda, .. } = &mut s {
                take_param(&mut left, "j", j);
                take_param(&mut left, "h", h);
                take_param(&mut left, "lambda", lambda);
            }
            s
        }
        "lmg" => {
            let mut s = ModelSpec::lmg(n);
            if let ModelSpec::Lmg { omega, xi, .. } = &mut s {
                take_param(&mut left, "omega", omega);
                take_param(&mut left, "xi", xi);
            }
            s
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown model `{other}`; expected coe, cue, cse, ising, or lmg"
            ))
            .into())
        }
    };
    if !left.is_empty() {
        let keys: Vec<&str> = left.keys().map(String::as_str).collect();
        return Err(Error::invalid(format!(
            "unknown parameter(s) for model {name}: {}",
            keys.join(", ")
        ))
        .into());
    }
    Ok(spec)
}

/// Same model family at a different size, couplings untouched.
pub fn with_n(spec: &ModelSpec, n: usize) -> ModelSpec {
    let mut out = spec.clone();
    match &mut out {
        ModelSpec::KickedTopCoe { n: slot, .. }
        | ModelSpec::KickedTopCue { n: slot, .. }
        | ModelSpec::KickedTopCse { n: slot, .. }
        | ModelSpec::ChaoticIsing { n: slot, .. }
        | ModelSpec::Lmg { n: slot, .. } => *slot = n,
    }
    out
}

/// The reference initial state of each family: the equatorial `−y`
/// coherent state for the kicked tops, the `−z` pole (the classically
/// unstable point) for the collective control model, and the polarized
/// all-up product state for the chain.
pub fn reference_state(spec: &ModelSpec) -> Result<StateVector> {
    let n = spec.n();
    let state = match spec {
        ModelSpec::KickedTopCoe { .. }
        | ModelSpec::KickedTopCue { .. }
        | ModelSpec::KickedTopCse { .. } => {
            coherent_spin_state(n, PI / 2.0, -PI / 2.0, Representation::Symmetric)?
        }
        ModelSpec::Lmg { .. } => coherent_spin_state(n, PI, 0.0, Representation::Symmetric)?,
        ModelSpec::ChaoticIsing { .. } => {
            let mut amps = CVec::zeros(1 << n);
            amps[0] = num_complex::Complex64::new(1.0, 0.0);
            StateVector::new(amps, spinchaos::spin::BasisDescriptor::full(n))?
        }
    };
    Ok(state)
}

/// The family's default averaging window: stroboscopic kicks for the
/// Floquet tops, a uniform late-time grid for the Hamiltonian models
/// (past the chain's relaxation, past the control model's slow
/// pole-escape oscillations).
pub fn default_window(spec: &ModelSpec) -> AveragingWindow {
    match spec {
        ModelSpec::KickedTopCoe { .. }
        | ModelSpec::KickedTopCue { .. }
        | ModelSpec::KickedTopCse { .. } => {
            AveragingWindow::kicks(DEFAULT_KICK_WINDOW.0, DEFAULT_KICK_WINDOW.1)
        }
        ModelSpec::ChaoticIsing { .. } => AveragingWindow::uniform(50.0, 150.0, 201),
        ModelSpec::Lmg { .. } => AveragingWindow::uniform(10.0, 40.0, 601),
    }
}

/// A model prepared for dynamics: the diagonalized evolution operator
/// (a symmetry block for the chain), the requested collective
/// generators in the same basis, and the reference state.
pub struct System {
    pub op: Operator,
    pub decomposition: SpectralDecomposition,
    pub generators: Vec<(Axis, Operator)>,
    pub state: StateVector,
}

/// Builds and diagonalizes `spec`, restricting the chain to its
/// reflection-even sector (where the all-up reference state lives).
pub fn prepare_system(spec: &ModelSpec, axes: &[Axis]) -> Result<System> {
    let built = spec.build()?;
    let n = spec.n();
    match spec {
        ModelSpec::ChaoticIsing { .. } => {
            let (block, projection) =
                symmetry_sector(&built, SymmetryKind::BitReversal, SectorParity::Even)?;
            let decomposition = SpectralDecomposition::of_hermitian(&block)?;
            let full_ops = build_collective_ops(n, Representation::Full)?;
            let mut generators = Vec::with_capacity(axes.len());
            for &axis in axes {
                generators.push((axis, projection.project_operator(full_ops.axis(axis))?));
            }
            let state = projection.project_state(&reference_state(spec)?)?;
            Ok(System { op: block, decomposition, generators, state })
        }
        _ => {
            let decomposition = SpectralDecomposition::of_operator(&built)?;
            let ops = build_collective_ops(n, Representation::Symmetric)?;
            let generators = axes.iter().map(|&a| (a, ops.axis(a).clone())).collect();
            let state = reference_state(spec)?;
            Ok(System { op: built, decomposition, generators, state })
        }
    }
}

/// Parses a comma-separated axis list like `x,z`.
pub fn parse_axes(text: &str) -> Result<Vec<Axis>> {
    let mut axes = Vec::new();
    for part in text.split(',') {
        let axis = match part.trim() {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            other => {
                return Err(Error::invalid(format!("unknown axis `{other}`, expected x, y, or z"))
                    .into())
            }
        };
        if !axes.contains(&axis) {
            axes.push(axis);
        }
    }
    if axes.is_empty() {
        return Err(Error::invalid("the axis list is empty").into());
    }
    Ok(axes)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let v = part
            .trim()
            .parse::<T>()
            .map_err(|_| Error::invalid(format!("bad {what} entry `{}`", part.trim())))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("the {what} list is empty")).into());
    }
    Ok(out)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
