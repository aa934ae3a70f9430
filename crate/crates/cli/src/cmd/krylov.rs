//! `krylov-dim`: the dimension of the space the evolution actually
//! explores from a chosen initial state, by two independent routes:
//! the orthogonalized power chain and the count of distinct eigenspaces
//! holding the state's weight.

use anyhow::Result;
use spinchaos::dynamics::{krylov_dimension, krylov_dimension_spectral};
use spinchaos::spin::StateVector;
use spinchaos::{tol, Error};

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model family: coe | cue | cse | ising | lmg.
    #[arg(long)]
    pub model: String,
    /// Qubit count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Initial state: css | eigenstate.
    #[arg(long)]
    pub state: Option<String>,
    /// Eigenstate index when --state eigenstate.
    #[arg(long)]
    pub index: Option<usize>,
    /// Residual tolerance ending the chain.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: Args) -> Result<()> {
    let mut overlay = Overlay::load(args.common.config.as_deref())?;
    let threads = common::init_threads(args.common.threads.or(overlay.take_usize("threads")?))?;
    let mut settings = Settings::default();

    let n = pick(args.n, overlay.take_usize("n")?, 10);
    let spec = common::model_spec(&args.model, n, &common::parse_params(&args.params)?)?;
    let seed = pick(args.common.seed, overlay.take_u64("seed")?, common::DEFAULT_SEED);
    let state_text =
        args.state.or(overlay.take_string("state")?).unwrap_or_else(|| "css".to_string());
    let index = pick(args.index, overlay.take_usize("index")?, 0);
    let tolerance = pick(args.tol, overlay.take_f64("tol")?, tol::KRYLOV_RESIDUAL_TOL);
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::invalid("the residual tolerance must sit in (0, 1)").into());
    }
    overlay.finish()?;

    settings.put("state", &state_text);
    settings.put("index", index);
    settings.put("tol", tolerance);

    let outputs: Vec<String> = ["summary.json"].map(String::from).into();
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("krylov-dim", Some(spec.clone()), seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let system = common::prepare_system(&spec, &[])?;
    let state: StateVector = match state_text.as_str() {
        "css" => system.state,
        "eigenstate" => {
            if index >= system.decomposition.dim() {
                return Err(Error::invalid(format!(
                    "eigenstate index {index} outside the {}-dimensional space",
                    system.decomposition.dim()
                ))
                .into());
            }
            StateVector::new(
                system.decomposition.vectors.column(index).into_owned(),
                system.decomposition.basis.clone(),
            )?
        }
        other => {
            return Err(
                Error::invalid(format!("unknown state `{other}`, expected css or eigenstate"))
                    .into(),
            )
        }
    };

    let chain = krylov_dimension(&system.op, &state, tolerance)?;
    // Weight threshold |a|^2 > tol^2 mirrors the chain's residual cut.
    let spectral =
        krylov_dimension_spectral(&system.decomposition, &state, tolerance * tolerance)?;

    let summary = serde_json::json!({
        "model": spec,
        "state": state_text,
        "tol": tolerance,
        "chain": chain,
        "spectral": spectral,
        "ambient": system.op.dim(),
    });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    println!(
        "krylov-dim: {} N={n} from {state_text}: chain {chain}, spectral {spectral} (ambient {})",
        spec.name(),
        system.op.dim()
    );
    Ok(())
}
