//! `wigner`: spherical Wigner quasi-probability portraits of the
//! reference trajectory.
//!
//! Renders the field at a set of times (by default: the initial
//! coherent state, a mid-scramble snapshot, and a late plateau state)
//! plus one Haar-random state of the same dimension for comparison.
//! Collective models only; the field lives on the symmetric multiplet.

use anyhow::Result;
use spinchaos::dynamics::evolve;
use spinchaos::models::ModelSpec;
use spinchaos::rmt::{sample_random_state, Ensemble};
use spinchaos::spin::StateVector;
use spinchaos::wigner::{wigner_grid, SphericalField};
use spinchaos::Error;

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;
use crate::svg;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model family: coe | cue | cse | lmg.
    #[arg(long)]
    pub model: String,
    /// Qubit count; defaults to 100 (101 for the symplectic top).
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Comma-separated snapshot times (kicks for the tops).
    #[arg(long)]
    pub times: Option<String>,
    /// Grid resolution; defaults keep the quadrature exact.
    #[arg(long = "n-theta")]
    pub n_theta: Option<usize>,
    #[arg(long = "n-phi")]
    pub n_phi: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: Args) -> Result<()> {
    let mut overlay = Overlay::load(args.common.config.as_deref())?;
    let threads = common::init_threads(args.common.threads.or(overlay.take_usize("threads")?))?;
    let mut settings = Settings::default();

    let default_n = if args.model == "cse" { 101 } else { 100 };
    let n = pick(args.n, overlay.take_usize("n")?, default_n);
    let spec = common::model_spec(&args.model, n, &common::parse_params(&args.params)?)?;
    if matches!(spec, ModelSpec::ChaoticIsing { .. }) {
        return Err(Error::invalid(
            "the phase-space field needs a collective model (coe, cue, cse, or lmg)",
        )
        .into());
    }
    let seed = pick(args.common.seed, overlay.take_u64("seed")?, common::DEFAULT_SEED);
    // Default snapshots: start, mid-scramble (before the Ehrenfest
    // time), and deep plateau.
    let default_times = if spec.is_floquet() { "0,2,500" } else { "0,1,30" };
    let times_text =
        args.times.or(overlay.take_string("times")?).unwrap_or_else(|| default_times.to_string());
    let times: Vec<f64> = common::parse_list(&times_text, "times")?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("snapshot times must be finite and nonnegative").into());
    }
    // Grids at least twice the multipole bandwidth keep the midpoint
    // quadrature of the field exact (and 64 the readable floor).
    let default_grid = 64.max(2 * (n + 1));
    let n_theta = pick(args.n_theta, overlay.take_usize("n-theta")?, default_grid);
    let n_phi = pick(args.n_phi, overlay.take_usize("n-phi")?, default_grid);
    overlay.finish()?;

    settings.put("times", &times);
    settings.put("n-theta", n_theta);
    settings.put("n-phi", n_phi);

    let mut outputs: Vec<String> = Vec::new();
    for &t in &times {
        outputs.push(format!("wigner_t{}.csv", time_tag(t)));
        outputs.push(format!("wigner_t{}.svg", time_tag(t)));
    }
    outputs.push("wigner_random.csv".to_string());
    outputs.push("wigner_random.svg".to_string());
    outputs.push("summary.json".to_string());
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("wigner", Some(spec.clone()), seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let out = &args.common.out;
    let system = common::prepare_system(&spec, &[])?;
    let mut reports = Vec::new();
    for &t in &times {
        let state = evolve(&system.state, &system.decomposition, t)?;
        let tag = format!("t{}", time_tag(t));
        let report = render(out, &state, &tag, n_theta, n_phi, &format!("{} t={t}", spec.name()))?;
        reports.push(serde_json::json!({ "time": t, "field": report }));
    }
    let random = sample_random_state(n + 1, Ensemble::Cue, seed)?;
    let report = render(out, &random, "random", n_theta, n_phi, "Haar-random state")?;
    reports.push(serde_json::json!({ "time": "random", "field": report }));

    let summary = serde_json::json!({ "model": spec, "snapshots": reports });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    for report in &reports {
        let f = &report["field"];
        println!(
            "wigner: t={} peak {:.4} at (theta {:.3}, phi {:.3}), integral {:.4}",
            report["time"],
            f["peak_value"].as_f64().unwrap(),
            f["peak_theta"].as_f64().unwrap(),
            f["peak_phi"].as_f64().unwrap(),
            f["integral"].as_f64().unwrap(),
        );
    }
    Ok(())
}

/// Computes one field, writes its CSV and heatmap, returns its summary.
fn render(
    out: &std::path::Path,
    state: &StateVector,
    tag: &str,
    n_theta: usize,
    n_phi: usize,
    title: &str,
) -> Result<serde_json::Value> {
    let field: SphericalField = wigner_grid(state, n_theta, n_phi)?;
    common::write_file(out, &format!("wigner_{tag}.csv"), &field.to_csv())?;
    let chart = svg::heatmap(
        &format!("Wigner field: {title}"),
        "phi",
        "theta",
        (0.0, 2.0 * std::f64::consts::PI),
        (0.0, std::f64::consts::PI),
        n_phi,
        n_theta,
        &field.values,
    );
    common::write_file(out, &format!("wigner_{tag}.svg"), &chart)?;
    let (theta, phi, value) = field.max_point();
    Ok(serde_json::json!({
        "peak_theta": theta,
        "peak_phi": phi,
        "peak_value": value,
        "integral": field.integral(),
    }))
}

/// Filename-safe time label: `2`, `0p5`, `1500`.
fn time_tag(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{}", t as u64)
    } else {
        format!("{t}").replace('.', "p").replace('-', "m")
    }
}
