//! `scaling-sweep`: the time-averaged QFI of the reference trajectory
//! across system sizes, with a log-log power-law fit.
//!
//! Each size is averaged over the family's plateau window and compared
//! with the dimension-counting prediction for the explored space; the
//! sweep reports `(prefactor, exponent)` of `F ~ prefactor * N^exponent`.

use anyhow::Result;
use spinchaos::dynamics::{time_averaged_qfi, AveragingWindow};
use spinchaos::predict::universal_qfi;
use spinchaos::spin::Axis;
use spinchaos::Error;

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;
use crate::svg;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model family: coe | cue | cse | ising | lmg.
    #[arg(long)]
    pub model: String,
    /// Comma-separated sizes, e.g. `25,50,100,200`.
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// Coupling override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Generator axis for the sweep.
    #[arg(long)]
    pub axis: Option<String>,
    /// Averaging window start and end (kicks or time).
    #[arg(long = "window-start")]
    pub window_start: Option<f64>,
    #[arg(long = "window-end")]
    pub window_end: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: Args) -> Result<()> {
    let mut overlay = Overlay::load(args.common.config.as_deref())?;
    let threads = common::init_threads(args.common.threads.or(overlay.take_usize("threads")?))?;
    let mut settings = Settings::default();

    let default_list = match args.model.as_str() {
        "cse" => "25,51,101,201",
        "ising" => "8,10,12",
        "lmg" => "50,100,200,400",
        _ => "25,50,100,200",
    };
    let list_text =
        args.n_list.or(overlay.take_string("n-list")?).unwrap_or_else(|| default_list.to_string());
    let sizes: Vec<usize> = common::parse_list(&list_text, "n-list")?;
    if sizes.len() < 2 {
        return Err(Error::invalid("a scaling sweep needs at least two sizes").into());
    }
    let axis_text = args.axis.or(overlay.take_string("axis")?).unwrap_or_else(|| "z".to_string());
    let axes = common::parse_axes(&axis_text)?;
    if axes.len() != 1 {
        return Err(Error::invalid("--axis takes a single generator").into());
    }
    let axis: Axis = axes[0];
    let spec0 = common::model_spec(&args.model, sizes[0], &common::parse_params(&args.params)?)?;
    let seed = pick(args.common.seed, overlay.take_u64("seed")?, common::DEFAULT_SEED);
    let window_start = args.window_start.or(overlay.take_f64("window-start")?);
    let window_end = args.window_end.or(overlay.take_f64("window-end")?);
    overlay.finish()?;

    let window_of = |spec: &spinchaos::models::ModelSpec| -> Result<AveragingWindow> {
        let mut w = common::default_window(spec);
        if let Some(start) = window_start {
            w.t_start = start;
        }
        if let Some(end) = window_end {
            w.t_end = end;
        }
        if w.t_start >= w.t_end {
            return Err(Error::invalid("the averaging window is empty").into());
        }
        Ok(w)
    };
    let shown = window_of(&spec0)?;

    settings.put("n-list", &sizes);
    settings.put("axis", axis.label());
    settings.put("window-start", shown.t_start);
    settings.put("window-end", shown.t_end);

    let outputs: Vec<String> =
        ["scaling.csv", "scaling.svg", "summary.json"].map(String::from).into();
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("scaling-sweep", Some(spec0.clone()), seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let mut rows = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let spec = common::with_n(&spec0, n);
        let system = common::prepare_system(&spec, &[axis])?;
        let (_, generator) = &system.generators[0];
        let labeled = [(axis.label(), generator)];
        let window = window_of(&spec)?;
        let average = time_averaged_qfi(&system.state, &system.decomposition, &labeled, &window)?;
        let prediction = universal_qfi(generator)?;
        rows.push((n, average.mean[0], average.std[0], prediction.leading_value));
    }

    let mut csv = String::from("n,qfi_mean,qfi_std,prediction\n");
    for &(n, mean, std, prediction) in &rows {
        csv.push_str(&format!("{n},{mean:.12e},{std:.12e},{prediction:.12e}\n"));
    }
    common::write_file(&args.common.out, "scaling.csv", &csv)?;

    let (prefactor, exponent) = loglog_fit(&rows);
    let chart = svg::line_chart(
        &format!("QFI scaling: {}", spec0.name()),
        "N",
        "time-averaged F_Q",
        true,
        true,
        &[
            svg::Series::marked(
                "measured",
                rows.iter().map(|&(n, m, _, _)| (n as f64, m)).collect(),
            ),
            svg::Series::dashed(
                "prediction",
                rows.iter().map(|&(n, _, _, p)| (n as f64, p)).collect(),
            ),
            svg::Series::line(
                format!("fit {prefactor:.3} N^{exponent:.3}"),
                rows.iter()
                    .map(|&(n, _, _, _)| (n as f64, prefactor * (n as f64).powf(exponent)))
                    .collect(),
            ),
        ],
    );
    common::write_file(&args.common.out, "scaling.svg", &chart)?;

    let summary = serde_json::json!({
        "model": spec0,
        "axis": axis.label(),
        "rows": rows.iter().map(|&(n, mean, std, prediction)| serde_json::json!({
            "n": n, "qfi_mean": mean, "qfi_std": std, "prediction": prediction,
        })).collect::<Vec<_>>(),
        "fit": { "prefactor": prefactor, "exponent": exponent },
    });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    println!(
        "scaling-sweep: {} over {:?} -> F ~ {prefactor:.4} N^{exponent:.4}",
        spec0.name(),
        sizes
    );
    Ok(())
}

/// Least squares on `ln F = ln prefactor + exponent ln N`.
fn loglog_fit(rows: &[(usize, f64, f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.1 > 0.0).map(|r| ((r.0 as f64).ln(), r.1.ln())).collect();
    assert!(pts.len() >= 2, "log-log fit needs two positive means");
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let exponent = num / den;
    ((my - exponent * mx).exp(), exponent)
}
