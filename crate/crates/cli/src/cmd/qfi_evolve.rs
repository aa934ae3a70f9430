//! `qfi-evolve`: the QFI of the evolving reference state for up to
//! three collective generators.
//!
//! Emits the full time trace, an exponential fit of the early growth
//! (over the straight-line band of `ln F`), and the plateau average
//! against the dimension-counting prediction for each generator. The
//! Floquet tops are sampled stroboscopically; the Hamiltonian models on
//! a uniform grid fine enough to resolve the growth.

use anyhow::Result;
use spinchaos::dynamics::{
    estimate_t_star, fit_exponential_rate, qfi_trace, time_averaged_qfi, AveragingWindow,
};
use spinchaos::models::ModelSpec;
use spinchaos::predict::universal_qfi;
use spinchaos::Error;

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;
use crate::svg;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model family: coe | cue | cse | ising | lmg.
    #[arg(long)]
    pub model: String,
    /// Qubit count; defaults to 100 (101 for the symplectic top).
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Generators to track, e.g. `z` or `x,y,z`.
    #[arg(long)]
    pub axes: Option<String>,
    /// Trace length in kicks (Floquet models).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Trace sample count (Hamiltonian models).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Averaging window start and end (kicks or time).
    #[arg(long = "window-start")]
    pub window_start: Option<f64>,
    #[arg(long = "window-end")]
    pub window_end: Option<f64>,
    /// QFI band for the early-growth fit.
    #[arg(long = "fit-lo")]
    pub fit_lo: Option<f64>,
    #[arg(long = "fit-hi")]
    pub fit_hi: Option<f64>,
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
    let seed = pick(args.common.seed, overlay.take_u64("seed")?, common::DEFAULT_SEED);
    let axes_text =
        args.axes.or(overlay.take_string("axes")?).unwrap_or_else(|| "x,y,z".to_string());
    let axes = common::parse_axes(&axes_text)?;
    let fit_lo = pick(args.fit_lo, overlay.take_f64("fit-lo")?, 1.0);
    let fit_hi = pick(args.fit_hi, overlay.take_f64("fit-hi")?, 100.0);
    if !(fit_lo > 0.0 && fit_hi > fit_lo) {
        return Err(Error::invalid("the fit band needs 0 < fit-lo < fit-hi").into());
    }

    // Per-family grids: a stroboscopic trace for the tops, uniform
    // grids dense enough for the growth fit otherwise.
    let floquet = spec.is_floquet();
    let default_window = common::default_window(&spec);
    let window_start =
        pick(args.window_start, overlay.take_f64("window-start")?, default_window.t_start);
    let mut window_end =
        pick(args.window_end, overlay.take_f64("window-end")?, default_window.t_end);
    let (trace_times, window): (Vec<f64>, AveragingWindow) = if floquet {
        let steps = pick(args.steps, overlay.take_u64("steps")?, 2000);
        if steps == 0 {
            return Err(Error::invalid("the trace needs at least one kick (steps >= 1)").into());
        }
        window_end = window_end.min(steps as f64);
        if window_start >= window_end {
            return Err(Error::invalid("the averaging window is empty; lower window-start or raise steps").into());
        }
        settings.put("steps", steps);
        let times = (0..=steps).map(|k| k as f64).collect();
        (times, AveragingWindow::kicks(window_start as u64, window_end as u64))
    } else {
        if args.steps.is_some() {
            return Err(Error::invalid("--steps applies to the Floquet tops; use --samples here").into());
        }
        let default_samples = match spec {
            // dt = 0.05 resolves the control model's rate-4 growth.
            ModelSpec::Lmg { .. } => 801,
            _ => 301,
        };
        let samples = pick(args.samples, overlay.take_usize("samples")?, default_samples);
        if samples < 2 || window_start >= window_end {
            return Err(Error::invalid("the trace needs samples >= 2 and window-start < window-end").into());
        }
        settings.put("samples", samples);
        let dt = window_end / (samples - 1) as f64;
        let times = (0..samples).map(|k| k as f64 * dt).collect();
        let window_samples = match spec {
            ModelSpec::Lmg { .. } => 601,
            _ => 201,
        };
        settings.put("window-samples", window_samples);
        (times, AveragingWindow::uniform(window_start, window_end, window_samples))
    };
    overlay.finish()?;

    settings.put("axes", &axes_text);
    settings.put("window-start", window_start);
    settings.put("window-end", window_end);
    settings.put("fit-lo", fit_lo);
    settings.put("fit-hi", fit_hi);

    let outputs: Vec<String> = ["trace.csv", "evolve.svg", "summary.json"].map(String::from).into();
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("qfi-evolve", Some(spec.clone()), seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let system = common::prepare_system(&spec, &axes)?;
    let labeled: Vec<(&str, &spinchaos::spin::Operator)> =
        system.generators.iter().map(|(a, op)| (a.label(), op)).collect();
    let mut trace =
        qfi_trace(&system.state, &system.decomposition, &labeled, trace_times)?;
    let average = time_averaged_qfi(&system.state, &system.decomposition, &labeled, &window)?;
    trace.window = Some((window.t_start, window.t_end));
    common::write_file(&args.common.out, "trace.csv", &trace.to_csv())?;

    let mut axis_reports = Vec::new();
    let mut chart_series = Vec::new();
    let mut plotted_predictions: Vec<f64> = Vec::new();
    for (i, (axis, op)) in system.generators.iter().enumerate() {
        let prediction = universal_qfi(op)?;
        let fit = fit_exponential_rate(&trace.times, &trace.series[i], fit_lo, fit_hi);
        let t_star = estimate_t_star(&trace.times, &trace.series[i]);
        let mean = average.mean[i];
        axis_reports.push(serde_json::json!({
            "axis": axis.label(),
            "plateau_mean": mean,
            "plateau_std": average.std[i],
            "prediction": prediction.leading_value,
            "ratio": mean / prediction.leading_value,
            "rate_fit": fit,
            "t_star": t_star,
        }));
        chart_series.push(svg::Series::line(
            format!("F_{}", axis.label()),
            trace.times.iter().copied().zip(trace.series[i].iter().copied()).collect(),
        ));
        // One dashed guide per distinct prediction value.
        if !plotted_predictions.iter().any(|&p| (p - prediction.leading_value).abs() < 1e-9) {
            plotted_predictions.push(prediction.leading_value);
            chart_series.push(svg::Series::dashed(
                format!("prediction {:.4e}", prediction.leading_value),
                vec![
                    (trace.times[0], prediction.leading_value),
                    (*trace.times.last().unwrap(), prediction.leading_value),
                ],
            ));
        }
    }
    let chart = svg::line_chart(
        &format!("QFI evolution: {} N={n}", spec.name()),
        if floquet { "kicks" } else { "t" },
        "F_Q",
        false,
        true,
        &chart_series,
    );
    common::write_file(&args.common.out, "evolve.svg", &chart)?;

    let summary = serde_json::json!({
        "model": spec,
        "window": [window.t_start, window.t_end],
        "axes": axis_reports,
    });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    for report in &axis_reports {
        let rate = report["rate_fit"]
            .get("rate")
            .and_then(|r| r.as_f64())
            .map_or("none".to_string(), |r| format!("{r:.4}"));
        println!(
            "qfi-evolve: {} N={n} axis {}: plateau {:.4e} (prediction {:.4e}, ratio {:.3}), growth rate {rate}",
            spec.name(),
            report["axis"].as_str().unwrap(),
            report["plateau_mean"].as_f64().unwrap(),
            report["prediction"].as_f64().unwrap(),
            report["ratio"].as_f64().unwrap(),
        );
    }
    Ok(())
}
