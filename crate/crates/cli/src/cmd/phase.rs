//! `phase-diagram`: the classical Lyapunov exponent of the sphere map
//! next to the quantum QFI saturation ratio over the kick plane (A, C).
//!
//! Writes the two grids as aligned matrix CSVs plus a combined
//! long-form CSV, renders both as heatmaps, and reports how well the
//! chaotic mask (`lambda > 0.1`) and the saturated mask
//! (`ratio > 0.8`) agree.

use anyhow::Result;
use spinchaos::classical::{phase_diagram_scan, PhaseDiagram, PhaseDiagramOptions};
use spinchaos::dynamics::AveragingWindow;

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;
use crate::svg;

/// Mask thresholds: a cell counts as classically chaotic above the
/// first, quantum-saturated above the second.
const LE_THRESHOLD: f64 = 0.1;
const RATIO_THRESHOLD: f64 = 0.8;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long = "a-min")]
    pub a_min: Option<f64>,
    #[arg(long = "a-max")]
    pub a_max: Option<f64>,
    #[arg(long = "c-min")]
    pub c_min: Option<f64>,
    #[arg(long = "c-max")]
    pub c_max: Option<f64>,
    /// Grid cells along A and C.
    #[arg(long = "grid-a")]
    pub grid_a: Option<usize>,
    #[arg(long = "grid-c")]
    pub grid_c: Option<usize>,
    /// Qubit count for the quantum side of each cell.
    #[arg(long)]
    pub n: Option<usize>,
    /// Ensemble size, iterations, and transient of the Lyapunov sweep.
    #[arg(long = "le-points")]
    pub le_points: Option<usize>,
    #[arg(long = "le-iterations")]
    pub le_iterations: Option<usize>,
    #[arg(long = "le-transient")]
    pub le_transient: Option<usize>,
    /// Stroboscopic averaging window for the quantum side.
    #[arg(long = "window-start")]
    pub window_start: Option<u64>,
    #[arg(long = "window-end")]
    pub window_end: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: Args) -> Result<()> {
    let mut overlay = Overlay::load(args.common.config.as_deref())?;
    let threads = common::init_threads(args.common.threads.or(overlay.take_usize("threads")?))?;
    let mut settings = Settings::default();

    let defaults = PhaseDiagramOptions::default();
    let options = PhaseDiagramOptions {
        a_range: (
            pick(args.a_min, overlay.take_f64("a-min")?, defaults.a_range.0),
            pick(args.a_max, overlay.take_f64("a-max")?, defaults.a_range.1),
        ),
        c_range: (
            pick(args.c_min, overlay.take_f64("c-min")?, defaults.c_range.0),
            pick(args.c_max, overlay.take_f64("c-max")?, defaults.c_range.1),
        ),
        grid: (
            pick(args.grid_a, overlay.take_usize("grid-a")?, defaults.grid.0),
            pick(args.grid_c, overlay.take_usize("grid-c")?, defaults.grid.1),
        ),
        n: pick(args.n, overlay.take_usize("n")?, defaults.n),
        window: AveragingWindow::kicks(
            pick(args.window_start, overlay.take_u64("window-start")?, defaults.window.t_start as u64),
            pick(args.window_end, overlay.take_u64("window-end")?, defaults.window.t_end as u64),
        ),
        le_points: pick(args.le_points, overlay.take_usize("le-points")?, defaults.le_points),
        le_iterations: pick(
            args.le_iterations,
            overlay.take_usize("le-iterations")?,
            defaults.le_iterations,
        ),
        le_transient: pick(
            args.le_transient,
            overlay.take_usize("le-transient")?,
            defaults.le_transient,
        ),
        seed: pick(args.common.seed, overlay.take_u64("seed")?, defaults.seed),
    };
    overlay.finish()?;

    settings.put("a-range", options.a_range);
    settings.put("c-range", options.c_range);
    settings.put("grid", options.grid);
    settings.put("n", options.n);
    settings.put("window-start", options.window.t_start);
    settings.put("window-end", options.window.t_end);
    settings.put("le-points", options.le_points);
    settings.put("le-iterations", options.le_iterations);
    settings.put("le-transient", options.le_transient);
    settings.put("le-threshold", LE_THRESHOLD);
    settings.put("ratio-threshold", RATIO_THRESHOLD);

    let outputs: Vec<String> =
        ["lambda.csv", "qfi_ratio.csv", "cells.csv", "lambda.svg", "qfi_ratio.svg", "summary.json"]
            .map(String::from)
            .into();
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("phase-diagram", None, options.seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let diagram = phase_diagram_scan(&options)?;

    common::write_file(&args.common.out, "lambda.csv", &matrix_csv(&diagram, &diagram.lambda))?;
    common::write_file(&args.common.out, "qfi_ratio.csv", &matrix_csv(&diagram, &diagram.qfi_ratio))?;
    common::write_file(&args.common.out, "cells.csv", &diagram.to_csv())?;

    let (a_cells, c_cells) = (diagram.a_values.len(), diagram.c_values.len());
    let lambda_map = svg::heatmap(
        &format!("classical Lyapunov exponent (N={})", diagram.n),
        "C",
        "A",
        options.c_range,
        options.a_range,
        c_cells,
        a_cells,
        &diagram.lambda,
    );
    common::write_file(&args.common.out, "lambda.svg", &lambda_map)?;
    let ratio_map = svg::heatmap(
        "QFI over dimension-counting prediction",
        "C",
        "A",
        options.c_range,
        options.a_range,
        c_cells,
        a_cells,
        &diagram.qfi_ratio,
    );
    common::write_file(&args.common.out, "qfi_ratio.svg", &ratio_map)?;

    let correlation = diagram.mask_correlation(LE_THRESHOLD, RATIO_THRESHOLD);
    let agreement = diagram.mask_agreement(LE_THRESHOLD, RATIO_THRESHOLD);
    let summary = serde_json::json!({
        "options": options,
        "mask_correlation": correlation,
        "mask_agreement": agreement,
        "le_threshold": LE_THRESHOLD,
        "ratio_threshold": RATIO_THRESHOLD,
    });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    println!(
        "phase-diagram: {a_cells}x{c_cells} cells, N={} -> mask correlation {correlation:.3}, agreement {agreement:.3}",
        diagram.n
    );
    Ok(())
}

/// Matrix CSV aligned with the scan grid: one row per A value, one
/// column per C value.
fn matrix_csv(diagram: &PhaseDiagram, values: &[f64]) -> String {
    let mut out = String::from("a\\c");
    for c in &diagram.c_values {
        out.push_str(&format!(",{c:.6}"));
    }
    out.push('\n');
    for (ia, a) in diagram.a_values.iter().enumerate() {
        out.push_str(&format!("{a:.6}"));
        for ic in 0..diagram.c_values.len() {
            out.push_str(&format!(",{:.12e}", values[diagram.cell(ia, ic)]));
        }
        out.push('\n');
    }
    out
}
