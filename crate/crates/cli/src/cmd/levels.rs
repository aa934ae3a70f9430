//! `levels`: spectral statistics of one model against the Wigner
//! surmises.
//!
//! Floquet spectra enter as quasi-energy spacings (the circular density
//! is flat); Hamiltonian spectra are unfolded first. Every model is
//! desymmetrized before statistics are taken: the orthogonal- and
//! unitary-class tops split into their two spin-flip sectors, the chain
//! is restricted to one reflection sector, and the collective control
//! model splits into its two Dicke-parity chains. The verdict is
//! positive only when the best surmise actually fits: an integrable
//! spectrum fits nothing (its unfolded spacings pile up near one
//! spacing) and is reported as `none` rather than as the least-bad
//! ensemble.

use anyhow::Result;
use spinchaos::dynamics::SpectralDecomposition;
use spinchaos::linalg::CMat;
use spinchaos::models::ModelSpec;
use spinchaos::rmt::{quasi_energy_spacings, spacing_test, unfold_spectrum, Ensemble, SpacingSample};
use spinchaos::spin::{
    spin_flip_blocks, symmetry_sector, BasisDescriptor, Operator, SectorParity, SymmetryKind,
};
use spinchaos::Error;

use crate::common::{self, pick, Common, Overlay, Settings};
use crate::manifest::RunManifest;
use crate::svg;

/// KS distance under which the best-fitting surmise counts as a
/// positive identification. Chaotic desk-scale spectra land well below
/// this; integrable spectra land far above every surmise.
const ID_THRESHOLD: f64 = 0.08;

/// Unfolding polynomial degree and trimmed edge fraction.
const UNFOLD_DEGREE: usize = 10;
const UNFOLD_TRIM: f64 = 0.1;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model family: coe | cue | cse | ising | lmg.
    #[arg(long)]
    pub model: String,
    /// Qubit count; defaults to the family's spectroscopy size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling override, repeatable: --param a=1.7 --param c=10.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Chain reflection sector: even | odd.
    #[arg(long)]
    pub sector: Option<String>,
    /// Histogram bin count over [0, s-max].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Histogram range end.
    #[arg(long = "s-max")]
    pub s_max: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: Args) -> Result<()> {
    let mut overlay = Overlay::load(args.common.config.as_deref())?;
    let threads = common::init_threads(args.common.threads.or(overlay.take_usize("threads")?))?;
    let mut settings = Settings::default();

    let default_n = match args.model.as_str() {
        "cse" => 401,
        "ising" => 12,
        _ => 400,
    };
    let n = pick(args.n, overlay.take_usize("n")?, default_n);
    let spec = common::model_spec(&args.model, n, &common::parse_params(&args.params)?)?;
    let seed = pick(args.common.seed, overlay.take_u64("seed")?, common::DEFAULT_SEED);
    let bins = pick(args.bins, overlay.take_usize("bins")?, 60);
    let s_max = pick(args.s_max, overlay.take_f64("s-max")?, 4.0);
    if bins == 0 || s_max <= 0.0 {
        return Err(Error::invalid("the histogram needs bins > 0 and s-max > 0").into());
    }
    let sector = args.sector.or(overlay.take_string("sector")?);
    if sector.is_some() && !matches!(spec, ModelSpec::ChaoticIsing { .. }) {
        return Err(Error::invalid("--sector applies to the chain model only").into());
    }
    let parity = match sector.as_deref().unwrap_or("even") {
        "even" => SectorParity::Even,
        "odd" => SectorParity::Odd,
        other => {
            return Err(Error::invalid(format!("unknown sector `{other}`, expected even or odd"))
                .into())
        }
    };
    let kramers = matches!(spec, ModelSpec::KickedTopCse { .. });
    overlay.finish()?;

    settings.put("bins", bins);
    settings.put("s-max", s_max);
    settings.put("unfold-degree", UNFOLD_DEGREE);
    settings.put("unfold-trim", UNFOLD_TRIM);
    settings.put("kramers", kramers);
    settings.put("id-threshold", ID_THRESHOLD);
    if matches!(spec, ModelSpec::ChaoticIsing { .. }) {
        settings.put("sector", format!("reflection-{}", parity.label()));
    }

    let outputs: Vec<String> =
        ["spacings.csv", "histogram.csv", "levels.svg", "summary.json"].map(String::from).into();
    common::ensure_dir(&args.common.out)?;
    RunManifest::new("levels", Some(spec.clone()), seed, threads, settings, &outputs)
        .write(&args.common.out)?;

    let sample = spacing_sample(&spec, parity, kramers)?;
    let expected = match spec {
        ModelSpec::KickedTopCue { .. } => Ensemble::Cue,
        ModelSpec::KickedTopCse { .. } => Ensemble::Cse,
        // The chain has an antiunitary symmetry, and the control model
        // is graded against the orthogonal surmise it must *fail*.
        _ => Ensemble::Coe,
    };
    let verdict = spacing_test(&sample, expected)?;
    let poisson_ks = ks_distance(&sample, |s| 1.0 - (-s).exp());
    let label = if verdict.distances.iter().all(|(_, d)| *d >= ID_THRESHOLD) {
        "none"
    } else {
        verdict.best.label()
    };

    let mut spacings_csv = String::from("spacing\n");
    for s in &sample.spacings {
        spacings_csv.push_str(&format!("{s:.12e}\n"));
    }
    common::write_file(&args.common.out, "spacings.csv", &spacings_csv)?;

    let (centers, density) = histogram(&sample.spacings, bins, s_max);
    let mut hist_csv = String::from("s,density,poisson,coe,cue,cse\n");
    for (&c, &d) in centers.iter().zip(&density) {
        hist_csv.push_str(&format!(
            "{c:.6},{d:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            (-c).exp(),
            Ensemble::Coe.surmise_pdf(c),
            Ensemble::Cue.surmise_pdf(c),
            Ensemble::Cse.surmise_pdf(c)
        ));
    }
    common::write_file(&args.common.out, "histogram.csv", &hist_csv)?;

    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * s_max / 200.0).collect();
    let curve = |f: &dyn Fn(f64) -> f64| grid.iter().map(|&s| (s, f(s))).collect::<Vec<_>>();
    let overlays = [
        svg::Series::line("COE", curve(&|s| Ensemble::Coe.surmise_pdf(s))),
        svg::Series::line("CUE", curve(&|s| Ensemble::Cue.surmise_pdf(s))),
        svg::Series::line("CSE", curve(&|s| Ensemble::Cse.surmise_pdf(s))),
        svg::Series::dashed("Poisson", curve(&|s| (-s).exp())),
    ];
    let chart = svg::histogram(
        &format!("Level spacings: {} N={n}", spec.name()),
        "s",
        "P(s)",
        &centers,
        &density,
        s_max / bins as f64,
        &overlays,
    );
    common::write_file(&args.common.out, "levels.svg", &chart)?;

    let summary = serde_json::json!({
        "model": spec,
        "spacings": sample.spacings.len(),
        "verdict": label,
        "expected": verdict.expected.label(),
        "expected_distance": verdict.expected_distance,
        "best": verdict.best.label(),
        "ks": {
            "coe": verdict.distances[0].1,
            "cue": verdict.distances[1].1,
            "cse": verdict.distances[2].1,
            "poisson": poisson_ks,
        },
    });
    common::write_file(
        &args.common.out,
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("summary holds plain data"),
    )?;

    println!(
        "levels: {} N={n} -> verdict {label} (best {} at KS {:.4}, {} spacings)",
        spec.name(),
        verdict.best.label(),
        verdict.distances.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min),
        sample.spacings.len()
    );
    Ok(())
}

/// Model-appropriate spacing sample: circular quasi-energies for the
/// Floquet tops, unfolded level spacings for the Hamiltonian models.
fn spacing_sample(spec: &ModelSpec, parity: SectorParity, kramers: bool) -> Result<SpacingSample> {
    match spec {
        // The orthogonal- and unitary-class tops commute with the spin
        // flip about the kick axis, so their spectra superpose two
        // independent sequences; statistics are taken per flip sector
        // and pooled. The symplectic-class top has no unitary symmetry
        // left (that is its design), only the Kramers doubling.
        ModelSpec::KickedTopCoe { .. } | ModelSpec::KickedTopCue { .. } => {
            let u = spec.build()?;
            let (even, odd) = spin_flip_blocks(&u)?;
            let mut pooled = Vec::new();
            for block in [even, odd] {
                let dec = SpectralDecomposition::of_unitary(&block)?;
                pooled.extend(quasi_energy_spacings(&dec, false)?.spacings);
            }
            Ok(SpacingSample::from_raw_gaps(pooled)?)
        }
        ModelSpec::KickedTopCse { .. } => {
            let u = spec.build()?;
            let dec = SpectralDecomposition::of_unitary(&u)?;
            Ok(quasi_energy_spacings(&dec, kramers)?)
        }
        ModelSpec::ChaoticIsing { .. } => {
            let h = spec.build()?;
            let (block, _) = symmetry_sector(&h, SymmetryKind::BitReversal, parity)?;
            let dec = SpectralDecomposition::of_hermitian(&block)?;
            Ok(unfold_spectrum(&dec.values, UNFOLD_DEGREE, UNFOLD_TRIM)?)
        }
        ModelSpec::Lmg { .. } => {
            let h = spec.build()?;
            let mut pooled = Vec::new();
            for start in [0usize, 1usize] {
                let block = dicke_parity_block(&h, start)?;
                let dec = SpectralDecomposition::of_hermitian(&block)?;
                let sample = unfold_spectrum(&dec.values, UNFOLD_DEGREE, UNFOLD_TRIM)?;
                pooled.extend(sample.spacings);
            }
            Ok(SpacingSample::from_raw_gaps(pooled)?)
        }
    }
}

/// One Dicke-parity chain of a collective Hamiltonian: the operator
/// restricted to every second Dicke index. Valid whenever the couplings
/// move `m` by two at a time, which `levels` relies on for the control
/// model (`J_z` and `J_x²` terms only).
fn dicke_parity_block(op: &Operator, start: usize) -> Result<Operator> {
    let dim = op.dim();
    let idx: Vec<usize> = (start..dim).step_by(2).collect();
    let mut leak = 0.0_f64;
    for r in 0..dim {
        for c in 0..dim {
            if (r + c) % 2 == 1 {
                leak = leak.max(op.matrix[(r, c)].norm());
            }
        }
    }
    assert!(leak < 1e-12, "operator couples the Dicke parity chains (max element {leak:.2e})");
    let sub = CMat::from_fn(idx.len(), idx.len(), |r, c| op.matrix[(idx[r], idx[c])]);
    let basis = BasisDescriptor::sector(
        op.basis.qubit_count,
        idx.len(),
        format!("dicke-parity-{}", if start == 0 { "even" } else { "odd" }),
    );
    Ok(Operator::hermitian(sub, basis)?)
}

fn histogram(spacings: &[f64], bins: usize, s_max: f64) -> (Vec<f64>, Vec<f64>) {
    let width = s_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in spacings {
        let b = (s / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let norm = 1.0 / (spacings.len() as f64 * width);
    let centers = (0..bins).map(|b| (b as f64 + 0.5) * width).collect();
    let density = counts.iter().map(|&c| c as f64 * norm).collect();
    (centers, density)
}

fn ks_distance(sample: &SpacingSample, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.spacings.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &s) in sorted.iter().enumerate() {
        let f = cdf(s);
        worst = worst.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    worst
}
