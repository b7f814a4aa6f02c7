use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use biphoton_core::coincidence::{
    histogram_from_csv, probabilities_from_record, resamplers, run_monte_carlo, simulate_record,
    MonteCarloOptions, SourceModel, TomographyRecord, DEFAULT_RESAMPLER,
};
use biphoton_core::holograms::{export_mask, patterns, render, GratingSpec, MaskFormat, PatternParams};
use biphoton_core::oam::ChainConfig;
use biphoton_core::quantum::{
    bell_state, depolarize, pure_fidelity, BellState, DensityMatrix, MeasurementSetting,
};
use biphoton_core::tomography::{
    linear_inversion, mle_reconstruct, reconstructors, InitialState, MleConfig, ProbabilitySet, SigmaSet,
};
use biphoton_core::uncertainty::{format_parenthesized, format_percent};
use biphoton_core::Error;

use crate::exit::{usage, NotConverged};
use crate::{HoloArgs, MleArgs, ModelArgs, OamMapArgs, RecordInput, ReconstructArgs, ReportArgs, SimulateArgs};

const PHYSICAL_TOLERANCE: f64 = 1e-10;

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let value = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(value)
}

fn parse_bell(name: &str) -> Result<BellState> {
    Ok(name.parse::<BellState>()?)
}

fn model_from(args: &ModelArgs) -> Result<SourceModel> {
    let model = SourceModel {
        total_correlated_pairs: args.pairs,
        peak_decay_time_ns: args.tau,
        peak_start_bin: args.start_bin,
        accidental_per_bin: args.accidental,
        env_per_bin: args.env,
        num_bins: args.bins,
        bin_width_ns: args.bin_width,
        window_decay_times: args.window_taus,
    };
    model.validate()?;
    Ok(model)
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let model = model_from(&args.model)?;
    let rho = match (&args.state, &args.rho) {
        (Some(name), _) => DensityMatrix::pure(&bell_state(parse_bell(name)?)),
        (None, Some(path)) => {
            let rho: DensityMatrix = read_json(path)?;
            if !rho.is_physical(1e-9) {
                return Err(usage(format!(
                    "{} is not a physical state (smallest eigenvalue {:.3e})",
                    path.display(),
                    rho.min_eigenvalue()
                )));
            }
            rho
        }
        (None, None) => return Err(usage("either --state or --rho is required")),
    };
    let rho = depolarize(&rho, args.keep)?;
    if let Some(name) = &args.resample {
        resamplers().get(name)?;
    }
    let mut record = simulate_record(&rho, &model, args.seed)?;
    record.resample = args.resample.clone();
    write_text(args.out.as_deref(), &(record.to_json_string()? + "\n"))?;

    let mut summary = String::from("setting  total counts\n");
    for h in record.histograms() {
        summary += &format!("{:<7}  {}\n", h.setting.to_string(), h.total());
    }
    if args.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn parse_range(text: &str, flag: &str) -> Result<(usize, usize)> {
    let parsed = text
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    parsed.ok_or_else(|| usage(format!("--{flag} expects START,END, got '{text}'")))
}

fn load_record(input: &RecordInput) -> Result<TomographyRecord> {
    if let Some(path) = &input.record {
        return Ok(TomographyRecord::read(path)?);
    }
    let window = input
        .window
        .as_deref()
        .ok_or_else(|| usage("--window is required with --csv"))
        .and_then(|w| parse_range(w, "window"))?;
    let tail = input.tail.as_deref().map(|t| parse_range(t, "tail")).transpose()?;
    let mut hists = Vec::new();
    for item in &input.csv {
        let (setting, path) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--csv expects SETTING=PATH, got '{item}'")))?;
        let setting: MeasurementSetting = setting.parse()?;
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
        let h = histogram_from_csv(file, setting, input.csv_bin_width, input.csv_env)
            .with_context(|| format!("reading {path}"))?;
        hists.push(h);
    }
    Ok(TomographyRecord::new(hists, window, tail)?)
}

fn mle_config(args: &MleArgs) -> Result<MleConfig> {
    let config = MleConfig {
        max_iterations: args.max_iterations,
        gradient_tolerance: args.tolerance,
        initial_state: if args.mixed_start {
            InitialState::MaximallyMixed
        } else {
            InitialState::FromLinearInversion
        },
        ..MleConfig::default()
    };
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct LinearOutput {
    rho: DensityMatrix,
    physical: bool,
    min_eigenvalue: f64,
}

#[derive(Serialize)]
struct MleOutput {
    rho: DensityMatrix,
    physical: bool,
    min_eigenvalue: f64,
    cost: f64,
    initial_cost: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct TargetFidelity {
    target: String,
    linear: f64,
    mle: f64,
}

#[derive(Serialize)]
struct ReconstructOutput {
    probabilities: ProbabilitySet,
    sigmas: SigmaSet,
    linear: LinearOutput,
    mle: MleOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<TargetFidelity>,
}

pub fn reconstruct(args: ReconstructArgs) -> Result<()> {
    let config = mle_config(&args.mle)?;
    let target = args.target.as_deref().map(parse_bell).transpose()?;
    let record = load_record(&args.input)?;
    let (probs, sigmas) = probabilities_from_record(&record)?;
    let lin = linear_inversion(&probs)?;
    let mle = mle_reconstruct(&probs, &sigmas, &config)?;

    let fidelity = target.map(|t| {
        let ket = bell_state(t);
        TargetFidelity {
            target: t.name().to_string(),
            linear: pure_fidelity(&lin, &ket),
            mle: pure_fidelity(&mle.rho, &ket),
        }
    });
    let output = ReconstructOutput {
        probabilities: probs,
        sigmas,
        linear: LinearOutput {
            rho: lin,
            physical: lin.is_physical(PHYSICAL_TOLERANCE),
            min_eigenvalue: lin.min_eigenvalue(),
        },
        mle: MleOutput {
            rho: mle.rho,
            physical: mle.rho.is_physical(PHYSICAL_TOLERANCE),
            min_eigenvalue: mle.rho.min_eigenvalue(),
            cost: mle.cost,
            initial_cost: mle.initial_cost,
            iterations: mle.iterations,
            converged: mle.converged,
        },
        fidelity,
    };
    write_text(args.out.as_deref(), &to_json(&output)?)?;
    if args.out.is_some() {
        println!(
            "linear inversion: physical = {}, min eigenvalue = {:.3e}",
            output.linear.physical, output.linear.min_eigenvalue
        );
        println!(
            "MLE: cost = {:.6}, iterations = {}, converged = {}",
            mle.cost, mle.iterations, mle.converged
        );
        if let Some(f) = &output.fidelity {
            println!("fidelity to {}: linear {:.4}, MLE {:.4}", f.target, f.linear, f.mle);
        }
    }
    if args.strict && !mle.converged {
        return Err(NotConverged {
            iterations: mle.iterations,
        }
        .into());
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let config = mle_config(&args.mle)?;
    let target = parse_bell(&args.target)?;
    let record = load_record(&args.input)?;
    let rule = args
        .resample
        .clone()
        .or_else(|| record.resample.clone())
        .unwrap_or_else(|| DEFAULT_RESAMPLER.to_string());
    let resampler_registry = resamplers();
    let method_registry = reconstructors(config);
    let report = run_monte_carlo(
        &record,
        &bell_state(target),
        &MonteCarloOptions {
            trials: args.trials,
            seed: args.seed,
            resampler: resampler_registry.get(&rule)?,
            reconstructor: method_registry.get(&args.method)?,
        },
    )?;
    if let Some(path) = &args.out {
        write_text(Some(path), &to_json(&report)?)?;
    }
    println!("target   {}", target.name());
    println!("method   {}, {} resampling", report.method, report.resample);
    println!("trials   {} ({} failed)", report.trials, report.failures);
    println!(
        "F = {}   (Monte Carlo mean {:.2}%)",
        format_percent(report.fidelity_nominal, report.fidelity_std),
        100.0 * report.fidelity_mean
    );
    println!(
        "S = {}   (Monte Carlo mean {:.3})",
        format_parenthesized(report.chsh_nominal, report.chsh_std),
        report.chsh_mean
    );
    Ok(())
}

#[derive(Serialize)]
struct OamOutput {
    amplitudes: BTreeMap<&'static str, [f64; 2]>,
    success_weight: f64,
    fidelities: BTreeMap<&'static str, f64>,
}

pub fn oam_map(args: OamMapArgs) -> Result<()> {
    let chain = match &args.config {
        Some(path) => read_json::<ChainConfig>(path)?,
        None => ChainConfig {
            c: BTreeMap::from([(0, args.c0), (1, args.c1)]),
            rotated: args.rotated,
            theta_rad: args.theta,
        },
    };
    let out = chain.run()?;
    let labels = ["HH", "HV", "VH", "VV"];
    let amplitudes = labels
        .iter()
        .zip(out.ket.amplitudes())
        .map(|(&l, a)| (l, [a.re, a.im]))
        .collect();
    let fidelities = BellState::ALL
        .iter()
        .map(|&b| (b.name(), bell_state(b).inner(&out.ket).norm_sqr()))
        .collect();
    let output = OamOutput {
        amplitudes,
        success_weight: out.success_weight,
        fidelities,
    };
    if args.json {
        print!("{}", to_json(&output)?);
        return Ok(());
    }
    println!("output polarization ket (HH, HV, VH, VV):");
    for (l, a) in labels.iter().zip(out.ket.amplitudes()) {
        println!("  {l}  {:+.6} {:+.6}i", a.re, a.im);
    }
    println!("success weight  {:.6}", out.success_weight);
    println!("fidelity to Bell states:");
    for b in BellState::ALL {
        println!("  {:<4}  {:.3}", b.name(), output.fidelities[b.name()]);
    }
    Ok(())
}

fn parse_size(text: &str) -> Result<(usize, usize)> {
    let parsed = text
        .split_once(['x', 'X'])
        .and_then(|(w, h)| Some((w.trim().parse().ok()?, h.trim().parse().ok()?)));
    parsed.ok_or_else(|| usage(format!("--size expects WxH, got '{text}'")))
}

pub fn holo(args: HoloArgs) -> Result<()> {
    let registry = patterns();
    let pattern = registry.get(&args.kind.to_ascii_lowercase())?;
    let (width, height) = parse_size(&args.size)?;
    let format = match &args.format {
        Some(f) => f.parse::<MaskFormat>()?,
        None => match args.out.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => MaskFormat::Png,
            _ => MaskFormat::Pgm,
        },
    };
    let spec = GratingSpec::centered(width, height, args.period);
    let mut mask = render(pattern, &PatternParams { l_prime: args.l }, &spec)?;
    if args.rot {
        mask = mask.rotate_180();
    }
    export_mask(&mask, &args.out, format)?;
    println!(
        "wrote {} {}x{} mask to {}",
        pattern.name(),
        width,
        height,
        args.out.display()
    );
    Ok(())
}
