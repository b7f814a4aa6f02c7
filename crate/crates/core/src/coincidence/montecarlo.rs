use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{chsh_max, pure_fidelity, TwoQubitKet};
use crate::registry::Registry;
use crate::seed;
use crate::tomography::{MaximumLikelihood, MleConfig, Reconstructor};

use super::{CountSummary, SettingCounts, TomographyRecord};

/// Draws one synthetic data set from a record.
pub trait Resampler: Send + Sync {
    fn name(&self) -> &'static str;
    fn resample(
        &self,
        record: &TomographyRecord,
        nominal: &CountSummary,
        rng: &mut ChaCha8Rng,
    ) -> Result<CountSummary>;
}

fn gaussian_count<R: Rng>(rng: &mut R, n: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (n + n.max(0.0).sqrt() * z).max(0.0)
}

/// Resamples each setting's net windowed count as `N + √N·z`, clamped at
/// zero. Baselines stay at their measured values.
pub struct NetCountResampler;

impl Resampler for NetCountResampler {
    fn name(&self) -> &'static str {
        "net"
    }

    fn resample(
        &self,
        _record: &TomographyRecord,
        nominal: &CountSummary,
        rng: &mut ChaCha8Rng,
    ) -> Result<CountSummary> {
        let mut settings = nominal.settings;
        for s in settings.iter_mut() {
            let net = gaussian_count(rng, s.net);
            *s = SettingCounts {
                gross: (s.gross + net - s.net).max(0.0),
                net,
                denominator: s.denominator,
            };
        }
        Ok(CountSummary { settings })
    }
}

/// Resamples every histogram bin as `c + √c·z`, clamped at zero, and
/// re-estimates the baselines from the resampled background region.
/// Accidental coincidences under the peak then contribute their own
/// fluctuations.
pub struct RawBinResampler;

impl Resampler for RawBinResampler {
    fn name(&self) -> &'static str {
        "raw-bins"
    }

    fn resample(
        &self,
        record: &TomographyRecord,
        _nominal: &CountSummary,
        rng: &mut ChaCha8Rng,
    ) -> Result<CountSummary> {
        let counts: Vec<Vec<f64>> = record
            .histograms()
            .iter()
            .map(|h| h.bins.iter().map(|&c| gaussian_count(rng, c as f64)).collect())
            .collect();
        record.summarize_counts(|i| counts[i].clone())
    }
}

pub fn resamplers() -> Registry<dyn Resampler> {
    let mut reg: Registry<dyn Resampler> = Registry::new("resampling rule");
    reg.register("net", Box::new(NetCountResampler));
    reg.register("raw-bins", Box::new(RawBinResampler));
    reg
}

pub const DEFAULT_RESAMPLER: &str = "net";

pub struct MonteCarloOptions<'a> {
    pub trials: usize,
    pub seed: u64,
    pub resampler: &'a dyn Resampler,
    pub reconstructor: &'a dyn Reconstructor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
    pub chsh_mean: f64,
    pub chsh_std: f64,
    /// Trials requested.
    pub trials: usize,
    /// Trials whose reconstruction failed; excluded from the statistics.
    pub failures: usize,
    /// Fidelity and CHSH of the record itself, without resampling.
    pub fidelity_nominal: f64,
    pub chsh_nominal: f64,
    pub resample: String,
    pub method: String,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn evaluate(
    summary: &CountSummary,
    target: &TwoQubitKet,
    reconstructor: &dyn Reconstructor,
) -> Result<(f64, f64)> {
    let (probs, sigmas) = summary.probabilities()?;
    let rho = reconstructor.reconstruct(&probs, &sigmas)?.rho;
    Ok((pure_fidelity(&rho, target), chsh_max(&rho)))
}

/// Runs `opts.trials` resample-and-reconstruct trials. Trial `k` draws from
/// `rng_for(seed, k)`, so results do not depend on thread scheduling.
pub fn run_monte_carlo(
    record: &TomographyRecord,
    target: &TwoQubitKet,
    opts: &MonteCarloOptions<'_>,
) -> Result<UncertaintyReport> {
    if opts.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let target = target.normalized()?;
    let nominal = record.summarize()?;
    let (fidelity_nominal, chsh_nominal) = evaluate(&nominal, &target, opts.reconstructor)?;

    let outcomes: Vec<Option<(f64, f64)>> = (0..opts.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::rng_for(opts.seed, k as u64);
            opts.resampler
                .resample(record, &nominal, &mut rng)
                .and_then(|s| evaluate(&s, &target, opts.reconstructor))
                .ok()
        })
        .collect();

    let ok: Vec<(f64, f64)> = outcomes.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(Error::invalid(format!(
            "all {} Monte Carlo trials failed to reconstruct",
            opts.trials
        )));
    }
    let fids: Vec<f64> = ok.iter().map(|t| t.0).collect();
    let chshs: Vec<f64> = ok.iter().map(|t| t.1).collect();
    let (fidelity_mean, fidelity_std) = mean_std(&fids);
    let (chsh_mean, chsh_std) = mean_std(&chshs);
    Ok(UncertaintyReport {
        fidelity_mean,
        fidelity_std,
        chsh_mean,
        chsh_std,
        trials: opts.trials,
        failures: opts.trials - ok.len(),
        fidelity_nominal,
        chsh_nominal,
        resample: opts.resampler.name().to_string(),
        method: opts.reconstructor.name().to_string(),
    })
}

/// MLE Monte Carlo with the record's resampling rule (`"net"` when unset).
pub fn monte_carlo_uncertainty(
    record: &TomographyRecord,
    target: &TwoQubitKet,
    trials: usize,
    seed: u64,
    mle_config: MleConfig,
) -> Result<UncertaintyReport> {
    mle_config.validate()?;
    let registry = resamplers();
    let resampler = registry.get(record.resample.as_deref().unwrap_or(DEFAULT_RESAMPLER))?;
    let mle = MaximumLikelihood(mle_config);
    run_monte_carlo(
        record,
        target,
        &MonteCarloOptions {
            trials,
            seed,
            resampler,
            reconstructor: &mle,
        },
    )
}
