use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{projection_probability, DensityMatrix, MeasurementSetting};
use crate::seed;
use crate::tomography::CANONICAL_SETTINGS;

use super::{BinRange, CoincidenceHistogram, TomographyRecord, MIN_TAIL_BINS};

/// Parametrized biphoton source for synthetic histograms.
///
/// The correlated peak is a single-sided exponential starting at
/// `peak_start_bin`, truncated to a window of `window_decay_times` decay
/// times and normalized so that the window holds
/// `total_correlated_pairs × P_ν` counts on average. Bins after the window
/// form the background region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Expected correlated coincidences summed over HH, HV, VH and VV.
    pub total_correlated_pairs: f64,
    pub peak_decay_time_ns: f64,
    pub peak_start_bin: usize,
    pub accidental_per_bin: f64,
    pub env_per_bin: f64,
    pub num_bins: usize,
    pub bin_width_ns: f64,
    #[serde(default = "default_window_decay_times")]
    pub window_decay_times: f64,
}

fn default_window_decay_times() -> f64 {
    8.0
}

impl Default for SourceModel {
    /// Count scales giving few-percent fidelity uncertainties.
    fn default() -> Self {
        Self {
            total_correlated_pairs: 2.0e4,
            peak_decay_time_ns: 50.0,
            peak_start_bin: 100,
            accidental_per_bin: 20.0,
            env_per_bin: 0.0,
            num_bins: 4096,
            bin_width_ns: 1.0,
            window_decay_times: default_window_decay_times(),
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("total_correlated_pairs", self.total_correlated_pairs),
            ("accidental_per_bin", self.accidental_per_bin),
            ("env_per_bin", self.env_per_bin),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        let positive = [
            ("peak_decay_time_ns", self.peak_decay_time_ns),
            ("bin_width_ns", self.bin_width_ns),
            ("window_decay_times", self.window_decay_times),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        let (start, end) = self.peak_window();
        if end > self.num_bins {
            return Err(Error::invalid(format!(
                "peak window [{start}, {end}) does not fit in {} bins",
                self.num_bins
            )));
        }
        if self.num_bins - end < MIN_TAIL_BINS {
            return Err(Error::invalid(format!(
                "need at least {MIN_TAIL_BINS} background bins after the peak window"
            )));
        }
        Ok(())
    }

    pub fn window_bins(&self) -> usize {
        ((self.window_decay_times * self.peak_decay_time_ns / self.bin_width_ns).ceil() as usize).max(1)
    }

    pub fn peak_window(&self) -> BinRange {
        (self.peak_start_bin, self.peak_start_bin + self.window_bins())
    }

    pub fn tail(&self) -> BinRange {
        (self.peak_window().1, self.num_bins)
    }

    /// Mean counts per bin for a setting with projection probability `p`.
    pub fn expected_counts(&self, p: f64) -> Vec<f64> {
        let p = p.clamp(0.0, 1.0);
        let (start, end) = self.peak_window();
        let step = self.bin_width_ns / self.peak_decay_time_ns;
        let norm = 1.0 - (-(step * (end - start) as f64)).exp();
        let signal = self.total_correlated_pairs * p;
        (0..self.num_bins)
            .map(|b| {
                let mut mean = self.accidental_per_bin + self.env_per_bin;
                if (start..end).contains(&b) && signal > 0.0 {
                    let k = (b - start) as f64;
                    let frac = ((-(k * step)).exp() - (-((k + 1.0) * step)).exp()) / norm;
                    mean += signal * frac;
                }
                mean
            })
            .collect()
    }
}

fn draw<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let d = Poisson::new(mean).expect("positive finite mean");
    rng.sample(d) as u64
}

/// One Poisson-sampled histogram; identical output for identical seeds.
pub fn simulate_histogram(
    rho: &DensityMatrix,
    setting: MeasurementSetting,
    model: &SourceModel,
    seed: u64,
) -> Result<CoincidenceHistogram> {
    model.validate()?;
    let mut rng = seed::rng_for(seed, 0);
    let means = model.expected_counts(projection_probability(rho, setting));
    let bins = means.iter().map(|&m| draw(&mut rng, m)).collect();
    let mut h = CoincidenceHistogram::new(setting, model.bin_width_ns, bins, model.env_per_bin)?;
    h.acquisition_note = format!("synthetic, seed {seed}");
    Ok(h)
}

/// Sixteen histograms with sub-seeds `sub_seed(seed, setting index)`; the
/// window and background region come from the model.
pub fn simulate_record(rho: &DensityMatrix, model: &SourceModel, seed: u64) -> Result<TomographyRecord> {
    model.validate()?;
    let hists = CANONICAL_SETTINGS
        .iter()
        .enumerate()
        .map(|(i, &s)| simulate_histogram(rho, s, model, seed::sub_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    TomographyRecord::new(hists, model.peak_window(), Some(model.tail()))
}
