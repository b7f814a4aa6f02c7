//! Coincidence histograms and their conversion to projection probabilities.
//!
//! A histogram's windowed excess over the flat accidental baseline is
//! divided by `baseline − environment`. That ratio does not depend on the
//! collection efficiencies, because signal and accidentals both scale with
//! their product. Normalizing the computational quadruple then yields
//! probabilities.

mod io;
mod montecarlo;
mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::MeasurementSetting;
use crate::tomography::{setting_index, ProbabilitySet, SigmaSet, CANONICAL_SETTINGS, COMPUTATIONAL};

pub use io::histogram_from_csv;
pub use montecarlo::{
    monte_carlo_uncertainty, resamplers, run_monte_carlo, MonteCarloOptions, NetCountResampler, DEFAULT_RESAMPLER,
    RawBinResampler, Resampler, UncertaintyReport,
};
pub use simulate::{simulate_histogram, simulate_record, SourceModel};

pub const MIN_TAIL_BINS: usize = 10;
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Half-open bin range `[start, end)`.
pub type BinRange = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub setting: MeasurementSetting,
    pub bin_width_ns: f64,
    pub bins: Vec<u64>,
    /// Stray-light and dark-count floor, counts per bin.
    pub env_per_bin: f64,
    /// Accidental baseline, counts per bin. Estimated from the record's
    /// tail region when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_per_bin: Option<f64>,
    #[serde(default, rename = "note", skip_serializing_if = "String::is_empty")]
    pub acquisition_note: String,
}

impl CoincidenceHistogram {
    pub fn new(setting: MeasurementSetting, bin_width_ns: f64, bins: Vec<u64>, env_per_bin: f64) -> Result<Self> {
        let h = Self {
            setting,
            bin_width_ns,
            bins,
            env_per_bin,
            background_per_bin: None,
            acquisition_note: String::new(),
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins.is_empty() {
            return Err(Error::invalid(format!("histogram {} has no bins", self.setting)));
        }
        if !(self.bin_width_ns > 0.0 && self.bin_width_ns.is_finite()) {
            return Err(Error::invalid(format!(
                "histogram {}: bin_width_ns must be positive",
                self.setting
            )));
        }
        if !(self.env_per_bin >= 0.0 && self.env_per_bin.is_finite()) {
            return Err(Error::invalid(format!(
                "histogram {}: env_per_bin must be finite and non-negative",
                self.setting
            )));
        }
        if let Some(b) = self.background_per_bin {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!(
                    "histogram {}: background_per_bin must be finite and non-negative",
                    self.setting
                )));
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> Vec<f64> {
        self.bins.iter().map(|&c| c as f64).collect()
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundEstimate {
    pub per_bin_level: f64,
    pub env_per_bin_level: f64,
}

impl BackgroundEstimate {
    pub fn denominator(&self) -> f64 {
        self.per_bin_level - self.env_per_bin_level
    }
}

fn check_range(range: BinRange, len: usize, what: &str) -> Result<()> {
    let (start, end) = range;
    if start >= end || end > len {
        return Err(Error::invalid(format!(
            "{what} [{start}, {end}) does not fit inside {len} bins"
        )));
    }
    Ok(())
}

fn normalize_counts(
    counts: &[f64],
    bg: &BackgroundEstimate,
    window: BinRange,
    setting: MeasurementSetting,
) -> Result<f64> {
    check_range(window, counts.len(), "integration window")?;
    let denominator = bg.denominator();
    if !(denominator > DENOMINATOR_FLOOR) {
        return Err(Error::ZeroDenominator {
            setting: setting.to_string(),
            denominator,
        });
    }
    let net: f64 = counts[window.0..window.1]
        .iter()
        .map(|c| c - bg.per_bin_level)
        .sum();
    Ok(net / denominator)
}

/// Normalized coincidence quantity: windowed excess over the baseline,
/// divided by `baseline − env`. A negative excess is returned as is.
pub fn normalize_histogram(
    hist: &CoincidenceHistogram,
    bg: &BackgroundEstimate,
    window: BinRange,
) -> Result<f64> {
    normalize_counts(&hist.counts(), bg, window, hist.setting)
}

fn mean_over(counts: &[f64], tail: BinRange) -> Result<f64> {
    check_range(tail, counts.len(), "background region")?;
    let len = tail.1 - tail.0;
    if len < MIN_TAIL_BINS {
        return Err(Error::RegionTooSmall {
            len,
            min: MIN_TAIL_BINS,
        });
    }
    Ok(counts[tail.0..tail.1].iter().sum::<f64>() / len as f64)
}

/// Mean counts per bin over the `tail` region.
pub fn estimate_background(hist: &CoincidenceHistogram, tail: BinRange) -> Result<f64> {
    mean_over(&hist.counts(), tail)
}

/// Sixteen histograms plus the shared integration window and background
/// region. Histograms are stored in canonical setting order.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    histograms: Vec<CoincidenceHistogram>,
    pub window: BinRange,
    pub tail: Option<BinRange>,
    /// Default Monte Carlo resampling rule for this record (see
    /// [`resamplers`]).
    pub resample: Option<String>,
}

impl TomographyRecord {
    pub fn new(
        histograms: Vec<CoincidenceHistogram>,
        window: BinRange,
        tail: Option<BinRange>,
    ) -> Result<Self> {
        let mut slots: Vec<Option<CoincidenceHistogram>> = vec![None; 16];
        for h in histograms {
            h.validate()?;
            let idx = setting_index(h.setting).ok_or_else(|| {
                Error::invalid(format!("{} is not one of the 16 canonical settings", h.setting))
            })?;
            if slots[idx].is_some() {
                return Err(Error::invalid(format!("setting {} appears twice", h.setting)));
            }
            slots[idx] = Some(h);
        }
        let mut ordered = Vec::with_capacity(16);
        for (idx, slot) in slots.into_iter().enumerate() {
            ordered.push(slot.ok_or_else(|| {
                Error::invalid(format!("record is missing setting {}", CANONICAL_SETTINGS[idx]))
            })?);
        }
        for h in &ordered {
            check_range(window, h.bins.len(), &format!("integration window of {}", h.setting))?;
            if let Some(t) = tail {
                check_range(t, h.bins.len(), &format!("background region of {}", h.setting))?;
            } else if h.background_per_bin.is_none() {
                return Err(Error::invalid(format!(
                    "histogram {} has no background_per_bin and the record has no tail region",
                    h.setting
                )));
            }
        }
        if let Some(t) = tail {
            if t.1 - t.0 < MIN_TAIL_BINS {
                return Err(Error::RegionTooSmall {
                    len: t.1 - t.0,
                    min: MIN_TAIL_BINS,
                });
            }
            if t.0 < window.1 && window.0 < t.1 {
                return Err(Error::invalid(format!(
                    "background region [{}, {}) overlaps the integration window [{}, {})",
                    t.0, t.1, window.0, window.1
                )));
            }
        }
        Ok(Self {
            histograms: ordered,
            window,
            tail,
            resample: None,
        })
    }

    pub fn histograms(&self) -> &[CoincidenceHistogram] {
        &self.histograms
    }

    pub fn histogram(&self, setting: MeasurementSetting) -> Option<&CoincidenceHistogram> {
        setting_index(setting).map(|i| &self.histograms[i])
    }

    pub fn with_resample(mut self, name: impl Into<String>) -> Self {
        self.resample = Some(name.into());
        self
    }

    fn background_from(&self, idx: usize, counts: &[f64]) -> Result<BackgroundEstimate> {
        let h = &self.histograms[idx];
        let per_bin_level = match (h.background_per_bin, self.tail) {
            (Some(b), _) => b,
            (None, Some(t)) => mean_over(counts, t)?,
            (None, None) => unreachable!("checked in TomographyRecord::new"),
        };
        Ok(BackgroundEstimate {
            per_bin_level,
            env_per_bin_level: h.env_per_bin,
        })
    }

    pub fn background(&self, setting: MeasurementSetting) -> Result<BackgroundEstimate> {
        let idx = setting_index(setting)
            .ok_or_else(|| Error::invalid(format!("{setting} is not a canonical setting")))?;
        self.background_from(idx, &self.histograms[idx].counts())
    }

    /// Net, gross and denominator per setting for the stored counts.
    pub fn summarize(&self) -> Result<CountSummary> {
        self.summarize_counts(|i| self.histograms[i].counts())
    }

    /// Same as [`summarize`](Self::summarize) but with per-setting counts
    /// supplied by `counts_for` (used by the resamplers). Backgrounds are
    /// re-estimated from those counts.
    pub fn summarize_counts(&self, counts_for: impl Fn(usize) -> Vec<f64>) -> Result<CountSummary> {
        let mut out = [SettingCounts::default(); 16];
        for (idx, slot) in out.iter_mut().enumerate() {
            let counts = counts_for(idx);
            let bg = self.background_from(idx, &counts)?;
            let g = normalize_counts(&counts, &bg, self.window, CANONICAL_SETTINGS[idx])?;
            let gross: f64 = counts[self.window.0..self.window.1].iter().sum();
            *slot = SettingCounts {
                net: g * bg.denominator(),
                gross,
                denominator: bg.denominator(),
            };
        }
        Ok(CountSummary { settings: out })
    }
}

/// Windowed counts of one setting.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SettingCounts {
    /// Windowed counts minus the baseline.
    pub net: f64,
    /// Raw windowed counts.
    pub gross: f64,
    /// `baseline − env`.
    pub denominator: f64,
}

impl SettingCounts {
    pub fn normalized(&self) -> f64 {
        self.net / self.denominator
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSummary {
    pub settings: [SettingCounts; 16],
}

impl CountSummary {
    pub fn normalized(&self) -> [f64; 16] {
        self.settings.map(|s| s.normalized())
    }

    /// Probabilities and their Poisson standard deviations.
    ///
    /// The variance of a background-subtracted window integral is its gross
    /// count, floored at one count; it is carried through the same
    /// normalization as the probability.
    pub fn probabilities(&self) -> Result<(ProbabilitySet, SigmaSet)> {
        let g = self.normalized();
        let sum: f64 = COMPUTATIONAL.iter().map(|&i| g[i]).sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::EmptySignal { sum });
        }
        let probs = ProbabilitySet::normalized(g)?;
        let sigmas = self
            .settings
            .map(|s| s.gross.max(1.0).sqrt() / s.denominator / sum);
        Ok((probs, SigmaSet::new(sigmas)?))
    }
}

pub fn probabilities_from_record(record: &TomographyRecord) -> Result<(ProbabilitySet, SigmaSet)> {
    record.summarize()?.probabilities()
}
