//! Two-qubit state reconstruction from sixteen joint projections.

mod linear;
mod mle;
mod strategy;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{projection_probability, DensityMatrix, MeasurementSetting, PhotonBasis};

pub use linear::{linear_inversion, linear_inversion_for};
pub use mle::{
    mle_cost, mle_cost_and_gradient, mle_reconstruct, parametrize, params_from_state, InitialState,
    MleConfig, MleResult, NUM_PARAMS,
};
pub use strategy::{reconstructors, LinearInversion, MaximumLikelihood, Reconstruction, Reconstructor};

/// Smallest admissible standard deviation, in probability units.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// Tolerance on `P(HH)+P(HV)+P(VH)+P(VV) = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

use PhotonBasis::{A, D, H, L, R, V};

/// The sixteen joint settings, in the fixed reporting order.
pub const CANONICAL_SETTINGS: [MeasurementSetting; 16] = [
    MeasurementSetting::new(H, H),
    MeasurementSetting::new(H, V),
    MeasurementSetting::new(V, H),
    MeasurementSetting::new(V, V),
    MeasurementSetting::new(H, D),
    MeasurementSetting::new(H, L),
    MeasurementSetting::new(V, D),
    MeasurementSetting::new(V, L),
    MeasurementSetting::new(D, H),
    MeasurementSetting::new(L, H),
    MeasurementSetting::new(D, V),
    MeasurementSetting::new(L, V),
    MeasurementSetting::new(D, D),
    MeasurementSetting::new(L, R),
    MeasurementSetting::new(R, A),
    MeasurementSetting::new(A, R),
];

/// Indices of HH, HV, VH, VV in [`CANONICAL_SETTINGS`].
pub const COMPUTATIONAL: [usize; 4] = [0, 1, 2, 3];

pub fn canonical_settings() -> [MeasurementSetting; 16] {
    CANONICAL_SETTINGS
}

pub fn setting_index(setting: MeasurementSetting) -> Option<usize> {
    CANONICAL_SETTINGS.iter().position(|s| *s == setting)
}

fn index_of_name(name: &str) -> Result<usize> {
    let s: MeasurementSetting = name.parse()?;
    setting_index(s).ok_or_else(|| Error::invalid(format!("{s} is not one of the 16 canonical settings")))
}

fn map_to_array(map: &BTreeMap<String, f64>, what: &str) -> Result<[f64; 16]> {
    let mut out = [f64::NAN; 16];
    for (k, v) in map {
        let idx = index_of_name(k)?;
        if !out[idx].is_nan() {
            return Err(Error::invalid(format!("{what}: duplicate setting {k}")));
        }
        out[idx] = *v;
    }
    if let Some(missing) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::invalid(format!(
            "{what}: missing setting {}",
            CANONICAL_SETTINGS[missing]
        )));
    }
    Ok(out)
}

fn array_to_map(values: &[f64; 16]) -> BTreeMap<String, f64> {
    CANONICAL_SETTINGS
        .iter()
        .zip(values.iter())
        .map(|(s, v)| (s.to_string(), *v))
        .collect()
}

/// Projection probabilities over the canonical settings.
///
/// The computational quadruple must sum to one. Individual values may fall
/// outside `[0, 1]` when they come from noisy background-subtracted counts;
/// they are kept as measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilitySet {
    values: [f64; 16],
}

impl ProbabilitySet {
    pub fn new(values: [f64; 16]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("probabilities must be finite"));
        }
        let sum: f64 = COMPUTATIONAL.iter().map(|&i| values[i]).sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!(
                "P(HH)+P(HV)+P(VH)+P(VV) must be 1, got {sum}"
            )));
        }
        Ok(Self { values })
    }

    /// Divides every value by the computational-basis sum.
    pub fn normalized(values: [f64; 16]) -> Result<Self> {
        let sum: f64 = COMPUTATIONAL.iter().map(|&i| values[i]).sum();
        if !(sum > 0.0) {
            return Err(Error::EmptySignal { sum });
        }
        Self::new(values.map(|v| v / sum))
    }

    pub fn values(&self) -> &[f64; 16] {
        &self.values
    }

    pub fn get(&self, setting: MeasurementSetting) -> Option<f64> {
        setting_index(setting).map(|i| self.values[i])
    }

    pub fn by_name(&self, name: &str) -> Result<f64> {
        Ok(self.values[index_of_name(name)?])
    }
}

impl Serialize for ProbabilitySet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        array_to_map(&self.values).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbabilitySet {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        map_to_array(&map, "probabilities")
            .and_then(ProbabilitySet::new)
            .map_err(serde::de::Error::custom)
    }
}

/// Per-setting standard deviations, floored at [`SIGMA_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSet {
    values: [f64; 16],
}

impl SigmaSet {
    pub fn new(values: [f64; 16]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("standard deviations must be finite and non-negative"));
        }
        Ok(Self {
            values: values.map(|v| v.max(SIGMA_FLOOR)),
        })
    }

    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new([sigma; 16])
    }

    pub fn values(&self) -> &[f64; 16] {
        &self.values
    }

    /// `1 / σ²` per setting.
    pub fn weights(&self) -> [f64; 16] {
        self.values.map(|s| 1.0 / (s * s))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.map(|v| v * factor))
    }
}

impl Serialize for SigmaSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        array_to_map(&self.values).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SigmaSet {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        map_to_array(&map, "sigmas")
            .and_then(SigmaSet::new)
            .map_err(serde::de::Error::custom)
    }
}

/// `⟨ψ_ν|ρ|ψ_ν⟩` for every canonical setting.
pub fn predicted_probabilities(rho: &DensityMatrix) -> ProbabilitySet {
    let values = CANONICAL_SETTINGS.map(|s| projection_probability(rho, s));
    // Tr ρ = 1 exactly up to round-off, so the computational sum passes.
    ProbabilitySet { values }
}
