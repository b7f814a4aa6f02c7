//! OAM biphoton state and its mapping onto polarization.
//!
//! The chain is: counter-propagating SFWM state, fork-hologram diffraction
//! into the ±1 orders of each photon, Gaussian-mode (l = 0) filtering, then
//! recombination of the two orders on a PBS with the −1 order rotated to V.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quantum::{bell_state, BellState, TwoQubitKet};

pub const DEFAULT_L_MAX: i32 = 4;

/// Amplitude kept by each diffraction order of each photon.
pub const ORDER_AMPLITUDE: f64 = 0.5;

/// Sparse biphoton ket over `(l_s, l_as)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OAMBiphotonKet {
    pub amplitudes: BTreeMap<(i32, i32), C64>,
    pub l_max: i32,
}

impl OAMBiphotonKet {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, l_s: i32, l_as: i32) -> C64 {
        self.amplitudes.get(&(l_s, l_as)).copied().unwrap_or_default()
    }
}

/// Key of a diffracted component: `(l_s, l_as, order_s, order_as)`.
pub type PathKey = (i32, i32, i8, i8);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathLabeledKet {
    pub amplitudes: BTreeMap<PathKey, C64>,
}

impl PathLabeledKet {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Total squared amplitude on one order pair.
    pub fn path_weight(&self, order_s: i8, order_as: i8) -> f64 {
        self.amplitudes
            .iter()
            .filter(|(k, _)| k.2 == order_s && k.3 == order_as)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Orientation of the anti-Stokes hologram. A 180° turn reverses the OAM
/// shift of every order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Upright,
    Rotated,
}

impl Orientation {
    pub fn from_flag(rotated: bool) -> Self {
        if rotated {
            Orientation::Rotated
        } else {
            Orientation::Upright
        }
    }

    pub fn rotate_180(self) -> Self {
        match self {
            Orientation::Upright => Orientation::Rotated,
            Orientation::Rotated => Orientation::Upright,
        }
    }

    fn sign(self) -> i32 {
        match self {
            Orientation::Upright => 1,
            Orientation::Rotated => -1,
        }
    }
}

/// The EPM phase `theta` sits on the Stokes −1 order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceConfig {
    #[serde(rename = "theta_rad", default)]
    pub theta: f64,
    #[serde(rename = "rotated", default)]
    pub anti_stokes_rotated: bool,
}

impl InterfaceConfig {
    pub fn new(theta: f64, anti_stokes_rotated: bool) -> Result<Self> {
        let c = Self {
            theta,
            anti_stokes_rotated,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationKet {
    /// Normalized output in the (HH, HV, VH, VV) basis.
    pub ket: TwoQubitKet,
    /// Squared norm that survived diffraction and filtering.
    pub success_weight: f64,
}

/// `c₀|0,0⟩ + Σ c_l (|l,l⟩ + |−l,−l⟩)`, normalized.
pub fn sfwm_state(c: &BTreeMap<u32, f64>, l_max: i32) -> Result<OAMBiphotonKet> {
    if l_max < 0 {
        return Err(Error::invalid("l_max must be non-negative"));
    }
    let mut amplitudes = BTreeMap::new();
    for (&l, &cl) in c {
        if !cl.is_finite() {
            return Err(Error::invalid(format!("coefficient c_{l} is not finite")));
        }
        if l as i64 > l_max as i64 {
            return Err(Error::invalid(format!("coefficient c_{l} exceeds l_max = {l_max}")));
        }
        if cl == 0.0 {
            continue;
        }
        let l = l as i32;
        amplitudes.insert((l, l), Complex64::new(cl, 0.0));
        if l != 0 {
            amplitudes.insert((-l, -l), Complex64::new(cl, 0.0));
        }
    }
    let norm = amplitudes.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::AllZeroCoefficients);
    }
    for a in amplitudes.values_mut() {
        *a /= norm;
    }
    Ok(OAMBiphotonKet { amplitudes, l_max })
}

/// Splits every component into the four order pairs. Order `n` shifts the
/// Stokes index by `n` and the anti-Stokes index by `±n` depending on the
/// anti-Stokes hologram orientation.
pub fn fork_diffract(ket: &OAMBiphotonKet, orientation: Orientation) -> PathLabeledKet {
    let bound = ket.l_max + 2;
    let s = orientation.sign();
    let mut out = PathLabeledKet::default();
    for (&(ls, las), &a) in &ket.amplitudes {
        for os in [1i8, -1] {
            for oas in [1i8, -1] {
                let key = (ls + os as i32, las + s * oas as i32, os, oas);
                if key.0.abs() > bound || key.1.abs() > bound {
                    continue;
                }
                *out.amplitudes.entry(key).or_default() += a * ORDER_AMPLITUDE;
            }
        }
    }
    out
}

/// Keeps only `l_s = l_as = 0` components; the surviving weight is not
/// renormalized.
pub fn etalon_filter(ket: &PathLabeledKet) -> PathLabeledKet {
    PathLabeledKet {
        amplitudes: ket
            .amplitudes
            .iter()
            .filter(|(k, _)| k.0 == 0 && k.1 == 0)
            .map(|(k, a)| (*k, *a))
            .collect(),
    }
}

fn order_to_bit(order: i8) -> usize {
    // +1 order keeps H; the HWP turns the −1 order into V
    if order > 0 {
        0
    } else {
        1
    }
}

pub fn map_to_polarization(ket: &PathLabeledKet, config: &InterfaceConfig) -> Result<PolarizationKet> {
    config.validate()?;
    if let Some(k) = ket.amplitudes.keys().find(|k| k.0 != 0 || k.1 != 0) {
        return Err(Error::invalid(format!(
            "component with l_s = {}, l_as = {} reached the PBS; filter to l = 0 first",
            k.0, k.1
        )));
    }
    let epm = Complex64::from_polar(1.0, config.theta);
    let mut amps = [C64::default(); 4];
    for (&(_, _, os, oas), &a) in &ket.amplitudes {
        let phase = if os < 0 { epm } else { Complex64::new(1.0, 0.0) };
        amps[2 * order_to_bit(os) + order_to_bit(oas)] += a * phase;
    }
    let raw = TwoQubitKet::new(amps);
    let success_weight = raw.norm_sqr();
    if success_weight == 0.0 {
        return Err(Error::EmptyState);
    }
    Ok(PolarizationKet {
        ket: raw.normalized()?,
        success_weight,
    })
}

/// Full chain from SFWM coefficients to the output polarization ket.
pub fn run_chain(c: &BTreeMap<u32, f64>, config: &InterfaceConfig) -> Result<PolarizationKet> {
    let l_max = c.keys().map(|&l| l as i32).max().unwrap_or(0).max(DEFAULT_L_MAX);
    let state = sfwm_state(c, l_max)?;
    let diffracted = fork_diffract(&state, Orientation::from_flag(config.anti_stokes_rotated));
    map_to_polarization(&etalon_filter(&diffracted), config)
}

/// `|⟨target|output⟩|²` for the full chain.
pub fn bell_fidelity_of_chain(c: &BTreeMap<u32, f64>, config: &InterfaceConfig, target: BellState) -> Result<f64> {
    let out = run_chain(c, config)?;
    Ok(bell_state(target).inner(&out.ket).norm_sqr())
}

/// Chain configuration file: `{ "c": {"0": 0.0, "1": 1.0}, "rotated": false, "theta_rad": 0.0 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub c: BTreeMap<u32, f64>,
    #[serde(default)]
    pub rotated: bool,
    #[serde(default)]
    pub theta_rad: f64,
}

impl ChainConfig {
    pub fn interface(&self) -> Result<InterfaceConfig> {
        InterfaceConfig::new(self.theta_rad, self.rotated)
    }

    pub fn run(&self) -> Result<PolarizationKet> {
        run_chain(&self.c, &self.interface()?)
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            c: BTreeMap::from([(0, 0.0), (1, 1.0)]),
            rotated: false,
            theta_rad: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn coeffs(pairs: &[(u32, f64)]) -> BTreeMap<u32, f64> {
        pairs.iter().copied().collect()
    }

    fn close(a: C64, b: f64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn sfwm_examples() {
        let k = sfwm_state(&coeffs(&[(0, 0.0), (1, 1.0)]), 4).unwrap();
        assert_eq!(k.amplitudes.len(), 2);
        assert!(close(k.amplitude(1, 1), FRAC_1_SQRT_2) && close(k.amplitude(-1, -1), FRAC_1_SQRT_2));

        let k = sfwm_state(&coeffs(&[(0, 1.0)]), 4).unwrap();
        assert_eq!(k.amplitudes.len(), 1);
        assert!(close(k.amplitude(0, 0), 1.0));

        let k = sfwm_state(&coeffs(&[(0, 1.0), (1, 1.0)]), 4).unwrap();
        let third = 1.0 / 3f64.sqrt();
        for key in [(0, 0), (1, 1), (-1, -1)] {
            assert!(close(k.amplitude(key.0, key.1), third));
        }

        assert!(matches!(
            sfwm_state(&coeffs(&[(0, 0.0), (1, 0.0)]), 4),
            Err(Error::AllZeroCoefficients)
        ));
        assert!(sfwm_state(&coeffs(&[(5, 1.0)]), 4).is_err());
    }

    fn single(ls: i32, las: i32) -> OAMBiphotonKet {
        OAMBiphotonKet {
            amplitudes: BTreeMap::from([((ls, las), Complex64::new(1.0, 0.0))]),
            l_max: 4,
        }
    }

    #[test]
    fn diffraction_shifts() {
        let up = fork_diffract(&single(1, 1), Orientation::Upright);
        assert!(close(up.amplitudes[&(2, 2, 1, 1)], 0.5));
        let up = fork_diffract(&single(-1, -1), Orientation::Upright);
        assert!(close(up.amplitudes[&(0, 0, 1, 1)], 0.5));
        let rot = fork_diffract(&single(1, 1), Orientation::Rotated);
        assert!(close(rot.amplitudes[&(2, 0, 1, 1)], 0.5));
        assert_eq!(up.amplitudes.len(), 4);
    }

    #[test]
    fn filtering_keeps_expected_paths() {
        let k = sfwm_state(&coeffs(&[(1, 1.0)]), 4).unwrap();
        let f = etalon_filter(&fork_diffract(&k, Orientation::Upright));
        let keys: Vec<_> = f.amplitudes.keys().copied().collect();
        assert_eq!(keys, vec![(0, 0, -1, -1), (0, 0, 1, 1)]);
        assert_eq!(f.path_weight(1, -1), 0.0);
        assert_eq!(f.path_weight(-1, 1), 0.0);

        let f = etalon_filter(&fork_diffract(&k, Orientation::Rotated));
        let keys: Vec<_> = f.amplitudes.keys().copied().collect();
        assert_eq!(keys, vec![(0, 0, -1, 1), (0, 0, 1, -1)]);

        let f = etalon_filter(&fork_diffract(&single(0, 0), Orientation::Upright));
        assert!(f.is_empty());
    }

    #[test]
    fn chain_truth_table() {
        let c = coeffs(&[(0, 0.0), (1, 1.0)]);
        let table = [
            (false, 0.0, BellState::PhiPlus),
            (false, PI, BellState::PhiMinus),
            (true, 0.0, BellState::PsiPlus),
            (true, PI, BellState::PsiMinus),
        ];
        for (rotated, theta, target) in table {
            let cfg = InterfaceConfig::new(theta, rotated).unwrap();
            for other in BellState::ALL {
                let f = bell_fidelity_of_chain(&c, &cfg, other).unwrap();
                let expected = if other == target { 1.0 } else { 0.0 };
                assert!((f - expected).abs() < 1e-12, "{rotated} {theta} {other}: {f}");
            }
        }
    }

    #[test]
    fn empty_chain_is_an_error() {
        let cfg = InterfaceConfig::new(0.0, false).unwrap();
        assert!(matches!(
            bell_fidelity_of_chain(&coeffs(&[(0, 1.0), (1, 0.0)]), &cfg, BellState::PhiPlus),
            Err(Error::EmptyState)
        ));
        assert!(matches!(
            map_to_polarization(&PathLabeledKet::default(), &cfg),
            Err(Error::EmptyState)
        ));
    }

    #[test]
    fn success_weights() {
        let cfg = InterfaceConfig::new(0.0, false).unwrap();
        let w = run_chain(&coeffs(&[(1, 1.0)]), &cfg).unwrap().success_weight;
        assert!((w - 0.25).abs() < 1e-15);
        let w = run_chain(&coeffs(&[(0, 1.0), (1, 1.0)]), &cfg).unwrap().success_weight;
        assert!((w - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn orientation_involution() {
        let k = sfwm_state(&coeffs(&[(0, 0.3), (1, 0.8), (2, 0.5)]), 4).unwrap();
        let o = Orientation::Upright;
        assert_eq!(o.rotate_180().rotate_180(), o);
        assert_eq!(
            fork_diffract(&k, o.rotate_180().rotate_180()),
            fork_diffract(&k, Orientation::Upright)
        );
    }

    #[test]
    fn chain_config_json() {
        let text = r#"{ "c": {"0": 0.0, "1": 1.0}, "rotated": true, "theta_rad": 3.141592653589793 }"#;
        let cfg: ChainConfig = serde_json::from_str(text).unwrap();
        let out = cfg.run().unwrap();
        let f = bell_state(BellState::PsiMinus).inner(&out.ket).norm_sqr();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(serde_json::from_str::<ChainConfig>(r#"{ "c": {"x": 1.0} }"#).is_err());
    }
}
