//! SLM phase masks: spiral phase, blazed grating, the six OAM tomography
//! holograms and the binarized dual-order fork grating.
//!
//! Coordinates are Cartesian with y pointing up. Pixel `(col, row)` (row 0
//! at the top) is sampled at its center, `dx = col + ½ − cx` and
//! `dy = (height − row − ½) − cy`. The azimuth is `atan2(dy, dx)`.

mod export;
mod fourier;
mod patterns;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::PhotonBasis;

pub use export::{export_mask, read_pgm, write_pgm, write_png, MaskFormat};
pub use fourier::fourier_order_coefficients;
pub use patterns::{
    azimuth, grating_phase, patterns, step, Blazed, DualOrder, PatternParams, PhasePattern, Spiral, StepAxis,
    StepPattern, Vortex,
};

/// Raster geometry and grating period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub period: f64,
    pub width: usize,
    pub height: usize,
    pub center: (f64, f64),
}

impl Default for GratingSpec {
    fn default() -> Self {
        Self::centered(1080, 1080, 16.0)
    }
}

impl GratingSpec {
    /// Grid with the azimuthal origin at its geometric middle.
    pub fn centered(width: usize, height: usize, period: f64) -> Self {
        Self {
            period,
            width,
            height,
            center: (width as f64 / 2.0, height as f64 / 2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period >= 2.0) || !self.period.is_finite() {
            return Err(Error::invalid(format!(
                "grating period must be at least 2 px, got {}",
                self.period
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("mask dimensions must be positive"));
        }
        if !(self.center.0.is_finite() && self.center.1.is_finite()) {
            return Err(Error::invalid("mask center must be finite"));
        }
        Ok(())
    }

    /// Centered coordinates of the middle of pixel `(col, row)`.
    pub fn offset(&self, col: usize, row: usize) -> (f64, f64) {
        (
            col as f64 + 0.5 - self.center.0,
            (self.height - row) as f64 - 0.5 - self.center.1,
        )
    }
}

/// Wraps into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Row-major grid of phases in `[0, 2π)`, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    width: usize,
    height: usize,
    center: (f64, f64),
    phase: Vec<f64>,
}

impl PhaseMask {
    /// Wraps every value; `phase.len()` must be `width × height`.
    pub fn new(width: usize, height: usize, center: (f64, f64), phase: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || phase.len() != width * height {
            return Err(Error::invalid(format!(
                "{} phase values do not fill a {width}x{height} mask",
                phase.len()
            )));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("phase values must be finite"));
        }
        Ok(Self {
            width,
            height,
            center,
            phase: phase.into_iter().map(wrap_phase).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn phases(&self) -> &[f64] {
        &self.phase
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.phase[row * self.width + col]
    }

    /// Pixel grid turned by 180° about the grid middle.
    pub fn rotate_180(&self) -> Self {
        let mut phase = self.phase.clone();
        phase.reverse();
        Self {
            phase,
            center: (
                self.width as f64 - self.center.0,
                self.height as f64 - self.center.1,
            ),
            ..*self
        }
    }

    /// 8-bit gray levels, `floor(phase / 2π × 256)` clamped to 255.
    pub fn quantize(&self) -> Vec<u8> {
        self.phase.iter().map(|&p| quantize_phase(p)).collect()
    }
}

pub fn quantize_phase(phase: f64) -> u8 {
    (phase / TAU * 256.0).floor().clamp(0.0, 255.0) as u8
}

/// Samples `pattern` at every pixel center, rows in parallel.
pub fn render(pattern: &dyn PhasePattern, params: &PatternParams, spec: &GratingSpec) -> Result<PhaseMask> {
    spec.validate()?;
    let mut phase = vec![0.0; spec.width * spec.height];
    phase.par_chunks_mut(spec.width).enumerate().for_each(|(row, line)| {
        for (col, out) in line.iter_mut().enumerate() {
            let (dx, dy) = spec.offset(col, row);
            *out = wrap_phase(pattern.phase(dx, dy, spec.period, params));
        }
    });
    PhaseMask::new(spec.width, spec.height, spec.center, phase)
}

pub fn spiral_phase(l_prime: i32, spec: &GratingSpec) -> Result<PhaseMask> {
    render(&Spiral, &PatternParams { l_prime }, spec)
}

pub fn blazed_grating(spec: &GratingSpec) -> Result<PhaseMask> {
    render(&Blazed, &PatternParams::default(), spec)
}

pub fn dual_order_pattern(spec: &GratingSpec, rotated: bool) -> Result<PhaseMask> {
    render(&DualOrder { rotated }, &PatternParams::default(), spec)
}

/// Registry name of the hologram projecting onto a single-photon basis.
pub fn tomography_kind(basis: PhotonBasis) -> &'static str {
    match basis {
        PhotonBasis::H => "lh",
        PhotonBasis::V => "lv",
        PhotonBasis::D => "ld",
        PhotonBasis::A => "la",
        PhotonBasis::L => "ll",
        PhotonBasis::R => "lr",
    }
}

pub fn tomography_pattern(basis: PhotonBasis, spec: &GratingSpec) -> Result<PhaseMask> {
    let registry = patterns();
    render(registry.get(tomography_kind(basis))?, &PatternParams::default(), spec)
}
