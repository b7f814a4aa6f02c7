use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternParams {
    /// Topological charge of the spiral pattern.
    pub l_prime: i32,
}

impl Default for PatternParams {
    fn default() -> Self {
        Self { l_prime: 1 }
    }
}

/// A phase profile evaluated at centered coordinates.
pub trait PhasePattern: Send + Sync {
    fn name(&self) -> &'static str;
    /// Unwrapped phase at `(dx, dy)` for grating period `period`.
    fn phase(&self, dx: f64, dy: f64, period: f64, params: &PatternParams) -> f64;
}

pub fn azimuth(dx: f64, dy: f64) -> f64 {
    dy.atan2(dx)
}

/// `2π · mod(dx / g, 1)`
pub fn grating_phase(dx: f64, period: f64) -> f64 {
    TAU * (dx / period).rem_euclid(1.0)
}

/// Unit step, 1 for non-negative arguments.
pub fn step(arg: f64) -> f64 {
    if arg >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `l′φ`, no grating.
pub struct Spiral;

impl PhasePattern for Spiral {
    fn name(&self) -> &'static str {
        "spiral"
    }

    fn phase(&self, dx: f64, dy: f64, _period: f64, params: &PatternParams) -> f64 {
        params.l_prime as f64 * azimuth(dx, dy)
    }
}

pub struct Blazed;

impl PhasePattern for Blazed {
    fn name(&self) -> &'static str {
        "blazed"
    }

    fn phase(&self, dx: f64, _dy: f64, period: f64, _params: &PatternParams) -> f64 {
        grating_phase(dx, period)
    }
}

/// `charge·φ` on the blazed grating (LH has charge −1, LV +1).
pub struct Vortex {
    pub name: &'static str,
    pub charge: i32,
}

impl PhasePattern for Vortex {
    fn name(&self) -> &'static str {
        self.name
    }

    fn phase(&self, dx: f64, dy: f64, period: f64, _params: &PatternParams) -> f64 {
        self.charge as f64 * azimuth(dx, dy) + grating_phase(dx, period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAxis {
    X,
    Y,
    Sum,
    Difference,
}

impl StepAxis {
    fn argument(self, dx: f64, dy: f64) -> f64 {
        match self {
            StepAxis::X => dx,
            StepAxis::Y => dy,
            StepAxis::Sum => dx + dy,
            StepAxis::Difference => dx - dy,
        }
    }
}

/// π phase step across a nodal line, on the blazed grating.
pub struct StepPattern {
    pub name: &'static str,
    pub axis: StepAxis,
}

impl PhasePattern for StepPattern {
    fn name(&self) -> &'static str {
        self.name
    }

    fn phase(&self, dx: f64, dy: f64, period: f64, _params: &PatternParams) -> f64 {
        PI * step(self.axis.argument(dx, dy)) + grating_phase(dx, period)
    }
}

/// Sign of `cos(φ + grating)` written as a {0, π} phase. The rotated
/// variant is evaluated at `(−dx, −dy)`.
pub struct DualOrder {
    pub rotated: bool,
}

impl PhasePattern for DualOrder {
    fn name(&self) -> &'static str {
        if self.rotated {
            "dual-rot"
        } else {
            "dual"
        }
    }

    fn phase(&self, dx: f64, dy: f64, period: f64, _params: &PatternParams) -> f64 {
        let (x, y) = if self.rotated { (-dx, -dy) } else { (dx, dy) };
        if (azimuth(x, y) + grating_phase(x, period)).cos() >= 0.0 {
            0.0
        } else {
            PI
        }
    }
}

/// Every pattern kind by its CLI name.
pub fn patterns() -> Registry<dyn PhasePattern> {
    let mut reg: Registry<dyn PhasePattern> = Registry::new("hologram kind");
    reg.register("spiral", Box::new(Spiral));
    reg.register("blazed", Box::new(Blazed));
    reg.register("lh", Box::new(Vortex { name: "lh", charge: -1 }));
    reg.register("lv", Box::new(Vortex { name: "lv", charge: 1 }));
    let steps = [
        ("ld", StepAxis::X),
        ("la", StepAxis::Y),
        ("ll", StepAxis::Sum),
        ("lr", StepAxis::Difference),
    ];
    for (name, axis) in steps {
        reg.register(name, Box::new(StepPattern { name, axis }));
    }
    reg.register("dual", Box::new(DualOrder { rotated: false }));
    reg.register("dual-rot", Box::new(DualOrder { rotated: true }));
    reg
}
