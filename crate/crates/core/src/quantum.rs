//! Two-qubit states in the `{HH, HV, VH, VV}` basis.
//!
//! The same algebra serves the polarization qubits and the OAM qubits
//! (`|l=+1⟩ ↔ H`, `|l=-1⟩ ↔ V`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat4, C64, I, ONE, ZERO};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-photon projection basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhotonBasis {
    H,
    V,
    D,
    A,
    L,
    R,
}

impl PhotonBasis {
    pub const ALL: [PhotonBasis; 6] = [
        PhotonBasis::H,
        PhotonBasis::V,
        PhotonBasis::D,
        PhotonBasis::A,
        PhotonBasis::L,
        PhotonBasis::R,
    ];

    /// Components in the `{H, V}` basis.
    pub fn ket(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            PhotonBasis::H => [ONE, ZERO],
            PhotonBasis::V => [ZERO, ONE],
            PhotonBasis::D => [C64::new(s, 0.0), C64::new(s, 0.0)],
            PhotonBasis::A => [C64::new(s, 0.0), C64::new(-s, 0.0)],
            PhotonBasis::L => [C64::new(s, 0.0), C64::new(0.0, s)],
            PhotonBasis::R => [C64::new(s, 0.0), C64::new(0.0, -s)],
        }
    }

    pub fn label(self) -> char {
        match self {
            PhotonBasis::H => 'H',
            PhotonBasis::V => 'V',
            PhotonBasis::D => 'D',
            PhotonBasis::A => 'A',
            PhotonBasis::L => 'L',
            PhotonBasis::R => 'R',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        Some(match c.to_ascii_uppercase() {
            'H' => PhotonBasis::H,
            'V' => PhotonBasis::V,
            'D' => PhotonBasis::D,
            'A' => PhotonBasis::A,
            'L' => PhotonBasis::L,
            'R' => PhotonBasis::R,
            _ => return None,
        })
    }
}

/// Joint projection: one basis state per photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting {
    pub stokes: PhotonBasis,
    pub anti_stokes: PhotonBasis,
}

impl MeasurementSetting {
    pub const fn new(stokes: PhotonBasis, anti_stokes: PhotonBasis) -> Self {
        Self {
            stokes,
            anti_stokes,
        }
    }

    /// `ket(stokes) ⊗ ket(anti_stokes)`.
    pub fn projector(self) -> TwoQubitKet {
        let a = self.stokes.ket();
        let b = self.anti_stokes.ket();
        TwoQubitKet([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn name(self) -> String {
        format!("{}{}", self.stokes.label(), self.anti_stokes.label())
    }
}

pub fn joint_projector(setting: MeasurementSetting) -> TwoQubitKet {
    setting.projector()
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.stokes.label(), self.anti_stokes.label())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => match (PhotonBasis::from_label(a), PhotonBasis::from_label(b)) {
                (Some(a), Some(b)) => Ok(Self::new(a, b)),
                _ => Err(Error::invalid(format!("unknown measurement setting '{s}'"))),
            },
            _ => Err(Error::invalid(format!(
                "measurement setting must be two letters from HVDALR, got '{s}'"
            ))),
        }
    }
}

impl Serialize for MeasurementSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MeasurementSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Pure two-qubit state, amplitudes ordered `(HH, HV, VH, VV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitKet(pub [C64; 4]);

impl TwoQubitKet {
    pub fn new(amplitudes: [C64; 4]) -> Self {
        Self(amplitudes)
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite ket"));
        }
        Ok(Self(self.0.map(|z| z / n)))
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &TwoQubitKet) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let p = C64::from_polar(1.0, phase);
        Self(self.0.map(|z| z * p))
    }

    /// Product state `a ⊗ b` of two single-qubit kets.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Self {
        Self([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }
}

/// The four maximally entangled Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn ket(self) -> TwoQubitKet {
        bell_state(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellState::PhiPlus => "Φ+",
            BellState::PhiMinus => "Φ−",
            BellState::PsiPlus => "Ψ+",
            BellState::PsiMinus => "Ψ−",
        };
        f.write_str(s)
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" | "φ+" => Ok(BellState::PhiPlus),
            "phi-" | "phiminus" | "φ-" | "φ−" => Ok(BellState::PhiMinus),
            "psi+" | "psiplus" | "ψ+" => Ok(BellState::PsiPlus),
            "psi-" | "psiminus" | "ψ-" | "ψ−" => Ok(BellState::PsiMinus),
            _ => Err(Error::invalid(format!(
                "unknown Bell state '{s}' (expected phi+, phi-, psi+ or psi-)"
            ))),
        }
    }
}

pub fn bell_state(kind: BellState) -> TwoQubitKet {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        BellState::PhiPlus => TwoQubitKet([s, ZERO, ZERO, s]),
        BellState::PhiMinus => TwoQubitKet([s, ZERO, ZERO, -s]),
        BellState::PsiPlus => TwoQubitKet([ZERO, s, s, ZERO]),
        BellState::PsiMinus => TwoQubitKet([ZERO, s, -s, ZERO]),
    }
}

/// Hermitian, unit-trace 4×4 operator.
///
/// Positivity is not enforced: linear-inversion estimates may carry small
/// negative eigenvalues. Use [`DensityMatrix::is_physical`] to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl DensityMatrix {
    /// Accepts a matrix whose trace is within `1e-6` of one and that is
    /// Hermitian to `1e-9`; the result is exactly Hermitian and rescaled to
    /// unit trace.
    pub fn from_matrix(m: Mat4) -> Result<Self> {
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "density matrix trace must be 1, got {:.6}{:+.6}i",
                tr.re, tr.im
            )));
        }
        Self::from_unnormalized(m)
    }

    /// Hermitizes and divides by the trace, which must be positive.
    pub fn from_unnormalized(m: Mat4) -> Result<Self> {
        if m.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        let defect = linalg::hermiticity_defect(&m);
        if defect > 1e-9 * linalg::max_abs(&m).max(1.0) {
            return Err(Error::NonHermitianInput { deviation: defect });
        }
        let h = linalg::hermitize(&m);
        let tr = linalg::trace(&h).re;
        if !(tr > 0.0) {
            return Err(Error::invalid(format!(
                "density matrix trace must be positive, got {tr:.3e}"
            )));
        }
        if (tr - 1.0).abs() <= 1e-12 {
            return Ok(Self { m: h });
        }
        Ok(Self {
            m: linalg::scale(&h, 1.0 / tr),
        })
    }

    pub fn pure(ket: &TwoQubitKet) -> Self {
        let n = ket.norm_sqr();
        let m = linalg::outer(&ket.0, &ket.0);
        Self {
            m: linalg::hermitize(&linalg::scale(&m, 1.0 / n)),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: linalg::scale(&linalg::identity::<4>(), 0.25),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.m).re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        linalg::eigh(&self.m).values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `min eigenvalue ≥ −tol` and `|Tr ρ − 1| ≤ tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        is_physical(self, tol)
    }

    /// Largest entry-wise deviation from `other`.
    pub fn max_deviation(&self, other: &DensityMatrix) -> f64 {
        linalg::max_abs(&linalg::sub(&self.m, &other.m))
    }

    /// `⟨ψ|ρ|ψ⟩` for an arbitrary (not necessarily normalized) ket.
    pub fn expectation(&self, ket: &TwoQubitKet) -> f64 {
        let mv = linalg::matvec(&self.m, &ket.0);
        ket.inner(&TwoQubitKet(mv)).re
    }

    /// Clips negative eigenvalues to zero and renormalizes.
    pub fn nearest_psd(&self) -> Result<Self> {
        let e = linalg::eigh(&self.m);
        let clipped = e.reconstruct_with(|x| x.max(0.0));
        Self::from_unnormalized(clipped)
    }
}

pub fn projection_probability(rho: &DensityMatrix, setting: MeasurementSetting) -> f64 {
    rho.expectation(&setting.projector())
}

/// `F = [Tr √(√σ ρ √σ)]²`, with `σ = rho_tar`.
pub fn fidelity(rho_exp: &DensityMatrix, rho_tar: &DensityMatrix) -> Result<f64> {
    let root_tar = linalg::hermitian_sqrt(rho_tar.matrix())?;
    let inner = linalg::matmul(&linalg::matmul(&root_tar, rho_exp.matrix()), &root_tar);
    let root = linalg::hermitian_sqrt(&linalg::hermitize(&inner))?;
    let tr = linalg::trace(&root).re;
    Ok(tr * tr)
}

/// Fidelity to a pure target, `⟨ψ|ρ|ψ⟩`.
pub fn pure_fidelity(rho: &DensityMatrix, target: &TwoQubitKet) -> f64 {
    rho.expectation(target) / target.norm_sqr()
}

pub fn pauli(axis: usize) -> CMat<2> {
    match axis {
        0 => [[ZERO, ONE], [ONE, ZERO]],
        1 => [[ZERO, -I], [I, ZERO]],
        2 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("Pauli axis must be 0, 1 or 2"),
    }
}

/// Correlation tensor `T_mn = Tr[ρ (σ_m ⊗ σ_n)]`, m, n ∈ {x, y, z}.
pub fn correlation_tensor(rho: &DensityMatrix) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for (m, row) in t.iter_mut().enumerate() {
        for (n, entry) in row.iter_mut().enumerate() {
            let op = linalg::kron2(&pauli(m), &pauli(n));
            *entry = linalg::trace(&linalg::matmul(rho.matrix(), &op)).re;
        }
    }
    t
}

/// Maximal CHSH value over all local measurement directions:
/// `S = 2√(m₁ + m₂)` with `m₁ ≥ m₂` the two largest eigenvalues of `TᵀT`.
pub fn chsh_max(rho: &DensityMatrix) -> f64 {
    let t = correlation_tensor(rho);
    let mut tt = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let s: f64 = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            tt[i][j] = C64::new(s, 0.0);
        }
    }
    let e = linalg::eigh(&tt);
    let sum = (e.values[1] + e.values[2]).max(0.0);
    2.0 * sum.sqrt()
}

pub fn is_physical(rho: &DensityMatrix, tol: f64) -> bool {
    rho.min_eigenvalue() >= -tol && (rho.trace() - 1.0).abs() <= tol
}

/// Depolarizing channel `q ρ + (1 − q) I/4`.
pub fn depolarize(rho: &DensityMatrix, keep: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&keep) {
        return Err(Error::invalid(format!(
            "depolarizing weight must lie in [0, 1], got {keep}"
        )));
    }
    let mixed = DensityMatrix::maximally_mixed();
    let mut m = linalg::scale(rho.matrix(), keep);
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += mixed.m[i][j] * (1.0 - keep);
        }
    }
    DensityMatrix::from_unnormalized(m)
}

/// JSON wire format: `{ "re": [[..]], "im": [[..]] }`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl From<&DensityMatrix> for DensityMatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = rho.m[i][j].re;
                im[i][j] = rho.m[i][j].im;
            }
        }
        Self { re, im }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let mut m = linalg::zeros::<4>();
        for i in 0..4 {
            for k in 0..4 {
                m[i][k] = C64::new(j.re[i][k], j.im[i][k]);
            }
        }
        DensityMatrix::from_matrix(m)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DensityMatrixJson::deserialize(d)?;
        DensityMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}
