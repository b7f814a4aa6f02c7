//! Oracles shared by the integration tests. Everything here is written
//! from the textbook definitions, independent of the library internals.
#![allow(dead_code)]

use biphoton_core::linalg::{Mat4, C64};
use biphoton_core::{DensityMatrix, TwoQubitKet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre ensemble: `G G† / Tr(G G†)` with `rank` columns.
pub fn random_density(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix {
    let g: Vec<[C64; 4]> = (0..rank)
        .map(|_| std::array::from_fn(|_| complex_normal(rng)))
        .collect();
    let mut m: Mat4 = [[C64::default(); 4]; 4];
    for col in &g {
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += col[i] * col[j].conj();
            }
        }
    }
    let tr: f64 = (0..4).map(|i| m[i][i].re).sum();
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v /= tr;
        }
    }
    for i in 0..4 {
        m[i][i].im = 0.0;
        for j in 0..i {
            m[j][i] = m[i][j].conj();
        }
    }
    DensityMatrix::from_matrix(m).expect("Ginibre state is Hermitian with unit trace")
}

pub fn random_ket(rng: &mut ChaCha8Rng) -> TwoQubitKet {
    let a: [C64; 4] = std::array::from_fn(|_| complex_normal(rng));
    let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    TwoQubitKet::new(a.map(|z| z / n))
}

/// Single-photon kets by label, straight from their definitions.
pub fn single(label: char) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        'H' => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        'V' => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        'D' => [C64::new(s, 0.0), C64::new(s, 0.0)],
        'A' => [C64::new(s, 0.0), C64::new(-s, 0.0)],
        'L' => [C64::new(s, 0.0), C64::new(0.0, s)],
        'R' => [C64::new(s, 0.0), C64::new(0.0, -s)],
        _ => panic!("unknown label {label}"),
    }
}

pub fn joint(name: &str) -> [C64; 4] {
    let mut c = name.chars();
    let a = single(c.next().unwrap());
    let b = single(c.next().unwrap());
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// `⟨ψ|ρ|ψ⟩` by explicit summation.
pub fn expectation(rho: &DensityMatrix, psi: &[C64; 4]) -> f64 {
    let mut acc = C64::default();
    for i in 0..4 {
        for j in 0..4 {
            acc += psi[i].conj() * rho.entry(i, j) * psi[j];
        }
    }
    acc.re
}

pub const CANONICAL: [&str; 16] = [
    "HH", "HV", "VH", "VV", "HD", "HL", "VD", "VL", "DH", "LH", "DV", "LV", "DD", "LR", "RA", "AR",
];

pub fn probabilities(rho: &DensityMatrix) -> [f64; 16] {
    std::array::from_fn(|k| expectation(rho, &joint(CANONICAL[k])))
}

pub fn bell(name: &str) -> [C64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b, c, d) = match name {
        "phi+" => (s, 0.0, 0.0, s),
        "phi-" => (s, 0.0, 0.0, -s),
        "psi+" => (0.0, s, s, 0.0),
        "psi-" => (0.0, s, -s, 0.0),
        _ => panic!("unknown Bell state {name}"),
    };
    [a, b, c, d].map(|x| C64::new(x, 0.0))
}

/// Winding count of a wrapped phase along a closed loop of samples.
pub fn winding_number(samples: &[f64]) -> i64 {
    use std::f64::consts::{PI, TAU};
    let mut total = 0.0;
    for i in 0..samples.len() {
        let mut d = samples[(i + 1) % samples.len()] - samples[i];
        if d > PI {
            d -= TAU;
        } else if d < -PI {
            d += TAU;
        }
        total += d;
    }
    (total / TAU).round() as i64
}
