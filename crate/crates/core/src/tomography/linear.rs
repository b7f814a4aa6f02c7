use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::quantum::{DensityMatrix, MeasurementSetting, TwoQubitKet};

use super::{ProbabilitySet, CANONICAL_SETTINGS};

/// Hermitian basis element `k` of the 16-real-parameter expansion
/// `ρ = Σ_k x_k B_k`: four diagonal projectors, then for every `i < j`
/// the pair `E_ij + E_ji` (real part) and `i E_ji − i E_ij` (imaginary part
/// of `ρ_ji`).
fn basis_element(k: usize) -> Mat4 {
    let mut m = linalg::zeros::<4>();
    if k < 4 {
        m[k][k] = linalg::ONE;
        return m;
    }
    let (i, j) = OFF_DIAGONAL[(k - 4) / 2];
    if (k - 4) % 2 == 0 {
        m[i][j] = linalg::ONE;
        m[j][i] = linalg::ONE;
    } else {
        // lower entry ρ_ji = x + i y
        m[j][i] = linalg::I;
        m[i][j] = -linalg::I;
    }
    m
}

/// Upper-triangle index pairs (row < col).
const OFF_DIAGONAL: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn design_row(ket: &TwoQubitKet) -> Vec<f64> {
    (0..16)
        .map(|k| {
            let b = basis_element(k);
            let bv = linalg::matvec(&b, &ket.0);
            ket.inner(&TwoQubitKet(bv)).re
        })
        .collect()
}

/// `Some(k)` if `row` is exactly the unit vector `e_k`.
fn unit_column(row: &[f64]) -> Option<usize> {
    let mut hit = None;
    for (k, &v) in row.iter().enumerate() {
        if v == 1.0 && hit.is_none() {
            hit = Some(k);
        } else if v != 0.0 {
            return None;
        }
    }
    hit
}

fn assemble(x: &[f64]) -> Mat4 {
    let mut m = linalg::zeros::<4>();
    for (k, &xk) in x.iter().enumerate() {
        let b = basis_element(k);
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += b[i][j] * xk;
            }
        }
    }
    m
}

/// Direct inversion of the canonical sixteen probabilities.
///
/// Solves `⟨ψ_ν|ρ|ψ_ν⟩ = P_ν` for the Hermitian `ρ`. The unit trace comes
/// from the normalized computational quadruple. The result is not
/// projected onto the positive cone.
pub fn linear_inversion(probs: &ProbabilitySet) -> Result<DensityMatrix> {
    linear_inversion_for(&CANONICAL_SETTINGS, probs.values())
}

/// Inversion for an arbitrary list of settings. With more than sixteen
/// settings the normal equations are solved (least squares).
pub fn linear_inversion_for(
    settings: &[MeasurementSetting],
    values: &[f64],
) -> Result<DensityMatrix> {
    if settings.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} settings but {} probabilities",
            settings.len(),
            values.len()
        )));
    }
    if settings.len() < 16 {
        return Err(Error::SingularSystem);
    }
    let rows: Vec<Vec<f64>> = settings.iter().map(|s| design_row(&s.projector())).collect();

    let unit_rows: Vec<(usize, f64)> = rows
        .iter()
        .zip(values)
        .filter_map(|(row, &b)| unit_column(row).map(|k| (k, b)))
        .collect();

    let mut x = if rows.len() == 16 {
        linalg::solve_real(rows, values.to_vec())?
    } else {
        let mut ata = vec![vec![0.0; 16]; 16];
        let mut atb = vec![0.0; 16];
        for (row, &b) in rows.iter().zip(values) {
            for i in 0..16 {
                atb[i] += row[i] * b;
                for j in 0..16 {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
        linalg::solve_real(ata, atb)?
    };
    // A projector onto a computational basis state reads one population
    // directly; copy it rather than keep the elimination round-off.
    if settings.len() == 16 {
        for (k, b) in unit_rows {
            x[k] = b;
        }
    }
    let m = assemble(&x);
    let tr = linalg::trace(&m).re;
    if !(tr > 0.0) {
        return Err(Error::invalid(format!(
            "inverted matrix has non-positive trace {tr:.3e}"
        )));
    }
    if (tr - 1.0).abs() <= 1e-6 {
        DensityMatrix::from_matrix(m)
    } else {
        DensityMatrix::from_unnormalized(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::quantum::{bell_state, BellState, PhotonBasis};
    use crate::tomography::predicted_probabilities;

    #[test]
    fn basis_expansion_is_identity_map() {
        let rho = DensityMatrix::pure(&bell_state(BellState::PsiMinus));
        let m = rho.matrix();
        let mut x = vec![0.0; 16];
        for i in 0..4 {
            x[i] = m[i][i].re;
        }
        for (p, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            x[4 + 2 * p] = m[j][i].re;
            x[5 + 2 * p] = m[j][i].im;
        }
        let back = assemble(&x);
        assert!(linalg::max_abs(&linalg::sub(&back, m)) < 1e-15);
    }

    #[test]
    fn inverts_phi_plus() {
        let target = DensityMatrix::pure(&bell_state(BellState::PhiPlus));
        let rho = linear_inversion(&predicted_probabilities(&target)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i == 0 || i == 3) && (j == 0 || j == 3) {
                    0.5
                } else {
                    0.0
                };
                assert!((rho.entry(i, j) - C64::new(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn inverts_maximally_mixed() {
        let p = ProbabilitySet::new([0.25; 16]).unwrap();
        let rho = linear_inversion(&p).unwrap();
        assert!(rho.max_deviation(&DensityMatrix::maximally_mixed()) < 1e-12);
        assert_eq!(rho.entry(0, 0).re, 0.25);
    }

    #[test]
    fn rank_deficient_settings_are_rejected() {
        let hh = MeasurementSetting::new(PhotonBasis::H, PhotonBasis::H);
        let settings = [hh; 16];
        assert!(matches!(
            linear_inversion_for(&settings, &[0.1; 16]),
            Err(Error::SingularSystem)
        ));
        assert!(linear_inversion_for(&settings[..4], &[0.25; 4]).is_err());
    }

    #[test]
    fn overcomplete_settings_use_least_squares() {
        let target = DensityMatrix::pure(&bell_state(BellState::PsiPlus));
        let mut settings = Vec::new();
        for a in PhotonBasis::ALL {
            for b in PhotonBasis::ALL {
                settings.push(MeasurementSetting::new(a, b));
            }
        }
        let values: Vec<f64> = settings
            .iter()
            .map(|s| crate::quantum::projection_probability(&target, *s))
            .collect();
        let rho = linear_inversion_for(&settings, &values).unwrap();
        assert!(rho.max_deviation(&target) < 1e-12);
    }
}
