//! Dense linear algebra for the small matrices used throughout the crate.
//!
//! Matrices are plain row-major arrays. Dimensions are compile-time
//! constants (2, 3, 4 or 16), so nothing here allocates.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat<const N: usize> = [[C64; N]; N];
pub type Mat4 = CMat<4>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below
/// this fraction of `max(1, ||A||_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in `[-SQRT_CLAMP, 0)` are treated as round-off and clamped
/// to zero by [`hermitian_sqrt`]; anything lower is rejected.
pub const SQRT_CLAMP: f64 = 1e-6;

/// Eigenvalues with magnitude below this are set to exactly zero before
/// taking square roots, so that round-off of order 1e-17 does not become
/// 1e-8 after the root.
const SQRT_ZERO_CUTOFF: f64 = 1e-14;

pub fn zeros<const N: usize>() -> CMat<N> {
    [[ZERO; N]; N]
}

pub fn identity<const N: usize>() -> CMat<N> {
    let mut m = zeros::<N>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn matmul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for j in 0..N {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn trace<const N: usize>(a: &CMat<N>) -> C64 {
    (0..N).map(|i| a[i][i]).sum()
}

pub fn sub<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn scale<const N: usize>(a: &CMat<N>, s: f64) -> CMat<N> {
    let mut out = *a;
    for row in out.iter_mut() {
        for z in row.iter_mut() {
            *z *= s;
        }
    }
    out
}

/// Largest entry magnitude.
pub fn max_abs<const N: usize>(a: &CMat<N>) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn frobenius<const N: usize>(a: &CMat<N>) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// max |A_ij - conj(A_ji)|
pub fn hermiticity_defect<const N: usize>(a: &CMat<N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((a[i][j] - a[j][i].conj()).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`, with an exactly real diagonal.
pub fn hermitize<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        out[i][i] = C64::new(a[i][i].re, 0.0);
        for j in (i + 1)..N {
            let z = (a[i][j] + a[j][i].conj()) * 0.5;
            out[i][j] = z;
            out[j][i] = z.conj();
        }
    }
    out
}

pub fn outer<const N: usize>(u: &[C64; N], v: &[C64; N]) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = u[i] * v[j].conj();
        }
    }
    out
}

pub fn matvec<const N: usize>(a: &CMat<N>, v: &[C64; N]) -> [C64; N] {
    let mut out = [ZERO; N];
    for i in 0..N {
        out[i] = (0..N).map(|j| a[i][j] * v[j]).sum();
    }
    out
}

/// Kronecker product of two 2×2 matrices.
pub fn kron2(a: &CMat<2>, b: &CMat<2>) -> Mat4 {
    let mut out = zeros::<4>();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// `values` are ascending; column `k` of `vectors` (i.e. `vectors[i][k]`)
/// is the unit eigenvector belonging to `values[k]`.
#[derive(Debug, Clone, Copy)]
pub struct Eigh<const N: usize> {
    pub values: [f64; N],
    pub vectors: CMat<N>,
    pub sweeps: usize,
}

impl<const N: usize> Eigh<N> {
    /// Rebuilds `V diag(f(λ)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat<N> {
        let mut out = zeros::<N>();
        for k in 0..N {
            let w = f(self.values[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..N {
                let vik = self.vectors[i][k] * w;
                for j in 0..N {
                    out[i][j] += vik * self.vectors[j][k].conj();
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a
/// diagonal unitary, then applies the classical real Jacobi rotation.
/// The input is assumed Hermitian; only `hermitize(a)` is actually used.
pub fn eigh<const N: usize>(a: &CMat<N>) -> Eigh<N> {
    let mut a = hermitize(a);
    let mut v = identity::<N>();
    let threshold = JACOBI_TOLERANCE * frobenius(&a).max(1.0);
    let mut sweeps = 0;

    while sweeps < JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let values = std::array::from_fn(|k| a[order[k]][order[k]].re);
    let mut vectors = zeros::<N>();
    for (k, &src) in order.iter().enumerate() {
        for i in 0..N {
            vectors[i][k] = v[i][src];
        }
    }
    Eigh {
        values,
        vectors,
        sweeps,
    }
}

fn off_diagonal_norm<const N: usize>(a: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate<const N: usize>(a: &mut CMat<N>, v: &mut CMat<N>, p: usize, q: usize) {
    let b = a[p][q];
    let mag = b.norm();
    if mag < 1e-300 {
        return;
    }
    let phase = b / mag;
    let theta = (a[q][q].re - a[p][p].re) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(.., 1 @p, conj(phase) @q, ..) * R(c, s)
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    // A <- A U
    for k in 0..N {
        let akp = a[k][p];
        let akq = a[k][q];
        a[k][p] = akp * u_pp + akq * u_qp;
        a[k][q] = akp * u_pq + akq * u_qq;
    }
    // A <- U^H A
    for k in 0..N {
        let apk = a[p][k];
        let aqk = a[q][k];
        a[p][k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q][k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p][q] = ZERO;
    a[q][p] = ZERO;
    a[p][p] = C64::new(a[p][p].re, 0.0);
    a[q][q] = C64::new(a[q][q].re, 0.0);

    // V <- V U
    for row in v.iter_mut() {
        let vkp = row[p];
        let vkq = row[q];
        row[p] = vkp * u_pp + vkq * u_qp;
        row[q] = vkp * u_pq + vkq * u_qq;
    }
}

/// Tolerance used by the Hermiticity check in [`hermitian_sqrt`].
fn hermitian_tolerance<const N: usize>(m: &CMat<N>) -> f64 {
    1e-9 * max_abs(m).max(1.0)
}

/// Positive semidefinite square root of a Hermitian matrix.
pub fn hermitian_sqrt<const N: usize>(m: &CMat<N>) -> Result<CMat<N>> {
    let defect = hermiticity_defect(m);
    if defect > hermitian_tolerance(m) {
        return Err(Error::NonHermitianInput { deviation: defect });
    }
    let eig = eigh(m);
    if eig.values[0] < -SQRT_CLAMP {
        return Err(Error::NegativeEigenvalue {
            value: eig.values[0],
        });
    }
    let root = eig.reconstruct_with(|lambda| {
        if lambda.abs() < SQRT_ZERO_CUTOFF || lambda < 0.0 {
            0.0
        } else {
            lambda.sqrt()
        }
    });
    Ok(hermitize(&root))
}

/// Lower-triangular `L` with `L L^H = A` for Hermitian positive definite `A`.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky<const N: usize>(a: &CMat<N>) -> Option<CMat<N>> {
    let mut l = zeros::<N>();
    for j in 0..N {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = C64::new(d, 0.0);
        for i in (j + 1)..N {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / d;
        }
    }
    Some(l)
}

/// Solves the square real system `A x = b` by Gaussian elimination with
/// partial pivoting. A pivot smaller than `1e-12 * max|A|` is reported as
/// [`Error::SingularSystem`].
pub fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("linear system is not square"));
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }
    let tiny = 1e-12 * scale;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < tiny {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_hermitian() -> Mat4 {
        let mut m = [
            [c(2.0, 0.0), c(0.3, 0.4), c(-0.1, 0.2), c(0.05, -0.7)],
            [ZERO, c(1.0, 0.0), c(0.6, -0.1), c(0.0, 0.25)],
            [ZERO, ZERO, c(-0.5, 0.0), c(0.9, 0.9)],
            [ZERO, ZERO, ZERO, c(0.1, 0.0)],
        ];
        for i in 0..4 {
            for j in 0..i {
                m[i][j] = m[j][i].conj();
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs_input() {
        let m = sample_hermitian();
        let e = eigh(&m);
        let back = e.reconstruct_with(|x| x);
        assert!(max_abs(&sub(&back, &m)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        // V^H V = I
        let vhv = matmul(&adjoint(&e.vectors), &e.vectors);
        assert!(max_abs(&sub(&vhv, &identity())) < 1e-12);
    }

    #[test]
    fn eigh_trace_matches_eigenvalue_sum() {
        let m = sample_hermitian();
        let e = eigh(&m);
        let s: f64 = e.values.iter().sum();
        assert!((s - trace(&m).re).abs() < 1e-12);
    }

    #[test]
    fn eigh_diagonal_input_is_immediate() {
        let mut m = zeros::<4>();
        for (i, d) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            m[i][i] = c(*d, 0.0);
        }
        let e = eigh(&m);
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = identity::<4>();
        assert!(max_abs(&sub(&hermitian_sqrt(&id).unwrap(), &id)) < 1e-15);

        let mut d = zeros::<4>();
        d[0][0] = c(4.0, 0.0);
        d[1][1] = c(1.0, 0.0);
        let r = hermitian_sqrt(&d).unwrap();
        assert!((r[0][0].re - 2.0).abs() < 1e-15);
        assert!((r[1][1].re - 1.0).abs() < 1e-15);
        assert_eq!(r[2][2], ZERO);
        assert_eq!(r[3][3], ZERO);
    }

    #[test]
    fn sqrt_rejects_bad_inputs() {
        let mut m = identity::<4>();
        m[0][1] = c(0.5, 0.0);
        assert!(matches!(
            hermitian_sqrt(&m),
            Err(Error::NonHermitianInput { .. })
        ));

        let mut neg = identity::<4>();
        neg[2][2] = c(-1e-3, 0.0);
        assert!(matches!(
            hermitian_sqrt(&neg),
            Err(Error::NegativeEigenvalue { .. })
        ));

        let mut tiny = identity::<4>();
        tiny[2][2] = c(-1e-8, 0.0);
        let r = hermitian_sqrt(&tiny).unwrap();
        assert_eq!(r[2][2], ZERO);
    }

    #[test]
    fn cholesky_round_trip() {
        let m = sample_hermitian();
        // m^H m + I is positive definite
        let pd = {
            let mut p = matmul(&adjoint(&m), &m);
            for (i, row) in p.iter_mut().enumerate() {
                row[i] += ONE;
            }
            p
        };
        let l = cholesky(&pd).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_eq!(l[i][j], ZERO);
            }
        }
        let back = matmul(&l, &adjoint(&l));
        assert!(max_abs(&sub(&back, &pd)) < 1e-12);
        assert!(cholesky(&zeros::<4>()).is_none());
    }

    #[test]
    fn solve_real_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_real(a, vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);

        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            solve_real(singular, vec![1.0, 2.0]),
            Err(Error::SingularSystem)
        ));
    }
}
