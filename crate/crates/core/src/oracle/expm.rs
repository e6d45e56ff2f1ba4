//! Dense matrix exponentials e^{zM}.

use nalgebra::{Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::DenseMatrix;

/// Largest dimension accepted by the dense routines.
pub const EXPM_DIM_LIMIT: usize = 64;

const NORMALITY_TOL: f64 = 1e-12;

fn check(m: &DenseMatrix, z: Complex64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.nrows() > EXPM_DIM_LIMIT {
        return Err(Error::Capacity {
            what: "dense exponential",
            required: m.nrows(),
            limit: EXPM_DIM_LIMIT,
        });
    }
    if !(z.re.is_finite() && z.im.is_finite())
        || m.iter().any(|x| !(x.re.is_finite() && x.im.is_finite()))
    {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    Ok(())
}

fn one_norm(m: &DenseMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Whether `M M† = M† M` to within a relative 1e-12.
pub fn is_normal(m: &DenseMatrix) -> bool {
    let a = m.adjoint();
    let comm = m * &a - &a * m;
    let scale = one_norm(m).max(1e-300);
    one_norm(&comm) <= NORMALITY_TOL * scale * scale
}

/// e^{zM}; eigendecomposition when `M` is normal, Taylor with scaling and
/// squaring otherwise.
pub fn matrix_exp(m: &DenseMatrix, z: Complex64) -> Result<DenseMatrix> {
    check(m, z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(DenseMatrix::identity(m.nrows(), m.nrows()));
    }
    if is_normal(m) {
        // M = A + iB with A, B Hermitian and commuting.
        let a = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let b = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
        let ea = hermitian_exp(&a, z);
        if one_norm(&b) == 0.0 {
            return Ok(ea);
        }
        return Ok(ea * hermitian_exp(&b, z * Complex64::i()));
    }
    Ok(expm_taylor_unchecked(m, z))
}

// e^{zH} for Hermitian H.
fn hermitian_exp(h: &DenseMatrix, z: Complex64) -> DenseMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        scale_column(&mut scaled, j, (z * lambda).exp());
    }
    scaled * v.adjoint()
}

fn scale_column(m: &mut DenseMatrix, j: usize, f: Complex64) {
    for x in m.column_mut(j).iter_mut() {
        *x *= f;
    }
}

/// e^{zM} by a Taylor series on zM/2^s with ‖zM/2^s‖₁ ≤ ½, squared s times.
pub fn expm_taylor(m: &DenseMatrix, z: Complex64) -> Result<DenseMatrix> {
    check(m, z)?;
    Ok(expm_taylor_unchecked(m, z))
}

fn expm_taylor_unchecked(m: &DenseMatrix, z: Complex64) -> DenseMatrix {
    let n = m.nrows();
    let a = m * z;
    let norm = one_norm(&a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut result = DenseMatrix::identity(n, n);
    let mut term = DenseMatrix::identity(n, n);
    for k in 1..60 {
        term = &term * &a * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigenvalues of a general complex matrix, from its Schur form. Leftover
/// 2×2 diagonal blocks are solved directly.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    check(m, Complex64::new(0.0, 0.0))?;
    let n = m.nrows();
    let (_, t) = Schur::new(m.clone()).unpack();
    let scale = one_norm(m).max(1e-300);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

/// Tr e^{zM} = Σ e^{zλ}, valid for any square matrix.
pub fn trace_exp(m: &DenseMatrix, z: Complex64) -> Result<Complex64> {
    check(m, z)?;
    if is_hermitian(m) {
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        return Ok(ev.iter().map(|&l| (z * l).exp()).sum());
    }
    Ok(eigenvalues(m)?.into_iter().map(|l| (z * l).exp()).sum())
}

fn is_hermitian(m: &DenseMatrix) -> bool {
    let scale = one_norm(m).max(1e-300);
    one_norm(&(m - m.adjoint())) <= 1e-14 * scale
}

/// e^{zM} = V e^{zΛ} V⁻¹ through eigenvectors, for diagonalisable `M`.
///
/// Each eigenvector is the right singular vector of `M − λI` with the
/// smallest singular value. Meant as an independent cross-check of
/// [`expm_taylor`]; errors if the eigenvector matrix is singular.
pub fn expm_eigen(m: &DenseMatrix, z: Complex64) -> Result<DenseMatrix> {
    check(m, z)?;
    let n = m.nrows();
    let lambdas = eigenvalues(m)?;
    let mut v = DenseMatrix::zeros(n, n);
    for (j, &l) in lambdas.iter().enumerate() {
        let shifted = m - DenseMatrix::identity(n, n) * l;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        for r in 0..n {
            v[(r, j)] = v_t[(k, r)].conj();
        }
    }
    let inv = v
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Mismatch("eigenvector matrix is singular".into()))?;
    let mut scaled = v;
    for (j, &l) in lambdas.iter().enumerate() {
        scale_column(&mut scaled, j, (z * l).exp());
    }
    Ok(scaled * inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_scalar_is_identity() {
        let x: PauliString = "X".parse().unwrap();
        let e = matrix_exp(&x.to_matrix(), c(0.0)).unwrap();
        assert_eq!(e, DenseMatrix::identity(2, 2));
    }

    #[test]
    fn pauli_x_gives_cosh_sinh() {
        let x: PauliString = "X".parse().unwrap();
        let xm = x.to_matrix();
        for cc in [0.3, -1.7, 4.0] {
            let want = DenseMatrix::identity(2, 2) * c(f64::cosh(cc)) + &xm * c(f64::sinh(cc));
            for got in [
                matrix_exp(&xm, c(cc)).unwrap(),
                expm_taylor(&xm, c(cc)).unwrap(),
            ] {
                assert!(max_diff(&got, &want) < 1e-13 * f64::cosh(cc));
            }
        }
    }

    #[test]
    fn non_normal_paths_agree() {
        // Jordan-like upper triangle plus distinct diagonal.
        let m = DenseMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0),
                c(2.0),
                c(0.5),
                c(0.0),
                Complex64::new(-0.5, 0.3),
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.2),
            ],
        );
        assert!(!is_normal(&m));
        let z = Complex64::new(0.3, -1.1);
        let a = expm_taylor(&m, z).unwrap();
        let b = expm_eigen(&m, z).unwrap();
        assert!(max_diff(&a, &b) < 1e-10, "{}", max_diff(&a, &b));
        let tr: Complex64 = (0..3).map(|i| a[(i, i)]).sum();
        assert!((trace_exp(&m, z).unwrap() - tr).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = DenseMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.4),
                Complex64::new(0.0, 1.0),
                c(2.0),
                Complex64::new(-0.3, 0.2),
            ],
        );
        let z = Complex64::new(0.7, 0.2);
        let eps = 1e-5;
        let plus = matrix_exp(&m, z + eps).unwrap();
        let minus = matrix_exp(&m, z - eps).unwrap();
        let fd = (plus - minus) * c(0.5 / eps);
        let want = &m * matrix_exp(&m, z).unwrap();
        let rel = max_diff(&fd, &want) / want.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = DenseMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(matrix_exp(&m, c(1.0)), Err(Error::NonFinite(_))));
        let big = DenseMatrix::identity(65, 65);
        assert!(matches!(
            matrix_exp(&big, c(1.0)),
            Err(Error::Capacity { .. })
        ));
    }
}
