//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Dimensions in this library stay at or below ~64, where Jacobi is plenty
//! fast, numerically robust, and keeps eigenvectors orthonormal for free.

use super::matrix::{Complex64, ComplexMatrix, ONE, ZERO};
use crate::error::Error;

/// Hermiticity tolerance accepted by the eigensolver entry points.
pub const HERMITICITY_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns)
/// of a Hermitian matrix. Input asymmetry beyond [`HERMITICITY_TOL`] is
/// rejected; below it, the Hermitian part is diagonalized.
pub fn eigh(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), Error> {
    if !a.is_square() {
        return Err(Error::dims(
            "eigh input",
            format!("{}x{}", a.rows(), a.cols()),
            "square",
        ));
    }
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            defect,
            tolerance: HERMITICITY_TOL,
        });
    }

    let n = a.rows();
    // Work on the Hermitian part so that tolerated asymmetry cannot leak
    // imaginary parts onto the diagonal.
    let mut m = ComplexMatrix::from_fn(n, n, |r, c| (a.get(r, c) + a.get(c, r).conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let scale = m.frobenius_norm().max(1.0);
    let target = 1e-14 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok((values, vectors))
}

/// One complex Jacobi rotation zeroing m[p,q] (and m[q,p]).
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let phase = apq / abs; // e^{i phi}
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;

    // Real-symmetric Jacobi angle for [[app, |apq|], [|apq|, aqq]].
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        1.0 / (theta - (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary R differs from identity only in rows/cols p,q:
    // R[p,p] = c, R[p,q] = s, R[q,p] = -s*conj(phase), R[q,q] = c*conj(phase).
    let rpp = Complex64::new(c, 0.0);
    let rpq = Complex64::new(s, 0.0);
    let rqp = -phase.conj() * s;
    let rqq = phase.conj() * c;

    let n = m.rows();
    // m <- R^dag m R applied as column then row updates.
    for r in 0..n {
        let mp = m.get(r, p);
        let mq = m.get(r, q);
        m.set(r, p, mp * rpp + mq * rqp);
        m.set(r, q, mp * rpq + mq * rqq);
    }
    for col in 0..n {
        let mp = m.get(p, col);
        let mq = m.get(q, col);
        m.set(p, col, rpp.conj() * mp + rqp.conj() * mq);
        m.set(q, col, rpq.conj() * mp + rqq.conj() * mq);
    }
    m.set(p, q, ZERO);
    m.set(q, p, ZERO);
    m.set(p, p, Complex64::new(m.get(p, p).re, 0.0));
    m.set(q, q, Complex64::new(m.get(q, q).re, 0.0));

    for r in 0..n {
        let vp = v.get(r, p);
        let vq = v.get(r, q);
        v.set(r, p, vp * rpp + vq * rqp);
        v.set(r, q, vp * rpq + vq * rqq);
    }
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn eigvals_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>, Error> {
    Ok(eigh(a)?.0)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64, Error> {
    Ok(eigvals_hermitian(a)?[0])
}

/// Trace distance (1/2) sum |eig(a - b)| between Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, Error> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::dims(
            "trace_distance operands",
            format!("{}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
            "equal shapes",
        ));
    }
    let diff = a.sub_m(b);
    let vals = eigvals_hermitian(&diff)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE as M_ONE;
    use crate::linalg::random::{haar_unitary, RngSeed};

    #[test]
    fn identity_spectrum() {
        let vals = eigvals_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(vals.len(), 3);
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_spectrum_is_sorted_ascending() {
        let d = ComplexMatrix::diagonal(&[Complex64::new(3.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let vals = eigvals_hermitian(&d).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 1, M_ONE);
        assert!(matches!(eigvals_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    // Construct-then-decompose oracle: eigenvalues of U D U^dag must match D.
    #[test]
    fn recovers_planted_spectrum() {
        for (seed, n) in [(11u64, 4usize), (12, 6), (13, 9)] {
            let u = haar_unitary(n, RngSeed::new(seed));
            let mut planted: Vec<f64> = (0..n).map(|k| (k as f64) * 0.7 - 1.3).collect();
            let d = ComplexMatrix::diagonal(
                &planted.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
            );
            let a = u.matmul(&d).matmul(&u.dagger());
            let vals = eigvals_hermitian(&a).unwrap();
            planted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (got, want) in vals.iter().zip(&planted) {
                assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn spectral_reconstruction_error_is_small() {
        let u = haar_unitary(8, RngSeed::new(21));
        let d = ComplexMatrix::diagonal(
            &(0..8).map(|k| Complex64::new((k as f64).sin() * 2.0, 0.0)).collect::<Vec<_>>(),
        );
        let a = u.matmul(&d).matmul(&u.dagger());
        let (vals, vecs) = eigh(&a).unwrap();
        let lam = ComplexMatrix::diagonal(
            &vals.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let rebuilt = vecs.matmul(&lam).matmul(&vecs.dagger());
        assert!(rebuilt.dist(&a) <= 1e-8 * a.frobenius_norm().max(1.0));
        assert!(vecs.isometry_defect() < 1e-10);
    }

    #[test]
    fn trace_distance_basics() {
        let p0 = ComplexMatrix::basis_ket(2, 0).projector();
        let p1 = ComplexMatrix::basis_ket(2, 1).projector();
        assert!(trace_distance(&p0, &p0).unwrap() < 1e-14);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);
    }

    // 2x2 eigenvalue oracle: eig(|0><0| - |+><+|) = +-1/sqrt(2), so the
    // trace distance is 1/sqrt(2).
    #[test]
    fn trace_distance_of_zero_and_plus() {
        let p0 = ComplexMatrix::basis_ket(2, 0).projector();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexMatrix::from_real(2, 1, &[s, s]);
        let got = trace_distance(&p0, &plus.projector()).unwrap();
        assert!((got - s).abs() < 1e-12, "got {got}");
    }
}
