//! Dense complex linear algebra kernel: tensor products, partial traces,
//! Bell states, vectorization, Hermitian eigendecomposition, and seeded
//! random sampling of states, unitaries, and channels.
//!
//! All values are immutable after construction and every operation is pure
//! given an explicit seed, so the whole module is safe to use concurrently.

mod eigen;
mod matrix;
pub mod random;

pub use eigen::{eigh, eigvals_hermitian, min_eigenvalue, trace_distance, HERMITICITY_TOL};
pub use matrix::{bell_projector, bell_state, swap, Complex64, ComplexMatrix, I, ONE, ZERO};
pub use random::{
    haar_unitary, random_density, random_kraus_channel, random_pure, RngSeed,
};

/// Default tolerance for numerical equality of states and operators.
pub const EQ_TOL: f64 = 1e-9;

/// Default tolerance for constructed unitarity/isometry checks.
pub const UNITARITY_TOL: f64 = 1e-10;

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn small_complex() -> impl Strategy<Value = Complex64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(small_complex(), rows * cols)
            .prop_map(move |data| ComplexMatrix::new(rows, cols, data))
    }

    // Independent index-arithmetic Kronecker oracle.
    fn kron_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |r, c| {
            a.get(r / b.rows(), c / b.cols()) * b.get(r % b.rows(), c % b.cols())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tensor_matches_index_oracle(a in matrix(2, 3), b in matrix(3, 2)) {
            let got = a.tensor(&b);
            prop_assert!(got.dist(&kron_oracle(&a, &b)) < 1e-12);
        }

        #[test]
        fn tensor_is_associative(a in matrix(2, 2), b in matrix(2, 2), c in matrix(2, 2)) {
            let left = a.tensor(&b).tensor(&c);
            let right = a.tensor(&b.tensor(&c));
            prop_assert!(left.dist(&right) < 1e-12);
        }

        #[test]
        fn dagger_is_an_involution(a in matrix(3, 2)) {
            prop_assert_eq!(a.dagger().dagger(), a);
        }

        #[test]
        fn conjugate_is_an_involution(a in matrix(4, 1)) {
            prop_assert_eq!(a.conjugate().conjugate(), a);
        }

        #[test]
        fn partial_trace_of_product_factorizes(a in matrix(2, 2), b in matrix(3, 3)) {
            // Oracle: tracing the second factor of a (x) b must equal a * tr(b),
            // computed directly from the inputs.
            let prod = a.tensor(&b);
            let traced = prod.partial_trace(&[2, 3], &[0]).unwrap();
            let expect = a.scale(b.trace());
            prop_assert!(traced.dist(&expect) < 1e-12);

            let traced_b = prod.partial_trace(&[2, 3], &[1]).unwrap();
            prop_assert!(traced_b.dist(&b.scale(a.trace())) < 1e-12);
        }

        #[test]
        fn vec_unvec_are_inverse(m in matrix(3, 2)) {
            prop_assert_eq!(m.vec().unvec(3, 2).unwrap(), m);
        }
    }

    // Reshape extraction oracle: sqrt(d) * unvec((U (x) I) |Bell>) = U,
    // computed here with explicit loops rather than the library tensor op.
    #[test]
    fn bell_vectorization_recovers_the_operator() {
        let u = haar_unitary(2, RngSeed::new(17));
        let bell = bell_state(2);
        let mut chi = ComplexMatrix::zeros(4, 1);
        for b in 0..2 {
            for i in 0..2 {
                // (U (x) I)|Bell> component (b, i) = sum_k U[b,k] Bell[(k,i)]
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += u.get(b, k) * bell.get(k * 2 + i, 0);
                }
                chi.set(b * 2 + i, 0, acc);
            }
        }
        let recovered = chi.unvec(2, 2).unwrap().scale_re(2f64.sqrt());
        assert!(recovered.dist(&u) < 1e-12);
    }
}
