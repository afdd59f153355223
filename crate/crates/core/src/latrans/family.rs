//! Transformation families: a rule per environment dimension mapping states
//! of A (x) X to states of B (x) X, with constructors that lift unitaries,
//! isometries, and Kraus channels into families acting as op (x) identity.
//!
//! Families are indexed by environment *dimension*: a composite environment
//! X (x) X' enters as the product dimension. Evaluators must be pure
//! functions; nothing here carries hidden mutable state.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{min_eigenvalue, Complex64, ComplexMatrix, EQ_TOL, ZERO};
use crate::smt::TheoryTag;

type Evaluator = Arc<dyn Fn(usize, &ComplexMatrix) -> Result<ComplexMatrix, Error> + Send + Sync>;

/// How a family was constructed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    LiftedUnitary,
    LiftedIsometry,
    LiftedChannel,
    BlackBox(String),
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::LiftedUnitary => write!(f, "lifted_unitary"),
            FamilyKind::LiftedIsometry => write!(f, "lifted_isometry"),
            FamilyKind::LiftedChannel => write!(f, "lifted_channel"),
            FamilyKind::BlackBox(name) => write!(f, "black_box:{name}"),
        }
    }
}

/// A transformation family L = {L_X}, of type A -> B in one of the two
/// quantum state-measurement theories.
#[derive(Clone)]
pub struct TransFamily {
    theory: TheoryTag,
    dim_in: usize,
    dim_out: usize,
    kind: FamilyKind,
    eval: Evaluator,
}

impl fmt::Debug for TransFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransFamily")
            .field("theory", &self.theory)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("kind", &self.kind)
            .finish()
    }
}

impl TransFamily {
    /// Wrap a raw evaluation rule as a black-box family.
    pub fn from_rule(
        theory: TheoryTag,
        dim_in: usize,
        dim_out: usize,
        name: impl Into<String>,
        eval: impl Fn(usize, &ComplexMatrix) -> Result<ComplexMatrix, Error> + Send + Sync + 'static,
    ) -> Self {
        Self {
            theory,
            dim_in,
            dim_out,
            kind: FamilyKind::BlackBox(name.into()),
            eval: Arc::new(eval),
        }
    }

    pub fn theory(&self) -> TheoryTag {
        self.theory
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    fn check_input(&self, env_dim: usize, state: &ComplexMatrix) -> Result<(), Error> {
        if env_dim == 0 {
            return Err(Error::InvalidArgument("environment dimension must be >= 1".into()));
        }
        let d = self.dim_in * env_dim;
        let ok = match self.theory {
            TheoryTag::Pure => state.is_ket() && state.rows() == d,
            TheoryTag::Mixed => state.rows() == d && state.cols() == d,
        };
        if !ok {
            return Err(Error::dims(
                "family input state",
                format!("{}x{}", state.rows(), state.cols()),
                match self.theory {
                    TheoryTag::Pure => format!("{d}x1"),
                    TheoryTag::Mixed => format!("{d}x{d}"),
                },
            ));
        }
        Ok(())
    }

    fn check_output_shape(&self, env_dim: usize, out: &ComplexMatrix) -> Result<(), Error> {
        let d = self.dim_out * env_dim;
        let ok = match self.theory {
            TheoryTag::Pure => out.is_ket() && out.rows() == d,
            TheoryTag::Mixed => out.rows() == d && out.cols() == d,
        };
        if !ok {
            return Err(Error::InvalidOutputState {
                details: format!(
                    "evaluator returned a {}x{} matrix, expected output on dimension {d}",
                    out.rows(),
                    out.cols()
                ),
                defect: f64::NAN,
                min_eigenvalue: None,
            });
        }
        if !out.is_finite() {
            return Err(Error::InvalidOutputState {
                details: "evaluator returned non-finite entries".into(),
                defect: f64::NAN,
                min_eigenvalue: None,
            });
        }
        Ok(())
    }

    /// Evaluate L at environment dimension `env_dim` without validating that
    /// the output is a state. Shape and finiteness are still enforced.
    pub fn apply_raw(&self, env_dim: usize, state: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        self.check_input(env_dim, state)?;
        let out = (self.eval)(env_dim, state)?;
        self.check_output_shape(env_dim, &out)?;
        Ok(out)
    }

    /// Evaluate L at environment dimension `env_dim`. The output must be a
    /// valid state of the family's theory; otherwise
    /// [`Error::InvalidOutputState`] reports how it fails, keeping
    /// non-completely-positive candidates diagnosable instead of crashing.
    pub fn apply(&self, env_dim: usize, state: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        let out = self.apply_raw(env_dim, state)?;
        match self.theory {
            TheoryTag::Pure => {
                let defect = (out.norm() - 1.0).abs();
                if defect > EQ_TOL {
                    return Err(Error::InvalidOutputState {
                        details: format!("output ket norm {} is not 1", out.norm()),
                        defect,
                        min_eigenvalue: None,
                    });
                }
            }
            TheoryTag::Mixed => {
                let herm = out.hermiticity_defect();
                let trace_defect = (out.trace().re - 1.0).abs();
                if herm > EQ_TOL {
                    return Err(Error::InvalidOutputState {
                        details: format!("output asymmetry {herm:.3e}"),
                        defect: herm,
                        min_eigenvalue: None,
                    });
                }
                let min_eig = min_eigenvalue(&out)?;
                let neg = (-min_eig).max(0.0);
                if neg > EQ_TOL || trace_defect > EQ_TOL {
                    return Err(Error::InvalidOutputState {
                        details: format!(
                            "output is not a density matrix (min eigenvalue {min_eig:.6e}, trace defect {trace_defect:.3e})"
                        ),
                        defect: neg.max(trace_defect),
                        min_eigenvalue: Some(min_eig),
                    });
                }
            }
        }
        Ok(out)
    }

    /// The unextended function L_[-]: evaluation at the trivial environment.
    pub fn apply_unextended(&self, state: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        self.apply(1, state)
    }
}

/// (op (x) I_env) |ket>, computed without materializing the Kronecker product.
pub(crate) fn op_tensor_id_ket(op: &ComplexMatrix, env_dim: usize, ket: &ComplexMatrix) -> ComplexMatrix {
    let rows = op.rows();
    let cols = op.cols();
    let mut out = ComplexMatrix::zeros(rows * env_dim, 1);
    for b in 0..rows {
        for a in 0..cols {
            let v = op.get(b, a);
            if v == ZERO {
                continue;
            }
            for x in 0..env_dim {
                let cur = out.get(b * env_dim + x, 0);
                out.set(b * env_dim + x, 0, cur + v * ket.get(a * env_dim + x, 0));
            }
        }
    }
    out
}

/// (k (x) I) rho (k (x) I)^dag, again without materializing Kronecker factors.
pub(crate) fn kraus_tensor_id_conjugate(
    k: &ComplexMatrix,
    env_dim: usize,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let dout = k.rows();
    let din = k.cols();
    let n_in = din * env_dim;
    let n_out = dout * env_dim;

    // tmp = (k (x) I) rho
    let mut tmp = ComplexMatrix::zeros(n_out, n_in);
    for b in 0..dout {
        for a in 0..din {
            let v = k.get(b, a);
            if v == ZERO {
                continue;
            }
            for x in 0..env_dim {
                let out_row = b * env_dim + x;
                let in_row = a * env_dim + x;
                for col in 0..n_in {
                    let cur = tmp.get(out_row, col);
                    tmp.set(out_row, col, cur + v * rho.get(in_row, col));
                }
            }
        }
    }
    // out = tmp (k (x) I)^dag
    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for bp in 0..dout {
        for ap in 0..din {
            let v = k.get(bp, ap).conj();
            if v == ZERO {
                continue;
            }
            for xp in 0..env_dim {
                let out_col = bp * env_dim + xp;
                let in_col = ap * env_dim + xp;
                for row in 0..n_out {
                    let cur = out.get(row, out_col);
                    out.set(row, out_col, cur + tmp.get(row, in_col) * v);
                }
            }
        }
    }
    out
}

/// Lift an isometry (unitary when square) into the pure-theory family
/// psi -> (V (x) I_X) psi.
pub fn lift_isometry(v: &ComplexMatrix) -> Result<TransFamily, Error> {
    let defect = v.isometry_defect();
    if defect > EQ_TOL {
        return Err(Error::NotIsometry { defect });
    }
    let kind = if v.is_square() {
        FamilyKind::LiftedUnitary
    } else {
        FamilyKind::LiftedIsometry
    };
    let op = v.clone();
    Ok(TransFamily {
        theory: TheoryTag::Pure,
        dim_in: v.cols(),
        dim_out: v.rows(),
        kind,
        eval: Arc::new(move |env_dim, ket| Ok(op_tensor_id_ket(&op, env_dim, ket))),
    })
}

/// Lift a Kraus channel into the mixed-theory family
/// rho -> sum_j (K_j (x) I) rho (K_j (x) I)^dag.
pub fn lift_channel(kraus: &[ComplexMatrix]) -> Result<TransFamily, Error> {
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("need at least one Kraus operator".into()));
    }
    let dim_out = kraus[0].rows();
    let dim_in = kraus[0].cols();
    if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
        return Err(Error::dims("Kraus operator shapes", "mixed", format!("{dim_out}x{dim_in}")));
    }
    let mut acc = ComplexMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        acc = acc.add_m(&k.dagger().matmul(k));
    }
    let defect = acc.dist(&ComplexMatrix::identity(dim_in));
    if defect > EQ_TOL {
        return Err(Error::NotTracePreserving { defect });
    }
    let ops: Vec<ComplexMatrix> = kraus.to_vec();
    Ok(TransFamily {
        theory: TheoryTag::Mixed,
        dim_in,
        dim_out,
        kind: FamilyKind::LiftedChannel,
        eval: Arc::new(move |env_dim, rho| {
            let n = dim_out * env_dim;
            let mut out = ComplexMatrix::zeros(n, n);
            for k in &ops {
                out = out.add_m(&kraus_tensor_id_conjugate(k, env_dim, rho));
            }
            Ok(out)
        }),
    })
}

/// Sequential composition: apply `first`, then `second`, at every
/// environment dimension.
pub fn compose_families(second: &TransFamily, first: &TransFamily) -> Result<TransFamily, Error> {
    if second.theory != first.theory {
        return Err(Error::TheoryMismatch);
    }
    if first.dim_out != second.dim_in {
        return Err(Error::dims(
            "family composition",
            first.dim_out,
            second.dim_in,
        ));
    }
    let f = first.eval.clone();
    let g = second.eval.clone();
    Ok(TransFamily {
        theory: first.theory,
        dim_in: first.dim_in,
        dim_out: second.dim_out,
        kind: FamilyKind::BlackBox(format!("compose({}, {})", second.kind, first.kind)),
        eval: Arc::new(move |env_dim, state| {
            let mid = f(env_dim, state)?;
            g(env_dim, &mid)
        }),
    })
}

/// The identity family on `dim` in the given theory.
pub fn identity_family(theory: TheoryTag, dim: usize) -> TransFamily {
    let id = ComplexMatrix::identity(dim);
    match theory {
        TheoryTag::Pure => lift_isometry(&id).expect("identity is unitary"),
        TheoryTag::Mixed => lift_channel(std::slice::from_ref(&id)).expect("identity is a channel"),
    }
}

/// Unit-modulus scalar helper used by nonlinear zoo evaluators.
pub(crate) fn phase(angle: f64) -> Complex64 {
    Complex64::new(angle.cos(), angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_density_with, random_pure_with};
    use crate::linalg::{bell_projector, haar_unitary, random_pure, RngSeed};

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[s, s, s, -s])
    }

    #[test]
    fn lifted_identity_acts_trivially() {
        let fam = lift_isometry(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(*fam.kind(), FamilyKind::LiftedUnitary);
        let mut rng = RngSeed::new(2).rng();
        for env in 1..=3 {
            let psi = random_pure_with(2 * env, &mut rng);
            assert!(fam.apply(env, &psi).unwrap().dist(&psi) < 1e-12);
        }
    }

    // Direct Kronecker oracle for (H (x) I)|00>.
    #[test]
    fn lifted_hadamard_on_00() {
        let fam = lift_isometry(&hadamard()).unwrap();
        let ket00 = ComplexMatrix::basis_ket(4, 0);
        let got = fam.apply(2, &ket00).unwrap();
        let expect = hadamard()
            .tensor(&ComplexMatrix::identity(2))
            .matmul(&ket00);
        assert!(got.dist(&expect) < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(got.dist(&ComplexMatrix::from_real(4, 1, &[s, 0.0, s, 0.0])) < 1e-12);
    }

    #[test]
    fn lift_isometry_accepts_column_embeddings() {
        let embed = ComplexMatrix::from_real(2, 1, &[1.0, 0.0]);
        let fam = lift_isometry(&embed).unwrap();
        assert_eq!(*fam.kind(), FamilyKind::LiftedIsometry);
        assert_eq!((fam.dim_in(), fam.dim_out()), (1, 2));
        let scalar_one = ComplexMatrix::identity(1);
        let out = fam.apply(1, &scalar_one).unwrap();
        assert!(out.dist(&ComplexMatrix::basis_ket(2, 0)) < 1e-15);
    }

    #[test]
    fn lift_isometry_rejects_non_isometries() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(lift_isometry(&m), Err(Error::NotIsometry { .. })));
    }

    #[test]
    fn lifted_identity_channel_is_identity() {
        let fam = lift_channel(&[ComplexMatrix::identity(3)]).unwrap();
        let mut rng = RngSeed::new(4).rng();
        let rho = random_density_with(6, &mut rng);
        assert!(fam.apply(2, &rho).unwrap().dist(&rho) < 1e-12);
    }

    // 2x2 hand oracle: dephasing kills the off-diagonal of |+><+|.
    #[test]
    fn dephasing_channel_on_plus() {
        let k0 = ComplexMatrix::basis_ket(2, 0).projector();
        let k1 = ComplexMatrix::basis_ket(2, 1).projector();
        let fam = lift_channel(&[k0, k1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexMatrix::from_real(2, 1, &[s, s]).projector();
        let out = fam.apply(1, &plus).unwrap();
        assert!(out.dist(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-12);
    }

    // Direct Kraus-sum oracle: the replace-with-|0> channel on a Bell half
    // leaves |0><0| (x) I/2.
    #[test]
    fn replace_channel_on_bell() {
        let zero = ComplexMatrix::basis_ket(2, 0);
        let one = ComplexMatrix::basis_ket(2, 1);
        let kraus = [zero.outer(&zero), zero.outer(&one)];
        let fam = lift_channel(&kraus).unwrap();
        let out = fam.apply(2, &bell_projector(2)).unwrap();

        let mut oracle = ComplexMatrix::zeros(4, 4);
        for k in &kraus {
            let big = k.tensor(&ComplexMatrix::identity(2));
            oracle = oracle.add_m(&big.matmul(&bell_projector(2)).matmul(&big.dagger()));
        }
        assert!(out.dist(&oracle) < 1e-12);

        let expect = zero.projector().tensor(&ComplexMatrix::identity(2).scale_re(0.5));
        assert!(out.dist(&expect) < 1e-12);
    }

    #[test]
    fn lift_channel_rejects_trace_decreasing_sets() {
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(matches!(
            lift_channel(&[half]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn composition_applies_first_argument_last() {
        let u1 = haar_unitary(3, RngSeed::new(10));
        let u2 = haar_unitary(3, RngSeed::new(11));
        let fam = compose_families(&lift_isometry(&u2).unwrap(), &lift_isometry(&u1).unwrap()).unwrap();
        let psi = random_pure(3, RngSeed::new(12));
        let got = fam.apply(1, &psi).unwrap();
        let expect = u2.matmul(&u1).matmul(&psi);
        assert!(got.dist(&expect) < 1e-12);
    }

    #[test]
    fn composing_with_identity_is_identity() {
        let u = haar_unitary(2, RngSeed::new(13));
        let fam = lift_isometry(&u).unwrap();
        let id = identity_family(TheoryTag::Pure, 2);
        let left = compose_families(&fam, &id).unwrap();
        let right = compose_families(&id, &fam).unwrap();
        let mut rng = RngSeed::new(14).rng();
        for _ in 0..100 {
            let psi = random_pure_with(4, &mut rng);
            let want = fam.apply(2, &psi).unwrap();
            assert!(left.apply(2, &psi).unwrap().dist(&want) < 1e-12);
            assert!(right.apply(2, &psi).unwrap().dist(&want) < 1e-12);
        }
    }

    #[test]
    fn composing_inverse_unitaries_gives_identity() {
        let u = haar_unitary(4, RngSeed::new(15));
        let fam = compose_families(
            &lift_isometry(&u.dagger()).unwrap(),
            &lift_isometry(&u).unwrap(),
        )
        .unwrap();
        let mut rng = RngSeed::new(16).rng();
        for env in 1..=3usize {
            let psi = random_pure_with(4 * env, &mut rng);
            assert!(fam.apply(env, &psi).unwrap().dist(&psi) < 1e-11);
        }
    }

    #[test]
    fn composition_checks_dimensions_and_theory() {
        let pure = identity_family(TheoryTag::Pure, 2);
        let mixed = identity_family(TheoryTag::Mixed, 2);
        assert!(matches!(compose_families(&pure, &mixed), Err(Error::TheoryMismatch)));
        let small = identity_family(TheoryTag::Pure, 3);
        assert!(compose_families(&pure, &small).is_err());
    }

    #[test]
    fn invalid_outputs_are_reported_not_propagated_silently() {
        // A black box that rescales the state is not a family of any theory.
        let bogus = TransFamily::from_rule(TheoryTag::Pure, 2, 2, "rescale", |_, ket| {
            Ok(ket.scale_re(2.0))
        });
        let psi = random_pure(2, RngSeed::new(20));
        match bogus.apply(1, &psi) {
            Err(Error::InvalidOutputState { defect, .. }) => assert!((defect - 1.0).abs() < 1e-12),
            other => panic!("expected InvalidOutputState, got {other:?}"),
        }
        assert!(bogus.apply_raw(1, &psi).is_ok());
    }
}
