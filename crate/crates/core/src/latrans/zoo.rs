//! Built-in candidate transformation families.
//!
//! The zoo collects rules that look like transformations but violate (or,
//! in one case, satisfy) the locality axioms, so the checker and the
//! extraction pipeline always have named counterexamples available.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::family::{phase, FamilyKind, TransFamily};
use crate::error::Error;
use crate::linalg::{Complex64, ComplexMatrix};
use crate::smt::TheoryTag;

/// Slice threshold below which the constant-pure rule falls back to |0...0>.
const NULL_SLICE_EPS: f64 = 1e-12;

/// Catalog entry describing one built-in family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZooEntry {
    pub name: &'static str,
    pub theory: TheoryTag,
    pub takes_theta: bool,
    pub description: &'static str,
}

/// Stable, ordered catalog of the built-in families.
pub fn zoo_catalog() -> Vec<ZooEntry> {
    vec![
        ZooEntry {
            name: "constant_pure",
            theory: TheoryTag::Pure,
            takes_theta: false,
            description: "sends every input to |0> on the system while conditioning the \
                          environment on the <0| slice; a candidate extension of the constant \
                          map psi -> |0><0|. Convex linear on its own, but signals through \
                          the environment.",
        },
        ZooEntry {
            name: "constant_mixed",
            theory: TheoryTag::Mixed,
            takes_theta: false,
            description: "replaces the system with |0><0| and keeps the environment marginal; \
                          equal to the lifted replace-with-|0> channel, so it passes every \
                          axiom and certifies as a channel.",
        },
        ZooEntry {
            name: "nonlinear_phase",
            theory: TheoryTag::Pure,
            takes_theta: true,
            description: "applies exp(i theta <Z> Z) on the system with <Z> read from the \
                          full input state; a norm-preserving but nonlinear rule that breaks \
                          commutation with environment updates.",
        },
        ZooEntry {
            name: "transpose_mixed",
            theory: TheoryTag::Mixed,
            takes_theta: false,
            description: "partial transpose on the system; positive but not completely \
                          positive, so it emits invalid (negative) outputs on entangled \
                          inputs by design.",
        },
    ]
}

/// Alternating-sign diagonal, the qubit Pauli Z when `dim` = 2.
fn z_diagonal(dim: usize) -> Vec<f64> {
    (0..dim).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Instantiate a built-in family by name with system dimension `dim`.
/// `theta` is only consulted by `nonlinear_phase` (default 0.7).
pub fn zoo_family(name: &str, dim: usize, theta: Option<f64>) -> Result<TransFamily, Error> {
    if dim == 0 {
        return Err(Error::InvalidArgument("zoo family dimension must be >= 1".into()));
    }
    match name {
        "constant_pure" => Ok(constant_pure(dim)),
        "constant_mixed" => Ok(constant_mixed(dim)),
        "nonlinear_phase" => Ok(nonlinear_phase(dim, theta.unwrap_or(0.7))),
        "transpose_mixed" => Ok(transpose_mixed(dim)),
        other => Err(Error::UnknownZooFamily(other.to_string())),
    }
}

/// L_X(psi) = |0>_B (x) eta(psi), with eta the normalized <0|_A slice and a
/// |0...0>_X fallback when that slice is null.
pub fn constant_pure(dim: usize) -> TransFamily {
    TransFamily::from_rule(TheoryTag::Pure, dim, dim, "constant_pure", move |env, ket| {
        let mut slice = ComplexMatrix::zeros(env, 1);
        for x in 0..env {
            slice.set(x, 0, ket.get(x, 0)); // component along |0>_A
        }
        let eta = if slice.norm() > NULL_SLICE_EPS {
            slice.normalized()
        } else {
            ComplexMatrix::basis_ket(env, 0)
        };
        Ok(ComplexMatrix::basis_ket(dim, 0).tensor(&eta))
    })
}

/// L_X(rho) = |0><0|_B (x) Tr_A(rho).
pub fn constant_mixed(dim: usize) -> TransFamily {
    TransFamily::from_rule(TheoryTag::Mixed, dim, dim, "constant_mixed", move |env, rho| {
        let env_marginal = rho.partial_trace(&[dim, env], &[1])?;
        Ok(ComplexMatrix::basis_ket(dim, 0)
            .projector()
            .tensor(&env_marginal))
    })
}

/// psi -> exp(i theta <psi|(Z_A (x) I)|psi> (Z_A (x) I)) psi.
pub fn nonlinear_phase(dim: usize, theta: f64) -> TransFamily {
    let z = Arc::new(z_diagonal(dim));
    TransFamily::from_rule(TheoryTag::Pure, dim, dim, format!("nonlinear_phase({theta})"), {
        let z = z.clone();
        move |env, ket| {
            let mut expectation = 0.0;
            for a in 0..dim {
                for x in 0..env {
                    expectation += z[a] * ket.get(a * env + x, 0).norm_sqr();
                }
            }
            let angle = theta * expectation;
            let mut out = ComplexMatrix::zeros(dim * env, 1);
            for a in 0..dim {
                let factor: Complex64 = phase(angle * z[a]);
                for x in 0..env {
                    out.set(a * env + x, 0, factor * ket.get(a * env + x, 0));
                }
            }
            Ok(out)
        }
    })
}

/// rho -> (T_A (x) id)(rho): partial transpose on the system factor.
pub fn transpose_mixed(dim: usize) -> TransFamily {
    TransFamily::from_rule(TheoryTag::Mixed, dim, dim, "transpose_mixed", move |env, rho| {
        Ok(ComplexMatrix::from_fn(dim * env, dim * env, |r, c| {
            let (a, x) = (r / env, r % env);
            let (ap, xp) = (c / env, c % env);
            rho.get(ap * env + x, a * env + xp)
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latrans::family::lift_channel;
    use crate::linalg::random::random_density_with;
    use crate::linalg::{bell_projector, bell_state, min_eigenvalue, random_pure, RngSeed};

    #[test]
    fn catalog_is_stable_and_complete() {
        let names: Vec<_> = zoo_catalog().iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            vec!["constant_pure", "constant_mixed", "nonlinear_phase", "transpose_mixed"]
        );
        assert!(zoo_family("no_such_family", 2, None).is_err());
    }

    #[test]
    fn constant_pure_conditions_the_environment() {
        let fam = zoo_family("constant_pure", 2, None).unwrap();
        // On the Bell state the <0|_A slice is |0>_X / sqrt(2).
        let out = fam.apply(2, &bell_state(2)).unwrap();
        assert!(out.dist(&ComplexMatrix::basis_ket(4, 0)) < 1e-12);
    }

    #[test]
    fn constant_pure_null_slice_falls_back() {
        let fam = zoo_family("constant_pure", 2, None).unwrap();
        // |1>_A (x) |1>_X has an exactly-null <0|_A slice.
        let input = ComplexMatrix::basis_ket(2, 1).tensor(&ComplexMatrix::basis_ket(2, 1));
        let out = fam.apply(2, &input).unwrap();
        assert!(out.dist(&ComplexMatrix::basis_ket(4, 0)) < 1e-15);
    }

    // constant_mixed must agree pointwise with the lifted replace channel.
    #[test]
    fn constant_mixed_equals_lifted_replace_channel() {
        let dim = 2;
        let zero = ComplexMatrix::basis_ket(dim, 0);
        let kraus: Vec<ComplexMatrix> = (0..dim)
            .map(|j| zero.outer(&ComplexMatrix::basis_ket(dim, j)))
            .collect();
        let lifted = lift_channel(&kraus).unwrap();
        let fam = zoo_family("constant_mixed", dim, None).unwrap();
        let mut rng = RngSeed::new(23).rng();
        for env in 1..=3usize {
            for _ in 0..20 {
                let rho = random_density_with(dim * env, &mut rng);
                let a = fam.apply(env, &rho).unwrap();
                let b = lifted.apply(env, &rho).unwrap();
                assert!(a.dist(&b) < 1e-11);
            }
        }
    }

    #[test]
    fn nonlinear_phase_at_zero_theta_is_identity() {
        let fam = zoo_family("nonlinear_phase", 2, Some(0.0)).unwrap();
        let psi = random_pure(4, RngSeed::new(8));
        assert!(fam.apply(2, &psi).unwrap().dist(&psi) < 1e-12);
    }

    #[test]
    fn nonlinear_phase_preserves_norm_but_not_linearity() {
        let fam = zoo_family("nonlinear_phase", 2, Some(0.7)).unwrap();
        let mut rng = RngSeed::new(9).rng();
        for _ in 0..20 {
            let psi = crate::linalg::random::random_pure_with(4, &mut rng);
            let out = fam.apply(2, &psi).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    // Eigenvalue oracle: (T (x) id) on the d=2 Bell projector has minimum
    // eigenvalue -1/2.
    #[test]
    fn transpose_on_bell_is_negative() {
        let fam = zoo_family("transpose_mixed", 2, None).unwrap();
        let raw = fam.apply_raw(2, &bell_projector(2)).unwrap();
        let min_eig = min_eigenvalue(&raw).unwrap();
        assert!((min_eig + 0.5).abs() < 1e-10, "min eigenvalue {min_eig}");

        match fam.apply(2, &bell_projector(2)) {
            Err(Error::InvalidOutputState { min_eigenvalue: Some(m), .. }) => {
                assert!((m + 0.5).abs() < 1e-10)
            }
            other => panic!("expected InvalidOutputState with eigenvalue, got {other:?}"),
        }
    }

    #[test]
    fn transpose_on_product_inputs_is_fine() {
        let fam = zoo_family("transpose_mixed", 2, None).unwrap();
        let mut rng = RngSeed::new(10).rng();
        let rho = random_density_with(2, &mut rng).tensor(&random_density_with(3, &mut rng));
        assert!(fam.apply(3, &rho).is_ok());
    }
}
