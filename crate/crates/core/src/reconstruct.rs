//! Extraction of the canonical linear representative of a transformation
//! family: the operator recovered by Bell-state vectorization in the pure
//! theory, and the Choi matrix in the mixed theory, together with
//! equivalence checking, swap compatibility, and a combined certificate.
//!
//! Extraction never assumes the family passed the axioms; it evaluates the
//! raw rule on a Bell input, which stays well-defined (a "nearest linear
//! shadow") even for violating candidates. [`certify`] runs the axiom
//! checks first and only then trusts the classification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::latrans::{check_all, AxiomReport, SamplingConfig, TransFamily, Witness};
use crate::linalg::random::{random_density_with, random_pure_with};
use crate::linalg::{
    bell_projector, bell_state, eigvals_hermitian, min_eigenvalue, swap, trace_distance,
    ComplexMatrix, EQ_TOL,
};
use crate::smt::TheoryTag;

/// Classification of a pure-theory extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorClass {
    Unitary,
    Isometry,
    NonIsometric,
}

/// Operator recovered from a pure family via Bell-state vectorization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractedOperator {
    pub matrix: ComplexMatrix,
    pub isometry_defect: f64,
    pub classification: OperatorClass,
}

/// Choi matrix d * L(Bell projector) of a mixed family, on B (x) A.
///
/// The channel action is `rho -> Tr_A[J (I_B (x) rho^T)]`; positivity of J
/// certifies complete positivity and `Tr_B J = I_A` certifies trace
/// preservation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub matrix: ComplexMatrix,
    pub dim_in: usize,
    pub dim_out: usize,
    /// Negative part of the spectrum: max(0, -min eigenvalue).
    pub cp_defect: f64,
    /// |Tr_B J - I_A|_F.
    pub tp_defect: f64,
}

impl ChoiMatrix {
    /// Scale-relative complete positivity test:
    /// min eigenvalue >= -tol * trace(J).
    pub fn is_cp(&self, tol: f64) -> bool {
        self.cp_defect <= tol * self.matrix.trace().re.abs().max(1.0)
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_defect <= tol
    }
}

/// Either extraction result, tagged by theory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extracted {
    Operator(ExtractedOperator),
    Choi(ChoiMatrix),
}

impl Extracted {
    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            Extracted::Operator(op) => &op.matrix,
            Extracted::Choi(j) => &j.matrix,
        }
    }
}

/// Recover the linear operator of a pure family: apply the family to one
/// half of a Bell pair and reshape, V = sqrt(d) * unvec(L_A(Bell)).
pub fn extract_pure_operator(family: &TransFamily, tol: f64) -> Result<ExtractedOperator, Error> {
    if family.theory() != TheoryTag::Pure {
        return Err(Error::TheoryMismatch);
    }
    let d_in = family.dim_in();
    let d_out = family.dim_out();
    let chi = family.apply_raw(d_in, &bell_state(d_in))?;
    let matrix = chi.unvec(d_out, d_in)?.scale_re((d_in as f64).sqrt());
    let isometry_defect = matrix.isometry_defect();
    let classification = if isometry_defect <= tol {
        if d_in == d_out {
            OperatorClass::Unitary
        } else {
            OperatorClass::Isometry
        }
    } else {
        OperatorClass::NonIsometric
    };
    Ok(ExtractedOperator {
        matrix,
        isometry_defect,
        classification,
    })
}

/// Recover the Choi matrix of a mixed family: J = d * L_A(Bell projector),
/// with complete-positivity and trace-preservation defects attached.
pub fn extract_choi(family: &TransFamily, _tol: f64) -> Result<ChoiMatrix, Error> {
    if family.theory() != TheoryTag::Mixed {
        return Err(Error::TheoryMismatch);
    }
    let d_in = family.dim_in();
    let d_out = family.dim_out();
    let raw = family.apply_raw(d_in, &bell_projector(d_in))?;
    let matrix = raw.scale_re(d_in as f64);

    let herm = matrix.hermiticity_defect();
    if herm > EQ_TOL * matrix.frobenius_norm().max(1.0) {
        return Err(Error::InvalidState {
            details: format!("Choi candidate asymmetry {herm:.3e}"),
        });
    }
    let min_eig = min_eigenvalue(&matrix)?;
    let cp_defect = (-min_eig).max(0.0);
    let tp_defect = matrix
        .partial_trace(&[d_out, d_in], &[1])?
        .dist(&ComplexMatrix::identity(d_in));
    Ok(ChoiMatrix {
        matrix,
        dim_in: d_in,
        dim_out: d_out,
        cp_defect,
        tp_defect,
    })
}

/// Extraction dispatching on the family's theory.
pub fn extract(family: &TransFamily, tol: f64) -> Result<Extracted, Error> {
    match family.theory() {
        TheoryTag::Pure => Ok(Extracted::Operator(extract_pure_operator(family, tol)?)),
        TheoryTag::Mixed => Ok(Extracted::Choi(extract_choi(family, tol)?)),
    }
}

/// Channel action of a Choi matrix: Tr_A[J (I_B (x) rho^T)].
pub fn apply_choi(j: &ChoiMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    if rho.rows() != j.dim_in || rho.cols() != j.dim_in {
        return Err(Error::dims(
            "apply_choi input",
            format!("{}x{}", rho.rows(), rho.cols()),
            format!("{0}x{0}", j.dim_in),
        ));
    }
    let contracted = j
        .matrix
        .matmul(&ComplexMatrix::identity(j.dim_out).tensor(&rho.transpose()));
    contracted.partial_trace(&[j.dim_out, j.dim_in], &[0])
}

/// The same channel action computed through the Bell-state sandwich,
/// d * (I (x) <Bell|) (J (x) rho) (I (x) |Bell>); kept as an independent
/// route for cross-checking [`apply_choi`].
pub fn apply_choi_sandwich(j: &ChoiMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    if rho.rows() != j.dim_in || rho.cols() != j.dim_in {
        return Err(Error::dims(
            "apply_choi_sandwich input",
            format!("{}x{}", rho.rows(), rho.cols()),
            format!("{0}x{0}", j.dim_in),
        ));
    }
    let bell = bell_state(j.dim_in);
    let cap = ComplexMatrix::identity(j.dim_out).tensor(&bell.dagger());
    let cup = ComplexMatrix::identity(j.dim_out).tensor(&bell);
    let big = j.matrix.tensor(rho);
    Ok(cap.matmul(&big).matmul(&cup).scale_re(j.dim_in as f64))
}

/// Action of the channel extended by an identity environment:
/// (E (x) id_X)(rho) for rho on A (x) X.
pub fn apply_choi_extended(
    j: &ChoiMatrix,
    rho: &ComplexMatrix,
    env_dim: usize,
) -> Result<ComplexMatrix, Error> {
    let n_in = j.dim_in * env_dim;
    if rho.rows() != n_in || rho.cols() != n_in {
        return Err(Error::dims(
            "apply_choi_extended input",
            format!("{}x{}", rho.rows(), rho.cols()),
            format!("{n_in}x{n_in}"),
        ));
    }
    let n_out = j.dim_out * env_dim;
    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for b in 0..j.dim_out {
        for bp in 0..j.dim_out {
            for a in 0..j.dim_in {
                for ap in 0..j.dim_in {
                    let jv = j.matrix.get(b * j.dim_in + a, bp * j.dim_in + ap);
                    if jv == crate::linalg::ZERO {
                        continue;
                    }
                    for x in 0..env_dim {
                        for xp in 0..env_dim {
                            let cur = out.get(b * env_dim + x, bp * env_dim + xp);
                            out.set(
                                b * env_dim + x,
                                bp * env_dim + xp,
                                cur + jv * rho.get(a * env_dim + x, ap * env_dim + xp),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of comparing a family against its extracted representative
/// tensored with identity environments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub env_dims: Vec<usize>,
    pub trials: u64,
    pub max_distance: f64,
    pub tolerance: f64,
    pub verdict: crate::latrans::Verdict,
}

/// Measure sup-distance between L_X and (extracted (x) I_X) over seeded
/// random (possibly entangled) states at the configured environment sizes.
pub fn verify_equivalence(
    family: &TransFamily,
    extracted: &Extracted,
    cfg: &SamplingConfig,
) -> Result<EquivalenceReport, Error> {
    let mut rng = cfg.seed.stream(0x657175);
    let k = cfg.env_dims.len();
    if k == 0 {
        return Err(Error::InvalidArgument("env_dims must be non-empty".into()));
    }
    let mut max_distance = 0.0f64;

    for trial in 0..cfg.trials {
        let dx = cfg.env_dims[(trial as usize) % k];
        match (family.theory(), extracted) {
            (TheoryTag::Pure, Extracted::Operator(op)) => {
                let entangled = rng.gen_bool(cfg.entangled_fraction.clamp(0.0, 1.0));
                let psi = if entangled || dx == 1 {
                    random_pure_with(family.dim_in() * dx, &mut rng)
                } else {
                    random_pure_with(family.dim_in(), &mut rng)
                        .tensor(&random_pure_with(dx, &mut rng))
                };
                let lhs = family.apply_raw(dx, &psi)?;
                let rhs = op
                    .matrix
                    .tensor(&ComplexMatrix::identity(dx))
                    .matmul(&psi);
                max_distance = max_distance.max(lhs.dist(&rhs));
            }
            (TheoryTag::Mixed, Extracted::Choi(j)) => {
                let entangled = rng.gen_bool(cfg.entangled_fraction.clamp(0.0, 1.0));
                let rho = if entangled || dx == 1 {
                    random_density_with(family.dim_in() * dx, &mut rng)
                } else {
                    random_density_with(family.dim_in(), &mut rng)
                        .tensor(&random_density_with(dx, &mut rng))
                };
                let lhs = family.apply_raw(dx, &rho)?;
                let rhs = apply_choi_extended(j, &rho, dx)?;
                // Hermitian trace norm; valid even for non-positive raw outputs.
                let vals = eigvals_hermitian(&lhs.sub_m(&rhs))?;
                max_distance = max_distance.max(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>());
            }
            _ => return Err(Error::TheoryMismatch),
        }
    }

    let verdict = if max_distance <= cfg.tolerance {
        crate::latrans::Verdict::Pass
    } else {
        crate::latrans::Verdict::Fail
    };
    Ok(EquivalenceReport {
        env_dims: cfg.env_dims.clone(),
        trials: cfg.trials,
        max_distance,
        tolerance: cfg.tolerance,
        verdict,
    })
}

/// Report for the swap-compatibility law on mixed families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwapReport {
    pub trials: u64,
    pub max_gap: f64,
    pub tolerance: f64,
    pub verdict: crate::latrans::Verdict,
}

/// Swap compatibility: conjugating the two environment factors by the swap
/// before or after applying the family agrees,
/// L_{XX'}((I (x) S) rho (I (x) S^dag)) = (I (x) S) L_{X'X}(rho) (I (x) S^dag).
pub fn check_swap_compatibility(
    family: &TransFamily,
    cfg: &SamplingConfig,
) -> Result<SwapReport, Error> {
    if family.theory() != TheoryTag::Mixed {
        return Err(Error::TheoryMismatch);
    }
    let mut rng = cfg.seed.stream(0x73776170);
    let k = cfg.env_dims.len();
    if k == 0 {
        return Err(Error::InvalidArgument("env_dims must be non-empty".into()));
    }
    let mut max_gap = 0.0f64;

    for trial in 0..cfg.trials {
        let dx = cfg.env_dims[(trial as usize) % k];
        let dxp = cfg.env_dims[(trial as usize / k) % k];
        // rho lives on A (x) X' (x) X; the swapped version on A (x) X (x) X'.
        let rho = random_density_with(family.dim_in() * dxp * dx, &mut rng);
        let s = swap(dxp, dx); // X' (x) X -> X (x) X'
        let id_a = ComplexMatrix::identity(family.dim_in());
        let id_b = ComplexMatrix::identity(family.dim_out());
        let big_s_in = id_a.tensor(&s);
        let swapped = big_s_in.matmul(&rho).matmul(&big_s_in.dagger());

        let lhs = family.apply_raw(dx * dxp, &swapped)?;
        let out = family.apply_raw(dxp * dx, &rho)?;
        let big_s_out = id_b.tensor(&s);
        let rhs = big_s_out.matmul(&out).matmul(&big_s_out.dagger());

        let vals = eigvals_hermitian(&lhs.sub_m(&rhs))?;
        max_gap = max_gap.max(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>());
    }

    let verdict = if max_gap <= cfg.tolerance {
        crate::latrans::Verdict::Pass
    } else {
        crate::latrans::Verdict::Fail
    };
    Ok(SwapReport {
        trials: cfg.trials,
        max_gap,
        tolerance: cfg.tolerance,
        verdict,
    })
}

/// Verdict of a full certification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertVerdict {
    LocallyApplicable,
    Violating,
}

/// Final classification of a certified family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Unitary,
    Isometry,
    Channel,
}

/// Combined certificate: axiom verdict, extraction defects, and the
/// measured equivalence gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: CertVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_defect: Option<f64>,
    pub equivalence_max_gap: f64,
    pub witnesses: Vec<Witness>,
    pub axioms: crate::latrans::MaxViolations,
    pub extracted: ComplexMatrix,
}

/// Relative eigenvalue threshold for certifying complete positivity.
pub const CP_CERT_TOL: f64 = 1e-8;

/// Run axiom checks, extraction, equivalence, and classification; the
/// classification is only granted when the axioms pass.
pub fn certify(family: &TransFamily, cfg: &SamplingConfig) -> Result<(Certificate, AxiomReport), Error> {
    let report = check_all(family, cfg)?;
    let extracted = extract(family, cfg.tolerance)?;
    let equivalence = verify_equivalence(family, &extracted, cfg)?;

    let mut certificate = Certificate {
        verdict: CertVerdict::Violating,
        classification: None,
        isometry_defect: None,
        cp_defect: None,
        tp_defect: None,
        equivalence_max_gap: equivalence.max_distance,
        witnesses: report.witnesses.clone(),
        axioms: report.max_violation.clone(),
        extracted: extracted.matrix().clone(),
    };

    match &extracted {
        Extracted::Operator(op) => {
            certificate.isometry_defect = Some(op.isometry_defect);
            if report.passed() {
                certificate.verdict = CertVerdict::LocallyApplicable;
                certificate.classification = match op.classification {
                    OperatorClass::Unitary => Some(Classification::Unitary),
                    OperatorClass::Isometry => Some(Classification::Isometry),
                    OperatorClass::NonIsometric => None,
                };
            }
        }
        Extracted::Choi(j) => {
            certificate.cp_defect = Some(j.cp_defect);
            certificate.tp_defect = Some(j.tp_defect);
            if report.passed() {
                certificate.verdict = CertVerdict::LocallyApplicable;
                if j.is_cp(CP_CERT_TOL) && j.is_tp(CP_CERT_TOL) {
                    certificate.classification = Some(Classification::Channel);
                }
            }
        }
    }

    Ok((certificate, report))
}
