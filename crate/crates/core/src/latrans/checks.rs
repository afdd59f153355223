//! Randomized checking of the three local-applicability axioms.
//!
//! Each check draws seeded random states and environment projectors,
//! measures the gap between the two sides of its axiom, and keeps the worst
//! few draws as reproducible witnesses. Evaluators that emit something that
//! is not a state are recorded as witnesses too (with the invalidity
//! magnitude as the gap) rather than aborting the run, so non-CP candidates
//! remain diagnosable.
//!
//! Reports are deterministic functions of the configuration: identical
//! [`SamplingConfig`]s produce identical [`AxiomReport`]s.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::family::TransFamily;
use crate::error::Error;
use crate::linalg::random::{haar_projector_with, random_density_with, random_pure_with};
use crate::linalg::{trace_distance, ComplexMatrix, RngSeed};
use crate::smt::{TheoryTag, ZERO_PROB_THRESHOLD};

/// The three axioms a transformation family must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    StateLocality,
    NoSignaling,
    UpdateCommutativity,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::StateLocality => "state_locality",
            Axiom::NoSignaling => "no_signaling",
            Axiom::UpdateCommutativity => "update_commutativity",
        }
    }

    fn salt(&self) -> u64 {
        match self {
            Axiom::StateLocality => 1,
            Axiom::NoSignaling => 2,
            Axiom::UpdateCommutativity => 3,
        }
    }
}

/// Configuration for randomized axiom checking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Trials per axiom.
    pub trials: u64,
    /// Environment dimensions cycled through during sampling.
    pub env_dims: Vec<usize>,
    pub seed: RngSeed,
    /// Verdict threshold on the per-axiom maximum violation.
    pub tolerance: f64,
    /// Fraction of draws taken globally Haar-random (entangled across A|X)
    /// instead of as products of Haar marginals. Locality violations of
    /// nonlinear rules are invisible on product states alone.
    pub entangled_fraction: f64,
    /// Worst-k witnesses retained per axiom.
    pub max_witnesses: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            env_dims: vec![1, 2, 3, 4],
            seed: RngSeed::new(0),
            tolerance: 1e-8,
            entangled_fraction: 0.5,
            max_witnesses: 5,
        }
    }
}

impl SamplingConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed: RngSeed::new(seed),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("sampling needs at least one trial".into()));
        }
        if self.env_dims.is_empty() || self.env_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(
                "env_dims must be a non-empty list of positive dimensions".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.entangled_fraction) {
            return Err(Error::InvalidArgument("entangled_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Diagnostic payload for an evaluator output that failed state validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvalidOutputInfo {
    pub details: String,
    pub defect: f64,
    pub min_eigenvalue: Option<f64>,
}

/// One retained worst-case draw: enough to reproduce the measured gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub axiom: Axiom,
    pub trial: u64,
    pub env_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_dim_second: Option<usize>,
    pub gap: f64,
    pub state: ComplexMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<ComplexMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invalid_output: Option<InvalidOutputInfo>,
    pub note: String,
}

/// Worst-k retention, canonicalized by gap (descending) then trial index.
#[derive(Debug, Clone)]
struct WitnessBag {
    limit: usize,
    items: Vec<Witness>,
}

impl WitnessBag {
    fn new(limit: usize) -> Self {
        Self { limit, items: Vec::new() }
    }

    fn push(&mut self, w: Witness) {
        self.items.push(w);
        self.items.sort_by(|a, b| {
            b.gap
                .partial_cmp(&a.gap)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.trial.cmp(&b.trial))
        });
        self.items.truncate(self.limit);
    }
}

/// Result of checking a single axiom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomFragment {
    pub axiom: Axiom,
    pub trials: u64,
    pub max_violation: f64,
    /// Draws where the evaluator produced a non-state.
    pub invalid_outputs: u64,
    /// Zero-probability draws skipped (update commutativity only).
    pub skipped_zero_probability: u64,
    pub witnesses: Vec<Witness>,
}

impl AxiomFragment {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_violation <= tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Per-axiom maximum violations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxViolations {
    pub state_locality: f64,
    pub no_signaling: f64,
    pub update_commutativity: f64,
}

impl MaxViolations {
    pub fn overall(&self) -> f64 {
        self.state_locality
            .max(self.no_signaling)
            .max(self.update_commutativity)
    }
}

/// Aggregate outcome of randomized axiom checking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport {
    /// Trials per axiom.
    pub trials: u64,
    pub tolerance: f64,
    pub max_violation: MaxViolations,
    pub invalid_outputs: u64,
    pub skipped_zero_probability: u64,
    /// Worst witnesses across all axioms, gap-descending.
    pub witnesses: Vec<Witness>,
    pub verdict: Verdict,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Axioms whose maximum violation exceeds the tolerance.
    pub fn failing_axioms(&self) -> Vec<Axiom> {
        let mut out = Vec::new();
        if self.max_violation.state_locality > self.tolerance {
            out.push(Axiom::StateLocality);
        }
        if self.max_violation.no_signaling > self.tolerance {
            out.push(Axiom::NoSignaling);
        }
        if self.max_violation.update_commutativity > self.tolerance {
            out.push(Axiom::UpdateCommutativity);
        }
        out
    }
}

/// Distance between two valid states of the given theory: Euclidean norm of
/// the ket difference (pure) or trace distance (mixed).
fn state_distance(theory: TheoryTag, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    match theory {
        TheoryTag::Pure => a.dist(b),
        TheoryTag::Mixed => trace_distance(a, b)
            .expect("validated family outputs are Hermitian states"),
    }
}

/// Probability of the environment outcome `pi` on a state of A (x) X
/// (system dimension `dim_sys`).
fn env_probability(
    theory: TheoryTag,
    dim_sys: usize,
    state: &ComplexMatrix,
    pi: &ComplexMatrix,
) -> f64 {
    let full = ComplexMatrix::identity(dim_sys).tensor(pi);
    match theory {
        TheoryTag::Pure => state.dagger().matmul(&full).matmul(state).get(0, 0).re,
        TheoryTag::Mixed => state.matmul(&full).trace().re,
    }
    .clamp(0.0, 1.0)
}

/// Post-measurement state after the environment outcome `pi`; the caller
/// guarantees the probability is above threshold.
fn env_update(
    theory: TheoryTag,
    dim_sys: usize,
    state: &ComplexMatrix,
    pi: &ComplexMatrix,
) -> ComplexMatrix {
    let full = ComplexMatrix::identity(dim_sys).tensor(pi);
    match theory {
        TheoryTag::Pure => full.matmul(state).normalized(),
        TheoryTag::Mixed => {
            let raw = full.matmul(state).matmul(&full);
            let tr = raw.trace().re;
            raw.scale_re(1.0 / tr)
        }
    }
}

/// Random state of the theory on a single system of dimension `d`.
fn sample_state(theory: TheoryTag, d: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    match theory {
        TheoryTag::Pure => random_pure_with(d, rng),
        TheoryTag::Mixed => random_density_with(d, rng),
    }
}

/// Random state on A (x) X: globally Haar with probability
/// `entangled_fraction`, otherwise a product of Haar marginals.
fn sample_bipartite(
    theory: TheoryTag,
    dim_a: usize,
    dim_x: usize,
    entangled_fraction: f64,
    rng: &mut ChaCha12Rng,
) -> ComplexMatrix {
    if dim_x == 1 {
        return sample_state(theory, dim_a, rng);
    }
    let entangled = rng.gen::<f64>() < entangled_fraction;
    if entangled {
        sample_state(theory, dim_a * dim_x, rng)
    } else {
        match theory {
            TheoryTag::Pure => sample_state(theory, dim_a, rng).tensor(&sample_state(theory, dim_x, rng)),
            TheoryTag::Mixed => sample_state(theory, dim_a, rng).tensor(&sample_state(theory, dim_x, rng)),
        }
    }
}

/// Environment projector with Haar subspace and uniformly drawn rank.
fn sample_projector(dim_x: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    let rank = rng.gen_range(1..=dim_x);
    haar_projector_with(dim_x, rank, rng)
}

fn invalid_witness(
    axiom: Axiom,
    trial: u64,
    env_dim: usize,
    env_dim_second: Option<usize>,
    state: &ComplexMatrix,
    outcome: Option<&ComplexMatrix>,
    err: &Error,
    note: &str,
) -> Option<Witness> {
    if let Error::InvalidOutputState { details, defect, min_eigenvalue } = err {
        let gap = if defect.is_finite() { *defect } else { 1.0 };
        Some(Witness {
            axiom,
            trial,
            env_dim,
            env_dim_second,
            gap,
            state: state.clone(),
            outcome: outcome.cloned(),
            invalid_output: Some(InvalidOutputInfo {
                details: details.clone(),
                defect: *defect,
                min_eigenvalue: *min_eigenvalue,
            }),
            note: note.to_string(),
        })
    } else {
        None
    }
}

/// State locality: L_X(psi (x) phi) = L_[-](psi) (x) phi on products, and
/// L_{XX'}(psi_AX (x) phi_X') = L_X(psi_AX) (x) phi_X'.
pub fn check_state_locality(family: &TransFamily, cfg: &SamplingConfig) -> Result<AxiomFragment, Error> {
    cfg.validate()?;
    let axiom = Axiom::StateLocality;
    let mut rng = cfg.seed.stream(axiom.salt());
    let theory = family.theory();
    let k = cfg.env_dims.len();
    let mut bag = WitnessBag::new(cfg.max_witnesses);
    let mut max_violation = 0.0f64;
    let mut invalid = 0u64;

    for trial in 0..cfg.trials {
        let dx = cfg.env_dims[(trial as usize) % k];
        let dxp = cfg.env_dims[(trial as usize / k) % k];

        // Product part: psi_A (x) phi_X against L_[-](psi) (x) phi.
        let psi = sample_state(theory, family.dim_in(), &mut rng);
        let phi = sample_state(theory, dx, &mut rng);
        let product = psi.tensor(&phi);
        let mut record_gap = |gap: f64,
                              state: &ComplexMatrix,
                              env: usize,
                              env2: Option<usize>,
                              note: &str,
                              bag: &mut WitnessBag,
                              max_violation: &mut f64| {
            if gap > *max_violation {
                *max_violation = gap;
            }
            if gap > cfg.tolerance {
                bag.push(Witness {
                    axiom,
                    trial,
                    env_dim: env,
                    env_dim_second: env2,
                    gap,
                    state: state.clone(),
                    outcome: None,
                    invalid_output: None,
                    note: note.to_string(),
                });
            }
        };

        match (family.apply(dx, &product), family.apply(1, &psi)) {
            (Ok(lhs), Ok(base)) => {
                let rhs = base.tensor(&phi);
                let gap = state_distance(theory, &lhs, &rhs);
                record_gap(gap, &product, dx, None, "product locality", &mut bag, &mut max_violation);
            }
            (lhs, base) => {
                for err in [lhs.err(), base.err()].into_iter().flatten() {
                    if let Some(w) =
                        invalid_witness(axiom, trial, dx, None, &product, None, &err, "product locality")
                    {
                        invalid += 1;
                        max_violation = max_violation.max(w.gap);
                        bag.push(w);
                    } else {
                        return Err(err);
                    }
                }
            }
        }

        // Extension part: psi_AX (x) phi_X' against L_X(psi_AX) (x) phi_X'.
        let psi_ax = sample_bipartite(theory, family.dim_in(), dx, cfg.entangled_fraction, &mut rng);
        let phi_xp = sample_state(theory, dxp, &mut rng);
        let extended = psi_ax.tensor(&phi_xp);
        match (family.apply(dx * dxp, &extended), family.apply(dx, &psi_ax)) {
            (Ok(lhs), Ok(mid)) => {
                let rhs = mid.tensor(&phi_xp);
                let gap = state_distance(theory, &lhs, &rhs);
                record_gap(
                    gap,
                    &extended,
                    dx,
                    Some(dxp),
                    "extension locality",
                    &mut bag,
                    &mut max_violation,
                );
            }
            (lhs, mid) => {
                for err in [lhs.err(), mid.err()].into_iter().flatten() {
                    if let Some(w) = invalid_witness(
                        axiom,
                        trial,
                        dx,
                        Some(dxp),
                        &extended,
                        None,
                        &err,
                        "extension locality",
                    ) {
                        invalid += 1;
                        max_violation = max_violation.max(w.gap);
                        bag.push(w);
                    } else {
                        return Err(err);
                    }
                }
            }
        }
    }

    Ok(AxiomFragment {
        axiom,
        trials: cfg.trials,
        max_violation,
        invalid_outputs: invalid,
        skipped_zero_probability: 0,
        witnesses: bag.items,
    })
}

/// No signaling: environment outcome probabilities are untouched by L.
pub fn check_no_signaling(family: &TransFamily, cfg: &SamplingConfig) -> Result<AxiomFragment, Error> {
    cfg.validate()?;
    let axiom = Axiom::NoSignaling;
    let mut rng = cfg.seed.stream(axiom.salt());
    let theory = family.theory();
    let k = cfg.env_dims.len();
    let mut bag = WitnessBag::new(cfg.max_witnesses);
    let mut max_violation = 0.0f64;
    let mut invalid = 0u64;

    for trial in 0..cfg.trials {
        let dx = cfg.env_dims[(trial as usize) % k];
        let state = sample_bipartite(theory, family.dim_in(), dx, cfg.entangled_fraction, &mut rng);
        let pi = sample_projector(dx, &mut rng);
        let p_before = env_probability(theory, family.dim_in(), &state, &pi);
        match family.apply(dx, &state) {
            Ok(out) => {
                let p_after = env_probability(theory, family.dim_out(), &out, &pi);
                let gap = (p_before - p_after).abs();
                if gap > max_violation {
                    max_violation = gap;
                }
                if gap > cfg.tolerance {
                    bag.push(Witness {
                        axiom,
                        trial,
                        env_dim: dx,
                        env_dim_second: None,
                        gap,
                        state: state.clone(),
                        outcome: Some(pi.clone()),
                        invalid_output: None,
                        note: format!("p before {p_before:.6} vs after {p_after:.6}"),
                    });
                }
            }
            Err(err) => {
                if let Some(w) =
                    invalid_witness(axiom, trial, dx, None, &state, Some(&pi), &err, "no signaling")
                {
                    invalid += 1;
                    max_violation = max_violation.max(w.gap);
                    bag.push(w);
                } else {
                    return Err(err);
                }
            }
        }
    }

    Ok(AxiomFragment {
        axiom,
        trials: cfg.trials,
        max_violation,
        invalid_outputs: invalid,
        skipped_zero_probability: 0,
        witnesses: bag.items,
    })
}

/// Update commutativity: updating the environment before or after applying
/// L gives the same state.
pub fn check_update_commutativity(
    family: &TransFamily,
    cfg: &SamplingConfig,
) -> Result<AxiomFragment, Error> {
    cfg.validate()?;
    let axiom = Axiom::UpdateCommutativity;
    let mut rng = cfg.seed.stream(axiom.salt());
    let theory = family.theory();
    let k = cfg.env_dims.len();
    let mut bag = WitnessBag::new(cfg.max_witnesses);
    let mut max_violation = 0.0f64;
    let mut invalid = 0u64;
    let mut skipped = 0u64;

    for trial in 0..cfg.trials {
        let dx = cfg.env_dims[(trial as usize) % k];
        let state = sample_bipartite(theory, family.dim_in(), dx, cfg.entangled_fraction, &mut rng);
        let pi = sample_projector(dx, &mut rng);

        let p = env_probability(theory, family.dim_in(), &state, &pi);
        if p <= ZERO_PROB_THRESHOLD {
            skipped += 1;
            continue;
        }
        let updated_first = env_update(theory, family.dim_in(), &state, &pi);

        let transformed = match family.apply(dx, &state) {
            Ok(out) => out,
            Err(err) => {
                if let Some(w) = invalid_witness(
                    axiom,
                    trial,
                    dx,
                    None,
                    &state,
                    Some(&pi),
                    &err,
                    "update commutativity (transform side)",
                ) {
                    invalid += 1;
                    max_violation = max_violation.max(w.gap);
                    bag.push(w);
                    continue;
                }
                return Err(err);
            }
        };

        let p_out = env_probability(theory, family.dim_out(), &transformed, &pi);
        if p_out <= ZERO_PROB_THRESHOLD {
            // Defined on one side of the axiom, undefined on the other.
            let gap = 1.0;
            max_violation = max_violation.max(gap);
            bag.push(Witness {
                axiom,
                trial,
                env_dim: dx,
                env_dim_second: None,
                gap,
                state: state.clone(),
                outcome: Some(pi.clone()),
                invalid_output: None,
                note: format!(
                    "update defined before L (p = {p:.3e}) but undefined after (p = {p_out:.3e})"
                ),
            });
            continue;
        }
        let lhs = env_update(theory, family.dim_out(), &transformed, &pi);

        let rhs = match family.apply(dx, &updated_first) {
            Ok(out) => out,
            Err(err) => {
                if let Some(w) = invalid_witness(
                    axiom,
                    trial,
                    dx,
                    None,
                    &updated_first,
                    Some(&pi),
                    &err,
                    "update commutativity (update side)",
                ) {
                    invalid += 1;
                    max_violation = max_violation.max(w.gap);
                    bag.push(w);
                    continue;
                }
                return Err(err);
            }
        };

        let gap = state_distance(theory, &lhs, &rhs);
        if gap > max_violation {
            max_violation = gap;
        }
        if gap > cfg.tolerance {
            bag.push(Witness {
                axiom,
                trial,
                env_dim: dx,
                env_dim_second: None,
                gap,
                state,
                outcome: Some(pi),
                invalid_output: None,
                note: "update before vs after".to_string(),
            });
        }
    }

    Ok(AxiomFragment {
        axiom,
        trials: cfg.trials,
        max_violation,
        invalid_outputs: invalid,
        skipped_zero_probability: skipped,
        witnesses: bag.items,
    })
}

/// Run all three axiom checks and merge the fragments into a verdict.
pub fn check_all(family: &TransFamily, cfg: &SamplingConfig) -> Result<AxiomReport, Error> {
    let locality = check_state_locality(family, cfg)?;
    let signaling = check_no_signaling(family, cfg)?;
    let update = check_update_commutativity(family, cfg)?;
    Ok(merge_fragments(cfg, locality, signaling, update))
}

/// Merge per-axiom fragments; associative and order-insensitive apart from
/// the canonical witness ordering (gap descending, then trial).
pub fn merge_fragments(
    cfg: &SamplingConfig,
    locality: AxiomFragment,
    signaling: AxiomFragment,
    update: AxiomFragment,
) -> AxiomReport {
    let max_violation = MaxViolations {
        state_locality: locality.max_violation,
        no_signaling: signaling.max_violation,
        update_commutativity: update.max_violation,
    };
    let invalid_outputs =
        locality.invalid_outputs + signaling.invalid_outputs + update.invalid_outputs;
    let skipped = locality.skipped_zero_probability
        + signaling.skipped_zero_probability
        + update.skipped_zero_probability;

    let mut witnesses: Vec<Witness> = Vec::new();
    witnesses.extend(locality.witnesses);
    witnesses.extend(signaling.witnesses);
    witnesses.extend(update.witnesses);
    witnesses.sort_by(|a, b| {
        b.gap
            .partial_cmp(&a.gap)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.trial.cmp(&b.trial))
            .then(a.axiom.salt().cmp(&b.axiom.salt()))
    });
    witnesses.truncate(cfg.max_witnesses);

    let verdict = if max_violation.overall() <= cfg.tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    AxiomReport {
        trials: cfg.trials,
        tolerance: cfg.tolerance,
        max_violation,
        invalid_outputs,
        skipped_zero_probability: skipped,
        witnesses,
        verdict,
    }
}
