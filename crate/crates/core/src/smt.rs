//! State-measurement theories: states, measurement outcomes, a probability
//! rule, and a post-measurement update rule, with spatial composition, and
//! no dynamics. Instantiated for pure (normalized kets, projector outcomes,
//! p = <psi|m|psi>, u = m psi / sqrt(p)) and mixed (density operators,
//! p = Tr(rho pi), u = pi rho pi / p) finite-dimensional quantum theory.
//!
//! Measurement outcomes are projectors in both theories. Below the
//! zero-probability threshold the update rule is treated as undefined and
//! surfaced as [`Error::ZeroProbabilityUpdate`], never as a NaN state.
//!
//! No identification between A (x) B and B (x) A is assumed anywhere; swapping
//! factors is an explicit operator ([`crate::linalg::swap`]).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{min_eigenvalue, ComplexMatrix, EQ_TOL};

/// Probabilities at or below this are treated as zero: the partial update
/// function is undefined there.
pub const ZERO_PROB_THRESHOLD: f64 = 1e-12;

/// Which quantum state-measurement theory a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryTag {
    Pure,
    Mixed,
}

/// A system as an ordered list of tensor factors. Composition concatenates
/// factor lists, so associativity holds on the nose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemLabel {
    dims: Vec<usize>,
}

impl SystemLabel {
    pub fn new(dims: Vec<usize>) -> Result<Self, Error> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(
                "system label needs a non-empty list of positive dimensions".into(),
            ));
        }
        Ok(Self { dims })
    }

    pub fn single(dim: usize) -> Self {
        Self::new(vec![dim]).expect("positive dimension")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn compose(&self, other: &SystemLabel) -> SystemLabel {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SystemLabel { dims }
    }
}

/// Normalized ket on a labeled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    system: SystemLabel,
    ket: ComplexMatrix,
}

impl PureState {
    pub fn new(system: SystemLabel, ket: ComplexMatrix) -> Result<Self, Error> {
        if !ket.is_ket() || ket.rows() != system.total_dim() {
            return Err(Error::dims(
                "pure state ket",
                format!("{}x{}", ket.rows(), ket.cols()),
                format!("{}x1", system.total_dim()),
            ));
        }
        if !ket.is_finite() {
            return Err(Error::InvalidState {
                details: "ket has non-finite entries".into(),
            });
        }
        let norm = ket.norm();
        if (norm - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidState {
                details: format!("ket norm {norm} is not 1 within {EQ_TOL:.0e}"),
            });
        }
        Ok(Self { system, ket })
    }

    pub fn system(&self) -> &SystemLabel {
        &self.system
    }

    pub fn ket(&self) -> &ComplexMatrix {
        &self.ket
    }

    /// Density-operator image |psi><psi|.
    pub fn to_mixed(&self) -> MixedState {
        MixedState::new(self.system.clone(), self.ket.projector())
            .expect("projector of a unit ket is a state")
    }
}

/// Density operator on a labeled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedState {
    system: SystemLabel,
    rho: ComplexMatrix,
}

impl MixedState {
    pub fn new(system: SystemLabel, rho: ComplexMatrix) -> Result<Self, Error> {
        let d = system.total_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::dims(
                "density matrix",
                format!("{}x{}", rho.rows(), rho.cols()),
                format!("{d}x{d}"),
            ));
        }
        if !rho.is_finite() {
            return Err(Error::InvalidState {
                details: "density matrix has non-finite entries".into(),
            });
        }
        let herm = rho.hermiticity_defect();
        if herm > EQ_TOL {
            return Err(Error::InvalidState {
                details: format!("density matrix asymmetry {herm:.3e} exceeds {EQ_TOL:.0e}"),
            });
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidState {
                details: format!("trace {tr} is not 1 within {EQ_TOL:.0e}"),
            });
        }
        let min_eig = min_eigenvalue(&rho)?;
        if min_eig < -EQ_TOL {
            return Err(Error::InvalidState {
                details: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { system, rho })
    }

    pub fn system(&self) -> &SystemLabel {
        &self.system
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }
}

/// Projective measurement outcome on a labeled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    system: SystemLabel,
    projector: ComplexMatrix,
}

impl Outcome {
    pub fn new(system: SystemLabel, projector: ComplexMatrix) -> Result<Self, Error> {
        let d = system.total_dim();
        if projector.rows() != d || projector.cols() != d {
            return Err(Error::dims(
                "outcome projector",
                format!("{}x{}", projector.rows(), projector.cols()),
                format!("{d}x{d}"),
            ));
        }
        let herm = projector.hermiticity_defect();
        if herm > EQ_TOL {
            return Err(Error::NotHermitian {
                defect: herm,
                tolerance: EQ_TOL,
            });
        }
        let idem = projector.matmul(&projector).dist(&projector);
        if idem > EQ_TOL {
            return Err(Error::InvalidState {
                details: format!("projector idempotency defect {idem:.3e}"),
            });
        }
        Ok(Self { system, projector })
    }

    pub fn system(&self) -> &SystemLabel {
        &self.system
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }
}

/// State of either theory, for theory-generic plumbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theory", rename_all = "lowercase")]
pub enum State {
    Pure(PureState),
    Mixed(MixedState),
}

impl State {
    pub fn theory(&self) -> TheoryTag {
        match self {
            State::Pure(_) => TheoryTag::Pure,
            State::Mixed(_) => TheoryTag::Mixed,
        }
    }

    pub fn system(&self) -> &SystemLabel {
        match self {
            State::Pure(s) => s.system(),
            State::Mixed(s) => s.system(),
        }
    }
}

/// The null measurement: the identity projector, which every state passes
/// with probability 1 and which updates nothing.
pub fn null_outcome(system: SystemLabel) -> Outcome {
    let d = system.total_dim();
    Outcome {
        system,
        projector: ComplexMatrix::identity(d),
    }
}

fn check_same_system(a: &SystemLabel, b: &SystemLabel) -> Result<(), Error> {
    if a.total_dim() != b.total_dim() {
        return Err(Error::dims(
            "state/outcome systems",
            a.total_dim(),
            b.total_dim(),
        ));
    }
    Ok(())
}

fn clamp_probability(p: f64) -> Result<f64, Error> {
    if !(-EQ_TOL..=1.0 + EQ_TOL).contains(&p) {
        return Err(Error::InvalidState {
            details: format!("probability {p} outside [0, 1] beyond tolerance"),
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Born rule for pure states: <psi| m |psi>.
pub fn born_pure(s: &PureState, m: &Outcome) -> Result<f64, Error> {
    check_same_system(s.system(), m.system())?;
    let p = s.ket.dagger().matmul(&m.projector).matmul(&s.ket).get(0, 0).re;
    clamp_probability(p)
}

/// Projection postulate for pure states: m|psi> / sqrt(p).
pub fn update_pure(s: &PureState, m: &Outcome) -> Result<PureState, Error> {
    let p = born_pure(s, m)?;
    if p <= ZERO_PROB_THRESHOLD {
        return Err(Error::ZeroProbabilityUpdate { probability: p });
    }
    let ket = m.projector.matmul(&s.ket).normalized();
    PureState::new(s.system.clone(), ket)
}

/// Born rule for mixed states: Tr(rho pi).
pub fn born_mixed(s: &MixedState, m: &Outcome) -> Result<f64, Error> {
    check_same_system(s.system(), m.system())?;
    let p = s.rho.matmul(&m.projector).trace().re;
    clamp_probability(p)
}

/// Projection postulate for mixed states: pi rho pi / p, renormalized.
pub fn update_mixed(s: &MixedState, m: &Outcome) -> Result<MixedState, Error> {
    let p = born_mixed(s, m)?;
    if p <= ZERO_PROB_THRESHOLD {
        return Err(Error::ZeroProbabilityUpdate { probability: p });
    }
    let raw = m.projector.matmul(&s.rho).matmul(&m.projector);
    let tr = raw.trace().re;
    MixedState::new(s.system.clone(), raw.scale_re(1.0 / tr))
}

/// Spatial composition of states; both must belong to the same theory.
pub fn compose_states(a: &State, b: &State) -> Result<State, Error> {
    match (a, b) {
        (State::Pure(x), State::Pure(y)) => Ok(State::Pure(compose_pure(x, y))),
        (State::Mixed(x), State::Mixed(y)) => Ok(State::Mixed(compose_mixed(x, y))),
        _ => Err(Error::TheoryMismatch),
    }
}

pub fn compose_pure(a: &PureState, b: &PureState) -> PureState {
    PureState {
        system: a.system.compose(&b.system),
        ket: a.ket.tensor(&b.ket),
    }
}

pub fn compose_mixed(a: &MixedState, b: &MixedState) -> MixedState {
    MixedState {
        system: a.system.compose(&b.system),
        rho: a.rho.tensor(&b.rho),
    }
}

/// Spatial composition of measurement outcomes.
pub fn compose_outcomes(a: &Outcome, b: &Outcome) -> Outcome {
    Outcome {
        system: a.system.compose(&b.system),
        projector: a.projector.tensor(&b.projector),
    }
}

/// Wire format for states and outcomes:
/// `{"theory":"pure"|"mixed","dims":[...],"matrix":<matrix JSON>}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub theory: TheoryTag,
    pub dims: Vec<usize>,
    pub matrix: ComplexMatrix,
}

impl StateJson {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(s) => StateJson {
                theory: TheoryTag::Pure,
                dims: s.system.dims().to_vec(),
                matrix: s.ket.clone(),
            },
            State::Mixed(s) => StateJson {
                theory: TheoryTag::Mixed,
                dims: s.system.dims().to_vec(),
                matrix: s.rho.clone(),
            },
        }
    }

    pub fn into_state(self) -> Result<State, Error> {
        let system = SystemLabel::new(self.dims)?;
        match self.theory {
            TheoryTag::Pure => Ok(State::Pure(PureState::new(system, self.matrix)?)),
            TheoryTag::Mixed => Ok(State::Mixed(MixedState::new(system, self.matrix)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_projector_with, random_density_with, random_pure_with};
    use crate::linalg::{bell_state, Complex64, RngSeed};

    fn qubit(ket: ComplexMatrix) -> PureState {
        PureState::new(SystemLabel::single(ket.rows()), ket).unwrap()
    }

    fn plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        qubit(ComplexMatrix::from_real(2, 1, &[s, s]))
    }

    fn proj(dim: usize, index: usize) -> Outcome {
        Outcome::new(
            SystemLabel::single(dim),
            ComplexMatrix::basis_ket(dim, index).projector(),
        )
        .unwrap()
    }

    #[test]
    fn null_outcome_is_identity_and_lawful() {
        let system = SystemLabel::single(2);
        let null = null_outcome(system.clone());
        assert_eq!(*null.projector(), ComplexMatrix::identity(2));

        let mut rng = RngSeed::new(1).rng();
        for _ in 0..50 {
            let psi = qubit(random_pure_with(3, &mut rng));
            let null3 = null_outcome(SystemLabel::single(3));
            assert!((born_pure(&psi, &null3).unwrap() - 1.0).abs() < 1e-12);
            let updated = update_pure(&psi, &null3).unwrap();
            assert!(updated.ket().dist(psi.ket()) < 1e-12);

            let rho = MixedState::new(SystemLabel::single(3), random_density_with(3, &mut rng)).unwrap();
            assert!((born_mixed(&rho, &null3).unwrap() - 1.0).abs() < 1e-12);
            let um = update_mixed(&rho, &null3).unwrap();
            assert!(um.rho().dist(rho.rho()) < 1e-12);
        }
    }

    #[test]
    fn born_pure_basics() {
        let zero = qubit(ComplexMatrix::basis_ket(2, 0));
        assert!((born_pure(&zero, &proj(2, 0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((born_pure(&plus(), &proj(2, 0)).unwrap() - 0.5).abs() < 1e-12);
    }

    // For the Bell state, the probability of a rank-one outcome on the
    // environment half is always 1/d.
    #[test]
    fn bell_environment_probability_is_one_over_d() {
        for d in 2..=5usize {
            let mut rng = RngSeed::new(d as u64).rng();
            let bell = PureState::new(SystemLabel::new(vec![d, d]).unwrap(), bell_state(d)).unwrap();
            for _ in 0..20 {
                let psi = random_pure_with(d, &mut rng);
                let conj_proj = psi.conjugate().projector();
                let outcome = Outcome::new(
                    SystemLabel::new(vec![d, d]).unwrap(),
                    ComplexMatrix::identity(d).tensor(&conj_proj),
                )
                .unwrap();
                let p = born_pure(&bell, &outcome).unwrap();
                assert!((p - 1.0 / d as f64).abs() < 1e-10, "p={p} at d={d}");
            }
        }
    }

    // Measuring the conjugate rank-one outcome on the environment half of a
    // Bell pair leaves |psi> (x) |psi*>.
    #[test]
    fn bell_update_teleports_the_conjugate_state() {
        for d in 2..=4usize {
            let mut rng = RngSeed::new(100 + d as u64).rng();
            let label = SystemLabel::new(vec![d, d]).unwrap();
            let bell = PureState::new(label.clone(), bell_state(d)).unwrap();
            for _ in 0..25 {
                let psi = random_pure_with(d, &mut rng);
                let conj = psi.conjugate();
                let outcome = Outcome::new(
                    label.clone(),
                    ComplexMatrix::identity(d).tensor(&conj.projector()),
                )
                .unwrap();
                let updated = update_pure(&bell, &outcome).unwrap();
                let expect = psi.tensor(&conj);
                assert!(updated.ket().dist(&expect) < 1e-10);
            }
        }
    }

    #[test]
    fn update_pure_on_orthogonal_outcome_is_undefined() {
        let zero = qubit(ComplexMatrix::basis_ket(2, 0));
        match update_pure(&zero, &proj(2, 1)) {
            Err(Error::ZeroProbabilityUpdate { .. }) => {}
            other => panic!("expected ZeroProbabilityUpdate, got {other:?}"),
        }
    }

    #[test]
    fn update_pure_projects_and_renormalizes() {
        let updated = update_pure(&plus(), &proj(2, 0)).unwrap();
        assert!(updated.ket().dist(&ComplexMatrix::basis_ket(2, 0)) < 1e-12);
    }

    #[test]
    fn update_mixed_basics() {
        let label = SystemLabel::single(2);
        let mixed = MixedState::new(label.clone(), ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let updated = update_mixed(&mixed, &proj(2, 0)).unwrap();
        assert!(updated.rho().dist(&ComplexMatrix::basis_ket(2, 0).projector()) < 1e-12);
        assert!((born_mixed(&mixed, &null_outcome(label)).unwrap() - 1.0).abs() < 1e-12);
    }

    // Trace oracle: p(I/d, pi) = rank(pi)/d, where the rank is known from
    // the sampler rather than recomputed.
    #[test]
    fn born_mixed_on_maximally_mixed_counts_rank() {
        let d = 5;
        let label = SystemLabel::single(d);
        let maximally_mixed =
            MixedState::new(label.clone(), ComplexMatrix::identity(d).scale_re(1.0 / d as f64))
                .unwrap();
        let mut rng = RngSeed::new(7).rng();
        for rank in 1..=d {
            let pi = haar_projector_with(d, rank, &mut rng);
            let outcome = Outcome::new(label.clone(), pi).unwrap();
            let p = born_mixed(&maximally_mixed, &outcome).unwrap();
            assert!((p - rank as f64 / d as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_respects_theories_and_labels() {
        let zero = State::Pure(qubit(ComplexMatrix::basis_ket(2, 0)));
        let one = State::Pure(qubit(ComplexMatrix::basis_ket(2, 1)));
        let composed = compose_states(&zero, &one).unwrap();
        match &composed {
            State::Pure(s) => {
                assert_eq!(s.system().dims(), &[2, 2]);
                assert!(s.ket().dist(&ComplexMatrix::basis_ket(4, 1)) < 1e-15);
            }
            _ => panic!("expected pure"),
        }
        let mixed = State::Mixed(
            MixedState::new(SystemLabel::single(2), ComplexMatrix::identity(2).scale_re(0.5))
                .unwrap(),
        );
        assert!(matches!(compose_states(&zero, &mixed), Err(Error::TheoryMismatch)));
    }

    #[test]
    fn composed_projectors_stay_projectors() {
        let mut rng = RngSeed::new(9).rng();
        for _ in 0..20 {
            let p1 = haar_projector_with(2, 1, &mut rng);
            let p2 = haar_projector_with(3, 2, &mut rng);
            let o = compose_outcomes(
                &Outcome::new(SystemLabel::single(2), p1).unwrap(),
                &Outcome::new(SystemLabel::single(3), p2).unwrap(),
            );
            let pi = o.projector();
            assert!(pi.matmul(pi).dist(pi) < 1e-10);
        }
    }

    // Pure and mixed rules agree along psi -> |psi><psi|.
    #[test]
    fn pure_mixed_consistency() {
        let mut rng = RngSeed::new(31).rng();
        for _ in 0..50 {
            let label = SystemLabel::single(4);
            let psi = PureState::new(label.clone(), random_pure_with(4, &mut rng)).unwrap();
            let pi = haar_projector_with(4, 2, &mut rng);
            let outcome = Outcome::new(label, pi).unwrap();
            let p_pure = born_pure(&psi, &outcome).unwrap();
            let p_mixed = born_mixed(&psi.to_mixed(), &outcome).unwrap();
            assert!((p_pure - p_mixed).abs() < 1e-10);
            if p_pure > 1e-6 {
                let up = update_pure(&psi, &outcome).unwrap();
                let um = update_mixed(&psi.to_mixed(), &outcome).unwrap();
                assert!(up.to_mixed().rho().dist(um.rho()) < 1e-9);
            }
        }
    }

    // Projective repeatability: updating twice with the same outcome is the
    // same as updating once, in both theories.
    #[test]
    fn update_is_repeatable() {
        let mut rng = RngSeed::new(57).rng();
        for _ in 0..30 {
            let label = SystemLabel::single(4);
            let psi = PureState::new(label.clone(), random_pure_with(4, &mut rng)).unwrap();
            let outcome = Outcome::new(label.clone(), haar_projector_with(4, 2, &mut rng)).unwrap();
            if born_pure(&psi, &outcome).unwrap() > 1e-6 {
                let once = update_pure(&psi, &outcome).unwrap();
                let twice = update_pure(&once, &outcome).unwrap();
                assert!(once.ket().dist(twice.ket()) < 1e-10);
            }
            let rho = MixedState::new(label.clone(), random_density_with(4, &mut rng)).unwrap();
            if born_mixed(&rho, &outcome).unwrap() > 1e-6 {
                let once = update_mixed(&rho, &outcome).unwrap();
                let twice = update_mixed(&once, &outcome).unwrap();
                assert!(once.rho().dist(twice.rho()) < 1e-10);
            }
        }
    }

    #[test]
    fn probabilities_stay_in_range() {
        let mut rng = RngSeed::new(77).rng();
        for _ in 0..200 {
            let label = SystemLabel::single(3);
            let psi = PureState::new(label.clone(), random_pure_with(3, &mut rng)).unwrap();
            let outcome = Outcome::new(label, haar_projector_with(3, 2, &mut rng)).unwrap();
            let p = born_pure(&psi, &outcome).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn state_json_round_trip() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let state = State::Pure(qubit(ComplexMatrix::new(
            2,
            1,
            vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)],
        )));
        let json = serde_json::to_string(&StateJson::from_state(&state)).unwrap();
        assert!(json.contains(r#""theory":"pure""#));
        let parsed: StateJson = serde_json::from_str(&json).unwrap();
        let back = parsed.into_state().unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn invalid_states_are_rejected() {
        let label = SystemLabel::single(2);
        let unnormalized = ComplexMatrix::from_real(2, 1, &[1.0, 1.0]);
        assert!(PureState::new(label.clone(), unnormalized).is_err());

        let negative = ComplexMatrix::diagonal(&[Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]);
        assert!(MixedState::new(label.clone(), negative).is_err());

        let not_idem = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(Outcome::new(label, not_idem).is_err());
    }
}
