//! Quantum switch over two or more identical teleportation channels.
//!
//! The joint system ⊗ control space is ordered system-major: basis index
//! `a * d + k` for system level `a` and control (pathway) index `k`. Control
//! basis state `|k⟩` selects the `k`-th permutation in lexicographic order, and a
//! pathway `π` applies channel `π[0]` first, then `π[1]`, and so on. For two
//! paths that means `|0⟩` runs "first A then B" and `|1⟩` the reverse.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix, PureStateVector, C64};
use crate::pauli::{DepolarizingChannel, PauliOperator, PauliWeights, P_MAX};

/// Post-selection probabilities below this are reported as degenerate.
pub const DEGENERATE_PROBABILITY: f64 = 1e-12;

/// Largest supported number of pathways.
pub const MAX_PATHS: usize = 4;

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Self::Even => 1.0,
            Self::Odd => -1.0,
        }
    }
}

/// A channel ordering in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
    parity: Parity,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(Error::OutOfRange(format!("{mapping:?} is not a permutation")));
            }
        }
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| mapping[i] > mapping[j])
            .count();
        let parity = if inversions % 2 == 0 { Parity::Even } else { Parity::Odd };
        Ok(Self { mapping, parity })
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.mapping.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "A{}", m + 1)?;
        }
        Ok(())
    }
}

/// All permutations of `0..n` in lexicographic order; index `k` labels control state `|k⟩`.
pub fn enumerate_permutations(n: usize) -> Result<Vec<Permutation>> {
    if !(2..=MAX_PATHS).contains(&n) {
        return Err(Error::OutOfRange(format!("{n} pathways (supported: 2..={MAX_PATHS})")));
    }
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(factorial(n));
    loop {
        out.push(Permutation::new(current.clone())?);
        // next lexicographic permutation
        let Some(i) = (0..n - 1).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(out)
}

/// Pure control state over the `n!` pathways.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlState {
    state: PureStateVector,
    paths: usize,
}

impl ControlState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        let paths = (2..=MAX_PATHS)
            .find(|&n| factorial(n) == dim)
            .ok_or_else(|| Error::DimensionMismatch(format!("control dimension {dim} is not n! for n in 2..=4")))?;
        Ok(Self {
            state: PureStateVector::new(amplitudes)?,
            paths,
        })
    }

    /// `√q|0⟩ + √(1-q)|1⟩`.
    pub fn two_path(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange(format!("control weight q = {q} not in [0, 1]")));
        }
        Self::new(vec![re(q.sqrt()), re((1.0 - q).sqrt())])
    }

    /// Equal superposition over all `n!` pathways.
    pub fn uniform(paths: usize) -> Result<Self> {
        if !(2..=MAX_PATHS).contains(&paths) {
            return Err(Error::OutOfRange(format!("{paths} pathways")));
        }
        Self::new(vec![re(1.0); factorial(paths)])
    }

    pub fn from_state(state: PureStateVector) -> Result<Self> {
        Self::new(state.amplitudes().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn state(&self) -> &PureStateVector {
        &self.state
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.state.amplitudes()
    }

    /// `|c_0| |c_1|`, which is `√(q(1-q))` for the two-path family.
    pub fn mu(&self) -> f64 {
        let a = self.amplitudes();
        a[0].norm() * a[1].norm()
    }
}

/// Joint system ⊗ control density matrix.
#[derive(Clone, Debug)]
pub struct JointState {
    matrix: ComplexMatrix,
    control_dim: usize,
}

impl JointState {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    pub fn system_marginal(&self) -> ComplexMatrix {
        crate::linalg::partial_trace(&self.matrix, 2, self.control_dim, crate::linalg::Subsystem::A)
            .expect("joint state shape is consistent")
    }

    pub fn control_marginal(&self) -> ComplexMatrix {
        crate::linalg::partial_trace(&self.matrix, 2, self.control_dim, crate::linalg::Subsystem::B)
            .expect("joint state shape is consistent")
    }
}

/// Normalized system state after post-selecting a control outcome.
#[derive(Clone, Debug)]
pub struct PostSelectionResult {
    pub state: ComplexMatrix,
    pub probability: f64,
}

fn require_qubit_state(rho: &ComplexMatrix) -> Result<()> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "system must be a qubit, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    rho.validate_density()
}

/// Two-path switch with arbitrary Kraus lists. Control `|0⟩` applies `kraus_a` first.
pub fn switch_two_kraus(
    kraus_a: &[ComplexMatrix],
    kraus_b: &[ComplexMatrix],
    rho: &ComplexMatrix,
    control: &ControlState,
) -> Result<JointState> {
    require_qubit_state(rho)?;
    if control.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "two-path switch needs a qubit control, got dimension {}",
            control.dim()
        )));
    }
    if let Some(k) = kraus_a.iter().chain(kraus_b).find(|k| k.rows() != 2 || k.cols() != 2) {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operator of shape {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let input = rho.tensor(&control.state().projector());
    let branch0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
    let branch1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in kraus_a {
        for b in kraus_b {
            let w = &(b * a).tensor(&branch0) + &(a * b).tensor(&branch1);
            out = &out + &(&(&w * &input) * &w.dagger());
        }
    }
    Ok(JointState {
        matrix: out,
        control_dim: 2,
    })
}

/// `Σ_ij W_ij (ρ ⊗ ρ_c) W_ij†` for two depolarizing channels.
pub fn switch_two(
    ch_a: &DepolarizingChannel,
    ch_b: &DepolarizingChannel,
    rho: &ComplexMatrix,
    control: &ControlState,
) -> Result<JointState> {
    switch_two_kraus(ch_a.kraus(), ch_b.kraus(), rho, control)
}

/// Switch over `n` copies of `ch`, one branch per permutation of the channel order.
pub fn switch_n(
    ch: &DepolarizingChannel,
    n: usize,
    rho: &ComplexMatrix,
    control: &ControlState,
) -> Result<JointState> {
    require_qubit_state(rho)?;
    let perms = enumerate_permutations(n)?;
    let d = perms.len();
    if control.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "{n} pathways need a control of dimension {d}, got {}",
            control.dim()
        )));
    }
    let amps = control.amplitudes();
    let kraus = ch.kraus();
    let mut out = ComplexMatrix::zeros(2 * d, 2 * d);
    let mut idx = vec![0usize; n];
    for code in 0..kraus.len().pow(n as u32) {
        let mut rest = code;
        for slot in idx.iter_mut() {
            *slot = rest % kraus.len();
            rest /= kraus.len();
        }
        // operator along each branch, channel perm[0] acting first
        let branch_ops: Vec<ComplexMatrix> = perms
            .iter()
            .map(|perm| {
                perm.mapping()
                    .iter()
                    .fold(ComplexMatrix::identity(2), |acc, &channel| &kraus[idx[channel]] * &acc)
            })
            .collect();
        if branch_ops[0].as_slice().iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        for k in 0..d {
            let left = &branch_ops[k] * rho;
            for l in 0..d {
                let block = &left * &branch_ops[l].dagger();
                let coeff = amps[k] * amps[l].conj();
                for a in 0..2 {
                    for b in 0..2 {
                        out[(a * d + k, b * d + l)] += block[(a, b)] * coeff;
                    }
                }
            }
        }
    }
    Ok(JointState {
        matrix: out,
        control_dim: d,
    })
}

/// `⟨m|J|m⟩` on the control factor, before normalization.
pub fn project_unnormalized(joint: &JointState, outcome: &PureStateVector) -> Result<ComplexMatrix> {
    let d = joint.control_dim;
    if outcome.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "outcome of dimension {} for a control of dimension {d}",
            outcome.dim()
        )));
    }
    let m = outcome.amplitudes();
    let j = &joint.matrix;
    let mut out = ComplexMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            let mut s = C64::default();
            for k in 0..d {
                for l in 0..d {
                    s += m[k].conj() * j[(a * d + k, b * d + l)] * m[l];
                }
            }
            out[(a, b)] = s;
        }
    }
    Ok(out)
}

/// Measures the control, keeps outcome `|m⟩` and renormalizes the system.
pub fn post_select(joint: &JointState, outcome: &PureStateVector) -> Result<PostSelectionResult> {
    let unnormalized = project_unnormalized(joint, outcome)?;
    let probability = unnormalized.trace().re;
    if probability < DEGENERATE_PROBABILITY {
        return Err(Error::DegenerateOutcome(probability));
    }
    Ok(PostSelectionResult {
        state: unnormalized.hermitian_part().scale_real(1.0 / probability),
        probability,
    })
}

/// System marginal of a joint state that factorizes as `σ ⊗ ρ_c`, or `None` otherwise.
///
/// For a product state no control event, even one of probability zero, can
/// change the system, so this is the conditional state used at degenerate points.
pub fn product_state_system(joint: &JointState) -> Option<ComplexMatrix> {
    let system = joint.system_marginal();
    let product = system.tensor(&joint.control_marginal());
    (product.max_abs_diff(joint.matrix()) < 1e-12).then_some(system)
}

/// Hadamard-basis outcome label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    /// `|±⟩ = (|0⟩ ± |1⟩)/√2`.
    pub fn outcome(self) -> PureStateVector {
        PureStateVector::from_real(&[1.0, self.value()]).expect("non-zero vector")
    }
}

/// The unnormalized post-measurement system state for identical isotropic channels,
/// summed term by term over the double Pauli expansion.
pub fn closed_form_two(p: f64, q: f64, sign: Sign, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !(0.0..=P_MAX).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("p = {p}, q = {q}")));
    }
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::DimensionMismatch("closed form acts on a qubit".into()));
    }
    let weights = PauliWeights::isotropic(p)?;
    let mu = (q * (1.0 - q)).sqrt();
    let s = sign.value();
    let mut out = ComplexMatrix::zeros(2, 2);
    for si in PauliOperator::ALL {
        for sj in PauliOperator::ALL {
            let w = weights.get(si) * weights.get(sj) / 2.0;
            if w == 0.0 {
                continue;
            }
            let (a, b) = (si.matrix(), sj.matrix());
            let ab = &a * &b;
            let ba = &b * &a;
            let term = &(&(&(&ab * rho) * &ba).scale_real(q) + &(&(&ab * rho) * &ab).scale_real(s * mu))
                + &(&(&(&ba * rho) * &ba).scale_real(s * mu) + &(&(&ba * rho) * &ab).scale_real(1.0 - q));
            out = &out + &term.scale_real(w);
        }
    }
    Ok(out)
}

/// Post-selected system map of an `n`-path switch over identical Pauli channels.
///
/// Every branch operator for a Kraus multi-index is the same Pauli up to a phase,
/// so the conditional map is itself a Pauli channel whose weights are
/// polynomials in the channel weights. The coefficients depend only on the
/// control state and the outcome, so they are computed once and the map can be
/// evaluated at any noise level in O(#terms).
#[derive(Clone, Debug)]
pub struct PostSelectedPauliMap {
    paths: usize,
    /// (resulting Pauli, multiplicity of each channel Pauli, coefficient)
    terms: Vec<(PauliOperator, [u8; 4], f64)>,
}

impl PostSelectedPauliMap {
    pub fn new(control: &ControlState, outcome: &PureStateVector) -> Result<Self> {
        let n = control.paths();
        if outcome.dim() != control.dim() {
            return Err(Error::DimensionMismatch(format!(
                "outcome of dimension {} for a control of dimension {}",
                outcome.dim(),
                control.dim()
            )));
        }
        let perms = enumerate_permutations(n)?;
        let overlap: Vec<C64> = outcome
            .amplitudes()
            .iter()
            .zip(control.amplitudes())
            .map(|(m, c)| m.conj() * c)
            .collect();

        let mut acc: BTreeMap<(PauliOperator, [u8; 4]), f64> = BTreeMap::new();
        let mut idx = vec![PauliOperator::I; n];
        for code in 0..4usize.pow(n as u32) {
            let mut rest = code;
            let mut counts = [0u8; 4];
            for slot in idx.iter_mut() {
                *slot = PauliOperator::ALL[rest % 4];
                counts[slot.index()] += 1;
                rest /= 4;
            }
            let mut amplitude = C64::default();
            let mut result = PauliOperator::I;
            for (perm, w) in perms.iter().zip(&overlap) {
                let (phase, pauli) = perm.mapping().iter().fold((re(1.0), PauliOperator::I), |(ph, acc), &ch| {
                    let (f, r) = idx[ch].product(acc);
                    (ph * f, r)
                });
                result = pauli;
                amplitude += w * phase;
            }
            let weight = amplitude.norm_sqr();
            if weight > 0.0 {
                *acc.entry((result, counts)).or_insert(0.0) += weight;
            }
        }
        Ok(Self {
            paths: n,
            terms: acc.into_iter().map(|((p, c), w)| (p, c, w)).collect(),
        })
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Unnormalized Pauli weights of the conditional map; their sum is the success probability.
    pub fn effective_weights(&self, weights: &PauliWeights) -> [f64; 4] {
        let w = weights.as_array();
        let mut out = [0.0; 4];
        for (pauli, counts, coeff) in &self.terms {
            let mut term = *coeff;
            for (wi, &c) in w.iter().zip(counts) {
                term *= wi.powi(c as i32);
            }
            out[pauli.index()] += term;
        }
        out
    }

    pub fn probability(&self, weights: &PauliWeights) -> f64 {
        self.effective_weights(weights).iter().sum()
    }

    /// Unnormalized conditional state `Σ w_P P ρ P`.
    pub fn apply_unnormalized(&self, weights: &PauliWeights, rho: &ComplexMatrix) -> ComplexMatrix {
        let eff = self.effective_weights(weights);
        PauliOperator::ALL.iter().zip(eff).fold(ComplexMatrix::zeros(2, 2), |acc, (p, w)| {
            let m = p.matrix();
            &acc + &(&(&m * rho) * &m).scale_real(w)
        })
    }

    /// Post-selected fidelity for pure input `psi`, or `None` when the outcome is degenerate.
    pub fn fidelity(&self, weights: &PauliWeights, psi: &PureStateVector) -> Option<f64> {
        let eff = self.effective_weights(weights);
        let prob: f64 = eff.iter().sum();
        if prob < DEGENERATE_PROBABILITY {
            return None;
        }
        let overlap: f64 = PauliOperator::ALL
            .iter()
            .zip(eff)
            .map(|(p, w)| {
                let e = p.matrix().expectation(psi).expect("qubit input").re;
                w * e * e
            })
            .sum();
        Some(overlap / prob)
    }

    /// Fidelity for the reference input `|0⟩`.
    pub fn fidelity_ket0(&self, weights: &PauliWeights) -> Option<f64> {
        let eff = self.effective_weights(weights);
        let prob: f64 = eff.iter().sum();
        if prob < DEGENERATE_PROBABILITY {
            return None;
        }
        Some((eff[0] + eff[3]) / prob)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::qubit_fidelity;
    use crate::sampling::haar_pure_qubits;

    fn plus() -> PureStateVector {
        Sign::Plus.outcome()
    }

    #[test]
    fn permutations_of_two_and_three() {
        let p2 = enumerate_permutations(2).unwrap();
        assert_eq!(p2[0].mapping(), &[0, 1]);
        assert_eq!(p2[0].parity(), Parity::Even);
        assert_eq!(p2[1].mapping(), &[1, 0]);
        assert_eq!(p2[1].parity(), Parity::Odd);

        let p3 = enumerate_permutations(3).unwrap();
        assert_eq!(p3.len(), 6);
        assert_eq!(p3.iter().filter(|p| p.parity() == Parity::Even).count(), 3);
        let odd: Vec<String> = p3
            .iter()
            .filter(|p| p.parity() == Parity::Odd)
            .map(|p| p.to_string())
            .collect();
        assert_eq!(odd, ["A1 A3 A2", "A2 A1 A3", "A3 A2 A1"]);

        for n in 2..=4 {
            let perms = enumerate_permutations(n).unwrap();
            assert_eq!(perms.len(), factorial(n));
            assert_eq!(perms[0].mapping(), (0..n).collect::<Vec<_>>());
            assert!(perms.windows(2).all(|w| w[0].mapping() < w[1].mapping()));
        }
        assert!(enumerate_permutations(5).is_err());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn control_state_validation() {
        assert!(ControlState::new(vec![re(1.0); 3]).is_err());
        assert_eq!(ControlState::uniform(3).unwrap().dim(), 6);
        assert_eq!(ControlState::uniform(4).unwrap().paths(), 4);
        assert!((ControlState::two_path(0.5).unwrap().mu() - 0.5).abs() < 1e-15);
        assert!(ControlState::two_path(1.5).is_err());
    }

    #[test]
    fn identity_channels_leave_product_state() {
        let id = DepolarizingChannel::isotropic(0.0).unwrap();
        let rho = haar_pure_qubits(1, 4)[0].projector();
        let control = ControlState::two_path(0.3).unwrap();
        let joint = switch_two(&id, &id, &rho, &control).unwrap();
        let expected = rho.tensor(&control.state().projector());
        assert!(joint.matrix().max_abs_diff(&expected) < 1e-15);

        let control3 = ControlState::uniform(3).unwrap();
        let joint = switch_n(&id, 3, &rho, &control3).unwrap();
        assert!(joint.matrix().max_abs_diff(&rho.tensor(&control3.state().projector())) < 1e-15);
    }

    #[test]
    fn definite_order_limit_is_sequential_composition() {
        let a = DepolarizingChannel::new(PauliWeights::new([0.6, 0.3, 0.0, 0.1]).unwrap());
        let b = DepolarizingChannel::new(PauliWeights::new([0.5, 0.0, 0.5, 0.0]).unwrap());
        let rho = haar_pure_qubits(1, 5)[0].projector();
        let first_a = b.apply(&a.apply(&rho).unwrap()).unwrap();
        let first_b = a.apply(&b.apply(&rho).unwrap()).unwrap();
        let j0 = switch_two(&a, &b, &rho, &ControlState::two_path(1.0).unwrap()).unwrap();
        assert!(j0.system_marginal().max_abs_diff(&first_a) < 1e-14);
        let j1 = switch_two(&a, &b, &rho, &ControlState::two_path(0.0).unwrap()).unwrap();
        assert!(j1.system_marginal().max_abs_diff(&first_b) < 1e-14);
    }

    #[test]
    fn switch_outputs_are_density_matrices() {
        let rho = haar_pure_qubits(1, 6)[0].projector();
        for p in [0.0, 0.1, 0.25, P_MAX] {
            let ch = DepolarizingChannel::isotropic(p).unwrap();
            for q in [0.0, 0.2, 0.5, 0.9] {
                let j = switch_two(&ch, &ch, &rho, &ControlState::two_path(q).unwrap()).unwrap();
                assert!(j.matrix().validate_density().is_ok(), "p={p} q={q}");
            }
            let j = switch_n(&ch, 3, &rho, &ControlState::uniform(3).unwrap()).unwrap();
            assert!(j.matrix().validate_density().is_ok());
        }
    }

    #[test]
    fn switch_n_rejects_wrong_control() {
        let ch = DepolarizingChannel::isotropic(0.1).unwrap();
        let rho = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let control = ControlState::two_path(0.5).unwrap();
        assert!(matches!(switch_n(&ch, 3, &rho, &control), Err(Error::DimensionMismatch(_))));
        assert!(switch_two(&ch, &ch, &rho, &ControlState::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn product_state_post_selection() {
        let rho = haar_pure_qubits(1, 10)[0].projector();
        let c = ControlState::two_path(0.3).unwrap();
        let id = DepolarizingChannel::isotropic(0.0).unwrap();
        let joint = switch_two(&id, &id, &rho, &c).unwrap();
        let m = PureStateVector::new(vec![re(0.8), crate::linalg::c(0.0, 0.6)]).unwrap();
        let r = post_select(&joint, &m).unwrap();
        assert!((r.probability - m.inner(c.state()).norm_sqr()).abs() < 1e-14);
        assert!(r.state.max_abs_diff(&rho) < 1e-13);
    }

    #[test]
    fn lossless_point_probability() {
        let ch = DepolarizingChannel::isotropic(P_MAX).unwrap();
        let rho = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let joint = switch_two(&ch, &ch, &rho, &ControlState::two_path(0.5).unwrap()).unwrap();
        let r = post_select(&joint, &plus()).unwrap();
        assert!((r.probability - 1.0 / 3.0).abs() < 1e-12);
        assert!((qubit_fidelity(&rho, &r.state).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_outcome_is_an_error() {
        let ch = DepolarizingChannel::isotropic(0.2).unwrap();
        let rho = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let joint = switch_two(&ch, &ch, &rho, &ControlState::two_path(1.0).unwrap()).unwrap();
        let err = post_select(&joint, &PureStateVector::basis(2, 1)).unwrap_err();
        assert!(matches!(err, Error::DegenerateOutcome(_)));
        assert!(post_select(&joint, &PureStateVector::basis(6, 0)).is_err());
    }

    #[test]
    fn closed_form_special_cases() {
        let rho = haar_pure_qubits(1, 12)[0].projector();
        for p in [0.0, 0.1, 0.3] {
            let ch = DepolarizingChannel::isotropic(p).unwrap();
            let twice = ch.apply_repeated(&rho, 2).unwrap().scale_real(0.5);
            for sign in [Sign::Plus, Sign::Minus] {
                let out = closed_form_two(p, 1.0, sign, &rho).unwrap();
                assert!(out.max_abs_diff(&twice) < 1e-14);
            }
        }
        for q in [0.0, 0.2, 0.5] {
            let mu = (q * (1.0f64 - q)).sqrt();
            for sign in [Sign::Plus, Sign::Minus] {
                let out = closed_form_two(0.0, q, sign, &rho).unwrap();
                let expected = rho.scale_real(0.5 + sign.value() * mu);
                assert!(out.max_abs_diff(&expected) < 1e-14);
            }
        }
        for (p, q) in [(0.05, 0.3), (0.2, 0.5), (P_MAX, 0.9)] {
            let total = closed_form_two(p, q, Sign::Plus, &rho).unwrap().trace().re
                + closed_form_two(p, q, Sign::Minus, &rho).unwrap().trace().re;
            assert!((total - 1.0).abs() < 1e-14);
        }
        assert!(closed_form_two(0.4, 0.5, Sign::Plus, &rho).is_err());
    }

    #[test]
    fn closed_form_matches_projected_joint_state() {
        let inputs = haar_pure_qubits(5, 13);
        for psi in &inputs {
            let rho = psi.projector();
            for pi in 0..=6 {
                let p = P_MAX * pi as f64 / 6.0;
                let ch = DepolarizingChannel::isotropic(p).unwrap();
                for qi in 0..=6 {
                    let q = qi as f64 / 6.0;
                    let joint = switch_two(&ch, &ch, &rho, &ControlState::two_path(q).unwrap()).unwrap();
                    for sign in [Sign::Plus, Sign::Minus] {
                        let brute = project_unnormalized(&joint, &sign.outcome()).unwrap();
                        let closed = closed_form_two(p, q, sign, &rho).unwrap();
                        assert!(brute.max_abs_diff(&closed) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn switch_n_reduces_to_switch_two() {
        let rho = haar_pure_qubits(1, 14)[0].projector();
        for p in [0.0, 0.07, 0.2, P_MAX] {
            let ch = DepolarizingChannel::isotropic(p).unwrap();
            for q in [0.0, 0.3, 0.5, 1.0] {
                let control = ControlState::two_path(q).unwrap();
                let a = switch_two(&ch, &ch, &rho, &control).unwrap();
                let b = switch_n(&ch, 2, &rho, &control).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_map_matches_full_switch() {
        let inputs = haar_pure_qubits(3, 15);
        let cases: Vec<(ControlState, PureStateVector)> = vec![
            (ControlState::two_path(0.5).unwrap(), plus()),
            (
                ControlState::two_path(0.2).unwrap(),
                PureStateVector::new(vec![re(1.0), crate::linalg::c(0.3, -0.9)]).unwrap(),
            ),
            (
                ControlState::uniform(3).unwrap(),
                PureStateVector::from_real(&[1.0, -1.0, -1.0, 1.0, 1.0, -1.0]).unwrap(),
            ),
            (
                ControlState::new(vec![
                    re(0.3),
                    re(0.1),
                    crate::linalg::c(0.2, 0.4),
                    re(0.5),
                    re(-0.2),
                    crate::linalg::c(0.0, 0.7),
                ])
                .unwrap(),
                PureStateVector::new(vec![
                    re(1.0),
                    crate::linalg::c(0.5, 0.5),
                    re(-1.0),
                    re(0.2),
                    crate::linalg::c(0.0, -1.0),
                    re(0.3),
                ])
                .unwrap(),
            ),
        ];
        for (control, outcome) in &cases {
            let map = PostSelectedPauliMap::new(control, outcome).unwrap();
            for p in [0.0, 0.05, 0.15, 0.3, P_MAX] {
                let ch = DepolarizingChannel::isotropic(p).unwrap();
                for psi in &inputs {
                    let rho = psi.projector();
                    let joint = switch_n(&ch, control.paths(), &rho, control).unwrap();
                    let brute = project_unnormalized(&joint, outcome).unwrap();
                    let fast = map.apply_unnormalized(ch.weights(), &rho);
                    assert!(brute.max_abs_diff(&fast) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn four_path_switch_is_a_valid_state() {
        let ch = DepolarizingChannel::isotropic(0.2).unwrap();
        let rho = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let control = ControlState::uniform(4).unwrap();
        let joint = switch_n(&ch, 4, &rho, &control).unwrap();
        assert_eq!(joint.matrix().rows(), 48);
        assert!((joint.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(joint.matrix().is_hermitian());
        let outcome = control.state().clone();
        let map = PostSelectedPauliMap::new(&control, &outcome).unwrap();
        let brute = project_unnormalized(&joint, &outcome).unwrap();
        assert!(brute.max_abs_diff(&map.apply_unnormalized(ch.weights(), &rho)) < 1e-12);
    }
}
