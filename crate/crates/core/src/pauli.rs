//! Generalized depolarizing channels as realized by standard teleportation through
//! an imperfect resource state, plus the fidelity functionals used throughout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, clamp_psd, hermitian_eigensystem, re, ComplexMatrix, PureStateVector, C64};

/// Upper end of the isotropic noise range, where the singlet fraction vanishes.
pub const P_MAX: f64 = 1.0 / 3.0;

/// Fidelity achievable by measure-and-prepare strategies.
pub const CLASSICAL_FIDELITY: f64 = 2.0 / 3.0;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const RESOURCE_SUM_TOL: f64 = 1e-9;

/// Single-qubit Pauli operator, indexed 0..4 as (I, X, Y, Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliOperator {
    I,
    X,
    Y,
    Z,
}

impl PauliOperator {
    pub const ALL: [PauliOperator; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> ComplexMatrix {
        let (o, l) = (re(0.0), re(1.0));
        match self {
            Self::I => ComplexMatrix::from_rows([[l, o], [o, l]]),
            Self::X => ComplexMatrix::from_rows([[o, l], [l, o]]),
            Self::Y => ComplexMatrix::from_rows([[o, c(0.0, -1.0)], [c(0.0, 1.0), o]]),
            Self::Z => ComplexMatrix::from_rows([[l, o], [o, re(-1.0)]]),
        }
    }

    /// `self · other = phase · result`, with phase in {±1, ±i}.
    pub fn product(self, other: Self) -> (C64, Self) {
        use PauliOperator::*;
        match (self, other) {
            (I, p) | (p, I) => (re(1.0), p),
            (a, b) if a == b => (re(1.0), I),
            (X, Y) => (c(0.0, 1.0), Z),
            (Y, Z) => (c(0.0, 1.0), X),
            (Z, X) => (c(0.0, 1.0), Y),
            (Y, X) => (c(0.0, -1.0), Z),
            (Z, Y) => (c(0.0, -1.0), X),
            (X, Z) => (c(0.0, -1.0), Y),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::I => "I",
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Probability weights `(p0, p1, p2, p3)` of a generalized depolarizing channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliWeights([f64; 4]);

impl PauliWeights {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::OutOfRange(format!("Pauli weight {w} not in [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Unnormalized(sum));
        }
        Ok(Self(weights))
    }

    /// The isotropic model `(1 - 3p, p, p, p)` for `p ∈ [0, 1/3]`.
    pub fn isotropic(p: f64) -> Result<Self> {
        if !(0.0..=P_MAX).contains(&p) {
            return Err(Error::OutOfRange(format!("isotropic noise p = {p} not in [0, 1/3]")));
        }
        Ok(Self([(1.0 - 3.0 * p).max(0.0), p, p, p]))
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn get(&self, pauli: PauliOperator) -> f64 {
        self.0[pauli.index()]
    }

    /// The singlet fraction `p0`.
    pub fn singlet_fraction(&self) -> f64 {
        self.0[0]
    }
}

pub fn isotropic_weights(p: f64) -> Result<PauliWeights> {
    PauliWeights::isotropic(p)
}

/// Bell basis ordered so that `|B_i⟩ = (I ⊗ σ_i)|ψ⁻⟩`, with `|B_0⟩` the singlet.
pub fn bell_basis() -> [PureStateVector; 4] {
    let s = 1.0 / 2f64.sqrt();
    let singlet = [re(0.0), re(s), re(-s), re(0.0)];
    PauliOperator::ALL.map(|p| {
        let op = ComplexMatrix::identity(2).tensor(&p.matrix());
        let amps = op.apply(&singlet).expect("4x4 operator on 4-vector");
        PureStateVector::new(amps).expect("Bell vectors have unit norm")
    })
}

/// Two-qubit state shared between sender and receiver.
#[derive(Clone, Debug)]
pub struct ResourceState {
    chi: ComplexMatrix,
}

impl ResourceState {
    /// Accepts any 4x4 Hermitian PSD matrix; the trace is checked when weights are extracted.
    pub fn new(chi: ComplexMatrix) -> Result<Self> {
        if chi.rows() != 4 || chi.cols() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "resource state must be 4x4, got {}x{}",
                chi.rows(),
                chi.cols()
            )));
        }
        let eig = hermitian_eigensystem(&chi)?;
        if eig.values[0] < -crate::linalg::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:e}",
                eig.values[0]
            )));
        }
        Ok(Self { chi })
    }

    /// The Bell-diagonal state `Σ p_i |B_i⟩⟨B_i|`.
    pub fn bell_diagonal(weights: &PauliWeights) -> Self {
        let basis = bell_basis();
        let mut chi = ComplexMatrix::zeros(4, 4);
        for (b, w) in basis.iter().zip(weights.as_array()) {
            chi = &chi + &b.projector().scale_real(w);
        }
        Self { chi }
    }

    /// `x |ψ⁻⟩⟨ψ⁻| + (1 - x) I/4`.
    pub fn werner(x: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange(format!("Werner parameter {x}")));
        }
        let singlet = bell_basis()[0].projector();
        let chi = &singlet.scale_real(x) + &ComplexMatrix::identity(4).scale_real((1.0 - x) / 4.0);
        Self::new(chi)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.chi
    }
}

/// Channel weights from the Bell overlaps `p_i = ⟨B_i|χ|B_i⟩`.
pub fn weights_from_resource(chi: &ResourceState) -> Result<PauliWeights> {
    let basis = bell_basis();
    let mut w = [0.0; 4];
    for (wi, b) in w.iter_mut().zip(&basis) {
        *wi = chi.matrix().expectation(b)?.re.max(0.0);
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > RESOURCE_SUM_TOL {
        return Err(Error::Unnormalized(sum));
    }
    // renormalize away rounding so PauliWeights' tighter check holds
    PauliWeights::new(w.map(|x| (x / sum).min(1.0)))
}

/// `Λ[ρ] = Σ p_i σ_i ρ σ_i` with Kraus operators `√p_i σ_i`.
#[derive(Clone, Debug)]
pub struct DepolarizingChannel {
    weights: PauliWeights,
    kraus: Vec<ComplexMatrix>,
}

impl DepolarizingChannel {
    pub fn new(weights: PauliWeights) -> Self {
        let kraus = PauliOperator::ALL
            .iter()
            .map(|p| p.matrix().scale_real(weights.get(*p).sqrt()))
            .collect();
        Self { weights, kraus }
    }

    pub fn isotropic(p: f64) -> Result<Self> {
        Ok(Self::new(PauliWeights::isotropic(p)?))
    }

    pub fn from_resource(chi: &ResourceState) -> Result<Self> {
        Ok(Self::new(weights_from_resource(chi)?))
    }

    pub fn weights(&self) -> &PauliWeights {
        &self.weights
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ K_i† K_i`, the identity for a trace-preserving channel.
    pub fn completeness(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&k.dagger() * k))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on qubits, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        rho.validate_density()?;
        Ok(self.apply_unchecked(rho))
    }

    /// Applies the channel without validating the input, so unnormalized operators pass through.
    pub(crate) fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&(k * rho) * &k.dagger()))
    }

    /// `n` applications in sequence.
    pub fn apply_repeated(&self, rho: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
        let mut out = rho.clone();
        for _ in 0..n {
            out = self.apply(&out)?;
        }
        Ok(out)
    }
}

pub fn apply_channel(ch: &DepolarizingChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    ch.apply(rho)
}

fn require_qubit_density(m: &ComplexMatrix) -> Result<()> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "qubit fidelity needs 2x2 matrices, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.validate_density()
}

/// Qubit fidelity `Tr(ρσ) + 2√(det ρ · det σ)` (squared Uhlmann convention).
pub fn qubit_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    require_qubit_density(rho)?;
    require_qubit_density(sigma)?;
    let overlap = (rho * sigma).trace().re;
    let det_r = resolved_det(rho)?;
    let det_s = resolved_det(sigma)?;
    Ok(overlap + 2.0 * (det_r * det_s).sqrt())
}

/// `det m`, or 0 when it is negative or below the rounding error of `m00 m11 - m01 m10`.
///
/// A pure state's determinant comes out as ~1e-17 of noise, and the square root
/// in the fidelity would amplify that to ~1e-9.
fn resolved_det(m: &ComplexMatrix) -> Result<f64> {
    let det = m.det2()?.re;
    let scale = (m[(0, 0)] * m[(1, 1)]).norm() + (m[(0, 1)] * m[(1, 0)]).norm();
    Ok(if det <= 4.0 * f64::EPSILON * scale { 0.0 } else { det })
}

// eigenvalues below this are treated as numerical zeros before square roots
const RANK_TOL: f64 = 1e-12;

/// Squared Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` for density matrices of equal dimension.
pub fn general_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || rho.cols() != sigma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}x{} and {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    rho.validate_density()?;
    sigma.validate_density()?;

    let eig_r = hermitian_eigensystem(rho)?;
    if let Some(f) = rank_one_fidelity(&eig_r, sigma)? {
        return Ok(f);
    }
    let eig_s = hermitian_eigensystem(sigma)?;
    if let Some(f) = rank_one_fidelity(&eig_s, rho)? {
        return Ok(f);
    }

    let sqrt_rho = eig_r.map_spectrum(|x| {
        let x = clamp_psd(x);
        if x > RANK_TOL {
            x.sqrt()
        } else {
            0.0
        }
    });
    let inner = (&(&sqrt_rho * sigma) * &sqrt_rho).hermitian_part();
    let eig_m = hermitian_eigensystem(&inner)?;
    let root_trace: f64 = eig_m
        .values
        .iter()
        .map(|&x| if x > RANK_TOL * RANK_TOL { x.sqrt() } else { 0.0 })
        .sum();
    Ok(root_trace * root_trace)
}

/// For a numerically pure state `λ|v⟩⟨v|`, the fidelity is `λ ⟨v|σ|v⟩`.
fn rank_one_fidelity(
    eig: &crate::linalg::Eigensystem,
    other: &ComplexMatrix,
) -> Result<Option<f64>> {
    let n = eig.values.len();
    if n >= 2 && eig.values[n - 2] > RANK_TOL {
        return Ok(None);
    }
    let top = eig.vector(n - 1);
    Ok(Some(eig.values[n - 1] * other.expectation(&top)?.re))
}

/// Fidelity of `n` sequential isotropic channels on a pure input: `1/2 + (1 - 4p)^n / 2`.
pub fn no_switch_fidelity(p: f64, n: u32) -> f64 {
    0.5 + 0.5 * (1.0 - 4.0 * p).powi(n as i32)
}

/// The noise level above which `n` sequential channels no longer beat 2/3.
pub fn no_switch_threshold(n: u32) -> f64 {
    (1.0 - 3f64.powf(-1.0 / n as f64)) / 4.0
}
