//! Closed-form fidelities, advantage regions and figures of merit for the switched
//! teleportation channel.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix, PureStateVector, C64};
use crate::pauli::{general_fidelity, qubit_fidelity, DepolarizingChannel, PauliWeights, CLASSICAL_FIDELITY, P_MAX};
use crate::quadrature::{integrate_positive_part, integrate_smooth, QuadratureSpec};
use crate::switch::{
    enumerate_permutations, post_select, product_state_system, switch_n, switch_two, ControlState, Parity, PostSelectedPauliMap, Sign,
    DEGENERATE_PROBABILITY,
};

/// Control superposition above which the high-noise advantage region opens.
pub const MU_THRESHOLD: f64 = 1.0 / 6.0;

/// Largest possible figure of merit: excess 1/3 over an interval of length 1/3.
pub const MAX_MERIT: f64 = 1.0 / 9.0;

// region-2 upper edges within this distance of 1/3 count as touching it
const BOUNDARY_EPS: f64 = 1e-14;

/// Isotropic noise `p` with a two-path control `√q|0⟩ + √(1-q)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    p: f64,
    q: f64,
    mu: f64,
}

impl SwitchParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=P_MAX).contains(&p) {
            return Err(Error::OutOfRange(format!("p = {p} not in [0, 1/3]")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange(format!("q = {q} not in [0, 1]")));
        }
        Ok(Self {
            p,
            q,
            mu: (q * (1.0 - q)).sqrt(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Fidelity after post-selecting `|+⟩`, closed form in `p` and `μ`.
pub fn switched_fidelity(params: &SwitchParams) -> f64 {
    let (p, mu) = (params.p, params.mu);
    let num = 1.0 + 2.0 * mu - p * (4.0 + 8.0 * mu) + 8.0 * p * p * (1.0 + mu);
    let den = 1.0 + 2.0 * mu * (1.0 - 12.0 * p * p);
    num / den
}

/// Probability of the `|+⟩` outcome, `(1 + 2μ(1 - 12p²)) / 2`.
pub fn switched_success_probability(params: &SwitchParams) -> f64 {
    0.5 * (1.0 + 2.0 * params.mu * (1.0 - 12.0 * params.p * params.p))
}

/// The same fidelity obtained by simulating the switch on `rho` and post-selecting.
pub fn simulated_switched_fidelity(params: &SwitchParams, sign: Sign, rho: &ComplexMatrix) -> Result<f64> {
    let ch = DepolarizingChannel::isotropic(params.p)?;
    let joint = switch_two(&ch, &ch, rho, &ControlState::two_path(params.q)?)?;
    let selected = post_select(&joint, &sign.outcome())?;
    qubit_fidelity(rho, &selected.state)
}

/// Noise ranges where the `+` branch beats the classical limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRegions {
    pub mu: f64,
    /// Region 1 is `[0, p_lo)`.
    pub p_lo: f64,
    /// Upper root of the boundary quadratic; may exceed 1/3.
    pub p_hi: f64,
    /// `(p_hi, 1/3]` when non-empty.
    pub region2: Option<(f64, f64)>,
}

impl AdvantageRegions {
    pub fn region1(&self) -> (f64, f64) {
        (0.0, self.p_lo)
    }

    pub fn region2_exists(&self) -> bool {
        self.region2.is_some()
    }

    pub fn contains(&self, p: f64) -> bool {
        p < self.p_lo || self.region2.is_some_and(|(lo, hi)| p > lo && p <= hi)
    }
}

/// Roots of `(1+2μ)/3 - 4(1+2μ)p + 8(1+3μ)p² = 0`, the boundary where the fidelity equals 2/3.
pub fn advantage_regions(mu: f64) -> Result<AdvantageRegions> {
    if !(0.0..=0.5).contains(&mu) {
        return Err(Error::OutOfRange(format!("mu = {mu} not in [0, 1/2]")));
    }
    let s = 1.0 + 2.0 * mu;
    let root = 3f64.sqrt() * s.sqrt();
    let den = 12.0 * (1.0 + 3.0 * mu);
    let p_lo = (3.0 * s - root) / den;
    let p_hi = (3.0 * s + root) / den;
    let region2 = (p_hi < P_MAX - BOUNDARY_EPS).then_some((p_hi, P_MAX));
    Ok(AdvantageRegions {
        mu,
        p_lo,
        p_hi,
        region2,
    })
}

pub fn mu_threshold() -> f64 {
    MU_THRESHOLD
}

/// Bisects on the emptiness of region 2 to locate the `μ` where it first opens.
pub fn locate_mu_threshold(tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if advantage_regions(mid).expect("mid in range").region2_exists() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrated fidelity excess over the classical limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeritValue {
    pub k: f64,
    /// Noise levels where the fidelity crosses 2/3.
    pub crossings: Vec<f64>,
}

fn check_not_degenerate(map: &PostSelectedPauliMap) -> Result<()> {
    // the success probability is a polynomial of degree n in p, so n + 1 samples decide
    let n = map.paths();
    let mut best = 0.0f64;
    for k in 0..=n {
        let p = P_MAX * k as f64 / n as f64;
        best = best.max(map.probability(&PauliWeights::isotropic(p)?));
    }
    if best < DEGENERATE_PROBABILITY {
        return Err(Error::DegenerateOutcome(best));
    }
    Ok(())
}

/// `K = ∫_0^{1/3} max(F(p) - 2/3, 0) dp` for post-selecting `outcome` on an `n`-path switch.
///
/// Noise levels where the outcome has (numerically) zero probability contribute
/// nothing; an outcome that never occurs is an error.
pub fn figure_of_merit(
    outcome: &PureStateVector,
    control: &ControlState,
    n: usize,
    quad: &QuadratureSpec,
) -> Result<MeritValue> {
    if control.paths() != n {
        return Err(Error::DimensionMismatch(format!(
            "control has {} pathways, expected {n}",
            control.paths()
        )));
    }
    let map = PostSelectedPauliMap::new(control, outcome)?;
    check_not_degenerate(&map)?;
    merit_of_map(&map, quad)
}

fn merit_of_map(map: &PostSelectedPauliMap, quad: &QuadratureSpec) -> Result<MeritValue> {
    let excess = |p: f64| {
        let p = p.clamp(0.0, P_MAX);
        let w = PauliWeights::isotropic(p).expect("clamped into range");
        map.fidelity_ket0(&w).map_or(-1.0, |f| f - CLASSICAL_FIDELITY)
    };
    let r = integrate_positive_part(excess, 0.0, P_MAX, quad)?;
    Ok(MeritValue {
        k: r.value,
        crossings: r.crossings,
    })
}

/// Closed-form `K` for `n` channels in sequence without a switch.
pub fn no_switch_merit(n: u32) -> f64 {
    let t = crate::pauli::no_switch_threshold(n);
    let m = n as f64 + 1.0;
    -t / 6.0 + (1.0 - (1.0 - 4.0 * t).powi(n as i32 + 1)) / (8.0 * m)
}

/// Named two-path outcomes used in the trade-off comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLabel {
    Plus,
    Minus,
    Zero,
    One,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 4] = [Self::Plus, Self::Minus, Self::Zero, Self::One];

    pub fn outcome(self) -> PureStateVector {
        match self {
            Self::Plus => Sign::Plus.outcome(),
            Self::Minus => Sign::Minus.outcome(),
            Self::Zero => PureStateVector::basis(2, 0),
            Self::One => PureStateVector::basis(2, 1),
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::Zero => "0",
            Self::One => "1",
        })
    }
}

impl FromStr for OutcomeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            "0" | "zero" => Ok(Self::Zero),
            "1" | "one" => Ok(Self::One),
            other => Err(Error::OutOfRange(format!("unknown outcome label {other:?}"))),
        }
    }
}

/// Fidelity between `|ψ⟩⟨ψ| ⊗ ρ_c` and the switch output before the control is measured.
pub fn joint_fidelity(p: f64, control: &ControlState, input: &PureStateVector) -> Result<f64> {
    let ch = DepolarizingChannel::isotropic(p)?;
    let rho = input.projector();
    let joint = switch_two(&ch, &ch, &rho, control)?;
    general_fidelity(&rho.tensor(&control.state().projector()), joint.matrix())
}

/// `K_total = ∫_0^{1/3} F(ρ ⊗ ρ_c, S[ρ ⊗ ρ_c]) dp` with pure input `|0⟩`.
///
/// The integrand is taken before the control is measured, so `K_total` depends
/// on the control state but not on which outcome is later post-selected.
pub fn k_total(control: &ControlState, quad: &QuadratureSpec) -> Result<f64> {
    if control.dim() != 2 {
        return Err(Error::DimensionMismatch("K_total is defined for two paths".into()));
    }
    let input = PureStateVector::basis(2, 0);
    // evaluate once up front so errors surface instead of panicking inside the integrand
    joint_fidelity(0.0, control, &input)?;
    integrate_smooth(
        |p| joint_fidelity(p.clamp(0.0, P_MAX), control, &input).expect("validated above"),
        0.0,
        P_MAX,
        quad,
    )
}

/// One point of the `K` versus `K_total` trade-off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub q: f64,
    pub label: OutcomeLabel,
    pub k_total: f64,
    /// `None` when the outcome cannot occur for this control.
    pub k: Option<f64>,
}

/// Pairs `K_total` of a two-path control with `K` of each requested outcome.
pub fn tradeoff_points(q: f64, labels: &[OutcomeLabel], quad: &QuadratureSpec) -> Result<Vec<TradeoffPoint>> {
    let control = ControlState::two_path(q)?;
    let kt = k_total(&control, quad)?;
    labels
        .iter()
        .map(|&label| {
            let k = match figure_of_merit(&label.outcome(), &control, 2, quad) {
                Ok(m) => Some(m.k),
                Err(Error::DegenerateOutcome(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(TradeoffPoint { q, label, k_total: kt, k })
        })
        .collect()
}

/// `Σ_{i≠j} |ρ_ij|` of `|ψ⟩⟨ψ|` in the computational basis.
pub fn l1_coherence(state: &PureStateVector) -> f64 {
    let mags: Vec<f64> = state.amplitudes().iter().map(|z| z.norm()).collect();
    let total: f64 = mags.iter().sum();
    let diag: f64 = mags.iter().map(|m| m * m).sum();
    total * total - diag
}

/// Two-path outcome `|0⟩ + λ e^{iφ} |1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFamily2 {
    pub lambda: f64,
    pub phi: f64,
}

impl OutcomeFamily2 {
    pub fn outcome(&self) -> Result<PureStateVector> {
        if self.lambda < 0.0 {
            return Err(Error::OutOfRange(format!("lambda = {} < 0", self.lambda)));
        }
        PureStateVector::new(vec![re(1.0), C64::from_polar(self.lambda, self.phi)])
    }
}

/// Three-path outcome `Σ_even |j⟩ - λ e^{iφ} Σ_odd |j⟩`, normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFamily3 {
    pub lambda: f64,
    pub phi: f64,
}

impl OutcomeFamily3 {
    pub fn outcome(&self) -> Result<PureStateVector> {
        if self.lambda < 0.0 {
            return Err(Error::OutOfRange(format!("lambda = {} < 0", self.lambda)));
        }
        let odd = -C64::from_polar(self.lambda, self.phi);
        let amps = enumerate_permutations(3)?
            .iter()
            .map(|perm| match perm.parity() {
                Parity::Even => re(1.0),
                Parity::Odd => odd,
            })
            .collect();
        PureStateVector::new(amps)
    }
}

/// Three-path outcome with coefficient 1 on even orderings and `α_k` on the odd
/// orderings (A1A3A2, A2A1A3, A3A2A1, in that order).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaOutcome {
    pub alpha: [f64; 3],
}

impl AlphaOutcome {
    pub fn outcome(&self) -> Result<PureStateVector> {
        let mut odd = self.alpha.iter();
        let amps = enumerate_permutations(3)?
            .iter()
            .map(|perm| match perm.parity() {
                Parity::Even => re(1.0),
                Parity::Odd => re(*odd.next().expect("three odd permutations")),
            })
            .collect();
        PureStateVector::new(amps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeFamily {
    TwoPath,
    ThreePath,
}

impl OutcomeFamily {
    pub fn paths(self) -> usize {
        match self {
            Self::TwoPath => 2,
            Self::ThreePath => 3,
        }
    }

    pub fn outcome(self, lambda: f64, phi: f64) -> Result<PureStateVector> {
        match self {
            Self::TwoPath => OutcomeFamily2 { lambda, phi }.outcome(),
            Self::ThreePath => OutcomeFamily3 { lambda, phi }.outcome(),
        }
    }
}

/// Points `start, start + step, ...` up to `end` (inclusive within rounding).
pub fn stepped_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || end < start || !start.is_finite() || !end.is_finite() {
        return Err(Error::OutOfRange(format!("range {start}:{end}:{step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Cartesian grid over `(λ, φ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl GridSpec {
    /// `λ ∈ [λ_min, λ_max]` inclusive and `φ ∈ [0, 2π)` with the given steps.
    pub fn stepped(lambda_min: f64, lambda_max: f64, lambda_step: f64, phi_step: f64) -> Result<Self> {
        let lambdas = stepped_range(lambda_min, lambda_max, lambda_step)?;
        let mut phis = stepped_range(0.0, 2.0 * PI, phi_step)?;
        phis.retain(|&phi| phi < 2.0 * PI - 1e-9);
        Ok(Self { lambdas, phis })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len() * self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEvaluation {
    pub lambda: f64,
    pub phi: f64,
    /// `None` when the outcome never occurs for this control.
    pub k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: GridEvaluation,
    /// Every grid point, λ-major then φ.
    pub evaluations: Vec<GridEvaluation>,
}

// merits closer than this are treated as tied and resolved lexicographically
const TIE_TOL: f64 = 1e-12;

/// Exhaustive grid search of the figure of merit over an outcome family.
pub fn optimize_outcome(
    control: &ControlState,
    family: OutcomeFamily,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<OptimizationResult> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("empty outcome grid".into()));
    }
    if control.paths() != family.paths() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} outcomes need a {}-path control",
            family,
            family.paths()
        )));
    }
    let points: Vec<(f64, f64)> = grid
        .lambdas
        .iter()
        .flat_map(|&l| grid.phis.iter().map(move |&phi| (l, phi)))
        .collect();
    let evaluations = points
        .par_iter()
        .map(|&(lambda, phi)| {
            let outcome = family.outcome(lambda, phi)?;
            let k = match figure_of_merit(&outcome, control, family.paths(), quad) {
                Ok(m) => Some(m.k),
                Err(Error::DegenerateOutcome(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(GridEvaluation { lambda, phi, k })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<GridEvaluation> = None;
    for e in &evaluations {
        let Some(k) = e.k else { continue };
        if best.is_none_or(|b| k > b.k.expect("best has a value") + TIE_TOL) {
            best = Some(*e);
        }
    }
    let best = best.ok_or(Error::DegenerateOutcome(0.0))?;
    Ok(OptimizationResult { best, evaluations })
}

/// One point of a post-selected fidelity curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub p: f64,
    pub probability: f64,
    /// Post-selected fidelity for input `|0⟩`; `None` if the point is degenerate and
    /// the joint output is entangled with the control.
    pub fidelity: Option<f64>,
    /// The outcome has probability below the degeneracy threshold at this `p`.
    pub degenerate: bool,
}

/// Fidelity curve of the uniform three-path switch post-selected on an α-outcome.
///
/// At degenerate points the fidelity is only reported when the switch output is a
/// product state (identity channels at `p = 0`), in which case it is the fidelity
/// of the untouched system marginal.
pub fn alpha_fidelity_profile(alpha: &AlphaOutcome, p_grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    let control = ControlState::uniform(3)?;
    let map = PostSelectedPauliMap::new(&control, &alpha.outcome()?)?;
    let rho = PureStateVector::basis(2, 0).projector();
    p_grid
        .iter()
        .map(|&p| {
            let w = PauliWeights::isotropic(p)?;
            let probability = map.probability(&w);
            if probability >= DEGENERATE_PROBABILITY {
                return Ok(ProfilePoint {
                    p,
                    probability,
                    fidelity: map.fidelity_ket0(&w),
                    degenerate: false,
                });
            }
            let joint = switch_n(&DepolarizingChannel::new(w), 3, &rho, &control)?;
            let fidelity = match product_state_system(&joint) {
                Some(system) => Some(qubit_fidelity(&rho, &system)?),
                None => None,
            };
            Ok(ProfilePoint {
                p,
                probability,
                fidelity,
                degenerate: true,
            })
        })
        .collect()
}

/// Post-selected fidelity at a single noise level for an arbitrary control and outcome.
pub fn post_selected_fidelity(control: &ControlState, outcome: &PureStateVector, p: f64) -> Result<Option<f64>> {
    let map = PostSelectedPauliMap::new(control, outcome)?;
    Ok(map.fidelity_ket0(&PauliWeights::isotropic(p)?))
}
