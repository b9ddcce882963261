//! Self-check suite behind `teleswitch verify`.
//!
//! Each check recomputes a quantity two independent ways (closed form against
//! brute-force simulation, quadrature against an antiderivative, and so on) and
//! reports pass or fail with a short detail line. Random inputs come from a
//! seeded stream, so a report is reproducible.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    advantage_regions, alpha_fidelity_profile, figure_of_merit, l1_coherence, locate_mu_threshold,
    no_switch_merit, optimize_outcome, switched_fidelity, switched_success_probability, tradeoff_points,
    AlphaOutcome, GridSpec, OutcomeFamily, OutcomeLabel, SwitchParams, MAX_MERIT, MU_THRESHOLD,
};
use crate::error::Result;
use crate::linalg::{hermitian_eigensystem, partial_trace, ComplexMatrix, PureStateVector, Subsystem};
use crate::pauli::{
    no_switch_fidelity, no_switch_threshold, qubit_fidelity, DepolarizingChannel, ResourceState,
    weights_from_resource, CLASSICAL_FIDELITY, P_MAX,
};
use crate::quadrature::{integrate_positive_part, QuadratureSpec};
use crate::sampling::{haar_pure_qubits, haar_pure_state};
use crate::switch::{
    closed_form_two, enumerate_permutations, factorial, post_select, project_unnormalized, switch_n,
    switch_two, ControlState, Parity, Sign,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 42 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Outcome = Result<(bool, String)>;
type Check = fn(&VerifyConfig) -> Outcome;

const CHECKS: &[(&str, Check)] = &[
    ("channel_trace_preservation", channel_trace_preservation),
    ("eigen_reconstruction", eigen_reconstruction),
    ("partial_trace_of_product", partial_trace_of_product),
    ("werner_resource_weights", werner_resource_weights),
    ("permutation_enumeration", permutation_enumeration),
    ("closed_form_vs_simulation", closed_form_vs_simulation),
    ("no_switch_baselines", no_switch_baselines),
    ("no_switch_thresholds", no_switch_thresholds),
    ("lossless_point", lossless_point),
    ("advantage_region_boundaries", advantage_region_boundaries),
    ("mu_threshold_bisection", mu_threshold_bisection),
    ("region2_monotone", region2_monotone),
    ("closed_form_vs_projection", closed_form_vs_projection),
    ("measurement_completeness", measurement_completeness),
    ("input_independence", input_independence),
    ("coherence_equals_two_mu", coherence_equals_two_mu),
    ("no_switch_merit_two", no_switch_merit_two),
    ("merit_bounds", merit_bounds),
    ("merit_step_halving", merit_step_halving),
    ("two_path_argmax_plus", two_path_argmax_plus),
    ("switch_n_reduces_to_two", switch_n_reduces_to_two),
    ("alternating_outcome_lossless", alternating_outcome_lossless),
    ("three_path_above_no_switch", three_path_above_no_switch),
    ("three_path_phase_peak", three_path_phase_peak),
    ("tradeoff_converges_without_superposition", tradeoff_converges_without_superposition),
    ("tradeoff_plus_vs_zero", tradeoff_plus_vs_zero),
];

/// Names of all checks, in report order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

/// Runs every check. Errors inside a check count as failures.
pub fn run_all(config: &VerifyConfig) -> VerifyReport {
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|(name, check)| {
            let (passed, detail) = match check(config) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: (*name).to_string(),
                passed,
                detail,
            }
        })
        .collect();
    VerifyReport {
        seed: config.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + (hi - lo) * k as f64 / (points - 1) as f64 })
        .collect()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ket0() -> ComplexMatrix {
    PureStateVector::basis(2, 0).projector()
}

fn verdict(err: f64, tol: f64) -> (bool, String) {
    (err < tol, format!("max error {err:.3e} (tolerance {tol:.0e})"))
}

fn channel_trace_preservation(config: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    for p in grid(0.0, P_MAX, 11) {
        let ch = DepolarizingChannel::isotropic(p)?;
        err = err.max(ch.completeness().max_abs_diff(&ComplexMatrix::identity(2)));
        for psi in haar_pure_qubits(5, config.seed) {
            let out = ch.apply(&psi.projector())?;
            err = err.max((out.trace().re - 1.0).abs()).max(out.trace().im.abs());
        }
    }
    Ok(verdict(err, 1e-12))
}

fn eigen_reconstruction(config: &VerifyConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut err = 0.0f64;
    for dim in [2, 4, 6, 12] {
        let v = haar_pure_state(dim, &mut rng);
        let w = haar_pure_state(dim, &mut rng);
        let a = &v.projector().scale_real(0.7) + &w.projector().scale_real(-0.2);
        let eig = hermitian_eigensystem(&a)?;
        err = err.max(eig.map_spectrum(|x| x).max_abs_diff(&a));
    }
    Ok(verdict(err, 1e-10))
}

fn partial_trace_of_product(config: &VerifyConfig) -> Outcome {
    let states = haar_pure_qubits(2, config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let control = haar_pure_state(6, &mut rng).projector();
    let a = states[0].projector();
    let joint = a.tensor(&control);
    let err = partial_trace(&joint, 2, 6, Subsystem::A)?
        .max_abs_diff(&a)
        .max(partial_trace(&joint, 2, 6, Subsystem::B)?.max_abs_diff(&control));
    Ok(verdict(err, 1e-12))
}

fn werner_resource_weights(_: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    for x in grid(-1.0 / 3.0, 1.0, 9) {
        let w = weights_from_resource(&ResourceState::werner(x)?)?.as_array();
        let p = (1.0 - x) / 4.0;
        let expected = [1.0 - 3.0 * p, p, p, p];
        err = w.iter().zip(expected).fold(err, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(verdict(err, 1e-12))
}

fn permutation_enumeration(_: &VerifyConfig) -> Outcome {
    let mut ok = true;
    for n in 2..=4 {
        let perms = enumerate_permutations(n)?;
        let odd = perms.iter().filter(|p| p.parity() == Parity::Odd).count();
        let sorted = perms.windows(2).all(|w| w[0].mapping() < w[1].mapping());
        ok &= perms.len() == factorial(n) && 2 * odd == perms.len() && sorted;
    }
    Ok((ok, "n! orderings, half odd, lexicographic, for n = 2..4".into()))
}

fn closed_form_vs_simulation(_: &VerifyConfig) -> Outcome {
    let rho = ket0();
    let mut err = 0.0f64;
    for p in grid(0.0, P_MAX, 21) {
        let ch = DepolarizingChannel::isotropic(p)?;
        for q in grid(0.0, 1.0, 21) {
            let joint = switch_two(&ch, &ch, &rho, &ControlState::two_path(q)?)?;
            let selected = post_select(&joint, &Sign::Plus.outcome())?;
            let simulated = qubit_fidelity(&rho, &selected.state)?;
            err = err.max((switched_fidelity(&SwitchParams::new(p, q)?) - simulated).abs());
        }
    }
    Ok(verdict(err, 1e-10))
}

fn no_switch_baselines(config: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    for p in grid(0.0, P_MAX, 21) {
        let ch = DepolarizingChannel::isotropic(p)?;
        for psi in haar_pure_qubits(3, config.seed) {
            let rho = psi.projector();
            for (n, closed) in [(1, 1.0 - 2.0 * p), (2, 1.0 - 4.0 * p + 8.0 * p * p)] {
                let f = qubit_fidelity(&rho, &ch.apply_repeated(&rho, n)?)?;
                err = err.max((f - closed).abs());
                err = err.max((no_switch_fidelity(p, n as u32) - closed).abs());
            }
        }
    }
    Ok(verdict(err, 1e-12))
}

fn no_switch_thresholds(_: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    let mut roots = Vec::new();
    for n in 1..=3u32 {
        let root = bisect(|p| no_switch_fidelity(p, n) - CLASSICAL_FIDELITY, 0.0, 0.25);
        err = err.max((no_switch_threshold(n) - root).abs());
        roots.push(root);
    }
    err = err.max((roots[0] - 1.0 / 6.0).abs()).max((roots[1] - 0.105662).abs());
    let (ok, detail) = verdict(err, 1e-6);
    Ok((
        ok,
        format!(
            "{detail}; thresholds {:.10}, {:.10}, {:.10}",
            roots[0], roots[1], roots[2]
        ),
    ))
}

fn lossless_point(_: &VerifyConfig) -> Outcome {
    let params = SwitchParams::new(P_MAX, 0.5)?;
    let ch = DepolarizingChannel::isotropic(P_MAX)?;
    let joint = switch_two(&ch, &ch, &ket0(), &ControlState::two_path(0.5)?)?;
    let selected = post_select(&joint, &Sign::Plus.outcome())?;
    let err = (switched_fidelity(&params) - 1.0)
        .abs()
        .max((switched_success_probability(&params) - 1.0 / 3.0).abs())
        .max((qubit_fidelity(&ket0(), &selected.state)? - 1.0).abs())
        .max((selected.probability - 1.0 / 3.0).abs());
    Ok(verdict(err, 1e-10))
}

fn q_for_mu(mu: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 4.0 * mu * mu).max(0.0).sqrt())
}

fn advantage_region_boundaries(_: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    let mut count = 0;
    for mu in grid(0.0, 0.5, 51) {
        let regions = advantage_regions(mu)?;
        let q = q_for_mu(mu);
        let mut bounds = vec![regions.p_lo];
        if let Some((a, b)) = regions.region2 {
            bounds.extend([a, b]);
        }
        for p in bounds.into_iter().filter(|&p| p < P_MAX - 1e-12) {
            let f = switched_fidelity(&SwitchParams::new(p, q)?);
            err = err.max((f - CLASSICAL_FIDELITY).abs());
            count += 1;
        }
        if regions.region2_exists() != (mu > MU_THRESHOLD) {
            return Ok((false, format!("region2 existence wrong at mu = {mu}")));
        }
    }
    let (ok, detail) = verdict(err, 1e-9);
    Ok((ok, format!("{detail} over {count} interior boundaries")))
}

fn mu_threshold_bisection(_: &VerifyConfig) -> Outcome {
    let located = locate_mu_threshold(1e-12);
    let (ok, detail) = verdict((located - 1.0 / 6.0).abs(), 1e-9);
    Ok((ok, format!("{detail}; located {located:.12}")))
}

fn region2_monotone(_: &VerifyConfig) -> Outcome {
    for mu in [0.2, 0.3, 0.4, 0.5] {
        let Some((lo, hi)) = advantage_regions(mu)?.region2 else {
            return Ok((false, format!("no region2 at mu = {mu}")));
        };
        let q = q_for_mu(mu);
        let fs = grid(lo, hi, 100)
            .into_iter()
            .map(|p| Ok(switched_fidelity(&SwitchParams::new(p, q)?)))
            .collect::<Result<Vec<_>>>()?;
        if fs.windows(2).any(|w| w[1] <= w[0]) {
            return Ok((false, format!("not increasing on region2 at mu = {mu}")));
        }
    }
    Ok((true, "strictly increasing on 100 points for mu in {0.2, 0.3, 0.4, 0.5}".into()))
}

fn closed_form_vs_projection(config: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    let inputs = haar_pure_qubits(20, config.seed);
    for p in grid(0.0, P_MAX, 21) {
        let ch = DepolarizingChannel::isotropic(p)?;
        for q in grid(0.0, 1.0, 21) {
            let control = ControlState::two_path(q)?;
            for psi in &inputs {
                let rho = psi.projector();
                let joint = switch_two(&ch, &ch, &rho, &control)?;
                for sign in [Sign::Plus, Sign::Minus] {
                    let brute = project_unnormalized(&joint, &sign.outcome())?;
                    err = err.max(closed_form_two(p, q, sign, &rho)?.max_abs_diff(&brute));
                }
            }
        }
    }
    Ok(verdict(err, 1e-10))
}

fn measurement_completeness(config: &VerifyConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut prob_err = 0.0f64;
    let mut state_err = 0.0f64;
    let psi = haar_pure_state(2, &mut rng);
    for paths in [2, 3] {
        let dim = factorial(paths);
        let control = ControlState::from_state(haar_pure_state(dim, &mut rng))?;
        // random orthonormal basis: eigenvectors of a random Hermitian matrix
        let mut h = ComplexMatrix::zeros(dim, dim);
        for k in 0..dim {
            h = &h + &haar_pure_state(dim, &mut rng).projector().scale_real(k as f64 + 1.0);
        }
        let basis = hermitian_eigensystem(&h)?;
        let ch = DepolarizingChannel::isotropic(0.15)?;
        let rho = psi.projector();
        let joint = switch_n(&ch, paths, &rho, &control)?;
        let mut total = 0.0;
        let mut mix = ComplexMatrix::zeros(2, 2);
        for k in 0..dim {
            let r = post_select(&joint, &basis.vector(k))?;
            total += r.probability;
            mix = &mix + &r.state.scale_real(r.probability);
        }
        prob_err = prob_err.max((total - 1.0).abs());
        state_err = state_err.max(mix.max_abs_diff(&joint.system_marginal()));
    }
    Ok((
        prob_err < 1e-12 && state_err < 1e-10,
        format!("probability sum error {prob_err:.3e}, mixture error {state_err:.3e}"),
    ))
}

fn input_independence(config: &VerifyConfig) -> Outcome {
    let ch = DepolarizingChannel::isotropic(0.2)?;
    let control = ControlState::two_path(0.3)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for psi in haar_pure_qubits(100, config.seed) {
        let rho = psi.projector();
        let joint = switch_two(&ch, &ch, &rho, &control)?;
        let f = qubit_fidelity(&rho, &post_select(&joint, &Sign::Plus.outcome())?.state)?;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    Ok(verdict(hi - lo, 1e-10))
}

fn coherence_equals_two_mu(_: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    for q in grid(0.0, 1.0, 21) {
        let control = ControlState::two_path(q)?;
        err = err.max((l1_coherence(control.state()) - 2.0 * control.mu()).abs());
    }
    Ok(verdict(err, 1e-12))
}

fn no_switch_merit_two(_: &VerifyConfig) -> Outcome {
    let quad = integrate_positive_part(
        |p| no_switch_fidelity(p, 2) - CLASSICAL_FIDELITY,
        0.0,
        P_MAX,
        &QuadratureSpec::default(),
    )?
    .value;
    let closed = no_switch_merit(2);
    let err = (closed - 0.016038).abs().max((quad - closed).abs());
    let (ok, detail) = verdict(err, 1e-6);
    Ok((ok, format!("{detail}; K = {closed:.10}")))
}

fn merit_bounds(_: &VerifyConfig) -> Outcome {
    let quad = QuadratureSpec::default();
    let mut values = Vec::new();
    for q in [0.0, 0.1, 0.5, 0.9] {
        let control = ControlState::two_path(q)?;
        for label in OutcomeLabel::ALL {
            if let Ok(m) = figure_of_merit(&label.outcome(), &control, 2, &quad) {
                values.push(m.k);
            }
        }
    }
    let ok = values.iter().all(|&k| (0.0..=MAX_MERIT).contains(&k));
    Ok((ok, format!("{} values within [0, 1/9]", values.len())))
}

fn merit_step_halving(_: &VerifyConfig) -> Outcome {
    let quad = QuadratureSpec::default();
    let mut err = 0.0f64;
    let cases = [
        (ControlState::two_path(0.5)?, Sign::Plus.outcome()),
        (ControlState::two_path(0.9)?, Sign::Minus.outcome()),
        (ControlState::uniform(3)?, AlphaOutcome { alpha: [-1.0; 3] }.outcome()?),
    ];
    for (control, outcome) in &cases {
        let n = control.paths();
        let coarse = figure_of_merit(outcome, control, n, &quad)?.k;
        let fine = figure_of_merit(outcome, control, n, &quad.refined())?.k;
        err = err.max((coarse - fine).abs());
    }
    Ok(verdict(err, 1e-8))
}

fn two_path_argmax_plus(_: &VerifyConfig) -> Outcome {
    let grid = GridSpec::stepped(0.0, 2.0, 0.05, PI / 90.0)?;
    let r = optimize_outcome(&ControlState::uniform(2)?, OutcomeFamily::TwoPath, &grid, &QuadratureSpec::default())?;
    let ok = (r.best.lambda - 1.0).abs() < 1e-9 && r.best.phi.abs() < 1e-9;
    Ok((
        ok,
        format!(
            "argmax (lambda, phi) = ({:.4}, {:.4}), K = {:.10}",
            r.best.lambda,
            r.best.phi,
            r.best.k.unwrap_or(f64::NAN)
        ),
    ))
}

fn switch_n_reduces_to_two(config: &VerifyConfig) -> Outcome {
    let mut err = 0.0f64;
    for p in grid(0.0, P_MAX, 6) {
        let ch = DepolarizingChannel::isotropic(p)?;
        for q in [0.0, 0.3, 0.5, 1.0] {
            let control = ControlState::two_path(q)?;
            for psi in haar_pure_qubits(3, config.seed) {
                let rho = psi.projector();
                let a = switch_n(&ch, 2, &rho, &control)?;
                let b = switch_two(&ch, &ch, &rho, &control)?;
                err = err.max(a.matrix().max_abs_diff(b.matrix()));
            }
        }
    }
    Ok(verdict(err, 1e-12))
}

fn alternating_outcome_lossless(_: &VerifyConfig) -> Outcome {
    let profile = alpha_fidelity_profile(&AlphaOutcome { alpha: [-1.0; 3] }, &[0.0, P_MAX])?;
    let at_max = profile[1].fidelity.unwrap_or(f64::NAN);
    let at_zero = profile[0].fidelity.unwrap_or(f64::NAN);
    let ok = (at_max - 1.0).abs() < 1e-9 && (at_zero - 1.0).abs() < 1e-12;
    Ok((
        ok,
        format!(
            "F(1/3) = {at_max:.12}, F(0) = {at_zero:.12} (p = 0 degenerate: {})",
            profile[0].degenerate
        ),
    ))
}

fn three_path_above_no_switch(_: &VerifyConfig) -> Outcome {
    let grid = GridSpec::stepped(0.0, 2.0, 0.1, PI / 36.0)?;
    let r = optimize_outcome(&ControlState::uniform(3)?, OutcomeFamily::ThreePath, &grid, &QuadratureSpec::default())?;
    let floor = no_switch_merit(3);
    let min = r
        .evaluations
        .iter()
        .map(|e| e.k.unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min);
    Ok((
        min >= floor - 1e-9,
        format!("min K = {min:.10} over {} points, no-switch K = {floor:.10}", r.evaluations.len()),
    ))
}

fn three_path_phase_peak(_: &VerifyConfig) -> Outcome {
    let grid = GridSpec::stepped(1.0, 1.0, 1.0, PI / 180.0)?;
    let r = optimize_outcome(&ControlState::uniform(3)?, OutcomeFamily::ThreePath, &grid, &QuadratureSpec::default())?;
    let phi = r.best.phi;
    Ok((
        (phi - PI / 12.0).abs() <= PI / 36.0,
        format!("peak at phi = {:.4} pi, K = {:.10}", phi / PI, r.best.k.unwrap_or(f64::NAN)),
    ))
}

fn tradeoff_converges_without_superposition(_: &VerifyConfig) -> Outcome {
    let quad = QuadratureSpec::default();
    let points = tradeoff_points(1.0, &OutcomeLabel::ALL, &quad)?;
    // |1⟩ never fires at q = 1; its curve is taken from the q -> 1 limit
    let near = tradeoff_points(1.0 - 1e-9, &[OutcomeLabel::One], &quad)?;
    let mut ks: Vec<f64> = points.iter().filter_map(|t| t.k).collect();
    ks.extend(near.iter().filter_map(|t| t.k));
    let mut totals: Vec<f64> = points.iter().map(|t| t.k_total).collect();
    totals.extend(near.iter().map(|t| t.k_total));
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let err = spread(&ks).max(spread(&totals));
    let (ok, detail) = verdict(err, 1e-9);
    Ok((ok && ks.len() == 4, format!("{detail} across {} outcome curves", ks.len())))
}

fn tradeoff_plus_vs_zero(_: &VerifyConfig) -> Outcome {
    let points = tradeoff_points(0.5, &[OutcomeLabel::Plus, OutcomeLabel::Zero], &QuadratureSpec::default())?;
    let (plus, zero) = (&points[0], &points[1]);
    let (kp, kz) = (plus.k.unwrap_or(f64::NAN), zero.k.unwrap_or(f64::NAN));
    Ok((
        kp > kz && plus.k_total < zero.k_total,
        format!(
            "K(+) = {kp:.10}, K(0) = {kz:.10}; K_total(+) = {:.10}, K_total(0) = {:.10}",
            plus.k_total, zero.k_total
        ),
    ))
}
