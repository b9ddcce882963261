use std::f64::consts::PI;

use rayon::prelude::*;
use teleswitch::analysis::{
    advantage_regions, alpha_fidelity_profile, figure_of_merit, k_total, l1_coherence, optimize_outcome,
    stepped_range, switched_fidelity, AlphaOutcome, GridSpec, OutcomeFamily, OutcomeFamily2, OutcomeLabel,
    SwitchParams, MU_THRESHOLD,
};
use teleswitch::pauli::{no_switch_fidelity, CLASSICAL_FIDELITY};
use teleswitch::quadrature::QuadratureSpec;
use teleswitch::switch::ControlState;
use teleswitch::Error;

use crate::config::{OutcomeChoice, RunConfig};
use crate::output::{format_g12, Cell, Table};
use crate::CliError;

/// The four outcome tuples of the three-path fidelity comparison.
pub const ALPHA_TUPLES: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -1.0, 0.0], [-1.0, -1.0, -1.0]];

fn select_table<'a>(cfg: &RunConfig, allowed: &[&'a str]) -> Result<&'a str, CliError> {
    match &cfg.table {
        None => Ok(allowed[0]),
        Some(t) => allowed
            .iter()
            .find(|a| **a == t.as_str())
            .copied()
            .ok_or_else(|| CliError::Usage(format!("--table {t} (choose from {})", allowed.join(", ")))),
    }
}

/// Closed range plus its end point when the step does not land on it.
fn closed_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>, CliError> {
    let mut v = stepped_range(start, end, step)?;
    if end - v.last().copied().unwrap_or(start) > 1e-12 {
        v.push(end);
    }
    Ok(v)
}

fn outcome_grid(cfg: &RunConfig, lambda: (f64, f64, f64), phi_step: f64) -> Result<GridSpec, CliError> {
    let lambdas = match cfg.lambda {
        Some(l) => vec![l],
        None => closed_range(
            cfg.lambda_min.unwrap_or(lambda.0),
            cfg.lambda_max.unwrap_or(lambda.1),
            cfg.lambda_step.unwrap_or(lambda.2),
        )?,
    };
    let phis = match cfg.phi {
        Some(p) => vec![p],
        None => {
            let mut v = stepped_range(0.0, 2.0 * PI, cfg.phi_step.unwrap_or(phi_step))?;
            v.retain(|&phi| phi < 2.0 * PI - 1e-9);
            v
        }
    };
    Ok(GridSpec { lambdas, phis })
}

pub fn fidelity_curves(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(
        "fidelity-curves",
        "curves",
        &[
            ("p", "isotropic noise level of each channel"),
            ("F1", "single channel, 1 - 2p"),
            ("F2", "two channels in sequence, 1 - 4p + 8p^2"),
            ("F_switch_plus", "two channels under the switch, control weight q, outcome |+>"),
            ("classical_threshold", "best classical teleportation fidelity, 2/3"),
        ],
    );
    for p in cfg.p_grid() {
        let params = SwitchParams::new(p, cfg.q)?;
        t.push(vec![
            Cell::Num(p),
            Cell::Num(no_switch_fidelity(p, 1)),
            Cell::Num(no_switch_fidelity(p, 2)),
            Cell::Num(switched_fidelity(&params)),
            Cell::Num(CLASSICAL_FIDELITY),
        ]);
    }
    Ok(t)
}

pub fn region_map(cfg: &RunConfig) -> Result<Table, CliError> {
    match select_table(cfg, &["regions", "surface"])? {
        "regions" => {
            let mut mus = closed_range(0.0, 0.5, cfg.mu_step)?;
            // always include the threshold where the second region appears
            mus.push(MU_THRESHOLD);
            mus.sort_by(f64::total_cmp);
            mus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            let mut t = Table::new(
                "region-map",
                "regions",
                &[
                    ("mu", "sqrt(q(1-q)) of the two-path control"),
                    ("p_lo", "region 1 is [0, p_lo)"),
                    ("p_hi", "upper root of the boundary; region 2 is (p_hi, 1/3] when it exists"),
                    ("region2_exists", "true iff mu > 1/6"),
                ],
            );
            for mu in mus {
                let r = advantage_regions(mu)?;
                t.push(vec![
                    Cell::Num(mu),
                    Cell::Num(r.p_lo),
                    Cell::Num(r.p_hi),
                    Cell::Bool(r.region2_exists()),
                ]);
            }
            Ok(t)
        }
        _ => {
            let qs = closed_range(0.0, 1.0, cfg.q_step)?;
            let mut t = Table::new(
                "region-map",
                "surface",
                &[
                    ("p", "isotropic noise level"),
                    ("q", "control weight"),
                    ("F", "switched fidelity with outcome |+>"),
                ],
            );
            for p in cfg.p_grid() {
                for &q in &qs {
                    t.push(vec![
                        Cell::Num(p),
                        Cell::Num(q),
                        Cell::Num(switched_fidelity(&SwitchParams::new(p, q)?)),
                    ]);
                }
            }
            Ok(t)
        }
    }
}

pub fn fom_scan(cfg: &RunConfig) -> Result<Table, CliError> {
    let paths = cfg.paths.unwrap_or(2);
    let (control, family) = match paths {
        2 => (ControlState::two_path(cfg.q)?, OutcomeFamily::TwoPath),
        _ => (ControlState::uniform(3)?, OutcomeFamily::ThreePath),
    };
    let grid = outcome_grid(cfg, (0.0, 2.0, 0.05), PI / 90.0)?;
    let result = optimize_outcome(&control, family, &grid, &QuadratureSpec::default())?;
    eprintln!(
        "argmax: lambda = {}, phi = {}, K = {}",
        format_g12(result.best.lambda),
        format_g12(result.best.phi),
        result.best.k.map_or("none".into(), format_g12)
    );
    let mut t = Table::new(
        "fom-scan",
        "scan",
        &[
            ("lambda", "outcome amplitude ratio"),
            ("phi", "outcome relative phase"),
            ("K", "figure of merit; empty when the outcome never occurs"),
        ],
    );
    for e in result.evaluations {
        t.push(vec![Cell::Num(e.lambda), Cell::Num(e.phi), Cell::opt(e.k)]);
    }
    Ok(t)
}

fn merit_or_none(outcome: &teleswitch::PureStateVector, control: &ControlState) -> Result<Option<f64>, CliError> {
    match figure_of_merit(outcome, control, 2, &QuadratureSpec::default()) {
        Ok(m) => Ok(Some(m.k)),
        Err(Error::DegenerateOutcome(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn tradeoff(cfg: &RunConfig) -> Result<Table, CliError> {
    let qs = closed_range(0.0, 1.0, cfg.q_step)?;
    let outcomes: Vec<(String, teleswitch::PureStateVector)> = match cfg.outcome {
        None => OutcomeLabel::ALL.iter().map(|l| (l.to_string(), l.outcome())).collect(),
        Some(OutcomeChoice::Custom) => {
            let family = OutcomeFamily2 {
                lambda: cfg.lambda.unwrap_or(1.0),
                phi: cfg.phi.unwrap_or(0.0),
            };
            vec![("custom".to_string(), family.outcome()?)]
        }
        Some(choice) => {
            let label = match choice {
                OutcomeChoice::Plus => OutcomeLabel::Plus,
                OutcomeChoice::Minus => OutcomeLabel::Minus,
                OutcomeChoice::Zero => OutcomeLabel::Zero,
                _ => OutcomeLabel::One,
            };
            vec![(label.to_string(), label.outcome())]
        }
    };
    let rows = qs
        .par_iter()
        .map(|&q| -> Result<Vec<Vec<Cell>>, CliError> {
            let control = ControlState::two_path(q)?;
            let total = k_total(&control, &QuadratureSpec::default())?;
            outcomes
                .iter()
                .map(|(label, outcome)| {
                    Ok(vec![
                        Cell::Num(q),
                        Cell::Num(total),
                        Cell::opt(merit_or_none(outcome, &control)?),
                        Cell::Text(label.clone()),
                    ])
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "tradeoff",
        "tradeoff",
        &[
            ("q", "control weight"),
            ("K_total", "integrated fidelity of the joint output with the joint input, before measurement"),
            ("K", "figure of merit of the post-selected outcome; empty when it never occurs"),
            ("outcome_label", "post-selected control outcome"),
        ],
    );
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

pub fn coherence_scan(cfg: &RunConfig) -> Result<Table, CliError> {
    let qs = closed_range(0.0, 1.0, cfg.q_step)?;
    let grid = outcome_grid(cfg, (0.0, 2.0, 0.1), PI / 18.0)?;
    let quad = QuadratureSpec::default();
    let mut t = Table::new(
        "coherence-scan",
        "coherence",
        &[
            ("q", "control weight"),
            ("coherence", "l1-norm of coherence of the control, 2 sqrt(q(1-q))"),
            ("K_optimal", "best figure of merit over the outcome grid"),
            ("lambda_opt", "maximizing outcome amplitude ratio"),
            ("phi_opt", "maximizing outcome phase"),
        ],
    );
    for q in qs {
        let control = ControlState::two_path(q)?;
        let best = optimize_outcome(&control, OutcomeFamily::TwoPath, &grid, &quad)?.best;
        t.push(vec![
            Cell::Num(q),
            Cell::Num(l1_coherence(control.state())),
            Cell::opt(best.k),
            Cell::Num(best.lambda),
            Cell::Num(best.phi),
        ]);
    }
    Ok(t)
}

fn alpha_label(alpha: &[f64; 3]) -> String {
    alpha.iter().map(|a| format_g12(*a)).collect::<Vec<_>>().join("_")
}

pub fn three_path(cfg: &RunConfig) -> Result<Table, CliError> {
    if let Some(n) = cfg.paths.filter(|&n| n != 3) {
        return Err(CliError::Usage(format!("three-path needs --paths 3, got {n}")));
    }
    match select_table(cfg, &["alpha", "phase"])? {
        "alpha" => {
            let tuples: Vec<[f64; 3]> = cfg.alpha.map_or(ALPHA_TUPLES.to_vec(), |a| vec![a]);
            let grid = cfg.p_grid();
            let profiles = tuples
                .iter()
                .map(|&alpha| alpha_fidelity_profile(&AlphaOutcome { alpha }, &grid))
                .collect::<Result<Vec<_>, _>>()?;
            let names: Vec<String> = tuples.iter().map(|a| format!("F_{}", alpha_label(a))).collect();
            let descriptions: Vec<String> = tuples
                .iter()
                .map(|a| format!("post-selected fidelity, odd-ordering coefficients {a:?}"))
                .collect();
            let mut columns: Vec<(&str, &str)> = vec![("p", "isotropic noise level")];
            columns.extend(names.iter().map(String::as_str).zip(descriptions.iter().map(String::as_str)));
            columns.push(("F_no_switch", "three channels in sequence, 1/2 + (1 - 4p)^3 / 2"));
            columns.push(("annotation", "tuples whose outcome has zero probability at this p"));
            let mut t = Table::new("three-path", "alpha", &columns);
            for (k, &p) in grid.iter().enumerate() {
                let mut row = vec![Cell::Num(p)];
                let mut notes = Vec::new();
                for (alpha, profile) in tuples.iter().zip(&profiles) {
                    let point = profile[k];
                    row.push(Cell::opt(point.fidelity));
                    if point.degenerate {
                        let how = if point.fidelity.is_some() { "product output" } else { "omitted" };
                        notes.push(format!("degenerate {} ({how})", alpha_label(alpha)));
                    }
                }
                row.push(Cell::Num(no_switch_fidelity(p, 3)));
                row.push(Cell::Text(notes.join("; ")));
                t.push(row);
            }
            Ok(t)
        }
        _ => {
            let grid = outcome_grid(cfg, (0.0, 2.0, 0.5), PI / 180.0)?;
            let result = optimize_outcome(
                &ControlState::uniform(3)?,
                OutcomeFamily::ThreePath,
                &grid,
                &QuadratureSpec::default(),
            )?;
            let mut t = Table::new(
                "three-path",
                "phase",
                &[
                    ("phi", "relative phase of the odd orderings"),
                    ("lambda", "amplitude of the odd orderings"),
                    ("K", "figure of merit, uniform three-path control"),
                ],
            );
            for e in result.evaluations {
                t.push(vec![Cell::Num(e.phi), Cell::Num(e.lambda), Cell::opt(e.k)]);
            }
            Ok(t)
        }
    }
}
