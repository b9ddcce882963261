//! Run configuration: built-in defaults, overridden by a TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;
use teleswitch::pauli::P_MAX;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeChoice {
    Plus,
    Minus,
    #[value(name = "0")]
    #[serde(rename = "0")]
    Zero,
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    /// `|0⟩ + λ e^{iφ}|1⟩` from `--lambda` and `--phi`.
    Custom,
}

/// Every tunable parameter. Fields left `None` fall through to the next layer.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Control weight: the two-path control is √q|0⟩ + √(1-q)|1⟩.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub p_min: Option<f64>,
    #[arg(long, global = true)]
    pub p_max: Option<f64>,
    #[arg(long, global = true)]
    pub p_step: Option<f64>,
    /// Fix λ of the outcome family (otherwise λ is scanned).
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Fix φ of the outcome family (otherwise φ is scanned).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_max: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_step: Option<f64>,
    #[arg(long, global = true)]
    pub phi_step: Option<f64>,
    #[arg(long, global = true)]
    pub mu_step: Option<f64>,
    #[arg(long, global = true)]
    pub q_step: Option<f64>,
    /// Three-path outcome coefficients on the odd orderings, e.g. -1,-1,-1.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub outcome: Option<OutcomeChoice>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Which table to emit for commands that produce more than one.
    #[arg(long, global = true)]
    pub table: Option<String>,
}

impl Params {
    /// Fills every unset field from `lower`.
    fn or(self, lower: Params) -> Params {
        Params {
            q: self.q.or(lower.q),
            p_min: self.p_min.or(lower.p_min),
            p_max: self.p_max.or(lower.p_max),
            p_step: self.p_step.or(lower.p_step),
            lambda: self.lambda.or(lower.lambda),
            phi: self.phi.or(lower.phi),
            lambda_min: self.lambda_min.or(lower.lambda_min),
            lambda_max: self.lambda_max.or(lower.lambda_max),
            lambda_step: self.lambda_step.or(lower.lambda_step),
            phi_step: self.phi_step.or(lower.phi_step),
            mu_step: self.mu_step.or(lower.mu_step),
            q_step: self.q_step.or(lower.q_step),
            alpha: self.alpha.or(lower.alpha),
            paths: self.paths.or(lower.paths),
            outcome: self.outcome.or(lower.outcome),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            table: self.table.or(lower.table),
        }
    }
}

/// Fully resolved configuration for one command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub p_step: f64,
    pub lambda: Option<f64>,
    pub phi: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_step: Option<f64>,
    pub phi_step: Option<f64>,
    pub mu_step: f64,
    pub q_step: f64,
    pub alpha: Option<[f64; 3]>,
    pub paths: Option<usize>,
    pub outcome: Option<OutcomeChoice>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// `None` lets each command pick its natural format.
    pub format: Option<Format>,
    pub table: Option<String>,
}

impl RunConfig {
    /// Merges flags over the config file (if any) over the defaults and validates ranges.
    pub fn resolve(flags: Params, config_path: Option<&Path>) -> Result<Self, CliError> {
        let file = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => Params::default(),
        };
        let p = flags.or(file);
        let alpha = match p.alpha {
            Some(v) => Some(
                <[f64; 3]>::try_from(v.as_slice())
                    .map_err(|_| CliError::Usage(format!("--alpha needs three values, got {}", v.len())))?,
            ),
            None => None,
        };
        let cfg = RunConfig {
            q: p.q.unwrap_or(0.5),
            p_min: p.p_min.unwrap_or(0.0),
            p_max: p.p_max.unwrap_or(P_MAX),
            p_step: p.p_step.unwrap_or(0.001),
            lambda: p.lambda,
            phi: p.phi,
            lambda_min: p.lambda_min,
            lambda_max: p.lambda_max,
            lambda_step: p.lambda_step,
            phi_step: p.phi_step,
            mu_step: p.mu_step.unwrap_or(0.01),
            q_step: p.q_step.unwrap_or(0.05),
            alpha,
            paths: p.paths,
            outcome: p.outcome,
            seed: p.seed.unwrap_or(42),
            out: p.out,
            format: p.format,
            table: p.table,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !(0.0..=1.0).contains(&self.q) {
            return usage(format!("--q {} is outside [0, 1]", self.q));
        }
        // allow the user to type 0.3333333333 for the upper end
        let p_hi = P_MAX + 1e-9;
        if !(0.0..=p_hi).contains(&self.p_min) || !(0.0..=p_hi).contains(&self.p_max) || self.p_min > self.p_max {
            return usage(format!(
                "p range [{}, {}] must lie within [0, 1/3] with p-min <= p-max",
                self.p_min, self.p_max
            ));
        }
        for (name, step) in [
            ("p-step", Some(self.p_step)),
            ("mu-step", Some(self.mu_step)),
            ("q-step", Some(self.q_step)),
            ("lambda-step", self.lambda_step),
            ("phi-step", self.phi_step),
        ] {
            if let Some(s) = step {
                if !(s > 0.0 && s.is_finite()) {
                    return usage(format!("--{name} must be positive, got {s}"));
                }
            }
        }
        for (name, v) in [("lambda", self.lambda), ("lambda-min", self.lambda_min), ("lambda-max", self.lambda_max)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return usage(format!("--{name} must be non-negative, got {v}"));
                }
            }
        }
        if let Some(phi) = self.phi {
            if !phi.is_finite() {
                return usage("--phi must be finite".into());
            }
        }
        if let Some(n) = self.paths {
            if !(2..=3).contains(&n) {
                return usage(format!("--paths {n} (supported: 2 or 3)"));
            }
        }
        Ok(())
    }

    /// The p grid, always including both end points.
    pub fn p_grid(&self) -> Vec<f64> {
        let p_max = self.p_max.min(P_MAX);
        let p_min = self.p_min.min(p_max);
        let mut grid = teleswitch::analysis::stepped_range(p_min, p_max, self.p_step).expect("validated range");
        if p_max - grid.last().copied().unwrap_or(p_min) > 1e-12 {
            grid.push(p_max);
        }
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = std::env::temp_dir().join(format!("teleswitch-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "q = 0.25\np-step = 0.01\nseed = 7\n").unwrap();
        let flags = Params {
            q: Some(0.75),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags, Some(&path)).unwrap();
        assert_eq!(cfg.q, 0.75);
        assert_eq!(cfg.p_step, 0.01);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.p_max, P_MAX);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn p_grid_keeps_the_upper_end() {
        let cfg = RunConfig::resolve(Params::default(), None).unwrap();
        let grid = cfg.p_grid();
        assert_eq!(grid.len(), 335);
        assert_eq!(*grid.last().unwrap(), P_MAX);
    }

    #[test]
    fn rejects_bad_ranges() {
        let bad = Params {
            p_min: Some(0.2),
            p_max: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(bad, None), Err(CliError::Usage(_))));
        let bad = Params {
            q: Some(1.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(bad, None).is_err());
    }
}
