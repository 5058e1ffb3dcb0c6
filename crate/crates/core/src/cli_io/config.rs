//! Line-oriented `key=value` run configuration.
//!
//! `#` starts a comment, keys are case-sensitive, every key is optional and
//! unknown keys are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::analysis::StudySetup;
use crate::error::{Error, Result};
use crate::mesh::{GridKind, SpatialGrid, TimeGrid, time_grid_from_space, TimeStepRule};
use crate::model::ModelParams;
use crate::schemes::{BoundaryFn, LeftBoundary, SchemeConfig, SchemeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridChoice {
    Uniform,
    Tavella,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftBcChoice {
    /// `φ_l ≡ γ·h(s_min)`.
    Dirichlet,
    Natural,
}

pub const DEFAULT_ALPHA: f64 = 15.0;
pub const DEFAULT_INTERVALS: usize = 240;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridChoice,
    pub intervals: usize,
    pub alpha: f64,
    pub tau_rule: TimeStepRule,
    pub scheme: SchemeKind,
    pub left_bc: LeftBcChoice,
    pub capture_trajectory: bool,
    pub enforce_restriction: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::reference_market(),
            grid: GridChoice::Uniform,
            intervals: DEFAULT_INTERVALS,
            alpha: DEFAULT_ALPHA,
            tau_rule: TimeStepRule::HalfMinSpacing,
            scheme: SchemeKind::ImexLinear,
            left_bc: LeftBcChoice::Natural,
            capture_trajectory: false,
            enforce_restriction: false,
            output_path: None,
        }
    }
}

const KEYS: &[&str] = &[
    "sigma",
    "mu",
    "gamma",
    "nu01",
    "nu10",
    "strike",
    "horizon",
    "s_min",
    "s_max",
    "grid",
    "intervals",
    "alpha",
    "tau_rule",
    "scheme",
    "left_bc",
    "capture_trajectory",
    "enforce_restriction",
    "output",
];

impl RunConfig {
    pub fn grid_kind(&self) -> GridKind {
        match self.grid {
            GridChoice::Uniform => GridKind::Uniform,
            GridChoice::Tavella => GridKind::TavellaRandall { alpha: self.alpha },
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let left_bc = match self.left_bc {
            LeftBcChoice::Natural => LeftBoundary::NaturalOde,
            LeftBcChoice::Dirichlet => {
                let p = &self.params;
                let value = p.gamma * crate::model::payoff_call(p.s_min, p.strike);
                LeftBoundary::Dirichlet(BoundaryFn::Constant(value))
            }
        };
        SchemeConfig {
            left_bc,
            enforce_positivity_restriction: self.enforce_restriction,
            capture_trajectory: self.capture_trajectory,
            ..SchemeConfig::new(self.scheme)
        }
    }

    pub fn study_setup(&self) -> StudySetup {
        StudySetup {
            params: self.params,
            config: self.scheme_config(),
            grid_kind: self.grid_kind(),
            tau_rule: self.tau_rule,
        }
    }

    pub fn build_grids(&self) -> Result<(SpatialGrid, TimeGrid)> {
        let p = &self.params;
        let grid = SpatialGrid::build(self.grid_kind(), p.s_min, p.s_max, p.strike, self.intervals)?;
        let tg = time_grid_from_space(&grid, p.horizon, self.tau_rule)?;
        Ok((grid, tg))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.intervals < 2 {
            return Err(Error::param("intervals", format!("need at least 2, got {}", self.intervals)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be finite and > 0, got {}", self.alpha)));
        }
        if let TimeStepRule::Explicit(dt) = self.tau_rule {
            if !(dt.is_finite() && dt > 0.0 && dt <= self.params.horizon) {
                return Err(Error::param("tau_rule", format!("step must lie in (0, horizon], got {dt}")));
            }
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Config {
        line,
        key: key.into(),
        reason: format!("expected a number, got `{value}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config {
            line,
            key: key.into(),
            reason: format!("expected true or false, got `{value}`"),
        }),
    }
}

fn bad_choice(line: usize, key: &str, value: &str, allowed: &str) -> Error {
    Error::Config {
        line,
        key: key.into(),
        reason: format!("expected one of {allowed}, got `{value}`"),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.into(),
            reason: "expected key=value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                key: key.into(),
                reason: "unknown key".into(),
            });
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(Error::Config {
                line,
                key: key.into(),
                reason: format!("duplicate key, first set on line {first}"),
            });
        }
        if value.is_empty() {
            return Err(Error::Config {
                line,
                key: key.into(),
                reason: "missing value".into(),
            });
        }
        let p = &mut cfg.params;
        match key {
            "sigma" => p.sigma = parse_f64(line, key, value)?,
            "mu" => p.mu = parse_f64(line, key, value)?,
            "gamma" => p.gamma = parse_f64(line, key, value)?,
            "nu01" => p.nu01 = parse_f64(line, key, value)?,
            "nu10" => p.nu10 = parse_f64(line, key, value)?,
            "strike" => p.strike = parse_f64(line, key, value)?,
            "horizon" => p.horizon = parse_f64(line, key, value)?,
            "s_min" => p.s_min = parse_f64(line, key, value)?,
            "s_max" => p.s_max = parse_f64(line, key, value)?,
            "grid" => {
                cfg.grid = match value {
                    "uniform" => GridChoice::Uniform,
                    "tavella" => GridChoice::Tavella,
                    _ => return Err(bad_choice(line, key, value, "uniform|tavella")),
                }
            }
            "intervals" => {
                cfg.intervals = value.parse().map_err(|_| Error::Config {
                    line,
                    key: key.into(),
                    reason: format!("expected a non-negative integer, got `{value}`"),
                })?
            }
            "alpha" => cfg.alpha = parse_f64(line, key, value)?,
            "tau_rule" => {
                cfg.tau_rule = match value {
                    "half_min_spacing" => TimeStepRule::HalfMinSpacing,
                    _ => TimeStepRule::Explicit(parse_f64(line, key, value)?),
                }
            }
            "scheme" => {
                cfg.scheme = match value {
                    "linear" => SchemeKind::ImexLinear,
                    "linearized" => SchemeKind::ImexLinearized,
                    _ => return Err(bad_choice(line, key, value, "linear|linearized")),
                }
            }
            "left_bc" => {
                cfg.left_bc = match value {
                    "dirichlet" => LeftBcChoice::Dirichlet,
                    "natural" => LeftBcChoice::Natural,
                    _ => return Err(bad_choice(line, key, value, "dirichlet|natural")),
                }
            }
            "capture_trajectory" => cfg.capture_trajectory = parse_bool(line, key, value)?,
            "enforce_restriction" => cfg.enforce_restriction = parse_bool(line, key, value)?,
            "output" => cfg.output_path = Some(PathBuf::from(value)),
            _ => unreachable!("key list and match arms disagree"),
        }
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            line: seen.get(name).copied().unwrap_or(0),
            key: name.into(),
            reason,
        },
        other => other,
    })?;
    Ok(cfg)
}

/// Every key, in a fixed order. Numbers use the shortest round-trip form.
pub fn emit_config(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    put("sigma", p.sigma.to_string());
    put("mu", p.mu.to_string());
    put("gamma", p.gamma.to_string());
    put("nu01", p.nu01.to_string());
    put("nu10", p.nu10.to_string());
    put("strike", p.strike.to_string());
    put("horizon", p.horizon.to_string());
    put("s_min", p.s_min.to_string());
    put("s_max", p.s_max.to_string());
    put(
        "grid",
        match cfg.grid {
            GridChoice::Uniform => "uniform",
            GridChoice::Tavella => "tavella",
        }
        .into(),
    );
    put("intervals", cfg.intervals.to_string());
    put("alpha", cfg.alpha.to_string());
    put(
        "tau_rule",
        match cfg.tau_rule {
            TimeStepRule::HalfMinSpacing => "half_min_spacing".into(),
            TimeStepRule::Explicit(dt) => dt.to_string(),
        },
    );
    put(
        "scheme",
        match cfg.scheme {
            SchemeKind::ImexLinear => "linear",
            SchemeKind::ImexLinearized => "linearized",
        }
        .into(),
    );
    put(
        "left_bc",
        match cfg.left_bc {
            LeftBcChoice::Dirichlet => "dirichlet",
            LeftBcChoice::Natural => "natural",
        }
        .into(),
    );
    put("capture_trajectory", cfg.capture_trajectory.to_string());
    put("enforce_restriction", cfg.enforce_restriction.to_string());
    if let Some(path) = &cfg.output_path {
        put("output", path.display().to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = parse_config("sigma=0.3\nnu01=1\nnu10=12").unwrap();
        assert_eq!(cfg.params, ModelParams::reference_market());
        assert_eq!(cfg.params.strike, 2.0);
        assert_eq!(cfg.params.horizon, 1.0);
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn comments_blank_lines_and_spacing() {
        let text = "# market\n\n  sigma = 0.25   # vol\nscheme=linearized\ngrid=tavella\nalpha=5\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.params.sigma, 0.25);
        assert_eq!(cfg.scheme, SchemeKind::ImexLinearized);
        assert_eq!(cfg.grid_kind(), GridKind::TavellaRandall { alpha: 5.0 });
    }

    #[test]
    fn negative_sigma_names_the_key() {
        let err = parse_config("nu01=1\nsigma=-1").unwrap_err();
        match err {
            Error::Config { line, key, reason } => {
                assert_eq!(line, 2);
                assert_eq!(key, "sigma");
                assert!(reason.contains("> 0"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_entries_report_line_and_key() {
        let cases = [
            ("sigma=0.3\nSigma=0.3", 2, "Sigma"),
            ("sigma=abc", 1, "sigma"),
            ("\n\nno_equals_here", 3, "no_equals_here"),
            ("grid=hex", 1, "grid"),
            ("sigma=0.3\nsigma=0.4", 2, "sigma"),
            ("intervals=-4", 1, "intervals"),
            ("capture_trajectory=yes", 1, "capture_trajectory"),
            ("mu=", 1, "mu"),
            ("s_max=1.5", 1, "s_max"),
        ];
        for (text, want_line, want_key) in cases {
            match parse_config(text) {
                Err(Error::Config { line, key, .. }) => {
                    assert_eq!((line, key.as_str()), (want_line, want_key), "{text:?}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn explicit_time_step() {
        let cfg = parse_config("tau_rule=0.01").unwrap();
        assert_eq!(cfg.tau_rule, TimeStepRule::Explicit(0.01));
        let (_, tg) = cfg.build_grids().unwrap();
        assert_eq!(tg.steps, 100);
        assert!(parse_config("tau_rule=0").is_err());
        assert!(parse_config("tau_rule=2").is_err());
    }

    #[test]
    fn dirichlet_left_uses_payoff_at_s_min() {
        let cfg = parse_config("left_bc=dirichlet").unwrap();
        match cfg.scheme_config().left_bc {
            LeftBoundary::Dirichlet(f) => assert_eq!(f.eval(0.3), 0.0),
            other => panic!("{other:?}"),
        }
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (0.01..2.0f64, -0.5..0.5f64, 0.1..5.0f64, 0.01..20.0f64, 0.01..20.0f64),
            (0.5..3.0f64, 0.1..3.0f64, 0.0..0.4f64, 1.1..4.0f64),
            (any::<bool>(), 2usize..2000, 0.1..50.0f64, prop::option::of(1e-4..0.1f64)),
            (any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>(), prop::option::of("[a-z]{1,8}\\.csv")),
        )
            .prop_map(|(m, g, n, f)| {
                let (sigma, mu, gamma, nu01, nu10) = m;
                let (strike, horizon, smin_frac, smax_mult) = g;
                RunConfig {
                    params: ModelParams {
                        sigma,
                        mu,
                        gamma,
                        nu01,
                        nu10,
                        strike,
                        horizon,
                        s_min: smin_frac * strike,
                        s_max: smax_mult * strike,
                    },
                    grid: if n.0 { GridChoice::Tavella } else { GridChoice::Uniform },
                    intervals: n.1,
                    alpha: n.2,
                    tau_rule: match n.3 {
                        Some(dt) => TimeStepRule::Explicit(dt * horizon),
                        None => TimeStepRule::HalfMinSpacing,
                    },
                    scheme: if f.0 { SchemeKind::ImexLinearized } else { SchemeKind::ImexLinear },
                    left_bc: if f.1 { LeftBcChoice::Dirichlet } else { LeftBcChoice::Natural },
                    capture_trajectory: f.2,
                    enforce_restriction: f.3,
                    output_path: f.4.map(PathBuf::from),
                }
            })
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(cfg in arb_config()) {
            let text = emit_config(&cfg);
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(emit_config(&back), text);
        }
    }
}
