//! Convergence studies, Richardson extrapolation, reference oracles and
//! run audits.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{time_grid_from_space, GridKind, SpatialGrid, TimeGrid, TimeStepRule};
use crate::model::{derive_constants, to_prices, ModelParams, Payoff, ReactionRates};
use crate::schemes::{
    solve_problem, ForwardProblem, ForwardRun, GridState, RunDiagnostics, SchemeConfig, Stepper,
};
use crate::tridiag::TridiagonalSystem;

/// `(2^p·w − z)/(2^p − 1)`, where `w` used half the time step of `z`.
pub fn richardson(z: f64, w: f64, p: u32) -> Result<f64> {
    if !(1..=52).contains(&p) {
        return Err(Error::param("p", format!("order must be in 1..=52, got {p}")));
    }
    let scale = (1u64 << p) as f64;
    Ok((scale * w - z) / (scale - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonResult {
    pub coarse_value: f64,
    pub fine_value: f64,
    pub extrapolated: f64,
    pub order_input: u32,
}

impl RichardsonResult {
    pub fn new(z: f64, w: f64, p: u32) -> Result<Self> {
        Ok(RichardsonResult {
            coarse_value: z,
            fine_value: w,
            extrapolated: richardson(z, w, p)?,
            order_input: p,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `R⁰ = U/γ`.
    Liquid,
    /// `R¹ = V/γ`.
    Illiquid,
}

/// Scalar quantity extracted from a final state.
#[derive(Clone)]
pub enum Probe {
    /// Linear interpolation of `R⁰` or `R¹` at the strike.
    AtStrike(Regime),
    At(Regime, f64),
    Custom(Arc<dyn Fn(&SpatialGrid, &GridState) -> f64 + Send + Sync>),
}

impl Probe {
    pub fn custom(f: impl Fn(&SpatialGrid, &GridState) -> f64 + Send + Sync + 'static) -> Self {
        Probe::Custom(Arc::new(f))
    }

    pub fn eval(&self, params: &ModelParams, grid: &SpatialGrid, state: &GridState) -> f64 {
        let pick = |regime: Regime, s: f64| {
            let values = match regime {
                Regime::Liquid => &state.u,
                Regime::Illiquid => &state.v,
            };
            grid.interpolate(values, s) / params.gamma
        };
        match self {
            Probe::AtStrike(r) => pick(*r, params.strike),
            Probe::At(r, s) => pick(*r, *s),
            Probe::Custom(f) => f(grid, state),
        }
    }
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::AtStrike(r) => f.debug_tuple("AtStrike").field(r).finish(),
            Probe::At(r, s) => f.debug_tuple("At").field(r).field(s).finish(),
            Probe::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Everything but the level list that a study needs.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub params: ModelParams,
    pub config: SchemeConfig,
    pub grid_kind: GridKind,
    pub tau_rule: TimeStepRule,
}

impl StudySetup {
    pub fn new(params: ModelParams, config: SchemeConfig, grid_kind: GridKind) -> Self {
        StudySetup {
            params,
            config,
            grid_kind,
            tau_rule: TimeStepRule::HalfMinSpacing,
        }
    }

    pub fn grid(&self, intervals: usize) -> Result<SpatialGrid> {
        let p = &self.params;
        SpatialGrid::build(self.grid_kind, p.s_min, p.s_max, p.strike, intervals)
    }

    pub fn time_grid(&self, grid: &SpatialGrid) -> Result<TimeGrid> {
        time_grid_from_space(grid, self.params.horizon, self.tau_rule)
    }

    pub fn problem(&self) -> Result<ForwardProblem> {
        ForwardProblem::from_params(&self.params)
    }

    /// One run on `intervals` cells with the time step divided by `refine`.
    pub fn run(&self, intervals: usize, refine: usize) -> Result<(SpatialGrid, TimeGrid, ForwardRun)> {
        let grid = self.grid(intervals)?;
        let tg = self.time_grid(&grid)?.refined(refine);
        let run = solve_problem(&self.problem()?, &grid, &tg, &self.config)?;
        Ok((grid, tg, run))
    }
}

pub fn validate_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::param("levels", "need at least one level"));
    }
    for pair in levels.windows(2) {
        if pair[1] != 2 * pair[0] {
            return Err(Error::param(
                "levels",
                format!("each level must double the previous ({} then {})", pair[0], pair[1]),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub intervals: usize,
    pub value: f64,
    /// `|value_I − value_{I/2}|`, absent on the first row.
    pub difference: Option<f64>,
    /// `difference_{I/2} / difference_I`, from the third row on.
    pub ratio: Option<f64>,
    /// `log₂ ratio`.
    pub order: Option<f64>,
}

/// Successive-difference table for a doubling sequence of values.
pub fn convergence_rows(levels: &[usize], values: &[f64]) -> Vec<ConvergenceRow> {
    assert_eq!(levels.len(), values.len());
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (k, (&intervals, &value)) in levels.iter().zip(values).enumerate() {
        let difference = (k > 0).then(|| (value - values[k - 1]).abs());
        let ratio = match (rows.last().and_then(|r| r.difference), difference) {
            (Some(prev), Some(cur)) if cur > 0.0 => Some(prev / cur),
            _ => None,
        };
        rows.push(ConvergenceRow {
            intervals,
            value,
            difference,
            ratio,
            order: ratio.map(f64::log2),
        });
    }
    rows
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// One table per probe, in probe order.
    pub tables: Vec<Vec<ConvergenceRow>>,
    pub diagnostics: RunDiagnostics,
}

/// Run every level (in parallel) and tabulate each probe.
pub fn convergence_study(setup: &StudySetup, levels: &[usize], probes: &[Probe]) -> Result<ConvergenceStudy> {
    validate_levels(levels)?;
    let per_level: Vec<(Vec<f64>, RunDiagnostics)> = levels
        .par_iter()
        .map(|&n| {
            let (grid, _, run) = setup.run(n, 1)?;
            let values = probes
                .iter()
                .map(|p| p.eval(&setup.params, &grid, &run.final_state))
                .collect();
            Ok((values, run.diagnostics))
        })
        .collect::<Result<_>>()?;

    let mut diagnostics = RunDiagnostics::default();
    for (_, d) in &per_level {
        diagnostics.merge(d);
    }
    let tables = (0..probes.len())
        .map(|k| {
            let values: Vec<f64> = per_level.iter().map(|(v, _)| v[k]).collect();
            convergence_rows(levels, &values)
        })
        .collect();
    Ok(ConvergenceStudy { tables, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolatedRow {
    pub intervals: usize,
    pub richardson: RichardsonResult,
    /// `|Y_I − Y_{I/2}|`.
    pub difference: Option<f64>,
    pub ratio: Option<f64>,
    pub order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExtrapolatedStudy {
    pub rows: Vec<ExtrapolatedRow>,
    pub diagnostics: RunDiagnostics,
}

/// At each level pair `Z` (base step) with `W` (half step) on the same
/// spatial grid and extrapolate with order `p`.
pub fn extrapolated_study(setup: &StudySetup, levels: &[usize], probe: &Probe, p: u32) -> Result<ExtrapolatedStudy> {
    validate_levels(levels)?;
    richardson(0.0, 0.0, p)?;
    let jobs: Vec<(usize, usize)> = levels.iter().flat_map(|&n| [(n, 1), (n, 2)]).collect();
    let results: Vec<(f64, RunDiagnostics)> = jobs
        .par_iter()
        .map(|&(n, refine)| {
            let (grid, _, run) = setup.run(n, refine)?;
            Ok((probe.eval(&setup.params, &grid, &run.final_state), run.diagnostics))
        })
        .collect::<Result<_>>()?;

    let mut diagnostics = RunDiagnostics::default();
    for (_, d) in &results {
        diagnostics.merge(d);
    }
    let pairs: Vec<RichardsonResult> = results
        .chunks(2)
        .map(|c| RichardsonResult::new(c[0].0, c[1].0, p))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = pairs.iter().map(|r| r.extrapolated).collect();
    let rows = convergence_rows(levels, &ys)
        .into_iter()
        .zip(pairs)
        .map(|(row, richardson)| ExtrapolatedRow {
            intervals: row.intervals,
            richardson,
            difference: row.difference,
            ratio: row.ratio,
            order: row.order,
        })
        .collect();
    Ok(ExtrapolatedStudy { rows, diagnostics })
}

/// Classical RK4 on the reaction-only system
/// `u' = b − a·e^{u−v}`, `v' = c·(1 − e^{v−u})`.
pub fn integrate_reaction(rates: ReactionRates, u0: f64, v0: f64, horizon: f64, steps: usize) -> (f64, f64) {
    let rhs = |u: f64, v: f64| {
        (
            rates.b - rates.a * (u - v).exp(),
            rates.c * (1.0 - (v - u).exp()),
        )
    };
    let h = horizon / steps as f64;
    let (mut u, mut v) = (u0, v0);
    for _ in 0..steps {
        let k1 = rhs(u, v);
        let k2 = rhs(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = rhs(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = rhs(u + h * k3.0, v + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (u, v)
}

/// `(u(T), v(T))` for the S-independent data `h ≡ h_star`.
pub fn ode_oracle(params: &ModelParams, h_star: f64, dt_ref: f64) -> Result<(f64, f64)> {
    let dc = derive_constants(params)?;
    if !(dt_ref.is_finite() && dt_ref > 0.0) {
        return Err(Error::param("dt_ref", format!("must be > 0, got {dt_ref}")));
    }
    let steps = (params.horizon / dt_ref).ceil().max(1.0) as usize;
    let start = params.gamma * h_star;
    Ok(integrate_reaction(dc.reaction(), start, start, params.horizon, steps))
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// Solve the un-linearized implicit scheme exactly at every level by damped
/// Newton iteration with `V` eliminated node by node.
///
/// Residuals are measured on the Δτ-scaled equations.
pub fn implicit_oracle(
    problem: &ForwardProblem,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    config: &SchemeConfig,
) -> Result<GridState> {
    let stepper = Stepper::new(problem, grid, tg, config);
    let mut state = stepper.initial_state();
    for j in 0..tg.steps {
        state = implicit_step(&stepper, problem.rates, &state).map_err(|e| Error::Step {
            step: j,
            source: Box::new(e),
        })?;
    }
    Ok(state)
}

fn implicit_step(stepper: &Stepper<'_>, r: ReactionRates, old: &GridState) -> Result<GridState> {
    let dt = stepper.time_grid().dt;
    let n = old.len();
    let tau = stepper.time_grid().tau(old.step_index + 1);
    let (lower, upper) = stepper.diffusion();
    let mut u = old.u.clone();
    let mut v = old.v.clone();

    // Boundary nodes do not see the interior, so settle them first.
    let ends = [(0, stepper.left_dirichlet(tau)), (n - 1, stepper.right_dirichlet(tau))];
    for (node, fixed) in ends {
        match fixed {
            Some(value) => {
                u[node] = value;
                v[node] = implicit_v_only(r, dt, old.v[node], value)?;
            }
            None => {
                let (un, vn) = implicit_point(r, dt, old.u[node], old.v[node])?;
                u[node] = un;
                v[node] = vn;
            }
        }
    }

    // Δτ-scaled residuals: U-rows on the interior, V-rows everywhere.
    let residuals = |u: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let ru = (1..n - 1)
            .map(|i| {
                let diff = lower[i - 1] * (u[i - 1] - u[i]) + upper[i - 1] * (u[i + 1] - u[i]);
                u[i] - old.u[i] + dt * (-diff + r.a * (u[i] - v[i]).exp() - r.b)
            })
            .collect();
        let rv = (1..n - 1)
            .map(|i| v[i] - old.v[i] + dt * (r.c * (v[i] - u[i]).exp() - r.c))
            .collect();
        (ru, rv)
    };
    let norm = |ru: &[f64], rv: &[f64]| ru.iter().chain(rv).fold(0.0_f64, |m, x| m.max(x.abs()));

    let (mut ru, mut rv) = residuals(&u, &v);
    let mut res = norm(&ru, &rv);
    for _ in 0..NEWTON_MAX_ITER {
        if res <= NEWTON_TOL {
            return Ok(GridState {
                step_index: old.step_index + 1,
                u,
                v,
            });
        }
        // J·δ = −r, with the V-rows eliminated: δV = (−rv + z·δU)/(1 + z).
        let m = n - 2;
        let mut diag = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut k_hat = Vec::with_capacity(m);
        let mut z_hat = Vec::with_capacity(m);
        for k in 0..m {
            let i = k + 1;
            let w = dt * r.a * (u[i] - v[i]).exp();
            let z = dt * r.c * (v[i] - u[i]).exp();
            let kk = 1.0 + z;
            diag.push(1.0 + dt * (lower[k] + upper[k]) + w - w * z / kk);
            rhs.push(-ru[k] - w * rv[k] / kk);
            k_hat.push(kk);
            z_hat.push(z);
        }
        let sys = TridiagonalSystem {
            lower: lower.iter().map(|x| x * dt).collect(),
            diag,
            upper: upper.iter().map(|x| x * dt).collect(),
            rhs,
            left_value: 0.0,
            right_value: 0.0,
        };
        let du = sys.solve()?;
        let dv: Vec<f64> = (0..m)
            .map(|k| (-rv[k] + z_hat[k] * du[k + 1]) / k_hat[k])
            .collect();

        let mut step = 1.0;
        loop {
            let mut u_try = u.clone();
            let mut v_try = v.clone();
            for k in 0..m {
                u_try[k + 1] += step * du[k + 1];
                v_try[k + 1] += step * dv[k];
            }
            let (ru_t, rv_t) = residuals(&u_try, &v_try);
            let res_t = norm(&ru_t, &rv_t);
            if res_t < res || step < 1e-4 {
                u = u_try;
                v = v_try;
                ru = ru_t;
                rv = rv_t;
                res = res_t;
                break;
            }
            step *= 0.5;
        }
    }
    if res <= NEWTON_TOL {
        return Ok(GridState {
            step_index: old.step_index + 1,
            u,
            v,
        });
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: res,
    })
}

/// Implicit update of the reaction-only pair at one node.
fn implicit_point(r: ReactionRates, dt: f64, u_old: f64, v_old: f64) -> Result<(f64, f64)> {
    let (mut u, mut v) = (u_old, v_old);
    for _ in 0..NEWTON_MAX_ITER {
        let w = dt * r.a * (u - v).exp();
        let z = dt * r.c * (v - u).exp();
        let f = u - u_old + w - dt * r.b;
        let g = v - v_old + z - dt * r.c;
        if f.abs().max(g.abs()) <= NEWTON_TOL {
            return Ok((u, v));
        }
        // [[1 + w, −w], [−z, 1 + z]]
        let det = (1.0 + w) * (1.0 + z) - w * z;
        let du = (-(1.0 + z) * f - w * g) / det;
        let dv = (-z * f - (1.0 + w) * g) / det;
        u += du;
        v += dv;
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: f64::NAN,
    })
}

/// Implicit `V` update with `U` prescribed.
fn implicit_v_only(r: ReactionRates, dt: f64, v_old: f64, u: f64) -> Result<f64> {
    let mut v = v_old;
    for _ in 0..NEWTON_MAX_ITER {
        let z = dt * r.c * (v - u).exp();
        let g = v - v_old + z - dt * r.c;
        if g.abs() <= NEWTON_TOL {
            return Ok(v);
        }
        v -= g / (1.0 + z);
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: f64::NAN,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Positivity,
    Comparison,
    Translation,
    MMatrix,
    StabilityBound,
    Restriction,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckKind::Positivity => "positivity",
            CheckKind::Comparison => "comparison",
            CheckKind::Translation => "translation",
            CheckKind::MMatrix => "m-matrix",
            CheckKind::StabilityBound => "stability-bound",
            CheckKind::Restriction => "restriction",
        };
        f.write_str(s)
    }
}

/// Where the worst value of a check occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub level: usize,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub kind: CheckKind,
    pub label: String,
    pub passed: bool,
    /// Worst value seen; its meaning depends on the check.
    pub worst: f64,
    pub location: Option<Location>,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<16} {:<28} worst={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.kind.to_string(),
            self.label,
            self.worst
        )?;
        if let Some(loc) = self.location {
            write!(f, " at level {} node {}", loc.level, loc.node)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn levels_of(run: &ForwardRun) -> Vec<&GridState> {
    match &run.trajectory {
        Some(t) => t.iter().collect(),
        None => vec![&run.final_state],
    }
}

/// Smallest `p`, `q` over every captured level; passes when `≥ −tol`.
pub fn audit_positivity(run: &ForwardRun, tg: &TimeGrid, params: &ModelParams, tol: f64) -> Result<CheckResult> {
    let dc = derive_constants(params)?;
    let mut worst = f64::INFINITY;
    let mut location = None;
    for state in levels_of(run) {
        let t = params.horizon - tg.tau(state.step_index);
        let (p, q) = to_prices(&state.u, &state.v, t.max(0.0), params, &dc);
        for (node, x) in p.iter().zip(&q).map(|(a, b)| a.min(*b)).enumerate() {
            if x < worst {
                worst = x;
                location = Some(Location {
                    level: state.step_index,
                    node,
                });
            }
        }
    }
    Ok(CheckResult {
        kind: CheckKind::Positivity,
        label: "min(p, q)".into(),
        passed: worst >= -tol,
        worst,
        location,
    })
}

/// `min(Ū − U, V̄ − V)` over matching levels; passes when `≥ −tol`.
pub fn audit_comparison(upper: &ForwardRun, lower: &ForwardRun, label: &str, tol: f64) -> CheckResult {
    let mut worst = f64::INFINITY;
    let mut location = None;
    for (a, b) in levels_of(upper).into_iter().zip(levels_of(lower)) {
        let gaps = a.u.iter().zip(&b.u).map(|(x, y)| x - y);
        let gaps_v = a.v.iter().zip(&b.v).map(|(x, y)| x - y);
        for (node, g) in gaps.zip(gaps_v).map(|(x, y)| x.min(y)).enumerate() {
            if g < worst {
                worst = g;
                location = Some(Location {
                    level: a.step_index,
                    node,
                });
            }
        }
    }
    CheckResult {
        kind: CheckKind::Comparison,
        label: label.into(),
        passed: worst >= -tol,
        worst,
        location,
    }
}

/// `max |Ū − U − δ|`, `|V̄ − V − δ|`; passes when `≤ tol`.
pub fn audit_translation(shifted: &ForwardRun, base: &ForwardRun, delta: f64, tol: f64) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut location = None;
    for (a, b) in levels_of(shifted).into_iter().zip(levels_of(base)) {
        for node in 0..a.len() {
            let e = (a.u[node] - b.u[node] - delta)
                .abs()
                .max((a.v[node] - b.v[node] - delta).abs());
            if e > worst || location.is_none() {
                worst = worst.max(e);
                location = Some(Location {
                    level: a.step_index,
                    node,
                });
            }
        }
    }
    CheckResult {
        kind: CheckKind::Translation,
        label: format!("shift {delta}"),
        passed: worst <= tol,
        worst,
        location,
    }
}

/// Failure count as `worst`; passes when no solve broke the sign/domination conditions.
pub fn audit_m_matrix(diag: &RunDiagnostics) -> CheckResult {
    CheckResult {
        kind: CheckKind::MMatrix,
        label: format!("{} solves, min D {:.3e}", diag.solves, diag.min_d),
        passed: diag.m_matrix_failures == 0,
        worst: diag.m_matrix_failures as f64,
        location: None,
    }
}

pub fn audit_stability_bound(diag: &RunDiagnostics) -> CheckResult {
    CheckResult {
        kind: CheckKind::StabilityBound,
        label: format!("{} solves", diag.solves),
        passed: diag.bound_violations == 0,
        worst: diag.bound_violations as f64,
        location: None,
    }
}

/// Largest restriction value seen; passes when it never exceeded 1.
pub fn audit_restriction(diag: &RunDiagnostics) -> CheckResult {
    CheckResult {
        kind: CheckKind::Restriction,
        label: match diag.first_restriction_step {
            Some(j) => format!("{} breaches, first at step {j}", diag.restriction_violations),
            None => "dt*rate*exp(spread) <= 1".into(),
        },
        passed: diag.restriction_violations == 0,
        worst: diag.max_restriction,
        location: diag.first_restriction_step.map(|level| Location { level, node: 0 }),
    }
}

/// Tolerances used by [`verify_suite`].
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const COMPARISON_TOL: f64 = 1e-12;
pub const TRANSLATION_TOL: f64 = 1e-12;
const SHIFT: f64 = 0.1;

/// The full audit on one configuration: positivity of the call run,
/// comparison against `h + 0.1` and against `h ≡ 0`, translation, and the
/// per-solve matrix, bound and restriction checks over all runs.
pub fn verify_suite(
    params: &ModelParams,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    config: &SchemeConfig,
) -> Result<AuditReport> {
    let config = SchemeConfig {
        capture_trajectory: true,
        ..config.clone()
    };
    let problem = ForwardProblem::from_params(params)?;
    let base = solve_problem(&problem, grid, tg, &config)?;

    let shifted_problem = problem.clone().with_payoff(problem.payoff.shifted(SHIFT));
    let shifted = solve_problem(&shifted_problem, grid, tg, &config.shifted(SHIFT))?;

    let zero_problem = problem.clone().with_payoff(Payoff::constant(0.0));
    let zero = solve_problem(&zero_problem, grid, tg, &config)?;

    let mut diag = base.diagnostics;
    diag.merge(&shifted.diagnostics);
    diag.merge(&zero.diagnostics);

    let checks = vec![
        audit_positivity(&base, tg, params, POSITIVITY_TOL)?,
        audit_comparison(&shifted, &base, "h + 0.1 vs h", COMPARISON_TOL),
        audit_comparison(&base, &zero, "call vs zero", COMPARISON_TOL),
        audit_translation(&shifted, &base, SHIFT, TRANSLATION_TOL),
        audit_m_matrix(&diag),
        audit_stability_bound(&diag),
        audit_restriction(&diag),
    ];
    Ok(AuditReport { checks })
}
