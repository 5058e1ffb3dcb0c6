//! IMEX time-steppers for the transformed system
//!
//! ```text
//! u_τ − ½σ²S²·u_SS + a·e^{u−v} − b = 0
//! v_τ + c·e^{v−u} − c = 0
//! u(0, S) = v(0, S) = γ·h(S)
//! ```
//!
//! [`SchemeKind::ImexLinear`] treats diffusion implicitly and the exponential
//! reaction explicitly. [`SchemeKind::ImexLinearized`] freezes the exponentials
//! at the old level, linearizes them, and eliminates `V^{j+1}` node by node so
//! each step is still a single tridiagonal solve for `U^{j+1}`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{SpatialGrid, TimeGrid};
use crate::model::{derive_constants, ModelParams, Payoff, ReactionRates};
use crate::tridiag::{MMatrixReport, TridiagonalSystem};

/// Relative slack when testing the positivity restriction, so that
/// `Δτ·c = 1` computed as `1 + ulp` is not flagged.
const RESTRICTION_SLACK: f64 = 1e-12;

/// Everything the steppers need about the continuous problem.
#[derive(Debug, Clone)]
pub struct ForwardProblem {
    pub sigma: f64,
    pub rates: ReactionRates,
    pub gamma: f64,
    pub payoff: Payoff,
}

impl ForwardProblem {
    /// Call payoff with the market's strike.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        let dc = derive_constants(params)?;
        Ok(ForwardProblem {
            sigma: params.sigma,
            rates: dc.reaction(),
            gamma: params.gamma,
            payoff: Payoff::call(params.strike),
        })
    }

    pub fn with_payoff(mut self, payoff: Payoff) -> Self {
        self.payoff = payoff;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub step_index: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl GridState {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn check_finite(&self) -> Result<()> {
        match self
            .u
            .iter()
            .chain(&self.v)
            .position(|x| !x.is_finite())
        {
            Some(k) => Err(Error::NonFinite { node: k % self.u.len() }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Implicit diffusion, fully explicit reaction.
    ImexLinear,
    /// Implicit diffusion, Taylor-linearized implicit reaction.
    ImexLinearized,
}

/// Time-dependent boundary datum `φ(τ)`.
#[derive(Clone)]
pub enum BoundaryFn {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl BoundaryFn {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryFn::Function(Arc::new(f))
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            BoundaryFn::Constant(x) => *x,
            BoundaryFn::Function(f) => f(tau),
        }
    }

    pub fn shifted(&self, delta: f64) -> Self {
        match self {
            BoundaryFn::Constant(x) => BoundaryFn::Constant(x + delta),
            BoundaryFn::Function(f) => {
                let f = Arc::clone(f);
                BoundaryFn::Function(Arc::new(move |t| f(t) + delta))
            }
        }
    }
}

impl fmt::Debug for BoundaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFn::Constant(x) => f.debug_tuple("Constant").field(x).finish(),
            BoundaryFn::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum LeftBoundary {
    Dirichlet(BoundaryFn),
    /// The reduced equation at `S_0` (diffusion vanishes there).
    NaturalOde,
}

#[derive(Debug, Clone)]
pub enum RightBoundary {
    /// `φ_r ≡ γ·h(S_max)`, taken from the problem's payoff.
    TerminalPayoff,
    Dirichlet(BoundaryFn),
    /// The reaction-only equation at `S_I`. Only meaningful for S-independent data.
    ReducedOde,
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub left_bc: LeftBoundary,
    pub right_bc: RightBoundary,
    /// Turn restriction breaches into errors instead of counting them.
    pub enforce_positivity_restriction: bool,
    /// Optional `(C_u, C_v)`; states leaving `‖U‖ ≤ C_u`, `‖V‖ ≤ C_v` are counted.
    pub sup_bounds: Option<(f64, f64)>,
    pub capture_trajectory: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: SchemeKind::ImexLinear,
            left_bc: LeftBoundary::NaturalOde,
            right_bc: RightBoundary::TerminalPayoff,
            enforce_positivity_restriction: false,
            sup_bounds: None,
            capture_trajectory: false,
        }
    }
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind) -> Self {
        SchemeConfig {
            scheme,
            ..Default::default()
        }
    }

    /// Shift every Dirichlet datum by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let left_bc = match &self.left_bc {
            LeftBoundary::Dirichlet(f) => LeftBoundary::Dirichlet(f.shifted(delta)),
            LeftBoundary::NaturalOde => LeftBoundary::NaturalOde,
        };
        let right_bc = match &self.right_bc {
            RightBoundary::Dirichlet(f) => RightBoundary::Dirichlet(f.shifted(delta)),
            other => other.clone(),
        };
        SchemeConfig {
            left_bc,
            right_bc,
            ..self.clone()
        }
    }
}

/// Linearized-scheme coefficients at one node.
///
/// `−Â·U_{i−1} + Ĉ·U_i − B̂·U_{i+1} + D̂·V_i = F̂` and `Ê·U_i + K̂·V_i = G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedNode {
    pub c_hat: f64,
    pub d_hat: f64,
    pub f_hat: f64,
    pub e_hat: f64,
    pub k_hat: f64,
    pub g: f64,
}

impl LinearizedNode {
    /// Diagonal of the reduced U-row, without the diffusion part.
    pub fn reduced_diag(&self) -> f64 {
        self.c_hat - self.d_hat * self.e_hat / self.k_hat
    }

    pub fn reduced_rhs(&self) -> f64 {
        self.f_hat - self.d_hat / self.k_hat * self.g
    }

    pub fn recover_v(&self, u_next: f64) -> f64 {
        (self.g - self.e_hat * u_next) / self.k_hat
    }
}

#[derive(Debug, Clone)]
pub struct LinearizedAssembly {
    /// Reduced system for `U^{j+1}`.
    pub system: TridiagonalSystem,
    /// Per-node coefficients for `i = 0..=I`; `c_hat` excludes diffusion.
    pub nodes: Vec<LinearizedNode>,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: GridState,
    pub m_matrix: MMatrixReport,
    /// A-priori bound on the solved `U^{j+1}`, `None` when domination is not strict.
    pub max_principle_bound: Option<f64>,
    pub solution_norm: f64,
    /// `Δτ·max(c·e^{max(V−U)}, a·e^{max(U−V)})` at the old level.
    pub restriction: f64,
}

impl StepOutcome {
    pub fn max_principle_bound_holds(&self) -> bool {
        match self.max_principle_bound {
            Some(b) => self.solution_norm <= b * (1.0 + 1e-12) + 1e-14,
            None => false,
        }
    }
}

/// Counters collected over a run, one entry per tridiagonal solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    pub solves: usize,
    pub m_matrix_failures: usize,
    pub min_d: f64,
    pub bound_violations: usize,
    pub max_restriction: f64,
    pub restriction_violations: usize,
    pub first_restriction_step: Option<usize>,
    pub sup_bound_breaches: usize,
}

impl Default for RunDiagnostics {
    fn default() -> Self {
        RunDiagnostics {
            solves: 0,
            m_matrix_failures: 0,
            min_d: f64::INFINITY,
            bound_violations: 0,
            max_restriction: 0.0,
            restriction_violations: 0,
            first_restriction_step: None,
            sup_bound_breaches: 0,
        }
    }
}

impl RunDiagnostics {
    fn record(&mut self, step: usize, outcome: &StepOutcome, sup_bounds: Option<(f64, f64)>) {
        self.solves += 1;
        if !outcome.m_matrix.satisfied {
            self.m_matrix_failures += 1;
        }
        self.min_d = self.min_d.min(outcome.m_matrix.min_d);
        if !outcome.max_principle_bound_holds() {
            self.bound_violations += 1;
        }
        self.max_restriction = self.max_restriction.max(outcome.restriction);
        if restriction_breached(outcome.restriction) {
            self.restriction_violations += 1;
            self.first_restriction_step.get_or_insert(step);
        }
        if let Some((cu, cv)) = sup_bounds {
            let nu = sup_norm(&outcome.state.u);
            let nv = sup_norm(&outcome.state.v);
            if nu > cu || nv > cv {
                self.sup_bound_breaches += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &RunDiagnostics) {
        self.solves += other.solves;
        self.m_matrix_failures += other.m_matrix_failures;
        self.min_d = self.min_d.min(other.min_d);
        self.bound_violations += other.bound_violations;
        self.max_restriction = self.max_restriction.max(other.max_restriction);
        self.restriction_violations += other.restriction_violations;
        self.first_restriction_step = match (self.first_restriction_step, other.first_restriction_step) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.sup_bound_breaches += other.sup_bound_breaches;
    }
}

#[derive(Debug, Clone)]
pub struct ForwardRun {
    pub final_state: GridState,
    /// All levels `0..=J` when trajectory capture is on.
    pub trajectory: Option<Vec<GridState>>,
    pub diagnostics: RunDiagnostics,
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn restriction_breached(value: f64) -> bool {
    value > 1.0 + RESTRICTION_SLACK
}

/// Second-difference weights on a possibly non-uniform grid:
/// `½σ²S_i²·δ²u_i = A_i·(u_{i−1} − u_i) + B_i·(u_{i+1} − u_i)`.
pub(crate) fn diffusion_weights(grid: &SpatialGrid, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let s = grid.nodes();
    let interior = s.len() - 2;
    let mut lower = Vec::with_capacity(interior);
    let mut upper = Vec::with_capacity(interior);
    for i in 1..s.len() - 1 {
        let h_left = s[i] - s[i - 1];
        let h_right = s[i + 1] - s[i];
        let half_var = 0.5 * sigma * sigma * s[i] * s[i];
        lower.push(half_var * 2.0 / (h_left * (h_left + h_right)));
        upper.push(half_var * 2.0 / (h_right * (h_left + h_right)));
    }
    (lower, upper)
}

/// One-run stepping context: grid, time partition, boundary treatment.
pub struct Stepper<'a> {
    problem: &'a ForwardProblem,
    grid: &'a SpatialGrid,
    tg: &'a TimeGrid,
    config: &'a SchemeConfig,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        problem: &'a ForwardProblem,
        grid: &'a SpatialGrid,
        tg: &'a TimeGrid,
        config: &'a SchemeConfig,
    ) -> Self {
        let (lower, upper) = diffusion_weights(grid, problem.sigma);
        Stepper {
            problem,
            grid,
            tg,
            config,
            lower,
            upper,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        self.tg
    }

    pub fn config(&self) -> &SchemeConfig {
        self.config
    }

    pub(crate) fn diffusion(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// `U_i = V_i = γ·h(S_i)`.
    pub fn initial_state(&self) -> GridState {
        let g = self.problem.gamma;
        let u: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .map(|&s| g * self.problem.payoff.eval(s))
            .collect();
        GridState {
            step_index: 0,
            v: u.clone(),
            u,
        }
    }

    pub fn restriction_value(&self, state: &GridState) -> f64 {
        let spread = state
            .u
            .iter()
            .zip(&state.v)
            .map(|(u, v)| v - u)
            .fold(f64::NEG_INFINITY, f64::max);
        let back = state
            .u
            .iter()
            .zip(&state.v)
            .map(|(u, v)| u - v)
            .fold(f64::NEG_INFINITY, f64::max);
        let r = self.problem.rates;
        self.tg.dt * (r.c * spread.exp()).max(r.a * back.exp())
    }

    /// Prescribed right-boundary value at `τ`, `None` for the reduced-ODE treatment.
    pub(crate) fn right_dirichlet(&self, tau: f64) -> Option<f64> {
        match &self.config.right_bc {
            RightBoundary::TerminalPayoff => {
                let s_max = *self.grid.nodes().last().unwrap();
                Some(self.problem.gamma * self.problem.payoff.eval(s_max))
            }
            RightBoundary::Dirichlet(f) => Some(f.eval(tau)),
            RightBoundary::ReducedOde => None,
        }
    }

    pub(crate) fn left_dirichlet(&self, tau: f64) -> Option<f64> {
        match &self.config.left_bc {
            LeftBoundary::Dirichlet(f) => Some(f.eval(tau)),
            LeftBoundary::NaturalOde => None,
        }
    }

    /// Explicit reaction update `U − Δτ(a·e^{U−V} − b)` at one node.
    fn explicit_u(&self, u: f64, v: f64) -> f64 {
        let r = self.problem.rates;
        u - self.tg.dt * (r.a * (u - v).exp() - r.b)
    }

    fn linearized_node(&self, u: f64, v: f64) -> LinearizedNode {
        let r = self.problem.rates;
        let inv_dt = 1.0 / self.tg.dt;
        let w = r.a * (u - v).exp();
        let z = r.c * (v - u).exp();
        LinearizedNode {
            c_hat: inv_dt + w,
            d_hat: -w,
            f_hat: u * inv_dt - w * (1.0 + v - u) + r.b,
            e_hat: -z,
            k_hat: inv_dt + z,
            g: v * inv_dt - z * (1.0 - v + u) + r.c,
        }
    }

    fn boundary_value(&self, state: &GridState, node: usize, dirichlet: Option<f64>) -> f64 {
        dirichlet.unwrap_or_else(|| {
            let (u, v) = (state.u[node], state.v[node]);
            match self.config.scheme {
                SchemeKind::ImexLinear => self.explicit_u(u, v),
                SchemeKind::ImexLinearized => {
                    let n = self.linearized_node(u, v);
                    n.reduced_rhs() / n.reduced_diag()
                }
            }
        })
    }

    /// `U_0^{j+1}`: the Dirichlet datum, or the reduced equation at `S_0`
    /// (explicit for the linear scheme, linearized-implicit for the other).
    pub fn apply_left_boundary(&self, state: &GridState) -> f64 {
        let tau = self.tg.tau(state.step_index + 1);
        self.boundary_value(state, 0, self.left_dirichlet(tau))
    }

    pub fn apply_right_boundary(&self, state: &GridState) -> f64 {
        let tau = self.tg.tau(state.step_index + 1);
        let last = state.len() - 1;
        self.boundary_value(state, last, self.right_dirichlet(tau))
    }

    /// Canonical system for `U^{j+1}` of the explicit-reaction scheme.
    pub fn assemble_scheme1(&self, state: &GridState) -> TridiagonalSystem {
        let r = self.problem.rates;
        let inv_dt = 1.0 / self.tg.dt;
        let n = state.len();
        let diag = (1..n - 1)
            .map(|i| inv_dt + self.lower[i - 1] + self.upper[i - 1])
            .collect();
        let rhs = (1..n - 1)
            .map(|i| {
                let (u, v) = (state.u[i], state.v[i]);
                u * inv_dt - r.a * (u - v).exp() + r.b
            })
            .collect();
        TridiagonalSystem {
            lower: self.lower.clone(),
            diag,
            upper: self.upper.clone(),
            rhs,
            left_value: self.apply_left_boundary(state),
            right_value: self.apply_right_boundary(state),
        }
    }

    /// Reduced system for `U^{j+1}` of the linearized scheme, plus the
    /// per-node relations used to recover `V^{j+1}`.
    pub fn assemble_scheme2(&self, state: &GridState) -> LinearizedAssembly {
        let nodes: Vec<LinearizedNode> = state
            .u
            .iter()
            .zip(&state.v)
            .map(|(&u, &v)| self.linearized_node(u, v))
            .collect();
        let n = state.len();
        let diag = (1..n - 1)
            .map(|i| nodes[i].reduced_diag() + self.lower[i - 1] + self.upper[i - 1])
            .collect();
        let rhs = (1..n - 1).map(|i| nodes[i].reduced_rhs()).collect();
        let system = TridiagonalSystem {
            lower: self.lower.clone(),
            diag,
            upper: self.upper.clone(),
            rhs,
            left_value: self.apply_left_boundary(state),
            right_value: self.apply_right_boundary(state),
        };
        LinearizedAssembly { system, nodes }
    }

    fn check_restriction(&self, state: &GridState) -> Result<f64> {
        let value = self.restriction_value(state);
        if self.config.enforce_positivity_restriction && restriction_breached(value) {
            return Err(Error::RestrictionViolated { value });
        }
        Ok(value)
    }

    fn finish(
        &self,
        state: &GridState,
        system: &TridiagonalSystem,
        u: Vec<f64>,
        v: Vec<f64>,
        restriction: f64,
    ) -> Result<StepOutcome> {
        let next = GridState {
            step_index: state.step_index + 1,
            u,
            v,
        };
        next.check_finite()?;
        Ok(StepOutcome {
            m_matrix: system.check_m_matrix(),
            max_principle_bound: system.stability_bound().ok(),
            solution_norm: sup_norm(&next.u),
            restriction,
            state: next,
        })
    }

    pub fn step_scheme1(&self, state: &GridState) -> Result<StepOutcome> {
        let restriction = self.check_restriction(state)?;
        let system = self.assemble_scheme1(state);
        let u = system.solve()?;
        let r = self.problem.rates;
        let dt = self.tg.dt;
        let v = state
            .u
            .iter()
            .zip(&state.v)
            .map(|(&u, &v)| v - dt * r.c * ((v - u).exp() - 1.0))
            .collect();
        self.finish(state, &system, u, v, restriction)
    }

    pub fn step_scheme2(&self, state: &GridState) -> Result<StepOutcome> {
        let restriction = self.check_restriction(state)?;
        let LinearizedAssembly { system, nodes } = self.assemble_scheme2(state);
        let u = system.solve()?;
        let v = nodes
            .iter()
            .zip(&u)
            .map(|(node, &u_next)| node.recover_v(u_next))
            .collect();
        self.finish(state, &system, u, v, restriction)
    }

    pub fn step(&self, state: &GridState) -> Result<StepOutcome> {
        match self.config.scheme {
            SchemeKind::ImexLinear => self.step_scheme1(state),
            SchemeKind::ImexLinearized => self.step_scheme2(state),
        }
    }

    /// Advance `steps` levels from `start`.
    pub fn march(&self, start: GridState, steps: usize) -> Result<ForwardRun> {
        let mut diagnostics = RunDiagnostics::default();
        let mut trajectory = self.config.capture_trajectory.then(|| vec![start.clone()]);
        let mut state = start;
        for _ in 0..steps {
            let step = state.step_index;
            let outcome = self.step(&state).map_err(|e| Error::Step {
                step,
                source: Box::new(e),
            })?;
            diagnostics.record(step, &outcome, self.config.sup_bounds);
            state = outcome.state;
            if let Some(t) = trajectory.as_mut() {
                t.push(state.clone());
            }
        }
        Ok(ForwardRun {
            final_state: state,
            trajectory,
            diagnostics,
        })
    }
}

/// March the problem from `τ = 0` to `τ = T`.
pub fn solve_problem(
    problem: &ForwardProblem,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    config: &SchemeConfig,
) -> Result<ForwardRun> {
    let stepper = Stepper::new(problem, grid, tg, config);
    stepper.march(stepper.initial_state(), tg.steps)
}

/// [`solve_problem`] for the call payoff of `params`.
pub fn solve_forward(
    params: &ModelParams,
    grid: &SpatialGrid,
    tg: &TimeGrid,
    config: &SchemeConfig,
) -> Result<ForwardRun> {
    solve_problem(&ForwardProblem::from_params(params)?, grid, tg, config)
}
