//! Market/utility inputs and the closed-form pieces of the model.
//!
//! The solvers work on the transformed unknowns `u = γR⁰`, `v = γR¹` in
//! forward time `τ = T − t`. Indifference prices are recovered as
//! `p = R⁰ + γ⁻¹ ln F₀(t)` and `q = R¹ + γ⁻¹ ln F₁(t)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub sigma: f64,
    pub mu: f64,
    pub gamma: f64,
    pub nu01: f64,
    pub nu10: f64,
    pub strike: f64,
    pub horizon: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl ModelParams {
    /// The reference market used throughout the convergence tables:
    /// μ=0.06, σ=0.3, ν₀₁=1, ν₁₀=12, K=2, T=1, S ∈ [0, 5], γ=1.
    pub const fn reference_market() -> Self {
        ModelParams {
            sigma: 0.3,
            mu: 0.06,
            gamma: 1.0,
            nu01: 1.0,
            nu10: 12.0,
            strike: 2.0,
            horizon: 1.0,
            s_min: 0.0,
            s_max: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, x: f64) -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {x}")))
            }
        }
        positive("sigma", self.sigma)?;
        positive("gamma", self.gamma)?;
        positive("nu01", self.nu01)?;
        positive("nu10", self.nu10)?;
        positive("horizon", self.horizon)?;
        positive("strike", self.strike)?;
        if !self.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !(self.s_min.is_finite() && self.s_min >= 0.0) {
            return Err(Error::param("s_min", format!("must be >= 0, got {}", self.s_min)));
        }
        if self.s_min >= self.strike {
            return Err(Error::param(
                "s_min",
                format!("must be below the strike {}, got {}", self.strike, self.s_min),
            ));
        }
        if !(self.s_max.is_finite() && self.s_max > self.strike) {
            return Err(Error::param(
                "s_max",
                format!("must exceed the strike {}, got {}", self.strike, self.s_max),
            ));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference_market()
    }
}

/// Constants of the transformed system and of the no-option value functions.
///
/// `a`, `b`, `c` are the reaction coefficients of
/// `u_τ − ½σ²S²u_SS + a·e^{u−v} − b = 0`, `v_τ + c·e^{v−u} − c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub d0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub coef_c1: f64,
    pub coef_c2: f64,
    horizon: f64,
    // c_k = weight_k · e^{−λ_k T}; kept separately so F can be evaluated as
    // weight_k · e^{λ_k (t − T)} without forming the tiny c₁ first.
    weight1: f64,
    weight2: f64,
}

pub fn derive_constants(params: &ModelParams) -> Result<DerivedConstants> {
    params.validate()?;
    let d0 = params.mu * params.mu / (2.0 * params.sigma * params.sigma);
    let a = params.nu01;
    let c = params.nu10;
    let b = d0 + a;

    let sum = d0 + a + c;
    let product = d0 * c;
    let disc = sum * sum - 4.0 * product;
    if !(disc >= 0.0) {
        return Err(Error::param(
            "nu10",
            format!("negative discriminant {disc:e} in the F-exponent quadratic"),
        ));
    }
    let root = disc.sqrt();
    let lambda1 = 0.5 * (sum + root);
    // Vieta form of the minus branch avoids cancellation when d0·c ≪ sum².
    let lambda2 = product / lambda1;
    if !(lambda1 > lambda2) {
        return Err(Error::param(
            "nu10",
            "degenerate exponents: lambda1 == lambda2".to_string(),
        ));
    }

    let weight1 = (lambda2 - d0) / (lambda2 - lambda1);
    let weight2 = (lambda1 - d0) / (lambda1 - lambda2);
    let t = params.horizon;
    Ok(DerivedConstants {
        d0,
        a,
        b,
        c,
        lambda1,
        lambda2,
        coef_c1: weight1 * (-lambda1 * t).exp(),
        coef_c2: weight2 * (-lambda2 * t).exp(),
        horizon: t,
        weight1,
        weight2,
    })
}

impl DerivedConstants {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `(F₀(t), F₁(t))` for calendar time `t ∈ [0, T]`.
    pub fn evaluate_f(&self, t: f64) -> (f64, f64) {
        // Both are normalized to 1 at the horizon; avoid the rounding in w1 + w2.
        if t == self.horizon {
            return (1.0, 1.0);
        }
        self.f_from_weights(t)
    }

    /// `(F₀(T), F₁(T))` from the coefficient formulas, without the exact
    /// shortcut of [`evaluate_f`](Self::evaluate_f). Both should be 1.
    pub fn terminal_values(&self) -> (f64, f64) {
        self.f_from_weights(self.horizon)
    }

    fn f_from_weights(&self, t: f64) -> (f64, f64) {
        let e1 = self.weight1 * (self.lambda1 * (t - self.horizon)).exp();
        let e2 = self.weight2 * (self.lambda2 * (t - self.horizon)).exp();
        let f0 = e1 + e2;
        let f1 = (e1 * (self.b - self.lambda1) + e2 * (self.b - self.lambda2)) / self.a;
        (f0, f1)
    }

    pub fn reaction(&self) -> ReactionRates {
        ReactionRates {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }
}

/// Reaction coefficients of the transformed system. Kept apart from
/// [`DerivedConstants`] so degenerate test regimes (zero reaction, `a = b`)
/// can be constructed directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionRates {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn payoff_call(s: f64, strike: f64) -> f64 {
    (s - strike).max(0.0)
}

/// Terminal payoff `h(S)`.
#[derive(Clone)]
pub struct Payoff {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl Payoff {
    pub fn call(strike: f64) -> Self {
        Payoff {
            f: Arc::new(move |s| payoff_call(s, strike)),
            label: format!("call(K={strike})"),
        }
    }

    pub fn constant(value: f64) -> Self {
        Payoff {
            f: Arc::new(move |_| value),
            label: format!("constant({value})"),
        }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Payoff {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `h + delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let inner = Arc::clone(&self.f);
        Payoff {
            f: Arc::new(move |s| inner(s) + delta),
            label: format!("{} + {delta}", self.label),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Payoff").field(&self.label).finish()
    }
}

/// Maps transformed grid functions at calendar time `t` to indifference prices `(p, q)`.
pub fn to_prices(
    u: &[f64],
    v: &[f64],
    t: f64,
    params: &ModelParams,
    dc: &DerivedConstants,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(u.len(), v.len(), "u and v must share a grid");
    let (f0, f1) = dc.evaluate_f(t);
    let g = params.gamma;
    let shift0 = f0.ln() / g;
    let shift1 = f1.ln() / g;
    let p = u.iter().map(|&x| x / g + shift0).collect();
    let q = v.iter().map(|&x| x / g + shift1).collect();
    (p, q)
}
