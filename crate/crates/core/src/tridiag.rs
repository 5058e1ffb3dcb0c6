//! Three-point systems in the canonical form
//!
//! ```text
//! A_i·y_{i−1} − C_i·y_i + B_i·y_{i+1} = −F_i,   i = 1..N−1
//! y_0 = μ₁,  y_N = μ₂
//! ```
//!
//! Vectors are stored for the interior rows only, so index `k` holds row `i = k + 1`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    /// `F_i`.
    pub rhs: Vec<f64>,
    pub left_value: f64,
    pub right_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMatrixReport {
    pub satisfied: bool,
    /// `min_i (C_i − A_i − B_i)`.
    pub min_d: f64,
    /// First interior row (1-based, as in the canonical form) breaking a condition.
    pub first_violation: Option<usize>,
}

impl TridiagonalSystem {
    pub fn new(
        lower: Vec<f64>,
        diag: Vec<f64>,
        upper: Vec<f64>,
        rhs: Vec<f64>,
        left_value: f64,
        right_value: f64,
    ) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() != n || upper.len() != n || rhs.len() != n {
            return Err(Error::param(
                "system",
                format!(
                    "coefficient vectors must share one length >= 1 (A {}, C {}, B {}, F {})",
                    lower.len(),
                    n,
                    upper.len(),
                    rhs.len()
                ),
            ));
        }
        Ok(TridiagonalSystem {
            lower,
            diag,
            upper,
            rhs,
            left_value,
            right_value,
        })
    }

    /// Number of interior rows `N − 1`.
    pub fn rows(&self) -> usize {
        self.diag.len()
    }

    /// Forward elimination / back substitution with the boundary data folded
    /// into the first and last rows. Returns `y_0..y_N`.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.rows();
        // Row k in the positive-diagonal form: −A·y_{k−1} + C·y_k − B·y_{k+1} = F.
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        let mut pivot = self.diag[0];
        let mut carry = self.rhs[0] + self.lower[0] * self.left_value;
        if n == 1 {
            carry += self.upper[0] * self.right_value;
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularPivot { row: 1 });
        }
        sup[0] = -self.upper[0] / pivot;
        rhs[0] = carry / pivot;

        for k in 1..n {
            let sub = -self.lower[k];
            pivot = self.diag[k] - sub * sup[k - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularPivot { row: k + 1 });
            }
            let mut f = self.rhs[k];
            if k == n - 1 {
                f += self.upper[k] * self.right_value;
            }
            sup[k] = -self.upper[k] / pivot;
            rhs[k] = (f - sub * rhs[k - 1]) / pivot;
        }

        let mut y = vec![0.0; n + 2];
        y[0] = self.left_value;
        y[n + 1] = self.right_value;
        y[n] = rhs[n - 1];
        for k in (0..n - 1).rev() {
            y[k + 1] = rhs[k] - sup[k] * y[k + 2];
        }
        Ok(y)
    }

    /// Largest absolute row residual `|A·y_{i−1} − C·y_i + B·y_{i+1} + F_i|`.
    pub fn max_residual(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.rows() + 2);
        (0..self.rows())
            .map(|k| {
                (self.lower[k] * y[k] - self.diag[k] * y[k + 1]
                    + self.upper[k] * y[k + 2]
                    + self.rhs[k])
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Sign and domination conditions `A_i > 0`, `B_i > 0`, `C_i − A_i − B_i ≥ 0`.
    /// The couplings to prescribed boundary values (`A_1`, `B_{N−1}`) are exempt.
    pub fn check_m_matrix(&self) -> MMatrixReport {
        let n = self.rows();
        let mut min_d = f64::INFINITY;
        let mut first_violation = None;
        for k in 0..n {
            let d = self.diag[k] - self.lower[k] - self.upper[k];
            min_d = min_d.min(d);
            let a_ok = k == 0 || self.lower[k] > 0.0;
            let b_ok = k == n - 1 || self.upper[k] > 0.0;
            if first_violation.is_none() && !(a_ok && b_ok && d >= 0.0) {
                first_violation = Some(k + 1);
            }
        }
        MMatrixReport {
            satisfied: first_violation.is_none(),
            min_d,
            first_violation,
        }
    }

    /// A-priori bound `max(|μ₁|, |μ₂|, max_i |F_i|/D_i)` on `‖y‖_∞`,
    /// valid when `D_i = |C_i| − |A_i| − |B_i| > 0` on every row.
    pub fn stability_bound(&self) -> Result<f64> {
        let mut bound = self.left_value.abs().max(self.right_value.abs());
        for k in 0..self.rows() {
            let d = self.diag[k].abs() - self.lower[k].abs() - self.upper[k].abs();
            if !(d > 0.0) {
                return Err(Error::NotDominant { row: k + 1, margin: d });
            }
            bound = bound.max(self.rhs[k].abs() / d);
        }
        Ok(bound)
    }
}
