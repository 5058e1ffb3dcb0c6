//! Spatial grids in the underlying price and the uniform time partition.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Uniform,
    /// sinh-stretched grid clustering nodes around the strike.
    TavellaRandall { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    nodes: Vec<f64>,
    kind: GridKind,
}

fn check_interval(s_min: f64, s_max: f64, intervals: usize) -> Result<()> {
    if intervals < 2 {
        return Err(Error::param(
            "intervals",
            format!("need at least 2 intervals, got {intervals}"),
        ));
    }
    if !(s_min.is_finite() && s_max.is_finite() && s_min < s_max) {
        return Err(Error::param(
            "s_max",
            format!("domain [{s_min}, {s_max}] is empty"),
        ));
    }
    Ok(())
}

impl SpatialGrid {
    pub fn uniform(s_min: f64, s_max: f64, intervals: usize) -> Result<Self> {
        check_interval(s_min, s_max, intervals)?;
        let width = s_max - s_min;
        let n = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| s_min + width * i as f64 / n)
            .collect();
        nodes[intervals] = s_max;
        Ok(SpatialGrid {
            nodes,
            kind: GridKind::Uniform,
        })
    }

    /// `S_i = K + α·sinh(c₂·i/I + c₁·(1 − i/I))` with
    /// `c₁ = asinh((s_min − K)/α)`, `c₂ = asinh((s_max − K)/α)`.
    pub fn tavella_randall(
        s_min: f64,
        s_max: f64,
        strike: f64,
        alpha: f64,
        intervals: usize,
    ) -> Result<Self> {
        check_interval(s_min, s_max, intervals)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(s_min < strike && strike < s_max) {
            return Err(Error::param(
                "strike",
                format!("must lie inside ({s_min}, {s_max}), got {strike}"),
            ));
        }
        let c1 = ((s_min - strike) / alpha).asinh();
        let c2 = ((s_max - strike) / alpha).asinh();
        let n = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| {
                let x = i as f64 / n;
                strike + alpha * (c2 * x + c1 * (1.0 - x)).sinh()
            })
            .collect();
        nodes[0] = s_min;
        nodes[intervals] = s_max;
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param(
                "alpha",
                format!("stretch {alpha} yields a non-increasing grid at I = {intervals}"),
            ));
        }
        Ok(SpatialGrid {
            nodes,
            kind: GridKind::TavellaRandall { alpha },
        })
    }

    pub fn build(kind: GridKind, s_min: f64, s_max: f64, strike: f64, intervals: usize) -> Result<Self> {
        match kind {
            GridKind::Uniform => Self::uniform(s_min, s_max, intervals),
            GridKind::TavellaRandall { alpha } => {
                Self::tavella_randall(s_min, s_max, strike, alpha, intervals)
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals `I`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `h_i = S_i − S_{i−1}` for `i = 1..=I`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation of a grid function at price `s` (clamped to the domain).
    pub fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        let last = self.nodes.len() - 1;
        if s <= self.nodes[0] {
            return values[0];
        }
        if s >= self.nodes[last] {
            return values[last];
        }
        // first node strictly greater than s
        let hi = self.nodes.partition_point(|&x| x <= s);
        let lo = hi - 1;
        if self.nodes[lo] == s {
            return values[lo];
        }
        let w = (s - self.nodes[lo]) / (self.nodes[hi] - self.nodes[lo]);
        values[lo] + w * (values[hi] - values[lo])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepRule {
    /// Δτ = min spacing / 2.
    HalfMinSpacing,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param("horizon", format!("must be > 0, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::param("steps", "need at least one time step"));
        }
        Ok(TimeGrid {
            dt: horizon / steps as f64,
            steps,
            horizon,
        })
    }

    /// Largest uniform partition of `[0, horizon]` with step at most `dt`.
    pub fn with_max_step(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if dt > horizon {
            return Err(Error::param(
                "dt",
                format!("step {dt} exceeds the horizon {horizon}"),
            ));
        }
        // Candidates that divide T up to rounding must not gain an extra step.
        let ratio = horizon / dt;
        let steps = (ratio * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(horizon, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// τ_j, with τ_J returned as exactly T.
    pub fn tau(&self, j: usize) -> f64 {
        if j >= self.steps {
            self.horizon
        } else {
            j as f64 * self.dt
        }
    }

    /// Same horizon, step count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        TimeGrid {
            dt: self.horizon / (self.steps * factor) as f64,
            steps: self.steps * factor,
            horizon: self.horizon,
        }
    }
}

pub fn time_grid_from_space(grid: &SpatialGrid, horizon: f64, rule: TimeStepRule) -> Result<TimeGrid> {
    let dt = match rule {
        TimeStepRule::HalfMinSpacing => 0.5 * grid.min_spacing(),
        TimeStepRule::Explicit(dt) => dt,
    };
    TimeGrid::with_max_step(horizon, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_nodes() {
        let g = SpatialGrid::uniform(0.0, 5.0, 5).unwrap();
        assert_eq!(g.nodes(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let g = SpatialGrid::uniform(0.0, 5.0, 2).unwrap();
        assert_eq!(g.nodes(), &[0.0, 2.5, 5.0]);
        let g = SpatialGrid::uniform(0.0, 5.0, 30).unwrap();
        assert!((g.spacing(7) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(g.nodes()[12], 2.0);
    }

    #[test]
    fn rejects_too_few_intervals() {
        assert!(SpatialGrid::uniform(0.0, 5.0, 1).is_err());
        assert!(SpatialGrid::tavella_randall(0.0, 5.0, 2.0, 15.0, 1).is_err());
        assert!(SpatialGrid::tavella_randall(0.0, 5.0, 2.0, 0.0, 10).is_err());
        assert!(SpatialGrid::tavella_randall(0.0, 5.0, 2.0, -1.0, 10).is_err());
    }

    #[test]
    fn tavella_randall_two_intervals() {
        // S₁ = 2 + 15·sinh((asinh(−2/15) + asinh(1/5))/2) = 2.4932041597174133
        let g = SpatialGrid::tavella_randall(0.0, 5.0, 2.0, 15.0, 2).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[2], 5.0);
        assert!((g.nodes()[1] - 2.493_204_159_717_413_3).abs() < 1e-13);
    }

    #[test]
    fn tavella_randall_clusters_at_strike() {
        let g = SpatialGrid::tavella_randall(0.0, 5.0, 2.0, 15.0, 240).unwrap();
        let (imin, _) = (1..=240)
            .map(|i| (i, g.spacing(i)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let n = g.nodes();
        assert!(n[imin - 1] <= 2.0 && 2.0 <= n[imin], "min spacing at [{}, {}]", n[imin - 1], n[imin]);
    }

    #[test]
    fn time_grids() {
        let g = SpatialGrid::uniform(0.0, 5.0, 30).unwrap();
        let tg = time_grid_from_space(&g, 1.0, TimeStepRule::HalfMinSpacing).unwrap();
        assert_eq!(tg.steps, 12);
        assert!((tg.dt - 1.0 / 12.0).abs() < 1e-16);

        let g = SpatialGrid::uniform(0.0, 5.0, 240).unwrap();
        let tg = time_grid_from_space(&g, 1.0, TimeStepRule::HalfMinSpacing).unwrap();
        assert_eq!(tg.steps, 96);

        let tg = time_grid_from_space(&g, 1.0, TimeStepRule::Explicit(0.3)).unwrap();
        assert_eq!(tg.steps, 4);
        assert_eq!(tg.dt, 0.25);

        assert!(time_grid_from_space(&g, 1.0, TimeStepRule::Explicit(0.0)).is_err());
        assert!(time_grid_from_space(&g, 1.0, TimeStepRule::Explicit(1.5)).is_err());
        assert_eq!(tg.tau(4), 1.0);
    }

    #[test]
    fn interpolation() {
        let g = SpatialGrid::uniform(0.0, 4.0, 4).unwrap();
        let v = [0.0, 1.0, 4.0, 9.0, 16.0];
        assert_eq!(g.interpolate(&v, 2.0), 4.0);
        assert_eq!(g.interpolate(&v, 2.5), 6.5);
        assert_eq!(g.interpolate(&v, -1.0), 0.0);
        assert_eq!(g.interpolate(&v, 4.0), 16.0);
    }

    proptest! {
        #[test]
        fn grids_are_well_formed(
            intervals in 2usize..400,
            alpha in 0.05f64..100.0,
            s_min in 0.0f64..1.0,
            width in 1.5f64..10.0,
            k_frac in 0.1f64..0.9,
        ) {
            let s_max = s_min + width;
            let strike = s_min + k_frac * width;
            for g in [
                SpatialGrid::uniform(s_min, s_max, intervals).unwrap(),
                SpatialGrid::tavella_randall(s_min, s_max, strike, alpha, intervals).unwrap(),
            ] {
                prop_assert_eq!(g.len(), intervals + 1);
                prop_assert_eq!(g.nodes()[0], s_min);
                prop_assert_eq!(g.nodes()[intervals], s_max);
                prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            }
        }

        #[test]
        fn large_stretch_recovers_uniform(intervals in 2usize..500) {
            let tr = SpatialGrid::tavella_randall(0.0, 5.0, 2.0, 1e8, intervals).unwrap();
            let un = SpatialGrid::uniform(0.0, 5.0, intervals).unwrap();
            let dev = tr.nodes().iter().zip(un.nodes()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(dev <= 1e-6, "deviation {}", dev);
        }

        #[test]
        fn time_grid_covers_horizon(horizon in 0.01f64..10.0, frac in 1e-4f64..1.0) {
            let tg = TimeGrid::with_max_step(horizon, frac * horizon).unwrap();
            let total = tg.steps as f64 * tg.dt;
            prop_assert!((total - horizon).abs() <= f64::EPSILON * horizon);
            prop_assert!(tg.dt <= frac * horizon * (1.0 + 1e-9));
        }
    }
}
