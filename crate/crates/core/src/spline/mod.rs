//! Edge bases for KAN layers: uniform-knot B-splines, optionally preceded by
//! a SiLU term, together with per-basis Lipschitz constants.

mod bspline;
mod lipschitz;

pub use bspline::SplineSpec;
pub use lipschitz::{silu_lipschitz, LipschitzMode};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

pub fn silu_derivative(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// The basis shared by every edge of one layer.
///
/// With `includes_silu`, index 0 is SiLU and indices `1..=basis_count` are the
/// B-splines; otherwise the B-splines start at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBasis {
    pub spec: SplineSpec,
    pub includes_silu: bool,
}

impl EdgeBasis {
    pub fn new(spec: SplineSpec, includes_silu: bool) -> Self {
        Self {
            spec,
            includes_silu,
        }
    }

    /// The default layer basis: SiLU plus cubic splines with five intervals
    /// on `[-1, 1]`.
    pub fn default_kan() -> Self {
        Self::new(SplineSpec::new(3, 5, -1.0, 1.0).expect("static spec"), true)
    }

    pub fn total_count(&self) -> usize {
        self.spec.basis_count() + usize::from(self.includes_silu)
    }

    fn spline_offset(&self) -> usize {
        usize::from(self.includes_silu)
    }

    /// Basis values at `x`. SiLU sees the raw input; splines see `x` clamped
    /// to the grid.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.total_count()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.total_count());
        let off = self.spline_offset();
        if self.includes_silu {
            out[0] = silu(x);
        }
        self.spec.eval_into(x, &mut out[off..]);
    }

    /// Derivatives of every basis entry with respect to `x`. Spline entries
    /// are zero outside the grid, where clamping makes them constant.
    pub fn derivative(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.total_count()];
        self.derivative_into(x, &mut out);
        out
    }

    pub fn derivative_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.total_count());
        let off = self.spline_offset();
        if self.includes_silu {
            out[0] = silu_derivative(x);
        }
        self.spec.derivative_into(x, &mut out[off..]);
    }

    /// Per-basis Lipschitz constants `a_k`, in basis order.
    pub fn lipschitz(&self, mode: LipschitzMode) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.total_count());
        if self.includes_silu {
            out.push(silu_lipschitz());
        }
        out.extend(self.spec.lipschitz(mode)?);
        Ok(out)
    }
}
