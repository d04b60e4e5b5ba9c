use serde::{Deserialize, Serialize};

use super::lipschitz::LipschitzMode;
use crate::error::{KanError, Result};

pub const MAX_DEGREE: usize = 15;

/// Uniform B-spline basis of degree `p` on `[a, b]` split into `G` intervals.
///
/// The knot vector extends the grid by `p` knots of the same spacing on each
/// side (no repeated boundary knots), giving `G + 2p + 1` knots and `G + p`
/// basis functions. Basis `k` is supported on `[t_k, t_{k+p+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineParams", into = "SplineParams")]
pub struct SplineSpec {
    degree: usize,
    grid_count: usize,
    grid_min: f64,
    grid_max: f64,
    knots: Vec<f64>,
}

/// Serialized form of a [`SplineSpec`]; the knots are always rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplineParams {
    pub degree: usize,
    pub grid_count: usize,
    pub grid_min: f64,
    pub grid_max: f64,
}

impl TryFrom<SplineParams> for SplineSpec {
    type Error = KanError;

    fn try_from(p: SplineParams) -> Result<Self> {
        SplineSpec::new(p.degree, p.grid_count, p.grid_min, p.grid_max)
    }
}

impl From<SplineSpec> for SplineParams {
    fn from(s: SplineSpec) -> Self {
        s.params()
    }
}

impl SplineSpec {
    pub fn new(degree: usize, grid_count: usize, grid_min: f64, grid_max: f64) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(KanError::InvalidArgument(format!(
                "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        if grid_count == 0 {
            return Err(KanError::InvalidArgument("grid_count must be >= 1".into()));
        }
        if !(grid_min.is_finite() && grid_max.is_finite() && grid_min < grid_max) {
            return Err(KanError::InvalidArgument(format!(
                "grid needs finite a < b, got [{grid_min}, {grid_max}]"
            )));
        }
        let p = degree as isize;
        let width = grid_max - grid_min;
        let g = grid_count as f64;
        let mut knots: Vec<f64> = (0..grid_count + 2 * degree + 1)
            .map(|i| grid_min + width * ((i as isize - p) as f64 / g))
            .collect();
        knots[degree] = grid_min;
        knots[degree + grid_count] = grid_max;
        Ok(Self {
            degree,
            grid_count,
            grid_min,
            grid_max,
            knots,
        })
    }

    pub fn params(&self) -> SplineParams {
        SplineParams {
            degree: self.degree,
            grid_count: self.grid_count,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid_count(&self) -> usize {
        self.grid_count
    }

    pub fn grid_min(&self) -> f64 {
        self.grid_min
    }

    pub fn grid_max(&self) -> f64 {
        self.grid_max
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_count(&self) -> usize {
        self.grid_count + self.degree
    }

    /// Spacing between consecutive knots.
    pub fn knot_spacing(&self) -> f64 {
        (self.grid_max - self.grid_min) / self.grid_count as f64
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.grid_min, self.grid_max)
    }

    /// Index `s ∈ [p, G+p-1]` of the knot interval `[t_s, t_{s+1})` holding
    /// `x`; the right end `b` belongs to the last interval.
    pub(crate) fn find_span(&self, x: f64) -> usize {
        let p = self.degree;
        let interior = &self.knots[p + 1..p + self.grid_count];
        p + interior.partition_point(|&t| t <= x)
    }

    /// The `deg + 1` basis functions of degree `deg` that can be nonzero on
    /// span `s` (indices `s - deg ..= s`), by the triangular Cox–de Boor
    /// scheme.
    fn local_basis(&self, span: usize, x: f64, deg: usize, out: &mut [f64]) {
        let t = &self.knots;
        let mut left = [0.0f64; MAX_DEGREE + 1];
        let mut right = [0.0f64; MAX_DEGREE + 1];
        out[0] = 1.0;
        for j in 1..=deg {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    /// All `G + p` basis values at `clamp(x)`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.basis_count()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let p = self.degree;
        let xc = self.clamp(x);
        let span = self.find_span(xc);
        out.iter_mut().for_each(|v| *v = 0.0);
        self.local_basis(span, xc, p, &mut out[span - p..=span]);
    }

    pub fn derivative(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.basis_count()];
        self.derivative_into(x, &mut out);
        out
    }

    /// `B'_{k,p} = p (B_{k,p-1}/(t_{k+p}-t_k) - B_{k+1,p-1}/(t_{k+p+1}-t_{k+1}))`,
    /// zero outside `[a, b]`.
    pub fn derivative_into(&self, x: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let p = self.degree;
        if p == 0 || x < self.grid_min || x > self.grid_max {
            return;
        }
        let t = &self.knots;
        let span = self.find_span(x);
        let mut lower = [0.0f64; MAX_DEGREE + 1];
        // lower[m] = B_{span-p+1+m, p-1}(x), m = 0..p
        self.local_basis(span, x, p - 1, &mut lower[..p]);
        let pf = p as f64;
        let first = span - p;
        for (m, slot) in out[first..=span].iter_mut().enumerate() {
            let k = first + m;
            let left = if m >= 1 { lower[m - 1] } else { 0.0 };
            let right = if m < p { lower[m] } else { 0.0 };
            *slot = pf * (left / (t[k + p] - t[k]) - right / (t[k + p + 1] - t[k + 1]));
        }
    }

    /// Per-basis Lipschitz constants of the clamped splines.
    pub fn lipschitz(&self, mode: LipschitzMode) -> Result<Vec<f64>> {
        match mode {
            LipschitzMode::Analytic => {
                let p = self.degree;
                // Δ = max_j (t_{j+p} - t_j), p knot spacings on a uniform grid.
                let delta = (0..self.knots.len() - p)
                    .map(|j| self.knots[j + p] - self.knots[j])
                    .fold(0.0, f64::max);
                if delta <= 0.0 {
                    return Err(KanError::DegenerateKnotSpan(format!(
                        "max_j(t_(j+p) - t_j) = {delta} for degree {p}"
                    )));
                }
                Ok(vec![2.0 * p as f64 / delta; self.basis_count()])
            }
            LipschitzMode::Grid => Ok(super::lipschitz::grid_sup_derivative(self)),
        }
    }
}
