use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{sigmoid, silu_derivative, SplineSpec};

/// How per-basis Lipschitz constants are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LipschitzMode {
    /// `2p/Δ` with `Δ = max_j (t_{j+p} - t_j)`, identical for every spline.
    ///
    /// On uniform knots `Δ = p·spacing`, so this is `2/spacing`; reading the
    /// bound as `2p/spacing` instead would be a factor `p` looser.
    Analytic,
    /// Supremum of `|B_k'|` over a dense grid on `[a, b]`, refined locally.
    #[default]
    Grid,
}

/// Points per evaluation of the grid mode, not counting local refinement.
pub const GRID_POINTS: usize = 4096;

/// `sup_x |silu'(x)|`, attained where `silu''(x) = 0` for `x > 0`.
///
/// `silu''(x) = σ(1-σ)(2 + x(1-2σ))`, so the maximizer solves
/// `2 + x(1 - 2σ(x)) = 0`, which has a single root in `[2, 3]`.
pub fn silu_lipschitz() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let h = |x: f64| 2.0 + x * (1.0 - 2.0 * sigmoid(x));
        let (mut lo, mut hi) = (2.0f64, 3.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        silu_derivative(0.5 * (lo + hi)).abs()
    })
}

const GOLDEN_ITERS: usize = 80;

/// Maximize `f` over `[lo, hi]` by golden-section search, including endpoints.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ends = f(lo).max(f(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    ends.max(f1).max(f2)
}

/// Grid-mode constants: for every knot interval inside `[a, b]` sample
/// `|B_k'|` densely, then polish the best sample by golden-section search
/// within that interval (each `B_k'` is a polynomial there).
pub(super) fn grid_sup_derivative(spec: &SplineSpec) -> Vec<f64> {
    let n = spec.basis_count();
    let p = spec.degree();
    let mut sup = vec![0.0f64; n];
    if p == 0 {
        return sup;
    }
    let g = spec.grid_count();
    let per_interval = GRID_POINTS.div_ceil(g).max(2);
    let knots = spec.knots();
    let mut d = vec![0.0; n];
    for s in p..p + g {
        let (lo, hi) = (knots[s], knots[s + 1]);
        let mut best = vec![(0.0f64, lo); n];
        for i in 0..=per_interval {
            // Stay inside the half-open span so every sample uses span `s`.
            let x = if i == per_interval {
                hi - (hi - lo) * 1e-12
            } else {
                lo + (hi - lo) * (i as f64 / per_interval as f64)
            };
            spec.derivative_into(x, &mut d);
            for k in s - p..=s {
                if d[k].abs() > best[k].0 {
                    best[k] = (d[k].abs(), x);
                }
            }
        }
        let step = (hi - lo) / per_interval as f64;
        for k in s - p..=s {
            let (val, x) = best[k];
            let f = |y: f64| {
                let mut buf = vec![0.0; n];
                spec.derivative_into(y, &mut buf);
                buf[k].abs()
            };
            let a = (x - step).max(lo);
            let b = (x + step).min(hi - (hi - lo) * 1e-12);
            sup[k] = sup[k].max(val).max(golden_max(f, a, b));
        }
    }
    sup
}
