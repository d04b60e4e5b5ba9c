use crate::error::{KanError, Result};
use crate::numeric::{Matrix, RngState};

/// Outcome of [`maurey_sparsify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    /// `k_1..k_N`, summing to `k`.
    pub counts: Vec<usize>,
    /// `‖U − (‖a‖₁/k) Σ k_l V_l‖` for the returned counts.
    pub error: f64,
    /// `√((‖a‖₁/k) Σ a_l ‖V_l‖²)`, the level `error` is certified against.
    pub bound: f64,
    /// Draws used, at least 1.
    pub resamples: usize,
}

/// Replaces `U = Σ a_l V_l` by an average of `k` sampled `V_l`, scaled by
/// `‖a‖₁`.
///
/// Indices are drawn iid with probability `a_l/‖a‖₁`. Draws are repeated,
/// keeping the best, until the squared error is at most
/// `(‖a‖₁/k) Σ a_l ‖V_l‖²` (the expected squared error is no larger). Norms
/// are Frobenius.
pub fn maurey_sparsify(
    v: &[Matrix],
    a: &[f64],
    k: usize,
    rng: &mut RngState,
    max_resamples: usize,
) -> Result<Sparsified> {
    if v.is_empty() || v.len() != a.len() {
        return Err(KanError::DimensionMismatch(format!(
            "{} matrices but {} weights",
            v.len(),
            a.len()
        )));
    }
    let shape = v[0].shape();
    if v.iter().any(|m| m.shape() != shape) {
        return Err(KanError::DimensionMismatch("matrices differ in shape".into()));
    }
    if a.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(KanError::InvalidArgument("weights must be finite and >= 0".into()));
    }
    let a1: f64 = a.iter().sum();
    if !(a1 > 0.0) {
        return Err(KanError::InvalidArgument("weights are all zero".into()));
    }
    if k == 0 || max_resamples == 0 {
        return Err(KanError::InvalidArgument("k and max_resamples must be >= 1".into()));
    }

    let dim = shape.0 * shape.1;
    let mut u = vec![0.0; dim];
    for (m, &w) in v.iter().zip(a) {
        for (ui, x) in u.iter_mut().zip(m.data()) {
            *ui += w * x;
        }
    }
    let sq_norm = |m: &Matrix| m.data().iter().map(|x| x * x).sum::<f64>();
    let bound_sq = a1 / k as f64 * v.iter().zip(a).map(|(m, w)| w * sq_norm(m)).sum::<f64>();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut counts = vec![0usize; v.len()];
    let mut approx = vec![0.0; dim];
    for attempt in 1..=max_resamples {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..k {
            counts[rng.weighted_index(a, a1)] += 1;
        }
        approx.iter_mut().for_each(|x| *x = 0.0);
        for (m, &c) in v.iter().zip(&counts) {
            if c == 0 {
                continue;
            }
            let w = a1 * (c as f64 / k as f64);
            for (y, x) in approx.iter_mut().zip(m.data()) {
                *y += w * x;
            }
        }
        let err_sq: f64 = u.iter().zip(&approx).map(|(p, q)| (p - q) * (p - q)).sum();
        if best.as_ref().is_none_or(|(b, _)| err_sq < *b) {
            best = Some((err_sq, counts.clone()));
        }
        let (best_sq, best_counts) = best.as_ref().expect("set above");
        if *best_sq <= bound_sq {
            return Ok(Sparsified {
                counts: best_counts.clone(),
                error: best_sq.sqrt(),
                bound: bound_sq.sqrt(),
                resamples: attempt,
            });
        }
    }
    Err(KanError::SparsificationFailed {
        resamples: max_resamples,
        best_sq: best.map_or(f64::INFINITY, |b| b.0),
        bound: bound_sq,
    })
}
