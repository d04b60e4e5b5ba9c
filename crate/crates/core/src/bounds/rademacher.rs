use crate::error::{KanError, Result};
use crate::numeric::{Matrix, RngState};

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn finish(self) -> McEstimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            estimate: self.mean,
            std_error,
            trials: self.n,
        }
    }
}

/// `(B̃/n) E‖Gᵀe‖₂` over Rademacher sign vectors `e`, where row `i` of `G`
/// holds the basis evaluations at sample `i`.
///
/// For each draw the supremum of `Σ e_i β·g(x_i)` over `‖β‖₂ ≤ B̃` is exactly
/// `B̃‖Gᵀe‖₂`, so only the outer expectation is sampled.
pub fn rademacher_linear_exact(
    g: &Matrix,
    b_tilde: f64,
    rng: &mut RngState,
    trials: usize,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(KanError::InvalidArgument("trials must be >= 1".into()));
    }
    if !(b_tilde >= 0.0 && b_tilde.is_finite()) {
        return Err(KanError::InvalidArgument(format!("radius must be >= 0, got {b_tilde}")));
    }
    let (n, q) = g.shape();
    let mut acc = Welford::default();
    let mut s = vec![0.0; q];
    let mut e = vec![0.0; n];
    for _ in 0..trials {
        e.iter_mut().for_each(|x| *x = rng.sign());
        s.iter_mut().for_each(|x| *x = 0.0);
        for (row, &ei) in g.iter_rows().zip(&e) {
            for (sj, gij) in s.iter_mut().zip(row) {
                *sj += ei * gij;
            }
        }
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        acc.push(b_tilde / n as f64 * norm);
    }
    Ok(acc.finish())
}

/// `(1/n) E[max_f Σ e_i f(x_i)]` over a finite candidate set, one candidate
/// per closure, each evaluated once per row of `x`.
///
/// For any class containing the candidates this is a lower bound on its
/// empirical Rademacher complexity.
pub fn rademacher_mc_class(
    candidates: &[&dyn Fn(&[f64]) -> f64],
    x: &Matrix,
    rng: &mut RngState,
    trials: usize,
) -> Result<McEstimate> {
    if candidates.is_empty() {
        return Err(KanError::InvalidArgument("candidate set is empty".into()));
    }
    if trials == 0 {
        return Err(KanError::InvalidArgument("trials must be >= 1".into()));
    }
    let n = x.rows();
    let values: Vec<Vec<f64>> = candidates
        .iter()
        .map(|f| x.iter_rows().map(f).collect())
        .collect();
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(KanError::NonFinite("candidate evaluations".into()));
    }
    let mut acc = Welford::default();
    let mut e = vec![0.0; n];
    for _ in 0..trials {
        e.iter_mut().for_each(|x| *x = rng.sign());
        let sup = values
            .iter()
            .map(|fv| fv.iter().zip(&e).map(|(f, s)| f * s).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        acc.push(sup / n as f64);
    }
    Ok(acc.finish())
}
