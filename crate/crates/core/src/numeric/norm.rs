use super::{Matrix, RngState};
use crate::error::{KanError, Result};

pub const SPECTRAL_TOL: f64 = 1e-10;
pub const SPECTRAL_MAX_ITER: usize = 10_000;

/// Fixed sub-seed for the power-iteration start vector, so spectral norms
/// (and every complexity curve built from them) are reproducible.
const START_VECTOR_SEED: u64 = 0x05EC_74A1_u64;

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn spectral_norm_default(a: &Matrix) -> Result<f64> {
    spectral_norm(a, SPECTRAL_TOL, SPECTRAL_MAX_ITER)
}

/// Largest singular value of `a`.
///
/// Works on the Gram matrix of the smaller side, which has the same nonzero
/// spectrum as `AᵀA`. Orders one and two are solved in closed form; larger
/// ones use power iteration from a fixed start vector, stopping once the
/// eigen-residual `‖Gv − λv‖` certifies `|σ − ‖A‖σ| ≤ tol·max(1, σ)`.
pub fn spectral_norm(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(KanError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(KanError::InvalidArgument("max_iter must be >= 1".into()));
    }
    let (k, g) = a.small_gram();
    match k {
        1 => return Ok(g[0].sqrt()),
        2 => {
            let (p, q, r) = (g[0], g[1], g[3]);
            let half_trace = 0.5 * (p + r);
            let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            return Ok((half_trace + disc).max(0.0).sqrt());
        }
        _ => {}
    }

    let mut start = RngState::new(START_VECTOR_SEED);
    let mut v: Vec<f64> = (0..k).map(|_| start.standard_normal()).collect();
    normalize(&mut v);
    let mut w = vec![0.0; k];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = g[i * k..(i + 1) * k].iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let w_norm = norm2(&w);
        if w_norm == 0.0 {
            return Ok(0.0);
        }
        lambda = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        let sigma = lambda.max(0.0).sqrt();
        // An eigenvalue error of `residual` moves σ by about residual / 2σ.
        if residual <= 2.0 * sigma * tol * sigma.max(1.0) {
            return Ok(sigma);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / w_norm;
        }
    }
    Err(KanError::NonConvergence {
        iterations: max_iter,
        last_estimate: lambda.max(0.0).sqrt(),
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}
