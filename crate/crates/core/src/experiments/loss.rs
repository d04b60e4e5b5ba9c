use super::Task;
use crate::error::{KanError, Result};
use crate::numeric::Matrix;

/// Mean loss over the rows of `pred` and its gradient with respect to `pred`.
///
/// - regression: `(1/n) Σ (pred − y)²`, gradient `2(pred − y)/n`;
/// - binary: sigmoid cross-entropy on one logit, gradient `(σ(z) − y)/n`;
/// - multiclass: softmax cross-entropy, gradient `(softmax(z) − onehot(y))/n`.
pub fn loss_and_grad(task: Task, pred: &Matrix, y: &[f64]) -> Result<(f64, Matrix)> {
    let (n, q) = pred.shape();
    if n != y.len() || q != task.output_dim() {
        return Err(KanError::DimensionMismatch(format!(
            "predictions {n}x{q} do not fit {} labels for {task:?}",
            y.len()
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = vec![0.0; n * q];
    let mut total = 0.0;
    match task {
        Task::Regression => {
            for (i, (&p, &t)) in pred.data().iter().zip(y).enumerate() {
                let r = p - t;
                total += r * r;
                grad[i] = 2.0 * r * inv_n;
            }
        }
        Task::Binary => {
            for (i, (&z, &t)) in pred.data().iter().zip(y).enumerate() {
                // log(1 + e^z) − t z, written to avoid overflow.
                total += z.max(0.0) - t * z + (-z.abs()).exp().ln_1p();
                let s = if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                };
                grad[i] = (s - t) * inv_n;
            }
        }
        Task::Multiclass { .. } => {
            for (i, (row, &t)) in pred.iter_rows().zip(y).enumerate() {
                let label = t as usize;
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = row.iter().map(|z| (z - max).exp()).sum();
                let log_z = max + sum.ln();
                total += log_z - row[label];
                for (c, z) in row.iter().enumerate() {
                    let p = (z - log_z).exp();
                    grad[i * q + c] = (p - if c == label { 1.0 } else { 0.0 }) * inv_n;
                }
            }
        }
    }
    Ok((total * inv_n, Matrix::new(n, q, grad)?))
}
