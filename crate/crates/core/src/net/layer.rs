use crate::error::{KanError, Result};
use crate::numeric::{Matrix, RngState};
use crate::spline::EdgeBasis;

/// One KAN layer with coefficients `W[i][j][k]` stored row-major, so the flat
/// buffer read as `d_out × (d_in·K)` is exactly the coefficient matrix whose
/// spectral norm bounds the layer's Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct KanLayer {
    d_in: usize,
    d_out: usize,
    basis: EdgeBasis,
    weights: Vec<f64>,
    basis_at_zero: Vec<f64>,
}

/// Per-layer cache for backprop; all buffers are `n × d_in × K` except
/// `input` (`n × d_in`).
#[derive(Debug, Clone, Default)]
pub(crate) struct LayerTape {
    pub input: Vec<f64>,
    pub centered: Vec<f64>,
    pub deriv: Vec<f64>,
    pub mask: Option<Vec<f64>>,
}

impl KanLayer {
    pub fn new(d_in: usize, d_out: usize, basis: EdgeBasis, weights: Vec<f64>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(KanError::InvalidShape(vec![d_in, d_out]));
        }
        let expected = d_out * d_in * basis.total_count();
        if weights.len() != expected {
            return Err(KanError::DimensionMismatch(format!(
                "{d_out}x{d_in}x{} layer needs {expected} coefficients, got {}",
                basis.total_count(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(KanError::NonFinite("layer coefficients".into()));
        }
        let basis_at_zero = basis.eval(0.0);
        Ok(Self {
            d_in,
            d_out,
            basis,
            weights,
            basis_at_zero,
        })
    }

    pub fn zeros(d_in: usize, d_out: usize, basis: EdgeBasis) -> Result<Self> {
        let n = d_out * d_in * basis.total_count();
        Self::new(d_in, d_out, basis, vec![0.0; n])
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn basis(&self) -> &EdgeBasis {
        &self.basis
    }

    pub fn total_count(&self) -> usize {
        self.basis.total_count()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.d_in + j) * self.total_count() + k
    }

    pub fn weight(&self, i: usize, j: usize, k: usize) -> f64 {
        self.weights[self.index(i, j, k)]
    }

    pub fn set_weight(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.index(i, j, k);
        self.weights[idx] = value;
    }

    /// The `d_out × (d_in·K)` coefficient matrix.
    pub fn coefficient_matrix(&self) -> Matrix {
        Matrix::new(self.d_out, self.d_in * self.total_count(), self.weights.clone())
            .expect("layer invariants guarantee a finite non-empty matrix")
    }

    /// Single-sample forward pass.
    ///
    /// `rng` must be given exactly when `dropout_rate > 0`.
    pub fn forward(
        &self,
        x: &[f64],
        dropout_rate: f64,
        rng: Option<&mut RngState>,
    ) -> Result<Vec<f64>> {
        if x.len() != self.d_in {
            return Err(KanError::DimensionMismatch(format!(
                "layer expects {} inputs, got {}",
                self.d_in,
                x.len()
            )));
        }
        self.forward_batch(x, 1, dropout_rate, rng, None)
    }

    pub(crate) fn forward_batch(
        &self,
        input: &[f64],
        n: usize,
        dropout_rate: f64,
        mut rng: Option<&mut RngState>,
        tape: Option<&mut LayerTape>,
    ) -> Result<Vec<f64>> {
        if input.len() != n * self.d_in {
            return Err(KanError::DimensionMismatch(format!(
                "layer expects {} inputs per sample",
                self.d_in
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(KanError::InvalidArgument(format!(
                "dropout rate must lie in [0, 1), got {dropout_rate}"
            )));
        }
        let dropping = dropout_rate > 0.0;
        if dropping != rng.is_some() {
            return Err(KanError::InvalidArgument(
                "a generator is required exactly when dropout is active".into(),
            ));
        }
        let k_count = self.total_count();
        let keep = 1.0 - dropout_rate;
        let mut out = vec![0.0; n * self.d_out];
        let mut vals = vec![0.0; k_count];
        let mut ders = vec![0.0; k_count];
        let mut eff = vec![0.0; k_count];

        let recording = tape.is_some();
        let mut centered_buf = Vec::new();
        let mut deriv_buf = Vec::new();
        let mut mask_buf = Vec::new();
        if recording {
            centered_buf.reserve(n * self.d_in * k_count);
            deriv_buf.reserve(n * self.d_in * k_count);
            if dropping {
                mask_buf.reserve(n * self.d_in * k_count);
            }
        }

        for s in 0..n {
            let x = &input[s * self.d_in..(s + 1) * self.d_in];
            let y = &mut out[s * self.d_out..(s + 1) * self.d_out];
            for (j, &xj) in x.iter().enumerate() {
                self.basis.eval_into(xj, &mut vals);
                for k in 0..k_count {
                    vals[k] -= self.basis_at_zero[k];
                }
                if recording {
                    self.basis.derivative_into(xj, &mut ders);
                    centered_buf.extend_from_slice(&vals);
                    deriv_buf.extend_from_slice(&ders);
                }
                if let Some(rng) = rng.as_deref_mut() {
                    for k in 0..k_count {
                        let m = if rng.bernoulli(keep) { 1.0 / keep } else { 0.0 };
                        if recording {
                            mask_buf.push(m);
                        }
                        eff[k] = vals[k] * m;
                    }
                } else {
                    eff.copy_from_slice(&vals);
                }
                for (i, yi) in y.iter_mut().enumerate() {
                    let row = &self.weights[self.index(i, j, 0)..self.index(i, j, 0) + k_count];
                    *yi += row.iter().zip(&eff).map(|(w, e)| w * e).sum::<f64>();
                }
            }
        }

        if let Some(t) = tape {
            t.input = input.to_vec();
            t.centered = centered_buf;
            t.deriv = deriv_buf;
            t.mask = dropping.then_some(mask_buf);
        }
        Ok(out)
    }

    /// Accumulates `∂L/∂W` into `grad` and returns `∂L/∂input` (`n × d_in`)
    /// when `want_input_grad` is set.
    pub(crate) fn backward_batch(
        &self,
        tape: &LayerTape,
        upstream: &[f64],
        n: usize,
        grad: &mut [f64],
        want_input_grad: bool,
    ) -> Option<Vec<f64>> {
        let k_count = self.total_count();
        let mut down = want_input_grad.then(|| vec![0.0; n * self.d_in]);
        let mut eff = vec![0.0; k_count];
        let mut eff_d = vec![0.0; k_count];
        for s in 0..n {
            let delta = &upstream[s * self.d_out..(s + 1) * self.d_out];
            for j in 0..self.d_in {
                let base = (s * self.d_in + j) * k_count;
                let c = &tape.centered[base..base + k_count];
                let d = &tape.deriv[base..base + k_count];
                match &tape.mask {
                    Some(mask) => {
                        let m = &mask[base..base + k_count];
                        for k in 0..k_count {
                            eff[k] = c[k] * m[k];
                            eff_d[k] = d[k] * m[k];
                        }
                    }
                    None => {
                        eff.copy_from_slice(c);
                        eff_d.copy_from_slice(d);
                    }
                }
                let mut dx = 0.0;
                for (i, &di) in delta.iter().enumerate() {
                    if di == 0.0 {
                        continue;
                    }
                    let w0 = self.index(i, j, 0);
                    for k in 0..k_count {
                        grad[w0 + k] += di * eff[k];
                    }
                    if want_input_grad {
                        let row = &self.weights[w0..w0 + k_count];
                        dx += di * row.iter().zip(&eff_d).map(|(w, e)| w * e).sum::<f64>();
                    }
                }
                if let Some(down) = down.as_mut() {
                    down[s * self.d_in + j] = dx;
                }
            }
        }
        down
    }
}
