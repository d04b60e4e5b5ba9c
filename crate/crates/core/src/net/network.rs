use std::sync::atomic::{AtomicU64, Ordering};

use super::layer::{KanLayer, LayerTape};
use crate::error::{KanError, Result};
use crate::numeric::{Matrix, RngState};
use crate::spline::EdgeBasis;

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

/// Sub-stream of the experiment seed used for coefficient initialization.
pub const INIT_STREAM: u64 = 1;

/// A stack of KAN layers with matching widths.
///
/// Every mutable access stamps the network with a fresh version; tapes
/// remember the version they were recorded against, so a tape can never be
/// replayed against changed coefficients.
#[derive(Debug, Clone)]
pub struct KanNetwork {
    layers: Vec<KanLayer>,
    version: u64,
}

impl PartialEq for KanNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardMode {
    Train { dropout_rate: f64 },
    Eval,
}

impl ForwardMode {
    fn dropout_rate(self) -> f64 {
        match self {
            ForwardMode::Train { dropout_rate } => dropout_rate,
            ForwardMode::Eval => 0.0,
        }
    }
}

/// Everything a backward pass needs from the matching forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardTape {
    version: u64,
    shape: Vec<usize>,
    rows: usize,
    layers: Vec<LayerTape>,
}

impl ForwardTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// `∂L/∂W` for every layer, laid out like the layer coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &KanNetwork) -> Self {
        Self {
            layers: net.layers.iter().map(|l| vec![0.0; l.weights().len()]).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flatten()
            .fold(0.0, |m, g| f64::max(m, g.abs()))
    }
}

impl KanNetwork {
    pub fn new(layers: Vec<KanLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(KanError::InvalidShape(vec![]));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].d_out() != pair[1].d_in() {
                return Err(KanError::DimensionMismatch(format!(
                    "layer {} outputs {} values but layer {} takes {}",
                    l + 1,
                    pair[0].d_out(),
                    l + 2,
                    pair[1].d_in()
                )));
            }
        }
        Ok(Self {
            layers,
            version: fresh_version(),
        })
    }

    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].d_in())
            .chain(self.layers.iter().map(KanLayer::d_out))
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[KanLayer] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &KanLayer {
        &self.layers[l]
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut KanLayer {
        self.version = fresh_version();
        &mut self.layers[l]
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [KanLayer] {
        self.version = fresh_version();
        &mut self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights().len()).sum()
    }

    /// Convenience wrapper for an evaluation-mode pass without a tape.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        network_forward(self, x, ForwardMode::Eval, None, None)
    }
}

/// Row-wise composition of the layers.
///
/// Layers are processed one at a time over the whole batch; in training mode
/// masks are drawn layer by layer, sample by sample, input by input, basis by
/// basis.
pub fn network_forward(
    net: &KanNetwork,
    x: &Matrix,
    mode: ForwardMode,
    mut rng: Option<&mut RngState>,
    mut tape: Option<&mut ForwardTape>,
) -> Result<Matrix> {
    let shape = net.shape();
    if x.cols() != shape[0] {
        return Err(KanError::DimensionMismatch(format!(
            "network expects {} input columns, got {}",
            shape[0],
            x.cols()
        )));
    }
    let rate = mode.dropout_rate();
    let n = x.rows();
    if let Some(t) = tape.as_deref_mut() {
        t.version = net.version;
        t.shape = shape.clone();
        t.rows = n;
        t.layers = vec![LayerTape::default(); net.depth()];
    }
    let mut current = x.data().to_vec();
    for (l, layer) in net.layers.iter().enumerate() {
        let layer_tape = tape.as_deref_mut().map(|t| &mut t.layers[l]);
        let layer_rng = if rate > 0.0 { rng.as_deref_mut() } else { None };
        if rate > 0.0 && layer_rng.is_none() {
            return Err(KanError::InvalidArgument(
                "training with dropout needs a generator".into(),
            ));
        }
        current = layer.forward_batch(&current, n, rate, layer_rng, layer_tape)?;
    }
    Matrix::new(n, shape[shape.len() - 1], current)
}

/// Exact gradients of `Σ dL_dout ⊙ output` with respect to every coefficient,
/// following the masks and centering recorded in `tape`.
pub fn network_backward(
    net: &KanNetwork,
    tape: &ForwardTape,
    dl_dout: &Matrix,
) -> Result<Gradients> {
    if tape.version != net.version || tape.shape != net.shape() {
        return Err(KanError::StaleTape(format!(
            "tape recorded for version {} shape {:?}, network is version {} shape {:?}",
            tape.version,
            tape.shape,
            net.version,
            net.shape()
        )));
    }
    let out_dim = *tape.shape.last().expect("non-empty shape");
    if dl_dout.shape() != (tape.rows, out_dim) {
        return Err(KanError::DimensionMismatch(format!(
            "upstream gradient is {:?}, forward output was {}x{}",
            dl_dout.shape(),
            tape.rows,
            out_dim
        )));
    }
    let mut grads = Gradients::zeros_like(net);
    let mut upstream = dl_dout.data().to_vec();
    for l in (0..net.depth()).rev() {
        let down = net.layers[l].backward_batch(
            &tape.layers[l],
            &upstream,
            tape.rows,
            &mut grads.layers[l],
            l > 0,
        );
        if let Some(d) = down {
            upstream = d;
        }
    }
    Ok(grads)
}

/// Builds a network of the given widths, every layer sharing `basis`.
///
/// SiLU coefficients start at `1/d_in`; spline coefficients are iid
/// `N(0, 0.1² / K)` drawn from the `INIT_STREAM` sub-stream of `seed` in
/// coefficient order.
pub fn init_network(shape: &[usize], basis: &EdgeBasis, seed: u64) -> Result<KanNetwork> {
    if shape.len() < 2 || shape.contains(&0) {
        return Err(KanError::InvalidShape(shape.to_vec()));
    }
    let mut rng = RngState::derive(seed, INIT_STREAM);
    let k_count = basis.total_count();
    let sd = 0.1 / (k_count as f64).sqrt();
    let layers = shape
        .windows(2)
        .map(|w| {
            let (d_in, d_out) = (w[0], w[1]);
            let mut weights = Vec::with_capacity(d_out * d_in * k_count);
            for _ in 0..d_out * d_in {
                for k in 0..k_count {
                    weights.push(if basis.includes_silu && k == 0 {
                        1.0 / d_in as f64
                    } else {
                        rng.normal(0.0, sd)
                    });
                }
            }
            KanLayer::new(d_in, d_out, basis.clone(), weights)
        })
        .collect::<Result<Vec<_>>>()?;
    KanNetwork::new(layers)
}
