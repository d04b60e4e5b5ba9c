//! KAN layers and networks.
//!
//! A layer maps `x ∈ R^{d_in}` to `y ∈ R^{d_out}` with
//!
//! ```text
//! y_i = Σ_j Σ_k W[i][j][k] · m_jk · (g_k(x_j) − g_k(0))
//! ```
//!
//! where `g_k` runs over the layer's [`EdgeBasis`](crate::spline::EdgeBasis)
//! and `m_jk` is an inverted-dropout mask (all ones outside training).
//! Subtracting `g_k(0)` makes every layer map 0 to 0 exactly.

mod checkpoint;
mod layer;
mod network;
mod optim;

pub use checkpoint::{BasisConfig, Checkpoint};
pub use layer::KanLayer;
pub use network::{
    init_network, network_backward, network_forward, ForwardMode, ForwardTape, Gradients,
    KanNetwork,
};
pub use optim::{sgd_step, Velocity};
