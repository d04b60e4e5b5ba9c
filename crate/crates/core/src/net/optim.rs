use super::{Gradients, KanNetwork};
use crate::error::{KanError, Result};

/// Momentum buffers, one per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub layers: Vec<Vec<f64>>,
}

impl Velocity {
    pub fn zeros_like(net: &KanNetwork) -> Self {
        Self {
            layers: Gradients::zeros_like(net).layers,
        }
    }
}

/// `v ← μ·v + g`, `W ← W − lr·v`. With `μ = 0` this is plain SGD.
///
/// `lr = 0` is accepted and leaves the coefficients untouched.
pub fn sgd_step(
    net: &mut KanNetwork,
    grads: &Gradients,
    lr: f64,
    momentum: f64,
    velocity: &mut Velocity,
) -> Result<()> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(KanError::InvalidArgument(format!("learning rate must be >= 0, got {lr}")));
    }
    if !(0.0..1.0).contains(&momentum) {
        return Err(KanError::InvalidArgument(format!(
            "momentum must lie in [0, 1), got {momentum}"
        )));
    }
    let sizes: Vec<usize> = net.layers().iter().map(|l| l.weights().len()).collect();
    let matches = |bufs: &[Vec<f64>]| {
        bufs.len() == sizes.len() && bufs.iter().zip(&sizes).all(|(b, &s)| b.len() == s)
    };
    if !matches(&grads.layers) || !matches(&velocity.layers) {
        return Err(KanError::DimensionMismatch(
            "gradient or velocity buffers do not match the network".into(),
        ));
    }
    for ((layer, g), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut velocity.layers)
    {
        for ((w, gi), vi) in layer.weights_mut().iter_mut().zip(g).zip(v.iter_mut()) {
            *vi = momentum * *vi + gi;
            *w -= lr * *vi;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::KanLayer;
    use crate::spline::{EdgeBasis, SplineSpec};

    fn scalar_net(w: f64) -> KanNetwork {
        let basis = EdgeBasis::new(SplineSpec::new(0, 1, 0.0, 1.0).unwrap(), false);
        KanNetwork::new(vec![KanLayer::new(1, 1, basis, vec![w]).unwrap()]).unwrap()
    }

    fn grad(g: f64) -> Gradients {
        Gradients {
            layers: vec![vec![g]],
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut net = scalar_net(1.0);
        let mut v = Velocity::zeros_like(&net);
        sgd_step(&mut net, &grad(0.0), 0.1, 0.0, &mut v).unwrap();
        assert_eq!(net.layer(0).weights(), &[1.0]);
    }

    #[test]
    fn plain_step() {
        let mut net = scalar_net(1.0);
        let mut v = Velocity::zeros_like(&net);
        sgd_step(&mut net, &grad(0.25), 1.0, 0.0, &mut v).unwrap();
        assert_eq!(net.layer(0).weights(), &[0.75]);
    }

    #[test]
    fn two_momentum_steps_match_hand_recursion() {
        // v1 = g1 = 0.5, W1 = 1 - 0.1*0.5 = 0.95
        // v2 = 0.9*0.5 + 0.2 = 0.65, W2 = 0.95 - 0.1*0.65 = 0.885
        let mut net = scalar_net(1.0);
        let mut v = Velocity::zeros_like(&net);
        sgd_step(&mut net, &grad(0.5), 0.1, 0.9, &mut v).unwrap();
        assert!((net.layer(0).weights()[0] - 0.95).abs() < 1e-15);
        sgd_step(&mut net, &grad(0.2), 0.1, 0.9, &mut v).unwrap();
        assert!((v.layers[0][0] - 0.65).abs() < 1e-15);
        assert!((net.layer(0).weights()[0] - 0.885).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let mut net = scalar_net(1.0);
        let mut v = Velocity::zeros_like(&net);
        assert!(sgd_step(&mut net, &grad(0.1), -1.0, 0.0, &mut v).is_err());
        assert!(sgd_step(&mut net, &grad(0.1), 0.1, 1.0, &mut v).is_err());
        let bad = Gradients {
            layers: vec![vec![0.0, 0.0]],
        };
        assert!(sgd_step(&mut net, &bad, 0.1, 0.0, &mut v).is_err());
    }
}
