//! Self-checks run by the `verify` subcommand: analytic gradients against
//! central finite differences, the Maurey sparsification bound, and the
//! closed-form Rademacher value of an orthonormal design.

use crate::bounds::{maurey_sparsify, rademacher_linear_exact};
use crate::error::Result;
use crate::net::{init_network, network_backward, network_forward, ForwardMode, ForwardTape, KanNetwork};
use crate::numeric::{Matrix, RngState};
use crate::spline::{EdgeBasis, SplineSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `|a − f| / max(|a|, |f|, 1e-4)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

/// Margin kept between every layer input and the knots, where the basis
/// derivatives of low-degree splines jump.
const KNOT_MARGIN: f64 = 1e-3;

fn near_knot(net: &KanNetwork, x: &Matrix) -> Result<bool> {
    for row in x.iter_rows() {
        let mut v = row.to_vec();
        for layer in net.layers() {
            let knots = layer.basis().spec.knots();
            if v.iter().any(|a| knots.iter().any(|t| (a - t).abs() < KNOT_MARGIN)) {
                return Ok(true);
            }
            v = layer.forward(&v, 0.0, None)?;
        }
    }
    Ok(false)
}

/// Worst relative error between backprop and central differences (step `h`)
/// of `L = Σ u ⊙ f(X)` over every coefficient, for `nets` random networks.
pub fn gradient_check(seed: u64, nets: usize, h: f64) -> Result<(f64, usize)> {
    let mut rng = RngState::new(seed);
    let shapes: [&[usize]; 4] = [&[2, 3, 1], &[3, 2, 2], &[4, 5, 3, 1], &[4, 8, 8, 1]];
    let mut worst = 0.0f64;
    let mut coords = 0;
    for t in 0..nets {
        let shape = shapes[t % shapes.len()];
        let degree = if t % 2 == 0 { 1 } else { 3 };
        let grid = if (t / 2) % 2 == 0 { 3 } else { 5 };
        let basis = EdgeBasis::new(SplineSpec::new(degree, grid, -1.0, 1.0)?, true);
        let mut net = init_network(shape, &basis, rng.next_u64())?;
        // Larger coefficients than at initialization, so hidden layers see
        // inputs across the whole grid.
        for l in 0..net.depth() {
            for w in net.layer_mut(l).weights_mut().iter_mut() {
                *w = rng.normal(0.0, 0.5);
            }
        }
        let n = 3;
        let x = loop {
            let x = Matrix::from_fn(n, shape[0], |_, _| rng.uniform_range(-1.2, 1.2))?;
            if !near_knot(&net, &x)? {
                break x;
            }
        };
        let out = shape[shape.len() - 1];
        let u = Matrix::from_fn(n, out, |_, _| rng.normal(0.0, 1.0))?;
        let objective = |net: &KanNetwork| -> Result<f64> {
            let y = net.predict(&x)?;
            Ok(y.data().iter().zip(u.data()).map(|(a, b)| a * b).sum())
        };
        let mut tape = ForwardTape::new();
        network_forward(&net, &x, ForwardMode::Eval, None, Some(&mut tape))?;
        let grads = network_backward(&net, &tape, &u)?;
        for l in 0..net.depth() {
            for i in 0..grads.layers[l].len() {
                let w0 = net.layer(l).weights()[i];
                net.layer_mut(l).weights_mut()[i] = w0 + h;
                let plus = objective(&net)?;
                net.layer_mut(l).weights_mut()[i] = w0 - h;
                let minus = objective(&net)?;
                net.layer_mut(l).weights_mut()[i] = w0;
                let fd = (plus - minus) / (2.0 * h);
                worst = worst.max(relative_error(grads.layers[l][i], fd));
                coords += 1;
            }
        }
    }
    Ok((worst, coords))
}

/// Random Maurey instances; returns how many met the bound.
pub fn maurey_check(seed: u64, instances: usize) -> Result<usize> {
    let mut rng = RngState::new(seed);
    let mut met = 0;
    for t in 0..instances {
        let count = 1 + (rng.next_u64() % 8) as usize;
        let (r, c) = (1 + (rng.next_u64() % 3) as usize, 1 + (rng.next_u64() % 4) as usize);
        let v: Vec<Matrix> = (0..count)
            .map(|_| Matrix::from_fn(r, c, |_, _| rng.normal(0.0, 1.0)))
            .collect::<Result<_>>()?;
        let a: Vec<f64> = (0..count).map(|_| rng.uniform()).collect();
        let k = [4, 16, 64][t % 3];
        if let Ok(s) = maurey_sparsify(&v, &a, k, &mut rng, 200) {
            if s.error <= s.bound && s.counts.iter().sum::<usize>() == k {
                met += 1;
            }
        }
    }
    Ok(met)
}

pub fn run_all() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let (worst, coords) = gradient_check(2024, 20, 1e-5)?;
    out.push(CheckOutcome {
        name: "gradient",
        passed: worst < 1e-4,
        detail: format!("max relative error {worst:.3e} over {coords} coefficients (limit 1e-4)"),
    });

    let met = maurey_check(99, 100)?;
    out.push(CheckOutcome {
        name: "maurey",
        passed: met == 100,
        detail: format!("{met}/100 instances within the sparsification bound"),
    });

    let r = rademacher_linear_exact(&Matrix::identity(2), 1.0, &mut RngState::new(5), 10_000)?;
    let exact = 0.5 * 2f64.sqrt();
    let gap = (r.estimate - exact).abs();
    out.push(CheckOutcome {
        name: "rademacher",
        passed: gap <= 3.0 * r.std_error,
        detail: format!(
            "estimate {:.6} vs exact {exact:.6}, std error {:.3e}",
            r.estimate, r.std_error
        ),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((relative_error(1e-9, 0.0) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn small_gradient_check() {
        let (worst, coords) = gradient_check(3, 4, 1e-5).unwrap();
        assert!(coords > 0);
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn all_checks_pass() {
        for c in run_all().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
