//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use kanbound::net::{ForwardMode, KanNetwork};
use kanbound::numeric::Matrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Largest singular value as the root of the top eigenvalue of `AᵀA`.
pub fn spectral_norm_oracle(m: &Matrix) -> f64 {
    let (r, c) = m.shape();
    let ata: Vec<Vec<f64>> = (0..c)
        .map(|i| (0..c).map(|j| (0..r).map(|k| m.get(k, i) * m.get(k, j)).sum()).collect())
        .collect();
    jacobi_eigenvalues(ata).into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// `Σ u ⊙ f(x)` in evaluation mode.
pub fn weighted_output(net: &KanNetwork, x: &Matrix, u: &Matrix) -> f64 {
    let y = kanbound::net::network_forward(net, x, ForwardMode::Eval, None, None).unwrap();
    y.data().iter().zip(u.data()).map(|(a, b)| a * b).sum()
}

/// Central differences of `Σ u ⊙ f(x)` in every coefficient, layer by layer.
pub fn finite_difference_gradient(net: &KanNetwork, x: &Matrix, u: &Matrix, h: f64) -> Vec<Vec<f64>> {
    let mut work = net.clone();
    let mut out = Vec::new();
    for l in 0..net.depth() {
        let layer = net.layer(l);
        let (d_out, d_in, k) = (layer.d_out(), layer.d_in(), layer.total_count());
        let mut g = Vec::with_capacity(d_out * d_in * k);
        for i in 0..d_out {
            for j in 0..d_in {
                for b in 0..k {
                    let w = layer.weight(i, j, b);
                    work.layer_mut(l).set_weight(i, j, b, w + h);
                    let plus = weighted_output(&work, x, u);
                    work.layer_mut(l).set_weight(i, j, b, w - h);
                    let minus = weighted_output(&work, x, u);
                    work.layer_mut(l).set_weight(i, j, b, w);
                    g.push((plus - minus) / (2.0 * h));
                }
            }
        }
        out.push(g);
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

/// Slack formulas transcribed term by term, sharing no code with the crate.
pub mod slack_oracle {
    pub struct Moments {
        pub alpha: f64,
        pub d: f64,
        pub p: f64,
        pub n: f64,
        pub m: f64,
        pub b_max: f64,
        pub eps: f64,
        pub tau: f64,
        pub eta: f64,
        pub s: f64,
        pub s_prime: f64,
        pub c1: f64,
        pub c2: f64,
    }

    fn vee1(x: f64) -> f64 {
        if x > 1.0 {
            x
        } else {
            1.0
        }
    }

    pub fn thm_main(q: &Moments) -> f64 {
        let zeta = q.alpha * q.alpha * q.alpha * (2.0 * q.d * q.p).ln() * q.b_max * q.b_max;
        let first = if zeta > 0.0 {
            144.0 * zeta.sqrt() * vee1((q.n * q.m / (3.0 * zeta.sqrt())).ln()) / q.n
        } else {
            0.0
        };
        first
            + (4.0 * q.m * q.m * (2.0 / q.eps).ln() / q.n).sqrt()
            + 32.0 * q.m * (2.0 / q.eps).ln() / (3.0 * q.n)
    }

    pub fn thm_main2(q: &Moments) -> f64 {
        let zeta0 =
            q.alpha * q.alpha * q.alpha * (2.0 * q.d * q.p).ln() * (q.n * q.c2 / q.tau).powf(2.0 / q.s_prime);
        let s = q.s;
        let first = if zeta0 > 0.0 {
            144.0 * zeta0.sqrt() * vee1((q.n.powf((2.0 * s + 1.0) / (2.0 * s)) / (3.0 * zeta0.sqrt())).ln()) / q.n
        } else {
            0.0
        };
        first
            + 2.0 * (2.0 / q.eps).ln().sqrt() / q.n.powf((s - 1.0) / (2.0 * s))
            + 32.0 * (2.0 / q.eps).ln() / (3.0 * q.n.powf((2.0 * s - 1.0) / (2.0 * s)))
            + 2.0 * q.c1 / (q.eta * q.n.powf((s - 1.0) / (2.0 * s)))
    }

    pub fn cor1(q: &Moments) -> f64 {
        let s = q.s;
        thm_main2(q) - 2.0 * (2.0 / q.eps).ln().sqrt() / q.n.powf((s - 1.0) / (2.0 * s))
            + (1.0 + 1.0 / q.eta.sqrt()) * (2.0 * q.c1.powf(2.0 / s) * (2.0 / q.eps).ln() / q.n).sqrt()
    }

    pub fn subexp(q: &Moments, c: f64) -> f64 {
        let zeta0 = q.alpha.powi(3) * (2.0 * q.d * q.p).ln() * (c * (q.n * c / q.tau).ln()).powi(2);
        let first = if zeta0 > 0.0 {
            144.0 * zeta0.sqrt() * vee1((c * q.n * q.n.ln() / zeta0.sqrt()).ln()) / q.n
        } else {
            0.0
        };
        first
            + c * q.n.ln() * (2.0 / q.eps).ln().sqrt() / q.n.sqrt()
            + c * q.n.ln() * (2.0 / q.eps).ln() / (3.0 * q.n)
            + c * ((1.0 / q.eta).ln() / q.n).sqrt()
    }

    pub struct LowRank {
        pub d: Vec<f64>,
        pub r: Vec<f64>,
        pub radii: Vec<f64>,
        pub rho: Vec<f64>,
        pub nu: f64,
        pub c_tilde: f64,
        pub n: f64,
    }

    pub fn xi(lr: &LowRank, scale: f64) -> f64 {
        let big_l = lr.r.len();
        let mut b = 0.0;
        for i in 0..big_l {
            b += lr.c_tilde * lr.radii[i] * (lr.r[i] * lr.n).sqrt();
        }
        let mut total = 0.0;
        for i in 1..=big_l {
            let mut prod = 1.0;
            for j in i + 1..=big_l {
                prod *= lr.rho[j - 1];
            }
            let e = if lr.d[i - 1] / lr.nu > 1.0 { lr.d[i - 1] / lr.nu } else { 1.0 };
            total += lr.d[i] * lr.r[i - 1] * (scale * b * prod).powf(e);
        }
        total
    }

    pub fn thm_main3(lr: &LowRank, m: f64, b_max: f64, eps: f64, c: f64) -> f64 {
        let dt = lr.d.iter().copied().fold(0.0, f64::max);
        let x = xi(lr, b_max);
        let q = lr.nu / dt;
        6.0 * c * x.powf(q) / (lr.n.powf((q + 1.0) / 2.0) * (dt / lr.nu - 1.0).powf(q))
            + (4.0 * m * m * (2.0 / eps).ln() / lr.n).sqrt()
            + 32.0 * m * (2.0 / eps).ln() / (3.0 * lr.n)
    }
}
