//! Complexity statistics of a network snapshot.
//!
//! Per layer: the ℓ₁ norm `B_l` of the coefficients, the largest basis
//! Lipschitz constant `c_l`, and the Lipschitz bound
//! `ρ_l = ‖A_l‖_σ · √(Σ_k a_k²)` where `A_l` is the `d_out × (d_in·K)`
//! coefficient matrix and `a_k` the basis Lipschitz constants.
//!
//! Aggregates over `L` layers with data norm `D`:
//!
//! ```text
//! α_i      = (B_i c_i)^{2/3} (∏_{j>i} ρ_j)^{2/3} (C Σ_{j=0}^{i−1} ∏_{k=i−j+1}^{i} ρ_k + D ∏_{k≤i} ρ_k)^{2/3}
//! α̃        = Σ_i α_i
//! section3 = (∏ ρ_j)^{2/3} Σ_i (B_i c_i)^{2/3}
//! r_kan    = (∏ ρ_j) (Σ_i (B_i c_i)^{2/3})^{3/2}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{KanError, Result};
use crate::net::{KanLayer, KanNetwork};
use crate::numeric::{frobenius_norm, spectral_norm_default, Matrix};
use crate::spline::LipschitzMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityMode {
    #[default]
    Section3,
    RKan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    /// `Σ |W[i][j][k]|`.
    pub b_l: f64,
    /// `max_k a_k`.
    pub c_l: f64,
    /// `σ_A · √(Σ_k a_k²)`.
    pub rho_l: f64,
    /// `σ_A · c_l · √(d_in·K)`.
    pub rho_coarse: f64,
    pub sigma_a: f64,
    pub sum_ak_sq: f64,
    /// `‖Ψ_l(0)‖₂`.
    pub offset_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub layer_stats: Vec<LayerStats>,
    pub d: f64,
    pub alpha: Vec<f64>,
    pub alpha_tilde: f64,
    pub rho_prod: f64,
    pub sum_bc23: f64,
    pub measure: f64,
    pub r_kan: f64,
}

impl ComplexityReport {
    pub fn value(&self, mode: ComplexityMode) -> f64 {
        match mode {
            ComplexityMode::Section3 => self.measure,
            ComplexityMode::RKan => self.r_kan,
        }
    }
}

pub fn layer_stats(layer: &KanLayer, mode: LipschitzMode) -> Result<LayerStats> {
    let a = layer.basis().lipschitz(mode)?;
    let b_l = layer.weights().iter().map(|w| w.abs()).sum();
    let c_l = a.iter().copied().fold(0.0, f64::max);
    let sum_ak_sq: f64 = a.iter().map(|v| v * v).sum();
    let sigma_a = spectral_norm_default(&layer.coefficient_matrix())?;
    let offset = layer.forward(&vec![0.0; layer.d_in()], 0.0, None)?;
    Ok(LayerStats {
        b_l,
        c_l,
        rho_l: sigma_a * sum_ak_sq.sqrt(),
        rho_coarse: sigma_a * c_l * ((layer.d_in() * layer.total_count()) as f64).sqrt(),
        sigma_a,
        sum_ak_sq,
        offset_norm: offset.iter().map(|v| v * v).sum::<f64>().sqrt(),
    })
}

/// `‖X‖` in Frobenius norm.
pub fn data_norm(x: &Matrix) -> f64 {
    frobenius_norm(x)
}

fn check_stats(stats: &[LayerStats]) -> Result<()> {
    if stats.is_empty() {
        return Err(KanError::InvalidArgument("need at least one layer".into()));
    }
    Ok(())
}

/// Returns `(α_1..α_L, α̃)` with `C = max_l ‖Ψ_l(0)‖`.
pub fn alpha_tilde(stats: &[LayerStats], d: f64) -> Result<(Vec<f64>, f64)> {
    check_stats(stats)?;
    if !(d >= 0.0) {
        return Err(KanError::InvalidArgument(format!("D must be >= 0, got {d}")));
    }
    let c = stats.iter().map(|s| s.offset_norm).fold(0.0, f64::max);
    let rho: Vec<f64> = stats.iter().map(|s| s.rho_l).collect();
    // prod(a, b) = ∏_{k=a}^{b} ρ_k over 1-based indices, 1 when a > b.
    let prod = |a: usize, b: usize| -> f64 {
        if a > b {
            1.0
        } else {
            rho[a - 1..b].iter().product()
        }
    };
    let l = stats.len();
    let alpha: Vec<f64> = (1..=l)
        .map(|i| {
            let s = &stats[i - 1];
            let chain: f64 = (0..i).map(|j| prod(i - j + 1, i)).sum();
            let reach = c * chain + d * prod(1, i);
            (s.b_l * s.c_l).powf(2.0 / 3.0)
                * prod(i + 1, l).powf(2.0 / 3.0)
                * reach.powf(2.0 / 3.0)
        })
        .collect();
    let total = alpha.iter().sum();
    Ok((alpha, total))
}

fn rho_prod_and_sum(stats: &[LayerStats]) -> (f64, f64) {
    let rho_prod = stats.iter().map(|s| s.rho_l).product();
    let sum_bc23 = stats.iter().map(|s| (s.b_l * s.c_l).powf(2.0 / 3.0)).sum();
    (rho_prod, sum_bc23)
}

pub fn complexity_measure(stats: &[LayerStats], mode: ComplexityMode) -> Result<f64> {
    check_stats(stats)?;
    let (rho_prod, sum_bc23): (f64, f64) = rho_prod_and_sum(stats);
    Ok(match mode {
        ComplexityMode::Section3 => rho_prod.powf(2.0 / 3.0) * sum_bc23,
        ComplexityMode::RKan => rho_prod * sum_bc23.powf(1.5),
    })
}

pub fn complexity_report(net: &KanNetwork, d: f64, mode: LipschitzMode) -> Result<ComplexityReport> {
    let layer_stats = net
        .layers()
        .iter()
        .map(|l| layer_stats(l, mode))
        .collect::<Result<Vec<_>>>()?;
    let (alpha, alpha_tilde) = alpha_tilde(&layer_stats, d)?;
    let (rho_prod, sum_bc23) = rho_prod_and_sum(&layer_stats);
    Ok(ComplexityReport {
        measure: complexity_measure(&layer_stats, ComplexityMode::Section3)?,
        r_kan: complexity_measure(&layer_stats, ComplexityMode::RKan)?,
        layer_stats,
        d,
        alpha,
        alpha_tilde,
        rho_prod,
        sum_bc23,
    })
}

/// `v′_i = (v_i − v_min)/(v_max − v_min) · u_N`, so `max v′ = u_N`.
pub fn normalize_series(v: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() || v.len() != u.len() {
        return Err(KanError::DimensionMismatch(format!(
            "series lengths {} and {} must match and be nonzero",
            v.len(),
            u.len()
        )));
    }
    if v.iter().chain(u).any(|x| !x.is_finite()) {
        return Err(KanError::NonFinite("normalization input".into()));
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(KanError::NormalizationUndefined(format!(
            "constant series (every value is {lo})"
        )));
    }
    let target = u[u.len() - 1];
    Ok(v.iter().map(|x| (x - lo) / (hi - lo) * target).collect())
}
