use serde::{Deserialize, Serialize};

use crate::error::{KanError, Result};

fn one() -> f64 {
    1.0
}

/// Symbols of the norm-based slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub alpha_tilde: f64,
    /// Largest layer width.
    pub d_tilde: u64,
    /// Largest basis count.
    pub p_tilde: u64,
    pub n: u64,
    /// Loss cap `M`.
    #[serde(alias = "M")]
    pub m: f64,
    /// `max_i B(y_i)`.
    pub b_max: f64,
    pub epsilon_conf: f64,
    pub tau: f64,
    pub eta: f64,
    pub s: f64,
    pub s_prime: f64,
    pub c_prime: f64,
    pub c_dprime: f64,
}

/// Symbols of the low-rank (RKHS activation) slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowRankInputs {
    /// Widths `d_0..d_L`.
    pub d: Vec<u64>,
    /// Ranks `r_1..r_L`.
    pub r: Vec<u64>,
    /// RKHS radii `R_1..R_L`.
    #[serde(alias = "R")]
    pub radii: Vec<f64>,
    pub rho: Vec<f64>,
    pub nu: f64,
    #[serde(default = "one")]
    pub c_tilde: f64,
    pub n: u64,
}

/// A slack as a labeled sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackTerms {
    pub terms: Vec<(&'static str, f64)>,
}

impl SlackTerms {
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v).sum()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(KanError::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(KanError::InvalidArgument(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_tilde >= 0.0 && self.alpha_tilde.is_finite()) {
            return Err(KanError::InvalidArgument("alpha_tilde must be >= 0".into()));
        }
        if self.d_tilde == 0 || self.p_tilde == 0 || self.n == 0 {
            return Err(KanError::InvalidArgument("d_tilde, p_tilde and n must be >= 1".into()));
        }
        positive("M", self.m)?;
        if !(self.b_max >= 0.0 && self.b_max.is_finite()) {
            return Err(KanError::InvalidArgument("b_max must be >= 0".into()));
        }
        unit_open("epsilon_conf", self.epsilon_conf)?;
        unit_open("tau", self.tau)?;
        unit_open("eta", self.eta)?;
        if !(self.s > 1.0 && self.s.is_finite()) {
            return Err(KanError::InvalidArgument(format!("s must exceed 1, got {}", self.s)));
        }
        positive("s_prime", self.s_prime)?;
        positive("c_prime", self.c_prime)?;
        positive("c_dprime", self.c_dprime)
    }

    fn log_dp(&self) -> f64 {
        (2.0 * self.d_tilde as f64 * self.p_tilde as f64).ln()
    }

    /// `α̃³ log(2d̃p̃) B_max²`.
    pub fn zeta(&self) -> f64 {
        self.alpha_tilde.powi(3) * self.log_dp() * self.b_max * self.b_max
    }

    /// `α̃³ log(2d̃p̃) (nC″/τ)^{2/s′}`.
    pub fn zeta0(&self) -> f64 {
        self.alpha_tilde.powi(3) * self.log_dp() * self.moment_scale()
    }

    fn moment_scale(&self) -> f64 {
        (self.n as f64 * self.c_dprime / self.tau).powf(2.0 / self.s_prime)
    }
}

impl LowRankInputs {
    pub fn validate(&self) -> Result<()> {
        let l = self.r.len();
        if l == 0 || self.d.len() != l + 1 || self.radii.len() != l || self.rho.len() != l {
            return Err(KanError::DimensionMismatch(format!(
                "need d of length L+1 and r, R, rho of length L; got {}, {}, {}, {}",
                self.d.len(),
                self.r.len(),
                self.radii.len(),
                self.rho.len()
            )));
        }
        if self.d.contains(&0) || self.r.contains(&0) || self.n == 0 {
            return Err(KanError::InvalidArgument("widths, ranks and n must be >= 1".into()));
        }
        if self.radii.iter().chain(&self.rho).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(KanError::InvalidArgument("radii and rho must be >= 0".into()));
        }
        positive("nu", self.nu)?;
        positive("c_tilde", self.c_tilde)
    }

    /// `b̃ = Σ_i C̃ R_i √(r_i n)`.
    pub fn b_tilde(&self) -> f64 {
        self.radii
            .iter()
            .zip(&self.r)
            .map(|(radius, &r)| self.c_tilde * radius * (r as f64 * self.n as f64).sqrt())
            .sum()
    }

    /// `max(d_0, …, d_L)`.
    pub fn d_tilde(&self) -> f64 {
        self.d.iter().copied().max().unwrap_or(0) as f64
    }

    /// `Σ_i d_i r_i (scale · b̃ · ∏_{j>i} ρ_j)^{max(d_{i−1}/ν, 1)}`.
    fn weighted_sum(&self, scale: f64) -> f64 {
        let b = self.b_tilde();
        let l = self.r.len();
        (0..l)
            .map(|i| {
                let tail: f64 = self.rho[i + 1..].iter().product();
                let exponent = (self.d[i] as f64 / self.nu).max(1.0);
                self.d[i + 1] as f64 * self.r[i] as f64 * (scale * b * tail).powf(exponent)
            })
            .sum()
    }

    /// `ξ` with `max_i B(y_i)` as the scale.
    pub fn xi(&self, b_max: f64) -> f64 {
        self.weighted_sum(b_max)
    }

    /// `ξ₀` with `(nC″/τ)^{2/s′}` as the scale.
    pub fn xi0(&self, moments: &BoundInputs) -> f64 {
        self.weighted_sum(moments.moment_scale())
    }
}

/// `s_1 = ε_1`, `s_{k+1} = ρ_{k+1} s_k + ε_{k+1}`.
pub fn cover_radius_composition(eps: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    if eps.is_empty() || eps.len() != rho.len() {
        return Err(KanError::DimensionMismatch(format!(
            "eps and rho lengths {} and {} must match and be nonzero",
            eps.len(),
            rho.len()
        )));
    }
    let mut out = Vec::with_capacity(eps.len());
    let mut s = 0.0;
    for (k, (&e, &r)) in eps.iter().zip(rho).enumerate() {
        s = if k == 0 { e } else { r * s + e };
        out.push(s);
    }
    Ok(out)
}

/// `b² c² log(2mp) / ε²`.
pub fn covering_bound_basis(b: f64, c: f64, m: u64, p: u64, eps: f64) -> f64 {
    b * b * c * c * (2.0 * m as f64 * p as f64).ln() / (eps * eps)
}

/// `α̃³ log(2d̃p̃) / ε²`.
pub fn covering_bound_kan(alpha_tilde: f64, d_tilde: u64, p_tilde: u64, eps: f64) -> f64 {
    alpha_tilde.powi(3) * (2.0 * d_tilde as f64 * p_tilde as f64).ln() / (eps * eps)
}

/// `24 √ζ max(log(nM/(3√ζ)), 1) / n`, and 0 at `ζ = 0`.
pub fn dudley_term(zeta: f64, n: f64, m: f64) -> f64 {
    if zeta == 0.0 {
        return 0.0;
    }
    let root = zeta.sqrt();
    24.0 * root * (n * m / (3.0 * root)).ln().max(1.0) / n
}

fn bounded_tails(n: f64, m: f64, eps: f64) -> [(&'static str, f64); 2] {
    let l = (2.0 / eps).ln();
    [
        ("deviation", (4.0 * m * m * l / n).sqrt()),
        ("tail", 32.0 * m * l / (3.0 * n)),
    ]
}

fn moment_tails(b: &BoundInputs, corollary: bool) -> [(&'static str, f64); 3] {
    let n = b.n as f64;
    let s = b.s;
    let l = (2.0 / b.epsilon_conf).ln();
    let deviation = if corollary {
        (1.0 + b.eta.powf(-0.5)) * (2.0 * b.c_prime.powf(2.0 / s) * l / n).sqrt()
    } else {
        2.0 * l.sqrt() / n.powf((s - 1.0) / (2.0 * s))
    };
    [
        ("deviation", deviation),
        ("tail", 32.0 * l / (3.0 * n.powf((2.0 * s - 1.0) / (2.0 * s)))),
        ("truncation", 2.0 * b.c_prime / (b.eta * n.powf((s - 1.0) / (2.0 * s)))),
    ]
}

/// Bounded loss: `6·dudley(ζ, n, M) + √(4M² log(2/ε)/n) + 32M log(2/ε)/(3n)`.
pub fn thm_main_terms(b: &BoundInputs) -> Result<SlackTerms> {
    b.validate()?;
    let n = b.n as f64;
    let mut terms = vec![("complexity", 6.0 * dudley_term(b.zeta(), n, b.m))];
    terms.extend(bounded_tails(n, b.m, b.epsilon_conf));
    Ok(SlackTerms { terms })
}

pub fn slack_thm_main(b: &BoundInputs) -> Result<f64> {
    Ok(thm_main_terms(b)?.total())
}

fn moment_complexity(b: &BoundInputs) -> f64 {
    // Truncation level M = n^{1/(2s)}.
    let n = b.n as f64;
    6.0 * dudley_term(b.zeta0(), n, n.powf(1.0 / (2.0 * b.s)))
}

/// Moment-bounded loss, truncated at `n^{1/(2s)}`.
pub fn thm_main2_terms(b: &BoundInputs) -> Result<SlackTerms> {
    b.validate()?;
    let mut terms = vec![("complexity", moment_complexity(b))];
    terms.extend(moment_tails(b, false));
    Ok(SlackTerms { terms })
}

pub fn slack_thm_main2(b: &BoundInputs) -> Result<f64> {
    Ok(thm_main2_terms(b)?.total())
}

fn require_s2(b: &BoundInputs) -> Result<()> {
    if b.s < 2.0 {
        return Err(KanError::BoundHypothesis(format!(
            "the excess-risk bound needs s >= 2, got {}",
            b.s
        )));
    }
    Ok(())
}

/// Excess risk of an empirical minimizer under the moment condition.
pub fn cor1_terms(b: &BoundInputs) -> Result<SlackTerms> {
    b.validate()?;
    require_s2(b)?;
    let mut terms = vec![("complexity", moment_complexity(b))];
    terms.extend(moment_tails(b, true));
    Ok(SlackTerms { terms })
}

pub fn slack_excess_cor1(b: &BoundInputs) -> Result<f64> {
    Ok(cor1_terms(b)?.total())
}

/// `Σ_i d_i r_i (b̃ ∏_{j>i} ρ_j / ε)^{max(d_{i−1}/ν, 1)}`.
pub fn lowrank_entropy(lr: &LowRankInputs, eps: f64) -> Result<f64> {
    lr.validate()?;
    positive("eps", eps)?;
    Ok(lr.weighted_sum(1.0 / eps))
}

/// `6 C̃′ x^{ν/d̃} / (n^{(ν/d̃+1)/2} (d̃/ν − 1)^{ν/d̃})`.
fn lowrank_complexity(lr: &LowRankInputs, x: f64, c_tilde_prime: f64) -> Result<f64> {
    let d = lr.d_tilde();
    if d <= lr.nu {
        return Err(KanError::BoundHypothesis(format!(
            "the low-rank bounds need max width {d} > nu = {}",
            lr.nu
        )));
    }
    positive("c_tilde_prime", c_tilde_prime)?;
    let q = lr.nu / d;
    let n = lr.n as f64;
    Ok(6.0 * c_tilde_prime * x.powf(q) / (n.powf((q + 1.0) / 2.0) * (d / lr.nu - 1.0).powf(q)))
}

pub fn thm_main3_terms(
    lr: &LowRankInputs,
    m: f64,
    b_max: f64,
    eps_conf: f64,
    c_tilde_prime: f64,
) -> Result<SlackTerms> {
    lr.validate()?;
    positive("M", m)?;
    unit_open("epsilon_conf", eps_conf)?;
    if !(b_max >= 0.0 && b_max.is_finite()) {
        return Err(KanError::InvalidArgument("b_max must be >= 0".into()));
    }
    let mut terms = vec![("complexity", lowrank_complexity(lr, lr.xi(b_max), c_tilde_prime)?)];
    terms.extend(bounded_tails(lr.n as f64, m, eps_conf));
    Ok(SlackTerms { terms })
}

pub fn slack_thm_main3(
    lr: &LowRankInputs,
    m: f64,
    b_max: f64,
    eps_conf: f64,
    c_tilde_prime: f64,
) -> Result<f64> {
    Ok(thm_main3_terms(lr, m, b_max, eps_conf, c_tilde_prime)?.total())
}

fn same_n(lr: &LowRankInputs, b: &BoundInputs) -> Result<()> {
    if lr.n != b.n {
        return Err(KanError::InvalidArgument(format!(
            "sample counts differ: {} vs {}",
            lr.n, b.n
        )));
    }
    Ok(())
}

/// Low-rank complexity with `ξ₀`, moment tails of the unbounded-loss bound.
pub fn thm_main4_terms(lr: &LowRankInputs, b: &BoundInputs, c_tilde_prime: f64) -> Result<SlackTerms> {
    lr.validate()?;
    b.validate()?;
    same_n(lr, b)?;
    let mut terms = vec![("complexity", lowrank_complexity(lr, lr.xi0(b), c_tilde_prime)?)];
    terms.extend(moment_tails(b, false));
    Ok(SlackTerms { terms })
}

/// Low-rank complexity with `ξ₀`, excess-risk tails.
pub fn cor2_terms(lr: &LowRankInputs, b: &BoundInputs, c_tilde_prime: f64) -> Result<SlackTerms> {
    lr.validate()?;
    b.validate()?;
    same_n(lr, b)?;
    require_s2(b)?;
    let mut terms = vec![("complexity", lowrank_complexity(lr, lr.xi0(b), c_tilde_prime)?)];
    terms.extend(moment_tails(b, true));
    Ok(SlackTerms { terms })
}

/// Sub-exponential tails, with `C′` the tail constant.
pub fn subexp_terms(b: &BoundInputs, c_prime: f64) -> Result<SlackTerms> {
    b.validate()?;
    positive("C'", c_prime)?;
    let n = b.n as f64;
    let ln_n = n.ln();
    let l = (2.0 / b.epsilon_conf).ln();
    let zeta0 = b.alpha_tilde.powi(3) * b.log_dp() * (c_prime * (n * c_prime / b.tau).ln()).powi(2);
    let complexity = if zeta0 == 0.0 {
        0.0
    } else {
        let root = zeta0.sqrt();
        144.0 * root * (c_prime * n * ln_n / root).ln().max(1.0) / n
    };
    Ok(SlackTerms {
        terms: vec![
            ("complexity", complexity),
            ("deviation", c_prime * ln_n * l.sqrt() / n.sqrt()),
            ("tail", c_prime * ln_n * l / (3.0 * n)),
            ("truncation", c_prime * ((1.0 / b.eta).ln() / n).sqrt()),
        ],
    })
}

pub fn slack_subexp(b: &BoundInputs, c_prime: f64) -> Result<f64> {
    Ok(subexp_terms(b, c_prime)?.total())
}

/// Parameter file of the `bounds` CLI subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    pub inputs: BoundInputs,
    #[serde(default)]
    pub low_rank: Option<LowRankInputs>,
    #[serde(default = "one")]
    pub c_tilde_prime: f64,
    #[serde(default = "one")]
    pub subexp_c_prime: f64,
    /// Covering radius for the covering-number rows.
    #[serde(default = "one")]
    pub cover_eps: f64,
}

/// One named slack with its terms, or the reason it does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackRow {
    pub name: &'static str,
    pub result: std::result::Result<SlackTerms, String>,
}

/// Every slack the parameters admit, in a fixed order.
pub fn evaluate_all(p: &BoundsParams) -> Result<(Vec<(&'static str, f64)>, Vec<SlackRow>)> {
    let b = &p.inputs;
    b.validate()?;
    positive("cover_eps", p.cover_eps)?;
    let mut scalars = vec![
        ("zeta", b.zeta()),
        ("zeta0", b.zeta0()),
        ("log_covering_kan", covering_bound_kan(b.alpha_tilde, b.d_tilde, b.p_tilde, p.cover_eps)),
    ];
    let wrap = |r: Result<SlackTerms>| r.map_err(|e| e.to_string());
    let mut rows = vec![
        SlackRow { name: "thm_main", result: wrap(thm_main_terms(b)) },
        SlackRow { name: "thm_main2", result: wrap(thm_main2_terms(b)) },
        SlackRow { name: "cor1", result: wrap(cor1_terms(b)) },
        SlackRow { name: "subexp", result: wrap(subexp_terms(b, p.subexp_c_prime)) },
    ];
    if let Some(lr) = &p.low_rank {
        lr.validate()?;
        scalars.push(("b_tilde", lr.b_tilde()));
        scalars.push(("xi", lr.xi(b.b_max)));
        scalars.push(("xi0", lr.xi0(b)));
        scalars.push(("log_covering_lowrank", lowrank_entropy(lr, p.cover_eps)?));
        rows.push(SlackRow {
            name: "thm_main3",
            result: wrap(thm_main3_terms(lr, b.m, b.b_max, b.epsilon_conf, p.c_tilde_prime)),
        });
        rows.push(SlackRow { name: "thm_main4", result: wrap(thm_main4_terms(lr, b, p.c_tilde_prime)) });
        rows.push(SlackRow { name: "cor2", result: wrap(cor2_terms(lr, b, p.c_tilde_prime)) });
    }
    Ok((scalars, rows))
}
