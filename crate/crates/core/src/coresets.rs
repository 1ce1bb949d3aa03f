//! Strong and weak coreset constructions for multiple `ℓp` regression.
//!
//! Strong coresets sample row `i` with probability
//! `q_i = min{1, w_i/α + v_i/β}` where `w` are one-sided `ℓp` Lewis weights
//! of `A`, `v_i = ‖e_iᵀB̂‖_p^p / ‖B̂‖_{p,p}^p` are the row fractions of the
//! residual `B̂ = AX̂ − B` at an `O(1)`-approximate solution `X̂`, and `α`, `β`
//! follow the sample-complexity recipes below. Weak coresets are oblivious
//! to `B` and use the Lewis term alone with a smaller `α`.
//!
//! The asymptotic constants hidden in the recipes are exposed as `c_alpha`
//! and `c_beta`; [`calibrate_constant`] binary-searches the largest constant
//! (fewest samples) that still passes a caller-supplied verification on a
//! reference suite, so constants can be tuned once and frozen.

use crate::error::{Error, Result};
use crate::lewis::{self, LewisResult};
use crate::sampler::{self, SamplingMatrix};
use crate::solver::{self, RegressionProblem, SolveResult};
use crate::tensor::{entrywise_lp_norm_pow, powp, DenseMatrix, WeightVector};

/// Configuration for Theorem-style strong coresets.
#[derive(Debug, Clone)]
pub struct StrongCoresetConfig {
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    /// Multiplier on the Lewis-term oversampling `α` (larger = fewer samples).
    pub c_alpha: f64,
    /// Multiplier on the residual-term oversampling (larger = more samples).
    pub c_beta: f64,
}

impl StrongCoresetConfig {
    pub fn new(eps: f64, delta: f64, p: f64) -> Result<Self> {
        check_eps_delta_p(eps, delta, p)?;
        Ok(StrongCoresetConfig {
            eps,
            delta,
            p,
            c_alpha: 1.0,
            c_beta: 1.0,
        })
    }
}

/// Configuration for `B`-oblivious weak coresets.
#[derive(Debug, Clone)]
pub struct WeakCoresetConfig {
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    pub c_alpha: f64,
}

impl WeakCoresetConfig {
    pub fn new(eps: f64, delta: f64, p: f64) -> Result<Self> {
        check_eps_delta_p(eps, delta, p)?;
        Ok(WeakCoresetConfig {
            eps,
            delta,
            p,
            c_alpha: 1.0,
        })
    }
}

fn check_eps_delta_p(eps: f64, delta: f64, p: f64) -> Result<()> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0,1), got {delta}")));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

/// `(log d)² log n + log(1/δ)` with logs floored to avoid vanishing factors
/// at small sizes.
fn log_term(n: usize, d: usize, delta: f64) -> f64 {
    let ln_d = (d.max(2) as f64).ln();
    let ln_n = (n.max(2) as f64).ln();
    ln_d * ln_d * ln_n + (1.0 / delta).ln()
}

/// `log log(1/ε)` floored at 1.
fn loglog_eps(eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    if l <= 1.0 {
        1.0
    } else {
        l.ln().max(1.0)
    }
}

/// Lewis-term oversampling `α` for strong coresets:
/// `c·γ·ε²/L` for `p ≤ 2` and `c·γ^{p/2}·ε^p/(‖w‖₁^{p/2−1}·L)` for `p > 2`,
/// with `L = (log d)² log n + log(1/δ)`.
pub fn strong_alpha(cfg: &StrongCoresetConfig, gamma: f64, weight_mass: f64, n: usize, d: usize) -> f64 {
    let l = log_term(n, d, cfg.delta);
    if cfg.p <= 2.0 {
        cfg.c_alpha * gamma * cfg.eps * cfg.eps / l
    } else {
        cfg.c_alpha * gamma.powf(cfg.p / 2.0) * powp(cfg.eps, cfg.p)
            / (weight_mass.max(1.0).powf(cfg.p / 2.0 - 1.0) * l)
    }
}

/// Residual-term divisor `β = ε² / (c·log(1/δ))`, so `v_i/β` contributes
/// about `ε^{-2} log(1/δ)` expected samples in total.
pub fn strong_beta(cfg: &StrongCoresetConfig) -> f64 {
    cfg.eps * cfg.eps / (cfg.c_beta * (1.0 / cfg.delta).ln().max(1.0))
}

/// Lewis-term oversampling `α` for weak coresets:
/// `c·γ·ε·δ²/(L·(log log 1/ε)²)` for `p ≤ 2` and
/// `c·γ^{p/2}·ε^{p−1}·δ^p/(‖w‖₁^{p/2−1}·L·(log log 1/ε)^p)` for `p > 2`.
pub fn weak_alpha(cfg: &WeakCoresetConfig, gamma: f64, weight_mass: f64, n: usize, d: usize) -> f64 {
    let l = log_term(n, d, cfg.delta);
    let ll = loglog_eps(cfg.eps);
    if cfg.p <= 2.0 {
        cfg.c_alpha * gamma * cfg.eps * cfg.delta * cfg.delta / (l * ll * ll)
    } else {
        cfg.c_alpha * gamma.powf(cfg.p / 2.0) * powp(cfg.eps, cfg.p - 1.0) * powp(cfg.delta, cfg.p)
            / (weight_mass.max(1.0).powf(cfg.p / 2.0 - 1.0) * l * powp(ll, cfg.p))
    }
}

/// No row may be structurally unsampleable.
fn apply_probability_floor(q: &mut [f64]) {
    let n = q.len();
    if n == 0 {
        return;
    }
    let floor = (1.0 / n as f64).min(1.0);
    for x in q.iter_mut() {
        *x = x.max(floor).min(1.0);
    }
}

/// Sampling probabilities `q_i = min{1, w_i/α + v_i/β}` for the strong
/// coreset, with `v` taken from the residual at the supplied approximate
/// solution. An exact fit (`‖B̂‖ = 0`) drops the residual term.
pub fn strong_coreset_probabilities(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cfg: &StrongCoresetConfig,
    lewis: &LewisResult,
    approx: &SolveResult,
) -> Result<WeightVector> {
    if a.rows() != b.rows() {
        return Err(Error::shape("strong_coreset_probabilities", a.rows(), b.rows()));
    }
    if lewis.weights.len() != a.rows() {
        return Err(Error::shape("strong_coreset_probabilities (lewis)", a.rows(), lewis.weights.len()));
    }
    let (n, d) = a.shape();
    let residual = a.matmul(&approx.x)?.sub(b)?;
    let total = entrywise_lp_norm_pow(&residual, cfg.p)?;
    let m = residual.cols();

    let alpha = strong_alpha(cfg, lewis.gamma, lewis.weight_mass(), n, d);
    let beta = strong_beta(cfg);

    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let v_i = if total > 0.0 {
            let mut row_mass = 0.0;
            for j in 0..m {
                row_mass += powp(residual.get(i, j), cfg.p);
            }
            row_mass / total
        } else {
            0.0
        };
        let raw = lewis.weights.get(i) / alpha + v_i / beta;
        q.push(raw.min(1.0));
    }
    apply_probability_floor(&mut q);
    WeightVector::new(q)
}

/// A built strong coreset: the sampling matrix plus the approximate solution
/// used to form the residual probabilities (needed by verification).
#[derive(Debug, Clone)]
pub struct StrongCoreset {
    pub sampling: SamplingMatrix,
    pub approx_x: DenseMatrix,
    pub approx_objective: f64,
    pub probabilities: WeightVector,
    pub lewis: LewisResult,
}

/// Full strong-coreset pipeline:
/// `O(1)`-approximate solve → Lewis weights → probabilities → draw.
pub fn build_strong_coreset(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cfg: &StrongCoresetConfig,
    seed: u64,
) -> Result<StrongCoreset> {
    // Loose tolerance is enough for a constant-factor solution.
    let prob = RegressionProblem::new(a.clone(), b.clone(), None, cfg.p)?;
    let approx = solver::solve(&prob, 1e-3, 40)?;
    let lewis = lewis::lewis_weights(a, cfg.p, 200, 1e-10)?;
    let q = strong_coreset_probabilities(a, b, cfg, &lewis, &approx)?;
    let sampling = sampler::draw_sampling_matrix(&q, cfg.p, seed)?;
    Ok(StrongCoreset {
        sampling,
        approx_x: approx.x,
        approx_objective: approx.objective,
        probabilities: q,
        lewis,
    })
}

/// Weak coreset: `B`-oblivious sampling with `q_i = min{1, w_i/α}`.
pub fn build_weak_coreset(
    a: &DenseMatrix,
    cfg: &WeakCoresetConfig,
    lewis: &LewisResult,
    seed: u64,
) -> Result<SamplingMatrix> {
    if lewis.weights.len() != a.rows() {
        return Err(Error::shape("build_weak_coreset", a.rows(), lewis.weights.len()));
    }
    let (n, d) = a.shape();
    let alpha = weak_alpha(cfg, lewis.gamma, lewis.weight_mass(), n, d);
    let mut q: Vec<f64> = lewis
        .weights
        .values()
        .iter()
        .map(|&w| (w / alpha).min(1.0))
        .collect();
    apply_probability_floor(&mut q);
    sampler::draw_sampling_matrix(&WeightVector::new(q)?, cfg.p, seed)
}

/// Binary-searches the largest constant in `[lo, hi]` whose configuration
/// still passes `verify` (monotone: smaller constants sample more). Used to
/// calibrate `c_alpha`-style constants once on a reference suite.
pub fn calibrate_constant(lo: f64, hi: f64, steps: usize, mut verify: impl FnMut(f64) -> bool) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    if !verify(lo) {
        return lo;
    }
    if verify(hi) {
        return hi;
    }
    for _ in 0..steps {
        let mid = (lo * hi).sqrt();
        if verify(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
