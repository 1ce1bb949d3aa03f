//! Statistical leverage scores and one-sided `ℓp` Lewis weights.
//!
//! Weights `w` are `γ`-one-sided `ℓp` Lewis weights when
//! `w_i ≥ γ · τ_i(W^{1/2−1/p} A)` with `W = diag(w)`; at `γ = 1` and equality
//! they are the exact Lewis weights, the fixed point of
//! `w_i = τ_i(W^{1/2−1/p} A)`. We run the classic fixed-point iteration
//! `w ← s^{p/2}` with `s_i = a_iᵀ (Aᵀ W^{1−2/p} A)⁺ a_i` (contractive for
//! `p < 4`) and a geometrically damped variant for `p ≥ 4`, and report the
//! *measured* one-sidedness ratio rather than assuming `γ = 1`.

use crate::error::{Error, Result};
use crate::par;
use crate::tensor::{DenseMatrix, WeightVector};

/// Weights are clipped to `[W_MIN, 1]` before forming `W^{1/2−1/p}`; negative
/// exponents for `p > 2` blow up on zero weights otherwise.
const W_MIN: f64 = 1e-12;

/// Relative eigenvalue cutoff for the Gram pseudo-inverse.
const PINV_CUTOFF: f64 = 1e-10;

/// Result of the Lewis-weight iteration.
#[derive(Debug, Clone)]
pub struct LewisResult {
    pub weights: WeightVector,
    /// Measured one-sidedness `min_i w_i / τ_i(W^{1/2−1/p}A)`, capped at 1.
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LewisResult {
    /// `‖w‖₁`, used in the `p > 2` sampling formulas.
    pub fn weight_mass(&self) -> f64 {
        self.weights.sum()
    }
}

/// Maps rows through the pseudo-inverse of `AᵀDA`: returns
/// `s_i = a_iᵀ (AᵀDA)⁺ a_i` for diagonal `D` given by `row_scale[i]`
/// (or all ones).
fn quad_forms(a: &DenseMatrix, row_scale: Option<&[f64]>) -> Result<Vec<f64>> {
    let (n, d) = a.shape();
    // Gram matrix Σ_i d_i a_i a_iᵀ.
    let mut gram = vec![0.0; d * d];
    for i in 0..n {
        let s = row_scale.map_or(1.0, |v| v[i]);
        if s == 0.0 {
            continue;
        }
        let row = a.row(i);
        for r in 0..d {
            let sr = s * row[r];
            if sr == 0.0 {
                continue;
            }
            for c in 0..d {
                gram[r * d + c] += sr * row[c];
            }
        }
    }
    let gram = nalgebra::DMatrix::from_row_slice(d, d, &gram);
    let eig = nalgebra::SymmetricEigen::new(gram);
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = PINV_CUTOFF * lam_max;

    // L = Λ⁺^{1/2} Vᵀ so that s_i = ‖L ãᵢ‖² with ãᵢ = √d_i · aᵢ scaled out.
    let mut l = nalgebra::DMatrix::zeros(d, d);
    for k in 0..d {
        let lam = eig.eigenvalues[k];
        if lam > cutoff && lam > 0.0 {
            let inv_sqrt = 1.0 / lam.sqrt();
            for r in 0..d {
                l[(k, r)] = eig.eigenvectors[(r, k)] * inv_sqrt;
            }
        }
    }

    Ok(par::map_indexed(n, |i| {
        let row = a.row(i);
        let mut s = 0.0;
        for k in 0..d {
            let mut acc = 0.0;
            for r in 0..d {
                acc += l[(k, r)] * row[r];
            }
            s += acc * acc;
        }
        s
    }))
}

/// Leverage scores `τ_i(A) = a_iᵀ (AᵀA)⁺ a_i`.
///
/// Rank-deficient input is handled by the pseudo-inverse; a zero matrix gets
/// all-zero scores.
pub fn leverage_scores(a: &DenseMatrix) -> Result<WeightVector> {
    WeightVector::new(quad_forms(a, None)?)
}

fn clipped(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&x| x.clamp(W_MIN, 1.0)).collect()
}

/// `τ_i(W^{1/2−1/p} A)` with `w` clipped to `[1e-12, 1]` first.
///
/// Uses `τ_i(W^{1/2−1/p}A) = w_i^{1−2/p} · a_iᵀ(Aᵀ W^{1−2/p} A)⁺ a_i`.
pub fn tau_weighted(a: &DenseMatrix, w: &WeightVector, p: f64) -> Result<Vec<f64>> {
    if w.len() != a.rows() {
        return Err(Error::shape("tau_weighted", a.rows(), w.len()));
    }
    let wc = clipped(w.values());
    let expo = 1.0 - 2.0 / p;
    let d_scale: Vec<f64> = wc.iter().map(|&x| x.powf(expo)).collect();
    let s = quad_forms(a, Some(&d_scale))?;
    Ok(s.iter().zip(&d_scale).map(|(&si, &di)| di * si).collect())
}

/// One-sided `ℓp` Lewis weights by fixed-point iteration.
///
/// For `p < 4` the update is `w ← s^{p/2}`; for `p ≥ 4` the geometrically
/// damped `w ← w^{1−2/p} s` (exponent `2/p` toward the target), which has the
/// same fixed point. Non-convergence within `max_iter` is reported via
/// `converged = false` with the best iterate, not an error. After the loop,
/// weights are upscaled (never downscaled) so that `d ≤ ‖w‖₁ ≤ 2d` whenever
/// `n ≥ d`; uniform upscaling preserves one-sidedness.
pub fn lewis_weights(a: &DenseMatrix, p: f64, max_iter: usize, tol: f64) -> Result<LewisResult> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    let (n, d) = a.shape();
    if n == 0 || d == 0 || a.data().iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("lewis_weights requires a nonzero matrix"));
    }

    let mut w = clipped(leverage_scores(a)?.values());
    let mut iterations = 0;
    let mut converged = p == 2.0; // leverage scores are already the fixed point

    if p != 2.0 {
        let expo = 1.0 - 2.0 / p;
        for it in 1..=max_iter {
            iterations = it;
            let d_scale: Vec<f64> = w.iter().map(|&x| x.powf(expo)).collect();
            let s = quad_forms(a, Some(&d_scale))?;
            let mut change = 0.0_f64;
            let mut next = Vec::with_capacity(n);
            for i in 0..n {
                let target = if p < 4.0 {
                    s[i].max(0.0).powf(p / 2.0)
                } else {
                    // w^{1−2/p} s = w · (s^{p/2}/w)^{2/p}
                    d_scale[i] * s[i]
                };
                let t = target.clamp(W_MIN, 1.0);
                change = change.max((t - w[i]).abs());
                next.push(t);
            }
            w = next;
            if change <= tol {
                converged = true;
                break;
            }
        }
    }

    // Normalize ‖w‖₁ into [d, 2d] by uniform upscaling only. Upscaled weights
    // that hit the cap at 1 are re-clipped, so we binary-search the scale.
    let sum: f64 = w.iter().sum();
    let dd = d as f64;
    if sum < dd && n >= d {
        let mut lo = 1.0_f64;
        let mut hi = 1.0_f64;
        let capped_sum = |c: f64| -> f64 { w.iter().map(|&x| (c * x).min(1.0)).sum() };
        while capped_sum(hi) < dd && hi < 1e18 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if capped_sum(mid) < dd {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for x in &mut w {
            *x = (*x * hi).min(1.0).max(W_MIN);
        }
    }

    let weights = WeightVector::new(w)?;
    let gamma = one_sidedness_ratio(a, &weights, p)?.min(1.0);
    Ok(LewisResult {
        weights,
        gamma,
        iterations,
        converged,
    })
}

/// Measured one-sidedness `min_i w_i / τ_i(W^{1/2−1/p}A)`.
///
/// Rows with zero weight are excluded; all-zero weights are a domain error.
pub fn one_sidedness_ratio(a: &DenseMatrix, w: &WeightVector, p: f64) -> Result<f64> {
    if w.values().iter().all(|&x| x == 0.0) {
        return Err(Error::domain("one_sidedness_ratio: all weights are zero"));
    }
    let tau = tau_weighted(a, w, p)?;
    let mut ratio = f64::INFINITY;
    for i in 0..w.len() {
        let wi = w.get(i);
        if wi <= 0.0 {
            continue;
        }
        if tau[i] > 0.0 {
            ratio = ratio.min(wi / tau[i]);
        }
    }
    if ratio.is_infinite() {
        // τ vanished everywhere the weights are positive (e.g. zero matrix).
        return Err(Error::domain("one_sidedness_ratio: no row with positive weight and positive τ"));
    }
    Ok(ratio)
}
