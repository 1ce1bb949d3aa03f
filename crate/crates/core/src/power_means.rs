//! Sublinear Euclidean power means by uniform sampling.
//!
//! The objective is `Σ_i ‖x − b_i‖₂^p`, the `(p,2)`-norm of `1xᵀ − B`. The
//! solver reads only uniform samples: an initial handful of rows picks an
//! `O(1)`-approximate center to recenter the data, then `L = ⌈c_L ln(1/δ)⌉`
//! independent sample-and-solve instances run, the third of instances with
//! the largest sampled mass is discarded (those are the ones where the
//! sampled mass badly overestimates `‖B‖_{p,2}^p`), and a fresh validation
//! sample picks the returned center among the survivors.
//!
//! The per-instance budget depends only on `(ε, δ, p)` — never on `n`, the
//! point dimension, or any embedding dimension.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::{powp, DenseMatrix};

/// The point set and norm order.
#[derive(Debug, Clone)]
pub struct PowerMeansInstance {
    /// `n×t`; row `i` is the point `b_i`.
    pub points: DenseMatrix,
    pub p: f64,
}

impl PowerMeansInstance {
    pub fn new(points: DenseMatrix, p: f64) -> Result<Self> {
        if points.rows() == 0 {
            return Err(Error::invalid("power means needs at least one point"));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        Ok(PowerMeansInstance { points, p })
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }
}

/// Tunable constants of the pipeline.
#[derive(Debug, Clone)]
pub struct PowerMeansOptions {
    /// Instance-count constant: `L = ⌈c_l·ln(1/δ)⌉`.
    pub c_l: f64,
    /// Sample-budget constant in [`sample_budget`].
    pub c_s: f64,
    /// Overrides the per-instance sample count (used by the sweep experiment).
    pub fixed_sample_size: Option<usize>,
}

impl Default for PowerMeansOptions {
    fn default() -> Self {
        PowerMeansOptions {
            c_l: 3.0,
            c_s: 4.0,
            fixed_sample_size: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerMeansResult {
    pub center: Vec<f64>,
    /// Validation estimate of the full cost (exact cost in fallback mode).
    pub estimated_cost: f64,
    /// Total uniform point-reads: recentering + instances + validation.
    pub samples_used: usize,
    pub instances_run: usize,
    pub kept_instances: usize,
    /// Set when `n < s` forced an exact solve over all points.
    pub exact_fallback: bool,
}

/// Exact cost `Σ_i ‖x − b_i‖₂^p` (unnormalized).
pub fn power_mean_cost(inst: &PowerMeansInstance, x: &[f64]) -> Result<f64> {
    if x.len() != inst.dim() {
        return Err(Error::shape("power_mean_cost", inst.dim(), x.len()));
    }
    Ok(par::sum_indexed(inst.n(), |i| {
        powp(row_dist(&inst.points, i, x), inst.p)
    }))
}

/// Cost divided by `n`, matching harness conventions that average.
pub fn power_mean_cost_normalized(inst: &PowerMeansInstance, x: &[f64]) -> Result<f64> {
    Ok(power_mean_cost(inst, x)? / inst.n() as f64)
}

fn row_dist(points: &DenseMatrix, i: usize, x: &[f64]) -> f64 {
    points
        .row(i)
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Per-instance uniform sample budget; a function of `(ε, δ, p)` only.
///
/// `s = ⌈c_s · ε^{-ρ} · (ln(1/ε) + ln(1/δ))⌉` with `ρ = 2` at `p = 1`,
/// `ρ = 1` for `1 < p ≤ 2`, and `ρ = p − 1` for `p > 2`.
pub fn sample_budget(eps: f64, delta: f64, p: f64, c_s: f64) -> usize {
    let rho = if p == 1.0 {
        2.0
    } else if p <= 2.0 {
        1.0
    } else {
        p - 1.0
    };
    let logs = (1.0 / eps).ln().max(0.0) + (1.0 / delta).ln().max(0.0);
    ((c_s * eps.powf(-rho) * logs).ceil() as usize).max(1)
}

/// Minimizes `Σ_i ‖x − b_i‖₂^p` over the rows of `sample`.
///
/// `p = 2` returns the mean; `p = 1` is smoothed Weiszfeld; other orders run
/// the same reweighted-mean iteration with damping for `p > 2`. The returned
/// flag is `false` if `max_iter` ran out before the relative decrease fell
/// below `tol` with the smoothing floored.
pub fn sampled_center_solve(
    sample: &DenseMatrix,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, bool)> {
    weighted_center_solve(sample, None, p, tol, max_iter)
}

pub(crate) fn weighted_center_solve(
    sample: &DenseMatrix,
    weights: Option<&[f64]>,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, bool)> {
    let (n, t) = sample.shape();
    if n == 0 {
        return Err(Error::invalid("sampled_center_solve on empty sample"));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let wsum: f64 = (0..n).map(w).sum();
    if wsum <= 0.0 {
        return Err(Error::invalid("sampled_center_solve needs positive weight mass"));
    }

    // Weighted mean: the exact solution for p = 2 and the starting point
    // otherwise.
    let mut x = vec![0.0; t];
    for i in 0..n {
        let wi = w(i);
        for (acc, &v) in x.iter_mut().zip(sample.row(i)) {
            *acc += wi * v;
        }
    }
    x.iter_mut().for_each(|v| *v /= wsum);
    if p == 2.0 {
        return Ok((x, true));
    }

    let smoothed = |x: &[f64], mu: f64| -> f64 {
        par::sum_indexed(n, |i| {
            let d = row_dist(sample, i, x);
            w(i) * powp(d * d + mu * mu, p / 2.0)
        })
    };

    // Initial smoothing from the RMS spread around the mean.
    let rms = (par::sum_indexed(n, |i| {
        let d = row_dist(sample, i, &x);
        w(i) * d * d
    }) / wsum)
        .sqrt();
    const MU_FLOOR: f64 = 1e-10;
    let mut mu = (1e-2 * rms).max(MU_FLOOR);
    let mut f = smoothed(&x, mu);
    let mut converged = false;

    for _ in 0..max_iter {
        // Reweighted mean step.
        let mut num = vec![0.0; t];
        let mut den = 0.0;
        for i in 0..n {
            let d = row_dist(sample, i, &x);
            let omega = w(i) * powp(d * d + mu * mu, p / 2.0 - 1.0);
            den += omega;
            for (acc, &v) in num.iter_mut().zip(sample.row(i)) {
                *acc += omega * v;
            }
        }
        if den <= 0.0 {
            break;
        }
        let target: Vec<f64> = num.iter().map(|v| v / den).collect();

        let (x_new, f_new) = if p <= 2.0 {
            let fc = smoothed(&target, mu);
            (target, fc)
        } else {
            let mut theta = 1.0 / (p - 1.0);
            let mut chosen = (x.clone(), f);
            for _ in 0..8 {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| a + theta * (b - a))
                    .collect();
                let fc = smoothed(&cand, mu);
                if fc <= f {
                    chosen = (cand, fc);
                    break;
                }
                theta *= 0.5;
            }
            chosen
        };

        let rel = (f - f_new) / f.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        f = f_new;
        if rel < tol {
            if mu > MU_FLOOR {
                mu = (mu * 0.5).max(MU_FLOOR);
                f = smoothed(&x, mu);
            } else {
                converged = true;
                break;
            }
        }
    }
    Ok((x, converged))
}

fn draw_rows(inst: &PowerMeansInstance, count: usize, seed: u64, stream: u64) -> Vec<usize> {
    let n = inst.n() as u64;
    (0..count)
        .map(|i| (rng::mix(seed, stream, i as u64) % n) as usize)
        .collect()
}

fn gather(inst: &PowerMeansInstance, idx: &[usize]) -> DenseMatrix {
    let picks: Vec<(usize, f64)> = idx.iter().map(|&i| (i, 1.0)).collect();
    inst.points.gather_scaled_rows(&picks).expect("valid indices")
}

fn sample_cost(sample: &DenseMatrix, p: f64, x: &[f64]) -> f64 {
    (0..sample.rows())
        .map(|i| powp(row_dist(sample, i, x), p))
        .sum()
}

/// Full uniform-sampling pipeline with default constants.
pub fn solve_power_means(
    inst: &PowerMeansInstance,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<PowerMeansResult> {
    solve_power_means_with(inst, eps, delta, seed, &PowerMeansOptions::default())
}

pub fn solve_power_means_with(
    inst: &PowerMeansInstance,
    eps: f64,
    delta: f64,
    seed: u64,
    opts: &PowerMeansOptions,
) -> Result<PowerMeansResult> {
    if !(0.0 < eps && eps < 1.0) || !(0.0 < delta && delta < 1.0) {
        return Err(Error::invalid("eps and delta must be in (0,1)"));
    }
    let p = inst.p;
    let n = inst.n();
    let t = inst.dim();
    let s = opts
        .fixed_sample_size
        .unwrap_or_else(|| sample_budget(eps, delta, p, opts.c_s));
    let inner_tol = eps / 10.0 * 1e-4; // solve well below the target accuracy
    let max_iter = 400;

    if n <= s {
        let (center, _) = sampled_center_solve(&inst.points, p, 1e-10, 1000)?;
        let cost = power_mean_cost(inst, &center)?;
        return Ok(PowerMeansResult {
            center,
            estimated_cost: cost,
            samples_used: n,
            instances_run: 1,
            kept_instances: 1,
            exact_fallback: true,
        });
    }

    // (1) O(1)-approximate recentering: best-of-sample under sampled cost.
    let s0 = ((8.0 * (1.0 / delta).ln()).ceil() as usize).clamp(1, n);
    let init_idx = draw_rows(inst, s0, seed, rng::tag::POWER_MEANS);
    let init_sample = gather(inst, &init_idx);
    let mut best_center = init_sample.row(0).to_vec();
    let mut best_cost = f64::INFINITY;
    for i in 0..init_sample.rows() {
        let cand = init_sample.row(i).to_vec();
        let c = sample_cost(&init_sample, p, &cand);
        if c < best_cost {
            best_cost = c;
            best_center = cand;
        }
    }
    let x_hat = best_center;

    // Translated view: b_i − x̂ (materialized once; instances index into it).
    let translated = {
        let mut data = Vec::with_capacity(n * t);
        for i in 0..n {
            data.extend(inst.points.row(i).iter().zip(&x_hat).map(|(a, b)| a - b));
        }
        PowerMeansInstance::new(DenseMatrix::from_computed(n, t, data)?, p)?
    };

    // (2) L independent sample-and-solve instances.
    let l_count = (((opts.c_l * (1.0 / delta).ln()).ceil() as usize).max(1)).max(3);
    let runs: Vec<(f64, Vec<f64>)> = par::map_indexed(l_count, |ell| {
        let idx = draw_rows(&translated, s, seed, rng::tag::POWER_MEANS + 1 + ell as u64);
        let sample = gather(&translated, &idx);
        let mass = (n as f64 / s as f64) * sample_cost(&sample, p, &vec![0.0; t]);
        let (center, _) = weighted_center_solve(&sample, None, p, inner_tol, max_iter)
            .expect("center solve on nonempty sample");
        (mass, center)
    });

    // (3) Keep the (2/3)L instances with the smallest sampled mass.
    let mut order: Vec<usize> = (0..l_count).collect();
    order.sort_by(|&a, &b| runs[a].0.total_cmp(&runs[b].0));
    let keep = ((2 * l_count).div_ceil(3)).max(1);
    let kept = &order[..keep];

    // (4) Fresh validation sample picks the survivor.
    let val_idx = draw_rows(&translated, s, seed, rng::tag::POWER_MEANS + 10_000);
    let val_sample = gather(&translated, &val_idx);
    let mut best = kept[0];
    let mut best_val = f64::INFINITY;
    for &k in kept {
        let v = sample_cost(&val_sample, p, &runs[k].1);
        if v < best_val {
            best_val = v;
            best = k;
        }
    }

    let center: Vec<f64> = runs[best].1.iter().zip(&x_hat).map(|(a, b)| a + b).collect();
    Ok(PowerMeansResult {
        center,
        estimated_cost: (n as f64 / s as f64) * best_val,
        samples_used: s0 + l_count * s + s,
        instances_run: l_count,
        kept_instances: keep,
        exact_fallback: false,
    })
}

/// Single sample-and-solve estimate: draw `s` uniform rows (with
/// replacement), solve on the sample, return the center. This is the
/// protocol of the sample-size sweep experiment.
pub fn uniform_sample_center(
    inst: &PowerMeansInstance,
    s: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::invalid("sample size must be >= 1"));
    }
    let idx = draw_rows(inst, s.min(inst.n()), seed, rng::tag::POWER_MEANS + 77);
    let sample = gather(inst, &idx);
    Ok(weighted_center_solve(&sample, None, inst.p, tol, max_iter)?.0)
}
