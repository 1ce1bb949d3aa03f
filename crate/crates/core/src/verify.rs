//! Probe-based coreset verification and statistical checks.
//!
//! The strong-coreset property quantifies over every `X`, which sampling
//! cannot certify; we evaluate structured probe sets instead — random `X` at
//! dyadic scales around `‖X*‖`, the optimum itself, zero, and near-optimal
//! perturbations — and report the worst relative error. Uniform random
//! probes alone rarely stress the residual term, which is why the optimum
//! and its neighborhood are always included.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::sampler::{self, SamplingMatrix};
use crate::solver::{self, RegressionProblem};
use crate::tensor::{entrywise_lp_norm_pow, powp, DenseMatrix, WeightVector};
use rand_distr::{Distribution, StandardNormal};

/// Verification output.
#[derive(Debug, Clone)]
pub struct CoresetReport {
    pub probe_count: usize,
    /// Probes with a zero denominator are skipped and counted here.
    pub skipped: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    pub passed: bool,
    pub nnz: usize,
    pub seed: u64,
}

impl CoresetReport {
    /// Line-delimited `field=value` record consumed by the harness.
    pub fn to_record(&self) -> String {
        format!(
            "probe_count={} skipped={} max_rel_error={} mean_rel_error={} passed={} nnz={} seed={}",
            self.probe_count,
            self.skipped,
            self.max_rel_error,
            self.mean_rel_error,
            self.passed,
            self.nnz,
            self.seed
        )
    }
}

fn random_like(rng: &mut rand_chacha::ChaCha8Rng, d: usize, t: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, t, |_, _| StandardNormal.sample(rng)).expect("finite gaussians")
}

fn set_frob_norm(m: &DenseMatrix, target: f64) -> DenseMatrix {
    let norm = m.frob_norm();
    if norm == 0.0 {
        m.clone()
    } else {
        m.scale(target / norm).expect("finite rescale")
    }
}

/// Builds the structured probe set: `X*`, `0`, random `X` at scales
/// `2^{-5}..2^5` relative to `‖X*‖_F`, and near-optimal perturbations.
fn probe_set(x_star: &DenseMatrix, count: usize, seed: u64) -> Vec<DenseMatrix> {
    let (d, t) = x_star.shape();
    let mut rng = rng::stream_rng(seed, rng::tag::PROBES, 0);
    let base = if x_star.frob_norm() > 1e-12 {
        x_star.frob_norm()
    } else {
        1.0
    };
    let mut probes = Vec::with_capacity(count + 2);
    probes.push(x_star.clone());
    probes.push(DenseMatrix::zeros(d, t));

    let scales: Vec<f64> = (-5..=5).map(|e| base * 2f64.powi(e)).collect();
    // 60% random at scales, 40% perturbations of the optimum.
    let n_random = (count.saturating_sub(2) * 3) / 5;
    let n_perturb = count.saturating_sub(2) - n_random;
    for k in 0..n_random {
        let scale = scales[k % scales.len()];
        probes.push(set_frob_norm(&random_like(&mut rng, d, t), scale));
    }
    for k in 0..n_perturb {
        let scale = base * 2f64.powi(-((k % 11) as i32) - 1);
        let dir = set_frob_norm(&random_like(&mut rng, d, t), scale);
        probes.push(x_star.add(&dir).expect("shape match"));
    }
    probes
}

/// `Σ_{i,j} |[AX − B](i,j)|^p` without materializing the residual.
fn residual_norm_pow(a: &DenseMatrix, b: &DenseMatrix, x: &DenseMatrix, p: f64) -> f64 {
    let d = a.cols();
    let m = b.cols();
    par::sum_indexed(a.rows(), |i| {
        let a_row = a.row(i);
        let b_row = b.row(i);
        let mut acc = 0.0;
        for j in 0..m {
            let mut dot = 0.0;
            for k in 0..d {
                dot += a_row[k] * x.get(k, j);
            }
            acc += powp(dot - b_row[j], p);
        }
        acc
    })
}

/// Relative error of `‖S(AX−B)‖_{p,p}^p` against the exact value over the
/// probe set. `passed ⟺ max_rel_error ≤ eps`.
pub fn verify_strong(
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: &SamplingMatrix,
    p: f64,
    eps: f64,
    probes: usize,
    seed: u64,
) -> Result<CoresetReport> {
    if a.rows() != b.rows() {
        return Err(Error::shape("verify_strong (rows of A vs B)", a.rows(), b.rows()));
    }
    if s.n() != a.rows() {
        return Err(Error::shape("verify_strong (rows of A vs S)", a.rows(), s.n()));
    }
    // The optimum only anchors the probe scales; a moderate tolerance is
    // plenty.
    let prob = RegressionProblem::new(a.clone(), b.clone(), None, p)?;
    let x_star = solver::solve(&prob, 1e-6, 150)?.x;
    let xs = probe_set(&x_star, probes, seed);

    let a_s = sampler::apply(s, a)?;
    let b_s = sampler::apply(s, b)?;

    let errs: Vec<Option<f64>> = par::map_slice(&xs, |x| {
        let exact = residual_norm_pow(a, b, x, p);
        if !exact.is_finite() {
            return None;
        }
        if exact == 0.0 {
            return None;
        }
        let sampled = if a_s.rows() == 0 {
            0.0
        } else {
            residual_norm_pow(&a_s, &b_s, x, p)
        };
        Some((sampled / exact - 1.0).abs())
    });

    let mut max_err: f64 = 0.0;
    let mut sum_err = 0.0;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for e in errs {
        match e {
            Some(v) => {
                max_err = max_err.max(v);
                sum_err += v;
                evaluated += 1;
            }
            None => skipped += 1,
        }
    }
    let mean = if evaluated > 0 { sum_err / evaluated as f64 } else { 0.0 };
    Ok(CoresetReport {
        probe_count: evaluated + skipped,
        skipped,
        max_rel_error: max_err,
        mean_rel_error: mean,
        passed: max_err <= eps,
        nnz: s.nnz(),
        seed: s.seed(),
    })
}

/// Weak-coreset check: solve on the coreset, evaluate the minimizer on the
/// full data, and compare with the full-data optimum. `max_rel_error` holds
/// `ratio − 1`; `passed ⟺ ratio ≤ 1 + eps`.
pub fn verify_weak(
    a: &DenseMatrix,
    b: &DenseMatrix,
    g: Option<&DenseMatrix>,
    s: &SamplingMatrix,
    p: f64,
    eps: f64,
) -> Result<CoresetReport> {
    let prob = RegressionProblem::new(a.clone(), b.clone(), g.cloned(), p)?;
    // Full-data OPT oracle: tight tolerance with restarts guarding the
    // smoothing schedule.
    let opt = solver::solve_with_restarts(&prob, 1e-8, 500, 5, s.seed())?;
    let reduced = solver::solve_on_coreset(&prob, s, 1e-8, 500)?;
    let full_obj = prob.objective(&reduced.x)?;
    let ratio = if opt.objective > 0.0 {
        full_obj / opt.objective
    } else if full_obj <= 1e-12 {
        1.0
    } else {
        f64::INFINITY
    };
    let err = (ratio - 1.0).max(0.0);
    Ok(CoresetReport {
        probe_count: 1,
        skipped: 0,
        max_rel_error: err,
        mean_rel_error: err,
        passed: ratio <= 1.0 + eps,
        nnz: s.nnz(),
        seed: s.seed(),
    })
}

/// Difference-preservation check: the empirical envelope constant
///
/// `max_x |(‖S(Ax−b)‖_p^p − ‖Sb*‖_p^p) − (‖Ax−b‖_p^p − ‖b*‖_p^p)| /
///  (‖b*‖_p^p + ‖Sb*‖_p^p + (1/η)‖Ax−Ax*‖_p^p)`
///
/// over `trials` sampled `x`, drawn at many scales of `‖Ax−Ax*‖`.
pub fn check_difference_preservation(
    a: &DenseMatrix,
    b: &[f64],
    x_star: &[f64],
    s: &SamplingMatrix,
    p: f64,
    eta: f64,
    trials: usize,
) -> Result<f64> {
    let (n, d) = a.shape();
    if b.len() != n || x_star.len() != d {
        return Err(Error::shape("check_difference_preservation", n, b.len()));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let bm = DenseMatrix::new(n, 1, b.to_vec())?;
    let xm = DenseMatrix::new(d, 1, x_star.to_vec())?;
    let b_star_full: Vec<f64> = a
        .matmul(&xm)?
        .sub(&bm)?
        .data()
        .to_vec();
    let bstar_norm = entrywise_lp_norm_pow(&DenseMatrix::new(n, 1, b_star_full.clone())?, p)?;
    let s_bstar_norm = s.apply_norm_pow(&b_star_full, p)?;

    let ratios: Vec<f64> = par::map_indexed(trials, |t| {
        let mut rng = rng::stream_rng(s.seed(), rng::tag::DIFF_CHECK, t as u64);
        let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        // Scale the direction so ‖A(x−x*)‖_p^p sweeps dyadic scales of ‖b*‖.
        let exp = (t % 17) as i32 - 10;
        let target = (bstar_norm.max(1e-12) * 2f64.powi(exp)).powf(1.0 / p);
        let adir: Vec<f64> = (0..n).map(|i| {
            let row = a.row(i);
            row.iter().zip(&dir).map(|(x, y)| x * y).sum()
        }).collect();
        let adm = DenseMatrix::new(n, 1, adir.clone()).expect("finite");
        let anorm = entrywise_lp_norm_pow(&adm, p).expect("finite").powf(1.0 / p);
        if anorm == 0.0 {
            return 0.0;
        }
        let c = target / anorm;
        let ax_minus_b: Vec<f64> = (0..n).map(|i| b_star_full[i] + c * adir[i]).collect();
        let drift: Vec<f64> = (0..n).map(|i| c * adir[i]).collect();

        let full = entrywise_lp_norm_pow(&DenseMatrix::new(n, 1, ax_minus_b.clone()).expect("finite"), p)
            .expect("finite");
        let sampled = s.apply_norm_pow(&ax_minus_b, p).expect("finite");
        let drift_norm =
            entrywise_lp_norm_pow(&DenseMatrix::new(n, 1, drift).expect("finite"), p).expect("finite");

        let lhs = ((sampled - s_bstar_norm) - (full - bstar_norm)).abs();
        let rhs = bstar_norm + s_bstar_norm + drift_norm / eta;
        if rhs > 0.0 {
            lhs / rhs
        } else {
            0.0
        }
    });
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Sensitivity partition diagnostic.
///
/// Computes the threshold `τ = η/(γ^{p/2}ε^p)` (for `p < 2`; the `p > 2`
/// variant carries `‖w‖₁^{p/2−1}`), splits rows into the "good" set
/// `G = {i : |[Ax*−b](i)| ≤ τ·w_i·R}` and its complement, and returns
/// `(good, outlier, τ)`.
pub fn sensitivity_partition(
    a: &DenseMatrix,
    b: &[f64],
    x_star: &[f64],
    w: &WeightVector,
    gamma: f64,
    eps: f64,
    eta: f64,
    r: f64,
    p: f64,
) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    let (n, d) = a.shape();
    if b.len() != n || x_star.len() != d || w.len() != n {
        return Err(Error::shape("sensitivity_partition", n, b.len()));
    }
    let bm = DenseMatrix::new(n, 1, b.to_vec())?;
    let xm = DenseMatrix::new(d, 1, x_star.to_vec())?;
    let resid = a.matmul(&xm)?.sub(&bm)?;
    let resid_norm = entrywise_lp_norm_pow(&resid, p)?;
    if r < resid_norm * (1.0 - 1e-9) {
        return Err(Error::invalid(format!(
            "scale R={r} below the residual mass {resid_norm}"
        )));
    }
    let tau = if p <= 2.0 {
        eta / (gamma.powf(p / 2.0) * powp(eps, p))
    } else {
        eta * w.sum().max(1.0).powf(p / 2.0 - 1.0) / (gamma.powf(p / 2.0) * powp(eps, p))
    };
    let mut good = Vec::new();
    let mut outlier = Vec::new();
    for i in 0..n {
        if resid.get(i, 0).abs() <= tau * w.get(i) * r {
            good.push(i);
        } else {
            outlier.push(i);
        }
    }
    Ok((good, outlier, tau))
}
