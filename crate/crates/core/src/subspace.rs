//! Spanning coresets for `ℓp` subspace approximation.
//!
//! A `(1+ε)`-spanning coreset is a row subset of `A` whose span contains a
//! rank-`k` subspace `F̂` with `‖A(I − P_{F̂})‖_{p,2}^p ≤ (1+ε)·OPT_k`. The
//! construction solves `X̂ = argmin_X ‖S(AVX − A)‖_{p,2}` for a weak-coreset
//! sampling matrix `S` built from the Lewis weights of the reduced design
//! `AV`, where `V` is an `O(1)`-approximate rank-`k` solution; the row span
//! of `X̂` then lives inside the span of the selected rows.

use crate::coresets::{build_weak_coreset, WeakCoresetConfig};
use crate::embedding;
use crate::error::{Error, Result};
use crate::lewis;
use crate::par;
use crate::sampler;
use crate::solver::{self, RegressionProblem};
use crate::tensor::{powp, DenseMatrix};

/// `min_{rank(F)≤k} ‖A(I − P_F)‖_{p,2}^p`.
#[derive(Debug, Clone)]
pub struct SubspaceProblem {
    pub a: DenseMatrix,
    pub k: usize,
    pub p: f64,
}

impl SubspaceProblem {
    pub fn new(a: DenseMatrix, k: usize, p: f64) -> Result<Self> {
        if k == 0 || k > a.rows().min(a.cols()) {
            return Err(Error::invalid(format!(
                "k must satisfy 1 <= k <= min(n, d) = {}, got {k}",
                a.rows().min(a.cols())
            )));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        Ok(SubspaceProblem { a, k, p })
    }
}

#[derive(Debug, Clone)]
pub struct SpanningCoreset {
    /// Selected row indices of `A` (strictly increasing).
    pub row_indices: Vec<usize>,
    /// `k×d` orthonormal rows spanning `F̂` (fewer if the data has lower rank).
    pub subspace_basis: DenseMatrix,
    /// Exact `‖A(I − P_{F̂})‖_{p,2}^p` on the full data.
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct SpanningOptions {
    /// Oversampling constant of the weak-coreset stage.
    pub c_alpha: f64,
    /// Alternating-minimization refinements of the initial subspace.
    pub alt_steps: usize,
    /// Solve the sampled problem through the Gaussian embedding instead of
    /// directly on the `(p,2)` objective, mirroring the reduction proof.
    pub embed_mode: bool,
    /// Constant for the embedding row count in `embed_mode`.
    pub embed_const: f64,
    /// Above this row count the instance is first reduced with a strong
    /// coreset on the residual-augmented problem.
    pub prereduce_above: usize,
}

impl Default for SpanningOptions {
    fn default() -> Self {
        SpanningOptions {
            c_alpha: 1.0,
            alt_steps: 20,
            embed_mode: false,
            embed_const: 2.0,
            prereduce_above: 10_000,
        }
    }
}

fn check_orthonormal(basis: &DenseMatrix, tol: f64) -> Result<()> {
    for i in 0..basis.rows() {
        for j in i..basis.rows() {
            let dot: f64 = basis.row(i).iter().zip(basis.row(j)).map(|(a, b)| a * b).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > tol {
                return Err(Error::invalid(format!(
                    "basis rows {i},{j} not orthonormal: gram entry {dot}"
                )));
            }
        }
    }
    Ok(())
}

/// Exact `‖A(I − P_F)‖_{p,2}^p` for an orthonormal row basis of `F`.
pub fn subspace_cost(prob: &SubspaceProblem, basis: &DenseMatrix) -> Result<f64> {
    if basis.rows() > 0 && basis.cols() != prob.a.cols() {
        return Err(Error::shape("subspace_cost", prob.a.cols(), basis.cols()));
    }
    if basis.rows() > prob.k {
        return Err(Error::invalid(format!(
            "basis has {} rows, more than k = {}",
            basis.rows(),
            prob.k
        )));
    }
    check_orthonormal(basis, 1e-10)?;
    Ok(residual_cost(&prob.a, basis, prob.p, None))
}

/// `Σ_i u_i (‖a_i‖² − ‖Q a_i‖²)^{p/2}` for orthonormal rows `Q`.
fn residual_cost(a: &DenseMatrix, basis: &DenseMatrix, p: f64, u: Option<&[f64]>) -> f64 {
    par::sum_indexed(a.rows(), |i| {
        let row = a.row(i);
        let mut sq = row.iter().map(|x| x * x).sum::<f64>();
        for b in 0..basis.rows() {
            let dot: f64 = basis.row(b).iter().zip(row).map(|(x, y)| x * y).sum();
            sq -= dot * dot;
        }
        let w = u.map_or(1.0, |u| u[i]);
        w * powp(sq.max(0.0).sqrt(), p)
    })
}

/// Orthonormal basis (as rows) of the row span of `m`, truncated to
/// `max_rank` directions with singular values above `1e-12·σ_max`.
fn row_span_basis(m: &DenseMatrix, max_rank: usize) -> Result<DenseMatrix> {
    if m.rows() == 0 {
        return Ok(DenseMatrix::zeros(0, m.cols()));
    }
    let svd = nalgebra::SVD::new(m.to_nalgebra(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-12 * smax;
    let mut rows = Vec::new();
    for (idx, &sv) in svd.singular_values.iter().enumerate() {
        if rows.len() >= max_rank || sv <= cutoff || sv <= 0.0 {
            break;
        }
        rows.push(v_t.row(idx).iter().cloned().collect::<Vec<f64>>());
    }
    DenseMatrix::from_rows(&rows)
}

/// IRLS for `min_X Σ_i u_i ‖(AV)_i X − a_i‖₂^p`: row-wise Euclidean
/// residuals, `k×k` weighted normal equations per step.
fn solve_p2_rows(
    design: &DenseMatrix, // s×k
    target: &DenseMatrix, // s×d
    u: &[f64],
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DenseMatrix> {
    let (s, k) = design.shape();
    let d = target.cols();

    let weighted_solve = |omega: &[f64]| -> Result<DenseMatrix> {
        let mut gram = nalgebra::DMatrix::<f64>::zeros(k, k);
        let mut rhs = nalgebra::DMatrix::<f64>::zeros(k, d);
        for i in 0..s {
            let w = omega[i];
            if w == 0.0 {
                continue;
            }
            let v = design.row(i);
            let t = target.row(i);
            for r in 0..k {
                let wv = w * v[r];
                for c in 0..k {
                    gram[(r, c)] += wv * v[c];
                }
                for c in 0..d {
                    rhs[(r, c)] += wv * t[c];
                }
            }
        }
        let x = match nalgebra::Cholesky::new(gram.clone()) {
            Some(ch) => ch.solve(&rhs),
            None => {
                let eig = nalgebra::SymmetricEigen::new(gram);
                let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
                let mut pinv = nalgebra::DMatrix::zeros(k, k);
                for idx in 0..k {
                    let lam = eig.eigenvalues[idx];
                    if lam > 1e-12 * lmax && lam > 0.0 {
                        let v = eig.eigenvectors.column(idx);
                        pinv += v * v.transpose() / lam;
                    }
                }
                pinv * rhs
            }
        };
        DenseMatrix::from_nalgebra(&x)
    };

    let mut x = weighted_solve(&u.to_vec())?;
    if p == 2.0 {
        return Ok(x);
    }

    let residual_norms = |x: &DenseMatrix| -> Result<Vec<f64>> {
        let fit = design.matmul(x)?;
        Ok((0..s)
            .map(|i| {
                fit.row(i)
                    .iter()
                    .zip(target.row(i))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect())
    };

    const MU_FLOOR: f64 = 1e-10;
    let smoothed = |r: &[f64], mu: f64| -> f64 {
        r.iter()
            .zip(u)
            .map(|(&d, &w)| w * powp(d * d + mu * mu, p / 2.0))
            .sum()
    };
    let mut r = residual_norms(&x)?;
    let rms = (r.iter().map(|v| v * v).sum::<f64>() / s as f64).sqrt();
    let mut mu = (1e-2 * rms).max(MU_FLOOR);
    let mut f = smoothed(&r, mu);

    for _ in 0..max_iter {
        let omega: Vec<f64> = r
            .iter()
            .zip(u)
            .map(|(&d, &w)| w * powp(d * d + mu * mu, p / 2.0 - 1.0))
            .collect();
        let x_hat = weighted_solve(&omega)?;
        let (x_new, r_new, f_new) = if p <= 2.0 {
            let rn = residual_norms(&x_hat)?;
            let fn_ = smoothed(&rn, mu);
            (x_hat, rn, fn_)
        } else {
            let mut theta = 1.0 / (p - 1.0);
            let mut picked = None;
            for _ in 0..8 {
                let cand = x.scale(1.0 - theta)?.add(&x_hat.scale(theta)?)?;
                let rn = residual_norms(&cand)?;
                let fc = smoothed(&rn, mu);
                if fc <= f {
                    picked = Some((cand, rn, fc));
                    break;
                }
                theta *= 0.5;
            }
            picked.unwrap_or((x.clone(), r.clone(), f))
        };
        let rel = (f - f_new) / f.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        r = r_new;
        f = f_new;
        if rel < tol {
            if mu > MU_FLOOR {
                mu = (mu * 0.5).max(MU_FLOOR);
                f = smoothed(&r, mu);
            } else {
                break;
            }
        }
    }
    Ok(x)
}

/// `O(1)`-approximate rank-`k` factor: truncated SVD refined by alternating
/// minimization of the `(p,2)` cost. Returns `V` (`d×k` orthonormal columns
/// stored as `k×d` rows) achieving the best observed cost.
fn approx_factor(a: &DenseMatrix, k: usize, p: f64, alt_steps: usize) -> Result<DenseMatrix> {
    let mut basis = row_span_basis(a, k)?;
    if p == 2.0 {
        return Ok(basis);
    }
    let u = vec![1.0; a.rows()];
    let mut best_cost = residual_cost(a, &basis, p, None);
    let mut best = basis.clone();
    for _ in 0..alt_steps {
        let design = a.matmul_transpose(&basis)?; // n×k
        let x = solve_p2_rows(&design, a, &u, p, 1e-8, 100)?;
        basis = row_span_basis(&x, k)?;
        if basis.rows() == 0 {
            break;
        }
        let cost = residual_cost(a, &basis, p, None);
        if cost < best_cost {
            best_cost = cost;
            best = basis.clone();
        }
    }
    Ok(best)
}

/// Extends `basis` toward `k` rows with directions from the row span of
/// `pool`, Gram-Schmidt style.
fn extend_basis(basis: DenseMatrix, pool: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if basis.rows() >= k {
        return Ok(basis);
    }
    let mut rows: Vec<Vec<f64>> = (0..basis.rows()).map(|i| basis.row(i).to_vec()).collect();
    let pool_basis = row_span_basis(pool, pool.rows().min(pool.cols()))?;
    for c in 0..pool_basis.rows() {
        if rows.len() >= k {
            break;
        }
        let mut v = pool_basis.row(c).to_vec();
        for r in &rows {
            let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, ri) in v.iter_mut().zip(r) {
                *vi -= dot * ri;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            rows.push(v);
        }
    }
    DenseMatrix::from_rows(&rows)
}

pub fn build_spanning_coreset(
    prob: &SubspaceProblem,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<SpanningCoreset> {
    build_spanning_coreset_with(prob, eps, delta, seed, &SpanningOptions::default())
}

pub fn build_spanning_coreset_with(
    prob: &SubspaceProblem,
    eps: f64,
    delta: f64,
    seed: u64,
    opts: &SpanningOptions,
) -> Result<SpanningCoreset> {
    let (n, _d) = prob.a.shape();
    let p = prob.p;

    // Desk-scale stand-in for an external poly(k/ε) pre-coreset: above the
    // threshold, reduce rows with our own strong coreset on the
    // residual-augmented problem min_X ‖(AV₀)X − A‖.
    let (work, row_map): (DenseMatrix, Vec<usize>) = if n > opts.prereduce_above {
        let v0 = row_span_basis(&prob.a, prob.k)?;
        let design = prob.a.matmul_transpose(&v0)?;
        let cfg = crate::coresets::StrongCoresetConfig::new(eps.min(0.5), delta, p)?;
        let lewis_res = lewis::lewis_weights(&design, p, 200, 1e-10)?;
        let approx = solver::solve(
            &RegressionProblem::new(design.clone(), prob.a.clone(), None, p)?,
            1e-4,
            40,
        )?;
        let q = crate::coresets::strong_coreset_probabilities(&design, &prob.a, &cfg, &lewis_res, &approx)?;
        let s = sampler::draw_sampling_matrix(&q, p, seed ^ 0x5EED)?;
        let reduced = sampler::apply(&s, &prob.a)?;
        (reduced, s.kept_indices())
    } else {
        (prob.a.clone(), (0..n).collect())
    };

    // (1) O(1)-approximate rank-k factor on the working rows.
    let v_rows = approx_factor(&work, prob.k, p, opts.alt_steps)?; // k×d rows
    if v_rows.rows() == 0 {
        return Err(Error::domain("input matrix has numerical rank 0"));
    }
    let design = work.matmul_transpose(&v_rows)?; // n_w × k

    // (2) Weak-coreset sampling matrix from the Lewis weights of the design.
    let cfg = WeakCoresetConfig {
        eps,
        delta,
        p,
        c_alpha: opts.c_alpha,
    };
    let lres = lewis::lewis_weights(&design, p, 200, 1e-10)?;
    let s = build_weak_coreset(&design, &cfg, &lres, seed)?;
    if s.nnz() == 0 {
        return Err(Error::EmptyCoreset);
    }

    // (3) X̂ = argmin ‖S(AVX − A)‖_{p,2} over X ∈ R^{k×d}.
    let design_s = sampler::apply(&s, &design)?;
    let target_s = sampler::apply(&s, &work)?;
    let u = vec![1.0; design_s.rows()];
    let x_hat = if opts.embed_mode {
        // Mirror the reduction proof: embed the d target columns into an
        // entrywise ℓp problem and reuse the coupled solver.
        let embed_eps = (0.45 / p).min(0.3);
        let e = embedding::build_embedding_with_const(
            prob.a.cols(),
            p,
            embed_eps,
            seed ^ 0xE3BED,
            opts.embed_const,
        )?;
        let g_factor = e.as_g_factor()?; // d × n_embed
        let b_embed = target_s.matmul(&g_factor)?; // s × n_embed
        let rp = RegressionProblem::new(design_s.clone(), b_embed, Some(g_factor), p)?;
        solver::solve(&rp, 1e-8, 300)?.x
    } else {
        solve_p2_rows(&design_s, &target_s, &u, p, 1e-9, 300)?
    };

    // (4) Force the row span into the span of the selected rows (the exact
    // minimizer already lives there; projection removes solver drift).
    let span_basis = row_span_basis(&target_s, target_s.rows().min(target_s.cols()))?;
    let coeffs = x_hat.matmul_transpose(&span_basis)?;
    let x_proj = coeffs.matmul(&span_basis)?;

    // (5) Rank-k orthonormal basis of the projected row span, padded from the
    // selected-row span if numerically rank-deficient.
    let basis = row_span_basis(&x_proj, prob.k)?;
    let basis = extend_basis(basis, &target_s, prob.k)?;

    let cost = residual_cost(&prob.a, &basis, p, None);
    let row_indices: Vec<usize> = s.kept().iter().map(|&(i, _)| row_map[i]).collect();
    Ok(SpanningCoreset {
        row_indices,
        subspace_basis: basis,
        cost,
    })
}
