//! Weighted single- and multiple-response `ℓp` regression:
//! `min_X ‖A X G − B‖_{p,p}^p`, optionally with per-row weights.
//!
//! `p = 2` is solved in closed form through the normal equations. For
//! `p ≠ 2` we minimize the smoothed objective `Σ (r_ij² + μ²)^{p/2}` by
//! iteratively reweighted least squares, halving `μ` whenever progress
//! stalls (floored at 1e-10). For `p < 2` the reweighted solve majorizes the
//! smoothed objective, so plain IRLS descends; for `p > 2` steps are damped
//! by `1/(p−1)` with backtracking.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::sampler::{self, SamplingMatrix};
use crate::tensor::{entrywise_lp_norm, powp, signed_powp1, DenseMatrix, WeightVector};

const MU_FLOOR: f64 = 1e-10;

/// The problem bundle `min_X ‖A X G − B‖_{p,p}` (`g = None` means `G = I`).
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub g: Option<DenseMatrix>,
    pub p: f64,
    /// Per-row weights for coreset-weighted solves (`u_i` multiplies row `i`'s
    /// contribution `Σ_j |r_ij|^p`).
    pub row_weights: Option<WeightVector>,
}

impl RegressionProblem {
    pub fn new(a: DenseMatrix, b: DenseMatrix, g: Option<DenseMatrix>, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        if a.rows() != b.rows() {
            return Err(Error::shape("RegressionProblem", a.rows(), b.rows()));
        }
        if let Some(g) = &g {
            if g.cols() != b.cols() {
                return Err(Error::shape("RegressionProblem (G cols)", b.cols(), g.cols()));
            }
        }
        Ok(RegressionProblem {
            a,
            b,
            g,
            p,
            row_weights: None,
        })
    }

    pub fn with_row_weights(mut self, w: WeightVector) -> Result<Self> {
        if w.len() != self.a.rows() {
            return Err(Error::shape("row_weights", self.a.rows(), w.len()));
        }
        self.row_weights = Some(w);
        Ok(self)
    }

    /// Shape of the unknown `X`: `d×m` for identity `G`, else `d×t`.
    pub fn x_shape(&self) -> (usize, usize) {
        let d = self.a.cols();
        let t = self.g.as_ref().map_or(self.b.cols(), |g| g.rows());
        (d, t)
    }

    /// `A X G − B`.
    pub fn residual(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let ax = self.a.matmul(x)?;
        let axg = match &self.g {
            Some(g) => ax.matmul(g)?,
            None => ax,
        };
        axg.sub(&self.b)
    }

    fn row_weight(&self, i: usize) -> f64 {
        self.row_weights.as_ref().map_or(1.0, |w| w.get(i))
    }

    /// Weighted `‖A X G − B‖_{p,p}^p`.
    pub fn objective(&self, x: &DenseMatrix) -> Result<f64> {
        let r = self.residual(x)?;
        let m = r.cols();
        Ok(par::sum_indexed(r.rows(), |i| {
            let u = self.row_weight(i);
            if u == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for j in 0..m {
                acc += powp(r.get(i, j), self.p);
            }
            u * acc
        }))
    }

    fn smoothed_objective(&self, r: &DenseMatrix, mu: f64) -> f64 {
        let m = r.cols();
        let half_p = self.p / 2.0;
        par::sum_indexed(r.rows(), |i| {
            let u = self.row_weight(i);
            if u == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for j in 0..m {
                let rij = r.get(i, j);
                acc += powp(rij * rij + mu * mu, half_p);
            }
            u * acc
        })
    }
}

/// Solver output. `objective` is the `p`-th power of the norm.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: DenseMatrix,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Frobenius norm of the gradient at the final iterate (smoothed gradient
    /// at the final `μ` for `p ≠ 2`).
    pub gradient_norm: f64,
    /// Declared first-order tolerance: `converged` implies
    /// `gradient_norm ≤ gradient_tol`.
    pub gradient_tol: f64,
}

/// `∇_X ‖AXG−B‖_{p,p}^p = p · Aᵀ (U ∘ R^{∘(p−1)}) Gᵀ` with
/// `R^{∘(p−1)}` meaning `sign(r)|r|^{p−1}`.
///
/// For `p = 1` with exact zeros in the residual the subgradient is not
/// unique; callers are pointed at [`smoothed_gradient`].
pub fn gradient(prob: &RegressionProblem, x: &DenseMatrix) -> Result<DenseMatrix> {
    let r = prob.residual(x)?;
    if prob.p == 1.0 && r.data().iter().any(|&v| v == 0.0) {
        return Err(Error::domain(
            "gradient at p=1 with exact zero residuals; use smoothed_gradient",
        ));
    }
    gradient_of_residual(prob, &r, None)
}

/// Gradient of the smoothed objective `Σ u_i (r_ij² + μ²)^{p/2}`.
pub fn smoothed_gradient(prob: &RegressionProblem, x: &DenseMatrix, mu: f64) -> Result<DenseMatrix> {
    let r = prob.residual(x)?;
    gradient_of_residual(prob, &r, Some(mu))
}

fn gradient_of_residual(
    prob: &RegressionProblem,
    r: &DenseMatrix,
    mu: Option<f64>,
) -> Result<DenseMatrix> {
    let p = prob.p;
    let kernel = |rij: f64| -> f64 {
        match mu {
            None => signed_powp1(rij, p),
            Some(mu) => powp(rij * rij + mu * mu, p / 2.0 - 1.0) * rij,
        }
    };
    // Scaled residual kernel, row-weighted.
    let (n, m) = r.shape();
    let mut k = Vec::with_capacity(n * m);
    for i in 0..n {
        let u = prob.row_weight(i);
        for j in 0..m {
            k.push(u * kernel(r.get(i, j)));
        }
    }
    let k = DenseMatrix::from_computed(n, m, k)?;
    let atk = prob.a.transpose().matmul(&k)?; // d×m
    let out = match &prob.g {
        Some(g) => atk.matmul_transpose(g)?, // d×t
        None => atk,
    };
    out.scale(p)
}

fn sym_pinv(m: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let lam_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-12 * lam_max;
    let k = m.nrows();
    let mut inv = nalgebra::DMatrix::zeros(k, k);
    for idx in 0..k {
        let lam = eig.eigenvalues[idx];
        if lam > cutoff && lam > 0.0 {
            let v = eig.eigenvectors.column(idx);
            inv += v * v.transpose() / lam;
        }
    }
    inv
}

/// Closed-form weighted least squares: `X = (AᵀUA)⁺ AᵀUB Gᵀ (GGᵀ)⁺`.
fn solve_p2(prob: &RegressionProblem) -> Result<DenseMatrix> {
    let entry_weights = |_: usize, _: usize| 1.0;
    weighted_ls(prob, &entry_weights)
}

/// Solves `min_X Σ_ij u_i ω_ij ([AXG]_ij − B_ij)²` for entry weights `ω`.
///
/// With identity `G` the columns decouple into `d×d` solves; with a general
/// `G` the normal matrix is accumulated per row as `(a_i a_iᵀ) ⊗ (G Ω_i Gᵀ)`.
fn weighted_ls<F>(prob: &RegressionProblem, entry_weight: &F) -> Result<DenseMatrix>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let (n, d) = prob.a.shape();
    let m = prob.b.cols();
    match &prob.g {
        None => {
            let cols: Vec<Vec<f64>> = par::map_indexed(m, |j| {
                let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
                let mut rhs = nalgebra::DVector::<f64>::zeros(d);
                for i in 0..n {
                    let w = prob.row_weight(i) * entry_weight(i, j);
                    if w == 0.0 {
                        continue;
                    }
                    let row = prob.a.row(i);
                    for r in 0..d {
                        let wr = w * row[r];
                        rhs[r] += wr * prob.b.get(i, j);
                        for c in r..d {
                            gram[(r, c)] += wr * row[c];
                        }
                    }
                }
                for r in 0..d {
                    for c in 0..r {
                        gram[(r, c)] = gram[(c, r)];
                    }
                }
                let x = match nalgebra::Cholesky::new(gram.clone()) {
                    Some(ch) => ch.solve(&rhs),
                    None => sym_pinv(&gram) * rhs,
                };
                x.iter().cloned().collect()
            });
            // cols[j][r] → X[r][j]
            let mut data = vec![0.0; d * m];
            for (j, col) in cols.iter().enumerate() {
                for r in 0..d {
                    data[r * m + j] = col[r];
                }
            }
            DenseMatrix::from_computed(d, m, data)
        }
        Some(g) => {
            let t = g.rows();
            let dim = d * t;
            let n_chunks = n.div_ceil(par::SUM_CHUNK).max(1);
            let partials: Vec<(Vec<f64>, Vec<f64>)> = par::map_indexed(n_chunks, |c| {
                let lo = c * par::SUM_CHUNK;
                let hi = ((c + 1) * par::SUM_CHUNK).min(n);
                let mut h = vec![0.0; dim * dim];
                let mut rhs = vec![0.0; dim];
                let mut mi = vec![0.0; t * t];
                let mut vi = vec![0.0; t];
                for i in lo..hi {
                    let u = prob.row_weight(i);
                    if u == 0.0 {
                        continue;
                    }
                    let a_row = prob.a.row(i);
                    // M_i = G diag(u·ω_i) Gᵀ and v_i = G (u·ω_i ∘ b_i).
                    mi.iter_mut().for_each(|x| *x = 0.0);
                    vi.iter_mut().for_each(|x| *x = 0.0);
                    for j in 0..m {
                        let w = u * entry_weight(i, j);
                        if w == 0.0 {
                            continue;
                        }
                        let bij = prob.b.get(i, j);
                        for r in 0..t {
                            let gr = g.get(r, j);
                            if gr == 0.0 {
                                continue;
                            }
                            let wgr = w * gr;
                            vi[r] += wgr * bij;
                            for s in r..t {
                                mi[r * t + s] += wgr * g.get(s, j);
                            }
                        }
                    }
                    for r in 0..t {
                        for s in 0..r {
                            mi[r * t + s] = mi[s * t + r];
                        }
                    }
                    // H += (a_i a_iᵀ) ⊗ M_i under row-major vec X[r,c] ↦ r·t+c.
                    for r1 in 0..d {
                        let ar1 = a_row[r1];
                        if ar1 == 0.0 {
                            continue;
                        }
                        for c1 in 0..t {
                            let row_idx = (r1 * t + c1) * dim;
                            let base = c1 * t;
                            for r2 in 0..d {
                                let f = ar1 * a_row[r2];
                                if f == 0.0 {
                                    continue;
                                }
                                let off = row_idx + r2 * t;
                                for c2 in 0..t {
                                    h[off + c2] += f * mi[base + c2];
                                }
                            }
                        }
                        for c1 in 0..t {
                            rhs[r1 * t + c1] += ar1 * vi[c1];
                        }
                    }
                }
                (h, rhs)
            });
            let mut h = vec![0.0; dim * dim];
            let mut rhs = vec![0.0; dim];
            for (hp, rp) in partials {
                for (a, b) in h.iter_mut().zip(&hp) {
                    *a += b;
                }
                for (a, b) in rhs.iter_mut().zip(&rp) {
                    *a += b;
                }
            }
            let hm = nalgebra::DMatrix::from_row_slice(dim, dim, &h);
            let rv = nalgebra::DVector::from_row_slice(&rhs);
            let x = match nalgebra::Cholesky::new(hm.clone()) {
                Some(ch) => ch.solve(&rv),
                None => sym_pinv(&hm) * rv,
            };
            DenseMatrix::from_computed(d, t, x.iter().cloned().collect())
        }
    }
}

fn finish(
    prob: &RegressionProblem,
    x: DenseMatrix,
    iterations: usize,
    raw_converged: bool,
    mu: f64,
    gradient_tol: f64,
) -> Result<SolveResult> {
    let objective = prob.objective(&x)?;
    let gradient_norm = if prob.p == 2.0 {
        gradient(prob, &x)?.frob_norm()
    } else {
        smoothed_gradient(prob, &x, mu)?.frob_norm()
    };
    Ok(SolveResult {
        x,
        objective,
        iterations,
        converged: raw_converged && gradient_norm <= gradient_tol,
        gradient_norm,
        gradient_tol,
    })
}

/// Solves the regression problem.
///
/// Convergence for `p ≠ 2` is declared when the relative decrease of the
/// smoothed objective drops below `tol` with the smoothing at its floor and
/// the first-order check passes; `max_iter` exhaustion returns the best
/// iterate with `converged = false`.
pub fn solve(prob: &RegressionProblem, tol: f64, max_iter: usize) -> Result<SolveResult> {
    solve_from(prob, None, tol, max_iter, 1.0)
}

fn solve_from(
    prob: &RegressionProblem,
    x0: Option<DenseMatrix>,
    tol: f64,
    max_iter: usize,
    mu_factor: f64,
) -> Result<SolveResult> {
    let (n, _) = prob.a.shape();
    let m = prob.b.cols();
    if n == 0 {
        return Err(Error::invalid("regression problem with zero rows"));
    }

    // Declared first-order tolerance, scaled by the gradient magnitude at 0.
    let p = prob.p;
    let bnorm = entrywise_lp_norm(&prob.b, p)?;
    let mu0 = ((1e-2 * bnorm / ((n * m.max(1)) as f64).sqrt()) * mu_factor).max(MU_FLOOR);
    let g0 = smoothed_gradient(prob, &DenseMatrix::zeros(prob.x_shape().0, prob.x_shape().1), mu0)?
        .frob_norm();
    let gradient_tol = tol.sqrt() * (1.0 + g0);

    if p == 2.0 {
        let x = solve_p2(prob)?;
        return finish(prob, x, 0, true, MU_FLOOR, gradient_tol);
    }

    let mut x = match x0 {
        Some(x0) => x0,
        None => solve_p2(prob)?, // least-squares warm start
    };
    let mut mu = mu0;
    let mut r = prob.residual(&x)?;
    let mut f = prob.smoothed_objective(&r, mu);
    let half_exp = p / 2.0 - 1.0;
    let mut raw_converged = false;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        let r_ref = &r;
        let entry_weight = move |i: usize, j: usize| -> f64 {
            let rij = r_ref.get(i, j);
            powp(rij * rij + mu * mu, half_exp)
        };
        let x_hat = weighted_ls(prob, &entry_weight)?;

        let (x_new, r_new, f_new) = if p <= 2.0 {
            let r_new = prob.residual(&x_hat)?;
            let f_new = prob.smoothed_objective(&r_new, mu);
            (x_hat, r_new, f_new)
        } else {
            // Damped step with backtracking.
            let mut theta = 1.0 / (p - 1.0);
            let mut best: Option<(DenseMatrix, DenseMatrix, f64)> = None;
            for _ in 0..8 {
                let cand = x
                    .scale(1.0 - theta)?
                    .add(&x_hat.scale(theta)?)?;
                let rc = prob.residual(&cand)?;
                let fc = prob.smoothed_objective(&rc, mu);
                if fc <= f {
                    best = Some((cand, rc, fc));
                    break;
                }
                theta *= 0.5;
            }
            match best {
                Some(b) => b,
                None => (x.clone(), r.clone(), f), // no progress at this μ
            }
        };

        let rel = (f - f_new) / f.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        r = r_new;
        f = f_new;

        if rel < tol {
            if mu > MU_FLOOR {
                mu = (mu * 0.5).max(MU_FLOOR);
                f = prob.smoothed_objective(&r, mu);
            } else {
                raw_converged = true;
                break;
            }
        }
    }

    finish(prob, x, iterations, raw_converged, mu, gradient_tol)
}

/// Runs `solve` from several starts (perturbed inits and smoothing scales)
/// and returns the best result by objective.
pub fn solve_with_restarts(
    prob: &RegressionProblem,
    tol: f64,
    max_iter: usize,
    restarts: usize,
    seed: u64,
) -> Result<SolveResult> {
    if prob.p == 2.0 || restarts <= 1 {
        return solve(prob, tol, max_iter);
    }
    let mut best: Option<SolveResult> = None;
    let mu_factors = [1.0, 0.1, 10.0, 0.01, 100.0];
    for r in 0..restarts {
        let x0 = if r == 0 {
            None
        } else {
            let (d, t) = prob.x_shape();
            let base = solve_p2(prob)?;
            let scale = 0.5 * r as f64 * (base.frob_norm() / ((d * t) as f64).sqrt() + 1e-9);
            let mut rng = rng::stream_rng(seed, rng::tag::SOLVER_RESTART, r as u64);
            let noise = random_matrix(&mut rng, d, t, scale)?;
            Some(base.add(&noise)?)
        };
        let res = solve_from(prob, x0, tol, max_iter, mu_factors[r % mu_factors.len()])?;
        best = Some(match best {
            Some(b) if b.objective <= res.objective => b,
            _ => res,
        });
    }
    Ok(best.expect("restarts >= 1"))
}

fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Result<DenseMatrix> {
    use rand_distr::{Distribution, StandardNormal};
    let data = (0..rows * cols)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g * scale
        })
        .collect();
    DenseMatrix::from_computed(rows, cols, data)
}

/// Applies `S` to `A` and `B` and solves the reduced problem.
///
/// The returned objective is evaluated on the *reduced* data; callers
/// re-evaluate on the full data for verification.
pub fn solve_on_coreset(
    prob: &RegressionProblem,
    s: &SamplingMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    if s.nnz() == 0 {
        return Err(Error::EmptyCoreset);
    }
    let a = sampler::apply(s, &prob.a)?;
    let b = sampler::apply(s, &prob.b)?;
    let mut reduced = RegressionProblem::new(a, b, prob.g.clone(), prob.p)?;
    if let Some(w) = &prob.row_weights {
        let kept: Vec<f64> = s.kept().iter().map(|&(i, _)| w.get(i)).collect();
        reduced = reduced.with_row_weights(WeightVector::new(kept)?)?;
    }
    solve(&reduced, tol, max_iter)
}
