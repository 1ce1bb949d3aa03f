//! Gaussian embedding of the Euclidean norm into `ℓp`.
//!
//! An i.i.d. Gaussian `G ∈ R^{n×k}` with `n ≳ max(ε⁻²k, ε⁻¹k^{p/2})`
//! satisfies `‖Gx‖_p^p = (1±ε)·n·E|g|^p·‖x‖₂^p` for every `x`, so
//! `x ↦ scale · n^{-1/p} · Gx` with `scale = (E|N(0,1)|^p)^{-1/p}` carries
//! `‖x‖₂` to `‖·‖_p` up to `1±ε`. Applied to the rows of a matrix this turns
//! `(p,2)`-norm objectives into entrywise `ℓp` ones.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::{DenseMatrix, WeightVector};
use rand_distr::{Distribution, StandardNormal};

/// Default constant in `n_embed = c·max(ε⁻²k, ε⁻¹k^{p/2})`.
pub const DEFAULT_EMBED_CONST: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct DvoretzkyEmbedding {
    g: DenseMatrix, // n_embed × k
    p: f64,
    /// `(E|N(0,1)|^p)^{-1/p}`; the full map is `scale · n^{-1/p} · Gx`.
    scale: f64,
    eps_target: f64,
    seed: u64,
}

/// `E|N(0,1)|^p = 2^{p/2} Γ((p+1)/2) / √π`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    let ln = (p / 2.0) * 2f64.ln() + statrs::function::gamma::ln_gamma((p + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln();
    ln.exp()
}

/// Rows needed for target distortion `eps` at dimension `k`.
pub fn embedding_rows(k: usize, p: f64, eps: f64, c: f64) -> usize {
    let kf = k as f64;
    let need = (kf / (eps * eps)).max(kf.powf(p / 2.0) / eps);
    (c * need).ceil() as usize
}

/// Builds the embedding. Requires `0 < eps < 1/p`.
pub fn build_embedding(k: usize, p: f64, eps: f64, seed: u64) -> Result<DvoretzkyEmbedding> {
    build_embedding_with_const(k, p, eps, seed, DEFAULT_EMBED_CONST)
}

pub fn build_embedding_with_const(
    k: usize,
    p: f64,
    eps: f64,
    seed: u64,
    c: f64,
) -> Result<DvoretzkyEmbedding> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if !(eps > 0.0 && eps < 1.0 / p) {
        return Err(Error::invalid(format!(
            "embedding requires 0 < eps < 1/p, got eps={eps}, p={p}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("embedding dimension k must be >= 1"));
    }
    let n = embedding_rows(k, p, eps, c);
    let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
        let mut rng = rng::stream_rng(seed, rng::tag::EMBEDDING, i as u64);
        (0..k).map(|_| StandardNormal.sample(&mut rng)).collect()
    });
    let g = DenseMatrix::from_computed(n, k, rows.concat())?;
    let scale = gaussian_abs_moment(p).powf(-1.0 / p);
    Ok(DvoretzkyEmbedding {
        g,
        p,
        scale,
        eps_target: eps,
        seed,
    })
}

/// Self-testing constructor: verifies empirical distortion on sampled unit
/// directions plus the canonical basis, doubling `n_embed` until the target
/// `2·eps` distortion holds (or the growth budget runs out).
pub fn build_embedding_verified(
    k: usize,
    p: f64,
    eps: f64,
    seed: u64,
    c0: f64,
) -> Result<DvoretzkyEmbedding> {
    let mut c = c0;
    for _ in 0..8 {
        let e = build_embedding_with_const(k, p, eps, seed, c)?;
        if e.empirical_distortion(512, seed ^ 0xD15)? <= 2.0 * eps {
            return Ok(e);
        }
        c *= 2.0;
    }
    build_embedding_with_const(k, p, eps, seed, c)
}

impl DvoretzkyEmbedding {
    pub fn n_embed(&self) -> usize {
        self.g.rows()
    }

    pub fn k(&self) -> usize {
        self.g.cols()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eps_target(&self) -> f64 {
        self.eps_target
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The combined multiplier `scale · n^{-1/p}` applied to `Gx`.
    pub fn normalizer(&self) -> f64 {
        self.scale * (self.n_embed() as f64).powf(-1.0 / self.p)
    }

    /// `embed(x) = scale · n^{-1/p} · Gx`, so `‖embed(x)‖_p ≈ ‖x‖₂`.
    pub fn embed_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.k() {
            return Err(Error::shape("embed_vec", self.k(), x.len()));
        }
        let c = self.normalizer();
        Ok(par::map_indexed(self.g.rows(), |i| {
            let row = self.g.row(i);
            let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            c * dot
        }))
    }

    /// Embeds every row: returns `c · M Gᵀ`, so `‖result‖_{p,p} ≈ ‖M‖_{p,2}`.
    pub fn embed_rows(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.cols() != self.k() {
            return Err(Error::shape("embed_rows", self.k(), m.cols()));
        }
        m.matmul_transpose(&self.g)?.scale(self.normalizer())
    }

    /// The embedding as an explicit `k × n_embed` matrix `c·Gᵀ`, usable as
    /// the `G` factor of an embedded regression problem.
    pub fn as_g_factor(&self) -> Result<DenseMatrix> {
        self.g.transpose().scale(self.normalizer())
    }

    /// `max |‖embed(x)‖_p − 1|` over `samples` random unit vectors plus the
    /// canonical basis.
    pub fn empirical_distortion(&self, samples: usize, seed: u64) -> Result<f64> {
        let k = self.k();
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(samples + k);
        for i in 0..k {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            dirs.push(e);
        }
        for s in 0..samples {
            let mut rng = rng::stream_rng(seed, rng::tag::EMBEDDING ^ 0xFF, s as u64);
            let mut v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            dirs.push(v);
        }
        let p = self.p;
        let c = self.normalizer();
        let g = &self.g;
        let errs = par::map_slice(&dirs, |dir| {
            let mut acc = 0.0;
            for i in 0..g.rows() {
                let row = g.row(i);
                let dot: f64 = row.iter().zip(dir).map(|(a, b)| a * b).sum();
                acc += crate::tensor::powp(c * dot, p);
            }
            (acc.powf(1.0 / p) - 1.0).abs()
        });
        Ok(errs.into_iter().fold(0.0, f64::max))
    }
}

/// Weighted variant used when the embedded rows carry sampling scales.
pub fn embed_rows_weighted(
    e: &DvoretzkyEmbedding,
    m: &DenseMatrix,
    w: &WeightVector,
) -> Result<DenseMatrix> {
    if w.len() != m.rows() {
        return Err(Error::shape("embed_rows_weighted", m.rows(), w.len()));
    }
    let scaled: Vec<(usize, f64)> = (0..m.rows()).map(|i| (i, w.get(i))).collect();
    e.embed_rows(&m.gather_scaled_rows(&scaled)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{entrywise_lp_norm, row_lp2_norm};

    #[test]
    fn moment_formula_known_values() {
        assert!((gaussian_abs_moment(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-12);
        // E|g|^4 = 3.
        assert!((gaussian_abs_moment(4.0) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn eps_range_enforced() {
        assert!(build_embedding(4, 3.0, 0.4, 1).is_err()); // eps >= 1/p
        assert!(build_embedding(4, 3.0, 0.1, 1).is_ok());
    }

    #[test]
    fn zero_maps_to_zero_and_linearity() {
        let e = build_embedding_with_const(3, 1.5, 0.2, 5, 4.0).unwrap();
        let z = e.embed_vec(&[0.0, 0.0, 0.0]).unwrap();
        assert!(z.iter().all(|&x| x == 0.0));

        let m1 = DenseMatrix::from_fn(4, 3, |i, j| (i + j) as f64 * 0.3).unwrap();
        let m2 = DenseMatrix::from_fn(4, 3, |i, j| (i as f64 - j as f64) * 0.7).unwrap();
        let lhs = e.embed_rows(&m1.add(&m2).unwrap()).unwrap();
        let rhs = e.embed_rows(&m1).unwrap().add(&e.embed_rows(&m2).unwrap()).unwrap();
        for (a, b) in lhs.data().iter().zip(rhs.data()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn p2_behaves_like_jl() {
        let e = build_embedding_with_const(4, 2.0, 0.3, 9, 25.0).unwrap();
        let x = [0.5, -1.0, 2.0, 0.25];
        let img = e.embed_vec(&x).unwrap();
        let norm2 = img.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expect = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm2 / expect - 1.0).abs() < 0.15, "ratio {}", norm2 / expect);
    }

    #[test]
    fn unit_vector_has_unit_p_norm_within_distortion() {
        // Monte-Carlo oracle for p=1 with E|g| = √(2/π) folded into the scale.
        let eps = 0.1;
        let e = build_embedding_with_const(4, 1.0, eps, 3, 10.0).unwrap();
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let img = e.embed_vec(&e1).unwrap();
        let m = DenseMatrix::new(img.len(), 1, img).unwrap();
        let n1 = entrywise_lp_norm(&m, 1.0).unwrap();
        assert!((n1 - 1.0).abs() <= 2.0 * eps, "‖embed(e1)‖₁ = {n1}");
    }

    #[test]
    fn embed_rows_tracks_p2_norm() {
        let eps = 0.15;
        let e = build_embedding_with_const(3, 1.5, eps, 11, 10.0).unwrap();
        let mut rng = crate::rng::stream_rng(12, 0xAB, 0);
        for trial in 0..20 {
            let m = DenseMatrix::from_fn(15, 3, |_, _| StandardNormal.sample(&mut rng)).unwrap();
            let target = row_lp2_norm(&m, 1.5).unwrap();
            let img = e.embed_rows(&m).unwrap();
            let got = entrywise_lp_norm(&img, 1.5).unwrap();
            let ratio = got / target;
            assert!(
                (ratio - 1.0).abs() <= 2.0 * eps,
                "trial {trial}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn verified_build_meets_distortion_target() {
        let eps = 0.2;
        let e = build_embedding_verified(3, 1.5, eps, 21, 2.0).unwrap();
        let d = e.empirical_distortion(512, 99).unwrap();
        assert!(d <= 2.0 * eps, "distortion {d} with n={}", e.n_embed());
    }
}
