//! The random `ℓp` sampling matrix.
//!
//! Row `i` is kept independently with probability `q_i` and rescaled by
//! `q_i^{-1/p}`; dropped rows vanish. Keep/drop decisions are a pure function
//! of `(seed, row index)` via the counter-based generator, so draws are
//! reproducible regardless of evaluation order or thread count.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::{DenseMatrix, WeightVector};

/// Sparse diagonal reweighting: the coreset object.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    n: usize,
    p: f64,
    /// `(row index, scale)` with strictly increasing indices and
    /// `scale = q_i^{-1/p} ≥ 1`.
    kept: Vec<(usize, f64)>,
    seed: u64,
}

impl SamplingMatrix {
    /// Validates invariants on externally assembled parts.
    pub fn from_parts(n: usize, p: f64, kept: Vec<(usize, f64)>, seed: u64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        let mut prev: Option<usize> = None;
        for &(i, s) in &kept {
            if i >= n {
                return Err(Error::invalid(format!("kept index {i} out of range for n={n}")));
            }
            if let Some(pv) = prev {
                if i <= pv {
                    return Err(Error::invalid("kept indices must be strictly increasing"));
                }
            }
            if !(s.is_finite() && s >= 1.0) {
                return Err(Error::invalid(format!("scale {s} at row {i} must be >= 1")));
            }
            prev = Some(i);
        }
        Ok(SamplingMatrix { n, p, kept, seed })
    }

    /// Exact-size uniform coreset: `size` rows chosen without replacement,
    /// each with scale `(n/size)^{1/p}` (the `q_i = size/n` reweighting).
    pub fn uniform_fixed(n: usize, size: usize, p: f64, seed: u64) -> Result<Self> {
        if size == 0 || size > n {
            return Err(Error::invalid(format!("uniform_fixed needs 0 < size <= n, got {size}/{n}")));
        }
        // Seeded Fisher-Yates over indices; keep the first `size`, re-sorted.
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..size {
            let j = i + (rng::mix(seed, rng::tag::SAMPLER, i as u64) % (n - i) as u64) as usize;
            idx.swap(i, j);
        }
        let mut chosen = idx[..size].to_vec();
        chosen.sort_unstable();
        let scale = (n as f64 / size as f64).powf(1.0 / p);
        let kept = chosen.into_iter().map(|i| (i, scale)).collect();
        SamplingMatrix::from_parts(n, p, kept, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nnz(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[(usize, f64)] {
        &self.kept
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.kept.iter().map(|&(i, _)| i).collect()
    }

    /// `‖S y‖_p^p = Σ_kept (scale·|y_i|)^p`; scaleᵖ = 1/q_i.
    pub fn apply_norm_pow(&self, y: &[f64], p: f64) -> Result<f64> {
        if y.len() != self.n {
            return Err(Error::shape("SamplingMatrix::apply_norm_pow", self.n, y.len()));
        }
        Ok(par::sum_indexed(self.kept.len(), |k| {
            let (i, s) = self.kept[k];
            crate::tensor::powp(s * y[i], p)
        }))
    }
}

/// Draws the `ℓp` sampling matrix for probabilities `q`.
///
/// Each row is kept independently with probability `q_i`; rows with
/// `q_i = 1` are always kept with scale exactly 1.
pub fn draw_sampling_matrix(q: &WeightVector, p: f64, seed: u64) -> Result<SamplingMatrix> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    for (i, &qi) in q.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&qi) {
            return Err(Error::invalid(format!("q[{i}] = {qi} outside [0, 1]")));
        }
    }
    let n = q.len();
    let decisions = par::map_indexed(n, |i| {
        let qi = q.get(i);
        if qi <= 0.0 {
            return None;
        }
        // u < 1 always, so q_i = 1 rows are always kept.
        let u = rng::uniform_u01(seed, rng::tag::SAMPLER, i as u64);
        if u < qi {
            let scale = if qi >= 1.0 { 1.0 } else { qi.powf(-1.0 / p) };
            Some((i, scale))
        } else {
            None
        }
    });
    let kept: Vec<(usize, f64)> = decisions.into_iter().flatten().collect();
    Ok(SamplingMatrix { n, p, kept, seed })
}

/// Applies `S` to a matrix: the kept rows, each multiplied by its scale.
pub fn apply(s: &SamplingMatrix, m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() != s.n {
        return Err(Error::shape("sampler::apply", s.n, m.rows()));
    }
    m.gather_scaled_rows(&s.kept)
}

/// Elementwise `min(1, raw_i)`.
pub fn clip_probabilities(raw: &WeightVector) -> WeightVector {
    WeightVector::new(raw.values().iter().map(|&x| x.min(1.0)).collect())
        .expect("clipping preserves validity")
}
