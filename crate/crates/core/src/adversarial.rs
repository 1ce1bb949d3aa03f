//! Hard-instance generators used as stress fixtures.
//!
//! Two families: the grouped sign-vector instances that defeat
//! strong/weak coresets below the sample-complexity threshold (built from a
//! low-correlation code set, with the adversarial query aligned to the rows
//! the coreset kept), and the `[R·1, I]` block construction whose small row
//! subsets cannot span a near-optimal rank-1 subspace.

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{powp, DenseMatrix};

/// Sign vectors with bounded pairwise correlation.
#[derive(Debug, Clone)]
pub struct CodeSet {
    pub d: usize,
    /// `s×d`, entries in `{−1, +1}`.
    pub vectors: DenseMatrix,
    /// Measured `max_{s≠t} |⟨s,t⟩| / √d` (0 for a single vector).
    pub max_correlation: f64,
}

impl CodeSet {
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    /// Exhaustive pairwise re-verification of the correlation bound.
    pub fn verify(&self, c_corr: f64) -> bool {
        let s = self.vectors.rows();
        let d = self.d as f64;
        for i in 0..s {
            for j in (i + 1)..s {
                let dot: f64 = self
                    .vectors
                    .row(i)
                    .iter()
                    .zip(self.vectors.row(j))
                    .map(|(a, b)| a * b)
                    .sum();
                if dot.abs() > c_corr * d.sqrt() + 1e-9 {
                    return false;
                }
            }
        }
        true
    }
}

/// Sylvester–Hadamard matrix of size `n` (a power of two), entries ±1.
fn hadamard(n: usize) -> DenseMatrix {
    debug_assert!(n.is_power_of_two());
    let mut data = vec![1.0f64; n * n];
    let mut size = 1;
    while size < n {
        for i in 0..size {
            for j in 0..size {
                let v = data[i * n + j];
                data[i * n + (j + size)] = v;
                data[(i + size) * n + j] = v;
                data[(i + size) * n + (j + size)] = -v;
            }
        }
        size *= 2;
    }
    DenseMatrix::from_computed(n, n, data).expect("±1 entries")
}

fn measured_correlation(vectors: &[Vec<f64>], d: usize) -> f64 {
    let mut max_dot = 0.0f64;
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            max_dot = max_dot.max(dot.abs());
        }
    }
    max_dot / (d as f64).sqrt()
}

/// Builds a code set of up to `target_size` sign vectors in dimension `d`
/// with pairwise `|⟨s,t⟩| ≤ c_corr·√d`.
///
/// Hadamard rows are used when `d` or `d+1` is a power of two (orthogonal,
/// or constant inner product −1 after dropping the all-ones column); the
/// remainder is filled by randomized greedy search. The returned set may be
/// smaller than requested; its size and measured correlation are reported in
/// the fields.
pub fn generate_code_set(
    d: usize,
    target_size: usize,
    c_corr: f64,
    seed: u64,
    max_tries: usize,
) -> Result<CodeSet> {
    if d == 0 {
        return Err(Error::invalid("code set dimension must be >= 1"));
    }
    let bound = c_corr * (d as f64).sqrt();
    let mut vectors: Vec<Vec<f64>> = Vec::new();

    if d.is_power_of_two() {
        let h = hadamard(d);
        for i in 0..d.min(target_size) {
            vectors.push(h.row(i).to_vec());
        }
        // Orthogonal rows: admissible for any c_corr ≥ 0.
        if c_corr < 0.0 {
            vectors.clear();
        }
    } else if (d + 1).is_power_of_two() {
        // Drop the all-ones first column; distinct rows then have inner
        // product exactly −1 over the remaining d coordinates.
        if 1.0 <= bound {
            let h = hadamard(d + 1);
            for i in 0..(d + 1).min(target_size) {
                vectors.push(h.row(i)[1..].to_vec());
            }
        }
    }

    let mut tries = 0;
    while vectors.len() < target_size && tries < max_tries {
        tries += 1;
        let bits = rng::mix(seed, rng::tag::CODE_SET, tries as u64);
        let mut rng_row = rng::stream_rng(seed, rng::tag::CODE_SET, bits);
        let cand: Vec<f64> = (0..d)
            .map(|_| {
                use rand::Rng;
                if rng_row.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let ok = vectors.iter().all(|v| {
            let dot: f64 = v.iter().zip(&cand).map(|(a, b)| a * b).sum();
            dot.abs() <= bound && dot < d as f64 - 0.5 // exact duplicates never qualify
        });
        if ok {
            vectors.push(cand);
        }
    }

    let max_correlation = measured_correlation(&vectors, d);
    Ok(CodeSet {
        d,
        vectors: DenseMatrix::from_rows(&vectors)?,
        max_correlation,
    })
}

/// The grouped hard instance: `A` holds `multiplicity` copies of each code
/// vector, `B = d·I_m`, and the adversarial query aligns `ε`-scaled copies
/// of the rows on the columns a coreset kept.
#[derive(Debug, Clone)]
pub struct StrongLbInstance {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub eps: f64,
    pub p: f64,
    pub code: CodeSet,
    /// Copies of each code vector (after the desk-scale cap).
    pub multiplicity: usize,
    /// Group number of each row.
    pub group_of_row: Vec<usize>,
    /// True when `ε^{-p}` (or the requested multiplicity) hit the cap.
    pub multiplicity_capped: bool,
}

/// Desk-scale caps: instances exist to break coresets in tests, not to
/// realize asymptotics.
pub const MAX_GROUP_MULTIPLICITY: usize = 200;
pub const MAX_INSTANCE_ROWS: usize = 5000;

impl StrongLbInstance {
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// The query `Xe_j = ε·(e_jᵀA)ᵀ` for `j ∈ kept`, zero elsewhere.
    pub fn adversarial_query(&self, kept: &[usize]) -> Result<DenseMatrix> {
        let (m, d) = self.a.shape();
        let mut data = vec![0.0; d * m];
        for &j in kept {
            if j >= m {
                return Err(Error::invalid(format!("kept index {j} out of range")));
            }
            for r in 0..d {
                data[r * m + j] = self.eps * self.a.get(j, r);
            }
        }
        DenseMatrix::from_computed(d, m, data)
    }

    /// Exact per-row cost of the adversarial query, from the group identity:
    /// row `i ∈ T` costs
    /// `(1−ε)^p d^p + (|T_{g(i)}|−1)·ε^p d^p + Σ_{j∈T, g(j)≠g(i)} ε^p|⟨a_{g(i)},a_{g(j)}⟩|^p`,
    /// and a row outside `T` costs the same with `d^p` in place of
    /// `(1−ε)^p d^p` and `|T_{g(i)}|` aligned copies.
    pub fn row_cost_identity(&self, i: usize, kept: &[usize]) -> f64 {
        let d = self.a.cols() as f64;
        let p = self.p;
        let gi = self.group_of_row[i];
        let in_t = kept.contains(&i);
        let same_group = kept.iter().filter(|&&j| self.group_of_row[j] == gi).count();
        let mut cost = if in_t {
            powp((1.0 - self.eps) * d, p) + (same_group as f64 - 1.0) * powp(self.eps * d, p)
        } else {
            powp(d, p) + same_group as f64 * powp(self.eps * d, p)
        };
        for &j in kept {
            let gj = self.group_of_row[j];
            if gj != gi {
                let dot: f64 = self
                    .code
                    .vectors
                    .row(gi)
                    .iter()
                    .zip(self.code.vectors.row(gj))
                    .map(|(a, b)| a * b)
                    .sum();
                cost += powp(self.eps * dot, p);
            }
        }
        cost
    }
}

/// Builds the grouped instance with `s ≈ d^{p/2}` groups of `ε^{-p}` copies,
/// capped at desk scale. `multiplicity_override` substitutes the group size
/// (the weak-coreset variant uses `ε^{1-p}/(2C^p)` copies).
pub fn strong_lb_instance(d: usize, eps: f64, p: f64, seed: u64) -> Result<StrongLbInstance> {
    strong_lb_instance_with_multiplicity(d, eps, p, seed, None)
}

pub fn strong_lb_instance_with_multiplicity(
    d: usize,
    eps: f64,
    p: f64,
    seed: u64,
    multiplicity_override: Option<f64>,
) -> Result<StrongLbInstance> {
    if d == 0 {
        return Err(Error::invalid("d must be >= 1"));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    let requested_mult = multiplicity_override.unwrap_or_else(|| powp(eps, -p));
    if requested_mult < 1.0 {
        return Err(Error::invalid(format!(
            "group multiplicity {requested_mult:.3} below 1; increase eps^{{-p}} or the override"
        )));
    }
    let mult = (requested_mult.round() as usize).min(MAX_GROUP_MULTIPLICITY);
    let capped = (requested_mult.round() as usize) > MAX_GROUP_MULTIPLICITY;

    let s_target = (d as f64).powf(p / 2.0).round() as usize;
    let s_max = MAX_INSTANCE_ROWS / mult;
    if s_max == 0 {
        return Err(Error::invalid(format!(
            "multiplicity {mult} exceeds the row cap {MAX_INSTANCE_ROWS}"
        )));
    }
    let s_target = s_target.clamp(2, s_max);
    let code = generate_code_set(d, s_target, 3.0, seed, 50_000)?;
    if code.len() < 2 {
        return Err(Error::invalid(format!(
            "could not build a code set of size >= 2 in dimension {d} (cap {MAX_INSTANCE_ROWS} rows)"
        )));
    }

    let s = code.len();
    let m = s * mult;
    let mut a_rows = Vec::with_capacity(m);
    let mut group_of_row = Vec::with_capacity(m);
    for g in 0..s {
        for _ in 0..mult {
            a_rows.push(code.vectors.row(g).to_vec());
            group_of_row.push(g);
        }
    }
    let a = DenseMatrix::from_rows(&a_rows)?;
    let b = DenseMatrix::identity(m).scale(d as f64)?;
    Ok(StrongLbInstance {
        a,
        b,
        eps,
        p,
        code,
        multiplicity: mult,
        group_of_row,
        multiplicity_capped: capped,
    })
}

/// The `k`-block diagonal matrix with `[R·1_n, I_n]` blocks: `kn × k(n+1)`.
///
/// Any rank-`k` subspace spanned by too few rows of this matrix pays more
/// than `(1+ε)` times the optimum.
pub fn spanning_lb_instance(n: usize, k: usize, r: f64) -> Result<DenseMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must be >= 1"));
    }
    if !(r >= 2.0) {
        return Err(Error::invalid(format!("R must be >= 2, got {r}")));
    }
    let rows = k * n;
    let cols = k * (n + 1);
    let mut data = vec![0.0; rows * cols];
    for blk in 0..k {
        for i in 0..n {
            let row = blk * n + i;
            let col0 = blk * (n + 1);
            data[row * cols + col0] = r;
            data[row * cols + col0 + 1 + i] = 1.0;
        }
    }
    DenseMatrix::from_computed(rows, cols, data)
}
