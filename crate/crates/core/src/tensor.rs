//! Dense row-major matrices and the norms used throughout the crate.
//!
//! Matrices are immutable after construction and validated to be finite, so
//! downstream numerical code never has to re-check for NaN/Inf. Norms
//! accumulate `p`-th powers with compensated summation in a fixed chunk
//! order; results do not depend on the thread count.

use crate::error::{Error, Result};
use crate::par;

/// Row-major dense matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix, checking `data.len() == rows * cols` and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("DenseMatrix::new", rows * cols, data.len()));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("DenseMatrix::new"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Internal constructor for values produced by our own arithmetic.
    /// Still rejects non-finite results (overflow upstream is a bug we want
    /// surfaced, not propagated).
    pub(crate) fn from_computed(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::shape("DenseMatrix::from_rows", c, format!("{} in row {i}", row.len())));
            }
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `self * other`, row-parallel.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape("matmul", self.cols, other.rows));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let out_rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
            let mut acc = vec![0.0; m];
            let a_row = self.row(i);
            for (l, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[l * m..(l + 1) * m];
                for j in 0..m {
                    acc[j] += a * b_row[j];
                }
            }
            acc
        });
        let _ = k;
        DenseMatrix::from_computed(n, m, out_rows.concat())
    }

    /// `self * other^T`, row-parallel. Handy for `M · Gᵀ` products.
    pub fn matmul_transpose(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::shape("matmul_transpose", self.cols, other.cols));
        }
        let (n, m) = (self.rows, other.rows);
        let out_rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
            let a_row = self.row(i);
            (0..m)
                .map(|j| {
                    let b_row = other.row(j);
                    a_row.iter().zip(b_row).map(|(x, y)| x * y).sum()
                })
                .collect()
        });
        DenseMatrix::from_computed(n, m, out_rows.concat())
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "sub",
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_computed(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "add",
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix::from_computed(self.rows, self.cols, data)
    }

    pub fn scale(&self, c: f64) -> Result<DenseMatrix> {
        let data = self.data.iter().map(|a| a * c).collect();
        DenseMatrix::from_computed(self.rows, self.cols, data)
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> f64 {
        par::sum_indexed(self.data.len(), |i| self.data[i] * self.data[i]).sqrt()
    }

    /// Squared Euclidean norm of row `i`.
    pub fn row_sq_norm(&self, i: usize) -> f64 {
        self.row(i).iter().map(|x| x * x).sum()
    }

    /// Keeps the given rows (in order), each multiplied by a scalar.
    pub fn gather_scaled_rows(&self, picks: &[(usize, f64)]) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(picks.len() * self.cols);
        for &(i, s) in picks {
            if i >= self.rows {
                return Err(Error::shape("gather_scaled_rows", format!("< {}", self.rows), i));
            }
            data.extend(self.row(i).iter().map(|x| x * s));
        }
        DenseMatrix::from_computed(picks.len(), self.cols, data)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        DenseMatrix::from_computed(m.nrows(), m.ncols(), data)
    }
}

/// Per-row nonnegative weights: Lewis weights, residual fractions, sampling
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !values.iter().all(|x| x.is_finite() && *x >= 0.0) {
            return Err(Error::NonFinite("WeightVector::new (negative or non-finite)"));
        }
        Ok(WeightVector { values })
    }

    pub fn ones(n: usize) -> Self {
        WeightVector { values: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn sum(&self) -> f64 {
        par::sum_indexed(self.values.len(), |i| self.values[i])
    }
}

/// `|x|^p`.
///
/// Zero short-circuits, integer and half-integer orders use exact sqrt and
/// multiply chains, and everything else goes through `exp(p·ln|x|)` to avoid
/// `powf` domain surprises for fractional `p`.
pub fn powp(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 4.0 {
        let s = a * a;
        s * s
    } else if p == 1.5 {
        a * a.sqrt()
    } else if p == 0.5 {
        a.sqrt()
    } else if p == 2.5 {
        a * a * a.sqrt()
    } else {
        (p * a.ln()).exp()
    }
}

/// `sign(x)·|x|^{p-1}`, the entrywise derivative kernel of `|x|^p / p`.
pub fn signed_powp1(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * powp(x, p - 1.0)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

fn finite_or_domain(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(format!("{what} produced a non-finite value")))
    }
}

/// `‖M‖_{p,p}^p = Σ_{i,j} |M(i,j)|^p`.
pub fn entrywise_lp_norm_pow(m: &DenseMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    let data = m.data();
    let s = par::sum_indexed(data.len(), |i| powp(data[i], p));
    finite_or_domain(s, "entrywise_lp_norm")
}

/// `‖M‖_{p,p} = (Σ_{i,j} |M(i,j)|^p)^{1/p}`.
pub fn entrywise_lp_norm(m: &DenseMatrix, p: f64) -> Result<f64> {
    Ok(entrywise_lp_norm_pow(m, p)?.powf(1.0 / p))
}

/// `‖M‖_{p,2}^p = Σ_i ‖row_i(M)‖_2^p`.
pub fn row_lp2_norm_pow(m: &DenseMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    let s = par::sum_indexed(m.rows(), |i| powp(m.row_sq_norm(i).sqrt(), p));
    finite_or_domain(s, "row_lp2_norm")
}

/// `‖M‖_{p,2}`: the `ℓp` norm of the Euclidean norms of the rows.
pub fn row_lp2_norm(m: &DenseMatrix, p: f64) -> Result<f64> {
    Ok(row_lp2_norm_pow(m, p)?.powf(1.0 / p))
}

/// Weighted norm `‖y‖_{w,p} = (Σ_i w_i |y(i)|^p)^{1/p}`.
pub fn weighted_lp_norm(y: &[f64], w: &WeightVector, p: f64) -> Result<f64> {
    check_p(p)?;
    if y.len() != w.len() {
        return Err(Error::shape("weighted_lp_norm", w.len(), y.len()));
    }
    let s = par::sum_indexed(y.len(), |i| w.get(i) * powp(y[i], p));
    Ok(finite_or_domain(s, "weighted_lp_norm")?.powf(1.0 / p))
}
