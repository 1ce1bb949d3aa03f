//! Seeded instance builders shared by the acceptance suite, benches, and the
//! calibration example. Not part of the public API surface proper.

use crate::rng;
use crate::tensor::DenseMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard Gaussian matrix keyed by `(seed, stream)`.
pub fn gaussian(seed: u64, stream: u64, rows: usize, cols: usize) -> DenseMatrix {
    let mut r = rng::stream_rng(seed, stream, 0x6A55);
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut r)).expect("finite")
}

/// Regression instance with planted solution and a few heavy residual rows:
/// `B = A X₀ + E` where `E` is unit Gaussian noise except that a 2% fraction
/// of rows is rescaled to Euclidean norm `heavy_mag`. The design `A` depends
/// only on `(seed, n, d)`, so instances with different `m` share it.
pub fn regression_instance(
    seed: u64,
    n: usize,
    d: usize,
    m: usize,
    heavy_mag: f64,
) -> (DenseMatrix, DenseMatrix) {
    let a = gaussian(seed, 0xA0, n, d);
    let x0 = gaussian(seed, 0xB0 ^ m as u64, d, m);
    let mut rng = rng::stream_rng(seed, 0xE0 ^ m as u64, 1);
    let heavy_count = (0.02 * n as f64).ceil() as usize;
    let mut noise = Vec::with_capacity(n * m);
    for _ in 0..n {
        for _ in 0..m {
            let g: f64 = StandardNormal.sample(&mut rng);
            noise.push(g);
        }
    }
    // Rescale a seeded 2% of rows to the heavy magnitude.
    for k in 0..heavy_count {
        let i = rng.gen_range(0..n);
        let row = &mut noise[i * m..(i + 1) * m];
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let f = heavy_mag / norm;
            row.iter_mut().for_each(|x| *x *= f);
        }
        let _ = k;
    }
    let e = DenseMatrix::new(n, m, noise).expect("finite noise");
    let b = a.matmul(&x0).expect("shapes").add(&e).expect("shapes");
    (a, b)
}

/// Gaussian mixture points for power-means runs: `components` well-separated
/// blobs with unit within-blob noise.
pub fn mixture_points(seed: u64, n: usize, dim: usize, components: usize) -> DenseMatrix {
    crate::synth::generate_synthetic(
        &crate::synth::SyntheticSpec::GaussianMixture {
            n,
            dim,
            components,
            spread: 4.0,
            sigma: 1.0,
        },
        seed,
    )
    .expect("valid mixture params")
}

/// Signed violation of the `ℓp` norm lower bounds relating `‖y'‖` to `‖y‖`,
/// the dual pairing `⟨y^{∘(p−1)}, y−y'⟩`, and `‖y−y'‖`; values `≤ 0` mean the
/// bound holds. For `1 < p < 2` the squared-norm form applies, for `p ≥ 2`
/// the `p`-th power form.
pub fn bregman_violation(y: &[f64], yp: &[f64], p: f64) -> f64 {
    use crate::tensor::{powp, signed_powp1};
    let norm = |v: &[f64]| v.iter().map(|&x| powp(x, p)).sum::<f64>().powf(1.0 / p);
    let norm_pow = |v: &[f64]| v.iter().map(|&x| powp(x, p)).sum::<f64>();
    let inner: f64 = y
        .iter()
        .zip(yp)
        .map(|(&a, &b)| signed_powp1(a, p) * (a - b))
        .sum();
    let diff: Vec<f64> = y.iter().zip(yp).map(|(&a, &b)| a - b).collect();
    if p < 2.0 {
        let lhs = norm(yp).powi(2);
        let rhs =
            norm(y).powi(2) - 2.0 * norm(y).powf(2.0 - p) * inner + (p - 1.0) / 2.0 * norm(&diff).powi(2);
        (rhs - lhs) / (1.0 + lhs.abs().max(rhs.abs()))
    } else {
        let lhs = norm_pow(yp);
        let rhs = norm_pow(y) - p * inner + (p - 1.0) / (p * 2f64.powf(p)) * norm_pow(&diff);
        (rhs - lhs) / (1.0 + lhs.abs().max(rhs.abs()))
    }
}
