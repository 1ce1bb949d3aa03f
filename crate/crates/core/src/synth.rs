//! Synthetic dataset generators. Deterministic given the seed; rows are
//! generated from per-row streams so output is independent of thread count.

use crate::error::{Error, Result};
use crate::par;
use crate::rng;
use crate::tensor::DenseMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Generator parameters, one variant per dataset kind.
#[derive(Debug, Clone)]
pub enum SyntheticSpec {
    /// `components` Gaussian blobs with centers of norm ~`spread` and
    /// per-coordinate noise `sigma`.
    GaussianMixture {
        n: usize,
        dim: usize,
        components: usize,
        spread: f64,
        sigma: f64,
    },
    /// `U·V + noise·N(0,1)` with inner dimension `rank`; noise 0 gives an
    /// exactly rank-`rank` matrix.
    LowRankPlusNoise {
        n: usize,
        dim: usize,
        rank: usize,
        noise: f64,
    },
    /// Mostly small Gaussian rows; exactly `⌊outlier_fraction·n⌋` rows are
    /// rescaled to Euclidean norm `magnitude`.
    HeavyTailResidual {
        n: usize,
        dim: usize,
        outlier_fraction: f64,
        magnitude: f64,
        base_sigma: f64,
    },
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<DenseMatrix> {
    match *spec {
        SyntheticSpec::GaussianMixture {
            n,
            dim,
            components,
            spread,
            sigma,
        } => {
            if components == 0 || dim == 0 {
                return Err(Error::invalid("mixture needs components >= 1 and dim >= 1"));
            }
            if !(spread.is_finite() && sigma.is_finite() && spread >= 0.0 && sigma >= 0.0) {
                return Err(Error::invalid("spread and sigma must be finite and >= 0"));
            }
            // Component centers.
            let mut crng = rng::stream_rng(seed, rng::tag::SYNTH, u64::MAX);
            let centers: Vec<Vec<f64>> = (0..components)
                .map(|_| {
                    (0..dim)
                        .map(|_| {
                            let g: f64 = StandardNormal.sample(&mut crng);
                            g * spread
                        })
                        .collect()
                })
                .collect();
            let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
                let mut r = rng::stream_rng(seed, rng::tag::SYNTH, i as u64);
                let c = r.gen_range(0..components);
                (0..dim)
                    .map(|j| {
                        let g: f64 = StandardNormal.sample(&mut r);
                        centers[c][j] + sigma * g
                    })
                    .collect()
            });
            DenseMatrix::from_computed(n, dim, rows.concat())
        }
        SyntheticSpec::LowRankPlusNoise { n, dim, rank, noise } => {
            if rank == 0 || rank > dim.min(n) {
                return Err(Error::invalid(format!(
                    "rank must satisfy 1 <= rank <= min(n, dim), got {rank}"
                )));
            }
            if !(noise.is_finite() && noise >= 0.0) {
                return Err(Error::invalid("noise must be finite and >= 0"));
            }
            let mut vrng = rng::stream_rng(seed, rng::tag::SYNTH ^ 0xF0, u64::MAX);
            let v: Vec<Vec<f64>> = (0..rank)
                .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut vrng)).collect())
                .collect();
            let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
                let mut r = rng::stream_rng(seed, rng::tag::SYNTH ^ 0xF0, i as u64);
                let coeffs: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut r)).collect();
                (0..dim)
                    .map(|j| {
                        let mut x = 0.0;
                        for (c, vk) in coeffs.iter().zip(&v) {
                            x += c * vk[j];
                        }
                        if noise > 0.0 {
                            let g: f64 = StandardNormal.sample(&mut r);
                            x += noise * g;
                        }
                        x
                    })
                    .collect()
            });
            DenseMatrix::from_computed(n, dim, rows.concat())
        }
        SyntheticSpec::HeavyTailResidual {
            n,
            dim,
            outlier_fraction,
            magnitude,
            base_sigma,
        } => {
            if !(0.0..=1.0).contains(&outlier_fraction) {
                return Err(Error::invalid("outlier_fraction must lie in [0, 1]"));
            }
            if !(magnitude.is_finite() && base_sigma.is_finite() && magnitude >= 0.0 && base_sigma >= 0.0) {
                return Err(Error::invalid("magnitude and base_sigma must be finite and >= 0"));
            }
            let count = (outlier_fraction * n as f64).floor() as usize;
            // Seeded shuffle decides which rows carry the heavy residual.
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..n.saturating_sub(1) {
                let j = i + (rng::mix(seed, rng::tag::SYNTH ^ 0x7A11, i as u64) % (n - i) as u64) as usize;
                idx.swap(i, j);
            }
            let mut is_outlier = vec![false; n];
            for &i in idx.iter().take(count) {
                is_outlier[i] = true;
            }
            let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
                let mut r = rng::stream_rng(seed, rng::tag::SYNTH ^ 0xBEEF, i as u64);
                let mut row: Vec<f64> = (0..dim)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut r);
                        base_sigma * g
                    })
                    .collect();
                if is_outlier[i] {
                    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        row.iter_mut().for_each(|x| *x *= magnitude / norm);
                    } else {
                        row[0] = magnitude;
                    }
                }
                row
            });
            DenseMatrix::from_computed(n, dim, rows.concat())
        }
    }
}

/// Downloader-free stand-in with the shape of the standard digit corpus:
/// `60000×784`, values in `[0, 1]`, with ~80% exact zeros per row and
/// blob-structured nonzero regions.
pub fn mnist_surrogate(seed: u64) -> DenseMatrix {
    surrogate_with_shape(60_000, 784, seed)
}

/// Smaller variant for tests and quick runs.
pub fn surrogate_with_shape(n: usize, dim: usize, seed: u64) -> DenseMatrix {
    let components = 10usize;
    let mut crng = rng::stream_rng(seed, rng::tag::SYNTH ^ 0x515, u64::MAX);
    // Each class lights up a contiguous band of coordinates.
    let centers: Vec<Vec<f64>> = (0..components)
        .map(|c| {
            (0..dim)
                .map(|j| {
                    let band = (j * components) / dim.max(1);
                    if band == c || crng.gen::<f64>() < 0.05 {
                        0.3 + 0.5 * crng.gen::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
        let mut r = rng::stream_rng(seed, rng::tag::SYNTH ^ 0x515, i as u64);
        let c = r.gen_range(0..components);
        (0..dim)
            .map(|j| {
                if centers[c][j] == 0.0 {
                    0.0
                } else {
                    let g: f64 = StandardNormal.sample(&mut r);
                    (centers[c][j] + 0.15 * g).clamp(0.0, 1.0)
                }
            })
            .collect()
    });
    DenseMatrix::from_computed(n, dim, rows.concat()).expect("clamped values are finite")
}
