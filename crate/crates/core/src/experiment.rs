//! Sample-size sweep for power means: for each feature count `m` and each
//! sample size, estimate the center from a uniform sample, evaluate it on
//! the full data, and record `estimate/OPT − 1`. The protocol matches the
//! single sample-and-solve run the figure tables come from; the full
//! multi-instance pipeline is available via the option flag.

use crate::error::{Error, Result};
use crate::par;
use crate::power_means::{
    power_mean_cost, sampled_center_solve, solve_power_means_with, uniform_sample_center,
    PowerMeansInstance, PowerMeansOptions,
};
use crate::rng;
use crate::tensor::DenseMatrix;

#[derive(Debug, Clone)]
pub struct PowerMeansExperimentConfig {
    pub p: f64,
    /// Feature counts; each picks a random column subset of the dataset.
    pub m_values: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Seed for the per-`m` feature subsets (fixed across seeds so OPT is
    /// solved once per `m`).
    pub feature_seed: u64,
    /// Run the full multi-instance pipeline instead of one sample-and-solve.
    pub use_pipeline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub m: usize,
    pub sample_size: usize,
    pub relative_error: f64,
    pub seed: u64,
}

/// CSV with a fixed header, rows in deterministic `(m, sample_size, seed)`
/// order.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("m,sample_size,relative_error,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:?},{}\n",
            r.m, r.sample_size, r.relative_error, r.seed
        ));
    }
    out
}

fn column_subset(data: &DenseMatrix, m: usize, seed: u64) -> Result<DenseMatrix> {
    let d = data.cols();
    if m == 0 || m > d {
        return Err(Error::invalid(format!("feature count {m} outside 1..={d}")));
    }
    // Seeded sample of m distinct columns.
    let mut cols: Vec<usize> = (0..d).collect();
    for i in 0..m {
        let j = i + (rng::mix(seed, rng::tag::EXPERIMENT, i as u64) % (d - i) as u64) as usize;
        cols.swap(i, j);
    }
    let chosen = &cols[..m];
    let mut out = Vec::with_capacity(data.rows() * m);
    for i in 0..data.rows() {
        let row = data.row(i);
        out.extend(chosen.iter().map(|&c| row[c]));
    }
    DenseMatrix::from_computed(data.rows(), m, out)
}

/// Runs the sweep and returns one row per `(m, sample_size, seed)` cell.
pub fn run_power_means_experiment(
    cfg: &PowerMeansExperimentConfig,
    data: &DenseMatrix,
) -> Result<Vec<ExperimentRow>> {
    if cfg.m_values.is_empty() || cfg.sample_sizes.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::invalid("experiment needs m values, sample sizes, and seeds"));
    }
    let mut rows = Vec::new();
    for &m in &cfg.m_values {
        let subset = column_subset(data, m, cfg.feature_seed.wrapping_add(m as u64))?;
        let inst = PowerMeansInstance::new(subset, cfg.p)?;

        // Full-data optimum for this feature subset.
        let (opt_center, _) = sampled_center_solve(&inst.points, cfg.p, 1e-9, 800)?;
        let opt = power_mean_cost(&inst, &opt_center)?;
        if opt <= 0.0 {
            return Err(Error::domain("degenerate experiment instance: OPT = 0"));
        }

        // Cells are independent; evaluate them in parallel, collect in order.
        let cells: Vec<(usize, u64)> = cfg
            .sample_sizes
            .iter()
            .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
            .collect();
        let errs: Vec<Result<f64>> = par::map_slice(&cells, |&(s, seed)| {
            let center = if cfg.use_pipeline {
                let opts = PowerMeansOptions {
                    fixed_sample_size: Some(s),
                    ..PowerMeansOptions::default()
                };
                solve_power_means_with(&inst, 0.1, 0.1, seed, &opts)?.center
            } else {
                uniform_sample_center(&inst, s, seed, 1e-8, 500)?
            };
            Ok(power_mean_cost(&inst, &center)? / opt - 1.0)
        });
        for (&(s, seed), err) in cells.iter().zip(errs) {
            rows.push(ExperimentRow {
                m,
                sample_size: s,
                relative_error: err?,
                seed,
            });
        }
    }
    Ok(rows)
}

/// Median of a nonempty slice (average of middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::surrogate_with_shape;

    #[test]
    fn full_sample_size_recovers_opt() {
        let data = surrogate_with_shape(400, 30, 3);
        let cfg = PowerMeansExperimentConfig {
            p: 1.0,
            m_values: vec![10],
            sample_sizes: vec![400],
            seeds: vec![1],
            feature_seed: 7,
            use_pipeline: false,
        };
        let rows = run_power_means_experiment(&cfg, &data).unwrap();
        assert_eq!(rows.len(), 1);
        // Sampling n of n rows (with replacement) still lands near OPT.
        assert!(rows[0].relative_error.abs() < 5e-2, "err {}", rows[0].relative_error);
    }

    #[test]
    fn csv_is_deterministic_and_ordered() {
        let data = surrogate_with_shape(300, 20, 5);
        let cfg = PowerMeansExperimentConfig {
            p: 1.0,
            m_values: vec![5, 10],
            sample_sizes: vec![20, 80],
            seeds: vec![1, 2],
            feature_seed: 3,
            use_pipeline: false,
        };
        let a = rows_to_csv(&run_power_means_experiment(&cfg, &data).unwrap());
        let b = rows_to_csv(&run_power_means_experiment(&cfg, &data).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("m,sample_size,relative_error,seed\n"));
        assert_eq!(a.lines().count(), 1 + 2 * 2 * 2);
    }

    #[test]
    fn median_helper() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
