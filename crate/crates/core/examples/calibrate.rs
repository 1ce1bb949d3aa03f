//! Tunes the oversampling constants on reference instance suites and prints
//! pass rates, sample counts, and timings per constant. Run with a stage
//! name and edit the grids in place:
//!
//! ```text
//! cargo run --release -p lp-coresets --example calibrate -- strong
//! cargo run --release -p lp-coresets --example calibrate -- weak
//! cargo run --release -p lp-coresets --example calibrate -- diff
//! cargo run --release -p lp-coresets --example calibrate -- power
//! cargo run --release -p lp-coresets --example calibrate -- subspace
//! ```

use lp_coresets::coresets::*;
use lp_coresets::power_means::*;
use lp_coresets::solver::{solve_on_coreset, solve_with_restarts, RegressionProblem};
use lp_coresets::subspace::*;
use lp_coresets::testkit::*;
use lp_coresets::verify::*;
use lp_coresets::{lewis, sampler};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::time::Instant;

/// Maps seeds in parallel when the feature is on.
fn over_seeds<T: Send>(seeds: std::ops::Range<u64>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        seeds.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.map(f).collect()
    }
}

fn main() {
    let stage = std::env::args().nth(1).unwrap_or_else(|| "strong".into());
    match stage.as_str() {
        "strong" => strong_stage(),
        "weak" => weak_stage(),
        "diff" => diff_stage(),
        "power" => power_stage(),
        "subspace" => subspace_stage(),
        other => eprintln!("unknown stage {other}"),
    }
}

fn strong_stage() {
    let seeds = 12u64;
    for c_alpha in [1.0, 2.0, 4.0, 8.0] {
        let t0 = Instant::now();
        for &p in &[1.0, 1.5, 3.0] {
            for &m in &[20usize, 100] {
                let results = over_seeds(0..seeds, |seed| {
                    let (a, b) = regression_instance(1000 + seed, 2000, 5, m, 30.0);
                    let mut cfg = StrongCoresetConfig::new(0.25, 0.1, p).unwrap();
                    cfg.c_alpha = c_alpha;
                    let built = build_strong_coreset(&a, &b, &cfg, seed).unwrap();
                    let rep = verify_strong(&a, &b, &built.sampling, p, 0.25, 200, seed).unwrap();
                    (rep.passed, rep.nnz, rep.max_rel_error)
                });
                let pass = results.iter().filter(|r| r.0).count();
                let nnz = results.iter().map(|r| r.1).sum::<usize>() / results.len();
                let worst = results.iter().map(|r| r.2).fold(0.0f64, f64::max);
                println!(
                    "c_alpha={c_alpha} p={p} m={m}: pass {pass}/{seeds}, mean nnz {nnz}, worst err {worst:.3}"
                );
            }
        }
        println!("c_alpha={c_alpha}: total {:.1}s", t0.elapsed().as_secs_f64());
    }
}

fn weak_stage() {
    let seeds = 12u64;
    for c_alpha in [50.0, 100.0, 200.0, 400.0] {
        let t0 = Instant::now();
        for &p in &[1.0, 1.5, 3.0] {
            let results = over_seeds(0..seeds, |seed| {
                let (a, b) = regression_instance(2000 + seed, 2000, 5, 20, 30.0);
                let g = gaussian(7000 + seed, 0x61, 3, 20);
                let cfg = WeakCoresetConfig {
                    eps: 0.25,
                    delta: 0.1,
                    p,
                    c_alpha,
                };
                let lres = lewis::lewis_weights(&a, p, 200, 1e-10).unwrap();
                let s = build_weak_coreset(&a, &cfg, &lres, seed).unwrap();
                let prob = RegressionProblem::new(a.clone(), b.clone(), Some(g), p).unwrap();
                let opt = solve_with_restarts(&prob, 1e-8, 400, 5, seed).unwrap();
                let red = solve_on_coreset(&prob, &s, 1e-8, 400).unwrap();
                let ratio = prob.objective(&red.x).unwrap() / opt.objective;
                (ratio <= 1.0 + 3.0 * 0.25, s.nnz(), ratio)
            });
            let pass = results.iter().filter(|r| r.0).count();
            let nnz = results.iter().map(|r| r.1).sum::<usize>() / results.len();
            let worst = results.iter().map(|r| r.2).fold(0.0f64, f64::max);
            println!("c_alpha={c_alpha} p={p}: pass {pass}/{seeds}, mean nnz {nnz}, worst ratio {worst:.3}");
        }
        // The eps = 0.1 sample-count separation at p = 1.5.
        let smaller = over_seeds(0..20u64, |seed| {
            let (a, b) = regression_instance(3000 + seed, 2000, 5, 20, 30.0);
            let cfg_w = WeakCoresetConfig {
                eps: 0.1,
                delta: 0.1,
                p: 1.5,
                c_alpha,
            };
            let lres = lewis::lewis_weights(&a, 1.5, 200, 1e-10).unwrap();
            let sw = build_weak_coreset(&a, &cfg_w, &lres, seed).unwrap();
            let cfg_s = StrongCoresetConfig::new(0.1, 0.1, 1.5).unwrap();
            let ss = build_strong_coreset(&a, &b, &cfg_s, seed).unwrap();
            (sw.nnz() < ss.sampling.nnz(), sw.nnz(), ss.sampling.nnz())
        });
        let weak_smaller = smaller.iter().filter(|r| r.0).count();
        println!(
            "c_alpha={c_alpha}: weak<strong {}/20 (example {} vs {}), total {:.1}s",
            weak_smaller,
            smaller[0].1,
            smaller[0].2,
            t0.elapsed().as_secs_f64()
        );
    }
}

fn diff_stage() {
    for c_alpha in [1.0, 2.0, 4.0, 8.0] {
        let t0 = Instant::now();
        let total = 60u64;
        let results = over_seeds(0..total, |seed| {
            let p = 1.5;
            let eps = 0.25;
            let (a, b) = regression_instance(4000 + seed, 1000, 4, 1, 20.0);
            let bvec = b.col(0);
            let prob = RegressionProblem::new(a.clone(), b.clone(), None, p).unwrap();
            let xs = lp_coresets::solver::solve(&prob, 1e-8, 300).unwrap();
            let lres = lewis::lewis_weights(&a, p, 200, 1e-10).unwrap();
            let mut cfg = StrongCoresetConfig::new(eps, 0.1, p).unwrap();
            cfg.c_alpha = c_alpha;
            let alpha = strong_alpha(&cfg, lres.gamma, lres.weight_mass(), 1000, 4);
            let q: Vec<f64> = lres
                .weights
                .values()
                .iter()
                .map(|&w| (w / alpha).min(1.0).max(1e-3))
                .collect();
            let s = sampler::draw_sampling_matrix(
                &lp_coresets::WeightVector::new(q).unwrap(),
                p,
                seed,
            )
            .unwrap();
            let ratio =
                check_difference_preservation(&a, &bvec, xs.x.data(), &s, p, 1.0, 500).unwrap();
            (ratio <= eps, ratio, s.nnz())
        });
        let pass = results.iter().filter(|r| r.0).count();
        let worst = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
        let nnz = results.iter().map(|r| r.2).sum::<usize>() / results.len();
        println!(
            "c_alpha={c_alpha}: pass {pass}/{total}, worst ratio {worst:.3}, mean nnz {nnz}, {:.1}s",
            t0.elapsed().as_secs_f64()
        );
    }
}

fn power_stage() {
    for c_s in [1.0, 2.0, 4.0, 8.0] {
        let t0 = Instant::now();
        for &p in &[1.0, 1.5, 3.0] {
            let results = over_seeds(0..16u64, |seed| {
                let pts = mixture_points(5000 + seed, 20_000, 20, 5);
                let inst = PowerMeansInstance::new(pts, p).unwrap();
                let (opt_center, _) = sampled_center_solve(&inst.points, p, 1e-9, 600).unwrap();
                let opt = power_mean_cost(&inst, &opt_center).unwrap();
                let opts = PowerMeansOptions {
                    c_s,
                    ..PowerMeansOptions::default()
                };
                let res = solve_power_means_with(&inst, 0.1, 0.1, seed, &opts).unwrap();
                let cost = power_mean_cost(&inst, &res.center).unwrap();
                (cost <= 1.2 * opt, cost / opt, res.samples_used)
            });
            let pass = results.iter().filter(|r| r.0).count();
            let worst = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
            let budget = results.iter().map(|r| r.2).sum::<usize>() / results.len();
            println!("c_s={c_s} p={p}: pass {pass}/16, worst ratio {worst:.4}, samples {budget}");
        }
        println!("c_s={c_s}: total {:.1}s", t0.elapsed().as_secs_f64());
    }
}

fn subspace_stage() {
    for c_alpha in [50.0, 100.0, 200.0, 400.0] {
        let t0 = Instant::now();
        let total = 20u64;
        let results = over_seeds(0..total, |seed| {
            let a = lp_coresets::synth::generate_synthetic(
                &lp_coresets::synth::SyntheticSpec::LowRankPlusNoise {
                    n: 2000,
                    dim: 50,
                    rank: 5,
                    noise: 0.05,
                },
                6000 + seed,
            )
            .unwrap();
            let prob = SubspaceProblem::new(a.clone(), 5, 2.0).unwrap();
            let opts = SpanningOptions {
                c_alpha,
                ..SpanningOptions::default()
            };
            let cs = build_spanning_coreset_with(&prob, 0.2, 0.1, seed, &opts).unwrap();
            let svd = nalgebra::SVD::new(
                nalgebra::DMatrix::from_row_slice(2000, 50, a.data()),
                false,
                false,
            );
            let mut vals: Vec<f64> = svd.singular_values.iter().cloned().collect();
            vals.sort_by(|x, y| y.total_cmp(x));
            let opt: f64 = vals.iter().skip(5).map(|s| s * s).sum();
            (cs.cost <= (1.0 + 2.0 * 0.2) * opt, cs.cost / opt, cs.row_indices.len())
        });
        let pass = results.iter().filter(|r| r.0).count();
        let worst = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
        let nnz = results.iter().map(|r| r.2).sum::<usize>() / results.len();
        println!(
            "c_alpha={c_alpha}: pass {pass}/{total}, worst ratio {worst:.4}, mean nnz {nnz}, {:.1}s",
            t0.elapsed().as_secs_f64()
        );
    }
}
