//! Subcommand handlers. Outputs are assembled as strings and written once,
//! so identical configurations and seeds produce byte-identical files.

use crate::opts::*;
use lp_coresets::coresets::{
    build_strong_coreset, build_weak_coreset, StrongCoresetConfig, WeakCoresetConfig,
};
use lp_coresets::experiment::{run_power_means_experiment, rows_to_csv, PowerMeansExperimentConfig};
use lp_coresets::io::{load_matrix, save_matrix};
use lp_coresets::power_means::{
    power_mean_cost, solve_power_means_with, PowerMeansInstance, PowerMeansOptions,
};
use lp_coresets::sampler::SamplingMatrix;
use lp_coresets::subspace::{build_spanning_coreset_with, SpanningOptions, SubspaceProblem};
use lp_coresets::synth::surrogate_with_shape;
use lp_coresets::verify::{verify_strong, verify_weak};
use lp_coresets::{lewis, DenseMatrix};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Usage-level failure (bad flags, unreadable or malformed inputs): exit 2.
#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }

    fn usage(msg: impl ToString) -> Self {
        CliError(msg.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<lp_coresets::Error> for CliError {
    fn from(e: lp_coresets::Error) -> Self {
        // Everything the core rejects traces back to the inputs.
        CliError::usage(e.to_string())
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::usage(m)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::StrongCoreset(a) => strong_coreset(a),
        Command::WeakCoreset(a) => weak_coreset(a),
        Command::PowerMeans(a) => power_means(a),
        Command::Subspace(a) => subspace(a),
        Command::Verify(a) => verify(a),
        Command::LbGen(a) => lb_gen(a),
        Command::Bench(a) => bench(a),
    }
}

fn require(path: &Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
    path.clone()
        .ok_or_else(|| CliError::usage(format!("missing required {flag}")))
}

fn load_required(path: &Option<PathBuf>, flag: &str) -> CliResult<DenseMatrix> {
    let p = require(path, flag)?;
    let m = load_matrix(&p)?;
    if m.is_empty() {
        eprintln!("warning: {} is empty (0x0 matrix)", p.display());
    }
    Ok(m)
}

fn emit(output: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match output {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Coreset table: `row_index,scale` CSV.
fn sampling_to_csv(s: &SamplingMatrix) -> String {
    let mut out = String::from("row_index,scale\n");
    for &(i, sc) in s.kept() {
        let _ = writeln!(out, "{i},{sc:?}");
    }
    out
}

fn sampling_from_csv(path: &Path, n: usize, p: f64, seed: u64) -> CliResult<SamplingMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut kept = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("row_index")) {
            continue;
        }
        let (i, sc) = line
            .split_once(',')
            .ok_or_else(|| CliError::usage(format!("{}:{}: expected row_index,scale", path.display(), lineno + 1)))?;
        let i: usize = i.trim().parse().map_err(|_| {
            CliError::usage(format!("{}:{}: bad row index {i:?}", path.display(), lineno + 1))
        })?;
        let sc: f64 = sc.trim().parse().map_err(|_| {
            CliError::usage(format!("{}:{}: bad scale {sc:?}", path.display(), lineno + 1))
        })?;
        kept.push((i, sc));
    }
    Ok(SamplingMatrix::from_parts(n, p, kept, seed)?)
}

fn strong_coreset(a: StrongArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    let am = load_required(&r.input, "--input")?;
    let bm = load_required(&r.target, "--target")?;
    let mut cfg = StrongCoresetConfig::new(r.eps, r.delta, r.p)?;
    cfg.c_alpha = r.c_alpha;
    cfg.c_beta = r.c_beta;
    let built = build_strong_coreset(&am, &bm, &cfg, r.seed)?;
    println!(
        "task=strong-coreset n={} m={} p={:?} eps={:?} delta={:?} seed={} nnz={} approx_objective={:?}",
        am.rows(),
        bm.cols(),
        r.p,
        r.eps,
        r.delta,
        r.seed,
        built.sampling.nnz(),
        built.approx_objective
    );
    emit(&r.output, &sampling_to_csv(&built.sampling))?;
    Ok(0)
}

fn weak_coreset(a: WeakArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    let am = load_required(&r.input, "--input")?;
    let cfg = WeakCoresetConfig {
        eps: r.eps,
        delta: r.delta,
        p: r.p,
        c_alpha: r.c_alpha,
    };
    let lres = lewis::lewis_weights(&am, r.p, 200, 1e-10)?;
    let s = build_weak_coreset(&am, &cfg, &lres, r.seed)?;
    println!(
        "task=weak-coreset n={} p={:?} eps={:?} delta={:?} seed={} nnz={} gamma={:?}",
        am.rows(),
        r.p,
        r.eps,
        r.delta,
        r.seed,
        s.nnz(),
        lres.gamma
    );
    emit(&r.output, &sampling_to_csv(&s))?;
    Ok(0)
}

fn power_means(a: PowerMeansArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    let data = match &r.input {
        Some(p) => load_matrix(p)?,
        None => {
            let n = a.surrogate_n.unwrap_or(60_000);
            let d = a.surrogate_dim.unwrap_or(784);
            surrogate_with_shape(n, d, r.seed)
        }
    };
    if data.rows() == 0 {
        return Err(CliError::usage("power-means needs a nonempty point set"));
    }

    if !a.sweep.is_empty() {
        let m_list = if a.m_list.is_empty() {
            vec![data.cols()]
        } else {
            a.m_list.clone()
        };
        let cfg = PowerMeansExperimentConfig {
            p: r.p,
            m_values: m_list,
            sample_sizes: a.sweep.clone(),
            seeds: (0..a.trials as u64).map(|t| r.seed + t).collect(),
            feature_seed: r.seed ^ 0xFEA7,
            use_pipeline: a.pipeline,
        };
        let rows = run_power_means_experiment(&cfg, &data)?;
        emit(&r.output, &rows_to_csv(&rows))?;
        return Ok(0);
    }

    let inst = PowerMeansInstance::new(data, r.p)?;
    let opts = PowerMeansOptions {
        c_l: r.c_l,
        c_s: r.c_s,
        fixed_sample_size: None,
    };
    let res = solve_power_means_with(&inst, r.eps, r.delta, r.seed, &opts)?;
    let exact = power_mean_cost(&inst, &res.center)?;
    println!(
        "task=power-means n={} t={} p={:?} eps={:?} delta={:?} seed={} samples_used={} instances={} kept={} fallback={} estimated_cost={:?} exact_cost={:?}",
        inst.n(),
        inst.dim(),
        r.p,
        r.eps,
        r.delta,
        r.seed,
        res.samples_used,
        res.instances_run,
        res.kept_instances,
        res.exact_fallback,
        res.estimated_cost,
        exact
    );
    let center = DenseMatrix::new(1, res.center.len(), res.center.clone())?;
    if r.output.is_some() {
        let p = r.output.clone().unwrap();
        save_matrix(&p, &center, r.format)?;
    }
    Ok(0)
}

fn subspace(a: SubspaceArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    let am = load_required(&r.input, "--input")?;
    let prob = SubspaceProblem::new(am, a.k, r.p)?;
    let opts = SpanningOptions {
        c_alpha: r.c_alpha,
        embed_mode: a.embed_mode,
        embed_const: r.n_embed_const.min(8.0),
        ..SpanningOptions::default()
    };
    let cs = build_spanning_coreset_with(&prob, r.eps, r.delta, r.seed, &opts)?;
    let idx: Vec<String> = cs.row_indices.iter().map(|i| i.to_string()).collect();
    println!(
        "task=subspace k={} p={:?} eps={:?} seed={} nnz={} cost={:?} indices={}",
        a.k,
        r.p,
        r.eps,
        r.seed,
        cs.row_indices.len(),
        cs.cost,
        idx.join(";")
    );
    if r.output.is_some() {
        save_matrix(r.output.as_ref().unwrap(), &cs.subspace_basis, r.format)?;
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    let am = load_required(&r.input, "--input")?;
    let bm = load_required(&r.target, "--target")?;
    let s = sampling_from_csv(&a.coreset, am.rows(), r.p, r.seed)?;
    let report = match a.mode.as_str() {
        "strong" => verify_strong(&am, &bm, &s, r.p, r.eps, a.probes, r.seed)?,
        "weak" => {
            let g = match &r.embedding {
                Some(p) => Some(load_matrix(p)?),
                None => None,
            };
            verify_weak(&am, &bm, g.as_ref(), &s, r.p, r.eps)?
        }
        other => return Err(CliError::usage(format!("unknown mode {other}"))),
    };
    let line = format!("task=verify mode={} {}\n", a.mode, report.to_record());
    emit(&r.output, &line)?;
    if r.output.is_some() {
        print!("{line}");
    }
    Ok(if report.passed { 0 } else { 3 })
}

fn lb_gen(a: LbGenArgs) -> CliResult<i32> {
    let r = a.common.resolve()?;
    match a.kind.as_str() {
        "strong" => {
            let d = a.d.ok_or_else(|| CliError::usage("strong kind needs --d"))?;
            let inst = lp_coresets::adversarial::strong_lb_instance_with_multiplicity(
                d,
                r.eps,
                r.p,
                r.seed,
                a.multiplicity,
            )?;
            let prefix = require(&r.output, "--output (used as prefix)")?;
            let ext = match r.format {
                lp_coresets::io::MatrixFormat::Csv => "csv",
                lp_coresets::io::MatrixFormat::Bin => "bin",
            };
            let a_path = prefix.with_extension(format!("A.{ext}"));
            let b_path = prefix.with_extension(format!("B.{ext}"));
            save_matrix(&a_path, &inst.a, r.format)?;
            save_matrix(&b_path, &inst.b, r.format)?;
            println!(
                "task=lb-gen kind=strong d={} p={:?} eps={:?} seed={} groups={} multiplicity={} capped={} m={} max_correlation={:?} a={} b={}",
                d,
                r.p,
                r.eps,
                r.seed,
                inst.code.len(),
                inst.multiplicity,
                inst.multiplicity_capped,
                inst.m(),
                inst.code.max_correlation,
                a_path.display(),
                b_path.display()
            );
            Ok(0)
        }
        "spanning" => {
            let n = a.n.ok_or_else(|| CliError::usage("spanning kind needs --n"))?;
            let k = a.k.ok_or_else(|| CliError::usage("spanning kind needs --k"))?;
            let rr = a.r.unwrap_or(2.0);
            let m = lp_coresets::adversarial::spanning_lb_instance(n, k, rr)?;
            let out = require(&r.output, "--output")?;
            save_matrix(&out, &m, r.format)?;
            println!(
                "task=lb-gen kind=spanning n={n} k={k} r={rr:?} rows={} cols={} out={}",
                m.rows(),
                m.cols(),
                out.display()
            );
            Ok(0)
        }
        other => Err(CliError::usage(format!("unknown kind {other}"))),
    }
}

fn bench(a: BenchArgs) -> CliResult<i32> {
    use lp_coresets::solver::{solve, RegressionProblem};
    let r = a.common.resolve()?;
    let am = match &r.input {
        Some(p) => load_matrix(p)?,
        None => surrogate_with_shape(a.n, a.d, r.seed),
    };
    let bm = surrogate_with_shape(a.n, a.m, r.seed ^ 1);
    let mut out = String::from("task,n,d,m,p,rep,seconds\n");
    for rep in 0..a.reps {
        let t0 = Instant::now();
        match a.task.as_str() {
            "lewis" => {
                lewis::lewis_weights(&am, r.p, 200, 1e-10)?;
            }
            "solve" => {
                let prob = RegressionProblem::new(am.clone(), bm.clone(), None, r.p)?;
                solve(&prob, 1e-6, 100)?;
            }
            "strong" => {
                let cfg = StrongCoresetConfig::new(r.eps, r.delta, r.p)?;
                build_strong_coreset(&am, &bm, &cfg, r.seed + rep as u64)?;
            }
            "verify" => {
                let cfg = StrongCoresetConfig::new(r.eps, r.delta, r.p)?;
                let built = build_strong_coreset(&am, &bm, &cfg, r.seed + rep as u64)?;
                verify_strong(&am, &bm, &built.sampling, r.p, r.eps, 50, r.seed)?;
            }
            "power-means" => {
                let inst = PowerMeansInstance::new(am.clone(), r.p)?;
                solve_power_means_with(
                    &inst,
                    r.eps,
                    r.delta,
                    r.seed + rep as u64,
                    &PowerMeansOptions::default(),
                )?;
            }
            other => return Err(CliError::usage(format!("unknown bench task {other}"))),
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{:?},{},{:?}",
            a.task,
            a.n,
            a.d,
            a.m,
            r.p,
            rep,
            t0.elapsed().as_secs_f64()
        );
    }
    emit(&r.output, &out)?;
    Ok(0)
}
