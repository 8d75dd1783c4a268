//! Partition-function benchmarks on periodic triangle chains.
//!
//! Every method estimates `log Z` and is scored by
//! `100 · |Z_est / Z - 1|`, evaluated from the log difference so that large
//! chains do not overflow. The reference `Z` comes from exact sequential
//! contraction along the chain.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use loopmp::engine::{run_tn_kcn, run_tree_equivalent, run_vanilla_bp, ConvergenceConfig, TreeDecomposition};
use loopmp::inference::{bp_inference, tn_inference, tree_inference};
use loopmp::models::{gen_ising_chain, gen_triangle_chain, sequential_log_z, ChainKind, ChainSeed, TriangleChain};
use loopmp::{Graph, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchMethod {
    /// Vanilla belief propagation.
    Bp,
    /// Tensor-network KCN messages.
    Kcn,
    /// Region messages with the four-leg tensors as region seeds.
    Te4,
    /// Region messages with the two-leg tensors as region seeds.
    Te2,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 4] = [BenchMethod::Bp, BenchMethod::Kcn, BenchMethod::Te4, BenchMethod::Te2];

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Bp => "BP",
            BenchMethod::Kcn => "KCN",
            BenchMethod::Te4 => "TE4",
            BenchMethod::Te2 => "TE2",
        }
    }
}

/// Error of an estimate in percent, `100 · |exp(est - exact) - 1|`.
pub fn error_percent(log_z_est: f64, log_z_exact: f64) -> f64 {
    100.0 * (log_z_est - log_z_exact).exp_m1().abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleBenchConfig {
    pub sizes: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub methods: Vec<BenchMethod>,
    pub l0: usize,
    pub convergence: ConvergenceConfig,
}

impl Default for TriangleBenchConfig {
    fn default() -> Self {
        TriangleBenchConfig {
            sizes: vec![5, 15, 30, 50],
            instances: 200,
            seed: 2024,
            methods: BenchMethod::ALL.to_vec(),
            l0: 3,
            convergence: bench_convergence(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingBenchConfig {
    pub n: usize,
    pub periodic: bool,
    pub temperatures: Vec<f64>,
    pub methods: Vec<BenchMethod>,
    pub l0: usize,
    pub convergence: ConvergenceConfig,
}

impl Default for IsingBenchConfig {
    fn default() -> Self {
        IsingBenchConfig {
            n: 50,
            periodic: true,
            temperatures: (1..=40).map(|k| k as f64 / 10.0).collect(),
            methods: BenchMethod::ALL.to_vec(),
            l0: 3,
            convergence: bench_convergence(),
        }
    }
}

fn bench_convergence() -> ConvergenceConfig {
    ConvergenceConfig { tolerance: 1e-13, max_iterations: 5000, damping: 0.0 }
}

/// One method at one chain size or temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Set for temperature sweeps.
    pub t_emp: Option<f64>,
    pub method: BenchMethod,
    /// Per-instance errors in percent, in instance order.
    pub errors: Vec<f64>,
    pub mean_error_percent: f64,
    pub median_error_percent: f64,
    /// Instances whose messages did not reach the tolerance.
    pub not_converged: usize,
    /// Wall time spent in this method, summed over instances. Left out of
    /// serialized output so that reruns are byte-identical.
    #[serde(skip)]
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    /// The configuration that produced the rows.
    pub config: serde_json::Value,
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    pub fn row(&self, n: usize, method: BenchMethod) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.n == n && r.method == method && r.t_emp.is_none())
    }

    /// Triangle rows as `n,method,mean_error_percent,median_error_percent,instances,not_converged`;
    /// sweep rows as `t_emp,method,log10_error_percent,error_percent,not_converged`.
    pub fn to_csv(&self) -> String {
        let sweep = self.rows.iter().any(|r| r.t_emp.is_some());
        let mut out = String::new();
        if sweep {
            out.push_str("t_emp,method,log10_error_percent,error_percent,not_converged\n");
            for r in &self.rows {
                let t = r.t_emp.unwrap_or(f64::NAN);
                let e = r.mean_error_percent;
                out.push_str(&format!("{t},{},{},{e:e},{}\n", r.method.name(), e.log10(), r.not_converged));
            }
        } else {
            out.push_str("n,method,mean_error_percent,median_error_percent,instances,not_converged\n");
            for r in &self.rows {
                out.push_str(&format!(
                    "{},{},{:e},{:e},{},{}\n",
                    r.n,
                    r.method.name(),
                    r.mean_error_percent,
                    r.median_error_percent,
                    r.errors.len(),
                    r.not_converged
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench results serialize")
    }
}

/// Seed of instance `i` at chain size `n`, independent of thread scheduling.
pub fn instance_seed(seed: u64, n: usize, i: usize) -> u64 {
    // SplitMix64 finalizer over the packed triple.
    let mut z = seed ^ ((n as u64) << 40) ^ (i as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Estimate {
    log_z: f64,
    converged: bool,
    elapsed: Duration,
}

fn estimate(fg: &Graph, chain: &TriangleChain, method: BenchMethod, l0: usize, cfg: &ConvergenceConfig) -> Result<Estimate> {
    let start = Instant::now();
    let (log_z, converged) = match method {
        BenchMethod::Bp => {
            let r = bp_inference(fg, &run_vanilla_bp(fg, cfg)?)?;
            (r.log_z, r.converged)
        }
        BenchMethod::Kcn => {
            let r = tn_inference(fg, &run_tn_kcn(fg, l0, cfg)?)?;
            (r.log_z, r.converged)
        }
        BenchMethod::Te4 | BenchMethod::Te2 => {
            let seed = if method == BenchMethod::Te4 { ChainSeed::FourLeg } else { ChainSeed::TwoLeg };
            let dec = TreeDecomposition::from_blocks(fg, chain.region_blocks(fg, seed)?)?;
            let r = tree_inference(fg, &run_tree_equivalent(fg, &dec, cfg)?)?;
            (r.log_z, r.converged)
        }
    };
    Ok(Estimate { log_z, converged, elapsed: start.elapsed() })
}

fn summarize(n: usize, t_emp: Option<f64>, method: BenchMethod, runs: Vec<(f64, bool, Duration)>) -> BenchRow {
    let errors: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    BenchRow {
        n,
        t_emp,
        method,
        mean_error_percent: errors.iter().sum::<f64>() / m as f64,
        median_error_percent: median,
        not_converged: runs.iter().filter(|r| !r.1).count(),
        runtime: runs.iter().map(|r| r.2).sum(),
        errors,
    }
}

/// Random periodic triangle chains of every requested size, scored by every
/// requested method. Instances run in parallel; rows keep instance order.
pub fn bench_triangle(cfg: &TriangleBenchConfig) -> Result<BenchResult> {
    if cfg.instances == 0 || cfg.sizes.is_empty() || cfg.methods.is_empty() {
        return Err(loopmp::Error::InvalidConfig("benchmark needs sizes, methods and at least one instance".into()));
    }
    cfg.convergence.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let chain = TriangleChain::new(n, true)?;
        let per_instance: Vec<Vec<(f64, bool, Duration)>> = (0..cfg.instances)
            .into_par_iter()
            .map(|i| {
                let fg: Graph = gen_triangle_chain(n, true, ChainKind::TensorNetwork, instance_seed(cfg.seed, n, i))?;
                let exact = sequential_log_z(&fg)?;
                cfg.methods
                    .iter()
                    .map(|&m| {
                        let e = estimate(&fg, &chain, m, cfg.l0, &cfg.convergence)?;
                        Ok((error_percent(e.log_z, exact), e.converged, e.elapsed))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (k, &m) in cfg.methods.iter().enumerate() {
            rows.push(summarize(n, None, m, per_instance.iter().map(|runs| runs[k]).collect()));
        }
    }
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(BenchResult { config, rows })
}

/// Ising triangle chain, periodic or open, at every temperature of the grid.
pub fn bench_ising(cfg: &IsingBenchConfig) -> Result<BenchResult> {
    if let Some(&t) = cfg.temperatures.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(loopmp::Error::InvalidTemperature(t));
    }
    if cfg.temperatures.is_empty() || cfg.methods.is_empty() {
        return Err(loopmp::Error::InvalidConfig("sweep needs temperatures and methods".into()));
    }
    cfg.convergence.validate()?;
    let chain = TriangleChain::new(cfg.n, cfg.periodic)?;
    let per_t: Vec<Vec<(f64, bool, Duration)>> = cfg
        .temperatures
        .par_iter()
        .map(|&t| {
            let fg: Graph = gen_ising_chain(cfg.n, cfg.periodic, t)?;
            let exact = sequential_log_z(&fg)?;
            cfg.methods
                .iter()
                .map(|&m| {
                    let e = estimate(&fg, &chain, m, cfg.l0, &cfg.convergence)?;
                    Ok((error_percent(e.log_z, exact), e.converged, e.elapsed))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (runs, &t) in per_t.iter().zip(&cfg.temperatures) {
        for (k, &m) in cfg.methods.iter().enumerate() {
            rows.push(summarize(cfg.n, Some(t), m, vec![runs[k]]));
        }
    }
    let config = serde_json::to_value(cfg).expect("config serializes");
    Ok(BenchResult { config, rows })
}
