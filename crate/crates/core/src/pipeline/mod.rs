//! End-to-end experiments: build an instance, sample it, filter, score and report.

mod plot;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    generate_correlated_instance, generate_uniform_instance, load_instance, MultiObjectiveInstance,
    WeightSpec,
};
use crate::io::write_atomic;
use crate::oracle::{brute_force_pareto, ENUMERATION_CAP};
use crate::pareto::{
    convergence_trace, evaluate_pool, filter_evaluated, hv_difference, hv_ratio, hypervolume,
    hypervolume_clipped, reference_point, samples_to_hv, trace_to_csv, FilterAlgorithm,
    ParetoArchive, ReferenceMode, TracePoint,
};
use crate::scalarize::{das_dennis, interior_filter, interior_lattice, WeightVector};
use crate::solver::{run_sampler, SamplePool, SolverConfig};

pub use plot::front_svg;
pub use report::{FrontInfo, InstanceInfo, RunReport, SamplingInfo, StageTimings, TIMING_SLACK};

/// Where the instance of an experiment comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    File {
        path: PathBuf,
    },
    Uniform {
        n: usize,
        density: f64,
        k: usize,
        weights: WeightSpec,
        seed: u64,
    },
    Correlated {
        n: usize,
        density: f64,
        target_rho: f64,
        seed: u64,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<(MultiObjectiveInstance, InstanceInfo)> {
        let (g, source, density, seed, target_rho) = match self {
            InstanceSpec::File { path } => (
                load_instance(path)?,
                path.display().to_string(),
                None,
                None,
                None,
            ),
            &InstanceSpec::Uniform {
                n,
                density,
                k,
                weights,
                seed,
            } => (
                generate_uniform_instance(n, density, k, weights, seed)?,
                "uniform".to_string(),
                Some(density),
                Some(seed),
                None,
            ),
            &InstanceSpec::Correlated {
                n,
                density,
                target_rho,
                seed,
            } => (
                generate_correlated_instance(n, density, target_rho, seed)?,
                "correlated".to_string(),
                Some(density),
                Some(seed),
                Some(target_rho),
            ),
        };
        let info = InstanceInfo {
            source,
            n: g.n(),
            k: g.k(),
            edges: g.num_edges(),
            density,
            seed,
            target_rho,
        };
        Ok((g, info))
    }
}

/// Interior weight vectors, chosen by count or by lattice resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSelection {
    /// Interior vectors of the smallest lattice that has at least this many.
    Count(usize),
    /// All interior vectors of the lattice with this resolution.
    Resolution(usize),
}

impl Default for WeightSelection {
    fn default() -> Self {
        WeightSelection::Count(55)
    }
}

impl WeightSelection {
    pub fn lattice(&self, k: usize) -> Result<Vec<WeightVector>> {
        let weights = match *self {
            WeightSelection::Count(c) => interior_lattice(k, c)?,
            WeightSelection::Resolution(h) => interior_filter(&das_dennis(k, h)?),
        };
        if weights.is_empty() {
            return Err(Error::usage(format!(
                "{self} yields no interior weight vectors for K = {k}"
            )));
        }
        Ok(weights)
    }
}

impl FromStr for WeightSelection {
    type Err = Error;

    /// `COUNT` or `res:H`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::usage(format!(
                "bad weight selection {s:?}; expected COUNT or res:H"
            ))
        };
        match s.strip_prefix("res:") {
            Some(h) => h
                .parse()
                .map(WeightSelection::Resolution)
                .map_err(|_| bad()),
            None => s.parse().map(WeightSelection::Count).map_err(|_| bad()),
        }
    }
}

impl std::fmt::Display for WeightSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSelection::Count(c) => write!(f, "{c}"),
            WeightSelection::Resolution(h) => write!(f, "res:{h}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub instance: InstanceSpec,
    pub solver: SolverConfig,
    pub weights: WeightSelection,
    pub runs: usize,
    /// `None` picks the exact reference when enumeration is feasible and
    /// 1,000 sampled configurations otherwise.
    pub reference: Option<ReferenceMode>,
    pub checkpoints: usize,
}

impl BenchConfig {
    pub fn new(instance: InstanceSpec) -> Self {
        Self {
            instance,
            solver: SolverConfig::default(),
            weights: WeightSelection::default(),
            runs: 1,
            reference: None,
            checkpoints: 20,
        }
    }
}

/// Default sample count for the sampled reference point.
pub const SAMPLED_REFERENCE_COUNT: usize = 1000;

pub fn resolve_reference(mode: Option<ReferenceMode>, n: usize, seed: u64) -> ReferenceMode {
    match mode {
        Some(ReferenceMode::Sampled { count, .. }) => ReferenceMode::Sampled { count, seed },
        Some(m) => m,
        None if n <= ENUMERATION_CAP => ReferenceMode::Exact,
        None => ReferenceMode::Sampled {
            count: SAMPLED_REFERENCE_COUNT,
            seed,
        },
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub report: RunReport,
    pub trace: Vec<TracePoint>,
    pub archive: ParetoArchive,
    pub pool: SamplePool,
}

/// Runs the full pipeline and scores it, against the exhaustive oracle when
/// the instance is small enough.
pub fn bench(config: &BenchConfig) -> Result<BenchOutcome> {
    if config.runs == 0 {
        return Err(Error::usage("runs must be at least 1"));
    }
    config.solver.validate()?;
    let start = Instant::now();
    let (instance, info) = config.instance.build()?;
    let weights = config.weights.lattice(instance.k())?;
    let load_s = start.elapsed().as_secs_f64();

    let pool = run_sampler(&instance, &weights, &config.solver, config.runs)?;

    let filter_start = Instant::now();
    let objectives = evaluate_pool(&instance, &pool)?;
    let mut archive = filter_evaluated(&pool, &objectives, FilterAlgorithm::Sorted)?;
    let archive_size = archive.len();
    let mode = resolve_reference(config.reference, instance.n(), config.solver.seed);
    let r = reference_point(&instance, mode)?;
    let mut scored = archive.clone();
    let clipped = scored.clip_to_reference(&r);
    let hv = scored.hypervolume(&r)?;
    archive.filtering_s = filter_start.elapsed().as_secs_f64();
    let end_to_end_s = start.elapsed().as_secs_f64();

    let distinct_samples = {
        let mut seen = std::collections::HashSet::new();
        pool.records
            .iter()
            .filter(|r| seen.insert(r.spins.as_slice()))
            .count()
    };
    let mut front = FrontInfo {
        archive_size,
        samples_per_pareto_point: pool.len() as f64 / archive_size as f64,
        reference_mode: mode.to_string(),
        reference: r.clone(),
        clipped_entries: clipped,
        hv,
        hv_max: None,
        hv_ratio: None,
        hv_difference: None,
        oracle_front_size: None,
        oracle_points_found: None,
        samples_to_optimal_hv: None,
    };
    if instance.n() <= ENUMERATION_CAP {
        let exact = brute_force_pareto(&instance)?.front();
        let hv_max = hypervolume_clipped(&exact, &r);
        let found = archive.front();
        front.hv_max = Some(hv_max);
        front.hv_ratio = if hv_max > 0.0 {
            Some(hv_ratio(hv, hv_max)?)
        } else {
            None
        };
        front.hv_difference = Some(hv_difference(hv_max, hv)?);
        front.oracle_front_size = Some(exact.len());
        front.oracle_points_found = Some(exact.iter().filter(|p| found.contains(p)).count());
        front.samples_to_optimal_hv =
            samples_to_hv(&replay_objectives(&pool, &objectives), &r, hv_max);
    }
    let trace = convergence_trace(&pool, &objectives, &r, config.checkpoints)?;

    let report = RunReport {
        instance: info,
        solver: config.solver.clone(),
        sampling: SamplingInfo {
            runs: config.runs,
            weight_vectors: weights.len(),
            weight_resolution: weights[0].resolution(),
            pool_size: pool.len(),
            distinct_samples,
        },
        timings: StageTimings {
            model_construction_s: load_s + pool.model_construction_s,
            sampling_s: pool.sampling_s,
            pareto_filtering_s: archive.filtering_s,
            end_to_end_s,
        },
        front,
    };
    Ok(BenchOutcome {
        report,
        trace,
        archive,
        pool,
    })
}

/// Objective vectors in the order the pool is replayed (by timestamp, stable).
pub fn replay_objectives(pool: &SamplePool, objectives: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by_key(|&i| pool.records[i].timestamp_ns);
    order.into_iter().map(|i| objectives[i].clone()).collect()
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub report: PathBuf,
    pub trace: PathBuf,
    pub archive: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `report.toml`, `trace.csv`, `archive.csv` and optionally `front.svg` into `dir`.
pub fn emit_report(
    report: &RunReport,
    trace: &[TracePoint],
    archive: &ParetoArchive,
    dir: impl AsRef<Path>,
    plot: bool,
) -> Result<EmittedFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = EmittedFiles {
        report: dir.join("report.toml"),
        trace: dir.join("trace.csv"),
        archive: dir.join("archive.csv"),
        plot: plot.then(|| dir.join("front.svg")),
    };
    write_atomic(&files.report, report.to_toml()?.as_bytes())?;
    write_atomic(&files.trace, trace_to_csv(trace).as_bytes())?;
    archive.write_csv(&files.archive)?;
    if let Some(path) = &files.plot {
        write_atomic(path, front_svg(&archive.front()).as_bytes())?;
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub repeats: usize,
    /// Everything but `alpha`; repeat `i` uses seed `solver.seed + i`.
    pub solver: SolverConfig,
    pub weights: WeightSelection,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub repeat: usize,
    pub seed: u64,
    /// Samples drawn, the budget within which the front must be recovered.
    pub budget: usize,
    pub front_size: usize,
    pub front_found: usize,
    pub samples_to_full_front: Option<usize>,
    pub samples_to_optimal_hv: Option<usize>,
}

impl SweepRow {
    pub fn recovered(&self) -> bool {
        self.front_found == self.front_size
    }
}

/// Samples the instance once per `(alpha, repeat)` and measures how quickly
/// the exact Pareto front is recovered.
pub fn sweep(instance: &MultiObjectiveInstance, config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.alphas.is_empty() || config.repeats == 0 {
        return Err(Error::usage(
            "sweep needs at least one alpha and one repeat",
        ));
    }
    if config.runs == 0 {
        return Err(Error::usage("runs must be at least 1"));
    }
    let exact = brute_force_pareto(instance)?.front();
    let r = reference_point(instance, ReferenceMode::Exact)?;
    let hv_max = hypervolume(&exact, &r)?;
    let weights = config.weights.lattice(instance.k())?;
    let mut rows = Vec::new();
    for &alpha in &config.alphas {
        for repeat in 0..config.repeats {
            let seed = config.solver.seed.wrapping_add(repeat as u64);
            let solver = SolverConfig {
                alpha,
                seed,
                ..config.solver.clone()
            };
            let pool = run_sampler(instance, &weights, &solver, config.runs)?;
            let objectives = replay_objectives(&pool, &evaluate_pool(instance, &pool)?);
            let mut missing: Vec<&Vec<f64>> = exact.iter().collect();
            let mut samples_to_full_front = None;
            for (i, p) in objectives.iter().enumerate() {
                if let Some(pos) = missing.iter().position(|q| *q == p) {
                    missing.swap_remove(pos);
                    if missing.is_empty() {
                        samples_to_full_front = Some(i + 1);
                        break;
                    }
                }
            }
            rows.push(SweepRow {
                alpha,
                repeat,
                seed,
                budget: pool.len(),
                front_size: exact.len(),
                front_found: exact.len() - missing.len(),
                samples_to_full_front,
                samples_to_optimal_hv: samples_to_hv(&objectives, &r, hv_max),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
    let mut out =
        String::from("alpha,repeat,seed,budget,front_size,front_found,samples_to_full_front,samples_to_optimal_hv\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.alpha,
            r.repeat,
            r.seed,
            r.budget,
            r.front_size,
            r.front_found,
            opt(r.samples_to_full_front),
            opt(r.samples_to_optimal_hv)
        )
        .unwrap();
    }
    out
}
