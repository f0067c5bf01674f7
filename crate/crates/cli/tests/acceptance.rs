//! Acceptance suite. Every criterion prints one PASS or FAIL line; the
//! process exits non-zero if any criterion fails.
//!
//! Ground truth comes from enumeration and brute-force helpers defined here,
//! independent of the library's own oracle module wherever practical.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nisb::instance::{
    generate_correlated_instance, generate_uniform_instance, pearson, MultiObjectiveInstance,
    WeightSpec,
};
use nisb::oracle::{brute_force_pareto, brute_force_scalar_optimum, monte_carlo_hv};
use nisb::pareto::{hv, hypervolume, non_dominated_filter, non_dominated_indices, FilterAlgorithm};
use nisb::pipeline::{bench, BenchConfig, InstanceSpec, RunReport};
use nisb::scalarize::{interior_lattice, resolution_for_interior_count, scalarize};
use nisb::solver::{run_sampler, SolverConfig, Variant};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nisb")
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

fn cut(g: &MultiObjectiveInstance, bits: u64) -> Vec<f64> {
    let mut c = vec![0.0; g.k()];
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        if (bits >> i & 1) != (bits >> j & 1) {
            for (acc, w) in c.iter_mut().zip(g.edge_weights(e)) {
                *acc += w;
            }
        }
    }
    c
}

fn dominated_by(a: &[f64], b: &[f64]) -> bool {
    b.iter().zip(a).all(|(x, y)| x >= y) && b != a
}

/// Exact front and per-objective minimum by full enumeration of `2^n` configurations.
fn enumerate(g: &MultiObjectiveInstance) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut front: Vec<Vec<f64>> = Vec::new();
    let mut r = vec![f64::INFINITY; g.k()];
    for bits in 0..1u64 << g.n() {
        let c = cut(g, bits);
        for (r, v) in r.iter_mut().zip(&c) {
            *r = r.min(*v);
        }
        if front.iter().any(|p| *p == c || dominated_by(&c, p)) {
            continue;
        }
        front.retain(|p| !dominated_by(p, &c));
        front.push(c);
    }
    (front, r)
}

/// Inclusion-exclusion over all subsets.
fn ie_hv(front: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut total = 0.0;
    for mask in 1u32..1 << front.len() {
        let vol: f64 = (0..r.len())
            .map(|k| {
                let lo = (0..front.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| front[i][k])
                    .fold(f64::INFINITY, f64::min);
                (lo - r[k]).max(0.0)
            })
            .product();
        total += if mask.count_ones() % 2 == 1 {
            vol
        } else {
            -vol
        };
    }
    total
}

fn interior_compositions(k: usize, h: usize) -> usize {
    if k == 1 {
        return usize::from(h >= 1);
    }
    (1..h)
        .map(|first| interior_compositions(k - 1, h - first))
        .sum()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn hv_worked_example() -> Outcome {
    let start = Instant::now();
    let two =
        hypervolume(&[vec![10.0, 5.0], vec![5.0, 10.0]], &[0.0, 0.0]).map_err(|e| e.to_string())?;
    let three = hypervolume(
        &[vec![10.0, 5.0], vec![5.0, 10.0], vec![8.0, 8.0]],
        &[0.0, 0.0],
    )
    .map_err(|e| e.to_string())?;
    let us = start.elapsed().as_secs_f64() * 1e6;
    check(
        two == 75.0 && three == 84.0 && us < 1000.0,
        format!("HV = {two} and {three} (expected 75 and 84), {us:.0} µs"),
    )
}

fn das_dennis_counts() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, want) in [(3usize, 190usize), (4, 220)] {
        let h = resolution_for_interior_count(k, want).map_err(|e| e.to_string())?;
        let lattice = interior_lattice(k, want).map_err(|e| e.to_string())?;
        let oracle = interior_compositions(k, h);
        let valid = lattice.iter().all(|w| {
            w.parts().iter().all(|&p| p >= 1)
                && w.parts().iter().sum::<usize>() == h
                && w.len() == k
        });
        let mut distinct: Vec<&[usize]> = lattice.iter().map(|w| w.parts()).collect();
        distinct.sort();
        distinct.dedup();
        ok &= lattice.len() == want && oracle == want && valid && distinct.len() == want;
        parts.push(format!(
            "K={k}: H={h}, {} interior vectors (enumeration {oracle})",
            lattice.len()
        ));
    }
    let s = start.elapsed().as_secs_f64();
    check(ok && s < 1.0, format!("{}, {s:.3}s", parts.join("; ")))
}

fn small_graph_hv_ratios() -> Outcome {
    let start = Instant::now();
    let weights = interior_lattice(3, 55).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [10usize, 20] {
        for variant in [Variant::Bsb, Variant::Dsb] {
            let mut ratios = Vec::new();
            for density in [0.5, 1.0] {
                for seed in 0..5u64 {
                    let g =
                        generate_uniform_instance(n, density, 3, WeightSpec::default(), 100 + seed)
                            .map_err(|e| e.to_string())?;
                    let (front, r) = enumerate(&g);
                    let hv_max = hypervolume(&front, &r).map_err(|e| e.to_string())?;
                    let config = SolverConfig {
                        variant,
                        seed,
                        ..SolverConfig::default()
                    };
                    let pool = run_sampler(&g, &weights, &config, 1).map_err(|e| e.to_string())?;
                    let archive = non_dominated_filter(&g, &pool, FilterAlgorithm::Sorted)
                        .map_err(|e| e.to_string())?;
                    let hv = hypervolume(&archive.front(), &r).map_err(|e| e.to_string())?;
                    ratios.push(hv / hv_max);
                }
            }
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let pass = if n == 10 {
                mean >= 1.0 - 1e-9
            } else {
                mean >= 0.99
            };
            ok &= pass;
            lines.push(format!("n={n} {variant} {:.3}%", 100.0 * mean));
        }
    }
    let s = start.elapsed().as_secs_f64();
    check(
        ok && s < 300.0,
        format!("mean HV ratio {}; {s:.1}s", lines.join(", ")),
    )
}

fn end_to_end_bound(dir: &Path) -> Outcome {
    let out = dir.join("bench200");
    let start = Instant::now();
    let status = Command::new(bin())
        .args([
            "bench",
            "--n",
            "200",
            "--density",
            "1.0",
            "--target-rho",
            "-0.92",
            "--out",
        ])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    if !status.status.success() {
        return Err(format!(
            "bench failed: {}",
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let report = RunReport::read(out.join("report.toml")).map_err(|e| e.to_string())?;
    let t = report.timings;
    let staged = t.model_construction_s > 0.0 && t.sampling_s > 0.0 && t.pareto_filtering_s > 0.0;
    check(
        report.instance.n == 200 && report.instance.k == 3 && staged && t.decomposition_holds() && wall < 60.0,
        format!(
            "model {:.2}s + sampling {:.2}s + filtering {:.2}s vs end-to-end {:.2}s (process {wall:.2}s), {} samples, archive {}",
            t.model_construction_s,
            t.sampling_s,
            t.pareto_filtering_s,
            t.end_to_end_s,
            report.sampling.pool_size,
            report.front.archive_size
        ),
    )
}

fn correlated_generator() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for density in [0.5, 1.0] {
        for seed in 0..5u64 {
            let g = generate_correlated_instance(10, density, -0.92, seed)
                .map_err(|e| e.to_string())?;
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for bits in 0..1u64 << 10 {
                let c = cut(&g, bits);
                a.push(c[0] + c[1]);
                b.push(c[2]);
            }
            worst = worst.max((pearson(&a, &b) + 0.92).abs());
            count += 1;
        }
    }
    let s = start.elapsed().as_secs_f64();
    check(
        worst <= 0.03 && s < 10.0,
        format!("{count} instances, exhaustive |rho + 0.92| <= {worst:.5}; {s:.2}s"),
    )
}

fn filter_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut largest = 0;
    for pool in 0..100 {
        let k = 2 + pool % 3;
        let m = if pool % 10 == 0 {
            10_000
        } else {
            rng.random_range(1..=10_000)
        };
        let integer = pool % 2 == 0;
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        if integer {
                            f64::from(rng.random_range(0..40u32))
                        } else {
                            rng.random::<f64>()
                        }
                    })
                    .collect()
            })
            .collect();
        let naive = non_dominated_indices(&points, FilterAlgorithm::Naive);
        let fast = non_dominated_indices(&points, FilterAlgorithm::Sorted);
        if naive != fast {
            return Err(format!(
                "pool {pool} (K={k}, M={m}): naive {} vs fast {}",
                naive.len(),
                fast.len()
            ));
        }
        largest = largest.max(m);
    }
    let s = start.elapsed().as_secs_f64();
    check(
        s < 120.0,
        format!("100 pools, K in {{2,3,4}}, M up to {largest}: identical sets; {s:.1}s"),
    )
}

fn hv_cross_validation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut fronts = 0;
    for k in 2..=4usize {
        for _ in 0..100 {
            let m = rng.random_range(1..=200);
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..k).map(|_| rng.random_range(0.0..100.0)).collect())
                .collect();
            let r: Vec<f64> = (0..k).map(|_| rng.random_range(-10.0..0.0)).collect();
            let mut values = vec![hv::exact(&pts, &r), hv::slice(&pts, &r, 1)];
            match k {
                2 => values.push(hv::sweep_2d(&pts, &r)),
                3 => values.extend([hv::sweep_3d(&pts, &r), hv::slice(&pts, &r, 2)]),
                _ => values.extend([hv::slice(&pts, &r, 3), hv::slice(&pts, &r, 2)]),
            }
            for v in &values[1..] {
                worst = worst.max((v - values[0]).abs() / values[0]);
            }
            fronts += 1;
        }
    }
    let mut ie_ok = true;
    for k in 2..=4usize {
        for _ in 0..200 {
            let m = rng.random_range(1..=4);
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    (0..k)
                        .map(|_| f64::from(rng.random_range(0..20u32)))
                        .collect()
                })
                .collect();
            let r = vec![0.0; k];
            let oracle = ie_hv(&pts, &r);
            ie_ok &= [
                hv::exact(&pts, &r),
                hv::slice(&pts, &r, 1),
                hv::slice(&pts, &r, 2),
            ]
            .iter()
            .all(|&v| v == oracle);
        }
    }
    let mut mc_sigma: f64 = 0.0;
    for k in 2..=4usize {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..k).map(|_| rng.random_range(0.0..10.0)).collect())
            .collect();
        let r = vec![0.0; k];
        let exact = hv::exact(&pts, &r);
        let (est, se) = monte_carlo_hv(&pts, &r, 1_000_000, k as u64).map_err(|e| e.to_string())?;
        mc_sigma = mc_sigma.max((est - exact).abs() / se);
    }
    let s = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && ie_ok && mc_sigma <= 4.0 && s < 120.0,
        format!(
            "{fronts} random fronts, max relative spread {worst:.1e}; inclusion-exclusion exact: {ie_ok}; Monte Carlo within {mc_sigma:.2} sigma; {s:.1}s"
        ),
    )
}

fn supported_solutions() -> Outcome {
    let start = Instant::now();
    let weights = interior_lattice(3, 190).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..3u64 {
        let g = generate_uniform_instance(10, 1.0, 3, WeightSpec::default(), seed)
            .map_err(|e| e.to_string())?;
        let (front, _) = enumerate(&g);
        let library_front = brute_force_pareto(&g).map_err(|e| e.to_string())?.front();
        let mut same = library_front.clone();
        let mut want = front.clone();
        same.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ok &= same == want;
        let mut found: Vec<Vec<f64>> = Vec::new();
        for w in &weights {
            let opt = brute_force_scalar_optimum(&scalarize(&g, w).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            // Minimizing the scalarized energy maximizes the weighted cut.
            let best = (0..1u64 << 10)
                .map(|b| {
                    cut(&g, b)
                        .iter()
                        .zip(w.components())
                        .map(|(c, w)| c * w)
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            for s in &opt.argmin {
                let bits = s
                    .as_slice()
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &v)| acc | u64::from(v < 0) << i);
                let c = cut(&g, bits);
                let weighted: f64 = c.iter().zip(w.components()).map(|(c, w)| c * w).sum();
                ok &= (weighted - best).abs() <= 1e-9 * best.abs().max(1.0);
                if !front.contains(&c) {
                    return Err(format!(
                        "seed {seed}: optimum {s} with cuts {c:?} is not Pareto-optimal"
                    ));
                }
                if !found.contains(&c) {
                    found.push(c);
                }
            }
        }
        ok &= found.len() <= front.len();
        lines.push(format!("{} supported of {}", found.len(), front.len()));
    }
    let s = start.elapsed().as_secs_f64();
    check(
        ok && s < 60.0,
        format!(
            "190 vectors, all optima Pareto-optimal; {}; {s:.1}s",
            lines.join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let mut config = BenchConfig::new(InstanceSpec::Uniform {
        n: 12,
        density: 0.7,
        k: 3,
        weights: WeightSpec::default(),
        seed: 4,
    });
    config.runs = 2;
    config.solver.batch_size = 1000;
    config.solver.seed = 11;
    let mut outcomes = Vec::new();
    for threads in [1usize, 4, 8, 1] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        outcomes.push(pool.install(|| bench(&config)).map_err(|e| e.to_string())?);
    }
    let first = &outcomes[0];
    let first_toml = first
        .report
        .without_timings()
        .to_toml()
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    for o in &outcomes[1..] {
        ok &= o.pool.same_samples(&first.pool);
        ok &= o.archive.entries() == first.archive.entries();
        ok &= o.archive.to_csv() == first.archive.to_csv();
        ok &= o
            .report
            .without_timings()
            .to_toml()
            .map_err(|e| e.to_string())?
            == first_toml;
        ok &= o
            .trace
            .iter()
            .map(|t| (t.hv, t.samples))
            .eq(first.trace.iter().map(|t| (t.hv, t.samples)));
    }
    let s = start.elapsed().as_secs_f64();
    check(
        ok && s < 120.0,
        format!(
            "threads 1, 4, 8 and a repeat: {} samples, archive {}, identical pools, archives and reports; {s:.1}s",
            first.pool.len(),
            first.archive.len()
        ),
    )
}

fn noise_sweep(dir: &Path) -> Outcome {
    let start = Instant::now();
    let out = dir.join("sweep");
    let status = Command::new(bin())
        .args(["sweep", "--alphas", "0,0.05,0.1,0.15,0.2,0.3", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "sweep failed: {}",
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let text = std::fs::read_to_string(out.join("sweep.csv")).map_err(|e| e.to_string())?;
    let mut tally: Vec<(f64, usize, usize)> = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let alpha: f64 = f[0].parse().unwrap();
        let recovered = f[4] == f[5];
        match tally.iter_mut().find(|t| t.0 == alpha) {
            Some(t) => {
                t.1 += usize::from(recovered);
                t.2 += 1;
            }
            None => tally.push((alpha, usize::from(recovered), 1)),
        }
    }
    let majority = |t: &(f64, usize, usize)| 2 * t.1 > t.2;
    let zero_fails = tally
        .iter()
        .find(|t| t.0 == 0.0)
        .is_some_and(|t| !majority(t));
    let noisy_recovers = tally
        .iter()
        .any(|t| (0.1..=0.2).contains(&t.0) && majority(t));
    let summary: Vec<String> = tally
        .iter()
        .map(|t| format!("alpha {}: {}/{}", t.0, t.1, t.2))
        .collect();
    let s = start.elapsed().as_secs_f64();
    check(
        zero_fails && noisy_recovers && s < 300.0,
        format!("full front recovered in {}; {s:.1}s", summary.join(", ")),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("hypervolume worked example", Box::new(hv_worked_example)),
        ("Das-Dennis interior counts", Box::new(das_dennis_counts)),
        (
            "desk-scale HV ratios vs brute force",
            Box::new(small_graph_hv_ratios),
        ),
        (
            "n=200 end-to-end bound and timing decomposition",
            Box::new(|| end_to_end_bound(dir.path())),
        ),
        (
            "correlated generator at rho = -0.92",
            Box::new(correlated_generator),
        ),
        (
            "fast filter equals naive filter",
            Box::new(filter_equivalence),
        ),
        (
            "hypervolume cross-validation",
            Box::new(hv_cross_validation),
        ),
        ("supported-solution property", Box::new(supported_solutions)),
        ("determinism across thread counts", Box::new(determinism)),
        ("noise sweep shape", Box::new(|| noise_sweep(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
