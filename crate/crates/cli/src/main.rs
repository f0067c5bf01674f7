mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use nisb::instance::{measure_correlation, save_instance, CORRELATION_POOL_SIZE};
use nisb::oracle::{brute_force_pareto, saturation_study, ENUMERATION_CAP};
use nisb::pareto::{
    hv_difference, hv_ratio, hypervolume, hypervolume_clipped, non_dominated_filter,
    reference_point, FilterAlgorithm, ParetoArchive,
};
use nisb::pipeline::{
    bench, emit_report, resolve_reference, sweep, sweep_to_csv, BenchConfig, SweepConfig,
};
use nisb::scalarize::weights_to_csv;
use nisb::solver::{read_pool_csv, run_sampler, write_pool_csv};

use config::Settings;

#[derive(Parser)]
#[command(
    name = "nisb",
    version,
    about = "Multi-objective MaxCut with noise-injected simulated bifurcation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a uniform or correlated instance.
    Gen {
        #[command(flatten)]
        settings: Settings,
    },
    /// Sample an instance and write the raw pool.
    Solve {
        #[command(flatten)]
        settings: Settings,
    },
    /// Filter a pool down to its non-dominated archive.
    Pareto {
        #[arg(long)]
        pool: PathBuf,
        /// Use the quadratic pairwise filter instead of the sort-based one.
        #[arg(long)]
        naive: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Hypervolume of an archive, with ratio and difference when a maximum is known.
    Hv {
        #[arg(long)]
        archive: PathBuf,
        /// Explicit reference point, comma separated.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "reference")]
        point: Option<String>,
        /// Hypervolume to compare against; defaults to the oracle front when the instance is small.
        #[arg(long)]
        hv_max: Option<f64>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Exact Pareto front and saturation study by enumeration.
    Oracle {
        #[command(flatten)]
        settings: Settings,
    },
    /// Full pipeline with stage timings, report, trace and plot.
    Bench {
        /// Also write an SVG scatter of the front.
        #[arg(long)]
        plot: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Noise amplitude sweep: how quickly the exact front is recovered.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.15,0.2,0.3")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        repeats: usize,
        #[command(flatten)]
        settings: Settings,
    },
}

/// Trajectories per weight vector in a sweep unless `--batch` says otherwise.
const SWEEP_BATCH: usize = 20;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<nisb::Error>(),
                    Some(
                        nisb::Error::Usage(_) | nisb::Error::Parse { .. } | nisb::Error::Io { .. }
                    )
                )
            });
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn init_threads(settings: &Settings) -> Result<()> {
    if let Some(threads) = settings.threads {
        if threads == 0 {
            bail!(nisb::Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { settings } => gen(settings.resolve()?),
        Command::Solve { settings } => solve(settings.resolve()?),
        Command::Pareto {
            pool,
            naive,
            settings,
        } => pareto(&pool, naive, settings.resolve()?),
        Command::Hv {
            archive,
            point,
            hv_max,
            settings,
        } => hv(&archive, point.as_deref(), hv_max, settings.resolve()?),
        Command::Oracle { settings } => oracle(settings.resolve()?),
        Command::Bench { plot, settings } => run_bench(plot, settings.resolve()?),
        Command::Sweep {
            alphas,
            repeats,
            settings,
        } => run_sweep(alphas, repeats, settings.resolve()?),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn gen(s: Settings) -> Result<()> {
    let (g, info) = s.instance_spec()?.build()?;
    let path = s
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("instance.txt"));
    save_instance(&g, &path)?;
    println!(
        "wrote {} (n = {}, K = {}, {} edges)",
        path.display(),
        info.n,
        info.k,
        info.edges
    );
    if g.k() == 3 && s.target_rho.is_some() {
        let rho = measure_correlation(&g, CORRELATION_POOL_SIZE, s.seed())?;
        println!("correlation {rho:.4}");
    }
    Ok(())
}

fn solve(s: Settings) -> Result<()> {
    init_threads(&s)?;
    let start = Instant::now();
    let (g, _) = s.instance_spec()?.build()?;
    let weights = s.weight_selection()?.lattice(g.k())?;
    let load_s = start.elapsed().as_secs_f64();
    let pool = run_sampler(&g, &weights, &s.solver()?, s.runs())?;
    let dir = s.out_dir();
    create_dir(&dir)?;
    write_pool_csv(&pool, dir.join("pool.csv"))?;
    std::fs::write(dir.join("weights.csv"), weights_to_csv(&weights))
        .context("cannot write weights.csv")?;
    println!("samples {}", pool.len());
    println!(
        "model_construction_s {:.6}",
        load_s + pool.model_construction_s
    );
    println!("sampling_s {:.6}", pool.sampling_s);
    println!("wrote {}", dir.join("pool.csv").display());
    Ok(())
}

fn pareto(pool_path: &Path, naive: bool, s: Settings) -> Result<()> {
    let (g, _) = s.instance_spec()?.build()?;
    let pool = read_pool_csv(pool_path)?;
    let algorithm = if naive {
        FilterAlgorithm::Naive
    } else {
        FilterAlgorithm::Sorted
    };
    let archive = non_dominated_filter(&g, &pool, algorithm)?;
    let dir = s.out_dir();
    create_dir(&dir)?;
    archive.write_csv(dir.join("archive.csv"))?;
    println!("pool {} archive {}", pool.len(), archive.len());
    println!("pareto_filtering_s {:.6}", archive.filtering_s);
    println!("wrote {}", dir.join("archive.csv").display());
    Ok(())
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| nisb::Error::Usage(format!("bad reference coordinate {v:?}")).into())
        })
        .collect()
}

fn hv(archive_path: &Path, point: Option<&str>, hv_max: Option<f64>, s: Settings) -> Result<()> {
    let archive = ParetoArchive::read_csv(archive_path)?;
    let front = archive.front();
    let instance = if point.is_none() || hv_max.is_none() {
        Some(s.instance_spec()?.build()?.0)
    } else {
        None
    };
    let r = match point {
        Some(p) => parse_point(p)?,
        None => {
            let g = instance.as_ref().expect("built above");
            reference_point(g, resolve_reference(s.reference()?, g.n(), s.seed()))?
        }
    };
    let value = hypervolume(&front, &r)?;
    println!("hv {value}");
    let hv_max = match (hv_max, &instance) {
        (Some(v), _) => Some(v),
        (None, Some(g)) if g.n() <= ENUMERATION_CAP => {
            Some(hypervolume_clipped(&brute_force_pareto(g)?.front(), &r))
        }
        _ => None,
    };
    if let Some(hv_max) = hv_max {
        println!("hv_max {hv_max}");
        println!("hv_ratio {:.6}", hv_ratio(value, hv_max)?);
        println!("hv_difference {}", hv_difference(hv_max, value)?);
    }
    Ok(())
}

fn oracle(s: Settings) -> Result<()> {
    init_threads(&s)?;
    let (g, _) = s.instance_spec()?.build()?;
    let start = Instant::now();
    let exact = brute_force_pareto(&g)?;
    println!(
        "pareto set {} ({:.3}s)",
        exact.len(),
        start.elapsed().as_secs_f64()
    );
    let dir = s.out_dir();
    create_dir(&dir)?;
    exact.write_csv(dir.join("exact_archive.csv"))?;
    let lattice = s.weight_selection()?.lattice(g.k())?;
    let series = saturation_study(&g, &lattice)?;
    let mut csv = String::from("vectors,distinct_optima,hv_difference\n");
    for p in &series {
        csv.push_str(&format!(
            "{},{},{}\n",
            p.vectors, p.distinct_optima, p.hv_difference
        ));
    }
    std::fs::write(dir.join("saturation.csv"), csv).context("cannot write saturation.csv")?;
    if let Some(last) = series.last() {
        println!(
            "{} weight vectors: {} distinct Pareto-optimal optima, hv difference {}",
            last.vectors, last.distinct_optima, last.hv_difference
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn run_bench(plot: bool, s: Settings) -> Result<()> {
    init_threads(&s)?;
    let mut config = BenchConfig::new(s.instance_spec()?);
    config.solver = s.solver()?;
    config.weights = s.weight_selection()?;
    config.runs = s.runs();
    config.reference = s.reference()?;
    if let Some(c) = s.checkpoints {
        config.checkpoints = c;
    }
    let outcome = bench(&config)?;
    let files = emit_report(
        &outcome.report,
        &outcome.trace,
        &outcome.archive,
        s.out_dir(),
        plot,
    )?;
    let r = &outcome.report;
    let t = &r.timings;
    println!("model_construction_s {:.6}", t.model_construction_s);
    println!("sampling_s {:.6}", t.sampling_s);
    println!("pareto_filtering_s {:.6}", t.pareto_filtering_s);
    println!("end_to_end_s {:.6}", t.end_to_end_s);
    println!(
        "pool {} archive {} hv {}",
        r.sampling.pool_size, r.front.archive_size, r.front.hv
    );
    if let Some(ratio) = r.front.hv_ratio {
        println!("hv_ratio {:.4}%", 100.0 * ratio);
    }
    if !t.decomposition_holds() {
        eprintln!("warning: stage timings exceed the end-to-end time");
    }
    println!("wrote {}", files.report.display());
    Ok(())
}

fn run_sweep(alphas: Vec<f64>, repeats: usize, s: Settings) -> Result<()> {
    init_threads(&s)?;
    let spec =
        if s.instance.is_none() && s.n.is_none() && s.density.is_none() && s.target_rho.is_none() {
            Settings {
                density: Some(1.0),
                ..s.clone()
            }
            .instance_spec()?
        } else {
            s.instance_spec()?
        };
    let (g, _) = spec.build()?;
    let mut solver = s.solver()?;
    if s.batch.is_none() {
        solver.batch_size = SWEEP_BATCH;
    }
    let config = SweepConfig {
        alphas,
        repeats,
        solver,
        weights: s.weight_selection()?,
        runs: s.runs(),
    };
    let rows = sweep(&g, &config)?;
    let dir = s.out_dir();
    create_dir(&dir)?;
    std::fs::write(dir.join("sweep.csv"), sweep_to_csv(&rows)).context("cannot write sweep.csv")?;
    println!(
        "{:>6}  {:>9}  {:>16}",
        "alpha", "recovered", "median samples"
    );
    for chunk in rows.chunks(repeats) {
        let recovered = chunk.iter().filter(|r| r.recovered()).count();
        let mut samples: Vec<usize> = chunk
            .iter()
            .filter_map(|r| r.samples_to_full_front)
            .collect();
        samples.sort_unstable();
        let median = if recovered * 2 > chunk.len() {
            samples[chunk.len() / 2].to_string()
        } else {
            "-".into()
        };
        println!(
            "{:>6}  {:>6}/{:<2}  {:>16}",
            chunk[0].alpha,
            recovered,
            chunk.len(),
            median
        );
    }
    println!("budget {} samples per repeat", rows[0].budget);
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}
