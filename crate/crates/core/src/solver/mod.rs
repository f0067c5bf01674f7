//! Noise-injected simulated bifurcation (ballistic and discrete) and SimCIM.
//!
//! Each spin is a soft amplitude `x_i ∈ [-1, 1]` with momentum `y_i`. One
//! explicit Euler step of the SB variants is
//!
//! ```text
//! y ← y + dt·( −(a0 − a(t))·x + c0·(J_force·φ(x)) + α·η )
//! x ← x + dt·a0·y
//! |x_i| > 1  ⇒  x_i ← sgn(x_i), y_i ← 0
//! ```
//!
//! with `J_force = −J(c)` so that the dynamics descend `H_total = Σ J_ij s_i s_j`,
//! `φ(x) = x` (bSB) or `sgn(x)` (dSB), and fresh `η ~ N(0, 1)` for every spin
//! at every step.

mod kernel;
mod pool;
mod rng;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{sign, MultiObjectiveInstance, SpinConfiguration};
use crate::scalarize::{build_block_system, scalarize, CouplingView, WeightVector};

pub use kernel::LANES;
pub use pool::{read_pool_csv, write_pool_csv, SamplePool, SampleRecord};
pub use rng::{NoiseStreams, StreamKey};

/// Momentum coefficient of the SimCIM update.
pub const SIMCIM_MOMENTUM: f64 = 0.9;
/// SimCIM gain at the start of the schedule; it rises linearly to zero.
pub const SIMCIM_INITIAL_GAIN: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bsb,
    Dsb,
    SimCim,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Bsb => "bsb",
            Variant::Dsb => "dsb",
            Variant::SimCim => "simcim",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bsb" => Ok(Variant::Bsb),
            "dsb" => Ok(Variant::Dsb),
            "simcim" => Ok(Variant::SimCim),
            _ => Err(Error::usage(format!(
                "unknown solver variant {s:?} (expected bsb, dsb or simcim)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub variant: Variant,
    pub n_iterations: usize,
    pub dt: f64,
    pub a0: f64,
    pub alpha: f64,
    pub batch_size: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Bsb,
            n_iterations: 50,
            dt: 1.0,
            a0: 1.0,
            alpha: 0.15,
            batch_size: 3000,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::usage("n_iterations must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::usage(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::usage(format!(
                "a0 must be positive, got {}",
                self.a0
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::usage(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::usage("batch_size must be at least 1"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::usage(format!(
                "init_scale must be non-negative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }

    /// Pump value used at integration step `step` (0-based): rises linearly
    /// from 0 at the first step to `a0` at the last.
    pub fn pump_at(&self, step: usize) -> f64 {
        pump_schedule(step, self.n_iterations - 1, self.a0)
    }
}

/// `a0 · t / total`; a zero-length schedule sits at `a0`.
pub fn pump_schedule(t: usize, total: usize, a0: f64) -> f64 {
    if total == 0 {
        a0
    } else {
        a0 * t as f64 / total as f64
    }
}

/// Positions and momenta of a batch of trajectories, row-major `batch × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    n: usize,
    batch: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    step: usize,
}

impl TrajectoryState {
    pub fn from_parts(n: usize, batch: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != n * batch || y.len() != n * batch {
            return Err(Error::usage(format!(
                "state buffers must hold {batch} × {n} entries"
            )));
        }
        Ok(Self {
            n,
            batch,
            x,
            y,
            step: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// `s = sgn(x)` of one trajectory.
    pub fn spins(&self, trajectory: usize) -> SpinConfiguration {
        SpinConfiguration::from_signs(&self.x[trajectory * self.n..(trajectory + 1) * self.n])
    }
}

#[inline]
fn draw_uniform(rng: &mut impl Rng, half_width: f64) -> f64 {
    rng.random_range(-half_width..=half_width)
}

/// Fresh state with `x, y` uniform in `[-init_scale, init_scale]`.
///
/// Trajectory `b` draws its `n` positions and then its `n` momenta from stream `b`.
pub fn init_state(
    config: &SolverConfig,
    n: usize,
    streams: &mut NoiseStreams,
) -> Result<TrajectoryState> {
    let batch = streams.len();
    if n == 0 || batch == 0 {
        return Err(Error::usage("state needs n >= 1 and batch >= 1"));
    }
    let mut x = vec![0.0; n * batch];
    let mut y = vec![0.0; n * batch];
    if config.init_scale > 0.0 {
        for b in 0..batch {
            let rng = streams.get_mut(b);
            for v in &mut x[b * n..(b + 1) * n] {
                *v = draw_uniform(rng, config.init_scale);
            }
            for v in &mut y[b * n..(b + 1) * n] {
                *v = draw_uniform(rng, config.init_scale);
            }
        }
    }
    Ok(TrajectoryState {
        n,
        batch,
        x,
        y,
        step: 0,
    })
}

/// Per-step constants shared by the reference and tiled integrators.
#[derive(Clone, Copy)]
struct StepCoefs {
    dt: f64,
    a0: f64,
    detuning: f64,
    gain: f64,
    c0: f64,
    alpha: f64,
}

impl StepCoefs {
    fn new(config: &SolverConfig, c0: f64, a_t: f64) -> Self {
        Self {
            dt: config.dt,
            a0: config.a0,
            detuning: config.a0 - a_t,
            gain: SIMCIM_INITIAL_GAIN * (1.0 - a_t / config.a0),
            c0,
            alpha: config.alpha,
        }
    }

    /// SB update of one coordinate given the coupling field `Σ_j J_ij φ(x_j)`.
    #[inline(always)]
    fn sb(&self, x: &mut f64, y: &mut f64, field: f64, eta: f64) {
        *y += self.dt * (-self.detuning * *x + self.c0 * -field + self.alpha * eta);
        *x += self.dt * self.a0 * *y;
        if x.abs() > 1.0 {
            *x = f64::from(sign(*x));
            *y = 0.0;
        }
    }

    /// SimCIM update; `y` carries the filtered increment and survives the clamp.
    #[inline(always)]
    fn simcim(&self, x: &mut f64, y: &mut f64, field: f64, eta: f64) {
        let delta = self.gain * *x + self.c0 * -field + self.alpha * eta;
        *y = SIMCIM_MOMENTUM * *y + (1.0 - SIMCIM_MOMENTUM) * delta;
        *x = (*x + self.dt * *y).clamp(-1.0, 1.0);
    }
}

#[inline]
fn feed(variant: Variant, x: f64) -> f64 {
    match variant {
        Variant::Dsb => f64::from(sign(x)),
        Variant::Bsb | Variant::SimCim => x,
    }
}

fn check_dims(
    state: &TrajectoryState,
    coupling: &CouplingView<'_>,
    streams: &NoiseStreams,
) -> Result<()> {
    if state.n != coupling.n {
        return Err(Error::usage(format!(
            "state has n = {} but coupling has n = {}",
            state.n, coupling.n
        )));
    }
    if streams.len() != state.batch {
        return Err(Error::usage(format!(
            "{} noise streams for a batch of {}",
            streams.len(),
            state.batch
        )));
    }
    Ok(())
}

fn step_reference(
    state: &mut TrajectoryState,
    coupling: CouplingView<'_>,
    a_t: f64,
    config: &SolverConfig,
    streams: &mut NoiseStreams,
    variant: Variant,
) -> Result<()> {
    check_dims(state, &coupling, streams)?;
    let n = state.n;
    let coefs = StepCoefs::new(config, coupling.c0, a_t);
    let mut phi = vec![0.0; n];
    let mut field = vec![0.0; n];
    let mut eta = vec![0.0; n];
    for b in 0..state.batch {
        let x = &mut state.x[b * n..(b + 1) * n];
        let y = &mut state.y[b * n..(b + 1) * n];
        for (p, &xv) in phi.iter_mut().zip(x.iter()) {
            *p = feed(variant, xv);
        }
        for (i, f) in field.iter_mut().enumerate() {
            let row = &coupling.matrix[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (m, p) in row.iter().zip(&phi) {
                acc += m * p;
            }
            *f = acc;
        }
        if config.alpha != 0.0 {
            let rng = streams.get_mut(b);
            for e in eta.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
        }
        for i in 0..n {
            match variant {
                Variant::SimCim => coefs.simcim(&mut x[i], &mut y[i], field[i], eta[i]),
                _ => coefs.sb(&mut x[i], &mut y[i], field[i], eta[i]),
            }
        }
    }
    if state.y.iter().chain(&state.x).any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            step: state.step,
            context: String::new(),
        });
    }
    state.step += 1;
    Ok(())
}

/// One Euler step of NI-bSB or NI-dSB (per `config.variant`) with the inelastic wall.
pub fn sb_step(
    state: &mut TrajectoryState,
    coupling: CouplingView<'_>,
    a_t: f64,
    config: &SolverConfig,
    streams: &mut NoiseStreams,
) -> Result<()> {
    let variant = match config.variant {
        Variant::SimCim => {
            return Err(Error::usage("sb_step called with the SimCIM variant"));
        }
        v => v,
    };
    step_reference(state, coupling, a_t, config, streams, variant)
}

/// One SimCIM step: momentum-filtered gradient update, amplitude clamp, no momentum reset.
pub fn simcim_step(
    state: &mut TrajectoryState,
    coupling: CouplingView<'_>,
    a_t: f64,
    config: &SolverConfig,
    streams: &mut NoiseStreams,
) -> Result<()> {
    step_reference(state, coupling, a_t, config, streams, Variant::SimCim)
}

/// Integrates a whole batch with the reference (untiled) path and reads out spins.
pub fn integrate_reference(
    coupling: CouplingView<'_>,
    config: &SolverConfig,
    streams: &mut NoiseStreams,
) -> Result<Vec<SpinConfiguration>> {
    config.validate()?;
    let mut state = init_state(config, coupling.n, streams)?;
    for step in 0..config.n_iterations {
        let a_t = config.pump_at(step);
        match config.variant {
            Variant::SimCim => simcim_step(&mut state, coupling, a_t, config, streams)?,
            _ => sb_step(&mut state, coupling, a_t, config, streams)?,
        }
    }
    Ok((0..state.batch).map(|b| state.spins(b)).collect())
}

/// Integrates trajectories `first .. first + count` (at most [`LANES`]) of one
/// weight vector and returns their spins, trajectory-major.
fn integrate_tile(
    coupling: CouplingView<'_>,
    config: &SolverConfig,
    run: usize,
    weight: usize,
    first: usize,
    count: usize,
) -> Result<Vec<i8>> {
    const L: usize = LANES;
    debug_assert!(count <= L);
    let n = coupling.n;
    let mut streams = NoiseStreams::new(config.seed, run as u64, weight as u64, first, count);
    let mut x = vec![0.0; n * L];
    let mut y = vec![0.0; n * L];
    let mut phi = vec![0.0; n * L];
    let mut field = vec![0.0; n * L];
    let mut eta = vec![0.0; n * L];

    if config.init_scale > 0.0 {
        for t in 0..count {
            let rng = streams.get_mut(t);
            for i in 0..n {
                x[i * L + t] = draw_uniform(rng, config.init_scale);
            }
            for i in 0..n {
                y[i * L + t] = draw_uniform(rng, config.init_scale);
            }
        }
    }

    for step in 0..config.n_iterations {
        let coefs = StepCoefs::new(config, coupling.c0, config.pump_at(step));
        for (p, &xv) in phi.iter_mut().zip(&x) {
            *p = feed(config.variant, xv);
        }
        kernel::apply(coupling.matrix, n, &phi, &mut field);
        if config.alpha != 0.0 {
            for t in 0..count {
                let rng = streams.get_mut(t);
                for i in 0..n {
                    eta[i * L + t] = rng.sample(StandardNormal);
                }
            }
        }
        match config.variant {
            Variant::SimCim => {
                for k in 0..n * L {
                    coefs.simcim(&mut x[k], &mut y[k], field[k], eta[k]);
                }
            }
            _ => {
                for k in 0..n * L {
                    coefs.sb(&mut x[k], &mut y[k], field[k], eta[k]);
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                step,
                context: String::new(),
            });
        }
    }

    let mut spins = Vec::with_capacity(count * n);
    for t in 0..count {
        spins.extend((0..n).map(|i| sign(x[i * L + t])));
    }
    Ok(spins)
}

/// Runs every `(weight vector, trajectory)` pair of one run in parallel.
///
/// Returns spins indexed `[weight][trajectory * n + i]`.
fn sample_run(
    views: &[CouplingView<'_>],
    config: &SolverConfig,
    run: usize,
) -> Result<Vec<Vec<i8>>> {
    let batch = config.batch_size;
    let tiles = batch.div_ceil(LANES);
    let jobs: Vec<(usize, usize)> = (0..views.len())
        .flat_map(|l| (0..tiles).map(move |t| (l, t)))
        .collect();
    let results: Vec<Vec<i8>> = jobs
        .par_iter()
        .map(|&(l, tile)| {
            let first = tile * LANES;
            let count = LANES.min(batch - first);
            integrate_tile(views[l], config, run, l, first, count)
                .map_err(|e| e.with_context(format!("(run {run}, weight {l})")))
        })
        .collect::<Result<_>>()?;
    let n = views.first().map_or(0, |v| v.n);
    let mut per_weight = vec![Vec::with_capacity(batch * n); views.len()];
    for ((l, _), spins) in jobs.iter().zip(results) {
        per_weight[*l].extend_from_slice(&spins);
    }
    Ok(per_weight)
}

fn sample_views(
    n: usize,
    views: &[CouplingView<'_>],
    config: &SolverConfig,
    runs: usize,
    model_construction_s: f64,
) -> Result<SamplePool> {
    let start = Instant::now();
    let batch = config.batch_size;
    let mut records = Vec::with_capacity(runs * views.len() * batch);
    for run in 0..runs {
        let spins = sample_run(views, config, run)?;
        let stamp = start.elapsed().as_nanos() as u64;
        for trajectory in 0..batch {
            for (weight, block) in spins.iter().enumerate() {
                records.push(SampleRecord {
                    run,
                    weight,
                    trajectory,
                    timestamp_ns: stamp,
                    spins: SpinConfiguration::new(
                        block[trajectory * n..(trajectory + 1) * n].to_vec(),
                    )
                    .expect("sign readout yields ±1"),
                });
            }
        }
    }
    Ok(SamplePool {
        n,
        records,
        model_construction_s,
        sampling_s: start.elapsed().as_secs_f64(),
    })
}

fn check_sampler_args(weights: &[WeightVector], config: &SolverConfig, runs: usize) -> Result<()> {
    config.validate()?;
    if weights.is_empty() {
        return Err(Error::usage("no weight vectors to sample"));
    }
    if runs == 0 {
        return Err(Error::usage("runs must be at least 1"));
    }
    Ok(())
}

/// Samples `runs × |weights| × batch_size` configurations on the
/// block-consolidated system.
///
/// Model construction (scalarization and block assembly) is timed separately
/// from sampling. Every sample of a run is stamped with the moment that run's
/// integration completed; records are ordered by `(run, trajectory, weight)`.
pub fn run_sampler(
    instance: &MultiObjectiveInstance,
    weights: &[WeightVector],
    config: &SolverConfig,
    runs: usize,
) -> Result<SamplePool> {
    check_sampler_args(weights, config, runs)?;
    let start = Instant::now();
    let system = build_block_system(instance, weights)?;
    let views: Vec<CouplingView<'_>> = (0..system.num_blocks())
        .map(|l| system.segment(l))
        .collect();
    let model_s = start.elapsed().as_secs_f64();
    sample_views(instance.n(), &views, config, runs, model_s)
}

/// Same contract as [`run_sampler`] but scalarizes and integrates each weight
/// vector on its own matrix.
pub fn run_sampler_per_weight(
    instance: &MultiObjectiveInstance,
    weights: &[WeightVector],
    config: &SolverConfig,
    runs: usize,
) -> Result<SamplePool> {
    check_sampler_args(weights, config, runs)?;
    let start = Instant::now();
    let couplings = weights
        .iter()
        .map(|w| scalarize(instance, w))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<CouplingView<'_>> = couplings.iter().map(|c| c.view()).collect();
    let model_s = start.elapsed().as_secs_f64();
    sample_views(instance.n(), &views, config, runs, model_s)
}
