//! Exhaustive ground truth for small instances.

use rayon::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{MultiObjectiveInstance, SpinConfiguration, EVAL_LANES};
use crate::pareto::{
    dominates_max, hv, hv_difference, FilterAlgorithm, ParetoArchive, RunningArchive,
};
use crate::scalarize::{scalarize, ScalarizedCoupling, WeightVector};

/// Largest `n` accepted by the enumerating oracles.
pub const ENUMERATION_CAP: usize = 22;

const CHUNK: u64 = 1 << 14;

fn check_cap(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::usage(format!(
            "exhaustive enumeration supports n <= {ENUMERATION_CAP}, got n = {n}"
        )));
    }
    if n == 0 {
        return Err(Error::usage("instance has no vertices"));
    }
    Ok(())
}

/// Configuration with `s_0 = +1` for enumeration index `idx`.
pub fn configuration_at(idx: u64, n: usize) -> SpinConfiguration {
    SpinConfiguration::from_bits(idx << 1, n)
}

/// Calls `f(index, cut values)` for every configuration with `s_0 = +1`,
/// in index order; see [`configuration_at`].
pub fn for_each_configuration(
    instance: &MultiObjectiveInstance,
    mut f: impl FnMut(u64, &[f64]),
) -> Result<()> {
    let n = instance.n();
    check_cap(n)?;
    let k = instance.k();
    let total = 1u64 << (n - 1);
    let mut start = 0;
    while start < total {
        let count = CHUNK.min(total - start);
        let values: Vec<f64> = (0..count.div_ceil(EVAL_LANES as u64))
            .into_par_iter()
            .flat_map_iter(|b| {
                let first = start + b * EVAL_LANES as u64;
                let lanes_used = (EVAL_LANES as u64).min(start + count - first) as usize;
                let mut lanes = vec![1i8; n * EVAL_LANES];
                for t in 0..lanes_used {
                    let bits = (first + t as u64) << 1;
                    for i in 0..n {
                        lanes[i * EVAL_LANES + t] = if bits >> i & 1 == 1 { -1 } else { 1 };
                    }
                }
                let mut acc = vec![0.0; k * EVAL_LANES];
                instance.accumulate_cuts(&lanes, &mut acc);
                let mut out = Vec::with_capacity(lanes_used * k);
                for t in 0..lanes_used {
                    out.extend((0..k).map(|j| acc[j * EVAL_LANES + t]));
                }
                out
            })
            .collect();
        for (i, c) in values.chunks_exact(k).enumerate() {
            f(start + i as u64, c);
        }
        start += count;
    }
    Ok(())
}

/// Exact Pareto set by enumeration over `2^(n-1)` configurations.
///
/// Among configurations sharing an objective vector the archive keeps the
/// lexicographically smallest one over both members of every flip pair.
pub fn brute_force_pareto(instance: &MultiObjectiveInstance) -> Result<ParetoArchive> {
    let n = instance.n();
    let mut front: Vec<(Vec<f64>, u64)> = Vec::new();
    for_each_configuration(instance, |idx, c| {
        for (p, best) in front.iter_mut() {
            if p.as_slice() == c {
                if tie_key(idx, n) < tie_key(*best, n) {
                    *best = idx;
                }
                return;
            }
            if dominates_max(p, c) {
                return;
            }
        }
        front.retain(|(p, _)| !dominates_max(c, p));
        front.push((c.to_vec(), idx));
    })?;
    let candidates = front
        .into_iter()
        .map(|(p, idx)| (tie_key(idx, n), p))
        .collect();
    ParetoArchive::from_candidates(candidates, FilterAlgorithm::Sorted)
}

fn tie_key(idx: u64, n: usize) -> SpinConfiguration {
    let s = configuration_at(idx, n);
    let f = s.flipped();
    s.min(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOptimum {
    pub energy: f64,
    /// Every minimizer with `s_0 = +1`, in enumeration order.
    pub argmin: Vec<SpinConfiguration>,
}

/// Relative tolerance for treating two energies as the same minimum.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Exact minimum of `H(s) = Σ_{i<j} J_ij s_i s_j` and all minimizers up to a global flip.
pub fn brute_force_scalar_optimum(coupling: &ScalarizedCoupling) -> Result<ScalarOptimum> {
    let n = coupling.n();
    check_cap(n)?;
    let total = 1u64 << (n - 1);
    let energies: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| coupling.energy(configuration_at(idx, n).as_slice()))
        .collect();
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * min.abs().max(1.0);
    let argmin = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e <= min + slack)
        .map(|(idx, _)| configuration_at(idx as u64, n))
        .collect();
    Ok(ScalarOptimum {
        energy: min,
        argmin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationPoint {
    pub vectors: usize,
    /// Distinct Pareto-optimal objective vectors among the optima so far.
    pub distinct_optima: usize,
    pub hv_difference: f64,
}

/// Solves each weight vector exactly, in lattice order, and tracks how many
/// distinct Pareto-optimal solutions the scalarized optima cover.
///
/// HV uses the exact per-objective minimum as reference point.
pub fn saturation_study(
    instance: &MultiObjectiveInstance,
    lattice: &[WeightVector],
) -> Result<Vec<SaturationPoint>> {
    check_cap(instance.n())?;
    let exact = brute_force_pareto(instance)?;
    let front = exact.front();
    let r = crate::pareto::reference_point(instance, crate::pareto::ReferenceMode::Exact)?;
    let hv_max = hv::exact(&front, &r);
    let mut found = RunningArchive::new();
    let mut series = Vec::with_capacity(lattice.len());
    for (i, c) in lattice.iter().enumerate() {
        let opt = brute_force_scalar_optimum(&scalarize(instance, c)?)?;
        for s in &opt.argmin {
            let v = instance.cut_values(s)?.values().to_vec();
            if front.contains(&v) {
                found.insert(&v);
            }
        }
        series.push(SaturationPoint {
            vectors: i + 1,
            distinct_optima: found.len(),
            hv_difference: hv_difference(hv_max, found.hypervolume(&r))?,
        });
    }
    Ok(series)
}

/// Uniform sampling in the box `[r, max(front)]`.
///
/// Returns the estimate and its binomial standard error; a degenerate box gives `(0, 0)`.
pub fn monte_carlo_hv(
    front: &[Vec<f64>],
    r: &[f64],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::usage(format!(
            "Monte Carlo HV needs at least 1000 samples, got {samples}"
        )));
    }
    let k = r.len();
    let upper: Vec<f64> = (0..k)
        .map(|j| front.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let volume: f64 = upper.iter().zip(r).map(|(u, r)| u - r).product();
    if front.is_empty() || !(volume > 0.0) {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = vec![0.0; k];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..k {
            point[j] = r[j] + (upper[j] - r[j]) * rng.random::<f64>();
        }
        if front
            .iter()
            .any(|p| p.iter().zip(&point).all(|(a, b)| a >= b))
        {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok((volume * p, volume * (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Hypervolume by inclusion-exclusion over all subsets; exponential, for tiny fronts.
pub fn inclusion_exclusion_hv(front: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    if front.len() > 20 {
        return Err(Error::usage("inclusion-exclusion is limited to 20 points"));
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << front.len()) {
        let mut vol = 1.0;
        for (j, rj) in r.iter().enumerate() {
            let lo = (0..front.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| front[i][j])
                .fold(f64::INFINITY, f64::min);
            vol *= (lo - rj).max(0.0);
        }
        if mask.count_ones() % 2 == 1 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    Ok(total)
}
