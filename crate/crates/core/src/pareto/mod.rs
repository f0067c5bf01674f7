//! Non-dominated filtering, exact hypervolume and convergence metrics.
//!
//! Everything here works in cut-maximization space.

pub mod hv;
mod trace;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{
    format_real, MultiObjectiveInstance, ObjectiveVector, Sense, SpinConfiguration,
};
use crate::solver::SamplePool;

pub use trace::{convergence_trace, samples_to_hv, trace_to_csv, RunningArchive, TracePoint};

/// `a` Pareto-dominates `b` under their shared sense.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.sense() != b.sense() {
        return Err(Error::usage(
            "cannot compare objective vectors of different sense",
        ));
    }
    if a.len() != b.len() {
        return Err(Error::usage(format!(
            "objective lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(match a.sense() {
        Sense::Cut => dominates_max(a.values(), b.values()),
        Sense::Hamiltonian => dominates_max(b.values(), a.values()),
    })
}

/// `a ≥ b` componentwise with at least one strict inequality.
#[inline]
pub fn dominates_max(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterAlgorithm {
    /// Pairwise comparison of all distinct vectors, `O(K M²)`.
    Naive,
    /// Lexicographic sort, then comparison against the growing front only.
    #[default]
    Sorted,
}

fn distinct_first(points: &[Vec<f64>]) -> Vec<usize> {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::with_capacity(points.len());
    (0..points.len())
        .filter(|&i| {
            let key: Vec<u64> = points[i].iter().map(|v| canonical_bits(*v)).collect();
            seen.insert(key, ()).is_none()
        })
        .collect()
}

fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Indices of the maximal non-dominated subset of `points`.
///
/// Among equal vectors only the first occurrence is kept. The result is in
/// ascending index order for both algorithms.
pub fn non_dominated_indices(points: &[Vec<f64>], algorithm: FilterAlgorithm) -> Vec<usize> {
    let mut keep = match algorithm {
        FilterAlgorithm::Naive => {
            let unique = distinct_first(points);
            unique
                .iter()
                .copied()
                .filter(|&i| {
                    !unique
                        .iter()
                        .any(|&j| dominates_max(&points[j], &points[i]))
                })
                .collect::<Vec<_>>()
        }
        FilterAlgorithm::Sorted => sorted_filter(points),
    };
    keep.sort_unstable();
    keep
}

fn sorted_filter(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| hv::lex_desc(&points[a], &points[b]).then(a.cmp(&b)));
    let k = points.first().map_or(0, Vec::len);
    let mut keep = Vec::new();
    let mut prev: Option<usize> = None;
    if k == 2 {
        // A later point can only be dominated by an earlier one; with the
        // first objective non-increasing it is dominated iff some earlier
        // second objective is at least as large.
        let mut best = f64::NEG_INFINITY;
        for &i in &order {
            if prev.is_some_and(|p| points[p] == points[i]) {
                continue;
            }
            prev = Some(i);
            if points[i][1] > best {
                best = points[i][1];
                keep.push(i);
            }
        }
        return keep;
    }
    for &i in &order {
        if prev.is_some_and(|p| points[p] == points[i]) {
            continue;
        }
        prev = Some(i);
        if !keep
            .iter()
            .any(|&j: &usize| dominates_max(&points[j], &points[i]))
        {
            keep.push(i);
        }
    }
    keep
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub spins: SpinConfiguration,
    pub objectives: ObjectiveVector,
}

/// Pairwise non-dominated configurations with distinct objective vectors,
/// ordered by objective vector, lexicographically descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    reference: Option<Vec<f64>>,
    /// Wall time of deduplication and filtering.
    pub filtering_s: f64,
}

impl ParetoArchive {
    /// Filters candidates; equal objective vectors keep the lexicographically
    /// smallest configuration.
    pub fn from_candidates(
        mut candidates: Vec<(SpinConfiguration, Vec<f64>)>,
        algorithm: FilterAlgorithm,
    ) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::usage("cannot filter an empty pool"));
        }
        let start = Instant::now();
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        let points: Vec<Vec<f64>> = candidates.iter().map(|c| c.1.clone()).collect();
        let keep = non_dominated_indices(&points, algorithm);
        let mut entries: Vec<ArchiveEntry> = keep
            .into_iter()
            .map(|i| ArchiveEntry {
                spins: candidates[i].0.clone(),
                objectives: ObjectiveVector::cut(points[i].clone()),
            })
            .collect();
        entries.sort_by(|a, b| hv::lex_desc(a.objectives.values(), b.objectives.values()));
        Ok(Self {
            entries,
            reference: None,
            filtering_s: start.elapsed().as_secs_f64(),
        })
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn front(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| e.objectives.values().to_vec())
            .collect()
    }

    pub fn reference(&self) -> Option<&[f64]> {
        self.reference.as_deref()
    }

    /// Sets the reference point after checking `r_k ≤ C_k` for every entry.
    pub fn set_reference(&mut self, r: Vec<f64>) -> Result<()> {
        check_reference(&self.front(), &r)?;
        self.reference = Some(r);
        Ok(())
    }

    /// Drops entries that do not weakly dominate `r`; returns how many were dropped.
    pub fn clip_to_reference(&mut self, r: &[f64]) -> usize {
        let before = self.entries.len();
        self.entries
            .retain(|e| e.objectives.values().iter().zip(r).all(|(c, r)| c >= r));
        before - self.entries.len()
    }

    /// Hypervolume with respect to `r`, which becomes the archive's reference.
    pub fn hypervolume(&mut self, r: &[f64]) -> Result<f64> {
        let front = self.front();
        let v = hypervolume(&front, r)?;
        self.reference = Some(r.to_vec());
        Ok(v)
    }

    /// `c1,…,cK,spins` rows, spins bit-packed as in sample pools.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let k = self.entries.first().map_or(0, |e| e.objectives.len());
        let header: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
        writeln!(out, "{},spins", header.join(",")).unwrap();
        for e in &self.entries {
            for v in e.objectives.values() {
                write!(out, "{},", format_real(*v)).unwrap();
            }
            writeln!(
                out,
                "{}:{}",
                e.spins.len(),
                hex::encode(e.spins.to_packed())
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }

    /// Reads an archive CSV; entries are re-filtered so the invariants hold.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty archive file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols.last() != Some(&"spins") {
            return Err(Error::parse(
                1,
                format!("unexpected archive header {header:?}"),
            ));
        }
        let k = cols.len() - 1;
        let mut candidates = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != k + 1 {
                return Err(Error::parse(line_no, format!("expected {} fields", k + 1)));
            }
            let values = fields[..k]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("bad value {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let (n, packed) = fields[k]
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "spins field is not `n:hex`"))?;
            let n: usize = n
                .parse()
                .map_err(|_| Error::parse(line_no, "bad spin count"))?;
            let bytes = hex::decode(packed).map_err(|e| Error::parse(line_no, e.to_string()))?;
            let spins = SpinConfiguration::from_packed(&bytes, n)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            candidates.push((spins, values));
        }
        Self::from_candidates(candidates, FilterAlgorithm::Sorted)
    }
}

fn check_reference(front: &[Vec<f64>], r: &[f64]) -> Result<()> {
    for (i, p) in front.iter().enumerate() {
        if p.len() != r.len() {
            return Err(Error::usage(format!(
                "entry {i} has {} objectives but the reference point has {}",
                p.len(),
                r.len()
            )));
        }
        if let Some(k) = p.iter().zip(r).position(|(c, r)| c < r) {
            return Err(Error::usage(format!(
                "reference point not dominated by entry {i}: objective {k} is {} < {}",
                p[k], r[k]
            )));
        }
    }
    Ok(())
}

/// Exact hypervolume of `front` with respect to `r`.
///
/// Every point must weakly dominate `r`.
pub fn hypervolume(front: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    check_reference(front, r)?;
    Ok(hv::exact(front, r))
}

/// Hypervolume counting only points that weakly dominate `r`.
pub fn hypervolume_clipped(front: &[Vec<f64>], r: &[f64]) -> f64 {
    let inside: Vec<Vec<f64>> = front
        .iter()
        .filter(|p| p.iter().zip(r).all(|(c, r)| c >= r))
        .cloned()
        .collect();
    hv::exact(&inside, r)
}

/// Relative slack allowed when a measured hypervolume exceeds its maximum.
pub const HV_TOLERANCE: f64 = 1e-9;

/// `hv_max − hv_t + 1`, equal to 1 at convergence.
pub fn hv_difference(hv_max: f64, hv_t: f64) -> Result<f64> {
    if hv_t > hv_max + HV_TOLERANCE * hv_max.abs().max(1.0) {
        return Err(Error::usage(format!(
            "hypervolume {hv_t} exceeds its maximum {hv_max}; reference points are inconsistent"
        )));
    }
    Ok((hv_max - hv_t).max(0.0) + 1.0)
}

/// `hv_t / hv_ref` as a fraction.
pub fn hv_ratio(hv_t: f64, hv_ref: f64) -> Result<f64> {
    if !(hv_ref > 0.0) {
        return Err(Error::usage(format!(
            "reference hypervolume must be positive, got {hv_ref}"
        )));
    }
    Ok(hv_t / hv_ref)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Per-objective minimum over all configurations.
    Exact,
    /// Per-objective minimum over `count` seeded uniform random configurations.
    Sampled { count: usize, seed: u64 },
}

impl std::str::FromStr for ReferenceMode {
    type Err = Error;

    /// `exact` or `sampled:COUNT`; sampled mode seeds from zero unless overridden.
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ReferenceMode::Exact);
        }
        if let Some(count) = s.strip_prefix("sampled:") {
            let count = count
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| Error::usage(format!("bad sample count in {s:?}")))?;
            return Ok(ReferenceMode::Sampled { count, seed: 0 });
        }
        Err(Error::usage(format!(
            "bad reference mode {s:?}; expected exact or sampled:COUNT"
        )))
    }
}

impl std::fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReferenceMode::Exact => f.write_str("exact"),
            ReferenceMode::Sampled { count, .. } => write!(f, "sampled:{count}"),
        }
    }
}

/// The `count` configurations used by sampled reference mode.
pub fn sampled_configurations(n: usize, count: usize, seed: u64) -> Vec<SpinConfiguration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    (0..count)
        .map(|_| {
            SpinConfiguration::new(
                (0..n)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect(),
            )
            .expect("±1 by construction")
        })
        .collect()
}

pub fn reference_point(instance: &MultiObjectiveInstance, mode: ReferenceMode) -> Result<Vec<f64>> {
    match mode {
        ReferenceMode::Exact => {
            let mut r = vec![f64::INFINITY; instance.k()];
            crate::oracle::for_each_configuration(instance, |_, c| {
                for (r, &c) in r.iter_mut().zip(c) {
                    *r = r.min(c);
                }
            })?;
            Ok(r)
        }
        ReferenceMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::usage(
                    "sampled reference needs at least one configuration",
                ));
            }
            let configs = sampled_configurations(instance.n(), count, seed);
            let refs: Vec<&[i8]> = configs.iter().map(|c| c.as_slice()).collect();
            let cuts = instance.cut_values_many(&refs)?;
            let mut r = vec![f64::INFINITY; instance.k()];
            for c in &cuts {
                for (r, &c) in r.iter_mut().zip(c) {
                    *r = r.min(c);
                }
            }
            Ok(r)
        }
    }
}

/// Cut values of every record in `pool`, evaluating each distinct configuration once.
pub fn evaluate_pool(
    instance: &MultiObjectiveInstance,
    pool: &SamplePool,
) -> Result<Vec<Vec<f64>>> {
    if pool.n != instance.n() {
        return Err(Error::usage(format!(
            "pool holds configurations of length {} but instance has n = {}",
            pool.n,
            instance.n()
        )));
    }
    let mut slot: HashMap<&[i8], usize> = HashMap::new();
    let mut unique: Vec<&[i8]> = Vec::new();
    let index: Vec<usize> = pool
        .records
        .iter()
        .map(|r| {
            let s = r.spins.as_slice();
            *slot.entry(s).or_insert_with(|| {
                unique.push(s);
                unique.len() - 1
            })
        })
        .collect();
    let values = instance.cut_values_many(&unique)?;
    Ok(index.into_iter().map(|i| values[i].clone()).collect())
}

/// Deduplicates the pool and keeps its non-dominated configurations.
pub fn non_dominated_filter(
    instance: &MultiObjectiveInstance,
    pool: &SamplePool,
    algorithm: FilterAlgorithm,
) -> Result<ParetoArchive> {
    if pool.is_empty() {
        return Err(Error::usage("cannot filter an empty pool"));
    }
    let start = Instant::now();
    let objectives = evaluate_pool(instance, pool)?;
    let mut archive = filter_evaluated(pool, &objectives, algorithm)?;
    archive.filtering_s = start.elapsed().as_secs_f64();
    Ok(archive)
}

/// Same as [`non_dominated_filter`] for a pool whose records are already evaluated.
pub fn filter_evaluated(
    pool: &SamplePool,
    objectives: &[Vec<f64>],
    algorithm: FilterAlgorithm,
) -> Result<ParetoArchive> {
    let start = Instant::now();
    let mut seen: HashMap<&[i8], ()> = HashMap::new();
    let candidates: Vec<(SpinConfiguration, Vec<f64>)> = pool
        .records
        .iter()
        .zip(objectives)
        .filter(|(r, _)| seen.insert(r.spins.as_slice(), ()).is_none())
        .map(|(r, o)| (r.spins.clone(), o.clone()))
        .collect();
    let mut archive = ParetoArchive::from_candidates(candidates, algorithm)?;
    archive.filtering_s = start.elapsed().as_secs_f64();
    Ok(archive)
}
