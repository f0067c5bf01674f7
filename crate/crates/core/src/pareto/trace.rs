use std::fmt::Write as _;

use super::{dominates_max, hypervolume_clipped, HV_TOLERANCE};
use crate::error::{Error, Result};
use crate::solver::SamplePool;

/// Non-dominated set of distinct objective vectors, grown one point at a time.
#[derive(Debug, Clone, Default)]
pub struct RunningArchive {
    points: Vec<Vec<f64>>,
}

impl RunningArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns whether the archive changed.
    pub fn insert(&mut self, p: &[f64]) -> bool {
        if self
            .points
            .iter()
            .any(|q| q.as_slice() == p || dominates_max(q, p))
        {
            return false;
        }
        self.points.retain(|q| !dominates_max(p, q));
        self.points.push(p.to_vec());
        true
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn hypervolume(&self, r: &[f64]) -> f64 {
        hypervolume_clipped(&self.points, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub elapsed_s: f64,
    pub hv: f64,
    pub samples: usize,
}

fn replay_order(pool: &SamplePool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pool.records.len()).collect();
    order.sort_by_key(|&i| pool.records[i].timestamp_ns);
    order
}

/// HV of the running archive at `checkpoints` evenly spaced sample counts.
///
/// `objectives[i]` holds the cut values of `pool.records[i]`. Points that do
/// not weakly dominate `r` contribute no volume.
pub fn convergence_trace(
    pool: &SamplePool,
    objectives: &[Vec<f64>],
    r: &[f64],
    checkpoints: usize,
) -> Result<Vec<TracePoint>> {
    if objectives.len() != pool.records.len() {
        return Err(Error::usage("objective count differs from pool size"));
    }
    if checkpoints == 0 || pool.is_empty() {
        return Ok(Vec::new());
    }
    let order = replay_order(pool);
    let m = order.len();
    let mut archive = RunningArchive::new();
    let mut trace = Vec::with_capacity(checkpoints);
    let mut done = 0;
    for c in 1..=checkpoints {
        let milestone = (c * m).div_ceil(checkpoints);
        while done < milestone {
            archive.insert(&objectives[order[done]]);
            done += 1;
        }
        let last = &pool.records[order[milestone.max(1) - 1]];
        trace.push(TracePoint {
            elapsed_s: last.timestamp_ns as f64 * 1e-9,
            hv: archive.hypervolume(r),
            samples: milestone,
        });
    }
    Ok(trace)
}

/// Smallest number of replayed samples whose archive reaches `target` HV.
///
/// `objectives` must already be in replay order.
pub fn samples_to_hv(objectives: &[Vec<f64>], r: &[f64], target: f64) -> Option<usize> {
    let mut archive = RunningArchive::new();
    for (i, p) in objectives.iter().enumerate() {
        if archive.insert(p)
            && archive.hypervolume(r) >= target - HV_TOLERANCE * target.abs().max(1.0)
        {
            return Some(i + 1);
        }
    }
    None
}

pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("elapsed_s,hv,samples\n");
    for t in trace {
        writeln!(out, "{:.9},{},{}", t.elapsed_s, t.hv, t.samples).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SpinConfiguration;
    use crate::solver::SampleRecord;

    fn pool(m: usize) -> SamplePool {
        SamplePool {
            n: 4,
            records: (0..m)
                .map(|i| SampleRecord {
                    run: 0,
                    weight: 0,
                    trajectory: i,
                    timestamp_ns: (m - i) as u64,
                    spins: SpinConfiguration::from_bits(i as u64, 4),
                })
                .collect(),
            model_construction_s: 0.0,
            sampling_s: 0.0,
        }
    }

    #[test]
    fn running_archive_examples() {
        let mut a = RunningArchive::new();
        assert!(a.insert(&[1.0, 1.0]));
        assert!(!a.insert(&[1.0, 1.0]));
        assert!(a.insert(&[2.0, 0.5]));
        assert!(a.insert(&[2.0, 2.0]));
        assert_eq!(a.points(), &[vec![2.0, 2.0]]);
    }

    #[test]
    fn trace_replays_by_timestamp() {
        let p = pool(4);
        // Timestamps run backwards, so the last record is replayed first.
        let obj = vec![
            vec![4.0, 4.0],
            vec![1.0, 3.0],
            vec![3.0, 1.0],
            vec![1.0, 1.0],
        ];
        let t = convergence_trace(&p, &obj, &[0.0, 0.0], 4).unwrap();
        let hv: Vec<f64> = t.iter().map(|t| t.hv).collect();
        assert_eq!(hv, vec![1.0, 3.0, 5.0, 16.0]);
        assert_eq!(
            t.iter().map(|t| t.samples).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
        assert_eq!(t[3].elapsed_s, 4e-9);
        let t = convergence_trace(&p, &obj, &[0.0, 0.0], 3).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.last().unwrap().samples, 4);
        assert_eq!(trace_to_csv(&t).lines().count(), 4);
    }

    #[test]
    fn samples_to_target() {
        let obj = vec![
            vec![1.0, 1.0],
            vec![3.0, 1.0],
            vec![1.0, 3.0],
            vec![2.0, 2.0],
        ];
        assert_eq!(samples_to_hv(&obj, &[0.0, 0.0], 5.0), Some(3));
        assert_eq!(samples_to_hv(&obj, &[0.0, 0.0], 6.0), Some(4));
        assert_eq!(samples_to_hv(&obj[..2], &[0.0, 0.0], 6.0), None);
    }
}
