use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{MultiObjectiveInstance, SpinConfiguration};
use crate::error::{Error, Result};

/// Number of random configurations used to measure objective correlation.
pub const CORRELATION_POOL_SIZE: usize = 2048;

/// Accepted distance between the measured and requested correlation.
pub const CORRELATION_TOLERANCE: f64 = 0.03;

/// Scale of the anti-aligned third layer, `J3 = -LAMBDA (J1 + J2) + ε`.
const LAMBDA: f64 = 0.5;

const GRAPH_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const POOL_STREAM: u64 = 2;

/// Edge-weight distribution for generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// Integers uniform on `{lo, …, hi}`.
    Integer { lo: i64, hi: i64 },
    /// Reals uniform on `(lo, hi]`.
    Real { lo: f64, hi: f64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Integer { lo: 1, hi: 10 }
    }
}

impl WeightSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Integer { lo, hi } if lo > hi => {
                Err(Error::usage(format!("empty integer range {lo}..={hi}")))
            }
            WeightSpec::Real { lo, hi } if !(lo < hi) => {
                Err(Error::usage(format!("empty real range ({lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            WeightSpec::Integer { lo, hi } => rng.random_range(lo..=hi) as f64,
            WeightSpec::Real { lo, hi } => hi - (hi - lo) * rng.random::<f64>(),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Integer { lo, hi } => write!(f, "int:{lo}:{hi}"),
            WeightSpec::Real { lo, hi } => write!(f, "real:{lo}:{hi}"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Parses `int:LO:HI` or `real:LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || {
            Error::usage(format!(
                "bad weight spec {s:?}; expected int:LO:HI or real:LO:HI"
            ))
        };
        let spec = match parts.as_slice() {
            ["int", lo, hi] => WeightSpec::Integer {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            ["real", lo, hi] => WeightSpec::Real {
                lo: lo.parse().map_err(|_| bad())?,
                hi: hi.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density <= 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "density must lie in (0, 1], got {density}"
        )))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Erdős–Rényi edge selection followed by `k` independent weights per edge.
pub fn generate_uniform_instance(
    n: usize,
    density: f64,
    k: usize,
    weights: WeightSpec,
    seed: u64,
) -> Result<MultiObjectiveInstance> {
    if n < 2 {
        return Err(Error::usage(format!("n must be at least 2, got {n}")));
    }
    if k < 2 {
        return Err(Error::usage(format!("k must be at least 2, got {k}")));
    }
    check_density(density)?;
    weights.validate()?;
    let mut rng = stream_rng(seed, GRAPH_STREAM);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let w = (0..k).map(|_| weights.sample(&mut rng)).collect();
                edges.push((i, j, w));
            }
        }
    }
    MultiObjectiveInstance::new(n, k, edges)
}

/// Pearson correlation coefficient; `NaN` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let len = a.len() as f64;
    let ma = a.iter().sum::<f64>() / len;
    let mb = b.iter().sum::<f64>() / len;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Measurement configurations: every configuration with `s_0 = +1` when
/// there are at most `size` of them, otherwise `size` seeded random draws.
fn random_pool(n: usize, size: usize, seed: u64) -> Vec<SpinConfiguration> {
    if n <= 1 || (n - 1 < usize::BITS as usize && 1usize << (n - 1) <= size) {
        let half = 1u64 << n.saturating_sub(1);
        return (0..half)
            .map(|b| SpinConfiguration::from_bits(b << 1, n))
            .collect();
    }
    let mut rng = stream_rng(seed, POOL_STREAM);
    (0..size)
        .map(|_| {
            SpinConfiguration(
                (0..n)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect(),
            )
        })
        .collect()
}

/// Correlation between `C1 + C2` and `C3` over `pool_size` seeded random
/// configurations, or over all of them when that is no more.
pub fn measure_correlation(
    instance: &MultiObjectiveInstance,
    pool_size: usize,
    seed: u64,
) -> Result<f64> {
    if instance.k() != 3 {
        return Err(Error::usage(format!(
            "correlation is defined for K = 3, got K = {}",
            instance.k()
        )));
    }
    let pool = random_pool(instance.n(), pool_size, seed);
    let refs: Vec<&[i8]> = pool.iter().map(|s| s.as_slice()).collect();
    let cuts = instance.cut_values_many(&refs)?;
    let a: Vec<f64> = cuts.iter().map(|c| c[0] + c[1]).collect();
    let b: Vec<f64> = cuts.iter().map(|c| c[2]).collect();
    Ok(pearson(&a, &b))
}

struct CorrelatedParts {
    n: usize,
    edges: Vec<(usize, usize)>,
    base: Vec<[f64; 2]>,
    noise: Vec<f64>,
}

impl CorrelatedParts {
    fn draw(n: usize, density: f64, seed: u64) -> Result<Self> {
        if n < 4 {
            return Err(Error::usage(format!(
                "correlated instances need n >= 4, got {n}"
            )));
        }
        check_density(density)?;
        let spec = WeightSpec::default();
        let mut rng = stream_rng(seed, GRAPH_STREAM);
        let mut edges = Vec::new();
        let mut base = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < density {
                    edges.push((i, j));
                    base.push([spec.sample(&mut rng), spec.sample(&mut rng)]);
                }
            }
        }
        if edges.is_empty() {
            return Err(Error::Generation {
                message: "graph has no edges".into(),
                achieved: f64::NAN,
            });
        }
        let mut rng = stream_rng(seed, NOISE_STREAM);
        let noise = (0..edges.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Ok(Self {
            n,
            edges,
            base,
            noise,
        })
    }

    fn build(&self, scale: f64) -> Result<MultiObjectiveInstance> {
        let edges = self
            .edges
            .iter()
            .zip(&self.base)
            .zip(&self.noise)
            .map(|((&(i, j), &[w1, w2]), &z)| (i, j, vec![w1, w2, -LAMBDA * (w1 + w2) + scale * z]))
            .collect();
        MultiObjectiveInstance::new(self.n, 3, edges)
    }
}

/// Three-objective instance with `J3 = -λ(J1 + J2) + noise_scale · z`, `z ~ N(0, 1)` per edge.
///
/// `J1`, `J2` are drawn from the default integer distribution.
pub fn correlated_instance_with_noise(
    n: usize,
    density: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<MultiObjectiveInstance> {
    CorrelatedParts::draw(n, density, seed)?.build(noise_scale)
}

/// Three-objective instance whose `C1 + C2` vs `C3` correlation is tuned to `target_rho`.
///
/// The noise scale of the third layer is found by bisection against the
/// correlation measured over [`CORRELATION_POOL_SIZE`] random configurations.
pub fn generate_correlated_instance(
    n: usize,
    density: f64,
    target_rho: f64,
    seed: u64,
) -> Result<MultiObjectiveInstance> {
    if !(target_rho > -1.0 && target_rho < 0.0) {
        return Err(Error::usage(format!(
            "target correlation must lie in (-1, 0), got {target_rho}"
        )));
    }
    let parts = CorrelatedParts::draw(n, density, seed)?;

    // Over a fixed pool, C3 = -λ·A + scale·Z where A, Z are the cut values of
    // J1 + J2 and of the noise layer, so the correlation is cheap to re-evaluate.
    let pool = random_pool(n, CORRELATION_POOL_SIZE, seed);
    let (mut a, mut z) = (
        Vec::with_capacity(pool.len()),
        Vec::with_capacity(pool.len()),
    );
    for s in &pool {
        let (mut sa, mut sz) = (0.0, 0.0);
        for (e, &(u, v)) in parts.edges.iter().enumerate() {
            if s.0[u] != s.0[v] {
                sa += parts.base[e][0] + parts.base[e][1];
                sz += parts.noise[e];
            }
        }
        a.push(sa);
        z.push(sz);
    }
    let rho_at = |scale: f64| {
        let b: Vec<f64> = a
            .iter()
            .zip(&z)
            .map(|(a, z)| -LAMBDA * a + scale * z)
            .collect();
        pearson(&a, &b)
    };

    let at_zero = rho_at(0.0);
    if !(at_zero < target_rho) {
        return Err(Error::Generation {
            message: "objective sums have no variance over the measurement pool".into(),
            achieved: at_zero,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut rho_hi = rho_at(hi);
    let mut doublings = 0;
    while rho_hi < target_rho {
        doublings += 1;
        if doublings > 64 {
            return Err(Error::Generation {
                message: "could not bracket the target correlation".into(),
                achieved: rho_hi,
            });
        }
        lo = hi;
        hi *= 2.0;
        rho_hi = rho_at(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let rho = rho_at(mid);
        if (rho - target_rho).abs() < 1e-4 {
            lo = mid;
            hi = mid;
            break;
        }
        if rho < target_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let instance = parts.build(0.5 * (lo + hi))?;
    let achieved = measure_correlation(&instance, CORRELATION_POOL_SIZE, seed)?;
    if (achieved - target_rho).abs() > CORRELATION_TOLERANCE {
        return Err(Error::Generation {
            message: format!("missed target correlation {target_rho}"),
            achieved,
        });
    }
    Ok(instance)
}
