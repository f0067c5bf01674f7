//! Multi-objective weighted MaxCut instances.
//!
//! An instance is a single graph whose edges carry `K` weights, one per
//! objective. For a spin configuration `s ∈ {-1,+1}^n` the `k`-th cut value is
//! the total layer-`k` weight of edges whose endpoints disagree, and the
//! matching Ising energy is `H_k(s) = Σ_E w_k s_i s_j`. The two are tied by
//! `2·C_k(s) + H_k(s) = W_k` where `W_k` is the layer's total weight.

mod generate;
mod io;

use std::fmt;

use crate::error::{Error, Result};

pub use generate::{
    correlated_instance_with_noise, generate_correlated_instance, generate_uniform_instance,
    measure_correlation, pearson, WeightSpec, CORRELATION_POOL_SIZE, CORRELATION_TOLERANCE,
};
pub use io::{format_real, load_instance, parse_instance, save_instance, write_instance};

/// Graph with `k` weight layers over `n` vertices.
///
/// Edges are stored with `u < v`; weights are stored edge-major, `k` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiObjectiveInstance {
    n: usize,
    k: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl MultiObjectiveInstance {
    /// Builds an instance from `(i, j, weights)` triples.
    ///
    /// Endpoints may be given in either order; they are stored as `(min, max)`.
    pub fn new(n: usize, k: usize, edges: Vec<(usize, usize, Vec<f64>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("instance needs at least one vertex"));
        }
        if k == 0 {
            return Err(Error::usage("instance needs at least one objective"));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        let mut weights = Vec::with_capacity(edges.len() * k);
        for (idx, (i, j, w)) in edges.into_iter().enumerate() {
            Self::check_edge(n, k, i, j, w.len())
                .map_err(|m| Error::usage(format!("edge {idx}: {m}")))?;
            pairs.push((i.min(j), i.max(j)));
            weights.extend_from_slice(&w);
        }
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::usage(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            n,
            k,
            edges: pairs,
            weights,
        })
    }

    pub(crate) fn check_edge(
        n: usize,
        k: usize,
        i: usize,
        j: usize,
        nw: usize,
    ) -> std::result::Result<(), String> {
        if i == j {
            return Err(format!("self-loop on vertex {i}"));
        }
        if i >= n || j >= n {
            return Err(format!(
                "vertex index out of range: ({i}, {j}) with n = {n}"
            ));
        }
        if nw != k {
            return Err(format!("expected {k} weights, found {nw}"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The `k` weights of edge `e`.
    pub fn edge_weights(&self, e: usize) -> &[f64] {
        &self.weights[e * self.k..(e + 1) * self.k]
    }

    /// `W_k = Σ_E w_k` for every layer.
    pub fn total_weights(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.k];
        for e in 0..self.edges.len() {
            for (t, w) in totals.iter_mut().zip(self.edge_weights(e)) {
                *t += w;
            }
        }
        totals
    }

    /// Dense symmetric `n × n` coupling matrix of one layer, row-major, zero diagonal.
    pub fn coupling_matrix(&self, layer: usize) -> Vec<f64> {
        assert!(
            layer < self.k,
            "layer {layer} out of range for K = {}",
            self.k
        );
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let w = self.weights[e * self.k + layer];
            m[u * n + v] = w;
            m[v * n + u] = w;
        }
        m
    }

    fn check_spins(&self, s: &SpinConfiguration) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::usage(format!(
                "spin configuration has length {} but instance has n = {}",
                s.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `(C_1(s), …, C_K(s))`.
    pub fn cut_values(&self, s: &SpinConfiguration) -> Result<ObjectiveVector> {
        self.check_spins(s)?;
        let spins = s.as_slice();
        let mut acc = vec![0.0; self.k];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let cut = spins[u] != spins[v];
            for (a, &w) in acc.iter_mut().zip(self.edge_weights(e)) {
                *a += if cut { w } else { 0.0 };
            }
        }
        Ok(ObjectiveVector::new(acc, Sense::Cut))
    }

    /// `(H_1(s), …, H_K(s))`.
    pub fn hamiltonian_values(&self, s: &SpinConfiguration) -> Result<ObjectiveVector> {
        self.check_spins(s)?;
        let spins = s.as_slice();
        let mut acc = vec![0.0; self.k];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let prod = f64::from(spins[u] * spins[v]);
            for (a, &w) in acc.iter_mut().zip(self.edge_weights(e)) {
                *a += w * prod;
            }
        }
        Ok(ObjectiveVector::new(acc, Sense::Hamiltonian))
    }

    /// Cut values for many configurations at once.
    ///
    /// Produces bit-identical results to [`cut_values`](Self::cut_values):
    /// every configuration accumulates its edges in the same order, only the
    /// lanes are processed side by side.
    pub fn cut_values_many(&self, configs: &[&[i8]]) -> Result<Vec<Vec<f64>>> {
        for c in configs {
            if c.len() != self.n {
                return Err(Error::usage(format!(
                    "spin configuration has length {} but instance has n = {}",
                    c.len(),
                    self.n
                )));
            }
        }
        let mut out = Vec::with_capacity(configs.len());
        let mut lanes = vec![0i8; self.n * EVAL_LANES];
        let mut acc = vec![0.0f64; self.k * EVAL_LANES];
        for chunk in configs.chunks(EVAL_LANES) {
            for (t, c) in chunk.iter().enumerate() {
                for (i, &s) in c.iter().enumerate() {
                    lanes[i * EVAL_LANES + t] = s;
                }
            }
            acc.iter_mut().for_each(|a| *a = 0.0);
            self.accumulate_cuts(&lanes, &mut acc);
            for t in 0..chunk.len() {
                out.push((0..self.k).map(|k| acc[k * EVAL_LANES + t]).collect());
            }
        }
        Ok(out)
    }

    /// Core of the batched evaluator: `lanes` is vertex-major with
    /// [`EVAL_LANES`] configurations per vertex, `acc` is objective-major.
    pub(crate) fn accumulate_cuts(&self, lanes: &[i8], acc: &mut [f64]) {
        const L: usize = EVAL_LANES;
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let su: &[i8; L] = lanes[u * L..(u + 1) * L].try_into().unwrap();
            let sv: &[i8; L] = lanes[v * L..(v + 1) * L].try_into().unwrap();
            for (k, &w) in self.edge_weights(e).iter().enumerate() {
                let a: &mut [f64; L] = (&mut acc[k * L..(k + 1) * L]).try_into().unwrap();
                for t in 0..L {
                    a[t] += if su[t] != sv[t] { w } else { 0.0 };
                }
            }
        }
    }
}

/// Lane width of the batched cut evaluator.
pub(crate) const EVAL_LANES: usize = 16;

/// A configuration `s ∈ {-1,+1}^n`.
///
/// Ordering is lexicographic over the entries, with `-1 < +1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(i) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::usage(format!(
                "spin {i} is {} (expected ±1)",
                spins[i]
            )));
        }
        Ok(Self(spins))
    }

    /// `sgn(x)` elementwise, with `sgn(0) = +1`.
    pub fn from_signs(x: &[f64]) -> Self {
        Self(x.iter().map(|&v| sign(v)).collect())
    }

    /// Configuration encoded by the low `n` bits of `bits`; bit `i` set means `s_i = -1`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    /// Global spin flip `-s`.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Representative of `{s, -s}` with `s_0 = +1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(&-1) => self.flipped(),
            _ => self.clone(),
        }
    }

    /// Bit-packed form, bit `i` set when `s_i = -1`, bytes little-endian.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.0.len().div_ceil(8)];
        for (i, &s) in self.0.iter().enumerate() {
            if s < 0 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    pub fn from_packed(bytes: &[u8], n: usize) -> Result<Self> {
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::usage(format!(
                "packed spins have {} bytes, expected {} for n = {n}",
                bytes.len(),
                n.div_ceil(8)
            )));
        }
        Ok(Self(
            (0..n)
                .map(|i| {
                    if bytes[i / 8] >> (i % 8) & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                })
                .collect(),
        ))
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// `sgn` with `sgn(0) = +1`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Whether objective values are to be maximized (cuts) or minimized (energies).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Cut,
    Hamiltonian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    values: Vec<f64>,
    sense: Sense,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>, sense: Sense) -> Self {
        Self { values, sense }
    }

    pub fn cut(values: Vec<f64>) -> Self {
        Self::new(values, Sense::Cut)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MultiObjectiveInstance {
        MultiObjectiveInstance::new(
            3,
            1,
            vec![(0, 1, vec![1.0]), (0, 2, vec![1.0]), (1, 2, vec![1.0])],
        )
        .unwrap()
    }

    fn spins(v: &[i8]) -> SpinConfiguration {
        SpinConfiguration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn triangle_cut_and_energy() {
        let g = triangle();
        let s = spins(&[1, 1, -1]);
        assert_eq!(g.cut_values(&s).unwrap().values(), &[2.0]);
        assert_eq!(g.hamiltonian_values(&s).unwrap().values(), &[-1.0]);
    }

    #[test]
    fn aligned_spins_give_total_weight() {
        let g = generate_uniform_instance(9, 0.6, 3, WeightSpec::default(), 5).unwrap();
        let h = g.hamiltonian_values(&spins(&[1; 9])).unwrap();
        assert_eq!(h.values(), g.total_weights().as_slice());
        let h = g.hamiltonian_values(&spins(&[-1; 9])).unwrap();
        assert_eq!(h.values(), g.total_weights().as_slice());
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let g = triangle();
        assert!(matches!(
            g.cut_values(&spins(&[1, 1])),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            g.hamiltonian_values(&spins(&[1, 1, 1, 1])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(MultiObjectiveInstance::new(3, 2, vec![(1, 1, vec![1.0, 2.0])]).is_err());
        assert!(MultiObjectiveInstance::new(3, 2, vec![(0, 3, vec![1.0, 2.0])]).is_err());
        assert!(MultiObjectiveInstance::new(3, 2, vec![(0, 1, vec![1.0])]).is_err());
        let dup = vec![(0, 1, vec![1.0, 1.0]), (1, 0, vec![2.0, 2.0])];
        assert!(MultiObjectiveInstance::new(3, 2, dup).is_err());
    }

    #[test]
    fn coupling_matrix_is_symmetric_with_zero_diagonal() {
        let g = generate_uniform_instance(12, 0.5, 3, WeightSpec::Real { lo: -1.0, hi: 1.0 }, 9)
            .unwrap();
        for layer in 0..3 {
            let m = g.coupling_matrix(layer);
            for i in 0..12 {
                assert_eq!(m[i * 12 + i], 0.0);
                for j in 0..12 {
                    assert_eq!(m[i * 12 + j], m[j * 12 + i]);
                }
            }
        }
    }

    #[test]
    fn spin_validation_and_packing() {
        assert!(SpinConfiguration::new(vec![1, 0, -1]).is_err());
        let s = spins(&[1, -1, -1, 1, 1, 1, 1, 1, -1, 1]);
        let packed = s.to_packed();
        assert_eq!(packed, vec![0b0000_0110, 0b0000_0001]);
        assert_eq!(SpinConfiguration::from_packed(&packed, 10).unwrap(), s);
        assert_eq!(s.flipped().canonical(), s);
        assert_eq!(
            SpinConfiguration::from_signs(&[0.0, -0.0, -1e-300, 2.0]).as_slice(),
            &[1, 1, -1, 1]
        );
    }

    #[test]
    fn batched_cut_values_match_scalar_bitwise() {
        let g = generate_uniform_instance(11, 0.7, 4, WeightSpec::Real { lo: -2.0, hi: 3.0 }, 1)
            .unwrap();
        let configs: Vec<SpinConfiguration> = (0..37u64)
            .map(|b| SpinConfiguration::from_bits(b * 37, 11))
            .collect();
        let refs: Vec<&[i8]> = configs.iter().map(|c| c.as_slice()).collect();
        let batch = g.cut_values_many(&refs).unwrap();
        for (c, b) in configs.iter().zip(&batch) {
            let scalar = g.cut_values(c).unwrap();
            let same = scalar
                .values()
                .iter()
                .zip(b)
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(same, "{:?} vs {:?}", scalar.values(), b);
        }
    }
}
