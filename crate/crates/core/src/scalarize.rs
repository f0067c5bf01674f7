//! Weighted-sum scalarization over a Das–Dennis simplex lattice.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{format_real, MultiObjectiveInstance};

/// A point `c` on the unit simplex with components in `{0, 1/H, …, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    parts: Vec<usize>,
    resolution: usize,
    components: Vec<f64>,
}

impl WeightVector {
    /// Lattice point `parts / resolution`; `parts` must sum to `resolution`.
    pub fn from_parts(parts: Vec<usize>, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::usage("lattice resolution must be positive"));
        }
        if parts.iter().sum::<usize>() != resolution {
            return Err(Error::usage(format!(
                "parts {parts:?} do not sum to {resolution}"
            )));
        }
        let components = parts
            .iter()
            .map(|&p| p as f64 / resolution as f64)
            .collect();
        Ok(Self {
            parts,
            resolution,
            components,
        })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Integer numerators over [`resolution`](Self::resolution).
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_interior(&self) -> bool {
        self.parts.iter().all(|&p| p > 0)
    }
}

/// `C(n, r)`, saturating at `usize::MAX`.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All weight vectors of resolution `h` on the `(k-1)`-simplex.
///
/// Ordered lexicographically descending: `(1, 0, …)` first, `(…, 0, 1)` last.
pub fn das_dennis(k: usize, h: usize) -> Result<Vec<WeightVector>> {
    if k < 2 {
        return Err(Error::usage(format!("need at least 2 objectives, got {k}")));
    }
    if h < 1 {
        return Err(Error::usage("lattice resolution must be at least 1"));
    }
    let mut out = Vec::with_capacity(binomial(h + k - 1, k - 1));
    let mut parts = vec![0; k];
    fill(&mut out, &mut parts, 0, h, h);
    Ok(out)
}

fn fill(out: &mut Vec<WeightVector>, parts: &mut [usize], depth: usize, left: usize, h: usize) {
    if depth == parts.len() - 1 {
        parts[depth] = left;
        out.push(WeightVector::from_parts(parts.to_vec(), h).expect("lattice point sums to h"));
        return;
    }
    for p in (0..=left).rev() {
        parts[depth] = p;
        fill(out, parts, depth + 1, left - p, h);
    }
}

/// Keeps the strictly positive vectors, preserving order.
pub fn interior_filter(lattice: &[WeightVector]) -> Vec<WeightVector> {
    lattice
        .iter()
        .filter(|w| w.is_interior())
        .cloned()
        .collect()
}

/// Smallest `h` whose interior lattice holds at least `count` vectors.
pub fn resolution_for_interior_count(k: usize, count: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::usage(format!("need at least 2 objectives, got {k}")));
    }
    if count == 0 {
        return Err(Error::usage("requested an empty weight set"));
    }
    let mut h = k;
    while binomial(h - 1, k - 1) < count {
        h += 1;
    }
    Ok(h)
}

/// Interior lattice at the smallest resolution providing `count` vectors.
pub fn interior_lattice(k: usize, count: usize) -> Result<Vec<WeightVector>> {
    let h = resolution_for_interior_count(k, count)?;
    Ok(interior_filter(&das_dennis(k, h)?))
}

/// One vector per row, `c1,…,cK`.
pub fn weights_to_csv(weights: &[WeightVector]) -> String {
    let mut out = String::new();
    if let Some(first) = weights.first() {
        let header: Vec<String> = (1..=first.len()).map(|k| format!("c{k}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for w in weights {
        let row: Vec<String> = w.components().iter().map(|&c| format_real(c)).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Borrowed dense coupling with its normalization, the unit the solver integrates.
#[derive(Debug, Clone, Copy)]
pub struct CouplingView<'a> {
    pub n: usize,
    pub matrix: &'a [f64],
    pub c0: f64,
}

/// `J(c) = Σ_k c_k J^(k)` as a dense symmetric matrix, plus `c0 = 1 / max_i |Σ_j J_ij(c)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizedCoupling {
    n: usize,
    matrix: Vec<f64>,
    c0: f64,
}

impl ScalarizedCoupling {
    /// Wraps a dense matrix, checking symmetry and the diagonal and computing `c0`.
    pub fn from_matrix(n: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::usage(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::usage(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if matrix[i * n + j] != matrix[j * n + i] {
                    return Err(Error::usage(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let max_row = (0..n)
            .map(|i| matrix[i * n..(i + 1) * n].iter().sum::<f64>().abs())
            .fold(0.0, f64::max);
        if !(max_row > 0.0) || !max_row.is_finite() {
            return Err(Error::Degenerate(format!(
                "coupling normalization undefined (max |row sum| = {max_row})"
            )));
        }
        Ok(Self {
            n,
            matrix,
            c0: 1.0 / max_row,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn view(&self) -> CouplingView<'_> {
        CouplingView {
            n: self.n,
            matrix: &self.matrix,
            c0: self.c0,
        }
    }

    /// `H_total(s) = Σ_{i<j} J_ij s_i s_j`.
    pub fn energy(&self, s: &[i8]) -> f64 {
        assert_eq!(s.len(), self.n);
        let n = self.n;
        let mut h = 0.0;
        for i in 0..n {
            let row = &self.matrix[i * n..(i + 1) * n];
            let mut field = 0.0;
            for j in i + 1..n {
                field += row[j] * f64::from(s[j]);
            }
            h += f64::from(s[i]) * field;
        }
        h
    }
}

/// Assembles `J(c)` for one weight vector.
pub fn scalarize(
    instance: &MultiObjectiveInstance,
    c: &WeightVector,
) -> Result<ScalarizedCoupling> {
    if c.len() != instance.k() {
        return Err(Error::usage(format!(
            "weight vector has {} components but instance has K = {}",
            c.len(),
            instance.k()
        )));
    }
    let n = instance.n();
    let mut m = vec![0.0; n * n];
    for (e, &(u, v)) in instance.edges().iter().enumerate() {
        let w: f64 = instance
            .edge_weights(e)
            .iter()
            .zip(c.components())
            .map(|(w, c)| c * w)
            .sum();
        m[u * n + v] = w;
        m[v * n + u] = w;
    }
    ScalarizedCoupling::from_matrix(n, m)
}

/// Block-diagonal consolidation of `L` scalarized problems into one
/// `(L·n) × (L·n)` matrix, stored in block compressed sparse row form.
///
/// Each block row carries its own `c0`.
#[derive(Debug, Clone)]
pub struct BlockCoupling {
    block_size: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    blocks: Vec<f64>,
    c0: Vec<f64>,
}

impl BlockCoupling {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.c0.len()
    }

    /// Side length `L·n` of the consolidated matrix.
    pub fn dim(&self) -> usize {
        self.block_size * self.num_blocks()
    }

    pub fn c0(&self) -> &[f64] {
        &self.c0
    }

    /// Stored `(column block, dense block)` pairs of block row `l`.
    pub fn block_row(&self, l: usize) -> impl Iterator<Item = (usize, &[f64])> {
        let nn = self.block_size * self.block_size;
        (self.row_ptr[l]..self.row_ptr[l + 1])
            .map(move |b| (self.col_idx[b], &self.blocks[b * nn..(b + 1) * nn]))
    }

    /// The dense coupling acting on state segment `l`.
    ///
    /// Panics when block row `l` couples to another segment; consolidated
    /// systems built here are block-diagonal.
    pub fn segment(&self, l: usize) -> CouplingView<'_> {
        let mut row = self.block_row(l);
        let (col, matrix) = row.next().expect("block row has a diagonal block");
        assert!(
            col == l && row.next().is_none(),
            "block row {l} is not diagonal"
        );
        CouplingView {
            n: self.block_size,
            matrix,
            c0: self.c0[l],
        }
    }

    /// Entry `(r, c)` of the consolidated matrix.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let n = self.block_size;
        let (lr, lc) = (r / n, c / n);
        self.block_row(lr)
            .find(|&(col, _)| col == lc)
            .map_or(0.0, |(_, b)| b[(r % n) * n + c % n])
    }

    /// Dense `(L·n)²` copy, for inspection at small sizes.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = self.get(r, c);
            }
        }
        out
    }
}

/// Scalarizes every weight vector and consolidates the results.
pub fn build_block_system(
    instance: &MultiObjectiveInstance,
    weights: &[WeightVector],
) -> Result<BlockCoupling> {
    if weights.is_empty() {
        return Err(Error::usage(
            "block system needs at least one weight vector",
        ));
    }
    let n = instance.n();
    let mut blocks = Vec::with_capacity(weights.len() * n * n);
    let mut c0 = Vec::with_capacity(weights.len());
    for w in weights {
        let s = scalarize(instance, w)?;
        blocks.extend_from_slice(s.matrix());
        c0.push(s.c0());
    }
    Ok(BlockCoupling {
        block_size: n,
        row_ptr: (0..=weights.len()).collect(),
        col_idx: (0..weights.len()).collect(),
        blocks,
        c0,
    })
}
