//! Exact hypervolume in maximization space.
//!
//! All routines take points that weakly dominate the reference point
//! (`r_k ≤ y_k`); [`super::hypervolume`] enforces that precondition.
//! Points are put into a total order first, so the result does not depend
//! on the order of the input.

use std::cmp::Ordering;

/// Lebesgue measure for any `K`, choosing the algorithm by dimension:
/// sweep for `K = 2`, dimension sweep for `K = 3`, objective slicing on top of
/// the dimension sweep for `K ≥ 4`.
pub fn exact(points: &[Vec<f64>], r: &[f64]) -> f64 {
    match r.len() {
        0 => 0.0,
        1 => points.iter().map(|p| p[0] - r[0]).fold(0.0, f64::max),
        2 => sweep_2d(points, r),
        3 => sweep_3d(points, r),
        _ => slice(points, r, 3),
    }
}

/// Sort by the first objective and accumulate the staircase, `O(M log M)`.
pub fn sweep_2d(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut area = 0.0;
    let mut top = r[1];
    for (x, y) in pts {
        if y > top {
            area += (x - r[0]) * (y - top);
            top = y;
        }
    }
    area
}

/// Non-dominated 2-D staircase with its dominated area, updated per insertion.
///
/// Points are kept sorted by `x` ascending, hence `y` descending.
struct Staircase {
    rx: f64,
    ry: f64,
    pts: Vec<(f64, f64)>,
    area: f64,
}

impl Staircase {
    fn new(rx: f64, ry: f64) -> Self {
        Self {
            rx,
            ry,
            pts: Vec::new(),
            area: 0.0,
        }
    }

    fn insert(&mut self, px: f64, py: f64) {
        let idx = self.pts.partition_point(|&(x, _)| x < px);
        if idx < self.pts.len() && self.pts[idx].1 >= py {
            return;
        }
        let hi = if idx < self.pts.len() && self.pts[idx].0 == px {
            idx + 1
        } else {
            idx
        };
        let mut start = idx;
        while start > 0 && self.pts[start - 1].1 <= py {
            start -= 1;
        }
        // Over (left, px] the old height is the y of the next point to the
        // right; the new height there is py.
        let mut prev_x = if start > 0 {
            self.pts[start - 1].0
        } else {
            self.rx
        };
        let mut gained = 0.0;
        for &(qx, qy) in &self.pts[start..hi] {
            gained += (qx.min(px) - prev_x) * (py - qy);
            prev_x = qx;
        }
        let tail = if hi < self.pts.len() {
            self.pts[hi].1
        } else {
            self.ry
        };
        gained += (px - prev_x) * (py - tail);
        self.area += gained;
        self.pts.splice(start..hi, [(px, py)]);
    }
}

/// Sweep along the third objective, maintaining the 2-D staircase of the
/// points seen so far, `O(M²)` worst case and typically `O(M log M)`.
pub fn sweep_3d(points: &[Vec<f64>], r: &[f64]) -> f64 {
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| b[2].total_cmp(&a[2]).then_with(|| lex_desc(a, b)));
    let mut stair = Staircase::new(r[0], r[1]);
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        stair.insert(p[0], p[1]);
        let next = pts.get(i + 1).map_or(r[2], |q| q[2]);
        volume += stair.area * (p[2] - next);
    }
    volume
}

/// Hypervolume by slicing along the last objective down to the given base
/// dimension, pruning dominated points in every slice.
///
/// `base = 1` gives a purely recursive computation for any `K`.
pub fn slice(points: &[Vec<f64>], r: &[f64], base: usize) -> f64 {
    let k = r.len();
    if k <= base.max(1) {
        return match k {
            1 => points.iter().map(|p| p[0] - r[0]).fold(0.0, f64::max),
            2 => sweep_2d(points, r),
            _ => sweep_3d(points, r),
        };
    }
    let last = k - 1;
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| b[last].total_cmp(&a[last]).then_with(|| lex_desc(a, b)));
    let mut volume = 0.0;
    let mut front: Vec<Vec<f64>> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let proj = &p[..last];
        if !front.iter().any(|f| weakly_dominates(f, proj)) {
            front.retain(|f| !weakly_dominates(proj, f));
            front.push(proj.to_vec());
        }
        let next = pts.get(i + 1).map_or(r[last], |q| q[last]);
        let depth = p[last] - next;
        if depth > 0.0 {
            volume += slice(&front, &r[..last], base) * depth;
        }
    }
    volume
}

fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Lexicographic descending comparison, used to canonicalize fronts.
pub(crate) fn lex_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}
