//! Dense coupling product over a tile of trajectories.
//!
//! State tiles are vertex-major: entry `i * LANES + t` holds coordinate `i`
//! of lane `t`. Every output lane accumulates `Σ_j J_ij φ_j` in ascending `j`
//! starting from zero, which is exactly the order of the scalar reference
//! path, so both produce identical bits.

/// Trajectories integrated side by side.
pub const LANES: usize = 16;

const ROWS: usize = 4;

/// `out[i, t] = Σ_j m[i, j] · phi[j, t]`.
pub fn apply(m: &[f64], n: usize, phi: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(phi.len(), n * LANES);
    debug_assert_eq!(out.len(), n * LANES);
    let mut i = 0;
    while i + ROWS <= n {
        let rows: [&[f64]; ROWS] = std::array::from_fn(|r| &m[(i + r) * n..(i + r + 1) * n]);
        let mut acc = [[0.0f64; LANES]; ROWS];
        for j in 0..n {
            let p: &[f64; LANES] = phi[j * LANES..(j + 1) * LANES].try_into().unwrap();
            for r in 0..ROWS {
                let b = rows[r][j];
                for t in 0..LANES {
                    acc[r][t] += b * p[t];
                }
            }
        }
        for (r, a) in acc.iter().enumerate() {
            out[(i + r) * LANES..(i + r + 1) * LANES].copy_from_slice(a);
        }
        i += ROWS;
    }
    for i in i..n {
        let row = &m[i * n..(i + 1) * n];
        let mut acc = [0.0f64; LANES];
        for j in 0..n {
            let p: &[f64; LANES] = phi[j * LANES..(j + 1) * LANES].try_into().unwrap();
            for t in 0..LANES {
                acc[t] += row[j] * p[t];
            }
        }
        out[i * LANES..(i + 1) * LANES].copy_from_slice(&acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_scalar_dot_products() {
        for n in [1, 3, 4, 7, 13] {
            let m: Vec<f64> = (0..n * n)
                .map(|v| ((v * 7919) % 23) as f64 / 7.0 - 1.3)
                .collect();
            let phi: Vec<f64> = (0..n * LANES)
                .map(|v| ((v * 104_729) % 31) as f64 / 11.0 - 1.1)
                .collect();
            let mut out = vec![0.0; n * LANES];
            apply(&m, n, &phi, &mut out);
            for i in 0..n {
                for t in 0..LANES {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += m[i * n + j] * phi[j * LANES + t];
                    }
                    assert_eq!(acc.to_bits(), out[i * LANES + t].to_bits());
                }
            }
        }
    }
}
