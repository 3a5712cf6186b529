//! Tiny dense helpers for the few-row systems that appear here.

use alloc::vec::Vec;

/// Solves the square row-major system `a x = b` by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `tol`.
pub(crate) fn solve(n: usize, a: &[f64], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut m: Vec<f64> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))
            .unwrap();
        if m[pivot * n + col].abs() <= tol {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            x.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (x[row] - s) / m[row * n + row];
    }
    Some(x)
}

/// Numerical rank of a row-major `rows x cols` matrix (complete pivoting).
pub(crate) fn rank(rows: usize, cols: usize, a: &[f64], tol: f64) -> usize {
    let mut m: Vec<f64> = a.to_vec();
    let mut rank = 0;
    let mut used_cols = alloc::vec![false; cols];
    for r in 0..rows {
        let mut best = (0.0, r, usize::MAX);
        for rr in r..rows {
            for c in (0..cols).filter(|&c| !used_cols[c]) {
                let v = m[rr * cols + c].abs();
                if v > best.0 {
                    best = (v, rr, c);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        let (_, pr, pc) = best;
        for k in 0..cols {
            m.swap(pr * cols + k, r * cols + k);
        }
        used_cols[pc] = true;
        for rr in r + 1..rows {
            let f = m[rr * cols + pc] / m[r * cols + pc];
            for k in 0..cols {
                m[rr * cols + k] -= f * m[r * cols + k];
            }
        }
        rank += 1;
    }
    rank
}

/// `V(x, y, z) = (y - x)(z - y)(z - x)`.
pub(crate) fn vandermonde3(x: f64, y: f64, z: f64) -> f64 {
    (y - x) * (z - y) * (z - x)
}
