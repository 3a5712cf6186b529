//! Near-best discrete quasi-interpolants.
//!
//! For each basis index `i` the weights `lambda_i(s)`, `-p <= s <= p`, are
//! chosen to minimize `|lambda_i|_1` subject to exactness on `P_q`:
//!
//! ```text
//! sum_s lambda_i(s) theta_{i+s}^r = theta_i^{(r)},   0 <= r <= q.
//! ```
//!
//! The problem is solved as a linear program in split variables. For
//! `q = 2` the three-point weights on `{-p, 0, p}` are feasible, and an
//! explicit dual vector can prove them optimal when the Greville sites are
//! balanced enough around `theta_i` (see [`knot_condition`]).
//!
//! Sites are shifted by `theta_i` and scaled by the window width before the
//! constraint matrix is formed; the weights are invariant under that affine
//! change of variable.

use alloc::vec;
use alloc::vec::Vec;

use crate::bspline::SplineSpace;
use crate::error::{Error, Result};
use crate::linalg;
use crate::quasi_interp::{three_point_weights, OperatorKind, QuasiInterpolant, Stencil};
use crate::simplex::{self, LpOutcome};

/// Exactness constraints `V lambda = b` for one basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub center: usize,
    /// First and last site index of the window.
    pub lo: usize,
    pub hi: usize,
    pub q: usize,
    /// Raw Greville abscissae of the window.
    pub sites: Vec<f64>,
    pub origin: f64,
    pub scale: f64,
    /// Row-major `(q+1) x sites.len()` matrix of powers of the scaled sites.
    pub matrix: Vec<f64>,
    /// Scaled centered moments of the center index.
    pub rhs: Vec<f64>,
    /// Unscaled moments `theta_i^{(r)}`.
    pub raw_rhs: Vec<f64>,
}

impl ConstraintSystem {
    pub fn rows(&self) -> usize {
        self.q + 1
    }

    pub fn cols(&self) -> usize {
        self.sites.len()
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> + '_ {
        (self.lo..=self.hi).map(move |j| j as isize - self.center as isize)
    }

    pub fn entry(&self, r: usize, k: usize) -> f64 {
        self.matrix[r * self.cols() + k]
    }

    /// Max-norm residual `|V lambda - b|` in scaled coordinates.
    pub fn residual(&self, lambda: &[f64]) -> f64 {
        (0..self.rows())
            .map(|r| {
                let lhs: f64 = (0..self.cols()).map(|k| self.entry(r, k) * lambda[k]).sum();
                (lhs - self.rhs[r]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Residual of the unscaled equations `sum lambda theta^r = theta^{(r)}`,
    /// each row relative to `max(1, |theta_i^{(r)}|, sum |lambda theta^r|)`.
    pub fn raw_residual(&self, lambda: &[f64]) -> f64 {
        (0..self.rows())
            .map(|r| {
                let terms = self
                    .sites
                    .iter()
                    .zip(lambda)
                    .map(|(t, l)| l * libm::pow(*t, r as f64));
                let (sum, mag) = terms.fold((0.0, 0.0), |(s, a), v| (s + v, a + v.abs()));
                (sum - self.raw_rhs[r]).abs() / mag.max(self.raw_rhs[r].abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Constraints on the full window `{i-p, ..., i+p}`.
pub fn assemble_constraints(
    space: &SplineSpace,
    i: usize,
    p: usize,
    q: usize,
) -> Result<ConstraintSystem> {
    let lo = i as isize - p as isize;
    let hi = i as isize + p as isize;
    if lo < 0 || hi >= space.dim() as isize {
        return Err(Error::WindowOutOfRange { center: i, lo, hi });
    }
    if q > 2 * p {
        return Err(Error::ExactnessTooHigh { q, max: 2 * p });
    }
    assemble_window(space, i, lo as usize, hi as usize, q)
}

/// Constraints on an arbitrary window `lo..=hi` containing `i`.
pub fn assemble_window(
    space: &SplineSpace,
    i: usize,
    lo: usize,
    hi: usize,
    q: usize,
) -> Result<ConstraintSystem> {
    let dim = space.dim();
    if !(lo <= i && i <= hi && hi < dim) {
        return Err(Error::WindowOutOfRange {
            center: i,
            lo: lo as isize,
            hi: hi as isize,
        });
    }
    let m = space.degree();
    let width = hi - lo;
    if q > m || q > width {
        return Err(Error::ExactnessTooHigh {
            q,
            max: m.min(width),
        });
    }
    let grid = space.grid();
    let sites: Vec<f64> = (lo..=hi).map(|j| grid.theta(j)).collect();
    let origin = grid.theta(i);
    let scale = if width == 0 {
        1.0
    } else {
        sites[width] - sites[0]
    };
    let cols = sites.len();
    let mut matrix = vec![0.0; (q + 1) * cols];
    for (k, t) in sites.iter().enumerate() {
        let x = (t - origin) / scale;
        let mut power = 1.0;
        for r in 0..=q {
            matrix[r * cols + k] = power;
            power *= x;
        }
    }
    let mut rhs = Vec::with_capacity(q + 1);
    let mut s = 1.0;
    for r in 0..=q {
        rhs.push(grid.centered_moment(i, r) / s);
        s *= scale;
    }
    let raw_rhs = (0..=q).map(|r| grid.moment(i, r)).collect();
    let sys = ConstraintSystem {
        center: i,
        lo,
        hi,
        q,
        sites,
        origin,
        scale,
        matrix,
        rhs,
        raw_rhs,
    };
    let mag = sys.matrix.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if linalg::rank(sys.rows(), cols, &sys.matrix, 1e-12 * mag) < q + 1 {
        return Err(Error::RankDeficient);
    }
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Solution {
    pub weights: Vec<f64>,
    pub value: f64,
    pub status: L1Status,
    pub iterations: usize,
}

/// Global minimizer of `|lambda|_1` subject to `V lambda = b`.
///
/// Writes `lambda = u - w` with `u, w >= 0` and runs a two-phase simplex
/// with Bland's rule. The optimizer need not be unique; the value is.
pub fn solve_l1(sys: &ConstraintSystem) -> Result<L1Solution> {
    let rows = sys.rows();
    let k = sys.cols();
    let cols = 2 * k;
    let mut a = vec![0.0; rows * cols];
    for r in 0..rows {
        for j in 0..k {
            let v = sys.entry(r, j);
            a[r * cols + j] = v;
            a[r * cols + k + j] = -v;
        }
    }
    let cost = vec![1.0; cols];
    let cap = 10 * cols;
    match simplex::minimize(rows, cols, &a, &sys.rhs, &cost, cap) {
        LpOutcome::Optimal { x, iterations, .. } => {
            let weights: Vec<f64> = (0..k).map(|j| x[j] - x[k + j]).collect();
            let value = weights.iter().map(|w| w.abs()).sum();
            Ok(L1Solution {
                weights,
                value,
                status: L1Status::Optimal,
                iterations,
            })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible),
        LpOutcome::Unbounded => Err(Error::Unbounded),
        LpOutcome::IterationLimit => Err(Error::IterationCap { cap }),
    }
}

/// Affine parametrization `lambda = lambda* - A tilde_lambda` of the weights
/// exact on P2, with the free weights on `K = {-p+1..-1} u {1..p-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WatsonForm {
    pub center: usize,
    pub p: usize,
    /// Row-major `(2p+1) x (2p-2)`; row `r + p` belongs to offset `r`.
    pub matrix: Vec<f64>,
    /// Three-point weights on `{-p, 0, p}` padded with zeros.
    pub base: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl WatsonForm {
    pub fn rows(&self) -> usize {
        2 * self.p + 1
    }

    pub fn cols(&self) -> usize {
        self.alpha.len()
    }

    /// Offsets of the free weights, in column order.
    pub fn free_offsets(&self) -> Vec<isize> {
        let p = self.p as isize;
        (-p + 1..=-1).chain(1..p).collect()
    }

    pub fn entry(&self, offset: isize, col: usize) -> f64 {
        self.matrix[(offset + self.p as isize) as usize * self.cols() + col]
    }

    /// `lambda* - A tilde`.
    pub fn weights_for(&self, free: &[f64]) -> Vec<f64> {
        let c = self.cols();
        (0..self.rows())
            .map(|r| {
                self.base[r]
                    - (0..c)
                        .map(|k| self.matrix[r * c + k] * free[k])
                        .sum::<f64>()
            })
            .collect()
    }

    /// `|A^T v|_inf`.
    pub fn transpose_residual(&self, v: &[f64]) -> f64 {
        let c = self.cols();
        (0..c)
            .map(|k| {
                (0..self.rows())
                    .map(|r| self.matrix[r * c + k] * v[r])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

fn full_window(space: &SplineSpace, i: usize, p: usize) -> Result<()> {
    let lo = i as isize - p as isize;
    let hi = i as isize + p as isize;
    if p == 0 || lo < 0 || hi >= space.dim() as isize {
        return Err(Error::WindowOutOfRange { center: i, lo, hi });
    }
    Ok(())
}

pub fn build_watson_form(space: &SplineSpace, i: usize, p: usize) -> Result<WatsonForm> {
    full_window(space, i, p)?;
    let grid = space.grid();
    let origin = grid.theta(i);
    let width = grid.theta(i + p) - grid.theta(i - p);
    let x = |offset: isize| (grid.theta((i as isize + offset) as usize) - origin) / width;
    let pi = p as isize;
    let (left, right) = (x(-pi), x(pi));
    let det = linalg::vandermonde3(left, 0.0, right);

    let lambda = three_point_weights(left, 0.0, right, grid.spread(i) / (width * width));
    let mut base = vec![0.0; 2 * p + 1];
    base[0] = lambda[0];
    base[p] = lambda[1];
    base[2 * p] = lambda[2];

    let free: Vec<isize> = (-pi + 1..=-1).chain(1..pi).collect();
    let cols = free.len();
    let mut matrix = vec![0.0; (2 * p + 1) * cols];
    let (mut alpha, mut beta, mut gamma) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &r) in free.iter().enumerate() {
        let xr = x(r);
        let row = |offset: isize| (offset + pi) as usize * cols + k;
        if r < 0 {
            let a = linalg::vandermonde3(xr, 0.0, right) / det;
            let b = linalg::vandermonde3(left, xr, right) / det;
            let g = linalg::vandermonde3(left, xr, 0.0) / det;
            matrix[row(-pi)] = a;
            matrix[row(0)] = b;
            matrix[row(pi)] = -g;
            alpha.push(a);
            beta.push(b);
            gamma.push(g);
        } else {
            let a = linalg::vandermonde3(0.0, xr, right) / det;
            let b = linalg::vandermonde3(left, xr, right) / det;
            let g = linalg::vandermonde3(left, 0.0, xr) / det;
            matrix[row(-pi)] = -a;
            matrix[row(0)] = b;
            matrix[row(pi)] = g;
            alpha.push(a);
            beta.push(b);
            gamma.push(g);
        }
        matrix[row(r)] = -1.0;
    }
    Ok(WatsonForm {
        center: i,
        p,
        matrix,
        base,
        alpha,
        beta,
        gamma,
    })
}

/// `theta_{i-1} + theta_i <= theta_{i-p} + theta_{i+p} <= theta_i + theta_{i+1}`,
/// with a relative slack of `1e-12`.
pub fn knot_condition(space: &SplineSpace, i: usize, p: usize) -> Result<bool> {
    full_window(space, i, p)?;
    let g = space.grid();
    let t = |j: usize| g.theta(j);
    let outer = t(i - p) + t(i + p);
    let tol = 1e-12 * t(i - p).abs().max(t(i + p).abs()).max(1.0);
    Ok(t(i - 1) + t(i) <= outer + tol && outer <= t(i) + t(i + 1) + tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Dual vector indexed by offset `-p..=p`.
    pub vector: Vec<f64>,
    pub max_abs: f64,
    /// `|A^T v|_inf`.
    pub residual: f64,
    /// Sign agreement with `lambda*` at offsets `-p`, `0`, `p`.
    pub sign_matches: [bool; 3],
    /// Scale used for the residual test.
    pub scale: f64,
}

impl Certificate {
    /// True when the vector proves the three-point weights l1-optimal.
    pub fn passes(&self) -> bool {
        self.max_abs <= 1.0 + 1e-12
            && self.residual <= 1e-10 * self.scale
            && self.sign_matches.iter().all(|&s| s)
    }

    /// Index (offset) of the worst entry on the free positions, if any exceeds 1.
    pub fn violation(&self) -> Option<(isize, f64)> {
        let p = (self.vector.len() / 2) as isize;
        self.vector
            .iter()
            .enumerate()
            .map(|(k, v)| (k as isize - p, v.abs()))
            .filter(|&(o, v)| o != -p && o != 0 && o != p && v > 1.0 + 1e-12)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Dual point `y` with `V^T y = v` for the scaled system on the same
    /// window, obtained from the three support columns.
    pub fn dual_point(&self, sys: &ConstraintSystem) -> Result<Vec<f64>> {
        if sys.q != 2 || sys.cols() != self.vector.len() {
            return Err(Error::UnsupportedKind(
                "dual point needs the full q = 2 window",
            ));
        }
        let last = sys.cols() - 1;
        let cols = [0, last / 2, last];
        let mut a = [0.0; 9];
        for (row, &k) in cols.iter().enumerate() {
            for r in 0..3 {
                a[row * 3 + r] = sys.entry(r, k);
            }
        }
        let rhs: Vec<f64> = cols.iter().map(|&k| self.vector[k]).collect();
        linalg::solve(3, &a, &rhs, 1e-300).ok_or(Error::RankDeficient)
    }
}

/// Explicit dual vector for the three-point weights: `v = (-1, 1, -1)` on
/// `{-p, 0, p}` and the values forced by `A^T v = 0` on the free positions.
pub fn watson_certificate(space: &SplineSpace, i: usize, p: usize) -> Result<Certificate> {
    let form = build_watson_form(space, i, p)?;
    let mut vector = vec![0.0; 2 * p + 1];
    vector[0] = -1.0;
    vector[p] = 1.0;
    vector[2 * p] = -1.0;
    for (k, &r) in form.free_offsets().iter().enumerate() {
        let idx = (r + p as isize) as usize;
        vector[idx] = if r < 0 {
            -form.alpha[k] + form.beta[k] + form.gamma[k]
        } else {
            form.alpha[k] + form.beta[k] - form.gamma[k]
        };
    }
    let sign_ok = |lambda: f64, v: f64| lambda == 0.0 || lambda.signum() == v.signum();
    let sign_matches = [
        sign_ok(form.base[0], vector[0]),
        sign_ok(form.base[p], vector[p]),
        sign_ok(form.base[2 * p], vector[2 * p]),
    ];
    let scale = form.matrix.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    Ok(Certificate {
        max_abs: vector.iter().fold(0.0, |a, v| a.max(v.abs())),
        residual: form.transpose_residual(&vector),
        vector,
        sign_matches,
        scale,
    })
}

/// One local l1 problem and its solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolve {
    pub system: ConstraintSystem,
    pub solution: L1Solution,
}

/// Solves the local problems for every basis index. Windows are clamped to
/// the index set near the ends of the interval.
pub fn local_solves(space: &SplineSpace, p: usize, q: usize) -> Result<Vec<LocalSolve>> {
    let m = space.degree();
    if q > m.min(2 * p) {
        return Err(Error::ExactnessTooHigh {
            q,
            max: m.min(2 * p),
        });
    }
    if p < m {
        log::warn!("half-width p = {p} below degree m = {m}: no uniform bound is known");
    }
    let dim = space.dim();
    (0..dim)
        .map(|i| {
            let lo = i.saturating_sub(p);
            let hi = (i + p).min(dim - 1);
            let system = assemble_window(space, i, lo, hi, q).map_err(|e| e.at(i))?;
            let solution = solve_l1(&system).map_err(|e| e.at(i))?;
            Ok(LocalSolve { system, solution })
        })
        .collect()
}

/// Near-best operator: per-index l1-optimal weights exact on `P_q`.
///
/// `interior_norm_bound()` of the result is `nu_1^*` over the stencils that
/// only see simple knots.
pub fn build_nearbest_qi(space: &SplineSpace, p: usize, q: usize) -> Result<QuasiInterpolant> {
    let solves = local_solves(space, p, q)?;
    let stencils = solves
        .into_iter()
        .map(|ls| {
            let i = ls.system.center;
            let shifted = ls.system.lo + p != i || ls.system.hi != i + p;
            let offsets = ls.system.offsets().collect();
            Stencil::new(space, i, offsets, ls.solution.weights, shifted)
        })
        .collect();
    QuasiInterpolant::from_stencils(space.clone(), OperatorKind::NearBest { p, q }, q, stencils)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::{generate_partition, PartitionFamily, PartitionSpec};
    use approx::assert_relative_eq;

    fn uniform(m: usize, n: usize) -> SplineSpace {
        SplineSpace::new(generate_partition(&PartitionSpec::uniform(0.0, 1.0, n), m).unwrap())
            .unwrap()
    }

    #[test]
    fn partition_of_unity_row() {
        let s = uniform(2, 10);
        let sys = assemble_constraints(&s, 5, 2, 0).unwrap();
        assert_eq!(sys.rows(), 1);
        assert!(sys.matrix.iter().all(|&v| v == 1.0));
        assert_eq!(sys.rhs, [1.0]);
        let sol = solve_l1(&sys).unwrap();
        assert_relative_eq!(sol.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn three_by_three_unique() {
        let s = uniform(2, 10);
        let sys = assemble_constraints(&s, 5, 1, 2).unwrap();
        let sol = solve_l1(&sys).unwrap();
        assert_relative_eq!(sol.value, 1.5, epsilon = 1e-13);
        for (w, want) in sol.weights.iter().zip([-0.125, 1.25, -0.125]) {
            assert_relative_eq!(*w, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn uniform_quadratic_optimum() {
        let s = uniform(2, 12);
        let sys = assemble_constraints(&s, 6, 2, 2).unwrap();
        let sol = solve_l1(&sys).unwrap();
        assert_relative_eq!(sol.value, 9.0 / 8.0, epsilon = 1e-12);
        assert!(sol.iterations <= 10 * (4 * 2 + 2));
        let cert = watson_certificate(&s, 6, 2).unwrap();
        assert!(cert.passes(), "{cert:?}");
    }

    #[test]
    fn window_errors() {
        let s = uniform(2, 6);
        assert!(matches!(
            assemble_constraints(&s, 1, 2, 2),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            assemble_constraints(&s, 3, 1, 3),
            Err(Error::ExactnessTooHigh { .. })
        ));
        assert!(knot_condition(&s, 0, 1).is_err());
    }

    #[test]
    fn watson_column_relations() {
        let spec = PartitionSpec::new(
            PartitionFamily::Random {
                seed: 3,
                spread: 5.0,
            },
            0.0,
            1.0,
            20,
        );
        let s = SplineSpace::new(generate_partition(&spec, 3).unwrap()).unwrap();
        let form = build_watson_form(&s, 10, 4).unwrap();
        assert_eq!(form.cols(), 6);
        for (k, r) in form.free_offsets().into_iter().enumerate() {
            let (a, b, g) = (form.alpha[k], form.beta[k], form.gamma[k]);
            if r < 0 {
                assert_relative_eq!(b, 1.0 - a + g, epsilon = 1e-12);
            } else {
                assert_relative_eq!(b, 1.0 + a - g, epsilon = 1e-12);
            }
            assert_eq!(form.entry(r, k), -1.0);
        }
    }

    #[test]
    fn degenerate_watson_form() {
        let s = uniform(2, 8);
        let form = build_watson_form(&s, 4, 1).unwrap();
        assert_eq!(form.cols(), 0);
        assert_eq!(form.weights_for(&[]), form.base);
    }

    #[test]
    fn uniform_knot_condition() {
        let s = uniform(3, 20);
        for p in 1..5 {
            for i in p..s.dim() - p {
                let interior = i >= p + 2 && i + p <= 20;
                if interior {
                    assert!(knot_condition(&s, i, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn geometric_condition_fails() {
        let spec = PartitionSpec::new(PartitionFamily::Geometric { ratio: 4.0 }, 0.0, 1.0, 12);
        let s = SplineSpace::new(generate_partition(&spec, 2).unwrap()).unwrap();
        let any_false = (3..s.dim() - 3).any(|i| !knot_condition(&s, i, 3).unwrap());
        assert!(any_false);
    }

    #[test]
    fn nearbest_uniform() {
        let s = uniform(2, 30);
        let qi = build_nearbest_qi(&s, 2, 2).unwrap();
        assert_relative_eq!(qi.interior_norm_bound().unwrap(), 1.125, epsilon = 1e-10);
        let q0 = build_nearbest_qi(&s, 2, 0).unwrap();
        assert_relative_eq!(q0.norm_upper_bound(), 1.0, epsilon = 1e-14);
    }
}
