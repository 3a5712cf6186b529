//! B-spline basis evaluation on a clamped knot vector.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::knots::{greville_grid, GrevilleGrid, KnotVector};

#[derive(Debug)]
struct SpaceData {
    knots: KnotVector,
    grid: GrevilleGrid,
}

/// Spline space `S_m([a,b], T)` together with its Greville data.
///
/// Cloning is cheap; the knot vector and grid are shared.
#[derive(Debug, Clone)]
pub struct SplineSpace(Arc<SpaceData>);

impl PartialEq for SplineSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.knots == other.0.knots
    }
}

impl SplineSpace {
    pub fn new(knots: KnotVector) -> Result<Self> {
        let grid = greville_grid(&knots)?;
        Ok(SplineSpace(Arc::new(SpaceData { knots, grid })))
    }

    pub fn knots(&self) -> &KnotVector {
        &self.0.knots
    }

    pub fn grid(&self) -> &GrevilleGrid {
        &self.0.grid
    }

    pub fn degree(&self) -> usize {
        self.0.knots.degree()
    }

    pub fn dim(&self) -> usize {
        self.0.knots.dim()
    }

    pub fn a(&self) -> f64 {
        self.0.knots.a()
    }

    pub fn b(&self) -> f64 {
        self.0.knots.b()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x >= self.a() && x <= self.b() {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x,
                a: self.a(),
                b: self.b(),
            })
        }
    }

    fn span(&self, x: f64) -> usize {
        find_span(self.knots().as_slice(), self.degree(), self.dim(), x)
    }

    /// Values of the `m + 1` basis functions that may be nonzero at `x`,
    /// together with the index of the first one.
    pub fn eval_basis(&self, x: f64) -> Result<(usize, Vec<f64>)> {
        self.check_domain(x)?;
        let m = self.degree();
        let span = self.span(x);
        let mut values = vec![0.0; m + 1];
        basis_funs(self.knots().as_slice(), m, span, x, &mut values);
        Ok((span - m, values))
    }

    /// `order`-th derivatives of the active basis functions at `x`.
    ///
    /// Orders above the degree give zeros.
    pub fn eval_basis_derivative(&self, x: f64, order: usize) -> Result<(usize, Vec<f64>)> {
        self.check_domain(x)?;
        let m = self.degree();
        let span = self.span(x);
        if order > m {
            return Ok((span - m, vec![0.0; m + 1]));
        }
        let ders = ders_basis_funs(self.knots().as_slice(), m, span, x, order);
        Ok((span - m, ders[order].clone()))
    }

    /// `int_a^b B_j = (t_{j+1} - t_{j-m}) / (m + 1)`.
    pub fn basis_integral(&self, j: usize) -> Result<f64> {
        if j >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.dim(),
            });
        }
        let kv = self.knots();
        let m = self.degree();
        Ok((kv.t(j as isize + 1) - kv.t(j as isize - m as isize)) / (m + 1) as f64)
    }

    pub fn basis_integrals(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.basis_integral(j).unwrap())
            .collect()
    }
}

/// Span index `u` (into the full knot slice) with `U[u] <= x < U[u+1]`,
/// using the last nonempty span when `x` equals the right end.
pub(crate) fn find_span(knots: &[f64], degree: usize, ncoef: usize, x: f64) -> usize {
    if x >= knots[ncoef] {
        return ncoef - 1;
    }
    if x <= knots[degree] {
        return degree;
    }
    let (mut low, mut high) = (degree, ncoef);
    let mut mid = (low + high) / 2;
    while x < knots[mid] || x >= knots[mid + 1] {
        if x < knots[mid] {
            high = mid;
        } else {
            low = mid;
        }
        mid = (low + high) / 2;
    }
    mid
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Nonzero basis functions of the given degree on `span` (Cox-de Boor).
pub(crate) fn basis_funs(knots: &[f64], degree: usize, span: usize, x: f64, out: &mut [f64]) {
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    out[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = safe_div(out[r], right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

/// Basis functions and their derivatives up to `order` on `span`.
/// Row `k` holds the `k`-th derivatives of the `degree + 1` active functions.
fn ders_basis_funs(
    knots: &[f64],
    degree: usize,
    span: usize,
    x: f64,
    order: usize,
) -> Vec<Vec<f64>> {
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle holds knot differences
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = safe_div(ndu[r][j - 1], ndu[j][r]);
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; order + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=order {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = safe_div(a[s1][0], ndu[pk + 1][rk as usize]);
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = safe_div(a[s1][j] - a[s1][j - 1], ndu[pk + 1][idx]);
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = safe_div(-a[s1][k - 1], ndu[pk + 1][r]);
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            core::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= p.saturating_sub(k) as f64;
    }
    ders
}

/// A spline `sum_j c_j B_j` in a given space.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFunction {
    space: SplineSpace,
    coefficients: Vec<f64>,
}

impl SplineFunction {
    pub fn new(space: SplineSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.dim() {
            return Err(Error::SampleCount {
                expected: space.dim(),
                got: coefficients.len(),
            });
        }
        Ok(SplineFunction {
            space,
            coefficients,
        })
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Value of the `order`-th derivative at `x`.
    ///
    /// Derivatives come from differencing the active coefficients, so they
    /// are exact up to rounding; orders above the degree give 0.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        self.space.check_domain(x)?;
        let m = self.space.degree();
        if order > m {
            return Ok(0.0);
        }
        let knots = self.space.knots().as_slice();
        let span = self.space.span(x);
        let first = span - m;
        let mut d: Vec<f64> = self.coefficients[first..=span].to_vec();
        for r in 1..=order {
            for i in (r..=m).rev() {
                let den = knots[span + i + 1 - r] - knots[span + i - m];
                d[i] = (m - r + 1) as f64 * safe_div(d[i] - d[i - 1], den);
            }
        }
        let mut basis = vec![0.0; m - order + 1];
        basis_funs(knots, m - order, span, x, &mut basis);
        Ok(basis.iter().zip(&d[order..]).map(|(b, c)| b * c).sum())
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.eval(x, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::{generate_partition, make_clamped_knots, PartitionSpec};
    use approx::assert_relative_eq;

    fn space(a: f64, b: f64, interior: &[f64], m: usize) -> SplineSpace {
        SplineSpace::new(make_clamped_knots(a, b, interior, m).unwrap()).unwrap()
    }

    #[test]
    fn clamped_left_end() {
        let s = space(0.0, 3.0, &[1.0, 2.0], 3);
        let (first, values) = s.eval_basis(0.0).unwrap();
        assert_eq!(first, 0);
        assert_eq!(values[0], 1.0);
        assert!(values[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn right_end_is_last_span() {
        let s = space(0.0, 3.0, &[1.0, 2.0], 2);
        let (first, values) = s.eval_basis(3.0).unwrap();
        assert_eq!(first, s.dim() - 3);
        assert_eq!(values[2], 1.0);
    }

    #[test]
    fn hat_functions() {
        let s = space(0.0, 2.0, &[1.0], 1);
        let (first, values) = s.eval_basis(0.5).unwrap();
        assert_eq!(first, 0);
        assert_eq!(values, [0.5, 0.5]);
    }

    #[test]
    fn quadratic_at_uniform_knot() {
        let kv = generate_partition(&PartitionSpec::uniform(0.0, 6.0, 6), 2).unwrap();
        let s = SplineSpace::new(kv).unwrap();
        let (first, values) = s.eval_basis(3.0).unwrap();
        // cardinal quadratic B-spline at its knots: 1/2, 1/2, 0
        assert_eq!(first, 3);
        assert_relative_eq!(values[0], 0.5);
        assert_relative_eq!(values[1], 0.5);
        assert_eq!(values[2], 0.0);
    }

    #[test]
    fn outside_domain() {
        let s = space(0.0, 1.0, &[], 2);
        assert!(matches!(s.eval_basis(1.5), Err(Error::OutOfDomain { .. })));
        let f = SplineFunction::new(s.clone(), vec![1.0; 3]).unwrap();
        assert!(f.eval(-0.1, 0).is_err());
    }

    #[test]
    fn quadratic_integrals() {
        let s = space(0.0, 10.0, &[1.0, 3.0, 6.0], 2);
        let h = s.knots().steps();
        assert_relative_eq!(s.basis_integral(0).unwrap(), h[0] / 3.0);
        // B_2 spans t_0..t_3
        assert_relative_eq!(s.basis_integral(2).unwrap(), (h[0] + h[1] + h[2]) / 3.0);
        let total: f64 = s.basis_integrals().iter().sum();
        assert_relative_eq!(total, 10.0, epsilon = 1e-12);
        assert!(s.basis_integral(s.dim()).is_err());
    }

    #[test]
    fn constant_spline() {
        let s = space(-1.0, 2.0, &[0.0, 0.3, 1.1], 3);
        let f = SplineFunction::new(s.clone(), vec![2.5; s.dim()]).unwrap();
        for x in [-1.0, -0.3, 0.3, 1.7, 2.0] {
            assert_relative_eq!(f.eval(x, 0).unwrap(), 2.5, epsilon = 1e-14);
            assert!(f.eval(x, 1).unwrap().abs() < 1e-12);
        }
        assert_eq!(f.eval(0.5, 4).unwrap(), 0.0);
    }

    #[test]
    fn basis_derivative_orders_above_degree() {
        let s = space(0.0, 1.0, &[0.5], 2);
        let (_, v) = s.eval_basis_derivative(0.3, 3).unwrap();
        assert!(v.iter().all(|&d| d == 0.0));
    }
}
