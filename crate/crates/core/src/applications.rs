//! Quadrature, differentiation matrices and convergence studies built on
//! the quasi-interpolants.

use alloc::vec;
use alloc::vec::Vec;

use crate::bspline::{SplineFunction, SplineSpace};
use crate::error::{Error, Result};
use crate::knots::{generate_partition, PartitionSpec};
use crate::nearbest::build_nearbest_qi;
use crate::quasi_interp::{
    build_q2star, build_qp2star, DerivativeOracle, DifferentialQi, OperatorKind, QuasiInterpolant,
};

/// Rule `int_a^b f ~ sum_j w_j f(theta_j)` obtained by integrating `Qf`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.weights.len() {
            return Err(Error::SampleCount {
                expected: self.weights.len(),
                got: samples.len(),
            });
        }
        Ok(self.weights.iter().zip(samples).map(|(w, f)| w * f).sum())
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| w * f(x))
            .sum()
    }
}

/// `w_j = sum_i lambda_i(j - i) int B_i`.
pub fn quadrature_from_qi(qi: &QuasiInterpolant) -> QuadratureRule {
    let space = qi.space();
    let integrals = space.basis_integrals();
    let mut weights = vec![0.0; space.dim()];
    for (st, int_b) in qi.stencils().iter().zip(&integrals) {
        for (j, w) in st.sites().zip(&st.weights) {
            weights[j] += w * int_b;
        }
    }
    QuadratureRule {
        nodes: qi.sample_sites().to_vec(),
        weights,
        exactness: qi.exactness(),
    }
}

/// Maps samples at the Greville sites to `(Qf)'` at the same sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiationMatrix {
    size: usize,
    entries: Vec<f64>,
    interior_rows: Vec<bool>,
}

impl DifferentiationMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    /// Rows whose value only involves interior stencils.
    pub fn is_interior_row(&self, i: usize) -> bool {
        self.interior_rows[i]
    }

    /// `max |i - j|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        let mut band = 0;
        for i in 0..self.size {
            for j in 0..self.size {
                if self.get(i, j) != 0.0 {
                    band = band.max(i.abs_diff(j));
                }
            }
        }
        band
    }

    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.size {
            return Err(Error::SampleCount {
                expected: self.size,
                got: samples.len(),
            });
        }
        Ok((0..self.size)
            .map(|i| self.row(i).iter().zip(samples).map(|(d, f)| d * f).sum())
            .collect())
    }
}

/// `D[i][j] = sum_k lambda_k(j - k) B'_k(theta_i)`.
pub fn differentiation_matrix(qi: &QuasiInterpolant) -> Result<DifferentiationMatrix> {
    let space = qi.space();
    if space.degree() < 2 {
        return Err(Error::InvalidDegree {
            got: space.degree(),
            min: 2,
        });
    }
    let size = space.dim();
    let mut entries = vec![0.0; size * size];
    let mut interior_rows = vec![true; size];
    for i in 0..size {
        let (first, ders) = space.eval_basis_derivative(space.grid().theta(i), 1)?;
        for (offset, d) in ders.into_iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let st = &qi.stencils()[first + offset];
            interior_rows[i] &= st.interior;
            for (j, w) in st.sites().zip(&st.weights) {
                entries[i * size + j] += w * d;
            }
        }
    }
    Ok(DifferentiationMatrix {
        size,
        entries,
        interior_rows,
    })
}

/// Smooth test functions with closed-form derivatives and integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Sin,
    Exp,
    /// `1 / (1 + 25 x^2)`.
    Runge,
    Monomial(u32),
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Sin => "sin",
            TestFunction::Exp => "exp",
            TestFunction::Runge => "runge",
            TestFunction::Monomial(_) => "monomial",
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Sin => libm::sin(x),
            TestFunction::Exp => libm::exp(x),
            TestFunction::Runge => 1.0 / (1.0 + 25.0 * x * x),
            TestFunction::Monomial(k) => libm::pow(x, k as f64),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mut out = [0.0; 2];
        self.fill_derivatives(x, &mut out);
        out[1]
    }

    fn fill_derivatives(&self, x: f64, out: &mut [f64]) {
        match *self {
            TestFunction::Sin => {
                let (s, c) = (libm::sin(x), libm::cos(x));
                for (l, slot) in out.iter_mut().enumerate() {
                    *slot = [s, c, -s, -c][l % 4];
                }
            }
            TestFunction::Exp => out.iter_mut().for_each(|v| *v = libm::exp(x)),
            TestFunction::Runge => {
                // Taylor coefficients of 1/g with g(x+h) = g0 + g1 h + g2 h^2
                let (g0, g1, g2) = (1.0 + 25.0 * x * x, 50.0 * x, 25.0);
                let mut coef: Vec<f64> = Vec::with_capacity(out.len());
                let mut fact = 1.0;
                for l in 0..out.len() {
                    let mut c = if l == 0 { 1.0 } else { 0.0 };
                    if l >= 1 {
                        c -= g1 * coef[l - 1];
                    }
                    if l >= 2 {
                        c -= g2 * coef[l - 2];
                    }
                    coef.push(c / g0);
                    if l > 0 {
                        fact *= l as f64;
                    }
                    out[l] = coef[l] * fact;
                }
            }
            TestFunction::Monomial(k) => {
                let k = k as usize;
                for (l, slot) in out.iter_mut().enumerate() {
                    *slot = if l > k {
                        0.0
                    } else {
                        let falling: f64 = (0..l).map(|i| (k - i) as f64).product();
                        falling * libm::pow(x, (k - l) as f64)
                    };
                }
            }
        }
    }

    /// `int_a^b f`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            TestFunction::Sin => libm::cos(a) - libm::cos(b),
            TestFunction::Exp => libm::exp(b) - libm::exp(a),
            TestFunction::Runge => (libm::atan(5.0 * b) - libm::atan(5.0 * a)) / 5.0,
            TestFunction::Monomial(k) => {
                let e = (k + 1) as f64;
                (libm::pow(b, e) - libm::pow(a, e)) / e
            }
        }
    }
}

impl DerivativeOracle for TestFunction {
    fn derivatives(&self, x: f64, out: &mut [f64]) -> Result<()> {
        self.fill_derivatives(x, out);
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Oracle { x })
        }
    }
}

/// Which operator to build on each partition of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorRecipe {
    pub kind: OperatorKind,
    pub degree: usize,
}

impl OperatorRecipe {
    pub fn build(&self, space: &SplineSpace) -> Result<QuasiInterpolant> {
        match self.kind {
            OperatorKind::Q2Star => build_q2star(space),
            OperatorKind::Qp2Star { p } => build_qp2star(space, p),
            OperatorKind::NearBest { p, q } => build_nearbest_qi(space, p, q),
            OperatorKind::Dqi => Err(Error::UnsupportedKind(
                "differential operator has no stencils",
            )),
        }
    }

    /// `Qf` for the recipe's operator on `space`.
    pub fn approximate(&self, space: &SplineSpace, f: &TestFunction) -> Result<SplineFunction> {
        match self.kind {
            OperatorKind::Dqi => DifferentialQi::new(space).apply(f),
            _ => self.build(space)?.apply_fn(|x| f.value(x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub intervals: usize,
    pub h_max: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h_max` over the finest
    /// half of the rows; `None` when an error vanishes.
    pub fitted_order: Option<f64>,
}

impl ConvergenceReport {
    fn from_rows(rows: Vec<ConvergenceRow>) -> Self {
        let h: Vec<f64> = rows.iter().map(|r| r.h_max).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let fitted_order = fit_order(&h, &e);
        ConvergenceReport { rows, fitted_order }
    }

    /// Order between each row and the previous one (`None` for the first).
    pub fn running_orders(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            out.push(fit_order(
                &[w[0].h_max, w[1].h_max],
                &[w[0].error, w[1].error],
            ));
        }
        out.truncate(self.rows.len());
        out
    }
}

/// Least-squares slope of `log e` vs `log h` over the last `ceil(len/2)`
/// points (at least two).
pub fn fit_order(h: &[f64], e: &[f64]) -> Option<f64> {
    let len = h.len().min(e.len());
    if len < 2 {
        return None;
    }
    let take = len.div_ceil(2).max(2);
    let pts: Vec<(f64, f64)> = h[len - take..len]
        .iter()
        .zip(&e[len - take..len])
        .map(|(&h, &e)| (libm::log(h), libm::log(e)))
        .collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Ten equal subintervals per knot interval, knots included.
pub(crate) fn evaluation_grid(space: &SplineSpace) -> Vec<f64> {
    let bp = space.knots().breakpoints();
    let mut pts = Vec::with_capacity(10 * bp.len());
    for w in bp.windows(2) {
        for k in 0..10 {
            pts.push(w[0] + (w[1] - w[0]) * k as f64 / 10.0);
        }
    }
    pts.push(*bp.last().unwrap());
    pts
}

/// Sup-norm error of `Qf - f` over the evaluation grid for each size.
pub fn convergence_study(
    recipe: &OperatorRecipe,
    f: &TestFunction,
    sizes: &[usize],
    template: &PartitionSpec,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let kv = generate_partition(&template.with_intervals(n), recipe.degree)?;
        let h_max = kv.max_step();
        let space = SplineSpace::new(kv)?;
        let approx = recipe.approximate(&space, f)?;
        let mut error: f64 = 0.0;
        for x in evaluation_grid(&space) {
            error = error.max((approx.value(x)? - f.value(x)).abs());
        }
        rows.push(ConvergenceRow {
            intervals: n,
            h_max,
            error,
        });
    }
    Ok(ConvergenceReport::from_rows(rows))
}

/// Max error of the differentiation matrix against `f'` at interior sites.
pub fn differentiation_study(
    recipe: &OperatorRecipe,
    f: &TestFunction,
    sizes: &[usize],
    template: &PartitionSpec,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let kv = generate_partition(&template.with_intervals(n), recipe.degree)?;
        let h_max = kv.max_step();
        let space = SplineSpace::new(kv)?;
        let qi = recipe.build(&space)?;
        let dm = differentiation_matrix(&qi)?;
        let samples: Vec<f64> = qi.sample_sites().iter().map(|&x| f.value(x)).collect();
        let approx = dm.apply(&samples)?;
        let error = (0..dm.size())
            .filter(|&i| dm.is_interior_row(i))
            .map(|i| (approx[i] - f.derivative(qi.sample_sites()[i])).abs())
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            intervals: n,
            h_max,
            error,
        });
    }
    Ok(ConvergenceReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn runge_derivatives_match_closed_form() {
        let mut out = [0.0; 3];
        TestFunction::Runge.derivatives(0.3, &mut out).unwrap();
        let g = 1.0 + 25.0 * 0.09;
        assert_relative_eq!(out[0], 1.0 / g, epsilon = 1e-15);
        assert_relative_eq!(out[1], -50.0 * 0.3 / (g * g), epsilon = 1e-14);
        // f'' = (3750 x^2 - 50) / g^3
        assert_relative_eq!(
            out[2],
            (3750.0 * 0.09 - 50.0) / (g * g * g),
            epsilon = 1e-13
        );
    }

    #[test]
    fn monomial_derivatives() {
        let mut out = [0.0; 5];
        TestFunction::Monomial(3)
            .derivatives(2.0, &mut out)
            .unwrap();
        assert_eq!(out, [8.0, 12.0, 12.0, 6.0, 0.0]);
    }

    #[test]
    fn fit_order_exact_power() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h * h).collect();
        assert_relative_eq!(fit_order(&h, &e).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(fit_order(&h[..1], &e[..1]), None);
        assert_eq!(fit_order(&h, &[1.0, 1.0, 0.0, 0.0]), None);
    }

    #[test]
    fn grid_has_ten_points_per_interval() {
        let kv = generate_partition(&PartitionSpec::uniform(0.0, 1.0, 4), 2).unwrap();
        let g = evaluation_grid(&SplineSpace::new(kv).unwrap());
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn dqi_recipe_has_no_stencils() {
        let kv = generate_partition(&PartitionSpec::uniform(0.0, 1.0, 4), 3).unwrap();
        let s = SplineSpace::new(kv).unwrap();
        let r = OperatorRecipe {
            kind: OperatorKind::Dqi,
            degree: 3,
        };
        assert!(r.build(&s).is_err());
        assert!(r.approximate(&s, &TestFunction::Exp).is_ok());
    }
}
