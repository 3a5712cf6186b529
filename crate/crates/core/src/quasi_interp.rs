//! Quasi-interpolants `Qf = sum_i mu_i(f) B_i`.
//!
//! Discrete operators store one [`Stencil`] per basis index: weights applied
//! to samples of `f` at the Greville abscissae. The differential operator
//! ([`DifferentialQi`]) instead combines derivative values at `theta_i` and
//! reproduces every spline of the space.
//!
//! On a bounded interval the three-point stencils `{-p, 0, p}` are clamped
//! to the index set near the ends and their weights re-solved at the
//! clamped sites; the two extreme indices use plain point evaluation. A
//! stencil is called *interior* when every knot its sample sites depend on
//! is a simple knot, which is the setting where the norm bounds of
//! [`theoretical_bound`] apply.

use alloc::vec;
use alloc::vec::Vec;

use crate::bspline::{SplineFunction, SplineSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Differential QI, exact on the whole spline space.
    Dqi,
    /// Three-point operator on neighbouring Greville sites, exact on P2.
    Q2Star,
    /// Three-point operator on sites `{i-p, i, i+p}`, exact on P2.
    Qp2Star { p: usize },
    /// Weights from the local l1 problems over `{i-p, ..., i+p}`, exact on P_q.
    NearBest { p: usize, q: usize },
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Dqi => "dqi",
            OperatorKind::Q2Star => "q2star",
            OperatorKind::Qp2Star { .. } => "qp2star",
            OperatorKind::NearBest { .. } => "nearbest",
        }
    }
}

/// Coefficient functional `mu_i(f) = sum_k weights[k] f(theta_{i + offsets[k]})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub center: usize,
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
    /// Sites were clamped at the boundary (or collapsed to a point evaluation).
    pub shifted: bool,
    /// All knots touched by the sample sites are simple.
    pub interior: bool,
}

impl Stencil {
    pub(crate) fn new(
        space: &SplineSpace,
        center: usize,
        offsets: Vec<isize>,
        weights: Vec<f64>,
        shifted: bool,
    ) -> Self {
        let lo = center as isize + offsets.iter().copied().min().unwrap_or(0);
        let hi = center as isize + offsets.iter().copied().max().unwrap_or(0);
        let m = space.degree() as isize;
        let n = space.knots().intervals() as isize;
        // site k depends on t_{k-m+1}, ..., t_k
        let interior = !shifted && lo - m + 1 >= 0 && hi <= n;
        Stencil {
            center,
            offsets,
            weights,
            shifted,
            interior,
        }
    }

    pub fn site(&self, k: usize) -> usize {
        (self.center as isize + self.offsets[k]) as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.offsets.len()).map(move |k| self.site(k))
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn apply(&self, samples: &[f64]) -> f64 {
        self.sites()
            .zip(&self.weights)
            .map(|(j, w)| w * samples[j])
            .sum()
    }

    /// Weight on sample `j`, zero when `j` is not a site.
    pub fn weight_at(&self, j: usize) -> f64 {
        self.sites()
            .zip(&self.weights)
            .filter(|(s, _)| *s == j)
            .map(|(_, w)| *w)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiInterpolant {
    space: SplineSpace,
    kind: OperatorKind,
    exactness: usize,
    stencils: Vec<Stencil>,
}

impl QuasiInterpolant {
    pub fn from_stencils(
        space: SplineSpace,
        kind: OperatorKind,
        exactness: usize,
        stencils: Vec<Stencil>,
    ) -> Result<Self> {
        let dim = space.dim();
        if stencils.len() != dim {
            return Err(Error::SampleCount {
                expected: dim,
                got: stencils.len(),
            });
        }
        for (i, st) in stencils.iter().enumerate() {
            if st.center != i || st.offsets.len() != st.weights.len() {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            for k in 0..st.offsets.len() {
                let site = i as isize + st.offsets[k];
                if site < 0 || site >= dim as isize {
                    return Err(Error::IndexOutOfRange { index: i, dim });
                }
            }
        }
        Ok(QuasiInterpolant {
            space,
            kind,
            exactness,
            stencils,
        })
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Largest `q` such that the operator reproduces `P_q`.
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    /// Greville sites where `f` has to be sampled.
    pub fn sample_sites(&self) -> &[f64] {
        self.space.grid().abscissae()
    }

    pub fn apply(&self, samples: &[f64]) -> Result<SplineFunction> {
        if samples.len() != self.space.dim() {
            return Err(Error::SampleCount {
                expected: self.space.dim(),
                got: samples.len(),
            });
        }
        let coefficients = self.stencils.iter().map(|st| st.apply(samples)).collect();
        SplineFunction::new(self.space.clone(), coefficients)
    }

    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<SplineFunction> {
        let samples: Vec<f64> = self.sample_sites().iter().map(|&x| f(x)).collect();
        self.apply(&samples)
    }

    /// `nu_1(Q) = max_i |lambda_i|_1` over every stencil.
    pub fn norm_upper_bound(&self) -> f64 {
        self.stencils
            .iter()
            .map(Stencil::l1_norm)
            .fold(0.0, f64::max)
    }

    /// `nu_1` restricted to interior stencils; `None` if there are none.
    pub fn interior_norm_bound(&self) -> Option<f64> {
        self.stencils
            .iter()
            .filter(|s| s.interior)
            .map(Stencil::l1_norm)
            .reduce(f64::max)
    }

    /// `nu_1` restricted to the stencils near the ends.
    pub fn boundary_norm_bound(&self) -> Option<f64> {
        self.stencils
            .iter()
            .filter(|s| !s.interior)
            .map(Stencil::l1_norm)
            .reduce(f64::max)
    }
}

pub fn apply_qi(qi: &QuasiInterpolant, samples: &[f64]) -> Result<SplineFunction> {
    qi.apply(samples)
}

pub fn norm_upper_bound(qi: &QuasiInterpolant) -> f64 {
    qi.norm_upper_bound()
}

/// Weights of the P2-exact functional on sites `left < center < right`,
/// where `spread = theta_i^2 - theta_i^{(2)}` of the center index.
pub(crate) fn three_point_weights(left: f64, center: f64, right: f64, spread: f64) -> [f64; 3] {
    let dl = center - left;
    let dr = right - center;
    let width = right - left;
    [
        -spread / (width * dl),
        1.0 + spread / (dl * dr),
        -spread / (width * dr),
    ]
}

/// Three-point P2-exact operator on sites `{i-p, i, i+p}` for any `p >= 1`,
/// with the boundary clamping described in the module docs.
///
/// `p = 1` is the operator of [`build_q2star`]; the norm bound of
/// [`theoretical_bound`] for the `Qp2Star` kind needs `p >= m`.
pub fn build_three_point(space: &SplineSpace, p: usize) -> Result<QuasiInterpolant> {
    let m = space.degree();
    if m < 2 {
        return Err(Error::InvalidDegree { got: m, min: 2 });
    }
    if p == 0 {
        return Err(Error::StencilTooNarrow { p, m: 1 });
    }
    let grid = space.grid();
    let dim = space.dim();
    let mut stencils = Vec::with_capacity(dim);
    for i in 0..dim {
        if i == 0 || i == dim - 1 {
            stencils.push(Stencil::new(space, i, vec![0], vec![1.0], true));
            continue;
        }
        let lo = i.saturating_sub(p);
        let hi = (i + p).min(dim - 1);
        let (tl, tc, tr) = (grid.theta(lo), grid.theta(i), grid.theta(hi));
        if !(tl < tc && tc < tr) {
            return Err(Error::RepeatedGreville { index: i });
        }
        let w = three_point_weights(tl, tc, tr, grid.spread(i));
        let offsets = vec![lo as isize - i as isize, 0, (hi - i) as isize];
        let shifted = lo + p != i || hi != i + p;
        stencils.push(Stencil::new(space, i, offsets, w.to_vec(), shifted));
    }
    let kind = if p == 1 {
        OperatorKind::Q2Star
    } else {
        OperatorKind::Qp2Star { p }
    };
    QuasiInterpolant::from_stencils(space.clone(), kind, 2, stencils)
}

/// The P2-exact operator built from the second divided difference on
/// neighbouring Greville sites.
pub fn build_q2star(space: &SplineSpace) -> Result<QuasiInterpolant> {
    build_three_point(space, 1)
}

/// Three-point operator on `{i-p, i, i+p}`; requires `p >= m`.
pub fn build_qp2star(space: &SplineSpace, p: usize) -> Result<QuasiInterpolant> {
    let m = space.degree();
    if p < m {
        return Err(Error::StencilTooNarrow { p, m });
    }
    build_three_point(space, p)
}

/// Known norm bound for the operator family: `floor((m+4)/2)` for
/// [`OperatorKind::Q2Star`] and `(m+1)/(m-1)` for the `{-p,0,p}` family.
pub fn theoretical_bound(kind: OperatorKind, m: usize) -> Result<f64> {
    match kind {
        OperatorKind::Q2Star => {
            if m < 2 {
                return Err(Error::InvalidDegree { got: m, min: 2 });
            }
            Ok(((m + 4) / 2) as f64)
        }
        OperatorKind::Qp2Star { .. } | OperatorKind::NearBest { q: 2, .. } => {
            if m < 2 {
                return Err(Error::InvalidDegree { got: m, min: 2 });
            }
            Ok((m + 1) as f64 / (m - 1) as f64)
        }
        OperatorKind::NearBest { .. } => Err(Error::UnsupportedKind("bound known only for q = 2")),
        OperatorKind::Dqi => Err(Error::UnsupportedKind(
            "differential operators have no l1 bound",
        )),
    }
}

/// Something that can produce `f(x), f'(x), ..., f^{(k)}(x)`.
pub trait DerivativeOracle {
    /// Fills `out[l]` with the `l`-th derivative at `x` for `l < out.len()`.
    fn derivatives(&self, x: f64, out: &mut [f64]) -> Result<()>;
}

impl DerivativeOracle for SplineFunction {
    fn derivatives(&self, x: f64, out: &mut [f64]) -> Result<()> {
        for (l, slot) in out.iter_mut().enumerate() {
            *slot = self.eval(x, l)?;
        }
        Ok(())
    }
}

impl<F> DerivativeOracle for F
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    fn derivatives(&self, x: f64, out: &mut [f64]) -> Result<()> {
        self(x, out)
    }
}

/// Coefficients `a_0, ..., a_m` of the differential functional at `theta_i`,
/// `a_s = sum_l (-1)^{s-l} C(s,l) theta_i^{s-l} theta_i^{(l)}`.
///
/// This is the Marsden moment of `(x - theta_i)^s`, which is how it is
/// evaluated; `a_0 = 1` and `a_1 = 0` exactly.
pub fn dqi_coefficients(space: &SplineSpace, i: usize) -> Result<Vec<f64>> {
    if i >= space.dim() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: space.dim(),
        });
    }
    let grid = space.grid();
    Ok((0..=space.degree())
        .map(|s| grid.centered_moment(i, s))
        .collect())
}

/// Differential quasi-interpolant, a projector onto the spline space.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialQi {
    space: SplineSpace,
    // row i: a_l(theta_i) / l!
    scaled: Vec<f64>,
}

impl DifferentialQi {
    pub fn new(space: &SplineSpace) -> Self {
        let m = space.degree();
        let mut scaled = Vec::with_capacity(space.dim() * (m + 1));
        for i in 0..space.dim() {
            let mut fact = 1.0;
            for (l, a) in dqi_coefficients(space, i).unwrap().into_iter().enumerate() {
                if l > 0 {
                    fact *= l as f64;
                }
                scaled.push(a / fact);
            }
        }
        DifferentialQi {
            space: space.clone(),
            scaled,
        }
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    /// `c_i = sum_l a_l(theta_i) D^l f(theta_i) / l!`.
    pub fn apply(&self, oracle: &dyn DerivativeOracle) -> Result<SplineFunction> {
        let m = self.space.degree();
        let mut ders = vec![0.0; m + 1];
        let mut coefficients = Vec::with_capacity(self.space.dim());
        for i in 0..self.space.dim() {
            let x = self.space.grid().theta(i);
            oracle.derivatives(x, &mut ders)?;
            let row = &self.scaled[i * (m + 1)..(i + 1) * (m + 1)];
            coefficients.push(row.iter().zip(&ders).map(|(a, d)| a * d).sum());
        }
        SplineFunction::new(self.space.clone(), coefficients)
    }
}

pub fn apply_dqi(space: &SplineSpace, oracle: &dyn DerivativeOracle) -> Result<SplineFunction> {
    DifferentialQi::new(space).apply(oracle)
}
