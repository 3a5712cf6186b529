//! Clamped knot vectors, partition generators and Greville data.
//!
//! Knots are indexed the usual way for a degree `m` space on `[a, b]` with
//! `n` intervals: `t_{-m} = ... = t_0 = a < t_1 < ... < t_{n-1} < b = t_n =
//! ... = t_{n+m}`. The basis index set is `J = {0, ..., n+m-1}` and `B_j`
//! is supported on `[t_{j-m}, t_{j+1}]`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    intervals: usize,
    // knots[u] = t_{u - m}
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of intervals `n`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Dimension of the spline space, `n + m`.
    pub fn dim(&self) -> usize {
        self.intervals + self.degree
    }

    pub fn a(&self) -> f64 {
        self.knots[0]
    }

    pub fn b(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// `t_i` for `-m <= i <= n + m`.
    pub fn t(&self, i: isize) -> f64 {
        self.knots[(i + self.degree as isize) as usize]
    }

    /// The full knot sequence `t_{-m}, ..., t_{n+m}`.
    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }

    /// The distinct breakpoints `t_0, ..., t_n`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.knots[self.degree..=self.degree + self.intervals]
    }

    /// Steps `h_i = t_i - t_{i-1}` for `1 <= i <= n`.
    pub fn steps(&self) -> Vec<f64> {
        self.breakpoints().windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.steps().into_iter().fold(0.0, f64::max)
    }
}

/// Clamped knot vector with `(m+1)`-fold end knots and simple interior knots.
pub fn make_clamped_knots(a: f64, b: f64, interior: &[f64], m: usize) -> Result<KnotVector> {
    if m < 1 {
        return Err(Error::InvalidDegree { got: m, min: 1 });
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    for (k, &x) in interior.iter().enumerate() {
        if !(x > a && x < b) {
            return Err(Error::KnotOutsideInterval { value: x, a, b });
        }
        if k > 0 && x.partial_cmp(&interior[k - 1]) != Some(Ordering::Greater) {
            return Err(Error::NonMonotoneKnots { position: k });
        }
    }
    let mut knots = Vec::with_capacity(interior.len() + 2 * m + 2);
    knots.extend(core::iter::repeat_n(a, m + 1));
    knots.extend_from_slice(interior);
    knots.extend(core::iter::repeat_n(b, m + 1));
    Ok(KnotVector {
        degree: m,
        intervals: interior.len() + 1,
        knots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionFamily {
    Uniform,
    /// Steps `h_i = h_1 (1 + (i-1) increment)`.
    Arithmetic {
        increment: f64,
    },
    /// Steps `h_{i+1} = ratio * h_i`.
    Geometric {
        ratio: f64,
    },
    /// Steps drawn log-uniformly from `[1, spread]` (relative), then rescaled.
    Random {
        seed: u64,
        spread: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSpec {
    pub family: PartitionFamily,
    pub a: f64,
    pub b: f64,
    pub intervals: usize,
}

impl PartitionSpec {
    pub fn new(family: PartitionFamily, a: f64, b: f64, intervals: usize) -> Self {
        PartitionSpec {
            family,
            a,
            b,
            intervals,
        }
    }

    pub fn uniform(a: f64, b: f64, intervals: usize) -> Self {
        Self::new(PartitionFamily::Uniform, a, b, intervals)
    }

    pub fn with_intervals(self, intervals: usize) -> Self {
        PartitionSpec { intervals, ..self }
    }

    /// Relative step lengths before rescaling to `[a, b]`.
    fn relative_steps(&self) -> Result<Vec<f64>> {
        let n = self.intervals;
        let steps = match self.family {
            PartitionFamily::Uniform => alloc::vec![1.0; n],
            PartitionFamily::Arithmetic { increment } => {
                if !(increment >= 0.0 && increment.is_finite()) {
                    return Err(Error::InvalidParameter("arithmetic increment must be >= 0"));
                }
                (0..n).map(|i| 1.0 + i as f64 * increment).collect()
            }
            PartitionFamily::Geometric { ratio } => {
                if !(ratio > 0.0 && ratio.is_finite()) {
                    return Err(Error::InvalidParameter("geometric ratio must be > 0"));
                }
                let mut h = 1.0;
                (0..n)
                    .map(|_| {
                        let cur = h;
                        h *= ratio;
                        cur
                    })
                    .collect()
            }
            PartitionFamily::Random { seed, spread } => {
                if !(spread >= 1.0 && spread.is_finite()) {
                    return Err(Error::InvalidParameter("random spread must be >= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let log_spread = libm::log(spread);
                (0..n)
                    .map(|_| libm::exp(unit_f64(&mut rng) * log_spread))
                    .collect()
            }
        };
        Ok(steps)
    }
}

fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic clamped knot vector of degree `m` for a partition spec.
pub fn generate_partition(spec: &PartitionSpec, m: usize) -> Result<KnotVector> {
    if spec.intervals < 1 {
        return Err(Error::EmptyPartition);
    }
    let steps = spec.relative_steps()?;
    let total: f64 = steps.iter().sum();
    let len = spec.b - spec.a;
    let mut interior = Vec::with_capacity(spec.intervals - 1);
    if let PartitionFamily::Uniform = spec.family {
        let n = spec.intervals as f64;
        interior.extend((1..spec.intervals).map(|i| spec.a + len * i as f64 / n));
    } else {
        let mut acc = 0.0;
        for h in &steps[..steps.len() - 1] {
            acc += h;
            interior.push(spec.a + len * acc / total);
        }
    }
    make_clamped_knots(spec.a, spec.b, &interior, m)
}

/// Greville abscissae and the Marsden moments of every basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct GrevilleGrid {
    degree: usize,
    abscissae: Vec<f64>,
    // row j: theta_j^{(l)}, l = 0..=m
    moments: Vec<f64>,
    // row j: moments of the window shifted by theta_j
    centered: Vec<f64>,
    spread: Vec<f64>,
}

impl GrevilleGrid {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.abscissae[j]
    }

    /// `theta_j^{(l)} = sigma_l(T_j) / C(m, l)`, with `theta_j^{(0)} = 1`.
    pub fn moment(&self, j: usize, l: usize) -> f64 {
        self.moments[j * (self.degree + 1) + l]
    }

    /// Marsden moment of `(x - theta_j)^r`, i.e. `sigma_r(T_j - theta_j) / C(m, r)`.
    ///
    /// Equal to `sum_l C(r,l) (-theta_j)^{r-l} theta_j^{(l)}` but computed
    /// without cancellation.
    pub fn centered_moment(&self, j: usize, r: usize) -> f64 {
        self.centered[j * (self.degree + 1) + r]
    }

    /// `theta_j^2 - theta_j^{(2)}`, evaluated as a sum of squared knot gaps.
    pub fn spread(&self, j: usize) -> f64 {
        self.spread[j]
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Elementary symmetric functions `sigma_0..=sigma_m` of `values`, built up as
/// the coefficients of `prod (1 + v z)`.
pub(crate) fn elementary_symmetric(values: impl Iterator<Item = f64>, out: &mut [f64]) {
    out.iter_mut().for_each(|e| *e = 0.0);
    out[0] = 1.0;
    let mut count = 0;
    for v in values {
        count += 1;
        for l in (1..=count.min(out.len() - 1)).rev() {
            out[l] += v * out[l - 1];
        }
    }
}

pub fn greville_grid(kv: &KnotVector) -> Result<GrevilleGrid> {
    let m = kv.degree();
    let dim = kv.dim();
    let mut abscissae = Vec::with_capacity(dim);
    let mut moments = Vec::with_capacity(dim * (m + 1));
    let mut centered = Vec::with_capacity(dim * (m + 1));
    let mut spread = Vec::with_capacity(dim);
    let binoms: Vec<f64> = (0..=m).map(|l| binomial(m, l)).collect();
    let mut sigma = alloc::vec![0.0; m + 1];

    for j in 0..dim as isize {
        let window = || (0..m as isize).map(move |s| kv.t(j - s));
        let theta = window().sum::<f64>() / m as f64;

        elementary_symmetric(window(), &mut sigma);
        moments.extend(sigma.iter().zip(&binoms).map(|(s, c)| s / c));
        // The first moment is the mean itself.
        let row = moments.len() - m;
        moments[row] = theta;

        elementary_symmetric(window().map(|t| t - theta), &mut sigma);
        centered.extend(sigma.iter().zip(&binoms).map(|(s, c)| s / c));
        let row = centered.len() - m;
        centered[row] = 0.0;

        let mut gaps = 0.0;
        if m >= 2 {
            for r in 0..m as isize {
                for s in r + 1..m as isize {
                    let d = kv.t(j - r) - kv.t(j - s);
                    gaps += d * d;
                }
            }
            gaps /= (m * m * (m - 1)) as f64;
        }
        spread.push(gaps);

        if let Some(&prev) = abscissae.last() {
            if theta.partial_cmp(&prev) != Some(Ordering::Greater) {
                return Err(Error::RepeatedGreville { index: j as usize });
            }
        }
        abscissae.push(theta);
    }
    Ok(GrevilleGrid {
        degree: m,
        abscissae,
        moments,
        centered,
        spread,
    })
}
