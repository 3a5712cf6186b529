#![allow(dead_code)]

use qispline_core::{generate_partition, PartitionFamily, PartitionSpec, SplineSpace};

pub fn space(spec: PartitionSpec, m: usize) -> SplineSpace {
    SplineSpace::new(generate_partition(&spec, m).unwrap()).unwrap()
}

pub fn random_spec(seed: u64, n: usize) -> PartitionSpec {
    PartitionSpec::new(PartitionFamily::Random { seed, spread: 50.0 }, 0.0, 1.0, n)
}

pub fn uniform(m: usize, n: usize) -> SplineSpace {
    space(PartitionSpec::uniform(0.0, 1.0, n), m)
}

/// Arithmetic, geometric and random partitions used by the sweeps.
pub fn battery(m: usize, randoms: u64) -> Vec<SplineSpace> {
    let mut out = Vec::new();
    for seed in 0..randoms {
        let n = 3 * m + 4 + (seed as usize % 17);
        out.push(space(random_spec(seed, n), m));
    }
    for inc in [0.5, 1.0, 3.0] {
        out.push(space(
            PartitionSpec::new(PartitionFamily::Arithmetic { increment: inc }, 0.0, 1.0, 24),
            m,
        ));
    }
    for ratio in [1.5, 2.0, 4.0] {
        for n in [3 * m + 4, 16] {
            out.push(space(
                PartitionSpec::new(PartitionFamily::Geometric { ratio }, 0.0, 1.0, n),
                m,
            ));
        }
    }
    out
}

/// Solves the 3x3 system `sum_k w_k x_k^r = rhs_r` by Cramer's rule.
pub fn cramer3(x: [f64; 3], rhs: [f64; 3]) -> [f64; 3] {
    let det = |c: [[f64; 3]; 3]| {
        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
    };
    let v = [[1.0, 1.0, 1.0], x, [x[0] * x[0], x[1] * x[1], x[2] * x[2]]];
    let d = det(v);
    let mut out = [0.0; 3];
    for k in 0..3 {
        let mut c = v;
        for r in 0..3 {
            c[r][k] = rhs[r];
        }
        out[k] = det(c) / d;
    }
    out
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
