//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report is always printed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use qispline_core::{
    apply_dqi, assemble_constraints, build_q2star, build_qp2star, build_three_point,
    convergence_study, differentiation_matrix, differentiation_study, generate_partition,
    quadrature_from_qi, solve_l1, theoretical_bound, watson_certificate, OperatorKind,
    OperatorRecipe, PartitionFamily, PartitionSpec, QuasiInterpolant, SplineSpace, TestFunction,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn space(spec: PartitionSpec, m: usize) -> SplineSpace {
    SplineSpace::new(generate_partition(&spec, m).unwrap()).unwrap()
}

fn random(seed: u64, n: usize, m: usize) -> SplineSpace {
    space(
        PartitionSpec::new(PartitionFamily::Random { seed, spread: 50.0 }, 0.0, 1.0, n),
        m,
    )
}

fn uniform(m: usize, n: usize) -> SplineSpace {
    space(PartitionSpec::uniform(0.0, 1.0, n), m)
}

/// 200 random partitions, three arithmetic and six geometric ones.
fn battery(m: usize) -> Vec<SplineSpace> {
    let mut out: Vec<SplineSpace> = (0..200)
        .map(|seed| random(seed, 3 * m + 4 + seed as usize % 17, m))
        .collect();
    for increment in [0.5, 1.0, 3.0] {
        out.push(space(
            PartitionSpec::new(PartitionFamily::Arithmetic { increment }, 0.0, 1.0, 24),
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

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn coefficient_error(qi: &QuasiInterpolant, r: usize) -> f64 {
    let f = qi.apply_fn(|x| x.powi(r as i32)).unwrap();
    let g = qi.space().grid();
    f.coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| rel(*c, g.moment(i, r)))
        .fold(0.0, f64::max)
}

fn polynomial_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 2..=6 {
        for seed in 0..50 {
            let s = random(1000 + seed, 3 * m + 5, m);
            for qi in [build_q2star(&s).unwrap(), build_qp2star(&s, m).unwrap()] {
                for r in 0..=2 {
                    worst = worst.max(coefficient_error(&qi, r));
                }
            }
            for k in 0..=m {
                let f = apply_dqi(&s, &TestFunction::Monomial(k as u32)).unwrap();
                for (i, c) in f.coefficients().iter().enumerate() {
                    worst = worst.max(rel(*c, s.grid().moment(i, k)));
                }
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("max coefficient error {worst:.2e} (tol 1e-9)"),
    )
}

fn bound_sweep(label: &str, kinds: impl Fn(usize) -> Vec<OperatorKind>, slack: f64) -> Outcome {
    let (mut stencils, mut violations, mut worst_ratio) = (0usize, 0usize, 0.0f64);
    for m in 2..=6 {
        for s in battery(m) {
            for kind in kinds(m) {
                let qi = match kind {
                    OperatorKind::Q2Star => build_q2star(&s).unwrap(),
                    OperatorKind::Qp2Star { p } => build_qp2star(&s, p).unwrap(),
                    _ => unreachable!(),
                };
                let bound = theoretical_bound(kind, m).unwrap();
                for st in qi.stencils().iter().filter(|st| st.interior) {
                    stencils += 1;
                    let nu = st.l1_norm();
                    worst_ratio = worst_ratio.max(nu / bound);
                    if nu > bound + slack {
                        violations += 1;
                    }
                }
            }
        }
    }
    check(
        violations == 0 && stencils > 0,
        format!("{label}: {stencils} interior stencils, {violations} violations, max nu/bound {worst_ratio:.4}"),
    )
}

fn nearbest_certification() -> Outcome {
    let (mut indices, mut worst_gap, mut failed) = (0usize, 0.0f64, 0usize);
    for m in 2..=6 {
        let s = uniform(m, 40);
        for p in 2..=m + 2 {
            let closed = build_three_point(&s, p).unwrap();
            for i in p..s.dim() - p {
                let st = &closed.stencils()[i];
                if !st.interior {
                    continue;
                }
                indices += 1;
                let lp = solve_l1(&assemble_constraints(&s, i, p, 2).unwrap()).unwrap();
                worst_gap = worst_gap.max((lp.value - st.l1_norm()).abs());
                let cert = watson_certificate(&s, i, p).unwrap();
                if !(cert.passes() && cert.residual <= 1e-10 && cert.max_abs <= 1.0 + 1e-12) {
                    failed += 1;
                }
            }
        }
    }
    let s = uniform(2, 30);
    let nine_eighths = solve_l1(&assemble_constraints(&s, 15, 2, 2).unwrap())
        .unwrap()
        .value;
    check(
        worst_gap <= 1e-8 && failed == 0 && (nine_eighths - 1.125).abs() <= 1e-8,
        format!(
            "{indices} interior indices, max |LP - closed form| {worst_gap:.2e}, {failed} certificate failures, m=2 p=2 optimum {nine_eighths}"
        ),
    )
}

fn lp_vs_enumeration() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for seed in 0..50 {
        let s = random(500 + seed, 14, 2 + seed as usize % 3);
        for i in 2..s.dim() - 2 {
            let sys = assemble_constraints(&s, i, 2, 2).unwrap();
            let lp = solve_l1(&sys).unwrap().value;
            let x: Vec<f64> = (0..sys.cols()).map(|k| sys.entry(1, k)).collect();
            let mut best = f64::INFINITY;
            for a in 0..5 {
                for b in a + 1..5 {
                    for c in b + 1..5 {
                        best = best.min(three_column_norm(
                            [x[a], x[b], x[c]],
                            [sys.rhs[0], sys.rhs[1], sys.rhs[2]],
                        ));
                    }
                }
            }
            worst = worst.max((lp - best).abs() / best);
            count += 1;
        }
    }
    check(
        worst <= 1e-8,
        format!("{count} local problems, max relative difference {worst:.2e}"),
    )
}

/// l1 norm of the unique weights on three sites reproducing `1, x, x^2`.
fn three_column_norm(x: [f64; 3], b: [f64; 3]) -> f64 {
    let mut total = 0.0;
    for k in 0..3 {
        let (u, w) = match k {
            0 => (x[1], x[2]),
            1 => (x[2], x[0]),
            _ => (x[0], x[1]),
        };
        // Lagrange basis at site k applied to the moment vector
        let xk = x[k];
        let coef = (b[2] - (u + w) * b[1] + u * w * b[0]) / ((xk - u) * (xk - w));
        total += coef.abs();
    }
    total
}

fn approximation_order() -> Outcome {
    let ladder = [16, 32, 64, 128];
    let t = PartitionSpec::uniform(0.0, 1.0, 16);
    let q2 = convergence_study(
        &OperatorRecipe {
            kind: OperatorKind::Q2Star,
            degree: 2,
        },
        &TestFunction::Sin,
        &ladder,
        &t,
    )
    .unwrap()
    .fitted_order
    .unwrap();
    let dqi = convergence_study(
        &OperatorRecipe {
            kind: OperatorKind::Dqi,
            degree: 3,
        },
        &TestFunction::Exp,
        &ladder,
        &t,
    )
    .unwrap()
    .fitted_order
    .unwrap();
    check(
        (q2 - 3.0).abs() <= 0.3 && (dqi - 4.0).abs() <= 0.3,
        format!("Q2* m=2 sin order {q2:.3}, DQI m=3 exp order {dqi:.3}"),
    )
}

fn quadrature() -> Outcome {
    let (mut p2, mut ids) = (0.0f64, 0.0f64);
    for m in 2..=6 {
        for s in battery(m) {
            let rule = quadrature_from_qi(&build_q2star(&s).unwrap());
            for k in 0..=2 {
                let exact = 1.0 / (k + 1) as f64;
                p2 = p2.max((rule.integrate_fn(|x| x.powi(k)) - exact).abs() / exact);
            }
            let sum: f64 = rule.weights.iter().sum();
            let first: f64 = rule
                .weights
                .iter()
                .zip(&rule.nodes)
                .map(|(w, t)| w * t)
                .sum();
            ids = ids.max((sum - 1.0).abs()).max((first - 0.5).abs() / 0.5);
        }
    }
    let mut p3: f64 = 0.0;
    for m in 2..=6 {
        for n in [m + 4, 10, 33, 64] {
            let rule = quadrature_from_qi(&build_q2star(&uniform(m, n)).unwrap());
            p3 = p3.max((rule.integrate_fn(|x| x * x * x) - 0.25).abs() / 0.25);
        }
    }
    check(
        p2 <= 1e-12 && p3 <= 1e-12 && ids <= 1e-10,
        format!("P2 error {p2:.2e}, uniform P3 error {p3:.2e}, weight identities {ids:.2e}"),
    )
}

fn differentiation() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 2..=6 {
        for s in battery(m) {
            let qi = build_q2star(&s).unwrap();
            let dm = differentiation_matrix(&qi).unwrap();
            let sites = qi.sample_sites();
            let sq: Vec<f64> = sites.iter().map(|x| x * x).collect();
            let d1 = dm.apply(sites).unwrap();
            let d2 = dm.apply(&sq).unwrap();
            for i in 0..dm.size() {
                worst = worst
                    .max((d1[i] - 1.0).abs())
                    .max((d2[i] - 2.0 * sites[i]).abs());
            }
        }
    }
    let order = differentiation_study(
        &OperatorRecipe {
            kind: OperatorKind::Q2Star,
            degree: 2,
        },
        &TestFunction::Sin,
        &[16, 32, 64, 128],
        &PartitionSpec::uniform(0.0, 1.0, 16),
    )
    .unwrap()
    .fitted_order
    .unwrap();
    check(
        worst <= 1e-9 && (order - 2.0).abs() <= 0.3,
        format!("P2 derivative error {worst:.2e}, interior order {order:.3}"),
    )
}

fn basis_substrate() -> Outcome {
    let (mut unity, mut marsden, mut integral) = (0.0f64, 0.0f64, 0.0f64);
    for m in 2..=6 {
        for s in battery(m) {
            let g = s.grid();
            let bp = s.knots().breakpoints().to_vec();
            for w in bp.windows(2) {
                for k in 0..7 {
                    let x = if k == 6 {
                        w[1]
                    } else {
                        w[0] + (w[1] - w[0]) * k as f64 / 6.0
                    };
                    let (first, vals) = s.eval_basis(x).unwrap();
                    unity = unity.max((vals.iter().sum::<f64>() - 1.0).abs());
                    for l in 1..=m {
                        let sum: f64 = vals
                            .iter()
                            .enumerate()
                            .map(|(o, b)| g.moment(first + o, l) * b)
                            .sum();
                        marsden = marsden.max((sum - x.powi(l as i32)).abs());
                    }
                }
            }
            integral = integral.max((s.basis_integrals().iter().sum::<f64>() - 1.0).abs());
        }
    }
    check(
        unity <= 1e-10 && marsden <= 1e-10 && integral <= 1e-10,
        format!(
            "partition of unity {unity:.2e}, Marsden {marsden:.2e}, integral sum {integral:.2e}"
        ),
    )
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &[
            "norms", "--kind", "qp2star", "--m", "3", "--family", "random", "--seed", "17",
            "--count", "8", "--n", "30",
        ],
        &[
            "nearbest", "--m", "2", "--family", "random", "--seed", "3", "--count", "3", "--n",
            "20", "--audit",
        ],
        &[
            "audit", "--m", "3", "--p", "4", "--family", "random", "--seed", "9", "--count", "5",
            "--n", "25",
        ],
        &[
            "convergence",
            "--kind",
            "nearbest",
            "--m",
            "3",
            "--family",
            "random",
            "--seed",
            "5",
            "--sizes",
            "10,20,40",
        ],
    ];
    for args in runs {
        let once = Command::new(env!("CARGO_BIN_EXE_qispline"))
            .args(args)
            .output()
            .unwrap();
        let twice = Command::new(env!("CARGO_BIN_EXE_qispline"))
            .args(args)
            .output()
            .unwrap();
        if !once.status.success() || once.stdout != twice.stdout || once.stdout.is_empty() {
            return Err(format!("{} output differs or failed", args[0]));
        }
    }
    Ok(format!(
        "{} commands byte-identical across runs",
        runs.len()
    ))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("polynomial exactness", polynomial_exactness),
        ("three-point bound p=1", || {
            bound_sweep("Q2*", |_| vec![OperatorKind::Q2Star], 0.0)
        }),
        ("three-point bound p>=m", || {
            bound_sweep(
                "Qp2*",
                |m| (m..=m + 2).map(|p| OperatorKind::Qp2Star { p }).collect(),
                1e-12,
            )
        }),
        ("near-best certification", nearbest_certification),
        ("LP vs enumeration", lp_vs_enumeration),
        ("approximation order", approximation_order),
        ("quadrature", quadrature),
        ("differentiation", differentiation),
        ("basis substrate", basis_substrate),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "[{tag}] {:>2} {name}: {detail} ({:.2?})",
            k + 1,
            start.elapsed()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
