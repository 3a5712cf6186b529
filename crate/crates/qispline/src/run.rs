//! Subcommand drivers. Each returns its whole report before anything is
//! written, so a failure never leaves a partial table behind.

use std::io::Write;

use qispline_core::{
    assemble_constraints, build_nearbest_qi, build_q2star, build_qp2star, build_three_point,
    convergence_study, differentiation_matrix, differentiation_study, generate_partition,
    knot_condition, local_solves, quadrature_from_qi, solve_l1, theoretical_bound,
    watson_certificate, Error, OperatorRecipe, QuasiInterpolant, SplineSpace,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, Format, Kind, RunConfig};
use crate::formats::{write_jsonl, AuditRecord, Cell, CertificateStatus, OperatorRecord, Table};
use crate::RunError;

const PROVENANCE: [&str; 9] = [
    "command", "kind", "m", "p", "q", "family", "param", "a", "b",
];

fn table(extra: &[&str]) -> Table {
    let names: Vec<&str> = PROVENANCE
        .iter()
        .chain(&["seed"])
        .chain(extra)
        .copied()
        .collect();
    Table::new(&names)
}

fn at(i: usize, e: Error) -> RunError {
    RunError::Numerical(Error::AtIndex {
        index: i,
        source: Box::new(e),
    })
}

fn kind_name(cfg: &RunConfig) -> &'static str {
    match cfg.kind {
        Kind::Q2star => "q2star",
        Kind::Qp2star => "qp2star",
        Kind::Dqi => "dqi",
        Kind::Nearbest => "nearbest",
    }
}

fn provenance(cfg: &RunConfig, kind: &str, p: Option<usize>, q: usize, seed: u64) -> Vec<Cell> {
    vec![
        cfg.command.name().into(),
        kind.into(),
        cfg.m.into(),
        p.into(),
        q.into(),
        cfg.family.name().into(),
        cfg.family_param().into(),
        cfg.a.into(),
        cfg.b.into(),
        seed.into(),
    ]
}

fn space(cfg: &RunConfig, n: usize, seed: u64) -> Result<SplineSpace, RunError> {
    let kv = generate_partition(&cfg.partition(n, seed), cfg.m)?;
    Ok(SplineSpace::new(kv)?)
}

fn build(cfg: &RunConfig, space: &SplineSpace) -> Result<QuasiInterpolant, RunError> {
    let qi = match cfg.kind {
        Kind::Q2star => build_q2star(space)?,
        Kind::Qp2star => build_qp2star(space, cfg.half_width())?,
        Kind::Nearbest => build_nearbest_qi(space, cfg.half_width(), cfg.q)?,
        Kind::Dqi => return Err(RunError::Config("kind dqi has no stencils".into())),
    };
    Ok(qi)
}

/// `(p, q)` reported for the configured operator.
fn operator_pq(cfg: &RunConfig) -> (Option<usize>, usize) {
    match cfg.kind {
        Kind::Q2star => (Some(1), 2),
        Kind::Qp2star => (Some(cfg.half_width()), 2),
        Kind::Nearbest => (Some(cfg.half_width()), cfg.q),
        Kind::Dqi => (None, cfg.m),
    }
}

/// Runs the configured command and writes its report to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    cfg.validate()?;
    match cfg.command {
        Command::Norms => emit(cfg, norms(cfg)?, None, out),
        Command::Nearbest => nearbest(cfg, out),
        Command::Convergence => {
            let (table, fitted) = convergence(cfg)?;
            emit(cfg, table, Some(json!({ "fitted_order": fitted })), out)
        }
        Command::Quad => emit(cfg, quad(cfg)?, None, out),
        Command::Diffmat => {
            let (table, fitted) = diffmat(cfg)?;
            emit(cfg, table, Some(json!({ "fitted_order": fitted })), out)
        }
        Command::Audit => emit(cfg, audit(cfg)?, None, out),
    }
}

fn emit(
    cfg: &RunConfig,
    table: Table,
    summary: Option<Value>,
    out: &mut dyn Write,
) -> Result<(), RunError> {
    match cfg.format {
        Format::Csv => table.write_csv(out)?,
        Format::Json => {
            let mut doc = json!({ "rows": table.to_json() });
            if let Some(Value::Object(extra)) = summary {
                doc.as_object_mut().unwrap().extend(extra);
            }
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn norms(cfg: &RunConfig) -> Result<Table, RunError> {
    let mut table = table(&["n", "nu1", "nu1_all", "nu1_boundary", "bound", "ok"]);
    let (p, q) = operator_pq(cfg);
    let bound = theoretical_bound(cfg.operator_kind(), cfg.m).ok();
    let rows: Vec<Result<Vec<Cell>, RunError>> = cfg
        .sweep()
        .into_par_iter()
        .map(|seed| {
            let qi = build(cfg, &space(cfg, cfg.n, seed)?)?;
            let nu1 = qi.interior_norm_bound();
            let ok = match (nu1, bound) {
                (Some(v), Some(b)) => Some(v <= b + 1e-12),
                _ => None,
            };
            let mut row = provenance(cfg, kind_name(cfg), p, q, seed);
            row.extend([
                cfg.n.into(),
                nu1.into(),
                qi.norm_upper_bound().into(),
                qi.boundary_norm_bound().into(),
                bound.into(),
                ok.into(),
            ]);
            Ok(row)
        })
        .collect();
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

struct IndexReport {
    records: Vec<AuditRecord>,
    summary: AuditRecord,
    operator: OperatorRecord,
}

fn nearbest_partition(cfg: &RunConfig, seed: u64) -> Result<IndexReport, RunError> {
    let p = cfg.half_width();
    let q = cfg.q;
    if p < cfg.m {
        eprintln!(
            "warning: half-width p = {p} below degree m = {}: no uniform bound is known",
            cfg.m
        );
    }
    let space = space(cfg, cfg.n, seed)?;
    let qi = build_nearbest_qi(&space, p, q)?;
    let solves = local_solves(&space, p, q)?;
    let three = if q == 2 {
        Some(build_three_point(&space, p)?)
    } else {
        None
    };
    let family = cfg.family.name().to_string();
    let (mut passes, mut failures) = (0, 0);
    let mut records = Vec::with_capacity(solves.len());
    for (ls, st) in solves.iter().zip(qi.stencils()) {
        let i = ls.system.center;
        let full = ls.system.lo + p == i && ls.system.hi == i + p;
        let three_point_norm = three
            .as_ref()
            .filter(|_| full)
            .map(|t| t.stencils()[i].l1_norm());
        let (knot, certificate) = if full && p >= 2 && q == 2 {
            let cert = watson_certificate(&space, i, p).map_err(|e| at(i, e))?;
            let status = if cert.passes() {
                passes += 1;
                CertificateStatus::Pass
            } else {
                failures += 1;
                CertificateStatus::Fail
            };
            (Some(knot_condition(&space, i, p)?), status)
        } else {
            (None, CertificateStatus::Na)
        };
        records.push(AuditRecord::Index {
            m: cfg.m,
            p,
            q,
            family: family.clone(),
            seed,
            n: cfg.n,
            i,
            lo: ls.system.lo,
            hi: ls.system.hi,
            interior: st.interior,
            lp_norm: ls.solution.value,
            three_point_norm,
            gap: three_point_norm.map(|t| t - ls.solution.value),
            knot_condition: knot,
            certificate,
            iterations: ls.solution.iterations,
            residual: ls.system.raw_residual(&ls.solution.weights),
        });
    }
    let summary = AuditRecord::Summary {
        m: cfg.m,
        p,
        q,
        family,
        seed,
        n: cfg.n,
        nu1_star: qi.interior_norm_bound(),
        nu1_all: qi.norm_upper_bound(),
        passes,
        failures,
    };
    Ok(IndexReport {
        records,
        summary,
        operator: OperatorRecord::from_qi(&qi, Some(p)),
    })
}

fn nearbest(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let reports: Vec<IndexReport> = cfg
        .sweep()
        .into_par_iter()
        .map(|seed| nearbest_partition(cfg, seed))
        .collect::<Result<_, _>>()?;
    if cfg.audit {
        for r in &reports {
            write_jsonl(&r.records, out)?;
            write_jsonl(std::slice::from_ref(&r.summary), out)?;
        }
        return Ok(());
    }
    let mut table = table(&[
        "n",
        "nu1_star",
        "nu1_all",
        "certificate_pass",
        "certificate_fail",
    ]);
    for r in &reports {
        if let AuditRecord::Summary {
            seed,
            nu1_star,
            nu1_all,
            passes,
            failures,
            ..
        } = &r.summary
        {
            let mut row = provenance(cfg, "nearbest", Some(cfg.half_width()), cfg.q, *seed);
            row.extend([
                cfg.n.into(),
                (*nu1_star).into(),
                (*nu1_all).into(),
                (*passes).into(),
                (*failures).into(),
            ]);
            table.push(row);
        }
    }
    let operators: Vec<&OperatorRecord> = reports.iter().map(|r| &r.operator).collect();
    emit(cfg, table, Some(json!({ "operators": operators })), out)
}

fn convergence(cfg: &RunConfig) -> Result<(Table, Option<f64>), RunError> {
    let recipe = OperatorRecipe {
        kind: cfg.operator_kind(),
        degree: cfg.m,
    };
    let f = cfg.f.test_function();
    let report = convergence_study(
        &recipe,
        &f,
        &cfg.sizes,
        &cfg.partition(cfg.sizes[0], cfg.seed),
    )?;
    let (p, q) = operator_pq(cfg);
    let mut table = table(&["f", "n", "h_max", "error", "order_running", "fitted_order"]);
    for (row, order) in report.rows.iter().zip(report.running_orders()) {
        let mut cells = provenance(cfg, kind_name(cfg), p, q, cfg.seed);
        cells.extend([
            f.name().into(),
            row.intervals.into(),
            row.h_max.into(),
            row.error.into(),
            order.into(),
            report.fitted_order.into(),
        ]);
        table.push(cells);
    }
    Ok((table, report.fitted_order))
}

fn quad(cfg: &RunConfig) -> Result<Table, RunError> {
    let f = cfg.f.test_function();
    let (p, q) = operator_pq(cfg);
    let exact = f.integral(cfg.a, cfg.b);
    let len = cfg.b - cfg.a;
    let cubic = (cfg.b.powi(4) - cfg.a.powi(4)) / 4.0;
    let first = (cfg.b * cfg.b - cfg.a * cfg.a) / 2.0;
    let rows: Vec<Result<Vec<Cell>, RunError>> = cfg
        .sizes
        .par_iter()
        .map(|&n| {
            let qi = build(cfg, &space(cfg, n, cfg.seed)?)?;
            let rule = quadrature_from_qi(&qi);
            let estimate = rule.integrate_fn(|x| f.value(x));
            let sum: f64 = rule.weights.iter().sum();
            let moment: f64 = rule
                .weights
                .iter()
                .zip(&rule.nodes)
                .map(|(w, t)| w * t)
                .sum();
            let mut cells = provenance(cfg, kind_name(cfg), p, q, cfg.seed);
            cells.extend([
                f.name().into(),
                n.into(),
                estimate.into(),
                exact.into(),
                (estimate - exact).abs().into(),
                ((sum - len) / len).abs().into(),
                ((moment - first) / first.abs().max(1.0)).abs().into(),
                ((rule.integrate_fn(|x| x * x * x) - cubic) / cubic.abs().max(1.0))
                    .abs()
                    .into(),
            ]);
            Ok(cells)
        })
        .collect();
    let mut table = table(&[
        "f",
        "n",
        "estimate",
        "exact",
        "error",
        "weight_sum_error",
        "first_moment_error",
        "cubic_error",
    ]);
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

fn diffmat(cfg: &RunConfig) -> Result<(Table, Option<f64>), RunError> {
    let recipe = OperatorRecipe {
        kind: cfg.operator_kind(),
        degree: cfg.m,
    };
    let f = cfg.f.test_function();
    let template = cfg.partition(cfg.sizes[0], cfg.seed);
    let report = differentiation_study(&recipe, &f, &cfg.sizes, &template)?;
    let (p, q) = operator_pq(cfg);
    let mut table = table(&[
        "f",
        "n",
        "h_max",
        "bandwidth",
        "max_row_sum",
        "interior_error",
        "order_running",
        "fitted_order",
    ]);
    for (row, order) in report.rows.iter().zip(report.running_orders()) {
        let qi = build(cfg, &space(cfg, row.intervals, cfg.seed)?)?;
        let dm = differentiation_matrix(&qi)?;
        let row_sum = (0..dm.size())
            .map(|i| dm.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max);
        let mut cells = provenance(cfg, kind_name(cfg), p, q, cfg.seed);
        cells.extend([
            f.name().into(),
            row.intervals.into(),
            row.h_max.into(),
            dm.bandwidth().into(),
            row_sum.into(),
            row.error.into(),
            order.into(),
            report.fitted_order.into(),
        ]);
        table.push(cells);
    }
    Ok((table, report.fitted_order))
}

/// Certificate sweep over a family of partitions: how often the closed-form
/// weights are proven optimal, and the LP gap where they are not.
fn audit(cfg: &RunConfig) -> Result<Table, RunError> {
    let p = cfg.half_width();
    if p < 2 {
        return Err(RunError::Config("audit needs p >= 2".into()));
    }
    let rows: Vec<Result<Vec<Cell>, RunError>> = cfg
        .sweep()
        .into_par_iter()
        .map(|seed| {
            let space = space(cfg, cfg.n, seed)?;
            let three = build_three_point(&space, p)?;
            let (mut checked, mut holds, mut passes) = (0usize, 0usize, 0usize);
            let (mut max_gap, mut max_mismatch) = (0.0f64, 0.0f64);
            for i in p..space.dim().saturating_sub(p) {
                let lp = solve_l1(&assemble_constraints(&space, i, p, 2)?).map_err(|e| at(i, e))?;
                let closed = three.stencils()[i].l1_norm();
                let cert = watson_certificate(&space, i, p).map_err(|e| at(i, e))?;
                checked += 1;
                holds += knot_condition(&space, i, p)? as usize;
                if cert.passes() {
                    passes += 1;
                    max_mismatch = max_mismatch.max((closed - lp.value).abs());
                } else {
                    max_gap = max_gap.max(closed - lp.value);
                }
            }
            let mut row = provenance(cfg, "nearbest", Some(p), 2, seed);
            row.extend([
                cfg.n.into(),
                checked.into(),
                holds.into(),
                passes.into(),
                (checked - passes).into(),
                max_gap.into(),
                max_mismatch.into(),
            ]);
            Ok(row)
        })
        .collect();
    let mut table = table(&[
        "n",
        "indices",
        "condition_holds",
        "certificate_pass",
        "certificate_fail",
        "max_gap",
        "max_certified_mismatch",
    ]);
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}
