use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kquant::quantizer::{
    solve_dp, solve_lloyd, solve_sup, solve_sweep, LloydOptions, SolveReport, SolverDetails, StepQuantizer,
};
use kquant::ua::{
    adversarial_ball_family, covering_number, family_decay, linf_ball_bound_audit, FunctionFamily, PNorm,
};
use kquant::variation::{audit_inequalities, InequalityAudit};
use kquant::DiscreteMeasure;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AdversarialArgs, Common, CoveringArgs, Format, Mode, QuantizeArgs, Solver, UaArgs, VariationArgs};
use crate::output::{
    emit, expand_inputs, joint_summary, json_report, num, read_measure, solve_error, CliError, Summary,
};

type Outcome = Result<i32, CliError>;

fn p_json(p: PNorm) -> Value {
    match p {
        PNorm::Finite(p) => json!(p),
        PNorm::Infinity => json!("inf"),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Finite => "finite",
        Mode::Infinite => "infinite",
    }
}

fn check_common(c: &Common) -> Result<(), CliError> {
    if !(c.merge_tol >= 0.0 && c.merge_tol.is_finite()) {
        return Err(CliError::Config(format!(
            "--merge-tol must be finite and >= 0, got {}",
            c.merge_tol
        )));
    }
    Ok(())
}

fn check_k(name: &str, k: usize) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn check_eps(eps: &[f64]) -> Result<(), CliError> {
    match eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        Some(e) => Err(CliError::Config(format!("--eps must be positive, got {e}"))),
        None => Ok(()),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn label(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str(p))
}

fn quantizer_json(q: &StepQuantizer) -> Value {
    json!({
        "levels": q.levels(),
        "boundaries": q.boundaries(),
        "q": q.q(),
    })
}

// ---- quantize

/// Midpoints of the atom gaps at the weighted quantiles `i / (size + 1)`.
fn sweep_grid(m: &DiscreteMeasure, size: usize) -> Vec<f64> {
    let xs = m.atoms();
    let total = m.total_mass();
    let mut cum = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for &w in m.weights() {
        acc += w;
        cum.push(acc);
    }
    let mut grid: Vec<f64> = (1..=size)
        .map(|i| {
            let target = i as f64 / (size + 1) as f64 * total;
            let j = cum.partition_point(|&c| c < target).min(xs.len() - 1);
            if j + 1 < xs.len() {
                0.5 * (xs[j] + xs[j + 1])
            } else {
                xs[j]
            }
        })
        .collect();
    grid.dedup();
    grid
}

pub fn quantize(a: &QuantizeArgs) -> Outcome {
    check_common(&a.common)?;
    check_k("--k", a.k)?;
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Config(format!("--tol must be positive, got {}", a.tol)));
    }
    if a.p.is_infinite() && a.solver != Solver::Dp {
        return Err(CliError::Config(
            "p = inf is solved by covering; use --solver dp".into(),
        ));
    }
    if a.solver == Solver::Sweep && a.k < 2 {
        return Err(CliError::Config("the sweep solver needs --k >= 2".into()));
    }
    if a.solver == Solver::Sweep && a.common.mode == Mode::Infinite {
        return Err(CliError::Config("the sweep solver supports finite mode only".into()));
    }
    if a.grid == 0 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let m = read_measure(&a.input, a.common.mode)?;
    let config = json!({
        "command": "quantize",
        "input": [path_str(&a.input)],
        "p": p_json(a.p),
        "k": a.k,
        "solver": match a.solver { Solver::Dp => "dp", Solver::Lloyd => "lloyd", Solver::Sweep => "sweep" },
        "mode": mode_name(a.common.mode),
        "tol": a.tol,
        "max_iter": a.max_iter,
        "grid": a.grid,
        "merge_tol": a.common.merge_tol,
    });

    let (quantizer, result, audits, code) = match a.p {
        PNorm::Infinity => {
            let range = m.essential_range(a.common.merge_tol);
            let sol = solve_sup(&range, a.k).map_err(solve_error)?;
            let qz = StepQuantizer::from_levels(sol.levels.clone()).map_err(solve_error)?;
            let mut result = quantizer_json(&qz);
            let extra = json!({
                "error": sol.radius,
                "error_pow": sol.radius,
                "radius": sol.radius,
                "iterations": 0,
                "converged": true,
                "ties": 0,
                "special_form": false,
                "solver": "sup",
                "range_intervals": range.intervals().len(),
            });
            merge(&mut result, extra);
            (qz, result, None, 0)
        }
        PNorm::Finite(p) => {
            let report = match a.solver {
                Solver::Dp => solve_dp(&m, a.k, p),
                Solver::Lloyd => solve_lloyd(
                    &m,
                    a.k,
                    p,
                    &LloydOptions {
                        init_levels: None,
                        tol: a.tol,
                        max_iter: a.max_iter,
                    },
                ),
                Solver::Sweep => solve_sweep(&m, a.k, p, &sweep_grid(&m, a.grid)),
            }
            .map_err(solve_error)?;
            let fallback = matches!(&report.details, SolverDetails::Sweep(s) if s.fallback);
            let (result, audits) = report_json(&report);
            (report.quantizer, result, Some(audits), if fallback { 4 } else { 0 })
        }
    };

    let text = match a.common.format {
        Format::Json => json_report(config, &m.summary().into(), result, audits, &a.common),
        Format::Csv => {
            let q = quantizer.quantized_measure(&m).map_err(solve_error)?;
            let mut buf = Vec::new();
            q.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
    };
    emit(a.common.output.as_deref(), &text)?;
    if code == 4 {
        eprintln!(
            "kquant: solver failure: every sweep candidate was inadmissible; reported the k - 1 level DP solution"
        );
    }
    Ok(code)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn report_json(r: &SolveReport) -> (Value, Value) {
    let mut result = quantizer_json(&r.quantizer);
    let details = match &r.details {
        SolverDetails::Dp { strategy } => json!({ "solver": "dp", "strategy": format!("{strategy:?}").to_lowercase() }),
        SolverDetails::Lloyd { degenerate_cells } => json!({ "solver": "lloyd", "degenerate_cells": degenerate_cells }),
        SolverDetails::Sweep(s) => json!({
            "solver": "sweep",
            "best_s": s.best_s,
            "admissible": s.admissible,
            "inadmissible": s.inadmissible,
            "fallback": s.fallback,
        }),
    };
    merge(
        &mut result,
        json!({
            "error": r.error,
            "error_pow": r.error_pow,
            "iterations": r.iterations,
            "converged": r.converged,
            "ties": r.ties.len(),
            "special_form": r.quantizer.is_special_form(),
            "zero_index": r.quantizer.zero_index(),
        }),
    );
    let audits = json!({
        "solver": details,
        "ambiguous_median": r.ambiguous_median,
        "tie_levels": r.ties.iter().map(|q| q.levels().to_vec()).collect::<Vec<_>>(),
    });
    (result, audits)
}

// ---- variation

fn audit_json(a: &InequalityAudit) -> Value {
    json!({
        "k": a.k,
        "D": a.d_k,
        "Var": a.var_k,
        "2D": 2.0 * a.d_k,
        "D_next": a.d_next,
        "lower": a.lower_holds,
        "upper": a.upper_holds,
        "next": a.next_holds,
        "pass": a.passed(),
    })
}

pub fn variation(a: &VariationArgs) -> Outcome {
    check_common(&a.common)?;
    let PNorm::Finite(p) = a.p else {
        return Err(CliError::Config("variation needs a finite p".into()));
    };
    if a.k.is_some() && a.k_max.is_some() {
        return Err(CliError::Config("give --k or --k-max, not both".into()));
    }
    let ks: Vec<usize> = match (a.k, a.k_max) {
        (_, Some(k_max)) => {
            check_k("--k-max", k_max)?;
            (1..=k_max).collect()
        }
        (k, None) => {
            let k = k.unwrap_or(1);
            check_k("--k", k)?;
            vec![k]
        }
    };
    if a.common.mode == Mode::Infinite {
        return Err(CliError::Config("variation is defined for finite measures only".into()));
    }
    let batch = a.input.is_dir();
    let files = expand_inputs(&a.input)?;
    let measures: Vec<DiscreteMeasure> = files
        .iter()
        .map(|f| read_measure(f, a.common.mode))
        .collect::<Result<_, _>>()?;
    let tables: Vec<Vec<InequalityAudit>> = measures
        .par_iter()
        .map(|m| {
            ks.iter()
                .map(|&k| audit_inequalities(m, k, p))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(solve_error)?;

    let checks: usize = tables.iter().map(Vec::len).sum();
    let checks_passed: usize = tables.iter().flatten().filter(|a| a.passed()).count();
    let cases_passed = tables.iter().filter(|t| t.iter().all(InequalityAudit::passed)).count();

    let text = match a.common.format {
        Format::Json => {
            let config = json!({
                "command": "variation",
                "input": [path_str(&a.input)],
                "batch": batch,
                "p": p,
                "k": ks,
                "mode": mode_name(a.common.mode),
            });
            let result = if batch {
                let cases: Vec<Value> = files
                    .iter()
                    .zip(&measures)
                    .zip(&tables)
                    .map(|((f, m), t)| {
                        json!({
                            "input": label(f),
                            "measure_summary": Summary::from(m.summary()),
                            "table": t.iter().map(audit_json).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "cases": cases })
            } else {
                json!({ "table": tables[0].iter().map(audit_json).collect::<Vec<_>>() })
            };
            let audits = json!({
                "cases": files.len(),
                "passed": cases_passed,
                "checks": checks,
                "checks_passed": checks_passed,
                "tolerance": kquant::variation::AUDIT_TOL,
            });
            json_report(config, &joint_summary(&measures), result, Some(audits), &a.common)
        }
        Format::Csv => {
            let mut out = String::from("input,k,p,D,Var,2D,D_next,lower,upper,next,pass\n");
            for (f, t) in files.iter().zip(&tables) {
                for r in t {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        label(f),
                        r.k,
                        num(p),
                        num(r.d_k),
                        num(r.var_k),
                        num(2.0 * r.d_k),
                        num(r.d_next),
                        r.lower_holds,
                        r.upper_holds,
                        r.next_holds,
                        r.passed()
                    );
                }
            }
            out
        }
    };
    emit(a.common.output.as_deref(), &text)?;
    Ok(0)
}

// ---- ua

pub fn ua(a: &UaArgs) -> Outcome {
    check_common(&a.common)?;
    let Some(p) = a.p else {
        return Err(CliError::Config("ua needs --p".into()));
    };
    if a.input.is_empty() {
        return Err(CliError::Config("ua needs at least one --input".into()));
    }
    check_eps(&a.eps)?;
    let mut files: Vec<PathBuf> = Vec::new();
    for input in &a.input {
        files.extend(expand_inputs(input)?);
    }
    let mut members = Vec::with_capacity(files.len());
    for f in &files {
        members.push((label(f), read_measure(f, a.common.mode)?));
    }
    let k_max = match a.k_max {
        Some(k) => {
            check_k("--k-max", k)?;
            k
        }
        None => members
            .iter()
            .map(|(_, m)| m.len() + usize::from(m.infinite_complement()))
            .max()
            .unwrap_or(1),
    };
    let summary = joint_summary(members.iter().map(|(_, m)| m));
    let sizes: Vec<Value> = members
        .iter()
        .map(|(l, m)| json!({ "label": l, "n": m.len() }))
        .collect();
    let fam = FunctionFamily::new(members, format!("{} inputs", files.len())).map_err(solve_error)?;
    let d = family_decay(&fam, p, k_max, &a.eps).map_err(solve_error)?;

    match a.common.format {
        Format::Json => {
            let config = json!({
                "command": "ua",
                "input": a.input.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
                "p": p_json(p),
                "k_max": k_max,
                "eps": a.eps,
                "mode": mode_name(a.common.mode),
                "merge_tol": a.common.merge_tol,
            });
            let decay: Vec<Value> = (0..k_max)
                .map(|i| {
                    json!({
                        "k": i + 1,
                        "sup_distance": d.sup_distance[i],
                        "sup_variation": d.sup_variation.as_ref().map(|v| v[i]),
                    })
                })
                .collect();
            let result = json!({
                "members": sizes,
                "decay": decay,
                "n_table": d.n_table.iter().map(|(e, n)| json!({ "eps": e, "N": n })).collect::<Vec<_>>(),
                "covering_table": d.covering_table.as_ref().map(|t| {
                    t.iter().map(|(e, n)| json!({ "eps": e, "covering_number": n })).collect::<Vec<_>>()
                }),
            });
            let sandwich: Vec<Value> = d
                .sandwich
                .iter()
                .map(|s| json!({ "eps": s.eps, "r_2eps": s.r_2eps, "N": s.n, "r_eps": s.r_eps, "holds": s.holds }))
                .collect();
            let linf_equal = d
                .covering_table
                .as_ref()
                .map(|t| t.iter().zip(&d.n_table).all(|((_, c), (_, n))| c == n));
            let audits = json!({
                "sandwich": sandwich,
                "linf_covering_equality": linf_equal,
                "note": "finite families: verdicts certify the listed members only",
            });
            let text = json_report(config, &summary, result, Some(audits), &a.common);
            emit(a.common.output.as_deref(), &text)?;
        }
        Format::Csv => {
            let mut decay = String::from("k,sup_distance,sup_variation\n");
            for i in 0..k_max {
                let v = d.sup_variation.as_ref().map(|v| num(v[i])).unwrap_or_default();
                let _ = writeln!(decay, "{},{},{}", i + 1, num(d.sup_distance[i]), v);
            }
            let mut table = String::from("eps,N\n");
            for (e, n) in &d.n_table {
                let _ = writeln!(table, "{},{}", num(*e), n);
            }
            match &a.common.output {
                Some(path) => {
                    emit(Some(path), &decay)?;
                    emit(Some(&n_table_path(path)), &table)?;
                }
                None => emit(None, &format!("{decay}\n{table}"))?,
            }
        }
    }
    Ok(0)
}

/// `decay.csv` -> `decay.n_table.csv`.
fn n_table_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.n_table.csv"))
}

pub fn adversarial(a: &AdversarialArgs) -> Outcome {
    check_common(&a.common)?;
    let PNorm::Finite(p) = a.p else {
        return Err(CliError::Config("the adversarial family needs a finite p".into()));
    };
    let case = adversarial_ball_family(a.r, a.n, a.k, p).map_err(solve_error)?;
    let report = solve_dp(&case.measure, a.k, p).map_err(solve_error)?;
    let moment = case.measure.moment_p(p);
    let ratio = report.error_pow / moment;
    let holds = ratio >= case.lower_bound;
    let text = match a.common.format {
        Format::Json => {
            let config = json!({ "command": "ua adversarial", "r": a.r, "N": a.n, "k": a.k, "p": p });
            let result = json!({
                "theta": case.theta,
                "lower_bound": case.lower_bound,
                "error_pow": report.error_pow,
                "moment_p": moment,
                "ratio": ratio,
                "holds": holds,
                "levels": report.quantizer.levels(),
            });
            json_report(config, &case.measure.summary().into(), result, None, &a.common)
        }
        Format::Csv => format!(
            "key,value\ntheta,{}\nlower_bound,{}\nerror_pow,{}\nmoment_p,{}\nratio,{}\nholds,{}\n",
            num(case.theta),
            num(case.lower_bound),
            num(report.error_pow),
            num(moment),
            num(ratio),
            holds
        ),
    };
    emit(a.common.output.as_deref(), &text)?;
    Ok(0)
}

// ---- covering

pub fn covering(a: &CoveringArgs) -> Outcome {
    check_common(&a.common)?;
    check_eps(&a.eps)?;
    let m = read_measure(&a.input, a.common.mode)?;
    let range = m.essential_range(a.common.merge_tol);
    let counts: Vec<usize> = a
        .eps
        .iter()
        .map(|&e| covering_number(&range, e))
        .collect::<Result<_, _>>()
        .map_err(solve_error)?;
    let text = match a.common.format {
        Format::Json => {
            let config = json!({
                "command": "covering",
                "input": [path_str(&a.input)],
                "eps": a.eps,
                "mode": mode_name(a.common.mode),
                "merge_tol": a.common.merge_tol,
            });
            let result = json!({
                "range_intervals": range.intervals().len(),
                "table": a.eps.iter().zip(&counts).map(|(e, c)| json!({ "eps": e, "covering_number": c })).collect::<Vec<_>>(),
            });
            let linf: Vec<Value> = a
                .eps
                .iter()
                .map(|&e| {
                    let au = linf_ball_bound_audit(e).map_err(solve_error)?;
                    Ok(json!({ "eps": e, "bound": au.bound, "covering": au.covering, "holds": au.holds }))
                })
                .collect::<Result<_, CliError>>()?;
            json_report(
                config,
                &m.summary().into(),
                result,
                Some(json!({ "linf_unit_ball": linf })),
                &a.common,
            )
        }
        Format::Csv => {
            let mut out = String::from("eps,covering_number\n");
            for (e, c) in a.eps.iter().zip(&counts) {
                let _ = writeln!(out, "{},{}", num(*e), c);
            }
            out
        }
    };
    emit(a.common.output.as_deref(), &text)?;
    Ok(0)
}
