use num_complex::Complex64;
use serde_json::{json, Value};

use super::oracles::{self, OracleKind};
use super::output::{complex_columns, num, Table};
use super::{parse_points, usage, CliError, Dynamics, EvalArgs, EvalFn, LimitFn, LimitsArgs, McArgs, OracleArgs, Outcome, Regime, SdeArgs};
use crate::mcharness;
use crate::normalsde::{self, SdeParams};
use crate::overlaps::{self, SpectralTuple};
use crate::scaledarith::ScaledComplex;

pub fn eval_defaults(a: EvalArgs) -> EvalArgs {
    EvalArgs {
        function: a.function.or(Some(EvalFn::D11)),
        ..a
    }
}

pub fn oracle_defaults(a: OracleArgs) -> OracleArgs {
    OracleArgs {
        oracle: a.oracle.or(Some(OracleKind::All)),
        n: a.n.or(Some(12)),
        samples: a.samples.or(Some(100)),
        seed: a.seed.or(Some(7)),
        ..a
    }
}

pub fn mc_defaults(a: McArgs) -> McArgs {
    let d12 = a.target2.is_some();
    McArgs {
        n: a.n.or(Some(10)),
        target: a.target.or(Some("0".into())),
        radius: a.radius.or(Some(if d12 { 0.25 } else { 0.3 })),
        matrices: a.matrices.or(Some(100_000)),
        seed: a.seed.or(Some(7)),
        z_max: a.z_max.or(Some(3.0)),
        ..a
    }
}

pub fn limits_defaults(a: LimitsArgs) -> LimitsArgs {
    LimitsArgs {
        function: a.function.or(Some(LimitFn::D11)),
        k: a.k.or(Some(2)),
        n_list: a.n_list.or(Some("50,100,200".into())),
        regime: a.regime.or(Some(Regime::Bulk)),
        theta: a.theta.or(Some(0.0)),
        ..a
    }
}

pub fn sde_defaults(a: SdeArgs) -> SdeArgs {
    SdeArgs {
        n: a.n.or(Some(5)),
        t: a.t.or(Some(1.0)),
        runs: a.runs.or(Some(10_000)),
        seed: a.seed.or(Some(7)),
        dt0: a.dt0.or(Some(1e-3)),
        dynamics: a.dynamics.or(Some(Dynamics::Ginibre)),
        ks_max: a.ks_max.or(Some(0.02)),
    }
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

fn points_cell(pts: &[Complex64]) -> Value {
    Value::from(pts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"))
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Outcome, CliError> {
    let f = a.function.expect("defaulted");
    let pts = parse_points(&required(&a.points, "points")?)?;
    if let Some(k) = a.k {
        if k != pts.len() {
            return Err(usage(format!("--k {k} but {} points given", pts.len())));
        }
    }
    let t = SpectralTuple::physical(&pts)?;
    let finite = matches!(f, EvalFn::D11 | EvalFn::D12 | EvalFn::Rho | EvalFn::Expectation);
    let n = if finite { Some(required(&a.n, "N")?) } else { a.n };
    if let Some(n) = n.filter(|_| finite) {
        if (n as usize) < pts.len() {
            return Err(usage(format!("need k <= N, got k={} N={n}", pts.len())));
        }
    }
    let value: ScaledComplex = match f {
        EvalFn::D11 => overlaps::d11_finite(n.unwrap(), &t)?.value,
        EvalFn::D12 => overlaps::d12_finite(n.unwrap(), &t)?.value,
        EvalFn::Rho => overlaps::rho_finite(n.unwrap(), &t)?.value,
        EvalFn::Expectation => overlaps::conditional_expectation_d11(n.unwrap(), &t)?.into(),
        EvalFn::D11Bulk => overlaps::d11_bulk(&t)?.value,
        EvalFn::D12Bulk => overlaps::d12_bulk(&t)?.value,
        EvalFn::RhoBulk => overlaps::rho_bulk(&t)?.value,
        EvalFn::D11Edge => overlaps::d11_edge(&t)?.value,
        EvalFn::D12Edge => overlaps::d12_edge(&t)?.value,
        EvalFn::D11Asymptotic => overlaps::d11_bulk_asymptotic(&t)?.value,
        EvalFn::D12Asymptotic => overlaps::d12_bulk_asymptotic(&t)?.value,
    };
    let mut table = Table::new(&["function", "N", "k", "points", "value_re", "value_im", "exponent"]);
    let mut row = vec![
        serde_json::to_value(f).expect("enum serializes"),
        n.filter(|_| finite).map_or(Value::Null, Value::from),
        Value::from(pts.len()),
        points_cell(&pts),
    ];
    row.extend(complex_columns(value));
    table.push(row);
    Ok(Outcome {
        table,
        seed: None,
        failure: None,
    })
}

pub fn cmd_oracle_check(a: &OracleArgs) -> Result<Outcome, CliError> {
    let n_max = a.n.expect("defaulted");
    let samples = a.samples.expect("defaulted");
    let seed = a.seed.expect("defaulted");
    if !(1..=12).contains(&n_max) {
        return Err(usage("the kernel oracle needs 1 <= N <= 12"));
    }
    let mut table = Table::new(&["oracle", "cases", "measure", "max_deviation", "tolerance", "passed", "worst_case"]);
    let mut failures = Vec::new();
    for kind in a.oracle.expect("defaulted").expand() {
        let tol = a.tolerance.unwrap_or(kind.shipped_tolerance());
        let r = match kind {
            OracleKind::Kernel => oracles::kernel_oracle(n_max, samples, seed, tol)?,
            OracleKind::Lemma1 => oracles::lemma1_oracle(n_max, samples.min(50), seed, tol)?,
            OracleKind::Lemma2 => oracles::lemma2_oracle(samples.min(50), seed, tol)?,
            OracleKind::Quadrature => oracles::quadrature_oracle(tol)?,
            OracleKind::All => unreachable!(),
        };
        if !r.passed() {
            failures.push(format!("{} deviation {:e} > {:e} at {}", kind.name(), r.max_deviation, r.tolerance, r.worst_case));
        }
        table.push(vec![
            Value::from(kind.name()),
            Value::from(r.cases),
            Value::from(if kind.relative() { "relative" } else { "absolute" }),
            num(r.max_deviation),
            num(r.tolerance),
            Value::from(r.passed()),
            Value::from(r.worst_case.clone()),
        ]);
    }
    table.summary = Some(json!({ "passed": failures.is_empty() }));
    Ok(Outcome {
        table,
        seed: Some(seed),
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

fn single_point(s: &str, flag: &str) -> Result<Complex64, CliError> {
    match parse_points(s)?.as_slice() {
        [z] => Ok(*z),
        _ => Err(usage(format!("--{flag} takes one complex number"))),
    }
}

pub fn cmd_mc(a: &McArgs) -> Result<Outcome, CliError> {
    let n = a.n.expect("defaulted");
    let target = single_point(a.target.as_deref().expect("defaulted"), "target")?;
    let radius = a.radius.expect("defaulted");
    let matrices = a.matrices.expect("defaulted");
    let seed = a.seed.expect("defaulted");
    if n == 0 || !(radius > 0.0) || matrices == 0 {
        return Err(usage("need N >= 1, radius > 0 and matrices >= 1"));
    }
    let (est, pred) = match &a.target2 {
        None => (
            mcharness::estimate_d11(n, target, radius, matrices, seed)?,
            Complex64::new(mcharness::predicted_d11(n, target, radius)?, 0.0),
        ),
        Some(t2) => {
            let t2 = single_point(t2, "target2")?;
            (
                mcharness::estimate_d12(n, target, t2, radius, matrices, seed)?,
                mcharness::predicted_d12(n, target, t2, radius)?,
            )
        }
    };
    let z = (est.mean.re - pred.re) / est.stderr;
    let mut table = Table::new(&[
        "estimator",
        "N",
        "target_re",
        "target_im",
        "target2_re",
        "target2_im",
        "radius",
        "n_matrices",
        "rejected",
        "count",
        "mean_re",
        "mean_im",
        "stderr",
        "prediction_re",
        "prediction_im",
        "z_score",
        "max_sum_rule_error",
    ]);
    table.push(vec![
        Value::from(if est.target2.is_some() { "d12" } else { "d11" }),
        Value::from(n),
        num(target.re),
        num(target.im),
        est.target2.map_or(Value::Null, |t| num(t.re)),
        est.target2.map_or(Value::Null, |t| num(t.im)),
        num(radius),
        Value::from(est.n_matrices),
        Value::from(est.rejected),
        Value::from(est.count),
        num(est.mean.re),
        num(est.mean.im),
        num(est.stderr),
        num(pred.re),
        num(pred.im),
        num(z),
        num(est.max_sum_rule_error),
    ]);
    let z_max = a.z_max.expect("defaulted");
    let failure = (!(z.abs() <= z_max)).then(|| format!("|z| = {:.3} exceeds {z_max}", z.abs()));
    Ok(Outcome {
        table,
        seed: Some(seed),
        failure,
    })
}

/// Bulk and edge local coordinates used when `--points` is absent; away from 0 so that the
/// `O(1/N)` bulk correction does not vanish.
const DEFAULT_LIMIT_POINTS: [(f64, f64); 4] = [(0.3, 0.1), (0.9, -0.4), (-0.2, 0.7), (0.5, 0.5)];

pub fn cmd_limits(a: &LimitsArgs) -> Result<Outcome, CliError> {
    let f = a.function.expect("defaulted");
    let regime = a.regime.expect("defaulted");
    let theta = a.theta.expect("defaulted");
    let pts = match &a.points {
        Some(s) => parse_points(s)?,
        None => {
            let k = a.k.expect("defaulted");
            if !(1..=DEFAULT_LIMIT_POINTS.len()).contains(&k) {
                return Err(usage("default points exist for 1 <= k <= 4; pass --points"));
            }
            DEFAULT_LIMIT_POINTS[..k].iter().map(|&(re, im)| Complex64::new(re, im)).collect()
        }
    };
    let ns: Vec<u64> = required(&a.n_list, "N-list")?
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| usage(format!("bad N in --N-list: {s:?}"))))
        .collect::<Result<_, _>>()?;
    let t = SpectralTuple::physical(&pts)?;
    let limit = match (f, regime) {
        (LimitFn::D11, Regime::Bulk) => overlaps::d11_bulk(&t)?,
        (LimitFn::D12, Regime::Bulk) => overlaps::d12_bulk(&t)?,
        (LimitFn::D11, Regime::Edge) => overlaps::d11_edge(&t)?,
        (LimitFn::D12, Regime::Edge) => overlaps::d12_edge(&t)?,
    }
    .to_complex()?;
    let mut table = Table::new(&[
        "regime",
        "function",
        "N",
        "k",
        "points",
        "scaled_re",
        "scaled_im",
        "limit_re",
        "limit_im",
        "residual",
        "residual_ratio",
    ]);
    let mut prev: Option<f64> = None;
    for n in ns {
        if (n as usize) < pts.len() {
            return Err(usage(format!("N = {n} is smaller than k = {}", pts.len())));
        }
        let (tn, scale) = match regime {
            Regime::Bulk => (t.clone(), n as f64),
            Regime::Edge => (t.to_edge(n as f64, theta), (n as f64).sqrt()),
        };
        let v = match f {
            LimitFn::D11 => overlaps::d11_finite(n, &tn)?,
            LimitFn::D12 => overlaps::d12_finite(n, &tn)?,
        };
        let scaled = (v.value / scale).to_complex()?;
        let residual = (scaled - limit).norm();
        table.push(vec![
            serde_json::to_value(regime).expect("enum serializes"),
            serde_json::to_value(f).expect("enum serializes"),
            Value::from(n),
            Value::from(pts.len()),
            points_cell(&pts),
            num(scaled.re),
            num(scaled.im),
            num(limit.re),
            num(limit.im),
            num(residual),
            prev.map_or(Value::Null, |p| num(p / residual)),
        ]);
        prev = Some(residual);
    }
    Ok(Outcome {
        table,
        seed: None,
        failure: None,
    })
}

pub fn cmd_sde(a: &SdeArgs) -> Result<Outcome, CliError> {
    let n = a.n.expect("defaulted");
    let t_end = a.t.expect("defaulted");
    let runs = a.runs.expect("defaulted");
    let seed = a.seed.expect("defaulted");
    let params = match a.dynamics.expect("defaulted") {
        Dynamics::Ginibre => SdeParams::ginibre(),
        Dynamics::AsWritten => SdeParams::as_written(),
    };
    let ens = normalsde::run_to_time(n, t_end, a.dt0.expect("defaulted"), runs, seed, &params)?;
    let ks = normalsde::radial_ks(&ens);
    let mut table = Table::new(&["run", "t_end", "particle", "re", "im"]);
    for (run, state) in &ens.states {
        for (i, p) in state.positions.iter().enumerate() {
            table.push(vec![Value::from(*run), num(state.time), Value::from(i), num(p.re), num(p.im)]);
        }
    }
    let summary = json!({
        "N": n,
        "t_end": t_end,
        "runs": runs,
        "dropped": ens.dropped,
        "radial_samples": ks.samples,
        "ks_statistic": ks.statistic,
        "ks_p_value": ks.p_value,
    });
    table.summary = Some(summary);
    table.json_summary_only = true;
    let ks_max = a.ks_max.expect("defaulted");
    let failure = (!(ks.statistic <= ks_max)).then(|| format!("radial KS distance {:.4} exceeds {ks_max}", ks.statistic));
    Ok(Outcome {
        table,
        seed: Some(seed),
        failure,
    })
}
