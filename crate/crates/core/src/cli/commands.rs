use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::output::{resolve_out_dir, Outputs, RunManifest, MANIFEST_FILE};
use super::{
    svg, AnalyzeArgs, Cli, Command, MelnikovTask, MethodName, SimulateArgs, SweepArgs, SweepModelName,
    TraceArgs, TraceKind, VariantName, EXIT_NUMERIC, EXIT_OK, EXIT_PARTIAL,
};
use crate::bifurcation::{
    hopf_curves, region3_subpartition, sweep_xbar, trace_cycle_fold, trace_homoclinic, Axis, BifurcationCurve,
    CellStatus, SweepModel, TraceConfig, XbarClass,
};
use crate::equilibria::{
    codim1_loci, find_equilibria, hopf_analysis, region_classify, EquilibriumLabel, Kind, Region3Thresholds, Variant,
};
use crate::error::{Error, Result};
use crate::integrate::{
    estimate_cycle_model, integrate_model, random_initial_state, CycleConfig, Direction, IntegratorConfig, XbarConfig,
};
use crate::melnikov::{cycle_census_unfolded, find_fold, r_curve, HOMOCLINIC_THRESHOLD};
use crate::models::{pencil_slope, AsymParams, ModelSpec, KYR_PER_TIME_UNIT};

/// What a command hands back for the manifest.
struct Ran {
    code: i32,
    seed: Option<u64>,
    config: Value,
}

pub(super) fn dispatch(cli: &Cli, argv: &[String]) -> Result<i32> {
    if let Command::Replay(args) = &cli.command {
        return replay(&args.manifest, cli.out.as_deref());
    }
    let started = Instant::now();
    let mut outs = Outputs::new(resolve_out_dir(cli.out.as_deref()));
    let (name, ran) = match &cli.command {
        Command::Simulate(a) => ("simulate", simulate(a, cli.svg, &mut outs)?),
        Command::Analyze(a) => ("analyze", analyze(a, &mut outs)?),
        Command::Melnikov { task } => ("melnikov", melnikov(task, &mut outs)?),
        Command::Sweep(a) => ("sweep", sweep(a, cli.svg, &mut outs)?),
        Command::Trace(a) => ("trace", trace(a, cli.svg, &mut outs)?),
        Command::Replay(_) => unreachable!("handled above"),
    };
    let manifest = RunManifest {
        tool: "msclimate".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        subcommand: name.into(),
        argv: argv.to_vec(),
        parameters: serde_json::to_value(&cli.command)?,
        seed: ran.seed,
        config: ran.config,
        out_dir: outs.dir.display().to_string(),
        outputs: outs.files.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        exit_code: ran.code,
    };
    outs.write_json(MANIFEST_FILE, &manifest)?;
    Ok(ran.code)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn initial_state(a: &SimulateArgs, dim: usize) -> Result<(Vec<f64>, Option<u64>)> {
    let given = [a.x0, a.y0, a.z0];
    if given.iter().all(Option::is_none) {
        return Ok((random_initial_state(dim, a.seed, 0), Some(a.seed)));
    }
    let names = ["x0", "y0", "z0"];
    let state = (0..dim)
        .map(|i| given[i].ok_or_else(|| Error::InvalidParams(format!("--{} is required with an explicit start", names[i]))))
        .collect::<Result<Vec<f64>>>()?;
    if dim < 3 && a.z0.is_some() {
        return Err(Error::InvalidParams("--z0 applies only to the three-dimensional model".into()));
    }
    Ok((state, None))
}

fn simulate(a: &SimulateArgs, want_svg: bool, outs: &mut Outputs) -> Result<Ran> {
    let spec = a.model.spec()?;
    let (x0, seed) = initial_state(a, spec.dim())?;
    let cfg = match a.method {
        MethodName::Rk45 => IntegratorConfig::rk45(a.abs_tol, a.rel_tol, a.t_end),
        MethodName::Rk4 => IntegratorConfig::rk4(a.step, a.t_end),
    };
    cfg.validate()?;
    let rec = integrate_model(&spec, &x0, &cfg, seed)?;
    outs.write("orbit.csv", rec.to_csv().as_bytes())?;
    outs.write("orbit.json", rec.to_json()?.as_bytes())?;

    let last = rec.states.last().cloned().unwrap_or_else(|| x0.clone());
    let cycle_cfg = CycleConfig::default();
    let (cycle, note) = if a.no_cycle {
        (Value::Null, "skipped".to_string())
    } else {
        match estimate_cycle_model(&spec, &last, Direction::Forward, &cycle_cfg) {
            Ok(c) => (
                json!({
                    "period": c.period,
                    "period_kyr": c.period * KYR_PER_TIME_UNIT,
                    "amplitude_x": c.amplitude_x,
                    "stability": c.stability,
                    "return_ratio": c.return_ratio,
                }),
                "cycle found".to_string(),
            ),
            Err(e @ (Error::NoCycleFound(_) | Error::NonConvergentReturns { .. } | Error::StepLimitExceeded { .. })) => {
                (Value::Null, e.to_string())
            }
            Err(e) => return Err(e),
        }
    };
    let summary = json!({
        "model": spec,
        "initial_state": x0,
        "seed": seed,
        "steps": rec.times.len(),
        "final_time": rec.times.last(),
        "final_time_kyr": rec.times.last().map(|t| t * KYR_PER_TIME_UNIT),
        "final_state": last,
        "cycle": cycle,
        "cycle_note": note,
    });
    outs.write_json("summary.json", &summary)?;
    if want_svg {
        let names = spec.kind().state_names();
        let series: Vec<(&str, Vec<f64>)> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, rec.component(i)))
            .collect();
        outs.write("orbit.svg", svg::line_plot("trajectory", "t", &rec.times, &series).as_bytes())?;
    }
    print_json(&summary)?;
    Ok(Ran {
        code: EXIT_OK,
        seed,
        config: json!({ "integrator": cfg, "cycle": cycle_cfg }),
    })
}

fn planar(spec: &ModelSpec) -> Option<(AsymParams, Variant)> {
    match spec {
        ModelSpec::Sym(m) => Some(((*m).into(), Variant::Sym)),
        ModelSpec::Asym(m) | ModelSpec::Rotated(m) => Some((*m, Variant::Asym)),
        _ => None,
    }
}

fn analyze(a: &AnalyzeArgs, outs: &mut Outputs) -> Result<Ran> {
    let spec = a.model.spec()?;
    let eqs = find_equilibria(&spec)?;
    let double_zero = eqs
        .iter()
        .any(|e| e.eigenvalues.iter().all(|l| l.norm() < 1e-9));
    let mut report = json!({
        "model": spec,
        "equilibria": eqs,
        "stable": eqs.iter().filter(|e| e.kind.is_stable()).map(|e| e.label).collect::<Vec<_>>(),
        "organizing_center": double_zero,
    });
    let mut thresholds = None;
    if let Some((params, variant)) = planar(&spec) {
        if a.subregions && variant == Variant::Sym {
            thresholds = Some(Region3Thresholds {
                homoclinic: HOMOCLINIC_THRESHOLD,
                fold: find_fold()?.1,
            });
        }
        match region_classify(&params, variant, thresholds.as_ref()) {
            Ok(label) => {
                report["region"] = json!(label);
                report["boundary"] = Value::Null;
            }
            Err(Error::BoundaryPoint { curve, .. }) => {
                report["region"] = Value::Null;
                report["boundary"] = json!(curve);
            }
            Err(e) => return Err(e),
        }
        let hopf: Vec<_> = eqs
            .iter()
            .filter(|e| e.kind == Kind::Nonhyperbolic && !double_zero)
            .filter_map(|e| hopf_analysis(&params, variant, e.label).ok())
            .collect();
        report["hopf"] = json!(hopf);
    }
    outs.write_json("analysis.json", &report)?;
    print_json(&report)?;
    Ok(Ran {
        code: EXIT_OK,
        seed: None,
        config: json!({ "region3_thresholds": thresholds }),
    })
}

fn melnikov(task: &MelnikovTask, outs: &mut Outputs) -> Result<Ran> {
    match *task {
        MelnikovTask::Rcurve { from, to, n, mu_sign } => {
            if n < 2 || !(to > from) {
                return Err(Error::InvalidParams("rcurve needs --to > --from and --n >= 2".into()));
            }
            let mut grid: Vec<f64> = (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect();
            let loop_x = std::f64::consts::SQRT_2;
            if mu_sign == 1 && from < loop_x && loop_x < to && !grid.contains(&loop_x) {
                grid.push(loop_x);
                grid.sort_by(f64::total_cmp);
            }
            let curve = r_curve(mu_sign, &grid)?;
            outs.write("rcurve.csv", curve.to_csv().as_bytes())?;
            outs.write_json("rcurve.json", &curve)?;
            print_json(&json!({ "samples": curve.samples.len(), "runs": curve.runs }))?;
        }
        MelnikovTask::Fold => {
            let (x_star, lambda_star) = find_fold()?;
            let out = json!({
                "x_star": x_star,
                "lambda_star": lambda_star,
                "homoclinic_lambda": HOMOCLINIC_THRESHOLD,
                "tangent_slope_homoclinic": pencil_slope(HOMOCLINIC_THRESHOLD, 1.0),
                "tangent_slope_fold": pencil_slope(lambda_star, 1.0),
            });
            outs.write_json("fold.json", &out)?;
            print_json(&out)?;
        }
        MelnikovTask::Census { lambda, mu_sign } => {
            let census = cycle_census_unfolded(lambda, mu_sign)?;
            outs.write_json("census.json", &census)?;
            print_json(&census)?;
        }
    }
    Ok(Ran {
        code: EXIT_OK,
        seed: None,
        config: Value::Null,
    })
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParams(format!("--{flag} is required for this model")))
}

fn sweep(a: &SweepArgs, want_svg: bool, outs: &mut Outputs) -> Result<Ran> {
    let model = match a.model {
        SweepModelName::Ms => SweepModel::Ms {
            q: need(a.q, "q")?,
            s: need(a.s, "s")?,
        },
        SweepModelName::Sym => SweepModel::Sym,
        SweepModelName::Asym => SweepModel::Asym { s: need(a.s, "s")? },
    };
    let p_axis = Axis::new(a.p.lo, a.p.hi, a.np.unwrap_or(a.n))?;
    let r_axis = Axis::new(a.r.lo, a.r.hi, a.nr.unwrap_or(a.n))?;
    let config = XbarConfig {
        integrator: IntegratorConfig::rk45(a.abs_tol, a.rel_tol, a.t_end),
        transient_fraction: a.transient_fraction,
        tol: a.tol,
        ..XbarConfig::default()
    };
    let grid = sweep_xbar(model, p_axis, r_axis, a.seed, &config)?;
    outs.write("sweep.csv", grid.to_csv().as_bytes())?;
    outs.write("sweep.msxb", &grid.to_binary())?;

    let count = |s: CellStatus| grid.status.iter().filter(|x| **x == s).count();
    let failed = count(CellStatus::Failed);
    let warnings = count(CellStatus::NotConverged) + count(CellStatus::Diverged);
    let mut classes = Vec::with_capacity(grid.values.len());
    for j in 0..grid.r_axis.n {
        for i in 0..grid.p_axis.n {
            classes.push(grid.classify(i, j)?);
        }
    }
    if want_svg {
        outs.write("sweep.svg", svg::heatmap(&grid, &classes).as_bytes())?;
    }
    let n_class = |c: XbarClass| classes.iter().filter(|x| **x == c).count();
    print_json(&json!({
        "cells": grid.values.len(),
        "trivial": n_class(XbarClass::Trivial),
        "equilibrium": n_class(XbarClass::Equilibrium),
        "cycle": n_class(XbarClass::Cycle),
        "divergent": n_class(XbarClass::Divergent),
        "warnings": warnings,
        "failed": failed,
    }))?;
    if warnings > 0 {
        eprintln!("warning: {warnings} cells did not settle cleanly (see the status column)");
    }
    if failed > 0 {
        eprintln!("error: {failed} cells failed");
    }
    Ok(Ran {
        code: if failed > 0 { EXIT_PARTIAL } else { EXIT_OK },
        seed: Some(a.seed),
        config: json!(config),
    })
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

/// Slope `(r−1)/(p−1)` at the organizing center, extrapolated linearly in
/// `1 − p` from the two traced points closest to `p = 1`.
fn tangent_slope(curve: &BifurcationCurve) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve.points.iter().copied().filter(|(p, _)| *p < 1.0).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (&(p1, r1), &(p2, r2)) = (pts.first()?, pts.get(1)?);
    let (d1, d2) = (1.0 - p1, 1.0 - p2);
    let (k1, k2) = ((r1 - 1.0) / (p1 - 1.0), (r2 - 1.0) / (p2 - 1.0));
    Some((d2 * k1 - d1 * k2) / (d2 - d1))
}

fn trace(a: &TraceArgs, want_svg: bool, outs: &mut Outputs) -> Result<Ran> {
    let variant: Variant = a.variant.into();
    let s = if a.variant == VariantName::Sym { 0.0 } else { a.s };
    let (p_from, p_to, step, focus) = match (a.variant, a.kind) {
        (_, TraceKind::Hopf | TraceKind::Codim1) => (0.0, 3.0, 0.0, EquilibriumLabel::P1),
        (VariantName::Sym, _) => (0.8, 0.995, 0.005, EquilibriumLabel::P1),
        (VariantName::Asym, _) => (1.4, 1.8, 0.05, EquilibriumLabel::P2),
    };
    let p_from = a.p_from.unwrap_or(p_from);
    let p_to = a.p_to.unwrap_or(p_to);
    let step = a.step.unwrap_or(step);
    let focus = a.focus.map(Into::into).unwrap_or(focus);
    let cfg = TraceConfig {
        r_tol: a.r_tol,
        eps_hc: a.eps_hc,
        r_max: a.r_max,
        ..TraceConfig::default()
    };
    let (lo, hi) = (p_from.min(p_to), p_from.max(p_to));
    let curves = match a.kind {
        TraceKind::Homoclinic => vec![trace_homoclinic(variant, s, (p_from, p_to), step, focus, &cfg)?],
        TraceKind::CycleFold => vec![trace_cycle_fold(variant, s, (p_from, p_to), step, &cfg)?],
        TraceKind::Hopf => hopf_curves(variant, s, lo, hi, a.r_max, 201),
        TraceKind::Codim1 => codim1_loci(variant, s, lo, hi, 201),
        TraceKind::Region3 => {
            if variant != Variant::Sym {
                return Err(Error::InvalidParams("region3 applies to the symmetric variant".into()));
            }
            let part = region3_subpartition((p_from, p_to), step, &cfg)?;
            vec![part.homoclinic, part.fold]
        }
    };
    let curves: Vec<BifurcationCurve> = curves.into_iter().filter(|c| !c.points.is_empty()).collect();
    for c in &curves {
        outs.write(&format!("curve-{}.csv", file_stem(&c.name)), c.to_csv().as_bytes())?;
    }
    outs.write_json("curves.json", &curves)?;
    let summary: Vec<Value> = curves
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "kind": c.kind,
                "points": c.points.len(),
                "tolerance": c.tolerance,
                "saddle": c.saddle,
                "tangent_slope_at_1_1": if variant == Variant::Sym && c.tolerance.is_some() { tangent_slope(c) } else { None },
            })
        })
        .collect();
    outs.write_json("summary.json", &summary)?;
    if want_svg {
        outs.write("curves.svg", svg::curves_plot("bifurcation curves", &curves).as_bytes())?;
    }
    print_json(&summary)?;
    Ok(Ran {
        code: EXIT_OK,
        seed: None,
        config: json!(cfg),
    })
}

fn strip_out_flag(argv: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len());
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<i32> {
    let m = RunManifest::read(manifest_path)?;
    let original = manifest_path.parent().unwrap_or(Path::new("."));
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| original.join("replay"));
    if target == original {
        return Err(Error::InvalidParams("replay target must differ from the original output directory".into()));
    }
    let mut argv = strip_out_flag(&m.argv);
    argv.push("--out".into());
    argv.push(target.display().to_string());
    let code = super::run(argv);
    let mut files = Vec::new();
    let mut all_same = code == m.exit_code;
    for name in &m.outputs {
        let a = std::fs::read(original.join(name))?;
        let b = std::fs::read(target.join(name)).ok();
        let same = b.as_deref() == Some(a.as_slice());
        all_same &= same;
        files.push(json!({ "file": name, "identical": same }));
    }
    print_json(&json!({
        "replayed": m.subcommand,
        "out_dir": target.display().to_string(),
        "exit_code": code,
        "identical": all_same,
        "files": files,
    }))?;
    Ok(if all_same { EXIT_OK } else { EXIT_NUMERIC })
}
