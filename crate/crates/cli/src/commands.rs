use std::path::{Path, PathBuf};

use khess_core::bifurcation::{a_grid, count_solutions, intersection_count, lambda_of_a, solutions, BifurcationCurve};
use khess_core::classify::{classify_orbit, slope_checks, Verdict};
use khess_core::exponents::{delta_param, q_jl, q_star, stationary_points, PointLabel};
use khess_core::solver::{
    estimate_lambda_star, maximal_solution_iterate, singular_solution, solve_ivp, MaximalOutcome, RadialSolution,
};
use khess_core::transform::forward;
use khess_core::weights::check_assumptions;
use khess_core::{ProblemParams, WeightSpec};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt_f64, num, print_json, read_table, write_table, ORBIT_COLUMNS, PROFILE_COLUMNS, SWEEP_COLUMNS};
use crate::report::{self, obj};
use crate::{Cli, Command, Common, Grid, TextFormat};

/// Default last orbit time for `classify`; later times only add separatrix drift.
const CLASSIFY_T_END: f64 = 20.0;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Exponents { common, l0, linf, format } => exponents(&common, l0, linf, format),
        Command::CheckWeight { common } => check_weight(&common),
        Command::Solve { common, lambda, w0, rmax, out } => solve(&common, lambda, w0, rmax, out),
        Command::Orbit { common, lambda, from_profile, out } => orbit(&common, lambda, &from_profile, out),
        Command::Singular { common, out } => singular(&common, out),
        Command::Classify { common, lambda, w0, t_end, emit_orbit } => classify(&common, lambda, w0, t_end, emit_orbit),
        Command::Sweep { common, grid, out } => sweep(&common, grid, out),
        Command::Count { common, lambda, curve, grid } => count(&common, lambda, curve, grid),
        Command::Intersections { common, a, interval } => intersections(&common, a, interval),
        Command::Maximal { common, lambda, tol, max_iter, out } => maximal(&common, lambda, tol, max_iter, out),
        Command::LambdaStar { common } => lambda_star(&common),
    }
}

fn head(command: &str) -> Map<String, Value> {
    obj(json!({ "command": command }))
}

fn params_json(p: &ProblemParams, wt: &WeightSpec) -> Value {
    json!({
        "n": p.n, "k": p.k, "q": num(p.q), "lambda": num(p.lambda),
        "weight": wt.kind().as_str(), "l0": num(wt.l0()), "l_inf": num(wt.l_inf()),
    })
}

fn target(flag: Option<PathBuf>, cfg: Option<&PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.cloned())
        .ok_or_else(|| CliError::Usage(format!("no output path: pass --out or set output.{what}")))
}

fn path_str(p: &Path) -> Value {
    json!(p.display().to_string())
}

fn exponents(common: &Common, l0: Option<f64>, linf: Option<f64>, format: TextFormat) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(None)?;
    let (l0, linf) = match (l0, linf) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let wt = cfg.weight()?;
            (a.unwrap_or(wt.l0()), b.unwrap_or(wt.l_inf()))
        }
    };
    let qs = q_star(p.k, l0, p.n)?;
    let qjl0 = q_jl(p.k, l0, p.n)?;
    let qjl_inf = q_jl(p.k, linf, p.n)?;
    let delta = delta_param(p.k, linf);
    let at0 = stationary_points(&p, l0);
    let at_inf = stationary_points(&p, linf);
    let p4 = at0.iter().find(|s| s.label == PointLabel::P4).map(|s| (s.x, s.y));
    if format == TextFormat::Text {
        println!("n         {}", p.n);
        println!("k         {}", p.k);
        println!("q         {}", fmt_f64(p.q));
        println!("l0        {}", fmt_f64(l0));
        println!("l_inf     {}", fmt_f64(linf));
        println!("q_star    {}", fmt_f64(qs));
        println!("q_jl      {}", fmt_f64(qjl0));
        println!("q_jl_inf  {}", fmt_f64(qjl_inf));
        println!("delta     {}", fmt_f64(delta));
        println!();
        println!("{:<6} {:<5} {:>24} {:>24}  kind", "l", "point", "x", "y");
        for (name, pts) in [("l0", &at0), ("l_inf", &at_inf)] {
            for s in pts.iter() {
                println!(
                    "{:<6} {:<5} {:>24} {:>24}  {}",
                    name,
                    report::label(s.label),
                    fmt_f64(s.x),
                    fmt_f64(s.y),
                    s.kind.as_str()
                );
            }
        }
        return Ok(());
    }
    let mut m = head("exponents");
    m.insert("n".into(), json!(p.n));
    m.insert("k".into(), json!(p.k));
    m.insert("q".into(), num(p.q));
    m.insert("l0".into(), num(l0));
    m.insert("l_inf".into(), num(linf));
    m.insert("q_star".into(), num(qs));
    m.insert("q_jl".into(), num(qjl0));
    m.insert("q_jl_inf".into(), num(qjl_inf));
    m.insert("delta".into(), num(delta));
    m.insert("P4".into(), p4.map_or(Value::Null, |(x, y)| json!([num(x), num(y)])));
    m.insert(
        "stationary_points".into(),
        json!({
            "l0": at0.iter().map(report::point).collect::<Vec<_>>(),
            "l_inf": at_inf.iter().map(report::point).collect::<Vec<_>>(),
        }),
    );
    print_json(m);
    Ok(())
}

fn check_weight(common: &Common) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(None)?;
    let wt = cfg.weight()?;
    let rep = check_assumptions(&wt, &p);
    let mut m = head("check-weight");
    m.insert("params".into(), params_json(&p, &wt));
    m.extend(report::assumptions(&rep));
    print_json(m);
    Ok(())
}

fn solve(common: &Common, lambda: Option<f64>, w0: f64, rmax: f64, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(lambda)?;
    let wt = cfg.weight()?;
    let ic = cfg.integrator()?;
    let out = target(out, cfg.output.profile.as_ref(), "profile")?;
    let sol = solve_ivp(&p, &wt, w0, rmax, &ic)?;
    write_table(&out, &PROFILE_COLUMNS, &report::profile_rows(&sol), cfg.format())?;
    let mut m = head("solve");
    m.insert("params".into(), params_json(&p, &wt));
    m.insert("profile".into(), report::profile_summary(&sol));
    m.insert("out".into(), path_str(&out));
    print_json(m);
    Ok(())
}

fn orbit(common: &Common, lambda: Option<f64>, from: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(lambda)?;
    let wt = cfg.weight()?;
    let out = target(out, cfg.output.orbit.as_ref(), "orbit")?;
    let rows = read_table(from, &PROFILE_COLUMNS)?;
    let mut pts = Vec::with_capacity(rows.len());
    for r in &rows {
        let pt = forward(r[1], r[2], r[0], &p, &wt)?;
        pts.push(vec![pt.t, pt.x, pt.y]);
    }
    write_table(&out, &ORBIT_COLUMNS, &pts, cfg.format())?;
    let mut m = head("orbit");
    m.insert("params".into(), params_json(&p, &wt));
    m.insert("samples".into(), json!(pts.len()));
    if let (Some(a), Some(b)) = (pts.first(), pts.last()) {
        m.insert("t_range".into(), json!([num(a[0]), num(b[0])]));
    }
    m.insert("out".into(), path_str(&out));
    print_json(m);
    Ok(())
}

fn singular(common: &Common, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(None)?;
    let wt = cfg.weight()?;
    let ic = cfg.integrator()?;
    let (lt, prof) = singular_solution(&p, &wt, &ic)?;
    let out = out.or_else(|| cfg.output.profile.clone());
    if let Some(path) = &out {
        write_table(path, &PROFILE_COLUMNS, &report::profile_rows(&prof), cfg.format())?;
    }
    let mut m = head("singular");
    m.insert("params".into(), params_json(&p, &wt));
    m.insert("lambda_tilde".into(), num(lt));
    m.insert("w_tilde_at_1".into(), prof.w_at(1.0).map_or(Value::Null, num));
    m.insert("profile".into(), report::profile_summary(&prof));
    m.insert("out".into(), out.as_deref().map_or(Value::Null, path_str));
    print_json(m);
    Ok(())
}

fn classify(
    common: &Common,
    lambda: Option<f64>,
    w0: f64,
    t_end: Option<f64>,
    emit: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(lambda)?;
    let wt = cfg.weight()?;
    let ic = cfg.integrator()?;
    let t_end = t_end.unwrap_or(if cfg.integrator.t_span.is_some() { ic.t_span.1 } else { CLASSIFY_T_END });
    let sol = solve_ivp(&p, &wt, w0, t_end.exp(), &ic)?;
    let orb = sol.to_orbit()?;
    let cls = classify_orbit(&orb, &p, &wt);
    let rep = check_assumptions(&wt, &p);
    if let Some(path) = &emit {
        write_table(path, &ORBIT_COLUMNS, &report::orbit_rows(&orb), cfg.format())?;
    }
    let slopes = if cls.verdict == Verdict::Undetermined {
        Value::Null
    } else {
        slope_checks(&orb, &cls, &p, &wt).map_or(Value::Null, |s| report::slopes(&s))
    };
    let mut m = head("classify");
    m.insert("params".into(), params_json(&p, &wt));
    m.extend(report::classification(&cls));
    m.insert("slopes".into(), slopes);
    m.insert("assumptions".into(), json!({ "entire_ok": rep.entire_ok(), "failing": report::failing(&rep) }));
    m.insert("orbit".into(), report::orbit_summary(&orb));
    m.insert("emit_orbit".into(), emit.as_deref().map_or(Value::Null, path_str));
    print_json(m);
    Ok(())
}

/// λ(a) on the grid, in parallel, with λ_ref = λ̃.
fn build_curve(cfg: &RunConfig, grid: Grid) -> Result<BifurcationCurve, CliError> {
    let p = cfg.problem(None)?;
    let wt = cfg.weight()?;
    let ic = cfg.integrator()?;
    let (lt, _) = singular_solution(&p, &wt, &ic)?;
    let a = a_grid(grid.amin, grid.amax, grid.count)?;
    let pts = a.par_iter().map(|&a| lambda_of_a(&p, &wt, lt, a, &ic).map(|l| (a, l))).collect::<Result<Vec<_>, _>>()?;
    Ok(BifurcationCurve::from_points(pts, lt, p, wt, ic)?)
}

fn sweep(common: &Common, grid: Grid, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = common.load()?;
    let out = target(out, cfg.output.sweep.as_ref(), "sweep")?;
    let curve = build_curve(&cfg, grid)?;
    let rows: Vec<Vec<f64>> = curve.points.iter().map(|&(a, l)| vec![a, l]).collect();
    write_table(&out, &SWEEP_COLUMNS, &rows, cfg.format())?;
    let mut m = head("sweep");
    m.insert("params".into(), params_json(&curve.params, &curve.weight));
    m.insert("lambda_tilde".into(), num(curve.lambda_tilde));
    m.insert("points".into(), json!(curve.points.len()));
    m.insert("max_lambda".into(), num(curve.max_lambda()));
    m.insert("end_gap".into(), num(curve.end_gap()));
    m.insert("out".into(), path_str(&out));
    print_json(m);
    Ok(())
}

fn count(common: &Common, query: f64, curve: Option<PathBuf>, grid: Grid) -> Result<(), CliError> {
    let cfg = common.load()?;
    let curve = match &curve {
        Some(path) => {
            let rows = read_table(path, &SWEEP_COLUMNS)?;
            let pts = rows.iter().map(|r| (r[0], r[1])).collect();
            let (p, wt, ic) = (cfg.problem(None)?, cfg.weight()?, cfg.integrator()?);
            let (lt, _) = singular_solution(&p, &wt, &ic)?;
            BifurcationCurve::from_points(pts, lt, p, wt, ic)?
        }
        None => build_curve(&cfg, grid)?,
    };
    let roots = solutions(&curve, query)?;
    let c = count_solutions(&curve, query)?;
    let mut m = head("count");
    m.insert("lambda".into(), num(query));
    m.insert("count".into(), json!(c));
    m.insert("roots".into(), json!(roots.iter().map(|&a| num(a)).collect::<Vec<_>>()));
    m.insert("grid".into(), json!([num(curve.grid.0), num(curve.grid.1), curve.grid.2]));
    print_json(m);
    Ok(())
}

fn intersections(common: &Common, a: f64, interval: (f64, f64)) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(None)?;
    let wt = cfg.weight()?;
    let mut ic = cfg.integrator()?;
    if !(a > 0.0) {
        return Err(CliError::Usage(format!("--a must be positive, got {a}")));
    }
    // the singular profile has to cover the interval
    ic.singular_t_end = ic.singular_t_end.max(interval.1.ln() + 1.0);
    let (lt, sing) = singular_solution(&p, &wt, &ic)?;
    let reg: RadialSolution = solve_ivp(&p.with_lambda(lt)?, &wt, -a, interval.1, &ic)?;
    let z = intersection_count(&sing, &reg, interval)?;
    let mut m = head("intersections");
    m.insert("params".into(), params_json(&p, &wt));
    m.insert("a".into(), num(a));
    m.insert("lambda_tilde".into(), num(lt));
    m.insert("interval".into(), json!([num(interval.0), num(interval.1)]));
    m.insert("count".into(), json!(z.count));
    m.insert("roots".into(), json!(z.roots.iter().map(|&r| num(r)).collect::<Vec<_>>()));
    m.insert("regular_truncated".into(), json!(reg.truncated.is_some()));
    print_json(m);
    Ok(())
}

fn maximal(
    common: &Common,
    lambda: Option<f64>,
    tol: f64,
    max_iter: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(lambda)?;
    let wt = cfg.weight()?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(CliError::Usage("--tol must be positive and --max-iter at least 1".into()));
    }
    let outcome = maximal_solution_iterate(&p, &wt, tol, max_iter)?;
    let out = out.or_else(|| cfg.output.profile.clone());
    let mut m = head("maximal");
    m.insert("params".into(), params_json(&p, &wt));
    match &outcome {
        MaximalOutcome::Converged { solution, iterations } => {
            if let Some(path) = &out {
                write_table(path, &PROFILE_COLUMNS, &report::profile_rows(solution), cfg.format())?;
            }
            m.insert("status".into(), json!("converged"));
            m.insert("iterations".into(), json!(iterations));
            m.insert("u0".into(), num(solution.w0 + 1.0));
            m.insert("out".into(), out.as_deref().map_or(Value::Null, path_str));
        }
        MaximalOutcome::Diverged { iterations, min_u } => {
            m.insert("status".into(), json!("diverged"));
            m.insert("iterations".into(), json!(iterations));
            m.insert("min_u".into(), num(*min_u));
        }
        MaximalOutcome::NotConverged { iterations, last_change } => {
            m.insert("status".into(), json!("not_converged"));
            m.insert("iterations".into(), json!(iterations));
            m.insert("last_change".into(), num(*last_change));
        }
    }
    print_json(m);
    Ok(())
}

fn lambda_star(common: &Common) -> Result<(), CliError> {
    let cfg = common.load()?;
    let p = cfg.problem(None)?;
    let wt = cfg.weight()?;
    let ic = cfg.integrator()?;
    let ls = estimate_lambda_star(&p, &wt, &ic)?;
    let mut m = head("lambda-star");
    m.insert("params".into(), params_json(&p, &wt));
    m.insert("lower".into(), num(ls.lower));
    m.insert("upper".into(), num(ls.upper));
    m.insert("analytic_lower".into(), num(ls.analytic_lower));
    m.insert("bisections".into(), json!(ls.bisections));
    print_json(m);
    Ok(())
}
