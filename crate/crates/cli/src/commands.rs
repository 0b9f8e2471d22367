use std::fmt;

use dtmpade::profile::series_profile;
use dtmpade::rootfind::{default_guess, solve_problem};
use dtmpade::shooting::{shoot_solve, tabulate_profile};
use dtmpade::{
    dtm, ClosureConfig, Error, Problem, ProblemParams, RecurrenceMode, ShootConfig, SolveResult,
};
use serde_json::{json, Value};

use crate::args::{
    parse_grid, CommonArgs, Format, ModeArg, ProblemArg, ProfileArgs, SeriesArgs, Source,
};
use crate::report::{Cell, Report, RunManifest, Table};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

const DEFAULT_SERIES_ORDER: usize = 6;
const SHOOT_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(Error),
    Io(std::io::Error),
    /// `series --check-paper` found a mismatch; the report is still emitted.
    CheckFailed(Box<Report>),
    /// Some of several solves failed; the report is still emitted.
    Partial(Box<Report>, i32),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::CheckFailed(_) => f.write_str("paper series check failed"),
            CliError::Partial(_, _) => f.write_str("one or more solves failed"),
        }
    }
}

/// Exit code for a solver error.
pub fn solver_exit_code(e: &Error) -> i32 {
    match e.root_cause() {
        Error::InvalidParameter(_) | Error::SeriesTooShort { .. } => EXIT_USAGE,
        Error::DegenerateApproximant { .. }
        | Error::DegenerateLimit { .. }
        | Error::Pole { .. }
        | Error::UnsupportedDegree { .. } => EXIT_DEGENERATE,
        _ => EXIT_NONCONVERGENCE,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(e) => solver_exit_code(e),
            CliError::Io(_) | CliError::CheckFailed(_) => EXIT_FAILURE,
            CliError::Partial(_, code) => *code,
        }
    }
}

fn problem_name(p: ProblemArg) -> &'static str {
    match p {
        ProblemArg::FreeConvection => "free-convection",
        ProblemArg::Blasius => "blasius",
    }
}

fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Corrected => "corrected",
        ModeArg::Paper => "paper",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Table => "table",
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Series => "series",
        Source::Integrator => "integrator",
        Source::Both => "both",
    }
}

fn join(v: &[impl ToString]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

struct ManifestExtras {
    tol: Option<f64>,
    source: Option<Source>,
    grid: Option<String>,
    check_paper: bool,
}

fn manifest(subcommand: &str, c: &CommonArgs, extras: ManifestExtras) -> RunManifest {
    let mut argv: Vec<String> = vec![
        subcommand.into(),
        "--problem".into(),
        problem_name(c.problem).into(),
        "--pr".into(),
        c.pr.to_string(),
        "--pade".into(),
        join(&c.pade),
        "--mode".into(),
        mode_name(c.mode).into(),
        "--eta-max".into(),
        c.eta_max.to_string(),
        "--step".into(),
        c.step.to_string(),
        "--max-iter".into(),
        c.max_iter.to_string(),
        "--format".into(),
        format_name(c.format).into(),
        "--digits".into(),
        c.digits.to_string(),
    ];
    let mut opt = |flag: &str, v: Option<String>| {
        if let Some(v) = v {
            argv.push(flag.into());
            argv.push(v);
        }
    };
    opt("--order", c.order.map(|v| v.to_string()));
    opt("--a", c.a.map(|v| v.to_string()));
    opt("--b", c.b.map(|v| v.to_string()));
    opt("--tol", extras.tol.map(|v| v.to_string()));
    opt("--guess", c.guess.as_ref().map(|g| join(g)));
    opt(
        "--source",
        extras.source.map(|s| source_name(s).to_string()),
    );
    opt("--grid", extras.grid.clone());
    if extras.check_paper {
        argv.push("--check-paper".into());
    }
    RunManifest {
        tool: "dtmpade".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand.into(),
        problem: problem_name(c.problem).into(),
        pr: c.pr,
        order: c.order,
        pade: c.pade.clone(),
        mode: mode_name(c.mode).into(),
        a: c.a,
        b: c.b,
        tol: extras.tol,
        max_iter: c.max_iter,
        eta_max: c.eta_max,
        step: c.step,
        guess: c.guess.clone(),
        source: extras.source.map(|s| source_name(s).into()),
        grid: extras.grid,
        check_paper: extras.check_paper,
        format: format_name(c.format).into(),
        digits: c.digits,
        argv,
    }
}

fn check_degrees(c: &CommonArgs) -> Result<(), CliError> {
    if c.pade.is_empty() || c.pade.contains(&0) {
        return Err(CliError::Usage("--pade degrees must be at least 1".into()));
    }
    Ok(())
}

fn guess(c: &CommonArgs) -> Result<Vec<f64>, CliError> {
    let problem: Problem = c.problem.into();
    let g = c.guess.clone().unwrap_or_else(|| default_guess(problem));
    if g.len() != problem.unknowns() {
        return Err(CliError::Usage(format!(
            "--guess needs {} value(s) for {}",
            problem.unknowns(),
            problem_name(c.problem)
        )));
    }
    Ok(g)
}

fn closure_config(c: &CommonArgs, n: usize) -> ClosureConfig {
    let mut cfg = ClosureConfig::new(n, c.problem.into(), c.mode.into());
    if let Some(order) = c.order {
        cfg.series_order = order;
    }
    if let Some(tol) = c.tol {
        cfg.tol = tol;
    }
    cfg.max_iter = c.max_iter;
    cfg
}

fn shoot_config(c: &CommonArgs) -> ShootConfig {
    ShootConfig {
        eta_max: c.eta_max,
        step: c.step,
        tol: c.tol.unwrap_or(SHOOT_TOL),
        max_iter: c.max_iter,
    }
}

fn warn(res: &SolveResult) {
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
}

// ---------------------------------------------------------------- series

/// Published closed-form coefficients at A = B = 1, as exact rationals.
const PAPER_F: [(i64, i64); 7] = [
    (0, 1),
    (0, 1),
    (1, 2),
    (-1, 6),
    (-1, 24),
    (1, 48),
    (-7, 720),
];
const PAPER_THETA: [(i64, i64); 7] = [(1, 1), (1, 1), (0, 1), (0, 1), (-1, 8), (1, 40), (1, 240)];
const PAPER_CHECK_TOL: f64 = 1e-14;

fn ratio((n, d): (i64, i64)) -> f64 {
    n as f64 / d as f64
}

pub fn series(args: &SeriesArgs) -> Result<Report, CliError> {
    let c = &args.common;
    let extras = ManifestExtras {
        tol: None,
        source: None,
        grid: None,
        check_paper: args.check_paper,
    };
    if args.check_paper {
        let sol = dtm::generate(&ProblemParams::free_convection(
            1.0,
            1.0,
            1.0,
            6,
            RecurrenceMode::PaperFidelity,
        ))?;
        let theta = sol.theta_series.expect("free convection");
        let mut table = Table::new(["k", "F(k)", "F paper", "theta(k)", "theta paper", "status"]);
        let mut ok = true;
        let mut rows = Vec::new();
        for k in 0..=6 {
            let (f, fp) = (sol.f_series.coeffs()[k], ratio(PAPER_F[k]));
            let (t, tp) = (theta.coeffs()[k], ratio(PAPER_THETA[k]));
            let pass = (f - fp).abs() <= PAPER_CHECK_TOL && (t - tp).abs() <= PAPER_CHECK_TOL;
            ok &= pass;
            table.push(vec![
                k.into(),
                f.into(),
                fp.into(),
                t.into(),
                tp.into(),
                (if pass { "ok" } else { "MISMATCH" }).into(),
            ]);
            rows.push(json!({ "k": k, "f": f, "f_paper": fp, "theta": t, "theta_paper": tp, "pass": pass }));
        }
        let report = Report {
            manifest: manifest("series", c, extras),
            result: json!({ "check": "paper-series", "pass": ok, "rows": rows }),
            table,
        };
        return if ok {
            Ok(report)
        } else {
            Err(CliError::CheckFailed(Box::new(report)))
        };
    }

    let problem: Problem = c.problem.into();
    let order = c.order.unwrap_or(DEFAULT_SERIES_ORDER);
    let params = ProblemParams {
        problem,
        pr: c.pr,
        a: c.a.unwrap_or(1.0),
        b: c.b.unwrap_or(1.0),
        order,
        mode: c.mode.into(),
    };
    let sol = dtm::generate(&params)?;
    let mut table = Table::new(["k", "F(k)", "theta(k)"]);
    for k in 0..=order {
        table.push(vec![
            k.into(),
            sol.f_series.coeffs()[k].into(),
            sol.theta_series.as_ref().map(|t| t.coeffs()[k]).into(),
        ]);
    }
    Ok(Report {
        manifest: manifest("series", c, extras),
        result: json!({
            "a": params.a,
            "b": params.b,
            "pr": params.pr,
            "order": order,
            "f": sol.f_series.coeffs(),
            "theta": sol.theta_series.as_ref().map(|t| t.coeffs()),
        }),
        table,
    })
}

// ---------------------------------------------------------------- solve

type DegreeResults = Vec<(usize, Result<SolveResult, Error>)>;

fn solve_degrees(c: &CommonArgs) -> Result<DegreeResults, CliError> {
    check_degrees(c)?;
    let x0 = guess(c)?;
    let problem: Problem = c.problem.into();
    let mode: RecurrenceMode = c.mode.into();
    let results = std::thread::scope(|s| {
        let handles: Vec<_> = c
            .pade
            .iter()
            .map(|&n| {
                let x0 = &x0;
                s.spawn(move || {
                    (
                        n,
                        solve_problem(problem, c.pr, mode, &closure_config(c, n), x0),
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    Ok(results)
}

fn solution_json(n: usize, r: &Result<SolveResult, Error>) -> Value {
    match r {
        Ok(res) => json!({ "pade": n, "solution": res }),
        Err(e) => json!({ "pade": n, "error": e.to_string(), "exit_code": solver_exit_code(e) }),
    }
}

/// Single-degree runs report the solver error directly; sweeps keep the
/// table and exit with the first failure's code.
fn finish(
    report: Report,
    results: &[(usize, Result<SolveResult, Error>)],
) -> Result<Report, CliError> {
    let failures: Vec<&Error> = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().err())
        .collect();
    for (n, r) in results {
        match r {
            Ok(res) => warn(res),
            Err(e) => eprintln!("[{n}/{n}]: {e}"),
        }
    }
    match failures.first() {
        None => Ok(report),
        Some(e) if results.len() == 1 => Err(CliError::Solver((*e).clone())),
        Some(e) => Err(CliError::Partial(Box::new(report), solver_exit_code(e))),
    }
}

pub fn solve(c: &CommonArgs) -> Result<Report, CliError> {
    let results = solve_degrees(c)?;
    let problem: Problem = c.problem.into();
    let mode: RecurrenceMode = c.mode.into();
    let mut table = Table::new([
        "pade",
        "order",
        "A",
        "B",
        "residual",
        "iterations",
        "status",
    ]);
    for (n, r) in &results {
        let order = closure_config(c, *n).effective_order(problem, mode);
        match r {
            Ok(res) => table.push(vec![
                format!("[{n}/{n}]").into(),
                order.into(),
                res.a.into(),
                res.b.into(),
                res.residual_norm.into(),
                res.iterations.into(),
                "ok".into(),
            ]),
            Err(e) => table.push(vec![
                format!("[{n}/{n}]").into(),
                order.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                format!("error (exit {})", solver_exit_code(e)).into(),
            ]),
        }
    }
    let tol = c.tol.unwrap_or(ClosureConfig::new(1, problem, mode).tol);
    let report = Report {
        manifest: manifest(
            "solve",
            c,
            ManifestExtras {
                tol: Some(tol),
                source: None,
                grid: None,
                check_paper: false,
            },
        ),
        result: json!({ "solutions": results.iter().map(|(n, r)| solution_json(*n, r)).collect::<Vec<_>>() }),
        table,
    };
    finish(report, &results)
}

// ---------------------------------------------------------------- shoot

pub fn shoot(c: &CommonArgs) -> Result<Report, CliError> {
    let cfg = shoot_config(c);
    let res = shoot_solve(c.problem.into(), c.pr, &cfg, &guess(c)?)?;
    warn(&res);
    let mut table = Table::new(["A", "B", "residual", "iterations"]);
    table.push(vec![
        res.a.into(),
        res.b.into(),
        res.residual_norm.into(),
        res.iterations.into(),
    ]);
    Ok(Report {
        manifest: manifest(
            "shoot",
            c,
            ManifestExtras {
                tol: Some(cfg.tol),
                source: None,
                grid: None,
                check_paper: false,
            },
        ),
        result: json!({ "solution": res }),
        table,
    })
}

// ---------------------------------------------------------------- profile

pub fn profile(args: &ProfileArgs) -> Result<Report, CliError> {
    let c = &args.common;
    let problem: Problem = c.problem.into();
    let grid = parse_grid(&args.grid).map_err(CliError::Usage)?;
    let shoot_cfg = shoot_config(c);
    if let Some(&g) = grid.iter().find(|&&g| g < 0.0) {
        return Err(CliError::Usage(format!(
            "grid point {g} lies outside [0, eta_max]"
        )));
    }
    if matches!(args.source, Source::Integrator | Source::Both) {
        if let Some(&g) = grid.iter().find(|&&g| g > c.eta_max) {
            return Err(CliError::Usage(format!(
                "grid point {g} lies beyond eta_max = {}",
                c.eta_max
            )));
        }
    }

    let (a, b, origin) = match (problem, c.a, c.b) {
        (Problem::FreeConvection, Some(a), Some(b)) => (a, b, "given"),
        (Problem::Blasius, Some(a), _) => (a, 0.0, "given"),
        (Problem::FreeConvection, Some(_), None) | (Problem::FreeConvection, None, Some(_)) => {
            return Err(CliError::Usage("give both --a and --b, or neither".into()));
        }
        _ if args.source == Source::Series => {
            check_degrees(c)?;
            let n = c.pade[0];
            let res = solve_problem(
                problem,
                c.pr,
                c.mode.into(),
                &closure_config(c, n),
                &guess(c)?,
            )?;
            warn(&res);
            (res.a, res.b.unwrap_or(0.0), "dtm-pade")
        }
        _ => {
            let res = shoot_solve(problem, c.pr, &shoot_cfg, &guess(c)?)?;
            warn(&res);
            (res.a, res.b.unwrap_or(0.0), "shooting")
        }
    };

    let order = c.order.unwrap_or(DEFAULT_SERIES_ORDER);
    let series_rows = match args.source {
        Source::Series | Source::Both => {
            let params = ProblemParams {
                problem,
                pr: c.pr,
                a,
                b,
                order,
                mode: c.mode.into(),
            };
            Some(series_profile(&dtm::generate(&params)?, &grid)?)
        }
        Source::Integrator => None,
    };
    let integ_rows = match args.source {
        Source::Integrator | Source::Both => {
            Some(tabulate_profile(problem, a, b, c.pr, &grid, &shoot_cfg)?)
        }
        Source::Series => None,
    };

    let table = match (&series_rows, &integ_rows) {
        (Some(p), None) | (None, Some(p)) => {
            let mut t = Table::new(["eta", "f", "fprime", "theta"]);
            for r in &p.rows {
                t.push(vec![
                    r.eta.into(),
                    r.f.into(),
                    r.fprime.into(),
                    r.theta.into(),
                ]);
            }
            t
        }
        (Some(s), Some(i)) => {
            let mut t = Table::new([
                "eta",
                "f_series",
                "fprime_series",
                "theta_series",
                "f_integrator",
                "fprime_integrator",
                "theta_integrator",
            ]);
            for (rs, ri) in s.rows.iter().zip(&i.rows) {
                t.push(vec![
                    rs.eta.into(),
                    rs.f.into(),
                    rs.fprime.into(),
                    rs.theta.into(),
                    ri.f.into(),
                    ri.fprime.into(),
                    ri.theta.into(),
                ]);
            }
            t
        }
        (None, None) => unreachable!("every source yields at least one profile"),
    };

    Ok(Report {
        manifest: manifest(
            "profile",
            c,
            ManifestExtras {
                tol: None,
                source: Some(args.source),
                grid: Some(args.grid.clone()),
                check_paper: false,
            },
        ),
        result: json!({
            "a": a,
            "b": (problem == Problem::FreeConvection).then_some(b),
            "ab_origin": origin,
            "series_order": series_rows.as_ref().map(|_| order),
            "series": series_rows,
            "integrator": integ_rows,
        }),
        table,
    })
}

// ---------------------------------------------------------------- compare

pub fn compare(c: &CommonArgs) -> Result<Report, CliError> {
    check_degrees(c)?;
    let problem: Problem = c.problem.into();
    let shoot_cfg = shoot_config(c);
    let x0 = guess(c)?;
    let (oracle, results) = std::thread::scope(|s| {
        let oracle = s.spawn(|| shoot_solve(problem, c.pr, &shoot_cfg, &x0));
        let results = solve_degrees(c);
        (oracle.join().expect("oracle thread panicked"), results)
    });
    let oracle = oracle?;
    let results = results?;

    let mut table = Table::new([
        "pade", "mode", "A", "A oracle", "|dA|", "B", "B oracle", "|dB|", "residual", "status",
    ]);
    for (n, r) in &results {
        let label: Cell = format!("[{n}/{n}]").into();
        match r {
            Ok(res) => table.push(vec![
                label,
                mode_name(c.mode).into(),
                res.a.into(),
                oracle.a.into(),
                (res.a - oracle.a).abs().into(),
                res.b.into(),
                oracle.b.into(),
                res.b.zip(oracle.b).map(|(x, y)| (x - y).abs()).into(),
                res.residual_norm.into(),
                "ok".into(),
            ]),
            Err(e) => table.push(vec![
                label,
                mode_name(c.mode).into(),
                Cell::Empty,
                oracle.a.into(),
                Cell::Empty,
                Cell::Empty,
                oracle.b.into(),
                Cell::Empty,
                Cell::Empty,
                format!("error (exit {})", solver_exit_code(e)).into(),
            ]),
        }
    }

    let report = Report {
        manifest: manifest(
            "compare",
            c,
            ManifestExtras {
                tol: c.tol,
                source: None,
                grid: None,
                check_paper: false,
            },
        ),
        result: json!({
            "oracle": oracle,
            "solutions": results.iter().map(|(n, r)| solution_json(*n, r)).collect::<Vec<_>>(),
        }),
        table,
    };
    // a sweep succeeds as long as the oracle and at least one degree do
    if results.iter().any(|(_, r)| r.is_ok()) {
        for (n, r) in &results {
            if let Err(e) = r {
                eprintln!("[{n}/{n}]: {e}");
            }
        }
        Ok(report)
    } else {
        finish(report, &results)
    }
}
