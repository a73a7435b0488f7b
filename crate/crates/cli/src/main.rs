#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod family;
mod output;

use std::process::ExitCode;

use clap::Parser;
use evanskit::evans::{count_zeros, evans_scan, jost_function_reference, verify_identity, weighted_exponent, PipelineOptions};
use evanskit::jost::{solve_jost_mixed, solve_jost_volterra, solve_jost_weighted, JostSolution, Route, Side};
use evanskit::system::load_config;
use evanskit::{Error, StageExt, C64};
use serde_json::{json, Value};

use args::{parse_complex, parse_contour, parse_grid, Cli, Command, Common, Format, RouteArg, SideArg};
use family::Family;
use output::{emit, matrix, pair, rows_csv, rows_json, Row};

/// Failures, each with its exit status.
#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("identity residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Residual { residual: f64, tol: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(Error),
    #[error("{0}")]
    NearZero(Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Residual { .. } => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) | Failure::Io(_) => 3,
            Failure::NearZero(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::NearZeroContour { .. } => Failure::NearZero(e),
            _ => Failure::Solver(e),
        }
    }
}

fn route_of(r: RouteArg) -> Route {
    match r {
        RouteArg::Volterra => Route::Volterra,
        RouteArg::Weighted => Route::Weighted,
        RouteArg::Mixed => Route::Mixed,
    }
}

fn prepare(common: &Common) -> Result<Family, Failure> {
    if !(common.tol > 0.0) {
        return Err(Failure::Config(format!("--tol must be positive, got {}", common.tol)));
    }
    if common.nodes < 8 {
        return Err(Failure::Config(format!("--nodes must be at least 8, got {}", common.nodes)));
    }
    if common.x_max.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
        return Err(Failure::Config("--X must be positive".into()));
    }
    if common.jobs == Some(0) {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    let config = load_config(&common.problem).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(Family::new(config, common.x_max, common.continuity))
}

fn parameter(family: &Family, k: Option<&str>) -> Result<C64, Failure> {
    match k {
        Some(text) => parse_complex(text).map_err(Failure::Config),
        None => family
            .default_parameter()
            .ok_or_else(|| Failure::Config("no spectral parameter: pass --k or set \"k\" in the problem file".into())),
    }
}

fn options(common: &Common, route: Option<RouteArg>) -> PipelineOptions {
    PipelineOptions { route: route.map(route_of), nystrom_nodes: Some(common.nodes), ..Default::default() }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Failure::Config(e.to_string()))
}

fn status_of(family: &Family, z: C64, continuity: bool) -> &'static str {
    if family.is_schrodinger() && continuity && z.im == 0.0 && z.re != 0.0 {
        "boundary"
    } else {
        "ok"
    }
}

fn verify(a: &args::VerifyArgs) -> Result<(), Failure> {
    let family = prepare(&a.common)?;
    let z = parameter(&family, a.k.as_deref())?;
    let opts = options(&a.common, a.route);
    let (report, jost_function) = pool(1)?.install(|| -> Result<_, Failure> {
        let m = family.at(z)?;
        let report = verify_identity(&m.ctx, &m.factorization, &opts)?;
        let jost = match &m.case {
            Some(case) => Some(jost_function_reference(case, m.ctx.x_max()).stage("shooting Jost function")?),
            None => None,
        };
        Ok((report, jost))
    })?;
    let text = match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = report.to_json();
            v["problem"] = json!(family.name);
            v["z"] = pair(z);
            v["status"] = json!(status_of(&family, z, a.common.continuity));
            if let Some(j) = jost_function {
                v["jost_function"] = pair(j);
            }
            serde_json::to_string_pretty(&v).expect("report serializes")
        }
        Format::Csv => rows_csv(&[Row { z, report: Some(&report), status: status_of(&family, z, a.common.continuity) }])
            .map_err(Failure::Config)?,
    };
    emit(&text, a.common.out.as_deref())?;
    if report.identity_residual < a.common.tol {
        Ok(())
    } else {
        Err(Failure::Residual { residual: report.identity_residual, tol: a.common.tol })
    }
}

fn scan(a: &args::ScanArgs) -> Result<(), Failure> {
    let family = prepare(&a.common)?;
    let points = parse_grid(&a.grid).map_err(Failure::Config)?;
    let opts = options(&a.common, a.route);
    let threads = a.common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let fam = |z: C64| family.at(z).map(|m| (m.ctx, m.factorization));
    let result = pool(threads)?.install(|| evans_scan(&fam, &points, &opts, false));
    let rows: Vec<Row> = result
        .points
        .iter()
        .zip(&result.values)
        .map(|(&z, v)| match v {
            Ok(r) => Row { z, report: Some(r), status: status_of(&family, z, a.common.continuity) },
            Err(_) => Row { z, report: None, status: "fail" },
        })
        .collect();
    for (z, v) in result.points.iter().zip(&result.values) {
        if let Err(e) = v {
            eprintln!("evanskit: point {z} failed: {e}");
        }
    }
    let text = match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => rows_csv(&rows).map_err(Failure::Config)?,
        Format::Json => {
            let errors: Vec<Option<String>> = result.values.iter().map(|v| v.as_ref().err().map(ToString::to_string)).collect();
            serde_json::to_string_pretty(&rows_json(&rows, &errors)).expect("rows serialize")
        }
    };
    emit(&text, a.common.out.as_deref())?;
    Ok(())
}

fn count(a: &args::CountArgs) -> Result<(), Failure> {
    let family = prepare(&a.common)?;
    let (center, radius, n) = parse_contour(&a.contour).map_err(Failure::Config)?;
    if a.max_points < n {
        return Err(Failure::Config(format!("--max-points {} is below the {n} starting points", a.max_points)));
    }
    if family.is_schrodinger() && !(center.im - radius > 0.0) && !a.common.continuity {
        return Err(Failure::Config("the contour leaves the upper half-plane Im k > 0".into()));
    }
    let opts = options(&a.common, None);
    let fam = |z: C64| family.at(z).map(|m| (m.ctx, m.factorization));
    let result = pool(1)?.install(|| count_zeros(&fam, center, radius, n, a.max_points, &opts))?;
    println!("{}", result.winding);
    if let Some(path) = a.common.out.as_deref() {
        let report = json!({
            "problem": family.name,
            "center": pair(center),
            "radius": radius,
            "winding": result.winding,
            "points": result.points.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
            "values": result.values.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        });
        emit(&serde_json::to_string_pretty(&report).expect("report serializes"), Some(path))?;
    }
    Ok(())
}

fn jost_report(family: &Family, z: C64, s: &JostSolution) -> Value {
    json!({
        "problem": family.name,
        "z": pair(z),
        "route": s.route,
        "side": s.side,
        "index": s.index,
        "groups": s.groups,
        "initial": matrix(&s.initial),
        "projection": matrix(&s.projection),
        "projection_defect": s.projection_defect,
        "range_check": s.projection_defect < 1e-9,
        "converged": s.converged,
        "iterations": s.iterations,
        "tau": s.tau,
        "contraction_ratio": s.contraction_ratio,
        "operator_bound": s.operator_bound,
        "defect_decay_ratio": s.defect_decay_ratio(),
        "defect": s.defect.iter().map(|&(x, d)| json!([x, d])).collect::<Vec<_>>(),
    })
}

fn jost(a: &args::JostArgs) -> Result<(), Failure> {
    let family = prepare(&a.common)?;
    let z = parameter(&family, a.k.as_deref())?;
    let side = match a.side {
        SideArg::Plus => Side::Plus,
        SideArg::Minus => Side::Minus,
    };
    if a.route == RouteArg::Mixed && a.index.is_none() {
        return Err(Failure::Config("the mixed route needs --index".into()));
    }
    let sol = pool(1)?.install(|| -> Result<_, Failure> {
        let m = family.at(z)?;
        let ctx = &m.ctx;
        let q = ctx.dichotomy();
        let sol = match a.route {
            RouteArg::Volterra => solve_jost_volterra(ctx, &q, side),
            RouteArg::Weighted => solve_jost_weighted(ctx, &q, &|_| 1.0, weighted_exponent(ctx, side), side),
            RouteArg::Mixed => solve_jost_mixed(ctx, a.index.unwrap_or(1), side),
        };
        Ok(sol?)
    })?;
    let text = serde_json::to_string_pretty(&jost_report(&family, z, &sol)).expect("report serializes");
    emit(&text, a.common.out.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
        Command::Count(a) => count(a),
        Command::Jost(a) => jost(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evanskit: {e}");
            ExitCode::from(e.code())
        }
    }
}
