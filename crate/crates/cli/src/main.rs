//! Batch driver for the hungry QD lattice library: run verification
//! suites, the eigenvalue demo, and lattice dumps, with machine-readable
//! reports and stable exit codes.
//!
//! Exit codes: 0 all checks pass, 1 identity failure, 2 degenerate input
//! (breakdown everywhere, or budget exceeded), 64 malformed configuration.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{DumpConfig, EigenConfig, FileConfig, VerifyConfig};
use hqd_core::eigen::EigenVariable;
use hqd_core::error::Error as CoreError;
use hqd_core::gram::EllipticSpec;
use hqd_core::measure::{tau_moment_budget, MeasureSpec};
use hqd_core::qd::{evolve_dhqd, qd_var, QdVarKind, SchemeWindow, TauLattice};
use hqd_core::report::{EllipticDump, EllipticVarsDump, SuiteReport, TauDump, TauVars};
use hqd_core::scalar::Scalar;
use hqd_core::suites::{all_suites, run_eigen, run_suite, suite_requires_m1, SuiteParams};
use hqd_core::{elliptic, Rat};

const EXIT_FAIL: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "hqd",
    about = "Exact verification and eigen demo for the hungry QD family of discrete integrable lattices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on random or supplied measures.
    Verify(VerifyArgs),
    /// Convergence demo: lattice variables against measure nodes.
    Eigen(EigenArgs),
    /// Dump lattice windows (tau or elliptic determinant families) as JSON.
    Dump(DumpArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite id (run with an unknown id to list them) or "all".
    #[arg(long)]
    suite: Option<String>,
    /// Hunger parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Largest lattice order (n on the tau side, k on the elliptic side).
    #[arg(long = "n", alias = "k")]
    n_max: Option<u32>,
    /// Largest superscript l.
    #[arg(long = "l")]
    l_max: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random measures to sweep per suite.
    #[arg(long)]
    seeds: Option<u32>,
    /// One-variable measure spec (JSON file).
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Elliptic point-measure spec (JSON file).
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output directory for the JSON report (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EigenArgs {
    /// Hunger parameter.
    #[arg(long)]
    m: Option<u32>,
    /// Trace length.
    #[arg(long = "l")]
    l_max: Option<u32>,
    /// Lattice variable to trace: "vt" (targets the nodes) or "v"
    /// (targets their m-th powers).
    #[arg(long)]
    variable: Option<String>,
    /// Arithmetic: "float" (runs the dhQD recurrence) or "exact"
    /// (determinant-ratio oracle, capped at l <= 48).
    #[arg(long)]
    mode: Option<String>,
    /// Relative tolerance on the final error.
    #[arg(long)]
    tol: Option<f64>,
    /// Nodes as comma-separated rationals, descending (weights all 1).
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<String>>,
    /// Measure spec (JSON file) as an alternative to --nodes.
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for trace CSV + summary JSON (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// "tau" or "elliptic".
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long = "n", alias = "k")]
    n_max: Option<u32>,
    #[arg(long = "l")]
    l_max: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    points: Option<PathBuf>,
    /// Tau dumps: derive the variable grids by running the dhQD
    /// recurrence instead of reading determinant ratios.
    #[arg(long, default_value_t = false)]
    evolved: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Eigen(args) => cmd_eigen(args),
        Command::Dump(args) => cmd_dump(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Degenerate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DEGENERATE)
        }
    }
}

enum CliError {
    Usage(String),
    Degenerate(String),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidMeasure(_)
            | CoreError::Precondition(_)
            | CoreError::InadmissibleIndex(_) => CliError::Usage(e.to_string()),
            CoreError::BudgetExceeded { .. }
            | CoreError::Breakdown { .. }
            | CoreError::Dimension(_) => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", p.display())))
        }
    }
}

fn load_measure_spec(path: &Option<PathBuf>) -> Result<Option<MeasureSpec>, CliError> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Ok(Some(serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("malformed measure spec {}: {e}", p.display()))
            })?))
        }
    }
}

fn load_points_spec(path: &Option<PathBuf>) -> Result<Option<EllipticSpec>, CliError> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Ok(Some(serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("malformed points spec {}: {e}", p.display()))
            })?))
        }
    }
}

fn write_or_print(out: &Option<PathBuf>, name: &str, contents: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(Path::new(dir).join(name), contents)?;
            Ok(())
        }
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

/// Worker count: `HQD_WORKERS` env var, default 1. Report assembly is
/// single-threaded and ordered, so the output is identical either way.
fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let workers = std::env::var("HQD_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Degenerate(format!("worker pool: {e}")))
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, CliError> {
    let file = load_file_config(&args.config)?;
    let suite = args
        .suite
        .or(file.suite)
        .unwrap_or_else(|| "all".to_string());
    let m_list = args.m.or(file.m).unwrap_or_else(|| vec![1, 2, 3]);
    let n_max = args.n_max.or(file.n_max).unwrap_or(4);
    let l_max = args.l_max.or(file.l_max).unwrap_or(8);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let seeds = args.seeds.or(file.seeds).unwrap_or(1);
    let measure_spec = match load_measure_spec(&args.measure)? {
        Some(s) => Some(s),
        None => file.measure,
    };
    let points_spec = match load_points_spec(&args.points)? {
        Some(s) => Some(s),
        None => file.points,
    };

    if m_list.is_empty() || m_list.iter().any(|&m| m == 0) {
        return Err(CliError::Usage("m must be a list of positive integers".into()));
    }
    if n_max == 0 || l_max <= 0 || seeds == 0 {
        return Err(CliError::Usage("window bounds must be positive".into()));
    }
    let selected: Vec<&'static str> = if suite == "all" {
        all_suites()
    } else {
        match all_suites().iter().find(|s| **s == suite) {
            Some(s) => vec![*s],
            None => {
                return Err(CliError::Usage(format!(
                    "unknown suite {suite:?}; valid: all, {}",
                    all_suites().join(", ")
                )))
            }
        }
    };
    // An explicitly requested m=1-only suite with no m=1 in the list is a
    // configuration error; under "all" it is skipped for other m instead.
    if suite != "all" && suite_requires_m1(&suite) && !m_list.contains(&1) {
        return Err(CliError::Usage(format!(
            "suite {suite} is defined only for m = 1"
        )));
    }

    let config = VerifyConfig {
        suite: suite.clone(),
        m: m_list.clone(),
        n_max,
        l_max,
        seed,
        seeds,
        measure: measure_spec.clone(),
        points: points_spec.clone(),
        mode: "exact".into(),
    };

    let measure = match &measure_spec {
        Some(spec) => Some(spec.build::<Rat>().map_err(CliError::from)?),
        None => None,
    };
    let points = match &points_spec {
        Some(spec) => Some(spec.build::<Rat>().map_err(CliError::from)?),
        None => None,
    };

    let mut jobs: Vec<(usize, &'static str, u32)> = Vec::new();
    let mut idx = 0;
    for name in &selected {
        for &m in &m_list {
            if suite_requires_m1(name) && m != 1 {
                continue;
            }
            jobs.push((idx, name, m));
            idx += 1;
        }
    }
    if jobs.is_empty() {
        return Err(CliError::Usage("no runnable (suite, m) combination".into()));
    }

    let pool = worker_pool()?;
    let started = Instant::now();
    let results: Vec<(usize, Result<SuiteReport, CoreError>)> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(i, name, m)| {
                let mut params = SuiteParams::new(*m);
                params.n_max = n_max;
                params.l_max = l_max;
                params.seed = seed;
                params.seeds = seeds;
                params.measure = measure.clone();
                params.points = points.clone();
                (*i, run_suite(name, &params))
            })
            .collect()
    });
    eprintln!(
        "verify: {} suite runs in {:.2}s",
        jobs.len(),
        started.elapsed().as_secs_f64()
    );

    let mut ordered: Vec<(usize, Result<SuiteReport, CoreError>)> = results;
    ordered.sort_by_key(|(i, _)| *i);
    let mut suites = Vec::new();
    for (_, res) in ordered {
        suites.push(res.map_err(CliError::from)?);
    }
    let any_failure = suites.iter().any(|s| !s.failures.is_empty());
    let any_empty = suites.iter().any(|s| s.sites_checked == 0);
    let pass = !any_failure && !any_empty;

    let report = serde_json::json!({
        "command": "verify",
        "config": config,
        "suites": suites,
        "pass": pass,
    });
    write_or_print(
        &args.out,
        "verify_report.json",
        &serde_json::to_string_pretty(&report).expect("serializable"),
    )?;
    for s in &suites {
        eprintln!(
            "  {:>14} m={}: {} ({} sites, {} skipped)",
            s.suite,
            s.m,
            if s.pass { "pass" } else { "FAIL" },
            s.sites_checked,
            s.skipped
        );
    }
    if any_failure {
        Ok(EXIT_FAIL)
    } else if any_empty {
        Ok(EXIT_DEGENERATE)
    } else {
        Ok(0)
    }
}

fn cmd_eigen(args: EigenArgs) -> Result<u8, CliError> {
    let file = load_file_config(&args.config)?;
    let m = args.m.or(file.m.and_then(|v| v.first().copied())).unwrap_or(1);
    let l_max = args.l_max.or(file.l_steps).unwrap_or(60);
    let variable = args
        .variable
        .or(file.variable)
        .unwrap_or_else(|| "vt".into());
    let mode = args.mode.or(file.mode).unwrap_or_else(|| "float".into());
    let tol = args.tol.or(file.tolerance).unwrap_or(1e-6);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    if m == 0 {
        return Err(CliError::Usage("m must be positive".into()));
    }
    if tol < 0.0 {
        return Err(CliError::Usage("tolerance must be non-negative".into()));
    }
    let variable = match variable.as_str() {
        "vt" => EigenVariable::VTilde,
        "v" => EigenVariable::V,
        other => {
            return Err(CliError::Usage(format!(
                "unknown variable {other:?}; use \"vt\" or \"v\""
            )))
        }
    };
    let measure_spec = match load_measure_spec(&args.measure)? {
        Some(s) => Some(s),
        None => file.measure,
    };
    let spec = match (&args.nodes, measure_spec) {
        (Some(nodes), _) => MeasureSpec::Inline {
            nodes: nodes.clone(),
            weights: vec!["1".into(); nodes.len()],
        },
        (None, Some(spec)) => spec,
        (None, None) => MeasureSpec::Random {
            seed,
            size: 3,
            positive: true,
        },
    };
    let config = EigenConfig {
        m,
        l_max,
        variable: match variable {
            EigenVariable::VTilde => "vt".into(),
            EigenVariable::V => "v".into(),
        },
        mode: mode.clone(),
        tolerance: tol,
        measure: spec.clone(),
        seed,
    };

    let (report, csv) = match mode.as_str() {
        "float" => {
            let measure = spec.build::<f64>().map_err(CliError::from)?;
            run_eigen(None, Some(&measure), m, l_max, variable, tol).map_err(CliError::from)?
        }
        "exact" => {
            let measure = spec.build::<Rat>().map_err(CliError::from)?;
            run_eigen(Some(&measure), None, m, l_max, variable, tol).map_err(CliError::from)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown mode {other:?}; use \"exact\" or \"float\""
            )))
        }
    };

    let summary = serde_json::json!({
        "command": "eigen",
        "config": config,
        "report": report,
    });
    write_or_print(&args.out, "eigen_traces.csv", &csv)?;
    write_or_print(
        &args.out,
        "eigen_summary.json",
        &serde_json::to_string_pretty(&summary).expect("serializable"),
    )?;
    for t in &report.traces {
        eprintln!(
            "  trace n={}: target {} final error {:.3e} rate {:.3} -> {}",
            t.node_index,
            t.target,
            t.final_error,
            t.rate,
            if t.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(if report.pass { 0 } else { EXIT_FAIL })
}

fn cmd_dump(args: DumpArgs) -> Result<u8, CliError> {
    let file = load_file_config(&args.config)?;
    let kind = args.kind.unwrap_or_else(|| "tau".into());
    let m = args.m.or(file.m.and_then(|v| v.first().copied())).unwrap_or(1);
    let n_max = args.n_max.or(file.n_max).unwrap_or(4);
    let l_max = args.l_max.or(file.l_max).unwrap_or(8);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    if m == 0 || n_max == 0 || l_max <= 0 {
        return Err(CliError::Usage("m and window bounds must be positive".into()));
    }
    let measure_spec = match load_measure_spec(&args.measure)? {
        Some(s) => Some(s),
        None => file.measure,
    };
    let points_spec = match load_points_spec(&args.points)? {
        Some(s) => Some(s),
        None => file.points,
    };
    let config = DumpConfig {
        kind: kind.clone(),
        m,
        n_max,
        l_max,
        seed,
        measure: measure_spec.clone(),
        points: points_spec.clone(),
        evolved: args.evolved,
    };

    let body = match kind.as_str() {
        "tau" => {
            let spec = measure_spec.unwrap_or(MeasureSpec::Random {
                seed,
                size: n_max as usize + 3,
                positive: true,
            });
            let measure = spec.build::<Rat>().map_err(CliError::from)?;
            let count = tau_moment_budget(m, n_max + 3, (l_max + m as i64 + 2) as u32);
            let lat = TauLattice::new(measure.moments(count, m));
            let dump = tau_dump(&lat, n_max, l_max, args.evolved).map_err(CliError::from)?;
            serde_json::to_string_pretty(&serde_json::json!({
                "command": "dump",
                "config": config,
                "lattice": dump,
            }))
            .expect("serializable")
        }
        "elliptic" => {
            let spec = points_spec.unwrap_or(EllipticSpec::Random { seed, size: 16 });
            let points = spec.build::<Rat>().map_err(CliError::from)?;
            let k_hi = n_max as i64 + 1;
            let row_max = (l_max + 1) + 2 * m as i64 + k_hi * m as i64;
            let gram = points.gram(row_max.max(k_hi + 2)).map_err(CliError::from)?;
            let fam = elliptic::DetFamilies::new(gram, m);
            let dump = elliptic_dump(&fam, n_max, l_max).map_err(CliError::from)?;
            serde_json::to_string_pretty(&serde_json::json!({
                "command": "dump",
                "config": config,
                "lattice": dump,
            }))
            .expect("serializable")
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown dump kind {other:?}; use \"tau\" or \"elliptic\""
            )))
        }
    };
    write_or_print(&args.out, "lattice_dump.json", &body)?;
    Ok(0)
}

fn tau_dump(
    lat: &TauLattice<Rat>,
    n_max: u32,
    l_max: i64,
    evolved: bool,
) -> Result<TauDump, CoreError> {
    let tau_grid: Vec<Vec<String>> = (0..n_max)
        .map(|n| {
            (0..l_max)
                .map(|l| lat.tau(n, l).map(|v| v.render_ratio()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (vt, wt, origin) = if evolved {
        let init = SchemeWindow::oracle_initial(lat, n_max.saturating_sub(1), false)?;
        let window = evolve_dhqd(&init, l_max as u32)?;
        let grid = |map: &std::collections::HashMap<(i64, i64), Rat>| -> Vec<Vec<String>> {
            (0..n_max as i64)
                .map(|n| {
                    (0..l_max)
                        .map(|l| {
                            map.get(&(n, l))
                                .map(|v| v.render_ratio())
                                .unwrap_or_default()
                        })
                        .collect()
                })
                .collect()
        };
        (grid(&window.vt), grid(&window.wt), "evolved")
    } else {
        let grid = |kind: QdVarKind| -> Result<Vec<Vec<String>>, CoreError> {
            (0..n_max)
                .map(|n| {
                    (0..l_max)
                        .map(|l| qd_var(lat, kind, n, l).map(|v| v.render_ratio()))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect()
        };
        (grid(QdVarKind::VTilde)?, grid(QdVarKind::WTilde)?, "oracle")
    };
    Ok(TauDump {
        m: lat.m(),
        tau: tau_grid,
        vars: TauVars { vt, wt },
        origin: origin.to_string(),
    })
}

fn elliptic_dump(
    fam: &elliptic::DetFamilies<Rat>,
    k_max: u32,
    l_max: i64,
) -> Result<EllipticDump, CoreError> {
    let grid = |which: elliptic::DetFamily| -> Result<Vec<Vec<String>>, CoreError> {
        (0..=k_max)
            .map(|k| {
                (2..2 + l_max)
                    .map(|l| fam.det(which, k, l).map(|v| v.render_ratio()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect()
    };
    type VarFn<'a> = &'a dyn Fn(u32, i64) -> hqd_core::Result<Rat>;
    let var_grid = |f: VarFn| -> Result<Vec<Vec<String>>, CoreError> {
        (1..=k_max)
            .map(|k| {
                (2..2 + l_max)
                    .map(|l| f(k, l).map(|v| v.render_ratio()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect()
    };
    Ok(EllipticDump {
        m: fam.m(),
        delta: grid(elliptic::DetFamily::Delta)?,
        theta: grid(elliptic::DetFamily::Theta)?,
        pi: grid(elliptic::DetFamily::Pi)?,
        sigma: grid(elliptic::DetFamily::Sigma)?,
        vars: EllipticVarsDump {
            u: var_grid(&|k, l| elliptic::var_u(fam, k, l))?,
            v: var_grid(&|k, l| elliptic::var_v(fam, k, l))?,
            w: var_grid(&|k, l| elliptic::var_w(fam, k, l))?,
        },
        origin: "oracle".to_string(),
    })
}
