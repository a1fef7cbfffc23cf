use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use sdeot::asymptotics::{
    case_study_subopt, fit_rate, run_sweep, Prediction, SweepOptions, DEFAULT_ETA_MIN,
};
use sdeot::entropic::sinkhorn_solve;
use sdeot::measure::QuadratureSpec;
use sdeot::oracle::{dense_sinkhorn, discretize, DenseOptions, DiscreteProblem};
use sdeot::scenario::{bundled, load_scenario, write_rows, Scenario, BUNDLED};
use sdeot::sdot::solve_unregularized;
use sdeot::specialfn::identity_suite;
use sdeot::Error;

/// Semi-discrete optimal transport with entropic regularization.
#[derive(Debug, Parser)]
#[command(name = "sdeot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the unregularized problem and the regularized one at each eta.
    Solve(Common),
    /// Run the eta sweep and write one CSV row per eta.
    Sweep(Common),
    /// Print the predicted asymptotic constants.
    Predict(Common),
    /// Check the dilogarithm identities and integral representations.
    VerifyIdentities(SuiteArgs),
    /// Compare against dense Sinkhorn on a grid discretization (line only).
    OracleCompare(OracleArgs),
    /// Closed-form suboptimality of the symmetric two-atom problem.
    CaseStudy(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario JSON file, or the name of a bundled scenario.
    scenario: String,
    /// Sinkhorn tolerance on max_j |log(m_j / nu_j)|.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated eta values replacing the scenario grid.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long)]
    quad_rel_tol: Option<f64>,
    /// Cap on Sinkhorn iterations per eta.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (CSV for `sweep`); defaults to the scenario's `output` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long)]
    quad_rel_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Number of grid cells.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = error
            .chain()
            .find_map(|e| e.downcast_ref::<Error>())
            .map_or(1, exit_code);
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Consistency { .. } => 3,
        e if e.is_solver_failure() => 2,
        _ => 1,
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(c) => solve(&c),
        Command::Sweep(c) => sweep(&c),
        Command::Predict(c) => predict(&c),
        Command::VerifyIdentities(a) => verify(&a),
        Command::OracleCompare(a) => oracle_compare(&a),
        Command::CaseStudy(c) => case_study(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load(c: &Common) -> anyhow::Result<Scenario> {
    let mut s = if Path::new(&c.scenario).exists() {
        load_scenario(Path::new(&c.scenario)).with_context(|| format!("loading {}", c.scenario))?
    } else if let Some(s) = bundled(&c.scenario) {
        s
    } else {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        return Err(anyhow!(
            "no scenario file `{}` and no bundled scenario of that name (bundled: {})",
            c.scenario,
            names.join(", ")
        ));
    };
    if let Some(eta) = &c.eta {
        s.eta = eta.clone();
    }
    if let Some(t) = c.tol {
        s.tolerances.sinkhorn = Some(t);
    }
    if let Some(r) = c.quad_rel_tol {
        let base = s.quadrature();
        s.quadrature = Some(base.with_rel_tol(r));
    }
    // re-validate after overrides
    let text = serde_json::to_string(&s)?;
    Ok(sdeot::scenario::parse_scenario(&text)?)
}

fn options(s: &Scenario, c: &Common) -> SweepOptions {
    let mut o = s.sweep_options();
    if let Some(m) = c.max_iter {
        o.sinkhorn.max_iter = m;
    }
    o
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn solve(c: &Common) -> CmdResult {
    let s = load(c)?;
    let problem = s.problem()?;
    let opts = options(&s, c);
    let dual = solve_unregularized(&problem, &opts.newton)?;
    let mut out = output(c.out.as_deref())?;
    let w = &mut out;
    let io = |e: io::Error| Failure::from(anyhow::Error::from(e));
    writeln!(w, "scenario {}", s.name).map_err(io)?;
    writeln!(
        w,
        "unregularized: {} Newton steps, mass residual {:.3e}",
        dual.iterations, dual.residual
    )
    .map_err(io)?;
    writeln!(w, "  g*      = {}", fmt_vec(&dual.g_star)).map_err(io)?;
    writeln!(w, "  masses  = {}", fmt_vec(&dual.masses)).map_err(io)?;
    writeln!(w, "  W2^2    = {:.16e}", dual.w2_squared).map_err(io)?;
    let mut warm: Option<Vec<f64>> = None;
    for &eta in &s.eta {
        let start = if opts.warm_start {
            warm.as_deref()
        } else {
            None
        };
        let sol = sinkhorn_solve(&problem, &dual, eta, &opts.sinkhorn, start)?;
        let d = sol.diagnostics(&opts.sinkhorn)?;
        writeln!(
            w,
            "eta = {eta}: {} Sinkhorn steps, log-marginal residual {:.3e}",
            sol.iterations, sol.marginal_residual
        )
        .map_err(io)?;
        writeln!(w, "  g_eta   = {}", fmt_vec(&sol.g_eta)).map_err(io)?;
        writeln!(w, "  d_eta   = {}", fmt_vec(&sol.d)).map_err(io)?;
        writeln!(w, "  cost    = {:.16e}", d.cost).map_err(io)?;
        writeln!(w, "  subopt  = {:.16e}", d.suboptimality).map_err(io)?;
        warm = Some(sol.d);
    }
    out.flush().map_err(io)?;
    Ok(())
}

fn sweep(c: &Common) -> CmdResult {
    let s = load(c)?;
    let problem = s.problem()?;
    let result = run_sweep(&problem, &s.eta, &options(&s, c))?;
    let path = c.out.as_deref().or(s.output.as_deref());
    write_rows(output(path)?, &result.rows())?;
    for (r, rec) in result.rows().iter().zip(&result.records) {
        if let Some(e) = &rec.error {
            eprintln!("eta = {}: {e}", r.eta);
        }
    }
    if let Ok(fit) = fit_rate(&result.rows(), DEFAULT_ETA_MIN) {
        eprintln!(
            "fitted rate: slope {:.4} (r^2 = {:.6}, {} points with eta >= {DEFAULT_ETA_MIN})",
            fit.slope, fit.r_squared, fit.points
        );
    }
    match result.first_error() {
        Some(e) => Err(Failure {
            code: exit_code(e),
            error: anyhow!(
                "{} of {} eta values failed",
                result.records.iter().filter(|r| r.error.is_some()).count(),
                result.records.len()
            ),
        }),
        None => Ok(()),
    }
}

fn predict(c: &Common) -> CmdResult {
    let s = load(c)?;
    let problem = s.problem()?;
    let dual = solve_unregularized(&problem, &s.sweep_options().newton)?;
    let p = Prediction::from_dual(&dual, &problem.atoms);
    let mut out = output(c.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &p).map_err(anyhow::Error::from)?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(anyhow::Error::from)?;
    Ok(())
}

fn verify(a: &SuiteArgs) -> CmdResult {
    let spec = a.quad_rel_tol.map_or_else(QuadratureSpec::default, |r| {
        QuadratureSpec::default().with_rel_tol(r)
    });
    let checks = identity_suite(&spec)?;
    let mut out = output(a.out.as_deref())?;
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!c.passed());
        writeln!(
            out,
            "{tag} {:<44} residual {:.3e} (bound {:.0e})",
            c.name, c.residual, c.bound
        )
        .map_err(anyhow::Error::from)?;
    }
    out.flush().map_err(anyhow::Error::from)?;
    if failed > 0 {
        return Err(Failure {
            code: 3,
            error: anyhow!("{failed} of {} identities failed", checks.len()),
        });
    }
    Ok(())
}

fn oracle_compare(a: &OracleArgs) -> CmdResult {
    let s = load(&a.common)?;
    let problem = s.problem()?;
    if problem.dim() != 1 {
        return Err(anyhow!("the grid oracle handles line scenarios only").into());
    }
    let opts = options(&s, &a.common);
    let dual = solve_unregularized(&problem, &opts.newton)?;
    let grid = discretize(&problem.density, a.grid)?;
    let mut out = output(a.common.out.as_deref())?;
    let w = &mut out;
    writeln!(
        w,
        "eta,grid,cost_semidiscrete,cost_oracle,cost_rel_diff,g_sup_diff"
    )
    .map_err(anyhow::Error::from)?;
    for &eta in &s.eta {
        let sol = sinkhorn_solve(&problem, &dual, eta, &opts.sinkhorn, None)?;
        let cost = sol.diagnostics(&opts.sinkhorn)?.cost;
        let dp = DiscreteProblem::new(grid.clone(), problem.atoms.clone(), eta)?;
        let dense = dense_sinkhorn(&dp, &DenseOptions::default())?;
        let g_diff = sol
            .g_eta
            .iter()
            .zip(&dense.g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        writeln!(
            w,
            "{eta:.16e},{},{cost:.16e},{:.16e},{:.16e},{g_diff:.16e}",
            a.grid,
            dense.cost,
            (dense.cost - cost).abs() / cost.abs()
        )
        .map_err(anyhow::Error::from)?;
    }
    out.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

fn case_study(c: &Common) -> CmdResult {
    let s = load(c)?;
    let problem = s.problem()?;
    let atoms = &problem.atoms;
    let is_pm_one = atoms.dim() == 1
        && atoms.len() == 2
        && atoms.position(0).x == -1.0
        && atoms.position(1).x == 1.0
        && atoms.weight(0) == 0.5;
    if !is_pm_one {
        return Err(anyhow!("the closed form needs atoms -1 and +1 with equal weights").into());
    }
    let spec = s.quadrature();
    let mu0 = problem.density.inner_limit(sdeot::geometry::Vec2::ZERO);
    let limit = std::f64::consts::PI.powi(2) * mu0 / 24.0;
    let mut out = output(c.out.as_deref())?;
    writeln!(out, "eta,suboptimality,suboptimality_scaled,limit").map_err(anyhow::Error::from)?;
    for &eta in &s.eta {
        let v = case_study_subopt(&problem.density, eta, &spec)?;
        writeln!(
            out,
            "{eta:.16e},{v:.16e},{:.16e},{limit:.16e}",
            eta * eta * v
        )
        .map_err(anyhow::Error::from)?;
    }
    out.flush().map_err(anyhow::Error::from)?;
    Ok(())
}
