//! Problem builders and property checks shared by the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use sdeot::entropic::{conditional_row, sinkhorn_solve, SinkhornOptions};
use sdeot::exec::Exec;
use sdeot::geometry::{Polygon, Vec2};
use sdeot::measure::{Density, QuadratureSpec};
use sdeot::powercell::{build_diagram, owner, slack, Atoms};
use sdeot::problem::Problem;
use sdeot::sdot::{solve_unregularized, NewtonOptions};

pub fn line_problem(d: Density, y: &[f64], w: &[f64]) -> Problem {
    Problem::new(d, Atoms::line(y, w).unwrap()).unwrap()
}

pub fn symmetric(d: Density) -> Problem {
    line_problem(d, &[-1.0, 1.0], &[0.5, 0.5])
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Normalized positive weights.
pub fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

/// 2–4 well separated atoms on the line with random weights.
pub fn line_atoms() -> impl Strategy<Value = Atoms> {
    (2usize..=4).prop_flat_map(|n| {
        (prop::collection::vec(0.3f64..1.2, n), weights(n)).prop_map(|(gaps, w)| {
            let mut y = Vec::with_capacity(gaps.len());
            let mut x = -1.5;
            for g in gaps {
                x += g;
                y.push(x);
            }
            Atoms::line(&y, &w).unwrap()
        })
    })
}

/// 2–4 distinct atoms in the unit square.
pub fn plane_atoms() -> impl Strategy<Value = Atoms> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec((0.05f64..0.95, 0.05f64..0.95), n),
            weights(n),
        )
            .prop_filter_map("atoms too close", |(p, w)| {
                let pts: Vec<[f64; 2]> = p.iter().map(|&(x, y)| [x, y]).collect();
                for i in 0..pts.len() {
                    for j in 0..i {
                        let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
                        if d < 0.1 {
                            return None;
                        }
                    }
                }
                Atoms::plane(&pts, &w).ok()
            })
    })
}

pub fn line_density() -> impl Strategy<Value = Density> {
    prop_oneof![
        (-0.5f64..0.5, 0.5f64..1.5).prop_map(|(m, s)| Density::gaussian(m, s).unwrap()),
        (-0.5f64..0.5, 0.3f64..1.0).prop_map(|(m, s)| Density::laplace(m, s).unwrap()),
        (0.5f64..2.0).prop_map(|h| Density::uniform(-h, h).unwrap()),
    ]
}

pub fn dual_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..0.5, n)
}

/// `Δ_ij(x) >= 0` on the cell owning `x`.
pub fn slack_nonnegative(atoms: &Atoms, g: &[f64], x: Vec2) -> Result<(), TestCaseError> {
    let i = owner(atoms, g, x);
    for j in 0..atoms.len() {
        let s = slack(atoms, g, i, j, x);
        prop_assert!(s >= -1e-12, "slack({i},{j}) = {s} at {x:?}");
    }
    prop_assert_eq!(slack(atoms, g, i, i, x), 0.0);
    Ok(())
}

/// `h_ij(0) = h_ji(0)` from the two cells separately.
pub fn facet_symmetric(atoms: &Atoms, g: &[f64], density: &Density) -> Result<(), TestCaseError> {
    let diagram =
        build_diagram(atoms, g, density).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let spec = QuadratureSpec::default();
    for i in 0..atoms.len() {
        for j in 0..i {
            let a = diagram
                .level_set_integral(density, i, j, 0.0, &spec)
                .unwrap();
            let b = diagram
                .level_set_integral(density, j, i, 0.0, &spec)
                .unwrap();
            prop_assert!(
                (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                "w_{i}{j} = {a}, w_{j}{i} = {b}"
            );
        }
    }
    Ok(())
}

/// Conditional rows sum to one.
pub fn rows_sum_to_one(atoms: &Atoms, g: &[f64], eta: f64, x: Vec2) -> Result<(), TestCaseError> {
    let row = conditional_row(atoms, g, eta, x);
    let s: f64 = row.iter().sum();
    prop_assert!((s - 1.0).abs() <= 4.0 * f64::EPSILON, "row sums to {s}");
    prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
    Ok(())
}

/// `Σ_i μ(S_i) = 1` for any dual vector.
pub fn mass_conserved(atoms: &Atoms, g: &[f64], density: &Density) -> Result<(), TestCaseError> {
    let diagram =
        build_diagram(atoms, g, density).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let spec = QuadratureSpec::default().with_rel_tol(1e-11);
    let m: f64 = diagram
        .cell_masses(density, &spec, Exec::Sequential)
        .unwrap()
        .iter()
        .sum();
    prop_assert!((m - 1.0).abs() <= 1e-10, "total mass {m}");
    Ok(())
}

/// KL shift `KL(π|μ⊗ν) − KL(π|μ⊗ρ) = H(ν)` and slack decomposition equal to
/// `cost − W₂²` on a solved problem.
pub fn solved_identities(problem: &Problem, eta: f64) -> Result<(), TestCaseError> {
    let fail = |e: sdeot::Error| TestCaseError::fail(e.to_string());
    let dual =
        solve_unregularized(problem, &NewtonOptions::for_dim(problem.dim())).map_err(fail)?;
    let opts = SinkhornOptions::for_dim(problem.dim());
    let sol = sinkhorn_solve(problem, &dual, eta, &opts, None).map_err(fail)?;
    let d = sol.diagnostics(&opts).map_err(fail)?;
    let shift = d.kl_mu_nu - d.kl_mu_rho;
    prop_assert!(
        (shift - d.entropy_nu).abs() <= 1e-9,
        "KL shift {shift} vs H = {}",
        d.entropy_nu
    );
    prop_assert!(d.suboptimality >= -1e-12);
    let gap = (d.suboptimality - d.suboptimality_direct).abs();
    prop_assert!(
        gap <= 1e-9,
        "decomposition {} vs direct {}",
        d.suboptimality,
        d.suboptimality_direct
    );
    let direct = (d.cost_direct - d.w2_squared - d.suboptimality).abs();
    prop_assert!(direct <= 1e-9, "cost − W₂² − subopt = {direct}");
    Ok(())
}

/// `log(1 + ab) >= log(1 + a) log(1 + b)` for `a >= 0`, `0 <= b <= 1`.
pub fn scalar_inequality(a: f64, b: f64) -> Result<(), TestCaseError> {
    let lhs = (a * b).ln_1p();
    let rhs = a.ln_1p() * b.ln_1p();
    prop_assert!(lhs >= rhs - 1e-15 * rhs.abs(), "a={a} b={b}: {lhs} < {rhs}");
    Ok(())
}

pub fn unit_square() -> Density {
    Density::uniform2d(Polygon::unit_square())
}
