//! Unregularized semi-discrete transport: damped Newton on the concave dual.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::Vec2;
use crate::measure::{Density, QuadratureSpec};
use crate::powercell::{build_diagram, Cell, FacetWeights, PowerDiagram};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    /// Stop when `max_j |μ(S_j) − ν_j| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub quad: QuadratureSpec,
    pub exec: Exec,
}

impl NewtonOptions {
    /// Defaults: `tol = 1e-10` on the line, `1e-8` in the plane.
    pub fn for_dim(dim: usize) -> Self {
        let (tol, quad) = if dim == 1 {
            (1e-10, QuadratureSpec::default())
        } else {
            (1e-8, QuadratureSpec::default().with_rel_tol(1e-10))
        };
        Self {
            tol,
            max_iter: 100,
            quad,
            exec: Exec::default(),
        }
    }
}

/// Optimal dual weights `g*` (normalized `E_ν[g*] = 0`) and derived data.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub g_star: Vec<f64>,
    pub w2_squared: f64,
    pub diagram: PowerDiagram,
    /// `max_j |μ(S_j) − ν_j|`.
    pub residual: f64,
    pub masses: Vec<f64>,
    pub facet_weights: FacetWeights,
    pub iterations: usize,
    /// Dual objective after each accepted step, starting from the initial point.
    pub objective_trace: Vec<f64>,
}

impl DualSolution {
    /// Atom that `x` is transported to; ties go to the lowest index.
    pub fn transport_map(&self, x: Vec2) -> usize {
        self.diagram.owner(x)
    }

    /// `f*(x) = min_j |x − y_j|² − g*_j`.
    pub fn f_star(&self, x: Vec2) -> f64 {
        let k = self.diagram.owner(x);
        crate::powercell::power(self.diagram.atoms(), &self.g_star, k, x)
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts non-empty")
    }
}

struct Eval {
    diagram: PowerDiagram,
    masses: Vec<f64>,
    /// `∫_{S_i} |x − y_i|² dμ`.
    costs: Vec<f64>,
    objective: f64,
}

fn evaluate(problem: &Problem, g: &[f64], opts: &NewtonOptions) -> Result<Eval> {
    let diagram = build_diagram(&problem.atoms, g, &problem.density)?;
    let atoms = &problem.atoms;
    let masses = diagram.cell_masses(&problem.density, &opts.quad, opts.exec)?;
    let costs = opts.exec.try_map(atoms.len(), |i| {
        let y = atoms.position(i);
        let f = |x: Vec2, o: &mut [f64]| o[0] = x.dist2(y);
        Ok::<_, Error>(
            diagram.integrate_cell_vec(&problem.density, i, &f, 1, &opts.quad, &[], &[])?[0],
        )
    })?;
    let objective = (0..atoms.len())
        .map(|j| atoms.weight(j) * g[j] + costs[j] - g[j] * masses[j])
        .sum();
    Ok(Eval {
        diagram,
        masses,
        costs,
        objective,
    })
}

fn max_residual(masses: &[f64], nu: &[f64]) -> f64 {
    masses
        .iter()
        .zip(nu)
        .map(|(m, v)| (m - v).abs())
        .fold(0.0, f64::max)
}

fn l2_residual(masses: &[f64], nu: &[f64]) -> f64 {
    masses
        .iter()
        .zip(nu)
        .map(|(m, v)| (m - v) * (m - v))
        .sum::<f64>()
        .sqrt()
}

/// Give every empty cell some mass by raising its weight until the atom wins
/// at a representative support point.
fn reinflate(problem: &Problem, g: &mut [f64], opts: &NewtonOptions) -> Result<Eval> {
    let atoms = &problem.atoms;
    let n = atoms.len();
    let mut ev = evaluate(problem, g, opts)?;
    for _ in 0..n {
        let empty: Vec<usize> = (0..n).filter(|&i| ev.masses[i] <= 0.0).collect();
        if empty.is_empty() {
            return Ok(ev);
        }
        let (anchor, margin) = match &problem.density {
            Density::Line { support, .. } => {
                let pad = 0.1 * support.len();
                let lo = support.lo + pad;
                let hi = support.hi - pad;
                let i = empty[0];
                (
                    Vec2::on_line(atoms.position(i).x.clamp(lo, hi)),
                    0.05 * support.len().powi(2),
                )
            }
            Density::Plane { support, .. } => {
                let i = empty[0];
                let y = atoms.position(i);
                let c = support.centroid();
                let p = if support.contains(y) {
                    y
                } else {
                    c.lerp(y, 0.5)
                };
                let p = if support.contains(p) { p } else { c };
                (p, 0.05 * support.area())
            }
        };
        let i = empty[0];
        let best_other = (0..n)
            .filter(|&j| j != i)
            .map(|j| anchor.dist2(atoms.position(j)) - g[j])
            .fold(f64::INFINITY, f64::min);
        g[i] = anchor.dist2(atoms.position(i)) - best_other + margin;
        ev = evaluate(problem, g, opts)?;
    }
    match (0..n).find(|&i| ev.masses[i] <= 0.0) {
        Some(i) => Err(Error::EmptyCell(i)),
        None => Ok(ev),
    }
}

/// Newton direction from `L δ = ν − m` with the last coordinate pinned.
fn newton_direction(problem: &Problem, ev: &Eval, opts: &NewtonOptions) -> Result<Vec<f64>> {
    let atoms = &problem.atoms;
    let n = atoms.len();
    let w = ev
        .diagram
        .facet_weights(&problem.density, &opts.quad, opts.exec)?;
    let mut lap = DMatrix::<f64>::zeros(n - 1, n - 1);
    for ((i, j), wij) in w.iter() {
        let h = wij / (2.0 * atoms.distance(i, j));
        if !h.is_finite() {
            return Err(Error::InvalidInput(format!(
                "facet weight between atoms {i} and {j} is not finite; the density is singular on the facet"
            )));
        }
        if i < n - 1 {
            lap[(i, i)] += h;
        }
        if j < n - 1 {
            lap[(j, j)] += h;
        }
        if i < n - 1 && j < n - 1 {
            lap[(i, j)] -= h;
            lap[(j, i)] -= h;
        }
    }
    let rhs = DVector::from_fn(n - 1, |k, _| atoms.weight(k) - ev.masses[k]);
    let chol = lap.cholesky().ok_or_else(|| {
        Error::InvalidInput(
            "power-diagram adjacency graph is disconnected; Newton system is singular".into(),
        )
    })?;
    let sol = chol.solve(&rhs);
    let mut delta: Vec<f64> = sol.iter().copied().collect();
    delta.push(0.0);
    Ok(delta)
}

/// Maximize the dual `F(g) = Σ ν_j g_j + ∫ min_j(|x − y_j|² − g_j) dμ` by
/// damped Newton from `g = 0`. On the line the result is cross-checked
/// against the exact quantile construction.
pub fn solve_unregularized(problem: &Problem, opts: &NewtonOptions) -> Result<DualSolution> {
    let atoms = &problem.atoms;
    let n = atoms.len();
    let nu = atoms.weights();
    let mut g = vec![0.0; n];
    let mut ev = reinflate(problem, &mut g, opts)?;
    let floor = 0.5
        * nu.iter()
            .chain(&ev.masses)
            .copied()
            .fold(f64::INFINITY, f64::min);
    let mut trace = vec![ev.objective];
    let mut iterations = 0;
    while max_residual(&ev.masses, nu) > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                solver: "damped Newton",
                iterations,
                residual: max_residual(&ev.masses, nu),
            });
        }
        iterations += 1;
        let delta = newton_direction(problem, &ev, opts)?;
        let r0 = l2_residual(&ev.masses, nu);
        let f_slack = 1e-14 * (1.0 + ev.objective.abs());
        let mut tau = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = g.iter().zip(&delta).map(|(a, b)| a + tau * b).collect();
            let cand = evaluate(problem, &trial, opts)?;
            let ok = cand.masses.iter().all(|&m| m >= floor)
                && l2_residual(&cand.masses, nu) <= (1.0 - 0.5 * tau) * r0
                && cand.objective >= ev.objective - f_slack;
            if ok {
                g = trial;
                break cand;
            }
            tau *= 0.5;
            if tau < 1e-12 {
                return Err(Error::NonConvergence {
                    solver: "damped Newton",
                    iterations,
                    residual: max_residual(&ev.masses, nu),
                });
            }
        };
        ev = accepted;
        trace.push(ev.objective);
    }

    atoms.center(&mut g);
    if problem.dim() == 1 {
        let exact = quantile_potentials(problem)?;
        let gap = g
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 10.0 * opts.tol {
            return Err(Error::Consistency {
                what: "Newton and quantile dual weights",
                lhs: gap,
                rhs: 0.0,
                tol: 10.0 * opts.tol,
            });
        }
        let ev_exact = evaluate(problem, &exact, opts)?;
        let ev_newton = evaluate(problem, &g, opts)?;
        // keep whichever matches the target marginal more closely
        if max_residual(&ev_exact.masses, nu) < max_residual(&ev_newton.masses, nu) {
            g = exact;
            ev = ev_exact;
        } else {
            ev = ev_newton;
        }
    } else {
        ev = evaluate(problem, &g, opts)?;
    }
    let facet_weights = ev
        .diagram
        .facet_weights(&problem.density, &opts.quad, opts.exec)?;
    Ok(DualSolution {
        residual: max_residual(&ev.masses, nu),
        w2_squared: ev.costs.iter().sum(),
        g_star: g,
        masses: ev.masses,
        diagram: ev.diagram,
        facet_weights,
        iterations,
        objective_trace: trace,
    })
}

/// Exact 1D optimal weights: breakpoints are μ-quantiles at cumulative target
/// weights and the weights follow by telescoping across consecutive atoms.
pub fn quantile_potentials(problem: &Problem) -> Result<Vec<f64>> {
    if problem.dim() != 1 {
        return Err(Error::InvalidInput(
            "quantile construction is one-dimensional".into(),
        ));
    }
    let atoms = &problem.atoms;
    let n = atoms.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| atoms.position(a).x.total_cmp(&atoms.position(b).x));
    let mut g = vec![0.0; n];
    let mut cum = 0.0;
    for w in order.windows(2) {
        let (a, c) = (w[0], w[1]);
        cum += atoms.weight(a);
        let b = problem.density.quantile(cum.min(1.0))?;
        let (ya, yc) = (atoms.position(a).x, atoms.position(c).x);
        g[c] = g[a] + yc * yc - ya * ya - 2.0 * b * (yc - ya);
    }
    atoms.center(&mut g);
    Ok(g)
}

/// `W₂² = Σ_i ∫_{S_i} |x − y_i|² dμ` for the solved diagram.
pub fn w2_squared(
    problem: &Problem,
    solution: &DualSolution,
    spec: &QuadratureSpec,
    exec: Exec,
) -> Result<f64> {
    let atoms = &problem.atoms;
    let parts = exec.try_map(atoms.len(), |i| {
        if matches!(solution.diagram.cell(i), Cell::Empty) {
            return Ok::<_, Error>(0.0);
        }
        let y = atoms.position(i);
        let f = |x: Vec2, o: &mut [f64]| o[0] = x.dist2(y);
        Ok(solution
            .diagram
            .integrate_cell_vec(&problem.density, i, &f, 1, spec, &[], &[])?[0])
    })?;
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powercell::Atoms;

    fn line_problem(d: Density, y: &[f64], w: &[f64]) -> Problem {
        Problem::new(d, Atoms::line(y, w).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_problem_has_zero_weights() {
        let p = line_problem(
            Density::gaussian(0.0, 1.0).unwrap(),
            &[-1.0, 1.0],
            &[0.5, 0.5],
        );
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(1)).unwrap();
        assert!(s.g_star.iter().all(|g| g.abs() < 1e-14));
        assert_eq!(s.transport_map(Vec2::on_line(0.7)), 1);
        assert_eq!(s.transport_map(Vec2::on_line(0.0)), 0);
    }

    #[test]
    fn asymmetric_uniform() {
        let p = line_problem(
            Density::uniform(-1.0, 1.0).unwrap(),
            &[-1.0, 1.0],
            &[0.25, 0.75],
        );
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(1)).unwrap();
        assert!((s.g_star[0] + 1.5).abs() < 1e-12);
        assert!((s.g_star[1] - 0.5).abs() < 1e-12);
        assert!((s.masses[0] - 0.25).abs() < 1e-12);
        assert_eq!(s.transport_map(Vec2::on_line(-0.6)), 0);
        assert!(p.atoms.mean_of(&s.g_star).abs() < 1e-12);
    }

    #[test]
    fn single_atom() {
        let p = line_problem(Density::gaussian(0.0, 1.0).unwrap(), &[0.0], &[1.0]);
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(1)).unwrap();
        assert_eq!(s.g_star, vec![0.0]);
        assert_eq!(s.residual, 0.0);
        assert!((s.w2_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_symmetric_w2() {
        let p = line_problem(
            Density::uniform(-1.0, 1.0).unwrap(),
            &[-1.0, 1.0],
            &[0.5, 0.5],
        );
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(1)).unwrap();
        assert!((s.w2_squared - 1.0 / 3.0).abs() < 1e-14);
        let again = w2_squared(&p, &s, &QuadratureSpec::default(), Exec::Sequential).unwrap();
        assert!((again - s.w2_squared).abs() < 1e-15);
    }

    #[test]
    fn newton_matches_quantiles_with_many_atoms() {
        let y = [-2.0, -0.7, 0.1, 0.4, 1.9];
        let w = [0.1, 0.3, 0.2, 0.15, 0.25];
        for d in [
            Density::gaussian(0.2, 0.8).unwrap(),
            Density::laplace(0.0, 0.5).unwrap(),
            Density::uniform(-1.0, 2.0).unwrap(),
        ] {
            let p = line_problem(d, &y, &w);
            let opts = NewtonOptions::for_dim(1);
            let s = solve_unregularized(&p, &opts).unwrap();
            let q = quantile_potentials(&p).unwrap();
            for (a, b) in s.g_star.iter().zip(&q) {
                assert!((a - b).abs() <= 10.0 * opts.tol);
            }
            assert!(s.residual <= opts.tol);
            for w in s.objective_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-13);
            }
        }
    }

    #[test]
    fn far_atom_is_reinflated() {
        let p = line_problem(
            Density::uniform(-1.0, 1.0).unwrap(),
            &[-1.0, 1.0, 5.0],
            &[0.3, 0.3, 0.4],
        );
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(1)).unwrap();
        assert!((s.masses[2] - 0.4).abs() < 1e-10);
    }

    #[test]
    fn square_two_atoms() {
        let a = Atoms::plane(&[[0.25, 0.5], [0.75, 0.5]], &[0.5, 0.5]).unwrap();
        let p = Problem::new(
            Density::uniform2d(crate::geometry::Polygon::unit_square()),
            a,
        )
        .unwrap();
        let s = solve_unregularized(&p, &NewtonOptions::for_dim(2)).unwrap();
        assert!(s.g_star.iter().all(|g| g.abs() < 1e-12));
        // each half contributes 1/96 + 1/24
        let expect = 5.0 / 48.0;
        assert!((s.w2_squared - expect).abs() < 1e-10, "{}", s.w2_squared);
    }

    #[test]
    fn square_unequal_weights() {
        let a = Atoms::plane(&[[0.2, 0.3], [0.7, 0.6], [0.4, 0.85]], &[0.5, 0.3, 0.2]).unwrap();
        let p = Problem::new(
            Density::uniform2d(crate::geometry::Polygon::unit_square()),
            a,
        )
        .unwrap();
        let opts = NewtonOptions::for_dim(2);
        let s = solve_unregularized(&p, &opts).unwrap();
        for (m, v) in s.masses.iter().zip(p.atoms.weights()) {
            assert!((m - v).abs() <= opts.tol);
        }
    }
}
