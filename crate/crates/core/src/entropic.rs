//! Entropically regularized semi-discrete transport.
//!
//! The solver works with the scaled dual gap `d = η(g_η − g*)` rather than
//! with `g_η` itself. On the cell `S_i` of the unregularized diagram the
//! coupling is
//!
//! ```text
//! π(y_k | x) = exp(d_k − ηΔ_ik(x)) / Σ_l exp(d_l − ηΔ_il(x)),
//! ```
//!
//! so every quantity is an integral of bounded, well-scaled terms and the
//! exponentially small corrections that appear at large `η` survive.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::Vec2;
use crate::measure::{QuadError, QuadratureSpec, Refinement};
use crate::powercell::{slack, Atoms, Cell};
use crate::problem::Problem;
use crate::sdot::DualSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornOptions {
    /// Stop when `max_j |log(m_j/ν_j)| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub quad: QuadratureSpec,
    pub exec: Exec,
}

impl SinkhornOptions {
    /// Defaults: `tol = 1e-10` on the line, `1e-8` in the plane.
    pub fn for_dim(dim: usize) -> Self {
        let (tol, quad) = if dim == 1 {
            (1e-10, QuadratureSpec::default())
        } else {
            (1e-8, QuadratureSpec::default().with_rel_tol(1e-10))
        };
        Self {
            tol,
            max_iter: 100_000,
            quad,
            exec: Exec::default(),
        }
    }
}

/// `f_η(x) = −(1/η) log Σ_j exp(−η(|x − y_j|² − g_j))`, stabilized.
pub fn soft_potential(atoms: &Atoms, g: &[f64], eta: f64, x: Vec2) -> f64 {
    let v: Vec<f64> = (0..atoms.len())
        .map(|k| -eta * (x.dist2(atoms.position(k)) - g[k]))
        .collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = v.iter().map(|t| (t - m).exp()).sum();
    -(m + s.ln()) / eta
}

/// The full conditional row `π(· | x)`.
pub fn conditional_row(atoms: &Atoms, g: &[f64], eta: f64, x: Vec2) -> Vec<f64> {
    let v: Vec<f64> = (0..atoms.len())
        .map(|k| -eta * (x.dist2(atoms.position(k)) - g[k]))
        .collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|t| (t - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|t| t / s).collect()
}

/// `π(y_j | x)`: softmax of `−η(|x − y_k|² − g_k)` over atoms.
pub fn conditional(atoms: &Atoms, g: &[f64], eta: f64, x: Vec2, j: usize) -> f64 {
    conditional_row(atoms, g, eta, x)[j]
}

/// Log-weights of the coupling on cell `i` relative to atom `i`.
struct Kernel<'a> {
    atoms: &'a Atoms,
    g_star: &'a [f64],
    d: &'a [f64],
    eta: f64,
}

impl Kernel<'_> {
    /// Fills `u_k = d_k − d_i − ηΔ_ik(x)` (`u_i = 0`) and returns `log Σ_k e^{u_k}`.
    fn log_weights(&self, i: usize, x: Vec2, u: &mut [f64]) -> f64 {
        let mut max = 0.0f64;
        for (k, uk) in u.iter_mut().enumerate() {
            if k == i {
                *uk = 0.0;
                continue;
            }
            *uk = self.d[k] - self.d[i] - self.eta * slack(self.atoms, self.g_star, i, k, x);
            max = max.max(*uk);
        }
        if max == 0.0 {
            let s: f64 = u
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, v)| v.exp())
                .sum();
            s.ln_1p()
        } else {
            max + u.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
        }
    }
}

/// Regularized solution in gap form, linked to the unregularized one.
#[derive(Debug, Clone)]
pub struct EntropicSolution<'a> {
    pub eta: f64,
    /// `d_η = η(g_η − g*)`, with `E_ν[d_η] = 0`.
    pub d: Vec<f64>,
    /// `g_η = g* + d_η/η`, with `E_ν[g_η] = 0`.
    pub g_eta: Vec<f64>,
    /// `max_j |log(m_j/ν_j)|` at the returned iterate.
    pub marginal_residual: f64,
    pub iterations: usize,
    pub problem: &'a Problem,
    pub dual: &'a DualSolution,
}

/// Consecutive non-empty line cells sharing an endpoint: `(left, right, b)`.
fn adjacent_line_pairs(dual: &DualSolution) -> Vec<(usize, usize, f64)> {
    let mut cells: Vec<(usize, f64, f64)> = dual
        .diagram
        .cells()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            Cell::Interval(iv) => Some((i, iv.lo, iv.hi)),
            _ => None,
        })
        .collect();
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));
    cells
        .windows(2)
        .filter(|w| w[0].2 == w[1].1)
        .map(|w| (w[0].0, w[1].0, w[0].2))
        .collect()
}

const FLOW_ABS_TOL: f64 = 1e-300;
/// Largest error bound accepted when a flow integral stalls on rounding
/// noise, far below the mass resolution of any Sinkhorn tolerance.
const FLOW_NOISE: f64 = 1e-15;

/// A flow that cannot reach its relative tolerance because the integrand
/// cancels to rounding noise is accepted once the noise is negligible.
fn noise_limited(r: Result<Vec<f64>>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v[0]),
        Err(Error::Quadrature(QuadError::NoConvergence {
            estimate,
            error_bound,
        })) if error_bound <= FLOW_NOISE => Ok(estimate),
        Err(e) => Err(e),
    }
}

struct Solver<'a> {
    problem: &'a Problem,
    dual: &'a DualSolution,
    eta: f64,
    opts: &'a SinkhornOptions,
    pairs: Vec<(usize, usize, f64)>,
    /// Net flows can be many orders of magnitude below the default absolute
    /// tolerance; they are integrated to relative accuracy only.
    flow_spec: QuadratureSpec,
    refine: Vec<(Vec<Refinement>, Vec<crate::measure::LineRefinement>)>,
}

impl<'a> Solver<'a> {
    fn new(
        problem: &'a Problem,
        dual: &'a DualSolution,
        eta: f64,
        opts: &'a SinkhornOptions,
    ) -> Self {
        let pairs = if problem.dim() == 1 {
            adjacent_line_pairs(dual)
        } else {
            Vec::new()
        };
        let refine = (0..problem.len())
            .map(|i| dual.diagram.transition_refinements(i, eta))
            .collect();
        let flow_spec = QuadratureSpec {
            abs_tol: FLOW_ABS_TOL,
            ..opts.quad
        };
        Self {
            problem,
            dual,
            eta,
            opts,
            pairs,
            flow_spec,
            refine,
        }
    }

    fn kernel<'b>(&'b self, d: &'b [f64]) -> Kernel<'b> {
        Kernel {
            atoms: &self.problem.atoms,
            g_star: &self.dual.g_star,
            d,
            eta: self.eta,
        }
    }

    /// `T_ik = ∫_{S_i} π(y_k | x) dμ(x)` for all `k`.
    fn transfers(&self, i: usize, d: &[f64]) -> Result<Vec<f64>> {
        let n = self.problem.len();
        let ker = self.kernel(d);
        let f = |x: Vec2, out: &mut [f64]| {
            let lse = ker.log_weights(i, x, out);
            out.iter_mut().for_each(|u| *u = (*u - lse).exp());
        };
        let (pts, lines) = &self.refine[i];
        self.dual.diagram.integrate_cell_vec(
            &self.problem.density,
            i,
            &f,
            n,
            &self.opts.quad,
            pts,
            lines,
        )
    }

    /// Net mass moving from the left cell into the right atom across their
    /// shared endpoint `b`, `T_lr − T_rl`, with mirror points `b ∓ t` paired
    /// so that the symmetric parts cancel exactly.
    fn paired_flow(&self, l: usize, r: usize, b: f64, d: &[f64]) -> Result<f64> {
        let atoms = &self.problem.atoms;
        let density = &self.problem.density;
        let spec = &self.flow_spec;
        let (Cell::Interval(cl), Cell::Interval(cr)) =
            (self.dual.diagram.cell(l), self.dual.diagram.cell(r))
        else {
            return Ok(0.0);
        };
        let mut half = (b - cl.lo).min(cr.hi - b);
        for k in density.kinks() {
            let dist = (k - b).abs();
            if dist > 0.0 && dist < half {
                half = dist;
            }
        }
        let n = atoms.len();
        let eta = self.eta;
        let g = &self.dual.g_star;
        let rate = 2.0 * eta * (atoms.position(r).x - atoms.position(l).x).abs();
        let delta = d[r] - d[l];
        let (em_d, ep_d) = ((-delta).exp(), delta.exp());
        let (xm1_p, xm1_m) = (delta.exp_m1(), (-delta).exp_m1());
        let paired = |x: f64, out: &mut [f64]| {
            let s = rate * (x - b);
            let e = (-s).exp();
            let xm = 2.0 * b - x;
            let mu_here = density.inner_limit(Vec2::on_line(x));
            let ratio = if mu_here > 0.0 {
                density.inner_limit(Vec2::on_line(xm)) / mu_here
            } else {
                0.0
            };
            let (mut qm, mut qp) = (0.0, 0.0);
            for k in (0..n).filter(|&k| k != l && k != r) {
                qm += (d[k] - d[r] - eta * slack(atoms, g, l, k, Vec2::on_line(xm))).exp();
                qp += (d[k] - d[l] - eta * slack(atoms, g, r, k, Vec2::on_line(x))).exp();
            }
            let a = e + em_d + qm;
            let bb = e + ep_d + qp;
            let num = (ratio - 1.0) * (1.0 + e) + ratio * xm1_p - xm1_m + ratio * qp - qm;
            out[0] = e * num / (a * bb);
        };
        let mut refine = vec![Refinement::new(b, 1.0 / rate)];
        refine.extend(self.refine[r].0.iter().copied());
        refine.extend(
            self.refine[l]
                .0
                .iter()
                .map(|p| Refinement::new(2.0 * b - p.at, p.scale)),
        );
        let mut flow =
            noise_limited(density.integrate_interval_vec(&paired, 1, b, b + half, spec, &refine))?;
        let ker = self.kernel(d);
        let tail = |i: usize, j: usize, lo: f64, hi: f64| -> Result<f64> {
            let f = |x: f64, out: &mut [f64]| {
                let mut u = vec![0.0; n];
                let lse = ker.log_weights(i, Vec2::on_line(x), &mut u);
                out[0] = (u[j] - lse).exp();
            };
            noise_limited(density.integrate_interval_vec(&f, 1, lo, hi, spec, &self.refine[i].0))
        };
        if b - half > cl.lo {
            flow += tail(l, r, cl.lo, b - half)?;
        }
        if b + half < cr.hi {
            flow -= tail(r, l, b + half, cr.hi)?;
        }
        Ok(flow)
    }

    /// `m_j − ν_j` assembled from cell-mass residuals and net flows.
    fn marginal_gap(&self, d: &[f64]) -> Result<Vec<f64>> {
        let n = self.problem.len();
        let nu = self.problem.atoms.weights();
        let exec = self.opts.exec;
        let mut gap: Vec<f64> = (0..n).map(|j| self.dual.masses[j] - nu[j]).collect();
        if n == 1 {
            return Ok(gap);
        }
        let flows = exec.try_map(self.pairs.len(), |p| {
            let (l, r, b) = self.pairs[p];
            self.paired_flow(l, r, b, d)
        })?;
        let mut paired = vec![false; n * n];
        for (&(l, r, _), f) in self.pairs.iter().zip(&flows) {
            gap[r] += f;
            gap[l] -= f;
            paired[l * n + r] = true;
            paired[r * n + l] = true;
        }
        let transfers = exec.try_map(n, |i| self.transfers(i, d))?;
        for i in 0..n {
            for k in (0..n).filter(|&k| k != i && !paired[i * n + k]) {
                gap[k] += transfers[i][k];
                gap[i] -= transfers[i][k];
            }
        }
        Ok(gap)
    }
}

fn log_ratio_residual(gap: &[f64], nu: &[f64]) -> f64 {
    gap.iter()
        .zip(nu)
        .map(|(g, v)| (g / v).ln_1p().abs())
        .fold(
            0.0,
            |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) },
        )
}

/// Log-domain semi-discrete Sinkhorn. `warm` is a previous `d` (for example
/// from a smaller `η`); otherwise the iteration starts from `g*` (`d = 0`).
/// At least one update is always applied.
pub fn sinkhorn_solve<'a>(
    problem: &'a Problem,
    dual: &'a DualSolution,
    eta: f64,
    opts: &SinkhornOptions,
    warm: Option<&[f64]>,
) -> Result<EntropicSolution<'a>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "eta must be positive and finite, got {eta}"
        )));
    }
    let n = problem.len();
    let atoms = &problem.atoms;
    let nu = atoms.weights();
    let mut d = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        Some(w) => {
            return Err(Error::InvalidInput(format!(
                "warm start has length {}, expected {n}",
                w.len()
            )))
        }
        None => vec![0.0; n],
    };
    atoms.center(&mut d);
    let solver = Solver::new(problem, dual, eta, opts);
    let mut iterations = 0;
    let residual = loop {
        let gap = solver.marginal_gap(&d)?;
        let res = log_ratio_residual(&gap, nu);
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                solver: "Sinkhorn",
                iterations,
                residual: res,
            });
        }
        if res <= opts.tol && iterations > 0 {
            break res;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                solver: "Sinkhorn",
                iterations,
                residual: res,
            });
        }
        for j in 0..n {
            d[j] -= (gap[j] / nu[j]).ln_1p();
        }
        atoms.center(&mut d);
        iterations += 1;
    };
    let g_eta = dual
        .g_star
        .iter()
        .zip(&d)
        .map(|(g, dj)| g + dj / eta)
        .collect();
    Ok(EntropicSolution {
        eta,
        d,
        g_eta,
        marginal_residual: residual,
        iterations,
        problem,
        dual,
    })
}

/// All scalar diagnostics of one regularized solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub eta: f64,
    pub w2_squared: f64,
    /// `E_π[|x − y|²]`, assembled as `W₂²` plus the pointwise excess.
    pub cost: f64,
    /// `E_π[|x − y|²]` integrated directly.
    pub cost_direct: f64,
    /// Slack decomposition `Σ_{i≠j} ∫_{S_i} Δ_ij dπ`.
    pub suboptimality: f64,
    /// `∫ Σ_k π_k (|x − y_k|² − |x − y_{T(x)}|²) dμ`, i.e. `cost − W₂²`.
    pub suboptimality_direct: f64,
    pub kl_mu_rho: f64,
    pub kl_mu_nu: f64,
    pub entropy_nu: f64,
    /// `cost + KL(π|μ⊗ρ)/η`.
    pub entropic_cost_rho: f64,
    /// `cost + KL(π|μ⊗ν)/η`.
    pub entropic_cost_nu: f64,
    /// `∫ f_η dμ`.
    pub mean_f_eta: f64,
    pub phi: f64,
    /// `η(W₂² − entropic_cost_rho)`, computed without cancellation.
    pub phi_from_costs: f64,
    pub d_eta: Vec<f64>,
    pub d_eta_inf_norm: f64,
    /// Marginals `m_j` from direct transfer integrals.
    pub marginals: Vec<f64>,
    pub predicted_constant: f64,
}

/// One sweep row; field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiagnosticsRow {
    pub eta: f64,
    pub cost: f64,
    pub w2_squared: f64,
    pub suboptimality: f64,
    pub suboptimality_scaled: f64,
    pub kl_mu_rho: f64,
    pub kl_mu_nu: f64,
    pub entropic_cost: f64,
    pub d_eta_inf_norm: f64,
    pub phi: f64,
    pub phi_scaled: f64,
    pub predicted_constant: f64,
}

impl DiagnosticsRow {
    pub const HEADER: [&'static str; 12] = [
        "eta",
        "cost",
        "w2_squared",
        "suboptimality",
        "suboptimality_scaled",
        "kl_mu_rho",
        "kl_mu_nu",
        "entropic_cost",
        "d_eta_inf_norm",
        "phi",
        "phi_scaled",
        "predicted_constant",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.eta,
            self.cost,
            self.w2_squared,
            self.suboptimality,
            self.suboptimality_scaled,
            self.kl_mu_rho,
            self.kl_mu_nu,
            self.entropic_cost,
            self.d_eta_inf_norm,
            self.phi,
            self.phi_scaled,
            self.predicted_constant,
        ]
    }

    /// Row for a failed solve: `η` and the prediction, everything else NaN.
    pub fn failed(eta: f64, predicted_constant: f64) -> Self {
        let nan = f64::NAN;
        Self {
            eta,
            cost: nan,
            w2_squared: nan,
            suboptimality: nan,
            suboptimality_scaled: nan,
            kl_mu_rho: nan,
            kl_mu_nu: nan,
            entropic_cost: nan,
            d_eta_inf_norm: nan,
            phi: nan,
            phi_scaled: nan,
            predicted_constant,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.cost.is_nan()
    }
}

impl Diagnostics {
    pub fn row(&self) -> DiagnosticsRow {
        let eta = self.eta;
        DiagnosticsRow {
            eta,
            cost: self.cost,
            w2_squared: self.w2_squared,
            suboptimality: self.suboptimality,
            suboptimality_scaled: eta * eta * self.suboptimality,
            kl_mu_rho: self.kl_mu_rho,
            kl_mu_nu: self.kl_mu_nu,
            entropic_cost: self.entropic_cost_rho,
            d_eta_inf_norm: self.d_eta_inf_norm,
            phi: self.phi,
            phi_scaled: eta * self.phi,
            predicted_constant: self.predicted_constant,
        }
    }
}

// offsets into the per-cell diagnostics vector, after the n transfers
const EXCESS: usize = 0;
const COST: usize = 1;
const SUBOPT: usize = 2;
const KL_RHO: usize = 3;
const KL_NU: usize = 4;
const F_ETA: usize = 5;
const PHI: usize = 6;
const EXTRA: usize = 7;

impl<'a> EntropicSolution<'a> {
    /// Integrate every diagnostic in one pass per cell and run the internal
    /// consistency checks (slack decomposition vs direct difference, the
    /// `Φ` identity and the soft-potential identity).
    pub fn diagnostics(&self, opts: &SinkhornOptions) -> Result<Diagnostics> {
        let problem = self.problem;
        let dual = self.dual;
        let atoms = &problem.atoms;
        let n = atoms.len();
        let eta = self.eta;
        let log_nu: Vec<f64> = atoms.weights().iter().map(|w| w.ln()).collect();
        let solver = Solver::new(problem, dual, eta, opts);
        let ker = solver.kernel(&self.d);
        let dim = n + EXTRA;
        let parts = opts.exec.try_map(n, |i| {
            let yi = atoms.position(i);
            let gi = dual.g_star[i];
            let di = self.d[i];
            let f = |x: Vec2, out: &mut [f64]| {
                let (u, rest) = out.split_at_mut(n);
                let lse = ker.log_weights(i, x, u);
                let ci = x.dist2(yi);
                let (mut excess, mut cost, mut sub, mut klr, mut kln) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for k in 0..n {
                    let logp = u[k] - lse;
                    let p = logp.exp();
                    let ck = x.dist2(atoms.position(k));
                    cost += p * ck;
                    if k != i {
                        excess += p * (ck - ci);
                        sub += p * slack(atoms, &dual.g_star, i, k, x);
                    }
                    if p > 0.0 {
                        klr += p * logp;
                        kln += p * (logp - log_nu[k]);
                    }
                    u[k] = p;
                }
                rest[EXCESS] = excess;
                rest[COST] = cost;
                rest[SUBOPT] = sub;
                rest[KL_RHO] = klr;
                rest[KL_NU] = kln;
                rest[F_ETA] = (ci - gi) - (di + lse) / eta;
                rest[PHI] = lse;
            };
            let (pts, lines) = &solver.refine[i];
            dual.diagram
                .integrate_cell_vec(&problem.density, i, &f, dim, &opts.quad, pts, lines)
        })?;
        let mut tot = vec![0.0; dim];
        let mut marginals = vec![0.0; n];
        for p in &parts {
            for (t, v) in tot.iter_mut().zip(p) {
                *t += v;
            }
            for (m, v) in marginals.iter_mut().zip(&p[..n]) {
                *m += v;
            }
        }
        let rest = &tot[n..];
        let w2 = dual.w2_squared;
        let excess = rest[EXCESS];
        let subopt = rest[SUBOPT];
        let kl_rho = rest[KL_RHO];
        let kl_nu = rest[KL_NU];
        let phi = rest[PHI];
        let cost = w2 + excess;
        let d_inf = self.d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diag = Diagnostics {
            eta,
            w2_squared: w2,
            cost,
            cost_direct: rest[COST],
            suboptimality: subopt,
            suboptimality_direct: excess,
            kl_mu_rho: kl_rho,
            kl_mu_nu: kl_nu,
            entropy_nu: atoms.entropy(),
            entropic_cost_rho: cost + kl_rho / eta,
            entropic_cost_nu: cost + kl_nu / eta,
            mean_f_eta: rest[F_ETA],
            phi,
            phi_from_costs: -eta * excess - kl_rho,
            d_eta: self.d.clone(),
            d_eta_inf_norm: d_inf,
            marginals,
            predicted_constant: crate::asymptotics::predict_subopt_constant(
                &dual.facet_weights,
                atoms,
            ),
        };
        check_diagnostics(&diag)?;
        Ok(diag)
    }

    /// `E_{π_η}[|x − y|²]`.
    pub fn cost(&self, opts: &SinkhornOptions) -> Result<f64> {
        Ok(self.diagnostics(opts)?.cost)
    }

    /// Slack-decomposition suboptimality, checked against `cost − W₂²`.
    pub fn suboptimality(&self, opts: &SinkhornOptions) -> Result<f64> {
        Ok(self.diagnostics(opts)?.suboptimality)
    }

    /// `(KL(π|μ⊗ρ), KL(π|μ⊗ν), cost + KL(π|μ⊗ρ)/η)`.
    pub fn kl_and_entropic_cost(&self, opts: &SinkhornOptions) -> Result<(f64, f64, f64)> {
        let d = self.diagnostics(opts)?;
        Ok((d.kl_mu_rho, d.kl_mu_nu, d.entropic_cost_rho))
    }

    /// `Φ(η) = Σ_i ∫_{S_i} log(1 + Σ_{j≠i} e^{d_j − d_i − ηΔ_ij}) dμ`.
    pub fn phi(&self, opts: &SinkhornOptions) -> Result<f64> {
        Ok(self.diagnostics(opts)?.phi)
    }

    /// `(d_η, ‖d_η‖_∞)`.
    pub fn dual_gap(&self) -> (Vec<f64>, f64) {
        let inf = self.d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        (self.d.clone(), inf)
    }
}

fn check_diagnostics(d: &Diagnostics) -> Result<()> {
    if d.suboptimality < -1e-9 {
        return Err(Error::Consistency {
            what: "suboptimality is negative",
            lhs: d.suboptimality,
            rhs: 0.0,
            tol: 1e-9,
        });
    }
    let tol = 1e-8f64.max(1e-3 * d.suboptimality.abs());
    if (d.suboptimality - d.suboptimality_direct).abs() > tol {
        return Err(Error::Consistency {
            what: "slack decomposition vs cost − W₂²",
            lhs: d.suboptimality,
            rhs: d.suboptimality_direct,
            tol,
        });
    }
    let tol = 1e-6 * d.phi.abs().max(1.0);
    if (d.phi - d.phi_from_costs).abs() > tol {
        return Err(Error::Consistency {
            what: "Φ(η) vs η(W₂² − entropic cost)",
            lhs: d.phi,
            rhs: d.phi_from_costs,
            tol,
        });
    }
    if (d.entropic_cost_rho - d.mean_f_eta).abs() > 1e-8 {
        return Err(Error::Consistency {
            what: "entropic cost vs ∫ f_η dμ",
            lhs: d.entropic_cost_rho,
            rhs: d.mean_f_eta,
            tol: 1e-8,
        });
    }
    Ok(())
}
