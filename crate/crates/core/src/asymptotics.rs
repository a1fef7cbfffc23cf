//! Predicted asymptotic constants, the symmetric two-atom closed form, η
//! sweeps and log-log rate fits.

use crate::entropic::{sinkhorn_solve, Diagnostics, DiagnosticsRow, SinkhornOptions};
use crate::error::{Error, Result};
use crate::measure::{Density, QuadratureSpec, Refinement};
use crate::powercell::{Atoms, FacetWeights};
use crate::problem::Problem;
use crate::sdot::{solve_unregularized, DualSolution, NewtonOptions};
use crate::specialfn::zeta2;

/// Leading-order constants of the large-`η` expansions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Prediction {
    /// `C = (ζ(2)/2) Σ_{i<j} w_ij / |y_i − y_j|`.
    pub subopt_constant: f64,
    /// `H(ν) = −Σ ν_i log ν_i`.
    pub entropy_nu: f64,
    pub w2_squared: f64,
}

impl Prediction {
    pub fn from_dual(dual: &DualSolution, atoms: &Atoms) -> Self {
        Self {
            subopt_constant: predict_subopt_constant(&dual.facet_weights, atoms),
            entropy_nu: atoms.entropy(),
            w2_squared: dual.w2_squared,
        }
    }
}

/// `(ζ(2)/2) Σ_{i<j} w_ij / |y_i − y_j|`.
pub fn predict_subopt_constant(weights: &FacetWeights, atoms: &Atoms) -> f64 {
    0.5 * zeta2()
        * weights
            .iter()
            .map(|((i, j), w)| w / atoms.distance(i, j))
            .sum::<f64>()
}

/// `W₂² + H(ν)/η − C/η²`, the second-order expansion of the entropic cost
/// with reference measure `μ⊗ν`.
pub fn predicted_entropic_cost(p: &Prediction, eta: f64) -> f64 {
    p.w2_squared + p.entropy_nu / eta - p.subopt_constant / (eta * eta)
}

/// Suboptimality of the symmetric problem with atoms `±1` and equal weights:
/// `8 ∫₀^∞ x μ(x) / (1 + e^{4ηx}) dx`.
pub fn case_study_subopt(density: &Density, eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "eta must be positive and finite, got {eta}"
        )));
    }
    if !density.is_symmetric_about_zero() {
        return Err(Error::InvalidInput(
            "the closed form needs a line density symmetric about 0".into(),
        ));
    }
    let hi = density
        .support_interval()
        .map(|s| s.hi)
        .ok_or_else(|| Error::InvalidInput("the closed form needs a line density".into()))?;
    let rate = 4.0 * eta;
    let f = |x: f64| {
        let e = (-rate * x).exp();
        x * e / (1.0 + e)
    };
    let refine = [Refinement::new(0.0, 1.0 / rate)];
    Ok(8.0 * density.integrate_interval(f, 0.0, hi, spec, &refine)?)
}

/// Least-squares fit of `log(subopt)` against `log(η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const DEFAULT_ETA_MIN: f64 = 32.0;

/// Fit over rows with `η >= eta_min` and a positive, finite suboptimality.
pub fn fit_rate(rows: &[DiagnosticsRow], eta_min: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.eta >= eta_min && r.suboptimality > 0.0 && r.suboptimality.is_finite())
        .map(|r| (r.eta.ln(), r.suboptimality.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 3 usable rows with eta >= {eta_min}, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "rate fit needs distinct eta values".into(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub newton: NewtonOptions,
    pub sinkhorn: SinkhornOptions,
    /// Start each solve from the previous `d_η` and run sequentially. When
    /// false every `η` starts from `g*` and the solves run under
    /// `sinkhorn.exec`.
    pub warm_start: bool,
}

impl SweepOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            newton: NewtonOptions::for_dim(dim),
            sinkhorn: SinkhornOptions::for_dim(dim),
            warm_start: true,
        }
    }
}

/// Outcome of one `η` in a sweep.
#[derive(Debug)]
pub struct SweepRecord {
    pub row: DiagnosticsRow,
    /// Present when the solve and its consistency checks succeeded.
    pub diagnostics: Option<Diagnostics>,
    pub g_eta: Vec<f64>,
    pub iterations: usize,
    pub error: Option<Error>,
}

#[derive(Debug)]
pub struct Sweep {
    pub dual: DualSolution,
    pub prediction: Prediction,
    pub records: Vec<SweepRecord>,
}

impl Sweep {
    pub fn rows(&self) -> Vec<DiagnosticsRow> {
        self.records.iter().map(|r| r.row).collect()
    }

    pub fn first_error(&self) -> Option<&Error> {
        self.records.iter().find_map(|r| r.error.as_ref())
    }
}

fn solve_one(
    problem: &Problem,
    dual: &DualSolution,
    eta: f64,
    opts: &SinkhornOptions,
    warm: Option<&[f64]>,
    constant: f64,
) -> SweepRecord {
    let run = || -> Result<(Diagnostics, Vec<f64>, usize)> {
        let sol = sinkhorn_solve(problem, dual, eta, opts, warm)?;
        let diag = sol.diagnostics(opts)?;
        Ok((diag, sol.g_eta, sol.iterations))
    };
    match run() {
        Ok((diag, g_eta, iterations)) => SweepRecord {
            row: diag.row(),
            diagnostics: Some(diag),
            g_eta,
            iterations,
            error: None,
        },
        Err(e) => SweepRecord {
            row: DiagnosticsRow::failed(eta, constant),
            diagnostics: None,
            g_eta: Vec::new(),
            iterations: 0,
            error: Some(e),
        },
    }
}

/// Solve the unregularized problem once, then each `η` in ascending order.
/// Failed `η` values produce NaN rows carrying the error.
pub fn run_sweep(problem: &Problem, etas: &[f64], opts: &SweepOptions) -> Result<Sweep> {
    if etas.is_empty() {
        return Err(Error::InvalidInput("eta grid is empty".into()));
    }
    if let Some(e) = etas.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "eta must be positive and finite, got {e}"
        )));
    }
    if etas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "eta grid must be strictly ascending".into(),
        ));
    }
    let dual = solve_unregularized(problem, &opts.newton)?;
    let prediction = Prediction::from_dual(&dual, &problem.atoms);
    let c = prediction.subopt_constant;
    let records = if opts.warm_start {
        let mut out = Vec::with_capacity(etas.len());
        let mut warm: Option<Vec<f64>> = None;
        for &eta in etas {
            let rec = solve_one(problem, &dual, eta, &opts.sinkhorn, warm.as_deref(), c);
            if let Some(d) = &rec.diagnostics {
                warm = Some(d.d_eta.clone());
            }
            out.push(rec);
        }
        out
    } else {
        opts.sinkhorn.exec.map(etas.len(), |k| {
            solve_one(problem, &dual, etas[k], &opts.sinkhorn, None, c)
        })
    };
    Ok(Sweep {
        dual,
        prediction,
        records,
    })
}
