//! Brute-force check of the line solver: discretize the source on a midpoint
//! grid and solve the fully discrete entropic problem with dense log-domain
//! Sinkhorn under the same reference-measure convention (`μ_N ⊗ counting`).

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::Density;
use crate::powercell::Atoms;

/// Midpoints of `N` equal cells covering the truncated support, weighted by
/// the source mass of each cell. Cells without mass are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn discretize(density: &Density, n: usize) -> Result<Grid> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 cells, got {n}"
        )));
    }
    let support = density
        .support_interval()
        .ok_or_else(|| Error::InvalidInput("the oracle handles line densities only".into()))?;
    let h = support.len() / n as f64;
    let edges: Vec<f64> = (0..=n)
        .map(|k| {
            if k == n {
                support.hi
            } else {
                support.lo + h * k as f64
            }
        })
        .collect();
    let cdf: Vec<f64> = edges
        .iter()
        .map(|&x| density.cdf(x))
        .collect::<Result<_>>()?;
    // cells deep in the tails can carry no mass in floating point; drop them
    let (points, mass): (Vec<f64>, Vec<f64>) = edges
        .windows(2)
        .zip(cdf.windows(2))
        .map(|(e, c)| (0.5 * (e[0] + e[1]), c[1] - c[0]))
        .filter(|(_, m)| *m > 0.0)
        .unzip();
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("grid carries no mass".into()));
    }
    let weights = mass.into_iter().map(|m| m / total).collect();
    Ok(Grid { points, weights })
}

/// Fully discrete entropic problem with `N` grid points and `n` atoms.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub points: Vec<f64>,
    pub mu: Vec<f64>,
    pub atoms: Atoms,
    /// Row-major `N × n` matrix `C_kj = |x_k − y_j|²`.
    pub cost: Vec<f64>,
    pub eta: f64,
}

impl DiscreteProblem {
    pub fn new(grid: Grid, atoms: Atoms, eta: f64) -> Result<Self> {
        if atoms.dim() != 1 {
            return Err(Error::InvalidInput(
                "the oracle handles line atoms only".into(),
            ));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        if grid.points.len() != grid.weights.len() || grid.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput(
                "grid weights must be positive, one per point".into(),
            ));
        }
        let cost = grid
            .points
            .iter()
            .flat_map(|&x| atoms.positions().iter().map(move |y| (x - y.x).powi(2)))
            .collect();
        Ok(Self {
            points: grid.points,
            mu: grid.weights,
            atoms,
            cost,
            eta,
        })
    }

    pub fn rows(&self) -> usize {
        self.points.len()
    }

    pub fn cols(&self) -> usize {
        self.atoms.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for DenseOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub cost: f64,
    /// `KL(π | μ_N ⊗ counting)`.
    pub kl_rho: f64,
    /// Atom-side potential with `E_ν[g] = 0`.
    pub g: Vec<f64>,
    pub iterations: usize,
    pub marginal_residual: f64,
}

/// `f_k = −(1/η) log Σ_j e^{−η(C_kj − g_j)}` for one row.
fn row_potential(c: &[f64], g: &[f64], eta: f64) -> f64 {
    let m = c
        .iter()
        .zip(g)
        .map(|(c, g)| -eta * (c - g))
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = c
        .iter()
        .zip(g)
        .map(|(c, g)| (-eta * (c - g) - m).exp())
        .sum();
    -(m + s.ln()) / eta
}

/// Alternating log-domain scalings until `max_j |log(m_j/ν_j)| <= tol`.
pub fn dense_sinkhorn(dp: &DiscreteProblem, opts: &DenseOptions) -> Result<DenseSolution> {
    let (rows, n) = (dp.rows(), dp.cols());
    let eta = dp.eta;
    let nu = dp.atoms.weights();
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let f = opts.exec.map(rows, |k| {
            row_potential(&dp.cost[k * n..(k + 1) * n], &g, eta)
        });
        // column log-marginals log Σ_k μ_k e^{η(f_k + g_j − C_kj)}
        let log_m: Vec<f64> = (0..n)
            .map(|j| {
                let v = |k: usize| dp.mu[k].ln() + eta * (f[k] + g[j] - dp.cost[k * n + j]);
                let m = (0..rows).map(v).fold(f64::NEG_INFINITY, f64::max);
                m + (0..rows).map(|k| (v(k) - m).exp()).sum::<f64>().ln()
            })
            .collect();
        let residual = log_m
            .iter()
            .zip(nu)
            .map(|(l, v)| (l - v.ln()).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                solver: "dense Sinkhorn",
                iterations,
                residual,
            });
        }
        if residual <= opts.tol {
            let (mut cost, mut kl) = (0.0, 0.0);
            for k in 0..rows {
                for j in 0..n {
                    let c = dp.cost[k * n + j];
                    let log_ratio = eta * (f[k] + g[j] - c);
                    let p = dp.mu[k] * log_ratio.exp();
                    cost += p * c;
                    if p > 0.0 {
                        kl += p * log_ratio;
                    }
                }
            }
            dp.atoms.center(&mut g);
            return Ok(DenseSolution {
                cost,
                kl_rho: kl,
                g,
                iterations,
                marginal_residual: residual,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                solver: "dense Sinkhorn",
                iterations,
                residual,
            });
        }
        for j in 0..n {
            g[j] += (nu[j].ln() - log_m[j]) / eta;
        }
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_weights() {
        let g = discretize(&Density::uniform(-1.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(g.points, vec![-0.75, -0.25, 0.25, 0.75]);
        for w in &g.weights {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_two_cells_split_evenly() {
        let g = discretize(&Density::gaussian(0.0, 1.0).unwrap(), 2).unwrap();
        assert!((g.weights[0] - 0.5).abs() < 1e-15 && (g.weights[1] - 0.5).abs() < 1e-15);
        let g = discretize(&Density::laplace(0.3, 0.7).unwrap(), 777).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(discretize(&Density::uniform(0.0, 1.0).unwrap(), 1).is_err());
        let g = discretize(&Density::gaussian(0.0, 1.0).unwrap(), 2000).unwrap();
        assert!(g.points.len() <= 2000 && g.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn single_point_single_atom() {
        let grid = Grid {
            points: vec![0.3],
            weights: vec![1.0],
        };
        let dp = DiscreteProblem::new(grid, Atoms::line(&[1.0], &[1.0]).unwrap(), 4.0).unwrap();
        let s = dense_sinkhorn(&dp, &DenseOptions::default()).unwrap();
        assert!((s.cost - 0.49).abs() < 1e-15);
        assert!(s.kl_rho.abs() < 1e-15);
        assert_eq!(s.g, vec![0.0]);
    }

    #[test]
    fn symmetric_grid_gives_zero_potential() {
        let grid = discretize(&Density::uniform(-1.0, 1.0).unwrap(), 200).unwrap();
        let dp = DiscreteProblem::new(grid, Atoms::line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap(), 8.0)
            .unwrap();
        let s = dense_sinkhorn(&dp, &DenseOptions::default()).unwrap();
        assert!(s.g.iter().all(|g| g.abs() < 1e-12), "{:?}", s.g);
    }

    #[test]
    fn policies_agree() {
        let grid = discretize(&Density::gaussian(0.2, 0.8).unwrap(), 300).unwrap();
        let atoms = Atoms::line(&[-1.0, 0.5, 2.0], &[0.2, 0.5, 0.3]).unwrap();
        let dp = DiscreteProblem::new(grid, atoms, 3.0).unwrap();
        let a = dense_sinkhorn(
            &dp,
            &DenseOptions {
                exec: Exec::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let b = dense_sinkhorn(
            &dp,
            &DenseOptions {
                exec: Exec::Parallel,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
