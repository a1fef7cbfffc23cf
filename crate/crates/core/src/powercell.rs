//! Power diagrams (Laguerre cells) of a weighted atom set restricted to the
//! support of the source density.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{clip_line_by, HalfPlane, Interval, Polygon, Vec2};
use crate::measure::{integrate_segment, Density, LineRefinement, QuadratureSpec, Refinement};

/// Facets shorter than this are treated as empty.
pub const MIN_FACET_LENGTH: f64 = 1e-12;

/// Target atoms `y_i` with probability weights `ν_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atoms {
    positions: Vec<Vec2>,
    weights: Vec<f64>,
    dim: usize,
}

impl Atoms {
    /// `dim` is 1 (positions on the x axis) or 2.
    pub fn new(positions: Vec<Vec2>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("unsupported dimension {dim}")));
        }
        if positions.is_empty() {
            return Err(Error::InvalidInput("at least one atom is required".into()));
        }
        if positions.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} positions but {} weights",
                positions.len(),
                weights.len()
            )));
        }
        for (i, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "atom {i} has a non-finite position"
                )));
            }
            if dim == 1 && p.y != 0.0 {
                return Err(Error::InvalidInput(format!("atom {i} is off the line")));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "atom {i} has weight {w}; weights must be positive"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "atom weights sum to {total}, not 1"
            )));
        }
        for i in 0..positions.len() {
            for j in 0..i {
                if positions[i] == positions[j] {
                    return Err(Error::InvalidInput(format!(
                        "atoms {j} and {i} share the position ({}, {})",
                        positions[i].x, positions[i].y
                    )));
                }
            }
        }
        Ok(Self {
            positions,
            weights,
            dim,
        })
    }

    pub fn line(positions: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(
            positions.iter().map(|&x| Vec2::on_line(x)).collect(),
            weights.to_vec(),
            1,
        )
    }

    pub fn plane(positions: &[[f64; 2]], weights: &[f64]) -> Result<Self> {
        Self::new(
            positions.iter().map(|&[x, y]| Vec2::new(x, y)).collect(),
            weights.to_vec(),
            2,
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn position(&self, i: usize) -> Vec2 {
        self.positions[i]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Shannon entropy `H(ν) = −Σ ν_i log ν_i`.
    pub fn entropy(&self) -> f64 {
        -self.weights.iter().map(|&w| w * w.ln()).sum::<f64>()
    }

    /// `E_ν[v]`.
    pub fn mean_of(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    /// Shift `v` so that `E_ν[v] = 0`.
    pub fn center(&self, v: &mut [f64]) {
        let m = self.mean_of(v);
        v.iter_mut().for_each(|x| *x -= m);
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.positions[i] - self.positions[j]).norm()
    }
}

/// `Δ_ij(x) = 2⟨x, y_i−y_j⟩ − |y_i|² + |y_j|² − g_j + g_i`, the amount by
/// which atom `j` is more expensive than atom `i` at `x`.
#[inline]
pub fn slack(atoms: &Atoms, g: &[f64], i: usize, j: usize, x: Vec2) -> f64 {
    let yi = atoms.positions[i];
    let yj = atoms.positions[j];
    2.0 * x.dot(yi - yj) - yi.norm2() + yj.norm2() - g[j] + g[i]
}

/// Power `|x − y_k|² − g_k`.
#[inline]
pub fn power(atoms: &Atoms, g: &[f64], k: usize, x: Vec2) -> f64 {
    x.dist2(atoms.positions[k]) - g[k]
}

/// Index of the atom with the smallest power at `x`; ties go to the lowest index.
pub fn owner(atoms: &Atoms, g: &[f64], x: Vec2) -> usize {
    let mut best = 0;
    let mut best_val = power(atoms, g, 0, x);
    for k in 1..atoms.len() {
        let v = power(atoms, g, k, x);
        if v < best_val {
            best = k;
            best_val = v;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Interval(Interval),
    Polygon(Polygon),
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        matches!(self, Cell::Empty)
    }
}

/// Boundary shared by two cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Facet {
    Point(f64),
    Segment(Vec2, Vec2),
}

#[derive(Debug, Clone)]
pub struct PowerDiagram {
    atoms: Atoms,
    g: Vec<f64>,
    cells: Vec<Cell>,
    /// Keyed by `(i, j)` with `i < j`.
    facets: BTreeMap<(usize, usize), Facet>,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Zero of `Δ_ij` on the line.
#[inline]
fn breakpoint_1d(atoms: &Atoms, g: &[f64], i: usize, j: usize) -> f64 {
    let yi = atoms.positions[i].x;
    let yj = atoms.positions[j].x;
    (yi * yi - yj * yj + g[j] - g[i]) / (2.0 * (yi - yj))
}

/// Half-plane `{Δ_ij ≥ 0}`.
fn keep_plane(atoms: &Atoms, g: &[f64], i: usize, j: usize) -> HalfPlane {
    let yi = atoms.positions[i];
    let yj = atoms.positions[j];
    HalfPlane {
        normal: (yj - yi) * 2.0,
        offset: yj.norm2() - yi.norm2() + g[i] - g[j],
    }
}

pub fn build_diagram(atoms: &Atoms, g: &[f64], density: &Density) -> Result<PowerDiagram> {
    let n = atoms.len();
    if g.len() != n {
        return Err(Error::InvalidInput(format!(
            "weight vector has length {}, expected {n}",
            g.len()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "weight vector has non-finite entries".into(),
        ));
    }
    if atoms.dim() != density.dim() {
        return Err(Error::InvalidInput(
            "atom and density dimensions differ".into(),
        ));
    }
    let mut cells = Vec::with_capacity(n);
    let mut facets = BTreeMap::new();
    match density {
        Density::Line { support, .. } => {
            for i in 0..n {
                let (mut lo, mut hi) = (support.lo, support.hi);
                let yi = atoms.positions[i].x;
                for j in (0..n).filter(|&j| j != i) {
                    let b = breakpoint_1d(atoms, g, i, j);
                    if yi > atoms.positions[j].x {
                        lo = lo.max(b);
                    } else {
                        hi = hi.min(b);
                    }
                }
                cells.push(if lo < hi {
                    Cell::Interval(Interval { lo, hi })
                } else {
                    Cell::Empty
                });
            }
            for i in 0..n {
                for j in i + 1..n {
                    let b = breakpoint_1d(atoms, g, i, j);
                    if !support.contains(b) {
                        continue;
                    }
                    let x = Vec2::on_line(b);
                    let level = power(atoms, g, i, x).max(power(atoms, g, j, x));
                    let eps = 1e-12 * (1.0 + level.abs());
                    let shared = (0..n)
                        .filter(|&k| k != i && k != j)
                        .all(|k| power(atoms, g, k, x) >= level - eps);
                    if shared {
                        facets.insert((i, j), Facet::Point(b));
                    }
                }
            }
        }
        Density::Plane { support, .. } => {
            for i in 0..n {
                let mut poly = Some(support.clone());
                for j in (0..n).filter(|&j| j != i) {
                    poly = match poly {
                        Some(p) => p.clip(&keep_plane(atoms, g, i, j)),
                        None => break,
                    };
                }
                cells.push(poly.map_or(Cell::Empty, Cell::Polygon));
            }
            let support_planes = support.half_planes();
            for i in 0..n {
                for j in i + 1..n {
                    let u = atoms.positions[i] - atoms.positions[j];
                    let rhs = atoms.positions[i].norm2() - atoms.positions[j].norm2() + g[j] - g[i];
                    let origin = u * (rhs / (2.0 * u.norm2()));
                    let dir = Vec2::new(-u.y, u.x) * (1.0 / u.norm());
                    let mut planes = support_planes.clone();
                    planes.extend(
                        (0..n)
                            .filter(|&k| k != i && k != j)
                            .map(|k| keep_plane(atoms, g, i, k)),
                    );
                    if let Some((t0, t1)) =
                        clip_line_by(&planes, origin, dir, f64::NEG_INFINITY, f64::INFINITY)
                    {
                        if t1 - t0 >= MIN_FACET_LENGTH {
                            facets.insert(
                                (i, j),
                                Facet::Segment(origin + dir * t0, origin + dir * t1),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(PowerDiagram {
        atoms: atoms.clone(),
        g: g.to_vec(),
        cells,
        facets,
    })
}

impl PowerDiagram {
    pub fn atoms(&self) -> &Atoms {
        &self.atoms
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn facets(&self) -> impl Iterator<Item = ((usize, usize), &Facet)> {
        self.facets.iter().map(|(k, v)| (*k, v))
    }

    pub fn facet(&self, i: usize, j: usize) -> Option<&Facet> {
        self.facets.get(&ordered(i, j))
    }

    #[inline]
    pub fn slack(&self, i: usize, j: usize, x: Vec2) -> f64 {
        slack(&self.atoms, &self.g, i, j, x)
    }

    pub fn owner(&self, x: Vec2) -> usize {
        owner(&self.atoms, &self.g, x)
    }

    /// Zero of `Δ_ij` (1D only).
    pub fn breakpoint(&self, i: usize, j: usize) -> f64 {
        breakpoint_1d(&self.atoms, &self.g, i, j)
    }

    /// Line `{Δ_ij = t}` written as `n·x = offset` with unit normal
    /// `n = (y_i − y_j)/|y_i − y_j|`.
    pub fn level_line(&self, i: usize, j: usize, t: f64) -> (Vec2, f64) {
        let yi = self.atoms.positions[i];
        let yj = self.atoms.positions[j];
        let u = yi - yj;
        let len = u.norm();
        let offset = (t + yi.norm2() - yj.norm2() + self.g[j] - self.g[i]) / (2.0 * len);
        (u * (1.0 / len), offset)
    }

    /// `μ(S_i)`. Line densities use the closed-form CDF.
    pub fn cell_mass(&self, density: &Density, i: usize, spec: &QuadratureSpec) -> Result<f64> {
        match &self.cells[i] {
            Cell::Empty => Ok(0.0),
            Cell::Interval(iv) => Ok((density.cdf(iv.hi)? - density.cdf(iv.lo)?).max(0.0)),
            Cell::Polygon(p) => Ok(density.integrate_polygon_vec(
                &|_, o: &mut [f64]| o[0] = 1.0,
                1,
                p,
                spec,
                &[],
            )?[0]),
        }
    }

    pub fn cell_masses(
        &self,
        density: &Density,
        spec: &QuadratureSpec,
        exec: Exec,
    ) -> Result<Vec<f64>> {
        exec.try_map(self.cells.len(), |i| self.cell_mass(density, i, spec))
    }

    /// `w_ij = h_ij(0)`: the density integrated over the shared facet.
    pub fn facet_weight(
        &self,
        density: &Density,
        i: usize,
        j: usize,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        if i == j {
            return Err(Error::InvalidInput(
                "facet weight needs two distinct atoms".into(),
            ));
        }
        match self.facet(i, j) {
            None => Ok(0.0),
            Some(Facet::Point(b)) => Ok(density.inner_limit(Vec2::on_line(*b))),
            Some(Facet::Segment(p, q)) => {
                Ok(integrate_segment(|x| density.inner_limit(x), *p, *q, spec)?)
            }
        }
    }

    pub fn facet_weights(
        &self,
        density: &Density,
        spec: &QuadratureSpec,
        exec: Exec,
    ) -> Result<FacetWeights> {
        let keys: Vec<(usize, usize)> = self.facets.keys().copied().collect();
        let vals = exec.try_map(keys.len(), |k| {
            self.facet_weight(density, keys[k].0, keys[k].1, spec)
        })?;
        Ok(FacetWeights {
            n: self.atoms.len(),
            w: keys.into_iter().zip(vals).collect(),
        })
    }

    /// `∫_{S_i} f dμ` for a vector integrand. `refine` applies to line
    /// cells, `lines` to planar ones.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate_cell_vec<F>(
        &self,
        density: &Density,
        i: usize,
        f: &F,
        dim: usize,
        spec: &QuadratureSpec,
        refine: &[Refinement],
        lines: &[LineRefinement],
    ) -> Result<Vec<f64>>
    where
        F: Fn(Vec2, &mut [f64]) + ?Sized,
    {
        match &self.cells[i] {
            Cell::Empty => Ok(vec![0.0; dim]),
            Cell::Interval(iv) => {
                let g = |x: f64, out: &mut [f64]| f(Vec2::on_line(x), out);
                density.integrate_interval_vec(&g, dim, iv.lo, iv.hi, spec, refine)
            }
            Cell::Polygon(p) => density.integrate_polygon_vec(f, dim, p, spec, lines),
        }
    }

    /// Refinement data resolving the transition of `Δ_ik` across its zero on
    /// the length scale `1/(2η|y_i − y_k|)`, for every `k ≠ i`.
    pub fn transition_refinements(
        &self,
        i: usize,
        eta: f64,
    ) -> (Vec<Refinement>, Vec<LineRefinement>) {
        let n = self.atoms.len();
        let mut pts = Vec::new();
        let mut lines = Vec::new();
        for k in (0..n).filter(|&k| k != i) {
            let scale = 1.0 / (2.0 * eta * self.atoms.distance(i, k));
            if !scale.is_finite() || scale <= 0.0 {
                continue;
            }
            if self.atoms.dim() == 1 {
                pts.push(Refinement::new(self.breakpoint(i, k), scale));
            } else {
                let (normal, offset) = self.level_line(i, k, 0.0);
                lines.push(LineRefinement {
                    normal,
                    offset,
                    scale,
                });
            }
        }
        (pts, lines)
    }

    /// `h_ij(t)`: density integrated over `S_i ∩ {Δ_ij = t}`.
    pub fn level_set_integral(
        &self,
        density: &Density,
        i: usize,
        j: usize,
        t: f64,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        match &self.cells[i] {
            Cell::Empty => Ok(0.0),
            Cell::Interval(iv) => {
                let yi = self.atoms.positions[i].x;
                let yj = self.atoms.positions[j].x;
                let x = self.breakpoint(i, j) + t / (2.0 * (yi - yj));
                Ok(if iv.contains(x) {
                    density.inner_limit(Vec2::on_line(x))
                } else {
                    0.0
                })
            }
            Cell::Polygon(_) if t < 0.0 => Ok(0.0),
            Cell::Polygon(_) => {
                // clip by the defining half-planes rather than the cell polygon,
                // whose boundary contains the line itself when t = 0
                let support = density.support_polygon().ok_or_else(|| {
                    Error::InvalidInput("plane cells need a plane density".into())
                })?;
                let (nrm, off) = self.level_line(i, j, t);
                let origin = nrm * off;
                let dir = Vec2::new(-nrm.y, nrm.x);
                let mut planes = support.half_planes();
                planes.extend(
                    (0..self.atoms.len())
                        .filter(|&k| k != i && k != j)
                        .map(|k| keep_plane(&self.atoms, &self.g, i, k)),
                );
                match clip_line_by(&planes, origin, dir, f64::NEG_INFINITY, f64::INFINITY) {
                    Some((t0, t1)) if t1 - t0 >= MIN_FACET_LENGTH => Ok(integrate_segment(
                        |x| density.inner_limit(x),
                        origin + dir * t0,
                        origin + dir * t1,
                        spec,
                    )?),
                    _ => Ok(0.0),
                }
            }
        }
    }
}

/// Symmetric facet weights `w_ij = w_ji`, absent pairs are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetWeights {
    n: usize,
    w: BTreeMap<(usize, usize), f64>,
}

impl FacetWeights {
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = ((usize, usize), f64)>) -> Self {
        Self {
            n,
            w: pairs
                .into_iter()
                .map(|((i, j), v)| (ordered(i, j), v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.w.get(&ordered(i, j)).copied().unwrap_or(0.0)
    }

    /// Pairs `(i, j)` with `i < j` and their weights.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.w.iter().map(|(k, v)| (*k, *v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    /// Component representative for each atom.
    pub labels: Vec<usize>,
}

/// Connectivity of the graph with edges `{w_ij > threshold}`.
pub fn adjacency_connected(weights: &FacetWeights, threshold: f64) -> Connectivity {
    let n = weights.len();
    let mut uf = UnionFind::<usize>::new(n);
    for ((i, j), w) in weights.iter() {
        if w > threshold {
            uf.union(i, j);
        }
    }
    let labels = uf.into_labeling();
    let connected = labels.iter().all(|&l| l == labels[0]);
    Connectivity { connected, labels }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn symmetric_line_cells() {
        let a = Atoms::line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let d = Density::uniform(-1.0, 1.0).unwrap();
        let pd = build_diagram(&a, &[0.0, 0.0], &d).unwrap();
        assert_eq!(pd.cell(0), &Cell::Interval(Interval { lo: -1.0, hi: 0.0 }));
        assert_eq!(pd.cell(1), &Cell::Interval(Interval { lo: 0.0, hi: 1.0 }));
        assert_eq!(pd.facet(1, 0), Some(&Facet::Point(0.0)));
    }

    #[test]
    fn shifted_breakpoint_and_masses() {
        let a = Atoms::line(&[-1.0, 1.0], &[0.25, 0.75]).unwrap();
        let d = Density::uniform(-1.0, 1.0).unwrap();
        let pd = build_diagram(&a, &[-1.5, 0.5], &d).unwrap();
        assert_eq!(pd.cell(0), &Cell::Interval(Interval { lo: -1.0, hi: -0.5 }));
        let m = pd.cell_masses(&d, &spec(), Exec::Sequential).unwrap();
        assert_eq!(m, vec![0.25, 0.75]);
    }

    #[test]
    fn empty_cell_when_dominated() {
        let a = Atoms::line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let d = Density::uniform(-1.0, 1.0).unwrap();
        let pd = build_diagram(&a, &[-10.0, 0.0], &d).unwrap();
        assert!(pd.cell(0).is_empty());
        assert_eq!(pd.cell_mass(&d, 0, &spec()).unwrap(), 0.0);
        assert_eq!(pd.facet_weight(&d, 0, 1, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn slack_examples() {
        let a = Atoms::line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let g = [0.0, 0.0];
        assert_eq!(slack(&a, &g, 1, 1, Vec2::on_line(0.3)), 0.0);
        assert_eq!(slack(&a, &g, 1, 0, Vec2::on_line(0.5)), 2.0);
    }

    #[test]
    fn gaussian_facet_weight_is_density_at_zero() {
        let a = Atoms::line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let d = Density::gaussian(0.0, 1.0).unwrap();
        let pd = build_diagram(&a, &[0.0, 0.0], &d).unwrap();
        let w = pd.facet_weight(&d, 0, 1, &spec()).unwrap();
        assert!((w - 0.398_942_280_401_432_7).abs() < 1e-14);
    }

    #[test]
    fn square_facet() {
        let a = Atoms::plane(&[[0.25, 0.5], [0.75, 0.5]], &[0.5, 0.5]).unwrap();
        let d = Density::uniform2d(Polygon::unit_square());
        let pd = build_diagram(&a, &[0.0, 0.0], &d).unwrap();
        let Some(Facet::Segment(p, q)) = pd.facet(0, 1) else {
            panic!("missing facet");
        };
        assert!(((*q - *p).norm() - 1.0).abs() < 1e-14);
        assert!((p.x - 0.5).abs() < 1e-14 && (q.x - 0.5).abs() < 1e-14);
        let w = pd.facet_weights(&d, &spec(), Exec::Sequential).unwrap();
        assert!((w.get(0, 1) - 1.0).abs() < 1e-13);
        assert_eq!(w.get(0, 1), w.get(1, 0));
        let m = pd.cell_masses(&d, &spec(), Exec::Sequential).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-14 && (m[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn atom_outside_its_cell() {
        let a = Atoms::line(&[0.9, 1.0], &[0.5, 0.5]).unwrap();
        let d = Density::uniform(-1.0, 1.0).unwrap();
        let pd = build_diagram(&a, &[0.0, 0.18], &d).unwrap();
        let Cell::Interval(c0) = pd.cell(0) else {
            panic!()
        };
        assert!(!c0.contains(0.9));
    }

    #[test]
    fn three_cells_in_a_square() {
        let a = Atoms::plane(&[[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]], &[0.3, 0.3, 0.4]).unwrap();
        let d = Density::uniform2d(Polygon::unit_square());
        let pd = build_diagram(&a, &[0.01, -0.02, 0.03], &d).unwrap();
        let m = pd.cell_masses(&d, &spec(), Exec::Parallel).unwrap();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w = pd.facet_weights(&d, &spec(), Exec::Parallel).unwrap();
        assert!(adjacency_connected(&w, 0.0).connected);
        assert!(!adjacency_connected(&w, f64::INFINITY).connected);
    }

    #[test]
    fn single_atom_is_connected() {
        let w = FacetWeights::from_pairs(1, []);
        assert!(adjacency_connected(&w, 0.0).connected);
    }

    #[test]
    fn invalid_atoms() {
        assert!(Atoms::line(&[0.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(Atoms::line(&[0.0, 1.0], &[0.3, 0.3]).is_err());
        assert!(Atoms::line(&[0.0, 1.0], &[1.0, 0.0]).is_err());
        assert!(Atoms::line(&[0.0], &[1.0, 0.0]).is_err());
        assert!(Atoms::line(&[], &[]).is_err());
    }
}
