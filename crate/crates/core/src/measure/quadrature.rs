//! Deterministic adaptive Gauss–Legendre quadrature on intervals, segments
//! and convex polygons.
//!
//! All integrators are globally adaptive: every region carries a coarse rule
//! and the sum of the rule on its children, the discrepancy being the error
//! estimate. The region with the largest tolerance-normalized error is split
//! until the summed error meets `max(abs_tol, rel_tol·|I|)` componentwise,
//! or until refinement stalls on rounding noise, which is reported as
//! [`QuadError::NoConvergence`] carrying the estimate. Integrands are vector valued so that several moments share one set of
//! nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{HalfPlane, Polygon, Vec2};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error(
        "quadrature did not converge: estimate {estimate:.17e}, error bound {error_bound:.3e}"
    )]
    NoConvergence { estimate: f64, error_bound: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of any initial region.
    pub max_depth: usize,
    /// Gauss–Legendre nodes per panel (per axis on triangles).
    pub base_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_depth: 60,
            base_order: 15,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::InvalidSpec("tolerances must be positive".into()));
        }
        if self.base_order < 5 {
            return Err(QuadError::InvalidSpec(
                "base_order must be at least 5".into(),
            ));
        }
        if self.max_depth == 0 {
            return Err(QuadError::InvalidSpec("max_depth must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Request for fine panels around `at`: within `12·scale` of it, no panel is
/// wider than `scale/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub at: f64,
    pub scale: f64,
}

impl Refinement {
    pub fn new(at: f64, scale: f64) -> Self {
        Self { at, scale }
    }
}

/// Band of thin strips around the line `normal·x = offset` for polygon
/// integrands that vary quickly across it. `normal` need not be unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRefinement {
    pub normal: Vec2,
    pub offset: f64,
    /// Width scale measured in units of `normal·x`.
    pub scale: f64,
}

const REFINE_REACH: f64 = 12.0;
const REFINE_PANELS_PER_SCALE: f64 = 4.0;
const STRIPS_PER_SCALE: f64 = 2.0;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule for `n` nodes.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<Vec<(usize, &'static GaussLegendre)>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().expect("rule cache poisoned");
        if let Some((_, r)) = guard.iter().find(|(k, _)| *k == n) {
            return r;
        }
        let rule: &'static GaussLegendre = Box::leak(Box::new(GaussLegendre::compute(n)));
        guard.push((n, rule));
        rule
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A region the global adaptive driver can evaluate and bisect.
trait Region: Sized {
    fn children(&self) -> Vec<Self>;
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
}

impl Region for Panel {
    fn children(&self) -> Vec<Self> {
        let m = 0.5 * (self.a + self.b);
        vec![Panel { a: self.a, b: m }, Panel { a: m, b: self.b }]
    }
}

#[derive(Clone, Copy)]
struct Triangle {
    a: Vec2,
    b: Vec2,
    c: Vec2,
}

impl Region for Triangle {
    fn children(&self) -> Vec<Self> {
        let ab = self.a.lerp(self.b, 0.5);
        let bc = self.b.lerp(self.c, 0.5);
        let ca = self.c.lerp(self.a, 0.5);
        vec![
            Triangle {
                a: self.a,
                b: ab,
                c: ca,
            },
            Triangle {
                a: ab,
                b: self.b,
                c: bc,
            },
            Triangle {
                a: ca,
                b: bc,
                c: self.c,
            },
            Triangle {
                a: bc,
                b: ca,
                c: ab,
            },
        ]
    }
}

struct Node {
    fine: Vec<f64>,
    err: Vec<f64>,
    depth: usize,
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

const ROUNDOFF: f64 = 64.0 * f64::EPSILON;
/// Refinement stops once this many consecutive batches of splits have failed
/// to halve the worst normalized error: the integrand is then resolved down
/// to its own rounding noise.
const STALL_BATCHES: usize = 8;
const REFRESH_SPLITS: usize = 256;

fn adapt<R: Region>(
    initial: Vec<R>,
    dim: usize,
    spec: &QuadratureSpec,
    rule: &mut dyn FnMut(&R, &mut [f64]),
) -> Result<Vec<f64>, QuadError> {
    spec.validate()?;
    let mut nodes: Vec<Node> = Vec::with_capacity(initial.len() * 2);
    let mut buf = vec![0.0; dim];
    let evaluate = |region: R,
                    coarse: Vec<f64>,
                    depth: usize,
                    rule: &mut dyn FnMut(&R, &mut [f64]),
                    buf: &mut [f64]| {
        let kids = region.children();
        let mut fine = vec![0.0; dim];
        let mut kid_vals = Vec::with_capacity(kids.len());
        for k in &kids {
            rule(k, buf);
            for (s, v) in fine.iter_mut().zip(buf.iter()) {
                *s += *v;
            }
            kid_vals.push(buf.to_vec());
        }
        let err = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| {
                let d = (c - f).abs();
                if d <= ROUNDOFF * f.abs() {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        (Node { fine, err, depth }, kids, kid_vals)
    };

    // children values are stored alongside to seed the next level's coarse rule
    let mut pending_kids: Vec<Option<(Vec<R>, Vec<Vec<f64>>)>> = Vec::new();
    for r in initial {
        rule(&r, &mut buf);
        let coarse = buf.clone();
        let (node, kids, vals) = evaluate(r, coarse, 0, rule, &mut buf);
        nodes.push(node);
        pending_kids.push(Some((kids, vals)));
    }

    let mut alive: Vec<bool> = vec![true; nodes.len()];
    let total = |nodes: &[Node], alive: &[bool]| -> (Vec<f64>, Vec<f64>) {
        let mut val = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for (n, &a) in nodes.iter().zip(alive) {
            if a {
                for k in 0..dim {
                    val[k] += n.fine[k];
                    err[k] += n.err[k];
                }
            }
        }
        (val, err)
    };
    let tol_of = |val: &[f64]| -> Vec<f64> {
        val.iter()
            .map(|v| spec.abs_tol.max(spec.rel_tol * v.abs()))
            .collect()
    };
    let score = |n: &Node, tol: &[f64]| -> f64 {
        n.err
            .iter()
            .zip(tol)
            .map(|(e, t)| e / t)
            .fold(0.0, f64::max)
    };

    let (mut val, mut err) = total(&nodes, &alive);
    let mut tol = tol_of(&val);
    let mut heap: BinaryHeap<Key> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| Key(score(n, &tol), i))
        .collect();
    let mut since_refresh = 0usize;
    let (mut best, mut stalled) = (f64::INFINITY, 0usize);

    loop {
        if err.iter().zip(&tol).all(|(e, t)| e <= t) {
            break;
        }
        let Some(Key(s, idx)) = heap.pop() else {
            break;
        };
        if s == 0.0 {
            break;
        }
        if nodes[idx].depth >= spec.max_depth {
            // frozen; keep looking at the rest
            continue;
        }
        alive[idx] = false;
        let (kids, vals) = pending_kids[idx].take().expect("split once");
        let depth = nodes[idx].depth + 1;
        for k in 0..dim {
            val[k] -= nodes[idx].fine[k];
            err[k] -= nodes[idx].err[k];
        }
        for (kid, coarse) in kids.into_iter().zip(vals) {
            let (node, gk, gv) = evaluate(kid, coarse, depth, rule, &mut buf);
            for k in 0..dim {
                val[k] += node.fine[k];
                err[k] += node.err[k];
            }
            let i = nodes.len();
            heap.push(Key(score(&node, &tol), i));
            nodes.push(node);
            alive.push(true);
            pending_kids.push(Some((gk, gv)));
        }
        since_refresh += 1;
        if since_refresh >= REFRESH_SPLITS {
            since_refresh = 0;
            let t = total(&nodes, &alive);
            val = t.0;
            err = t.1;
            tol = tol_of(&val);
            let ratio = err.iter().zip(&tol).map(|(e, t)| e / t).fold(0.0, f64::max);
            if ratio <= 0.5 * best {
                best = ratio;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= STALL_BATCHES {
                    break;
                }
            }
        }
    }

    let (val, err) = total(&nodes, &alive);
    let tol = tol_of(&val);
    if let Some(k) = (0..dim).find(|&k| err[k] > tol[k]) {
        return Err(QuadError::NoConvergence {
            estimate: val[k],
            error_bound: err[k],
        });
    }
    Ok(val)
}

fn panel_rule<'a, F>(
    f: &'a F,
    gl: &'a GaussLegendre,
    dim: usize,
) -> impl FnMut(&Panel, &mut [f64]) + 'a
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    let mut tmp = vec![0.0; dim];
    move |p: &Panel, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        let h = 0.5 * (p.b - p.a);
        let c = 0.5 * (p.a + p.b);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            f(c + h * x, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += w * t;
            }
        }
        out.iter_mut().for_each(|v| *v *= h);
    }
}

/// Initial panel boundaries for `[a, b]` honoring the refinement contract.
pub fn refined_breakpoints(a: f64, b: f64, refine: &[Refinement]) -> Vec<f64> {
    let mut pts = vec![a, b];
    for r in refine {
        if !(r.at.is_finite() && r.scale.is_finite() && r.scale > 0.0) {
            continue;
        }
        if r.at > a && r.at < b {
            pts.push(r.at);
        }
        let step = r.scale / REFINE_PANELS_PER_SCALE;
        let reach = REFINE_REACH * r.scale;
        if step <= 0.0 || reach <= 0.0 {
            continue;
        }
        let lo = (r.at - reach).max(a);
        let hi = (r.at + reach).min(b);
        if lo >= hi {
            continue;
        }
        let k0 = ((lo - r.at) / step).ceil() as i64;
        let k1 = ((hi - r.at) / step).floor() as i64;
        for k in k0..=k1 {
            let x = r.at + k as f64 * step;
            if x > a && x < b {
                pts.push(x);
            }
        }
        if lo > a {
            pts.push(lo);
        }
        if hi < b {
            pts.push(hi);
        }
        // geometric grading away from the feature so no single panel spans
        // both the tail of the transition and the far field
        let mut off = 2.0 * reach;
        while r.at - off > a || r.at + off < b {
            for x in [r.at - off, r.at + off] {
                if x > a && x < b {
                    pts.push(x);
                }
            }
            off *= 2.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    let min_gap = 1e-15 * (b - a).abs().max(f64::MIN_POSITIVE);
    pts.dedup_by(|x, y| (*x - *y).abs() <= min_gap);
    if let Some(last) = pts.last_mut() {
        *last = b;
    }
    pts[0] = a;
    pts
}

/// `∫_a^b f` for a vector-valued integrand with `dim` components.
pub fn integrate_1d_vec<F>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    refine: &[Refinement],
) -> Result<Vec<f64>, QuadError>
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    if a > b {
        let v = integrate_1d_vec(f, dim, b, a, spec, refine)?;
        return Ok(v.into_iter().map(|x| -x).collect());
    }
    let gl = GaussLegendre::cached(spec.base_order);
    let pts = refined_breakpoints(a, b, refine);
    let panels: Vec<Panel> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Panel { a: w[0], b: w[1] })
        .collect();
    let mut rule = panel_rule(f, gl, dim);
    adapt(panels, dim, spec, &mut rule)
}

/// `∫_a^b f` with adaptive Gauss–Legendre panels.
pub fn integrate_1d<F>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    refine: &[Refinement],
) -> Result<f64, QuadError>
where
    F: Fn(f64) -> f64,
{
    let g = |x: f64, out: &mut [f64]| out[0] = f(x);
    Ok(integrate_1d_vec(&g, 1, a, b, spec, refine)?[0])
}

/// `∫ f dH¹` along the segment `p → q` (arclength parameterization).
pub fn integrate_segment<F>(f: F, p: Vec2, q: Vec2, spec: &QuadratureSpec) -> Result<f64, QuadError>
where
    F: Fn(Vec2) -> f64,
{
    let len = (q - p).norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let dir = (q - p) * (1.0 / len);
    integrate_1d(|s| f(p + dir * s), 0.0, len, spec, &[])
}

fn triangle_rule<'a, F>(
    f: &'a F,
    gl: &'a GaussLegendre,
    dim: usize,
) -> impl FnMut(&Triangle, &mut [f64]) + 'a
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let mut tmp = vec![0.0; dim];
    move |t: &Triangle, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        let ab = t.b - t.a;
        let bc = t.c - t.b;
        let area2 = ab.cross(t.c - t.a).abs();
        for (si, wi) in gl.nodes.iter().zip(&gl.weights) {
            let s = 0.5 * (si + 1.0);
            for (ti, wj) in gl.nodes.iter().zip(&gl.weights) {
                let u = 0.5 * (ti + 1.0);
                let p = t.a + ab * s + bc * (s * u);
                f(p, &mut tmp);
                let w = 0.25 * wi * wj * s * area2;
                for (o, v) in out.iter_mut().zip(&tmp) {
                    *o += w * v;
                }
            }
        }
    }
}

fn fan(poly: &Polygon) -> impl Iterator<Item = Triangle> + '_ {
    let c = poly.centroid();
    let v = poly.vertices();
    let n = v.len();
    (0..n).map(move |k| Triangle {
        a: c,
        b: v[k],
        c: v[(k + 1) % n],
    })
}

/// Split a convex polygon into pieces along bands of lines parallel to each
/// refinement line.
pub fn split_along_lines(poly: &Polygon, lines: &[LineRefinement]) -> Vec<Polygon> {
    let mut pieces = vec![poly.clone()];
    for l in lines {
        if !(l.scale.is_finite() && l.scale > 0.0) || l.normal.norm2() == 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in poly.vertices() {
            let s = l.normal.dot(*v);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let step = l.scale / STRIPS_PER_SCALE;
        let reach = REFINE_REACH * l.scale;
        let mut cuts: Vec<f64> = Vec::new();
        let k0 = (((lo - l.offset).max(-reach)) / step).ceil() as i64;
        let k1 = (((hi - l.offset).min(reach)) / step).floor() as i64;
        for k in k0..=k1 {
            let c = l.offset + k as f64 * step;
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        let mut off = 2.0 * reach;
        while l.offset - off > lo || l.offset + off < hi {
            for c in [l.offset - off, l.offset + off] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
            off *= 2.0;
        }
        for c in cuts {
            let below = HalfPlane {
                normal: l.normal,
                offset: c,
            };
            let above = HalfPlane {
                normal: -l.normal,
                offset: -c,
            };
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for p in pieces {
                let a = p.clip(&below);
                let b = p.clip(&above);
                match (a, b) {
                    (Some(a), Some(b)) => {
                        next.push(a);
                        next.push(b);
                    }
                    (Some(a), None) => next.push(a),
                    (None, Some(b)) => next.push(b),
                    (None, None) => next.push(p),
                }
            }
            pieces = next;
        }
    }
    pieces
}

/// `∫_poly f` for a vector-valued integrand, triangulating from the centroid.
pub fn integrate_polygon_vec<F>(
    f: &F,
    dim: usize,
    poly: &Polygon,
    spec: &QuadratureSpec,
    lines: &[LineRefinement],
) -> Result<Vec<f64>, QuadError>
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let gl = GaussLegendre::cached(spec.base_order);
    let pieces = split_along_lines(poly, lines);
    let tris: Vec<Triangle> = pieces.iter().flat_map(fan).collect();
    let mut rule = triangle_rule(f, gl, dim);
    adapt(tris, dim, spec, &mut rule)
}

/// `∫_poly f` over a convex polygon.
pub fn integrate_polygon<F>(f: F, poly: &Polygon, spec: &QuadratureSpec) -> Result<f64, QuadError>
where
    F: Fn(Vec2) -> f64,
{
    let g = |p: Vec2, out: &mut [f64]| out[0] = f(p);
    Ok(integrate_polygon_vec(&g, 1, poly, spec, &[])?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::zeta2;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [5usize, 8, 15, 20] {
            let gl = GaussLegendre::compute(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14);
            // x^(2n-2) has integral 2/(2n-1)
            let d = 2 * n - 2;
            let s: f64 = gl
                .nodes
                .iter()
                .zip(&gl.weights)
                .map(|(x, w)| w * x.powi(d as i32))
                .sum();
            assert!((s - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn log_integrals_give_half_zeta2() {
        let a = integrate_1d(|t| (-t).exp().ln_1p(), 0.0, 60.0, &spec(), &[]).unwrap();
        assert!((a - PI * PI / 12.0).abs() < 1e-8);
        let b = integrate_1d(
            |t| t * (-t).exp() / (1.0 + (-t).exp()),
            0.0,
            60.0,
            &spec(),
            &[],
        )
        .unwrap();
        assert!((b - PI * PI / 12.0).abs() < 1e-8);
    }

    #[test]
    fn rounding_noise_stops_refinement() {
        // zero up to rounding, so no relative tolerance is attainable
        let f = |x: f64| (0.1 + x) * 3.0 - 0.3 - 3.0 * x;
        let tight = QuadratureSpec {
            abs_tol: 1e-300,
            ..spec()
        };
        match integrate_1d(f, 0.0, 1.0, &tight, &[]) {
            Err(QuadError::NoConvergence {
                estimate,
                error_bound,
            }) => {
                assert!(
                    estimate.abs() < 1e-14 && error_bound < 1e-14,
                    "{estimate} {error_bound}"
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_density_and_reversed_interval() {
        let v = integrate_1d(|_| 0.5, -1.0, 1.0, &spec(), &[]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let r = integrate_1d(|_| 0.5, 1.0, -1.0, &spec(), &[]).unwrap();
        assert!((r + 1.0).abs() < 1e-15);
        assert_eq!(integrate_1d(|_| 1.0, 2.0, 2.0, &spec(), &[]).unwrap(), 0.0);
    }

    #[test]
    fn refinement_contract_panel_widths() {
        let r = Refinement::new(0.3, 1e-3);
        let pts = refined_breakpoints(0.0, 1.0, &[r]);
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if (mid - 0.3).abs() < 12.0 * 1e-3 {
                assert!(w[1] - w[0] <= 1e-3 / 4.0 + 1e-15);
            }
        }
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 1.0);
    }

    #[test]
    fn sharp_log_integrand_scales_with_eta() {
        for eta in [16.0, 256.0, 4096.0] {
            let f = |t: f64| (-eta * t).exp().ln_1p();
            let v =
                integrate_1d(f, 0.0, 10.0, &spec(), &[Refinement::new(0.0, 1.0 / eta)]).unwrap();
            assert!((eta * v - zeta2() / 2.0).abs() < 1e-6, "eta={eta}");
        }
    }

    #[test]
    fn depth_limit_reports_best_estimate() {
        let tight = QuadratureSpec {
            max_depth: 1,
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            base_order: 5,
        };
        let err = integrate_1d(|x| x.abs().sqrt(), -1.0, 1.0, &tight, &[]).unwrap_err();
        match err {
            QuadError::NoConvergence {
                estimate,
                error_bound,
            } => {
                assert!((estimate - 4.0 / 3.0).abs() < 1e-2);
                assert!(error_bound > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let bad = QuadratureSpec {
            base_order: 3,
            ..QuadratureSpec::default()
        };
        assert!(matches!(
            integrate_1d(|x| x, 0.0, 1.0, &bad, &[]),
            Err(QuadError::InvalidSpec(_))
        ));
    }

    #[test]
    fn polygon_areas_and_moments() {
        let sq = Polygon::unit_square();
        assert!((integrate_polygon(|_| 1.0, &sq, &spec()).unwrap() - 1.0).abs() < 1e-14);
        let tri = Polygon::convex(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!((integrate_polygon(|_| 1.0, &tri, &spec()).unwrap() - 0.5).abs() < 1e-14);
        assert!((integrate_polygon(|p| p.x, &sq, &spec()).unwrap() - 0.5).abs() < 1e-14);
        // ∫∫ x² y over the triangle = 1/60
        let m = integrate_polygon(|p| p.x * p.x * p.y, &tri, &spec()).unwrap();
        assert!((m - 1.0 / 60.0).abs() < 1e-14);
    }

    #[test]
    fn strip_splitting_preserves_area() {
        let sq = Polygon::unit_square();
        let line = LineRefinement {
            normal: Vec2::new(1.0, 0.0),
            offset: 0.5,
            scale: 0.01,
        };
        let pieces = split_along_lines(&sq, &[line]);
        assert!(pieces.len() > 20);
        let area: f64 = pieces.iter().map(Polygon::area).sum();
        assert!((area - 1.0).abs() < 1e-14);
        let v = integrate_polygon_vec(
            &|p: Vec2, o: &mut [f64]| o[0] = (-64.0 * (p.x - 0.5).abs()).exp(),
            1,
            &sq,
            &spec(),
            &[line],
        )
        .unwrap()[0];
        let want = 2.0 * (1.0 - (-32.0f64).exp()) / 64.0;
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn segments() {
        let p = Vec2::new(0.5, 0.0);
        let q = Vec2::new(0.5, 1.0);
        assert!((integrate_segment(|_| 1.0, p, q, &spec()).unwrap() - 1.0).abs() < 1e-15);
        assert!((integrate_segment(|x| x.y, p, q, &spec()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(integrate_segment(|_| 1.0, p, p, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_bitwise() {
        let f = |x: f64| (3.0 * x).sin() * (-x * x).exp();
        let a = integrate_1d(f, -2.0, 5.0, &spec(), &[Refinement::new(0.1, 0.01)]).unwrap();
        let b = integrate_1d(f, -2.0, 5.0, &spec(), &[Refinement::new(0.1, 0.01)]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
