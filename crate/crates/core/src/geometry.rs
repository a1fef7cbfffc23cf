//! Plane geometry shared by the densities and the power diagram.
//!
//! One-dimensional problems embed the real line as the `x` axis, so a single
//! point type serves both dimensions.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inside-test tolerance for half-plane clipping.
pub const CLIP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// A point on the real line.
    #[inline]
    pub const fn on_line(x: f64) -> Self {
        Self { x, y: 0.0 }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist2(self, o: Vec2) -> f64 {
        (self - o).norm2()
    }

    #[inline]
    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "interval needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Half-plane `{p : normal·p <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub offset: f64,
}

impl HalfPlane {
    #[inline]
    pub fn signed(&self, p: Vec2) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<[f64; 2]>> for Polygon {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Polygon::convex(v.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
    }
}

impl From<Polygon> for Vec<[f64; 2]> {
    fn from(p: Polygon) -> Self {
        p.vertices.iter().map(|v| [v.x, v.y]).collect()
    }
}

impl Polygon {
    /// Validates convexity and non-degeneracy; clockwise input is reversed.
    pub fn convex(mut vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        if vertices
            .iter()
            .any(|v| !(v.x.is_finite() && v.y.is_finite()))
        {
            return Err(Error::InvalidInput(
                "polygon vertices must be finite".into(),
            ));
        }
        let area = signed_area(&vertices);
        if area.abs() <= 1e-14 {
            return Err(Error::InvalidInput("polygon is degenerate".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            if (b - a).cross(c - b) < -1e-12 {
                return Err(Error::InvalidInput("polygon is not convex".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::convex(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is valid")
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut a = 0.0;
        let mut c = Vec2::ZERO;
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            let w = p.cross(q);
            a += w;
            c = c + (p + q) * w;
        }
        if a.abs() < 1e-300 {
            let s = self.vertices.iter().fold(Vec2::ZERO, |s, &v| s + v);
            return s * (1.0 / n as f64);
        }
        c * (1.0 / (3.0 * a))
    }

    /// Edges as half-planes whose intersection is the polygon.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        let n = self.vertices.len();
        (0..n)
            .map(|k| {
                let p = self.vertices[k];
                let q = self.vertices[(k + 1) % n];
                let e = q - p;
                let normal = Vec2::new(e.y, -e.x);
                HalfPlane {
                    normal,
                    offset: normal.dot(p),
                }
            })
            .collect()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.half_planes()
            .iter()
            .all(|h| h.signed(p) <= CLIP_EPS * h.normal.norm().max(1.0))
    }

    /// Sutherland–Hodgman clip against one half-plane. `None` when nothing
    /// of positive area is left.
    pub fn clip(&self, h: &HalfPlane) -> Option<Polygon> {
        let scale = h.normal.norm().max(f64::MIN_POSITIVE);
        let n = self.vertices.len();
        let mut out: Vec<Vec2> = Vec::with_capacity(n + 1);
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            let sp = h.signed(p) / scale;
            let sq = h.signed(q) / scale;
            let p_in = sp <= CLIP_EPS;
            let q_in = sq <= CLIP_EPS;
            if p_in {
                out.push(p);
            }
            if p_in != q_in && (sp - sq).abs() > 0.0 {
                let t = sp / (sp - sq);
                if t > 0.0 && t < 1.0 {
                    out.push(p.lerp(q, t));
                }
            }
        }
        dedup_ring(&mut out);
        if out.len() < 3 || signed_area(&out) <= 1e-24 {
            return None;
        }
        Some(Polygon { vertices: out })
    }

    /// Parameter range `[t0, t1]` of the line `origin + t·dir` inside the polygon.
    pub fn clip_line(&self, origin: Vec2, dir: Vec2) -> Option<(f64, f64)> {
        clip_line_by(
            &self.half_planes(),
            origin,
            dir,
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
    }
}

/// Clip the parametric segment `origin + t·dir`, `t ∈ [t0, t1]`, by half-planes.
pub fn clip_line_by(
    planes: &[HalfPlane],
    origin: Vec2,
    dir: Vec2,
    mut t0: f64,
    mut t1: f64,
) -> Option<(f64, f64)> {
    for h in planes {
        let scale = h.normal.norm().max(f64::MIN_POSITIVE);
        let a = h.normal.dot(dir) / scale;
        let b = h.signed(origin) / scale;
        // constraint: a·t + b <= 0
        if a.abs() < 1e-15 {
            if b > CLIP_EPS {
                return None;
            }
            continue;
        }
        let t = -b / a;
        if a > 0.0 {
            t1 = t1.min(t);
        } else {
            t0 = t0.max(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    if t0.is_finite() && t1.is_finite() {
        Some((t0, t1))
    } else {
        None
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    let mut a = 0.0;
    for k in 0..n {
        a += v[k].cross(v[(k + 1) % n]);
    }
    0.5 * a
}

fn dedup_ring(v: &mut Vec<Vec2>) {
    v.dedup_by(|a, b| a.dist2(*b) <= 1e-28);
    while v.len() > 1 && v[0].dist2(v[v.len() - 1]) <= 1e-28 {
        v.pop();
    }
}
