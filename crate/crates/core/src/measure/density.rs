use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use serde::{Deserialize, Serialize};

use super::quadrature::{
    integrate_1d_vec, integrate_polygon_vec, LineRefinement, QuadratureSpec, Refinement,
};
use crate::error::{Error, Result};
use crate::geometry::{Interval, Polygon, Vec2};

/// Gaussian truncation half-width in standard deviations.
pub const GAUSSIAN_TRUNCATION: f64 = 8.0;
/// Laplace truncation half-width in scale units.
pub const LAPLACE_TRUNCATION: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Gaussian {
        mean: f64,
        sigma: f64,
    },
    Laplace {
        mean: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `c_p |x|^{-p}` on `[-half_width, half_width]`.
    PowerLaw {
        exponent: f64,
        #[serde(default = "one")]
        half_width: f64,
    },
    Uniform2d {
        polygon: Polygon,
    },
    Gaussian2d {
        mean: [f64; 2],
        covariance: [[f64; 2]; 2],
        polygon: Polygon,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineFamily {
    Gaussian { mean: f64, sigma: f64 },
    Laplace { mean: f64, scale: f64 },
    Uniform,
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneFamily {
    Uniform,
    Gaussian {
        mean: Vec2,
        /// Inverse covariance, row major.
        precision: [[f64; 2]; 2],
    },
}

/// Source probability density, normalized on its (possibly truncated) support.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Line {
        family: LineFamily,
        support: Interval,
        /// Multiplier making the truncated density integrate to one.
        norm: f64,
    },
    Plane {
        family: PlaneFamily,
        support: Polygon,
        norm: f64,
    },
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

/// Standard normal CDF.
fn phi_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

impl Density {
    pub fn from_spec(spec: &DensitySpec, quad: &QuadratureSpec) -> Result<Self> {
        match *spec {
            DensitySpec::Gaussian { mean, sigma } => Self::gaussian(mean, sigma),
            DensitySpec::Laplace { mean, scale } => Self::laplace(mean, scale),
            DensitySpec::Uniform { lo, hi } => Self::uniform(lo, hi),
            DensitySpec::PowerLaw {
                exponent,
                half_width,
            } => Self::power_law(exponent, half_width),
            DensitySpec::Uniform2d { ref polygon } => Ok(Self::uniform2d(polygon.clone())),
            DensitySpec::Gaussian2d {
                mean,
                covariance,
                ref polygon,
            } => Self::gaussian2d(
                Vec2::new(mean[0], mean[1]),
                covariance,
                polygon.clone(),
                quad,
            ),
        }
    }

    /// Normal density truncated to `mean ± 8σ` and renormalized.
    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let w = GAUSSIAN_TRUNCATION * sigma;
        let kept = 1.0 - 2.0 * phi_cdf(-GAUSSIAN_TRUNCATION);
        Ok(Density::Line {
            family: LineFamily::Gaussian { mean, sigma },
            support: Interval::new(mean - w, mean + w)?,
            norm: 1.0 / kept,
        })
    }

    /// Laplace density truncated to `mean ± 30·scale` and renormalized.
    pub fn laplace(mean: f64, scale: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let w = LAPLACE_TRUNCATION * scale;
        let kept = -(-LAPLACE_TRUNCATION).exp_m1();
        Ok(Density::Line {
            family: LineFamily::Laplace { mean, scale },
            support: Interval::new(mean - w, mean + w)?,
            norm: 1.0 / kept,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let support = Interval::new(lo, hi)?;
        Ok(Density::Line {
            family: LineFamily::Uniform,
            support,
            norm: 1.0 / support.len(),
        })
    }

    /// `μ(x) = c_p |x|^{-p}` on `[-r, r]`, `c_p = (1-p) / (2 r^{1-p})`.
    pub fn power_law(exponent: f64, half_width: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&exponent) {
            return Err(Error::InvalidInput(format!(
                "power-law exponent must lie in [0, 1), got {exponent}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(
                "power-law half_width must be positive".into(),
            ));
        }
        let q = 1.0 - exponent;
        Ok(Density::Line {
            family: LineFamily::PowerLaw { exponent },
            support: Interval::new(-half_width, half_width)?,
            norm: q / (2.0 * half_width.powf(q)),
        })
    }

    pub fn uniform2d(support: Polygon) -> Self {
        let norm = 1.0 / support.area();
        Density::Plane {
            family: PlaneFamily::Uniform,
            support,
            norm,
        }
    }

    /// Bivariate normal restricted to a convex polygon, renormalized by quadrature.
    pub fn gaussian2d(
        mean: Vec2,
        covariance: [[f64; 2]; 2],
        support: Polygon,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let [[a, b], [c, d]] = covariance;
        if (b - c).abs() > 1e-12 * (b.abs() + c.abs()).max(1.0) {
            return Err(Error::InvalidInput("covariance must be symmetric".into()));
        }
        let det = a * d - b * c;
        if !(a > 0.0 && det > 0.0) {
            return Err(Error::InvalidInput(
                "covariance must be positive definite".into(),
            ));
        }
        let precision = [[d / det, -b / det], [-c / det, a / det]];
        let family = PlaneFamily::Gaussian { mean, precision };
        let raw = Density::Plane {
            family,
            support: support.clone(),
            norm: 1.0 / (2.0 * PI * det.sqrt()),
        };
        let mass =
            raw.integrate_polygon_vec(&|_, o: &mut [f64]| o[0] = 1.0, 1, &support, quad, &[])?[0];
        if !(mass > 1e-300) {
            return Err(Error::InvalidInput(
                "gaussian2d has no mass on its polygon".into(),
            ));
        }
        Ok(Density::Plane {
            family,
            support,
            norm: 1.0 / (2.0 * PI * det.sqrt() * mass),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::Line { .. } => 1,
            Density::Plane { .. } => 2,
        }
    }

    pub fn support_interval(&self) -> Option<Interval> {
        match self {
            Density::Line { support, .. } => Some(*support),
            Density::Plane { .. } => None,
        }
    }

    pub fn support_polygon(&self) -> Option<&Polygon> {
        match self {
            Density::Line { .. } => None,
            Density::Plane { support, .. } => Some(support),
        }
    }

    /// Density formula without the support indicator.
    fn line_formula(family: &LineFamily, norm: f64, x: f64) -> f64 {
        match *family {
            LineFamily::Gaussian { mean, sigma } => {
                let z = (x - mean) / sigma;
                norm * (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            LineFamily::Laplace { mean, scale } => {
                norm * (-(x - mean).abs() / scale).exp() / (2.0 * scale)
            }
            LineFamily::Uniform => norm,
            LineFamily::PowerLaw { exponent } => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    norm * x.abs().powf(-exponent)
                }
            }
        }
    }

    fn plane_formula(family: &PlaneFamily, norm: f64, p: Vec2) -> f64 {
        match *family {
            PlaneFamily::Uniform => norm,
            PlaneFamily::Gaussian { mean, precision } => {
                let u = p - mean;
                let q = precision[0][0] * u.x * u.x
                    + (precision[0][1] + precision[1][0]) * u.x * u.y
                    + precision[1][1] * u.y * u.y;
                norm * (-0.5 * q).exp()
            }
        }
    }

    /// Pointwise density; zero outside the support. Line densities read `p.x`.
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            Density::Line {
                family,
                support,
                norm,
            } => {
                if support.contains(p.x) {
                    Self::line_formula(family, *norm, p.x)
                } else {
                    0.0
                }
            }
            Density::Plane {
                family,
                support,
                norm,
            } => {
                if support.contains(p) {
                    Self::plane_formula(family, *norm, p)
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn eval_line(&self, x: f64) -> f64 {
        self.eval(Vec2::on_line(x))
    }

    /// Limit of the density approaching `p` from inside the support.
    pub fn inner_limit(&self, p: Vec2) -> f64 {
        match self {
            Density::Line {
                family,
                support,
                norm,
            } => {
                if support.contains(p.x) {
                    Self::line_formula(family, *norm, p.x)
                } else {
                    0.0
                }
            }
            Density::Plane { family, norm, .. } => Self::plane_formula(family, *norm, p),
        }
    }

    /// Points where a line density is not smooth.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match self {
            Density::Line {
                family: LineFamily::Laplace { mean, .. },
                ..
            } => vec![*mean],
            Density::Line {
                family: LineFamily::PowerLaw { .. },
                ..
            } => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// `∫_a^b f(x) μ(x) dx` over `[a, b] ∩ support` for a vector integrand.
    ///
    /// Kinks of the density split the interval; the power-law singularity is
    /// removed by the substitution `|x| = v^{1/(1-p)}`.
    pub fn integrate_interval_vec<F>(
        &self,
        f: &F,
        dim: usize,
        a: f64,
        b: f64,
        spec: &QuadratureSpec,
        refine: &[Refinement],
    ) -> Result<Vec<f64>>
    where
        F: Fn(f64, &mut [f64]) + ?Sized,
    {
        let Density::Line {
            family,
            support,
            norm,
        } = self
        else {
            return Err(Error::InvalidInput(
                "interval integral of a planar density".into(),
            ));
        };
        let lo = a.max(support.lo);
        let hi = b.min(support.hi);
        let mut total = vec![0.0; dim];
        if !(lo < hi) {
            return Ok(total);
        }
        let mut cuts = vec![lo];
        cuts.extend(self.kinks().into_iter().filter(|&k| k > lo && k < hi));
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (pa, pb) = (w[0], w[1]);
            let part = match *family {
                LineFamily::PowerLaw { exponent } => {
                    power_law_piece(f, dim, exponent, *norm, pa, pb, spec, refine)?
                }
                _ => {
                    let g = |x: f64, out: &mut [f64]| {
                        f(x, out);
                        let m = Self::line_formula(family, *norm, x);
                        out.iter_mut().for_each(|v| *v *= m);
                    };
                    let r: Vec<Refinement> = refine
                        .iter()
                        .copied()
                        .filter(|r| r.at + 12.0 * r.scale > pa && r.at - 12.0 * r.scale < pb)
                        .collect();
                    integrate_1d_vec(&g, dim, pa, pb, spec, &r)?
                }
            };
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        Ok(total)
    }

    /// `∫_a^b f dμ` for a scalar integrand.
    pub fn integrate_interval<F>(
        &self,
        f: F,
        a: f64,
        b: f64,
        spec: &QuadratureSpec,
        refine: &[Refinement],
    ) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let g = |x: f64, out: &mut [f64]| out[0] = f(x);
        Ok(self.integrate_interval_vec(&g, 1, a, b, spec, refine)?[0])
    }

    /// `∫_poly f(x) μ(x) dx` for a polygon inside the support.
    pub fn integrate_polygon_vec<F>(
        &self,
        f: &F,
        dim: usize,
        poly: &Polygon,
        spec: &QuadratureSpec,
        lines: &[LineRefinement],
    ) -> Result<Vec<f64>>
    where
        F: Fn(Vec2, &mut [f64]) + ?Sized,
    {
        let Density::Plane { family, norm, .. } = self else {
            return Err(Error::InvalidInput(
                "polygon integral of a line density".into(),
            ));
        };
        let g = |p: Vec2, out: &mut [f64]| {
            f(p, out);
            let m = Self::plane_formula(family, *norm, p);
            out.iter_mut().for_each(|v| *v *= m);
        };
        Ok(integrate_polygon_vec(&g, dim, poly, spec, lines)?)
    }

    /// Total mass on the support, computed by quadrature.
    pub fn total_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            Density::Line { support, .. } => {
                self.integrate_interval(|_| 1.0, support.lo, support.hi, spec, &[])
            }
            Density::Plane { support, .. } => Ok(self.integrate_polygon_vec(
                &|_, o: &mut [f64]| o[0] = 1.0,
                1,
                support,
                spec,
                &[],
            )?[0]),
        }
    }

    /// Closed-form CDF of a line density on its truncated support.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let Density::Line {
            family,
            support,
            norm,
        } = self
        else {
            return Err(Error::InvalidInput("cdf of a planar density".into()));
        };
        if x <= support.lo {
            return Ok(0.0);
        }
        if x >= support.hi {
            return Ok(1.0);
        }
        let v = match *family {
            LineFamily::Gaussian { mean, sigma } => {
                norm * (phi_cdf((x - mean) / sigma) - phi_cdf(-GAUSSIAN_TRUNCATION))
            }
            LineFamily::Laplace { mean, scale } => {
                let tail = 0.5 * (-LAPLACE_TRUNCATION).exp();
                let raw = if x < mean {
                    0.5 * ((x - mean) / scale).exp()
                } else {
                    1.0 - 0.5 * (-(x - mean) / scale).exp()
                };
                norm * (raw - tail)
            }
            LineFamily::Uniform => (x - support.lo) * norm,
            LineFamily::PowerLaw { exponent } => {
                let r = support.hi;
                let s = 0.5 * (x.abs() / r).powf(1.0 - exponent);
                if x < 0.0 {
                    0.5 - s
                } else {
                    0.5 + s
                }
            }
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Inverse CDF: the smallest `x` with `cdf(x) >= q`, by bisection on the
    /// closed-form CDF.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let support = self
            .support_interval()
            .ok_or_else(|| Error::InvalidInput("quantile of a planar density".into()))?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidInput(format!(
                "quantile level {q} outside [0, 1]"
            )));
        }
        if q <= 0.0 {
            return Ok(support.lo);
        }
        let (mut lo, mut hi) = (support.lo, support.hi);
        for _ in 0..2100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// True when the density is even about the origin.
    pub fn is_symmetric_about_zero(&self) -> bool {
        match self {
            Density::Line {
                family, support, ..
            } => {
                let centred = (support.lo + support.hi).abs() <= 1e-14 * support.len();
                centred
                    && match *family {
                        LineFamily::Gaussian { mean, .. } | LineFamily::Laplace { mean, .. } => {
                            mean == 0.0
                        }
                        LineFamily::Uniform | LineFamily::PowerLaw { .. } => true,
                    }
            }
            Density::Plane { .. } => false,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn power_law_piece<F>(
    f: &F,
    dim: usize,
    exponent: f64,
    norm: f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    refine: &[Refinement],
) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    // pieces never straddle 0; work on |x| with v = |x|^q
    let q = 1.0 - exponent;
    let sign = if a + b >= 0.0 { 1.0 } else { -1.0 };
    let (xa, xb) = if sign > 0.0 { (a, b) } else { (-b, -a) };
    let (va, vb) = (xa.powf(q), xb.powf(q));
    let to_v = |x: f64| x.max(0.0).powf(q);
    let r: Vec<Refinement> = refine
        .iter()
        .filter_map(|r| {
            let x = sign * r.at;
            if x + 12.0 * r.scale <= xa || x - 12.0 * r.scale >= xb {
                return None;
            }
            let v = to_v(x);
            let scale = to_v(x.max(0.0) + r.scale) - to_v(x.max(0.0));
            Some(Refinement::new(v, scale))
        })
        .collect();
    let inv = 1.0 / q;
    let g = |v: f64, out: &mut [f64]| {
        f(sign * v.powf(inv), out);
        out.iter_mut().for_each(|o| *o *= norm / q);
    };
    Ok(integrate_1d_vec(&g, dim, va, vb, spec, &r)?)
}
