//! Real dilogarithm and the constant `ζ(2)`.
//!
//! `Li₂(z) = Σ_{s≥1} z^s / s²` on `|z| ≤ 1`, continued analytically to the
//! real half-line `z ≤ 1`. Evaluation is by the power series on `|z| ≤ 1/2`;
//! every other argument is mapped into that disc by one of three classical
//! functional equations:
//!
//! * inversion, `Li₂(z) = −ζ(2) − ½ log²(−z) − Li₂(1/z)` for `z < −1`;
//! * Landen, `Li₂(z) = −Li₂(z/(z−1)) − ½ log²(1−z)` for `−1 ≤ z < −½`;
//! * reflection, `Li₂(z) = ζ(2) − log z · log(1−z) − Li₂(1−z)` for `½ < z < 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::{integrate_1d, QuadratureSpec};

const SERIES_RTOL: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 200;

/// `ζ(2) = π²/6`.
#[inline]
pub fn zeta2() -> f64 {
    PI * PI / 6.0
}

/// A dilogarithm evaluation together with its argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilogValue {
    pub argument: f64,
    pub value: f64,
}

impl DilogValue {
    pub fn new(argument: f64) -> Result<Self> {
        Ok(Self {
            argument,
            value: dilog(argument)?,
        })
    }
}

/// Real dilogarithm `Li₂(z)` for `z ≤ 1`.
pub fn dilog(z: f64) -> Result<f64> {
    if z.is_nan() || z > 1.0 {
        return Err(Error::Domain(format!(
            "dilog is real-valued only for z <= 1, got {z}"
        )));
    }
    if z == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(dilog_unchecked(z))
}

fn dilog_unchecked(z: f64) -> f64 {
    if z == 1.0 {
        zeta2()
    } else if z.abs() <= 0.5 {
        dilog_series(z)
    } else {
        dilog_transformed(z)
    }
}

/// Power series `Σ z^s/s²`, truncated at relative term size `1e-16`.
pub(crate) fn dilog_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for s in 1..=SERIES_MAX_TERMS {
        power *= z;
        let term = power / (s * s) as f64;
        sum += term;
        if term.abs() <= SERIES_RTOL * sum.abs() {
            break;
        }
    }
    sum
}

/// One functional-equation step followed by recursive evaluation.
///
/// Valid for every `z < 1`, including the series disc, which lets the tests
/// compare both routes on the overlap band.
pub(crate) fn dilog_transformed(z: f64) -> f64 {
    debug_assert!(z < 1.0);
    if z < -1.0 {
        let l = (-z).ln();
        -zeta2() - 0.5 * l * l - dilog_unchecked(1.0 / z)
    } else if z < 0.0 {
        let l = (-z).ln_1p();
        -dilog_unchecked(z / (z - 1.0)) - 0.5 * l * l
    } else if z == 0.0 {
        0.0
    } else {
        zeta2() - z.ln() * (-z).ln_1p() - dilog_unchecked(1.0 - z)
    }
}

/// One check of the identity suite.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub bound: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.bound
    }
}

/// Upper limit standing in for `∞` in the logarithmic integrals.
pub const LOG_INTEGRAL_CUTOFF: f64 = 60.0;

/// `∫₀^60 log(1 + e^{−t}/c) dt`, which equals `−Li₂(−1/c)` up to `e^{−60}`.
pub fn log_integral(c: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_1d(
        |t| ((-t).exp() / c).ln_1p(),
        0.0,
        LOG_INTEGRAL_CUTOFF,
        spec,
        &[],
    )?)
}

/// `∫₀^60 t e^{−t} / (c + e^{−t}) dt`, the same value after integrating by parts.
pub fn weighted_log_integral(c: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_1d(
        |t| {
            let e = (-t).exp();
            t * e / (c + e)
        },
        0.0,
        LOG_INTEGRAL_CUTOFF,
        spec,
        &[],
    )?)
}

/// Special values, functional equations and integral representations of
/// `Li₂` that the asymptotic constants rely on.
pub fn identity_suite(spec: &QuadratureSpec) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let mut push = |name: String, residual: f64, bound: f64| {
        out.push(IdentityCheck {
            name,
            residual,
            bound,
        })
    };
    push(
        "Li2(-1) + pi^2/12".into(),
        (dilog(-1.0)? + PI * PI / 12.0).abs(),
        1e-12,
    );
    push(
        "zeta(2) + 2 Li2(-1)".into(),
        (zeta2() + 2.0 * dilog(-1.0)?).abs(),
        1e-12,
    );
    for a in [0.1f64, 1.0, 5.0, 10.0] {
        let lhs = -dilog(-a.exp())? - dilog(-(-a).exp())?;
        push(
            format!("inversion at a = {a}"),
            (lhs - (zeta2() + 0.5 * a * a)).abs(),
            1e-10,
        );
    }
    let worst = (0..=200)
        .map(|k| -10.0 + 0.1 * k as f64)
        .map(|a: f64| {
            let lhs = -dilog_unchecked(-a.exp()) - dilog_unchecked(-(-a).exp());
            (lhs - (zeta2() + 0.5 * a * a)).abs()
        })
        .fold(0.0, f64::max);
    push("inversion on a in [-10, 10]".into(), worst, 1e-10);
    let worst = (0..=40)
        .flat_map(|k| {
            let a = 0.4 + 0.2 * k as f64 / 40.0;
            [a, -a]
        })
        .map(|z| (dilog_series(z) - dilog_transformed(z)).abs())
        .fold(0.0, f64::max);
    push(
        "series vs transformed on 0.4 <= |z| <= 0.6".into(),
        worst,
        1e-12,
    );
    for c in [
        0.5,
        1.0,
        2.0,
        std::f64::consts::E,
        1.0 / std::f64::consts::E,
    ] {
        let want = -dilog(-1.0 / c)?;
        push(
            format!("int log(1 + e^-t / c) at c = {c}"),
            (log_integral(c, spec)? - want).abs(),
            1e-8,
        );
        push(
            format!("int t e^-t / (c + e^-t) at c = {c}"),
            (weighted_log_integral(c, spec)? - want).abs(),
            1e-8,
        );
    }
    Ok(out)
}
