//! JSON scenario files and CSV sweep output.

use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::asymptotics::SweepOptions;
use crate::entropic::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::measure::{Density, DensitySpec, QuadratureSpec};
use crate::powercell::Atoms;
use crate::problem::Problem;

/// Atom positions: numbers on the line or `[x, y]` pairs in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Positions {
    Line(Vec<f64>),
    Plane(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomsSpec {
    pub positions: Positions,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Mass residual for the unregularized Newton solve.
    pub newton: Option<f64>,
    /// `max_j |log(m_j/ν_j)|` for Sinkhorn.
    pub sinkhorn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub density: DensitySpec,
    pub atoms: AtomsSpec,
    /// Ascending regularization grid.
    pub eta: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "yes")]
    pub warm_start: bool,
}

fn yes() -> bool {
    true
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl Scenario {
    pub fn dim(&self) -> usize {
        match self.atoms.positions {
            Positions::Line(_) => 1,
            Positions::Plane(_) => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: String| {
            Err(Error::Scenario {
                path: path.into(),
                message,
            })
        };
        let sum: f64 = self.atoms.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return fail("atoms.weights", format!("weights sum to {sum}, expected 1"));
        }
        if self.eta.is_empty() {
            return fail("eta", "grid is empty".into());
        }
        if let Some(k) = self.eta.iter().position(|e| !(*e > 0.0 && e.is_finite())) {
            return fail(
                &format!("eta[{k}]"),
                format!("must be positive, got {}", self.eta[k]),
            );
        }
        if let Some(k) = self.eta.windows(2).position(|w| w[0] >= w[1]) {
            return fail(
                &format!("eta[{}]", k + 1),
                "grid must be strictly ascending".into(),
            );
        }
        for (name, t) in [
            ("tolerances.newton", self.tolerances.newton),
            ("tolerances.sinkhorn", self.tolerances.sinkhorn),
        ] {
            if let Some(t) = t.filter(|t| !(*t > 0.0)) {
                return fail(name, format!("must be positive, got {t}"));
            }
        }
        if let Some(q) = &self.quadrature {
            if let Err(e) = q.validate() {
                return fail("quadrature", e.to_string());
            }
        }
        self.problem().map(|_| ())
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature
            .unwrap_or_else(|| SweepOptions::for_dim(self.dim()).sinkhorn.quad)
    }

    pub fn atoms(&self) -> Result<Atoms> {
        let w = &self.atoms.weights;
        match &self.atoms.positions {
            Positions::Line(p) => Atoms::line(p, w),
            Positions::Plane(p) => Atoms::plane(p, w),
        }
        .map_err(|e| Error::Scenario {
            path: "atoms".into(),
            message: e.to_string(),
        })
    }

    pub fn problem(&self) -> Result<Problem> {
        let density =
            Density::from_spec(&self.density, &self.quadrature()).map_err(|e| Error::Scenario {
                path: "density".into(),
                message: e.to_string(),
            })?;
        Problem::new(density, self.atoms()?).map_err(|e| Error::Scenario {
            path: "atoms.positions".into(),
            message: e.to_string(),
        })
    }

    /// Solver options for this scenario; explicit tolerances and quadrature
    /// override the per-dimension defaults.
    pub fn sweep_options(&self) -> SweepOptions {
        let mut o = SweepOptions::for_dim(self.dim());
        if let Some(q) = self.quadrature {
            o.newton.quad = q;
            o.sinkhorn.quad = q;
        }
        if let Some(t) = self.tolerances.newton {
            o.newton.tol = t;
        }
        if let Some(t) = self.tolerances.sinkhorn {
            o.sinkhorn.tol = t;
        }
        o.warm_start = self.warm_start;
        o
    }
}

/// Parse and validate a scenario. Syntax and schema errors name the JSON
/// path together with the line and column.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        // serde_json messages already end with "at line L column C"
        Error::Scenario {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &std::path::Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Example scenarios shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 6] = [
    (
        "fig1a_gaussian",
        include_str!("../scenarios/fig1a_gaussian.json"),
    ),
    (
        "fig1b_laplace",
        include_str!("../scenarios/fig1b_laplace.json"),
    ),
    (
        "uniform_symmetric",
        include_str!("../scenarios/uniform_symmetric.json"),
    ),
    (
        "uniform_asymmetric",
        include_str!("../scenarios/uniform_asymmetric.json"),
    ),
    (
        "powerlaw_p05",
        include_str!("../scenarios/powerlaw_p05.json"),
    ),
    (
        "square2d_two_atoms",
        include_str!("../scenarios/square2d_two_atoms.json"),
    ),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text).expect("bundled scenarios are valid"))
}

/// Write rows under the fixed header, every value as `{:.16e}` so that
/// reparsing recovers it exactly.
pub fn write_rows<W: Write>(out: W, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DiagnosticsRow::HEADER)?;
    for r in rows {
        w.write_record(r.values().iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<DiagnosticsRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(DiagnosticsRow::HEADER) {
        return Err(Error::InvalidInput(format!(
            "unexpected CSV header, expected {}",
            DiagnosticsRow::HEADER.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_scenarios_parse() {
        for (name, text) in BUNDLED {
            let s = parse_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
            s.problem().unwrap();
        }
        let s = bundled("fig1a_gaussian").unwrap();
        assert_eq!(s.eta, (2..=10).map(|k| 2f64.powi(k)).collect::<Vec<_>>());
        assert_eq!(bundled("square2d_two_atoms").unwrap().dim(), 2);
        assert!(bundled("nope").is_none());
    }

    fn base() -> serde_json::Value {
        serde_json::from_str(BUNDLED[0].1).unwrap()
    }

    fn err_of(v: serde_json::Value) -> (String, String) {
        match parse_scenario(&serde_json::to_string_pretty(&v).unwrap()).unwrap_err() {
            Error::Scenario { path, message } => (path, message),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut v = base();
        v["atoms"]["weights"] = serde_json::json!([0.3, 0.3]);
        assert_eq!(err_of(v).0, "atoms.weights");
    }

    #[test]
    fn duplicate_positions_rejected() {
        let mut v = base();
        v["atoms"]["positions"] = serde_json::json!([1.0, 1.0]);
        assert_eq!(err_of(v).0, "atoms");
    }

    #[test]
    fn unknown_key_names_path_and_line() {
        let text = r#"{
  "name": "x",
  "density": {"family": "gaussian", "mean": 0.0, "sigma": 1.0, "colour": 3},
  "atoms": {"positions": [-1.0, 1.0], "weights": [0.5, 0.5]},
  "eta": [1.0]
}"#;
        match parse_scenario(text).unwrap_err() {
            Error::Scenario { path, message } => {
                assert_eq!(path, "density");
                assert!(
                    message.contains("colour") && message.contains("line 3"),
                    "{message}"
                );
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn grid_must_ascend() {
        let mut v = base();
        v["eta"] = serde_json::json!([4.0, 2.0]);
        assert_eq!(err_of(v).0, "eta[1]");
        let mut v = base();
        v["eta"] = serde_json::json!([-1.0]);
        assert_eq!(err_of(v).0, "eta[0]");
    }

    #[test]
    fn overrides_apply() {
        let mut v = base();
        v["tolerances"] = serde_json::json!({"sinkhorn": 1e-9});
        v["quadrature"] = serde_json::json!({"rel_tol": 1e-11});
        v["warm_start"] = serde_json::json!(false);
        let s = parse_scenario(&v.to_string()).unwrap();
        let o = s.sweep_options();
        assert_eq!(o.sinkhorn.tol, 1e-9);
        assert_eq!(o.sinkhorn.quad.rel_tol, 1e-11);
        assert_eq!(o.newton.quad.rel_tol, 1e-11);
        assert!(!o.warm_start);
    }

    #[test]
    fn csv_round_trip() {
        let row = DiagnosticsRow {
            eta: 3.0,
            cost: 0.1 + 0.2,
            w2_squared: 1.0 / 3.0,
            suboptimality: 1e-300,
            suboptimality_scaled: std::f64::consts::PI,
            kl_mu_rho: -0.0,
            kl_mu_nu: 2f64.ln(),
            entropic_cost: 5e-324,
            d_eta_inf_norm: 0.0,
            phi: 1.234_567_890_123_456_7e10,
            phi_scaled: f64::MAX,
            predicted_constant: f64::INFINITY,
        };
        let failed = DiagnosticsRow::failed(8.0, 0.2);
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row, failed]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&DiagnosticsRow::HEADER.join(",")));
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back[0], row);
        assert!(back[1].is_failed());
        assert_eq!(back[1].predicted_constant, 0.2);
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
    }
}
