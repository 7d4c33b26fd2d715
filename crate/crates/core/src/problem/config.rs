use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CurveFamily, Differentiated, Nonlinearity, VolterraSystem};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::solution::ExprFunctions;

/// Textual description of a system, as read from a TOML config file.
///
/// ```toml
/// n = 2                       # number of bands
/// T = 2.0                     # horizon
/// alpha = ["t/2"]             # interior curves alpha_1 .. alpha_{n-1}
/// K = [["1+t+s", "1"],        # K[i][j]: equation i, band j
///      ["1+t-s", "-1"]]
/// G = [["x", "x"], ["x", "x"]]  # optional, defaults to x
/// f = ["...", "..."]
/// unknown_of_band = [1, 2]    # optional, 1-based, identity by default
/// exact = ["cos(t)", "sin(t)"]  # optional
/// guess = ["0", "0"]          # optional, zero by default
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub alpha: Vec<String>,
    #[serde(rename = "K")]
    pub kernels: Vec<Vec<String>>,
    #[serde(rename = "G", default)]
    pub nonlinearities: Option<Vec<Vec<String>>>,
    pub f: Vec<String>,
    #[serde(default)]
    pub unknown_of_band: Option<Vec<usize>>,
    #[serde(default)]
    pub exact: Option<Vec<String>>,
    #[serde(default)]
    pub guess: Option<Vec<String>>,
}

fn parse_in(label: &str, text: &str, allowed: &[Var]) -> Result<Expr> {
    let expr = Expr::parse(text)
        .map_err(|e| Error::InvalidSystem(format!("{label} = \"{text}\": {e}")))?;
    for var in [Var::T, Var::S, Var::X] {
        if !allowed.contains(&var) && expr.depends_on(var) {
            return Err(Error::InvalidSystem(format!(
                "{label} = \"{text}\" may not depend on `{var}`"
            )));
        }
    }
    Ok(expr)
}

fn parse_list(label: &str, items: &[String], expected: usize, allowed: &[Var]) -> Result<Vec<Expr>> {
    if items.len() != expected {
        return Err(Error::InvalidSystem(format!(
            "{label} has {} entries, expected {expected}",
            items.len()
        )));
    }
    items
        .iter()
        .enumerate()
        .map(|(k, text)| parse_in(&format!("{label}[{}]", k + 1), text, allowed))
        .collect()
}

impl SystemSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config { path: "<inline>".into(), message: e.to_string() })
    }

    /// Parses every formula and checks shapes. Analytic conditions are left
    /// to [`VolterraSystem::validate`].
    pub fn build(&self) -> Result<VolterraSystem> {
        let bands = self.n;
        if bands == 0 {
            return Err(Error::InvalidSystem("n must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidSystem(format!("T = {} must be positive", self.horizon)));
        }
        let equations = self.f.len();
        if equations == 0 {
            return Err(Error::InvalidSystem("at least one equation is required".into()));
        }
        let curves = parse_list("alpha", &self.alpha, bands - 1, &[Var::T])?;
        let rhs = parse_list("f", &self.f, equations, &[Var::T])?;

        if self.kernels.len() != equations {
            return Err(Error::InvalidSystem(format!(
                "K has {} rows but there are {equations} equations",
                self.kernels.len()
            )));
        }
        let kernels = self
            .kernels
            .iter()
            .enumerate()
            .map(|(i, row)| parse_list(&format!("K[{}]", i + 1), row, bands, &[Var::T, Var::S]))
            .collect::<Result<Vec<_>>>()?;

        let nonlinearities = match &self.nonlinearities {
            None => vec![vec![Nonlinearity::new(Expr::Var(Var::X)); bands]; equations],
            Some(rows) => {
                if rows.len() != equations {
                    return Err(Error::InvalidSystem(format!(
                        "G has {} rows but there are {equations} equations",
                        rows.len()
                    )));
                }
                rows.iter()
                    .enumerate()
                    .map(|(i, row)| {
                        parse_list(&format!("G[{}]", i + 1), row, bands, &[Var::S, Var::X])
                            .map(|exprs| exprs.into_iter().map(Nonlinearity::new).collect())
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };

        let unknown_of_band = match &self.unknown_of_band {
            None => {
                if bands != equations {
                    return Err(Error::InvalidSystem(format!(
                        "{bands} bands and {equations} equations need an explicit unknown_of_band"
                    )));
                }
                (0..bands).collect()
            }
            Some(map) => {
                if map.len() != bands {
                    return Err(Error::InvalidSystem(format!(
                        "unknown_of_band has {} entries, expected {bands}",
                        map.len()
                    )));
                }
                map.iter()
                    .map(|&u| {
                        if (1..=equations).contains(&u) {
                            Ok(u - 1)
                        } else {
                            Err(Error::InvalidSystem(format!(
                                "unknown_of_band entry {u} is outside 1..={equations}"
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };

        let exact = self
            .exact
            .as_ref()
            .map(|e| parse_list("exact", e, equations, &[Var::T]).map(ExprFunctions::new))
            .transpose()?;
        let guess = match &self.guess {
            Some(g) => ExprFunctions::new(parse_list("guess", g, equations, &[Var::T])?),
            None => ExprFunctions::zeros(equations),
        };

        Ok(VolterraSystem {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            description: self.description.clone().unwrap_or_default(),
            curves: CurveFamily::new(self.horizon, curves),
            kernels,
            nonlinearities,
            rhs: rhs.into_iter().map(|e| Differentiated::new(e, Var::T)).collect(),
            unknown_of_band,
            exact,
            guess,
        })
    }
}

/// Reads and builds a system from a TOML file.
pub fn load_config(path: &Path) -> Result<VolterraSystem> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: display.clone(),
        message: if e.kind() == std::io::ErrorKind::NotFound {
            "file not found".to_string()
        } else {
            e.to_string()
        },
    })?;
    let mut spec: SystemSpec =
        toml::from_str(&text).map_err(|e| Error::Config { path: display.clone(), message: e.to_string() })?;
    if spec.name.is_none() {
        spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    spec.build()
}
