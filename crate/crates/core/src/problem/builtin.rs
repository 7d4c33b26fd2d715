//! The worked examples: two linear systems with jump kernels, a scalar
//! nonlinear equation split over two bands, and a nonlinear two-band system
//! with polynomial and with trigonometric exact solutions.
//!
//! Right-hand sides are the closed-form integrals of the exact solutions.

use super::{SystemSpec, VolterraSystem};
use crate::error::{Error, Result};

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    horizon: f64,
    alpha: &'static [&'static str],
    kernels: &'static [&'static [&'static str]],
    nonlinearities: Option<&'static [&'static [&'static str]]>,
    f: &'static [&'static str],
    unknown_of_band: Option<&'static [usize]>,
    exact: &'static [&'static str],
    guess: Option<&'static [&'static str]>,
}

impl Builtin {
    pub fn spec(&self) -> SystemSpec {
        let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let table = |rows: &[&[&str]]| rows.iter().map(|r| strings(r)).collect::<Vec<_>>();
        SystemSpec {
            name: Some(self.name.to_string()),
            description: Some(self.summary.to_string()),
            n: self.alpha.len() + 1,
            horizon: self.horizon,
            alpha: strings(self.alpha),
            kernels: table(self.kernels),
            nonlinearities: self.nonlinearities.map(table),
            f: strings(self.f),
            unknown_of_band: self.unknown_of_band.map(|m| m.to_vec()),
            exact: Some(strings(self.exact)),
            guess: self.guess.map(strings),
        }
    }
}

const TWO_BAND_NONLINEAR_KERNELS: &[&[&str]] = &[&["s*(t+s)", "1"], &["1+t-s", "-1"]];
const TWO_BAND_NONLINEARITIES: &[&[&str]] = &[&["x^2", "3*x+x^3"], &["x-x^2", "x+x^4"]];

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "model01",
        summary: "linear 2x2 system, jump at t/2, exact (cos t, sin t) on [0,2]",
        horizon: 2.0,
        alpha: &["t/2"],
        kernels: &[&["1+t+s", "1"], &["1+t-s", "-1"]],
        nonlinearities: None,
        f: &[
            "3*t*sin(t/2)/2 + sin(t/2) + 2*cos(t/2) - cos(t) - 1",
            "t*sin(t/2)/2 + sin(t/2) - 2*cos(t/2) + cos(t) + 1",
        ],
        unknown_of_band: None,
        exact: &["cos(t)", "sin(t)"],
        guess: None,
    },
    Builtin {
        name: "model02",
        summary: "linear 3x3 system, jumps at t/3 and 2t/3, exact (cos t, sin t, sin(t)/4) on [0,2]",
        horizon: 2.0,
        alpha: &["t/3", "2*t/3"],
        kernels: &[
            &["1+t+s", "1", "1+s"],
            &["1+t-s", "-1", "1-t"],
            &["1+t/5+s", "1+t-s", "-(1+s)"],
        ],
        nonlinearities: None,
        f: &[
            "4*t*sin(t/3)/3 + t*cos(2*t/3)/6 - t*cos(t)/4 + sin(t/3) - sin(2*t/3)/4 \
             + 2*cos(t/3) - 3*cos(2*t/3)/4 - (cos(t) - sin(t))/4 - 1",
            "2*t*sin(t/3)/3 + (1 - t)*cos(2*t/3)/4 + (t - 1)*cos(t)/4 + sin(t/3) \
             - 2*cos(t/3) + cos(2*t/3) + 1",
            "8*t*sin(t/3)/15 + 2*t*cos(t/3)/3 - t*cos(2*t/3)/2 + t*cos(t)/4 - 3*sin(2*t/3)/4 \
             + 2*sin(t/3) + 2*cos(t/3) - 5*cos(2*t/3)/4 + (cos(t) - sin(t))/4 - 1",
        ],
        unknown_of_band: None,
        exact: &["cos(t)", "sin(t)", "sin(t)/4"],
        guess: None,
    },
    Builtin {
        name: "nonlinear-scalar",
        summary: "scalar nonlinear equation over two bands split at t/2, exact t^2 on [0,1]",
        horizon: 1.0,
        alpha: &["t/2"],
        kernels: &[&["1+t+s", "1+2*t"]],
        nonlinearities: Some(&[&["x+x^2", "x"]]),
        f: &["t^3/3 + 123*t^4/192 + t^5/160 + 17*t^6/1920"],
        unknown_of_band: Some(&[1, 1]),
        exact: &["t^2"],
        guess: Some(&["0"]),
    },
    Builtin {
        name: "nonlinear-sys1",
        summary: "nonlinear 2x2 system, exact (t^2, t^3) on [0,1], far guess (0.4t^2, 0.5t^3)",
        horizon: 1.0,
        alpha: &["t/2"],
        kernels: TWO_BAND_NONLINEAR_KERNELS,
        nonlinearities: Some(TWO_BAND_NONLINEARITIES),
        f: &[
            "t^4*(21483*t^6 + 800*t^3 + 151200)/215040",
            "t^3*(-122865*t^10 - 5824*t^3 - 9984*t^2 - 332800*t + 66560)/1597440",
        ],
        unknown_of_band: None,
        exact: &["t^2", "t^3"],
        guess: Some(&["0.4*t^2", "0.5*t^3"]),
    },
    Builtin {
        name: "nonlinear-sys2",
        summary: "nonlinear 2x2 system, exact (cos t, sin t) on [0,1], near guess (0.9cos t, 0.9sin t)",
        horizon: 1.0,
        alpha: &["t/2"],
        kernels: TWO_BAND_NONLINEAR_KERNELS,
        nonlinearities: Some(TWO_BAND_NONLINEARITIES),
        f: &[
            "t^3/12 + 3*t^2*sin(t)/16 + t*cos(t)/4 - t/8 - sin(t)/8 + 15*cos(t/2)/4 \
             - 15*cos(t)/4 - cos(3*t/2)/12 + cos(3*t)/12",
            "-3*t^2/16 + t*sin(t/2)/2 - t*sin(t)/8 - 7*t/16 + sin(t/2) - sin(t)/2 \
             + 9*sin(2*t)/32 - sin(4*t)/32 - 2*cos(t/2) + 9*cos(t)/8 + 7/8",
        ],
        unknown_of_band: None,
        exact: &["cos(t)", "sin(t)"],
        guess: Some(&["0.9*cos(t)", "0.9*sin(t)"]),
    },
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|b| b.name)
}

pub fn builtin(name: &str) -> Result<VolterraSystem> {
    BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownBuiltin(name.to_string()))?
        .spec()
        .build()
}
