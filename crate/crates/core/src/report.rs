//! Error and distance measurements on uniform sample grids.

use serde::Serialize;

use crate::error::Result;
use crate::problem::VolterraSystem;
use crate::solution::Approximation;

/// Sample count used for sup-norms.
pub const SAMPLES: usize = 2001;

/// `samples` equispaced points on `[0, domain]`, endpoints included.
pub fn sample_grid(domain: f64, samples: usize) -> impl Iterator<Item = f64> {
    let last = samples.max(2) - 1;
    (0..=last).map(move |k| if k == last { domain } else { domain * k as f64 / last as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentError {
    /// Largest sampled `|x_exact - x_approx|`.
    pub error: f64,
    /// Where it was attained.
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub components: Vec<ComponentError>,
    /// `sqrt(sum_i eps_i^2)`.
    pub aggregate: f64,
}

impl ErrorSummary {
    pub fn from_components(components: Vec<ComponentError>) -> Self {
        let aggregate = components.iter().map(|c| c.error * c.error).sum::<f64>().sqrt();
        ErrorSummary { components, aggregate }
    }

    pub fn max(&self) -> f64 {
        self.components.iter().map(|c| c.error).fold(0.0, f64::max)
    }
}

/// Per-component sup distance between two approximations, each component
/// sampled on its own domain.
pub fn component_distances(
    a: &dyn Approximation,
    b: &dyn Approximation,
    domains: &[f64],
    samples: usize,
) -> Result<Vec<ComponentError>> {
    domains
        .iter()
        .enumerate()
        .map(|(u, &domain)| {
            let mut worst = ComponentError { error: 0.0, t_max: 0.0 };
            for t in sample_grid(domain, samples) {
                let d = (a.value(u, t)? - b.value(u, t)?).abs();
                if d > worst.error || d.is_nan() {
                    worst = ComponentError { error: d, t_max: t };
                    if d.is_nan() {
                        break;
                    }
                }
            }
            Ok(worst)
        })
        .collect()
}

/// `max_u sup |a_u - b_u|`.
pub fn sup_distance(a: &dyn Approximation, b: &dyn Approximation, domains: &[f64], samples: usize) -> Result<f64> {
    Ok(component_distances(a, b, domains, samples)?
        .into_iter()
        .map(|c| c.error)
        .fold(0.0, |acc, e| if e.is_nan() { f64::NAN } else { acc.max(e) }))
}

/// Errors against the system's exact solution, if it has one.
pub fn error_summary(system: &VolterraSystem, approx: &dyn Approximation, samples: usize) -> Result<Option<ErrorSummary>> {
    let Some(exact) = system.exact() else {
        return Ok(None);
    };
    let domains = system.component_domains()?;
    Ok(Some(ErrorSummary::from_components(component_distances(exact, approx, &domains, samples)?)))
}
