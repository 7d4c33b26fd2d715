//! Composite midpoint rule and the splitting of `(0, t]` into kernel bands.
//!
//! Every integral over the `(t, s)` triangle is taken band by band so that
//! no panel straddles a discontinuity curve.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::CurveFamily;

/// Panels per band segment when the caller does not choose.
pub const DEFAULT_PANELS: usize = 200;

/// Tolerance for curve ordering checks.
pub const ORDER_TOLERANCE: f64 = 1e-12;

/// Midpoint abscissae and weights of the composite rule on `[lo, hi]`.
pub fn midpoint_nodes(lo: f64, hi: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> {
    let width = (hi - lo) / panels as f64;
    (0..panels).map(move |p| (lo + (p as f64 + 0.5) * width, width))
}

fn check_interval(lo: f64, hi: f64, panels: usize) -> Result<()> {
    if panels == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi, panels });
    }
    Ok(())
}

/// `sum f(midpoint_p) * (hi - lo) / panels`; exactly 0 when `lo == hi`.
pub fn composite_midpoint<F>(mut f: F, lo: f64, hi: f64, panels: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_composite_midpoint(|s| Ok(f(s)), lo, hi, panels)
}

/// [`composite_midpoint`] for fallible integrands.
pub fn try_composite_midpoint<F>(mut f: F, lo: f64, hi: f64, panels: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_interval(lo, hi, panels)?;
    if lo == hi {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (s, w) in midpoint_nodes(lo, hi, panels) {
        let v = f(s)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { abscissa: s });
        }
        sum += v * w;
    }
    Ok(sum)
}

/// Composite midpoint nodes on `[lo, hi]` with the interval first cut at
/// every breakpoint lying strictly inside it. The panel budget is shared
/// between the pieces in proportion to their length, with at least one
/// panel per piece. `breakpoints` must be sorted.
pub fn split_nodes(lo: f64, hi: f64, panels: usize, breakpoints: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_interval(lo, hi, panels)?;
    let mut nodes = Vec::new();
    if lo == hi {
        return Ok(nodes);
    }
    let length = hi - lo;
    let start = breakpoints.partition_point(|&b| b <= lo);
    let inner = breakpoints[start..].iter().copied().take_while(|&b| b < hi);
    let mut left = lo;
    for right in inner.chain(std::iter::once(hi)) {
        let piece = right - left;
        if piece > 0.0 {
            let share = ((panels as f64) * piece / length).ceil() as usize;
            nodes.extend(midpoint_nodes(left, right, share.max(1)));
        }
        left = right;
    }
    Ok(nodes)
}

/// One band's share of `(0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSegment {
    pub lo: f64,
    pub hi: f64,
    /// Zero-based band index.
    pub band: usize,
}

impl BandSegment {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// `(0, t]` cut by the discontinuity curves, in band order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDecomposition {
    pub t: f64,
    pub segments: Vec<BandSegment>,
}

impl BandDecomposition {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(BandSegment::len).sum()
    }
}

/// Splits `(0, t]` into `(alpha_{j-1}(t), alpha_j(t)]` for every band.
/// Ordering violations beyond [`ORDER_TOLERANCE`] are errors; smaller ones
/// are clamped so that segments still tile the interval.
pub fn decompose(t: f64, curves: &CurveFamily) -> Result<BandDecomposition> {
    let horizon = curves.horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::OutOfRange { what: "t", value: t, lo: 0.0, hi: horizon });
    }
    let bands = curves.bands();
    let mut segments = Vec::with_capacity(bands);
    let mut lo = 0.0;
    for band in 0..bands {
        let raw = curves.alpha(band + 1, t)?;
        if raw < lo - ORDER_TOLERANCE {
            return Err(Error::CurveOrder { t, band, lower: lo, upper: raw });
        }
        let hi = raw.max(lo);
        segments.push(BandSegment { lo, hi, band });
        lo = hi;
    }
    Ok(BandDecomposition { t, segments })
}
