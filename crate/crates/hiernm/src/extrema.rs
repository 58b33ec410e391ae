//! Local extrema of a sampled time series, refined against a callback.
//!
//! Slope sign changes on the samples locate candidate extrema; golden-section
//! search on the callback refines each to the stated time tolerance without
//! derivative evaluations, so kinks (|G| bouncing off zero) refine just as
//! well as smooth turning points.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sample slopes with magnitude below this are plateau, producing no event.
pub const PLATEAU_SLOPE: f64 = 1e-12;

/// Default refinement tolerance on event times (units of 1/gamma).
pub const TIME_TOL: f64 = 1e-6;

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremumKind {
    Min,
    Max,
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Ordered events of a series: the two endpoints plus alternating interior
/// minima and maxima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaList {
    pub events: Vec<Extremum>,
}

impl ExtremaList {
    pub fn interior(&self) -> impl Iterator<Item = &Extremum> {
        self.events
            .iter()
            .filter(|e| e.kind != ExtremumKind::Endpoint)
    }
}

/// Golden-section minimization of `f` on [a, b] to width `tol`; returns
/// (argmin, min).
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Golden-section maximization; returns (argmax, max).
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (t, v) = golden_section_min(|x| -f(x), a, b, tol);
    (t, -v)
}

/// Bisect a bracketed sign change of `f` on [a, b] down to width `tol`.
pub fn bisect_sign_change<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Locate and refine the local extrema of a sampled series.
///
/// `times` and `values` are the samples; `refine` re-evaluates the underlying
/// function during golden-section refinement. Slope sign changes mark
/// candidate extrema; plateaus (|slope| < 1e-12) yield no event. Events come
/// back ordered in time, bracketed by the two endpoint samples, with interior
/// kinds alternating between `Min` and `Max` by construction.
pub fn find_extrema<F: Fn(f64) -> f64>(
    times: &[f64],
    values: &[f64],
    refine: F,
    time_tol: f64,
) -> Result<ExtremaList> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "series needs >= 2 samples with matching time stamps, got {} / {}",
            times.len(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite {
            what: "series sample",
        });
    }

    let mut events = vec![Extremum {
        time: times[0],
        value: values[0],
        kind: ExtremumKind::Endpoint,
    }];

    // prev_sign tracks the last non-plateau slope direction; prev_idx the
    // sample index where that direction was last observed.
    let mut prev_sign = 0i8;
    let mut prev_idx = 0usize;
    for i in 0..times.len() - 1 {
        let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
        let sign = if slope.abs() < PLATEAU_SLOPE {
            0
        } else if slope > 0.0 {
            1
        } else {
            -1
        };
        if sign == 0 {
            continue;
        }
        if prev_sign != 0 && sign != prev_sign {
            // The turning point lies between the second-to-last sample of
            // the old direction and the first sample of the new one.
            let a = times[prev_idx - 1];
            let b = times[i + 1];
            let (kind, (t, v)) = if sign < 0 {
                (
                    ExtremumKind::Max,
                    golden_section_max(&refine, a, b, time_tol),
                )
            } else {
                (
                    ExtremumKind::Min,
                    golden_section_min(&refine, a, b, time_tol),
                )
            };
            events.push(Extremum {
                time: t,
                value: v,
                kind,
            });
        }
        prev_sign = sign;
        prev_idx = i + 1;
    }

    events.push(Extremum {
        time: times[times.len() - 1],
        value: values[values.len() - 1],
        kind: ExtremumKind::Endpoint,
    });
    Ok(ExtremaList { events })
}
