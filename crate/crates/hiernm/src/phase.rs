//! Markovian/non-Markovian threshold location and (kappa, lambda) plane
//! sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PhysParams, SpectralWidth};
use crate::nm::{choose_horizon, nm_auto, nm_for_propagator, NMResult, EPS_NM};
use crate::propagator::Propagator;

/// Default bisection bracket, in units of gamma.
pub const DEFAULT_BRACKET: (f64, f64) = (0.01, 1.0);

/// Default bisection width, in units of gamma.
pub const DEFAULT_TOL: f64 = 1e-4;

/// Brackets never expand above this multiple of gamma.
const EXPAND_CAP: f64 = 2.0;

/// Bisection on a boolean classifier assumed to flip exactly once from
/// `true` (Markovian) at small kappa to `false` above the threshold.
///
/// With an explicit bracket the straddle condition is enforced and failure
/// reports both classifications. Without one, the default bracket expands:
/// downward by factors of 4 (bottoming out at kappa = 0, which is Markovian
/// exactly), upward by factors of 2 until the cap.
fn bisect_classifier<F>(
    mut markovian_at: F,
    bracket: Option<(f64, f64)>,
    gamma: f64,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bisection tolerance must be > 0, got {tol}"
        )));
    }
    let (mut lo, mut hi, strict) = match bracket {
        Some((a, b)) => (a, b, true),
        None => (DEFAULT_BRACKET.0 * gamma, DEFAULT_BRACKET.1 * gamma, false),
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "bracket must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut lo_m = if lo == 0.0 { true } else { markovian_at(lo)? };
    let mut hi_m = markovian_at(hi)?;
    if strict {
        if !lo_m || hi_m {
            return Err(Error::Bracket {
                lo,
                hi,
                lo_markovian: lo_m,
                hi_markovian: hi_m,
            });
        }
    } else {
        // Transition below lo: shrink toward zero (kappa = 0 gives G = 1,
        // exactly Markovian, so the bracket always closes).
        while !lo_m {
            hi = lo;
            hi_m = false;
            lo /= 4.0;
            if lo < 1e-6 * gamma {
                lo = 0.0;
                break;
            }
            lo_m = markovian_at(lo)?;
        }
        // Transition above hi: grow until the cap.
        while hi_m {
            lo = hi;
            hi *= 2.0;
            if hi > EXPAND_CAP * gamma {
                return Err(Error::Bracket {
                    lo,
                    hi,
                    lo_markovian: true,
                    hi_markovian: true,
                });
            }
            hi_m = markovian_at(hi)?;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if markovian_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest qubit-cavity coupling at which the evolution turns
/// non-Markovian, located to width `tol` by bisection. `bracket = None`
/// uses the auto-expanded default [0.01, 1] gamma.
pub fn threshold_kappa(
    lambda: SpectralWidth,
    gamma: f64,
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> Result<f64> {
    bisect_classifier(
        |kappa| {
            let p = PhysParams::new(kappa, lambda, gamma)?;
            Ok(nm_auto(&p)?.markovian)
        },
        bracket,
        gamma,
        tol,
    )
}

/// Threshold of the direct-coupling comparison model; analytically lambda/2
/// (the under/overdamped boundary), which the bisection reproduces.
pub fn threshold_kappa_direct(lambda: f64, bracket: Option<(f64, f64)>, tol: f64) -> Result<f64> {
    bisect_classifier(
        |kappa| {
            if kappa <= 0.0 {
                return Ok(true);
            }
            Ok(nm_direct_auto(kappa, lambda)?.markovian)
        },
        bracket,
        1.0,
        tol,
    )
}

/// Non-Markovianity of the direct-coupling model under the same horizon
/// policy as the hierarchical model.
pub fn nm_direct_auto(kappa: f64, lambda: f64) -> Result<NMResult> {
    let prop = Propagator::direct(kappa, lambda)?;
    let horizon = choose_horizon(&prop, 1.0);
    nm_for_propagator(&prop, 1.0, horizon)
}

/// Horizon selection for sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HorizonPolicy {
    /// Per-point envelope policy (decay times vary by orders of magnitude
    /// across the plane).
    Auto,
    /// One fixed horizon for every point.
    Fixed(f64),
}

/// Sweep request: grids, unit scale, horizon policy, bisection width, and
/// the parallelism bound.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kappa_grid: Vec<f64>,
    pub lambda_grid: Vec<SpectralWidth>,
    pub gamma: f64,
    pub horizon: HorizonPolicy,
    pub threshold_tol: f64,
    pub jobs: Option<usize>,
}

impl SweepSpec {
    /// The default plane: kappa in {0.05, ..., 1.0} gamma, 25 log-spaced
    /// lambda in [0.05, 100] gamma plus the memoryless column.
    pub fn default_grids(gamma: f64) -> Self {
        let kappa_grid = (1..=20).map(|i| 0.05 * i as f64 * gamma).collect();
        let mut lambda_grid = log_spaced(0.05 * gamma, 100.0 * gamma, 25)
            .into_iter()
            .map(SpectralWidth::Finite)
            .collect::<Vec<_>>();
        lambda_grid.push(SpectralWidth::Infinite);
        Self {
            kappa_grid,
            lambda_grid,
            gamma,
            horizon: HorizonPolicy::Auto,
            threshold_tol: DEFAULT_TOL * gamma,
            jobs: None,
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` linearly spaced points from `lo` to `hi` inclusive.
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub lambda: SpectralWidth,
    /// NaN when the bisection failed for this column (see diagnostics).
    pub kappa_t: f64,
}

/// NM over the (kappa, lambda) grid plus the threshold curve.
/// `nm_grid[i][j]` belongs to `kappa_axis[i]`, `lambda_axis[j]`; failed
/// points are NaN with an explanation in `diagnostics`.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub kappa_axis: Vec<f64>,
    pub lambda_axis: Vec<SpectralWidth>,
    pub nm_grid: Vec<Vec<f64>>,
    pub threshold_curve: Vec<ThresholdPoint>,
    pub diagnostics: Vec<String>,
}

fn validate_grids(spec: &SweepSpec) -> Result<()> {
    if spec.kappa_grid.is_empty() || spec.lambda_grid.is_empty() {
        return Err(Error::InvalidParams("sweep grids must be non-empty".into()));
    }
    for w in spec.kappa_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParams(
                "kappa grid must be strictly increasing".into(),
            ));
        }
    }
    for pair in spec.lambda_grid.windows(2) {
        match (pair[0], pair[1]) {
            (SpectralWidth::Finite(a), SpectralWidth::Finite(b)) if b <= a => {
                return Err(Error::InvalidParams(
                    "lambda grid must be strictly increasing".into(),
                ));
            }
            (SpectralWidth::Infinite, _) => {
                return Err(Error::InvalidParams(
                    "the infinite column must come last in the lambda grid".into(),
                ));
            }
            _ => {}
        }
    }
    for &k in &spec.kappa_grid {
        if !(k.is_finite() && (0.0..=EXPAND_CAP * spec.gamma).contains(&k)) {
            return Err(Error::InvalidParams(format!(
                "kappa grid entry {k} outside [0, {}]",
                EXPAND_CAP * spec.gamma
            )));
        }
    }
    for &l in &spec.lambda_grid {
        if let SpectralWidth::Finite(v) = l {
            if v < 0.05 * spec.gamma {
                return Err(Error::InvalidParams(format!(
                    "lambda grid entry {v} below 0.05 gamma"
                )));
            }
        }
    }
    Ok(())
}

/// Evaluate the NM grid and threshold curve. Grid points are independent
/// pure computations evaluated in parallel (bounded by `jobs`) and assembled
/// by index, so the output is deterministic and identical to a sequential
/// sweep. Per-point failures become NaN entries plus a diagnostic, never an
/// abort.
pub fn sweep(spec: &SweepSpec) -> Result<PhaseDiagram> {
    validate_grids(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal {
            what: format!("thread pool: {e}"),
        })?;

    let nk = spec.kappa_grid.len();
    let nl = spec.lambda_grid.len();

    let point = |i: usize, j: usize| -> (f64, Option<String>) {
        let kappa = spec.kappa_grid[i];
        let lambda = spec.lambda_grid[j];
        let run = || -> Result<f64> {
            let p = PhysParams::new(kappa, lambda, spec.gamma)?;
            let r = match spec.horizon {
                HorizonPolicy::Auto => nm_auto(&p)?,
                HorizonPolicy::Fixed(h) => crate::nm::nm_optimal_pair(&p, h)?,
            };
            Ok(r.nm_value)
        };
        match run() {
            Ok(v) => (v, None),
            Err(e) => (
                f64::NAN,
                Some(format!("point kappa={kappa}, lambda={lambda}: {e}")),
            ),
        }
    };

    let (cells, thresholds) = pool.install(|| {
        let cells: Vec<(f64, Option<String>)> = (0..nk * nl)
            .into_par_iter()
            .map(|idx| point(idx / nl, idx % nl))
            .collect();
        let thresholds: Vec<(f64, Option<String>)> = spec
            .lambda_grid
            .par_iter()
            .map(
                |&lambda| match threshold_kappa(lambda, spec.gamma, None, spec.threshold_tol) {
                    Ok(k) => (k, None),
                    Err(e) => (f64::NAN, Some(format!("threshold at lambda={lambda}: {e}"))),
                },
            )
            .collect();
        (cells, thresholds)
    });

    let mut diagnostics = Vec::new();
    let mut nm_grid = vec![vec![f64::NAN; nl]; nk];
    for (idx, (v, diag)) in cells.into_iter().enumerate() {
        nm_grid[idx / nl][idx % nl] = v;
        if let Some(d) = diag {
            diagnostics.push(d);
        }
    }
    let threshold_curve: Vec<ThresholdPoint> = spec
        .lambda_grid
        .iter()
        .zip(thresholds)
        .map(|(&lambda, (kappa_t, diag))| {
            if let Some(d) = diag {
                diagnostics.push(d);
            }
            ThresholdPoint { lambda, kappa_t }
        })
        .collect();

    // Post-hoc guard on the single-transition assumption behind the
    // bisection: per column, the (NM >= eps) pattern must flip at most once
    // and the flip must straddle the bisected threshold.
    for (j, tp) in threshold_curve.iter().enumerate() {
        if !tp.kappa_t.is_finite() {
            continue;
        }
        let column: Vec<f64> = (0..nk).map(|i| nm_grid[i][j]).collect();
        if column.iter().any(|v| v.is_nan()) {
            continue;
        }
        let flags: Vec<bool> = column.iter().map(|&v| v >= EPS_NM).collect();
        let flips = flags.windows(2).filter(|w| w[0] != w[1]).count();
        // The bisected threshold carries +- tol uncertainty.
        let tol = spec.threshold_tol;
        let consistent = match flips {
            0 => {
                // The transition lies off-grid.
                if flags[0] {
                    tp.kappa_t <= spec.kappa_grid[0] + tol
                } else {
                    tp.kappa_t > spec.kappa_grid[nk - 1] - tol
                }
            }
            1 => {
                let flip_at = flags.windows(2).position(|w| w[0] != w[1]).unwrap();
                !flags[0]
                    && spec.kappa_grid[flip_at] < tp.kappa_t + tol
                    && tp.kappa_t - tol <= spec.kappa_grid[flip_at + 1]
            }
            _ => false,
        };
        if !consistent {
            diagnostics.push(format!(
                "column lambda={}: NM sign pattern inconsistent with kappa_t={} \
                 ({} flips across the grid)",
                tp.lambda, tp.kappa_t, flips
            ));
        }
    }

    Ok(PhaseDiagram {
        kappa_axis: spec.kappa_grid.clone(),
        lambda_axis: spec.lambda_grid.clone(),
        nm_grid,
        threshold_curve,
        diagnostics,
    })
}
