//! Model parameters and the reservoir's spectral/correlation functions.
//!
//! Everything downstream is expressed in units of the reservoir decay scale
//! `gamma`: rates in gamma, times in 1/gamma. The resonance frequency
//! `omega0` is carried for bookkeeping only; it drops out of the reduced
//! dynamics in the interaction picture.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reservoir spectral width. `Infinite` is an explicit sentinel for the
/// memoryless reservoir (correlation time 1/lambda -> 0), not a large float:
/// it routes callers to the exact closed form instead of an ill-conditioned
/// cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralWidth {
    Finite(f64),
    Infinite,
}

impl SpectralWidth {
    pub fn is_infinite(self) -> bool {
        matches!(self, SpectralWidth::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            SpectralWidth::Finite(v) => Some(v),
            SpectralWidth::Infinite => None,
        }
    }

    /// Accepts a positive decimal or the literal `inf`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(SpectralWidth::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParams(format!("cannot parse spectral width `{s}`")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(SpectralWidth::Infinite);
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParams(format!(
                "spectral width must be positive or `inf`, got {v}"
            )));
        }
        Ok(SpectralWidth::Finite(v))
    }
}

impl fmt::Display for SpectralWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralWidth::Finite(v) => write!(f, "{v}"),
            SpectralWidth::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for SpectralWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpectralWidth::parse(s)
    }
}

// JSON has no Infinity literal; the sentinel serializes as the string "inf"
// and finite widths as plain numbers.
impl Serialize for SpectralWidth {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpectralWidth::Finite(v) => ser.serialize_f64(*v),
            SpectralWidth::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SpectralWidth {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => SpectralWidth::parse(&v.to_string()).map_err(de::Error::custom),
            Raw::Str(s) => SpectralWidth::parse(&s).map_err(de::Error::custom),
        }
    }
}

/// The three rates defining one model instance, plus the (informational)
/// resonance frequency.
///
/// * `kappa`: qubit-cavity coupling, in units of gamma.
/// * `lambda`: reservoir spectral width; the reservoir memory time is
///   1/lambda. May be the `Infinite` sentinel.
/// * `gamma`: reservoir decay scale; sets the unit system (default 1).
/// * `omega0`: shared resonance frequency of qubit and cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysParams {
    kappa: f64,
    lambda: SpectralWidth,
    gamma: f64,
    omega0: f64,
}

impl PhysParams {
    pub fn new(kappa: f64, lambda: SpectralWidth, gamma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma must be finite and > 0, got {gamma}"
            )));
        }
        if let SpectralWidth::Finite(l) = lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "lambda must be finite and > 0 (or the inf sentinel), got {l}"
                )));
            }
        }
        Ok(Self {
            kappa,
            lambda,
            gamma,
            omega0: 0.0,
        })
    }

    /// Convenience constructor in gamma = 1 units.
    pub fn in_gamma_units(kappa: f64, lambda: SpectralWidth) -> Result<Self> {
        Self::new(kappa, lambda, 1.0)
    }

    pub fn with_omega0(mut self, omega0: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "omega0 must be finite, got {omega0}"
            )));
        }
        self.omega0 = omega0;
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> SpectralWidth {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// The finite spectral width, or an error pointing at the memoryless
    /// closed form.
    pub(crate) fn finite_lambda(&self, context: &'static str) -> Result<f64> {
        self.lambda.finite().ok_or(Error::InfiniteWidth { context })
    }
}

/// Uniform time grid: times are 0, dt, ..., n*dt = t_max (n + 1 samples).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    /// Builds the grid with `n = round(t_max/dt)` steps, re-deriving `dt`
    /// so that `n * dt = t_max` holds exactly in the stored fields.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dt must be finite and > 0, got {dt}"
            )));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "t_max must be finite and > 0, got {t_max}"
            )));
        }
        let n = (t_max / dt).round().max(2.0) as usize;
        Ok(Self {
            t_max,
            dt: t_max / n as f64,
            n,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid holds `n + 1` samples.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = self.dt;
        (0..=self.n).map(move |i| i as f64 * dt)
    }
}

/// Lorentzian spectral density of the reservoir,
/// J(omega) = (gamma / 2 pi) lambda^2 / ((omega0 - omega)^2 + lambda^2).
///
/// Undefined for the infinite-width sentinel (the kernel degenerates to a
/// delta function and the spectrum is flat).
pub fn lorentzian_spectrum(omega: f64, p: &PhysParams) -> Result<f64> {
    let lambda = p.finite_lambda("spectrum undefined; the memoryless kernel is delta-like")?;
    if !omega.is_finite() {
        return Err(Error::NonFinite { what: "omega" });
    }
    let detune = p.omega0 - omega;
    Ok(p.gamma / (2.0 * PI) * lambda * lambda / (detune * detune + lambda * lambda))
}

/// Reservoir correlation function alpha(t, s) = (gamma lambda / 2)
/// e^{-lambda |t - s|}, as a function of the time difference. Even in
/// `delta_t`; integrates to gamma over the whole line.
pub fn correlation_kernel(delta_t: f64, p: &PhysParams) -> Result<f64> {
    let lambda =
        p.finite_lambda("correlation kernel is a delta function; use the memoryless closed form")?;
    if !delta_t.is_finite() {
        return Err(Error::NonFinite { what: "delta_t" });
    }
    Ok(0.5 * p.gamma * lambda * (-lambda * delta_t.abs()).exp())
}
