//! Qubit density matrices, the propagator-driven evolution map, and both
//! trace-distance routes.
//!
//! A 2x2 density matrix is stored as (ee, eg) only; gg = 1 - ee and
//! ge = conj(eg) are derived, so Hermiticity and unit trace hold by
//! construction and cannot be violated.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute positivity slack: double-precision round-off on 2x2 algebra.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Slack on |g| <= 1 for propagator values entering the evolution map.
pub const PROPAGATOR_TOL: f64 = 1e-9;

/// Qubit state (ee, eg) with 0 <= ee <= 1 and |eg|^2 <= ee(1 - ee) + tol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMatrix2 {
    ee: f64,
    #[serde(with = "complex_parts")]
    eg: Complex64,
}

mod complex_parts {
    use num_complex::Complex64;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(c: &Complex64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("Complex", 2)?;
        s.serialize_field("re", &c.re)?;
        s.serialize_field("im", &c.im)?;
        s.end()
    }
}

impl DensityMatrix2 {
    pub fn new(ee: f64, eg: Complex64) -> Result<Self> {
        if !ee.is_finite() || !eg.re.is_finite() || !eg.im.is_finite() {
            return Err(Error::NonFinite {
                what: "density matrix element",
            });
        }
        if !(0.0..=1.0).contains(&ee) {
            return Err(Error::InvalidParams(format!(
                "excited population must lie in [0, 1], got {ee}"
            )));
        }
        if eg.norm_sqr() > ee * (1.0 - ee) + POSITIVITY_TOL {
            return Err(Error::InvalidParams(format!(
                "positivity violated: |eg|^2 = {} > ee(1-ee) = {}",
                eg.norm_sqr(),
                ee * (1.0 - ee)
            )));
        }
        Ok(Self { ee, eg })
    }

    /// |e><e|
    pub fn excited() -> Self {
        Self {
            ee: 1.0,
            eg: Complex64::new(0.0, 0.0),
        }
    }

    /// |g><g|
    pub fn ground() -> Self {
        Self {
            ee: 0.0,
            eg: Complex64::new(0.0, 0.0),
        }
    }

    /// |+><+| with |+> = (|e> + |g>)/sqrt(2)
    pub fn plus() -> Self {
        Self {
            ee: 0.5,
            eg: Complex64::new(0.5, 0.0),
        }
    }

    /// |-><-| with |-> = (|e> - |g>)/sqrt(2)
    pub fn minus() -> Self {
        Self {
            ee: 0.5,
            eg: Complex64::new(-0.5, 0.0),
        }
    }

    /// Pure state cos(theta/2)|e> + e^{i phi} sin(theta/2)|g> as a projector.
    pub fn pure(theta: f64, phi: f64) -> Self {
        let c = (0.5 * theta).cos();
        let s = (0.5 * theta).sin();
        Self {
            ee: c * c,
            // <e|rho|g> = c * s * e^{-i phi}
            eg: Complex64::from_polar(c * s, -phi),
        }
    }

    pub fn ee(&self) -> f64 {
        self.ee
    }

    pub fn eg(&self) -> Complex64 {
        self.eg
    }

    pub fn gg(&self) -> f64 {
        1.0 - self.ee
    }

    pub fn ge(&self) -> Complex64 {
        self.eg.conj()
    }
}

/// Propagate a qubit state by a (complex) propagator value g:
/// ee -> ee |g|^2, eg -> eg g.
///
/// Positivity is preserved whenever |g| <= 1; magnitudes above 1 + 1e-9 are
/// rejected as unphysical.
pub fn evolve_qubit(rho0: DensityMatrix2, g: Complex64) -> Result<DensityMatrix2> {
    let mag = g.norm();
    if !mag.is_finite() {
        return Err(Error::NonFinite { what: "propagator" });
    }
    if mag > 1.0 + PROPAGATOR_TOL {
        return Err(Error::UnphysicalPropagator { magnitude: mag });
    }
    DensityMatrix2::new(rho0.ee * mag * mag, rho0.eg * g)
}

/// Trace distance D = (1/2) Tr |rho1 - rho2| from the eigenvalues of the
/// Hermitian difference matrix.
///
/// The difference is [[da, db], [conj(db), -da]] with eigenvalues
/// +-sqrt(da^2 + |db|^2), so D = (|mu1| + |mu2|)/2.
pub fn trace_distance(rho1: DensityMatrix2, rho2: DensityMatrix2) -> f64 {
    let da = rho1.ee - rho2.ee;
    let db = rho1.eg - rho2.eg;
    let mu = (da * da + db.norm_sqr()).sqrt();
    0.5 * (mu.abs() + (-mu).abs())
}

/// Model-specific trace distance of the two evolved states,
/// D = |g| sqrt(|g|^2 da^2 + |db|^2), where da and db are the initial
/// population and coherence differences.
///
/// Agrees with [`trace_distance`] applied to the two evolved states.
pub fn trace_distance_model(g: Complex64, delta_a: f64, delta_b: Complex64) -> f64 {
    let m2 = g.norm_sqr();
    m2.sqrt() * (m2 * delta_a * delta_a + delta_b.norm_sqr()).sqrt()
}
