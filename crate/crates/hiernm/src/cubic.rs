//! Closed-form cubic root solver with Newton polishing.
//!
//! Real coefficients only, which is all the propagator denominator needs.
//! Complex roots therefore come in conjugate pairs; the pair is symmetrized
//! by construction (one member is polished, the other is its conjugate).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for declaring two roots equal.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Multiplicity {
    Distinct,
    Double,
    Triple,
}

/// Roots of a monic cubic, with their multiplicity class and the tolerance
/// used to decide it. For `Double`, the repeated pair occupies `roots[0]`
/// and `roots[1]`.
#[derive(Debug, Clone)]
pub struct CubicRoots {
    pub roots: [Complex64; 3],
    pub multiplicity: Multiplicity,
    pub tolerance: f64,
}

fn eval_monic(a: f64, b: f64, c: f64, z: Complex64) -> Complex64 {
    ((z + a) * z + b) * z + c
}

fn eval_monic_deriv(a: f64, b: f64, z: Complex64) -> Complex64 {
    (3.0 * z + 2.0 * a) * z + b
}

/// Two (or more) Newton steps on the monic cubic. A vanishing derivative
/// means the start is already at a multiple root; polishing stops there.
fn polish(a: f64, b: f64, c: f64, mut z: Complex64) -> Complex64 {
    let scale = 1.0f64.max(a.abs()).max(b.abs()).max(c.abs());
    for _ in 0..4 {
        let d = eval_monic_deriv(a, b, z);
        if d.norm() < 1e-14 * scale.max(z.norm_sqr()) {
            break;
        }
        let step = eval_monic(a, b, c, z) / d;
        z -= step;
        if step.norm() < 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Solve `coeffs[0] x^3 + coeffs[1] x^2 + coeffs[2] x + coeffs[3] = 0`.
///
/// Closed-form (trigonometric for three real roots, Cardano otherwise)
/// evaluation of the depressed cubic, followed by Newton polishing of each
/// root on the original cubic and conjugate symmetrization of the complex
/// pair. Multiplicity is classified with relative tolerance 1e-8.
pub fn solve_cubic(coeffs: [f64; 4]) -> Result<CubicRoots> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite {
            what: "cubic coefficient",
        });
    }
    if coeffs[0] == 0.0 {
        return Err(Error::InvalidParams(
            "leading cubic coefficient must be nonzero".into(),
        ));
    }
    let a = coeffs[1] / coeffs[0];
    let b = coeffs[2] / coeffs[0];
    let c = coeffs[3] / coeffs[0];

    // Depressed form y^3 + p y + q with x = y - a/3.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;

    let mut roots: [Complex64; 3];
    let half_q = 0.5 * q;
    let disc = half_q * half_q + p * p * p / 27.0; // sign opposite to the usual discriminant

    let scale = 1.0f64.max(p.abs()).max(q.abs());
    if p == 0.0 && q == 0.0 {
        let r = Complex64::new(shift, 0.0);
        roots = [r, r, r];
    } else if disc > 1e-14 * scale * scale {
        // One real root, one conjugate pair (Cardano).
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        let y_real = u + v;
        let re = -0.5 * y_real;
        let im = 0.5 * 3.0f64.sqrt() * (u - v);
        roots = [
            Complex64::new(y_real + shift, 0.0),
            Complex64::new(re + shift, im),
            Complex64::new(re + shift, -im),
        ];
    } else if disc < -1e-14 * scale * scale {
        // Three distinct real roots (trigonometric form; p < 0 here).
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        roots = [
            Complex64::new(m * theta.cos() + shift, 0.0),
            Complex64::new(m * (theta - two_pi_3).cos() + shift, 0.0),
            Complex64::new(m * (theta + two_pi_3).cos() + shift, 0.0),
        ];
    } else {
        // Borderline discriminant: a repeated real root.
        // y^3 + p y + q = (y - y1)^2 (y - y2) with y1 = 3q/(2p)... derived
        // from q = -2 y1^3, p = -3 y1^2 when disc = 0: y1 = -3q/(2p) works
        // for p != 0.
        if p.abs() < 1e-14 * scale {
            let r = Complex64::new((-q).cbrt() + shift, 0.0);
            roots = [r, r, r];
        } else {
            let y1 = -3.0 * q / (2.0 * p);
            let y2 = -2.0 * y1;
            roots = [
                Complex64::new(y1 + shift, 0.0),
                Complex64::new(y1 + shift, 0.0),
                Complex64::new(y2 + shift, 0.0),
            ];
        }
    }

    for r in roots.iter_mut() {
        *r = polish(a, b, c, *r);
    }

    // Conjugate symmetrization: keep the better-polished member of the pair.
    let complex_idx: Vec<usize> = (0..3).filter(|&i| roots[i].im.abs() > 0.0).collect();
    if complex_idx.len() == 2 {
        let (i, j) = (complex_idx[0], complex_idx[1]);
        let keep = if eval_monic(a, b, c, roots[i]).norm() <= eval_monic(a, b, c, roots[j]).norm() {
            roots[i]
        } else {
            roots[j].conj()
        };
        roots[i] = keep;
        roots[j] = keep.conj();
    }

    // Multiplicity classification at relative tolerance MULTIPLICITY_TOL.
    let root_scale = 1.0f64.max(roots.iter().map(|r| r.norm()).fold(0.0, f64::max));
    let tol = MULTIPLICITY_TOL * root_scale;
    let d01 = (roots[0] - roots[1]).norm();
    let d02 = (roots[0] - roots[2]).norm();
    let d12 = (roots[1] - roots[2]).norm();
    let close = [d01 <= tol, d02 <= tol, d12 <= tol];
    let multiplicity = match close.iter().filter(|&&c| c).count() {
        0 => Multiplicity::Distinct,
        1 => {
            // reorder so the repeated pair sits in roots[0..2]
            if close[1] {
                roots.swap(1, 2);
            } else if close[2] {
                roots.swap(0, 2);
            }
            Multiplicity::Double
        }
        _ => Multiplicity::Triple,
    };

    Ok(CubicRoots {
        roots,
        multiplicity,
        tolerance: tol,
    })
}

impl CubicRoots {
    /// Max residual of the monic cubic over the three roots, for oracle
    /// checks against the coefficient scale.
    pub fn max_residual(&self, coeffs: [f64; 4]) -> f64 {
        let a = coeffs[1] / coeffs[0];
        let b = coeffs[2] / coeffs[0];
        let c = coeffs[3] / coeffs[0];
        self.roots
            .iter()
            .map(|&r| eval_monic(a, b, c, r).norm())
            .fold(0.0, f64::max)
    }
}
