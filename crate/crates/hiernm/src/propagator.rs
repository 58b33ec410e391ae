//! Exact propagator G(t) by partial-fraction inversion of the rational
//! Laplace transform, plus the memoryless and direct-coupling closed forms.
//!
//! Clearing the (p + lambda) factor, the transform is N(p)/D(p) with
//!
//! ```text
//! N(p) = p (p + lambda) + gamma lambda / 2
//! D(p) = p^3 + lambda p^2 + (kappa^2 + gamma lambda / 2) p + kappa^2 lambda
//! ```
//!
//! so G(t) is a sum of (at most three) complex exponentials, with a
//! t e^{pt} term when two poles merge.

use num_complex::Complex64;
use serde::Serialize;

use crate::cubic::{solve_cubic, Multiplicity};
use crate::error::{Error, Result};
use crate::model::PhysParams;

/// Tolerance on Re(p) <= 0 for pole stability.
pub const POLE_STABILITY_TOL: f64 = 1e-10;

/// Tolerance on the imaginary part of G(t).
pub const IMAG_TOL: f64 = 1e-9;

/// Tolerance on |G(t)| <= 1.
pub const MAGNITUDE_TOL: f64 = 1e-9;

/// Residues below this weight are treated as absent in tail analysis.
const RESIDUE_FLOOR: f64 = 1e-12;

/// One exponential mode r t^order e^{p t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    #[serde(serialize_with = "ser_c64")]
    pub exponent: Complex64,
    #[serde(serialize_with = "ser_c64")]
    pub residue: Complex64,
    /// 0 for a plain exponential, 1 for the confluent t e^{pt} term.
    pub order: u8,
}

fn ser_c64<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&c.re)?;
    seq.serialize_element(&c.im)?;
    seq.end()
}

/// G(t) as a sum of complex exponentials. All exponents satisfy
/// Re(p) <= 1e-10, the order-0 residues sum to 1 (G(0) = 1), and evaluation
/// at real t >= 0 is real to within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagatorModes {
    pub terms: Vec<Mode>,
}

impl PropagatorModes {
    /// Raw complex mode sum at time t.
    pub fn eval_complex(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|m| {
                let factor = if m.order == 0 { 1.0 } else { t };
                m.residue * factor * (m.exponent * t).exp()
            })
            .sum()
    }

    /// Sum of order-0 residues; equals G(0).
    pub fn residue_sum(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|m| m.order == 0)
            .map(|m| m.residue)
            .sum()
    }

    /// Upper bound on |G(t)|: the mode sum with every term replaced by its
    /// absolute value. Monotone non-increasing apart from the confluent
    /// t e^{pt} hump.
    pub fn envelope(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                let factor = if m.order == 0 { 1.0 } else { t };
                m.residue.norm() * factor.abs() * (m.exponent.re * t).exp()
            })
            .sum()
    }

    fn weighted(&self) -> impl Iterator<Item = &Mode> {
        self.terms
            .iter()
            .filter(|m| m.residue.norm() > RESIDUE_FLOOR)
    }

    /// Largest |Im p| over modes with non-negligible residue.
    pub fn max_oscillation(&self) -> f64 {
        self.weighted()
            .map(|m| m.exponent.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Coefficients [1, lambda, kappa^2 + gamma lambda / 2, kappa^2 lambda] of
/// the monic denominator cubic D(p).
pub fn denominator_coeffs(p: &PhysParams) -> Result<[f64; 4]> {
    let lambda = p.finite_lambda("denominator cubic undefined; use g_memoryless")?;
    let k2 = p.kappa() * p.kappa();
    Ok([1.0, lambda, k2 + 0.5 * p.gamma() * lambda, k2 * lambda])
}

fn numerator_at(z: Complex64, lambda: f64, gamma: f64) -> Complex64 {
    z * (z + lambda) + 0.5 * gamma * lambda
}

fn numerator_deriv_at(z: Complex64, lambda: f64) -> Complex64 {
    2.0 * z + lambda
}

fn denominator_deriv_at(z: Complex64, coeffs: &[f64; 4]) -> Complex64 {
    (3.0 * z + 2.0 * coeffs[1]) * z + coeffs[2]
}

/// Invert the Laplace transform into exponential modes.
///
/// kappa = 0 short-circuits to the exact single mode G(t) = 1: numerator and
/// denominator then share the factor p^2 + lambda p + gamma lambda / 2 and
/// the generic residue formula is 0/0. A double pole produces the confluent
/// pair r e^{qt} + s t e^{qt} from the order-2 expansion; a triple pole is
/// rejected (measure-zero parameter set).
pub fn laplace_invert(p: &PhysParams) -> Result<PropagatorModes> {
    let lambda = p.finite_lambda("Laplace inversion undefined; use g_memoryless")?;
    let gamma = p.gamma();

    if p.kappa() == 0.0 {
        return Ok(PropagatorModes {
            terms: vec![Mode {
                exponent: Complex64::new(0.0, 0.0),
                residue: Complex64::new(1.0, 0.0),
                order: 0,
            }],
        });
    }

    let coeffs = denominator_coeffs(p)?;
    let cubic = solve_cubic(coeffs)?;

    let terms = match cubic.multiplicity {
        Multiplicity::Triple => {
            return Err(Error::TripleRoot {
                kappa: p.kappa(),
                lambda,
                gamma,
            });
        }
        Multiplicity::Distinct => {
            let mut terms = Vec::with_capacity(3);
            let mut skip = [false; 3];
            for i in 0..3 {
                if skip[i] {
                    continue;
                }
                let root = cubic.roots[i];
                let residue =
                    numerator_at(root, lambda, gamma) / denominator_deriv_at(root, &coeffs);
                terms.push(Mode {
                    exponent: root,
                    residue,
                    order: 0,
                });
                if root.im != 0.0 {
                    // Conjugate partner gets the conjugate residue by
                    // construction.
                    for (j, other) in cubic.roots.iter().enumerate() {
                        if j != i && !skip[j] && (other - root.conj()).norm() == 0.0 {
                            terms.push(Mode {
                                exponent: root.conj(),
                                residue: residue.conj(),
                                order: 0,
                            });
                            skip[j] = true;
                            break;
                        }
                    }
                }
            }
            terms
        }
        Multiplicity::Double => {
            // roots[0] = roots[1] = q (merged), roots[2] = p3.
            let q = 0.5 * (cubic.roots[0] + cubic.roots[1]);
            let p3 = cubic.roots[2];
            let dq = q - p3;
            let n_q = numerator_at(q, lambda, gamma);
            let n3 = numerator_at(p3, lambda, gamma);
            // N(p)/((p-q)^2 (p-p3)):
            //   order-2 coefficient at q: N(q)/(q - p3)
            //   order-1 coefficient at q: d/dp [N(p)/(p - p3)] at q
            //   residue at p3:            N(p3)/(p3 - q)^2
            let b = n_q / dq;
            let a = (numerator_deriv_at(q, lambda) * dq - n_q) / (dq * dq);
            let c = n3 / (dq * dq);
            vec![
                Mode {
                    exponent: q,
                    residue: a,
                    order: 0,
                },
                Mode {
                    exponent: q,
                    residue: b,
                    order: 1,
                },
                Mode {
                    exponent: p3,
                    residue: c,
                    order: 0,
                },
            ]
        }
    };

    let modes = PropagatorModes { terms };

    // Construction-time invariants: stable poles and G(0) = 1.
    for m in &modes.terms {
        if m.exponent.re > POLE_STABILITY_TOL {
            return Err(Error::Internal {
                what: format!(
                    "unstable pole {} at kappa={}, lambda={}",
                    m.exponent,
                    p.kappa(),
                    lambda
                ),
            });
        }
    }
    let sum = modes.residue_sum();
    let weight: f64 = modes.terms.iter().map(|m| m.residue.norm()).sum();
    if (sum - Complex64::new(1.0, 0.0)).norm() > 1e-10 * weight.max(1.0) {
        return Err(Error::Internal {
            what: format!(
                "residue sum {sum} != 1 at kappa={}, lambda={}",
                p.kappa(),
                lambda
            ),
        });
    }

    Ok(modes)
}

/// Evaluate G(t) = Re sum_i r_i t^order e^{p_i t}, verifying that the
/// imaginary part is below 1e-9 and the magnitude below 1 + 1e-9.
pub fn g_of_t(modes: &PropagatorModes, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    let val = modes.eval_complex(t);
    if val.im.abs() >= IMAG_TOL {
        return Err(Error::Internal {
            what: format!("imaginary leakage Im G({t}) = {}", val.im),
        });
    }
    if val.re.abs() > 1.0 + MAGNITUDE_TOL {
        return Err(Error::Internal {
            what: format!("|G({t})| = {} exceeds 1", val.re.abs()),
        });
    }
    Ok(val.re)
}

/// Closed-form G(t) for the memoryless reservoir (lambda -> infinity):
///
/// ```text
/// G(t) = e^{-gamma t/4} [ (gamma/a) sinh(a t/4) + cosh(a t/4) ],
/// a = sqrt(gamma^2 - 16 kappa^2)
/// ```
///
/// with the a -> 0 limit e^{-gamma t/4}(1 + gamma t/4) at kappa = gamma/4
/// and the trigonometric form for kappa > gamma/4. The hyperbolic branch is
/// evaluated as a sum of two decaying exponentials so large t cannot
/// overflow.
pub fn g_memoryless(kappa: f64, gamma: f64, t: f64) -> f64 {
    let disc = gamma * gamma - 16.0 * kappa * kappa;
    if disc.abs() <= 1e-10 * gamma * gamma {
        return (-0.25 * gamma * t).exp() * (1.0 + 0.25 * gamma * t);
    }
    if disc > 0.0 {
        let a = disc.sqrt();
        let up = (0.25 * (a - gamma) * t).exp();
        let down = (-0.25 * (a + gamma) * t).exp();
        0.5 * ((1.0 + gamma / a) * up + (1.0 - gamma / a) * down)
    } else {
        let a = (-disc).sqrt();
        let x = 0.25 * a * t;
        (-0.25 * gamma * t).exp() * ((gamma / a) * x.sin() + x.cos())
    }
}

/// G(t) for the comparison model of a qubit coupled directly to the
/// reservoir (no cavity), with kernel kappa^2 e^{-lambda |t-s|}:
/// G'' + lambda G' + kappa^2 G = 0, G(0) = 1, G'(0) = 0.
pub fn g_direct_model(kappa: f64, lambda: f64, t: f64) -> f64 {
    let disc = lambda * lambda - 4.0 * kappa * kappa;
    if disc.abs() <= 1e-10 * lambda * lambda {
        return (-0.5 * lambda * t).exp() * (1.0 + 0.5 * lambda * t);
    }
    if disc > 0.0 {
        let d = disc.sqrt();
        let up = (0.5 * (d - lambda) * t).exp();
        let down = (-0.5 * (d + lambda) * t).exp();
        0.5 * ((1.0 + lambda / d) * up + (1.0 - lambda / d) * down)
    } else {
        let d = (-disc).sqrt();
        let x = 0.5 * d * t;
        (-0.5 * lambda * t).exp() * ((lambda / d) * x.sin() + x.cos())
    }
}

/// Asymptotic character of |G(t)| as t -> infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// The slowest-decaying mode is real: |G| is eventually monotone.
    Monotone,
    /// The slowest-decaying modes are a conjugate pair: G keeps changing
    /// sign at frequency `omega` under the decay rate `rate` (= -Re p), so
    /// |G| keeps bouncing off zero.
    Oscillatory { rate: f64, omega: f64 },
}

/// A G(t) evaluator for any of the three model variants, with the decay
/// envelope and tail analysis the non-Markovianity layer needs.
#[derive(Debug, Clone)]
pub enum Propagator {
    Hierarchical(PropagatorModes),
    Memoryless { kappa: f64, gamma: f64 },
    Direct { kappa: f64, lambda: f64 },
}

impl Propagator {
    /// The hierarchical-model propagator for finite lambda, the memoryless
    /// closed form for the infinite sentinel.
    pub fn for_params(p: &PhysParams) -> Result<Self> {
        match p.lambda().finite() {
            Some(_) => Ok(Propagator::Hierarchical(laplace_invert(p)?)),
            None => Ok(Propagator::Memoryless {
                kappa: p.kappa(),
                gamma: p.gamma(),
            }),
        }
    }

    /// The direct-coupling comparison model.
    pub fn direct(kappa: f64, lambda: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0 && lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "direct model needs kappa > 0 and lambda > 0, got kappa={kappa}, lambda={lambda}"
            )));
        }
        Ok(Propagator::Direct { kappa, lambda })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Propagator::Hierarchical(modes) => g_of_t(modes, t),
            Propagator::Memoryless { kappa, gamma } => Ok(g_memoryless(*kappa, *gamma, t)),
            Propagator::Direct { kappa, lambda } => Ok(g_direct_model(*kappa, *lambda, t)),
        }
    }

    /// G(t) without the imaginary-part and magnitude assertions, for tight
    /// refinement loops over ranges the checked sampling already covered.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            Propagator::Hierarchical(modes) => modes.eval_complex(t).re,
            Propagator::Memoryless { kappa, gamma } => g_memoryless(*kappa, *gamma, t),
            Propagator::Direct { kappa, lambda } => g_direct_model(*kappa, *lambda, t),
        }
    }

    /// Upper bound on |G(t)|, decaying in t (apart from a possible early
    /// confluent hump).
    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            Propagator::Hierarchical(modes) => modes.envelope(t),
            Propagator::Memoryless { kappa, gamma } => {
                let disc = gamma * gamma - 16.0 * kappa * kappa;
                if disc.abs() <= 1e-10 * gamma * gamma {
                    (-0.25 * gamma * t).exp() * (1.0 + 0.25 * gamma * t)
                } else if disc > 0.0 {
                    let a = disc.sqrt();
                    0.5 * ((1.0 + gamma / a) * (0.25 * (a - gamma) * t).exp()
                        + (1.0 - gamma / a).abs() * (-0.25 * (a + gamma) * t).exp())
                } else {
                    let a = (-disc).sqrt();
                    (-0.25 * gamma * t).exp() * (1.0 + gamma / a)
                }
            }
            Propagator::Direct { kappa, lambda } => {
                let disc = lambda * lambda - 4.0 * kappa * kappa;
                if disc.abs() <= 1e-10 * lambda * lambda {
                    (-0.5 * lambda * t).exp() * (1.0 + 0.5 * lambda * t)
                } else if disc > 0.0 {
                    let d = disc.sqrt();
                    0.5 * ((1.0 + lambda / d) * (0.5 * (d - lambda) * t).exp()
                        + (1.0 - lambda / d).abs() * (-0.5 * (d + lambda) * t).exp())
                } else {
                    let d = (-disc).sqrt();
                    (-0.5 * lambda * t).exp() * (1.0 + lambda / d)
                }
            }
        }
    }

    /// Fastest oscillation rate (rad per unit time) present in G; zero for
    /// purely decaying solutions. Used to pick the sampling resolution.
    pub fn oscillation_rate(&self) -> f64 {
        match self {
            Propagator::Hierarchical(modes) => modes.max_oscillation(),
            Propagator::Memoryless { kappa, gamma } => {
                let disc = gamma * gamma - 16.0 * kappa * kappa;
                if disc < -1e-10 * gamma * gamma {
                    0.25 * (-disc).sqrt()
                } else {
                    0.0
                }
            }
            Propagator::Direct { kappa, lambda } => {
                let disc = lambda * lambda - 4.0 * kappa * kappa;
                if disc < -1e-10 * lambda * lambda {
                    0.5 * (-disc).sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn tail(&self) -> TailKind {
        match self {
            Propagator::Hierarchical(modes) => {
                let weighted: Vec<&Mode> = modes.weighted().collect();
                if weighted.is_empty() {
                    return TailKind::Monotone;
                }
                let sigma = weighted
                    .iter()
                    .map(|m| m.exponent.re)
                    .fold(f64::NEG_INFINITY, f64::max);
                let tol = 1e-12 * sigma.abs().max(1.0);
                let omega = weighted
                    .iter()
                    .filter(|m| m.exponent.re >= sigma - tol)
                    .map(|m| m.exponent.im.abs())
                    .fold(0.0, f64::max);
                if omega > 1e-9 {
                    TailKind::Oscillatory {
                        rate: -sigma,
                        omega,
                    }
                } else {
                    TailKind::Monotone
                }
            }
            Propagator::Memoryless { kappa, gamma } => {
                let disc = gamma * gamma - 16.0 * kappa * kappa;
                if disc < -1e-10 * gamma * gamma {
                    TailKind::Oscillatory {
                        rate: 0.25 * gamma,
                        omega: 0.25 * (-disc).sqrt(),
                    }
                } else {
                    TailKind::Monotone
                }
            }
            Propagator::Direct { kappa, lambda } => {
                let disc = lambda * lambda - 4.0 * kappa * kappa;
                if disc < -1e-10 * lambda * lambda {
                    TailKind::Oscillatory {
                        rate: 0.5 * lambda,
                        omega: 0.5 * (-disc).sqrt(),
                    }
                } else {
                    TailKind::Monotone
                }
            }
        }
    }

    /// First zero of G strictly after `t_from`, for oscillatory tails.
    ///
    /// Sign changes of G stay numerically well-conditioned arbitrarily far
    /// into the tail because the decay factor never flips sign: the closed
    /// forms locate zeros of the trigonometric bracket, and the mode sum is
    /// rescaled by e^{-sigma t} before sign-scanning so nothing underflows.
    pub fn first_zero_after(&self, t_from: f64) -> Option<f64> {
        match self {
            Propagator::Memoryless { kappa, gamma } => {
                let disc = gamma * gamma - 16.0 * kappa * kappa;
                if disc >= -1e-10 * gamma * gamma {
                    return None;
                }
                let a = (-disc).sqrt();
                // zeros at a t/4 = k pi - arctan(a/gamma)
                let phase = (a / gamma).atan();
                let k_min = ((a * t_from / 4.0 + phase) / std::f64::consts::PI).floor() as i64 + 1;
                let k = k_min.max(1);
                Some(4.0 * (k as f64 * std::f64::consts::PI - phase) / a)
            }
            Propagator::Direct { kappa, lambda } => {
                let disc = lambda * lambda - 4.0 * kappa * kappa;
                if disc >= -1e-10 * lambda * lambda {
                    return None;
                }
                let d = (-disc).sqrt();
                let phase = (d / lambda).atan();
                let k_min = ((d * t_from / 2.0 + phase) / std::f64::consts::PI).floor() as i64 + 1;
                let k = k_min.max(1);
                Some(2.0 * (k as f64 * std::f64::consts::PI - phase) / d)
            }
            Propagator::Hierarchical(modes) => {
                let TailKind::Oscillatory { rate, omega } = self.tail() else {
                    return None;
                };
                let sigma = -rate;
                // Rescaled, sign-preserving mode sum.
                let rescaled = |t: f64| -> f64 {
                    modes
                        .terms
                        .iter()
                        .map(|m| {
                            let factor = if m.order == 0 { 1.0 } else { t };
                            m.residue * factor * ((m.exponent - sigma) * t).exp()
                        })
                        .sum::<Complex64>()
                        .re
                };
                // Past the amplitude crossover every half-period brackets a
                // sign change; find where the subdominant modes fall below
                // the dominant pair's amplitude.
                let pair_amp: f64 = modes
                    .weighted()
                    .filter(|m| m.exponent.re >= sigma - 1e-12 * sigma.abs().max(1.0))
                    .map(|m| m.residue.norm())
                    .sum();
                let mut t_start = t_from.max(0.0);
                let others = |t: f64| -> f64 {
                    modes
                        .weighted()
                        .filter(|m| m.exponent.re < sigma - 1e-12 * sigma.abs().max(1.0))
                        .map(|m| {
                            let factor = if m.order == 0 { 1.0 } else { t };
                            m.residue.norm() * factor.abs() * ((m.exponent.re - sigma) * t).exp()
                        })
                        .sum()
                };
                for m in modes.weighted() {
                    if m.exponent.re < sigma - 1e-12 * sigma.abs().max(1.0) {
                        let ratio = m.residue.norm() / (0.5 * pair_amp);
                        if ratio > 1.0 {
                            let crossover = ratio.ln() / (sigma - m.exponent.re);
                            t_start = t_start.max(crossover);
                        }
                    }
                }
                for _ in 0..100_000 {
                    if others(t_start) <= 0.5 * pair_amp {
                        break;
                    }
                    t_start += std::f64::consts::PI / omega;
                }
                let step = std::f64::consts::PI / (8.0 * omega);
                let mut t0 = t_start;
                let mut f0 = rescaled(t0);
                for _ in 0..64 {
                    let t1 = t0 + step;
                    let f1 = rescaled(t1);
                    if f0 == 0.0 {
                        return Some(t0);
                    }
                    if f0 * f1 < 0.0 {
                        let (mut a, mut b) = (t0, t1);
                        let mut fa = f0;
                        for _ in 0..80 {
                            let mid = 0.5 * (a + b);
                            let fm = rescaled(mid);
                            if fa * fm <= 0.0 {
                                b = mid;
                            } else {
                                a = mid;
                                fa = fm;
                            }
                            if b - a < 1e-12 * (1.0 + b.abs()) {
                                break;
                            }
                        }
                        return Some(0.5 * (a + b));
                    }
                    t0 = t1;
                    f0 = f1;
                }
                None
            }
        }
    }
}
