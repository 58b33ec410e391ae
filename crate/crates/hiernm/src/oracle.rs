//! Independent brute-force oracle for G(t): direct integration of the
//! single-excitation amplitude equations.
//!
//! The memoryful equation for the cavity amplitude,
//!
//! ```text
//! B' = -i kappa A - int_0^t alpha(t - tau) B(tau) dtau,
//! ```
//!
//! is rewritten exactly (the kernel is exponential) with the auxiliary
//! memory integral z(t) = int_0^t e^{-lambda (t-s)} B(s) ds:
//!
//! ```text
//! A' = -i kappa B,   B' = -i kappa A - (gamma lambda / 2) z,   z' = B - lambda z,
//! ```
//!
//! avoiding the O(n^2) Volterra quadrature. For the memoryless reservoir the
//! limit is local damping: B' = -i kappa A - (gamma/2) B. Starting from
//! A(0) = 1, B(0) = z(0) = 0, the qubit amplitude A(t) equals G(t).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{PhysParams, TimeGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitudes of the single-excitation sector: the excited-qubit amplitude,
/// the cavity single-photon amplitude, and the auxiliary memory integral
/// standing in for the aggregated reservoir amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub a_amp: Complex64,
    pub b_amp: Complex64,
    pub z_mem: Complex64,
}

impl AmplitudeState {
    /// Initial condition A(0) = 1, B(0) = z(0) = 0 defining G(t).
    pub fn initial() -> Self {
        Self {
            a_amp: Complex64::new(1.0, 0.0),
            b_amp: Complex64::new(0.0, 0.0),
            z_mem: Complex64::new(0.0, 0.0),
        }
    }

    fn scaled_add(&self, h: f64, other: &AmplitudeState) -> Self {
        Self {
            a_amp: self.a_amp + h * other.a_amp,
            b_amp: self.b_amp + h * other.b_amp,
            z_mem: self.z_mem + h * other.z_mem,
        }
    }
}

/// Right-hand side of the finite-width amplitude equations.
pub fn rhs(s: &AmplitudeState, p: &PhysParams) -> Result<AmplitudeState> {
    let lambda = p.finite_lambda("use rhs_memoryless for the memoryless reservoir")?;
    let kappa = p.kappa();
    Ok(AmplitudeState {
        a_amp: -I * kappa * s.b_amp,
        b_amp: -I * kappa * s.a_amp - 0.5 * p.gamma() * lambda * s.z_mem,
        z_mem: s.b_amp - lambda * s.z_mem,
    })
}

/// Right-hand side in the memoryless limit (lambda -> infinity): the memory
/// integral collapses to Markovian cavity damping at rate gamma/2. The
/// auxiliary variable is unused and stays zero.
pub fn rhs_memoryless(s: &AmplitudeState, p: &PhysParams) -> Result<AmplitudeState> {
    if !p.lambda().is_infinite() {
        return Err(Error::FiniteWidth);
    }
    let kappa = p.kappa();
    Ok(AmplitudeState {
        a_amp: -I * kappa * s.b_amp,
        b_amp: -I * kappa * s.a_amp - 0.5 * p.gamma() * s.b_amp,
        z_mem: Complex64::new(0.0, 0.0),
    })
}

fn rk4_step<F>(s: &AmplitudeState, dt: f64, f: F) -> Result<AmplitudeState>
where
    F: Fn(&AmplitudeState) -> Result<AmplitudeState>,
{
    let k1 = f(s)?;
    let k2 = f(&s.scaled_add(0.5 * dt, &k1))?;
    let k3 = f(&s.scaled_add(0.5 * dt, &k2))?;
    let k4 = f(&s.scaled_add(dt, &k3))?;
    Ok(AmplitudeState {
        a_amp: s.a_amp + dt / 6.0 * (k1.a_amp + 2.0 * k2.a_amp + 2.0 * k3.a_amp + k4.a_amp),
        b_amp: s.b_amp + dt / 6.0 * (k1.b_amp + 2.0 * k2.b_amp + 2.0 * k3.b_amp + k4.b_amp),
        z_mem: s.z_mem + dt / 6.0 * (k1.z_mem + 2.0 * k2.z_mem + 2.0 * k3.z_mem + k4.z_mem),
    })
}

/// Integrate the full state over the grid with the classic fourth-order
/// single-step method. Returns n + 1 states, the first being the initial
/// condition.
pub fn integrate_states(p: &PhysParams, grid: &TimeGrid) -> Result<Vec<AmplitudeState>> {
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.n() + 1);
    let mut state = AmplitudeState::initial();
    out.push(state);
    if p.lambda().is_infinite() {
        for _ in 0..grid.n() {
            state = rk4_step(&state, dt, |s| rhs_memoryless(s, p))?;
            out.push(state);
        }
    } else {
        for _ in 0..grid.n() {
            state = rk4_step(&state, dt, |s| rhs(s, p))?;
            out.push(state);
        }
    }
    Ok(out)
}

/// The qubit amplitude A(t) = G(t) on the grid.
pub fn integrate(p: &PhysParams, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    Ok(integrate_states(p, grid)?
        .into_iter()
        .map(|s| s.a_amp)
        .collect())
}

/// Default oracle grid: dt = 1e-3/gamma, tightened to 1e-4/gamma for
/// lambda > 100 gamma where the memory variable makes the system stiff
/// (the explicit stability bound scales with 1/lambda).
pub fn default_grid(p: &PhysParams, t_max: f64) -> Result<TimeGrid> {
    let stiff = matches!(p.lambda().finite(), Some(l) if l > 100.0 * p.gamma());
    let dt = if stiff { 1e-4 } else { 1e-3 } / p.gamma();
    TimeGrid::new(t_max, dt)
}

/// Total excitation weight that has leaked into the reservoir continuum:
/// 1 - |A|^2 - |B|^2. Errors outside [-1e-8, 1 + 1e-8].
pub fn reservoir_population(s: &AmplitudeState) -> Result<f64> {
    let pop = 1.0 - s.a_amp.norm_sqr() - s.b_amp.norm_sqr();
    if !(-1e-8..=1.0 + 1e-8).contains(&pop) {
        return Err(Error::NormConservation { value: pop });
    }
    Ok(pop)
}

/// Step-halving convergence ratio max|A_dt - A_dt/2| / max|A_dt/2 - A_dt/4|
/// on [0, t_max]; approximately 16 for a fourth-order method. Errors when
/// the ratio leaves [8, 32].
pub fn step_halving_ratio(p: &PhysParams, t_max: f64, dt: f64) -> Result<f64> {
    let coarse = integrate(p, &TimeGrid::new(t_max, dt)?)?;
    let mid = integrate(p, &TimeGrid::new(t_max, dt / 2.0)?)?;
    let fine = integrate(p, &TimeGrid::new(t_max, dt / 4.0)?)?;
    let diff_cm: f64 = coarse
        .iter()
        .enumerate()
        .map(|(i, a)| (a - mid[2 * i]).norm())
        .fold(0.0, f64::max);
    let diff_mf: f64 = mid
        .iter()
        .enumerate()
        .map(|(i, a)| (a - fine[2 * i]).norm())
        .fold(0.0, f64::max);
    let ratio = diff_cm / diff_mf;
    if !(8.0..=32.0).contains(&ratio) {
        return Err(Error::IntegratorOrder { ratio });
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpectralWidth;
    use crate::propagator::g_memoryless;

    fn params(kappa: f64, lambda: f64) -> PhysParams {
        PhysParams::in_gamma_units(kappa, SpectralWidth::Finite(lambda)).unwrap()
    }

    fn memoryless(kappa: f64) -> PhysParams {
        PhysParams::in_gamma_units(kappa, SpectralWidth::Infinite).unwrap()
    }

    #[test]
    fn rhs_at_initial_state() {
        let p = params(0.3, 1.0);
        let d = rhs(&AmplitudeState::initial(), &p).unwrap();
        assert_eq!(d.a_amp, Complex64::new(0.0, 0.0));
        assert!((d.b_amp - Complex64::new(0.0, -0.3)).norm() < 1e-15);
        assert_eq!(d.z_mem, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_with_photon_in_cavity() {
        let p = params(0.3, 1.0);
        let s = AmplitudeState {
            a_amp: Complex64::new(0.0, 0.0),
            b_amp: Complex64::new(1.0, 0.0),
            z_mem: Complex64::new(0.0, 0.0),
        };
        let d = rhs(&s, &p).unwrap();
        assert!((d.a_amp - Complex64::new(0.0, -0.3)).norm() < 1e-15);
        assert_eq!(d.b_amp, Complex64::new(0.0, 0.0));
        assert_eq!(d.z_mem, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rhs_uncoupled_freezes_qubit() {
        let p = params(0.0, 1.0);
        let s = AmplitudeState {
            a_amp: Complex64::new(0.7, 0.1),
            b_amp: Complex64::new(0.2, -0.3),
            z_mem: Complex64::new(0.05, 0.0),
        };
        let d = rhs(&s, &p).unwrap();
        assert_eq!(d.a_amp, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_dispatch_errors() {
        let s = AmplitudeState::initial();
        assert!(rhs(&s, &memoryless(0.3)).is_err());
        assert!(rhs_memoryless(&s, &params(0.3, 1.0)).is_err());
    }

    #[test]
    fn rhs_memoryless_at_initial_state() {
        let d = rhs_memoryless(&AmplitudeState::initial(), &memoryless(0.3)).unwrap();
        assert_eq!(d.a_amp, Complex64::new(0.0, 0.0));
        assert!((d.b_amp - Complex64::new(0.0, -0.3)).norm() < 1e-15);
    }

    #[test]
    fn memoryless_oracle_matches_closed_form() {
        // kappa = gamma/4: the confluent branch of the closed form.
        for kappa in [0.1, 0.25, 0.4] {
            let p = memoryless(kappa);
            let grid = TimeGrid::new(20.0, 1e-3).unwrap();
            let a = integrate(&p, &grid).unwrap();
            let mut worst: f64 = 0.0;
            for (i, t) in grid.times().enumerate() {
                worst = worst.max((a[i].re - g_memoryless(kappa, 1.0, t)).abs());
                worst = worst.max(a[i].im.abs());
            }
            assert!(worst < 1e-6, "kappa={kappa}: deviation {worst}");
        }
    }

    #[test]
    fn short_time_taylor_expansion() {
        // A(t) = 1 - kappa^2 t^2 / 2 + O(t^4); kappa = 0.3, t = 0.1.
        let p = params(0.3, 1.0);
        let grid = TimeGrid::new(0.1, 1e-4).unwrap();
        let a = integrate(&p, &grid).unwrap();
        let last = a.last().unwrap();
        assert!((last.re - 0.99955).abs() < 1e-6, "A(0.1) = {last}");
    }

    #[test]
    fn uncoupled_amplitude_constant() {
        let p = params(0.0, 0.7);
        let grid = TimeGrid::new(10.0, 1e-2).unwrap();
        for a in integrate(&p, &grid).unwrap() {
            assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let ratio = step_halving_ratio(&params(0.5, 2.0), 20.0, 0.02).unwrap();
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reservoir_population_initially_empty() {
        assert_eq!(
            reservoir_population(&AmplitudeState::initial()).unwrap(),
            0.0
        );
    }

    #[test]
    fn reservoir_population_zero_without_coupling() {
        let p = params(0.0, 1.0);
        let grid = TimeGrid::new(5.0, 1e-2).unwrap();
        for s in integrate_states(&p, &grid).unwrap() {
            assert!(reservoir_population(&s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn long_time_full_decay() {
        let p = params(0.3, 0.5);
        let grid = TimeGrid::new(120.0, 1e-3).unwrap();
        let states = integrate_states(&p, &grid).unwrap();
        let final_pop = reservoir_population(states.last().unwrap()).unwrap();
        assert!(final_pop > 0.999, "population {final_pop}");
    }

    #[test]
    fn norm_never_exceeds_unity() {
        for (kappa, lambda) in [(0.3, 0.5), (1.0, 5.0), (0.05, 0.1)] {
            let p = params(kappa, lambda);
            let grid = TimeGrid::new(30.0, 1e-3).unwrap();
            for s in integrate_states(&p, &grid).unwrap() {
                reservoir_population(&s).unwrap();
            }
        }
    }

    #[test]
    fn default_grid_tightens_for_stiff_widths() {
        let loose = default_grid(&params(0.3, 1.0), 10.0).unwrap();
        let tight = default_grid(&params(0.3, 500.0), 10.0).unwrap();
        assert!((loose.dt() - 1e-3).abs() < 1e-12);
        assert!((tight.dt() - 1e-4).abs() < 1e-13);
    }

    #[test]
    fn kernel_rewrite_matches_direct_quadrature() {
        // Trapezoidal evaluation of the literal memory integral against the
        // auxiliary variable: agreement is O(dt^2).
        let p = params(0.4, 1.5);
        let run = |dt: f64| -> f64 {
            let grid = TimeGrid::new(8.0, dt).unwrap();
            let states = integrate_states(&p, &grid).unwrap();
            let lambda = 1.5;
            let mut worst: f64 = 0.0;
            let times: Vec<f64> = grid.times().collect();
            for n in 1..states.len() {
                let t_n = times[n];
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=n {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    acc += w * (-lambda * (t_n - times[j])).exp() * states[j].b_amp;
                }
                acc *= grid.dt();
                worst = worst.max((acc - states[n].z_mem).norm());
            }
            worst
        };
        let coarse = run(0.02);
        let fine = run(0.01);
        assert!(coarse < 1e-3, "coarse deviation {coarse}");
        // O(dt^2): halving dt should shrink the deviation ~4x.
        let ratio = coarse / fine;
        assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}");
    }
}
