//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values and its runtime. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use hiernm::model::{PhysParams, SpectralWidth, TimeGrid};
use hiernm::nm::{nm_auto, optimize_pairs, EPS_NM};
use hiernm::oracle;
use hiernm::phase::{log_spaced, nm_direct_auto, threshold_kappa};
use hiernm::propagator::{g_memoryless, Propagator};
use hiernm::qubit::{evolve_qubit, trace_distance, trace_distance_model, DensityMatrix2};

fn gamma_units(kappa: f64, lambda: f64) -> PhysParams {
    PhysParams::in_gamma_units(kappa, SpectralWidth::Finite(lambda)).unwrap()
}

fn cli_threshold(lambda: &str) -> f64 {
    let out = Command::new(env!("CARGO_BIN_EXE_hiernm"))
        .args(["threshold", "--lambda", lambda])
        .output()
        .expect("spawn hiernm");
    assert_eq!(
        out.status.code(),
        Some(0),
        "threshold --lambda {lambda} failed"
    );
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    text.split_whitespace()
        .nth(2)
        .expect("kappa_t value")
        .parse()
        .expect("parse kappa_t")
}

fn report(criterion: &str, elapsed: std::time::Duration, limit_s: f64, detail: &str) {
    let secs = elapsed.as_secs_f64();
    println!("acceptance {criterion}: PASS ({secs:.2} s) — {detail}");
    assert!(
        secs < limit_s,
        "{criterion} exceeded its runtime limit: {secs:.2} s > {limit_s} s"
    );
}

#[test]
fn criterion_1_memoryless_threshold() {
    let start = Instant::now();
    let kappa_t = cli_threshold("inf");
    assert!(
        (0.249..=0.251).contains(&kappa_t),
        "kappa_t = {kappa_t} outside [0.249, 0.251]"
    );
    report(
        "1 (memoryless threshold)",
        start.elapsed(),
        10.0,
        &format!("threshold --lambda inf -> kappa_t = {kappa_t:.6}"),
    );
}

#[test]
fn criterion_2_finite_width_asymptote() {
    let start = Instant::now();
    let kappa_t = cli_threshold("1000");
    assert!(
        (0.24..=0.26).contains(&kappa_t),
        "kappa_t(1000) = {kappa_t} outside [0.24, 0.26]"
    );
    report(
        "2 (finite-lambda asymptote)",
        start.elapsed(),
        30.0,
        &format!("kappa_t(1e3) = {kappa_t:.6}"),
    );
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut worst_at = (0.0, 0.0);
    for _ in 0..20 {
        let kappa = rng.random_range(0.05..=1.0);
        let lambda = rng.random_range(0.1..=10.0);
        let p = gamma_units(kappa, lambda);
        let grid = TimeGrid::new(50.0, 1e-3).unwrap();
        let amplitudes = oracle::integrate(&p, &grid).unwrap();
        let prop = Propagator::for_params(&p).unwrap();
        for (i, t) in grid.times().enumerate() {
            let dev = (amplitudes[i] - Complex64::new(prop.eval(t).unwrap(), 0.0)).norm();
            if dev > worst {
                worst = dev;
                worst_at = (kappa, lambda);
            }
        }
    }
    assert!(
        worst < 1e-6,
        "max |G_analytic - A_oracle| = {worst} at {worst_at:?}"
    );
    report(
        "3 (oracle equivalence)",
        start.elapsed(),
        60.0,
        &format!("20 seeded points, max deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_4_closed_form_consistency() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for kappa in [0.1, 0.25, 0.3, 0.5, 1.0] {
        let modes = hiernm::laplace_invert(&gamma_units(kappa, 1e4)).unwrap();
        for i in 0..=4000 {
            let t = 0.005 * i as f64;
            let dev = (hiernm::g_of_t(&modes, t).unwrap() - g_memoryless(kappa, 1.0, t)).abs();
            worst = worst.max(dev);
        }
    }
    assert!(worst < 1e-3, "lambda = 1e4 deviation {worst}");

    let g_critical = g_memoryless(0.25, 1.0, 4.0);
    let expected = 2.0 / std::f64::consts::E;
    assert!(
        (g_critical - expected).abs() < 1e-9,
        "G(4) = {g_critical}, expected 2/e = {expected}"
    );
    report(
        "4 (closed-form consistency)",
        start.elapsed(),
        5.0,
        &format!(
            "max dev at lambda=1e4: {worst:.3e}; G(4/gamma) - 2/e = {:.2e}",
            g_critical - expected
        ),
    );
}

#[test]
fn criterion_5_nm_revival() {
    let start = Instant::now();
    let narrow = nm_auto(&gamma_units(0.3, 0.5)).unwrap().nm_value;
    let mid = nm_auto(&gamma_units(0.3, 1.0)).unwrap().nm_value;
    let wide = nm_auto(&gamma_units(0.3, 5.0)).unwrap().nm_value;
    assert!(narrow > 1e-3, "NM(0.5) = {narrow}");
    assert!(mid < 1e-8, "NM(1.0) = {mid}");
    assert!(wide > 1e-3, "NM(5.0) = {wide}");
    report(
        "5 (NM revival)",
        start.elapsed(),
        30.0,
        &format!("NM(0.5, 1, 5) = {narrow:.4e}, {mid:.1e}, {wide:.4e}"),
    );
}

#[test]
fn criterion_6_threshold_non_monotonic() {
    let start = Instant::now();
    let lambdas = [0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0];
    let thresholds: Vec<f64> = lambdas
        .iter()
        .map(|&l| threshold_kappa(SpectralWidth::Finite(l), 1.0, None, 1e-4).unwrap())
        .collect();
    let max = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = thresholds[0];
    let last = *thresholds.last().unwrap();
    assert!(
        max >= 1.05 * first && max >= 1.05 * last,
        "thresholds {thresholds:?}: max {max} does not exceed endpoints {first}, {last} by 5%"
    );
    report(
        "6 (threshold non-monotonicity)",
        start.elapsed(),
        180.0,
        &format!(
            "kappa_t({lambdas:?}) = {:?}, max/first = {:.3}, max/last = {:.3}",
            thresholds
                .iter()
                .map(|t| (t * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            max / first,
            max / last
        ),
    );
}

#[test]
fn criterion_7_nm_monotone_in_kappa() {
    let start = Instant::now();
    let widths = [
        SpectralWidth::Finite(0.2),
        SpectralWidth::Finite(1.0),
        SpectralWidth::Finite(5.0),
        SpectralWidth::Infinite,
    ];
    for width in widths {
        let mut prev = -1.0;
        for i in 1..=20 {
            let kappa = 0.05 * i as f64;
            let p = PhysParams::in_gamma_units(kappa, width).unwrap();
            let nm = nm_auto(&p).unwrap().nm_value;
            assert!(
                nm >= prev - 1e-9,
                "NM decreased at kappa={kappa}, lambda={width}: {nm} < {prev}"
            );
            prev = nm;
        }
    }
    report(
        "7 (NM monotone in kappa)",
        start.elapsed(),
        120.0,
        "non-decreasing across kappa = 0.05..1.0 for lambda = 0.2, 1, 5, inf",
    );
}

#[test]
fn criterion_8_direct_model_contrast() {
    let start = Instant::now();
    for kappa in [0.2, 0.3, 0.4] {
        let mut lambdas = log_spaced(0.05, 2.0, 15);
        lambdas.push(2.0 * kappa * 1.0001);
        lambdas.push(2.0 * kappa * 1.2);
        lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = f64::INFINITY;
        for &lambda in &lambdas {
            let nm = nm_direct_auto(kappa, lambda).unwrap().nm_value;
            assert!(
                nm <= prev + 1e-9,
                "direct model NM increased at kappa={kappa}, lambda={lambda}: {nm} > {prev}"
            );
            if lambda > 2.0 * kappa {
                assert!(
                    nm < EPS_NM,
                    "direct model NM = {nm} past the 2 kappa cutoff (lambda={lambda})"
                );
            }
            prev = nm;
        }
    }
    report(
        "8 (direct-model contrast)",
        start.elapsed(),
        60.0,
        "NM non-increasing in lambda and zero past lambda = 2 kappa for kappa = 0.2, 0.3, 0.4",
    );
}

#[test]
fn criterion_9_property_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Positivity under evolution on 1000 random (state, propagator) draws.
    for _ in 0..1000 {
        let rho = DensityMatrix2::pure(
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let g = Complex64::from_polar(
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let out = evolve_qubit(rho, g).unwrap();
        assert!((0.0..=1.0).contains(&out.ee()));
        assert!(out.eg().norm_sqr() <= out.ee() * (1.0 - out.ee()) + 1e-12);
    }

    // Eigenvalue-route and closed-form trace distances agree to 1e-12 on
    // 1000 random pairs.
    for _ in 0..1000 {
        let rho1 = DensityMatrix2::pure(
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let rho2 = DensityMatrix2::pure(
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let g = Complex64::from_polar(
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let via_model = trace_distance_model(g, rho1.ee() - rho2.ee(), rho1.eg() - rho2.eg());
        let via_eigen = trace_distance(
            evolve_qubit(rho1, g).unwrap(),
            evolve_qubit(rho2, g).unwrap(),
        );
        assert!(
            (via_model - via_eigen).abs() < 1e-12,
            "{via_model} vs {via_eigen}"
        );
    }

    // Reality and boundedness of G across the plane (checked inside eval).
    for &kappa in &log_spaced(0.01, 2.0, 20) {
        for &lambda in &log_spaced(0.05, 100.0, 20) {
            let prop = Propagator::for_params(&gamma_units(kappa, lambda)).unwrap();
            for i in 0..=50 {
                prop.eval(i as f64).unwrap();
            }
        }
    }

    // Pair optimization never beats the |+>, |-> pair by more than 1e-9.
    for (kappa, lambda) in [(0.3, 0.5), (0.3, 5.0), (0.6, 1.0)] {
        let p = gamma_units(kappa, lambda);
        let prop = Propagator::for_params(&p).unwrap();
        let horizon = hiernm::nm::choose_horizon(&prop, 1.0);
        let best = optimize_pairs(&p, 8, horizon).unwrap();
        let reference = hiernm::nm::nm_optimal_pair(&p, horizon).unwrap();
        assert!(
            best.result.nm_value <= reference.nm_value + 1e-9,
            "grid search beat the optimal pair at kappa={kappa}, lambda={lambda}"
        );
    }

    // Classifier equivalence: NM > 0 <=> |G| non-monotone, on a 40 x 40 grid
    // chosen between the 0.05-multiples so no point sits exactly on a
    // threshold curve.
    let kappas: Vec<f64> = (0..40).map(|i| 0.025 + 0.05 * i as f64).collect();
    let lambdas = log_spaced(0.05, 100.0, 40);
    let mut disagreements = Vec::new();
    for &kappa in &kappas {
        for &lambda in &lambdas {
            let r = nm_auto(&gamma_units(kappa, lambda)).unwrap();
            if (r.nm_value > 0.0) != !r.markovian {
                disagreements.push((kappa, lambda, r.nm_value, r.markovian));
            }
        }
    }
    assert!(
        disagreements.is_empty(),
        "classifier disagreements: {disagreements:?}"
    );

    report(
        "9 (property suites)",
        start.elapsed(),
        300.0,
        "positivity, trace-distance route agreement, |G| bounds, pair optimality, 40x40 classifier equivalence",
    );
}
