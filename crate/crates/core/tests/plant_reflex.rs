use lateral_trot::cpg::StancePair;
use lateral_trot::filter::FilterState;
use lateral_trot::gait::RobotGeometry;
use lateral_trot::plant::{measured_lateral_accel, step_plant, PlantInput, PlantParams, PlantState, PlantTuning};
use lateral_trot::reflex::{direction_of_step, exceeds_threshold, ClosedLoop, LoopConfig, Mode, FILTER_CUTOFF_HZ};
use lateral_trot::zmp::PendulumState;
use proptest::prelude::*;

const DT: f64 = 1e-3;

fn params() -> PlantParams {
    PlantParams::new(&RobotGeometry::default(), &PlantTuning::default())
}

fn free(force: f64) -> PlantInput {
    PlantInput { force, phase: StancePair::LfRh, landing_offset: None, step_reach: 0.0 }
}

/// Unlimited step reach, so only tipping past z_g counts as a fall.
fn reachable(force: f64) -> PlantInput {
    PlantInput { step_reach: f64::INFINITY, ..free(force) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbital_energy_is_conserved(x in -0.003..0.003f64, v in -0.01..0.01f64) {
        let p = params().bare();
        let q = p.q();
        let energy = |s: &PlantState| 0.5 * s.cog.xdot.powi(2) - 0.5 * q * q * (s.cog.x - s.support_x).powi(2);
        let mut s = PlantState { cog: PendulumState::new(x, v), ..PlantState::at_rest(0.0, StancePair::LfRh) };
        let e0 = energy(&s);
        for _ in 0..1000 {
            s = step_plant(&s, &p, &reachable(0.0), DT).unwrap();
            prop_assert!(!s.fallen);
            prop_assert!((energy(&s) - e0).abs() < 1e-6);
        }
    }

    #[test]
    fn fallen_never_resets(force in 0.0..600.0f64) {
        let p = params();
        let mut s = PlantState::at_rest(0.0, StancePair::LfRh);
        let mut seen = false;
        for i in 0..3000 {
            let f = if i < 200 { force } else { 0.0 };
            s = step_plant(&s, &p, &free(f), DT).unwrap();
            prop_assert!(!(seen && !s.fallen));
            seen |= s.fallen;
            if !s.fallen {
                prop_assert!(s.roll_proxy.abs() < std::f64::consts::FRAC_PI_2);
            }
        }
    }

    #[test]
    fn filter_is_linear(
        u in prop::collection::vec(-5000.0..5000.0f64, 200),
        v in prop::collection::vec(-5000.0..5000.0f64, 200),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let run = |xs: &[f64]| {
            let mut f = FilterState::new(FILTER_CUTOFF_HZ, 1.0 / DT);
            xs.iter().map(|&x| { let (n, y) = f.step(x); f = n; y }).collect::<Vec<_>>()
        };
        let mixed: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let (fu, fv, fm) = (run(&u), run(&v), run(&mixed));
        for i in 0..u.len() {
            prop_assert!((fm[i] - (a * fu[i] + b * fv[i])).abs() < 1e-9);
        }
    }
}

#[test]
fn equilibrium_is_unchanged_and_impulse_is_bounded() {
    let p = params().bare();
    let s0 = PlantState::at_rest(0.0, StancePair::LfRh);
    let s1 = step_plant(&s0, &p, &free(0.0), DT).unwrap();
    assert_eq!(s1.cog, s0.cog);
    let mut s = s0;
    for _ in 0..200 {
        s = step_plant(&s, &p, &reachable(220.0), DT).unwrap();
    }
    assert!(!s.fallen);
    // Closed form from rest: xdot = (F/M) sinh(q t) / q, above the impulse bound F/M * t = 2.
    let exact = 10.0 * (p.q() * 0.2).sinh() / p.q();
    assert!((s.cog.xdot - exact).abs() < 1e-6, "xdot {} vs {exact}", s.cog.xdot);
}

#[test]
fn measured_acceleration_examples() {
    let a = PlantState::at_rest(0.0, StancePair::LfRh);
    let mut b = a;
    b.cog.xdot = 10.0 * DT;
    assert!((measured_lateral_accel(&a, &b, DT) - 10_000.0).abs() < 1e-6);
    assert_eq!(measured_lateral_accel(&a, &a, DT), 0.0);
}

#[test]
fn filter_attenuates_a_decade_above_cutoff() {
    let f = FilterState::new(FILTER_CUTOFF_HZ, 1.0 / DT);
    assert!((f.gain_at(FILTER_CUTOFF_HZ) - 0.5f64.sqrt()).abs() < 0.05 * 0.5f64.sqrt());
    assert!(f.gain_at(16.7) < 0.05);
}

#[test]
fn trigger_is_strict_and_signed() {
    assert!(!exceeds_threshold(2500.0, 2500.0));
    assert!(exceeds_threshold(-2500.1, 2500.0));
    assert_eq!(direction_of_step(3000.0).unwrap(), 1.0);
    assert_eq!(direction_of_step(-3000.0).unwrap(), -1.0);
    assert!(direction_of_step(0.0).is_err());
}

#[test]
fn quiet_trot_never_steps_and_stays_smooth() {
    let mut cl = ClosedLoop::new(LoopConfig::default(), Vec::new()).unwrap();
    let mut peak: f64 = 0.0;
    for _ in 0..10_000 {
        let r = cl.step().unwrap();
        assert_eq!(cl.controller().mode, Mode::Idle);
        assert!(!cl.network().lm_enabled());
        if r.t > 1.0 {
            peak = peak.max(r.accel_filtered.abs());
        }
    }
    assert!(cl.episodes().is_empty());
    assert!(peak < 2000.0, "peak {peak}");
}
