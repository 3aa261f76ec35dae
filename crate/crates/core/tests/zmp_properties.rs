use lateral_trot::gait::RobotGeometry;
use lateral_trot::ode::rk4_step;
use lateral_trot::zmp::{
    compute_zmp_x, plan_step, propagate_cog, transition_matrix, BodySegment, PendulumState, ZmpForm, GRAVITY,
};
use proptest::prelude::*;

const Q: f64 = 4.669;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn propagation_matches_rk4(x in -1.0..1.0f64, v in -1.0..1.0f64, zmp in -1.0..1.0f64) {
        let h = 1e-4;
        let mut y = [x, v];
        for i in 0..10_000 {
            y = rk4_step(|_, s: &[f64; 2]| [s[1], Q * Q * (s[0] - zmp)], i as f64 * h, &y, h);
        }
        let a = propagate_cog(PendulumState::new(x, v), zmp, 1.0, Q);
        prop_assert!((a.x - y[0]).abs() < 1e-6 && (a.xdot - y[1]).abs() < 1e-6);
    }

    #[test]
    fn plan_offset_sign_follows_velocity(x in -1.0..1.0f64, v in -3.0..3.0f64) {
        prop_assume!(v != 0.0);
        let p = plan_step(PendulumState::new(x, v), Q, &RobotGeometry::default());
        prop_assert_eq!(p.offset.signum(), v.signum());
        prop_assert!(p.slider_targets.iter().all(|s| s.signum() == v.signum()));
    }

    #[test]
    fn stepping_onto_the_capture_point_brings_the_mass_to_rest(x in -0.5..0.5f64, v in -2.0..2.0f64) {
        prop_assume!(v.abs() > 1e-3);
        let foothold = plan_step(PendulumState::new(x, v), Q, &RobotGeometry::default()).foothold_x;
        let mut prev = PendulumState::new(x, v);
        for i in 1..=200 {
            let d = propagate_cog(PendulumState::new(x, v), foothold, i as f64 * 5e-3, Q);
            prop_assert!(d.xdot.abs() <= prev.xdot.abs() + 1e-12);
            prop_assert!((d.x - foothold).abs() <= (prev.x - foothold).abs() + 1e-12);
            prev = d;
        }
    }

    #[test]
    fn static_zmp_is_the_mass_centroid(
        segs in prop::collection::vec((0.1..10.0f64, -1.0..1.0f64, 0.0..1.0f64), 1..8)
    ) {
        let bodies: Vec<BodySegment> =
            segs.iter().map(|&(m, x, z)| BodySegment { m, x, z, ax: 0.0, az: 0.0 }).collect();
        let m: f64 = segs.iter().map(|s| s.0).sum();
        let c = segs.iter().map(|s| s.0 * s.1).sum::<f64>() / m;
        let z = compute_zmp_x(&bodies, GRAVITY, ZmpForm::Standard).unwrap();
        prop_assert!((z - c).abs() <= 1e-12);
    }
}

/// `det T = 1` holds up to the rounding of the entries, which grows like cosh^2(qt).
#[test]
fn determinant_is_one_to_entry_precision() {
    for i in 0..=5000 {
        let t = i as f64 * 1e-3;
        let m = transition_matrix(t, Q);
        let scale = m.m11 * m.m22 + (m.m12 * m.m21).abs();
        assert!((m.det() - 1.0).abs() <= 4.0 * f64::EPSILON * scale, "t = {t}");
    }
}
