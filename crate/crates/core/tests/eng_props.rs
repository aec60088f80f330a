use conmod::packs::eng::{self, PVCPipe, Rov, Vec3};
use conmod::Value;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn pipe() -> impl Strategy<Value = PVCPipe> {
    (vec3(5.0), 0.1f64..3.0, 0.005f64..0.1, 500.0f64..2000.0, vec3(180.0))
        .prop_map(|(p0, l, r, rho, axis)| PVCPipe::new(p0, l, r, rho, axis).unwrap())
}

fn rov() -> impl Strategy<Value = Rov> {
    prop::collection::vec(pipe(), 1..6).prop_map(|b| Rov::new(b).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Moment of inertia about the vertical axis through the center of mass,
/// from random points along each pipe treated as a thin rod.
fn sampled_moment(rov: &Rov, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for p in rov.body() {
        let (a, b) = (p.p0(), p.p1());
        let w = p.mass() / samples as f64;
        for k in 0..samples {
            // one jittered sample per stratum
            let s = (k as f64 + rng.gen::<f64>()) / samples as f64;
            points.push((a + (b - a) * s, w));
        }
    }
    let total: f64 = points.iter().map(|(_, w)| w).sum();
    let cx = points.iter().map(|(q, w)| q.x * w).sum::<f64>() / total;
    let cy = points.iter().map(|(q, w)| q.y * w).sum::<f64>() / total;
    points
        .iter()
        .map(|(q, w)| w * ((q.x - cx).powi(2) + (q.y - cy).powi(2)))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shift_and_rotate_are_pure_and_additive(p in pipe(), a in vec3(3.0), b in vec3(90.0)) {
        let before = p;
        let shifted = p.shift(a);
        prop_assert_eq!(p, before);
        prop_assert_eq!(shifted.p0(), p.p0() + a);
        prop_assert_eq!(shifted.axis(), p.axis());
        prop_assert_eq!(p.rotate(b).axis(), p.axis() + b);
        prop_assert_eq!(p.rotate(b).p0(), p.p0());
        prop_assert_eq!(shifted.mass(), p.mass());
        let twice = p.shift(a).shift(a);
        prop_assert!((twice.p0() - (p.p0() + a + a)).norm() < 1e-12);
        prop_assert!((p.direction().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mass_adds_up(r in rov()) {
        let sum: f64 = r.body().iter().map(|p| p.mass()).sum();
        prop_assert!(close(r.mass(), sum, 1e-12));
    }

    #[test]
    fn center_of_mass_lies_in_the_bounding_box(r in rov()) {
        let c = r.center_of_mass();
        let ends: Vec<Vec3> = r.body().iter().flat_map(|p| [p.p0(), p.p1()]).collect();
        let lo = |f: fn(&Vec3) -> f64| ends.iter().map(f).fold(f64::INFINITY, f64::min) - 1e-9;
        let hi = |f: fn(&Vec3) -> f64| ends.iter().map(f).fold(f64::NEG_INFINITY, f64::max) + 1e-9;
        prop_assert!(lo(|v| v.x) <= c.x && c.x <= hi(|v| v.x));
        prop_assert!(lo(|v| v.y) <= c.y && c.y <= hi(|v| v.y));
        prop_assert!(lo(|v| v.z) <= c.z && c.z <= hi(|v| v.z));
    }

    #[test]
    fn moment_is_nonnegative_and_translation_invariant(r in rov(), v in vec3(10.0)) {
        let i = r.moment_of_inertia();
        prop_assert!(i >= 0.0);
        prop_assert!(close(r.shift(v).moment_of_inertia(), i, 1e-9));
    }

    #[test]
    fn moment_matches_sampling(r in rov(), seed in any::<u64>()) {
        let sampled = sampled_moment(&r, 2000, seed);
        prop_assert!(close(r.moment_of_inertia(), sampled, 1e-3), "{} vs {sampled}", r.moment_of_inertia());
    }
}

#[test]
fn demo_frame() {
    let m = eng::rov_model().unwrap();
    let inst = m.instance("rov").unwrap();
    let rov = eng::rov_of(&m, inst).unwrap();
    let pipe_mass = 1400.0 * std::f64::consts::PI * 0.02 * 0.02;
    assert!(close(rov.mass(), 4.0 * pipe_mass, 1e-12));
    let com = rov.center_of_mass();
    assert!((com - Vec3::new(0.25, 0.25, 1.5)).norm() < 1e-12);
    let mass = m.invoke(inst, "mass", &[]).unwrap();
    assert_eq!(mass.as_f64(), Some(rov.mass()));
    let c = m.invoke(inst, "center_of_mass", &[]).unwrap();
    assert_eq!(Vec3::from_value(&c), Some(com));
    assert!(matches!(
        m.invoke(inst, "moment_of_inertia", &[]).unwrap(),
        Value::Float(_)
    ));
}

#[test]
fn invalid_pipes_are_rejected() {
    assert!(PVCPipe::new(Vec3::ZERO, 0.0, 0.02, 1400.0, Vec3::ZERO).is_err());
    assert!(PVCPipe::new(Vec3::ZERO, 1.0, -0.02, 1400.0, Vec3::ZERO).is_err());
    assert!(Rov::new(vec![]).is_err());
}
