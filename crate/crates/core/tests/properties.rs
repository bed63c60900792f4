use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewdyn::cocycle::{product_log_norm, projective_step, rotation_number, symplectic_center_check};
use skewdyn::presets::{rotation2, symplectic_angles, symplectic_center};
use skewdyn::spaces::{distance, shift_distance, Tail};
use skewdyn::{
    load_preset, Cocycle, FiniteWord, Generator, GeneratorSystem, Point, Resonance, Space, Symbol, WordStream,
};
use std::f64::consts::{PI, TAU};

fn space_strategy() -> impl Strategy<Value = Space> {
    prop_oneof![
        Just(Space::Circle),
        (1usize..4).prop_map(Space::Torus),
        Just(Space::Sphere2),
        (2usize..5).prop_map(Space::Projective),
        (2usize..4).prop_map(Space::Shift),
    ]
}

fn word(kappa: usize, max_len: usize) -> impl Strategy<Value = FiniteWord> {
    prop::collection::vec(1..=kappa, 0..max_len).prop_map(|v| FiniteWord::from_values(&v).unwrap())
}

fn stream(v: &[usize]) -> WordStream {
    WordStream::new(FiniteWord::from_values(v).unwrap(), Tail::Constant(Symbol::new(1).unwrap()))
}

fn ms_system() -> GeneratorSystem {
    load_preset("morse-smale-rotation").unwrap().semigroup().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms(space in space_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = space.random_point(&mut rng);
        let y = space.random_point(&mut rng);
        let z = space.random_point(&mut rng);
        let dxy = distance(&x, &y).unwrap();
        prop_assert_eq!(distance(&x, &x).unwrap(), 0.0);
        prop_assert_eq!(dxy, distance(&y, &x).unwrap());
        prop_assert!(dxy <= distance(&x, &z).unwrap() + distance(&z, &y).unwrap() + 1e-12);
        prop_assert!(dxy >= 0.0 && dxy <= space.diameter() + 1e-12);
    }

    #[test]
    fn random_in_ball_stays_inside(space in space_strategy(), seed in any::<u64>(), r in 0.001f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = space.random_point(&mut rng);
        let y = space.random_in_ball(&c, r, &mut rng);
        prop_assert!(distance(&c, &y).unwrap() < r);
    }

    #[test]
    fn shift_distance_is_first_disagreement(v in prop::collection::vec(1usize..=3, 1..40), j in 0usize..40) {
        let j = j % v.len();
        let mut w = v.clone();
        w[j] = w[j] % 3 + 1;
        let d = shift_distance(&stream(&v), &stream(&w));
        prop_assert!((d - (-((j + 1) as f64)).exp()).abs() <= 1e-15);
        if j > 0 {
            let shifted = shift_distance(&stream(&v).shift(1), &stream(&w).shift(1));
            prop_assert!((shifted - d * 1f64.exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn composition_is_associative(a in word(2, 8), b in word(2, 8), c in word(2, 8), x in 0.0f64..1.0) {
        let s = ms_system();
        let p = Point::circle(x);
        let whole = s.compose_along(&a.concat(&b).concat(&c), &p).unwrap();
        let left = s.compose_along(&c, &s.compose_along(&a.concat(&b), &p).unwrap()).unwrap();
        let right = s.compose_along(&b.concat(&c), &s.compose_along(&a, &p).unwrap()).unwrap();
        prop_assert!(distance(&whole, &left).unwrap() <= 1e-12);
        prop_assert!(distance(&whole, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn pullback_inverts_compose(w in word(2, 10), x in 0.0f64..1.0) {
        let s = ms_system();
        let p = Point::circle(x);
        let back = s.pullback(&w, &s.compose_along(&w, &p).unwrap()).unwrap();
        prop_assert!(distance(&back, &p).unwrap() <= 1e-9);
    }

    /// `B_f(x, n, ε) ⊇ B(x, L^{-n} ε)` and `f^n(B_f(x, n, ε)) ⊇ B(f^n x, L^{-2n} ε)`.
    #[test]
    fn dynamic_ball_containments(x in 0.0f64..1.0, n in 1usize..7, eps in 0.01f64..0.2, seed in any::<u64>(), a in 0.01f64..0.15) {
        let sys = GeneratorSystem::new(Space::Circle, vec![Generator::sine_circle(a, 1).unwrap()]).unwrap();
        let one = Symbol::new(1).unwrap();
        let lip = sys.lipschitz();
        let x = Point::circle(x);
        let w = FiniteWord::repeat(one, n - 1);
        let full = FiniteWord::repeat(one, n);
        let fx = sys.compose_along(&full, &x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let y = Space::Circle.random_in_ball(&x, lip.powi(-(n as i32)) * eps, &mut rng);
            prop_assert!(sys.dyn_ball_member(&w, &x, eps, &y));
            let z = Space::Circle.random_in_ball(&fx, lip.powi(-2 * n as i32) * eps, &mut rng);
            prop_assert!(sys.dyn_ball_member(&w, &x, eps, &sys.pullback(&full, &z).unwrap()));
        }
    }

    #[test]
    fn projective_action_is_functorial(
        a in prop::collection::vec(-2.0f64..2.0, 9),
        b in prop::collection::vec(-2.0f64..2.0, 9),
        seed in any::<u64>(),
    ) {
        let a = DMatrix::from_row_slice(3, 3, &a);
        let b = DMatrix::from_row_slice(3, 3, &b);
        prop_assume!(a.determinant().abs() > 1e-3 && b.determinant().abs() > 1e-3);
        let p = Space::Projective(3).random_point(&mut ChaCha8Rng::seed_from_u64(seed));
        let l = projective_step(&(&a * &b), &p);
        let r = projective_step(&b, &p).and_then(|q| projective_step(&a, &q));
        if let (Ok(l), Ok(r)) = (l, r) {
            prop_assert!(distance(&l, &r).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn norm_growth_is_submultiplicative(seed in any::<u64>(), n in 1usize..60, m in 1usize..60, which in 0usize..4) {
        let name = ["different-types-A", "different-types-B", "irreducible-vs-accessible-A", "constant-hyperbolic"][which];
        let p = load_preset(name).unwrap();
        let c = p.cocycle().unwrap();
        let om = WordStream::random(c.kappa(), seed);
        let whole = (n + m) as f64 * product_log_norm(c, &om, n + m).unwrap();
        let head = n as f64 * product_log_norm(c, &om, n).unwrap();
        let tail = m as f64 * product_log_norm(c, &om.shift(n), m).unwrap();
        prop_assert!(whole <= head + tail + 1e-9);
    }

    #[test]
    fn determinant_audit_rejects_non_sl(d in 2.0f64..10.0) {
        let m = DMatrix::from_row_slice(2, 2, &[d, 0.0, 0.0, 1.0]);
        prop_assert!(Cocycle::new(vec![m]).is_err());
        let sl = DMatrix::from_row_slice(2, 2, &[d, 0.0, 0.0, 1.0 / d]);
        prop_assert!(Cocycle::new(vec![sl]).is_ok());
    }

    #[test]
    fn rotation_number_of_rotations(theta in 0.0f64..TAU) {
        let want = (theta / PI).rem_euclid(1.0);
        let got = rotation_number(&rotation2(theta), 20_000).unwrap();
        let d = (got - want).abs();
        prop_assert!(d.min(1.0 - d) <= 1e-6);
    }

    #[test]
    fn real_eigenvalues_have_zero_rotation(a in 1.01f64..5.0, b in -3.0f64..3.0, flip in any::<bool>()) {
        let s = if flip { -1.0 } else { 1.0 };
        let m = DMatrix::from_row_slice(2, 2, &[s * a, b, 0.0, s / a]);
        prop_assert_eq!(rotation_number(&m, 1000).unwrap(), 0.0);
    }

    #[test]
    fn symplectic_center_is_symplectic(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
        let m = symplectic_center(t1, t2);
        let j = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -1.0, 0.0, 0.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
        ]);
        let err = (m.transpose() * &j * &m - &j).abs().max();
        prop_assert!(err <= 1e-12);
    }
}

#[test]
fn every_preset_passes_its_audit() {
    let names = skewdyn::list_presets();
    assert!(names.len() >= 10);
    for (n, _) in names {
        load_preset(n).unwrap().audit().unwrap_or_else(|e| panic!("{n}: {e}"));
    }
}

#[test]
fn symplectic_angles_are_non_resonant() {
    let (t1, t2) = symplectic_angles();
    assert_eq!(symplectic_center_check(t1, t2, 50), Resonance::NonResonant);
}

#[test]
fn rational_angles_resonate() {
    // 2·(2π/3) + 1·(2π/3) = 2π
    let t = TAU / 3.0;
    assert!(matches!(symplectic_center_check(t, t, 3), Resonance::Resonant(_, _)));
    assert_eq!(symplectic_center_check(t, t, 1), Resonance::NonResonant);
}
