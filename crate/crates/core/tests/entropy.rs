use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewdyn::entropy::{
    bufetov_entropy_estimate, cover_count, glw_entropy_estimate, katok_entropy_estimate, separated_count,
    topological_entropy_estimate, Dynamics, ShiftMap, SingleMap, WordDriven,
};
use skewdyn::semigroup::golden;
use skewdyn::spaces::{cylinders, distance};
use skewdyn::{load_preset, EntropyOptions, FiniteWord, Generator, GeneratorSystem, Point, Space, Symbol};

fn one() -> Symbol {
    Symbol::new(1).unwrap()
}

fn orbit_separated(d: &dyn Dynamics, a: &Point, b: &Point, n: usize, eps: f64) -> bool {
    d.signature(a, n).iter().zip(d.signature(b, n)).any(|(x, y)| distance(x, &y).unwrap() >= eps)
}

/// Quadratic greedy: keep a candidate when it is separated from everything kept.
fn naive_separated(d: &dyn Dynamics, pts: &[Point], n: usize, eps: f64) -> usize {
    let mut kept: Vec<&Point> = Vec::new();
    for p in pts {
        if kept.iter().all(|q| orbit_separated(d, p, q, n, eps)) {
            kept.push(p);
        }
    }
    kept.len()
}

fn naive_cover(d: &dyn Dynamics, pts: &[Point], n: usize, eps: f64, rho: f64) -> usize {
    let need = ((1.0 - rho) * pts.len() as f64).ceil() as usize;
    let mut covered = vec![false; pts.len()];
    let (mut done, mut balls) = (0, 0);
    for c in 0..pts.len() {
        if done >= need {
            break;
        }
        if covered[c] {
            continue;
        }
        balls += 1;
        for i in 0..pts.len() {
            if !covered[i] && !orbit_separated(d, &pts[c], &pts[i], n, eps) {
                covered[i] = true;
                done += 1;
            }
        }
    }
    balls
}

fn random_points(space: &Space, m: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| space.random_point(&mut rng)).collect()
}

#[test]
fn indexed_counts_match_quadratic_greedy() {
    let cat = load_preset("cat-map").unwrap();
    let cat = cat.semigroup().unwrap();
    let s2 = load_preset("s2-rotations").unwrap();
    let s2 = s2.semigroup().unwrap();
    let proj = load_preset("projective-rotation").unwrap();
    let proj = proj.semigroup().unwrap();
    let t3 = load_preset("t3-translations").unwrap();
    let t3 = t3.semigroup().unwrap();
    let cases: Vec<(Box<dyn Dynamics>, Space)> = vec![
        (Box::new(SingleMap { system: cat, symbol: one() }), Space::Torus(2)),
        (Box::new(SingleMap { system: s2, symbol: one() }), Space::Sphere2),
        (Box::new(SingleMap { system: proj, symbol: one() }), Space::Projective(2)),
        (Box::new(WordDriven { system: t3, word: FiniteWord::from_values(&[1, 2, 3]).unwrap() }), Space::Torus(3)),
        (Box::new(ShiftMap { kappa: 2 }), Space::Shift(2)),
    ];
    for (k, (d, space)) in cases.iter().enumerate() {
        let pts = random_points(space, 600, k as u64);
        for (n, eps) in [(1, 0.3), (3, 0.2), (5, 0.1)] {
            assert_eq!(
                separated_count(d.as_ref(), &pts, n, eps),
                naive_separated(d.as_ref(), &pts, n, eps),
                "{space:?} n {n} eps {eps}"
            );
            assert_eq!(
                cover_count(d.as_ref(), &pts, n, eps, 0.1),
                naive_cover(d.as_ref(), &pts, n, eps, 0.1),
                "{space:?} n {n} eps {eps}"
            );
        }
    }
}

#[test]
fn shift_cylinders_are_counted_exactly() {
    // at ε = e^{-k} two streams are close iff they share k leading symbols,
    // so depth-n separation needs n + k - 1 symbols: 2^{n+k-1} classes
    for k in 1..=3usize {
        let eps = (-(k as f64)).exp();
        for n in 1..=8usize {
            let cyl = cylinders(2, n + k + 1, 1 << 16).unwrap();
            assert_eq!(separated_count(&ShiftMap { kappa: 2 }, &cyl, n, eps), 1 << (n + k - 1));
        }
    }
}

#[test]
fn full_shift_entropy_is_log_kappa() {
    for kappa in 2..=3usize {
        let e = topological_entropy_estimate(
            &ShiftMap { kappa },
            &[(-1f64).exp()],
            &(1..=9).collect::<Vec<_>>(),
            &EntropyOptions::default(),
        )
        .unwrap();
        assert!((e.value - (kappa as f64).ln()).abs() < 1e-9, "kappa {kappa}: {}", e.value);
        assert!(e.reliable());
    }
}

#[test]
fn isometries_do_not_separate_further() {
    // d(R^j x, R^j y) = d(x, y): counts cannot depend on n
    let g = load_preset("golden-rotation").unwrap();
    let d = SingleMap { system: g.semigroup().unwrap(), symbol: one() };
    let pts = random_points(&Space::Circle, 2000, 5);
    for eps in [0.2, 0.05] {
        let c1 = separated_count(&d, &pts, 1, eps);
        for n in [2, 10, 40] {
            assert_eq!(separated_count(&d, &pts, n, eps), c1);
        }
    }
    let e = topological_entropy_estimate(&d, &[0.1, 0.05], &(1..=20).collect::<Vec<_>>(), &EntropyOptions::default())
        .unwrap();
    assert!(e.value.abs() <= 0.02);
}

#[test]
fn single_generator_word_entropies_agree_with_bowen() {
    let sys = GeneratorSystem::new(Space::Circle, vec![Generator::sine_circle(0.1, 1).unwrap()]).unwrap();
    let opts = EntropyOptions::default();
    let (eps, n) = ([0.2, 0.1], [1, 2, 3, 4, 5]);
    let top = topological_entropy_estimate(&SingleMap { system: &sys, symbol: one() }, &eps, &n, &opts).unwrap();
    let glw = glw_entropy_estimate(&sys, &eps, &n, &opts).unwrap();
    let buf = bufetov_entropy_estimate(&sys, &eps, &n, &opts).unwrap();
    assert_eq!(top.counts, glw.counts);
    assert_eq!(top.counts, buf.counts);
    assert!(!glw.lower_bound && buf.std_err.is_none());
}

#[test]
fn two_rotations_have_zero_entropy() {
    let two =
        GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden()), Generator::rotation(2f64.sqrt())])
            .unwrap();
    let (eps, n) = ([0.1, 0.05], (1..=8).collect::<Vec<_>>());
    let glw = glw_entropy_estimate(&two, &eps, &n, &EntropyOptions::default()).unwrap();
    let buf = bufetov_entropy_estimate(&two, &eps, &n, &EntropyOptions::default()).unwrap();
    assert!(glw.value.abs() <= 0.02 && buf.value.abs() <= 0.02);
}

#[test]
fn sampled_words_are_flagged() {
    let two =
        GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden()), Generator::rotation(2f64.sqrt())])
            .unwrap();
    let opts = EntropyOptions { word_cap: 16, word_samples: 8, ..Default::default() };
    let glw = glw_entropy_estimate(&two, &[0.1], &[6], &opts).unwrap();
    assert!(glw.lower_bound);
    assert!(glw_entropy_estimate(&two, &[0.1], &[11], &opts).is_err());
    let buf = bufetov_entropy_estimate(&two, &[0.1], &[6], &opts).unwrap();
    assert!(buf.std_err.is_some());
}

#[test]
fn estimates_are_monotone_after_closure() {
    let cat = load_preset("cat-map").unwrap();
    let d = SingleMap { system: cat.semigroup().unwrap(), symbol: one() };
    let top = topological_entropy_estimate(&d, &[0.3, 0.2, 0.15], &[1, 2, 3, 4], &EntropyOptions::default()).unwrap();
    assert!(top.is_monotone());
    let sampler = |r: &mut ChaCha8Rng| Point::torus(&[r.random::<f64>(), r.random::<f64>()]);
    let k = katok_entropy_estimate(&d, &sampler, 20_000, &[0.3, 0.2], &[1, 2, 3, 4], 0.1, 1).unwrap();
    assert!(k.is_monotone());
    assert!(k.counts.iter().flatten().all(|c| *c >= 1.0));
}

#[test]
fn estimates_are_reproducible() {
    let cat = load_preset("cat-map").unwrap();
    let d = SingleMap { system: cat.semigroup().unwrap(), symbol: one() };
    let opts = EntropyOptions { seed: 9, ..Default::default() };
    let a = topological_entropy_estimate(&d, &[0.25], &[1, 2, 3], &opts).unwrap();
    let b = topological_entropy_estimate(&d, &[0.25], &[1, 2, 3], &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_grids_are_rejected() {
    let d = ShiftMap { kappa: 2 };
    let opts = EntropyOptions::default();
    assert!(topological_entropy_estimate(&d, &[], &[1], &opts).is_err());
    assert!(topological_entropy_estimate(&d, &[0.1], &[], &opts).is_err());
    assert!(topological_entropy_estimate(&d, &[-0.1], &[1], &opts).is_err());
    let sampler = |_: &mut ChaCha8Rng| Point::circle(0.0);
    let g = load_preset("golden-rotation").unwrap();
    let sm = SingleMap { system: g.semigroup().unwrap(), symbol: one() };
    assert!(katok_entropy_estimate(&sm, &sampler, 10, &[0.1], &[1], 1.0, 0).is_err());
}

#[test]
fn katok_stays_below_bowen_on_a_shared_sample() {
    use skewdyn::entropy::{katok_entropy_on, topological_entropy_on};
    let cat = load_preset("cat-map").unwrap();
    let d = SingleMap { system: cat.semigroup().unwrap(), symbol: one() };
    let pts = random_points(&Space::Torus(2), 250_000, 0);
    let (eps, n) = ([0.25, 0.125], (1..=8).collect::<Vec<_>>());
    let top = topological_entropy_on(&d, &pts, &eps, &n).unwrap();
    let katok = katok_entropy_on(&d, &pts, &eps, &n, 0.1).unwrap();
    for (k, t) in katok.raw.iter().flatten().zip(top.raw.iter().flatten()) {
        assert!(k <= t);
    }
    for (k, t) in katok.slopes.iter().zip(&top.slopes) {
        assert!(k - t <= 0.05, "katok slope {k} vs separated slope {t}");
    }
}
