//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Run with `cargo test -p skewdyn --test acceptance --release`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewdyn::cocycle::{
    audit_direction, cone_check, directional_exponent_trace, domination_test, eigen_split, hyperbolic_cones,
    irregular_direction, periodic_spectrum, product_log_norm, projective_step, rotation_number, spectrum_report,
    symplectic_center_check, DirectionOptions,
};
use skewdyn::entropy::{
    bufetov_entropy_estimate, glw_entropy_estimate, katok_entropy_estimate, topological_entropy_estimate, ShiftMap,
    SingleMap,
};
use skewdyn::hitting::certify_frequent_hitting;
use skewdyn::irregular::{audit_witness, construct_irregular_point, IrregularOptions, NestingMode, Observable};
use skewdyn::presets::{cat_matrix, different_types_a, different_types_b, rotation2, symplectic_angles};
use skewdyn::semigroup::golden;
use skewdyn::spaces::{distance, shift_distance, Tail};
use skewdyn::{
    load_preset, Cocycle, EntropyOptions, Error, FiniteWord, Generator, GeneratorSystem, Point, Resonance, Space,
    SpectrumVerdict, Symbol, WordStream,
};
use std::f64::consts::{PI, TAU};
use std::time::Instant;

/// log of the cat-map eigenvalue (3 + √5)/2.
fn cat_entropy() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

fn cos_psi(_: Symbol, p: &Point) -> f64 {
    (TAU * p.coords()[0]).cos()
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn run(id: usize, title: &str, f: impl FnOnce() -> Line) -> bool {
    let t = Instant::now();
    let l = f();
    let verdict = if l.ok { "PASS" } else { "FAIL" };
    println!("{verdict} [{id:>2}] {title}: {} ({:.1} s)", l.detail, t.elapsed().as_secs_f64());
    l.ok
}

fn golden_hitting() -> Line {
    let s = load_preset("golden-rotation").unwrap();
    let s = s.semigroup().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.2f64, 0.1, 0.05] {
        let t = Instant::now();
        let bound = (3.0 / eps).floor() as usize + 1;
        match certify_frequent_hitting(s, eps, 1000, eps / 8.0, 0) {
            Ok(o) => match o.certificate() {
                Some(c) => {
                    let secs = t.elapsed().as_secs_f64();
                    let verified = c.verify_all(s);
                    ok &= c.k <= bound && secs < 30.0 && verified;
                    parts.push(format!("K({eps}) = {} <= {bound} verified {verified} in {secs:.1} s", c.k));
                }
                None => {
                    ok = false;
                    parts.push(format!("eps {eps}: refuted"));
                }
            },
            Err(e) => {
                ok = false;
                parts.push(format!("eps {eps}: {e}"));
            }
        }
    }
    line(ok, parts.join("; "))
}

fn cat_refutation() -> Line {
    let p = load_preset("cat-map").unwrap();
    let target = -cat_entropy();
    match certify_frequent_hitting(p.semigroup().unwrap(), 0.1, 50, 0.1 / 8.0, 0) {
        Ok(o) => match o.refutation() {
            Some(r) => match r.decay_slope {
                Some(s) => {
                    let rel = (s - target).abs() / target.abs();
                    line(
                        rel <= 0.05,
                        format!("refuted, decay slope {s:.6} vs {target:.6} (rel. err {rel:.4}, tol 0.05)"),
                    )
                }
                None => line(false, "refuted but no decay slope"),
            },
            None => line(false, "certified instead of refuted"),
        },
        Err(e) => line(false, e.to_string()),
    }
}

fn gaussian_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random());
                (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
            })
            .collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn cocycle_a_exponent() -> Line {
    let c = different_types_a();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let target = 3f64.ln();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let v = gaussian_unit(&mut rng, 3);
        for k in 0..5 {
            let om = WordStream::random(2, 100 + k);
            let t = directional_exponent_trace(&c, &om, &v, 5000).unwrap();
            worst = worst.max((t.averages[4999] - target).abs());
        }
    }
    line(worst <= 1e-3, format!("100 runs, max |exponent - log 3| = {worst:.3e} (tol 1e-3)"))
}

fn cocycle_b_direction() -> Line {
    let c = different_types_b();
    match irregular_direction(&c, &[1.0, 1.0, 1.0], 6, &DirectionOptions::default()) {
        Ok(w) => {
            let hi = w.checkpoints.iter().map(|p| p.average).fold(f64::NEG_INFINITY, f64::max);
            let lo = w.checkpoints.iter().map(|p| p.average).fold(f64::INFINITY, f64::min);
            let err = audit_direction(&c, &w).unwrap_or(f64::INFINITY);
            let ok = hi >= 3f64.ln() - 0.05 && lo <= 2f64.ln() + 0.05 && err <= 1e-9;
            line(
                ok,
                format!(
                    "depth {}, checkpoint max {hi:.6} (>= {:.6}), min {lo:.6} (<= {:.6}), audit error {err:.1e}",
                    w.blocks.len(),
                    3f64.ln() - 0.05,
                    2f64.ln() + 0.05
                ),
            )
        }
        Err(e) => line(false, e.to_string()),
    }
}

fn irregular_check(preset: &str, shadowed: usize) -> std::result::Result<(f64, f64), Error> {
    let p = load_preset(preset)?;
    let s = p.semigroup()?;
    let opts = IrregularOptions { shadowed: Some(Symbol::new(shadowed)?), ..Default::default() };
    let psi: &Observable = &cos_psi;
    let w = construct_irregular_point(s, psi, &Point::circle(0.0), 1.0, 1, &Point::circle(0.5), -1.0, 0.03, 8, &opts)?;
    let a = audit_witness(s, psi, &w)?;
    let err = if a.bounds_hold && a.nesting_holds { a.max_checkpoint_error } else { f64::INFINITY };
    Ok((w.certified_gap, err))
}

fn morse_smale() -> Line {
    let ms = irregular_check("morse-smale-rotation", 1);
    let dw = match irregular_check("double-well-rotation", 2) {
        Ok((g, e)) => format!("double-well variant: gap {g:.6}, audit error {e:.1e}"),
        Err(e) => format!("double-well variant: {e}"),
    };
    match ms {
        Ok((g, e)) => {
            line(g >= 2.0 / 3.0 - 1e-12 && e <= 1e-9, format!("gap {g:.6} (>= 2/3), audit error {e:.1e}; {dw}"))
        }
        Err(e) => line(false, format!("construction stopped: {e}; {dw}")),
    }
}

fn domination() -> Line {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut case = |name: &str, c: &Cocycle, want: Option<usize>| {
        let got = eigen_split(&c.matrices()[0], 1).and_then(|(e, f)| domination_test(c, &e, &f, 20));
        let pass = match (&got, want) {
            (Ok(k), Some(w)) => *k == w,
            (Err(Error::NotDominated { .. }), None) => true,
            _ => false,
        };
        ok &= pass;
        parts.push(match got {
            Ok(k) => format!("{name} k = {k}"),
            Err(e) => format!("{name}: {e}"),
        });
    };
    case("B", &different_types_b(), Some(2));
    case("constant cat", &Cocycle::constant(cat_matrix()).unwrap(), Some(1));
    case("identity", load_preset("identity").unwrap().cocycle().unwrap(), None);
    line(ok, parts.join("; "))
}

fn rotation_numbers() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let theta = rng.random::<f64>() * TAU;
        let want = (theta / PI).rem_euclid(1.0);
        let got = rotation_number(&rotation2(theta), 100_000).unwrap();
        let d = (got - want).abs();
        worst = worst.max(d.min(1.0 - d));
    }
    let hyp = [
        cat_matrix(),
        DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
        DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, -0.5]),
    ];
    let zeros = hyp.iter().all(|m| rotation_number(m, 1000).unwrap() == 0.0);
    line(worst <= 1e-6 && zeros, format!("10 angles, max error {worst:.2e} (tol 1e-6); hyperbolic exactly 0: {zeros}"))
}

fn entropy_suite() -> Line {
    let start = Instant::now();
    let target = cat_entropy();
    let cat = load_preset("cat-map").unwrap();
    let cat = cat.semigroup().unwrap();
    let one = Symbol::new(1).unwrap();
    let eps = [0.25, 0.125];
    let n: Vec<usize> = (1..=8).collect();
    let opts = EntropyOptions { resolution: Some(0.002), ..Default::default() };
    let mut ok = true;
    let mut parts = Vec::new();

    let top = topological_entropy_estimate(&SingleMap { system: cat, symbol: one }, &eps, &n, &opts).unwrap();
    let rel = (top.value - target).abs() / target;
    ok &= rel <= 0.10;
    parts.push(format!("cat {:.4} (rel {rel:.3})", top.value));

    let g = load_preset("golden-rotation").unwrap();
    let rot = topological_entropy_estimate(
        &SingleMap { system: g.semigroup().unwrap(), symbol: one },
        &[0.1, 0.05],
        &(1..=20).collect::<Vec<_>>(),
        &EntropyOptions::default(),
    )
    .unwrap();
    let two =
        GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden()), Generator::rotation(2f64.sqrt())])
            .unwrap();
    let glw =
        glw_entropy_estimate(&two, &[0.1, 0.05], &(1..=8).collect::<Vec<_>>(), &EntropyOptions::default()).unwrap();
    let buf =
        bufetov_entropy_estimate(&two, &[0.1, 0.05], &(1..=8).collect::<Vec<_>>(), &EntropyOptions::default()).unwrap();
    let worst_rot = rot.value.max(glw.value).max(buf.value);
    ok &= worst_rot <= 0.02;
    parts.push(format!("rotations top {:.4} glw {:.4} bufetov {:.4}", rot.value, glw.value, buf.value));

    let sh = topological_entropy_estimate(
        &ShiftMap { kappa: 2 },
        &[(-1f64).exp()],
        &(1..=14).collect::<Vec<_>>(),
        &EntropyOptions::default(),
    )
    .unwrap();
    let rel_sh = (sh.value - 2f64.ln()).abs() / 2f64.ln();
    ok &= rel_sh <= 0.05;
    parts.push(format!("2-shift {:.4} (rel {rel_sh:.3})", sh.value));

    let sampler = |r: &mut ChaCha8Rng| Point::torus(&[r.random::<f64>(), r.random::<f64>()]);
    let katok =
        katok_entropy_estimate(&SingleMap { system: cat, symbol: one }, &sampler, 200_000, &eps, &n, 0.1, 0).unwrap();
    let rel_k = (katok.value - target).abs() / target;
    ok &= rel_k <= 0.15;
    parts.push(format!("katok {:.4} (rel {rel_k:.3})", katok.value));

    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 600.0;
    parts.push(format!("suite {secs:.0} s < 600 s"));
    line(ok, parts.join("; "))
}

fn all_words(kappa: usize, max_len: usize) -> Vec<FiniteWord> {
    let mut out = Vec::new();
    let mut level = vec![FiniteWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for s in 1..=kappa {
                let mut v = w.clone();
                v.push(Symbol::new(s).unwrap());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

fn rigidity() -> Line {
    let mut worst_sum = 0.0f64;
    for name in [
        "different-types-A",
        "different-types-B",
        "irreducible-vs-accessible-A",
        "irreducible-vs-accessible-B",
        "symplectic-center",
        "constant-hyperbolic",
    ] {
        let p = load_preset(name).unwrap();
        let c = p.cocycle().unwrap();
        for w in all_words(c.kappa(), 4) {
            let e = periodic_spectrum(c, &w).unwrap();
            worst_sum = worst_sum.max(e.exponents.iter().sum::<f64>().abs());
        }
    }
    let b = different_types_b();
    let words = [FiniteWord::from_values(&[1]).unwrap(), FiniteWord::from_values(&[2]).unwrap()];
    let r = spectrum_report(&b, &words, 1e-6).unwrap();
    let ok = worst_sum <= 1e-8 && r.max_deviation > 0.3 && r.verdict == SpectrumVerdict::DistinctSpectra;
    line(
        ok,
        format!(
            "max |sum of exponents| {worst_sum:.1e} (tol 1e-8); B (1) vs (2) max difference {:.4}, {}",
            r.max_deviation, r.verdict
        ),
    )
}

fn cones() -> Line {
    let m = cat_matrix();
    let cp = hyperbolic_cones(&m, 1).unwrap();
    match cone_check(&m, &cp, 10_000, 30, 0) {
        Ok(c) => line(
            c.passed(),
            format!(
                "{} samples, n <= {}: (i) {} {}, (ii) {}, (iii) {} over {} pairs, worst {:.1e}",
                c.samples,
                c.n_max,
                c.plus_invariant,
                c.minus_invariant,
                c.expansion,
                c.contraction,
                c.contraction_pairs,
                c.worst
            ),
        ),
        Err(e) => line(false, e.to_string()),
    }
}

/// Compact versions of the property suites; the proptest targets cover them more widely.
fn properties() -> Line {
    let mut failed: Vec<&str> = Vec::new();
    let mut check = |name: &'static str, ok: bool| {
        if !ok {
            failed.push(name);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let spaces =
        [Space::Circle, Space::Torus(3), Space::Sphere2, Space::Projective(2), Space::Projective(3), Space::Shift(2)];
    let mut metric = true;
    for sp in &spaces {
        for _ in 0..300 {
            let (x, y, z) = (sp.random_point(&mut rng), sp.random_point(&mut rng), sp.random_point(&mut rng));
            let (dxy, dyx, dxz, dzy) = (
                distance(&x, &y).unwrap(),
                distance(&y, &x).unwrap(),
                distance(&x, &z).unwrap(),
                distance(&z, &y).unwrap(),
            );
            metric &= distance(&x, &x).unwrap() == 0.0 && dxy == dyx && dxy <= dxz + dzy + 1e-12;
            metric &= (0.0..=sp.diameter() + 1e-12).contains(&dxy);
        }
    }
    check("metric axioms", metric);

    let mut shift_law = true;
    for j in 0..20usize {
        let a: Vec<usize> = (0..30).map(|_| rng.random_range(1..=2)).collect();
        let mut b = a.clone();
        b[j] = 3 - b[j];
        let s =
            |v: &[usize]| WordStream::new(FiniteWord::from_values(v).unwrap(), Tail::Constant(Symbol::new(1).unwrap()));
        let (sa, sb) = (s(&a), s(&b));
        let d = shift_distance(&sa, &sb);
        shift_law &= (d - (-((j + 1) as f64)).exp()).abs() <= 1e-15;
        if j > 0 {
            shift_law &= (shift_distance(&sa.shift(1), &sb.shift(1)) - d * 1f64.exp()).abs() <= 1e-12;
        }
    }
    check("shift-metric law", shift_law);

    let ms = load_preset("morse-smale-rotation").unwrap();
    let ms = ms.semigroup().unwrap();
    let mut assoc = true;
    for _ in 0..200 {
        let words: Vec<FiniteWord> = (0..3)
            .map(|_| {
                let len = rng.random_range(0..6);
                FiniteWord::from_values(&(0..len).map(|_| rng.random_range(1..=2)).collect::<Vec<_>>()).unwrap()
            })
            .collect();
        let x = Point::circle(rng.random());
        let left = ms.compose_along(&words[0].concat(&words[1]).concat(&words[2]), &x).unwrap();
        let step = ms.compose_along(&words[0], &x).unwrap();
        let right = ms.compose_along(&words[1].concat(&words[2]), &step).unwrap();
        assoc &= distance(&left, &right).unwrap() <= 1e-12;
    }
    check("compose associativity", assoc);

    let sys = GeneratorSystem::new(Space::Circle, vec![Generator::sine_circle(0.1, 1).unwrap()]).unwrap();
    let lip = sys.lipschitz();
    let one = Symbol::new(1).unwrap();
    let mut balls = true;
    for _ in 0..100 {
        let x = Point::circle(rng.random());
        let n = rng.random_range(1..=6);
        let eps = 0.02 + 0.1 * rng.random::<f64>();
        let w = FiniteWord::repeat(one, n - 1);
        let fx = sys.compose_along(&FiniteWord::repeat(one, n), &x).unwrap();
        for _ in 0..20 {
            let y = Space::Circle.random_in_ball(&x, lip.powi(-(n as i32)) * eps, &mut rng);
            balls &= sys.dyn_ball_member(&w, &x, eps, &y);
            let z = Space::Circle.random_in_ball(&fx, lip.powi(-2 * n as i32) * eps, &mut rng);
            let back = sys.pullback(&FiniteWord::repeat(one, n), &z).unwrap();
            balls &= sys.dyn_ball_member(&w, &x, eps, &back);
        }
    }
    check("dynamic-ball containments", balls);

    let bad = Cocycle::new(vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])]);
    let presets_ok = skewdyn::list_presets().iter().all(|(n, _)| load_preset(n).and_then(|p| p.audit()).is_ok());
    check("SL determinant audit", bad.is_err() && presets_ok);

    let mut functorial = true;
    for _ in 0..200 {
        let a = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let b = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let p = Space::Projective(3).random_point(&mut rng);
        if let (Ok(l), Ok(r)) =
            (projective_step(&(&a * &b), &p), projective_step(&b, &p).and_then(|q| projective_step(&a, &q)))
        {
            functorial &= distance(&l, &r).unwrap() <= 1e-9;
        }
    }
    check("projective functoriality", functorial);

    let b = different_types_b();
    let mut submult = true;
    for k in 0..50u64 {
        let om = WordStream::random(2, k);
        let (n, m) = (rng.random_range(1..40usize), rng.random_range(1..40usize));
        let whole = (n + m) as f64 * product_log_norm(&b, &om, n + m).unwrap();
        let parts = n as f64 * product_log_norm(&b, &om, n).unwrap()
            + m as f64 * product_log_norm(&b, &om.shift(n), m).unwrap();
        submult &= whole <= parts + 1e-9;
    }
    check("submultiplicativity", submult);

    let rot = GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden()), Generator::identity()]).unwrap();
    let psi: &Observable = &cos_psi;
    let opts = IrregularOptions { mode: NestingMode::Shrinking, ..Default::default() };
    let shrink =
        construct_irregular_point(&rot, psi, &Point::circle(0.0), 1.0, 1, &Point::circle(0.5), -1.0, 0.03, 6, &opts)
            .and_then(|w| audit_witness(&rot, psi, &w))
            .is_ok_and(|a| a.passed());
    let dw = load_preset("double-well-rotation").unwrap();
    let dw = dw.semigroup().unwrap();
    let trap_opts = IrregularOptions { mode: NestingMode::Trapping, ..Default::default() };
    let trap =
        construct_irregular_point(dw, psi, &Point::circle(0.0), 1.0, 1, &Point::circle(0.5), -1.0, 0.03, 6, &trap_opts)
            .and_then(|w| audit_witness(dw, psi, &w))
            .is_ok_and(|a| a.passed());
    check("witness nested-ball audits", shrink && trap);

    let net_opts = EntropyOptions::default();
    let cat = load_preset("cat-map").unwrap();
    let e = topological_entropy_estimate(
        &SingleMap { system: cat.semigroup().unwrap(), symbol: one },
        &[0.3, 0.2],
        &[1, 2, 3, 4],
        &net_opts,
    )
    .unwrap();
    check("entropy-count monotonicity", e.is_monotone());

    let (t1, t2) = symplectic_angles();
    check("symplectic non-resonance", symplectic_center_check(t1, t2, 50) == Resonance::NonResonant);

    if failed.is_empty() {
        line(true, "metric, shift law, associativity, dynamic balls, SL audit, functoriality, submultiplicativity, witness audits, monotone counts, non-resonance")
    } else {
        line(false, format!("failing: {}", failed.join(", ")))
    }
}

fn main() {
    let results = [
        run(1, "golden-rotation hitting", golden_hitting),
        run(2, "cat-map hitting refutation", cat_refutation),
        run(3, "cocycle A directional exponent", cocycle_a_exponent),
        run(4, "cocycle B irregular direction", cocycle_b_direction),
        run(5, "Morse-Smale irregular point", morse_smale),
        run(6, "domination", domination),
        run(7, "rotation numbers", rotation_numbers),
        run(8, "entropy suite", entropy_suite),
        run(9, "rigidity diagnostic", rigidity),
        run(10, "cone suite", cones),
        run(11, "property suites", properties),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
