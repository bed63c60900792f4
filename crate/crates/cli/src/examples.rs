//! Reproduction harness: each example runs the commands that exhibit its
//! claim, writing every output under `<out>/<example>/`.

use crate::commands::{self, Ctx};
use crate::{AccArgs, ConesArgs, DirTraceArgs, DomArgs, EntArgs, Fail, HitArgs, IrrArgs, IrrDirArgs, Outcome};
use crate::{SpecArgs, SympArgs};
use serde::Serialize;
use serde_json::{Map, Value};
use skewdyn::report::{fmt_num, Csv};
use skewdyn::EntropyKind;
use std::path::Path;

const GROUPS: &[&str] = &["different-types", "irreducible-vs-accessible", "morse-smale"];

fn echo<T: Serialize>(a: &T) -> Map<String, Value> {
    match serde_json::to_value(a) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

struct Runner<'a> {
    seed: u64,
    dir: &'a Path,
}

impl Runner<'_> {
    fn ctx(&self, name: &str) -> Ctx {
        Ctx::new(name, self.seed, self.dir.to_path_buf())
    }

    /// Runs one step; refutation evidence is an expected result here.
    fn step<T: Serialize>(
        &self,
        title: &str,
        name: &str,
        args: &T,
        f: impl FnOnce(&mut Ctx, &T, &Map<String, Value>) -> Result<Outcome, Fail>,
    ) -> Result<(), Fail> {
        println!("== {title}");
        f(&mut self.ctx(name), args, &echo(args)).map(|_| ())
    }
}

pub fn run(name: &str, seed: u64, out: &Path) -> Result<Outcome, Fail> {
    let known = skewdyn::list_presets().iter().any(|(n, _)| *n == name) || GROUPS.contains(&name);
    if !known {
        let mut names: Vec<&str> = skewdyn::list_presets().iter().map(|(n, _)| *n).collect();
        names.extend(GROUPS);
        return Err(Fail::config(format!("unknown example `{name}`; valid names: {}", names.join(", "))));
    }
    let dir = out.join(name);
    let r = Runner { seed, dir: &dir };
    match name {
        "golden-rotation" => golden(&r)?,
        "t3-translations" | "s2-rotations" | "projective-rotation" => {
            let eps = match name {
                "projective-rotation" => 0.1,
                "s2-rotations" => 0.5,
                _ => 0.4,
            };
            let a = HitArgs { preset: Some(name.into()), eps: Some(eps), ..Default::default() };
            r.step(&format!("frequent hitting, eps = {eps}"), "hitting-certify", &a, commands::hitting_certify)?;
        }
        "symplectic-center" => {
            let a = SympArgs::default();
            r.step("non-resonance scan of the center", "symplectic-check", &a, commands::symplectic)?;
            let s = SpecArgs { preset: Some(name.into()), words: Some(vec!["1".into()]), ..Default::default() };
            r.step("spectrum of the center (all exponents zero)", "spectrum", &s, commands::spectrum)?;
        }
        "cat-map" => {
            let a = HitArgs { preset: Some("cat-map".into()), eps: Some(0.1), k_max: Some(50), ..Default::default() };
            r.step("frequent hitting fails: inner radius decays", "hitting-certify", &a, commands::hitting_certify)?;
            let e = EntArgs { preset: Some("cat-map".into()), resolution: Some(0.002), ..Default::default() };
            r.step("topological entropy", "entropy-top", &e, |c, a, m| {
                commands::entropy(c, EntropyKind::Topological, a, m)
            })?;
        }
        "shift-2" => {
            let e = EntArgs {
                preset: Some("shift-2".into()),
                eps: Some(vec![(-1f64).exp()]),
                n: Some((1..=14).collect()),
                ..Default::default()
            };
            r.step("entropy of the full 2-shift", "entropy-top", &e, |c, a, m| {
                commands::entropy(c, EntropyKind::Topological, a, m)
            })?;
        }
        "double-well-rotation" => double_well(&r)?,
        "morse-smale-rotation" | "morse-smale" => {
            let a = IrrArgs {
                preset: Some("morse-smale-rotation".into()),
                shadowed: Some(1),
                x1: Some(vec![0.0]),
                x2: Some(vec![0.5]),
                ..Default::default()
            };
            println!("== irregular point between the attractor 0 and the repeller 1/2");
            if let Err(f) = commands::irregular(&mut r.ctx("irregular-morse-smale"), &a, &echo(&a)) {
                println!("construction stopped (exit {}): {}", f.code, f.message);
            }
            double_well(&r)?;
        }
        "different-types" | "different-types-A" | "different-types-B" => {
            if name != "different-types-B" {
                different_types_a(&r)?;
            }
            if name != "different-types-A" {
                let a = IrrDirArgs {
                    preset: Some("different-types-B".into()),
                    v: Some(vec![1.0, 1.0, 1.0]),
                    ..Default::default()
                };
                r.step(
                    "cocycle B: oscillating exponent between log 2 and log 3",
                    "irregular-direction",
                    &a,
                    commands::irregular_direction,
                )?;
                let s = SpecArgs { preset: Some("different-types-B".into()), ..Default::default() };
                r.step("cocycle B: periodic spectra", "spectrum", &s, commands::spectrum)?;
                let d = DomArgs { preset: Some("different-types-B".into()), ..Default::default() };
                r.step("cocycle B: domination", "domination", &d, commands::domination)?;
            }
        }
        "irreducible-vs-accessible" | "irreducible-vs-accessible-A" | "irreducible-vs-accessible-B" => {
            if name != "irreducible-vs-accessible-B" {
                let a = AccArgs { preset: Some("irreducible-vs-accessible-A".into()), ..Default::default() };
                r.step(
                    "cocycle A is strongly projectively accessible",
                    "accessibility-A",
                    &a,
                    commands::accessibility,
                )?;
            }
            if name != "irreducible-vs-accessible-A" {
                let a = AccArgs {
                    preset: Some("irreducible-vs-accessible-B".into()),
                    k_max: Some(8),
                    ..Default::default()
                };
                r.step("cocycle B is not", "accessibility-B", &a, commands::accessibility)?;
            }
        }
        "constant-hyperbolic" => {
            let d = DomArgs { preset: Some(name.into()), ..Default::default() };
            r.step("domination", "domination", &d, commands::domination)?;
            let c = ConesArgs { preset: Some(name.into()), ..Default::default() };
            r.step("cone properties", "cones", &c, commands::cones)?;
            let t = DirTraceArgs { preset: Some(name.into()), v: Some(vec![1.0, 0.3]), ..Default::default() };
            r.step("exponent of a generic direction", "direction-trace", &t, commands::direction_trace)?;
        }
        "identity" => {
            let d = DomArgs { preset: Some(name.into()), ..Default::default() };
            r.step("no domination", "domination", &d, commands::domination)?;
        }
        _ => unreachable!(),
    }
    println!("outputs in {}", dir.display());
    Ok(Outcome::Success)
}

fn golden(r: &Runner) -> Result<(), Fail> {
    let mut ctx = r.ctx("golden-rotation-K");
    ctx.echo(&Map::new());
    let mut csv: Csv = ctx.csv(&["eps", "K", "bound"]);
    for eps in [0.2, 0.1, 0.05] {
        let a = HitArgs { preset: Some("golden-rotation".into()), eps: Some(eps), ..Default::default() };
        let mut c = r.ctx(&format!("hitting-eps-{eps}"));
        println!("== frequent hitting, eps = {eps}");
        commands::hitting_certify(&mut c, &a, &echo(&a))?;
        let text = std::fs::read_to_string(r.dir.join(format!("hitting-eps-{eps}.txt")))?;
        let k: usize = text
            .lines()
            .find_map(|l| l.strip_prefix("K = "))
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Fail::config("no certificate produced"))?;
        csv.push(vec![eps.into(), k.into(), ((3.0 / eps).floor() as usize + 1).into()]);
    }
    ctx.write_csv("golden-rotation-K.csv", &csv)
}

fn double_well(r: &Runner) -> Result<(), Fail> {
    let a = IrrArgs { preset: Some("double-well-rotation".into()), ..Default::default() };
    r.step("irregular point between two attracting wells", "irregular", &a, commands::irregular)
}

fn different_types_a(r: &Runner) -> Result<(), Fail> {
    use rand::{Rng, SeedableRng};
    use skewdyn::cocycle::directional_exponent_trace;
    println!("== cocycle A: exponent log 3 for directions off the plane e1 = 0");
    let c = skewdyn::presets::different_types_a();
    let mut ctx = r.ctx("different-types-A");
    ctx.echo(&Map::new());
    ctx.set("n", 5000);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(r.seed);
    let mut csv = ctx.csv(&["v1", "v2", "v3", "omega_seed", "exponent", "log3"]);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let v: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for k in 0..5u64 {
            let om = skewdyn::WordStream::random(2, r.seed.wrapping_add(1000 + k));
            let t = directional_exponent_trace(&c, &om, &v, 5000)?;
            let x = *t.averages.last().unwrap();
            worst = worst.max((x - 3f64.ln()).abs());
            csv.push(vec![
                v[0].into(),
                v[1].into(),
                v[2].into(),
                (r.seed + 1000 + k).into(),
                x.into(),
                3f64.ln().into(),
            ]);
        }
    }
    ctx.write_csv("different-types-A.csv", &csv)?;
    let t =
        DirTraceArgs { preset: Some("different-types-A".into()), v: Some(vec![0.6, -0.3, 0.74]), ..Default::default() };
    r.step("cocycle A: running exponent of one direction", "direction-trace-A", &t, commands::direction_trace)?;
    ctx.report(&format!("largest |exponent - log 3| over 100 runs = {}\n", fmt_num(worst)))
}
