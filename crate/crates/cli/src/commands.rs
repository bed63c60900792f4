use crate::{AccArgs, ConesArgs, CoverArgs, DomArgs, EntArgs, HitArgs, IrrArgs, IrrDirArgs, LyapArgs};
use crate::{DirTraceArgs, Fail, Outcome};
use crate::{RotArgs, SpecArgs, SympArgs, TransArgs};
use nalgebra::DMatrix;
use serde_json::{Map, Value};
use skewdyn::cocycle::{self, DirectionOptions, DirectionPlan};
use skewdyn::entropy::{self, Dynamics, ShiftMap, SingleMap, WordDriven};
use skewdyn::hitting::{self, CoveringOutcome, DynBallSpec, HittingOptions, Transition};
use skewdyn::irregular::{self, BirkhoffTrace, IrregularOptions, NestingMode, Observable};
use skewdyn::report::{self, fmt_num, Cell, Csv};
use skewdyn::{Cocycle, EntropyKind, EntropyOptions, FiniteWord, GeneratorSystem, Point, PresetSystem, Space};
use skewdyn::{HittingOutcome, Symbol, WordStream};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Per-run output bookkeeping.
pub struct Ctx {
    pub name: String,
    pub seed: u64,
    pub out: PathBuf,
    pub header: Vec<(String, String)>,
}

impl Ctx {
    pub fn new(name: &str, seed: u64, out: PathBuf) -> Self {
        Ctx { name: name.into(), seed, out, header: Vec::new() }
    }

    /// Records the command, seed and every explicitly set parameter.
    pub fn echo(&mut self, params: &Map<String, Value>) {
        self.header = vec![("command".into(), self.name.clone()), ("seed".into(), self.seed.to_string())];
        for (k, v) in params {
            let s = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            self.header.push((k.clone(), s));
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn csv(&self, columns: &[&str]) -> Csv {
        Csv::new(&self.header, columns)
    }

    pub fn write(&self, file: &str, content: &str) -> Result<(), Fail> {
        std::fs::create_dir_all(&self.out)?;
        std::fs::write(self.out.join(file), content)?;
        Ok(())
    }

    pub fn write_csv(&self, file: &str, csv: &Csv) -> Result<(), Fail> {
        self.write(file, &csv.render())
    }

    /// Writes `<name>.txt` with the config echo and prints the body.
    pub fn report(&self, body: &str) -> Result<(), Fail> {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s.push_str(body);
        self.write(&format!("{}.txt", self.name), &s)?;
        print!("{body}");
        Ok(())
    }
}

fn preset(name: &str) -> Result<skewdyn::Preset, Fail> {
    skewdyn::load_preset(name).map_err(Fail::from)
}

fn semigroup(name: &str) -> Result<GeneratorSystem, Fail> {
    match preset(name)?.system {
        PresetSystem::Semigroup(s) => Ok(s),
        _ => Err(Fail::config(format!("preset `{name}` is not a semigroup action"))),
    }
}

/// Cocycle from inline text, a file, or a preset, in that order.
fn cocycle_source(
    p: Option<&String>,
    file: Option<&String>,
    inline: Option<&String>,
    default: &str,
) -> Result<Cocycle, Fail> {
    if let Some(t) = inline {
        return Cocycle::parse(t).map_err(|e| Fail::config(e.to_string()));
    }
    if let Some(f) = file {
        let t = std::fs::read_to_string(f).map_err(|e| Fail::config(format!("cannot read {f}: {e}")))?;
        return Cocycle::parse(&t).map_err(|e| Fail::config(e.to_string()));
    }
    let name = p.map(String::as_str).unwrap_or(default);
    match preset(name)?.system {
        PresetSystem::Cocycle(c) => Ok(c),
        _ => Err(Fail::config(format!("preset `{name}` is not a cocycle"))),
    }
}

fn point_in(space: &Space, c: &[f64]) -> Result<Point, Fail> {
    let bad = |n: usize| Fail::config(format!("{space:?} needs {n} coordinates, got {}", c.len()));
    match space {
        Space::Circle => (c.len() == 1).then(|| Point::circle(c[0])).ok_or_else(|| bad(1)),
        Space::Torus(d) => (c.len() == *d).then(|| Point::torus(c)).ok_or_else(|| bad(*d)),
        Space::Sphere2 => {
            if c.len() != 3 {
                return Err(bad(3));
            }
            Point::sphere([c[0], c[1], c[2]]).map_err(Fail::from)
        }
        Space::Projective(d) => {
            if c.len() != *d {
                return Err(bad(*d));
            }
            Point::projective(c).map_err(Fail::from)
        }
        Space::Shift(_) => Err(Fail::config("points of the shift are not accepted here")),
    }
}

fn symbols(text: &str, kappa: usize) -> Result<FiniteWord, Fail> {
    let vals: Result<Vec<usize>, _> =
        text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(str::parse).collect();
    let vals = vals.map_err(|_| Fail::config(format!("bad word `{text}`")))?;
    if vals.is_empty() {
        return Err(Fail::config("empty word"));
    }
    let w = FiniteWord::from_values(&vals).map_err(|e| Fail::config(e.to_string()))?;
    w.check(kappa).map_err(|e| Fail::config(e.to_string()))?;
    Ok(w)
}

fn omega(spec: Option<&String>, kappa: usize, seed: u64) -> Result<WordStream, Fail> {
    match spec.map(String::as_str) {
        None | Some("random") => Ok(WordStream::random(kappa, seed)),
        Some(t) => Ok(WordStream::periodic(symbols(t, kappa)?)),
    }
}

fn symbol(v: usize, kappa: usize) -> Result<Symbol, Fail> {
    let s = Symbol::new(v).map_err(|e| Fail::config(e.to_string()))?;
    if v > kappa {
        return Err(Fail::config(format!("generator {v} is outside 1..={kappa}")));
    }
    Ok(s)
}

pub fn observable(name: &str) -> Result<Box<Observable>, Fail> {
    use std::f64::consts::TAU;
    match name {
        "cos" => Ok(Box::new(|_: Symbol, p: &Point| (TAU * p.coords()[0]).cos())),
        "sin" => Ok(Box::new(|_: Symbol, p: &Point| (TAU * p.coords()[0]).sin())),
        other => Err(Fail::config(format!("unknown observable `{other}` (cos, sin)"))),
    }
}

/// Trace rows at a fixed stride, always including the `keep` times (1-based).
pub fn strided_trace(ctx: &Ctx, word: &FiniteWord, trace: &BirkhoffTrace, rows: usize, keep: &[u64]) -> Csv {
    let mut csv = ctx.csv(&["step", "symbol", "average"]);
    let n = trace.averages.len();
    let stride = n.div_ceil(rows.max(1)).max(1);
    let mut ki = 0;
    for j in 0..n {
        let step = (j + 1) as u64;
        while ki < keep.len() && keep[ki] < step {
            ki += 1;
        }
        let kept = ki < keep.len() && keep[ki] == step;
        if j % stride == 0 || j + 1 == n || kept {
            let s = word.symbols().get(j).map(|s| s.value()).unwrap_or(0);
            csv.push(vec![step.into(), s.into(), trace.averages[j].into()]);
        }
    }
    csv
}

fn finish_hitting(ctx: &Ctx, system: &GeneratorSystem, o: &HittingOutcome) -> Result<Outcome, Fail> {
    let mut body = report::hitting_text(o);
    match o {
        HittingOutcome::Certified(c) => {
            let _ = writeln!(body, "independent verification = {}", c.verify_all(system));
            let mut csv = ctx.csv(&["b1", "K_b1"]);
            for (i, k) in c.per_b1_k.iter().enumerate() {
                csv.push(vec![i.into(), (*k).into()]);
            }
            ctx.write_csv(&format!("{}-per-ball.csv", ctx.name), &csv)?;
            ctx.write_csv(&format!("{}-entries.csv", ctx.name), &report::certificate_csv(&ctx.header, c))?;
            ctx.report(&body)?;
            Ok(Outcome::Success)
        }
        HittingOutcome::Refuted(r) => {
            let mut csv = ctx.csv(&["p", "word", "delta", "log_radius"]);
            for d in &r.decay {
                csv.push(vec![d.p.into(), d.word.to_string().into(), d.delta.into(), d.radius.ln().into()]);
            }
            ctx.write_csv(&format!("{}-decay.csv", ctx.name), &csv)?;
            ctx.report(&body)?;
            Ok(Outcome::Refuted)
        }
    }
}

pub fn hitting_certify(ctx: &mut Ctx, a: &HitArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let system = semigroup(a.preset.as_deref().unwrap_or("golden-rotation"))?;
    let eps = a.eps.unwrap_or(0.1);
    let delta = a.delta.unwrap_or(eps / 8.0);
    let mut opts = HittingOptions::default();
    if let Some(b) = a.beam {
        opts.beam = b;
    }
    let o = hitting::certify_frequent_hitting_with(&system, eps, a.k_max.unwrap_or(100), delta, ctx.seed, &opts)?;
    finish_hitting(ctx, &system, &o)
}

pub fn covering(ctx: &mut Ctx, a: &CoverArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let system = semigroup(a.preset.as_deref().unwrap_or("golden-rotation"))?;
    let eps = a.eps.unwrap_or(0.1);
    let delta = a.delta.unwrap_or(eps / 8.0);
    let gens = match &a.generators {
        Some(g) => Some(g.iter().map(|&v| symbol(v, system.kappa())).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    let o = hitting::covering_time(&system, gens.as_deref(), eps, a.k_max.unwrap_or(1000), delta)?;
    match o {
        CoveringOutcome::Covered(c) => {
            let mut csv = ctx.csv(&["base", "point", "K", "route"]);
            for (i, (p, r)) in c.base_points.iter().zip(&c.routes).enumerate() {
                csv.push(vec![i.into(), report::fmt_point(p).into(), r.len().into(), r.to_string().into()]);
            }
            ctx.write_csv("covering-time.csv", &csv)?;
            ctx.report(&format!("covering time K = {}\nbase points = {}\n", c.k, c.base_points.len()))?;
            Ok(Outcome::Success)
        }
        CoveringOutcome::Refuted(r) => {
            ctx.report(&format!(
                "no covering within K_max = {}\nbase = {}\nbest covered fraction = {}\nroute = {}\n",
                r.k_max,
                report::fmt_point(&r.base),
                fmt_num(r.best_fraction),
                r.route
            ))?;
            Ok(Outcome::Refuted)
        }
    }
}

pub fn transition(ctx: &mut Ctx, a: &TransArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let system = semigroup(a.preset.as_deref().unwrap_or("morse-smale-rotation"))?;
    let k = system.kappa();
    let shadowed = symbol(a.shadowed.unwrap_or(k), k)?;
    let space = system.space().clone();
    let dflt = |v: f64| vec![v; space.dim().unwrap_or(1)];
    let x1 = point_in(&space, a.x1.as_deref().unwrap_or(&dflt(0.0)))?;
    let x2 = point_in(&space, a.x2.as_deref().unwrap_or(&dflt(0.5)))?;
    let eps = a.eps.unwrap_or(0.05);
    let src = DynBallSpec { center: x1, n: a.n1.unwrap_or(1), eps };
    let tgt = DynBallSpec { center: x2, n: a.n2.unwrap_or(1), eps };
    match hitting::min_transition_time(&system, shadowed, &src, &tgt, a.k_max.unwrap_or(1000), None)? {
        Transition::Found { p, word } => {
            ctx.report(&format!("transition time p = {p}\nword = {word}\n"))?;
            Ok(Outcome::Success)
        }
        Transition::NotFound { searched_up_to, exhaustive } => {
            ctx.report(&format!("no transition up to p = {searched_up_to} (exhaustive = {exhaustive})\n"))?;
            Ok(Outcome::Refuted)
        }
    }
}

pub fn irregular(ctx: &mut Ctx, a: &IrrArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let system = semigroup(a.preset.as_deref().unwrap_or("double-well-rotation"))?;
    let psi = observable(a.observable.as_deref().unwrap_or("cos"))?;
    let space = system.space().clone();
    let x1 = point_in(&space, a.x1.as_deref().unwrap_or(&[0.0]))?;
    let x2 = point_in(&space, a.x2.as_deref().unwrap_or(&[0.5]))?;
    let k = system.kappa();
    let mut opts = IrregularOptions { seed: ctx.seed, ..Default::default() };
    let shadowed = symbol(a.shadowed.unwrap_or(k), k)?;
    opts.shadowed = Some(shadowed);
    opts.mode = match a.mode.as_deref().unwrap_or("auto") {
        "auto" => NestingMode::Auto,
        "shrinking" => NestingMode::Shrinking,
        "trapping" => NestingMode::Trapping,
        m => return Err(Fail::config(format!("unknown mode `{m}` (auto, shrinking, trapping)"))),
    };
    if let Some(t) = a.threshold {
        opts.threshold = t;
    }
    let i1 = a.i1.unwrap_or_else(|| psi(shadowed, &x1));
    let i2 = a.i2.unwrap_or_else(|| psi(shadowed, &x2));
    let w = irregular::construct_irregular_point(
        &system,
        &*psi,
        &x1,
        i1,
        a.n1.unwrap_or(1),
        &x2,
        i2,
        a.eps.unwrap_or(0.03),
        a.depth.unwrap_or(8),
        &opts,
    )?;
    let audit = irregular::audit_witness(&system, &*psi, &w)?;
    let trace = irregular::birkhoff_trace(&system, &w.word_stream(), &w.point, &*psi, w.word.len())?;
    let csv = strided_trace(ctx, &w.word, &trace, a.trace_rows.unwrap_or(100_000), &w.checkpoint_times());
    ctx.write_csv("irregular-trace.csv", &csv)?;
    let mut body = report::witness_text(&w);
    let _ = writeln!(
        body,
        "audit: max checkpoint error {} bounds {} nesting {} -> {}",
        fmt_num(audit.max_checkpoint_error),
        audit.bounds_hold,
        audit.nesting_holds,
        if audit.passed() { "pass" } else { "FAIL" }
    );
    ctx.report(&body)?;
    if audit.passed() {
        Ok(Outcome::Success)
    } else {
        Err(Fail { code: 1, message: "witness failed its independent audit".into() })
    }
}

pub fn lyapunov(ctx: &mut Ctx, a: &LyapArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "different-types-A")?;
    let om = omega(a.omega.as_ref(), c.kappa(), ctx.seed)?;
    let n = a.n.unwrap_or(5000);
    let spec = cocycle::lyapunov_spectrum(&c, &om, n)?;
    let top = cocycle::product_log_norm(&c, &om, n)? / n as f64;
    let mut csv = ctx.csv(&["index", "exponent"]);
    for (i, x) in spec.iter().enumerate() {
        csv.push(vec![(i + 1).into(), (*x).into()]);
    }
    ctx.write_csv("lyapunov.csv", &csv)?;
    let list: Vec<String> = spec.iter().map(|x| fmt_num(*x)).collect();
    ctx.report(&format!(
        "exponents = {}\n(1/n) log |A^(n)| = {}\nsum = {}\n",
        list.join(" "),
        fmt_num(top),
        fmt_num(spec.iter().sum())
    ))?;
    Ok(Outcome::Success)
}

fn default_v(a: Option<&Vec<f64>>, d: usize) -> Vec<f64> {
    a.cloned().unwrap_or_else(|| vec![1.0; d])
}

pub fn direction_trace(ctx: &mut Ctx, a: &DirTraceArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "different-types-A")?;
    let om = omega(a.omega.as_ref(), c.kappa(), ctx.seed)?;
    let n = a.n.unwrap_or(5000);
    let v = default_v(a.v.as_ref(), c.dim());
    let t = cocycle::directional_exponent_trace(&c, &om, &v, n)?;
    let csv = strided_trace(ctx, &om.take(n), &t, a.trace_rows.unwrap_or(100_000), &[]);
    ctx.write_csv("direction-trace.csv", &csv)?;
    ctx.report(&format!("exponent at n = {n}: {}\n", fmt_num(*t.averages.last().unwrap_or(&f64::NAN))))?;
    Ok(Outcome::Success)
}

fn columns(data: &[f64], d: usize) -> Result<DMatrix<f64>, Fail> {
    if data.is_empty() || !data.len().is_multiple_of(d) {
        return Err(Fail::config(format!("basis needs a multiple of {d} entries")));
    }
    Ok(DMatrix::from_column_slice(d, data.len() / d, data))
}

pub fn domination(ctx: &mut Ctx, a: &DomArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "different-types-B")?;
    let d = c.dim();
    let (e, f) = match (&a.e, &a.f) {
        (Some(e), Some(f)) => (columns(e, d)?, columns(f, d)?),
        (None, None) => {
            cocycle::eigen_split(&c.matrices()[0], a.f_dim.unwrap_or(1)).map_err(|e| Fail::config(e.to_string()))?
        }
        _ => return Err(Fail::config("give both e and f, or neither")),
    };
    let k_max = a.k_max.unwrap_or(20);
    match cocycle::domination_test(&c, &e, &f, k_max) {
        Ok(k) => {
            ctx.report(&format!("dominated with k = {k}\n"))?;
            Ok(Outcome::Success)
        }
        Err(skewdyn::Error::NotDominated { k_max }) => {
            ctx.report(&format!("not dominated for any k <= {k_max}\n"))?;
            Ok(Outcome::Refuted)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cones(ctx: &mut Ctx, a: &ConesArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "constant-hyperbolic")?;
    let m = c.matrix(symbol(a.generator.unwrap_or(1), c.kappa())?).clone();
    let cp = cocycle::hyperbolic_cones(&m, a.stable_dim.unwrap_or(c.dim() / 2))?;
    let chk = cocycle::cone_check(&m, &cp, a.samples.unwrap_or(10_000), a.n_max.unwrap_or(30), ctx.seed)?;
    let mut body = String::new();
    let _ = writeln!(body, "theta = {}", fmt_num(cp.theta));
    let _ = writeln!(body, "zeta = {}", fmt_num(cp.zeta));
    let _ = writeln!(body, "dim E+ = {}, dim E- = {}", cp.dim_plus, cp.dim_minus);
    for (s, n, l) in &cp.blocks {
        let _ = writeln!(body, "block start {s} size {n} modulus {}", fmt_num(*l));
    }
    let _ = writeln!(body, "samples = {} per cone, n <= {}", chk.samples, chk.n_max);
    let _ = writeln!(body, "(i) M C+ inside C+: {}", chk.plus_invariant);
    let _ = writeln!(body, "(i) M^-1 C- inside C-: {}", chk.minus_invariant);
    let _ = writeln!(body, "(ii) expansion on C+: {}", chk.expansion);
    let _ = writeln!(body, "(iii) contraction along C- ({} pairs): {}", chk.contraction_pairs, chk.contraction);
    let _ = writeln!(body, "worst relative violation = {}", fmt_num(chk.worst));
    ctx.report(&body)?;
    Ok(if chk.passed() { Outcome::Success } else { Outcome::Refuted })
}

pub fn accessibility(ctx: &mut Ctx, a: &AccArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c =
        cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "irreducible-vs-accessible-A")?;
    let eps = a.eps.unwrap_or(0.1);
    let o = cocycle::accessibility_certify(&c, eps, a.k_max.unwrap_or(100), a.delta.unwrap_or(eps / 8.0), ctx.seed)?;
    finish_hitting(ctx, &c.projectivized()?, &o)
}

pub fn irregular_direction(ctx: &mut Ctx, a: &IrrDirArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "different-types-B")?;
    let v = default_v(a.v.as_ref(), c.dim());
    let plan = match a.plan.as_deref().unwrap_or("auto") {
        "auto" => DirectionPlan::Auto,
        "frequency" => DirectionPlan::Frequency,
        "cones" => DirectionPlan::Cones,
        p => return Err(Fail::config(format!("unknown plan `{p}` (auto, frequency, cones)"))),
    };
    let mut opts = DirectionOptions { plan, ..Default::default() };
    if let Some(t) = a.threshold {
        opts.threshold = t;
    }
    if let Some(t) = a.tolerance {
        opts.tolerance = t;
    }
    if let Some(n) = a.n1 {
        opts.n1 = n;
    }
    let w = cocycle::irregular_direction(&c, &v, a.depth.unwrap_or(6), &opts)?;
    let err = cocycle::audit_direction(&c, &w)?;
    let t = cocycle::directional_exponent_trace(&c, &w.word_stream(), &v, w.word.len())?;
    let keep: Vec<u64> = w.checkpoints.iter().map(|c| c.time).collect();
    let csv = strided_trace(ctx, &w.word, &t, a.trace_rows.unwrap_or(100_000), &keep);
    ctx.write_csv("irregular-direction-trace.csv", &csv)?;
    let mut body = report::direction_text(&w);
    let _ = writeln!(body, "audit: max checkpoint error {}", fmt_num(err));
    ctx.report(&body)?;
    Ok(Outcome::Success)
}

pub fn rotation(ctx: &mut Ctx, a: &RotArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let m = if let Some(e) = &a.matrix {
        if e.len() != 4 {
            return Err(Fail::config("matrix needs 4 entries"));
        }
        DMatrix::from_row_slice(2, 2, e)
    } else if let Some(t) = a.angle {
        skewdyn::presets::rotation2(t)
    } else {
        let c = cocycle_source(
            a.preset.as_ref(),
            a.cocycle_file.as_ref(),
            a.cocycle.as_ref(),
            "irreducible-vs-accessible-A",
        )?;
        c.matrix(symbol(a.generator.unwrap_or(1), c.kappa())?).clone()
    };
    let r = cocycle::rotation_number(&m, a.n_iter.unwrap_or(100_000))?;
    ctx.report(&format!("rotation number = {}\n", fmt_num(r)))?;
    Ok(Outcome::Success)
}

pub fn spectrum(ctx: &mut Ctx, a: &SpecArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let c = cocycle_source(a.preset.as_ref(), a.cocycle_file.as_ref(), a.cocycle.as_ref(), "different-types-B")?;
    let words: Vec<FiniteWord> = match &a.words {
        Some(ws) => ws.iter().map(|w| symbols(w, c.kappa())).collect::<Result<_, _>>()?,
        None => {
            let mut v: Vec<FiniteWord> = (1..=c.kappa()).map(|s| FiniteWord::from_values(&[s]).unwrap()).collect();
            if c.kappa() >= 2 {
                v.push(FiniteWord::from_values(&[1, 2]).unwrap());
            }
            v
        }
    };
    let r = cocycle::spectrum_report(&c, &words, a.tolerance.unwrap_or(1e-6))?;
    let d = c.dim();
    let mut cols = vec!["word".to_string()];
    cols.extend((1..=d).map(|i| format!("lambda{i}")));
    cols.push("sum".into());
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut csv = ctx.csv(&refs);
    let mut body = String::new();
    for e in &r.entries {
        let mut row: Vec<Cell> = vec![e.word.to_string().into()];
        row.extend(e.exponents.iter().map(|x| Cell::Num(*x)));
        row.push(Cell::Num(e.exponents.iter().sum()));
        csv.push(row);
        let list: Vec<String> = e.exponents.iter().map(|x| fmt_num(*x)).collect();
        let _ = writeln!(body, "({}) {}", e.word, list.join(" "));
    }
    ctx.write_csv("spectrum.csv", &csv)?;
    let _ = writeln!(body, "max deviation = {}\nverdict = {}", fmt_num(r.max_deviation), r.verdict);
    ctx.report(&body)?;
    Ok(Outcome::Success)
}

pub fn symplectic(ctx: &mut Ctx, a: &SympArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let (d1, d2) = skewdyn::presets::symplectic_angles();
    let r = cocycle::symplectic_center_check(a.theta1.unwrap_or(d1), a.theta2.unwrap_or(d2), a.order.unwrap_or(50));
    match r {
        cocycle::Resonance::NonResonant => {
            ctx.report("non-resonant\n")?;
            Ok(Outcome::Success)
        }
        cocycle::Resonance::Resonant(m, n) => {
            ctx.report(&format!("resonant: m = {m}, n = {n}\n"))?;
            Ok(Outcome::Refuted)
        }
    }
}

pub fn entropy(ctx: &mut Ctx, kind: EntropyKind, a: &EntArgs, echo: &Map<String, Value>) -> Result<Outcome, Fail> {
    ctx.echo(echo);
    let name = a.preset.as_deref().unwrap_or("cat-map");
    let eps = a.eps.clone().unwrap_or_else(|| vec![0.25, 0.125]);
    let ns = a.n.clone().unwrap_or_else(|| (1..=8).collect());
    let opts = EntropyOptions {
        resolution: a.resolution,
        seed: ctx.seed,
        word_cap: a.word_cap.unwrap_or(4096),
        word_samples: a.word_samples.unwrap_or(64),
        ..Default::default()
    };
    let p = preset(name)?;
    let est = match (&p.system, kind) {
        (PresetSystem::Shift(k), EntropyKind::Topological) => {
            entropy::topological_entropy_estimate(&ShiftMap { kappa: *k }, &eps, &ns, &opts)?
        }
        (PresetSystem::Semigroup(s), EntropyKind::Topological | EntropyKind::Katok) => {
            let word;
            let single;
            let dynamics: &dyn Dynamics = match &a.word {
                Some(w) => {
                    word = WordDriven { system: s, word: symbols(w, s.kappa())? };
                    &word
                }
                None => {
                    single = SingleMap { system: s, symbol: symbol(a.symbol.unwrap_or(1), s.kappa())? };
                    &single
                }
            };
            if kind == EntropyKind::Katok {
                let space = s.space().clone();
                let sampler = move |r: &mut rand_chacha::ChaCha8Rng| space.random_point(r);
                let rho = a.rho.unwrap_or(0.1);
                entropy::katok_entropy_estimate(
                    dynamics,
                    &sampler,
                    a.samples.unwrap_or(200_000),
                    &eps,
                    &ns,
                    rho,
                    ctx.seed,
                )?
            } else {
                entropy::topological_entropy_estimate(dynamics, &eps, &ns, &opts)?
            }
        }
        (PresetSystem::Semigroup(s), EntropyKind::Glw) => entropy::glw_entropy_estimate(s, &eps, &ns, &opts)?,
        (PresetSystem::Semigroup(s), EntropyKind::Bufetov) => entropy::bufetov_entropy_estimate(s, &eps, &ns, &opts)?,
        _ => return Err(Fail::config(format!("entropy {kind} is not available for preset `{name}`"))),
    };
    let csv = report::entropy_csv(&ctx.header, &est);
    ctx.write_csv(&format!("{}.csv", ctx.name), &csv)?;
    if let Some(se) = &est.std_err {
        let mut s = report::entropy_csv(&ctx.header, &est);
        s.rows = se
            .iter()
            .zip(&est.n)
            .map(|(r, n)| std::iter::once(Cell::from(*n)).chain(r.iter().map(|x| Cell::Num(*x))).collect())
            .collect();
        ctx.write_csv(&format!("{}-stderr.csv", ctx.name), &s)?;
    }
    ctx.report(&format!("{}\n", report::entropy_summary(&est)))?;
    Ok(Outcome::Success)
}
