//! Points whose Birkhoff averages oscillate between two targets.
//!
//! The orbit alternates between long blocks along the shadowed generator
//! `f_κ`, each near one of two targets `x_1, x_2`, and short transition
//! words. Block lengths grow fast enough that the last block dominates every
//! checkpoint average.

use crate::error::{Error, Result};
use crate::hitting::{all_symbols, contained_center, Node, Search};
use crate::semigroup::GeneratorSystem;
use crate::spaces::{ball_net, dist, FiniteWord, Point, Symbol, Tail, WordStream};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A potential `ψ(ω_0, x)`; point observables ignore the symbol.
pub type Observable = dyn Fn(Symbol, &Point) -> f64 + Send + Sync;

/// Block lengths `n_j` and transition budgets `K_j` of the nested construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub lipschitz: f64,
    pub eps: f64,
    pub n: Vec<u64>,
    /// `K_j` for `j = 1..depth-1`.
    pub k: Vec<u64>,
    /// `Σ_{i≤j}(n_i + K_i) / n_{j+1}` for `j = 1..depth-1`.
    pub ratios: Vec<f64>,
}

impl Schedule {
    pub fn depth(&self) -> usize {
        self.n.len()
    }

    /// `n_{j+1} > 2 n_j + 2 log 2 / log L` at every level (any growth when `L = 1`).
    pub fn satisfies_growth(&self) -> bool {
        let gap = growth_gap(self.lipschitz);
        self.n.windows(2).all(|w| w[1] >= 2 * w[0] + gap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleOptions {
    pub n1: u64,
    /// Lower bound on the level multiplier `m_j = max(j, min_multiplier)`.
    pub min_multiplier: u64,
    /// Largest admissible block length.
    pub orbit_budget: f64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions { n1: 1, min_multiplier: 1, orbit_budget: 9.007_199_254_740_992e15 }
    }
}

/// Smallest integer `g` with `n + g > 2·log 2 / log L + n` for all integer `n`.
fn growth_gap(l: f64) -> u64 {
    if l <= 1.0 {
        return 1;
    }
    let x = 2.0 * 2f64.ln() / l.ln();
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u64 + 1
    } else {
        x.floor() as u64 + 1
    }
}

/// Schedule with `K_j = K(L^{-2j} ε / 2)` and
/// `n_{j+1} = max(2 n_j + gap, m_j Σ_{i≤j}(n_i + K_i))`, `m_j = max(j, min_multiplier)`.
pub fn build_schedule(l: f64, eps: f64, k_fn: &dyn Fn(f64) -> f64, depth: usize, threshold: f64) -> Result<Schedule> {
    build_schedule_with(l, eps, k_fn, depth, threshold, &ScheduleOptions::default())
}

pub fn build_schedule_with(
    l: f64,
    eps: f64,
    k_fn: &dyn Fn(f64) -> f64,
    depth: usize,
    threshold: f64,
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    if !(l > 1.0) {
        return Err(Error::DegenerateLipschitz);
    }
    schedule_core(l, eps, &|j| k_fn(l.powi(-2 * j as i32) * eps / 2.0), depth, threshold, opts)
}

/// Isometry mode: level radii `r_j = ε 2^{-j}` and budgets `K(r_j / 2)`.
pub fn build_isometric_schedule(
    eps: f64,
    k_fn: &dyn Fn(f64) -> f64,
    depth: usize,
    threshold: f64,
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    schedule_core(1.0, eps, &|j| k_fn(eps * 0.5f64.powi(j as i32) / 2.0), depth, threshold, opts)
}

fn schedule_core(
    l: f64,
    eps: f64,
    budget: &dyn Fn(usize) -> f64,
    depth: usize,
    threshold: f64,
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    if depth < 2 {
        return Err(Error::Invalid("a schedule needs at least two levels".into()));
    }
    if !(eps > 0.0) || !(threshold > 0.0) {
        return Err(Error::Invalid("eps and threshold must be positive".into()));
    }
    let gap = growth_gap(l) as f64;
    let mut n = vec![opts.n1.max(1) as f64];
    let mut k = Vec::new();
    let mut ratios = Vec::new();
    let mut total = 0.0;
    for j in 1..depth {
        let kj = budget(j).ceil().max(0.0);
        if !kj.is_finite() || kj > opts.orbit_budget {
            return Err(Error::DepthOverflow { level: j, n: kj });
        }
        total += n[j - 1] + kj;
        let m = (j as u64).max(opts.min_multiplier) as f64;
        let next = (2.0 * n[j - 1] + gap).max(m * total);
        if next > opts.orbit_budget {
            return Err(Error::DepthOverflow { level: j + 1, n: next });
        }
        k.push(kj);
        ratios.push(total / next);
        n.push(next);
    }
    let last = *ratios.last().unwrap();
    if last > threshold {
        return Err(Error::ThresholdNotReached { ratio: last, threshold });
    }
    Ok(Schedule {
        lipschitz: l,
        eps,
        n: n.into_iter().map(|x| x as u64).collect(),
        k: k.into_iter().map(|x| x as u64).collect(),
        ratios,
    })
}

/// Running averages `(1/m) Σ_{j<m} ψ(ω_j, f^j_ω x)` for `m = 1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffTrace {
    pub averages: Vec<f64>,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

pub fn birkhoff_trace(
    system: &GeneratorSystem,
    omega: &WordStream,
    x: &Point,
    psi: &Observable,
    n: usize,
) -> Result<BirkhoffTrace> {
    let word = omega.take(n);
    word.check(system.kappa())?;
    let mut p = x.clone();
    let mut sum = Sum::default();
    let mut averages = Vec::with_capacity(n);
    for (j, &s) in word.symbols().iter().enumerate() {
        sum.add(psi(s, &p));
        averages.push(sum.value() / (j + 1) as f64);
        p = system.generator(s).apply(&p);
    }
    Ok(BirkhoffTrace { averages })
}

/// Spread of a trace: extremes over the given checkpoints (1-based times),
/// or over the second half of the trace when none are given.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillationGap {
    pub low: f64,
    pub high: f64,
    pub gap: f64,
}

pub fn oscillation_gap(trace: &BirkhoffTrace, checkpoints: &[usize]) -> Result<OscillationGap> {
    let a = &trace.averages;
    if a.is_empty() {
        return Err(Error::Invalid("empty trace".into()));
    }
    let values: Vec<f64> = if checkpoints.is_empty() {
        a[a.len() / 2..].to_vec()
    } else {
        checkpoints
            .iter()
            .map(|&m| {
                if m == 0 || m > a.len() {
                    Err(Error::Invalid(format!("checkpoint {m} outside 1..={}", a.len())))
                } else {
                    Ok(a[m - 1])
                }
            })
            .collect::<Result<_>>()?
    };
    let low = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let high = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(OscillationGap { low, high, gap: high - low })
}

/// Averages at the given strictly increasing times along a finite word.
fn averages_at(system: &GeneratorSystem, word: &FiniteWord, x: &Point, psi: &Observable, times: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut p = x.clone();
    let mut sum = Sum::default();
    let mut next = 0;
    for (j, &s) in word.symbols().iter().enumerate() {
        if next == times.len() {
            break;
        }
        sum.add(psi(s, &p));
        p = system.generator(s).apply(&p);
        if (j + 1) as u64 == times[next] {
            out.push(sum.value() / (j + 1) as f64);
            next += 1;
        }
    }
    out
}

/// Largest `ε_j = diam · 2^{-j}` at which sampled pairs `d(x, y) < ε_j` have
/// `|ψ(s, x) − ψ(s, y)| < tol` for every symbol; 0 when none qualifies.
pub fn estimate_eps0(system: &GeneratorSystem, psi: &Observable, tol: f64, samples: usize, seed: u64) -> f64 {
    let space = system.space();
    let symbols = all_symbols(system);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = space.diameter();
    for _ in 0..48 {
        e *= 0.5;
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x = space.random_point(&mut rng);
            let y = space.random_in_ball(&x, e, &mut rng);
            for &s in &symbols {
                worst = worst.max((psi(s, &x) - psi(s, &y)).abs());
            }
            if worst >= tol {
                break;
            }
        }
        if worst < tol {
            return e;
        }
    }
    0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NestingMode {
    /// Trapping when both targets admit certified traps, else shrinking.
    Auto,
    /// Nested balls with radii `L^{-n_k} ε / 2` pulled back to one point.
    Shrinking,
    /// Forward-invariant balls around attracting fixed points of `f_κ`.
    Trapping,
}

#[derive(Clone, Debug)]
pub struct IrregularOptions {
    /// Shadowed generator; defaults to the last one.
    pub shadowed: Option<Symbol>,
    pub mode: NestingMode,
    /// Ratio `Σ_{i≤k}(n_i + p_i) / n_{k+1}` the schedule must stay below.
    pub threshold: f64,
    pub transition_k_max: usize,
    pub beam: usize,
    pub orbit_budget: u64,
    /// Longest orbit used by the basin check.
    pub basin_horizon: usize,
    pub eps0_samples: usize,
    pub seed: u64,
}

impl Default for IrregularOptions {
    fn default() -> Self {
        IrregularOptions {
            shadowed: None,
            mode: NestingMode::Auto,
            threshold: 0.2,
            transition_k_max: 100_000,
            beam: 50_000,
            orbit_budget: 50_000_000,
            basin_horizon: 1 << 16,
            eps0_samples: 10_000,
            seed: 0,
        }
    }
}

/// A level of the construction: the orbit is inside `B(center, radius)` at
/// time `start`, the beginning of block `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedBall {
    pub level: usize,
    pub start: u64,
    pub center: Point,
    pub radius: f64,
    /// 1 or 2.
    pub target: usize,
}

/// `f_κ(B(z, outer)) ⊆ B(z, outer)`, `f_κ(B(z, inner)) ⊆ B(z, inner)` and
/// `f_κ^settle(B(z, outer)) ⊆ B(z, inner)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trap {
    pub target: usize,
    pub outer: f64,
    pub inner: f64,
    pub settle: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub time: u64,
    pub average: f64,
    pub bound: f64,
    /// The bound is an upper bound (low target) rather than a lower one.
    pub upper: bool,
}

impl Checkpoint {
    pub fn holds(&self) -> bool {
        if self.upper {
            self.average <= self.bound
        } else {
            self.average >= self.bound
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrregularWitness {
    pub mode: NestingMode,
    pub shadowed: Symbol,
    pub targets: [Point; 2],
    pub values: [f64; 2],
    pub eps: f64,
    pub eps0: f64,
    pub blocks: Vec<u64>,
    pub transitions: Vec<FiniteWord>,
    /// `κ^{n_1} u_1 κ^{n_2} u_2 … κ^{n_depth}`.
    pub word: FiniteWord,
    pub point: Point,
    pub balls: Vec<NestedBall>,
    pub traps: Vec<Trap>,
    pub checkpoints: Vec<Checkpoint>,
    /// `Δ / 3` once every checkpoint bound holds.
    pub certified_gap: f64,
}

impl IrregularWitness {
    pub fn gap(&self) -> f64 {
        (self.values[0] - self.values[1]).abs()
    }

    /// The witness word followed by the shadowed symbol forever.
    pub fn word_stream(&self) -> WordStream {
        WordStream::new(self.word.clone(), Tail::Constant(self.shadowed))
    }

    pub fn checkpoint_times(&self) -> Vec<u64> {
        self.checkpoints.iter().map(|c| c.time).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessAudit {
    /// Largest difference between recomputed and recorded checkpoint averages.
    pub max_checkpoint_error: f64,
    pub bounds_hold: bool,
    pub nesting_holds: bool,
}

impl WitnessAudit {
    pub fn passed(&self) -> bool {
        self.max_checkpoint_error <= 1e-9 && self.bounds_hold && self.nesting_holds
    }
}

/// Certified trap around a fixed point `z` of `g`, searched with outer radii `eps · 2^{-j}`.
fn find_trap(system: &GeneratorSystem, k: Symbol, z: &Point, eps: f64, target: usize) -> Option<Trap> {
    let g = system.generator(k);
    if dist(&g.apply(z), z) > 1e-12 {
        return None;
    }
    let lip = g.lip_fwd;
    let fine = if system.space().dim().unwrap_or(1) <= 2 { 128.0 } else { 12.0 };
    let invariant = |r: f64| -> Option<f64> {
        let h = r / fine;
        let net = ball_net(z, r, h, 400_000).ok()?;
        net.par_iter().all(|y| dist(&g.apply(y), z) <= r - lip * h).then_some(h)
    };
    for j in 0..10 {
        let outer = eps * 0.5f64.powi(j);
        let inner = outer / 2.0;
        let Some(h) = invariant(outer) else { continue };
        if invariant(inner).is_none() {
            continue;
        }
        let mut pts = ball_net(z, outer, h, 400_000).ok()?;
        let mut lm = 1.0;
        for m in 1..=400 {
            pts.par_iter_mut().for_each(|p| *p = g.apply(p));
            lm *= lip;
            if lm * h >= inner {
                break;
            }
            if pts.par_iter().all(|p| dist(p, z) <= inner - lm * h) {
                return Some(Trap { target, outer, inner, settle: m });
            }
        }
    }
    None
}

/// Word `u` with `f_u(B(from, r_from)) ⊆ B(to, r_to)` by forward Lipschitz bounds.
fn trap_transition(
    system: &GeneratorSystem,
    from: &Point,
    r_from: f64,
    to: &Point,
    r_to: f64,
    opts: &IrregularOptions,
    level: usize,
) -> Result<FiniteWord> {
    let symbols = all_symbols(system);
    let ok = |n: &Node| n.lip_fwd * r_from + dist(&n.center, to) <= r_to * (1.0 - 1e-9);
    let mut search = Search::new(system, from.clone(), &symbols, r_from / 4.0, opts.beam, usize::MAX);
    loop {
        if let Some(n) = search.frontier.iter().find(|n| ok(n)) {
            return Ok(n.word.clone());
        }
        if search.level >= opts.transition_k_max || !search.advance(|n| n.lip_fwd * r_from < r_to)? {
            return Err(Error::TransitionNotFound { level, k_max: opts.transition_k_max });
        }
    }
}

/// Word `u` and radius `r ≥ need` with `B(center', r) ⊆ f_u(B(from, g))` and
/// `d(center', to) ≤ r`, where `center' = f_u(from)`.
fn shrink_transition(
    system: &GeneratorSystem,
    from: &Point,
    g: f64,
    need: f64,
    to: &Point,
    opts: &IrregularOptions,
    level: usize,
) -> Result<(FiniteWord, Point, f64)> {
    let symbols = all_symbols(system);
    let mut search = Search::new(system, from.clone(), &symbols, need / 4.0, opts.beam, usize::MAX);
    loop {
        let hit = search.frontier.iter().find(|n| {
            let r = g / n.lip_inv;
            r >= need && dist(&n.center, to) <= r * (1.0 - 1e-9)
        });
        if let Some(n) = hit {
            return Ok((n.word.clone(), n.center.clone(), g / n.lip_inv));
        }
        if search.level >= opts.transition_k_max || !search.advance(|n| g / n.lip_inv >= need)? {
            return Err(Error::TransitionNotFound { level, k_max: opts.transition_k_max });
        }
    }
}

/// Checks that the orbit of `z` under `f_κ` averages to `value` within `tol`
/// at lengths `n1, 2 n1, 4 n1, …` up to `horizon`.
#[allow(clippy::too_many_arguments)]
fn basin_check(
    system: &GeneratorSystem,
    k: Symbol,
    z: &Point,
    value: f64,
    tol: f64,
    n1: usize,
    horizon: usize,
    target: usize,
    psi: &Observable,
) -> Result<()> {
    let g = system.generator(k);
    let mut p = z.clone();
    let mut sum = Sum::default();
    let mut next = n1.max(1);
    for j in 1..=horizon.max(next) {
        sum.add(psi(k, &p));
        p = g.apply(&p);
        if j == next {
            let average = sum.value() / j as f64;
            if (average - value).abs() > tol {
                return Err(Error::BasinCheckFailed { target, n: j, average, expected: value, tolerance: tol });
            }
            next *= 2;
        }
    }
    Ok(())
}

/// Builds a point whose averages along the witness word come within `Δ/3` of
/// each target infinitely often along the checkpoints, `Δ = |I_1 − I_2|`.
///
/// `x_i` should have `f_κ`-averages tending to `I_i` from time `n1` on; this
/// is sampled, as is the continuity scale `ε_0` below which `ψ` varies by
/// less than `Δ/8` (`ε` must not exceed it). Checkpoint `k` closes block
/// `k + 1`, which shadows `x_1` for odd `k + 1` and `x_2` for even.
#[allow(clippy::too_many_arguments)]
pub fn construct_irregular_point(
    system: &GeneratorSystem,
    psi: &Observable,
    x1: &Point,
    i1: f64,
    n1: usize,
    x2: &Point,
    i2: f64,
    eps: f64,
    depth: usize,
    opts: &IrregularOptions,
) -> Result<IrregularWitness> {
    let delta = (i1 - i2).abs();
    if !(delta > 1e-12) {
        return Err(Error::NoGap { i1, i2 });
    }
    if depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    if !(eps > 0.0) || !(opts.threshold > 0.0) {
        return Err(Error::Invalid("eps and threshold must be positive".into()));
    }
    let kappa = opts.shadowed.unwrap_or(Symbol::from_index(system.kappa() - 1));
    FiniteWord::new(vec![kappa]).check(system.kappa())?;
    let targets = [x1.clone(), x2.clone()];
    let values = [i1, i2];
    for t in 0..2 {
        basin_check(system, kappa, &targets[t], values[t], delta / 8.0, n1, opts.basin_horizon, t + 1, psi)?;
    }
    let eps0 = estimate_eps0(system, psi, delta / 8.0, opts.eps0_samples, opts.seed);
    if eps > eps0 {
        return Err(Error::EpsilonTooLarge { eps, eps0 });
    }
    let l = system.lipschitz();
    let traps = if matches!(opts.mode, NestingMode::Shrinking) || l == 1.0 {
        None
    } else {
        match (find_trap(system, kappa, x1, eps, 1), find_trap(system, kappa, x2, eps, 2)) {
            (Some(a), Some(b)) => Some([a, b]),
            _ if opts.mode == NestingMode::Trapping => {
                return Err(Error::Invalid("a target admits no certified trap for the shadowed generator".into()))
            }
            _ => None,
        }
    };
    let multiplier = (1.0 / opts.threshold).ceil().max(1.0) as u64;
    let gap = growth_gap(l);
    let next_block =
        |k: usize, prev: u64, total: u64| -> u64 { (2 * prev + gap).max((k as u64).max(multiplier) * total) };
    let target_of = |level: usize| if level % 2 == 1 { 0 } else { 1 };
    let (lo, hi) = if i1 < i2 { (0, 1) } else { (1, 0) };

    let mut blocks = vec![n1.max(1) as u64];
    let mut transitions: Vec<FiniteWord> = Vec::new();
    let mut balls = Vec::new();
    let mut total: u64 = 0;
    let check_budget = |level: usize, t: u64| -> Result<()> {
        if t > opts.orbit_budget {
            Err(Error::DepthOverflow { level, n: t as f64 })
        } else {
            Ok(())
        }
    };

    let (mode, point, trap_list) = if let Some(tr) = traps {
        // forward-invariant traps: the orbit of x_1 itself does the shadowing
        blocks[0] = blocks[0].max(tr[0].settle as u64);
        let mut cache: [Option<FiniteWord>; 2] = [None, None];
        balls.push(NestedBall { level: 1, start: 0, center: x1.clone(), radius: tr[0].outer, target: 1 });
        for k in 1..depth {
            let (a, b) = (target_of(k), target_of(k + 1));
            if cache[a].is_none() {
                cache[a] =
                    Some(trap_transition(system, &targets[a], tr[a].inner, &targets[b], tr[b].outer, opts, k + 1)?);
            }
            let u = cache[a].clone().unwrap();
            total += blocks[k - 1] + u.len() as u64;
            let n = next_block(k, blocks[k - 1], total).max(tr[b].settle as u64);
            check_budget(k + 1, total + n)?;
            balls.push(NestedBall {
                level: k + 1,
                start: total,
                center: targets[b].clone(),
                radius: tr[b].outer,
                target: b + 1,
            });
            transitions.push(u);
            blocks.push(n);
        }
        (NestingMode::Trapping, x1.clone(), tr.to_vec())
    } else {
        let iso = l == 1.0;
        let floor = 1e-12 * system.space().diameter();
        // level radius, containing radius around the target, image radius after the block
        let radii = |level: usize, n: u64| -> (f64, f64, f64) {
            if iso {
                let rho = eps * 0.5f64.powi(level as i32);
                (rho, if level == 1 { rho } else { 2.0 * rho }, rho)
            } else {
                let big = l.powf(-(n as f64)) * eps;
                let rho = if level == 1 { big } else { big / 2.0 };
                (rho, big, l.powf(-(n as f64)) * rho)
            }
        };
        let (rho, _, _) = radii(1, blocks[0]);
        let mut center = x1.clone();
        let mut rho = rho;
        balls.push(NestedBall { level: 1, start: 0, center: center.clone(), radius: rho, target: 1 });
        for k in 1..depth {
            let n = blocks[k - 1];
            let (_, _, green) = radii(k, n);
            let need = if iso { eps * 0.5f64.powi(k as i32 + 1) } else { l.powf(-((2 * n + gap) as f64)) * eps / 2.0 };
            if !(green >= floor && need >= floor) {
                return Err(Error::PrecisionExhausted { level: k + 1, radius: need.min(green), floor });
            }
            let from = system.apply_word(&FiniteWord::repeat(kappa, n as usize), &center);
            let b = target_of(k + 1);
            let (u, image, r_in) = shrink_transition(system, &from, green, need, &targets[b], opts, k + 1)?;
            total += n + u.len() as u64;
            let n_next = next_block(k, n, total);
            check_budget(k + 1, total + n_next)?;
            let (rho_next, _, _) = radii(k + 1, n_next);
            if !(rho_next >= floor) {
                return Err(Error::PrecisionExhausted { level: k + 1, radius: rho_next, floor });
            }
            debug_assert!(rho_next <= r_in);
            center = contained_center(&image, r_in, &targets[b], rho_next);
            rho = rho_next;
            balls.push(NestedBall { level: k + 1, start: total, center: center.clone(), radius: rho, target: b + 1 });
            transitions.push(u);
            blocks.push(n_next);
        }
        let _ = rho;
        let mut prefix = FiniteWord::empty();
        for k in 0..depth - 1 {
            prefix.append(&FiniteWord::repeat(kappa, blocks[k] as usize));
            prefix.append(&transitions[k]);
        }
        let point = system.apply_word_inverse(&prefix, &center);
        (NestingMode::Shrinking, point, Vec::new())
    };

    let mut word = FiniteWord::empty();
    for k in 0..depth {
        word.append(&FiniteWord::repeat(kappa, blocks[k] as usize));
        if k + 1 < depth {
            word.append(&transitions[k]);
        }
    }
    let times: Vec<u64> = (1..depth).map(|k| balls[k].start + blocks[k]).collect();
    let averages = averages_at(system, &word, &point, psi, &times);
    let mut checkpoints = Vec::new();
    for (k, (&time, &average)) in times.iter().zip(&averages).enumerate() {
        let t = target_of(k + 2);
        let upper = t == lo;
        let bound = if upper { values[lo] + delta / 3.0 } else { values[hi] - delta / 3.0 };
        let c = Checkpoint { time, average, bound, upper };
        if !c.holds() {
            return Err(Error::CheckpointBound { checkpoint: k + 1, average, bound });
        }
        checkpoints.push(c);
    }
    Ok(IrregularWitness {
        mode,
        shadowed: kappa,
        targets,
        values,
        eps,
        eps0,
        blocks,
        transitions,
        word,
        point,
        balls,
        traps: trap_list,
        checkpoints,
        certified_gap: delta / 3.0,
    })
}

/// Re-simulates the witness from its point and re-checks every claim.
pub fn audit_witness(system: &GeneratorSystem, psi: &Observable, w: &IrregularWitness) -> Result<WitnessAudit> {
    w.word.check(system.kappa())?;
    let times = w.checkpoint_times();
    let averages = averages_at(system, &w.word, &w.point, psi, &times);
    let max_checkpoint_error = if averages.len() == times.len() {
        averages.iter().zip(&w.checkpoints).map(|(a, c)| (a - c.average).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let bounds_hold = w.checkpoints.iter().zip(&averages).all(|(c, &a)| Checkpoint { average: a, ..c.clone() }.holds());
    let nesting_holds = match w.mode {
        NestingMode::Trapping => audit_traps(system, w),
        _ => audit_shrinking(system, w),
    };
    Ok(WitnessAudit { max_checkpoint_error, bounds_hold, nesting_holds })
}

/// Every block keeps the orbit within its trap's outer ball.
fn audit_traps(system: &GeneratorSystem, w: &IrregularWitness) -> bool {
    let mut p = w.point.clone();
    let mut t = 0usize;
    for (k, ball) in w.balls.iter().enumerate() {
        let n = w.blocks[k] as usize;
        for _ in 0..n {
            if dist(&p, &ball.center) > ball.radius {
                return false;
            }
            p = system.generator(w.symbol_at(t)).apply(&p);
            t += 1;
        }
        if dist(&p, &ball.center) > ball.radius {
            return false;
        }
        if let Some(u) = w.transitions.get(k) {
            p = system.apply_word(u, &p);
            t += u.len();
        }
    }
    true
}

/// Each level ball pulls back into the previous one, and sits inside the
/// target's containing ball.
fn audit_shrinking(system: &GeneratorSystem, w: &IrregularWitness) -> bool {
    for k in 0..w.balls.len().saturating_sub(1) {
        let (a, b) = (&w.balls[k], &w.balls[k + 1]);
        let seg = FiniteWord::repeat(w.shadowed, w.blocks[k] as usize).concat(&w.transitions[k]);
        let back = system.apply_word_inverse(&seg, &b.center);
        let lip = system.word_lip_inv(&seg);
        if dist(&back, &a.center) + lip * b.radius > a.radius * (1.0 + 1e-6) + 1e-13 {
            return false;
        }
    }
    let first = &w.balls[0];
    dist(&w.point, &first.center) <= first.radius * (1.0 + 1e-6) + 1e-13
}

impl IrregularWitness {
    fn symbol_at(&self, t: usize) -> Symbol {
        self.word.symbols()[t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{golden, Generator};
    use crate::spaces::Space;
    use std::f64::consts::PI;

    #[test]
    fn schedule_example_values() {
        let s = build_schedule(2.0, 0.25, &|r| (3.0 / r).ceil(), 4, 0.5).unwrap();
        assert_eq!(s.n, vec![1, 97, 1156, 9810]);
        assert_eq!(s.k, vec![96, 384, 1536]);
        assert!((s.ratios[2] - 1.0 / 3.0).abs() < 1e-12);
        assert!(s.satisfies_growth());
    }

    #[test]
    fn schedule_errors() {
        let k = |r: f64| (3.0 / r).ceil();
        assert_eq!(build_schedule(1.0, 0.25, &k, 4, 0.5), Err(Error::DegenerateLipschitz));
        assert!(matches!(build_schedule(2.0, 0.25, &k, 3, 0.3), Err(Error::ThresholdNotReached { .. })));
        assert!(matches!(build_schedule(2.0, 0.25, &k, 40, 0.5), Err(Error::DepthOverflow { .. })));
    }

    #[test]
    fn growth_gap_integer_case() {
        assert_eq!(growth_gap(2.0), 3);
        assert_eq!(growth_gap(4.0), 2);
        assert_eq!(growth_gap(3.0), 2);
    }

    fn cosine(_: Symbol, p: &Point) -> f64 {
        (2.0 * PI * p.coords()[0]).cos()
    }

    #[test]
    fn no_gap_rejected() {
        let s = GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden())]).unwrap();
        let x = Point::circle(0.0);
        let r = construct_irregular_point(&s, &cosine, &x, 1.0, 1, &x, 1.0, 0.01, 3, &Default::default());
        assert!(matches!(r, Err(Error::NoGap { .. })));
    }

    #[test]
    fn double_well_traps() {
        let s = GeneratorSystem::new(
            Space::Circle,
            vec![Generator::rotation(golden()), Generator::sine_circle(0.05, 2).unwrap()],
        )
        .unwrap();
        let k = Symbol::new(2).unwrap();
        let t = find_trap(&s, k, &Point::circle(0.0), 0.03, 1).expect("attracting fixed point");
        assert!(t.settle >= 1 && t.outer <= 0.03);
        assert!(find_trap(&s, k, &Point::circle(0.25), 0.03, 2).is_none());
    }

    #[test]
    fn oscillation_gap_on_checkpoints() {
        let tr = BirkhoffTrace { averages: vec![1.0, 0.0, -1.0, 0.5] };
        let g = oscillation_gap(&tr, &[1, 3]).unwrap();
        assert_eq!((g.low, g.high, g.gap), (-1.0, 1.0, 2.0));
        assert!(oscillation_gap(&tr, &[5]).is_err());
    }
}
