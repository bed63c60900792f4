//! Frequent hitting times, covering times and transition times.
//!
//! All searches are breadth first by word length. A node is an image center
//! `f_w(x)` together with the product of inverse Lipschitz bounds along `w`,
//! which certifies `B(f_w(x), r/Lip(f_w^{-1})) ⊆ f_w(B(x, r))`. For words
//! made of isometries the image is exactly the ball `B(f_w(x), r)`.
//!
//! Refutations are evidence only: they report that no word up to the budget
//! was found, never that none exists.

use crate::error::{Error, Result};
use crate::index::PointIndex;
use crate::semigroup::{GeneratorKind, GeneratorSystem};
use crate::spaces::{build_net, dist, grid_cells, interpolate, Ball, FiniteWord, Point, Space, Symbol};
use rayon::prelude::*;
use smallvec::SmallVec;
use std::collections::HashSet;

/// Absolute slack required between a distance and its bound.
const SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub word: FiniteWord,
    pub center: Point,
    pub lip_inv: f64,
    pub lip_fwd: f64,
}

type Key = SmallVec<[i64; 6]>;

/// Level-by-level word tree with global deduplication of image summaries.
pub(crate) struct Search<'a> {
    system: &'a GeneratorSystem,
    allowed: Vec<Symbol>,
    quantum: f64,
    beam: usize,
    node_cap: usize,
    seen: HashSet<Key>,
    pub frontier: Vec<Node>,
    pub level: usize,
    pub nodes: usize,
    /// Set when a level was cut at the beam width.
    pub truncated: bool,
}

impl<'a> Search<'a> {
    pub fn new(
        system: &'a GeneratorSystem,
        start: Point,
        allowed: &[Symbol],
        quantum: f64,
        beam: usize,
        node_cap: usize,
    ) -> Self {
        let root = Node { word: FiniteWord::empty(), center: start, lip_inv: 1.0, lip_fwd: 1.0 };
        let mut s = Search {
            system,
            allowed: allowed.to_vec(),
            quantum: quantum.max(1e-15),
            beam,
            node_cap,
            seen: HashSet::new(),
            frontier: Vec::new(),
            level: 0,
            nodes: 1,
            truncated: false,
        };
        let k = s.key(&root);
        s.seen.insert(k);
        s.frontier.push(root);
        s
    }

    fn key(&self, n: &Node) -> Key {
        let c = n.center.coords();
        let mut k: Key = SmallVec::new();
        let flip = match &n.center {
            Point::Projective(v) => v.iter().find(|x| x.abs() > 1e-9).is_some_and(|x| *x < 0.0),
            _ => false,
        };
        let wrap = matches!(n.center, Point::Circle(_) | Point::Torus(_));
        let cells = (1.0 / self.quantum).round() as i64;
        for &x in c {
            let x = if flip { -x } else { x };
            let mut q = (x / self.quantum).round() as i64;
            if wrap && cells > 0 {
                q = q.rem_euclid(cells);
            }
            k.push(q);
        }
        k.push((n.lip_inv.ln() * 32.0).round() as i64);
        k
    }

    /// Expands the frontier by one letter, keeping children accepted by `keep`.
    /// Returns false when the new frontier is empty.
    pub fn advance(&mut self, keep: impl Fn(&Node) -> bool) -> Result<bool> {
        let mut next = Vec::new();
        'outer: for n in &self.frontier {
            for &s in &self.allowed {
                let g = self.system.generator(s);
                let mut word = n.word.clone();
                word.push(s);
                let child = Node {
                    word,
                    center: g.apply(&n.center),
                    lip_inv: n.lip_inv * g.lip_inv,
                    lip_fwd: n.lip_fwd * g.lip_fwd,
                };
                if !keep(&child) {
                    continue;
                }
                let k = self.key(&child);
                if !self.seen.insert(k) {
                    continue;
                }
                next.push(child);
                if next.len() >= self.beam {
                    self.truncated = true;
                    break 'outer;
                }
            }
        }
        self.nodes += next.len();
        if self.nodes > self.node_cap {
            return Err(Error::BudgetExceeded(format!(
                "{} word-tree nodes at length {} exceed the cap {}",
                self.nodes,
                self.level + 1,
                self.node_cap
            )));
        }
        self.level += 1;
        self.frontier = next;
        Ok(!self.frontier.is_empty())
    }
}

/// Tuning knobs for the hitting certifier.
#[derive(Clone, Debug)]
pub struct HittingOptions {
    /// Largest target radius as a fraction of ε (1/2 for hitting, 1 for accessibility).
    pub b2_max_factor: f64,
    /// Frontier cap per word length.
    pub beam: usize,
    /// Total word-tree nodes per base ball before `BudgetExceeded`.
    pub node_cap: usize,
    /// Pair tables larger than this keep only the worst entry per base ball.
    pub table_cap: usize,
    /// Longest word used for the inner-radius decay curve of a refutation.
    pub decay_len: usize,
}

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions { b2_max_factor: 0.5, beam: 50_000, node_cap: 2_000_000, table_cap: 200_000, decay_len: 23 }
    }
}

/// One certified transition `f_w(B_1) ⊇ B_2' ⊆ B_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HittingEntry {
    pub b1: usize,
    pub b2: usize,
    pub radius: usize,
    pub p: usize,
    pub word: FiniteWord,
    pub contained: Ball,
}

#[derive(Clone, Debug)]
pub struct HittingCertificate {
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Largest transition time over all pairs.
    pub k: usize,
    pub b1_centers: Vec<Point>,
    pub b2_centers: Vec<Point>,
    pub b2_radii: Vec<f64>,
    pub per_b1_k: Vec<usize>,
    /// Every pair when `full_table`, otherwise the worst pair of each base ball.
    pub entries: Vec<HittingEntry>,
    pub full_table: bool,
    pub pairs: usize,
    pub searched_nodes: usize,
}

/// One point of the inner-radius decay curve.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayPoint {
    pub p: usize,
    pub word: FiniteWord,
    pub delta: f64,
    pub radius: f64,
}

/// Evidence that no transition was found within the budget.
#[derive(Clone, Debug)]
pub struct Refutation {
    pub eps: f64,
    pub k_max: usize,
    pub b1: Ball,
    pub b2: Ball,
    /// Radius a contained ball must reach for this pair.
    pub required_radius: f64,
    /// Largest radius of a ball inside `B_2` and a certified image of `B_1`.
    pub best_radius: f64,
    /// False when a beam cut made the search non-exhaustive.
    pub exhaustive: bool,
    pub decay: Vec<DecayPoint>,
    pub decay_slope: Option<f64>,
    pub decay_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum HittingOutcome {
    Certified(HittingCertificate),
    Refuted(Refutation),
}

impl HittingOutcome {
    pub fn certificate(&self) -> Option<&HittingCertificate> {
        match self {
            HittingOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            HittingOutcome::Refuted(r) => Some(r),
            _ => None,
        }
    }
}

pub(crate) fn all_symbols(system: &GeneratorSystem) -> Vec<Symbol> {
    (0..system.kappa()).map(Symbol::from_index).collect()
}

/// Radius grid `top, top/2, …` down to `floor`.
fn radius_grid(top: f64, floor: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut r = top;
    while r >= floor * (1.0 - 1e-12) && v.len() < 64 {
        v.push(r);
        r *= 0.5;
    }
    v
}

/// Center of a ball of radius `r2p` inside both `B(c, r_in)` and `B(y, r2)`,
/// given that `d(c, y) ≤ r_in + r2 − 2·r2p` and `r2p ≤ min(r_in, r2)`.
pub(crate) fn contained_center(c: &Point, r_in: f64, y: &Point, r2p: f64) -> Point {
    let d = dist(c, y);
    let a = (d - (r_in - r2p)).max(0.0);
    if a <= 0.0 || d <= 0.0 {
        return y.clone();
    }
    interpolate(y, c, (a / d).min(1.0)).unwrap_or_else(|_| y.clone())
}

struct Covered {
    /// (node log index, p)
    by: Vec<Option<(u32, u32)>>,
}

enum BaseResult {
    Done { k: usize, nodes: usize, log: Vec<Node>, covered: Covered },
    Failed { first: usize, truncated: bool },
}

struct PairSetup<'a> {
    system: &'a GeneratorSystem,
    eps: f64,
    radii: Vec<f64>,
    required: Vec<f64>,
    b2: &'a [Point],
    index: PointIndex<'a>,
    allowed: Vec<Symbol>,
    quantum: f64,
    opts: &'a HittingOptions,
}

impl PairSetup<'_> {
    fn reach(&self, r_in: f64, i: usize) -> f64 {
        r_in + self.radii[i] - 2.0 * self.required[i]
    }

    /// Paints targets reachable from one node; returns the number newly covered.
    fn paint(&self, node: &Node, log_id: u32, p: u32, covered: &mut Covered, left: &mut usize) -> usize {
        let r_in = self.eps / node.lip_inv;
        let nr = self.radii.len();
        let usable: SmallVec<[usize; 16]> = (0..nr).filter(|&i| self.required[i] <= r_in).collect();
        if usable.is_empty() {
            return 0;
        }
        let max_reach = usable.iter().map(|&i| self.reach(r_in, i)).fold(0.0, f64::max);
        let mut fresh = 0;
        self.index.within(&node.center, max_reach, |j| {
            let d = dist(&node.center, &self.b2[j]);
            for &i in &usable {
                let slot = &mut covered.by[j * nr + i];
                if slot.is_none() && d <= self.reach(r_in, i) - SLACK {
                    *slot = Some((log_id, p));
                    fresh += 1;
                }
            }
        });
        *left -= fresh;
        fresh
    }

    fn run_base(&self, x1: &Point, k_max: usize) -> Result<BaseResult> {
        let nr = self.radii.len();
        let total = self.b2.len() * nr;
        let mut covered = Covered { by: vec![None; total] };
        let mut left = total;
        let mut log: Vec<Node> = Vec::new();
        let min_required = self.required.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut search =
            Search::new(self.system, x1.clone(), &self.allowed, self.quantum, self.opts.beam, self.opts.node_cap);
        let mut k = 0;
        loop {
            for node in &search.frontier {
                let id = log.len() as u32;
                if self.paint(node, id, search.level as u32, &mut covered, &mut left) > 0 {
                    log.push(node.clone());
                    k = search.level;
                }
            }
            if left == 0 {
                return Ok(BaseResult::Done { k, nodes: search.nodes, log, covered });
            }
            if search.level >= k_max {
                break;
            }
            let eps = self.eps;
            if !search.advance(|n| eps / n.lip_inv >= min_required)? {
                break;
            }
        }
        let first = covered.by.iter().position(Option::is_none).unwrap_or(0);
        Ok(BaseResult::Failed { first, truncated: search.truncated })
    }

    /// Best contained radius for one pair over the same search tree.
    fn best_radius(&self, x1: &Point, y: &Point, i: usize, k_max: usize) -> Result<f64> {
        let r2 = self.radii[i];
        let mut best = 0.0f64;
        let mut search =
            Search::new(self.system, x1.clone(), &self.allowed, self.quantum, self.opts.beam, self.opts.node_cap);
        let min_required = self.required.iter().cloned().fold(f64::INFINITY, f64::min);
        loop {
            for n in &search.frontier {
                let r_in = self.eps / n.lip_inv;
                let d = dist(&n.center, y);
                let r = r_in.min(r2).min(0.5 * (r_in + r2 - d));
                best = best.max(r);
            }
            if search.level >= k_max {
                break;
            }
            let eps = self.eps;
            if !search.advance(|n| eps / n.lip_inv >= min_required)? {
                break;
            }
        }
        Ok(best.max(0.0))
    }
}

/// Certify frequent hitting times at scale ε over δ-nets of ball pairs.
pub fn certify_frequent_hitting(
    system: &GeneratorSystem,
    eps: f64,
    k_max: usize,
    delta: f64,
    seed: u64,
) -> Result<HittingOutcome> {
    certify_frequent_hitting_with(system, eps, k_max, delta, seed, &HittingOptions::default())
}

/// Like [`certify_frequent_hitting`] with explicit options.
///
/// Base balls `B(x, ε)` and targets `B(y, r)` range over a net with covering
/// radius δ, with `r` in the grid `b2_max_factor·ε, …/2, …` down to δ. A
/// target must contain an image ball of radius `min(ε/4, r/2)`.
pub fn certify_frequent_hitting_with(
    system: &GeneratorSystem,
    eps: f64,
    k_max: usize,
    delta: f64,
    seed: u64,
    opts: &HittingOptions,
) -> Result<HittingOutcome> {
    if !(eps > 0.0) || !(delta > 0.0) || delta > eps / 8.0 * (1.0 + 1e-12) || k_max < 1 {
        return Err(Error::Invalid(format!(
            "need eps > 0, 0 < delta <= eps/8 and K_max >= 1 (eps {eps}, delta {delta})"
        )));
    }
    let space = system.space();
    let net = build_net(space, 2.0 * delta, seed)?;
    let radii = radius_grid(opts.b2_max_factor * eps, delta);
    let required: Vec<f64> = radii.iter().map(|r| (eps / 4.0).min(r / 2.0)).collect();
    let max_reach = eps + radii[0];
    let setup = PairSetup {
        system,
        eps,
        radii: radii.clone(),
        required: required.clone(),
        b2: &net,
        index: PointIndex::new(&net, max_reach.min(0.5 * space.diameter()).max(delta)),
        allowed: all_symbols(system),
        quantum: delta / 4.0,
        opts,
    };
    let nr = radii.len();
    let lattice = matches!(space, Space::Circle | Space::Torus(_))
        && system.generators().iter().all(|g| matches!(g.kind, GeneratorKind::Translation(_)));
    if lattice {
        // Translations commute with lattice shifts of the grid net, so one base
        // ball determines every other by relabelling targets.
        return certify_translations(&setup, &net, space, delta, k_max, seed, opts);
    }
    let results: Vec<Result<BaseResult>> = net.par_iter().map(|x1| setup.run_base(x1, k_max)).collect();
    let pairs = net.len() * net.len() * nr;
    let full_table = pairs <= opts.table_cap;
    let mut per_b1_k = Vec::with_capacity(net.len());
    let mut entries = Vec::new();
    let mut searched = 0;
    for (b1, res) in results.into_iter().enumerate() {
        match res? {
            BaseResult::Failed { first, truncated } => {
                let (j, i) = (first / nr, first % nr);
                let best = setup.best_radius(&net[b1], &net[j], i, k_max)?;
                let b1_ball = Ball::new(net[b1].clone(), eps);
                let decay = inner_radius_decay(system, &b1_ball, opts.decay_len.min(k_max), 0.1);
                let fit = decay_fit(&decay);
                return Ok(HittingOutcome::Refuted(Refutation {
                    eps,
                    k_max,
                    b1: b1_ball,
                    b2: Ball::new(net[j].clone(), radii[i]),
                    required_radius: required[i],
                    best_radius: best,
                    exhaustive: !truncated,
                    decay,
                    decay_slope: fit.map(|f| f.0),
                    decay_residual: fit.map(|f| f.1),
                }));
            }
            BaseResult::Done { k, nodes, log, covered } => {
                searched += nodes;
                per_b1_k.push(k);
                let make = |slot: usize| -> HittingEntry {
                    let (id, p) = covered.by[slot].expect("covered");
                    let node = &log[id as usize];
                    let (j, i) = (slot / nr, slot % nr);
                    let r_in = eps / node.lip_inv;
                    let z = contained_center(&node.center, r_in, &net[j], required[i]);
                    HittingEntry {
                        b1,
                        b2: j,
                        radius: i,
                        p: p as usize,
                        word: node.word.clone(),
                        contained: Ball::new(z, required[i]),
                    }
                };
                if full_table {
                    entries.extend((0..covered.by.len()).map(make));
                } else {
                    let worst =
                        (0..covered.by.len()).max_by_key(|&s| (covered.by[s].unwrap().1, usize::MAX - s)).unwrap();
                    entries.push(make(worst));
                }
            }
        }
    }
    let k = per_b1_k.iter().copied().max().unwrap_or(0);
    Ok(HittingOutcome::Certified(HittingCertificate {
        eps,
        delta,
        seed,
        k,
        b1_centers: net.clone(),
        b2_centers: net,
        b2_radii: radii,
        per_b1_k,
        entries,
        full_table,
        pairs,
        searched_nodes: searched,
    }))
}

/// Lattice coordinates of net point `j` in a `m^d` grid (last axis fastest).
fn lattice_coords(mut j: usize, m: usize, d: usize) -> SmallVec<[usize; 4]> {
    let mut c: SmallVec<[usize; 4]> = SmallVec::from_elem(0, d);
    for k in (0..d).rev() {
        c[k] = j % m;
        j /= m;
    }
    c
}

fn lattice_shift(j: usize, t: &[usize], m: usize) -> usize {
    let c = lattice_coords(j, m, t.len());
    c.iter().zip(t).fold(0, |acc, (a, b)| acc * m + (a + b) % m)
}

fn translate(p: &Point, from: &Point, to: &Point) -> Point {
    let v: Vec<f64> = p.coords().iter().zip(from.coords()).zip(to.coords()).map(|((x, a), b)| x + b - a).collect();
    match p {
        Point::Circle(_) => Point::circle(v[0]),
        _ => Point::torus(&v),
    }
}

fn certify_translations(
    setup: &PairSetup<'_>,
    net: &[Point],
    space: &Space,
    delta: f64,
    k_max: usize,
    seed: u64,
    opts: &HittingOptions,
) -> Result<HittingOutcome> {
    let system = setup.system;
    let (eps, radii, required) = (setup.eps, &setup.radii, &setup.required);
    let nr = radii.len();
    let d = space.dim().unwrap();
    let m = grid_cells(2.0 * delta);
    debug_assert_eq!(m.pow(d as u32), net.len());
    let pairs = net.len() * net.len() * nr;
    let full_table = pairs <= opts.table_cap;
    let (k, nodes, log, covered) = match setup.run_base(&net[0], k_max)? {
        BaseResult::Done { k, nodes, log, covered } => (k, nodes, log, covered),
        BaseResult::Failed { first, truncated } => {
            let (j, i) = (first / nr, first % nr);
            let best = setup.best_radius(&net[0], &net[j], i, k_max)?;
            let b1 = Ball::new(net[0].clone(), eps);
            let decay = inner_radius_decay(system, &b1, opts.decay_len.min(k_max), 0.1);
            let fit = decay_fit(&decay);
            return Ok(HittingOutcome::Refuted(Refutation {
                eps,
                k_max,
                b1,
                b2: Ball::new(net[j].clone(), radii[i]),
                required_radius: required[i],
                best_radius: best,
                exhaustive: !truncated,
                decay,
                decay_slope: fit.map(|f| f.0),
                decay_residual: fit.map(|f| f.1),
            }));
        }
    };
    let base: Vec<HittingEntry> = (0..covered.by.len())
        .map(|slot| {
            let (id, p) = covered.by[slot].expect("covered");
            let node = &log[id as usize];
            let (j, i) = (slot / nr, slot % nr);
            let z = contained_center(&node.center, eps / node.lip_inv, &net[j], required[i]);
            HittingEntry {
                b1: 0,
                b2: j,
                radius: i,
                p: p as usize,
                word: node.word.clone(),
                contained: Ball::new(z, required[i]),
            }
        })
        .collect();
    let worst = base.iter().enumerate().max_by_key(|(s, e)| (e.p, usize::MAX - s)).map(|(s, _)| s).unwrap();
    let mut entries = Vec::new();
    for b1 in 0..net.len() {
        let t = lattice_coords(b1, m, d);
        let shifted = |e: &HittingEntry| HittingEntry {
            b1,
            b2: lattice_shift(e.b2, &t, m),
            radius: e.radius,
            p: e.p,
            word: e.word.clone(),
            contained: Ball::new(translate(&e.contained.center, &net[0], &net[b1]), e.contained.radius),
        };
        if full_table {
            entries.extend(base.iter().map(shifted));
        } else {
            entries.push(shifted(&base[worst]));
        }
    }
    Ok(HittingOutcome::Certified(HittingCertificate {
        eps,
        delta,
        seed,
        k,
        b1_centers: net.to_vec(),
        b2_centers: net.to_vec(),
        b2_radii: radii.clone(),
        per_b1_k: vec![k; net.len()],
        entries,
        full_table,
        pairs,
        searched_nodes: nodes,
    }))
}

impl HittingCertificate {
    /// Independent check of one entry through the exact pullback oracle:
    /// `f_w^{-1}(B_2') ⊆ B_1` and `B_2' ⊆ B_2`.
    pub fn verify_entry(&self, system: &GeneratorSystem, e: &HittingEntry) -> bool {
        let Ok(back) = system.pullback(&e.word, &e.contained.center) else { return false };
        let r = e.contained.radius;
        let lip = system.word_lip_inv(&e.word);
        let into_b1 = dist(&back, &self.b1_centers[e.b1]) + lip * r <= self.eps + 1e-10;
        let into_b2 = dist(&e.contained.center, &self.b2_centers[e.b2]) + r <= self.b2_radii[e.radius] + 1e-10;
        let big_enough = r >= (self.eps / 4.0).min(self.b2_radii[e.radius] / 2.0) * (1.0 - 1e-12);
        e.p == e.word.len() && e.p <= self.k && into_b1 && into_b2 && big_enough
    }

    pub fn verify_all(&self, system: &GeneratorSystem) -> bool {
        self.entries.par_iter().all(|e| self.verify_entry(system, e))
    }
}

/// Inner radius of `f_w(B)` along greedily extended words `w`, one point per length.
///
/// Each length uses net resolution `δ_p = η·|B| / Lip(f_w^{-1})`, so the pullback
/// margin stays `η·|B|`; the curve stops once `δ_p < 1e-13`.
pub fn inner_radius_decay(system: &GeneratorSystem, ball: &Ball, p_max: usize, eta: f64) -> Vec<DecayPoint> {
    let symbols = all_symbols(system);
    let mut out = Vec::new();
    let mut word = FiniteWord::empty();
    for p in 1..=p_max {
        let mut best: Option<DecayPoint> = None;
        for &s in &symbols {
            let mut w = word.clone();
            w.push(s);
            let delta = eta * ball.radius / system.word_lip_inv(&w);
            if delta < 1e-13 {
                continue;
            }
            if let Ok(r) = system.image_inner_radius(&w, ball, delta) {
                if best.as_ref().is_none_or(|b| r > b.radius) {
                    best = Some(DecayPoint { p, word: w, delta, radius: r });
                }
            }
        }
        match best {
            Some(b) => {
                word = b.word.clone();
                out.push(b);
            }
            None => break,
        }
    }
    out
}

/// Least-squares slope and RMS residual of `log r` against `p`.
pub fn decay_fit(points: &[DecayPoint]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|d| d.radius > 0.0).map(|d| (d.p as f64, d.radius.ln())).collect();
    least_squares(&pts)
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, rms))
}

/// Covering time: routes whose first `K + 1` images of every base ball cover `X`.
#[derive(Clone, Debug)]
pub struct CoveringTime {
    pub eps: f64,
    pub delta: f64,
    pub k: usize,
    pub base_points: Vec<Point>,
    /// Route word of each base point (length = its own covering time).
    pub routes: Vec<FiniteWord>,
}

#[derive(Clone, Debug)]
pub struct CoveringRefutation {
    pub eps: f64,
    pub k_max: usize,
    pub base: Point,
    /// Largest covered fraction of the target net reached by the route.
    pub best_fraction: f64,
    pub route: FiniteWord,
}

#[derive(Clone, Debug)]
pub enum CoveringOutcome {
    Covered(CoveringTime),
    Refuted(CoveringRefutation),
}

impl CoveringOutcome {
    pub fn covering(&self) -> Option<&CoveringTime> {
        match self {
            CoveringOutcome::Covered(c) => Some(c),
            _ => None,
        }
    }
}

struct Route<'a> {
    system: &'a GeneratorSystem,
    targets: &'a [Point],
    index: &'a PointIndex<'a>,
    base: &'a Point,
    eps: f64,
    delta: f64,
}

impl Route<'_> {
    /// Targets newly certified by the image of the base ball under `w`.
    /// A target `y` counts when `d(f_w^{-1}(y), x) ≤ ε − δ − Lip(f_w^{-1})·δ`.
    fn gain(&self, w: &FiniteWord, image: &Point, covered: &[bool], out: &mut Vec<usize>) {
        out.clear();
        if self.system.word_is_isometric(w) {
            let r = self.eps - 2.0 * self.delta - SLACK;
            if r < 0.0 {
                return;
            }
            self.index.within(image, r, |j| {
                if !covered[j] {
                    out.push(j);
                }
            });
        } else {
            let r = self.eps - self.delta - self.system.word_lip_inv(w) * self.delta - SLACK;
            if r < 0.0 {
                return;
            }
            for (j, y) in self.targets.iter().enumerate() {
                if !covered[j] && dist(&self.system.apply_word_inverse(w, y), self.base) <= r {
                    out.push(j);
                }
            }
        }
        out.sort_unstable();
    }
}

/// Covering time of condition (C) over δ-nets.
///
/// With one allowed generator the route is plain iteration; otherwise each
/// base point follows a greedy two-step lookahead route, so the reported `K`
/// is an upper bound for the optimal covering time on the net.
pub fn covering_time(
    system: &GeneratorSystem,
    generators: Option<&[Symbol]>,
    eps: f64,
    k_max: usize,
    delta: f64,
) -> Result<CoveringOutcome> {
    if !(eps > 0.0) || !(delta > 0.0) || delta > eps / 8.0 * (1.0 + 1e-12) {
        return Err(Error::Invalid(format!("need eps > 0 and 0 < delta <= eps/8 (eps {eps}, delta {delta})")));
    }
    let allowed: Vec<Symbol> = match generators {
        Some(g) => {
            for s in g {
                FiniteWord::new(vec![*s]).check(system.kappa())?;
            }
            g.to_vec()
        }
        None => all_symbols(system),
    };
    if allowed.is_empty() {
        return Err(Error::Invalid("no generators selected".into()));
    }
    let net = build_net(system.space(), 2.0 * delta, 0)?;
    let index = PointIndex::new(&net, eps.max(delta));
    let results: Vec<(Option<usize>, FiniteWord, f64)> = net
        .par_iter()
        .map(|x| {
            let route = Route { system, targets: &net, index: &index, base: x, eps, delta };
            let mut covered = vec![false; net.len()];
            let mut left = net.len();
            let mut word = FiniteWord::empty();
            let mut image = x.clone();
            let mut buf = Vec::new();
            let mut buf2 = Vec::new();
            route.gain(&word, &image, &covered, &mut buf);
            for &j in &buf {
                covered[j] = true;
            }
            left -= buf.len();
            let mut steps = 0;
            while left > 0 && steps < k_max {
                let pick = if allowed.len() == 1 {
                    allowed[0]
                } else {
                    let mut best = (0usize, allowed[0]);
                    for &a in &allowed {
                        let mut wa = word.clone();
                        wa.push(a);
                        let ia = system.generator(a).apply(&image);
                        route.gain(&wa, &ia, &covered, &mut buf);
                        let first: HashSet<usize> = buf.iter().copied().collect();
                        let mut look = 0;
                        if steps + 1 < k_max {
                            let mut mask = covered.clone();
                            for &j in &first {
                                mask[j] = true;
                            }
                            for &b in &allowed {
                                let mut wab = wa.clone();
                                wab.push(b);
                                route.gain(&wab, &system.generator(b).apply(&ia), &mask, &mut buf2);
                                look = look.max(buf2.len());
                            }
                        }
                        let score = first.len() + look;
                        if score > best.0 {
                            best = (score, a);
                        }
                    }
                    best.1
                };
                word.push(pick);
                image = system.generator(pick).apply(&image);
                steps += 1;
                route.gain(&word, &image, &covered, &mut buf);
                for &j in &buf {
                    covered[j] = true;
                }
                left -= buf.len();
            }
            let frac = 1.0 - left as f64 / net.len() as f64;
            (if left == 0 { Some(steps) } else { None }, word, frac)
        })
        .collect();
    let mut routes = Vec::with_capacity(net.len());
    let mut k = 0;
    for (i, (steps, word, frac)) in results.into_iter().enumerate() {
        match steps {
            Some(s) => {
                k = k.max(s);
                routes.push(word);
            }
            None => {
                return Ok(CoveringOutcome::Refuted(CoveringRefutation {
                    eps,
                    k_max,
                    base: net[i].clone(),
                    best_fraction: frac,
                    route: word,
                }))
            }
        }
    }
    Ok(CoveringOutcome::Covered(CoveringTime { eps, delta, k, base_points: net, routes }))
}

/// A dynamic ball `B_f(x, n, ε)` of the shadowed generator.
#[derive(Clone, Debug, PartialEq)]
pub struct DynBallSpec {
    pub center: Point,
    pub n: usize,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    Found { p: usize, word: FiniteWord },
    NotFound { searched_up_to: usize, exhaustive: bool },
}

impl Transition {
    pub fn p(&self) -> Option<usize> {
        match self {
            Transition::Found { p, .. } => Some(*p),
            _ => None,
        }
    }
}

/// Certified ball inside `f^n(B(x, L^{-n} ε))`, never below `L^{-2n} ε`.
pub(crate) fn source_radius(system: &GeneratorSystem, shadowed: Symbol, spec: &DynBallSpec) -> f64 {
    let l = system.lipschitz();
    let r0 = l.powi(-(spec.n as i32)) * spec.eps;
    let floor = l.powi(-2 * spec.n as i32) * spec.eps;
    if spec.n == 0 {
        return spec.eps;
    }
    let w = FiniteWord::repeat(shadowed, spec.n);
    let lip = system.word_lip_inv(&w);
    let delta = r0 / (8.0 * lip);
    if !(delta > 1e-300) {
        return floor;
    }
    match system.image_inner_radius(&w, &Ball::new(spec.center.clone(), r0), delta) {
        Ok(r) => r.max(floor),
        Err(_) => floor,
    }
}

/// Smallest `p ≤ K_max` such that some word of length `p` maps the image
/// `f^n(B_f(x_1, n, ε))` to meet `B(x_2, L^{-n} ε)`.
///
/// The source is represented by a certified ball around `f^n(x_1)`; `allowed`
/// restricts the transition alphabet.
pub fn min_transition_time(
    system: &GeneratorSystem,
    shadowed: Symbol,
    source: &DynBallSpec,
    target: &DynBallSpec,
    k_max: usize,
    allowed: Option<&[Symbol]>,
) -> Result<Transition> {
    FiniteWord::new(vec![shadowed]).check(system.kappa())?;
    let allowed: Vec<Symbol> = allowed.map(<[Symbol]>::to_vec).unwrap_or_else(|| all_symbols(system));
    let l = system.lipschitz();
    let r_src = source_radius(system, shadowed, source);
    let r_tgt = l.powi(-(target.n as i32)) * target.eps;
    let start = system.apply_word(&FiniteWord::repeat(shadowed, source.n), &source.center);
    let opts = HittingOptions::default();
    let mut search = Search::new(system, start, &allowed, r_tgt.min(r_src) / 4.0, opts.beam, usize::MAX);
    loop {
        for n in &search.frontier {
            if dist(&n.center, &target.center) < r_src / n.lip_inv + r_tgt {
                return Ok(Transition::Found { p: n.word.len(), word: n.word.clone() });
            }
        }
        if search.level >= k_max || !search.advance(|_| true)? {
            return Ok(Transition::NotFound { searched_up_to: search.level, exhaustive: !search.truncated });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{golden, Generator};
    use crate::spaces::Space;

    fn rotation() -> GeneratorSystem {
        GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden())]).unwrap()
    }

    #[test]
    fn golden_rotation_certificate_verifies() {
        let s = rotation();
        let out = certify_frequent_hitting(&s, 0.1, 200, 0.0125, 0).unwrap();
        let cert = out.certificate().expect("certified");
        assert!(cert.k <= 31, "K = {}", cert.k);
        assert!(cert.full_table);
        assert!(cert.verify_all(&s));
    }

    #[test]
    fn identity_never_covers() {
        let s = GeneratorSystem::new(Space::Circle, vec![Generator::identity()]).unwrap();
        let out = covering_time(&s, None, 0.2, 50, 0.025).unwrap();
        assert!(matches!(out, CoveringOutcome::Refuted(_)));
    }

    #[test]
    fn rotation_covering_time_bound() {
        let s = rotation();
        let out = covering_time(&s, None, 0.2, 100, 0.025).unwrap();
        let k = out.covering().expect("covered").k;
        assert!(k <= 16, "K = {k}");
    }

    #[test]
    fn transition_zero_for_same_fixed_point() {
        let s = GeneratorSystem::new(
            Space::Circle,
            vec![Generator::sine_circle(0.1, 1).unwrap(), Generator::rotation(golden())],
        )
        .unwrap();
        let f0 = Symbol::new(1).unwrap();
        let spec = DynBallSpec { center: Point::circle(0.0), n: 3, eps: 0.1 };
        let t = min_transition_time(&s, f0, &spec, &spec, 10, None).unwrap();
        assert_eq!(t.p(), Some(0));
    }

    #[test]
    fn rejects_coarse_delta() {
        assert!(certify_frequent_hitting(&rotation(), 0.1, 10, 0.05, 0).is_err());
    }

    #[test]
    fn radius_grid_reaches_floor() {
        assert_eq!(radius_grid(0.05, 0.0125), vec![0.05, 0.025, 0.0125]);
    }
}
