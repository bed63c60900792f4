//! Separated-set and cover counting over `(n, ε)` grids, with growth rates
//! fitted on the upper half of the `n` grid.
//!
//! Two points are `(n, ε)`-separated when some coordinate of their
//! signatures (orbit points, or images under a word set) is at distance
//! `≥ ε`. On the discrete-valued shift metric this is the convention under
//! which distinct depth-`n` cylinders are `e^{-1}`-separated.

use crate::error::{Error, Result};
use crate::hitting::least_squares;
use crate::semigroup::GeneratorSystem;
use crate::spaces::{build_net_capped, cylinders, dist, FiniteWord, Point, Space, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use smallvec::SmallVec;
use std::collections::HashMap;

/// Largest candidate set a single count may use.
pub const CANDIDATE_CAP: usize = 4_000_000;
/// Symbolic candidates: all cylinders up to this many.
pub const CYLINDER_CAP: usize = 1 << 16;

/// Produces the points compared when testing separation.
pub trait Dynamics: Sync {
    fn space(&self) -> Space;
    /// `x, f(x), …, f^{n-1}(x)` or the analogous list for word sets.
    fn signature(&self, x: &Point, n: usize) -> Vec<Point>;
}

/// Iterates one generator.
pub struct SingleMap<'a> {
    pub system: &'a GeneratorSystem,
    pub symbol: Symbol,
}

impl Dynamics for SingleMap<'_> {
    fn space(&self) -> Space {
        self.system.space().clone()
    }

    fn signature(&self, x: &Point, n: usize) -> Vec<Point> {
        let g = self.system.generator(self.symbol);
        let mut out = Vec::with_capacity(n);
        let mut p = x.clone();
        for j in 0..n {
            if j > 0 {
                p = g.apply(&p);
            }
            out.push(p.clone());
        }
        out
    }
}

/// The non-autonomous sequence read off a word: `x, f_{w_0}(x), f_{w_1} f_{w_0}(x), …`.
pub struct WordDriven<'a> {
    pub system: &'a GeneratorSystem,
    pub word: FiniteWord,
}

impl Dynamics for WordDriven<'_> {
    fn space(&self) -> Space {
        self.system.space().clone()
    }

    fn signature(&self, x: &Point, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n);
        let mut p = x.clone();
        for j in 0..n {
            if j > 0 {
                let s = self.word.symbols()[(j - 1) % self.word.len().max(1)];
                p = self.system.generator(s).apply(&p);
            }
            out.push(p.clone());
        }
        out
    }
}

/// Images under every word of a fixed list (the empty word first).
pub struct WordSet<'a> {
    pub system: &'a GeneratorSystem,
    pub words: Vec<FiniteWord>,
}

impl Dynamics for WordSet<'_> {
    fn space(&self) -> Space {
        self.system.space().clone()
    }

    fn signature(&self, x: &Point, _n: usize) -> Vec<Point> {
        self.words.iter().map(|w| self.system.apply_word(w, x)).collect()
    }
}

/// The left shift on `Σ_κ`.
pub struct ShiftMap {
    pub kappa: usize,
}

impl Dynamics for ShiftMap {
    fn space(&self) -> Space {
        Space::Shift(self.kappa)
    }

    fn signature(&self, x: &Point, n: usize) -> Vec<Point> {
        let Point::Symbolic(w) = x else { return vec![x.clone(); n] };
        (0..n).map(|j| Point::Symbolic(w.shift(j))).collect()
    }
}

type CellKey = SmallVec<[i64; 8]>;

/// Hashes signatures on their first and last points so that a pair closer
/// than `ε` at both times shares or neighbours a cell.
struct SigIndex {
    eps: f64,
    cells: HashMap<CellKey, Vec<u32>>,
    /// Symbols that must agree for shift distance `< ε`.
    prefix: usize,
    /// Cells per unit for wrapping coordinates.
    wrap: i64,
    use_first: bool,
}

impl SigIndex {
    fn new(space: &Space, eps: f64) -> Self {
        let prefix = if eps > 0.0 { agree_len(eps) } else { 0 };
        let wrap = (1.0 / eps).floor().max(1.0) as i64;
        let coords = match space {
            Space::Circle => 1,
            Space::Torus(d) => *d,
            Space::Sphere2 => 3,
            Space::Projective(d) => *d,
            Space::Shift(_) => 0,
        };
        SigIndex { eps, cells: HashMap::new(), prefix, wrap, use_first: coords <= 2 }
    }

    fn parts<'s>(&self, sig: &'s [Point]) -> Vec<&'s Point> {
        let last = sig.last().unwrap();
        if self.use_first && sig.len() > 1 {
            vec![&sig[0], last]
        } else {
            vec![last]
        }
    }

    /// Keys for insertion (`query = false`) or every neighbouring key.
    fn keys(&self, sig: &[Point], query: bool) -> Vec<CellKey> {
        if let Some(Point::Symbolic(_)) = sig.first() {
            // not separated iff every coordinate shares its leading symbols
            let mut key: CellKey = SmallVec::new();
            for p in sig {
                if let Point::Symbolic(w) = p {
                    key.extend(w.take(self.prefix).symbols().iter().map(|s| s.index() as i64));
                }
            }
            return vec![key];
        }
        let parts = self.parts(sig);
        // per part: list of alternative coordinate vectors and whether they wrap
        let mut axes: Vec<Vec<i64>> = Vec::new();
        let mut flips: Vec<Vec<Vec<f64>>> = Vec::new();
        for p in &parts {
            match p {
                Point::Symbolic(_) => unreachable!(),
                Point::Circle(_) | Point::Torus(_) => {
                    for &x in p.coords() {
                        let c = ((x * self.wrap as f64).floor() as i64).rem_euclid(self.wrap);
                        axes.push(if query && self.wrap > 2 {
                            vec![(c - 1).rem_euclid(self.wrap), c, (c + 1) % self.wrap]
                        } else if query {
                            (0..self.wrap).collect()
                        } else {
                            vec![c]
                        });
                    }
                }
                Point::Sphere2(_) | Point::Projective(_) => {
                    let v = p.coords().to_vec();
                    let mut reps = vec![v.clone()];
                    if matches!(p, Point::Projective(_)) {
                        let flip = v.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0);
                        reps = if flip { vec![v.iter().map(|x| -x).collect()] } else { vec![v.clone()] };
                        if query {
                            reps.push(reps[0].iter().map(|x| -x).collect());
                        }
                    }
                    flips.push(reps);
                }
            }
        }
        if axes.is_empty() && flips.is_empty() {
            return vec![SmallVec::new()];
        }
        // embedded vectors: expand sign alternatives, then neighbour offsets
        let mut bases: Vec<Vec<i64>> = vec![Vec::new()];
        for reps in &flips {
            let mut next = Vec::new();
            for b in &bases {
                for r in reps {
                    let mut k = b.clone();
                    k.extend(r.iter().map(|x| (x / self.eps).floor() as i64));
                    next.push(k);
                }
            }
            bases = next;
        }
        let mut out: Vec<CellKey> = Vec::new();
        for b in bases {
            let mut partial: Vec<CellKey> = vec![SmallVec::new()];
            let extra = b.iter().map(|&c| if query { vec![c - 1, c, c + 1] } else { vec![c] });
            for choices in axes.iter().cloned().chain(extra) {
                partial = partial
                    .iter()
                    .flat_map(|k| {
                        choices.iter().map(move |&c| {
                            let mut k = k.clone();
                            k.push(c);
                            k
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        finish(out)
    }

    fn insert(&mut self, sig: &[Point], id: u32) {
        for k in self.keys(sig, false) {
            self.cells.entry(k).or_default().push(id);
        }
    }
}

/// Leading symbols two streams must share for shift distance `< ε`,
/// tolerant of rounding at `ε = e^{-k}`.
fn agree_len(eps: f64) -> usize {
    ((1.0 / eps).ln() + 1e-9).max(0.0).floor() as usize
}

fn finish(mut v: Vec<CellKey>) -> Vec<CellKey> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Some coordinate pair is at distance `≥ ε`.
fn separated(a: &[Point], b: &[Point], eps: f64) -> bool {
    a.iter().zip(b).any(|(x, y)| dist(x, y) >= eps)
}

/// Size of a greedy `(n, ε)`-separated subset of `candidates`, in candidate order.
pub fn separated_count(dynamics: &dyn Dynamics, candidates: &[Point], n: usize, eps: f64) -> usize {
    if candidates.is_empty() {
        return 0;
    }
    let n = n.max(1);
    let mut index = SigIndex::new(&dynamics.space(), eps);
    let mut chosen: Vec<Vec<Point>> = Vec::new();
    for x in candidates {
        let sig = dynamics.signature(x, n);
        let clash = index.keys(&sig, true).iter().any(|k| {
            index.cells.get(k).is_some_and(|ids| ids.iter().any(|&i| !separated(&chosen[i as usize], &sig, eps)))
        });
        if !clash {
            index.insert(&sig, chosen.len() as u32);
            chosen.push(sig);
        }
    }
    chosen.len()
}

/// Number of greedy dynamic `ε`-balls (centered at samples, in order) needed
/// to cover the fraction `1 − ρ` of `samples`.
pub fn cover_count(dynamics: &dyn Dynamics, samples: &[Point], n: usize, eps: f64, rho: f64) -> usize {
    let m = samples.len();
    if m == 0 {
        return 0;
    }
    let n = n.max(1);
    let sigs: Vec<Vec<Point>> = samples.par_iter().map(|x| dynamics.signature(x, n)).collect();
    let mut index = SigIndex::new(&dynamics.space(), eps);
    for (i, s) in sigs.iter().enumerate() {
        index.insert(s, i as u32);
    }
    let need = ((1.0 - rho) * m as f64).ceil() as usize;
    let mut covered = vec![false; m];
    let mut done = 0;
    let mut balls = 0;
    for c in 0..m {
        if done >= need {
            break;
        }
        if covered[c] {
            continue;
        }
        balls += 1;
        for k in index.keys(&sigs[c], true) {
            if let Some(ids) = index.cells.get(&k) {
                for &i in ids {
                    let i = i as usize;
                    if !covered[i] && !separated(&sigs[c], &sigs[i], eps) {
                        covered[i] = true;
                        done += 1;
                    }
                }
            }
        }
    }
    balls
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    Topological,
    Glw,
    Bufetov,
    Katok,
}

impl std::fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntropyKind::Topological => "top",
            EntropyKind::Glw => "glw",
            EntropyKind::Bufetov => "bufetov",
            EntropyKind::Katok => "katok",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub kind: EntropyKind,
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    /// `raw[i][j]` at `n[i]`, `eps[j]` as produced by the greedy procedure.
    pub raw: Vec<Vec<f64>>,
    /// `raw` after the monotone closure in `n` and `ε`.
    pub counts: Vec<Vec<f64>>,
    /// Standard errors of Monte Carlo averages, when sampled.
    pub std_err: Option<Vec<Vec<f64>>>,
    pub slopes: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Slope at the smallest `ε`.
    pub value: f64,
    /// Set when the word set was sampled, so the count is only a lower bound.
    pub lower_bound: bool,
}

impl EntropyEstimate {
    /// Every fit residual is at most 0.1.
    pub fn reliable(&self) -> bool {
        self.residuals.iter().all(|r| *r <= 0.1)
    }

    pub fn is_monotone(&self) -> bool {
        let c = &self.counts;
        let rows = c.len();
        let cols = self.eps.len();
        for i in 0..rows {
            for j in 0..cols {
                if i + 1 < rows && self.n[i + 1] >= self.n[i] && c[i + 1][j] < c[i][j] {
                    return false;
                }
                if j + 1 < cols && self.eps[j + 1] <= self.eps[j] && c[i][j + 1] < c[i][j] {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Closure {
    /// Counts are lower bounds: take maxima over smaller problems.
    Lower,
    /// Counts are upper bounds: take minima over larger problems.
    Upper,
}

/// `n` and `ε` grids are sorted internally (ascending `n`, descending `ε`).
fn assemble(
    kind: EntropyKind,
    n: &[usize],
    eps: &[f64],
    raw: Vec<Vec<f64>>,
    std_err: Option<Vec<Vec<f64>>>,
    closure: Closure,
    lower_bound: bool,
) -> EntropyEstimate {
    let rows = n.len();
    let cols = eps.len();
    let mut counts = raw.clone();
    match closure {
        Closure::Lower => {
            for i in 0..rows {
                for j in 0..cols {
                    let mut v = counts[i][j];
                    if i > 0 {
                        v = v.max(counts[i - 1][j]);
                    }
                    if j > 0 {
                        v = v.max(counts[i][j - 1]);
                    }
                    counts[i][j] = v;
                }
            }
        }
        Closure::Upper => {
            for i in (0..rows).rev() {
                for j in (0..cols).rev() {
                    let mut v = counts[i][j];
                    if i + 1 < rows {
                        v = v.min(counts[i + 1][j]);
                    }
                    if j + 1 < cols {
                        v = v.min(counts[i][j + 1]);
                    }
                    counts[i][j] = v;
                }
            }
        }
    }
    let start = rows / 2;
    let (slopes, residuals): (Vec<f64>, Vec<f64>) = (0..cols)
        .map(|j| {
            let pts: Vec<(f64, f64)> =
                (start..rows).filter(|&i| counts[i][j] > 0.0).map(|i| (n[i] as f64, counts[i][j].ln())).collect();
            least_squares(&pts).unwrap_or((0.0, f64::INFINITY))
        })
        .unzip();
    let value = *slopes.last().unwrap_or(&0.0);
    EntropyEstimate {
        kind,
        eps: eps.to_vec(),
        n: n.to_vec(),
        raw,
        counts,
        std_err,
        slopes,
        residuals,
        value,
        lower_bound,
    }
}

fn sorted_grids(eps: &[f64], n: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
    if eps.is_empty() || n.is_empty() {
        return Err(Error::Invalid("entropy grids must be nonempty".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0)) || n.contains(&0) {
        return Err(Error::Invalid("grid values must be positive".into()));
    }
    let mut e = eps.to_vec();
    e.sort_by(|a, b| b.total_cmp(a));
    e.dedup();
    let mut m = n.to_vec();
    m.sort_unstable();
    m.dedup();
    Ok((e, m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyOptions {
    /// Candidate net spacing; defaults to `min ε / 4`.
    pub resolution: Option<f64>,
    pub seed: u64,
    pub candidate_cap: usize,
    /// Largest word set enumerated exhaustively (GLW, Bufetov).
    pub word_cap: usize,
    /// Words drawn when the word set is sampled.
    pub word_samples: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions { resolution: None, seed: 0, candidate_cap: CANDIDATE_CAP, word_cap: 4096, word_samples: 64 }
    }
}

fn candidate_net(space: &Space, eps: &[f64], opts: &EntropyOptions) -> Result<Vec<Point>> {
    let min_eps = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta = opts.resolution.unwrap_or(min_eps / 4.0).min(min_eps / 4.0);
    let mut net = build_net_capped(space, delta, opts.seed, opts.candidate_cap)?;
    if let Space::Circle | Space::Torus(_) = space {
        // Lattice nets are invariant under toral endomorphisms and collapse onto
        // periodic orbits; a stratified jitter inside each cell keeps density.
        let m = crate::spaces::grid_cells(delta) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5E_ED0F_0E77);
        for p in &mut net {
            let c: Vec<f64> = p.coords().iter().map(|x| x + rng.random::<f64>() / m).collect();
            *p = match space {
                Space::Circle => Point::circle(c[0]),
                _ => Point::torus(&c),
            };
        }
    }
    Ok(net)
}

/// Cylinders long enough that depth-`n` separation at `ε` is decided by the prefix.
fn shift_candidates(kappa: usize, n: usize, eps: f64) -> Result<Vec<Point>> {
    let need = agree_len(eps) + n;
    let mut depth = need.max(1);
    while (kappa as f64).powi(depth as i32) > CYLINDER_CAP as f64 && depth > 1 {
        depth -= 1;
    }
    cylinders(kappa, depth, CYLINDER_CAP)
}

/// Bowen (single map) or Kolyada–Snoha (word-driven) entropy from greedy separated sets.
pub fn topological_entropy_estimate(
    dynamics: &dyn Dynamics,
    eps: &[f64],
    n: &[usize],
    opts: &EntropyOptions,
) -> Result<EntropyEstimate> {
    let (eps, n) = sorted_grids(eps, n)?;
    let space = dynamics.space();
    let shared = match space {
        Space::Shift(_) => None,
        _ => Some(candidate_net(&space, &eps, opts)?),
    };
    let cells: Vec<(usize, usize)> = (0..n.len()).flat_map(|i| (0..eps.len()).map(move |j| (i, j))).collect();
    let values = cells
        .par_iter()
        .map(|&(i, j)| -> Result<f64> {
            let c = match (&shared, &space) {
                (Some(net), _) => separated_count(dynamics, net, n[i], eps[j]),
                (None, Space::Shift(k)) => {
                    separated_count(dynamics, &shift_candidates(*k, n[i], eps[j])?, n[i], eps[j])
                }
                _ => unreachable!(),
            };
            Ok(c as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let raw = to_matrix(&values, n.len(), eps.len());
    Ok(assemble(EntropyKind::Topological, &n, &eps, raw, None, Closure::Lower, false))
}

fn to_matrix(values: &[f64], rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|i| values[i * cols..(i + 1) * cols].to_vec()).collect()
}

/// All words of length `< n` in breadth-first order, or a seeded sample of them.
fn glw_words(kappa: usize, n: usize, cap: usize, samples: usize, seed: u64) -> (Vec<FiniteWord>, bool) {
    let total: f64 = (0..n).map(|l| (kappa as f64).powi(l as i32)).sum();
    if total <= cap as f64 {
        let mut out = vec![FiniteWord::empty()];
        let mut level = vec![FiniteWord::empty()];
        for _ in 1..n {
            let mut next = Vec::new();
            for w in &level {
                for s in 0..kappa {
                    let mut v = w.clone();
                    v.push(Symbol::from_index(s));
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        return (out, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![FiniteWord::empty()];
    for _ in 0..samples.min(cap) {
        let len = rng.random_range(1..n);
        out.push(random_word(kappa, len, &mut rng));
    }
    // a full-length word last, so the index sees the deepest image
    out.push(random_word(kappa, n - 1, &mut rng));
    (out, true)
}

fn random_word(kappa: usize, len: usize, rng: &mut ChaCha8Rng) -> FiniteWord {
    FiniteWord::new((0..len).map(|_| Symbol::from_index(rng.random_range(0..kappa))).collect())
}

/// Separation by any word of length `< n`: the free-semigroup entropy.
pub fn glw_entropy_estimate(
    system: &GeneratorSystem,
    eps: &[f64],
    n: &[usize],
    opts: &EntropyOptions,
) -> Result<EntropyEstimate> {
    let (eps, n) = sorted_grids(eps, n)?;
    let kappa = system.kappa();
    let net = candidate_net(system.space(), &eps, opts)?;
    let mut lower = false;
    let mut sets = Vec::new();
    for &k in &n {
        let (words, sampled) = glw_words(kappa, k, opts.word_cap, opts.word_samples, opts.seed ^ k as u64);
        if sampled && kappa >= 2 && k > 10 {
            return Err(Error::BudgetExceeded(format!("GLW word set for n = {k} exceeds the cap {}", opts.word_cap)));
        }
        lower |= sampled;
        sets.push(words);
    }
    let cells: Vec<(usize, usize)> = (0..n.len()).flat_map(|i| (0..eps.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let ws = WordSet { system, words: sets[i].clone() };
            separated_count(&ws, &net, n[i], eps[j]) as f64
        })
        .collect();
    let raw = to_matrix(&values, n.len(), eps.len());
    Ok(assemble(EntropyKind::Glw, &n, &eps, raw, None, Closure::Lower, lower))
}

/// Average over length-`n` words of the per-word separated counts; exhaustive
/// when `κ^n ≤ word_cap`, else a seeded uniform sample with standard errors.
pub fn bufetov_entropy_estimate(
    system: &GeneratorSystem,
    eps: &[f64],
    n: &[usize],
    opts: &EntropyOptions,
) -> Result<EntropyEstimate> {
    let (eps, n) = sorted_grids(eps, n)?;
    let kappa = system.kappa();
    let net = candidate_net(system.space(), &eps, opts)?;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    let mut sampled_any = false;
    for &k in &n {
        let exhaustive = (kappa as f64).powi(k as i32) <= opts.word_cap as f64;
        let words: Vec<FiniteWord> = if exhaustive {
            (0..kappa.pow(k as u32))
                .map(|mut code| {
                    let mut s = Vec::with_capacity(k);
                    for _ in 0..k {
                        s.push(Symbol::from_index(code % kappa));
                        code /= kappa;
                    }
                    FiniteWord::new(s)
                })
                .collect()
        } else {
            sampled_any = true;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64).wrapping_mul(0x9E37_79B9));
            (0..opts.word_samples.max(2)).map(|_| random_word(kappa, k, &mut rng)).collect()
        };
        for &e in &eps {
            let counts: Vec<f64> = words
                .par_iter()
                .map(|w| separated_count(&WordDriven { system, word: w.clone() }, &net, k, e) as f64)
                .collect();
            let m = counts.len() as f64;
            let mean = counts.iter().sum::<f64>() / m;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            values.push(mean);
            errors.push(if exhaustive { 0.0 } else { (var / m).sqrt() });
        }
    }
    let raw = to_matrix(&values, n.len(), eps.len());
    let se = sampled_any.then(|| to_matrix(&errors, n.len(), eps.len()));
    Ok(assemble(EntropyKind::Bufetov, &n, &eps, raw, se, Closure::Lower, false))
}

/// Greedy dynamic-ball covers of `1 − ρ` of `samples` points drawn from `sampler`.
pub fn katok_entropy_estimate(
    dynamics: &dyn Dynamics,
    sampler: &(dyn Fn(&mut ChaCha8Rng) -> Point + Sync),
    samples: usize,
    eps: &[f64],
    n: &[usize],
    rho: f64,
    seed: u64,
) -> Result<EntropyEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..samples).map(|_| sampler(&mut rng)).collect();
    katok_entropy_on(dynamics, &pts, eps, n, rho)
}

/// Katok estimate over a given sample, e.g. the points of a separated-set run.
pub fn katok_entropy_on(
    dynamics: &dyn Dynamics,
    points: &[Point],
    eps: &[f64],
    n: &[usize],
    rho: f64,
) -> Result<EntropyEstimate> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Invalid("rho must lie in (0, 1)".into()));
    }
    let (eps, n) = sorted_grids(eps, n)?;
    let cells: Vec<(usize, usize)> = (0..n.len()).flat_map(|i| (0..eps.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> =
        cells.par_iter().map(|&(i, j)| cover_count(dynamics, points, n[i], eps[j], rho) as f64).collect();
    let raw = to_matrix(&values, n.len(), eps.len());
    Ok(assemble(EntropyKind::Katok, &n, &eps, raw, None, Closure::Upper, false))
}

/// Separated-set estimate over a given candidate list instead of the built-in net.
///
/// On a shared point list every greedy cover center is separated from the
/// earlier ones, so the Katok counts never exceed these.
pub fn topological_entropy_on(
    dynamics: &dyn Dynamics,
    points: &[Point],
    eps: &[f64],
    n: &[usize],
) -> Result<EntropyEstimate> {
    let (eps, n) = sorted_grids(eps, n)?;
    let cells: Vec<(usize, usize)> = (0..n.len()).flat_map(|i| (0..eps.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> =
        cells.par_iter().map(|&(i, j)| separated_count(dynamics, points, n[i], eps[j]) as f64).collect();
    let raw = to_matrix(&values, n.len(), eps.len());
    Ok(assemble(EntropyKind::Topological, &n, &eps, raw, None, Closure::Lower, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{golden, Generator};
    use crate::spaces::build_net;

    #[test]
    fn huge_eps_gives_one() {
        let s = GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden())]).unwrap();
        let d = SingleMap { system: &s, symbol: Symbol::new(1).unwrap() };
        let net = build_net(&Space::Circle, 0.01, 0).unwrap();
        assert_eq!(separated_count(&d, &net, 5, 0.6), 1);
    }

    #[test]
    fn shift_cylinders_all_separated() {
        let d = ShiftMap { kappa: 2 };
        for n in 1..=8 {
            let c = cylinders(2, n, 1 << 16).unwrap();
            assert_eq!(separated_count(&d, &c, n, (-1f64).exp()), 1 << n);
        }
    }

    #[test]
    fn rotation_count_bounded() {
        let s = GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden())]).unwrap();
        let d = SingleMap { system: &s, symbol: Symbol::new(1).unwrap() };
        let net = build_net(&Space::Circle, 0.005, 0).unwrap();
        for n in [1, 5, 20] {
            assert!(separated_count(&d, &net, n, 0.1) <= 10);
        }
    }

    #[test]
    fn closure_is_monotone() {
        let raw = vec![vec![3.0, 5.0], vec![2.0, 9.0], vec![7.0, 4.0]];
        let e = assemble(EntropyKind::Topological, &[1, 2, 3], &[0.2, 0.1], raw, None, Closure::Lower, false);
        assert!(e.is_monotone());
        assert_eq!(e.counts[2][1], 9.0);
    }
}
