//! Compact phase spaces, the full shift, balls and nets.
//!
//! Metrics: arc length on the circle (diameter 1/2), max of coordinate arcs
//! on the torus, geodesic angle on the sphere and the line angle on
//! projective space. Shift streams use `e^{-N}` with `N` the first
//! disagreement index counted from 1.

use crate::error::{Error, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;
use std::f64::consts::PI;
use std::fmt;

pub type Coords = SmallVec<[f64; 4]>;

/// Stream comparison horizon; agreement beyond it is reported as distance 0.
pub const SHIFT_HORIZON: usize = 1_000_000;

/// Default cardinality cap for nets.
pub const NET_CAP: usize = 4_000_000;

/// A letter of the alphabet `{1, …, κ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u8);

impl Symbol {
    pub fn new(value: usize) -> Result<Self> {
        if (1..=255).contains(&value) {
            Ok(Symbol(value as u8))
        } else {
            Err(Error::BadSymbol { symbol: value, kappa: 255 })
        }
    }

    pub(crate) fn from_index(index: usize) -> Self {
        debug_assert!(index < 255);
        Symbol(index as u8 + 1)
    }

    pub fn value(self) -> usize {
        self.0 as usize
    }

    /// Zero-based position in the generator list.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word over the alphabet; the first symbol acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FiniteWord(Vec<Symbol>);

impl FiniteWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        FiniteWord(symbols)
    }

    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    pub fn from_values(values: &[usize]) -> Result<Self> {
        values.iter().map(|&v| Symbol::new(v)).collect::<Result<Vec<_>>>().map(FiniteWord)
    }

    pub fn repeat(symbol: Symbol, n: usize) -> Self {
        FiniteWord(vec![symbol; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn append(&mut self, other: &FiniteWord) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &FiniteWord) -> FiniteWord {
        let mut w = self.clone();
        w.append(other);
        w
    }

    pub fn slice(&self, start: usize, end: usize) -> FiniteWord {
        FiniteWord(self.0[start..end].to_vec())
    }

    /// Fails with `BadSymbol` if a letter exceeds `kappa`.
    pub fn check(&self, kappa: usize) -> Result<()> {
        match self.0.iter().find(|s| s.value() > kappa) {
            Some(s) => Err(Error::BadSymbol { symbol: s.value(), kappa }),
            None => Ok(()),
        }
    }

    pub fn run_lengths(&self) -> Vec<(Symbol, usize)> {
        let mut runs: Vec<(Symbol, usize)> = Vec::new();
        for &s in &self.0 {
            match runs.last_mut() {
                Some((t, c)) if *t == s => *c += 1,
                _ => runs.push((s, 1)),
            }
        }
        runs
    }
}

impl fmt::Display for FiniteWord {
    /// Run-length encoded, e.g. `1^12 2^3 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let runs = self.run_lengths();
        for (i, (s, c)) in runs.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *c == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{c}")?;
            }
        }
        Ok(())
    }
}

/// How a stream continues after its prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    Constant(Symbol),
    Periodic(FiniteWord),
    /// Uniform symbols drawn from a ChaCha stream at word position `offset + i`.
    Random {
        seed: u64,
        kappa: u8,
        offset: u64,
    },
}

/// A point of the one-sided shift with a finite window of negative coordinates.
///
/// Index 0 is the current symbol `ω_0`; `past[j-1]` holds `ω_{-j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordStream {
    prefix: FiniteWord,
    tail: Tail,
    past: FiniteWord,
}

const PAST_WINDOW: usize = 64;

fn random_symbol(rng: &mut ChaCha8Rng, kappa: u8) -> Symbol {
    let x = rng.next_u32() as u64;
    Symbol::from_index(((x * kappa as u64) >> 32) as usize)
}

impl WordStream {
    pub fn new(prefix: FiniteWord, tail: Tail) -> Self {
        if let Tail::Periodic(w) = &tail {
            assert!(!w.is_empty(), "periodic tail needs a nonempty period");
        }
        WordStream { prefix, tail, past: FiniteWord::empty() }
    }

    pub fn constant(s: Symbol) -> Self {
        Self::new(FiniteWord::empty(), Tail::Constant(s))
    }

    pub fn periodic(period: FiniteWord) -> Self {
        Self::new(FiniteWord::empty(), Tail::Periodic(period))
    }

    pub fn random(kappa: usize, seed: u64) -> Self {
        assert!((1..=255).contains(&kappa));
        Self::new(FiniteWord::empty(), Tail::Random { seed, kappa: kappa as u8, offset: 0 })
    }

    pub fn with_past(mut self, past: FiniteWord) -> Self {
        self.past = past;
        self
    }

    pub fn prefix(&self) -> &FiniteWord {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn past(&self) -> &FiniteWord {
        &self.past
    }

    /// Symbol `ω_k` for `k ≥ 0`.
    pub fn at(&self, k: usize) -> Symbol {
        let p = self.prefix.len();
        if k < p {
            return self.prefix.0[k];
        }
        let i = k - p;
        match &self.tail {
            Tail::Constant(s) => *s,
            Tail::Periodic(w) => w.0[i % w.len()],
            Tail::Random { seed, kappa, offset } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos((*offset + i as u64) as u128);
                random_symbol(&mut rng, *kappa)
            }
        }
    }

    /// Symbol `ω_{-j}` for `j ≥ 1`, if inside the stored window.
    pub fn past_at(&self, j: usize) -> Option<Symbol> {
        if j == 0 {
            None
        } else {
            self.past.0.get(j - 1).copied()
        }
    }

    /// The first `n` symbols `ω_0 … ω_{n-1}`.
    pub fn take(&self, n: usize) -> FiniteWord {
        let p = self.prefix.len();
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.prefix.0[..n.min(p)]);
        if n > p {
            let m = n - p;
            match &self.tail {
                Tail::Constant(s) => out.extend(std::iter::repeat_n(*s, m)),
                Tail::Periodic(w) => out.extend((0..m).map(|i| w.0[i % w.len()])),
                Tail::Random { seed, kappa, offset } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_word_pos(*offset as u128);
                    out.extend((0..m).map(|_| random_symbol(&mut rng, *kappa)));
                }
            }
        }
        FiniteWord(out)
    }

    /// The left shift `σ^m ω`; shifted-out symbols enter the past window.
    pub fn shift(&self, m: usize) -> WordStream {
        if m == 0 {
            return self.clone();
        }
        let p = self.prefix.len();
        let mut past: Vec<Symbol> = if m <= PAST_WINDOW {
            self.take(m).0.into_iter().rev().collect()
        } else {
            let head = self.take(m);
            head.0[m - PAST_WINDOW..].iter().rev().copied().collect()
        };
        let keep = PAST_WINDOW.saturating_sub(past.len());
        past.extend(self.past.0.iter().take(keep));
        let (prefix, tail) = if m <= p {
            (FiniteWord(self.prefix.0[m..].to_vec()), self.tail.clone())
        } else {
            let r = m - p;
            let tail = match &self.tail {
                Tail::Constant(s) => Tail::Constant(*s),
                Tail::Periodic(w) => {
                    let k = r % w.len();
                    let mut v = w.0[k..].to_vec();
                    v.extend_from_slice(&w.0[..k]);
                    Tail::Periodic(FiniteWord(v))
                }
                Tail::Random { seed, kappa, offset } => {
                    Tail::Random { seed: *seed, kappa: *kappa, offset: offset + r as u64 }
                }
            };
            (FiniteWord::empty(), tail)
        };
        WordStream { prefix, tail, past: FiniteWord(past) }
    }

    /// Index from which both tails provably agree forever, if decidable.
    fn agreement_horizon(&self, other: &WordStream) -> Option<usize> {
        let start = self.prefix.len().max(other.prefix.len());
        let period = |t: &Tail| match t {
            Tail::Constant(_) => Some(1usize),
            Tail::Periodic(w) => Some(w.len()),
            Tail::Random { .. } => None,
        };
        match (period(&self.tail), period(&other.tail)) {
            (Some(a), Some(b)) => {
                let l = lcm(a, b);
                if l <= SHIFT_HORIZON {
                    Some(start + l)
                } else {
                    None
                }
            }
            _ => match (&self.tail, &other.tail) {
                (
                    Tail::Random { seed: s1, kappa: k1, offset: o1 },
                    Tail::Random { seed: s2, kappa: k2, offset: o2 },
                ) if s1 == s2
                    && k1 == k2
                    && (*o1 as i128 - self.prefix.len() as i128) == (*o2 as i128 - other.prefix.len() as i128) =>
                {
                    Some(start)
                }
                _ => None,
            },
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// First disagreement index `N ≥ 1`, or `None` for agreement; the flag is
/// true when agreement was decided exactly rather than up to the horizon.
fn first_disagreement(a: &WordStream, b: &WordStream) -> (Option<usize>, bool) {
    let mut best: Option<usize> = None;
    let common_past = a.past.len().min(b.past.len());
    for j in 1..=common_past {
        if a.past.0[j - 1] != b.past.0[j - 1] {
            best = Some(j + 1);
            break;
        }
    }
    let (limit, exact) = match a.agreement_horizon(b) {
        Some(h) => (h, true),
        None => (SHIFT_HORIZON, false),
    };
    let limit = match best {
        Some(n) => limit.min(n),
        None => limit,
    };
    const CHUNK: usize = 4096;
    let mut k = 0;
    while k < limit {
        let end = (k + CHUNK).min(limit);
        let wa = a.shift(k).take(end - k);
        let wb = b.shift(k).take(end - k);
        if let Some(i) = wa.0.iter().zip(&wb.0).position(|(x, y)| x != y) {
            let n = k + i + 1;
            return (Some(best.map_or(n, |m| m.min(n))), true);
        }
        k = end;
    }
    (best, best.is_some() || exact)
}

/// `e^{-N}` with `N` the first index (counted from 1) where the streams differ.
pub fn shift_distance(a: &WordStream, b: &WordStream) -> f64 {
    shift_distance_flagged(a, b).0
}

/// Distance plus a flag that is false when agreement was only checked up to
/// [`SHIFT_HORIZON`].
pub fn shift_distance_flagged(a: &WordStream, b: &WordStream) -> (f64, bool) {
    match first_disagreement(a, b) {
        (Some(n), _) => ((-(n as f64)).exp(), true),
        (None, exact) => (0.0, exact),
    }
}

/// A concrete compact phase space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Circle,
    Torus(usize),
    Sphere2,
    /// Lines in `ℝ^d`.
    Projective(usize),
    /// Full shift on κ symbols.
    Shift(usize),
}

/// A point of one of the spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Circle(f64),
    Torus(Coords),
    Sphere2([f64; 3]),
    Projective(Coords),
    Symbolic(WordStream),
}

fn wrap01(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn arc(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed shortest displacement from `a` to `b` on ℝ/ℤ.
fn signed_arc(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: &[f64]) -> Result<Coords> {
    let n = norm(v);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// `|u − v|` and `|u + v|`.
fn chords(u: &[f64], v: &[f64]) -> (f64, f64) {
    let (mut d, mut s) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        d += (a - b) * (a - b);
        s += (a + b) * (a + b);
    }
    (d.sqrt(), s.sqrt())
}

/// Angle between unit vectors, stable near 0 and π; symmetric and exactly 0 on equal inputs.
fn unit_angle(u: &[f64], v: &[f64]) -> f64 {
    let (d, s) = chords(u, v);
    2.0 * d.atan2(s)
}

impl Point {
    pub fn circle(x: f64) -> Point {
        Point::Circle(wrap01(x))
    }

    pub fn torus(coords: &[f64]) -> Point {
        Point::Torus(coords.iter().map(|&x| wrap01(x)).collect())
    }

    pub fn sphere(v: [f64; 3]) -> Result<Point> {
        let c = normalized(&v)?;
        Ok(Point::Sphere2([c[0], c[1], c[2]]))
    }

    pub fn projective(v: &[f64]) -> Result<Point> {
        Ok(Point::Projective(normalized(v)?))
    }

    pub fn symbolic(w: WordStream) -> Point {
        Point::Symbolic(w)
    }

    /// Euclidean coordinates (angle(s) on circle/torus, embedding vector otherwise).
    pub fn coords(&self) -> &[f64] {
        match self {
            Point::Circle(x) => std::slice::from_ref(x),
            Point::Torus(c) | Point::Projective(c) => c,
            Point::Sphere2(v) => v,
            Point::Symbolic(_) => &[],
        }
    }

    pub fn as_stream(&self) -> Option<&WordStream> {
        match self {
            Point::Symbolic(w) => Some(w),
            _ => None,
        }
    }
}

/// A closed metric ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, y: &Point) -> bool {
        dist(&self.center, y) <= self.radius
    }
}

/// Metric distance; `SpaceMismatch` when the points live in different spaces.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    match (x, y) {
        (Point::Circle(a), Point::Circle(b)) => Ok(arc(*a, *b)),
        (Point::Torus(a), Point::Torus(b)) if a.len() == b.len() => {
            Ok(a.iter().zip(b).map(|(p, q)| arc(*p, *q)).fold(0.0, f64::max))
        }
        (Point::Sphere2(a), Point::Sphere2(b)) => Ok(unit_angle(a, b)),
        (Point::Projective(a), Point::Projective(b)) if a.len() == b.len() => {
            let (d, s) = chords(a, b);
            Ok(2.0 * d.min(s).atan2(d.max(s)))
        }
        (Point::Symbolic(a), Point::Symbolic(b)) => Ok(shift_distance(a, b)),
        _ => Err(Error::SpaceMismatch),
    }
}

/// Distance for points already known to share a space.
#[inline]
pub(crate) fn dist(x: &Point, y: &Point) -> f64 {
    match (x, y) {
        (Point::Circle(a), Point::Circle(b)) => arc(*a, *b),
        (Point::Torus(a), Point::Torus(b)) => {
            let mut m = 0.0f64;
            for (p, q) in a.iter().zip(b) {
                m = m.max(arc(*p, *q));
            }
            m
        }
        _ => distance(x, y).unwrap_or(f64::NAN),
    }
}

impl Space {
    pub fn of(p: &Point) -> Space {
        match p {
            Point::Circle(_) => Space::Circle,
            Point::Torus(c) => Space::Torus(c.len()),
            Point::Sphere2(_) => Space::Sphere2,
            Point::Projective(c) => Space::Projective(c.len()),
            Point::Symbolic(w) => {
                let kappa = match w.tail() {
                    Tail::Random { kappa, .. } => *kappa as usize,
                    _ => 0,
                };
                Space::Shift(kappa)
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Space::Circle, Point::Circle(_)) | (Space::Sphere2, Point::Sphere2(_)) => true,
            (Space::Torus(d), Point::Torus(c)) | (Space::Projective(d), Point::Projective(c)) => c.len() == *d,
            (Space::Shift(_), Point::Symbolic(_)) => true,
            _ => false,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Circle | Space::Torus(_) => 0.5,
            Space::Sphere2 => PI,
            Space::Projective(_) => PI / 2.0,
            Space::Shift(_) => (-1.0f64).exp(),
        }
    }

    /// Manifold dimension; `None` for the shift.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Space::Circle => Some(1),
            Space::Torus(d) => Some(*d),
            Space::Sphere2 => Some(2),
            Space::Projective(d) => Some(d - 1),
            Space::Shift(_) => None,
        }
    }

    /// Uniform (Haar) random point; shift points get seeded-random tails.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Space::Circle => Point::Circle(rng.random::<f64>()),
            Space::Torus(d) => Point::Torus((0..*d).map(|_| rng.random::<f64>()).collect()),
            Space::Sphere2 => loop {
                let v = [gauss(rng), gauss(rng), gauss(rng)];
                if let Ok(p) = Point::sphere(v) {
                    return p;
                }
            },
            Space::Projective(d) => loop {
                let v: Coords = (0..*d).map(|_| gauss(rng)).collect();
                if let Ok(p) = Point::projective(&v) {
                    return p;
                }
            },
            Space::Shift(k) => Point::Symbolic(WordStream::random((*k).max(1), rng.next_u64())),
        }
    }

    /// A random point at distance `< r` from `center` (not uniform in the ball).
    pub fn random_in_ball<R: Rng + ?Sized>(&self, center: &Point, r: f64, rng: &mut R) -> Point {
        match center {
            Point::Circle(x) => Point::circle(x + r * (2.0 * rng.random::<f64>() - 1.0) * 0.999_999),
            Point::Torus(c) => {
                let v: Coords = c.iter().map(|x| x + r * (2.0 * rng.random::<f64>() - 1.0) * 0.999_999).collect();
                Point::torus(&v)
            }
            Point::Sphere2(_) | Point::Projective(_) => {
                let dim = self.dim().unwrap_or(1);
                let t: Vec<f64> = loop {
                    let t: Vec<f64> = (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
                    if norm(&t) < 1.0 {
                        break t.into_iter().map(|x| x * r * 0.999_999).collect();
                    }
                };
                exp_map(center, &t)
            }
            Point::Symbolic(w) => {
                // agree on the first k symbols with e^{-(k+1)} < r
                let k = if r >= 1.0 { 0 } else { (1.0 / r).ln().floor() as usize };
                let kappa = match self {
                    Space::Shift(k) => (*k).max(1),
                    _ => 2,
                };
                WordStream::new(w.take(k), Tail::Random { seed: rng.next_u64(), kappa: kappa as u8, offset: 0 })
                    .into_point()
            }
        }
    }
}

impl WordStream {
    pub fn into_point(self) -> Point {
        Point::Symbolic(self)
    }
}

pub(crate) fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller; one variate per call keeps the stream position simple.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Orthonormal basis of the tangent space at a unit vector.
fn tangent_basis(c: &[f64]) -> Vec<Coords> {
    let d = c.len();
    let mut basis: Vec<Coords> = Vec::with_capacity(d - 1);
    for i in 0..d {
        let mut e: Coords = (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
        let pc = dot(&e, c);
        for (x, y) in e.iter_mut().zip(c) {
            *x -= pc * y;
        }
        for b in &basis {
            let pb = dot(&e, b);
            for (x, y) in e.iter_mut().zip(b) {
                *x -= pb * y;
            }
        }
        let n = norm(&e);
        if n > 1e-6 {
            basis.push(e.iter().map(|x| x / n).collect());
            if basis.len() == d - 1 {
                break;
            }
        }
    }
    basis
}

/// Riemannian exponential map at a sphere/projective point; `t` in tangent coordinates.
pub(crate) fn exp_map(center: &Point, t: &[f64]) -> Point {
    let c = center.coords();
    let basis = tangent_basis(c);
    let r = norm(t);
    let mut v: Coords = c.iter().map(|x| x * r.cos()).collect();
    if r > 0.0 {
        let s = r.sin() / r;
        for (ti, b) in t.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += s * ti * y;
            }
        }
    }
    match center {
        Point::Sphere2(_) => Point::sphere([v[0], v[1], v[2]]).expect("unit"),
        _ => Point::projective(&v).expect("unit"),
    }
}

/// Geodesic interpolation: the point at fraction `t` of the way from `a` to `b`.
pub fn interpolate(a: &Point, b: &Point, t: f64) -> Result<Point> {
    match (a, b) {
        (Point::Circle(x), Point::Circle(y)) => Ok(Point::circle(x + t * signed_arc(*x, *y))),
        (Point::Torus(x), Point::Torus(y)) if x.len() == y.len() => {
            let v: Coords = x.iter().zip(y).map(|(p, q)| p + t * signed_arc(*p, *q)).collect();
            Ok(Point::torus(&v))
        }
        (Point::Sphere2(_), Point::Sphere2(_)) | (Point::Projective(_), Point::Projective(_)) => {
            let u = a.coords();
            let mut w: Coords = b.coords().iter().copied().collect();
            if matches!(a, Point::Projective(_)) && dot(u, &w) < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            let ang = unit_angle(u, &w);
            if ang < 1e-15 {
                return Ok(a.clone());
            }
            let s = ang.sin();
            let (fa, fb) = (((1.0 - t) * ang).sin() / s, (t * ang).sin() / s);
            let v: Coords = u.iter().zip(&w).map(|(p, q)| fa * p + fb * q).collect();
            match a {
                Point::Sphere2(_) => Point::sphere([v[0], v[1], v[2]]),
                _ => Point::projective(&v),
            }
        }
        (Point::Symbolic(_), Point::Symbolic(_)) => Ok(if t < 0.5 { a.clone() } else { b.clone() }),
        _ => Err(Error::SpaceMismatch),
    }
}

fn grid_offsets(seed: u64, d: usize, spacing: f64) -> Vec<f64> {
    if seed == 0 {
        return vec![0.0; d];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| rng.random::<f64>() * spacing).collect()
}

/// Points per axis of the circle/torus net at spacing δ.
pub(crate) fn grid_cells(delta: f64) -> usize {
    ((1.0 / delta).ceil() as usize).max(1)
}

/// Cells per axis of a face grid with angular covering radius ≤ δ/2.
fn face_cells(face_dim: usize, delta: f64) -> usize {
    // a cell of side h = 2/m has half-diagonal h·√k/2, and angles on a face
    // at distance 1 from the origin never exceed face lengths
    ((2.0 * (face_dim as f64).sqrt() / delta).ceil() as usize).max(1)
}

/// A δ-dense net: every point of the space is within δ of a net point.
///
/// Grids have spacing δ (covering radius δ/2). Spheres and projective spaces
/// use centred grids on the faces of the cube (positive faces only in the
/// projective case). Shift nets are depth-`D` cylinders with `e^{-(D+1)} ≤ δ`.
/// A nonzero seed shifts circle and torus grids by a random offset.
pub fn build_net(space: &Space, delta: f64, seed: u64) -> Result<Vec<Point>> {
    build_net_capped(space, delta, seed, NET_CAP)
}

pub fn build_net_capped(space: &Space, delta: f64, seed: u64, cap: usize) -> Result<Vec<Point>> {
    if !(delta > 0.0) {
        return Err(Error::Invalid(format!("net resolution must be positive, got {delta}")));
    }
    if let Some(d) = space.dim() {
        if d > 4 {
            return Err(Error::Invalid(format!("dimension {d} > 4")));
        }
    }
    let check = |size: u128| -> Result<()> {
        if size > cap as u128 {
            Err(Error::NetTooLarge { size, cap })
        } else {
            Ok(())
        }
    };
    match space {
        Space::Circle | Space::Torus(_) => {
            let d = space.dim().unwrap();
            let m = grid_cells(delta);
            check((m as u128).pow(d as u32))?;
            let off = grid_offsets(seed, d, 1.0 / m as f64);
            let mut out = Vec::with_capacity(m.pow(d as u32));
            let mut idx = vec![0usize; d];
            loop {
                let c: Coords = idx.iter().zip(&off).map(|(&i, o)| i as f64 / m as f64 + o).collect();
                out.push(if d == 1 && *space == Space::Circle { Point::circle(c[0]) } else { Point::torus(&c) });
                let mut k = d;
                loop {
                    if k == 0 {
                        return Ok(out);
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        Space::Sphere2 | Space::Projective(_) => {
            let (d, signs): (usize, &[f64]) = match space {
                Space::Sphere2 => (3, &[1.0, -1.0]),
                Space::Projective(d) => (*d, &[1.0]),
                _ => unreachable!(),
            };
            if d < 2 {
                return Err(Error::Invalid("projective space needs d >= 2".into()));
            }
            let k = d - 1;
            let m = face_cells(k, delta);
            check((m as u128).pow(k as u32) * (d * signs.len()) as u128)?;
            let mut out = Vec::new();
            for axis in 0..d {
                for &sg in signs {
                    let mut idx = vec![0usize; k];
                    'face: loop {
                        let mut v: Coords = SmallVec::with_capacity(d);
                        let mut j = 0;
                        for a in 0..d {
                            if a == axis {
                                v.push(sg);
                            } else {
                                v.push(-1.0 + (2 * idx[j] + 1) as f64 / m as f64);
                                j += 1;
                            }
                        }
                        out.push(match space {
                            Space::Sphere2 => Point::sphere([v[0], v[1], v[2]])?,
                            _ => Point::projective(&v)?,
                        });
                        let mut q = k;
                        loop {
                            if q == 0 {
                                break 'face;
                            }
                            q -= 1;
                            idx[q] += 1;
                            if idx[q] < m {
                                break;
                            }
                            idx[q] = 0;
                        }
                    }
                }
            }
            Ok(out)
        }
        Space::Shift(kappa) => {
            let kappa = (*kappa).max(1);
            let depth = if delta >= (-1.0f64).exp() { 0 } else { ((1.0 / delta).ln() - 1.0).ceil().max(0.0) as usize };
            cylinders(kappa, depth, cap)
        }
    }
}

/// All depth-`n` cylinder representatives (constant tail of symbol 1), in
/// lexicographic order.
pub fn cylinders(kappa: usize, n: usize, cap: usize) -> Result<Vec<Point>> {
    let size = (kappa as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::NetTooLarge { size, cap });
    }
    let one = Symbol::from_index(0);
    let mut out = Vec::with_capacity(size as usize);
    for code in 0..size as usize {
        let mut c = code;
        let mut s = vec![one; n];
        for slot in s.iter_mut().rev() {
            *slot = Symbol::from_index(c % kappa);
            c /= kappa;
        }
        out.push(Point::Symbolic(WordStream::new(FiniteWord::new(s), Tail::Constant(one))));
    }
    Ok(out)
}

/// Points covering the closed ball `B(center, r)` with covering radius `h`.
pub fn ball_net(center: &Point, r: f64, h: f64, cap: usize) -> Result<Vec<Point>> {
    if !(h > 0.0) {
        return Err(Error::Invalid("ball net spacing must be positive".into()));
    }
    let check = |size: u128| -> Result<()> {
        if size > cap as u128 {
            Err(Error::NetTooLarge { size, cap })
        } else {
            Ok(())
        }
    };
    match center {
        Point::Circle(_) | Point::Torus(_) => {
            let c = center.coords();
            let d = c.len();
            let s = 2.0 * h;
            let k = (r / s).ceil() as i64;
            let per = (2 * k + 1) as u128;
            check(per.pow(d as u32))?;
            let mut out = Vec::with_capacity(per.pow(d as u32) as usize);
            let mut idx = vec![-k; d];
            loop {
                let v: Coords = c.iter().zip(&idx).map(|(x, &i)| x + (i as f64 * s).clamp(-r, r)).collect();
                out.push(match center {
                    Point::Circle(_) => Point::circle(v[0]),
                    _ => Point::torus(&v),
                });
                let mut q = d;
                loop {
                    if q == 0 {
                        return Ok(out);
                    }
                    q -= 1;
                    idx[q] += 1;
                    if idx[q] <= k {
                        break;
                    }
                    idx[q] = -k;
                }
            }
        }
        Point::Sphere2(_) | Point::Projective(_) => {
            let dim = center.coords().len() - 1;
            let s = 2.0 * h / (dim as f64).sqrt();
            let k = (r / s).ceil() as i64;
            let per = (2 * k + 1) as u128;
            check(per.pow(dim as u32))?;
            let reach = r + h;
            let mut out = Vec::new();
            let mut idx = vec![-k; dim];
            loop {
                let t: Vec<f64> = idx.iter().map(|&i| (i as f64 * s).clamp(-r, r)).collect();
                if norm(&t) <= reach {
                    // clamp into the ball so every emitted point is a member
                    let n = norm(&t);
                    let t: Vec<f64> = if n > r { t.iter().map(|x| x * r / n).collect() } else { t };
                    out.push(exp_map(center, &t));
                }
                let mut q = dim;
                loop {
                    if q == 0 {
                        return Ok(out);
                    }
                    q -= 1;
                    idx[q] += 1;
                    if idx[q] <= k {
                        break;
                    }
                    idx[q] = -k;
                }
            }
        }
        Point::Symbolic(_) => Err(Error::Invalid("ball nets are not defined on the shift".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(v: usize) -> Symbol {
        Symbol::new(v).unwrap()
    }

    #[test]
    fn shift_metric_examples() {
        let a = WordStream::constant(sym(1));
        assert_eq!(shift_distance(&a, &a), 0.0);
        let b = WordStream::new(FiniteWord::from_values(&[2]).unwrap(), Tail::Constant(sym(1)));
        assert!((shift_distance(&a, &b) - (-1.0f64).exp()).abs() < 1e-15);
        let c = WordStream::new(FiniteWord::from_values(&[1, 1, 2]).unwrap(), Tail::Constant(sym(1)));
        assert!((shift_distance(&a, &c) - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn periodic_and_constant_agree_exactly() {
        let a = WordStream::constant(sym(2));
        let b = WordStream::periodic(FiniteWord::from_values(&[2, 2, 2]).unwrap());
        assert_eq!(shift_distance_flagged(&a, &b), (0.0, true));
    }

    #[test]
    fn random_streams_shift_consistently() {
        let w = WordStream::random(3, 99);
        let head = w.take(40);
        let s = w.shift(7);
        for i in 0..33 {
            assert_eq!(s.at(i), head.symbols()[i + 7]);
            assert_eq!(w.at(i + 7), head.symbols()[i + 7]);
        }
        assert_eq!(s.past_at(1), Some(head.symbols()[6]));
        assert_eq!(shift_distance_flagged(&s, &w.shift(7)), (0.0, true));
    }

    #[test]
    fn past_window_counts_in_metric() {
        let a = WordStream::constant(sym(1)).with_past(FiniteWord::from_values(&[1, 2]).unwrap());
        let b = WordStream::constant(sym(1)).with_past(FiniteWord::from_values(&[1, 1]).unwrap());
        assert!((shift_distance(&a, &b) - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        assert!((distance(&Point::circle(0.1), &Point::circle(0.9)).unwrap() - 0.2).abs() < 1e-12);
        let e1 = Point::projective(&[1.0, 0.0, 0.0]).unwrap();
        let m1 = Point::projective(&[-1.0, 0.0, 0.0]).unwrap();
        let e2 = Point::projective(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(distance(&e1, &m1).unwrap(), 0.0);
        assert!((distance(&e1, &e2).unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(distance(&e1, &Point::circle(0.0)), Err(Error::SpaceMismatch));
    }

    #[test]
    fn net_examples() {
        let net = build_net(&Space::Circle, 0.25, 0).unwrap();
        let xs: Vec<f64> = net.iter().map(|p| p.coords()[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
        let t = build_net(&Space::Torus(2), 0.5, 0).unwrap();
        assert!(t.len() <= 9);
        assert!(matches!(build_net_capped(&Space::Torus(3), 0.001, 0, 1000), Err(Error::NetTooLarge { .. })));
    }

    #[test]
    fn projective_net_is_dense() {
        let net = build_net(&Space::Projective(3), 0.3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let p = Space::Projective(3).random_point(&mut rng);
            let best = net.iter().map(|q| dist(&p, q)).fold(f64::INFINITY, f64::min);
            assert!(best <= 0.3, "{best}");
        }
    }

    #[test]
    fn shift_net_depth() {
        let net = build_net(&Space::Shift(2), (-3.0f64).exp(), 0).unwrap();
        assert_eq!(net.len(), 4);
    }

    #[test]
    fn ball_net_members_and_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for space in [Space::Circle, Space::Torus(2), Space::Sphere2, Space::Projective(3)] {
            let c = space.random_point(&mut rng);
            let r = 0.2;
            let h = 0.02;
            let net = ball_net(&c, r, h, 1_000_000).unwrap();
            for p in &net {
                assert!(dist(p, &c) <= r + 1e-12);
            }
            for _ in 0..500 {
                let y = space.random_in_ball(&c, r, &mut rng);
                let best = net.iter().map(|q| dist(&y, q)).fold(f64::INFINITY, f64::min);
                assert!(best <= h + 1e-12, "{space:?} {best}");
            }
        }
    }

    #[test]
    fn interpolation_hits_fraction() {
        let a = Point::sphere([1.0, 0.0, 0.0]).unwrap();
        let b = Point::sphere([0.0, 1.0, 0.0]).unwrap();
        let m = interpolate(&a, &b, 0.25).unwrap();
        assert!((dist(&a, &m) - PI / 8.0).abs() < 1e-12);
        let p = interpolate(&Point::circle(0.95), &Point::circle(0.05), 0.5).unwrap();
        assert!(dist(&p, &Point::circle(0.0)) < 1e-12);
    }

    #[test]
    fn word_display_is_run_length() {
        let w = FiniteWord::from_values(&[1, 1, 1, 2, 1]).unwrap();
        assert_eq!(w.to_string(), "1^3 2 1");
    }
}
