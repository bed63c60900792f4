//! Finitely generated semigroup actions by bi-Lipschitz homeomorphisms.

use crate::error::{Error, Result};
use crate::spaces::{ball_net, dist, Ball, FiniteWord, Point, Space, Symbol, WordStream};
use nalgebra::{DMatrix, Matrix2, Matrix3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type MapFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// Which closed form a generator has; lets searches use exact shortcuts.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    /// Translation of the circle or torus.
    Translation(Vec<f64>),
    /// Integer matrix acting on the torus.
    Toral(DMatrix<f64>),
    /// Linear map acting on a sphere or projective space (rows act on column vectors).
    Linear(DMatrix<f64>),
    /// `x ↦ x − a·sin(2π m x)` on the circle.
    SineCircle {
        a: f64,
        m: u32,
    },
    Identity,
    Custom,
}

/// A bi-Lipschitz homeomorphism together with its inverse and declared bounds.
#[derive(Clone)]
pub struct Generator {
    forward: MapFn,
    inverse: MapFn,
    pub lip_fwd: f64,
    pub lip_inv: f64,
    pub label: Symbol,
    pub kind: GeneratorKind,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("lip_fwd", &self.lip_fwd)
            .field("lip_inv", &self.lip_inv)
            .finish()
    }
}

fn spectral_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (mx, mn)
}

fn apply_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    (0..n).map(|i| (0..v.len()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Solve `x − a sin(2π m x) = y` for the monotone lift; safeguarded Newton.
fn sine_inverse(a: f64, m: u32, y: f64) -> f64 {
    let w = 2.0 * PI * m as f64;
    let g = |x: f64| x - a * (w * x).sin() - y;
    let (mut lo, mut hi) = (y - a.abs() - 1e-12, y + a.abs() + 1e-12);
    let mut x = y;
    for _ in 0..100 {
        let gx = g(x);
        if gx.abs() < 1e-16 {
            break;
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = 1.0 - a * w * (w * x).cos();
        let mut nx = x - gx / d;
        if !(nx > lo && nx < hi) {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() < 1e-17 {
            x = nx;
            break;
        }
        x = nx;
    }
    x
}

impl Generator {
    /// A user map with declared Lipschitz bounds (both are clamped to ≥ 1).
    pub fn custom(
        forward: impl Fn(&Point) -> Point + Send + Sync + 'static,
        inverse: impl Fn(&Point) -> Point + Send + Sync + 'static,
        lip_fwd: f64,
        lip_inv: f64,
    ) -> Self {
        Generator {
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            lip_fwd: lip_fwd.max(1.0),
            lip_inv: lip_inv.max(1.0),
            label: Symbol::from_index(0),
            kind: GeneratorKind::Custom,
        }
    }

    pub fn identity() -> Self {
        let mut g = Self::custom(|p| p.clone(), |p| p.clone(), 1.0, 1.0);
        g.kind = GeneratorKind::Identity;
        g
    }

    /// Rotation of the circle by `alpha` turns.
    pub fn rotation(alpha: f64) -> Self {
        Self::translation(&[alpha])
    }

    /// Translation of the circle (one coordinate) or torus by `v`.
    pub fn translation(v: &[f64]) -> Self {
        let fwd = v.to_vec();
        let inv: Vec<f64> = v.iter().map(|x| -x).collect();
        let shift = |p: &Point, t: &[f64]| match p {
            Point::Circle(x) => Point::circle(x + t[0]),
            Point::Torus(c) => {
                let v: Vec<f64> = c.iter().zip(t).map(|(a, b)| a + b).collect();
                Point::torus(&v)
            }
            other => other.clone(),
        };
        let mut g = Self::custom(move |p| shift(p, &fwd), move |p| shift(p, &inv), 1.0, 1.0);
        g.kind = GeneratorKind::Translation(v.to_vec());
        g
    }

    /// Toral automorphism `x ↦ Ax mod ℤ^d` for an integer matrix with `|det| = 1`.
    pub fn toral(a: DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d {
            return Err(Error::Invalid("toral matrix must be square".into()));
        }
        if a.iter().any(|x| (x - x.round()).abs() > 1e-12) {
            return Err(Error::Invalid("toral matrix must have integer entries".into()));
        }
        let det = a.determinant();
        if (det.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::NotSpecialLinear { index: 0, det });
        }
        let inv = a.clone().try_inverse().ok_or(Error::Invalid("singular matrix".into()))?;
        let inv = inv.map(|x| x.round());
        // the max-arc metric is induced by the sup norm
        let row_sum =
            |m: &DMatrix<f64>| (0..d).map(|i| (0..d).map(|j| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
        let (lf, li) = (row_sum(&a), row_sum(&inv));
        let (fa, ia) = (a.clone(), inv.clone());
        let act = |m: &DMatrix<f64>, p: &Point| match p {
            Point::Torus(c) => Point::torus(&apply_vec(m, c)),
            Point::Circle(x) => Point::circle(m[(0, 0)] * x),
            other => other.clone(),
        };
        let mut g = Self::custom(move |p| act(&fa, p), move |p| act(&ia, p), lf, li);
        g.kind = GeneratorKind::Toral(a);
        Ok(g)
    }

    /// The matrix `[[2,1],[1,1]]` on the 2-torus.
    pub fn cat_map() -> Self {
        Self::toral(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])).expect("unimodular")
    }

    /// Circle map `x ↦ x − a·sin(2π m x)`; a homeomorphism when `2π m |a| < 1`.
    pub fn sine_circle(a: f64, m: u32) -> Result<Self> {
        let k = 2.0 * PI * m as f64 * a.abs();
        if k >= 1.0 || m == 0 {
            return Err(Error::Invalid(format!("x - {a} sin(2π{m}x) is not a homeomorphism")));
        }
        let w = 2.0 * PI * m as f64;
        let fwd = move |p: &Point| match p {
            Point::Circle(x) => Point::circle(x - a * (w * x).sin()),
            other => other.clone(),
        };
        let inv = move |p: &Point| match p {
            Point::Circle(y) => Point::circle(sine_inverse(a, m, *y)),
            other => other.clone(),
        };
        let mut g = Self::custom(fwd, inv, 1.0 + k, 1.0 / (1.0 - k));
        g.kind = GeneratorKind::SineCircle { a, m };
        Ok(g)
    }

    /// Linear action on the sphere (orthogonal matrices) or on projective space
    /// (any invertible matrix, Lipschitz bound = condition number).
    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || d < 2 {
            return Err(Error::Invalid("linear generator needs a square matrix, d >= 2".into()));
        }
        let inv = a.clone().try_inverse().ok_or(Error::Invalid("singular matrix".into()))?;
        let (smax, smin) = spectral_extremes(&a);
        let cond = if (smax - smin).abs() < 1e-12 * smax { 1.0 } else { smax / smin };
        let (fa, ia) = (a.clone(), inv);
        let act = |m: &DMatrix<f64>, p: &Point| match p {
            Point::Sphere2(v) => {
                let w = apply_vec(m, v);
                Point::sphere([w[0], w[1], w[2]]).expect("invertible map keeps vectors nonzero")
            }
            Point::Projective(v) => Point::projective(&apply_vec(m, v)).expect("invertible map keeps vectors nonzero"),
            other => other.clone(),
        };
        let mut g = Self::custom(move |p| act(&fa, p), move |p| act(&ia, p), cond, cond);
        g.kind = GeneratorKind::Linear(a);
        Ok(g)
    }

    pub fn sphere_rotation(r: Matrix3<f64>) -> Result<Self> {
        Self::linear(DMatrix::from_iterator(3, 3, r.iter().cloned()))
    }

    pub fn projective_2x2(m: Matrix2<f64>) -> Result<Self> {
        Self::linear(DMatrix::from_iterator(2, 2, m.iter().cloned()))
    }

    #[inline]
    pub fn apply(&self, x: &Point) -> Point {
        (self.forward)(x)
    }

    #[inline]
    pub fn apply_inverse(&self, x: &Point) -> Point {
        (self.inverse)(x)
    }

    pub fn is_isometry(&self) -> bool {
        self.lip_fwd == 1.0 && self.lip_inv == 1.0
    }
}

/// κ generators acting on one phase space, with the global bound
/// `L = max(1, max_i Lip(f_i^{±1}))`.
#[derive(Clone, Debug)]
pub struct GeneratorSystem {
    space: Space,
    generators: Vec<Generator>,
    lip: f64,
}

/// Orbit `x, f_{ω_0}(x), …` with its driving word.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace {
    pub points: Vec<Point>,
    pub word: FiniteWord,
}

/// Result of sampling a system's declared properties.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub max_inverse_error: f64,
    /// Largest observed ratio `d(f x, f y) / (lip_fwd · d(x, y))` over all generators.
    pub worst_forward_ratio: f64,
    pub worst_inverse_ratio: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.max_inverse_error <= 1e-9
            && self.worst_forward_ratio <= 1.0 + 1e-9
            && self.worst_inverse_ratio <= 1.0 + 1e-9
    }
}

impl GeneratorSystem {
    pub fn new(space: Space, mut generators: Vec<Generator>) -> Result<Self> {
        if generators.is_empty() || generators.len() > 255 {
            return Err(Error::Invalid("a system needs between 1 and 255 generators".into()));
        }
        if matches!(space, Space::Shift(_)) {
            return Err(Error::Invalid("generators act on a manifold phase space".into()));
        }
        let mut lip = 1.0f64;
        for (i, g) in generators.iter_mut().enumerate() {
            g.label = Symbol::from_index(i);
            lip = lip.max(g.lip_fwd).max(g.lip_inv);
        }
        Ok(GeneratorSystem { space, generators, lip })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn kappa(&self) -> usize {
        self.generators.len()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lip
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, s: Symbol) -> &Generator {
        &self.generators[s.index()]
    }

    /// The subsystem on the listed symbols, relabelled in order.
    pub fn subsystem(&self, symbols: &[Symbol]) -> Result<GeneratorSystem> {
        let gens = symbols
            .iter()
            .map(|s| {
                self.generators
                    .get(s.index())
                    .cloned()
                    .ok_or(Error::BadSymbol { symbol: s.value(), kappa: self.kappa() })
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSystem::new(self.space.clone(), gens)
    }

    pub fn is_isometric(&self) -> bool {
        self.generators.iter().all(Generator::is_isometry)
    }

    pub fn word_is_isometric(&self, w: &FiniteWord) -> bool {
        w.symbols().iter().all(|s| self.generator(*s).is_isometry())
    }

    /// Product of per-letter forward bounds: a Lipschitz bound for `f_w`.
    pub fn word_lip_fwd(&self, w: &FiniteWord) -> f64 {
        w.symbols().iter().map(|s| self.generator(*s).lip_fwd).product()
    }

    /// Product of per-letter inverse bounds: a Lipschitz bound for `f_w^{-1}`.
    pub fn word_lip_inv(&self, w: &FiniteWord) -> f64 {
        w.symbols().iter().map(|s| self.generator(*s).lip_inv).product()
    }

    /// `f_w(x)` with the first letter acting first.
    pub fn compose_along(&self, w: &FiniteWord, x: &Point) -> Result<Point> {
        w.check(self.kappa())?;
        Ok(self.apply_word(w, x))
    }

    pub(crate) fn apply_word(&self, w: &FiniteWord, x: &Point) -> Point {
        let mut p = x.clone();
        for s in w.symbols() {
            p = self.generator(*s).apply(&p);
        }
        p
    }

    /// `f_w^{-1}(y)`: inverses applied from the last letter back.
    pub fn pullback(&self, w: &FiniteWord, y: &Point) -> Result<Point> {
        w.check(self.kappa())?;
        Ok(self.apply_word_inverse(w, y))
    }

    pub(crate) fn apply_word_inverse(&self, w: &FiniteWord, y: &Point) -> Point {
        let mut p = y.clone();
        for s in w.symbols().iter().rev() {
            p = self.generator(*s).apply_inverse(&p);
        }
        p
    }

    /// The fibre projection of `F^j(ω, x)` for `j = 0..=n`.
    pub fn skew_orbit(&self, omega: &WordStream, x: &Point, n: usize) -> Result<OrbitTrace> {
        let word = omega.take(n);
        word.check(self.kappa())?;
        let mut points = Vec::with_capacity(n + 1);
        points.push(x.clone());
        for s in word.symbols() {
            let next = self.generator(*s).apply(points.last().unwrap());
            points.push(next);
        }
        Ok(OrbitTrace { points, word })
    }

    /// Whether `d(f_w^j y, f_w^j c) < ε` for every prefix length `0 ≤ j ≤ |w|`.
    pub fn dyn_ball_member(&self, w: &FiniteWord, center: &Point, eps: f64, y: &Point) -> bool {
        let (mut a, mut b) = (center.clone(), y.clone());
        if !(dist(&a, &b) < eps) {
            return false;
        }
        for s in w.symbols() {
            let g = self.generator(*s);
            a = g.apply(&a);
            b = g.apply(&b);
            if !(dist(&a, &b) < eps) {
                return false;
            }
        }
        true
    }

    /// Certified radius `r` with `B(f_w(c), r) ⊆ f_w(B)`.
    ///
    /// A candidate `r` passes when every point of a δ-net of `B(f_w(c), r)`
    /// pulls back into `B(c, |B| − Lip(f_w^{-1})·δ)`; the largest passing value
    /// is found by bisection above the analytic bound `|B| / Lip(f_w^{-1})`.
    pub fn image_inner_radius(&self, w: &FiniteWord, ball: &Ball, delta: f64) -> Result<f64> {
        w.check(self.kappa())?;
        let lip_inv = self.word_lip_inv(w);
        let margin = lip_inv * delta;
        if margin > ball.radius {
            return Err(Error::ResolutionTooCoarse { margin, radius: ball.radius });
        }
        if self.word_is_isometric(w) {
            return Ok(ball.radius - delta);
        }
        let image = self.apply_word(w, &ball.center);
        let analytic = ball.radius / lip_inv;
        let budget = ball.radius - margin;
        let passes = |r: f64| -> bool {
            match ball_net(&image, r, delta, 2_000_000) {
                Ok(net) => net.par_iter().all(|y| dist(&self.apply_word_inverse(w, y), &ball.center) <= budget),
                Err(_) => false,
            }
        };
        let mut lo = analytic.max(0.0);
        let mut hi = (ball.radius * self.word_lip_fwd(w)).min(self.space.diameter()).max(lo);
        if hi > lo && passes(hi) {
            return Ok(hi);
        }
        for _ in 0..40 {
            if hi - lo <= 1e-3 * delta.min(lo.max(delta)) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if passes(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Samples the declared inverse and Lipschitz properties.
    ///
    /// `samples` points check `f^{-1}∘f = id`; `10·samples` pairs (half of them
    /// at distance below 0.01) check both Lipschitz bounds.
    pub fn audit(&self, samples: usize, seed: u64) -> AuditReport {
        let space = &self.space;
        let mut inv_err = 0.0f64;
        let mut fwd_ratio = 0.0f64;
        let mut inv_ratio = 0.0f64;
        for (gi, g) in self.generators.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (gi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for _ in 0..samples {
                let x = space.random_point(&mut rng);
                inv_err = inv_err.max(dist(&g.apply_inverse(&g.apply(&x)), &x));
            }
            for k in 0..10 * samples {
                let x = space.random_point(&mut rng);
                let y =
                    if k % 2 == 0 { space.random_in_ball(&x, 0.01, &mut rng) } else { space.random_point(&mut rng) };
                let d = dist(&x, &y);
                if d < 1e-12 {
                    continue;
                }
                fwd_ratio = fwd_ratio.max(dist(&g.apply(&x), &g.apply(&y)) / (g.lip_fwd * d) - 1e-12 / d);
                inv_ratio =
                    inv_ratio.max(dist(&g.apply_inverse(&x), &g.apply_inverse(&y)) / (g.lip_inv * d) - 1e-12 / d);
            }
        }
        AuditReport { max_inverse_error: inv_err, worst_forward_ratio: fwd_ratio, worst_inverse_ratio: inv_ratio }
    }
}

/// Golden mean rotation number `(√5 − 1)/2`.
pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Tail;

    fn rot_system() -> GeneratorSystem {
        GeneratorSystem::new(Space::Circle, vec![Generator::rotation(golden())]).unwrap()
    }

    #[test]
    fn rotation_composition() {
        let s = rot_system();
        let w = FiniteWord::repeat(Symbol::new(1).unwrap(), 7);
        let y = s.compose_along(&w, &Point::circle(0.1)).unwrap();
        let expect = (0.1 + 7.0 * golden()).rem_euclid(1.0);
        assert!(dist(&y, &Point::circle(expect)) < 1e-12);
        assert_eq!(s.compose_along(&FiniteWord::empty(), &Point::circle(0.3)).unwrap(), Point::circle(0.3));
    }

    #[test]
    fn bad_symbol_rejected() {
        let s = rot_system();
        let w = FiniteWord::from_values(&[2]).unwrap();
        assert!(matches!(s.compose_along(&w, &Point::circle(0.0)), Err(Error::BadSymbol { .. })));
    }

    #[test]
    fn sine_map_inverse_and_bounds() {
        let g = Generator::sine_circle(0.1, 1).unwrap();
        assert!((g.lip_fwd - (1.0 + 0.2 * PI)).abs() < 1e-12);
        let s = GeneratorSystem::new(Space::Circle, vec![g, Generator::rotation(golden())]).unwrap();
        let rep = s.audit(1000, 3);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn cat_map_audit_and_fixed_point() {
        let s = GeneratorSystem::new(Space::Torus(2), vec![Generator::cat_map()]).unwrap();
        assert_eq!(s.lipschitz(), 3.0);
        assert!(s.audit(500, 1).passed());
        let o = s.skew_orbit(&WordStream::constant(Symbol::new(1).unwrap()), &Point::torus(&[0.0, 0.0]), 5).unwrap();
        assert!(o.points.iter().all(|p| dist(p, &o.points[0]) == 0.0));
    }

    #[test]
    fn projective_linear_audit() {
        let a = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 0.5, 0.2, 0.0, 0.1, 0.7]);
        let s = GeneratorSystem::new(Space::Projective(3), vec![Generator::linear(a).unwrap()]).unwrap();
        assert!(s.audit(500, 9).passed());
    }

    #[test]
    fn inner_radius_of_isometry() {
        let s = rot_system();
        let b = Ball::new(Point::circle(0.2), 0.1);
        let w = FiniteWord::repeat(Symbol::new(1).unwrap(), 3);
        assert_eq!(s.image_inner_radius(&w, &b, 0.01).unwrap(), 0.1 - 0.01);
    }

    #[test]
    fn inner_radius_too_coarse() {
        let s = GeneratorSystem::new(Space::Torus(2), vec![Generator::cat_map()]).unwrap();
        let w = FiniteWord::repeat(Symbol::new(1).unwrap(), 4);
        let b = Ball::new(Point::torus(&[0.0, 0.0]), 0.1);
        assert!(matches!(s.image_inner_radius(&w, &b, 0.01), Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn skew_orbit_reads_stream() {
        let s = GeneratorSystem::new(
            Space::Circle,
            vec![Generator::sine_circle(0.1, 1).unwrap(), Generator::rotation(golden())],
        )
        .unwrap();
        let om = WordStream::new(
            FiniteWord::from_values(&[1, 2]).unwrap(),
            Tail::Periodic(FiniteWord::from_values(&[1, 2]).unwrap()),
        );
        let o = s.skew_orbit(&om, &Point::circle(0.3), 6).unwrap();
        assert_eq!(o.points.len(), 7);
        assert_eq!(o.word.to_string(), "1 2 1 2 1 2");
    }
}
