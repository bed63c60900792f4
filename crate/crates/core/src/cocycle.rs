//! Locally constant SL(d, ℝ) cocycles over the full shift.
//!
//! The matrix seen at time `j` is `A_{ω_j}`, so `A^{(n)}(ω) = A_{ω_{n-1}} ⋯ A_{ω_0}`.

use crate::error::{Error, Result};
use crate::hitting::{all_symbols, certify_frequent_hitting_with, HittingOptions, HittingOutcome, Search};
use crate::irregular::{BirkhoffTrace, Checkpoint};
use crate::semigroup::{Generator, GeneratorSystem};
use crate::spaces::{FiniteWord, Point, Space, Symbol, WordStream};
use nalgebra::{Complex, DMatrix, DVector};
use std::f64::consts::PI;

const SL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    d: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl Cocycle {
    /// Audits `|det A_i| = 1` within 1e-9.
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = matrices.first().map(|m| m.nrows()).ok_or(Error::Invalid("a cocycle needs a matrix".into()))?;
        if d < 1 || matrices.len() > 255 {
            return Err(Error::Invalid("need 1..=255 matrices of size at least 1".into()));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Invalid(format!("matrix {} is not {d}x{d}", i + 1)));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("matrix {} has non-finite entries", i + 1)));
            }
            let det = m.determinant();
            if (det.abs() - 1.0).abs() > SL_TOL {
                return Err(Error::NotSpecialLinear { index: i + 1, det });
            }
        }
        Ok(Cocycle { d, matrices })
    }

    pub fn constant(m: DMatrix<f64>) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn identity(d: usize) -> Self {
        Cocycle { d, matrices: vec![DMatrix::identity(d, d)] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kappa(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, s: Symbol) -> &DMatrix<f64> {
        &self.matrices[s.index()]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// `A_w = A_{w_{p-1}} ⋯ A_{w_0}`; only for short words.
    pub fn word_product(&self, w: &FiniteWord) -> Result<DMatrix<f64>> {
        w.check(self.kappa())?;
        let mut m = DMatrix::identity(self.d, self.d);
        for s in w.symbols() {
            m = self.matrix(*s) * m;
        }
        Ok(m)
    }

    /// Parses `d κ` followed by κ row-major `d×d` matrices; `#` starts a comment,
    /// commas and semicolons separate like whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nums = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',' || c == ';').filter(|t| !t.is_empty()) {
                nums.push(tok.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {tok}")))?);
            }
        }
        if nums.len() < 2 {
            return Err(Error::Parse("expected `d kappa` header".into()));
        }
        let (d, k) = (nums[0], nums[1]);
        if d.fract() != 0.0 || k.fract() != 0.0 || d < 1.0 || k < 1.0 {
            return Err(Error::Parse("d and kappa must be positive integers".into()));
        }
        let (d, k) = (d as usize, k as usize);
        if nums.len() != 2 + k * d * d {
            return Err(Error::Parse(format!("expected {} matrix entries, found {}", k * d * d, nums.len() - 2)));
        }
        let matrices =
            (0..k).map(|i| DMatrix::from_row_slice(d, d, &nums[2 + i * d * d..2 + (i + 1) * d * d])).collect();
        Self::new(matrices)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.d, self.kappa());
        for m in &self.matrices {
            for i in 0..self.d {
                let row: Vec<String> = (0..self.d).map(|j| format!("{:.17e}", m[(i, j)])).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }

    /// The projective actions `P_{A_i}` on `𝐏ℝ^d` as a generator system.
    pub fn projectivized(&self) -> Result<GeneratorSystem> {
        if self.d < 2 {
            return Err(Error::Invalid("projective space needs d >= 2".into()));
        }
        let gens = self.matrices.iter().map(|m| Generator::linear(m.clone())).collect::<Result<Vec<_>>>()?;
        GeneratorSystem::new(Space::Projective(self.d), gens)
    }
}

/// `max_i ‖A_i‖·‖A_i^{-1}‖`, the Lipschitz bound of the projective actions.
pub fn projective_lipschitz(c: &Cocycle) -> f64 {
    c.matrices
        .iter()
        .map(|m| {
            let sv = m.clone().svd(false, false).singular_values;
            let mx = sv.iter().cloned().fold(0.0, f64::max);
            let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            mx / mn
        })
        .fold(1.0, f64::max)
}

fn largest_singular(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// `(1/n) log ‖A^{(n)}(ω)‖`, with the running product renormalized every step.
pub fn product_log_norm(c: &Cocycle, omega: &WordStream, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let word = omega.take(n);
    word.check(c.kappa())?;
    let mut m = DMatrix::identity(c.d, c.d);
    let mut acc = 0.0;
    for s in word.symbols() {
        m = c.matrix(*s) * m;
        let f = m.norm();
        m /= f;
        acc += f.ln();
    }
    Ok((acc + largest_singular(&m).ln()) / n as f64)
}

/// Lyapunov spectrum estimate at time `n` from QR re-orthonormalization, sorted descending.
pub fn lyapunov_spectrum(c: &Cocycle, omega: &WordStream, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let word = omega.take(n);
    word.check(c.kappa())?;
    let mut q = DMatrix::identity(c.d, c.d);
    let mut acc = vec![0.0; c.d];
    for s in word.symbols() {
        let qr = (c.matrix(*s) * &q).qr();
        let r = qr.r();
        for (i, a) in acc.iter_mut().enumerate() {
            *a += r[(i, i)].abs().ln();
        }
        q = qr.q();
    }
    let mut out: Vec<f64> = acc.into_iter().map(|a| a / n as f64).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Running averages of `log ‖A_{ω_j} v_j‖` along the normalized orbit of `v`.
pub fn directional_exponent_trace(c: &Cocycle, omega: &WordStream, v: &[f64], n: usize) -> Result<BirkhoffTrace> {
    let mut u = unit(v, c.d)?;
    let word = omega.take(n);
    word.check(c.kappa())?;
    let mut acc = 0.0;
    let mut averages = Vec::with_capacity(n);
    for (j, s) in word.symbols().iter().enumerate() {
        let w = c.matrix(*s) * &u;
        let r = w.norm();
        acc += r.ln();
        u = w / r;
        averages.push(acc / (j + 1) as f64);
    }
    Ok(BirkhoffTrace { averages })
}

fn unit(v: &[f64], d: usize) -> Result<DVector<f64>> {
    if v.len() != d {
        return Err(Error::Invalid(format!("vector has {} entries, expected {d}", v.len())));
    }
    let u = DVector::from_column_slice(v);
    let r = u.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(u / r)
}

/// `[M v / ‖M v‖]`.
pub fn projective_step(m: &DMatrix<f64>, p: &Point) -> Result<Point> {
    let Point::Projective(v) = p else { return Err(Error::SpaceMismatch) };
    if m.nrows() != v.len() || m.ncols() != v.len() {
        return Err(Error::SpaceMismatch);
    }
    let w = m * DVector::from_column_slice(v);
    Point::projective(w.as_slice())
}

/// Orthonormal basis of the column span.
fn orthonormal(b: &DMatrix<f64>) -> DMatrix<f64> {
    b.clone().qr().q().columns(0, b.ncols()).into_owned()
}

/// Smallest `k ≤ k_max` with `‖A_w|_E‖ / m(A_w|_F) < 1/2` for every word of length `k`,
/// from exact block norms in orthonormal bases of `E` and `F`.
pub fn domination_test(c: &Cocycle, e: &DMatrix<f64>, f: &DMatrix<f64>, k_max: usize) -> Result<usize> {
    let d = c.d;
    if e.nrows() != d || f.nrows() != d || e.ncols() + f.ncols() != d || e.ncols() == 0 || f.ncols() == 0 {
        return Err(Error::Invalid("E and F must be complementary subspaces".into()));
    }
    let (qe, qf) = (orthonormal(e), orthonormal(f));
    let mut basis = DMatrix::zeros(d, d);
    basis.columns_mut(0, qe.ncols()).copy_from(&qe);
    basis.columns_mut(qe.ncols(), qf.ncols()).copy_from(&qf);
    if basis.determinant().abs() < 1e-12 {
        return Err(Error::Invalid("E and F are not complementary".into()));
    }
    // invariance: A_i maps each subspace into itself
    let restrict = |q: &DMatrix<f64>, m: &DMatrix<f64>| -> (DMatrix<f64>, f64) {
        let img = m * q;
        let block = q.transpose() * &img;
        let residual = (&img - q * &block).norm() / img.norm().max(1e-300);
        (block, residual)
    };
    let mut be = Vec::new();
    let mut bf = Vec::new();
    for (i, m) in c.matrices.iter().enumerate() {
        let (a, ra) = restrict(&qe, m);
        let (b, rb) = restrict(&qf, m);
        let residual = ra.max(rb);
        if residual > 1e-9 {
            return Err(Error::NotInvariant { generator: i + 1, residual });
        }
        be.push(a);
        bf.push(b);
    }
    let kappa = c.kappa();
    // level-by-level products over all words
    let mut level: Vec<(DMatrix<f64>, DMatrix<f64>)> =
        vec![(DMatrix::identity(qe.ncols(), qe.ncols()), DMatrix::identity(qf.ncols(), qf.ncols()))];
    for k in 1..=k_max {
        if level.len().saturating_mul(kappa) > 1 << 22 {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * kappa);
        for (pe, pf) in &level {
            for i in 0..kappa {
                next.push((&be[i] * pe, &bf[i] * pf));
            }
        }
        let all = next.iter().all(|(pe, pf)| {
            let sv_e = largest_singular(pe);
            let sv_f = pf.clone().svd(false, false).singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
            sv_e / sv_f < 0.5
        });
        if all {
            return Ok(k);
        }
        level = next;
    }
    Err(Error::NotDominated { k_max })
}

/// Unstable/stable cones of a hyperbolic matrix in real-Jordan coordinates.
///
/// Coordinates are grouped into blocks of size 1 (real eigenvalues) or 2
/// (rotation-scaling blocks of complex pairs); each block scales its
/// Euclidean norm by exactly `|λ|`. The adapted norm is the max over blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePair {
    /// Columns: adapted basis, unstable blocks first.
    pub basis: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub theta: f64,
    pub zeta: f64,
    pub dim_plus: usize,
    pub dim_minus: usize,
    /// `(start, size, |λ|)` per block, in basis order.
    pub blocks: Vec<(usize, usize, f64)>,
}

impl ConePair {
    pub fn adapted(&self, v: &[f64]) -> DVector<f64> {
        &self.inverse * DVector::from_column_slice(v)
    }

    fn part_norm(&self, a: &DVector<f64>, plus: bool) -> f64 {
        self.blocks
            .iter()
            .filter(|(s, _, _)| (*s < self.dim_plus) == plus)
            .map(|&(s, n, _)| a.rows(s, n).norm())
            .fold(0.0, f64::max)
    }

    /// `(‖w_+‖, ‖w_-‖)` in adapted coordinates.
    pub fn split_norms(&self, v: &[f64]) -> (f64, f64) {
        let a = self.adapted(v);
        (self.part_norm(&a, true), self.part_norm(&a, false))
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        let (p, m) = self.split_norms(v);
        p.max(m)
    }

    pub fn in_plus(&self, v: &[f64]) -> bool {
        let (p, m) = self.split_norms(v);
        m <= self.zeta * p
    }

    pub fn in_minus(&self, v: &[f64]) -> bool {
        let (p, m) = self.split_norms(v);
        p <= self.zeta * m
    }

    /// Largest block modulus on `E^+`.
    pub fn max_expansion(&self) -> f64 {
        self.blocks.iter().filter(|b| b.0 < self.dim_plus).map(|b| b.2).fold(0.0, f64::max)
    }
}

/// `(E, F)` spanned by the real eigenvectors of `m`: `F` takes the `f_dim`
/// directions of largest modulus, `E` the rest.
pub fn eigen_split(m: &DMatrix<f64>, f_dim: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = m.nrows();
    if m.ncols() != d || f_dim == 0 || f_dim >= d {
        return Err(Error::Invalid(format!("need a square matrix and 0 < f_dim < {d}")));
    }
    let scale = m.norm().max(1.0);
    let mut eig: Vec<f64> = Vec::with_capacity(d);
    for z in m.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::Invalid("complex eigenvalues: pass E and F explicitly".into()));
        }
        eig.push(z.re);
    }
    eig.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut i = 0;
    while i < d {
        let mut j = i + 1;
        while j < d && (eig[j] - eig[i]).abs() <= 1e-9 * scale {
            j += 1;
        }
        let null =
            real_null(m, eig[i], j - i).ok_or_else(|| Error::Invalid(format!("eigenvalue {} is defective", eig[i])))?;
        cols.extend(null.column_iter().map(|c| c.into_owned()));
        i = j;
    }
    let f = DMatrix::from_columns(&cols[..f_dim]);
    let e = DMatrix::from_columns(&cols[f_dim..]);
    Ok((e, f))
}

/// Sampled check of the cone properties under the adapted norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCheck {
    pub samples: usize,
    pub n_max: usize,
    /// `M C⁺ ⊆ C⁺` with boundary vectors mapped strictly inside.
    pub plus_invariant: bool,
    /// `M^{-1} C⁻ ⊆ C⁻` with boundary vectors mapped strictly inside.
    pub minus_invariant: bool,
    /// `‖M^n w‖ ≥ θ^{-n} ‖w‖` on `C⁺` for `n ≤ n_max`.
    pub expansion: bool,
    /// `‖M^n w‖ ≤ θ^n ‖w‖` while the orbit stays in `C⁻`.
    pub contraction: bool,
    /// `(w, n)` pairs whose orbit stayed in `C⁻`, so the contraction test applied.
    pub contraction_pairs: usize,
    /// Largest relative violation seen (0 when every check holds).
    pub worst: f64,
}

impl ConeCheck {
    pub fn passed(&self) -> bool {
        self.plus_invariant && self.minus_invariant && self.expansion && self.contraction
    }
}

/// Draws `samples` vectors of each cone (a quarter on the boundary) and
/// checks the cone properties of `m` up to `n_max` iterates. Comparisons
/// allow a relative rounding slack of 1e-9.
pub fn cone_check(m: &DMatrix<f64>, cones: &ConePair, samples: usize, n_max: usize, seed: u64) -> Result<ConeCheck> {
    use rand::{Rng, SeedableRng};
    let d = m.nrows();
    let inv = m.clone().try_inverse().ok_or(Error::Invalid("singular matrix".into()))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-9;
    let mut out = ConeCheck {
        samples,
        n_max,
        plus_invariant: true,
        minus_invariant: true,
        expansion: true,
        contraction: true,
        contraction_pairs: 0,
        worst: 0.0,
    };
    let sample = |plus: bool, rng: &mut rand_chacha::ChaCha8Rng, boundary: bool| -> DVector<f64> {
        let mut a = DVector::from_fn(d, |_, _| crate::spaces::gauss(rng));
        let (main, other): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| (i < cones.dim_plus) == plus);
        let main_norm = cones
            .blocks
            .iter()
            .filter(|b| main.contains(&b.0))
            .map(|&(s, n, _)| a.rows(s, n).norm())
            .fold(0.0, f64::max);
        let other_norm = cones
            .blocks
            .iter()
            .filter(|b| other.contains(&b.0))
            .map(|&(s, n, _)| a.rows(s, n).norm())
            .fold(0.0, f64::max);
        let ratio = if boundary { cones.zeta } else { cones.zeta * rng.random::<f64>() };
        if other_norm > 0.0 {
            for &i in &other {
                a[i] *= ratio * main_norm / other_norm;
            }
        }
        &cones.basis * a
    };
    for k in 0..samples {
        let boundary = k % 4 == 0;
        // (i) and (ii) on the unstable cone
        let w = sample(true, &mut rng, boundary);
        let w0 = cones.norm(w.as_slice());
        let mut v = w.clone();
        for n in 1..=n_max {
            v = m * v;
            let (p, q) = cones.split_norms(v.as_slice());
            if n == 1 {
                let excess = q - cones.zeta * p;
                if excess > tol * p || (boundary && excess >= 0.0) {
                    out.plus_invariant = false;
                    out.worst = out.worst.max(excess / p);
                }
            }
            let need = cones.theta.powi(-(n as i32)) * w0;
            let got = p.max(q);
            if got < need * (1.0 - tol) {
                out.expansion = false;
                out.worst = out.worst.max(1.0 - got / need);
            }
        }
        // (i) and (iii) on the stable cone
        let w = sample(false, &mut rng, boundary);
        let (p, q) = cones.split_norms((&inv * &w).as_slice());
        let excess = p - cones.zeta * q;
        if excess > tol * q || (boundary && excess >= 0.0) {
            out.minus_invariant = false;
            out.worst = out.worst.max(excess / q);
        }
        let w0 = cones.norm(w.as_slice());
        let mut v = w;
        for n in 1..=n_max {
            v = m * v;
            if !cones.in_minus(v.as_slice()) {
                break;
            }
            out.contraction_pairs += 1;
            let bound = cones.theta.powi(n as i32) * w0;
            let got = cones.norm(v.as_slice());
            if got > bound * (1.0 + tol) {
                out.contraction = false;
                out.worst = out.worst.max(got / bound - 1.0);
            }
        }
    }
    Ok(out)
}

/// Real null vectors of `M − λ` (real λ) as columns.
fn real_null(m: &DMatrix<f64>, lambda: f64, count: usize) -> Option<DMatrix<f64>> {
    let d = m.nrows();
    let a = m - DMatrix::identity(d, d) * lambda;
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let scale = m.norm().max(1.0);
    if idx.iter().take(count).any(|&i| svd.singular_values[i] > 1e-7 * scale) {
        return None;
    }
    let cols: Vec<DVector<f64>> = idx.iter().take(count).map(|&i| vt.row(i).transpose()).collect();
    Some(DMatrix::from_columns(&cols))
}

/// `(x, y)` with `M x = a x − b y`, `M y = b x + a y` for `λ = a + ib`.
fn complex_pair(m: &DMatrix<f64>, a: f64, b: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let d = m.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let shifted = m - &id * a;
    let mut big = DMatrix::zeros(2 * d, 2 * d);
    big.view_mut((0, 0), (d, d)).copy_from(&shifted);
    big.view_mut((0, d), (d, d)).copy_from(&(&id * b));
    big.view_mut((d, 0), (d, d)).copy_from(&(&id * -b));
    big.view_mut((d, d), (d, d)).copy_from(&shifted);
    let svd = big.svd(false, true);
    let vt = svd.v_t?;
    let i = (0..2 * d).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))?;
    if svd.singular_values[i] > 1e-7 * m.norm().max(1.0) {
        return None;
    }
    let z = vt.row(i).transpose();
    Some((z.rows(0, d).into_owned(), z.rows(d, d).into_owned()))
}

/// Cones for a hyperbolic `M` with `stable_dim` contracting directions;
/// `θ = max(max_{E⁻}|λ|, 1 / min_{E⁺}|λ|)`, `ζ = 1`.
pub fn hyperbolic_cones(m: &DMatrix<f64>, stable_dim: usize) -> Result<ConePair> {
    let d = m.nrows();
    if m.ncols() != d || d < 2 {
        return Err(Error::Invalid("cones need a square matrix of size >= 2".into()));
    }
    let eig: Vec<Complex<f64>> = m.complex_eigenvalues().iter().cloned().collect();
    if eig.iter().any(|z| (z.norm() - 1.0).abs() < 1e-6) {
        return Err(Error::NotHyperbolic("an eigenvalue has modulus 1".into()));
    }
    let stable = eig.iter().filter(|z| z.norm() < 1.0).count();
    if stable != stable_dim {
        return Err(Error::NotHyperbolic(format!("{stable} contracting directions, {stable_dim} declared")));
    }
    if stable == 0 || stable == d {
        return Err(Error::NotHyperbolic("one of the bundles is trivial".into()));
    }
    // group eigenvalues: real ones by value with multiplicity, complex pairs by upper member
    let mut groups: Vec<(Complex<f64>, usize)> = Vec::new();
    for z in &eig {
        if z.im < -1e-12 {
            continue;
        }
        let z = if z.im.abs() <= 1e-12 { Complex::new(z.re, 0.0) } else { *z };
        match groups.iter_mut().find(|(g, _)| (g - z).norm() < 1e-9 * z.norm().max(1.0)) {
            Some(g) => g.1 += 1,
            None => groups.push((z, 1)),
        }
    }
    let mut cols_plus: Vec<(Vec<DVector<f64>>, f64)> = Vec::new();
    let mut cols_minus: Vec<(Vec<DVector<f64>>, f64)> = Vec::new();
    for (z, mult) in groups {
        let modulus = z.norm();
        let mut blocks = Vec::new();
        if z.im == 0.0 {
            let null = real_null(m, z.re, mult).ok_or(Error::NotHyperbolic("not diagonalizable".into()))?;
            for c in null.column_iter() {
                blocks.push((vec![c.into_owned()], modulus));
            }
        } else {
            if mult > 1 {
                return Err(Error::NotHyperbolic("repeated complex eigenvalues".into()));
            }
            let (x, y) = complex_pair(m, z.re, z.im).ok_or(Error::NotHyperbolic("no real block".into()))?;
            // the pair spans a plane; rescale so the block acts as |λ| times a rotation
            blocks.push((vec![x, y], modulus));
        }
        if modulus > 1.0 {
            cols_plus.extend(blocks);
        } else {
            cols_minus.extend(blocks);
        }
    }
    let mut columns = Vec::new();
    let mut blocks = Vec::new();
    let mut dim_plus = 0;
    for (list, plus) in [(&cols_plus, true), (&cols_minus, false)] {
        for (cols, modulus) in list {
            blocks.push((columns.len(), cols.len(), *modulus));
            columns.extend(cols.iter().cloned());
            if plus {
                dim_plus += cols.len();
            }
        }
    }
    if columns.len() != d {
        return Err(Error::NotHyperbolic("eigenvectors do not span".into()));
    }
    let basis = DMatrix::from_columns(&columns);
    let inverse = basis.clone().try_inverse().ok_or(Error::NotHyperbolic("degenerate eigenbasis".into()))?;
    let expand = blocks.iter().filter(|b| b.0 < dim_plus).map(|b| b.2).fold(f64::INFINITY, f64::min);
    let contract = blocks.iter().filter(|b| b.0 >= dim_plus).map(|b| b.2).fold(0.0, f64::max);
    Ok(ConePair {
        basis,
        inverse,
        theta: contract.max(1.0 / expand),
        zeta: 1.0,
        dim_plus,
        dim_minus: d - dim_plus,
        blocks,
    })
}

/// Runs the hitting certifier on the projectivized action with target radii
/// searched up to `ε` itself.
pub fn accessibility_certify(c: &Cocycle, eps: f64, k_max: usize, delta: f64, seed: u64) -> Result<HittingOutcome> {
    if c.d > 4 || c.d < 2 {
        return Err(Error::Invalid("accessibility certification supports 2 <= d <= 4".into()));
    }
    if eps < 0.05 {
        return Err(Error::Invalid("accessibility certification needs eps >= 0.05".into()));
    }
    let system = c.projectivized()?;
    let opts = HittingOptions { b2_max_factor: 1.0, ..Default::default() };
    certify_frequent_hitting_with(&system, eps, k_max, delta, seed, &opts)
}

/// Rotation number of the projective action of a 2×2 matrix, in turns of `𝐏ℝ¹ ≅ ℝ/πℤ`.
///
/// Matrices with real eigenvalues fix a direction and return exactly 0.
/// Otherwise the lift increment `atan2(v × Mv, v · Mv)` is continuous in `v`
/// (no eigenvalue is negative real), so it needs no unwrapping; increments
/// above `π/4` are taken along the rotation-scaling path in two halves.
pub fn rotation_number(m: &DMatrix<f64>, n_iter: usize) -> Result<f64> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::Invalid("rotation number needs a 2x2 matrix".into()));
    }
    let det = m.determinant();
    if det.abs() < 1e-300 {
        return Err(Error::Invalid("singular matrix".into()));
    }
    let tr = m.trace();
    if tr * tr >= 4.0 * det {
        return Ok(0.0);
    }
    let (a, b, cc, dd) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mut v = (1.0f64, 0.0f64);
    let mut lift = 0.0;
    let n = n_iter.max(1);
    for _ in 0..n {
        let w = (a * v.0 + b * v.1, cc * v.0 + dd * v.1);
        let step = (v.0 * w.1 - v.1 * w.0).atan2(v.0 * w.0 + v.1 * w.1);
        lift += step;
        let r = (w.0 * w.0 + w.1 * w.1).sqrt();
        v = (w.0 / r, w.1 / r);
    }
    let rho = (lift / (n as f64 * PI)).rem_euclid(1.0);
    Ok(if rho >= 1.0 { 0.0 } else { rho })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub word: FiniteWord,
    /// `log|λ_i(A_w)| / |w|`, descending.
    pub exponents: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumVerdict {
    /// Every periodic word shows the same spectrum: a rigidity candidate.
    EqualSpectra,
    /// Some pair differs: irregular directions are prevalent.
    DistinctSpectra,
}

impl std::fmt::Display for SpectrumVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpectrumVerdict::EqualSpectra => "equal-spectra",
            SpectrumVerdict::DistinctSpectra => "distinct-spectra",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub entries: Vec<SpectrumEntry>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: SpectrumVerdict,
}

pub fn periodic_spectrum(c: &Cocycle, w: &FiniteWord) -> Result<SpectrumEntry> {
    if w.is_empty() || w.len() > 30 {
        return Err(Error::Invalid("periodic words need length 1..=30".into()));
    }
    let p = c.word_product(w)?;
    let mut exponents: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm().ln() / w.len() as f64).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectrumEntry { word: w.clone(), exponents })
}

/// Spectra of several periodic words and the largest exponent difference between any two.
pub fn spectrum_report(c: &Cocycle, words: &[FiniteWord], tolerance: f64) -> Result<SpectrumReport> {
    let entries = words.iter().map(|w| periodic_spectrum(c, w)).collect::<Result<Vec<_>>>()?;
    let mut max_deviation = 0.0f64;
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            for (x, y) in a.exponents.iter().zip(&b.exponents) {
                max_deviation = max_deviation.max((x - y).abs());
            }
        }
    }
    let verdict =
        if max_deviation > tolerance { SpectrumVerdict::DistinctSpectra } else { SpectrumVerdict::EqualSpectra };
    Ok(SpectrumReport { entries, max_deviation, tolerance, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resonance {
    NonResonant,
    Resonant(i64, i64),
}

/// Scans `0 < |m| + |n| ≤ order` (with `m ≥ 0`, positive `n` first) for
/// `m θ_1 + n θ_2 ≡ 0 mod 2π` within 1e-9.
pub fn symplectic_center_check(theta1: f64, theta2: f64, order: usize) -> Resonance {
    let two_pi = 2.0 * PI;
    let close = |x: f64| {
        let r = x.rem_euclid(two_pi);
        r.min(two_pi - r) <= 1e-9
    };
    for s in 1..=order as i64 {
        for m in (0..=s).rev() {
            let r = s - m;
            let ns: &[i64] = if r == 0 {
                &[0]
            } else if m == 0 {
                &[1]
            } else {
                &[1, -1]
            };
            for &sign in ns {
                let n = sign * r;
                if close(m as f64 * theta1 + n as f64 * theta2) {
                    return Resonance::Resonant(m, n);
                }
            }
        }
    }
    Resonance::NonResonant
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionPlan {
    /// Frequency when two generators have distinct top exponents, else cones.
    Auto,
    /// Alternate long constant blocks of the generators with the largest and
    /// smallest spectral radius.
    Frequency,
    /// Steer into the unstable cone, then into a thin stable cone, of one
    /// hyperbolic generator.
    Cones,
}

#[derive(Clone, Debug)]
pub struct DirectionOptions {
    pub plan: DirectionPlan,
    pub threshold: f64,
    /// Allowed slack of checkpoint exponents beyond the block rates.
    pub tolerance: f64,
    pub n1: u64,
    pub hyperbolic: Option<Symbol>,
    pub transition_k_max: usize,
    pub beam: usize,
    pub orbit_budget: u64,
}

impl Default for DirectionOptions {
    fn default() -> Self {
        DirectionOptions {
            plan: DirectionPlan::Auto,
            threshold: 0.1,
            tolerance: 0.05,
            n1: 10,
            hyperbolic: None,
            transition_k_max: 200,
            beam: 20_000,
            orbit_budget: 50_000_000,
        }
    }
}

/// A driving word along which the exponent of `v` oscillates.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionWitness {
    pub plan: DirectionPlan,
    pub v: Vec<f64>,
    pub word: FiniteWord,
    pub blocks: Vec<u64>,
    /// Symbol repeated in each block.
    pub block_symbols: Vec<Symbol>,
    /// Word preceding each block (empty for the frequency plan).
    pub transitions: Vec<FiniteWord>,
    /// Rates the checkpoints approach: (high, low).
    pub rates: (f64, f64),
    pub checkpoints: Vec<Checkpoint>,
    pub certified_gap: f64,
}

impl DirectionWitness {
    pub fn word_stream(&self) -> WordStream {
        WordStream::new(self.word.clone(), crate::spaces::Tail::Constant(*self.block_symbols.last().unwrap()))
    }
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Exponent averages of `v` at the given increasing times.
fn exponents_at(c: &Cocycle, word: &FiniteWord, v: &[f64], times: &[u64]) -> Result<Vec<f64>> {
    let mut u = unit(v, c.d)?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    for (j, s) in word.symbols().iter().enumerate() {
        if next == times.len() {
            break;
        }
        let w = c.matrix(*s) * &u;
        let r = w.norm();
        acc += r.ln();
        u = w / r;
        if (j + 1) as u64 == times[next] {
            out.push(acc / (j + 1) as f64);
            next += 1;
        }
    }
    Ok(out)
}

/// A word along which `(1/m) log ‖A^{(m)}(ω) v‖` alternates between the
/// high and low rate at the block-end checkpoints.
pub fn irregular_direction(c: &Cocycle, v: &[f64], depth: usize, opts: &DirectionOptions) -> Result<DirectionWitness> {
    unit(v, c.d)?;
    if depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    let radii: Vec<f64> = c.matrices.iter().map(|m| spectral_radius(m).ln()).collect();
    let hi = (0..c.kappa()).max_by(|&i, &j| radii[i].total_cmp(&radii[j])).unwrap();
    let lo = (0..c.kappa()).min_by(|&i, &j| radii[i].total_cmp(&radii[j])).unwrap();
    let plan = match opts.plan {
        DirectionPlan::Auto if radii[hi] - radii[lo] > 2.0 * opts.tolerance => DirectionPlan::Frequency,
        DirectionPlan::Auto => DirectionPlan::Cones,
        p => p,
    };
    let multiplier = (1.0 / opts.threshold).ceil().max(1.0) as u64;
    let next_block = |k: usize, prev: u64, total: u64| (2 * prev + 1).max((k as u64).max(multiplier) * total);
    let mut blocks = vec![opts.n1.max(1)];
    let mut transitions = Vec::new();
    let mut block_symbols = Vec::new();
    let (rates, bound_hi, bound_lo);
    match plan {
        DirectionPlan::Frequency | DirectionPlan::Auto => {
            if radii[hi] - radii[lo] <= 2.0 * opts.tolerance {
                return Err(Error::Invalid("generators have no exponent contrast".into()));
            }
            let (sh, sl) = (Symbol::from_index(hi), Symbol::from_index(lo));
            let mut total = 0;
            for k in 1..=depth {
                block_symbols.push(if k % 2 == 1 { sh } else { sl });
                transitions.push(FiniteWord::empty());
                if k < depth {
                    total += blocks[k - 1];
                    let n = next_block(k, blocks[k - 1], total);
                    if total + n > opts.orbit_budget {
                        return Err(Error::DepthOverflow { level: k + 1, n: (total + n) as f64 });
                    }
                    blocks.push(n);
                }
            }
            rates = (radii[hi], radii[lo]);
            bound_hi = rates.0 - opts.tolerance;
            bound_lo = rates.1 + opts.tolerance;
        }
        DirectionPlan::Cones => {
            let kappa = match opts.hyperbolic {
                Some(s) => s,
                None => (0..c.kappa())
                    .map(Symbol::from_index)
                    .find(|s| {
                        let m = c.matrix(*s);
                        let st = m.complex_eigenvalues().iter().filter(|z| z.norm() < 1.0).count();
                        hyperbolic_cones(m, st).is_ok()
                    })
                    .ok_or(Error::NotHyperbolic("no generator is hyperbolic".into()))?,
            };
            let a = c.matrix(kappa).clone();
            let stable = a.complex_eigenvalues().iter().filter(|z| z.norm() < 1.0).count();
            let cones = hyperbolic_cones(&a, stable)?;
            let theta = cones.theta;
            let grow = cones.max_expansion();
            let system = c.projectivized()?;
            let symbols = all_symbols(&system);
            let mut p = Point::projective(v)?;
            let mut total: u64 = 0;
            for k in 1..=depth {
                let n = blocks[k - 1];
                // even blocks contract: start within (θ/Λ⁺)^n of the stable bundle
                let width = if k % 2 == 1 { cones.zeta } else { (theta / grow).powf(n as f64) };
                if width < 1e-12 {
                    return Err(Error::PrecisionExhausted { level: k, radius: width, floor: 1e-12 });
                }
                let inside = |q: &Point| {
                    let (wp, wm) = cones.split_norms(q.coords());
                    if k % 2 == 1 {
                        wm <= width * wp
                    } else {
                        wp <= width * wm
                    }
                };
                let mut search =
                    Search::new(&system, p.clone(), &symbols, (width / 8.0).min(1e-3), opts.beam, usize::MAX);
                let u = loop {
                    if let Some(node) = search.frontier.iter().find(|nd| inside(&nd.center)) {
                        break node.word.clone();
                    }
                    if search.level >= opts.transition_k_max || !search.advance(|_| true)? {
                        return Err(Error::TransitionNotFound { level: k, k_max: opts.transition_k_max });
                    }
                };
                let seg = u.concat(&FiniteWord::repeat(kappa, n as usize));
                p = system.compose_along(&seg, &p)?;
                total += seg.len() as u64;
                transitions.push(u);
                block_symbols.push(kappa);
                if k < depth {
                    let n_next = next_block(k, n, total);
                    if total + n_next > opts.orbit_budget {
                        return Err(Error::DepthOverflow { level: k + 1, n: (total + n_next) as f64 });
                    }
                    blocks.push(n_next);
                }
            }
            rates = (-theta.ln(), theta.ln());
            bound_hi = rates.0 - opts.tolerance;
            bound_lo = rates.1 + opts.tolerance;
        }
    }
    let mut word = FiniteWord::empty();
    let mut times = Vec::new();
    for k in 0..depth {
        word.append(&transitions[k]);
        word.append(&FiniteWord::repeat(block_symbols[k], blocks[k] as usize));
        if k >= 1 {
            times.push(word.len() as u64);
        }
    }
    let values = exponents_at(c, &word, v, &times)?;
    let mut checkpoints = Vec::new();
    for (i, (&time, &average)) in times.iter().zip(&values).enumerate() {
        let high = (i + 2) % 2 == 1;
        let cp = if high {
            Checkpoint { time, average, bound: bound_hi, upper: false }
        } else {
            Checkpoint { time, average, bound: bound_lo, upper: true }
        };
        if !cp.holds() {
            return Err(Error::CheckpointBound { checkpoint: i + 1, average, bound: cp.bound });
        }
        checkpoints.push(cp);
    }
    Ok(DirectionWitness {
        plan,
        v: v.to_vec(),
        word,
        blocks,
        block_symbols,
        transitions,
        rates,
        checkpoints,
        certified_gap: bound_hi - bound_lo,
    })
}

/// Recomputes the witness checkpoints from scratch; returns the largest deviation.
pub fn audit_direction(c: &Cocycle, w: &DirectionWitness) -> Result<f64> {
    let times: Vec<u64> = w.checkpoints.iter().map(|p| p.time).collect();
    let values = exponents_at(c, &w.word, &w.v, &times)?;
    if values.len() != times.len() {
        return Ok(f64::INFINITY);
    }
    Ok(values.iter().zip(&w.checkpoints).map(|(a, p)| (a - p.average).abs()).fold(0.0, f64::max))
}
