//! Uniform-grid spatial hash over embedded coordinates.
//!
//! Circle and torus points hash on their angle coordinates with wraparound;
//! sphere and projective points hash on their unit vectors in `[-1, 1]^d`,
//! where the chord is never longer than the arc. Projective queries visit
//! both representatives `±v`.

use crate::spaces::{dist, Point};
use std::collections::HashMap;

type Key = [i32; 4];

pub(crate) struct PointIndex<'a> {
    points: &'a [Point],
    cells: HashMap<Key, Vec<u32>>,
    width: f64,
    /// Cells per axis for wrapping coordinates; 0 for embedded vectors.
    wrap: i32,
    dim: usize,
    linear: bool,
}

fn embed(p: &Point) -> &[f64] {
    p.coords()
}

impl<'a> PointIndex<'a> {
    /// `cell` should be near the typical query radius.
    pub fn new(points: &'a [Point], cell: f64) -> Self {
        let first = points.first();
        let linear = matches!(first, None | Some(Point::Symbolic(_)));
        let dim = first.map_or(0, |p| embed(p).len()).min(4);
        let wraps = matches!(first, Some(Point::Circle(_)) | Some(Point::Torus(_)));
        let (width, wrap) = if wraps {
            let m = ((1.0 / cell.max(1e-9)).floor() as i32).clamp(1, 1 << 20);
            (1.0 / m as f64, m)
        } else {
            (cell.max(1e-9), 0)
        };
        let mut idx = PointIndex { points, cells: HashMap::new(), width, wrap, dim, linear };
        if !linear {
            for (i, p) in points.iter().enumerate() {
                let k = idx.key(embed(p));
                idx.cells.entry(k).or_default().push(i as u32);
            }
        }
        idx
    }

    fn key(&self, c: &[f64]) -> Key {
        let mut k = [0i32; 4];
        for (slot, x) in k.iter_mut().zip(c) {
            let mut q = (x / self.width).floor() as i32;
            if self.wrap > 0 {
                q = q.rem_euclid(self.wrap);
            }
            *slot = q;
        }
        k
    }

    /// Calls `f(i)` for every indexed point within distance `r` of `q`.
    pub fn within(&self, q: &Point, r: f64, mut f: impl FnMut(usize)) {
        if self.linear {
            for (i, p) in self.points.iter().enumerate() {
                if dist(p, q) <= r {
                    f(i);
                }
            }
            return;
        }
        let reps: Vec<Vec<f64>> = match q {
            Point::Projective(v) => vec![v.to_vec(), v.iter().map(|x| -x).collect()],
            _ => vec![embed(q).to_vec()],
        };
        let span = (r / self.width).ceil() as i32;
        let full = self.wrap > 0 && 2 * span + 1 >= self.wrap;
        let mut seen: Vec<u32> = Vec::new();
        for c in &reps {
            let base = self.key(c);
            let range: Vec<i32> = if full { (0..self.wrap).collect() } else { (-span..=span).collect() };
            let mut off = vec![0usize; self.dim];
            loop {
                let mut k = [0i32; 4];
                for d in 0..self.dim {
                    let v = if full { range[off[d]] } else { base[d] + range[off[d]] };
                    k[d] = if self.wrap > 0 { v.rem_euclid(self.wrap) } else { v };
                }
                if let Some(list) = self.cells.get(&k) {
                    for &i in list {
                        if dist(&self.points[i as usize], q) <= r {
                            if reps.len() > 1 {
                                seen.push(i);
                            } else {
                                f(i as usize);
                            }
                        }
                    }
                }
                let mut d = self.dim;
                let done = loop {
                    if d == 0 {
                        break true;
                    }
                    d -= 1;
                    off[d] += 1;
                    if off[d] < range.len() {
                        break false;
                    }
                    off[d] = 0;
                };
                if done {
                    break;
                }
            }
        }
        if !seen.is_empty() {
            seen.sort_unstable();
            seen.dedup();
            for i in seen {
                f(i as usize);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for space in [Space::Circle, Space::Torus(3), Space::Sphere2, Space::Projective(3), Space::Projective(4)] {
            let pts: Vec<Point> = (0..600).map(|_| space.random_point(&mut rng)).collect();
            for &cell in &[0.05, 0.3] {
                let idx = PointIndex::new(&pts, cell);
                for _ in 0..50 {
                    let q = space.random_point(&mut rng);
                    for &r in &[0.02, 0.1, 0.4] {
                        let mut got = Vec::new();
                        idx.within(&q, r, |i| got.push(i));
                        got.sort_unstable();
                        let want: Vec<usize> = (0..pts.len()).filter(|&i| dist(&pts[i], &q) <= r).collect();
                        assert_eq!(got, want, "{space:?} cell {cell} r {r}");
                    }
                }
            }
        }
    }
}
