//! Shared fixtures for the benchmarks.

use skewdyn::{load_preset, GeneratorSystem, Point, Space};

pub fn preset_system(name: &str) -> GeneratorSystem {
    load_preset(name).and_then(|p| p.semigroup().cloned()).expect("semigroup preset")
}

/// A deterministic stratified sample of `m × m` torus points.
pub fn torus_grid(m: usize) -> Vec<Point> {
    let h = 1.0 / m as f64;
    (0..m * m).map(|k| Point::torus(&[((k / m) as f64 + 0.37) * h, ((k % m) as f64 + 0.61) * h])).collect()
}

pub fn circle_grid(m: usize) -> Vec<Point> {
    (0..m).map(|k| Point::circle((k as f64 + 0.5) / m as f64)).collect()
}

pub fn space_of(points: &[Point]) -> Space {
    Space::of(&points[0])
}
