//! Built-in systems and cocycles.

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::semigroup::{golden, Generator, GeneratorSystem};
use crate::spaces::Space;
use nalgebra::{DMatrix, Matrix2, Matrix3};
use std::f64::consts::PI;

pub enum PresetSystem {
    Semigroup(GeneratorSystem),
    Cocycle(Cocycle),
    /// The full shift on this many symbols under the left shift.
    Shift(usize),
}

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: PresetSystem,
}

const CATALOG: &[(&str, &str)] = &[
    ("golden-rotation", "circle rotation by the golden mean"),
    ("t3-translations", "three translations of T^3 with rationally independent components"),
    ("s2-rotations", "irrational rotations of S^2 about the z- and x-axes"),
    ("symplectic-center", "4x4 symplectic generic center, angles 2π(√2−1) and 2π(√3−1)"),
    ("cat-map", "the automorphism [[2,1],[1,1]] of T^2"),
    ("morse-smale-rotation", "north-south map x − 0.1 sin 2πx and a golden rotation"),
    ("double-well-rotation", "golden rotation and x − 0.05 sin 4πx with attracting 0 and 1/2"),
    ("different-types-A", "SL(3) cocycle diag(−3, rotation) and diag(3, rotation)"),
    ("different-types-B", "SL(3) cocycle diag(−3, ·) and diag(−2, ·)"),
    ("irreducible-vs-accessible-A", "SL(2) cocycle: cat matrix and a small rotation"),
    ("irreducible-vs-accessible-B", "SL(2) cocycle: cat matrix and rotation·cat"),
    ("constant-hyperbolic", "constant cat-matrix cocycle"),
    ("shift-2", "full shift on two symbols"),
    ("projective-rotation", "rotation by π times the golden mean acting on P^1"),
    ("identity", "constant identity cocycle on R^2"),
];

pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    CATALOG.to_vec()
}

/// The small irrational angle of the cocycle examples.
pub fn small_angle() -> f64 {
    2.0 * PI * (2f64.sqrt() - 1.0) / 10.0
}

pub fn rotation2(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

pub fn cat_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])
}

/// `diag(λ, B)` with `B = [[1,1],[1,0]]/√|λ|`, so that the determinant is 1.
fn expanding_block(lambda: f64) -> DMatrix<f64> {
    let s = 1.0 / lambda.abs().sqrt();
    DMatrix::from_row_slice(3, 3, &[lambda, 0.0, 0.0, 0.0, s, s, 0.0, s, 0.0])
}

/// `diag(3, R_θ/√3)`.
pub fn rotating_block(theta: f64) -> DMatrix<f64> {
    let s = 1.0 / 3f64.sqrt();
    let (c, n) = (theta.cos(), theta.sin());
    DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, s * c, -s * n, 0.0, s * n, s * c])
}

pub fn different_types_a() -> Cocycle {
    Cocycle::new(vec![expanding_block(-3.0), rotating_block(small_angle())]).expect("determinant one")
}

pub fn different_types_b() -> Cocycle {
    Cocycle::new(vec![expanding_block(-3.0), expanding_block(-2.0)]).expect("determinant one")
}

/// Block form of a symplectic center with eigenvalues `e^{±iθ₁}`, `e^{±iθ₂}`.
pub fn symplectic_center(theta1: f64, theta2: f64) -> DMatrix<f64> {
    let (a, b) = (theta1.cos(), theta1.sin());
    let (c, d) = (theta2.cos(), theta2.sin());
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        a, 0.0, -b, 0.0,
        0.0, c, 0.0, -d,
        b, 0.0, a, 0.0,
        0.0, d, 0.0, c,
    ]);
    m
}

pub fn symplectic_angles() -> (f64, f64) {
    (2.0 * PI * (2f64.sqrt() - 1.0), 2.0 * PI * (3f64.sqrt() - 1.0))
}

fn axis_rotation(axis: usize, angle: f64) -> Matrix3<f64> {
    let (c, s) = (angle.cos(), angle.sin());
    match axis {
        0 => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        _ => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

fn t3_vectors() -> [[f64; 3]; 3] {
    let r = |x: f64| x.sqrt().fract();
    [[r(2.0), r(3.0), r(5.0)], [r(6.0), r(7.0), r(11.0)], [r(13.0), r(17.0), r(19.0)]]
}

pub fn load_preset(name: &str) -> Result<Preset> {
    let summary = CATALOG.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| {
        let names: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).collect();
        Error::Invalid(format!("unknown preset `{name}`; valid names: {}", names.join(", ")))
    })?;
    let name = CATALOG.iter().find(|(n, _)| *n == name).unwrap().0;
    let semi = |space: Space, gens: Vec<Generator>| GeneratorSystem::new(space, gens).map(PresetSystem::Semigroup);
    let system = match name {
        "golden-rotation" => semi(Space::Circle, vec![Generator::rotation(golden())])?,
        "t3-translations" => semi(Space::Torus(3), t3_vectors().iter().map(|v| Generator::translation(v)).collect())?,
        "s2-rotations" => semi(
            Space::Sphere2,
            vec![
                Generator::sphere_rotation(axis_rotation(2, 2.0 * PI * (2f64.sqrt() - 1.0)))?,
                Generator::sphere_rotation(axis_rotation(0, 2.0 * PI * (3f64.sqrt() - 1.0)))?,
            ],
        )?,
        "symplectic-center" => {
            let (t1, t2) = symplectic_angles();
            PresetSystem::Cocycle(Cocycle::constant(symplectic_center(t1, t2))?)
        }
        "cat-map" => semi(Space::Torus(2), vec![Generator::cat_map()])?,
        "morse-smale-rotation" => {
            semi(Space::Circle, vec![Generator::sine_circle(0.1, 1)?, Generator::rotation(golden())])?
        }
        "double-well-rotation" => {
            semi(Space::Circle, vec![Generator::rotation(golden()), Generator::sine_circle(0.05, 2)?])?
        }
        "different-types-A" => PresetSystem::Cocycle(different_types_a()),
        "different-types-B" => PresetSystem::Cocycle(different_types_b()),
        "irreducible-vs-accessible-A" => {
            PresetSystem::Cocycle(Cocycle::new(vec![cat_matrix(), rotation2(small_angle())])?)
        }
        "irreducible-vs-accessible-B" => {
            PresetSystem::Cocycle(Cocycle::new(vec![cat_matrix(), rotation2(small_angle()) * cat_matrix()])?)
        }
        "constant-hyperbolic" => PresetSystem::Cocycle(Cocycle::constant(cat_matrix())?),
        "shift-2" => PresetSystem::Shift(2),
        "projective-rotation" => {
            let t = PI * golden();
            semi(
                Space::Projective(2),
                vec![Generator::projective_2x2(Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos()))?],
            )?
        }
        "identity" => PresetSystem::Cocycle(Cocycle::identity(2)),
        _ => unreachable!(),
    };
    Ok(Preset { name, summary, system })
}

impl Preset {
    pub fn semigroup(&self) -> Result<&GeneratorSystem> {
        match &self.system {
            PresetSystem::Semigroup(s) => Ok(s),
            _ => Err(Error::Invalid(format!("preset `{}` is not a semigroup action", self.name))),
        }
    }

    pub fn cocycle(&self) -> Result<&Cocycle> {
        match &self.system {
            PresetSystem::Cocycle(c) => Ok(c),
            _ => Err(Error::Invalid(format!("preset `{}` is not a cocycle", self.name))),
        }
    }

    /// Round-trip and determinant checks appropriate to the preset's kind.
    pub fn audit(&self) -> Result<()> {
        match &self.system {
            PresetSystem::Semigroup(s) => {
                let r = s.audit(2000, 7);
                if r.passed() {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("preset `{}` failed its audit: {r:?}", self.name)))
                }
            }
            // the constructor already enforced |det| = 1
            PresetSystem::Cocycle(c) => Cocycle::new(c.matrices().to_vec()).map(|_| ()),
            PresetSystem::Shift(k) => {
                if *k >= 1 {
                    Ok(())
                } else {
                    Err(Error::Invalid("empty alphabet".into()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_loads() {
        assert!(list_presets().len() >= 10);
        for (name, _) in list_presets() {
            load_preset(name).unwrap().audit().unwrap();
        }
    }

    #[test]
    fn unknown_lists_names() {
        let Err(Error::Invalid(msg)) = load_preset("nope") else { panic!() };
        assert!(msg.contains("golden-rotation") && msg.contains("cat-map"));
    }
}
