//! Square and triangular grid refinement in the plane.
//!
//! A basis is tracked only through its Gram matrix, so the triangular grid
//! never needs an irrational coordinate. Rotations are kept as symbolic
//! degree tags.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::Rat;

type Mat2 = [[Rat; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Square,
    Triangular,
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(GridKind::Square),
            "triangular" | "hexagonal" => Ok(GridKind::Triangular),
            other => Err(Error::Parse(format!("unknown grid kind {other:?}"))),
        }
    }
}

/// Two-dimensional lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Basis2 {
    pub kind: GridKind,
    pub steps: u32,
    /// Pairwise dot products of the two basis vectors.
    pub gram: Mat2,
    /// Orientation of the first basis vector relative to the level-0 one.
    pub rotation_deg: i32,
}

impl Basis2 {
    pub fn square() -> Self {
        Basis2 {
            kind: GridKind::Square,
            steps: 0,
            gram: [[Rat::one(), Rat::zero()], [Rat::zero(), Rat::one()]],
            rotation_deg: 0,
        }
    }

    /// Unit vectors 120 degrees apart.
    pub fn triangular() -> Self {
        Basis2 {
            kind: GridKind::Triangular,
            steps: 0,
            gram: [[Rat::one(), Rat::new(-1, 2)], [Rat::new(-1, 2), Rat::one()]],
            rotation_deg: 0,
        }
    }

    /// Squared lattice constant (both basis vectors have this length).
    pub fn constant_sq(&self) -> Rat {
        self.gram[0][0].clone()
    }

    /// Squared area of the primitive cell, the Gram determinant.
    pub fn area_sq(&self) -> Rat {
        &self.gram[0][0] * &self.gram[1][1] - &self.gram[0][1] * &self.gram[1][0]
    }

    /// Cosine of the angle between the basis vectors.
    pub fn cos_angle(&self) -> Rat {
        // |e1| = |e2|, so cos = g01 / g00
        &self.gram[0][1] / &self.gram[0][0]
    }

    /// Squared length of `a e1 + b e2`.
    pub fn norm2(&self, a: &Rat, b: &Rat) -> Rat {
        a * a * &self.gram[0][0] + Rat::from_int(2) * a * b * &self.gram[0][1] + b * b * &self.gram[1][1]
    }

    /// New basis in terms of the current one, and the rotation it applies.
    fn refinement(&self) -> (Mat2, i32) {
        let h = Rat::new(1, 2);
        match self.kind {
            GridKind::Square => {
                if self.steps.is_multiple_of(2) {
                    // e1' = (e1 + e2)/2, e2' = (-e1 + e2)/2
                    ([[h.clone(), h.clone()], [-&h, h]], 45)
                } else {
                    // e1' = (e1 - e2)/2, e2' = (e1 + e2)/2
                    ([[h.clone(), -&h], [h.clone(), h]], -45)
                }
            }
            GridKind::Triangular => {
                // e1' = (2 e1 + e2)/3 points at the K point, e2' = (-e1 + e2)/3
                let t = |n| Rat::new(n, 3);
                ([[t(2), t(1)], [t(-1), t(1)]], 30)
            }
        }
    }

    /// One refinement step.
    pub fn refine(&self) -> Basis2 {
        let (t, rot) = self.refinement();
        // G' = T G T^T
        let mut gram: Mat2 = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Rat::zero();
                for k in 0..2 {
                    for l in 0..2 {
                        acc += &t[i][k] * &self.gram[k][l] * &t[j][l];
                    }
                }
                gram[i][j] = acc;
            }
        }
        let rotation_deg = match self.kind {
            GridKind::Square => self.rotation_deg + rot,
            GridKind::Triangular => (self.rotation_deg + rot).rem_euclid(60),
        };
        Basis2 { kind: self.kind, steps: self.steps + 1, gram, rotation_deg }
    }

    /// Number of refined grid points per old one, `1 / |det T|`.
    pub fn refinement_index(&self) -> Rat {
        let (t, _) = self.refinement();
        let det = &t[0][0] * &t[1][1] - &t[0][1] * &t[1][0];
        det.abs().recip()
    }
}

impl fmt::Display for Basis2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.steps,
            self.constant_sq(),
            self.area_sq(),
            self.cos_angle(),
            self.rotation_deg
        )
    }
}

fn iterate(mut b: Basis2, steps: u32) -> Basis2 {
    for _ in 0..steps {
        b = b.refine();
    }
    b
}

/// Square grid after `steps` refinements.
pub fn refine_square(steps: u32) -> Basis2 {
    iterate(Basis2::square(), steps)
}

/// Triangular grid after `steps` refinements.
pub fn refine_triangular(steps: u32) -> Basis2 {
    iterate(Basis2::triangular(), steps)
}

/// All bases from step 0 through `steps`.
pub fn recurrence_table(kind: GridKind, steps: u32) -> Vec<Basis2> {
    let mut b = match kind {
        GridKind::Square => Basis2::square(),
        GridKind::Triangular => Basis2::triangular(),
    };
    let mut out = vec![b.clone()];
    for _ in 0..steps {
        b = b.refine();
        out.push(b.clone());
    }
    out
}

/// Squared distances from the K point `(2 e1 + e2)/3` of the level-0
/// triangular grid to the three grid points around it.
pub fn k_point_gaps() -> [Rat; 3] {
    let b = Basis2::triangular();
    let t = |n| Rat::new(n, 3);
    // K - 0, K - e1, K - (e1 + e2)
    [b.norm2(&t(2), &t(1)), b.norm2(&t(-1), &t(1)), b.norm2(&t(-1), &t(-2))]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn square_examples() {
        let b0 = refine_square(0);
        assert_eq!((b0.constant_sq(), b0.area_sq()), (Rat::one(), Rat::one()));
        let b1 = refine_square(1);
        assert_eq!(b1.constant_sq(), r(1, 2));
        assert_eq!(b1.rotation_deg, 45);
        assert_eq!(b1.cos_angle(), Rat::zero());
        let b2 = refine_square(2);
        assert_eq!(b2.constant_sq(), r(1, 4));
        assert_eq!(b2.rotation_deg, 0);
    }

    #[test]
    fn square_in_cartesian_coordinates() {
        // Apply the same two steps to explicit rational vectors.
        let e = [[Rat::one(), Rat::zero()], [Rat::zero(), Rat::one()]];
        let step = |e: &[[Rat; 2]; 2], left: bool| {
            let h = r(1, 2);
            let add = |a: &[Rat; 2], b: &[Rat; 2], sa: i64, sb: i64| {
                [
                    (Rat::from_int(sa) * &a[0] + Rat::from_int(sb) * &b[0]) * &h,
                    (Rat::from_int(sa) * &a[1] + Rat::from_int(sb) * &b[1]) * &h,
                ]
            };
            if left {
                [add(&e[0], &e[1], 1, 1), add(&e[0], &e[1], -1, 1)]
            } else {
                [add(&e[0], &e[1], 1, -1), add(&e[0], &e[1], 1, 1)]
            }
        };
        let e1 = step(&e, true);
        assert_eq!(e1[0], [r(1, 2), r(1, 2)]);
        let e2 = step(&e1, false);
        assert_eq!(e2, [[r(1, 2), Rat::zero()], [Rat::zero(), r(1, 2)]]);
    }

    #[test]
    fn triangular_examples() {
        let b0 = refine_triangular(0);
        assert_eq!(b0.constant_sq(), Rat::one());
        assert_eq!(b0.cos_angle(), r(-1, 2));
        let b1 = refine_triangular(1);
        assert_eq!(b1.constant_sq(), r(1, 3));
        assert_eq!(b1.rotation_deg, 30);
        assert_eq!(b1.cos_angle(), r(-1, 2));
        assert_eq!(&b1.area_sq() / &b0.area_sq(), r(1, 9));
        assert_eq!(refine_triangular(2).rotation_deg, 0);
        assert_eq!(k_point_gaps(), [r(1, 3), r(1, 3), r(1, 3)]);
    }

    #[test]
    fn density_growth() {
        for n in 0..6u32 {
            let s = refine_square(n);
            assert_eq!(s.refinement_index(), Rat::from_int(2));
            assert_eq!(s.constant_sq(), r(1, 2).pow(n as i32));
            assert_eq!(s.area_sq().sqrt_exact().unwrap(), r(1, 2).pow(n as i32));
            let t = refine_triangular(n);
            assert_eq!(t.refinement_index(), Rat::from_int(3));
            assert_eq!(t.constant_sq(), r(1, 3).pow(n as i32));
            assert_eq!(t.refine().area_sq() / t.area_sq(), r(1, 9));
            assert_eq!(t.rotation_deg, (n as i32 * 30) % 60);
            assert_eq!(s.rotation_deg, if n % 2 == 1 { 45 } else { 0 });
        }
    }

    #[test]
    fn table_rows() {
        let rows = recurrence_table(GridKind::Triangular, 3);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].to_string(), "1\t1/3\t1/12\t-1/2\t30");
        assert!("pentagonal".parse::<GridKind>().is_err());
    }
}
