//! Exact rational scalars and 3-vectors.
//!
//! Everything geometric in this crate is computed in these types. Lengths are
//! in units of the level-0 lattice constant, which is fixed to 1.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num, den))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// Exact binary value of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rat)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.0.is_positive() {
            1
        } else if self.0.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Rat {
        Rat(num_traits::Pow::pow(&self.0, exp))
    }

    /// Square root when it is itself rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rat::from_big(n, d))
        } else {
            None
        }
    }

    /// Nearest `f64` (ties and subnormals as in `num-rational`).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Always `num/den`, even for integers.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational number: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat::from_big(n, d))
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(n)))
            }
        }
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl serde::Serialize for Vec3R {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [&self.x, &self.y, &self.z].serialize(s)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

/// Exact 3-vector. Ordered lexicographically by (x, y, z).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vec3R {
    pub x: Rat,
    pub y: Rat,
    pub z: Rat,
}

impl Vec3R {
    pub fn new(x: Rat, y: Rat, z: Rat) -> Self {
        Vec3R { x, y, z }
    }

    /// Shorthand for `(x/den, y/den, z/den)`.
    pub fn frac(x: i64, y: i64, z: i64, den: i64) -> Self {
        Vec3R::new(Rat::new(x, den), Rat::new(y, den), Rat::new(z, den))
    }

    pub fn ints(x: i64, y: i64, z: i64) -> Self {
        Vec3R::frac(x, y, z, 1)
    }

    pub fn zero() -> Self {
        Vec3R::default()
    }

    pub fn from_array(a: [Rat; 3]) -> Self {
        let [x, y, z] = a;
        Vec3R { x, y, z }
    }

    pub fn to_array(&self) -> [Rat; 3] {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }

    pub fn dot(&self, o: &Vec3R) -> Rat {
        &self.x * &o.x + &self.y * &o.y + &self.z * &o.z
    }

    pub fn cross(&self, o: &Vec3R) -> Vec3R {
        Vec3R {
            x: &self.y * &o.z - &self.z * &o.y,
            y: &self.z * &o.x - &self.x * &o.z,
            z: &self.x * &o.y - &self.y * &o.x,
        }
    }

    pub fn norm2(&self) -> Rat {
        self.dot(self)
    }

    pub fn dist2(&self, o: &Vec3R) -> Rat {
        (self - o).norm2()
    }

    pub fn scale(&self, k: &Rat) -> Vec3R {
        Vec3R {
            x: &self.x * k,
            y: &self.y * k,
            z: &self.z * k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x.to_f64(), self.y.to_f64(), self.z.to_f64()]
    }

    /// Permute components and flip signs: component `i` of the result is
    /// `signs[i] * self[perm[i]]`.
    pub fn signed_permute(&self, perm: [usize; 3], signs: [i8; 3]) -> Vec3R {
        let pick = |i: usize| {
            let c = self[perm[i]].clone();
            if signs[i] < 0 {
                -c
            } else {
                c
            }
        };
        Vec3R::new(pick(0), pick(1), pick(2))
    }
}

impl Index<usize> for Vec3R {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3R index {i} out of range"),
        }
    }
}

impl fmt::Display for Vec3R {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl fmt::Debug for Vec3R {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! vec_binop {
    ($tr:ident, $m:ident) => {
        impl<'a, 'b> $tr<&'b Vec3R> for &'a Vec3R {
            type Output = Vec3R;
            fn $m(self, o: &'b Vec3R) -> Vec3R {
                Vec3R {
                    x: (&self.x).$m(&o.x),
                    y: (&self.y).$m(&o.y),
                    z: (&self.z).$m(&o.z),
                }
            }
        }
        impl $tr<Vec3R> for Vec3R {
            type Output = Vec3R;
            fn $m(self, o: Vec3R) -> Vec3R {
                (&self).$m(&o)
            }
        }
        impl<'b> $tr<&'b Vec3R> for Vec3R {
            type Output = Vec3R;
            fn $m(self, o: &'b Vec3R) -> Vec3R {
                (&self).$m(o)
            }
        }
    };
}

vec_binop!(Add, add);
vec_binop!(Sub, sub);

impl Neg for &Vec3R {
    type Output = Vec3R;
    fn neg(self) -> Vec3R {
        Vec3R {
            x: -&self.x,
            y: -&self.y,
            z: -&self.z,
        }
    }
}

impl Mul<&Rat> for &Vec3R {
    type Output = Vec3R;
    fn mul(self, k: &Rat) -> Vec3R {
        self.scale(k)
    }
}

/// 3x3 matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat3R {
    pub rows: [Vec3R; 3],
}

impl Mat3R {
    pub fn from_rows(r0: Vec3R, r1: Vec3R, r2: Vec3R) -> Self {
        Mat3R { rows: [r0, r1, r2] }
    }

    pub fn identity() -> Self {
        Mat3R::from_rows(Vec3R::ints(1, 0, 0), Vec3R::ints(0, 1, 0), Vec3R::ints(0, 0, 1))
    }

    pub fn det(&self) -> Rat {
        triple_product(&self.rows[0], &self.rows[1], &self.rows[2])
    }

    pub fn mul_vec(&self, v: &Vec3R) -> Vec3R {
        Vec3R::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    fn column(&self, j: usize) -> Vec3R {
        Vec3R::new(
            self.rows[0][j].clone(),
            self.rows[1][j].clone(),
            self.rows[2][j].clone(),
        )
    }
}

/// `u · (v × w)`, the determinant of the matrix with rows `u, v, w`.
pub fn triple_product(u: &Vec3R, v: &Vec3R, w: &Vec3R) -> Rat {
    u.dot(&v.cross(w))
}

/// Solve `A x = b` exactly by Cramer's rule.
pub fn solve3(a: &Mat3R, b: &Vec3R) -> Result<Vec3R> {
    let det = a.det();
    if det.is_zero() {
        return Err(Error::SingularSystem);
    }
    // Cramer on the transpose: det(A with column j replaced by b).
    let cols = [a.column(0), a.column(1), a.column(2)];
    let solve_for = |j: usize| {
        let mut c = cols.clone();
        c[j] = b.clone();
        triple_product(&c[0], &c[1], &c[2]) / &det
    };
    Ok(Vec3R::new(solve_for(0), solve_for(1), solve_for(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cofactor_det(m: [[i64; 3]; 3]) -> i64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn rat_lowest_terms_and_display() {
        let r = Rat::new(10, -4);
        assert_eq!(r.numer(), &BigInt::from(-5));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r.to_string(), "-5/2");
        assert_eq!(Rat::from_int(3).to_string(), "3");
        assert_eq!(Rat::from_int(3).to_fraction_string(), "3/1");
        assert_eq!("125/1152".parse::<Rat>().unwrap(), Rat::new(125, 1152));
        assert_eq!(" -7 ".parse::<Rat>().unwrap(), Rat::from_int(-7));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn rat_sqrt_exact() {
        assert_eq!(Rat::new(25, 256).sqrt_exact(), Some(Rat::new(5, 16)));
        assert_eq!(Rat::new(1, 48).sqrt_exact(), None);
        assert_eq!(Rat::new(-1, 4).sqrt_exact(), None);
    }

    #[test]
    fn solve3_identity() {
        let b = Vec3R::frac(5, 5, 5, 24);
        assert_eq!(solve3(&Mat3R::identity(), &b).unwrap(), b);
    }

    #[test]
    fn solve3_singular() {
        let r = Vec3R::ints(1, 2, 3);
        let a = Mat3R::from_rows(r.clone(), r, Vec3R::ints(0, 0, 1));
        assert_eq!(solve3(&a, &Vec3R::ints(1, 1, 1)), Err(Error::SingularSystem));
    }

    #[test]
    fn solve3_lambda_hexagon_vertex() {
        // Bisectors between the level-3 Lambda point and three of its neighbours.
        let lam = Vec3R::frac(5, 5, 5, 24);
        let others = [
            Vec3R::frac(7, 7, 7, 24),
            Vec3R::frac(1, 0, 2, 4),
            Vec3R::frac(2, 0, 1, 4),
        ];
        let half = Rat::new(1, 2);
        let rows: Vec<Vec3R> = others.iter().map(|q| q - &lam).collect();
        let rhs: Vec<Rat> = others
            .iter()
            .zip(&rows)
            .map(|(q, n)| n.dot(&(q + &lam)) * &half)
            .collect();
        let a = Mat3R::from_rows(rows[0].clone(), rows[1].clone(), rows[2].clone());
        let b = Vec3R::from_array([rhs[0].clone(), rhs[1].clone(), rhs[2].clone()]);
        let x = solve3(&a, &b).unwrap();
        assert_eq!(x, Vec3R::new(Rat::new(95, 288), Rat::new(13, 144), Rat::new(95, 288)));
    }

    #[test]
    fn triple_product_examples() {
        let e = |i, j, k| Vec3R::ints(i, j, k);
        assert_eq!(triple_product(&e(1, 0, 0), &e(0, 1, 0), &e(0, 0, 1)), Rat::one());
        assert_eq!(triple_product(&e(1, 0, 0), &e(1, 0, 0), &e(0, 0, 1)), Rat::zero());
        // Hand expansion along the first row:
        // 1/2*(0*0 - 1/4*1/2) - 1/4*(1/2*0 - 1/4*1/4) + 0 = -1/16 + 1/64 = -3/64
        let u = Vec3R::frac(2, 1, 0, 4);
        let v = Vec3R::frac(2, 0, 1, 4);
        let w = Vec3R::frac(1, 2, 0, 4);
        assert_eq!(triple_product(&u, &v, &w), Rat::new(-3, 64));
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-50i64..50, 1i64..30).prop_map(|(n, d)| Rat::new(n, d))
    }

    fn small_vec() -> impl Strategy<Value = Vec3R> {
        (small_rat(), small_rat(), small_rat()).prop_map(|(x, y, z)| Vec3R::new(x, y, z))
    }

    proptest! {
        #[test]
        fn add_sub_roundtrip(a in small_rat(), b in small_rat()) {
            prop_assert_eq!((&a + &b) - &b, a.clone());
            let renorm: Rat = a.to_string().parse().unwrap();
            prop_assert_eq!(renorm, a);
        }

        #[test]
        fn triple_matches_cofactor(m in proptest::array::uniform3(proptest::array::uniform3(-9i64..10))) {
            let rows: Vec<Vec3R> = m.iter().map(|r| Vec3R::ints(r[0], r[1], r[2])).collect();
            prop_assert_eq!(triple_product(&rows[0], &rows[1], &rows[2]), Rat::from_int(cofactor_det(m)));
            prop_assert_eq!(
                triple_product(&rows[1], &rows[0], &rows[2]),
                -triple_product(&rows[0], &rows[1], &rows[2])
            );
        }

        #[test]
        fn solve3_substitutes_back(r0 in small_vec(), r1 in small_vec(), r2 in small_vec(), b in small_vec()) {
            let a = Mat3R::from_rows(r0, r1, r2);
            match solve3(&a, &b) {
                Ok(x) => prop_assert_eq!(a.mul_vec(&x), b),
                Err(e) => {
                    prop_assert_eq!(e, Error::SingularSystem);
                    prop_assert!(a.det().is_zero());
                }
            }
        }
    }
}
