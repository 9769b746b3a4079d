//! Exact coordinates: integers divided by powers of the grading parameter `m`.
//!
//! Every coordinate produced by graded subdivision of an integer grid has the
//! form `numer / m^exp`. The base `m` belongs to the ambient mesh, not to the
//! value, so arithmetic and comparisons take `m` as an argument. Values are
//! kept normalized (`exp == 0` or `m` does not divide `numer`), which makes
//! equality and hashing base-independent.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Index;

pub(crate) fn m_pow(m: u32, k: u32) -> BigInt {
    BigInt::from(m).pow(k)
}

/// An m-adic rational `numer / m^exp`, normalized.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Madic {
    numer: BigInt,
    exp: u32,
}

impl Madic {
    pub fn new(numer: BigInt, exp: u32, m: u32) -> Self {
        let mut v = Madic { numer, exp };
        v.normalize(m);
        v
    }

    pub fn from_int<T: Into<BigInt>>(i: T) -> Self {
        Madic { numer: i.into(), exp: 0 }
    }

    pub fn zero() -> Self {
        Madic { numer: BigInt::zero(), exp: 0 }
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    /// Integer values are exactly the normalized values with `exp == 0`.
    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    fn normalize(&mut self, m: u32) {
        if self.numer.is_zero() {
            self.exp = 0;
            return;
        }
        let m_big = BigInt::from(m);
        while self.exp > 0 {
            let (q, r) = self.numer.div_rem(&m_big);
            if r.is_zero() {
                self.numer = q;
                self.exp -= 1;
            } else {
                break;
            }
        }
    }

    /// Numerators of both values over the common denominator `m^max(exp)`.
    fn aligned(&self, other: &Self, m: u32) -> (BigInt, BigInt) {
        match self.exp.cmp(&other.exp) {
            Ordering::Equal => (self.numer.clone(), other.numer.clone()),
            Ordering::Less => (&self.numer * m_pow(m, other.exp - self.exp), other.numer.clone()),
            Ordering::Greater => (self.numer.clone(), &other.numer * m_pow(m, self.exp - other.exp)),
        }
    }

    pub fn add(&self, other: &Self, m: u32) -> Self {
        let (a, b) = self.aligned(other, m);
        Madic::new(a + b, self.exp.max(other.exp), m)
    }

    pub fn sub(&self, other: &Self, m: u32) -> Self {
        let (a, b) = self.aligned(other, m);
        Madic::new(a - b, self.exp.max(other.exp), m)
    }

    pub fn neg(&self) -> Self {
        Madic { numer: -&self.numer, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Madic { numer: self.numer.abs(), exp: self.exp }
    }

    pub fn scale<T: Into<BigInt>>(&self, k: T, m: u32) -> Self {
        Madic::new(&self.numer * k.into(), self.exp, m)
    }

    pub fn mul(&self, other: &Self, m: u32) -> Self {
        Madic::new(&self.numer * &other.numer, self.exp + other.exp, m)
    }

    /// Division by the grading base; exact and closed over the type.
    pub fn div_m(&self, m: u32) -> Self {
        if self.numer.is_zero() {
            return Madic::zero();
        }
        Madic::new(self.numer.clone(), self.exp + 1, m)
    }

    pub fn cmp_in(&self, other: &Self, m: u32) -> Ordering {
        if self.exp == other.exp {
            return self.numer.cmp(&other.numer);
        }
        // Small-value fast path: scale within i128, no allocation.
        if let (Some(a), Some(b)) = (self.numer.to_i64(), other.numer.to_i64()) {
            let d = self.exp.abs_diff(other.exp);
            if let Some(p) = (m as u64).checked_pow(d) {
                if p <= 1 << 52 {
                    let p = p as i128;
                    let (x, y) = if self.exp < other.exp {
                        (a as i128 * p, b as i128)
                    } else {
                        (a as i128, b as i128 * p)
                    };
                    return x.cmp(&y);
                }
            }
        }
        let (a, b) = self.aligned(other, m);
        a.cmp(&b)
    }

    pub fn min_in(self, other: Self, m: u32) -> Self {
        if self.cmp_in(&other, m) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max_in(self, other: Self, m: u32) -> Self {
        if self.cmp_in(&other, m) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Largest integer `≤ self`.
    pub fn floor(&self, m: u32) -> BigInt {
        if self.exp == 0 {
            return self.numer.clone();
        }
        self.numer.div_floor(&m_pow(m, self.exp))
    }

    /// Largest integer `≤ self / 2`.
    pub fn floor_half(&self, m: u32) -> BigInt {
        self.numer.div_floor(&(m_pow(m, self.exp) * 2))
    }

    pub fn to_f64(&self, m: u32) -> f64 {
        let n = self.numer.to_f64().unwrap_or(f64::NAN);
        n / (m as f64).powi(self.exp as i32)
    }
}

impl fmt::Debug for Madic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/m^{}", self.numer, self.exp)
        }
    }
}

/// An exact half of an m-adic value: `twice / 2`.
///
/// Midpoint distances and patch radii contain halves, which are not m-adic
/// for odd `m`; carrying the doubled value keeps every comparison exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HalfMadic {
    twice: Madic,
}

impl HalfMadic {
    pub fn from_twice(twice: Madic) -> Self {
        HalfMadic { twice }
    }

    pub fn from_madic(v: &Madic, m: u32) -> Self {
        HalfMadic { twice: v.scale(2, m) }
    }

    /// The doubled (m-adic) value.
    pub fn twice(&self) -> &Madic {
        &self.twice
    }

    pub fn is_zero(&self) -> bool {
        self.twice.is_zero()
    }

    pub fn cmp_in(&self, other: &Self, m: u32) -> Ordering {
        self.twice.cmp_in(&other.twice, m)
    }

    pub fn to_f64(&self, m: u32) -> f64 {
        self.twice.to_f64(m) / 2.0
    }
}

impl fmt::Debug for HalfMadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/2", self.twice)
    }
}

/// Coordinate axes; the subdivision direction cycles x → y → z with the level.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_level(level: u32) -> Axis {
        match level % 3 {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        }
    }

    /// The other two axes, in global order. These index the plane of a
    /// slice orthogonal to `self`.
    pub fn others(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// A point of the index domain with exact coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point3(pub [Madic; 3]);

impl Point3 {
    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Point3([Madic::from_int(x), Madic::from_int(y), Madic::from_int(z)])
    }

    pub fn cmp_in(&self, other: &Self, m: u32) -> Ordering {
        for a in Axis::ALL {
            let c = self[a].cmp_in(&other[a], m);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }

    pub fn to_f64(&self, m: u32) -> [f64; 3] {
        [self.0[0].to_f64(m), self.0[1].to_f64(m), self.0[2].to_f64(m)]
    }
}

impl Index<Axis> for Point3 {
    type Output = Madic;
    fn index(&self, a: Axis) -> &Madic {
        &self.0[a.index()]
    }
}

impl fmt::Debug for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?})", self.0[0], self.0[1], self.0[2])
    }
}
