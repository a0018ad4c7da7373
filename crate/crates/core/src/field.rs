//! Prime fields GF(p) with canonical representatives in `[0, p)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime modulus `2 <= p < 2^16`.
///
/// Products of two reduced representatives fit in a `u32`, so all
/// arithmetic below stays in machine words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec(u32);

impl FieldSpec {
    pub fn new(p: u64) -> Result<Self> {
        if !(2..(1 << 16)).contains(&p) || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec(p as u32))
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        a * b % self.0
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce(t0))
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Smallest generator of the multiplicative group.
    pub fn primitive_root(self) -> u32 {
        let p = self.0 as u64;
        if p == 2 {
            return 1;
        }
        let mut m = p - 1;
        let mut primes = Vec::new();
        let mut d = 2;
        while d * d <= m {
            if m.is_multiple_of(d) {
                primes.push(d);
                while m.is_multiple_of(d) {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            primes.push(m);
        }
        (2..self.0)
            .find(|&g| primes.iter().all(|&q| self.pow(g, (p - 1) / q) != 1))
            .expect("every prime field has a primitive root")
    }

    pub fn scalar(self, v: i64) -> Scalar {
        Scalar {
            value: self.reduce(v),
            field: self,
        }
    }
}

impl TryFrom<u32> for FieldSpec {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        FieldSpec::new(p as u64)
    }
}

impl From<FieldSpec> for u32 {
    fn from(f: FieldSpec) -> u32 {
        f.0
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar {
    value: u32,
    field: FieldSpec,
}

impl Scalar {
    pub fn new(field: FieldSpec, value: u32) -> Self {
        Scalar {
            value: value % field.p(),
            field,
        }
    }

    pub fn zero(field: FieldSpec) -> Self {
        Scalar { value: 0, field }
    }

    pub fn one(field: FieldSpec) -> Self {
        Scalar { value: 1, field }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Scalar> {
        Ok(Scalar {
            value: self.field.inv(self.value)?,
            field: self.field,
        })
    }

    fn check(self, other: Scalar) {
        assert_eq!(self.field, other.field, "scalars from different fields");
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.field.add(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.field.sub(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.field.mul(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The four field operations as a single entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Mul,
    Neg,
    Inv,
}

pub fn scalar_arith(op: ScalarOp, x: Scalar, y: Option<Scalar>) -> Result<Scalar> {
    let need = |y: Option<Scalar>| {
        y.ok_or_else(|| Error::PreconditionViolation("binary operation needs two operands".into()))
    };
    match op {
        ScalarOp::Add => Ok(x + need(y)?),
        ScalarOp::Mul => Ok(x * need(y)?),
        ScalarOp::Neg => Ok(-x),
        ScalarOp::Inv => x.inv(),
    }
}
