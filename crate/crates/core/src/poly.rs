//! Univariate polynomials over GF(p), low-degree coefficient first.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::mat::Mat;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl Poly {
    /// Builds a polynomial from integer coefficients, reducing mod p and
    /// trimming trailing zeros.
    pub fn new(field: FieldSpec, coeffs: &[i64]) -> Self {
        Self::from_raw(field, coeffs.iter().map(|&c| field.reduce(c)).collect())
    }

    pub(crate) fn from_raw(field: FieldSpec, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn zero(field: FieldSpec) -> Self {
        Poly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: FieldSpec) -> Self {
        Poly {
            field,
            coeffs: vec![1],
        }
    }

    pub fn constant(field: FieldSpec, c: u32) -> Self {
        Self::from_raw(field, vec![c % field.p()])
    }

    /// `X - c`
    pub fn linear(field: FieldSpec, c: u32) -> Self {
        Self::from_raw(field, vec![field.neg(c % field.p()), 1])
    }

    /// `X^k`
    pub fn monomial(field: FieldSpec, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        Poly { field, coeffs }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn coeff(&self, k: usize) -> u32 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(self.leading()).expect("nonzero leading");
        self.scale(inv)
    }

    pub fn scale(&self, c: u32) -> Poly {
        let f = self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check(other);
        let f = self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_raw(
            f,
            (0..len).map(|k| f.add(self.coeff(k), other.coeff(k))).collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.check(other);
        let f = self.field;
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_raw(
            f,
            (0..len).map(|k| f.sub(self.coeff(k), other.coeff(k))).collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.field);
        }
        let f = self.field;
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::from_raw(f, out)
    }

    pub fn pow(&self, e: usize) -> Poly {
        (0..e).fold(Poly::one(self.field), |acc, _| acc.mul(self))
    }

    /// Euclidean division `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.check(divisor);
        let f = self.field;
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.inv(divisor.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = f.mul(rem[k], lead_inv);
            if c == 0 {
                continue;
            }
            quot[k - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + j;
                rem[idx] = f.sub(rem[idx], f.mul(c, d));
            }
        }
        Ok((Self::from_raw(f, quot), Self::from_raw(f, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.divmod(divisor)?.1)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        match other.divmod(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => other.is_zero(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("b nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn eval_scalar(&self, x: Scalar) -> Scalar {
        Scalar::new(self.field, self.eval(x.value()))
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_mat(&self, a: &Mat) -> Mat {
        assert_eq!(a.field(), self.field, "field mismatch");
        let n = a.n();
        let mut acc = Mat::zero(self.field, n);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * a;
            acc = acc.add_scalar(c);
        }
        acc
    }

    /// Horner evaluation of `g(A) v` for a column vector.
    pub fn apply_to_vec(&self, a: &Mat, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut acc = vec![0u32; v.len()];
        for &c in self.coeffs.iter().rev() {
            acc = a.mul_vec(&acc);
            for (x, &vi) in acc.iter_mut().zip(v) {
                *x = f.add(*x, f.mul(c, vi));
            }
        }
        acc
    }

    /// All roots in GF(p), ascending.
    pub fn roots(&self) -> Result<Vec<u32>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok((0..self.field.p()).filter(|&c| self.eval(c) == 0).collect())
    }

    /// Roots with multiplicity, found by iterated trial division by `X - c`,
    /// together with the cofactor that has no roots left.
    pub fn root_multiplicities(&self) -> Result<(Vec<(u32, usize)>, Poly)> {
        let roots = self.roots()?;
        let mut rest = self.clone();
        let mut out = Vec::with_capacity(roots.len());
        for c in roots {
            let lin = Poly::linear(self.field, c);
            let mut mult = 0;
            loop {
                let (q, r) = rest.divmod(&lin)?;
                if !r.is_zero() {
                    break;
                }
                rest = q;
                mult += 1;
            }
            out.push((c, mult));
        }
        Ok((out, rest))
    }

    /// True iff the polynomial is a product of linear factors.
    pub fn splits(&self) -> Result<bool> {
        let (_, rest) = self.root_multiplicities()?;
        Ok(rest.degree() == Some(0))
    }

    fn check(&self, other: &Poly) {
        assert_eq!(self.field, other.field, "polynomials over different fields");
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "X")?,
                (1, c) => write!(f, "{c}X")?,
                (k, 1) => write!(f, "X^{k}")?,
                (k, c) => write!(f, "{c}X^{k}")?,
            }
        }
        Ok(())
    }
}

/// Division with remainder as a free function.
pub fn poly_divmod(f: &Poly, g: &Poly) -> Result<(Poly, Poly)> {
    f.divmod(g)
}

/// Roots of `f` in GF(p) and whether `f` splits into linear factors.
pub fn poly_roots(f: &Poly) -> Result<(Vec<u32>, bool)> {
    Ok((f.roots()?, f.splits()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn long_division_over_gf2() {
        let f2 = gf(2);
        let f = Poly::new(f2, &[1, 1, 1]);
        let g = Poly::new(f2, &[1, 1]);
        let (q, r) = poly_divmod(&f, &g).unwrap();
        assert_eq!(q, Poly::new(f2, &[0, 1]));
        assert_eq!(r, Poly::one(f2));
        assert_eq!(q.mul(&g).add(&r), f);
    }

    #[test]
    fn trivial_divisions() {
        let f3 = gf(3);
        let f = Poly::new(f3, &[2, 0, 1, 1]);
        assert_eq!(f.divmod(&f).unwrap(), (Poly::one(f3), Poly::zero(f3)));
        assert_eq!(
            Poly::zero(f3).divmod(&f).unwrap(),
            (Poly::zero(f3), Poly::zero(f3))
        );
        assert_eq!(f.divmod(&Poly::zero(f3)), Err(Error::DivisionByZero));
    }

    #[test]
    fn roots_examples() {
        let f2 = gf(2);
        assert_eq!(
            poly_roots(&Poly::new(f2, &[1, 1, 1])).unwrap(),
            (vec![], false)
        );
        let f3 = gf(3);
        assert_eq!(
            poly_roots(&Poly::new(f3, &[-1, 0, 1])).unwrap(),
            (vec![1, 2], true)
        );
        let f7 = gf(7);
        assert_eq!(poly_roots(&Poly::linear(f7, 4)).unwrap(), (vec![4], true));
        assert_eq!(Poly::zero(f7).roots(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn repeated_roots_split() {
        let f5 = gf(5);
        let f = Poly::linear(f5, 2)
            .pow(3)
            .mul(&Poly::linear(f5, 4))
            .scale(3);
        let (mults, rest) = f.root_multiplicities().unwrap();
        assert_eq!(mults, vec![(2, 3), (4, 1)]);
        assert_eq!(rest, Poly::constant(f5, 3));
        assert!(f.splits().unwrap());
    }

    #[test]
    fn gcd_is_monic_common_divisor() {
        let f5 = gf(5);
        let a = Poly::linear(f5, 1).mul(&Poly::linear(f5, 2)).scale(2);
        let b = Poly::linear(f5, 2).mul(&Poly::new(f5, &[2, 0, 1]));
        assert_eq!(a.gcd(&b), Poly::linear(f5, 2));
        assert_eq!(Poly::zero(f5).gcd(&Poly::zero(f5)), Poly::zero(f5));
    }

    #[test]
    fn display_is_readable() {
        let f3 = gf(3);
        assert_eq!(Poly::new(f3, &[1, 2, 0, 1]).to_string(), "X^3 + 2X + 1");
        assert_eq!(Poly::zero(f3).to_string(), "0");
    }
}
