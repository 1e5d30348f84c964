use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{Error, Result};

/// `y² + a1·x·y + a3·y = x³ + a2·x² + a4·x + a6` over a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassCurve<K: Field> {
    field: K,
    a: [K::Elem; 5],
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurvePoint<E> {
    Infinity,
    Affine(E, E),
}

impl<E> CurvePoint<E> {
    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }
}

impl<E: fmt::Display> fmt::Display for CurvePoint<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

impl<K: Field> WeierstrassCurve<K> {
    /// Builds the curve after checking that the discriminant is nonzero.
    pub fn new(field: K, a: [K::Elem; 5]) -> Result<Self> {
        let curve = WeierstrassCurve { field, a };
        if curve.field.is_zero(&curve.discriminant()) {
            return Err(Error::input("singular curve: discriminant vanishes"));
        }
        Ok(curve)
    }

    pub fn field(&self) -> &K {
        &self.field
    }

    /// Coefficients `[a1, a2, a3, a4, a6]`.
    pub fn coefficients(&self) -> &[K::Elem; 5] {
        &self.a
    }

    pub fn discriminant(&self) -> K::Elem {
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = &self.a;
        let c = |n: i64| f.from_int(n);
        let b2 = f.add(&f.mul(a1, a1), &f.mul(&c(4), a2));
        let b4 = f.add(&f.mul(&c(2), a4), &f.mul(a1, a3));
        let b6 = f.add(&f.mul(a3, a3), &f.mul(&c(4), a6));
        let b8 = {
            let t1 = f.mul(&f.mul(a1, a1), a6);
            let t2 = f.mul(&c(4), &f.mul(a2, a6));
            let t3 = f.mul(&f.mul(a1, a3), a4);
            let t4 = f.mul(a2, &f.mul(a3, a3));
            let t5 = f.mul(a4, a4);
            f.sub(&f.add(&f.sub(&f.add(&t1, &t2), &t3), &t4), &t5)
        };
        // Δ = −b2²·b8 − 8·b4³ − 27·b6² + 9·b2·b4·b6
        let t1 = f.neg(&f.mul(&f.mul(&b2, &b2), &b8));
        let t2 = f.mul(&c(8), &f.mul(&f.mul(&b4, &b4), &b4));
        let t3 = f.mul(&c(27), &f.mul(&b6, &b6));
        let t4 = f.mul(&c(9), &f.mul(&f.mul(&b2, &b4), &b6));
        f.add(&f.sub(&f.sub(&t1, &t2), &t3), &t4)
    }

    pub fn contains(&self, p: &CurvePoint<K::Elem>) -> bool {
        let CurvePoint::Affine(x, y) = p else {
            return true;
        };
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = &self.a;
        let lhs = f.add(&f.mul(y, y), &f.mul(y, &f.add(&f.mul(a1, x), a3)));
        let x2 = f.mul(x, x);
        let rhs = f.add(&f.add(&f.mul(&x2, x), &f.mul(a2, &x2)), &f.add(&f.mul(a4, x), a6));
        lhs == rhs
    }

    pub fn point(&self, x: K::Elem, y: K::Elem) -> Result<CurvePoint<K::Elem>> {
        let p = CurvePoint::Affine(x, y);
        if !self.contains(&p) {
            return Err(Error::input(format!("point {p:?} is not on the curve")));
        }
        Ok(p)
    }

    fn check(&self, p: &CurvePoint<K::Elem>) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::input(format!("point {p:?} is not on the curve")))
        }
    }

    pub fn negate(&self, p: &CurvePoint<K::Elem>) -> Result<CurvePoint<K::Elem>> {
        self.check(p)?;
        Ok(self.neg_unchecked(p))
    }

    pub fn add(&self, p: &CurvePoint<K::Elem>, q: &CurvePoint<K::Elem>) -> Result<CurvePoint<K::Elem>> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    /// `n·P` by double-and-add; negative `n` negates.
    pub fn scalar_mul(&self, n: &BigInt, p: &CurvePoint<K::Elem>) -> Result<CurvePoint<K::Elem>> {
        self.check(p)?;
        Ok(self.mul_unchecked(n, p))
    }

    pub(crate) fn neg_unchecked(&self, p: &CurvePoint<K::Elem>) -> CurvePoint<K::Elem> {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => {
                let f = &self.field;
                let [a1, _, a3, _, _] = &self.a;
                let ny = f.sub(&f.neg(y), &f.add(&f.mul(a1, x), a3));
                CurvePoint::Affine(x.clone(), ny)
            }
        }
    }

    pub(crate) fn add_unchecked(&self, p: &CurvePoint<K::Elem>, q: &CurvePoint<K::Elem>) -> CurvePoint<K::Elem> {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Infinity, _) => return q.clone(),
            (_, CurvePoint::Infinity) => return p.clone(),
            (CurvePoint::Affine(x1, y1), CurvePoint::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let f = &self.field;
        let [a1, a2, a3, a4, _] = &self.a;
        let lambda = if x1 == x2 {
            // Vertical line through P and −P, or through a 2-torsion point.
            let denom = f.add(&f.add(&f.mul(&f.from_int(2), y1), &f.mul(a1, x1)), a3);
            let sum = f.add(&f.add(y1, y2), &f.add(&f.mul(a1, x2), a3));
            if f.is_zero(&sum) || f.is_zero(&denom) {
                return CurvePoint::Infinity;
            }
            let num = f.sub(
                &f.add(
                    &f.add(
                        &f.mul(&f.from_int(3), &f.mul(x1, x1)),
                        &f.mul(&f.from_int(2), &f.mul(a2, x1)),
                    ),
                    a4,
                ),
                &f.mul(a1, y1),
            );
            f.mul(&num, &f.inv(&denom).expect("nonzero"))
        } else {
            let dx = f.sub(x2, x1);
            f.mul(&f.sub(y2, y1), &f.inv(&dx).expect("nonzero"))
        };
        let x3 = f.sub(
            &f.sub(&f.sub(&f.add(&f.mul(&lambda, &lambda), &f.mul(a1, &lambda)), a2), x1),
            x2,
        );
        let y3 = f.sub(
            &f.sub(&f.neg(&f.add(y1, &f.mul(&lambda, &f.sub(&x3, x1)))), &f.mul(a1, &x3)),
            a3,
        );
        CurvePoint::Affine(x3, y3)
    }

    pub(crate) fn mul_unchecked(&self, n: &BigInt, p: &CurvePoint<K::Elem>) -> CurvePoint<K::Elem> {
        let mut acc = CurvePoint::Infinity;
        let mut base = if n.is_negative() {
            self.neg_unchecked(p)
        } else {
            p.clone()
        };
        let mut k = n.abs();
        while !k.is_zero() {
            if k.bit(0) {
                acc = self.add_unchecked(&acc, &base);
            }
            base = self.add_unchecked(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// `Σ coeffs[i]·points[i]`, no curve-membership checks.
    pub(crate) fn combine_unchecked(&self, coeffs: &[BigInt], points: &[CurvePoint<K::Elem>]) -> CurvePoint<K::Elem> {
        coeffs.iter().zip(points).fold(CurvePoint::Infinity, |acc, (c, p)| {
            self.add_unchecked(&acc, &self.mul_unchecked(c, p))
        })
    }
}
