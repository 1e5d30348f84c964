use num_bigint::BigInt;

use super::curve::{CurvePoint, WeierstrassCurve};
use super::field::{Field, PrimeField};
use crate::error::{Error, Result};
use crate::finite_abelian::{divisors, BlackBoxGroup};

pub type FpCurve = WeierstrassCurve<PrimeField>;
pub type FpPoint = CurvePoint<u64>;

/// Default cap on the prime for naive point counting.
pub const DEFAULT_COUNT_CAP: u64 = 100_000;

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl FpCurve {
    pub fn prime(&self) -> u64 {
        self.field().modulus()
    }

    fn check_cap(&self, cap: u64) -> Result<()> {
        let p = self.prime();
        if p > cap {
            return Err(Error::Resource {
                what: format!("naive point count over F_{p}"),
                cap,
            });
        }
        if p <= 3 {
            return Err(Error::input(format!("characteristic {p} is excluded")));
        }
        Ok(())
    }

    /// For each x, the two roots of `y² + (a1·x + a3)·y − f(x)` are
    /// `(−(a1·x + a3) ± √D)/2` with `D = (a1·x + a3)² + 4·f(x)`.
    fn for_each_x<F: FnMut(u64, u64, Option<u64>)>(&self, mut visit: F) {
        let k = *self.field();
        let p = self.prime();
        let mut sqrt_of = vec![None; p as usize];
        for r in 0..p {
            let sq = (r * r % p) as usize;
            if sqrt_of[sq].is_none() {
                sqrt_of[sq] = Some(r);
            }
        }
        let [a1, a2, a3, a4, a6] = *self.coefficients();
        for x in 0..p {
            let h = k.add(&k.mul(&a1, &x), &a3);
            let fx = {
                let x2 = k.mul(&x, &x);
                k.add(&k.add(&k.mul(&x2, &x), &k.mul(&a2, &x2)), &k.add(&k.mul(&a4, &x), &a6))
            };
            let disc = k.add(&k.mul(&h, &h), &k.mul(&4, &fx));
            visit(x, h, sqrt_of[disc as usize]);
        }
    }

    /// `#E(F_p)` including the point at infinity.
    pub fn group_order(&self, cap: u64) -> Result<u64> {
        self.check_cap(cap)?;
        let mut n = 1u64;
        self.for_each_x(|_, _, root| match root {
            Some(0) => n += 1,
            Some(_) => n += 2,
            None => {}
        });
        Ok(n)
    }

    /// Every point of `E(F_p)`, infinity first, then by `x` and `y`.
    pub fn points(&self, cap: u64) -> Result<Vec<FpPoint>> {
        self.check_cap(cap)?;
        let k = *self.field();
        let half = k.inv(&2).expect("p > 2");
        let mut out = vec![CurvePoint::Infinity];
        self.for_each_x(|x, h, root| {
            if let Some(r) = root {
                let y1 = k.mul(&k.sub(&r, &h), &half);
                let y2 = k.mul(&k.sub(&k.neg(&r), &h), &half);
                out.push(CurvePoint::Affine(x, y1.min(y2)));
                if y1 != y2 {
                    out.push(CurvePoint::Affine(x, y1.max(y2)));
                }
            }
        });
        Ok(out)
    }

    /// Least `n ≥ 1` with `n·P = O`, testing divisors of the group order.
    pub fn point_order(&self, p: &FpPoint, group_order: u64) -> Result<u64> {
        if !self.contains(p) {
            return Err(Error::input(format!("point {p:?} is not on the curve")));
        }
        divisors(group_order)
            .into_iter()
            .find(|&d| self.mul_unchecked(&BigInt::from(d), p).is_infinity())
            .ok_or_else(|| Error::input("group order is not a multiple of the point order"))
    }

    /// Upper end of the Hasse interval, `p + 1 + ⌊2√p⌋`.
    pub fn hasse_upper(&self) -> u64 {
        let p = self.prime();
        p + 1 + isqrt(4 * p)
    }
}

impl BlackBoxGroup for FpCurve {
    type Elem = FpPoint;

    fn identity(&self) -> FpPoint {
        CurvePoint::Infinity
    }

    fn op(&self, a: &FpPoint, b: &FpPoint) -> FpPoint {
        self.add_unchecked(a, b)
    }

    fn exponent_bound(&self) -> u64 {
        self.hasse_upper()
    }
}

/// `|N − p − 1| ≤ 2√p`, checked in integers as `(N − p − 1)² ≤ 4p`.
pub fn within_hasse_bound(p: u64, n: u64) -> bool {
    let t = n as i128 - p as i128 - 1;
    t * t <= 4 * p as i128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: [i64; 5], p: u64) -> FpCurve {
        let k = PrimeField::new(p);
        FpCurve::new(k, a.map(|c| k.from_int(c))).unwrap()
    }

    #[test]
    fn doubling_example() {
        let e = curve([0, 0, 1, 3, 1], 5);
        let p = e.point(1, 0).unwrap();
        assert_eq!(e.add(&p, &p).unwrap(), CurvePoint::Affine(4, 1));
    }

    #[test]
    fn identity_and_inverse() {
        let e = curve([0, 0, 1, -7, 6], 11);
        let p = e.point(1, 0).unwrap();
        assert_eq!(e.add(&p, &CurvePoint::Infinity).unwrap(), p);
        assert!(e.add(&p, &e.negate(&p).unwrap()).unwrap().is_infinity());
    }

    #[test]
    fn off_curve_is_input_error() {
        let e = curve([0, 0, 1, -7, 6], 11);
        let bad = CurvePoint::Affine(1, 1);
        assert!(matches!(e.add(&bad, &bad), Err(Error::Input(_))));
    }

    #[test]
    fn counts_mod_five() {
        assert_eq!(curve([0, 0, 1, -7, 6], 5).group_order(DEFAULT_COUNT_CAP).unwrap(), 10);
        assert_eq!(curve([0, 0, 0, 0, 1], 5).group_order(DEFAULT_COUNT_CAP).unwrap(), 6);
    }

    #[test]
    fn enumeration_matches_count() {
        let e = curve([1, -1, 1, -4, 5], 101);
        let pts = e.points(DEFAULT_COUNT_CAP).unwrap();
        assert_eq!(pts.len() as u64, e.group_order(DEFAULT_COUNT_CAP).unwrap());
        assert!(pts.iter().all(|p| e.contains(p)));
    }

    #[test]
    fn order_of_reduced_generator() {
        let e = curve([0, 0, 1, -7, 6], 5);
        let p = e.point(1, 0).unwrap();
        assert_eq!(e.point_order(&p, 10).unwrap(), 5);
        assert_eq!(e.point_order(&CurvePoint::Infinity, 10).unwrap(), 1);
    }

    #[test]
    fn count_cap() {
        let e = curve([0, 0, 1, -7, 6], 101);
        assert!(matches!(e.group_order(100), Err(Error::Resource { cap: 100, .. })));
    }
}
