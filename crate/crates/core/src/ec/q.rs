use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::curve::{CurvePoint, WeierstrassCurve};
use super::field::{Field, PrimeField, Rationals};
use super::fp::{FpCurve, FpPoint};
use super::is_prime;
use crate::error::{Error, Result};

pub type QCurve = WeierstrassCurve<Rationals>;
pub type QPoint = CurvePoint<BigRational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceStatus {
    Good,
    Bad,
    /// `p ≤ 3`, left out of every scan.
    Excluded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Place {
    pub p: u64,
}

impl Place {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        Ok(Place { p })
    }
}

impl QCurve {
    pub fn from_integers(a: [i64; 5]) -> Result<Self> {
        QCurve::new(Rationals, a.map(|c| Rationals.from_int(c)))
    }

    pub fn from_rationals(a: [BigRational; 5]) -> Result<Self> {
        QCurve::new(Rationals, a)
    }

    /// Good means `p > 3`, `p` divides no coefficient denominator and does
    /// not divide the numerator of the discriminant.
    pub fn place_status(&self, p: u64) -> PlaceStatus {
        if p <= 3 {
            return PlaceStatus::Excluded;
        }
        let pb = BigInt::from(p);
        let integral = self.coefficients().iter().all(|c| !c.denom().is_multiple_of(&pb));
        if integral && !self.discriminant().numer().is_multiple_of(&pb) {
            PlaceStatus::Good
        } else {
            PlaceStatus::Bad
        }
    }

    pub fn require_good(&self, place: Place) -> Result<()> {
        match self.place_status(place.p) {
            PlaceStatus::Good => Ok(()),
            status => Err(Error::input(format!("place {} is {status:?} for this curve", place.p))),
        }
    }

    /// The reduced curve over `F_p`; the place must be good.
    pub fn reduce(&self, place: Place) -> Result<FpCurve> {
        self.require_good(place)?;
        let k = PrimeField::new(place.p);
        let a = self
            .coefficients()
            .clone()
            .map(|c| k.reduce_rational(&c).expect("p-integral at a good place"));
        FpCurve::new(k, a)
    }

    /// Reduces a rational point through coprime projective coordinates,
    /// so points whose denominators are divisible by `p` go to infinity.
    pub fn reduce_point(&self, point: &QPoint, place: Place) -> Result<FpPoint> {
        if !self.contains(point) {
            return Err(Error::input(format!("point {point:?} is not on the curve")));
        }
        self.require_good(place)?;
        Ok(reduce_point_coords(point, place.p))
    }

    pub fn torsion_claim_holds(&self, point: &QPoint, claimed_order: u64) -> bool {
        if claimed_order == 0 || !self.contains(point) {
            return false;
        }
        let mut acc = point.clone();
        for _ in 1..claimed_order {
            if acc.is_infinity() {
                return false;
            }
            acc = self.add_unchecked(&acc, point);
        }
        acc.is_infinity()
    }

    /// Verifies claimed torsion orders exactly; the error names the first
    /// point that fails.
    pub fn check_torsion_claims(&self, claims: &[(QPoint, u64)]) -> Result<()> {
        for (i, (pt, ord)) in claims.iter().enumerate() {
            if !self.contains(pt) {
                return Err(Error::fixture(format!("torsion point #{i} {pt} is not on the curve")));
            }
            if !self.torsion_claim_holds(pt, *ord) {
                return Err(Error::fixture(format!(
                    "torsion point #{i} {pt} does not have order {ord}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn reduce_point_coords(point: &QPoint, p: u64) -> FpPoint {
    let CurvePoint::Affine(x, y) = point else {
        return CurvePoint::Infinity;
    };
    let l = x.denom().lcm(y.denom());
    let mut big_x = x.numer() * (&l / x.denom());
    let mut big_y = y.numer() * (&l / y.denom());
    let mut big_z = l;
    let g = big_x.gcd(&big_y).gcd(&big_z);
    if !g.is_zero() && !g.is_one() {
        big_x /= &g;
        big_y /= &g;
        big_z /= &g;
    }
    let k = PrimeField::new(p);
    let z = k.reduce_int(&big_z);
    match k.inv(&z) {
        None => CurvePoint::Infinity,
        Some(zi) => CurvePoint::Affine(k.mul(&k.reduce_int(&big_x), &zi), k.mul(&k.reduce_int(&big_y), &zi)),
    }
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::input(format!("not an integer: {t:?}")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::input(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
    }
}

pub fn qpoint(x: &str, y: &str) -> Result<QPoint> {
    Ok(CurvePoint::Affine(parse_rational(x)?, parse_rational(y)?))
}
