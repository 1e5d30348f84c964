use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Extended Euclid on a pair: returns `(g, s, t)` with `g = s·a + t·b`,
/// `g ≥ 0`.
pub fn ext_gcd_pair(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Multi-argument extended gcd, folded left over the inputs.
///
/// Returns `g ≥ 0` and coefficients `c` with `Σ c[i]·values[i] = g`. The
/// all-zero input yields `g = 0` with zero coefficients. Coefficients are
/// not size-minimized.
pub fn ext_gcd(values: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut coeffs = vec![BigInt::zero(); values.len()];
    let Some(first) = values.first() else {
        return (BigInt::zero(), coeffs);
    };
    let mut g = first.abs();
    coeffs[0] = if first.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    if first.is_zero() {
        coeffs[0] = BigInt::zero();
    }
    for (i, v) in values.iter().enumerate().skip(1) {
        let (next, s, t) = ext_gcd_pair(&g, v);
        for c in &mut coeffs[..i] {
            *c *= &s;
        }
        coeffs[i] = t;
        g = next;
    }
    (g, coeffs)
}

pub fn gcd_all(values: &[BigInt]) -> BigInt {
    values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().copied().map(BigInt::from).collect()
    }

    fn check(values: &[i64]) -> BigInt {
        let vals = big(values);
        let (g, c) = ext_gcd(&vals);
        let combo: BigInt = c.iter().zip(&vals).map(|(a, b)| a * b).sum();
        assert_eq!(combo, g, "Bezout identity for {values:?}");
        assert!(!g.is_negative());
        g
    }

    #[test]
    fn three_values() {
        // 6 + 10 - 15 = 1 is one valid vector; any valid one is accepted.
        assert_eq!(check(&[6, 10, 15]), BigInt::one());
    }

    #[test]
    fn single_value() {
        let (g, c) = ext_gcd(&big(&[5]));
        assert_eq!(g, BigInt::from(5));
        assert_eq!(c, big(&[1]));
        assert_eq!(check(&[-5]), BigInt::from(5));
    }

    #[test]
    fn zeros() {
        let (g, c) = ext_gcd(&big(&[0, 0]));
        assert!(g.is_zero());
        assert_eq!(c, big(&[0, 0]));
    }

    #[test]
    fn mixed_signs_and_zeros() {
        assert_eq!(check(&[0, -4, 6]), BigInt::from(2));
        assert_eq!(check(&[12, 0, 18, -27]), BigInt::from(3));
    }
}
