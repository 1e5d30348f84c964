//! Elliptic curves in long Weierstrass form over Q and over prime fields.

mod curve;
mod field;
mod fp;
mod q;

pub use curve::{CurvePoint, WeierstrassCurve};
pub use field::{Field, PrimeField, Rationals};
pub use fp::{within_hasse_bound, FpCurve, FpPoint, DEFAULT_COUNT_CAP};
pub use q::{parse_rational, qpoint, Place, PlaceStatus, QCurve, QPoint};

pub(crate) use q::reduce_point_coords;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let mut sieve = vec![true; hi as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= hi as usize {
        if sieve[i] {
            for j in (i * i..=hi as usize).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (lo.max(2)..=hi).filter(|&n| sieve[n as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_agrees_with_trial_division() {
        let sieved = primes_between(1, 500);
        let trial: Vec<u64> = (1..=500).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, trial);
        assert_eq!(primes_between(5, 13), vec![5, 7, 11, 13]);
    }
}
