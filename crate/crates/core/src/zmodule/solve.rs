use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{smith_normal_form, IntMatrix};
use crate::error::{Error, Result};

/// Echelon basis of an integer lattice: each row has a positive pivot and
/// zeros before it; pivot columns strictly increase.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl Echelon {
    pub(crate) fn new(generators: Vec<Vec<BigInt>>, dim: usize) -> Self {
        let mut pending: Vec<Vec<BigInt>> = generators
            .into_iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .collect();
        let mut rows = Vec::new();
        for col in 0..dim {
            // Euclid on column `col` across the pending vectors.
            loop {
                let mut nz: Vec<usize> = (0..pending.len()).filter(|&i| !pending[i][col].is_zero()).collect();
                if nz.len() <= 1 {
                    break;
                }
                nz.sort_by(|&a, &b| pending[a][col].abs().cmp(&pending[b][col].abs()).then(a.cmp(&b)));
                let p = nz[0];
                let pivot = pending[p][col].clone();
                let pivot_row = pending[p].clone();
                for &i in &nz[1..] {
                    let q = pending[i][col].div_floor(&pivot);
                    for (x, y) in pending[i].iter_mut().zip(&pivot_row) {
                        *x -= &q * y;
                    }
                }
            }
            if let Some(i) = pending.iter().position(|g| !g[col].is_zero()) {
                let mut row = pending.swap_remove(i);
                if row[col].is_negative() {
                    row.iter_mut().for_each(|x| *x = -std::mem::take(x));
                }
                rows.push((col, row));
            }
            pending.retain(|g| g.iter().any(|x| !x.is_zero()));
        }
        Echelon { rows }
    }

    /// Reduces each pivot coordinate of `x` into `[0, pivot)` in order.
    pub(crate) fn reduce(&self, x: &mut [BigInt]) {
        for (col, row) in &self.rows {
            let q = x[*col].div_floor(&row[*col]);
            if q.is_zero() {
                continue;
            }
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi -= &q * ri;
            }
        }
    }
}

/// Integer kernel basis of `a`: vectors `k` with `a·k = 0`.
pub fn integer_kernel(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let s = smith_normal_form(a);
    let r = s.rank();
    (r..a.cols()).map(|j| s.v.column(j)).collect()
}

pub fn rank(a: &IntMatrix) -> usize {
    smith_normal_form(a).rank()
}

/// Solves `A·x ≡ b (mod moduli)` row by row; a modulus of zero makes that
/// row an equation over Z.
///
/// Returns the canonical solution: the one minimal in reverse
/// lexicographic order, with the last coordinate reduced first into its
/// smallest nonnegative residue, then the one before it, and so on.
/// Coordinates the solution lattice leaves unbounded (possible only when
/// some row is over Z) keep whatever value the reduction gives them.
pub fn solve_mod(a: &IntMatrix, b: &[BigInt], moduli: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != a.rows() || moduli.len() != a.rows() {
        return Err(Error::input(format!(
            "solve_mod: matrix has {} rows but b has {} and moduli has {}",
            a.rows(),
            b.len(),
            moduli.len()
        )));
    }
    if moduli.iter().any(Signed::is_negative) {
        return Err(Error::input("solve_mod: moduli must be nonnegative"));
    }
    let n = a.cols();
    let slack: Vec<usize> = (0..a.rows()).filter(|&i| !moduli[i].is_zero()).collect();

    // [A | diag(moduli)] · (x, y) = b over Z.
    let mut c = IntMatrix::zeros(a.rows(), n + slack.len());
    for i in 0..a.rows() {
        for j in 0..n {
            c[(i, j)] = a[(i, j)].clone();
        }
    }
    for (k, &i) in slack.iter().enumerate() {
        c[(i, n + k)] = moduli[i].clone();
    }

    let s = smith_normal_form(&c);
    let r = s.rank();
    let ub = s.u.mul_vec(b);
    let mut w = vec![BigInt::zero(); c.cols()];
    for (i, target) in ub.iter().enumerate() {
        if i < r {
            let (q, rem) = target.div_rem(&s.d[(i, i)]);
            if !rem.is_zero() {
                return Ok(None);
            }
            w[i] = q;
        } else if !target.is_zero() {
            return Ok(None);
        }
    }
    let z = s.v.mul_vec(&w);
    let mut x: Vec<BigInt> = z[..n].to_vec();

    // Kernel of x ↦ A·x (mod moduli), in reversed coordinates.
    let kernel: Vec<Vec<BigInt>> = (r..c.cols())
        .map(|j| s.v.column(j)[..n].iter().rev().cloned().collect())
        .collect();
    let ech = Echelon::new(kernel, n);
    x.reverse();
    ech.reduce(&mut x);
    x.reverse();
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().copied().map(BigInt::from).collect()
    }

    fn solve(rows: &[Vec<i64>], b: &[i64], m: &[i64]) -> Option<Vec<BigInt>> {
        solve_mod(&IntMatrix::from_rows(rows), &big(b), &big(m)).unwrap()
    }

    #[test]
    fn eight_x_is_four_mod_twelve() {
        assert_eq!(solve(&[vec![8]], &[4], &[12]), Some(big(&[2])));
    }

    #[test]
    fn homogeneous() {
        assert_eq!(solve(&[vec![1]], &[0], &[5]), Some(big(&[0])));
    }

    #[test]
    fn no_solution() {
        assert_eq!(solve(&[vec![2]], &[1], &[4]), None);
    }

    #[test]
    fn reverse_lex_prefers_early_generators() {
        // 2a + 3b ≡ 4 (mod 5): canonical answer keeps b = 0.
        assert_eq!(solve(&[vec![2, 3]], &[4], &[5]), Some(big(&[2, 0])));
    }

    #[test]
    fn mixed_integer_rows() {
        // x + y = 1 over Z, x ≡ 0 (mod 3)
        let x = solve(&[vec![1, 1], vec![1, 0]], &[1, 0], &[0, 3]).unwrap();
        assert_eq!(&x[0] + &x[1], BigInt::from(1));
        assert!((&x[0] % BigInt::from(3)).is_zero());
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let err = solve_mod(&IntMatrix::from_rows(&[vec![1]]), &big(&[1, 2]), &big(&[5])).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn kernel_of_row() {
        let k = integer_kernel(&IntMatrix::from_rows(&[vec![1, 1]]));
        assert_eq!(k.len(), 1);
        assert_eq!(&k[0][0] + &k[0][1], BigInt::zero());
    }
}
