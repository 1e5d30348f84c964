//! Trace-zero lattices `Λ = {M·P : tr M = 0}` and their local behaviour.
//!
//! Globally, independent components force `M = I` in `M·P = P`, so
//! `P ∉ Λ`. Locally, [`find_fixing_matrix`] builds a trace-zero `M` with
//! `M·P̄ = P̄` from minimal relations and a Bézout vector, and returns it
//! as a certificate that anyone can recheck.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_abelian::{minimal_multiple_in_subgroup, Element, FiniteAbelianGroup, Quotient};
use crate::reduction::{Caps, GlobalModule, GlobalPoint};
use crate::zmodule::{ext_gcd, solve_mod, IntMatrix};

/// Places processed together by the obstruction search before it checks
/// for an early exit.
const OBSTRUCTION_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceZeroLattice {
    pub points: Vec<GlobalPoint>,
    /// `dim Ṽ` of the realization.
    pub d: usize,
    /// `e = d + 1`: the shape of the counterexample.
    pub tagged: bool,
    /// A relation among the components, when they are dependent.
    #[serde(with = "crate::bigint_serde::option_vec")]
    pub dependence: Option<Vec<BigInt>>,
}

impl TraceZeroLattice {
    pub fn e(&self) -> usize {
        self.points.len()
    }
}

pub fn build_counterexample(b: &GlobalModule, points: Vec<GlobalPoint>) -> Result<TraceZeroLattice> {
    if points.len() < 2 {
        return Err(Error::input(format!(
            "a trace-zero lattice needs at least 2 points, got {}",
            points.len()
        )));
    }
    points.iter().try_for_each(|p| b.validate(p))?;
    let dependence = b.relation_among(&points);
    Ok(TraceZeroLattice {
        tagged: points.len() == b.d() + 1,
        d: b.d(),
        dependence,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalMembership {
    pub member: bool,
    /// Trace-zero `M` with `M·P ≡ P` modulo torsion.
    pub witness: Option<IntMatrix>,
    pub reason: String,
}

/// Decides `P ∈ Λ + B_tors^e` by solving `M·F = F`, `tr M = 0` over Z,
/// where `F` holds the free coordinates of the components.
pub fn global_membership(lattice: &TraceZeroLattice) -> Result<GlobalMembership> {
    let e = lattice.e();
    let rho = lattice.points.first().map_or(0, |p| p.free.len());
    if lattice.points.iter().any(|p| p.free.len() != rho) {
        return Err(Error::input("lattice points have different ranks"));
    }
    let f = &lattice.points;
    // Unknown M[i][j] sits in column i·e + j.
    let mut a = IntMatrix::zeros(e * rho + 1, e * e);
    let mut rhs = Vec::with_capacity(e * rho + 1);
    for i in 0..e {
        for k in 0..rho {
            let row = i * rho + k;
            for j in 0..e {
                a[(row, i * e + j)] = f[j].free[k].clone();
            }
            rhs.push(f[i].free[k].clone());
        }
    }
    for i in 0..e {
        a[(e * rho, i * e + i)] = BigInt::one();
    }
    rhs.push(BigInt::zero());
    let moduli = vec![BigInt::zero(); e * rho + 1];
    Ok(match solve_mod(&a, &rhs, &moduli)? {
        Some(x) => GlobalMembership {
            member: true,
            witness: Some(IntMatrix::from_entries(e, e, x)),
            reason: "trace-zero matrix fixes P modulo torsion".into(),
        },
        None if lattice.dependence.is_none() => GlobalMembership {
            member: false,
            witness: None,
            reason: format!("independence forces M = I, and tr I = {e} ≠ 0"),
        },
        None => GlobalMembership {
            member: false,
            witness: None,
            reason: "no integer trace-zero solution of M·P = P".into(),
        },
    })
}

/// One checked invariant of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

/// The witness that `P̄ ∈ Λ̄` at one place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixingMatrixCertificate {
    pub place: u64,
    /// The group the coordinates of `pbar` live in.
    pub group: FiniteAbelianGroup,
    pub pbar: Vec<Element>,
    pub alphas: Vec<u64>,
    /// Row `i`: `α_i` on the diagonal and `m_{i,j}` elsewhere, so that
    /// `Σ_j relations[i][j]·P̄_j = 0`.
    pub relations: IntMatrix,
    #[serde(with = "crate::bigint_serde::vec")]
    pub bezout: Vec<BigInt>,
    pub matrix: IntMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FixingOutcome {
    Certificate(FixingMatrixCertificate),
    /// `gcd(α) = g > 1`: the construction does not apply.
    MethodFailure {
        place: u64,
        alphas: Vec<u64>,
        gcd: u64,
    },
}

impl FixingOutcome {
    pub fn certificate(&self) -> Option<&FixingMatrixCertificate> {
        match self {
            FixingOutcome::Certificate(c) => Some(c),
            FixingOutcome::MethodFailure { .. } => None,
        }
    }
}

/// Size-reduced Bézout vector with `Σ a_i·α_i = target`.
///
/// Starts from the folded extended gcd scaled to the target, then adds
/// kernel vectors `(α_j/g)·e_i − (α_i/g)·e_j` pairwise while that strictly
/// shortens the vector. Requires `gcd(α) | target`.
pub fn bezout_for(alphas: &[BigInt], target: &BigInt) -> Option<Vec<BigInt>> {
    let (g, coeffs) = ext_gcd(alphas);
    if g.is_zero() || !target.is_multiple_of(&g) {
        return None;
    }
    let scale = target / &g;
    let mut a: Vec<BigInt> = coeffs.iter().map(|c| c * &scale).collect();
    let n = a.len();
    let norm = |v: &[BigInt]| v.iter().map(|x| x * x).sum::<BigInt>();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let gij = alphas[i].gcd(&alphas[j]);
                if gij.is_zero() {
                    continue;
                }
                let ki = &alphas[j] / &gij;
                let kj = -(&alphas[i] / &gij);
                // Minimize (a_i + t·ki)² + (a_j + t·kj)² over integers t.
                let num = -(&a[i] * &ki + &a[j] * &kj);
                let den = &ki * &ki + &kj * &kj;
                if den.is_zero() {
                    continue;
                }
                let lo = num.div_floor(&den);
                let hi = &lo + 1;
                let cost = |t: &BigInt| {
                    let x = &a[i] + t * &ki;
                    let y = &a[j] + t * &kj;
                    &x * &x + &y * &y
                };
                let (c_lo, c_hi) = (cost(&lo), cost(&hi));
                let t = if c_lo < c_hi || (c_lo == c_hi && lo.abs() <= hi.abs()) {
                    lo
                } else {
                    hi
                };
                if t.is_zero() {
                    continue;
                }
                let before = norm(&a);
                let (ni, nj) = (&a[i] + &t * &ki, &a[j] + &t * &kj);
                let (oi, oj) = (std::mem::replace(&mut a[i], ni), std::mem::replace(&mut a[j], nj));
                if norm(&a) < before {
                    improved = true;
                } else {
                    a[i] = oi;
                    a[j] = oj;
                }
            }
        }
        if !improved {
            return Some(a);
        }
    }
}

/// Runs the construction on explicit coordinates `pbar` in `g`.
pub fn fixing_matrix_in(g: &FiniteAbelianGroup, pbar: &[Element], place: u64) -> Result<FixingOutcome> {
    let e = pbar.len();
    if e < 2 {
        return Err(Error::input("need at least 2 components"));
    }
    let mut alphas = Vec::with_capacity(e);
    let mut relations = IntMatrix::zeros(e, e);
    for i in 0..e {
        let others: Vec<Element> = (0..e).filter(|&j| j != i).map(|j| pbar[j].clone()).collect();
        let mm = minimal_multiple_in_subgroup(g, &pbar[i], &others)?;
        relations[(i, i)] = BigInt::from(mm.alpha);
        for (slot, j) in (0..e).filter(|&j| j != i).enumerate() {
            relations[(i, j)] = mm.relation[slot].clone();
        }
        alphas.push(mm.alpha);
    }
    let big_alphas: Vec<BigInt> = alphas.iter().map(|&a| BigInt::from(a)).collect();
    let gcd = alphas.iter().fold(0u64, |acc, &a| acc.gcd(&a));
    if gcd != 1 {
        return Ok(FixingOutcome::MethodFailure { place, alphas, gcd });
    }
    let bezout = bezout_for(&big_alphas, &BigInt::from(e)).expect("gcd is 1");
    let mut m = IntMatrix::zeros(e, e);
    for i in 0..e {
        for j in 0..e {
            m[(i, j)] = if i == j {
                BigInt::one() - &bezout[i] * &big_alphas[i]
            } else {
                -(&bezout[i] * &relations[(i, j)])
            };
        }
    }
    let cert = FixingMatrixCertificate {
        place,
        group: g.clone(),
        pbar: pbar.to_vec(),
        alphas,
        relations,
        bezout,
        matrix: m,
    };
    debug_assert!(cert.is_valid());
    Ok(FixingOutcome::Certificate(cert))
}

impl FixingMatrixCertificate {
    /// Rechecks every invariant from the recorded data alone.
    pub fn verify(&self) -> Vec<Check> {
        let check = |name: &str, passed: bool| Check {
            name: name.into(),
            passed,
        };
        let g = &self.group;
        let e = self.pbar.len();
        let shapes = e >= 2
            && self.alphas.len() == e
            && self.bezout.len() == e
            && self.relations.rows() == e
            && self.relations.cols() == e
            && self.matrix.rows() == e
            && self.matrix.cols() == e
            && self.pbar.iter().all(|x| g.validate(x).is_ok());
        if !shapes {
            return vec![check("well_formed", false)];
        }
        let alpha = |i: usize| BigInt::from(self.alphas[i]);

        let relations_hold = (0..e)
            .all(|i| self.relations[(i, i)] == alpha(i) && g.combine(self.relations.row(i), &self.pbar).is_zero());

        let minimal = (0..e).all(|i| {
            let others: Vec<Element> = (0..e).filter(|&j| j != i).map(|j| self.pbar[j].clone()).collect();
            minimal_multiple_in_subgroup(g, &self.pbar[i], &others)
                .map(|mm| mm.alpha == self.alphas[i])
                .unwrap_or(false)
        });

        let gcd_one = self.alphas.iter().fold(0u64, |acc, &a| acc.gcd(&a)) == 1;
        let bezout_sum: BigInt = (0..e).map(|i| &self.bezout[i] * alpha(i)).sum();
        let bezout_ok = gcd_one && bezout_sum == BigInt::from(e);

        let entries_ok = (0..e).all(|i| {
            (0..e).all(|j| {
                let want = if i == j {
                    BigInt::one() - &self.bezout[i] * alpha(i)
                } else {
                    -(&self.bezout[i] * &self.relations[(i, j)])
                };
                self.matrix[(i, j)] == want
            })
        });

        let trace_zero = self.matrix.trace().is_zero();
        let fixes = (0..e).all(|i| g.combine(self.matrix.row(i), &self.pbar) == self.pbar[i]);

        vec![
            check("relations", relations_hold),
            check("alphas_minimal", minimal),
            check("gcd_and_bezout", bezout_ok),
            check("matrix_entries", entries_ok),
            check("trace_zero_and_fixes", trace_zero && fixes),
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.verify().iter().all(|c| c.passed)
    }
}

/// Reduces the lattice's components at `place`.
pub fn reduced_components(
    b: &GlobalModule,
    lattice: &TraceZeroLattice,
    place: u64,
    caps: Caps,
) -> Result<(FiniteAbelianGroup, Vec<Element>, u64)> {
    let image = b.local_image(place, caps)?;
    let pbar = lattice.points.iter().map(|p| b.reduce_in(&image, p)).collect();
    Ok((image.presentation.group, pbar, image.ambient_order))
}

pub fn find_fixing_matrix(
    b: &GlobalModule,
    lattice: &TraceZeroLattice,
    place: u64,
    caps: Caps,
) -> Result<FixingOutcome> {
    let (g, pbar, _) = reduced_components(b, lattice, place, caps)?;
    fixing_matrix_in(&g, &pbar, place)
}

/// Exact decision of `P̄ ∈ Λ̄`: solves `M·P̄ = P̄` with `tr M = 0` over
/// the invariant factors. Returns the canonical witness when one exists.
pub fn decide_membership_in(g: &FiniteAbelianGroup, pbar: &[Element]) -> Result<Option<IntMatrix>> {
    let e = pbar.len();
    let r = g.rank();
    pbar.iter().try_for_each(|x| g.validate(x))?;
    let mut a = IntMatrix::zeros(e * r + 1, e * e);
    let mut rhs = Vec::with_capacity(e * r + 1);
    let mut moduli = Vec::with_capacity(e * r + 1);
    for i in 0..e {
        for k in 0..r {
            let row = i * r + k;
            for j in 0..e {
                a[(row, i * e + j)] = BigInt::from(pbar[j].coords()[k]);
            }
            rhs.push(BigInt::from(pbar[i].coords()[k]));
            moduli.push(BigInt::from(g.invariants()[k]));
        }
    }
    for i in 0..e {
        a[(e * r, i * e + i)] = BigInt::one();
    }
    rhs.push(BigInt::zero());
    moduli.push(BigInt::zero());
    Ok(solve_mod(&a, &rhs, &moduli)?.map(|x| IntMatrix::from_entries(e, e, x)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalDecision {
    pub place: u64,
    pub member: bool,
    pub witness: Option<IntMatrix>,
}

pub fn decide_local_membership_exact(
    b: &GlobalModule,
    lattice: &TraceZeroLattice,
    place: u64,
    caps: Caps,
) -> Result<LocalDecision> {
    let (g, pbar, _) = reduced_components(b, lattice, place, caps)?;
    let witness = decide_membership_in(&g, &pbar)?;
    Ok(LocalDecision {
        place,
        member: witness.is_some(),
        witness,
    })
}

/// Result at one place of a counterexample run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceCertification {
    pub place: u64,
    pub ambient_order: u64,
    pub result: FixingOutcome,
    pub checks: Vec<Check>,
}

impl PlaceCertification {
    pub fn passed(&self) -> bool {
        self.result.certificate().is_some() && self.checks.iter().all(|c| c.passed)
    }
}

/// Certificates at every good place `≤ bound`, ascending.
pub fn certify_places(
    b: &GlobalModule,
    lattice: &TraceZeroLattice,
    bound: u64,
    caps: Caps,
) -> Result<Vec<PlaceCertification>> {
    b.good_places(bound)
        .par_iter()
        .map(|&p| {
            let (g, pbar, ambient_order) = reduced_components(b, lattice, p, caps)?;
            let result = fixing_matrix_in(&g, &pbar, p)?;
            let checks = result.certificate().map(|c| c.verify()).unwrap_or_default();
            Ok(PlaceCertification {
                place: p,
                ambient_order,
                result,
                checks,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionSearch {
    /// Least good place with `P̄ ∉ Λ̄`.
    pub witness: Option<u64>,
    pub searched_bound: u64,
    pub places_checked: usize,
}

/// Smallest good place `v ≤ bound` where `r_v(P) ∉ ⟨r_v(gens)⟩`.
pub fn find_local_obstruction(
    b: &GlobalModule,
    p: &GlobalPoint,
    gens: &[GlobalPoint],
    bound: u64,
    caps: Caps,
) -> Result<ObstructionSearch> {
    b.validate(p)?;
    gens.iter().try_for_each(|g| b.validate(g))?;
    let places = b.good_places(bound);
    let mut checked = 0;
    for chunk in places.chunks(OBSTRUCTION_CHUNK) {
        let misses = chunk
            .par_iter()
            .map(|&v| {
                let image = b.local_image(v, caps)?;
                let lam: Vec<Element> = gens.iter().map(|g| b.reduce_in(&image, g)).collect();
                let q = Quotient::new(image.group(), &lam)?;
                Ok(!q.contains(&b.reduce_in(&image, p)))
            })
            .collect::<Result<Vec<bool>>>()?;
        if let Some(k) = misses.iter().position(|&m| m) {
            return Ok(ObstructionSearch {
                witness: Some(chunk[k]),
                searched_bound: bound,
                places_checked: checked + k + 1,
            });
        }
        checked += chunk.len();
    }
    Ok(ObstructionSearch {
        witness: None,
        searched_bound: bound,
        places_checked: checked,
    })
}

/// Enumerative oracle for [`decide_membership_in`], sharing no code with
/// the solver. Row `i` of `M` can be completed exactly when
/// `(m_ii − 1)·P̄_i` lies in the span of the other components, which is
/// listed by closure; a subset-sum pass over residues mod the exponent
/// then looks for a diagonal with trace 0. Any residue lifts to a trace
/// that is exactly 0 by shifting one diagonal entry by a multiple of the
/// exponent. Cost is about `e·|G|·(rank + exponent)`.
pub fn brute_force_membership(g: &FiniteAbelianGroup, pbar: &[Element]) -> bool {
    let e = pbar.len();
    let n = g.exponent();
    let mut reachable = vec![false; n as usize];
    reachable[0] = true;
    for i in 0..e {
        let others: Vec<&Element> = (0..e).filter(|&j| j != i).map(|j| &pbar[j]).collect();
        let span = span_closure(g, &others);
        let allowed: Vec<u64> = (0..n)
            .filter(|&m| span.contains(&g.scale(&(BigInt::from(m) - 1), &pbar[i])))
            .collect();
        let mut next = vec![false; n as usize];
        for (s, _) in reachable.iter().enumerate().filter(|(_, &r)| r) {
            for &m in &allowed {
                next[((s as u64 + m) % n) as usize] = true;
            }
        }
        reachable = next;
    }
    reachable[0]
}

fn span_closure(g: &FiniteAbelianGroup, gens: &[&Element]) -> std::collections::HashSet<Element> {
    let mut seen = std::collections::HashSet::from([g.identity()]);
    let mut frontier = vec![g.identity()];
    while let Some(x) = frontier.pop() {
        for &s in gens {
            let y = g.add(&x, s);
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen
}

/// `Σ a_i·α_i` as a plain integer, for summaries.
pub fn bezout_sum(c: &FixingMatrixCertificate) -> Option<i64> {
    c.bezout
        .iter()
        .zip(&c.alphas)
        .map(|(a, &al)| a * BigInt::from(al))
        .sum::<BigInt>()
        .to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(g: &FiniteAbelianGroup, c: &[u64]) -> Element {
        g.element(c.to_vec()).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn z5_certificate_matches_worked_example() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let pbar = [el(&g, &[1]), el(&g, &[2]), el(&g, &[3])];
        let FixingOutcome::Certificate(c) = fixing_matrix_in(&g, &pbar, 0).unwrap() else {
            panic!("expected a certificate");
        };
        assert_eq!(c.alphas, vec![1, 1, 1]);
        assert_eq!(
            c.relations,
            IntMatrix::from_rows(&[vec![1, 2, 0], vec![3, 1, 0], vec![2, 0, 1]])
        );
        assert_eq!(c.bezout, big(&[1, 1, 1]));
        assert_eq!(
            c.matrix,
            IntMatrix::from_rows(&[vec![0, -2, 0], vec![-3, 0, 0], vec![-2, 0, 0]])
        );
        assert!(c.is_valid());
        assert!(decide_membership_in(&g, &pbar).unwrap().is_some());
        assert!(brute_force_membership(&g, &pbar));
    }

    #[test]
    fn zero_vector_gets_zero_matrix() {
        let g = FiniteAbelianGroup::cyclic(7).unwrap();
        let pbar = vec![g.identity(); 3];
        let FixingOutcome::Certificate(c) = fixing_matrix_in(&g, &pbar, 0).unwrap() else {
            panic!("expected a certificate");
        };
        assert!(c.matrix.is_zero());
        assert!(c.is_valid());
        assert!(decide_membership_in(&g, &pbar).unwrap().is_some());
    }

    #[test]
    fn cyclic_four_instance_succeeds() {
        // α = (2, 1): 2·1 ∈ ⟨2⟩ and 2 ∈ ⟨1⟩, so the gcd is 1.
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let pbar = [el(&g, &[1]), el(&g, &[2])];
        let out = fixing_matrix_in(&g, &pbar, 0).unwrap();
        let c = out.certificate().expect("certificate");
        assert_eq!(c.alphas, vec![2, 1]);
        assert!(c.is_valid());
        assert!(brute_force_membership(&g, &pbar));
    }

    #[test]
    fn independent_pair_in_z3_squared_fails_and_is_not_member() {
        let g = FiniteAbelianGroup::new(vec![3, 3]).unwrap();
        let pbar = [el(&g, &[1, 0]), el(&g, &[0, 1])];
        assert_eq!(
            fixing_matrix_in(&g, &pbar, 0).unwrap(),
            FixingOutcome::MethodFailure {
                place: 0,
                alphas: vec![3, 3],
                gcd: 3
            }
        );
        assert!(decide_membership_in(&g, &pbar).unwrap().is_none());
        assert!(!brute_force_membership(&g, &pbar));
    }

    #[test]
    fn independent_pair_in_z2_squared_fails_but_is_member() {
        // M = diag(1, −1) has trace 0 and fixes everything of exponent 2.
        let g = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let pbar = [el(&g, &[1, 0]), el(&g, &[0, 1])];
        assert!(matches!(
            fixing_matrix_in(&g, &pbar, 0).unwrap(),
            FixingOutcome::MethodFailure { gcd: 2, .. }
        ));
        assert!(decide_membership_in(&g, &pbar).unwrap().is_some());
        assert!(brute_force_membership(&g, &pbar));
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let pbar = [el(&g, &[1]), el(&g, &[2]), el(&g, &[3])];
        let out = fixing_matrix_in(&g, &pbar, 0).unwrap();
        let mut c = out.certificate().unwrap().clone();
        c.matrix = IntMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -2]]);
        assert!(!c.is_valid());
        let mut c2 = out.certificate().unwrap().clone();
        c2.pbar[0] = el(&g, &[4]);
        assert!(!c2.is_valid());
    }

    #[test]
    fn bezout_hits_target_and_shrinks() {
        let a = big(&[6, 10, 15]);
        let x = bezout_for(&a, &BigInt::from(3)).unwrap();
        let s: BigInt = x.iter().zip(&a).map(|(p, q)| p * q).sum();
        assert_eq!(s, BigInt::from(3));
        assert_eq!(bezout_for(&big(&[1, 1, 1]), &BigInt::from(3)).unwrap(), big(&[1, 1, 1]));
        assert_eq!(bezout_for(&big(&[2, 4]), &BigInt::from(3)), None);
    }

    #[test]
    fn lattice_tagging_and_dependence() {
        let b = crate::reduction::tests_support::rank3();
        let gens: Vec<_> = (0..3).map(|i| b.generator(i)).collect();
        let l = build_counterexample(&b, gens.clone()).unwrap();
        assert!(l.tagged);
        assert!(l.dependence.is_none());
        let l2 = build_counterexample(&b, gens[..2].to_vec()).unwrap();
        assert!(!l2.tagged);
        let dup = build_counterexample(&b, vec![gens[0].clone(), gens[0].clone()]).unwrap();
        assert_eq!(dup.dependence, Some(big(&[1, -1])));
        assert!(build_counterexample(&b, vec![gens[0].clone()]).is_err());
    }

    #[test]
    fn global_membership_cases() {
        let b = crate::reduction::tests_support::rank3();
        let gens: Vec<_> = (0..3).map(|i| b.generator(i)).collect();
        let l = build_counterexample(&b, gens.clone()).unwrap();
        let m = global_membership(&l).unwrap();
        assert!(!m.member);
        assert!(m.reason.contains("independence"));

        let dup = build_counterexample(&b, vec![gens[0].clone(), gens[0].clone()]).unwrap();
        let m = global_membership(&dup).unwrap();
        assert!(m.member);
        assert_eq!(m.witness.unwrap(), IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]));

        let zero = build_counterexample(&b, vec![b.zero(), b.zero()]).unwrap();
        let m = global_membership(&zero).unwrap();
        assert!(m.member);
        assert!(m.witness.unwrap().is_zero());
    }

    #[test]
    fn rank3_certificates_at_small_places() {
        let b = crate::reduction::tests_support::rank3();
        let gens: Vec<_> = (0..3).map(|i| b.generator(i)).collect();
        let l = build_counterexample(&b, gens).unwrap();
        let certs = certify_places(&b, &l, 60, Caps::default()).unwrap();
        assert!(!certs.is_empty());
        for c in &certs {
            assert!(c.passed(), "place {}", c.place);
            let d = decide_local_membership_exact(&b, &l, c.place, Caps::default()).unwrap();
            assert!(d.member);
        }
    }

    #[test]
    fn obstruction_for_p3_outside_p1() {
        let b = crate::reduction::tests_support::rank3();
        let s = find_local_obstruction(&b, &b.generator(2), &[b.generator(0)], 100, Caps::default()).unwrap();
        assert_eq!(s.witness, Some(5));
        let two_p1 = b.free_point(&[2, 0, 0]).unwrap();
        let s = find_local_obstruction(&b, &two_p1, &[b.generator(0)], 300, Caps::default()).unwrap();
        assert_eq!(s.witness, None);
        assert_eq!(s.places_checked, b.good_places(300).len());
    }
}
