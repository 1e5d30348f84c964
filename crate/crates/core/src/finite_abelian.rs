//! Finite abelian groups in invariant-factor form `Z/d₁ × … × Z/d_r` with
//! `d₁ | d₂ | … | d_r`.
//!
//! Every local group `B_v` in the crate is one of these: reduced curve
//! points are turned into coordinates by [`presentation_from_points`], and
//! from then on all membership and relation questions are exact integer
//! linear algebra over the invariant factors.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmodule::{smith_normal_form, solve_mod, IntMatrix};

/// Default cap on the order of a subgroup enumerated by
/// [`presentation_from_points`].
pub const DEFAULT_SUBGROUP_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    invariants: Vec<u64>,
}

/// Coordinates of a group element, one per invariant factor, each in
/// `[0, d_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(Vec<u64>);

impl Element {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(invariants: Vec<u64>) -> Result<Self> {
        FiniteAbelianGroup::new(invariants)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.invariants
    }
}

fn mod_big(x: &BigInt, d: u64) -> u64 {
    x.mod_floor(&BigInt::from(d)).to_u64().expect("residue fits in u64")
}

impl FiniteAbelianGroup {
    /// Validates the divisibility chain; every factor must be at least 2.
    pub fn new(invariants: Vec<u64>) -> Result<Self> {
        if let Some(bad) = invariants.iter().find(|&&d| d < 2) {
            return Err(Error::input(format!("invariant factor {bad} is below 2")));
        }
        if let Some(w) = invariants.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::input(format!(
                "invariant factors {} and {} break the divisibility chain",
                w[0], w[1]
            )));
        }
        let g = FiniteAbelianGroup { invariants };
        g.checked_order()
            .ok_or_else(|| Error::input("group order overflows u64"))?;
        Ok(g)
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariants: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 1 {
            return Ok(Self::trivial());
        }
        Self::new(vec![n])
    }

    /// Normalizes an arbitrary product `Z/n₁ × … × Z/n_k` (each `n_i ≥ 1`)
    /// into invariant-factor form.
    pub fn from_cyclic_factors(factors: &[u64]) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::input("cyclic factor 0 describes an infinite group"));
        }
        let snf = smith_normal_form(&IntMatrix::diagonal(factors));
        let invariants = snf
            .diagonal()
            .iter()
            .map(|d| d.to_u64().expect("factor fits"))
            .filter(|&d| d > 1)
            .collect();
        Self::new(invariants)
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    fn checked_order(&self) -> Option<u64> {
        self.invariants.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d))
    }

    pub fn order(&self) -> u64 {
        self.checked_order().expect("order validated on construction")
    }

    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    pub fn identity(&self) -> Element {
        Element(vec![0; self.rank()])
    }

    /// Checked constructor: coordinates must already be canonical.
    pub fn element(&self, coords: Vec<u64>) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(Error::input(format!(
                "element has {} coordinates, group has {} invariant factors",
                coords.len(),
                self.rank()
            )));
        }
        if let Some((c, d)) = coords.iter().zip(&self.invariants).find(|(c, d)| c >= d) {
            return Err(Error::input(format!("coordinate {c} out of range for Z/{d}")));
        }
        Ok(Element(coords))
    }

    /// Reduces arbitrary integer coordinates.
    pub fn element_reduced(&self, coords: &[BigInt]) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(Error::input("coordinate count does not match the group"));
        }
        Ok(Element(
            coords
                .iter()
                .zip(&self.invariants)
                .map(|(c, &d)| mod_big(c, d))
                .collect(),
        ))
    }

    pub fn validate(&self, x: &Element) -> Result<()> {
        self.element(x.0.clone()).map(|_| ())
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.invariants)
                .map(|((a, b), d)| ((*a as u128 + *b as u128) % *d as u128) as u64)
                .collect(),
        )
    }

    pub fn neg(&self, x: &Element) -> Element {
        Element(x.0.iter().zip(&self.invariants).map(|(a, d)| (d - a) % d).collect())
    }

    pub fn scale(&self, k: &BigInt, x: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&self.invariants)
                .map(|(a, &d)| {
                    let k = mod_big(k, d) as u128;
                    ((k * *a as u128) % d as u128) as u64
                })
                .collect(),
        )
    }

    pub fn scale_u64(&self, k: u64, x: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&self.invariants)
                .map(|(a, &d)| ((k as u128 % d as u128) * *a as u128 % d as u128) as u64)
                .collect(),
        )
    }

    /// `Σ coeffs[j]·elems[j]`.
    pub fn combine(&self, coeffs: &[BigInt], elems: &[Element]) -> Element {
        assert_eq!(coeffs.len(), elems.len(), "coefficient count mismatch");
        coeffs
            .iter()
            .zip(elems)
            .fold(self.identity(), |acc, (c, e)| self.add(&acc, &self.scale(c, e)))
    }

    /// All elements, in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let n = self.order();
        (0..n).map(move |mut idx| {
            let mut coords = vec![0; self.rank()];
            for i in (0..self.rank()).rev() {
                coords[i] = idx % self.invariants[i];
                idx /= self.invariants[i];
            }
            Element(coords)
        })
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "0");
        }
        for (i, d) in self.invariants.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "Z/{d}")?;
        }
        Ok(())
    }
}

/// Smallest `n ≥ 1` with `n·x = 0`.
pub fn element_order(g: &FiniteAbelianGroup, x: &Element) -> Result<u64> {
    g.validate(x)?;
    Ok(x.0
        .iter()
        .zip(&g.invariants)
        .fold(1u64, |acc, (&c, &d)| acc.lcm(&(d / c.gcd(&d)))))
}

fn validate_all(g: &FiniteAbelianGroup, x: &Element, gens: &[Element]) -> Result<()> {
    g.validate(x)?;
    gens.iter().try_for_each(|e| g.validate(e))
}

/// Solves `Σ c_j·gens[j] = x` for the canonical `c`, or reports absence.
pub fn subgroup_membership(g: &FiniteAbelianGroup, x: &Element, gens: &[Element]) -> Result<Option<Vec<BigInt>>> {
    validate_all(g, x, gens)?;
    solve_in_span(g, x, gens)
}

fn solve_in_span(g: &FiniteAbelianGroup, x: &Element, gens: &[Element]) -> Result<Option<Vec<BigInt>>> {
    if x.is_zero() {
        return Ok(Some(vec![BigInt::zero(); gens.len()]));
    }
    if gens.is_empty() {
        return Ok(None);
    }
    let r = g.rank();
    let mut a = IntMatrix::zeros(r, gens.len());
    for (j, e) in gens.iter().enumerate() {
        for i in 0..r {
            a[(i, j)] = BigInt::from(e.0[i]);
        }
    }
    let b: Vec<BigInt> = x.0.iter().map(|&c| BigInt::from(c)).collect();
    let moduli: Vec<BigInt> = g.invariants.iter().map(|&d| BigInt::from(d)).collect();
    solve_mod(&a, &b, &moduli)
}

/// Outcome of [`minimal_multiple_in_subgroup`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalMultiple {
    /// Least `α ≥ 1` with `α·x ∈ ⟨gens⟩`.
    pub alpha: u64,
    /// `c` with `α·x + Σ c_j·gens[j] = 0`.
    pub relation: Vec<BigInt>,
}

pub(crate) fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n.is_multiple_of(i) {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Least multiple of `x` that falls in `⟨gens⟩`, with the canonical
/// relation witnessing it.
///
/// Membership of `α·x` is monotone along the divisor lattice of `ord(x)`,
/// so only divisors of the order are tried, in increasing order.
pub fn minimal_multiple_in_subgroup(g: &FiniteAbelianGroup, x: &Element, gens: &[Element]) -> Result<MinimalMultiple> {
    validate_all(g, x, gens)?;
    let order = element_order(g, x)?;
    let quotient = Quotient::new(g, gens)?;
    let alpha = divisors(order)
        .into_iter()
        .find(|&a| quotient.contains(&g.scale_u64(a, x)))
        .expect("ord(x)·x = 0 always lies in the subgroup");
    let target = g.neg(&g.scale_u64(alpha, x));
    let relation = solve_in_span(g, &target, gens)?.expect("quotient test and solver disagree on membership");
    Ok(MinimalMultiple { alpha, relation })
}

/// Projection `G → G/⟨gens⟩`, used as a fast membership test.
#[derive(Clone, Debug)]
pub struct Quotient {
    group: FiniteAbelianGroup,
    quotient_invariants: Vec<u64>,
    // projection[i][k]: contribution of G-coordinate i to quotient coordinate k
    projection: Vec<Vec<u64>>,
}

impl Quotient {
    pub fn new(g: &FiniteAbelianGroup, gens: &[Element]) -> Result<Self> {
        gens.iter().try_for_each(|e| g.validate(e))?;
        let r = g.rank();
        let mut rel = IntMatrix::zeros(r + gens.len(), r);
        for (i, &d) in g.invariants.iter().enumerate() {
            rel[(i, i)] = BigInt::from(d);
        }
        for (j, e) in gens.iter().enumerate() {
            for i in 0..r {
                rel[(r + j, i)] = BigInt::from(e.0[i]);
            }
        }
        let snf = smith_normal_form(&rel);
        let mut quotient_invariants = Vec::new();
        let mut keep = Vec::new();
        for k in 0..r {
            let d = snf.d[(k, k)].to_u64().expect("quotient factor fits");
            if d > 1 {
                quotient_invariants.push(d);
                keep.push(k);
            }
        }
        let projection = (0..r)
            .map(|i| {
                keep.iter()
                    .zip(&quotient_invariants)
                    .map(|(&k, &d)| mod_big(&snf.v[(i, k)], d))
                    .collect()
            })
            .collect();
        Ok(Quotient {
            group: g.clone(),
            quotient_invariants,
            projection,
        })
    }

    pub fn project(&self, x: &Element) -> Vec<u64> {
        self.quotient_invariants
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let s: u128 =
                    x.0.iter()
                        .zip(&self.projection)
                        .map(|(&c, row)| c as u128 * row[k] as u128 % d as u128)
                        .sum();
                (s % d as u128) as u64
            })
            .collect()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.project(x).iter().all(|&c| c == 0)
    }

    pub fn index(&self) -> u64 {
        self.quotient_invariants.iter().product()
    }

    pub fn subgroup_order(&self) -> u64 {
        self.group.order() / self.index()
    }
}

/// Order of `⟨gens⟩` inside `g`.
pub fn subgroup_order(g: &FiniteAbelianGroup, gens: &[Element]) -> Result<u64> {
    Ok(Quotient::new(g, gens)?.subgroup_order())
}

/// Group arithmetic supplied from outside, e.g. points on a curve over a
/// prime field.
pub trait BlackBoxGroup {
    type Elem: Clone + Eq + Hash;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Upper bound on the exponent of the ambient group.
    fn exponent_bound(&self) -> u64;
}

impl BlackBoxGroup for FiniteAbelianGroup {
    type Elem = Element;

    fn identity(&self) -> Element {
        FiniteAbelianGroup::identity(self)
    }

    fn op(&self, a: &Element, b: &Element) -> Element {
        self.add(a, b)
    }

    fn exponent_bound(&self) -> u64 {
        self.exponent()
    }
}

/// The subgroup generated by some points, in invariant-factor coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub group: FiniteAbelianGroup,
    /// Coordinates of each input point in `group`.
    pub point_coords: Vec<Element>,
    /// Generating relations among the input points, one per row:
    /// `Σ_j rows[i][j]·points[j] = 0`. Lower triangular.
    pub relations: IntMatrix,
}

/// Computes the relation lattice of `points` and presents the subgroup
/// they generate.
///
/// Point `j` gets the relation `m_j·Q_j = (combination of Q_0..Q_{j-1})`
/// for the least such `m_j`, found by walking multiples against an
/// enumeration of the subgroup generated so far. These triangular
/// relations generate all relations; their Smith form gives invariant
/// factors and coordinates. Coordinates are normalized per component so
/// that the first point with a unit coordinate there has coordinate 1.
pub fn presentation_from_points<G: BlackBoxGroup>(ambient: &G, points: &[G::Elem], cap: u64) -> Result<Presentation> {
    let k = points.len();
    let id = ambient.identity();
    let mut index: HashMap<G::Elem, Vec<u64>> = HashMap::new();
    index.insert(id.clone(), vec![0; k]);
    let mut members: Vec<(G::Elem, Vec<u64>)> = vec![(id, vec![0; k])];
    let mut relations = IntMatrix::zeros(k, k);
    let bound = ambient.exponent_bound();

    for (j, q) in points.iter().enumerate() {
        let mut acc = q.clone();
        let mut m = 1u64;
        let coeffs = loop {
            if let Some(c) = index.get(&acc) {
                break c.clone();
            }
            if m >= bound {
                return Err(Error::input(format!(
                    "point {j} has no multiple in the earlier span within the exponent bound {bound}"
                )));
            }
            acc = ambient.op(&acc, q);
            m += 1;
        };
        relations[(j, j)] = BigInt::from(m);
        for (i, &c) in coeffs.iter().enumerate().take(j) {
            relations[(j, i)] = -BigInt::from(c);
        }
        if m == 1 {
            continue;
        }
        let size = (members.len() as u64).saturating_mul(m);
        if size > cap {
            return Err(Error::Resource {
                what: format!("subgroup generated by {} points (order ≥ {size})", k),
                cap,
            });
        }
        let base = members.len();
        let mut shift = q.clone();
        for t in 1..m {
            for idx in 0..base {
                let (elem, coeffs) = &members[idx];
                let e = ambient.op(elem, &shift);
                let mut c = coeffs.clone();
                c[j] = t;
                index.insert(e.clone(), c.clone());
                members.push((e, c));
            }
            shift = ambient.op(&shift, q);
        }
    }

    present_relations(&relations)
}

/// Presents `Z^k / rowspan(relations)` for a full-rank relation matrix.
pub fn present_relations(relations: &IntMatrix) -> Result<Presentation> {
    let k = relations.cols();
    let snf = smith_normal_form(relations);
    if snf.rank() < k {
        return Err(Error::input("relation matrix does not describe a finite group"));
    }
    let mut invariants = Vec::new();
    let mut keep = Vec::new();
    for i in 0..k {
        let d = snf.d[(i, i)]
            .to_u64()
            .ok_or_else(|| Error::input("invariant factor exceeds u64"))?;
        if d > 1 {
            invariants.push(d);
            keep.push(i);
        }
    }
    let group = FiniteAbelianGroup::new(invariants)?;
    let mut coords: Vec<Vec<u64>> = (0..k)
        .map(|j| {
            keep.iter()
                .zip(group.invariants())
                .map(|(&i, &d)| mod_big(&snf.v[(j, i)], d))
                .collect()
        })
        .collect();

    // Per-component unit scaling is an automorphism; use it to make the
    // coordinates independent of the particular transform V.
    for (c, &d) in group.invariants().iter().enumerate() {
        let unit = coords.iter().map(|p| p[c]).find(|&x| x.gcd(&d) == 1);
        if let Some(u) = unit {
            let inv = BigInt::from(u)
                .modinv(&BigInt::from(d))
                .and_then(|x| x.to_u64())
                .expect("unit is invertible");
            for p in &mut coords {
                p[c] = ((p[c] as u128 * inv as u128) % d as u128) as u64;
            }
        }
    }

    Ok(Presentation {
        point_coords: coords.into_iter().map(Element).collect(),
        group,
        relations: relations.clone(),
    })
}

impl Presentation {
    /// Image of the integer combination `Σ coeffs[j]·points[j]`.
    pub fn combine(&self, coeffs: &[BigInt]) -> Element {
        self.group.combine(coeffs, &self.point_coords)
    }
}

/// Signed representative of `c mod d` in `(-d/2, d/2]`.
pub fn centered(c: u64, d: u64) -> BigInt {
    let c = BigInt::from(c);
    let d = BigInt::from(d);
    if &c * 2 > d {
        c - d
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(inv: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(inv.to_vec()).unwrap()
    }

    fn el(g: &FiniteAbelianGroup, c: &[u64]) -> Element {
        g.element(c.to_vec()).unwrap()
    }

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().copied().map(BigInt::from).collect()
    }

    #[test]
    fn rejects_broken_chain() {
        assert!(FiniteAbelianGroup::new(vec![4, 6]).is_err());
        assert!(FiniteAbelianGroup::new(vec![1]).is_err());
        assert_eq!(FiniteAbelianGroup::from_cyclic_factors(&[4, 6]).unwrap(), grp(&[2, 12]));
    }

    #[test]
    fn orders() {
        let g = grp(&[2, 6]);
        assert_eq!(element_order(&g, &el(&g, &[1, 2])).unwrap(), 6);
        assert_eq!(element_order(&g, &g.identity()).unwrap(), 1);
        let z12 = grp(&[12]);
        assert_eq!(element_order(&z12, &el(&z12, &[8])).unwrap(), 3);
    }

    #[test]
    fn out_of_range_coordinate() {
        let g = grp(&[12]);
        assert!(matches!(g.element(vec![12]), Err(Error::Input(_))));
        assert!(element_order(&g, &Element(vec![13])).is_err());
    }

    #[test]
    fn membership_examples() {
        let g = grp(&[12]);
        assert_eq!(
            subgroup_membership(&g, &el(&g, &[4]), &[el(&g, &[8])]).unwrap(),
            Some(big(&[2]))
        );
        assert_eq!(subgroup_membership(&g, &el(&g, &[1]), &[el(&g, &[8])]).unwrap(), None);
        assert_eq!(
            subgroup_membership(&g, &g.identity(), &[el(&g, &[8]), el(&g, &[3])]).unwrap(),
            Some(big(&[0, 0]))
        );
    }

    #[test]
    fn minimal_multiple_examples() {
        let g = grp(&[12]);
        let mm = minimal_multiple_in_subgroup(&g, &el(&g, &[2]), &[el(&g, &[8])]).unwrap();
        assert_eq!(
            mm,
            MinimalMultiple {
                alpha: 2,
                relation: big(&[1])
            }
        );

        let g5 = grp(&[5]);
        let mm = minimal_multiple_in_subgroup(&g5, &el(&g5, &[1]), &[el(&g5, &[2]), el(&g5, &[3])]).unwrap();
        assert_eq!(
            mm,
            MinimalMultiple {
                alpha: 1,
                relation: big(&[2, 0])
            }
        );

        let mm = minimal_multiple_in_subgroup(&g5, &g5.identity(), &[el(&g5, &[2])]).unwrap();
        assert_eq!(
            mm,
            MinimalMultiple {
                alpha: 1,
                relation: big(&[0])
            }
        );
    }

    #[test]
    fn presentation_of_z5_points() {
        let g = grp(&[5]);
        let pts = [el(&g, &[1]), el(&g, &[2]), el(&g, &[3])];
        let p = presentation_from_points(&g, &pts, DEFAULT_SUBGROUP_CAP).unwrap();
        assert_eq!(p.group, grp(&[5]));
        assert_eq!(p.point_coords, pts.to_vec());
    }

    #[test]
    fn presentation_of_klein_four() {
        let g = grp(&[2, 2]);
        let pts = [el(&g, &[1, 0]), el(&g, &[0, 1])];
        let p = presentation_from_points(&g, &pts, DEFAULT_SUBGROUP_CAP).unwrap();
        assert_eq!(p.group, grp(&[2, 2]));
    }

    #[test]
    fn presentation_single_generator() {
        let g = grp(&[10]);
        let p = presentation_from_points(&g, &[el(&g, &[3])], DEFAULT_SUBGROUP_CAP).unwrap();
        assert_eq!(p.group, grp(&[10]));
        assert_eq!(p.point_coords, vec![el(&g, &[1])]);
    }

    #[test]
    fn presentation_cap_is_loud() {
        let g = grp(&[1000]);
        let err = presentation_from_points(&g, &[el(&g, &[1])], 100).unwrap_err();
        match err {
            Error::Resource { cap, .. } => assert_eq!(cap, 100),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn quotient_index() {
        let g = grp(&[2, 12]);
        let q = Quotient::new(&g, &[el(&g, &[0, 4])]).unwrap();
        assert_eq!(q.subgroup_order(), 3);
        assert!(q.contains(&el(&g, &[0, 8])));
        assert!(!q.contains(&el(&g, &[1, 0])));
    }

    #[test]
    fn divisor_listing() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }
}
