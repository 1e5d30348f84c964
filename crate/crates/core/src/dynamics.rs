//! Orbits `{φⁿ(P) : n ≥ 0}` of a linear endomorphism, globally and modulo
//! places, and the harness comparing the two.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_abelian::{subgroup_membership, Element, FiniteAbelianGroup, Quotient};
use crate::reduction::{Caps, GlobalModule, GlobalPoint, LocalImage};
use crate::zmodule::{solve_mod, IntMatrix};

/// Random points per place used to spot-check that `φ` commutes with
/// reduction.
const SPOT_CHECKS: usize = 4;
const SPOT_RANGE: i64 = 50;

/// A Z-linear endomorphism of `B`. The matrix form acts on free
/// coordinates and fixes the torsion part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndoMap {
    Scalar { m: i64 },
    Matrix { matrix: IntMatrix },
}

impl EndoMap {
    pub fn scalar(m: i64) -> Result<Self> {
        if m.abs() < 2 {
            return Err(Error::input(format!("multiplication map needs |m| ≥ 2, got {m}")));
        }
        Ok(EndoMap::Scalar { m })
    }

    pub fn matrix(b: &GlobalModule, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows() != b.rank() || matrix.cols() != b.rank() {
            return Err(Error::input(format!(
                "endomorphism matrix is {}×{}, module rank is {}",
                matrix.rows(),
                matrix.cols(),
                b.rank()
            )));
        }
        Ok(EndoMap::Matrix { matrix })
    }

    pub fn apply(&self, b: &GlobalModule, p: &GlobalPoint) -> GlobalPoint {
        match self {
            EndoMap::Scalar { m } => b.scale(&BigInt::from(*m), p),
            EndoMap::Matrix { matrix } => GlobalPoint {
                free: matrix.mul_vec(&p.free),
                torsion: p.torsion.clone(),
            },
        }
    }

    /// Same action on a coefficient vector over free then torsion generators.
    fn apply_coeffs(&self, rank: usize, c: &[BigInt]) -> Vec<BigInt> {
        match self {
            EndoMap::Scalar { m } => c.iter().map(|x| x * m).collect(),
            EndoMap::Matrix { matrix } => {
                let mut out = matrix.mul_vec(&c[..rank]);
                out.extend_from_slice(&c[rank..]);
                out
            }
        }
    }

    /// The induced map on the local image, as images of the basis vectors
    /// of its invariant-factor group. Fails when `φ` does not preserve the
    /// relations at this place.
    pub fn local(&self, b: &GlobalModule, image: &LocalImage) -> Result<LocalEndo> {
        let g = image.group();
        let pres = &image.presentation;
        if let EndoMap::Scalar { m } = self {
            let images = (0..g.rank()).map(|k| g.scale(&BigInt::from(*m), &unit(g, k))).collect();
            return Ok(LocalEndo { images });
        }
        for r in pres.relations.to_rows() {
            if !pres.combine(&self.apply_coeffs(b.rank(), &r)).is_zero() {
                return Err(Error::input(format!(
                    "endomorphism does not descend to place {}",
                    image.place
                )));
            }
        }
        let images = (0..g.rank())
            .map(|k| {
                let c = subgroup_membership(g, &unit(g, k), &pres.point_coords)?
                    .expect("the points generate the presented group");
                Ok(pres.combine(&self.apply_coeffs(b.rank(), &c)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalEndo { images })
    }
}

fn unit(g: &FiniteAbelianGroup, k: usize) -> Element {
    let mut c = vec![0u64; g.rank()];
    c[k] = 1;
    g.element(c).expect("unit vector")
}

/// A group endomorphism of `Z/d₁ × … × Z/d_r`, given by the images of the
/// basis vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalEndo {
    pub images: Vec<Element>,
}

impl LocalEndo {
    pub fn apply(&self, g: &FiniteAbelianGroup, x: &Element) -> Element {
        let c: Vec<BigInt> = x.coords().iter().map(|&v| BigInt::from(v)).collect();
        g.combine(&c, &self.images)
    }

    /// Checks that the images are well defined: `d_k·image_k = 0`.
    pub fn validate(&self, g: &FiniteAbelianGroup) -> Result<()> {
        if self.images.len() != g.rank() {
            return Err(Error::input("endomorphism needs one image per invariant factor"));
        }
        for (x, &d) in self.images.iter().zip(g.invariants()) {
            g.validate(x)?;
            if !g.scale_u64(d, x).is_zero() {
                return Err(Error::input(format!("image {x} is not killed by {d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitModV {
    pub preperiod: usize,
    pub cycle_length: usize,
    /// The distinct orbit elements in order; step `preperiod + cycle_length`
    /// returns to step `preperiod`.
    pub visited: Vec<Element>,
    /// Least `n` with `φⁿ(P̄) ∈ Λ̄`.
    pub first_hit: Option<usize>,
}

impl OrbitModV {
    /// The element at step `n` of the eventually periodic orbit.
    pub fn at(&self, n: usize) -> &Element {
        if n < self.preperiod {
            &self.visited[n]
        } else {
            &self.visited[self.preperiod + (n - self.preperiod) % self.cycle_length]
        }
    }
}

/// Full orbit of `start` under `phi`, with the first step landing in
/// `⟨lambda⟩`.
pub fn orbit_in(g: &FiniteAbelianGroup, phi: &LocalEndo, start: &Element, lambda: &[Element]) -> Result<OrbitModV> {
    phi.validate(g)?;
    g.validate(start)?;
    let q = Quotient::new(g, lambda)?;
    let mut seen: HashMap<Element, usize> = HashMap::new();
    let mut visited = Vec::new();
    let mut x = start.clone();
    let (preperiod, cycle_length) = loop {
        if let Some(&i) = seen.get(&x) {
            break (i, visited.len() - i);
        }
        seen.insert(x.clone(), visited.len());
        let next = phi.apply(g, &x);
        visited.push(x);
        x = next;
    };
    // Membership along the cycle repeats, so tail plus one cycle suffices.
    let first_hit = visited.iter().position(|y| q.contains(y));
    Ok(OrbitModV {
        preperiod,
        cycle_length,
        visited,
        first_hit,
    })
}

pub fn orbit_mod_v(
    b: &GlobalModule,
    phi: &EndoMap,
    p: &GlobalPoint,
    lambda: &[GlobalPoint],
    place: u64,
    caps: Caps,
) -> Result<OrbitModV> {
    let image = b.local_image(place, caps)?;
    let endo = phi.local(b, &image)?;
    let lam: Vec<Element> = lambda.iter().map(|x| b.reduce_in(&image, x)).collect();
    orbit_in(image.group(), &endo, &b.reduce_in(&image, p), &lam)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalHit {
    pub n: usize,
    /// Coefficients `c` with `φⁿ(P) = Σ c_j·lambda[j]`.
    #[serde(with = "crate::bigint_serde::vec")]
    pub coefficients: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalOrbitResult {
    pub hit: Option<GlobalHit>,
    pub searched_steps: usize,
}

/// Exact membership of `q` in `⟨lambda⟩ ⊂ B`, torsion included.
pub fn global_member(b: &GlobalModule, q: &GlobalPoint, lambda: &[GlobalPoint]) -> Result<Option<Vec<BigInt>>> {
    let rho = b.rank();
    let tors = b.torsion_group();
    let rows = rho + tors.rank();
    if lambda.is_empty() {
        let zero = q.free.iter().all(Zero::is_zero) && q.torsion.is_zero();
        return Ok(zero.then(Vec::new));
    }
    let mut a = IntMatrix::zeros(rows, lambda.len());
    for (j, g) in lambda.iter().enumerate() {
        for i in 0..rho {
            a[(i, j)] = g.free[i].clone();
        }
        for (k, &c) in g.torsion.coords().iter().enumerate() {
            a[(rho + k, j)] = BigInt::from(c);
        }
    }
    let mut rhs = q.free.clone();
    rhs.extend(q.torsion.coords().iter().map(|&c| BigInt::from(c)));
    let mut moduli = vec![BigInt::zero(); rho];
    moduli.extend(tors.invariants().iter().map(|&d| BigInt::from(d)));
    solve_mod(&a, &rhs, &moduli)
}

/// Least `n ≤ step_bound` with `φⁿ(P) ∈ ⟨lambda⟩`.
pub fn global_orbit_intersection(
    b: &GlobalModule,
    phi: &EndoMap,
    p: &GlobalPoint,
    lambda: &[GlobalPoint],
    step_bound: usize,
) -> Result<GlobalOrbitResult> {
    b.validate(p)?;
    lambda.iter().try_for_each(|g| b.validate(g))?;
    let mut q = p.clone();
    for n in 0..=step_bound {
        if let Some(coefficients) = global_member(b, &q, lambda)? {
            return Ok(GlobalOrbitResult {
                hit: Some(GlobalHit { n, coefficients }),
                searched_steps: step_bound,
            });
        }
        q = phi.apply(b, &q);
    }
    Ok(GlobalOrbitResult {
        hit: None,
        searched_steps: step_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    InconsistentAnomaly,
    /// Every place hits but the global search missed within its bound.
    Inconclusive,
    PreconditionViolated,
}

/// Everything needed to recheck one place's orbit without the module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceOrbit {
    pub place: u64,
    pub group: FiniteAbelianGroup,
    pub endo: LocalEndo,
    pub start: Element,
    pub lambda: Vec<Element>,
    pub torsion_injective: bool,
    pub commutes: bool,
    pub orbit: OrbitModV,
}

impl PlaceOrbit {
    /// Recomputes the orbit from the recorded data and compares.
    pub fn reverify(&self) -> bool {
        orbit_in(&self.group, &self.endo, &self.start, &self.lambda)
            .map(|o| o == self.orbit)
            .unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub places: Vec<PlaceOrbit>,
    pub global: GlobalOrbitResult,
    pub verdict: Verdict,
    pub precondition_failures: Vec<u64>,
    pub commutation_failures: Vec<u64>,
    /// Places whose orbit hit later than the global step, or not at all,
    /// despite a global hit.
    pub incompatible_places: Vec<u64>,
    pub local_misses: Vec<u64>,
}

impl DynamicsReport {
    pub fn first_miss(&self) -> Option<u64> {
        self.local_misses.first().copied()
    }

    /// The verdict implied by the recorded places and global result.
    pub fn recompute_verdict(&self) -> Verdict {
        verdict_for(self.global.hit.as_ref().map(|h| h.n), &self.places)
    }
}

fn verdict_for(global_n: Option<usize>, places: &[PlaceOrbit]) -> Verdict {
    if places.iter().any(|p| !p.torsion_injective) {
        return Verdict::PreconditionViolated;
    }
    if places.iter().any(|p| !p.commutes) {
        return Verdict::InconsistentAnomaly;
    }
    match global_n {
        Some(n) if places.iter().all(|p| p.orbit.first_hit.is_some_and(|k| k <= n)) => Verdict::Consistent,
        Some(_) => Verdict::InconsistentAnomaly,
        None if places.iter().any(|p| p.orbit.first_hit.is_none()) => Verdict::Consistent,
        None => Verdict::Inconclusive,
    }
}

/// Compares the global orbit search with orbits at every good place
/// `≤ place_bound`. `seed` drives the random commutation spot checks.
#[allow(clippy::too_many_arguments)]
pub fn dynamical_lgp_experiment(
    b: &GlobalModule,
    phi: &EndoMap,
    p: &GlobalPoint,
    lambda: &[GlobalPoint],
    place_bound: u64,
    step_bound: usize,
    seed: u64,
    caps: Caps,
) -> Result<DynamicsReport> {
    let global = global_orbit_intersection(b, phi, p, lambda, step_bound)?;
    let places = b.good_places(place_bound);
    let records = places
        .par_iter()
        .map(|&v| {
            let image = b.local_image(v, caps)?;
            let g = image.group();
            let endo = phi.local(b, &image)?;
            let start = b.reduce_in(&image, p);
            let lam: Vec<Element> = lambda.iter().map(|x| b.reduce_in(&image, x)).collect();
            let orbit = orbit_in(g, &endo, &start, &lam)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ v);
            let commutes = (0..SPOT_CHECKS).all(|_| {
                let free = (0..b.rank())
                    .map(|_| BigInt::from(rng.gen_range(-SPOT_RANGE..=SPOT_RANGE)))
                    .collect();
                let torsion = b
                    .torsion_group()
                    .invariants()
                    .iter()
                    .map(|&d| rng.gen_range(0..d))
                    .collect();
                let q = b.point(free, torsion).expect("valid random point");
                b.reduce_in(&image, &phi.apply(b, &q)) == endo.apply(g, &b.reduce_in(&image, &q))
            }) && {
                // Along the orbit itself: r_v(φⁿ(P)) = φⁿ(r_v(P)).
                let mut q = p.clone();
                (0..=step_bound).all(|n| {
                    let ok = b.reduce_in(&image, &q) == *orbit.at(n);
                    q = phi.apply(b, &q);
                    ok
                })
            };
            Ok(PlaceOrbit {
                place: v,
                group: g.clone(),
                endo,
                start,
                lambda: lam,
                torsion_injective: b.torsion_injective_in(&image),
                commutes,
                orbit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let global_n = global.hit.as_ref().map(|h| h.n);
    let verdict = verdict_for(global_n, &records);
    let pick = |f: &dyn Fn(&PlaceOrbit) -> bool| records.iter().filter(|r| f(r)).map(|r| r.place).collect();
    Ok(DynamicsReport {
        precondition_failures: pick(&|r| !r.torsion_injective),
        commutation_failures: pick(&|r| !r.commutes),
        incompatible_places: match global_n {
            Some(n) => pick(&|r| !r.orbit.first_hit.is_some_and(|k| k <= n)),
            None => Vec::new(),
        },
        local_misses: pick(&|r| r.orbit.first_hit.is_none()),
        places: records,
        global,
        verdict,
    })
}
