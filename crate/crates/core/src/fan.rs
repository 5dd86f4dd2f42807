//! Rational polyhedral cones and fans.
//!
//! Cones are given by ray generators in `N = Z^n`; the inequality description
//! (covectors in `M`) is derived by enumerating candidate facets spanned by
//! subsets of generators, with exact rational kernels.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lattice::{dot, hermite_rows, primitive, IntMatrix, IntVector, LatticeError, Sublattice};
use crate::qmat::{primitive_integer, QMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("vector has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("cone contains a line (not strongly convex)")]
    NotStronglyConvex,
    #[error("cone index {0} out of range")]
    BadIndex(usize),
    #[error("maximal index {0} listed twice")]
    DuplicateMaximal(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A rational polyhedral cone.
///
/// Strongly convex cones store their primitive extremal rays in lexicographic
/// order, so two such cones are equal iff they are equal as point sets.
/// Cones that contain a line only arise as duals of lower-dimensional cones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cone {
    ambient_rank: usize,
    rays: Vec<IntVector>,
    /// Integer basis of the covectors vanishing on the cone's span.
    equations: Vec<IntVector>,
    /// Primitive inner facet normals.
    facets: Vec<IntVector>,
    strongly_convex: bool,
}

impl Cone {
    /// Strongly convex cone generated by `rays`; redundant generators are dropped.
    pub fn new(ambient_rank: usize, rays: Vec<IntVector>) -> Result<Cone, FanError> {
        for r in &rays {
            if r.len() != ambient_rank {
                return Err(FanError::Dimension {
                    expected: ambient_rank,
                    got: r.len(),
                });
            }
        }
        let cone = Cone::hull(ambient_rank, rays);
        if !cone.strongly_convex {
            return Err(FanError::NotStronglyConvex);
        }
        Ok(cone)
    }

    pub fn from_i64(ambient_rank: usize, rays: &[&[i64]]) -> Result<Cone, FanError> {
        Cone::new(ambient_rank, rays.iter().map(|r| crate::lattice::ivec(r)).collect())
    }

    pub fn zero(ambient_rank: usize) -> Cone {
        Cone::hull(ambient_rank, Vec::new())
    }

    /// Any finitely generated cone. Generators must have the right length.
    pub(crate) fn hull(ambient_rank: usize, gens: Vec<IntVector>) -> Cone {
        let gens: Vec<IntVector> = gens
            .iter()
            .filter_map(|g| primitive(g))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let (equations, facets) = inequalities(ambient_rank, &gens);
        let all: Vec<IntVector> = equations.iter().chain(&facets).cloned().collect();
        let strongly_convex = rank_of(ambient_rank, &all) == ambient_rank;
        let rays = if strongly_convex {
            // extremal iff the covectors tight on it cut out a line
            gens.into_iter()
                .filter(|g| {
                    let tight: Vec<IntVector> = all.iter().filter(|m| dot(m, g).is_zero()).cloned().collect();
                    rank_of(ambient_rank, &tight) + 1 == ambient_rank
                })
                .collect()
        } else {
            gens
        };
        Cone {
            ambient_rank,
            rays,
            equations,
            facets,
            strongly_convex,
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn equations(&self) -> &[IntVector] {
        &self.equations
    }

    pub fn facet_normals(&self) -> &[IntVector] {
        &self.facets
    }

    /// Inequality description: `v` is in the cone iff every returned covector is `>= 0` on `v`.
    pub fn h_representation(&self) -> Vec<IntVector> {
        let mut out = Vec::with_capacity(2 * self.equations.len() + self.facets.len());
        for e in &self.equations {
            out.push(e.clone());
            out.push(e.iter().map(|x| -x).collect());
        }
        out.extend(self.facets.iter().cloned());
        out
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.strongly_convex
    }

    pub fn is_zero(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ambient_rank - self.equations.len()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.ambient_rank, "dimension mismatch");
        self.equations.iter().all(|e| dot(e, v).is_zero()) && self.facets.iter().all(|m| !dot(m, v).is_negative())
    }

    /// `self ⊆ other` as point sets.
    pub fn is_subcone_of(&self, other: &Cone) -> bool {
        self.ambient_rank == other.ambient_rank && self.rays.iter().all(|r| other.contains(r))
    }

    /// Whether `self` is a face of `other` (both strongly convex).
    pub fn is_face_of(&self, other: &Cone) -> bool {
        if !self.is_subcone_of(other) {
            return false;
        }
        let tight: Vec<IntVector> = other
            .h_representation()
            .into_iter()
            .filter(|m| self.rays.iter().all(|r| dot(m, r).is_zero()))
            .collect();
        let smallest_face: Vec<&IntVector> = other
            .rays
            .iter()
            .filter(|r| tight.iter().all(|m| dot(m, r).is_zero()))
            .collect();
        smallest_face.len() == self.rays.len() && smallest_face.iter().zip(&self.rays).all(|(a, b)| *a == b)
    }

    /// All faces, including the cone itself and the zero cone.
    pub fn faces(&self) -> BTreeSet<Cone> {
        let mut out = BTreeSet::new();
        self.collect_faces(&mut out);
        out
    }

    fn collect_faces(&self, out: &mut BTreeSet<Cone>) {
        if !out.insert(self.clone()) {
            return;
        }
        for m in &self.facets {
            let rays = self.rays.iter().filter(|r| dot(m, r).is_zero()).cloned().collect();
            Cone::hull(self.ambient_rank, rays).collect_faces(out);
        }
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cone{{")?;
        for (i, r) in self.rays.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({})", r.iter().join(","))?;
        }
        write!(f, "}}")
    }
}

fn rank_of(ambient_rank: usize, vecs: &[IntVector]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    IntMatrix::from_rows(ambient_rank, vecs.to_vec())
        .expect("uniform width")
        .rank()
}

/// Saturated integer basis (Hermite form) of `{m : <m, v> = 0 for all v in vecs}`.
pub(crate) fn orthogonal_basis(ambient_rank: usize, vecs: &[IntVector]) -> Vec<IntVector> {
    if vecs.is_empty() {
        return IntMatrix::identity(ambient_rank).row_vectors();
    }
    let q = QMatrix::from_int(&IntMatrix::from_rows(ambient_rank, vecs.to_vec()).expect("width"));
    let ns: Vec<IntVector> = q.nullspace().iter().filter_map(|v| primitive_integer(v)).collect();
    if ns.is_empty() {
        return Vec::new();
    }
    let s = Sublattice::new(ambient_rank, ns).expect("kernel basis is independent");
    s.saturate().basis().row_vectors()
}

/// Equations and facet normals of the cone generated by `gens`.
///
/// A facet is spanned by `d - 1` generators where `d` is the cone's dimension;
/// its normal is taken orthogonal to the equations so that it is unique.
fn inequalities(ambient_rank: usize, gens: &[IntVector]) -> (Vec<IntVector>, Vec<IntVector>) {
    let equations = orthogonal_basis(ambient_rank, gens);
    let d = ambient_rank - equations.len();
    let mut facets = BTreeSet::new();
    if d == 0 {
        return (equations, Vec::new());
    }
    for subset in gens.iter().combinations(d - 1) {
        let rows: Vec<IntVector> = subset.into_iter().chain(&equations).cloned().collect();
        let kernel = if rows.is_empty() {
            IntMatrix::identity(ambient_rank).row_vectors()
        } else {
            let q = QMatrix::from_int(&IntMatrix::from_rows(ambient_rank, rows).expect("width"));
            let ns = q.nullspace();
            if ns.len() != 1 {
                continue;
            }
            vec![primitive_integer(&ns[0]).expect("nonzero kernel vector")]
        };
        if kernel.len() != 1 {
            continue;
        }
        let m = &kernel[0];
        let values: Vec<BigInt> = gens.iter().map(|g| dot(m, g)).collect();
        if values.iter().all(|x| !x.is_negative()) {
            facets.insert(m.clone());
        } else if values.iter().all(|x| !x.is_positive()) {
            facets.insert(m.iter().map(|x| -x).collect());
        }
    }
    (equations, facets.into_iter().collect())
}

/// The dual cone `{u in M : <u, v> >= 0 for all v in c}`.
pub fn dual_cone(c: &Cone) -> Cone {
    let gens = c.h_representation();
    let (equations, facets) = inequalities(c.ambient_rank, &gens);
    let all: Vec<IntVector> = equations.iter().chain(&facets).cloned().collect();
    let strongly_convex = rank_of(c.ambient_rank, &all) == c.ambient_rank;
    let mut rays = gens;
    rays.sort();
    Cone {
        ambient_rank: c.ambient_rank,
        rays,
        equations,
        facets,
        strongly_convex,
    }
}

/// Point-set intersection of two cones.
pub fn intersect(a: &Cone, b: &Cone) -> Cone {
    assert_eq!(a.ambient_rank, b.ambient_rank, "ambient rank mismatch");
    let covectors: Vec<IntVector> = a.h_representation().into_iter().chain(b.h_representation()).collect();
    let (equations, facets) = inequalities(a.ambient_rank, &covectors);
    let mut gens = facets;
    for e in equations {
        gens.push(e.iter().map(|x| -x).collect());
        gens.push(e);
    }
    Cone::hull(a.ambient_rank, gens)
}

/// Membership `v in c`.
pub fn contains(c: &Cone, v: &[BigInt]) -> bool {
    c.contains(v)
}

/// A fan: a face-closed set of strongly convex cones meeting along common faces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fan {
    ambient_rank: usize,
    cones: Vec<Cone>,
    maximal: Vec<usize>,
}

impl Fan {
    /// Structural constructor; call [`validate_fan`] for the fan axioms.
    pub fn new(ambient_rank: usize, cones: Vec<Cone>, maximal: Vec<usize>) -> Result<Fan, FanError> {
        for c in &cones {
            if c.ambient_rank != ambient_rank {
                return Err(FanError::Dimension {
                    expected: ambient_rank,
                    got: c.ambient_rank,
                });
            }
        }
        let mut seen = BTreeSet::new();
        for &m in &maximal {
            if m >= cones.len() {
                return Err(FanError::BadIndex(m));
            }
            if !seen.insert(m) {
                return Err(FanError::DuplicateMaximal(m));
            }
        }
        Ok(Fan {
            ambient_rank,
            cones,
            maximal,
        })
    }

    /// Fan generated by the given cones and all their faces.
    ///
    /// Maximal cones come first, in input order, followed by the remaining
    /// faces by decreasing dimension.
    pub fn from_maximal(ambient_rank: usize, generators: Vec<Cone>) -> Result<Fan, FanError> {
        let mut maximal: Vec<Cone> = Vec::new();
        for (i, c) in generators.iter().enumerate() {
            if c.ambient_rank != ambient_rank {
                return Err(FanError::Dimension {
                    expected: ambient_rank,
                    got: c.ambient_rank,
                });
            }
            let dominated = generators
                .iter()
                .enumerate()
                .any(|(j, o)| j != i && c.is_subcone_of(o) && (c != o || j < i));
            if !dominated {
                maximal.push(c.clone());
            }
        }
        let mut faces: BTreeSet<Cone> = BTreeSet::new();
        for c in &maximal {
            faces.extend(c.faces());
        }
        let mut rest: Vec<Cone> = faces.into_iter().filter(|f| !maximal.contains(f)).collect();
        rest.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.rays.cmp(&b.rays)));
        let k = maximal.len();
        let mut cones = maximal;
        cones.extend(rest);
        Fan::new(ambient_rank, cones, (0..k).collect())
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn cone(&self, i: usize) -> &Cone {
        &self.cones[i]
    }

    /// Indices of the maximal cones, in the order listed.
    pub fn maximal(&self) -> &[usize] {
        &self.maximal
    }

    pub fn is_maximal(&self, i: usize) -> bool {
        self.maximal.contains(&i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FanViolation {
    NotStronglyConvex { cone: usize },
    DuplicateCone { first: usize, second: usize },
    MissingFace { cone: usize, face: Cone },
    BadIntersection { a: usize, b: usize, intersection: Cone },
    MaximalMismatch { expected: Vec<usize>, listed: Vec<usize> },
}

impl fmt::Display for FanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FanViolation::NotStronglyConvex { cone } => write!(f, "cone {cone} is not strongly convex"),
            FanViolation::DuplicateCone { first, second } => {
                write!(f, "cones {first} and {second} coincide")
            }
            FanViolation::MissingFace { cone, face } => {
                write!(f, "face {face} of cone {cone} is not listed")
            }
            FanViolation::BadIntersection { a, b, intersection } => write!(
                f,
                "cones {a} and {b} meet in {intersection}, which is not a face of both"
            ),
            FanViolation::MaximalMismatch { expected, listed } => write!(
                f,
                "maximal cones listed as {listed:?} but inclusion-maximal cones are {expected:?}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FanReport {
    pub violations: Vec<FanViolation>,
}

impl FanReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks face closure, pairwise face intersection and the maximal-cone list.
pub fn validate_fan(f: &Fan) -> FanReport {
    let mut violations = Vec::new();
    for (i, c) in f.cones.iter().enumerate() {
        if !c.strongly_convex {
            violations.push(FanViolation::NotStronglyConvex { cone: i });
        }
    }
    for (i, j) in (0..f.cones.len()).tuple_combinations() {
        if f.cones[i] == f.cones[j] {
            violations.push(FanViolation::DuplicateCone { first: i, second: j });
        }
    }
    for (i, c) in f.cones.iter().enumerate() {
        for face in c.faces() {
            if !f.cones.contains(&face) {
                violations.push(FanViolation::MissingFace { cone: i, face });
            }
        }
    }
    for (i, j) in (0..f.cones.len()).tuple_combinations() {
        let (a, b) = (&f.cones[i], &f.cones[j]);
        let meet = intersect(a, b);
        if !(meet.is_face_of(a) && meet.is_face_of(b)) {
            violations.push(FanViolation::BadIntersection {
                a: i,
                b: j,
                intersection: meet,
            });
        }
    }
    let expected: Vec<usize> = (0..f.cones.len())
        .filter(|&i| !f.cones.iter().any(|o| o != &f.cones[i] && f.cones[i].is_subcone_of(o)))
        .collect();
    let mut listed = f.maximal.clone();
    listed.sort_unstable();
    if expected != listed {
        violations.push(FanViolation::MaximalMismatch { expected, listed });
    }
    violations.sort();
    violations.dedup();
    FanReport { violations }
}

/// The splitting `N = N_sigma (+) N'` attached to a cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSplit {
    /// `span(sigma) ∩ N`, the cocharacter lattice of the stabilizer subtorus.
    pub n_sigma: Sublattice,
    pub n_prime: Sublattice,
    /// Projection `N -> N_sigma` along `N'`, acting on column vectors.
    pub projection: IntMatrix,
}

impl ConeSplit {
    /// Canonical splitting, with `N'` from [`Sublattice::complement`].
    pub fn canonical(cone: &Cone) -> ConeSplit {
        let n_sigma = stabilizer_lattice(cone);
        let n_prime = n_sigma.complement().expect("stabilizer lattice is saturated");
        ConeSplit::assemble(n_sigma, n_prime)
    }

    /// Splitting with a caller-supplied complement.
    pub fn with_complement(cone: &Cone, n_prime: Sublattice) -> Result<ConeSplit, FanError> {
        let n_sigma = stabilizer_lattice(cone);
        if !n_sigma.is_complementary(&n_prime) {
            return Err(LatticeError::NotComplementary.into());
        }
        Ok(ConeSplit::assemble(n_sigma, n_prime))
    }

    fn assemble(n_sigma: Sublattice, n_prime: Sublattice) -> ConeSplit {
        let k = n_sigma.rank();
        let n = n_sigma.ambient_rank();
        let s = n_sigma.basis().stack(n_prime.basis());
        let s_inv = s.unimodular_inverse().expect("complementary bases are unimodular");
        let mut e = IntMatrix::zeros(n, n);
        for i in 0..k {
            e.set(i, i, BigInt::from(1));
        }
        // v = S^T x with x = S^{-T} v; keep the first k coordinates of x
        let projection = s.transpose().mul(&e).mul(&s_inv.transpose());
        ConeSplit {
            n_sigma,
            n_prime,
            projection,
        }
    }

    /// Coordinates of `v` with respect to the stacked basis `(N_sigma, N')`.
    pub fn coordinates(&self) -> IntMatrix {
        let s = self.n_sigma.basis().stack(self.n_prime.basis());
        s.unimodular_inverse().expect("unimodular").transpose()
    }
}

fn stabilizer_lattice(cone: &Cone) -> Sublattice {
    let n = cone.ambient_rank;
    let basis = orthogonal_basis(n, &cone.equations);
    let m = IntMatrix::from_rows(n, basis).expect("width");
    Sublattice::new(n, hermite_rows(&m).row_vectors()).expect("independent")
}

/// Splitting data for cone `sigma` of `f`.
pub fn cone_split(f: &Fan, sigma: usize) -> Result<ConeSplit, FanError> {
    let cone = f.cones.get(sigma).ok_or(FanError::BadIndex(sigma))?;
    Ok(ConeSplit::canonical(cone))
}

/// Fan of `P^1`.
pub fn projective_line() -> Fan {
    Fan::from_maximal(
        1,
        vec![
            Cone::from_i64(1, &[&[1]]).expect("ray"),
            Cone::from_i64(1, &[&[-1]]).expect("ray"),
        ],
    )
    .expect("valid fan")
}

/// Fan of `P^2` with rays `e1`, `e2`, `-e1-e2`.
pub fn projective_plane() -> Fan {
    let c = |a: &[i64], b: &[i64]| Cone::from_i64(2, &[a, b]).expect("cone");
    Fan::from_maximal(
        2,
        vec![c(&[1, 0], &[0, 1]), c(&[0, 1], &[-1, -1]), c(&[-1, -1], &[1, 0])],
    )
    .expect("valid fan")
}
