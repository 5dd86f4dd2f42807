//! Equivalence of admissible collections, gauge normalization, affine
//! trivialization and reduction for unipotent and triangular groups.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::charmat::{GroupTag, LaurentMatrix, TorusHom};
use crate::collection::{AdmissibleCollection, CollectionError};
use crate::fan::{Cone, ConeSplit, Fan, FanError};
use crate::lattice::{IntMatrix, IntVector};
use crate::qmat::{intersect_spans, QMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Collection(#[from] CollectionError),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("collections are over different {0}")]
    Mismatch(&'static str),
    #[error("gauge witness has no element for maximal cone {0}")]
    IncompleteWitness(usize),
    #[error("gauge element at cone {0} is not an invertible element of the structure group")]
    GaugeNotInGroup(usize),
    #[error("fan is not affine (|Ξ*| = {count})")]
    NotAffine { count: usize },
    #[error("operation does not support group {0}")]
    UnsupportedGroup(GroupTag),
    #[error("product structure has torus rank {got}, split expects {expected}")]
    IncompatibleSplit { expected: usize, got: usize },
    #[error("cone {0} is not a maximal cone of the fan")]
    BadBaseCone(usize),
    #[error("internal error: unipotent collection did not reduce to the trivial collection")]
    UnipotentNotTrivial,
    #[error("internal error: recovered gauge witness does not reproduce the target collection")]
    WitnessRejected,
}

/// Per-cone gauge elements `g_σ ∈ G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeWitness {
    pub g: BTreeMap<usize, QMatrix>,
}

impl GaugeWitness {
    pub fn identity(c: &AdmissibleCollection) -> Self {
        GaugeWitness {
            g: c.maximal().iter().map(|&s| (s, QMatrix::identity(c.n()))).collect(),
        }
    }

    /// `g_σ ↦ g_σ^{-1}`; witnesses `c2 ~ c1` from `c1 ~ c2`.
    pub fn inverse(&self) -> Option<Self> {
        let g = self
            .g
            .iter()
            .map(|(&s, m)| m.inverse().map(|i| (s, i)))
            .collect::<Option<_>>()?;
        Some(GaugeWitness { g })
    }

    /// Applying `self` then `then` equals applying `g_σ = self_σ · then_σ`.
    pub fn compose(&self, then: &GaugeWitness) -> Option<Self> {
        let g = self
            .g
            .iter()
            .map(|(s, m)| then.g.get(s).map(|t| (*s, m.mul(t))))
            .collect::<Option<_>>()?;
        Some(GaugeWitness { g })
    }
}

impl fmt::Display for GaugeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, m)) in self.g.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "g[{s}] = {m}")?;
        }
        Ok(())
    }
}

/// `ρ_σ ↦ g_σ^{-1} ρ_σ g_σ`, `P(τ,σ) ↦ g_τ^{-1} P(τ,σ) g_σ`.
pub fn apply_gauge(c: &AdmissibleCollection, w: &GaugeWitness) -> Result<AdmissibleCollection, ClassifyError> {
    let group = c.group();
    let mut inverses = BTreeMap::new();
    for &s in c.maximal() {
        let g = w.g.get(&s).ok_or(ClassifyError::IncompleteWitness(s))?;
        if !group.contains_constant(g) {
            return Err(ClassifyError::GaugeNotInGroup(s));
        }
        inverses.insert(s, g.inverse().ok_or(ClassifyError::GaugeNotInGroup(s))?);
    }
    let rho = c
        .rho_map()
        .iter()
        .map(|(&s, h)| {
            let a = inverses[&s].mul(h.base_change());
            let h = TorusHom::new(a, h.weights().to_vec(), h.rank()).expect("gauge is invertible");
            (s, h)
        })
        .collect();
    let p = c
        .p_map()
        .iter()
        .map(|(&(t, s), m)| ((t, s), inverses[&t].mul(m).mul(&w.g[&s])))
        .collect();
    Ok(c.rebuild(group, rho, p)?)
}

/// Per maximal cone, the sorted weight multiset of `ρ_σ`.
pub fn weight_invariants(c: &AdmissibleCollection) -> BTreeMap<usize, Vec<IntVector>> {
    c.rho_map().iter().map(|(&s, h)| (s, h.weight_multiset())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(GaugeWitness),
    /// Weight multisets at `cone` differ, a conjugation invariant.
    WeightsDiffer {
        cone: usize,
    },
    /// The determinant vanishes on the whole reduced solution family.
    NoWitnessInFamily,
}

fn require_valid(c: &AdmissibleCollection) -> Result<(), ClassifyError> {
    let report = c.validate();
    if report.ok {
        Ok(())
    } else {
        Err(CollectionError::NotAdmissible(report).into())
    }
}

fn base_cone(c: &AdmissibleCollection, base: Option<usize>) -> Result<usize, ClassifyError> {
    match base {
        Some(b) if c.fan().is_maximal(b) => Ok(b),
        Some(b) => Err(ClassifyError::BadBaseCone(b)),
        None => Ok(c.maximal().iter().copied().min().expect("fans have a maximal cone")),
    }
}

type Form = Vec<Rational>;

/// Entries of `l · G · r`, where the entries of `G` are linear forms.
fn transform(l: &QMatrix, g: &[Form], r: &QMatrix) -> Vec<Form> {
    let n = l.rows();
    let m = g.first().map_or(0, Vec::len);
    let mut out = vec![vec![Rational::zero(); m]; n * n];
    for (a, b, i, j) in itertools::iproduct!(0..n, 0..n, 0..n, 0..n) {
        let f = l.get(a, i) * r.get(j, b);
        if f.is_zero() {
            continue;
        }
        for (o, x) in out[a * n + b].iter_mut().zip(&g[i * n + j]) {
            *o += &f * x;
        }
    }
    out
}

fn unit_forms(n: usize) -> Vec<Form> {
    (0..n * n)
        .map(|k| {
            let mut f = vec![Rational::zero(); n * n];
            f[k] = Rational::one();
            f
        })
        .collect()
}

fn group_constraints(group: GroupTag, g: &[Form], rows: &mut Vec<(Form, Rational)>) {
    let n = group.n();
    for i in 0..n {
        for j in 0..n {
            let vanishes = match group {
                GroupTag::GeneralLinear(_) => false,
                GroupTag::DiagonalTorus(_) => i != j,
                GroupTag::UpperTriangular(_) | GroupTag::Unipotent(_) => i > j,
            };
            if vanishes {
                rows.push((g[i * n + j].clone(), Rational::zero()));
            }
            if matches!(group, GroupTag::Unipotent(_)) && i == j {
                rows.push((g[i * n + j].clone(), Rational::one()));
            }
        }
    }
}

fn evaluate(forms: &[Form], x: &[Rational]) -> Vec<Rational> {
    forms
        .iter()
        .map(|f| f.iter().zip(x).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn matrix_from(n: usize, entries: Vec<Rational>) -> QMatrix {
    QMatrix::from_rows(entries.into_iter().chunks(n).into_iter().map(|c| c.collect()).collect()).expect("square")
}

/// Decides whether `c1 ~ c2`, using the lowest maximal cone as base.
pub fn equivalent(c1: &AdmissibleCollection, c2: &AdmissibleCollection) -> Result<Equivalence, ClassifyError> {
    equivalent_with_base(c1, c2, None)
}

/// Decides whether `c1 ~ c2`.
///
/// Every gauge satisfies `g_τ = P(τ,σ0) g_{σ0} P'(τ,σ0)^{-1}`, so the unknowns
/// are the entries of `X = g_{σ0}`. The intertwining, transition and group
/// pattern constraints are linear in `X`; the affine solution space is then
/// searched for an invertible point on the grid `{0..n}^k`.
pub fn equivalent_with_base(
    c1: &AdmissibleCollection,
    c2: &AdmissibleCollection,
    base: Option<usize>,
) -> Result<Equivalence, ClassifyError> {
    if c1.fan() != c2.fan() {
        return Err(ClassifyError::Mismatch("fans"));
    }
    if c1.group() != c2.group() {
        return Err(ClassifyError::Mismatch("structure groups"));
    }
    require_valid(c1)?;
    require_valid(c2)?;
    let s0 = base_cone(c1, base)?;
    let (w1, w2) = (weight_invariants(c1), weight_invariants(c2));
    if let Some(&cone) = w1.keys().find(|s| w1[s] != w2[s]) {
        return Ok(Equivalence::WeightsDiffer { cone });
    }

    let n = c1.n();
    let x = unit_forms(n);
    let gauge: BTreeMap<usize, Vec<Form>> = c1
        .maximal()
        .iter()
        .map(|&t| {
            let back = c2.p(t, s0).inverse().expect("group elements are invertible");
            (t, transform(c1.p(t, s0), &x, &back))
        })
        .collect();

    let mut rows: Vec<(Form, Rational)> = Vec::new();
    for &s in c1.maximal() {
        let (h1, h2) = (c1.rho(s), c2.rho(s));
        let a1_inv = h1.base_change().inverse().expect("base change is invertible");
        let y = transform(&a1_inv, &gauge[&s], h2.base_change());
        for (i, j) in itertools::iproduct!(0..n, 0..n) {
            if h1.weights()[i] != h2.weights()[j] {
                rows.push((y[i * n + j].clone(), Rational::zero()));
            }
        }
        group_constraints(c1.group(), &gauge[&s], &mut rows);
    }
    let id = QMatrix::identity(n);
    for (&t, &s) in c1.maximal().iter().cartesian_product(c1.maximal()) {
        let lhs = transform(&id, &gauge[&t], c2.p(t, s));
        let rhs = transform(c1.p(t, s), &gauge[&s], &id);
        for (l, r) in lhs.into_iter().zip(rhs) {
            rows.push((l.into_iter().zip(r).map(|(a, b)| a - b).collect(), Rational::zero()));
        }
    }

    let mut system = QMatrix::zeros(rows.len(), n * n);
    for (i, (f, _)) in rows.iter().enumerate() {
        for (j, v) in f.iter().enumerate() {
            system.set(i, j, v.clone());
        }
    }
    let rhs: Vec<Rational> = rows.into_iter().map(|(_, b)| b).collect();
    let Some((x0, null)) = system.solve_affine(&rhs) else {
        return Ok(Equivalence::NoWitnessInFamily);
    };
    let Some(point) = invertible_grid_point(n, &x0, &null) else {
        return Ok(Equivalence::NoWitnessInFamily);
    };

    let w = GaugeWitness {
        g: gauge
            .iter()
            .map(|(&s, forms)| (s, matrix_from(n, evaluate(forms, &point))))
            .collect(),
    };
    let image = apply_gauge(c1, &w)?;
    if image.rho_map() != c2.rho_map() || image.p_map() != c2.p_map() {
        return Err(ClassifyError::WitnessRejected);
    }
    Ok(Equivalence::Equivalent(w))
}

/// Lexicographically first `t ∈ {0..n}^k` with `det(x0 + Σ t_i v_i) ≠ 0`.
fn invertible_grid_point(n: usize, x0: &[Rational], null: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let k = null.len();
    let mut t = vec![0usize; k];
    loop {
        let mut x = x0.to_vec();
        for (ti, v) in t.iter().zip(null) {
            if *ti == 0 {
                continue;
            }
            let c = Rational::from_integer(BigInt::from(*ti));
            for (xj, vj) in x.iter_mut().zip(v) {
                *xj += &c * vj;
            }
        }
        if !matrix_from(n, x.clone()).det().is_zero() {
            return Some(x);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if t[i] < n {
                t[i] += 1;
                break;
            }
            t[i] = 0;
        }
    }
}

/// An equivariant product bundle `X ×_ρ G` with fiber identification `base_gauge`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStructure {
    pub rho: TorusHom,
    pub base_gauge: QMatrix,
}

impl ProductStructure {
    /// Single-cone collection with `ρ_σ = rho` and `P(σ,σ) = 1`.
    pub fn collection(&self, fan: &Fan, group: GroupTag) -> Result<AdmissibleCollection, ClassifyError> {
        let &[s] = fan.maximal() else {
            return Err(ClassifyError::NotAffine {
                count: fan.maximal().len(),
            });
        };
        let rho = BTreeMap::from([(s, self.rho.clone())]);
        let p = BTreeMap::from([((s, s), QMatrix::identity(self.rho.n()))]);
        Ok(AdmissibleCollection::new(fan.clone(), group, rho, p)?)
    }

    /// The constant section `s ≡ base_gauge` together with the ambient action
    /// `g ρ g^{-1}` for which it is semi-equivariant.
    pub fn induced_section(&self) -> (LaurentMatrix, TorusHom) {
        let s = LaurentMatrix::constant(&self.base_gauge, self.rho.rank());
        let g_inv = self.base_gauge.inverse().expect("base gauge is invertible");
        let ambient = self.rho.conjugate(&g_inv).expect("invertible");
        (s, ambient)
    }
}

/// `X_σ = Y × O` and `T = H × K`, with `H` the stabilizer torus of `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricSplit {
    /// `σ` written in a basis of `N_σ`.
    pub y_fan: Fan,
    /// Rank of `K`.
    pub orbit_rank: usize,
    pub split: ConeSplit,
    /// `N -> N_σ` coordinates (rows `0..k` of the inverse transposed basis).
    pub to_h: IntMatrix,
    /// `N -> N'` coordinates.
    pub to_k: IntMatrix,
}

impl ToricSplit {
    pub fn from_cone_split(cone: &Cone, split: ConeSplit) -> Result<ToricSplit, ClassifyError> {
        let k = split.n_sigma.rank();
        let n = cone.ambient_rank();
        let coords = split.coordinates();
        let to_h = coords.top_rows(k);
        let to_k = coords.bottom_rows(n - k);
        let y_rays: Vec<IntVector> = cone.rays().iter().map(|r| to_h.apply(r)).collect();
        let y_fan = Fan::from_maximal(k, vec![Cone::new(k, y_rays)?])?;
        Ok(ToricSplit {
            y_fan,
            orbit_rank: n - k,
            split,
            to_h,
            to_k,
        })
    }

    /// Restricts a character of `T` to `H`: `u ↦ (⟨u, b_i⟩)_i`.
    pub fn restrict_weight(&self, u: &[BigInt]) -> IntVector {
        self.split.n_sigma.basis().apply(u)
    }

    /// Pulls a character of `H` back along `T -> H`.
    pub fn extend_weight(&self, u_h: &[BigInt]) -> IntVector {
        self.to_h.transpose().apply(u_h)
    }
}

/// Splitting data for a fan with exactly one maximal cone.
pub fn split_affine_toric(f: &Fan) -> Result<ToricSplit, ClassifyError> {
    let &[s] = f.maximal() else {
        return Err(ClassifyError::NotAffine {
            count: f.maximal().len(),
        });
    };
    let cone = f.cone(s);
    ToricSplit::from_cone_split(cone, ConeSplit::canonical(cone))
}

/// Extends a product structure on `Y` to `X = Y × O` by pulling weights back
/// along the projection `T -> H`.
pub fn extend_section(ps: &ProductStructure, split: &ToricSplit) -> Result<ProductStructure, ClassifyError> {
    let k = split.split.n_sigma.rank();
    if ps.rho.rank() != k {
        return Err(ClassifyError::IncompatibleSplit {
            expected: k,
            got: ps.rho.rank(),
        });
    }
    let rank = split.split.n_sigma.ambient_rank();
    Ok(ProductStructure {
        rho: ps.rho.map_weights(rank, |u| split.extend_weight(u)),
        base_gauge: ps.base_gauge.clone(),
    })
}

/// Product structure of a valid single-cone collection, built by restricting
/// `ρ_σ` to `H` and extending back over `Y × O`.
pub fn trivialize_affine(c: &AdmissibleCollection) -> Result<ProductStructure, ClassifyError> {
    let &[s] = c.maximal() else {
        return Err(ClassifyError::NotAffine {
            count: c.maximal().len(),
        });
    };
    require_valid(c)?;
    let split = ToricSplit::from_cone_split(c.fan().cone(s), c.split(s).clone())?;
    let rho = c.rho(s);
    let on_y = ProductStructure {
        rho: rho.map_weights(split.split.n_sigma.rank(), |u| split.restrict_weight(u)),
        base_gauge: QMatrix::identity(c.n()),
    };
    let ps = extend_section(&on_y, &split)?;
    debug_assert_eq!(&ps.rho, rho);
    if &ps.rho != rho {
        return Err(ClassifyError::WitnessRejected);
    }
    Ok(ps)
}

/// Gauge to a collection with diagonal `ρ_σ` and `P ≡ 1`, tagged `DiagonalTorus`.
#[derive(Clone, Debug)]
pub struct TorusReduction {
    pub witness: GaugeWitness,
    pub reduced: AdmissibleCollection,
}

/// Reduces an `UpperTriangular` or `Unipotent` collection to the diagonal torus.
///
/// Any reduction can be followed by a diagonal gauge making `P ≡ 1`, which forces
/// `g_τ = P(τ,σ0) X`. Then `X` must simultaneously diagonalize every
/// `R_τ = P(τ,σ0)^{-1} ρ_τ P(τ,σ0)` while staying in `G`; each column of `X` is
/// chosen independently inside `span(e_1..e_j)` and the joint eigenspaces.
pub fn reduce_to_torus(c: &AdmissibleCollection, base: Option<usize>) -> Result<Option<TorusReduction>, ClassifyError> {
    let group = c.group();
    if !matches!(group, GroupTag::UpperTriangular(_) | GroupTag::Unipotent(_)) {
        return Err(ClassifyError::UnsupportedGroup(group));
    }
    require_valid(c)?;
    let s0 = base_cone(c, base)?;
    let n = c.n();

    let mut eigenspaces: Vec<Vec<Vec<Rational>>> = Vec::new();
    for &t in c.maximal() {
        let r = c.rho(t).conjugate(c.p(t, s0)).expect("group elements are invertible");
        let mut by_weight: BTreeMap<&IntVector, Vec<Vec<Rational>>> = BTreeMap::new();
        for (i, u) in r.weights().iter().enumerate() {
            by_weight.entry(u).or_default().push(r.base_change().column(i));
        }
        let refined = match eigenspaces.is_empty() && t == c.maximal()[0] {
            true => by_weight.into_values().collect(),
            false => eigenspaces
                .iter()
                .flat_map(|v| by_weight.values().map(move |w| intersect_spans(n, v, w)))
                .filter(|b| !b.is_empty())
                .collect(),
        };
        eigenspaces = refined;
    }

    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let flag: Vec<Vec<Rational>> = (0..=j)
            .map(|i| {
                (0..n)
                    .map(|k| if k == i { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        let found = eigenspaces
            .iter()
            .find_map(|v| intersect_spans(n, v, &flag).into_iter().find(|b| !b[j].is_zero()));
        let Some(col) = found else {
            return Ok(None);
        };
        let lead = col[j].clone();
        columns.push(col.into_iter().map(|x| x / &lead).collect::<Vec<_>>());
    }
    let x = QMatrix::from_columns(n, &columns);
    let witness = GaugeWitness {
        g: c.maximal().iter().map(|&t| (t, c.p(t, s0).mul(&x))).collect(),
    };
    let gauged = apply_gauge(c, &witness)?;
    let rank = c.fan().ambient_rank();
    let mut rho = BTreeMap::new();
    for (&s, h) in gauged.rho_map() {
        let m = h.to_matrix();
        let weights = (0..n)
            .map(|i| match m.get(i, i).as_monomial() {
                Some((u, c)) if c.is_one() => Ok(u.clone()),
                _ => Err(ClassifyError::WitnessRejected),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rho.insert(s, TorusHom::diagonal(weights, rank));
    }
    let reduced = gauged.rebuild(GroupTag::DiagonalTorus(n), rho, gauged.p_map().clone())?;
    Ok(Some(TorusReduction { witness, reduced }))
}

/// Gauge witness from a valid unipotent collection to the trivial one.
pub fn check_unipotent_trivial(c: &AdmissibleCollection) -> Result<GaugeWitness, ClassifyError> {
    let group = c.group();
    if !matches!(group, GroupTag::Unipotent(_)) {
        return Err(ClassifyError::UnsupportedGroup(group));
    }
    let Some(r) = reduce_to_torus(c, None)? else {
        return Err(ClassifyError::UnipotentNotTrivial);
    };
    let target = AdmissibleCollection::trivial(c.fan().clone(), group);
    let image = apply_gauge(c, &r.witness)?;
    if image.rho_map() != target.rho_map() || image.p_map() != target.p_map() {
        return Err(ClassifyError::UnipotentNotTrivial);
    }
    Ok(r.witness)
}

/// Equivalence-class representatives of `GL(1)` collections with `P ≡ 1` and
/// every weight in `[-bound, bound]^rank`, in enumeration order.
pub fn enumerate_line_bundles(fan: &Fan, bound: u32) -> Result<Vec<AdmissibleCollection>, ClassifyError> {
    let rank = fan.ambient_rank();
    let b = i64::from(bound);
    let weights: Vec<IntVector> = (0..rank)
        .map(|_| -b..=b)
        .multi_cartesian_product()
        .map(|v| v.into_iter().map(BigInt::from).collect())
        .collect();
    let weights = if rank == 0 { vec![Vec::new()] } else { weights };
    let maximal = fan.maximal().to_vec();
    let p: BTreeMap<(usize, usize), QMatrix> = maximal
        .iter()
        .cartesian_product(&maximal)
        .map(|(&t, &s)| ((t, s), QMatrix::identity(1)))
        .collect();

    let mut buckets: BTreeMap<BTreeMap<usize, Vec<IntVector>>, Vec<usize>> = BTreeMap::new();
    let mut reps: Vec<AdmissibleCollection> = Vec::new();
    for choice in maximal.iter().map(|_| weights.iter()).multi_cartesian_product() {
        let rho = maximal
            .iter()
            .zip(choice)
            .map(|(&s, u)| (s, TorusHom::diagonal(vec![u.clone()], rank)))
            .collect();
        let c = AdmissibleCollection::new(fan.clone(), GroupTag::GeneralLinear(1), rho, p.clone())?;
        if !c.validate().ok {
            continue;
        }
        let bucket = buckets.entry(weight_invariants(&c)).or_default();
        let mut known = false;
        for &i in bucket.iter() {
            if matches!(equivalent(&reps[i], &c)?, Equivalence::Equivalent(_)) {
                known = true;
                break;
            }
        }
        if !known {
            bucket.push(reps.len());
            reps.push(c);
        }
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charmat::semi_equivariant_check;
    use crate::fan::{projective_line, projective_plane};
    use crate::lattice::{ivec, Sublattice};
    use crate::qmat::{rat, ratio};
    use proptest::prelude::*;

    fn gl1_p1(m_plus: i64, m_minus: i64, c: Rational) -> AdmissibleCollection {
        let rho = BTreeMap::from([
            (0, TorusHom::diagonal(vec![ivec(&[m_plus])], 1)),
            (1, TorusHom::diagonal(vec![ivec(&[m_minus])], 1)),
        ]);
        let q = |x: Rational| QMatrix::scalar(1, x);
        let p = BTreeMap::from([
            ((0, 0), q(rat(1))),
            ((1, 1), q(rat(1))),
            ((1, 0), q(c.clone())),
            ((0, 1), q(c.recip())),
        ]);
        AdmissibleCollection::new(projective_line(), GroupTag::GeneralLinear(1), rho, p).unwrap()
    }

    fn unipotent_p1(s: i64) -> AdmissibleCollection {
        let u = QMatrix::from_i64(&[&[1, s], &[0, 1]]);
        let u_inv = u.inverse().unwrap();
        let rho = BTreeMap::from([(0, TorusHom::trivial(2, 1)), (1, TorusHom::trivial(2, 1))]);
        let p = BTreeMap::from([
            ((0, 0), QMatrix::identity(2)),
            ((1, 1), QMatrix::identity(2)),
            ((1, 0), u),
            ((0, 1), u_inv),
        ]);
        AdmissibleCollection::new(projective_line(), GroupTag::Unipotent(2), rho, p).unwrap()
    }

    fn single_cone(rays: &[&[i64]]) -> Fan {
        Fan::from_maximal(2, vec![Cone::from_i64(2, rays).unwrap()]).unwrap()
    }

    fn witness(pairs: &[(usize, QMatrix)]) -> GaugeWitness {
        GaugeWitness {
            g: pairs.iter().cloned().collect(),
        }
    }

    #[test]
    fn identity_gauge_is_neutral() {
        let c = gl1_p1(2, -1, rat(3));
        assert_eq!(apply_gauge(&c, &GaugeWitness::identity(&c)).unwrap(), c);
    }

    #[test]
    fn gauge_on_trivial_collection_telescopes() {
        let c = AdmissibleCollection::trivial(projective_plane(), GroupTag::GeneralLinear(2));
        let gs: Vec<QMatrix> = vec![
            QMatrix::from_i64(&[&[1, 2], &[0, 1]]),
            QMatrix::from_i64(&[&[2, 0], &[1, 1]]),
            QMatrix::from_i64(&[&[0, 1], &[1, 0]]),
        ];
        let w = GaugeWitness {
            g: c.maximal().iter().copied().zip(gs.clone()).collect(),
        };
        let d = apply_gauge(&c, &w).unwrap();
        assert!(d.validate().ok);
        for (i, &t) in c.maximal().iter().enumerate() {
            assert!(d.rho(t).is_trivial());
            for (j, &s) in c.maximal().iter().enumerate() {
                assert_eq!(d.p(t, s), &gs[i].inverse().unwrap().mul(&gs[j]));
            }
        }
    }

    #[test]
    fn scalar_gauge_on_line_bundle() {
        let c = gl1_p1(1, 4, rat(3));
        let w = witness(&[(0, QMatrix::scalar(1, rat(5))), (1, QMatrix::scalar(1, rat(2)))]);
        let d = apply_gauge(&c, &w).unwrap();
        assert_eq!(weight_invariants(&d), weight_invariants(&c));
        // g_-^{-1} c g_+ = 3 * 5 / 2
        assert_eq!(d.p(1, 0), &QMatrix::scalar(1, ratio(15, 2)));
    }

    #[test]
    fn gauge_rejects_non_members() {
        let c = unipotent_p1(1);
        let w = witness(&[(0, QMatrix::identity(2)), (1, QMatrix::from_i64(&[&[2, 0], &[0, 1]]))]);
        assert_eq!(apply_gauge(&c, &w), Err(ClassifyError::GaugeNotInGroup(1)));
        let partial = witness(&[(0, QMatrix::identity(2))]);
        assert_eq!(apply_gauge(&c, &partial), Err(ClassifyError::IncompleteWitness(1)));
    }

    #[test]
    fn weight_invariants_read_off_rank_one() {
        let inv = weight_invariants(&gl1_p1(3, -2, rat(1)));
        assert_eq!(inv, BTreeMap::from([(0, vec![ivec(&[3])]), (1, vec![ivec(&[-2])])]));
        let t = AdmissibleCollection::trivial(projective_plane(), GroupTag::GeneralLinear(2));
        assert!(weight_invariants(&t).values().all(|w| w == &vec![ivec(&[0, 0]); 2]));
    }

    #[test]
    fn line_bundles_with_equal_weights_are_equivalent() {
        let a = gl1_p1(2, -1, rat(3));
        let b = gl1_p1(2, -1, ratio(-7, 4));
        let Equivalence::Equivalent(w) = equivalent(&a, &b).unwrap() else {
            panic!("expected a witness");
        };
        assert_eq!(apply_gauge(&a, &w).unwrap(), b);
    }

    #[test]
    fn shifted_weight_separates() {
        let a = gl1_p1(2, -1, rat(3));
        let b = gl1_p1(3, -1, rat(3));
        assert_eq!(equivalent(&a, &b).unwrap(), Equivalence::WeightsDiffer { cone: 0 });
    }

    #[test]
    fn self_equivalence_finds_identity() {
        let c = gl1_p1(0, 5, rat(2));
        assert_eq!(
            equivalent(&c, &c).unwrap(),
            Equivalence::Equivalent(GaugeWitness::identity(&c))
        );
    }

    #[test]
    fn equivalence_rejects_mismatched_inputs() {
        let a = gl1_p1(0, 0, rat(1));
        let b = AdmissibleCollection::trivial(projective_plane(), GroupTag::GeneralLinear(1));
        assert_eq!(equivalent(&a, &b), Err(ClassifyError::Mismatch("fans")));
        let c = a.retagged(GroupTag::DiagonalTorus(1)).unwrap();
        assert_eq!(equivalent(&a, &c), Err(ClassifyError::Mismatch("structure groups")));
    }

    #[test]
    fn unipotent_transitions_are_all_equivalent() {
        let a = unipotent_p1(5);
        let b = unipotent_p1(-2);
        let Equivalence::Equivalent(w) = equivalent(&a, &b).unwrap() else {
            panic!("expected a witness");
        };
        assert_eq!(apply_gauge(&a, &w).unwrap(), b);
    }

    #[test]
    fn non_conjugate_eigenspaces_have_no_witness() {
        // same weights, but the weight-1 line is e1 in one and e1+e2 in the other;
        // an upper-triangular gauge cannot move e1
        let fan = single_cone(&[&[1, 0], &[0, 1]]);
        let make = |a: &[&[i64]]| {
            let h = TorusHom::new(QMatrix::from_i64(a), vec![ivec(&[1, 0]), ivec(&[0, 0])], 2).unwrap();
            let s = fan.maximal()[0];
            AdmissibleCollection::new(
                fan.clone(),
                GroupTag::GeneralLinear(2),
                BTreeMap::from([(s, h)]),
                BTreeMap::from([((s, s), QMatrix::identity(2))]),
            )
            .unwrap()
        };
        let a = make(&[&[1, 0], &[0, 1]]);
        let b = make(&[&[1, 0], &[1, 1]]);
        assert!(matches!(equivalent(&a, &b).unwrap(), Equivalence::Equivalent(_)));
        let a = a.retagged(GroupTag::UpperTriangular(2));
        let b = b.retagged(GroupTag::UpperTriangular(2));
        // b's ρ is lower triangular, so it is not an element of the group at all
        assert!(a.is_ok() && b.is_err());
    }

    #[test]
    fn witness_inverse_and_composition() {
        let a = gl1_p1(1, 1, rat(2));
        let b = gl1_p1(1, 1, rat(5));
        let c = gl1_p1(1, 1, ratio(-1, 3));
        let Equivalence::Equivalent(ab) = equivalent(&a, &b).unwrap() else {
            panic!()
        };
        let Equivalence::Equivalent(bc) = equivalent(&b, &c).unwrap() else {
            panic!()
        };
        assert_eq!(apply_gauge(&b, &ab.inverse().unwrap()).unwrap(), a);
        assert_eq!(apply_gauge(&a, &ab.compose(&bc).unwrap()).unwrap(), c);
    }

    #[test]
    fn split_full_dimensional_cone() {
        let s = split_affine_toric(&single_cone(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(s.orbit_rank, 0);
        assert_eq!(s.y_fan.ambient_rank(), 2);
        assert_eq!(
            s.y_fan.cone(s.y_fan.maximal()[0]).rays(),
            &[ivec(&[0, 1]), ivec(&[1, 0])]
        );
    }

    #[test]
    fn split_coordinate_ray() {
        let s = split_affine_toric(&single_cone(&[&[1, 0]])).unwrap();
        assert_eq!(s.orbit_rank, 1);
        let y = s.y_fan.cone(s.y_fan.maximal()[0]);
        assert_eq!(y.rays(), &[ivec(&[1])]);
        assert_eq!(s.extend_weight(&ivec(&[4])), ivec(&[4, 0]));
    }

    #[test]
    fn split_diagonal_ray() {
        let s = split_affine_toric(&single_cone(&[&[1, 1]])).unwrap();
        assert_eq!(s.orbit_rank, 1);
        assert_eq!(s.y_fan.cone(s.y_fan.maximal()[0]).rays(), &[ivec(&[1])]);
        assert!(s.split.n_sigma.is_complementary(&s.split.n_prime));
        // the pulled-back character pairs with (1,1) as m did with the generator
        let u = s.extend_weight(&ivec(&[3]));
        assert_eq!(crate::lattice::dot(&u, &ivec(&[1, 1])), BigInt::from(3));
        assert_eq!(s.to_h.apply(&ivec(&[2, 2])), ivec(&[2]));
    }

    #[test]
    fn split_rejects_two_cones() {
        assert_eq!(
            split_affine_toric(&projective_line()).unwrap_err(),
            ClassifyError::NotAffine { count: 2 }
        );
    }

    #[test]
    fn extend_rejects_rank_mismatch() {
        let s = split_affine_toric(&single_cone(&[&[1, 1]])).unwrap();
        let ps = ProductStructure {
            rho: TorusHom::trivial(1, 2),
            base_gauge: QMatrix::identity(1),
        };
        assert_eq!(
            extend_section(&ps, &s),
            Err(ClassifyError::IncompatibleSplit { expected: 1, got: 2 })
        );
    }

    #[test]
    fn trivialize_orthant_gl2() {
        let fan = single_cone(&[&[1, 0], &[0, 1]]);
        let s = fan.maximal()[0];
        let h = TorusHom::diagonal(vec![ivec(&[1, 0]), ivec(&[0, 1])], 2);
        let c = AdmissibleCollection::new(
            fan.clone(),
            GroupTag::GeneralLinear(2),
            BTreeMap::from([(s, h.clone())]),
            BTreeMap::from([((s, s), QMatrix::identity(2))]),
        )
        .unwrap();
        let ps = trivialize_affine(&c).unwrap();
        assert_eq!(ps.rho, h);
        let rebuilt = ps.collection(&fan, GroupTag::GeneralLinear(2)).unwrap();
        assert!(matches!(equivalent(&rebuilt, &c).unwrap(), Equivalence::Equivalent(_)));
        let (sec, ambient) = ps.induced_section();
        assert!(semi_equivariant_check(&sec, &ps.rho, &ambient).unwrap());
    }

    #[test]
    fn trivialize_through_diagonal_ray() {
        let fan = single_cone(&[&[1, 1]]);
        let s = fan.maximal()[0];
        // the canonical complement of span{(1,1)} is span{e2}
        let h = TorusHom::diagonal(vec![ivec(&[3, 0])], 2);
        let c = AdmissibleCollection::new(
            fan,
            GroupTag::GeneralLinear(1),
            BTreeMap::from([(s, h.clone())]),
            BTreeMap::from([((s, s), QMatrix::identity(1))]),
        )
        .unwrap();
        assert_eq!(c.split(s).n_prime.basis().row_vectors(), vec![ivec(&[0, 1])]);
        assert_eq!(trivialize_affine(&c).unwrap().rho, h);
    }

    #[test]
    fn trivialize_uses_splitting_override() {
        let fan = single_cone(&[&[1, 0]]);
        let s = fan.maximal()[0];
        let h = TorusHom::diagonal(vec![ivec(&[1, -1])], 2);
        let c = AdmissibleCollection::new(
            fan,
            GroupTag::GeneralLinear(1),
            BTreeMap::from([(s, h.clone())]),
            BTreeMap::from([((s, s), QMatrix::identity(1))]),
        )
        .unwrap();
        assert!(trivialize_affine(&c).is_err());
        let c = c
            .with_splitting(s, Sublattice::new(2, vec![ivec(&[1, 1])]).unwrap())
            .unwrap();
        assert_eq!(trivialize_affine(&c).unwrap().rho, h);
    }

    #[test]
    fn trivialize_rejects_weight_on_orbit() {
        let fan = single_cone(&[&[1, 0]]);
        let s = fan.maximal()[0];
        let c = AdmissibleCollection::new(
            fan,
            GroupTag::GeneralLinear(1),
            BTreeMap::from([(s, TorusHom::diagonal(vec![ivec(&[1, 1])], 2))]),
            BTreeMap::from([((s, s), QMatrix::identity(1))]),
        )
        .unwrap();
        assert!(matches!(
            trivialize_affine(&c),
            Err(ClassifyError::Collection(CollectionError::NotAdmissible(_)))
        ));
        let two = gl1_p1(0, 0, rat(1));
        assert_eq!(trivialize_affine(&two), Err(ClassifyError::NotAffine { count: 2 }));
    }

    #[test]
    fn unipotent_p1_witness_is_telescoping() {
        let c = unipotent_p1(5);
        let w = check_unipotent_trivial(&c).unwrap();
        assert_eq!(w.g[&0], QMatrix::identity(2));
        assert_eq!(w.g[&1], QMatrix::from_i64(&[&[1, 5], &[0, 1]]));
    }

    #[test]
    fn unipotent_trivial_collection_gets_identity() {
        let c = AdmissibleCollection::trivial(projective_plane(), GroupTag::Unipotent(3));
        assert_eq!(check_unipotent_trivial(&c).unwrap(), GaugeWitness::identity(&c));
    }

    #[test]
    fn unipotent_check_rejects_other_groups() {
        let c = gl1_p1(0, 0, rat(1));
        assert_eq!(
            check_unipotent_trivial(&c),
            Err(ClassifyError::UnsupportedGroup(GroupTag::GeneralLinear(1)))
        );
        assert!(reduce_to_torus(&c, None).is_err());
    }

    fn upper_p1(a: i64, b: i64, s: i64) -> AdmissibleCollection {
        let rho = BTreeMap::from([
            (0, TorusHom::diagonal(vec![ivec(&[a]), ivec(&[a])], 1)),
            (1, TorusHom::diagonal(vec![ivec(&[b]), ivec(&[b])], 1)),
        ]);
        let u = QMatrix::from_i64(&[&[1, s], &[0, 1]]);
        let p = BTreeMap::from([
            ((0, 0), QMatrix::identity(2)),
            ((1, 1), QMatrix::identity(2)),
            ((1, 0), u.clone()),
            ((0, 1), u.inverse().unwrap()),
        ]);
        AdmissibleCollection::new(projective_line(), GroupTag::UpperTriangular(2), rho, p).unwrap()
    }

    #[test]
    fn upper_triangular_scalar_weights_reduce() {
        let c = upper_p1(2, -1, 3);
        let r = reduce_to_torus(&c, None).unwrap().unwrap();
        assert_eq!(r.reduced.group(), GroupTag::DiagonalTorus(2));
        assert!(r.reduced.validate().ok);
        assert!(r.reduced.p_map().values().all(QMatrix::is_identity));
        assert_eq!(weight_invariants(&r.reduced), weight_invariants(&c));
        // hand oracle: g_+ = 1, g_- = P(-,+)
        assert_eq!(r.witness.g[&1], QMatrix::from_i64(&[&[1, 3], &[0, 1]]));
    }

    #[test]
    fn diagonal_collection_reduces_with_identity() {
        let c = upper_p1(1, 1, 0);
        let r = reduce_to_torus(&c, None).unwrap().unwrap();
        assert_eq!(r.witness, GaugeWitness::identity(&c));
    }

    #[test]
    fn non_semisimple_transition_blocks_reduction() {
        // distinct weights on each cone; P(-,+) has an off-diagonal entry that
        // no upper-triangular gauge can remove while keeping both ρ diagonal
        let rho = BTreeMap::from([
            (0, TorusHom::diagonal(vec![ivec(&[1]), ivec(&[0])], 1)),
            (1, TorusHom::diagonal(vec![ivec(&[-1]), ivec(&[0])], 1)),
        ]);
        let u = QMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let p = BTreeMap::from([
            ((0, 0), QMatrix::identity(2)),
            ((1, 1), QMatrix::identity(2)),
            ((1, 0), u.clone()),
            ((0, 1), u.inverse().unwrap()),
        ]);
        let c = AdmissibleCollection::new(projective_line(), GroupTag::UpperTriangular(2), rho, p).unwrap();
        assert!(c.validate().ok);
        assert!(reduce_to_torus(&c, None).unwrap().is_none());
    }

    #[test]
    fn enumerate_p1_small_bound() {
        let reps = enumerate_line_bundles(&projective_line(), 1).unwrap();
        assert_eq!(reps.len(), 9);
        let first = weight_invariants(&reps[0]);
        assert_eq!(first, BTreeMap::from([(0, vec![ivec(&[-1])]), (1, vec![ivec(&[-1])])]));
    }

    fn arb_gl1_p1() -> impl Strategy<Value = AdmissibleCollection> {
        (-3i64..=3, -3i64..=3, 1i64..=9, 1i64..=9, any::<bool>()).prop_map(|(a, b, n, d, neg)| {
            let c = ratio(if neg { -n } else { n }, d);
            gl1_p1(a, b, c)
        })
    }

    proptest! {
        #[test]
        fn gauge_preserves_weight_invariants(c in arb_gl1_p1(), g0 in 1i64..7, g1 in -7i64..-1) {
            let w = witness(&[(0, QMatrix::scalar(1, rat(g0))), (1, QMatrix::scalar(1, rat(g1)))]);
            let d = apply_gauge(&c, &w).unwrap();
            prop_assert_eq!(weight_invariants(&d), weight_invariants(&c));
            prop_assert!(d.validate().ok);
        }

        #[test]
        fn gauged_copy_is_recovered(c in arb_gl1_p1(), g0 in 1i64..7, g1 in 1i64..7) {
            let w = witness(&[(0, QMatrix::scalar(1, rat(g0))), (1, QMatrix::scalar(1, ratio(1, g1)))]);
            let d = apply_gauge(&c, &w).unwrap();
            let Equivalence::Equivalent(found) = equivalent(&c, &d).unwrap() else {
                return Err(TestCaseError::fail("no witness"));
            };
            prop_assert_eq!(apply_gauge(&c, &found).unwrap(), d);
        }
    }
}
