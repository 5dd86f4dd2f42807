//! Character algebra of the torus.
//!
//! A [`LaurentPoly`] is a finite rational combination of characters `χ^u`
//! with `u` in the character lattice `M`. Matrices of these represent maps
//! from the torus (or a toric chart) into a matrix group. Regularity on the
//! chart `X_ω` is decided monomial by monomial: `χ^u` is regular there iff
//! `u` lies in the dual cone `ω^∨`, and it is a unit iff `u ∈ ω^⊥`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fan::{dual_cone, Cone};
use crate::lattice::{dot, IntVector};
use crate::qmat::{QMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharError {
    #[error("size mismatch: expected {expected}, got {got}")]
    Size { expected: usize, got: usize },
    #[error("lattice rank mismatch: expected {expected}, got {got}")]
    Rank { expected: usize, got: usize },
    #[error("base change matrix is not invertible")]
    Singular,
}

/// Finite `Q`-linear combination of characters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    rank: usize,
    terms: BTreeMap<IntVector, Rational>,
}

impl LaurentPoly {
    pub fn zero(rank: usize) -> Self {
        LaurentPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: Rational) -> Self {
        Self::monomial(c, vec![BigInt::zero(); rank])
    }

    pub fn one(rank: usize) -> Self {
        Self::constant(rank, Rational::one())
    }

    /// `c · χ^u`.
    pub fn monomial(c: Rational, u: IntVector) -> Self {
        let rank = u.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(u, c);
        }
        LaurentPoly { rank, terms }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<IntVector, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single term, if there is exactly one.
    pub fn as_monomial(&self) -> Option<(&IntVector, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// The constant value, if the polynomial has no nonconstant terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (u, c) = self.terms.iter().next()?;
                u.iter().all(Zero::is_zero).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, u: IntVector, c: Rational) {
        debug_assert_eq!(u.len(), self.rank);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(u);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (u, c) in &other.terms {
            out.add_term(u.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(u, c)| (u.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.rank);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let w = u.iter().zip(v).map(|(x, y)| x + y).collect();
                out.add_term(w, a * b);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.rank);
        for (u, a) in &self.terms {
            out.add_term(u.clone(), a * c);
        }
        out
    }

    /// Rewrites every exponent through `f` into a lattice of rank `rank`.
    pub fn map_exponents(&self, rank: usize, f: impl Fn(&IntVector) -> IntVector) -> LaurentPoly {
        let mut out = LaurentPoly::zero(rank);
        for (u, c) in &self.terms {
            out.add_term(f(u), c.clone());
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (u, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let exp = u.iter().join(",");
            if c.is_one() {
                write!(f, "χ^({exp})")?;
            } else {
                write!(f, "{c}·χ^({exp})")?;
            }
        }
        Ok(())
    }
}

/// `χ^u` is regular on the chart `X_ω` iff `u ∈ ω^∨`; a polynomial is
/// regular iff each surviving monomial is.
pub fn regular_on(p: &LaurentPoly, omega: &Cone) -> bool {
    let dual = dual_cone(omega);
    regular_with_dual(p, &dual)
}

fn regular_with_dual(p: &LaurentPoly, dual: &Cone) -> bool {
    p.terms.keys().all(|u| dual.contains(u))
}

/// Units on `X_ω` are the monomials `c · χ^u` with `u ∈ ω^⊥`.
pub fn unit_on(p: &LaurentPoly, omega: &Cone) -> bool {
    match p.as_monomial() {
        Some((u, _)) => omega.rays().iter().all(|v| dot(u, v).is_zero()),
        None => false,
    }
}

/// Square matrix of Laurent polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentMatrix {
    n: usize,
    rank: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn identity(n: usize, rank: usize) -> Self {
        Self::constant(&QMatrix::identity(n), rank)
    }

    pub fn constant(m: &QMatrix, rank: usize) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let entries = (0..n * n)
            .map(|k| LaurentPoly::constant(rank, m.get(k / n, k % n).clone()))
            .collect();
        LaurentMatrix { n, rank, entries }
    }

    pub fn from_entries(n: usize, rank: usize, entries: Vec<LaurentPoly>) -> Result<Self, CharError> {
        if entries.len() != n * n {
            return Err(CharError::Size {
                expected: n * n,
                got: entries.len(),
            });
        }
        if let Some(p) = entries.iter().find(|p| p.rank != rank) {
            return Err(CharError::Rank {
                expected: rank,
                got: p.rank,
            });
        }
        Ok(LaurentMatrix { n, rank, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn mul(&self, other: &LaurentMatrix) -> LaurentMatrix {
        assert_eq!(self.n, other.n, "size mismatch");
        let n = self.n;
        let mut entries = vec![LaurentPoly::zero(self.rank); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = LaurentPoly::zero(self.rank);
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                entries[i * n + j] = acc;
            }
        }
        LaurentMatrix {
            n,
            rank: self.rank,
            entries,
        }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> LaurentPoly {
        let idx: Vec<usize> = (0..self.n).collect();
        self.minor_det(&idx, 0)
    }

    fn minor_det(&self, cols: &[usize], row: usize) -> LaurentPoly {
        if cols.is_empty() {
            return LaurentPoly::one(self.rank);
        }
        let mut acc = LaurentPoly::zero(self.rank);
        for (k, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a.mul(&self.minor_det(&rest, row + 1));
            acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    /// The constant matrix, if every entry is constant.
    pub fn as_constant(&self) -> Option<QMatrix> {
        let mut m = QMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j).as_constant()?);
            }
        }
        Some(m)
    }

    pub fn is_identity(&self) -> bool {
        *self == LaurentMatrix::identity(self.n, self.rank)
    }

    pub fn map_exponents(&self, rank: usize, f: impl Fn(&IntVector) -> IntVector) -> LaurentMatrix {
        LaurentMatrix {
            n: self.n,
            rank,
            entries: self.entries.iter().map(|p| p.map_exponents(rank, &f)).collect(),
        }
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{}]", (0..self.n).map(|j| self.get(i, j).to_string()).join(", "))?;
        }
        write!(f, "]")
    }
}

/// Algebraic homomorphism `T -> GL(n)`, `t ↦ A · diag(χ^{u_1}(t), …, χ^{u_n}(t)) · A^{-1}`.
#[derive(Clone, Debug)]
pub struct TorusHom {
    base_change: QMatrix,
    base_inverse: QMatrix,
    weights: Vec<IntVector>,
    rank: usize,
}

impl TorusHom {
    pub fn new(base_change: QMatrix, weights: Vec<IntVector>, rank: usize) -> Result<Self, CharError> {
        if !base_change.is_square() || base_change.rows() != weights.len() {
            return Err(CharError::Size {
                expected: weights.len(),
                got: base_change.rows(),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.len() != rank) {
            return Err(CharError::Rank {
                expected: rank,
                got: w.len(),
            });
        }
        let base_inverse = base_change.inverse().ok_or(CharError::Singular)?;
        Ok(TorusHom {
            base_change,
            base_inverse,
            weights,
            rank,
        })
    }

    pub fn trivial(n: usize, rank: usize) -> Self {
        Self::diagonal(vec![vec![BigInt::zero(); rank]; n], rank)
    }

    pub fn diagonal(weights: Vec<IntVector>, rank: usize) -> Self {
        let n = weights.len();
        TorusHom::new(QMatrix::identity(n), weights, rank).expect("identity base change")
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_change(&self) -> &QMatrix {
        &self.base_change
    }

    pub fn weights(&self) -> &[IntVector] {
        &self.weights
    }

    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(Zero::is_zero))
    }

    /// Weights as a sorted multiset.
    pub fn weight_multiset(&self) -> Vec<IntVector> {
        let mut w = self.weights.clone();
        w.sort();
        w
    }

    /// `t ↦ ρ(t)` as a Laurent matrix.
    pub fn to_matrix(&self) -> LaurentMatrix {
        self.matrix_with_sign(false)
    }

    /// `t ↦ ρ(t)^{-1}`.
    pub fn inverse_matrix(&self) -> LaurentMatrix {
        self.matrix_with_sign(true)
    }

    fn matrix_with_sign(&self, invert: bool) -> LaurentMatrix {
        let n = self.n();
        let mut entries = vec![LaurentPoly::zero(self.rank); n * n];
        for k in 0..n {
            for l in 0..n {
                let mut p = LaurentPoly::zero(self.rank);
                for (i, u) in self.weights.iter().enumerate() {
                    let c = self.base_change.get(k, i) * self.base_inverse.get(i, l);
                    let u = if invert {
                        u.iter().map(|x| -x).collect()
                    } else {
                        u.clone()
                    };
                    p.add_term(u, c);
                }
                entries[k * n + l] = p;
            }
        }
        LaurentMatrix {
            n,
            rank: self.rank,
            entries,
        }
    }

    /// `g^{-1} ρ g`, realized as `A ↦ g^{-1} A`.
    pub fn conjugate(&self, g: &QMatrix) -> Result<TorusHom, CharError> {
        let g_inv = g.inverse().ok_or(CharError::Singular)?;
        TorusHom::new(g_inv.mul(&self.base_change), self.weights.clone(), self.rank)
    }

    /// Rewrites the weights through `f`, landing in a torus of rank `rank`.
    pub fn map_weights(&self, rank: usize, f: impl Fn(&IntVector) -> IntVector) -> TorusHom {
        TorusHom {
            base_change: self.base_change.clone(),
            base_inverse: self.base_inverse.clone(),
            weights: self.weights.iter().map(f).collect(),
            rank,
        }
    }

    /// Normal form: weights sorted, and within each block of equal weights the
    /// columns of `A` replaced by the reduced echelon basis of their span.
    pub fn canonical(&self) -> TorusHom {
        let n = self.n();
        let order: Vec<usize> = (0..n)
            .sorted_by(|&a, &b| self.weights[a].cmp(&self.weights[b]))
            .collect();
        let weights: Vec<IntVector> = order.iter().map(|&i| self.weights[i].clone()).collect();
        let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(n);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && weights[end] == weights[start] {
                end += 1;
            }
            let block: Vec<Vec<Rational>> = order[start..end].iter().map(|&i| self.base_change.column(i)).collect();
            let (reduced, pivots) = QMatrix::from_rows(block).expect("columns of equal length").rref();
            for r in 0..pivots.len() {
                columns.push(reduced.row(r).to_vec());
            }
            start = end;
        }
        let a = QMatrix::from_columns(n, &columns);
        TorusHom::new(a, weights, self.rank).expect("eigenspace bases stay independent")
    }
}

impl PartialEq for TorusHom {
    fn eq(&self, other: &Self) -> bool {
        if self.rank != other.rank || self.n() != other.n() {
            return false;
        }
        let (a, b) = (self.canonical(), other.canonical());
        a.weights == b.weights && a.base_change == b.base_change
    }
}

impl Eq for TorusHom {}

impl fmt::Display for TorusHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A = {}, weights = [{}]",
            self.base_change,
            self.weights
                .iter()
                .map(|w| format!("({})", w.iter().join(",")))
                .join(", ")
        )
    }
}

/// Matrix presentation of the structure group `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupTag {
    GeneralLinear(usize),
    DiagonalTorus(usize),
    UpperTriangular(usize),
    Unipotent(usize),
}

impl GroupTag {
    pub fn n(&self) -> usize {
        match *self {
            GroupTag::GeneralLinear(n)
            | GroupTag::DiagonalTorus(n)
            | GroupTag::UpperTriangular(n)
            | GroupTag::Unipotent(n) => n,
        }
    }

    /// Membership of a constant matrix.
    pub fn contains_constant(&self, m: &QMatrix) -> bool {
        if m.rows() != self.n() || !m.is_square() {
            return false;
        }
        match self {
            GroupTag::GeneralLinear(_) => m.is_invertible(),
            GroupTag::DiagonalTorus(_) => m.is_diagonal() && m.is_invertible(),
            GroupTag::UpperTriangular(_) => m.is_upper_triangular() && m.is_invertible(),
            GroupTag::Unipotent(_) => m.is_upper_triangular() && (0..m.rows()).all(|i| m.get(i, i).is_one()),
        }
    }

    fn pattern_ok(&self, m: &LaurentMatrix) -> bool {
        let n = m.n;
        match self {
            GroupTag::GeneralLinear(_) => true,
            GroupTag::DiagonalTorus(_) => (0..n).all(|i| (0..n).all(|j| i == j || m.get(i, j).is_zero())),
            GroupTag::UpperTriangular(_) => (0..n).all(|i| (0..i).all(|j| m.get(i, j).is_zero())),
            GroupTag::Unipotent(_) => {
                (0..n).all(|i| (0..i).all(|j| m.get(i, j).is_zero()))
                    && (0..n).all(|i| m.get(i, i).as_constant().is_some_and(|c| c.is_one()))
            }
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, n) = match self {
            GroupTag::GeneralLinear(n) => ("GeneralLinear", n),
            GroupTag::DiagonalTorus(n) => ("DiagonalTorus", n),
            GroupTag::UpperTriangular(n) => ("UpperTriangular", n),
            GroupTag::Unipotent(n) => ("Unipotent", n),
        };
        write!(f, "{name}({n})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown group tag `{0}` (expected e.g. GeneralLinear(2))")]
pub struct ParseGroupError(pub String);

impl FromStr for GroupTag {
    type Err = ParseGroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseGroupError(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(err)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(err)?;
        let n: usize = inner.trim().parse().map_err(|_| err())?;
        if n == 0 {
            return Err(err());
        }
        match &s[..open] {
            "GeneralLinear" => Ok(GroupTag::GeneralLinear(n)),
            "DiagonalTorus" => Ok(GroupTag::DiagonalTorus(n)),
            "UpperTriangular" => Ok(GroupTag::UpperTriangular(n)),
            "Unipotent" => Ok(GroupTag::Unipotent(n)),
            _ => Err(err()),
        }
    }
}

/// Whether `m` is a `G`-valued regular function on `X_ω`: the entry pattern
/// matches the tag, every entry is regular and the determinant is a unit.
pub fn group_member(m: &LaurentMatrix, g: GroupTag, omega: &Cone) -> bool {
    if m.n != g.n() || m.rank != omega.ambient_rank() {
        return false;
    }
    if !g.pattern_ok(m) {
        return false;
    }
    let dual = dual_cone(omega);
    m.entries.iter().all(|p| regular_with_dual(p, &dual)) && unit_on(&m.det(), omega)
}

/// Checks `s(t·x) = ρ_amb(t) · s(x) · ρ(t)^{-1}` on the dense torus.
///
/// Both sides are expanded as Laurent polynomials in the pair `(t, x)`;
/// translating by `t` sends `χ^u(x)` to `χ^u(t) χ^u(x)`.
pub fn semi_equivariant_check(s: &LaurentMatrix, rho: &TorusHom, ambient: &TorusHom) -> Result<bool, CharError> {
    for h in [rho, ambient] {
        if h.n() != s.n {
            return Err(CharError::Size {
                expected: s.n,
                got: h.n(),
            });
        }
        if h.rank != s.rank {
            return Err(CharError::Rank {
                expected: s.rank,
                got: h.rank,
            });
        }
    }
    let r = s.rank;
    let in_t = |u: &IntVector| {
        u.iter()
            .cloned()
            .chain(std::iter::repeat_n(BigInt::zero(), r))
            .collect()
    };
    let in_x = |u: &IntVector| {
        std::iter::repeat_n(BigInt::zero(), r)
            .chain(u.iter().cloned())
            .collect()
    };
    let translated = |u: &IntVector| u.iter().cloned().chain(u.iter().cloned()).collect();

    let lhs = s.map_exponents(2 * r, translated);
    let rhs = ambient
        .to_matrix()
        .map_exponents(2 * r, in_t)
        .mul(&s.map_exponents(2 * r, in_x))
        .mul(&rho.inverse_matrix().map_exponents(2 * r, in_t));
    Ok(lhs == rhs)
}
