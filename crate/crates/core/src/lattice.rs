//! Exact integer linear algebra over `Z^n`.
//!
//! Provides [`IntMatrix`] with a Smith normal form decomposition, and
//! [`Sublattice`] with saturation and direct-sum complements. The splitting
//! `N = N_sigma (+) N'` used to define the projection onto a stabilizer
//! subtorus is built from these pieces.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Integer vector, used for points of `N` and covectors of `M`.
pub type IntVector = Vec<BigInt>;

/// Converts a slice of machine integers into an [`IntVector`].
pub fn ivec(v: &[i64]) -> IntVector {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Standard pairing `<u, v>`.
pub fn dot(u: &[BigInt], v: &[BigInt]) -> BigInt {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Gcd of all coordinates (zero for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Divides out the content. Returns `None` for the zero vector.
pub fn primitive(v: &[BigInt]) -> Option<IntVector> {
    let g = content(v);
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x / &g).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("sublattice is not saturated; no direct-sum complement exists")]
    NotSaturated,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bases do not form a direct-sum decomposition of the ambient lattice")]
    NotComplementary,
}

/// Dense integer matrix with arbitrary-precision entries, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed to describe a matrix with no rows.
    pub fn from_rows(cols: usize, rows: Vec<IntVector>) -> Result<Self, LatticeError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let nrows = rows.len();
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(LatticeError::RaggedRow {
                    row: i,
                    got: r.len(),
                    expected: cols,
                });
            }
            data.extend(r);
        }
        Ok(IntMatrix {
            rows: nrows,
            cols,
            data,
        })
    }

    /// Convenience constructor for tests and literals. Panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| ivec(r)).collect()).expect("ragged literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<IntVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn apply(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Stacks `self` on top of `other`.
    pub fn stack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// First `k` rows.
    pub fn top_rows(&self, k: usize) -> IntMatrix {
        IntMatrix {
            rows: k,
            cols: self.cols,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    /// Rows from `k` to the end.
    pub fn bottom_rows(&self, k: usize) -> IntMatrix {
        IntMatrix {
            rows: self.rows - k,
            cols: self.cols,
            data: self.data[k * self.cols..].to_vec(),
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self.row_vectors();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = self.row_vectors();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for i in rank + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                let piv = a[rank][c].clone();
                let pivot_row = a[rank].clone();
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x = &*x * &piv - p * &f;
                }
                let g = content(&a[i]);
                if !g.is_zero() {
                    for x in a[i].iter_mut() {
                        *x /= &g;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().abs().is_one()
    }

    /// Inverse of a unimodular matrix, or `None` if `|det| != 1`.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if !self.is_square() {
            return None;
        }
        if self.rows == 0 {
            return Some(self.clone());
        }
        let s = snf_tracked(self);
        if (0..self.rows).any(|i| !s.d.get(i, i).is_one()) {
            return None;
        }
        // u a v = I  =>  a^{-1} = v u
        Some(s.v.mul(&s.u))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += f * row[src]
    fn add_row(&mut self, dst: usize, src: usize, f: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * f;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += f * col[src]
    fn add_col(&mut self, dst: usize, src: usize, f: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * f;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let idx = r * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Smith normal form `u * a * v = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries of `d`, i.e. the invariant factors.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

struct Tracked {
    u: IntMatrix,
    d: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

/// Computes the Smith normal form of `a`.
///
/// The diagonal of `d` is nonnegative and each entry divides the next.
pub fn snf(a: &IntMatrix) -> SnfResult {
    let t = snf_tracked(a);
    SnfResult { u: t.u, d: t.d, v: t.v }
}

fn snf_tracked(a: &IntMatrix) -> Tracked {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut v_inv = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // smallest nonzero entry of the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if pivot.is_none_or(|(pi, pj)| x.abs() < d.get(pi, pj).abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Tracked { u, d, v, v_inv };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let p = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = d.get(i, t).div_floor(&p);
                if !q.is_zero() {
                    d.add_row(i, t, &-&q);
                    u.add_row(i, t, &-&q);
                }
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = d.get(t, j).div_floor(&p);
                if !q.is_zero() {
                    d.add_col(j, t, &-&q);
                    v.add_col(j, t, &-&q);
                    v_inv.add_row(t, j, &q);
                }
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad_row = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&p)));
            if let Some(i) = bad_row {
                let one = BigInt::one();
                d.add_row(t, i, &one);
                u.add_row(t, i, &one);
                continue;
            }
            break;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    Tracked { u, d, v, v_inv }
}

/// Row Hermite normal form of the nonzero rows: echelon, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`.
pub(crate) fn hermite_rows(a: &IntMatrix) -> IntMatrix {
    let cols = a.cols;
    let mut rows = a.row_vectors();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r >= rows.len() {
            break;
        }
        loop {
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pr = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = row[c].div_floor(&pr[c]);
            if !q.is_zero() {
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    IntMatrix::from_rows(cols, rows).expect("rows keep their width")
}

/// A sublattice of `Z^n` given by a basis of independent row vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sublattice {
    ambient_rank: usize,
    basis: IntMatrix,
}

impl Sublattice {
    pub fn new(ambient_rank: usize, basis: Vec<IntVector>) -> Result<Self, LatticeError> {
        let basis = IntMatrix::from_rows(ambient_rank, basis)?;
        if basis.rank() != basis.rows {
            return Err(LatticeError::DependentBasis);
        }
        Ok(Sublattice { ambient_rank, basis })
    }

    pub fn zero(ambient_rank: usize) -> Self {
        Sublattice {
            ambient_rank,
            basis: IntMatrix::zeros(0, ambient_rank),
        }
    }

    pub fn full(ambient_rank: usize) -> Self {
        Sublattice {
            ambient_rank,
            basis: IntMatrix::identity(ambient_rank),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    /// Basis vectors as the rows of a matrix.
    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn is_saturated(&self) -> bool {
        if self.rank() == 0 {
            return true;
        }
        snf(&self.basis).invariant_factors().iter().all(|d| d.is_one())
    }

    /// The saturation `span_Q(s) ∩ Z^n`, returned in Hermite normal form.
    pub fn saturate(&self) -> Sublattice {
        let k = self.rank();
        if k == 0 {
            return self.clone();
        }
        // B = u^{-1} d v^{-1}; the first k rows of v^{-1} span the same rational
        // space and, being rows of a unimodular matrix, a saturated lattice.
        let t = snf_tracked(&self.basis);
        Sublattice {
            ambient_rank: self.ambient_rank,
            basis: hermite_rows(&t.v_inv.top_rows(k)),
        }
    }

    /// A canonical `N'` with `Z^n = self (+) N'`.
    pub fn complement(&self) -> Result<Sublattice, LatticeError> {
        let n = self.ambient_rank;
        let k = self.rank();
        if k == 0 {
            return Ok(Sublattice::full(n));
        }
        let t = snf_tracked(&self.basis);
        if (0..k).any(|i| !t.d.get(i, i).is_one()) {
            return Err(LatticeError::NotSaturated);
        }
        let own = hermite_rows(&self.basis);
        let mut rest = t.v_inv.bottom_rows(k).row_vectors();
        // reduce against the sublattice's pivots; only changes N' modulo self
        for b in own.row_vectors() {
            let Some(pc) = b.iter().position(|x| !x.is_zero()) else {
                continue;
            };
            for c in rest.iter_mut() {
                let q = c[pc].div_floor(&b[pc]);
                if !q.is_zero() {
                    for (x, y) in c.iter_mut().zip(&b) {
                        *x -= &q * y;
                    }
                }
            }
        }
        let rest = IntMatrix::from_rows(n, rest)?;
        Ok(Sublattice {
            ambient_rank: n,
            basis: hermite_rows(&rest),
        })
    }

    /// Whether `self` and `other` split the ambient lattice as a direct sum.
    pub fn is_complementary(&self, other: &Sublattice) -> bool {
        self.ambient_rank == other.ambient_rank
            && self.rank() + other.rank() == self.ambient_rank
            && self.basis.stack(&other.basis).is_unimodular()
    }

    /// Whether `v` lies in the integer span of the basis.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        if v.len() != self.ambient_rank {
            return false;
        }
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        if self.rank() == 0 {
            return false;
        }
        // solve x * B = v through the Smith form: x = y u with y d = v v_mat
        let s = snf(&self.basis);
        let w: IntVector = (0..self.ambient_rank).map(|j| dot(v, &column(&s.v, j))).collect();
        for (j, wj) in w.iter().enumerate() {
            if j < self.rank() {
                let dj = s.d.get(j, j);
                if dj.is_zero() || !wj.is_multiple_of(dj) {
                    return false;
                }
            } else if !wj.is_zero() {
                return false;
            }
        }
        true
    }
}

fn column(m: &IntMatrix, j: usize) -> IntVector {
    (0..m.rows).map(|i| m.get(i, j).clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn gcd_of_minors(a: &IntMatrix, k: usize) -> BigInt {
        let mut g = BigInt::zero();
        for rs in (0..a.rows).combinations(k) {
            for cs in (0..a.cols).combinations(k) {
                let sub = IntMatrix::from_rows(
                    k,
                    rs.iter()
                        .map(|&i| cs.iter().map(|&j| a.get(i, j).clone()).collect())
                        .collect(),
                )
                .unwrap();
                g = g.gcd(&sub.det());
            }
        }
        g
    }

    fn check_snf(a: &IntMatrix) {
        let s = snf(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        assert!(s.u.is_unimodular());
        assert!(s.v.is_unimodular());
        let r = a.rows.min(a.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        let mut prod = BigInt::one();
        for i in 0..r {
            let di = s.d.get(i, i);
            assert!(!di.is_negative());
            if i + 1 < r {
                let next = s.d.get(i + 1, i + 1);
                assert!(di.is_zero() && next.is_zero() || !di.is_zero() && next.is_multiple_of(di));
            }
            prod *= di;
            assert_eq!(prod, gcd_of_minors(a, i + 1), "minor oracle at k = {}", i + 1);
        }
    }

    #[test]
    fn snf_identity() {
        let a = IntMatrix::identity(2);
        let s = snf(&a);
        assert_eq!(s.d, a);
        check_snf(&a);
    }

    #[test]
    fn snf_coprime_diagonal() {
        let s = snf(&IntMatrix::from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.d, IntMatrix::from_i64(&[&[1, 0], &[0, 6]]));
    }

    #[test]
    fn snf_two_by_two() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        assert_eq!(snf(&a).d, IntMatrix::from_i64(&[&[2, 0], &[0, 4]]));
        check_snf(&a);
    }

    #[test]
    fn snf_rectangular_and_zero() {
        check_snf(&IntMatrix::from_i64(&[&[0, 0, 0], &[0, 0, 0]]));
        check_snf(&IntMatrix::from_i64(&[&[4, 6, 10]]));
        check_snf(&IntMatrix::from_i64(&[&[4], &[6], &[9]]));
    }

    #[test]
    fn saturate_examples() {
        let s = Sublattice::new(2, vec![ivec(&[2, 0])]).unwrap();
        assert_eq!(s.saturate().basis(), &IntMatrix::from_i64(&[&[1, 0]]));
        let s = Sublattice::new(2, vec![ivec(&[1, 1])]).unwrap();
        assert_eq!(s.saturate().basis(), &IntMatrix::from_i64(&[&[1, 1]]));
        let s = Sublattice::new(2, vec![ivec(&[2, 4]), ivec(&[6, 8])]).unwrap();
        assert_eq!(s.saturate().basis(), &IntMatrix::identity(2));
    }

    #[test]
    fn dependent_basis_rejected() {
        assert_eq!(
            Sublattice::new(2, vec![ivec(&[1, 2]), ivec(&[2, 4])]),
            Err(LatticeError::DependentBasis)
        );
    }

    #[test]
    fn complement_examples() {
        let s = Sublattice::new(2, vec![ivec(&[1, 0])]).unwrap();
        assert_eq!(s.complement().unwrap().basis(), &IntMatrix::from_i64(&[&[0, 1]]));

        let s = Sublattice::new(2, vec![ivec(&[1, 1])]).unwrap();
        let c = s.complement().unwrap();
        assert!(s.is_complementary(&c));
        assert_eq!(c.basis(), &IntMatrix::from_i64(&[&[0, 1]]));

        let c = Sublattice::full(3).complement().unwrap();
        assert_eq!(c.rank(), 0);
        assert_eq!(Sublattice::zero(2).complement().unwrap(), Sublattice::full(2));
    }

    #[test]
    fn complement_rejects_unsaturated() {
        let s = Sublattice::new(2, vec![ivec(&[2, 0])]).unwrap();
        assert_eq!(s.complement(), Err(LatticeError::NotSaturated));
    }

    #[test]
    fn membership() {
        let s = Sublattice::new(3, vec![ivec(&[2, 0, 0]), ivec(&[0, 1, 1])]).unwrap();
        assert!(s.contains(&ivec(&[2, 3, 3])));
        assert!(!s.contains(&ivec(&[1, 0, 0])));
        assert!(!s.contains(&ivec(&[0, 1, 0])));
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let a = IntMatrix::from_i64(&[&[2, 3], &[1, 2]]);
        let inv = a.unimodular_inverse().unwrap();
        assert_eq!(a.mul(&inv), IntMatrix::identity(2));
        assert!(IntMatrix::from_i64(&[&[2, 0], &[0, 1]]).unimodular_inverse().is_none());
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-9i64..=9, r * c).prop_map(move |v| {
                let rows: Vec<&[i64]> = v.chunks(c).collect();
                IntMatrix::from_i64(&rows)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn snf_matches_minor_oracle(a in small_matrix()) {
            check_snf(&a);
        }

        #[test]
        fn saturation_is_idempotent_and_splits(a in small_matrix()) {
            let rows: Vec<IntVector> = a.row_vectors();
            if let Ok(s) = Sublattice::new(a.cols(), rows) {
                let sat = s.saturate();
                prop_assert!(sat.is_saturated());
                prop_assert_eq!(sat.saturate(), sat.clone());
                for r in s.basis().row_vectors() {
                    prop_assert!(sat.contains(&r));
                }
                let c = sat.complement().unwrap();
                prop_assert!(sat.is_complementary(&c));
            }
        }
    }
}
