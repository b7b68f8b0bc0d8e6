//! Dense exact linear algebra over `Q(zeta_m)`.
//!
//! Everything downstream (graded pieces, relation subspaces, weight-space
//! quotients, independence checks) reduces to maintaining reduced row echelon
//! spans with exact scalars. Matrices here are small (at most a few hundred
//! columns), so a dense representation is fine.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::Scalar;

/// A subspace of `Q(zeta_m)^n` kept in reduced row echelon form.
///
/// Rows are normalized to a leading 1 and fully back-substituted, so each
/// reduced vector is a canonical coset representative. Pivot columns are
/// strictly increasing across rows.
#[derive(Clone, Debug)]
pub struct RowSpace {
    m: u8,
    ncols: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: u8, ncols: usize) -> Self {
        RowSpace { m, ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.binary_search(&col).is_ok()
    }

    /// Reduce `v` modulo the span; the result has zeros in every pivot column.
    pub fn reduce(&self, mut v: Vec<Scalar>) -> Vec<Scalar> {
        debug_assert_eq!(v.len(), self.ncols);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let c = v[p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= c.clone() * r.clone();
                }
            }
        }
        v
    }

    pub fn contains(&self, v: Vec<Scalar>) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Insert a vector, keeping RREF. Returns `true` if the rank grew.
    pub fn insert(&mut self, v: Vec<Scalar>) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().expect("nonzero pivot");
        for x in v.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        // back-substitute into existing rows
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let c = row[p].clone();
                for (x, r) in row.iter_mut().zip(&v) {
                    *x -= c.clone() * r.clone();
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        true
    }

    /// Coordinates of `v` in the span's row basis, or `None` if not a member.
    pub fn coordinates(&self, v: Vec<Scalar>) -> Option<Vec<Scalar>> {
        let mut v = v;
        let mut coords = vec![Scalar::zero(self.m); self.rows.len()];
        for (i, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if !v[p].is_zero() {
                let c = v[p].clone();
                coords[i] = c.clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= c.clone() * r.clone();
                }
            }
        }
        if v.iter().all(Scalar::is_zero) {
            Some(coords)
        } else {
            None
        }
    }
}

/// Solver for coordinates over a fixed (independent) list of vectors.
///
/// Internally keeps the augmented matrix `[v_i | e_i]` in RREF, so reducing
/// `[w | 0]` leaves `-coords` in the indicator columns when `w` is a member.
#[derive(Clone, Debug)]
pub struct BasisSolver {
    m: u8,
    ncols: usize,
    k: usize,
    rs: RowSpace,
}

impl BasisSolver {
    pub fn new(m: u8, ncols: usize, vectors: &[Vec<Scalar>]) -> Self {
        let k = vectors.len();
        let mut rs = RowSpace::new(m, ncols + k);
        for (i, v) in vectors.iter().enumerate() {
            let mut row = v.clone();
            row.extend(vec![Scalar::zero(m); k]);
            row[ncols + i] = Scalar::one(m);
            let grew = rs.insert(row);
            assert!(grew, "basis vectors must be independent");
        }
        BasisSolver { m, ncols, k, rs }
    }

    /// Coordinates of `w` over the original vectors, or `None` if outside
    /// their span.
    pub fn coordinates(&self, w: &[Scalar]) -> Option<Vec<Scalar>> {
        let mut row = w.to_vec();
        row.extend(vec![Scalar::zero(self.m); self.k]);
        let red = self.rs.reduce(row);
        if red[..self.ncols].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(red[self.ncols..].iter().map(|c| -c.clone()).collect())
    }
}

/// Rank of a list of vectors.
pub fn rank(m: u8, ncols: usize, vectors: &[Vec<Scalar>]) -> usize {
    let mut rs = RowSpace::new(m, ncols);
    for v in vectors {
        rs.insert(v.clone());
    }
    rs.rank()
}

/// Basis of the right nullspace of the matrix whose rows are `rows`.
pub fn nullspace(m: u8, ncols: usize, rows: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut rs = RowSpace::new(m, ncols);
    for r in rows {
        rs.insert(r.clone());
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if rs.is_pivot(free) {
            continue;
        }
        let mut v = vec![Scalar::zero(m); ncols];
        v[free] = Scalar::one(m);
        for (row, &p) in rs.rows().iter().zip(rs.pivots()) {
            v[p] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}
