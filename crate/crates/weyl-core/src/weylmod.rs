//! Cyclic highest-weight modules over truncated loop algebras: PBW
//! straightening, the relation-subspace engine, local Weyl modules
//! (untwisted and twisted-by-restriction), evaluation modules, tensor
//! products, Garland coefficients and the embedding-chain checks.
//!
//! The engine realizes the quotient of `U(L)` by the left ideal generated by
//! the positive part, a Cartan character and the integrability powers. It
//! works shell by shell in the weight grading: candidate vectors are sorted
//! monomials over the negative part applied to the generator; the relation
//! subspace is the two-step closure of the integrability vectors, first under
//! the Cartan and positive actions (bounded above), then downward under the
//! negative action. Construction deepens the defining ideal until two
//! consecutive depths agree on the dimension, which certifies the truncation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::liealg::{ChevalleyAlgebra, GradedPieces, LiftedAut};
use crate::linalg::RowSpace;
use crate::looplie::{
    small_subalgebra, truncate, twisted_image_in_truncation, LoopElement, LoopError, MonicPoly,
    Sl2Loop, Tri, TruncatedLie,
};
use crate::rootdata::{fold, restrict_weight, DiagramAut, FoldedRootData, Weight};
use crate::scalar::{rat, Rational, Scalar};
use crate::xi::{chi_admissible, wt0, XiFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleError {
    Loop(LoopError),
    Collapsed(String),
    DepthNotStabilized(String),
    BadInput(String),
}

impl fmt::Display for ModuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleError::Loop(e) => write!(f, "{e}"),
            ModuleError::Collapsed(s) => write!(f, "module collapsed: {s}"),
            ModuleError::DepthNotStabilized(s) => write!(f, "depth not stabilized: {s}"),
            ModuleError::BadInput(s) => write!(f, "bad input: {s}"),
        }
    }
}

impl From<LoopError> for ModuleError {
    fn from(e: LoopError) -> Self {
        ModuleError::Loop(e)
    }
}

/// Sorted multiset of negative basis indices, in the fixed PBW order.
pub type PbwMonomial = Vec<u16>;
/// Linear combination of PBW monomials.
pub type LinComb = BTreeMap<PbwMonomial, Scalar>;
/// Column-sparse matrix: `mat[j]` is the image of basis vector `j`.
pub type SparseMat = Vec<Vec<(usize, Scalar)>>;

/// A finite-dimensional cyclic highest-weight module with explicit action
/// matrices over a truncated algebra.
#[derive(Clone, Debug)]
pub struct HwModule {
    pub m: u8,
    pub trunc: TruncatedLie,
    pub dim: usize,
    /// Coset-representative monomials (over negative basis indices).
    pub basis_mono: Vec<PbwMonomial>,
    /// Weight drop of each basis vector, in restricted-pairing coordinates.
    pub drops: Vec<Vec<i64>>,
    /// Index of the highest-weight vector (the empty monomial).
    pub hw_index: usize,
    /// Highest weight, in the same pairing coordinates as the drops.
    pub lambda: Vec<i64>,
    /// Action matrix per truncated basis element.
    pub actions: Vec<SparseMat>,
    /// Character on the Cartan part (by truncated basis index).
    pub phi: Vec<Option<Scalar>>,
    /// Certified stabilization depth (ideal exponent), when applicable.
    pub depth: usize,
}

impl HwModule {
    /// Apply a truncated basis element to a module vector.
    pub fn apply_basis(&self, b: usize, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(self.m); self.dim];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, a) in &self.actions[b][j] {
                out[*i] += c.clone() * a.clone();
            }
        }
        out
    }

    /// Matrix of an arbitrary loop element (columns over the module basis).
    pub fn loop_matrix(
        &self,
        alg: &ChevalleyAlgebra,
        lifted: &LiftedAut,
        el: &LoopElement,
    ) -> Result<SparseMat, ModuleError> {
        let coords = self.trunc.embed(alg, lifted, el)?;
        let mut mat: SparseMat = vec![Vec::new(); self.dim];
        for (b, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, col) in self.actions[b].iter().enumerate() {
                for (i, a) in col {
                    push_entry(&mut mat[j], *i, c.clone() * a.clone());
                }
            }
        }
        for col in mat.iter_mut() {
            col.retain(|(_, c)| !c.is_zero());
            col.sort_by_key(|(i, _)| *i);
        }
        Ok(mat)
    }

    pub fn apply_loop(
        &self,
        alg: &ChevalleyAlgebra,
        lifted: &LiftedAut,
        el: &LoopElement,
        v: &[Scalar],
    ) -> Result<Vec<Scalar>, ModuleError> {
        let mat = self.loop_matrix(alg, lifted, el)?;
        let mut out = vec![Scalar::zero(self.m); self.dim];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, a) in &mat[j] {
                out[*i] += c.clone() * a.clone();
            }
        }
        Ok(out)
    }

    pub fn hw_vector(&self) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(self.m); self.dim];
        v[self.hw_index] = Scalar::one(self.m);
        v
    }

    /// Weight label (pairing coordinates) of each basis vector. The stored
    /// drop carries a trailing jet-grade component, which is not part of the
    /// weight.
    pub fn weight_label(&self, i: usize) -> Vec<i64> {
        self.lambda
            .iter()
            .zip(&self.drops[i])
            .map(|(l, d)| l - d)
            .collect()
    }

    /// Verify the bracket relations on all pairs of truncated basis elements.
    pub fn verify_representation(&self) -> bool {
        let l = self.trunc.dim();
        for x in 0..l {
            for y in x + 1..l {
                // rho([x, y])
                let mut lhs: SparseMat = vec![Vec::new(); self.dim];
                for (k, c) in self.trunc.bracket_basis(x, y) {
                    for (j, col) in self.actions[*k].iter().enumerate() {
                        for (i, a) in col {
                            push_entry(&mut lhs[j], *i, c.clone() * a.clone());
                        }
                    }
                }
                // rho(x) rho(y) - rho(y) rho(x)
                let mut rhs: SparseMat = vec![Vec::new(); self.dim];
                for j in 0..self.dim {
                    for (mid, c) in &self.actions[y][j] {
                        for (i, a) in &self.actions[x][*mid] {
                            push_entry(&mut rhs[j], *i, c.clone() * a.clone());
                        }
                    }
                    for (mid, c) in &self.actions[x][j] {
                        for (i, a) in &self.actions[y][*mid] {
                            push_entry(&mut rhs[j], *i, -(c.clone() * a.clone()));
                        }
                    }
                }
                for j in 0..self.dim {
                    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
                    for (i, c) in lhs[j].iter() {
                        *acc.entry(*i).or_insert_with(|| Scalar::zero(self.m)) += c.clone();
                    }
                    for (i, c) in rhs[j].iter() {
                        *acc.entry(*i).or_insert_with(|| Scalar::zero(self.m)) -= c.clone();
                    }
                    if acc.values().any(|c| !c.is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Scalar by which a Cartan-type loop element acts on the highest-weight
    /// vector (asserting it acts by a scalar there).
    pub fn hw_eigenvalue(
        &self,
        alg: &ChevalleyAlgebra,
        lifted: &LiftedAut,
        el: &LoopElement,
    ) -> Result<Scalar, ModuleError> {
        let v = self.apply_loop(alg, lifted, el, &self.hw_vector())?;
        for (i, c) in v.iter().enumerate() {
            if i != self.hw_index && !c.is_zero() {
                return Err(ModuleError::BadInput(
                    "element does not act diagonally on the highest-weight line".into(),
                ));
            }
        }
        Ok(v[self.hw_index].clone())
    }
}

fn push_entry(col: &mut Vec<(usize, Scalar)>, i: usize, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match col.iter_mut().find(|(j, _)| *j == i) {
        Some((_, v)) => *v += c,
        None => col.push((i, c)),
    }
}

/// Straightening context over a truncated algebra: the fixed PBW order and
/// the action recursion with memoization.
struct Engine<'a> {
    trunc: &'a TruncatedLie,
    /// Negative basis indices in PBW order (height descending, then loop
    /// degree, then index).
    neg: Vec<usize>,
    /// PBW rank per truncated index (usize::MAX for non-negative elements).
    rank: Vec<usize>,
    phi: Vec<Option<Scalar>>,
    memo: BTreeMap<(usize, PbwMonomial), Rc<LinComb>>,
}

impl<'a> Engine<'a> {
    fn new(trunc: &'a TruncatedLie, phi: Vec<Option<Scalar>>) -> Self {
        let mut neg: Vec<usize> = (0..trunc.dim())
            .filter(|&i| trunc.basis[i].cls == Tri::Neg)
            .collect();
        neg.sort_by_key(|&i| {
            let b = &trunc.basis[i];
            (-b.ht, b.grade, b.coset, i)
        });
        let mut rank = vec![usize::MAX; trunc.dim()];
        for (r, &i) in neg.iter().enumerate() {
            rank[i] = r;
        }
        Engine { trunc, neg, rank, phi, memo: BTreeMap::new() }
    }

    fn zero(&self) -> LinComb {
        BTreeMap::new()
    }

    fn add_into(acc: &mut LinComb, mono: PbwMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match acc.entry(mono) {
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn add_scaled(&self, acc: &mut LinComb, other: &LinComb, c: &Scalar) {
        for (m, v) in other {
            Self::add_into(acc, m.clone(), v.clone() * c.clone());
        }
    }

    /// Action of a truncated basis element on a PBW monomial (of the induced
    /// module with the stored character).
    fn act(&mut self, b: usize, mono: &PbwMonomial) -> Rc<LinComb> {
        let key = (b, mono.clone());
        if let Some(hit) = self.memo.get(&key) {
            return Rc::clone(hit);
        }
        let result = Rc::new(self.act_inner(b, mono));
        self.memo.insert(key, Rc::clone(&result));
        result
    }

    fn act_inner(&mut self, b: usize, mono: &PbwMonomial) -> LinComb {
        let cls = self.trunc.basis[b].cls;
        if mono.is_empty() {
            let mut out = self.zero();
            match cls {
                Tri::Neg => {
                    Self::add_into(&mut out, vec![b as u16], Scalar::one(self.trunc.m));
                }
                Tri::Car => {
                    let c = self.phi[b].clone().expect("character on the Cartan part");
                    Self::add_into(&mut out, Vec::new(), c);
                }
                Tri::Pos => {}
            }
            return out;
        }
        let head = mono[0] as usize;
        if cls == Tri::Neg && self.rank[b] <= self.rank[head] {
            let mut m2 = Vec::with_capacity(mono.len() + 1);
            m2.push(b as u16);
            m2.extend_from_slice(mono);
            let mut out = self.zero();
            Self::add_into(&mut out, m2, Scalar::one(self.trunc.m));
            return out;
        }
        // b x_head = x_head b + [b, x_head]
        let rest: PbwMonomial = mono[1..].to_vec();
        let tail = self.act(b, &rest);
        let mut out = self.zero();
        // prepend head to every monomial of `tail`
        for (m2, c) in tail.iter() {
            let pre = self.act(head, m2);
            self.add_scaled(&mut out, &pre, c);
        }
        let bracket = self.trunc.bracket_basis(b, head).clone();
        for (k, c) in &bracket {
            let part = self.act(*k, &rest);
            self.add_scaled(&mut out, &part, c);
        }
        out
    }

    /// Drop vector of a monomial: restricted-pairing coordinates extended by
    /// the accumulated jet grade.
    fn drop_of(&self, mono: &PbwMonomial) -> Vec<i64> {
        let k = self.trunc.rank0();
        let mut d = vec![0i64; k + 1];
        for &i in mono {
            let w = self.trunc.ext_weight(i as usize);
            for (slot, x) in d.iter_mut().zip(&w) {
                *slot -= x;
            }
        }
        d
    }

    fn height_of(&self, mono: &PbwMonomial) -> i64 {
        mono.iter().map(|&i| self.trunc.basis[i as usize].ht).sum()
    }
}

/// Integrability generator: `power`-th power of the negative element `index`.
#[derive(Clone, Debug)]
pub struct PowerRelation {
    pub index: usize,
    pub power: usize,
}

/// Weight-polytope data of the grading root system. The quotient by the
/// integrability relations is an integrable module, so its weights are
/// confined to the convex hull of the Weyl orbit of the highest weight:
/// shells outside the hull lie entirely in the relation submodule and only
/// shells up to the height of `lambda - w_0 lambda` can survive.
#[derive(Clone, Debug)]
pub struct HullInfo {
    /// Cartan matrix of the grading system, `a[i][j] = alpha_j(H_i)`.
    pub cartan: Vec<Vec<i64>>,
    /// Honest-coroot multipliers applied to pairing coordinates (all 1 for
    /// untwisted gradings, `2/c_i` for folded ones).
    pub mult: Vec<i64>,
    /// Highest weight in pairing coordinates.
    pub lambda: Vec<i64>,
}

impl HullInfo {
    fn honest(&self, pairing: &[i64]) -> Vec<i64> {
        pairing.iter().zip(&self.mult).map(|(v, m)| v * m).collect()
    }

    /// Apply simple reflections until dominant (coordinates are coroot values).
    fn dominantize(&self, mut mu: Vec<i64>) -> Vec<i64> {
        let n = mu.len();
        loop {
            let Some(i) = (0..n).find(|&i| mu[i] < 0) else {
                return mu;
            };
            let c = mu[i];
            for j in 0..n {
                mu[j] -= c * self.cartan[j][i];
            }
        }
    }

    /// Root coordinates of a coroot-value vector, if integral.
    fn root_coords(&self, v: &[i64]) -> Option<Vec<Rational>> {
        // solve cartan * c = v by Gaussian elimination over Q
        let n = v.len();
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut row: Vec<Rational> = self.cartan[i].iter().map(|&x| rat(x)).collect();
                row.push(rat(v[i]));
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            let inv = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = x.clone() / inv.clone();
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c2 in 0..=n {
                        let sub = f.clone() * a[col][c2].clone();
                        a[r][c2] -= sub;
                    }
                }
            }
        }
        Some((0..n).map(|i| a[i][n].clone()).collect())
    }

    /// Is the weight `lambda - drop` (pairing coordinates) inside the hull?
    fn shell_in_hull(&self, drop: &[i64]) -> bool {
        let mu: Vec<i64> = self
            .lambda
            .iter()
            .zip(drop)
            .map(|(l, d)| l - d)
            .collect();
        let mu_plus = self.dominantize(self.honest(&mu));
        let lam = self.honest(&self.lambda);
        let diff: Vec<i64> = lam.iter().zip(&mu_plus).map(|(l, m)| l - m).collect();
        match self.root_coords(&diff) {
            Some(c) => c.iter().all(|x| !x.is_negative()),
            None => false,
        }
    }

    /// Height of `lambda - w_0 lambda`: the deepest possibly-nonzero shell.
    pub fn max_height(&self) -> i64 {
        let lam = self.honest(&self.lambda);
        let neg: Vec<i64> = lam.iter().map(|x| -x).collect();
        let w0 = self.dominantize(neg);
        let total: Vec<i64> = lam.iter().zip(&w0).map(|(a, b)| a + b).collect();
        let coords = self.root_coords(&total).expect("weight in the root lattice span");
        let mut ht = Rational::zero();
        for c in coords {
            ht += c;
        }
        debug_assert!(ht.denom().is_one());
        i64::try_from(ht.numer().clone()).expect("small height")
    }
}

struct Shell {
    monos: Vec<PbwMonomial>,
    index: BTreeMap<PbwMonomial, usize>,
    rel: RowSpace,
    /// kept (non-pivot) monomial positions after the quotient
    kept: Vec<usize>,
    /// Outside the weight polytope: the whole shell lies in the relation
    /// submodule.
    full_relation: bool,
}

/// Build the cyclic quotient of the induced module by the submodule generated
/// by the power relations. `phi` is the Cartan character by basis index and
/// `hull` the weight-polytope data of the grading system.
pub fn build_cyclic(
    trunc: &TruncatedLie,
    phi: Vec<Option<Scalar>>,
    powers: &[PowerRelation],
    hull: &HullInfo,
    depth_label: usize,
) -> Result<HwModule, ModuleError> {
    let m = trunc.m;
    let mut eng = Engine::new(trunc, phi.clone());

    // relation seeds
    let mut t_seeds: Vec<(Vec<i64>, LinComb)> = Vec::new();
    for p in powers {
        let mono: PbwMonomial = vec![p.index as u16; p.power];
        let mut lc = BTreeMap::new();
        lc.insert(mono.clone(), Scalar::one(m));
        t_seeds.push((eng.drop_of(&mono), lc));
    }
    let seed_max_ht = t_seeds
        .iter()
        .flat_map(|(_, lc)| lc.keys().map(|mono| eng.height_of(mono)))
        .max()
        .unwrap_or(0);
    // Cartan and positive actions never raise the height, so this covers the
    // whole relation closure; hull.max_height() covers every shell that can
    // survive the quotient.
    let hmax = hull.max_height().max(seed_max_ht);

    // enumerate all monomials up to hmax, shell = drop vector
    let mut shells: BTreeMap<Vec<i64>, Shell> = BTreeMap::new();
    let mut shells_by_ht: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
    let mut pending: BTreeMap<i64, Vec<PbwMonomial>> = BTreeMap::new();
    pending.insert(0, vec![Vec::new()]);
    for h in 0..=hmax {
        let monos = pending.remove(&h).unwrap_or_default();
        for mono in monos {
            let drop = eng.drop_of(&mono);
            let shell = shells.entry(drop.clone()).or_insert_with(|| {
                shells_by_ht.entry(h).or_default().push(drop.clone());
                Shell {
                    monos: Vec::new(),
                    index: BTreeMap::new(),
                    rel: RowSpace::new(m, 0),
                    kept: Vec::new(),
                    full_relation: !hull.shell_in_hull(&drop[..drop.len() - 1]),
                }
            });
            let idx = shell.monos.len();
            shell.index.insert(mono.clone(), idx);
            shell.monos.push(mono.clone());
            // extend by one factor of rank at least the current maximum
            let min_rank = mono.last().map(|&l| eng.rank[l as usize]).unwrap_or(0);
            for r in min_rank..eng.neg.len() {
                let b = eng.neg[r];
                let bh = eng.trunc.basis[b].ht;
                if h + bh <= hmax {
                    let mut m2 = mono.clone();
                    m2.push(b as u16);
                    pending.entry(h + bh).or_default().push(m2);
                }
            }
        }
    }

    // T-closure under Cartan and positive actions. Shells outside the hull
    // are entirely contained in the relation submodule, so instead of
    // tracking their rows we sweep the positive action once over all their
    // monomials; only rows landing in hull shells need dedup and further
    // propagation.
    let tops: Vec<usize> = (0..trunc.dim())
        .filter(|&i| trunc.basis[i].cls != Tri::Neg)
        .collect();
    let pos_tops: Vec<usize> = (0..trunc.dim())
        .filter(|&i| trunc.basis[i].cls == Tri::Pos)
        .collect();
    let mut t_space: BTreeMap<Vec<i64>, Vec<LinComb>> = BTreeMap::new();
    let mut t_rows: BTreeMap<Vec<i64>, RowSpace> = BTreeMap::new();
    let mut queue: Vec<(Vec<i64>, LinComb)> = Vec::new();
    for (drop, lc) in t_seeds {
        if !shells.get(&drop).map(|s| s.full_relation).unwrap_or(true) {
            queue.push((drop, lc));
        }
    }
    // one-pass sweep from the full (outside-hull) shells
    let full_drops: Vec<Vec<i64>> = shells
        .iter()
        .filter(|(_, s)| s.full_relation)
        .map(|(d, _)| d.clone())
        .collect();
    for drop in &full_drops {
        let monos = shells[drop].monos.clone();
        for &b in &pos_tops {
            // cheap pre-filter: the action is weight-graded, so the target
            // shell is known before doing any work
            let bw = trunc.ext_weight(b);
            let d2: Vec<i64> = drop.iter().zip(&bw).map(|(d, w)| d - w).collect();
            if shells.get(&d2).map(|s| s.full_relation).unwrap_or(true) {
                continue;
            }
            for mono in &monos {
                let img = eng.act(b, mono);
                if img.is_empty() {
                    continue;
                }
                queue.push((d2.clone(), (*img).clone()));
            }
        }
    }
    while let Some((drop, lc)) = queue.pop() {
        if lc.is_empty() {
            continue;
        }
        let shell = shells.get(&drop).expect("shell enumerated");
        let ncols = shell.monos.len();
        let rows = t_rows
            .entry(drop.clone())
            .or_insert_with(|| RowSpace::new(m, ncols));
        if rows.rank() == ncols {
            continue;
        }
        let row = lincomb_to_vec(m, &lc, &shell.index, ncols);
        if !rows.insert(row) {
            continue;
        }
        t_space.entry(drop.clone()).or_default().push(lc.clone());
        for &b in &tops {
            let mut img = eng.zero();
            for (mono, c) in &lc {
                let part = eng.act(b, mono);
                eng.add_scaled(&mut img, &part, c);
            }
            if img.is_empty() {
                continue;
            }
            let d2 = eng.drop_of(img.keys().next().unwrap());
            if !shells.get(&d2).map(|s| s.full_relation).unwrap_or(true) {
                queue.push((d2, img));
            }
        }
    }

    // downward closure + quotient, shell by shell in height order; shells
    // outside the hull are entirely relations and skip the linear algebra
    let mut kept_total = 0usize;
    for h in 0..=hmax {
        let drops_here: Vec<Vec<i64>> = shells_by_ht.get(&h).cloned().unwrap_or_default();
        for drop in &drops_here {
            if shells[drop].full_relation {
                continue;
            }
            // relation rows: T-part plus negative action on shallower
            // relation spaces (full shells contribute every monomial)
            let mut rel_combs: Vec<LinComb> = t_space.get(drop).cloned().unwrap_or_default();
            for r in 0..eng.neg.len() {
                let b = eng.neg[r];
                let bw = trunc.ext_weight(b);
                let src_drop: Vec<i64> = drop.iter().zip(&bw).map(|(d, w)| d + w).collect();
                let Some(src) = shells.get(&src_drop) else { continue };
                let src_lcs: Vec<LinComb> = if src.full_relation {
                    src.monos
                        .iter()
                        .map(|mono| {
                            let mut lc = LinComb::new();
                            lc.insert(mono.clone(), Scalar::one(m));
                            lc
                        })
                        .collect()
                } else {
                    let src_monos = src.monos.clone();
                    src.rel
                        .rows()
                        .iter()
                        .map(|row| {
                            let mut lc = LinComb::new();
                            for (j, c) in row.iter().enumerate() {
                                if !c.is_zero() {
                                    lc.insert(src_monos[j].clone(), c.clone());
                                }
                            }
                            lc
                        })
                        .collect()
                };
                for lc in src_lcs {
                    let mut img = eng.zero();
                    for (mono, c) in &lc {
                        let part = eng.act(b, mono);
                        eng.add_scaled(&mut img, &part, c);
                    }
                    if !img.is_empty() {
                        rel_combs.push(img);
                    }
                }
            }
            let shell = shells.get_mut(drop).expect("enumerated");
            let ncols = shell.monos.len();
            let mut rel = RowSpace::new(m, ncols);
            for lc in &rel_combs {
                rel.insert(lincomb_to_vec(m, lc, &shell.index, ncols));
            }
            let kept: Vec<usize> = (0..ncols).filter(|&c| !rel.is_pivot(c)).collect();
            kept_total += kept.len();
            shell.rel = rel;
            shell.kept = kept;
        }
    }

    // collect basis
    let mut basis_mono = Vec::with_capacity(kept_total);
    let mut drops = Vec::with_capacity(kept_total);
    let mut coset_index: BTreeMap<PbwMonomial, usize> = BTreeMap::new();
    for h in 0..=hmax {
        for drop in shells_by_ht.get(&h).cloned().unwrap_or_default() {
            let shell = &shells[&drop];
            for &c in &shell.kept {
                let mono = shell.monos[c].clone();
                coset_index.insert(mono.clone(), basis_mono.len());
                basis_mono.push(mono);
                drops.push(drop.clone());
            }
        }
    }
    let dim = basis_mono.len();
    if dim == 0 {
        return Err(ModuleError::Collapsed("relations kill the generator".into()));
    }
    let hw_index = *coset_index
        .get(&Vec::new())
        .ok_or_else(|| ModuleError::Collapsed("highest-weight vector not in the basis".into()))?;

    // reduce a combination modulo the relation spaces into basis coordinates
    let reduce = |eng: &Engine, shells: &BTreeMap<Vec<i64>, Shell>, lc: &LinComb| -> Vec<(usize, Scalar)> {
        let mut out: Vec<(usize, Scalar)> = Vec::new();
        // group by drop
        let mut by_drop: BTreeMap<Vec<i64>, LinComb> = BTreeMap::new();
        for (mono, c) in lc {
            by_drop
                .entry(eng.drop_of(mono))
                .or_default()
                .insert(mono.clone(), c.clone());
        }
        for (drop, part) in by_drop {
            let Some(shell) = shells.get(&drop) else {
                // beyond the hull height: everything reduces to zero
                continue;
            };
            if shell.full_relation || shell.monos.is_empty() {
                continue;
            }
            let v = lincomb_to_vec(m, &part, &shell.index, shell.monos.len());
            let red = shell.rel.reduce(v);
            for (c, val) in red.iter().enumerate() {
                if !val.is_zero() {
                    let mono = &shell.monos[c];
                    let idx = coset_index
                        .get(mono)
                        .expect("reduced vector is supported on kept monomials");
                    out.push((*idx, val.clone()));
                }
            }
        }
        out.sort_by_key(|(i, _)| *i);
        out
    };

    // action matrices
    let mut actions: Vec<SparseMat> = Vec::with_capacity(trunc.dim());
    for b in 0..trunc.dim() {
        let mut mat: SparseMat = vec![Vec::new(); dim];
        for (j, mono) in basis_mono.iter().enumerate() {
            let img = eng.act(b, mono);
            mat[j] = reduce(&eng, &shells, &img);
        }
        actions.push(mat);
    }

    let lambda = hull.lambda.clone();
    Ok(HwModule {
        m,
        trunc: trunc.clone(),
        dim,
        basis_mono,
        drops,
        hw_index,
        lambda,
        actions,
        phi,
        depth: depth_label,
    })
}

fn lincomb_to_vec(
    m: u8,
    lc: &LinComb,
    index: &BTreeMap<PbwMonomial, usize>,
    ncols: usize,
) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(m); ncols];
    for (mono, c) in lc {
        let i = index.get(mono).expect("monomial enumerated in its shell");
        v[*i] = c.clone();
    }
    v
}

/// Straighten an arbitrary word of truncated basis indices into the PBW
/// normal form of `U(L)` (negative, then Cartan, then positive, each sorted),
/// returning the coefficients on normal-form words.
pub fn pbw_straighten(trunc: &TruncatedLie, word: &[usize]) -> BTreeMap<Vec<usize>, Scalar> {
    let m = trunc.m;
    // full order: class first, then (height desc for Neg / asc otherwise,
    // loop degree, index)
    let key = |i: usize| -> (u8, i64, i64, usize) {
        let b = &trunc.basis[i];
        let cls = match b.cls {
            Tri::Neg => 0u8,
            Tri::Car => 1,
            Tri::Pos => 2,
        };
        let htk = if b.cls == Tri::Neg { -b.ht } else { b.ht };
        (cls, htk, b.grade, i)
    };
    let mut out: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
    let mut queue: Vec<(Vec<usize>, Scalar)> = vec![(word.to_vec(), Scalar::one(m))];
    while let Some((w, c)) = queue.pop() {
        // find the first adjacent inversion
        let mut inv = None;
        for i in 0..w.len().saturating_sub(1) {
            if key(w[i]) > key(w[i + 1]) {
                inv = Some(i);
                break;
            }
        }
        match inv {
            None => {
                let slot = out.entry(w).or_insert_with(|| Scalar::zero(m));
                *slot += c;
                if slot.is_zero() {
                    let dead: Vec<Vec<usize>> = out
                        .iter()
                        .filter(|(_, v)| v.is_zero())
                        .map(|(k, _)| k.clone())
                        .collect();
                    for k in dead {
                        out.remove(&k);
                    }
                }
            }
            Some(i) => {
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                queue.push((swapped, c.clone()));
                for (k, bc) in trunc.bracket_basis(w[i], w[i + 1]) {
                    let mut shorter = Vec::with_capacity(w.len() - 1);
                    shorter.extend_from_slice(&w[..i]);
                    shorter.push(*k);
                    shorter.extend_from_slice(&w[i + 2..]);
                    queue.push((shorter, c.clone() * bc.clone()));
                }
            }
        }
    }
    out
}

/// Context for untwisted constructions: the ambient algebra with the
/// identity fold, shared by evaluation modules and local Weyl modules.
pub struct UntwistedContext {
    pub alg: ChevalleyAlgebra,
    pub lifted: LiftedAut,
    pub fd: FoldedRootData,
    pub gp: GradedPieces,
}

impl UntwistedContext {
    pub fn new(alg: &ChevalleyAlgebra) -> Result<Self, ModuleError> {
        let aut = DiagramAut::identity(alg.rank());
        let fd = fold(&alg.rs, &aut)
            .map_err(|e| ModuleError::BadInput(format!("identity fold: {e}")))?;
        let lifted = crate::liealg::lift_automorphism(alg, &aut)
            .map_err(|e| ModuleError::BadInput(format!("identity lift: {e}")))?;
        let gp = crate::liealg::graded_decomposition(alg, &lifted, &fd);
        Ok(UntwistedContext { alg: alg.clone(), lifted, fd, gp })
    }

    /// Character of `U(L(h))` attached to a finitely supported function:
    /// `H (x) p(t)` acts on the highest-weight line by `sum_a p(a) xi(a)(H)`.
    fn xi_character(&self, trunc: &TruncatedLie, xi: &XiFunction) -> Vec<Option<Scalar>> {
        let m = trunc.m;
        (0..trunc.dim())
            .map(|b| {
                let be = &trunc.basis[b];
                if be.cls != Tri::Car {
                    return None;
                }
                let mut total = Scalar::zero(m);
                for (a, w) in xi.entries() {
                    // pairing of the weight with the Cartan vector
                    let mut val = Scalar::zero(m);
                    for (i, c) in be.vec.iter().enumerate().take(self.alg.rank()) {
                        val += c.clone().scale(&rat(w.coords[i]));
                    }
                    total += trunc.eval_loop_at(b, a) * val;
                }
                Some(total)
            })
            .collect()
    }

    fn truncation_for(
        &self,
        xi: &XiFunction,
        depth: usize,
    ) -> Result<TruncatedLie, ModuleError> {
        let points: Vec<Scalar> = xi.support().cloned().collect();
        if points.len() == 1 {
            // graded jet basis at a single point
            return Ok(crate::looplie::truncate_jet(
                &self.alg,
                &self.lifted,
                &self.fd,
                &self.gp,
                &points[0],
                depth,
            )?);
        }
        let roots: Vec<(Scalar, usize)> = points.into_iter().map(|a| (a, depth)).collect();
        let q = MonicPoly::from_roots(self.alg.m, &roots)?;
        Ok(truncate(&self.alg, &self.lifted, &self.fd, &self.gp, &q, false)?)
    }

    fn hull_for(&self, lambda: &Weight) -> HullInfo {
        HullInfo {
            cartan: self.alg.rs.cartan.clone(),
            mult: vec![1; self.alg.rank()],
            lambda: lambda.coords.clone(),
        }
    }

    fn powers_for(&self, trunc: &TruncatedLie, lambda: &Weight) -> Vec<PowerRelation> {
        // (x_i^- (x) t^0)^(lambda(H_i) + 1) for the simple ambient roots
        let mut out = Vec::new();
        for i in 0..self.alg.rank() {
            let mut coords = vec![0i64; self.alg.rank()];
            coords[i] = 1;
            let root = self.alg.rs.root_index(&coords).expect("simple root");
            let f = self.alg.basis_vec(self.alg.f_index(root));
            let el = LoopElement::single(f, 0);
            let v = trunc.embed(&self.alg, &self.lifted, &el).expect("untwisted embed");
            let idx = v
                .iter()
                .position(|c| c.is_one())
                .expect("simple negative generator is a basis element");
            out.push(PowerRelation { index: idx, power: (lambda.coords[i] + 1) as usize });
        }
        out
    }

    /// Build the local Weyl module of a finitely supported function at a
    /// fixed ideal depth.
    pub fn local_weyl_at_depth(
        &self,
        xi: &XiFunction,
        depth: usize,
    ) -> Result<HwModule, ModuleError> {
        if xi.is_empty() {
            return Err(ModuleError::BadInput(
                "empty support: use a depth-1 module at a dummy point".into(),
            ));
        }
        let lambda = xi.wt();
        let trunc = self.truncation_for(xi, depth)?;
        let phi = self.xi_character(&trunc, xi);
        let powers = self.powers_for(&trunc, &lambda);
        let hull = self.hull_for(&lambda);
        build_cyclic(&trunc, phi, &powers, &hull, depth)
    }

    /// Local Weyl module with the depth-stabilization certificate: the ideal
    /// exponent is raised until two consecutive depths agree on dimension
    /// and restricted character.
    pub fn build_local_weyl(&self, xi: &XiFunction) -> Result<HwModule, ModuleError> {
        let max_depth = 8usize;
        let mut prev: Option<HwModule> = None;
        for depth in 1..=max_depth {
            let cur = self.local_weyl_at_depth(xi, depth)?;
            if let Some(p) = prev {
                if p.dim == cur.dim && character(&p) == character(&cur) {
                    return Ok(cur);
                }
            }
            prev = Some(cur);
        }
        Err(ModuleError::DepthNotStabilized(format!(
            "no stabilization up to depth {max_depth}"
        )))
    }

    /// Evaluation module `V_a(lambda)`: the depth-1 cyclic quotient at `a`.
    pub fn evaluation_module(
        &self,
        lambda: &Weight,
        a: &Scalar,
    ) -> Result<HwModule, ModuleError> {
        if a.is_zero() {
            return Err(ModuleError::BadInput("evaluation point must be nonzero".into()));
        }
        let mut xi = XiFunction::empty(self.alg.m, self.alg.rank());
        xi.insert(a.clone(), lambda.clone())
            .map_err(|e| ModuleError::BadInput(format!("{e}")))?;
        if xi.is_empty() {
            // lambda = 0: trivial module over the depth-1 truncation
            let roots = [(a.clone(), 1)];
            let q = MonicPoly::from_roots(self.alg.m, &roots)?;
            let trunc = truncate(&self.alg, &self.lifted, &self.fd, &self.gp, &q, false)?;
            let phi = (0..trunc.dim())
                .map(|b| {
                    (trunc.basis[b].cls == Tri::Car).then(|| Scalar::zero(self.alg.m))
                })
                .collect();
            let powers = self.powers_for(&trunc, lambda);
            let hull = self.hull_for(lambda);
            return build_cyclic(&trunc, phi, &powers, &hull, 1);
        }
        self.local_weyl_at_depth(&xi, 1)
    }
}

/// Restricted character: weight label -> dimension of the weight space.
pub fn character(module: &HwModule) -> BTreeMap<Vec<i64>, usize> {
    let mut out = BTreeMap::new();
    for i in 0..module.dim {
        *out.entry(module.weight_label(i)).or_insert(0) += 1;
    }
    out
}

/// Character pushed through a fold: ambient coroot-value labels are summed
/// over the automorphism orbits.
pub fn character_g0(module: &HwModule, fd: &FoldedRootData) -> BTreeMap<Vec<i64>, usize> {
    let mut out = BTreeMap::new();
    for i in 0..module.dim {
        let amb = module.weight_label(i);
        let folded: Vec<i64> = fd
            .orbits
            .iter()
            .map(|o| o.iter().map(|&n| amb[n]).sum())
            .collect();
        *out.entry(folded).or_insert(0) += 1;
    }
    out
}

/// Dimension of the submodule generated by a vector under a set of operator
/// matrices.
pub fn generated_submodule(m: u8, dim: usize, mats: &[SparseMat], v: &[Scalar]) -> usize {
    let mut span = RowSpace::new(m, dim);
    if !span.insert(v.to_vec()) {
        return 0;
    }
    let mut frontier = vec![v.to_vec()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for mat in mats {
                let mut img = vec![Scalar::zero(m); dim];
                for (j, c) in x.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for (i, a) in &mat[j] {
                        img[*i] += c.clone() * a.clone();
                    }
                }
                if span.insert(img.clone()) {
                    next.push(img);
                }
            }
        }
        frontier = next;
    }
    span.rank()
}

/// A twisted local Weyl module realized by restriction of an untwisted one.
pub struct TwistedLocalWeyl {
    pub module: HwModule,
    /// Spanning family of the twisted image: loop elements and matrices.
    pub twisted_ops: Vec<(LoopElement, SparseMat)>,
    /// Highest weight in the folded pairing coordinates.
    pub lambda0: Vec<i64>,
    /// The chi-admissible function used.
    pub xi: XiFunction,
}

/// Build the twisted local Weyl module of an equivariant function by
/// restricting the untwisted local Weyl module of a chi-admissible choice.
pub fn build_local_weyl_twisted(
    ctx: &UntwistedContext,
    lifted: &LiftedAut,
    fd: &FoldedRootData,
    gp: &GradedPieces,
    chi: &XiFunction,
) -> Result<TwistedLocalWeyl, ModuleError> {
    let perm = &lifted.aut.perm;
    let xi = chi_admissible(chi, perm).map_err(|e| ModuleError::BadInput(format!("{e}")))?;
    if xi.is_empty() {
        return Err(ModuleError::BadInput("empty function: the module is trivial".into()));
    }
    let module = ctx.build_local_weyl(&xi)?;
    let image = twisted_image_in_truncation(&ctx.alg, &ctx.lifted, &module.trunc, lifted, gp);
    let mut twisted_ops = Vec::with_capacity(image.len());
    for (coords, el) in image {
        let mut mat: SparseMat = vec![Vec::new(); module.dim];
        for (b, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, col) in module.actions[b].iter().enumerate() {
                for (i, a) in col {
                    push_entry(&mut mat[j], *i, c.clone() * a.clone());
                }
            }
        }
        for col in mat.iter_mut() {
            col.retain(|(_, c)| !c.is_zero());
            col.sort_by_key(|(i, _)| *i);
        }
        twisted_ops.push((el, mat));
    }
    let lambda0 = wt0(chi, fd, perm)
        .map_err(|e| ModuleError::BadInput(format!("{e}")))?
        .coords;
    // consistency: the restriction of wt(xi) is the highest weight
    let check = restrict_weight(fd, &xi.wt());
    if check.coords != lambda0 {
        return Err(ModuleError::BadInput("wt_0 mismatch with the admissible choice".into()));
    }
    Ok(TwistedLocalWeyl { module, twisted_ops, lambda0, xi })
}

impl TwistedLocalWeyl {
    /// Dimension of the twisted-generated submodule of a vector.
    pub fn twisted_generated(&self, v: &[Scalar]) -> usize {
        let mats: Vec<SparseMat> = self.twisted_ops.iter().map(|(_, m)| m.clone()).collect();
        generated_submodule(self.module.m, self.module.dim, &mats, v)
    }

    /// Folded character of the module.
    pub fn character0(&self, fd: &FoldedRootData) -> BTreeMap<Vec<i64>, usize> {
        character_g0(&self.module, fd)
    }
}

/// Direct presentation of the twisted local Weyl module over the twisted
/// truncated algebra: the positive part kills the generator, the twisted
/// Cartan loop acts through the evaluation character of `chi`, and the simple
/// integrability powers are imposed. Used as a cross-check against the
/// restriction route.
pub fn build_twisted_direct(
    alg: &ChevalleyAlgebra,
    lifted: &LiftedAut,
    fd: &FoldedRootData,
    gp: &GradedPieces,
    tg: &crate::liealg::TwistedGenerators,
    chi: &XiFunction,
    depth: usize,
) -> Result<HwModule, ModuleError> {
    let perm = &lifted.aut.perm;
    if !chi.is_equivariant(perm) {
        return Err(ModuleError::BadInput("chi must be equivariant".into()));
    }
    let lambda0 = wt0(chi, fd, perm).map_err(|e| ModuleError::BadInput(format!("{e}")))?;
    let m_ord = fd.m as i64;
    // ideal: one factor (u - a^m)^depth per orbit of the support
    let mut orbit_keys: Vec<Scalar> = Vec::new();
    for orbit in chi.support_orbits() {
        let key = orbit[0].pow(m_ord).expect("nonzero point");
        if !orbit_keys.contains(&key) {
            orbit_keys.push(key);
        }
    }
    if orbit_keys.is_empty() {
        return Err(ModuleError::BadInput("empty function".into()));
    }
    let roots: Vec<(Scalar, usize)> = orbit_keys.into_iter().map(|k| (k, depth)).collect();
    let q = MonicPoly::from_roots(alg.m, &roots)?;
    let trunc = truncate(alg, lifted, fd, gp, &q, true)?;
    // evaluation character on the twisted Cartan part
    let phi: Vec<Option<Scalar>> = (0..trunc.dim())
        .map(|b| {
            let be = &trunc.basis[b];
            if be.cls != Tri::Car {
                return None;
            }
            let mut total = Scalar::zero(alg.m);
            for orbit in chi.support_orbits() {
                let a = &orbit[0];
                let mu = chi.value(a);
                let mut val = Scalar::zero(alg.m);
                for (i, c) in be.vec.iter().enumerate().take(alg.rank()) {
                    val += c.clone().scale(&rat(mu.coords[i]));
                }
                total += trunc.eval_loop_at(b, a) * val;
            }
            Some(total)
        })
        .collect();
    // integrability powers on the simple twisted generators
    let mut powers = Vec::new();
    for i in 0..fd.rank0() {
        let mut coords = vec![0i64; fd.rank0()];
        coords[i] = 1;
        let simple = fd
            .r0
            .positive_roots
            .iter()
            .position(|r| r == &coords)
            .expect("simple folded root");
        let el = LoopElement::single(tg.xm[simple][0].clone(), 0);
        let v = trunc.embed(alg, lifted, &el)?;
        let nz: Vec<usize> = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| i).collect();
        if nz.len() != 1 {
            return Err(ModuleError::BadInput(
                "simple twisted generator is not a single truncated basis element".into(),
            ));
        }
        // integrability exponent against the honest coroot (2/c_i) h_i(0);
        // at the anomalous A_{2n} node the orbit-sum pairing is half the
        // sl2-weight and the literal exponent would kill the module
        let honest = fd.p0_multiplier[i] * lambda0.coords[i];
        powers.push(PowerRelation { index: nz[0], power: (honest + 1) as usize });
    }
    let hull = HullInfo {
        cartan: fd.folded_cartan.clone(),
        mult: fd.p0_multiplier.clone(),
        lambda: lambda0.coords.clone(),
    };
    build_cyclic(&trunc, phi, &powers, &hull, depth)
}

/// Per-function result of the embedding-chain verification.
#[derive(Clone, Debug)]
pub struct ChiReport {
    /// `tau = wt(xi)` of the admissible choice, ambient fundamental coords.
    pub tau: Vec<i64>,
    pub dim: usize,
    /// The highest-weight vector generates the module under the twisted
    /// algebra alone.
    pub twisted_cyclic: bool,
    /// `dim` matches the product of fundamental local dimensions.
    pub product_formula_ok: bool,
    pub depth: usize,
}

/// Result of [`verify_embedding_chain`].
#[derive(Clone, Debug)]
pub struct EmbeddingReport {
    pub per_chi: Vec<ChiReport>,
    pub dims_equal: bool,
    pub chars_equal: bool,
    pub sigma_rank_symmetric: bool,
}

impl EmbeddingReport {
    pub fn all_ok(&self) -> bool {
        self.dims_equal
            && self.chars_equal
            && self.sigma_rank_symmetric
            && self
                .per_chi
                .iter()
                .all(|c| c.twisted_cyclic && c.product_formula_ok)
    }
}

/// Desk-scale verification of the embedding chain: for each equivariant
/// function of the same folded weight, the restricted local Weyl module is
/// twisted-cyclic from its top vector, its dimension matches the product of
/// fundamental local dimensions, and dimension and folded character agree
/// across the list. Also checks the pullback rank symmetry
/// `rank W(omega_i) = rank W(omega_{sigma(i)})` at local level.
pub fn verify_embedding_chain(
    ctx: &UntwistedContext,
    lifted: &LiftedAut,
    fd: &FoldedRootData,
    gp: &GradedPieces,
    lambda0: &Weight,
    chis: &[XiFunction],
) -> Result<EmbeddingReport, ModuleError> {
    let perm = &lifted.aut.perm;
    // fundamental local dimensions, cached per ambient node
    let mut fund_dims: Vec<Option<usize>> = vec![None; ctx.alg.rank()];
    let point = Scalar::from_int(ctx.alg.m, 2);
    let fund_dim = |i: usize, fund_dims: &mut Vec<Option<usize>>| -> Result<usize, ModuleError> {
        if let Some(d) = fund_dims[i] {
            return Ok(d);
        }
        let mut xi = XiFunction::empty(ctx.alg.m, ctx.alg.rank());
        xi.insert(point.clone(), Weight::fundamental(ctx.alg.rank(), i))
            .map_err(|e| ModuleError::BadInput(format!("{e}")))?;
        let md = ctx.build_local_weyl(&xi)?;
        fund_dims[i] = Some(md.dim);
        Ok(md.dim)
    };

    let mut per_chi = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    let mut chars = Vec::new();
    for chi in chis {
        let w0 = wt0(chi, fd, perm).map_err(|e| ModuleError::BadInput(format!("{e}")))?;
        if &w0 != lambda0 {
            return Err(ModuleError::BadInput(format!(
                "wt_0(chi) = {:?} differs from lambda = {:?}",
                w0.coords, lambda0.coords
            )));
        }
        let tw = build_local_weyl_twisted(ctx, lifted, fd, gp, chi)?;
        let tau = tw.xi.wt();
        let mut product = 1usize;
        for (i, &mi) in tau.coords.iter().enumerate() {
            let d = fund_dim(i, &mut fund_dims)?;
            product *= d.pow(mi as u32);
        }
        let cyclic = tw.twisted_generated(&tw.module.hw_vector()) == tw.module.dim;
        per_chi.push(ChiReport {
            tau: tau.coords.clone(),
            dim: tw.module.dim,
            twisted_cyclic: cyclic,
            product_formula_ok: product == tw.module.dim,
            depth: tw.module.depth,
        });
        dims.push(tw.module.dim);
        chars.push(tw.character0(fd));
    }
    let dims_equal = dims.windows(2).all(|w| w[0] == w[1]);
    let chars_equal = chars.windows(2).all(|w| w[0] == w[1]);

    // sigma-pullback symmetry on fundamental local modules
    let zeta = Scalar::zeta(ctx.alg.m);
    let mut sigma_rank_symmetric = true;
    for i in 0..ctx.alg.rank() {
        let j = perm[i];
        if j == i {
            continue;
        }
        let mut xi_i = XiFunction::empty(ctx.alg.m, ctx.alg.rank());
        xi_i.insert(point.clone(), Weight::fundamental(ctx.alg.rank(), i))
            .map_err(|e| ModuleError::BadInput(format!("{e}")))?;
        let mut xi_j = XiFunction::empty(ctx.alg.m, ctx.alg.rank());
        xi_j.insert(zeta.clone() * point.clone(), Weight::fundamental(ctx.alg.rank(), j))
            .map_err(|e| ModuleError::BadInput(format!("{e}")))?;
        let di = ctx.build_local_weyl(&xi_i)?.dim;
        let dj = ctx.build_local_weyl(&xi_j)?.dim;
        if di != dj {
            sigma_rank_symmetric = false;
        }
    }
    Ok(EmbeddingReport { per_chi, dims_equal, chars_equal, sigma_rank_symmetric })
}

/// Tensor product of modules over a common truncation, with the coproduct
/// action. Returns the action matrices per joint-truncation basis element,
/// the weight labels and the product of the highest-weight vectors.
pub struct TensorModule {
    pub dim: usize,
    pub mats: Vec<SparseMat>,
    pub labels: Vec<Vec<i64>>,
    pub top: usize,
}

pub fn tensor_modules(
    ctx: &UntwistedContext,
    joint: &TruncatedLie,
    mods: &[&HwModule],
) -> Result<TensorModule, ModuleError> {
    let dims: Vec<usize> = mods.iter().map(|md| md.dim).collect();
    let dim: usize = dims.iter().product();
    let strides: Vec<usize> = {
        let mut s = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * dims[i + 1];
        }
        s
    };
    let mut mats = Vec::with_capacity(joint.dim());
    for b in 0..joint.dim() {
        let el = joint.basis_loop_element(b);
        // factor matrices
        let mut fmats = Vec::with_capacity(mods.len());
        for md in mods {
            fmats.push(md.loop_matrix(&ctx.alg, &ctx.lifted, &el)?);
        }
        let mut mat: SparseMat = vec![Vec::new(); dim];
        for j in 0..dim {
            // decompose j into factor indices
            let idx: Vec<usize> = strides
                .iter()
                .zip(&dims)
                .map(|(s, d)| (j / s) % d)
                .collect();
            for (f, fm) in fmats.iter().enumerate() {
                for (i, c) in &fm[idx[f]] {
                    let target = j + (i - idx[f]) * strides[f];
                    // recompute safely: replace coordinate f
                    let mut t = j as i64;
                    t += (*i as i64 - idx[f] as i64) * strides[f] as i64;
                    debug_assert_eq!(t as usize, target);
                    push_entry(&mut mat[j], t as usize, c.clone());
                }
            }
        }
        for col in mat.iter_mut() {
            col.retain(|(_, c)| !c.is_zero());
            col.sort_by_key(|(i, _)| *i);
        }
        mats.push(mat);
    }
    // labels and top vector
    let mut labels = vec![vec![0i64; mods[0].lambda.len()]; dim];
    for (j, lab) in labels.iter_mut().enumerate() {
        for (f, md) in mods.iter().enumerate() {
            let idx = (j / strides[f]) % dims[f];
            for (t, v) in lab.iter_mut().zip(md.weight_label(idx)) {
                *t += v;
            }
        }
    }
    let mut top = 0usize;
    for (f, md) in mods.iter().enumerate() {
        top += md.hw_index * strides[f];
    }
    Ok(TensorModule { dim, mats, labels, top })
}

/// One coefficient layer of the Garland generating series: a polynomial in
/// the commuting variables `v_k` with rational coefficients, keyed by sorted
/// `(k, multiplicity)` lists.
pub type GarlandPoly = BTreeMap<Vec<(i64, u32)>, Rational>;

/// Coefficients `p^0 .. p^J` of `exp(-sum_k v_k u^k / k)`.
#[derive(Clone, Debug)]
pub struct GarlandSeries {
    pub coeffs: Vec<GarlandPoly>,
}

pub fn garland_coeffs(order: usize) -> GarlandSeries {
    let mut coeffs: Vec<GarlandPoly> = Vec::with_capacity(order + 1);
    let mut p0 = GarlandPoly::new();
    p0.insert(Vec::new(), Rational::one());
    coeffs.push(p0);
    for j in 1..=order as i64 {
        // j p^j = - sum_{k=1..j} v_k p^{j-k}
        let mut acc = GarlandPoly::new();
        for k in 1..=j {
            let prev = &coeffs[(j - k) as usize];
            for (mono, c) in prev {
                let mut m2: Vec<(i64, u32)> = mono.clone();
                match m2.iter_mut().find(|(kk, _)| *kk == k) {
                    Some((_, mult)) => *mult += 1,
                    None => {
                        m2.push((k, 1));
                        m2.sort_unstable();
                    }
                }
                let add = -c.clone() / rat(j);
                let slot = acc.entry(m2).or_insert_with(Rational::zero);
                *slot += add;
                if slot.is_zero() {
                    // keep canonical form
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        coeffs.push(acc);
    }
    GarlandSeries { coeffs }
}

impl GarlandSeries {
    /// Evaluate a layer at scalar values of the variables.
    pub fn eval(&self, j: usize, values: &dyn Fn(i64) -> Scalar, m: u8) -> Scalar {
        let mut total = Scalar::zero(m);
        for (mono, c) in &self.coeffs[j] {
            let mut term = Scalar::from_rational(m, c.clone());
            for (k, mult) in mono {
                let v = values(*k);
                term *= v.pow(*mult as i64).expect("power of a scalar");
            }
            total += term;
        }
        total
    }
}

/// Minimal admissible Garland step for a folded positive root.
pub fn ell_for_root(fd: &FoldedRootData, alpha: usize) -> i64 {
    match (fd.is_a2n, fd.r0_short[alpha]) {
        (false, true) => 1,
        (false, false) => fd.m as i64,
        (true, true) => 2,
        (true, false) => 1,
    }
}

/// Verify the Garland annihilation identity on a loop-sl2 family acting in a
/// module: with divided powers `a^((n)) = a^n / n!`,
/// `e(b + l)^((r)) f(-b)^((r+1)) w + (-1)^(r+1) sum_j f(-b + l j)
/// p^(r-j) w = 0`, the series coefficients being evaluated through the
/// module's Cartan action on the highest-weight vector.
pub fn verify_garland_family(
    module: &HwModule,
    alg: &ChevalleyAlgebra,
    lifted: &LiftedAut,
    fam: &Sl2Loop,
    r: usize,
) -> Result<bool, ModuleError> {
    let m = module.m;
    let series = garland_coeffs(r);
    let w = module.hw_vector();
    // phi values of h(step * k) on w
    let mut hvals: BTreeMap<i64, Scalar> = BTreeMap::new();
    for k in 1..=r as i64 {
        let h = fam.h_at(fam.step * k);
        hvals.insert(k, module.hw_eigenvalue(alg, lifted, &h)?);
    }
    let values = |k: i64| hvals[&k].clone();
    // first term, with the divided-power normalization 1 / (r! (r+1)!)
    let mut v = w.clone();
    for _ in 0..=r {
        v = module.apply_loop(alg, lifted, &fam.f_at(-fam.e_base), &v)?;
    }
    let e_elt = fam.e_at(fam.e_base + fam.step);
    for _ in 0..r {
        v = module.apply_loop(alg, lifted, &e_elt, &v)?;
    }
    let factorial = |n: usize| {
        let mut f = Rational::one();
        for k in 2..=n as i64 {
            f *= rat(k);
        }
        f
    };
    let scale =
        Scalar::from_rational(m, (factorial(r) * factorial(r + 1)).recip());
    let mut v: Vec<Scalar> = v.into_iter().map(|x| x * scale.clone()).collect();
    // second term
    let sign = if (r + 1) % 2 == 0 { Scalar::one(m) } else { -Scalar::one(m) };
    for j in 0..=r {
        let p = series.eval(r - j, &values, m);
        if p.is_zero() {
            continue;
        }
        let fj = module.apply_loop(
            alg,
            lifted,
            &fam.f_at(-fam.e_base + fam.step * j as i64),
            &w,
        )?;
        for (slot, x) in v.iter_mut().zip(&fj) {
            *slot += sign.clone() * p.clone() * x.clone();
        }
    }
    Ok(v.iter().all(Scalar::is_zero))
}

/// Run the Garland verification for every folded positive root of a twisted
/// local Weyl module, for `r = 0 ..= lambda(h_fam) + margin` where `h_fam`
/// is the family's own Cartan element, including the doubled families in the
/// `A_{2n}` case. Returns the list of failures.
pub fn verify_garland(
    tw: &TwistedLocalWeyl,
    alg: &ChevalleyAlgebra,
    lifted: &LiftedAut,
    fd: &FoldedRootData,
    tg: &crate::liealg::TwistedGenerators,
    margin: usize,
) -> Result<Vec<String>, ModuleError> {
    let mut failures = Vec::new();
    for alpha in 0..fd.r0.num_positive_roots() {
        let small = small_subalgebra(alg, fd, tg, alpha);
        let mut families = vec![("principal", &small.principal)];
        if let Some(doubled) = &small.doubled {
            families.push(("doubled", doubled));
        }
        for (name, fam) in families {
            let lam = tw.module.hw_eigenvalue(alg, lifted, &fam.h_at(0))?;
            let lam = lam
                .as_rational()
                .filter(|r| r.denom().is_one() && !r.numer().is_negative())
                .and_then(|r| i64::try_from(r.numer().clone()).ok())
                .ok_or_else(|| {
                    ModuleError::BadInput("highest weight pairing is not a nonnegative integer".into())
                })?;
            for r in 0..=(lam as usize + margin) {
                let ok = verify_garland_family(&tw.module, alg, lifted, fam, r)?;
                if !ok {
                    failures.push(format!("root {alpha} {name} family r = {r}"));
                }
            }
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::build_chevalley;
    use crate::rootdata::{RootSystem, TypeLabel};

    fn ctx(label: TypeLabel, rank: usize, m: u8) -> UntwistedContext {
        let rs = RootSystem::build(label, rank).unwrap();
        let alg = build_chevalley(&rs, m).unwrap();
        UntwistedContext::new(&alg).unwrap()
    }

    #[test]
    fn garland_layers_match_hand_expansion() {
        let g = garland_coeffs(2);
        // p^0 = 1
        assert_eq!(g.coeffs[0][&vec![]], rat(1));
        // p^1 = -v_1
        assert_eq!(g.coeffs[1][&vec![(1, 1)]], rat(-1));
        assert_eq!(g.coeffs[1].len(), 1);
        // p^2 = v_1^2 / 2 - v_2 / 2
        assert_eq!(g.coeffs[2][&vec![(1, 2)]], crate::scalar::ratio(1, 2));
        assert_eq!(g.coeffs[2][&vec![(2, 1)]], crate::scalar::ratio(-1, 2));
    }

    #[test]
    fn evaluation_module_sl2() {
        let c = ctx(TypeLabel::A, 1, 1);
        let md = c.evaluation_module(&Weight::new(vec![1]), &Scalar::from_int(1, 2)).unwrap();
        assert_eq!(md.dim, 2);
        assert!(md.verify_representation());
        // (x (x) t) v_top = a (x v_top)
        let e = LoopElement::single(c.alg.basis_vec(c.alg.e_index(0)), 1);
        let e0 = LoopElement::single(c.alg.basis_vec(c.alg.e_index(0)), 0);
        let f0 = LoopElement::single(c.alg.basis_vec(c.alg.f_index(0)), 0);
        let low = md.apply_loop(&c.alg, &c.lifted, &f0, &md.hw_vector()).unwrap();
        let via_t = md.apply_loop(&c.alg, &c.lifted, &e, &low).unwrap();
        let via_0 = md.apply_loop(&c.alg, &c.lifted, &e0, &low).unwrap();
        let scaled: Vec<Scalar> =
            via_0.iter().map(|x| x.clone() * Scalar::from_int(1, 2)).collect();
        assert_eq!(via_t, scaled);
    }

    #[test]
    fn evaluation_module_sl3_fundamental_and_adjoint() {
        let c = ctx(TypeLabel::A, 2, 1);
        let md = c.evaluation_module(&Weight::new(vec![1, 0]), &Scalar::from_int(1, 3)).unwrap();
        assert_eq!(md.dim, 3);
        let md = c.evaluation_module(&Weight::new(vec![1, 1]), &Scalar::from_int(1, 2)).unwrap();
        assert_eq!(md.dim, 8);
        assert!(md.verify_representation());
    }

    #[test]
    fn local_weyl_sl2_dimensions() {
        let c = ctx(TypeLabel::A, 1, 1);
        for (mult, expect) in [(1i64, 2usize), (2, 4), (3, 8)] {
            let mut xi = XiFunction::empty(1, 1);
            xi.insert(Scalar::from_int(1, 2), Weight::new(vec![mult])).unwrap();
            let md = c.build_local_weyl(&xi).unwrap();
            assert_eq!(md.dim, expect, "multiplicity {mult}");
            assert!(md.verify_representation());
        }
    }

    #[test]
    fn local_weyl_two_points_multiplicative() {
        let c = ctx(TypeLabel::A, 1, 1);
        let mut xi = XiFunction::empty(1, 1);
        xi.insert(Scalar::from_int(1, 2), Weight::new(vec![1])).unwrap();
        xi.insert(Scalar::from_int(1, 3), Weight::new(vec![1])).unwrap();
        let md = c.build_local_weyl(&xi).unwrap();
        assert_eq!(md.dim, 4);
    }

    #[test]
    fn straighten_examples() {
        let c = ctx(TypeLabel::A, 1, 1);
        let q = MonicPoly::from_roots(1, &[(Scalar::from_int(1, 2), 1)]).unwrap();
        let t = truncate(&c.alg, &c.lifted, &c.fd, &c.gp, &q, false).unwrap();
        // locate e, f, h basis indices
        let find = |cls: Tri| (0..t.dim()).find(|&i| t.basis[i].cls == cls).unwrap();
        let (e, f, h) = (find(Tri::Pos), find(Tri::Neg), find(Tri::Car));
        // sorted word is fixed
        let w = pbw_straighten(&t, &[f, h, e]);
        assert_eq!(w.len(), 1);
        assert!(w[&vec![f, h, e]].is_one());
        // (e, f) -> (f, e) + h
        let w = pbw_straighten(&t, &[e, f]);
        assert_eq!(w.len(), 2);
        assert!(w[&vec![f, e]].is_one());
        assert!(w[&vec![h]].is_one());
    }

    #[test]
    fn straighten_matches_sequential_action() {
        let c = ctx(TypeLabel::A, 2, 1);
        let mut xi = XiFunction::empty(1, 2);
        xi.insert(Scalar::from_int(1, 2), Weight::new(vec![1, 0])).unwrap();
        let md = c.build_local_weyl(&xi).unwrap();
        let t = &md.trunc;
        let words = [
            vec![0usize, 3, 1, 2],
            vec![5, 2, 7, 1],
            vec![4, 4, 0, 6],
        ];
        for w in words {
            if w.iter().any(|&i| i >= t.dim()) {
                continue;
            }
            // direct sequential action on the highest-weight vector
            let mut direct = md.hw_vector();
            for &b in w.iter().rev() {
                direct = md.apply_basis(b, &direct);
            }
            // straighten first, then act term by term
            let mut via = vec![Scalar::zero(md.m); md.dim];
            for (word, c0) in pbw_straighten(t, &w) {
                let mut v = md.hw_vector();
                for &b in word.iter().rev() {
                    v = md.apply_basis(b, &v);
                }
                for (slot, x) in via.iter_mut().zip(&v) {
                    *slot += c0.clone() * x.clone();
                }
            }
            assert_eq!(direct, via, "word {w:?}");
        }
    }

    #[test]
    fn character_of_sl2_fundamental() {
        let c = ctx(TypeLabel::A, 1, 1);
        let md = c.evaluation_module(&Weight::new(vec![1]), &Scalar::from_int(1, 5)).unwrap();
        let ch = character(&md);
        assert_eq!(ch.len(), 2);
        assert_eq!(ch[&vec![1]], 1);
        assert_eq!(ch[&vec![-1]], 1);
    }

    #[test]
    fn generated_submodule_examples() {
        let c = ctx(TypeLabel::A, 1, 1);
        let md = c.evaluation_module(&Weight::new(vec![2]), &Scalar::from_int(1, 2)).unwrap();
        let mats: Vec<SparseMat> = md.actions.clone();
        // zero vector generates nothing
        let zero = vec![Scalar::zero(1); md.dim];
        assert_eq!(generated_submodule(1, md.dim, &mats, &zero), 0);
        // the highest-weight vector generates everything
        assert_eq!(generated_submodule(1, md.dim, &mats, &md.hw_vector()), md.dim);
    }
}
