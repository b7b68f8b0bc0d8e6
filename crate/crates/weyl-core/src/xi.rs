//! Finitely supported functions `C* -> P^+`, equivariance, admissibility,
//! the symmetrizer, and the orbit-multiset model of the maximal spectrum.
//!
//! Points live in `Q(zeta_m)^*` so that orbits `{a, zeta a, ...}` and powers
//! `a^k` stay exact. The automorphism acts on weights by pullback of
//! coordinates, `(sigma mu)_i = mu_{perm(i)}`; on `C*` it acts by
//! multiplication with `zeta`. For `m <= 2` the pullback and pushforward
//! conventions coincide; for `m = 3` the pullback is the one that makes the
//! evaluation characters constant along orbits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rootdata::{restrict_weight, FoldedRootData, Weight};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XiError {
    ZeroPoint,
    BadWeight(String),
    NotEquivariant,
    MultiplicityMismatch(String),
}

impl fmt::Display for XiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XiError::ZeroPoint => write!(f, "points must be nonzero"),
            XiError::BadWeight(s) => write!(f, "bad weight: {s}"),
            XiError::NotEquivariant => write!(f, "function is not equivariant"),
            XiError::MultiplicityMismatch(s) => write!(f, "multiplicity mismatch: {s}"),
        }
    }
}

/// Pullback action of `sigma^power` on a weight: `(sigma mu)_i = mu_{perm(i)}`.
pub fn sigma_weight(perm: &[usize], mu: &Weight, power: i64) -> Weight {
    let n = perm.len();
    let p = power.rem_euclid(ord_of(perm) as i64) as usize;
    let mut coords = mu.coords.clone();
    for _ in 0..p {
        let prev = coords.clone();
        for i in 0..n {
            coords[i] = prev[perm[i]];
        }
    }
    Weight::new(coords)
}

fn ord_of(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut order = 1usize;
    let mut cur: Vec<usize> = perm.to_vec();
    while cur.iter().enumerate().any(|(i, &p)| p != i) {
        let next: Vec<usize> = (0..n).map(|i| perm[cur[i]]).collect();
        cur = next;
        order += 1;
    }
    order
}

/// A finitely supported function from `Q(zeta_m)^*` to `P^+ \ {0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiFunction {
    pub m: u8,
    pub rank: usize,
    entries: BTreeMap<Scalar, Weight>,
}

impl XiFunction {
    pub fn empty(m: u8, rank: usize) -> Self {
        XiFunction { m, rank, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, point: Scalar, weight: Weight) -> Result<(), XiError> {
        if point.is_zero() {
            return Err(XiError::ZeroPoint);
        }
        if weight.coords.len() != self.rank {
            return Err(XiError::BadWeight(format!(
                "rank {} != {}",
                weight.coords.len(),
                self.rank
            )));
        }
        if !weight.is_dominant() {
            return Err(XiError::BadWeight("not dominant".into()));
        }
        if weight.is_zero() {
            return Ok(());
        }
        let slot = self
            .entries
            .entry(point)
            .or_insert_with(|| Weight::zero(self.rank));
        *slot = slot.add(&weight);
        Ok(())
    }

    pub fn support(&self) -> impl Iterator<Item = &Scalar> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Scalar, &Weight)> {
        self.entries.iter()
    }

    pub fn value(&self, point: &Scalar) -> Weight {
        self.entries
            .get(point)
            .cloned()
            .unwrap_or_else(|| Weight::zero(self.rank))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pointwise monoid addition.
    pub fn add(&self, other: &XiFunction) -> XiFunction {
        let mut out = self.clone();
        for (a, w) in &other.entries {
            out.insert(a.clone(), w.clone()).expect("valid entries");
        }
        out
    }

    /// `wt(xi) = sum over the support of the values`.
    pub fn wt(&self) -> Weight {
        self.entries
            .values()
            .fold(Weight::zero(self.rank), |acc, w| acc.add(w))
    }

    /// `xi(zeta a) = sigma(xi(a))` for all points.
    pub fn is_equivariant(&self, perm: &[usize]) -> bool {
        let zeta = Scalar::zeta(self.m);
        for (a, w) in &self.entries {
            let next = zeta.clone() * a.clone();
            if self.value(&next) != sigma_weight(perm, w, 1) {
                return false;
            }
        }
        true
    }

    /// Support meets every orbit at most once.
    pub fn is_admissible(&self) -> bool {
        let points: Vec<&Scalar> = self.entries.keys().collect();
        for (i, a) in points.iter().enumerate() {
            for b in points.iter().skip(i + 1) {
                for j in 0..self.m as i64 {
                    if Scalar::zeta_power(self.m, j) * (*a).clone() == (**b).clone() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The symmetrizer `xi -> sum_j sigma^j o xi o sigma^{-j}`.
    pub fn symmetrize(&self, perm: &[usize]) -> XiFunction {
        let mut out = XiFunction::empty(self.m, self.rank);
        for j in 0..self.m as i64 {
            for (a, w) in &self.entries {
                let point = Scalar::zeta_power(self.m, j) * a.clone();
                let weight = sigma_weight(perm, w, j);
                out.insert(point, weight).expect("valid symmetrized entry");
            }
        }
        out
    }

    /// Group the support into full orbits, each listed by its points.
    pub fn support_orbits(&self) -> Vec<Vec<Scalar>> {
        let mut seen: Vec<Scalar> = Vec::new();
        let mut orbits = Vec::new();
        for a in self.entries.keys() {
            if seen.contains(a) {
                continue;
            }
            let orbit: Vec<Scalar> = (0..self.m as i64)
                .map(|j| Scalar::zeta_power(self.m, j) * a.clone())
                .filter(|p| self.entries.contains_key(p))
                .collect();
            let mut sorted = orbit.clone();
            sorted.sort();
            sorted.dedup();
            seen.extend(sorted.iter().cloned());
            orbits.push(sorted);
        }
        orbits
    }
}

/// A deterministic chi-admissible function: restrict `chi` to the smallest
/// representative of each orbit of its support.
pub fn chi_admissible(chi: &XiFunction, perm: &[usize]) -> Result<XiFunction, XiError> {
    if !chi.is_equivariant(perm) {
        return Err(XiError::NotEquivariant);
    }
    let mut out = XiFunction::empty(chi.m, chi.rank);
    for orbit in chi.support_orbits() {
        // orbit points are sorted; the first is the deterministic choice
        let rep = orbit[0].clone();
        out.insert(rep.clone(), chi.value(&rep)).expect("valid entry");
    }
    Ok(out)
}

/// `wt_0(chi)`: the restriction of `wt(xi)` for any chi-admissible `xi`.
pub fn wt0(chi: &XiFunction, fd: &FoldedRootData, perm: &[usize]) -> Result<Weight, XiError> {
    let xi = chi_admissible(chi, perm)?;
    Ok(restrict_weight(fd, &xi.wt()))
}

/// Multisets of `Gamma_i`-orbits per folded node, the maximal-spectrum model.
/// Each orbit is keyed canonically by `a^{|Gamma_i|}` and carries the chosen
/// representative point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitMultiset {
    pub m: u8,
    /// Per folded node: orbit key -> (representative, multiplicity).
    pub nodes: Vec<BTreeMap<Scalar, (Scalar, u64)>>,
}

impl OrbitMultiset {
    pub fn empty(m: u8, rank0: usize) -> Self {
        OrbitMultiset { m, nodes: (0..rank0).map(|_| BTreeMap::new()).collect() }
    }

    pub fn add_orbit(
        &mut self,
        fd: &FoldedRootData,
        node: usize,
        point: Scalar,
        mult: u64,
    ) -> Result<(), XiError> {
        if point.is_zero() {
            return Err(XiError::ZeroPoint);
        }
        if mult == 0 {
            return Ok(());
        }
        let gamma = fd.stab_sizes[node] as i64;
        let key = point.pow(gamma).expect("nonzero point");
        // canonical representative: the smallest point of the Gamma_i-orbit,
        // so multisets built from different representatives compare equal;
        // for a trivial stabilizer the orbit is the point itself
        let step = self.m as i64 / gamma;
        let rep = (0..gamma)
            .map(|j| Scalar::zeta_power(self.m, j * step) * point.clone())
            .min()
            .expect("nonempty orbit");
        let slot = self.nodes[node].entry(key).or_insert((rep, 0));
        slot.1 += mult;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.iter().all(|n| n.is_empty())
    }

    /// Monoid addition of multisets.
    pub fn add(&self, other: &OrbitMultiset) -> OrbitMultiset {
        let mut out = self.clone();
        for (i, node) in other.nodes.iter().enumerate() {
            for (key, (rep, mult)) in node {
                let slot = out.nodes[i].entry(key.clone()).or_insert((rep.clone(), 0));
                slot.1 += mult;
            }
        }
        out
    }

    /// `wt(f) = sum_i |f_i| omega_bar_i`, in orbit-coroot coordinates.
    pub fn wt(&self) -> Weight {
        Weight::new(
            self.nodes
                .iter()
                .map(|n| n.values().map(|(_, m)| *m as i64).sum())
                .collect(),
        )
    }
}

/// The monoid isomorphism `alpha`: equivariant functions to orbit multisets,
/// `alpha(xi)_i = (1/|Gamma_i|) pi_i(f_i)`.
pub fn alpha_iso(
    chi: &XiFunction,
    fd: &FoldedRootData,
    perm: &[usize],
) -> Result<OrbitMultiset, XiError> {
    if !chi.is_equivariant(perm) {
        return Err(XiError::NotEquivariant);
    }
    let mut out = OrbitMultiset::empty(chi.m, fd.rank0());
    for (i, &rep_node) in fd.reps.iter().enumerate() {
        let gamma = fd.stab_sizes[i] as u64;
        if gamma == 1 {
            // pi_i is the identity: one entry per support point
            for (a, w) in chi.entries() {
                let c = w.coords[rep_node];
                if c > 0 {
                    out.add_orbit(fd, i, a.clone(), c as u64)?;
                }
            }
        } else {
            // full-orbit pushforward divided by |Gamma_i|; the value is
            // constant along each orbit by equivariance
            for orbit in chi.support_orbits() {
                let a = orbit[0].clone();
                let total: u64 = orbit
                    .iter()
                    .map(|b| chi.value(b).coords[rep_node] as u64)
                    .sum();
                if total % gamma != 0 {
                    return Err(XiError::MultiplicityMismatch(
                        "orbit total not divisible by the stabilizer".into(),
                    ));
                }
                if total > 0 {
                    out.add_orbit(fd, i, a, total / gamma)?;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`alpha_iso`]: rebuild the equivariant function from orbit data.
pub fn alpha_inv(f: &OrbitMultiset, fd: &FoldedRootData, perm: &[usize]) -> XiFunction {
    let rank = perm.len();
    let m = f.m;
    let mut out = XiFunction::empty(m, rank);
    for (i, node) in f.nodes.iter().enumerate() {
        let rep_node = fd.reps[i];
        for (_, (a, mult)) in node {
            // spread over the full point orbit; the node index follows the
            // inverse diagram action so the result is equivariant
            for j in 0..m as i64 {
                let point = Scalar::zeta_power(m, j) * a.clone();
                let mut coords = alloc::vec![0i64; rank];
                // sigma^j-pullback equivariance: value at zeta^j a has its
                // omega at the node mapping to rep_node under perm^j
                let mut node_idx = rep_node;
                for _ in 0..j {
                    node_idx = perm.iter().position(|&p| p == node_idx).expect("perm");
                }
                coords[node_idx] = *mult as i64;
                out.insert(point, Weight::new(coords)).expect("valid entry");
            }
        }
    }
    out
}
