//! Finite-type root systems, diagram automorphisms and folded root data.
//!
//! Cartan matrices follow the convention `a[i][j] = <alpha_j, alpha_i^vee>`,
//! i.e. row `i` lists the values of all simple roots on the coroot `H_i`.
//! Positive roots are stored as integer coordinate vectors over the simple
//! roots and enumerated by root-string closure.
//!
//! Folding: a diagram automorphism `sigma` of order `m` partitions the nodes
//! into orbits; orbit representatives (smallest node index) index the simple
//! roots of the fixed-point algebra. The folded Cartan matrix is computed
//! from the pairing `alpha_j(h_i(0))` with the correction `2/c_i`, where
//! `c_i = alpha_i(h_i(0))` is 1 exactly at the anomalous middle orbits of
//! `A_{2n}` and 2 everywhere else.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TypeLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl TypeLabel {
    pub fn parse(s: &str) -> Option<TypeLabel> {
        match s {
            "A" | "a" => Some(TypeLabel::A),
            "B" | "b" => Some(TypeLabel::B),
            "C" | "c" => Some(TypeLabel::C),
            "D" | "d" => Some(TypeLabel::D),
            "E" | "e" => Some(TypeLabel::E),
            "F" | "f" => Some(TypeLabel::F),
            "G" | "g" => Some(TypeLabel::G),
            _ => None,
        }
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            TypeLabel::A => 'A',
            TypeLabel::B => 'B',
            TypeLabel::C => 'C',
            TypeLabel::D => 'D',
            TypeLabel::E => 'E',
            TypeLabel::F => 'F',
            TypeLabel::G => 'G',
        };
        write!(f, "{c}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootDataError {
    InvalidTypeRank(TypeLabel, usize),
    InvalidCartan(String),
    InvalidAutomorphism(String),
    ZeroPoint,
}

impl fmt::Display for RootDataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootDataError::InvalidTypeRank(t, n) => write!(f, "invalid type/rank {t}{n}"),
            RootDataError::InvalidCartan(s) => write!(f, "invalid Cartan matrix: {s}"),
            RootDataError::InvalidAutomorphism(s) => write!(f, "invalid automorphism: {s}"),
            RootDataError::ZeroPoint => write!(f, "points must lie in C^*, got 0"),
        }
    }
}

/// Integral weight in the fundamental-weight basis of the ambient system.
///
/// The same type carries weights of the folded algebra, with coordinates
/// given by values on the orbit coroots `h_i(0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Weight {
    pub coords: Vec<i64>,
}

impl Weight {
    pub fn new(coords: Vec<i64>) -> Self {
        Weight { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Weight { coords: vec![0; rank] }
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut coords = vec![0; rank];
        coords[i] = 1;
        Weight { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Membership test for `P^+`.
    pub fn is_dominant(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0)
    }

    pub fn height(&self) -> i64 {
        self.coords.iter().sum()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Cartan matrix of the given type, `a[i][j] = <alpha_j, alpha_i^vee>`.
pub fn cartan_matrix(label: TypeLabel, rank: usize) -> Result<Vec<Vec<i64>>, RootDataError> {
    let err = RootDataError::InvalidTypeRank(label, rank);
    let n = rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let chain = |a: &mut Vec<Vec<i64>>, i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match label {
        TypeLabel::A => {
            if n < 1 {
                return Err(err);
            }
            for i in 1..n {
                chain(&mut a, i - 1, i);
            }
        }
        TypeLabel::B => {
            // alpha_n short: <alpha_{n-1}, alpha_n^vee> = -2
            if n < 2 {
                return Err(err);
            }
            for i in 1..n {
                chain(&mut a, i - 1, i);
            }
            a[n - 1][n - 2] = -2;
        }
        TypeLabel::C => {
            // alpha_n long: <alpha_n, alpha_{n-1}^vee> = -2
            if n < 2 {
                return Err(err);
            }
            for i in 1..n {
                chain(&mut a, i - 1, i);
            }
            a[n - 2][n - 1] = -2;
        }
        TypeLabel::D => {
            if n < 3 {
                return Err(err);
            }
            for i in 1..n - 1 {
                chain(&mut a, i - 1, i);
            }
            chain(&mut a, n - 3, n - 1);
        }
        TypeLabel::E => {
            if !(6..=8).contains(&n) {
                return Err(err);
            }
            // Bourbaki: chain 1-3-4-5-6(-7-8), node 2 attached to node 4.
            chain(&mut a, 0, 2);
            chain(&mut a, 2, 3);
            chain(&mut a, 1, 3);
            for i in 4..n {
                chain(&mut a, i - 1, i);
            }
        }
        TypeLabel::F => {
            if n != 4 {
                return Err(err);
            }
            chain(&mut a, 0, 1);
            chain(&mut a, 1, 2);
            chain(&mut a, 2, 3);
            // alpha_1, alpha_2 long; alpha_3, alpha_4 short
            a[2][1] = -2;
        }
        TypeLabel::G => {
            if n != 2 {
                return Err(err);
            }
            // alpha_1 short, alpha_2 long (Bourbaki)
            a[0][1] = -3;
            a[1][0] = -1;
        }
    }
    Ok(a)
}

/// A finite-type root system with enumerated positive roots.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub label: TypeLabel,
    pub rank: usize,
    /// `cartan[i][j] = <alpha_j, alpha_i^vee>`
    pub cartan: Vec<Vec<i64>>,
    /// Positive roots as coordinate vectors over the simple roots, sorted by
    /// (height, lexicographic); the first `rank` entries are the simple roots.
    pub positive_roots: Vec<Vec<i64>>,
    /// Index of the highest root in `positive_roots`.
    pub theta: usize,
    /// Minimal positive symmetrizers: `d[i] * a[i][j] = d[j] * a[j][i]`.
    pub d: Vec<i64>,
    index: BTreeMap<Vec<i64>, usize>,
}

impl RootSystem {
    pub fn build(label: TypeLabel, rank: usize) -> Result<Self, RootDataError> {
        let cartan = cartan_matrix(label, rank)?;
        Self::from_cartan_labeled(cartan, Some(label))
    }

    /// Construct from an arbitrary finite-type Cartan matrix, recognizing the
    /// type label up to diagram isomorphism.
    pub fn from_cartan(cartan: Vec<Vec<i64>>) -> Result<Self, RootDataError> {
        Self::from_cartan_labeled(cartan, None)
    }

    fn from_cartan_labeled(
        cartan: Vec<Vec<i64>>,
        label: Option<TypeLabel>,
    ) -> Result<Self, RootDataError> {
        let n = cartan.len();
        if n == 0 || cartan.iter().any(|r| r.len() != n) {
            return Err(RootDataError::InvalidCartan("not square".into()));
        }
        for i in 0..n {
            if cartan[i][i] != 2 {
                return Err(RootDataError::InvalidCartan("diagonal must be 2".into()));
            }
            for j in 0..n {
                if i != j {
                    if cartan[i][j] > 0 {
                        return Err(RootDataError::InvalidCartan(
                            "off-diagonal entries must be <= 0".into(),
                        ));
                    }
                    if (cartan[i][j] == 0) != (cartan[j][i] == 0) {
                        return Err(RootDataError::InvalidCartan("zero pattern asymmetric".into()));
                    }
                }
            }
        }
        let label = match label {
            Some(l) => l,
            None => {
                recognize(&cartan).ok_or_else(|| {
                    RootDataError::InvalidCartan("not a connected finite type".into())
                })?
                .0
            }
        };
        let d = symmetrizers(&cartan)?;
        let positive_roots = close_positive_roots(&cartan)?;
        let mut index = BTreeMap::new();
        for (i, r) in positive_roots.iter().enumerate() {
            index.insert(r.clone(), i);
        }
        // theta: the unique root of maximal height
        let max_h = positive_roots.iter().map(|r| height(r)).max().unwrap();
        let tops: Vec<usize> = (0..positive_roots.len())
            .filter(|&i| height(&positive_roots[i]) == max_h)
            .collect();
        if tops.len() != 1 {
            return Err(RootDataError::InvalidCartan("highest root not unique".into()));
        }
        Ok(RootSystem { label, rank: n, cartan, positive_roots, theta: tops[0], d, index })
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn root_index(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn is_positive_root(&self, coords: &[i64]) -> bool {
        self.index.contains_key(coords)
    }

    /// Is `coords` a root (positive or negative)?
    pub fn is_root(&self, coords: &[i64]) -> bool {
        if self.is_positive_root(coords) {
            return true;
        }
        let neg: Vec<i64> = coords.iter().map(|c| -c).collect();
        self.is_positive_root(&neg)
    }

    /// `<beta, alpha_i^vee>` for `beta` in simple-root coordinates.
    pub fn pair_coroot(&self, beta: &[i64], i: usize) -> i64 {
        self.cartan[i].iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    /// Squared length `(beta, beta)` in the symmetrized form.
    pub fn length_sq(&self, beta: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += beta[i] * beta[j] * self.d[i] * self.cartan[i][j];
            }
        }
        s
    }

    /// Integer coefficients of the coroot `H_beta` over the simple coroots.
    pub fn coroot_coeffs(&self, beta: &[i64]) -> Vec<i64> {
        let dbeta = self.length_sq(beta) / 2;
        (0..self.rank)
            .map(|i| {
                let num = beta[i] * self.d[i];
                debug_assert_eq!(num % dbeta, 0, "coroot coefficients must be integral");
                num / dbeta
            })
            .collect()
    }

    /// Largest `p >= 0` such that `beta - p*alpha` is a root.
    pub fn string_down(&self, beta: &[i64], alpha: &[i64]) -> i64 {
        let mut p = 0i64;
        let mut cur: Vec<i64> = beta.to_vec();
        loop {
            for (c, a) in cur.iter_mut().zip(alpha) {
                *c -= a;
            }
            if cur.iter().all(|&c| c == 0) || !self.is_root(&cur) {
                return p;
            }
            p += 1;
        }
    }

    /// Value of the weight `lambda` (fundamental coordinates) on `H_beta`.
    pub fn weight_on_coroot(&self, lambda: &Weight, beta: &[i64]) -> i64 {
        self.coroot_coeffs(beta)
            .iter()
            .zip(&lambda.coords)
            .map(|(c, l)| c * l)
            .sum()
    }
}

fn height(r: &[i64]) -> i64 {
    r.iter().sum()
}

fn symmetrizers(cartan: &[Vec<i64>]) -> Result<Vec<i64>, RootDataError> {
    let n = cartan.len();
    // propagate rational ratios over the graph, then clear denominators
    let mut num = vec![0i64; n];
    let mut den = vec![0i64; n];
    num[0] = 1;
    den[0] = 1;
    let mut stack = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if i != j && cartan[i][j] != 0 && !seen[j] {
                // d_j = d_i * a_ij / a_ji
                num[j] = num[i] * cartan[i][j].abs();
                den[j] = den[i] * cartan[j][i].abs();
                let g = gcd(num[j], den[j]);
                num[j] /= g;
                den[j] /= g;
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(RootDataError::InvalidCartan("diagram not connected".into()));
    }
    let lcm_den = den.iter().fold(1i64, |acc, &d| acc / gcd(acc, d) * d);
    let mut d: Vec<i64> = (0..n).map(|i| num[i] * (lcm_den / den[i])).collect();
    let g = d.iter().fold(0i64, |acc, &x| gcd(acc, x));
    for x in d.iter_mut() {
        *x /= g;
    }
    for i in 0..n {
        for j in 0..n {
            if d[i] * cartan[i][j] != d[j] * cartan[j][i] {
                return Err(RootDataError::InvalidCartan("not symmetrizable".into()));
            }
        }
    }
    Ok(d)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Enumerate all positive roots by the root-string construction.
fn close_positive_roots(cartan: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, RootDataError> {
    let n = cartan.len();
    let mut roots: Vec<Vec<i64>> = Vec::new();
    let mut set: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
    for i in 0..n {
        let mut r = vec![0i64; n];
        r[i] = 1;
        set.insert(r.clone(), ());
        roots.push(r);
    }
    let is_root_in = |set: &BTreeMap<Vec<i64>, ()>, r: &[i64]| -> bool {
        if r.iter().all(|&c| c == 0) {
            return false;
        }
        if r.iter().all(|&c| c >= 0) {
            return set.contains_key(r);
        }
        if r.iter().all(|&c| c <= 0) {
            let neg: Vec<i64> = r.iter().map(|c| -c).collect();
            return set.contains_key(&neg);
        }
        false
    };
    let mut frontier = roots.clone();
    let cap = 1usize << 20;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for beta in &frontier {
            for i in 0..n {
                // p = how far the alpha_i-string extends below beta
                let mut p = 0i64;
                let mut cur = beta.clone();
                loop {
                    cur[i] -= 1;
                    if !is_root_in(&set, &cur) {
                        break;
                    }
                    p += 1;
                }
                let pairing: i64 = cartan[i].iter().zip(beta).map(|(a, b)| a * b).sum();
                let q = p - pairing;
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !set.contains_key(&up) {
                        set.insert(up.clone(), ());
                        next.push(up);
                    }
                }
            }
        }
        roots.extend(next.iter().cloned());
        frontier = next;
        if roots.len() > cap {
            return Err(RootDataError::InvalidCartan("root closure did not terminate".into()));
        }
    }
    roots.sort_by(|a, b| height(a).cmp(&height(b)).then_with(|| a.cmp(b)));
    Ok(roots)
}

/// Recognize a valid finite-type Cartan matrix up to diagram isomorphism.
pub fn recognize(cartan: &[Vec<i64>]) -> Option<(TypeLabel, usize)> {
    let n = cartan.len();
    let d = symmetrizers(cartan).ok()?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if cartan[i][j] != 0 {
                edges.push((i, j, cartan[i][j] * cartan[j][i]));
            }
        }
    }
    let degree = |i: usize| edges.iter().filter(|&&(a, b, _)| a == i || b == i).count();
    let max_bond = edges.iter().map(|&(_, _, m)| m).max().unwrap_or(1);
    if n == 1 {
        return Some((TypeLabel::A, 1));
    }
    if edges.len() >= n {
        return None; // has a cycle
    }
    match max_bond {
        3 => {
            if n == 2 {
                Some((TypeLabel::G, 2))
            } else {
                None
            }
        }
        2 => {
            let doubles: Vec<&(usize, usize, i64)> =
                edges.iter().filter(|&&(_, _, m)| m == 2).collect();
            if doubles.len() != 1 {
                return None;
            }
            let &(x, y, _) = doubles[0];
            if edges.iter().any(|&(_, _, m)| m != 1 && m != 2) {
                return None;
            }
            // all nodes must have degree <= 2 and the graph must be a path
            if (0..n).any(|i| degree(i) > 2) {
                return None;
            }
            if n == 2 {
                // one long, one short; label by the position of the long root
                return if d[0] > d[1] {
                    Some((TypeLabel::B, 2))
                } else {
                    Some((TypeLabel::C, 2))
                };
            }
            let (dx, dy) = (degree(x), degree(y));
            if n == 4 && dx == 2 && dy == 2 {
                return Some((TypeLabel::F, 4));
            }
            // B: the short end of the double edge is a leaf; C: the long end is
            let (leaf, _inner) = if dx == 1 { (x, y) } else if dy == 1 { (y, x) } else { return None };
            let short_is_leaf = d[leaf] < d[if leaf == x { y } else { x }];
            if short_is_leaf {
                Some((TypeLabel::B, n))
            } else {
                Some((TypeLabel::C, n))
            }
        }
        _ => {
            // simply laced
            let deg3: Vec<usize> = (0..n).filter(|&i| degree(i) == 3).collect();
            if (0..n).any(|i| degree(i) > 3) || deg3.len() > 1 {
                return None;
            }
            if deg3.is_empty() {
                return Some((TypeLabel::A, n));
            }
            let hub = deg3[0];
            // arm lengths from the hub
            let mut arms = Vec::new();
            for &(a, b, _) in &edges {
                let start = if a == hub {
                    Some(b)
                } else if b == hub {
                    Some(a)
                } else {
                    None
                };
                if let Some(mut cur) = start {
                    let mut prev = hub;
                    let mut len = 1usize;
                    loop {
                        let next: Vec<usize> = edges
                            .iter()
                            .filter_map(|&(p, q, _)| {
                                if p == cur && q != prev {
                                    Some(q)
                                } else if q == cur && p != prev {
                                    Some(p)
                                } else {
                                    None
                                }
                            })
                            .collect();
                        match next.as_slice() {
                            [] => break,
                            [nx] => {
                                prev = cur;
                                cur = *nx;
                                len += 1;
                            }
                            _ => return None,
                        }
                    }
                    arms.push(len);
                }
            }
            arms.sort_unstable();
            match arms.as_slice() {
                [1, 1, _] => Some((TypeLabel::D, n)),
                [1, 2, 2] => Some((TypeLabel::E, 6)),
                [1, 2, 3] => Some((TypeLabel::E, 7)),
                [1, 2, 4] => Some((TypeLabel::E, 8)),
                _ => None,
            }
        }
    }
}

/// A Dynkin diagram automorphism, stored as a permutation of node indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramAut {
    pub perm: Vec<usize>,
    pub m: u8,
}

impl DiagramAut {
    pub fn identity(rank: usize) -> Self {
        DiagramAut { perm: (0..rank).collect(), m: 1 }
    }

    pub fn new(rs: &RootSystem, perm: Vec<usize>) -> Result<Self, RootDataError> {
        let n = rs.rank;
        if perm.len() != n {
            return Err(RootDataError::InvalidAutomorphism(format!(
                "permutation length {} != rank {}",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(RootDataError::InvalidAutomorphism("not a permutation".into()));
            }
            seen[p] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if rs.cartan[perm[i]][perm[j]] != rs.cartan[i][j] {
                    return Err(RootDataError::InvalidAutomorphism(
                        "Cartan matrix not preserved".into(),
                    ));
                }
            }
        }
        // order = lcm of cycle lengths
        let mut order = 1u64;
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0u64;
            let mut cur = start;
            while !visited[cur] {
                visited[cur] = true;
                cur = perm[cur];
                len += 1;
            }
            order = order / gcd(order as i64, len as i64) as u64 * len;
        }
        if !(1..=3).contains(&order) {
            return Err(RootDataError::InvalidAutomorphism(format!(
                "order {order} not in {{1,2,3}}"
            )));
        }
        Ok(DiagramAut { perm, m: order as u8 })
    }

    /// Image of a root (coordinate vector) under the induced map on roots.
    pub fn apply_root(&self, coords: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; coords.len()];
        for (i, &c) in coords.iter().enumerate() {
            out[self.perm[i]] = c;
        }
        out
    }
}

/// Data of the fixed-point algebra: orbits, folded Cartan matrix, the folded
/// root system, restriction maps and short/long classification.
#[derive(Clone, Debug)]
pub struct FoldedRootData {
    pub m: u8,
    /// Orbits of node indices, each sorted, ordered by smallest element.
    pub orbits: Vec<Vec<usize>>,
    /// Chosen representative (smallest index) per orbit; this is `I_0`.
    pub reps: Vec<usize>,
    /// Stabilizer sizes `|Gamma_i| = m / |orbit|`.
    pub stab_sizes: Vec<usize>,
    /// Pairing matrix `pm[i][j] = alpha_{rep(j)}(h_i(0))`.
    pub pairing: Vec<Vec<i64>>,
    /// Normalizers `c_i = alpha_i(h_i(0))`; 1 exactly at anomalous `A_{2n}` orbits.
    pub c: Vec<i64>,
    /// Honest Cartan matrix of the fixed-point algebra.
    pub folded_cartan: Vec<Vec<i64>>,
    /// Root system of the fixed-point algebra built from `folded_cartan`.
    pub r0: RootSystem,
    /// Per positive root of `r0`: true if short (minimal length).
    pub r0_short: Vec<bool>,
    /// `P_0^+` basis multipliers: the i-th generator is `(2/c_i)` times the
    /// i-th abstract fundamental weight of the fixed-point algebra (2 at the
    /// doubled `A_{2n}` node, 1 otherwise).
    pub p0_multiplier: Vec<i64>,
    /// True when the ambient algebra is of type `A_{2n}` with the nontrivial fold.
    pub is_a2n: bool,
    /// Restriction matrix on root coordinates: `(restrict * beta)_i = beta(h_i(0))`.
    pub restrict_rows: Vec<Vec<i64>>,
}

impl FoldedRootData {
    pub fn rank0(&self) -> usize {
        self.reps.len()
    }

    /// Orbit index of an ambient node.
    pub fn orbit_of_node(&self, node: usize) -> usize {
        self.orbits.iter().position(|o| o.contains(&node)).expect("node in some orbit")
    }
}

/// Fold a root system along a diagram automorphism.
pub fn fold(rs: &RootSystem, aut: &DiagramAut) -> Result<FoldedRootData, RootDataError> {
    let n = rs.rank;
    let m = aut.m;
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut orb = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            orb.push(cur);
            cur = aut.perm[cur];
        }
        orb.sort_unstable();
        orbits.push(orb);
    }
    orbits.sort_by_key(|o| o[0]);
    let reps: Vec<usize> = orbits.iter().map(|o| o[0]).collect();
    let stab_sizes: Vec<usize> = orbits.iter().map(|o| m as usize / o.len()).collect();
    let k = reps.len();
    let mut pairing = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            pairing[i][j] = orbits[i].iter().map(|&node| rs.cartan[node][reps[j]]).sum();
        }
    }
    let c: Vec<i64> = (0..k).map(|i| pairing[i][i]).collect();
    if c.iter().any(|&ci| ci != 1 && ci != 2) {
        return Err(RootDataError::InvalidAutomorphism(
            "unexpected orbit normalization".into(),
        ));
    }
    let mut folded_cartan = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let num = 2 * pairing[i][j];
            if num % c[i] != 0 {
                return Err(RootDataError::InvalidAutomorphism(
                    "folded Cartan matrix not integral".into(),
                ));
            }
            folded_cartan[i][j] = num / c[i];
        }
    }
    let r0 = RootSystem::from_cartan(folded_cartan.clone())?;
    let min_len = r0
        .positive_roots
        .iter()
        .map(|r| r0.length_sq(r))
        .min()
        .expect("nonempty root system");
    let r0_short: Vec<bool> =
        r0.positive_roots.iter().map(|r| r0.length_sq(r) == min_len).collect();
    let p0_multiplier: Vec<i64> = c.iter().map(|&ci| 2 / ci).collect();
    let is_a2n = rs.label == TypeLabel::A && rs.rank % 2 == 0 && m == 2;
    let mut restrict_rows = vec![vec![0i64; n]; k];
    for i in 0..k {
        for j in 0..n {
            restrict_rows[i][j] = orbits[i].iter().map(|&node| rs.cartan[node][j]).sum();
        }
    }
    Ok(FoldedRootData {
        m,
        orbits,
        reps,
        stab_sizes,
        pairing,
        c,
        folded_cartan,
        r0,
        r0_short,
        p0_multiplier,
        is_a2n,
        restrict_rows,
    })
}

/// Restriction `P -> P_0`: sum the fundamental coordinates over each orbit.
/// The result is expressed by its values on the orbit coroots `h_i(0)`.
pub fn restrict_weight(fd: &FoldedRootData, lambda: &Weight) -> Weight {
    let coords = fd
        .orbits
        .iter()
        .map(|o| o.iter().map(|&node| lambda.coords[node]).sum())
        .collect();
    Weight { coords }
}

/// Restricted weight of an ambient root `beta` (simple-root coordinates).
pub fn restrict_root(fd: &FoldedRootData, beta: &[i64]) -> Vec<i64> {
    fd.restrict_rows
        .iter()
        .map(|row| row.iter().zip(beta).map(|(r, b)| r * b).sum())
        .collect()
}

/// Values of a folded root `alpha` (coordinates over the folded simple roots)
/// on the orbit coroots `h_i(0)`.
pub fn folded_root_pairing(fd: &FoldedRootData, alpha: &[i64]) -> Vec<i64> {
    (0..fd.rank0())
        .map(|i| alpha.iter().zip(fd.pairing[i].iter()).map(|(a, p)| a * p).sum())
        .collect()
}

/// The orbit `{zeta^j a}` of a nonzero point, duplicates removed.
pub fn orbit_of_point(m: u8, a: &Scalar) -> Result<Vec<Scalar>, RootDataError> {
    if a.is_zero() {
        return Err(RootDataError::ZeroPoint);
    }
    let mut out: Vec<Scalar> = Vec::new();
    for j in 0..m as i64 {
        let p = Scalar::zeta_power(m, j) * a.clone();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(label: TypeLabel, rank: usize) -> RootSystem {
        RootSystem::build(label, rank).unwrap()
    }

    #[test]
    fn classical_positive_root_counts() {
        assert_eq!(rs(TypeLabel::A, 2).num_positive_roots(), 3);
        assert_eq!(rs(TypeLabel::A, 4).num_positive_roots(), 10);
        assert_eq!(rs(TypeLabel::B, 3).num_positive_roots(), 9);
        assert_eq!(rs(TypeLabel::C, 3).num_positive_roots(), 9);
        assert_eq!(rs(TypeLabel::D, 4).num_positive_roots(), 12);
        assert_eq!(rs(TypeLabel::G, 2).num_positive_roots(), 6);
        assert_eq!(rs(TypeLabel::F, 4).num_positive_roots(), 24);
        assert_eq!(rs(TypeLabel::E, 6).num_positive_roots(), 36);
    }

    #[test]
    fn theta_of_a2() {
        let r = rs(TypeLabel::A, 2);
        assert_eq!(r.positive_roots[r.theta], vec![1, 1]);
    }

    #[test]
    fn recognition_fixed_points() {
        for (l, n) in [
            (TypeLabel::A, 3),
            (TypeLabel::B, 3),
            (TypeLabel::C, 2),
            (TypeLabel::D, 4),
            (TypeLabel::E, 7),
            (TypeLabel::F, 4),
            (TypeLabel::G, 2),
        ] {
            let c = cartan_matrix(l, n).unwrap();
            assert_eq!(recognize(&c), Some((l, n)), "{l}{n}");
        }
    }

    #[test]
    fn invalid_type_rank() {
        assert!(RootSystem::build(TypeLabel::G, 3).is_err());
        assert!(RootSystem::build(TypeLabel::F, 5).is_err());
        assert!(RootSystem::build(TypeLabel::B, 1).is_err());
    }

    fn fold_a(rank: usize) -> FoldedRootData {
        let r = rs(TypeLabel::A, rank);
        let perm: Vec<usize> = (0..rank).map(|i| rank - 1 - i).collect();
        let aut = DiagramAut::new(&r, perm).unwrap();
        fold(&r, &aut).unwrap()
    }

    #[test]
    fn fold_a2_gives_a1() {
        let fd = fold_a(2);
        assert_eq!(fd.r0.label, TypeLabel::A);
        assert_eq!(fd.r0.rank, 1);
        assert_eq!(fd.orbits, vec![vec![0, 1]]);
        assert_eq!(fd.stab_sizes, vec![1]);
        assert_eq!(fd.c, vec![1]);
        assert_eq!(fd.p0_multiplier, vec![2]);
        assert!(fd.is_a2n);
    }

    #[test]
    fn fold_a3_gives_c2() {
        let fd = fold_a(3);
        assert_eq!((fd.r0.label, fd.r0.rank), (TypeLabel::C, 2));
        assert_eq!(fd.orbits, vec![vec![0, 2], vec![1]]);
        assert_eq!(fd.stab_sizes, vec![1, 2]);
        assert_eq!(fd.folded_cartan, vec![vec![2, -2], vec![-1, 2]]);
    }

    #[test]
    fn fold_a4_gives_b2() {
        let fd = fold_a(4);
        assert_eq!((fd.r0.label, fd.r0.rank), (TypeLabel::B, 2));
        assert_eq!(fd.c, vec![2, 1]);
        assert_eq!(fd.folded_cartan, vec![vec![2, -1], vec![-2, 2]]);
        assert_eq!(fd.p0_multiplier, vec![1, 2]);
    }

    #[test]
    fn fold_d4_triality_gives_g2() {
        let r = rs(TypeLabel::D, 4);
        // leaves 1, 3, 4 cycle (0-indexed: 0 -> 2 -> 3 -> 0), center 2 fixed
        let aut = DiagramAut::new(&r, vec![2, 1, 3, 0]).unwrap();
        assert_eq!(aut.m, 3);
        let fd = fold(&r, &aut).unwrap();
        assert_eq!((fd.r0.label, fd.r0.rank), (TypeLabel::G, 2));
        assert_eq!(fd.stab_sizes, vec![1, 3]);
        assert!(!fd.is_a2n);
    }

    #[test]
    fn fold_d4_swap_gives_b3() {
        let r = rs(TypeLabel::D, 4);
        let aut = DiagramAut::new(&r, vec![0, 1, 3, 2]).unwrap();
        assert_eq!(aut.m, 2);
        let fd = fold(&r, &aut).unwrap();
        assert_eq!((fd.r0.label, fd.r0.rank), (TypeLabel::B, 3));
    }

    #[test]
    fn orbit_size_times_stabilizer_is_m() {
        for fd in [fold_a(2), fold_a(3), fold_a(4), fold_a(5)] {
            for (o, s) in fd.orbits.iter().zip(&fd.stab_sizes) {
                assert_eq!(o.len() * s, fd.m as usize);
            }
        }
    }

    #[test]
    fn restriction_examples() {
        // A2 fold: omega_1 restricts to value 1 on h_1(0)
        let fd = fold_a(2);
        let w = restrict_weight(&fd, &Weight::fundamental(2, 0));
        assert_eq!(w.coords, vec![1]);
        // A3 fold: omega_1 + omega_3 restricts to 2 * omega_bar_1
        let fd = fold_a(3);
        let lam = Weight::new(vec![1, 0, 1]);
        assert_eq!(restrict_weight(&fd, &lam).coords, vec![2, 0]);
        // additivity
        let a = Weight::new(vec![1, 2, 0]);
        let b = Weight::new(vec![0, 1, 3]);
        assert_eq!(
            restrict_weight(&fd, &a.add(&b)),
            restrict_weight(&fd, &a).add(&restrict_weight(&fd, &b))
        );
        // zero maps to zero
        assert!(restrict_weight(&fd, &Weight::zero(3)).is_zero());
    }

    #[test]
    fn orbit_of_point_examples() {
        let five = Scalar::from_int(2, 5);
        let orb = orbit_of_point(2, &five).unwrap();
        assert_eq!(orb.len(), 2);
        assert!(orb.contains(&Scalar::from_int(2, -5)));
        let one = Scalar::one(3);
        assert_eq!(orbit_of_point(3, &one).unwrap().len(), 3);
        assert_eq!(orbit_of_point(2, &Scalar::zero(2)), Err(RootDataError::ZeroPoint));
    }

    #[test]
    fn short_long_classification_b2() {
        let fd = fold_a(4);
        // B2: short roots are alpha_2 and alpha_1 + alpha_2
        let shorts: Vec<Vec<i64>> = fd
            .r0
            .positive_roots
            .iter()
            .zip(&fd.r0_short)
            .filter(|(_, &s)| s)
            .map(|(r, _)| r.clone())
            .collect();
        assert_eq!(shorts, vec![vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn g2_lengths() {
        let r = rs(TypeLabel::G, 2);
        assert_eq!(r.length_sq(&[1, 0]), 2);
        assert_eq!(r.length_sq(&[0, 1]), 6);
        // highest root is long
        assert_eq!(r.length_sq(&r.positive_roots[r.theta].clone()), 6);
    }
}
