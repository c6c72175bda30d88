//! Finite group core: Cayley-table groups, element sets, products,
//! subgroup extraction, quotients, and the group catalog.

mod catalog;
mod hom;
mod lattice;

pub use catalog::{
    alternating, build_group, cyclic, dicyclic, dihedral, group_from_cayley_json,
    group_from_permutations_json, symmetric,
};
pub use hom::{automorphisms, find_isomorphism, isomorphisms, outer_classes, GroupHom};
pub use lattice::SubgroupLattice;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Element index inside a [`FiniteGroup`].
pub type Elem = u16;

/// Bitset over the elements of a fixed finite group. Used for subgroups,
/// cosets and orbit bookkeeping. Comparison is lexicographic on the packed
/// words (low word first), which fixes the canonical forms used everywhere.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemSet {
    capacity: u16,
    words: Vec<u64>,
}

impl ElemSet {
    pub fn empty(capacity: usize) -> Self {
        ElemSet {
            capacity: capacity as u16,
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::empty(capacity);
        for i in 0..capacity {
            s.insert(i as Elem);
        }
        s
    }

    pub fn singleton(capacity: usize, e: Elem) -> Self {
        let mut s = Self::empty(capacity);
        s.insert(e);
        s
    }

    pub fn from_elems(capacity: usize, elems: impl IntoIterator<Item = Elem>) -> Self {
        let mut s = Self::empty(capacity);
        for e in elems {
            s.insert(e);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.capacity as usize
    }

    pub fn insert(&mut self, e: Elem) {
        debug_assert!((e as usize) < self.capacity as usize);
        self.words[e as usize / 64] |= 1u64 << (e % 64);
    }

    pub fn remove(&mut self, e: Elem) {
        self.words[e as usize / 64] &= !(1u64 << (e % 64));
    }

    pub fn contains(&self, e: Elem) -> bool {
        (self.words[e as usize / 64] >> (e % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        debug_assert_eq!(self.capacity, other.capacity);
        ElemSet {
            capacity: self.capacity,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &ElemSet) -> ElemSet {
        debug_assert_eq!(self.capacity, other.capacity);
        ElemSet {
            capacity: self.capacity,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.capacity).filter(|&e| self.contains(e))
    }

    /// Number of set members strictly below `e`.
    pub fn rank(&self, e: Elem) -> usize {
        let word = e as usize / 64;
        let mut count = 0;
        for w in &self.words[..word] {
            count += w.count_ones() as usize;
        }
        let mask = (1u64 << (e % 64)) - 1;
        count + (self.words[word] & mask).count_ones() as usize
    }

    pub fn min_elem(&self) -> Option<Elem> {
        self.iter().next()
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Finite group given by a full Cayley table over element indices
/// `0..order-1`, with the identity fixed at index 0.
pub struct FiniteGroup {
    order: usize,
    table: Vec<Elem>,
    inverse: Vec<Elem>,
    elem_orders: Vec<u32>,
    fingerprint: u64,
    name: String,
}

impl FiniteGroup {
    /// Validate and build a group from a Cayley table (`table[a][b] = a*b`).
    pub fn from_table(table: Vec<Vec<Elem>>, name: impl Into<String>) -> Result<Arc<Self>> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Parse("empty Cayley table".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &table {
            if row.len() != n {
                return Err(Error::Parse("ragged Cayley table".into()));
            }
            for &e in row {
                if e as usize >= n {
                    return Err(Error::Parse("table entry out of range".into()));
                }
                flat.push(e);
            }
        }
        // identity at index 0
        for a in 0..n {
            if flat[a] != a as Elem || flat[a * n] != a as Elem {
                return Err(Error::BadIdentity);
            }
        }
        // Latin square
        for a in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for b in 0..n {
                let r = flat[a * n + b] as usize;
                let c = flat[b * n + a] as usize;
                if seen_row[r] || seen_col[c] {
                    return Err(Error::NotLatinSquare);
                }
                seen_row[r] = true;
                seen_col[c] = true;
            }
        }
        // associativity
        for a in 0..n {
            for b in 0..n {
                let ab = flat[a * n + b] as usize;
                for c in 0..n {
                    let bc = flat[b * n + c] as usize;
                    if flat[ab * n + c] != flat[a * n + bc] {
                        return Err(Error::NonAssociativeTable);
                    }
                }
            }
        }
        Ok(Arc::new(Self::from_flat_unchecked(n, flat, name.into())))
    }

    // for tables coming from the constructions below
    fn from_flat_unchecked(n: usize, flat: Vec<Elem>, name: String) -> Self {
        let mut inverse = vec![0 as Elem; n];
        for a in 0..n {
            for b in 0..n {
                if flat[a * n + b] == 0 {
                    inverse[a] = b as Elem;
                    break;
                }
            }
        }
        let mut elem_orders = vec![0u32; n];
        for a in 0..n {
            let mut x = a as Elem;
            let mut k = 1;
            while x != 0 {
                x = flat[x as usize * n + a];
                k += 1;
            }
            elem_orders[a] = k;
        }
        let mut fingerprint: u64 = 0xcbf29ce484222325;
        for &e in &flat {
            fingerprint ^= e as u64;
            fingerprint = fingerprint.wrapping_mul(0x100000001b3);
        }
        FiniteGroup {
            order: n,
            table: flat,
            inverse,
            elem_orders,
            fingerprint,
            name,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inverse[a as usize]
    }

    pub fn conj(&self, g: Elem, x: Elem) -> Elem {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn elem_order(&self, a: Elem) -> u32 {
        self.elem_orders[a as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    pub fn all(&self) -> ElemSet {
        ElemSet::full(self.order)
    }

    pub fn exponent(&self) -> u64 {
        let mut e: u64 = 1;
        for a in 0..self.order {
            e = num_integer::lcm(e, self.elem_orders[a] as u64);
        }
        e
    }

    pub fn power(&self, a: Elem, k: u32) -> Elem {
        let mut acc = 0 as Elem;
        for _ in 0..k {
            acc = self.mul(acc, a);
        }
        acc
    }

    /// Subgroup generated by `gens`, as closure under the table.
    pub fn closure(&self, gens: &[Elem]) -> ElemSet {
        let mut set = ElemSet::singleton(self.order, 0);
        let mut list = vec![0 as Elem];
        let mut queue: Vec<Elem> = Vec::new();
        for &g in gens {
            if !set.contains(g) {
                set.insert(g);
                list.push(g);
                queue.push(g);
            }
        }
        while let Some(g) = queue.pop() {
            let mut i = 0;
            while i < list.len() {
                let x = list[i];
                for p in [self.mul(x, g), self.mul(g, x)] {
                    if !set.contains(p) {
                        set.insert(p);
                        list.push(p);
                        queue.push(p);
                    }
                }
                i += 1;
            }
        }
        set
    }

    pub fn is_subgroup(&self, s: &ElemSet) -> bool {
        if !s.contains(0) {
            return false;
        }
        for a in s.iter() {
            if !s.contains(self.inv(a)) {
                return false;
            }
            for b in s.iter() {
                if !s.contains(self.mul(a, b)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn conjugate_set(&self, g: Elem, s: &ElemSet) -> ElemSet {
        let mut out = ElemSet::empty(self.order);
        for x in s.iter() {
            out.insert(self.conj(g, x));
        }
        out
    }

    pub fn is_normal(&self, s: &ElemSet) -> bool {
        self.elements().all(|g| self.conjugate_set(g, s) == *s)
    }

    /// Commutator subgroup `[S, S]` of a subgroup `S`.
    pub fn commutator_subgroup(&self, s: &ElemSet) -> ElemSet {
        let members: Vec<Elem> = s.iter().collect();
        let mut gens = Vec::new();
        for &a in &members {
            for &b in &members {
                let c = self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)));
                if c != 0 {
                    gens.push(c);
                }
            }
        }
        self.closure(&gens)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<Elem>> = (0..self.order)
            .map(|a| self.table[a * self.order..(a + 1) * self.order].to_vec())
            .collect();
        serde_json::json!({ "order": self.order, "table": rows, "name": self.name })
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.fingerprint == other.fingerprint
            && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.order)
    }
}

/// Direct product with the fixed index pairing `(g, h) -> g*|H| + h`.
pub fn product(g: &Arc<FiniteGroup>, h: &Arc<FiniteGroup>) -> Arc<FiniteGroup> {
    let n = g.order() * h.order();
    let hn = h.order();
    let mut flat = vec![0 as Elem; n * n];
    for a in 0..n {
        let (ag, ah) = (a / hn, a % hn);
        for b in 0..n {
            let (bg, bh) = (b / hn, b % hn);
            let pg = g.mul(ag as Elem, bg as Elem) as usize;
            let ph = h.mul(ah as Elem, bh as Elem) as usize;
            flat[a * n + b] = (pg * hn + ph) as Elem;
        }
    }
    Arc::new(FiniteGroup::from_flat_unchecked(
        n,
        flat,
        format!("{}x{}", g.name(), h.name()),
    ))
}

pub fn pair_encode(h_order: usize, g: Elem, h: Elem) -> Elem {
    (g as usize * h_order + h as usize) as Elem
}

pub fn pair_decode(h_order: usize, e: Elem) -> (Elem, Elem) {
    (
        (e as usize / h_order) as Elem,
        (e as usize % h_order) as Elem,
    )
}

/// A subgroup extracted as a standalone group. `embed[i]` is the parent
/// index of the new element `i`; the identity stays at index 0 because
/// members are taken in increasing parent order.
pub struct SubgroupAsGroup {
    pub group: Arc<FiniteGroup>,
    pub embed: Vec<Elem>,
    pub restrict: Vec<Option<Elem>>,
}

pub fn subgroup_as_group(
    parent: &Arc<FiniteGroup>,
    members: &ElemSet,
    name: impl Into<String>,
) -> SubgroupAsGroup {
    debug_assert!(parent.is_subgroup(members));
    let embed: Vec<Elem> = members.iter().collect();
    let mut restrict = vec![None; parent.order()];
    for (i, &e) in embed.iter().enumerate() {
        restrict[e as usize] = Some(i as Elem);
    }
    let n = embed.len();
    let mut flat = vec![0 as Elem; n * n];
    for a in 0..n {
        for b in 0..n {
            let p = parent.mul(embed[a], embed[b]);
            flat[a * n + b] = restrict[p as usize].expect("subgroup not closed");
        }
    }
    SubgroupAsGroup {
        group: Arc::new(FiniteGroup::from_flat_unchecked(n, flat, name.into())),
        embed,
        restrict,
    }
}

/// Quotient by a normal subgroup. Cosets are represented by their minimal
/// element index and ordered by it, so the identity coset is index 0.
pub struct QuotientGroup {
    pub group: Arc<FiniteGroup>,
    /// parent element -> coset index
    pub projection: Vec<Elem>,
    /// coset index -> minimal parent representative
    pub reps: Vec<Elem>,
}

impl QuotientGroup {
    pub fn projection_hom(&self, parent: &Arc<FiniteGroup>) -> GroupHom {
        GroupHom::new_unchecked(parent.clone(), self.group.clone(), self.projection.clone())
    }
}

pub fn quotient(g: &Arc<FiniteGroup>, normal: &ElemSet) -> Result<QuotientGroup> {
    if !g.is_subgroup(normal) {
        return Err(Error::NotSubgroup);
    }
    if !g.is_normal(normal) {
        return Err(Error::NotNormal);
    }
    let n = g.order();
    let mut coset_of = vec![Elem::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n as Elem {
        if coset_of[x as usize] != Elem::MAX {
            continue;
        }
        let idx = reps.len() as Elem;
        // x is minimal in its coset because we sweep in increasing order
        for m in normal.iter() {
            coset_of[g.mul(x, m) as usize] = idx;
        }
        reps.push(x);
    }
    let q = reps.len();
    let mut flat = vec![0 as Elem; q * q];
    for a in 0..q {
        for b in 0..q {
            flat[a * q + b] = coset_of[g.mul(reps[a], reps[b]) as usize];
        }
    }
    let name = format!("{}/N{}", g.name(), normal.len());
    Ok(QuotientGroup {
        group: Arc::new(FiniteGroup::from_flat_unchecked(q, flat, name)),
        projection: coset_of,
        reps,
    })
}

/// `gUg^-1` for a subgroup `U`.
pub fn conjugate_subgroup(g: &FiniteGroup, by: Elem, u: &ElemSet) -> ElemSet {
    g.conjugate_set(by, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalog::build_group;

    // Oracle: all subgroups by subset enumeration (feasible for tiny groups).
    fn brute_force_subgroups(g: &FiniteGroup) -> Vec<ElemSet> {
        let n = g.order();
        assert!(n <= 16);
        let mut out = Vec::new();
        for mask in 0u32..(1 << (n - 1)) {
            let mut s = ElemSet::singleton(n, 0);
            for b in 0..n - 1 {
                if mask >> b & 1 == 1 {
                    s.insert((b + 1) as Elem);
                }
            }
            if n.is_multiple_of(s.len()) && g.is_subgroup(&s) {
                out.push(s);
            }
        }
        out
    }

    #[test]
    fn c2_table() {
        let g = build_group("C2").unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.mul(1, 1), 0);
    }

    #[test]
    fn s3_subgroups_brute_force() {
        let g = build_group("S3").unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(brute_force_subgroups(&g).len(), 6);
    }

    #[test]
    fn v4_is_exponent_two() {
        let g = build_group("C2xC2").unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.exponent(), 2);
    }

    #[test]
    fn quotient_orders() {
        let c4 = build_group("C4").unwrap();
        let n = c4.closure(&[2]);
        let q = quotient(&c4, &n).unwrap();
        assert_eq!(q.group.order(), 2);

        let s3 = build_group("S3").unwrap();
        let a3 = s3
            .elements()
            .find(|&e| s3.elem_order(e) == 3)
            .map(|e| s3.closure(&[e]))
            .unwrap();
        let q = quotient(&s3, &a3).unwrap();
        assert_eq!(q.group.order(), 2);
        // projection kernel is exactly A3
        let ker: Vec<_> = s3
            .elements()
            .filter(|&e| q.projection[e as usize] == 0)
            .collect();
        assert_eq!(ElemSet::from_elems(6, ker), a3);
    }

    #[test]
    fn quotient_rejects_non_normal() {
        let s3 = build_group("S3").unwrap();
        let c2 = s3
            .elements()
            .find(|&e| s3.elem_order(e) == 2)
            .map(|e| s3.closure(&[e]))
            .unwrap();
        assert!(matches!(quotient(&s3, &c2), Err(Error::NotNormal)));
    }

    #[test]
    fn conjugation_involution() {
        let g = build_group("D8").unwrap();
        for by in g.elements() {
            for e in g.elements() {
                let u = g.closure(&[e]);
                let back = conjugate_subgroup(&g, g.inv(by), &conjugate_subgroup(&g, by, &u));
                assert_eq!(back, u);
            }
        }
    }

    #[test]
    fn product_pairing() {
        let c2 = build_group("C2").unwrap();
        let c3 = build_group("C3").unwrap();
        let p = product(&c2, &c3);
        assert_eq!(p.order(), 6);
        let e = pair_encode(3, 1, 2);
        assert_eq!(pair_decode(3, e), (1, 2));
        assert_eq!(p.elem_order(e), 6);
    }

    #[test]
    fn elemset_rank_and_order() {
        let mut s = ElemSet::empty(70);
        for e in [0u16, 3, 64, 69] {
            s.insert(e);
        }
        assert_eq!(s.len(), 4);
        assert_eq!(s.rank(64), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 64, 69]);
    }
}
