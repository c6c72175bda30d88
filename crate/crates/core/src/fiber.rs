//! The fiber group `A`, homomorphisms into it (monomial pairs), dual groups
//! `G* = Hom(G, A)`, characters of dual groups, perp subgroups, and the
//! translation between characters of `G*` and cosets of `O(G)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::cyclo::FracMod1;
use crate::error::{Error, Result};
use crate::groups::{quotient, Elem, ElemSet, FiniteGroup};

/// Finite abelian fiber group, stored as invariant factors
/// `d1 | d2 | ... | dk` (empty list = trivial group).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FiberGroup {
    factors: Vec<u32>,
}

/// Element of the fiber group, packed in mixed radix: the element with
/// residues `(r1, ..., rk)` is stored as `r1 + r2*d1 + r3*d1*d2 + ...`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FiberElem(pub u32);

impl FiberGroup {
    pub fn trivial() -> Self {
        FiberGroup { factors: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FiberGroup {
                factors: vec![n as u32],
            }
        }
    }

    /// Normalize an arbitrary list of cyclic orders into invariant factors.
    pub fn from_cyclic_orders(orders: &[u32]) -> Self {
        let mut by_prime: HashMap<u32, Vec<u32>> = HashMap::new();
        for &n in orders {
            let mut m = n;
            let mut p = 2;
            while p * p <= m {
                if m % p == 0 {
                    let mut q = 1;
                    while m % p == 0 {
                        m /= p;
                        q *= p;
                    }
                    by_prime.entry(p).or_default().push(q);
                }
                p += 1;
            }
            if m > 1 {
                by_prime.entry(m).or_default().push(m);
            }
        }
        let mut rows: Vec<Vec<u32>> = by_prime
            .into_values()
            .map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                v
            })
            .collect();
        rows.sort();
        let depth = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut factors = Vec::new();
        for j in 0..depth {
            let mut d = 1u32;
            for row in &rows {
                if let Some(&q) = row.get(j) {
                    d *= q;
                }
            }
            factors.push(d);
        }
        factors.reverse(); // ascending divisibility chain
        FiberGroup { factors }
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|&d| d as u64).product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().map_or(1, |&d| d as u64)
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn zero(&self) -> FiberElem {
        FiberElem(0)
    }

    pub fn unpack(&self, a: FiberElem) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.factors.len());
        let mut x = a.0;
        for &d in &self.factors {
            v.push(x % d);
            x /= d;
        }
        v
    }

    pub fn pack(&self, residues: &[u32]) -> FiberElem {
        let mut x = 0u32;
        for (i, &d) in self.factors.iter().enumerate().rev() {
            x = x * d + residues[i] % d;
        }
        FiberElem(x)
    }

    pub fn add(&self, a: FiberElem, b: FiberElem) -> FiberElem {
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut base = 1u32;
        for &d in &self.factors {
            out += ((x % d + y % d) % d) * base;
            x /= d;
            y /= d;
            base *= d;
        }
        FiberElem(out)
    }

    pub fn neg(&self, a: FiberElem) -> FiberElem {
        let mut x = a.0;
        let mut out = 0u32;
        let mut base = 1u32;
        for &d in &self.factors {
            let r = x % d;
            out += (if r == 0 { 0 } else { d - r }) * base;
            x /= d;
            base *= d;
        }
        FiberElem(out)
    }

    pub fn scale(&self, k: u32, a: FiberElem) -> FiberElem {
        let mut x = a.0;
        let mut out = 0u32;
        let mut base = 1u32;
        for &d in &self.factors {
            out += ((x % d) as u64 * k as u64 % d as u64) as u32 * base;
            x /= d;
            base *= d;
        }
        FiberElem(out)
    }

    pub fn elem_order(&self, a: FiberElem) -> u32 {
        let mut x = a.0;
        let mut ord = 1u64;
        for &d in &self.factors {
            let r = x % d;
            if r != 0 {
                let g = num_integer::gcd(r, d);
                ord = num_integer::lcm(ord, (d / g) as u64);
            }
            x /= d;
        }
        ord as u32
    }

    /// All elements `a` with `n*a = 0`, in packed order.
    pub fn torsion_elements(&self, n: u32) -> Vec<FiberElem> {
        let mut out: Vec<Vec<u32>> = vec![vec![]];
        for &d in &self.factors {
            let g = num_integer::gcd(d, n);
            let step = d / g;
            let mut next = Vec::new();
            for v in &out {
                for k in 0..g {
                    let mut w = v.clone();
                    w.push(k * step);
                    next.push(w);
                }
            }
            out = next;
        }
        let mut elems: Vec<FiberElem> = out.iter().map(|v| self.pack(v)).collect();
        elems.sort_unstable();
        elems
    }

    pub fn elements(&self) -> Vec<FiberElem> {
        (0..self.order() as u32).map(FiberElem).collect()
    }

    /// Embed a fiber element into Q/Z. Only defined when `A` is cyclic
    /// (finite subgroups of a field's unit group are cyclic).
    pub fn embed_frac(&self, a: FiberElem) -> Result<FracMod1> {
        match self.factors.len() {
            0 => Ok(FracMod1::ZERO),
            1 => Ok(FracMod1::new(a.0 as u64, self.factors[0] as u64)),
            _ => Err(Error::Invalid(
                "fiber group is not cyclic; it does not embed into a field".into(),
            )),
        }
    }

    pub fn spec_string(&self) -> String {
        if self.factors.is_empty() {
            "1".to_string()
        } else {
            self.factors
                .iter()
                .map(|d| format!("C{d}"))
                .collect::<Vec<_>>()
                .join("x")
        }
    }
}

/// Fiber specification as parsed from the CLI: either a concrete finite
/// group or "all roots of unity", which resolves per ambient group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiberSpec {
    Finite(FiberGroup),
    AllRootsOfUnity,
}

impl FiberSpec {
    pub fn parse(s: &str) -> Result<FiberSpec> {
        let s = s.trim();
        if s == "mu" {
            return Ok(FiberSpec::AllRootsOfUnity);
        }
        if s == "1" {
            return Ok(FiberSpec::Finite(FiberGroup::trivial()));
        }
        let mut orders = Vec::new();
        for part in s.split('x') {
            let n: u32 = part
                .strip_prefix('C')
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad fiber spec '{s}'")))?;
            orders.push(n);
        }
        Ok(FiberSpec::Finite(FiberGroup::from_cyclic_orders(&orders)))
    }

    /// Resolve against an ambient group: `mu` becomes the cyclic group of
    /// order `exp(G^ab)`, which carries every homomorphism from subgroups
    /// of `G` into the full group of roots of unity.
    pub fn resolve(&self, group: &FiniteGroup) -> FiberGroup {
        match self {
            FiberSpec::Finite(f) => f.clone(),
            FiberSpec::AllRootsOfUnity => FiberGroup::cyclic(abelianization_exponent(group)),
        }
    }
}

/// Exponent of `G/[G,G]`.
pub fn abelianization_exponent(group: &FiniteGroup) -> u64 {
    let all = group.all();
    let derived = group.commutator_subgroup(&all);
    let cosets = coset_structure(group, &all, &derived);
    let mut e = 1u64;
    for c in 0..cosets.reps.len() {
        let mut x = c;
        let mut k = 1u64;
        while x != 0 {
            x = cosets.mul(x, c);
            k += 1;
        }
        e = num_integer::lcm(e, k);
    }
    e
}

/// A monomial pair `(U, phi)`: a subgroup together with a homomorphism
/// `phi: U -> A`. Values are stored densely in increasing member order, so
/// comparison of `(subgroup, values)` is the canonical-form order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MonomialPair {
    pub subgroup: ElemSet,
    pub values: Vec<FiberElem>,
}

impl MonomialPair {
    pub fn trivial(subgroup: ElemSet) -> Self {
        let values = vec![FiberElem(0); subgroup.len()];
        MonomialPair { subgroup, values }
    }

    pub fn value_at(&self, e: Elem) -> FiberElem {
        debug_assert!(self.subgroup.contains(e));
        self.values[self.subgroup.rank(e)]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| v.0 == 0)
    }

    pub fn restrict(&self, k: &ElemSet) -> MonomialPair {
        debug_assert!(k.is_subset(&self.subgroup));
        let values = k.iter().map(|e| self.value_at(e)).collect();
        MonomialPair {
            subgroup: k.clone(),
            values,
        }
    }

    /// `g . (U, phi) = (gUg^-1, x -> phi(g^-1 x g))`.
    pub fn conj(&self, group: &FiniteGroup, g: Elem) -> MonomialPair {
        let mut pairs: Vec<(Elem, FiberElem)> = self
            .subgroup
            .iter()
            .map(|u| (group.conj(g, u), self.value_at(u)))
            .collect();
        pairs.sort_unstable_by_key(|&(e, _)| e);
        let mut subgroup = ElemSet::empty(self.subgroup.capacity());
        let mut values = Vec::with_capacity(pairs.len());
        for (e, v) in pairs {
            subgroup.insert(e);
            values.push(v);
        }
        MonomialPair { subgroup, values }
    }

    /// Pointwise product of two characters on the same subgroup.
    pub fn mul(&self, other: &MonomialPair, fiber: &FiberGroup) -> MonomialPair {
        debug_assert_eq!(self.subgroup, other.subgroup);
        MonomialPair {
            subgroup: self.subgroup.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| fiber.add(a, b))
                .collect(),
        }
    }

    pub fn inverse(&self, fiber: &FiberGroup) -> MonomialPair {
        MonomialPair {
            subgroup: self.subgroup.clone(),
            values: self.values.iter().map(|&a| fiber.neg(a)).collect(),
        }
    }

    /// Check multiplicativity against the ambient table.
    pub fn is_homomorphism(&self, group: &FiniteGroup, fiber: &FiberGroup) -> bool {
        for a in self.subgroup.iter() {
            for b in self.subgroup.iter() {
                let p = group.mul(a, b);
                if !self.subgroup.contains(p) {
                    return false;
                }
                if self.value_at(p) != fiber.add(self.value_at(a), self.value_at(b)) {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// abelian decompositions

struct CosetStructure {
    reps: Vec<Elem>,
    coset_of: Vec<u16>,
    table: Vec<Vec<usize>>,
}

impl CosetStructure {
    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }
}

fn coset_structure(group: &FiniteGroup, domain: &ElemSet, normal: &ElemSet) -> CosetStructure {
    let mut coset_of = vec![u16::MAX; group.order()];
    let mut reps: Vec<Elem> = Vec::new();
    for x in domain.iter() {
        if coset_of[x as usize] != u16::MAX {
            continue;
        }
        let idx = reps.len() as u16;
        for m in normal.iter() {
            coset_of[group.mul(x, m) as usize] = idx;
        }
        reps.push(x);
    }
    let q = reps.len();
    let mut table = vec![vec![0usize; q]; q];
    for a in 0..q {
        for b in 0..q {
            table[a][b] = coset_of[group.mul(reps[a], reps[b]) as usize] as usize;
        }
    }
    CosetStructure {
        reps,
        coset_of,
        table,
    }
}

/// Direct-product decomposition of an abelian group given by index-level
/// multiplication (identity at index 0): returns `(generator, order)` pairs
/// with orders forming an ascending divisibility chain.
pub fn abelian_basis(n: usize, mul: &dyn Fn(usize, usize) -> usize) -> Vec<(usize, u32)> {
    if n == 1 {
        return vec![];
    }
    let order_of = |x: usize| -> u32 {
        let mut k = 1;
        let mut y = x;
        while y != 0 {
            y = mul(y, x);
            k += 1;
        }
        k
    };
    let orders: Vec<u32> = (0..n).map(order_of).collect();
    let mut primes: Vec<u32> = Vec::new();
    let mut m = n as u32;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            primes.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        primes.push(m);
    }

    let mut per_prime: Vec<Vec<(usize, u32)>> = Vec::new();
    for &p in &primes {
        let members: Vec<usize> = (0..n).filter(|&x| is_p_power(orders[x], p)).collect();
        per_prime.push(basis_of_p_group(&members, mul, &orders));
    }
    // combine across primes: pair up the largest factors of each prime
    let depth = per_prime.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut combined: Vec<(usize, u32)> = Vec::new();
    for j in 0..depth {
        let mut gen = 0usize;
        let mut ord = 1u32;
        for base in &per_prime {
            if let Some(&(g, o)) = base.get(j) {
                gen = mul(gen, g);
                ord *= o;
            }
        }
        combined.push((gen, ord));
    }
    combined.reverse(); // ascending divisibility chain
    debug_assert_eq!(
        combined.iter().map(|&(_, o)| o as usize).product::<usize>(),
        n
    );
    combined
}

fn is_p_power(mut x: u32, p: u32) -> bool {
    while x.is_multiple_of(p) {
        x /= p;
    }
    x == 1
}

// Basis of an abelian p-group, orders descending. Standard recursive lift:
// pick b of maximal order, take a basis of the quotient by <b>, and correct
// each lift by a power of b so its order matches its order in the quotient.
fn basis_of_p_group(
    members: &[usize],
    mul: &dyn Fn(usize, usize) -> usize,
    orders: &[u32],
) -> Vec<(usize, u32)> {
    if members.len() == 1 {
        return vec![];
    }
    let &b = members
        .iter()
        .max_by_key(|&&x| (orders[x], std::cmp::Reverse(x)))
        .unwrap();
    let ord_b = orders[b];
    let mut pow = vec![0usize; ord_b as usize];
    for k in 1..ord_b as usize {
        pow[k] = mul(pow[k - 1], b);
    }
    let mut dlog: HashMap<usize, u32> = HashMap::new();
    for (k, &x) in pow.iter().enumerate() {
        dlog.insert(x, k as u32);
    }
    let mut coset_of: HashMap<usize, usize> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    for &x in members {
        if coset_of.contains_key(&x) {
            continue;
        }
        let idx = reps.len();
        for &bk in &pow {
            coset_of.insert(mul(x, bk), idx);
        }
        reps.push(x);
    }
    let inv_in = |x: usize| -> usize {
        let o = orders[x];
        let mut acc = 0usize;
        for _ in 0..o.saturating_sub(1) {
            acc = mul(acc, x);
        }
        acc
    };
    let qmul = |a: usize, c: usize| -> usize { coset_of[&mul(reps[a], reps[c])] };
    let qorders: Vec<u32> = (0..reps.len())
        .map(|c| {
            let mut k = 1;
            let mut y = c;
            while y != 0 {
                y = qmul(y, c);
                k += 1;
            }
            k
        })
        .collect();
    let sub = basis_of_p_group(&(0..reps.len()).collect::<Vec<_>>(), &qmul, &qorders);
    let mut out = vec![(b, ord_b)];
    for (c, f) in sub {
        let g = reps[c];
        let mut gf = 0usize;
        for _ in 0..f {
            gf = mul(gf, g);
        }
        let t = dlog[&gf];
        debug_assert_eq!(t % f, 0);
        // g' = g * b^(-t/f) has exact order f and the same image in the quotient
        let corr = inv_in(pow[(t / f) as usize]);
        out.push((mul(g, corr), f));
    }
    out
}

// ---------------------------------------------------------------------------
// dual groups

/// `U* = Hom(U, A)` for a subgroup `U` of an ambient group, with every
/// character stored as a full value map.
pub struct DualGroup {
    ambient: Arc<FiniteGroup>,
    domain: ElemSet,
    fiber: FiberGroup,
    chars: Vec<MonomialPair>,
    index: HashMap<Vec<FiberElem>, usize>,
    decomp: OnceLock<DualDecomp>,
}

/// Direct decomposition of the dual group itself (generators are indices
/// into `chars`, orders an ascending divisibility chain) plus the exponent
/// tuple of every character.
pub struct DualDecomp {
    pub gens: Vec<usize>,
    pub orders: Vec<u32>,
    pub exps: Vec<Vec<u32>>,
}

/// Enumerate `Hom(U, A)` through the abelianization of `U` by choosing
/// generator images of matching torsion.
pub fn enumerate_chars(
    ambient: &Arc<FiniteGroup>,
    domain: &ElemSet,
    fiber: &FiberGroup,
) -> Vec<MonomialPair> {
    let derived = ambient.commutator_subgroup(domain);
    let cosets = coset_structure(ambient, domain, &derived);
    let q = cosets.reps.len();
    let mul = |a: usize, b: usize| cosets.mul(a, b);
    let basis = abelian_basis(q, &mul);

    // exponent tuple of every coset with respect to the basis
    let mut exps: Vec<Option<Vec<u32>>> = vec![None; q];
    fn fill(
        pos: usize,
        acc: usize,
        tuple: &mut Vec<u32>,
        basis: &[(usize, u32)],
        mul: &dyn Fn(usize, usize) -> usize,
        exps: &mut [Option<Vec<u32>>],
    ) {
        if pos == basis.len() {
            if exps[acc].is_none() {
                exps[acc] = Some(tuple.clone());
            }
            return;
        }
        let (g, o) = basis[pos];
        let mut cur = acc;
        for k in 0..o {
            tuple[pos] = k;
            fill(pos + 1, cur, tuple, basis, mul, exps);
            cur = mul(cur, g);
        }
        tuple[pos] = 0;
    }
    let mut tuple = vec![0u32; basis.len()];
    fill(0, 0, &mut tuple, &basis, &mul, &mut exps);
    let exps: Vec<Vec<u32>> = exps.into_iter().map(|e| e.expect("basis spans")).collect();

    let torsion: Vec<Vec<FiberElem>> = basis
        .iter()
        .map(|&(_, o)| fiber.torsion_elements(o))
        .collect();
    let mut choices: Vec<Vec<FiberElem>> = vec![vec![]];
    for t in &torsion {
        let mut next = Vec::with_capacity(choices.len() * t.len());
        for c in &choices {
            for &a in t {
                let mut c2 = c.clone();
                c2.push(a);
                next.push(c2);
            }
        }
        choices = next;
    }

    let member_cosets: Vec<usize> = domain
        .iter()
        .map(|e| cosets.coset_of[e as usize] as usize)
        .collect();
    let mut out: Vec<MonomialPair> = choices
        .into_iter()
        .map(|images| {
            let values: Vec<FiberElem> = member_cosets
                .iter()
                .map(|&c| {
                    let mut v = FiberElem(0);
                    for (i, &e) in exps[c].iter().enumerate() {
                        v = fiber.add(v, fiber.scale(e, images[i]));
                    }
                    v
                })
                .collect();
            MonomialPair {
                subgroup: domain.clone(),
                values,
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl DualGroup {
    pub fn new(ambient: Arc<FiniteGroup>, domain: ElemSet, fiber: FiberGroup) -> Arc<Self> {
        let chars = enumerate_chars(&ambient, &domain, &fiber);
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, c)| (c.values.clone(), i))
            .collect();
        Arc::new(DualGroup {
            ambient,
            domain,
            fiber,
            chars,
            index,
            decomp: OnceLock::new(),
        })
    }

    pub fn ambient(&self) -> &Arc<FiniteGroup> {
        &self.ambient
    }

    pub fn domain(&self) -> &ElemSet {
        &self.domain
    }

    pub fn fiber(&self) -> &FiberGroup {
        &self.fiber
    }

    pub fn order(&self) -> usize {
        self.chars.len()
    }

    pub fn char_at(&self, i: usize) -> &MonomialPair {
        &self.chars[i]
    }

    pub fn chars(&self) -> &[MonomialPair] {
        &self.chars
    }

    pub fn index_of(&self, phi: &MonomialPair) -> Option<usize> {
        debug_assert_eq!(phi.subgroup, self.domain);
        self.index.get(&phi.values).copied()
    }

    pub fn trivial_index(&self) -> usize {
        self.index_of(&MonomialPair::trivial(self.domain.clone()))
            .expect("trivial character always present")
    }

    pub fn mul_idx(&self, i: usize, j: usize) -> usize {
        let p = self.chars[i].mul(&self.chars[j], &self.fiber);
        self.index[&p.values]
    }

    pub fn inv_idx(&self, i: usize) -> usize {
        let p = self.chars[i].inverse(&self.fiber);
        self.index[&p.values]
    }

    /// `K^perp`: indices of characters trivial on `K`.
    pub fn perp(&self, k: &ElemSet) -> Vec<usize> {
        debug_assert!(k.is_subset(&self.domain));
        self.chars
            .iter()
            .enumerate()
            .filter(|(_, c)| k.iter().all(|e| c.value_at(e).0 == 0))
            .map(|(i, _)| i)
            .collect()
    }

    /// Permutation `j -> index of (x -> phi_j(g x g^-1))`; requires `g` to
    /// normalize the domain. This is the index action underlying
    /// `(g Phi)(phi) = Phi(g^-1 phi)`.
    pub fn conj_perm(&self, g: Elem) -> Vec<usize> {
        let ginv = self.ambient.inv(g);
        self.chars
            .iter()
            .map(|c| {
                let moved = c.conj(&self.ambient, ginv);
                debug_assert_eq!(moved.subgroup, self.domain);
                self.index[&moved.values]
            })
            .collect()
    }

    /// Decomposition of the dual group as an abstract abelian group.
    pub fn decomp(&self) -> &DualDecomp {
        self.decomp.get_or_init(|| {
            let n = self.order();
            let mul = |a: usize, b: usize| self.mul_idx(a, b);
            let basis = abelian_basis(n, &mul);
            let gens: Vec<usize> = basis.iter().map(|&(g, _)| g).collect();
            let orders: Vec<u32> = basis.iter().map(|&(_, o)| o).collect();
            let mut exps: Vec<Option<Vec<u32>>> = vec![None; n];
            let mut frontier = vec![(0usize, vec![0u32; gens.len()])];
            exps[0] = Some(vec![0; gens.len()]);
            while let Some((cur, tup)) = frontier.pop() {
                for (i, (&g, &o)) in gens.iter().zip(&orders).enumerate() {
                    if tup[i] + 1 < o {
                        let nxt = self.mul_idx(cur, g);
                        if exps[nxt].is_none() {
                            let mut t2 = tup.clone();
                            t2[i] += 1;
                            exps[nxt] = Some(t2.clone());
                            frontier.push((nxt, t2));
                        }
                    }
                }
            }
            let exps = exps
                .into_iter()
                .map(|e| e.expect("generators span the dual"))
                .collect();
            DualDecomp { gens, orders, exps }
        })
    }

    /// All characters of the dual group with values in Q/Z, sorted.
    pub fn k_chars(&self) -> Vec<DualChar> {
        let d = self.decomp();
        let mut images: Vec<Vec<FracMod1>> = vec![vec![]];
        for &o in &d.orders {
            let mut next = Vec::with_capacity(images.len() * o as usize);
            for img in &images {
                for a in 0..o {
                    let mut i2 = img.clone();
                    i2.push(FracMod1::new(a as u64, o as u64));
                    next.push(i2);
                }
            }
            images = next;
        }
        let mut out: Vec<DualChar> = images
            .into_iter()
            .map(|img| {
                let values: Vec<FracMod1> = (0..self.order())
                    .map(|j| {
                        let mut acc = FracMod1::ZERO;
                        for (i, &e) in d.exps[j].iter().enumerate() {
                            acc = acc.add(&img[i].scale(e as u64));
                        }
                        acc
                    })
                    .collect();
                DualChar { values }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        debug_assert_eq!(out.len(), self.order());
        out
    }
}

impl std::fmt::Debug for DualGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DualGroup(|U|={}, |U*|={})",
            self.domain.len(),
            self.chars.len()
        )
    }
}

/// A character of a dual group, valued in roots of unity encoded as
/// fractions mod 1. `values[j]` is the value on the j-th character of the
/// owning [`DualGroup`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct DualChar {
    pub values: Vec<FracMod1>,
}

impl DualChar {
    pub fn trivial(dual: &DualGroup) -> Self {
        DualChar {
            values: vec![FracMod1::ZERO; dual.order()],
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn eval(&self, idx: usize) -> FracMod1 {
        self.values[idx]
    }

    pub fn is_trivial_on(&self, indices: &[usize]) -> bool {
        indices.iter().all(|&i| self.values[i].is_zero())
    }

    /// Precompose with an index map of the underlying dual group.
    pub fn permute(&self, perm: &[usize]) -> DualChar {
        DualChar {
            values: perm.iter().map(|&j| self.values[j]).collect(),
        }
    }

    /// Value multiset, invariant under relabelings of the dual group.
    pub fn fingerprint(&self) -> Vec<FracMod1> {
        let mut v = self.values.clone();
        v.sort_unstable();
        v
    }
}

/// `Phi_N`: given `Phi` on `H*` (inside `G`) and `N` normal in `G`, the
/// character of `(HN/N)*` defined by `psi -> Phi(h -> psi(hN))`.
pub fn push_char_to_quotient(
    phi: &DualChar,
    source_dual: &DualGroup,
    target_dual: &DualGroup,
    projection: &[Elem],
) -> DualChar {
    let h = source_dual.domain();
    let values = target_dual
        .chars()
        .iter()
        .map(|psi| {
            let vals: Vec<FiberElem> = h
                .iter()
                .map(|e| psi.value_at(projection[e as usize]))
                .collect();
            let pulled = MonomialPair {
                subgroup: h.clone(),
                values: vals,
            };
            let idx = source_dual
                .index_of(&pulled)
                .expect("pullback of a character is a character");
            phi.eval(idx)
        })
        .collect();
    DualChar { values }
}

/// `O(G)`: intersection of the kernels of all homomorphisms `G -> A`.
pub fn o_subgroup(dual: &DualGroup) -> ElemSet {
    let mut out = ElemSet::empty(dual.ambient().order());
    for e in dual.domain().iter() {
        if dual.chars().iter().all(|c| c.value_at(e).0 == 0) {
            out.insert(e);
        }
    }
    out
}

/// The character `eps_g` of `G*` with `eps_g(phi) = phi(g)`, re-expressed
/// in Q/Z through the cyclic structure of `A`. Requires a cyclic fiber.
pub fn zeta_char(dual: &DualGroup, g: Elem) -> Result<DualChar> {
    let values = dual
        .chars()
        .iter()
        .map(|phi| dual.fiber().embed_frac(phi.value_at(g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DualChar { values })
}

/// The bijection `G/O(G) <-> Hom(G*, K^x)` as (coset representative,
/// character) pairs; bijectivity is checked.
pub fn zeta_iso(dual: &Arc<DualGroup>) -> Result<Vec<(Elem, DualChar)>> {
    let o = o_subgroup(dual);
    let g = dual.ambient();
    let mut seen: Vec<bool> = vec![false; g.order()];
    let mut out = Vec::new();
    let mut chars_seen: std::collections::HashSet<Vec<FracMod1>> = Default::default();
    for x in dual.domain().iter() {
        if seen[x as usize] {
            continue;
        }
        for m in o.iter() {
            seen[g.mul(x, m) as usize] = true;
        }
        let eps = zeta_char(dual, x)?;
        if !chars_seen.insert(eps.values.clone()) {
            return Err(Error::Invalid("zeta map failed to be injective".into()));
        }
        out.push((x, eps));
    }
    let expected: std::collections::HashSet<Vec<FracMod1>> =
        dual.k_chars().into_iter().map(|c| c.values).collect();
    if chars_seen != expected {
        return Err(Error::Invalid("zeta map failed to be surjective".into()));
    }
    Ok(out)
}

/// Quotient data needed for `Phi_N` computations: `(HN/N)*` inside `G/N`.
pub struct QuotientDual {
    pub quotient: crate::groups::QuotientGroup,
    pub dual: Arc<DualGroup>,
    /// image of the source subgroup in the quotient (the domain of `dual`)
    pub image: ElemSet,
}

pub fn quotient_dual(
    group: &Arc<FiniteGroup>,
    h: &ElemSet,
    n: &ElemSet,
    fiber: &FiberGroup,
) -> Result<QuotientDual> {
    let q = quotient(group, n)?;
    let mut image = ElemSet::empty(q.group.order());
    for e in h.iter() {
        image.insert(q.projection[e as usize]);
    }
    let dual = DualGroup::new(q.group.clone(), image.clone(), fiber.clone());
    Ok(QuotientDual {
        quotient: q,
        dual,
        image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;

    // Oracle: count homomorphisms G -> A by backtracking over images of all
    // elements in index order, pruning on partial products.
    fn brute_force_hom_count(g: &FiniteGroup, fiber: &FiberGroup) -> usize {
        fn rec(
            g: &FiniteGroup,
            fiber: &FiberGroup,
            images: &mut Vec<FiberElem>,
            count: &mut usize,
        ) {
            let i = images.len();
            if i == g.order() {
                *count += 1;
                return;
            }
            'cand: for a in fiber.elements() {
                images.push(a);
                for x in 0..=i as Elem {
                    for y in 0..=i as Elem {
                        let p = g.mul(x, y);
                        if (p as usize) <= i {
                            let expect = fiber.add(images[x as usize], images[y as usize]);
                            if images[p as usize] != expect {
                                images.pop();
                                continue 'cand;
                            }
                        }
                    }
                }
                rec(g, fiber, images, count);
                images.pop();
            }
        }
        let mut count = 0;
        rec(g, fiber, &mut vec![], &mut count);
        count
    }

    fn dual_of(spec: &str, fiber: FiberGroup) -> Arc<DualGroup> {
        let g = build_group(spec).unwrap();
        let all = g.all();
        DualGroup::new(g, all, fiber)
    }

    #[test]
    fn invariant_factor_normalization() {
        assert_eq!(FiberGroup::from_cyclic_orders(&[2, 3]).factors(), &[6]);
        assert_eq!(FiberGroup::from_cyclic_orders(&[2, 4]).factors(), &[2, 4]);
        assert_eq!(FiberGroup::from_cyclic_orders(&[6, 4]).factors(), &[2, 12]);
        assert_eq!(
            FiberGroup::from_cyclic_orders(&[1]).factors(),
            &[] as &[u32]
        );
    }

    #[test]
    fn fiber_spec_parsing() {
        assert_eq!(
            FiberSpec::parse("1").unwrap(),
            FiberSpec::Finite(FiberGroup::trivial())
        );
        assert_eq!(
            FiberSpec::parse("C6").unwrap(),
            FiberSpec::Finite(FiberGroup::cyclic(6))
        );
        assert!(matches!(
            FiberSpec::parse("mu").unwrap(),
            FiberSpec::AllRootsOfUnity
        ));
        assert!(FiberSpec::parse("X9").is_err());
    }

    #[test]
    fn mu_resolution() {
        let s3 = build_group("S3").unwrap();
        let a4 = build_group("A4").unwrap();
        let c8 = build_group("C8").unwrap();
        let spec = FiberSpec::AllRootsOfUnity;
        assert_eq!(spec.resolve(&s3), FiberGroup::cyclic(2));
        assert_eq!(spec.resolve(&a4), FiberGroup::cyclic(3));
        assert_eq!(spec.resolve(&c8), FiberGroup::cyclic(8));
    }

    #[test]
    fn dual_sizes() {
        assert_eq!(dual_of("C2", FiberGroup::cyclic(2)).order(), 2);
        assert_eq!(dual_of("S3", FiberGroup::cyclic(2)).order(), 2);
        assert_eq!(dual_of("C3", FiberGroup::cyclic(2)).order(), 1);
        assert_eq!(dual_of("C2xC2", FiberGroup::cyclic(2)).order(), 4);
        // Q8 abelianizes to C2xC2, so Hom(Q8, C4) = Hom(C2xC2, C2)
        assert_eq!(dual_of("Q8", FiberGroup::cyclic(4)).order(), 4);
    }

    #[test]
    fn dual_sizes_match_brute_force() {
        for spec in ["C1", "C2", "C4", "C6", "S3", "C2xC2", "D8", "Q8"] {
            let g = build_group(spec).unwrap();
            for fiber in [
                FiberGroup::trivial(),
                FiberGroup::cyclic(2),
                FiberGroup::cyclic(6),
                FiberGroup::from_cyclic_orders(&[2, 4]),
            ] {
                let dual = DualGroup::new(g.clone(), g.all(), fiber.clone());
                assert_eq!(
                    dual.order(),
                    brute_force_hom_count(&g, &fiber),
                    "{spec} vs {:?}",
                    fiber
                );
                for c in dual.chars() {
                    assert!(c.is_homomorphism(&g, &fiber));
                }
            }
        }
    }

    #[test]
    fn restriction_examples() {
        // the nontrivial character of C4 into C2 restricts trivially to C2
        let c4 = build_group("C4").unwrap();
        let dual = DualGroup::new(c4.clone(), c4.all(), FiberGroup::cyclic(2));
        assert_eq!(dual.order(), 2);
        let chi = dual.chars().iter().find(|c| !c.is_trivial()).unwrap();
        let c2 = c4.closure(&[2]);
        assert!(chi.restrict(&c2).is_trivial());
        let one = c4.closure(&[]);
        assert!(chi.restrict(&one).is_trivial());
    }

    #[test]
    fn conjugation_fixes_chars_of_abelian_and_full_groups() {
        let v4 = build_group("C2xC2").unwrap();
        let dual = DualGroup::new(v4.clone(), v4.all(), FiberGroup::cyclic(2));
        for c in dual.chars() {
            for g in v4.elements() {
                assert_eq!(&c.conj(&v4, g), c);
            }
        }
        // chars of the full group are conjugation-invariant even for
        // nonabelian G, since A is abelian
        let s3 = build_group("S3").unwrap();
        let dual = DualGroup::new(s3.clone(), s3.all(), FiberGroup::cyclic(6));
        for c in dual.chars() {
            for g in s3.elements() {
                assert_eq!(&c.conj(&s3, g), c);
            }
        }
    }

    #[test]
    fn perp_examples() {
        let v4 = build_group("C2xC2").unwrap();
        let dual = DualGroup::new(v4.clone(), v4.all(), FiberGroup::cyclic(2));
        assert_eq!(dual.perp(&v4.all()).len(), 1);
        assert_eq!(dual.perp(&v4.closure(&[])).len(), 4);
        let k = v4.closure(&[1]);
        assert_eq!(dual.perp(&k).len(), 2);
    }

    #[test]
    fn perp_is_order_reversing() {
        let d8 = build_group("D8").unwrap();
        let dual = DualGroup::new(d8.clone(), d8.all(), FiberGroup::cyclic(4));
        let lat = crate::groups::SubgroupLattice::build(d8.clone(), 48).unwrap();
        for i in 0..lat.len() {
            for j in 0..lat.len() {
                if lat.leq(i, j) {
                    let pi = dual.perp(lat.subgroup(i));
                    let pj = dual.perp(lat.subgroup(j));
                    assert!(pj.iter().all(|x| pi.contains(x)));
                }
            }
        }
        // |K^perp| * |image of restriction to K| = |G*|
        for i in 0..lat.len() {
            let k = lat.subgroup(i);
            let perp = dual.perp(k).len();
            let image: std::collections::HashSet<Vec<FiberElem>> =
                dual.chars().iter().map(|c| c.restrict(k).values).collect();
            assert_eq!(perp * image.len(), dual.order());
        }
    }

    #[test]
    fn abelian_basis_of_duals() {
        let g = build_group("C2xC4").unwrap();
        let dual = DualGroup::new(g.clone(), g.all(), FiberGroup::from_cyclic_orders(&[2, 4]));
        // Hom(C2, C2xC4) has 4 elements, Hom(C4, C2xC4) has 8
        assert_eq!(dual.order(), 32);
        let d = dual.decomp();
        assert_eq!(d.orders.iter().map(|&o| o as usize).product::<usize>(), 32);
        for w in d.orders.windows(2) {
            assert_eq!(w[1] % w[0], 0, "ascending divisibility chain");
        }
        assert_eq!(dual.k_chars().len(), 32);
    }

    #[test]
    fn push_char_through_trivial_and_full_quotients() {
        let c2 = build_group("C2").unwrap();
        let dual = DualGroup::new(c2.clone(), c2.all(), FiberGroup::cyclic(2));
        // N = G: target dual is trivial
        let qd = quotient_dual(&c2, &c2.all(), &c2.all(), &FiberGroup::cyclic(2)).unwrap();
        for phi in dual.k_chars() {
            let pushed = push_char_to_quotient(&phi, &dual, &qd.dual, &qd.quotient.projection);
            assert!(pushed.is_trivial());
        }
        // N = 1: transported along the identity
        let one = c2.closure(&[]);
        let qd = quotient_dual(&c2, &c2.all(), &one, &FiberGroup::cyclic(2)).unwrap();
        assert_eq!(qd.dual.order(), dual.order());
        for phi in dual.k_chars() {
            let pushed = push_char_to_quotient(&phi, &dual, &qd.dual, &qd.quotient.projection);
            assert_eq!(phi.fingerprint(), pushed.fingerprint());
        }
    }

    #[test]
    fn o_subgroup_examples() {
        let c2 = build_group("C2").unwrap();
        let dual = DualGroup::new(c2.clone(), c2.all(), FiberGroup::cyclic(2));
        assert_eq!(o_subgroup(&dual).len(), 1);

        let c4 = build_group("C4").unwrap();
        let dual = DualGroup::new(c4.clone(), c4.all(), FiberGroup::cyclic(2));
        assert_eq!(o_subgroup(&dual), c4.closure(&[2]));

        let s3 = build_group("S3").unwrap();
        let dual = DualGroup::new(s3.clone(), s3.all(), FiberGroup::trivial());
        assert_eq!(o_subgroup(&dual).len(), 6);
    }

    #[test]
    fn zeta_iso_properties() {
        for (gspec, fiber) in [
            ("C2", FiberGroup::cyclic(2)),
            ("C4", FiberGroup::cyclic(2)),
            ("C6", FiberGroup::cyclic(6)),
            ("S3", FiberGroup::cyclic(2)),
            ("D8", FiberGroup::cyclic(4)),
        ] {
            let g = build_group(gspec).unwrap();
            let dual = DualGroup::new(g.clone(), g.all(), fiber.clone());
            let iso = zeta_iso(&dual).unwrap();
            let o = o_subgroup(&dual);
            assert_eq!(iso.len() * o.len(), g.order());
            // multiplicativity: eps_g * eps_h = eps_gh
            for &(x, ref ex) in &iso {
                for &(y, ref ey) in &iso {
                    let exy = zeta_char(&dual, g.mul(x, y)).unwrap();
                    let prod: Vec<FracMod1> = ex
                        .values
                        .iter()
                        .zip(&ey.values)
                        .map(|(a, b)| a.add(b))
                        .collect();
                    assert_eq!(prod, exy.values);
                }
            }
            // eps_g restricted to K^perp is trivial iff g in K O(G)
            let lat = crate::groups::SubgroupLattice::build(g.clone(), 48).unwrap();
            for i in 0..lat.len() {
                let k = lat.subgroup(i);
                let perp = dual.perp(k);
                let ko: ElemSet = {
                    let gens: Vec<Elem> = k.iter().chain(o.iter()).collect();
                    g.closure(&gens)
                };
                for x in g.elements() {
                    let eps = zeta_char(&dual, x).unwrap();
                    assert_eq!(eps.is_trivial_on(&perp), ko.contains(x));
                }
            }
        }
    }

    #[test]
    fn o_subgroup_respects_quotients() {
        // O(G/N) = O(G)N/N
        let g = build_group("C4xC2").unwrap();
        let fiber = FiberGroup::cyclic(2);
        let dual = DualGroup::new(g.clone(), g.all(), fiber.clone());
        let o = o_subgroup(&dual);
        let lat = crate::groups::SubgroupLattice::build(g.clone(), 48).unwrap();
        for i in lat.normal_subgroup_indices() {
            let n = lat.subgroup(i);
            let qd = quotient_dual(&g, &g.all(), n, &fiber).unwrap();
            let oq = o_subgroup(&qd.dual);
            let mut on_image = ElemSet::empty(qd.quotient.group.order());
            for e in o.iter() {
                on_image.insert(qd.quotient.projection[e as usize]);
            }
            assert_eq!(oq, on_image, "N of size {}", n.len());
        }
    }

    #[test]
    fn torsion_elements_count() {
        let f = FiberGroup::from_cyclic_orders(&[2, 4]);
        assert_eq!(f.torsion_elements(2).len(), 4);
        assert_eq!(f.torsion_elements(4).len(), 8);
        assert_eq!(f.torsion_elements(3).len(), 1);
        let c6 = FiberGroup::cyclic(6);
        assert_eq!(c6.torsion_elements(2).len(), 2);
        assert_eq!(c6.torsion_elements(3).len(), 3);
    }
}
