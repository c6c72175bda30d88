//! Fibered bisets: `B^A(G,H)` realized as the fibered Burnside ring of
//! `G x H`, tensor-product composition, elementary bisets and their action,
//! stabilizer data, the canonical decomposition of a standard basis
//! element, and character extension across product subgroups.

use std::collections::HashMap;
use std::sync::Arc;

use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::fbring::{double_cosets, BurnsideRing, CharPair, RingElement};
use crate::fiber::{push_char_to_quotient, DualChar, FiberElem, FiberGroup, MonomialPair};
use crate::groups::{
    cyclic, pair_decode, pair_encode, product, quotient, subgroup_as_group, Elem, ElemSet,
    FiniteGroup, GroupHom, QuotientGroup, SubgroupAsGroup,
};

/// An element of `B^A(G, H) = B^A(G x H)`. The body always lives over the
/// full product with the pairing `(g, h) -> g*|H| + h`.
#[derive(Clone, PartialEq, Eq)]
pub struct BisetElement {
    left: Arc<FiniteGroup>,
    right: Arc<FiniteGroup>,
    body: RingElement,
}

impl BisetElement {
    pub fn zero(left: Arc<FiniteGroup>, right: Arc<FiniteGroup>, fiber: FiberGroup) -> Self {
        let p = product(&left, &right);
        let members = p.all();
        BisetElement {
            left,
            right,
            body: RingElement::zero(p, members, fiber),
        }
    }

    pub fn from_pair(
        left: Arc<FiniteGroup>,
        right: Arc<FiniteGroup>,
        fiber: FiberGroup,
        pair: MonomialPair,
    ) -> Self {
        let p = product(&left, &right);
        let members = p.all();
        BisetElement {
            left,
            right,
            body: RingElement::from_basis(p, members, fiber, pair),
        }
    }

    /// The identity morphism `[Delta(G), 1]`.
    pub fn identity(group: Arc<FiniteGroup>, fiber: FiberGroup) -> Self {
        let n = group.order();
        let mut diag = ElemSet::empty(n * n);
        for g in group.elements() {
            diag.insert(pair_encode(n, g, g));
        }
        Self::from_pair(group.clone(), group, fiber, MonomialPair::trivial(diag))
    }

    pub fn left(&self) -> &Arc<FiniteGroup> {
        &self.left
    }

    pub fn right(&self) -> &Arc<FiniteGroup> {
        &self.right
    }

    pub fn body(&self) -> &RingElement {
        &self.body
    }

    pub fn body_mut(&mut self) -> &mut RingElement {
        &mut self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    pub fn add(&self, other: &BisetElement) -> Result<BisetElement> {
        Ok(BisetElement {
            left: self.left.clone(),
            right: self.right.clone(),
            body: self.body.add(&other.body)?,
        })
    }

    pub fn scale_cyclotomic(&self, z: &Cyclotomic) -> BisetElement {
        BisetElement {
            left: self.left.clone(),
            right: self.right.clone(),
            body: self.body.scale_cyclotomic(z),
        }
    }

    /// Tensor-product composition `B^A(G,H) x B^A(H,K) -> B^A(G,K)`:
    /// a double-coset sum over the middle group with the character
    /// compatibility condition, producing star products.
    pub fn compose(&self, other: &BisetElement) -> Result<BisetElement> {
        if *self.right != *other.left {
            return Err(Error::GroupMismatch);
        }
        if self.body.fiber() != other.body.fiber() {
            return Err(Error::FiberMismatch);
        }
        let fiber = self.body.fiber().clone();
        let h = &self.right;
        let h_ord = h.order();
        let k_ord = other.right.order();
        let mut out = BisetElement::zero(self.left.clone(), other.right.clone(), fiber.clone());

        for (u_pair, c1) in self.body.coeffs() {
            let u_elems: Vec<Elem> = u_pair.subgroup.iter().collect();
            // p2(U) and k2(U) inside H
            let mut p2 = ElemSet::empty(h_ord);
            let mut k2 = ElemSet::empty(h_ord);
            for &e in &u_elems {
                let (g, hh) = pair_decode(h_ord, e);
                p2.insert(hh);
                if g == 0 {
                    k2.insert(hh);
                }
            }
            for (v_pair, c2) in other.body.coeffs() {
                let v_elems: Vec<Elem> = v_pair.subgroup.iter().collect();
                let mut p1 = ElemSet::empty(h_ord);
                let mut k1 = ElemSet::empty(h_ord);
                for &e in &v_elems {
                    let (hh, k) = pair_decode(k_ord, e);
                    p1.insert(hh);
                    if k == 0 {
                        k1.insert(hh);
                    }
                }
                let coeff = c1.mul(c2);
                't_loop: for t in double_cosets(h, &h.all(), &p2, &p1) {
                    // H_t = k2(U) meet t k1(V) t^-1; condition
                    // phi_2 = (t psi_1) on H_t
                    let k1t = h.conjugate_set(t, &k1);
                    let ht = k2.intersection(&k1t);
                    let tinv = h.inv(t);
                    for b in ht.iter() {
                        let phi2 = fiber.neg(u_pair.value_at(pair_encode(h_ord, 0, b)));
                        let psi1 = v_pair.value_at(pair_encode(k_ord, h.conj(tinv, b), 0));
                        if phi2 != psi1 {
                            continue 't_loop;
                        }
                    }
                    // star product U * (t,1)V with its character; the merge
                    // map must be single-valued, asserted per pair
                    let mut mid: HashMap<Elem, Vec<(Elem, FiberElem)>> = HashMap::new();
                    for &e in &v_elems {
                        let (hh, k) = pair_decode(k_ord, e);
                        let moved = h.conj(t, hh);
                        mid.entry(moved).or_default().push((k, v_pair.value_at(e)));
                    }
                    let mut star: HashMap<Elem, FiberElem> = HashMap::new();
                    for &e in &u_elems {
                        let (g, hh) = pair_decode(h_ord, e);
                        if let Some(list) = mid.get(&hh) {
                            let gval = u_pair.value_at(e);
                            for &(k, vval) in list {
                                let w = pair_encode(k_ord, g, k);
                                let val = fiber.add(gval, vval);
                                match star.entry(w) {
                                    std::collections::hash_map::Entry::Occupied(o) => {
                                        assert_eq!(
                                            *o.get(),
                                            val,
                                            "star character is not well-defined"
                                        );
                                    }
                                    std::collections::hash_map::Entry::Vacant(v) => {
                                        v.insert(val);
                                    }
                                }
                            }
                        }
                    }
                    let mut items: Vec<(Elem, FiberElem)> = star.into_iter().collect();
                    items.sort_unstable_by_key(|&(e, _)| e);
                    let mut subgroup = ElemSet::empty(self.left.order() * k_ord);
                    let mut values = Vec::with_capacity(items.len());
                    for (e, v) in items {
                        subgroup.insert(e);
                        values.push(v);
                    }
                    out.body_mut()
                        .add_term(MonomialPair { subgroup, values }, coeff.clone());
                }
            }
        }
        Ok(out)
    }

    /// Module action on `B^A(H)` through composition against `B^A(H, 1)`.
    pub fn act(&self, v: &RingElement) -> Result<RingElement> {
        if **v.group() != *self.right || *v.members() != self.right.all() {
            return Err(Error::GroupMismatch);
        }
        let one = cyclic(1);
        // (h, 0) -> h*1 + 0 = h: the embedding is the identity on indices
        let hp = product(&self.right, &one);
        let emb = BisetElement {
            left: self.right.clone(),
            right: one.clone(),
            body: v.transport(hp.clone(), hp.all(), |e| e),
        };
        let composed = self.compose(&emb)?;
        Ok(composed
            .body()
            .transport(self.left.clone(), self.left.all(), |e| e))
    }
}

impl std::fmt::Debug for BisetElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BisetElement({} <- {}): {:?}",
            self.left.name(),
            self.right.name(),
            self.body
        )
    }
}

/// The diagonal ring homomorphism `B^A(G) -> B^A(G, G)`,
/// `[U, phi] -> [Delta(U), Delta(phi)]`.
pub fn delta(v: &RingElement) -> BisetElement {
    let g = v.group().clone();
    let n = g.order();
    let p = product(&g, &g);
    let mut body = RingElement::zero(p.clone(), p.all(), v.fiber().clone());
    for (pair, c) in v.coeffs() {
        let mut subgroup = ElemSet::empty(n * n);
        let mut values = Vec::new();
        for u in pair.subgroup.iter() {
            subgroup.insert(pair_encode(n, u, u));
            values.push(pair.value_at(u));
        }
        body.add_term(MonomialPair { subgroup, values }, c.clone());
    }
    BisetElement {
        left: g.clone(),
        right: g,
        body,
    }
}

/// Projections and kernels of a subgroup of a product, the two boundary
/// characters, and the induced isomorphism `p2/k2 -> p1/k1`.
pub struct StabilizerData {
    pub p1: ElemSet,
    pub p2: ElemSet,
    pub k1: ElemSet,
    pub k2: ElemSet,
    /// `phi_1(a) = phi(a, 1)` on `k1`
    pub phi1: MonomialPair,
    /// `phi_2(b) = phi(1, b)^-1` on `k2`
    pub phi2: MonomialPair,
    pub p1_group: SubgroupAsGroup,
    pub p2_group: SubgroupAsGroup,
    pub q1: QuotientGroup,
    pub q2: QuotientGroup,
    /// `eta: p2/k2 -> p1/k1` induced by the subgroup
    pub eta: GroupHom,
}

/// Compute [`StabilizerData`] for `(U, phi) <= G x H`.
pub fn stabilizer_data(
    left: &Arc<FiniteGroup>,
    right: &Arc<FiniteGroup>,
    pair: &MonomialPair,
    fiber: &FiberGroup,
) -> StabilizerData {
    let h_ord = right.order();
    let mut p1 = ElemSet::empty(left.order());
    let mut p2 = ElemSet::empty(h_ord);
    let mut k1 = ElemSet::empty(left.order());
    let mut k2 = ElemSet::empty(h_ord);
    for e in pair.subgroup.iter() {
        let (g, h) = pair_decode(h_ord, e);
        p1.insert(g);
        p2.insert(h);
        if h == 0 {
            k1.insert(g);
        }
        if g == 0 {
            k2.insert(h);
        }
    }
    let phi1 = MonomialPair {
        subgroup: k1.clone(),
        values: k1
            .iter()
            .map(|a| pair.value_at(pair_encode(h_ord, a, 0)))
            .collect(),
    };
    let phi2 = MonomialPair {
        subgroup: k2.clone(),
        values: k2
            .iter()
            .map(|b| fiber.neg(pair.value_at(pair_encode(h_ord, 0, b))))
            .collect(),
    };
    let p1_group = subgroup_as_group(left, &p1, format!("p1({})", left.name()));
    let p2_group = subgroup_as_group(right, &p2, format!("p2({})", right.name()));
    let k1_in = restrict_set(&k1, &p1_group);
    let k2_in = restrict_set(&k2, &p2_group);
    let q1 = quotient(&p1_group.group, &k1_in).expect("k1 is normal in p1");
    let q2 = quotient(&p2_group.group, &k2_in).expect("k2 is normal in p2");
    // eta sends the coset of h to the coset of any g with (g,h) in U
    let mut images = vec![Elem::MAX; q2.group.order()];
    for e in pair.subgroup.iter() {
        let (g, h) = pair_decode(h_ord, e);
        let src = q2.projection[p2_group.restrict[h as usize].unwrap() as usize];
        let dst = q1.projection[p1_group.restrict[g as usize].unwrap() as usize];
        if images[src as usize] == Elem::MAX {
            images[src as usize] = dst;
        } else {
            debug_assert_eq!(images[src as usize], dst, "eta must be well-defined");
        }
    }
    let eta = GroupHom::new(q2.group.clone(), q1.group.clone(), images);
    StabilizerData {
        p1,
        p2,
        k1,
        k2,
        phi1,
        phi2,
        p1_group,
        p2_group,
        q1,
        q2,
        eta,
    }
}

fn restrict_set(set: &ElemSet, ctx: &SubgroupAsGroup) -> ElemSet {
    let mut out = ElemSet::empty(ctx.group.order());
    for e in set.iter() {
        out.insert(ctx.restrict[e as usize].expect("subset of the subgroup"));
    }
    out
}

/// The six elementary fibered bisets.
pub enum Elementary {
    /// `res^G_H` for `H <= G`
    Res {
        group: Arc<FiniteGroup>,
        sub: ElemSet,
    },
    /// `ind_H^G` for `H <= G`
    Ind {
        group: Arc<FiniteGroup>,
        sub: ElemSet,
    },
    /// `inf^G_{G/N}` for `N` normal in `G`
    Inf {
        group: Arc<FiniteGroup>,
        normal: ElemSet,
    },
    /// `def^G_{G/N}` for `N` normal in `G`
    Def {
        group: Arc<FiniteGroup>,
        normal: ElemSet,
    },
    /// `iso_f` along an isomorphism
    Iso { hom: GroupHom },
    /// `tw_lambda` for `lambda` a character of the full group
    Tw {
        group: Arc<FiniteGroup>,
        lambda: MonomialPair,
    },
}

impl Elementary {
    /// The standard-basis biset element realizing the operation.
    pub fn biset(&self, fiber: &FiberGroup) -> Result<BisetElement> {
        match self {
            Elementary::Res { group, sub } => {
                let hs = subgroup_as_group(group, sub, "H");
                let graph: Vec<(Elem, Elem)> = hs
                    .embed
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (i as Elem, e))
                    .collect();
                Ok(graph_biset(hs.group, group.clone(), fiber, &graph))
            }
            Elementary::Ind { group, sub } => {
                let hs = subgroup_as_group(group, sub, "H");
                let graph: Vec<(Elem, Elem)> = hs
                    .embed
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (e, i as Elem))
                    .collect();
                Ok(graph_biset(group.clone(), hs.group, fiber, &graph))
            }
            Elementary::Inf { group, normal } => {
                let q = quotient(group, normal)?;
                let graph: Vec<(Elem, Elem)> = group
                    .elements()
                    .map(|g| (g, q.projection[g as usize]))
                    .collect();
                Ok(graph_biset(group.clone(), q.group, fiber, &graph))
            }
            Elementary::Def { group, normal } => {
                let q = quotient(group, normal)?;
                let graph: Vec<(Elem, Elem)> = group
                    .elements()
                    .map(|g| (q.projection[g as usize], g))
                    .collect();
                Ok(graph_biset(q.group, group.clone(), fiber, &graph))
            }
            Elementary::Iso { hom } => {
                let graph: Vec<(Elem, Elem)> =
                    hom.source().elements().map(|g| (hom.apply(g), g)).collect();
                Ok(graph_biset(
                    hom.target().clone(),
                    hom.source().clone(),
                    fiber,
                    &graph,
                ))
            }
            Elementary::Tw { group, lambda } => {
                let n = group.order();
                let mut items: Vec<(Elem, FiberElem)> = group
                    .elements()
                    .map(|g| (pair_encode(n, g, g), lambda.value_at(g)))
                    .collect();
                items.sort_unstable_by_key(|&(e, _)| e);
                let mut subgroup = ElemSet::empty(n * n);
                let mut values = Vec::new();
                for (e, v) in items {
                    subgroup.insert(e);
                    values.push(v);
                }
                Ok(BisetElement::from_pair(
                    group.clone(),
                    group.clone(),
                    fiber.clone(),
                    MonomialPair { subgroup, values },
                ))
            }
        }
    }

    /// Closed-form action on ring elements; agrees with composing against
    /// [`Elementary::biset`].
    pub fn apply(&self, v: &RingElement) -> Result<RingElement> {
        match self {
            Elementary::Res { group, sub } => {
                if **v.group() != **group {
                    return Err(Error::GroupMismatch);
                }
                let hs = subgroup_as_group(group, sub, "H");
                let restricted = v.restrict_to(sub);
                Ok(restricted.transport(hs.group.clone(), hs.group.all(), |e| {
                    hs.restrict[e as usize].unwrap()
                }))
            }
            Elementary::Ind { group, sub } => {
                let hs = subgroup_as_group(group, sub, "H");
                if **v.group() != *hs.group {
                    return Err(Error::GroupMismatch);
                }
                Ok(v.transport(group.clone(), group.all(), |e| hs.embed[e as usize]))
            }
            Elementary::Inf { group, normal } => {
                let q = quotient(group, normal)?;
                if **v.group() != *q.group {
                    return Err(Error::GroupMismatch);
                }
                let mut out = RingElement::zero(group.clone(), group.all(), v.fiber().clone());
                for (pair, c) in v.coeffs() {
                    let mut subgroup = ElemSet::empty(group.order());
                    let mut values = Vec::new();
                    for g in group.elements() {
                        let img = q.projection[g as usize];
                        if pair.subgroup.contains(img) {
                            subgroup.insert(g);
                            values.push(pair.value_at(img));
                        }
                    }
                    out.add_term(MonomialPair { subgroup, values }, c.clone());
                }
                Ok(out)
            }
            Elementary::Def { group, normal } => {
                if **v.group() != **group {
                    return Err(Error::GroupMismatch);
                }
                let q = quotient(group, normal)?;
                let mut out = RingElement::zero(q.group.clone(), q.group.all(), v.fiber().clone());
                'term: for (pair, c) in v.coeffs() {
                    // [U, phi] survives iff U meet N <= ker(phi)
                    let mut image: HashMap<Elem, FiberElem> = HashMap::new();
                    for u in pair.subgroup.iter() {
                        let val = pair.value_at(u);
                        if normal.contains(u) && val.0 != 0 {
                            continue 'term;
                        }
                        let img = q.projection[u as usize];
                        match image.entry(img) {
                            std::collections::hash_map::Entry::Occupied(o) => {
                                if *o.get() != val {
                                    continue 'term;
                                }
                            }
                            std::collections::hash_map::Entry::Vacant(slot) => {
                                slot.insert(val);
                            }
                        }
                    }
                    let mut items: Vec<(Elem, FiberElem)> = image.into_iter().collect();
                    items.sort_unstable_by_key(|&(e, _)| e);
                    let mut subgroup = ElemSet::empty(q.group.order());
                    let mut values = Vec::new();
                    for (e, val) in items {
                        subgroup.insert(e);
                        values.push(val);
                    }
                    out.add_term(MonomialPair { subgroup, values }, c.clone());
                }
                Ok(out)
            }
            Elementary::Iso { hom } => {
                if **v.group() != **hom.source() {
                    return Err(Error::GroupMismatch);
                }
                Ok(v.transport(hom.target().clone(), hom.target().all(), |e| hom.apply(e)))
            }
            Elementary::Tw { group, lambda } => {
                if **v.group() != **group {
                    return Err(Error::GroupMismatch);
                }
                let mut out = RingElement::zero(group.clone(), group.all(), v.fiber().clone());
                for (pair, c) in v.coeffs() {
                    let twisted = pair.mul(&lambda.restrict(&pair.subgroup), v.fiber());
                    out.add_term(twisted, c.clone());
                }
                Ok(out)
            }
        }
    }
}

fn graph_biset(
    left: Arc<FiniteGroup>,
    right: Arc<FiniteGroup>,
    fiber: &FiberGroup,
    graph: &[(Elem, Elem)],
) -> BisetElement {
    let r_ord = right.order();
    let mut subgroup = ElemSet::empty(left.order() * r_ord);
    for &(a, b) in graph {
        subgroup.insert(pair_encode(r_ord, a, b));
    }
    BisetElement::from_pair(left, right, fiber.clone(), MonomialPair::trivial(subgroup))
}

/// The five-factor canonical decomposition of a standard basis element of
/// `B^A(G, H)`: induction, inflation, a middle element over
/// `(P/K) x (Q/L)` with both kernels killed, deflation, restriction.
pub struct Decomposition {
    pub ind: BisetElement,
    pub inf: BisetElement,
    pub middle: BisetElement,
    pub def: BisetElement,
    pub res: BisetElement,
}

impl Decomposition {
    pub fn compose_back(&self) -> Result<BisetElement> {
        self.ind
            .compose(&self.inf)?
            .compose(&self.middle)?
            .compose(&self.def)?
            .compose(&self.res)
    }
}

/// Decompose `[U, phi] <= G x H` with `P = p1(U)`, `Q = p2(U)`,
/// `K = ker(phi_1)`, `L = ker(phi_2)`.
pub fn canonical_decomposition(
    left: &Arc<FiniteGroup>,
    right: &Arc<FiniteGroup>,
    pair: &MonomialPair,
    fiber: &FiberGroup,
) -> Result<Decomposition> {
    let st = stabilizer_data(left, right, pair, fiber);
    let ker1: ElemSet = {
        let mut s = ElemSet::empty(left.order());
        for a in st.k1.iter() {
            if st.phi1.value_at(a).0 == 0 {
                s.insert(a);
            }
        }
        s
    };
    let ker2: ElemSet = {
        let mut s = ElemSet::empty(right.order());
        for b in st.k2.iter() {
            if st.phi2.value_at(b).0 == 0 {
                s.insert(b);
            }
        }
        s
    };
    let pg = subgroup_as_group(left, &st.p1, "P");
    let qg = subgroup_as_group(right, &st.p2, "Q");
    let k_in = restrict_set(&ker1, &pg);
    let l_in = restrict_set(&ker2, &qg);
    let pk = quotient(&pg.group, &k_in)?;
    let ql = quotient(&qg.group, &l_in)?;

    // middle element: image of (U, phi) in (P/K) x (Q/L)
    let ql_ord = ql.group.order();
    let h_ord = right.order();
    let mut image: HashMap<Elem, FiberElem> = HashMap::new();
    for e in pair.subgroup.iter() {
        let (g, h) = pair_decode(h_ord, e);
        let gp = pk.projection[pg.restrict[g as usize].unwrap() as usize];
        let hp = ql.projection[qg.restrict[h as usize].unwrap() as usize];
        let enc = pair_encode(ql_ord, gp, hp);
        let val = pair.value_at(e);
        match image.entry(enc) {
            std::collections::hash_map::Entry::Occupied(o) => {
                assert_eq!(*o.get(), val, "middle character must be well-defined");
            }
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(val);
            }
        }
    }
    let mut items: Vec<(Elem, FiberElem)> = image.into_iter().collect();
    items.sort_unstable_by_key(|&(e, _)| e);
    let mut subgroup = ElemSet::empty(pk.group.order() * ql_ord);
    let mut values = Vec::new();
    for (e, v) in items {
        subgroup.insert(e);
        values.push(v);
    }
    let middle = BisetElement::from_pair(
        pk.group.clone(),
        ql.group.clone(),
        fiber.clone(),
        MonomialPair { subgroup, values },
    );

    let ind = Elementary::Ind {
        group: left.clone(),
        sub: st.p1.clone(),
    }
    .biset(fiber)?;
    let inf = Elementary::Inf {
        group: pg.group.clone(),
        normal: k_in,
    }
    .biset(fiber)?;
    let def = Elementary::Def {
        group: qg.group.clone(),
        normal: l_in,
    }
    .biset(fiber)?;
    let res = Elementary::Res {
        group: right.clone(),
        sub: st.p2.clone(),
    }
    .biset(fiber)?;
    Ok(Decomposition {
        ind,
        inf,
        middle,
        def,
        res,
    })
}

/// For `(U, phi) <= G x H` with `p1(U) = G` and `p2(U) = H`, find
/// `(alpha, beta)` in `G* x H*` with `(alpha x beta)|_U = phi`, or report
/// that no extension exists. The witness is found by searching `alpha`
/// with `alpha|_k1 = phi_1` and gluing `beta` from `phi` and `alpha`.
pub fn extend_char(
    left: &Arc<FiniteGroup>,
    right: &Arc<FiniteGroup>,
    pair: &MonomialPair,
    fiber: &FiberGroup,
) -> Result<Option<(MonomialPair, MonomialPair)>> {
    let st = stabilizer_data(left, right, pair, fiber);
    if st.p1 != left.all() || st.p2 != right.all() {
        return Err(Error::Invalid(
            "character extension requires full projections".into(),
        ));
    }
    let h_ord = right.order();
    let u_elems: Vec<Elem> = pair.subgroup.iter().collect();
    for alpha in crate::fiber::enumerate_chars(left, &left.all(), fiber) {
        if st
            .phi1
            .subgroup
            .iter()
            .any(|a| alpha.value_at(a) != st.phi1.value_at(a))
        {
            continue;
        }
        // beta(h) = phi(g, h) - alpha(g) for any (g, h) in U
        let mut beta_vals: Vec<Option<FiberElem>> = vec![None; h_ord];
        for &e in &u_elems {
            let (g, h) = pair_decode(h_ord, e);
            let val = fiber.add(pair.value_at(e), fiber.neg(alpha.value_at(g)));
            match beta_vals[h as usize] {
                None => beta_vals[h as usize] = Some(val),
                Some(existing) => debug_assert_eq!(existing, val),
            }
        }
        let beta = MonomialPair {
            subgroup: right.all(),
            values: beta_vals
                .into_iter()
                .map(|v| v.expect("p2(U) = H"))
                .collect(),
        };
        debug_assert!(beta.is_homomorphism(right, fiber));
        // verify (alpha x beta)|_U = phi
        let ok = u_elems.iter().all(|&e| {
            let (g, h) = pair_decode(h_ord, e);
            fiber.add(alpha.value_at(g), beta.value_at(h)) == pair.value_at(e)
        });
        assert!(ok, "glued extension must restrict to phi");
        return Ok(Some((alpha, beta)));
    }
    Ok(None)
}

/// Closed-form right-hand sides for elementary operations applied to
/// primitive idempotents.
pub mod idempotent_action {
    use super::*;
    use crate::cyclo::rat;

    /// `res^G_H(e_(K,Phi)) = sum of e_(L,Psi) over H-orbit reps fused into
    /// the G-orbit of (K, Phi)`.
    pub fn restrict(ring: &BurnsideRing, subring: &BurnsideRing, pair: &CharPair) -> RingElement {
        let target = ring.xorbit_index(&pair.subgroup, &pair.chi);
        let mut out = subring.zero();
        for rep in subring.xorbit_reps() {
            if ring.xorbit_index(&rep.subgroup, &rep.chi) == target {
                out = out.add(&subring.idempotent(rep)).expect("same ring");
            }
        }
        out
    }

    /// `ind_H^G(e_(K,Psi)) = |N_G(K,Psi)| / |N_H(K,Psi)| e_(K,Psi)`.
    /// Returns the scaled idempotent of the big ring.
    pub fn induce(ring: &BurnsideRing, subring: &BurnsideRing, pair: &CharPair) -> RingElement {
        let ng = ring.pair_normalizer_order(pair) as i64;
        let nh = subring.pair_normalizer_order(pair) as i64;
        let canonical = ring.xorbit_reps()[ring.xorbit_index(&pair.subgroup, &pair.chi)].clone();
        ring.idempotent(&canonical).scale(&rat(ng, nh))
    }

    /// `inf^G_{G/N}(e_(U/N,Psi)) = sum of e_(H,Phi) over G-orbit reps with
    /// (HN/N, Phi_N) conjugate to (U/N, Psi)`.
    pub fn inflate(
        ring: &BurnsideRing,
        q_ring: &BurnsideRing,
        projection: &[Elem],
        q_pair: &CharPair,
    ) -> RingElement {
        let target = q_ring.xorbit_index(&q_pair.subgroup, &q_pair.chi);
        let mut out = ring.zero();
        for rep in ring.xorbit_reps() {
            let source_dual = ring.dual_of_set(&rep.subgroup);
            let mut image = ElemSet::empty(q_ring.group().order());
            for e in rep.subgroup.iter() {
                image.insert(projection[e as usize]);
            }
            let target_dual = q_ring.dual_of_set(&image);
            let pushed = push_char_to_quotient(&rep.chi, &source_dual, &target_dual, projection);
            if q_ring.xorbit_index(&image, &pushed) == target {
                out = out.add(&ring.idempotent(rep)).expect("same ring");
            }
        }
        out
    }

    /// `iso_f(e_(H,Phi)) = e_(f(H), Phi o (f|_H)*)`: the relabeled pair.
    pub fn transport_pair(
        ring: &BurnsideRing,
        target_ring: &BurnsideRing,
        hom: &GroupHom,
        pair: &CharPair,
    ) -> CharPair {
        let mut image = ElemSet::empty(target_ring.group().order());
        for e in pair.subgroup.iter() {
            image.insert(hom.apply(e));
        }
        let src_dual = ring.dual_of_set(&pair.subgroup);
        let dst_dual = target_ring.dual_of_set(&image);
        // (Phi o f*)(psi) = Phi(psi o f)
        let values = dst_dual
            .chars()
            .iter()
            .map(|psi| {
                let pulled = MonomialPair {
                    subgroup: pair.subgroup.clone(),
                    values: pair
                        .subgroup
                        .iter()
                        .map(|e| psi.value_at(hom.apply(e)))
                        .collect(),
                };
                pair.chi
                    .eval(src_dual.index_of(&pulled).expect("character"))
            })
            .collect();
        CharPair {
            subgroup: image,
            chi: DualChar { values },
        }
    }

    /// `tw_alpha(e_(H,Phi)) = Phi(alpha|_H) e_(H,Phi)`: the scalar factor.
    pub fn twist_scalar(ring: &BurnsideRing, alpha: &MonomialPair, pair: &CharPair) -> Cyclotomic {
        let dual = ring.dual_of_set(&pair.subgroup);
        let restricted = alpha.restrict(&pair.subgroup);
        let idx = dual.index_of(&restricted).expect("character");
        Cyclotomic::root_of_unity(pair.chi.eval(idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::rat_int;
    use crate::fbring::BurnsideRing;
    use crate::groups::build_group;

    fn c2_ring() -> Arc<BurnsideRing> {
        BurnsideRing::new(build_group("C2").unwrap(), FiberGroup::cyclic(2), 64).unwrap()
    }

    #[test]
    fn identity_composes_to_itself() {
        for spec in ["C2", "S3", "C2xC2"] {
            let g = build_group(spec).unwrap();
            let id = BisetElement::identity(g.clone(), FiberGroup::cyclic(2));
            assert_eq!(id.compose(&id).unwrap(), id);
        }
    }

    #[test]
    fn twists_compose_multiplicatively() {
        let g = build_group("C2xC2").unwrap();
        let fiber = FiberGroup::cyclic(2);
        let chars = crate::fiber::enumerate_chars(&g, &g.all(), &fiber);
        for a in &chars {
            for b in &chars {
                let ta = Elementary::Tw {
                    group: g.clone(),
                    lambda: a.clone(),
                }
                .biset(&fiber)
                .unwrap();
                let tb = Elementary::Tw {
                    group: g.clone(),
                    lambda: b.clone(),
                }
                .biset(&fiber)
                .unwrap();
                let tab = Elementary::Tw {
                    group: g.clone(),
                    lambda: a.mul(b, &fiber),
                }
                .biset(&fiber)
                .unwrap();
                assert_eq!(ta.compose(&tb).unwrap(), tab);
            }
        }
    }

    #[test]
    fn res_then_ind_over_trivial_subgroup() {
        // res^C2_1 . ind^C2_1 = 2 [1x1, 1] in B^A(1,1)
        let g = build_group("C2").unwrap();
        let fiber = FiberGroup::cyclic(2);
        let one = g.closure(&[]);
        let res = Elementary::Res {
            group: g.clone(),
            sub: one.clone(),
        }
        .biset(&fiber)
        .unwrap();
        let ind = Elementary::Ind {
            group: g.clone(),
            sub: one,
        }
        .biset(&fiber)
        .unwrap();
        let prod = res.compose(&ind).unwrap();
        let trivial = BisetElement::identity(cyclic(1), fiber);
        assert_eq!(prod, trivial.scale_cyclotomic(&Cyclotomic::from_int(2)));
        let _ = rat_int(0);
    }

    #[test]
    fn stabilizer_examples() {
        let c2 = build_group("C2").unwrap();
        let fiber = FiberGroup::cyclic(2);
        let p = product(&c2, &c2);
        // diagonal
        let mut diag = ElemSet::empty(4);
        diag.insert(pair_encode(2, 0, 0));
        diag.insert(pair_encode(2, 1, 1));
        let st = stabilizer_data(&c2, &c2, &MonomialPair::trivial(diag), &fiber);
        assert_eq!(st.p1.len(), 2);
        assert_eq!(st.p2.len(), 2);
        assert_eq!(st.k1.len(), 1);
        assert_eq!(st.k2.len(), 1);
        assert_eq!(st.eta.images(), &[0, 1]);
        // C2 x 1
        let mut left_line = ElemSet::empty(4);
        left_line.insert(pair_encode(2, 0, 0));
        left_line.insert(pair_encode(2, 1, 0));
        let st = stabilizer_data(&c2, &c2, &MonomialPair::trivial(left_line), &fiber);
        assert_eq!(st.p1.len(), 2);
        assert_eq!(st.k1.len(), 2);
        assert_eq!(st.p2.len(), 1);
        assert_eq!(st.k2.len(), 1);
        // full product, trivial character
        let st = stabilizer_data(&c2, &c2, &MonomialPair::trivial(p.all()), &fiber);
        assert_eq!(st.k1.len(), 2);
        assert_eq!(st.k2.len(), 2);
        assert!(st.phi1.is_trivial());
        assert!(st.phi2.is_trivial());
    }

    #[test]
    fn act_matches_closed_forms_for_all_kinds() {
        let fiber = FiberGroup::cyclic(2);
        for spec in ["C2", "C4", "S3", "C2xC2"] {
            let g = build_group(spec).unwrap();
            let ring = BurnsideRing::new(g.clone(), fiber.clone(), 64).unwrap();
            let lat = ring.lattice().clone();
            let mut ops: Vec<Elementary> = Vec::new();
            for i in 0..lat.len() {
                ops.push(Elementary::Res {
                    group: g.clone(),
                    sub: lat.subgroup(i).clone(),
                });
            }
            for i in lat.normal_subgroup_indices() {
                ops.push(Elementary::Inf {
                    group: g.clone(),
                    normal: lat.subgroup(i).clone(),
                });
                ops.push(Elementary::Def {
                    group: g.clone(),
                    normal: lat.subgroup(i).clone(),
                });
            }
            for lambda in crate::fiber::enumerate_chars(&g, &g.all(), &fiber) {
                ops.push(Elementary::Tw {
                    group: g.clone(),
                    lambda,
                });
            }
            ops.push(Elementary::Iso {
                hom: crate::groups::GroupHom::identity(&g),
            });
            for op in &ops {
                let biset = op.biset(&fiber).unwrap();
                // source basis depends on the kind
                let source_ring =
                    BurnsideRing::new(biset.right().clone(), fiber.clone(), 64).unwrap();
                for b in source_ring.basis() {
                    let x = source_ring.basis_element(b.clone());
                    let via_compose = biset.act(&x).unwrap();
                    let via_closed = op.apply(&x).unwrap();
                    assert_eq!(via_compose, via_closed, "{spec}");
                }
            }
            // ind goes from subgroup rings
            for i in 0..lat.len() {
                let sub = lat.subgroup(i).clone();
                let op = Elementary::Ind {
                    group: g.clone(),
                    sub: sub.clone(),
                };
                let biset = op.biset(&fiber).unwrap();
                let source_ring =
                    BurnsideRing::new(biset.right().clone(), fiber.clone(), 64).unwrap();
                for b in source_ring.basis() {
                    let x = source_ring.basis_element(b.clone());
                    assert_eq!(biset.act(&x).unwrap(), op.apply(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn twist_moves_characters() {
        let r = c2_ring();
        let g = r.group().clone();
        let dual = r.dual_of_set(r.members());
        let chi = dual.chars().iter().find(|c| !c.is_trivial()).unwrap();
        let tw = Elementary::Tw {
            group: g.clone(),
            lambda: chi.clone(),
        };
        let one = r.one();
        let twisted = tw.apply(&one).unwrap();
        assert_eq!(twisted, r.basis_element(chi.clone()));
    }

    #[test]
    fn deflation_kills_nontrivial_kernel_characters() {
        // def^C2_1([C2,chi]) = 0 since C2 is not in ker chi
        let r = c2_ring();
        let g = r.group().clone();
        let dual = r.dual_of_set(r.members());
        let chi = dual.chars().iter().find(|c| !c.is_trivial()).unwrap();
        let def = Elementary::Def {
            group: g.clone(),
            normal: g.all(),
        };
        let out = def.apply(&r.basis_element(chi.clone())).unwrap();
        assert!(out.is_zero());
        // but [C2,1] survives
        let out = def.apply(&r.one()).unwrap();
        assert!(!out.is_zero());
    }

    #[test]
    fn inf_then_def_is_identity_on_inflated_elements() {
        let g = build_group("C4").unwrap();
        let fiber = FiberGroup::cyclic(2);
        let n = g.closure(&[2]);
        let inf = Elementary::Inf {
            group: g.clone(),
            normal: n.clone(),
        };
        let def = Elementary::Def {
            group: g.clone(),
            normal: n.clone(),
        };
        let q = quotient(&g, &n).unwrap();
        let q_ring = BurnsideRing::new(q.group.clone(), fiber, 64).unwrap();
        for b in q_ring.basis() {
            let x = q_ring.basis_element(b.clone());
            let back = def.apply(&inf.apply(&x).unwrap()).unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn delta_is_multiplicative_and_acts_as_multiplication() {
        let r = BurnsideRing::new(build_group("S3").unwrap(), FiberGroup::cyclic(2), 64).unwrap();
        let basis = r.basis().to_vec();
        for a in basis.iter().take(3) {
            for b in basis.iter().take(3) {
                let x = r.basis_element(a.clone());
                let y = r.basis_element(b.clone());
                let lhs = delta(&x.mul(&y).unwrap());
                let rhs = delta(&x).compose(&delta(&y)).unwrap();
                assert_eq!(lhs, rhs);
                // Delta(x) . v = x * v
                let acted = delta(&x).act(&y).unwrap();
                assert_eq!(acted, x.mul(&y).unwrap());
            }
        }
    }

    #[test]
    fn canonical_decomposition_round_trip_small() {
        let fiber = FiberGroup::cyclic(2);
        for (l, rspec) in [("C2", "C2"), ("C4", "C2"), ("S3", "C2")] {
            let lg = build_group(l).unwrap();
            let rg = build_group(rspec).unwrap();
            let p = product(&lg, &rg);
            let pring = BurnsideRing::new(p.clone(), fiber.clone(), 64).unwrap();
            for b in pring.basis() {
                let dec = canonical_decomposition(&lg, &rg, b, &fiber).unwrap();
                let back = dec.compose_back().unwrap();
                let orig =
                    BisetElement::from_pair(lg.clone(), rg.clone(), fiber.clone(), b.clone());
                assert_eq!(back, orig, "{l} x {rspec} at {:?}", b);
            }
        }
    }

    #[test]
    fn extend_char_examples() {
        let c2 = build_group("C2").unwrap();
        let fiber = FiberGroup::cyclic(2);
        // trivial character extends trivially
        let mut diag = ElemSet::empty(4);
        diag.insert(0);
        diag.insert(3);
        let (alpha, beta) = extend_char(&c2, &c2, &MonomialPair::trivial(diag.clone()), &fiber)
            .unwrap()
            .unwrap();
        assert!(alpha.is_trivial() && beta.is_trivial());

        // diagonal chi on Delta(C2): some valid witness
        let pair = MonomialPair {
            subgroup: diag,
            values: vec![FiberElem(0), FiberElem(1)],
        };
        let (alpha, beta) = extend_char(&c2, &c2, &pair, &fiber).unwrap().unwrap();
        assert_eq!(fiber.add(alpha.value_at(1), beta.value_at(1)), FiberElem(1));

        // U = <(1,1),(2,0)> <= C4 x C4 with phi(2,0) = 1: here k1(U) = <2>
        // carries a nontrivial character, but every alpha in Hom(C4, C2)
        // kills 2, so no extension exists
        let c4 = build_group("C4").unwrap();
        let p = product(&c4, &c4);
        let u = p.closure(&[pair_encode(4, 1, 1), pair_encode(4, 2, 0)]);
        assert_eq!(u.len(), 8);
        let nonext = MonomialPair {
            subgroup: u,
            values: [0u32, 1, 0, 1, 1, 0, 1, 0]
                .iter()
                .map(|&v| FiberElem(v))
                .collect(),
        };
        assert!(nonext.is_homomorphism(&p, &fiber));
        assert_eq!(nonext.value_at(pair_encode(4, 2, 0)), FiberElem(1));
        let st = stabilizer_data(&c4, &c4, &nonext, &fiber);
        assert_eq!(st.k1, c4.closure(&[2]));
        assert!(!st.phi1.is_trivial());
        let ext = extend_char(&c4, &c4, &nonext, &fiber).unwrap();
        assert!(
            ext.is_none(),
            "order-2 char of C4 restricts trivially to C2"
        );

        // same subgroup, phi(2,0) = 0 instead: now the extension exists
        let ext_ok = MonomialPair {
            subgroup: p.closure(&[pair_encode(4, 1, 1), pair_encode(4, 2, 0)]),
            values: [0u32, 0, 1, 1, 0, 0, 1, 1]
                .iter()
                .map(|&v| FiberElem(v))
                .collect(),
        };
        assert!(ext_ok.is_homomorphism(&p, &fiber));
        let ext = extend_char(&c4, &c4, &ext_ok, &fiber).unwrap();
        assert!(ext.is_some());
    }

    #[test]
    fn iso_biset_is_a_graph_subgroup() {
        // f: C6 -> C2xC3 gives the order-6 graph subgroup of the product
        let c6 = build_group("C6").unwrap();
        let p = build_group("C2xC3").unwrap();
        let f = crate::groups::find_isomorphism(&c6, &p).unwrap();
        let iso = Elementary::Iso { hom: f.clone() };
        let biset = iso.biset(&FiberGroup::cyclic(2)).unwrap();
        let (pair, _) = biset.body().coeffs().iter().next().unwrap();
        assert_eq!(pair.subgroup.len(), 6);
        assert!(pair.is_trivial());
        // acting is transport along f
        let ring = BurnsideRing::new(c6.clone(), FiberGroup::cyclic(2), 64).unwrap();
        for b in ring.basis() {
            let x = ring.basis_element(b.clone());
            assert_eq!(biset.act(&x).unwrap(), iso.apply(&x).unwrap());
        }
    }

    #[test]
    fn compose_associativity_small() {
        let fiber = FiberGroup::cyclic(2);
        let c2 = build_group("C2").unwrap();
        let c4 = build_group("C4").unwrap();
        // x in B(C2, C4), y in B(C4, C2), z in B(C2, C2)
        let p_xy = product(&c2, &c4);
        let rx = BurnsideRing::new(p_xy.clone(), fiber.clone(), 64).unwrap();
        let p_yz = product(&c4, &c2);
        let ry = BurnsideRing::new(p_yz.clone(), fiber.clone(), 64).unwrap();
        let p_zz = product(&c2, &c2);
        let rz = BurnsideRing::new(p_zz.clone(), fiber.clone(), 64).unwrap();
        for bx in rx.basis().iter().step_by(3) {
            for by in ry.basis().iter().step_by(3) {
                for bz in rz.basis().iter().step_by(3) {
                    let x =
                        BisetElement::from_pair(c2.clone(), c4.clone(), fiber.clone(), bx.clone());
                    let y =
                        BisetElement::from_pair(c4.clone(), c2.clone(), fiber.clone(), by.clone());
                    let z =
                        BisetElement::from_pair(c2.clone(), c2.clone(), fiber.clone(), bz.clone());
                    let lhs = x.compose(&y).unwrap().compose(&z).unwrap();
                    let rhs = x.compose(&y.compose(&z).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}
