//! Deflation constants `m^N_(G,Phi)`, `B^A`-pair detection, isomorphism
//! and the order relation on pairs, minimal-pair computation, the
//! cross-formula through product quotients, and evaluation of the
//! subfunctors generated by primitive idempotents.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;

use crate::bisets::{BisetElement, Elementary};
use crate::cyclo::{rat_int, FracMod1, Rational};
use crate::error::{Error, Result};
use crate::fbring::{BurnsideRing, CharPair, RingElement};
use crate::fiber::{push_char_to_quotient, DualChar, MonomialPair};
use crate::groups::{
    isomorphisms, pair_encode, product, quotient, Elem, ElemSet, FiniteGroup, GroupHom,
};

/// Pair `(G, Phi)` of a full group with a character of its dual, carried
/// with its ring context.
#[derive(Clone)]
pub struct GroupPair {
    pub ring: Arc<BurnsideRing>,
    pub chi: DualChar,
}

impl GroupPair {
    pub fn new(ring: Arc<BurnsideRing>, chi: DualChar) -> Self {
        debug_assert_eq!(chi.values.len(), ring.dual_of_set(ring.members()).order());
        GroupPair { ring, chi }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.ring.group()
    }

    pub fn char_pair(&self) -> CharPair {
        CharPair {
            subgroup: self.ring.members().clone(),
            chi: self.chi.clone(),
        }
    }

    pub fn idempotent(&self) -> RingElement {
        self.ring.idempotent(&self.char_pair())
    }

    /// Fast-inequality invariants: order, exponent, dual order, and the
    /// value multiset of the character.
    pub fn fingerprint(&self) -> (usize, u64, usize, Vec<FracMod1>) {
        (
            self.group().order(),
            self.group().exponent(),
            self.chi.values.len(),
            self.chi.fingerprint(),
        )
    }
}

impl std::fmt::Debug for GroupPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {:?})", self.group().name(), self.chi.values)
    }
}

/// All `Phi` on `G*` as [`GroupPair`]s, deterministic order.
pub fn all_pairs(ring: &Arc<BurnsideRing>) -> Vec<GroupPair> {
    ring.dual_of_set(ring.members())
        .k_chars()
        .into_iter()
        .map(|chi| GroupPair::new(ring.clone(), chi))
        .collect()
}

/// Deflation number by the closed formula:
/// `m^N = |(G/N)*| / (|G| |G*|) * sum_{K: KN=G, Phi|_{K-perp}=1}
/// |K| |K-perp| mu(K, G)`.
pub fn m_constant(pair: &GroupPair, n: &ElemSet) -> Result<Rational> {
    let ring = &pair.ring;
    let g = ring.group();
    if !g.is_subgroup(n) {
        return Err(Error::NotSubgroup);
    }
    if !g.is_normal(n) {
        return Err(Error::NotNormal);
    }
    let lat = ring.lattice();
    let dual = ring.dual_of_set(ring.members());
    let top = lat.top();
    let mobius = lat.mobius_column(top);
    let n_order = n.len();
    let mut acc = rat_int(0);
    for i in 0..lat.len() {
        let k = lat.subgroup(i);
        // KN = G by order counting: |K||N| / |K meet N| = |G|
        let meet = k.intersection(n).len();
        if k.len() * n_order != g.order() * meet {
            continue;
        }
        let perp = dual.perp(k);
        if !pair.chi.is_trivial_on(&perp) {
            continue;
        }
        let mu = mobius[&i];
        if mu != 0 {
            acc += rat_int(k.len() as i64 * perp.len() as i64 * mu);
        }
    }
    // |(G/N)*| equals |N-perp| via inflation
    let quotient_dual_order = dual.perp(n).len() as i64;
    Ok(acc * rat_int(quotient_dual_order) / rat_int(g.order() as i64 * dual.order() as i64))
}

/// Deflation of a pair: the quotient ring, the pushed character, and the
/// projection map.
pub struct DeflatedPair {
    pub ring: Arc<BurnsideRing>,
    pub chi: DualChar,
    pub projection: Vec<Elem>,
}

pub fn deflate_pair(pair: &GroupPair, n: &ElemSet, cap: usize) -> Result<DeflatedPair> {
    let g = pair.ring.group();
    let q = quotient(g, n)?;
    let q_ring = BurnsideRing::new(q.group.clone(), pair.ring.fiber().clone(), cap)?;
    let source_dual = pair.ring.dual_of_set(pair.ring.members());
    let target_dual = q_ring.dual_of_set(q_ring.members());
    let chi = push_char_to_quotient(&pair.chi, &source_dual, &target_dual, &q.projection);
    Ok(DeflatedPair {
        ring: q_ring,
        chi,
        projection: q.projection,
    })
}

/// Apply the closed-form deflation to the explicit idempotent and express
/// the result as `scalar * e_(G/N, Phi_N)`. The scalar must be rational
/// and must agree with [`m_constant`].
pub fn deflate_idempotent(
    pair: &GroupPair,
    n: &ElemSet,
    cap: usize,
) -> Result<(Rational, DeflatedPair)> {
    let g = pair.ring.group();
    let deflated = deflate_pair(pair, n, cap)?;
    let e = pair.idempotent();
    let def = Elementary::Def {
        group: g.clone(),
        normal: n.clone(),
    };
    let image = def.apply(&e)?;
    let predicted = deflated.ring.idempotent(&CharPair {
        subgroup: deflated.ring.members().clone(),
        chi: deflated.chi.clone(),
    });
    let scalar = if image.is_zero() {
        rat_int(0)
    } else {
        let (witness_pair, witness_coeff) = predicted
            .coeffs()
            .iter()
            .next()
            .expect("idempotents are nonzero");
        let found = image.coeff(witness_pair);
        let ratio = found.div(witness_coeff)?;
        let scaled = predicted.scale_cyclotomic(&ratio);
        if scaled != image {
            return Err(Error::Invalid(
                "deflated idempotent is not proportional to the predicted one".into(),
            ));
        }
        ratio
            .as_rational()
            .ok_or_else(|| Error::Invalid("deflation scalar is not rational".into()))?
    };
    let formula = m_constant(pair, n)?;
    if scalar != formula {
        return Err(Error::Invalid(format!(
            "deflation scalar {scalar} disagrees with the closed formula {formula}"
        )));
    }
    Ok((scalar, deflated))
}

/// Table of deflation numbers over all normal subgroups, in lattice order.
pub struct MTable {
    pub entries: Vec<(ElemSet, Rational)>,
}

pub fn m_table(pair: &GroupPair) -> Result<MTable> {
    let lat = pair.ring.lattice();
    let mut entries = Vec::new();
    for i in lat.normal_subgroup_indices() {
        let n = lat.subgroup(i).clone();
        let m = m_constant(pair, &n)?;
        entries.push((n, m));
    }
    Ok(MTable { entries })
}

/// `B^A`-pair test: `m^N = 0` for every minimal nontrivial normal subgroup
/// (sufficient by transitivity of the deflation numbers); `strict` checks
/// every nontrivial normal subgroup instead.
pub fn is_bpair(pair: &GroupPair, strict: bool) -> Result<bool> {
    let lat = pair.ring.lattice();
    let indices: Vec<usize> = if strict {
        lat.normal_subgroup_indices()
            .into_iter()
            .filter(|&i| lat.subgroup(i).len() > 1)
            .collect()
    } else {
        lat.minimal_normal_indices()
    };
    for i in indices {
        if !m_constant(pair, lat.subgroup(i))?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Isomorphism of pairs: a group isomorphism `f: H -> G` with
/// `Psi o f* = Phi` on `G*`, found by iterating isomorphism witnesses.
pub fn find_pair_isomorphism(a: &GroupPair, b: &GroupPair) -> Option<GroupHom> {
    if a.fingerprint() != b.fingerprint() {
        return None;
    }
    let g_dual = a.ring.dual_of_set(a.ring.members());
    let h_dual = b.ring.dual_of_set(b.ring.members());
    for f in isomorphisms(b.group(), a.group(), usize::MAX) {
        // (Psi o f*)(phi) = Psi(phi o f) for phi in G*
        let matches = g_dual.chars().iter().enumerate().all(|(i, phi)| {
            let pulled = MonomialPair {
                subgroup: b.ring.members().clone(),
                values: b
                    .group()
                    .elements()
                    .map(|h| phi.value_at(f.apply(h)))
                    .collect(),
            };
            let idx = h_dual.index_of(&pulled).expect("pullback is a character");
            b.chi.eval(idx) == a.chi.eval(i)
        });
        if matches {
            return Some(f);
        }
    }
    None
}

/// Pair isomorphism in coset form, available when `A` embeds in the
/// field: pick `g` with `eps_g = Phi` and `h` with `eps_h = Psi`, then
/// search for an isomorphism `f: G -> H` with `f(g) O(H) = h O(H)`.
/// Equivalent to [`find_pair_isomorphism`] with the witness reversed.
pub fn find_pair_isomorphism_via_cosets(a: &GroupPair, b: &GroupPair) -> Result<Option<GroupHom>> {
    if a.fingerprint() != b.fingerprint() {
        return Ok(None);
    }
    let a_dual = a.ring.dual_of_set(a.ring.members());
    let b_dual = b.ring.dual_of_set(b.ring.members());
    let coset_rep = |dual: &Arc<crate::fiber::DualGroup>, chi: &DualChar| -> Result<Elem> {
        for (g, eps) in crate::fiber::zeta_iso(dual)? {
            if eps == *chi {
                return Ok(g);
            }
        }
        Err(Error::Invalid("character is not of the form eps_g".into()))
    };
    let g_rep = coset_rep(&a_dual, &a.chi)?;
    let h_rep = coset_rep(&b_dual, &b.chi)?;
    let o_h = crate::fiber::o_subgroup(&b_dual);
    let h_group = b.group();
    for f in isomorphisms(a.group(), b.group(), usize::MAX) {
        // f(g) O(H) = h O(H)
        let moved = f.apply(g_rep);
        if o_h.contains(h_group.mul(h_group.inv(h_rep), moved)) {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// The order relation on pairs: `(H, Psi) <= (G, Phi)` when some normal
/// `N` of `G` gives `(H, Psi)` isomorphic to `(G/N, Phi_N)`. Returns the
/// first witness in lattice order.
pub fn pair_leq(sub: &GroupPair, sup: &GroupPair, cap: usize) -> Result<Option<ElemSet>> {
    let lat = sup.ring.lattice();
    let g_order = sup.group().order();
    let h_order = sub.group().order();
    if !g_order.is_multiple_of(h_order) {
        return Ok(None);
    }
    for i in lat.normal_subgroup_indices() {
        let n = lat.subgroup(i);
        if n.len() * h_order != g_order {
            continue;
        }
        let deflated = deflate_pair(sup, n, cap)?;
        let q_pair = GroupPair::new(deflated.ring.clone(), deflated.chi.clone());
        if find_pair_isomorphism(&q_pair, sub).is_some() {
            return Ok(Some(n.clone()));
        }
    }
    Ok(None)
}

/// Isomorphism class of the unique minimal pair of the subfunctor
/// generated by `e_(G,Phi)`: scan quotients by normal subgroups in
/// decreasing order of `N`, keeping those with nonzero deflation number
/// whose quotient pair is a `B^A`-pair. Uniqueness is asserted.
pub fn beta(pair: &GroupPair, cap: usize) -> Result<GroupPair> {
    let lat = pair.ring.lattice();
    let mut normals = lat.normal_subgroup_indices();
    normals.sort_by_key(|&i| std::cmp::Reverse(lat.subgroup(i).len()));
    let mut found: Option<GroupPair> = None;
    for i in normals {
        let n = lat.subgroup(i);
        if m_constant(pair, n)?.is_zero() {
            continue;
        }
        let deflated = deflate_pair(pair, n, cap)?;
        let q_pair = GroupPair::new(deflated.ring.clone(), deflated.chi.clone());
        if !is_bpair(&q_pair, false)? {
            continue;
        }
        match &found {
            None => found = Some(q_pair),
            Some(prev) => {
                if find_pair_isomorphism(prev, &q_pair).is_none() {
                    return Err(Error::Invalid(
                        "two non-isomorphic minimal pair candidates".into(),
                    ));
                }
            }
        }
    }
    found.ok_or_else(|| Error::Invalid("no minimal pair found".into()))
}

/// `m^M` computed through the product quotient `(G/M) x (G/N)`:
/// `1/(|G| |G*|) sum_{K: KN=KM=G, Phi|_{K-perp}=1} |K| mu(K,G)
/// |Sigma^K_{M,N}| m^{(K meet M)N/N}_(G/N, Phi_N)`.
pub fn m_via_sigma(
    pair: &GroupPair,
    m_set: &ElemSet,
    n_set: &ElemSet,
    cap: usize,
) -> Result<Rational> {
    let ring = &pair.ring;
    let g = ring.group();
    for s in [m_set, n_set] {
        if !g.is_normal(s) {
            return Err(Error::NotNormal);
        }
    }
    let lat = ring.lattice();
    let dual = ring.dual_of_set(ring.members());
    let mobius = lat.mobius_column(lat.top());

    let qm = quotient(g, m_set)?;
    let qn = quotient(g, n_set)?;
    let qn_ring = BurnsideRing::new(qn.group.clone(), ring.fiber().clone(), cap)?;
    let source_dual = ring.dual_of_set(ring.members());
    let chi_n = push_char_to_quotient(
        &pair.chi,
        &source_dual,
        &qn_ring.dual_of_set(qn_ring.members()),
        &qn.projection,
    );
    let qn_pair = GroupPair::new(qn_ring.clone(), chi_n);

    // characters of (G/M) x (G/N)
    let prod = product(&qm.group, &qn.group);
    let prod_chars = crate::fiber::enumerate_chars(&prod, &prod.all(), ring.fiber());
    let qn_ord = qn.group.order();

    let mut acc = rat_int(0);
    for i in 0..lat.len() {
        let k = lat.subgroup(i);
        let join_ok = |nrm: &ElemSet| {
            let meet = k.intersection(nrm).len();
            k.len() * nrm.len() == g.order() * meet
        };
        if !join_ok(m_set) || !join_ok(n_set) {
            continue;
        }
        let perp = dual.perp(k);
        if !pair.chi.is_trivial_on(&perp) {
            continue;
        }
        let mu = mobius[&i];
        if mu == 0 {
            continue;
        }
        // Sigma^K_{M,N}: phi trivial on K meet M meet N admitting psi on
        // (G/M) x (G/N) with psi(kM, kN) = phi(k) on K
        let kmn = k.intersection(m_set).intersection(n_set);
        let mut sigma = 0i64;
        for phi in dual.chars() {
            if kmn.iter().any(|e| phi.value_at(e).0 != 0) {
                continue;
            }
            let admits = prod_chars.iter().any(|psi| {
                k.iter().all(|e| {
                    let enc =
                        pair_encode(qn_ord, qm.projection[e as usize], qn.projection[e as usize]);
                    psi.value_at(enc) == phi.value_at(e)
                })
            });
            if admits {
                sigma += 1;
            }
        }
        if sigma == 0 {
            continue;
        }
        // B_K = (K meet M)N/N as the image of K meet M in G/N
        let mut bk = ElemSet::empty(qn.group.order());
        for e in k.intersection(m_set).iter() {
            bk.insert(qn.projection[e as usize]);
        }
        let inner = m_constant(&qn_pair, &bk)?;
        acc += rat_int(k.len() as i64 * mu * sigma) * inner;
    }
    Ok(acc / rat_int(g.order() as i64 * dual.order() as i64))
}

/// Evaluation of the subfunctor generated by `e_(G,Phi)` at a target
/// group: the labels `(K, Psi)` of the target ring whose idempotents the
/// subfunctor contains, found by sweeping every standard basis element of
/// `B^A(H, G)` against the idempotent.
pub fn evaluate_e(
    pair: &GroupPair,
    target_ring: &Arc<BurnsideRing>,
    cap: usize,
) -> Result<BTreeSet<usize>> {
    let g = pair.ring.group().clone();
    let h = target_ring.group().clone();
    let fiber = pair.ring.fiber().clone();
    let prod = product(&h, &g);
    if prod.order() > cap {
        return Err(Error::OrderCapExceeded {
            order: prod.order(),
            cap,
        });
    }
    let prod_ring = BurnsideRing::new(prod.clone(), fiber.clone(), cap)?;
    let e = pair.idempotent();
    let basis = prod_ring.basis().to_vec();
    let sets: Vec<BTreeSet<usize>> = basis
        .par_iter()
        .map(|b| {
            let x = BisetElement::from_pair(h.clone(), g.clone(), fiber.clone(), b.clone());
            let y = x.act(&e).expect("compatible");
            let mut hits = BTreeSet::new();
            if !y.is_zero() {
                for (idx, v) in target_ring.mark_vector(&y).into_iter().enumerate() {
                    if !v.is_zero() {
                        hits.insert(idx);
                    }
                }
            }
            hits
        })
        .collect();
    let mut out = BTreeSet::new();
    for s in sets {
        out.extend(s);
    }
    Ok(out)
}
