//! The fibered Burnside ring of a finite group over an exact splitting
//! field: standard basis, multiplication, projection to full-subgroup
//! terms, species, the mark morphism and its inverse, and primitive
//! idempotents.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use crate::cyclo::{rat_int, Cyclotomic, Rational};
use crate::error::{Error, Result};
use crate::fiber::{DualChar, DualGroup, FiberGroup, MonomialPair};
use crate::groups::{Elem, ElemSet, FiniteGroup, SubgroupLattice};

/// Lexicographically minimal representative of the orbit of `(U, phi)`
/// under conjugation by `members`.
pub fn canonical_pair(group: &FiniteGroup, members: &ElemSet, pair: &MonomialPair) -> MonomialPair {
    members
        .iter()
        .map(|g| pair.conj(group, g))
        .min()
        .expect("members nonempty")
}

/// Double-coset representatives `[U \ members / V]`, minimal element first.
pub fn double_cosets(
    group: &FiniteGroup,
    members: &ElemSet,
    left: &ElemSet,
    right: &ElemSet,
) -> Vec<Elem> {
    let mut visited = vec![false; group.order()];
    let mut reps = Vec::new();
    for g in members.iter() {
        if visited[g as usize] {
            continue;
        }
        reps.push(g);
        for u in left.iter() {
            let ug = group.mul(u, g);
            for v in right.iter() {
                visited[group.mul(ug, v) as usize] = true;
            }
        }
    }
    reps
}

/// Left-coset representatives `members / V`.
pub fn left_cosets(group: &FiniteGroup, members: &ElemSet, right: &ElemSet) -> Vec<Elem> {
    let mut visited = vec![false; group.order()];
    let mut reps = Vec::new();
    for g in members.iter() {
        if visited[g as usize] {
            continue;
        }
        reps.push(g);
        for v in right.iter() {
            visited[group.mul(g, v) as usize] = true;
        }
    }
    reps
}

/// Element of the fibered Burnside ring of `members` (a subgroup of the
/// ambient group, usually all of it), with exact cyclotomic coefficients
/// keyed by canonical orbit representatives.
#[derive(Clone)]
pub struct RingElement {
    group: Arc<FiniteGroup>,
    members: ElemSet,
    fiber: FiberGroup,
    coeffs: BTreeMap<MonomialPair, Cyclotomic>,
}

impl RingElement {
    pub fn zero(group: Arc<FiniteGroup>, members: ElemSet, fiber: FiberGroup) -> Self {
        RingElement {
            group,
            members,
            fiber,
            coeffs: BTreeMap::new(),
        }
    }

    /// The ring identity `[members, 1]`.
    pub fn one(group: Arc<FiniteGroup>, members: ElemSet, fiber: FiberGroup) -> Self {
        let pair = MonomialPair::trivial(members.clone());
        let mut out = Self::zero(group, members, fiber);
        out.add_term(pair, Cyclotomic::one());
        out
    }

    pub fn from_basis(
        group: Arc<FiniteGroup>,
        members: ElemSet,
        fiber: FiberGroup,
        pair: MonomialPair,
    ) -> Self {
        let mut out = Self::zero(group, members, fiber);
        out.add_term(pair, Cyclotomic::one());
        out
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn members(&self) -> &ElemSet {
        &self.members
    }

    pub fn fiber(&self) -> &FiberGroup {
        &self.fiber
    }

    pub fn coeffs(&self) -> &BTreeMap<MonomialPair, Cyclotomic> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, pair: &MonomialPair) -> Cyclotomic {
        let canon = canonical_pair(&self.group, &self.members, pair);
        self.coeffs
            .get(&canon)
            .cloned()
            .unwrap_or_else(Cyclotomic::zero)
    }

    /// Accumulate `coeff * [pair]`, canonicalizing the orbit representative.
    pub fn add_term(&mut self, pair: MonomialPair, coeff: Cyclotomic) {
        if coeff.is_zero() {
            return;
        }
        let canon = canonical_pair(&self.group, &self.members, &pair);
        self.add_canonical_term(canon, coeff);
    }

    fn add_canonical_term(&mut self, canon: MonomialPair, coeff: Cyclotomic) {
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(canon) {
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    fn compatible(&self, other: &RingElement) -> Result<()> {
        if !Arc::ptr_eq(&self.group, &other.group) && *self.group != *other.group {
            return Err(Error::GroupMismatch);
        }
        if self.members != other.members {
            return Err(Error::GroupMismatch);
        }
        if self.fiber != other.fiber {
            return Err(Error::FiberMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_canonical_term(p.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RingElement {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> RingElement {
        use num_traits::Zero;
        if r.is_zero() {
            return RingElement::zero(self.group.clone(), self.members.clone(), self.fiber.clone());
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.scale(r);
        }
        out
    }

    pub fn scale_cyclotomic(&self, z: &Cyclotomic) -> RingElement {
        let mut out =
            RingElement::zero(self.group.clone(), self.members.clone(), self.fiber.clone());
        if z.is_zero() {
            return out;
        }
        for (p, c) in &self.coeffs {
            out.add_canonical_term(p.clone(), c.mul(z));
        }
        out
    }

    /// Product given by the double-coset sum
    /// `[U,phi][V,psi] = sum_g [U meet gV, phi * (g psi)]`.
    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        self.compatible(other)?;
        let g = &*self.group;
        let mut out =
            RingElement::zero(self.group.clone(), self.members.clone(), self.fiber.clone());
        for (p1, c1) in &self.coeffs {
            for (p2, c2) in &other.coeffs {
                let c = c1.mul(c2);
                for t in double_cosets(g, &self.members, &p1.subgroup, &p2.subgroup) {
                    let conj = p2.conj(g, t);
                    let w = p1.subgroup.intersection(&conj.subgroup);
                    let chi = p1.restrict(&w).mul(&conj.restrict(&w), &self.fiber);
                    out.add_term(chi, c.clone());
                }
            }
        }
        Ok(out)
    }

    /// Restriction to a subgroup `H <= members`:
    /// `res([U,phi]) = sum_{g in [H\members/U]} [H meet gU, (g phi)|]`.
    pub fn restrict_to(&self, h: &ElemSet) -> RingElement {
        debug_assert!(h.is_subset(&self.members));
        let g = &*self.group;
        let mut out = RingElement::zero(self.group.clone(), h.clone(), self.fiber.clone());
        for (p, c) in &self.coeffs {
            for t in double_cosets(g, &self.members, h, &p.subgroup) {
                let conj = p.conj(g, t);
                let w = h.intersection(&conj.subgroup);
                out.add_term(conj.restrict(&w), c.clone());
            }
        }
        out
    }

    /// Transport along an element relabeling into a new ambient group.
    pub fn transport(
        &self,
        new_group: Arc<FiniteGroup>,
        new_members: ElemSet,
        map: impl Fn(Elem) -> Elem,
    ) -> RingElement {
        let mut out = RingElement::zero(new_group, new_members, self.fiber.clone());
        for (p, c) in &self.coeffs {
            let mut items: Vec<(Elem, crate::fiber::FiberElem)> =
                p.subgroup.iter().map(|e| (map(e), p.value_at(e))).collect();
            items.sort_unstable_by_key(|&(e, _)| e);
            let mut subgroup = ElemSet::empty(out.group.order());
            let mut values = Vec::with_capacity(items.len());
            for (e, v) in items {
                subgroup.insert(e);
                values.push(v);
            }
            out.add_term(MonomialPair { subgroup, values }, c.clone());
        }
        out
    }

    /// Keep only full-subgroup terms `[members, phi]`, as a map from
    /// dual-group index to coefficient.
    pub fn project_full(&self, dual: &DualGroup) -> BTreeMap<usize, Cyclotomic> {
        debug_assert_eq!(*dual.domain(), self.members);
        let mut out = BTreeMap::new();
        for (p, c) in &self.coeffs {
            if p.subgroup == self.members {
                let idx = dual.index_of(p).expect("full-subgroup term is a character");
                out.insert(idx, c.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(p, c)| {
                serde_json::json!({
                    "subgroup": p.subgroup.iter().collect::<Vec<Elem>>(),
                    "phi": p.values.iter().map(|&v| self.fiber.unpack(v)).collect::<Vec<_>>(),
                    "coeff": c.to_json(),
                })
            })
            .collect();
        serde_json::json!(terms)
    }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && self.fiber == other.fiber && self.coeffs == other.coeffs
    }
}

impl Eq for RingElement {}

impl std::fmt::Debug for RingElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})[{:?}|{:?}]", c, p.subgroup, p.values)?;
        }
        Ok(())
    }
}

/// Label of a species / primitive idempotent: a subgroup together with a
/// character of its dual group.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CharPair {
    pub subgroup: ElemSet,
    pub chi: DualChar,
}

/// The fibered Burnside ring `B^A(H)` for `H = members` inside an ambient
/// group, with cached lattice data, dual groups, basis, and species labels.
pub struct BurnsideRing {
    group: Arc<FiniteGroup>,
    members: ElemSet,
    fiber: FiberGroup,
    lattice: Arc<SubgroupLattice>,
    sub_indices: Vec<usize>,
    classes: Vec<Vec<usize>>,
    class_of: HashMap<usize, usize>,
    duals: Arc<Vec<OnceLock<Arc<DualGroup>>>>,
    basis: OnceLock<Vec<MonomialPair>>,
    xorbits: OnceLock<Vec<CharPair>>,
    xindex: OnceLock<HashMap<(ElemSet, DualChar), usize>>,
}

impl BurnsideRing {
    pub fn new(group: Arc<FiniteGroup>, fiber: FiberGroup, cap: usize) -> Result<Arc<Self>> {
        let lattice = SubgroupLattice::build(group.clone(), cap)?;
        let members = group.all();
        let duals = Arc::new((0..lattice.len()).map(|_| OnceLock::new()).collect());
        Ok(Arc::new(Self::build(group, members, fiber, lattice, duals)))
    }

    /// The ring of a subgroup, sharing the ambient lattice and dual caches.
    pub fn subring(&self, members: ElemSet) -> Arc<BurnsideRing> {
        debug_assert!(self.group.is_subgroup(&members));
        Arc::new(Self::build(
            self.group.clone(),
            members,
            self.fiber.clone(),
            self.lattice.clone(),
            self.duals.clone(),
        ))
    }

    fn build(
        group: Arc<FiniteGroup>,
        members: ElemSet,
        fiber: FiberGroup,
        lattice: Arc<SubgroupLattice>,
        duals: Arc<Vec<OnceLock<Arc<DualGroup>>>>,
    ) -> Self {
        let sub_indices: Vec<usize> = (0..lattice.len())
            .filter(|&i| lattice.subgroup(i).is_subset(&members))
            .collect();
        let mut class_of: HashMap<usize, usize> = HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &i in &sub_indices {
            if class_of.contains_key(&i) {
                continue;
            }
            let cid = classes.len();
            let mut orbit = Vec::new();
            for g in members.iter() {
                let c = group.conjugate_set(g, lattice.subgroup(i));
                let j = lattice.index_of(&c).expect("conjugate is a subgroup");
                if let std::collections::hash_map::Entry::Vacant(e) = class_of.entry(j) {
                    e.insert(cid);
                    orbit.push(j);
                }
            }
            orbit.sort_unstable();
            classes.push(orbit);
        }
        BurnsideRing {
            group,
            members,
            fiber,
            lattice,
            sub_indices,
            classes,
            class_of,
            duals,
            basis: OnceLock::new(),
            xorbits: OnceLock::new(),
            xindex: OnceLock::new(),
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn members(&self) -> &ElemSet {
        &self.members
    }

    pub fn fiber(&self) -> &FiberGroup {
        &self.fiber
    }

    pub fn lattice(&self) -> &Arc<SubgroupLattice> {
        &self.lattice
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Subgroup conjugacy classes of this ring (lists of lattice indices).
    pub fn subgroup_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_id(&self, lattice_index: usize) -> usize {
        self.class_of[&lattice_index]
    }

    pub fn sub_indices(&self) -> &[usize] {
        &self.sub_indices
    }

    pub fn dual(&self, lattice_index: usize) -> Arc<DualGroup> {
        self.duals[lattice_index]
            .get_or_init(|| {
                DualGroup::new(
                    self.group.clone(),
                    self.lattice.subgroup(lattice_index).clone(),
                    self.fiber.clone(),
                )
            })
            .clone()
    }

    pub fn dual_of_set(&self, set: &ElemSet) -> Arc<DualGroup> {
        let idx = self.lattice.index_of(set).expect("not a subgroup");
        self.dual(idx)
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.group.clone(), self.members.clone(), self.fiber.clone())
    }

    pub fn one(&self) -> RingElement {
        RingElement::one(self.group.clone(), self.members.clone(), self.fiber.clone())
    }

    pub fn basis_element(&self, pair: MonomialPair) -> RingElement {
        RingElement::from_basis(
            self.group.clone(),
            self.members.clone(),
            self.fiber.clone(),
            pair,
        )
    }

    /// Canonical representatives of the orbits of monomial pairs: the
    /// standard basis of the ring.
    pub fn basis(&self) -> &[MonomialPair] {
        self.basis.get_or_init(|| {
            let mut out = Vec::new();
            for class in &self.classes {
                let rep = class[0];
                let h = self.lattice.subgroup(rep).clone();
                let dual = self.dual(rep);
                let normalizer = self.normalizer_in_members(rep);
                let mut seen: std::collections::HashSet<Vec<crate::fiber::FiberElem>> =
                    Default::default();
                for phi in dual.chars() {
                    if seen.contains(&phi.values) {
                        continue;
                    }
                    let mut orbit_min = phi.clone();
                    for g in normalizer.iter() {
                        let moved = phi.conj(&self.group, g);
                        debug_assert_eq!(moved.subgroup, h);
                        seen.insert(moved.values.clone());
                        if moved < orbit_min {
                            orbit_min = moved;
                        }
                    }
                    out.push(orbit_min);
                }
            }
            out.sort_unstable();
            out
        })
    }

    fn normalizer_in_members(&self, lattice_index: usize) -> ElemSet {
        self.lattice
            .normalizer(lattice_index)
            .intersection(&self.members)
    }

    /// Orbit representatives of the pairs `(H, Phi)` labelling species:
    /// one per conjugacy orbit, deterministic order.
    pub fn xorbit_reps(&self) -> &[CharPair] {
        self.xorbits.get_or_init(|| {
            let mut out = Vec::new();
            for class in &self.classes {
                let rep = class[0];
                let h = self.lattice.subgroup(rep).clone();
                let dual = self.dual(rep);
                let normalizer = self.normalizer_in_members(rep);
                let perms: Vec<Vec<usize>> = normalizer.iter().map(|g| dual.conj_perm(g)).collect();
                let mut seen: std::collections::HashSet<DualChar> = Default::default();
                let mut reps = Vec::new();
                for chi in dual.k_chars() {
                    if seen.contains(&chi) {
                        continue;
                    }
                    let mut orbit_min = chi.clone();
                    for p in &perms {
                        let moved = chi.permute(p);
                        if moved < orbit_min {
                            orbit_min = moved.clone();
                        }
                        seen.insert(moved);
                    }
                    reps.push(CharPair {
                        subgroup: h.clone(),
                        chi: orbit_min,
                    });
                }
                reps.sort_unstable();
                out.extend(reps);
            }
            out
        })
    }

    /// Orbit index of an arbitrary pair `(K, chi)` with `K <= members`.
    pub fn xorbit_index(&self, subgroup: &ElemSet, chi: &DualChar) -> usize {
        let map = self.xindex.get_or_init(|| {
            let mut map = HashMap::new();
            for (i, rep) in self.xorbit_reps().iter().enumerate() {
                let rep_idx = self.lattice.index_of(&rep.subgroup).unwrap();
                let rep_dual = self.dual(rep_idx);
                for g in self.members.iter() {
                    let moved_sub = self.group.conjugate_set(g, &rep.subgroup);
                    let moved_dual = self.dual_of_set(&moved_sub);
                    let perm: Vec<usize> = moved_dual
                        .chars()
                        .iter()
                        .map(|psi| {
                            let back = psi.conj(&self.group, self.group.inv(g));
                            rep_dual.index_of(&back).expect("conjugate character")
                        })
                        .collect();
                    let moved_chi = rep.chi.permute(&perm);
                    map.entry((moved_sub, moved_chi)).or_insert(i);
                }
            }
            map
        });
        *map.get(&(subgroup.clone(), chi.clone()))
            .expect("pair belongs to this ring")
    }

    /// The species `s_(H,Phi)`: restrict, project to full-subgroup terms,
    /// and extend `Phi` linearly.
    pub fn species(&self, x: &RingElement, pair: &CharPair) -> Cyclotomic {
        let restricted = x.restrict_to(&pair.subgroup);
        let dual = self.dual_of_set(&pair.subgroup);
        let mut acc = Cyclotomic::zero();
        for (idx, c) in restricted.project_full(&dual) {
            let root = Cyclotomic::root_of_unity(pair.chi.eval(idx));
            acc = acc.add(&c.mul(&root));
        }
        acc
    }

    /// All species values in `xorbit_reps` order.
    pub fn mark_vector(&self, x: &RingElement) -> Vec<Cyclotomic> {
        // group labels by subgroup so each restriction is computed once
        let reps = self.xorbit_reps();
        let mut out = vec![Cyclotomic::zero(); reps.len()];
        let mut by_subgroup: BTreeMap<ElemSet, Vec<usize>> = BTreeMap::new();
        for (i, rep) in reps.iter().enumerate() {
            by_subgroup.entry(rep.subgroup.clone()).or_default().push(i);
        }
        for (h, indices) in by_subgroup {
            let restricted = x.restrict_to(&h);
            let dual = self.dual_of_set(&h);
            let full = restricted.project_full(&dual);
            for i in indices {
                let mut acc = Cyclotomic::zero();
                for (idx, c) in &full {
                    let root = Cyclotomic::root_of_unity(reps[i].chi.eval(*idx));
                    acc = acc.add(&c.mul(&root));
                }
                out[i] = acc;
            }
        }
        out
    }

    /// Inverse of the mark morphism: the element with the given species
    /// values, expanded in the idempotent basis.
    pub fn element_from_marks(&self, marks: &[Cyclotomic]) -> RingElement {
        let reps = self.xorbit_reps().to_vec();
        assert_eq!(marks.len(), reps.len());
        let mut out = self.zero();
        for (i, v) in marks.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let e = self.idempotent(&reps[i]);
            out = out.add(&e.scale_cyclotomic(v)).expect("same ring");
        }
        out
    }

    /// Order of the stabilizer of `(H, Phi)` under members-conjugation.
    pub fn pair_normalizer_order(&self, pair: &CharPair) -> usize {
        let idx = self.lattice.index_of(&pair.subgroup).expect("subgroup");
        let dual = self.dual(idx);
        let normalizer = self.normalizer_in_members(idx);
        normalizer
            .iter()
            .filter(|&g| pair.chi.permute(&dual.conj_perm(g)) == pair.chi)
            .count()
    }

    /// The primitive idempotent `e_(H,Phi)` by the explicit formula
    /// `1/(|N(H,Phi)| |H*|) sum_{K<=H, Phi trivial on K-perp} sum_phi
    /// |K| mu(K,H) Phi(phi^-1) [K, phi|K]`.
    pub fn idempotent(&self, pair: &CharPair) -> RingElement {
        let h_idx = self.lattice.index_of(&pair.subgroup).expect("subgroup");
        let dual = self.dual(h_idx);
        let mobius = self.lattice.mobius_column(h_idx);
        let stab = self.pair_normalizer_order(pair) as i64;
        let denom = rat_int(stab * dual.order() as i64).recip();
        let mut out = self.zero();
        for &k_idx in self.lattice.below(h_idx) {
            let k = self.lattice.subgroup(k_idx);
            let perp = dual.perp(k);
            if !pair.chi.is_trivial_on(&perp) {
                continue;
            }
            let mu = mobius[&k_idx];
            if mu == 0 {
                continue;
            }
            let weight = rat_int(k.len() as i64 * mu) * &denom;
            for (phi_idx, phi) in dual.chars().iter().enumerate() {
                // Phi(phi^-1) as a root of unity
                let root = Cyclotomic::root_of_unity(pair.chi.eval(phi_idx).neg());
                out.add_term(phi.restrict(k), root.scale(&weight));
            }
        }
        out
    }
    /// Mark vector rendered as a table keyed by `(subgroup, char)`.
    pub fn mark_vector_json(&self, x: &RingElement) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .xorbit_reps()
            .iter()
            .zip(self.mark_vector(x))
            .map(|(rep, v)| {
                serde_json::json!({
                    "subgroup": rep.subgroup.iter().collect::<Vec<Elem>>(),
                    "char": rep.chi.values.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "value": v.to_json(),
                })
            })
            .collect();
        serde_json::json!(rows)
    }
}

impl std::fmt::Debug for BurnsideRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BurnsideRing({}, |H|={}, A={})",
            self.group.name(),
            self.members.len(),
            self.fiber.spec_string()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{rat, FracMod1};
    use crate::groups::build_group;

    fn ring(spec: &str, fiber: FiberGroup) -> Arc<BurnsideRing> {
        BurnsideRing::new(build_group(spec).unwrap(), fiber, 64).unwrap()
    }

    // Independent species oracle: s_(H,Phi)([U,phi]) as a sum over left
    // cosets gU with H <= gUg^-1 of Phi((g phi)|_H). This avoids the
    // restriction/projection path entirely.
    fn species_oracle(r: &BurnsideRing, pair: &CharPair, basis: &MonomialPair) -> Cyclotomic {
        let g = r.group();
        let dual = r.dual_of_set(&pair.subgroup);
        let mut acc = Cyclotomic::zero();
        for rep in left_cosets(g, r.members(), &basis.subgroup) {
            let moved = basis.conj(g, rep);
            if pair.subgroup.is_subset(&moved.subgroup) {
                let restricted = moved.restrict(&pair.subgroup);
                let idx = dual.index_of(&restricted).expect("character");
                acc = acc.add(&Cyclotomic::root_of_unity(pair.chi.eval(idx)));
            }
        }
        acc
    }

    #[test]
    fn basis_counts() {
        assert_eq!(ring("C2", FiberGroup::cyclic(2)).basis().len(), 3);
        assert_eq!(ring("C2xC2", FiberGroup::cyclic(2)).basis().len(), 11);
        // trivial fiber: basis = conjugacy classes of subgroups
        assert_eq!(ring("S3", FiberGroup::trivial()).basis().len(), 4);
        assert_eq!(ring("D8", FiberGroup::trivial()).basis().len(), 8);
    }

    #[test]
    fn xorbit_counts_match_basis_size() {
        for (spec, fiber) in [
            ("C2", FiberGroup::cyclic(2)),
            ("S3", FiberGroup::cyclic(2)),
            ("S3", FiberGroup::cyclic(6)),
            ("D8", FiberGroup::cyclic(2)),
            ("A4", FiberGroup::cyclic(3)),
        ] {
            let r = ring(spec, fiber);
            assert_eq!(r.basis().len(), r.xorbit_reps().len(), "{spec}");
        }
    }

    #[test]
    fn multiplication_examples() {
        let r = ring("C2", FiberGroup::cyclic(2));
        let one_set = r.group().closure(&[]);
        let x = r.basis_element(MonomialPair::trivial(one_set));
        // [1,1]*[1,1] = 2 [1,1]
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq, x.scale(&rat_int(2)));

        // [C2,chi]^2 = [C2,1]
        let dual = r.dual_of_set(r.members());
        let chi = dual.chars().iter().find(|c| !c.is_trivial()).unwrap();
        let t = r.basis_element(chi.clone());
        assert_eq!(t.mul(&t).unwrap(), r.one());
    }

    #[test]
    fn identity_element() {
        for (spec, fiber) in [
            ("S3", FiberGroup::cyclic(6)),
            ("D8", FiberGroup::cyclic(2)),
            ("C2xC2", FiberGroup::cyclic(2)),
        ] {
            let r = ring(spec, fiber);
            let one = r.one();
            for b in r.basis() {
                let x = r.basis_element(b.clone());
                assert_eq!(x.mul(&one).unwrap(), x);
                assert_eq!(one.mul(&x).unwrap(), x);
            }
        }
    }

    #[test]
    fn species_equals_left_coset_oracle() {
        for (spec, fiber) in [
            ("C2", FiberGroup::cyclic(2)),
            ("S3", FiberGroup::cyclic(2)),
            ("S3", FiberGroup::cyclic(6)),
            ("D8", FiberGroup::cyclic(2)),
            ("C2xC2", FiberGroup::cyclic(2)),
        ] {
            let r = ring(spec, fiber);
            for pair in r.xorbit_reps() {
                for b in r.basis() {
                    let via_res = r.species(&r.basis_element(b.clone()), pair);
                    let via_cosets = species_oracle(&r, pair, b);
                    assert_eq!(via_res, via_cosets, "{spec}: {:?} at {:?}", b, pair);
                }
            }
        }
    }

    #[test]
    fn species_examples() {
        let r = ring("C2", FiberGroup::cyclic(2));
        let one_set = r.group().closure(&[]);
        let x = r.basis_element(MonomialPair::trivial(one_set.clone()));
        // s_(1,1)([1,1]) = 2
        let triv_pair = CharPair {
            subgroup: one_set,
            chi: DualChar {
                values: vec![FracMod1::ZERO],
            },
        };
        assert_eq!(r.species(&x, &triv_pair), Cyclotomic::from_int(2));
        // s_(C2,Phi)([1,1]) = 0: projection kills proper subgroup terms
        for pair in r.xorbit_reps() {
            if pair.subgroup == *r.members() {
                assert!(r.species(&x, pair).is_zero());
            }
        }
    }

    #[test]
    fn mark_of_identity_is_all_ones() {
        let r = ring("S3", FiberGroup::cyclic(6));
        for v in r.mark_vector(&r.one()) {
            assert_eq!(v, Cyclotomic::one());
        }
    }

    #[test]
    fn explicit_idempotents_for_c2() {
        let r = ring("C2", FiberGroup::cyclic(2));
        let g = r.group().clone();
        let one_set = g.closure(&[]);
        let full = g.all();
        let dual = r.dual_of_set(&full);
        let chars = dual.chars();
        let triv = MonomialPair::trivial(full.clone());
        let chi = chars.iter().find(|c| !c.is_trivial()).unwrap().clone();
        let half = rat(1, 2);

        // e_(1,1) = 1/2 [1,1]
        let e = r.idempotent(&CharPair {
            subgroup: one_set.clone(),
            chi: DualChar {
                values: vec![FracMod1::ZERO],
            },
        });
        let expected = r
            .basis_element(MonomialPair::trivial(one_set.clone()))
            .scale(&half);
        assert_eq!(e, expected);

        let chi_pos = dual.index_of(&chi).unwrap();
        let phi0 = vec![FracMod1::ZERO; 2];
        let mut phi1 = vec![FracMod1::ZERO; 2];
        phi1[chi_pos] = FracMod1::new(1, 2);

        // e_(C2,Phi0) = 1/2 [C2,1] + 1/2 [C2,chi] - 1/2 [1,1]
        let e0 = r.idempotent(&CharPair {
            subgroup: full.clone(),
            chi: DualChar { values: phi0 },
        });
        let expected0 = r
            .basis_element(triv.clone())
            .scale(&half)
            .add(&r.basis_element(chi.clone()).scale(&half))
            .unwrap()
            .sub(&r.basis_element(MonomialPair::trivial(one_set)).scale(&half))
            .unwrap();
        assert_eq!(e0, expected0);

        // e_(C2,Phi1) = 1/2 [C2,1] - 1/2 [C2,chi]
        let e1 = r.idempotent(&CharPair {
            subgroup: full,
            chi: DualChar { values: phi1 },
        });
        let expected1 = r
            .basis_element(triv)
            .scale(&half)
            .sub(&r.basis_element(chi).scale(&half))
            .unwrap();
        assert_eq!(e1, expected1);
    }

    #[test]
    fn idempotent_marks_are_indicators() {
        for (spec, fiber) in [
            ("C2", FiberGroup::cyclic(2)),
            ("S3", FiberGroup::cyclic(2)),
            ("C2xC2", FiberGroup::cyclic(2)),
            ("C6", FiberGroup::cyclic(6)),
        ] {
            let r = ring(spec, fiber);
            let reps = r.xorbit_reps().to_vec();
            for (i, rep) in reps.iter().enumerate() {
                let e = r.idempotent(rep);
                let marks = r.mark_vector(&e);
                for (j, v) in marks.iter().enumerate() {
                    let expect = if i == j {
                        Cyclotomic::one()
                    } else {
                        Cyclotomic::zero()
                    };
                    assert_eq!(*v, expect, "{spec} e_{i} at {j}");
                }
            }
        }
    }

    #[test]
    fn idempotents_sum_to_one_and_are_orthogonal() {
        let r = ring("S3", FiberGroup::cyclic(6));
        let reps = r.xorbit_reps().to_vec();
        let idems: Vec<RingElement> = reps.iter().map(|p| r.idempotent(p)).collect();
        let mut total = r.zero();
        for e in &idems {
            total = total.add(e).unwrap();
        }
        assert_eq!(total, r.one());
        for (i, a) in idems.iter().enumerate() {
            for (j, b) in idems.iter().enumerate() {
                let prod = a.mul(b).unwrap();
                if i == j {
                    assert_eq!(prod, *a);
                } else {
                    assert!(prod.is_zero());
                }
            }
        }
    }

    #[test]
    fn multiplication_by_idempotent_scales_by_species() {
        let r = ring("D8", FiberGroup::cyclic(2));
        let reps = r.xorbit_reps().to_vec();
        for b in r.basis().iter().take(6) {
            let x = r.basis_element(b.clone());
            for rep in reps.iter().take(6) {
                let e = r.idempotent(rep);
                let lhs = x.mul(&e).unwrap();
                let rhs = e.scale_cyclotomic(&r.species(&x, rep));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn marks_round_trip() {
        let r = ring("C2xC2", FiberGroup::cyclic(2));
        let basis = r.basis().to_vec();
        let mut x = r.zero();
        for (k, b) in basis.iter().enumerate() {
            x.add_term(b.clone(), Cyclotomic::from_rational(rat(k as i64 + 1, 3)));
        }
        let marks = r.mark_vector(&x);
        let back = r.element_from_marks(&marks);
        assert_eq!(back, x);

        // species are multiplicative on products
        let y = x.mul(&x).unwrap();
        let marks_y = r.mark_vector(&y);
        for (my, mx) in marks_y.iter().zip(&marks) {
            assert_eq!(*my, mx.mul(mx));
        }
    }

    #[test]
    fn species_are_ring_homomorphisms() {
        let r = ring("S3", FiberGroup::cyclic(2));
        let basis = r.basis().to_vec();
        for a in &basis {
            for b in &basis {
                let x = r.basis_element(a.clone());
                let y = r.basis_element(b.clone());
                let xy = x.mul(&y).unwrap();
                for rep in r.xorbit_reps() {
                    let sx = r.species(&x, rep);
                    let sy = r.species(&y, rep);
                    assert_eq!(r.species(&xy, rep), sx.mul(&sy));
                }
            }
        }
    }

    #[test]
    fn idempotent_formula_filter_is_vacuous() {
        // dropping the perp filter gives the same idempotent: the dropped
        // terms have vanishing inner character sums
        let r = ring("D8", FiberGroup::cyclic(2));
        for pair in r.xorbit_reps() {
            let h_idx = r.lattice().index_of(&pair.subgroup).unwrap();
            let dual = r.dual(h_idx);
            let mobius = r.lattice().mobius_column(h_idx);
            let stab = r.pair_normalizer_order(pair) as i64;
            let denom = rat_int(stab * dual.order() as i64).recip();
            let mut unfiltered = r.zero();
            for &k_idx in r.lattice().below(h_idx) {
                let k = r.lattice().subgroup(k_idx);
                let mu = mobius[&k_idx];
                if mu == 0 {
                    continue;
                }
                let weight = rat_int(k.len() as i64 * mu) * &denom;
                for (phi_idx, phi) in dual.chars().iter().enumerate() {
                    let root = Cyclotomic::root_of_unity(pair.chi.eval(phi_idx).neg());
                    unfiltered.add_term(phi.restrict(k), root.scale(&weight));
                }
            }
            assert_eq!(unfiltered, r.idempotent(pair));
        }
    }

    #[test]
    fn full_group_idempotent_detects_pi_kernel() {
        // e_G^G * x = 0 iff x has no full-subgroup terms
        let r = ring("S3", FiberGroup::cyclic(2));
        let full = r.members().clone();
        let dual = r.dual_of_set(&full);
        let mut e_top = r.zero();
        for pair in r.xorbit_reps() {
            if pair.subgroup == full {
                e_top = e_top.add(&r.idempotent(pair)).unwrap();
            }
        }
        for b in r.basis() {
            let x = r.basis_element(b.clone());
            let killed = e_top.mul(&x).unwrap().is_zero();
            let pi_zero = x.project_full(&dual).is_empty();
            assert_eq!(killed, pi_zero);
        }
        // sum over Phi of e_(G,Phi) has marks = indicator of H = G, which
        // is the classical top Burnside idempotent pattern
        let marks = r.mark_vector(&e_top);
        for (rep, v) in r.xorbit_reps().iter().zip(marks) {
            let expect = if rep.subgroup == full {
                Cyclotomic::one()
            } else {
                Cyclotomic::zero()
            };
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn mark_table_json_shape() {
        let r = ring("C2", FiberGroup::cyclic(2));
        let table = r.mark_vector_json(&r.one());
        let rows = table.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        for row in rows {
            assert_eq!(row["value"]["coeffs"][0], serde_json::json!("1"));
        }
    }

    #[test]
    fn subring_restriction_consistency() {
        // species of the subring agree with species of the big ring under
        // restriction: s_(L,Psi)^H (res x) = s_(L,Psi)^G (x)
        let r = ring("S3", FiberGroup::cyclic(6));
        let h = r
            .group()
            .elements()
            .find(|&e| r.group().elem_order(e) == 3)
            .map(|e| r.group().closure(&[e]))
            .unwrap();
        let sub = r.subring(h.clone());
        for b in r.basis() {
            let x = r.basis_element(b.clone());
            let rx = x.restrict_to(&h);
            for pair in sub.xorbit_reps() {
                assert_eq!(sub.species(&rx, pair), r.species(&x, pair));
            }
        }
    }
}
