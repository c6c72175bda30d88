//! Group homomorphisms, isomorphism search, and automorphism groups.

use std::sync::Arc;

use crate::groups::{Elem, FiniteGroup};

/// A homomorphism given by its full image table.
#[derive(Clone)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    images: Vec<Elem>,
}

impl GroupHom {
    pub fn new(source: Arc<FiniteGroup>, target: Arc<FiniteGroup>, images: Vec<Elem>) -> Self {
        let h = Self::new_unchecked(source, target, images);
        debug_assert!(h.is_homomorphism());
        h
    }

    pub fn new_unchecked(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        images: Vec<Elem>,
    ) -> Self {
        GroupHom {
            source,
            target,
            images,
        }
    }

    pub fn identity(g: &Arc<FiniteGroup>) -> Self {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            images: g.elements().collect(),
        }
    }

    pub fn conjugation(g: &Arc<FiniteGroup>, by: Elem) -> Self {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            images: g.elements().map(|x| g.conj(by, x)).collect(),
        }
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn apply(&self, e: Elem) -> Elem {
        self.images[e as usize]
    }

    pub fn images(&self) -> &[Elem] {
        &self.images
    }

    pub fn is_homomorphism(&self) -> bool {
        if self.images.len() != self.source.order() || self.images[0] != 0 {
            return false;
        }
        for a in self.source.elements() {
            for b in self.source.elements() {
                let lhs = self.images[self.source.mul(a, b) as usize];
                let rhs = self.target.mul(self.apply(a), self.apply(b));
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_bijective(&self) -> bool {
        if self.source.order() != self.target.order() {
            return false;
        }
        let mut seen = vec![false; self.target.order()];
        for &i in &self.images {
            if seen[i as usize] {
                return false;
            }
            seen[i as usize] = true;
        }
        true
    }

    /// `other . self` (apply `self` first).
    pub fn then(&self, other: &GroupHom) -> GroupHom {
        debug_assert_eq!(**other.source(), **self.target());
        GroupHom {
            source: self.source.clone(),
            target: other.target.clone(),
            images: self.images.iter().map(|&e| other.apply(e)).collect(),
        }
    }

    pub fn inverse(&self) -> GroupHom {
        debug_assert!(self.is_bijective());
        let mut inv = vec![0 as Elem; self.images.len()];
        for (i, &e) in self.images.iter().enumerate() {
            inv[e as usize] = i as Elem;
        }
        GroupHom {
            source: self.target.clone(),
            target: self.source.clone(),
            images: inv,
        }
    }
}

impl PartialEq for GroupHom {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && *self.source == *other.source
            && *self.target == *other.target
    }
}

impl Eq for GroupHom {}

impl std::fmt::Debug for GroupHom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupHom{:?}", self.images)
    }
}

fn order_histogram(g: &FiniteGroup) -> Vec<(u32, usize)> {
    let mut counts: std::collections::BTreeMap<u32, usize> = Default::default();
    for e in g.elements() {
        *counts.entry(g.elem_order(e)).or_default() += 1;
    }
    counts.into_iter().collect()
}

// Greedy generating sequence: repeatedly adjoin the smallest element not yet
// generated.
fn generating_sequence(g: &FiniteGroup) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut span = g.closure(&[]);
    while span.len() < g.order() {
        let next = g.elements().find(|&e| !span.contains(e)).unwrap();
        gens.push(next);
        span = g.closure(&gens);
    }
    gens
}

// Extend a partial map by the closure rules f(ab) = f(a)f(b); None on
// conflict. `known` lists the source elements with defined images.
fn propagate(
    src: &FiniteGroup,
    dst: &FiniteGroup,
    images: &mut [Option<Elem>],
    known: &mut Vec<Elem>,
) -> bool {
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot = known.clone();
        for &a in &snapshot {
            for &b in &snapshot {
                let c = src.mul(a, b);
                let img = dst.mul(images[a as usize].unwrap(), images[b as usize].unwrap());
                match images[c as usize] {
                    None => {
                        images[c as usize] = Some(img);
                        known.push(c);
                        changed = true;
                    }
                    Some(existing) => {
                        if existing != img {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Enumerate isomorphisms `src -> dst` by backtracking over generator
/// images, pruned by element-order statistics. Stops after `limit` hits.
pub fn isomorphisms(src: &Arc<FiniteGroup>, dst: &Arc<FiniteGroup>, limit: usize) -> Vec<GroupHom> {
    if src.order() != dst.order() || order_histogram(src) != order_histogram(dst) {
        return Vec::new();
    }
    let gens = generating_sequence(src);
    let mut found = Vec::new();
    let mut images: Vec<Option<Elem>> = vec![None; src.order()];
    images[0] = Some(0);
    let mut known = vec![0 as Elem];
    search(
        src,
        dst,
        &gens,
        0,
        &mut images,
        &mut known,
        &mut found,
        limit,
    );
    found
}

#[allow(clippy::too_many_arguments)]
fn search(
    src: &Arc<FiniteGroup>,
    dst: &Arc<FiniteGroup>,
    gens: &[Elem],
    depth: usize,
    images: &mut Vec<Option<Elem>>,
    known: &mut Vec<Elem>,
    found: &mut Vec<GroupHom>,
    limit: usize,
) {
    if found.len() >= limit {
        return;
    }
    if depth == gens.len() {
        if known.len() == src.order() {
            let map: Vec<Elem> = images.iter().map(|i| i.unwrap()).collect();
            let hom = GroupHom::new_unchecked(src.clone(), dst.clone(), map);
            // full verification before returning a witness
            if hom.is_bijective() && hom.is_homomorphism() {
                found.push(hom);
            }
        }
        return;
    }
    let g = gens[depth];
    if images[g as usize].is_some() {
        search(src, dst, gens, depth + 1, images, known, found, limit);
        return;
    }
    let want = src.elem_order(g);
    let used: Vec<bool> = {
        let mut u = vec![false; dst.order()];
        for &k in known.iter() {
            u[images[k as usize].unwrap() as usize] = true;
        }
        u
    };
    for cand in dst.elements() {
        if dst.elem_order(cand) != want || used[cand as usize] {
            continue;
        }
        let saved_images = images.clone();
        let saved_known = known.clone();
        images[g as usize] = Some(cand);
        known.push(g);
        if propagate(src, dst, images, known) && injective_so_far(images, dst.order()) {
            search(src, dst, gens, depth + 1, images, known, found, limit);
        }
        *images = saved_images;
        *known = saved_known;
        if found.len() >= limit {
            return;
        }
    }
}

fn injective_so_far(images: &[Option<Elem>], n: usize) -> bool {
    let mut seen = vec![false; n];
    for img in images.iter().flatten() {
        if seen[*img as usize] {
            return false;
        }
        seen[*img as usize] = true;
    }
    true
}

/// First isomorphism witness, if the groups are isomorphic.
pub fn find_isomorphism(src: &Arc<FiniteGroup>, dst: &Arc<FiniteGroup>) -> Option<GroupHom> {
    isomorphisms(src, dst, 1).into_iter().next()
}

/// The full automorphism group as a list of homs (identity first).
pub fn automorphisms(g: &Arc<FiniteGroup>) -> Vec<GroupHom> {
    let mut auts = isomorphisms(g, g, usize::MAX);
    auts.sort_by(|a, b| a.images().cmp(b.images()));
    auts
}

/// Partition `Aut(G)` into cosets of the inner automorphism group. Each
/// class lists its member indices into `auts`; class 0 is `Inn(G)`.
pub fn outer_classes(g: &Arc<FiniteGroup>, auts: &[GroupHom]) -> Vec<Vec<usize>> {
    let inner: Vec<Vec<Elem>> = {
        let mut set = std::collections::HashSet::new();
        for by in g.elements() {
            set.insert(GroupHom::conjugation(g, by).images().to_vec());
        }
        set.into_iter().collect()
    };
    let is_inner = |h: &GroupHom| inner.iter().any(|imgs| h.images() == imgs.as_slice());
    let mut class_of = vec![usize::MAX; auts.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    // identity is at some index; make Inn the first class
    if let Some(id_pos) = auts.iter().position(&is_inner) {
        let _ = id_pos;
    }
    for i in 0..auts.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let cid = classes.len();
        let mut members = Vec::new();
        for (j, b) in auts.iter().enumerate() {
            if class_of[j] == usize::MAX && is_inner(&b.then(&auts[i].inverse())) {
                class_of[j] = cid;
                members.push(j);
            }
        }
        classes.push(members);
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;

    // Oracle for small groups: count isomorphisms by scanning all bijections
    // that fix the identity.
    fn brute_force_iso_count(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> usize {
        let n = a.order();
        assert!(n <= 8);
        fn rec(
            a: &FiniteGroup,
            b: &FiniteGroup,
            map: &mut Vec<Elem>,
            used: &mut Vec<bool>,
            count: &mut usize,
        ) {
            let i = map.len();
            if i == a.order() {
                for x in a.elements() {
                    for y in a.elements() {
                        if map[a.mul(x, y) as usize] != b.mul(map[x as usize], map[y as usize]) {
                            return;
                        }
                    }
                }
                *count += 1;
                return;
            }
            for cand in b.elements() {
                if !used[cand as usize] {
                    used[cand as usize] = true;
                    map.push(cand);
                    rec(a, b, map, used, count);
                    map.pop();
                    used[cand as usize] = false;
                }
            }
        }
        let mut count = 0;
        let mut used = vec![false; n];
        used[0] = true;
        rec(a, b, &mut vec![0], &mut used, &mut count);
        count
    }

    #[test]
    fn exponent_distinguishes_c4_v4() {
        let c4 = build_group("C4").unwrap();
        let v4 = build_group("C2xC2").unwrap();
        assert!(find_isomorphism(&c4, &v4).is_none());
    }

    #[test]
    fn c6_is_c2_times_c3() {
        let c6 = build_group("C6").unwrap();
        let p = build_group("C2xC3").unwrap();
        let f = find_isomorphism(&c6, &p).unwrap();
        assert!(f.is_bijective() && f.is_homomorphism());
    }

    #[test]
    fn identity_witness() {
        let g = build_group("D8").unwrap();
        let f = find_isomorphism(&g, &g).unwrap();
        assert!(f.is_homomorphism());
    }

    #[test]
    fn automorphism_counts() {
        let v4 = build_group("C2xC2").unwrap();
        let auts = automorphisms(&v4);
        assert_eq!(auts.len(), 6);
        assert_eq!(auts.len(), brute_force_iso_count(&v4, &v4));
        // V4 is abelian: Inn trivial, Out has order 6
        assert_eq!(outer_classes(&v4, &auts).len(), 6);

        let s3 = build_group("S3").unwrap();
        let auts = automorphisms(&s3);
        assert_eq!(auts.len(), 6);
        assert_eq!(auts.len(), brute_force_iso_count(&s3, &s3));
        assert_eq!(outer_classes(&s3, &auts).len(), 1);

        let c2 = build_group("C2").unwrap();
        assert_eq!(automorphisms(&c2).len(), 1);
    }

    #[test]
    fn iso_count_matches_oracle_cross_group() {
        let c6 = build_group("C6").unwrap();
        let p = build_group("C2xC3").unwrap();
        assert_eq!(
            isomorphisms(&c6, &p, usize::MAX).len(),
            brute_force_iso_count(&c6, &p)
        );
    }

    #[test]
    fn q8_automorphisms() {
        let q8 = build_group("Q8").unwrap();
        assert_eq!(automorphisms(&q8).len(), 24);
    }
}
