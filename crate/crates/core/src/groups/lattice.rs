//! Subgroup lattice: enumeration, containment, conjugacy classes,
//! normalizers, and the Möbius function of the subgroup poset.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::groups::{Elem, ElemSet, FiniteGroup};

pub struct SubgroupLattice {
    group: Arc<FiniteGroup>,
    subgroups: Vec<ElemSet>,
    index: HashMap<ElemSet, usize>,
    /// `contains[i]` is the set of lattice indices `j` with `S_j <= S_i`.
    contains: Vec<Vec<usize>>,
    subset_bits: Vec<Vec<u64>>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    normalizers: Vec<OnceLock<ElemSet>>,
    mobius_cols: RwLock<HashMap<usize, Arc<HashMap<usize, i64>>>>,
}

impl SubgroupLattice {
    /// Enumerate every subgroup by bottom-up cyclic extension. Fails when
    /// the group order exceeds `cap`.
    pub fn build(group: Arc<FiniteGroup>, cap: usize) -> Result<Arc<Self>> {
        let n = group.order();
        if n > cap {
            return Err(Error::OrderCapExceeded { order: n, cap });
        }
        // seed with all cyclic subgroups
        let mut atoms: Vec<ElemSet> = Vec::new();
        let mut seen: HashSet<ElemSet> = HashSet::new();
        for g in group.elements() {
            let c = group.closure(&[g]);
            if seen.insert(c.clone()) {
                atoms.push(c);
            }
        }
        let mut subgroups: Vec<ElemSet> = atoms.clone();
        let mut queue: Vec<ElemSet> = atoms.clone();
        while let Some(s) = queue.pop() {
            for atom in &atoms {
                if atom.is_subset(&s) {
                    continue;
                }
                let gens: Vec<Elem> = s.iter().chain(atom.iter()).collect();
                let t = group.closure(&gens);
                if seen.insert(t.clone()) {
                    subgroups.push(t.clone());
                    queue.push(t);
                }
            }
        }
        subgroups.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        let index: HashMap<ElemSet, usize> = subgroups
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        let m = subgroups.len();
        let words = m.div_ceil(64);
        let mut contains = vec![Vec::new(); m];
        let mut subset_bits = vec![vec![0u64; words]; m];
        for i in 0..m {
            for j in 0..=i {
                if subgroups[j].is_subset(&subgroups[i]) {
                    contains[i].push(j);
                    subset_bits[i][j / 64] |= 1 << (j % 64);
                }
            }
        }

        // conjugacy classes under the full group action
        let mut class_of = vec![usize::MAX; m];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..m {
            if class_of[i] != usize::MAX {
                continue;
            }
            let cid = classes.len();
            let mut orbit = Vec::new();
            for g in group.elements() {
                let c = group.conjugate_set(g, &subgroups[i]);
                let j = index[&c];
                if class_of[j] == usize::MAX {
                    class_of[j] = cid;
                    orbit.push(j);
                }
            }
            orbit.sort_unstable();
            classes.push(orbit);
        }

        Ok(Arc::new(SubgroupLattice {
            group,
            normalizers: (0..m).map(|_| OnceLock::new()).collect(),
            subgroups,
            index,
            contains,
            subset_bits,
            class_of,
            classes,
            mobius_cols: RwLock::new(HashMap::new()),
        }))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn subgroup(&self, i: usize) -> &ElemSet {
        &self.subgroups[i]
    }

    pub fn subgroups(&self) -> &[ElemSet] {
        &self.subgroups
    }

    pub fn index_of(&self, s: &ElemSet) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn top(&self) -> usize {
        self.subgroups.len() - 1
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        i <= j && (self.subset_bits[j][i / 64] >> (i % 64)) & 1 == 1
    }

    /// Lattice indices of all subgroups contained in `S_i`, ascending.
    pub fn below(&self, i: usize) -> &[usize] {
        &self.contains[i]
    }

    pub fn class_id(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_rep(&self, cid: usize) -> usize {
        self.classes[cid][0]
    }

    pub fn normalizer(&self, i: usize) -> &ElemSet {
        self.normalizers[i].get_or_init(|| {
            let s = &self.subgroups[i];
            let mut out = ElemSet::empty(self.group.order());
            for g in self.group.elements() {
                if self.group.conjugate_set(g, s) == *s {
                    out.insert(g);
                }
            }
            out
        })
    }

    pub fn normal_subgroup_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.classes[self.class_of[i]].len() == 1)
            .collect()
    }

    /// Minimal nontrivial normal subgroups.
    pub fn minimal_normal_indices(&self) -> Vec<usize> {
        let normals: Vec<usize> = self
            .normal_subgroup_indices()
            .into_iter()
            .filter(|&i| self.subgroups[i].len() > 1)
            .collect();
        normals
            .iter()
            .copied()
            .filter(|&i| !normals.iter().any(|&j| j != i && self.leq(j, i)))
            .collect()
    }

    /// Möbius values `mu(K, S_target)` for all `K <= S_target`, computed by
    /// the defining recursion and cached per column.
    pub fn mobius_column(&self, target: usize) -> Arc<HashMap<usize, i64>> {
        if let Some(col) = self.mobius_cols.read().unwrap().get(&target) {
            return Arc::clone(col);
        }
        let mut col: HashMap<usize, i64> = HashMap::new();
        // descending order: all indices below target, largest first
        let below = &self.contains[target];
        for &k in below.iter().rev() {
            if k == target {
                col.insert(k, 1);
                continue;
            }
            let mut acc: i64 = 0;
            for &l in below.iter().rev() {
                if l > k && self.leq(k, l) {
                    acc += col[&l];
                }
            }
            col.insert(k, -acc);
        }
        let col = Arc::new(col);
        self.mobius_cols
            .write()
            .unwrap()
            .insert(target, Arc::clone(&col));
        col
    }

    pub fn mobius(&self, k: usize, h: usize) -> i64 {
        if !self.leq(k, h) {
            return 0;
        }
        *self.mobius_column(h).get(&k).unwrap()
    }
}

impl std::fmt::Debug for SubgroupLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "SubgroupLattice({}, {} subgroups, {} classes)",
            self.group.name(),
            self.subgroups.len(),
            self.classes.len()
        )
    }
}
