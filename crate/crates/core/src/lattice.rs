//! The poset of `B^A`-pair classes up to a group-order bound, its
//! upward-closed subsets (which classify subfunctors generated in bounded
//! order), and composition-factor data.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbring::BurnsideRing;
use crate::fiber::{DualChar, FiberSpec, MonomialPair};
use crate::groups::{automorphisms, build_group, ElemSet, GroupHom};
use crate::pairs::{find_pair_isomorphism, is_bpair, pair_leq, GroupPair};

/// Orders for which the built-in catalog lists every isomorphism class.
pub const CATALOG_COMPLETE_MAX: usize = 15;

/// Complete list of isomorphism-class representatives for small orders.
pub fn catalog_by_order(order: usize) -> Vec<&'static str> {
    match order {
        1 => vec!["C1"],
        2 => vec!["C2"],
        3 => vec!["C3"],
        4 => vec!["C4", "C2xC2"],
        5 => vec!["C5"],
        6 => vec!["C6", "S3"],
        7 => vec!["C7"],
        8 => vec!["C8", "C2xC4", "C2xC2xC2", "D8", "Q8"],
        9 => vec!["C9", "C3xC3"],
        10 => vec!["C10", "D10"],
        11 => vec!["C11"],
        12 => vec!["C12", "C2xC6", "D12", "A4", "Dic3"],
        13 => vec!["C13"],
        14 => vec!["C14", "D14"],
        15 => vec!["C15"],
        _ => vec![],
    }
}

/// A node of the pair poset.
pub struct PosetNode {
    pub pair: GroupPair,
    pub group_spec: String,
    /// display form of the character values
    pub char_label: String,
}

/// The poset of isomorphism classes of `B^A`-pairs with `|G| <= bound`.
pub struct BPairPoset {
    pub nodes: Vec<PosetNode>,
    /// `leq[i][j]`: node `i` is below node `j` (a quotient pair of it)
    pub leq: Vec<Vec<bool>>,
    /// witnesses `N` with `(G_j / N, Phi_N) = node_i`
    pub witnesses: Vec<Vec<Option<ElemSet>>>,
    pub bound: usize,
    /// whether the catalog is exhaustive up to the bound
    pub complete: bool,
}

fn char_label(chi: &DualChar) -> String {
    let parts: Vec<String> = chi.values.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Pullback action of an automorphism on characters of the dual:
/// `(Phi o f*)(phi) = Phi(phi o f)`.
fn act_on_char(ring: &BurnsideRing, f: &GroupHom, chi: &DualChar) -> DualChar {
    let dual = ring.dual_of_set(ring.members());
    let perm: Vec<usize> = dual
        .chars()
        .iter()
        .map(|phi| {
            let pulled = MonomialPair {
                subgroup: ring.members().clone(),
                values: ring
                    .group()
                    .elements()
                    .map(|g| phi.value_at(f.apply(g)))
                    .collect(),
            };
            dual.index_of(&pulled).expect("pullback is a character")
        })
        .collect();
    chi.permute(&perm)
}

/// Enumerate `Phi` on `G*` up to the automorphism action; inner
/// automorphisms act trivially, so these are `Out(G)`-orbits.
pub fn char_orbits_under_aut(ring: &Arc<BurnsideRing>) -> Vec<(DualChar, usize)> {
    let auts = automorphisms(ring.group());
    let chars = ring.dual_of_set(ring.members()).k_chars();
    let mut seen: std::collections::HashSet<DualChar> = Default::default();
    let mut out = Vec::new();
    for chi in chars {
        if seen.contains(&chi) {
            continue;
        }
        let mut orbit: std::collections::BTreeSet<DualChar> = Default::default();
        for f in &auts {
            orbit.insert(act_on_char(ring, f, &chi));
        }
        for c in &orbit {
            seen.insert(c.clone());
        }
        let size = orbit.len();
        out.push((orbit.into_iter().next().unwrap(), size));
    }
    out
}

/// Build the truncated pair poset over the built-in catalog. `strict`
/// verifies the pair condition over every nontrivial normal subgroup
/// instead of only the minimal ones.
pub fn build_poset(
    bound: usize,
    fiber: &FiberSpec,
    cap: usize,
    strict: bool,
) -> Result<BPairPoset> {
    let mut specs: Vec<(usize, String)> = Vec::new();
    for order in 1..=bound.min(CATALOG_COMPLETE_MAX) {
        for s in catalog_by_order(order) {
            specs.push((order, s.to_string()));
        }
    }
    let candidates: Vec<Vec<PosetNode>> = specs
        .par_iter()
        .map(|(_, spec)| -> Result<Vec<PosetNode>> {
            let group = build_group(spec)?;
            let resolved = fiber.resolve(&group);
            let ring = BurnsideRing::new(group, resolved, cap)?;
            let mut nodes = Vec::new();
            for (chi, _) in char_orbits_under_aut(&ring) {
                let pair = GroupPair::new(ring.clone(), chi);
                if is_bpair(&pair, strict)? {
                    nodes.push(PosetNode {
                        group_spec: spec.clone(),
                        char_label: char_label(&pair.chi),
                        pair,
                    });
                }
            }
            Ok(nodes)
        })
        .collect::<Result<Vec<_>>>()?;

    // dedupe isomorphic pairs across catalog entries of the same order
    let mut nodes: Vec<PosetNode> = Vec::new();
    for group_nodes in candidates {
        for node in group_nodes {
            let duplicate = nodes
                .iter()
                .any(|n| find_pair_isomorphism(&n.pair, &node.pair).is_some());
            if !duplicate {
                nodes.push(node);
            }
        }
    }

    let n = nodes.len();
    let mut leq = vec![vec![false; n]; n];
    let mut witnesses = vec![vec![None; n]; n];
    let cells: Vec<(usize, usize, Option<ElemSet>)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let w = if i == j {
                Some(ElemSet::singleton(nodes[j].pair.group().order(), 0))
            } else {
                pair_leq(&nodes[i].pair, &nodes[j].pair, cap).unwrap_or(None)
            };
            (i, j, w)
        })
        .collect();
    for (i, j, w) in cells {
        leq[i][j] = w.is_some();
        witnesses[i][j] = w;
    }
    Ok(BPairPoset {
        nodes,
        leq,
        witnesses,
        bound,
        complete: bound <= CATALOG_COMPLETE_MAX,
    })
}

impl BPairPoset {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Check the partial-order axioms on the computed relation.
    pub fn is_partial_order(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            if !self.leq[i][i] {
                return false;
            }
            for j in 0..n {
                if i != j && self.leq[i][j] && self.leq[j][i] {
                    return false;
                }
                for k in 0..n {
                    if self.leq[i][j] && self.leq[j][k] && !self.leq[i][k] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Upward-closed subsets, enumerated over a linear extension (nodes
    /// are grouped by group order, so index order is one). Fails once the
    /// count exceeds the cap.
    pub fn closed_sets(&self, max_sets: usize) -> Result<Vec<ElemSet>> {
        let n = self.len();
        let mut out: Vec<ElemSet> = vec![ElemSet::empty(n)];
        for j in 0..n {
            let preds: Vec<usize> = (0..j).filter(|&i| self.leq[i][j]).collect();
            let mut next = Vec::with_capacity(out.len() * 2);
            for s in out {
                // j must join when a predecessor is already in
                let forced = preds.iter().any(|&i| s.contains(i as u16));
                if !forced {
                    next.push(s.clone());
                }
                let mut with = s;
                with.insert(j as u16);
                next.push(with);
                if next.len() > max_sets {
                    return Err(Error::EnumerationCap(format!(
                        "more than {max_sets} closed sets"
                    )));
                }
            }
            out = next;
        }
        out.sort_by_key(|s| (s.len(), s.iter().collect::<Vec<_>>()));
        Ok(out)
    }

    /// Count upward-closed subsets without materializing them.
    pub fn count_closed_sets(&self) -> u128 {
        // depth-first over membership choices; the forced-join rule keeps
        // the recursion linear in the answer
        fn rec(poset: &BPairPoset, j: usize, chosen: &mut Vec<bool>) -> u128 {
            if j == poset.len() {
                return 1;
            }
            let forced = (0..j).any(|i| chosen[i] && poset.leq[i][j]);
            let mut total = 0;
            chosen[j] = true;
            total += rec(poset, j + 1, chosen);
            chosen[j] = false;
            if !forced {
                total += rec(poset, j + 1, chosen);
            }
            total
        }
        rec(self, 0, &mut vec![false; self.len()])
    }

    pub fn is_closed(&self, set: &ElemSet) -> bool {
        for i in set.iter() {
            for j in 0..self.len() {
                if self.leq[i as usize][j] && !set.contains(j as u16) {
                    return false;
                }
            }
        }
        true
    }

    /// For adjacent closed sets `F' < F` differing in one class, return
    /// the index of that class: the composition factor of the quotient.
    pub fn chain_report(&self, f: &ElemSet, f_prime: &ElemSet) -> Result<usize> {
        if !self.is_closed(f) || !self.is_closed(f_prime) {
            return Err(Error::Invalid("inputs must be closed sets".into()));
        }
        if !f_prime.is_subset(f) {
            return Err(Error::Invalid("F' must be contained in F".into()));
        }
        let diff: Vec<u16> = f.iter().filter(|&i| !f_prime.contains(i)).collect();
        if diff.len() != 1 {
            return Err(Error::Invalid(
                "closed sets are not adjacent in the lattice".into(),
            ));
        }
        Ok(diff[0] as usize)
    }

    /// Graphviz rendering with Hasse-diagram edges.
    pub fn to_dot(&self) -> String {
        let n = self.len();
        let mut out = String::from("digraph pairs {\n  rankdir=BT;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let label = format!("{} | {}", node.group_spec, node.char_label)
                .replace('\\', "\\\\")
                .replace('"', "\\\"");
            out.push_str(&format!("  n{} [label=\"{}\"];\n", i, label));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.leq[i][j] {
                    continue;
                }
                // cover relation only
                let covered = (0..n).any(|k| k != i && k != j && self.leq[i][k] && self.leq[k][j]);
                if !covered {
                    out.push_str(&format!("  n{i} -> n{j};\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "group": n.group_spec,
                    "char": n.char_label,
                    "order": n.pair.group().order(),
                })
            })
            .collect();
        let relations: Vec<serde_json::Value> = (0..self.len())
            .flat_map(|i| {
                (0..self.len())
                    .filter(move |&j| i != j && self.leq[i][j])
                    .map(move |j| serde_json::json!([i, j]))
            })
            .collect();
        serde_json::json!({
            "bound": self.bound,
            "complete": self.complete,
            "nodes": nodes,
            "relations": relations,
        })
    }
}

/// Composition-factor data of the simple quotient attached to a
/// `B^A`-pair: the dimension data of the module induced from the
/// character stabilizer.
pub struct CompositionFactorData {
    /// size of the `Out(G)`-orbit of `Phi` (= dim of the evaluation at `G`)
    pub out_orbit_size: usize,
    /// index of the stabilizer `Out(G)_Phi` (= dim of the seed module)
    pub stabilizer_index: usize,
    /// parameter tag `(G, 1, 1, V_Phi)`
    pub label: String,
}

pub fn composition_factor(pair: &GroupPair) -> Result<CompositionFactorData> {
    if !is_bpair(pair, false)? {
        return Err(Error::Invalid("not a B^A-pair".into()));
    }
    let auts = automorphisms(pair.group());
    let mut orbit: std::collections::BTreeSet<DualChar> = Default::default();
    let mut stab = 0usize;
    for f in &auts {
        let moved = act_on_char(&pair.ring, f, &pair.chi);
        if moved == pair.chi {
            stab += 1;
        }
        orbit.insert(moved);
    }
    let out_orbit_size = orbit.len();
    let stabilizer_index = auts.len() / stab;
    if out_orbit_size != stabilizer_index {
        return Err(Error::Invalid(
            "orbit size disagrees with the stabilizer index".into(),
        ));
    }
    Ok(CompositionFactorData {
        out_orbit_size,
        stabilizer_index,
        label: format!(
            "({}, 1, 1, V of dim {})",
            pair.group().name(),
            out_orbit_size
        ),
    })
}
