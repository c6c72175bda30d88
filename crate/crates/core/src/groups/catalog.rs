//! Group constructions from catalog names, permutation generators, and
//! Cayley-table files.
//!
//! Canonical element orderings:
//! - `C<n>`: rotations, `i * j = (i + j) mod n`.
//! - `D<2n>` (dihedral of order `2n`): indices `0..n` are rotations `r^i`,
//!   `n..2n` are reflections `r^i s`, with `s r s = r^-1`.
//! - `Dic<n>` (dicyclic of order `4n`, `Q8 = Dic2`): `a^i b^eps` with
//!   `i < 2n`, index `i + 2n*eps`, `b^2 = a^n`, `b a b^-1 = a^-1`.
//! - `S<n>` / `A<n>`: permutations of `n` letters in lexicographic order of
//!   their one-line notation (identity first).
//! - `E<p^k>`: elementary abelian, as iterated direct product.
//! - Products `AxB`: the pairing `(a, b) -> a*|B| + b`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{product, Elem, FiniteGroup};

/// Build a group from a catalog specification string.
pub fn build_group(spec: &str) -> Result<Arc<FiniteGroup>> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("bad group spec '{spec}'")));
    }
    let mut acc: Option<Arc<FiniteGroup>> = None;
    for part in parts {
        let g = build_atom(part.trim())?;
        acc = Some(match acc {
            None => g,
            Some(a) => product(&a, &g),
        });
    }
    Ok(acc.unwrap())
}

fn build_atom(spec: &str) -> Result<Arc<FiniteGroup>> {
    let bad = || Error::Parse(format!("unknown group '{spec}'"));
    if let Some(n) = spec.strip_prefix("Dic") {
        let n: usize = n.parse().map_err(|_| bad())?;
        if n < 1 {
            return Err(bad());
        }
        return Ok(dicyclic(n));
    }
    if spec == "Q8" {
        return Ok(dicyclic(2));
    }
    if let Some(rest) = spec.strip_prefix('E') {
        let q: usize = rest.parse().map_err(|_| bad())?;
        return elementary_abelian(q).ok_or_else(bad);
    }
    let (kind, num) = spec.split_at(1);
    let n: usize = num.parse().map_err(|_| bad())?;
    match kind {
        "C" if n >= 1 => Ok(cyclic(n)),
        "D" if n >= 4 && n.is_multiple_of(2) => Ok(dihedral(n / 2)),
        "S" if (1..=5).contains(&n) => Ok(symmetric(n)),
        "A" if (3..=5).contains(&n) => Ok(alternating(n)),
        _ => Err(bad()),
    }
}

fn unchecked(n: usize, flat: Vec<Elem>, name: String) -> Arc<FiniteGroup> {
    FiniteGroup::from_table(
        (0..n).map(|a| flat[a * n..(a + 1) * n].to_vec()).collect(),
        name,
    )
    .expect("catalog construction must validate")
}

pub fn cyclic(n: usize) -> Arc<FiniteGroup> {
    let mut flat = vec![0 as Elem; n * n];
    for a in 0..n {
        for b in 0..n {
            flat[a * n + b] = ((a + b) % n) as Elem;
        }
    }
    unchecked(n, flat, format!("C{n}"))
}

/// Dihedral group of order `2n`.
pub fn dihedral(n: usize) -> Arc<FiniteGroup> {
    let ord = 2 * n;
    let idx = |i: usize, s: usize| (s * n + i) as Elem;
    let mut flat = vec![0 as Elem; ord * ord];
    for i in 0..n {
        for s in 0..2 {
            for j in 0..n {
                for t in 0..2 {
                    // (r^i s^s)(r^j s^t): s r^j = r^(n-j) s
                    let e = if s == 0 {
                        idx((i + j) % n, t)
                    } else {
                        idx((i + n - j % n) % n, 1 - t)
                    };
                    flat[(idx(i, s) as usize) * ord + idx(j, t) as usize] = e;
                }
            }
        }
    }
    unchecked(ord, flat, format!("D{ord}"))
}

/// Dicyclic group of order `4n`: `a^(2n) = 1`, `b^2 = a^n`, `b a b^-1 = a^-1`.
pub fn dicyclic(n: usize) -> Arc<FiniteGroup> {
    let m = 2 * n;
    let ord = 4 * n;
    let idx = |i: usize, e: usize| (e * m + i) as Elem;
    let mut flat = vec![0 as Elem; ord * ord];
    for i in 0..m {
        for e in 0..2 {
            for j in 0..m {
                for t in 0..2 {
                    // (a^i b^e)(a^j b^t) with b a^j = a^(-j) b and b^2 = a^n
                    let (k, s) = match (e, t) {
                        (0, _) => (i + j, t),
                        (1, 0) => (i + m - j, 1),
                        (1, 1) => (i + m - j + n, 0),
                        _ => unreachable!(),
                    };
                    flat[(idx(i, e) as usize) * ord + idx(j, t) as usize] = idx(k % m, s);
                }
            }
        }
    }
    let name = if n == 2 {
        "Q8".to_string()
    } else {
        format!("Dic{n}")
    };
    unchecked(ord, flat, name)
}

fn elementary_abelian(q: usize) -> Option<Arc<FiniteGroup>> {
    // q must be a prime power p^k
    let mut p = 0;
    for cand in 2..=q {
        if q.is_multiple_of(cand) {
            p = cand;
            break;
        }
    }
    if p == 0 {
        return None;
    }
    let mut k = 0;
    let mut m = q;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    if m != 1 {
        return None;
    }
    let mut g = cyclic(p);
    for _ in 1..k {
        g = product(&g, &cyclic(p));
    }
    Some(
        FiniteGroup::from_table(
            (0..g.order())
                .map(|a| {
                    (0..g.order())
                        .map(|b| g.mul(a as Elem, b as Elem))
                        .collect()
                })
                .collect(),
            format!("E{q}"),
        )
        .expect("validated"),
    )
}

fn perms_lex(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, n, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], n, &mut out);
    out
}

fn parity(p: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

fn permutation_group(perms: Vec<Vec<usize>>, name: String) -> Arc<FiniteGroup> {
    let n = perms.len();
    let index: std::collections::HashMap<&[usize], usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let mut flat = vec![0 as Elem; n * n];
    for a in 0..n {
        for b in 0..n {
            // composition: (p*q)(x) = p(q(x))
            let comp: Vec<usize> = (0..perms[a].len()).map(|x| perms[a][perms[b][x]]).collect();
            flat[a * n + b] = index[comp.as_slice()] as Elem;
        }
    }
    unchecked(n, flat, name)
}

pub fn symmetric(n: usize) -> Arc<FiniteGroup> {
    permutation_group(perms_lex(n), format!("S{n}"))
}

pub fn alternating(n: usize) -> Arc<FiniteGroup> {
    let perms: Vec<Vec<usize>> = perms_lex(n)
        .into_iter()
        .filter(|p| parity(p) == 0)
        .collect();
    permutation_group(perms, format!("A{n}"))
}

/// Build a group from the JSON Cayley-table format
/// `{"order": n, "table": [[...]]}`.
pub fn group_from_cayley_json(src: &str) -> Result<Arc<FiniteGroup>> {
    let v: serde_json::Value =
        serde_json::from_str(src).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
    let order = v["order"]
        .as_u64()
        .ok_or_else(|| Error::Parse("missing 'order'".into()))? as usize;
    let table = v["table"]
        .as_array()
        .ok_or_else(|| Error::Parse("missing 'table'".into()))?;
    if table.len() != order {
        return Err(Error::Parse("table size does not match order".into()));
    }
    let mut rows = Vec::with_capacity(order);
    for row in table {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse("table row is not an array".into()))?;
        let mut out = Vec::with_capacity(order);
        for e in row {
            out.push(
                e.as_u64()
                    .ok_or_else(|| Error::Parse("table entry is not an integer".into()))?
                    as Elem,
            );
        }
        rows.push(out);
    }
    let name = v["name"].as_str().unwrap_or("G").to_string();
    FiniteGroup::from_table(rows, name)
}

/// Build a group from a JSON list of one-line permutations acting on
/// `0..k-1`; the group is their closure under composition.
pub fn group_from_permutations_json(src: &str) -> Result<Arc<FiniteGroup>> {
    let gens: Vec<Vec<usize>> =
        serde_json::from_str(src).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
    if gens.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    let k = gens[0].len();
    for g in &gens {
        if g.len() != k {
            return Err(Error::Parse("permutations act on different sets".into()));
        }
        let mut seen = vec![false; k];
        for &x in g {
            if x >= k || seen[x] {
                return Err(Error::Parse("not a permutation".into()));
            }
            seen[x] = true;
        }
    }
    // close under composition, identity first then insertion order; sort to
    // make the ordering canonical (lexicographic one-line notation)
    let id: Vec<usize> = (0..k).collect();
    let mut elems: Vec<Vec<usize>> = vec![id];
    let mut seen: std::collections::HashSet<Vec<usize>> = elems.iter().cloned().collect();
    let mut i = 0;
    while i < elems.len() {
        for g in &gens {
            let p: Vec<usize> = (0..k).map(|x| g[elems[i][x]]).collect();
            if seen.insert(p.clone()) {
                elems.push(p);
            }
        }
        i += 1;
    }
    elems.sort();
    let name = format!("Perm{}", elems.len());
    Ok(permutation_group(elems, name))
}
