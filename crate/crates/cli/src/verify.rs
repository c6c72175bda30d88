//! Property battery behind `fbr verify`: runs the named invariants of the
//! library against a single group and fiber, reporting one line each.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fbr_core::bisets::{delta, idempotent_action, BisetElement, Elementary};
use fbr_core::cyclo::{rat, Cyclotomic};
use fbr_core::fbring::{BurnsideRing, RingElement};
use fbr_core::groups::GroupHom;
use fbr_core::pairs::{
    all_pairs, deflate_idempotent, deflate_pair, is_bpair, m_constant, GroupPair,
};

pub struct CheckResult {
    pub name: &'static str,
    /// `None` means pass; otherwise the failure detail.
    pub detail: Option<String>,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(), String>) -> CheckResult {
    let detail = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)) {
        Ok(Ok(())) => None,
        Ok(Err(d)) => Some(d),
        Err(_) => Some("panicked".to_string()),
    };
    CheckResult { name, detail }
}

fn random_element(ring: &BurnsideRing, rng: &mut ChaCha8Rng) -> RingElement {
    let mut x = ring.zero();
    for b in ring.basis() {
        if rng.gen_bool(0.6) {
            let num = rng.gen_range(-4i64..=4);
            let den = rng.gen_range(1i64..=3);
            x.add_term(b.clone(), Cyclotomic::from_rational(rat(num, den)));
        }
    }
    x
}

pub fn run_battery(
    ring: &Arc<BurnsideRing>,
    strict: bool,
    seed: u64,
    cap: usize,
) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let lat = ring.lattice().clone();
    let reps = ring.xorbit_reps().to_vec();
    let pairs = all_pairs(ring);

    out.push(check("mobius_inversion", || {
        for j in 0..lat.len() {
            for i in 0..lat.len() {
                let mut dot = 0i64;
                for k in 0..lat.len() {
                    if lat.leq(i, k) {
                        dot += lat.mobius(k, j);
                    }
                }
                if dot != i64::from(i == j) {
                    return Err(format!("zeta*mu != id at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }));

    let idems: Vec<RingElement> = reps.iter().map(|p| ring.idempotent(p)).collect();

    out.push(check("idempotent_sum_is_identity", || {
        let mut total = ring.zero();
        for e in &idems {
            total = total.add(e).map_err(|e| e.to_string())?;
        }
        if total == ring.one() {
            Ok(())
        } else {
            Err("sum of idempotents differs from [G,1]".into())
        }
    }));

    out.push(check("idempotent_orthogonality", || {
        for (i, a) in idems.iter().enumerate() {
            for (j, b) in idems.iter().enumerate() {
                let prod = a.mul(b).map_err(|e| e.to_string())?;
                let expect_self = i == j;
                if expect_self && prod != *a {
                    return Err(format!("e_{i}^2 != e_{i}"));
                }
                if !expect_self && !prod.is_zero() {
                    return Err(format!("e_{i} e_{j} != 0"));
                }
            }
        }
        Ok(())
    }));

    out.push(check("species_indicator_matrix", || {
        for (i, e) in idems.iter().enumerate() {
            for (j, v) in ring.mark_vector(e).iter().enumerate() {
                let expect = if i == j {
                    Cyclotomic::one()
                } else {
                    Cyclotomic::zero()
                };
                if *v != expect {
                    return Err(format!("species of e_{i} at orbit {j}"));
                }
            }
        }
        Ok(())
    }));

    out.push(check("species_multiplicativity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let x = random_element(ring, &mut rng);
            let y = random_element(ring, &mut rng);
            let xy = x.mul(&y).map_err(|e| e.to_string())?;
            let (mx, my, mxy) = (
                ring.mark_vector(&x),
                ring.mark_vector(&y),
                ring.mark_vector(&xy),
            );
            for k in 0..mx.len() {
                if mxy[k] != mx[k].mul(&my[k]) {
                    return Err(format!("s_k(xy) != s_k(x) s_k(y) at orbit {k}"));
                }
            }
        }
        Ok(())
    }));

    out.push(check("marks_round_trip", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b9);
        for _ in 0..3 {
            let x = random_element(ring, &mut rng);
            let back = ring.element_from_marks(&ring.mark_vector(&x));
            if back != x {
                return Err("element_from_marks(mark_vector(x)) != x".into());
            }
        }
        Ok(())
    }));

    out.push(check("deflation_matches_m_formula", || {
        for p in &pairs {
            for i in lat.normal_subgroup_indices() {
                let n = lat.subgroup(i);
                let (scalar, _) = deflate_idempotent(p, n, cap).map_err(|e| e.to_string())?;
                let formula = m_constant(p, n).map_err(|e| e.to_string())?;
                if scalar != formula {
                    return Err(format!("m mismatch at N of size {}", n.len()));
                }
            }
        }
        Ok(())
    }));

    out.push(check("m_transitivity", || {
        let normals = lat.normal_subgroup_indices();
        for p in &pairs {
            for &ni in &normals {
                for &mi in &normals {
                    if !lat.leq(ni, mi) {
                        continue;
                    }
                    let n = lat.subgroup(ni);
                    let m = lat.subgroup(mi);
                    let d = deflate_pair(p, n, cap).map_err(|e| e.to_string())?;
                    let qp = GroupPair::new(d.ring.clone(), d.chi.clone());
                    let mut mq = fbr_core::groups::ElemSet::empty(d.ring.group().order());
                    for e in m.iter() {
                        mq.insert(d.projection[e as usize]);
                    }
                    let lhs = m_constant(p, m).map_err(|e| e.to_string())?;
                    let rhs = m_constant(p, n).map_err(|e| e.to_string())?
                        * m_constant(&qp, &mq).map_err(|e| e.to_string())?;
                    if lhs != rhs {
                        return Err("m^M != m^N m^{M/N}".into());
                    }
                }
            }
        }
        Ok(())
    }));

    out.push(check("elementary_closed_forms", || {
        let g = ring.group().clone();
        let fiber = ring.fiber().clone();
        let take = if strict { usize::MAX } else { 4 };
        let mut ops: Vec<Elementary> = Vec::new();
        for i in 0..lat.len().min(take) {
            ops.push(Elementary::Res {
                group: g.clone(),
                sub: lat.subgroup(i).clone(),
            });
            ops.push(Elementary::Ind {
                group: g.clone(),
                sub: lat.subgroup(i).clone(),
            });
        }
        for i in lat.normal_subgroup_indices().into_iter().take(take) {
            ops.push(Elementary::Inf {
                group: g.clone(),
                normal: lat.subgroup(i).clone(),
            });
            ops.push(Elementary::Def {
                group: g.clone(),
                normal: lat.subgroup(i).clone(),
            });
        }
        for lambda in fbr_core::fiber::enumerate_chars(&g, &g.all(), &fiber)
            .into_iter()
            .take(take)
        {
            ops.push(Elementary::Tw {
                group: g.clone(),
                lambda,
            });
        }
        ops.push(Elementary::Iso {
            hom: GroupHom::identity(&g),
        });
        for op in &ops {
            let biset = op.biset(&fiber).map_err(|e| e.to_string())?;
            let source = BurnsideRing::new(biset.right().clone(), fiber.clone(), cap)
                .map_err(|e| e.to_string())?;
            for b in source
                .basis()
                .iter()
                .take(if strict { usize::MAX } else { 8 })
            {
                let x = source.basis_element(b.clone());
                let via_compose = biset.act(&x).map_err(|e| e.to_string())?;
                let via_closed = op.apply(&x).map_err(|e| e.to_string())?;
                if via_compose != via_closed {
                    return Err("compose route differs from closed form".into());
                }
            }
        }
        Ok(())
    }));

    out.push(check("idempotent_restriction_fusion", || {
        for i in 0..lat.len() {
            let h = lat.subgroup(i).clone();
            let subring = ring.subring(h.clone());
            for (rep, e) in reps.iter().zip(&idems) {
                let lhs = e.restrict_to(&h);
                let rhs = idempotent_action::restrict(ring, &subring, rep);
                if lhs != rhs {
                    return Err(format!("res to subgroup of size {}", h.len()));
                }
            }
        }
        Ok(())
    }));

    out.push(check("idempotent_induction_scaling", || {
        for i in 0..lat.len() {
            let h = lat.subgroup(i).clone();
            let subring = ring.subring(h.clone());
            for rep in subring.xorbit_reps() {
                let e_h = subring.idempotent(rep);
                // ind = transport into the full ring (pairs unchanged)
                let mut induced = ring.zero();
                for (p, c) in e_h.coeffs() {
                    induced.add_term(p.clone(), c.clone());
                }
                let rhs = idempotent_action::induce(ring, &subring, rep);
                if induced != rhs {
                    return Err(format!("ind from subgroup of size {}", h.len()));
                }
            }
        }
        Ok(())
    }));

    out.push(check("idempotent_inflation_fusion", || {
        for i in lat.normal_subgroup_indices() {
            let n = lat.subgroup(i).clone();
            let q = fbr_core::groups::quotient(ring.group(), &n).map_err(|e| e.to_string())?;
            let q_ring = BurnsideRing::new(q.group.clone(), ring.fiber().clone(), cap)
                .map_err(|e| e.to_string())?;
            let inf = Elementary::Inf {
                group: ring.group().clone(),
                normal: n,
            };
            for q_rep in q_ring.xorbit_reps() {
                let e_q = q_ring.idempotent(q_rep);
                let lhs = inf.apply(&e_q).map_err(|e| e.to_string())?;
                let rhs = idempotent_action::inflate(ring, &q_ring, &q.projection, q_rep);
                if lhs != rhs {
                    return Err("inf of an idempotent".into());
                }
            }
        }
        Ok(())
    }));

    out.push(check("idempotent_twist_scalar", || {
        let g = ring.group().clone();
        for lambda in fbr_core::fiber::enumerate_chars(&g, &g.all(), ring.fiber()) {
            let tw = Elementary::Tw {
                group: g.clone(),
                lambda: lambda.clone(),
            };
            for (rep, e) in reps.iter().zip(&idems) {
                let lhs = tw.apply(e).map_err(|e| e.to_string())?;
                let scalar = idempotent_action::twist_scalar(ring, &lambda, rep);
                if lhs != e.scale_cyclotomic(&scalar) {
                    return Err("tw of an idempotent".into());
                }
            }
        }
        Ok(())
    }));

    out.push(check("delta_intertwines_multiplication", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed2701);
        for _ in 0..2 {
            let x = random_element(ring, &mut rng);
            let y = random_element(ring, &mut rng);
            let lhs = delta(&x.mul(&y).map_err(|e| e.to_string())?);
            let rhs = delta(&x).compose(&delta(&y)).map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err("Delta(xy) != Delta(x) . Delta(y)".into());
            }
            let acted = delta(&x).act(&y).map_err(|e| e.to_string())?;
            if acted != x.mul(&y).map_err(|e| e.to_string())? {
                return Err("Delta(x) . y != x y".into());
            }
        }
        Ok(())
    }));

    out.push(check("perp_order_reversing", || {
        let dual = ring.dual_of_set(ring.members());
        for i in 0..lat.len() {
            for j in 0..lat.len() {
                if lat.leq(i, j) {
                    let pi = dual.perp(lat.subgroup(i));
                    let pj = dual.perp(lat.subgroup(j));
                    if !pj.iter().all(|x| pi.contains(x)) {
                        return Err("K <= L but L-perp not inside K-perp".into());
                    }
                }
            }
        }
        Ok(())
    }));

    if ring.fiber().is_cyclic() {
        out.push(check("coset_translation_of_characters", || {
            let dual = ring.dual_of_set(ring.members());
            let g = ring.group().clone();
            let o = fbr_core::fiber::o_subgroup(&dual);
            fbr_core::fiber::zeta_iso(&dual).map_err(|e| e.to_string())?;
            for i in 0..lat.len() {
                let k = lat.subgroup(i);
                let perp = dual.perp(k);
                let gens: Vec<u16> = k.iter().chain(o.iter()).collect();
                let ko = g.closure(&gens);
                for x in g.elements() {
                    let eps = fbr_core::fiber::zeta_char(&dual, x).map_err(|e| e.to_string())?;
                    if eps.is_trivial_on(&perp) != ko.contains(x) {
                        return Err("eps_g on K-perp disagrees with g in KO(G)".into());
                    }
                }
            }
            Ok(())
        }));
    }

    out.push(check("bpair_minimal_equals_full_scan", || {
        for p in &pairs {
            let quick = is_bpair(p, false).map_err(|e| e.to_string())?;
            let full = is_bpair(p, true).map_err(|e| e.to_string())?;
            if quick != full {
                return Err("minimal-normal test disagrees with full scan".into());
            }
        }
        Ok(())
    }));

    if strict {
        out.push(check("biset_identity_unit_laws", || {
            let fiber = ring.fiber().clone();
            let id = BisetElement::identity(ring.group().clone(), fiber);
            for b in ring.basis() {
                let x = ring.basis_element(b.clone());
                let acted = id.act(&x).map_err(|e| e.to_string())?;
                if acted != x {
                    return Err("identity biset does not act as identity".into());
                }
            }
            Ok(())
        }));
    }

    out
}
