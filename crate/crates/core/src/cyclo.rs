//! Exact arithmetic: arbitrary-precision rationals, fractions mod 1, and
//! cyclotomic numbers in canonical power-basis form.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for all ring coefficients.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Render a rational as the "p/q" string used in all JSON output.
pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A fraction in `[0, 1)` representing an element of Q/Z; encodes the
/// exponent of a root of unity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FracMod1 {
    num: u64,
    den: u64,
}

impl FracMod1 {
    pub const ZERO: FracMod1 = FracMod1 { num: 0, den: 1 };

    /// Reduce `num/den` modulo 1. `den` must be nonzero.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let num = num % den;
        let g = num.gcd(&den);
        FracMod1 {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Multiplicative order of the corresponding root of unity.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn add(&self, other: &FracMod1) -> FracMod1 {
        let den = self.den.lcm(&other.den);
        let num = self.num * (den / self.den) + other.num * (den / other.den);
        FracMod1::new(num, den)
    }

    pub fn neg(&self) -> FracMod1 {
        if self.num == 0 {
            *self
        } else {
            FracMod1 {
                num: self.den - self.num,
                den: self.den,
            }
        }
    }

    /// `k` times self in Q/Z.
    pub fn scale(&self, k: u64) -> FracMod1 {
        FracMod1::new((k % self.den) * self.num, self.den)
    }

    pub fn as_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

impl PartialOrd for FracMod1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FracMod1 {
    fn cmp(&self, other: &Self) -> Ordering {
        // reduced fractions: compare num/den exactly via cross multiplication
        let lhs = (self.num as u128) * (other.den as u128);
        let rhs = (other.num as u128) * (self.den as u128);
        lhs.cmp(&rhs)
    }
}

impl fmt::Debug for FracMod1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Display for FracMod1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

// Cache of cyclotomic polynomials, keyed by conductor. Coefficients are
// integers, leading coefficient 1, degree phi(n).
static POLY_CACHE: RwLock<Option<HashMap<u32, Arc<Vec<BigInt>>>>> = RwLock::new(None);

/// Coefficients of the n-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<BigInt>> {
    if let Some(map) = POLY_CACHE.read().unwrap().as_ref() {
        if let Some(p) = map.get(&n) {
            return Arc::clone(p);
        }
    }
    let poly = Arc::new(compute_cyclotomic_polynomial(n));
    let mut guard = POLY_CACHE.write().unwrap();
    guard
        .get_or_insert_with(HashMap::new)
        .entry(n)
        .or_insert_with(|| Arc::clone(&poly));
    poly
}

fn compute_cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    if n == 1 {
        // x - 1
        return vec![BigInt::from(-1), BigInt::from(1)];
    }
    // (x^n - 1) / prod_{d | n, d < n} Phi_d(x), exact integer division
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in divisors(n as u64) {
        if (d as u32) < n {
            let phi_d = cyclotomic_polynomial(d as u32);
            num = int_poly_div_exact(&num, &phi_d);
        }
    }
    num
}

// Exact division of integer polynomials (divisor monic), constant term first.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (0..=dn - dd).rev() {
        let c = rem[i + dd].clone();
        quot[i] = c.clone();
        if !c.is_zero() {
            for j in 0..=dd {
                rem[i + j] -= &c * &den[j];
            }
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

/// Cyclotomic number: element of Q(zeta_n) in the power basis
/// `1, zeta, ..., zeta^(phi(n)-1)` reduced modulo the n-th cyclotomic
/// polynomial. The stored conductor is kept as given; equality lifts both
/// operands to the lcm conductor.
#[derive(Clone)]
pub struct Cyclotomic {
    conductor: u32,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic {
            conductor: 1,
            coeffs: vec![Rational::zero()],
        }
    }

    pub fn one() -> Self {
        Cyclotomic {
            conductor: 1,
            coeffs: vec![Rational::one()],
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        Cyclotomic {
            conductor: 1,
            coeffs: vec![r],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Cyclotomic::from_rational(rat_int(n))
    }

    /// The root of unity `zeta_b^a` for the fraction `a/b`, embedded at
    /// conductor `b`.
    pub fn root_of_unity(t: FracMod1) -> Self {
        let n = t.denom() as u32;
        let deg = euler_phi(n as u64) as usize;
        let mut poly = vec![Rational::zero(); t.numer() as usize + 1];
        poly[t.numer() as usize] = Rational::one();
        let coeffs = reduce_mod_cyclotomic(poly, n, deg);
        Cyclotomic {
            conductor: n,
            coeffs,
        }
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Rational content if the element lies in Q (canonical form makes this
    /// a coefficient check).
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-embed at conductor `n`; `self.conductor` must divide `n`.
    pub fn lift(&self, n: u32) -> Cyclotomic {
        assert!(
            n.is_multiple_of(self.conductor),
            "conductor must divide target"
        );
        if n == self.conductor {
            return self.clone();
        }
        let step = (n / self.conductor) as usize;
        let deg = euler_phi(n as u64) as usize;
        let mut poly = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                poly[i * step] = c.clone();
            }
        }
        let coeffs = reduce_mod_cyclotomic(poly, n, deg);
        Cyclotomic {
            conductor: n,
            coeffs,
        }
    }

    fn lift_common(&self, other: &Cyclotomic) -> (Cyclotomic, Cyclotomic) {
        let n = (self.conductor as u64).lcm(&(other.conductor as u64)) as u32;
        (self.lift(n), other.lift(n))
    }

    pub fn add(&self, other: &Cyclotomic) -> Cyclotomic {
        if self.conductor == other.conductor {
            let coeffs = self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect();
            return Cyclotomic {
                conductor: self.conductor,
                coeffs,
            };
        }
        let (a, b) = self.lift_common(other);
        a.add(&b)
    }

    pub fn neg(&self) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Cyclotomic) -> Cyclotomic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
        let (a, b) = if self.conductor == other.conductor {
            (self.clone(), other.clone())
        } else {
            self.lift_common(other)
        };
        let n = a.conductor;
        let deg = euler_phi(n as u64) as usize;
        let mut poly = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.coeffs.iter().enumerate() {
                if !cb.is_zero() {
                    poly[i + j] += ca * cb;
                }
            }
        }
        let coeffs = reduce_mod_cyclotomic(poly, n, deg);
        Cyclotomic {
            conductor: n,
            coeffs,
        }
    }

    pub fn scale(&self, r: &Rational) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// the cyclotomic polynomial.
    pub fn inv(&self) -> Result<Cyclotomic> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.conductor;
        let deg = euler_phi(n as u64) as usize;
        let phi: Vec<Rational> = cyclotomic_polynomial(n)
            .iter()
            .map(|c| Rational::from(c.clone()))
            .collect();
        // Extended gcd of (self, Phi_n) over Q[x]; Phi_n is irreducible, so
        // the gcd is a nonzero constant g with s*self + t*Phi = g.
        let (g, s) = poly_ext_gcd(&self.coeffs, &phi);
        let ginv = {
            assert!(poly_deg(&g) == Some(0), "gcd with Phi_n must be constant");
            g[0].recip()
        };
        let scaled: Vec<Rational> = s.iter().map(|c| c * &ginv).collect();
        let coeffs = reduce_mod_cyclotomic(scaled, n, deg);
        Ok(Cyclotomic {
            conductor: n,
            coeffs,
        })
    }

    pub fn div(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "conductor": self.conductor,
            "coeffs": self.coeffs.iter().map(rational_string).collect::<Vec<_>>(),
        })
    }
}

fn poly_deg(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

// Returns (gcd, s) with s*a + t*b = gcd for some t (t is not needed).
fn poly_ext_gcd(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut s0 = vec![Rational::one()];
    let mut s1 = vec![Rational::zero()];
    while poly_deg(&r1).is_some() {
        let (q, r) = poly_div_rem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    (r0, s0)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![Rational::zero()];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if !cb.is_zero() {
                out[i + j] += ca * cb;
            }
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let len = a.len().max(b.len());
    let mut out = vec![Rational::zero(); len];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    out
}

fn poly_div_rem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let db = poly_deg(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut rem = a.to_vec();
    let da = match poly_deg(&rem) {
        Some(d) if d >= db => d,
        _ => return (vec![Rational::zero()], rem),
    };
    let mut quot = vec![Rational::zero(); da - db + 1];
    for i in (0..=da - db).rev() {
        let c = &rem[i + db] / &lead;
        if !c.is_zero() {
            quot[i] = c.clone();
            for j in 0..=db {
                let t = &c * &b[j];
                rem[i + j] -= t;
            }
        }
    }
    (quot, rem)
}

// Reduce a polynomial in zeta_n modulo Phi_n and truncate/pad to phi(n).
fn reduce_mod_cyclotomic(mut poly: Vec<Rational>, n: u32, deg: usize) -> Vec<Rational> {
    if poly.len() > deg {
        let phi = cyclotomic_polynomial(n);
        let phi_deg = phi.len() - 1;
        debug_assert_eq!(phi_deg, deg);
        for i in (deg..poly.len()).rev() {
            if poly[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut poly[i], Rational::zero());
            // x^i = x^(i-deg) * (x^deg - Phi_n(x)) since Phi_n is monic
            for (j, pj) in phi.iter().enumerate().take(phi_deg) {
                if !pj.is_zero() {
                    let t = &c * &Rational::from(pj.clone());
                    poly[i - deg + j] -= t;
                }
            }
        }
    }
    poly.truncate(deg);
    while poly.len() < deg {
        poly.push(Rational::zero());
    }
    poly
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.lift_common(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{}", c)?;
            } else if c.is_one() {
                write!(f, "z{}^{}", self.conductor, i)?;
            } else {
                write!(f, "{}*z{}^{}", c, self.conductor, i)?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        Cyclotomic::add(self, rhs)
    }
}

impl std::ops::Sub for &Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        Cyclotomic::sub(self, rhs)
    }
}

impl std::ops::Mul for &Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        Cyclotomic::mul(self, rhs)
    }
}

impl std::ops::Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi_values() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(2), 1);
        assert_eq!(euler_phi(6), 2);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(24), 8);
    }

    #[test]
    fn cyclotomic_polynomials_small() {
        // Phi_1 = x - 1, Phi_2 = x + 1, Phi_3 = x^2 + x + 1, Phi_4 = x^2 + 1,
        // Phi_6 = x^2 - x + 1
        let p = |n: u32| -> Vec<i64> {
            cyclotomic_polynomial(n)
                .iter()
                .map(|c| i64::try_from(c).unwrap())
                .collect()
        };
        assert_eq!(p(1), vec![-1, 1]);
        assert_eq!(p(2), vec![1, 1]);
        assert_eq!(p(3), vec![1, 1, 1]);
        assert_eq!(p(4), vec![1, 0, 1]);
        assert_eq!(p(6), vec![1, -1, 1]);
        assert_eq!(p(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn minus_one_at_conductor_two() {
        let z = Cyclotomic::root_of_unity(FracMod1::new(1, 2));
        assert_eq!(z, Cyclotomic::from_int(-1));
        assert_eq!(z.coeffs(), &[rat_int(-1)]);
    }

    #[test]
    fn primitive_cube_roots_sum() {
        let a = Cyclotomic::root_of_unity(FracMod1::new(1, 3));
        let b = Cyclotomic::root_of_unity(FracMod1::new(2, 3));
        assert_eq!(a.add(&b), Cyclotomic::from_int(-1));
    }

    #[test]
    fn full_root_sums_vanish() {
        for n in 2..=8u64 {
            let mut acc = Cyclotomic::zero();
            for a in 0..n {
                acc = acc.add(&Cyclotomic::root_of_unity(FracMod1::new(a, n)));
            }
            assert!(acc.is_zero(), "sum of all {n}-th roots of unity");
        }
    }

    #[test]
    fn embedding_consistency_across_conductors() {
        let r = Cyclotomic::from_rational(rat(7, 3));
        for n in [2u32, 4, 6, 12] {
            assert_eq!(r.lift(n), r);
        }
    }

    #[test]
    fn root_products() {
        let z6 = Cyclotomic::root_of_unity(FracMod1::new(1, 6));
        let z3 = Cyclotomic::root_of_unity(FracMod1::new(1, 3));
        assert_eq!(z6.mul(&z6), z3);
        // zeta_6^3 = -1
        assert_eq!(z6.mul(&z6).mul(&z6), Cyclotomic::from_int(-1));
    }

    #[test]
    fn inversion_of_zero_fails() {
        assert!(Cyclotomic::zero().inv().is_err());
    }

    #[test]
    fn frac_mod1_arithmetic() {
        let a = FracMod1::new(1, 2);
        let b = FracMod1::new(2, 3);
        assert_eq!(a.add(&b), FracMod1::new(1, 6));
        assert_eq!(a.add(&a), FracMod1::ZERO);
        assert_eq!(b.neg(), FracMod1::new(1, 3));
        assert_eq!(b.scale(3), FracMod1::ZERO);
    }

    fn arb_cyclotomic(max_conductor: u64) -> impl Strategy<Value = Cyclotomic> {
        (
            2..=max_conductor,
            proptest::collection::vec((-4i64..=4, 1i64..=3), 1..4),
        )
            .prop_map(|(n, terms)| {
                let mut acc = Cyclotomic::zero();
                for (i, (num, den)) in terms.into_iter().enumerate() {
                    let root = Cyclotomic::root_of_unity(FracMod1::new(i as u64 + 1, n));
                    acc = acc.add(&root.scale(&rat(num, den)));
                }
                acc
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in arb_cyclotomic(24), b in arb_cyclotomic(24), c in arb_cyclotomic(24)) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn inverse_roundtrip(a in arb_cyclotomic(12)) {
            if !a.is_zero() {
                let inv = a.inv().unwrap();
                prop_assert_eq!(a.mul(&inv), Cyclotomic::one());
            }
        }
    }
}
