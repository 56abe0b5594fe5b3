//! Integral ideals of a real quadratic field in Hermite normal form.
//!
//! An ideal is the Z-module aZ + (b + c w)Z with c | a, c | b and
//! 0 <= b < a; its norm is a c. Ideals are ordered by (norm, a, b, c), which
//! is the serialization order used throughout the crate.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{div_fast, egcd, rem_euclid_fast, exact_sqrt, factor, gcd, is_prime, isqrt, primes_up_to, sqrt_mod};
use crate::error::{Error, Result};
use crate::number_field::{FieldElement, QuadraticField};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[i64; 3]", try_from = "[i64; 3]")]
pub struct IdealHnf {
    a: i64,
    b: i64,
    c: i64,
}

impl IdealHnf {
    pub const UNIT: IdealHnf = IdealHnf { a: 1, b: 0, c: 1 };

    /// Checks the HNF shape only; use [`QuadraticField::ideal_from_hnf`] to
    /// also check closure under multiplication by w.
    pub fn from_triple(a: i64, b: i64, c: i64) -> Result<Self> {
        if a <= 0 || c <= 0 || b < 0 || b >= a || a % c != 0 || b % c != 0 {
            return Err(Error::InvalidArgument(format!("({a}, {b}, {c}) is not a canonical HNF")));
        }
        Ok(IdealHnf { a, b, c })
    }

    pub fn triple(&self) -> [i64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn norm(&self) -> u64 {
        (self.a * self.c) as u64
    }

    pub fn is_unit(&self) -> bool {
        *self == Self::UNIT
    }

    /// Largest rational integer n with I = n J for an integral J.
    pub fn content(&self) -> i64 {
        self.c
    }

    /// I / content(I).
    pub fn primitive_part(&self) -> IdealHnf {
        IdealHnf { a: self.a / self.c, b: self.b / self.c, c: 1 }
    }

    /// The ideal n I for a positive integer n.
    pub fn scale(&self, n: i64) -> IdealHnf {
        IdealHnf { a: self.a * n, b: self.b * n, c: self.c * n }
    }

    /// Whether x + y w lies in the module.
    pub fn contains(&self, x: i128, y: i128) -> bool {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        if y % c != 0 {
            return false;
        }
        let k = y / c;
        (x - k * b) % a == 0
    }
}

impl From<IdealHnf> for [i64; 3] {
    fn from(i: IdealHnf) -> Self {
        i.triple()
    }
}

impl TryFrom<[i64; 3]> for IdealHnf {
    type Error = Error;
    fn try_from(t: [i64; 3]) -> Result<Self> {
        IdealHnf::from_triple(t[0], t[1], t[2])
    }
}

impl Ord for IdealHnf {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.norm(), self.a, self.b, self.c).cmp(&(other.norm(), other.a, other.b, other.c))
    }
}

impl PartialOrd for IdealHnf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for IdealHnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}

impl fmt::Display for IdealHnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub ideal: IdealHnf,
    pub rational_prime: u64,
    pub residue_degree: u32,
    pub ramified: bool,
}

impl PrimeIdeal {
    pub fn norm(&self) -> u64 {
        self.ideal.norm()
    }
}

pub type Factorization = Vec<(PrimeIdeal, u32)>;

/// x + y w as a coordinate pair.
type Vec2 = (i128, i128);

/// HNF of the lattice spanned by `gens`; `None` unless it has rank 2.
fn hnf_from_gens(gens: &[Vec2]) -> Option<IdealHnf> {
    let mut pivot: Vec2 = (0, 0);
    let mut xs: i128 = 0;
    for &v in gens {
        if v.1 == 0 {
            xs = gcd(xs, v.0);
        } else if pivot.1 == 0 {
            pivot = v;
        } else {
            let (g, s, t) = egcd(pivot.1, v.1);
            let combined = (s * pivot.0 + t * v.0, g);
            let other_x = div_fast(v.1, g) * pivot.0 - div_fast(pivot.1, g) * v.0;
            xs = gcd(xs, other_x);
            pivot = combined;
        }
        if xs != 0 {
            pivot.0 = rem_euclid_fast(pivot.0, xs);
        }
    }
    if xs == 0 || pivot.1 == 0 {
        return None;
    }
    if pivot.1 < 0 {
        pivot = (-pivot.0, -pivot.1);
    }
    let (a, c) = (xs, pivot.1);
    let b = rem_euclid_fast(pivot.0, a);
    Some(IdealHnf { a: a.try_into().ok()?, b: b.try_into().ok()?, c: c.try_into().ok()? })
}

impl QuadraticField {
    fn elem_mul(&self, u: Vec2, v: Vec2) -> Vec2 {
        let (t, n) = self.omega_poly();
        let (t, n) = (t as i128, n as i128);
        let yy = u.1 * v.1;
        (u.0 * v.0 - n * yy, u.0 * v.1 + u.1 * v.0 + t * yy)
    }

    fn elem_norm(&self, u: Vec2) -> i128 {
        let (t, n) = self.omega_poly();
        u.0 * u.0 + t as i128 * u.0 * u.1 + n as i128 * u.1 * u.1
    }

    /// Parses an HNF triple and checks that it is an ideal (closed under w).
    pub fn ideal_from_hnf(&self, a: i64, b: i64, c: i64) -> Result<IdealHnf> {
        let i = IdealHnf::from_triple(a, b, c)?;
        let w = (0, 1);
        let (a, b, c) = (a as i128, b as i128, c as i128);
        let g1 = self.elem_mul(w, (a, 0));
        let g2 = self.elem_mul(w, (b, c));
        if i.contains(g1.0, g1.1) && i.contains(g2.0, g2.1) {
            Ok(i)
        } else {
            Err(Error::InvalidArgument(format!("{i} is not closed under multiplication by w")))
        }
    }

    /// The principal ideal (x + y w).
    pub fn principal_ideal(&self, x: i128, y: i128) -> Result<IdealHnf> {
        let g = (x, y);
        hnf_from_gens(&[g, self.elem_mul(g, (0, 1))]).ok_or(Error::ZeroIdeal)
    }

    pub fn principal_ideal_of(&self, e: &FieldElement) -> Result<IdealHnf> {
        let (x, y) = e
            .to_i128_pair()
            .ok_or_else(|| Error::InvalidArgument(format!("{e} is not a small algebraic integer")))?;
        self.principal_ideal(x, y)
    }

    /// The rational ideal (n).
    pub fn rational_ideal(&self, n: i64) -> IdealHnf {
        IdealHnf { a: n.abs(), b: 0, c: n.abs() }
    }

    pub fn ideal_mul(&self, i: &IdealHnf, j: &IdealHnf) -> IdealHnf {
        if i.is_unit() {
            return *j;
        }
        if j.is_unit() {
            return *i;
        }
        // (n) J = n J
        if i.b == 0 && i.a == i.c {
            return j.scale(i.a);
        }
        if j.b == 0 && j.a == j.c {
            return i.scale(j.a);
        }
        let gi = [(i.a as i128, 0), (i.b as i128, i.c as i128)];
        let gj = [(j.a as i128, 0), (j.b as i128, j.c as i128)];
        let gens = [
            self.elem_mul(gi[0], gj[0]),
            self.elem_mul(gi[0], gj[1]),
            self.elem_mul(gi[1], gj[0]),
            self.elem_mul(gi[1], gj[1]),
        ];
        let out = hnf_from_gens(&gens).expect("product of nonzero ideals is nonzero");
        debug_assert_eq!(out.norm(), i.norm() * j.norm());
        out
    }

    pub fn ideal_pow(&self, i: &IdealHnf, e: u32) -> IdealHnf {
        (0..e).fold(IdealHnf::UNIT, |acc, _| self.ideal_mul(&acc, i))
    }

    /// Galois conjugate ideal; I * conj(I) = (N(I)).
    pub fn ideal_conj(&self, i: &IdealHnf) -> IdealHnf {
        let (t, _) = self.omega_poly();
        let g2 = (i.b as i128 + i.c as i128 * t as i128, -(i.c as i128));
        hnf_from_gens(&[(i.a as i128, 0), g2]).expect("conjugate of a nonzero ideal")
    }

    /// K with J K = I, or `None` when J does not divide I.
    pub fn ideal_quotient(&self, i: &IdealHnf, j: &IdealHnf) -> Option<IdealHnf> {
        if j.is_unit() {
            return Some(*i);
        }
        self.quotient_via_conj(i, &self.ideal_conj(j), j.norm())
    }

    /// I / J given conj(J) and N(J), for repeated division by the same J:
    /// I/J = I conj(J) / N(J).
    pub(crate) fn quotient_via_conj(&self, i: &IdealHnf, j_conj: &IdealHnf, j_norm: u64) -> Option<IdealHnf> {
        let n = j_norm as i64;
        if i.norm() as i64 % n != 0 {
            return None;
        }
        let p = self.ideal_mul(i, j_conj);
        if p.a % n == 0 && p.b % n == 0 && p.c % n == 0 {
            Some(IdealHnf { a: p.a / n, b: p.b / n, c: p.c / n })
        } else {
            None
        }
    }

    pub fn divides(&self, j: &IdealHnf, i: &IdealHnf) -> bool {
        self.ideal_quotient(i, j).is_some()
    }

    /// The prime ideals above the rational prime l, in canonical order.
    pub fn primes_above(&self, l: u64) -> Result<Vec<PrimeIdeal>> {
        if !is_prime(l) {
            return Err(Error::NotPrime(l));
        }
        let (t, n) = self.omega_poly();
        let li = l as i64;
        // roots of X^2 - t X + n mod l
        let roots: Vec<i64> = if l == 2 {
            (0..2).filter(|r| (r * r - t * r + n).rem_euclid(2) == 0).collect()
        } else {
            let disc = (t * t - 4 * n).rem_euclid(li) as u64;
            match sqrt_mod(disc, l) {
                None => vec![],
                Some(s) => {
                    let inv2 = (li + 1) / 2;
                    let r1 = ((t + s as i64) % li * inv2).rem_euclid(li);
                    let r2 = ((t - s as i64) % li * inv2).rem_euclid(li);
                    if r1 == r2 {
                        vec![r1]
                    } else {
                        vec![r1, r2]
                    }
                }
            }
        };
        let prime_for = |r: i64, ramified: bool| PrimeIdeal {
            ideal: IdealHnf { a: li, b: (-r).rem_euclid(li), c: 1 },
            rational_prime: l,
            residue_degree: 1,
            ramified,
        };
        let mut out: Vec<PrimeIdeal> = match roots.len() {
            0 => vec![PrimeIdeal {
                ideal: self.rational_ideal(li),
                rational_prime: l,
                residue_degree: 2,
                ramified: false,
            }],
            1 => vec![prime_for(roots[0], true)],
            _ => roots.iter().map(|&r| prime_for(r, false)).collect(),
        };
        out.sort();
        Ok(out)
    }

    /// All prime ideals of norm <= bound, in canonical order.
    pub fn primes_up_to_norm(&self, bound: u64) -> Vec<PrimeIdeal> {
        let mut out: Vec<PrimeIdeal> = primes_up_to(bound)
            .into_iter()
            .flat_map(|l| self.primes_above(l).expect("sieved primes are prime"))
            .filter(|p| p.norm() <= bound)
            .collect();
        out.sort();
        out
    }

    pub fn factor_ideal(&self, i: &IdealHnf) -> Factorization {
        let mut cur = *i;
        let mut out = Vec::new();
        for (l, _) in factor(i.norm()) {
            for p in self.primes_above(l).expect("factor yields primes") {
                let mut e = 0;
                while let Some(q) = self.ideal_quotient(&cur, &p.ideal) {
                    cur = q;
                    e += 1;
                }
                if e > 0 {
                    out.push((p, e));
                }
            }
        }
        debug_assert!(cur.is_unit());
        out.sort();
        out
    }

    pub fn divisors_of(&self, i: &IdealHnf) -> Vec<IdealHnf> {
        let mut divs = vec![IdealHnf::UNIT];
        for (p, e) in self.factor_ideal(i) {
            let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
            for d in &divs {
                let mut cur = *d;
                next.push(cur);
                for _ in 0..e {
                    cur = self.ideal_mul(&cur, &p.ideal);
                    next.push(cur);
                }
            }
            divs = next;
        }
        divs.sort();
        divs
    }

    /// Every nonzero ideal of norm <= bound with its factorization, built as
    /// products of prime powers and sorted canonically.
    pub fn enumerate_factored(&self, bound: u64) -> Vec<(IdealHnf, Factorization)> {
        let primes = self.primes_up_to_norm(bound);
        let mut out = Vec::new();
        let mut stack: Factorization = Vec::new();
        fn walk(
            k: &QuadraticField,
            primes: &[PrimeIdeal],
            start: usize,
            cur: IdealHnf,
            bound: u64,
            stack: &mut Factorization,
            out: &mut Vec<(IdealHnf, Factorization)>,
        ) {
            out.push((cur, stack.clone()));
            for idx in start..primes.len() {
                let p = primes[idx];
                if cur.norm() * p.norm() > bound {
                    break;
                }
                let mut next = cur;
                let mut e = 0;
                while next.norm() * p.norm() <= bound {
                    next = k.ideal_mul(&next, &p.ideal);
                    e += 1;
                    stack.push((p, e));
                    walk(k, primes, idx + 1, next, bound, stack, out);
                    stack.pop();
                }
            }
        }
        walk(self, &primes, 0, IdealHnf::UNIT, bound, &mut stack, &mut out);
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    pub fn enumerate_ideals(&self, bound: u64) -> Vec<IdealHnf> {
        self.enumerate_factored(bound).into_iter().map(|(i, _)| i).collect()
    }

    /// A totally positive generator of I, if I is narrowly principal.
    ///
    /// Bound: let u+ > 1 be the smallest totally positive unit. Multiplying a
    /// totally positive generator by powers of u+ scales the ratio of its
    /// embeddings by u+^2, so some generator a has a1/a2 in [1, u+^2). With
    /// a1 a2 = N(I) = n this gives 0 < a2 <= sqrt n <= a1 < sqrt(n) u+, so
    /// |a1 - a2| < sqrt(n) u+. Since |a1 - a2| = |y| sqrt D (times 2 when
    /// w = sqrt D), every such generator has |y| < (isqrt(n) + 1) ceil(u+).
    pub fn is_narrowly_principal(&self, i: &IdealHnf) -> Option<FieldElement> {
        let ybound = self.principal_search_bound(i.norm());
        self.search_generator(i, ybound)
    }

    pub(crate) fn principal_search_bound(&self, n: u64) -> i128 {
        let up = self.totally_positive_unit();
        let ceil_up = self.floor_embedding(&up) + BigInt::from(1);
        let ceil_up = ceil_up.to_i128().expect("unit fits in i128 at desk scale");
        (isqrt(n as u128) as i128 + 1) * ceil_up
    }

    /// Scans generators x + y w of I with |y| <= ybound, total positivity and
    /// norm N(I). Deterministic: smallest |y| first, then y >= 0 first.
    pub fn search_generator(&self, i: &IdealHnf, ybound: i128) -> Option<FieldElement> {
        if i.is_unit() {
            return Some(FieldElement::from_int(1));
        }
        let n = i.norm() as i128;
        let d = self.d() as i128;
        let (t, _) = self.omega_poly();
        let c = i.c as i128;
        // y must be a multiple of c for x + y w to lie in I
        let mut j: i128 = 0;
        while j * c <= ybound {
            for y in if j == 0 { vec![0] } else { vec![j * c, -j * c] } {
                let x = if t == 0 {
                    // x^2 - D y^2 = n with x > 0
                    exact_sqrt(n + d * y * y)
                } else {
                    // (2x + y)^2 - D y^2 = 4n with 2x + y > 0
                    exact_sqrt(4 * n + d * y * y).and_then(|s| {
                        let twice = s - y;
                        (twice % 2 == 0).then_some(twice / 2)
                    })
                };
                if let Some(x) = x {
                    if i.contains(x, y) {
                        debug_assert_eq!(self.elem_norm((x, y)), n);
                        return Some(FieldElement::integral(x, y));
                    }
                }
            }
            j += 1;
        }
        None
    }

    /// I ~ J in the narrow class group, tested as principality of I conj(J).
    pub fn narrowly_equivalent(&self, i: &IdealHnf, j: &IdealHnf) -> bool {
        let prod = self.ideal_mul(&i.primitive_part(), &self.ideal_conj(&j.primitive_part()));
        self.is_narrowly_principal(&prod.primitive_part()).is_some()
    }
}
