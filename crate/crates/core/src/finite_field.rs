//! Arithmetic in the finite field F_{p^m}.
//!
//! Elements are packed into a `u32` holding the base-p digits of the
//! coefficient vector (constant term in the least significant digit), so an
//! element is `Copy` and all arithmetic goes through its [`GfContext`].
//! Fields with at most 2^22 elements get log/antilog tables.

use std::fmt;
use std::sync::Arc;

use crate::arith::{factor, is_prime};
use crate::error::{Error, Result};

const TABLE_LIMIT: u64 = 1 << 22;
const SEARCH_LIMIT: u64 = 1_000_000;

/// An element of some F_{p^m}; meaningless without its context.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf(u32);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The packed base-p encoding.
    pub fn raw(self) -> u32 {
        self.0
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

pub struct GfContext {
    p: u64,
    m: u32,
    size: u64,
    /// Monic modulus, least-significant coefficient first, length m + 1.
    modulus: Vec<u64>,
    tables: Option<Tables>,
    generator: Gf,
}

impl fmt::Debug for GfContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GfContext")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for GfContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for GfContext {}

/// Outcome of solving X^2 - lambda X + eps = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticRoots {
    /// `first <= second` in packed order; `double` iff they coincide.
    Split { first: Gf, second: Gf, double: bool },
    /// No root in this field; the roots live in the degree-`.0` field.
    NeedsExtension(u32),
}

impl GfContext {
    /// Builds F_{p^m} with the lexicographically smallest monic irreducible
    /// modulus of degree m (for m = 1 the modulus is X).
    pub fn new(p: u64, m: u32) -> Result<Arc<GfContext>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("extension degree must be >= 1".into()));
        }
        let size = p
            .checked_pow(m)
            .filter(|&s| s < (1u64 << 31))
            .ok_or_else(|| Error::InvalidArgument(format!("field {p}^{m} too large")))?;
        let modulus = canonical_modulus(p, m);
        let mut ctx = GfContext { p, m, size, modulus, tables: None, generator: Gf::ONE };
        ctx.generator = ctx.find_generator();
        if m > 1 && size <= TABLE_LIMIT {
            let n = (size - 1) as usize;
            let mut exp = vec![0u32; n];
            let mut log = vec![0u32; size as usize];
            let mut x = Gf::ONE;
            for (i, slot) in exp.iter_mut().enumerate() {
                *slot = x.0;
                log[x.0 as usize] = i as u32;
                x = ctx.mul_slow(x, ctx.generator);
            }
            ctx.tables = Some(Tables { exp, log });
        }
        Ok(Arc::new(ctx))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Fixed primitive element: the smallest element in packed order whose
    /// multiplicative order is `size - 1`.
    pub fn generator(&self) -> Gf {
        self.generator
    }

    pub fn zero(&self) -> Gf {
        Gf::ZERO
    }

    pub fn one(&self) -> Gf {
        Gf::ONE
    }

    pub fn from_i64(&self, v: i64) -> Gf {
        Gf(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_u64(&self, v: u64) -> Gf {
        Gf((v % self.p) as u32)
    }

    /// Coefficients, least significant first, always of length m.
    pub fn coeffs(&self, a: Gf) -> Vec<u64> {
        let mut v = a.0 as u64;
        (0..self.m)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<Gf> {
        if coeffs.len() > self.m as usize {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a degree-{} field",
                coeffs.len(),
                self.m
            )));
        }
        let mut v = 0u64;
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(Error::InvalidArgument(format!("coefficient {c} not reduced mod {}", self.p)));
            }
            v = v * self.p + c;
        }
        Ok(Gf(v as u32))
    }

    /// Element with packed index `i` (0 <= i < size), for exhaustive loops.
    pub fn element(&self, i: u64) -> Gf {
        debug_assert!(i < self.size);
        Gf(i as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> + '_ {
        (0..self.size).map(|i| Gf(i as u32))
    }

    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        if self.m == 1 {
            let s = a.0 as u64 + b.0 as u64;
            return Gf((if s >= self.p { s - self.p } else { s }) as u32);
        }
        self.digitwise(a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        if self.m == 1 {
            let (x, y) = (a.0 as u64, b.0 as u64);
            return Gf((if x >= y { x - y } else { x + self.p - y }) as u32);
        }
        self.digitwise(a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn neg(&self, a: Gf) -> Gf {
        self.sub(Gf::ZERO, a)
    }

    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.is_zero() || b.is_zero() {
            return Gf::ZERO;
        }
        if self.m == 1 {
            return Gf(((a.0 as u64 * b.0 as u64) % self.p) as u32);
        }
        match &self.tables {
            Some(t) => {
                let n = (self.size - 1) as usize;
                let k = (t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize) % n;
                Gf(t.exp[k])
            }
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, a: Gf, mut e: u64) -> Gf {
        let mut base = a;
        let mut acc = Gf::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Gf) -> Option<Gf> {
        if a.is_zero() {
            return None;
        }
        if let Some(t) = &self.tables {
            let n = (self.size - 1) as u32;
            let l = t.log[a.0 as usize];
            return Some(Gf(t.exp[((n - l) % n) as usize]));
        }
        Some(self.pow(a, self.size - 2))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Option<Gf> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn multiplicative_order(&self, a: Gf) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        let mut order = self.size - 1;
        for (l, _) in factor(self.size - 1) {
            while order % l == 0 && self.pow(a, order / l) == Gf::ONE {
                order /= l;
            }
        }
        Some(order)
    }

    /// The element generator^((q-1)/e), of exact order e.
    pub fn root_of_unity(&self, e: u64) -> Result<Gf> {
        if e == 0 || (self.size - 1) % e != 0 {
            return Err(Error::InvalidArgument(format!(
                "no element of order {e} in a field of size {}",
                self.size
            )));
        }
        Ok(self.pow(self.generator, (self.size - 1) / e))
    }

    /// A square root of `a`, if one exists in this field.
    pub fn sqrt(&self, a: Gf) -> Option<Gf> {
        if a.is_zero() {
            return Some(Gf::ZERO);
        }
        if self.size <= SEARCH_LIMIT {
            return self.elements().find(|&r| self.mul(r, r) == a);
        }
        if self.p == 2 {
            return Some(self.pow(a, self.size / 2));
        }
        if self.pow(a, (self.size - 1) / 2) != Gf::ONE {
            return None;
        }
        if self.size % 4 == 3 {
            return Some(self.pow(a, (self.size + 1) / 4));
        }
        // Tonelli-Shanks with the primitive element as non-residue.
        let mut q = self.size - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut c = self.pow(self.generator, q);
        let mut x = self.pow(a, (q + 1) / 2);
        let mut t = self.pow(a, q);
        let mut m = s;
        while t != Gf::ONE {
            let mut i = 0u32;
            let mut tt = t;
            while tt != Gf::ONE {
                tt = self.mul(tt, tt);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            x = self.mul(x, b);
            c = self.mul(b, b);
            t = self.mul(t, c);
            m = i;
        }
        Some(x)
    }

    /// Roots of X^2 - lambda X + eps.
    pub fn quadratic_roots(&self, lambda: Gf, eps: Gf) -> Result<QuadraticRoots> {
        if eps.is_zero() {
            return Err(Error::InvalidArgument(
                "constant term of X^2 - lambda X + eps must be nonzero".into(),
            ));
        }
        let eval = |x: Gf| self.add(self.sub(self.mul(x, x), self.mul(lambda, x)), eps);
        let root = if self.size <= SEARCH_LIMIT || self.p == 2 {
            self.elements().find(|&x| eval(x).is_zero())
        } else {
            let four = self.from_u64(4);
            let two_inv = self.inv(self.from_u64(2)).expect("p odd");
            let disc = self.sub(self.mul(lambda, lambda), self.mul(four, eps));
            self.sqrt(disc).map(|r| self.mul(self.add(lambda, r), two_inv))
        };
        Ok(match root {
            None => QuadraticRoots::NeedsExtension(2 * self.m),
            Some(r) => {
                let other = self.sub(lambda, r);
                let (first, second) = if r <= other { (r, other) } else { (other, r) };
                QuadraticRoots::Split { first, second, double: first == second }
            }
        })
    }

    pub fn display(&self, a: Gf) -> String {
        if self.m == 1 {
            return a.0.to_string();
        }
        let terms: Vec<String> = self
            .coeffs(a)
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => c.to_string(),
                1 if c == 1 => "z".to_string(),
                1 => format!("{c}z"),
                _ if c == 1 => format!("z^{i}"),
                _ => format!("{c}z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    fn digitwise(&self, a: Gf, b: Gf, op: impl Fn(u64, u64) -> u64) -> Gf {
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.m {
            out += op(x % self.p, y % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Gf(out as u32)
    }

    fn mul_slow(&self, a: Gf, b: Gf) -> Gf {
        let prod = poly_mulmod(&self.coeffs(a), &self.coeffs(b), &self.modulus, self.p);
        let mut v = 0u64;
        for &c in prod.iter().rev() {
            v = v * self.p + c;
        }
        Gf(v as u32)
    }

    fn find_generator(&self) -> Gf {
        let n = self.size - 1;
        let primes: Vec<u64> = factor(n).into_iter().map(|(l, _)| l).collect();
        let pow_slow = |a: Gf, mut e: u64| {
            let (mut base, mut acc) = (a, Gf::ONE);
            while e > 0 {
                if e & 1 == 1 {
                    acc = self.mul_slow(acc, base);
                }
                base = self.mul_slow(base, base);
                e >>= 1;
            }
            acc
        };
        (1..self.size)
            .map(|i| Gf(i as u32))
            .find(|&g| primes.iter().all(|&l| pow_slow(g, n / l) != Gf::ONE))
            .expect("multiplicative group of a finite field is cyclic")
    }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = crate::arith::pow_mod(m[dm], p - 2, p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let coef = r[dr] * lead_inv % p;
        for i in 0..=dm {
            let idx = dr - dm + i;
            r[idx] = (r[idx] + p - coef * m[i] % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin-style test: f of degree m is irreducible iff gcd(X^{p^i} - X, f) = 1
/// for all 1 <= i <= m/2.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m <= 1 {
        return m == 1;
    }
    let mut xpow = poly_rem(&[0, 1], f, p);
    for _ in 1..=m / 2 {
        // xpow <- xpow^p mod f
        let mut acc = vec![1u64];
        let mut base = xpow.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        xpow = acc;
        let mut diff = xpow.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(f, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree m, comparing
/// coefficient vectors from X^{m-1} down to X^0.
fn canonical_modulus(p: u64, m: u32) -> Vec<u64> {
    let m = m as usize;
    if m == 1 {
        return vec![0, 1];
    }
    let total = p.pow(m as u32);
    for idx in 0..total {
        // digits of idx, most significant first, give a_{m-1}, ..., a_0
        let mut f = vec![0u64; m + 1];
        let mut v = idx;
        for slot in f.iter_mut().take(m) {
            *slot = v % p;
            v /= p;
        }
        f[m] = 1;
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}
