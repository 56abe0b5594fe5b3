//! Exact arithmetic in a real quadratic field Q(sqrt D).
//!
//! Elements are stored in the integral basis {1, w} with
//! w = (1 + sqrt D)/2 when D = 1 mod 4 and w = sqrt D otherwise. The first
//! real embedding sends sqrt D to the positive root. Nothing here touches
//! floating point.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::is_squarefree;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaKind {
    /// w = sqrt D (D = 2, 3 mod 4).
    Sqrt,
    /// w = (1 + sqrt D)/2 (D = 1 mod 4).
    HalfInteger,
}

/// (x + y w) / den with den > 0 and gcd(x, y, den) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    x: BigInt,
    y: BigInt,
    den: BigInt,
}

impl FieldElement {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (x, y, den) = (x.into(), y.into(), den.into());
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Self::canonical(x, y, den))
    }

    pub fn integral(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        FieldElement { x: x.into(), y: y.into(), den: BigInt::one() }
    }

    pub fn from_int(x: impl Into<BigInt>) -> Self {
        Self::integral(x, 0)
    }

    fn canonical(mut x: BigInt, mut y: BigInt, mut den: BigInt) -> Self {
        if den.is_negative() {
            x = -x;
            y = -y;
            den = -den;
        }
        let g = x.gcd(&y).gcd(&den);
        if !g.is_zero() && !g.is_one() {
            x /= &g;
            y /= &g;
            den /= &g;
        }
        FieldElement { x, y, den }
    }

    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    /// Integral coordinates as machine integers, if they fit.
    pub fn to_i128_pair(&self) -> Option<(i128, i128)> {
        use num_traits::ToPrimitive;
        if !self.is_integral() {
            return None;
        }
        Some((self.x.to_i128()?, self.y.to_i128()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticField {
    d: i64,
    disc: i64,
    omega: OmegaKind,
    fundamental_unit: FieldElement,
    unit_norm: i32,
}

impl QuadraticField {
    /// Q(sqrt D) for squarefree D > 1, with its fundamental unit found from
    /// the continued fraction of w.
    pub fn new(d: i64) -> Result<Self> {
        if d <= 1 || !is_squarefree(d as u64) {
            return Err(Error::InvalidDiscriminant(d));
        }
        let (omega, disc) = if d.rem_euclid(4) == 1 {
            (OmegaKind::HalfInteger, d)
        } else {
            (OmegaKind::Sqrt, 4 * d)
        };
        let mut field = QuadraticField {
            d,
            disc,
            omega,
            fundamental_unit: FieldElement::from_int(1),
            unit_norm: 1,
        };
        let u = field.unit_from_continued_fraction();
        field.unit_norm = if field.norm(&u).is_positive() { 1 } else { -1 };
        field.fundamental_unit = u;
        Ok(field)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn omega_kind(&self) -> OmegaKind {
        self.omega
    }

    /// w^2 = t w - n; returns (t, n) = (trace, norm) of w.
    pub fn omega_poly(&self) -> (i64, i64) {
        match self.omega {
            OmegaKind::Sqrt => (0, -self.d),
            OmegaKind::HalfInteger => (1, (1 - self.d) / 4),
        }
    }

    pub fn fundamental_unit(&self) -> &FieldElement {
        &self.fundamental_unit
    }

    pub fn unit_norm(&self) -> i32 {
        self.unit_norm
    }

    /// Smallest totally positive unit > 1: u if N(u) = 1, else u^2.
    pub fn totally_positive_unit(&self) -> FieldElement {
        if self.unit_norm == 1 {
            self.fundamental_unit.clone()
        } else {
            self.mul(&self.fundamental_unit, &self.fundamental_unit)
        }
    }

    /// Minkowski bound sqrt(disc)/2, rounded up.
    pub fn minkowski_bound(&self) -> u64 {
        let disc = self.disc as u128;
        // smallest b with 4 b^2 >= disc
        let mut b = crate::arith::isqrt(disc) / 2;
        while 4 * b * b < disc {
            b += 1;
        }
        b as u64
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement::canonical(
            &a.x * &b.den + &b.x * &a.den,
            &a.y * &b.den + &b.y * &a.den,
            &a.den * &b.den,
        )
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement { x: -&a.x, y: -&a.y, den: a.den.clone() }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let (t, n) = self.omega_poly();
        let yy = &a.y * &b.y;
        let x = &a.x * &b.x - &yy * n;
        let y = &a.x * &b.y + &a.y * &b.x + &yy * t;
        FieldElement::canonical(x, y, &a.den * &b.den)
    }

    pub fn pow(&self, a: &FieldElement, e: u32) -> FieldElement {
        (0..e).fold(FieldElement::from_int(1), |acc, _| self.mul(&acc, a))
    }

    /// Image under sqrt D -> -sqrt D.
    pub fn conj(&self, a: &FieldElement) -> FieldElement {
        let (t, _) = self.omega_poly();
        FieldElement::canonical(&a.x + &a.y * t, -&a.y, a.den.clone())
    }

    pub fn norm(&self, a: &FieldElement) -> BigRational {
        let (t, n) = self.omega_poly();
        let num = &a.x * &a.x + &a.x * &a.y * t + &a.y * &a.y * n;
        BigRational::new(num, &a.den * &a.den)
    }

    pub fn trace(&self, a: &FieldElement) -> BigRational {
        let (t, _) = self.omega_poly();
        BigRational::new(BigInt::from(2) * &a.x + &a.y * t, a.den.clone())
    }

    pub fn inverse(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::InvalidArgument("inverse of zero".into()));
        }
        let nm = self.norm(a);
        let c = self.conj(a);
        // a^{-1} = conj(a) / N(a)
        Ok(FieldElement::canonical(
            &c.x * nm.denom(),
            &c.y * nm.denom(),
            &c.den * nm.numer(),
        ))
    }

    /// (X, Y, E) with a = (X + Y sqrt D) / E.
    fn sqrt_coords(&self, a: &FieldElement) -> (BigInt, BigInt, BigInt) {
        match self.omega {
            OmegaKind::Sqrt => (a.x.clone(), a.y.clone(), a.den.clone()),
            OmegaKind::HalfInteger => {
                (BigInt::from(2) * &a.x + &a.y, a.y.clone(), BigInt::from(2) * &a.den)
            }
        }
    }

    /// Sign of X + Y sqrt D, decided by comparing X^2 with D Y^2.
    fn sign_of(&self, x: &BigInt, y: &BigInt) -> i32 {
        let sx = sign(x);
        let sy = sign(y);
        if sy == 0 {
            return sx;
        }
        if sx == 0 || sx == sy {
            return sy;
        }
        let lhs = x * x;
        let rhs = y * y * self.d;
        if lhs > rhs {
            sx
        } else {
            sy
        }
    }

    /// Signs of the two real embeddings (first: sqrt D > 0).
    pub fn embedding_signs(&self, a: &FieldElement) -> (i32, i32) {
        let (x, y, _) = self.sqrt_coords(a);
        (self.sign_of(&x, &y), self.sign_of(&x, &(-&y)))
    }

    pub fn is_totally_positive(&self, a: &FieldElement) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::InvalidArgument("total positivity of zero".into()));
        }
        Ok(self.embedding_signs(a) == (1, 1))
    }

    /// Floor of the first real embedding.
    pub fn floor_embedding(&self, a: &FieldElement) -> BigInt {
        let (x, y, e) = self.sqrt_coords(a);
        let s = (&y * &y * self.d).sqrt();
        let floor_ysqrt = if y.is_negative() {
            if &s * &s == &y * &y * self.d {
                -s
            } else {
                -s - 1
            }
        } else {
            s
        };
        (x + floor_ysqrt).div_floor(&e)
    }

    /// Compares the first real embeddings of a and b.
    pub fn cmp_embedding(&self, a: &FieldElement, b: &FieldElement) -> std::cmp::Ordering {
        let d = self.sub(a, b);
        let (x, y, _) = self.sqrt_coords(&d);
        self.sign_of(&x, &y).cmp(&0)
    }

    /// The element is an algebraic integer with norm +-1.
    pub fn is_unit(&self, a: &FieldElement) -> bool {
        a.is_integral() && self.norm(a).abs().is_one()
    }

    /// Walks the continued fraction of w in the form (P + sqrt D)/Q. The
    /// first convergent h/k with N(h - k w) = +-1 yields the fundamental
    /// unit as its large conjugate (h - k t) + k w.
    fn unit_from_continued_fraction(&self) -> FieldElement {
        let (t, _) = self.omega_poly();
        let d = BigInt::from(self.d);
        let sqrt_floor = d.sqrt();
        let (mut p, mut q) = match self.omega {
            OmegaKind::Sqrt => (BigInt::zero(), BigInt::one()),
            OmegaKind::HalfInteger => (BigInt::one(), BigInt::from(2)),
        };
        let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
        let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
        loop {
            let a = (&p + &sqrt_floor).div_floor(&q);
            let h_next = &a * &h + &h_prev;
            let k_next = &a * &k + &k_prev;
            h_prev = std::mem::replace(&mut h, h_next);
            k_prev = std::mem::replace(&mut k, k_next);
            let cand = FieldElement::integral(h.clone(), -k.clone());
            if self.norm(&cand).abs().is_one() {
                return FieldElement::integral(&h - &k * t, k.clone());
            }
            p = &a * &q - &p;
            q = (&d - &p * &p) / &q;
        }
    }

    /// Checks that no unit v with 1 < v < u exists, by scanning the bounded
    /// box such a unit must lie in. Skips the scan (returns `None`) when the
    /// box has more than `limit` rows.
    pub fn verify_unit_minimality(&self, limit: u64) -> Option<bool> {
        use num_traits::ToPrimitive;
        let u = &self.fundamental_unit;
        // 1 < v < u and |v'| = 1/v < 1 give |v - v'| < u + 1, and
        // |v - v'| = |y| sqrt D, so |y| <= floor(u) + 1.
        let ybound = (self.floor_embedding(u) + BigInt::from(1)).to_u64()?;
        if ybound > limit {
            return None;
        }
        let (t, n) = self.omega_poly();
        for y in 1..=ybound as i128 {
            for sgn in [1i128, -1] {
                let y = y * sgn;
                // N(x + y w) = x^2 + t x y + n y^2 = +-1; solve for x
                for target in [1i128, -1] {
                    let disc = (t as i128 * y).pow(2) - 4 * (n as i128 * y * y - target);
                    let Some(r) = crate::arith::exact_sqrt(disc) else { continue };
                    for num in [-(t as i128) * y + r, -(t as i128) * y - r] {
                        if num % 2 != 0 {
                            continue;
                        }
                        let v = FieldElement::integral(num / 2, y);
                        let one = FieldElement::from_int(1);
                        if self.cmp_embedding(&v, &one).is_gt()
                            && self.cmp_embedding(&v, u).is_lt()
                        {
                            return Some(false);
                        }
                    }
                }
            }
        }
        Some(true)
    }

    pub fn display(&self, a: &FieldElement) -> String {
        let w = match self.omega {
            OmegaKind::Sqrt => format!("sqrt{}", self.d),
            OmegaKind::HalfInteger => "w".to_string(),
        };
        let body = match (a.x.is_zero(), a.y.is_zero()) {
            (_, true) => a.x.to_string(),
            (true, false) => format!("{}*{w}", a.y),
            (false, false) if a.y.is_negative() => format!("{} - {}*{w}", a.x, -&a.y),
            (false, false) => format!("{} + {}*{w}", a.x, a.y),
        };
        if a.den.is_one() {
            body
        } else {
            format!("({body})/{}", a.den)
        }
    }
}

fn sign(v: &BigInt) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{} + {}w", self.x, self.y)
        } else {
            write!(f, "({} + {}w)/{}", self.x, self.y, self.den)
        }
    }
}
