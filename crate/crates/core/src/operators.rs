//! Operators on adelic q-expansions: diamond, Hecke T_q^{(k)}, the Hasse
//! weight lift, and the Frobenius operators V_P.
//!
//! Forms are nebentypus-isotypic, so the diamond operator <q> acts as the
//! scalar eps(q) and a single Hecke formula covers q away from p and q
//! above p:
//!
//!   a(r, T_q f)   = a(qr, f) + eps(q) N(q)^{k-1} a(r/q, f)
//!   a((0), T_q f) = a((0), f)[q] + eps(q) N(q)^{k-1} a((0), f)[q^{-1}]
//!
//! In characteristic p the factor N(q)^{k-1} vanishes for q | p and k > 1,
//! where T_q degenerates to the shift a(r, T_q f) = a(qr, f).

use crate::error::{Error, Result};
use crate::finite_field::Gf;
use crate::ideal::{IdealHnf, PrimeIdeal};
use crate::number_field::QuadraticField;
use crate::qexp::AdelicQExpansion;

/// <q> f = eps(q) f.
pub fn apply_diamond(f: &AdelicQExpansion, q: &IdealHnf) -> Result<AdelicQExpansion> {
    let eps = f.nebentypus().value_at(q)?;
    Ok(f.scale(eps))
}

/// eps(q) N(q)^{k-1} reduced into the coefficient field.
fn hecke_twist(f: &AdelicQExpansion, q: &IdealHnf, k: u32) -> Result<Gf> {
    let gf = f.gf();
    let eps = f.nebentypus().value_at(q)?;
    let nu = gf.pow(gf.from_u64(q.norm()), (k - 1) as u64);
    Ok(gf.mul(eps, nu))
}

/// T_q^{(k)} with k = weight(f) unless overridden. Output precision
/// floor(B / N(q)).
pub fn apply_t(f: &AdelicQExpansion, q: &PrimeIdeal, k_override: Option<u32>) -> Result<AdelicQExpansion> {
    let k = k_override.unwrap_or(f.weight());
    if k == 0 {
        return Err(Error::InvalidArgument("weight must be >= 1".into()));
    }
    let q = &q.ideal;
    let nq = q.norm();
    let precision = f.precision() / nq;
    if precision == 0 {
        return Err(Error::Precision(format!(
            "T at an ideal of norm {nq} needs precision >= {nq}, have {}",
            f.precision()
        )));
    }
    let gf = f.gf().clone();
    let field = f.field();
    let twist = hecke_twist(f, q, k)?;

    let mut coeffs: std::collections::BTreeMap<IdealHnf, Gf> = f.t_shift(q).nonzero_coeffs().map(|(r, v)| (*r, *v)).collect();
    if !twist.is_zero() {
        for (r, v) in f.nonzero_coeffs() {
            if r.norm() * nq > precision {
                // coefficients are sorted by norm
                break;
            }
            let e = coeffs.entry(field.ideal_mul(r, q)).or_insert(Gf::ZERO);
            *e = gf.add(*e, gf.mul(twist, *v));
        }
    }
    let constant = f
        .constant()
        .translate_by(q)?
        .add(&f.constant().translate_by_inverse(q)?.scale(twist));
    AdelicQExpansion::new(f.weight(), f.nebentypus().clone(), precision, constant, coeffs)
}

/// Multiplication by the Hasse invariant: same expansion, weight + p - 1.
pub fn hasse_lift(f: &AdelicQExpansion) -> AdelicQExpansion {
    let p = f.gf().characteristic() as u32;
    f.clone().with_weight(f.weight() + p - 1)
}

/// The prime factors of a squarefree P dividing (p), canonical order.
/// Errors when P is not squarefree or has a factor away from p.
pub fn frobenius_support(field: &QuadraticField, big_p: &IdealHnf, p: u64) -> Result<Vec<PrimeIdeal>> {
    let fact = field.factor_ideal(big_p);
    let mut out = Vec::with_capacity(fact.len());
    for (q, e) in fact {
        if e != 1 {
            return Err(Error::InvalidArgument(format!("{big_p} is not squarefree")));
        }
        if q.rational_prime != p {
            return Err(Error::InvalidArgument(format!("{big_p} has the prime factor {} away from {p}", q.ideal)));
        }
        out.push(q);
    }
    Ok(out)
}

/// All squarefree ideals dividing (p), each with its prime factors, in
/// canonical ideal order.
pub fn squarefree_divisors_of_p(field: &QuadraticField, p: u64) -> Result<Vec<(IdealHnf, Vec<PrimeIdeal>)>> {
    let primes = field.primes_above(p)?;
    let s = primes.len();
    let mut out: Vec<(IdealHnf, Vec<PrimeIdeal>)> = (0..1u32 << s)
        .map(|mask| {
            let chosen: Vec<PrimeIdeal> =
                primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, q)| *q).collect();
            let ideal = chosen.iter().fold(IdealHnf::UNIT, |acc, q| field.ideal_mul(&acc, &q.ideal));
            (ideal, chosen)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn check_weight_one(f: &AdelicQExpansion) -> Result<()> {
    if f.weight() != 1 {
        return Err(Error::InvalidArgument(format!("V_P acts on weight 1 forms, got weight {}", f.weight())));
    }
    Ok(())
}

/// V_P by its closed form: a(r, V_P f) = a(r/P, f) and
/// a((0), V_P f) = a((0), f)[P^{-1}]. Output weight p, precision B N(P).
pub fn apply_vp_direct(f: &AdelicQExpansion, big_p: &IdealHnf) -> Result<AdelicQExpansion> {
    check_weight_one(f)?;
    let p = f.gf().characteristic();
    frobenius_support(f.field(), big_p, p)?;
    let lifted = hasse_lift(f);
    if big_p.is_unit() {
        return Ok(lifted);
    }
    let constant = f.constant().translate_by_inverse(big_p)?;
    lifted.iota_shift(big_p).with_constant(constant)
}

/// V_P from the recursion V_{Pp} = eps(p)^{-1} (V_P T_p^{(1)} - T_p^{(p)} V_P),
/// peeling the prime factors of P in canonical order.
pub fn apply_vp_recursive(f: &AdelicQExpansion, big_p: &IdealHnf) -> Result<AdelicQExpansion> {
    check_weight_one(f)?;
    let primes = frobenius_support(f.field(), big_p, f.gf().characteristic())?;
    vp_recursive_ordered(f, &primes)
}

/// The recursion with an explicit order: `primes` = [q_1, ..., q_t] builds
/// V_{q_1}, then V_{q_1 q_2}, and so on.
pub fn vp_recursive_ordered(f: &AdelicQExpansion, primes: &[PrimeIdeal]) -> Result<AdelicQExpansion> {
    check_weight_one(f)?;
    let p = f.gf().characteristic();
    if let Some(q) = primes.iter().find(|q| q.rational_prime != p) {
        return Err(Error::InvalidArgument(format!("{} does not divide {p}", q.ideal)));
    }
    let Some((last, rest)) = primes.split_last() else {
        return Ok(hasse_lift(f));
    };
    if rest.contains(last) {
        return Err(Error::InvalidArgument("repeated prime in V_P recursion".into()));
    }
    let gf = f.gf();
    let eps = f.nebentypus().value_at(&last.ideal)?;
    let eps_inv = gf.inv(eps).expect("character values are units");
    let vp_of_t = vp_recursive_ordered(&apply_t(f, last, Some(1))?, rest)?;
    let t_of_vp = apply_t(&vp_recursive_ordered(f, rest)?, last, Some(p as u32))?;
    Ok(vp_of_t.sub(&t_of_vp)?.scale(eps_inv))
}

/// Result of comparing both sides of the U-V lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UvCheck {
    pub holds: bool,
    pub compared_up_to: u64,
    pub witness: Option<String>,
}

/// Checks T_p^{(p)} V_P f = V_{P/p} f when p | P, and
/// T_p^{(p)} V_P f = V_P T_p^{(1)} f - eps(p) V_{Pp} f when p does not
/// divide P, coefficientwise over the common precision.
pub fn check_uv_lemma(f: &AdelicQExpansion, p: &PrimeIdeal, big_p: &IdealHnf) -> Result<UvCheck> {
    check_weight_one(f)?;
    let field = f.field();
    let char_p = f.gf().characteristic();
    frobenius_support(field, big_p, char_p)?;
    if p.rational_prime != char_p {
        return Err(Error::InvalidArgument(format!("{} does not lie above {char_p}", p.ideal)));
    }
    let lhs = apply_t(&apply_vp_direct(f, big_p)?, p, Some(char_p as u32))?;
    let rhs = match field.ideal_quotient(big_p, &p.ideal) {
        Some(quot) => apply_vp_direct(f, &quot)?,
        None => {
            let eps = f.nebentypus().value_at(&p.ideal)?;
            let first = apply_vp_direct(&apply_t(f, p, Some(1))?, big_p)?;
            let second = apply_vp_direct(f, &field.ideal_mul(big_p, &p.ideal))?;
            first.sub(&second.scale(eps))?
        }
    };
    let bound = lhs.precision().min(rhs.precision());
    let s = field.primes_above(char_p)?.len();
    let needed = (1usize << s) + f.group().order();
    let available = field.enumerate_ideals(bound.min(4 * needed as u64)).len() + f.group().order();
    if available < needed {
        return Err(Error::Precision(format!(
            "only {available} coordinates up to norm {bound}, need {needed}"
        )));
    }
    let witness = lhs.first_difference(&rhs, bound).map(|(at, a, b)| {
        let gf = f.gf();
        format!("{at}: {} != {}", gf.display(a), gf.display(b))
    });
    Ok(UvCheck { holds: witness.is_none(), compared_up_to: bound, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_group::{Character, NarrowClassGroup};
    use crate::finite_field::GfContext;
    use crate::qexp::GroupRingVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    struct Setup {
        field: QuadraticField,
        group: Arc<NarrowClassGroup>,
        gf: Arc<GfContext>,
        chars: Vec<Character>,
    }

    fn setup(d: i64, p: u64) -> Setup {
        let field = QuadraticField::new(d).unwrap();
        let group = NarrowClassGroup::of_field(field.clone()).unwrap();
        let gf = GfContext::new(p, group.minimal_degree(p).unwrap()).unwrap();
        let chars = group.characters(&gf).unwrap();
        Setup { field, group, gf, chars }
    }

    fn random_forms(s: &Setup, precision: u64, count: usize, seed: u64) -> Vec<AdelicQExpansion> {
        let ideals = s.field.enumerate_ideals(precision);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| AdelicQExpansion::random(&mut rng, 1, &s.chars[i % s.chars.len()], precision, &ideals))
            .collect()
    }

    #[test]
    fn diamond_examples() {
        let s = setup(3, 11);
        let f = random_forms(&s, 100, 2, 1);
        let q = s.field.ideal_from_hnf(2, 1, 1).unwrap();
        // trivial nebentypus
        assert!(apply_diamond(&f[0], &q).unwrap().equal_up_to(&f[0], 100).unwrap());
        // order-2 nebentypus, q in the nontrivial class
        let minus = f[1].scale(s.gf.from_i64(-1));
        assert!(apply_diamond(&f[1], &q).unwrap().equal_up_to(&minus, 100).unwrap());
        let q2 = s.field.ideal_from_hnf(11, 5, 1).unwrap();
        let lhs = apply_diamond(&apply_diamond(&f[1], &q).unwrap(), &q2).unwrap();
        let rhs = apply_diamond(&f[1], &s.field.ideal_mul(&q, &q2)).unwrap();
        assert!(lhs.equal_up_to(&rhs, 100).unwrap());
    }

    #[test]
    fn t_above_p_in_high_weight_is_a_shift() {
        let s = setup(3, 11);
        let f = random_forms(&s, 400, 1, 3).remove(0).with_weight(11);
        let p1 = s.field.primes_above(11).unwrap()[0];
        let tf = apply_t(&f, &p1, None).unwrap();
        assert_eq!(tf.precision(), 400 / 11);
        for r in s.field.enumerate_ideals(tf.precision()) {
            assert_eq!(tf.coeff(&r).unwrap(), f.coeff(&s.field.ideal_mul(&p1.ideal, &r)).unwrap());
        }
    }

    #[test]
    fn t_of_zero_is_zero() {
        let s = setup(3, 7);
        let z = AdelicQExpansion::zero(1, &s.chars[0], 100);
        let q = s.field.primes_above(13).unwrap()[0];
        assert!(apply_t(&z, &q, None).unwrap().is_zero());
    }

    #[test]
    fn t_needs_precision() {
        let s = setup(3, 7);
        let z = AdelicQExpansion::zero(1, &s.chars[0], 10);
        let q = s.field.primes_above(13).unwrap()[0];
        assert!(matches!(apply_t(&z, &q, None), Err(Error::Precision(_))));
    }

    #[test]
    fn hasse_lift_is_weight_shift() {
        let s = setup(3, 7);
        let f = random_forms(&s, 80, 1, 5).remove(0);
        let h = hasse_lift(&f);
        assert_eq!(h.weight(), 7);
        assert_eq!(hasse_lift(&h).weight(), 13);
        assert!(h.clone().with_weight(1).equal_up_to(&f, 80).unwrap());
    }

    #[test]
    fn vp_direct_examples() {
        let s = setup(3, 11);
        let f = random_forms(&s, 300, 1, 7).remove(0);
        let v1 = apply_vp_direct(&f, &IdealHnf::UNIT).unwrap();
        let h = hasse_lift(&f);
        assert!(v1.equal_up_to(&h, 300).unwrap());
        assert_eq!(v1.weight(), 11);
        let p1 = s.field.primes_above(11).unwrap()[0].ideal;
        let vp = apply_vp_direct(&f, &p1).unwrap();
        assert_eq!(vp.precision(), 3300);
        assert_eq!(vp.coeff(&p1).unwrap(), f.coeff(&IdealHnf::UNIT).unwrap());
        for r in s.field.enumerate_ideals(300) {
            if !s.field.divides(&p1, &r) {
                assert!(vp.coeff(&r).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn vp_rejects_bad_inputs() {
        let s = setup(3, 11);
        let f = random_forms(&s, 100, 1, 7).remove(0);
        let p1 = s.field.primes_above(11).unwrap()[0].ideal;
        let sq = s.field.ideal_mul(&p1, &p1);
        assert!(apply_vp_direct(&f, &sq).is_err());
        let away = s.field.primes_above(13).unwrap()[0].ideal;
        assert!(apply_vp_direct(&f, &away).is_err());
        assert!(apply_vp_direct(&f.clone().with_weight(2), &p1).is_err());
        assert!(apply_vp_recursive(&f, &sq).is_err());
    }

    #[test]
    fn vp_recursion_matches_direct_both_orders() {
        for (d, p) in [(3, 11), (3, 7), (5, 11), (3, 3)] {
            let s = setup(d, p);
            for f in random_forms(&s, 3000, 4, 11) {
                for (big_p, primes) in squarefree_divisors_of_p(&s.field, p).unwrap() {
                    let direct = apply_vp_direct(&f, &big_p).unwrap();
                    let rec = apply_vp_recursive(&f, &big_p).unwrap();
                    let bound = rec.precision();
                    assert!(bound >= 1);
                    assert!(rec.equal_up_to(&direct, bound).unwrap(), "D={d} p={p} P={big_p}");
                    let mut reversed = primes.clone();
                    reversed.reverse();
                    let rev = vp_recursive_ordered(&f, &reversed).unwrap();
                    assert!(rev.equal_up_to(&rec, bound.min(rev.precision())).unwrap());
                }
            }
        }
    }

    #[test]
    fn uv_lemma_both_branches() {
        let s = setup(3, 11);
        let forms = random_forms(&s, 3000, 3, 13);
        let divisors = squarefree_divisors_of_p(&s.field, 11).unwrap();
        for f in &forms {
            for q in s.field.primes_above(11).unwrap() {
                for (big_p, _) in &divisors {
                    let res = check_uv_lemma(f, &q, big_p).unwrap();
                    assert!(res.holds, "{:?}", res.witness);
                }
            }
        }
        // p | P with P = p: T V_p f = h f
        let f = &forms[0];
        let q = s.field.primes_above(11).unwrap()[0];
        let lhs = apply_t(&apply_vp_direct(f, &q.ideal).unwrap(), &q, Some(11)).unwrap();
        assert!(lhs.equal_up_to(&hasse_lift(f), 3000).unwrap());
    }

    #[test]
    fn uv_lemma_holds_for_any_nebentypus() {
        let s = setup(3, 11);
        let f = random_forms(&s, 3000, 1, 17).remove(0);
        assert!(f.nebentypus().is_trivial());
        let q = s.field.primes_above(11).unwrap()[0];
        let g = AdelicQExpansion::new(
            1,
            s.chars[1].clone(),
            f.precision(),
            GroupRingVector::zero(&s.group, &s.gf),
            f.nonzero_coeffs().map(|(r, v)| (*r, *v)),
        )
        .unwrap();
        // relabelled nebentypus: the lemma is an identity for every isotypic
        // form
        assert!(check_uv_lemma(&g, &q, &IdealHnf::UNIT).unwrap().holds);
    }

    #[test]
    fn hecke_operators_commute_on_random_forms() {
        let s = setup(10, 7);
        let f = random_forms(&s, 4000, 2, 19);
        let primes = s.field.primes_up_to_norm(30);
        for g in &f {
            for (i, q1) in primes.iter().enumerate() {
                for q2 in &primes[i + 1..] {
                    let a = apply_t(&apply_t(g, q1, None).unwrap(), q2, None).unwrap();
                    let b = apply_t(&apply_t(g, q2, None).unwrap(), q1, None).unwrap();
                    let bound = a.precision().min(b.precision());
                    assert!(a.equal_up_to(&b, bound).unwrap(), "{} {}", q1.ideal, q2.ideal);
                }
            }
        }
    }

    #[test]
    fn diamond_commutes_with_t_and_v() {
        let s = setup(3, 11);
        let f = random_forms(&s, 2000, 2, 23);
        let q = s.field.ideal_from_hnf(2, 1, 1).unwrap();
        let t13 = s.field.primes_above(13).unwrap()[0];
        let p1 = s.field.primes_above(11).unwrap()[0].ideal;
        for g in &f {
            let a = apply_diamond(&apply_t(g, &t13, None).unwrap(), &q).unwrap();
            let b = apply_t(&apply_diamond(g, &q).unwrap(), &t13, None).unwrap();
            assert!(a.equal_up_to(&b, a.precision()).unwrap());
            let a = apply_diamond(&apply_vp_direct(g, &p1).unwrap(), &q).unwrap();
            let b = apply_vp_direct(&apply_diamond(g, &q).unwrap(), &p1).unwrap();
            assert!(a.equal_up_to(&b, a.precision()).unwrap());
        }
    }

    #[test]
    fn operators_are_linear() {
        let s = setup(3, 7);
        let f = random_forms(&s, 1500, 4, 29);
        let (a, b) = (&f[0], &f[2]);
        let c = s.gf.from_i64(3);
        let combo = a.add(&b.scale(c)).unwrap();
        let t = s.field.primes_above(13).unwrap()[1];
        let lhs = apply_t(&combo, &t, None).unwrap();
        let rhs = apply_t(a, &t, None).unwrap().add(&apply_t(b, &t, None).unwrap().scale(c)).unwrap();
        assert!(lhs.equal_up_to(&rhs, lhs.precision()).unwrap());
        let seven = s.field.rational_ideal(7);
        let lhs = apply_vp_direct(&combo, &seven).unwrap();
        let rhs =
            apply_vp_direct(a, &seven).unwrap().add(&apply_vp_direct(b, &seven).unwrap().scale(c)).unwrap();
        assert!(lhs.equal_up_to(&rhs, lhs.precision()).unwrap());
    }
}
