//! Eisenstein series attached to pairs of narrow class characters, the
//! constant forms sum_c phi(c)[c^{-1}], and a Hecke eigenvalue checker.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::class_group::Character;
use crate::error::{Error, Result};
use crate::finite_field::Gf;
use crate::ideal::{IdealHnf, PrimeIdeal};
use crate::operators::apply_t;
use crate::qexp::{AdelicQExpansion, GroupRingVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    Zero,
    VPhi1,
    VPhi2,
}

impl std::str::FromStr for ConstantMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ConstantMode::Zero),
            "v_phi1" => Ok(ConstantMode::VPhi1),
            "v_phi2" => Ok(ConstantMode::VPhi2),
            _ => Err(Error::InvalidArgument(format!(
                "unknown constant mode {s:?} (expected zero, v_phi1 or v_phi2)"
            ))),
        }
    }
}

impl std::fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstantMode::Zero => "zero",
            ConstantMode::VPhi1 => "v_phi1",
            ConstantMode::VPhi2 => "v_phi2",
        })
    }
}

/// Weight 1 Eisenstein series with a(r) = sum_{d | r} phi1(d) phi2(r/d),
/// nebentypus phi1 phi2, known for N(r) <= precision.
pub fn eisenstein(phi1: &Character, phi2: &Character, precision: u64, mode: ConstantMode) -> Result<AdelicQExpansion> {
    if !phi1.same_group(phi2) {
        return Err(Error::Mismatch("characters live on different groups or fields".into()));
    }
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be >= 1".into()));
    }
    let gf = phi1.gf();
    let group = phi1.group();
    let nebentypus = phi1.mul(phi2)?;

    // a(q^e) = sum_{i=0}^{e} phi1(q)^i phi2(q)^{e-i}, then multiply across
    // the factorization
    let mut local: HashMap<IdealHnf, (Gf, Gf)> = HashMap::new();
    let mut coeffs = BTreeMap::new();
    for (r, fact) in group.field().enumerate_factored(precision) {
        let mut a = gf.one();
        for (q, e) in &fact {
            let (x, y) = match local.get(&q.ideal) {
                Some(v) => *v,
                None => {
                    let v = (phi1.value_at(&q.ideal)?, phi2.value_at(&q.ideal)?);
                    local.insert(q.ideal, v);
                    v
                }
            };
            let mut sum = Gf::ZERO;
            let mut xi = gf.one();
            for i in 0..=*e {
                sum = gf.add(sum, gf.mul(xi, gf.pow(y, (*e - i) as u64)));
                xi = gf.mul(xi, x);
            }
            a = gf.mul(a, sum);
            if a.is_zero() {
                break;
            }
        }
        coeffs.insert(r, a);
    }
    let constant = match mode {
        ConstantMode::Zero => GroupRingVector::zero(group, gf),
        ConstantMode::VPhi1 => GroupRingVector::v_phi(phi1),
        ConstantMode::VPhi2 => GroupRingVector::v_phi(phi2),
    };
    AdelicQExpansion::new(1, nebentypus, precision, constant, coeffs)
}

/// The weight 1 form with every a(r) = 0 and constant term v_phi. Its
/// precision is irrelevant; `precision` only fixes the recorded bound.
pub fn constant_form(phi: &Character, nebentypus: &Character, precision: u64) -> Result<AdelicQExpansion> {
    if !phi.same_group(nebentypus) {
        return Err(Error::Mismatch("characters live on different groups or fields".into()));
    }
    AdelicQExpansion::new(1, nebentypus.clone(), precision, GroupRingVector::v_phi(phi), [])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EigenCheck {
    /// (q, lambda_q) for every prime tested, in input order.
    Eigen(Vec<(IdealHnf, Gf)>),
    /// T_q f is not proportional to f; `at` names the coordinate.
    NotEigen { prime: IdealHnf, at: String, expected: Gf, found: Gf },
}

impl EigenCheck {
    pub fn is_eigen(&self) -> bool {
        matches!(self, EigenCheck::Eigen(_))
    }

    pub fn eigenvalues(&self) -> Option<&[(IdealHnf, Gf)]> {
        match self {
            EigenCheck::Eigen(v) => Some(v),
            EigenCheck::NotEigen { .. } => None,
        }
    }
}

/// First coordinate of `f` (constant slots first, then ideals by norm) that is
/// nonzero and known up to `bound`.
fn leading_coordinate(f: &AdelicQExpansion, bound: u64) -> Option<(Option<IdealHnf>, Gf)> {
    if let Some(v) = f.constant().coeffs().iter().find(|v| !v.is_zero()) {
        return Some((None, *v));
    }
    f.nonzero_coeffs().find(|(r, _)| r.norm() <= bound).map(|(r, v)| (Some(*r), *v))
}

/// Tests T_q f = lambda_q f for each q, comparing up to floor(B / N(q)).
pub fn verify_eigenform(f: &AdelicQExpansion, primes: &[PrimeIdeal]) -> Result<EigenCheck> {
    let gf = f.gf();
    let mut table = Vec::with_capacity(primes.len());
    for q in primes {
        let tf = apply_t(f, q, None)?;
        let bound = tf.precision();
        let Some((at, fv)) = leading_coordinate(f, bound) else {
            return Err(Error::Precision(format!(
                "form vanishes on every coordinate up to norm {bound}; eigenvalue at {} undetermined",
                q.ideal
            )));
        };
        let tv = match at {
            None => {
                let idx = f.constant().coeffs().iter().position(|v| !v.is_zero()).expect("leading slot");
                tf.constant().coeffs()[idx]
            }
            Some(r) => tf.coeff(&r)?,
        };
        let lambda = gf.div(tv, fv).expect("leading coefficient is nonzero");
        if let Some((at, expected, found)) = f.scale(lambda).first_difference(&tf, bound) {
            return Ok(EigenCheck::NotEigen { prime: q.ideal, at, expected, found });
        }
        table.push((q.ideal, lambda));
    }
    Ok(EigenCheck::Eigen(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_group::NarrowClassGroup;
    use crate::finite_field::GfContext;
    use crate::number_field::QuadraticField;
    use std::sync::Arc;

    fn chars(d: i64, p: u64) -> (Arc<NarrowClassGroup>, Arc<GfContext>, Vec<Character>) {
        let field = QuadraticField::new(d).unwrap();
        let group = NarrowClassGroup::of_field(field).unwrap();
        let gf = GfContext::new(p, group.minimal_degree(p).unwrap()).unwrap();
        let c = group.characters(&gf).unwrap();
        (group, gf, c)
    }

    /// sum over all divisors d of r, found by divisors_of, of phi1(d) phi2(r/d)
    fn divisor_sum_oracle(phi1: &Character, phi2: &Character, r: &IdealHnf) -> Gf {
        let gf = phi1.gf();
        let field = phi1.group().field();
        field.divisors_of(r).iter().fold(Gf::ZERO, |acc, d| {
            let e = field.ideal_quotient(r, d).unwrap();
            gf.add(acc, gf.mul(phi1.value_at(d).unwrap(), phi2.value_at(&e).unwrap()))
        })
    }

    #[test]
    fn coefficients_match_divisor_sums() {
        for (d, p) in [(3, 11), (10, 7), (15, 13), (34, 5)] {
            let (group, _, cs) = chars(d, p);
            for a in &cs {
                for b in &cs {
                    let e = eisenstein(a, b, 150, ConstantMode::Zero).unwrap();
                    for r in group.field().enumerate_ideals(150) {
                        assert_eq!(e.coeff(&r).unwrap(), divisor_sum_oracle(a, b, &r), "D={d} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_pair_counts_divisors() {
        let (group, gf, cs) = chars(3, 7);
        let e = eisenstein(&cs[0], &cs[0], 200, ConstantMode::Zero).unwrap();
        assert_eq!(e.coeff(&IdealHnf::UNIT).unwrap(), gf.one());
        for r in group.field().enumerate_ideals(200) {
            let count = group.field().divisors_of(&r).len() as u64;
            assert_eq!(e.coeff(&r).unwrap(), gf.from_u64(count));
        }
    }

    #[test]
    fn symmetric_in_zero_mode_and_multiplicative() {
        let (group, _, cs) = chars(10, 7);
        let field = group.field();
        let e12 = eisenstein(&cs[0], &cs[1], 900, ConstantMode::Zero).unwrap();
        let e21 = eisenstein(&cs[1], &cs[0], 900, ConstantMode::Zero).unwrap();
        assert!(e12.equal_up_to(&e21, 900).unwrap());
        let gf = e12.gf();
        let small = field.enumerate_ideals(30);
        for r in &small {
            for s in &small {
                let coprime = field.factor_ideal(r).iter().all(|(q, _)| !field.divides(&q.ideal, s));
                if coprime {
                    let rs = field.ideal_mul(r, s);
                    assert_eq!(
                        e12.coeff(&rs).unwrap(),
                        gf.mul(e12.coeff(r).unwrap(), e12.coeff(s).unwrap())
                    );
                }
            }
        }
    }

    #[test]
    fn eisenstein_eigenvalues() {
        for d in [3, 10] {
            let (group, gf, cs) = chars(d, 7);
            let primes = group.field().primes_up_to_norm(50);
            for a in &cs {
                for b in &cs {
                    for mode in [ConstantMode::Zero, ConstantMode::VPhi1, ConstantMode::VPhi2] {
                        let e = eisenstein(a, b, 50 * 60, mode).unwrap();
                        let table = verify_eigenform(&e, &primes).unwrap();
                        let table = table.eigenvalues().expect("eigenform");
                        for (q, lambda) in table {
                            let want = gf.add(a.value_at(q).unwrap(), b.value_at(q).unwrap());
                            assert_eq!(*lambda, want, "D={d} q={q} mode={mode}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn constant_form_eigenvalues() {
        let (group, gf, cs) = chars(15, 13);
        let primes = group.field().primes_up_to_norm(50);
        for phi in &cs {
            for eps in &cs {
                let f = constant_form(phi, eps, 100).unwrap();
                let table = verify_eigenform(&f, &primes).unwrap();
                for (q, lambda) in table.eigenvalues().unwrap() {
                    let v = phi.value_at(q).unwrap();
                    let want = gf.add(v, gf.mul(eps.value_at(q).unwrap(), gf.inv(v).unwrap()));
                    assert_eq!(*lambda, want);
                    if phi.is_trivial() && eps.is_trivial() {
                        assert_eq!(*lambda, gf.from_u64(2));
                    }
                }
            }
        }
    }

    #[test]
    fn order_two_twist_vanishes_above_eleven() {
        let (group, gf, cs) = chars(3, 11);
        let e = eisenstein(&cs[0], &cs[1], 2000, ConstantMode::Zero).unwrap();
        let above = group.field().primes_above(11).unwrap();
        let table = verify_eigenform(&e, &above).unwrap();
        for (_, lambda) in table.eigenvalues().unwrap() {
            assert_eq!(*lambda, gf.zero());
        }
    }

    #[test]
    fn sum_of_distinct_eigenforms_is_caught() {
        let (group, _, cs) = chars(3, 11);
        let f = eisenstein(&cs[0], &cs[0], 1000, ConstantMode::Zero).unwrap();
        let g = eisenstein(&cs[0], &cs[1], 1000, ConstantMode::Zero).unwrap();
        // different nebentypus: relabel g so the sum is defined
        let g = AdelicQExpansion::new(
            1,
            cs[0].clone(),
            1000,
            g.constant().clone(),
            g.nonzero_coeffs().map(|(r, v)| (*r, *v)),
        )
        .unwrap();
        let sum = f.add(&g).unwrap();
        let q = group.field().primes_above(11).unwrap();
        assert!(!verify_eigenform(&sum, &q).unwrap().is_eigen());
    }

    #[test]
    fn vanishing_form_has_no_eigenvalue() {
        let (group, _, cs) = chars(3, 7);
        let z = AdelicQExpansion::zero(1, &cs[0], 100);
        let q = group.field().primes_above(13).unwrap();
        assert!(matches!(verify_eigenform(&z, &q), Err(Error::Precision(_))));
    }

    #[test]
    fn mismatched_groups_rejected() {
        let (_, _, a) = chars(3, 7);
        let (_, _, b) = chars(10, 7);
        assert!(eisenstein(&a[0], &b[0], 10, ConstantMode::Zero).is_err());
        assert!(constant_form(&a[0], &b[0], 10).is_err());
    }

    #[test]
    fn constant_mode_parsing() {
        for m in [ConstantMode::Zero, ConstantMode::VPhi1, ConstantMode::VPhi2] {
            assert_eq!(m.to_string().parse::<ConstantMode>().unwrap(), m);
        }
        assert!("v_phi3".parse::<ConstantMode>().is_err());
    }
}
