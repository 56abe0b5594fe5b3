//! Truncated adelic q-expansions.
//!
//! A form is a weight, a nebentypus, a precision bound B, a constant term in
//! the group ring F[Cl_F^+], and coefficients a(r) for every nonzero integral
//! ideal r of norm <= B. Only nonzero coefficients are stored; any ideal
//! within precision that is missing has coefficient zero, and reading past
//! the precision is an error.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::class_group::{Character, NarrowClassGroup};
use crate::error::{Error, Result};
use crate::finite_field::{Gf, GfContext};
use crate::ideal::IdealHnf;
use crate::number_field::QuadraticField;

/// An element sum_c v_c [c] of F[Cl_F^+], indexed by class-rep order.
#[derive(Clone, Debug)]
pub struct GroupRingVector {
    group: Arc<NarrowClassGroup>,
    gf: Arc<GfContext>,
    coeffs: Vec<Gf>,
}

impl PartialEq for GroupRingVector {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.gf == other.gf
    }
}
impl Eq for GroupRingVector {}

impl GroupRingVector {
    pub fn zero(group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>) -> Self {
        GroupRingVector { group: group.clone(), gf: gf.clone(), coeffs: vec![Gf::ZERO; group.order()] }
    }

    pub fn from_coeffs(group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>, coeffs: Vec<Gf>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::Mismatch(format!(
                "group-ring vector of length {} for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        Ok(GroupRingVector { group: group.clone(), gf: gf.clone(), coeffs })
    }

    /// The basis element [c].
    pub fn basis(group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>, class: usize) -> Self {
        let mut v = Self::zero(group, gf);
        v.coeffs[class] = Gf::ONE;
        v
    }

    /// v_phi = sum_c phi(c) [c^{-1}].
    pub fn v_phi(phi: &Character) -> Self {
        let g = phi.group();
        let mut coeffs = vec![Gf::ZERO; g.order()];
        for c in 0..g.order() {
            coeffs[g.inverse_class(c)] = phi.value(c);
        }
        GroupRingVector { group: g.clone(), gf: phi.gf().clone(), coeffs }
    }

    pub fn coeffs(&self) -> &[Gf] {
        &self.coeffs
    }

    pub fn group(&self) -> &Arc<NarrowClassGroup> {
        &self.group
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Group-ring product [class] * v: the output coefficient at c is the
    /// input coefficient at class^{-1} c.
    pub fn translate(&self, class: usize) -> Self {
        let g = &self.group;
        let inv = g.inverse_class(class);
        let coeffs = (0..g.order()).map(|c| self.coeffs[g.compose(inv, c)]).collect();
        GroupRingVector { group: g.clone(), gf: self.gf.clone(), coeffs }
    }

    /// v[I], translation by the class of I.
    pub fn translate_by(&self, ideal: &IdealHnf) -> Result<Self> {
        Ok(self.translate(self.group.class_of(ideal)?))
    }

    /// v[I^{-1}].
    pub fn translate_by_inverse(&self, ideal: &IdealHnf) -> Result<Self> {
        Ok(self.translate(self.group.inverse_class(self.group.class_of(ideal)?)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| self.gf.add(a, b)).collect();
        GroupRingVector { group: self.group.clone(), gf: self.gf.clone(), coeffs }
    }

    pub fn scale(&self, s: Gf) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| self.gf.mul(s, a)).collect();
        GroupRingVector { group: self.group.clone(), gf: self.gf.clone(), coeffs }
    }
}

#[derive(Clone, Debug)]
pub struct AdelicQExpansion {
    weight: u32,
    nebentypus: Character,
    precision: u64,
    constant: GroupRingVector,
    coeffs: BTreeMap<IdealHnf, Gf>,
}

impl AdelicQExpansion {
    pub fn new(
        weight: u32,
        nebentypus: Character,
        precision: u64,
        constant: GroupRingVector,
        coeffs: impl IntoIterator<Item = (IdealHnf, Gf)>,
    ) -> Result<Self> {
        if weight == 0 {
            return Err(Error::InvalidArgument("weight must be >= 1".into()));
        }
        if constant.coeffs.len() != nebentypus.group().order() || constant.gf != *nebentypus.gf() {
            return Err(Error::Mismatch("constant term and nebentypus live on different groups".into()));
        }
        let mut map = BTreeMap::new();
        for (r, v) in coeffs {
            if r.norm() > precision {
                return Err(Error::BeyondPrecision { ideal: r, norm: r.norm(), precision });
            }
            if !v.is_zero() {
                map.insert(r, v);
            }
        }
        Ok(AdelicQExpansion { weight, nebentypus, precision, constant, coeffs: map })
    }

    pub fn zero(weight: u32, nebentypus: &Character, precision: u64) -> Self {
        let constant = GroupRingVector::zero(nebentypus.group(), nebentypus.gf());
        AdelicQExpansion { weight, nebentypus: nebentypus.clone(), precision, constant, coeffs: BTreeMap::new() }
    }

    /// Random form: uniform coefficients at every ideal in `ideals` (those of
    /// norm <= precision are kept) and a uniform constant term.
    pub fn random<R: Rng>(
        rng: &mut R,
        weight: u32,
        nebentypus: &Character,
        precision: u64,
        ideals: &[IdealHnf],
    ) -> Self {
        let gf = nebentypus.gf();
        let mut draw = || gf.element(rng.gen_range(0..gf.size()));
        let constant = GroupRingVector {
            group: nebentypus.group().clone(),
            gf: gf.clone(),
            coeffs: (0..nebentypus.group().order()).map(|_| draw()).collect(),
        };
        let coeffs: BTreeMap<_, _> = ideals
            .iter()
            .filter(|r| r.norm() <= precision)
            .map(|&r| (r, draw()))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        AdelicQExpansion { weight, nebentypus: nebentypus.clone(), precision, constant, coeffs }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn nebentypus(&self) -> &Character {
        &self.nebentypus
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn constant(&self) -> &GroupRingVector {
        &self.constant
    }

    pub fn group(&self) -> &Arc<NarrowClassGroup> {
        self.nebentypus.group()
    }

    pub fn field(&self) -> &QuadraticField {
        self.group().field()
    }

    pub fn gf(&self) -> &Arc<GfContext> {
        self.nebentypus.gf()
    }

    /// a(r, f), or an error past the precision bound.
    pub fn coeff(&self, r: &IdealHnf) -> Result<Gf> {
        if r.norm() > self.precision {
            return Err(Error::BeyondPrecision { ideal: *r, norm: r.norm(), precision: self.precision });
        }
        Ok(self.coeffs.get(r).copied().unwrap_or(Gf::ZERO))
    }

    /// Nonzero coefficients in canonical ideal order.
    pub fn nonzero_coeffs(&self) -> impl Iterator<Item = (&IdealHnf, &Gf)> {
        self.coeffs.iter()
    }

    pub fn num_nonzero(&self) -> usize {
        self.coeffs.len()
    }

    /// All a(r) vanish (the constant term may not).
    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn with_weight(mut self, weight: u32) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_constant(mut self, constant: GroupRingVector) -> Result<Self> {
        if constant.coeffs.len() != self.constant.coeffs.len() {
            return Err(Error::Mismatch("constant term length".into()));
        }
        self.constant = constant;
        Ok(self)
    }

    /// Drops coefficients above `bound` (bound <= precision).
    pub fn truncate(&self, bound: u64) -> Result<Self> {
        if bound > self.precision {
            return Err(Error::Precision(format!("cannot extend precision {} to {bound}", self.precision)));
        }
        let mut out = self.clone();
        out.precision = bound;
        out.coeffs.retain(|r, _| r.norm() <= bound);
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.weight != other.weight {
            return Err(Error::Mismatch(format!("weights {} and {}", self.weight, other.weight)));
        }
        if self.nebentypus != other.nebentypus {
            return Err(Error::Mismatch("nebentypus characters differ".into()));
        }
        Ok(())
    }

    /// f + g over the common precision.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let gf = self.gf().clone();
        let precision = self.precision.min(other.precision);
        let mut coeffs: BTreeMap<IdealHnf, Gf> =
            self.coeffs.range(..).filter(|(r, _)| r.norm() <= precision).map(|(r, v)| (*r, *v)).collect();
        for (r, v) in other.coeffs.iter().filter(|(r, _)| r.norm() <= precision) {
            let e = coeffs.entry(*r).or_insert(Gf::ZERO);
            *e = gf.add(*e, *v);
        }
        coeffs.retain(|_, v| !v.is_zero());
        Ok(AdelicQExpansion {
            weight: self.weight,
            nebentypus: self.nebentypus.clone(),
            precision,
            constant: self.constant.add(&other.constant),
            coeffs,
        })
    }

    pub fn scale(&self, c: Gf) -> Self {
        let gf = self.gf().clone();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            for (r, v) in &self.coeffs {
                coeffs.insert(*r, gf.mul(c, *v));
            }
        }
        AdelicQExpansion {
            weight: self.weight,
            nebentypus: self.nebentypus.clone(),
            precision: self.precision,
            constant: self.constant.scale(c),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let minus_one = self.gf().neg(Gf::ONE);
        self.add(&other.scale(minus_one))
    }

    /// The q-power map: a(r, out) = a(r/q, f), zero when q does not divide r.
    /// Output precision B N(q); the constant term is copied.
    pub fn iota_shift(&self, q: &IdealHnf) -> Self {
        let k = self.field();
        let coeffs = self.coeffs.iter().map(|(r, v)| (k.ideal_mul(r, q), *v)).collect();
        AdelicQExpansion {
            weight: self.weight,
            nebentypus: self.nebentypus.clone(),
            precision: self.precision * q.norm(),
            constant: self.constant.clone(),
            coeffs,
        }
    }

    /// Keeps the terms indexed by multiples of q: a(r, out) = a(rq, f).
    /// Output precision floor(B / N(q)); the constant term is copied.
    pub fn t_shift(&self, q: &IdealHnf) -> Self {
        let k = self.field();
        let nq = q.norm();
        let precision = self.precision / nq;
        let q_conj = k.ideal_conj(q);
        let coeffs = self
            .coeffs
            .iter()
            .take_while(|(r, _)| r.norm() / nq <= precision)
            .filter(|(r, _)| r.norm() % nq == 0)
            .filter_map(|(r, v)| k.quotient_via_conj(r, &q_conj, nq).map(|s| (s, *v)))
            .collect();
        AdelicQExpansion {
            weight: self.weight,
            nebentypus: self.nebentypus.clone(),
            precision,
            constant: self.constant.clone(),
            coeffs,
        }
    }

    /// Equal constants and equal a(r) for all N(r) <= up_to.
    pub fn equal_up_to(&self, other: &Self, up_to: u64) -> Result<bool> {
        if up_to > self.precision.min(other.precision) {
            return Err(Error::Precision(format!(
                "comparison bound {up_to} exceeds precisions {} and {}",
                self.precision, other.precision
            )));
        }
        Ok(self.first_difference(other, up_to).is_none())
    }

    /// First coordinate (in canonical order, constants first) where the two
    /// forms differ up to `up_to`, as (label, left, right).
    pub fn first_difference(&self, other: &Self, up_to: u64) -> Option<(String, Gf, Gf)> {
        for (c, (a, b)) in self.constant.coeffs.iter().zip(&other.constant.coeffs).enumerate() {
            if a != b {
                return Some((format!("constant[{c}]"), *a, *b));
            }
        }
        let mut left = self.coeffs.iter().filter(|(r, _)| r.norm() <= up_to).peekable();
        let mut right = other.coeffs.iter().filter(|(r, _)| r.norm() <= up_to).peekable();
        loop {
            let (r, a, b) = match (left.peek(), right.peek()) {
                (None, None) => return None,
                (Some(&(r, &a)), None) => {
                    left.next();
                    (r, a, Gf::ZERO)
                }
                (None, Some(&(r, &b))) => {
                    right.next();
                    (r, Gf::ZERO, b)
                }
                (Some(&(rl, &a)), Some(&(rr, &b))) => match rl.cmp(rr) {
                    Ordering::Less => {
                        left.next();
                        (rl, a, Gf::ZERO)
                    }
                    Ordering::Greater => {
                        right.next();
                        (rr, Gf::ZERO, b)
                    }
                    Ordering::Equal => {
                        left.next();
                        right.next();
                        (rl, a, b)
                    }
                },
            };
            if a != b {
                return Some((format!("{r}"), a, b));
            }
        }
    }

    pub fn to_json(&self) -> QExpJson {
        let gf = self.gf();
        QExpJson {
            weight: self.weight,
            nebentypus: self.nebentypus.values().iter().map(|&v| gf.coeffs(v)).collect(),
            precision: self.precision,
            constant: self.constant.coeffs.iter().map(|&v| gf.coeffs(v)).collect(),
            coeffs: self.coeffs.iter().map(|(r, &v)| (*r, gf.coeffs(v))).collect(),
        }
    }

    pub fn from_json(json: &QExpJson, group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>) -> Result<Self> {
        let parse = |v: &Vec<u64>| gf.from_coeffs(v);
        let neb_values = json.nebentypus.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let nebentypus = Character::from_values(group, gf, neb_values)?;
        let constant =
            GroupRingVector::from_coeffs(group, gf, json.constant.iter().map(parse).collect::<Result<Vec<_>>>()?)?;
        let k = group.field();
        let mut coeffs = Vec::with_capacity(json.coeffs.len());
        for (r, v) in &json.coeffs {
            let [a, b, c] = r.triple();
            coeffs.push((k.ideal_from_hnf(a, b, c)?, parse(v)?));
        }
        Self::new(json.weight, nebentypus, json.precision, constant, coeffs)
    }
}

/// Wire format of a q-expansion: field elements as coefficient lists (least
/// significant first), ideals as HNF triples, nonzero coefficients only, in
/// canonical ideal order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QExpJson {
    pub weight: u32,
    pub nebentypus: Vec<Vec<u64>>,
    pub precision: u64,
    pub constant: Vec<Vec<u64>>,
    pub coeffs: Vec<(IdealHnf, Vec<u64>)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        group: Arc<NarrowClassGroup>,
        gf: Arc<GfContext>,
        chars: Vec<Character>,
        ideals: Vec<IdealHnf>,
    }

    fn setup() -> Setup {
        let group = NarrowClassGroup::of_field(QuadraticField::new(3).unwrap()).unwrap();
        let gf = GfContext::new(11, 1).unwrap();
        let chars = group.characters(&gf).unwrap();
        let ideals = group.field().enumerate_ideals(400);
        Setup { group, gf, chars, ideals }
    }

    fn random_form(s: &Setup, seed: u64, precision: u64) -> AdelicQExpansion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AdelicQExpansion::random(&mut rng, 1, &s.chars[(seed % 2) as usize], precision, &s.ideals)
    }

    #[test]
    fn add_and_scale_identities() {
        let s = setup();
        let f = random_form(&s, 2, 200);
        let zero = AdelicQExpansion::zero(1, f.nebentypus(), 200);
        assert!(f.add(&zero).unwrap().equal_up_to(&f, 200).unwrap());
        assert!(f.scale(s.gf.one()).equal_up_to(&f, 200).unwrap());
        let g = random_form(&s, 4, 150);
        let h = f.add(&g).unwrap();
        assert_eq!(h.precision(), 150);
        for r in s.ideals.iter().filter(|r| r.norm() <= 150).step_by(7) {
            assert_eq!(h.coeff(r).unwrap(), s.gf.add(f.coeff(r).unwrap(), g.coeff(r).unwrap()));
        }
    }

    #[test]
    fn add_rejects_mismatch() {
        let s = setup();
        let f = random_form(&s, 2, 100);
        let g = random_form(&s, 3, 100);
        assert!(matches!(f.add(&g), Err(Error::Mismatch(_))));
        let h = random_form(&s, 4, 100).with_weight(11);
        assert!(matches!(f.add(&h), Err(Error::Mismatch(_))));
    }

    #[test]
    fn precision_guard() {
        let s = setup();
        let f = random_form(&s, 2, 50);
        let far = s.ideals.iter().find(|r| r.norm() > 50).unwrap();
        assert!(matches!(f.coeff(far), Err(Error::BeyondPrecision { .. })));
        assert!(f.equal_up_to(&f, 51).is_err());
        assert!(f.equal_up_to(&f, 50).unwrap());
    }

    #[test]
    fn delta_changes_equality() {
        let s = setup();
        let f = random_form(&s, 2, 100);
        let r = s.ideals[5];
        let delta = AdelicQExpansion::new(
            1,
            f.nebentypus().clone(),
            100,
            GroupRingVector::zero(&s.group, &s.gf),
            [(r, s.gf.one())],
        )
        .unwrap();
        assert!(!f.add(&delta).unwrap().equal_up_to(&f, 100).unwrap());
    }

    #[test]
    fn v_phi_translation_identity() {
        let s = setup();
        let k = s.group.field();
        let q = k.ideal_from_hnf(2, 1, 1).unwrap();
        for phi in &s.chars {
            let v = GroupRingVector::v_phi(phi);
            let lhs = v.translate_by(&q).unwrap();
            assert_eq!(lhs, v.scale(phi.value_at(&q).unwrap()));
        }
        let v = GroupRingVector::basis(&s.group, &s.gf, 0);
        assert_eq!(v.translate_by(&IdealHnf::UNIT).unwrap(), v);
        let j = k.ideal_from_hnf(11, 6, 1).unwrap();
        let two_step = v.translate_by(&q).unwrap().translate_by(&j).unwrap();
        assert_eq!(two_step, v.translate_by(&k.ideal_mul(&q, &j)).unwrap());
    }

    #[test]
    fn shifts() {
        let s = setup();
        let k = s.group.field();
        let f = random_form(&s, 5, 300);
        let q = k.ideal_from_hnf(2, 1, 1).unwrap();
        assert!(f.iota_shift(&IdealHnf::UNIT).equal_up_to(&f, 300).unwrap());
        assert!(f.t_shift(&IdealHnf::UNIT).equal_up_to(&f, 300).unwrap());

        let up = f.iota_shift(&q);
        assert_eq!(up.precision(), 600);
        assert_eq!(up.coeff(&q).unwrap(), f.coeff(&IdealHnf::UNIT).unwrap());
        for r in s.ideals.iter().filter(|r| r.norm() <= 400) {
            if !k.divides(&q, r) {
                assert!(up.coeff(r).unwrap().is_zero());
            }
        }
        let back = up.t_shift(&q);
        assert_eq!(back.precision(), 300);
        assert!(back.equal_up_to(&f, 300).unwrap());

        let down = f.t_shift(&q);
        assert_eq!(down.precision(), 150);
        for r in s.ideals.iter().filter(|r| r.norm() <= 150) {
            assert_eq!(down.coeff(r).unwrap(), f.coeff(&k.ideal_mul(r, &q)).unwrap());
        }
        // iota . t kills terms not divisible by q
        let killed = down.iota_shift(&q);
        for r in s.ideals.iter().filter(|r| r.norm() <= 300) {
            let expected = if k.divides(&q, r) { f.coeff(r).unwrap() } else { s.gf.zero() };
            assert_eq!(killed.coeff(r).unwrap(), expected);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = setup();
        let f = random_form(&s, 9, 60);
        let text = serde_json::to_string(&f.to_json()).unwrap();
        let parsed: QExpJson = serde_json::from_str(&text).unwrap();
        let g = AdelicQExpansion::from_json(&parsed, &s.group, &s.gf).unwrap();
        assert!(g.equal_up_to(&f, 60).unwrap());
        assert_eq!(g.weight(), 1);
        assert!(text.contains("\"coeffs\":[[[1,0,1],"));
    }
}
