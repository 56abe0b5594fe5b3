//! The narrow class group Cl_F^+ and its characters with values in F_{p^m}.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::arith::lcm;
use crate::error::{Error, Result};
use crate::finite_field::{Gf, GfContext};
use crate::ideal::{Factorization, IdealHnf};
use crate::number_field::QuadraticField;

const MAX_CLASS_NUMBER: usize = 512;

pub struct NarrowClassGroup {
    field: QuadraticField,
    reps: Vec<IdealHnf>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    orders: Vec<u64>,
    exponent: u64,
    /// Basis of the group as (class index, order); every class is uniquely
    /// a product of powers of these.
    basis: Vec<(usize, u64)>,
    /// Exponent vector of every class with respect to `basis`.
    coords: Vec<Vec<u64>>,
    cache: RwLock<HashMap<IdealHnf, usize>>,
}

impl fmt::Debug for NarrowClassGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NarrowClassGroup")
            .field("d", &self.field.d())
            .field("reps", &self.reps)
            .field("orders", &self.orders)
            .finish()
    }
}

impl NarrowClassGroup {
    /// Builds the group from the prime ideals of norm <= `prime_bound`
    /// together with the ideal (w). Since N(w) < 0, (w) generates the kernel
    /// of Cl^+ -> Cl whenever that kernel is nontrivial, so a bound that
    /// generates the wide class group suffices.
    pub fn new(field: QuadraticField, prime_bound: u64) -> Result<Arc<Self>> {
        let mut gens: Vec<IdealHnf> =
            field.primes_up_to_norm(prime_bound).into_iter().map(|p| p.ideal).collect();
        gens.push(field.principal_ideal(0, 1)?);

        // closure under the generators
        let mut elems = vec![IdealHnf::UNIT];
        let mut i = 0;
        while i < elems.len() {
            for g in &gens {
                let prod = field.ideal_mul(&elems[i], g).primitive_part();
                if !elems.iter().any(|e| field.narrowly_equivalent(&prod, e)) {
                    elems.push(prod);
                    if elems.len() > MAX_CLASS_NUMBER {
                        return Err(Error::ClassGroupNotClosed(format!(
                            "more than {MAX_CLASS_NUMBER} classes"
                        )));
                    }
                }
            }
            i += 1;
        }

        // smallest ideal in each class as its representative
        let h = elems.len();
        let max_norm = elems.iter().map(|e| e.norm()).max().unwrap_or(1);
        let mut best: Vec<Option<IdealHnf>> = vec![None; h];
        for ideal in field.enumerate_ideals(max_norm) {
            if best.iter().all(Option::is_some) {
                break;
            }
            if let Some(k) = (0..h).find(|&k| field.narrowly_equivalent(&ideal, &elems[k])) {
                if best[k].is_none() {
                    best[k] = Some(ideal);
                }
            }
        }
        let mut reps: Vec<IdealHnf> =
            best.into_iter().map(|b| b.expect("each class has an ideal of norm <= max_norm")).collect();
        reps.sort();
        debug_assert!(reps[0].is_unit());

        let mut group = NarrowClassGroup {
            field,
            reps,
            table: Vec::new(),
            inverse: Vec::new(),
            orders: Vec::new(),
            exponent: 1,
            basis: Vec::new(),
            coords: Vec::new(),
            cache: RwLock::new(HashMap::new()),
        };
        group.build_table()?;
        group.build_structure();
        Ok(Arc::new(group))
    }

    /// Group built with the default prime bound (the Minkowski bound).
    pub fn of_field(field: QuadraticField) -> Result<Arc<Self>> {
        let bound = field.minkowski_bound();
        Self::new(field, bound)
    }

    fn build_table(&mut self) -> Result<()> {
        let h = self.reps.len();
        let mut table = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in i..h {
                let prod = self.field.ideal_mul(&self.reps[i], &self.reps[j]);
                let k = self.find_class(&prod).ok_or_else(|| {
                    Error::ClassGroupNotClosed(format!("{} * {} has no class", self.reps[i], self.reps[j]))
                })?;
                table[i][j] = k;
                table[j][i] = k;
            }
        }
        for (i, row) in table.iter().enumerate() {
            let mut seen = vec![false; h];
            for &k in row {
                if seen[k] {
                    return Err(Error::ClassGroupNotClosed(format!("row {i} is not a permutation")));
                }
                seen[k] = true;
            }
            if row[0] != i {
                return Err(Error::ClassGroupNotClosed("class of (1) is not the identity".into()));
            }
        }
        self.inverse = (0..h).map(|i| (0..h).find(|&j| table[i][j] == 0).expect("row is a permutation")).collect();
        self.table = table;
        Ok(())
    }

    fn build_structure(&mut self) {
        let h = self.reps.len();
        self.orders = (0..h)
            .map(|i| {
                let mut cur = i;
                let mut n = 1;
                while cur != 0 {
                    cur = self.table[cur][i];
                    n += 1;
                }
                n
            })
            .collect();
        self.exponent = self.orders.iter().fold(1, |acc, &o| lcm(acc, o));
        let (basis, coords) = self.find_basis();
        self.basis = basis;
        self.coords = coords;
    }

    /// Searches for the shortest tuple of elements whose powers give every
    /// class exactly once. Desk-scale groups make the search trivial.
    fn find_basis(&self) -> (Vec<(usize, u64)>, Vec<Vec<u64>>) {
        let h = self.reps.len();
        if h == 1 {
            return (Vec::new(), vec![Vec::new()]);
        }
        let mut candidates: Vec<usize> = (1..h).collect();
        // larger orders first gives the familiar invariant-factor-like shape
        candidates.sort_by(|&a, &b| self.orders[b].cmp(&self.orders[a]).then(a.cmp(&b)));
        for r in 1..=h {
            let mut chosen = Vec::new();
            if let Some(res) = self.basis_search(&candidates, r, 0, &mut chosen) {
                return res;
            }
        }
        unreachable!("every finite abelian group has a basis")
    }

    #[allow(clippy::type_complexity)]
    fn basis_search(
        &self,
        candidates: &[usize],
        r: usize,
        start: usize,
        chosen: &mut Vec<usize>,
    ) -> Option<(Vec<(usize, u64)>, Vec<Vec<u64>>)> {
        if chosen.len() == r {
            let h = self.reps.len();
            let size: u64 = chosen.iter().map(|&g| self.orders[g]).product();
            if size != h as u64 {
                return None;
            }
            let mut coords: Vec<Option<Vec<u64>>> = vec![None; h];
            let mut exps = vec![0u64; r];
            loop {
                let mut cls = 0usize;
                for (k, &g) in chosen.iter().enumerate() {
                    for _ in 0..exps[k] {
                        cls = self.table[cls][g];
                    }
                }
                if coords[cls].is_some() {
                    return None;
                }
                coords[cls] = Some(exps.clone());
                // odometer, last coordinate fastest
                let mut k = r;
                loop {
                    if k == 0 {
                        let basis = chosen.iter().map(|&g| (g, self.orders[g])).collect();
                        return Some((basis, coords.into_iter().map(|c| c.expect("bijective")).collect()));
                    }
                    k -= 1;
                    exps[k] += 1;
                    if exps[k] < self.orders[chosen[k]] {
                        break;
                    }
                    exps[k] = 0;
                }
            }
        }
        for idx in start..candidates.len() {
            chosen.push(candidates[idx]);
            if let Some(res) = self.basis_search(candidates, r, idx + 1, chosen) {
                return Some(res);
            }
            chosen.pop();
        }
        None
    }

    fn find_class(&self, ideal: &IdealHnf) -> Option<usize> {
        let prim = ideal.primitive_part();
        (0..self.reps.len()).find(|&k| self.field.narrowly_equivalent(&prim, &self.reps[k]))
    }

    pub fn field(&self) -> &QuadraticField {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[IdealHnf] {
        &self.reps
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn compose(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse_class(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn element_order(&self, i: usize) -> u64 {
        self.orders[i]
    }

    pub fn basis(&self) -> &[(usize, u64)] {
        &self.basis
    }

    pub fn coords(&self, class: usize) -> &[u64] {
        &self.coords[class]
    }

    /// Invariants (orders of the basis elements).
    pub fn structure(&self) -> Vec<u64> {
        self.basis.iter().map(|&(_, o)| o).collect()
    }

    /// Index of the class of `ideal`.
    pub fn class_of(&self, ideal: &IdealHnf) -> Result<usize> {
        let prim = ideal.primitive_part();
        if prim.is_unit() {
            return Ok(0);
        }
        if self.reps.len() == 1 {
            return Ok(0);
        }
        if let Some(&k) = self.cache.read().expect("cache lock").get(&prim) {
            return Ok(k);
        }
        let k = self
            .find_class(&prim)
            .ok_or_else(|| Error::ClassGroupNotClosed(format!("{ideal} matches no representative")))?;
        let mut cache = self.cache.write().expect("cache lock");
        cache.insert(prim, k);
        // conj(I) is the inverse class since I conj(I) = (N(I))
        cache.insert(self.field.ideal_conj(&prim).primitive_part(), self.inverse[k]);
        Ok(k)
    }

    /// Class of a factored ideal via the composition table.
    pub fn class_of_factored(&self, fact: &Factorization) -> Result<usize> {
        let mut cls = 0;
        for (p, e) in fact {
            let c = self.class_of(&p.ideal)?;
            for _ in 0..*e {
                cls = self.table[cls][c];
            }
        }
        Ok(cls)
    }

    /// Smallest m with exponent | p^m - 1.
    pub fn minimal_degree(&self, p: u64) -> Result<u32> {
        if self.exponent % p == 0 {
            return Err(Error::CharacteristicDividesExponent { p, exponent: self.exponent });
        }
        let mut m = 1u32;
        let mut pm = p % self.exponent;
        while (pm + self.exponent - 1) % self.exponent != 0 {
            pm = pm * p % self.exponent;
            m += 1;
        }
        Ok(m)
    }

    /// All |G| characters with values in `gf`, ordered by their exponent
    /// labels (lexicographic; the trivial character first).
    pub fn characters(self: &Arc<Self>, gf: &Arc<GfContext>) -> Result<Vec<Character>> {
        let q1 = gf.size() - 1;
        if q1 % self.exponent != 0 {
            let needed = self.minimal_degree(gf.characteristic())?;
            return Err(Error::CharacterFieldTooSmall { size: gf.size(), exponent: self.exponent, needed });
        }
        let zeta = gf.root_of_unity(self.exponent)?;
        let r = self.basis.len();
        let mut out = Vec::with_capacity(self.order());
        let mut label = vec![0u64; r];
        loop {
            let values = (0..self.order())
                .map(|cls| {
                    let e: u64 = self.coords[cls]
                        .iter()
                        .zip(&label)
                        .zip(&self.basis)
                        .map(|((&k, &j), &(_, ord))| k * j * (self.exponent / ord))
                        .sum();
                    gf.pow(zeta, e % self.exponent)
                })
                .collect();
            out.push(Character { group: self.clone(), gf: gf.clone(), values, label: label.clone() });
            let mut k = r;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                label[k] += 1;
                if label[k] < self.basis[k].1 {
                    break;
                }
                label[k] = 0;
            }
        }
    }
}

/// A homomorphism Cl_F^+ -> F_{p^m}^*, stored as its table of values.
#[derive(Clone)]
pub struct Character {
    group: Arc<NarrowClassGroup>,
    gf: Arc<GfContext>,
    values: Vec<Gf>,
    label: Vec<u64>,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(|&v| self.gf.display(v)).collect();
        write!(f, "Character{:?}[{}]", self.label, vals.join(", "))
    }
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.gf == other.gf && self.group.reps == other.group.reps
    }
}
impl Eq for Character {}

impl Character {
    pub fn trivial(group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>) -> Character {
        Character {
            group: group.clone(),
            gf: gf.clone(),
            values: vec![Gf::ONE; group.order()],
            label: vec![0; group.basis.len()],
        }
    }

    /// Builds a character from explicit values, checking multiplicativity.
    pub fn from_values(group: &Arc<NarrowClassGroup>, gf: &Arc<GfContext>, values: Vec<Gf>) -> Result<Character> {
        if values.len() != group.order() {
            return Err(Error::Mismatch(format!(
                "{} character values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        for i in 0..group.order() {
            for j in 0..group.order() {
                if gf.mul(values[i], values[j]) != values[group.compose(i, j)] {
                    return Err(Error::InvalidArgument("character values are not multiplicative".into()));
                }
            }
        }
        if values[0] != Gf::ONE {
            return Err(Error::InvalidArgument("character must be 1 on the trivial class".into()));
        }
        let label = group
            .characters(gf)
            .ok()
            .and_then(|all| all.into_iter().find(|c| c.values == values).map(|c| c.label))
            .unwrap_or_default();
        Ok(Character { group: group.clone(), gf: gf.clone(), values, label })
    }

    pub fn group(&self) -> &Arc<NarrowClassGroup> {
        &self.group
    }

    pub fn gf(&self) -> &Arc<GfContext> {
        &self.gf
    }

    pub fn values(&self) -> &[Gf] {
        &self.values
    }

    pub fn label(&self) -> &[u64] {
        &self.label
    }

    pub fn value(&self, class: usize) -> Gf {
        self.values[class]
    }

    pub fn value_at(&self, ideal: &IdealHnf) -> Result<Gf> {
        Ok(self.values[self.group.class_of(ideal)?])
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == Gf::ONE)
    }

    pub fn same_group(&self, other: &Character) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group.reps == other.group.reps
    }

    pub fn mul(&self, other: &Character) -> Result<Character> {
        if !self.same_group(other) || self.gf != other.gf {
            return Err(Error::Mismatch("characters on different groups or fields".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| self.gf.mul(a, b)).collect();
        let label = self
            .label
            .iter()
            .zip(&other.label)
            .zip(&self.group.basis)
            .map(|((&a, &b), &(_, o))| (a + b) % o)
            .collect();
        Ok(Character { group: self.group.clone(), gf: self.gf.clone(), values, label })
    }

    pub fn inverse(&self) -> Character {
        let values = self.values.iter().map(|&v| self.gf.inv(v).expect("character values are units")).collect();
        let label = self.label.iter().zip(&self.group.basis).map(|(&a, &(_, o))| (o - a) % o).collect();
        Character { group: self.group.clone(), gf: self.gf.clone(), values, label }
    }

    pub fn order(&self) -> u64 {
        self.values.iter().map(|&v| self.gf.multiplicative_order(v).expect("unit")).fold(1, lcm)
    }
}
