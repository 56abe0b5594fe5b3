//! The doubling experiment: for a weight 1 eigenform f and a prime p, the
//! span W of the forms V_P f (P squarefree, P | p) has dimension 2^s, every
//! T_{p'}^{(p)} with p' | p preserves W and is killed by
//! X^2 - lambda_{p'} X + eps(p'), and on each
//! W_p = W[T_{p'} - alpha_{p'} : p' != p] the operator T_p has minimal
//! polynomial X^2 - lambda_p X + eps(p).
//!
//! Matrices act on coordinate columns: column j holds the coordinates of
//! T(basis_j) in the basis, so for s = 1 and basis (V_1 f, V_p f) the
//! matrix is [[lambda, 1], [-eps, 0]].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class_group::{Character, NarrowClassGroup};
use crate::eigenforms::{eisenstein, verify_eigenform, ConstantMode, EigenCheck};
use crate::error::{Error, Result};
use crate::finite_field::{Gf, GfContext, QuadraticRoots};
use crate::ideal::{IdealHnf, PrimeIdeal};
use crate::linalg::{common_kernel, hecke_quadratic, poly_display, poly_is_squarefree, same_span, span_basis, Matrix};
use crate::number_field::QuadraticField;
use crate::operators::{apply_t, apply_vp_direct, hasse_lift, squarefree_divisors_of_p};
use crate::qexp::AdelicQExpansion;

/// Default cap for the precision auto-retry.
pub const DEFAULT_MAX_PRECISION: u64 = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    #[default]
    First,
    Second,
    Both,
}

impl std::str::FromStr for RootChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(RootChoice::First),
            "second" => Ok(RootChoice::Second),
            "both" => Ok(RootChoice::Both),
            _ => Err(Error::InvalidArgument(format!("unknown root choice {s:?} (expected first, second or both)"))),
        }
    }
}

fn default_constant_mode() -> ConstantMode {
    ConstantMode::Zero
}

fn default_max_precision() -> u64 {
    DEFAULT_MAX_PRECISION
}

/// One experiment. Characters are indices into the label-ordered list of
/// narrow class characters (0 is trivial).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "D")]
    pub d: i64,
    pub p: u64,
    /// Coefficient field degree; the smallest degree hosting the characters
    /// when absent.
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(rename = "B")]
    pub precision: u64,
    #[serde(default)]
    pub phi1: usize,
    #[serde(default)]
    pub phi2: usize,
    #[serde(default = "default_constant_mode")]
    pub constant_mode: ConstantMode,
    #[serde(default)]
    pub roots: RootChoice,
    #[serde(default = "default_max_precision")]
    pub max_precision: u64,
}

impl ExperimentConfig {
    pub fn new(d: i64, p: u64, precision: u64) -> Self {
        ExperimentConfig {
            d,
            p,
            m: None,
            precision,
            phi1: 0,
            phi2: 0,
            constant_mode: ConstantMode::Zero,
            roots: RootChoice::First,
            max_precision: DEFAULT_MAX_PRECISION,
        }
    }

    pub fn with_characters(mut self, phi1: usize, phi2: usize) -> Self {
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }
}

/// A coordinate of an expansion: a constant-term slot or a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Constant(usize),
    Ideal(IdealHnf),
}

fn coordinate_vector(f: &AdelicQExpansion, coords: &[Coordinate]) -> Result<Vec<Gf>> {
    coords
        .iter()
        .map(|c| match c {
            Coordinate::Constant(i) => Ok(f.constant().coeffs()[*i]),
            Coordinate::Ideal(r) => f.coeff(r),
        })
        .collect()
}

/// The forms V_P f and their coefficient matrix.
#[derive(Clone)]
pub struct WBasis {
    pub primes: Vec<PrimeIdeal>,
    pub labels: Vec<IdealHnf>,
    pub forms: Vec<AdelicQExpansion>,
    /// Ideal coordinates run over norms up to this bound.
    pub coordinate_bound: u64,
    pub coordinates: Vec<Coordinate>,
    /// One row per basis form.
    pub matrix: Matrix,
    pub rank: usize,
}

impl WBasis {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    fn gf(&self) -> &Arc<GfContext> {
        self.forms[0].gf()
    }

    /// Coordinates of `g` in the basis, checked on every shared coordinate.
    pub fn solve(&self, g: &AdelicQExpansion) -> Result<Vec<Gf>> {
        if g.precision() < self.coordinate_bound {
            return Err(Error::Precision(format!(
                "image known to norm {} but the basis is compared to norm {}",
                g.precision(),
                self.coordinate_bound
            )));
        }
        let target = coordinate_vector(g, &self.coordinates)?;
        self.matrix.solve_left(self.gf(), &target).ok_or_else(|| {
            Error::Falsified(format!(
                "image does not lie in span of the V_P f on the {} shared coordinates",
                self.coordinates.len()
            ))
        })
    }

    /// Rows of coefficient vectors for coordinate columns `xs`.
    pub fn to_coefficient_rows(&self, xs: &[Vec<Gf>]) -> Vec<Vec<Gf>> {
        let t = self.matrix.transpose();
        xs.iter().map(|x| t.mul_vec(self.gf(), x)).collect()
    }
}

/// Builds the 2^s forms V_P f over squarefree P | (p) in canonical order and
/// checks they are independent on the coordinates every T_{p'} image shares.
pub fn build_w(f: &AdelicQExpansion, p: u64) -> Result<WBasis> {
    if f.weight() != 1 {
        return Err(Error::InvalidArgument(format!("expected a weight 1 form, got weight {}", f.weight())));
    }
    if f.is_constant() {
        return Err(Error::InvalidArgument(
            "form has no nonzero coefficient a(r); constant forms are handled by the eigenvalue check".into(),
        ));
    }
    if f.gf().characteristic() != p {
        return Err(Error::Mismatch(format!("coefficients have characteristic {}, not {p}", f.gf().characteristic())));
    }
    let field = f.field();
    let primes = field.primes_above(p)?;
    let max_norm = primes.iter().map(|q| q.norm()).max().expect("at least one prime above p");
    let coordinate_bound = f.precision() / max_norm;
    let divisors = squarefree_divisors_of_p(field, p)?;
    let mut labels = Vec::with_capacity(divisors.len());
    let mut forms = Vec::with_capacity(divisors.len());
    for (big_p, _) in &divisors {
        labels.push(*big_p);
        forms.push(apply_vp_direct(f, big_p)?);
    }
    let mut coordinates: Vec<Coordinate> = (0..f.group().order()).map(Coordinate::Constant).collect();
    coordinates.extend(field.enumerate_ideals(coordinate_bound).into_iter().map(Coordinate::Ideal));
    let rows = forms.iter().map(|g| coordinate_vector(g, &coordinates)).collect::<Result<Vec<_>>>()?;
    let matrix = Matrix::from_rows(rows);
    let rank = matrix.rank(f.gf());
    if rank != labels.len() {
        return Err(Error::Precision(format!(
            "the {} forms V_P f have rank {rank} on coordinates up to norm {coordinate_bound}",
            labels.len()
        )));
    }
    Ok(WBasis { primes, labels, forms, coordinate_bound, coordinates, matrix, rank })
}

/// Matrix of T_{q}^{(p)} on W, solved from the expansions.
pub fn matrix_of_t(w: &WBasis, q: &PrimeIdeal) -> Result<Matrix> {
    let p = w.gf().characteristic();
    if q.rational_prime != p {
        return Err(Error::InvalidArgument(format!("{} does not lie above {p}", q.ideal)));
    }
    let columns = w
        .forms
        .iter()
        .map(|g| w.solve(&apply_t(g, q, Some(p as u32))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_columns(&columns))
}

/// M^2 - lambda M + eps I = 0.
pub fn check_annihilator(gf: &GfContext, m: &Matrix, lambda: Gf, eps: Gf) -> bool {
    m.is_square() && m.eval_poly(gf, &hecke_quadratic(gf, lambda, eps)).is_zero()
}

/// Common kernel of M_j - alpha_j over the indices j != `fixed`. Must be
/// two-dimensional.
pub fn build_wp(gf: &GfContext, mats: &[Matrix], alphas: &[Gf], fixed: usize) -> Result<Vec<Vec<Gf>>> {
    let n = mats[fixed].rows();
    let shifted: Vec<Matrix> = mats
        .iter()
        .zip(alphas)
        .enumerate()
        .filter(|(j, _)| *j != fixed)
        .map(|(_, (m, a))| m.minus_scalar(gf, *a))
        .collect();
    let basis = common_kernel(gf, &shifted, n);
    if basis.len() != 2 {
        return Err(Error::Falsified(format!("W_p has dimension {}, expected 2", basis.len())));
    }
    Ok(basis)
}

/// Matrix of M on the invariant subspace spanned by `basis` (columns).
pub fn restrict(gf: &GfContext, m: &Matrix, basis: &[Vec<Gf>]) -> Result<Matrix> {
    let b = Matrix::from_columns(basis);
    let cols = basis
        .iter()
        .map(|v| {
            b.solve(gf, &m.mul_vec(gf, v))
                .ok_or_else(|| Error::Falsified("subspace is not invariant under the operator".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_columns(&cols))
}

/// Minimal polynomial of M on span(basis) and whether M acts semisimply
/// there. The minimal polynomial must be X^2 - lambda X + eps.
pub fn minpoly_and_semisimplicity(
    gf: &GfContext,
    m: &Matrix,
    basis: &[Vec<Gf>],
    lambda: Gf,
    eps: Gf,
) -> Result<(Vec<Gf>, bool)> {
    let r = restrict(gf, m, basis)?;
    let mp = r.minimal_polynomial(gf);
    let expected = hecke_quadratic(gf, lambda, eps);
    if mp != expected {
        return Err(Error::Falsified(format!(
            "minimal polynomial on W_p is {}, expected {}",
            poly_display(gf, &mp),
            poly_display(gf, &expected)
        )));
    }
    let semisimple = poly_is_squarefree(gf, &mp);
    Ok((mp, semisimple))
}

/// Closure of the coordinate vector e_0 (the form h f) under the matrices.
pub fn closure_of_hf(gf: &GfContext, mats: &[Matrix], n: usize) -> Vec<Vec<Gf>> {
    let mut e0 = vec![Gf::ZERO; n];
    e0[0] = gf.one();
    let mut span = vec![e0.clone()];
    let mut frontier = vec![e0];
    while let Some(v) = frontier.pop() {
        for m in mats {
            let w = m.mul_vec(gf, &v);
            let mut extended = span.clone();
            extended.push(w.clone());
            if span_basis(gf, &extended, n).len() > span_basis(gf, &span, n).len() {
                span.push(w.clone());
                frontier.push(w);
            }
        }
    }
    span
}

/// Per-prime part of a report. Field elements are coefficient lists over
/// the prime field, constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeReport {
    pub ideal: IdealHnf,
    pub norm: u64,
    pub lambda: Vec<u64>,
    pub epsilon: Vec<u64>,
    /// Row-major.
    pub matrix: Vec<Vec<Vec<u64>>>,
    pub annihilator_holds: bool,
    pub roots: Vec<Vec<u64>>,
    pub distinct_roots: bool,
    pub alpha: Vec<u64>,
    pub wp_dim: usize,
    pub wp_basis: Vec<Vec<Vec<u64>>>,
    pub minimal_polynomial: Vec<Vec<u64>>,
    pub minimal_polynomial_text: String,
    pub semisimple: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingReport {
    #[serde(rename = "D")]
    pub d: i64,
    pub p: u64,
    pub m: u32,
    pub field_modulus: Vec<u64>,
    pub s: usize,
    pub class_number: usize,
    pub phi1: Vec<u64>,
    pub phi2: Vec<u64>,
    pub constant_mode: ConstantMode,
    pub basis_labels: Vec<IdealHnf>,
    pub rank: usize,
    pub precision: u64,
    pub coordinate_bound: u64,
    pub primes: Vec<PrimeReport>,
    pub matrices_commute: bool,
    pub closure_equals_w: bool,
}

impl DoublingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Everything from the pipeline except the root choice.
struct Pipeline {
    gf: Arc<GfContext>,
    group: Arc<NarrowClassGroup>,
    phi1: Character,
    phi2: Character,
    w: WBasis,
    lambdas: Vec<Gf>,
    epsilons: Vec<Gf>,
    mats: Vec<Matrix>,
    roots: Vec<(Gf, Gf, bool)>,
    closure_equals_w: bool,
    matrices_commute: bool,
}

enum Attempt {
    Done(Box<Pipeline>),
    Extend(u32),
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn run_pipeline(config: &ExperimentConfig, m: u32, precision: u64, order: &[usize]) -> Result<Attempt> {
    let field = stage("field", QuadraticField::new(config.d))?;
    let group = stage("class_group", NarrowClassGroup::of_field(field))?;
    let gf = stage("coefficient_field", GfContext::new(config.p, m))?;
    let chars = stage("characters", group.characters(&gf))?;
    let pick = |i: usize| {
        chars.get(i).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("character index {i} out of range (group has {} characters)", chars.len()))
                .in_stage("characters")
        })
    };
    let (phi1, phi2) = (pick(config.phi1)?, pick(config.phi2)?);
    let f = stage("eigenform", eisenstein(&phi1, &phi2, precision, config.constant_mode))?;

    let primes = stage("primes", group.field().primes_above(config.p))?;
    if order.len() != primes.len() || !(0..primes.len()).all(|i| order.contains(&i)) {
        return Err(Error::InvalidArgument("prime order must permute the primes above p".into()).in_stage("primes"));
    }
    let mut check_primes = primes.clone();
    check_primes.extend(group.field().primes_up_to_norm(20).into_iter().filter(|q| q.rational_prime != config.p));
    let table = match stage("verify_eigenform", verify_eigenform(&f, &check_primes))? {
        EigenCheck::Eigen(t) => t,
        EigenCheck::NotEigen { prime, at, expected, found } => {
            return Err(Error::Falsified(format!(
                "T at {prime} is not a multiple of f at {at}: {} vs {}",
                gf.display(expected),
                gf.display(found)
            ))
            .in_stage("verify_eigenform"));
        }
    };
    let lambdas: Vec<Gf> = (0..primes.len()).map(|i| table[i].1).collect();
    let epsilons = primes
        .iter()
        .map(|q| f.nebentypus().value_at(&q.ideal))
        .collect::<Result<Vec<_>>>()?;

    let w = stage("build_W", build_w(&f, config.p))?;

    // matrices in the requested order, stored back in canonical order
    let mut mats: Vec<Option<Matrix>> = vec![None; primes.len()];
    for &i in order {
        let m = stage("matrix_of_T", matrix_of_t(&w, &primes[i]))?;
        if !check_annihilator(&gf, &m, lambdas[i], epsilons[i]) {
            return Err(Error::Falsified(format!(
                "matrix of T at {} is not killed by {}",
                primes[i].ideal,
                poly_display(&gf, &hecke_quadratic(&gf, lambdas[i], epsilons[i]))
            ))
            .in_stage("check_annihilator"));
        }
        if m.rank(&gf) != m.rows() {
            return Err(Error::Falsified(format!("matrix of T at {} is singular", primes[i].ideal))
                .in_stage("check_annihilator"));
        }
        mats[i] = Some(m);
    }
    let mats: Vec<Matrix> = mats.into_iter().map(|m| m.expect("every prime visited")).collect();
    let matrices_commute = mats
        .iter()
        .enumerate()
        .all(|(i, a)| mats[i + 1..].iter().all(|b| a.mul(&gf, b) == b.mul(&gf, a)));
    if !matrices_commute {
        return Err(Error::Falsified("Hecke matrices above p do not commute".into()).in_stage("matrix_of_T"));
    }

    let mut roots = Vec::with_capacity(primes.len());
    for i in 0..primes.len() {
        match stage("roots", gf.quadratic_roots(lambdas[i], epsilons[i]))? {
            QuadraticRoots::Split { first, second, double } => roots.push((first, second, double)),
            QuadraticRoots::NeedsExtension(m2) => return Ok(Attempt::Extend(m2)),
        }
    }

    let hf = stage("closure", coordinate_vector(&hasse_lift(&f), &w.coordinates))?;
    if hf != w.matrix.row(0) {
        return Err(Error::Falsified("h f is not the first basis form V_(1) f".into()).in_stage("closure"));
    }
    let ordered_mats: Vec<Matrix> = order.iter().map(|&i| mats[i].clone()).collect();
    let closure = closure_of_hf(&gf, &ordered_mats, w.dim());
    let closure_rows = w.to_coefficient_rows(&closure);
    let w_rows = w.matrix.to_rows();
    let closure_equals_w = closure.len() == w.dim() && same_span(&gf, &closure_rows, &w_rows, w.coordinates.len());
    if !closure_equals_w {
        return Err(Error::Falsified(format!(
            "closure of h f under the T above p has dimension {}, W has dimension {}",
            closure.len(),
            w.dim()
        ))
        .in_stage("closure"));
    }

    Ok(Attempt::Done(Box::new(Pipeline {
        gf,
        group,
        phi1,
        phi2,
        w,
        lambdas,
        epsilons,
        mats,
        roots,
        closure_equals_w,
        matrices_commute,
    })))
}

fn root_assignments(roots: &[(Gf, Gf, bool)], choice: RootChoice) -> Vec<Vec<Gf>> {
    match choice {
        RootChoice::First => vec![roots.iter().map(|r| r.0).collect()],
        RootChoice::Second => vec![roots.iter().map(|r| r.1).collect()],
        RootChoice::Both => {
            let mut out: Vec<Vec<Gf>> = vec![Vec::new()];
            for &(a, b, double) in roots {
                let options: Vec<Gf> = if double { vec![a] } else { vec![a, b] };
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |&x| {
                            let mut v = prefix.clone();
                            v.push(x);
                            v
                        })
                    })
                    .collect();
            }
            out
        }
    }
}

fn report_for(pl: &Pipeline, config: &ExperimentConfig, precision: u64, alphas: &[Gf]) -> Result<DoublingReport> {
    let gf = &pl.gf;
    let enc = |x: Gf| gf.coeffs(x);
    let enc_vecs = |vs: &[Vec<Gf>]| vs.iter().map(|v| v.iter().map(|x| enc(*x)).collect()).collect();
    let mut primes = Vec::with_capacity(pl.w.primes.len());
    for (i, q) in pl.w.primes.iter().enumerate() {
        let wp = stage("build_Wp", build_wp(gf, &pl.mats, alphas, i))?;
        let (mp, semisimple) =
            stage("minpoly", minpoly_and_semisimplicity(gf, &pl.mats[i], &wp, pl.lambdas[i], pl.epsilons[i]))?;
        let (r1, r2, double) = pl.roots[i];
        let distinct = !double;
        if semisimple != distinct {
            return Err(Error::Falsified(format!(
                "T at {} is {} but its roots are {}",
                q.ideal,
                if semisimple { "semisimple" } else { "not semisimple" },
                if distinct { "distinct" } else { "equal" }
            ))
            .in_stage("minpoly"));
        }
        primes.push(PrimeReport {
            ideal: q.ideal,
            norm: q.norm(),
            lambda: enc(pl.lambdas[i]),
            epsilon: enc(pl.epsilons[i]),
            matrix: enc_vecs(&pl.mats[i].to_rows()),
            annihilator_holds: true,
            roots: if double { vec![enc(r1)] } else { vec![enc(r1), enc(r2)] },
            distinct_roots: distinct,
            alpha: enc(alphas[i]),
            wp_dim: wp.len(),
            wp_basis: enc_vecs(&wp),
            minimal_polynomial: mp.iter().map(|c| enc(*c)).collect(),
            minimal_polynomial_text: poly_display(gf, &mp),
            semisimple,
        });
    }
    Ok(DoublingReport {
        d: config.d,
        p: config.p,
        m: gf.degree(),
        field_modulus: gf.modulus().to_vec(),
        s: pl.w.primes.len(),
        class_number: pl.group.order(),
        phi1: pl.phi1.label().to_vec(),
        phi2: pl.phi2.label().to_vec(),
        constant_mode: config.constant_mode,
        basis_labels: pl.w.labels.clone(),
        rank: pl.w.rank,
        precision,
        coordinate_bound: pl.w.coordinate_bound,
        primes,
        matrices_commute: pl.matrices_commute,
        closure_equals_w: pl.closure_equals_w,
    })
}

/// Runs the whole experiment, doubling the precision on precision failures
/// (up to `max_precision`) and moving to a larger coefficient field when a
/// Hecke polynomial has no root. One report per root assignment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<DoublingReport>> {
    let field = stage("field", QuadraticField::new(config.d))?;
    let s = stage("primes", field.primes_above(config.p))?.len();
    run_experiment_with_order(config, &(0..s).collect::<Vec<_>>())
}

/// As [`run_experiment`], processing the primes above p in `order`.
pub fn run_experiment_with_order(config: &ExperimentConfig, order: &[usize]) -> Result<Vec<DoublingReport>> {
    if config.precision == 0 {
        return Err(Error::InvalidArgument("B must be >= 1".into()).in_stage("config"));
    }
    let mut m = match config.m {
        Some(m) => m,
        None => {
            let field = stage("field", QuadraticField::new(config.d))?;
            let group = stage("class_group", NarrowClassGroup::of_field(field))?;
            stage("coefficient_field", group.minimal_degree(config.p))?
        }
    };
    let mut precision = config.precision;
    loop {
        match run_pipeline(config, m, precision, order) {
            Ok(Attempt::Done(pl)) => {
                return root_assignments(&pl.roots, config.roots)
                    .iter()
                    .map(|alphas| report_for(&pl, config, precision, alphas))
                    .collect();
            }
            Ok(Attempt::Extend(m2)) => m = m2,
            Err(e) if e.is_precision() => {
                if precision.saturating_mul(2) > config.max_precision {
                    return Err(Error::Precision(format!(
                        "gave up at B = {precision} (cap {}): {e}",
                        config.max_precision
                    )));
                }
                precision *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::frobenius_support;

    fn setup(d: i64, p: u64) -> (Arc<NarrowClassGroup>, Arc<GfContext>, Vec<Character>) {
        let field = QuadraticField::new(d).unwrap();
        let group = NarrowClassGroup::of_field(field).unwrap();
        let gf = GfContext::new(p, group.minimal_degree(p).unwrap()).unwrap();
        let chars = group.characters(&gf).unwrap();
        (group, gf, chars)
    }

    #[test]
    fn inert_matrix_is_companion() {
        let (_, gf, cs) = setup(3, 7);
        let f = eisenstein(&cs[0], &cs[0], 4000, ConstantMode::Zero).unwrap();
        let w = build_w(&f, 7).unwrap();
        assert_eq!(w.labels, vec![IdealHnf::UNIT, IdealHnf::from_triple(7, 0, 7).unwrap()]);
        let m = matrix_of_t(&w, &w.primes[0]).unwrap();
        // column of V_1 f is (lambda, -eps), column of V_p f is (1, 0)
        let expect = Matrix::from_rows(vec![vec![gf.from_i64(2), gf.one()], vec![gf.from_i64(-1), gf.zero()]]);
        assert_eq!(m, expect);
        assert!(check_annihilator(&gf, &m, gf.from_i64(2), gf.one()));
        assert!(!check_annihilator(&gf, &m, gf.from_i64(3), gf.one()));
    }

    #[test]
    fn low_precision_is_reported() {
        let (_, _, cs) = setup(3, 7);
        let f = eisenstein(&cs[0], &cs[0], 2000, ConstantMode::Zero).unwrap();
        assert!(build_w(&f, 7).err().unwrap().is_precision());
    }

    #[test]
    fn zero_and_constant_forms_rejected() {
        let (_, _, cs) = setup(3, 7);
        let z = AdelicQExpansion::zero(1, &cs[0], 1000);
        assert!(build_w(&z, 7).is_err());
        let c = crate::eigenforms::constant_form(&cs[0], &cs[0], 1000).unwrap();
        assert!(build_w(&c, 7).is_err());
    }

    #[test]
    fn column_with_p_dividing_p_is_basis_vector() {
        let (group, gf, cs) = setup(3, 11);
        let f = eisenstein(&cs[0], &cs[0], 2000, ConstantMode::VPhi1).unwrap();
        let w = build_w(&f, 11).unwrap();
        let field = group.field();
        for q in &w.primes {
            let m = matrix_of_t(&w, q).unwrap();
            for (j, big_p) in w.labels.iter().enumerate() {
                if let Some(quot) = field.ideal_quotient(big_p, &q.ideal) {
                    let k = w.labels.iter().position(|l| *l == quot).unwrap();
                    let col = m.column(j);
                    for (i, v) in col.iter().enumerate() {
                        assert_eq!(*v, if i == k { gf.one() } else { gf.zero() });
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_alpha_gives_trivial_kernel() {
        let (_, gf, cs) = setup(3, 11);
        let f = eisenstein(&cs[0], &cs[0], 2000, ConstantMode::Zero).unwrap();
        let w = build_w(&f, 11).unwrap();
        let mats: Vec<Matrix> = w.primes.iter().map(|q| matrix_of_t(&w, q).unwrap()).collect();
        let err = build_wp(&gf, &mats, &[gf.from_i64(3), gf.from_i64(3)], 0).unwrap_err();
        assert!(err.is_falsified());
        assert_eq!(build_wp(&gf, &mats, &[gf.one(), gf.one()], 0).unwrap().len(), 2);
    }

    #[test]
    fn scalar_input_falsifies_minpoly() {
        let gf = GfContext::new(7, 1).unwrap();
        let m = Matrix::identity(&gf, 2);
        let basis = vec![vec![gf.one(), gf.zero()], vec![gf.zero(), gf.one()]];
        let err = minpoly_and_semisimplicity(&gf, &m, &basis, gf.from_i64(2), gf.one()).unwrap_err();
        assert!(err.is_falsified());
    }

    /// dim span{V_Q f : Q | P q} = 2 dim span{V_Q f : Q | P} and equals
    /// span{V_Q f : Q | P} + T_q span{V_Q f : Q | P}.
    #[test]
    fn spaces_double_prime_by_prime() {
        let (group, gf, cs) = setup(3, 11);
        let field = group.field();
        let f = eisenstein(&cs[0], &cs[1], 2000, ConstantMode::Zero).unwrap();
        let w = build_w(&f, 11).unwrap();
        let n = w.dim();
        let unit = |k: usize| {
            let mut v = vec![gf.zero(); n];
            v[k] = gf.one();
            v
        };
        let z = |big_p: &IdealHnf| -> Vec<Vec<Gf>> {
            w.labels.iter().enumerate().filter(|(_, l)| field.divides(l, big_p)).map(|(k, _)| unit(k)).collect()
        };
        for (big_p, _) in squarefree_divisors_of_p(field, 11).unwrap() {
            let support = frobenius_support(field, &big_p, 11).unwrap();
            for q in w.primes.iter().filter(|q| !support.contains(q)) {
                let m = matrix_of_t(&w, q).unwrap();
                let zp = z(&big_p);
                let bigger = z(&field.ideal_mul(&big_p, &q.ideal));
                assert_eq!(bigger.len(), 2 * zp.len());
                let mut sum = zp.clone();
                sum.extend(zp.iter().map(|v| m.mul_vec(&gf, v)));
                assert!(same_span(&gf, &sum, &bigger, n));
                assert_eq!(span_basis(&gf, &sum, n).len(), 2 * zp.len());
            }
        }
    }

    #[test]
    fn report_independent_of_prime_order() {
        let config = ExperimentConfig::new(3, 11, 500).with_characters(0, 1);
        let a = run_experiment_with_order(&config, &[0, 1]).unwrap();
        let b = run_experiment_with_order(&config, &[1, 0]).unwrap();
        assert_eq!(a, b);
        assert!(run_experiment_with_order(&config, &[0, 0]).is_err());
    }

    #[test]
    fn both_roots_give_all_assignments() {
        let mut config = ExperimentConfig::new(3, 11, 2000).with_characters(0, 1);
        config.roots = RootChoice::Both;
        let reports = run_experiment(&config).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(r.primes.iter().all(|p| p.semisimple && p.wp_dim == 2));
        }
        config.roots = RootChoice::Second;
        let second = run_experiment(&config).unwrap();
        assert_eq!(second.len(), 1);
        assert_eq!(second[0], reports[3]);
    }

    #[test]
    fn roots_are_the_character_values() {
        // X^2 - (phi1 + phi2)(q) X + (phi1 phi2)(q) = (X - phi1(q))(X - phi2(q)),
        // so the roots already lie in the character field
        for (d, p) in [(5, 11), (10, 7), (15, 7)] {
            let (group, gf, cs) = setup(d, p);
            let primes = group.field().primes_above(p).unwrap();
            for i in 0..cs.len() {
                for j in 0..cs.len() {
                    let config = ExperimentConfig::new(d, p, 500).with_characters(i, j);
                    let report = run_experiment(&config).unwrap().remove(0);
                    assert_eq!(report.m, gf.degree());
                    for (q, pr) in primes.iter().zip(&report.primes) {
                        let mut want = vec![cs[i].value_at(&q.ideal).unwrap(), cs[j].value_at(&q.ideal).unwrap()];
                        want.sort();
                        want.dedup();
                        let got: Vec<Gf> = pr.roots.iter().map(|c| gf.from_coeffs(c).unwrap()).collect();
                        assert_eq!(got, want, "D={d} p={p} ({i}, {j})");
                    }
                }
            }
        }
    }
}
