//! Dense matrices and polynomials over a finite field.
//!
//! Matrices act on column vectors. Polynomials are coefficient vectors,
//! constant term first, with no trailing zeros.

use crate::finite_field::{Gf, GfContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Gf::ZERO; rows * cols] }
    }

    pub fn identity(gf: &GfContext, n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, gf.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gf>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_columns(cols: &[Vec<Gf>]) -> Self {
        Matrix::from_rows(cols.to_vec()).transpose()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Gf {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Gf) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Gf] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Gf> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Gf>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, gf: &GfContext, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = gf.add(out.get(i, j), gf.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, gf: &GfContext, v: &[Gf]) -> Vec<Gf> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Gf::ZERO, |acc, (a, b)| gf.add(acc, gf.mul(*a, *b))))
            .collect()
    }

    pub fn add(&self, gf: &GfContext, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| gf.add(*a, *b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, gf: &GfContext, s: Gf) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| gf.mul(*a, s)).collect() }
    }

    /// self - s I
    pub fn minus_scalar(&self, gf: &GfContext, s: Gf) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m.set(i, i, gf.sub(m.get(i, i), s));
        }
        m
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self, gf: &GfContext) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = gf.inv(m.get(r, c)).expect("nonzero pivot");
            for j in c..m.cols {
                m.set(r, j, gf.mul(m.get(r, j), inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = gf.sub(m.get(i, j), gf.mul(f, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, gf: &GfContext) -> usize {
        self.rref(gf).1.len()
    }

    /// Basis of the right kernel {v : M v = 0}, one vector per free column.
    pub fn kernel(&self, gf: &GfContext) -> Vec<Vec<Gf>> {
        let (r, pivots) = self.rref(gf);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Gf::ZERO; self.cols];
                v[f] = gf.one();
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = gf.neg(r.get(i, f));
                }
                v
            })
            .collect()
    }

    /// Some x with x^T M = b^T (a combination of the rows equal to b), if
    /// one exists. The returned x is checked against every column.
    pub fn solve_left(&self, gf: &GfContext, b: &[Gf]) -> Option<Vec<Gf>> {
        self.transpose().solve(gf, b)
    }

    /// Some x with M x = b, checked against every row, or None.
    pub fn solve(&self, gf: &GfContext, b: &[Gf]) -> Option<Vec<Gf>> {
        assert_eq!(b.len(), self.rows, "shape mismatch");
        let mut aug = Matrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let (r, pivots) = aug.rref(gf);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Gf::ZERO; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols);
        }
        (self.mul_vec(gf, &x) == b).then_some(x)
    }

    /// Square matrix power by repeated multiplication.
    pub fn pow(&self, gf: &GfContext, e: u32) -> Matrix {
        (0..e).fold(Matrix::identity(gf, self.rows), |acc, _| acc.mul(gf, self))
    }

    /// p(M) for a polynomial p.
    pub fn eval_poly(&self, gf: &GfContext, poly: &[Gf]) -> Matrix {
        // Horner
        let mut acc = Matrix::zero(self.rows, self.cols);
        for c in poly.iter().rev() {
            acc = acc.mul(gf, self);
            for i in 0..self.rows {
                acc.set(i, i, gf.add(acc.get(i, i), *c));
            }
        }
        acc
    }

    /// The monic minimal polynomial: the first power M^d that is a linear
    /// combination of I, M, ..., M^{d-1}.
    pub fn minimal_polynomial(&self, gf: &GfContext) -> Vec<Gf> {
        assert!(self.is_square());
        let n = self.rows;
        let mut powers: Vec<Vec<Gf>> = vec![Matrix::identity(gf, n).data];
        let mut cur = Matrix::identity(gf, n);
        loop {
            cur = cur.mul(gf, self);
            let basis = Matrix::from_columns(&powers);
            if let Some(x) = basis.solve(gf, &cur.data) {
                let mut poly: Vec<Gf> = x.iter().map(|c| gf.neg(*c)).collect();
                poly.push(gf.one());
                return poly;
            }
            powers.push(cur.data.clone());
        }
    }
}

/// Span of the given vectors as an rref basis.
pub fn span_basis(gf: &GfContext, vectors: &[Vec<Gf>], dim: usize) -> Vec<Vec<Gf>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(vectors.to_vec());
    assert_eq!(m.cols(), dim);
    let (r, pivots) = m.rref(gf);
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Whether two families span the same subspace.
pub fn same_span(gf: &GfContext, a: &[Vec<Gf>], b: &[Vec<Gf>], dim: usize) -> bool {
    span_basis(gf, a, dim) == span_basis(gf, b, dim)
}

/// Intersection of right kernels of the given square matrices.
pub fn common_kernel(gf: &GfContext, mats: &[Matrix], n: usize) -> Vec<Vec<Gf>> {
    if mats.is_empty() {
        return (0..n)
            .map(|i| {
                let mut v = vec![Gf::ZERO; n];
                v[i] = gf.one();
                v
            })
            .collect();
    }
    let mut stacked = Vec::new();
    for m in mats {
        assert_eq!(m.cols(), n);
        stacked.extend(m.to_rows());
    }
    Matrix::from_rows(stacked).kernel(gf)
}

pub fn poly_trim(mut p: Vec<Gf>) -> Vec<Gf> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn poly_derivative(gf: &GfContext, p: &[Gf]) -> Vec<Gf> {
    poly_trim(p.iter().enumerate().skip(1).map(|(i, c)| gf.mul(gf.from_u64(i as u64), *c)).collect())
}

fn poly_rem(gf: &GfContext, a: &[Gf], b: &[Gf]) -> Vec<Gf> {
    let mut r = poly_trim(a.to_vec());
    let lead_inv = gf.inv(*b.last().expect("division by zero polynomial")).expect("trimmed");
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = gf.mul(*r.last().unwrap(), lead_inv);
        for (i, c) in b.iter().enumerate() {
            r[shift + i] = gf.sub(r[shift + i], gf.mul(f, *c));
        }
        r = poly_trim(r);
    }
    r
}

/// Monic gcd; the gcd of two zero polynomials is the empty polynomial.
pub fn poly_gcd(gf: &GfContext, a: &[Gf], b: &[Gf]) -> Vec<Gf> {
    let (mut a, mut b) = (poly_trim(a.to_vec()), poly_trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(gf, &a, &b);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let inv = gf.inv(lead).unwrap();
        a.iter_mut().for_each(|c| *c = gf.mul(*c, inv));
    }
    a
}

/// A polynomial is squarefree (so a matrix with it as minimal polynomial is
/// semisimple over the algebraic closure) iff gcd(P, P') = 1.
pub fn poly_is_squarefree(gf: &GfContext, p: &[Gf]) -> bool {
    poly_gcd(gf, p, &poly_derivative(gf, p)) == vec![gf.one()]
}

/// X^2 - lambda X + eps.
pub fn hecke_quadratic(gf: &GfContext, lambda: Gf, eps: Gf) -> Vec<Gf> {
    vec![eps, gf.neg(lambda), gf.one()]
}

pub fn poly_display(gf: &GfContext, p: &[Gf]) -> String {
    let mut terms = Vec::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let coeff = gf.display(*c);
        let needs_parens = coeff.contains(['+', '*']);
        let c_str = if needs_parens { format!("({coeff})") } else { coeff };
        terms.push(match (i, c_str.as_str()) {
            (0, _) => c_str.clone(),
            (_, "1") => if i == 1 { "X".to_string() } else { format!("X^{i}") },
            (1, _) => format!("{c_str}*X"),
            _ => format!("{c_str}*X^{i}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}
