//! Characteristic and minimal polynomials, invariant factors from the Smith
//! form of `XI - A` over GF(p)[X], and the rational canonical form with an
//! explicit change of basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::mat::{extend_to_basis, null_space, Mat};
use crate::poly::Poly;

/// Square matrix with polynomial entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMat {
    field: FieldSpec,
    n: usize,
    entries: Vec<Poly>,
}

impl PolyMat {
    /// `XI - a`
    pub fn char_matrix(a: &Mat) -> PolyMat {
        let (f, n) = (a.field(), a.n());
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = f.neg(a.get(i, j));
                entries.push(if i == j {
                    Poly::from_raw(f, vec![c, 1])
                } else {
                    Poly::from_raw(f, vec![c])
                });
            }
        }
        PolyMat { field: f, n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.n + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.n {
                self.entries.swap(a * self.n + j, b * self.n + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.n {
                self.entries.swap(i * self.n + a, i * self.n + b);
            }
        }
    }

    /// row_dst -= q * row_src
    fn row_axpy(&mut self, dst: usize, q: &Poly, src: usize) {
        for j in 0..self.n {
            let t = q.mul(self.get(src, j));
            let v = self.get(dst, j).sub(&t);
            self.entries[dst * self.n + j] = v;
        }
    }

    /// col_dst -= q * col_src
    fn col_axpy(&mut self, dst: usize, q: &Poly, src: usize) {
        for i in 0..self.n {
            let t = q.mul(self.get(i, src));
            let v = self.get(i, dst).sub(&t);
            self.entries[i * self.n + dst] = v;
        }
    }

    /// Monic diagonal of the Smith normal form, `d_1 | d_2 | ... | d_n`,
    /// with zero entries kept as zero polynomials.
    ///
    /// Pivots are chosen as an entry of least degree in the trailing block,
    /// first in row-major order.
    pub fn smith_diagonal(&self) -> Vec<Poly> {
        let mut m = self.clone();
        let n = m.n;
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            loop {
                let mut best: Option<(usize, usize, usize)> = None;
                for i in k..n {
                    for j in k..n {
                        if let Some(d) = m.get(i, j).degree() {
                            if best.is_none_or(|(bd, _, _)| d < bd) {
                                best = Some((d, i, j));
                            }
                        }
                    }
                }
                let Some((_, pi, pj)) = best else {
                    break;
                };
                m.swap_rows(k, pi);
                m.swap_cols(k, pj);
                let pivot = m.get(k, k).clone();
                let mut clean = true;
                for i in k + 1..n {
                    let (q, r) = m.get(i, k).divmod(&pivot).expect("pivot nonzero");
                    if !q.is_zero() {
                        m.row_axpy(i, &q, k);
                    }
                    clean &= r.is_zero();
                }
                for j in k + 1..n {
                    let (q, r) = m.get(k, j).divmod(&pivot).expect("pivot nonzero");
                    if !q.is_zero() {
                        m.col_axpy(j, &q, k);
                    }
                    clean &= r.is_zero();
                }
                if !clean {
                    continue;
                }
                let offender = (k + 1..n)
                    .flat_map(|i| (k + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !pivot.divides(m.get(i, j)));
                match offender {
                    Some((i, _)) => {
                        m.row_axpy(k, &Poly::constant(m.field, m.field.neg(1)), i);
                    }
                    None => break,
                }
            }
            let d = m.get(k, k);
            diag.push(if d.is_zero() { d.clone() } else { d.monic() });
        }
        diag
    }
}

/// Companion matrix: ones on the subdiagonal, last column `-a_0 .. -a_{d-1}`.
pub fn companion(f: &Poly) -> Result<Mat> {
    let d = match f.degree() {
        None | Some(0) => return Err(Error::DegreeZero),
        Some(d) => d,
    };
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    let field = f.field();
    let mut m = Mat::zero(field, d);
    for i in 1..d {
        m.set(i, i - 1, 1);
    }
    for i in 0..d {
        m.set(i, d - 1, field.neg(f.coeff(i)));
    }
    Ok(m)
}

/// Block diagonal of companion matrices.
pub fn companion_blocks(factors: &[Poly]) -> Result<Mat> {
    let blocks = factors.iter().map(companion).collect::<Result<Vec<_>>>()?;
    Ok(Mat::block_diag(&blocks))
}

/// Characteristic polynomial `det(XI - a)`: cofactor expansion for
/// `n <= 6`, Hessenberg reduction above.
pub fn charpoly(a: &Mat) -> Poly {
    if a.n() <= 6 {
        charpoly_cofactor(a)
    } else {
        charpoly_hessenberg(a)
    }
}

/// Laplace expansion along successive rows, memoized over column subsets.
pub fn charpoly_cofactor(a: &Mat) -> Poly {
    let n = a.n();
    let f = a.field();
    let xa = PolyMat::char_matrix(a);
    let mut dp: Vec<Poly> = vec![Poly::zero(f); 1 << n];
    dp[0] = Poly::one(f);
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = Poly::zero(f);
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let pos = (mask & ((1 << j) - 1)).count_ones() as usize;
            let term = xa.get(row, j).mul(&dp[mask & !(1 << j)]);
            acc = if (row + pos).is_multiple_of(2) {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        dp[mask] = acc;
    }
    dp[(1 << n) - 1].clone()
}

/// Similarity reduction to upper Hessenberg form followed by the
/// determinant recurrence on its leading principal blocks.
pub fn charpoly_hessenberg(a: &Mat) -> Poly {
    let n = a.n();
    let f = a.field();
    let mut h = a.clone();
    for j in 0..n.saturating_sub(2) {
        let Some(i) = (j + 1..n).find(|&i| h.get(i, j) != 0) else {
            continue;
        };
        if i != j + 1 {
            for c in 0..n {
                let (x, y) = (h.get(i, c), h.get(j + 1, c));
                h.set(i, c, y);
                h.set(j + 1, c, x);
            }
            for r in 0..n {
                let (x, y) = (h.get(r, i), h.get(r, j + 1));
                h.set(r, i, y);
                h.set(r, j + 1, x);
            }
        }
        let inv = f.inv(h.get(j + 1, j)).expect("pivot nonzero");
        for r in j + 2..n {
            let u = f.mul(h.get(r, j), inv);
            if u == 0 {
                continue;
            }
            for c in 0..n {
                let v = f.sub(h.get(r, c), f.mul(u, h.get(j + 1, c)));
                h.set(r, c, v);
            }
            for rr in 0..n {
                let v = f.add(h.get(rr, j + 1), f.mul(u, h.get(rr, r)));
                h.set(rr, j + 1, v);
            }
        }
    }
    let mut ps: Vec<Poly> = vec![Poly::one(f)];
    for m in 0..n {
        let mut p = Poly::linear(f, h.get(m, m)).mul(&ps[m]);
        let mut prod = 1u32;
        for i in (0..m).rev() {
            prod = f.mul(prod, h.get(i + 1, i));
            let c = f.mul(h.get(i, m), prod);
            if c != 0 {
                p = p.sub(&ps[i].scale(c));
            }
        }
        ps.push(p);
    }
    ps.pop().expect("nonempty")
}

/// Nontrivial invariant factors `f_1 | ... | f_r` of `a`.
pub fn invariant_factors(a: &Mat) -> Vec<Poly> {
    PolyMat::char_matrix(a)
        .smith_diagonal()
        .into_iter()
        .filter(|d| d.degree().is_some_and(|k| k > 0))
        .collect()
}

pub fn minpoly(a: &Mat) -> Poly {
    invariant_factors(a)
        .pop()
        .unwrap_or_else(|| Poly::one(a.field()))
}

/// `n - r`
pub fn index(a: &Mat) -> usize {
    a.n() - invariant_factors(a).len()
}

/// Monic polynomial of least degree with `g(a) v = 0`.
pub fn local_minpoly(a: &Mat, v: &[u32]) -> Poly {
    let f = a.field();
    let n = a.n();
    let mut krylov: Vec<Vec<u32>> = vec![v.to_vec()];
    loop {
        let k = krylov.len();
        let mut cols = vec![0u32; n * k];
        for (j, col) in krylov.iter().enumerate() {
            for i in 0..n {
                cols[i * k + j] = col[i];
            }
        }
        let ns = null_space(f, &cols, n, k);
        if let Some(rel) = ns.first() {
            return Poly::from_raw(f, rel.clone()).monic();
        }
        let next = a.mul_vec(krylov.last().expect("nonempty"));
        krylov.push(next);
    }
}

fn krylov_basis(a: &Mat, v: &[u32], d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(d);
    let mut cur = v.to_vec();
    for _ in 0..d {
        let next = a.mul_vec(&cur);
        out.push(cur);
        cur = next;
    }
    out
}

fn multiplicity(b: &Poly, m: &Poly) -> usize {
    let mut rest = m.clone();
    let mut e = 0;
    loop {
        let (q, r) = rest.divmod(b).expect("nonzero");
        if !r.is_zero() {
            return e;
        }
        rest = q;
        e += 1;
    }
}

/// Refines monic polynomials into pairwise coprime monic factors of
/// positive degree such that each input is a product of their powers.
pub fn gcd_free_basis(polys: &[Poly]) -> Vec<Poly> {
    let mut basis: Vec<Poly> = polys
        .iter()
        .filter(|p| p.degree().is_some_and(|d| d > 0))
        .map(Poly::monic)
        .collect();
    'outer: loop {
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let g = basis[i].gcd(&basis[j]);
                if g.degree() == Some(0) {
                    continue;
                }
                let bi = basis[i].divmod(&g).expect("nonzero").0;
                let bj = basis[j].divmod(&g).expect("nonzero").0;
                basis.remove(j);
                basis.remove(i);
                basis.extend(
                    [bi, g, bj]
                        .into_iter()
                        .filter(|p| p.degree().is_some_and(|d| d > 0)),
                );
                continue 'outer;
            }
        }
        return basis;
    }
}

/// A vector whose local minimal polynomial is the minimal polynomial of
/// `a`, with that polynomial.
fn maximal_vector(a: &Mat) -> (Vec<u32>, Poly) {
    let n = a.n();
    let f = a.field();
    let mut unit = vec![0u32; n];
    unit[0] = 1;
    let mut v = unit.clone();
    let mut mv = local_minpoly(a, &v);
    for j in 1..n {
        let mut w = vec![0u32; n];
        w[j] = 1;
        let mw = local_minpoly(a, &w);
        if mw.divides(&mv) {
            continue;
        }
        let mut combined = vec![0u32; n];
        let mut m_new = Poly::one(f);
        for b in gcd_free_basis(&[mv.clone(), mw.clone()]) {
            let (ev, ew) = (multiplicity(&b, &mv), multiplicity(&b, &mw));
            let (src, m_src, e) = if ev >= ew { (&v, &mv, ev) } else { (&w, &mw, ew) };
            let be = b.pow(e);
            let cof = m_src.divmod(&be).expect("nonzero").0;
            let part = cof.apply_to_vec(a, src);
            for (x, y) in combined.iter_mut().zip(&part) {
                *x = f.add(*x, *y);
            }
            m_new = m_new.mul(&be);
        }
        debug_assert_eq!(local_minpoly(a, &combined), m_new);
        v = combined;
        mv = m_new;
    }
    (v, mv)
}

/// Cyclic vectors `v_1, v_2, ...` with `K^n = (+) K[a] v_i` and local
/// minimal polynomials in non-increasing divisibility order.
///
/// After splitting off `Z = K[a] v`, the functional `phi` dual to the top
/// Krylov vector gives the invariant complement `W = {x : phi(a^k x) = 0}`.
pub fn cyclic_decomposition(a: &Mat) -> Vec<(Vec<u32>, Poly)> {
    let n = a.n();
    let f = a.field();
    let (v, m) = maximal_vector(a);
    let d = m.degree().expect("nonzero");
    if d == n {
        return vec![(v, m)];
    }
    let krylov = krylov_basis(a, &v, d);
    let full = Mat::from_columns(f, &extend_to_basis(f, &krylov, n));
    let full_inv = full.inverse().expect("basis");
    let mut phi: Vec<u32> = full_inv.rows()[d - 1].clone();
    let mut constraints = Vec::with_capacity(d * n);
    for _ in 0..d {
        constraints.extend_from_slice(&phi);
        phi = a.transpose().mul_vec(&phi);
    }
    let w_basis = null_space(f, &constraints, d, n);
    assert_eq!(w_basis.len(), n - d, "invariant complement has wrong dimension");
    let mut cols = krylov;
    cols.extend(w_basis.iter().cloned());
    let p = Mat::from_columns(f, &cols);
    let local = &(&p.inverse().expect("basis") * a) * &p;
    let a_w = local.diagonal_block(d, n - d);
    let mut out = vec![(v, m)];
    for (u, mu) in cyclic_decomposition(&a_w) {
        let mut lifted = vec![0u32; n];
        for (coef, bv) in u.iter().zip(&w_basis) {
            for (x, y) in lifted.iter_mut().zip(bv) {
                *x = f.add(*x, f.mul(*coef, *y));
            }
        }
        out.push((lifted, mu));
    }
    out
}

/// Rational canonical form: `transform * a * transform^-1` is the block
/// diagonal of the companions of `factors`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rcf {
    pub factors: Vec<Poly>,
    pub transform: Mat,
    pub index: usize,
}

impl Rcf {
    pub fn canonical_matrix(&self) -> Mat {
        companion_blocks(&self.factors).expect("factors are monic of positive degree")
    }

    /// Checks every structural invariant against `a`.
    pub fn verify(&self, a: &Mat) -> bool {
        let n = a.n();
        let chain = self.factors.windows(2).all(|w| w[0].divides(&w[1]));
        let degrees: usize = self.factors.iter().filter_map(Poly::degree).sum();
        let positive = self.factors.iter().all(|f| f.is_monic() && f.degree() > Some(0));
        let Ok(t_inv) = self.transform.inverse() else {
            return false;
        };
        chain
            && positive
            && degrees == n
            && self.index == n - self.factors.len()
            && &(&self.transform * a) * &t_inv == self.canonical_matrix()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RcfJson {
    pub factors: Vec<Vec<u32>>,
    pub index: usize,
    pub transform: Vec<Vec<u32>>,
}

impl From<&Rcf> for RcfJson {
    fn from(r: &Rcf) -> Self {
        RcfJson {
            factors: r.factors.iter().map(|f| f.coeffs().to_vec()).collect(),
            index: r.index,
            transform: r.transform.rows(),
        }
    }
}

pub fn rcf(a: &Mat) -> Rcf {
    let n = a.n();
    let f = a.field();
    let factors = invariant_factors(a);
    let mut parts = cyclic_decomposition(a);
    parts.reverse();
    let cyclic: Vec<&Poly> = parts.iter().map(|(_, m)| m).collect();
    assert!(
        cyclic.iter().copied().eq(factors.iter()),
        "cyclic decomposition disagrees with the Smith form"
    );
    let mut cols = Vec::with_capacity(n);
    for (v, m) in &parts {
        cols.extend(krylov_basis(a, v, m.degree().expect("nonzero")));
    }
    let p = Mat::from_columns(f, &cols);
    Rcf {
        index: n - factors.len(),
        factors,
        transform: p.inverse().expect("cyclic basis"),
    }
}

/// Report for `min_c rank(a - cI) <= 2 ind(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexBoundCertificate {
    pub n: usize,
    pub index: usize,
    pub min_rank: usize,
    pub argmin: u32,
    /// Root `c` of the first invariant factor when it is `X - c`.
    pub witness_c: Option<u32>,
    pub witness_rank: Option<usize>,
    pub holds: bool,
}

pub fn index_bound_certificate(a: &Mat) -> IndexBoundCertificate {
    let n = a.n();
    let f = a.field();
    let factors = invariant_factors(a);
    let index = n - factors.len();
    let (mut min_rank, mut argmin) = (usize::MAX, 0);
    for c in 0..f.p() {
        let r = a.add_scalar(f.neg(c)).rank();
        if r < min_rank {
            (min_rank, argmin) = (r, c);
        }
    }
    let witness_c = factors
        .first()
        .filter(|g| g.degree() == Some(1))
        .map(|g| f.neg(g.coeff(0)));
    let witness_rank = witness_c.map(|c| a.add_scalar(f.neg(c)).rank());
    IndexBoundCertificate {
        n,
        index,
        min_rank,
        argmin,
        witness_c,
        witness_rank,
        holds: min_rank <= 2 * index && witness_rank.is_none_or(|r| r <= 2 * index),
    }
}
