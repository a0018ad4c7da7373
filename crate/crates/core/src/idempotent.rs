//! Idempotents and their order, nests, the triangular subalgebras `R_E`,
//! corner subgroups `Gamma(e)` and `Gamma(f) + eRf`, and matrix units.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::mat::{extend_to_basis, Mat};
use crate::rank::{rk, RankValue};
use crate::sample;

/// An idempotent matrix with its rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Idem {
    m: Mat,
    r: usize,
}

impl Idem {
    pub fn new(m: Mat) -> Result<Idem> {
        if &m * &m != m {
            return Err(Error::PreconditionViolation("matrix is not idempotent".into()));
        }
        let r = m.rank();
        Ok(Idem { m, r })
    }

    pub fn zero(field: FieldSpec, n: usize) -> Idem {
        Idem {
            m: Mat::zero(field, n),
            r: 0,
        }
    }

    pub fn one(field: FieldSpec, n: usize) -> Idem {
        Idem {
            m: Mat::identity(field, n),
            r: n,
        }
    }

    /// `diag(I_r, 0)`
    pub fn standard(field: FieldSpec, n: usize, r: usize) -> Idem {
        Idem {
            m: Mat::diag_projection(field, n, r),
            r,
        }
    }

    pub fn mat(&self) -> &Mat {
        &self.m
    }

    pub fn into_mat(self) -> Mat {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }

    pub fn field(&self) -> FieldSpec {
        self.m.field()
    }

    pub fn rk(&self) -> RankValue {
        RankValue::new(self.r as u64, self.n() as u64)
    }

    /// `1 - e`
    pub fn complement(&self) -> Idem {
        Idem {
            m: &Mat::identity(self.field(), self.n()) - &self.m,
            r: self.n() - self.r,
        }
    }

    /// `e - f` for `f <= e`.
    pub fn difference(&self, f: &Idem) -> Result<Idem> {
        if !idem_leq(f, self) {
            return Err(Error::PreconditionViolation("subtrahend is not below".into()));
        }
        Ok(Idem {
            m: &self.m - &f.m,
            r: self.r - f.r,
        })
    }

    /// Columns spanning the image, followed by columns spanning the kernel.
    /// In this basis the idempotent is `diag(I_r, 0)`.
    pub fn adapted_basis(&self) -> Mat {
        let mut cols = self.m.column_basis();
        cols.extend(self.m.kernel_basis());
        Mat::from_columns(self.field(), &cols)
    }
}

/// `e <= f` iff `ef = fe = e`.
pub fn idem_leq(e: &Idem, f: &Idem) -> bool {
    &e.m * &f.m == e.m && &f.m * &e.m == e.m
}

/// `e` and `f` orthogonal iff `ef = fe = 0`; asserts agreement with
/// `e <= 1 - f`.
pub fn idem_orthogonal(e: &Idem, f: &Idem) -> bool {
    let orth = (&e.m * &f.m).is_zero() && (&f.m * &e.m).is_zero();
    assert_eq!(orth, idem_leq(e, &f.complement()));
    orth
}

/// `e = v diag(I_r,0) v^-1` from the diagonal factorization of `a`; the
/// column space of `e` is that of `a`.
pub fn column_space_idempotent(a: &Mat) -> Idem {
    let df = a.diag_factorize();
    let d = Mat::diag_projection(a.field(), a.n(), df.r);
    let vi = df.v.inverse().expect("v invertible");
    Idem {
        m: &(&df.v * &d) * &vi,
        r: df.r,
    }
}

/// A strictly increasing chain of idempotents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestChain {
    chain: Vec<Idem>,
}

impl NestChain {
    pub fn new(chain: Vec<Idem>) -> Result<NestChain> {
        let nest = NestChain { chain };
        if !nest.is_valid() {
            return Err(Error::PreconditionViolation(
                "chain is not strictly increasing".into(),
            ));
        }
        Ok(nest)
    }

    pub fn empty() -> NestChain {
        NestChain { chain: Vec::new() }
    }

    /// Idempotency, pairwise comparability and strictly increasing ranks.
    pub fn is_valid(&self) -> bool {
        let idem = self.chain.iter().all(|e| &e.m * &e.m == e.m && e.m.rank() == e.r);
        let ranks = self.chain.windows(2).all(|w| w[0].r < w[1].r);
        let comparable = self
            .chain
            .iter()
            .enumerate()
            .all(|(i, e)| self.chain[i + 1..].iter().all(|f| idem_leq(e, f)));
        idem && ranks && comparable
    }

    pub fn members(&self) -> &[Idem] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.chain.iter().map(Idem::rank).collect()
    }

    pub fn rks(&self) -> Vec<RankValue> {
        self.chain.iter().map(Idem::rk).collect()
    }
}

/// `diag(1^k, 0^(n-k))` for each `k` in `ranks`.
pub fn standard_nest(field: FieldSpec, n: usize, ranks: &[usize]) -> Result<NestChain> {
    if ranks.windows(2).any(|w| w[0] >= w[1]) || ranks.iter().any(|&r| r > n) {
        return Err(Error::BadRanks(format!("{ranks:?} for n = {n}")));
    }
    Ok(NestChain {
        chain: ranks.iter().map(|&r| Idem::standard(field, n, r)).collect(),
    })
}

/// Nest `V diag(I_k, 0) V^-1`, `k = 0..=r`, where the first `r` columns
/// of `basis` span the image of the top member.
pub fn nest_from_basis(basis: &Mat, r: usize) -> NestChain {
    let (f, n) = (basis.field(), basis.n());
    let inv = basis.inverse().expect("basis is invertible");
    let chain = (0..=r)
        .map(|k| Idem {
            m: &(basis * &Mat::diag_projection(f, n, k)) * &inv,
            r: k,
        })
        .collect();
    NestChain { chain }
}

/// Maximal nest `0 = e_0 < ... < e_r = e` of the corner `eRe`.
pub fn max_nest_in_corner(e: &Idem) -> Result<NestChain> {
    if e.r == 0 {
        return Err(Error::ZeroIdempotent);
    }
    Ok(nest_from_basis(&e.adapted_basis(), e.r))
}

/// `a in R_E` iff `e a e = a e` for all `e` in the nest.
#[allow(non_snake_case)]
pub fn in_R_E(a: &Mat, nest: &NestChain) -> bool {
    nest.chain.iter().all(|e| {
        let ae = a * &e.m;
        &e.m * &ae == ae
    })
}

/// `e a e + 1 - e`
pub fn pi_e(a: &Mat, e: &Idem) -> Mat {
    let eae = &(&e.m * a) * &e.m;
    &eae + &e.complement().m
}

/// `g in Gamma(e) = GL(eRe) + 1 - e`.
pub fn gamma_membership(g: &Mat, e: &Idem) -> bool {
    let x = g - &e.complement().m;
    &(&e.m * &x) * &e.m == x && x.rank() == e.r
}

/// `Gamma(e)` in the basis adapted to `e`: `V diag(A, I) V^-1` for
/// `A in GL_r`.
#[derive(Debug, Clone)]
pub struct CornerFrame {
    basis: Mat,
    basis_inv: Mat,
    r: usize,
}

impl CornerFrame {
    pub fn new(e: &Idem) -> CornerFrame {
        let basis = e.adapted_basis();
        CornerFrame {
            basis_inv: basis.inverse().expect("basis"),
            basis,
            r: e.r,
        }
    }

    /// Embeds an `r x r` block as an element of `eRe + 1 - e`.
    pub fn embed(&self, block: &Mat) -> Mat {
        let n = self.basis.n();
        let mut blocks = vec![block.clone()];
        if n > self.r {
            blocks.push(Mat::identity(self.basis.field(), n - self.r));
        }
        &(&self.basis * &Mat::block_diag(&blocks)) * &self.basis_inv
    }

    /// Embeds an `r x r` block as an element of `eRe`.
    pub fn embed_corner(&self, block: &Mat) -> Mat {
        let n = self.basis.n();
        let mut blocks = vec![block.clone()];
        if n > self.r {
            blocks.push(Mat::zero(self.basis.field(), n - self.r));
        }
        &(&self.basis * &Mat::block_diag(&blocks)) * &self.basis_inv
    }

    /// Columns spanning the image.
    pub fn image_columns(&self) -> Vec<Vec<u32>> {
        (0..self.r).map(|j| self.basis.column(j)).collect()
    }

    /// Rows `R` with `e = B R` and `R B = I_r` for the image columns `B`.
    pub fn image_rows(&self) -> Vec<Vec<u32>> {
        self.basis_inv.rows().into_iter().take(self.r).collect()
    }
}

pub fn gamma_enumerate(e: &Idem, budget: u128) -> Result<Vec<Mat>> {
    let f = e.field();
    let needed = (f.p() as u128).saturating_pow((e.r * e.r) as u32);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "corner matrices".into(),
            needed,
            budget,
        });
    }
    let frame = CornerFrame::new(e);
    if e.r == 0 {
        return Ok(vec![Mat::identity(f, e.n())]);
    }
    Ok(sample::all_matrices(f, e.r)
        .filter(Mat::is_invertible)
        .map(|a| frame.embed(&a))
        .collect())
}

pub fn sample_gamma<R: Rng + ?Sized>(e: &Idem, rng: &mut R) -> Mat {
    let frame = CornerFrame::new(e);
    if e.r == 0 {
        return Mat::identity(e.field(), e.n());
    }
    frame.embed(&sample::random_unit(e.field(), e.r, rng))
}

/// Closure under products and inverses of a finite set of units.
pub fn is_subgroup(elements: &[Mat]) -> bool {
    let set: std::collections::HashSet<&Mat> = elements.iter().collect();
    elements.iter().all(|a| {
        a.inverse().is_ok_and(|ai| set.contains(&ai))
            && elements.iter().all(|b| set.contains(&(a * b)))
    })
}

/// Elements of `eRf` as `B_e C R_f` for `C` in `K^(r_e x r_f)`.
#[derive(Debug, Clone)]
pub struct OffDiagonalFrame {
    left: Vec<Vec<u32>>,
    right: Vec<Vec<u32>>,
    field: FieldSpec,
    n: usize,
}

impl OffDiagonalFrame {
    pub fn new(e: &Idem, f: &Idem) -> OffDiagonalFrame {
        OffDiagonalFrame {
            left: CornerFrame::new(e).image_columns(),
            right: CornerFrame::new(f).image_rows(),
            field: e.field(),
            n: e.n(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left.len(), self.right.len())
    }

    /// `coeffs` row-major `r_e x r_f`.
    pub fn embed(&self, coeffs: &[u32]) -> Mat {
        let fl = self.field;
        let (re, rf) = self.dims();
        let mut out = Mat::zero(fl, self.n);
        for i in 0..re {
            for j in 0..rf {
                let c = coeffs[i * rf + j];
                if c == 0 {
                    continue;
                }
                for row in 0..self.n {
                    let l = fl.mul(c, self.left[i][row]);
                    if l == 0 {
                        continue;
                    }
                    for col in 0..self.n {
                        let v = fl.add(out.get(row, col), fl.mul(l, self.right[j][col]));
                        out.set(row, col, v);
                    }
                }
            }
        }
        out
    }
}

/// `g in Gamma(f) + eRf` for orthogonal `e`, `f`: the `eRf` component is
/// `e g f` and the remainder must lie in `Gamma(f)`.
pub fn parabolic_membership(g: &Mat, f: &Idem, e: &Idem) -> bool {
    let x = &(&e.m * g) * &f.m;
    gamma_membership(&(g - &x), f)
}

pub fn sample_parabolic<R: Rng + ?Sized>(f: &Idem, e: &Idem, rng: &mut R) -> Mat {
    let frame = OffDiagonalFrame::new(e, f);
    let (re, rf) = frame.dims();
    let p = e.field().p();
    let coeffs: Vec<u32> = (0..re * rf).map(|_| rng.gen_range(0..p)).collect();
    &sample_gamma(f, rng) + &frame.embed(&coeffs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParabolicReport {
    pub elements: usize,
    pub members: bool,
    pub units: bool,
    pub homomorphism: bool,
    pub ball_radius: RankValue,
    pub in_ball: bool,
}

impl ParabolicReport {
    pub fn holds(&self) -> bool {
        self.members && self.units && self.homomorphism && self.in_ball
    }
}

/// Checks the pairs `(a, x)` with `a in Gamma(f)`, `x in eRf`: every
/// `a + x` is a unit within `rk(f)` of `1`, and `(a,x)(b,y) = (ab, xb + y)`
/// maps to the matrix product.
pub fn parabolic_subgroup_check(
    f: &Idem,
    e: &Idem,
    elements: &[(Mat, Mat)],
) -> Result<ParabolicReport> {
    if !idem_orthogonal(e, f) {
        return Err(Error::NotOrthogonal);
    }
    let members = elements.iter().all(|(a, x)| {
        gamma_membership(a, f) && &(&e.m * x) * &f.m == *x
    });
    let images: Vec<Mat> = elements.iter().map(|(a, x)| a + x).collect();
    let units = images.iter().all(Mat::is_invertible);
    let homomorphism = elements.iter().zip(&images).all(|((a, x), ga)| {
        elements.iter().zip(&images).all(|((b, y), gb)| {
            let prod = &(a * b) + &(&(x * b) + y);
            prod == ga * gb
        })
    });
    let ball_radius = f.rk();
    let one = Mat::identity(f.field(), f.n());
    let in_ball = images
        .iter()
        .all(|g| rk(&(g - &one)) <= ball_radius);
    Ok(ParabolicReport {
        elements: elements.len(),
        members,
        units,
        homomorphism,
        ball_radius,
        in_ball,
    })
}

/// All pairs `(a, x)` with `a in Gamma(f)`, `x in eRf`.
pub fn parabolic_enumerate(f: &Idem, e: &Idem, budget: u128) -> Result<Vec<(Mat, Mat)>> {
    if !idem_orthogonal(e, f) {
        return Err(Error::NotOrthogonal);
    }
    let gamma = gamma_enumerate(f, budget)?;
    let frame = OffDiagonalFrame::new(e, f);
    let (re, rf) = frame.dims();
    let p = e.field().p() as u128;
    let count = p.saturating_pow((re * rf) as u32);
    let needed = count.saturating_mul(gamma.len() as u128);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "parabolic elements".into(),
            needed,
            budget,
        });
    }
    let mut out = Vec::with_capacity(needed as usize);
    for code in 0..count {
        let mut c = code;
        let coeffs: Vec<u32> = (0..re * rf)
            .map(|_| {
                let v = (c % p) as u32;
                c /= p;
                v
            })
            .collect();
        let x = frame.embed(&coeffs);
        for a in &gamma {
            out.push((a.clone(), x.clone()));
        }
    }
    Ok(out)
}

/// A family `s_ij`, `i, j < m`, of matrix units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixUnits {
    m: usize,
    units: Vec<Mat>,
}

impl MatrixUnits {
    pub fn new(m: usize, units: Vec<Mat>) -> Result<MatrixUnits> {
        if units.len() != m * m || m == 0 {
            return Err(Error::IncompatibleShapes(format!(
                "{} matrices for a {m} x {m} family",
                units.len()
            )));
        }
        Ok(MatrixUnits { m, units })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &Mat {
        &self.units[i * self.m + j]
    }

    pub fn n(&self) -> usize {
        self.units[0].n()
    }

    pub fn field(&self) -> FieldSpec {
        self.units[0].field()
    }

    /// `sum s_ii = 1` and `s_ij s_kl = delta_jk s_il`.
    pub fn verify(&self) -> bool {
        let (f, n, m) = (self.field(), self.n(), self.m);
        let sum = (0..m).fold(Mat::zero(f, n), |acc, i| &acc + self.get(i, i));
        if !sum.is_identity() {
            return false;
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let prod = self.get(i, j) * self.get(k, l);
                        let ok = if j == k {
                            &prod == self.get(i, l)
                        } else {
                            prod.is_zero()
                        };
                        if !ok {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `g s g^-1` entrywise.
    pub fn conjugate(&self, g: &Mat) -> Result<MatrixUnits> {
        let gi = g.inverse()?;
        Ok(MatrixUnits {
            m: self.m,
            units: self.units.iter().map(|s| &(g * s) * &gi).collect(),
        })
    }
}

/// `s_ij = B_i R_j` where the pivot columns `B_i` of the parts form a basis
/// `V = [B_1 | ... | B_m]` and `R_j` are the matching row blocks of `V^-1`.
pub fn matrix_units_from_idempotents(parts: &[Idem]) -> Result<MatrixUnits> {
    let Some(first) = parts.first() else {
        return Err(Error::NotPartition);
    };
    let (f, n) = (first.field(), first.n());
    if parts.iter().any(|e| e.n() != n || e.field() != f) {
        return Err(Error::IncompatibleShapes("parts differ in shape".into()));
    }
    if parts.iter().any(|e| e.r != first.r) {
        return Err(Error::UnequalRanks);
    }
    let sum = parts.iter().fold(Mat::zero(f, n), |acc, e| &acc + &e.m);
    let orthogonal = (0..parts.len()).all(|i| {
        (0..parts.len()).all(|j| i == j || (&parts[i].m * &parts[j].m).is_zero())
    });
    if !sum.is_identity() || !orthogonal {
        return Err(Error::NotPartition);
    }
    let k = first.r;
    let mut cols = Vec::with_capacity(n);
    for e in parts {
        cols.extend(e.m.column_basis());
    }
    let v = Mat::from_columns(f, &cols);
    let vi = v.inverse().map_err(|_| Error::NotPartition)?.rows();
    let m = parts.len();
    let mut units = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut s = Mat::zero(f, n);
            for t in 0..k {
                let col = &cols[i * k + t];
                let row = &vi[j * k + t];
                for r in 0..n {
                    if col[r] == 0 {
                        continue;
                    }
                    for c in 0..n {
                        let val = f.add(s.get(r, c), f.mul(col[r], row[c]));
                        s.set(r, c, val);
                    }
                }
            }
            units.push(s);
        }
    }
    Ok(MatrixUnits { m, units })
}

/// A unit `g` with `t_ij = g s_ij g^-1`: `g = sum_i t_i1 u s_1i`, where `u`
/// carries an adapted basis of `s_11` to one of `t_11`.
pub fn conjugation_intertwiner(s: &MatrixUnits, t: &MatrixUnits) -> Result<Mat> {
    if s.m != t.m || s.n() != t.n() || s.field() != t.field() {
        return Err(Error::IncompatibleShapes(format!(
            "{} x {} units in M_{} vs {} x {} units in M_{}",
            s.m,
            s.m,
            s.n(),
            t.m,
            t.m,
            t.n()
        )));
    }
    let s11 = Idem::new(s.get(0, 0).clone())?;
    let t11 = Idem::new(t.get(0, 0).clone())?;
    if s11.r != t11.r {
        return Err(Error::IncompatibleShapes("corner ranks differ".into()));
    }
    let u = &t11.adapted_basis() * &s11.adapted_basis().inverse().expect("basis");
    let g = (0..s.m).fold(Mat::zero(s.field(), s.n()), |acc, i| {
        &acc + &(&(t.get(i, 0) * &u) * s.get(0, i))
    });
    debug_assert_eq!(s.conjugate(&g).ok().as_ref(), Some(t));
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CenterReport {
    pub n: usize,
    pub p: u32,
    pub group_order: usize,
    pub center_size: usize,
    /// The center equals `{cI : c != 0}`.
    pub center_is_nonzero_scalars: bool,
    /// `{a in M_n : ab = ba for all units b}` equals the scalars.
    pub commutant_is_scalars: bool,
}

/// Computes the center of `GL_n(GF(p))` and the commutant of the unit
/// group in `M_n(GF(p))` by full scans.
pub fn center_bruteforce(field: FieldSpec, n: usize, budget: u128) -> Result<CenterReport> {
    let needed = (field.p() as u128).saturating_pow((n * n) as u32);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "matrix ring".into(),
            needed,
            budget,
        });
    }
    let ring: Vec<Mat> = sample::all_matrices(field, n).collect();
    let units: Vec<&Mat> = ring.iter().filter(|a| a.is_invertible()).collect();
    let commutes = |a: &Mat| units.iter().all(|&b| a * b == b * a);
    let center: Vec<&Mat> = units.iter().copied().filter(|a| commutes(a)).collect();
    let commutant: Vec<&Mat> = ring.iter().filter(|a| commutes(a)).collect();
    let center_is_nonzero_scalars = center.len() == field.p() as usize - 1
        && center.iter().all(|a| a.as_scalar().is_some_and(|c| c != 0));
    let commutant_is_scalars = commutant.len() == field.p() as usize
        && commutant.iter().all(|a| a.as_scalar().is_some());
    Ok(CenterReport {
        n,
        p: field.p(),
        group_order: units.len(),
        center_size: center.len(),
        center_is_nonzero_scalars,
        commutant_is_scalars,
    })
}

/// Basis extension helper shared with the geodesic code.
pub(crate) fn complete_basis(field: FieldSpec, cols: &[Vec<u32>], n: usize) -> Mat {
    Mat::from_columns(field, &extend_to_basis(field, cols, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn order_examples() {
        let f = gf(3);
        let e = Idem::standard(f, 2, 1);
        let e2 = Idem::new(Mat::diag(f, &[0, 1])).unwrap();
        assert!(idem_leq(&e, &Idem::one(f, 2)));
        assert!(idem_orthogonal(&e, &e2));
        assert!(!idem_leq(&e, &e2));
        assert!(Idem::new(Mat::diag(f, &[2, 0])).is_err());
    }

    #[test]
    fn orthogonality_matches_complement_order() {
        let f = gf(3);
        let mut rng = sample::rng(1);
        for _ in 0..100 {
            let e = Idem::new(sample::random_idempotent(f, 4, rng.gen_range(0..=4), &mut rng)).unwrap();
            let g = Idem::new(sample::random_idempotent(f, 4, rng.gen_range(0..=4), &mut rng)).unwrap();
            idem_orthogonal(&e, &g);
            let (a, b) = sample::random_orthogonal_pair(f, 4, 2, 1, &mut rng);
            assert!(idem_orthogonal(&Idem::new(a).unwrap(), &Idem::new(b).unwrap()));
        }
    }

    #[test]
    fn column_space_examples() {
        let f = gf(2);
        assert!(column_space_idempotent(&Mat::identity(f, 3)).mat().is_identity());
        assert!(column_space_idempotent(&Mat::zero(f, 3)).mat().is_zero());
        let a = Mat::from_rows(f, &[vec![1, 1], vec![1, 1]]).unwrap();
        let e = column_space_idempotent(&a);
        assert_eq!(e.mat() * &a, a);
        assert_eq!(e.rank(), 1);
    }

    #[test]
    fn nest_examples() {
        let f = gf(2);
        let nest = standard_nest(f, 2, &[0, 1, 2]).unwrap();
        assert_eq!(
            nest.members().iter().map(|e| e.mat().clone()).collect::<Vec<_>>(),
            vec![Mat::zero(f, 2), Mat::diag(f, &[1, 0]), Mat::identity(f, 2)]
        );
        let nest = standard_nest(f, 4, &[0, 2, 4]).unwrap();
        assert_eq!(nest.rks(), vec![RankValue::new(0, 1), RankValue::new(1, 2), RankValue::new(1, 1)]);
        assert!(nest.is_valid());
        assert!(matches!(standard_nest(f, 3, &[0, 2, 2]), Err(Error::BadRanks(_))));
        assert!(matches!(standard_nest(f, 3, &[0, 4]), Err(Error::BadRanks(_))));
    }

    #[test]
    fn corner_nest_examples() {
        let f = gf(3);
        let nest = max_nest_in_corner(&Idem::one(f, 2)).unwrap();
        assert_eq!(nest.ranks(), vec![0, 1, 2]);
        let e = Idem::new(Mat::diag(f, &[1, 0, 1])).unwrap();
        let nest = max_nest_in_corner(&e).unwrap();
        assert_eq!(nest.ranks(), vec![0, 1, 2]);
        assert_eq!(nest.members().last().unwrap(), &e);
        assert!(nest.is_valid());
        for m in nest.members() {
            assert!(idem_leq(m, &e));
        }
        assert_eq!(max_nest_in_corner(&Idem::zero(f, 2)), Err(Error::ZeroIdempotent));
    }

    #[test]
    fn r_e_examples() {
        let f = gf(2);
        let nest = standard_nest(f, 2, &[0, 1, 2]).unwrap();
        let upper = Mat::from_rows(f, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(in_R_E(&upper, &nest));
        assert!(!in_R_E(&Mat::unit(f, 2, 1, 0), &nest));
        assert!(in_R_E(&Mat::unit(f, 2, 1, 0), &NestChain::empty()));
    }

    #[test]
    fn r_e_is_upper_triangularity_for_standard_nest() {
        let f = gf(2);
        let nest = standard_nest(f, 3, &[0, 1, 2, 3]).unwrap();
        for a in sample::all_matrices(f, 3) {
            assert_eq!(in_R_E(&a, &nest), a.is_upper_triangular());
        }
    }

    #[test]
    fn pi_e_is_multiplicative_on_triangular_units() {
        let f = gf(5);
        let mut rng = sample::rng(8);
        let nest = standard_nest(f, 5, &[0, 1, 2, 3, 4, 5]).unwrap();
        for _ in 0..100 {
            let a = sample::random_upper_unit(f, 5, &mut rng);
            let b = sample::random_upper_unit(f, 5, &mut rng);
            let hi = rng.gen_range(1..=5);
            let lo = rng.gen_range(0..hi);
            let e = nest.members()[hi].difference(&nest.members()[lo]).unwrap();
            let (pa, pb) = (pi_e(&a, &e), pi_e(&b, &e));
            assert_eq!(pi_e(&(&a * &b), &e), &pa * &pb);
            assert!(gamma_membership(&pa, &e));
        }
        let e = Idem::standard(f, 3, 2);
        assert!(pi_e(&Mat::identity(f, 3), &e).is_identity());
        let a = sample::random_mat(f, 3, &mut rng);
        assert_eq!(pi_e(&a, &Idem::one(f, 3)), a);
    }

    #[test]
    fn gamma_examples() {
        let e2 = Idem::standard(gf(2), 2, 1);
        assert_eq!(gamma_enumerate(&e2, 1000).unwrap(), vec![Mat::identity(gf(2), 2)]);
        let e3 = Idem::standard(gf(3), 2, 1);
        let g = gamma_enumerate(&e3, 1000).unwrap();
        assert_eq!(g.len(), 2);
        assert!(is_subgroup(&g));
        let full = gamma_enumerate(&Idem::one(gf(2), 2), 1000).unwrap();
        assert_eq!(full.len(), 6);
        assert!(full.iter().all(|a| gamma_membership(a, &Idem::one(gf(2), 2))));
        assert!(matches!(
            gamma_enumerate(&Idem::one(gf(3), 3), 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn gamma_of_conjugated_idempotent_is_an_isometric_subgroup() {
        let f = gf(3);
        let mut rng = sample::rng(2);
        let e = Idem::new(sample::random_idempotent(f, 3, 2, &mut rng)).unwrap();
        let g = gamma_enumerate(&e, 100_000).unwrap();
        assert_eq!(g.len(), 48);
        assert!(is_subgroup(&g));
        assert!(g.iter().all(|a| gamma_membership(a, &e)));
        let frame = CornerFrame::new(&e);
        for _ in 0..50 {
            let a = sample::random_unit(f, 2, &mut rng);
            let b = sample::random_unit(f, 2, &mut rng);
            let lhs = rk(&(&frame.embed(&a) - &frame.embed(&b)));
            let corner = rk(&(&a - &b));
            assert_eq!(lhs, RankValue::new(corner.num, 3));
        }
    }

    #[test]
    fn parabolic_examples() {
        let f3 = gf(3);
        let f = Idem::new(Mat::diag(f3, &[0, 1])).unwrap();
        let e = Idem::standard(f3, 2, 1);
        let els = parabolic_enumerate(&f, &e, 1000).unwrap();
        assert_eq!(els.len(), 6);
        let rep = parabolic_subgroup_check(&f, &e, &els).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.ball_radius, RankValue::new(1, 2));
        let images: Vec<Mat> = els.iter().map(|(a, x)| a + x).collect();
        assert!(is_subgroup(&images));
        let trivial = vec![(Mat::identity(f3, 2), Mat::zero(f3, 2))];
        assert!(parabolic_subgroup_check(&f, &e, &trivial).unwrap().holds());
        assert_eq!(
            parabolic_subgroup_check(&f, &f, &trivial),
            Err(Error::NotOrthogonal)
        );
    }

    #[test]
    fn parabolic_homomorphism_random() {
        let f5 = gf(5);
        let mut rng = sample::rng(12);
        for _ in 0..10 {
            let (em, fm) = sample::random_orthogonal_pair(f5, 4, 2, 2, &mut rng);
            let (e, f) = (Idem::new(em).unwrap(), Idem::new(fm).unwrap());
            let frame = OffDiagonalFrame::new(&e, &f);
            let els: Vec<(Mat, Mat)> = (0..10)
                .map(|_| {
                    let c: Vec<u32> = (0..4).map(|_| rng.gen_range(0..5)).collect();
                    (sample_gamma(&f, &mut rng), frame.embed(&c))
                })
                .collect();
            let rep = parabolic_subgroup_check(&f, &e, &els).unwrap();
            assert!(rep.holds(), "{rep:?}");
            for _ in 0..10 {
                let g = sample_parabolic(&f, &e, &mut rng);
                assert!(parabolic_membership(&g, &f, &e));
            }
        }
    }

    #[test]
    fn matrix_unit_examples() {
        let f = gf(2);
        let parts = vec![Idem::standard(f, 2, 1), Idem::new(Mat::diag(f, &[0, 1])).unwrap()];
        let s = matrix_units_from_idempotents(&parts).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(s.get(i, j), &Mat::unit(f, 2, i, j));
            }
        }
        let uneq = vec![Idem::standard(f, 3, 1), Idem::new(Mat::diag(f, &[0, 1, 1])).unwrap()];
        assert_eq!(matrix_units_from_idempotents(&uneq), Err(Error::UnequalRanks));
        let bad = vec![Idem::standard(f, 2, 1), Idem::standard(f, 2, 1)];
        assert_eq!(matrix_units_from_idempotents(&bad), Err(Error::NotPartition));
    }

    #[test]
    fn matrix_units_from_conjugated_partition() {
        let f = gf(3);
        let mut rng = sample::rng(6);
        for _ in 0..20 {
            let (a, b) = sample::random_orthogonal_pair(f, 4, 2, 2, &mut rng);
            let parts = vec![Idem::new(a).unwrap(), Idem::new(b).unwrap()];
            let s = matrix_units_from_idempotents(&parts).unwrap();
            assert!(s.verify());
            assert_eq!(s.get(0, 0), parts[0].mat());
            assert_eq!(s.get(1, 1), parts[1].mat());
        }
    }

    #[test]
    fn intertwiner_examples() {
        let f = gf(2);
        let mut rng = sample::rng(3);
        let std_parts = vec![Idem::standard(f, 4, 2), Idem::new(Mat::diag(f, &[0, 0, 1, 1])).unwrap()];
        let s = matrix_units_from_idempotents(&std_parts).unwrap();
        let g = conjugation_intertwiner(&s, &s).unwrap();
        assert_eq!(s.conjugate(&g).unwrap(), s);
        for _ in 0..20 {
            let h = sample::random_unit(f, 4, &mut rng);
            let t = s.conjugate(&h).unwrap();
            let g = conjugation_intertwiner(&s, &t).unwrap();
            assert_eq!(s.conjugate(&g).unwrap(), t);
            let (a, b) = sample::random_orthogonal_pair(f, 4, 2, 2, &mut rng);
            let other =
                matrix_units_from_idempotents(&[Idem::new(a).unwrap(), Idem::new(b).unwrap()]).unwrap();
            let g = conjugation_intertwiner(&s, &other).unwrap();
            assert_eq!(s.conjugate(&g).unwrap(), other);
        }
        let three = matrix_units_from_idempotents(&[
            Idem::standard(f, 3, 1),
            Idem::new(Mat::diag(f, &[0, 1, 0])).unwrap(),
            Idem::new(Mat::diag(f, &[0, 0, 1])).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            conjugation_intertwiner(&s, &three),
            Err(Error::IncompatibleShapes(_))
        ));
    }

    #[test]
    fn center_examples() {
        let r = center_bruteforce(gf(3), 2, 100_000).unwrap();
        assert_eq!((r.group_order, r.center_size), (48, 2));
        assert!(r.center_is_nonzero_scalars && r.commutant_is_scalars);
        let r = center_bruteforce(gf(2), 2, 100_000).unwrap();
        assert_eq!((r.group_order, r.center_size), (6, 1));
        assert!(r.center_is_nonzero_scalars);
        assert!(matches!(
            center_bruteforce(gf(5), 3, 100_000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn corner_map_is_multiplicative_on_nest_algebra() {
        let f = gf(3);
        let mut rng = sample::rng(14);
        let nest = standard_nest(f, 4, &[0, 1, 2, 3, 4]).unwrap();
        for _ in 0..50 {
            let mut a = sample::random_upper_unit(f, 4, &mut rng);
            a.set(0, 0, 0);
            let b = sample::random_upper_unit(f, 4, &mut rng);
            let hi = rng.gen_range(1..=4);
            let lo = rng.gen_range(0..hi);
            let e = nest.members()[hi].difference(&nest.members()[lo]).unwrap();
            let c = |x: &Mat| &(e.mat() * x) * e.mat();
            assert_eq!(c(&(&a * &b)), &c(&a) * &c(&b));
        }
    }
}
