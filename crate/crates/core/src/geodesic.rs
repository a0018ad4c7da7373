//! Discrete geodesics for the rank metric: chains `e_k b + (1 - e_k) a`
//! along a maximal nest under the column-space idempotent of `b - a`.

use rand::Rng;
use serde::Serialize;

use crate::canonical::charpoly;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::idempotent::{
    column_space_idempotent, complete_basis, in_R_E, max_nest_in_corner, nest_from_basis, Idem,
    NestChain,
};
use crate::mat::Mat;
use crate::poly::Poly;
use crate::rank::{dist, RankValue};
use crate::sample;

/// Points with times such that `dist(points_i, points_j) = |t_i - t_j|`
/// for all pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeodesicPath {
    pub points: Vec<Mat>,
    pub times: Vec<RankValue>,
}

impl GeodesicPath {
    pub fn trivial(a: &Mat) -> GeodesicPath {
        GeodesicPath {
            points: vec![a.clone()],
            times: vec![RankValue::zero(a.n() as u64)],
        }
    }

    pub fn start(&self) -> &Mat {
        &self.points[0]
    }

    pub fn end(&self) -> &Mat {
        self.points.last().expect("nonempty path")
    }

    pub fn length(&self) -> RankValue {
        *self.times.last().expect("nonempty path")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn verify(&self) -> bool {
        verify_geodesic(self)
    }

    pub fn to_json(&self) -> GeodesicJson {
        GeodesicJson {
            points: self.points.iter().map(Mat::rows).collect(),
            times: self.times.clone(),
            verified: self.verify(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeodesicJson {
    pub points: Vec<Vec<Vec<u32>>>,
    pub times: Vec<RankValue>,
    pub verified: bool,
}

/// Exact all-pairs check, with `t_0 = 0` and strictly increasing times.
pub fn verify_geodesic(path: &GeodesicPath) -> bool {
    let k = path.points.len();
    if k == 0 || path.times.len() != k || !path.times[0].is_zero() {
        return false;
    }
    if path.times.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    for i in 0..k {
        for j in i + 1..k {
            match dist(&path.points[i], &path.points[j]) {
                Ok(d) if d == path.times[j].abs_diff(path.times[i]) => {}
                _ => return false,
            }
        }
    }
    true
}

fn path_along_nest(a: &Mat, b: &Mat, nest: &NestChain) -> GeodesicPath {
    let n = a.n() as u64;
    let one = Mat::identity(a.field(), a.n());
    let mut points = Vec::with_capacity(nest.len());
    let mut times = Vec::with_capacity(nest.len());
    for e in nest.members() {
        let em = e.mat();
        points.push(&(em * b) + &(&(&one - em) * a));
        times.push(RankValue::new(e.rank() as u64, n));
    }
    GeodesicPath { points, times }
}

/// `gamma_k = e_k b + (1 - e_k) a` along a maximal nest of the corner of
/// the column-space idempotent of `b - a`.
pub fn geodesic_between(a: &Mat, b: &Mat) -> Result<GeodesicPath> {
    a.ensure_compatible(b)?;
    let e = column_space_idempotent(&(b - a));
    if e.rank() == 0 {
        return Ok(GeodesicPath::trivial(a));
    }
    let nest = max_nest_in_corner(&e)?;
    Ok(path_along_nest(a, b, &nest))
}

/// Columns `P` with `P^-1 a P` upper triangular. The first column is an
/// eigenvector for the smallest eigenvalue; the rest come from the
/// induced map on the quotient.
pub fn triangularizing_basis(a: &Mat) -> Result<Mat> {
    if !charpoly(a).splits()? {
        return Err(Error::NotTriangularizable);
    }
    Ok(triangularize_split(a))
}

fn triangularize_split(a: &Mat) -> Mat {
    let (f, n) = (a.field(), a.n());
    if n == 1 {
        return Mat::identity(f, 1);
    }
    let lambda = *charpoly(a)
        .roots()
        .expect("nonzero")
        .first()
        .expect("split characteristic polynomial has a root");
    let v = a
        .add_scalar(f.neg(lambda))
        .kernel_basis()
        .into_iter()
        .next()
        .expect("eigenvalue has an eigenvector");
    let q = complete_basis(f, &[v], n);
    let local = &(&q.inverse().expect("basis") * a) * &q;
    let inner = triangularize_split(&local.diagonal_block(1, n - 1));
    let mut blocks = vec![Mat::identity(f, 1)];
    blocks.push(inner);
    &q * &Mat::block_diag(&blocks)
}

/// Coordinates of `a` restricted to the invariant subspace spanned by
/// `basis`.
fn restrict(a: &Mat, basis: &[Vec<u32>]) -> Mat {
    let (f, n) = (a.field(), a.n());
    let r = basis.len();
    let full = complete_basis(f, basis, n);
    let local = &(&full.inverse().expect("basis") * a) * &full;
    debug_assert!((0..r).all(|j| (r..n).all(|i| local.get(i, j) == 0)));
    local.diagonal_block(0, r)
}

/// Geodesic from `a` to `cI` through the nest obtained by triangularizing
/// `a` on the column space of `cI - a`, which `a` leaves invariant.
fn corner_geodesic(a: &Mat, c: u32) -> Result<(GeodesicPath, NestChain)> {
    let (f, n) = (a.field(), a.n());
    let target = Mat::scalar(f, n, c);
    let diff = &target - a;
    let e = column_space_idempotent(&diff);
    if e.rank() == 0 {
        return Ok((GeodesicPath::trivial(a), NestChain::empty()));
    }
    let u = diff.column_basis();
    let corner = restrict(a, &u);
    let p = triangularizing_basis(&corner)?;
    let r = u.len();
    let mut cols: Vec<Vec<u32>> = (0..r)
        .map(|j| {
            let mut col = vec![0u32; n];
            for (i, ui) in u.iter().enumerate() {
                let coef = p.get(i, j);
                for (x, y) in col.iter_mut().zip(ui) {
                    *x = f.add(*x, f.mul(coef, *y));
                }
            }
            col
        })
        .collect();
    cols.extend(e.mat().kernel_basis());
    let nest = nest_from_basis(&Mat::from_columns(f, &cols), r);
    debug_assert!(nest.members().last() == Some(&e));
    assert!(in_R_E(a, &nest), "triangularizing nest does not contain a");
    Ok((path_along_nest(a, &target, &nest), nest))
}

/// A geodesic from the unit `a` to `1` all of whose points are units.
pub fn geodesic_unit_to_identity(a: &Mat) -> Result<GeodesicPath> {
    if !a.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let (path, _) = corner_geodesic(a, 1)?;
    Ok(path)
}

/// The nest used by [`geodesic_unit_to_identity`].
pub fn unit_geodesic_nest(a: &Mat) -> Result<NestChain> {
    if !a.is_invertible() {
        return Err(Error::NotInvertible);
    }
    Ok(corner_geodesic(a, 1)?.1)
}

/// True when `a` is a unit whose restriction to the column space of
/// `1 - a` has split characteristic polynomial.
pub fn corner_splits(a: &Mat) -> bool {
    a.is_invertible() && corner_splits_at(a, 1)
}

fn corner_splits_at(a: &Mat, c: u32) -> bool {
    let diff = &Mat::scalar(a.field(), a.n(), c) - a;
    let u = diff.column_basis();
    u.is_empty() || charpoly(&restrict(a, &u)).splits().unwrap_or(false)
}

/// A geodesic from `a` to `cI` inside the common zero set of `polys`.
pub fn star_geodesic_algebraic(a: &Mat, polys: &[Poly], c: u32) -> Result<GeodesicPath> {
    let f = a.field();
    if let Some(p) = polys.iter().find(|p| p.field() != f) {
        return Err(Error::FieldMismatch(p.field().p(), f.p()));
    }
    if polys.iter().any(|p| !p.eval_mat(a).is_zero()) {
        return Err(Error::NotAlgebraicOverS);
    }
    if polys.iter().any(|p| p.eval(c % f.p()) != 0) {
        return Err(Error::CenterNotRoot);
    }
    Ok(corner_geodesic(a, c % f.p())?.0)
}

/// Traverses the paths block by block on the block-diagonal sum, holding
/// later blocks at their start points and earlier ones at their ends.
pub fn block_concat_geodesic(paths: &[GeodesicPath]) -> Result<GeodesicPath> {
    let Some(first) = paths.first() else {
        return Err(Error::PreconditionViolation("no paths to concatenate".into()));
    };
    let field = first.start().field();
    if let Some(p) = paths.iter().find(|p| p.start().field() != field) {
        return Err(Error::FieldMismatch(field.p(), p.start().field().p()));
    }
    let total: usize = paths.iter().map(|p| p.start().n()).sum();
    let mut current: Vec<Mat> = paths.iter().map(|p| p.start().clone()).collect();
    let mut points = vec![Mat::block_diag(&current)];
    let mut times = vec![RankValue::zero(total as u64)];
    let mut offset = 0u64;
    for (k, path) in paths.iter().enumerate() {
        let nk = path.start().n() as u64;
        for (pt, t) in path.points.iter().zip(&path.times).skip(1) {
            assert_eq!((t.num * nk) % t.den, 0, "time is not a multiple of 1/n");
            current[k] = pt.clone();
            points.push(Mat::block_diag(&current));
            times.push(RankValue::new(offset + t.num * nk / t.den, total as u64));
        }
        let len = path.length();
        offset += len.num * nk / len.den;
    }
    Ok(GeodesicPath { points, times })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Midpoint {
    pub m: Mat,
    /// `max(|d(g0,m) - d/2|, |d(m,g1) - d/2|)` with `d = d(g0,g1)`.
    pub err: RankValue,
    /// The element with a unit geodesic to `1` standing in for `g0 g1^-1`.
    pub h: Mat,
    /// `d(g0 g1^-1, h)`
    pub perturbation: RankValue,
    /// Random perturbations tried before `h` was found.
    pub tries: usize,
}

impl Midpoint {
    /// `1/(2n) + (3/2) d(g0 g1^-1, h)`
    pub fn bound(&self) -> RankValue {
        let n = self.m.n() as u64;
        RankValue::new(1, 2 * n).add(RankValue::new(3 * self.perturbation.num, 2 * self.perturbation.den))
    }
}

fn random_transvection<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Mat {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let mut t = Mat::identity(field, n);
    t.set(i, j, sample::random_nonzero(field, rng));
    t
}

/// Approximate midpoint of two units: a point `s` of a unit geodesic from
/// `h ~ g0 g1^-1` to `1`, nearest half its length, translated to `s g1`.
/// When `g0 g1^-1` has no such geodesic, `h` is searched among
/// `g0 g1^-1 (1 + c E_ij)` with a seeded generator.
pub fn approximate_midpoint(g0: &Mat, g1: &Mat, seed: u64, budget: usize) -> Result<Midpoint> {
    g0.ensure_compatible(g1)?;
    let g1_inv = g1.inverse()?;
    if !g0.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let (f, n) = (g0.field(), g0.n());
    let h0 = g0 * &g1_inv;
    let mut h = h0.clone();
    let mut tries = 0;
    let mut rng = sample::rng(seed);
    let path = loop {
        match geodesic_unit_to_identity(&h) {
            Ok(path) => break path,
            Err(Error::NotTriangularizable) if tries < budget && n > 1 => {
                tries += 1;
                h = &h0 * &random_transvection(f, n, &mut rng);
            }
            Err(Error::NotTriangularizable) => {
                return Err(Error::NoTriangularizableApproximant(tries));
            }
            Err(e) => return Err(e),
        }
    };
    let half = path.length();
    let half = RankValue::new(half.num, 2 * half.den);
    let s = path
        .points
        .iter()
        .zip(&path.times)
        .min_by_key(|(_, t)| t.abs_diff(half))
        .map(|(p, _)| p)
        .expect("nonempty path");
    let m = s * g1;
    let d = dist(g0, g1)?;
    let d_half = RankValue::new(d.num, 2 * d.den);
    let err = dist(g0, &m)?
        .abs_diff(d_half)
        .max(dist(&m, g1)?.abs_diff(d_half));
    Ok(Midpoint {
        perturbation: dist(&h0, &h)?,
        m,
        err,
        h,
        tries,
    })
}

/// Flag lifted from a triangularization: the nest `e_k` with `im e_k`
/// spanned by the first `k` columns of a triangularizing basis of `a`.
pub fn triangularizing_nest(a: &Mat) -> Result<NestChain> {
    let p = triangularizing_basis(a)?;
    Ok(nest_from_basis(&p, a.n()))
}

/// Column-space idempotent of `1 - a`.
pub fn unit_corner_idempotent(a: &Mat) -> Idem {
    column_space_idempotent(&(&Mat::identity(a.field(), a.n()) - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn between_examples() {
        let f = gf(2);
        let a = Mat::diag(f, &[1, 0]);
        let p = geodesic_between(&a, &a).unwrap();
        assert_eq!((p.len(), p.length().num), (1, 0));
        let p = geodesic_between(&Mat::zero(f, 2), &Mat::identity(f, 2)).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.times, vec![RankValue::new(0, 2), RankValue::new(1, 2), RankValue::new(2, 2)]);
        assert!(p.verify());
        assert!(p.start().is_zero() && p.end().is_identity());
        assert_eq!(p.points[1].rank(), 1);
    }

    #[test]
    fn between_random() {
        let f = gf(3);
        let mut rng = sample::rng(31);
        for _ in 0..100 {
            let a = sample::random_mat(f, 6, &mut rng);
            let b = sample::random_mat(f, 6, &mut rng);
            let p = geodesic_between(&a, &b).unwrap();
            assert!(p.verify());
            assert_eq!((p.start(), p.end()), (&a, &b));
            assert_eq!(p.len(), (&b - &a).rank() + 1);
            assert_eq!(p.length(), dist(&a, &b).unwrap());
        }
    }

    #[test]
    fn verify_rejects_corrupted_paths() {
        let f = gf(2);
        let zero = Mat::zero(f, 2);
        let one = Mat::identity(f, 2);
        let ok = GeodesicPath {
            points: vec![zero.clone(), one.clone()],
            times: vec![RankValue::new(0, 2), RankValue::new(2, 2)],
        };
        assert!(verify_geodesic(&ok));
        let wrong = GeodesicPath {
            points: vec![zero, one],
            times: vec![RankValue::new(0, 2), RankValue::new(1, 2)],
        };
        assert!(!verify_geodesic(&wrong));
        let f3 = gf(3);
        let mut rng = sample::rng(2);
        let a = sample::random_unit(f3, 4, &mut rng);
        let b = sample::random_unit(f3, 4, &mut rng);
        let mut p = geodesic_between(&a, &b).unwrap();
        if p.len() >= 4 {
            p.points.swap(1, 2);
            assert!(!verify_geodesic(&p));
        }
    }

    #[test]
    fn unit_geodesic_examples() {
        let f2 = gf(2);
        let p = geodesic_unit_to_identity(&Mat::identity(f2, 3)).unwrap();
        assert_eq!(p.len(), 1);
        let t = Mat::from_rows(f2, &[vec![1, 1], vec![0, 1]]).unwrap();
        let p = geodesic_unit_to_identity(&t).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.length(), RankValue::new(1, 2));
        assert!(p.points.iter().all(Mat::is_invertible));
        let f3 = gf(3);
        let a = &Mat::diag(f3, &[2, 1]) * &Mat::from_rows(f3, &[vec![1, 1], vec![0, 1]]).unwrap();
        let p = geodesic_unit_to_identity(&a).unwrap();
        assert!(p.verify() && p.points.iter().all(Mat::is_invertible));
        assert_eq!(
            geodesic_unit_to_identity(&Mat::zero(f3, 2)),
            Err(Error::NotInvertible)
        );
        let comp = crate::canonical::companion(&Poly::new(f2, &[1, 1, 1])).unwrap();
        assert_eq!(geodesic_unit_to_identity(&comp), Err(Error::NotTriangularizable));
    }

    #[test]
    fn unit_geodesics_random_split() {
        let f = gf(5);
        let mut rng = sample::rng(17);
        for _ in 0..50 {
            let a = sample::random_split_unit(f, 6, &mut rng);
            assert!(corner_splits(&a));
            let p = geodesic_unit_to_identity(&a).unwrap();
            assert!(p.verify());
            assert!(p.points.iter().all(Mat::is_invertible));
            assert_eq!((p.start(), p.end().is_identity()), (&a, true));
            assert_eq!(p.length(), dist(&a, &Mat::identity(f, 6)).unwrap());
        }
    }

    #[test]
    fn triangularization_is_upper_triangular() {
        let f = gf(7);
        let mut rng = sample::rng(23);
        for _ in 0..30 {
            let a = sample::random_split_unit(f, 5, &mut rng);
            let p = triangularizing_basis(&a).unwrap();
            assert!((&(&p.inverse().unwrap() * &a) * &p).is_upper_triangular());
            assert!(in_R_E(&a, &triangularizing_nest(&a).unwrap()));
        }
    }

    #[test]
    fn star_examples() {
        let f3 = gf(3);
        let mut rng = sample::rng(5);
        let idem_poly = Poly::new(f3, &[0, -1, 1]);
        for _ in 0..20 {
            let a = sample::random_idempotent(f3, 4, 2, &mut rng);
            let p = star_geodesic_algebraic(&a, std::slice::from_ref(&idem_poly), 0).unwrap();
            assert!(p.verify() && p.end().is_zero());
            assert!(p.points.iter().all(|x| &(x * x) == x));
        }
        let f5 = gf(5);
        let inv_poly = Poly::new(f5, &[-1, 0, 1]);
        let a = Mat::diag(f5, &[1, -1]);
        let p = star_geodesic_algebraic(&a, std::slice::from_ref(&inv_poly), 1).unwrap();
        assert_eq!(p.points, vec![a.clone(), Mat::identity(f5, 2)]);
        let s = Mat::scalar(f5, 3, 4);
        assert_eq!(star_geodesic_algebraic(&s, std::slice::from_ref(&inv_poly), 4).unwrap().len(), 1);
        assert_eq!(
            star_geodesic_algebraic(&Mat::diag(f5, &[2, 1]), std::slice::from_ref(&inv_poly), 1),
            Err(Error::NotAlgebraicOverS)
        );
        assert_eq!(
            star_geodesic_algebraic(&a, &[inv_poly], 2),
            Err(Error::CenterNotRoot)
        );
    }

    #[test]
    fn block_concat_examples() {
        let f = gf(2);
        let p = geodesic_between(&Mat::zero(f, 2), &Mat::identity(f, 2)).unwrap();
        assert_eq!(block_concat_geodesic(std::slice::from_ref(&p)).unwrap(), p);
        let q = block_concat_geodesic(&[p.clone(), p.clone()]).unwrap();
        assert_eq!(q.len(), 5);
        assert_eq!(q.length(), RankValue::new(1, 1));
        assert!(q.verify());
        let t = GeodesicPath::trivial(&Mat::identity(f, 3));
        let tt = block_concat_geodesic(&[t.clone(), t]).unwrap();
        assert_eq!(tt.len(), 1);
        let f3 = gf(3);
        let mut rng = sample::rng(1);
        let paths: Vec<GeodesicPath> = [2usize, 3, 1]
            .iter()
            .map(|&n| {
                let a = sample::random_mat(f3, n, &mut rng);
                let b = sample::random_mat(f3, n, &mut rng);
                geodesic_between(&a, &b).unwrap()
            })
            .collect();
        assert!(block_concat_geodesic(&paths).unwrap().verify());
    }

    #[test]
    fn midpoint_examples() {
        let f2 = gf(2);
        let g = Mat::from_rows(f2, &[vec![1, 1], vec![0, 1]]).unwrap();
        let m = approximate_midpoint(&g, &g, 0, 64).unwrap();
        assert_eq!((m.m.clone(), m.err.num), (g.clone(), 0));
        let one = Mat::identity(f2, 2);
        let m = approximate_midpoint(&g, &one, 0, 64).unwrap();
        assert!(m.m == g || m.m == one);
        assert_eq!(m.err, RankValue::new(1, 4));
        assert!(m.err <= m.bound());
        let f3 = gf(3);
        let mut rng = sample::rng(40);
        for _ in 0..30 {
            let g1 = sample::random_unit(f3, 8, &mut rng);
            let h = sample::random_split_unit(f3, 8, &mut rng);
            let g0 = &h * &g1;
            let m = approximate_midpoint(&g0, &g1, 1, 64).unwrap();
            assert_eq!(m.tries, 0);
            assert!(m.m.is_invertible());
            assert!(m.err <= RankValue::new(1, 16));
        }
    }
}
