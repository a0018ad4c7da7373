//! Factorization of units into factors trapped in small balls, the unit
//! and `SL_n` approximations, and the doubling tower `M_(2^k)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::triangularizing_basis;
use crate::idempotent::{
    gamma_membership, idem_orthogonal, in_R_E, parabolic_membership, pi_e, sample_gamma,
    sample_parabolic, standard_nest, Idem,
};
use crate::mat::Mat;
use crate::rank::{dist, rk, RankValue};

/// A subgroup of the unit group certifying that a factor is trapped in a
/// ball around `1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `Gamma(f) = GL(fRf) + 1 - f`
    Gamma { f: Idem },
    /// `Gamma(f) + eRf` with `e` orthogonal to `f`
    Parabolic { f: Idem, e: Idem },
}

impl Witness {
    pub fn f(&self) -> &Idem {
        match self {
            Witness::Gamma { f } | Witness::Parabolic { f, .. } => f,
        }
    }

    /// Every element of the subgroup lies within `rk(f)` of `1`.
    pub fn radius(&self) -> RankValue {
        self.f().rk()
    }

    pub fn contains(&self, g: &Mat) -> bool {
        match self {
            Witness::Gamma { f } => gamma_membership(g, f),
            Witness::Parabolic { f, e } => idem_orthogonal(e, f) && parabolic_membership(g, f, e),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Mat {
        match self {
            Witness::Gamma { f } => sample_gamma(f, rng),
            Witness::Parabolic { f, e } => sample_parabolic(f, e, rng),
        }
    }

    pub fn conjugate(&self, p: &Mat, p_inv: &Mat) -> Witness {
        let c = |e: &Idem| Idem::new(&(p * e.mat()) * p_inv).expect("conjugate of an idempotent");
        match self {
            Witness::Gamma { f } => Witness::Gamma { f: c(f) },
            Witness::Parabolic { f, e } => Witness::Parabolic { f: c(f), e: c(e) },
        }
    }

    pub fn describe(&self) -> WitnessJson {
        match self {
            Witness::Gamma { f } => WitnessJson {
                kind: "gamma",
                f_rank: f.rank(),
                e_rank: None,
                radius: self.radius(),
            },
            Witness::Parabolic { f, e } => WitnessJson {
                kind: "parabolic",
                f_rank: f.rank(),
                e_rank: Some(e.rank()),
                radius: self.radius(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessJson {
    pub kind: &'static str,
    pub f_rank: usize,
    pub e_rank: Option<usize>,
    pub radius: RankValue,
}

/// `g = g_m ... g_1` with `g_i` in the witness subgroup `witnesses[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallFactorization {
    pub g: Mat,
    pub m: usize,
    pub factors: Vec<Mat>,
    pub witnesses: Vec<Witness>,
}

impl BallFactorization {
    pub fn product(&self) -> Mat {
        self.factors
            .iter()
            .rev()
            .fold(Mat::identity(self.g.field(), self.g.n()), |acc, x| &acc * x)
    }

    pub fn bound(&self) -> RankValue {
        RankValue::new(1, self.m as u64)
    }

    pub fn distances(&self) -> Vec<RankValue> {
        let one = Mat::identity(self.g.field(), self.g.n());
        self.factors.iter().map(|x| rk(&(x - &one))).collect()
    }

    /// Re-multiplication, exact ball bounds, witness membership and witness
    /// radii.
    pub fn verify(&self) -> bool {
        let bound = self.bound();
        self.factors.len() == self.m
            && self.witnesses.len() == self.m
            && self.product() == self.g
            && self.distances().iter().all(|d| *d <= bound)
            && self
                .factors
                .iter()
                .zip(&self.witnesses)
                .all(|(x, w)| w.contains(x) && w.radius() <= bound)
    }
}

/// The recursion `g_1 = pi_(e_1)(g)`, `g_i = pi_(e_i)(g g_1^-1 ... g_(i-1)^-1)`
/// along the standard nest with ranks `i n/m`.
pub fn ball_factorization(g: &Mat, m: usize) -> Result<BallFactorization> {
    let (field, n) = (g.field(), g.n());
    if m == 0 || n % m != 0 {
        return Err(Error::NotDivisible { m, n });
    }
    let k = n / m;
    let ranks: Vec<usize> = (0..=m).map(|i| i * k).collect();
    let nest = standard_nest(field, n, &ranks)?;
    if !g.is_invertible() || !in_R_E(g, &nest) {
        return Err(Error::NotInGlRe);
    }
    let es = nest.members();
    let mut factors = Vec::with_capacity(m);
    let mut witnesses = Vec::with_capacity(m);
    // rest = g g_1^-1 ... g_(i-1)^-1
    let mut rest = g.clone();
    for i in 1..=m {
        let gi = pi_e(&rest, &es[i]);
        rest = &rest * &gi.inverse().expect("pi_e preserves units");
        let f = es[i].difference(&es[i - 1]).expect("nest is increasing");
        witnesses.push(if i == 1 {
            Witness::Gamma { f }
        } else {
            Witness::Parabolic {
                f,
                e: es[i - 1].clone(),
            }
        });
        factors.push(gi);
    }
    debug_assert!(rest.is_identity());
    Ok(BallFactorization {
        g: g.clone(),
        m,
        factors,
        witnesses,
    })
}

/// Conjugates a unit with split characteristic polynomial to upper
/// triangular form `t = P^-1 g P`, factors `t`, and conjugates the factors
/// and witnesses back.
pub fn ball_factorization_split(g: &Mat, m: usize) -> Result<BallFactorization> {
    if !g.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let p = triangularizing_basis(g)?;
    let p_inv = p.inverse().expect("basis");
    let t = &(&p_inv * g) * &p;
    let inner = ball_factorization(&t, m)?;
    Ok(BallFactorization {
        g: g.clone(),
        m,
        factors: inner
            .factors
            .iter()
            .map(|x| &(&p * x) * &p_inv)
            .collect(),
        witnesses: inner
            .witnesses
            .iter()
            .map(|w| w.conjugate(&p, &p_inv))
            .collect(),
    })
}

/// `b = v w` for `a = v diag(I_r,0) w`; then `rank(b - a) = n - rank(a)`.
pub fn invertible_approximation(a: &Mat) -> Mat {
    let df = a.diag_factorize();
    &df.v * &df.w
}

/// Scales the last row by `det(a)^-1`.
pub fn sl_projection(a: &Mat) -> Result<Mat> {
    let f = a.field();
    let det = a.det();
    if det == 0 {
        return Err(Error::NotInvertible);
    }
    let s = f.inv(det)?;
    let mut b = a.clone();
    let last = a.n() - 1;
    for j in 0..a.n() {
        b.set(last, j, f.mul(s, a.get(last, j)));
    }
    Ok(b)
}

/// An element of `M_(2^level)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerElem {
    level: u32,
    m: Mat,
}

impl TowerElem {
    pub fn new(m: Mat) -> Result<TowerElem> {
        let n = m.n();
        if !n.is_power_of_two() {
            return Err(Error::PreconditionViolation(format!(
                "dimension {n} is not a power of two"
            )));
        }
        Ok(TowerElem {
            level: n.trailing_zeros(),
            m,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mat(&self) -> &Mat {
        &self.m
    }

    /// Embeds up to the given level.
    pub fn lift_to(&self, level: u32) -> Result<TowerElem> {
        if level < self.level {
            return Err(Error::IncompatibleShapes(format!(
                "cannot lift level {} to level {level}",
                self.level
            )));
        }
        let mut x = self.clone();
        while x.level < level {
            x = tower_embed(&x);
        }
        Ok(x)
    }
}

/// `a -> diag(a, a)`
pub fn tower_embed(x: &TowerElem) -> TowerElem {
    TowerElem {
        level: x.level + 1,
        m: Mat::block_diag(&[x.m.clone(), x.m.clone()]),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityTrace {
    pub dist_g_a: RankValue,
    pub dist_a_h: RankValue,
    pub dist_g_h: RankValue,
    /// `d(g,h) <= d(g,a) + d(a,h)`
    pub triangle: bool,
    /// `d(a,h) <= d(g,a)`
    pub approximation: bool,
    /// `d(g,h) <= 2 d(g,a)`
    pub bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityResult {
    /// Invertible and embedded from the level of `a`.
    pub h: Mat,
    pub h_low: TowerElem,
    pub trace: DensityTrace,
}

/// A unit at a lower level of the tower within `2 d(g, a)` of `g`: the
/// invertible approximation of `a` at its own level, embedded.
pub fn tower_unit_density(g: &TowerElem, a: &TowerElem) -> Result<DensityResult> {
    if !g.m.is_invertible() {
        return Err(Error::NotInvertible);
    }
    if a.level > g.level || a.m.field() != g.m.field() {
        return Err(Error::IncompatibleShapes(format!(
            "level {} element against level {}",
            a.level, g.level
        )));
    }
    let h_low = TowerElem {
        level: a.level,
        m: invertible_approximation(&a.m),
    };
    let h = h_low.lift_to(g.level)?.m;
    let a_up = a.lift_to(g.level)?.m;
    let dist_g_a = dist(&g.m, &a_up)?;
    let dist_a_h = dist(&a_up, &h)?;
    let dist_g_h = dist(&g.m, &h)?;
    let trace = DensityTrace {
        triangle: dist_g_h <= dist_g_a.add(dist_a_h),
        approximation: dist_a_h <= dist_g_a,
        bound: dist_g_h <= dist_g_a.scale(2),
        dist_g_a,
        dist_a_h,
        dist_g_h,
    };
    Ok(DensityResult { h, h_low, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::sample;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn ball_examples() {
        let f2 = gf(2);
        let id = Mat::identity(f2, 4);
        let bf = ball_factorization(&id, 2).unwrap();
        assert!(bf.factors.iter().all(Mat::is_identity));
        assert!(bf.verify());
        let g = Mat::from_rows(f2, &[vec![1, 1], vec![0, 1]]).unwrap();
        let bf = ball_factorization(&g, 2).unwrap();
        assert!(bf.factors[0].is_identity());
        assert_eq!(bf.factors[1], g);
        assert_eq!(bf.distances()[1], RankValue::new(1, 2));
        assert!(bf.verify());
        let f3 = gf(3);
        let d = Mat::diag(f3, &[2, 1]);
        let bf = ball_factorization(&d, 2).unwrap();
        assert!(bf.verify());
        assert_eq!(bf.factors[0], d);
        assert_eq!(
            ball_factorization(&Mat::identity(f3, 3), 2),
            Err(Error::NotDivisible { m: 2, n: 3 })
        );
        assert_eq!(
            ball_factorization(&Mat::unit(f3, 2, 1, 0).add_scalar(1), 2),
            Err(Error::NotInGlRe)
        );
    }

    #[test]
    fn ball_random_block_triangular() {
        let f = gf(3);
        let mut rng = sample::rng(19);
        for m in [2usize, 4, 8] {
            for _ in 0..20 {
                let g = sample::random_block_upper_unit(f, 8, 8 / m, &mut rng);
                let bf = ball_factorization(&g, m).unwrap();
                assert!(bf.verify());
                for w in &bf.witnesses {
                    for _ in 0..5 {
                        let x = w.sample(&mut rng);
                        assert!(w.contains(&x));
                        assert!(rk(&(&x - &Mat::identity(f, 8))) <= bf.bound());
                    }
                }
            }
        }
    }

    #[test]
    fn ball_split_pipeline() {
        let f = gf(5);
        let mut rng = sample::rng(29);
        for _ in 0..20 {
            let g = sample::random_split_unit(f, 6, &mut rng);
            let bf = ball_factorization_split(&g, 3).unwrap();
            assert!(bf.verify());
        }
    }

    #[test]
    fn invertible_approximation_examples() {
        let f = gf(2);
        let a = Mat::from_rows(f, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(invertible_approximation(&a), a);
        assert!(invertible_approximation(&Mat::zero(f, 3)).is_identity());
        let a = Mat::diag(f, &[1, 0]);
        let b = invertible_approximation(&a);
        assert!(b.is_invertible());
        assert_eq!((&b - &a).rank(), 1);
    }

    #[test]
    fn sl_projection_examples() {
        let f3 = gf(3);
        let b = sl_projection(&Mat::diag(f3, &[2, 1])).unwrap();
        assert_eq!(b, Mat::diag(f3, &[2, 2]));
        let t = Mat::from_rows(f3, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(sl_projection(&t).unwrap(), t);
        assert_eq!(sl_projection(&Mat::zero(f3, 2)), Err(Error::NotInvertible));
        let f5 = gf(5);
        let mut rng = sample::rng(3);
        for _ in 0..50 {
            let a = sample::random_unit(f5, 4, &mut rng);
            let b = sl_projection(&a).unwrap();
            assert_eq!(b.det(), 1);
            assert!(dist(&a, &b).unwrap() <= RankValue::new(1, 4));
        }
    }

    #[test]
    fn tower_examples() {
        let f = gf(2);
        let id = TowerElem::new(Mat::identity(f, 2)).unwrap();
        let up = tower_embed(&id);
        assert_eq!((up.level(), up.mat().is_identity()), (2, true));
        let a = TowerElem::new(Mat::diag(f, &[1, 0])).unwrap();
        let up = tower_embed(&a);
        assert_eq!(up.mat().rank(), 2);
        assert_eq!(rk(up.mat()), rk(a.mat()));
        assert!(TowerElem::new(Mat::identity(f, 3)).is_err());
        let mut rng = sample::rng(4);
        for _ in 0..20 {
            let x = TowerElem::new(sample::random_mat(f, 4, &mut rng)).unwrap();
            let y = TowerElem::new(sample::random_mat(f, 4, &mut rng)).unwrap();
            assert_eq!(
                dist(tower_embed(&x).mat(), tower_embed(&y).mat()).unwrap(),
                dist(x.mat(), y.mat()).unwrap()
            );
        }
    }

    #[test]
    fn density_examples() {
        let f = gf(2);
        let mut rng = sample::rng(8);
        let a = TowerElem::new(sample::random_unit(f, 2, &mut rng)).unwrap();
        let g = tower_embed(&a);
        let r = tower_unit_density(&g, &a).unwrap();
        assert_eq!(&r.h, g.mat());
        assert!(r.trace.dist_g_h.is_zero());
        let mut pert = g.mat().clone();
        pert.set(0, 3, 1 - pert.get(0, 3));
        if pert.is_invertible() {
            let gp = TowerElem::new(pert).unwrap();
            let r = tower_unit_density(&gp, &a).unwrap();
            assert!(r.trace.bound && r.trace.triangle);
        }
        for _ in 0..50 {
            let g = TowerElem::new(sample::random_unit(f, 4, &mut rng)).unwrap();
            let a = TowerElem::new(sample::random_mat(f, 2, &mut rng)).unwrap();
            let r = tower_unit_density(&g, &a).unwrap();
            assert!(r.h.is_invertible());
            assert!(r.trace.bound && r.trace.triangle && r.trace.approximation);
        }
    }
}
