//! The normalized rank function `rk(a) = rank(a)/n`, the rank metric, the
//! distance to the scalars, and the explicit `1 = sum a_i x b_i`
//! decomposition.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;

/// An exact fraction `num/den`, kept unreduced over the matrix dimension.
///
/// Comparison and equality are by value, so `1/2 == 2/4`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RankValue {
    pub num: u64,
    pub den: u64,
}

impl RankValue {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        RankValue { num, den }
    }

    pub fn zero(den: u64) -> Self {
        Self::new(0, den)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn add(self, o: RankValue) -> RankValue {
        if self.den == o.den {
            RankValue::new(self.num + o.num, self.den)
        } else {
            RankValue::new(self.num * o.den + o.num * self.den, self.den * o.den)
        }
    }

    /// `|self - o|`
    pub fn abs_diff(self, o: RankValue) -> RankValue {
        let (a, b) = (self.num * o.den, o.num * self.den);
        RankValue::new(a.abs_diff(b), self.den * o.den)
    }

    pub fn scale(self, k: u64) -> RankValue {
        RankValue::new(self.num * k, self.den)
    }

    /// Re-express over a denominator that is a multiple of the current one.
    pub fn over(self, den: u64) -> RankValue {
        assert_eq!(den % self.den, 0, "target denominator must be a multiple");
        RankValue::new(self.num * (den / self.den), den)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for RankValue {
    fn eq(&self, o: &Self) -> bool {
        self.num as u128 * o.den as u128 == o.num as u128 * self.den as u128
    }
}

impl Eq for RankValue {}

impl PartialOrd for RankValue {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for RankValue {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.num as u128 * o.den as u128).cmp(&(o.num as u128 * self.den as u128))
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub fn rk(a: &Mat) -> RankValue {
    RankValue::new(a.rank() as u64, a.n() as u64)
}

pub fn dist(a: &Mat, b: &Mat) -> Result<RankValue> {
    a.ensure_compatible(b)?;
    Ok(rk(&(a - b)))
}

/// Distance to the scalars `K = {c I}` with its minimizing `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CenterDistance {
    pub dist: RankValue,
    pub c: u32,
}

/// Computes `min_c rank(a - cI)/n` twice: by scanning every `c` in GF(p)
/// and by scanning only the eigenvalues plus `c = 0`. The two must agree;
/// ties go to the smallest `c`.
pub fn dist_to_center(a: &Mat) -> CenterDistance {
    let exhaustive = center_scan(a, 0..a.field().p());
    let restricted = dist_to_center_restricted(a);
    assert_eq!(
        exhaustive, restricted,
        "exhaustive and eigenvalue-restricted center scans disagree"
    );
    exhaustive
}

/// Exhaustive scan only; the first minimizer wins.
pub fn dist_to_center_exhaustive(a: &Mat) -> CenterDistance {
    center_scan(a, 0..a.field().p())
}

/// Scan over the eigenvalues of `a` together with `c = 0`.
pub fn dist_to_center_restricted(a: &Mat) -> CenterDistance {
    let charpoly = crate::canonical::charpoly(a);
    let mut candidates = charpoly.roots().expect("charpoly is monic");
    if !candidates.contains(&0) {
        candidates.insert(0, 0);
    }
    center_scan(a, candidates.into_iter())
}

fn center_scan(a: &Mat, cs: impl Iterator<Item = u32>) -> CenterDistance {
    let n = a.n();
    let f = a.field();
    let mut best: Option<(usize, u32)> = None;
    for c in cs {
        let r = a.add_scalar(f.neg(c)).rank();
        if best.is_none_or(|(br, _)| r < br) {
            best = Some((r, c));
            if r == 0 {
                break;
            }
        }
    }
    let (r, c) = best.unwrap_or((n, 0));
    CenterDistance {
        dist: RankValue::new(r as u64, n as u64),
        c,
    }
}

/// Result of evaluating the rank-function axioms on concrete inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankAxiomReport {
    pub rk_one: RankValue,
    pub rk_a: RankValue,
    pub rk_b: RankValue,
    pub rk_ab: RankValue,
    pub rk_a_plus_b: RankValue,
    pub rk_e: RankValue,
    pub rk_f: RankValue,
    pub rk_e_plus_f: RankValue,
    /// `rk((e+f) - e)`, evaluated on the comparable pair `e <= e + f`.
    pub rk_difference: RankValue,
    pub unit_normalized: bool,
    pub submultiplicative: bool,
    pub subadditive: bool,
    pub orthogonal_additive: bool,
    pub difference_formula: bool,
}

impl RankAxiomReport {
    pub fn all_hold(&self) -> bool {
        self.unit_normalized
            && self.submultiplicative
            && self.subadditive
            && self.orthogonal_additive
            && self.difference_formula
    }
}

/// Evaluates `rk(1) = 1`, `rk(ab) <= min(rk a, rk b)`, subadditivity,
/// additivity on the orthogonal idempotents `e`, `f`, and
/// `rk(g - e) = rk(g) - rk(e)` for `e <= g := e + f`.
pub fn rank_axiom_suite(a: &Mat, b: &Mat, e: &Mat, f: &Mat) -> Result<RankAxiomReport> {
    a.ensure_compatible(b)?;
    a.ensure_compatible(e)?;
    a.ensure_compatible(f)?;
    let idem = |m: &Mat| &(m * m) == m;
    if !idem(e) || !idem(f) {
        return Err(Error::PreconditionViolation("e and f must be idempotent".into()));
    }
    if !(e * f).is_zero() || !(f * e).is_zero() {
        return Err(Error::PreconditionViolation(
            "e and f must be orthogonal".into(),
        ));
    }
    let one = Mat::identity(a.field(), a.n());
    let (rk_a, rk_b) = (rk(a), rk(b));
    let rk_ab = rk(&(a * b));
    let rk_a_plus_b = rk(&(a + b));
    let (rk_e, rk_f) = (rk(e), rk(f));
    let g = e + f;
    let rk_e_plus_f = rk(&g);
    let rk_difference = rk(&(&g - e));
    let rk_one = rk(&one);
    Ok(RankAxiomReport {
        unit_normalized: rk_one == RankValue::new(1, 1),
        submultiplicative: rk_ab <= rk_a.min(rk_b),
        subadditive: rk_a_plus_b <= rk_a.add(rk_b),
        orthogonal_additive: rk_e_plus_f == rk_e.add(rk_f),
        difference_formula: rk_difference.add(rk_e) == rk_e_plus_f,
        rk_one,
        rk_a,
        rk_b,
        rk_ab,
        rk_a_plus_b,
        rk_e,
        rk_f,
        rk_e_plus_f,
        rk_difference,
    })
}

/// `n x n` permutation matrix of the cyclic shift `e_t -> e_{t+k mod n}`.
fn cyclic_shift(field: crate::field::FieldSpec, n: usize, k: usize) -> Mat {
    let mut m = Mat::zero(field, n);
    for t in 0..n {
        m.set((t + k) % n, t, 1);
    }
    m
}

/// Explicit pairs `(a_i, b_i)` with `sum a_i x b_i = I`.
///
/// With `x = v diag(I_r,0) w`, segment `j` of the diagonal (positions
/// `jr .. min(jr+r, n)`) is produced by the cyclic shift `S_j` by `jr`:
/// `a_j = S_j D_len v^-1`, `b_j = w^-1 S_j^T`, where `D_len` is dropped for
/// full-length segments. Uses the minimal `ceil(n/r)` terms.
pub fn unit_sum_decomposition(x: &Mat, n_terms: usize) -> Result<Vec<(Mat, Mat)>> {
    let n = x.n();
    let field = x.field();
    let df = x.diag_factorize();
    let r = df.r;
    if r == 0 || r * n_terms < n {
        return Err(Error::RankTooSmall {
            rank: r,
            n,
            needed: n.div_ceil(n_terms.max(1)),
        });
    }
    let v_inv = df.v.inverse().expect("v invertible");
    let w_inv = df.w.inverse().expect("w invertible");
    let k = n.div_ceil(r);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let len = r.min(n - j * r);
        let s = cyclic_shift(field, n, j * r);
        let left = if len == r {
            &s * &v_inv
        } else {
            &(&s * &Mat::diag_projection(field, n, len)) * &v_inv
        };
        out.push((left, &w_inv * &s.transpose()));
    }
    Ok(out)
}

/// `sum a_i x b_i`
pub fn evaluate_decomposition(x: &Mat, terms: &[(Mat, Mat)]) -> Mat {
    terms.iter().fold(Mat::zero(x.field(), x.n()), |acc, (a, b)| {
        &acc + &(&(a * x) * b)
    })
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
    fn rk_examples() {
        let f = gf(3);
        assert_eq!(rk(&Mat::identity(f, 4)), RankValue::new(1, 1));
        assert_eq!(rk(&Mat::zero(f, 4)).num, 0);
        let r = rk(&Mat::unit(f, 2, 0, 1));
        assert_eq!((r.num, r.den), (1, 2));
    }

    #[test]
    fn rank_value_compares_by_value() {
        assert_eq!(RankValue::new(1, 2), RankValue::new(2, 4));
        assert!(RankValue::new(1, 3) < RankValue::new(1, 2));
        assert_eq!(
            RankValue::new(1, 4).abs_diff(RankValue::new(1, 2)),
            RankValue::new(1, 4)
        );
        let j = serde_json::to_string(&RankValue::new(2, 4)).unwrap();
        assert_eq!(j, r#"{"num":2,"den":4}"#);
    }

    #[test]
    fn dist_examples() {
        let f = gf(2);
        let a = Mat::diag(f, &[1, 0]);
        assert!(dist(&a, &a).unwrap().is_zero());
        assert_eq!(
            dist(&Mat::identity(f, 2), &a).unwrap(),
            RankValue::new(1, 2)
        );
        assert_eq!(
            dist(&a, &Mat::identity(f, 3)),
            Err(Error::DimensionMismatch(2, 3))
        );
    }

    #[test]
    fn dist_bi_invariant_under_units() {
        let f = gf(5);
        let mut rng = sample::rng(7);
        for _ in 0..50 {
            let a = sample::random_mat(f, 5, &mut rng);
            let b = sample::random_mat(f, 5, &mut rng);
            let g = sample::random_unit(f, 5, &mut rng);
            let d = dist(&a, &b).unwrap();
            assert_eq!(dist(&(&g * &a), &(&g * &b)).unwrap(), d);
            assert_eq!(dist(&(&a * &g), &(&b * &g)).unwrap(), d);
        }
    }

    #[test]
    fn dist_to_center_examples() {
        let f3 = gf(3);
        let s = Mat::scalar(f3, 3, 2);
        assert_eq!(
            dist_to_center(&s),
            CenterDistance {
                dist: RankValue::new(0, 3),
                c: 2
            }
        );
        let f2 = gf(2);
        let comp = Mat::from_rows(f2, &[vec![0, 1], vec![1, 1]]).unwrap();
        let d = dist_to_center(&comp);
        assert_eq!((d.dist.num, d.dist.den, d.c), (2, 2, 0));
        let nil = Mat::from_rows(f3, &[vec![0, 1], vec![0, 0]]).unwrap();
        let d = dist_to_center(&nil);
        assert_eq!((d.dist.num, d.dist.den, d.c), (1, 2, 0));
    }

    #[test]
    fn axiom_suite_examples() {
        let f = gf(2);
        let e = Mat::diag(f, &[1, 0]);
        let ff = Mat::diag(f, &[0, 1]);
        let one = Mat::identity(f, 2);
        let rep = rank_axiom_suite(&one, &e, &e, &ff).unwrap();
        assert!(rep.all_hold());
        assert_eq!(rep.rk_e_plus_f, RankValue::new(1, 1));
        let z = Mat::zero(f, 2);
        let rep = rank_axiom_suite(&one, &one, &z, &one).unwrap();
        assert_eq!(rep.rk_difference, RankValue::new(1, 1));
        assert!(matches!(
            rank_axiom_suite(&one, &one, &e, &e),
            Err(Error::PreconditionViolation(_))
        ));
    }

    #[test]
    fn decomposition_examples() {
        let f = gf(2);
        let one = Mat::identity(f, 2);
        assert_eq!(
            unit_sum_decomposition(&Mat::identity(f, 3), 1).unwrap(),
            vec![(Mat::identity(f, 3), Mat::identity(f, 3))]
        );
        let x = Mat::diag(f, &[1, 0]);
        let swap = Mat::from_rows(f, &[vec![0, 1], vec![1, 0]]).unwrap();
        let terms = unit_sum_decomposition(&x, 2).unwrap();
        assert_eq!(terms, vec![(one.clone(), one.clone()), (swap.clone(), swap)]);
        assert_eq!(evaluate_decomposition(&x, &terms), one);
        let rank1 = Mat::unit(gf(3), 3, 1, 2);
        assert!(matches!(
            unit_sum_decomposition(&rank1, 2),
            Err(Error::RankTooSmall { .. })
        ));
    }

    #[test]
    fn decomposition_with_ragged_last_segment() {
        let f = gf(5);
        let mut rng = sample::rng(3);
        for _ in 0..30 {
            let x = sample::random_idempotent(f, 7, 3, &mut rng);
            let g = sample::random_unit(f, 7, &mut rng);
            let x = &g * &x;
            let terms = unit_sum_decomposition(&x, 3).unwrap();
            assert_eq!(terms.len(), 3);
            assert!(evaluate_decomposition(&x, &terms).is_identity());
        }
    }
}
