//! Seeded random samplers for matrices with prescribed structure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::FieldSpec;
use crate::mat::Mat;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Mat {
    let p = field.p();
    Mat::from_raw(field, n, (0..n * n).map(|_| rng.gen_range(0..p)).collect())
}

/// Uniform over GL_n by rejection.
pub fn random_unit<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Mat {
    loop {
        let m = random_mat(field, n, rng);
        if m.is_invertible() {
            return m;
        }
    }
}

pub fn random_nonzero<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> u32 {
    rng.gen_range(1..field.p())
}

/// Upper-triangular with nonzero diagonal.
pub fn random_upper_unit<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Mat {
    let mut m = Mat::zero(field, n);
    for i in 0..n {
        m.set(i, i, random_nonzero(field, rng));
        for j in i + 1..n {
            m.set(i, j, rng.gen_range(0..field.p()));
        }
    }
    m
}

/// Block upper-triangular unit with diagonal blocks of size `block`.
pub fn random_block_upper_unit<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    block: usize,
    rng: &mut R,
) -> Mat {
    let blocks: Vec<Mat> = (0..n / block)
        .map(|_| random_unit(field, block, rng))
        .collect();
    let mut m = Mat::block_diag(&blocks);
    for i in 0..n {
        for j in 0..n {
            if j / block > i / block {
                m.set(i, j, rng.gen_range(0..field.p()));
            }
        }
    }
    m
}

/// A unit with split characteristic polynomial: a random conjugate of a
/// random upper-triangular unit.
pub fn random_split_unit<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Mat {
    let t = random_upper_unit(field, n, rng);
    let g = random_unit(field, n, rng);
    &(&g * &t) * &g.inverse().expect("unit")
}

/// `g diag(d) g^-1` with a random unit `g`.
pub fn conjugated_diag<R: Rng + ?Sized>(field: FieldSpec, d: &[i64], rng: &mut R) -> Mat {
    let g = random_unit(field, d.len(), rng);
    &(&g * &Mat::diag(field, d)) * &g.inverse().expect("unit")
}

/// A random idempotent of the given rank.
pub fn random_idempotent<R: Rng + ?Sized>(field: FieldSpec, n: usize, rank: usize, rng: &mut R) -> Mat {
    let g = random_unit(field, n, rng);
    &(&g * &Mat::diag_projection(field, n, rank)) * &g.inverse().expect("unit")
}

/// A pair of orthogonal idempotents of the given ranks (`r1 + r2 <= n`).
pub fn random_orthogonal_pair<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    r1: usize,
    r2: usize,
    rng: &mut R,
) -> (Mat, Mat) {
    assert!(r1 + r2 <= n);
    let g = random_unit(field, n, rng);
    let gi = g.inverse().expect("unit");
    let mut d1 = vec![0i64; n];
    let mut d2 = vec![0i64; n];
    d1[..r1].fill(1);
    d2[r1..r1 + r2].fill(1);
    (
        &(&g * &Mat::diag(field, &d1)) * &gi,
        &(&g * &Mat::diag(field, &d2)) * &gi,
    )
}

/// All `p^(n^2)` matrices of M_n(GF(p)) in base-p order.
pub fn all_matrices(field: FieldSpec, n: usize) -> impl Iterator<Item = Mat> {
    let p = field.p() as u64;
    let total = p.pow((n * n) as u32);
    (0..total).map(move |mut code| {
        let mut data = vec![0u32; n * n];
        for slot in data.iter_mut() {
            *slot = (code % p) as u32;
            code /= p;
        }
        Mat::from_raw(field, n, data)
    })
}
