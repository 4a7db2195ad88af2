//! Independent oracles shared by the integration tests.
//!
//! Nothing here goes through the FFT path: products, spectra and functions
//! are computed on the block-circulant unfolding or by direct summation.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use tprod_core::{DenseTensor3, TensorShape};

pub type CMat = DMatrix<Complex64>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_tensor(m: usize, n: usize, p: usize, rng: &mut StdRng) -> DenseTensor3 {
    let shape = TensorShape::new(m, n, p).unwrap();
    DenseTensor3::from_fn(shape, |_, _, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_real_tensor(m: usize, n: usize, p: usize, rng: &mut StdRng) -> DenseTensor3 {
    let shape = TensorShape::new(m, n, p).unwrap();
    DenseTensor3::from_real_fn(shape, |_, _, _| rng.sample(StandardNormal))
}

/// `(b + b^H) / 2` written out entrywise: `b^H(i,j,k) = conj(b(j,i,-k mod p))`.
pub fn random_hermitian(m: usize, p: usize, rng: &mut StdRng) -> DenseTensor3 {
    let b = random_tensor(m, m, p, rng);
    let shape = TensorShape::square(m, p).unwrap();
    DenseTensor3::from_fn(shape, |i, j, k| 0.5 * (b.at(i, j, k) + b.at(j, i, (p - k) % p).conj()))
}

/// Spatial slices of `a` as matrices.
pub fn slices(a: &DenseTensor3) -> Vec<CMat> {
    let TensorShape { m, n, p } = a.shape();
    (0..p).map(|k| CMat::from_fn(m, n, |i, j| a.at(i, j, k))).collect()
}

pub fn from_slices(s: &[CMat]) -> DenseTensor3 {
    let (m, n) = s[0].shape();
    let shape = TensorShape::new(m, n, s.len()).unwrap();
    DenseTensor3::from_fn(shape, |i, j, k| s[k][(i, j)])
}

fn omega(p: usize, e: i64) -> Complex64 {
    let angle = -2.0 * std::f64::consts::PI * (e.rem_euclid(p as i64) as f64) / p as f64;
    Complex64::from_polar(1.0, angle)
}

/// `F_k = sum_s A_s w^(sk)`, `w = exp(-2 pi i / p)`, by direct summation.
pub fn naive_dft(a: &DenseTensor3) -> Vec<CMat> {
    let s = slices(a);
    let p = s.len();
    let (m, n) = s[0].shape();
    (0..p)
        .map(|k| {
            let mut acc = CMat::zeros(m, n);
            for (l, sl) in s.iter().enumerate() {
                acc += sl * omega(p, (l * k) as i64);
            }
            acc
        })
        .collect()
}

pub fn naive_idft(f: &[CMat]) -> DenseTensor3 {
    let p = f.len();
    let (m, n) = f[0].shape();
    let out: Vec<CMat> = (0..p)
        .map(|s| {
            let mut acc = CMat::zeros(m, n);
            for (k, fk) in f.iter().enumerate() {
                acc += fk * omega(p, -((s * k) as i64));
            }
            acc / c(p as f64, 0.0)
        })
        .collect();
    from_slices(&out)
}

/// Circular convolution along tubes: `C_k = sum_l A_l B_{k-l}`.
pub fn naive_t_product(a: &DenseTensor3, b: &DenseTensor3) -> DenseTensor3 {
    let (sa, sb) = (slices(a), slices(b));
    let p = sa.len();
    let out: Vec<CMat> = (0..p)
        .map(|k| {
            let mut acc = CMat::zeros(sa[0].nrows(), sb[0].ncols());
            for l in 0..p {
                acc += &sa[l] * &sb[(k + p - l) % p];
            }
            acc
        })
        .collect();
    from_slices(&out)
}

/// Block-circulant matrix: block `(r, s)` is `A_{(r - s) mod p}`.
pub fn bcirc(a: &DenseTensor3) -> CMat {
    let TensorShape { m, n, p } = a.shape();
    let s = slices(a);
    let mut out = CMat::zeros(m * p, n * p);
    for r in 0..p {
        for col in 0..p {
            out.view_mut((r * m, col * n), (m, n)).copy_from(&s[(r + p - col) % p]);
        }
    }
    out
}

/// Stacks the frontal slices vertically.
pub fn unfold(a: &DenseTensor3) -> CMat {
    let TensorShape { m, n, p } = a.shape();
    CMat::from_fn(m * p, n, |r, j| a.at(r % m, j, r / m))
}

pub fn fold(u: &CMat, m: usize, p: usize) -> DenseTensor3 {
    let shape = TensorShape::new(m, u.ncols(), p).unwrap();
    DenseTensor3::from_fn(shape, |i, j, k| u[(k * m + i, j)])
}

pub fn bcirc_product(a: &DenseTensor3, b: &DenseTensor3) -> DenseTensor3 {
    fold(&(bcirc(a) * unfold(b)), a.m(), a.p())
}

/// First block column of a block-circulant matrix, folded back.
pub fn fold_bcirc(mat: &CMat, m: usize, p: usize) -> DenseTensor3 {
    let n = mat.ncols() / p;
    fold(&mat.columns(0, n).into_owned(), m, p)
}

pub fn hermitian_part(mat: &CMat) -> CMat {
    (mat + mat.adjoint()) * c(0.5, 0.0)
}

/// Sorted eigenvalues of the Hermitian unfolding.
pub fn bcirc_eigs(a: &DenseTensor3) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(&bcirc(a)).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn bcirc_norm(a: &DenseTensor3) -> f64 {
    bcirc(a).singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn bcirc_trace(a: &DenseTensor3) -> Complex64 {
    bcirc(a).trace()
}

/// `exp(a)` by the dense matrix exponential of the unfolding.
pub fn bcirc_expm(a: &DenseTensor3) -> DenseTensor3 {
    fold_bcirc(&bcirc(a).exp(), a.m(), a.p())
}

/// Eigenvalues of each transform slice, from the naive DFT.
pub fn slice_eigs(a: &DenseTensor3) -> Vec<Vec<f64>> {
    naive_dft(a)
        .iter()
        .map(|s| {
            let mut v: Vec<f64> = hermitian_part(s).symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect()
}

/// Singular values of each transform slice, from the naive DFT.
pub fn slice_svals(a: &DenseTensor3) -> Vec<Vec<f64>> {
    naive_dft(a)
        .iter()
        .map(|s| s.singular_values().iter().copied().collect())
        .collect()
}

pub fn rel_diff(x: &DenseTensor3, y: &DenseTensor3) -> f64 {
    let num: f64 = x.data().iter().zip(y.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = y.data().iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(1.0)
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Two-sample Kolmogorov-Smirnov statistic and its critical value at `alpha = 0.01`.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let crit = 1.628 * ((n + m) as f64 / (n * m) as f64).sqrt();
    (d, crit)
}

/// All `2^n` sign vectors.
pub fn sign_patterns(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1u64 << n).map(move |mask| (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
}

/// Standard normal upper tail via the complementary error function.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
