//! Dense third-order complex tensors and the T-product.
//!
//! A tensor of shape `m x n x p` is stored as `p` frontal slices of size
//! `m x n`. The T-product block-diagonalises under the discrete Fourier
//! transform along the tube (third) dimension, so products and all spectral
//! work are carried out slice by slice on a [`TransformedTensor`].
//!
//! Indices in this API are zero-based. The forward transform is
//! unnormalised (`w = exp(-2 pi i / p)`) and the inverse carries the `1/p`.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorShape {
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl TensorShape {
    pub fn new(m: usize, n: usize, p: usize) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::InvalidShape { m, n, p });
        }
        Ok(Self { m, n, p })
    }

    pub fn square(m: usize, p: usize) -> Result<Self> {
        Self::new(m, m, p)
    }

    pub fn len(&self) -> usize {
        self.m * self.n * self.p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_square(&self) -> bool {
        self.m == self.n
    }

    pub fn transposed(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            p: self.p,
        }
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.p)
    }
}

/// Complex `m x n x p` tensor. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor3 {
    shape: TensorShape,
    // slice-major, row-major within a slice: ((k * m) + i) * n + j
    data: Vec<Complex64>,
}

impl DenseTensor3 {
    pub fn new(shape: TensorShape, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                actual: data.len(),
            });
        }
        let t = Self { shape, data };
        t.ensure_finite()?;
        Ok(t)
    }

    pub fn zeros(shape: TensorShape) -> Self {
        Self {
            shape,
            data: vec![ZERO; shape.len()],
        }
    }

    /// Builds a tensor from `f(i, j, k)`. Panics if `f` yields a non-finite value.
    pub fn from_fn(shape: TensorShape, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(shape.len());
        for k in 0..shape.p {
            for i in 0..shape.m {
                for j in 0..shape.n {
                    data.push(f(i, j, k));
                }
            }
        }
        let t = Self { shape, data };
        if let Err(e) = t.ensure_finite() {
            panic!("from_fn produced {e}");
        }
        t
    }

    pub fn from_real_fn(shape: TensorShape, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        Self::from_fn(shape, |i, j, k| Complex64::new(f(i, j, k), 0.0))
    }

    pub fn from_frontal_slices(slices: &[Matrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::invalid("at least one frontal slice is required"))?;
        let shape = TensorShape::new(first.nrows(), first.ncols(), slices.len())?;
        let mut data = Vec::with_capacity(shape.len());
        for (k, s) in slices.iter().enumerate() {
            if s.shape() != (shape.m, shape.n) {
                return Err(Error::ShapeMismatch {
                    op: "from_frontal_slices",
                    left: shape,
                    right: TensorShape {
                        m: s.nrows(),
                        n: s.ncols(),
                        p: k + 1,
                    },
                });
            }
            for i in 0..shape.m {
                for j in 0..shape.n {
                    data.push(s[(i, j)]);
                }
            }
        }
        Self::new(shape, data)
    }

    /// Tensor whose first frontal slice is `slice` and whose other slices are zero.
    /// Every transform slice of the result equals `slice`.
    pub fn from_first_slice(slice: &Matrix, p: usize) -> Result<Self> {
        let shape = TensorShape::new(slice.nrows(), slice.ncols(), p)?;
        let mut t = Self::zeros(shape);
        for i in 0..shape.m {
            for j in 0..shape.n {
                t.data[i * shape.n + j] = slice[(i, j)];
            }
        }
        t.ensure_finite()?;
        Ok(t)
    }

    fn ensure_finite(&self) -> Result<()> {
        if let Some(pos) = self
            .data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            let (i, j, k) = self.unravel(pos);
            return Err(Error::NonFinite { i, j, k });
        }
        Ok(())
    }

    fn unravel(&self, pos: usize) -> (usize, usize, usize) {
        let TensorShape { m, n, .. } = self.shape;
        (pos / n % m, pos % n, pos / (m * n))
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape.m + i) * self.shape.n + j
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn m(&self) -> usize {
        self.shape.m
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn p(&self) -> usize {
        self.shape.p
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Option<Complex64> {
        (i < self.shape.m && j < self.shape.n && k < self.shape.p)
            .then(|| self.data[self.offset(i, j, k)])
    }

    /// Entry access; panics when out of range.
    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.get(i, j, k)
            .unwrap_or_else(|| panic!("index ({i}, {j}, {k}) outside {}", self.shape))
    }

    pub fn frontal_slice(&self, k: usize) -> Matrix {
        let TensorShape { m, n, .. } = self.shape;
        let start = k * m * n;
        Matrix::from_row_slice(m, n, &self.data[start..start + m * n])
    }

    pub fn frontal_slices(&self) -> Vec<Matrix> {
        (0..self.shape.p).map(|k| self.frontal_slice(k)).collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape("max_abs_diff", other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Frobenius distance relative to `max(1, ||self||_F)`.
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        self.same_shape("relative_distance", other)?;
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(diff / self.frobenius_norm().max(1.0))
    }

    fn same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape,
                right: other.shape,
            });
        }
        Ok(())
    }

    fn zip_with(&self, op: &'static str, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.same_shape(op, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.shape, data)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with("hadamard", other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            shape: self.shape,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn neg(&self) -> Self {
        self.scale_real(-1.0)
    }

    /// Sum of equally shaped tensors; `None` for an empty iterator.
    pub fn sum<'a>(mut items: impl Iterator<Item = &'a DenseTensor3>) -> Result<Option<Self>> {
        let Some(first) = items.next() else {
            return Ok(None);
        };
        let mut acc = first.clone();
        for t in items {
            acc.same_shape("sum", t)?;
            for (a, b) in acc.data.iter_mut().zip(&t.data) {
                *a += b;
            }
        }
        Ok(Some(acc))
    }

    /// `sum_i c_i t_i` over equally shaped tensors.
    pub fn linear_combination(coeffs: &[f64], tensors: &[DenseTensor3]) -> Result<Self> {
        if coeffs.len() != tensors.len() {
            return Err(Error::LengthMismatch {
                expected: tensors.len(),
                actual: coeffs.len(),
            });
        }
        let first = tensors
            .first()
            .ok_or_else(|| Error::invalid("linear combination of no tensors"))?;
        let mut acc = Self::zeros(first.shape);
        for (c, t) in coeffs.iter().zip(tensors) {
            acc.same_shape("linear_combination", t)?;
            if *c == 0.0 {
                continue;
            }
            for (a, b) in acc.data.iter_mut().zip(&t.data) {
                *a += b * c;
            }
        }
        Ok(acc)
    }

    /// Conjugate T-transpose: slice 0 is conjugate-transposed in place, slices
    /// 1..p are conjugate-transposed and written in reverse order.
    pub fn conj_transpose(&self) -> Self {
        let TensorShape { m, n, p } = self.shape;
        let shape = self.shape.transposed();
        Self::from_fn(shape, |i, j, k| {
            let src = (p - k) % p;
            self.data[(src * m + j) * n + i].conj()
        })
    }

    pub fn transform(&self) -> TransformedTensor {
        dft_along_tubes(self)
    }

    pub fn t_product(&self, other: &Self) -> Result<Self> {
        t_product(self, other)
    }

    /// `self^k` under the T-product; `k = 0` gives the identity.
    pub fn t_power(&self, k: u32) -> Result<Self> {
        if !self.shape.is_square() {
            return Err(Error::NotSquare {
                op: "t_power",
                shape: self.shape,
            });
        }
        let tt = self.transform();
        let slices = tt
            .slices
            .iter()
            .map(|s| {
                let mut acc = Matrix::identity(s.nrows(), s.ncols());
                for _ in 0..k {
                    acc = &acc * s;
                }
                acc
            })
            .collect();
        Ok(TransformedTensor::from_slices(slices)?.inverse())
    }

    /// Trace as the sum of the traces of all transform slices, which equals
    /// `p * sum_i a(i, i, 0)`.
    pub fn trace(&self) -> Result<Complex64> {
        if !self.shape.is_square() {
            return Err(Error::NotSquare {
                op: "trace",
                shape: self.shape,
            });
        }
        let diag: Complex64 = (0..self.shape.m).map(|i| self.data[i * self.shape.n + i]).sum();
        Ok(diag * self.shape.p as f64)
    }

    /// Hermitian dilation `[[O, c], [c^H, O]]` of shape `(m+n) x (m+n) x p`.
    pub fn dilation(&self) -> Self {
        let TensorShape { m, n, p } = self.shape;
        let h = self.conj_transpose();
        let shape = TensorShape {
            m: m + n,
            n: m + n,
            p,
        };
        Self::from_fn(shape, |i, j, k| {
            if i < m && j >= m {
                self.at(i, j - m, k)
            } else if i >= m && j < m {
                h.at(i - m, j, k)
            } else {
                ZERO
            }
        })
    }
}

/// T-product identity: identity first frontal slice, zeros elsewhere.
pub fn identity(m: usize, p: usize) -> Result<DenseTensor3> {
    DenseTensor3::from_first_slice(&Matrix::identity(m, m), p)
}

/// `fdiag(values)`: diagonal first frontal slice, zeros elsewhere.
pub fn fdiag(values: &[f64], p: usize) -> Result<DenseTensor3> {
    if values.is_empty() {
        return Err(Error::invalid("fdiag needs at least one value"));
    }
    let diag = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    DenseTensor3::from_first_slice(&diag, p)
}

/// Tensor with a single unit entry at `(i, j, k)`.
pub fn basis_tensor(i: usize, j: usize, k: usize, shape: TensorShape) -> Result<DenseTensor3> {
    if i >= shape.m || j >= shape.n || k >= shape.p {
        return Err(Error::IndexOutOfRange { i, j, k, shape });
    }
    Ok(DenseTensor3::from_fn(shape, |a, b, c| {
        if (a, b, c) == (i, j, k) {
            ONE
        } else {
            ZERO
        }
    }))
}

pub fn hadamard(a: &DenseTensor3, b: &DenseTensor3) -> Result<DenseTensor3> {
    a.hadamard(b)
}

pub fn dilation(c: &DenseTensor3) -> DenseTensor3 {
    c.dilation()
}

pub fn conj_transpose(a: &DenseTensor3) -> DenseTensor3 {
    a.conj_transpose()
}

pub fn trace(a: &DenseTensor3) -> Result<Complex64> {
    a.trace()
}

/// The tensor as `p` transform-domain frontal slices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedTensor {
    shape: TensorShape,
    slices: Vec<Matrix>,
}

impl TransformedTensor {
    pub fn from_slices(slices: Vec<Matrix>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::invalid("at least one transform slice is required"))?;
        let shape = TensorShape::new(first.nrows(), first.ncols(), slices.len())?;
        if let Some(bad) = slices.iter().find(|s| s.shape() != (shape.m, shape.n)) {
            return Err(Error::ShapeMismatch {
                op: "TransformedTensor::from_slices",
                left: shape,
                right: TensorShape {
                    m: bad.nrows(),
                    n: bad.ncols(),
                    p: slices.len(),
                },
            });
        }
        Ok(Self { shape, slices })
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn slices(&self) -> &[Matrix] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Matrix> {
        self.slices
    }

    pub fn inverse(&self) -> DenseTensor3 {
        inverse_dft(self)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(p: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|pl| {
        let mut pl = pl.borrow_mut();
        if inverse {
            pl.plan_fft_inverse(p)
        } else {
            pl.plan_fft_forward(p)
        }
    })
}

/// Forward DFT of every tube: `slice[k] = sum_s a[:, :, s] w^(s k)`.
pub fn dft_along_tubes(t: &DenseTensor3) -> TransformedTensor {
    let TensorShape { m, n, p } = t.shape;
    let mut slices = vec![Matrix::zeros(m, n); p];
    if p == 1 {
        slices[0] = t.frontal_slice(0);
        return TransformedTensor { shape: t.shape, slices };
    }
    let fft = plan(p, false);
    let mut tube = vec![ZERO; p];
    for i in 0..m {
        for j in 0..n {
            for (k, z) in tube.iter_mut().enumerate() {
                *z = t.data[t.offset(i, j, k)];
            }
            fft.process(&mut tube);
            for (k, z) in tube.iter().enumerate() {
                slices[k][(i, j)] = *z;
            }
        }
    }
    TransformedTensor { shape: t.shape, slices }
}

pub fn inverse_dft(tt: &TransformedTensor) -> DenseTensor3 {
    let TensorShape { m, n, p } = tt.shape;
    if p == 1 {
        return DenseTensor3 {
            shape: tt.shape,
            data: (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| tt.slices[0][(i, j)]).collect(),
        };
    }
    let fft = plan(p, true);
    let scale = 1.0 / p as f64;
    let mut out = DenseTensor3::zeros(tt.shape);
    let mut tube = vec![ZERO; p];
    for i in 0..m {
        for j in 0..n {
            for (k, z) in tube.iter_mut().enumerate() {
                *z = tt.slices[k][(i, j)];
            }
            fft.process(&mut tube);
            for (k, z) in tube.iter().enumerate() {
                let off = out.offset(i, j, k);
                out.data[off] = z * scale;
            }
        }
    }
    out
}

/// T-product of `m x n x p` and `n x q x p` tensors.
pub fn t_product(a: &DenseTensor3, b: &DenseTensor3) -> Result<DenseTensor3> {
    if a.shape.n != b.shape.m || a.shape.p != b.shape.p {
        return Err(Error::ShapeMismatch {
            op: "t_product",
            left: a.shape,
            right: b.shape,
        });
    }
    let (ta, tb) = (a.transform(), b.transform());
    let slices = ta.slices.iter().zip(&tb.slices).map(|(x, y)| x * y).collect();
    Ok(TransformedTensor::from_slices(slices)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample(shape: TensorShape, seed: u64) -> DenseTensor3 {
        // small deterministic LCG, enough for structural tests
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        DenseTensor3::from_fn(shape, |_, _, _| Complex64::new(next(), next()))
    }

    #[test]
    fn shape_rejects_zero_dimension() {
        assert!(TensorShape::new(0, 2, 2).is_err());
        assert!(TensorShape::new(2, 2, 0).is_err());
    }

    #[test]
    fn construction_rejects_non_finite() {
        let shape = TensorShape::new(1, 2, 1).unwrap();
        let err = DenseTensor3::new(shape, vec![c(1.0), c(f64::NAN)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { i: 0, j: 1, k: 0 }));
        assert!(matches!(
            DenseTensor3::new(shape, vec![c(1.0)]),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn length_one_transform_is_identity() {
        let t = sample(TensorShape::new(2, 3, 1).unwrap(), 1);
        let tt = t.transform();
        assert_eq!(tt.slices()[0], t.frontal_slice(0));
    }

    #[test]
    fn constant_tubes_transform_to_first_slice() {
        let m = Matrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(-1.0), c(0.5)]);
        let t = DenseTensor3::from_frontal_slices(&[m.clone(), m.clone(), m.clone(), m.clone()]).unwrap();
        let tt = t.transform();
        assert!((&tt.slices()[0] - m.scale(4.0)).norm() < 1e-14);
        for s in &tt.slices()[1..] {
            assert!(s.norm() < 1e-14);
        }
    }

    #[test]
    fn transform_round_trip() {
        let t = sample(TensorShape::new(3, 2, 5).unwrap(), 7);
        let back = t.transform().inverse();
        assert!(back.relative_distance(&t).unwrap() < 1e-12);
        let zero = TransformedTensor::from_slices(vec![Matrix::zeros(2, 2); 3]).unwrap();
        assert_eq!(zero.inverse(), DenseTensor3::zeros(TensorShape::new(2, 2, 3).unwrap()));
    }

    #[test]
    fn real_tensor_has_conjugate_symmetric_slices() {
        let shape = TensorShape::new(2, 3, 5).unwrap();
        let t = DenseTensor3::from_fn(shape, |i, j, k| c((i + 2 * j) as f64 - 0.7 * k as f64));
        let tt = t.transform();
        for k in 1..5 {
            let mirror = tt.slices()[5 - k].map(|z| z.conj());
            assert!((&tt.slices()[k] - mirror).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_is_neutral() {
        let a = sample(TensorShape::new(3, 2, 4).unwrap(), 3);
        let left = identity(3, 4).unwrap().t_product(&a).unwrap();
        let right = a.t_product(&identity(2, 4).unwrap()).unwrap();
        assert!(left.relative_distance(&a).unwrap() < 1e-12);
        assert!(right.relative_distance(&a).unwrap() < 1e-12);
        let id = identity(2, 1).unwrap();
        assert_eq!(id.frontal_slice(0), Matrix::identity(2, 2));
    }

    #[test]
    fn p1_product_is_matrix_product() {
        let a = sample(TensorShape::new(2, 3, 1).unwrap(), 11);
        let b = sample(TensorShape::new(3, 4, 1).unwrap(), 12);
        let prod = a.t_product(&b).unwrap();
        let expect = a.frontal_slice(0) * b.frontal_slice(0);
        assert!((prod.frontal_slice(0) - expect).norm() < 1e-13);
    }

    #[test]
    fn product_shape_mismatch_names_both_shapes() {
        let a = sample(TensorShape::new(2, 3, 2).unwrap(), 1);
        let b = sample(TensorShape::new(2, 3, 2).unwrap(), 2);
        let msg = a.t_product(&b).unwrap_err().to_string();
        assert!(msg.contains("2x3x2") && msg.contains("t_product"), "{msg}");
        let d = sample(TensorShape::new(3, 3, 3).unwrap(), 2);
        assert!(a.t_product(&d).is_err());
    }

    #[test]
    fn conj_transpose_is_involution_and_antihomomorphism() {
        let a = sample(TensorShape::new(3, 2, 5).unwrap(), 5);
        assert_eq!(a.conj_transpose().conj_transpose(), a);
        let b = sample(TensorShape::new(2, 4, 5).unwrap(), 6);
        let lhs = a.t_product(&b).unwrap().conj_transpose();
        let rhs = b.conj_transpose().t_product(&a.conj_transpose()).unwrap();
        assert!(lhs.relative_distance(&rhs).unwrap() < 1e-12);
        // transform slices are conjugate transposes
        let (ta, th) = (a.transform(), a.conj_transpose().transform());
        for (x, y) in ta.slices().iter().zip(th.slices()) {
            assert!((x.adjoint() - y).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_real_slice_is_self_adjoint_at_p1() {
        let m = Matrix::from_row_slice(2, 2, &[c(1.0), c(3.0), c(3.0), c(-2.0)]);
        let t = DenseTensor3::from_first_slice(&m, 1).unwrap();
        assert_eq!(t.conj_transpose(), t);
    }

    #[test]
    fn trace_definitions_agree() {
        assert_eq!(identity(3, 4).unwrap().trace().unwrap(), c(12.0));
        let z = DenseTensor3::zeros(TensorShape::new(2, 2, 3).unwrap());
        assert_eq!(z.trace().unwrap(), c(0.0));
        let a = sample(TensorShape::new(3, 3, 4).unwrap(), 9);
        let slice_sum: Complex64 = a.transform().slices().iter().map(|s| s.trace()).sum();
        assert!((a.trace().unwrap() - slice_sum).norm() < 1e-12);
        assert!(sample(TensorShape::new(2, 3, 1).unwrap(), 1).trace().is_err());
    }

    #[test]
    fn trace_is_cyclic() {
        let a = sample(TensorShape::new(2, 3, 4).unwrap(), 21);
        let b = sample(TensorShape::new(3, 2, 4).unwrap(), 22);
        let ab = a.t_product(&b).unwrap().trace().unwrap();
        let ba = b.t_product(&a).unwrap().trace().unwrap();
        assert!((ab - ba).norm() < 1e-10 * ab.norm().max(1.0));
    }

    #[test]
    fn dilation_structure() {
        let cten = sample(TensorShape::new(2, 3, 2).unwrap(), 4);
        let d = cten.dilation();
        assert_eq!(d.shape(), TensorShape::new(5, 5, 2).unwrap());
        assert!(d.relative_distance(&d.conj_transpose()).unwrap() < 1e-15);
        let z = DenseTensor3::zeros(TensorShape::new(2, 3, 2).unwrap());
        assert_eq!(z.dilation(), DenseTensor3::zeros(TensorShape::new(5, 5, 2).unwrap()));
    }

    #[test]
    fn hadamard_identities() {
        let a = sample(TensorShape::new(2, 2, 3).unwrap(), 8);
        let ones = DenseTensor3::from_fn(a.shape(), |_, _, _| c(1.0));
        assert_eq!(a.hadamard(&ones).unwrap(), a);
        let zero = DenseTensor3::zeros(a.shape());
        assert_eq!(a.hadamard(&zero).unwrap(), zero);
        let b = sample(TensorShape::new(2, 3, 3).unwrap(), 8);
        assert!(matches!(a.hadamard(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn fdiag_and_basis() {
        let ones = fdiag(&[1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(ones, identity(3, 2).unwrap());
        let shape = TensorShape::new(2, 2, 3).unwrap();
        let e = basis_tensor(0, 0, 0, shape).unwrap();
        assert_eq!(e.trace().unwrap(), c(3.0));
        assert!(matches!(
            basis_tensor(2, 0, 0, shape),
            Err(Error::IndexOutOfRange { .. })
        ));
        let s1 = TensorShape::new(2, 2, 1).unwrap();
        let prod = basis_tensor(0, 1, 0, s1)
            .unwrap()
            .t_product(&basis_tensor(1, 0, 0, s1).unwrap())
            .unwrap();
        assert!(prod.relative_distance(&basis_tensor(0, 0, 0, s1).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn basis_expansion_reconstructs() {
        let shape = TensorShape::new(2, 3, 2).unwrap();
        let a = sample(shape, 31);
        let mut acc = DenseTensor3::zeros(shape);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..3 {
                    acc = acc.add(&basis_tensor(i, j, k, shape).unwrap().scale(a.at(i, j, k))).unwrap();
                }
            }
        }
        assert_eq!(acc, a);
    }

    #[test]
    fn t_power_matches_repeated_product() {
        let a = sample(TensorShape::new(2, 2, 3).unwrap(), 41);
        let cube = a.t_product(&a).unwrap().t_product(&a).unwrap();
        assert!(a.t_power(3).unwrap().relative_distance(&cube).unwrap() < 1e-12);
        assert!(a.t_power(0).unwrap().relative_distance(&identity(2, 3).unwrap()).unwrap() < 1e-14);
    }
}
