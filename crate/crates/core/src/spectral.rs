//! Spectral quantities of T-product tensors, all read in the transform domain.

use std::fmt;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor3, Matrix, TensorShape, TransformedTensor};

/// Default Hermitian tolerance, relative to `max(1, ||a||_F)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default Loewner tolerance, relative to `max(1, ||b - a||_F)`.
pub const LOEWNER_TOL: f64 = 1e-10;

/// Real vector with one entry per transform slice. Comparisons are entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigentuple {
    pub values: Vec<f64>,
}

impl Eigentuple {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(value: f64, p: usize) -> Self {
        Self {
            values: vec![value; p],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Entrywise `self >= b`.
    pub fn dominates(&self, b: &[f64]) -> bool {
        self.values.len() == b.len() && self.values.iter().zip(b).all(|(x, y)| x >= y)
    }

    /// Entrywise `self <= b`.
    pub fn dominated_by(&self, b: &[f64]) -> bool {
        self.values.len() == b.len() && self.values.iter().zip(b).all(|(x, y)| x <= y)
    }
}

impl fmt::Display for Eigentuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Per-slice eigendecomposition of a Hermitian tensor.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    shape: TensorShape,
    /// Descending eigenvalues of each transform slice.
    pub values: Vec<Vec<f64>>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: Vec<Matrix>,
}

impl HermitianSpectrum {
    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    pub fn all_values(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[v.len() - 1])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn d_max(&self) -> Eigentuple {
        Eigentuple::new(self.values.iter().map(|v| v[0]).collect())
    }

    pub fn d_min(&self) -> Eigentuple {
        Eigentuple::new(self.values.iter().map(|v| v[v.len() - 1]).collect())
    }

    /// `Tr f(a) = sum of f over all mp eigenvalues`.
    pub fn trace_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.all_values().map(f).sum()
    }

    /// `log Tr exp(a)`, stable for large spectra.
    pub fn log_trace_exp(&self) -> f64 {
        log_sum_exp(self.all_values())
    }

    /// Applies `f` to every eigenvalue and reassembles the transform slices.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> TransformedTensor {
        let slices = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(vals, vecs)| {
                let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::new(f(x), 0.0)));
                let scaled = vecs * Matrix::from_diagonal(&d);
                scaled * vecs.adjoint()
            })
            .collect();
        TransformedTensor::from_slices(slices).expect("spectrum has at least one slice")
    }

    pub fn reconstruct(&self) -> DenseTensor3 {
        self.map(|x| x).inverse()
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + values.map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn ensure_square(op: &'static str, a: &DenseTensor3) -> Result<()> {
    if !a.shape().is_square() {
        return Err(Error::NotSquare { op, shape: a.shape() });
    }
    Ok(())
}

/// Frobenius norm of `a - a^H`.
pub fn hermitian_deviation(a: &DenseTensor3) -> Result<f64> {
    ensure_square("hermitian_deviation", a)?;
    let h = a.conj_transpose();
    Ok(a.data()
        .iter()
        .zip(h.data())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

pub fn is_hermitian(a: &DenseTensor3, tol: f64) -> Result<bool> {
    Ok(hermitian_deviation(a)? <= tol * a.frobenius_norm().max(1.0))
}

pub fn ensure_hermitian(a: &DenseTensor3) -> Result<()> {
    let dev = hermitian_deviation(a)?;
    let tol = HERMITIAN_TOL * a.frobenius_norm().max(1.0);
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: tol,
        });
    }
    Ok(())
}

fn symmetrized(s: &Matrix) -> Matrix {
    (s + s.adjoint()).scale(0.5)
}

fn slice_eigen(s: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(symmetrized(s));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

fn slice_eigenvalues(s: &Matrix) -> Vec<f64> {
    let mut v: Vec<f64> = symmetrized(s).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn eig_hermitian(a: &DenseTensor3) -> Result<HermitianSpectrum> {
    ensure_hermitian(a)?;
    Ok(eig_transformed(&a.transform()))
}

/// Eigendecomposition of transform slices assumed Hermitian (each is symmetrised).
pub fn eig_transformed(tt: &TransformedTensor) -> HermitianSpectrum {
    let (values, vectors) = tt.slices().iter().map(slice_eigen).unzip();
    HermitianSpectrum {
        shape: tt.shape(),
        values,
        vectors,
    }
}

/// Descending eigenvalues per slice, without eigenvectors.
pub fn slice_spectra(a: &DenseTensor3) -> Result<Vec<Vec<f64>>> {
    ensure_hermitian(a)?;
    Ok(a.transform().slices().iter().map(slice_eigenvalues).collect())
}

pub fn lambda_max(a: &DenseTensor3) -> Result<f64> {
    Ok(slice_spectra(a)?
        .iter()
        .map(|v| v[0])
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn lambda_min(a: &DenseTensor3) -> Result<f64> {
    Ok(slice_spectra(a)?
        .iter()
        .map(|v| v[v.len() - 1])
        .fold(f64::INFINITY, f64::min))
}

pub fn d_max(a: &DenseTensor3) -> Result<Eigentuple> {
    Ok(Eigentuple::new(slice_spectra(a)?.iter().map(|v| v[0]).collect()))
}

pub fn d_min(a: &DenseTensor3) -> Result<Eigentuple> {
    Ok(Eigentuple::new(
        slice_spectra(a)?.iter().map(|v| v[v.len() - 1]).collect(),
    ))
}

fn slice_singular_max(s: &Matrix) -> f64 {
    s.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest singular value over all transform slices.
pub fn spectral_norm(a: &DenseTensor3) -> f64 {
    vec_norm(a).max()
}

/// Largest singular value of each transform slice.
pub fn vec_norm(a: &DenseTensor3) -> Eigentuple {
    Eigentuple::new(a.transform().slices().iter().map(slice_singular_max).collect())
}

/// `a = u * s * v^H` with f-diagonal `s`.
#[derive(Debug, Clone)]
pub struct TSvd {
    pub u: DenseTensor3,
    pub s: DenseTensor3,
    pub v: DenseTensor3,
    /// Descending singular values of each transform slice.
    pub singular_values: Vec<Vec<f64>>,
}

impl TSvd {
    pub fn reconstruct(&self) -> Result<DenseTensor3> {
        self.u.t_product(&self.s)?.t_product(&self.v.conj_transpose())
    }
}

/// Extends orthonormal columns `q` (k x r) to a k x k unitary, keeping `q` first.
fn complete_unitary(q: &Matrix) -> Matrix {
    let (k, r) = q.shape();
    if r == k {
        return q.clone();
    }
    let mut aug = Matrix::zeros(k, r + k);
    aug.view_mut((0, 0), (k, r)).copy_from(q);
    aug.view_mut((0, r), (k, k)).copy_from(&Matrix::identity(k, k));
    let mut full = aug.qr().q();
    full.view_mut((0, 0), (k, r)).copy_from(q);
    full
}

pub fn t_svd(a: &DenseTensor3) -> Result<TSvd> {
    let TensorShape { m, n, .. } = a.shape();
    let tt = a.transform();
    let mut us = Vec::with_capacity(tt.slices().len());
    let mut ss = Vec::with_capacity(tt.slices().len());
    let mut vs = Vec::with_capacity(tt.slices().len());
    let mut sv = Vec::with_capacity(tt.slices().len());
    for slice in tt.slices() {
        let svd = slice.clone().svd(true, true);
        let r = svd.singular_values.len();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let u_thin = svd.u.as_ref().expect("requested u");
        let vt_thin = svd.v_t.as_ref().expect("requested v_t");
        let u_cols = Matrix::from_columns(&order.iter().map(|&i| u_thin.column(i)).collect::<Vec<_>>());
        let v_cols = Matrix::from_columns(
            &order
                .iter()
                .map(|&i| vt_thin.row(i).adjoint())
                .collect::<Vec<_>>(),
        );
        let mut s = Matrix::zeros(m, n);
        let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        for (d, &x) in values.iter().enumerate() {
            s[(d, d)] = Complex64::new(x, 0.0);
        }
        us.push(complete_unitary(&u_cols));
        vs.push(complete_unitary(&v_cols));
        ss.push(s);
        sv.push(values);
    }
    Ok(TSvd {
        u: TransformedTensor::from_slices(us)?.inverse(),
        s: TransformedTensor::from_slices(ss)?.inverse(),
        v: TransformedTensor::from_slices(vs)?.inverse(),
        singular_values: sv,
    })
}

/// Real interval on which a scalar function is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
}

impl Domain {
    pub const REAL: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
    };
    pub const POSITIVE: Domain = Domain {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: true,
    };
    pub const NONNEGATIVE: Domain = Domain {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        above && x <= self.hi
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        write!(f, "{open}{}, {}]", self.lo, self.hi)
    }
}

/// Scalar functions lifted to Hermitian tensors by the transfer rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Identity,
    Exp,
    Log,
    Sqrt,
    Cosh,
    Pow(i32),
}

impl SpectralFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SpectralFn::Identity => x,
            SpectralFn::Exp => x.exp(),
            SpectralFn::Log => x.ln(),
            SpectralFn::Sqrt => x.sqrt(),
            SpectralFn::Cosh => x.cosh(),
            SpectralFn::Pow(k) => x.powi(k),
        }
    }

    pub fn domain(&self) -> Domain {
        match *self {
            SpectralFn::Log => Domain::POSITIVE,
            SpectralFn::Sqrt => Domain::NONNEGATIVE,
            SpectralFn::Pow(k) if k < 0 => Domain::POSITIVE,
            _ => Domain::REAL,
        }
    }
}

/// Applies `f` eigenvalue-wise per transform slice.
///
/// Eigenvalues within `1e-12 * max(1, |lambda|_max)` below a closed lower
/// endpoint are clamped onto it; anything further outside is an error.
pub fn tensor_function(a: &DenseTensor3, f: impl Fn(f64) -> f64, domain: Domain) -> Result<DenseTensor3> {
    let spec = eig_hermitian(a)?;
    Ok(apply_on_spectrum(&spec, f, domain)?.inverse())
}

pub fn apply_on_spectrum(
    spec: &HermitianSpectrum,
    f: impl Fn(f64) -> f64,
    domain: Domain,
) -> Result<TransformedTensor> {
    let scale = spec.all_values().map(f64::abs).fold(1.0, f64::max);
    let slack = 1e-12 * scale;
    for (k, vals) in spec.values.iter().enumerate() {
        for &x in vals {
            let clampable = !domain.lo_open && x < domain.lo && x >= domain.lo - slack;
            if !domain.contains(x) && !clampable {
                return Err(Error::OutsideDomain {
                    slice: k,
                    value: x,
                    domain: domain.to_string(),
                });
            }
        }
    }
    Ok(spec.map(|x| f(if !domain.lo_open && x < domain.lo { domain.lo } else { x })))
}

pub fn apply_fn(a: &DenseTensor3, f: SpectralFn) -> Result<DenseTensor3> {
    tensor_function(a, |x| f.eval(x), f.domain())
}

pub fn expm(a: &DenseTensor3) -> Result<DenseTensor3> {
    apply_fn(a, SpectralFn::Exp)
}

pub fn logm(a: &DenseTensor3) -> Result<DenseTensor3> {
    apply_fn(a, SpectralFn::Log)
}

pub fn sqrtm(a: &DenseTensor3) -> Result<DenseTensor3> {
    apply_fn(a, SpectralFn::Sqrt)
}

pub fn coshm(a: &DenseTensor3) -> Result<DenseTensor3> {
    apply_fn(a, SpectralFn::Cosh)
}

/// `lambda_min(b - a) / max(1, ||b - a||_F)`; nonnegative iff `a <= b`.
pub fn loewner_slack(a: &DenseTensor3, b: &DenseTensor3) -> Result<f64> {
    ensure_hermitian(a)?;
    ensure_hermitian(b)?;
    let diff = b.sub(a)?;
    Ok(lambda_min(&diff)? / diff.frobenius_norm().max(1.0))
}

pub fn loewner_leq(a: &DenseTensor3, b: &DenseTensor3, tol: f64) -> Result<bool> {
    Ok(loewner_slack(a, b)? >= -tol)
}

pub fn is_tpsd(a: &DenseTensor3, tol: f64) -> Result<bool> {
    Ok(lambda_min(a)? >= -tol)
}

pub fn is_tpd(a: &DenseTensor3, tol: f64) -> Result<bool> {
    Ok(lambda_min(a)? > tol)
}

/// Outcome of checking `(1/p) lambda_max(e^Y)^p + 1 - 1/p <= Tr(e^Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigentupleCondition {
    pub holds: bool,
    /// `Tr(e^Y) - [(1/p) lambda_max(e^Y)^p + 1 - 1/p]`.
    pub slack: f64,
}

pub fn check_eigentuple_condition(y: &DenseTensor3) -> Result<EigentupleCondition> {
    let spectra = slice_spectra(y)?;
    Ok(eigentuple_condition_from(spectra.iter().flatten().copied(), y.p()))
}

pub(crate) fn eigentuple_condition_from(eigs: impl Iterator<Item = f64> + Clone, p: usize) -> EigentupleCondition {
    let p_f = p as f64;
    let top = eigs.clone().fold(f64::NEG_INFINITY, f64::max);
    let trace: f64 = eigs.map(f64::exp).sum();
    let lhs = (p_f * top).exp() / p_f + 1.0 - 1.0 / p_f;
    let slack = trace - lhs;
    EigentupleCondition {
        holds: slack >= -1e-12 * trace.max(1.0),
        slack,
    }
}
