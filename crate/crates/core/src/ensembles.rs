//! Random T-product tensor ensembles with known hypothesis parameters.
//!
//! Each ensemble draws the random tensor whose tail is measured and checks
//! the almost-sure hypotheses of its theorem on every summand it draws.
//! Randomness comes only from an explicit [`TrialRng`], so a seed and a
//! trial index fully determine a draw.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::{hadamard_sigma2, rectangular_sigma2, series_sigma2, HadamardMode};
use crate::error::{Error, Result};
use crate::spectral::{self, ensure_hermitian, SpectralFn, LOEWNER_TOL};
use crate::tensor::{DenseTensor3, Matrix, TensorShape, TransformedTensor};

pub type TrialRng = ChaCha8Rng;

/// Master seed; trial `i` reads stream `i` of a ChaCha8 generator keyed by the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn rng_for_trial(&self, trial: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }

    /// Generator for fixed ensemble structure (eigenbases and the like).
    pub fn construction_rng(&self) -> TrialRng {
        self.rng_for_trial(u64::MAX)
    }
}

/// A random tensor that can be drawn repeatedly.
pub trait Ensemble: Send + Sync {
    /// Shape of the drawn tensor.
    fn shape(&self) -> TensorShape;

    /// One draw. Returns [`Error::Hypothesis`] if a summand violates the
    /// theorem's almost-sure conditions.
    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3>;
}

fn rademacher(rng: &mut TrialRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn hypothesis(context: impl Into<String>, witness: impl Into<String>) -> Error {
    Error::Hypothesis {
        context: context.into(),
        witness: witness.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableKind {
    Gaussian,
    Rademacher,
}

impl std::str::FromStr for VariableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(VariableKind::Gaussian),
            "rademacher" => Ok(VariableKind::Rademacher),
            _ => Err(Error::invalid(format!("unknown variable kind {s:?}"))),
        }
    }
}

impl VariableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableKind::Gaussian => "gaussian",
            VariableKind::Rademacher => "rademacher",
        }
    }

    fn draw(&self, rng: &mut TrialRng) -> f64 {
        match self {
            VariableKind::Gaussian => rng.sample(StandardNormal),
            VariableKind::Rademacher => rademacher(rng),
        }
    }
}

/// `sum_i alpha_i A_i` with fixed coefficients.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    coefficients: Vec<DenseTensor3>,
    kind: VariableKind,
    hermitian: bool,
    sigma2: f64,
}

impl SeriesSpec {
    /// Square Hermitian coefficients; `sigma2 = || sum A_i^2 ||`.
    pub fn hermitian(coefficients: Vec<DenseTensor3>, kind: VariableKind) -> Result<Self> {
        let sigma2 = series_sigma2(&coefficients)?;
        Ok(Self {
            coefficients,
            kind,
            hermitian: true,
            sigma2,
        })
    }

    /// Arbitrary `m x n x p` coefficients; `sigma2` is the larger Gram-sum norm.
    pub fn rectangular(coefficients: Vec<DenseTensor3>, kind: VariableKind) -> Result<Self> {
        let sigma2 = rectangular_sigma2(&coefficients)?;
        Ok(Self {
            coefficients,
            kind,
            hermitian: false,
            sigma2,
        })
    }

    pub fn coefficients(&self) -> &[DenseTensor3] {
        &self.coefficients
    }

    pub fn kind(&self) -> VariableKind {
        self.kind
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn sample_with(&self, alphas: &[f64]) -> Result<DenseTensor3> {
        DenseTensor3::linear_combination(alphas, &self.coefficients)
    }

    pub fn sample_series(&self, rng: &mut TrialRng) -> DenseTensor3 {
        let alphas: Vec<f64> = self.coefficients.iter().map(|_| self.kind.draw(rng)).collect();
        self.sample_with(&alphas).expect("coefficient shapes checked on construction")
    }

    /// All `2^n` equally likely outcomes of a Rademacher series.
    pub fn enumerate(&self) -> Result<FiniteSupportTensorRV> {
        if self.kind != VariableKind::Rademacher {
            return Err(Error::invalid("only Rademacher series have finite support"));
        }
        enumerate_signs(self.coefficients.len(), |signs| self.sample_with(signs))
    }
}

impl Ensemble for SeriesSpec {
    fn shape(&self) -> TensorShape {
        self.coefficients[0].shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        Ok(self.sample_series(rng))
    }
}

fn enumerate_signs(
    n: usize,
    mut f: impl FnMut(&[f64]) -> Result<DenseTensor3>,
) -> Result<FiniteSupportTensorRV> {
    if n > 20 {
        return Err(Error::invalid(format!("2^{n} outcomes is too many to enumerate")));
    }
    let count = 1usize << n;
    let prob = 1.0 / count as f64;
    let mut atoms = Vec::with_capacity(count);
    let mut signs = vec![0.0; n];
    for mask in 0..count {
        for (i, s) in signs.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        atoms.push((f(&signs)?, prob));
    }
    FiniteSupportTensorRV::new(atoms)
}

/// Law of every transform-slice eigenvalue, on `[0, cap]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenLaw {
    /// Point mass at `cap`.
    Degenerate,
    Uniform,
    /// `cap` with probability `q`, else 0.
    Bernoulli(f64),
}

impl EigenLaw {
    fn sample(&self, cap: f64, rng: &mut TrialRng) -> f64 {
        match *self {
            EigenLaw::Degenerate => cap,
            EigenLaw::Uniform => cap * rng.random::<f64>(),
            EigenLaw::Bernoulli(q) => {
                if rng.random_bool(q) {
                    cap
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self, cap: f64) -> f64 {
        match *self {
            EigenLaw::Degenerate => cap,
            EigenLaw::Uniform => cap / 2.0,
            EigenLaw::Bernoulli(q) => q * cap,
        }
    }

    /// `E (lambda - E lambda)^k`.
    pub fn central_moment(&self, cap: f64, k: u32) -> f64 {
        match *self {
            EigenLaw::Degenerate => 0.0,
            EigenLaw::Uniform => {
                if k % 2 == 1 {
                    0.0
                } else {
                    (cap / 2.0).powi(k as i32) / (k + 1) as f64
                }
            }
            EigenLaw::Bernoulli(q) => {
                (1.0 - q) * (-q * cap).powi(k as i32) + q * ((1.0 - q) * cap).powi(k as i32)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let EigenLaw::Bernoulli(q) = self {
            if !(0.0..=1.0).contains(q) {
                return Err(Error::invalid(format!("Bernoulli probability {q} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Random unitary per transform slice: QR of a complex Gaussian matrix.
fn random_unitaries(m: usize, p: usize, rng: &mut TrialRng) -> Vec<Matrix> {
    (0..p)
        .map(|_| {
            let g = Matrix::from_fn(m, m, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            g.qr().q()
        })
        .collect()
}

fn from_eigen(bases: &[Matrix], eigenvalues: &[Vec<f64>]) -> DenseTensor3 {
    let slices = bases
        .iter()
        .zip(eigenvalues)
        .map(|(u, vals)| {
            let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::new(x, 0.0)));
            u * Matrix::from_diagonal(&d) * u.adjoint()
        })
        .collect();
    TransformedTensor::from_slices(slices)
        .expect("at least one slice")
        .inverse()
}

/// Sum of `n_sum` i.i.d. TPSD tensors. Every transform slice is
/// `U_k diag(lambda) U_k^H` with fixed `U_k` and eigenvalue `r` drawn from
/// the law on `[0, T w_r]`.
#[derive(Debug, Clone)]
pub struct BoundedTpsdSpec {
    pub n_sum: usize,
    pub m: usize,
    pub p: usize,
    pub t_cap: f64,
    pub law: EigenLaw,
    weights: Vec<f64>,
    bases: Vec<Matrix>,
    /// Divide the sum by `n_sum`.
    pub average: bool,
}

impl BoundedTpsdSpec {
    pub fn new(n_sum: usize, m: usize, p: usize, t_cap: f64, law: EigenLaw, seed: SeedSpec) -> Result<Self> {
        Self::with_weights(n_sum, m, p, t_cap, law, vec![1.0; m], seed)
    }

    /// `weights` in `[0, 1]` scale the per-index eigenvalue caps.
    pub fn with_weights(
        n_sum: usize,
        m: usize,
        p: usize,
        t_cap: f64,
        law: EigenLaw,
        weights: Vec<f64>,
        seed: SeedSpec,
    ) -> Result<Self> {
        TensorShape::square(m, p)?;
        law.validate()?;
        if n_sum == 0 {
            return Err(Error::invalid("n_sum must be at least 1"));
        }
        if !(t_cap >= 0.0 && t_cap.is_finite()) {
            return Err(Error::invalid(format!("eigenvalue cap {t_cap} must be nonnegative")));
        }
        if weights.len() != m || weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::invalid("weights must have length m and lie in [0, 1]"));
        }
        let bases = random_unitaries(m, p, &mut seed.construction_rng());
        Ok(Self {
            n_sum,
            m,
            p,
            t_cap,
            law,
            weights,
            bases,
            average: false,
        })
    }

    pub fn averaged(mut self) -> Self {
        self.average = true;
        self
    }

    fn caps(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(|w| w * self.t_cap)
    }

    pub fn sample_bounded_tpsd(&self, rng: &mut TrialRng) -> DenseTensor3 {
        let eig: Vec<Vec<f64>> = (0..self.p)
            .map(|_| self.caps().map(|c| self.law.sample(c, rng)).collect())
            .collect();
        from_eigen(&self.bases, &eig)
    }

    /// Exact `E X` of one summand.
    pub fn summand_mean(&self) -> DenseTensor3 {
        let means: Vec<f64> = self.caps().map(|c| self.law.mean(c)).collect();
        from_eigen(&self.bases, &vec![means; self.p])
    }

    /// `lambda_max(sum_i E X_i)`.
    pub fn mu_max(&self) -> f64 {
        self.n_sum as f64 * self.caps().map(|c| self.law.mean(c)).fold(0.0, f64::max)
    }

    /// `lambda_min(sum_i E X_i)`.
    pub fn mu_min(&self) -> f64 {
        self.n_sum as f64 * self.caps().map(|c| self.law.mean(c)).fold(f64::INFINITY, f64::min)
    }

    pub fn mu_bar_max(&self) -> f64 {
        self.mu_max() / self.n_sum as f64
    }

    pub fn mu_bar_min(&self) -> f64 {
        self.mu_min() / self.n_sum as f64
    }

    /// `X >= 0` and `lambda_max(X) <= T`.
    pub fn check_hypotheses(&self, x: &DenseTensor3) -> Result<()> {
        let spec = spectral::eig_hermitian(x)?;
        let tol = 1e-10 * self.t_cap.max(1.0);
        let (lo, hi) = (spec.lambda_min(), spec.lambda_max());
        if lo < -tol || hi > self.t_cap + tol {
            return Err(hypothesis(
                "bounded TPSD summand",
                format!("spectrum [{lo}, {hi}] not inside [0, {}]", self.t_cap),
            ));
        }
        Ok(())
    }
}

impl Ensemble for BoundedTpsdSpec {
    fn shape(&self) -> TensorShape {
        TensorShape {
            m: self.m,
            n: self.m,
            p: self.p,
        }
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        let mut acc = DenseTensor3::zeros(self.shape());
        for _ in 0..self.n_sum {
            let x = self.sample_bounded_tpsd(rng);
            self.check_hypotheses(&x)?;
            acc = acc.add(&x)?;
        }
        Ok(if self.average {
            acc.scale_real(1.0 / self.n_sum as f64)
        } else {
            acc
        })
    }
}

/// Sum of `X_i - E X_i` for a [`BoundedTpsdSpec`] base.
///
/// Each summand has eigenvalues in `[-mu_r, w_r T - mu_r]`, so it is
/// centered with `lambda_max <= T` (bounded Bernstein). With
/// `c = max_r max(mu_r, w_r T - mu_r)` it also satisfies
/// `E X^k <= k! (c/3)^(k-2) E X^2 / 2` for every `k >= 2`, because
/// `3^(k-2) <= k!/2`; this gives the subexponential parameters `T = c/3`
/// and `A^2 = E X^2`.
#[derive(Debug, Clone)]
pub struct CenteredBoundedSpec {
    base: BoundedTpsdSpec,
}

impl CenteredBoundedSpec {
    pub fn new(base: BoundedTpsdSpec) -> Result<Self> {
        let spec = Self { base };
        if !(spec.sigma2() > 0.0) {
            return Err(Error::invalid("centered ensemble has zero variance"));
        }
        Ok(spec)
    }

    pub fn base(&self) -> &BoundedTpsdSpec {
        &self.base
    }

    fn per_index(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.base.caps().map(|c| (c, self.base.law.mean(c)))
    }

    /// `lambda_max` cap of each summand for bounded Bernstein.
    pub fn bounded_t(&self) -> f64 {
        self.base.t_cap
    }

    /// `|| sum_i E X_i^2 ||`.
    pub fn sigma2(&self) -> f64 {
        self.base.n_sum as f64
            * self
                .base
                .caps()
                .map(|c| self.base.law.central_moment(c, 2))
                .fold(0.0, f64::max)
    }

    /// `T` of the subexponential moment condition.
    pub fn subexp_t(&self) -> f64 {
        self.per_index().map(|(c, mu)| mu.max(c - mu)).fold(0.0, f64::max) / 3.0
    }

    /// Largest `E X^k - k! T^(k-2) A^2 / 2` eigenvalue over `k = 2..=k_max`;
    /// nonpositive when the moment condition holds.
    pub fn moment_condition_excess(&self, k_max: u32) -> f64 {
        let t = self.subexp_t();
        let mut worst = f64::NEG_INFINITY;
        for k in 2..=k_max {
            let fact: f64 = (1..=k).map(f64::from).product();
            for c in self.base.caps() {
                let var = self.base.law.central_moment(c, 2);
                let lhs = self.base.law.central_moment(c, k);
                let rhs = fact * t.powi(k as i32 - 2) * var / 2.0;
                worst = worst.max(lhs - rhs);
            }
        }
        worst
    }

    /// Exact `E X^k` of one summand as a tensor.
    pub fn summand_moment(&self, k: u32) -> DenseTensor3 {
        let m: Vec<f64> = self.base.caps().map(|c| self.base.law.central_moment(c, k)).collect();
        from_eigen(&self.base.bases, &vec![m; self.base.p])
    }

    pub fn check_hypotheses(&self, x: &DenseTensor3) -> Result<()> {
        let hi = spectral::lambda_max(x)?;
        if hi > self.bounded_t() + 1e-10 * self.bounded_t().max(1.0) {
            return Err(hypothesis(
                "centered bounded summand",
                format!("lambda_max = {hi} exceeds T = {}", self.bounded_t()),
            ));
        }
        Ok(())
    }
}

impl Ensemble for CenteredBoundedSpec {
    fn shape(&self) -> TensorShape {
        self.base.shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        let mean = self.base.summand_mean();
        let mut acc = DenseTensor3::zeros(self.shape());
        for _ in 0..self.base.n_sum {
            let x = self.base.sample_bounded_tpsd(rng).sub(&mean)?;
            self.check_hypotheses(&x)?;
            acc = acc.add(&x)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    /// `X_i = eps_i A_i` with independent signs.
    Rademacher,
    /// `X_i = eps_i w_i A_i` where `w_i = 1` if `Tr S_(i-1) > 0` and `1/2`
    /// otherwise; `eps_i` is a fresh sign, so `E_(i-1) X_i = 0` and
    /// `X_i^2 = w_i^2 A_i^2 <= A_i^2`.
    Adapted,
}

impl std::str::FromStr for MultiplierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher" => Ok(MultiplierKind::Rademacher),
            "adapted" => Ok(MultiplierKind::Adapted),
            _ => Err(Error::invalid(format!("unknown multiplier kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MartingalePath {
    pub differences: Vec<DenseTensor3>,
    /// `S_0 = 0, S_1, ..., S_n`.
    pub partial_sums: Vec<DenseTensor3>,
}

#[derive(Debug, Clone)]
pub struct MartingaleSpec {
    caps: Vec<DenseTensor3>,
    squares: Vec<DenseTensor3>,
    pub kind: MultiplierKind,
    sigma2: f64,
}

impl MartingaleSpec {
    pub fn new(caps: Vec<DenseTensor3>, kind: MultiplierKind) -> Result<Self> {
        let sigma2 = series_sigma2(&caps)?;
        let squares = caps.iter().map(|a| a.t_product(a)).collect::<Result<_>>()?;
        Ok(Self {
            caps,
            squares,
            kind,
            sigma2,
        })
    }

    pub fn caps(&self) -> &[DenseTensor3] {
        &self.caps
    }

    /// `|| sum A_i^2 ||`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    fn weight(&self, previous: &DenseTensor3) -> f64 {
        match self.kind {
            MultiplierKind::Rademacher => 1.0,
            MultiplierKind::Adapted => {
                let tr = previous.trace().map(|z| z.re).unwrap_or(0.0);
                if tr > 0.0 {
                    1.0
                } else {
                    0.5
                }
            }
        }
    }

    fn path_from_signs(&self, signs: &[f64]) -> Result<MartingalePath> {
        let shape = self.caps[0].shape();
        let mut partial_sums = vec![DenseTensor3::zeros(shape)];
        let mut differences = Vec::with_capacity(self.caps.len());
        for (i, (a, eps)) in self.caps.iter().zip(signs).enumerate() {
            let prev = &partial_sums[i];
            let x = a.scale_real(eps * self.weight(prev));
            let next = prev.add(&x)?;
            differences.push(x);
            partial_sums.push(next);
        }
        Ok(MartingalePath {
            differences,
            partial_sums,
        })
    }

    pub fn sample_martingale_path(&self, rng: &mut TrialRng) -> MartingalePath {
        let signs: Vec<f64> = self.caps.iter().map(|_| rademacher(rng)).collect();
        self.path_from_signs(&signs).expect("cap shapes checked on construction")
    }

    /// `X_i^2 <= A_i^2` for every step.
    pub fn check_hypotheses(&self, path: &MartingalePath) -> Result<()> {
        for (i, (x, a2)) in path.differences.iter().zip(&self.squares).enumerate() {
            let x2 = x.t_product(x)?;
            let slack = spectral::loewner_slack(&x2, a2)?;
            if slack < -LOEWNER_TOL {
                return Err(hypothesis(
                    format!("martingale difference {}", i + 1),
                    format!("lambda_min(A^2 - X^2) = {slack}"),
                ));
            }
        }
        Ok(())
    }

    /// Final value of every one of the `2^n` equally likely sign paths.
    pub fn enumerate(&self) -> Result<FiniteSupportTensorRV> {
        enumerate_signs(self.caps.len(), |signs| {
            Ok(self.path_from_signs(signs)?.partial_sums.pop().expect("nonempty"))
        })
    }
}

impl Ensemble for MartingaleSpec {
    fn shape(&self) -> TensorShape {
        self.caps[0].shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        let mut path = self.sample_martingale_path(rng);
        self.check_hypotheses(&path)?;
        Ok(path.partial_sums.pop().expect("nonempty"))
    }
}

/// `F(x) = sum_i x_i B_i` for independent signs; bounded differences `A_i = 2 B_i`.
#[derive(Debug, Clone)]
pub struct McDiarmidSpec {
    terms: Vec<DenseTensor3>,
    sigma2: f64,
}

impl McDiarmidSpec {
    pub fn new(terms: Vec<DenseTensor3>) -> Result<Self> {
        let doubled: Vec<DenseTensor3> = terms.iter().map(|b| b.scale_real(2.0)).collect();
        let sigma2 = series_sigma2(&doubled)?;
        let spec = Self { terms, sigma2 };
        spec.check_hypotheses()?;
        Ok(spec)
    }

    /// `|| sum A_i^2 ||` with `A_i = 2 B_i`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn terms(&self) -> &[DenseTensor3] {
        &self.terms
    }

    pub fn evaluate(&self, inputs: &[f64]) -> Result<DenseTensor3> {
        DenseTensor3::linear_combination(inputs, &self.terms)
    }

    pub fn sample_mcdiarmid_function(&self, rng: &mut TrialRng) -> (Vec<f64>, DenseTensor3) {
        let inputs: Vec<f64> = self.terms.iter().map(|_| rademacher(rng)).collect();
        let f = self.evaluate(&inputs).expect("term shapes checked on construction");
        (inputs, f)
    }

    /// Flipping input `i` changes `F` by `+-2 B_i`, whose square is `A_i^2`.
    pub fn check_hypotheses(&self) -> Result<()> {
        let n = self.terms.len();
        for i in 0..n {
            let mut x = vec![1.0; n];
            let f1 = self.evaluate(&x)?;
            x[i] = -1.0;
            let diff = f1.sub(&self.evaluate(&x)?)?;
            let a = self.terms[i].scale_real(2.0);
            let slack = spectral::loewner_slack(&diff.t_product(&diff)?, &a.t_product(&a)?)?;
            if slack < -LOEWNER_TOL {
                return Err(hypothesis(format!("bounded difference {}", i + 1), format!("slack {slack}")));
            }
        }
        Ok(())
    }

    pub fn enumerate(&self) -> Result<FiniteSupportTensorRV> {
        enumerate_signs(self.terms.len(), |x| self.evaluate(x))
    }
}

impl Ensemble for McDiarmidSpec {
    fn shape(&self) -> TensorShape {
        self.terms[0].shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        // E F = 0, so F - E F = F
        Ok(self.sample_mcdiarmid_function(rng).1)
    }
}

/// `X o A` with i.i.d. real standard normal `X`.
#[derive(Debug, Clone)]
pub struct HadamardGaussianSpec {
    a: DenseTensor3,
    pub mode: HadamardMode,
}

impl HadamardGaussianSpec {
    pub fn new(a: DenseTensor3, mode: HadamardMode) -> Self {
        Self { a, mode }
    }

    pub fn pattern(&self) -> &DenseTensor3 {
        &self.a
    }

    pub fn sigma2(&self) -> f64 {
        hadamard_sigma2(&self.a, self.mode)
    }

    pub fn sample_hadamard_gaussian(&self, rng: &mut TrialRng) -> DenseTensor3 {
        let x = DenseTensor3::from_real_fn(self.a.shape(), |_, _, _| rng.sample(StandardNormal));
        x.hadamard(&self.a).expect("same shape")
    }
}

impl Ensemble for HadamardGaussianSpec {
    fn shape(&self) -> TensorShape {
        self.a.shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        Ok(self.sample_hadamard_gaussian(rng))
    }
}

/// Random tensor with finitely many atoms.
#[derive(Debug, Clone)]
pub struct FiniteSupportTensorRV {
    atoms: Vec<(DenseTensor3, f64)>,
}

impl FiniteSupportTensorRV {
    pub fn new(atoms: Vec<(DenseTensor3, f64)>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::invalid("a finite-support variable needs at least one atom"))?;
        let shape = first.0.shape();
        let mut total = 0.0;
        for (t, prob) in &atoms {
            if t.shape() != shape {
                return Err(Error::ShapeMismatch {
                    op: "FiniteSupportTensorRV",
                    left: shape,
                    right: t.shape(),
                });
            }
            if !(*prob >= 0.0) {
                return Err(Error::invalid(format!("negative probability {prob}")));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn deterministic(t: DenseTensor3) -> Self {
        Self { atoms: vec![(t, 1.0)] }
    }

    /// `+-a` with probability 1/2 each.
    pub fn symmetric_pair(a: DenseTensor3) -> Self {
        let neg = a.neg();
        Self {
            atoms: vec![(a, 0.5), (neg, 0.5)],
        }
    }

    pub fn atoms(&self) -> &[(DenseTensor3, f64)] {
        &self.atoms
    }

    pub fn shape(&self) -> TensorShape {
        self.atoms[0].0.shape()
    }

    /// `E g(X) = sum_a p_a g(atom_a)`.
    pub fn expectation_with(&self, mut g: impl FnMut(&DenseTensor3) -> Result<DenseTensor3>) -> Result<DenseTensor3> {
        let mut acc: Option<DenseTensor3> = None;
        for (t, prob) in &self.atoms {
            let term = g(t)?.scale_real(*prob);
            acc = Some(match acc {
                Some(a) => a.add(&term)?,
                None => term,
            });
        }
        Ok(acc.expect("at least one atom"))
    }

    /// `E f(X)` for a spectral function.
    pub fn exact_expectation(&self, f: SpectralFn) -> Result<DenseTensor3> {
        self.expectation_with(|t| spectral::apply_fn(t, f))
    }

    pub fn mean(&self) -> Result<DenseTensor3> {
        self.expectation_with(|t| Ok(t.clone()))
    }

    /// `E g(X)` for a scalar-valued `g`.
    pub fn expect_scalar(&self, mut g: impl FnMut(&DenseTensor3) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (t, prob) in &self.atoms {
            acc += prob * g(t)?;
        }
        Ok(acc)
    }

    /// `Pr(event)`.
    pub fn probability(&self, mut event: impl FnMut(&DenseTensor3) -> Result<bool>) -> Result<f64> {
        self.expect_scalar(|t| Ok(if event(t)? { 1.0 } else { 0.0 }))
    }

    pub fn check_hermitian(&self) -> Result<()> {
        for (t, _) in &self.atoms {
            ensure_hermitian(t)?;
        }
        Ok(())
    }

    pub fn map(&self, mut f: impl FnMut(&DenseTensor3) -> Result<DenseTensor3>) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|(t, prob)| Ok((f(t)?, *prob)))
            .collect::<Result<_>>()?;
        Self::new(atoms)
    }

    /// Law of `X + Y` for independent `X`, `Y`.
    pub fn independent_sum(&self, other: &Self) -> Result<Self> {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for (x, px) in &self.atoms {
            for (y, py) in &other.atoms {
                atoms.push((x.add(y)?, px * py));
            }
        }
        Self::new(atoms)
    }

    /// Law of `sum_i X_i` for independent summands.
    pub fn sum_of_independent(parts: &[Self]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::invalid("sum of no random variables"))?;
        let count: f64 = parts.iter().map(|p| p.atoms.len() as f64).product();
        if count > 4096.0 {
            return Err(Error::invalid(format!("{count} joint outcomes exceeds the 4096 enumeration limit")));
        }
        rest.iter().try_fold(first.clone(), |acc, x| acc.independent_sum(x))
    }
}

impl Ensemble for FiniteSupportTensorRV {
    fn shape(&self) -> TensorShape {
        FiniteSupportTensorRV::shape(self)
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (t, prob) in &self.atoms {
            acc += prob;
            if u < acc {
                return Ok(t.clone());
            }
        }
        Ok(self.atoms[self.atoms.len() - 1].0.clone())
    }
}
