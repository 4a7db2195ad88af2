//! Closed-form tail and expectation bounds.
//!
//! Every evaluator returns the raw right-hand side (which may exceed 1) and
//! the value clipped to `[0, 1]`. Eigentuple variants reduce the threshold
//! vector to its minimum entry and then run the scalar code path, so a
//! constant threshold vector reproduces the scalar bound exactly.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{ensure_hermitian, spectral_norm};
use crate::tensor::{DenseTensor3, TensorShape};

/// Scalar threshold `theta` or threshold vector `b` with its cached minimum.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Scalar(f64),
    Vector { b: Vec<f64>, min: f64 },
}

impl Threshold {
    pub fn vector(b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("threshold vector is empty"));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("threshold vector has a non-finite entry"));
        }
        let min = b.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Threshold::Vector { b, min })
    }

    pub fn constant_vector(value: f64, p: usize) -> Result<Self> {
        Self::vector(vec![value; p])
    }

    /// `theta`, or `b_j` at `j = argmin b`.
    pub fn effective(&self) -> f64 {
        match self {
            Threshold::Scalar(t) => *t,
            Threshold::Vector { min, .. } => *min,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Threshold::Vector { .. })
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Threshold::Vector { b, .. } => Some(b),
            Threshold::Scalar(_) => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Scalar(t) => write!(f, "{t}"),
            Threshold::Vector { b, .. } => {
                let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(";"))
            }
        }
    }
}

/// Parameters of one theorem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub m: usize,
    /// Column count for rectangular bounds.
    pub n: Option<usize>,
    pub p: usize,
    pub sigma2: f64,
    pub threshold: Threshold,
    /// Scale bound `T`.
    pub t_cap: f64,
    /// Number of summands.
    pub n_sum: usize,
    pub mu_max: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_bar_max: Option<f64>,
    pub mu_bar_min: Option<f64>,
}

impl BoundQuery {
    pub fn new(m: usize, p: usize, threshold: Threshold) -> Self {
        Self {
            m,
            n: None,
            p,
            sigma2: 1.0,
            threshold,
            t_cap: 1.0,
            n_sum: 1,
            mu_max: None,
            mu_min: None,
            mu_bar_max: None,
            mu_bar_min: None,
        }
    }

    pub fn scalar(m: usize, p: usize, theta: f64) -> Self {
        Self::new(m, p, Threshold::Scalar(theta))
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    pub fn with_cols(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_t_cap(mut self, t: f64) -> Self {
        self.t_cap = t;
        self
    }

    pub fn with_n_sum(mut self, n_sum: usize) -> Self {
        self.n_sum = n_sum;
        self
    }

    pub fn with_mu_max(mut self, v: f64) -> Self {
        self.mu_max = Some(v);
        self
    }

    pub fn with_mu_min(mut self, v: f64) -> Self {
        self.mu_min = Some(v);
        self
    }

    pub fn with_mu_bar_max(mut self, v: f64) -> Self {
        self.mu_bar_max = Some(v);
        self
    }

    pub fn with_mu_bar_min(mut self, v: f64) -> Self {
        self.mu_bar_min = Some(v);
        self
    }

    pub fn with_threshold(mut self, threshold: Threshold) -> Self {
        self.threshold = threshold;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 || self.n == Some(0) {
            return Err(Error::invalid("dimensions must be positive"));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 = {} must be a finite nonnegative number", self.sigma2)));
        }
        if !(self.t_cap > 0.0 && self.t_cap.is_finite()) {
            return Err(Error::invalid(format!("T = {} must be positive", self.t_cap)));
        }
        if self.n_sum == 0 {
            return Err(Error::invalid("n_sum must be at least 1"));
        }
        if let Threshold::Vector { b, .. } = &self.threshold {
            if b.len() != self.p {
                return Err(Error::invalid(format!(
                    "threshold vector has length {}, expected p = {}",
                    b.len(),
                    self.p
                )));
            }
        }
        if !self.threshold.effective().is_finite() {
            return Err(Error::invalid("threshold must be finite"));
        }
        Ok(())
    }

    fn mp(&self) -> f64 {
        (self.m * self.p) as f64
    }

    fn require(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::invalid(format!("{name} is required")))
    }
}

/// Whether a stated regime condition holds for the query.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeFlag {
    pub condition: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub theorem_id: TheoremId,
    pub value: f64,
    pub clipped: f64,
    pub validity: Vec<RegimeFlag>,
}

impl BoundValue {
    fn new(theorem_id: TheoremId, value: f64) -> Self {
        Self {
            theorem_id,
            value,
            clipped: value.min(1.0),
            validity: Vec::new(),
        }
    }

    fn flag(mut self, condition: impl Into<String>, holds: bool) -> Self {
        self.validity.push(RegimeFlag {
            condition: condition.into(),
            holds,
        });
        self
    }

    pub fn is_valid(&self) -> bool {
        self.validity.iter().all(|f| f.holds)
    }
}

macro_rules! theorem_ids {
    ($($variant:ident => $id:literal),* $(,)?) => {
        /// Identifier of one displayed bound.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum TheoremId {
            $($variant),*
        }

        impl TheoremId {
            pub const ALL: &'static [TheoremId] = &[$(TheoremId::$variant),*];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $(TheoremId::$variant => $id),*
                }
            }
        }

        impl FromStr for TheoremId {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($id => Ok(TheoremId::$variant),)*
                    _ => Err(Error::invalid(format!("unknown theorem id {s:?}"))),
                }
            }
        }
    };
}

theorem_ids! {
    GaussianSeries => "gaussian-series",
    GaussianSeriesNorm => "gaussian-series-norm",
    GaussianSeriesEigentuple => "gaussian-series-eigentuple",
    GaussianSeriesVecNorm => "gaussian-series-vec-norm",
    RectangularSeries => "rectangular-series",
    RectangularSeriesEigentuple => "rectangular-series-eigentuple",
    HadamardGaussian => "hadamard-gaussian",
    HadamardGaussianEigentuple => "hadamard-gaussian-eigentuple",
    Chernoff1Upper => "chernoff1-upper",
    Chernoff1Lower => "chernoff1-lower",
    Chernoff1EigentupleUpper => "chernoff1-eigentuple-upper",
    Chernoff1EigentupleLower => "chernoff1-eigentuple-lower",
    Chernoff2Upper => "chernoff2-upper",
    Chernoff2Lower => "chernoff2-lower",
    Chernoff2EigentupleUpper => "chernoff2-eigentuple-upper",
    Chernoff2EigentupleLower => "chernoff2-eigentuple-lower",
    BernsteinBounded => "bernstein-bounded",
    BernsteinBoundedSubgaussRegime => "bernstein-bounded-subgauss-regime",
    BernsteinBoundedSubexpRegime => "bernstein-bounded-subexp-regime",
    BernsteinBoundedEigentuple => "bernstein-bounded-eigentuple",
    BernsteinBoundedEigentupleSubgaussRegime => "bernstein-bounded-eigentuple-subgauss-regime",
    BernsteinBoundedEigentupleSubexpRegime => "bernstein-bounded-eigentuple-subexp-regime",
    BernsteinSubexp => "bernstein-subexp",
    BernsteinSubexpSubgaussRegime => "bernstein-subexp-subgauss-regime",
    BernsteinSubexpSubexpRegime => "bernstein-subexp-subexp-regime",
    BernsteinSubexpEigentuple => "bernstein-subexp-eigentuple",
    BernsteinSubexpEigentupleSubgaussRegime => "bernstein-subexp-eigentuple-subgauss-regime",
    BernsteinSubexpEigentupleSubexpRegime => "bernstein-subexp-eigentuple-subexp-regime",
    Azuma => "azuma",
    AzumaEigentuple => "azuma-eigentuple",
    McDiarmid => "mcdiarmid",
    McDiarmidEigentuple => "mcdiarmid-eigentuple",
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TheoremId {
    pub fn is_eigentuple(&self) -> bool {
        self.as_str().contains("eigentuple") || matches!(self, TheoremId::GaussianSeriesVecNorm)
    }

    /// Scalar counterpart of an eigentuple bound.
    pub fn scalar_counterpart(&self) -> TheoremId {
        use TheoremId::*;
        match self {
            GaussianSeriesEigentuple => GaussianSeries,
            GaussianSeriesVecNorm => GaussianSeriesNorm,
            RectangularSeriesEigentuple => RectangularSeries,
            HadamardGaussianEigentuple => HadamardGaussian,
            Chernoff1EigentupleUpper => Chernoff1Upper,
            Chernoff1EigentupleLower => Chernoff1Lower,
            Chernoff2EigentupleUpper => Chernoff2Upper,
            Chernoff2EigentupleLower => Chernoff2Lower,
            BernsteinBoundedEigentuple => BernsteinBounded,
            BernsteinBoundedEigentupleSubgaussRegime => BernsteinBoundedSubgaussRegime,
            BernsteinBoundedEigentupleSubexpRegime => BernsteinBoundedSubexpRegime,
            BernsteinSubexpEigentuple => BernsteinSubexp,
            BernsteinSubexpEigentupleSubgaussRegime => BernsteinSubexpSubgaussRegime,
            BernsteinSubexpEigentupleSubexpRegime => BernsteinSubexpSubexpRegime,
            AzumaEigentuple => Azuma,
            McDiarmidEigentuple => McDiarmid,
            other => *other,
        }
    }

    /// Chernoff II variants take a scalar relative deviation even in eigentuple form.
    pub fn takes_vector_threshold(&self) -> bool {
        self.is_eigentuple()
            && !matches!(
                self,
                TheoremId::Chernoff2EigentupleUpper | TheoremId::Chernoff2EigentupleLower
            )
    }
}

/// Evaluates the bound named by `id`.
pub fn evaluate(id: TheoremId, q: &BoundQuery) -> Result<BoundValue> {
    use TheoremId::*;
    match id {
        GaussianSeries => gaussian_series_lambda_bound(q),
        GaussianSeriesNorm => gaussian_series_norm_bound(q),
        GaussianSeriesEigentuple => gaussian_series_eigentuple_bound(q),
        GaussianSeriesVecNorm => gaussian_series_vec_norm_bound(q),
        RectangularSeries | HadamardGaussian => rectangular_series_bound(q).map(|v| retag(v, id)),
        RectangularSeriesEigentuple | HadamardGaussianEigentuple => {
            rectangular_series_eigentuple_bound(q).map(|v| retag(v, id))
        }
        Chernoff1Upper => chernoff1_upper(q),
        Chernoff1Lower => chernoff1_lower(q),
        Chernoff1EigentupleUpper => chernoff1_eigentuple_upper(q),
        Chernoff1EigentupleLower => chernoff1_eigentuple_lower(q),
        Chernoff2Upper => chernoff2_upper(q),
        Chernoff2Lower => chernoff2_lower(q),
        Chernoff2EigentupleUpper => chernoff2_eigentuple_upper(q),
        Chernoff2EigentupleLower => chernoff2_eigentuple_lower(q),
        BernsteinBounded => bernstein_bounded(q),
        BernsteinBoundedSubgaussRegime => bernstein_bounded_subgauss_regime(q),
        BernsteinBoundedSubexpRegime => bernstein_bounded_subexp_regime(q),
        BernsteinBoundedEigentuple | BernsteinBoundedEigentupleSubgaussRegime | BernsteinBoundedEigentupleSubexpRegime => {
            bernstein_eigentuple(id, q)
        }
        BernsteinSubexp => bernstein_subexponential(q),
        BernsteinSubexpSubgaussRegime => bernstein_subexponential_subgauss_regime(q),
        BernsteinSubexpSubexpRegime => bernstein_subexponential_subexp_regime(q),
        BernsteinSubexpEigentuple | BernsteinSubexpEigentupleSubgaussRegime | BernsteinSubexpEigentupleSubexpRegime => {
            bernstein_eigentuple(id, q)
        }
        Azuma => azuma_bound(q),
        AzumaEigentuple => azuma_eigentuple_bound(q),
        McDiarmid => mcdiarmid_bound(q),
        McDiarmidEigentuple => mcdiarmid_eigentuple_bound(q),
    }
}

fn retag(mut v: BoundValue, id: TheoremId) -> BoundValue {
    v.theorem_id = id;
    v
}

/// `c log(c/d) + (1-c) log((1-c)/(1-d))` with `0 log 0 = 0`.
pub fn binary_divergence(c: f64, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&d) {
        return Err(Error::invalid(format!("binary divergence needs c, d in [0, 1], got c = {c}, d = {d}")));
    }
    if d == 0.0 || d == 1.0 {
        return if c == d { Ok(0.0) } else { Err(Error::InfiniteDivergence { c, d }) };
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    Ok((term(c, d) + term(1.0 - c, 1.0 - d)).max(0.0))
}

fn scalar_theta(q: &BoundQuery) -> Result<f64> {
    match q.threshold {
        Threshold::Scalar(t) => Ok(t),
        Threshold::Vector { .. } => Err(Error::invalid("this bound takes a scalar threshold")),
    }
}

/// `b_j` at `j = argmin b`; `strict` demands every entry positive.
fn vector_min(q: &BoundQuery, strict: bool) -> Result<f64> {
    match &q.threshold {
        Threshold::Vector { b, min } => {
            if strict && *min <= 0.0 {
                return Err(Error::invalid(format!("threshold vector must be positive entrywise, got {}", fmt_vec(b))));
            }
            if *min < 0.0 {
                return Err(Error::invalid(format!("threshold vector must be nonnegative, got {}", fmt_vec(b))));
            }
            Ok(*min)
        }
        Threshold::Scalar(_) => Err(Error::invalid("eigentuple bounds take a threshold vector")),
    }
}

fn fmt_vec(b: &[f64]) -> String {
    let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn nonnegative_theta(theta: f64) -> Result<f64> {
    if theta < 0.0 {
        return Err(Error::invalid(format!("threshold {theta} must be nonnegative")));
    }
    Ok(theta)
}

/// `prefactor * exp(-theta^2 / (c * sigma2))`, with `0/0` read as 0.
fn gaussian_tail(prefactor: f64, theta: f64, sigma2: f64, c: f64) -> f64 {
    if theta == 0.0 {
        return prefactor;
    }
    if sigma2 == 0.0 {
        return 0.0;
    }
    prefactor * (-(theta * theta) / (c * sigma2)).exp()
}

fn series_value(id: TheoremId, q: &BoundQuery, theta: f64, prefactor: f64) -> Result<BoundValue> {
    q.validate()?;
    Ok(BoundValue::new(id, gaussian_tail(prefactor, nonnegative_theta(theta)?, q.sigma2, 2.0)))
}

pub fn gaussian_series_lambda_bound(q: &BoundQuery) -> Result<BoundValue> {
    series_value(TheoremId::GaussianSeries, q, scalar_theta(q)?, q.mp())
}

pub fn gaussian_series_norm_bound(q: &BoundQuery) -> Result<BoundValue> {
    series_value(TheoremId::GaussianSeriesNorm, q, scalar_theta(q)?, 2.0 * q.mp())
}

pub fn gaussian_series_eigentuple_bound(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, false)?;
    series_value(TheoremId::GaussianSeriesEigentuple, q, b, q.mp())
}

pub fn gaussian_series_vec_norm_bound(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, false)?;
    series_value(TheoremId::GaussianSeriesVecNorm, q, b, 2.0 * q.mp())
}

fn rect_prefactor(q: &BoundQuery) -> f64 {
    ((q.m + q.n.unwrap_or(q.m)) * q.p) as f64
}

/// `(m+n) p exp(-theta^2 / (2 sigma2))`; `n` defaults to `m`.
pub fn rectangular_series_bound(q: &BoundQuery) -> Result<BoundValue> {
    series_value(TheoremId::RectangularSeries, q, scalar_theta(q)?, rect_prefactor(q))
}

pub fn rectangular_series_eigentuple_bound(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, false)?;
    series_value(TheoremId::RectangularSeriesEigentuple, q, b, rect_prefactor(q))
}

fn unit_interval_open(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(format!("{name} = {v} must lie in (0, 1)")));
    }
    Ok(v)
}

fn chernoff1_value(id: TheoremId, q: &BoundQuery, theta: f64, upper: bool) -> Result<BoundValue> {
    q.validate()?;
    let (name, mu) = if upper {
        ("mu_bar_max", q.mu_bar_max)
    } else {
        ("mu_bar_min", q.mu_bar_min)
    };
    let mu = unit_interval_open(name, q.require(name, mu)?)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("Chernoff I threshold {theta} must lie in [0, 1]")));
    }
    let value = q.mp() * (-(q.n_sum as f64) * binary_divergence(theta, mu)?).exp();
    let (cond, holds) = if upper {
        (format!("{name} <= theta <= 1"), mu <= theta)
    } else {
        (format!("0 <= theta <= {name}"), theta <= mu)
    };
    Ok(BoundValue::new(id, value).flag(cond, holds))
}

pub fn chernoff1_upper(q: &BoundQuery) -> Result<BoundValue> {
    chernoff1_value(TheoremId::Chernoff1Upper, q, scalar_theta(q)?, true)
}

pub fn chernoff1_lower(q: &BoundQuery) -> Result<BoundValue> {
    chernoff1_value(TheoremId::Chernoff1Lower, q, scalar_theta(q)?, false)
}

/// Threshold `b_j / n` in place of `theta`.
pub fn chernoff1_eigentuple_upper(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, false)?;
    chernoff1_value(TheoremId::Chernoff1EigentupleUpper, q, b / q.n_sum as f64, true)
}

pub fn chernoff1_eigentuple_lower(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, false)?;
    chernoff1_value(TheoremId::Chernoff1EigentupleLower, q, b / q.n_sum as f64, false)
}

fn chernoff2_value(id: TheoremId, q: &BoundQuery, upper: bool) -> Result<BoundValue> {
    q.validate()?;
    let theta = scalar_theta(q)?;
    let (name, mu) = if upper { ("mu_max", q.mu_max) } else { ("mu_min", q.mu_min) };
    let mu = q.require(name, mu)?;
    if mu < 0.0 {
        return Err(Error::invalid(format!("{name} = {mu} must be nonnegative")));
    }
    let base = if upper {
        if theta < 0.0 {
            return Err(Error::invalid(format!("Chernoff II upper needs theta >= 0, got {theta}")));
        }
        (theta - (1.0 + theta) * (1.0 + theta).ln()).exp()
    } else {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(format!("Chernoff II lower needs theta in [0, 1], got {theta}")));
        }
        // 0^0 = 1 at theta = 1
        let log_pow = if theta == 1.0 { 0.0 } else { (1.0 - theta) * (1.0 - theta).ln() };
        (-theta - log_pow).exp()
    };
    Ok(BoundValue::new(id, q.mp() * base.powf(mu / q.t_cap)))
}

pub fn chernoff2_upper(q: &BoundQuery) -> Result<BoundValue> {
    chernoff2_value(TheoremId::Chernoff2Upper, q, true)
}

pub fn chernoff2_lower(q: &BoundQuery) -> Result<BoundValue> {
    chernoff2_value(TheoremId::Chernoff2Lower, q, false)
}

/// Same right-hand side as the scalar form; the event uses `(1 + theta) mu_max` times all-ones.
pub fn chernoff2_eigentuple_upper(q: &BoundQuery) -> Result<BoundValue> {
    chernoff2_value(TheoremId::Chernoff2EigentupleUpper, q, true)
}

pub fn chernoff2_eigentuple_lower(q: &BoundQuery) -> Result<BoundValue> {
    chernoff2_value(TheoremId::Chernoff2EigentupleLower, q, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Bounded,
    Subexp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    General,
    Subgauss,
    Subexp,
}

fn bernstein_value(id: TheoremId, q: &BoundQuery, theta: f64, family: Family, form: Form) -> Result<BoundValue> {
    q.validate()?;
    if !(q.sigma2 > 0.0) {
        return Err(Error::invalid("Bernstein bounds need sigma2 > 0"));
    }
    let theta = nonnegative_theta(theta)?;
    let (s2, t) = (q.sigma2, q.t_cap);
    let boundary = s2 / t;
    let exponent = match (family, form) {
        (Family::Bounded, Form::General) => -(theta * theta / 2.0) / (s2 + t * theta / 3.0),
        (Family::Bounded, Form::Subgauss) => -3.0 * theta * theta / (8.0 * s2),
        (Family::Bounded, Form::Subexp) => -3.0 * theta / (8.0 * t),
        (Family::Subexp, Form::General) => -(theta * theta / 2.0) / (s2 + t * theta),
        (Family::Subexp, Form::Subgauss) => -theta * theta / (4.0 * s2),
        (Family::Subexp, Form::Subexp) => -theta / (4.0 * t),
    };
    let v = BoundValue::new(id, q.mp() * exponent.exp());
    Ok(match form {
        Form::General => v,
        Form::Subgauss => v.flag("theta <= sigma2 / T", theta <= boundary),
        Form::Subexp => v.flag("theta >= sigma2 / T", theta >= boundary),
    })
}

pub fn bernstein_bounded(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(TheoremId::BernsteinBounded, q, scalar_theta(q)?, Family::Bounded, Form::General)
}

pub fn bernstein_bounded_subgauss_regime(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(
        TheoremId::BernsteinBoundedSubgaussRegime,
        q,
        scalar_theta(q)?,
        Family::Bounded,
        Form::Subgauss,
    )
}

pub fn bernstein_bounded_subexp_regime(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(
        TheoremId::BernsteinBoundedSubexpRegime,
        q,
        scalar_theta(q)?,
        Family::Bounded,
        Form::Subexp,
    )
}

pub fn bernstein_subexponential(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(TheoremId::BernsteinSubexp, q, scalar_theta(q)?, Family::Subexp, Form::General)
}

pub fn bernstein_subexponential_subgauss_regime(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(
        TheoremId::BernsteinSubexpSubgaussRegime,
        q,
        scalar_theta(q)?,
        Family::Subexp,
        Form::Subgauss,
    )
}

pub fn bernstein_subexponential_subexp_regime(q: &BoundQuery) -> Result<BoundValue> {
    bernstein_value(
        TheoremId::BernsteinSubexpSubexpRegime,
        q,
        scalar_theta(q)?,
        Family::Subexp,
        Form::Subexp,
    )
}

/// Eigentuple Bernstein bounds: `b_j` (minimum entry) replaces `theta`,
/// including inside the bounded family's `T theta / 3` term.
pub fn bernstein_eigentuple(id: TheoremId, q: &BoundQuery) -> Result<BoundValue> {
    use TheoremId::*;
    let (family, form) = match id {
        BernsteinBoundedEigentuple => (Family::Bounded, Form::General),
        BernsteinBoundedEigentupleSubgaussRegime => (Family::Bounded, Form::Subgauss),
        BernsteinBoundedEigentupleSubexpRegime => (Family::Bounded, Form::Subexp),
        BernsteinSubexpEigentuple => (Family::Subexp, Form::General),
        BernsteinSubexpEigentupleSubgaussRegime => (Family::Subexp, Form::Subgauss),
        BernsteinSubexpEigentupleSubexpRegime => (Family::Subexp, Form::Subexp),
        other => return Err(Error::invalid(format!("{other} is not a Bernstein eigentuple bound"))),
    };
    q.validate()?;
    let b = vector_min(q, true)?;
    bernstein_value(id, q, b, family, form)
}

fn martingale_value(id: TheoremId, q: &BoundQuery, theta: f64) -> Result<BoundValue> {
    q.validate()?;
    if !(q.sigma2 > 0.0) {
        return Err(Error::invalid("martingale bounds need sigma2 > 0"));
    }
    Ok(BoundValue::new(id, gaussian_tail(q.mp(), nonnegative_theta(theta)?, q.sigma2, 8.0)))
}

pub fn azuma_bound(q: &BoundQuery) -> Result<BoundValue> {
    martingale_value(TheoremId::Azuma, q, scalar_theta(q)?)
}

pub fn mcdiarmid_bound(q: &BoundQuery) -> Result<BoundValue> {
    martingale_value(TheoremId::McDiarmid, q, scalar_theta(q)?)
}

pub fn azuma_eigentuple_bound(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, true)?;
    martingale_value(TheoremId::AzumaEigentuple, q, b)
}

pub fn mcdiarmid_eigentuple_bound(q: &BoundQuery) -> Result<BoundValue> {
    q.validate()?;
    let b = vector_min(q, true)?;
    martingale_value(TheoremId::McDiarmidEigentuple, q, b)
}

/// Root of `delta e^delta = 1` and the constant `C = e^(e^delta) / delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaOpt {
    pub delta: f64,
    pub c: f64,
}

pub fn solve_delta_opt() -> DeltaOpt {
    let f = |d: f64| d * d.exp() - 1.0;
    let (mut lo, mut hi) = (0.1_f64, 1.0_f64);
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    DeltaOpt {
        delta,
        c: delta.exp().exp() / delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationBounds {
    pub lower: f64,
    pub upper: f64,
    /// `lower <= upper`.
    pub consistent: bool,
}

impl ExpectationBounds {
    fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            consistent: lower <= upper,
        }
    }
}

/// `mu_max <= E lambda_max <= C mp e^(-mu_max / T)`, returned as displayed.
pub fn expectation_bounds_chernoff(m: usize, p: usize, mu_max: f64, t_cap: f64) -> Result<ExpectationBounds> {
    if mu_max < 0.0 || !(t_cap > 0.0) {
        return Err(Error::invalid("need mu_max >= 0 and T > 0"));
    }
    let c = solve_delta_opt().c;
    Ok(ExpectationBounds::new(mu_max, c * (m * p) as f64 * (-mu_max / t_cap).exp()))
}

/// `integral_0^x e^(-s^2) ds`.
pub fn gaussian_integral(x: f64) -> f64 {
    0.5 * std::f64::consts::PI.sqrt() * libm::erf(x)
}

/// `mu_max <= E lambda_max <= 2mp (sigma G(sigma / 2T) + 2T e^(-sigma^2 / 4T^2))`.
pub fn expectation_bounds_subexp(m: usize, p: usize, sigma: f64, t_cap: f64, mu_max: f64) -> Result<ExpectationBounds> {
    if sigma < 0.0 || !(t_cap > 0.0) {
        return Err(Error::invalid("need sigma >= 0 and T > 0"));
    }
    let mp = (m * p) as f64;
    let upper = 2.0 * mp
        * (sigma * gaussian_integral(sigma / (2.0 * t_cap))
            + 2.0 * t_cap * (-(sigma * sigma) / (4.0 * t_cap * t_cap)).exp());
    Ok(ExpectationBounds::new(mu_max, upper))
}

/// Bracket `(sigma^2, 4 mp sigma^2)` on `E ||X||^2` for a Gaussian series.
pub fn norm_expectation_bounds(m: usize, p: usize, sigma: f64) -> Result<ExpectationBounds> {
    if sigma < 0.0 {
        return Err(Error::invalid("need sigma >= 0"));
    }
    let s2 = sigma * sigma;
    Ok(ExpectationBounds::new(s2, 4.0 * (m * p) as f64 * s2))
}

fn common_shape(op: &'static str, coeffs: &[DenseTensor3]) -> Result<TensorShape> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::invalid(format!("{op} needs at least one coefficient")))?;
    for c in coeffs {
        if c.shape() != first.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: first.shape(),
                right: c.shape(),
            });
        }
    }
    Ok(first.shape())
}

/// `|| sum_i A_i^2 ||` for Hermitian coefficients.
pub fn series_sigma2(coeffs: &[DenseTensor3]) -> Result<f64> {
    common_shape("series_sigma2", coeffs)?;
    let mut squares = Vec::with_capacity(coeffs.len());
    for a in coeffs {
        ensure_hermitian(a)?;
        squares.push(a.t_product(a)?);
    }
    let sum = DenseTensor3::sum(squares.iter())?.expect("nonempty");
    Ok(spectral_norm(&sum))
}

/// `max(|| sum A_i A_i^H ||, || sum A_i^H A_i ||)`.
pub fn rectangular_sigma2(coeffs: &[DenseTensor3]) -> Result<f64> {
    common_shape("rectangular_sigma2", coeffs)?;
    let mut left = Vec::with_capacity(coeffs.len());
    let mut right = Vec::with_capacity(coeffs.len());
    for a in coeffs {
        let h = a.conj_transpose();
        left.push(a.t_product(&h)?);
        right.push(h.t_product(a)?);
    }
    let l = DenseTensor3::sum(left.iter())?.expect("nonempty");
    let r = DenseTensor3::sum(right.iter())?.expect("nonempty");
    Ok(spectral_norm(&l).max(spectral_norm(&r)))
}

/// Which entries enter the Hadamard variance proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HadamardMode {
    /// First frontal slice only.
    #[default]
    Stated,
    /// Sum of squared moduli over every frontal slice.
    AllSlices,
}

impl FromStr for HadamardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stated" => Ok(HadamardMode::Stated),
            "all-slices" => Ok(HadamardMode::AllSlices),
            _ => Err(Error::invalid(format!("unknown Hadamard mode {s:?} (expected stated or all-slices)"))),
        }
    }
}

impl fmt::Display for HadamardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HadamardMode::Stated => "stated",
            HadamardMode::AllSlices => "all-slices",
        })
    }
}

/// Largest row or column sum of `|a_ijk|^2`.
pub fn hadamard_sigma2(a: &DenseTensor3, mode: HadamardMode) -> f64 {
    let TensorShape { m, n, p } = a.shape();
    let slices = match mode {
        HadamardMode::Stated => 1,
        HadamardMode::AllSlices => p,
    };
    let mut rows = vec![0.0; m];
    let mut cols = vec![0.0; n];
    for k in 0..slices {
        for i in 0..m {
            for j in 0..n {
                let v = a.at(i, j, k).norm_sqr();
                rows[i] += v;
                cols[j] += v;
            }
        }
    }
    rows.into_iter().chain(cols).fold(0.0, f64::max)
}
