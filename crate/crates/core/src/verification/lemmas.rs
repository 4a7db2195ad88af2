//! Deterministic checkers for the trace, Loewner-order and Laplace-transform
//! inequalities behind the tail bounds.
//!
//! Expectations are exact: finite-support laws are summed atom by atom and
//! Gaussian expectations use a 64-node Gauss–Hermite rule. Every checker
//! reports a slack that is nonnegative when the inequality holds.

use crate::bounds::Threshold;
use crate::ensembles::FiniteSupportTensorRV;
use crate::error::{Error, Result};
use crate::literal;
use crate::spectral::{self, ensure_hermitian, expm, logm, SpectralFn};
use crate::tensor::{identity, DenseTensor3};
use crate::verification::quadrature::GaussHermite;
use crate::verification::t_grid;

/// Tolerance for trace inequalities.
pub const TRACE_TOL: f64 = 1e-9;
/// Tolerance for Loewner-order inequalities.
pub const ORDER_TOL: f64 = 1e-10;
/// Tolerance for the Gaussian MGF identity.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Tolerance for probability-versus-bound comparisons.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Largest `2 t max|X|` at which the cumulant condition is checked.
pub const CGF_CONDITION_LIMIT: f64 = 16.0;
pub const GAUSS_HERMITE_NODES: usize = 64;

pub const LEMMA_IDS: [&str; 15] = [
    "golden-thompson",
    "mgf-gaussian",
    "mgf-rademacher",
    "chernoff-mgf",
    "bounded-bernstein-mgf",
    "subexp-bernstein-mgf",
    "symmetrization",
    "cgf-symmetrized",
    "trace-mgf-bound",
    "laplace-eigenvalue",
    "laplace-eigentuple",
    "master-bound-cgf",
    "master-bound-cgf-eigentuple",
    "master-bound-mgf",
    "master-bound-mgf-eigentuple",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheckResult {
    pub lemma_id: String,
    /// Most negative slack over all checked instances.
    pub min_slack: f64,
    pub trials: u64,
    pub tol: f64,
    pub pass: bool,
    /// Instance attaining `min_slack`, recorded on failure.
    pub witness: Option<String>,
    /// Extra diagnostics, such as the first `t` at which the eigentuple condition fails.
    pub note: Option<String>,
}

impl LemmaCheckResult {
    fn single(lemma_id: &str, slack: f64, tol: f64, witness: impl FnOnce() -> String) -> Self {
        let pass = slack >= -tol;
        Self {
            lemma_id: lemma_id.to_string(),
            min_slack: slack,
            trials: 1,
            tol,
            pass,
            witness: if pass { None } else { Some(witness()) },
            note: None,
        }
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }

    /// Combines per-instance results: minimum slack, summed trials, the worst witness.
    pub fn aggregate(lemma_id: &str, results: impl IntoIterator<Item = LemmaCheckResult>) -> Self {
        let mut out = Self {
            lemma_id: lemma_id.to_string(),
            min_slack: f64::INFINITY,
            trials: 0,
            tol: 0.0,
            pass: true,
            witness: None,
            note: None,
        };
        for r in results {
            out.trials += r.trials;
            out.tol = out.tol.max(r.tol);
            out.pass &= r.pass;
            if r.min_slack < out.min_slack {
                out.min_slack = r.min_slack;
                out.witness = r.witness;
            }
            if out.note.is_none() {
                out.note = r.note;
            }
        }
        out
    }
}

fn tr(a: &DenseTensor3) -> Result<f64> {
    Ok(a.trace()?.re)
}

/// `(rhs - lhs) / max(1, |rhs|)`.
fn trace_slack(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / rhs.abs().max(1.0)
}

fn render_all(parts: &[(&str, &DenseTensor3)]) -> String {
    parts
        .iter()
        .map(|(name, t)| format!("# {name}\n{}", literal::render(t)))
        .collect()
}

fn render_rv(rv: &FiniteSupportTensorRV) -> String {
    rv.atoms()
        .iter()
        .enumerate()
        .map(|(i, (t, p))| format!("# atom {i} probability {p}\n{}", literal::render(t)))
        .collect()
}

fn ensure_centered(rv: &FiniteSupportTensorRV) -> Result<()> {
    let mean = rv.mean()?;
    let scale = rv.atoms().iter().map(|(t, _)| t.frobenius_norm()).fold(1.0, f64::max);
    if mean.frobenius_norm() > 1e-10 * scale {
        return Err(Error::Hypothesis {
            context: "centered random tensor".into(),
            witness: format!("||E X||_F = {:e}", mean.frobenius_norm()),
        });
    }
    Ok(())
}

fn ensure_lambda_max_at_most_one(rv: &FiniteSupportTensorRV, tpsd: bool) -> Result<()> {
    for (i, (t, _)) in rv.atoms().iter().enumerate() {
        let spec = spectral::eig_hermitian(t)?;
        let bad_top = spec.lambda_max() > 1.0 + ORDER_TOL;
        let bad_bottom = tpsd && spec.lambda_min() < -ORDER_TOL;
        if bad_top || bad_bottom {
            return Err(Error::Hypothesis {
                context: format!("atom {i}"),
                witness: format!("spectrum [{}, {}]", spec.lambda_min(), spec.lambda_max()),
            });
        }
    }
    Ok(())
}

fn square(a: &DenseTensor3) -> Result<DenseTensor3> {
    a.t_product(a)
}

/// `Tr exp(c + d) <= Tr(exp(c) * exp(d))`.
pub fn check_golden_thompson(c: &DenseTensor3, d: &DenseTensor3) -> Result<LemmaCheckResult> {
    ensure_hermitian(c)?;
    ensure_hermitian(d)?;
    let lhs = tr(&expm(&c.add(d)?)?)?;
    let rhs = tr(&expm(c)?.t_product(&expm(d)?)?)?;
    Ok(LemmaCheckResult::single("golden-thompson", trace_slack(lhs, rhs), TRACE_TOL, || {
        render_all(&[("c", c), ("d", d)])
    }))
}

/// `E exp(alpha t A) = exp(t^2 A^2 / 2)` for standard normal `alpha`, by quadrature.
/// Slack is minus the Frobenius-relative discrepancy.
pub fn check_mgf_gaussian(a: &DenseTensor3, t: f64) -> Result<LemmaCheckResult> {
    ensure_hermitian(a)?;
    let gh = GaussHermite::new(GAUSS_HERMITE_NODES);
    let mut lhs = DenseTensor3::zeros(a.shape());
    for (x, w) in gh.normal_points() {
        lhs = lhs.add(&expm(&a.scale_real(x * t))?.scale_real(w))?;
    }
    let rhs = expm(&square(a)?.scale_real(t * t / 2.0))?;
    let slack = -lhs.sub(&rhs)?.frobenius_norm() / rhs.frobenius_norm().max(1.0);
    Ok(LemmaCheckResult::single("mgf-gaussian", slack, QUADRATURE_TOL, || {
        format!("# t = {t}\n{}", render_all(&[("a", a)]))
    }))
}

/// `E exp(beta t A) = cosh(t A) <= exp(t^2 A^2 / 2)` for a Rademacher `beta`.
pub fn check_mgf_rademacher(a: &DenseTensor3, t: f64) -> Result<LemmaCheckResult> {
    ensure_hermitian(a)?;
    let lhs = FiniteSupportTensorRV::symmetric_pair(a.scale_real(t)).exact_expectation(SpectralFn::Exp)?;
    let rhs = expm(&square(a)?.scale_real(t * t / 2.0))?;
    let slack = spectral::loewner_slack(&lhs, &rhs)?;
    Ok(LemmaCheckResult::single("mgf-rademacher", slack, ORDER_TOL, || {
        format!("# t = {t}\n{}", render_all(&[("a", a)]))
    }))
}

/// `E exp(t X) <= I + (e^t - 1) E X` for TPSD `X` with `lambda_max <= 1`.
pub fn check_chernoff_mgf(rv: &FiniteSupportTensorRV, t: f64) -> Result<LemmaCheckResult> {
    rv.check_hermitian()?;
    ensure_lambda_max_at_most_one(rv, true)?;
    let lhs = rv.expectation_with(|x| expm(&x.scale_real(t)))?;
    let shape = rv.shape();
    let rhs = identity(shape.m, shape.p)?.add(&rv.mean()?.scale_real(t.exp_m1()))?;
    let slack = spectral::loewner_slack(&lhs, &rhs)?;
    Ok(LemmaCheckResult::single("chernoff-mgf", slack, ORDER_TOL, || {
        format!("# t = {t}\n{}", render_rv(rv))
    }))
}

/// `E exp(t X) <= exp((e^t - t - 1) E X^2)` for centered `X` with `lambda_max <= 1`, `t > 0`.
pub fn check_bounded_bernstein_mgf(rv: &FiniteSupportTensorRV, t: f64) -> Result<LemmaCheckResult> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    rv.check_hermitian()?;
    ensure_centered(rv)?;
    ensure_lambda_max_at_most_one(rv, false)?;
    let lhs = rv.expectation_with(|x| expm(&x.scale_real(t)))?;
    let second = rv.expectation_with(square)?;
    let rhs = expm(&second.scale_real(t.exp() - t - 1.0))?;
    let slack = spectral::loewner_slack(&lhs, &rhs)?;
    Ok(LemmaCheckResult::single("bounded-bernstein-mgf", slack, ORDER_TOL, || {
        format!("# t = {t}\n{}", render_rv(rv))
    }))
}

/// Highest moment order checked for the subexponential moment condition.
pub const MOMENT_ORDER_CHECKED: u32 = 6;

/// `E exp(t X) <= exp(t^2 A^2 / (2 (1 - t)))` for `0 < t < 1` when `X` is
/// centered and `E X^k <= k! A^2 / 2`; the moment condition is verified for
/// `k = 2..=6`.
pub fn check_subexp_bernstein_mgf(rv: &FiniteSupportTensorRV, t: f64, a_cap: &DenseTensor3) -> Result<LemmaCheckResult> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("t = {t} must lie in (0, 1)")));
    }
    rv.check_hermitian()?;
    ensure_hermitian(a_cap)?;
    ensure_centered(rv)?;
    let a2 = square(a_cap)?;
    for k in 2..=MOMENT_ORDER_CHECKED {
        let moment = rv.expectation_with(|x| x.t_power(k))?;
        let kfact: f64 = (1..=k).map(f64::from).product();
        let bound = a2.scale_real(kfact / 2.0);
        let slack = spectral::loewner_slack(&moment, &bound)?;
        if slack < -ORDER_TOL {
            return Err(Error::Hypothesis {
                context: format!("moment condition at k = {k}"),
                witness: format!("lambda_min(k! A^2 / 2 - E X^k) slack {slack}"),
            });
        }
    }
    let lhs = rv.expectation_with(|x| expm(&x.scale_real(t)))?;
    let rhs = expm(&a2.scale_real(t * t / (2.0 * (1.0 - t))))?;
    let slack = spectral::loewner_slack(&lhs, &rhs)?;
    Ok(LemmaCheckResult::single("subexp-bernstein-mgf", slack, ORDER_TOL, || {
        format!("# t = {t}\n{}{}", render_rv(rv), render_all(&[("a_cap", a_cap)]))
    }))
}

/// `E Tr exp(A + X) <= E Tr exp(A + 2 beta X)` for centered `X` and Rademacher `beta`.
pub fn check_symmetrization(a_fixed: &DenseTensor3, rv: &FiniteSupportTensorRV) -> Result<LemmaCheckResult> {
    ensure_hermitian(a_fixed)?;
    rv.check_hermitian()?;
    ensure_centered(rv)?;
    let lhs = rv.expect_scalar(|x| tr(&expm(&a_fixed.add(x)?)?))?;
    let rhs = rv.expect_scalar(|x| {
        let x2 = x.scale_real(2.0);
        Ok(0.5 * (tr(&expm(&a_fixed.add(&x2)?)?)? + tr(&expm(&a_fixed.sub(&x2)?)?)?))
    })?;
    Ok(LemmaCheckResult::single("symmetrization", trace_slack(lhs, rhs), TRACE_TOL, || {
        format!("{}{}", render_all(&[("a", a_fixed)]), render_rv(rv))
    }))
}

/// `log E[exp(2 beta t X) | X] <= 2 t^2 A^2` when `X^2 <= A^2`.
pub fn check_cgf_symmetrized(x_fixed: &DenseTensor3, a_cap: &DenseTensor3, t: f64) -> Result<LemmaCheckResult> {
    ensure_hermitian(x_fixed)?;
    ensure_hermitian(a_cap)?;
    let a2 = square(a_cap)?;
    let pre = spectral::loewner_slack(&square(x_fixed)?, &a2)?;
    if pre < -ORDER_TOL {
        return Err(Error::Hypothesis {
            context: "X^2 <= A^2".into(),
            witness: format!("slack {pre}"),
        });
    }
    let mgf = FiniteSupportTensorRV::symmetric_pair(x_fixed.scale_real(2.0 * t)).exact_expectation(SpectralFn::Exp)?;
    let lhs = logm(&mgf)?;
    let rhs = a2.scale_real(2.0 * t * t);
    let slack = spectral::loewner_slack(&lhs, &rhs)?;
    Ok(LemmaCheckResult::single("cgf-symmetrized", slack, ORDER_TOL, || {
        format!("# t = {t}\n{}", render_all(&[("x", x_fixed), ("a_cap", a_cap)]))
    }))
}

/// `E Tr exp(A + X) <= Tr exp(A + log E exp(X))`.
pub fn check_trace_mgf_bound(a_fixed: &DenseTensor3, rv: &FiniteSupportTensorRV) -> Result<LemmaCheckResult> {
    ensure_hermitian(a_fixed)?;
    rv.check_hermitian()?;
    let lhs = rv.expect_scalar(|x| tr(&expm(&a_fixed.add(x)?)?))?;
    let log_mgf = logm(&rv.exact_expectation(SpectralFn::Exp)?)?;
    let rhs = tr(&expm(&a_fixed.add(&log_mgf)?)?)?;
    Ok(LemmaCheckResult::single("trace-mgf-bound", trace_slack(lhs, rhs), TRACE_TOL, || {
        format!("{}{}", render_all(&[("a", a_fixed)]), render_rv(rv))
    }))
}

/// Per-atom eigenvalues and log-probabilities, for `log E Tr exp(t X)`.
struct SpectralLaw {
    atoms: Vec<(Vec<f64>, f64)>,
    p: usize,
}

impl SpectralLaw {
    fn new(rv: &FiniteSupportTensorRV) -> Result<Self> {
        let atoms = rv
            .atoms()
            .iter()
            .filter(|(_, prob)| *prob > 0.0)
            .map(|(t, prob)| {
                let spec = spectral::eig_hermitian(t)?;
                Ok((spec.all_values().collect(), prob.ln()))
            })
            .collect::<Result<_>>()?;
        Ok(Self { atoms, p: rv.shape().p })
    }

    /// `log E Tr exp(t X)`.
    fn log_mgf_trace(&self, t: f64) -> f64 {
        let terms = self
            .atoms
            .iter()
            .flat_map(|(eigs, lp)| eigs.iter().map(move |l| lp + t * l));
        spectral::log_sum_exp(terms.collect::<Vec<_>>().into_iter())
    }

    /// First grid `t` at which some atom of `t X` fails the eigentuple condition.
    fn eigentuple_condition_first_failure(&self, grid: &[f64]) -> Option<f64> {
        grid.iter().copied().find(|&t| {
            self.atoms.iter().any(|(eigs, _)| {
                !spectral::eigentuple_condition_from(eigs.iter().map(|l| t * l), self.p).holds
            })
        })
    }
}

fn eq1_note(first: Option<f64>) -> Option<String> {
    Some(match first {
        Some(t) => format!("eigentuple condition first fails at t = {t}"),
        None => "eigentuple condition holds on the whole t grid".to_string(),
    })
}

/// `Pr(lambda_max(X) >= theta) <= inf_t e^{-theta t} E Tr exp(t X)`, infimum over `grid`.
pub fn check_laplace_eigenvalue(rv: &FiniteSupportTensorRV, theta: f64, grid: &[f64]) -> Result<LemmaCheckResult> {
    rv.check_hermitian()?;
    let prob = rv.probability(|x| Ok(spectral::lambda_max(x)? >= theta))?;
    let law = SpectralLaw::new(rv)?;
    let log_rhs = grid
        .iter()
        .map(|&t| law.log_mgf_trace(t) - theta * t)
        .fold(f64::INFINITY, f64::min);
    let slack = log_rhs.exp() - prob;
    Ok(LemmaCheckResult::single("laplace-eigenvalue", slack, PROBABILITY_TOL, || {
        format!("# theta = {theta}\n{}", render_rv(rv))
    }))
}

/// `Pr(d_max(X) >= b) <= inf_t min_i E Tr exp(t X) / e^{t b_i}`, infimum over `grid`.
/// The note records the first `t` at which the eigentuple condition fails.
pub fn check_laplace_eigentuple(rv: &FiniteSupportTensorRV, b: &[f64], grid: &[f64]) -> Result<LemmaCheckResult> {
    rv.check_hermitian()?;
    let threshold = Threshold::vector(b.to_vec())?;
    let prob = rv.probability(|x| Ok(spectral::d_max(x)?.dominates(b)))?;
    let law = SpectralLaw::new(rv)?;
    let top = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_rhs = grid
        .iter()
        .map(|&t| law.log_mgf_trace(t) - t * top)
        .fold(f64::INFINITY, f64::min);
    let slack = log_rhs.exp() - prob;
    Ok(LemmaCheckResult::single("laplace-eigentuple", slack, PROBABILITY_TOL, || {
        format!("# b = {threshold}\n{}", render_rv(rv))
    })
    .with_note(eq1_note(law.eigentuple_condition_first_failure(grid))))
}

/// Exact tail of the sum of independent summands at a scalar (`lambda_max`)
/// or vector (`d_max`, entrywise) threshold, with the log-scale offset
/// `theta` or `max b` used by the master bounds.
fn sum_tail(sum: &FiniteSupportTensorRV, threshold: &Threshold) -> Result<(f64, f64)> {
    match threshold {
        Threshold::Scalar(theta) => Ok((sum.probability(|x| Ok(spectral::lambda_max(x)? >= *theta))?, *theta)),
        Threshold::Vector { b, .. } => {
            let top = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok((sum.probability(|x| Ok(spectral::d_max(x)?.dominates(b)))?, top))
        }
    }
}

fn master_id(base: &str, threshold: &Threshold) -> String {
    if threshold.is_vector() {
        format!("{base}-eigentuple")
    } else {
        base.to_string()
    }
}

/// Master bound from a cumulant condition `f(t) A_i >= log E exp(t X_i)`:
/// `Pr <= mp inf_t exp(-t theta + f(t) lambda_max(sum A_i))`; with a vector
/// threshold the event is `d_max >= b` and `theta` becomes `max_j b_j`.
/// The condition is verified at every grid point.
pub fn check_master_bound_cgf(
    summands: &[FiniteSupportTensorRV],
    f: impl Fn(f64) -> f64,
    a_list: &[DenseTensor3],
    threshold: &Threshold,
    grid: &[f64],
) -> Result<LemmaCheckResult> {
    let id = master_id("master-bound-cgf", threshold);
    if summands.len() != a_list.len() || summands.is_empty() {
        return Err(Error::LengthMismatch {
            expected: summands.len(),
            actual: a_list.len(),
        });
    }
    // logm of E e^{tX} loses the small eigenvalues once e^{2t|X|} eps is not small;
    // the infimum runs only over grid points where the condition can be checked
    let spread = summands
        .iter()
        .flat_map(|x| x.atoms().iter().map(|(y, _)| spectral::spectral_norm(y)))
        .fold(0.0, f64::max);
    let grid: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|t| 2.0 * t * spread <= CGF_CONDITION_LIMIT)
        .collect();
    for &t in &grid {
        for (i, (x, a)) in summands.iter().zip(a_list).enumerate() {
            let cgf = logm(&x.expectation_with(|y| expm(&y.scale_real(t)))?)?;
            let slack = spectral::loewner_slack(&cgf, &a.scale_real(f(t)))?;
            if slack < -ORDER_TOL {
                return Err(Error::Hypothesis {
                    context: format!("cumulant condition for summand {} at t = {t}", i + 1),
                    witness: format!("slack {slack}"),
                });
            }
        }
    }
    let sum = FiniteSupportTensorRV::sum_of_independent(summands)?;
    let (prob, level) = sum_tail(&sum, threshold)?;
    let shape = sum.shape();
    let mp = (shape.m * shape.p) as f64;
    let lam = spectral::lambda_max(&DenseTensor3::sum(a_list.iter())?.expect("nonempty"))?;
    let log_rhs = grid
        .iter()
        .map(|&t| -t * level + f(t) * lam)
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);
    let slack = mp * log_rhs.exp() - prob;
    let note = if threshold.is_vector() {
        eq1_note(SpectralLaw::new(&sum)?.eigentuple_condition_first_failure(&grid))
    } else {
        None
    };
    Ok(LemmaCheckResult::single(&id, slack, PROBABILITY_TOL, || {
        format!("# threshold = {threshold}\n{}", render_rv(&sum))
    })
    .with_note(note))
}

/// Master bound from the summands' MGFs:
/// `Pr <= mp inf_t exp(-t theta + n log lambda_max((1/n) sum_i E exp(t X_i)))`.
pub fn check_master_bound_mgf(
    summands: &[FiniteSupportTensorRV],
    threshold: &Threshold,
    grid: &[f64],
) -> Result<LemmaCheckResult> {
    let id = master_id("master-bound-mgf", threshold);
    let sum = FiniteSupportTensorRV::sum_of_independent(summands)?;
    let (prob, level) = sum_tail(&sum, threshold)?;
    let shape = sum.shape();
    let mp = (shape.m * shape.p) as f64;
    let n = summands.len() as f64;
    let mut log_rhs = f64::INFINITY;
    for &t in grid {
        let mut avg = DenseTensor3::zeros(shape);
        for x in summands {
            avg = avg.add(&x.expectation_with(|y| expm(&y.scale_real(t)))?)?;
        }
        let lam = spectral::lambda_max(&avg.scale_real(1.0 / n))?;
        let v = -t * level + n * lam.ln();
        if v.is_finite() {
            log_rhs = log_rhs.min(v);
        }
    }
    let slack = mp * log_rhs.exp() - prob;
    let note = if threshold.is_vector() {
        eq1_note(SpectralLaw::new(&sum)?.eigentuple_condition_first_failure(grid))
    } else {
        None
    };
    Ok(LemmaCheckResult::single(&id, slack, PROBABILITY_TOL, || {
        format!("# threshold = {threshold}\n{}", render_rv(&sum))
    })
    .with_note(note))
}

/// Default `t` grid for Laplace-type checks.
pub fn default_grid() -> Vec<f64> {
    t_grid()
}
