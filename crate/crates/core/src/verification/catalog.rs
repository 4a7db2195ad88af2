//! Shipped ensembles, domination experiments and the lemma suite.

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{evaluate, BoundQuery, HadamardMode, TheoremId, Threshold};
use crate::ensembles::{
    BoundedTpsdSpec, CenteredBoundedSpec, EigenLaw, Ensemble, FiniteSupportTensorRV, HadamardGaussianSpec,
    McDiarmidSpec, MartingaleSpec, MultiplierKind, SeedSpec, SeriesSpec, TrialRng, VariableKind,
};
use crate::error::{Error, Result};
use crate::spectral::{self, sqrtm};
use crate::tensor::{DenseTensor3, TensorShape};
use crate::verification::domination::{run_domination, DominationReport};
use crate::verification::lemmas::{self, LemmaCheckResult, LEMMA_IDS};
use crate::verification::{linear_grid, random_hermitian, random_tpsd, t_grid};

/// Parameters of a bounded TPSD ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TpsdParams {
    pub n_sum: usize,
    pub m: usize,
    pub p: usize,
    pub t_cap: f64,
    pub law: EigenLaw,
    pub weights: Vec<f64>,
    pub construction_seed: u64,
}

impl TpsdParams {
    fn build(&self) -> Result<BoundedTpsdSpec> {
        BoundedTpsdSpec::with_weights(
            self.n_sum,
            self.m,
            self.p,
            self.t_cap,
            self.law,
            self.weights.clone(),
            SeedSpec::new(self.construction_seed),
        )
    }
}

/// Declarative description of a random tensor ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Series {
        kind: VariableKind,
        coefficients: Vec<DenseTensor3>,
        rectangular: bool,
    },
    /// Sum (or average) of i.i.d. bounded TPSD summands.
    BoundedTpsd { params: TpsdParams, average: bool },
    /// Sum of centered bounded summands.
    CenteredBounded { params: TpsdParams },
    Martingale {
        kind: MultiplierKind,
        caps: Vec<DenseTensor3>,
    },
    McDiarmid { terms: Vec<DenseTensor3> },
    Hadamard { pattern: DenseTensor3, mode: HadamardMode },
}

impl EnsembleSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnsembleSpec::Series { rectangular: false, .. } => "series",
            EnsembleSpec::Series { rectangular: true, .. } => "rectangular-series",
            EnsembleSpec::BoundedTpsd { .. } => "bounded-tpsd",
            EnsembleSpec::CenteredBounded { .. } => "centered-bounded",
            EnsembleSpec::Martingale { .. } => "martingale",
            EnsembleSpec::McDiarmid { .. } => "mcdiarmid",
            EnsembleSpec::Hadamard { .. } => "hadamard",
        }
    }

    pub fn build(&self) -> Result<BuiltEnsemble> {
        let nonempty = |v: &[DenseTensor3], what: &str| {
            if v.is_empty() {
                Err(Error::invalid(format!("{what} list is empty")))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            EnsembleSpec::Series {
                kind,
                coefficients,
                rectangular,
            } => {
                nonempty(coefficients, "coefficient")?;
                let spec = if *rectangular {
                    SeriesSpec::rectangular(coefficients.clone(), *kind)?
                } else {
                    SeriesSpec::hermitian(coefficients.clone(), *kind)?
                };
                BuiltEnsemble::Series(spec)
            }
            EnsembleSpec::BoundedTpsd { params, average } => {
                let spec = params.build()?;
                BuiltEnsemble::Bounded(if *average { spec.averaged() } else { spec })
            }
            EnsembleSpec::CenteredBounded { params } => BuiltEnsemble::Centered(CenteredBoundedSpec::new(params.build()?)?),
            EnsembleSpec::Martingale { kind, caps } => {
                nonempty(caps, "cap")?;
                BuiltEnsemble::Martingale(MartingaleSpec::new(caps.clone(), *kind)?)
            }
            EnsembleSpec::McDiarmid { terms } => {
                nonempty(terms, "term")?;
                BuiltEnsemble::McDiarmid(McDiarmidSpec::new(terms.clone())?)
            }
            EnsembleSpec::Hadamard { pattern, mode } => {
                BuiltEnsemble::Hadamard(HadamardGaussianSpec::new(pattern.clone(), *mode))
            }
        })
    }
}

/// A constructed ensemble that knows its own hypothesis parameters.
#[derive(Debug, Clone)]
pub enum BuiltEnsemble {
    Series(SeriesSpec),
    Bounded(BoundedTpsdSpec),
    Centered(CenteredBoundedSpec),
    Martingale(MartingaleSpec),
    McDiarmid(McDiarmidSpec),
    Hadamard(HadamardGaussianSpec),
}

impl BuiltEnsemble {
    fn inner(&self) -> &dyn Ensemble {
        match self {
            BuiltEnsemble::Series(s) => s,
            BuiltEnsemble::Bounded(s) => s,
            BuiltEnsemble::Centered(s) => s,
            BuiltEnsemble::Martingale(s) => s,
            BuiltEnsemble::McDiarmid(s) => s,
            BuiltEnsemble::Hadamard(s) => s,
        }
    }

    /// Bound parameters for theorem `id`, with a zero scalar threshold.
    /// Fails when the ensemble does not satisfy that theorem's hypotheses.
    pub fn base_query(&self, id: TheoremId) -> Result<BoundQuery> {
        use TheoremId::*;
        let shape = self.shape();
        let q = BoundQuery::scalar(shape.m, shape.p, 0.0);
        let family = id.scalar_counterpart();
        let mismatch = || {
            Error::invalid(format!(
                "{} ensemble does not satisfy the hypotheses of {id}",
                self.name()
            ))
        };
        match self {
            BuiltEnsemble::Series(s) if s.is_hermitian() => match family {
                GaussianSeries | GaussianSeriesNorm => Ok(q.with_sigma2(s.sigma2())),
                _ => Err(mismatch()),
            },
            BuiltEnsemble::Series(s) => match family {
                RectangularSeries => Ok(q.with_cols(shape.n).with_sigma2(s.sigma2())),
                _ => Err(mismatch()),
            },
            BuiltEnsemble::Hadamard(h) => match family {
                HadamardGaussian => Ok(q.with_cols(shape.n).with_sigma2(h.sigma2())),
                _ => Err(mismatch()),
            },
            BuiltEnsemble::Bounded(b) => match family {
                Chernoff1Upper | Chernoff1Lower => {
                    if !b.average || b.t_cap > 1.0 {
                        return Err(Error::invalid(format!(
                            "{id} needs an averaged ensemble with T <= 1"
                        )));
                    }
                    Ok(q.with_n_sum(b.n_sum)
                        .with_mu_bar_max(b.mu_bar_max())
                        .with_mu_bar_min(b.mu_bar_min()))
                }
                Chernoff2Upper | Chernoff2Lower => {
                    if b.average {
                        return Err(Error::invalid(format!("{id} needs an unaveraged sum")));
                    }
                    Ok(q.with_n_sum(b.n_sum)
                        .with_t_cap(b.t_cap)
                        .with_mu_max(b.mu_max())
                        .with_mu_min(b.mu_min()))
                }
                _ => Err(mismatch()),
            },
            BuiltEnsemble::Centered(c) => {
                let q = q.with_n_sum(c.base().n_sum).with_sigma2(c.sigma2());
                match family {
                    BernsteinBounded | BernsteinBoundedSubgaussRegime | BernsteinBoundedSubexpRegime => {
                        Ok(q.with_t_cap(c.bounded_t()))
                    }
                    BernsteinSubexp | BernsteinSubexpSubgaussRegime | BernsteinSubexpSubexpRegime => {
                        Ok(q.with_t_cap(c.subexp_t()))
                    }
                    _ => Err(mismatch()),
                }
            }
            BuiltEnsemble::Martingale(s) => match family {
                Azuma => Ok(q.with_sigma2(s.sigma2())),
                _ => Err(mismatch()),
            },
            BuiltEnsemble::McDiarmid(s) => match family {
                McDiarmid => Ok(q.with_sigma2(s.sigma2())),
                _ => Err(mismatch()),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltEnsemble::Series(s) if s.is_hermitian() => "series",
            BuiltEnsemble::Series(_) => "rectangular-series",
            BuiltEnsemble::Bounded(_) => "bounded-tpsd",
            BuiltEnsemble::Centered(_) => "centered-bounded",
            BuiltEnsemble::Martingale(_) => "martingale",
            BuiltEnsemble::McDiarmid(_) => "mcdiarmid",
            BuiltEnsemble::Hadamard(_) => "hadamard",
        }
    }
}

impl Ensemble for BuiltEnsemble {
    fn shape(&self) -> TensorShape {
        self.inner().shape()
    }

    fn draw(&self, rng: &mut TrialRng) -> Result<DenseTensor3> {
        self.inner().draw(rng)
    }
}

/// One theorem against one ensemble over a threshold grid.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub theorem_id: TheoremId,
    pub ensemble: EnsembleSpec,
    pub grid: Vec<Threshold>,
    pub trials: u64,
    pub alpha: f64,
}

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Smallest raw bound kept on shipped grids; with zero hits in `10^4`
/// trials at `alpha = 0.01` the upper limit is about `4.6e-4`.
pub const GRID_FLOOR: f64 = 1e-3;
const GRID_POINTS: usize = 10;
const CONSTRUCTION_SEED: u64 = 0x7e45_0a11;

impl Experiment {
    pub fn run(&self, seed: SeedSpec) -> Result<DominationReport> {
        let built = self.ensemble.build()?;
        let base = built.base_query(self.theorem_id)?;
        run_domination(self.theorem_id, &built, &base, &self.grid, self.trials, self.alpha, seed)
    }
}

/// Largest sub-interval of `[lo, hi]` on which a monotone `f` stays at or above `floor`.
fn floor_range(f: impl Fn(f64) -> f64, lo: f64, hi: f64, floor: f64) -> Option<(f64, f64)> {
    let decreasing = f(lo) >= f(hi);
    let (good, bad) = if decreasing { (lo, hi) } else { (hi, lo) };
    if f(good) < floor {
        return None;
    }
    if f(bad) >= floor {
        return Some((lo, hi));
    }
    let (mut g, mut b) = (good, bad);
    for _ in 0..200 {
        let mid = 0.5 * (g + b);
        if f(mid) >= floor {
            g = mid;
        } else {
            b = mid;
        }
    }
    Some(if decreasing { (lo, g) } else { (g, hi) })
}

/// Evenly spaced thresholds on `[lo, hi]`, trimmed to where the raw bound is at least [`GRID_FLOOR`].
/// Vector thresholds are `theta * (1, 1.25, 1.5, ...)`, so their minimum entry is `theta`.
pub fn threshold_grid(id: TheoremId, base: &BoundQuery, lo: f64, hi: f64, n: usize) -> Result<Vec<Threshold>> {
    let to_threshold = |theta: f64| -> Result<Threshold> {
        if id.takes_vector_threshold() {
            Threshold::vector((0..base.p).map(|j| theta * (1.0 + 0.25 * j as f64)).collect())
        } else {
            Ok(Threshold::Scalar(theta))
        }
    };
    let bound_at = |theta: f64| {
        to_threshold(theta)
            .and_then(|t| evaluate(id, &base.clone().with_threshold(t)))
            .map(|b| b.value)
            .unwrap_or(f64::NAN)
    };
    // eigentuple bounds need a strictly positive vector
    let lo = if id.takes_vector_threshold() { lo.max(1e-2 * hi) } else { lo };
    let (lo, hi) = floor_range(bound_at, lo, hi, GRID_FLOOR)
        .ok_or_else(|| Error::invalid(format!("no threshold in [{lo}, {hi}] keeps {id} above {GRID_FLOOR}")))?;
    linear_grid(lo, hi, n).into_iter().map(to_threshold).collect()
}

fn random_list(count: usize, m: usize, p: usize, scale: f64, rng: &mut TrialRng) -> Result<Vec<DenseTensor3>> {
    (0..count).map(|_| random_hermitian(m, p, scale, rng)).collect()
}

fn random_rectangular(count: usize, shape: TensorShape, rng: &mut TrialRng) -> Vec<DenseTensor3> {
    use rand_distr::StandardNormal;
    (0..count)
        .map(|_| {
            DenseTensor3::from_fn(shape, |_, _, _| {
                num_complex::Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .scale_real(0.5)
        })
        .collect()
}

/// Ensembles shipped with the library, keyed by name.
pub fn shipped_ensembles() -> Result<Vec<(&'static str, EnsembleSpec)>> {
    let seed = SeedSpec::new(CONSTRUCTION_SEED);
    let mut rng = seed.construction_rng();
    let tpsd = |n_sum: usize, law: EigenLaw, weights: Vec<f64>| TpsdParams {
        n_sum,
        m: 2,
        p: 2,
        t_cap: 1.0,
        law,
        weights,
        construction_seed: CONSTRUCTION_SEED,
    };
    let pattern = DenseTensor3::from_real_fn(TensorShape::new(2, 3, 2)?, |_, _, _| 0.5 + rng.random::<f64>());
    Ok(vec![
        (
            "gaussian-series-2x2x2",
            EnsembleSpec::Series {
                kind: VariableKind::Gaussian,
                coefficients: random_list(3, 2, 2, 1.0, &mut rng)?,
                rectangular: false,
            },
        ),
        (
            "rademacher-series-2x2x2",
            EnsembleSpec::Series {
                kind: VariableKind::Rademacher,
                coefficients: random_list(6, 2, 2, 0.5, &mut rng)?,
                rectangular: false,
            },
        ),
        (
            "gaussian-rectangular-2x3x2",
            EnsembleSpec::Series {
                kind: VariableKind::Gaussian,
                coefficients: random_rectangular(3, TensorShape::new(2, 3, 2)?, &mut rng),
                rectangular: true,
            },
        ),
        (
            "hadamard-2x3x2",
            EnsembleSpec::Hadamard {
                pattern,
                mode: HadamardMode::AllSlices,
            },
        ),
        (
            "tpsd-average-10",
            EnsembleSpec::BoundedTpsd {
                params: tpsd(10, EigenLaw::Uniform, vec![1.0, 0.6]),
                average: true,
            },
        ),
        (
            "tpsd-sum-10",
            EnsembleSpec::BoundedTpsd {
                params: tpsd(10, EigenLaw::Uniform, vec![1.0, 0.6]),
                average: false,
            },
        ),
        (
            "centered-bernoulli-10",
            EnsembleSpec::CenteredBounded {
                params: tpsd(10, EigenLaw::Bernoulli(0.3), vec![1.0, 0.6]),
            },
        ),
        (
            "centered-bernoulli-3",
            EnsembleSpec::CenteredBounded {
                params: tpsd(3, EigenLaw::Bernoulli(0.3), vec![1.0, 0.6]),
            },
        ),
        (
            "adapted-martingale-8",
            EnsembleSpec::Martingale {
                kind: MultiplierKind::Adapted,
                caps: random_list(8, 2, 2, 0.5, &mut rng)?,
            },
        ),
        (
            "mcdiarmid-6",
            EnsembleSpec::McDiarmid {
                terms: random_list(6, 2, 2, 0.5, &mut rng)?,
            },
        ),
    ])
}

/// Threshold range `[lo, hi]` for theorem `id` on a built ensemble.
fn natural_range(id: TheoremId, q: &BoundQuery) -> (f64, f64) {
    use TheoremId::*;
    let s = q.sigma2.sqrt();
    let boundary = q.sigma2 / q.t_cap;
    match id.scalar_counterpart() {
        Chernoff1Upper => {
            let mu = q.mu_bar_max.unwrap_or(0.0);
            if id.is_eigentuple() {
                // b_j / n must lie in [mu_bar_max, 1]
                (q.n_sum as f64 * mu, q.n_sum as f64)
            } else {
                (mu, 1.0)
            }
        }
        Chernoff1Lower => {
            let mu = q.mu_bar_min.unwrap_or(0.0);
            if id.is_eigentuple() {
                (0.0, q.n_sum as f64 * mu)
            } else {
                (0.0, mu)
            }
        }
        Chernoff2Upper => (0.0, 4.0),
        Chernoff2Lower => (0.0, 1.0),
        BernsteinBoundedSubgaussRegime | BernsteinSubexpSubgaussRegime => (0.0, boundary),
        BernsteinBoundedSubexpRegime | BernsteinSubexpSubexpRegime => (boundary, boundary + 40.0 * q.t_cap),
        _ => (0.0, 12.0 * s.max(q.t_cap)),
    }
}

/// One experiment per theorem and shipped ensemble, covering every eigenvalue
/// and eigentuple form.
pub fn shipped_experiments() -> Result<Vec<Experiment>> {
    use TheoremId::*;
    let ensembles = shipped_ensembles()?;
    let plan: Vec<(&str, Vec<TheoremId>)> = vec![
        (
            "gaussian-series-2x2x2",
            vec![GaussianSeries, GaussianSeriesNorm, GaussianSeriesEigentuple, GaussianSeriesVecNorm],
        ),
        ("rademacher-series-2x2x2", vec![GaussianSeries, GaussianSeriesEigentuple]),
        ("gaussian-rectangular-2x3x2", vec![RectangularSeries, RectangularSeriesEigentuple]),
        ("hadamard-2x3x2", vec![HadamardGaussian, HadamardGaussianEigentuple]),
        (
            "tpsd-average-10",
            vec![Chernoff1Upper, Chernoff1Lower, Chernoff1EigentupleUpper, Chernoff1EigentupleLower],
        ),
        (
            "tpsd-sum-10",
            vec![Chernoff2Upper, Chernoff2Lower, Chernoff2EigentupleUpper, Chernoff2EigentupleLower],
        ),
        (
            "centered-bernoulli-10",
            vec![
                BernsteinBounded,
                BernsteinBoundedSubgaussRegime,
                BernsteinBoundedSubexpRegime,
                BernsteinBoundedEigentuple,
                BernsteinBoundedEigentupleSubgaussRegime,
                BernsteinBoundedEigentupleSubexpRegime,
            ],
        ),
        (
            "centered-bernoulli-3",
            vec![
                BernsteinSubexp,
                BernsteinSubexpSubgaussRegime,
                BernsteinSubexpSubexpRegime,
                BernsteinSubexpEigentuple,
                BernsteinSubexpEigentupleSubgaussRegime,
                BernsteinSubexpEigentupleSubexpRegime,
            ],
        ),
        ("adapted-martingale-8", vec![Azuma, AzumaEigentuple]),
        ("mcdiarmid-6", vec![McDiarmid, McDiarmidEigentuple]),
    ];
    let mut out = Vec::new();
    for (name, ids) in plan {
        let spec = &ensembles
            .iter()
            .find(|(n, _)| *n == name)
            .expect("plan names a shipped ensemble")
            .1;
        let built = spec.build()?;
        for id in ids {
            let base = built.base_query(id)?;
            let (lo, hi) = natural_range(id, &base);
            out.push(Experiment {
                name: format!("{id}@{name}"),
                theorem_id: id,
                ensemble: spec.clone(),
                grid: threshold_grid(id, &base, lo, hi, GRID_POINTS)?,
                trials: DEFAULT_TRIALS,
                alpha: DEFAULT_ALPHA,
            });
        }
    }
    Ok(out)
}

fn lemma_rng(seed: SeedSpec, lemma: &str) -> TrialRng {
    let idx = LEMMA_IDS.iter().position(|l| *l == lemma).expect("known lemma") as u64;
    seed.rng_for_trial(1 << 40 | idx)
}

/// Centered finite-support law with `atoms` atoms of spectral norm at most one.
fn random_centered(atoms: usize, m: usize, p: usize, rng: &mut TrialRng) -> Result<FiniteSupportTensorRV> {
    let raw: Vec<f64> = (0..atoms).map(|_| 0.2 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let ys = random_list(atoms, m, p, 1.0, rng)?;
    let mean = DenseTensor3::linear_combination(&probs, &ys)?;
    let xs: Vec<DenseTensor3> = ys.iter().map(|y| y.sub(&mean)).collect::<Result<_>>()?;
    let top = xs.iter().map(spectral::spectral_norm).fold(0.0, f64::max);
    let scale = rng.random_range(0.3..1.0) / top.max(1e-300);
    FiniteSupportTensorRV::new(xs.into_iter().map(|x| x.scale_real(scale)).zip(probs).collect())
}

fn random_tpsd_rv(atoms: usize, m: usize, p: usize, rng: &mut TrialRng) -> Result<FiniteSupportTensorRV> {
    let raw: Vec<f64> = (0..atoms).map(|_| 0.2 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut out = Vec::with_capacity(atoms);
    for w in raw {
        let top = rng.random_range(0.05..1.0);
        out.push((random_tpsd(m, p, top, rng)?, w / total));
    }
    FiniteSupportTensorRV::new(out)
}

fn random_arbitrary_rv(atoms: usize, m: usize, p: usize, rng: &mut TrialRng) -> Result<FiniteSupportTensorRV> {
    let raw: Vec<f64> = (0..atoms).map(|_| 0.2 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut out = Vec::with_capacity(atoms);
    for w in raw {
        let s = rng.random_range(0.2..2.0);
        out.push((random_hermitian(m, p, s, rng)?, w / total));
    }
    FiniteSupportTensorRV::new(out)
}

const LEMMA_INSTANCES: usize = 100;

fn check_lemma(lemma: &str, seed: SeedSpec) -> Result<LemmaCheckResult> {
    let mut rng = lemma_rng(seed, lemma);
    let rng = &mut rng;
    let mut results = Vec::new();
    let rademacher_grid = linear_grid(0.1, 2.0, 20);
    let grid = t_grid();
    match lemma {
        "golden-thompson" => {
            for (m, p) in [(2, 3), (3, 2)] {
                for _ in 0..LEMMA_INSTANCES {
                    let c = random_hermitian(m, p, rng.random_range(0.1..3.0), rng)?;
                    let d = random_hermitian(m, p, rng.random_range(0.1..3.0), rng)?;
                    results.push(lemmas::check_golden_thompson(&c, &d)?);
                }
            }
        }
        "mgf-gaussian" => {
            for _ in 0..LEMMA_INSTANCES {
                let a = random_hermitian(2, 2, rng.random_range(0.2..1.5), rng)?;
                for t in [0.0, 0.35, 0.7, 1.0] {
                    results.push(lemmas::check_mgf_gaussian(&a, t)?);
                }
            }
        }
        "mgf-rademacher" => {
            for _ in 0..LEMMA_INSTANCES {
                let a = random_hermitian(2, 2, rng.random_range(0.2..2.0), rng)?;
                for &t in &rademacher_grid {
                    results.push(lemmas::check_mgf_rademacher(&a, t)?);
                }
            }
        }
        "chernoff-mgf" => {
            for _ in 0..LEMMA_INSTANCES {
                let rv = random_tpsd_rv(3, 2, 2, rng)?;
                for t in [0.3, 1.0, 2.0] {
                    results.push(lemmas::check_chernoff_mgf(&rv, t)?);
                }
            }
        }
        "bounded-bernstein-mgf" => {
            for _ in 0..LEMMA_INSTANCES {
                let rv = random_centered(3, 2, 2, rng)?;
                for t in [0.3, 1.0, 2.0] {
                    results.push(lemmas::check_bounded_bernstein_mgf(&rv, t)?);
                }
            }
        }
        "subexp-bernstein-mgf" => {
            for _ in 0..LEMMA_INSTANCES {
                // spectral norm <= 1 gives E X^k <= E X^2 <= k! E X^2 / 2
                let rv = random_centered(3, 2, 2, rng)?;
                let a_cap = sqrtm(&rv.expectation_with(|x| x.t_product(x))?)?;
                for t in [0.1, 0.5, 0.9] {
                    results.push(lemmas::check_subexp_bernstein_mgf(&rv, t, &a_cap)?);
                }
            }
        }
        "symmetrization" => {
            for _ in 0..LEMMA_INSTANCES {
                let a = random_hermitian(2, 2, rng.random_range(0.1..2.0), rng)?;
                let rv = random_centered(3, 2, 2, rng)?;
                results.push(lemmas::check_symmetrization(&a, &rv)?);
            }
        }
        "cgf-symmetrized" => {
            for _ in 0..LEMMA_INSTANCES {
                let x = random_hermitian(2, 2, rng.random_range(0.2..1.5), rng)?;
                let stretch = rng.random_range(1.0..1.5);
                for a in [x.clone(), x.scale_real(stretch)] {
                    for t in [0.1, 0.5, 1.0] {
                        results.push(lemmas::check_cgf_symmetrized(&x, &a, t)?);
                    }
                }
            }
        }
        "trace-mgf-bound" => {
            for _ in 0..LEMMA_INSTANCES {
                let a = random_hermitian(2, 2, rng.random_range(0.1..2.0), rng)?;
                let rv = random_arbitrary_rv(3, 2, 2, rng)?;
                results.push(lemmas::check_trace_mgf_bound(&a, &rv)?);
            }
        }
        "laplace-eigenvalue" | "laplace-eigentuple" => {
            for _ in 0..20 {
                let summands: Vec<FiniteSupportTensorRV> = random_list(4, 2, 2, 0.5, rng)?
                    .into_iter()
                    .map(FiniteSupportTensorRV::symmetric_pair)
                    .collect();
                let sum = FiniteSupportTensorRV::sum_of_independent(&summands)?;
                for theta in linear_grid(-0.5, 2.5, 7) {
                    results.push(if lemma == "laplace-eigenvalue" {
                        lemmas::check_laplace_eigenvalue(&sum, theta, &grid)?
                    } else {
                        lemmas::check_laplace_eigentuple(&sum, &[theta, theta + 0.2], &grid)?
                    });
                }
            }
        }
        "master-bound-cgf" | "master-bound-cgf-eigentuple" => {
            for _ in 0..10 {
                let caps = random_list(4, 2, 2, 0.5, rng)?;
                let summands: Vec<FiniteSupportTensorRV> =
                    caps.iter().cloned().map(FiniteSupportTensorRV::symmetric_pair).collect();
                let squares: Vec<DenseTensor3> = caps.iter().map(|a| a.t_product(a)).collect::<Result<_>>()?;
                for theta in linear_grid(0.0, 2.5, 6) {
                    let threshold = if lemma == "master-bound-cgf" {
                        Threshold::Scalar(theta)
                    } else {
                        Threshold::vector(vec![theta, theta + 0.2])?
                    };
                    results.push(lemmas::check_master_bound_cgf(
                        &summands,
                        |t| t * t / 2.0,
                        &squares,
                        &threshold,
                        &grid,
                    )?);
                }
            }
        }
        "master-bound-mgf" | "master-bound-mgf-eigentuple" => {
            for i in 0..10 {
                let summands: Vec<FiniteSupportTensorRV> = if i % 2 == 0 {
                    random_list(4, 2, 2, 0.5, rng)?
                        .into_iter()
                        .map(FiniteSupportTensorRV::symmetric_pair)
                        .collect()
                } else {
                    (0..3).map(|_| random_tpsd_rv(3, 2, 2, rng)).collect::<Result<_>>()?
                };
                for theta in linear_grid(0.0, 2.5, 6) {
                    let threshold = if lemma == "master-bound-mgf" {
                        Threshold::Scalar(theta)
                    } else {
                        Threshold::vector(vec![theta, theta + 0.2])?
                    };
                    results.push(lemmas::check_master_bound_mgf(&summands, &threshold, &grid)?);
                }
            }
        }
        other => return Err(Error::invalid(format!("unknown lemma {other:?}"))),
    }
    Ok(LemmaCheckResult::aggregate(lemma, results))
}

/// Runs every lemma check (or only `filter`) on random instances derived from `seed`.
pub fn run_lemma_suite(seed: SeedSpec, filter: Option<&str>) -> Result<Vec<LemmaCheckResult>> {
    let ids: Vec<&str> = match filter {
        None => LEMMA_IDS.to_vec(),
        Some(f) if LEMMA_IDS.contains(&f) => vec![f],
        Some(f) => {
            return Err(Error::invalid(format!(
                "unknown lemma {f:?}; expected one of {}",
                LEMMA_IDS.join(", ")
            )))
        }
    };
    ids.par_iter().map(|id| check_lemma(id, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_theorem_has_a_shipped_experiment() {
        let exps = shipped_experiments().unwrap();
        for id in TheoremId::ALL {
            assert!(exps.iter().any(|e| e.theorem_id == *id), "{id} missing");
        }
        for e in &exps {
            assert!(!e.grid.is_empty(), "{}", e.name);
        }
    }

    #[test]
    fn mismatched_theorem_rejected() {
        let ens = shipped_ensembles().unwrap();
        let series = ens[0].1.build().unwrap();
        assert!(series.base_query(TheoremId::Azuma).is_err());
        assert!(series.base_query(TheoremId::GaussianSeriesEigentuple).is_ok());
    }

    #[test]
    fn floor_range_trims() {
        let (lo, hi) = floor_range(|x| (-x).exp(), 0.0, 20.0, 1e-3).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 1e3f64.ln()).abs() < 1e-9);
        assert!(floor_range(|x| (-x).exp(), 10.0, 20.0, 1e-3).is_none());
    }
}
