//! Bound-domination experiments: empirical upper confidence limits against raw bounds.

use crate::bounds::{evaluate, BoundQuery, BoundValue, TheoremId, Threshold};
use crate::ensembles::{Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::spectral::check_eigentuple_condition;
use crate::verification::tail::{count_hits, sample_statistic, Statistic, TailEstimate};
use crate::verification::{fmt_g12, t_grid};

pub const CSV_HEADER: &str = "theorem_id,threshold,trials,hits,p_hat,ci_upper,bound_raw,bound_clipped,dominated,margin";

/// Statistic whose tail the theorem bounds.
pub fn statistic_for(id: TheoremId) -> Statistic {
    use TheoremId::*;
    match id {
        GaussianSeries | Chernoff1Upper | Chernoff2Upper | BernsteinBounded | BernsteinBoundedSubgaussRegime
        | BernsteinBoundedSubexpRegime | BernsteinSubexp | BernsteinSubexpSubgaussRegime
        | BernsteinSubexpSubexpRegime | Azuma | McDiarmid => Statistic::LambdaMax,
        GaussianSeriesNorm | RectangularSeries | HadamardGaussian => Statistic::SpectralNorm,
        Chernoff1Lower | Chernoff2Lower => Statistic::LambdaMin,
        GaussianSeriesEigentuple | Chernoff1EigentupleUpper | Chernoff2EigentupleUpper | BernsteinBoundedEigentuple
        | BernsteinBoundedEigentupleSubgaussRegime | BernsteinBoundedEigentupleSubexpRegime
        | BernsteinSubexpEigentuple | BernsteinSubexpEigentupleSubgaussRegime
        | BernsteinSubexpEigentupleSubexpRegime | AzumaEigentuple | McDiarmidEigentuple => Statistic::DMax,
        GaussianSeriesVecNorm | RectangularSeriesEigentuple | HadamardGaussianEigentuple => Statistic::VecNorm,
        Chernoff1EigentupleLower | Chernoff2EigentupleLower => Statistic::DMin,
    }
}

/// Statistic and event level whose tail the theorem bounds, for the threshold in `q`.
pub fn tail_event(id: TheoremId, q: &BoundQuery) -> Result<(Statistic, Threshold)> {
    use TheoremId::*;
    let th = q.threshold.clone();
    if id.takes_vector_threshold() != th.is_vector() {
        return Err(Error::invalid(format!(
            "{id} takes a {} threshold",
            if id.takes_vector_threshold() { "vector" } else { "scalar" }
        )));
    }
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::invalid(format!("{name} is required for {id}")));
    let level = match id {
        Chernoff2Upper => Threshold::Scalar((1.0 + th.effective()) * need("mu_max", q.mu_max)?),
        Chernoff2Lower => Threshold::Scalar((1.0 - th.effective()) * need("mu_min", q.mu_min)?),
        Chernoff2EigentupleUpper => Threshold::constant_vector((1.0 + th.effective()) * need("mu_max", q.mu_max)?, q.p)?,
        Chernoff2EigentupleLower => Threshold::constant_vector((1.0 - th.effective()) * need("mu_min", q.mu_min)?, q.p)?,
        // `b` is compared with the eigentuple of the unaveraged sum, so the averaged draw is tested against `b / n`
        Chernoff1EigentupleUpper | Chernoff1EigentupleLower => {
            let n = q.n_sum as f64;
            let b = th.as_vector().expect("vector threshold checked above");
            Threshold::vector(b.iter().map(|x| x / n).collect())?
        }
        _ => th,
    };
    Ok((statistic_for(id), level))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationRow {
    /// Threshold passed to the bound.
    pub threshold: Threshold,
    /// Level of the tail event actually counted.
    pub event_level: Threshold,
    pub estimate: TailEstimate,
    pub bound: BoundValue,
    pub dominated: bool,
    /// `bound_raw - ci_upper`.
    pub margin: f64,
}

impl DominationRow {
    fn new(threshold: Threshold, event_level: Threshold, estimate: TailEstimate, bound: BoundValue) -> Self {
        let dominated = estimate.ci_upper <= bound.value;
        let margin = bound.value - estimate.ci_upper;
        Self {
            threshold,
            event_level,
            estimate,
            bound,
            dominated,
            margin,
        }
    }
}

/// Status of the eigentuple hypothesis on `t X` for sampled draws `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigentupleHypothesis {
    pub draws_checked: u64,
    /// Smallest grid `t` at which some checked draw fails it.
    pub first_failure_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub theorem_id: TheoremId,
    pub statistic: Statistic,
    pub rows: Vec<DominationRow>,
    pub eigentuple_hypothesis: Option<EigentupleHypothesis>,
}

impl DominationReport {
    pub fn all_dominated(&self) -> bool {
        self.rows.iter().all(|r| r.dominated)
    }

    pub fn first_violation(&self) -> Option<&DominationRow> {
        self.rows.iter().find(|r| !r.dominated)
    }

    pub fn csv_row(&self, row: &DominationRow) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.theorem_id,
            fmt_threshold(&row.threshold),
            row.estimate.trials,
            row.estimate.hits,
            fmt_g12(row.estimate.p_hat),
            fmt_g12(row.estimate.ci_upper),
            fmt_g12(row.bound.value),
            fmt_g12(row.bound.clipped),
            row.dominated,
            fmt_g12(row.margin),
        )
    }

    /// Header plus one LF-terminated line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.csv_row(row));
            out.push('\n');
        }
        out
    }
}

pub fn fmt_threshold(t: &Threshold) -> String {
    match t {
        Threshold::Scalar(x) => fmt_g12(*x),
        Threshold::Vector { b, .. } => b.iter().map(|x| fmt_g12(*x)).collect::<Vec<_>>().join(";"),
    }
}

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub theorem_id: TheoremId,
    pub threshold: Threshold,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_upper: f64,
    pub bound_raw: f64,
    pub bound_clipped: f64,
    pub dominated: bool,
    pub margin: f64,
}

impl CsvRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.theorem_id,
            fmt_threshold(&self.threshold),
            self.trials,
            self.hits,
            fmt_g12(self.p_hat),
            fmt_g12(self.ci_upper),
            fmt_g12(self.bound_raw),
            fmt_g12(self.bound_clipped),
            self.dominated,
            fmt_g12(self.margin),
        )
    }
}

/// Parses a domination CSV produced by [`DominationReport::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing domination CSV header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(err(format!("expected 10 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number {s:?}: {e}")));
        let int = |s: &str| s.parse::<u64>().map_err(|e| err(format!("bad count {s:?}: {e}")));
        let threshold = if fields[1].contains(';') {
            let b = fields[1].split(';').map(num).collect::<Result<Vec<_>>>()?;
            Threshold::vector(b)?
        } else {
            Threshold::Scalar(num(fields[1])?)
        };
        out.push(CsvRecord {
            theorem_id: fields[0].parse().map_err(|_| err(format!("unknown theorem id {:?}", fields[0])))?,
            threshold,
            trials: int(fields[2])?,
            hits: int(fields[3])?,
            p_hat: num(fields[4])?,
            ci_upper: num(fields[5])?,
            bound_raw: num(fields[6])?,
            bound_clipped: num(fields[7])?,
            dominated: fields[8].parse().map_err(|_| err(format!("bad boolean {:?}", fields[8])))?,
            margin: num(fields[9])?,
        });
    }
    Ok(out)
}

/// Number of draws on which the eigentuple hypothesis is checked.
pub const EIGENTUPLE_HYPOTHESIS_DRAWS: u64 = 64;

/// First grid `t` at which `t X` fails the eigentuple condition for some `X` in `draws`.
/// Non-square draws are replaced by their Hermitian dilation.
pub fn eigentuple_condition_first_failure<'a>(
    draws: impl IntoIterator<Item = &'a crate::tensor::DenseTensor3>,
) -> Result<Option<f64>> {
    let grid = t_grid();
    let mut first: Option<usize> = None;
    for x in draws {
        let dilated;
        let x = if x.shape().is_square() {
            x
        } else {
            dilated = x.dilation();
            &dilated
        };
        let limit = first.unwrap_or(grid.len());
        for (i, &t) in grid.iter().enumerate().take(limit) {
            if !check_eigentuple_condition(&x.scale_real(t))?.holds {
                first = Some(i);
                break;
            }
        }
    }
    Ok(first.map(|i| grid[i]))
}

/// Estimates the tail of the theorem's event at every threshold of `grid`
/// from `trials` certified draws and compares `ci_upper` with the raw bound.
pub fn run_domination(
    id: TheoremId,
    ensemble: &dyn Ensemble,
    base: &BoundQuery,
    grid: &[Threshold],
    trials: u64,
    alpha: f64,
    seed: SeedSpec,
) -> Result<DominationReport> {
    let statistic = statistic_for(id);
    if grid.is_empty() {
        return Ok(DominationReport {
            theorem_id: id,
            statistic,
            rows: Vec::new(),
            eigentuple_hypothesis: None,
        });
    }
    let values = sample_statistic(ensemble, statistic, trials, seed)?;
    let mut rows = Vec::with_capacity(grid.len());
    for threshold in grid {
        let q = base.clone().with_threshold(threshold.clone());
        let (_, level) = tail_event(id, &q)?;
        let bound = evaluate(id, &q)?;
        let hits = count_hits(&values, statistic, &level)?;
        let estimate = TailEstimate::from_counts(hits, trials, alpha)?;
        rows.push(DominationRow::new(threshold.clone(), level, estimate, bound));
    }
    let eigentuple_hypothesis = if id.is_eigentuple() {
        let n = trials.min(EIGENTUPLE_HYPOTHESIS_DRAWS);
        let draws = (0..n)
            .map(|i| ensemble.draw(&mut seed.rng_for_trial(i)))
            .collect::<Result<Vec<_>>>()?;
        Some(EigentupleHypothesis {
            draws_checked: n,
            first_failure_t: eigentuple_condition_first_failure(&draws)?,
        })
    } else {
        None
    };
    Ok(DominationReport {
        theorem_id: id,
        statistic,
        rows,
        eigentuple_hypothesis,
    })
}
