use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use tprod_core::bounds::{evaluate, solve_delta_opt};
use tprod_core::ensembles::SeedSpec;
use tprod_core::verification::domination::CSV_HEADER;
use tprod_core::verification::{fmt_g12, run_domination, run_lemma_suite, shipped_experiments};
use tprod_core::{BoundQuery, BoundValue, TheoremId, Threshold};

use crate::config::ExperimentConfig;
use crate::{Outcome, DEFAULT_SEED, SEED_ENV};

/// Seed from the flag, then the config, then `TPROD_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, Clone, Default)]
pub struct BoundArgs {
    pub m: usize,
    pub n: Option<usize>,
    pub p: usize,
    pub sigma2: f64,
    pub theta: Option<f64>,
    pub b: Option<Vec<f64>>,
    pub t_cap: f64,
    pub n_sum: usize,
    pub mu_max: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_bar_max: Option<f64>,
    pub mu_bar_min: Option<f64>,
}

impl BoundArgs {
    pub fn query(&self, id: TheoremId) -> anyhow::Result<BoundQuery> {
        let threshold = match (&self.b, self.theta) {
            (Some(_), Some(_)) => bail!("give either --theta or --b, not both"),
            (Some(b), None) => Threshold::vector(b.clone())?,
            (None, Some(t)) if id.takes_vector_threshold() => Threshold::constant_vector(t, self.p)?,
            (None, Some(t)) => Threshold::Scalar(t),
            (None, None) => bail!("{id} needs a threshold (--theta or --b)"),
        };
        let mut q = BoundQuery::new(self.m, self.p, threshold);
        q.n = self.n;
        q.sigma2 = self.sigma2;
        q.t_cap = self.t_cap;
        q.n_sum = self.n_sum;
        q.mu_max = self.mu_max;
        q.mu_min = self.mu_min;
        q.mu_bar_max = self.mu_bar_max;
        q.mu_bar_min = self.mu_bar_min;
        Ok(q)
    }
}

pub fn render_bound(v: &BoundValue) -> String {
    let mut out = format!(
        "theorem: {}\nraw: {}\nclipped: {}\nvalid: {}\n",
        v.theorem_id,
        fmt_g12(v.value),
        fmt_g12(v.clipped),
        v.is_valid()
    );
    for f in &v.validity {
        out.push_str(&format!("condition: {} = {}\n", f.condition, f.holds));
    }
    out
}

pub fn render_constants() -> String {
    let d = solve_delta_opt();
    format!("delta_opt: {}\nC: {}\n", fmt_g12(d.delta), fmt_g12(d.c))
}

pub fn cmd_bound(theorem: &str, args: &BoundArgs, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    if theorem == "constants" {
        out.write_all(render_constants().as_bytes())?;
        return Ok(Outcome::Ok);
    }
    let id: TheoremId = theorem.parse()?;
    let value = evaluate(id, &args.query(id)?)?;
    out.write_all(render_bound(&value).as_bytes())?;
    Ok(Outcome::Ok)
}

/// Runs the experiment in the config at `path` and writes the CSV to
/// `output`, else the config's `output`, else `out`.
pub fn cmd_simulate(
    path: &Path,
    seed: Option<u64>,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let config = ExperimentConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let id = config.theorem()?;
    let grid = config.grid()?;
    let built = config.ensemble_spec(base)?.build()?;
    let query = built.base_query(id)?;
    let seed = resolve_seed(seed, config.seed)?;
    let report = run_domination(id, &built, &query, &grid, config.trials, config.alpha, SeedSpec::new(seed))?;
    let csv = report.to_csv();
    match output.map(Path::to_path_buf).or_else(|| config.output_path(base)) {
        Some(p) => std::fs::write(&p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(csv.as_bytes())?,
    }
    if let Some(h) = &report.eigentuple_hypothesis {
        if let Some(t) = h.first_failure_t {
            writeln!(
                err,
                "note: eigentuple condition fails for t >= {} on {} checked draws",
                fmt_g12(t),
                h.draws_checked
            )?;
        }
    }
    Ok(match report.first_violation() {
        Some(row) => {
            writeln!(err, "bound violated: {}", report.csv_row(row))?;
            Outcome::Violation
        }
        None => Outcome::Ok,
    })
}

pub fn cmd_lemmas(filter: Option<&str>, seed: Option<u64>, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let seed = resolve_seed(seed, None)?;
    let results = run_lemma_suite(SeedSpec::new(seed), filter)?;
    writeln!(out, "lemma_id,min_slack,pass")?;
    for r in &results {
        writeln!(out, "{},{},{}", r.lemma_id, fmt_g12(r.min_slack), r.pass)?;
    }
    Ok(if results.iter().all(|r| r.pass) {
        Outcome::Ok
    } else {
        Outcome::Violation
    })
}

/// Every shipped experiment in one CSV, followed by a one-line summary on `err`.
pub fn cmd_report(
    seed: Option<u64>,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let seed = SeedSpec::new(resolve_seed(seed, None)?);
    let experiments = shipped_experiments()?;
    let mut csv = format!("{CSV_HEADER}\n");
    let (mut rows, mut violations) = (0usize, 0usize);
    for e in &experiments {
        let report = e.run(seed)?;
        for row in &report.rows {
            csv.push_str(&report.csv_row(row));
            csv.push('\n');
            rows += 1;
            if !row.dominated {
                violations += 1;
                writeln!(err, "bound violated in {}: {}", e.name, report.csv_row(row))?;
            }
        }
    }
    match output {
        Some(p) => std::fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(csv.as_bytes())?,
    }
    writeln!(
        err,
        "{} experiments, {rows} rows, {violations} violations",
        experiments.len()
    )?;
    Ok(if violations == 0 { Outcome::Ok } else { Outcome::Violation })
}
