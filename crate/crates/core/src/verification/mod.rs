//! Monte Carlo tail estimation, bound-domination experiments and lemma checkers.

pub mod catalog;
pub mod domination;
pub mod lemmas;
pub mod quadrature;
pub mod tail;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::TrialRng;
use crate::error::Result;
use crate::spectral;
use crate::tensor::{DenseTensor3, TensorShape};

pub use catalog::{run_lemma_suite, shipped_experiments, BuiltEnsemble, EnsembleSpec, Experiment};
pub use domination::{parse_csv, run_domination, tail_event, CsvRecord, DominationReport, DominationRow, CSV_HEADER};
pub use lemmas::{LemmaCheckResult, LEMMA_IDS};
pub use tail::{clopper_pearson_upper, estimate_mean, estimate_tail, estimate_tails, Statistic, TailEstimate};

pub const T_GRID_LEN: usize = 32;
pub const T_GRID_MIN: f64 = 1e-3;
pub const T_GRID_MAX: f64 = 1e2;

/// 32 log-spaced points on `[1e-3, 1e2]`.
pub fn t_grid() -> Vec<f64> {
    log_grid(T_GRID_MIN, T_GRID_MAX, T_GRID_LEN)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-5, 1e12)`.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Hermitian `m x m x p` tensor `(B + B^H) / 2` with complex Gaussian `B`,
/// rescaled to spectral norm `scale`.
pub fn random_hermitian(m: usize, p: usize, scale: f64, rng: &mut TrialRng) -> Result<DenseTensor3> {
    let shape = TensorShape::square(m, p)?;
    let b = DenseTensor3::from_fn(shape, |_, _, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let h = b.add(&b.conj_transpose())?.scale_real(0.5);
    let norm = spectral::spectral_norm(&h);
    Ok(if norm > 0.0 { h.scale_real(scale / norm) } else { h })
}

/// TPSD `B * B^H` rescaled to `lambda_max = top`.
pub fn random_tpsd(m: usize, p: usize, top: f64, rng: &mut TrialRng) -> Result<DenseTensor3> {
    let shape = TensorShape::square(m, p)?;
    let b = DenseTensor3::from_fn(shape, |_, _, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let g = b.t_product(&b.conj_transpose())?;
    // remove the round-off anti-Hermitian part
    let g = g.add(&g.conj_transpose())?.scale_real(0.5);
    let lam = spectral::lambda_max(&g)?;
    Ok(if lam > 0.0 { g.scale_real(top / lam) } else { g })
}
