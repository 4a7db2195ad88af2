mod common;

use common::*;
use rand::RngCore;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tprod_core::bounds::HadamardMode;
use tprod_core::ensembles::*;
use tprod_core::spectral::{self, SpectralFn};
use tprod_core::tensor::identity;
use tprod_core::verification::{estimate_tail, Statistic};
use tprod_core::{DenseTensor3, TensorShape, Threshold};

fn scalar(v: f64) -> DenseTensor3 {
    DenseTensor3::from_real_fn(TensorShape::new(1, 1, 1).unwrap(), |_, _, _| v)
}

fn ones(m: usize, n: usize, p: usize) -> DenseTensor3 {
    DenseTensor3::from_real_fn(TensorShape::new(m, n, p).unwrap(), |_, _, _| 1.0)
}

fn entry0(x: &DenseTensor3) -> f64 {
    x.at(0, 0, 0).re
}

#[test]
fn rng_stream_is_pinned() {
    let mut r = SeedSpec::new(42).rng_for_trial(0);
    let got: Vec<u64> = (0..8).map(|_| r.next_u64()).collect();
    assert_eq!(
        got,
        [
            0xae90bfb5395d5ba1,
            0xf3453fc625799188,
            0x6d71b708c5b6538c,
            0xa09ab2f958166752,
            0x49e149d8bcb642b0,
            0x2663b45ba45d829e,
            0x4edbbf0150871314,
            0xcdca9b0d2a122884,
        ]
    );
    let mut r7 = SeedSpec::new(42).rng_for_trial(7);
    assert_eq!(r7.next_u64(), 0x20e5cc8835be27d0);
}

#[test]
fn trial_streams_are_distinct_and_repeatable() {
    let s = SeedSpec::new(9);
    let a: Vec<u64> = (0..4).map(|i| s.rng_for_trial(i).next_u64()).collect();
    let b: Vec<u64> = (0..4).map(|i| s.rng_for_trial(i).next_u64()).collect();
    assert_eq!(a, b);
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(a[i], a[j]);
        }
    }
    assert_ne!(s.construction_rng().next_u64(), a[0]);
}

#[test]
fn tail_counts_independent_of_worker_count() {
    let mut g = rng(1);
    let coeffs = (0..3).map(|_| random_hermitian(2, 2, &mut g)).collect();
    let series = SeriesSpec::hermitian(coeffs, VariableKind::Gaussian).unwrap();
    let th = Threshold::Scalar(1.0);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_tail(&series, Statistic::LambdaMax, &th, 4000, 0.01, SeedSpec::new(5)).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert!(one.hits > 0 && one.hits < one.trials);
}

#[test]
fn series_zero_coefficient() {
    let z = DenseTensor3::zeros(TensorShape::square(2, 3).unwrap());
    let s = SeriesSpec::hermitian(vec![z], VariableKind::Gaussian).unwrap();
    let mut r = SeedSpec::new(1).rng_for_trial(0);
    assert!(s.sample_series(&mut r).data().iter().all(|x| x.norm() == 0.0));
    assert_eq!(s.sigma2(), 0.0);
}

#[test]
fn series_single_rademacher_coefficient_is_plus_minus() {
    let a = random_hermitian(2, 2, &mut rng(2));
    let s = SeriesSpec::hermitian(vec![a.clone()], VariableKind::Rademacher).unwrap();
    let seed = SeedSpec::new(3);
    let (mut plus, mut minus) = (0, 0);
    for i in 0..200 {
        let x = s.sample_series(&mut seed.rng_for_trial(i));
        if x == a {
            plus += 1;
        } else if x == a.neg() {
            minus += 1;
        }
    }
    assert_eq!(plus + minus, 200);
    assert!(plus > 60 && minus > 60);
    let rv = s.enumerate().unwrap();
    assert_eq!(rv.atoms().len(), 2);
    assert!(rv.mean().unwrap().frobenius_norm() < 1e-15);
}

#[test]
fn gaussian_series_variance() {
    let s = SeriesSpec::hermitian(vec![scalar(1.0), scalar(1.0)], VariableKind::Gaussian).unwrap();
    assert_eq!(s.sigma2(), 2.0);
    let seed = SeedSpec::new(4);
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|i| entry0(&s.sample_series(&mut seed.rng_for_trial(i)))).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 0.02, "{mean}");
    assert!((var - 2.0).abs() < 0.05, "{var}");
}

#[test]
fn rademacher_series_is_symmetric() {
    let mut g = rng(5);
    let coeffs = (0..4).map(|_| random_hermitian(2, 3, &mut g)).collect();
    let s = SeriesSpec::hermitian(coeffs, VariableKind::Rademacher).unwrap();
    let (s1, s2) = (SeedSpec::new(6), SeedSpec::new(7));
    let n = 4000;
    let pos: Vec<f64> = (0..n)
        .map(|i| spectral::lambda_max(&s.sample_series(&mut s1.rng_for_trial(i))).unwrap())
        .collect();
    let neg: Vec<f64> = (0..n)
        .map(|i| spectral::lambda_max(&s.sample_series(&mut s2.rng_for_trial(i)).neg()).unwrap())
        .collect();
    let (d, crit) = ks_two_sample(&pos, &neg);
    assert!(d < crit, "KS {d} >= {crit}");
}

#[test]
fn rectangular_series_sigma2_uses_both_grams() {
    let a = random_tensor(2, 3, 2, &mut rng(8));
    let s = SeriesSpec::rectangular(vec![a.clone()], VariableKind::Gaussian).unwrap();
    let aah = a.t_product(&a.conj_transpose()).unwrap();
    let aha = a.conj_transpose().t_product(&a).unwrap();
    let want = bcirc_norm(&aah).max(bcirc_norm(&aha));
    assert!(rel_err(s.sigma2(), want) < 1e-10);
    assert!(!s.is_hermitian());
    assert!(s.enumerate().is_err());
}

#[test]
fn bounded_zero_cap_gives_zero() {
    let spec = BoundedTpsdSpec::new(3, 2, 2, 0.0, EigenLaw::Uniform, SeedSpec::new(1)).unwrap();
    let mut r = SeedSpec::new(2).rng_for_trial(0);
    assert!(spec.draw(&mut r).unwrap().frobenius_norm() < 1e-14);
    assert_eq!(spec.mu_max(), 0.0);
}

#[test]
fn bounded_degenerate_law_gives_scaled_identity() {
    let spec = BoundedTpsdSpec::new(1, 3, 2, 1.5, EigenLaw::Degenerate, SeedSpec::new(1)).unwrap();
    let mut r = SeedSpec::new(2).rng_for_trial(0);
    let x = spec.sample_bounded_tpsd(&mut r);
    assert!(rel_diff(&x, &identity(3, 2).unwrap().scale_real(1.5)) < 1e-12);
    for eigs in slice_eigs(&x) {
        for v in eigs {
            assert!((v - 1.5).abs() < 1e-12);
        }
    }
}

#[test]
fn bounded_uniform_mean() {
    let spec = BoundedTpsdSpec::with_weights(1, 2, 2, 1.0, EigenLaw::Uniform, vec![1.0, 0.6], SeedSpec::new(11)).unwrap();
    let seed = SeedSpec::new(12);
    let n = 100_000;
    let mut acc = DenseTensor3::zeros(spec.shape());
    for i in 0..n {
        acc = acc.add(&spec.sample_bounded_tpsd(&mut seed.rng_for_trial(i))).unwrap();
    }
    let mean = acc.scale_real(1.0 / n as f64);
    let err = mean.max_abs_diff(&spec.summand_mean()).unwrap();
    assert!(err < 0.01, "{err}");
}

#[test]
fn bounded_samples_meet_hypotheses() {
    let spec = BoundedTpsdSpec::with_weights(2, 2, 3, 0.8, EigenLaw::Uniform, vec![1.0, 0.4], SeedSpec::new(13)).unwrap();
    let seed = SeedSpec::new(14);
    let mut violations = 0;
    for i in 0..10_000 {
        let x = spec.sample_bounded_tpsd(&mut seed.rng_for_trial(i));
        let eigs = slice_eigs(&x);
        let top = eigs.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let low = eigs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if spec.check_hypotheses(&x).is_err() || top > 0.8 + 1e-10 || low < -1e-10 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn centered_samples_meet_hypotheses() {
    let base = BoundedTpsdSpec::with_weights(3, 2, 2, 1.0, EigenLaw::Bernoulli(0.3), vec![1.0, 0.6], SeedSpec::new(15)).unwrap();
    let spec = CenteredBoundedSpec::new(base).unwrap();
    let seed = SeedSpec::new(16);
    let failures = (0..10_000).filter(|&i| spec.draw(&mut seed.rng_for_trial(i)).is_err()).count();
    assert_eq!(failures, 0);
    assert!(spec.moment_condition_excess(8) <= 1e-14);
    // E X = 0 and E X^2 has the Bernoulli variance on top
    assert!(spec.summand_moment(1).frobenius_norm() < 1e-14);
    assert!(rel_err(spec.sigma2(), 3.0 * 0.3 * 0.7) < 1e-12);
}

#[test]
fn centered_rejects_degenerate() {
    let base = BoundedTpsdSpec::new(2, 2, 2, 1.0, EigenLaw::Degenerate, SeedSpec::new(1)).unwrap();
    assert!(CenteredBoundedSpec::new(base).is_err());
}

#[test]
fn martingale_zero_caps_give_constant_path() {
    let caps = vec![DenseTensor3::zeros(TensorShape::square(2, 2).unwrap()); 4];
    for kind in [MultiplierKind::Rademacher, MultiplierKind::Adapted] {
        let spec = MartingaleSpec::new(caps.clone(), kind).unwrap();
        let path = spec.sample_martingale_path(&mut SeedSpec::new(1).rng_for_trial(0));
        assert_eq!(path.partial_sums.len(), 5);
        assert!(path.partial_sums.iter().all(|s| s.frobenius_norm() == 0.0));
    }
}

#[test]
fn martingale_single_step() {
    let spec = MartingaleSpec::new(vec![scalar(1.0)], MultiplierKind::Rademacher).unwrap();
    let seed = SeedSpec::new(2);
    let values: Vec<f64> = (0..100)
        .map(|i| entry0(&spec.draw(&mut seed.rng_for_trial(i)).unwrap()))
        .collect();
    assert!(values.iter().all(|&v| v == 1.0 || v == -1.0));
    assert!(values.contains(&1.0) && values.contains(&-1.0));
}

fn binomial_pmf(n: u64, k: u64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c / 2f64.powi(n as i32)
}

#[test]
fn rademacher_martingale_is_a_random_walk() {
    let n = 10u64;
    let spec = MartingaleSpec::new(vec![scalar(1.0); n as usize], MultiplierKind::Rademacher).unwrap();
    let seed = SeedSpec::new(3);
    let trials = 10_000u64;
    let mut counts = vec![0u64; n as usize + 1];
    for i in 0..trials {
        let s = entry0(&spec.draw(&mut seed.rng_for_trial(i)).unwrap());
        counts[((s + n as f64) / 2.0).round() as usize] += 1;
    }
    // pool the sparse tails: {0,1}, 2..=8, {9,10}
    let bins: Vec<(Vec<usize>, u64)> = std::iter::once(vec![0, 1])
        .chain((2..=8).map(|k| vec![k]))
        .chain(std::iter::once(vec![9, 10]))
        .map(|ks| {
            let c = ks.iter().map(|&k| counts[k]).sum();
            (ks, c)
        })
        .collect();
    let mut chi2 = 0.0;
    for (ks, c) in &bins {
        let expected = trials as f64 * ks.iter().map(|&k| binomial_pmf(n, k as u64)).sum::<f64>();
        chi2 += (*c as f64 - expected).powi(2) / expected;
    }
    let crit = ChiSquared::new((bins.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
}

#[test]
fn adapted_martingale_has_zero_mean_and_meets_hypotheses() {
    let mut g = rng(4);
    let caps: Vec<DenseTensor3> = (0..6).map(|_| random_hermitian(2, 2, &mut g).scale_real(0.5)).collect();
    let spec = MartingaleSpec::new(caps, MultiplierKind::Adapted).unwrap();
    let rv = spec.enumerate().unwrap();
    assert_eq!(rv.atoms().len(), 64);
    assert!(rv.mean().unwrap().frobenius_norm() < 1e-12);
    let seed = SeedSpec::new(5);
    let mut violations = 0;
    for i in 0..10_000 {
        let path = spec.sample_martingale_path(&mut seed.rng_for_trial(i));
        if spec.check_hypotheses(&path).is_err() {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn mcdiarmid_zero_terms() {
    let z = DenseTensor3::zeros(TensorShape::square(2, 2).unwrap());
    let spec = McDiarmidSpec::new(vec![z.clone(), z]).unwrap();
    let (_, f) = spec.sample_mcdiarmid_function(&mut SeedSpec::new(1).rng_for_trial(0));
    assert_eq!(f.frobenius_norm(), 0.0);
    assert_eq!(spec.sigma2(), 0.0);
}

#[test]
fn mcdiarmid_single_input_difference() {
    let b = random_hermitian(2, 2, &mut rng(6));
    let spec = McDiarmidSpec::new(vec![b.clone()]).unwrap();
    let diff = spec.evaluate(&[1.0]).unwrap().sub(&spec.evaluate(&[-1.0]).unwrap()).unwrap();
    assert!(rel_diff(&diff, &b.scale_real(2.0)) < 1e-14);
    let b2 = b.t_product(&b).unwrap();
    assert!(rel_err(spec.sigma2(), 4.0 * bcirc_norm(&b2)) < 1e-10);
}

#[test]
fn mcdiarmid_enumeration_matches_binomial() {
    let n = 8;
    let spec = McDiarmidSpec::new(vec![scalar(1.0); n]).unwrap();
    let rv = spec.enumerate().unwrap();
    for k in 0..=n {
        let level = 2.0 * k as f64 - n as f64;
        let prob = rv.probability(|x| Ok((entry0(x) - level).abs() < 1e-12)).unwrap();
        assert!((prob - binomial_pmf(n as u64, k as u64)).abs() < 1e-15, "k={k}");
    }
}

#[test]
fn hadamard_zero_pattern() {
    let spec = HadamardGaussianSpec::new(DenseTensor3::zeros(TensorShape::new(2, 3, 2).unwrap()), HadamardMode::Stated);
    let x = spec.sample_hadamard_gaussian(&mut SeedSpec::new(1).rng_for_trial(0));
    assert_eq!(x.frobenius_norm(), 0.0);
}

#[test]
fn hadamard_entry_variances() {
    let spec = HadamardGaussianSpec::new(ones(2, 2, 2), HadamardMode::AllSlices);
    let seed = SeedSpec::new(2);
    let n = 100_000;
    let mut sum = [0.0; 8];
    let mut sq = [0.0; 8];
    for i in 0..n {
        let x = spec.sample_hadamard_gaussian(&mut seed.rng_for_trial(i));
        for (e, z) in x.data().iter().enumerate() {
            assert_eq!(z.im, 0.0);
            sum[e] += z.re;
            sq[e] += z.re * z.re;
        }
    }
    for e in 0..8 {
        let mean = sum[e] / n as f64;
        let var = sq[e] / n as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.02, "entry {e}: {var}");
    }
}

#[test]
fn hadamard_pattern_scales_entries() {
    let pattern = DenseTensor3::from_real_fn(TensorShape::new(1, 2, 1).unwrap(), |_, j, _| j as f64 * 3.0);
    let spec = HadamardGaussianSpec::new(pattern, HadamardMode::Stated);
    let x = spec.sample_hadamard_gaussian(&mut SeedSpec::new(3).rng_for_trial(0));
    assert_eq!(x.at(0, 0, 0).re, 0.0);
    assert!(x.at(0, 1, 0).re != 0.0);
}

#[test]
fn finite_support_expectations() {
    let a = random_hermitian(2, 2, &mut rng(7));
    let pair = FiniteSupportTensorRV::symmetric_pair(a.clone());
    assert!(pair.mean().unwrap().frobenius_norm() < 1e-15);
    // E cosh-type identity: E exp(+-A) = cosh(A)
    let e = pair.exact_expectation(SpectralFn::Exp).unwrap();
    let cosh = spectral::coshm(&a).unwrap();
    assert!(rel_diff(&e, &cosh) < 1e-12);
    let half = bcirc_expm(&a).add(&bcirc_expm(&a.neg())).unwrap().scale_real(0.5);
    assert!(rel_diff(&e, &half) < 1e-10);

    let det = FiniteSupportTensorRV::deterministic(a.clone());
    assert!(rel_diff(&det.exact_expectation(SpectralFn::Exp).unwrap(), &bcirc_expm(&a)) < 1e-10);
    assert_eq!(det.probability(|_| Ok(true)).unwrap(), 1.0);

    let sum = FiniteSupportTensorRV::sum_of_independent(&[pair.clone(), pair.clone()]).unwrap();
    assert_eq!(sum.atoms().len(), 4);
    let second = sum.expectation_with(|x| x.t_product(x)).unwrap();
    assert!(rel_diff(&second, &a.t_product(&a).unwrap().scale_real(2.0)) < 1e-12);
}

#[test]
fn finite_support_rejects_bad_laws() {
    let a = scalar(1.0);
    assert!(FiniteSupportTensorRV::new(vec![]).is_err());
    assert!(FiniteSupportTensorRV::new(vec![(a.clone(), 0.7), (a.clone(), 0.2)]).is_err());
    assert!(FiniteSupportTensorRV::new(vec![(a.clone(), 1.5), (a.clone(), -0.5)]).is_err());
    assert!(FiniteSupportTensorRV::new(vec![(a, 0.5), (ones(2, 2, 1), 0.5)]).is_err());
}

#[test]
fn finite_support_draws_follow_weights() {
    let rv = FiniteSupportTensorRV::new(vec![(scalar(0.0), 0.25), (scalar(1.0), 0.75)]).unwrap();
    let seed = SeedSpec::new(8);
    let n = 20_000;
    let ones = (0..n).filter(|&i| entry0(&rv.draw(&mut seed.rng_for_trial(i)).unwrap()) == 1.0).count();
    let frac = ones as f64 / n as f64;
    assert!((frac - 0.75).abs() < 0.015, "{frac}");
}
