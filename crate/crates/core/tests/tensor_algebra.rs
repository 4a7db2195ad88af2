mod common;

use common::*;
use proptest::prelude::*;
use tprod_core::literal;
use tprod_core::tensor::{basis_tensor, dft_along_tubes, dilation, fdiag, hadamard, identity, inverse_dft};
use tprod_core::{DenseTensor3, Error, TensorShape, TransformedTensor};

#[test]
fn dft_of_constant_tubes() {
    let mut r = rng(1);
    let mslice = random_tensor(2, 3, 1, &mut r);
    let shape = TensorShape::new(2, 3, 4).unwrap();
    let t = DenseTensor3::from_fn(shape, |i, j, _| mslice.at(i, j, 0));
    let tt = dft_along_tubes(&t);
    for i in 0..2 {
        for j in 0..3 {
            assert!((tt.slices()[0][(i, j)] - mslice.at(i, j, 0) * 4.0).norm() < 1e-12);
            for k in 1..4 {
                assert!(tt.slices()[k][(i, j)].norm() < 1e-12);
            }
        }
    }
}

#[test]
fn dft_p1_is_identity() {
    let t = random_tensor(3, 2, 1, &mut rng(2));
    let tt = dft_along_tubes(&t);
    assert_eq!(tt.slices()[0], slices(&t)[0]);
}

#[test]
fn dft_matches_naive_summation() {
    let t = random_tensor(2, 3, 4, &mut rng(3));
    let fast = dft_along_tubes(&t);
    for (a, b) in fast.slices().iter().zip(naive_dft(&t)) {
        assert!((a - &b).norm() < 1e-12 * b.norm().max(1.0));
    }
}

#[test]
fn inverse_dft_matches_naive_summation() {
    let t = random_tensor(3, 3, 5, &mut rng(4));
    let f = naive_dft(&t);
    let fast = inverse_dft(&TransformedTensor::from_slices(f.clone()).unwrap());
    assert!(rel_diff(&fast, &naive_idft(&f)) < 1e-12);
    assert!(rel_diff(&fast, &t) < 1e-12);
}

#[test]
fn inverse_of_zero_slices() {
    let z = vec![CMat::zeros(2, 2); 3];
    let t = inverse_dft(&TransformedTensor::from_slices(z).unwrap());
    assert!(t.data().iter().all(|x| x.norm() == 0.0));
}

#[test]
fn real_tensor_has_conjugate_symmetric_slices() {
    let t = random_real_tensor(2, 2, 5, &mut rng(5));
    let tt = t.transform();
    let p = 5;
    for k in 1..p {
        let diff = &tt.slices()[k] - tt.slices()[p - k].map(|z| z.conj());
        assert!(diff.norm() < 1e-12);
    }
}

#[test]
fn t_product_shape_mismatch_names_shapes() {
    let a = DenseTensor3::zeros(TensorShape::new(2, 3, 2).unwrap());
    let b = DenseTensor3::zeros(TensorShape::new(2, 3, 2).unwrap());
    let err = a.t_product(&b).unwrap_err();
    assert!(matches!(err, Error::ShapeMismatch { .. }));
    let msg = err.to_string();
    assert!(msg.contains("2x3x2") || msg.contains("2×3×2"), "{msg}");
    let c = DenseTensor3::zeros(TensorShape::new(3, 2, 3).unwrap());
    assert!(a.t_product(&c).is_err());
}

#[test]
fn t_product_matches_circular_convolution() {
    let mut r = rng(6);
    let a = random_tensor(2, 3, 4, &mut r);
    let b = random_tensor(3, 2, 4, &mut r);
    let fast = a.t_product(&b).unwrap();
    assert!(rel_diff(&fast, &naive_t_product(&a, &b)) < 1e-12);
    assert!(rel_diff(&fast, &bcirc_product(&a, &b)) < 1e-12);
}

#[test]
fn identity_is_neutral() {
    let a = random_tensor(3, 3, 4, &mut rng(7));
    let i = identity(3, 4).unwrap();
    assert!(rel_diff(&a.t_product(&i).unwrap(), &a) < 1e-13);
    assert!(rel_diff(&i.t_product(&a).unwrap(), &a) < 1e-13);
    assert_eq!(i.trace().unwrap().re, 12.0);
}

#[test]
fn trace_definition() {
    let mut r = rng(8);
    let a = random_hermitian(3, 4, &mut r);
    let eig_sum: f64 = slice_eigs(&a).iter().flatten().sum();
    let tr = a.trace().unwrap();
    assert!((tr.re - eig_sum).abs() < 1e-10 * eig_sum.abs().max(1.0));
    assert!(tr.im.abs() < 1e-10);
    assert!((tr - bcirc_trace(&a)).norm() < 1e-10);
    assert_eq!(DenseTensor3::zeros(TensorShape::square(2, 3).unwrap()).trace().unwrap().re, 0.0);
    assert!(random_tensor(2, 3, 2, &mut r).trace().is_err());
}

#[test]
fn dilation_layout() {
    let cten = random_tensor(2, 3, 2, &mut rng(9));
    let d = dilation(&cten);
    assert_eq!(d.shape(), TensorShape::square(5, 2).unwrap());
    let h = cten.conj_transpose();
    for k in 0..2 {
        for i in 0..5 {
            for j in 0..5 {
                let want = match (i < 2, j < 2) {
                    (true, false) => cten.at(i, j - 2, k),
                    (false, true) => h.at(i - 2, j, k),
                    _ => c(0.0, 0.0),
                };
                assert_eq!(d.at(i, j, k), want);
            }
        }
    }
}

#[test]
fn fdiag_and_basis() {
    let f = fdiag(&[1.0, -2.0, 3.0], 3).unwrap();
    assert_eq!(f.at(1, 1, 0), c(-2.0, 0.0));
    assert_eq!(f.at(0, 1, 0), c(0.0, 0.0));
    assert!((0..3).all(|i| f.at(i, i, 1) == c(0.0, 0.0)));
    let shape = TensorShape::new(2, 3, 2).unwrap();
    let e = basis_tensor(1, 2, 1, shape).unwrap();
    assert_eq!(e.data().iter().filter(|z| z.norm() > 0.0).count(), 1);
    assert_eq!(e.at(1, 2, 1), c(1.0, 0.0));
    assert!(basis_tensor(2, 0, 0, shape).is_err());
}

#[test]
fn hadamard_is_entrywise() {
    let mut r = rng(10);
    let a = random_tensor(2, 3, 2, &mut r);
    let b = random_tensor(2, 3, 2, &mut r);
    let h = hadamard(&a, &b).unwrap();
    for (x, (y, z)) in h.data().iter().zip(a.data().iter().zip(b.data())) {
        assert_eq!(*x, y * z);
    }
    assert!(hadamard(&a, &random_tensor(3, 2, 2, &mut r)).is_err());
}

#[test]
fn construction_rejects_non_finite() {
    let shape = TensorShape::new(1, 1, 2).unwrap();
    assert!(DenseTensor3::new(shape, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]).is_err());
    assert!(DenseTensor3::new(shape, vec![c(1.0, 0.0)]).is_err());
    assert!(TensorShape::new(0, 1, 1).is_err());
}

#[test]
fn literal_round_trip() {
    let t = random_tensor(2, 3, 2, &mut rng(11));
    let text = literal::render(&t);
    let back = literal::parse(&text).unwrap();
    assert_eq!(back, t);
    assert_eq!(literal::render(&back), text);
    assert!(literal::parse("1 1 1\n1 1 1 0\n").is_err());
    assert!(literal::parse("1 1 1\n1 1 1 nan 0\n").is_err());
}

fn small_shapes() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn associativity((m, n, q, p) in small_shapes(), r in 1usize..=4, seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_tensor(m, n, p, &mut g);
        let b = random_tensor(n, q, p, &mut g);
        let cc = random_tensor(q, r, p, &mut g);
        let left = a.t_product(&b).unwrap().t_product(&cc).unwrap();
        let right = a.t_product(&b.t_product(&cc).unwrap()).unwrap();
        prop_assert!(rel_diff(&left, &right) < 1e-10);
    }

    #[test]
    fn bilinearity((m, n, q, p) in small_shapes(), s in -3.0f64..3.0, seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_tensor(m, n, p, &mut g);
        let a2 = random_tensor(m, n, p, &mut g);
        let b = random_tensor(n, q, p, &mut g);
        let lhs = a.scale_real(s).add(&a2).unwrap().t_product(&b).unwrap();
        let rhs = a.t_product(&b).unwrap().scale_real(s).add(&a2.t_product(&b).unwrap()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn conj_transpose_reverses_products((m, n, q, p) in small_shapes(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_tensor(m, n, p, &mut g);
        let b = random_tensor(n, q, p, &mut g);
        let lhs = a.t_product(&b).unwrap().conj_transpose();
        let rhs = b.conj_transpose().t_product(&a.conj_transpose()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn block_circulant_equivalence((m, n, q, p) in small_shapes(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_tensor(m, n, p, &mut g);
        let b = random_tensor(n, q, p, &mut g);
        prop_assert!(rel_diff(&a.t_product(&b).unwrap(), &bcirc_product(&a, &b)) < 1e-10);
    }

    #[test]
    fn transform_round_trip((m, n, _q, p) in small_shapes(), seed in any::<u64>()) {
        let a = random_tensor(m, n, p, &mut rng(seed));
        prop_assert!(rel_diff(&a.transform().inverse(), &a) < 1e-12);
    }

    #[test]
    fn trace_is_cyclic((m, n, _q, p) in small_shapes(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_tensor(m, n, p, &mut g);
        let b = random_tensor(n, m, p, &mut g);
        let ab = a.t_product(&b).unwrap().trace().unwrap();
        let ba = b.t_product(&a).unwrap().trace().unwrap();
        prop_assert!((ab - ba).norm() < 1e-10 * ab.norm().max(1.0));
    }

    #[test]
    fn literal_parse_render_identity((m, n, _q, p) in small_shapes(), seed in any::<u64>()) {
        let t = random_tensor(m, n, p, &mut rng(seed));
        prop_assert_eq!(literal::parse(&literal::render(&t)).unwrap(), t);
    }
}
