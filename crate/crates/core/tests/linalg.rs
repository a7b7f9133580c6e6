use approx::assert_abs_diff_eq;
use covert_core::linalg::{
    eig_hermitian, mat_fn, partial_trace, tensor, trace_norm, ComplexMatrix,
};
use covert_core::random::{random_density, random_hermitian, rng_from_seed};
use covert_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(d: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diag_real(d)
}

fn relative_error(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(1.0)
}

#[test]
fn identity_spectrum() {
    let s = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
    assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
}

#[test]
fn diagonal_spectrum_is_sorted_with_basis_vectors() {
    let s = eig_hermitian(&diag(&[1.0, -1.0])).unwrap();
    assert_eq!(s.eigenvalues, vec![-1.0, 1.0]);
    let v0 = s.eigenvector(0);
    assert_abs_diff_eq!(v0[0].norm(), 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!(v0[1].norm(), 1.0, epsilon = 1e-14);
}

#[test]
fn seeded_six_by_six_reconstructs() {
    let mut rng = rng_from_seed(6);
    let m = random_hermitian(6, &mut rng);
    let s = eig_hermitian(&m).unwrap();
    assert!(relative_error(&s.reconstruct(), &m) < 1e-10);
    assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn non_hermitian_input_is_rejected() {
    let mut m = ComplexMatrix::identity(2);
    m[(0, 1)] = c(1.0, 0.0);
    assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
}

#[test]
fn matrix_functions_on_diagonals() {
    let r = mat_fn(&diag(&[4.0, 9.0]), f64::sqrt, 1e-12).unwrap();
    assert!(r.max_abs_diff(&diag(&[2.0, 3.0])) < 1e-14);

    let r = mat_fn(&ComplexMatrix::identity(3), f64::ln, 1e-12).unwrap();
    assert!(r.max_abs_diff(&ComplexMatrix::zeros(3, 3)) < 1e-14);

    // Zero eigenvalues sit outside the support and map to 0 rather than ∞.
    let r = mat_fn(&diag(&[1.0, 0.0, 4.0]), |x| x.powf(-0.2), 1e-12).unwrap();
    assert!(r.max_abs_diff(&diag(&[1.0, 0.0, 4f64.powf(-0.2)])) < 1e-14);
}

#[test]
fn matrix_function_rejects_negative_spectrum() {
    let err = mat_fn(&diag(&[1.0, -0.5]), f64::sqrt, 1e-12).unwrap_err();
    assert!(matches!(err, Error::NotPsd { .. }));
}

#[test]
fn kronecker_products() {
    let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
    assert!(i4.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    let p = tensor(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]));
    assert!(p.max_abs_diff(&diag(&[0.0, 1.0, 0.0, 0.0])) < 1e-15);

    let mut rng = rng_from_seed(2);
    let (a, b) = (random_hermitian(2, &mut rng), random_hermitian(2, &mut rng));
    let k = tensor(&a, &b);
    for i in 0..4 {
        for j in 0..4 {
            let want = a[(i / 2, j / 2)] * b[(i % 2, j % 2)];
            assert!((k[(i, j)] - want).norm() < 1e-15);
        }
    }
}

#[test]
fn partial_trace_of_product_and_bell_states() {
    let mut rng = rng_from_seed(3);
    let rho = random_density(2, 2, &mut rng);
    let sigma = random_density(3, 3, &mut rng);
    let joint = tensor(rho.matrix(), sigma.matrix());
    assert!(
        partial_trace(&joint, &[2, 3], &[0])
            .unwrap()
            .max_abs_diff(rho.matrix())
            < 1e-14
    );
    assert!(
        partial_trace(&joint, &[2, 3], &[1])
            .unwrap()
            .max_abs_diff(sigma.matrix())
            < 1e-14
    );

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = ComplexMatrix::outer(&[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let reduced = partial_trace(&bell, &[2, 2], &[0]).unwrap();
    assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
}

#[test]
fn partial_trace_preserves_trace_and_checks_dims() {
    let mut rng = rng_from_seed(4);
    let rho = random_density(6, 6, &mut rng);
    for keep in [[0usize], [1]] {
        let t = partial_trace(rho.matrix(), &[2, 3], &keep).unwrap().trace();
        assert!((t.re - 1.0).abs() < 1e-12 && t.im.abs() < 1e-12);
    }
    assert!(matches!(
        partial_trace(rho.matrix(), &[2, 2], &[0]),
        Err(Error::DimMismatch(_))
    ));
}

#[test]
fn trace_norm_examples() {
    assert_abs_diff_eq!(
        trace_norm(&diag(&[1.0, -1.0])).unwrap(),
        2.0,
        epsilon = 1e-15
    );
    assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
    let mut rng = rng_from_seed(5);
    let m = random_hermitian(5, &mut rng);
    let oracle: f64 = eig_hermitian(&m)
        .unwrap()
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum();
    assert_abs_diff_eq!(trace_norm(&m).unwrap(), oracle, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectrum_reconstructs_and_is_unitary(seed in any::<u64>(), d in 2usize..=8) {
        let m = random_hermitian(d, &mut rng_from_seed(seed));
        let s = eig_hermitian(&m).unwrap();
        prop_assert!(relative_error(&s.reconstruct(), &m) < 1e-10);
        let vv = s.eigenvectors.adjoint().matmul(&s.eigenvectors);
        prop_assert!(vv.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-10);
    }

    #[test]
    fn partial_trace_is_linear(seed in any::<u64>(), x in -2.0f64..2.0) {
        let mut rng = rng_from_seed(seed);
        let (a, b) = (random_hermitian(6, &mut rng), random_hermitian(6, &mut rng));
        let lhs = partial_trace(&(&a.scale(x) + &b), &[3, 2], &[1]).unwrap();
        let rhs = &partial_trace(&a, &[3, 2], &[1]).unwrap().scale(x) + &partial_trace(&b, &[3, 2], &[1]).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let t = partial_trace(&a, &[3, 2], &[0]).unwrap().trace() - a.trace();
        prop_assert!(t.norm() < 1e-12);
    }

    #[test]
    fn trace_norm_triangle_inequality(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = rng_from_seed(seed);
        let (a, b) = (random_hermitian(d, &mut rng), random_hermitian(d, &mut rng));
        let sum = trace_norm(&(&a + &b)).unwrap();
        prop_assert!(sum <= trace_norm(&a).unwrap() + trace_norm(&b).unwrap() + 1e-9);
    }

    #[test]
    fn identity_function_returns_psd_input(seed in any::<u64>(), d in 2usize..=6, rank in 1usize..=6) {
        let rho = random_density(d, rank.min(d), &mut rng_from_seed(seed));
        let back = mat_fn(rho.matrix(), |x| x, 1e-14).unwrap();
        prop_assert!(relative_error(&back, rho.matrix()) < 1e-10);
    }
}
