use approx::assert_relative_eq;
use covert_core::bounds::{
    bound_report, default_alpha_grid, lemma1_bound, lemma1_formula, lemma2_bounds, optimize_bound,
    optimize_thm1, thm1_covert_bound, thm1_pe_bound, thm5_secure_covert_bound, BoundInputs,
    GridConfig, ProtocolRates,
};
use covert_core::divergence::sandwiched_renyi;
use covert_core::fixtures::{
    as_layout, be_layout, leaky_swap_ensemble, leaky_swap_instance, random_qubit_fixture,
};
use covert_core::linalg::{eig_hermitian, ComplexMatrix};
use covert_core::numerics::Numerics;
use covert_core::pinching::{eigencount, GROUP_TOL};
use covert_core::random::{random_density, rng_from_seed};
use covert_core::states::{
    CQState, Csi, DensityMatrix, Factor, Layout, ProblemInstance, QuantumChannel,
};
use covert_core::Error;
use proptest::prelude::*;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Replacement channel: every input of [A, S] is discarded and `out` is prepared on [B, E].
fn replacement(out: &DensityMatrix) -> QuantumChannel {
    let sp = eig_hermitian(out.matrix()).unwrap();
    let mut kraus = Vec::new();
    for (k, &lam) in sp.eigenvalues.iter().enumerate() {
        for j in 0..4 {
            let mut m = ComplexMatrix::zeros(4, 4);
            for i in 0..4 {
                m[(i, j)] = sp.eigenvectors[(i, k)] * lam.max(0.0).sqrt();
            }
            kraus.push(m);
        }
    }
    QuantumChannel::with_tol(kraus, as_layout(), be_layout(), 1e-9).unwrap()
}

/// U carries no information about S, B or E.
fn independent_inputs() -> BoundInputs {
    let rho_s = DensityMatrix::from_diag(&[0.8, 0.2]).unwrap();
    let phi0 = DensityMatrix::basis(2, 0);
    let sigma_b = DensityMatrix::from_diag(&[0.6, 0.4]).unwrap();
    let sigma_e = DensityMatrix::maximally_mixed(2);
    let p = ProblemInstance::new(
        replacement(&sigma_b.tensor(&sigma_e)),
        phi0.clone(),
        Csi::Marginal(rho_s.clone()),
    )
    .unwrap();
    let ens = CQState::new(vec![0.5, 0.5], vec![phi0.tensor(&rho_s); 2], as_layout()).unwrap();
    BoundInputs::new(&p, &ens, &Numerics::default()).unwrap()
}

fn qubit_inputs(seed: u64) -> BoundInputs {
    let (p, ens) = random_qubit_fixture(seed).unwrap();
    BoundInputs::new(&p, &ens, &Numerics::default()).unwrap()
}

#[test]
fn rates_are_validated() {
    assert!(ProtocolRates::new(1.0, 1.0, 1.0, 0.25).is_ok());
    for alpha in [0.0, 0.5, -0.1, f64::NAN] {
        assert!(
            ProtocolRates::new(1.0, 1.0, 1.0, alpha).is_err(),
            "α = {alpha}"
        );
    }
    assert!(ProtocolRates::new(-0.1, 1.0, 1.0, 0.25).is_err());
}

#[test]
fn pe_bound_large_pool_leaves_decoding_term() {
    let inp = qubit_inputs(1);
    // α < 1/2 caps the decay at 2^{−30} for a 60-bit pool.
    let rates = ProtocolRates::new(0.5, 30.0, 30.0, 0.49).unwrap();
    let rep = bound_report(&inp, &rates).unwrap();
    assert!(rep.components.encoding_term < 1e-8);
    assert_relative_eq!(
        thm1_pe_bound(&inp, &rates).unwrap(),
        rep.components.decoding_term,
        max_relative = 1e-15
    );
}

#[test]
fn pe_bound_with_independent_label() {
    let inp = independent_inputs();
    let d = inp.divergences(0.25).unwrap();
    assert!(d.d_us.abs() < 1e-12 && d.d_ub.abs() < 1e-12 && d.d_ue.abs() < 1e-12);
    assert_eq!((inp.v_s, inp.v_b, inp.v_e), (2, 2, 1));
    let rt = ProtocolRates::new(0.5, 1.0, 1.5, 0.25).unwrap();
    let a = rt.alpha;
    let want =
        2.0 * 2f64.powf(a) / a * (-a * 2.5f64).exp2() + 12.0 * 2f64.powf(a) * (a * 3.0f64).exp2();
    assert_relative_eq!(thm1_pe_bound(&inp, &rt).unwrap(), want, max_relative = 1e-9);
}

/// Recomposes every bound from divergences evaluated on the full U⊗X operators.
#[test]
fn seeded_instance_matches_hand_composition() {
    let (p, ens) = random_qubit_fixture(2).unwrap();
    let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
    let rt = ProtocolRates::new(0.5, 0.5, 0.5, 0.25).unwrap();
    let a = rt.alpha;
    let full = |cq: &CQState, order: f64| {
        sandwiched_renyi(&cq.joint(), &cq.product_of_marginals(), order)
            .unwrap()
            .value
    };
    let (d_us, d_ub, d_ue) = (
        full(&inp.rho_us, 1.0 + a),
        full(&inp.rho_ub, 1.0 - a),
        full(&inp.rho_ue, 1.0 + a),
    );
    let v = |cq: &CQState| eigencount(&cq.average(), GROUP_TOL).unwrap() as f64;
    let (v_s, v_b, v_e) = (v(&inp.rho_us), v(&inp.rho_ub), v(&inp.rho_ue));

    let pe = 2.0 * v_s.powf(a) / a * (a * (-1.0 + d_us)).exp2()
        + 12.0 * v_b.powf(a) * (a * (1.5 - d_ub)).exp2();
    let covert = 2.0 * SQRT2 * v_e.powf(a / 2.0) / a.sqrt() * (a / 2.0 * (-1.0 + d_ue)).exp2();
    let secure = 2.0 * v_e.powf(a / 2.0) / a.sqrt() * (a / 2.0 * (-0.5 + d_ue)).exp2();
    assert_relative_eq!(thm1_pe_bound(&inp, &rt).unwrap(), pe, max_relative = 1e-9);
    assert_relative_eq!(
        thm1_covert_bound(&inp, &rt).unwrap(),
        covert,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        thm5_secure_covert_bound(&inp, &rt).unwrap(),
        secure,
        max_relative = 1e-9
    );
}

#[test]
fn covert_bound_examples() {
    // The exponent is at most 60/4 at a 60-bit pool, so 1e-6 needs a larger one.
    let inp = qubit_inputs(3);
    let at60 =
        thm1_covert_bound(&inp, &ProtocolRates::new(30.0, 0.5, 30.0, 0.49).unwrap()).unwrap();
    assert!(at60 < 1e-3);
    assert!(
        thm1_covert_bound(&inp, &ProtocolRates::new(75.0, 0.5, 75.0, 0.49).unwrap()).unwrap()
            < 1e-6
    );

    let inp = independent_inputs();
    let rt = ProtocolRates::new(1.0, 0.5, 2.0, 0.3).unwrap();
    let want = 2.0 * SQRT2 / 0.3f64.sqrt() * (-0.15 * 3.0f64).exp2();
    assert_relative_eq!(
        thm1_covert_bound(&inp, &rt).unwrap(),
        want,
        max_relative = 1e-9
    );

    // The returned bound at α agrees with the grid evaluation at the same α.
    let inp = qubit_inputs(4);
    let grid = GridConfig {
        alphas: default_alpha_grid(),
        r_js: vec![1.0],
    };
    for &alpha in &grid.alphas {
        let rt = ProtocolRates::new(0.5, 0.5, 1.0, alpha).unwrap();
        let direct = thm1_covert_bound(&inp, &rt).unwrap();
        let single = GridConfig {
            alphas: vec![alpha],
            r_js: vec![1.0],
        };
        let via_grid = optimize_bound(
            |a, rj| {
                Ok(Some(thm1_covert_bound(
                    &inp,
                    &rt.with_alpha(a).with_r_j(rj),
                )?))
            },
            &single,
        )
        .unwrap();
        assert_eq!(via_grid.value, direct);
    }
}

#[test]
fn secure_bound_examples() {
    let inp = qubit_inputs(5);
    let a = 0.25;
    let rt = ProtocolRates::new(2.0, 0.5, 1.0, a).unwrap();
    // Same exponent apart from R, so thm1 / thm5 = √2 · 2^{−αR/2} = √2 · 2^{−α}.
    let ratio =
        thm1_covert_bound(&inp, &rt).unwrap() / thm5_secure_covert_bound(&inp, &rt).unwrap();
    assert_relative_eq!(ratio, SQRT2 * (-a).exp2(), max_relative = 1e-12);

    assert!(
        thm5_secure_covert_bound(&inp, &ProtocolRates::new(0.5, 0.5, 60.0, 0.49).unwrap()).unwrap()
            < 1e-3
    );
    assert!(
        thm5_secure_covert_bound(&inp, &ProtocolRates::new(0.5, 0.5, 150.0, 0.49).unwrap())
            .unwrap()
            < 1e-6
    );

    let inp = independent_inputs();
    let rt = ProtocolRates::new(3.0, 0.5, 2.0, a).unwrap();
    let want = 2.0 / a.sqrt() * (-a * 2.0 / 2.0f64).exp2();
    assert_relative_eq!(
        thm5_secure_covert_bound(&inp, &rt).unwrap(),
        want,
        max_relative = 1e-9
    );
}

#[test]
fn lemma1_examples() {
    let rho = random_density(3, 3, &mut rng_from_seed(6));
    let v = eigencount(&rho, GROUP_TOL).unwrap() as f64;
    let same = CQState::new(
        vec![0.5, 0.5],
        vec![rho.clone(), rho],
        Layout::single(Factor::E, 3),
    )
    .unwrap();
    let want = v.powf(0.2) / (0.2 * std::f64::consts::LN_2) * (-0.2 * 1.5f64).exp2();
    assert_relative_eq!(
        lemma1_bound(&same, 1.5, 0.2, GROUP_TOL).unwrap(),
        want,
        max_relative = 1e-9
    );
    assert!(lemma1_bound(&same, 60.0, 0.45, GROUP_TOL).unwrap() < 1e-6);

    // ρ_E = I/2 and each conditional sits 1 bit away from it: v_E = 1, D̄ = 1.
    let orth = CQState::new(
        vec![0.5, 0.5],
        vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)],
        Layout::single(Factor::E, 2),
    )
    .unwrap();
    let want = 1.0 / (0.25 * std::f64::consts::LN_2);
    assert_relative_eq!(
        lemma1_bound(&orth, 1.0, 0.25, GROUP_TOL).unwrap(),
        want,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        lemma1_formula(1, 1.0, 1.0, 0.25),
        want,
        max_relative = 1e-15
    );
    assert!(matches!(
        lemma1_bound(&orth, 1.0, 0.5, GROUP_TOL),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn lemma2_examples() {
    let rho = DensityMatrix::from_diag(&[0.5, 0.3, 0.2]).unwrap();
    let same = CQState::new(
        vec![0.4, 0.6],
        vec![rho.clone(), rho],
        Layout::single(Factor::B, 3),
    )
    .unwrap();
    let zero = ProtocolRates::new(0.0, 0.0, 0.0, 0.3).unwrap();
    let (miss, fa) = lemma2_bounds(&same, &zero, GROUP_TOL).unwrap();
    assert_relative_eq!(miss, 3f64.powf(0.3), max_relative = 1e-9);
    assert_relative_eq!(fa, 3f64.powf(0.3), max_relative = 1e-9);

    let inp = qubit_inputs(7);
    let big = ProtocolRates::new(20.0, 20.0, 20.0, 0.3).unwrap();
    let (miss, fa) = lemma2_bounds(&inp.rho_ub, &big, GROUP_TOL).unwrap();
    assert!(miss > 1.0 && fa < 1e-9);
}

#[test]
fn csi_mismatch_is_reported() {
    let p = leaky_swap_instance(0.4, 0.2).unwrap();
    let ens = leaky_swap_ensemble(0.3).unwrap();
    assert!(matches!(
        BoundInputs::new(&p, &ens, &Numerics::default()),
        Err(Error::CsiMismatch { .. })
    ));
    let ens = leaky_swap_ensemble(0.2).unwrap();
    let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
    assert!(inp.covert_applicable && inp.covert_gap < 1e-12);
}

#[test]
fn optimizer_examples() {
    let one = GridConfig {
        alphas: vec![0.2],
        r_js: vec![1.5],
    };
    let best = optimize_bound(|a, rj| Ok(Some(a + rj)), &one).unwrap();
    assert_eq!((best.alpha, best.r_j, best.value), (0.2, 1.5, 1.7));

    let grid = GridConfig {
        alphas: vec![0.3, 0.1, 0.2],
        r_js: vec![0.0, 2.0, 1.0],
    };
    let best = optimize_bound(|_, rj| Ok(Some(10.0 - rj)), &grid).unwrap();
    assert_eq!((best.alpha, best.r_j), (0.1, 2.0));

    let best = optimize_bound(|_, _| Ok(Some(1.0)), &grid).unwrap();
    assert_eq!((best.alpha, best.r_j), (0.1, 0.0));

    assert!(matches!(
        optimize_bound(|_, _| Ok(None), &grid),
        Err(Error::EmptyFeasibleSet)
    ));
    let empty = GridConfig {
        alphas: vec![],
        r_js: vec![1.0],
    };
    assert!(optimize_bound(|_, _| Ok(Some(0.0)), &empty).is_err());
}

#[test]
fn thm1_optimum_is_below_every_grid_point() {
    let inp = qubit_inputs(8);
    let grid = GridConfig {
        alphas: default_alpha_grid(),
        r_js: (0..=12).map(|i| i as f64 * 0.5).collect(),
    };
    let best = optimize_thm1(&inp, 0.25, 0.25, &grid).unwrap();
    for &a in &grid.alphas {
        for &rj in &grid.r_js {
            let rep = bound_report(&inp, &ProtocolRates::new(0.25, 0.25, rj, a).unwrap()).unwrap();
            assert!(best.value <= rep.pe_bound + rep.covert_bound);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_is_finite_nonnegative_and_sums(seed in any::<u64>(), alpha in 0.01f64..0.49, r in 0.0f64..2.0, r_k in 0.0f64..2.0, r_j in 0.0f64..4.0) {
        let inp = qubit_inputs(seed);
        let rt = ProtocolRates::new(r, r_k, r_j, alpha).unwrap();
        let rep = bound_report(&inp, &rt).unwrap();
        let c = rep.components;
        for v in [rep.pe_bound, rep.covert_bound, rep.covert_bound_chain, c.encoding_term, c.decoding_term, c.resolvability_term] {
            prop_assert!(v.is_finite() && v >= 0.0);
        }
        prop_assert!((rep.pe_bound - (c.encoding_term + c.decoding_term)).abs() <= 1e-12 * rep.pe_bound.max(1.0));
        prop_assert!((rep.covert_bound - SQRT2 * rep.covert_bound_chain).abs() <= 1e-12 * rep.covert_bound.max(1.0));
        prop_assert_eq!(rep.pe_bound, thm1_pe_bound(&inp, &rt).unwrap());
        prop_assert_eq!(rep.secure_covert_bound.unwrap(), thm5_secure_covert_bound(&inp, &rt).unwrap());
    }

    #[test]
    fn pe_components_move_with_the_rates(seed in any::<u64>(), alpha in 0.01f64..0.49, step in 0.1f64..2.0) {
        let inp = qubit_inputs(seed);
        let lo = bound_report(&inp, &ProtocolRates::new(0.5, 0.5, 0.5, alpha).unwrap()).unwrap().components;
        let hi = bound_report(&inp, &ProtocolRates::new(0.5, 0.5, 0.5 + step, alpha).unwrap()).unwrap().components;
        prop_assert!(hi.encoding_term < lo.encoding_term);
        prop_assert!(hi.decoding_term > lo.decoding_term);
    }
}
