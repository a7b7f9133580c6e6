use approx::assert_abs_diff_eq;
use covert_core::bounds::{BoundInputs, ProtocolRates};
use covert_core::fixtures::{
    as_layout, be_layout, leaky_swap_ensemble, leaky_swap_instance, random_qubit_fixture,
};
use covert_core::linalg::{eig_hermitian, trace_norm, ComplexMatrix};
use covert_core::numerics::Numerics;
use covert_core::pinching::{decoder_projector, CqProjector, GROUP_TOL};
use covert_core::protocol::{
    build_decoder, build_decoder_for, covert_distance, covert_purified_sq, ideal_error_prob,
    monte_carlo_verify, sample_codebook, sub_codebook_average, uhlmann_penalty, Codebook,
    CovertMode, Estimate, MatchMode,
};
use covert_core::random::{random_density, rng_from_seed};
use covert_core::states::{
    CQState, Csi, DensityMatrix, Factor, Layout, ProblemInstance, QuantumChannel,
};
use covert_core::Error;
use proptest::prelude::*;

fn rates(r: f64, r_k: f64, r_j: f64) -> ProtocolRates {
    ProtocolRates::new(r, r_k, r_j, 0.25).unwrap()
}

fn codebook(sizes: (usize, usize, usize), entries: Vec<usize>) -> Codebook {
    Codebook {
        sizes,
        entries,
        seed: 0,
    }
}

fn projector(blocks: Vec<ComplexMatrix>) -> CqProjector {
    CqProjector { blocks }
}

#[test]
fn codebook_sampling() {
    let cb = sample_codebook(&[0.0, 1.0, 0.0], &rates(2.0, 1.0, 1.0), 3, 4096).unwrap();
    assert_eq!(cb.len(), 16);
    assert!(cb.entries.iter().all(|&u| u == 1));

    let cb = sample_codebook(&[0.5, 0.5], &rates(0.0, 0.0, 0.0), 3, 4096).unwrap();
    assert_eq!((cb.sizes, cb.len()), ((1, 1, 1), 1));

    let cb = sample_codebook(&[0.5, 0.5], &rates(4.0, 3.0, 3.0), 11, 4096).unwrap();
    assert_eq!(cb.len(), 1024);
    let ones = cb.entries.iter().filter(|&&u| u == 1).count() as f64 / 1024.0;
    assert!((ones - 0.5).abs() < 0.05, "{ones}");
    assert_eq!(
        cb,
        sample_codebook(&[0.5, 0.5], &rates(4.0, 3.0, 3.0), 11, 4096).unwrap()
    );
}

#[test]
fn code_sizes_floor_and_cap() {
    let cb = sample_codebook(&[1.0], &rates(1.5, 0.9, 2.2), 0, 4096).unwrap();
    assert_eq!(cb.sizes, (4, 1, 2));
    let err = sample_codebook(&[1.0], &rates(5.0, 4.0, 4.0), 0, 4096).unwrap_err();
    assert!(matches!(
        err,
        Error::CapExceeded {
            requested: 8192,
            cap: 4096
        }
    ));
}

#[test]
fn codebook_indexing_round_trips() {
    let cb = codebook((3, 2, 4), (0..24).collect());
    for idx in 0..24 {
        let (j, k, m) = cb.triple(idx);
        assert_eq!(cb.index(j, k, m), idx);
        assert_eq!(cb.symbol(j, k, m), idx);
    }
}

#[test]
fn decoder_from_a_single_codeword() {
    let p = ComplexMatrix::from_diag_real(&[1.0, 0.0, 1.0]);
    let povm = build_decoder(&codebook((1, 1, 1), vec![0]), &projector(vec![p.clone()])).unwrap();
    assert!(povm.elements[0].max_abs_diff(&p) < 1e-12);
    assert!(
        povm.fail
            .max_abs_diff(&ComplexMatrix::from_diag_real(&[0.0, 1.0, 0.0]))
            < 1e-12
    );

    let povm = build_decoder(
        &codebook((1, 1, 1), vec![0]),
        &projector(vec![ComplexMatrix::identity(3)]),
    )
    .unwrap();
    assert!(povm.elements[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    assert!(povm.fail.max_abs_diff(&ComplexMatrix::zeros(3, 3)) < 1e-12);
}

#[test]
fn decoder_from_the_zero_projector() {
    let cb = codebook((2, 1, 2), vec![0, 1, 1, 0]);
    let povm = build_decoder(&cb, &projector(vec![ComplexMatrix::zeros(2, 2); 2])).unwrap();
    assert!(povm
        .elements
        .iter()
        .all(|e| e.max_abs_diff(&ComplexMatrix::zeros(2, 2)) == 0.0));
    assert!(povm.fail.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
}

#[test]
fn seeded_decoder_is_a_povm() {
    let (p, ens) = random_qubit_fixture(1).unwrap();
    let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
    for seed in 0..10 {
        let rt = rates(1.0, 1.0, 1.0);
        let cb = sample_codebook(ens.probs(), &rt, seed, 4096).unwrap();
        let povm = build_decoder_for(&cb, &inp.rho_ub, &rt, GROUP_TOL).unwrap();
        assert!(povm.completeness_deviation() < 1e-8);
        assert!(povm.min_eigenvalue().unwrap() > -1e-9);
    }
}

#[test]
fn orthogonal_outputs_decode_perfectly() {
    let lay = Layout::single(Factor::B, 4);
    let family: Vec<_> = (0..4).map(|u| DensityMatrix::basis(4, u)).collect();
    let ub = CQState::new(vec![0.25; 4], family.clone(), lay).unwrap();
    let cb = codebook((1, 2, 2), vec![0, 1, 2, 3]);
    let povm = build_decoder(&cb, &decoder_projector(&ub, 1.0, GROUP_TOL).unwrap()).unwrap();
    assert!(ideal_error_prob(&cb, &povm, &family, MatchMode::MessageKey) < 1e-6);
    assert!(ideal_error_prob(&cb, &povm, &family, MatchMode::Triple) < 1e-6);
}

#[test]
fn useless_channel_decodes_by_guessing() {
    let rho = random_density(3, 3, &mut rng_from_seed(2));
    let family = vec![rho.clone(), rho.clone()];
    let cb = codebook((1, 2, 2), vec![0, 1, 1, 0]);
    let povm = build_decoder(&cb, &projector(vec![ComplexMatrix::identity(3); 2])).unwrap();
    assert_abs_diff_eq!(
        ideal_error_prob(&cb, &povm, &family, MatchMode::MessageKey),
        0.75,
        epsilon = 1e-12
    );

    let single = codebook((1, 1, 1), vec![0]);
    let p = ComplexMatrix::from_diag_real(&[1.0, 1.0, 0.0]);
    let povm = build_decoder(&single, &projector(vec![p])).unwrap();
    let want = povm.fail.trace_product(rho.matrix()).re;
    assert_abs_diff_eq!(
        ideal_error_prob(&single, &povm, &family, MatchMode::Triple),
        want,
        epsilon = 1e-12
    );
}

#[test]
fn message_key_error_never_exceeds_triple_error() {
    let (p, ens) = random_qubit_fixture(3).unwrap();
    let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
    let rt = rates(1.0, 0.0, 2.0);
    for seed in 0..10 {
        let cb = sample_codebook(ens.probs(), &rt, seed, 4096).unwrap();
        let povm = build_decoder_for(&cb, &inp.rho_ub, &rt, GROUP_TOL).unwrap();
        let fam = inp.rho_ub.conditionals();
        assert!(
            ideal_error_prob(&cb, &povm, fam, MatchMode::MessageKey)
                <= ideal_error_prob(&cb, &povm, fam, MatchMode::Triple) + 1e-12
        );
    }
}

#[test]
fn uhlmann_penalty_examples() {
    let rho_s = DensityMatrix::from_diag(&[0.6, 0.4]).unwrap();
    let cb = codebook((2, 2, 1), vec![0, 1, 1, 0]);
    assert_abs_diff_eq!(
        uhlmann_penalty(&cb, 0, &rho_s, &[rho_s.clone(), rho_s.clone()]).unwrap(),
        0.0,
        epsilon = 1e-12
    );

    let pure = DensityMatrix::basis(2, 0);
    let orth = vec![DensityMatrix::basis(2, 1); 2];
    assert_abs_diff_eq!(
        uhlmann_penalty(&cb, 0, &pure, &orth).unwrap(),
        1.0,
        epsilon = 1e-12
    );
}

/// Resolvability sets in as the pool 2^{R_J + R_K} grows.
#[test]
fn uhlmann_penalty_decreases_with_the_pool() {
    let (p, ens) = random_qubit_fixture(4).unwrap();
    let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
    let rho_s = inp.rho_us.average();
    let mut means = Vec::new();
    for bits in 1..=6 {
        let rt = rates(0.0, 0.0, bits as f64);
        let samples: Vec<f64> = (0..400)
            .map(|seed| {
                let cb = sample_codebook(ens.probs(), &rt, seed, 4096).unwrap();
                uhlmann_penalty(&cb, 0, &rho_s, inp.rho_us.conditionals()).unwrap()
            })
            .collect();
        means.push(Estimate::from_samples(&samples).mean);
    }
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn covert_distance_examples() {
    let rho0 = random_density(2, 2, &mut rng_from_seed(5));
    let cb = codebook((2, 2, 2), vec![0, 1, 2, 0, 1, 1, 2, 0]);
    let same = vec![rho0.clone(); 3];
    for mode in [CovertMode::CcCsk, CovertMode::CscCsk] {
        assert_abs_diff_eq!(
            covert_distance(&cb, &same, &rho0, mode).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    let mut rng = rng_from_seed(6);
    let family: Vec<_> = (0..3).map(|_| random_density(2, 2, &mut rng)).collect();
    let block = |k: usize| {
        let members: Vec<_> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(j, m)| family[cb.symbol(j, k, m)].clone())
            .collect();
        DensityMatrix::mixture(&[0.25; 4], &members).unwrap()
    };
    let by_hand = (0..2)
        .map(|k| trace_norm(&(block(k).matrix() - rho0.matrix())).unwrap())
        .sum::<f64>()
        / 2.0;
    assert_abs_diff_eq!(
        covert_distance(&cb, &family, &rho0, CovertMode::CcCsk).unwrap(),
        by_hand,
        epsilon = 1e-12
    );

    let sub = sub_codebook_average(&cb, 1, &family);
    let members: Vec<_> = (0..2)
        .flat_map(|k| (0..2).map(move |j| (j, k)))
        .map(|(j, k)| family[cb.symbol(j, k, 1)].clone())
        .collect();
    assert!(
        sub.matrix().max_abs_diff(
            DensityMatrix::mixture(&[0.25; 4], &members)
                .unwrap()
                .matrix()
        ) < 1e-15
    );
}

#[test]
fn trivial_channel_is_perfectly_covert() {
    let rho_s = DensityMatrix::from_diag(&[0.7, 0.3]).unwrap();
    let phi0 = DensityMatrix::basis(2, 0);
    // E = S: the warden always sees ρ_S and the innocent output is ρ_S too.
    let ch =
        QuantumChannel::new(vec![ComplexMatrix::identity(4)], as_layout(), be_layout()).unwrap();
    let p = ProblemInstance::new(ch, phi0.clone(), Csi::Marginal(rho_s.clone())).unwrap();
    let conds = vec![
        DensityMatrix::basis(2, 0).tensor(&rho_s),
        DensityMatrix::basis(2, 1).tensor(&rho_s),
    ];
    let ens = CQState::new(vec![0.5, 0.5], conds, as_layout()).unwrap();
    let rep =
        monte_carlo_verify(&p, &ens, &rates(1.0, 1.0, 1.0), 30, 0, &Numerics::default()).unwrap();
    assert!(rep.covert_applicable);
    assert!(rep.covert_distance.mean < 1e-12 && rep.secure_covert_distance.mean < 1e-12);
    assert!(rep.all_pass(), "{:?}", rep.checks);
}

#[test]
fn seeded_instance_passes_every_check() {
    let p = leaky_swap_instance(0.4, 0.2).unwrap();
    let ens = leaky_swap_ensemble(0.2).unwrap();
    let rep =
        monte_carlo_verify(&p, &ens, &rates(1.0, 1.0, 2.0), 60, 7, &Numerics::default()).unwrap();
    assert_eq!(rep.sizes, (4, 2, 2));
    assert_eq!(rep.checks.len(), 5);
    assert!(rep.all_pass(), "{:?}", rep.checks);
    assert!(rep.max_povm_deviation < 1e-8 && rep.min_povm_eigenvalue > -1e-9);
    assert_eq!(
        rep,
        monte_carlo_verify(&p, &ens, &rates(1.0, 1.0, 2.0), 60, 7, &Numerics::default()).unwrap()
    );
}

#[test]
fn overloaded_channel_reports_vacuous_bounds() {
    // Constant B output: nothing about U reaches the receiver.
    let rho_s = DensityMatrix::from_diag(&[0.5, 0.5]).unwrap();
    let sp = eig_hermitian(DensityMatrix::from_diag(&[0.3, 0.7]).unwrap().matrix()).unwrap();
    let mut kraus = Vec::new();
    for a_in in 0..2 {
        for b_out in 0..2 {
            let mut k = ComplexMatrix::zeros(4, 4);
            for s in 0..2 {
                k[((b_out << 1) | s, (a_in << 1) | s)] =
                    sp.eigenvectors[(b_out, b_out)] * sp.eigenvalues[b_out].sqrt();
            }
            kraus.push(k);
        }
    }
    let ch = QuantumChannel::with_tol(kraus, as_layout(), be_layout(), 1e-9).unwrap();
    let p =
        ProblemInstance::new(ch, DensityMatrix::basis(2, 0), Csi::Marginal(rho_s.clone())).unwrap();
    let conds = vec![
        DensityMatrix::basis(2, 0).tensor(&rho_s),
        DensityMatrix::basis(2, 1).tensor(&rho_s),
    ];
    let ens = CQState::new(vec![0.5, 0.5], conds, as_layout()).unwrap();
    let rep =
        monte_carlo_verify(&p, &ens, &rates(8.0, 0.0, 0.0), 30, 1, &Numerics::default()).unwrap();
    assert!(rep.exact_ideal_error.mean > 0.99);
    let pe = rep.checks.iter().find(|c| c.name == "pe_chain").unwrap();
    assert!(pe.bound > 1.0 && pe.vacuous && pe.pass);
}

#[test]
fn too_few_trials_are_rejected() {
    let p = leaky_swap_instance(0.4, 0.2).unwrap();
    let ens = leaky_swap_ensemble(0.2).unwrap();
    let err = monte_carlo_verify(&p, &ens, &rates(1.0, 1.0, 1.0), 29, 0, &Numerics::default())
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_within_twice_purified(seed in any::<u64>(), r_j in 0usize..=3, r_k in 0usize..=2, r in 0usize..=2) {
        let (p, ens) = random_qubit_fixture(seed).unwrap();
        let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
        let rt = rates(r as f64, r_k as f64, r_j as f64);
        let cb = sample_codebook(ens.probs(), &rt, seed, 4096).unwrap();
        let fam = inp.rho_ue.conditionals();
        for mode in [CovertMode::CcCsk, CovertMode::CscCsk] {
            let d = covert_distance(&cb, fam, &inp.rho_e, mode).unwrap();
            let p2 = covert_purified_sq(&cb, fam, &inp.rho_e, mode).unwrap();
            prop_assert!(d <= 2.0 * p2.sqrt() + 1e-9);
            prop_assert!((0.0..=2.0).contains(&d) && (0.0..=1.0).contains(&p2));
        }
        let cc = covert_distance(&cb, fam, &inp.rho_e, CovertMode::CcCsk).unwrap();
        let csc = covert_distance(&cb, fam, &inp.rho_e, CovertMode::CscCsk).unwrap();
        prop_assert!(csc >= cc - 1e-10);
    }

    #[test]
    fn decoders_are_povms(seed in any::<u64>(), r_j in 0usize..=3, r in 0usize..=2) {
        let (p, ens) = random_qubit_fixture(seed).unwrap();
        let inp = BoundInputs::new(&p, &ens, &Numerics::default()).unwrap();
        let rt = rates(r as f64, 0.0, r_j as f64);
        let cb = sample_codebook(ens.probs(), &rt, seed ^ 1, 4096).unwrap();
        let povm = build_decoder_for(&cb, &inp.rho_ub, &rt, GROUP_TOL).unwrap();
        prop_assert!(povm.completeness_deviation() < 1e-8);
        prop_assert!(povm.min_eigenvalue().unwrap() > -1e-9);
    }
}
