//! Desk-scale acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use covert_core::bounds::{lemma1_bound, lemma2_bounds, ProtocolRates};
use covert_core::classical_sim::{
    auxiliary_marginal, block_sizes, exact_warden_distribution, resolvability_oracle,
    sample_classical_codebook, simulate_classical, ClassicalRates, ClassicalSimConfig, EncodeMode,
    ResolvabilityMode,
};
use covert_core::divergence::{
    fidelity, purified_distance, relative_entropy, sandwiched_renyi, trace_distance,
};
use covert_core::fixtures;
use covert_core::linalg::{eig_hermitian, ComplexMatrix};
use covert_core::pinching::{
    decoder_projector, distinct_eigenspaces, eigencount, pinch, GROUP_TOL,
};
use covert_core::protocol::{monte_carlo_verify, Estimate, SimulationReport};
use covert_core::random::{
    random_channel, random_density, random_distribution, random_hermitian, random_pure,
    random_unitary, rng_from_seed,
};
use covert_core::regions::classical::thm3_value;
use covert_core::regions::fm::fm_check;
use covert_core::regions::{
    classical_region_evaluate, region_cc_csk, region_csc_csk, superposition_transform,
    AuxiliaryPolicy, ClassicalProblem, ClassicalWhich,
};
use covert_core::states::{apply_channel, CQState, DensityMatrix, Factor, Layout};
use covert_core::Numerics;
use rand::Rng;
use rayon::prelude::*;

type Outcome = (bool, String);

fn log2_sum_pow(p: &[f64], q: &[f64], order: f64) -> f64 {
    p.iter()
        .zip(q)
        .map(|(x, y)| x.powf(order) * y.powf(1.0 - order))
        .sum::<f64>()
        .log2()
}

fn diag_state(p: &[f64]) -> DensityMatrix {
    DensityMatrix::from_diag(p).unwrap()
}

fn random_cq<R: Rng>(n_u: usize, d: usize, f: Factor, rng: &mut R) -> CQState {
    let probs = random_distribution(n_u, rng);
    let conds = (0..n_u)
        .map(|_| random_density(d, rng.random_range(1..=d), rng))
        .collect();
    CQState::new(probs, conds, Layout::single(f, d)).unwrap()
}

fn lemma2_exactness() -> Outcome {
    let mut rng = rng_from_seed(101);
    let mut checks = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let d = rng.random_range(2..=4);
        let n_u = rng.random_range(1..=4);
        let cq = random_cq(n_u, d, Factor::B, &mut rng);
        for alpha in [0.1, 0.25, 0.4] {
            for total in [0.0, 0.5, 1.0, 2.0] {
                let rates = ProtocolRates::new(total, 0.0, 0.0, alpha).unwrap();
                let (miss_b, fa_b) = lemma2_bounds(&cq, &rates, GROUP_TOL).unwrap();
                let (miss, fa) = decoder_projector(&cq, total, GROUP_TOL)
                    .unwrap()
                    .lemma2_traces(&cq);
                worst = worst.max(miss - miss_b).max(fa - fa_b);
                checks += 1;
            }
        }
    }
    (
        worst <= 1e-9,
        format!("{checks} checks, max excess {worst:.2e}"),
    )
}

fn lemma1_monte_carlo() -> Outcome {
    let mut rng = rng_from_seed(202);
    let mut lines = Vec::new();
    let mut ok = true;
    for inst in 0..2 {
        let rank = if inst == 0 { 2 } else { 1 };
        let probs = random_distribution(2, &mut rng);
        let conds: Vec<DensityMatrix> = (0..2).map(|_| random_density(2, rank, &mut rng)).collect();
        let cq = CQState::new(probs.clone(), conds.clone(), Layout::single(Factor::E, 2)).unwrap();
        let rho_e = cq.average();
        for r in [1u32, 2] {
            let n_words = 1usize << r;
            for alpha in [0.1, 0.25] {
                let samples: Vec<f64> = (0..2000u64)
                    .into_par_iter()
                    .map(|i| {
                        let mut g = rng_from_seed(covert_core::random::substream_seed(7 + inst, i));
                        let labels: Vec<usize> = (0..n_words)
                            .map(|_| usize::from(g.random::<f64>() >= probs[0]))
                            .collect();
                        let tau = DensityMatrix::mixture(
                            &vec![1.0 / n_words as f64; n_words],
                            &labels.iter().map(|&u| conds[u].clone()).collect::<Vec<_>>(),
                        )
                        .unwrap();
                        sandwiched_renyi(&tau, &rho_e, 1.0 + alpha).unwrap().value
                    })
                    .collect();
                let est = Estimate::from_samples(&samples);
                let bound = lemma1_bound(&cq, r as f64, alpha, GROUP_TOL).unwrap();
                ok &= est.upper() <= bound;
                lines.push(format!("{:.4}+3se<={:.4}", est.mean, bound));
            }
        }
    }
    (ok, lines.join(" "))
}

fn theorem1_chain(reports: &mut Vec<SimulationReport>) -> Outcome {
    let num = Numerics::default();
    let mut cases = vec![(
        "leaky_swap".to_string(),
        fixtures::leaky_swap_instance(0.4, 0.2).unwrap(),
        fixtures::leaky_swap_ensemble(0.2).unwrap(),
    )];
    for seed in [11, 12] {
        let (p, ens) = fixtures::random_qubit_fixture(seed).unwrap();
        cases.push((format!("random{seed}"), p, ens));
    }
    let mut ok = true;
    let mut vacuous = 0;
    let mut total = 0;
    let mut fails = Vec::new();
    for (name, p, ens) in &cases {
        // The last row exceeds (4,2,2) on purpose: at the criterion sizes every bound is
        // above its trivial maximum, so a larger local-randomness pool makes the
        // resolvability checks bite.
        for (r, r_k, r_j, trials) in [
            (1.0, 1.0, 2.0, 200),
            (1.0, 0.0, 1.0, 200),
            (1.0, 1.0, 10.0, 60),
        ] {
            for alpha in [0.1, 0.25, 0.4] {
                let rates = ProtocolRates::new(r, r_k, r_j, alpha).unwrap();
                let rep = monte_carlo_verify(p, ens, &rates, trials, 31, &num).unwrap();
                for c in &rep.checks {
                    total += 1;
                    vacuous += c.vacuous as usize;
                    if !c.pass {
                        fails.push(format!("{name}/{}/a={alpha}", c.name));
                    }
                }
                ok &= rep.all_pass();
                reports.push(rep);
            }
        }
    }
    (
        ok,
        format!(
            "{} runs, {total} checks ({vacuous} vacuous), failures {fails:?}",
            reports.len()
        ),
    )
}

fn pinching_inequality() -> Outcome {
    let mut rng = rng_from_seed(404);
    let mut worst = f64::INFINITY;
    for i in 0..500 {
        let d = rng.random_range(2..=6);
        let rho = random_density(d, rng.random_range(1..=d), &mut rng);
        let sigma = if i % 2 == 0 {
            random_density(d, d, &mut rng)
        } else {
            // Repeated eigenvalues in a random basis.
            let levels = rng.random_range(1..=d);
            let raw: Vec<f64> = (0..d).map(|k| 1.0 + (k % levels) as f64).collect();
            let s: f64 = raw.iter().sum();
            let u = random_unitary(d, &mut rng);
            let m = ComplexMatrix::from_diag_real(&raw.iter().map(|x| x / s).collect::<Vec<_>>())
                .conjugate_by(&u);
            DensityMatrix::with_tol(m.hermitian_part(), 1e-9).unwrap()
        };
        let basis = distinct_eigenspaces(&sigma, GROUP_TOL).unwrap();
        let pinched = pinch(&rho, &basis).unwrap();
        let gap = &pinched.matrix().scale(basis.v() as f64) - rho.matrix();
        worst = worst.min(
            eig_hermitian(&gap.hermitian_part())
                .unwrap()
                .min_eigenvalue(),
        );
    }
    let mut count_ok = true;
    let mut rng = rng_from_seed(405);
    for d in 1..=3usize {
        for trial in 0..3 {
            let sigma = match trial {
                0 => random_density(d, d, &mut rng),
                1 => DensityMatrix::maximally_mixed(d),
                _ => random_density(d, 1, &mut rng),
            };
            let mut pow = sigma.clone();
            for n in 1..=4u32 {
                if n > 1 {
                    pow = pow.tensor(&sigma);
                }
                count_ok &= eigencount(&pow, GROUP_TOL).unwrap() <= (n as usize + 1).pow(d as u32);
            }
        }
    }
    (
        worst >= -1e-9 && count_ok,
        format!("min eigenvalue {worst:.2e}, tensor eigencounts ok: {count_ok}"),
    )
}

fn divergence_correctness() -> Outcome {
    let mut rng = rng_from_seed(505);
    let mut worst_diag = 0.0f64;
    // Pure pairs saturate ‖ρ−σ‖₁ = 2P, so there the comparison is taken at machine precision;
    // every other pair is compared with no slack.
    let mut tp_ok = true;
    let mut tp_excess = f64::NEG_INFINITY;
    let mut tp_strict_violations = 0;
    let mut tp_check = |rho: &DensityMatrix, sigma: &DensityMatrix, saturating: bool| {
        let (t, p) = (
            trace_distance(rho, sigma).unwrap(),
            purified_distance(rho, sigma).unwrap(),
        );
        let slack = if saturating { 16.0 * f64::EPSILON } else { 0.0 };
        tp_ok &= t <= 2.0 * p + slack;
        tp_strict_violations += (t > 2.0 * p) as usize;
        tp_excess = tp_excess.max(t - 2.0 * p);
    };
    let orders = [0.5, 0.8, 1.25, 1.5, 2.0];
    for i in 0..100 {
        let d = rng.random_range(2..=5);
        let (p, q) = (
            random_distribution(d, &mut rng),
            random_distribution(d, &mut rng),
        );
        let (rho, sigma) = if i % 2 == 0 {
            (diag_state(&p), diag_state(&q))
        } else {
            let u = random_unitary(d, &mut rng);
            let rot = |x: &[f64]| {
                DensityMatrix::with_tol(
                    ComplexMatrix::from_diag_real(x)
                        .conjugate_by(&u)
                        .hermitian_part(),
                    1e-9,
                )
                .unwrap()
            };
            (rot(&p), rot(&q))
        };
        let l1: f64 = p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum();
        let bc: f64 = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).sum();
        let kl: f64 = p.iter().zip(&q).map(|(x, y)| x * (x / y).log2()).sum();
        let order = orders[i % orders.len()];
        let renyi = log2_sum_pow(&p, &q, order) / (order - 1.0);
        let errs = [
            (trace_distance(&rho, &sigma).unwrap() - l1).abs(),
            (fidelity(&rho, &sigma).unwrap() - bc).abs(),
            (purified_distance(&rho, &sigma).unwrap() - (1.0 - bc * bc).max(0.0).sqrt()).abs(),
            (relative_entropy(&rho, &sigma).unwrap().value - kl).abs(),
            (sandwiched_renyi(&rho, &sigma, order).unwrap().value - renyi).abs(),
        ];
        worst_diag = errs.iter().fold(worst_diag, |a, &b| a.max(b));
        tp_check(&rho, &sigma, false);
    }

    let mut worst_dpi = f64::NEG_INFINITY;
    for i in 0..200 {
        let (din, dout) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let ch = random_channel(
            Layout::single(Factor::A, din),
            Layout::single(Factor::B, dout),
            rng.random_range(1..=3),
            &mut rng,
        );
        let rho = random_density(din, rng.random_range(1..=din), &mut rng);
        let sigma = random_density(din, din, &mut rng);
        let order = 1.0 + [0.1, 0.25, 0.4, 0.75, 1.0][i % 5];
        let before = sandwiched_renyi(&rho, &sigma, order).unwrap().value;
        let (nr, ns) = (
            apply_channel(&ch, &rho).unwrap(),
            apply_channel(&ch, &sigma).unwrap(),
        );
        let after = sandwiched_renyi(&nr, &ns, order).unwrap().value;
        worst_dpi = worst_dpi.max(after - before);
        tp_check(&rho, &sigma, false);
        tp_check(&nr, &ns, false);
    }

    let mut worst_pure = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(2..=5);
        let (rho, sigma) = (random_pure(d, &mut rng), random_pure(d, &mut rng));
        let overlap = rho.matrix().trace_product(sigma.matrix()).re;
        let f = fidelity(&rho, &sigma).unwrap();
        let d_half = sandwiched_renyi(&rho, &sigma, 0.5).unwrap().value;
        worst_pure = worst_pure
            .max((f * f - (-d_half).exp2()).abs())
            .max((f * f - overlap).abs());
        tp_check(&rho, &sigma, true);
    }
    let ok = worst_diag <= 1e-9 && worst_dpi <= 1e-9 && worst_pure <= 1e-8 && tp_ok;
    (
        ok,
        format!(
            "diagonal err {worst_diag:.2e}, data processing excess {worst_dpi:.2e}, pure-pair err {worst_pure:.2e}, trace<=2P {tp_ok} (max excess {tp_excess:.2e}, {tp_strict_violations} saturated pairs above by rounding)"
        ),
    )
}

fn fourier_motzkin_equivalence() -> Outcome {
    let mut rng = rng_from_seed(606);
    let mut triples = vec![(0.3, 1.0, 0.4)];
    triples.extend((0..50).map(|_| {
        (
            rng.random::<f64>() * 1.5,
            rng.random::<f64>() * 1.5,
            rng.random::<f64>() * 1.5,
        )
    }));
    let results: Vec<_> = triples
        .par_iter()
        .map(|&(a, b, c)| fm_check(a, b, c, 0.02))
        .collect();
    let points: usize = results.iter().map(|r| r.grid_points).sum();
    let bad: usize = results.iter().map(|r| r.mismatches.len()).sum();
    (
        bad == 0,
        format!(
            "{} triples, {points} grid points, {bad} mismatches",
            triples.len()
        ),
    )
}

fn random_classical<R: Rng>(rng: &mut R) -> (ClassicalProblem, AuxiliaryPolicy) {
    let (n_a, n_s, n_b, n_e) = (
        rng.random_range(2..=3),
        rng.random_range(2..=3),
        rng.random_range(2..=3),
        rng.random_range(2..=3),
    );
    let w: Vec<f64> = (0..n_a * n_s)
        .flat_map(|_| random_distribution(n_b * n_e, rng))
        .collect();
    let p = ClassicalProblem::new(
        n_a,
        n_s,
        n_b,
        n_e,
        random_distribution(n_s, rng),
        w,
        0,
        true,
    )
    .unwrap();
    let n_u = rng.random_range(2..=4);
    let pol = AuxiliaryPolicy::new(
        (0..n_s).map(|_| random_distribution(n_u, rng)).collect(),
        (0..n_u)
            .map(|_| (0..n_s).map(|_| random_distribution(n_a, rng)).collect())
            .collect(),
    )
    .unwrap();
    (p, pol)
}

fn region_nesting_and_superposition() -> Outcome {
    let num = Numerics::default();
    let mut nested = 0;
    for seed in 0..50 {
        let (p, ens) = fixtures::random_qubit_fixture(1000 + seed).unwrap();
        let cc = region_cc_csk(&p, &ens, true, &num).unwrap();
        let csc = region_csc_csk(&p, &ens, true, &num).unwrap();
        nested += cc.contains_region(&csc) as usize;
    }
    let mut rng = rng_from_seed(707);
    let mut worst_id = 0.0f64;
    let mut worst_thm3 = 0.0f64;
    for _ in 0..100 {
        let (p, pol) = random_classical(&mut rng);
        let st = superposition_transform(&p, &pol).unwrap();
        worst_id = worst_id
            .max((st.raw.i_ub - st.transformed.i_ub).abs())
            .max((st.raw.i_us - st.transformed.i_us).abs())
            .max((st.raw.i_ue - st.transformed.i_ue).abs());
        let direct = classical_region_evaluate(&p, &pol, ClassicalWhich::Thm3, true, &num)
            .unwrap()
            .value
            .unwrap();
        worst_thm3 = worst_thm3.max((st.thm3_via_transform - direct).abs());
    }
    let ok = nested == 50 && worst_id <= 1e-9 && worst_thm3 <= 1e-9;
    (
        ok,
        format!("nested {nested}/50, identity err {worst_id:.2e}, thm3 err {worst_thm3:.2e}"),
    )
}

fn resolvability_trend() -> Outcome {
    let p = fixtures::bsc_crossover_for_capacity(0.2);
    let (p_u, p_e) = fixtures::bsc_warden(p);
    let mut prev = f64::INFINITY;
    let mut ok = true;
    let mut lines = Vec::new();
    for r in [0.25, 0.5, 1.0, 1.5, 2.0] {
        let est = resolvability_oracle(
            &p_u,
            &p_e,
            r,
            4,
            ResolvabilityMode::MonteCarlo {
                codebooks: 4000,
                seed: 7,
            },
        )
        .unwrap();
        ok &= est.estimate.mean < prev && est.estimate.upper() <= est.lemma1_bound;
        prev = est.estimate.mean;
        lines.push(format!(
            "R={r}: {:.4}<={:.3}",
            est.estimate.mean, est.lemma1_bound
        ));
    }
    (ok, format!("crossover {p:.4}; {}", lines.join(", ")))
}

fn classical_end_to_end() -> Outcome {
    let num = Numerics::default();
    let p = fixtures::redundant_symbol_problem(0.05, 0.25, 0.01).unwrap();
    let pol = fixtures::redundant_symbol_policy();
    let ev = classical_region_evaluate(&p, &pol, ClassicalWhich::Thm6, false, &num).unwrap();
    let t = ev.terms;
    let sum = thm3_value(&t);
    // Equal split of the sum-rate facet, scaled to 70%.
    let (r, r_k) = (0.7 * 0.5 * sum, 0.7 * 0.5 * sum);
    let proxy = t.i_ue_given_s + t.h_s - t.h_s_given_e;
    let rates = ClassicalRates {
        r,
        r_k,
        r_j: 1.2 * proxy,
    };
    let lifted = pol.lift_superposition();
    let mut errs = Vec::new();
    for n in [6, 8, 10] {
        let cfg = ClassicalSimConfig {
            n,
            rates,
            trials: 3000,
            seed: 1,
            mode: EncodeMode::Likelihood,
            cap: 1 << 20,
        };
        errs.push(simulate_classical(&p, &lifted, &cfg).unwrap().error_km);
    }
    let decreasing = errs.windows(2).all(|w| w[1].mean < w[0].mean);
    let sizes = block_sizes(&rates, 6, 1 << 20).unwrap();
    let p_u = auxiliary_marginal(&p, &lifted);
    let tvs: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(covert_core::random::substream_seed(99, i));
            let cb = sample_classical_codebook(&p_u, 6, sizes, &mut rng).unwrap();
            exact_warden_distribution(&cb, &lifted, &p, EncodeMode::Likelihood, 1 << 12)
                .unwrap()
                .tv
        })
        .collect();
    let tv = Estimate::from_samples(&tvs);
    let ok = decreasing && tv.upper() < 0.2;
    (
        ok,
        format!(
            "R=R_K={r:.4} R_J={:.4}; (k,m)-error {:.3} {:.3} {:.3}; TV(n=6) {:.4}±{:.4}",
            rates.r_j, errs[0].mean, errs[1].mean, errs[2].mean, tv.mean, tv.std_err
        ),
    )
}

fn kernel_integrity(reports: &[SimulationReport]) -> Outcome {
    let mut rng = rng_from_seed(1010);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let m = random_hermitian(2 + i % 7, &mut rng);
        worst = worst.max(eig_hermitian(&m).unwrap().reconstruct().max_abs_diff(&m));
    }
    let povm = reports
        .iter()
        .map(|r| r.max_povm_deviation)
        .fold(0.0, f64::max);
    let ok = worst < 1e-10 && povm <= 1e-8 && !reports.is_empty();
    (
        ok,
        format!(
            "reconstruction {worst:.2e}, POVM completeness {povm:.2e} over {} runs",
            reports.len()
        ),
    )
}

fn report(id: usize, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let pass = ok && elapsed <= limit;
    println!(
        "criterion {id}: {} ({:.1}s / {}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut reports = Vec::new();
    let results = [
        report(1, secs(60), lemma2_exactness),
        report(2, secs(120), lemma1_monte_carlo),
        report(3, secs(300), || theorem1_chain(&mut reports)),
        report(4, secs(30), pinching_inequality),
        report(5, secs(60), divergence_correctness),
        report(6, secs(30), fourier_motzkin_equivalence),
        report(7, secs(60), region_nesting_and_superposition),
        report(8, secs(120), resolvability_trend),
        report(9, secs(300), classical_end_to_end),
        report(10, secs(60), || kernel_integrity(&reports)),
    ];
    let passed = results.iter().filter(|&&x| x).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
