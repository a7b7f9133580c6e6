use covert_core::bounds::{
    bound_report, default_alpha_grid, lemma1_bound, lemma2_bounds, optimize_bound, optimize_thm1,
    BoundInputs, GridConfig, ProtocolRates,
};
use covert_core::classical_sim::{simulate_classical, ClassicalSimConfig};
use covert_core::divergence::{
    fidelity, purified_distance, relative_entropy, sandwiched_renyi, trace_distance,
};
use covert_core::pinching::decoder_projector;
use covert_core::protocol::monte_carlo_verify;
use covert_core::regions::{
    causal_rate_classical, causal_rate_quantum, classical_region_evaluate, corollary_rates,
    corollary_rates_from_terms, evaluate_ensemble, optimize_auxiliary, region_cc_csk,
    region_csc_csk, AuxiliaryPolicy, ClassicalProblem, ClassicalWhich, RateRegion, RegionTerms,
};
use covert_core::Numerics;
use serde_json::{json, Value};

use crate::exit::{CliError, Code};
use crate::report::{to_value, CsvRow, Verdict};
use crate::spec::{QuantumProblem, SpecFile};
use crate::{BoundWhich, Measure, RegionWhich, SimTarget};

/// Result body, optional verdict and optional boundary CSV rows.
pub struct Outcome {
    pub result: Value,
    pub verdict: Option<Verdict>,
    pub csv: Option<Vec<CsvRow>>,
}

impl Outcome {
    fn plain(result: Value) -> Self {
        Outcome {
            result,
            verdict: None,
            csv: None,
        }
    }
}

pub fn divergence(
    spec: &SpecFile,
    rho: &str,
    sigma: &str,
    measure: Measure,
    order: f64,
) -> Result<Outcome, CliError> {
    let num = &spec.numerics;
    let state = |name: &str| {
        spec.states
            .get(name)
            .ok_or_else(|| {
                CliError::parse(format!("field `states.{name}`: no state of that name"))
            })?
            .to_state(&format!("states.{name}"), num)
    };
    let (r, s) = (state(rho)?, state(sigma)?);
    if r.dim() != s.dim() {
        return Err(CliError::dims(format!(
            "`{rho}` has dimension {}, `{sigma}` has {}",
            r.dim(),
            s.dim()
        )));
    }
    let want = |m: Measure| measure == Measure::All || measure == m;
    let mut out = serde_json::Map::new();
    if want(Measure::Trace) {
        out.insert("trace_distance".into(), json!(trace_distance(&r, &s)?));
    }
    if want(Measure::Fidelity) {
        out.insert("fidelity".into(), json!(fidelity(&r, &s)?));
    }
    if want(Measure::Purified) {
        out.insert(
            "purified_distance".into(),
            json!(purified_distance(&r, &s)?),
        );
    }
    if want(Measure::Relative) {
        out.insert(
            "relative_entropy".into(),
            to_value(&relative_entropy(&r, &s)?),
        );
    }
    if want(Measure::Sandwiched) {
        out.insert(
            "sandwiched_renyi".into(),
            json!({ "order": order, "divergence": to_value(&sandwiched_renyi(&r, &s, order)?) }),
        );
    }
    Ok(Outcome::plain(
        json!({ "rho": rho, "sigma": sigma, "measures": out }),
    ))
}

fn grid_with(alpha: f64, r_j: f64) -> GridConfig {
    let mut g = GridConfig::default();
    g.alphas.push(alpha);
    g.r_js.push(r_j);
    g
}

pub fn bound(
    spec: &SpecFile,
    which: BoundWhich,
    alpha: Option<f64>,
    optimize: bool,
    stealth: bool,
) -> Result<Outcome, CliError> {
    let q = spec.quantum()?;
    let num = &spec.numerics;
    let QuantumProblem {
        instance, ensemble, ..
    } = q.build(num)?;
    let inp = BoundInputs::new(&instance, &ensemble, num)?;
    let alpha = alpha.unwrap_or(q.alpha);
    let rates = ProtocolRates::new(q.rates.r, q.rates.r_k, q.rates.r_j, alpha)?;
    let covert_bounds = matches!(which, BoundWhich::Thm1 | BoundWhich::Thm5);
    if covert_bounds && !inp.covert_applicable && !stealth {
        return Err(CliError::new(
            Code::CovertInfeasible,
            format!(
                "ensemble gives ‖ρ_E − ρ₀‖₁ = {:.3e} > covert_tol {:.1e}; pass --stealth to measure against ρ_E",
                inp.covert_gap, num.covert_tol
            ),
        ));
    }
    let reference = if inp.covert_applicable {
        "rho_0"
    } else {
        "rho_E"
    };
    let grid = grid_with(alpha, q.rates.r_j);
    let result = match which {
        BoundWhich::Thm1 => {
            let rep = bound_report(&inp, &rates)?;
            let mut v = json!({ "reference": reference, "report": to_value(&rep) });
            if optimize {
                let opt = optimize_thm1(&inp, q.rates.r, q.rates.r_k, &grid)?;
                let default_value = rep.pe_bound + rep.covert_bound;
                v["optimum"] = to_value(&opt);
                v["default_value"] = json!(default_value);
                v["optimum_le_default"] = json!(opt.value <= default_value);
            }
            v
        }
        BoundWhich::Thm5 => {
            let rep = bound_report(&inp, &rates)?;
            let secure = rep.secure_covert_bound.expect("always reported");
            let jensen = rep.secure_covert_bound_jensen.expect("always reported");
            let mut v = json!({
                "reference": reference,
                "report": to_value(&rep),
                "secure_ge_thm1_chain": secure >= rep.covert_bound_chain,
                "secure_jensen_ge_thm1": jensen >= rep.covert_bound,
            });
            if optimize {
                let (r, r_k) = (q.rates.r, q.rates.r_k);
                let opt = optimize_bound(
                    |a, r_j| {
                        let rep = bound_report(&inp, &ProtocolRates::new(r, r_k, r_j, a)?)?;
                        Ok(Some(
                            rep.pe_bound + rep.secure_covert_bound_jensen.expect("always reported"),
                        ))
                    },
                    &grid,
                )?;
                let default_value = rep.pe_bound + jensen;
                v["optimum"] = to_value(&opt);
                v["default_value"] = json!(default_value);
                v["optimum_le_default"] = json!(opt.value <= default_value);
            }
            v
        }
        BoundWhich::Lemma1 => {
            let pool = q.rates.r_j + q.rates.r;
            let at = |a: f64| lemma1_bound(&inp.rho_ue, pool, a, num.group_tol);
            let mut v = json!({ "pool_rate": pool, "alpha": alpha, "bound": at(alpha)? });
            if optimize {
                let mut alphas = default_alpha_grid();
                alphas.push(alpha);
                alphas.sort_by(f64::total_cmp);
                let mut best = (f64::INFINITY, alpha);
                for a in alphas {
                    let b = at(a)?;
                    if b < best.0 {
                        best = (b, a);
                    }
                }
                v["optimum"] = json!({ "alpha": best.1, "bound": best.0 });
            }
            v
        }
        BoundWhich::Lemma2 => {
            let total = rates.total();
            let (miss_bound, fa_bound) = lemma2_bounds(&inp.rho_ub, &rates, num.group_tol)?;
            let (miss, fa) =
                decoder_projector(&inp.rho_ub, total, num.group_tol)?.lemma2_traces(&inp.rho_ub);
            let ok = miss <= miss_bound + 1e-9 && fa <= fa_bound + 1e-9;
            let v = json!({
                "threshold": total,
                "alpha": alpha,
                "miss": miss,
                "miss_bound": miss_bound,
                "false_alarm": fa,
                "false_alarm_bound": fa_bound,
            });
            return Ok(Outcome {
                result: v,
                verdict: Some(Verdict::from_bool(ok)),
                csv: None,
            });
        }
    };
    Ok(Outcome::plain(result))
}

fn region_rows(region: &RateRegion, n: usize) -> Vec<CsvRow> {
    region
        .sweep(n)
        .into_iter()
        .map(|p| CsvRow {
            w_r: p.w_r,
            w_rk: p.w_rk,
            r: p.r,
            r_k: p.r_k,
            active: p.active.join("; "),
        })
        .collect()
}

fn scalar_row(value: f64, label: &str) -> Vec<CsvRow> {
    vec![CsvRow {
        w_r: 1.0,
        w_rk: 0.0,
        r: value,
        r_k: 0.0,
        active: label.to_string(),
    }]
}

fn region_value(region: &RateRegion, n: usize) -> Value {
    json!({
        "constraints": to_value(&region.constraints),
        "vertices": to_value(&region.vertices),
        "clamped": region.clamped,
        "boundary": to_value(&region.sweep(n)),
    })
}

pub fn region(
    spec: &SpecFile,
    which: RegionWhich,
    stealth: bool,
    optimize: bool,
    seed: Option<u64>,
    sweep: usize,
) -> Result<Outcome, CliError> {
    if sweep < 2 {
        return Err(CliError::run(
            "--sweep needs at least two weight directions",
        ));
    }
    if spec.quantum.is_some() && spec.kind == crate::spec::Kind::Quantum {
        quantum_region(spec, which, stealth, sweep)
    } else {
        classical_region(spec, which, stealth, optimize, seed, sweep)
    }
}

fn quantum_region(
    spec: &SpecFile,
    which: RegionWhich,
    stealth: bool,
    sweep: usize,
) -> Result<Outcome, CliError> {
    let num = &spec.numerics;
    let qp = spec.quantum()?.build(num)?;
    let (p, ens) = (&qp.instance, &qp.ensemble);
    match which {
        RegionWhich::CcCsk | RegionWhich::CscCsk => {
            let cc = region_cc_csk(p, ens, stealth, num)?;
            let csc = region_csc_csk(p, ens, stealth, num)?;
            let ev = evaluate_ensemble(p, ens, stealth, num)?;
            let main = if which == RegionWhich::CcCsk {
                &cc
            } else {
                &csc
            };
            Ok(Outcome {
                result: json!({
                    "terms": to_value(&ev.terms),
                    "covert_gap": ev.covert_gap,
                    "covert_ok": ev.covert_ok,
                    "region": region_value(main, sweep),
                    "csc_csk_within_cc_csk": cc.contains_region(&csc),
                }),
                verdict: None,
                csv: Some(region_rows(main, sweep)),
            })
        }
        RegionWhich::Corollaries => {
            let c = corollary_rates(p, ens, stealth, num)?;
            Ok(Outcome {
                result: to_value(&c),
                verdict: None,
                csv: None,
            })
        }
        RegionWhich::Causal => {
            let ensembles = if qp.causal_ensembles.is_empty() {
                vec![qp.ensemble.clone()]
            } else {
                qp.causal_ensembles
            };
            let c = causal_rate_quantum(p, &ensembles, stealth, num)?;
            Ok(Outcome {
                result: to_value(&c),
                verdict: None,
                csv: Some(scalar_row(c.value, "causal")),
            })
        }
        RegionWhich::Thm3 | RegionWhich::Thm4 | RegionWhich::Thm6 => Err(CliError::run(format!(
            "{which:?} is defined for classical specs only"
        ))),
    }
}

fn classical_which(w: RegionWhich) -> ClassicalWhich {
    match w {
        RegionWhich::CcCsk => ClassicalWhich::CcCsk,
        RegionWhich::CscCsk => ClassicalWhich::CscCsk,
        RegionWhich::Thm3 => ClassicalWhich::Thm3,
        RegionWhich::Thm4 => ClassicalWhich::Thm4Degraded,
        RegionWhich::Thm6 => ClassicalWhich::Thm6,
        RegionWhich::Causal | RegionWhich::Corollaries => ClassicalWhich::Causal,
    }
}

fn classical_region(
    spec: &SpecFile,
    which: RegionWhich,
    stealth: bool,
    optimize: bool,
    seed: Option<u64>,
    sweep: usize,
) -> Result<Outcome, CliError> {
    let num = &spec.numerics;
    let cs = spec.classical()?;
    let p = cs.build_problem()?;
    if which == RegionWhich::Causal {
        let pols = if cs.causal_policies.is_empty() {
            vec![cs.policy()?]
        } else {
            cs.causal_policies.clone()
        };
        for (i, pol) in pols.iter().enumerate() {
            pol.validate().map_err(|e| {
                CliError::from(e).context(&format!("classical.causal_policies[{i}]"))
            })?;
        }
        let c = causal_rate_classical(&p, &pols, stealth, num)?;
        return Ok(Outcome {
            result: to_value(&c),
            verdict: None,
            csv: Some(scalar_row(c.value, "causal")),
        });
    }
    let target = if which == RegionWhich::Corollaries {
        ClassicalWhich::CcCsk
    } else {
        classical_which(which)
    };
    let (pol, search) = if optimize {
        let mut cfg = cs.search.clone();
        cfg.stealth = stealth;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let res = optimize_auxiliary(&p, cs.weights, target, &cfg, num)?;
        (res.policy.clone(), Some(to_value(&res)))
    } else {
        (cs.policy()?, None)
    };
    let ev = classical_region_evaluate(&p, &pol, target, stealth, num)?;
    let t = ev.terms;
    let mut result = json!({
        "terms": to_value(&t),
        "covert_gap": ev.covert_gap,
        "covert_ok": ev.covert_ok,
        "policy": to_value(&pol),
    });
    if let Some(s) = search {
        result["search"] = s;
    }
    let mut csv = None;
    match which {
        RegionWhich::Corollaries => {
            let c = corollary_rates_from_terms(RegionTerms {
                i_ub: t.i_ub,
                i_us: t.i_us,
                i_ue: t.i_ue,
            });
            result["corollaries"] = to_value(&c);
        }
        RegionWhich::Thm3 => {
            let v = ev.value.expect("scalar evaluation");
            result["value"] = json!(v);
            csv = Some(scalar_row(v, "thm3"));
        }
        _ => {
            let region = ev.region.as_ref().expect("region evaluation");
            result["region"] = region_value(region, sweep);
            if let Some(d) = ev.degradedness {
                result["degradedness"] = to_value(&d);
            }
            if matches!(which, RegionWhich::CcCsk | RegionWhich::CscCsk) {
                let other = if which == RegionWhich::CcCsk {
                    ClassicalWhich::CscCsk
                } else {
                    ClassicalWhich::CcCsk
                };
                let ev2 = classical_region_evaluate(&p, &pol, other, stealth, num)?;
                let r2 = ev2.region.expect("region evaluation");
                let (cc, csc) = if which == RegionWhich::CcCsk {
                    (region, &r2)
                } else {
                    (&r2, region)
                };
                result["csc_csk_within_cc_csk"] = json!(cc.contains_region(csc));
            }
            csv = Some(region_rows(region, sweep));
        }
    }
    Ok(Outcome {
        result,
        verdict: None,
        csv,
    })
}

pub fn simulate(
    spec: &SpecFile,
    target: Option<SimTarget>,
    trials: usize,
    seed: u64,
    cap: Option<u64>,
    alpha: Option<f64>,
) -> Result<Outcome, CliError> {
    let target = target.unwrap_or(match spec.kind {
        crate::spec::Kind::Quantum => SimTarget::Quantum,
        crate::spec::Kind::Classical => SimTarget::Classical,
    });
    match target {
        SimTarget::Quantum => {
            let q = spec.quantum()?;
            let mut num: Numerics = spec.numerics;
            if let Some(c) = cap {
                num.codebook_cap = c;
            }
            let qp = q.build(&num)?;
            let rates = ProtocolRates::new(
                q.rates.r,
                q.rates.r_k,
                q.rates.r_j,
                alpha.unwrap_or(q.alpha),
            )?;
            let rep = monte_carlo_verify(&qp.instance, &qp.ensemble, &rates, trials, seed, &num)?;
            Ok(Outcome {
                verdict: Some(Verdict::from_bool(rep.all_pass())),
                result: to_value(&rep),
                csv: None,
            })
        }
        SimTarget::Classical => {
            let cs = spec.classical()?;
            let p: ClassicalProblem = cs.build_problem()?;
            let base: AuxiliaryPolicy = cs.policy()?;
            let pol = if cs.superposition {
                base.lift_superposition()
            } else {
                base
            };
            let rates = cs
                .rates
                .ok_or_else(|| CliError::run("classical.rates is required for simulate"))?;
            let cfg = ClassicalSimConfig {
                n: cs.n,
                rates,
                trials,
                seed,
                mode: cs.mode,
                cap: cap.unwrap_or(1 << 20),
            };
            let rep = simulate_classical(&p, &pol, &cfg)?;
            Ok(Outcome::plain(to_value(&rep)))
        }
    }
}
