//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured headline numbers (visible with
//! `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{walkthrough, random_dims, random_policy, random_scenario, random_simplex, s2};
use zetar::belief::{posterior, signal_marginal, PolicyMatrix};
use zetar::geometry::{ct_polytope_vertices, pt_halfspaces, vrep_to_hrep};
use zetar::insider::{
    belief_threshold, classify_policy_with, trust_row_holds, InsiderOracle, InsiderView,
    PolicyLabel,
};
use zetar::learner::{learn_ct_set, learn_pt_cube_vertices, learn_pt_polytope_vertices, LearnerConfig};
use zetar::mat::{Matrix, Tensor3};
use zetar::metrics::{acel_with, asal_with, isal_with, report_with, MetricContext};
use zetar::optimizer::{
    aligned_optimum, closed_form_linear_dependence, full_info_policy, invariant_perturbation,
    maximize_over_system, solve_dual_lp, solve_optimal_acel, solve_primal_eta, zero_info_policy,
    OptimalPolicyKind, SolverConfig,
};
use zetar::scenario::{joint_prior, ComplianceAttitude, ScenarioModel};

fn defender_objective(ctx: &MetricContext<f64>) -> Matrix<f64> {
    Matrix::from_fn(ctx.num_actions(), ctx.view.num_audits(), |k, x| {
        ctx.view.prior.marg_x[x] * ctx.bar_d.get(x, k)
    })
}

fn policy_square(p1: f64, p2: f64) -> PolicyMatrix<f64> {
    PolicyMatrix::from_rows(vec![vec![p1, p2], vec![1.0 - p1, 1.0 - p2]]).unwrap()
}

#[test]
fn criterion_01_bayesian_plausibility() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (j, i, k) = random_dims(&mut rng, 4);
        let m = random_scenario(&mut rng, j, i, k);
        let pi = random_policy(&mut rng, k, i);
        let prior = joint_prior(&m);
        let bs = signal_marginal(&m, &pi);
        for x in 0..i {
            let mut mixed = 0.0;
            for s in 0..k {
                if let Ok(post) = posterior(&m, &pi, s) {
                    mixed += bs[s] * post.marg_x[x];
                }
            }
            worst = worst.max((mixed - prior.marg_x[x]).abs());
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-12, "plausibility residual {worst:e}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 01 PASS: bayesian plausibility residual {worst:.2e} in {elapsed:?}");
}

#[test]
fn criterion_02_conditional_belief_invariance() {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (j, i, k) = random_dims(&mut rng, 4);
        let m = random_scenario(&mut rng, j, i, k);
        let pi = random_policy(&mut rng, k, i);
        let prior = joint_prior(&m);
        for s in 0..k {
            let Ok(post) = posterior(&m, &pi, s) else {
                continue;
            };
            for x in 0..i {
                if post.marg_x[x] <= 0.0 {
                    continue;
                }
                for y in 0..j {
                    let d =
                        (post.cond_y_given_x.get(y, x) - prior.cond_y_given_x.get(y, x)).abs();
                    worst = worst.max(d);
                }
            }
        }
    }
    assert!(worst <= 1e-12, "conditional drift {worst:e}");
    println!("criterion 02 PASS: conditional-belief drift {worst:.2e}");
}

#[test]
fn criterion_03_strong_duality() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (j, i, k) = random_dims(&mut rng, 4);
        let m = random_scenario(&mut rng, j, i, k);
        let primal = solve_optimal_acel(&m).unwrap();
        let dual = solve_dual_lp(&m).unwrap();
        worst = worst.max((primal.value - dual.value).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-8, "duality gap {worst:e}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 03 PASS: worst primal/dual gap {worst:.2e} in {elapsed:?}");
}

#[test]
fn criterion_04_grid_oracle_optimality() {
    let start = Instant::now();
    for attitude in ComplianceAttitude::ALL {
        let m = s2(attitude, 10.0, 0.2);
        let ctx = MetricContext::new(&m);
        let mut grid_max = f64::NEG_INFINITY;
        for a in 0..=100 {
            for b in 0..=100 {
                let pi = policy_square(a as f64 / 100.0, b as f64 / 100.0);
                grid_max = grid_max.max(acel_with(&ctx, &pi));
            }
        }
        let lp = solve_optimal_acel(&m).unwrap();
        // Lipschitz slack per coordinate: the objective varies by at most
        // b_X(x) times the defender's utility range along each axis.
        let slack: f64 = 0.01
            * (0..2)
                .map(|x| {
                    let lo = ctx.bar_d.get(x, 0).min(ctx.bar_d.get(x, 1));
                    let hi = ctx.bar_d.get(x, 0).max(ctx.bar_d.get(x, 1));
                    ctx.view.prior.marg_x[x] * (hi - lo)
                })
                .sum::<f64>();
        assert!(
            lp.metrics.acel >= grid_max - 0.01,
            "{attitude:?}: LP {} below grid {grid_max}",
            lp.metrics.acel
        );
        assert!(
            lp.metrics.acel <= grid_max + slack,
            "{attitude:?}: LP {} exceeds grid {grid_max} + slack {slack}",
            lp.metrics.acel
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 04 PASS: LP matches the 0.01-grid oracle for all attitudes in {elapsed:?}");
}

#[test]
fn criterion_05_linear_dependence_closed_forms() {
    let mut rng = StdRng::seed_from_u64(5);
    let scales = [-2.0, -1.0, 1.0, 2.0];
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let j = rng.gen_range(1..=3);
        let i = rng.gen_range(1..=3);
        let k = rng.gen_range(2..=3);
        let mut m = random_scenario(&mut rng, j, i, k);
        let rho = scales[trial % scales.len()];
        let rho_tr = Matrix::from_fn(j, i, |_, _| rng.gen_range(-2.0..2.0));
        m.v_d = Tensor3::from_fn(j, i, k, |y, x, a| rho * m.v_u.get(y, x, a) + rho_tr.get(y, x));

        let closed = closed_form_linear_dependence(&m, rho, &rho_tr).unwrap();
        let lp = solve_optimal_acel(&m).unwrap();
        worst = worst.max((lp.metrics.acel - closed.acel_star).abs());

        let ctx = MetricContext::new(&m);
        if rho <= 0.0 {
            assert_eq!(closed.kind, OptimalPolicyKind::ZeroInfo);
            // The zero-information policy attains the optimum (zero).
            assert!(acel_with(&ctx, &zero_info_policy(&m)).abs() <= 1e-10);
            assert!(lp.metrics.acel.abs() <= 1e-8);
        } else {
            assert_eq!(closed.kind, OptimalPolicyKind::FullInfo);
            let pf_acel = acel_with(&ctx, &full_info_policy(&m));
            assert!(
                (pf_acel - closed.acel_star).abs() <= 1e-8,
                "full-information policy misses the optimum: {pf_acel} vs {}",
                closed.acel_star
            );
        }
    }
    assert!(worst <= 1e-8, "closed-form deviation {worst:e}");
    println!("criterion 05 PASS: closed forms match the solver within {worst:.2e}");
}

#[test]
fn criterion_06_aligned_optimum() {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut produced = 0;
    while produced < 100 {
        let j = rng.gen_range(1..=3);
        let i = rng.gen_range(1..=3);
        let k = rng.gen_range(2..=3);
        let mut m = random_scenario(&mut rng, j, i, k);
        // Per-state positive rescaling plus a translation keeps every action
        // ranking; rejection keeps only pairs whose conditional-expectation
        // argmaxes also agree.
        let scale = Matrix::from_fn(j, i, |_, _| rng.gen_range(0.5..2.0));
        let shift = Matrix::from_fn(j, i, |_, _| rng.gen_range(-3.0..3.0));
        m.v_d = Tensor3::from_fn(j, i, k, |y, x, a| {
            scale.get(y, x) * m.v_u.get(y, x, a) + shift.get(y, x)
        });
        let Ok(aligned) = aligned_optimum(&m) else {
            continue;
        };
        produced += 1;
        let lp = solve_optimal_acel(&m).unwrap();
        worst = worst.max((aligned.asel_star - lp.value).abs());
    }
    assert!(worst <= 1e-8, "aligned-optimum deviation {worst:e}");
    println!("criterion 06 PASS: effort-gap decomposition matches the LP within {worst:.2e}");
}

#[test]
fn criterion_07_perturbation_invariance() {
    let mut rng = StdRng::seed_from_u64(42);
    let mut kept = 0;
    let mut tried = 0;
    let mut nonzero = 0;
    let mut non_zero_info_returns = 0;
    let mut worst = 0.0f64;
    while kept < 50 {
        tried += 1;
        assert!(tried < 10_000, "generation stalled");
        let j = rng.gen_range(1..=2usize);
        let i = rng.gen_range(2..=3usize);
        let k = 3usize;
        let prior = random_simplex(&mut rng, j);
        let audit =
            Matrix::from_rows((0..j).map(|_| random_simplex(&mut rng, i)).collect());
        let v_u = Tensor3::from_fn(j, i, k, |_, _, _| rng.gen_range(-5.0..5.0));
        let rho: f64 = -rng.gen_range(0.2..2.0);
        let shift = Matrix::from_fn(j, i, |_, _| rng.gen_range(-2.0..2.0));
        let v_d = Tensor3::from_fn(j, i, k, |y, x, a| rho * v_u.get(y, x, a) + shift.get(y, x));
        let m = ScenarioModel {
            sp_labels: (0..j).map(|n| format!("y{n}")).collect(),
            as_labels: (0..i).map(|n| format!("x{n}")).collect(),
            action_labels: (0..k).map(|n| format!("a{n}")).collect(),
            prior_y: prior,
            audit_policy: audit,
            v_u,
            v_d,
        }
        .checked()
        .unwrap();

        let a0 = zetar::insider::initial_compliance(&m);
        let v_ip = invariant_perturbation(&m).unwrap();
        // The invariance argument needs the zero-information policy's value
        // untouched; instances where the perturbation lowers an entry the
        // pooled insider consumes are rejected (there the concave closure
        // itself moves and no equality can hold).
        let touched =
            (0..j).any(|y| (0..i).any(|x| v_ip.get(y, x, a0) != m.v_d.get(y, x, a0)));
        if touched {
            continue;
        }
        kept += 1;
        if v_ip != m.v_d {
            nonzero += 1;
        }
        let before = solve_optimal_acel(&m).unwrap();
        let mut perturbed = m.clone();
        perturbed.v_d = v_ip;
        let after = solve_optimal_acel(&perturbed).unwrap();
        worst = worst.max((before.value - after.value).abs());
        if after.policy.max_abs_diff(&zero_info_policy(&perturbed)) > 1e-9 {
            non_zero_info_returns += 1;
        }
    }
    assert!(worst <= 1e-8, "perturbation shifted the optimum by {worst:e}");
    assert!(nonzero > 0, "no instance had a nonempty perturbation");
    assert!(
        non_zero_info_returns > 0,
        "no instance returned a strategic (non-zero-information) optimum"
    );
    println!(
        "criterion 07 PASS: optimal security level invariant within {worst:.2e} \
         ({nonzero}/50 nonempty perturbations, {non_zero_info_returns} strategic optima)"
    );
}

#[test]
fn criterion_08_win_win() {
    let mut rng = StdRng::seed_from_u64(8);
    let mut ct_samples = 0;
    let mut scenarios = 0;
    while ct_samples < 1000 {
        let (j, i, k) = random_dims(&mut rng, 4);
        let m = random_scenario(&mut rng, j, i, k);
        let view = InsiderView::new(&m);
        let ctx = MetricContext::new(&m);
        scenarios += 1;
        for _ in 0..200 {
            let pi = random_policy(&mut rng, k, i);
            if classify_policy_with(&view, &pi).label != PolicyLabel::CompletelyTrustworthy {
                continue;
            }
            ct_samples += 1;
            let asal = asal_with(&ctx, &pi);
            let isal = isal_with(&ctx);
            assert!(
                asal >= isal - 1e-10,
                "trusted policy lowered satisfaction: {asal} < {isal}"
            );
            if ct_samples >= 1000 {
                break;
            }
        }
        let lp = solve_optimal_acel(&m).unwrap();
        assert!(
            lp.metrics.acel >= -1e-10,
            "optimal enhancement negative: {}",
            lp.metrics.acel
        );
    }
    println!("criterion 08 PASS: 1000 trusted policies never lower satisfaction ({scenarios} scenarios)");
}

#[test]
fn criterion_09_value_bracket() {
    let m = s2(ComplianceAttitude::Averse, 10.0, 0.2);
    // Bracket at the accepted multipliers. The default policy concentrates
    // 0.95 of each column on the initial-compliance action: each column's
    // log-sum-exp slack is then under log(K), which the stated bracket
    // width covers at every customization level.
    let pi_d = zero_info_policy(&m).blend(&PolicyMatrix::uniform(2, 2), 0.9);
    for eta in [0.1, 1.0, 10.0, 100.0] {
        let cfg = SolverConfig::finite(eta).with_default_policy(pi_d.clone());
        let r = solve_primal_eta(&m, &cfg).unwrap();
        assert!(r.diagnostics.converged, "eta={eta} did not converge");
        let (lower, upper) = r.diagnostics.bracket.unwrap();
        assert!((upper - lower - 2f64.ln() / eta).abs() <= 1e-12);
        assert!(
            lower - 2e-8 <= r.value && r.value <= upper + 2e-8,
            "eta={eta}: value {} outside [{lower}, {upper}]",
            r.value
        );
    }

    // Large-customization limit against the fully customized program.
    let r_inf = solve_optimal_acel(&m).unwrap();
    let cfg = SolverConfig::finite(1e6);
    let r = solve_primal_eta(&m, &cfg).unwrap();
    let gap = (r_inf.value - r.value).abs();
    assert!(
        gap <= 2f64.ln() / 1e6 + 1e-6,
        "limit gap {gap:e} exceeds log(K)/eta + 1e-6"
    );
    println!("criterion 09 PASS: value brackets hold; limit gap {gap:.2e}");
}

#[test]
fn criterion_10_small_eta_projection() {
    let m = s2(ComplianceAttitude::Averse, 4.0, 0.2);
    let view = InsiderView::new(&m);

    let ct_default = zero_info_policy(&m).blend(&full_info_policy(&m), 0.5);
    let cfg = SolverConfig::finite(1e-6).with_default_policy(ct_default.clone());
    let r = solve_primal_eta(&m, &cfg).unwrap();
    let dist = r.policy.max_abs_diff(&ct_default);
    assert!(dist <= 1e-4, "trusted default moved by {dist}");

    let identity = PolicyMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let non_ct_default = identity.blend(&PolicyMatrix::uniform(2, 2), 0.9);
    assert_ne!(
        classify_policy_with(&view, &non_ct_default).label,
        PolicyLabel::CompletelyTrustworthy
    );
    let cfg = SolverConfig::finite(1e-6).with_default_policy(non_ct_default.clone());
    let r = solve_primal_eta(&m, &cfg).unwrap();
    let moved = r.policy.max_abs_diff(&non_ct_default);
    assert!(moved > 1e-3, "untrusted default only moved {moved}");
    for k in 0..2 {
        assert!(
            trust_row_holds(&view, r.policy.row(k), k),
            "projected policy not trusted on signal {k}"
        );
    }
    println!("criterion 10 PASS: trusted default kept ({dist:.1e}), untrusted default projected ({moved:.3})");
}

#[test]
fn criterion_11_learner_accuracy_and_budget() {
    let start = Instant::now();
    let epsilon = 1e-3;
    let cfg = LearnerConfig::new(epsilon).unwrap();
    for attitude in [ComplianceAttitude::Seeking, ComplianceAttitude::Averse] {
        let m = walkthrough(attitude);
        let mut oracle = InsiderOracle::direct(m.clone());
        let (report, system) = learn_ct_set(&mut oracle, &cfg).unwrap();
        assert!(report.budget_ok, "{attitude:?}: budget bound violated");

        for k in 0..2 {
            let analytic = ct_polytope_vertices(&m, k).unwrap();
            let dist = report.polytopes[k].vertex_distance(&analytic);
            assert!(
                dist <= epsilon + 1e-12,
                "{attitude:?} k={k}: vertex distance {dist}"
            );
        }

        // Per-edge probes within ceil(log2(1/epsilon)); searched edges within
        // the hypercube edge count bound 2^(I-1) * I.
        let mut per_edge = std::collections::HashMap::new();
        for rec in &report.transcript {
            if let Some(c) = rec.edge_coord {
                let fixed: Vec<i64> = rec
                    .point
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != c)
                    .map(|(_, v)| v.round() as i64)
                    .collect();
                *per_edge.entry((rec.signal, c, fixed)).or_insert(0usize) += 1;
            }
        }
        let max_probes = (1.0f64 / epsilon).log2().ceil() as usize;
        for (edge, probes) in &per_edge {
            assert!(*probes <= max_probes, "{attitude:?} edge {edge:?}: {probes} probes");
        }
        let edges_per_signal = per_edge
            .keys()
            .fold(std::collections::HashMap::new(), |mut acc, (k, _, _)| {
                *acc.entry(*k).or_insert(0usize) += 1;
                acc
            });
        for (k, edges) in edges_per_signal {
            assert!(edges <= 2 * 2, "signal {k} searched {edges} edges");
        }

        // The learned pipeline's optimum lands near the analytic one.
        let analytic = solve_optimal_acel(&m).unwrap();
        let ctx = MetricContext::new(&m);
        let (_, learned_value, _) =
            maximize_over_system(&system, &defender_objective(&ctx)).unwrap();
        let learned_acel = learned_value - analytic.metrics.isel;
        let gap = (learned_acel - analytic.metrics.acel).abs();
        assert!(gap <= 1e-2, "{attitude:?}: learned pipeline off by {gap}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("criterion 11 PASS: learner recovers both regions within 1e-3 in {elapsed:?}");
}

#[test]
fn criterion_12_probe_narrative() {
    // Frozen walkthrough parameters: the averse reference insider with the
    // penalty at 2. Learning the compliant recommendation's region searches
    // the edge whose policy-square image is the segment from (0,0) to (0,1);
    // displayed there, the first three binary-search midpoints must be
    // exactly 1/2, 3/4, 5/8 labeled untrusted, trusted, untrusted.
    let m = walkthrough(ComplianceAttitude::Averse);
    let cfg = LearnerConfig::new(1e-3).unwrap();
    let mut oracle = InsiderOracle::direct(m);
    let (cube, _, _) = learn_pt_cube_vertices(&mut oracle, 1, &cfg).unwrap();
    let (_, _, transcript) =
        learn_pt_polytope_vertices(&mut oracle, 1, &cube, &cfg).unwrap();
    let edge: Vec<_> = transcript
        .iter()
        .filter(|r| r.edge_coord == Some(1) && r.point[0] == 1.0)
        .collect();
    assert!(edge.len() >= 3, "edge search missing");
    let mapped: Vec<f64> = edge.iter().take(3).map(|r| 1.0 - r.point[1]).collect();
    assert_eq!(mapped, vec![0.5, 0.75, 0.625]);
    let labels: Vec<bool> = edge.iter().take(3).map(|r| r.trusted).collect();
    assert_eq!(labels, vec![false, true, false]);
    println!("criterion 12 PASS: probe narrative (1/2 no, 3/4 yes, 5/8 no) reproduced");
}

#[test]
fn criterion_13_case_study_structure() {
    let start = Instant::now();

    // (i) Thresholds fall as the penalty grows and order averse >= neutral
    // >= seeking pointwise.
    let mut curves = Vec::new();
    for attitude in [
        ComplianceAttitude::Averse,
        ComplianceAttitude::Neutral,
        ComplianceAttitude::Seeking,
    ] {
        let mut curve = Vec::new();
        let mut prev = f64::INFINITY;
        for c in 0..=20 {
            let t = belief_threshold(&s2(attitude, c as f64, 0.2)).unwrap();
            assert!(t <= prev + 1e-12, "{attitude:?}: threshold rose at {c}");
            prev = t;
            curve.push(t);
        }
        curves.push(curve);
    }
    for idx in 0..=20 {
        assert!(curves[0][idx] >= curves[1][idx] - 1e-12, "averse < neutral at {idx}");
        assert!(curves[1][idx] >= curves[2][idx] - 1e-12, "neutral < seeking at {idx}");
    }

    // (ii) Higher loss aversion lowers the threshold pointwise.
    let mut prev_curve = vec![f64::INFINITY; 21];
    for gamma_s in [1.0, 2.0, 3.0] {
        let mut curve = Vec::new();
        for c in 0..=20 {
            let mut p = zetar::scenario::CaseStudyParams::reference(ComplianceAttitude::Neutral);
            p.c_d_ic = c as f64;
            p.risk = zetar::scenario::RiskPerception::new(1.0, gamma_s);
            let m = zetar::scenario::build_case_study(&p, 0.2, 0.8, 0.3).unwrap();
            curve.push(belief_threshold(&m).unwrap());
        }
        for (a, b) in curve.iter().zip(prev_curve.iter()) {
            assert!(*a <= *b + 1e-12, "threshold rose with loss aversion");
        }
        prev_curve = curve;
    }

    // (iii)-(v) Prior sweep of the averse insider at penalty 4.
    let mut below_positive = false;
    let mut structural = None;
    for attitude in ComplianceAttitude::ALL {
        for step in 0..=50 {
            let b = step as f64 / 50.0;
            let m = s2(attitude, 4.0, b);
            let t = belief_threshold(&m).unwrap();
            let r = solve_optimal_acel(&m).unwrap();
            let ctx = MetricContext::new(&m);
            let rep = report_with(&ctx, &r.policy);

            // (iv) The optimum never buys security with satisfaction.
            assert!(
                (rep.asal - rep.isal).abs() <= 1e-9,
                "{attitude:?} b={b}: optimal satisfaction differs from innate"
            );

            if b >= t + 1e-12 {
                // (iii) Compliant region: nothing to enhance.
                assert!(r.metrics.acel.abs() <= 1e-9, "{attitude:?} b={b}");
                assert!(
                    r.policy.max_abs_diff(&zero_info_policy(&m)) <= 1e-8,
                    "{attitude:?} b={b}: optimum is not the zero-information policy"
                );
            } else if r.metrics.acel > 1e-9 {
                below_positive = true;
            }
            if attitude == ComplianceAttitude::Averse && rep.isel < 0.0 && r.value > 0.0 {
                structural = Some((b, rep.isel, r.value));
            }
        }
    }
    assert!(below_positive, "no enhancement below the threshold");
    let (b, isel, asel) = structural.expect("no structural improvement point found");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 13 PASS: thresholds ordered and monotone; sweep structure holds; \
         structural improvement at b={b}: {isel:.3} -> {asel:.3} ({elapsed:?})"
    );
}

#[test]
fn criterion_14_geometry_consistency() {
    let mut rng = StdRng::seed_from_u64(14);
    for (attitude, c) in [
        (ComplianceAttitude::Seeking, 10.0),
        (ComplianceAttitude::Neutral, 10.0),
        (ComplianceAttitude::Averse, 10.0),
        (ComplianceAttitude::Averse, 4.0),
    ] {
        let m = s2(attitude, c, 0.2);
        let view = InsiderView::new(&m);
        let ctx = MetricContext::new(&m);
        let hreps: Vec<_> = (0..2).map(|k| pt_halfspaces(&m, k)).collect();

        let steps = 20usize;
        let grid: Vec<(f64, f64)> = (0..=steps)
            .flat_map(|a| {
                (0..=steps).map(move |b| (a as f64 / steps as f64, b as f64 / steps as f64))
            })
            .collect();
        let label_of = |p: (f64, f64)| {
            let pi = policy_square(p.0, p.1);
            zetar::geometry::cell_of_policy_with(&view, &pi)
        };
        let labels: Vec<_> = grid.iter().map(|p| label_of(*p)).collect();

        // Exclusivity and covering: every grid policy carries exactly one
        // label; convexity via on-grid midpoints of same-cell pairs.
        for (i, pi_pt) in grid.iter().enumerate() {
            assert_eq!(labels[i].len(), 2);
            for (jdx, pj_pt) in grid.iter().enumerate().skip(i + 1) {
                if labels[i] != labels[jdx] {
                    continue;
                }
                let mid = ((pi_pt.0 + pj_pt.0) / 2.0, (pi_pt.1 + pj_pt.1) / 2.0);
                let on_grid = (mid.0 * steps as f64).fract().abs() < 1e-9
                    && (mid.1 * steps as f64).fract().abs() < 1e-9;
                if on_grid {
                    assert_eq!(label_of(mid), labels[i], "cell not convex at {mid:?}");
                }
            }
        }

        // Trust-region membership agrees with behavioral classification.
        for p in &grid {
            let pi = policy_square(p.0, p.1);
            let class = classify_policy_with(&view, &pi);
            let rows: [Vec<f64>; 2] = [pi.row(0).to_vec(), pi.row(1).to_vec()];
            for k in 0..2 {
                assert_eq!(
                    hreps[k].contains(&rows[k]),
                    class.trusted[k],
                    "{attitude:?} c={c} k={k} p={p:?}"
                );
            }
            let ct_by_regions = (0..2).all(|k| hreps[k].contains(&rows[k]));
            assert_eq!(
                ct_by_regions,
                class.label == PolicyLabel::CompletelyTrustworthy
            );
        }

        // Region vertex/facet round trip agrees with direct half-spaces on
        // sampled points.
        for k in 0..2 {
            let vrep = ct_polytope_vertices(&m, k).unwrap();
            let hrep = vrep_to_hrep(&vrep).unwrap();
            for _ in 0..200 {
                let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                let margin: f64 = hreps[k]
                    .inequalities
                    .iter()
                    .map(|(n, off)| {
                        let v = n[0] * p[0] + n[1] * p[1] - off;
                        v / n.iter().map(|x| x.abs()).fold(1e-30, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min);
                if margin.abs() < 1e-6 {
                    continue;
                }
                assert_eq!(hrep.contains(&p), hreps[k].contains(&p));
            }
        }

        // Satisfaction is convex along policy segments.
        for _ in 0..100 {
            let a = random_policy(&mut rng, 2, 2);
            let b = random_policy(&mut rng, 2, 2);
            let lambda: f64 = rng.gen_range(0.0..1.0);
            let blend = a.blend(&b, lambda);
            let lhs = asal_with(&ctx, &blend);
            let rhs = lambda * asal_with(&ctx, &a) + (1.0 - lambda) * asal_with(&ctx, &b);
            assert!(lhs <= rhs + 1e-10, "satisfaction not convex: {lhs} > {rhs}");
        }
    }
    println!("criterion 14 PASS: cells partition, trust membership agrees, satisfaction convex");
}
