//! The numeric core runs at `f32` too; this pins the generic-scalar
//! instantiation with correspondingly looser tolerances.

use zetar::belief::{posterior, signal_marginal, PolicyMatrix};
use zetar::insider::{classify_policy, initial_compliance, PolicyLabel};
use zetar::metrics;
use zetar::optimizer::{solve_dual_lp, solve_optimal_acel, solve_primal_eta, SolverConfig};
use zetar::scenario::{build_case_study, CaseStudyParams, ComplianceAttitude, ScenarioModel};

fn averse_f32() -> ScenarioModel<f32> {
    let mut p: CaseStudyParams<f32> = CaseStudyParams::reference(ComplianceAttitude::Averse);
    p.c_d_ic = 4.0;
    build_case_study(&p, 0.2, 0.8, 0.3).unwrap()
}

#[test]
fn beliefs_and_metrics_at_f32() {
    let m = averse_f32();
    let pi: PolicyMatrix<f32> =
        PolicyMatrix::from_rows(vec![vec![0.7, 0.1], vec![0.3, 0.9]]).unwrap();
    let bs = signal_marginal(&m, &pi);
    assert!((bs.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    let post = posterior(&m, &pi, 0).unwrap();
    assert!((post.joint.sum() - 1.0).abs() < 1e-5);

    assert_eq!(initial_compliance(&m), 0);
    let rep = metrics::report(&m, &pi);
    assert!((rep.acel - (rep.asel - rep.isel)).abs() < 1e-5);
}

#[test]
fn solvers_at_f32() {
    let m = averse_f32();
    let r = solve_optimal_acel(&m).unwrap();
    assert_eq!(
        classify_policy(&m, &r.policy).label,
        PolicyLabel::CompletelyTrustworthy
    );
    // The f64 optimum is 0.69565...; f32 lands within single precision.
    assert!((r.value - 0.695_652_2).abs() < 1e-4, "value {}", r.value);
    let dual = solve_dual_lp(&m).unwrap();
    assert!((dual.value - r.value).abs() < 1e-3);

    let mut cfg: SolverConfig<f32> = SolverConfig::finite(10.0);
    cfg.tol = 1e-4;
    let fin = solve_primal_eta(&m, &cfg).unwrap();
    assert!(fin.diagnostics.converged);
    assert!(fin.value <= r.value + 1e-3);
}

