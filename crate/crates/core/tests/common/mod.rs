//! Shared generators for the acceptance suite.

use rand::rngs::StdRng;
use rand::Rng;

use zetar::belief::PolicyMatrix;
use zetar::mat::{Matrix, Tensor3};
use zetar::scenario::{
    build_case_study, CaseStudyParams, ComplianceAttitude, ScenarioModel,
};

/// Floored-uniform probability vector: entries at least 0.05 before
/// normalization, keeping random scenarios well conditioned.
pub fn random_simplex(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

pub fn random_scenario(
    rng: &mut StdRng,
    j: usize,
    i: usize,
    k: usize,
) -> ScenarioModel<f64> {
    let prior_y = random_simplex(rng, j);
    let audit_policy = Matrix::from_rows((0..j).map(|_| random_simplex(rng, i)).collect());
    let v_u = Tensor3::from_fn(j, i, k, |_, _, _| rng.gen_range(-5.0..5.0));
    let v_d = Tensor3::from_fn(j, i, k, |_, _, _| rng.gen_range(-5.0..5.0));
    ScenarioModel {
        sp_labels: (0..j).map(|n| format!("y{}", n + 1)).collect(),
        as_labels: (0..i).map(|n| format!("x{}", n + 1)).collect(),
        action_labels: (0..k).map(|n| format!("a{}", n + 1)).collect(),
        prior_y,
        audit_policy,
        v_u,
        v_d,
    }
    .checked()
    .expect("generated scenario is valid")
}

pub fn random_dims(rng: &mut StdRng, max: usize) -> (usize, usize, usize) {
    (
        rng.gen_range(1..=max),
        rng.gen_range(1..=max),
        rng.gen_range(1..=max),
    )
}

pub fn random_policy(rng: &mut StdRng, k: usize, i: usize) -> PolicyMatrix<f64> {
    let mut pi = Matrix::zeros(k, i);
    for x in 0..i {
        let col = random_simplex(rng, k);
        for (row, v) in col.into_iter().enumerate() {
            pi.set(row, x, v);
        }
    }
    PolicyMatrix::new(pi).expect("random policy is column-stochastic")
}

/// Reference scenario family: case-study magnitudes with the given attitude,
/// non-compliance penalty, and high-risk prior.
pub fn s2(attitude: ComplianceAttitude, c_d_ic: f64, prior_hr: f64) -> ScenarioModel<f64> {
    let mut p = CaseStudyParams::reference(attitude);
    p.c_d_ic = c_d_ic;
    build_case_study(&p, prior_hr, 0.8, 0.3).unwrap()
}

/// The frozen parameterization behind the learner walkthrough: the averse
/// reference insider with the non-compliance penalty lowered to 2, which
/// places the learned boundary crossing between 5/8 and 3/4 on the policy
/// square's left edge.
pub fn walkthrough(attitude: ComplianceAttitude) -> ScenarioModel<f64> {
    s2(attitude, 2.0, 0.2)
}
