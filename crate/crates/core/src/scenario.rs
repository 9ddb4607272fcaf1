//! Game instances: security postures, audit schemes, utilities, and the
//! binary case-study construction.

use thiserror::Error;

use crate::mat::{Matrix, Tensor3};
use crate::scalar::Real;

/// Player tag for utility lookups: the insider or the defender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Insider,
    Defender,
}

/// Probability-validation tolerance, scaled to the scalar type.
pub fn prob_tol<R: Real>() -> R {
    let floor = R::from_f64_lit(1e-12);
    let eps = R::epsilon() * R::from_f64_lit(100.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// A full game instance.
///
/// Dimensions: `J` security-posture states, `I` audit schemes, `K` actions
/// (recommendations share action indices). Utility tensors are indexed
/// `(state, audit, action)` in row-major order.
#[derive(Debug, Clone)]
pub struct ScenarioModel<R> {
    pub sp_labels: Vec<String>,
    pub as_labels: Vec<String>,
    pub action_labels: Vec<String>,
    /// Prior over security postures, length `J`.
    pub prior_y: Vec<R>,
    /// `J x I` row-stochastic audit policy: row `j` is the distribution over
    /// audit schemes given posture `j`.
    pub audit_policy: Matrix<R>,
    /// Insider incentive tensor, `J x I x K`.
    pub v_u: Tensor3<R>,
    /// Defender security objective tensor, `J x I x K`.
    pub v_d: Tensor3<R>,
}

impl<R: Real> ScenarioModel<R> {
    pub fn num_states(&self) -> usize {
        self.prior_y.len()
    }

    pub fn num_audits(&self) -> usize {
        self.audit_policy.cols()
    }

    pub fn num_actions(&self) -> usize {
        self.v_u.dims().2
    }

    pub fn utility(&self, p: Player, y: usize, x: usize, a: usize) -> R {
        match p {
            Player::Insider => self.v_u.get(y, x, a),
            Player::Defender => self.v_d.get(y, x, a),
        }
    }

    /// Builds and validates in one step.
    pub fn checked(self) -> Result<Self, ScenarioError> {
        let violations = validate_scenario(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ScenarioError::Invalid(violations))
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("probability out of range: {0}")]
    BadProbability(String),
    #[error("rule count {0} too large: action set would have 3^{0} elements")]
    TooManyRules(usize),
}

/// Checks every model invariant and returns the violations found.
///
/// Violations are data, not failures: an empty list means the model is valid.
pub fn validate_scenario<R: Real>(m: &ScenarioModel<R>) -> Vec<String> {
    let mut out = Vec::new();
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    let tol = prob_tol::<R>();

    if j == 0 {
        out.push("no security-posture states".to_string());
    }
    if i == 0 {
        out.push("no audit schemes".to_string());
    }
    if k == 0 {
        out.push("no actions".to_string());
    }
    if m.sp_labels.len() != j {
        out.push(format!(
            "sp_labels has {} entries, expected {j}",
            m.sp_labels.len()
        ));
    }
    if m.as_labels.len() != i {
        out.push(format!(
            "as_labels has {} entries, expected {i}",
            m.as_labels.len()
        ));
    }
    if m.action_labels.len() != k {
        out.push(format!(
            "action_labels has {} entries, expected {k}",
            m.action_labels.len()
        ));
    }
    if m.audit_policy.rows() != j {
        out.push(format!(
            "audit_policy has {} rows, expected {j}",
            m.audit_policy.rows()
        ));
    }

    for (idx, p) in m.prior_y.iter().enumerate() {
        if !p.is_finite() || *p < R::zero() {
            out.push(format!("prior_y[{idx}] = {p} is negative or non-finite"));
        }
    }
    let prior_sum: R = m.prior_y.iter().copied().sum();
    if (prior_sum - R::one()).abs() > tol {
        out.push(format!("prior sums to {prior_sum}, expected 1"));
    }

    if m.audit_policy.rows() == j && m.audit_policy.cols() == i {
        for row in 0..j {
            for col in 0..i {
                let p = m.audit_policy.get(row, col);
                if !p.is_finite() || p < R::zero() {
                    out.push(format!(
                        "audit_policy[{row}][{col}] = {p} is negative or non-finite"
                    ));
                }
            }
            let s = m.audit_policy.row_sum(row);
            if (s - R::one()).abs() > tol {
                out.push(format!("audit_policy row {row} sums to {s}, expected 1"));
            }
        }
    }

    for (name, tensor) in [("v_U", &m.v_u), ("v_D", &m.v_d)] {
        if tensor.dims() != (j, i, k) {
            out.push(format!(
                "{name} has dims {:?}, expected ({j}, {i}, {k})",
                tensor.dims()
            ));
            continue;
        }
        for y in 0..j {
            for x in 0..i {
                for a in 0..k {
                    let v = tensor.get(y, x, a);
                    if !v.is_finite() {
                        out.push(format!("{name}[{y}][{x}][{a}] = {v} is not finite"));
                    }
                }
            }
        }
    }

    out
}

/// Joint prior over (posture, audit) with its marginals and conditionals.
#[derive(Debug, Clone)]
pub struct JointPrior<R> {
    /// `J x I` joint `b_{Y,X}(y, x) = b_Y(y) psi(x|y)`.
    pub joint: Matrix<R>,
    /// Length-`I` audit marginal `b_X`.
    pub marg_x: Vec<R>,
    /// `J x I` conditional `b_{Y|X}(y|x)`; unreachable columns are zero-filled.
    pub cond_y_given_x: Matrix<R>,
    /// `reachable[x]` is false when `b_X(x) = 0`; such columns carry no
    /// conditional and are excluded from optimization.
    pub reachable: Vec<bool>,
}

/// Joint prior of the current posture and the chosen audit scheme.
pub fn joint_prior<R: Real>(m: &ScenarioModel<R>) -> JointPrior<R> {
    let (j, i) = (m.num_states(), m.num_audits());
    let joint = Matrix::from_fn(j, i, |y, x| m.prior_y[y] * m.audit_policy.get(y, x));
    let marg_x: Vec<R> = (0..i).map(|x| joint.col_sum(x)).collect();
    let reachable: Vec<bool> = marg_x.iter().map(|p| *p > R::zero()).collect();
    let cond_y_given_x = Matrix::from_fn(j, i, |y, x| {
        if reachable[x] {
            joint.get(y, x) / marg_x[x]
        } else {
            R::zero()
        }
    });
    JointPrior {
        joint,
        marg_x,
        cond_y_given_x,
        reachable,
    }
}

/// Conditional expected utility `v̄_p(x, a)` of a player given the audit
/// scheme, an `I x K` matrix. Unreachable audit columns are zero-filled.
pub fn expected_utility_bar<R: Real>(m: &ScenarioModel<R>, p: Player) -> Matrix<R> {
    let prior = joint_prior(m);
    expected_utility_bar_with(m, p, &prior)
}

/// Same as [`expected_utility_bar`] but reuses a precomputed joint prior.
pub fn expected_utility_bar_with<R: Real>(
    m: &ScenarioModel<R>,
    p: Player,
    prior: &JointPrior<R>,
) -> Matrix<R> {
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    Matrix::from_fn(i, k, |x, a| {
        if !prior.reachable[x] {
            return R::zero();
        }
        (0..j)
            .map(|y| prior.cond_y_given_x.get(y, x) * m.utility(p, y, x, a))
            .sum()
    })
}

/// Risk perception parameters: diminishing sensitivity `gamma_d` and loss
/// aversion `gamma_s`. `(1, 1)` is the identity perception.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPerception<R> {
    pub gamma_d: R,
    pub gamma_s: R,
}

impl<R: Real> RiskPerception<R> {
    pub fn identity() -> Self {
        RiskPerception {
            gamma_d: R::one(),
            gamma_s: R::one(),
        }
    }

    pub fn new(gamma_d: R, gamma_s: R) -> Self {
        assert!(
            gamma_d > R::zero() && gamma_s > R::zero(),
            "risk perception parameters must be positive"
        );
        RiskPerception { gamma_d, gamma_s }
    }
}

/// Prospect-theoretic distortion of a payoff: gains curve as `v^gamma_d`,
/// losses as `-gamma_s * (-v)^gamma_d`. Sign-preserving and monotone.
pub fn apply_cpt<R: Real>(v: R, r: RiskPerception<R>) -> R {
    if v >= R::zero() {
        v.powf(r.gamma_d)
    } else {
        -r.gamma_s * (-v).powf(r.gamma_d)
    }
}

/// Affine reshaping of a utility tensor: `scale * v(y,x,a) + translate(y,x)`.
///
/// With positive scale the per-(y, x) action ordering is untouched, which is
/// what makes compliance behavior invariant under this transform.
pub fn linear_transform_utility<R: Real>(
    v: &Tensor3<R>,
    scale: R,
    translate: &Matrix<R>,
) -> Tensor3<R> {
    let (j, i, k) = v.dims();
    assert_eq!(
        (translate.rows(), translate.cols()),
        (j, i),
        "translation matrix must be J x I"
    );
    Tensor3::from_fn(j, i, k, |y, x, a| scale * v.get(y, x, a) + translate.get(y, x))
}

/// Cost and reward magnitudes for the binary audit case study.
///
/// Insider side: `c_u_co` is the compliance cost, `c_d_ic` the audit penalty
/// for non-compliance under stringent audit, `r_d_co` the compliance reward
/// under stringent audit, and `c_u_hr`/`c_u_lr` the intrinsic misconduct
/// penalties under high-/low-risk postures (positive values mean guilt, so
/// larger values push toward compliance; negative values reward misconduct).
/// Defender side: `c_d_ca` audit overhead, `r_d_ca` correction reward,
/// `c_d_hr`/`c_d_lr` breach costs under tolerant audit, `r_d_sa` the payoff
/// of compliance under tolerant audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseStudyParams<R> {
    pub c_u_co: R,
    pub r_d_co: R,
    pub c_d_ic: R,
    pub c_u_hr: R,
    pub c_u_lr: R,
    pub c_d_ca: R,
    pub r_d_ca: R,
    pub c_d_hr: R,
    pub c_d_lr: R,
    pub r_d_sa: R,
    pub risk: RiskPerception<R>,
}

/// Compliance attitude presets for the reference parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplianceAttitude {
    Seeking,
    Neutral,
    Averse,
}

impl ComplianceAttitude {
    pub const ALL: [Self; 3] = [Self::Seeking, Self::Neutral, Self::Averse];

    pub fn label(self) -> &'static str {
        match self {
            Self::Seeking => "seeking",
            Self::Neutral => "neutral",
            Self::Averse => "averse",
        }
    }

    /// Intrinsic penalty pair `(c_u_hr, c_u_lr)` for this attitude.
    pub fn intrinsic_penalties<R: Real>(self) -> (R, R) {
        match self {
            Self::Seeking => (R::from_f64_lit(2.0), R::from_f64_lit(1.0)),
            Self::Neutral => (R::zero(), R::zero()),
            Self::Averse => (R::from_f64_lit(-2.0), R::from_f64_lit(-1.0)),
        }
    }
}

impl<R: Real> CaseStudyParams<R> {
    /// Reference magnitudes used throughout the tests and the case-study
    /// bundle; only the intrinsic pair varies with the attitude.
    pub fn reference(attitude: ComplianceAttitude) -> Self {
        let (c_u_hr, c_u_lr) = attitude.intrinsic_penalties();
        CaseStudyParams {
            c_u_co: R::from_f64_lit(2.0),
            r_d_co: R::from_f64_lit(3.0),
            c_d_ic: R::from_f64_lit(10.0),
            c_u_hr,
            c_u_lr,
            c_d_ca: R::from_f64_lit(1.0),
            r_d_ca: R::from_f64_lit(4.0),
            c_d_hr: R::from_f64_lit(8.0),
            c_d_lr: R::from_f64_lit(2.0),
            r_d_sa: R::from_f64_lit(3.0),
            risk: RiskPerception::identity(),
        }
    }

    fn sign_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let nonneg: [(&str, R); 7] = [
            ("c_d_ic", self.c_d_ic),
            ("r_d_co", self.r_d_co),
            ("c_u_co", self.c_u_co),
            ("c_d_ca", self.c_d_ca),
            ("r_d_ca", self.r_d_ca),
            ("c_d_hr", self.c_d_hr),
            ("c_d_lr", self.c_d_lr),
        ];
        for (name, v) in nonneg {
            if v < R::zero() {
                out.push(format!("{name} = {v} must be nonnegative"));
            }
        }
        out
    }
}

/// Canonical index order of the binary case study.
pub mod binary {
    /// High-risk posture index.
    pub const Y_HR: usize = 0;
    /// Low-risk posture index.
    pub const Y_LR: usize = 1;
    /// Stringent-audit index.
    pub const X_SA: usize = 0;
    /// Tolerant-audit index.
    pub const X_TA: usize = 1;
    /// Non-compliant action index.
    pub const A_IC: usize = 0;
    /// Compliant action index.
    pub const A_CO: usize = 1;
}

/// Builds the 2x2x2 audit case study.
///
/// Insider utility decomposes as intrinsic plus extrinsic. The extrinsic part
/// depends on the audit scheme only: non-compliance costs the distorted
/// penalty `k(-c_d_ic)` under stringent audit and nothing under tolerant
/// audit; compliance earns the distorted reward `k(r_d_co)` under stringent
/// audit and always pays the compliance cost `c_u_co`. The intrinsic part
/// depends on the posture only: misconduct incurs the penalty `c_u_hr` or
/// `c_u_lr`, while the intrinsic compliance reward is calibrated to zero
/// (an affine shift that leaves behavior unchanged).
pub fn build_case_study<R: Real>(
    params: &CaseStudyParams<R>,
    prior_hr: R,
    psi_sa_hr: R,
    psi_sa_lr: R,
) -> Result<ScenarioModel<R>, ScenarioError> {
    for (name, p) in [
        ("prior_hr", prior_hr),
        ("psi_sa_hr", psi_sa_hr),
        ("psi_sa_lr", psi_sa_lr),
    ] {
        if !(R::zero()..=R::one()).contains(&p) || !p.is_finite() {
            return Err(ScenarioError::BadProbability(format!("{name} = {p}")));
        }
    }
    let sign = params.sign_violations();
    if !sign.is_empty() {
        return Err(ScenarioError::Invalid(sign));
    }

    use binary::*;
    let one = R::one();
    let risk = params.risk;

    // Extrinsic incentive, indexed (audit, action).
    let mut extrinsic = Matrix::zeros(2, 2);
    extrinsic.set(X_SA, A_IC, apply_cpt(-params.c_d_ic, risk));
    extrinsic.set(X_TA, A_IC, R::zero());
    extrinsic.set(X_SA, A_CO, apply_cpt(params.r_d_co, risk) - params.c_u_co);
    extrinsic.set(X_TA, A_CO, -params.c_u_co);

    // Intrinsic incentive, indexed (posture, action): misconduct is penalized.
    let mut intrinsic = Matrix::zeros(2, 2);
    intrinsic.set(Y_HR, A_IC, -params.c_u_hr);
    intrinsic.set(Y_LR, A_IC, -params.c_u_lr);

    let v_u = Tensor3::from_fn(2, 2, 2, |y, x, a| intrinsic.get(y, a) + extrinsic.get(x, a));

    let v_d = Tensor3::from_fn(2, 2, 2, |y, x, a| match (x, a) {
        (X_SA, A_IC) => params.r_d_ca - params.c_d_ca,
        (X_SA, A_CO) => -params.c_d_ca,
        (X_TA, A_IC) => {
            if y == Y_HR {
                -params.c_d_hr
            } else {
                -params.c_d_lr
            }
        }
        (X_TA, A_CO) => params.r_d_sa,
        _ => unreachable!(),
    });

    ScenarioModel {
        sp_labels: vec!["hr".into(), "lr".into()],
        as_labels: vec!["sa".into(), "ta".into()],
        action_labels: vec!["ic".into(), "co".into()],
        prior_y: vec![prior_hr, one - prior_hr],
        audit_policy: Matrix::from_rows(vec![
            vec![psi_sa_hr, one - psi_sa_hr],
            vec![psi_sa_lr, one - psi_sa_lr],
        ]),
        v_u,
        v_d,
    }
    .checked()
}

/// Per-rule compliance status in the rule-audit construction.
pub const RULE_OUTCOMES: [&str; 3] = ["full", "partial", "none"];

/// Scoring data for the rule-audit scenario: per-rule scores for the three
/// compliance statuses, combined either by summing or by an explicit table
/// over all consolidated statuses.
#[derive(Debug, Clone)]
pub struct RuleAuditScoring<R> {
    /// `per_rule[h]` scores `(full, partial, none)` compliance on rule `h`.
    pub per_rule: Vec<[R; 3]>,
    /// Score of the all-rules audit over the 3^H consolidated statuses, in
    /// lexicographic status order; `None` sums the per-rule scores.
    pub combined: Option<Vec<R>>,
}

/// Builds the rule-audit scenario: `H` security rules, `I = H + 1` audit
/// schemes (one per rule plus the all-rules audit), and `K = 3^H` actions
/// enumerating consolidated compliance statuses lexicographically.
///
/// Scores act as penalties on the insider (the audited score is subtracted)
/// while the defender's objective is the negated all-rules score regardless
/// of which audit ran.
pub fn build_rule_audit_scenario<R: Real>(
    h: usize,
    scoring: &RuleAuditScoring<R>,
    prior_y: Vec<R>,
    audit_policy: Matrix<R>,
) -> Result<ScenarioModel<R>, ScenarioError> {
    const MAX_RULES: usize = 4;
    if h == 0 || h > MAX_RULES {
        return Err(ScenarioError::TooManyRules(h));
    }
    if scoring.per_rule.len() != h {
        return Err(ScenarioError::Invalid(vec![format!(
            "expected {h} per-rule scoring entries, got {}",
            scoring.per_rule.len()
        )]));
    }
    let num_audits = h + 1;
    let num_actions = 3usize.pow(h as u32);
    if let Some(table) = &scoring.combined {
        if table.len() != num_actions {
            return Err(ScenarioError::Invalid(vec![format!(
                "combined scoring table has {} entries, expected {num_actions}",
                table.len()
            )]));
        }
    }

    // Action index -> per-rule outcome digits, most significant rule first.
    let outcome = |action: usize, rule: usize| -> usize {
        (action / 3usize.pow((h - 1 - rule) as u32)) % 3
    };
    let combined_score = |action: usize| -> R {
        match &scoring.combined {
            Some(table) => table[action],
            None => (0..h).map(|r| scoring.per_rule[r][outcome(action, r)]).sum(),
        }
    };
    let audit_score = |x: usize, action: usize| -> R {
        if x < h {
            scoring.per_rule[x][outcome(action, x)]
        } else {
            combined_score(action)
        }
    };

    let j = prior_y.len();
    let v_u = Tensor3::from_fn(j, num_audits, num_actions, |_, x, a| -audit_score(x, a));
    let v_d = Tensor3::from_fn(j, num_audits, num_actions, |_, _, a| -combined_score(a));

    let action_labels = (0..num_actions)
        .map(|a| {
            (0..h)
                .map(|r| RULE_OUTCOMES[outcome(a, r)].chars().next().unwrap())
                .collect::<String>()
        })
        .collect();

    ScenarioModel {
        sp_labels: (0..j).map(|y| format!("y{}", y + 1)).collect(),
        as_labels: (0..num_audits)
            .map(|x| {
                if x < h {
                    format!("rule{}", x + 1)
                } else {
                    "all".to_string()
                }
            })
            .collect(),
        action_labels,
        prior_y,
        audit_policy,
        v_u,
        v_d,
    }
    .checked()
}
