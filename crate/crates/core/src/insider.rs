//! The insider side: best responses, initial compliance, trust of
//! recommendations, belief thresholds, incentive categories, and the
//! black-box oracle the learner queries.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::belief::{BeliefError, PolicyMatrix, SIGNAL_FLOOR};
use crate::mat::Matrix;
use crate::scalar::{argmax_first, Real};
use crate::scenario::{
    expected_utility_bar_with, joint_prior, JointPrior, Player, ScenarioModel,
};

/// Numerical slack on the trust inequality. Shared with the geometry module
/// so membership tests and behavioral classification agree at boundaries.
pub const TRUST_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InsiderError {
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("operation requires exactly two actions, scenario has {0}")]
    NotBinaryActions(usize),
    #[error("operation requires exactly two posture states, scenario has {0}")]
    NotBinaryStates(usize),
    #[error("episodic oracle exhausted {0} samples without realizing the signal")]
    BudgetExceeded(usize),
}

/// Precomputed per-scenario quantities used by every insider-side operation.
#[derive(Debug, Clone)]
pub struct InsiderView<R> {
    pub prior: JointPrior<R>,
    /// `I x K` conditional expected insider utility.
    pub bar_u: Matrix<R>,
    /// `K x I` signal-weighted utility rows: entry `(k, x)` is
    /// `b_X(x) * bar_u(x, a^k)`.
    pub vhat_u: Matrix<R>,
}

impl<R: Real> InsiderView<R> {
    pub fn new(m: &ScenarioModel<R>) -> Self {
        let prior = joint_prior(m);
        let bar_u = expected_utility_bar_with(m, Player::Insider, &prior);
        let vhat_u = Matrix::from_fn(m.num_actions(), m.num_audits(), |k, x| {
            prior.marg_x[x] * bar_u.get(x, k)
        });
        InsiderView {
            prior,
            bar_u,
            vhat_u,
        }
    }

    pub fn num_audits(&self) -> usize {
        self.bar_u.rows()
    }

    pub fn num_actions(&self) -> usize {
        self.bar_u.cols()
    }
}

/// Best-response action to signal `s` under policy `pi`: maximizes posterior
/// expected utility, ties broken by lowest action index.
pub fn best_response<R: Real>(
    m: &ScenarioModel<R>,
    pi: &PolicyMatrix<R>,
    s: usize,
) -> Result<usize, InsiderError> {
    best_response_with(&InsiderView::new(m), pi, s)
}

/// Same as [`best_response`] with a precomputed view.
pub fn best_response_with<R: Real>(
    view: &InsiderView<R>,
    pi: &PolicyMatrix<R>,
    s: usize,
) -> Result<usize, InsiderError> {
    let signal_prob: R = (0..view.num_audits())
        .map(|x| view.prior.marg_x[x] * pi.prob(s, x))
        .sum();
    if signal_prob < R::from_f64_lit(SIGNAL_FLOOR) {
        return Err(BeliefError::ZeroProbabilitySignal { signal: s }.into());
    }
    // argmax over a of sum_x b_X(x) pi(s|x) bar_u(x, a); the positive
    // normalization by the signal probability cannot change the argmax.
    let scores: Vec<R> = (0..view.num_actions())
        .map(|a| {
            (0..view.num_audits())
                .map(|x| view.prior.marg_x[x] * pi.prob(s, x) * view.bar_u.get(x, a))
                .sum()
        })
        .collect();
    Ok(argmax_first(&scores))
}

/// The action an insider takes with no recommendation mechanism: the argmax
/// of prior expected utility, ties broken by lowest index.
pub fn initial_compliance<R: Real>(m: &ScenarioModel<R>) -> usize {
    initial_compliance_with(&InsiderView::new(m))
}

/// Same as [`initial_compliance`] with a precomputed view.
pub fn initial_compliance_with<R: Real>(view: &InsiderView<R>) -> usize {
    let scores: Vec<R> = (0..view.num_actions())
        .map(|a| {
            (0..view.num_audits())
                .map(|x| view.vhat_u.get(a, x))
                .sum()
        })
        .collect();
    argmax_first(&scores)
}

/// Prior expected utilities of each action (the scores behind
/// [`initial_compliance`]); index 0 of the result pairs with action 0.
pub fn prior_action_values<R: Real>(view: &InsiderView<R>) -> Vec<R> {
    (0..view.num_actions())
        .map(|a| (0..view.num_audits()).map(|x| view.vhat_u.get(a, x)).sum())
        .collect()
}

/// Whether recommendation `s^k` is trustworthy under `pi`: the row test
/// `pihat^k (vhat^k - vhat^l) >= 0` for every action `l`, evaluated with a
/// small numerical slack. Signals the policy never sends hold vacuously.
pub fn recommendation_trustworthy<R: Real>(
    m: &ScenarioModel<R>,
    pi: &PolicyMatrix<R>,
    k: usize,
) -> bool {
    recommendation_trustworthy_with(&InsiderView::new(m), pi, k)
}

/// Same as [`recommendation_trustworthy`] with a precomputed view.
pub fn recommendation_trustworthy_with<R: Real>(
    view: &InsiderView<R>,
    pi: &PolicyMatrix<R>,
    k: usize,
) -> bool {
    trust_row_holds(view, pi.row(k), k)
}

/// The trust inequality for a bare row point of the k-th hypercube. This is
/// the membership predicate of the k-th partially-trustworthy region: it
/// depends on the k-th row alone.
pub fn trust_row_holds<R: Real>(view: &InsiderView<R>, row: &[R], k: usize) -> bool {
    let tol = R::from_f64_lit(TRUST_TOL);
    for l in 0..view.num_actions() {
        if l == k {
            continue;
        }
        let lhs: R = (0..view.num_audits())
            .map(|x| row[x] * (view.vhat_u.get(k, x) - view.vhat_u.get(l, x)))
            .sum();
        if lhs < -tol {
            return false;
        }
    }
    true
}

/// The action signal `s` actually induces, or `None` when the policy never
/// sends it.
///
/// A trustworthy recommendation is followed: when the recommended action is
/// in the argmax set (the trust inequality holds), the insider complies even
/// at exact indifference. Untrusted signals fall back to the strict best
/// response. Away from ties this coincides with [`best_response`].
pub fn induced_action_with<R: Real>(
    view: &InsiderView<R>,
    pi: &PolicyMatrix<R>,
    s: usize,
) -> Option<usize> {
    let prob: R = (0..view.num_audits())
        .map(|x| view.prior.marg_x[x] * pi.prob(s, x))
        .sum();
    if prob < R::from_f64_lit(SIGNAL_FLOOR) {
        return None;
    }
    if trust_row_holds(view, pi.row(s), s) {
        return Some(s);
    }
    best_response_with(view, pi, s).ok()
}

/// Trust classification of a whole policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyClass {
    /// Per-signal trust flags (unrealizable signals are vacuously trusted).
    pub trusted: Vec<bool>,
    pub label: PolicyLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyLabel {
    /// Every recommendation is trustworthy.
    CompletelyTrustworthy,
    /// Every recommendation is untrustworthy.
    CompletelyUntrustworthy,
    Mixed,
}

impl PolicyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CompletelyTrustworthy => "CT",
            Self::CompletelyUntrustworthy => "CU",
            Self::Mixed => "mixed",
        }
    }
}

/// Labels each signal and the policy as CT, CU, or mixed.
pub fn classify_policy<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> PolicyClass {
    classify_policy_with(&InsiderView::new(m), pi)
}

/// Same as [`classify_policy`] with a precomputed view.
pub fn classify_policy_with<R: Real>(view: &InsiderView<R>, pi: &PolicyMatrix<R>) -> PolicyClass {
    let trusted: Vec<bool> = (0..pi.num_signals())
        .map(|k| recommendation_trustworthy_with(view, pi, k))
        .collect();
    let label = if trusted.iter().all(|t| *t) {
        PolicyLabel::CompletelyTrustworthy
    } else if trusted.iter().all(|t| !*t) {
        PolicyLabel::CompletelyUntrustworthy
    } else {
        PolicyLabel::Mixed
    };
    PolicyClass { trusted, label }
}

/// Belief threshold of a binary-action, binary-posture insider: the prior
/// probability of the high-risk posture above which the initial compliance
/// action is the compliant one (action index 1).
///
/// The preference for non-compliance `f(b)` is affine in the high-risk prior
/// `b`, so its zero is computed in closed form and clamped into `[0, 1]`.
pub fn belief_threshold<R: Real>(m: &ScenarioModel<R>) -> Result<R, InsiderError> {
    if m.num_actions() != 2 {
        return Err(InsiderError::NotBinaryActions(m.num_actions()));
    }
    if m.num_states() != 2 {
        return Err(InsiderError::NotBinaryStates(m.num_states()));
    }
    // g(y) = sum_x psi(x|y) [v_U(y,x,a^1) - v_U(y,x,a^2)]; f(b) = b g(hr) + (1-b) g(lr).
    let g = |y: usize| -> R {
        (0..m.num_audits())
            .map(|x| m.audit_policy.get(y, x) * (m.v_u.get(y, x, 0) - m.v_u.get(y, x, 1)))
            .sum()
    };
    let g_hr = g(0);
    let g_lr = g(1);
    let zero = R::zero();
    let one = R::one();
    let t_ze = if g_hr == g_lr {
        // Constant preference: clamp by sign.
        if g_lr > zero {
            one
        } else {
            zero
        }
    } else {
        g_lr / (g_lr - g_hr)
    };
    Ok(t_ze.min(one).max(zero))
}

/// Incentive category of the insider relative to the defender.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncentiveCategory {
    /// Preference rankings agree at every (posture, audit) pair.
    Amenable,
    /// Preference rankings reverse at every (posture, audit) pair.
    Malicious,
    SelfInterested,
}

impl IncentiveCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Amenable => "amenable",
            Self::Malicious => "malicious",
            Self::SelfInterested => "self-interested",
        }
    }
}

/// Classifies the insider by pairwise ranking consistency: amenable when
/// `v_U(a) >= v_U(a')` always implies `v_D(a) >= v_D(a')`, malicious when it
/// always implies the reverse, self-interested otherwise. Ties in `v_U`
/// therefore require ties in `v_D` for either strict category.
pub fn incentive_category<R: Real>(m: &ScenarioModel<R>) -> IncentiveCategory {
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    let mut amenable = true;
    let mut malicious = true;
    for y in 0..j {
        for x in 0..i {
            for a in 0..k {
                for b in 0..k {
                    if a == b || m.v_u.get(y, x, a) < m.v_u.get(y, x, b) {
                        continue;
                    }
                    if m.v_d.get(y, x, a) < m.v_d.get(y, x, b) {
                        amenable = false;
                    }
                    if m.v_d.get(y, x, a) > m.v_d.get(y, x, b) {
                        malicious = false;
                    }
                }
            }
        }
    }
    // A scenario with one action (or fully tied utilities) is trivially both;
    // call it amenable.
    if amenable {
        IncentiveCategory::Amenable
    } else if malicious {
        IncentiveCategory::Malicious
    } else {
        IncentiveCategory::SelfInterested
    }
}

/// Query mode of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Deterministic: answers with the best response to the queried signal.
    Direct,
    /// Samples an audit scheme and a signal per the policy, resampling until
    /// the queried signal realizes, then replies with the best response.
    Episodic,
}

/// One logged oracle interaction.
#[derive(Debug, Clone)]
pub struct OracleLogEntry {
    /// Row point of the k-th hypercube that was probed.
    pub point: Vec<f64>,
    /// Signal index the learner asked about.
    pub signal: usize,
    /// Action the insider took.
    pub action: usize,
}

impl OracleLogEntry {
    pub const CSV_HEADER: &'static str = "point,signal,action";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{}",
            self.point
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            self.signal,
            self.action
        )
    }
}

/// Black-box insider used by the learner. Holds the hidden scenario; in
/// episodic mode it owns its random state, so clone with distinct seeds for
/// concurrent use.
#[derive(Debug, Clone)]
pub struct InsiderOracle<R> {
    scenario: ScenarioModel<R>,
    view: InsiderView<R>,
    mode: OracleMode,
    rng: StdRng,
    resample_cap: usize,
    /// Append-only transcript of (point, signal realized, action observed).
    pub transcript: Vec<OracleLogEntry>,
}

impl<R: Real> InsiderOracle<R> {
    pub fn new(scenario: ScenarioModel<R>, mode: OracleMode, seed: u64) -> Self {
        let view = InsiderView::new(&scenario);
        InsiderOracle {
            scenario,
            view,
            mode,
            rng: StdRng::seed_from_u64(seed),
            resample_cap: 10_000,
            transcript: Vec::new(),
        }
    }

    pub fn direct(scenario: ScenarioModel<R>) -> Self {
        Self::new(scenario, OracleMode::Direct, 0)
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn num_audits(&self) -> usize {
        self.scenario.num_audits()
    }

    pub fn num_actions(&self) -> usize {
        self.scenario.num_actions()
    }

    /// The action the insider takes with no recommendation at all.
    pub fn observe_initial_compliance(&self) -> usize {
        initial_compliance_with(&self.view)
    }

    /// Asks whether signal `k` induces action `k` under the policy that puts
    /// `row_point` on the k-th row and spreads each column's residual mass
    /// uniformly over the other rows. Which completion is chosen cannot
    /// matter: trust of `s^k` depends on the k-th row alone.
    ///
    /// The simulated insider follows a recommendation he is indifferent
    /// about (the compliance assumption behind the trust definitions), so
    /// the behavioral labels coincide with the closed trust regions even at
    /// exact ties; away from ties this is plain lowest-index best response.
    pub fn query_point(&mut self, k: usize, row_point: &[R]) -> Result<bool, InsiderError> {
        let pi = policy_from_row_point(self.num_actions(), k, row_point);
        let action = self.induced_action(&pi, k)?;
        self.transcript.push(OracleLogEntry {
            point: row_point.iter().map(|v| v.to_f64_lossy()).collect(),
            signal: k,
            action,
        });
        Ok(action == k)
    }

    fn induced_action(&mut self, pi: &PolicyMatrix<R>, k: usize) -> Result<usize, InsiderError> {
        match self.mode {
            OracleMode::Direct => induced_action_with(&self.view, pi, k)
                .ok_or(InsiderError::Belief(BeliefError::ZeroProbabilitySignal {
                    signal: k,
                })),
            OracleMode::Episodic => {
                for _ in 0..self.resample_cap {
                    let x = self.sample_audit();
                    let s = self.sample_signal(pi, x);
                    if s == k {
                        return induced_action_with(&self.view, pi, s).ok_or(
                            InsiderError::Belief(BeliefError::ZeroProbabilitySignal {
                                signal: s,
                            }),
                        );
                    }
                }
                Err(InsiderError::BudgetExceeded(self.resample_cap))
            }
        }
    }

    fn sample_audit(&mut self) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (x, p) in self.view.prior.marg_x.iter().enumerate() {
            acc += p.to_f64_lossy();
            if u < acc {
                return x;
            }
        }
        self.view.prior.marg_x.len() - 1
    }

    fn sample_signal(&mut self, pi: &PolicyMatrix<R>, x: usize) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for k in 0..pi.num_signals() {
            acc += pi.prob(k, x).to_f64_lossy();
            if u < acc {
                return k;
            }
        }
        pi.num_signals() - 1
    }
}

/// Completes a k-th row point into a full policy: row `k` carries the point,
/// every other row takes an equal share of each column's residual mass.
pub fn policy_from_row_point<R: Real>(
    num_signals: usize,
    k: usize,
    row_point: &[R],
) -> PolicyMatrix<R> {
    let others = R::from_usize(num_signals - 1).unwrap_or_else(R::one);
    let pi = Matrix::from_fn(num_signals, row_point.len(), |row, col| {
        if row == k {
            row_point[col]
        } else {
            (R::one() - row_point[col]) / others
        }
    });
    PolicyMatrix::new(pi).expect("row-point completion is column-stochastic")
}
