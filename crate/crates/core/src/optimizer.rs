//! Solvers for the optimal-recommendation programs: the fully customized
//! linear program over the completely-trustworthy set, its dual, the
//! KL-regularized finite-customization program, and the closed-form special
//! cases for linearly dependent or aligned incentives.

use thiserror::Error;

use crate::belief::PolicyMatrix;
use crate::insider::{initial_compliance_with, trust_row_holds, InsiderView};
use crate::mat::{solve_dense, Matrix, Tensor3};
use crate::metrics::{self, MetricContext, MetricReport};
use crate::scalar::{argmax_first, argmin_first, Real};
use crate::scenario::ScenarioModel;
use crate::simplex::{self, ConstraintOp, LinearProgram, LpError};

/// Level of recommendation customization: the weight on compliance
/// enhancement relative to KL deviation from the default policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lorc<R> {
    /// Fully customized recommendations (the pure linear program).
    Infinite,
    Finite(R),
}

#[derive(Debug, Clone)]
pub struct SolverConfig<R> {
    pub eta: Lorc<R>,
    /// Default policy the KL term anchors to; `None` means uniform.
    pub default_policy: Option<PolicyMatrix<R>>,
    pub tol: R,
    pub max_iters: usize,
    /// Floor on policy entries inside KL gradients.
    pub smoothing_floor: R,
}

impl<R: Real> SolverConfig<R> {
    pub fn infinite() -> Self {
        SolverConfig {
            eta: Lorc::Infinite,
            default_policy: None,
            tol: R::from_f64_lit(1e-8),
            max_iters: 500,
            smoothing_floor: R::from_f64_lit(1e-9),
        }
    }

    pub fn finite(eta: R) -> Self {
        SolverConfig {
            eta: Lorc::Finite(eta),
            ..Self::infinite()
        }
    }

    pub fn with_default_policy(mut self, pi_d: PolicyMatrix<R>) -> Self {
        self.default_policy = Some(pi_d);
        self
    }

    fn resolve_default(&self, num_signals: usize, num_audits: usize) -> PolicyMatrix<R> {
        self.default_policy
            .clone()
            .unwrap_or_else(|| PolicyMatrix::uniform(num_signals, num_audits))
    }
}

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("utilities are not linearly dependent at the stated factors")]
    NotLinearlyDependent,
    #[error("incentives do not share optimal actions: {0}")]
    NotAligned(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

impl From<LpError> for OptimizerError {
    fn from(e: LpError) -> Self {
        OptimizerError::NumericalFailure(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct SolveDiagnostics<R> {
    pub iterations: usize,
    pub duality_gap: R,
    /// Value bracket `(lower, lower + log(K)/eta)` at the accepted
    /// multipliers; `None` for the fully customized program.
    pub bracket: Option<(R, R)>,
    /// Nonnegativity multipliers; zero at the optimum by complementary
    /// slackness, reported explicitly.
    pub alpha: Matrix<R>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult<R> {
    pub policy: PolicyMatrix<R>,
    /// Optimal objective value `r_eta` (the optimal acquired security level
    /// when `eta` is infinite).
    pub value: R,
    /// Per-audit dual variable: the insider's required effort per audit
    /// scheme (`beta_hat` for the fully customized program, `beta_eta`
    /// otherwise).
    pub dual_beta: Vec<R>,
    /// `K x K` nonnegative multipliers on the trust constraints; entry
    /// `(k, l)` prices inducing action `l` under recommendation `k`.
    pub dual_lambda: Matrix<R>,
    pub metrics: MetricReport<R>,
    pub diagnostics: SolveDiagnostics<R>,
}

/// Always-trusted policy that recommends the initial-compliance action at
/// every audit scheme; it moves no beliefs.
pub fn zero_info_policy<R: Real>(m: &ScenarioModel<R>) -> PolicyMatrix<R> {
    let view = InsiderView::new(m);
    zero_info_policy_with(&view)
}

pub fn zero_info_policy_with<R: Real>(view: &InsiderView<R>) -> PolicyMatrix<R> {
    let a0 = initial_compliance_with(view);
    PolicyMatrix::deterministic(view.num_actions(), &vec![a0; view.num_audits()])
}

/// Policy that recommends the insider's favorite action at each audit
/// scheme, fully revealing which scheme was chosen (up to action ties).
pub fn full_info_policy<R: Real>(m: &ScenarioModel<R>) -> PolicyMatrix<R> {
    full_info_policy_with(&InsiderView::new(m))
}

pub fn full_info_policy_with<R: Real>(view: &InsiderView<R>) -> PolicyMatrix<R> {
    let picks: Vec<usize> = (0..view.num_audits())
        .map(|x| argmax_first(&view.bar_u.row(x).to_vec()))
        .collect();
    PolicyMatrix::deterministic(view.num_actions(), &picks)
}

/// One linear inequality over the vectorized policy (`coeffs . pi >= rhs`);
/// variables are ordered `k * I + x`.
#[derive(Debug, Clone)]
pub struct PolicyInequality<R> {
    /// Trust rows carry their (recommendation, induced action) pair.
    pub pair: Option<(usize, usize)>,
    pub coeffs: Vec<R>,
    pub rhs: R,
}

/// Inequality description of a policy feasible set, consumed by the linear
/// solver together with the implicit column-stochasticity equalities and
/// nonnegativity bounds.
#[derive(Debug, Clone)]
pub struct PolicyConstraintSystem<R> {
    pub num_signals: usize,
    pub num_audits: usize,
    pub inequalities: Vec<PolicyInequality<R>>,
    /// Entries pinned to zero (support conditions from a default policy).
    pub pinned_zero: Vec<(usize, usize)>,
}

impl<R: Real> PolicyConstraintSystem<R> {
    pub fn var(&self, k: usize, x: usize) -> usize {
        k * self.num_audits + x
    }
}

/// The trust constraint system whose feasible set is exactly the
/// completely-trustworthy policy set: one row per ordered action pair
/// `(k, l)`, plus the implicit simplex structure.
pub fn ct_constraints<R: Real>(m: &ScenarioModel<R>) -> PolicyConstraintSystem<R> {
    ct_constraints_with(&InsiderView::new(m))
}

pub fn ct_constraints_with<R: Real>(view: &InsiderView<R>) -> PolicyConstraintSystem<R> {
    let (k_n, i_n) = (view.num_actions(), view.num_audits());
    let mut inequalities = Vec::with_capacity(k_n * (k_n - 1));
    for k in 0..k_n {
        for l in 0..k_n {
            if l == k {
                continue;
            }
            let mut coeffs = vec![R::zero(); k_n * i_n];
            for x in 0..i_n {
                coeffs[k * i_n + x] = view.vhat_u.get(k, x) - view.vhat_u.get(l, x);
            }
            inequalities.push(PolicyInequality {
                pair: Some((k, l)),
                coeffs,
                rhs: R::zero(),
            });
        }
    }
    PolicyConstraintSystem {
        num_signals: k_n,
        num_audits: i_n,
        inequalities,
        pinned_zero: Vec::new(),
    }
}

/// Maximizes a linear objective over a policy constraint system. Returns the
/// vertex found, the optimal value, and simplex iterations.
pub fn maximize_over_system<R: Real>(
    system: &PolicyConstraintSystem<R>,
    objective: &Matrix<R>,
) -> Result<(PolicyMatrix<R>, R, usize), OptimizerError> {
    let (k_n, i_n) = (system.num_signals, system.num_audits);
    let total = k_n * i_n;
    let mut pinned = vec![false; total];
    for (k, x) in &system.pinned_zero {
        pinned[k * i_n + x] = true;
    }
    // Map retained grid entries onto LP variables.
    let mut var_of = vec![None; total];
    let mut retained = Vec::new();
    for idx in 0..total {
        if !pinned[idx] {
            var_of[idx] = Some(retained.len());
            retained.push(idx);
        }
    }

    let mut obj = vec![R::zero(); retained.len()];
    for (v, idx) in retained.iter().enumerate() {
        let (k, x) = (idx / i_n, idx % i_n);
        obj[v] = -objective.get(k, x); // simplex minimizes
    }

    let mut rows = Vec::new();
    for x in 0..i_n {
        let mut coeffs = vec![R::zero(); retained.len()];
        let mut any = false;
        for k in 0..k_n {
            if let Some(v) = var_of[k * i_n + x] {
                coeffs[v] = R::one();
                any = true;
            }
        }
        if !any {
            return Err(OptimizerError::NumericalFailure(format!(
                "audit column {x} has no admissible signals"
            )));
        }
        rows.push((coeffs, ConstraintOp::Eq, R::one()));
    }
    for ineq in &system.inequalities {
        let mut coeffs = vec![R::zero(); retained.len()];
        for (idx, c) in ineq.coeffs.iter().enumerate() {
            if let Some(v) = var_of[idx] {
                coeffs[v] = *c;
            }
        }
        rows.push((coeffs, ConstraintOp::Ge, ineq.rhs));
    }

    let lp = LinearProgram {
        num_vars: retained.len(),
        objective: obj,
        rows,
    };
    let sol = simplex::solve(&lp)?;

    let mut pi = Matrix::zeros(k_n, i_n);
    for (v, idx) in retained.iter().enumerate() {
        let (k, x) = (idx / i_n, idx % i_n);
        pi.set(k, x, sol.primal[v].max(R::zero()));
    }
    let policy = PolicyMatrix::new(pi)
        .map_err(|e| OptimizerError::NumericalFailure(format!("LP vertex invalid: {e}")))?;
    Ok((policy, -sol.value, sol.iterations))
}

/// Solves the fully customized program: maximize the defender's expected
/// security objective over the completely-trustworthy set. Dual variables
/// come from an independent solve of the dual linear program, which also
/// certifies the value through strong duality.
pub fn solve_optimal_acel<R: Real>(m: &ScenarioModel<R>) -> Result<SolveResult<R>, OptimizerError> {
    let ctx = MetricContext::new(m);
    let system = ct_constraints_with(&ctx.view);
    let objective = defender_objective(&ctx);
    let (policy, value, iterations) = maximize_over_system(&system, &objective)?;

    let dual = solve_dual_lp(m)?;
    let gap = (value - dual.value).abs();

    let report = metrics::report_with(&ctx, &policy);
    Ok(SolveResult {
        policy,
        value,
        dual_beta: dual.beta_hat,
        dual_lambda: dual.lambda,
        metrics: report,
        diagnostics: SolveDiagnostics {
            iterations,
            duality_gap: gap,
            bracket: None,
            alpha: Matrix::zeros(m.num_actions(), m.num_audits()),
            converged: true,
        },
    })
}

fn defender_objective<R: Real>(ctx: &MetricContext<R>) -> Matrix<R> {
    let (k_n, i_n) = (ctx.view.num_actions(), ctx.view.num_audits());
    Matrix::from_fn(k_n, i_n, |k, x| ctx.view.prior.marg_x[x] * ctx.bar_d.get(x, k))
}

/// Solution of the dual linear program.
#[derive(Debug, Clone)]
pub struct DualLpSolution<R> {
    /// Per-audit effort `beta_hat(x)`; zero on unreachable audit columns.
    pub beta_hat: Vec<R>,
    /// `K x K` nonnegative multipliers, zero diagonal.
    pub lambda: Matrix<R>,
    pub value: R,
    pub iterations: usize,
}

/// Solves the dual of the fully customized program directly:
/// `min sum_x b_X(x) beta_hat(x)` subject to
/// `beta_hat(x) >= bar_beta(s^k, x, lambda)` for every signal and audit.
pub fn solve_dual_lp<R: Real>(m: &ScenarioModel<R>) -> Result<DualLpSolution<R>, OptimizerError> {
    let ctx = MetricContext::new(m);
    let (k_n, i_n) = (ctx.view.num_actions(), ctx.view.num_audits());

    let reachable: Vec<usize> = (0..i_n).filter(|x| ctx.view.prior.reachable[*x]).collect();
    let pairs: Vec<(usize, usize)> = (0..k_n)
        .flat_map(|k| (0..k_n).filter(move |l| *l != k).map(move |l| (k, l)))
        .collect();

    // Variables: beta_hat split into positive and negative parts per
    // reachable audit, then one lambda per ordered pair.
    let nb = reachable.len();
    let num_vars = 2 * nb + pairs.len();
    let mut objective = vec![R::zero(); num_vars];
    for (b_idx, x) in reachable.iter().enumerate() {
        objective[2 * b_idx] = ctx.view.prior.marg_x[*x];
        objective[2 * b_idx + 1] = -ctx.view.prior.marg_x[*x];
    }

    let mut rows = Vec::new();
    for (b_idx, x) in reachable.iter().enumerate() {
        for k in 0..k_n {
            let mut coeffs = vec![R::zero(); num_vars];
            coeffs[2 * b_idx] = R::one();
            coeffs[2 * b_idx + 1] = -R::one();
            for (p_idx, (pk, pl)) in pairs.iter().enumerate() {
                if *pk == k {
                    coeffs[2 * nb + p_idx] =
                        -(ctx.view.bar_u.get(*x, k) - ctx.view.bar_u.get(*x, *pl));
                }
            }
            rows.push((coeffs, ConstraintOp::Ge, ctx.bar_d.get(*x, k)));
        }
    }

    let lp = LinearProgram {
        num_vars,
        objective,
        rows,
    };
    let sol = simplex::solve(&lp)?;

    let mut beta_hat = vec![R::zero(); i_n];
    for (b_idx, x) in reachable.iter().enumerate() {
        beta_hat[*x] = sol.primal[2 * b_idx] - sol.primal[2 * b_idx + 1];
    }
    let mut lambda = Matrix::zeros(k_n, k_n);
    for (p_idx, (k, l)) in pairs.iter().enumerate() {
        lambda.set(*k, *l, sol.primal[2 * nb + p_idx]);
    }
    Ok(DualLpSolution {
        beta_hat,
        lambda,
        value: sol.value,
        iterations: sol.iterations,
    })
}

// ---------------------------------------------------------------------------
// Finite customization: dual descent plus closed-form reconstruction.
// ---------------------------------------------------------------------------

/// Precomputed data for one finite-eta solve.
struct EtaProblem<R> {
    view: InsiderView<R>,
    bar_d: Matrix<R>,
    eta: R,
    pi_d: PolicyMatrix<R>,
    /// Signals in each column's support (positive default probability).
    support: Vec<Vec<usize>>,
    /// Ordered (k, l) pairs indexing the multiplier vector.
    pairs: Vec<(usize, usize)>,
}

impl<R: Real> EtaProblem<R> {
    fn new(ctx: &MetricContext<R>, eta: R, pi_d: PolicyMatrix<R>) -> Self {
        let (k_n, i_n) = (ctx.view.num_actions(), ctx.view.num_audits());
        let support = (0..i_n)
            .map(|x| (0..k_n).filter(|k| pi_d.prob(*k, x) > R::zero()).collect())
            .collect();
        let pairs = (0..k_n)
            .flat_map(|k| (0..k_n).filter(move |l| *l != k).map(move |l| (k, l)))
            .collect();
        EtaProblem {
            view: ctx.view.clone(),
            bar_d: ctx.bar_d.clone(),
            eta,
            pi_d,
            support,
            pairs,
        }
    }

    fn num_audits(&self) -> usize {
        self.view.num_audits()
    }

    fn beta_bar(&self, k: usize, x: usize, lambda: &[R]) -> R {
        let mut v = self.bar_d.get(x, k);
        for (p_idx, (pk, pl)) in self.pairs.iter().enumerate() {
            if *pk == k {
                v = v + lambda[p_idx] * (self.view.bar_u.get(x, k) - self.view.bar_u.get(x, *pl));
            }
        }
        v
    }

    /// Per-column log-sum-exp of `ln pi_d + eta b_X beta_bar` over the
    /// support, evaluated stably.
    fn column_lse(&self, x: usize, lambda: &[R]) -> R {
        let terms: Vec<R> = self.support[x]
            .iter()
            .map(|k| {
                self.pi_d.prob(*k, x).ln()
                    + self.eta * self.view.prior.marg_x[x] * self.beta_bar(*k, x, lambda)
            })
            .collect();
        log_sum_exp(&terms)
    }

    /// Dual objective `D(lambda) = (1/eta) sum_x lse_x`.
    fn dual_value(&self, lambda: &[R]) -> R {
        let s: R = (0..self.num_audits()).map(|x| self.column_lse(x, lambda)).sum();
        s / self.eta
    }

    /// Closed-form reconstruction: per-column softmax of the exponents over
    /// the default policy's support, renormalized against round-off at
    /// extreme exponents.
    fn reconstruct(&self, lambda: &[R]) -> PolicyMatrix<R> {
        let (k_n, i_n) = (self.view.num_actions(), self.num_audits());
        let mut pi = Matrix::zeros(k_n, i_n);
        for x in 0..i_n {
            let terms: Vec<R> = self.support[x]
                .iter()
                .map(|k| {
                    self.pi_d.prob(*k, x).ln()
                        + self.eta * self.view.prior.marg_x[x] * self.beta_bar(*k, x, lambda)
                })
                .collect();
            let lse = log_sum_exp(&terms);
            let weights: Vec<R> = terms.iter().map(|t| (*t - lse).exp()).collect();
            let total: R = weights.iter().copied().sum();
            for (t, k) in self.support[x].iter().enumerate() {
                pi.set(*k, x, weights[t] / total);
            }
        }
        PolicyMatrix::new(pi).expect("softmax reconstruction is column-stochastic")
    }

    /// Gradient of the dual: the trust-constraint values at the
    /// reconstructed policy.
    fn gradient(&self, pi: &PolicyMatrix<R>) -> Vec<R> {
        self.pairs
            .iter()
            .map(|(k, l)| {
                (0..self.num_audits())
                    .map(|x| {
                        self.view.prior.marg_x[x]
                            * pi.prob(*k, x)
                            * (self.view.bar_u.get(x, *k) - self.view.bar_u.get(x, *l))
                    })
                    .sum()
            })
            .collect()
    }

    /// Hessian of the dual: per-column softmax covariances.
    fn hessian(&self, pi: &PolicyMatrix<R>) -> Matrix<R> {
        let n = self.pairs.len();
        let mut h = Matrix::zeros(n, n);
        for x in 0..self.num_audits() {
            let bx = self.view.prior.marg_x[x];
            if bx <= R::zero() {
                continue;
            }
            // u_k[(k, l)] = bar_u(x, k) - bar_u(x, l); zero outside block k.
            let mean: Vec<R> = self
                .pairs
                .iter()
                .map(|(k, l)| {
                    pi.prob(*k, x) * (self.view.bar_u.get(x, *k) - self.view.bar_u.get(x, *l))
                })
                .collect();
            for (i, (ki, li)) in self.pairs.iter().enumerate() {
                let ui = self.view.bar_u.get(x, *ki) - self.view.bar_u.get(x, *li);
                for (j, (kj, lj)) in self.pairs.iter().enumerate() {
                    let uj = self.view.bar_u.get(x, *kj) - self.view.bar_u.get(x, *lj);
                    let second = if ki == kj {
                        pi.prob(*ki, x) * ui * uj
                    } else {
                        R::zero()
                    };
                    let add = self.eta * bx * bx * (second - mean[i] * mean[j]);
                    h.set(i, j, h.get(i, j) + add);
                }
            }
        }
        h
    }

    /// Primal objective: linear security value minus the scaled divergence.
    fn primal_value(&self, pi: &PolicyMatrix<R>) -> R {
        let mut linear = R::zero();
        let mut kl = R::zero();
        for x in 0..self.num_audits() {
            for k in 0..self.view.num_actions() {
                let p = pi.prob(k, x);
                linear = linear + self.view.prior.marg_x[x] * p * self.bar_d.get(x, k);
                if p > R::zero() {
                    kl = kl + p * (p / self.pi_d.prob(k, x)).ln();
                }
            }
        }
        linear - kl / self.eta
    }

    /// Dual beta variables from the column log-sum-exps.
    fn beta_eta(&self, lambda: &[R]) -> Vec<R> {
        (0..self.num_audits())
            .map(|x| (self.column_lse(x, lambda) - R::one()) / self.eta)
            .collect()
    }

    /// Lower bound of the optimal value at the given multipliers.
    fn lower_bound(&self, lambda: &[R]) -> R {
        (0..self.num_audits())
            .map(|x| {
                if !self.view.prior.reachable[x] {
                    return R::zero();
                }
                self.support[x]
                    .iter()
                    .map(|k| {
                        self.view.prior.marg_x[x] * self.beta_bar(*k, x, lambda)
                            + self.pi_d.prob(*k, x).ln() / self.eta
                    })
                    .fold(R::neg_infinity(), R::max)
            })
            .sum()
    }
}

fn log_sum_exp<R: Real>(terms: &[R]) -> R {
    let m = terms.iter().copied().fold(R::neg_infinity(), R::max);
    if !m.is_finite() {
        return m;
    }
    let s: R = terms.iter().map(|t| (*t - m).exp()).sum();
    m + s.ln()
}

/// Solves the finite-customization program.
///
/// The workhorse is a projected Newton descent on the smooth convex dual in
/// the `K(K-1)` trust multipliers; the primal policy is reconstructed in
/// closed form from the multipliers, and the duality gap `D - F` certifies
/// optimality. A conditional-gradient polish over the trust polytope runs
/// only if the certificate is not reached, and the best iterate is returned
/// flagged as unconverged if the budget runs out.
pub fn solve_primal_eta<R: Real>(
    m: &ScenarioModel<R>,
    cfg: &SolverConfig<R>,
) -> Result<SolveResult<R>, OptimizerError> {
    let Lorc::Finite(eta) = cfg.eta else {
        return solve_optimal_acel(m);
    };
    if !(eta > R::zero()) || !eta.is_finite() {
        return Err(OptimizerError::PreconditionViolated(format!(
            "customization level must be positive and finite, got {eta}"
        )));
    }
    let ctx = MetricContext::new(m);
    let pi_d = cfg.resolve_default(m.num_actions(), m.num_audits());
    let prob = EtaProblem::new(&ctx, eta, pi_d);

    // A default policy with zeros pins the matching entries to zero. If that
    // support face misses the trust set entirely the program is infeasible
    // and the dual diverges; reject it up front.
    if prob.support.iter().any(|s| s.len() < m.num_actions()) {
        let mut system = ct_constraints_with(&ctx.view);
        for x in 0..m.num_audits() {
            for k in 0..m.num_actions() {
                if prob.pi_d.prob(k, x) <= R::zero() {
                    system.pinned_zero.push((k, x));
                }
            }
        }
        let objective = Matrix::zeros(m.num_actions(), m.num_audits());
        if maximize_over_system(&system, &objective).is_err() {
            return Err(OptimizerError::NumericalFailure(
                "the default policy's support admits no completely trustworthy policy".into(),
            ));
        }
    }

    // Warm start from the fully customized duals when eta is extreme; the
    // softmax then concentrates near the vertex solution and a cold start
    // would crawl through a nearly linear region.
    let mut lambda = vec![R::zero(); prob.pairs.len()];
    if eta > R::from_f64_lit(1e3) {
        if let Ok(dual) = solve_dual_lp(m) {
            for (p_idx, (k, l)) in prob.pairs.iter().enumerate() {
                lambda[p_idx] = dual.lambda.get(*k, *l).max(R::zero());
            }
        }
    }

    let feas_tol = cfg.tol;
    let mut iterations = 0;
    let mut converged = false;
    let mut pi = prob.reconstruct(&lambda);
    let ridge_base = R::from_f64_lit(1e-12);

    // Complementarity gap lambda . g; identical to the duality gap D - F
    // at a reconstructed policy, but free of catastrophic cancellation.
    let comp_gap = |lambda: &[R], grad: &[R]| -> R {
        lambda
            .iter()
            .zip(grad.iter())
            .map(|(l, g)| *l * *g)
            .sum()
    };
    let newton_direction = |prob: &EtaProblem<R>,
                            pi: &PolicyMatrix<R>,
                            lambda: &[R],
                            grad: &[R]|
     -> Option<Vec<R>> {
        let active: Vec<bool> = lambda
            .iter()
            .zip(grad.iter())
            .map(|(l, g)| *l <= R::zero() && *g >= R::zero())
            .collect();
        let free: Vec<usize> = (0..lambda.len()).filter(|j| !active[*j]).collect();
        if free.is_empty() {
            return None;
        }
        let hess = prob.hessian(pi);
        let nf = free.len();
        let mut hf = Matrix::zeros(nf, nf);
        let mut gf = vec![R::zero(); nf];
        let mut diag_scale = R::zero();
        for (a, ja) in free.iter().enumerate() {
            gf[a] = grad[*ja];
            for (b, jb) in free.iter().enumerate() {
                hf.set(a, b, hess.get(*ja, *jb));
            }
            diag_scale = diag_scale.max(hf.get(a, a).abs());
        }
        let ridge = ridge_base + diag_scale * R::from_f64_lit(1e-10);
        for a in 0..nf {
            hf.set(a, a, hf.get(a, a) + ridge);
        }
        let mut d = vec![R::zero(); lambda.len()];
        match solve_dense(&hf, &gf, R::from_f64_lit(1e-300)) {
            Some(step) => {
                for (a, ja) in free.iter().enumerate() {
                    d[*ja] = -step[a];
                }
            }
            None => {
                for ja in &free {
                    d[*ja] = -grad[*ja];
                }
            }
        }
        Some(d)
    };

    // Phase 1: projected Newton descent on the dual value.
    while iterations < cfg.max_iters {
        iterations += 1;
        let grad = prob.gradient(&pi);
        let gap = comp_gap(&lambda, &grad);
        let worst_violation = grad.iter().copied().fold(R::zero(), |acc, g| acc.min(g));
        if gap.abs() <= cfg.tol && worst_violation >= -feas_tol {
            converged = true;
            break;
        }
        let Some(direction) = newton_direction(&prob, &pi, &lambda, &grad) else {
            // All multipliers pinned with nonnegative gradients: lambda = 0
            // is optimal and the gap is exactly zero there.
            converged = true;
            break;
        };
        let d_val = prob.dual_value(&lambda);
        let mut improved = false;
        // Newton direction first; if its whole backtracking ray fails
        // (possible when the Hessian is noisy at low precision), retry along
        // the projected gradient before giving up.
        let gradient_dir: Vec<R> = lambda
            .iter()
            .zip(grad.iter())
            .map(|(l, g)| {
                if *l <= R::zero() && *g >= R::zero() {
                    R::zero()
                } else {
                    -*g
                }
            })
            .collect();
        'directions: for dir in [&direction, &gradient_dir] {
            let mut t = R::one();
            for _ in 0..60 {
                let candidate: Vec<R> = lambda
                    .iter()
                    .zip(dir.iter())
                    .map(|(l, d)| (*l + t * *d).max(R::zero()))
                    .collect();
                if candidate
                    .iter()
                    .zip(lambda.iter())
                    .all(|(c, l)| (*c - *l).abs() == R::zero())
                {
                    break;
                }
                if prob.dual_value(&candidate) < d_val {
                    lambda = candidate;
                    improved = true;
                    break 'directions;
                }
                t = t * R::from_f64_lit(0.5);
            }
        }
        if !improved {
            break; // flat to machine precision; hand over to the polish
        }
        pi = prob.reconstruct(&lambda);
    }

    // Phase 2: the dual value is flat near the optimum long before the
    // gradient system is solved to tolerance, so finish with full Newton
    // steps accepted on gradient-norm decrease (quadratic in the basin).
    if !converged {
        let grad_norm = |g: &[R], lambda: &[R]| -> R {
            g.iter()
                .zip(lambda.iter())
                .map(|(g, l)| {
                    if *l > R::zero() {
                        g.abs()
                    } else {
                        (-*g).max(R::zero())
                    }
                })
                .fold(R::zero(), R::max)
        };
        for _ in 0..20 {
            iterations += 1;
            let grad = prob.gradient(&pi);
            let gap = comp_gap(&lambda, &grad);
            let worst = grad.iter().copied().fold(R::zero(), |acc, g| acc.min(g));
            if gap.abs() <= cfg.tol && worst >= -feas_tol {
                converged = true;
                break;
            }
            let Some(direction) = newton_direction(&prob, &pi, &lambda, &grad) else {
                converged = true;
                break;
            };
            let candidate: Vec<R> = lambda
                .iter()
                .zip(direction.iter())
                .map(|(l, d)| (*l + *d).max(R::zero()))
                .collect();
            let cand_pi = prob.reconstruct(&candidate);
            let cand_grad = prob.gradient(&cand_pi);
            if grad_norm(&cand_grad, &candidate) < grad_norm(&grad, &lambda) {
                lambda = candidate;
                pi = cand_pi;
            } else {
                break;
            }
        }
        if !converged {
            let grad = prob.gradient(&pi);
            converged = comp_gap(&lambda, &grad).abs() <= cfg.tol
                && grad.iter().all(|g| *g >= -feas_tol);
        }
    }

    // The returned policy must satisfy the trust rows; an unconverged
    // reconstruction may not, in which case the conditional-gradient
    // fallback provides a feasible iterate.
    let violation = |p: &PolicyMatrix<R>| -> R {
        prob.gradient(p)
            .iter()
            .copied()
            .fold(R::zero(), |acc, g| acc.min(g))
    };
    let mut best_pi = pi.clone();
    let mut best_val = prob.primal_value(&best_pi);
    if !converged || violation(&best_pi) < -feas_tol {
        let system = ct_constraints_with(&ctx.view);
        let start = zero_info_policy_with(&ctx.view);
        if let Ok((fw_pi, fw_iters)) = frank_wolfe(&prob, &system, start, cfg) {
            iterations += fw_iters;
            let v = prob.primal_value(&fw_pi);
            if violation(&best_pi) < -feas_tol || v > best_val {
                best_val = v;
                best_pi = fw_pi;
            }
        }
        let d_val = prob.dual_value(&lambda);
        converged = (d_val - best_val).abs() <= cfg.tol && violation(&best_pi) >= -feas_tol;
    }

    let d_val = prob.dual_value(&lambda);
    let lower = prob.lower_bound(&lambda);
    let upper = lower + R::from_usize(m.num_actions()).unwrap().ln() / eta;
    let mut dual_lambda = Matrix::zeros(m.num_actions(), m.num_actions());
    for (p_idx, (k, l)) in prob.pairs.iter().enumerate() {
        dual_lambda.set(*k, *l, lambda[p_idx]);
    }
    let report = metrics::report_with(&ctx, &best_pi);
    Ok(SolveResult {
        value: best_val,
        policy: best_pi,
        dual_beta: prob.beta_eta(&lambda),
        dual_lambda,
        metrics: report,
        diagnostics: SolveDiagnostics {
            iterations,
            duality_gap: d_val - best_val,
            bracket: Some((lower, upper)),
            alpha: Matrix::zeros(m.num_actions(), m.num_audits()),
            converged,
        },
    })
}

/// Dispatch on the configured customization level.
pub fn solve<R: Real>(
    m: &ScenarioModel<R>,
    cfg: &SolverConfig<R>,
) -> Result<SolveResult<R>, OptimizerError> {
    match cfg.eta {
        Lorc::Infinite => solve_optimal_acel(m),
        Lorc::Finite(_) => solve_primal_eta(m, cfg),
    }
}

/// Conditional-gradient ascent on the concave finite-eta objective over the
/// trust polytope, with the simplex solver as the linear oracle.
fn frank_wolfe<R: Real>(
    prob: &EtaProblem<R>,
    system: &PolicyConstraintSystem<R>,
    start: PolicyMatrix<R>,
    cfg: &SolverConfig<R>,
) -> Result<(PolicyMatrix<R>, usize), OptimizerError> {
    let (k_n, i_n) = (start.num_signals(), start.num_audits());
    let mut system = system.clone();
    // Support conditions: entries outside the default policy's support stay 0.
    for x in 0..i_n {
        for k in 0..k_n {
            if prob.pi_d.prob(k, x) <= R::zero() {
                system.pinned_zero.push((k, x));
            }
        }
    }
    let floor = cfg.smoothing_floor;
    let mut x_cur = start;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let grad = Matrix::from_fn(k_n, i_n, |k, x| {
            if prob.pi_d.prob(k, x) <= R::zero() {
                return R::zero();
            }
            let p = x_cur.prob(k, x).max(floor);
            prob.view.prior.marg_x[x] * prob.bar_d.get(x, k)
                - ((p / prob.pi_d.prob(k, x)).ln() + R::one()) / prob.eta
        });
        let (vertex, _, _) = maximize_over_system(&system, &grad)?;
        let mut gap = R::zero();
        for k in 0..k_n {
            for x in 0..i_n {
                gap = gap + grad.get(k, x) * (vertex.prob(k, x) - x_cur.prob(k, x));
            }
        }
        if gap <= cfg.tol {
            break;
        }
        // Exact-enough line search: bisection on the directional derivative.
        let mut lo = R::zero();
        let mut hi = R::one();
        let dir_deriv = |t: R| -> R {
            let blend = vertex.blend(&x_cur, t);
            let mut d = R::zero();
            for k in 0..k_n {
                for x in 0..i_n {
                    if prob.pi_d.prob(k, x) <= R::zero() {
                        continue;
                    }
                    let p = blend.prob(k, x).max(floor);
                    let g = prob.view.prior.marg_x[x] * prob.bar_d.get(x, k)
                        - ((p / prob.pi_d.prob(k, x)).ln() + R::one()) / prob.eta;
                    d = d + g * (vertex.prob(k, x) - x_cur.prob(k, x));
                }
            }
            d
        };
        let step = if dir_deriv(R::one()) >= R::zero() {
            R::one()
        } else {
            for _ in 0..70 {
                let mid = (lo + hi) * R::from_f64_lit(0.5);
                if dir_deriv(mid) > R::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) * R::from_f64_lit(0.5)
        };
        if step <= R::zero() {
            break;
        }
        x_cur = vertex.blend(&x_cur, step);
    }
    Ok((x_cur, iters))
}

/// Closed-form optimal policy at given trust multipliers: a per-column
/// softmax of the default policy tilted by `eta b_X(x) bar_beta`.
pub fn closed_form_policy<R: Real>(
    m: &ScenarioModel<R>,
    lambda: &Matrix<R>,
    cfg: &SolverConfig<R>,
) -> Result<PolicyMatrix<R>, OptimizerError> {
    let Lorc::Finite(eta) = cfg.eta else {
        return Err(OptimizerError::PreconditionViolated(
            "closed-form policy requires a finite customization level".into(),
        ));
    };
    let ctx = MetricContext::new(m);
    let pi_d = cfg.resolve_default(m.num_actions(), m.num_audits());
    let prob = EtaProblem::new(&ctx, eta, pi_d);
    let lam: Vec<R> = prob
        .pairs
        .iter()
        .map(|(k, l)| lambda.get(*k, *l))
        .collect();
    Ok(prob.reconstruct(&lam))
}

/// Value bracket `(lower, lower + log(K)/eta)` for the optimal value at the
/// given multipliers.
pub fn value_bounds<R: Real>(
    m: &ScenarioModel<R>,
    lambda: &Matrix<R>,
    cfg: &SolverConfig<R>,
) -> Result<(R, R), OptimizerError> {
    let Lorc::Finite(eta) = cfg.eta else {
        return Err(OptimizerError::PreconditionViolated(
            "value bounds require a finite customization level".into(),
        ));
    };
    let ctx = MetricContext::new(m);
    let pi_d = cfg.resolve_default(m.num_actions(), m.num_audits());
    let prob = EtaProblem::new(&ctx, eta, pi_d);
    let lam: Vec<R> = prob
        .pairs
        .iter()
        .map(|(k, l)| lambda.get(*k, *l))
        .collect();
    let lower = prob.lower_bound(&lam);
    Ok((lower, lower + R::from_usize(m.num_actions()).unwrap().ln() / eta))
}

/// Which canonical policy attains the optimum in the linear-dependence
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalPolicyKind {
    ZeroInfo,
    FullInfo,
}

#[derive(Debug, Clone, Copy)]
pub struct LinearDependenceOptimum<R> {
    pub acel_star: R,
    pub kind: OptimalPolicyKind,
}

const DEPENDENCE_TOL: f64 = 1e-9;

/// Closed-form optimal compliance enhancement for linearly dependent
/// incentives `v_D = rho_sa v_U + rho_tr(y, x)`: zero (zero-information
/// optimal) for nonpositive scale, and the scaled revelation gap
/// (full-information optimal) for positive scale.
pub fn closed_form_linear_dependence<R: Real>(
    m: &ScenarioModel<R>,
    rho_sa: R,
    rho_tr: &Matrix<R>,
) -> Result<LinearDependenceOptimum<R>, OptimizerError> {
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    let tol = R::from_f64_lit(DEPENDENCE_TOL);
    for y in 0..j {
        for x in 0..i {
            for a in 0..k {
                let want = rho_sa * m.v_u.get(y, x, a) + rho_tr.get(y, x);
                if (m.v_d.get(y, x, a) - want).abs() > tol {
                    return Err(OptimizerError::NotLinearlyDependent);
                }
            }
        }
    }
    if rho_sa <= R::zero() {
        return Ok(LinearDependenceOptimum {
            acel_star: R::zero(),
            kind: OptimalPolicyKind::ZeroInfo,
        });
    }
    let view = InsiderView::new(m);
    let revealed: R = (0..i)
        .map(|x| {
            view.prior.marg_x[x]
                * (0..k)
                    .map(|a| view.bar_u.get(x, a))
                    .fold(R::neg_infinity(), R::max)
        })
        .sum();
    let pooled: R = (0..k)
        .map(|a| {
            (0..i)
                .map(|x| view.prior.marg_x[x] * view.bar_u.get(x, a))
                .sum()
        })
        .fold(R::neg_infinity(), R::max);
    Ok(LinearDependenceOptimum {
        acel_star: rho_sa * (revealed - pooled),
        kind: OptimalPolicyKind::FullInfo,
    })
}

/// Optimal security level for aligned incentives via the effort-gap
/// decomposition: the self-persuasion optimum minus the expected per-audit
/// utility gap at the shared optimal actions.
#[derive(Debug, Clone)]
pub struct AlignedOptimum<R> {
    pub asel_star: R,
    /// Self-aligned optimum `sum_x b_X(x) max_a bar_u(x, a)`.
    pub self_optimum: R,
    /// Per-audit gap `delta(x) = bar_u(x, a^max(x)) - bar_d(x, a^max(x))`.
    pub delta: Vec<R>,
}

/// Requires a shared optimal action per (posture, audit) pair and, at the
/// conditional-expectation level, a shared argmax per audit scheme; errors
/// with `NotAligned` otherwise.
pub fn aligned_optimum<R: Real>(m: &ScenarioModel<R>) -> Result<AlignedOptimum<R>, OptimizerError> {
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    let tie = R::from_f64_lit(1e-9);
    for y in 0..j {
        for x in 0..i {
            let u: Vec<R> = (0..k).map(|a| m.v_u.get(y, x, a)).collect();
            let d: Vec<R> = (0..k).map(|a| m.v_d.get(y, x, a)).collect();
            let umax = u[argmax_first(&u)];
            let dmax = d[argmax_first(&d)];
            let shared = (0..k).any(|a| umax - u[a] <= tie && dmax - d[a] <= tie);
            if !shared {
                return Err(OptimizerError::NotAligned(format!(
                    "no shared optimal action at posture {y}, audit {x}"
                )));
            }
        }
    }

    let ctx = MetricContext::new(m);
    let mut asel_star = R::zero();
    let mut self_optimum = R::zero();
    let mut delta = vec![R::zero(); i];
    for x in 0..i {
        if !ctx.view.prior.reachable[x] {
            continue;
        }
        let u: Vec<R> = (0..k).map(|a| ctx.view.bar_u.get(x, a)).collect();
        let d: Vec<R> = (0..k).map(|a| ctx.bar_d.get(x, a)).collect();
        let umax = u[argmax_first(&u)];
        let dmax = d[argmax_first(&d)];
        let shared = (0..k).find(|a| umax - u[*a] <= tie && dmax - d[*a] <= tie);
        let Some(a_x) = shared else {
            return Err(OptimizerError::NotAligned(format!(
                "expected-utility argmaxes diverge at audit {x}"
            )));
        };
        asel_star = asel_star + ctx.view.prior.marg_x[x] * d[a_x];
        self_optimum = self_optimum + ctx.view.prior.marg_x[x] * umax;
        delta[x] = u[a_x] - d[a_x];
    }
    Ok(AlignedOptimum {
        asel_star,
        self_optimum,
        delta,
    })
}

/// Security-objective perturbation that leaves the optimal security level
/// unchanged for linearly dependent malicious incentives: every entry at a
/// cross-audit minimizer action (an action that minimizes the defender's
/// utility at some other audit scheme but not at this one) is lowered by one
/// utility unit.
pub fn invariant_perturbation<R: Real>(
    m: &ScenarioModel<R>,
) -> Result<Tensor3<R>, OptimizerError> {
    let (j, i, k) = (m.num_states(), m.num_audits(), m.num_actions());
    let tol = R::from_f64_lit(DEPENDENCE_TOL);

    // Recover the scale from any action pair with distinct insider utility,
    // then verify the dependence globally.
    let mut rho: Option<R> = None;
    'outer: for y in 0..j {
        for x in 0..i {
            for a in 0..k {
                for b in (a + 1)..k {
                    let du = m.v_u.get(y, x, a) - m.v_u.get(y, x, b);
                    if du.abs() > tol {
                        rho = Some((m.v_d.get(y, x, a) - m.v_d.get(y, x, b)) / du);
                        break 'outer;
                    }
                }
            }
        }
    }
    let Some(rho) = rho else {
        return Err(OptimizerError::PreconditionViolated(
            "insider utility is action-constant; the scale is undetermined".into(),
        ));
    };
    if rho >= R::zero() {
        return Err(OptimizerError::PreconditionViolated(format!(
            "requires a negative dependence scale, found {rho}"
        )));
    }
    for y in 0..j {
        for x in 0..i {
            let shift = m.v_d.get(y, x, 0) - rho * m.v_u.get(y, x, 0);
            for a in 0..k {
                let want = rho * m.v_u.get(y, x, a) + shift;
                if (m.v_d.get(y, x, a) - want).abs() > tol {
                    return Err(OptimizerError::PreconditionViolated(
                        "utilities are not linearly dependent".into(),
                    ));
                }
            }
        }
    }

    let mins: Vec<Vec<usize>> = (0..j)
        .map(|y| {
            (0..i)
                .map(|x| {
                    let d: Vec<R> = (0..k).map(|a| m.v_d.get(y, x, a)).collect();
                    argmin_first(&d)
                })
                .collect()
        })
        .collect();

    let mut v_ip = m.v_d.clone();
    for y in 0..j {
        for x in 0..i {
            for a in 0..k {
                if a == mins[y][x] {
                    continue;
                }
                let cross = (0..i).any(|x2| x2 != x && mins[y][x2] == a);
                if cross {
                    v_ip.set(y, x, a, m.v_d.get(y, x, a) - R::one());
                }
            }
        }
    }
    Ok(v_ip)
}

/// True when the policy satisfies every trust row within tolerance.
pub fn policy_in_ct<R: Real>(view: &InsiderView<R>, pi: &PolicyMatrix<R>) -> bool {
    (0..pi.num_signals()).all(|k| trust_row_holds(view, pi.row(k), k))
}
