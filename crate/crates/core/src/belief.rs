//! Posterior beliefs induced by a recommendation policy and a realized
//! signal, plus the policy-matrix type itself.

use thiserror::Error;

use crate::mat::Matrix;
use crate::scalar::Real;
use crate::scenario::{joint_prior, prob_tol, JointPrior, ScenarioModel};

/// Signals with marginal probability below this are treated as
/// zero-probability: posteriors error out and expectations skip them. Keeps
/// the Bayes quotient away from catastrophic cancellation.
pub const SIGNAL_FLOOR: f64 = 1e-14;

/// A recommendation policy in matrix form: entry `(k, i)` is the probability
/// of recommending action `k` when audit scheme `i` was chosen. Columns are
/// distributions over signals.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMatrix<R> {
    pi: Matrix<R>,
}

#[derive(Debug, Error)]
pub enum BeliefError {
    #[error("policy column {col} sums to {sum}, expected 1")]
    ColumnNotStochastic { col: usize, sum: f64 },
    #[error("policy entry ({row}, {col}) = {value} outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("signal {signal} has zero probability under this policy")]
    ZeroProbabilitySignal { signal: usize },
}

impl<R: Real> PolicyMatrix<R> {
    /// Validates entries and column sums (tolerance 1e-10).
    pub fn new(pi: Matrix<R>) -> Result<Self, BeliefError> {
        let col_tol = {
            let floor = R::from_f64_lit(1e-10);
            let eps = R::epsilon() * R::from_f64_lit(1e4);
            if eps > floor {
                eps
            } else {
                floor
            }
        };
        let margin = prob_tol::<R>();
        for k in 0..pi.rows() {
            for i in 0..pi.cols() {
                let v = pi.get(k, i);
                if !v.is_finite() || v < -margin || v > R::one() + margin {
                    return Err(BeliefError::EntryOutOfRange {
                        row: k,
                        col: i,
                        value: v.to_f64_lossy(),
                    });
                }
            }
        }
        for i in 0..pi.cols() {
            let s = pi.col_sum(i);
            if (s - R::one()).abs() > col_tol {
                return Err(BeliefError::ColumnNotStochastic {
                    col: i,
                    sum: s.to_f64_lossy(),
                });
            }
        }
        Ok(PolicyMatrix { pi })
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self, BeliefError> {
        Self::new(Matrix::from_rows(rows))
    }

    /// Uniform policy: every signal equally likely at every audit scheme.
    pub fn uniform(num_signals: usize, num_audits: usize) -> Self {
        let w = R::one() / R::from_usize(num_signals).unwrap();
        PolicyMatrix {
            pi: Matrix::from_fn(num_signals, num_audits, |_, _| w),
        }
    }

    /// Deterministic policy recommending `signal_for[i]` at audit scheme `i`.
    pub fn deterministic(num_signals: usize, signal_for: &[usize]) -> Self {
        PolicyMatrix {
            pi: Matrix::from_fn(num_signals, signal_for.len(), |k, i| {
                if signal_for[i] == k {
                    R::one()
                } else {
                    R::zero()
                }
            }),
        }
    }

    pub fn num_signals(&self) -> usize {
        self.pi.rows()
    }

    pub fn num_audits(&self) -> usize {
        self.pi.cols()
    }

    /// `pi(s^k | x^i)`.
    pub fn prob(&self, k: usize, i: usize) -> R {
        self.pi.get(k, i)
    }

    /// The k-th row as a point of the audit hypercube.
    pub fn row(&self, k: usize) -> &[R] {
        self.pi.row(k)
    }

    pub fn matrix(&self) -> &Matrix<R> {
        &self.pi
    }

    /// Convex combination of two policies; stays column-stochastic.
    pub fn blend(&self, other: &PolicyMatrix<R>, weight_self: R) -> PolicyMatrix<R> {
        let w = weight_self;
        PolicyMatrix {
            pi: Matrix::from_fn(self.pi.rows(), self.pi.cols(), |k, i| {
                w * self.pi.get(k, i) + (R::one() - w) * other.pi.get(k, i)
            }),
        }
    }

    pub fn max_abs_diff(&self, other: &PolicyMatrix<R>) -> R {
        let mut worst = R::zero();
        for k in 0..self.pi.rows() {
            for i in 0..self.pi.cols() {
                let d = (self.pi.get(k, i) - other.pi.get(k, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// All belief objects induced by a policy and one realized signal.
#[derive(Debug, Clone)]
pub struct Posterior<R> {
    /// `J x I` joint posterior over (posture, audit scheme).
    pub joint: Matrix<R>,
    /// Length-`I` marginal over audit schemes.
    pub marg_x: Vec<R>,
    /// Length-`J` marginal over postures.
    pub marg_y: Vec<R>,
    /// `J x I` conditional posture-given-audit beliefs. Columns without
    /// posterior mass fall back to the prior conditional, the limit forced
    /// by the invariance of conditional beliefs.
    pub cond_y_given_x: Matrix<R>,
    /// Marginal probability of the realized signal.
    pub signal_prob: R,
}

/// Signal marginal `b^pi_S(s) = sum_x b_X(x) pi(s|x)`.
pub fn signal_marginal<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> Vec<R> {
    signal_marginal_with(&joint_prior(m), pi)
}

/// Same as [`signal_marginal`] but reuses a precomputed joint prior.
pub fn signal_marginal_with<R: Real>(prior: &JointPrior<R>, pi: &PolicyMatrix<R>) -> Vec<R> {
    (0..pi.num_signals())
        .map(|k| {
            (0..pi.num_audits())
                .map(|x| prior.marg_x[x] * pi.prob(k, x))
                .sum()
        })
        .collect()
}

/// Bayes update after observing signal `s` under policy `pi`.
pub fn posterior<R: Real>(
    m: &ScenarioModel<R>,
    pi: &PolicyMatrix<R>,
    s: usize,
) -> Result<Posterior<R>, BeliefError> {
    posterior_with(&joint_prior(m), pi, s)
}

/// Same as [`posterior`] but reuses a precomputed joint prior.
pub fn posterior_with<R: Real>(
    prior: &JointPrior<R>,
    pi: &PolicyMatrix<R>,
    s: usize,
) -> Result<Posterior<R>, BeliefError> {
    let (j, i) = (prior.joint.rows(), prior.joint.cols());
    let signal_prob: R = (0..i).map(|x| prior.marg_x[x] * pi.prob(s, x)).sum();
    if signal_prob < R::from_f64_lit(SIGNAL_FLOOR) {
        return Err(BeliefError::ZeroProbabilitySignal { signal: s });
    }

    let joint = Matrix::from_fn(j, i, |y, x| prior.joint.get(y, x) * pi.prob(s, x) / signal_prob);
    let marg_x: Vec<R> = (0..i).map(|x| joint.col_sum(x)).collect();
    let marg_y: Vec<R> = (0..j).map(|y| joint.row_sum(y)).collect();
    let cond_y_given_x = Matrix::from_fn(j, i, |y, x| {
        if marg_x[x] > R::zero() {
            joint.get(y, x) / marg_x[x]
        } else {
            prior.cond_y_given_x.get(y, x)
        }
    });

    Ok(Posterior {
        joint,
        marg_x,
        marg_y,
        cond_y_given_x,
        signal_prob,
    })
}
