//! Satisfaction and security levels: ASaL/ISaL, ASeL/ISeL, and the average
//! compliance enhancement level (ACEL).
//!
//! Every metric is an exact expectation enumerated over postures, audits,
//! and signals; nothing here samples.

use crate::belief::PolicyMatrix;
use crate::mat::Matrix;
use crate::scalar::Real;
use crate::scenario::{expected_utility_bar_with, Player, ScenarioModel};
use crate::insider::{induced_action_with, initial_compliance_with, InsiderView};

/// Metric bundle for one (scenario, policy) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport<R> {
    /// Insider's acquired satisfaction level under the policy.
    pub asal: R,
    /// Insider's innate satisfaction level (zero-information policy).
    pub isal: R,
    /// Defender's acquired security level under the policy.
    pub asel: R,
    /// Defender's initial security level (zero-information policy).
    pub isel: R,
    /// `asel - isel`.
    pub acel: R,
}

impl<R: Real> MetricReport<R> {
    pub const CSV_HEADER: &'static str = "asal,isal,asel,isel,acel";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.asal.to_f64_lossy(),
            self.isal.to_f64_lossy(),
            self.asel.to_f64_lossy(),
            self.isel.to_f64_lossy(),
            self.acel.to_f64_lossy()
        )
    }
}

/// Precomputed evaluation context: insider view plus the defender's
/// conditional expected utility.
#[derive(Debug, Clone)]
pub struct MetricContext<R> {
    pub view: InsiderView<R>,
    /// `I x K` conditional expected defender utility.
    pub bar_d: Matrix<R>,
    /// Initial compliance action.
    pub a0: usize,
}

impl<R: Real> MetricContext<R> {
    pub fn new(m: &ScenarioModel<R>) -> Self {
        let view = InsiderView::new(m);
        let bar_d = expected_utility_bar_with(m, Player::Defender, &view.prior);
        let a0 = initial_compliance_with(&view);
        MetricContext { view, bar_d, a0 }
    }

    fn num_audits(&self) -> usize {
        self.view.num_audits()
    }

    pub fn num_actions(&self) -> usize {
        self.view.num_actions()
    }

    /// Induced action per signal; `None` marks unrealizable signals.
    pub fn induced_actions(&self, pi: &PolicyMatrix<R>) -> Vec<Option<usize>> {
        (0..pi.num_signals())
            .map(|s| induced_action_with(&self.view, pi, s))
            .collect()
    }
}

/// Insider's expected utility under the policy, accounting for his best
/// responses: `sum_s b_S(s) E_posterior[v_U(y, x, a*)]`.
pub fn asal<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> R {
    asal_with(&MetricContext::new(m), pi)
}

/// Same as [`asal`] with a precomputed context.
pub fn asal_with<R: Real>(ctx: &MetricContext<R>, pi: &PolicyMatrix<R>) -> R {
    expected_over_signals(ctx, pi, |ctx, x, a| ctx.view.bar_u.get(x, a))
}

/// Innate satisfaction level: the insider's prior expected utility at his
/// initial compliance action.
pub fn isal_with<R: Real>(ctx: &MetricContext<R>) -> R {
    (0..ctx.num_audits())
        .map(|x| ctx.view.prior.marg_x[x] * ctx.view.bar_u.get(x, ctx.a0))
        .sum()
}

/// Defender's expected security objective under the policy, evaluated at the
/// insider's best responses.
pub fn asel<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> R {
    asel_with(&MetricContext::new(m), pi)
}

/// Same as [`asel`] with a precomputed context.
pub fn asel_with<R: Real>(ctx: &MetricContext<R>, pi: &PolicyMatrix<R>) -> R {
    expected_over_signals(ctx, pi, |ctx, x, a| ctx.bar_d.get(x, a))
}

/// Initial security level: the defender's expected objective at the
/// insider's initial compliance action.
pub fn isel_with<R: Real>(ctx: &MetricContext<R>) -> R {
    (0..ctx.num_audits())
        .map(|x| ctx.view.prior.marg_x[x] * ctx.bar_d.get(x, ctx.a0))
        .sum()
}

/// Average compliance enhancement level: `asel(pi) - isel`.
pub fn acel<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> R {
    let ctx = MetricContext::new(m);
    acel_with(&ctx, pi)
}

/// Same as [`acel`] with a precomputed context.
pub fn acel_with<R: Real>(ctx: &MetricContext<R>, pi: &PolicyMatrix<R>) -> R {
    asel_with(ctx, pi) - isel_with(ctx)
}

/// Full metric bundle for one policy.
pub fn report<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> MetricReport<R> {
    report_with(&MetricContext::new(m), pi)
}

/// Same as [`report`] with a precomputed context.
pub fn report_with<R: Real>(ctx: &MetricContext<R>, pi: &PolicyMatrix<R>) -> MetricReport<R> {
    let asal = asal_with(ctx, pi);
    let isal = isal_with(ctx);
    let asel = asel_with(ctx, pi);
    let isel = isel_with(ctx);
    MetricReport {
        asal,
        isal,
        asel,
        isel,
        acel: asel - isel,
    }
}

/// `sum_x b_X(x) sum_s pi(s|x) value(x, a*_{pi,s})`, skipping signals below
/// the probability floor.
fn expected_over_signals<R: Real>(
    ctx: &MetricContext<R>,
    pi: &PolicyMatrix<R>,
    value: impl Fn(&MetricContext<R>, usize, usize) -> R,
) -> R {
    let mut total = R::zero();
    for s in 0..pi.num_signals() {
        let Some(a_star) = induced_action_with(&ctx.view, pi, s) else {
            continue;
        };
        for x in 0..ctx.num_audits() {
            total = total + ctx.view.prior.marg_x[x] * pi.prob(s, x) * value(ctx, x, a_star);
        }
    }
    total
}
