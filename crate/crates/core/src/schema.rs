//! Strict JSON schemas for scenario files and solver outputs.
//!
//! A scenario file either spells out the full model (labels, prior, audit
//! policy, utility tensors) or carries a `case_study` block with the binary
//! audit parameters; unknown fields are rejected in both forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat::{Matrix, Tensor3};
use crate::optimizer::SolveResult;
use crate::scalar::Real;
use crate::scenario::{
    build_case_study, validate_scenario, CaseStudyParams, RiskPerception, ScenarioModel,
    ScenarioError,
};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario file: {0}")]
    Structure(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario violates invariants: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// On-disk scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub as_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_policy: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_u: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_d: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_study: Option<CaseStudyFile>,
}

/// Case-study block: binary audit game parameters plus its probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudyFile {
    pub c_u_co: f64,
    pub r_d_co: f64,
    pub c_d_ic: f64,
    pub c_u_hr: f64,
    pub c_u_lr: f64,
    pub c_d_ca: f64,
    pub r_d_ca: f64,
    pub c_d_hr: f64,
    pub c_d_lr: f64,
    pub r_d_sa: f64,
    #[serde(default = "one")]
    pub gamma_d: f64,
    #[serde(default = "one")]
    pub gamma_s: f64,
    pub prior_hr: f64,
    pub psi_sa_hr: f64,
    pub psi_sa_lr: f64,
}

fn one() -> f64 {
    1.0
}

impl CaseStudyFile {
    pub fn params(&self) -> CaseStudyParams<f64> {
        CaseStudyParams {
            c_u_co: self.c_u_co,
            r_d_co: self.r_d_co,
            c_d_ic: self.c_d_ic,
            c_u_hr: self.c_u_hr,
            c_u_lr: self.c_u_lr,
            c_d_ca: self.c_d_ca,
            r_d_ca: self.r_d_ca,
            c_d_hr: self.c_d_hr,
            c_d_lr: self.c_d_lr,
            r_d_sa: self.r_d_sa,
            risk: RiskPerception::new(self.gamma_d, self.gamma_s),
        }
    }

    pub fn from_params(p: &CaseStudyParams<f64>, prior_hr: f64, psi_sa_hr: f64, psi_sa_lr: f64) -> Self {
        CaseStudyFile {
            c_u_co: p.c_u_co,
            r_d_co: p.r_d_co,
            c_d_ic: p.c_d_ic,
            c_u_hr: p.c_u_hr,
            c_u_lr: p.c_u_lr,
            c_d_ca: p.c_d_ca,
            r_d_ca: p.r_d_ca,
            c_d_hr: p.c_d_hr,
            c_d_lr: p.c_d_lr,
            r_d_sa: p.r_d_sa,
            gamma_d: p.risk.gamma_d,
            gamma_s: p.risk.gamma_s,
            prior_hr,
            psi_sa_hr,
            psi_sa_lr,
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds and validates the model this file describes.
    pub fn to_model(&self) -> Result<ScenarioModel<f64>, SchemaError> {
        if let Some(cs) = &self.case_study {
            if self.v_u.is_some() || self.v_d.is_some() || self.prior_y.is_some() {
                return Err(SchemaError::Structure(
                    "a case_study block replaces the explicit model fields; remove one".into(),
                ));
            }
            return Ok(build_case_study(
                &cs.params(),
                cs.prior_hr,
                cs.psi_sa_hr,
                cs.psi_sa_lr,
            )?);
        }
        let missing = |what: &str| SchemaError::Structure(format!("missing field: {what}"));
        let prior_y = self.prior_y.clone().ok_or_else(|| missing("prior_y"))?;
        let audit = self
            .audit_policy
            .clone()
            .ok_or_else(|| missing("audit_policy"))?;
        let v_u = self.v_u.clone().ok_or_else(|| missing("v_u"))?;
        let v_d = self.v_d.clone().ok_or_else(|| missing("v_d"))?;
        let j = prior_y.len();
        let i = audit.first().map_or(0, Vec::len);
        let k = v_u
            .first()
            .and_then(|m| m.first())
            .map_or(0, Vec::len);
        if audit.iter().any(|row| row.len() != i) {
            return Err(SchemaError::Structure("ragged audit_policy rows".into()));
        }
        for (name, t) in [("v_u", &v_u), ("v_d", &v_d)] {
            if t.len() != j || t.iter().any(|m| m.len() != i || m.iter().any(|r| r.len() != k)) {
                return Err(SchemaError::Structure(format!(
                    "{name} must be a {j} x {i} x {k} tensor"
                )));
            }
        }
        let model = ScenarioModel {
            sp_labels: self
                .sp_labels
                .clone()
                .unwrap_or_else(|| (0..j).map(|n| format!("y{}", n + 1)).collect()),
            as_labels: self
                .as_labels
                .clone()
                .unwrap_or_else(|| (0..i).map(|n| format!("x{}", n + 1)).collect()),
            action_labels: self
                .action_labels
                .clone()
                .unwrap_or_else(|| (0..k).map(|n| format!("a{}", n + 1)).collect()),
            prior_y,
            audit_policy: Matrix::from_rows(audit),
            v_u: Tensor3::from_nested(v_u),
            v_d: Tensor3::from_nested(v_d),
        };
        let violations = validate_scenario(&model);
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(SchemaError::Invalid(violations))
        }
    }

    pub fn from_model(m: &ScenarioModel<f64>) -> Self {
        ScenarioFile {
            sp_labels: Some(m.sp_labels.clone()),
            as_labels: Some(m.as_labels.clone()),
            action_labels: Some(m.action_labels.clone()),
            prior_y: Some(m.prior_y.clone()),
            audit_policy: Some(m.audit_policy.to_nested_f64()),
            v_u: Some(m.v_u.to_nested_f64()),
            v_d: Some(m.v_d.to_nested_f64()),
            case_study: None,
        }
    }
}

/// Serializable form of a solver result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResultFile {
    pub policy: Vec<Vec<f64>>,
    pub value: f64,
    pub dual_beta: Vec<f64>,
    pub dual_lambda: Vec<Vec<f64>>,
    pub asal: f64,
    pub isal: f64,
    pub asel: f64,
    pub isel: f64,
    pub acel: f64,
    pub iterations: usize,
    pub duality_gap: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_bounds: Option<(f64, f64)>,
    /// Nonnegativity multipliers, zero at the optimum.
    pub alpha: Vec<Vec<f64>>,
}

impl SolveResultFile {
    pub fn from_result<R: Real>(r: &SolveResult<R>) -> Self {
        SolveResultFile {
            policy: r.policy.matrix().to_nested_f64(),
            value: r.value.to_f64_lossy(),
            dual_beta: r.dual_beta.iter().map(|v| v.to_f64_lossy()).collect(),
            dual_lambda: r.dual_lambda.to_nested_f64(),
            asal: r.metrics.asal.to_f64_lossy(),
            isal: r.metrics.isal.to_f64_lossy(),
            asel: r.metrics.asel.to_f64_lossy(),
            isel: r.metrics.isel.to_f64_lossy(),
            acel: r.metrics.acel.to_f64_lossy(),
            iterations: r.diagnostics.iterations,
            duality_gap: r.diagnostics.duality_gap.to_f64_lossy(),
            converged: r.diagnostics.converged,
            value_bounds: r
                .diagnostics
                .bracket
                .map(|(a, b)| (a.to_f64_lossy(), b.to_f64_lossy())),
            alpha: r.diagnostics.alpha.to_nested_f64(),
        }
    }
}

/// Serializable polytope dump: vertices and half-spaces of one region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Rows (normal, offset) meaning `normal . p >= offset`.
    pub inequalities: Vec<(Vec<f64>, f64)>,
    #[serde(default)]
    pub equalities: Vec<(Vec<f64>, f64)>,
}

impl PolytopeFile {
    pub fn new<R: Real>(
        vrep: &crate::geometry::PolytopeVRep<R>,
        hrep: &crate::geometry::PolytopeHRep<R>,
    ) -> Self {
        let conv = |rows: &[(Vec<R>, R)]| {
            rows.iter()
                .map(|(n, o)| {
                    (
                        n.iter().map(|v| v.to_f64_lossy()).collect(),
                        o.to_f64_lossy(),
                    )
                })
                .collect()
        };
        PolytopeFile {
            dim: vrep.dim,
            vertices: vrep
                .vertices
                .iter()
                .map(|p| p.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
            inequalities: conv(&hrep.inequalities),
            equalities: conv(&hrep.equalities),
        }
    }
}
