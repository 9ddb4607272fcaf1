//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use zetar::belief::PolicyMatrix;
use zetar::geometry::{ct_polytope_vertices, pt_halfspaces, vrep_to_hrep};
use zetar::insider::{belief_threshold, classify_policy_with, InsiderOracle, InsiderView, OracleMode};
use zetar::learner::{
    learn_pt_cube_vertices, learn_pt_polytope_vertices, LearnReport, LearnerConfig, ProbeRecord,
};
use zetar::mat::Matrix;
use zetar::metrics::{report_with, MetricContext, MetricReport};
use zetar::optimizer::{
    maximize_over_system, solve as run_solver, solve_optimal_acel, zero_info_policy, Lorc,
    PolicyConstraintSystem, SolverConfig,
};
use zetar::scenario::{
    build_case_study, validate_scenario, CaseStudyParams, ComplianceAttitude, RiskPerception,
    ScenarioModel,
};
use zetar::schema::{CaseStudyFile, PolytopeFile, ScenarioFile, SchemaError, SolveResultFile};

use crate::manifest::OutputSink;
use crate::Failure;

type Model = ScenarioModel<f64>;

fn read_scenario(path: &Path) -> Result<(Model, ScenarioFile), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text).map_err(|e| Failure::Input(e.to_string()))?;
    let model = file.to_model().map_err(|e| match e {
        SchemaError::Invalid(v) => Failure::Domain(v.join("\n")),
        other => Failure::Input(other.to_string()),
    })?;
    Ok((model, file))
}

pub fn validate(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text).map_err(|e| Failure::Input(e.to_string()))?;
    match file.to_model() {
        Ok(model) => {
            // to_model validates; re-run for the report.
            let violations = validate_scenario(&model);
            if violations.is_empty() {
                println!("ok: scenario is valid ({} states, {} audits, {} actions)",
                    model.num_states(), model.num_audits(), model.num_actions());
                Ok(())
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
                Err(Failure::Domain(format!("{} violation(s)", violations.len())))
            }
        }
        Err(SchemaError::Invalid(violations)) => {
            for v in &violations {
                println!("violation: {v}");
            }
            Err(Failure::Domain(format!("{} violation(s)", violations.len())))
        }
        Err(SchemaError::Scenario(e)) => {
            println!("violation: {e}");
            Err(Failure::Domain(e.to_string()))
        }
        Err(other) => Err(Failure::Input(other.to_string())),
    }
}

fn parse_eta(text: &str) -> Result<Lorc<f64>, Failure> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
        return Ok(Lorc::Infinite);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Failure::Input(format!("not a customization level: {text}")))?;
    if v > 0.0 && v.is_finite() {
        Ok(Lorc::Finite(v))
    } else {
        Err(Failure::Input(format!(
            "customization level must be positive and finite, got {v}"
        )))
    }
}

fn parse_default_policy(
    spec: &str,
    num_signals: usize,
    num_audits: usize,
) -> Result<Option<PolicyMatrix<f64>>, Failure> {
    if spec.eq_ignore_ascii_case("uniform") {
        return Ok(None);
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| Failure::Input(format!("cannot read default policy {spec}: {e}")))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("default policy must be a row array: {e}")))?;
    if rows.len() != num_signals || rows.iter().any(|r| r.len() != num_audits) {
        return Err(Failure::Input(format!(
            "default policy must be {num_signals} x {num_audits}"
        )));
    }
    PolicyMatrix::from_rows(rows)
        .map(Some)
        .map_err(|e| Failure::Input(format!("default policy invalid: {e}")))
}

pub fn solve_cmd_config(eta: &str) -> Result<SolverConfig<f64>, Failure> {
    Ok(match parse_eta(eta)? {
        Lorc::Infinite => SolverConfig::infinite(),
        Lorc::Finite(v) => SolverConfig::finite(v),
    })
}

pub fn solve(path: &Path, eta: &str, default_policy: &str, out: &Path) -> Result<(), Failure> {
    let (model, _) = read_scenario(path)?;
    let mut cfg = solve_cmd_config(eta)?;
    if let Some(pi_d) = parse_default_policy(default_policy, model.num_actions(), model.num_audits())? {
        cfg = cfg.with_default_policy(pi_d);
    }
    let result = run_solver(&model, &cfg).map_err(|e| Failure::Numerical(e.to_string()))?;
    let result = &result;

    let mut sink = OutputSink::new(out)?;
    sink.write(
        "solve_result.json",
        &serde_json::to_string_pretty(&SolveResultFile::from_result(result)).unwrap(),
    )?;
    sink.write(
        "metrics.csv",
        &format!(
            "{}\n{}\n",
            MetricReport::<f64>::CSV_HEADER,
            result.metrics.csv_row()
        ),
    )?;
    sink.write(
        "solve_summary.csv",
        &format!(
            "value,acel,isel,asal,isal,duality_gap,iterations,converged\n{},{},{},{},{},{},{},{}\n",
            result.value,
            result.metrics.acel,
            result.metrics.isel,
            result.metrics.asal,
            result.metrics.isal,
            result.diagnostics.duality_gap,
            result.diagnostics.iterations,
            result.diagnostics.converged,
        ),
    )?;
    let mut config = BTreeMap::new();
    config.insert("eta".to_string(), eta.to_string());
    config.insert("default_policy".to_string(), default_policy.to_string());
    sink.finish("solve", &path.display().to_string(), config, 0)?;

    println!("r_eta = {}", result.value);
    println!("acel = {}", result.metrics.acel);
    println!("isel = {}", result.metrics.isel);
    println!("asal = {}", result.metrics.asal);
    if !result.diagnostics.converged {
        println!("warning: solver flagged non-convergence (gap {})",
            result.diagnostics.duality_gap);
    }
    Ok(())
}

fn parse_mode(text: &str) -> Result<OracleMode, Failure> {
    match text {
        "direct" => Ok(OracleMode::Direct),
        "episodic" => Ok(OracleMode::Episodic),
        other => Err(Failure::Input(format!("unknown oracle mode: {other}"))),
    }
}

/// Policy-square image of a probed row point: row 0 of the completed policy.
fn policy_square_point(signal: usize, point: &[f64]) -> Vec<f64> {
    if signal == 0 {
        point.to_vec()
    } else {
        point.iter().map(|v| 1.0 - v).collect()
    }
}

fn transcript_csv(records: &[ProbeRecord], two_by_two: bool) -> String {
    let mut out = String::new();
    if two_by_two {
        out.push_str("signal,step,point,psq_p1,psq_p2,trusted,lb,ub,edge_coord\n");
    } else {
        out.push_str(ProbeRecord::CSV_HEADER);
        out.push('\n');
    }
    for r in records {
        if two_by_two {
            let psq = policy_square_point(r.signal, &r.point);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.signal,
                r.step,
                r.point
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                psq[0],
                psq[1],
                r.trusted,
                r.lb,
                r.ub,
                r.edge_coord.map_or(String::new(), |c| c.to_string())
            ));
        } else {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
    }
    out
}

struct LearnOutcome {
    report: LearnReport<f64>,
    system: PolicyConstraintSystem<f64>,
    oracle_log: Vec<zetar::insider::OracleLogEntry>,
}

/// Runs the per-signal learning loop, returning partial results alongside
/// the error when a budget blows.
fn run_learner(
    model: &Model,
    epsilon: f64,
    mode: OracleMode,
    seed: u64,
) -> Result<LearnOutcome, (LearnReport<f64>, Failure)> {
    let empty_report = || LearnReport {
        cube_vertices: Vec::new(),
        polytopes: Vec::new(),
        halfspaces: Vec::new(),
        query_counts: Vec::new(),
        budget_ok: true,
        transcript: Vec::new(),
    };
    let cfg = match LearnerConfig::new(epsilon) {
        Ok(c) => c,
        Err(e) => return Err((empty_report(), Failure::Input(e.to_string()))),
    };
    let mut oracle = InsiderOracle::new(model.clone(), mode, seed);
    let mut report = empty_report();
    let num_signals = model.num_actions();
    let num_audits = model.num_audits();

    for k in 0..num_signals {
        let step = learn_pt_cube_vertices(&mut oracle, k, &cfg)
            .and_then(|(cube, q1, t1)| {
                let (vrep, q2, t2) = learn_pt_polytope_vertices(&mut oracle, k, &cube, &cfg)?;
                let hrep = vrep_to_hrep(&vrep)?;
                Ok((cube, vrep, hrep, q1 + q2, t1, t2))
            });
        match step {
            Ok((cube, vrep, hrep, queries, t1, t2)) => {
                report.cube_vertices.push(cube);
                report.polytopes.push(vrep);
                report.halfspaces.push(hrep);
                report.query_counts.push(queries);
                report.transcript.extend(t1);
                report.transcript.extend(t2);
            }
            Err(e) => {
                return Err((report, Failure::Numerical(e.to_string())));
            }
        }
    }

    let mut inequalities = Vec::new();
    for (k, hrep) in report.halfspaces.iter().enumerate() {
        for (normal, offset) in hrep
            .inequalities
            .iter()
            .map(|(n, o)| (n.clone(), *o))
            .chain(hrep.equalities.iter().flat_map(|(n, o)| {
                [
                    (n.clone(), *o),
                    (n.iter().map(|v| -v).collect::<Vec<_>>(), -o),
                ]
            }))
        {
            let relax: f64 = epsilon * normal.iter().map(|v| v.abs()).sum::<f64>();
            let mut coeffs = vec![0.0; num_signals * num_audits];
            for (x, n) in normal.iter().enumerate() {
                coeffs[k * num_audits + x] = *n;
            }
            inequalities.push(zetar::optimizer::PolicyInequality {
                pair: None,
                coeffs,
                rhs: offset - relax,
            });
        }
    }
    let system = PolicyConstraintSystem {
        num_signals,
        num_audits,
        inequalities,
        pinned_zero: Vec::new(),
    };
    Ok(LearnOutcome {
        report,
        system,
        oracle_log: oracle.transcript.clone(),
    })
}

fn write_learn_outputs(
    sink: &mut OutputSink,
    model: &Model,
    report: &LearnReport<f64>,
) -> Result<(), Failure> {
    let two_by_two = model.num_actions() == 2 && model.num_audits() == 2;
    sink.write("transcript.csv", &transcript_csv(&report.transcript, two_by_two))?;
    let polys: Vec<PolytopeFile> = report
        .polytopes
        .iter()
        .zip(report.halfspaces.iter())
        .map(|(v, h)| PolytopeFile::new(v, h))
        .collect();
    sink.write(
        "learned_regions.json",
        &serde_json::to_string_pretty(&polys).unwrap(),
    )?;
    Ok(())
}

pub fn learn(path: &Path, epsilon: f64, mode: &str, seed: u64, out: &Path) -> Result<(), Failure> {
    let (model, _) = read_scenario(path)?;
    let mode = parse_mode(mode)?;
    let mut sink = OutputSink::new(out)?;

    let outcome = match run_learner(&model, epsilon, mode, seed) {
        Ok(outcome) => outcome,
        Err((partial, failure)) => {
            write_learn_outputs(&mut sink, &model, &partial)?;
            let mut config = BTreeMap::new();
            config.insert("epsilon".into(), epsilon.to_string());
            config.insert("partial".into(), "true".into());
            sink.finish("learn", &path.display().to_string(), config, seed)?;
            return Err(failure);
        }
    };
    write_learn_outputs(&mut sink, &model, &outcome.report)?;
    let mut log_csv = String::from(zetar::insider::OracleLogEntry::CSV_HEADER);
    log_csv.push('\n');
    for entry in &outcome.oracle_log {
        log_csv.push_str(&entry.csv_row());
        log_csv.push('\n');
    }
    sink.write("oracle_log.csv", &log_csv)?;

    // Solve on the learned constraints and compare with the analytic
    // pipeline (the scenario file carries the insider's utilities).
    let ctx = MetricContext::new(&model);
    let objective = Matrix::from_fn(model.num_actions(), model.num_audits(), |k, x| {
        ctx.view.prior.marg_x[x] * ctx.bar_d.get(x, k)
    });
    let (learned_policy, learned_value, _) =
        maximize_over_system(&outcome.system, &objective)
            .map_err(|e| Failure::Numerical(e.to_string()))?;
    let analytic = solve_optimal_acel(&model).map_err(|e| Failure::Numerical(e.to_string()))?;
    let learned_acel = learned_value - analytic.metrics.isel;
    let gap = (learned_acel - analytic.metrics.acel).abs();

    #[derive(serde::Serialize)]
    struct LearnSummary {
        query_counts: Vec<usize>,
        budget_ok: bool,
        learned_policy: Vec<Vec<f64>>,
        learned_acel: f64,
        analytic_acel: f64,
        gap: f64,
    }
    sink.write(
        "learn_report.json",
        &serde_json::to_string_pretty(&LearnSummary {
            query_counts: outcome.report.query_counts.clone(),
            budget_ok: outcome.report.budget_ok,
            learned_policy: learned_policy.matrix().to_nested_f64(),
            learned_acel,
            analytic_acel: analytic.metrics.acel,
            gap,
        })
        .unwrap(),
    )?;

    let mut config = BTreeMap::new();
    config.insert("epsilon".into(), epsilon.to_string());
    config.insert(
        "mode".into(),
        match mode {
            OracleMode::Direct => "direct".to_string(),
            OracleMode::Episodic => "episodic".to_string(),
        },
    );
    sink.finish("learn", &path.display().to_string(), config, seed)?;

    println!("queries = {:?}", outcome.report.query_counts);
    println!("learned_acel = {learned_acel}");
    println!("analytic_acel = {}", analytic.metrics.acel);
    println!("gap = {gap}");
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Failure::Input(format!(
                "grid must be start:stop:step or a comma list, got {spec}"
            )));
        }
        let parse = |s: &str| -> Result<f64, Failure> {
            s.parse()
                .map_err(|_| Failure::Input(format!("bad grid number: {s}")))
        };
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(Failure::Input("grid step must be positive and stop >= start".into()));
        }
        let count = ((stop - start) / step).round() as usize;
        let mut grid: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
        for g in grid.iter_mut() {
            if (*g - stop).abs() < 1e-12 {
                *g = stop;
            }
        }
        grid.retain(|g| *g <= stop + 1e-12);
        Ok(grid)
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Failure::Input(format!("bad grid number: {s}")))
            })
            .collect()
    }
}

const SWEEP_HEADER: &str =
    "param,value,t_bt,isel,opt_asel,opt_acel,pi_ic_sa,pi_ic_ta,isal,opt_asal";

fn sweep_row(param: &str, value: f64, model: &Model) -> Result<String, Failure> {
    let t_bt = belief_threshold(model).map_err(|e| Failure::Input(e.to_string()))?;
    let r = solve_optimal_acel(model).map_err(|e| Failure::Numerical(e.to_string()))?;
    let ctx = MetricContext::new(model);
    let rep = report_with(&ctx, &r.policy);
    Ok(format!(
        "{param},{value},{t_bt},{},{},{},{},{},{},{}",
        rep.isel,
        r.value,
        rep.acel,
        r.policy.prob(0, 0),
        r.policy.prob(0, 1),
        rep.isal,
        rep.asal,
    ))
}

fn require_two_by_two(model: &Model) -> Result<(), Failure> {
    if model.num_actions() != 2 || model.num_audits() != 2 || model.num_states() != 2 {
        return Err(Failure::Input(
            "sweeps require the binary case-study shape (2 states, 2 audits, 2 actions)".into(),
        ));
    }
    Ok(())
}

fn cell_label(model: &Model, view: &InsiderView<f64>, pi: &PolicyMatrix<f64>) -> String {
    zetar::geometry::cell_of_policy_with(view, pi)
        .iter()
        .map(|c| match c {
            Some(a) => model.action_labels[*a].clone(),
            None => "-".to_string(),
        })
        .collect::<Vec<_>>()
        .join("|")
}

pub fn sweep(path: &Path, param: &str, grid_spec: &str, out: &Path) -> Result<(), Failure> {
    let (model, file) = read_scenario(path)?;
    let grid = parse_grid(grid_spec)?;
    let mut sink = OutputSink::new(out)?;
    let mut csv = String::new();

    match param {
        "prior_hr" => {
            require_two_by_two(&model)?;
            csv.push_str(SWEEP_HEADER);
            csv.push('\n');
            for &b in &grid {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Failure::Input(format!("prior_hr {b} outside [0, 1]")));
                }
                let swept = match &file.case_study {
                    Some(cs) => {
                        build_case_study(&cs.params(), b, cs.psi_sa_hr, cs.psi_sa_lr)
                            .map_err(|e| Failure::Domain(e.to_string()))?
                    }
                    None => {
                        let mut m = model.clone();
                        m.prior_y = vec![b, 1.0 - b];
                        m.checked().map_err(|e| Failure::Domain(e.to_string()))?
                    }
                };
                csv.push_str(&sweep_row(param, b, &swept)?);
                csv.push('\n');
            }
        }
        "c_d_ic" => {
            let Some(cs) = &file.case_study else {
                return Err(Failure::Input(
                    "sweeping c_d_ic requires a scenario with a case_study block".into(),
                ));
            };
            csv.push_str(SWEEP_HEADER);
            csv.push('\n');
            for &c in &grid {
                let mut params = cs.params();
                params.c_d_ic = c;
                let swept = build_case_study(&params, cs.prior_hr, cs.psi_sa_hr, cs.psi_sa_lr)
                    .map_err(|e| Failure::Domain(e.to_string()))?;
                csv.push_str(&sweep_row(param, c, &swept)?);
                csv.push('\n');
            }
        }
        "policy" => {
            require_two_by_two(&model)?;
            let view = InsiderView::new(&model);
            let ctx = MetricContext::new(&model);
            csv.push_str("p1,p2,asal,asel,acel,cell,label\n");
            for &p1 in &grid {
                for &p2 in &grid {
                    let pi = PolicyMatrix::from_rows(vec![
                        vec![p1, p2],
                        vec![1.0 - p1, 1.0 - p2],
                    ])
                    .map_err(|e| Failure::Input(e.to_string()))?;
                    let rep = report_with(&ctx, &pi);
                    csv.push_str(&format!(
                        "{p1},{p2},{},{},{},{},{}\n",
                        rep.asal,
                        rep.asel,
                        rep.acel,
                        cell_label(&model, &view, &pi),
                        classify_policy_with(&view, &pi).label.as_str(),
                    ));
                }
            }
        }
        other => {
            return Err(Failure::Input(format!("unknown sweep parameter: {other}")));
        }
    }

    sink.write("sweep.csv", &csv)?;
    let mut config = BTreeMap::new();
    config.insert("param".into(), param.to_string());
    config.insert("grid".into(), grid_spec.to_string());
    sink.finish("sweep", &path.display().to_string(), config, 0)?;
    println!("sweep rows = {}", grid.len());
    Ok(())
}

/// Frozen reference parameterization of the case-study bundle.
struct ReferenceFamily {
    prior_hr: f64,
    psi_sa_hr: f64,
    psi_sa_lr: f64,
    base: CaseStudyParams<f64>,
}

impl ReferenceFamily {
    fn reference() -> Self {
        ReferenceFamily {
            prior_hr: 0.2,
            psi_sa_hr: 0.8,
            psi_sa_lr: 0.3,
            base: CaseStudyParams::reference(ComplianceAttitude::Neutral),
        }
    }

    fn from_file(cs: &CaseStudyFile) -> Self {
        ReferenceFamily {
            prior_hr: cs.prior_hr,
            psi_sa_hr: cs.psi_sa_hr,
            psi_sa_lr: cs.psi_sa_lr,
            base: cs.params(),
        }
    }

    fn params(&self, attitude: ComplianceAttitude, c_d_ic: f64, risk: RiskPerception<f64>)
        -> CaseStudyParams<f64> {
        let (c_u_hr, c_u_lr) = attitude.intrinsic_penalties();
        CaseStudyParams {
            c_u_hr,
            c_u_lr,
            c_d_ic,
            risk,
            ..self.base
        }
    }

    fn model(
        &self,
        attitude: ComplianceAttitude,
        c_d_ic: f64,
        prior_hr: f64,
        risk: RiskPerception<f64>,
    ) -> Result<Model, Failure> {
        build_case_study(
            &self.params(attitude, c_d_ic, risk),
            prior_hr,
            self.psi_sa_hr,
            self.psi_sa_lr,
        )
        .map_err(|e| Failure::Domain(e.to_string()))
    }
}

pub fn casestudy(params: &str, out: &Path) -> Result<(), Failure> {
    let family = if params.eq_ignore_ascii_case("reference") {
        ReferenceFamily::reference()
    } else {
        let text = fs::read_to_string(params)
            .map_err(|e| Failure::Input(format!("cannot read {params}: {e}")))?;
        let cs: CaseStudyFile = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("parameter file: {e}")))?;
        ReferenceFamily::from_file(&cs)
    };
    let identity = RiskPerception::identity();
    let mut sink = OutputSink::new(out)?;

    // Belief thresholds against the non-compliance penalty, one curve per
    // compliance attitude.
    let mut csv = String::from("attitude,c_d_ic,t_bt\n");
    for attitude in ComplianceAttitude::ALL {
        for c in 0..=20 {
            let m = family.model(attitude, c as f64, family.prior_hr, identity)?;
            let t = belief_threshold(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            csv.push_str(&format!("{},{c},{t}\n", attitude.label()));
        }
    }
    sink.write("threshold_vs_penalty.csv", &csv)?;

    // Distorted risk perception for the neutral insider: loss aversion and
    // diminishing sensitivity curves.
    let mut csv = String::from("gamma_d,gamma_s,c_d_ic,t_bt\n");
    for (gd, gs) in [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (0.5, 1.0)] {
        for c in 0..=20 {
            let m = family.model(
                ComplianceAttitude::Neutral,
                c as f64,
                family.prior_hr,
                RiskPerception::new(gd, gs),
            )?;
            let t = belief_threshold(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            csv.push_str(&format!("{gd},{gs},{c},{t}\n"));
        }
    }
    sink.write("threshold_cpt.csv", &csv)?;

    // Prior sweep at the mid-range penalty where the averse insider is
    // initially non-compliant.
    let sweep_penalty = 4.0;
    let mut csv = String::from("attitude,prior_hr,t_bt,isel,opt_asel,opt_acel,pi_ic_sa,pi_ic_ta,isal,opt_asal\n");
    for attitude in ComplianceAttitude::ALL {
        for step in 0..=100 {
            let b = step as f64 / 100.0;
            let m = family.model(attitude, sweep_penalty, b, identity)?;
            let t = belief_threshold(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            let r = solve_optimal_acel(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            let ctx = MetricContext::new(&m);
            let rep = report_with(&ctx, &r.policy);
            csv.push_str(&format!(
                "{},{b},{t},{},{},{},{},{},{},{}\n",
                attitude.label(),
                rep.isel,
                r.value,
                rep.acel,
                r.policy.prob(0, 0),
                r.policy.prob(0, 1),
                rep.isal,
                rep.asal,
            ));
        }
    }
    sink.write("prior_sweep.csv", &csv)?;

    // Enhancement surfaces over the policy square with cell labels, plus the
    // analytic trust regions.
    for attitude in ComplianceAttitude::ALL {
        let m = family.model(attitude, sweep_penalty, family.prior_hr, identity)?;
        let view = InsiderView::new(&m);
        let ctx = MetricContext::new(&m);
        let mut csv = String::from("p1,p2,acel,cell,label\n");
        for a in 0..=50 {
            for b in 0..=50 {
                let p1 = a as f64 / 50.0;
                let p2 = b as f64 / 50.0;
                let pi = PolicyMatrix::from_rows(vec![
                    vec![p1, p2],
                    vec![1.0 - p1, 1.0 - p2],
                ])
                .unwrap();
                let rep = report_with(&ctx, &pi);
                csv.push_str(&format!(
                    "{p1},{p2},{},{},{}\n",
                    rep.acel,
                    cell_label(&m, &view, &pi),
                    classify_policy_with(&view, &pi).label.as_str(),
                ));
            }
        }
        sink.write(&format!("acel_surface_{}.csv", attitude.label()), &csv)?;

        let mut regions = Vec::new();
        for k in 0..2 {
            let vrep = ct_polytope_vertices(&m, k)
                .map_err(|e| Failure::Numerical(e.to_string()))?;
            let hrep = vrep_to_hrep(&vrep).map_err(|e| Failure::Numerical(e.to_string()))?;
            let _ = pt_halfspaces(&m, k);
            regions.push(PolytopeFile::new(&vrep, &hrep));
        }
        sink.write(
            &format!("regions_{}.json", attitude.label()),
            &serde_json::to_string_pretty(&regions).unwrap(),
        )?;
    }

    // Learner walkthrough at the frozen demonstration penalty: the averse
    // insider's compliant-recommendation search reproduces the midpoint
    // sequence 1/2, 3/4, 5/8 on the policy square's left edge.
    let demo_penalty = 2.0;
    let mut summary = String::from(
        "attitude,queries_ic,queries_co,budget_ok,learned_acel,analytic_acel,gap\n",
    );
    for attitude in [ComplianceAttitude::Seeking, ComplianceAttitude::Averse] {
        let m = family.model(attitude, demo_penalty, family.prior_hr, identity)?;
        let outcome = run_learner(&m, 1e-3, OracleMode::Direct, 0)
            .map_err(|(_, f)| f)?;
        sink.write(
            &format!("walkthrough_transcript_{}.csv", attitude.label()),
            &transcript_csv(&outcome.report.transcript, true),
        )?;
        let polys: Vec<PolytopeFile> = outcome
            .report
            .polytopes
            .iter()
            .zip(outcome.report.halfspaces.iter())
            .map(|(v, h)| PolytopeFile::new(v, h))
            .collect();
        sink.write(
            &format!("walkthrough_regions_{}.json", attitude.label()),
            &serde_json::to_string_pretty(&polys).unwrap(),
        )?;

        let ctx = MetricContext::new(&m);
        let objective = Matrix::from_fn(2, 2, |k, x| {
            ctx.view.prior.marg_x[x] * ctx.bar_d.get(x, k)
        });
        let (_, learned_value, _) = maximize_over_system(&outcome.system, &objective)
            .map_err(|e| Failure::Numerical(e.to_string()))?;
        let analytic = solve_optimal_acel(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
        let learned_acel = learned_value - analytic.metrics.isel;
        summary.push_str(&format!(
            "{},{},{},{},{learned_acel},{},{}\n",
            attitude.label(),
            outcome.report.query_counts[0],
            outcome.report.query_counts[1],
            outcome.report.budget_ok,
            analytic.metrics.acel,
            (learned_acel - analytic.metrics.acel).abs(),
        ));
    }
    sink.write("walkthrough_learning_summary.csv", &summary)?;

    // Scoreboard across penalties at the reference prior.
    let mut csv = String::from("attitude,c_d_ic,t_bt,isel,opt_asel,opt_acel,isal,opt_asal\n");
    for attitude in ComplianceAttitude::ALL {
        for c in [2.0, 4.0, 10.0] {
            let m = family.model(attitude, c, family.prior_hr, identity)?;
            let t = belief_threshold(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            let r = solve_optimal_acel(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            let ctx = MetricContext::new(&m);
            let rep = report_with(&ctx, &r.policy);
            csv.push_str(&format!(
                "{},{c},{t},{},{},{},{},{}\n",
                attitude.label(),
                rep.isel,
                r.value,
                rep.acel,
                rep.isal,
                rep.asal,
            ));
        }
    }
    sink.write("summary.csv", &csv)?;

    // Zero-information check rows double as regression anchors.
    let _ = zero_info_policy(&family.model(
        ComplianceAttitude::Averse,
        sweep_penalty,
        family.prior_hr,
        identity,
    )?);

    let mut config = BTreeMap::new();
    config.insert("params".into(), params.to_string());
    config.insert("sweep_penalty".into(), sweep_penalty.to_string());
    config.insert("demo_penalty".into(), demo_penalty.to_string());
    sink.finish("casestudy", params, config, 0)?;
    println!("case-study bundle written to {}", out.display());
    Ok(())
}
