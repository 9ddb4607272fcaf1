//! Learning the trustworthy-policy geometry of an insider with unknown
//! incentives: cube-vertex classification, binary search along cube edges
//! for the region boundary, and assembly of the learned constraint system
//! the optimizer can consume.

use thiserror::Error;

use crate::geometry::{vrep_to_hrep, GeometryError, PolytopeHRep, PolytopeVRep};
use crate::insider::{InsiderError, InsiderOracle, OracleMode};
use crate::optimizer::{PolicyConstraintSystem, PolicyInequality};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("accuracy must lie in (0, 1), got {0}")]
    BadAccuracy(f64),
    #[error("query budget of {0} per recommendation exhausted")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Oracle(#[from] InsiderError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy)]
pub struct LearnerConfig<R> {
    /// Binary-search accuracy: searches stop when the bracket is this small.
    pub epsilon: R,
    /// Cap on oracle queries per recommendation index.
    pub query_cap: usize,
}

impl<R: Real> LearnerConfig<R> {
    pub fn new(epsilon: R) -> Result<Self, LearnerError> {
        if !(epsilon > R::zero() && epsilon < R::one()) {
            return Err(LearnerError::BadAccuracy(epsilon.to_f64_lossy()));
        }
        Ok(LearnerConfig {
            epsilon,
            query_cap: 1_000_000,
        })
    }
}

/// One probe in the learning transcript.
#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub signal: usize,
    pub step: usize,
    /// Point of the signal's row hypercube that was probed.
    pub point: Vec<f64>,
    pub trusted: bool,
    /// Binary-search bracket after the update; the full interval for
    /// cube-vertex probes.
    pub lb: f64,
    pub ub: f64,
    /// Cube coordinate being searched, if this probe is part of an edge
    /// search.
    pub edge_coord: Option<usize>,
}

impl ProbeRecord {
    pub const CSV_HEADER: &'static str = "signal,step,point,trusted,lb,ub,edge_coord";

    pub fn csv_row(&self) -> String {
        let point = self
            .point
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{},{}",
            self.signal,
            self.step,
            point,
            self.trusted,
            self.lb,
            self.ub,
            self.edge_coord.map_or(String::new(), |c| c.to_string()),
        )
    }
}

/// Everything learned about one insider.
#[derive(Debug, Clone)]
pub struct LearnReport<R> {
    /// Per-recommendation trusted cube vertices.
    pub cube_vertices: Vec<Vec<Vec<R>>>,
    /// Per-recommendation learned region vertices.
    pub polytopes: Vec<PolytopeVRep<R>>,
    /// Learned half-space representations (offsets relaxed by the accuracy).
    pub halfspaces: Vec<PolytopeHRep<R>>,
    /// Oracle queries spent per recommendation.
    pub query_counts: Vec<usize>,
    /// Whether every per-recommendation count met the worst-case budget
    /// `2^(I-1) I ceil(log2(1/eps)) + 2^I`.
    pub budget_ok: bool,
    pub transcript: Vec<ProbeRecord>,
}

fn cube_vertex<R: Real>(dim: usize, idx: usize) -> Vec<R> {
    (0..dim)
        .map(|i| {
            if (idx >> i) & 1 == 1 {
                R::one()
            } else {
                R::zero()
            }
        })
        .collect()
}

fn is_origin<R: Real>(p: &[R]) -> bool {
    p.iter().all(|v| *v == R::zero())
}

struct KLearner<'a, R: Real> {
    oracle: &'a mut InsiderOracle<R>,
    k: usize,
    cap: usize,
    queries: usize,
    transcript: Vec<ProbeRecord>,
}

impl<'a, R: Real> KLearner<'a, R> {
    fn probe(
        &mut self,
        point: &[R],
        lb: R,
        ub: R,
        edge_coord: Option<usize>,
    ) -> Result<bool, LearnerError> {
        if self.queries >= self.cap {
            return Err(LearnerError::BudgetExceeded(self.cap));
        }
        self.queries += 1;
        let trusted = self.oracle.query_point(self.k, point)?;
        self.transcript.push(ProbeRecord {
            signal: self.k,
            step: self.transcript.len(),
            point: point.iter().map(|v| v.to_f64_lossy()).collect(),
            trusted,
            lb: lb.to_f64_lossy(),
            ub: ub.to_f64_lossy(),
            edge_coord,
        });
        Ok(trusted)
    }
}

/// Classifies the `2^I` cube vertices of the k-th row hypercube as trusted
/// or not. The all-zeros point never sends the signal; its trust is vacuous
/// and it is included without a query, keeping the region closed.
pub fn learn_pt_cube_vertices<R: Real>(
    oracle: &mut InsiderOracle<R>,
    k: usize,
    cfg: &LearnerConfig<R>,
) -> Result<(Vec<Vec<R>>, usize, Vec<ProbeRecord>), LearnerError> {
    let dim = oracle.num_audits();
    let mut state = KLearner {
        oracle,
        k,
        cap: cfg.query_cap,
        queries: 0,
        transcript: Vec::new(),
    };
    let mut trusted_vertices = Vec::new();
    for idx in 0..(1usize << dim) {
        let v = cube_vertex::<R>(dim, idx);
        if is_origin(&v) {
            trusted_vertices.push(v);
            continue;
        }
        if state.probe(&v, R::zero(), R::one(), None)? {
            trusted_vertices.push(v);
        }
    }
    Ok((trusted_vertices, state.queries, state.transcript))
}

/// Binary-searches every cube edge from a trusted vertex to an untrusted
/// neighbor, emitting the boundary crossing at the final bracket midpoint.
/// Every emitted coordinate is within the accuracy of the true crossing.
pub fn learn_pt_polytope_vertices<R: Real>(
    oracle: &mut InsiderOracle<R>,
    k: usize,
    cube_pt: &[Vec<R>],
    cfg: &LearnerConfig<R>,
) -> Result<(PolytopeVRep<R>, usize, Vec<ProbeRecord>), LearnerError> {
    let dim = oracle.num_audits();
    let half = R::from_f64_lit(0.5);
    let mut state = KLearner {
        oracle,
        k,
        cap: cfg.query_cap,
        queries: 0,
        transcript: Vec::new(),
    };
    let is_pt = |p: &[R]| {
        cube_pt.iter().any(|q| {
            q.iter()
                .zip(p.iter())
                .all(|(a, b)| (*a - *b).abs() < R::from_f64_lit(0.5))
        })
    };

    let mut vertices: Vec<Vec<R>> = cube_pt.to_vec();
    for vertex in cube_pt {
        for coord in 0..dim {
            let mut neighbor = vertex.clone();
            neighbor[coord] = R::one() - neighbor[coord];
            if is_pt(&neighbor) {
                continue;
            }
            let start_at_zero = vertex[coord] == R::zero();
            let mut lb = R::zero();
            let mut ub = R::one();
            while ub - lb > cfg.epsilon {
                let mid = (lb + ub) * half;
                let mut point = vertex.clone();
                point[coord] = mid;
                let trusted = state.probe(&point, lb, ub, Some(coord))?;
                // The trusted side sits at the vertex's own coordinate value:
                // a trusted probe moves the bracket edge nearer the neighbor.
                if start_at_zero {
                    if trusted {
                        lb = mid;
                    } else {
                        ub = mid;
                    }
                } else if trusted {
                    ub = mid;
                } else {
                    lb = mid;
                }
                if let Some(last) = state.transcript.last_mut() {
                    last.lb = lb.to_f64_lossy();
                    last.ub = ub.to_f64_lossy();
                }
            }
            let mut crossing = vertex.clone();
            crossing[coord] = (lb + ub) * half;
            vertices.push(crossing);
        }
    }
    Ok((
        PolytopeVRep::new(dim, vertices),
        state.queries,
        state.transcript,
    ))
}

/// Learns every recommendation's trusted region independently (policy
/// separability), converts each to half-spaces, and assembles the constraint
/// system for the optimizer. Learned offsets are relaxed by the accuracy so
/// the true trusted set stays inside the learned one.
pub fn learn_ct_set<R: Real>(
    oracle: &mut InsiderOracle<R>,
    cfg: &LearnerConfig<R>,
) -> Result<(LearnReport<R>, PolicyConstraintSystem<R>), LearnerError> {
    let num_signals = oracle.num_actions();
    let num_audits = oracle.num_audits();

    let mut cube_vertices = Vec::with_capacity(num_signals);
    let mut polytopes = Vec::with_capacity(num_signals);
    let mut halfspaces = Vec::with_capacity(num_signals);
    let mut query_counts = Vec::with_capacity(num_signals);
    let mut transcript = Vec::new();

    for k in 0..num_signals {
        let (cube, q1, t1) = learn_pt_cube_vertices(oracle, k, cfg)?;
        let (vrep, q2, t2) = learn_pt_polytope_vertices(oracle, k, &cube, cfg)?;
        let hrep = vrep_to_hrep(&vrep)?;
        cube_vertices.push(cube);
        polytopes.push(vrep);
        halfspaces.push(hrep);
        query_counts.push(q1 + q2);
        transcript.extend(t1);
        transcript.extend(t2);
    }

    let budget_ok = match oracle.mode() {
        OracleMode::Direct => {
            let per_edge = (R::one() / cfg.epsilon)
                .log2()
                .ceil()
                .to_f64_lossy() as usize;
            let bound =
                (1usize << (num_audits - 1)) * num_audits * per_edge + (1usize << num_audits);
            query_counts.iter().all(|q| *q <= bound)
        }
        OracleMode::Episodic => true,
    };

    let mut inequalities = Vec::new();
    for (k, hrep) in halfspaces.iter().enumerate() {
        let relax = |normal: &[R]| -> R {
            cfg.epsilon * normal.iter().map(|v| v.abs()).sum::<R>()
        };
        for (normal, offset) in &hrep.inequalities {
            let mut coeffs = vec![R::zero(); num_signals * num_audits];
            for (x, n) in normal.iter().enumerate() {
                coeffs[k * num_audits + x] = *n;
            }
            inequalities.push(PolicyInequality {
                pair: None,
                coeffs,
                rhs: *offset - relax(normal),
            });
        }
        for (normal, offset) in &hrep.equalities {
            for sign in [R::one(), -R::one()] {
                let mut coeffs = vec![R::zero(); num_signals * num_audits];
                for (x, n) in normal.iter().enumerate() {
                    coeffs[k * num_audits + x] = sign * *n;
                }
                inequalities.push(PolicyInequality {
                    pair: None,
                    coeffs,
                    rhs: sign * *offset - relax(normal),
                });
            }
        }
    }

    let system = PolicyConstraintSystem {
        num_signals,
        num_audits,
        inequalities,
        pinned_zero: Vec::new(),
    };
    let report = LearnReport {
        cube_vertices,
        polytopes,
        halfspaces,
        query_counts,
        budget_ok,
        transcript,
    };
    Ok((report, system))
}
