//! Convex-polytope view of the trust regions: the k-th partially-trustworthy
//! region of the audit hypercube, policy-cell labels, and conversions
//! between vertex and half-space representations.

use thiserror::Error;

use crate::belief::PolicyMatrix;
use crate::insider::{induced_action_with, InsiderView};
use crate::mat::{solve_dense, Matrix};
use crate::scalar::Real;
use crate::scenario::ScenarioModel;

/// Vertices are deduplicated at this tolerance.
pub const VERTEX_DEDUP_TOL: f64 = 1e-7;
/// Half-space membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Largest hypercube dimension the enumeration routines accept.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("need at least one vertex")]
    EmptyVertexSet,
}

/// Vertex representation of a polytope inside the unit hypercube.
#[derive(Debug, Clone)]
pub struct PolytopeVRep<R> {
    pub dim: usize,
    pub vertices: Vec<Vec<R>>,
}

impl<R: Real> PolytopeVRep<R> {
    pub fn new(dim: usize, vertices: Vec<Vec<R>>) -> Self {
        let mut v = PolytopeVRep { dim, vertices };
        v.dedup();
        v
    }

    fn dedup(&mut self) {
        let tol = R::from_f64_lit(VERTEX_DEDUP_TOL);
        let mut kept: Vec<Vec<R>> = Vec::new();
        for cand in self.vertices.drain(..) {
            let dup = kept.iter().any(|p| {
                p.iter()
                    .zip(cand.iter())
                    .all(|(a, b)| (*a - *b).abs() <= tol)
            });
            if !dup {
                kept.push(cand);
            }
        }
        self.vertices = kept;
    }

    /// Coordinate-wise Hausdorff-style distance: the largest over vertices of
    /// the distance to the closest vertex of `other`, symmetrized.
    pub fn vertex_distance(&self, other: &PolytopeVRep<R>) -> R {
        let one_way = |a: &PolytopeVRep<R>, b: &PolytopeVRep<R>| -> R {
            let mut worst = R::zero();
            for p in &a.vertices {
                let mut best = R::infinity();
                for q in &b.vertices {
                    let d = p
                        .iter()
                        .zip(q.iter())
                        .map(|(x, y)| (*x - *y).abs())
                        .fold(R::zero(), R::max);
                    best = best.min(d);
                }
                worst = worst.max(best);
            }
            worst
        };
        one_way(self, other).max(one_way(other, self))
    }
}

/// Half-space representation: inequalities `normal . p >= offset`, plus
/// equality constraints when the polytope is lower-dimensional.
#[derive(Debug, Clone)]
pub struct PolytopeHRep<R> {
    pub dim: usize,
    pub inequalities: Vec<(Vec<R>, R)>,
    pub equalities: Vec<(Vec<R>, R)>,
}

impl<R: Real> PolytopeHRep<R> {
    pub fn contains(&self, p: &[R]) -> bool {
        let tol = R::from_f64_lit(MEMBERSHIP_TOL);
        self.inequalities.iter().all(|(n, off)| {
            let v: R = n.iter().zip(p.iter()).map(|(a, b)| *a * *b).sum();
            v >= *off - tol
        }) && self.equalities.iter().all(|(n, off)| {
            let v: R = n.iter().zip(p.iter()).map(|(a, b)| *a * *b).sum();
            (v - *off).abs() <= tol
        })
    }
}

/// Box constraints of the unit hypercube as half-spaces.
fn box_halfspaces<R: Real>(dim: usize) -> Vec<(Vec<R>, R)> {
    let mut rows = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let mut lo = vec![R::zero(); dim];
        lo[i] = R::one();
        rows.push((lo, R::zero())); // p_i >= 0
        let mut hi = vec![R::zero(); dim];
        hi[i] = -R::one();
        rows.push((hi, -R::one())); // p_i <= 1
    }
    rows
}

/// Half-space representation of the k-th partially-trustworthy region: one
/// homogeneous row per competing action, plus the hypercube box. Membership
/// of a row point here is exactly trustworthiness of recommendation `k`.
pub fn pt_halfspaces<R: Real>(m: &ScenarioModel<R>, k: usize) -> PolytopeHRep<R> {
    pt_halfspaces_with(&InsiderView::new(m), k)
}

pub fn pt_halfspaces_with<R: Real>(view: &InsiderView<R>, k: usize) -> PolytopeHRep<R> {
    let dim = view.num_audits();
    let mut inequalities = Vec::new();
    for l in 0..view.num_actions() {
        if l == k {
            continue;
        }
        let normal: Vec<R> = (0..dim)
            .map(|x| view.vhat_u.get(k, x) - view.vhat_u.get(l, x))
            .collect();
        inequalities.push((normal, R::zero()));
    }
    inequalities.extend(box_halfspaces(dim));
    PolytopeHRep {
        dim,
        inequalities,
        equalities: Vec::new(),
    }
}

/// Induced-action label of a policy: entry `k` is the action recommendation
/// `k` induces, or `None` when the policy never sends it. Completely
/// trustworthy policies map to the identity labeling.
pub fn cell_of_policy<R: Real>(m: &ScenarioModel<R>, pi: &PolicyMatrix<R>) -> Vec<Option<usize>> {
    cell_of_policy_with(&InsiderView::new(m), pi)
}

pub fn cell_of_policy_with<R: Real>(
    view: &InsiderView<R>,
    pi: &PolicyMatrix<R>,
) -> Vec<Option<usize>> {
    (0..pi.num_signals())
        .map(|s| induced_action_with(view, pi, s))
        .collect()
}

/// Exact vertices of the k-th partially-trustworthy region, enumerated from
/// its half-space representation: every choice of `dim` active constraints
/// whose intersection point satisfies all remaining rows.
pub fn ct_polytope_vertices<R: Real>(
    m: &ScenarioModel<R>,
    k: usize,
) -> Result<PolytopeVRep<R>, GeometryError> {
    ct_polytope_vertices_with(&InsiderView::new(m), k)
}

pub fn ct_polytope_vertices_with<R: Real>(
    view: &InsiderView<R>,
    k: usize,
) -> Result<PolytopeVRep<R>, GeometryError> {
    let hrep = pt_halfspaces_with(view, k);
    enumerate_vertices(&hrep)
}

/// Vertex enumeration of a bounded H-polytope (dimension at most
/// [`MAX_DIM`]).
pub fn enumerate_vertices<R: Real>(
    hrep: &PolytopeHRep<R>,
) -> Result<PolytopeVRep<R>, GeometryError> {
    let dim = hrep.dim;
    if dim > MAX_DIM {
        return Err(GeometryError::DimensionTooLarge(dim));
    }
    let rows = &hrep.inequalities;
    let n = rows.len();
    let mut vertices = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    if dim == 0 || n < dim {
        return Ok(PolytopeVRep::new(dim, vertices));
    }
    loop {
        let a = Matrix::from_fn(dim, dim, |r, c| rows[subset[r]].0[c]);
        let b: Vec<R> = subset.iter().map(|r| rows[*r].1).collect();
        if let Some(p) = solve_dense(&a, &b, R::from_f64_lit(1e-11)) {
            if hrep.contains(&p) {
                vertices.push(p);
            }
        }
        // Next combination in lexicographic order.
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(PolytopeVRep::new(dim, vertices));
            }
            i -= 1;
            if subset[i] != i + n - dim {
                subset[i] += 1;
                for j in i + 1..dim {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Facet enumeration: converts vertices to half-spaces. Lower-dimensional
/// hulls come back with the affine-hull equalities filled in and the facets
/// enumerated inside the subspace.
pub fn vrep_to_hrep<R: Real>(vrep: &PolytopeVRep<R>) -> Result<PolytopeHRep<R>, GeometryError> {
    let dim = vrep.dim;
    if dim > MAX_DIM {
        return Err(GeometryError::DimensionTooLarge(dim));
    }
    if vrep.vertices.is_empty() {
        return Err(GeometryError::EmptyVertexSet);
    }
    let rank_tol = R::from_f64_lit(1e-9);
    let base = &vrep.vertices[0];

    // Orthonormal basis of the affine hull by Gram-Schmidt.
    let mut basis: Vec<Vec<R>> = Vec::new();
    for v in &vrep.vertices[1..] {
        let mut d: Vec<R> = v.iter().zip(base.iter()).map(|(a, b)| *a - *b).collect();
        for q in &basis {
            let proj: R = d.iter().zip(q.iter()).map(|(a, b)| *a * *b).sum();
            for (di, qi) in d.iter_mut().zip(q.iter()) {
                *di = *di - proj * *qi;
            }
        }
        let norm: R = d.iter().map(|x| *x * *x).sum::<R>().sqrt();
        if norm > rank_tol {
            for di in d.iter_mut() {
                *di = *di / norm;
            }
            basis.push(d);
        }
    }
    let rank = basis.len();

    if rank == dim {
        return Ok(PolytopeHRep {
            dim,
            inequalities: full_rank_facets(&vrep.vertices, dim),
            equalities: Vec::new(),
        });
    }

    // Lower-dimensional hull: equalities from the orthogonal complement,
    // facets found inside the subspace and lifted back.
    let mut equalities = Vec::new();
    let mut complement: Vec<Vec<R>> = Vec::new();
    for axis in 0..dim {
        let mut d = vec![R::zero(); dim];
        d[axis] = R::one();
        for q in basis.iter().chain(complement.iter()) {
            let proj: R = d.iter().zip(q.iter()).map(|(a, b)| *a * *b).sum();
            for (di, qi) in d.iter_mut().zip(q.iter()) {
                *di = *di - proj * *qi;
            }
        }
        let norm: R = d.iter().map(|x| *x * *x).sum::<R>().sqrt();
        if norm > rank_tol {
            for di in d.iter_mut() {
                *di = *di / norm;
            }
            let offset: R = d.iter().zip(base.iter()).map(|(a, b)| *a * *b).sum();
            equalities.push((d.clone(), offset));
            complement.push(d);
        }
    }

    let mut inequalities = Vec::new();
    if rank > 0 {
        let projected: Vec<Vec<R>> = vrep
            .vertices
            .iter()
            .map(|v| {
                basis
                    .iter()
                    .map(|q| {
                        q.iter()
                            .zip(v.iter().zip(base.iter()))
                            .map(|(qi, (vi, bi))| *qi * (*vi - *bi))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        for (n_sub, off_sub) in full_rank_facets(&projected, rank) {
            let normal: Vec<R> = (0..dim)
                .map(|c| {
                    n_sub
                        .iter()
                        .zip(basis.iter())
                        .map(|(ni, q)| *ni * q[c])
                        .sum()
                })
                .collect();
            let shift: R = normal.iter().zip(base.iter()).map(|(a, b)| *a * *b).sum();
            inequalities.push((normal, off_sub + shift));
        }
    }

    Ok(PolytopeHRep {
        dim,
        inequalities,
        equalities,
    })
}

/// Brute-force facet search for a full-dimensional hull: every size-`dim`
/// vertex subset that spans a hyperplane with all vertices on one side.
fn full_rank_facets<R: Real>(vertices: &[Vec<R>], dim: usize) -> Vec<(Vec<R>, R)> {
    let tol = R::from_f64_lit(MEMBERSHIP_TOL);
    let n = vertices.len();
    let mut facets: Vec<(Vec<R>, R)> = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    if n < dim {
        return facets;
    }
    loop {
        if let Some(normal) = hyperplane_normal(vertices, &subset, dim) {
            let offset: R = normal
                .iter()
                .zip(vertices[subset[0]].iter())
                .map(|(a, b)| *a * *b)
                .sum();
            let side = |v: &[R]| -> R {
                normal
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| *a * *b)
                    .sum::<R>()
                    - offset
            };
            let mut all_ge = true;
            let mut all_le = true;
            for v in vertices {
                let s = side(v);
                if s < -tol {
                    all_ge = false;
                }
                if s > tol {
                    all_le = false;
                }
            }
            let oriented = if all_ge {
                Some((normal.clone(), offset))
            } else if all_le {
                Some((normal.iter().map(|x| -*x).collect(), -offset))
            } else {
                None
            };
            if let Some((n_vec, off)) = oriented {
                let dup = facets.iter().any(|(fn_vec, f_off)| {
                    fn_vec
                        .iter()
                        .zip(n_vec.iter())
                        .all(|(a, b)| (*a - *b).abs() <= R::from_f64_lit(1e-7))
                        && (*f_off - off).abs() <= R::from_f64_lit(1e-7)
                });
                if !dup {
                    facets.push((n_vec, off));
                }
            }
        }
        // Next combination.
        let mut i = dim;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if subset[i] != i + n - dim {
                subset[i] += 1;
                for j in i + 1..dim {
                    subset[j] = subset[j - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            return facets;
        }
    }
}

/// Unit normal of the hyperplane through the chosen vertices, normalized to
/// a canonical sign; `None` when they do not span one.
fn hyperplane_normal<R: Real>(
    vertices: &[Vec<R>],
    subset: &[usize],
    dim: usize,
) -> Option<Vec<R>> {
    if dim == 0 {
        return None;
    }
    let p0 = &vertices[subset[0]];
    // Rows: the dim-1 difference vectors; the normal solves rows . n = 0
    // with a unit-row completion to pin scale.
    for pin_axis in 0..dim {
        let mut a = Matrix::zeros(dim, dim);
        for (r, idx) in subset[1..].iter().enumerate() {
            for c in 0..dim {
                a.set(r, c, vertices[*idx][c] - p0[c]);
            }
        }
        for c in 0..dim {
            a.set(
                dim - 1,
                c,
                if c == pin_axis { R::one() } else { R::zero() },
            );
        }
        let mut b = vec![R::zero(); dim];
        b[dim - 1] = R::one();
        if let Some(mut n) = solve_dense(&a, &b, R::from_f64_lit(1e-11)) {
            let norm: R = n.iter().map(|x| *x * *x).sum::<R>().sqrt();
            if norm > R::from_f64_lit(1e-9) {
                // Canonical sign: first nonzero component positive.
                let first = n.iter().find(|x| x.abs() > R::from_f64_lit(1e-12));
                if let Some(f) = first {
                    let sgn = if *f < R::zero() { -R::one() } else { R::one() };
                    for x in n.iter_mut() {
                        *x = sgn * *x / norm;
                    }
                }
                return Some(n);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::insider::classify_policy;
    use crate::insider::PolicyLabel;
    use crate::scenario::{build_case_study, CaseStudyParams, ComplianceAttitude};

    fn s2(attitude: ComplianceAttitude, c_d_ic: f64) -> ScenarioModel<f64> {
        let mut p = CaseStudyParams::reference(attitude);
        p.c_d_ic = c_d_ic;
        build_case_study(&p, 0.2, 0.8, 0.3).unwrap()
    }

    #[test]
    fn halfspace_membership_agrees_with_trust_on_a_grid() {
        let m = s2(ComplianceAttitude::Averse, 2.0);
        let view = InsiderView::new(&m);
        for k in 0..2 {
            let hrep = pt_halfspaces(&m, k);
            for a in 0..=20 {
                for b in 0..=20 {
                    let p = [a as f64 / 20.0, b as f64 / 20.0];
                    let member = hrep.contains(&p);
                    let trust = crate::insider::trust_row_holds(&view, &p, k);
                    assert_eq!(member, trust, "k={k} p={p:?}");
                }
            }
        }
    }

    #[test]
    fn single_action_region_is_whole_cube() {
        use crate::mat::{Matrix, Tensor3};
        let m = ScenarioModel {
            sp_labels: vec!["y".into()],
            as_labels: vec!["x1".into(), "x2".into()],
            action_labels: vec!["a".into()],
            prior_y: vec![1.0],
            audit_policy: Matrix::from_rows(vec![vec![0.4, 0.6]]),
            v_u: Tensor3::zeros(1, 2, 1),
            v_d: Tensor3::zeros(1, 2, 1),
        }
        .checked()
        .unwrap();
        let hrep = pt_halfspaces(&m, 0);
        assert_eq!(hrep.inequalities.len(), 4); // just the box
        let v = ct_polytope_vertices(&m, 0).unwrap();
        assert_eq!(v.vertices.len(), 4);
    }

    #[test]
    fn dominant_action_region_is_whole_cube() {
        let mut m = s2(ComplianceAttitude::Neutral, 4.0);
        m.v_u = crate::mat::Tensor3::from_fn(2, 2, 2, |_, _, a| if a == 0 { 5.0 } else { 0.0 });
        let v = ct_polytope_vertices(&m, 0).unwrap();
        assert_eq!(v.vertices.len(), 4);
    }

    #[test]
    fn averse_region_vertices_match_hand_computation() {
        // Reference averse family with penalty 2: the ic-region is
        // p2 >= (0.64 / 1.84) p1 with vertices (0,0), (0,1), (1,1) and the
        // crossing (1, 0.64/1.84).
        let m = s2(ComplianceAttitude::Averse, 2.0);
        let v = ct_polytope_vertices(&m, 0).unwrap();
        let want = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, 0.64 / 1.84],
        ];
        let expect = PolytopeVRep::new(2, want);
        assert!(
            v.vertex_distance(&expect) < 1e-9,
            "vertices {:?}",
            v.vertices
        );
    }

    #[test]
    fn region_boundary_matches_grid_membership() {
        let m = s2(ComplianceAttitude::Averse, 2.0);
        for k in 0..2 {
            let vrep = ct_polytope_vertices(&m, k).unwrap();
            let hrep = vrep_to_hrep(&vrep).unwrap();
            let direct = pt_halfspaces(&m, k);
            for a in 0..=100 {
                for b in 0..=100 {
                    let p = [a as f64 / 100.0, b as f64 / 100.0];
                    // Tolerate disagreement within a grid cell of the boundary.
                    let margin = direct
                        .inequalities
                        .iter()
                        .map(|(n, off)| {
                            let v: f64 = n[0] * p[0] + n[1] * p[1] - off;
                            let scale = n[0].abs().max(n[1].abs()).max(1e-30);
                            v / scale
                        })
                        .fold(f64::INFINITY, f64::min);
                    if margin.abs() < 0.011 {
                        continue;
                    }
                    assert_eq!(hrep.contains(&p), direct.contains(&p), "k={k} p={p:?}");
                }
            }
        }
    }

    #[test]
    fn unit_square_and_triangle_facets() {
        let square = PolytopeVRep::new(
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ],
        );
        let h = vrep_to_hrep(&square).unwrap();
        assert_eq!(h.inequalities.len(), 4);
        assert!(h.equalities.is_empty());
        assert!(h.contains(&[0.5, 0.5]));
        assert!(!h.contains(&[1.2, 0.5]));

        let triangle = PolytopeVRep::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        let h = vrep_to_hrep(&triangle).unwrap();
        assert_eq!(h.inequalities.len(), 3);
        // The diagonal facet p1 + p2 <= 1 must be present.
        assert!(h.contains(&[0.49, 0.49]));
        assert!(!h.contains(&[0.6, 0.6]));
    }

    #[test]
    fn round_trip_vertex_hull() {
        let m = s2(ComplianceAttitude::Averse, 2.0);
        for k in 0..2 {
            let vrep = ct_polytope_vertices(&m, k).unwrap();
            let hrep = vrep_to_hrep(&vrep).unwrap();
            let back = enumerate_vertices(&hrep).unwrap();
            assert!(
                vrep.vertex_distance(&back) < 1e-7,
                "k={k}: {:?} vs {:?}",
                vrep.vertices,
                back.vertices
            );
        }
    }

    #[test]
    fn degenerate_hull_gets_equalities() {
        // A segment in the unit square: rank 1, one equality.
        let seg = PolytopeVRep::new(2, vec![vec![0.25, 0.5], vec![0.75, 0.5]]);
        let h = vrep_to_hrep(&seg).unwrap();
        assert_eq!(h.equalities.len(), 1);
        assert!(h.contains(&[0.5, 0.5]));
        assert!(!h.contains(&[0.5, 0.6]));
        assert!(!h.contains(&[0.9, 0.5]));

        // A single point: all equalities.
        let pt = PolytopeVRep::new(3, vec![vec![0.1, 0.2, 0.3]]);
        let h = vrep_to_hrep(&pt).unwrap();
        assert_eq!(h.equalities.len(), 3);
        assert!(h.contains(&[0.1, 0.2, 0.3]));
        assert!(!h.contains(&[0.1, 0.2, 0.4]));
    }

    #[test]
    fn dimension_guard() {
        let v = PolytopeVRep::new(5, vec![vec![0.0; 5]]);
        assert!(matches!(
            vrep_to_hrep(&v),
            Err(GeometryError::DimensionTooLarge(5))
        ));
    }

    #[test]
    fn ct_policies_sit_in_the_identity_cell() {
        let m = s2(ComplianceAttitude::Averse, 4.0);
        let pi = crate::optimizer::zero_info_policy(&m);
        assert_eq!(
            classify_policy(&m, &pi).label,
            PolicyLabel::CompletelyTrustworthy
        );
        let cell = cell_of_policy(&m, &pi);
        for (k, label) in cell.iter().enumerate() {
            if let Some(a) = label {
                assert_eq!(*a, k);
            }
        }
        let pf = crate::optimizer::full_info_policy(&m);
        let cell = cell_of_policy(&m, &pf);
        for (k, label) in cell.iter().enumerate() {
            if let Some(a) = label {
                assert_eq!(*a, k);
            }
        }
    }

    #[test]
    fn canonical_policy_rows_sit_inside_their_regions() {
        for c in [2.0, 4.0, 10.0] {
            let m = s2(ComplianceAttitude::Averse, c);
            for pi in [
                crate::optimizer::zero_info_policy(&m),
                crate::optimizer::full_info_policy(&m),
            ] {
                for k in 0..2 {
                    assert!(
                        pt_halfspaces(&m, k).contains(pi.row(k)),
                        "row {k} outside its region at penalty {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn trust_of_a_signal_depends_on_its_row_alone() {
        // Three actions so the remaining rows have real freedom.
        let m = ScenarioModel {
            sp_labels: vec!["y".into()],
            as_labels: vec!["x1".into(), "x2".into()],
            action_labels: vec!["a1".into(), "a2".into(), "a3".into()],
            prior_y: vec![1.0],
            audit_policy: crate::mat::Matrix::from_rows(vec![vec![0.5, 0.5]]),
            v_u: crate::mat::Tensor3::from_nested(vec![vec![
                vec![2.0, 1.0, -1.0],
                vec![-1.0, 3.0, 0.5],
            ]]),
            v_d: crate::mat::Tensor3::zeros(1, 2, 3),
        }
        .checked()
        .unwrap();
        let view = InsiderView::new(&m);
        // Same first row, different mass splits below it.
        let a = PolicyMatrix::from_rows(vec![
            vec![0.3, 0.6],
            vec![0.7, 0.0],
            vec![0.0, 0.4],
        ])
        .unwrap();
        let b = PolicyMatrix::from_rows(vec![
            vec![0.3, 0.6],
            vec![0.1, 0.4],
            vec![0.6, 0.0],
        ])
        .unwrap();
        assert_eq!(
            crate::insider::recommendation_trustworthy_with(&view, &a, 0),
            crate::insider::recommendation_trustworthy_with(&view, &b, 0),
        );
        // The membership predicate consumes only the row.
        for t in [0.0, 0.25, 0.5, 1.0] {
            let row = [t, 1.0 - t];
            assert_eq!(
                crate::insider::trust_row_holds(&view, &row, 0),
                pt_halfspaces(&m, 0).contains(&row)
            );
        }
    }

    #[test]
    fn seeking_family_shows_three_cells_left_to_right() {
        // The nonempty fully-realizable cells for the compliance-seeking
        // insider at penalty 2 are (ic,co), (co,co), (co,ic) as the policy
        // square is crossed from the upper-left to the lower-right.
        let m = s2(ComplianceAttitude::Seeking, 2.0);
        let view = InsiderView::new(&m);
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..=40 {
            for b in 0..=40 {
                let p1 = a as f64 / 40.0;
                let p2 = b as f64 / 40.0;
                let pi = PolicyMatrix::from_rows(vec![
                    vec![p1, p2],
                    vec![1.0 - p1, 1.0 - p2],
                ])
                .unwrap();
                let cell = cell_of_policy_with(&view, &pi);
                if let [Some(l1), Some(l2)] = cell[..] {
                    seen.insert((l1, l2));
                }
            }
        }
        let want: std::collections::BTreeSet<(usize, usize)> =
            [(0, 1), (1, 1), (1, 0)].into_iter().collect();
        assert_eq!(seen, want, "cells: {seen:?}");
    }

    #[test]
    fn cells_partition_and_are_convex_on_a_grid() {
        let m = s2(ComplianceAttitude::Averse, 2.0);
        let view = InsiderView::new(&m);
        let grid: Vec<(f64, f64)> = (0..=20)
            .flat_map(|a| (0..=20).map(move |b| (a as f64 / 20.0, b as f64 / 20.0)))
            .collect();
        let cell_at = |p: (f64, f64)| {
            let pi = PolicyMatrix::from_rows(vec![
                vec![p.0, p.1],
                vec![1.0 - p.0, 1.0 - p.1],
            ])
            .unwrap();
            cell_of_policy_with(&view, &pi)
        };
        let labels: Vec<_> = grid.iter().map(|p| cell_at(*p)).collect();
        // Midpoint convexity on same-cell pairs (midpoints on the grid).
        for (i, pi_l) in grid.iter().enumerate() {
            for (j, pj_l) in grid.iter().enumerate().skip(i + 1) {
                if labels[i] != labels[j] {
                    continue;
                }
                let mid = ((pi_l.0 + pj_l.0) / 2.0, (pi_l.1 + pj_l.1) / 2.0);
                let on_grid = (mid.0 * 20.0).fract().abs() < 1e-9
                    && (mid.1 * 20.0).fract().abs() < 1e-9;
                if on_grid {
                    assert_eq!(cell_at(mid), labels[i], "midpoint of {pi_l:?},{pj_l:?}");
                }
            }
        }
    }
}
