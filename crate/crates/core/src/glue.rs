//! Gluing generalised tetrahedra into a polyhedron.
//!
//! The unknowns are the lengths of the common perpendiculars of a decomposition plan. The
//! potential used here is `Φ = Σ W_k − π Σ ℓ_v`, where `W = Vol + ½ Σ ℓ·α` is the
//! Legendre dual of the tetrahedron volume, so `∂Φ/∂ℓ_v = ½ Σ α − π`. Its critical points
//! are the length assignments closing every angle sum to 2π, and the critical value is the
//! volume of the polyhedron.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DecompositionPlan, FaceId, GraphError, PairKind, PlannedTetrahedron};
use crate::tetra::{
    evaluate, EdgeParameter, TetraError, TetraEvaluation, TetrahedronShape, TruncationType,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("tetrahedron {index} (faces {faces:?}) at lengths {lengths:?}: {source}")]
    Tetra {
        index: usize,
        faces: [FaceId; 4],
        lengths: Vec<f64>,
        source: TetraError,
    },
    #[error("expected {expected} lengths, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("no realizable starting point: {0}")]
    Infeasible(String),
    #[error("Newton did not converge from any start (best residual {best_residual:e})")]
    NonConvergent { best_residual: f64 },
}

/// Shape of one planned tetrahedron at the given lengths (indexed like
/// `plan.length_variables`).
pub fn instantiate(t: &PlannedTetrahedron, lengths: &[f64]) -> TetrahedronShape {
    let params = t.pairs.map(|p| match p {
        PairKind::Angle { angle } => EdgeParameter::Angle(angle.radians()),
        PairKind::Length { variable } => EdgeParameter::Length(lengths[variable]),
    });
    TetrahedronShape::new(params)
}

/// Everything about a plan at one length assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEvaluation {
    pub volume: f64,
    pub potential: f64,
    /// `π − ½ Σ α` per length variable.
    pub residual: Vec<f64>,
    /// `∂ residual_v / ∂ℓ_w`.
    pub jacobian: DMatrix<f64>,
    pub tetrahedra: Vec<TetraEvaluation>,
}

fn check_dims(plan: &DecompositionPlan, lengths: &[f64]) -> Result<(), GlueError> {
    if plan.length_variables.len() != lengths.len() {
        return Err(GlueError::Dimension {
            expected: plan.length_variables.len(),
            got: lengths.len(),
        });
    }
    Ok(())
}

pub fn evaluate_plan(
    plan: &DecompositionPlan,
    lengths: &[f64],
) -> Result<PlanEvaluation, GlueError> {
    check_dims(plan, lengths)?;
    let d = lengths.len();
    let mut volume = 0.0;
    let mut potential = -PI * lengths.iter().sum::<f64>();
    let mut residual = vec![PI; d];
    let mut jacobian = DMatrix::zeros(d, d);
    let mut tetrahedra = Vec::with_capacity(plan.tetrahedra.len());
    for (index, t) in plan.tetrahedra.iter().enumerate() {
        let shape = instantiate(t, lengths);
        let ev = evaluate(&shape).map_err(|source| GlueError::Tetra {
            index,
            faces: t.faces,
            lengths: lengths.to_vec(),
            source,
        })?;
        volume += ev.volume;
        potential += ev.dual_volume(&shape);
        for j in 0..6 {
            let PairKind::Length { variable: v } = t.pairs[j] else {
                continue;
            };
            residual[v] -= 0.5 * ev.length_angles[j].unwrap_or(0.0);
            for k in 0..6 {
                if let PairKind::Length { variable: w } = t.pairs[k] {
                    jacobian[(v, w)] -= 0.5 * ev.angle_jacobian[j][k];
                }
            }
        }
        tetrahedra.push(ev);
    }
    Ok(PlanEvaluation {
        volume,
        potential,
        residual,
        jacobian,
        tetrahedra,
    })
}

/// `Φ = Σ W_k − π Σ ℓ`; equals the volume sum at a solution.
pub fn potential(plan: &DecompositionPlan, lengths: &[f64]) -> Result<f64, GlueError> {
    Ok(evaluate_plan(plan, lengths)?.potential)
}

pub fn residual(plan: &DecompositionPlan, lengths: &[f64]) -> Result<Vec<f64>, GlueError> {
    Ok(evaluate_plan(plan, lengths)?.residual)
}

/// Central-difference Jacobian of the residual.
pub fn jacobian_fd(
    plan: &DecompositionPlan,
    lengths: &[f64],
    h: f64,
) -> Result<DMatrix<f64>, GlueError> {
    let d = lengths.len();
    let mut jac = DMatrix::zeros(d, d);
    for w in 0..d {
        let mut up = lengths.to_vec();
        let mut dn = lengths.to_vec();
        up[w] += h;
        dn[w] -= h;
        let (ru, rd) = (residual(plan, &up)?, residual(plan, &dn)?);
        for v in 0..d {
            jac[(v, w)] = (ru[v] - rd[v]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Central-difference gradient of the potential; equals `−residual`.
pub fn potential_gradient_fd(
    plan: &DecompositionPlan,
    lengths: &[f64],
    h: f64,
) -> Result<Vec<f64>, GlueError> {
    (0..lengths.len())
        .map(|w| {
            let mut up = lengths.to_vec();
            let mut dn = lengths.to_vec();
            up[w] += h;
            dn[w] -= h;
            Ok((potential(plan, &up)? - potential(plan, &dn)?) / (2.0 * h))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub l_max: f64,
    pub grid: usize,
    /// Cap on the number of multi-start points; larger grids are subsampled.
    pub max_starts: usize,
    pub max_iter: usize,
    pub initial: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            l_max: 5.0,
            grid: 8,
            max_starts: 64,
            max_iter: 100,
            initial: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthValue {
    pub faces: (FaceId, FaceId),
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetrahedronReport {
    pub faces: [FaceId; 4],
    pub kind: TruncationType,
    pub symbol: String,
    pub volume: f64,
    /// Angles at the perpendiculars, by slot; `None` at angle slots.
    pub angles: [Option<f64>; 6],
    pub raw_angles: [Option<f64>; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSolution {
    pub lengths: Vec<f64>,
    pub volume: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingSolution {
    pub lengths: Vec<LengthValue>,
    pub volume: f64,
    pub residuals: Vec<f64>,
    pub tetrahedra: Vec<TetrahedronReport>,
    /// Other distinct solutions found by the multi-start search.
    pub multiplicity_note: Vec<AlternativeSolution>,
    pub iterations: usize,
    pub starts: usize,
    /// Largest deviation between the analytic and finite-difference Jacobians.
    pub jacobian_check: f64,
}

impl GluingSolution {
    pub fn length_vector(&self) -> Vec<f64> {
        self.lengths.iter().map(|l| l.length).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}

struct Run {
    lengths: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Damped Newton on the residual. Steps are halved until the shape stays realizable and
/// the residual norm decreases.
fn newton(plan: &DecompositionPlan, start: &[f64], opts: &SolveOptions) -> Option<Run> {
    let mut x = start.to_vec();
    let mut ev = evaluate_plan(plan, &x).ok()?;
    let mut norm = max_abs(&ev.residual);
    for it in 0..opts.max_iter {
        if norm <= opts.tol {
            // One more full step to polish the root.
            let r = DVector::from_column_slice(&ev.residual);
            if let Some(dx) = ev.jacobian.clone().lu().solve(&(-r)) {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
                if let Ok(tev) = evaluate_plan(plan, &trial) {
                    let tn = max_abs(&tev.residual);
                    if tn < norm {
                        return Some(Run {
                            lengths: trial,
                            residual: tn,
                            iterations: it + 1,
                        });
                    }
                }
            }
            return Some(Run {
                lengths: x,
                residual: norm,
                iterations: it,
            });
        }
        let r = DVector::from_column_slice(&ev.residual);
        let dx = ev.jacobian.clone().lu().solve(&(-r))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let trial: Vec<f64> = x
                .iter()
                .zip(dx.iter())
                .map(|(a, b)| a + lambda * b)
                .collect();
            if trial.iter().all(|&l| l > 0.0 && l.is_finite()) {
                if let Ok(tev) = evaluate_plan(plan, &trial) {
                    let tn = max_abs(&tev.residual);
                    if tn < norm {
                        x = trial;
                        ev = tev;
                        norm = tn;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(Run {
        lengths: x,
        residual: norm,
        iterations: opts.max_iter,
    })
}

/// Starting points: the default guess first, then the grid over `(0, l_max]^d`, subsampled
/// with a seeded generator when it has more than `max_starts` points.
pub fn starting_points(d: usize, opts: &SolveOptions) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (1..=opts.grid)
        .map(|i| opts.l_max * i as f64 / opts.grid as f64)
        .collect();
    let mut out = vec![vec![opts.initial; d]];
    if d == 0 {
        return out;
    }
    let total = (opts.grid as f64).powi(d as i32);
    if total <= opts.max_starts as f64 {
        let n = opts.grid.pow(d as u32);
        for mut idx in 0..n {
            let mut p = Vec::with_capacity(d);
            for _ in 0..d {
                p.push(axis[idx % opts.grid]);
                idx /= opts.grid;
            }
            out.push(p);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.max_starts {
            out.push(
                (0..d)
                    .map(|_| axis[rng.random_range(0..opts.grid)])
                    .collect(),
            );
        }
    }
    out
}

/// Realizable part of the segment from `base` along axis `axis` over `(0, l_max]`, as the
/// grid cells whose midpoints evaluate, refined by bisection at each end.
pub fn realizable_interval(
    plan: &DecompositionPlan,
    base: &[f64],
    axis: usize,
    l_max: f64,
) -> Option<(f64, f64)> {
    let ok = |l: f64| {
        let mut x = base.to_vec();
        x[axis] = l;
        evaluate_plan(plan, &x).is_ok()
    };
    let n = 64;
    let pts: Vec<f64> = (1..=n).map(|i| l_max * i as f64 / n as f64).collect();
    let first = pts.iter().position(|&l| ok(l))?;
    let last = pts.iter().rposition(|&l| ok(l))?;
    let bisect = |mut good: f64, mut bad: f64| {
        for _ in 0..50 {
            let mid = 0.5 * (good + bad);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let lo = if first == 0 {
        bisect(pts[0], 0.0)
    } else {
        bisect(pts[first], pts[first - 1])
    };
    let hi = if last + 1 == n {
        pts[last]
    } else {
        bisect(pts[last], pts[last + 1])
    };
    Some((lo, hi))
}

pub fn solve(plan: &DecompositionPlan, opts: &SolveOptions) -> Result<GluingSolution, GlueError> {
    let d = plan.length_variables.len();
    let starts = starting_points(d, opts);
    let n_starts = starts.len();
    let feasible: Vec<&Vec<f64>> = starts
        .iter()
        .filter(|s| evaluate_plan(plan, s).is_ok())
        .collect();
    if feasible.is_empty() {
        return Err(GlueError::Infeasible(format!(
            "none of {n_starts} starting points gives realizable tetrahedra; the faces may not be ultra-parallel"
        )));
    }
    let runs: Vec<Run> = feasible
        .par_iter()
        .filter_map(|s| newton(plan, s, opts))
        .collect();
    let best_residual = runs
        .iter()
        .map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let mut converged: Vec<&Run> = runs.iter().filter(|r| r.residual <= opts.tol).collect();
    if converged.is_empty() {
        return Err(GlueError::NonConvergent { best_residual });
    }
    converged.sort_by(|a, b| {
        let sa: f64 = a.lengths.iter().sum();
        let sb: f64 = b.lengths.iter().sum();
        sa.total_cmp(&sb).then(a.residual.total_cmp(&b.residual))
    });
    let mut distinct: Vec<&Run> = Vec::new();
    for r in converged {
        let same = |o: &&Run| {
            o.lengths
                .iter()
                .zip(&r.lengths)
                .all(|(a, b)| (a - b).abs() < 1e-6)
        };
        if !distinct.iter().any(same) {
            distinct.push(r);
        }
    }
    let primary = distinct[0];
    let ev = evaluate_plan(plan, &primary.lengths)?;
    let fd = jacobian_fd(plan, &primary.lengths, 1e-6)?;
    let jacobian_check = (&fd - &ev.jacobian).abs().max();
    let mut multiplicity_note = Vec::new();
    for r in &distinct[1..] {
        let e = evaluate_plan(plan, &r.lengths)?;
        multiplicity_note.push(AlternativeSolution {
            lengths: r.lengths.clone(),
            volume: e.volume,
            max_residual: r.residual,
        });
    }
    let tetrahedra = plan
        .tetrahedra
        .iter()
        .zip(&ev.tetrahedra)
        .map(|(t, e)| TetrahedronReport {
            faces: t.faces,
            kind: t.kind,
            symbol: t.kind.symbol(),
            volume: e.volume,
            angles: e.length_angles,
            raw_angles: e.raw_angles,
        })
        .collect();
    Ok(GluingSolution {
        lengths: plan
            .length_variables
            .iter()
            .zip(&primary.lengths)
            .map(|(&faces, &length)| LengthValue { faces, length })
            .collect(),
        volume: ev.volume,
        residuals: ev.residual,
        tetrahedra,
        multiplicity_note,
        iterations: primary.iterations,
        starts: n_starts,
        jacobian_check,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub clean: bool,
    pub flags: Vec<String>,
}

/// Best-effort check that the solution describes a genuine decomposition: positive
/// lengths, recovered angles inside `(0, π)` and not above π before reduction, closed
/// angle sums and a unique solution. It flags problems, it does not prove their absence.
pub fn width_uniform_certificate(solution: &GluingSolution, tol: f64) -> Certificate {
    let mut flags = Vec::new();
    for l in &solution.lengths {
        if l.length <= 0.0 {
            flags.push(format!(
                "length of p{}{} is not positive",
                l.faces.0, l.faces.1
            ));
        }
    }
    for t in &solution.tetrahedra {
        for (a, raw) in t.angles.iter().zip(&t.raw_angles) {
            let (Some(a), Some(raw)) = (a, raw) else {
                continue;
            };
            if *a <= 0.0 || *a >= PI {
                flags.push(format!(
                    "tetrahedron {:?} has a degenerate perpendicular angle {a:.6}",
                    t.faces
                ));
            }
            if *raw > PI {
                flags.push(format!(
                    "tetrahedron {:?} has a perpendicular angle {raw:.6} above π before reduction",
                    t.faces
                ));
            }
        }
    }
    if solution.max_residual() > tol {
        flags.push(format!(
            "angle sums do not close: residual {:e}",
            solution.max_residual()
        ));
    }
    if !solution.multiplicity_note.is_empty() {
        flags.push(format!(
            "{} further solution(s) found; some tetrahedra may overlap",
            solution.multiplicity_note.len()
        ));
    }
    Certificate {
        clean: flags.is_empty(),
        flags,
    }
}
