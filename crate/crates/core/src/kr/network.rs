//! Spin-network evaluation along a reduction trace, the closed-form prism sum and
//! growth-rate series.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{admissible, KrError, Level, Precise, PreciseTable, SixJArgs};
use crate::graph::{reduce, EdgeId, FaceId, Move, PlanarTrivalentGraph, Strategy};

/// Bits kept beyond the estimated cancellation.
const GUARD_BITS: f64 = 60.0;
const MAX_ATTEMPTS: usize = 4;

/// Doubled color per edge of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: BTreeMap<EdgeId, u32>,
}

/// A network value `|v|·exp(i·phase)` together with the growth rate `2π·log|v|/r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantValue {
    pub r: u32,
    pub log_abs: f64,
    pub phase: f64,
    pub growth: f64,
    pub precision_bits: usize,
    /// `log2` of the estimated relative error.
    pub rel_error_log2: f64,
}

impl InvariantValue {
    fn from_precise(v: &Precise, level: Level, bits: usize) -> Self {
        let r = level.r();
        if v.is_zero() {
            return InvariantValue {
                r,
                log_abs: f64::NEG_INFINITY,
                phase: 0.0,
                growth: f64::NEG_INFINITY,
                precision_bits: bits,
                rel_error_log2: f64::NEG_INFINITY,
            };
        }
        let (log_abs, phase) = v.log_polar();
        InvariantValue {
            r,
            log_abs,
            phase,
            growth: 2.0 * PI * log_abs / r as f64,
            precision_bits: bits,
            rel_error_log2: v.rel_err(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

pub(crate) fn initial_bits(level: Level) -> usize {
    128 + level.r() as usize / 4
}

/// True when `cur`, recomputed with more bits than `prev`, stays inside its error bound
/// and shrank with the added precision: the exact value is zero.
pub(crate) fn vanishes(prev: &Precise, prev_bits: usize, cur: &Precise, bits: usize) -> bool {
    let drop = prev.log2_abs() - cur.log2_abs();
    cur.is_zero()
        || (prev.rel_err() >= 0.0
            && cur.rel_err() >= 0.0
            && drop >= 0.5 * (bits - prev_bits) as f64)
}

/// Runs `f` at increasing precision until its error estimate clears the guard bits.
pub(crate) fn adaptive<F>(level: Level, f: F) -> Result<(Precise, usize), KrError>
where
    F: Fn(&PreciseTable) -> Precise,
{
    let mut bits = initial_bits(level);
    let mut prev: Option<(Precise, usize)> = None;
    for _ in 0..MAX_ATTEMPTS {
        let table = PreciseTable::new(level, bits);
        let v = f(&table);
        let rel = v.rel_err();
        if v.is_zero() || rel <= -GUARD_BITS {
            return Ok((v, bits));
        }
        if let Some((p, pb)) = &prev {
            if vanishes(p, *pb, &v, bits) {
                return Ok((Precise::zero(bits), bits));
            }
        }
        let next = bits + (rel + GUARD_BITS + 32.0).ceil() as usize;
        prev = Some((v, bits));
        bits = next;
    }
    let (v, bits) = prev.expect("at least one attempt");
    Err(KrError::Precision {
        rel: v.rel_err(),
        bits,
    })
}

/// Colors of the prism sum: `(r−3)/3`, `(r−3)/4` and `3(r−3)/10`.
fn prism_colors(r: i64) -> Result<(Level, u32, u32, u32), KrError> {
    let level = Level::new(r)?;
    if (r - 3) % 60 != 0 {
        return Err(KrError::PrismDivisibility(r));
    }
    let n = (r - 3) as u32;
    Ok((level, n / 3, n / 4, 3 * n / 10))
}

/// `Σ_k (−1)^k [k+1] · T(k)^5` with `T(k)` the unitary tetrahedral coefficient of
/// `{A A E; B B k}`, where `A = (r−3)/3`, `B = (r−3)/4`, `E = 3(r−3)/10`.
pub fn prism_invariant(r: i64) -> Result<InvariantValue, KrError> {
    let (level, a, b, e) = prism_colors(r)?;
    let (v, bits) = adaptive(level, |t| {
        let p = t.prec();
        let terms: Vec<Precise> = (0..=level.max_color())
            .into_par_iter()
            .filter_map(|k| {
                let args = SixJArgs::new(a, a, e, b, b, k);
                if !args.admissible(level) {
                    return None;
                }
                let tet = t.unitary_tet(&args);
                Some(t.loop_value(k).mul(&tet.powi(5, p), p))
            })
            .collect();
        super::precise_sum(terms, p)
    })?;
    Ok(InvariantValue::from_precise(&v, level, bits))
}

/// The theta network: 1 for an admissible triad, 0 otherwise, since vertices are
/// normalized so that theta graphs evaluate to 1.
pub fn theta_value(a: u32, b: u32, c: u32, level: Level) -> f64 {
    if admissible(a, b, c, level) {
        1.0
    } else {
        0.0
    }
}

/// Colors `s = (r−3)(π−α)/(2π)` for every edge of an angled graph.
pub fn coloring_sequence(graph: &PlanarTrivalentGraph, r: i64) -> Result<Coloring, KrError> {
    Level::new(r)?;
    let mut colors = BTreeMap::new();
    let mut bad = Vec::new();
    let mut period = 2i64;
    for e in graph.edge_ids() {
        let angle = graph.angle(e).ok_or(KrError::MissingAngle(e))?;
        let (p, q) = (angle.p, angle.q);
        // s = (r−3)(q−p)/(2q) is an integer iff (r−3) is a multiple of 2q/gcd(q−p, 2q).
        let step = 2 * q / gcd(q - p, 2 * q);
        period = lcm(period, step);
        let num = (r - 3) * (q - p);
        if num % (2 * q) != 0 {
            bad.push(e);
        } else {
            colors.insert(e, (num / (2 * q)) as u32);
        }
    }
    if !bad.is_empty() {
        return Err(KrError::NonIntegerColor {
            r,
            period,
            edges: bad,
            smallest: 3 + period,
        });
    }
    Ok(Coloring { colors })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

type Pair = (FaceId, FaceId);

fn pair(a: FaceId, b: FaceId) -> Pair {
    (a.min(b), a.max(b))
}

struct Network<'a> {
    steps: Vec<(Move, [FaceId; 4])>,
    terminal: [FaceId; 4],
    table: &'a PreciseTable,
    cache: Mutex<HashMap<SixJArgs, Precise>>,
}

impl Network<'_> {
    fn tet(&self, quad: &[FaceId; 4], colors: &BTreeMap<Pair, u32>) -> Precise {
        let args = SixJArgs::from_face_quadruple(|i, j| colors[&pair(quad[i], quad[j])]);
        let key = args.canonical();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v = self.table.unitary_tet(&key);
        self.cache.lock().unwrap().insert(key, v.clone());
        v
    }

    fn eval(&self, step: usize, colors: &BTreeMap<Pair, u32>) -> Precise {
        let p = self.table.prec();
        let level = self.table.level();
        let Some(&(mv, quad)) = self.steps.get(step) else {
            return self.tet(&self.terminal, colors);
        };
        match mv {
            Move::Cap(f) => {
                let factor = self.tet(&quad, colors);
                if factor.is_zero() {
                    return factor;
                }
                let mut rest = colors.clone();
                rest.retain(|&(x, y), _| x != f && y != f);
                factor.mul(&self.eval(step + 1, &rest), p)
            }
            Move::Ih(_) => {
                let [a, b, c, d] = quad;
                let col = |x, y| colors[&pair(x, y)];
                let (ca, da, cb, db) = (col(c, a), col(d, a), col(c, b), col(d, b));
                let terms: Vec<Precise> = (0..=level.max_color())
                    .into_par_iter()
                    .filter(|&k| admissible(ca, da, k, level) && admissible(cb, db, k, level))
                    .filter_map(|k| {
                        let mut next = colors.clone();
                        next.insert(pair(c, d), k);
                        let factor = self.tet(&quad, &next);
                        if factor.is_zero() {
                            return None;
                        }
                        next.remove(&pair(a, b));
                        let w = self.table.loop_value(k).mul(&factor, p);
                        Some(w.mul(&self.eval(step + 1, &next), p))
                    })
                    .collect();
                super::precise_sum(terms, p)
            }
        }
    }
}

/// Evaluates the unitary spin network of a colored graph by recoupling along a
/// reduction: each I-H move sums over the color of the new edge with weight
/// `(−1)^k [k+1]` times a tetrahedral coefficient, each cap contributes one
/// tetrahedral coefficient, and the terminal tetrahedron contributes the last one.
pub fn evaluate_network(
    graph: &PlanarTrivalentGraph,
    coloring: &Coloring,
    r: i64,
    strategy: &Strategy,
) -> Result<InvariantValue, KrError> {
    let level = Level::new(r)?;
    let trace = reduce(graph, strategy)?;
    let mut colors = BTreeMap::new();
    for e in graph.edge_ids() {
        let (x, y) = graph.edge_faces(e)?;
        let c = *coloring.colors.get(&e).ok_or(KrError::MissingColor(e))?;
        colors.insert(pair(x, y), c);
    }
    let mut steps = Vec::with_capacity(trace.moves.len());
    let mut g = graph.clone();
    for &mv in &trace.moves {
        let (h, q) = g.apply(mv)?;
        steps.push((mv, q));
        g = h;
    }
    let ids = g.face_ids();
    let terminal = [ids[0], ids[1], ids[2], ids[3]];
    let (v, bits) = adaptive(level, |table| {
        let net = Network {
            steps: steps.clone(),
            terminal,
            table,
            cache: Mutex::new(HashMap::new()),
        };
        net.eval(0, &colors)
    })?;
    Ok(InvariantValue::from_precise(&v, level, bits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub r: u32,
    pub value: f64,
}

/// Least-squares fit `V(r) ≈ limit + slope/r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub points: Vec<GrowthPoint>,
    /// Levels dropped because the invariant vanished.
    pub excluded: Vec<u32>,
    pub extrapolation: Option<Extrapolation>,
}

pub fn growth_series(values: &[InvariantValue]) -> GrowthSeries {
    let mut sorted: Vec<&InvariantValue> = values.iter().collect();
    sorted.sort_by_key(|v| v.r);
    sorted.dedup_by_key(|v| v.r);
    let (zero, live): (Vec<&InvariantValue>, Vec<&InvariantValue>) =
        sorted.into_iter().partition(|v| v.is_zero());
    let points: Vec<GrowthPoint> = live
        .iter()
        .map(|v| GrowthPoint {
            r: v.r,
            value: v.growth,
        })
        .collect();
    GrowthSeries {
        extrapolation: extrapolate(&points),
        excluded: zero.iter().map(|v| v.r).collect(),
        points,
    }
}

fn extrapolate(points: &[GrowthPoint]) -> Option<Extrapolation> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.r as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - limit - slope * x).powi(2))
        .sum();
    Some(Extrapolation {
        limit,
        slope,
        residual: (ss / n).sqrt(),
    })
}
