//! Growth-rate scans of a single 6j-symbol and of the doubly truncated sum.

use std::f64::consts::PI;

use astro_float::RoundingMode;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{initial_bits, vanishes};
use super::{KrError, Level, Precise, PreciseTable, SixJArgs};
use crate::tetra::{self, EdgeParameter, TetrahedronShape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Spin index of the scanned color.
    pub k: u32,
    /// `4πk/r`.
    pub angle: f64,
    /// `2π/r · log|value|`, absent when the value vanishes.
    pub value: Option<f64>,
    /// Comparison volume, where defined.
    pub reference: Option<f64>,
}

/// Which internal colors enter the doubly truncated sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JRange {
    /// All spins `j`, symbol entry `j`, weight `[(2j+1)(2l+1)] / [2j+1]`.
    #[default]
    All,
    /// Odd `j` only, symbol entry `(j−1)/2`, weight `[(j+1)(2l+1)] / [j]`.
    Odd,
}

/// Evaluates `f` on every point at one precision, raising it until all nonzero values
/// clear the guard bits. Values that shrink with the added precision are exact zeros.
fn batch<F>(level: Level, n: usize, f: F) -> Result<Vec<Precise>, KrError>
where
    F: Fn(&PreciseTable, usize) -> Precise + Sync,
{
    let mut bits = initial_bits(level);
    let mut prev: Option<(Vec<Precise>, usize)> = None;
    for _ in 0..4 {
        let table = PreciseTable::new(level, bits);
        let mut vals: Vec<Precise> = (0..n).into_par_iter().map(|i| f(&table, i)).collect();
        if let Some((old, old_bits)) = &prev {
            for (v, o) in vals.iter_mut().zip(old) {
                if !v.is_zero() && vanishes(o, *old_bits, v, bits) {
                    *v = Precise::zero(bits);
                }
            }
        }
        let worst = vals
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.rel_err())
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= -60.0 {
            return Ok(vals);
        }
        let next = bits + (worst + 92.0).ceil() as usize;
        prev = Some((vals, bits));
        bits = next;
    }
    let (vals, bits) = prev.expect("at least one attempt");
    let worst = vals
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.rel_err())
        .fold(f64::NEG_INFINITY, f64::max);
    Err(KrError::Precision { rel: worst, bits })
}

fn growth(v: &Precise, level: Level) -> Option<f64> {
    if v.is_zero() {
        None
    } else {
        Some(2.0 * PI * v.log_polar().0 / level.r() as f64)
    }
}

/// Volume of the regular tetrahedron with all dihedral angles `theta`.
fn regular_volume(theta: f64) -> Option<f64> {
    if theta <= 0.0 {
        return None;
    }
    tetra::volume(&TetrahedronShape::regular(theta)).ok()
}

/// `2π/r · log|{k k k; k k k}|` over spins `ks`, paired with the regular tetrahedron
/// volume at angle `|π − 4πk/r|`.
pub fn single_sixj_scan(r: i64, ks: &[u32]) -> Result<Vec<ScanPoint>, KrError> {
    let level = Level::new(r)?;
    let vals = batch(level, ks.len(), |t, i| t.sixj(&SixJArgs::all(2 * ks[i])))?;
    Ok(ks
        .iter()
        .zip(&vals)
        .map(|(&k, v)| {
            let angle = 4.0 * PI * k as f64 / r as f64;
            ScanPoint {
                k,
                angle,
                value: growth(v, level),
                reference: regular_volume((PI - angle).abs()),
            }
        })
        .collect())
}

/// `U(k, l) = Σ_j {k k k; k k j} · [(2j+1)(2l+1)] / [2j+1]` in spins, or the odd-`j`
/// variant.
pub fn doubly_truncated_sum(table: &PreciseTable, k: u32, l: u32, range: JRange) -> Precise {
    let level = table.level();
    let p = table.prec();
    let rm = RoundingMode::ToEven;
    let kk = 2 * k;
    let mut acc = Precise::zero(p);
    for j in 0..=level.max_color() {
        // Doubled entry color and the two quantum integers of the weight.
        let (entry, num, den) = match range {
            JRange::All => (2 * j, (2 * j + 1) as i64 * (2 * l + 1) as i64, 2 * j + 1),
            JRange::Odd if j % 2 == 1 => (j - 1, (j + 1) as i64 * (2 * l + 1) as i64, j),
            JRange::Odd => continue,
        };
        if entry > level.max_color() {
            break;
        }
        let six = table.sixj(&SixJArgs::new(kk, kk, kk, kk, kk, entry));
        if six.is_zero() {
            continue;
        }
        let w = table.qint(num).div(&table.qint(den as i64), p, rm);
        if w.is_zero() {
            continue;
        }
        let rel = (level.r() as f64).log2() + 4.0 - p as f64;
        acc.add_assign(&six.scale(&w, rel, p), p);
    }
    acc
}

/// Recovered angle at the length edge of the tetrahedron with five angles `π/3`.
fn p4_shape(length: f64) -> TetrahedronShape {
    let a = EdgeParameter::Angle(PI / 3.0);
    TetrahedronShape::new([a, a, a, EdgeParameter::Length(length), a, a])
}

/// Volume of the tetrahedron with five dihedral angles `π/3` whose truncated edge has
/// recovered angle `beta`, for `beta` in `(0, 2π/3)`.
pub fn truncated_reference(beta: f64) -> Option<f64> {
    if !(beta > 0.0 && beta < 2.0 * PI / 3.0) {
        return None;
    }
    let angle = |l: f64| tetra::angle_at_length_edge(&p4_shape(l), 4).ok();
    let (mut lo, mut hi) = (1e-9, 1.0);
    while angle(hi)? < beta {
        hi *= 2.0;
        if hi > 64.0 {
            return None;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if angle(mid)? < beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    tetra::volume(&p4_shape(0.5 * (lo + hi))).ok()
}

/// `2π/r · log|U(k, l)|` over `ls`, paired with the truncated-tetrahedron volume at
/// `β = 4πl/r`.
pub fn doubly_truncated_scan(
    r: i64,
    k: u32,
    ls: &[u32],
    range: JRange,
) -> Result<Vec<ScanPoint>, KrError> {
    let level = Level::new(r)?;
    let vals = batch(level, ls.len(), |t, i| {
        doubly_truncated_sum(t, k, ls[i], range)
    })?;
    Ok(ls
        .iter()
        .zip(&vals)
        .map(|(&l, v)| {
            let angle = 4.0 * PI * l as f64 / r as f64;
            ScanPoint {
                k: l,
                angle,
                value: growth(v, level),
                reference: truncated_reference(angle),
            }
        })
        .collect())
}

/// Largest `|value − reference|` over the points where both are defined.
pub fn max_deviation(points: &[ScanPoint]) -> Option<f64> {
    points
        .iter()
        .filter_map(|p| Some((p.value? - p.reference?).abs()))
        .reduce(f64::max)
}
