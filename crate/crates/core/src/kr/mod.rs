//! Quantum 6j-symbols at `q = exp(4πi/r)` and spin-network invariants of colored
//! planar trivalent graphs.
//!
//! Colors are doubled spins: a color `c` stands for spin `c/2`. A triad `(a, b, c)` is
//! admissible when it satisfies the triangle inequality, `a + b + c` is even and
//! `a + b + c ≤ 2(r - 2)`. Quantum integers are normalized,
//! `[n] = sin(2πn/r) / sin(2π/r)`, and vanish exactly when `r | n`.

mod network;
mod precise;
mod scan;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, GraphError};
use crate::numerics::{check_level, log_sum, normalized_qint_unchecked, LogComplex, NumericsError};

pub use network::{
    coloring_sequence, evaluate_network, growth_series, prism_invariant, theta_value, Coloring,
    Extrapolation, GrowthPoint, GrowthSeries, InvariantValue,
};
pub use precise::{precise_sum, Precise, PreciseTable};
pub use scan::{
    doubly_truncated_scan, doubly_truncated_sum, max_deviation, single_sixj_scan,
    truncated_reference, JRange, ScanPoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrError {
    #[error(transparent)]
    Level(#[from] NumericsError),
    #[error("invalid level r = {0}: (r−3) not divisible by 60, so the prism colors are not integers; smallest valid level is r = 63")]
    PrismDivisibility(i64),
    #[error("invalid level r = {r}: (r−3) not divisible by {period}, so edges {edges:?} get non-integer colors; smallest valid level is r = {smallest}")]
    NonIntegerColor {
        r: i64,
        period: i64,
        edges: Vec<EdgeId>,
        smallest: i64,
    },
    #[error("angles required: edge {0} has no dihedral angle")]
    MissingAngle(EdgeId),
    #[error("edge {0} has no color")]
    MissingColor(EdgeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("precision exhausted: relative error 2^{rel:.1} at {bits} bits")]
    Precision { rel: f64, bits: usize },
}

/// An odd level `r ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level(u32);

impl Level {
    pub fn new(r: i64) -> Result<Self, KrError> {
        check_level(r)?;
        Ok(Level(r as u32))
    }

    pub fn r(&self) -> u32 {
        self.0
    }

    /// Largest admissible doubled color.
    pub fn max_color(&self) -> u32 {
        self.0 - 2
    }
}

pub fn admissible(a: u32, b: u32, c: u32, level: Level) -> bool {
    a <= b + c
        && b <= a + c
        && c <= a + b
        && (a + b + c) % 2 == 0
        && a + b + c <= 2 * (level.r() - 2)
}

/// Six doubled colors in the layout `{a b e; d c f}`.
///
/// The triads are `(a,b,e)`, `(a,c,f)`, `(b,d,f)`, `(c,d,e)`. Seen as a colored
/// tetrahedral network on vertices 0..3, `a, b, e` sit on edges 01, 02, 03 and
/// `f, c, d` on edges 12, 13, 23.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SixJArgs {
    pub a: u32,
    pub b: u32,
    pub e: u32,
    pub d: u32,
    pub c: u32,
    pub f: u32,
}

const VERTEX_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl SixJArgs {
    pub fn new(a: u32, b: u32, e: u32, d: u32, c: u32, f: u32) -> Self {
        SixJArgs { a, b, e, d, c, f }
    }

    pub fn all(c: u32) -> Self {
        SixJArgs::new(c, c, c, c, c, c)
    }

    /// Colors on the network edges 01, 02, 03, 12, 13, 23.
    pub fn edge_colors(&self) -> [u32; 6] {
        [self.a, self.b, self.e, self.f, self.c, self.d]
    }

    pub fn from_edge_colors(c: [u32; 6]) -> Self {
        SixJArgs {
            a: c[0],
            b: c[1],
            e: c[2],
            f: c[3],
            c: c[4],
            d: c[5],
        }
    }

    /// Network on the complete graph of four faces whose edge between faces `i` and `j`
    /// is the edge of the polyhedron separating them. Network vertex `m` is the corner
    /// where the three faces other than `faces[m]` meet.
    pub fn from_face_quadruple(color: impl Fn(usize, usize) -> u32) -> Self {
        let mut c = [0u32; 6];
        for (k, &(m, n)) in VERTEX_PAIRS.iter().enumerate() {
            let rest: Vec<usize> = (0..4).filter(|&x| x != m && x != n).collect();
            c[k] = color(rest[0], rest[1]);
        }
        SixJArgs::from_edge_colors(c)
    }

    pub fn triads(&self) -> [(u32, u32, u32); 4] {
        [
            (self.a, self.b, self.e),
            (self.a, self.c, self.f),
            (self.b, self.d, self.f),
            (self.c, self.d, self.e),
        ]
    }

    pub fn admissible(&self, level: Level) -> bool {
        self.triads()
            .iter()
            .all(|&(x, y, z)| admissible(x, y, z, level))
    }

    /// Spin half-sums of the triads and of the three quadrilaterals bounding the Racah sum.
    pub(crate) fn racah_bounds(&self) -> ([u32; 4], [u32; 3]) {
        let t = self.triads().map(|(x, y, z)| (x + y + z) / 2);
        let SixJArgs { a, b, e, d, c, f } = *self;
        (
            t,
            [
                (a + b + c + d) / 2,
                (a + d + e + f) / 2,
                (b + c + e + f) / 2,
            ],
        )
    }

    /// The images under the 24 relabelings of the tetrahedron.
    pub fn symmetries(&self) -> Vec<SixJArgs> {
        let col = self.edge_colors();
        let at = |i: usize, j: usize| {
            let k = VERTEX_PAIRS
                .iter()
                .position(|&p| p == (i.min(j), i.max(j)))
                .unwrap();
            col[k]
        };
        crate::tetra::permutations4()
            .into_iter()
            .map(|p| SixJArgs::from_edge_colors(VERTEX_PAIRS.map(|(i, j)| at(p[i], p[j]))))
            .collect()
    }

    /// Smallest image under the symmetries, used as a cache key.
    pub fn canonical(&self) -> SixJArgs {
        self.symmetries().into_iter().min().unwrap()
    }
}

/// Number of negative factors among `[1], …, [n]`.
pub(crate) use precise::neg_count;

/// Log-magnitudes of `[n]!` for one level.
#[derive(Debug, Clone)]
pub struct QuantumTable {
    level: Level,
    log_fact: Vec<f64>,
}

impl QuantumTable {
    pub fn new(level: Level) -> Self {
        let r = level.r() as i64;
        let mut log_fact = Vec::with_capacity(r as usize);
        log_fact.push(0.0);
        for n in 1..r {
            let q = normalized_qint_unchecked(n, r).abs();
            log_fact.push(log_fact[n as usize - 1] + q.ln());
        }
        QuantumTable { level, log_fact }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// `[n]!` in log-domain form; zero once a factor `[r]` enters.
    pub fn factorial(&self, n: u32) -> LogComplex {
        match self.log_fact.get(n as usize) {
            Some(&l) => LogComplex::new(l, PI * (neg_count(n, self.level) % 2) as f64),
            None => LogComplex::ZERO,
        }
    }

    fn delta(&self, x: u32, y: u32, w: u32) -> LogComplex {
        let n = [(x + y - w) / 2, (x + w - y) / 2, (y + w - x) / 2];
        let d = (x + y + w) / 2 + 1;
        let lm =
            n.iter().map(|&k| self.log_fact[k as usize]).sum::<f64>() - self.log_fact[d as usize];
        let negs =
            n.iter().map(|&k| neg_count(k, self.level)).sum::<i64>() - neg_count(d, self.level);
        LogComplex::new(0.5 * lm, 0.5 * PI * negs as f64)
    }

    /// Racah–Wigner 6j-symbol. Inadmissible arguments give exactly zero.
    ///
    /// Each `Δ` is the square root of a ratio of quantum factorials taken as half its
    /// log-magnitude and half its phase, so all colors zero gives exactly 1.
    pub fn sixj(&self, args: &SixJArgs) -> LogComplex {
        if !args.admissible(self.level) {
            return LogComplex::ZERO;
        }
        let (t, q) = args.racah_bounds();
        let lo = *t.iter().max().unwrap();
        let hi = *q.iter().min().unwrap();
        let terms = (lo..=hi).map(|z| {
            let mut term = self.factorial(z + 1);
            for &ti in &t {
                term /= self.factorial(z - ti);
            }
            for &qj in &q {
                term /= self.factorial(qj - z);
            }
            if z % 2 == 1 {
                term.phase += PI;
            }
            term
        });
        let mut out = log_sum(terms);
        if out.is_zero() {
            return out;
        }
        for (x, y, w) in args.triads() {
            out *= self.delta(x, y, w);
        }
        out
    }

    /// The 6j-symbol times `i^{-s_v}` at each of its four vertices, `s_v` the vertex spin
    /// sum. This is the tetrahedral coefficient of the unitary normalization.
    pub fn unitary_tet(&self, args: &SixJArgs) -> LogComplex {
        let s = self.sixj(args);
        if s.is_zero() {
            return s;
        }
        let (t, _) = args.racah_bounds();
        s * LogComplex::new(0.0, -0.5 * PI * t.iter().sum::<u32>() as f64)
    }

    /// Loop value `(-1)^c [c+1]`.
    pub fn loop_value(&self, c: u32) -> f64 {
        let v = normalized_qint_unchecked(c as i64 + 1, self.level.r() as i64);
        if c % 2 == 0 {
            v
        } else {
            -v
        }
    }
}

/// The 6j-symbol evaluated with plain floating point products, for cross-checks at
/// small levels.
pub fn sixj_naive(args: &SixJArgs, level: Level) -> Complex64 {
    if !args.admissible(level) {
        return Complex64::new(0.0, 0.0);
    }
    let r = level.r() as i64;
    let fact = |n: u32| -> f64 {
        (1..=n as i64)
            .map(|m| normalized_qint_unchecked(m, r))
            .product()
    };
    let (t, q) = args.racah_bounds();
    let lo = *t.iter().max().unwrap();
    let hi = *q.iter().min().unwrap();
    let mut sum = 0.0;
    for z in lo..=hi {
        let den: f64 = t.iter().map(|&ti| fact(z - ti)).product::<f64>()
            * q.iter().map(|&qj| fact(qj - z)).product::<f64>();
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * fact(z + 1) / den;
    }
    let mut out = Complex64::new(sum, 0.0);
    for (x, y, w) in args.triads() {
        let n = [(x + y - w) / 2, (x + w - y) / 2, (y + w - x) / 2];
        let d = (x + y + w) / 2 + 1;
        let ratio = n.iter().map(|&k| fact(k)).product::<f64>() / fact(d);
        let negs = n.iter().map(|&k| neg_count(k, level)).sum::<i64>() - neg_count(d, level);
        out *= Complex64::i().powi(negs.rem_euclid(4) as i32) * ratio.abs().sqrt();
    }
    out
}
