//! Generalised hyperbolic tetrahedra.
//!
//! Faces are numbered 1..4 (0..3 internally). Edge slot `k` (1-based) carries the
//! parameter `a_k` of the face pair: a1 (1,2), a2 (1,3), a3 (2,3), a4 (3,4), a5 (2,4),
//! a6 (1,4). Opposite slots are (1,4), (2,5), (3,6).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::dilog_unchecked;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TetraError {
    #[error("unsupported truncation pattern: length edges at slots {0:?}")]
    UnsupportedType(Vec<usize>),
    #[error("invalid parameter at slot {slot}: {reason}")]
    InvalidParameter { slot: usize, reason: String },
    #[error("shape is not realizable: {0}")]
    Unrealizable(String),
    #[error("degenerate quadratic: q2 vanishes")]
    DegenerateQuadratic,
    #[error("dilogarithm argument of term {0} lies on the branch cut")]
    BranchCut(usize),
    #[error("slot {0} is not a length edge")]
    NotLengthEdge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum EdgeParameter {
    /// Dihedral angle in radians, in (0, π).
    Angle(f64),
    /// Length of the common perpendicular between two ultra-parallel faces.
    Length(f64),
}

impl EdgeParameter {
    pub fn is_length(&self) -> bool {
        matches!(self, EdgeParameter::Length(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            EdgeParameter::Angle(v) | EdgeParameter::Length(v) => v,
        }
    }

    /// `e^{iα}` for angles, `e^{-ℓ}` for lengths.
    pub fn encoded(&self) -> Complex64 {
        match *self {
            EdgeParameter::Angle(a) => Complex64::from_polar(1.0, a),
            EdgeParameter::Length(l) => Complex64::new((-l).exp(), 0.0),
        }
    }

    /// `-(a + 1/a)/2`, the Gram entry.
    pub fn gram_entry(&self) -> f64 {
        match *self {
            EdgeParameter::Angle(a) => -a.cos(),
            EdgeParameter::Length(l) => -l.cosh(),
        }
    }
}

/// Slot (0-based) of the face pair (i, j), faces 0-based.
pub const fn slot_of_pair(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        (2, 3) => 3,
        (1, 3) => 4,
        (0, 3) => 5,
        _ => usize::MAX,
    }
}

/// Face pair (0-based) of a 0-based slot.
pub const PAIR_OF_SLOT: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (2, 3), (1, 3), (0, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetrahedronShape {
    pub params: [EdgeParameter; 6],
}

impl TetrahedronShape {
    pub fn new(params: [EdgeParameter; 6]) -> Self {
        TetrahedronShape { params }
    }

    pub fn regular(alpha: f64) -> Self {
        TetrahedronShape {
            params: [EdgeParameter::Angle(alpha); 6],
        }
    }

    /// 1-based slots holding lengths.
    pub fn length_slots(&self) -> Vec<usize> {
        (0..6)
            .filter(|&k| self.params[k].is_length())
            .map(|k| k + 1)
            .collect()
    }

    /// Relabel faces: face `i` of `self` becomes face `perm[i]` of the result.
    pub fn relabeled(&self, perm: &[usize; 4]) -> TetrahedronShape {
        let mut params = self.params;
        for (k, &(i, j)) in PAIR_OF_SLOT.iter().enumerate() {
            params[slot_of_pair(perm[i], perm[j])] = self.params[k];
        }
        TetrahedronShape { params }
    }

    fn check_values(&self) -> Result<(), TetraError> {
        for (k, p) in self.params.iter().enumerate() {
            match *p {
                EdgeParameter::Angle(a) if !(a > 0.0 && a < PI) => {
                    return Err(TetraError::InvalidParameter {
                        slot: k + 1,
                        reason: format!("angle {a} outside (0, π)"),
                    })
                }
                EdgeParameter::Length(l) if !(l > 0.0 && l.is_finite()) => {
                    return Err(TetraError::InvalidParameter {
                        slot: k + 1,
                        reason: format!("length {l} is not positive"),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TruncationType {
    Mild,
    P4,
    P14,
    P56,
    P456,
    P2356,
}

impl TruncationType {
    pub const ALL: [TruncationType; 6] = [
        TruncationType::Mild,
        TruncationType::P4,
        TruncationType::P14,
        TruncationType::P56,
        TruncationType::P456,
        TruncationType::P2356,
    ];

    /// Canonical 1-based length slots.
    pub fn length_slots(&self) -> &'static [usize] {
        match self {
            TruncationType::Mild => &[],
            TruncationType::P4 => &[4],
            TruncationType::P14 => &[1, 4],
            TruncationType::P56 => &[5, 6],
            TruncationType::P456 => &[4, 5, 6],
            TruncationType::P2356 => &[2, 3, 5, 6],
        }
    }

    /// The `t|a…|p…` symbol of the canonical labeling.
    pub fn symbol(&self) -> String {
        let lengths = self.length_slots();
        let angles: String = (1..=6)
            .filter(|k| !lengths.contains(k))
            .map(|k| k.to_string())
            .collect();
        let ps: String = lengths.iter().map(|k| k.to_string()).collect();
        if ps.is_empty() {
            format!("t|a{angles}")
        } else {
            format!("t|a{angles}|p{ps}")
        }
    }
}

impl fmt::Display for TruncationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: TruncationType,
    /// Face `i` of the input is face `face_perm[i]` of `canonical`.
    pub face_perm: [usize; 4],
    pub canonical: TetrahedronShape,
}

impl Classification {
    /// Canonical 0-based slot of an input 0-based slot.
    pub fn canonical_slot(&self, slot: usize) -> usize {
        let (i, j) = PAIR_OF_SLOT[slot];
        slot_of_pair(self.face_perm[i], self.face_perm[j])
    }
}

pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&x| seen[x] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Type of a set of length slots (1-based), with the face permutation that brings it to
/// canonical position.
pub fn classify_slots(lengths: &[usize]) -> Result<(TruncationType, [usize; 4]), TetraError> {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    for kind in TruncationType::ALL {
        if kind.length_slots().len() != sorted.len() {
            continue;
        }
        for perm in permutations4() {
            let mut mapped: Vec<usize> = sorted
                .iter()
                .map(|&s| {
                    let (i, j) = PAIR_OF_SLOT[s - 1];
                    slot_of_pair(perm[i], perm[j]) + 1
                })
                .collect();
            mapped.sort_unstable();
            if mapped == kind.length_slots() {
                return Ok((kind, perm));
            }
        }
    }
    Err(TetraError::UnsupportedType(sorted))
}

pub fn classify(shape: &TetrahedronShape) -> Result<Classification, TetraError> {
    let (kind, face_perm) = classify_slots(&shape.length_slots())?;
    Ok(Classification {
        kind,
        face_perm,
        canonical: shape.relabeled(&face_perm),
    })
}

pub fn gram_matrix(shape: &TetrahedronShape) -> Matrix4<f64> {
    let mut g = Matrix4::identity();
    for (k, &(i, j)) in PAIR_OF_SLOT.iter().enumerate() {
        let v = shape.params[k].gram_entry();
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn is_hyperbolic(&self) -> bool {
        self.positive == 3 && self.negative == 1
    }

    pub fn is_euclidean(&self) -> bool {
        self.positive == 3 && self.zero == 1
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero > 0 {
            write!(f, "({},{},{})", self.positive, self.negative, self.zero)
        } else {
            write!(f, "({},{})", self.positive, self.negative)
        }
    }
}

pub const SIGNATURE_TOL: f64 = 1e-9;

pub fn gram_signature(shape: &TetrahedronShape) -> Signature {
    let eig = SymmetricEigen::new(gram_matrix(shape));
    let mut s = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for &l in eig.eigenvalues.iter() {
        if l > SIGNATURE_TOL {
            s.positive += 1;
        } else if l < -SIGNATURE_TOL {
            s.negative += 1;
        } else {
            s.zero += 1;
        }
    }
    s
}

/// Signature test plus the truncation consistency of each length edge: its two endpoint
/// vertices must be ultra-ideal with intersecting polar planes, and no angle edge may join
/// two ultra-ideal vertices whose polar planes intersect.
pub fn check_realizable(shape: &TetrahedronShape) -> Result<Signature, TetraError> {
    shape.check_values()?;
    let sig = gram_signature(shape);
    if sig.is_euclidean() {
        return Ok(sig);
    }
    if !sig.is_hyperbolic() {
        return Err(TetraError::Unrealizable(format!(
            "Gram signature {sig} is not (3,1)"
        )));
    }
    let g = gram_matrix(shape);
    let ginv = g
        .try_inverse()
        .ok_or_else(|| TetraError::Unrealizable("singular Gram matrix".into()))?;
    let ultra = |v: usize| ginv[(v, v)] > SIGNATURE_TOL;
    for (k, &(i, j)) in PAIR_OF_SLOT.iter().enumerate() {
        // The edge between faces i and j joins the vertices opposite the other two faces.
        let mut others = (0..4).filter(|&f| f != i && f != j);
        let (u, v) = (others.next().unwrap(), others.next().unwrap());
        let both_ultra = ultra(u) && ultra(v);
        let cut = both_ultra && {
            let c = ginv[(u, v)].abs() / (ginv[(u, u)] * ginv[(v, v)]).sqrt();
            c < 1.0
        };
        if shape.params[k].is_length() != cut {
            let what = if shape.params[k].is_length() {
                "polar planes at a length edge do not intersect"
            } else {
                "polar planes at an angle edge intersect"
            };
            return Err(TetraError::Unrealizable(format!("slot {}: {what}", k + 1)));
        }
    }
    Ok(sig)
}

const POS_MONOMIALS: [&[usize]; 4] = [&[], &[1, 2, 4, 5], &[1, 3, 4, 6], &[2, 3, 5, 6]];
const NEG_MONOMIALS: [&[usize]; 4] = [&[1, 2, 3], &[1, 5, 6], &[2, 4, 6], &[3, 4, 5]];

/// One term `c·Li2(w)` of 𝒰, with `w = σ·M·z`.
#[derive(Debug, Clone, Copy)]
struct Term {
    coeff: f64,
    base: Complex64,
    mask: [bool; 6],
}

fn terms(a: &[Complex64; 6]) -> [Term; 8] {
    let mk = |slots: &[usize], sign: f64| {
        let mut base = Complex64::new(sign, 0.0);
        let mut mask = [false; 6];
        for &s in slots {
            base *= a[s - 1];
            mask[s - 1] = true;
        }
        (base, mask)
    };
    let mut out = [Term {
        coeff: 0.0,
        base: Complex64::new(0.0, 0.0),
        mask: [false; 6],
    }; 8];
    for (t, slots) in POS_MONOMIALS.iter().enumerate() {
        let (base, mask) = mk(slots, 1.0);
        out[t] = Term {
            coeff: 1.0,
            base,
            mask,
        };
    }
    for (t, slots) in NEG_MONOMIALS.iter().enumerate() {
        let (base, mask) = mk(slots, -1.0);
        out[4 + t] = Term {
            coeff: -1.0,
            base,
            mask,
        };
    }
    out
}

fn encoded(shape: &TetrahedronShape) -> [Complex64; 6] {
    let mut a = [Complex64::new(0.0, 0.0); 6];
    for k in 0..6 {
        a[k] = shape.params[k].encoded();
    }
    a
}

/// Logarithm with `log 0` replaced by a large negative real, so that ideal-vertex
/// singularities only touch imaginary parts of the quantities built on it.
fn safe_ln(w: Complex64) -> Complex64 {
    if w.norm() < 1e-300 {
        Complex64::new(-745.0, 0.0)
    } else {
        w.ln()
    }
}

fn minus_log_one_minus(w: Complex64) -> Complex64 {
    -safe_ln(Complex64::new(1.0, 0.0) - w)
}

/// The eight-term dilogarithm combination 𝒰(a1,…,a6, z).
pub fn u_function(shape: &TetrahedronShape, z: Complex64) -> Result<Complex64, TetraError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, term) in terms(&encoded(shape)).iter().enumerate() {
        let w = term.base * z;
        if w.im == 0.0 && w.re > 1.0 {
            return Err(TetraError::BranchCut(t + 1));
        }
        acc += term.coeff * dilog_unchecked(w);
    }
    Ok(acc)
}

fn u_unchecked(ts: &[Term; 8], z: Complex64) -> Complex64 {
    ts.iter()
        .map(|t| t.coeff * dilog_unchecked(t.base * z))
        .sum()
}

/// `z·∂𝒰/∂z`.
pub fn z_du_dz(shape: &TetrahedronShape, z: Complex64) -> Complex64 {
    z_du_dz_terms(&terms(&encoded(shape)), z)
}

fn z_du_dz_terms(ts: &[Term; 8], z: Complex64) -> Complex64 {
    ts.iter()
        .map(|t| t.coeff * minus_log_one_minus(t.base * z))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub q0: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

pub fn quadratic_coefficients(shape: &TetrahedronShape) -> Quadratic {
    let [a1, a2, a3, a4, a5, a6] = encoded(shape);
    let one = Complex64::new(1.0, 0.0);
    let p = a1 * a2 * a3 * a4 * a5 * a6;
    let q0 = one
        + a1 * a2 * a3
        + a1 * a5 * a6
        + a2 * a4 * a6
        + a3 * a4 * a5
        + a1 * a2 * a4 * a5
        + a1 * a3 * a4 * a6
        + a2 * a3 * a5 * a6;
    let d = |x: Complex64| x - one / x;
    let q1 = -p * (d(a1) * d(a4) + d(a2) * d(a5) + d(a3) * d(a6));
    let q2 = p
        * (a1 * a4
            + a2 * a5
            + a3 * a6
            + a1 * a2 * a6
            + a1 * a3 * a5
            + a2 * a3 * a4
            + a4 * a5 * a6
            + p);
    Quadratic { q0, q1, q2 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZRoots {
    pub minus: Complex64,
    pub plus: Complex64,
    /// Set when the discriminant vanishes (flat, Euclidean shape).
    pub double_root: bool,
}

/// Roots `z∓ = (-q1 ∓ √(q1² - 4q0q2)) / (2q2)`.
///
/// The square root is the analytic one: `q1² - 4q0q2 = 16·det G·(a1⋯a6)²`, so the root is
/// taken as `-4·(a1⋯a6)·√det G`, with `√det G = i√|det G|` on hyperbolic shapes.
pub fn z_roots(shape: &TetrahedronShape) -> Result<ZRoots, TetraError> {
    let q = quadratic_coefficients(shape);
    if q.q2.norm() < 1e-300 {
        return Err(TetraError::DegenerateQuadratic);
    }
    let a = encoded(shape);
    let p: Complex64 = a.iter().product();
    let det = gram_matrix(shape).determinant();
    let sqrt_det = if det < 0.0 {
        Complex64::new(0.0, (-det).sqrt())
    } else {
        Complex64::new(det.sqrt(), 0.0)
    };
    let d = -4.0 * p * sqrt_det;
    Ok(ZRoots {
        minus: (-q.q1 - d) / (2.0 * q.q2),
        plus: (-q.q1 + d) / (2.0 * q.q2),
        double_root: det == 0.0,
    })
}

/// `𝒰 - z·𝒰_z·log z` at a root, with `z·𝒰_z` snapped to its exact value `2πiN`.
fn v_part(ts: &[Term; 8], z: Complex64) -> Complex64 {
    let lz = z.ln();
    let u = u_unchecked(ts, z);
    if lz.norm() < 1e-10 {
        return u;
    }
    let n = (z_du_dz_terms(ts, z).im / (2.0 * PI)).round();
    u - Complex64::new(0.0, 2.0 * PI * n) * lz
}

/// 𝒱 = (i/4)[(𝒰 - z𝒰_z log z)(z₋) - (same)(z₊)].
pub fn v_function(shape: &TetrahedronShape) -> Result<Complex64, TetraError> {
    let roots = z_roots(shape)?;
    let ts = terms(&encoded(shape));
    Ok(Complex64::new(0.0, 0.25) * (v_part(&ts, roots.minus) - v_part(&ts, roots.plus)))
}

/// Sum over the terms containing slot k of `c·(-log(1-w))`, i.e. `a_k ∂𝒰/∂a_k` at fixed z.
fn g_slot(ts: &[Term; 8], z: Complex64, k: usize) -> Complex64 {
    ts.iter()
        .filter(|t| t.mask[k])
        .map(|t| t.coeff * minus_log_one_minus(t.base * z))
        .sum()
}

/// `a_k·∂𝒱/∂a_k` for all six slots (0-based index), by the envelope argument.
pub fn log_derivatives(shape: &TetrahedronShape) -> Result<[Complex64; 6], TetraError> {
    let roots = z_roots(shape)?;
    let ts = terms(&encoded(shape));
    Ok(log_derivatives_at(&ts, &roots))
}

fn log_derivatives_at(ts: &[Term; 8], roots: &ZRoots) -> [Complex64; 6] {
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (k, o) in out.iter_mut().enumerate() {
        *o = Complex64::new(0.0, 0.25) * (g_slot(ts, roots.minus, k) - g_slot(ts, roots.plus, k));
    }
    out
}

/// Central finite-difference version of [`log_derivatives`], Richardson-extrapolated.
/// Used only to cross-check the analytic derivatives.
pub fn log_derivatives_fd(shape: &TetrahedronShape, h: f64) -> Result<[Complex64; 6], TetraError> {
    let roots0 = z_roots(shape)?;
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for k in 0..6 {
        // Differentiate in u = log a_k; for angles u = iα, for lengths u = -ℓ.
        let eval = |step: f64| -> Result<Complex64, TetraError> {
            let mut s = *shape;
            s.params[k] = match s.params[k] {
                EdgeParameter::Angle(a) => EdgeParameter::Angle(a + step),
                EdgeParameter::Length(l) => EdgeParameter::Length(l - step),
            };
            // Track the same root branches as the unperturbed shape.
            let ts = terms(&encoded(&s));
            let r = z_roots(&s)?;
            let pick = |target: Complex64| {
                if (r.minus - target).norm() <= (r.plus - target).norm() {
                    r.minus
                } else {
                    r.plus
                }
            };
            let zm = pick(roots0.minus);
            let zp = pick(roots0.plus);
            Ok(Complex64::new(0.0, 0.25) * (v_part(&ts, zm) - v_part(&ts, zp)))
        };
        let d =
            |h: f64| -> Result<Complex64, TetraError> { Ok((eval(h)? - eval(-h)?) / (2.0 * h)) };
        let d1 = d(h)?;
        let d2 = d(h / 2.0)?;
        let rich = (4.0 * d2 - d1) / 3.0;
        out[k] = match shape.params[k] {
            // a ∂/∂a = ∂/∂u, and u = iα so ∂/∂u = -i ∂/∂α.
            EdgeParameter::Angle(_) => Complex64::new(0.0, -1.0) * rich,
            EdgeParameter::Length(_) => rich,
        };
    }
    Ok(out)
}

fn reduce_angle(x: f64) -> f64 {
    x.rem_euclid(PI)
}

/// Everything the gluing solver needs from one tetrahedron, in the caller's slot labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TetraEvaluation {
    pub kind: TruncationType,
    pub volume: f64,
    /// Angles at length slots (0-based index), `None` at angle slots.
    pub length_angles: [Option<f64>; 6],
    /// `∂α_j/∂ℓ_k` between length slots j, k (0-based).
    pub angle_jacobian: [[f64; 6]; 6],
    pub signature: Signature,
    /// Angles at length slots before reduction mod π, i.e. `2·Re(a_k ∂𝒱/∂a_k)`.
    pub raw_angles: [Option<f64>; 6],
}

impl TetraEvaluation {
    /// `Vol + ½ Σ ℓ_k α_k` over length slots; its ℓ-gradient is `α/2`.
    pub fn dual_volume(&self, shape: &TetrahedronShape) -> f64 {
        let mut w = self.volume;
        for k in 0..6 {
            if let (EdgeParameter::Length(l), Some(a)) = (shape.params[k], self.length_angles[k]) {
                w += 0.5 * l * a;
            }
        }
        w
    }
}

/// Volume, length-edge angles and their length derivatives in one pass.
pub fn evaluate(shape: &TetrahedronShape) -> Result<TetraEvaluation, TetraError> {
    let cls = classify(shape)?;
    let signature = check_realizable(shape)?;
    let canon = cls.canonical;
    let roots = z_roots(&canon)?;
    let ts = terms(&encoded(&canon));
    let v = Complex64::new(0.0, 0.25) * (v_part(&ts, roots.minus) - v_part(&ts, roots.plus));
    let f = log_derivatives_at(&ts, &roots);

    let mut volume = -v.re;
    for &s in cls.kind.length_slots() {
        volume -= canon.params[s - 1].value() * f[s - 1].re;
    }

    let mut length_angles = [None; 6];
    let mut raw_angles = [None; 6];
    let mut angle_jacobian = [[0.0; 6]; 6];
    let canon_jac = angle_jacobian_canonical(&ts, &roots, cls.kind.length_slots());
    for j in 0..6 {
        if !shape.params[j].is_length() {
            continue;
        }
        let cj = cls.canonical_slot(j);
        let raw = 2.0 * f[cj].re;
        raw_angles[j] = Some(raw);
        length_angles[j] = Some(reduce_angle(raw));
        for k in 0..6 {
            if shape.params[k].is_length() {
                angle_jacobian[j][k] = canon_jac[cj][cls.canonical_slot(k)];
            }
        }
    }
    Ok(TetraEvaluation {
        kind: cls.kind,
        volume: if signature.is_euclidean() {
            volume.max(0.0)
        } else {
            volume
        },
        length_angles,
        angle_jacobian,
        signature,
        raw_angles,
    })
}

/// `∂α_j/∂ℓ_k` in canonical labels, differentiating through the moving roots.
fn angle_jacobian_canonical(ts: &[Term; 8], roots: &ZRoots, lengths: &[usize]) -> [[f64; 6]; 6] {
    let one = Complex64::new(1.0, 0.0);
    // D_jk(z) = Σ_{t∋j,k} c w/(1-w) + [Σ_{t∋j} c w/(z(1-w))]·dz/du_k,
    // dz/du_k = -(Σ_{t∋k} c w/(1-w)) / (Σ_t c w/(z(1-w))).
    // A root at w = 1 (ideal vertex) is pinned: dz/du_k is the limit of the ratio, carried
    // by the singular terms alone, and vanishes when their coefficients cancel.
    let d_matrix = |z: Complex64| {
        let singular: Vec<bool> = ts
            .iter()
            .map(|t| (one - t.base * z).norm() < 1e-13)
            .collect();
        let frac: Vec<Complex64> = ts
            .iter()
            .zip(&singular)
            .map(|(t, &sing)| {
                let w = t.base * z;
                if sing {
                    Complex64::new(0.0, 0.0)
                } else {
                    t.coeff * w / (one - w)
                }
            })
            .collect();
        let dh_dz: Complex64 = frac.iter().sum::<Complex64>() / z;
        let sing_total: f64 = ts
            .iter()
            .zip(&singular)
            .filter(|(_, &s)| s)
            .map(|(t, _)| t.coeff)
            .sum();
        let mut dz_du = [Complex64::new(0.0, 0.0); 6];
        for &k in lengths {
            if singular.iter().any(|&s| s) {
                if sing_total.abs() < 0.5 {
                    continue;
                }
                let sk: f64 = ts
                    .iter()
                    .zip(&singular)
                    .filter(|(t, &s)| s && t.mask[k - 1])
                    .map(|(t, _)| t.coeff)
                    .sum();
                dz_du[k - 1] = -z * sk / sing_total;
            } else {
                let s: Complex64 = ts
                    .iter()
                    .zip(&frac)
                    .filter(|(t, _)| t.mask[k - 1])
                    .map(|(_, f)| *f)
                    .sum();
                dz_du[k - 1] = -s / dh_dz;
            }
        }
        let mut d = [[Complex64::new(0.0, 0.0); 6]; 6];
        for &j in lengths {
            let dgj_dz: Complex64 = ts
                .iter()
                .zip(&frac)
                .filter(|(t, _)| t.mask[j - 1])
                .map(|(_, f)| *f)
                .sum::<Complex64>()
                / z;
            for &k in lengths {
                let direct: Complex64 = ts
                    .iter()
                    .zip(&frac)
                    .filter(|(t, _)| t.mask[j - 1] && t.mask[k - 1])
                    .map(|(_, f)| *f)
                    .sum();
                d[j - 1][k - 1] = direct + dgj_dz * dz_du[k - 1];
            }
        }
        d
    };
    let dm = d_matrix(roots.minus);
    let dp = d_matrix(roots.plus);
    let mut out = [[0.0; 6]; 6];
    for &j in lengths {
        for &k in lengths {
            let df_du = Complex64::new(0.0, 0.25) * (dm[j - 1][k - 1] - dp[j - 1][k - 1]);
            // α = 2 Re F and d/dℓ = -d/du.
            out[j - 1][k - 1] = -2.0 * df_du.re;
        }
    }
    out
}

/// Volume by truncation type.
pub fn volume(shape: &TetrahedronShape) -> Result<f64, TetraError> {
    Ok(evaluate(shape)?.volume)
}

/// Dihedral angle of the tetrahedron along the common perpendicular at a length slot
/// (1-based), reduced into [0, π).
pub fn angle_at_length_edge(shape: &TetrahedronShape, slot: usize) -> Result<f64, TetraError> {
    if slot == 0 || slot > 6 || !shape.params[slot - 1].is_length() {
        return Err(TetraError::NotLengthEdge(slot));
    }
    Ok(evaluate(shape)?.length_angles[slot - 1].unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_table_round_trips() {
        for (k, &(i, j)) in PAIR_OF_SLOT.iter().enumerate() {
            assert_eq!(slot_of_pair(i, j), k);
            assert_eq!(slot_of_pair(j, i), k);
        }
    }

    #[test]
    fn symbols() {
        assert_eq!(TruncationType::P4.symbol(), "t|a12356|p4");
        assert_eq!(TruncationType::P2356.symbol(), "t|a14|p2356");
        assert_eq!(TruncationType::Mild.symbol(), "t|a123456");
    }

    #[test]
    fn unsupported_patterns() {
        // Three lengths at one vertex: slots (1,2),(1,3),(2,3) = 1,2,3.
        assert!(classify_slots(&[1, 2, 3]).is_err());
        assert!(classify_slots(&[1, 2, 3, 4, 5]).is_err());
        assert!(classify_slots(&[1, 2, 3, 4, 5, 6]).is_err());
        assert_eq!(classify_slots(&[2, 5]).unwrap().0, TruncationType::P14);
        assert_eq!(classify_slots(&[1, 2]).unwrap().0, TruncationType::P56);
    }
}
