use std::f64::consts::PI;

use hypervol::kr::*;
use hypervol::tetra::{angle_at_length_edge, EdgeParameter, TetrahedronShape};

fn sixj_deviation(r: i64) -> f64 {
    let ks: Vec<u32> = (0..=(r as u32 - 2) / 2).collect();
    max_deviation(&single_sixj_scan(r, &ks).unwrap()).unwrap()
}

#[test]
fn sixj_scan_deviation_shrinks() {
    let d101 = sixj_deviation(101);
    let d301 = sixj_deviation(301);
    assert!(d301 < d101, "{d101} {d301}");
    assert!(d301 < 0.35);
}

#[test]
fn sixj_scan_shape() {
    let pts = single_sixj_scan(101, &[0, 25, 40]).unwrap();
    // Spin 0 gives the symbol 1.
    assert_eq!(pts[0].value, Some(0.0));
    assert!(pts[0].reference.is_none());
    assert!((pts[1].angle - 100.0 * PI / 101.0).abs() < 1e-12);
    assert!((pts[1].reference.unwrap() - 3.66241).abs() < 1e-4);
    // Past the admissibility edge the symbol is zero.
    assert!(pts[2].value.is_none());
    assert!(single_sixj_scan(4, &[1])
        .unwrap_err()
        .to_string()
        .contains("r must be odd"));
}

#[test]
fn empty_truncated_sum_is_zero() {
    let level = Level::new(5).unwrap();
    let t = PreciseTable::new(level, 128);
    // Spin 2 at r = 5 already violates the level bound in every triad.
    assert!(doubly_truncated_sum(&t, 2, 1, JRange::All).is_zero());
    assert!(doubly_truncated_sum(&t, 2, 1, JRange::Odd).is_zero());
    assert!(!doubly_truncated_sum(&t, 0, 1, JRange::All).is_zero());
}

#[test]
fn truncated_sum_at_spin_zero() {
    // Only j = 0 survives, with weight [2l+1].
    let level = Level::new(31).unwrap();
    let t = PreciseTable::new(level, 128);
    for l in 0..5u32 {
        let v = doubly_truncated_sum(&t, 0, l, JRange::All).to_complex();
        let q = (2.0 * PI * (2 * l + 1) as f64 / 31.0).sin() / (2.0 * PI / 31.0).sin();
        assert!((v.re - q).abs() < 1e-12 && v.im.abs() < 1e-12, "{l}: {v}");
    }
}

// Frozen from the tetrahedron module by bisection on the perpendicular length.
const REFERENCE_RIGHT_ANGLE: f64 = 1.2686770080;

#[test]
fn truncated_reference_values() {
    let v = truncated_reference(PI / 2.0).unwrap();
    assert!((v - REFERENCE_RIGHT_ANGLE).abs() < 1e-9, "{v}");
    assert!(truncated_reference(0.0).is_none());
    assert!(truncated_reference(2.0 * PI / 3.0).is_none());
    let betas: Vec<f64> = (1..20).map(|i| i as f64 * 0.1).collect();
    let vols: Vec<f64> = betas
        .iter()
        .map(|&b| truncated_reference(b).unwrap())
        .collect();
    assert!(vols.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn truncated_reference_recovers_its_angle() {
    // Independent check: search the length by scanning instead of bisection.
    let shape = |l: f64| {
        let a = EdgeParameter::Angle(PI / 3.0);
        TetrahedronShape::new([a, a, a, EdgeParameter::Length(l), a, a])
    };
    let target = PI / 2.0;
    let (_, length) = (1..4000)
        .map(|i| i as f64 * 1e-3)
        .filter_map(|l| Some(((angle_at_length_edge(&shape(l), 4).ok()? - target).abs(), l)))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .unwrap();
    let v = hypervol::tetra::volume(&shape(length)).unwrap();
    assert!((v - REFERENCE_RIGHT_ANGLE).abs() < 1e-3);
}

#[test]
fn truncated_scan_points() {
    let r = 195;
    let ls = [10u32, 24, 40];
    let pts = doubly_truncated_scan(r, (r as u32 - 3) / 3, &ls, JRange::All).unwrap();
    for (p, l) in pts.iter().zip(ls) {
        assert_eq!(p.k, l);
        assert!((p.angle - 4.0 * PI * l as f64 / 195.0).abs() < 1e-12);
        assert!(p.value.is_some());
    }
    assert!(pts[0].reference.is_some());
    // β beyond 2π/3 has no reference.
    assert!(pts[2].reference.is_none());
}
