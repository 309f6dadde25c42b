use std::f64::consts::PI;

use hypervol::numerics::{dilog, lobachevsky};
use hypervol::tetra::*;
use num_complex::Complex64;
use proptest::prelude::*;
use EdgeParameter::{Angle as A, Length as L};

/// `-∫_0^θ log(2 sin t) dt` with the logarithmic singularity integrated in closed form
/// and the smooth remainder by composite Simpson.
fn lobachevsky_quadrature(theta: f64) -> f64 {
    let smooth = |t: f64| if t == 0.0 { 0.0 } else { (t.sin() / t).ln() };
    let n = 20_000;
    let h = theta / n as f64;
    let mut s = smooth(0.0) + smooth(theta);
    for i in 1..n {
        s += smooth(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let remainder = s * h / 3.0;
    -(theta * 2f64.ln() + theta * theta.ln() - theta + remainder)
}

// Volumes from an independent oracle: the hyperbolic volume form integrated over the
// truncated polytope in the Klein model with Gauss–Legendre quadrature. The last column
// is the change between two quadrature refinements, used as the tolerance scale.
const ORACLE: [(&str, [EdgeParameter; 6], f64, f64); 12] = [
    (
        "Mild",
        [A(0.342), A(0.525), A(0.847), A(0.505), A(1.26), A(1.31)],
        2.2151800734,
        2.9e-05,
    ),
    (
        "Mild",
        [A(1.274), A(0.786), A(0.571), A(0.997), A(0.7), A(1.775)],
        0.8984541848,
        1.0e-09,
    ),
    (
        "P4",
        [A(0.584), A(0.694), A(1.653), L(0.476), A(0.683), A(0.328)],
        2.2887750269,
        2.0e-05,
    ),
    (
        "P4",
        [A(1.042), A(1.937), A(1.817), L(0.211), A(0.641), A(0.533)],
        1.0234408271,
        1.0e-07,
    ),
    (
        "P14",
        [L(0.42), A(0.243), A(1.453), L(0.572), A(0.816), A(0.697)],
        2.5562164338,
        2.9e-05,
    ),
    (
        "P14",
        [L(0.452), A(1.226), A(0.801), L(0.696), A(0.563), A(1.109)],
        2.3332511311,
        8.4e-08,
    ),
    (
        "P56",
        [A(1.134), A(1.277), A(0.276), A(0.634), L(0.176), L(0.111)],
        2.6560312402,
        4.1e-04,
    ),
    (
        "P56",
        [A(1.26), A(0.464), A(1.644), A(0.883), L(0.674), L(0.892)],
        1.4712131536,
        2.3e-06,
    ),
    (
        "P456",
        [A(0.669), A(0.985), A(0.443), L(1.084), L(0.241), L(0.491)],
        2.8929804072,
        6.4e-05,
    ),
    (
        "P456",
        [A(0.593), A(0.437), A(1.188), L(0.376), L(1.152), L(0.492)],
        2.7336393027,
        8.9e-06,
    ),
    (
        "P2356",
        [A(1.942), L(0.891), L(0.223), A(1.316), L(0.393), L(0.629)],
        1.8938952979,
        1.5e-05,
    ),
    (
        "P2356",
        [A(0.574), L(0.498), L(0.959), A(1.11), L(0.127), L(1.383)],
        2.3220461427,
        4.8e-04,
    ),
];

#[test]
fn matches_quadrature_oracle_for_every_type() {
    for (kind, params, expected, spread) in ORACLE {
        let shape = TetrahedronShape::new(params);
        let ev = evaluate(&shape).unwrap();
        assert_eq!(format!("{:?}", ev.kind), kind);
        let tol = 3.0 * spread + 1e-8;
        assert!(
            (ev.volume - expected).abs() <= tol,
            "{kind} {params:?}: {} vs {expected}",
            ev.volume
        );
    }
}

#[test]
fn prism_tetrahedron() {
    let shape = TetrahedronShape::new([
        A(0.4 * PI),
        A(PI / 2.0),
        A(PI / 2.0),
        L(0.5067207574113386),
        A(PI / 3.0),
        A(PI / 3.0),
    ]);
    let ev = evaluate(&shape).unwrap();
    assert_eq!(ev.kind, TruncationType::P4);
    assert!((ev.volume - 0.52639).abs() < 1e-5, "{}", ev.volume);
    // Five copies close up around the perpendicular.
    assert!((ev.length_angles[3].unwrap() - 0.4 * PI).abs() < 1e-8);
}

#[test]
fn regular_ideal_tetrahedron() {
    let v = volume(&TetrahedronShape::regular(PI / 3.0)).unwrap();
    let oracle = 3.0 * lobachevsky_quadrature(PI / 3.0);
    assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    assert!((v - 1.0149416064096536).abs() < 1e-9);
}

#[test]
fn regular_family_limits() {
    let flat = volume(&TetrahedronShape::regular((1.0f64 / 3.0).acos())).unwrap();
    assert!(flat.abs() <= 1e-6, "{flat}");
    let sig = gram_signature(&TetrahedronShape::regular((1.0f64 / 3.0).acos()));
    assert!(sig.is_euclidean());
    let octahedral = volume(&TetrahedronShape::regular(1e-6)).unwrap();
    assert!((octahedral - 3.66386).abs() < 1e-3, "{octahedral}");
}

#[test]
fn lobachevsky_matches_quadrature() {
    for theta in [0.1, 0.5, PI / 6.0, PI / 4.0, PI / 3.0, 1.2, 1.5] {
        let q = lobachevsky_quadrature(theta);
        assert!((lobachevsky(theta) - q).abs() < 1e-11, "{theta}");
    }
    assert!((lobachevsky(PI / 6.0 + PI) - lobachevsky(PI / 6.0)).abs() < 1e-14);
}

#[test]
fn dilog_matches_power_series() {
    let series = |z: Complex64| {
        (1..400)
            .map(|k| z.powi(k) / (k as f64 * k as f64))
            .sum::<Complex64>()
    };
    for z in [
        Complex64::new(0.3, 0.2),
        Complex64::new(-0.45, 0.1),
        Complex64::new(0.1, -0.6),
        Complex64::new(0.55, 0.3),
    ] {
        assert!((dilog(z).unwrap() - series(z)).norm() < 1e-13, "{z}");
    }
    // Outside the disk through the inversion formula, checked against the reflected series.
    let z = Complex64::new(1.8, 0.7);
    let w = 1.0 / z;
    let l = (-z).ln();
    let expected = -PI * PI / 6.0 - 0.5 * l * l - series(w);
    assert!((dilog(z).unwrap() - expected).norm() < 1e-12);
}

#[test]
fn analytic_derivatives_match_differences() {
    for (_, params, _, _) in ORACLE {
        let shape = TetrahedronShape::new(params);
        let a = log_derivatives(&shape).unwrap();
        let f = log_derivatives_fd(&shape, 1e-4).unwrap();
        for k in 0..6 {
            assert!((a[k] - f[k]).norm() < 1e-7, "{params:?} slot {}", k + 1);
        }
    }
}

#[test]
fn length_angles_are_twice_the_dual_gradient() {
    for (_, params, _, _) in ORACLE {
        let shape = TetrahedronShape::new(params);
        let ev = evaluate(&shape).unwrap();
        for k in 0..6 {
            let EdgeParameter::Length(l) = params[k] else {
                continue;
            };
            let w = |x: f64| {
                let mut s = shape;
                s.params[k] = L(x);
                let e = evaluate(&s).unwrap();
                e.dual_volume(&s)
            };
            let h = 1e-5;
            let grad = (w(l + h) - w(l - h)) / (2.0 * h);
            assert!(
                (2.0 * grad - ev.length_angles[k].unwrap()).abs() < 1e-6,
                "{params:?} slot {}",
                k + 1
            );
        }
    }
}

#[test]
fn angle_jacobian_matches_differences() {
    for (_, params, _, _) in ORACLE {
        let shape = TetrahedronShape::new(params);
        let ev = evaluate(&shape).unwrap();
        for k in 0..6 {
            let EdgeParameter::Length(l) = params[k] else {
                continue;
            };
            let at = |x: f64| {
                let mut s = shape;
                s.params[k] = L(x);
                evaluate(&s).unwrap().length_angles
            };
            let h = 1e-6;
            let (up, dn) = (at(l + h), at(l - h));
            for j in 0..6 {
                if let (Some(u), Some(d)) = (up[j], dn[j]) {
                    let fd = (u - d) / (2.0 * h);
                    assert!(
                        (fd - ev.angle_jacobian[j][k]).abs() < 1e-5,
                        "{params:?} d{}/d{}",
                        j + 1,
                        k + 1
                    );
                }
            }
        }
    }
}

#[test]
fn unsupported_and_unrealizable_shapes() {
    let three = TetrahedronShape::new([L(1.0), L(1.0), L(1.0), A(1.0), A(1.0), A(1.0)]);
    assert!(matches!(
        volume(&three),
        Err(TetraError::UnsupportedType(_))
    ));
    let spherical = TetrahedronShape::regular(1.4);
    assert!(matches!(
        volume(&spherical),
        Err(TetraError::Unrealizable(_))
    ));
    let bad = TetrahedronShape::regular(3.5);
    assert!(matches!(
        volume(&bad),
        Err(TetraError::InvalidParameter { .. })
    ));
}

proptest! {
    #[test]
    fn relabeling_preserves_volume(idx in 0usize..12, p in 0usize..24) {
        let shape = TetrahedronShape::new(ORACLE[idx].1);
        let perm = permutations4()[p];
        let v = volume(&shape).unwrap();
        let w = volume(&shape.relabeled(&perm)).unwrap();
        prop_assert!((v - w).abs() < 1e-10);
    }

    #[test]
    fn regular_volume_decreases_with_angle(a in 0.05f64..1.2, d in 0.001f64..0.05) {
        let b = (a + d).min(1.22);
        prop_assume!(b > a);
        let va = volume(&TetrahedronShape::regular(a)).unwrap();
        let vb = volume(&TetrahedronShape::regular(b)).unwrap();
        prop_assert!(va > vb && vb > 0.0);
    }
}
