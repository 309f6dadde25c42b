use hypervol::kr::*;
use hypervol::numerics::LogComplex;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_admissible(rng: &mut ChaCha8Rng, level: Level) -> SixJArgs {
    loop {
        let a = SixJArgs::from_edge_colors(std::array::from_fn(|_| {
            rng.random_range(0..=level.max_color())
        }));
        if a.admissible(level) {
            return a;
        }
    }
}

fn rel_diff(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

fn cx(v: &Precise) -> Complex64 {
    v.to_complex()
}

#[test]
fn all_zero_symbol_is_exactly_one() {
    for r in [3, 5, 31, 483] {
        let level = Level::new(r).unwrap();
        let t = QuantumTable::new(level);
        assert_eq!(t.sixj(&SixJArgs::all(0)), LogComplex::ONE);
        assert_eq!(
            sixj_naive(&SixJArgs::all(0), level),
            Complex64::new(1.0, 0.0)
        );
        let p = PreciseTable::new(level, 128).sixj(&SixJArgs::all(0));
        assert_eq!(cx(&p), Complex64::new(1.0, 0.0));
    }
}

#[test]
fn inadmissible_triads_give_exact_zero() {
    let level = Level::new(31).unwrap();
    let t = QuantumTable::new(level);
    let good = SixJArgs::new(4, 4, 4, 4, 4, 4);
    assert!(!t.sixj(&good).is_zero());
    // Break each triad in turn: odd sum, triangle inequality, level bound.
    let broken = [
        SixJArgs::new(4, 4, 3, 4, 4, 4),
        SixJArgs::new(4, 4, 4, 4, 2, 12),
        SixJArgs::new(2, 12, 4, 2, 4, 4),
        SixJArgs::new(4, 4, 20, 20, 4, 4),
        SixJArgs::new(20, 20, 20, 20, 20, 20),
    ];
    for b in broken {
        assert!(!b.admissible(level), "{b:?}");
        assert!(t.sixj(&b).is_zero());
        assert_eq!(sixj_naive(&b, level), Complex64::new(0.0, 0.0));
        assert!(PreciseTable::new(level, 128).sixj(&b).is_zero());
    }
}

#[test]
fn tetrahedral_symmetries_hold() {
    let level = Level::new(51).unwrap();
    let t = QuantumTable::new(level);
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..500 {
        let args = random_admissible(&mut rng, level);
        let base = t.sixj(&args).to_complex();
        let images = args.symmetries();
        assert_eq!(images.len(), 24);
        for img in images {
            let v = t.sixj(&img).to_complex();
            assert!(rel_diff(base, v) <= 1e-9, "{args:?} vs {img:?}: {base} {v}");
        }
    }
}

#[test]
fn pentagon_identity() {
    for r in [31, 51] {
        let level = Level::new(r).unwrap();
        let t = PreciseTable::new(level, 256);
        let p = t.prec();
        let ut = |a, b, e, d, c, f| t.unitary_tet(&SixJArgs::new(a, b, e, d, c, f));
        let mut rng = ChaCha8Rng::seed_from_u64(r as u64);
        let mut checked = 0;
        while checked < 50 {
            let [a, b, c, d, e, f, x1, x2, x3]: [u32; 9] =
                std::array::from_fn(|_| rng.random_range(0..=level.max_color()));
            let rhs = ut(x1, x2, x3, e, a, d).mul(&ut(x1, x2, x3, f, b, c), p);
            if rhs.is_zero() {
                continue;
            }
            checked += 1;
            let lhs = precise_sum(
                (0..=level.max_color()).map(|x| {
                    t.loop_value(x)
                        .mul(&ut(a, b, x, c, d, x1), p)
                        .mul(&ut(c, d, x, e, f, x2), p)
                        .mul(&ut(e, f, x, b, a, x3), p)
                }),
                p,
            );
            assert!(
                rel_diff(cx(&lhs), cx(&rhs)) <= 1e-8,
                "r={r}: {} vs {}",
                cx(&lhs),
                cx(&rhs)
            );
        }
    }
}

#[test]
fn orthogonality() {
    for r in [31, 51] {
        let level = Level::new(r).unwrap();
        let t = PreciseTable::new(level, 256);
        let p = t.prec();
        let m = level.max_color();
        let mut rng = ChaCha8Rng::seed_from_u64(7 * r as u64);
        let mut checked = 0;
        while checked < 12 {
            let [a, b, cc, d]: [u32; 4] = std::array::from_fn(|_| rng.random_range(0..=m));
            let js: Vec<u32> = (0..=m)
                .filter(|&j| admissible(a, b, j, level) && admissible(cc, d, j, level))
                .collect();
            if js.len() < 2 {
                continue;
            }
            checked += 1;
            for &j in &js {
                for &jp in &js {
                    let s = precise_sum(
                        (0..=m).map(|k| {
                            let x = t.unitary_tet(&SixJArgs::new(a, b, j, d, cc, k));
                            let y = t.unitary_tet(&SixJArgs::new(a, b, jp, d, cc, k));
                            t.loop_value(k).mul(&x, p).mul(&y, p)
                        }),
                        p,
                    );
                    let target = if j == jp {
                        1.0 / cx(&t.loop_value(j)).re
                    } else {
                        0.0
                    };
                    assert!(
                        (cx(&s) - target).norm() <= 1e-8 * target.abs().max(1.0),
                        "r={r} j={j} j'={jp}"
                    );
                }
            }
        }
    }
}

#[test]
fn log_domain_matches_naive_and_multiprecision() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for r in [5, 11, 31, 51, 75, 101] {
        let level = Level::new(r).unwrap();
        let t = QuantumTable::new(level);
        let precise = PreciseTable::new(level, 256);
        for _ in 0..300 {
            let args = random_admissible(&mut rng, level);
            let exact = cx(&precise.sixj(&args));
            let log = t.sixj(&args).to_complex();
            let naive = sixj_naive(&args, level);
            assert!(
                rel_diff(log, naive) <= 1e-9,
                "r={r} {args:?}: {log} vs {naive}"
            );
            assert!(
                rel_diff(log, exact) <= 1e-9,
                "r={r} {args:?}: {log} vs {exact}"
            );
        }
    }
}

#[test]
fn unitary_coefficient_differs_by_vertex_phases() {
    let level = Level::new(31).unwrap();
    let t = QuantumTable::new(level);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let args = random_admissible(&mut rng, level);
        let spin_sum: u32 = args.triads().iter().map(|&(x, y, z)| (x + y + z) / 2).sum();
        let phase = Complex64::i().powi(-(spin_sum as i32));
        let six = t.sixj(&args).to_complex();
        assert!(rel_diff(t.unitary_tet(&args).to_complex(), six * phase) < 1e-12);
    }
}

#[test]
fn loop_values_and_theta() {
    let level = Level::new(7).unwrap();
    let t = QuantumTable::new(level);
    assert_eq!(t.loop_value(0), 1.0);
    // [2] = 2cos(2π/7).
    let q2 = 2.0 * (2.0 * std::f64::consts::PI / 7.0).cos();
    assert!((t.loop_value(1) + q2).abs() < 1e-15);
    assert_eq!(t.loop_value(6), 0.0);
    assert_eq!(theta_value(0, 0, 0, level), 1.0);
    assert_eq!(theta_value(1, 1, 1, level), 0.0);
    assert_eq!(theta_value(5, 5, 4, level), 0.0);
}

#[test]
fn canonical_form_is_shared_by_the_orbit() {
    let args = SixJArgs::new(1, 2, 3, 4, 5, 6);
    let key = args.canonical();
    for img in args.symmetries() {
        assert_eq!(img.canonical(), key);
    }
}

proptest! {
    #[test]
    fn symmetries_preserve_admissibility_and_value(colors in proptest::array::uniform6(0u32..=21)) {
        let level = Level::new(23).unwrap();
        let t = QuantumTable::new(level);
        let args = SixJArgs::from_edge_colors(colors);
        let base = t.sixj(&args).to_complex();
        for img in args.symmetries() {
            prop_assert_eq!(img.admissible(level), args.admissible(level));
            prop_assert!(rel_diff(base, t.sixj(&img).to_complex()) <= 1e-9);
        }
    }

    #[test]
    fn admissibility_is_symmetric(a in 0u32..40, b in 0u32..40, c in 0u32..40) {
        let level = Level::new(41).unwrap();
        let v = admissible(a, b, c, level);
        prop_assert_eq!(v, admissible(b, c, a, level));
        prop_assert_eq!(v, admissible(c, b, a, level));
    }
}
