use approx::assert_relative_eq;
use proptest::prelude::*;
use supint_core::coords::{
    chart_transform, line_to_orthogonal, orthogonal_matrix, orthogonal_to_line, Chart, LineConfig,
    PhaseState,
};
use supint_core::potentials::potential;

/// Chart pairs with a transform; the first entry is the source chart.
const PAIRS: [(Chart, Chart); 8] = [
    (Chart::CartesianLine(3), Chart::OrthogonalZ(3)),
    (Chart::CartesianLine(3), Chart::Cylindrical3),
    (Chart::OrthogonalZ(3), Chart::Cylindrical3),
    (Chart::CartesianLine(4), Chart::SphericalCylindrical4),
    (Chart::OrthogonalZ(4), Chart::SphericalCylindrical4),
    (Chart::Cartesian2, Chart::Polar2),
    (Chart::Cartesian3, Chart::Spherical3),
    (Chart::CartesianLine(4), Chart::OrthogonalZ(4)),
];

fn state_in(chart: Chart) -> impl Strategy<Value = PhaseState> {
    let d = chart.dim();
    (
        prop::collection::vec(-2.0..2.0f64, d),
        prop::collection::vec(-2.0..2.0f64, d),
    )
        .prop_map(move |(q, p)| PhaseState::new(chart, q, p).unwrap())
}

fn pair_and_state() -> impl Strategy<Value = (Chart, PhaseState)> {
    (0..PAIRS.len()).prop_flat_map(|i| {
        let (src, dst) = PAIRS[i];
        state_in(src).prop_map(move |s| (dst, s))
    })
}

/// Distance from the singular set of every chart involved.
fn regular(s: &PhaseState, target: Chart) -> bool {
    let Ok(t) = chart_transform(s, target) else {
        return false;
    };
    match target {
        Chart::Cylindrical3 | Chart::Polar2 => t.q[0] > 1e-2,
        Chart::Spherical3 => t.q[0] > 1e-2 && t.q[1].sin().abs() > 1e-2,
        Chart::SphericalCylindrical4 => t.q[0] > 1e-2 && t.q[2].sin().abs() > 1e-2,
        _ => true,
    }
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
        .fold(0.0, f64::max)
}

fn jacobian(s: &PhaseState, target: Chart) -> Vec<Vec<f64>> {
    let z = s.to_vector();
    let n = z.len();
    let h = 1e-4;
    let map = |z: &[f64]| {
        chart_transform(&PhaseState::from_vector(s.chart, z).unwrap(), target)
            .unwrap()
            .to_vector()
    };
    let mut j = vec![vec![0.0; n]; n];
    for c in 0..n {
        let at = |dx: f64| {
            let mut a = z.clone();
            a[c] += dx;
            map(&a)
        };
        let (f2, f1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
        // Angles may wrap across the stencil.
        for r in 0..n {
            let unwrap = |v: f64, base: f64| {
                base + (v - base + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                    - std::f64::consts::PI
            };
            let base = f1[r];
            let (a, b, c2, d) = (
                unwrap(f2[r], base),
                base,
                unwrap(m1[r], base),
                unwrap(m2[r], base),
            );
            j[r][c] = (8.0 * (b - c2) - (a - d)) / (12.0 * h);
        }
    }
    j
}

fn symplectic_defect(j: &[Vec<f64>]) -> f64 {
    let n = j.len();
    let d = n / 2;
    let omega = |r: usize, c: usize| {
        if r < d && c == r + d {
            1.0
        } else if r >= d && c + d == r {
            -1.0
        } else {
            0.0
        }
    };
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    v += j[a][r] * omega(a, b) * j[b][c];
                }
            }
            worst = worst.max((v - omega(r, c)).abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn roundtrip_is_identity((target, s) in pair_and_state()) {
        prop_assume!(regular(&s, target));
        let there = chart_transform(&s, target).unwrap();
        let back = chart_transform(&there, s.chart).unwrap();
        prop_assert!(max_rel(&back.to_vector(), &s.to_vector()) <= 1e-12);
        let (t0, t1) = (s.kinetic_energy().unwrap(), there.kinetic_energy().unwrap());
        prop_assert!((t0 - t1).abs() <= 1e-10 * (1.0 + t0.abs()));
    }

    #[test]
    fn transforms_are_canonical((target, s) in pair_and_state()) {
        prop_assume!(regular(&s, target));
        let t = chart_transform(&s, target).unwrap();
        prop_assume!(t.q.iter().chain(&t.p).all(|v| v.abs() < 50.0));
        prop_assert!(symplectic_defect(&jacobian(&s, target)) <= 1e-6);
    }

    #[test]
    fn line_roundtrip(x in prop::collection::vec(-5.0..5.0f64, 2..8), seed in 0.0..1.0f64) {
        let p: Vec<f64> = x.iter().map(|v| v * seed - 0.3).collect();
        let c = LineConfig::new(x.clone(), p.clone()).unwrap();
        let back = orthogonal_to_line(&line_to_orthogonal(&c)).unwrap();
        prop_assert!(max_rel(&back.into_state().to_vector(), &x.iter().chain(&p).copied().collect::<Vec<_>>()) <= 1e-13);
    }

    #[test]
    fn line_potentials_ignore_translation(
        xi in prop::collection::vec(-(1i64 << 17)..(1i64 << 17), 3),
        ci in -(10i64 << 16)..(10i64 << 16),
    ) {
        // Multiples of 2^-16, so the shift itself is exact.
        let x: Vec<f64> = xi.iter().map(|&i| i as f64 / 65536.0).collect();
        let c = ci as f64 / 65536.0;
        let cal = potential("calogero", &[("k", 1.0)]).unwrap();
        let wol = potential("wolfes", &[("h", 1.0)]).unwrap();
        for pot in [cal, wol] {
            let Ok(v) = pot.value_at(Chart::CartesianLine(3), &x) else { continue };
            prop_assume!(v.abs() < 1e6);
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let w = pot.value_at(Chart::CartesianLine(3), &shifted).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn orthogonal_matrix_is_orthogonal() {
    for n in 2..=8 {
        let m = orthogonal_matrix(n);
        let e = &m * m.transpose() - nalgebra::DMatrix::identity(n, n);
        assert!(e.amax() <= 1e-14, "n={n}: {}", e.amax());
    }
}

#[test]
fn cylindrical_example() {
    let s = PhaseState::new(
        Chart::OrthogonalZ(3),
        vec![1.0 / 2f64.sqrt(), 1.5f64.sqrt(), 0.0],
        vec![0.0; 3],
    )
    .unwrap();
    let c = chart_transform(&s, Chart::Cylindrical3).unwrap();
    assert_relative_eq!(c.q[0], 2f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(c.q[1], std::f64::consts::FRAC_PI_3, epsilon = 1e-15);
    assert_eq!(c.q[2], 0.0);
}
