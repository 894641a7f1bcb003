use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supint_core::coords::{sphere_angles, Chart};
use supint_core::potentials::{platonic_invariant, potential, Potential};
use supint_core::symmetry::{
    check_invariance, dihedral_group, permutation_isometry, platonic_group, FiniteGroup,
    PlatonicKind,
};
use supint_core::Result;

fn invariant(which: u8) -> impl Fn(&[f64]) -> Result<f64> {
    move |v: &[f64]| {
        let (theta, phi) = sphere_angles([v[0], v[1], v[2]]);
        Ok(platonic_invariant(which, theta, phi))
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(11)
}

#[test]
fn group_axioms_hold() {
    for kind in [PlatonicKind::Tetra, PlatonicKind::Octa, PlatonicKind::Icosa] {
        platonic_group(kind).unwrap().check_axioms().unwrap();
    }
    for n in 1..=6 {
        let g = dihedral_group(n, 0.4).unwrap();
        assert_eq!(g.order(), 4 * n as usize);
        g.check_axioms().unwrap();
    }
}

#[test]
fn platonic_invariants() {
    let tetra = platonic_group(PlatonicKind::Tetra).unwrap();
    let octa = platonic_group(PlatonicKind::Octa).unwrap();
    let icosa = platonic_group(PlatonicKind::Icosa).unwrap();
    assert!(check_invariance(invariant(1), &tetra, 200, &mut rng()).unwrap() <= 1e-12);
    assert!(check_invariance(invariant(2), &octa, 200, &mut rng()).unwrap() <= 1e-12);
    assert!(check_invariance(invariant(3), &icosa, 200, &mut rng()).unwrap() <= 1e-10);
}

#[test]
fn xyz_is_not_octahedral() {
    let octa = platonic_group(PlatonicKind::Octa).unwrap();
    assert!(check_invariance(invariant(1), &octa, 50, &mut rng()).unwrap() > 0.01);
    // A 4-fold turn about z flips the sign of xyz at (1,2,3)/√14.
    let f = invariant(1);
    let x = [1.0, 2.0, 3.0].map(|v: f64| v / 14f64.sqrt());
    let q = octa
        .elements()
        .iter()
        .find(|g| {
            (g.matrix().trace() - 1.0).abs() < 1e-12 && (g.matrix()[(2, 2)] - 1.0).abs() < 1e-12
        })
        .unwrap();
    let (a, b) = (f(&x).unwrap(), f(&q.act(&x)).unwrap());
    assert!((a + b).abs() < 1e-15 && a.abs() > 0.01);
}

#[test]
fn f3_is_not_octahedral() {
    let octa = platonic_group(PlatonicKind::Octa).unwrap();
    assert!(check_invariance(invariant(3), &octa, 50, &mut rng()).unwrap() > 0.01);
}

#[test]
fn sin_family_has_prism_symmetry() {
    for (n, psi0) in [(1u32, 0.0), (3, 0.2), (4, -0.7), (5, 1.1)] {
        let pot = potential(
            "sin-family",
            &[("k", 1.0), ("n", f64::from(n)), ("psi0", psi0)],
        )
        .unwrap();
        let f = |v: &[f64]| pot.value_at(Chart::Cartesian2, v);
        let g = dihedral_group(n, psi0).unwrap();
        let res = check_invariance(f, &g, 200, &mut rng()).unwrap();
        assert!(res <= 1e-12, "n={n}: {res}");
    }
}

fn s3() -> Vec<Vec<usize>> {
    vec![
        vec![0, 1, 2],
        vec![1, 0, 2],
        vec![0, 2, 1],
        vec![2, 1, 0],
        vec![1, 2, 0],
        vec![2, 0, 1],
    ]
}

fn compose(s: &[usize], t: &[usize]) -> Vec<usize> {
    t.iter().map(|&i| s[i]).collect()
}

#[test]
fn permutations_form_a_homomorphism() {
    for s in s3() {
        for t in s3() {
            let lhs = permutation_isometry(&compose(&s, &t)).unwrap();
            let rhs = permutation_isometry(&s)
                .unwrap()
                .compose(&permutation_isometry(&t).unwrap());
            assert!(lhs.distance(&rhs) <= 1e-12, "{s:?} {t:?}");
        }
    }
    let pairs = [
        ([1, 2, 3, 0], [1, 0, 2, 3]),
        ([3, 2, 1, 0], [0, 2, 3, 1]),
        ([2, 0, 3, 1], [2, 3, 0, 1]),
    ];
    for (s, t) in pairs {
        let lhs = permutation_isometry(&compose(&s, &t)).unwrap();
        let rhs = permutation_isometry(&s)
            .unwrap()
            .compose(&permutation_isometry(&t).unwrap());
        assert!(lhs.distance(&rhs) <= 1e-12);
    }
}

#[test]
fn permutation_image_is_dihedral_of_order_six() {
    let gens: Vec<_> = s3()
        .iter()
        .map(|s| permutation_isometry(s).unwrap())
        .collect();
    let g = FiniteGroup::generate(gens, Some(6)).unwrap();
    assert_eq!(g.elements().iter().filter(|e| e.is_rotation()).count(), 3);
    // The image sits inside the hexagonal prism group of the line potentials.
    let calogero_phase = PI / 2.0;
    let d3 = dihedral_group(3, calogero_phase).unwrap();
    assert!(g.elements().iter().all(|e| d3.contains(e)));
}

fn line_invariance(pot: &Potential) -> f64 {
    let mut worst: f64 = 0.0;
    let mut r = rng();
    for sigma in s3() {
        let g = permutation_isometry(&sigma).unwrap();
        for _ in 0..50 {
            let s =
                supint_core::sampling::random_state(&mut r, Chart::OrthogonalZ(3), Some(pot), 0.1)
                    .unwrap();
            let rot = g.act(&s.q[..2]);
            let moved = [rot[0], rot[1], s.q[2]];
            let a = pot.value_at(Chart::OrthogonalZ(3), &s.q).unwrap();
            let b = pot.value_at(Chart::OrthogonalZ(3), &moved).unwrap();
            worst = worst.max((a - b).abs() / (1.0 + a.abs()));
        }
    }
    worst
}

#[test]
fn line_potentials_are_permutation_invariant() {
    assert!(line_invariance(&potential("calogero", &[("k", 1.0)]).unwrap()) <= 1e-12);
    assert!(line_invariance(&potential("wolfes", &[("h", 1.0)]).unwrap()) <= 1e-12);
}
