use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supint_core::coords::{Chart, PhaseState};
use supint_core::hamiltonian::{NaturalHamiltonian, PhaseFunction};
use supint_core::integrals::{build_ladder_integral, poisson_bracket, standard_integrals, System};
use supint_core::jet::{AngularFn, JetFn};
use supint_core::potentials::{potential, Potential};
use supint_core::sampling::{random_state, DEFAULT_MARGIN};

fn sin_family(k: f64, n: u32, psi0: f64) -> AngularFn {
    AngularFn::InvSinSq {
        k,
        freq: f64::from(n),
        phase: psi0,
    }
}

fn sample(rng: &mut ChaCha8Rng, chart: Chart, pot: Option<&Potential>) -> PhaseState {
    random_state(rng, chart, pot, DEFAULT_MARGIN).unwrap()
}

#[test]
fn first_ladder_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let psi0 = rng.gen_range(-PI..PI);
        let k = rng.gen_range(0.0..2.0);
        let l = build_ladder_integral(1, Arc::new(sin_family(k, 1, psi0)), psi0).unwrap();
        let (r, psi) = (rng.gen_range(0.1..3.0), rng.gen_range(-PI..PI));
        let (pr, pp) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if (psi + psi0).sin().abs() < 1e-3 {
            continue;
        }
        let v = l.eval_native(&[r, psi], &[pr, pp]).unwrap();
        let expect = pr * (psi + psi0).cos() - pp * (psi + psi0).sin() / r;
        assert!((v - expect).abs() <= 1e-12, "{v} vs {expect}");
    }
}

type Field = Box<dyn Fn(f64, f64, f64, f64) -> f64>;

/// `p_r f + (1/(n r))(p_ψ ∂_ψ f − F′ ∂_{p_ψ} f)` with central differences.
fn fd_step(f: Field, n: f64, d_f: fn(f64) -> f64) -> Field {
    Box::new(move |r, psi, pr, pp| {
        let h = 1e-4;
        let dpsi = (f(r, psi + h, pr, pp) - f(r, psi - h, pr, pp)) / (2.0 * h);
        let dpp = (f(r, psi, pr, pp + h) - f(r, psi, pr, pp - h)) / (2.0 * h);
        pr * f(r, psi, pr, pp) + (pp * dpsi - d_f(psi) * dpp) / (n * r)
    })
}

#[test]
fn second_ladder_matches_nested_differences() {
    // F = k/sin²(2ψ) with k = 0.7, so F′ = −4k cos(2ψ)/sin³(2ψ).
    let k = 0.7;
    fn d_f(psi: f64) -> f64 {
        -4.0 * 0.7 * (2.0 * psi).cos() / (2.0 * psi).sin().powi(3)
    }
    let seed: Field = Box::new(|_, psi, _, _| (2.0 * psi).cos());
    let oracle = fd_step(fd_step(seed, 2.0, d_f), 2.0, d_f);
    let l = build_ladder_integral(2, Arc::new(sin_family(k, 2, 0.0)), 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let psi = rng.gen_range(0.2..PI / 2.0 - 0.2);
        let (r, pr, pp) = (
            rng.gen_range(0.5..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let v = l.eval_native(&[r, psi], &[pr, pp]).unwrap();
        let o = oracle(r, psi, pr, pp);
        assert!((v - o).abs() <= 1e-5 * o.abs().max(1.0), "{v} vs {o}");
    }
}

#[test]
fn ladder_degree_is_exact() {
    // A degree-n polynomial in p_r along a line has vanishing (n+1)-th difference
    // and a nonzero n-th one.
    for n in 1..=5u32 {
        let l = build_ladder_integral(n, Arc::new(sin_family(0.5, n, 0.3)), 0.3).unwrap();
        let (r, psi) = (1.1, 0.37);
        let at = |t: f64| {
            l.eval_native(&[r, psi], &[0.2 + t, -0.4 + 0.5 * t])
                .unwrap()
        };
        let diff = |m: usize| -> f64 {
            (0..=m)
                .map(|j| {
                    let c = binom(m, j) * if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    c * at(j as f64)
                })
                .sum()
        };
        let top = diff(n as usize);
        assert!(top.abs() > 1e-3, "n={n}: leading difference {top}");
        assert!(
            diff(n as usize + 1).abs() < 1e-9 * top.abs().max(1.0),
            "n={n}"
        );
        assert_eq!(l.expand(psi).unwrap().degree(), n);
    }
}

fn binom(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

#[test]
fn degenerate_profile_gives_free_ladder() {
    // For F = 0 the second ladder is p_x² − p_y² in Cartesian momenta.
    let l = build_ladder_integral(2, Arc::new(AngularFn::Const(0.0)), 0.0).unwrap();
    let s = PhaseState::new(Chart::Cartesian2, vec![0.8, -0.3], vec![0.5, 1.2]).unwrap();
    let v = l.eval(&s).unwrap();
    assert!((v - (0.25 - 1.44)).abs() < 1e-12, "{v}");
}

#[test]
fn ladder_commutes_with_sin_family_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=4u32 {
        let psi0 = 0.25;
        let pot = potential(
            "sin-family",
            &[("k", 0.8), ("n", f64::from(n)), ("psi0", psi0)],
        )
        .unwrap();
        let h = NaturalHamiltonian::new(Chart::Polar2, Some(pot.clone())).unwrap();
        let l = build_ladder_integral(n, Arc::new(sin_family(0.8, n, psi0)), psi0).unwrap();
        for _ in 0..100 {
            let s = sample(&mut rng, Chart::Polar2, Some(&pot));
            let b = poisson_bracket(&l, &h, &s).unwrap();
            assert!(b.abs() <= 1e-6, "n={n}: {{L, H}} = {b} at {s:?}");
        }
    }
}

fn three_body_potentials() -> Vec<Potential> {
    vec![
        potential("calogero", &[("k", 1.0)]).unwrap(),
        potential("wolfes", &[("h", 0.6)]).unwrap(),
        potential(
            "ttw",
            &[
                ("k1", 0.3),
                ("k2", 1.0),
                ("k3", 0.5),
                ("p", 3.0),
                ("q", 2.0),
            ],
        )
        .unwrap(),
    ]
}

#[test]
fn three_body_quadratics_commute_with_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut systems: Vec<System> = three_body_potentials()
        .into_iter()
        .map(|p| System::ThreeBody(Some(p)))
        .collect();
    systems.push(System::ThreeBody(None));
    for sys in systems {
        let set = standard_integrals(&sys).unwrap();
        assert_eq!(set.len(), 4);
        for _ in 0..100 {
            let s = sample(&mut rng, Chart::Cylindrical3, set.hamiltonian.potential());
            for m in set.members() {
                let b = poisson_bracket(m.as_ref(), set.hamiltonian.as_ref(), &s).unwrap();
                assert!(b.abs() <= 1e-6, "{sys:?} {}: {b}", m.name());
            }
        }
    }
}

#[test]
fn evans_quadratics_commute_with_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pots = [
        potential("evans-1", &[]).unwrap(),
        potential("evans-1", &[("a", 0.4), ("b", 0.9)]).unwrap(),
        potential("evans-2", &[("k", 0.7)]).unwrap(),
        potential("evans-3", &[("k", 0.5)]).unwrap(),
        potential(
            "evans-4",
            &[("k", 0.3), ("k1", 0.6), ("k2", 0.8), ("k3", 0.4)],
        )
        .unwrap(),
    ];
    for pot in pots {
        let set = standard_integrals(&System::Evans4d(pot.clone())).unwrap();
        assert_eq!(set.members().len(), 6, "{pot}");
        for _ in 0..100 {
            let s = sample(
                &mut rng,
                Chart::SphericalCylindrical4,
                set.hamiltonian.potential(),
            );
            for m in set.members() {
                let b = poisson_bracket(m.as_ref(), set.hamiltonian.as_ref(), &s).unwrap();
                assert!(b.abs() <= 1e-6, "{pot} {}: {b}", m.name());
            }
        }
    }
}

#[test]
fn user_profile_and_open_slots() {
    let f: Arc<dyn JetFn> = Arc::new(AngularFn::Sum(vec![
        AngularFn::Const(1.0),
        AngularFn::Cos {
            amp: 0.3,
            freq: 2.0,
            phase: 0.0,
        },
    ]));
    let pot = potential("evans-1", &[]).unwrap().with_profile(f).unwrap();
    let set = standard_integrals(&System::Evans4d(pot)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let s = sample(
            &mut rng,
            Chart::SphericalCylindrical4,
            set.hamiltonian.potential(),
        );
        for m in set.members() {
            let b = poisson_bracket(m.as_ref(), set.hamiltonian.as_ref(), &s).unwrap();
            assert!(b.abs() <= 1e-6, "{}: {b}", m.name());
        }
    }
    let platonic =
        standard_integrals(&System::Evans4d(potential("platonic-1", &[]).unwrap())).unwrap();
    assert_eq!(platonic.len(), 6);
    assert_eq!(platonic.members().len(), 4);
}
