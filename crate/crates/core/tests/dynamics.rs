use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supint_core::coords::{Chart, PhaseState};
use supint_core::dynamics::{
    drift_report, integrate, poincare_section, step_implicit_midpoint, step_verlet, Direction,
    Flow, InitialSet, IntegrateOptions, Scheme, SectionDef,
};
use supint_core::hamiltonian::{ClosedForm, Hamiltonian, NaturalHamiltonian, PhaseFunction};
use supint_core::integrals::{standard_integrals, System};
use supint_core::potentials::potential;
use supint_core::sampling::random_state;

fn calogero_start() -> PhaseState {
    PhaseState::new(Chart::CartesianLine(3), vec![1.0, 0.0, -1.0], vec![0.0; 3]).unwrap()
}

#[test]
fn verlet_is_reversible() {
    let pot = potential("calogero", &[("k", 1.0)]).unwrap();
    let s = PhaseState::new(
        Chart::CartesianLine(3),
        vec![1.0, 0.1, -1.2],
        vec![0.3, -0.2, 0.5],
    )
    .unwrap();
    let mut x = s.clone();
    for _ in 0..100 {
        x = step_verlet(&x, 1e-3, &pot).unwrap();
    }
    for _ in 0..100 {
        x = step_verlet(&x, -1e-3, &pot).unwrap();
    }
    for (a, b) in x.to_vector().iter().zip(s.to_vector()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn midpoint_conserves_quadratic_energy() {
    let h = ClosedForm::new(
        "osc",
        Chart::CartesianLine(1),
        Some(2),
        |q: &[f64], p: &[f64]| Ok(0.5 * (p[0] * p[0] + q[0] * q[0])),
    )
    .with_gradient(|q: &[f64], p: &[f64]| Ok((vec![q[0]], vec![p[0]])));
    let mut s = PhaseState::new(Chart::CartesianLine(1), vec![0.7], vec![-0.4]).unwrap();
    let e0 = h.eval(&s).unwrap();
    for _ in 0..1000 {
        let n = step_implicit_midpoint(&s, 0.05, &h).unwrap();
        assert!((h.eval(&n).unwrap() - h.eval(&s).unwrap()).abs() <= 1e-12);
        s = n;
    }
    assert!((h.eval(&s).unwrap() - e0).abs() <= 1e-11);
    let back =
        step_implicit_midpoint(&step_implicit_midpoint(&s, 0.05, &h).unwrap(), -0.05, &h).unwrap();
    assert!((back.q[0] - s.q[0]).abs() <= 1e-12);
}

#[test]
fn free_sphere_keeps_p_phi() {
    let h = NaturalHamiltonian::free(Chart::Sphere2).unwrap();
    let mut s = PhaseState::new(Chart::Sphere2, vec![1.1, 0.3], vec![0.4, 0.7]).unwrap();
    for _ in 0..500 {
        s = step_implicit_midpoint(&s, 1e-2, &h).unwrap();
        assert!((s.p[1] - 0.7).abs() <= 1e-12);
    }
}

#[test]
fn free_particle_moves_straight() {
    let pot = potential("calogero", &[("k", 0.0)]).unwrap();
    let flow = Flow::separable(Chart::CartesianLine(3), pot, Scheme::Verlet).unwrap();
    let s = PhaseState::new(
        Chart::CartesianLine(3),
        vec![3.0, 0.0, -3.0],
        vec![0.5, -0.25, 0.1],
    )
    .unwrap();
    let traj = integrate(&flow, &s, IntegrateOptions::new(1e-2, 1.0)).unwrap();
    assert!(!traj.is_truncated());
    assert!((traj.t_end() - 1.0).abs() < 1e-15);
    for i in 0..3 {
        assert!((traj.last().q[i] - (s.q[i] + s.p[i])).abs() <= 1e-12);
    }
    assert!(traj.samples.windows(2).all(|w| w[1].0 > w[0].0));
}

#[test]
fn calogero_drift() {
    let pot = potential("calogero", &[("k", 1.0)]).unwrap();
    let flow = Flow::separable(Chart::CartesianLine(3), pot.clone(), Scheme::Yoshida4).unwrap();
    let traj = integrate(
        &flow,
        &calogero_start(),
        IntegrateOptions::new(1e-3, 100.0).record_every(100),
    )
    .unwrap();
    assert!(!traj.is_truncated());
    assert_eq!(traj.stats.steps, 100_000);
    let set = standard_integrals(&System::ThreeBody(Some(pot.clone()))).unwrap();
    let fs: Vec<Arc<dyn PhaseFunction>> = vec![
        set.hamiltonian.clone(),
        set.get("H2").unwrap(),
        set.get("H3").unwrap(),
    ];
    let d = drift_report(&traj, &fs).unwrap();
    assert!(d[0].relative <= 1e-8, "H: {}", d[0].relative);
    assert!(d[0].drift <= 1e-8);
    assert!(d[1].drift <= 1e-12, "H2: {}", d[1].drift);
    assert!(d[2].relative <= 1e-6, "L3: {}", d[2].relative);
    // Ordering x¹ > x² > x³ is preserved.
    assert!(traj
        .samples
        .iter()
        .all(|(_, s)| s.q[0] > s.q[1] && s.q[1] > s.q[2]));

    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let s = random_state(&mut rng, Chart::CartesianLine(3), Some(&pot), 0.25).unwrap();
    let traj = integrate(
        &flow,
        &s,
        IntegrateOptions::new(1e-3, 100.0).record_every(100),
    )
    .unwrap();
    let d = drift_report(&traj, &fs).unwrap();
    assert!(
        d[0].relative <= 1e-8 && d[2].relative <= 1e-6,
        "{} {}",
        d[0].relative,
        d[2].relative
    );
}

fn octant_start(which: u8) -> PhaseState {
    let theta = (1.0 / 3f64.sqrt()).acos();
    let (theta, phi) = match which {
        1 | 2 => (theta, PI / 4.0),
        _ => (1.382, 1.885),
    };
    PhaseState::new(
        Chart::Sphere2,
        vec![theta + 0.05, phi - 0.03],
        vec![0.2, 0.15],
    )
    .unwrap()
}

#[test]
fn platonic_drift() {
    for which in 1..=3u8 {
        let pot = potential(&format!("platonic-{which}"), &[]).unwrap();
        let flow = Flow::natural(Chart::Sphere2, Some(pot.clone()), Scheme::Midpoint4).unwrap();
        let s = octant_start(which);
        let traj = integrate(
            &flow,
            &s,
            IntegrateOptions::new(1e-3, 100.0).record_every(100),
        )
        .unwrap();
        assert!(!traj.is_truncated(), "{which}: {:?}", traj.truncation);
        let h: Arc<dyn PhaseFunction> = flow.hamiltonian().clone();
        let d = drift_report(&traj, &[h]).unwrap();
        assert!(d[0].relative <= 1e-7, "platonic-{which}: {}", d[0].relative);
        let sector = flow.sector(&s);
        assert!(traj.samples.iter().all(|(_, x)| flow.sector(x) == sector));
    }
}

#[test]
fn sin_family_stays_in_its_sector() {
    let pot = potential("sin-family", &[("k", 1.0), ("n", 3.0), ("psi0", 0.3)]).unwrap();
    let flow = Flow::separable(Chart::Cartesian2, pot.clone(), Scheme::Verlet).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let s = random_state(&mut rng, Chart::Cartesian2, Some(&pot), 0.2).unwrap();
        let traj = integrate(
            &flow,
            &s,
            IntegrateOptions::new(1e-3, 10.0).record_every(10),
        )
        .unwrap();
        let sector = flow.sector(&s);
        assert!(traj.samples.iter().all(|(_, x)| flow.sector(x) == sector));
    }
}

#[test]
fn wolfes_sectors_hold() {
    let pot = potential("wolfes", &[("h", 1.0)]).unwrap();
    let flow = Flow::separable(Chart::CartesianLine(3), pot.clone(), Scheme::Verlet).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..5 {
        let s = random_state(&mut rng, Chart::CartesianLine(3), Some(&pot), 0.2).unwrap();
        let traj = integrate(&flow, &s, IntegrateOptions::new(1e-3, 5.0).record_every(10)).unwrap();
        let sector = flow.sector(&s);
        assert!(traj.samples.iter().all(|(_, x)| flow.sector(x) == sector));
    }
}

#[test]
fn head_on_wall_truncates() {
    let pot = potential("sin-family", &[("k", 1e-9), ("n", 1.0), ("psi0", 0.0)]).unwrap();
    let flow = Flow::separable(Chart::Cartesian2, pot, Scheme::Verlet).unwrap();
    // Straight at the wall y = 0 with negligible coupling: the step that crosses it is rejected.
    let s = PhaseState::new(Chart::Cartesian2, vec![1.0, 0.5], vec![0.0, -10.0]).unwrap();
    let traj = integrate(&flow, &s, IntegrateOptions::new(1e-2, 1.0)).unwrap();
    assert!(traj.is_truncated(), "{:?}", traj.stats);
    assert!(traj.last().q[1] > 0.0);
    assert!(traj.stats.rejections > 0);
    assert!(traj.samples.iter().all(|(_, x)| x.is_finite()));
}

fn jacobian(step: impl Fn(&[f64]) -> Vec<f64>, z: &[f64]) -> Vec<Vec<f64>> {
    let n = z.len();
    let h = 1e-4;
    let mut j = vec![vec![0.0; n]; n];
    for c in 0..n {
        let at = |dx: f64| {
            let mut a = z.to_vec();
            a[c] += dx;
            step(&a)
        };
        let (f2, f1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
        for r in 0..n {
            j[r][c] = (8.0 * (f1[r] - m1[r]) - (f2[r] - m2[r])) / (12.0 * h);
        }
    }
    j
}

fn symplectic_defect(j: &[Vec<f64>]) -> f64 {
    let n = j.len();
    let d = n / 2;
    let omega = |r: usize, c: usize| -> f64 {
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

#[test]
fn steppers_are_symplectic() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let cal = potential("calogero", &[("k", 1.0)]).unwrap();
    let pl = potential("platonic-1", &[]).unwrap();
    let h = NaturalHamiltonian::new(Chart::Sphere2, Some(pl.clone())).unwrap();
    for _ in 0..10 {
        let s = random_state(&mut rng, Chart::CartesianLine(3), Some(&cal), 0.25).unwrap();
        let j = jacobian(
            |z| {
                step_verlet(&PhaseState::from_vector(s.chart, z).unwrap(), 1e-2, &cal)
                    .unwrap()
                    .to_vector()
            },
            &s.to_vector(),
        );
        assert!(
            symplectic_defect(&j) <= 1e-6,
            "verlet {}",
            symplectic_defect(&j)
        );
        let s = random_state(&mut rng, Chart::Sphere2, Some(&pl), 0.05).unwrap();
        let j = jacobian(
            |z| {
                step_implicit_midpoint(&PhaseState::from_vector(s.chart, z).unwrap(), 1e-2, &h)
                    .unwrap()
                    .to_vector()
            },
            &s.to_vector(),
        );
        assert!(
            symplectic_defect(&j) <= 1e-6,
            "{} at {:?}",
            symplectic_defect(&j),
            s
        );
    }
}

#[test]
fn circular_motion_crossings() {
    let osc: Arc<dyn Hamiltonian> = Arc::new(ClosedForm::new(
        "osc",
        Chart::CartesianLine(2),
        Some(2),
        |q: &[f64], p: &[f64]| Ok(0.5 * (p[0] * p[0] + q[0] * q[0] + p[1] * p[1])),
    ));
    let flow = Flow::general(osc, Scheme::Midpoint4).unwrap();
    // q(t) = cos t, p(t) = −sin t; crossing q = 0 upward at t = 3π/2 + 2πk.
    let s = PhaseState::new(Chart::CartesianLine(2), vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
    let sec = SectionDef::new(0, 0.0, 1, 0).unwrap();
    let out = poincare_section(
        &flow,
        &[InitialSet {
            id: "c".into(),
            states: vec![s],
        }],
        &sec,
        IntegrateOptions::new(1e-3, 20.0),
    )
    .unwrap();
    let pts = &out.sets[0].points;
    assert_eq!(pts.len(), 3);
    for (k, pt) in pts.iter().enumerate() {
        let t = 1.5 * PI + 2.0 * PI * k as f64;
        assert!((pt.t - t).abs() <= 1e-10, "{} vs {t}", pt.t);
        assert!(pt.residual.abs() <= 1e-10);
        assert!((pt.p - 1.0).abs() <= 1e-9);
    }
    let both = sec.direction(Direction::Both);
    let out = poincare_section(
        &flow,
        &[InitialSet {
            id: "c".into(),
            states: vec![
                PhaseState::new(Chart::CartesianLine(2), vec![1.0, 0.0], vec![0.0, 0.0]).unwrap(),
            ],
        }],
        &both,
        IntegrateOptions::new(1e-3, 20.0),
    )
    .unwrap();
    assert_eq!(out.sets[0].points.len(), 6);
}

#[test]
fn platonic_section_residuals() {
    let pot = potential("platonic-1", &[]).unwrap();
    let flow = Flow::natural(Chart::Sphere2, Some(pot), Scheme::Midpoint).unwrap();
    let sec = SectionDef::new(1, PI / 4.0, 0, 0).unwrap().periodic();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let states = (0..2)
        .map(|_| {
            let mut s = octant_start(1);
            s.p[0] += rng.gen_range(-0.05..0.05);
            s
        })
        .collect();
    let out = poincare_section(
        &flow,
        &[InitialSet {
            id: "a".into(),
            states,
        }],
        &sec,
        IntegrateOptions::new(1e-2, 100.0),
    )
    .unwrap();
    assert!(out.total_points() > 5);
    for p in &out.sets[0].points {
        assert!(p.residual.abs() <= 1e-10);
        assert!(p.q > 0.0 && p.q < PI / 2.0);
    }
}
