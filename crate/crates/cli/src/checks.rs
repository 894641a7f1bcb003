//! Verification suites behind `supint check` and the acceptance target.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use supint_core::coords::{chart_transform, orthogonal_matrix, sphere_angles, Chart, PhaseState};
use supint_core::dynamics::{
    closed_curve_deviation, drift_report, integrate, Flow, IntegrateOptions, Scheme,
};
use supint_core::extensions::{
    build_u_ladder, c_kappa, hessian_residual, s_kappa, AngularHamiltonian, CurvedChart, Gamma,
};
use supint_core::hamiltonian::{NaturalHamiltonian, PhaseFunction};
use supint_core::integrals::{build_ladder_integral, poisson_bracket, standard_integrals, System};
use supint_core::jet::{AngularFn, JetFn};
use supint_core::potentials::{
    derive_phase_constants, platonic_invariant, potential, ttw_half_angle, Potential,
};
use supint_core::sampling::{random_state, DEFAULT_MARGIN};
use supint_core::symmetry::{
    check_invariance, dihedral_group, permutation_isometry, platonic_group, PlatonicKind,
};

use crate::commands::{run_isopotential, run_poincare, Globals};
use crate::config::RunConfig;
use crate::figures::distance_to_octant_walls;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Equals(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtMost(limit),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtLeast(limit),
        }
    }

    pub fn equals(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::Equals(expected),
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
            Bound::Equals(e) => self.value == e,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::AtMost(l) => format!("<= {l:.1e}"),
            Bound::AtLeast(l) => format!(">= {l:.1e}"),
            Bound::Equals(e) => format!("== {e}"),
        };
        write!(
            f,
            "{status}  {:<58} {:>12.3e}  {bound}",
            self.name, self.value
        )
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} ({:.2?})", self.suite, self.elapsed)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

pub const SUITES: [&str; 8] = [
    "coords",
    "phases",
    "integrals",
    "ladders",
    "dynamics",
    "symmetry",
    "extensions",
    "figures",
];

/// Runs a named suite. `out` receives artifacts of the `figures` suite.
pub fn run_suite(name: &str, out: &Path) -> anyhow::Result<SuiteReport> {
    let start = Instant::now();
    let checks = match name {
        "coords" => coords_suite()?,
        "phases" => phases_suite()?,
        "integrals" => integrals_suite()?,
        "ladders" => ladders_suite()?,
        "dynamics" => dynamics_suite()?,
        "symmetry" => symmetry_suite()?,
        "extensions" => extensions_suite()?,
        "figures" => figures_suite(out)?,
        other => bail!(
            "unknown suite {other}; expected one of {}",
            SUITES.join(", ")
        ),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        checks,
        elapsed: start.elapsed(),
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CHART_PAIRS: [(Chart, Chart); 8] = [
    (Chart::CartesianLine(3), Chart::OrthogonalZ(3)),
    (Chart::CartesianLine(3), Chart::Cylindrical3),
    (Chart::OrthogonalZ(3), Chart::Cylindrical3),
    (Chart::CartesianLine(4), Chart::SphericalCylindrical4),
    (Chart::OrthogonalZ(4), Chart::SphericalCylindrical4),
    (Chart::CartesianLine(4), Chart::OrthogonalZ(4)),
    (Chart::Cartesian2, Chart::Polar2),
    (Chart::Cartesian3, Chart::Spherical3),
];

fn regular(t: &PhaseState) -> bool {
    match t.chart {
        Chart::Cylindrical3 | Chart::Polar2 => t.q[0] > 1e-2,
        Chart::Spherical3 => t.q[0] > 1e-2 && t.q[1].sin().abs() > 1e-2,
        Chart::SphericalCylindrical4 => t.q[0] > 1e-2 && t.q[2].sin().abs() > 1e-2,
        _ => true,
    }
}

/// ‖JᵀΩJ − Ω‖∞ for the five-point Jacobian of `map` at `z`.
pub fn symplectic_defect(map: impl Fn(&[f64]) -> Vec<f64>, z: &[f64], angular: &[usize]) -> f64 {
    let n = z.len();
    let d = n / 2;
    let h = 1e-4;
    let mut j = vec![vec![0.0; n]; n];
    for c in 0..n {
        let at = |dx: f64| {
            let mut a = z.to_vec();
            a[c] += dx;
            map(&a)
        };
        let (f2, f1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
        for r in 0..n {
            let unwrap = |v: f64| {
                if angular.contains(&r) {
                    f1[r] + (v - f1[r] + PI).rem_euclid(2.0 * PI) - PI
                } else {
                    v
                }
            };
            j[r][c] =
                (8.0 * (f1[r] - unwrap(m1[r])) - (unwrap(f2[r]) - unwrap(m2[r]))) / (12.0 * h);
        }
    }
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

fn coords_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    for (k, &(src, dst)) in CHART_PAIRS.iter().enumerate() {
        let mut r = rng(100 + k as u64);
        let (mut roundtrip, mut kinetic, mut canon) = (0.0f64, 0.0f64, 0.0f64);
        let mut n = 0;
        while n < 1000 {
            let d = src.dim();
            let q: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
            let s = PhaseState::new(src, q, p)?;
            let t = chart_transform(&s, dst)?;
            if !regular(&t) {
                continue;
            }
            n += 1;
            let back = chart_transform(&t, src)?;
            for (a, b) in back.to_vector().iter().zip(s.to_vector()) {
                roundtrip = roundtrip.max((a - b).abs() / (1.0 + b.abs()));
            }
            let (t0, t1) = (s.kinetic_energy()?, t.kinetic_energy()?);
            kinetic = kinetic.max((t0 - t1).abs() / (1.0 + t0.abs()));
            let map = |z: &[f64]| {
                chart_transform(&PhaseState::from_vector(src, z).expect("dimension"), dst)
                    .expect("regular state")
                    .to_vector()
            };
            canon = canon.max(symplectic_defect(
                map,
                &s.to_vector(),
                &dst.angular_indices(),
            ));
        }
        out.push(Check::at_most(
            format!("roundtrip {src} <-> {dst} (1000 states)"),
            roundtrip,
            1e-12,
        ));
        out.push(Check::at_most(
            format!("kinetic energy {src} -> {dst}"),
            kinetic,
            1e-10,
        ));
        out.push(Check::at_most(
            format!("canonicity {src} -> {dst}"),
            canon,
            1e-6,
        ));
    }
    for n in 3..=4 {
        let m = orthogonal_matrix(n);
        let e = (&m * m.transpose() - nalgebra::DMatrix::<f64>::identity(n, n)).amax();
        out.push(Check::at_most(format!("|M M^T - I| for n = {n}"), e, 1e-14));
    }
    Ok(out)
}

fn phases_suite() -> anyhow::Result<Vec<Check>> {
    let template = potential("sin-family", &[("k", 1.0), ("n", 3.0)])?;
    let c = derive_phase_constants(&potential("calogero", &[("k", 1.0)])?, &template)?;
    let w = derive_phase_constants(&potential("wolfes", &[("h", 1.0)])?, &template)?;
    let offset = (c.phase - w.phase).rem_euclid(PI);
    Ok(vec![
        Check::at_most("calogero fit residual", c.residual, 1e-9),
        Check::at_most("wolfes fit residual", w.residual, 1e-9),
        Check::at_most(
            "calogero/wolfes phase offset - pi/2 (mod pi)",
            (offset - PI / 2.0).abs(),
            1e-9,
        ),
    ])
}

fn max_bracket(
    f: &dyn PhaseFunction,
    h: &NaturalHamiltonian,
    pot: &Potential,
    chart: Chart,
    samples: usize,
    r: &mut ChaCha8Rng,
) -> anyhow::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = random_state(r, chart, Some(pot), DEFAULT_MARGIN)?;
        worst = worst.max(poisson_bracket(f, h, &s)?.abs());
    }
    Ok(worst)
}

fn integrals_suite() -> anyhow::Result<Vec<Check>> {
    type Job = (
        String,
        Arc<dyn PhaseFunction>,
        Arc<NaturalHamiltonian>,
        Potential,
        Chart,
    );
    let mut jobs: Vec<Job> = Vec::new();
    let mut systems = vec![
        potential("calogero", &[("k", 1.0)])?,
        potential("wolfes", &[("h", 0.6)])?,
        potential(
            "ttw",
            &[
                ("k1", 0.3),
                ("k2", 1.0),
                ("k3", 0.5),
                ("p", 3.0),
                ("q", 2.0),
            ],
        )?,
    ]
    .into_iter()
    .map(|p| (System::ThreeBody(Some(p.clone())), p, Chart::Cylindrical3))
    .collect::<Vec<_>>();
    for pot in [
        potential("evans-1", &[("a", 0.4), ("b", 0.9)])?,
        potential("evans-2", &[("k", 0.7)])?,
        potential("evans-3", &[("k", 0.5)])?,
        potential(
            "evans-4",
            &[("k", 0.3), ("k1", 0.6), ("k2", 0.8), ("k3", 0.4)],
        )?,
    ] {
        systems.push((
            System::Evans4d(pot.clone()),
            pot,
            Chart::SphericalCylindrical4,
        ));
    }
    for (system, pot, chart) in systems {
        let set = standard_integrals(&system)?;
        for f in set.members().into_iter().skip(1) {
            let label = if pot.id() == "calogero" && f.name() == "H3" {
                "calogero {L_3, H}".to_string()
            } else {
                format!("{} {{{}, H}}", pot.id(), f.name())
            };
            jobs.push((label, f, set.hamiltonian.clone(), pot.clone(), chart));
        }
    }
    for n in 1..=4u32 {
        let psi0 = 0.25;
        let pot = potential(
            "sin-family",
            &[("k", 0.8), ("n", f64::from(n)), ("psi0", psi0)],
        )?;
        let h = Arc::new(NaturalHamiltonian::new(Chart::Polar2, Some(pot.clone()))?);
        let profile: Arc<dyn JetFn> = Arc::new(AngularFn::InvSinSq {
            k: 0.8,
            freq: f64::from(n),
            phase: psi0,
        });
        let l = Arc::new(build_ladder_integral(n, profile, psi0)?);
        jobs.push((
            format!("sin-family n={n} {{L_{n}, H_S}}"),
            l,
            h,
            pot,
            Chart::Polar2,
        ));
    }
    jobs.into_par_iter()
        .enumerate()
        .map(|(k, (name, f, h, pot, chart))| {
            let worst = max_bracket(f.as_ref(), &h, &pot, chart, 100, &mut rng(300 + k as u64))?;
            Ok(Check::at_most(format!("{name} (100 states)"), worst, 1e-6))
        })
        .collect()
}

fn ladders_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut r = rng(400);
    let mut l1: f64 = 0.0;
    for _ in 0..100 {
        let psi0 = r.gen_range(-PI..PI);
        let k = r.gen_range(0.0..2.0);
        let profile: Arc<dyn JetFn> = Arc::new(AngularFn::InvSinSq {
            k,
            freq: 1.0,
            phase: psi0,
        });
        let l = build_ladder_integral(1, profile, psi0)?;
        let (rad, psi) = (r.gen_range(0.5..2.0), r.gen_range(-PI..PI));
        let (pr, pp) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let v = l.eval_native(&[rad, psi], &[pr, pp])?;
        let expect = pr * (psi + psi0).cos() - pp * (psi + psi0).sin() / rad;
        l1 = l1.max((v - expect).abs());
    }
    out.push(Check::at_most("L_1 vs closed form (100 states)", l1, 1e-12));
    for n in 1..=3u32 {
        let psi0 = 0.4;
        let profile: Arc<dyn JetFn> = Arc::new(AngularFn::InvSinSq {
            k: 0.8,
            freq: f64::from(n),
            phase: psi0,
        });
        let seed: Arc<dyn JetFn> = Arc::new(AngularFn::Cos {
            amp: 1.0,
            freq: f64::from(n),
            phase: psi0,
        });
        let base = AngularHamiltonian::natural(profile.clone());
        let u = build_u_ladder(seed, Gamma::InvLinear { n: f64::from(n) }, n, base)?;
        let l = build_ladder_integral(n, profile, psi0)?;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        while count < 100 {
            let psi = r.gen_range(0.0..2.0 * PI);
            if (f64::from(n) * psi + psi0).sin().abs() < DEFAULT_MARGIN {
                continue;
            }
            count += 1;
            let q = [r.gen_range(0.5..2.0), psi];
            let p = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
            worst = worst.max((u.eval_native(&q, &p)? - l.eval_native(&q, &p)?).abs());
        }
        out.push(Check::at_most(
            format!("U-ladder vs L_{n}, gamma = 1/(n r) (100 states)"),
            worst,
            1e-12,
        ));
    }
    Ok(out)
}

/// Start of the platonic drift runs, inside a cell where `f_i > 0`.
pub fn platonic_cell_state(which: u8) -> PhaseState {
    let (theta, phi) = match which {
        1 | 2 => ((1.0 / 3f64.sqrt()).acos() + 0.05, PI / 4.0 - 0.03),
        _ => (1.432, 1.855),
    };
    PhaseState::new(Chart::Sphere2, vec![theta, phi], vec![0.2, 0.15]).expect("two coordinates")
}

fn dynamics_suite() -> anyhow::Result<Vec<Check>> {
    enum Job {
        CalogeroRest,
        CalogeroRandom,
        Platonic(u8),
    }
    let jobs = vec![
        Job::CalogeroRest,
        Job::CalogeroRandom,
        Job::Platonic(1),
        Job::Platonic(2),
        Job::Platonic(3),
    ];
    let results: Vec<anyhow::Result<Vec<Check>>> = jobs
        .into_par_iter()
        .map(|job| -> anyhow::Result<Vec<Check>> {
            let opts = IntegrateOptions::new(1e-3, 100.0).record_every(50);
            match job {
                Job::CalogeroRest | Job::CalogeroRandom => {
                    let pot = potential("calogero", &[("k", 1.0)])?;
                    let flow =
                        Flow::separable(Chart::CartesianLine(3), pot.clone(), Scheme::Yoshida4)?;
                    let (label, s0) = if matches!(job, Job::CalogeroRest) {
                        (
                            "x = (1,0,-1) at rest",
                            PhaseState::new(
                                Chart::CartesianLine(3),
                                vec![1.0, 0.0, -1.0],
                                vec![0.0; 3],
                            )?,
                        )
                    } else {
                        (
                            "seeded state",
                            random_state(
                                &mut rng(500),
                                Chart::CartesianLine(3),
                                Some(&pot),
                                DEFAULT_MARGIN,
                            )?,
                        )
                    };
                    let traj = integrate(&flow, &s0, opts)?;
                    let set = standard_integrals(&System::ThreeBody(Some(pot)))?;
                    let h: Arc<dyn PhaseFunction> = set.hamiltonian.clone();
                    let l3 = set.get("H3").ok_or_else(|| anyhow!("L_3 missing"))?;
                    let d = drift_report(&traj, &[h, l3])?;
                    let mut out = vec![
                        Check::equals(
                            format!("calogero {label}: truncated"),
                            f64::from(u8::from(traj.is_truncated())),
                            0.0,
                        ),
                        Check::at_most(
                            format!("calogero {label}: relative drift of H"),
                            d[0].relative,
                            1e-8,
                        ),
                    ];
                    if d[1].initial != 0.0 {
                        out.push(Check::at_most(
                            format!("calogero {label}: relative drift of L_3"),
                            d[1].relative,
                            1e-6,
                        ));
                    }
                    Ok(out)
                }
                Job::Platonic(which) => {
                    let pot = potential(&format!("platonic-{which}"), &[])?;
                    let flow = Flow::natural(Chart::Sphere2, Some(pot), Scheme::Midpoint4)?;
                    let traj = integrate(&flow, &platonic_cell_state(which), opts)?;
                    let h: Arc<dyn PhaseFunction> = flow.hamiltonian().clone();
                    let d = drift_report(&traj, &[h])?;
                    Ok(vec![
                        Check::equals(
                            format!("platonic-{which}: truncated"),
                            f64::from(u8::from(traj.is_truncated())),
                            0.0,
                        ),
                        Check::at_most(
                            format!("platonic-{which}: relative drift of H1"),
                            d[0].relative,
                            1e-7,
                        ),
                    ])
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
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

/// Period of the TTW angular factor for `h = p/q` in lowest terms.
pub fn ttw_period(p: i64, q: i64, equal_k: bool) -> f64 {
    let (p, q) = if equal_k { (2 * p, q) } else { (p, q) };
    let g = gcd(p, q);
    let q = q / g;
    if q % 2 == 0 {
        q as f64 * PI
    } else {
        2.0 * q as f64 * PI
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn symmetry_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let kinds = [
        (PlatonicKind::Tetra, 1u8, 12.0),
        (PlatonicKind::Octa, 2, 24.0),
        (PlatonicKind::Icosa, 3, 60.0),
    ];
    for (kind, which, order) in kinds {
        let g = platonic_group(kind)?;
        out.push(Check::equals(
            format!("|{}|", kind.name()),
            g.order() as f64,
            order,
        ));
        g.check_axioms()?;
        let f = move |v: &[f64]| {
            let (theta, phi) = sphere_angles([v[0], v[1], v[2]]);
            Ok(platonic_invariant(which, theta, phi))
        };
        let res = check_invariance(f, &g, 200, &mut rng(600 + u64::from(which)))?;
        out.push(Check::at_most(
            format!("f{which} invariance under {}", kind.name()),
            res,
            1e-10,
        ));
    }

    let compose = |s: &[usize], t: &[usize]| -> Vec<usize> { t.iter().map(|&i| s[i]).collect() };
    let mut hom: f64 = 0.0;
    for s in s3() {
        for t in s3() {
            let lhs = permutation_isometry(&compose(&s, &t))?;
            let rhs = permutation_isometry(&s)?.compose(&permutation_isometry(&t)?);
            hom = hom.max(lhs.distance(&rhs));
        }
    }
    out.push(Check::at_most(
        "permutation homomorphism S3 -> O(2)",
        hom,
        1e-12,
    ));

    for pot in [
        potential("calogero", &[("k", 1.0)])?,
        potential("wolfes", &[("h", 1.0)])?,
    ] {
        let mut r = rng(610);
        let mut worst: f64 = 0.0;
        for sigma in s3() {
            let g = permutation_isometry(&sigma)?;
            for _ in 0..100 {
                let s = random_state(&mut r, Chart::OrthogonalZ(3), Some(&pot), 0.1)?;
                let rot = g.act(&s.q[..2]);
                let a = pot.value_at(Chart::OrthogonalZ(3), &s.q)?;
                let b = pot.value_at(Chart::OrthogonalZ(3), &[rot[0], rot[1], s.q[2]])?;
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
        out.push(Check::at_most(
            format!("{} permutation invariance", pot.id()),
            worst,
            1e-12,
        ));
    }

    for (n, psi0) in [(1u32, 0.0), (2, 0.5), (3, 0.2), (4, -0.7), (6, 1.1)] {
        let pot = potential(
            "sin-family",
            &[("k", 1.0), ("n", f64::from(n)), ("psi0", psi0)],
        )?;
        let g = dihedral_group(n, psi0)?;
        let f = |v: &[f64]| pot.value_at(Chart::Cartesian2, v);
        let res = check_invariance(f, &g, 100, &mut rng(620 + u64::from(n)))?;
        out.push(Check::at_most(
            format!("sin-family n={n} dihedral invariance (order {})", g.order()),
            res,
            1e-12,
        ));
    }

    for (p, q) in [(3i64, 2i64), (1, 3), (2, 5), (5, 4)] {
        for equal_k in [false, true] {
            let (k2, k3) = if equal_k { (0.7, 0.7) } else { (0.7, 1.3) };
            let pot = potential(
                "ttw",
                &[
                    ("k1", 0.3),
                    ("k2", k2),
                    ("k3", k3),
                    ("p", p as f64),
                    ("q", q as f64),
                ],
            )?;
            let period = ttw_period(p, q, equal_k);
            let mut r = rng(630 + (p * 10 + q) as u64);
            let (mut shift, mut half) = (0.0f64, 0.0f64);
            let mut count = 0;
            while count < 100 {
                let rad = r.gen_range(0.5..2.0);
                let psi = r.gen_range(0.0..period);
                let s = PhaseState::new(Chart::Polar2, vec![rad, psi], vec![0.0; 2])?;
                let (Ok(a), Ok(b)) = (
                    pot.value_at(Chart::Polar2, &[rad, psi]),
                    pot.value_at(Chart::Polar2, &[rad, psi + period]),
                ) else {
                    continue;
                };
                if a.abs() > 1e4 {
                    continue;
                }
                count += 1;
                shift = shift.max((a - b).abs() / (1.0 + a.abs()));
                half = half.max((ttw_half_angle(&pot, &s)? - a).abs() / (1.0 + a.abs()));
            }
            let tag = if equal_k { "k2 = k3" } else { "k2 != k3" };
            out.push(Check::at_most(
                format!("ttw h={p}/{q} ({tag}) period {:.0} pi", period / PI),
                shift,
                1e-12,
            ));
            out.push(Check::at_most(
                format!("ttw h={p}/{q} ({tag}) half-angle form"),
                half,
                1e-12,
            ));
        }
    }
    Ok(out)
}

fn extensions_suite() -> anyhow::Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut r = rng(700);
    let points: Vec<[f64; 2]> = (0..50)
        .map(|_| [r.gen_range(0.3..PI - 0.3), r.gen_range(0.0..2.0 * PI)])
        .collect();
    type Ambient = fn(f64, f64) -> f64;
    let kernel: [(&str, Ambient); 3] = [
        ("cos theta", |t, _| t.cos()),
        ("sin theta cos phi", |t, p| t.sin() * p.cos()),
        ("sin theta sin phi", |t, p| t.sin() * p.sin()),
    ];
    for (name, g) in kernel {
        let mut worst: f64 = 0.0;
        for q in &points {
            worst = worst.max(hessian_residual(
                |q: &[f64]| Ok(g(q[0], q[1])),
                CurvedChart::Sphere2,
                q,
            )?);
        }
        out.push(Check::at_most(
            format!("hessian residual, G = {name}"),
            worst,
            1e-6,
        ));
    }
    let mut least = f64::INFINITY;
    for q in &points {
        least = least.min(hessian_residual(
            |q: &[f64]| Ok(q[0].cos().powi(2)),
            CurvedChart::Sphere2,
            q,
        )?);
    }
    out.push(Check::at_least(
        "hessian residual, G = cos^2 theta (negative control)",
        least,
        1e-2,
    ));

    let xs: Vec<f64> = (0..=200).map(|i| -10.0 + 0.1 * f64::from(i)).collect();
    let mut branch: f64 = 0.0;
    for &x in &xs {
        branch = branch.max((s_kappa(1.0, x) - x.sin()).abs());
        branch = branch.max((s_kappa(4.0, x) - (2.0 * x).sin() / 2.0).abs());
        branch = branch.max((s_kappa(0.0, x) - x).abs());
        branch = branch.max((s_kappa(-1.0, x) - x.sinh()).abs() / x.cosh());
        branch = branch.max((c_kappa(1.0, x) - x.cos()).abs());
        branch = branch.max((c_kappa(-1.0, x) - x.cosh()).abs() / x.cosh());
    }
    out.push(Check::at_most(
        "S_kappa / C_kappa branch values",
        branch,
        1e-14,
    ));
    let mut cont: f64 = 0.0;
    for kappa in [1e-10, -1e-10, 1e-12, -1e-12] {
        for &x in &xs {
            cont = cont.max((s_kappa(kappa, x) - x).abs());
        }
    }
    out.push(Check::at_most(
        "S_kappa -> x as kappa -> 0 (|x| <= 10, |kappa| <= 1e-10)",
        cont,
        1e-7,
    ));
    let mut near: f64 = 0.0;
    for kappa in [1e-8, -1e-8] {
        for &x in xs.iter().filter(|x| x.abs() <= 3.5) {
            near = near.max((s_kappa(kappa, x) - x).abs());
        }
    }
    out.push(Check::at_most(
        "S_kappa -> x at |kappa| = 1e-8 (|x| <= 3.5)",
        near,
        1e-7,
    ));
    Ok(out)
}

/// Shipped figure configurations, by file name.
pub const SHIPPED_CONFIGS: [(&str, &str); 7] = [
    ("calogero.json", include_str!("../configs/calogero.json")),
    (
        "poincare-platonic-1.json",
        include_str!("../configs/poincare-platonic-1.json"),
    ),
    (
        "poincare-platonic-2.json",
        include_str!("../configs/poincare-platonic-2.json"),
    ),
    (
        "poincare-platonic-3.json",
        include_str!("../configs/poincare-platonic-3.json"),
    ),
    (
        "isopotential-platonic-1.json",
        include_str!("../configs/isopotential-platonic-1.json"),
    ),
    (
        "isopotential-platonic-2.json",
        include_str!("../configs/isopotential-platonic-2.json"),
    ),
    (
        "isopotential-platonic-3.json",
        include_str!("../configs/isopotential-platonic-3.json"),
    ),
];

pub fn shipped_config(name: &str) -> anyhow::Result<RunConfig> {
    let (_, text) = SHIPPED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| anyhow!("no shipped config {name}"))?;
    RunConfig::from_json(text).with_context(|| format!("shipped config {name}"))
}

fn figures_suite(out_dir: &Path) -> anyhow::Result<Vec<Check>> {
    let globals = Globals {
        out: out_dir.to_path_buf(),
        ..Globals::default()
    };
    let mut out = Vec::new();
    for which in 1..=3u8 {
        let cfg = shipped_config(&format!("isopotential-platonic-{which}.json"))?;
        let iso = run_isopotential(&cfg, &globals, None)?;
        out.push(Check::at_least(
            format!("platonic-{which} isopotential: zero-set vertices"),
            iso.map.zero_set.iter().map(Vec::len).sum::<usize>() as f64,
            1.0,
        ));
        out.push(Check::at_most(
            format!("platonic-{which} isopotential: zero-set distance |f|/|grad f|"),
            iso.zero_set_distance,
            1e-9,
        ));
        if which <= 2 {
            let worst = iso
                .map
                .zero_set
                .iter()
                .flatten()
                .map(|&(phi, theta)| distance_to_octant_walls(phi, theta))
                .fold(0.0, f64::max);
            out.push(Check::at_most(
                format!("platonic-{which} isopotential: distance to theta = pi/2, phi = k pi/2"),
                worst,
                1e-9,
            ));
        }
    }
    for which in 1..=3u8 {
        let cfg = shipped_config(&format!("poincare-platonic-{which}.json"))?;
        let run = run_poincare(&cfg, &globals)?;
        out.push(Check::equals(
            format!("platonic-{which} section: initial condition sets"),
            run.sections.sets.len() as f64,
            4.0,
        ));
        let worst_residual = run
            .sections
            .sets
            .iter()
            .flat_map(|s| &s.points)
            .map(|p| p.residual.abs())
            .fold(0.0, f64::max);
        out.push(Check::at_most(
            format!("platonic-{which} section: crossing residual"),
            worst_residual,
            1e-10,
        ));
        for set in &run.sections.sets {
            let pts: Vec<(f64, f64)> = set.points.iter().map(|p| (p.q, p.p)).collect();
            let dev = closed_curve_deviation(&pts).unwrap_or(f64::INFINITY);
            out.push(Check::at_most(
                format!(
                    "platonic-{which} set {}: closed-curve deviation ({} pts)",
                    set.id,
                    pts.len()
                ),
                dev,
                0.02,
            ));
        }
    }
    Ok(out)
}
