//! Symplectic integration, drift monitoring and Poincaré sections.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::coords::{chart_transform, normalize_angle, Chart, PhaseState, TWO_PI};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, NaturalHamiltonian, PhaseFunction};
use crate::potentials::Potential;

/// Fixed-point tolerance of the implicit midpoint iteration.
pub const MIDPOINT_TOL: f64 = 1e-13;
pub const MIDPOINT_MAX_ITER: usize = 50;
/// Largest step-halving depth: the smallest substep is `dt/1024`.
pub const MAX_HALVINGS: u32 = 10;
/// Crossing residual reached by section refinement.
pub const SECTION_TOL: f64 = 1e-10;

fn is_cartesian(chart: Chart) -> bool {
    matches!(
        chart,
        Chart::CartesianLine(_) | Chart::OrthogonalZ(_) | Chart::Cartesian2 | Chart::Cartesian3
    )
}

/// One Störmer–Verlet (kick–drift–kick) step of `½|p|² + V(q)` in a Cartesian chart.
pub fn step_verlet(s: &PhaseState, dt: f64, pot: &Potential) -> Result<PhaseState> {
    if !is_cartesian(s.chart) {
        return Err(Error::Invalid(format!(
            "verlet needs a cartesian chart, got {}",
            s.chart
        )));
    }
    let reject = |e: Error| match e {
        Error::Singular { .. } | Error::SingularChart(_) => Error::StepRejected(e.to_string()),
        other => other,
    };
    let g0 = pot.grad_at(s.chart, &s.q).map_err(reject)?;
    let half: Vec<f64> = s.p.iter().zip(&g0).map(|(p, g)| p - 0.5 * dt * g).collect();
    let q: Vec<f64> = s.q.iter().zip(&half).map(|(q, p)| q + dt * p).collect();
    let g1 = pot.grad_at(s.chart, &q).map_err(reject)?;
    let p = half
        .iter()
        .zip(&g1)
        .map(|(p, g)| p - 0.5 * dt * g)
        .collect();
    PhaseState::new(s.chart, q, p)
}

/// One implicit midpoint step, solved by fixed-point iteration.
pub fn step_implicit_midpoint(s: &PhaseState, dt: f64, h: &dyn Hamiltonian) -> Result<PhaseState> {
    if s.chart != h.chart() {
        return Err(Error::ChartMismatch {
            expected: h.chart(),
            found: s.chart,
        });
    }
    let d = s.dim();
    let z0 = s.to_vector();
    let mut z1 = z0.clone();
    let mut mid = vec![0.0; 2 * d];
    let mut last = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITER {
        for i in 0..2 * d {
            mid[i] = 0.5 * (z0[i] + z1[i]);
        }
        let (dq, dp) = h
            .gradient(&mid[..d], &mid[d..])
            .map_err(|e| Error::StepRejected(e.to_string()))?;
        let mut delta: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for i in 0..d {
            let q = z0[i] + dt * dp[i];
            let p = z0[d + i] - dt * dq[i];
            delta = delta.max((q - z1[i]).abs()).max((p - z1[d + i]).abs());
            scale = scale.max(q.abs()).max(p.abs());
            z1[i] = q;
            z1[d + i] = p;
        }
        if !delta.is_finite() {
            return Err(Error::StepRejected("non-finite midpoint update".into()));
        }
        last = delta;
        if delta <= MIDPOINT_TOL * scale {
            return PhaseState::from_vector(s.chart, &z1);
        }
    }
    Err(Error::NoConvergence {
        iterations: MIDPOINT_MAX_ITER,
        last_update: last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Verlet,
    /// Triple-jump composition of Verlet, order 4.
    Yoshida4,
    Midpoint,
    /// Triple-jump composition of the implicit midpoint rule, order 4.
    Midpoint4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Verlet => "verlet",
            Scheme::Yoshida4 => "yoshida4",
            Scheme::Midpoint => "midpoint",
            Scheme::Midpoint4 => "midpoint4",
        }
    }

    fn is_explicit(self) -> bool {
        matches!(self, Scheme::Verlet | Scheme::Yoshida4)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verlet" => Ok(Scheme::Verlet),
            "yoshida4" => Ok(Scheme::Yoshida4),
            "midpoint" => Ok(Scheme::Midpoint),
            "midpoint4" => Ok(Scheme::Midpoint4),
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

const TRIPLE_JUMP: [f64; 3] = {
    // w1 = 1/(2 − 2^{1/3}), w0 = −2^{1/3}/(2 − 2^{1/3})
    let cbrt2 = 1.259_921_049_894_873_2;
    let w1 = 1.0 / (2.0 - cbrt2);
    [w1, -cbrt2 * w1, w1]
};

/// Step-rejection thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// Reject a step whose end-point potential magnitude exceeds this.
    pub max_potential: f64,
    /// Reject a step whose relative energy change exceeds this.
    pub max_energy_jump: f64,
    pub max_halvings: u32,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_potential: 1e8,
            max_energy_jump: 1e-4,
            max_halvings: MAX_HALVINGS,
        }
    }
}

/// What is integrated: the Hamiltonian, how to step it, and the wall
/// functions whose sign pattern must stay fixed.
#[derive(Clone)]
pub struct Flow {
    hamiltonian: Arc<dyn Hamiltonian>,
    potential: Option<Potential>,
    scheme: Scheme,
}

impl fmt::Debug for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flow")
            .field("hamiltonian", &self.hamiltonian.name())
            .field("chart", &self.hamiltonian.chart())
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl Flow {
    /// `½|p|² + V` in a Cartesian chart, stepped explicitly.
    pub fn separable(chart: Chart, potential: Potential, scheme: Scheme) -> Result<Self> {
        if !scheme.is_explicit() || !is_cartesian(chart) {
            return Err(Error::Invalid(format!(
                "separable flow needs a cartesian chart and an explicit scheme, got {chart} / {scheme}"
            )));
        }
        let h = NaturalHamiltonian::new(chart, Some(potential.clone()))?;
        Ok(Self {
            hamiltonian: Arc::new(h),
            potential: Some(potential),
            scheme,
        })
    }

    /// A natural Hamiltonian in any chart, stepped by the implicit midpoint rule.
    pub fn natural(chart: Chart, potential: Option<Potential>, scheme: Scheme) -> Result<Self> {
        if scheme.is_explicit() {
            return Flow::separable(
                chart,
                potential
                    .ok_or_else(|| Error::Invalid("explicit schemes need a potential".into()))?,
                scheme,
            );
        }
        let h = NaturalHamiltonian::new(chart, potential.clone())?;
        Ok(Self {
            hamiltonian: Arc::new(h),
            potential,
            scheme,
        })
    }

    /// Any Hamiltonian, stepped by an implicit scheme.
    pub fn general(h: Arc<dyn Hamiltonian>, scheme: Scheme) -> Result<Self> {
        if scheme.is_explicit() {
            return Err(Error::Invalid(
                "general flows need an implicit scheme".into(),
            ));
        }
        Ok(Self {
            hamiltonian: h,
            potential: None,
            scheme,
        })
    }

    /// Attaches wall functions for sector monitoring.
    pub fn with_walls(mut self, potential: Potential) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn chart(&self) -> Chart {
        self.hamiltonian.chart()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn hamiltonian(&self) -> &Arc<dyn Hamiltonian> {
        &self.hamiltonian
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    fn base_step(&self, s: &PhaseState, dt: f64) -> Result<PhaseState> {
        match self.scheme {
            Scheme::Verlet | Scheme::Yoshida4 => {
                step_verlet(s, dt, self.potential.as_ref().expect("separable flow"))
            }
            Scheme::Midpoint | Scheme::Midpoint4 => {
                step_implicit_midpoint(s, dt, self.hamiltonian.as_ref())
            }
        }
    }

    /// One unguarded step of the configured scheme.
    pub fn step(&self, s: &PhaseState, dt: f64) -> Result<PhaseState> {
        match self.scheme {
            Scheme::Verlet | Scheme::Midpoint => self.base_step(s, dt),
            Scheme::Yoshida4 | Scheme::Midpoint4 => {
                let mut x = s.clone();
                for w in TRIPLE_JUMP {
                    x = self.base_step(&x, w * dt)?;
                }
                Ok(x)
            }
        }
    }

    /// Sign pattern of the wall functions, if any are attached.
    pub fn sector(&self, s: &PhaseState) -> Option<Vec<bool>> {
        let pot = self.potential.as_ref()?;
        pot.wall_functions(s.chart, &s.q)
            .ok()
            .map(|w| w.iter().map(|v| *v > 0.0).collect())
    }

    fn accept(&self, a: &PhaseState, b: &PhaseState, ea: f64, guards: &Guards) -> Result<f64> {
        if !b.is_finite() {
            return Err(Error::StepRejected("non-finite state".into()));
        }
        if let Some(pot) = &self.potential {
            let v = pot
                .value_at(b.chart, &b.q)
                .map_err(|e| Error::StepRejected(e.to_string()))?;
            if v.abs() > guards.max_potential {
                return Err(Error::StepRejected(format!("potential {v:e} beyond guard")));
            }
            if self.sector(a) != self.sector(b) {
                return Err(Error::StepRejected("wall crossed".into()));
            }
        }
        let eb = self
            .hamiltonian
            .eval_native(&b.q, &b.p)
            .map_err(|e| Error::StepRejected(e.to_string()))?;
        if (eb - ea).abs() > guards.max_energy_jump * (1.0 + ea.abs()) {
            return Err(Error::StepRejected(format!("energy jump {:e}", eb - ea)));
        }
        Ok(eb)
    }
}

/// Integration statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub substeps: usize,
    pub rejections: usize,
    pub min_dt: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, PhaseState)>,
    pub scheme: Scheme,
    pub dt: f64,
    pub stats: StepStats,
    /// Why integration stopped before `t_end`, if it did.
    pub truncation: Option<String>,
}

impl Trajectory {
    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn last(&self) -> &PhaseState {
        &self
            .samples
            .last()
            .expect("trajectory has its initial state")
            .1
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0)
    }
}

/// Options of [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `record_every`-th step in the trajectory.
    pub record_every: usize,
    pub guards: Guards,
}

impl IntegrateOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            record_every: 1,
            guards: Guards::default(),
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }
}

/// An accepted substep, passed to observers.
pub struct Substep<'a> {
    pub t0: f64,
    pub h: f64,
    pub from: &'a PhaseState,
    pub to: &'a PhaseState,
}

pub fn integrate(flow: &Flow, s0: &PhaseState, opts: IntegrateOptions) -> Result<Trajectory> {
    integrate_with(flow, s0, opts, |_| Ok(()))
}

/// Fixed-step integration with guarded halving; `observe` sees every accepted substep.
pub fn integrate_with<F>(
    flow: &Flow,
    s0: &PhaseState,
    opts: IntegrateOptions,
    mut observe: F,
) -> Result<Trajectory>
where
    F: FnMut(&Substep) -> Result<()>,
{
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(crate::error::invalid_param(
            "dt",
            "must be positive and finite",
        ));
    }
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(crate::error::invalid_param(
            "t_end",
            "must be positive and finite",
        ));
    }
    let start = if s0.chart == flow.chart() {
        s0.clone()
    } else {
        chart_transform(s0, flow.chart())?
    };
    let mut energy = flow.hamiltonian.eval_native(&start.q, &start.p)?;
    let n_steps = (opts.t_end / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let mut traj = Trajectory {
        samples: vec![(0.0, start.clone())],
        scheme: flow.scheme,
        dt: opts.dt,
        stats: StepStats {
            min_dt: opts.dt,
            ..StepStats::default()
        },
        truncation: None,
    };
    let mut s = start;
    let mut t = 0.0;
    for k in 0..n_steps {
        let t_next = if k + 1 == n_steps {
            opts.t_end
        } else {
            (k + 1) as f64 * opts.dt
        };
        match guarded(
            flow,
            &s,
            t,
            t_next - t,
            energy,
            &opts.guards,
            0,
            &mut traj.stats,
            &mut observe,
        ) {
            Ok((next, e)) => {
                s = next;
                energy = e;
                t = t_next;
                traj.stats.steps += 1;
                if (k + 1) % opts.record_every == 0 || k + 1 == n_steps {
                    traj.samples.push((t, s.clone()));
                }
            }
            Err(Error::StepRejected(reason)) => {
                if traj.samples.last().map(|x| x.0) != Some(t) {
                    traj.samples.push((t, s.clone()));
                }
                log::debug!("trajectory truncated at t = {t}: {reason}");
                traj.truncation = Some(format!("t = {t}: {reason}"));
                break;
            }
            Err(other) => return Err(other),
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn guarded<F>(
    flow: &Flow,
    s: &PhaseState,
    t: f64,
    h: f64,
    energy: f64,
    guards: &Guards,
    depth: u32,
    stats: &mut StepStats,
    observe: &mut F,
) -> Result<(PhaseState, f64)>
where
    F: FnMut(&Substep) -> Result<()>,
{
    let attempt = flow
        .step(s, h)
        .and_then(|b| flow.accept(s, &b, energy, guards).map(|e| (b, e)));
    match attempt {
        Ok((b, e)) => {
            stats.substeps += 1;
            stats.min_dt = stats.min_dt.min(h);
            observe(&Substep {
                t0: t,
                h,
                from: s,
                to: &b,
            })?;
            Ok((b, e))
        }
        Err(Error::StepRejected(_) | Error::NoConvergence { .. })
            if depth < guards.max_halvings =>
        {
            stats.rejections += 1;
            let (mid, e) = guarded(
                flow,
                s,
                t,
                0.5 * h,
                energy,
                guards,
                depth + 1,
                stats,
                observe,
            )?;
            guarded(
                flow,
                &mid,
                t + 0.5 * h,
                0.5 * h,
                e,
                guards,
                depth + 1,
                stats,
                observe,
            )
        }
        Err(Error::StepRejected(r)) => Err(Error::StepRejected(format!("dt underflow: {r}"))),
        Err(Error::NoConvergence { last_update, .. }) => Err(Error::StepRejected(format!(
            "dt underflow: midpoint iteration stalled at {last_update:e}"
        ))),
        Err(e) => Err(e),
    }
}

/// Maximum drift of one phase function along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    pub name: String,
    pub initial: f64,
    /// `max |I(t) − I(0)| / (1 + |I(0)|)`
    pub drift: f64,
    /// `max |I(t) − I(0)| / |I(0)|`, or the absolute change when `I(0) = 0`.
    pub relative: f64,
    pub series: Vec<(f64, f64)>,
}

pub fn drift_report(traj: &Trajectory, integrals: &[Arc<dyn PhaseFunction>]) -> Result<Vec<Drift>> {
    integrals
        .iter()
        .map(|f| {
            let series: Vec<(f64, f64)> = traj
                .samples
                .iter()
                .map(|(t, s)| Ok((*t, f.eval(s)?)))
                .collect::<Result<_>>()?;
            let initial = series[0].1;
            let max_abs = series
                .iter()
                .fold(0.0f64, |m, (_, v)| m.max((v - initial).abs()));
            Ok(Drift {
                name: f.name().to_string(),
                initial,
                drift: max_abs / (1.0 + initial.abs()),
                relative: if initial == 0.0 {
                    max_abs
                } else {
                    max_abs / initial.abs()
                },
                series,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
    Both,
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "positive" => Ok(Direction::Positive),
            "-" | "negative" => Ok(Direction::Negative),
            "both" => Ok(Direction::Both),
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

/// A section `q[coord] = value` recording `(q[record_q], p[record_p])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionDef {
    pub coord: usize,
    pub value: f64,
    pub direction: Direction,
    pub record_q: usize,
    pub record_p: usize,
    /// Compare the section coordinate modulo 2π.
    pub periodic: bool,
}

impl SectionDef {
    pub fn new(coord: usize, value: f64, record_q: usize, record_p: usize) -> Result<Self> {
        if coord == record_q {
            return Err(Error::Invalid(
                "section and record coordinates coincide".into(),
            ));
        }
        Ok(Self {
            coord,
            value,
            direction: Direction::Positive,
            record_q,
            record_p,
            periodic: false,
        })
    }

    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub fn direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    /// Signed distance of `s` from the section.
    pub fn residual(&self, s: &PhaseState) -> f64 {
        let d = s.q[self.coord] - self.value;
        if self.periodic {
            let w = normalize_angle(d, TWO_PI);
            if w > std::f64::consts::PI {
                w - TWO_PI
            } else {
                w
            }
        } else {
            d
        }
    }

    fn crosses(&self, fa: f64, fb: f64) -> bool {
        if self.periodic && (fa - fb).abs() > std::f64::consts::PI {
            return false;
        }
        let up = fa < 0.0 && fb >= 0.0;
        let down = fa > 0.0 && fb <= 0.0;
        match self.direction {
            Direction::Positive => up,
            Direction::Negative => down,
            Direction::Both => up || down,
        }
    }
}

/// Fraction of a step at which the linear interpolant of `fa → fb` vanishes.
pub fn linear_root(fa: f64, fb: f64) -> f64 {
    fa / (fa - fb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub q: f64,
    pub p: f64,
    pub t: f64,
    pub residual: f64,
    pub trajectory: usize,
}

/// Refines a crossing inside the substep `sub` to `|residual| ≤ 1e-10`.
///
/// The first guess swaps time for the section coordinate (`τ = −f/ḟ`);
/// the Illinois variant of regula falsi finishes the root.
pub fn refine_crossing(
    flow: &Flow,
    sec: &SectionDef,
    sub: &Substep,
) -> Result<Option<(f64, PhaseState)>> {
    let fa = sec.residual(sub.from);
    let fb = sec.residual(sub.to);
    let (_, dp) = flow.hamiltonian.gradient(&sub.from.q, &sub.from.p)?;
    let rate = dp[sec.coord];
    if rate.abs() < 1e-12 {
        return Ok(None);
    }
    let at = |tau: f64| -> Result<(f64, PhaseState)> {
        let s = flow.step(sub.from, tau)?;
        Ok((sec.residual(&s), s))
    };
    let (mut lo, mut flo, mut hi, mut fhi) = (0.0, fa, sub.h, fb);
    let mut tau = -fa / rate;
    if !(tau > 0.0 && tau < sub.h) {
        tau = sub.h * linear_root(fa, fb);
    }
    let mut side = 0i8;
    for _ in 0..60 {
        let (f, s) = at(tau)?;
        if f.abs() <= SECTION_TOL {
            return Ok(Some((sub.t0 + tau, s)));
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = tau;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = tau;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        tau = lo + (hi - lo) * flo / (flo - fhi);
        if hi - lo < 1e-15 * sub.h.max(1e-300) {
            break;
        }
    }
    let (f, s) = at(tau)?;
    if f.abs() <= SECTION_TOL {
        Ok(Some((sub.t0 + tau, s)))
    } else {
        Err(Error::NoConvergence {
            iterations: 60,
            last_update: f,
        })
    }
}

/// Initial conditions sharing one label and color in a section plot.
#[derive(Debug, Clone)]
pub struct InitialSet {
    pub id: String,
    pub states: Vec<PhaseState>,
}

#[derive(Debug, Clone)]
pub struct SectionSetEntry {
    pub id: String,
    pub points: Vec<SectionPoint>,
    pub truncated: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SectionSet {
    pub sets: Vec<SectionSetEntry>,
    pub tangential: usize,
}

impl SectionSet {
    pub fn total_points(&self) -> usize {
        self.sets.iter().map(|s| s.points.len()).sum()
    }
}

/// Section points of one trajectory, plus the count of skipped tangential crossings.
pub fn section_of(
    flow: &Flow,
    s0: &PhaseState,
    sec: &SectionDef,
    opts: IntegrateOptions,
    trajectory: usize,
) -> Result<(Vec<SectionPoint>, usize, Option<String>)> {
    let mut points = Vec::new();
    let mut tangential = 0;
    let opts = IntegrateOptions {
        record_every: usize::MAX,
        ..opts
    };
    let traj = integrate_with(flow, s0, opts, |sub| {
        if sec.crosses(sec.residual(sub.from), sec.residual(sub.to)) {
            match refine_crossing(flow, sec, sub)? {
                Some((t, s)) => points.push(SectionPoint {
                    q: s.q[sec.record_q],
                    p: s.p[sec.record_p],
                    t,
                    residual: sec.residual(&s),
                    trajectory,
                }),
                None => {
                    log::debug!("tangential crossing skipped near t = {}", sub.t0);
                    tangential += 1;
                }
            }
        }
        Ok(())
    })?;
    Ok((points, tangential, traj.truncation))
}

/// Poincaré section of every initial condition in `sets`.
pub fn poincare_section(
    flow: &Flow,
    sets: &[InitialSet],
    sec: &SectionDef,
    opts: IntegrateOptions,
) -> Result<SectionSet> {
    let mut out = SectionSet {
        sets: Vec::new(),
        tangential: 0,
    };
    for set in sets {
        let mut entry = SectionSetEntry {
            id: set.id.clone(),
            points: Vec::new(),
            truncated: Vec::new(),
        };
        for (i, s0) in set.states.iter().enumerate() {
            let (pts, tang, trunc) = section_of(flow, s0, sec, opts, i)?;
            entry.points.extend(pts);
            out.tangential += tang;
            if let Some(r) = trunc {
                entry.truncated.push(r);
            }
        }
        out.sets.push(entry);
    }
    Ok(out)
}

/// Max transverse deviation of a closed polyline through `points`, ordered by
/// angle about their centroid, relative to the cloud diameter.
///
/// Each point is compared with the segment joining its two angular neighbours.
pub fn closed_curve_deviation(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 4 {
        return None;
    }
    let n = points.len() as f64;
    let (cx, cy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let mut diameter: f64 = 0.0;
    for a in points {
        for b in points {
            diameter = diameter.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
        }
    }
    if diameter == 0.0 {
        return None;
    }
    let mut ordered: Vec<(f64, f64)> = points.to_vec();
    ordered.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.total_cmp(&tb)
    });
    let m = ordered.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let a = ordered[(i + m - 1) % m];
        let p = ordered[i];
        let b = ordered[(i + 1) % m];
        worst = worst.max(segment_distance(p, a, b));
    }
    Some(worst / diameter)
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}
