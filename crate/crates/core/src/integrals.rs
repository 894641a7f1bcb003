//! First integrals: the quadratic families, the degree-`n` ladder integral
//! and a finite-difference Poisson bracket.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coords::{Chart, PhaseState};
use crate::error::{invalid_param, singular, Error, Result};
use crate::hamiltonian::{ClosedForm, Hamiltonian, NaturalHamiltonian, PhaseFunction};
use crate::jet::{Jet, JetFn};
use crate::potentials::Potential;

/// Largest ladder order accepted by [`build_ladder_integral`].
pub const MAX_LADDER_ORDER: u32 = 16;

/// Base step of the bracket stencil; angles use it unscaled, other
/// coordinates scale it by `1 + |x|`.
pub const STEP: f64 = 1.5e-3;

/// `Σ p_r^a p_ψ^b r^{-c} g_{abc}(ψ)` with each `g` a Taylor jet at a fixed `ψ`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentumPoly {
    terms: BTreeMap<(u32, u32, u32), Jet>,
}

impl MomentumPoly {
    pub fn monomial(a: u32, b: u32, c: u32, g: Jet) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((a, b, c), g);
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Jet)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, key: (u32, u32, u32), g: Jet) {
        match self.terms.get_mut(&key) {
            Some(e) => *e = &*e + &g,
            None => {
                self.terms.insert(key, g);
            }
        }
    }

    /// Highest total momentum degree among terms with a nonzero value.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(_, g)| g.value() != 0.0)
            .map(|(&(a, b, _), _)| a + b)
            .max()
            .unwrap_or(0)
    }

    /// Value with `r^{-c}` as the third factor.
    pub fn eval(&self, r: f64, p_r: f64, p_psi: f64) -> f64 {
        self.eval_weighted(1.0 / r, p_r, p_psi)
    }

    /// Value with `w^c` as the third factor.
    pub fn eval_weighted(&self, w: f64, p_a: f64, p_b: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b, c), g)| {
                g.value() * p_a.powi(a as i32) * p_b.powi(b as i32) * w.powi(c as i32)
            })
            .sum()
    }

    /// One application of `p_r + (1/(n r))(p_ψ ∂_ψ − F′ ∂_{p_ψ})`.
    ///
    /// `dF` is the jet of `F′`; coefficient jets lose one order.
    pub fn apply_ladder_step(&self, n: u32, d_f: &Jet) -> Result<MomentumPoly> {
        let nf = f64::from(n);
        let mut out = MomentumPoly::default();
        for (&(a, b, c), g) in &self.terms {
            let m = g.order();
            if m == 0 {
                return Err(Error::Invalid("coefficient jets exhausted".into()));
            }
            out.add_term((a + 1, b, c), g.truncate(m - 1));
            out.add_term((a, b + 1, c + 1), g.derivative().scale(1.0 / nf));
            if b > 0 {
                let t = (d_f * g).truncate(m - 1).scale(-f64::from(b) / nf);
                out.add_term((a, b - 1, c + 1), t);
            }
        }
        Ok(out)
    }
}

/// `L_n = [p_r + (1/(n r))(p_ψ ∂_ψ − F′ ∂_{p_ψ})]^n cos(nψ + ψ₀)`.
#[derive(Clone)]
pub struct LadderIntegral {
    n: u32,
    profile: Arc<dyn JetFn>,
    psi0: f64,
    chart: Chart,
    name: String,
}

impl fmt::Debug for LadderIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LadderIntegral")
            .field("n", &self.n)
            .field("profile", &self.profile)
            .field("psi0", &self.psi0)
            .field("chart", &self.chart)
            .finish()
    }
}

pub fn build_ladder_integral(n: u32, profile: Arc<dyn JetFn>, psi0: f64) -> Result<LadderIntegral> {
    if n == 0 || n > MAX_LADDER_ORDER {
        return Err(invalid_param(
            "n",
            format!("must be in 1..={MAX_LADDER_ORDER}"),
        ));
    }
    if !psi0.is_finite() {
        return Err(invalid_param("psi0", "must be finite"));
    }
    Ok(LadderIntegral {
        n,
        profile,
        psi0,
        chart: Chart::Polar2,
        name: format!("L{n}"),
    })
}

impl LadderIntegral {
    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn profile(&self) -> &Arc<dyn JetFn> {
        &self.profile
    }

    /// Evaluates in `cylindrical-3` instead of `polar-2`; the axial pair is ignored.
    pub fn in_cylindrical(mut self) -> Self {
        self.chart = Chart::Cylindrical3;
        self
    }

    /// The momentum polynomial with coefficients expanded at `psi`.
    pub fn expand(&self, psi: f64) -> Result<MomentumPoly> {
        let order = self.n as usize;
        let nf = f64::from(self.n);
        let seed = Jet::linear(nf, nf * psi + self.psi0, order).cos();
        let d_f = self.profile.jet(psi, order)?.derivative();
        let mut poly = MomentumPoly::monomial(0, 0, 0, seed);
        for _ in 0..self.n {
            poly = poly.apply_ladder_step(self.n, &d_f)?;
        }
        Ok(poly)
    }
}

impl PhaseFunction for LadderIntegral {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn momentum_degree(&self) -> Option<usize> {
        Some(self.n as usize)
    }
    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        if q.len() != self.chart.dim() || p.len() != self.chart.dim() {
            return Err(Error::Dimension {
                expected: self.chart.dim(),
                found: q.len().min(p.len()),
            });
        }
        let r = q[0];
        if !(r > 0.0) {
            return Err(Error::SingularChart(format!("radius {r}")));
        }
        Ok(self.expand(q[1])?.eval(r, p[0], p[1]))
    }
}

/// Systems with a prewired set of quadratic integrals.
#[derive(Debug, Clone)]
pub enum System {
    /// Three particles on a line with `V = F(ψ)/r²` in `cylindrical-3`; `None` is free motion.
    ThreeBody(Option<Potential>),
    /// `½p_u² + H` for a spatial potential in `spherical-cylindrical-4`.
    Evans4d(Potential),
}

impl System {
    /// Builds a system from `three-body` or `evans-4d`.
    pub fn from_id(id: &str, potential: Option<Potential>) -> Result<Self> {
        match (id, potential) {
            ("three-body", p) => Ok(System::ThreeBody(p)),
            ("evans-4d", Some(p)) => Ok(System::Evans4d(p)),
            ("evans-4d", None) => Err(Error::Invalid("evans-4d needs a potential".into())),
            (other, _) => Err(Error::UnknownId(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            System::ThreeBody(_) => "three-body",
            System::Evans4d(_) => "evans-4d",
        }
    }
}

/// A named slot of a [`StandardIntegralSet`]; open slots await a user expression.
#[derive(Clone)]
pub struct IntegralSlot {
    pub name: String,
    pub function: Option<Arc<dyn PhaseFunction>>,
}

impl fmt::Debug for IntegralSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralSlot")
            .field("name", &self.name)
            .field("filled", &self.function.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct StandardIntegralSet {
    pub hamiltonian: Arc<NaturalHamiltonian>,
    slots: Vec<IntegralSlot>,
}

impl StandardIntegralSet {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[IntegralSlot] {
        &self.slots
    }

    /// Filled members, the Hamiltonian first.
    pub fn members(&self) -> Vec<Arc<dyn PhaseFunction>> {
        self.slots
            .iter()
            .filter_map(|s| s.function.clone())
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn PhaseFunction>> {
        self.slots
            .iter()
            .find(|s| s.name == name)
            .and_then(|s| s.function.clone())
    }

    /// Replaces the function in slot `name`.
    pub fn set(&mut self, name: &str, f: Arc<dyn PhaseFunction>) -> Result<()> {
        let slot = self
            .slots
            .iter_mut()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownId(name.to_string()))?;
        slot.function = Some(f);
        Ok(())
    }
}

fn filled(name: &str, f: Arc<dyn PhaseFunction>) -> IntegralSlot {
    IntegralSlot {
        name: name.to_string(),
        function: Some(f),
    }
}

fn closed<F>(name: &str, chart: Chart, f: F) -> IntegralSlot
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
{
    filled(name, Arc::new(ClosedForm::new(name, chart, Some(2), f)))
}

fn radius(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::SingularChart(format!("radius {r}")));
    }
    Ok(r)
}

pub fn standard_integrals(system: &System) -> Result<StandardIntegralSet> {
    match system {
        System::ThreeBody(pot) => three_body(pot.clone()),
        System::Evans4d(pot) => evans_4d(pot.clone()),
    }
}

fn three_body(pot: Option<Potential>) -> Result<StandardIntegralSet> {
    let chart = Chart::Cylindrical3;
    let h = Arc::new(NaturalHamiltonian::new(chart, pot.clone())?);
    let angular = Arc::new(move |q: &[f64], p: &[f64]| -> Result<f64> {
        let r = radius(q[0])?;
        let w = match &pot {
            Some(v) => r * r * v.value_at(chart, q)?,
            None => 0.0,
        };
        Ok(0.5 * p[1] * p[1] + w)
    });
    let h1 = angular.clone();
    let h3 = angular;
    Ok(StandardIntegralSet {
        hamiltonian: h.clone(),
        slots: vec![
            filled("H", h),
            closed("H1", chart, move |q, p| h1(q, p)),
            closed("H2", chart, |_, p| Ok(0.5 * p[2] * p[2])),
            closed("H3", chart, move |q, p| {
                let (r, u) = (radius(q[0])?, q[2]);
                let m = r * p[2] - u * p[0];
                Ok(0.5 * m * m + u * u / (r * r) * h3(q, p)?)
            }),
        ],
    })
}

fn evans_4d(pot: Potential) -> Result<StandardIntegralSet> {
    let chart = Chart::SphericalCylindrical4;
    let h = Arc::new(NaturalHamiltonian::new(chart, Some(pot.clone()))?);
    let p1 = pot.clone();
    let sphere = Arc::new(move |q: &[f64], p: &[f64]| -> Result<f64> {
        let r = radius(q[0])?;
        let s = q[2].sin();
        if s.abs() < 1e-14 {
            return Err(Error::SingularChart("sin psi2 = 0".into()));
        }
        Ok(0.5 * (p[2] * p[2] + p[1] * p[1] / (s * s)) + r * r * p1.value_at(chart, q)?)
    });
    let h1 = sphere.clone();
    let h6 = sphere;
    let mut slots = vec![
        filled("H", h.clone()),
        closed("H1", chart, move |q, p| h1(q, p)),
    ];
    let (e1, e2) = evans_extras(&pot, h.clone())?;
    slots.push(e1);
    slots.push(e2);
    slots.push(closed("H5", chart, |_, p| Ok(p[3] * p[3])));
    slots.push(closed("H6", chart, move |q, p| {
        let r = radius(q[0])?;
        let m = q[3] * p[0] - r * p[3];
        Ok(0.5 * m * m + q[3] * q[3] / (r * r) * h6(q, p)?)
    }));
    Ok(StandardIntegralSet {
        hamiltonian: h,
        slots,
    })
}

/// The two extra quadratic integrals of each Evans potential; empty slots otherwise.
fn evans_extras(
    pot: &Potential,
    h: Arc<NaturalHamiltonian>,
) -> Result<(IntegralSlot, IntegralSlot)> {
    let sc4 = Chart::SphericalCylindrical4;
    let z4 = Chart::OrthogonalZ(4);
    let prm = |k: &str| pot.params().get(k).copied().unwrap_or(0.0);
    let open = |name: &str| IntegralSlot {
        name: name.to_string(),
        function: None,
    };
    let variant = match pot.id() {
        "evans-1" => 1,
        "evans-2" => 2,
        "evans-3" => 3,
        "evans-4" => 4,
        _ => return Ok((open("E1"), open("E2"))),
    };
    if variant == 4 {
        let (k1, k2, k3) = (prm("k1"), prm("k2"), prm("k3"));
        let j = closed("E1", sc4, move |q, p| {
            let (c, s) = (q[1].cos(), q[1].sin());
            if c.abs() < 1e-14 || s.abs() < 1e-14 {
                return Err(singular("cos psi1 sin psi1"));
            }
            Ok(0.5 * p[1] * p[1] + k2 / (c * c) + k3 / (s * s))
        });
        let ix = closed("E2", z4, move |q, p| {
            let (y, z) = (q[1], q[2]);
            if y.abs() < 1e-14 || z.abs() < 1e-14 {
                return Err(singular("y z"));
            }
            let l = y * p[2] - z * p[1];
            Ok(0.5 * l * l + k1 * y * y / (z * z) + k3 * z * z / (y * y))
        });
        return Ok((j, ix));
    }
    let profile = pot.evans_profile().expect("evans-1..3 carry a profile");
    let j = closed("E1", sc4, move |q, p| {
        Ok(0.5 * p[1] * p[1] + profile.value(q[1])?)
    });
    let k = prm("k");
    let second = match variant {
        1 => closed("E2", z4, |_, p| Ok(0.5 * p[2] * p[2])),
        2 => closed("E2", z4, move |q, p| {
            if q[2].abs() < 1e-14 {
                return Err(singular("z"));
            }
            Ok(0.5 * p[2] * p[2] + k / (q[2] * q[2]))
        }),
        _ => {
            let pr = pot.evans_profile().expect("evans-3 carries a profile");
            closed("E2", sc4, move |q, p| {
                // Separation constant in parabolic coordinates ξ = r + z, η = r − z.
                let r = radius(q[0])?;
                let (ct, th) = (q[2].cos(), q[2]);
                let xi = r * (1.0 + ct);
                if xi < 1e-14 * r {
                    return Err(Error::SingularChart("xi = 0".into()));
                }
                let p_xi = 0.5 * (p[0] - p[2] * (0.5 * th).tan() / r);
                let jv = 0.5 * p[1] * p[1] + pr.value(q[1])?;
                let h3 = h.eval_native(q, p)? - 0.5 * p[3] * p[3];
                Ok(2.0 * xi * p_xi * p_xi + (jv - k) / xi - xi * h3)
            })
        }
    };
    Ok((j, second))
}

/// `{f, g}` at `s` by finite differences in the chart of `s`.
///
/// Each partial is a five-point central difference extrapolated over three
/// step halvings, accurate to `O(h⁸)`.
pub fn poisson_bracket_with<F, G>(f: F, g: G, s: &PhaseState) -> Result<f64>
where
    F: Fn(&PhaseState) -> Result<f64>,
    G: Fn(&PhaseState) -> Result<f64>,
{
    let d = s.dim();
    let z = s.to_vector();
    let df = partials(&f, s.chart, &z)?;
    let dg = partials(&g, s.chart, &z)?;
    Ok((0..d).map(|i| df[i] * dg[d + i] - df[d + i] * dg[i]).sum())
}

/// `{f, g}` for two phase functions, each evaluated through its own chart.
pub fn poisson_bracket(
    f: &dyn PhaseFunction,
    g: &dyn PhaseFunction,
    s: &PhaseState,
) -> Result<f64> {
    poisson_bracket_with(|x| f.eval(x), |x| g.eval(x), s)
}

fn partials<F>(f: &F, chart: Chart, z: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&PhaseState) -> Result<f64>,
{
    let angular = chart.angular_indices();
    let mut w = z.to_vec();
    let mut at = |i: usize, x: f64| -> Result<f64> {
        w[i] = x;
        let v = PhaseState::from_vector(chart, &w).and_then(|s| f(&s));
        w[i] = z[i];
        v
    };
    let mut five_point = |i: usize, h: f64| -> Result<f64> {
        let d1 = at(i, z[i] + h)? - at(i, z[i] - h)?;
        let d2 = at(i, z[i] + 2.0 * h)? - at(i, z[i] - 2.0 * h)?;
        Ok((8.0 * d1 - d2) / (12.0 * h))
    };
    (0..z.len())
        .map(|i| {
            let h = if angular.contains(&i) {
                STEP
            } else {
                STEP * (1.0 + z[i].abs())
            };
            let d = [
                five_point(i, h)?,
                five_point(i, 0.5 * h)?,
                five_point(i, 0.25 * h)?,
            ];
            let r1 = (16.0 * d[1] - d[0]) / 15.0;
            let r2 = (16.0 * d[2] - d[1]) / 15.0;
            Ok((64.0 * r2 - r1) / 63.0)
        })
        .collect()
}

/// Brackets of every filled member against the set's Hamiltonian.
pub fn bracket_report(set: &StandardIntegralSet, s: &PhaseState) -> Result<Vec<(String, f64)>> {
    let h: &dyn Hamiltonian = set.hamiltonian.as_ref();
    set.slots
        .iter()
        .filter_map(|slot| slot.function.as_ref().map(|f| (slot.name.clone(), f)))
        .map(|(name, f)| Ok((name, poisson_bracket(f.as_ref(), h, s)?)))
        .collect()
}
