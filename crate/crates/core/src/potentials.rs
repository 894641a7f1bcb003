//! Catalog of potentials with values and exact gradients.
//!
//! Every formula is written once over [`Real`] in the chart where it is
//! naturally stated; other charts are reached through
//! [`chart_transform`], with gradients pulled back as covectors.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coords::{chart_transform, Chart, LineConfig, PhaseState};
use crate::error::{invalid_param, singular, Error, Result};
use crate::jet::{AngularFn, JetFn};
use crate::real::{gradient, Real};

/// Denominators closer to zero than this are singular.
pub const SINGULAR_TOL: f64 = 1e-12;

fn nonzero<S: Real>(v: S, what: &str) -> Result<S> {
    if v.value().abs() < SINGULAR_TOL || !v.value().is_finite() {
        return Err(singular(what));
    }
    Ok(v)
}

fn positive_radius<S: Real>(r: S) -> Result<S> {
    if !(r.value() > 0.0) {
        return Err(Error::SingularChart(format!("radius {}", r.value())));
    }
    Ok(r)
}

#[derive(Debug, Clone)]
enum Model {
    Calogero {
        k: f64,
    },
    Wolfes {
        h: f64,
    },
    SinFamily {
        k: f64,
        n: u32,
        psi0: f64,
    },
    Ttw {
        k1: f64,
        k2: f64,
        k3: f64,
        p: i64,
        q: i64,
    },
    Evans {
        variant: u8,
        k: f64,
        k1: f64,
        k2: f64,
        k3: f64,
        profile: Arc<dyn JetFn>,
    },
    Higgs {
        g: f64,
    },
    Platonic {
        which: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Line3,
    Planar,
    Spatial,
    Sphere,
}

/// Value and (optionally) gradient covector in the evaluation chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
}

/// A validated catalog potential.
#[derive(Debug, Clone)]
pub struct Potential {
    id: String,
    params: BTreeMap<String, f64>,
    model: Model,
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// One parameter of a catalog entry. `default = None` means required.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: Option<f64>,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub formula: &'static str,
    pub params: Vec<ParamSpec>,
    pub charts: Vec<Chart>,
}

const fn req(name: &'static str, note: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: None,
        note,
    }
}

const fn opt(name: &'static str, default: f64, note: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Some(default),
        note,
    }
}

fn family_of(id: &str) -> Option<Family> {
    Some(match id {
        "calogero" | "wolfes" => Family::Line3,
        "sin-family" | "ttw" => Family::Planar,
        "evans-1" | "evans-2" | "evans-3" | "evans-4" | "platonic-1" | "platonic-2"
        | "platonic-3" => Family::Spatial,
        "higgs-cuboctahedral" => Family::Sphere,
        _ => return None,
    })
}

fn supported_charts(family: Family) -> Vec<Chart> {
    match family {
        Family::Line3 => vec![
            Chart::CartesianLine(3),
            Chart::OrthogonalZ(3),
            Chart::Cylindrical3,
        ],
        Family::Planar => vec![
            Chart::Polar2,
            Chart::Cartesian2,
            Chart::Cylindrical3,
            Chart::OrthogonalZ(3),
            Chart::CartesianLine(3),
        ],
        Family::Spatial => vec![
            Chart::Spherical3,
            Chart::Cartesian3,
            Chart::Sphere2,
            Chart::SphericalCylindrical4,
            Chart::OrthogonalZ(4),
            Chart::CartesianLine(4),
        ],
        Family::Sphere => vec![Chart::Sphere2],
    }
}

/// Every catalog entry with its parameters and charts.
pub fn catalog() -> Vec<CatalogEntry> {
    let evans_f = [
        opt("a", 1.0, "F(psi1) = a + b/sin^2(psi1)"),
        opt("b", 0.0, "F(psi1) = a + b/sin^2(psi1)"),
    ];
    let entry = |id: &'static str, formula: &'static str, params: Vec<ParamSpec>| CatalogEntry {
        id,
        formula,
        params,
        charts: supported_charts(family_of(id).expect("catalog id")),
    };
    vec![
        entry("calogero", "sum_i k / X_i^2", vec![req("k", "coupling")]),
        entry(
            "wolfes",
            "sum_i h / (X_i - X_{i+1})^2",
            vec![req("h", "coupling")],
        ),
        entry(
            "sin-family",
            "k / (r sin(n psi + psi0))^2",
            vec![
                req("k", "coupling"),
                req("n", "integer order >= 1"),
                opt("psi0", 0.0, "phase"),
            ],
        ),
        entry(
            "ttw",
            "(1/r^2) [k1 + k2/cos^2(h psi) + k3/sin^2(h psi)], h = p/q",
            vec![
                req("k1", ""),
                req("k2", ""),
                req("k3", ""),
                req("p", "integer numerator"),
                req("q", "integer denominator >= 1, gcd(p,q) = 1"),
            ],
        ),
        entry("evans-1", "F(psi1) / (r3 sin psi2)^2", evans_f.to_vec()),
        entry(
            "evans-2",
            "k/(r3 cos psi2)^2 + F(psi1)/(r3 sin psi2)^2",
            [vec![req("k", "")], evans_f.to_vec()].concat(),
        ),
        entry(
            "evans-3",
            "(k cos psi2 + F(psi1)) / (r3 sin psi2)^2",
            [vec![req("k", "")], evans_f.to_vec()].concat(),
        ),
        entry(
            "evans-4",
            "(1/r3^2) [k + k1/cos^2 psi2 + (k2/cos^2 psi1 + k3/sin^2 psi1)/sin^2 psi2]",
            vec![req("k", ""), req("k1", ""), req("k2", ""), req("k3", "")],
        ),
        entry(
            "higgs-cuboctahedral",
            "(4g/sin^2 th)[1/(1+cos 4ph) + (k-6)/D + 4(k-16+16/k)/D^2], D = k-8+8/k-k cos 4ph, k = tan^2 th",
            vec![req("g", "coupling")],
        ),
        entry(
            "platonic-1",
            "1/(r3^2 f1), f1 = sin^2 th cos th cos ph sin ph",
            vec![],
        ),
        entry("platonic-2", "1/(r3^2 f2), f2 = f1^2", vec![]),
        entry(
            "platonic-3",
            "1/(r3^2 f3), f3 = -cos th [cos^5 th - 5 sin^2 th cos^3 th + 5 sin^4 th cos th + sin^5 th (32 cos ph sin^4 ph - 24 cos ph sin^2 ph + 2 cos ph)]",
            vec![],
        ),
    ]
}

fn integer_param(name: &str, v: f64) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() || v.abs() > 1e15 {
        return Err(invalid_param(name, format!("{v} is not an integer")));
    }
    Ok(v as i64)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Builds and validates a catalog potential. Unknown keys are rejected.
pub fn make_potential(id: &str, params: &BTreeMap<String, f64>) -> Result<Potential> {
    let entry = catalog()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownId(id.to_string()))?;
    for key in params.keys() {
        if !entry.params.iter().any(|p| p.name == key) {
            return Err(invalid_param(key, format!("not a parameter of {id}")));
        }
    }
    let mut resolved = BTreeMap::new();
    for spec in &entry.params {
        let v = match (params.get(spec.name), spec.default) {
            (Some(v), _) => *v,
            (None, Some(d)) => d,
            (None, None) => return Err(invalid_param(spec.name, "missing")),
        };
        if !v.is_finite() {
            return Err(invalid_param(spec.name, "must be finite"));
        }
        resolved.insert(spec.name.to_string(), v);
    }
    let g = |k: &str| resolved[k];
    let model = match id {
        "calogero" => Model::Calogero { k: g("k") },
        "wolfes" => Model::Wolfes { h: g("h") },
        "sin-family" => {
            let n = integer_param("n", g("n"))?;
            if n < 1 {
                return Err(invalid_param("n", "order must be >= 1"));
            }
            Model::SinFamily {
                k: g("k"),
                n: n as u32,
                psi0: g("psi0"),
            }
        }
        "ttw" => {
            let p = integer_param("p", g("p"))?;
            let q = integer_param("q", g("q"))?;
            if q < 1 {
                return Err(invalid_param("q", "denominator must be >= 1"));
            }
            if p == 0 {
                return Err(invalid_param("p", "numerator must be nonzero"));
            }
            if gcd(p, q) != 1 {
                return Err(invalid_param("q", format!("gcd({p}, {q}) != 1")));
            }
            Model::Ttw {
                k1: g("k1"),
                k2: g("k2"),
                k3: g("k3"),
                p,
                q,
            }
        }
        "evans-1" | "evans-2" | "evans-3" | "evans-4" => {
            let variant = id.as_bytes()[6] - b'0';
            let get = |k: &str| resolved.get(k).copied().unwrap_or(0.0);
            Model::Evans {
                variant,
                k: get("k"),
                k1: get("k1"),
                k2: get("k2"),
                k3: get("k3"),
                profile: Arc::new(AngularFn::evans_default(get("a"), get("b"))),
            }
        }
        "higgs-cuboctahedral" => Model::Higgs { g: g("g") },
        "platonic-1" | "platonic-2" | "platonic-3" => Model::Platonic {
            which: id.as_bytes()[9] - b'0',
        },
        _ => unreachable!("catalog ids are matched above"),
    };
    Ok(Potential {
        id: id.to_string(),
        params: resolved,
        model,
    })
}

/// Convenience for building from `(name, value)` pairs.
pub fn potential(id: &str, params: &[(&str, f64)]) -> Result<Potential> {
    let map = params
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect::<BTreeMap<_, _>>();
    make_potential(id, &map)
}

impl Potential {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    fn family(&self) -> Family {
        family_of(&self.id).expect("validated id")
    }

    pub fn supported_charts(&self) -> Vec<Chart> {
        supported_charts(self.family())
    }

    pub fn supports(&self, chart: Chart) -> bool {
        self.supported_charts().contains(&chart)
    }

    /// Replaces the Evans angular profile `F(ψ₁)`.
    pub fn with_profile(mut self, f: Arc<dyn JetFn>) -> Result<Self> {
        match &mut self.model {
            Model::Evans {
                variant, profile, ..
            } if *variant <= 3 => {
                *profile = f;
                self.params.remove("a");
                self.params.remove("b");
                Ok(self)
            }
            _ => Err(Error::Invalid(format!(
                "{} has no pluggable angular profile",
                self.id
            ))),
        }
    }

    /// Coupling constant multiplying a line potential (`k` or `h`).
    pub fn coupling(&self) -> Option<f64> {
        match self.model {
            Model::Calogero { k } => Some(k),
            Model::Wolfes { h } => Some(h),
            Model::SinFamily { k, .. } => Some(k),
            _ => None,
        }
    }

    /// `(n, ψ₀)` of a sin-family entry.
    pub fn sin_family_order(&self) -> Option<(u32, f64)> {
        match self.model {
            Model::SinFamily { n, psi0, .. } => Some((n, psi0)),
            _ => None,
        }
    }

    /// The angular profile `F` with `V = F(ψ)/r²` for planar entries.
    pub fn planar_profile(&self) -> Option<AngularFn> {
        match self.model {
            Model::SinFamily { k, n, psi0 } => Some(AngularFn::InvSinSq {
                k,
                freq: f64::from(n),
                phase: psi0,
            }),
            Model::Ttw { k1, k2, k3, p, q } => {
                Some(AngularFn::ttw(k1, k2, k3, p as f64 / q as f64))
            }
            _ => None,
        }
    }

    /// The angular profile `F(ψ₁)` of `evans-1..3`.
    pub fn evans_profile(&self) -> Option<Arc<dyn JetFn>> {
        match &self.model {
            Model::Evans {
                variant, profile, ..
            } if *variant <= 3 => Some(profile.clone()),
            _ => None,
        }
    }

    /// `(p, q)` of a TTW entry.
    pub fn ttw_ratio(&self) -> Option<(i64, i64)> {
        match self.model {
            Model::Ttw { p, q, .. } => Some((p, q)),
            _ => None,
        }
    }

    /// Chart in which the formula is evaluated for a state in `chart`.
    fn direct_chart(&self, chart: Chart) -> Result<Chart> {
        let direct = match (self.family(), chart) {
            (Family::Line3, Chart::CartesianLine(3)) => chart,
            (Family::Line3, Chart::OrthogonalZ(3) | Chart::Cylindrical3) => Chart::CartesianLine(3),
            (Family::Planar, Chart::Polar2 | Chart::Cylindrical3) => chart,
            (Family::Planar, Chart::Cartesian2) => Chart::Polar2,
            (Family::Planar, Chart::OrthogonalZ(3) | Chart::CartesianLine(3)) => {
                Chart::Cylindrical3
            }
            (
                Family::Spatial,
                Chart::Spherical3 | Chart::SphericalCylindrical4 | Chart::Sphere2,
            ) => chart,
            (Family::Spatial, Chart::Cartesian3) => Chart::Spherical3,
            (Family::Spatial, Chart::OrthogonalZ(4) | Chart::CartesianLine(4)) => {
                Chart::SphericalCylindrical4
            }
            (Family::Sphere, Chart::Sphere2) => chart,
            _ => {
                return Err(Error::ChartMismatch {
                    expected: self.supported_charts()[0],
                    found: chart,
                })
            }
        };
        Ok(direct)
    }

    fn direct_eval<S: Real>(&self, chart: Chart, q: &[S]) -> Result<S> {
        match chart {
            Chart::CartesianLine(3) => self.line3(q),
            Chart::Polar2 | Chart::Cylindrical3 => {
                let r = positive_radius(q[0])?;
                Ok(self.planar_angular(q[1])? / r.sq())
            }
            Chart::Spherical3 => {
                let r = positive_radius(q[0])?;
                Ok(self.spherical_angular(q[1], q[2])? / r.sq())
            }
            Chart::SphericalCylindrical4 => {
                let r = positive_radius(q[0])?;
                Ok(self.spherical_angular(q[2], q[1])? / r.sq())
            }
            Chart::Sphere2 => self.spherical_angular(q[0], q[1]),
            _ => unreachable!("direct charts are filtered by direct_chart"),
        }
    }

    fn line3<S: Real>(&self, x: &[S]) -> Result<S> {
        let scale = 1.0 + x.iter().map(|v| v.value().abs()).fold(0.0, f64::max);
        let d = [x[0] - x[1], x[1] - x[2], x[2] - x[0]];
        let check = |v: S, what: &str| {
            if v.value().abs() < SINGULAR_TOL * scale {
                Err(singular(what))
            } else {
                Ok(v)
            }
        };
        match self.model {
            Model::Calogero { k } => {
                let mut acc = S::cst(0.0);
                for (i, di) in d.iter().enumerate() {
                    let di = check(*di, ["X1", "X2", "X3"][i])?;
                    acc = acc + di.sq().recip() * k;
                }
                Ok(acc)
            }
            Model::Wolfes { h } => {
                let mut acc = S::cst(0.0);
                for i in 0..3 {
                    let e = check(d[i] - d[(i + 1) % 3], ["X1 - X2", "X2 - X3", "X3 - X1"][i])?;
                    acc = acc + e.sq().recip() * h;
                }
                Ok(acc)
            }
            _ => unreachable!("line family"),
        }
    }

    /// `F(ψ)` with `V = F(ψ)/r²`.
    fn planar_angular<S: Real>(&self, psi: S) -> Result<S> {
        match self.model {
            Model::SinFamily { k, n, psi0 } => {
                let s = nonzero((psi * f64::from(n) + psi0).sin(), "sin(n psi + psi0)")?;
                Ok(s.sq().recip() * k)
            }
            Model::Ttw { k1, k2, k3, p, q } => {
                let h = p as f64 / q as f64;
                let t = psi * h;
                let mut acc = S::cst(k1);
                if k2 != 0.0 {
                    acc = acc + nonzero(t.cos(), "cos(h psi)")?.sq().recip() * k2;
                }
                if k3 != 0.0 {
                    acc = acc + nonzero(t.sin(), "sin(h psi)")?.sq().recip() * k3;
                }
                Ok(acc)
            }
            _ => unreachable!("planar family"),
        }
    }

    /// `W(θ, φ) = r²V` for spatial entries, or the sphere potential itself.
    fn spherical_angular<S: Real>(&self, theta: S, phi: S) -> Result<S> {
        match &self.model {
            Model::Evans {
                variant,
                k,
                k1,
                k2,
                k3,
                profile,
            } => {
                let st2 = nonzero(theta.sin(), "sin psi2")?.sq();
                match variant {
                    1..=3 => {
                        let (fv, fd) = profile.value_deriv(phi.value()).map_err(|e| match e {
                            Error::JetPole(m) => singular(format!("F(psi1): {m}")),
                            other => other,
                        })?;
                        let f = phi.chain(fv, fd);
                        Ok(match variant {
                            1 => f / st2,
                            2 => nonzero(theta.cos(), "cos psi2")?.sq().recip() * *k + f / st2,
                            _ => (theta.cos() * *k + f) / st2,
                        })
                    }
                    _ => {
                        let ct2 = nonzero(theta.cos(), "cos psi2")?.sq();
                        let cp2 = nonzero(phi.cos(), "cos psi1")?.sq();
                        let sp2 = nonzero(phi.sin(), "sin psi1")?.sq();
                        Ok(ct2.recip() * *k1 + (cp2.recip() * *k2 + sp2.recip() * *k3) / st2 + *k)
                    }
                }
            }
            Model::Platonic { which } => {
                Ok(platonic_invariant_checked(*which, theta, phi)?.recip())
            }
            Model::Higgs { g } => higgs(*g, theta, phi),
            _ => unreachable!("spatial family"),
        }
    }

    /// Potential value in `chart` at positions `q`.
    pub fn value_at(&self, chart: Chart, q: &[f64]) -> Result<f64> {
        let direct = self.direct_chart(chart)?;
        if q.len() != chart.dim() {
            return Err(Error::Dimension {
                expected: chart.dim(),
                found: q.len(),
            });
        }
        if direct == chart {
            return self.direct_eval(chart, q);
        }
        let s = PhaseState::new(chart, q.to_vec(), vec![0.0; q.len()])?;
        let d = chart_transform(&s, direct)?;
        self.direct_eval(direct, &d.q)
    }

    /// Gradient covector `∂V/∂qⁱ` in `chart`.
    pub fn grad_at(&self, chart: Chart, q: &[f64]) -> Result<Vec<f64>> {
        let direct = self.direct_chart(chart)?;
        if q.len() != chart.dim() {
            return Err(Error::Dimension {
                expected: chart.dim(),
                found: q.len(),
            });
        }
        if direct == chart {
            return gradient(q, |a| self.direct_eval(chart, a));
        }
        let s = PhaseState::new(chart, q.to_vec(), vec![0.0; q.len()])?;
        let d = chart_transform(&s, direct)?;
        let g = gradient(&d.q, |a| self.direct_eval(direct, a))?;
        let covector = PhaseState::new(direct, d.q, g)?;
        Ok(chart_transform(&covector, chart)?.p)
    }

    pub fn eval(&self, s: &PhaseState) -> Result<PotentialValue> {
        Ok(PotentialValue {
            value: self.value_at(s.chart, &s.q)?,
            gradient: None,
        })
    }

    pub fn eval_with_gradient(&self, s: &PhaseState) -> Result<PotentialValue> {
        Ok(PotentialValue {
            value: self.value_at(s.chart, &s.q)?,
            gradient: Some(self.grad_at(s.chart, &s.q)?),
        })
    }

    pub fn grad(&self, s: &PhaseState) -> Result<Vec<f64>> {
        self.grad_at(s.chart, &s.q)
    }

    /// Smallest `|w|` over the wall functions: a scale-free distance to the nearest wall.
    pub fn wall_margin(&self, chart: Chart, q: &[f64]) -> Result<f64> {
        Ok(self
            .wall_functions(chart, q)?
            .iter()
            .fold(f64::INFINITY, |m, w| m.min(w.abs())))
    }

    /// Signed wall functions whose zeros are the singular walls; their sign
    /// pattern labels the dynamically separated sector. Line walls are scaled
    /// by the relative radius so every entry is invariant under dilation.
    pub fn wall_functions(&self, chart: Chart, q: &[f64]) -> Result<Vec<f64>> {
        let direct = self.direct_chart(chart)?;
        let d = if direct == chart {
            q.to_vec()
        } else {
            let s = PhaseState::new(chart, q.to_vec(), vec![0.0; q.len()])?;
            chart_transform(&s, direct)?.q
        };
        Ok(match (&self.model, direct) {
            (Model::Calogero { .. }, _) => {
                let r = relative_radius(&d);
                vec![(d[0] - d[1]) / r, (d[1] - d[2]) / r, (d[2] - d[0]) / r]
            }
            (Model::Wolfes { .. }, _) => {
                let r = relative_radius(&d);
                let x = [d[0] - d[1], d[1] - d[2], d[2] - d[0]];
                vec![(x[0] - x[1]) / r, (x[1] - x[2]) / r, (x[2] - x[0]) / r]
            }
            (Model::SinFamily { n, psi0, .. }, _) => vec![(d[1] * f64::from(*n) + psi0).sin()],
            (Model::Ttw { p, q, .. }, _) => {
                let t = d[1] * (*p as f64 / *q as f64);
                vec![t.sin(), t.cos()]
            }
            (Model::Platonic { which }, c) => {
                let (th, ph) = angles_in(c, &d);
                vec![platonic_invariant(*which, th, ph)]
            }
            (Model::Evans { .. } | Model::Higgs { .. }, c) => {
                let (th, ph) = angles_in(c, &d);
                vec![th.sin(), th.cos(), ph.sin(), ph.cos()]
            }
        })
    }
}

/// Distance of a line configuration from the center-of-mass axis.
fn relative_radius(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt()
}

fn angles_in(chart: Chart, q: &[f64]) -> (f64, f64) {
    match chart {
        Chart::Spherical3 => (q[1], q[2]),
        Chart::SphericalCylindrical4 => (q[2], q[1]),
        _ => (q[0], q[1]),
    }
}

fn higgs<S: Real>(g: f64, theta: S, phi: S) -> Result<S> {
    let st = nonzero(theta.sin(), "sin theta")?;
    nonzero(theta.cos(), "cos theta")?;
    let t = nonzero(theta.tan(), "tan theta")?;
    let k = t.sq();
    let c4 = (phi * 4.0).cos();
    let a = nonzero(c4 + 1.0, "1 + cos 4phi")?;
    let d = nonzero(
        k - 8.0 + k.recip() * 8.0 - k * c4,
        "k - 8 + 8/k - k cos 4phi",
    )?;
    let bracket = a.recip() + (k - 6.0) / d + (k - 16.0 + k.recip() * 16.0) * 4.0 / d.sq();
    Ok(bracket * (4.0 * g) / st.sq())
}

/// Platonic invariants on the sphere: `f1`, `f2 = f1²` and `f3` exactly as printed.
pub fn platonic_invariant<S: Real>(which: u8, theta: S, phi: S) -> S {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    match which {
        1 => st.sq() * ct * cp * sp,
        2 => (st.sq() * ct * cp * sp).sq(),
        3 => -ct * f3_bracket_printed(st, ct, sp, cp),
        _ => panic!("platonic invariant index must be 1, 2 or 3"),
    }
}

fn f3_bracket_printed<S: Real>(st: S, ct: S, sp: S, cp: S) -> S {
    ct.powi(5) - st.sq() * ct.powi(3) * 5.0
        + st.powi(4) * ct * 5.0
        + st.powi(5) * (cp * sp.powi(4) * 32.0 - cp * sp.sq() * 24.0 + cp * 2.0)
}

/// `f3` after collapsing the `ψ` polynomial into `2 cos 5ψ`.
pub fn f3_simplified<S: Real>(theta: S, phi: S) -> S {
    let (st, ct) = (theta.sin(), theta.cos());
    -ct * (ct.powi(5) - st.sq() * ct.powi(3) * 5.0
        + st.powi(4) * ct * 5.0
        + st.powi(5) * (phi * 5.0).cos() * 2.0)
}

fn platonic_invariant_checked<S: Real>(which: u8, theta: S, phi: S) -> Result<S> {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    match which {
        1 | 2 => {
            nonzero(st, "sin theta")?;
            nonzero(ct, "cos theta")?;
            nonzero(sp, "sin psi")?;
            nonzero(cp, "cos psi")?;
        }
        _ => {
            nonzero(ct, "cos theta")?;
            nonzero(f3_bracket_printed(st, ct, sp, cp), "f3 bracket")?;
        }
    }
    Ok(platonic_invariant(which, theta, phi))
}

/// Phase and scale relating a line potential to the polar form
/// `scale·coupling / (r sin(nψ + phase))²` under this crate's chart convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseConstants {
    /// In `[0, π)`.
    pub phase: f64,
    pub scale: f64,
    /// Max relative misfit over the sample points.
    pub residual: f64,
}

/// Fits `(phase, scale)` so that `line(x) = scale·k/(r sin(nψ+phase))²`.
///
/// `template` must be a sin-family entry and supplies `n`. The fit is
/// linear: `k/(r²V) = A + B cos 2nψ + C sin 2nψ` with
/// `A = 1/(2·scale)`, `B = −cos(2·phase)/(2·scale)`, `C = sin(2·phase)/(2·scale)`.
pub fn derive_phase_constants(line: &Potential, template: &Potential) -> Result<PhaseConstants> {
    if line.family() != Family::Line3 {
        return Err(Error::Invalid(format!(
            "{} is not a three-body line potential",
            line.id
        )));
    }
    let (n, _) = template
        .sin_family_order()
        .ok_or_else(|| Error::Invalid(format!("{} is not a sin-family template", template.id)))?;
    let coupling = line.coupling().expect("line potentials have a coupling");
    if coupling == 0.0 {
        return Err(Error::ConventionMismatch {
            residual: f64::INFINITY,
        });
    }
    let samples = sample_line_points(line, 24, 0x5eed)?;
    let nf = f64::from(n);

    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (r, psi, v) in &samples {
        let y = coupling / (r * r * v);
        let row = Vector3::new(1.0, (2.0 * nf * psi).cos(), (2.0 * nf * psi).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = ata.lu().solve(&aty).ok_or(Error::ConventionMismatch {
        residual: f64::INFINITY,
    })?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if !(a > 0.0) {
        return Err(Error::ConventionMismatch {
            residual: f64::INFINITY,
        });
    }
    let scale = 1.0 / (2.0 * a);
    let phase = crate::coords::normalize_angle(c.atan2(-b) / 2.0, PI);

    let residual = samples
        .iter()
        .map(|(r, psi, v)| {
            let model = scale * coupling / (r * r * (nf * psi + phase).sin().powi(2));
            (v - model).abs() / (1.0 + v.abs())
        })
        .fold(0.0, f64::max);
    if !(residual <= 1e-9) {
        return Err(Error::ConventionMismatch { residual });
    }
    Ok(PhaseConstants {
        phase,
        scale,
        residual,
    })
}

/// Seeded nonsingular three-body configurations as `(r, ψ, V)` triples.
fn sample_line_points(line: &Potential, count: usize, seed: u64) -> Result<Vec<(f64, f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count {
            return Err(Error::Invalid("could not sample nonsingular points".into()));
        }
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let walls = line.wall_functions(Chart::CartesianLine(3), &x)?;
        if walls.iter().any(|w| w.abs() < 0.05) {
            continue;
        }
        let cyl = chart_transform(
            &LineConfig::at_rest(x.clone())?.into_state(),
            Chart::Cylindrical3,
        )?;
        if cyl.q[0] < 0.1 {
            continue;
        }
        let v = line.value_at(Chart::CartesianLine(3), &x)?;
        out.push((cyl.q[0], cyl.q[1], v));
    }
    Ok(out)
}

/// TTW after the half-angle substitution:
/// `(1/r²)[k₁ + 2((k₂+k₃) + (k₃−k₂) cos 2hψ)/sin² 2hψ]`.
pub fn ttw_half_angle(pot: &Potential, s: &PhaseState) -> Result<f64> {
    let Model::Ttw { k1, k2, k3, p, q } = pot.model else {
        return Err(Error::Invalid(format!("{} is not a TTW potential", pot.id)));
    };
    let polar = match s.chart {
        Chart::Polar2 | Chart::Cylindrical3 => s.clone(),
        Chart::Cartesian2 => chart_transform(s, Chart::Polar2)?,
        Chart::OrthogonalZ(3) | Chart::CartesianLine(3) => chart_transform(s, Chart::Cylindrical3)?,
        other => {
            return Err(Error::ChartMismatch {
                expected: Chart::Polar2,
                found: other,
            })
        }
    };
    let r = positive_radius(polar.q[0])?;
    let two_h_psi = 2.0 * (p as f64 / q as f64) * polar.q[1];
    let s2 = nonzero(two_h_psi.sin(), "sin(2h psi)")?;
    Ok((k1 + 2.0 * ((k2 + k3) + (k3 - k2) * two_h_psi.cos()) / (s2 * s2)) / (r * r))
}
