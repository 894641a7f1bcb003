//! Canonical coordinate changes between particles on a line and one point
//! in a Euclidean chart.
//!
//! Positions transform by the chart map; momenta transform as covectors,
//! `p_dst = J⁻ᵀ p_src` with `J = ∂q_dst/∂q_src`, using closed-form
//! Jacobians for every supported pair. See `CHARTS.md` for orderings and
//! angular conventions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::real::Real;

/// Base manifold of an extended (product) chart `(u, base…)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseChart {
    Circle1,
    Cartesian2,
    Sphere2,
}

impl BaseChart {
    pub fn chart(self) -> Chart {
        match self {
            BaseChart::Circle1 => Chart::Circle1,
            BaseChart::Cartesian2 => Chart::Cartesian2,
            BaseChart::Sphere2 => Chart::Sphere2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// Particle positions `x¹…xⁿ` on the line.
    CartesianLine(usize),
    /// Orthogonal coordinates `z¹…zⁿ`, `zⁿ` along (1,…,1).
    OrthogonalZ(usize),
    /// `(r, ψ, u)` over `OrthogonalZ(3)`: `z¹ = r cosψ`, `z² = r sinψ`, `u = z³`.
    Cylindrical3,
    /// `(r₃, ψ₁, ψ₂, u)` over `OrthogonalZ(4)`:
    /// `z¹ = r₃ sinψ₂ cosψ₁`, `z² = r₃ sinψ₂ sinψ₁`, `z³ = r₃ cosψ₂`, `u = z⁴`.
    SphericalCylindrical4,
    Cartesian2,
    /// `(r, ψ)`: `x = r cosψ`, `y = r sinψ`.
    Polar2,
    Cartesian3,
    /// `(r, θ, φ)`: `x = r sinθ cosφ`, `y = r sinθ sinφ`, `z = r cosθ`.
    Spherical3,
    /// `(θ, φ)` on the unit sphere.
    Sphere2,
    /// `ψ` on the unit circle.
    Circle1,
    /// `(u, base…)` product chart of an extended Hamiltonian.
    Extended(BaseChart),
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::CartesianLine(n) | Chart::OrthogonalZ(n) => n,
            Chart::Cylindrical3 | Chart::Cartesian3 | Chart::Spherical3 => 3,
            Chart::SphericalCylindrical4 => 4,
            Chart::Cartesian2 | Chart::Polar2 | Chart::Sphere2 => 2,
            Chart::Circle1 => 1,
            Chart::Extended(b) => 1 + b.chart().dim(),
        }
    }

    pub fn tag(self) -> String {
        match self {
            Chart::CartesianLine(n) => format!("cartesian-line-{n}"),
            Chart::OrthogonalZ(n) => format!("orthogonal-z-{n}"),
            Chart::Cylindrical3 => "cylindrical-3".into(),
            Chart::SphericalCylindrical4 => "spherical-cylindrical-4".into(),
            Chart::Cartesian2 => "cartesian-2".into(),
            Chart::Polar2 => "polar-2".into(),
            Chart::Cartesian3 => "cartesian-3".into(),
            Chart::Spherical3 => "spherical-3".into(),
            Chart::Sphere2 => "sphere-2".into(),
            Chart::Circle1 => "circle-1".into(),
            Chart::Extended(BaseChart::Circle1) => "extended-circle-1".into(),
            Chart::Extended(BaseChart::Cartesian2) => "extended-cartesian-2".into(),
            Chart::Extended(BaseChart::Sphere2) => "extended-sphere-2".into(),
        }
    }

    /// Coordinate names in storage order.
    pub fn coordinate_names(self) -> Vec<String> {
        let fixed = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        match self {
            Chart::CartesianLine(n) => (1..=n).map(|i| format!("x{i}")).collect(),
            Chart::OrthogonalZ(n) => (1..=n).map(|i| format!("z{i}")).collect(),
            Chart::Cylindrical3 => fixed(&["r", "psi", "u"]),
            Chart::SphericalCylindrical4 => fixed(&["r3", "psi1", "psi2", "u"]),
            Chart::Cartesian2 => fixed(&["x", "y"]),
            Chart::Polar2 => fixed(&["r", "psi"]),
            Chart::Cartesian3 => fixed(&["x", "y", "z"]),
            Chart::Spherical3 => fixed(&["r", "theta", "phi"]),
            Chart::Sphere2 => fixed(&["theta", "phi"]),
            Chart::Circle1 => fixed(&["psi"]),
            Chart::Extended(b) => {
                let mut v = vec!["u".to_string()];
                v.extend(b.chart().coordinate_names());
                v
            }
        }
    }

    /// Diagonal of the inverse metric `g^{ii}(q)`; every built-in chart is orthogonal.
    pub fn inverse_metric_diag<S: Real>(self, q: &[S]) -> Result<Vec<S>> {
        check_dim(self, q.len())?;
        let one = S::cst(1.0);
        Ok(match self {
            Chart::CartesianLine(_)
            | Chart::OrthogonalZ(_)
            | Chart::Cartesian2
            | Chart::Cartesian3
            | Chart::Circle1 => vec![one; self.dim()],
            Chart::Cylindrical3 => vec![one, radial(q[0])?.sq().recip(), one],
            Chart::Polar2 => vec![one, radial(q[0])?.sq().recip()],
            Chart::Spherical3 => {
                let r2 = radial(q[0])?.sq();
                let s = polar_sin(q[1])?;
                vec![one, r2.recip(), (r2 * s.sq()).recip()]
            }
            Chart::SphericalCylindrical4 => {
                let r2 = radial(q[0])?.sq();
                let s = polar_sin(q[2])?;
                vec![one, (r2 * s.sq()).recip(), r2.recip(), one]
            }
            Chart::Sphere2 => vec![one, polar_sin(q[0])?.sq().recip()],
            Chart::Extended(_) => {
                return Err(Error::Invalid(
                    "extended charts carry no fixed metric".into(),
                ))
            }
        })
    }

    /// Kinetic energy `½ g^{ij} p_i p_j`.
    pub fn kinetic_energy(self, q: &[f64], p: &[f64]) -> Result<f64> {
        check_dim(self, p.len())?;
        let g = self.inverse_metric_diag(q)?;
        Ok(0.5 * g.iter().zip(p).map(|(g, p)| g * p * p).sum::<f64>())
    }

    /// Indices of angular coordinates.
    pub fn angular_indices(self) -> Vec<usize> {
        match self {
            Chart::Cylindrical3 | Chart::Polar2 => vec![1],
            Chart::SphericalCylindrical4 => vec![1, 2],
            Chart::Spherical3 => vec![1, 2],
            Chart::Sphere2 => vec![0, 1],
            Chart::Circle1 => vec![0],
            Chart::Extended(b) => b.chart().angular_indices().iter().map(|i| i + 1).collect(),
            _ => vec![],
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_n = |rest: &str| {
            rest.parse::<usize>()
                .ok()
                .filter(|n| *n >= 2)
                .ok_or_else(|| Error::UnknownId(s.to_string()))
        };
        if let Some(rest) = s.strip_prefix("cartesian-line-") {
            return Ok(Chart::CartesianLine(parse_n(rest)?));
        }
        if let Some(rest) = s.strip_prefix("orthogonal-z-") {
            return Ok(Chart::OrthogonalZ(parse_n(rest)?));
        }
        Ok(match s {
            "cylindrical-3" => Chart::Cylindrical3,
            "spherical-cylindrical-4" => Chart::SphericalCylindrical4,
            "cartesian-2" => Chart::Cartesian2,
            "polar-2" => Chart::Polar2,
            "cartesian-3" => Chart::Cartesian3,
            "spherical-3" => Chart::Spherical3,
            "sphere-2" => Chart::Sphere2,
            "circle-1" => Chart::Circle1,
            "extended-circle-1" => Chart::Extended(BaseChart::Circle1),
            "extended-cartesian-2" => Chart::Extended(BaseChart::Cartesian2),
            "extended-sphere-2" => Chart::Extended(BaseChart::Sphere2),
            _ => return Err(Error::UnknownId(s.to_string())),
        })
    }
}

fn check_dim(chart: Chart, len: usize) -> Result<()> {
    if chart.dim() != len {
        return Err(Error::Dimension {
            expected: chart.dim(),
            found: len,
        });
    }
    Ok(())
}

fn radial<S: Real>(r: S) -> Result<S> {
    if !(r.value() > 0.0) || !r.value().is_finite() {
        return Err(Error::SingularChart(format!("radius {}", r.value())));
    }
    Ok(r)
}

fn polar_sin<S: Real>(theta: S) -> Result<S> {
    let s = theta.sin();
    if s.value().abs() < 1e-300 || !s.value().is_finite() {
        return Err(Error::SingularChart(format!(
            "sin of polar angle {} vanishes",
            theta.value()
        )));
    }
    Ok(s)
}

/// Positions and conjugate momenta of `n` particles on a line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineConfig {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl LineConfig {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Invalid("a line configuration needs n >= 2".into()));
        }
        if p.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: p.len(),
            });
        }
        Ok(Self { x, p })
    }

    pub fn at_rest(x: Vec<f64>) -> Result<Self> {
        let n = x.len();
        Self::new(x, vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Consecutive differences `X_i = xⁱ − xⁱ⁺¹`, cyclic (`X_n = xⁿ − x¹`).
    pub fn differences(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| self.x[i] - self.x[(i + 1) % n]).collect()
    }

    pub fn into_state(self) -> PhaseState {
        PhaseState {
            chart: Chart::CartesianLine(self.x.len()),
            q: self.x,
            p: self.p,
        }
    }
}

/// A point of phase space in a given chart. Angles are stored unreduced.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub chart: Chart,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseState {
    pub fn new(chart: Chart, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_dim(chart, q.len())?;
        check_dim(chart, p.len())?;
        Ok(Self { chart, q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `(q, p)` concatenated.
    pub fn to_vector(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn from_vector(chart: Chart, z: &[f64]) -> Result<Self> {
        let k = chart.dim();
        check_dim(chart, z.len() / 2)?;
        Self::new(chart, z[..k].to_vec(), z[k..].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn kinetic_energy(&self) -> Result<f64> {
        self.chart.kinetic_energy(&self.q, &self.p)
    }

    pub fn transform(&self, target: Chart) -> Result<PhaseState> {
        chart_transform(self, target)
    }
}

/// The orthogonal matrix `M` with `z = M x`:
/// `z^j = (x¹+…+x^j − j x^{j+1})/√(j(j+1))`, `zⁿ = (x¹+…+xⁿ)/√n`.
pub fn orthogonal_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 1..n {
        let s = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            m[(j - 1, i)] = s;
        }
        m[(j - 1, j)] = -(j as f64) * s;
    }
    let s = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        m[(n - 1, i)] = s;
    }
    m
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)] * v[i]).sum())
        .collect()
}

/// `z = M x`, `p_z = M p` (M orthogonal, so `M⁻ᵀ = M`).
pub fn line_to_orthogonal(c: &LineConfig) -> PhaseState {
    let m = orthogonal_matrix(c.n());
    PhaseState {
        chart: Chart::OrthogonalZ(c.n()),
        q: mat_vec(&m, &c.x),
        p: mat_vec(&m, &c.p),
    }
}

pub fn orthogonal_to_line(s: &PhaseState) -> Result<LineConfig> {
    let n = match s.chart {
        Chart::OrthogonalZ(n) => n,
        other => {
            return Err(Error::ChartMismatch {
                expected: Chart::OrthogonalZ(s.dim()),
                found: other,
            })
        }
    };
    let m = orthogonal_matrix(n);
    LineConfig::new(mat_t_vec(&m, &s.q), mat_t_vec(&m, &s.p))
}

/// Reduces `angle` into `[0, period)`.
pub fn normalize_angle(angle: f64, period: f64) -> f64 {
    debug_assert!(period > 0.0);
    let r = angle.rem_euclid(period);
    // rem_euclid can round up to `period` itself for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Which Cartesian chart a chart hangs off, if any.
fn family_base(chart: Chart) -> Option<Chart> {
    match chart {
        Chart::CartesianLine(n) | Chart::OrthogonalZ(n) => Some(Chart::OrthogonalZ(n)),
        Chart::Cylindrical3 => Some(Chart::OrthogonalZ(3)),
        Chart::SphericalCylindrical4 => Some(Chart::OrthogonalZ(4)),
        Chart::Cartesian2 | Chart::Polar2 => Some(Chart::Cartesian2),
        Chart::Cartesian3 | Chart::Spherical3 => Some(Chart::Cartesian3),
        _ => None,
    }
}

/// Moves a state to `target`, positions by the chart map and momenta as covectors.
pub fn chart_transform(s: &PhaseState, target: Chart) -> Result<PhaseState> {
    check_dim(s.chart, s.q.len())?;
    check_dim(s.chart, s.p.len())?;
    if s.chart == target {
        return Ok(s.clone());
    }
    let unsupported = || Error::UnsupportedTransform {
        from: s.chart,
        to: target,
    };
    let base = family_base(s.chart).ok_or_else(unsupported)?;
    if family_base(target) != Some(base) {
        return Err(unsupported());
    }
    let b = to_base(s)?;
    from_base(&b, target)
}

fn to_base(s: &PhaseState) -> Result<PhaseState> {
    let (q, p) = (&s.q, &s.p);
    match s.chart {
        Chart::CartesianLine(_) => Ok(line_to_orthogonal(&LineConfig::new(q.clone(), p.clone())?)),
        Chart::OrthogonalZ(_) | Chart::Cartesian2 | Chart::Cartesian3 => Ok(s.clone()),
        Chart::Cylindrical3 => {
            let (xy, pxy) = polar_to_cartesian(q[0], q[1], p[0], p[1])?;
            Ok(PhaseState {
                chart: Chart::OrthogonalZ(3),
                q: vec![xy[0], xy[1], q[2]],
                p: vec![pxy[0], pxy[1], p[2]],
            })
        }
        Chart::Polar2 => {
            let (xy, pxy) = polar_to_cartesian(q[0], q[1], p[0], p[1])?;
            Ok(PhaseState {
                chart: Chart::Cartesian2,
                q: xy.to_vec(),
                p: pxy.to_vec(),
            })
        }
        Chart::Spherical3 => {
            let (x, px) = spherical_to_cartesian([q[0], q[1], q[2]], [p[0], p[1], p[2]])?;
            Ok(PhaseState {
                chart: Chart::Cartesian3,
                q: x.to_vec(),
                p: px.to_vec(),
            })
        }
        Chart::SphericalCylindrical4 => {
            // (r₃, ψ₁, ψ₂, u) ↔ spherical (r, θ=ψ₂, φ=ψ₁)
            let (x, px) = spherical_to_cartesian([q[0], q[2], q[1]], [p[0], p[2], p[1]])?;
            Ok(PhaseState {
                chart: Chart::OrthogonalZ(4),
                q: vec![x[0], x[1], x[2], q[3]],
                p: vec![px[0], px[1], px[2], p[3]],
            })
        }
        other => Err(Error::UnsupportedTransform {
            from: other,
            to: other,
        }),
    }
}

fn from_base(b: &PhaseState, target: Chart) -> Result<PhaseState> {
    let (q, p) = (&b.q, &b.p);
    match target {
        Chart::CartesianLine(_) => Ok(orthogonal_to_line(b)?.into_state()),
        Chart::OrthogonalZ(_) | Chart::Cartesian2 | Chart::Cartesian3 => Ok(b.clone()),
        Chart::Cylindrical3 => {
            let (rp, prp) = cartesian_to_polar(q[0], q[1], p[0], p[1], q[2])?;
            Ok(PhaseState {
                chart: target,
                q: vec![rp[0], rp[1], q[2]],
                p: vec![prp[0], prp[1], p[2]],
            })
        }
        Chart::Polar2 => {
            let (rp, prp) = cartesian_to_polar(q[0], q[1], p[0], p[1], 0.0)?;
            Ok(PhaseState {
                chart: target,
                q: rp.to_vec(),
                p: prp.to_vec(),
            })
        }
        Chart::Spherical3 => {
            let (s, ps) = cartesian_to_spherical([q[0], q[1], q[2]], [p[0], p[1], p[2]])?;
            Ok(PhaseState {
                chart: target,
                q: s.to_vec(),
                p: ps.to_vec(),
            })
        }
        Chart::SphericalCylindrical4 => {
            let (s, ps) = cartesian_to_spherical([q[0], q[1], q[2]], [p[0], p[1], p[2]])?;
            Ok(PhaseState {
                chart: target,
                q: vec![s[0], s[2], s[1], q[3]],
                p: vec![ps[0], ps[2], ps[1], p[3]],
            })
        }
        other => Err(Error::UnsupportedTransform {
            from: b.chart,
            to: other,
        }),
    }
}

fn cartesian_to_polar(
    x: f64,
    y: f64,
    px: f64,
    py: f64,
    axial: f64,
) -> Result<([f64; 2], [f64; 2])> {
    let r = x.hypot(y);
    if r <= 1e-14 * (1.0 + axial.abs()) || !r.is_finite() {
        return Err(Error::SingularChart(format!(
            "on the polar axis (r = {r:e})"
        )));
    }
    let psi = y.atan2(x);
    Ok(([r, psi], [(x * px + y * py) / r, x * py - y * px]))
}

fn polar_to_cartesian(r: f64, psi: f64, pr: f64, ppsi: f64) -> Result<([f64; 2], [f64; 2])> {
    radial(r)?;
    let (s, c) = psi.sin_cos();
    Ok((
        [r * c, r * s],
        [c * pr - s * ppsi / r, s * pr + c * ppsi / r],
    ))
}

fn cartesian_to_spherical(x: [f64; 3], p: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let rho = x[0].hypot(x[1]);
    let r = rho.hypot(x[2]);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::SingularChart("at the origin".into()));
    }
    if rho <= 1e-14 * r {
        return Err(Error::SingularChart("on the polar axis (sin θ = 0)".into()));
    }
    let theta = rho.atan2(x[2]);
    let phi = x[1].atan2(x[0]);
    let pr = (x[0] * p[0] + x[1] * p[1] + x[2] * p[2]) / r;
    let ptheta = x[2] * (x[0] * p[0] + x[1] * p[1]) / rho - rho * p[2];
    let pphi = x[0] * p[1] - x[1] * p[0];
    Ok(([r, theta, phi], [pr, ptheta, pphi]))
}

fn spherical_to_cartesian(s: [f64; 3], p: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let r = radial(s[0])?;
    let st = polar_sin(s[1])?;
    let ct = s[1].cos();
    let (sp, cp) = s[2].sin_cos();
    let e_r = [st * cp, st * sp, ct];
    let e_t = [ct * cp, ct * sp, -st];
    let e_p = [-sp, cp, 0.0];
    let a = p[0];
    let b = p[1] / r;
    let c = p[2] / (r * st);
    Ok((
        [r * e_r[0], r * e_r[1], r * e_r[2]],
        [
            a * e_r[0] + b * e_t[0] + c * e_p[0],
            a * e_r[1] + b * e_t[1] + c * e_p[1],
            a * e_r[2] + b * e_t[2] + c * e_p[2],
        ],
    ))
}

/// Unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn sphere_point(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// `(θ, φ)` of a nonzero vector, `φ ∈ (−π, π]`.
pub fn sphere_angles(v: [f64; 3]) -> (f64, f64) {
    let rho = v[0].hypot(v[1]);
    (rho.atan2(v[2]), v[1].atan2(v[0]))
}

pub(crate) const TWO_PI: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_coordinates_of_symmetric_and_sample_configs() {
        let s = line_to_orthogonal(&LineConfig::at_rest(vec![1.0, 0.0, -1.0]).unwrap());
        assert_abs_diff_eq!(s.q[0], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.q[1], 3.0 / 6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.q[2], 0.0, epsilon = 1e-15);

        let s = line_to_orthogonal(&LineConfig::at_rest(vec![1.0, 1.0, 1.0]).unwrap());
        assert_abs_diff_eq!(s.q[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.q[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.q[2], 3f64.sqrt(), epsilon = 1e-15);

        let a = -2.75;
        let s = line_to_orthogonal(&LineConfig::at_rest(vec![a; 4]).unwrap());
        for j in 0..3 {
            assert_abs_diff_eq!(s.q[j], 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.q[3], 2.0 * a, epsilon = 1e-14);
    }

    #[test]
    fn inverse_of_sample_and_origin() {
        let z = PhaseState::new(
            Chart::OrthogonalZ(3),
            vec![1.0 / 2f64.sqrt(), 3.0 / 6f64.sqrt(), 0.0],
            vec![0.0; 3],
        )
        .unwrap();
        let c = orthogonal_to_line(&z).unwrap();
        for (a, b) in c.x.iter().zip([1.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let z0 = PhaseState::new(Chart::OrthogonalZ(5), vec![0.0; 5], vec![0.0; 5]).unwrap();
        assert!(orthogonal_to_line(&z0).unwrap().x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrong_chart_is_rejected() {
        let s = PhaseState::new(Chart::Polar2, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            orthogonal_to_line(&s),
            Err(Error::ChartMismatch { .. })
        ));
    }

    #[test]
    fn cylindrical_convention() {
        let s = PhaseState::new(
            Chart::OrthogonalZ(3),
            vec![1.0 / 2f64.sqrt(), 1.5f64.sqrt(), 0.0],
            vec![0.0; 3],
        )
        .unwrap();
        let c = chart_transform(&s, Chart::Cylindrical3).unwrap();
        assert_abs_diff_eq!(c.q[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.q[1], PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.q[2], 0.0, epsilon = 1e-15);
        assert!(c.p.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn kinetic_energy_is_chart_invariant() {
        let s = PhaseState::new(
            Chart::OrthogonalZ(3),
            vec![0.3, -1.2, 0.7],
            vec![1.1, 0.4, -0.9],
        )
        .unwrap();
        let c = chart_transform(&s, Chart::Cylindrical3).unwrap();
        let t_src = 0.5 * s.p.iter().map(|v| v * v).sum::<f64>();
        let t_dst = 0.5 * (c.p[0].powi(2) + c.p[1].powi(2) / c.q[0].powi(2) + c.p[2].powi(2));
        assert!((t_src - t_dst).abs() <= 1e-10 * (1.0 + t_src));
        assert!((c.kinetic_energy().unwrap() - t_src).abs() <= 1e-12);
    }

    #[test]
    fn singular_charts_error() {
        let s = PhaseState::new(Chart::OrthogonalZ(3), vec![0.0, 0.0, 1.0], vec![0.0; 3]).unwrap();
        assert!(matches!(
            chart_transform(&s, Chart::Cylindrical3),
            Err(Error::SingularChart(_))
        ));
        let s = PhaseState::new(Chart::Cartesian3, vec![0.0, 0.0, 2.0], vec![0.0; 3]).unwrap();
        assert!(matches!(
            chart_transform(&s, Chart::Spherical3),
            Err(Error::SingularChart(_))
        ));
        let s = PhaseState::new(
            Chart::SphericalCylindrical4,
            vec![1.0, 0.3, 0.0, 0.0],
            vec![0.0; 4],
        )
        .unwrap();
        assert!(chart_transform(&s, Chart::OrthogonalZ(4)).is_err());
        let s = PhaseState::new(Chart::Polar2, vec![0.0, 0.3], vec![0.0; 2]).unwrap();
        assert!(chart_transform(&s, Chart::Cartesian2).is_err());
    }

    #[test]
    fn unrelated_charts_have_no_transform() {
        let s = PhaseState::new(Chart::Polar2, vec![1.0, 0.3], vec![0.0; 2]).unwrap();
        assert!(matches!(
            chart_transform(&s, Chart::Sphere2),
            Err(Error::UnsupportedTransform { .. })
        ));
    }

    #[test]
    fn angle_normalization() {
        assert_abs_diff_eq!(
            normalize_angle(7.0 * PI / 3.0, TWO_PI),
            PI / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            normalize_angle(-PI / 6.0, TWO_PI),
            11.0 * PI / 6.0,
            epsilon = 1e-15
        );
        assert_eq!(normalize_angle(0.0, PI), 0.0);
        assert!(normalize_angle(-1e-18, TWO_PI) < TWO_PI);
    }

    #[test]
    fn chart_tags_roundtrip() {
        for c in [
            Chart::CartesianLine(3),
            Chart::OrthogonalZ(4),
            Chart::Cylindrical3,
            Chart::SphericalCylindrical4,
            Chart::Cartesian2,
            Chart::Polar2,
            Chart::Cartesian3,
            Chart::Spherical3,
            Chart::Sphere2,
            Chart::Circle1,
            Chart::Extended(BaseChart::Sphere2),
        ] {
            assert_eq!(c.tag().parse::<Chart>().unwrap(), c);
            assert_eq!(c.coordinate_names().len(), c.dim());
        }
        assert!("cartesian-line-1".parse::<Chart>().is_err());
    }
}
