//! Extensions of a Hamiltonian `L` on a constant-curvature base by a new
//! degree of freedom `(u, p_u)`, the curvature conditions on the seed `G`,
//! and the ladder `U = p_u + γ(u) X_L` built on it.

use std::fmt;
use std::sync::Arc;

use crate::coords::{BaseChart, Chart};
use crate::error::{invalid_param, singular, Error, Result};
use crate::hamiltonian::{Hamiltonian, PhaseFunction};
use crate::integrals::MomentumPoly;
use crate::jet::{Jet, JetFn};

/// `sin(√κ x)/√κ`, `x` or `sinh(√|κ| x)/√|κ|` for `κ > 0`, `= 0`, `< 0`.
pub fn s_kappa(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * x).sin() / s
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        (s * x).sinh() / s
    } else {
        x
    }
}

/// `d/dx S_κ(x)`: `cos(√κ x)`, `1` or `cosh(√|κ| x)`.
pub fn c_kappa(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        (kappa.sqrt() * x).cos()
    } else if kappa < 0.0 {
        ((-kappa).sqrt() * x).cosh()
    } else {
        1.0
    }
}

/// Built-in constant-curvature charts for the base manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvedChart {
    /// The plane in Cartesian coordinates, `K = 0`.
    Euclidean2,
    /// The unit sphere in `(θ, φ)`, `K = 1`.
    Sphere2,
}

impl CurvedChart {
    pub fn tag(self) -> &'static str {
        match self {
            CurvedChart::Euclidean2 => "euclidean-2",
            CurvedChart::Sphere2 => "sphere-2",
        }
    }

    pub fn curvature(self) -> f64 {
        match self {
            CurvedChart::Euclidean2 => 0.0,
            CurvedChart::Sphere2 => 1.0,
        }
    }

    pub fn chart(self) -> Chart {
        match self {
            CurvedChart::Euclidean2 => Chart::Cartesian2,
            CurvedChart::Sphere2 => Chart::Sphere2,
        }
    }

    fn check(self, q: &[f64]) -> Result<()> {
        if q.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: q.len(),
            });
        }
        if self == CurvedChart::Sphere2 && q[0].sin().abs() < 1e-12 {
            return Err(Error::SingularChart(format!(
                "sphere pole at theta = {}",
                q[0]
            )));
        }
        Ok(())
    }

    /// Metric `g_ij` at `q`.
    pub fn metric(self, q: &[f64]) -> Result<[[f64; 2]; 2]> {
        self.check(q)?;
        Ok(match self {
            CurvedChart::Euclidean2 => [[1.0, 0.0], [0.0, 1.0]],
            CurvedChart::Sphere2 => [[1.0, 0.0], [0.0, q[0].sin().powi(2)]],
        })
    }

    /// `Γ^k_ij` indexed `[k][i][j]`.
    pub fn christoffel(self, q: &[f64]) -> Result<[[[f64; 2]; 2]; 2]> {
        self.check(q)?;
        let mut g = [[[0.0; 2]; 2]; 2];
        if self == CurvedChart::Sphere2 {
            let (s, c) = q[0].sin_cos();
            g[0][1][1] = -s * c;
            g[1][0][1] = c / s;
            g[1][1][0] = c / s;
        }
        Ok(g)
    }
}

const FD_STEP: f64 = 1e-4;

fn gradient_fd<G: Fn(&[f64]) -> Result<f64>>(g: &G, q: &[f64]) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        let d = |h: f64| -> Result<f64> {
            let (mut a, mut b) = ([q[0], q[1]], [q[0], q[1]]);
            a[i] += h;
            b[i] -= h;
            Ok((g(&a)? - g(&b)?) / (2.0 * h))
        };
        *o = (4.0 * d(0.5 * FD_STEP)? - d(FD_STEP)?) / 3.0;
    }
    Ok(out)
}

fn hessian_fd<G: Fn(&[f64]) -> Result<f64>>(g: &G, q: &[f64]) -> Result<[[f64; 2]; 2]> {
    let h = FD_STEP;
    let at = |di: f64, dj: f64, i: usize, j: usize| -> Result<f64> {
        let mut x = [q[0], q[1]];
        x[i] += di;
        x[j] += dj;
        g(&x)
    };
    let g0 = g(q)?;
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = (at(h, 0.0, i, i)? - 2.0 * g0 + at(-h, 0.0, i, i)?) / (h * h);
    }
    let mixed =
        (at(h, h, 0, 1)? - at(h, -h, 0, 1)? - at(-h, h, 0, 1)? + at(-h, -h, 0, 1)?) / (4.0 * h * h);
    out[0][1] = mixed;
    out[1][0] = mixed;
    Ok(out)
}

/// `‖∇∇G + K g G‖∞` at `q`, with analytic Christoffels and finite-difference derivatives.
pub fn hessian_residual<G>(g: G, chart: CurvedChart, q: &[f64]) -> Result<f64>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    let metric = chart.metric(q)?;
    let gamma = chart.christoffel(q)?;
    let d1 = gradient_fd(&g, q)?;
    let d2 = hessian_fd(&g, q)?;
    let value = g(q)?;
    let k = chart.curvature();
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let cov = d2[i][j] - (0..2).map(|m| gamma[m][i][j] * d1[m]).sum::<f64>();
            worst = worst.max((cov + k * metric[i][j] * value).abs());
        }
    }
    Ok(worst)
}

/// `g^{ij} ∂_i V ∂_j G − 2 K V G` at `q`.
pub fn vteo_residual<V, G>(v: V, g: G, k: f64, chart: CurvedChart, q: &[f64]) -> Result<f64>
where
    V: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<f64>,
{
    let metric = chart.metric(q)?;
    let dv = gradient_fd(&v, q)?;
    let dg = gradient_fd(&g, q)?;
    let contracted: f64 = (0..2).map(|i| dv[i] * dg[i] / metric[i][i]).sum();
    Ok(contracted - 2.0 * k * v(q)? * g(q)?)
}

/// A Hamiltonian polynomial in one momentum: `L = Σ_k p^k ℓ_k(ψ)` on `circle-1`.
#[derive(Clone)]
pub struct AngularHamiltonian {
    terms: Vec<(u32, Arc<dyn JetFn>)>,
    name: String,
}

impl fmt::Debug for AngularHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularHamiltonian")
            .field("terms", &self.terms)
            .finish()
    }
}

impl AngularHamiltonian {
    pub fn new(terms: Vec<(u32, Arc<dyn JetFn>)>) -> Self {
        Self {
            terms,
            name: "L".into(),
        }
    }

    /// `½p_ψ² + F(ψ)`.
    pub fn natural(profile: Arc<dyn JetFn>) -> Self {
        Self::new(vec![
            (2, Arc::new(crate::jet::AngularFn::Const(0.5))),
            (0, profile),
        ])
    }

    pub fn terms(&self) -> &[(u32, Arc<dyn JetFn>)] {
        &self.terms
    }

    fn jets(&self, psi: f64, order: usize) -> Result<Vec<(u32, Jet)>> {
        self.terms
            .iter()
            .map(|(k, f)| Ok((*k, f.jet(psi, order)?)))
            .collect()
    }
}

impl PhaseFunction for AngularHamiltonian {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        Chart::Circle1
    }
    fn momentum_degree(&self) -> Option<usize> {
        self.terms.iter().map(|(k, _)| *k as usize).max()
    }
    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        self.terms
            .iter()
            .map(|(k, f)| Ok(p[0].powi(*k as i32) * f.value(q[0])?))
            .sum()
    }
}

impl Hamiltonian for AngularHamiltonian {
    fn gradient(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut dq, mut dp) = (0.0, 0.0);
        for (k, f) in &self.terms {
            let (v, d) = f.value_deriv(q[0])?;
            dq += p[0].powi(*k as i32) * d;
            if *k > 0 {
                dp += f64::from(*k) * p[0].powi(*k as i32 - 1) * v;
            }
        }
        Ok((vec![dq], vec![dp]))
    }
}

/// `½p_u² + α(u) L` with `α = −κ` for `K = 0` and `K / S_κ²(c u + u₀)` otherwise, `c = K/m`.
#[derive(Clone)]
pub struct ExtensionSpec {
    pub base: Arc<dyn Hamiltonian>,
    pub curvature: f64,
    pub kappa: f64,
    pub u0: f64,
    pub m: u32,
}

impl fmt::Debug for ExtensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionSpec")
            .field("base", &self.base.name())
            .field("curvature", &self.curvature)
            .field("kappa", &self.kappa)
            .field("u0", &self.u0)
            .field("m", &self.m)
            .finish()
    }
}

impl ExtensionSpec {
    pub fn c(&self) -> f64 {
        self.curvature / f64::from(self.m)
    }

    /// `(α(u), α′(u))`.
    pub fn alpha(&self, u: f64) -> Result<(f64, f64)> {
        if self.curvature == 0.0 {
            return Ok((-self.kappa, 0.0));
        }
        let c = self.c();
        let x = c * u + self.u0;
        let s = s_kappa(self.kappa, x);
        if s.abs() < 1e-12 {
            return Err(singular(format!("S_kappa({x}) = 0")));
        }
        let a = self.curvature / (s * s);
        Ok((a, -2.0 * a * c * c_kappa(self.kappa, x) / s))
    }
}

#[derive(Debug, Clone)]
pub struct ExtendedHamiltonian {
    spec: ExtensionSpec,
    chart: Chart,
    name: String,
}

pub fn extend_hamiltonian(spec: ExtensionSpec) -> Result<ExtendedHamiltonian> {
    if spec.m == 0 {
        return Err(invalid_param("m", "must be a positive integer"));
    }
    for (name, v) in [
        ("K", spec.curvature),
        ("kappa", spec.kappa),
        ("u0", spec.u0),
    ] {
        if !v.is_finite() {
            return Err(invalid_param(name, "must be finite"));
        }
    }
    let base = match spec.base.chart() {
        Chart::Circle1 => BaseChart::Circle1,
        Chart::Cartesian2 => BaseChart::Cartesian2,
        Chart::Sphere2 => BaseChart::Sphere2,
        other => {
            return Err(Error::Invalid(format!("{other} is not an extension base")));
        }
    };
    Ok(ExtendedHamiltonian {
        name: format!("ext[{}]", spec.base.name()),
        spec,
        chart: Chart::Extended(base),
    })
}

impl ExtendedHamiltonian {
    pub fn spec(&self) -> &ExtensionSpec {
        &self.spec
    }
}

impl PhaseFunction for ExtendedHamiltonian {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn momentum_degree(&self) -> Option<usize> {
        Some(2)
    }
    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        let (a, _) = self.spec.alpha(q[0])?;
        Ok(0.5 * p[0] * p[0] + a * self.spec.base.eval_native(&q[1..], &p[1..])?)
    }
}

impl Hamiltonian for ExtendedHamiltonian {
    fn gradient(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (a, da) = self.spec.alpha(q[0])?;
        let l = self.spec.base.eval_native(&q[1..], &p[1..])?;
        let (lq, lp) = self.spec.base.gradient(&q[1..], &p[1..])?;
        let mut dq = vec![da * l];
        dq.extend(lq.iter().map(|v| a * v));
        let mut dp = vec![p[0]];
        dp.extend(lp.iter().map(|v| a * v));
        Ok((dq, dp))
    }
}

/// The coefficient `γ(u)` of the ladder operator.
#[derive(Clone)]
pub enum Gamma {
    Zero,
    Const(f64),
    /// `1 / (n u)`
    InvLinear {
        n: f64,
    },
    Custom(Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>),
}

impl fmt::Debug for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Zero => write!(f, "Zero"),
            Gamma::Const(c) => write!(f, "Const({c})"),
            Gamma::InvLinear { n } => write!(f, "InvLinear {{ n: {n} }}"),
            Gamma::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Gamma {
    pub fn value(&self, u: f64) -> Result<f64> {
        match self {
            Gamma::Zero => Ok(0.0),
            Gamma::Const(c) => Ok(*c),
            Gamma::InvLinear { n } => {
                if u.abs() < 1e-300 {
                    return Err(singular("u = 0 in 1/(n u)"));
                }
                Ok(1.0 / (n * u))
            }
            Gamma::Custom(f) => f(u),
        }
    }
}

/// `{f, L}` for `f = Σ p_u^a p^b γ^j g(ψ)` and a base `L = Σ p^k ℓ_k(ψ)`;
/// the `p_u` and `γ` exponents pass through untouched.
fn bracket_with_base(f: &MomentumPoly, base: &[(u32, Jet)]) -> MomentumPoly {
    let mut out = MomentumPoly::default();
    for (&(a, b, j), g) in f.terms() {
        let m = g.order();
        if m == 0 {
            continue;
        }
        let dg = g.derivative();
        for (k, l) in base {
            // ∂_ψ f · ∂_p L
            if *k > 0 {
                let t = (&dg * l).truncate(m - 1).scale(f64::from(*k));
                out.add_term((a, b + k - 1, j), t);
            }
            // − ∂_p f · ∂_ψ L
            if b > 0 {
                let t = (g * &l.derivative()).truncate(m - 1).scale(-f64::from(b));
                out.add_term((a, b - 1 + k, j), t);
            }
        }
    }
    out
}

/// `U^m(G)` with `U(f) = p_u f + γ(u) {f, L}` on `extended-circle-1`.
#[derive(Clone)]
pub struct ULadder {
    seed: Arc<dyn JetFn>,
    gamma: Gamma,
    m: u32,
    base: AngularHamiltonian,
    name: String,
}

impl fmt::Debug for ULadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ULadder")
            .field("seed", &self.seed)
            .field("gamma", &self.gamma)
            .field("m", &self.m)
            .finish()
    }
}

pub const MAX_U_ORDER: u32 = 8;

pub fn build_u_ladder(
    seed: Arc<dyn JetFn>,
    gamma: Gamma,
    m: u32,
    base: AngularHamiltonian,
) -> Result<ULadder> {
    if m > MAX_U_ORDER {
        return Err(invalid_param("m", format!("must be at most {MAX_U_ORDER}")));
    }
    Ok(ULadder {
        seed,
        gamma,
        m,
        base,
        name: format!("U{m}"),
    })
}

impl ULadder {
    /// Terms `p_u^a p_ψ^b γ^j g(ψ)` keyed by `(a, b, j)` at angle `psi`.
    pub fn expand(&self, psi: f64) -> Result<MomentumPoly> {
        let order = self.m as usize;
        let base = self.base.jets(psi, order)?;
        let mut poly = MomentumPoly::monomial(0, 0, 0, self.seed.jet(psi, order)?);
        for _ in 0..self.m {
            let mut next = MomentumPoly::default();
            for (&(a, b, j), g) in poly.terms() {
                next.add_term((a + 1, b, j), g.truncate(g.order().saturating_sub(1)));
            }
            for (&(a, b, j), g) in bracket_with_base(&poly, &base).terms() {
                next.add_term((a, b, j + 1), g.clone());
            }
            poly = next;
        }
        Ok(poly)
    }
}

impl PhaseFunction for ULadder {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        Chart::Extended(BaseChart::Circle1)
    }
    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        if q.len() != 2 || p.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: q.len().min(p.len()),
            });
        }
        let w = self.gamma.value(q[0])?;
        Ok(self.expand(q[1])?.eval_weighted(w, p[0], p[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::AngularFn;
    use std::f64::consts::PI;

    #[test]
    fn s_kappa_branches() {
        assert_eq!(s_kappa(0.0, 2.5), 2.5);
        assert!((s_kappa(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((s_kappa(-1.0, 1.0) - 1.0f64.sinh()).abs() < 1e-15);
        assert!((s_kappa(-1.0, 1.0) - 1.175201).abs() < 1e-6);
    }

    #[test]
    fn alpha_conventions() {
        let base: Arc<dyn Hamiltonian> =
            Arc::new(AngularHamiltonian::natural(Arc::new(AngularFn::Const(0.0))));
        let spec = |k, kappa| ExtensionSpec {
            base: base.clone(),
            curvature: k,
            kappa,
            u0: 0.0,
            m: 1,
        };
        assert_eq!(spec(0.0, -1.0).alpha(3.0).unwrap().0, 1.0);
        let (a, da) = spec(1.0, 0.0).alpha(2.0).unwrap();
        assert!((a - 0.25).abs() < 1e-15 && (da + 0.25).abs() < 1e-15);
        assert!((spec(1.0, 1.0).alpha(PI / 4.0).unwrap().0 - 2.0).abs() < 1e-14);
        assert!(spec(1.0, 1.0).alpha(PI).is_err());
    }

    #[test]
    fn u_ladder_trivial_cases() {
        let base = AngularHamiltonian::natural(Arc::new(AngularFn::Const(0.0)));
        let one: Arc<dyn JetFn> = Arc::new(AngularFn::Const(1.0));
        let u2 = build_u_ladder(one, Gamma::Zero, 2, base.clone()).unwrap();
        assert!((u2.eval_native(&[1.3, 0.2], &[0.7, 5.0]).unwrap() - 0.49).abs() < 1e-15);
        let cos: Arc<dyn JetFn> = Arc::new(AngularFn::Cos {
            amp: 1.0,
            freq: 1.0,
            phase: 0.0,
        });
        let u1 = build_u_ladder(cos, Gamma::Zero, 1, base).unwrap();
        let v = u1.eval_native(&[1.0, 0.3], &[2.0, 1.0]).unwrap();
        assert!((v - 2.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!(build_u_ladder(
            Arc::new(AngularFn::Const(1.0)),
            Gamma::Zero,
            9,
            AngularHamiltonian::new(vec![])
        )
        .is_err());
    }

    #[test]
    fn christoffels_match_metric_derivatives() {
        for chart in [CurvedChart::Euclidean2, CurvedChart::Sphere2] {
            for q in [[0.4, 1.0], [1.2, -2.0], [2.5, 0.3]] {
                let gamma = chart.christoffel(&q).unwrap();
                let g = chart.metric(&q).unwrap();
                let h = 1e-6;
                let dg = |l: usize| -> [[f64; 2]; 2] {
                    let (mut a, mut b) = (q, q);
                    a[l] += h;
                    b[l] -= h;
                    let (ga, gb) = (chart.metric(&a).unwrap(), chart.metric(&b).unwrap());
                    let mut d = [[0.0; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            d[i][j] = (ga[i][j] - gb[i][j]) / (2.0 * h);
                        }
                    }
                    d
                };
                let d = [dg(0), dg(1)];
                for k in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let fd = 0.5 / g[k][k] * (d[i][k][j] + d[j][k][i] - d[k][i][j]);
                            assert!((fd - gamma[k][i][j]).abs() <= 1e-8, "{chart:?} {k}{i}{j}");
                        }
                    }
                }
            }
        }
    }
}
