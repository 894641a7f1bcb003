//! Phase-space functions and Hamiltonians.

use std::fmt;
use std::sync::Arc;

use crate::coords::{chart_transform, Chart, PhaseState};
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::real::{gradient, Dual, Real};

/// A scalar function on phase space, natively defined in one chart.
pub trait PhaseFunction: Send + Sync {
    fn name(&self) -> &str;

    fn chart(&self) -> Chart;

    /// Polynomial degree in the momenta, when known.
    fn momentum_degree(&self) -> Option<usize> {
        None
    }

    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64>;

    /// Evaluates at `s`, moving the state to the native chart first if needed.
    fn eval(&self, s: &PhaseState) -> Result<f64> {
        if s.chart == self.chart() {
            self.eval_native(&s.q, &s.p)
        } else {
            let t = chart_transform(s, self.chart())?;
            self.eval_native(&t.q, &t.p)
        }
    }
}

/// A phase function with analytic gradient.
pub trait Hamiltonian: PhaseFunction {
    /// `(∂H/∂q, ∂H/∂p)` in the native chart.
    fn gradient(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    /// Potential part when `H = ½|p|² + V(q)` in a Cartesian chart.
    fn separable_potential(&self) -> Option<&Potential> {
        None
    }
}

type BoxedFn = dyn Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync;
type BoxedGrad = dyn Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Send + Sync;

/// A phase function given by a closure in a fixed chart.
#[derive(Clone)]
pub struct ClosedForm {
    name: String,
    chart: Chart,
    degree: Option<usize>,
    f: Arc<BoxedFn>,
    grad: Option<Arc<BoxedGrad>>,
}

impl ClosedForm {
    pub fn new<F>(name: impl Into<String>, chart: Chart, degree: Option<usize>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            chart,
            degree,
            f: Arc::new(f),
            grad: None,
        }
    }

    /// Supplies an analytic `(∂/∂q, ∂/∂p)`; otherwise gradients use a
    /// five-point central difference.
    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    fn partial(&self, z: &mut [f64], i: usize, d: usize) -> Result<f64> {
        let x = z[i];
        let h = 1e-3 * (1.0 + x.abs());
        let mut at = |dx: f64| -> Result<f64> {
            z[i] = x + dx;
            let v = (self.f)(&z[..d], &z[d..]);
            z[i] = x;
            v
        };
        let (a, b, c, e) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        Ok((8.0 * (b - c) - (a - e)) / (12.0 * h))
    }
}

impl Hamiltonian for ClosedForm {
    fn gradient(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(g) = &self.grad {
            return g(q, p);
        }
        let d = q.len();
        let mut z: Vec<f64> = q.iter().chain(p).copied().collect();
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..2 * d {
            out.push(self.partial(&mut z, i, d)?);
        }
        let dp = out.split_off(d);
        Ok((out, dp))
    }
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedForm")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .finish()
    }
}

impl PhaseFunction for ClosedForm {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn momentum_degree(&self) -> Option<usize> {
        self.degree
    }
    fn eval_native(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        (self.f)(q, p)
    }
}

/// `½ g^{ij}(q) p_i p_j + V(q)` for a chart metric and an optional potential.
#[derive(Debug, Clone)]
pub struct NaturalHamiltonian {
    name: String,
    chart: Chart,
    potential: Option<Potential>,
}

impl NaturalHamiltonian {
    pub fn new(chart: Chart, potential: Option<Potential>) -> Result<Self> {
        if let Some(p) = &potential {
            if !p.supports(chart) {
                return Err(Error::ChartMismatch {
                    expected: p.supported_charts()[0],
                    found: chart,
                });
            }
        }
        chart
            .inverse_metric_diag(&vec![1.0; chart.dim()])
            .or_else(|e| match e {
                Error::SingularChart(_) => Ok(vec![]),
                other => Err(other),
            })?;
        let name = match &potential {
            Some(p) => format!("H[{}]", p.id()),
            None => "H[free]".to_string(),
        };
        Ok(Self {
            name,
            chart,
            potential,
        })
    }

    pub fn free(chart: Chart) -> Result<Self> {
        Self::new(chart, None)
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    fn potential_value(&self, q: &[f64]) -> Result<f64> {
        match &self.potential {
            Some(p) => p.value_at(self.chart, q),
            None => Ok(0.0),
        }
    }

    fn is_cartesian(&self) -> bool {
        matches!(
            self.chart,
            Chart::CartesianLine(_) | Chart::OrthogonalZ(_) | Chart::Cartesian2 | Chart::Cartesian3
        )
    }
}

impl PhaseFunction for NaturalHamiltonian {
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
        Ok(self.chart.kinetic_energy(q, p)? + self.potential_value(q)?)
    }
}

impl Hamiltonian for NaturalHamiltonian {
    fn gradient(&self, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ginv = self.chart.inverse_metric_diag(q)?;
        let dp: Vec<f64> = ginv.iter().zip(p).map(|(g, p)| g * p).collect();
        let mut dq = if self.is_cartesian() {
            vec![0.0; q.len()]
        } else {
            gradient(q, |a: &[Dual]| {
                let g = self.chart.inverse_metric_diag(a)?;
                Ok::<_, Error>(
                    g.iter()
                        .zip(p)
                        .fold(Dual::cst(0.0), |acc, (g, p)| acc + *g * (0.5 * p * p)),
                )
            })?
        };
        if let Some(pot) = &self.potential {
            for (d, v) in dq.iter_mut().zip(pot.grad_at(self.chart, q)?) {
                *d += v;
            }
        }
        Ok((dq, dp))
    }

    fn separable_potential(&self) -> Option<&Potential> {
        if self.is_cartesian() {
            self.potential.as_ref()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::potential;

    #[test]
    fn natural_gradient_matches_differences() {
        let h =
            NaturalHamiltonian::new(Chart::Sphere2, Some(potential("platonic-1", &[]).unwrap()))
                .unwrap();
        let q = [0.8, 0.6];
        let p = [0.3, -0.4];
        let (dq, dp) = h.gradient(&q, &p).unwrap();
        for i in 0..2 {
            let e = 1e-6;
            let mut a = q;
            let mut b = q;
            a[i] += e;
            b[i] -= e;
            let fd = (h.eval_native(&a, &p).unwrap() - h.eval_native(&b, &p).unwrap()) / (2.0 * e);
            assert!((fd - dq[i]).abs() < 1e-6 * (1.0 + fd.abs()));
            let mut a = p;
            let mut b = p;
            a[i] += e;
            b[i] -= e;
            let fd = (h.eval_native(&q, &a).unwrap() - h.eval_native(&q, &b).unwrap()) / (2.0 * e);
            assert!((fd - dp[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_unsupported_chart() {
        let pot = potential("calogero", &[("k", 1.0)]).unwrap();
        assert!(NaturalHamiltonian::new(Chart::Sphere2, Some(pot)).is_err());
    }
}
