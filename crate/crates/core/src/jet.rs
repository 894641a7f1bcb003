//! Truncated Taylor series in one variable.
//!
//! `coeffs[j] = f^(j)(a) / j!` at some expansion point `a`. Arithmetic
//! truncates to the smaller order of its operands.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 32;

/// Denominators below this magnitude are treated as poles.
const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The identity map `ψ ↦ ψ` expanded at `at`.
    pub fn variable(at: f64, order: usize) -> Self {
        Self::linear(1.0, at, order)
    }

    /// `slope·ψ + offset` with `ψ` the expansion variable at `at`.
    pub fn linear(slope: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = slope;
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f^(j)(a)`.
    pub fn derivative_value(&self, j: usize) -> f64 {
        self.coeffs[j] * factorial(j)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    /// The derivative as a jet of one lower order (order 0 stays order 0).
    pub fn derivative(&self) -> Jet {
        if self.order() == 0 {
            return Jet::constant(0.0, 0);
        }
        Jet {
            coeffs: (1..self.coeffs.len())
                .map(|j| j as f64 * self.coeffs[j])
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|v| *v == 0.0)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0.abs() < POLE_TOL {
            return Err(Error::JetPole(format!("reciprocal of {a0:e}")));
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Ok(Jet { coeffs: b })
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// `sin` and `cos` of the series, computed together.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        (s[0], c[0]) = self.coeffs[0].sin_cos();
        for k in 1..n {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.coeffs[j];
                ds += w * c[k - j];
                dc += w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = -dc / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    /// `f^α` for real `α`; requires `f(a) > 0` unless `α` is a nonnegative integer.
    pub fn powf(&self, alpha: f64) -> Result<Jet> {
        if alpha == 0.0 {
            return Ok(Jet::constant(1.0, self.order()));
        }
        if alpha.fract() == 0.0 && alpha > 0.0 {
            let mut out = Jet::constant(1.0, self.order());
            for _ in 0..alpha as usize {
                out = &out * self;
            }
            return Ok(out);
        }
        let a0 = self.coeffs[0];
        if a0.abs() < POLE_TOL || (a0 < 0.0 && alpha.fract() != 0.0) {
            return Err(Error::JetPole(format!("{a0:e} raised to {alpha}")));
        }
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = a0.powf(alpha);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| ((alpha + 1.0) * j as f64 - k as f64) * self.coeffs[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a0);
        }
        Ok(Jet { coeffs: b })
    }

    /// Evaluates the truncated series at offset `h` from the expansion point.
    pub fn eval_offset(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|v| v as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let n = self.coeffs.len().min(o.coeffs.len());
        Jet {
            coeffs: (0..n).map(|i| self.coeffs[i] + o.coeffs[i]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let n = self.coeffs.len().min(o.coeffs.len());
        Jet {
            coeffs: (0..n).map(|i| self.coeffs[i] - o.coeffs[i]).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.coeffs.len().min(o.coeffs.len());
        Jet {
            coeffs: (0..n)
                .map(|k| (0..=k).map(|j| self.coeffs[j] * o.coeffs[k - j]).sum())
                .collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{:?}", self.coeffs)
    }
}

/// Elementary seed functions with closed-form jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    /// `ψ^α`
    Pow(f64),
    /// `1/sin²ψ`
    InvSinSq,
    Const(f64),
    /// `a·ψ + b`
    Linear {
        a: f64,
        b: f64,
    },
}

/// Jet of an elementary function at `at`, `order ≤ 32`.
pub fn jet_elementary(f: Elementary, at: f64, order: usize) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::Invalid(format!(
            "jet order {order} exceeds {MAX_ORDER}"
        )));
    }
    let x = Jet::variable(at, order);
    match f {
        Elementary::Sin => Ok(x.sin()),
        Elementary::Cos => Ok(x.cos()),
        Elementary::Pow(alpha) => x.powf(alpha),
        Elementary::InvSinSq => {
            let s = x.sin();
            if s.value().abs() < POLE_TOL {
                return Err(Error::JetPole(format!("1/sin² at {at}")));
            }
            (&s * &s).recip()
        }
        Elementary::Const(c) => Ok(Jet::constant(c, order)),
        Elementary::Linear { a, b } => Ok(Jet::linear(a, a * at + b, order)),
    }
}

/// A scalar function of one angle that can produce its own Taylor jets.
pub trait JetFn: Send + Sync + fmt::Debug {
    fn jet(&self, at: f64, order: usize) -> Result<Jet>;

    fn value(&self, at: f64) -> Result<f64> {
        Ok(self.jet(at, 0)?.value())
    }

    /// Value and first derivative.
    fn value_deriv(&self, at: f64) -> Result<(f64, f64)> {
        let j = self.jet(at, 1)?;
        Ok((j.coeffs()[0], j.coeffs()[1]))
    }
}

/// Angular profiles used by the catalog: sums of scaled trigonometric terms.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularFn {
    Const(f64),
    /// `amp·sin(freq·ψ + phase)`
    Sin {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// `amp·cos(freq·ψ + phase)`
    Cos {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// `k / sin²(freq·ψ + phase)`
    InvSinSq {
        k: f64,
        freq: f64,
        phase: f64,
    },
    /// `k / cos²(freq·ψ + phase)`
    InvCosSq {
        k: f64,
        freq: f64,
        phase: f64,
    },
    Sum(Vec<AngularFn>),
}

impl AngularFn {
    /// `a + b / sin²ψ`, the default Evans profile.
    pub fn evans_default(a: f64, b: f64) -> Self {
        AngularFn::Sum(vec![
            AngularFn::Const(a),
            AngularFn::InvSinSq {
                k: b,
                freq: 1.0,
                phase: 0.0,
            },
        ])
    }

    /// `k₁ + k₂/cos²(hψ) + k₃/sin²(hψ)`.
    pub fn ttw(k1: f64, k2: f64, k3: f64, h: f64) -> Self {
        AngularFn::Sum(vec![
            AngularFn::Const(k1),
            AngularFn::InvCosSq {
                k: k2,
                freq: h,
                phase: 0.0,
            },
            AngularFn::InvSinSq {
                k: k3,
                freq: h,
                phase: 0.0,
            },
        ])
    }
}

impl JetFn for AngularFn {
    fn jet(&self, at: f64, order: usize) -> Result<Jet> {
        match self {
            AngularFn::Const(c) => Ok(Jet::constant(*c, order)),
            AngularFn::Sin { amp, freq, phase } => Ok(Jet::linear(*freq, freq * at + phase, order)
                .sin()
                .scale(*amp)),
            AngularFn::Cos { amp, freq, phase } => Ok(Jet::linear(*freq, freq * at + phase, order)
                .cos()
                .scale(*amp)),
            AngularFn::InvSinSq { k, freq, phase } | AngularFn::InvCosSq { k, freq, phase } => {
                if *k == 0.0 {
                    return Ok(Jet::constant(0.0, order));
                }
                let (s, c) = Jet::linear(*freq, freq * at + phase, order).sin_cos();
                let d = if matches!(self, AngularFn::InvSinSq { .. }) {
                    s
                } else {
                    c
                };
                if d.value().abs() < POLE_TOL {
                    return Err(Error::JetPole(format!("{self:?} at {at}")));
                }
                Ok((&d * &d).recip()?.scale(*k))
            }
            AngularFn::Sum(terms) => {
                let mut acc = Jet::constant(0.0, order);
                for t in terms {
                    acc = &acc + &t.jet(at, order)?;
                }
                Ok(acc)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn maclaurin_seeds() {
        close(
            jet_elementary(Elementary::Sin, 0.0, 3).unwrap().coeffs(),
            &[0.0, 1.0, 0.0, -1.0 / 6.0],
            1e-15,
        );
        close(
            jet_elementary(Elementary::Cos, 0.0, 2).unwrap().coeffs(),
            &[1.0, 0.0, -0.5],
            1e-15,
        );
        close(
            jet_elementary(Elementary::InvSinSq, PI / 2.0, 1)
                .unwrap()
                .coeffs(),
            &[1.0, 0.0],
            1e-15,
        );
    }

    #[test]
    fn poles_and_order_limit() {
        assert!(matches!(
            jet_elementary(Elementary::InvSinSq, 0.0, 2),
            Err(Error::JetPole(_))
        ));
        assert!(jet_elementary(Elementary::Sin, 0.0, 33).is_err());
        assert!(jet_elementary(Elementary::Pow(-1.5), 0.0, 2).is_err());
    }

    // Symbolic derivatives of csc²: with c = csc² and t = cot,
    // d/dψ c = −2ct, d/dψ t = −c.
    fn csc2_derivs(x: f64, order: usize) -> Vec<f64> {
        // represent derivative k as polynomial in (c, t): store map of (i,j)->coef for c^i t^j
        use std::collections::BTreeMap;
        let mut poly: BTreeMap<(i32, i32), f64> = BTreeMap::new();
        poly.insert((1, 0), 1.0);
        let c = 1.0 / x.sin().powi(2);
        let t = x.cos() / x.sin();
        let mut out = vec![];
        for _ in 0..=order {
            out.push(
                poly.iter()
                    .map(|((i, j), a)| a * c.powi(*i) * t.powi(*j))
                    .sum(),
            );
            let mut next = BTreeMap::new();
            for (&(i, j), &a) in &poly {
                // d(c^i t^j) = i c^{i-1}(-2ct) t^j + j c^i t^{j-1}(-c)
                *next.entry((i, j + 1)).or_insert(0.0) += -2.0 * i as f64 * a;
                if j > 0 {
                    *next.entry((i + 1, j - 1)).or_insert(0.0) += -(j as f64) * a;
                }
            }
            poly = next;
        }
        out
    }

    #[test]
    fn jets_match_symbolic_derivatives_to_order_8() {
        for &x in &[0.3, 1.1, 2.4, -0.7] {
            let s = jet_elementary(Elementary::Sin, x, 8).unwrap();
            let c = jet_elementary(Elementary::Cos, x, 8).unwrap();
            let q = jet_elementary(Elementary::InvSinSq, x, 8).unwrap();
            let sym = csc2_derivs(x, 8);
            for k in 0..=8 {
                let ds = match k % 4 {
                    0 => x.sin(),
                    1 => x.cos(),
                    2 => -x.sin(),
                    _ => -x.cos(),
                };
                let dc = match k % 4 {
                    0 => x.cos(),
                    1 => -x.sin(),
                    2 => -x.cos(),
                    _ => x.sin(),
                };
                assert!((s.derivative_value(k) - ds).abs() <= 1e-12);
                assert!((c.derivative_value(k) - dc).abs() <= 1e-12);
                let rel = (q.derivative_value(k) - sym[k]).abs() / (1.0 + sym[k].abs());
                assert!(
                    rel <= 1e-12,
                    "order {k} at {x}: {} vs {}",
                    q.derivative_value(k),
                    sym[k]
                );
            }
        }
    }

    #[test]
    fn products_commute_and_associate() {
        let a = Jet::variable(0.4, 6).sin();
        let b = Jet::variable(0.4, 6).powf(2.5).unwrap();
        let c = jet_elementary(Elementary::InvSinSq, 0.4, 6).unwrap();
        close((&a * &b).coeffs(), (&b * &a).coeffs(), 1e-13);
        close(
            (&(&a * &b) * &c).coeffs(),
            (&a * &(&b * &c)).coeffs(),
            1e-13 * 100.0,
        );
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let s = jet_elementary(Elementary::Sin, 0.9, 5).unwrap();
        let ds = s.derivative();
        let c = jet_elementary(Elementary::Cos, 0.9, 4).unwrap();
        close(ds.coeffs(), c.coeffs(), 1e-14);
    }

    #[test]
    fn pow_recurrence() {
        let x = 1.7;
        let j = Jet::variable(x, 4).powf(-0.5).unwrap();
        let mut expect = vec![x.powf(-0.5)];
        let mut fall = -0.5;
        let mut prod = 1.0;
        for k in 1..=4 {
            prod *= fall;
            expect.push(prod * x.powf(-0.5 - k as f64) / factorial(k));
            fall -= 1.0;
        }
        close(j.coeffs(), &expect, 1e-14);
    }

    #[test]
    fn angular_profiles() {
        let f = AngularFn::ttw(1.0, 2.0, 3.0, 1.5);
        let psi: f64 = 0.37;
        let h: f64 = 1.5;
        let v = 1.0 + 2.0 / (h * psi).cos().powi(2) + 3.0 / (h * psi).sin().powi(2);
        assert!((f.value(psi).unwrap() - v).abs() < 1e-13);
        let (_, d) = f.value_deriv(psi).unwrap();
        let fd = (f.value(psi + 1e-6).unwrap() - f.value(psi - 1e-6).unwrap()) / 2e-6;
        assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()));
        assert!(AngularFn::evans_default(1.0, 1.0).value(0.0).is_err());
        assert_eq!(AngularFn::evans_default(1.0, 0.0).value(0.0).unwrap(), 1.0);
    }
}
