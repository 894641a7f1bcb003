//! Finite orthogonal groups: dihedral prisms, Platonic rotation groups and
//! the isometries induced by permuting particles on a line.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Rotation3, Unit, Vector3};
use rand::Rng;

use crate::coords::orthogonal_matrix;
use crate::error::{Error, Result};

/// Matrix distance under which two elements are identified during closure.
pub const DEDUP_TOL: f64 = 1e-9;

const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    label: Option<String>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

impl GroupElement {
    /// Wraps an orthogonal matrix; fails if `‖GGᵀ − I‖∞ > 1e-12`.
    pub fn new(matrix: DMatrix<f64>, label: Option<String>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Invalid(
                "group element must be a square matrix".into(),
            ));
        }
        let n = matrix.nrows();
        let defect = max_abs(&(&matrix * matrix.transpose() - DMatrix::identity(n, n)));
        if defect > ORTHO_TOL {
            return Err(Error::Invalid(format!(
                "matrix is not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self { matrix, label })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            label: Some("e".into()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn is_rotation(&self) -> bool {
        self.det() > 0.0
    }

    /// `self · other`, acting with `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) if a == "e" => Some(b.clone()),
            (Some(a), Some(b)) if b == "e" => Some(a.clone()),
            (Some(a), Some(b)) => Some(format!("{a}{b}")),
            _ => None,
        };
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            label,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.matrix.transpose(),
            label: self.label.as_ref().map(|l| format!("({l})^-1")),
        }
    }

    pub fn act(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn distance(&self, other: &GroupElement) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Rotation angle in `(-π, π]` of a 2×2 rotation.
    pub fn rotation_angle(&self) -> Option<f64> {
        (self.dim() == 2 && self.is_rotation())
            .then(|| self.matrix[(1, 0)].atan2(self.matrix[(0, 0)]))
    }

    /// Matrix entries snapped to nearby simple algebraic values, for display.
    pub fn snapped(&self) -> DMatrix<f64> {
        self.matrix.map(snap)
    }
}

/// Snaps `v` to the nearest of `0, ±1/2, ±1, ±√k/m, ±φ/2, ±1/(2φ)` when within 1e-9.
fn snap(v: f64) -> f64 {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut candidates = vec![0.0, 0.5, 1.0, golden / 2.0, 1.0 / (2.0 * golden)];
    for k in [2.0f64, 3.0, 5.0, 6.0] {
        for m in [1.0, 2.0, 3.0, 5.0, 6.0] {
            candidates.push(k.sqrt() / m);
            candidates.push(1.0 / (k.sqrt() * m));
        }
    }
    candidates
        .into_iter()
        .find(|c| (v.abs() - c).abs() < DEDUP_TOL)
        .map_or(v, |c| c.copysign(v))
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.snapped();
        let rows: Vec<String> = m
            .row_iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|v| format!("{:+.6}", v + 0.0)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        match &self.label {
            Some(l) => write!(f, "{l}: [{}]", rows.join(", ")),
            None => write!(f, "[{}]", rows.join(", ")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    elements: Vec<GroupElement>,
    generators: Vec<GroupElement>,
}

impl FiniteGroup {
    /// Closes `generators` under multiplication.
    ///
    /// Fails if more than `10·expected` products are formed (or 10⁴ when
    /// `expected` is `None`).
    pub fn generate(generators: Vec<GroupElement>, expected: Option<usize>) -> Result<Self> {
        let dim = generators
            .first()
            .map(GroupElement::dim)
            .ok_or_else(|| Error::Invalid("no generators".into()))?;
        if generators.iter().any(|g| g.dim() != dim) {
            return Err(Error::Invalid("generators of mixed dimension".into()));
        }
        let budget = expected.map_or(10_000, |n| 10 * n.max(1) * generators.len().max(1));
        let mut elements = vec![GroupElement::identity(dim)];
        let mut frontier = 0;
        let mut products = 0;
        while frontier < elements.len() {
            let x = elements[frontier].clone();
            frontier += 1;
            for g in &generators {
                products += 1;
                if products > budget {
                    return Err(Error::ClosureFailed { products });
                }
                let y = g.compose(&x);
                if !elements.iter().any(|e| e.distance(&y) < DEDUP_TOL) {
                    elements.push(y);
                }
            }
        }
        if let Some(n) = expected {
            if elements.len() != n {
                return Err(Error::Invalid(format!(
                    "closure produced {} elements, expected {n}",
                    elements.len()
                )));
            }
        }
        Ok(Self {
            elements,
            generators,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.iter().any(|e| e.distance(g) < DEDUP_TOL)
    }

    /// Checks closure, identity and inverses at the dedup tolerance.
    pub fn check_axioms(&self) -> Result<()> {
        if !self.contains(&GroupElement::identity(self.dim())) {
            return Err(Error::Invalid("identity missing".into()));
        }
        for a in &self.elements {
            if !self.contains(&a.inverse()) {
                return Err(Error::Invalid(format!("inverse of {a} missing")));
            }
            for b in &self.elements {
                if !self.contains(&a.compose(b)) {
                    return Err(Error::Invalid(format!("{a} · {b} not in group")));
                }
            }
        }
        Ok(())
    }
}

fn rot2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn reflection2(axis_angle: f64) -> DMatrix<f64> {
    let (s, c) = (2.0 * axis_angle).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, s, -c])
}

/// Symmetries of `sin²(nψ + phase)`: rotation by `π/n` and reflection about
/// the axis at angle `−phase/n`. Order `4n`.
pub fn dihedral_group(n: u32, phase: f64) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(crate::error::invalid_param("n", "must be at least 1"));
    }
    let nf = f64::from(n);
    let r = GroupElement::new(rot2(PI / nf), Some("r".into()))?;
    let s = GroupElement::new(reflection2(-phase / nf), Some("s".into()))?;
    FiniteGroup::generate(vec![r, s], Some(4 * n as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatonicKind {
    Tetra,
    Octa,
    Icosa,
}

impl PlatonicKind {
    pub fn order(self) -> usize {
        match self {
            PlatonicKind::Tetra => 12,
            PlatonicKind::Octa => 24,
            PlatonicKind::Icosa => 60,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlatonicKind::Tetra => "tetra",
            PlatonicKind::Octa => "octa",
            PlatonicKind::Icosa => "icosa",
        }
    }

    /// The sphere invariant index (`f1`, `f2`, `f3`) paired with this group.
    pub fn invariant_index(self) -> u8 {
        match self {
            PlatonicKind::Tetra => 1,
            PlatonicKind::Octa => 2,
            PlatonicKind::Icosa => 3,
        }
    }
}

impl FromStr for PlatonicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tetra" => Ok(PlatonicKind::Tetra),
            "octa" => Ok(PlatonicKind::Octa),
            "icosa" => Ok(PlatonicKind::Icosa),
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

fn element3(m: Matrix3<f64>, label: &str) -> Result<GroupElement> {
    GroupElement::new(
        DMatrix::from_iterator(3, 3, m.iter().copied()),
        Some(label.into()),
    )
}

/// Generator matrices of each rotation group.
///
/// Tetra and octa are aligned with the coordinate axes (so `xyz` is the
/// tetrahedral invariant); icosa has a 5-fold axis along `z` and a vertex of
/// the upper ring in the `xz` half-plane `x > 0`.
pub fn platonic_generators(kind: PlatonicKind) -> Result<Vec<GroupElement>> {
    let cycle = Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
    let half_turn_z = Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0));
    let quarter_turn_z = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    match kind {
        PlatonicKind::Tetra => Ok(vec![element3(cycle, "c")?, element3(half_turn_z, "h")?]),
        PlatonicKind::Octa => Ok(vec![element3(cycle, "c")?, element3(quarter_turn_z, "q")?]),
        PlatonicKind::Icosa => {
            let five = Rotation3::from_axis_angle(&Vector3::z_axis(), 2.0 * PI / 5.0);
            let s5 = 5f64.sqrt();
            // Midpoint of the edge from the north pole to the ring vertex at azimuth 0.
            let axis = Unit::new_normalize(Vector3::new(2.0 / s5, 0.0, 1.0 + 1.0 / s5));
            let two = Rotation3::from_axis_angle(&axis, PI);
            Ok(vec![
                element3(*five.matrix(), "f")?,
                element3(*two.matrix(), "t")?,
            ])
        }
    }
}

pub fn platonic_group(kind: PlatonicKind) -> Result<FiniteGroup> {
    FiniteGroup::generate(platonic_generators(kind)?, Some(kind.order()))
}

/// Maximum over samples and group elements of `|f(Rx) − f(x)| / (1 + |f(x)|)`
/// at random unit vectors `x`.
///
/// Points where `f` errors are redrawn, up to `20·samples` draws in total.
pub fn check_invariance<F, R>(f: F, group: &FiniteGroup, samples: usize, rng: &mut R) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
    R: Rng,
{
    let dim = group.dim();
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut draws = 0;
    'draw: while accepted < samples {
        draws += 1;
        if draws > 20 * samples.max(1) {
            return Err(Error::NoConvergence {
                iterations: draws,
                last_update: accepted as f64,
            });
        }
        let x = random_unit(rng, dim);
        let Ok(fx) = f(&x) else { continue };
        let mut local: f64 = 0.0;
        for g in group.elements() {
            let Ok(fy) = f(&g.act(&x)) else {
                continue 'draw;
            };
            local = local.max((fy - fx).abs() / (1.0 + fx.abs()));
        }
        worst = worst.max(local);
        accepted += 1;
    }
    Ok(worst)
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// The isometry of the relative subspace induced by relabelling particles:
/// particle `i` moves to slot `sigma[i]` (zero-based).
pub fn permutation_isometry(sigma: &[usize]) -> Result<GroupElement> {
    let n = sigma.len();
    if !(3..=4).contains(&n) {
        return Err(crate::error::invalid_param(
            "sigma",
            "must permute 3 or 4 letters",
        ));
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(crate::error::invalid_param("sigma", "not a permutation"));
        }
        seen[s] = true;
    }
    let mut p = DMatrix::zeros(n, n);
    for (i, &s) in sigma.iter().enumerate() {
        p[(s, i)] = 1.0;
    }
    let m = orthogonal_matrix(n);
    let full = &m * p * m.transpose();
    let sub = full.view((0, 0), (n - 1, n - 1)).into_owned();
    let label = format!(
        "σ{}",
        sigma
            .iter()
            .map(|s| (s + 1).to_string())
            .collect::<String>()
    );
    GroupElement::new(sub, Some(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        for (n, order) in [(1, 4), (3, 12), (4, 16)] {
            assert_eq!(dihedral_group(n, 0.3).unwrap().order(), order);
        }
        for kind in [PlatonicKind::Tetra, PlatonicKind::Octa, PlatonicKind::Icosa] {
            let g = platonic_group(kind).unwrap();
            assert_eq!(g.order(), kind.order());
            assert!(g.elements().iter().all(GroupElement::is_rotation));
        }
        assert!(dihedral_group(0, 0.0).is_err());
    }

    #[test]
    fn permutation_examples() {
        let id = permutation_isometry(&[0, 1, 2]).unwrap();
        assert!(id.distance(&GroupElement::identity(2)) < 1e-15);
        let t = permutation_isometry(&[1, 0, 2]).unwrap();
        assert!((t.det() + 1.0).abs() < 1e-12);
        let c = permutation_isometry(&[1, 2, 0]).unwrap();
        assert!((c.matrix().trace() + 1.0).abs() < 1e-12);
        assert!((c.rotation_angle().unwrap().abs() - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(permutation_isometry(&[0, 0, 1]).is_err());
        assert!(permutation_isometry(&[0, 1]).is_err());
    }

    #[test]
    fn snapping_for_display() {
        let g = platonic_group(PlatonicKind::Icosa).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let text = g.generators()[0].to_string();
        assert!(text.starts_with("f: "), "{text}");
        assert_eq!(snap(golden / 2.0 + 1e-12), golden / 2.0);
        assert_eq!(snap(-0.5 - 1e-12), -0.5);
    }

    #[test]
    fn rejects_non_orthogonal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GroupElement::new(m, None).is_err());
    }
}
