//! Seeded random phase-space states away from singular walls.

use std::f64::consts::PI;

use rand::Rng;

use crate::coords::{Chart, PhaseState};
use crate::error::{Error, Result};
use crate::potentials::Potential;

/// Minimum wall margin used for bracket checks.
pub const DEFAULT_MARGIN: f64 = 0.25;

const MAX_TRIES: usize = 100_000;

/// Box from which positions are drawn; momenta are uniform in `[-1, 1]`.
fn draw_q<R: Rng>(rng: &mut R, chart: Chart) -> Result<Vec<f64>> {
    let radial = 0.5..2.0;
    Ok(match chart {
        Chart::Polar2 => vec![rng.gen_range(radial), rng.gen_range(0.0..2.0 * PI)],
        Chart::Cylindrical3 => vec![
            rng.gen_range(radial),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(-1.5..1.5),
        ],
        Chart::Spherical3 => vec![
            rng.gen_range(radial),
            rng.gen_range(0.05..PI - 0.05),
            rng.gen_range(0.0..2.0 * PI),
        ],
        Chart::SphericalCylindrical4 => vec![
            rng.gen_range(radial),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.05..PI - 0.05),
            rng.gen_range(-1.5..1.5),
        ],
        Chart::Sphere2 => vec![rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.0..2.0 * PI)],
        Chart::Circle1 => vec![rng.gen_range(0.0..2.0 * PI)],
        c @ (Chart::CartesianLine(_)
        | Chart::OrthogonalZ(_)
        | Chart::Cartesian2
        | Chart::Cartesian3) => (0..c.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        Chart::Extended(_) => {
            return Err(Error::Invalid(format!("no sampler for {chart}")));
        }
    })
}

/// A random state in `chart` whose wall margin for `pot` is at least `margin`.
pub fn random_state<R: Rng>(
    rng: &mut R,
    chart: Chart,
    pot: Option<&Potential>,
    margin: f64,
) -> Result<PhaseState> {
    for _ in 0..MAX_TRIES {
        let q = draw_q(rng, chart)?;
        let p = (0..q.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = PhaseState::new(chart, q, p)?;
        let Some(pot) = pot else { return Ok(s) };
        let ok = pot.wall_margin(chart, &s.q).is_ok_and(|m| m >= margin)
            && pot.value_at(chart, &s.q).is_ok_and(f64::is_finite);
        if ok {
            return Ok(s);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_TRIES,
        last_update: margin,
    })
}
