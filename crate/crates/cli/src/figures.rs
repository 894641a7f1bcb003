//! Isopotential maps on the sphere and Poincaré-section plots.

use std::f64::consts::{FRAC_PI_2, PI};

use supint_core::dynamics::SectionSet;
use supint_core::potentials::platonic_invariant;
use supint_core::real::{gradient, Dual};

use crate::config::IsoSpec;
use crate::contour::{contour, Field, Grid};
use crate::svg::{Layer, Mark, SvgPlot, SET_COLORS};

pub type Polyline = Vec<(f64, f64)>;

/// Contours of `V = 1/f` in the equirectangular `(φ, θ)` plane.
#[derive(Debug, Clone)]
pub struct IsoMap {
    pub which: u8,
    /// Zeros of `f`, where the potential is infinite.
    pub zero_set: Vec<Polyline>,
    /// `(V level, lines)`, positive levels first in increasing order, then
    /// negative levels in decreasing order.
    pub levels: Vec<(f64, Vec<Polyline>)>,
}

fn invariant(which: u8) -> impl Fn(f64, f64) -> f64 {
    move |phi: f64, theta: f64| platonic_invariant(which, theta, phi)
}

/// Field whose sign changes trace the zero set of `f_which`. `f2 = f1²`
/// never changes sign, so its zeros are traced on `f1`.
pub fn zero_field(which: u8) -> u8 {
    if which == 2 {
        1
    } else {
        which
    }
}

pub fn sphere_grid(spec: &IsoSpec) -> Grid {
    Grid {
        x0: 0.0,
        x1: 2.0 * PI,
        y0: 0.0,
        y1: PI,
        nx: spec.columns,
        ny: spec.rows,
        periodic_x: true,
    }
}

pub fn isopotential_map(which: u8, spec: &IsoSpec) -> IsoMap {
    let grid = sphere_grid(spec);
    let f = invariant(which);
    let field = Field::sample(grid, &f);
    let zf = invariant(zero_field(which));
    let zero_set = contour(&Field::sample(grid, &zf), &zf, 0.0);

    let (fmin, fmax) = field
        .values()
        .iter()
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let n = spec.levels;
    let mut levels = Vec::new();
    // f-levels evenly spaced toward the extremum; V = 1/f decreases along them.
    for k in (1..=n).rev() {
        if fmax > 0.0 {
            let fl = fmax * k as f64 / (n + 1) as f64;
            levels.push((1.0 / fl, contour(&field, &f, fl)));
        }
    }
    for k in (1..=n).rev() {
        if fmin < 0.0 {
            let fl = fmin * k as f64 / (n + 1) as f64;
            levels.push((1.0 / fl, contour(&field, &f, fl)));
        }
    }
    IsoMap {
        which,
        zero_set,
        levels,
    }
}

fn lerp_color(a: [u8; 3], b: [u8; 3], t: f64) -> String {
    let c: Vec<u8> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (f64::from(*x) + t * (f64::from(y) - f64::from(*x))).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Yellow to red for increasing positive values, green to blue for decreasing negative ones.
pub fn level_color(rank: usize, count: usize, positive: bool) -> String {
    let t = if count <= 1 {
        0.0
    } else {
        rank as f64 / (count - 1) as f64
    };
    if positive {
        lerp_color([240, 210, 40], [200, 20, 20], t)
    } else {
        lerp_color([60, 190, 140], [30, 50, 200], t)
    }
}

pub fn isopotential_svg(map: &IsoMap, description: &str) -> String {
    let mut plot = SvgPlot::new(
        format!(
            "platonic-{}: isolines of 1/f{} ({description})",
            map.which, map.which
        ),
        "phi",
        "theta",
    );
    plot.width = 900;
    plot.height = 520;
    plot.x_range = Some((0.0, 2.0 * PI));
    plot.y_range = Some((PI, 0.0));
    let pos: Vec<_> = map.levels.iter().filter(|(v, _)| *v > 0.0).collect();
    let neg: Vec<_> = map.levels.iter().filter(|(v, _)| *v < 0.0).collect();
    for (group, positive) in [(&pos, true), (&neg, false)] {
        for (rank, (v, lines)) in group.iter().enumerate() {
            plot.layers.push(Layer {
                label: Some(format!("V = {v:.3}")),
                color: level_color(rank, group.len(), positive),
                width: 0.9,
                mark: Mark::Lines(lines.clone()),
            });
        }
    }
    plot.layers.push(Layer {
        label: Some("V infinite".into()),
        color: "#000000".into(),
        width: 1.6,
        mark: Mark::Lines(map.zero_set.clone()),
    });
    plot.render()
}

/// Max first-order distance `|f|/|∇f|` (sphere metric) of zero-set vertices
/// from the true zero set of the closed form.
pub fn zero_set_distance(map: &IsoMap) -> f64 {
    let which = zero_field(map.which);
    let mut worst: f64 = 0.0;
    for &(phi, theta) in map.zero_set.iter().flatten() {
        let g = gradient(&[theta, phi], |a: &[Dual]| {
            Ok::<_, supint_core::Error>(platonic_invariant(which, a[0], a[1]))
        })
        .expect("closed form is smooth");
        let v = platonic_invariant(which, theta, phi);
        let norm = (g[0] * g[0] + (g[1] / theta.sin()).powi(2)).sqrt();
        if norm > 1e-8 {
            worst = worst.max(v.abs() / norm);
        }
    }
    worst
}

/// Distance in the `(φ, θ)` plane from the zero set of
/// `f1 ∝ cos θ cos φ sin φ`: the equator and the meridians `φ = kπ/2`.
pub fn distance_to_octant_walls(phi: f64, theta: f64) -> f64 {
    let to_meridian = {
        let r = phi.rem_euclid(FRAC_PI_2);
        r.min(FRAC_PI_2 - r)
    };
    to_meridian.min((theta - FRAC_PI_2).abs())
}

pub fn section_svg(set: &SectionSet, title: &str, q_label: &str, p_label: &str) -> String {
    let mut plot = SvgPlot::new(title, q_label, p_label);
    for (k, entry) in set.sets.iter().enumerate() {
        plot.layers.push(Layer {
            label: Some(entry.id.clone()),
            color: SET_COLORS[k % SET_COLORS.len()].into(),
            width: 1.2,
            mark: Mark::Points(entry.points.iter().map(|p| (p.q, p.p)).collect()),
        });
    }
    plot.render()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octant_walls_are_zero_set() {
        let spec = IsoSpec {
            levels: 0,
            columns: 120,
            rows: 60,
        };
        for which in [1, 2] {
            let map = isopotential_map(which, &spec);
            assert!(map.levels.is_empty());
            for &(phi, theta) in map.zero_set.iter().flatten() {
                assert!(
                    distance_to_octant_walls(phi, theta) <= 1e-9,
                    "{phi} {theta}"
                );
            }
        }
    }

    #[test]
    fn second_invariant_has_no_negative_levels() {
        let map = isopotential_map(
            2,
            &IsoSpec {
                levels: 3,
                columns: 90,
                rows: 45,
            },
        );
        assert_eq!(map.levels.len(), 3);
        assert!(map.levels.iter().all(|(v, _)| *v > 0.0));
        let map = isopotential_map(
            1,
            &IsoSpec {
                levels: 3,
                columns: 90,
                rows: 45,
            },
        );
        assert_eq!(map.levels.iter().filter(|(v, _)| *v < 0.0).count(), 3);
    }

    #[test]
    fn level_palette_endpoints() {
        assert_eq!(level_color(0, 3, true), "#f0d228");
        assert_eq!(level_color(2, 3, true), "#c81414");
        assert_eq!(level_color(0, 1, false), "#3cbe8c");
    }
}
