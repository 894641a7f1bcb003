//! Marching squares with root-refined edge crossings.

use std::collections::HashMap;

/// A node grid over `[x0, x1] × [y0, y1]` with nodes at cell centers, so
/// no node sits on the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    /// Close the grid across `x1 → x0`.
    pub periodic_x: bool,
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * (self.x1 - self.x0) / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * (self.y1 - self.y0) / self.ny as f64
    }

    fn columns(&self) -> usize {
        if self.periodic_x {
            self.nx + 1
        } else {
            self.nx
        }
    }
}

/// Sampled field values, column-major in `x`.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn sample(grid: Grid, f: &impl Fn(f64, f64) -> f64) -> Self {
        let cols = grid.columns();
        let mut values = Vec::with_capacity(cols * grid.ny);
        for i in 0..cols {
            for j in 0..grid.ny {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Root of `g` on the segment `a → b`, given `g(a)` and `g(b)` of opposite sign.
fn edge_root(
    g: &impl Fn(f64, f64) -> f64,
    a: (f64, f64),
    b: (f64, f64),
    ga: f64,
    gb: f64,
) -> (f64, f64) {
    let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let (mut lo, mut hi, mut flo, mut fhi) = (0.0, 1.0, ga, gb);
    let mut side = 0i8;
    let mut t = flo / (flo - fhi);
    for _ in 0..100 {
        let p = at(t);
        let f = g(p.0, p.1);
        if f == 0.0 || !f.is_finite() {
            break;
        }
        if (f > 0.0) == (flo > 0.0) {
            lo = t;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 1e-15 {
            break;
        }
        t = lo + (hi - lo) * flo / (flo - fhi);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
    }
    at(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// Between nodes `(i, j)` and `(i+1, j)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i, j+1)`.
    V(usize, usize),
}

/// Level-`level` isolines of `f`, traced on `field` and refined on `f` itself.
pub fn contour(field: &Field, f: &impl Fn(f64, f64) -> f64, level: f64) -> Vec<Vec<(f64, f64)>> {
    let grid = field.grid;
    let g = |x: f64, y: f64| f(x, y) - level;
    let val = |i: usize, j: usize| field.at(i, j) - level;
    let node = |i: usize, j: usize| (grid.x(i), grid.y(j));
    let mut points: HashMap<Edge, (f64, f64)> = HashMap::new();
    let mut point = |e: Edge| -> (f64, f64) {
        *points.entry(e).or_insert_with(|| {
            let (a, b) = match e {
                Edge::H(i, j) => ((i, j), (i + 1, j)),
                Edge::V(i, j) => ((i, j), (i, j + 1)),
            };
            edge_root(
                &g,
                node(a.0, a.1),
                node(b.0, b.1),
                val(a.0, a.1),
                val(b.0, b.1),
            )
        })
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..grid.columns() - 1 {
        for j in 0..grid.ny - 1 {
            let v = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let case = v
                .iter()
                .enumerate()
                .fold(0u8, |c, (k, x)| c | (u8::from(*x > 0.0) << k));
            let (e0, e1, e2, e3) = (
                Edge::H(i, j),
                Edge::V(i + 1, j),
                Edge::H(i, j + 1),
                Edge::V(i, j),
            );
            let center_above = || {
                let (cx, cy) = (
                    0.5 * (grid.x(i) + grid.x(i + 1)),
                    0.5 * (grid.y(j) + grid.y(j + 1)),
                );
                g(cx, cy) > 0.0
            };
            let segs: &[(Edge, Edge)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(e3, e0)],
                2 | 13 => &[(e0, e1)],
                3 | 12 => &[(e3, e1)],
                4 | 11 => &[(e1, e2)],
                6 | 9 => &[(e0, e2)],
                7 | 8 => &[(e3, e2)],
                5 => {
                    if center_above() {
                        &[(e0, e1), (e2, e3)]
                    } else {
                        &[(e3, e0), (e1, e2)]
                    }
                }
                10 => {
                    if center_above() {
                        &[(e3, e0), (e1, e2)]
                    } else {
                        &[(e0, e1), (e2, e3)]
                    }
                }
                _ => unreachable!(),
            };
            segments.extend_from_slice(segs);
        }
    }

    // Chain segments sharing an edge point into polylines.
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut chain = std::collections::VecDeque::from([a, b]);
        for forward in [true, false] {
            loop {
                let end = if forward {
                    *chain.back().unwrap()
                } else {
                    *chain.front().unwrap()
                };
                let next = by_edge[&end].iter().copied().find(|k| !used[*k]);
                let Some(k) = next else { break };
                used[k] = true;
                let (p, q) = segments[k];
                let other = if p == end { q } else { p };
                if forward {
                    chain.push_back(other);
                } else {
                    chain.push_front(other);
                }
            }
        }
        lines.push(chain.into_iter().map(&mut point).collect());
    }
    lines
}
