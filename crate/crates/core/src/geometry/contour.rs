//! Marching-squares extraction of level curves from an exact scalar field.
//!
//! Cells are walked row-major; each lattice edge with a sign change gets a
//! single crossing vertex, polished onto the level set by bisection along the
//! edge followed by two Newton steps along the gradient. Segments are linked
//! into chains through the shared edge crossings (every crossing has degree
//! at most two), then oriented so the superlevel side lies to the left of the
//! direction of travel; closed contours around superlevel islands therefore
//! come out counterclockwise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{curvature, radial_derivative, Rect, ScalarField};

/// Sampling window: node counts `nx * ny` over `[xmin,xmax] x [ymin,ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridWindow {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridWindow {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) {
            return Err(Error::InvalidConfig(format!(
                "degenerate window [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        if nx < 16 || ny < 16 {
            return Err(Error::InvalidConfig(format!(
                "window needs at least 16 samples per axis (got {nx} x {ny})"
            )));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
        })
    }

    /// Window covering `rect` inflated by the given factor about its center.
    pub fn from_rect(rect: Rect, inflate: f64, nx: usize, ny: usize) -> Result<Self> {
        let cx = 0.5 * (rect.xmin + rect.xmax);
        let cy = 0.5 * (rect.ymin + rect.ymax);
        let hx = 0.5 * (rect.xmax - rect.xmin) * inflate;
        let hy = 0.5 * (rect.ymax - rect.ymin) * inflate;
        Self::new(cx - hx, cx + hx, cy - hy, cy + hy, nx, ny)
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.xmin + self.dx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.ymin + self.dy() * j as f64
    }

    pub fn diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn doubled(&self) -> Self {
        Self {
            nx: self.nx * 2,
            ny: self.ny * 2,
            ..*self
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    /// Node index nearest to a point (clamped to the window).
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, usize) {
        let i = ((x - self.xmin) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64);
        let j = ((y - self.ymin) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64);
        (i as usize, j as usize)
    }
}

/// Oriented polyline approximating a level curve, with per-vertex data.
///
/// Closed contours store the first vertex once (implicit closure) and carry
/// at least 8 vertices. `counterclockwise` is meaningful for closed contours
/// only. Curvature is NaN at (never expected) degenerate-gradient vertices.
#[derive(Debug, Clone)]
pub struct Contour {
    pub vertices: Vec<(f64, f64)>,
    pub closed: bool,
    pub counterclockwise: bool,
    pub grad_norm: Vec<f64>,
    pub curvature: Vec<f64>,
    pub radial_derivative: Vec<f64>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area; positive for counterclockwise closed contours.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            acc += x0 * y1 - x1 * y0;
        }
        0.5 * acc
    }

    /// Even-odd point-in-polygon test (closed contours).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = self.vertices[i];
            let (xj, yj) = self.vertices[j];
            if (yi > y) != (yj > y) {
                let x_cross = xj + (y - yj) / (yi - yj) * (xi - xj);
                if x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Total polyline length (including the closing segment when closed).
    pub fn length(&self) -> f64 {
        let n = self.vertices.len();
        let last = if self.closed { n } else { n - 1 };
        (0..last)
            .map(|i| {
                let (x0, y0) = self.vertices[i];
                let (x1, y1) = self.vertices[(i + 1) % n];
                (x1 - x0).hypot(y1 - y0)
            })
            .sum()
    }
}

/// All level-curve components of `{u = level}` intersecting the window.
///
/// Contours touching the window edge are returned flagged open; saddle cells
/// are disambiguated by evaluating the exact field at the cell center. Closed
/// chains shorter than 8 vertices are sub-grid artifacts and are dropped.
pub fn extract_level_set<F: ScalarField>(
    field: &F,
    level: f64,
    window: &GridWindow,
    refine_tol: f64,
) -> Result<Vec<Contour>> {
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidConfig("refine_tol must be positive".into()));
    }
    let values = sample_grid(field, window);
    extract_from_samples(field, level, window, refine_tol, &values)
}

/// Row-major node values; rows are filled in parallel.
pub(crate) fn sample_grid<F: ScalarField>(field: &F, window: &GridWindow) -> Vec<f64> {
    use rayon::prelude::*;
    let (nx, ny) = (window.nx, window.ny);
    let mut values = vec![0.0; nx * ny];
    values
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = window.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = field.value(window.x(i), y);
            }
        });
    values
}

pub(crate) fn extract_from_samples<F: ScalarField>(
    field: &F,
    level: f64,
    window: &GridWindow,
    refine_tol: f64,
    values: &[f64],
) -> Result<Vec<Contour>> {
    let (nx, ny) = (window.nx, window.ny);
    let inside = |i: usize, j: usize| values[j * nx + i] > level;

    // one crossing vertex per lattice edge with a sign change
    let h_edge = |i: usize, j: usize| j * (nx - 1) + i; // (i,j)-(i+1,j)
    let v_edge = |i: usize, j: usize| j * nx + i; // (i,j)-(i,j+1)
    let mut h_cross = vec![u32::MAX; (nx - 1) * ny];
    let mut v_cross = vec![u32::MAX; nx * (ny - 1)];
    let mut points: Vec<(f64, f64)> = Vec::new();

    for j in 0..ny {
        for i in 0..nx - 1 {
            if inside(i, j) != inside(i + 1, j) {
                let p0 = (window.x(i), window.y(j));
                let p1 = (window.x(i + 1), window.y(j));
                let u0 = values[j * nx + i];
                let u1 = values[j * nx + i + 1];
                h_cross[h_edge(i, j)] = points.len() as u32;
                points.push(polish_crossing(field, level, p0, u0, p1, u1, refine_tol));
            }
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            if inside(i, j) != inside(i, j + 1) {
                let p0 = (window.x(i), window.y(j));
                let p1 = (window.x(i), window.y(j + 1));
                let u0 = values[j * nx + i];
                let u1 = values[(j + 1) * nx + i];
                v_cross[v_edge(i, j)] = points.len() as u32;
                points.push(polish_crossing(field, level, p0, u0, p1, u1, refine_tol));
            }
        }
    }

    // cell pass: collect undirected segments between edge crossings
    let mut segments: Vec<(u32, u32)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let mut case = 0u8;
            if inside(i, j) {
                case |= 1; // bottom-left
            }
            if inside(i + 1, j) {
                case |= 2; // bottom-right
            }
            if inside(i + 1, j + 1) {
                case |= 4; // top-right
            }
            if inside(i, j + 1) {
                case |= 8; // top-left
            }
            if case == 0 || case == 15 {
                continue;
            }
            let b = || h_cross[h_edge(i, j)];
            let t = || h_cross[h_edge(i, j + 1)];
            let l = || v_cross[v_edge(i, j)];
            let r = || v_cross[v_edge(i + 1, j)];
            match case {
                1 | 14 => segments.push((l(), b())),
                2 | 13 => segments.push((b(), r())),
                3 | 12 => segments.push((l(), r())),
                4 | 11 => segments.push((r(), t())),
                6 | 9 => segments.push((b(), t())),
                7 | 8 => segments.push((t(), l())),
                5 | 10 => {
                    let cx = 0.5 * (window.x(i) + window.x(i + 1));
                    let cy = 0.5 * (window.y(j) + window.y(j + 1));
                    let center_in = field.value(cx, cy) > level;
                    let band_5 = case == 5; // inside corners bl+tr
                    if center_in == band_5 {
                        // diagonal band joins the inside corners
                        segments.push((b(), r()));
                        segments.push((t(), l()));
                    } else {
                        segments.push((l(), b()));
                        segments.push((r(), t()));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let chains = link_chains(points.len(), &segments);

    let mut out = Vec::new();
    for (chain, closed) in chains {
        if closed && chain.len() < 8 {
            continue;
        }
        if chain.len() < 2 {
            continue;
        }
        let mut vertices: Vec<(f64, f64)> =
            chain.iter().map(|&c| points[c as usize]).collect();
        orient_superlevel_left(field, &mut vertices, closed);
        let mut contour = Contour {
            closed,
            counterclockwise: false,
            grad_norm: Vec::with_capacity(vertices.len()),
            curvature: Vec::with_capacity(vertices.len()),
            radial_derivative: Vec::with_capacity(vertices.len()),
            vertices,
        };
        contour.counterclockwise = closed && contour.signed_area() > 0.0;
        let center_x = field.anchor().0;
        for &(x, y) in &contour.vertices {
            let (gx, gy) = field.gradient(x, y);
            contour.grad_norm.push(gx.hypot(gy));
            contour
                .curvature
                .push(curvature(field, x, y).unwrap_or(f64::NAN));
            contour
                .radial_derivative
                .push(radial_derivative(field, center_x, x, y));
        }
        out.push(contour);
    }
    Ok(out)
}

/// Bisection along the lattice edge to `|u - level| <= refine_tol`, then two
/// Newton steps along the gradient; the Newton move is kept only if it does
/// not worsen the residual.
fn polish_crossing<F: ScalarField>(
    field: &F,
    level: f64,
    p0: (f64, f64),
    u0: f64,
    p1: (f64, f64),
    u1: f64,
    refine_tol: f64,
) -> (f64, f64) {
    // a is the endpoint on the superlevel side, b the other
    let (mut a, fa, mut b, fb) = if u0 > level {
        (p0, u0 - level, p1, u1 - level)
    } else {
        (p1, u1 - level, p0, u0 - level)
    };
    let (mut best, mut best_res) = if fa.abs() <= fb.abs() {
        (a, fa.abs())
    } else {
        (b, fb.abs())
    };
    for _ in 0..80 {
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let fm = field.value(mid.0, mid.1) - level;
        if fm.abs() < best_res {
            best = mid;
            best_res = fm.abs();
        }
        if fm.abs() <= 0.25 * refine_tol {
            break;
        }
        if fm > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Newton along the gradient
    let mut p = best;
    for _ in 0..2 {
        let r = field.value(p.0, p.1) - level;
        let (gx, gy) = field.gradient(p.0, p.1);
        let g2 = gx * gx + gy * gy;
        if g2 < 1e-30 {
            break;
        }
        p = (p.0 - r * gx / g2, p.1 - r * gy / g2);
    }
    if (field.value(p.0, p.1) - level).abs() <= best_res.max(0.25 * refine_tol) {
        p
    } else {
        best
    }
}

/// Link segments into chains through shared crossings. Every crossing has
/// degree <= 2, so the segment graph is a disjoint union of paths and cycles.
fn link_chains(n_points: usize, segments: &[(u32, u32)]) -> Vec<(Vec<u32>, bool)> {
    const NONE: u32 = u32::MAX;
    let mut incident = vec![[NONE; 2]; n_points];
    for (s, &(a, b)) in segments.iter().enumerate() {
        for p in [a, b] {
            let slot = &mut incident[p as usize];
            if slot[0] == NONE {
                slot[0] = s as u32;
            } else if slot[1] == NONE {
                slot[1] = s as u32;
            }
            // degree > 2 cannot occur with per-edge crossings; extra incidences
            // would only come from duplicate segments and are ignored
        }
    }
    let other = |s: u32, p: u32| {
        let (a, b) = segments[s as usize];
        if a == p {
            b
        } else {
            a
        }
    };
    let mut visited = vec![false; segments.len()];
    let mut chains = Vec::new();
    for s0 in 0..segments.len() {
        if visited[s0] {
            continue;
        }
        visited[s0] = true;
        let (a, b) = segments[s0];
        let mut chain: std::collections::VecDeque<u32> = [a, b].into_iter().collect();
        let mut closed = false;
        // extend forward from the back
        loop {
            let tail = *chain.back().unwrap();
            let next = incident[tail as usize]
                .iter()
                .copied()
                .find(|&s| s != NONE && !visited[s as usize]);
            match next {
                Some(s) => {
                    visited[s as usize] = true;
                    let q = other(s, tail);
                    if q == *chain.front().unwrap() {
                        closed = true;
                        break;
                    }
                    chain.push_back(q);
                }
                None => break,
            }
        }
        if !closed {
            // extend backward from the front
            loop {
                let head = *chain.front().unwrap();
                let next = incident[head as usize]
                    .iter()
                    .copied()
                    .find(|&s| s != NONE && !visited[s as usize]);
                match next {
                    Some(s) => {
                        visited[s as usize] = true;
                        chain.push_front(other(s, head));
                    }
                    None => break,
                }
            }
        }
        chains.push((chain.into_iter().collect(), closed));
    }
    chains
}

/// Reverse the vertex order if needed so the superlevel side is on the left.
/// Decided at the vertex with the strongest gradient: with tangent `t` and
/// gradient `g`, the superlevel side is left iff `cross(t, g) > 0`.
fn orient_superlevel_left<F: ScalarField>(
    field: &F,
    vertices: &mut Vec<(f64, f64)>,
    closed: bool,
) {
    let n = vertices.len();
    if n < 2 {
        return;
    }
    let mut best = 0;
    let mut best_g = f64::NEG_INFINITY;
    let mut grads = vec![(0.0, 0.0); n];
    for (i, &(x, y)) in vertices.iter().enumerate() {
        let g = field.gradient(x, y);
        grads[i] = g;
        let gn = g.0.hypot(g.1);
        if gn > best_g {
            best_g = gn;
            best = i;
        }
    }
    let prev = if best == 0 {
        if closed {
            n - 1
        } else {
            0
        }
    } else {
        best - 1
    };
    let next = if best + 1 == n {
        if closed {
            0
        } else {
            n - 1
        }
    } else {
        best + 1
    };
    let t = (
        vertices[next].0 - vertices[prev].0,
        vertices[next].1 - vertices[prev].1,
    );
    let g = grads[best];
    if t.0 * g.1 - t.1 * g.0 < 0.0 {
        vertices.reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ImplicitField, RadialField, RootConfig, StripField};

    #[test]
    fn strip_level_zero_gives_two_open_lines() {
        let window = GridWindow::new(-2.0, 2.0, -2.0, 2.0, 64, 64).unwrap();
        let contours = extract_level_set(&StripField, 0.0, &window, 1e-9).unwrap();
        assert_eq!(contours.len(), 2);
        for c in &contours {
            assert!(!c.closed);
            for &(_, y) in &c.vertices {
                assert!((y.abs() - 1.0).abs() <= 1e-9, "y = {y}");
            }
        }
        // one line at y = +1, the other at y = -1
        let mut means: Vec<f64> = contours
            .iter()
            .map(|c| c.vertices.iter().map(|v| v.1).sum::<f64>() / c.len() as f64)
            .collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((means[0] + 1.0).abs() < 1e-6 && (means[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disk_level_zero_is_unit_circle() {
        let disk = RadialField { radius: 1.0 };
        let window = GridWindow::new(-1.5, 1.5, -1.5, 1.5, 128, 128).unwrap();
        let contours = extract_level_set(&disk, 0.0, &window, 1e-10).unwrap();
        assert_eq!(contours.len(), 1);
        let c = &contours[0];
        assert!(c.closed);
        assert!(c.counterclockwise);
        assert!(c.len() >= 8);
        for &(x, y) in &c.vertices {
            // |u| <= tol at radius r means |r - 1| <= ~2 tol
            assert!((x.hypot(y) - 1.0).abs() <= 1e-9);
        }
        assert!((c.signed_area() - std::f64::consts::PI).abs() < 0.01);
    }

    #[test]
    fn vertices_satisfy_level_and_spacing_invariants() {
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 1e-3).unwrap();
        let field = ImplicitField::new(cfg).unwrap();
        let window = GridWindow::new(-14.0, 14.0, -1.6, 1.6, 512, 128).unwrap();
        let tol = 1e-9;
        let contours = extract_level_set(&field, 0.0, &window, tol).unwrap();
        assert!(!contours.is_empty());
        let max_step = 2.0 * window.diagonal();
        for c in &contours {
            for &(x, y) in &c.vertices {
                assert!((field.value(x, y)).abs() <= tol);
            }
            let last = if c.closed { c.len() } else { c.len() - 1 };
            for i in 0..last {
                let (x0, y0) = c.vertices[i];
                let (x1, y1) = c.vertices[(i + 1) % c.len()];
                assert!((x1 - x0).hypot(y1 - y0) <= max_step);
            }
        }
    }

    #[test]
    fn closed_island_component_sits_inside_prediction_rect() {
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 1e-3).unwrap();
        let field = ImplicitField::new(cfg).unwrap();
        let pred = crate::field::predictions(field.config()).unwrap();
        let window = GridWindow::from_rect(pred.rect, 1.05, 1024, 256).unwrap();
        let contours = extract_level_set(&field, 0.0, &window, 1e-9).unwrap();
        let enclosing: Vec<&Contour> = contours
            .iter()
            .filter(|c| c.closed && c.contains(field.anchor().0, field.anchor().1))
            .collect();
        assert_eq!(enclosing.len(), 1);
        for &(x, y) in &enclosing[0].vertices {
            assert!(x > pred.rect.xmin && x < pred.rect.xmax);
            assert!(y > pred.rect.ymin && y < pred.rect.ymax);
        }
    }
}
